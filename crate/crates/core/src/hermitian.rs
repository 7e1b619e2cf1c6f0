//! Dense kernels for complex Hermitian positive definite matrices.
//!
//! Every `M⁻¹x`, `S⁻¹x` and `det(·)` used by the detectors goes through a
//! [`HermitianFactor`]; nothing in the crate forms an explicit inverse.
//! Determinants are only ever handled as log-determinants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative tolerance on `‖A − A†‖_max / ‖A‖_max` accepted by [`cholesky`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `A = L L†`.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    n: usize,
    // row-major, only the lower triangle is meaningful
    l: Vec<Complex64>,
}

/// Factors a Hermitian positive definite matrix.
///
/// The input is checked for Hermitian symmetry, averaged with its conjugate
/// transpose, then factored. A non-positive pivot yields
/// [`Error::NotPositiveDefinite`], which is how a rank-deficient sample
/// covariance (`K_S < N`) surfaces.
pub fn cholesky(a: &CMat) -> Result<HermitianFactor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let aij = a[(i, j)];
            scale = scale.max(aij.norm());
            if i >= j {
                asym = asym.max((aij - a[(j, i)].conj()).norm());
            }
        }
    }
    if !scale.is_finite() {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    if scale > 0.0 && asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian {
            asymmetry: asym / scale,
        });
    }

    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            // symmetrized entry (i, j) of the lower triangle
            let aij = if i == j {
                Complex64::new(a[(i, i)].re, 0.0)
            } else {
                (a[(i, j)] + a[(j, i)].conj()) * 0.5
            };
            l[i * n + j] = aij;
        }
    }
    factor_in_place(n, &mut l)?;
    Ok(HermitianFactor { n, l })
}

fn factor_in_place(n: usize, l: &mut [Complex64]) -> Result<()> {
    for i in 0..n {
        let (done, rest) = l.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..i {
            let row_j = &done[j * n..j * n + n];
            let mut s = row_i[j];
            for k in 0..j {
                s -= row_i[k] * row_j[k].conj();
            }
            row_i[j] = s / row_j[j].re;
        }
        let mut d = row_i[i].re;
        for k in 0..i {
            d -= row_i[k].norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        row_i[i] = Complex64::new(d.sqrt(), 0.0);
    }
    Ok(())
}

impl HermitianFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.l[i * self.n + j]
    }

    /// The factor as a dense lower-triangular matrix.
    pub fn lower(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| {
            if j <= i {
                self.at(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `L L†`.
    pub fn reconstruct(&self) -> CMat {
        let l = self.lower();
        &l * l.adjoint()
    }

    /// `log det A = 2 Σ log L_kk`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.n).map(|k| self.at(k, k).re.ln()).sum::<f64>()
    }

    /// Solves `L y = b` (whitening).
    pub fn whiten_into(&self, b: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = b[i];
            for (lk, yk) in row.iter().zip(y.iter()) {
                s -= lk * yk;
            }
            y[i] = s / self.l[i * n + i].re;
        }
    }

    /// `y = L u` (coloring).
    pub fn color_into(&self, u: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(y.len(), n);
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.l[i * n..i * n + i + 1];
            *yi = row.iter().zip(u).map(|(lk, uk)| lk * uk).sum();
        }
    }

    pub fn whiten(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.whiten_into(b, &mut y);
        y
    }

    /// Solves `L† x = y` in place.
    fn back_substitute(&self, x: &mut [Complex64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.at(k, i).conj() * x[k];
            }
            x[i] = s / self.at(i, i).re;
        }
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &CVec) -> Result<CVec> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} for a {}x{} factor",
                b.len(),
                self.n,
                self.n
            )));
        }
        let mut x = self.whiten(b.as_slice());
        self.back_substitute(&mut x);
        Ok(CVec::from_vec(x))
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        if b.nrows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows for a {}x{} factor",
                b.nrows(),
                self.n,
                self.n
            )));
        }
        let mut out = CMat::zeros(self.n, b.ncols());
        for c in 0..b.ncols() {
            let mut x = self.whiten(column(b, c));
            self.back_substitute(&mut x);
            out.column_mut(c).copy_from_slice(&x);
        }
        Ok(out)
    }

    /// `v† A⁻¹ z`.
    pub fn quad_form(&self, v: &[Complex64], z: &[Complex64]) -> Complex64 {
        let wv = self.whiten(v);
        let wz = self.whiten(z);
        dot(&wv, &wz)
    }
}

pub fn logdet(f: &HermitianFactor) -> f64 {
    f.logdet()
}

pub fn solve(f: &HermitianFactor, b: &CMat) -> Result<CMat> {
    f.solve(b)
}

pub fn quad_form(v: &CVec, f: &HermitianFactor, z: &CVec) -> Result<Complex64> {
    if v.len() != f.dim() || z.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "quadratic form with lengths {} and {} on a {}-dimensional factor",
            v.len(),
            z.len(),
            f.dim()
        )));
    }
    Ok(f.quad_form(v.as_slice(), z.as_slice()))
}

/// `a† b`.
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Contiguous view of column `c` of a column-major matrix.
#[inline]
pub fn column(m: &CMat, c: usize) -> &[Complex64] {
    let n = m.nrows();
    &m.as_slice()[c * n..(c + 1) * n]
}

/// `A += x x†`, writing both triangles so the result stays exactly Hermitian.
pub fn add_outer(a: &mut CMat, x: &[Complex64]) {
    let n = a.nrows();
    debug_assert_eq!(x.len(), n);
    for j in 0..n {
        let xj = x[j].conj();
        let col = &mut a.as_mut_slice()[j * n..(j + 1) * n];
        for (entry, xi) in col.iter_mut().zip(x) {
            *entry += xi * xj;
        }
    }
}

/// `A + Σ_k c_k c_k†`.
pub fn rank_k_update(a: &CMat, cols: &[&[Complex64]]) -> CMat {
    let mut out = a.clone();
    for c in cols {
        add_outer(&mut out, c);
    }
    out
}

/// `Z Z†` accumulated column by column.
pub fn gram(z: &CMat) -> CMat {
    let n = z.nrows();
    let mut out = CMat::zeros(n, n);
    for c in 0..z.ncols() {
        add_outer(&mut out, column(z, c));
    }
    out
}
