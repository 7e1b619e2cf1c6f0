//! Sine integral `Si(z) = ∫₀ᶻ sin t / t dt`.

use std::f64::consts::{FRAC_PI_2, PI};

const SERIES_LIMIT: f64 = 4.0;
const ASYMPTOTIC_LIMIT: f64 = 1000.0;
const TOL: f64 = 1e-13;

/// Sine integral, accurate to about 1e−12 absolute.
pub fn si(z: f64) -> f64 {
    if z < 0.0 {
        return -si(-z);
    }
    if z <= SERIES_LIMIT {
        series(z)
    } else if z < ASYMPTOTIC_LIMIT {
        // whole panels of length π, then the remainder
        let mut acc = series(SERIES_LIMIT);
        let mut a = SERIES_LIMIT;
        while a < z {
            let b = (a + PI).min(z);
            acc += adaptive(a, b, TOL, 12);
            a = b;
        }
        acc
    } else {
        asymptotic(z)
    }
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.sin() / t
    }
}

/// `Σ (−1)^k z^{2k+1} / ((2k+1)(2k+1)!)`.
fn series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z; // z^{2k+1} / (2k+1)!
    let mut sum = z;
    let mut k = 0u32;
    loop {
        k += 1;
        let n = f64::from(2 * k);
        term *= -z2 / (n * (n + 1.0));
        let add = term / (n + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            return sum;
        }
    }
}

/// `π/2 − f(z) cos z − g(z) sin z` with the asymptotic auxiliary series.
fn asymptotic(z: f64) -> f64 {
    let inv2 = 1.0 / (z * z);
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0 / z, inv2);
    for k in 0..20 {
        f += tf;
        g += tg;
        let kk = f64::from(2 * k);
        tf *= -(kk + 1.0) * (kk + 2.0) * inv2;
        tg *= -(kk + 2.0) * (kk + 3.0) * inv2;
        if tf.abs() < 1e-18 && tg.abs() < 1e-18 {
            break;
        }
    }
    FRAC_PI_2 - f * z.cos() - g * z.sin()
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [−1, 1]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = sinc(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = sinc(c - x) + sinc(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive(a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = kronrod(a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(a, m, 0.5 * tol, depth - 1) + adaptive(m, b, 0.5 * tol, depth - 1)
}
