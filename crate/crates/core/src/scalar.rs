//! Scalar special functions: Gaussian density and tail, the ratio `ξ`,
//! the arccos map `η`, Gamma and unit-ball volumes.
//!
//! The error functions follow W. J. Cody's rational Chebyshev approximations
//! (`CALERF`), with the scaled complementary function `erfcx(x) = e^{x²}
//! erfc(x)` exposed so that `ln Q(x)` stays finite far into the tail.

use crate::error::{Error, Result};
use std::f64::consts::{E, PI};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_2PI: f64 = 1.837_877_066_409_345_6;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Glaisher–Kinkelin constant.
pub const GLAISHER: f64 = 1.282_427_129_100_622_6;

// ---------------------------------------------------------------------------
// Cody erf / erfc / erfcx
// ---------------------------------------------------------------------------

const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_4,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_171,
];
const ERF_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_377,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769,
    1_712.047_612_634_070_7,
    2_051.078_377_826_071_6,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_3e-8,
];
const ERF_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_3,
    3_290.799_235_733_459_7,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_5,
];
const ERF_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERF_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_5,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

const ERF_THRESHOLD: f64 = 0.46875;
const ERFC_XBIG: f64 = 26.543;

fn erf_small(z: f64) -> f64 {
    let a = &ERF_A;
    let b = &ERF_B;
    ((((a[4] * z + a[0]) * z + a[1]) * z + a[2]) * z + a[3])
        / ((((z + b[0]) * z + b[1]) * z + b[2]) * z + b[3])
}

/// `erfcx(y)` for `ERF_THRESHOLD < y`.
fn erfcx_large(y: f64) -> f64 {
    if y <= 4.0 {
        let c = &ERF_C;
        let d = &ERF_D;
        let mut num = c[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + c[i]) * y;
            den = (den + d[i]) * y;
        }
        (num + c[7]) / (den + d[7])
    } else {
        let p = &ERF_P;
        let q = &ERF_Q;
        let z = 1.0 / (y * y);
        let mut num = p[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + p[i]) * z;
            den = (den + q[i]) * z;
        }
        let r = z * (num + p[4]) / (den + q[4]);
        (FRAC_1_SQRT_PI - r) / y
    }
}

/// `e^{-y²}` with the argument split at a multiple of 1/16 to limit the
/// relative error amplification of the exponential.
fn exp_neg_sq(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (-yt * yt).exp() * (-(y - yt) * (y + yt)).exp()
}

fn exp_pos_sq(x: f64) -> f64 {
    let xt = (x * 16.0).trunc() / 16.0;
    (xt * xt).exp() * ((x - xt) * (x + xt)).exp()
}

pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_THRESHOLD {
        return x * erf_small(y * y);
    }
    let tail = if y >= ERFC_XBIG {
        0.0
    } else {
        erfcx_large(y) * exp_neg_sq(y)
    };
    if x < 0.0 {
        tail - 1.0
    } else {
        1.0 - tail
    }
}

pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_THRESHOLD {
        return 1.0 - x * erf_small(y * y);
    }
    let tail = if y >= ERFC_XBIG {
        0.0
    } else {
        erfcx_large(y) * exp_neg_sq(y)
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_THRESHOLD {
        let z = y * y;
        return z.exp() * (1.0 - x * erf_small(z));
    }
    if x < -26.628_735_713_751_4 {
        return f64::INFINITY;
    }
    let r = erfcx_large(y);
    if x < 0.0 {
        2.0 * exp_pos_sq(x) - r
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Gaussian kernels
// ---------------------------------------------------------------------------

/// Standard normal density `φ(t)`.
#[inline]
pub fn gaussian_pdf(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Gaussian tail `Q(x) = P(S > x)`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln Q(x)`, finite for every finite `x`.
pub fn log_q(x: f64) -> f64 {
    if x <= 1.0 {
        q_function(x).ln()
    } else {
        let y = x * std::f64::consts::FRAC_1_SQRT_2;
        (0.5 * erfcx(y)).ln() - y * y
    }
}

/// `ln ξ(s)` with `ξ(s) = φ²(s) / (Q(s)(1 − Q(s)))`.
#[inline]
pub fn log_xi(s: f64) -> f64 {
    let a = s.abs();
    -a * a - LN_2PI - log_q(a) - log_q(-a)
}

/// `ξ(s) = φ²(s) / (Q(s)(1 − Q(s)))`, the Fisher weight of a single sign
/// observation.
#[inline]
pub fn xi(s: f64) -> f64 {
    log_xi(s).exp()
}

/// `η(q) = arccos(q)/π`: the probability that two unit-variance Gaussians
/// with correlation `q` have different signs.
pub fn eta(q: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::domain("eta", format!("|q| > 1 (q = {q})")));
    }
    Ok(q.acos() / PI)
}

/// `η` with the argument clamped to `[-1, 1]`, for callers that already
/// checked membership up to rounding.
#[inline]
pub(crate) fn eta_clamped(q: f64) -> f64 {
    q.clamp(-1.0, 1.0).acos() / PI
}

/// `η′(q) = −1/(π√(1−q²))`.
pub fn eta_prime(q: f64) -> Result<f64> {
    if q.abs() >= 1.0 || q.is_nan() {
        return Err(Error::domain(
            "eta_prime",
            format!("singular for |q| >= 1 (q = {q})"),
        ));
    }
    Ok(-1.0 / (PI * (1.0 - q * q).sqrt()))
}

// ---------------------------------------------------------------------------
// Gamma and volumes
// ---------------------------------------------------------------------------

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma_fn(x: f64) -> Result<f64> {
    if x <= 0.0 || x.is_nan() {
        return Err(Error::domain("log_gamma_fn", format!("x must be > 0 (x = {x})")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Natural log of the volume of the unit ball in `R^n`.
pub fn ln_vol_ball(n: u32) -> f64 {
    let h = f64::from(n) / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// Volume of the unit ball in `R^n`, `π^{n/2}/Γ(n/2+1)`.
pub fn vol_ball(n: u32) -> f64 {
    ln_vol_ball(n).exp()
}

/// `log2` volume of the unit ball in `R^n`.
pub fn log2_vol_ball(n: u32) -> f64 {
    ln_vol_ball(n) / std::f64::consts::LN_2
}

/// Natural log of the surface area of the unit sphere `S_{n−1} ⊂ R^n`,
/// `2π^{n/2}/Γ(n/2)`.
pub fn ln_area_sphere(n: u32) -> f64 {
    let h = f64::from(n) / 2.0;
    std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h)
}

pub fn area_sphere(n: u32) -> f64 {
    ln_area_sphere(n).exp()
}

/// Two-term large-`n` expansion of `log2 Vol(B_n)`:
/// `(n/2) log2(2πe/n) − log2 √(πn)`.
pub fn log_vol_ball_asymptotic(n: u32) -> f64 {
    let n = f64::from(n);
    0.5 * n * (2.0 * PI * E / n).log2() - 0.5 * (PI * n).log2()
}
