//! Float math shims and standard-normal functions.
//!
//! Transcendentals go through `libm` so the crate builds without `std` and
//! produces identical bits in both modes. The normal quantile follows
//! Wichura's AS 241 (double-precision branch); `log Φ` switches to an
//! asymptotic expansion deep in the lower tail where `erfc` underflows.

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
pub const LN_2PI: f64 = 1.837877066409345483560659472811;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// ln(1 - exp(-s)) for s > 0, stable near both ends (Mächler 2012).
#[inline]
pub fn ln_1m_exp_neg(s: f64) -> f64 {
    if s <= core::f64::consts::LN_2 {
        ln(-expm1(-s))
    } else {
        ln_1p(-exp(-s))
    }
}

/// Logistic function, overflow-safe.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// ln(sigmoid(x)), stable for large |x|.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -ln_1p(exp(-x))
    } else {
        x - ln_1p(exp(x))
    }
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x - 0.5 * LN_2PI)
}

/// Standard normal CDF via erfc; accurate over the full double range.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

// Asymptotic series for Φ(x)·√(2π)·(-x)·exp(x²/2) as x → -∞:
// 1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸, truncation error ~ 1e-12 at x = -30.
const TAIL_SWITCH: f64 = -30.0;

#[inline]
fn lower_tail_series(x: f64) -> f64 {
    let r2 = 1.0 / (x * x);
    1.0 - r2 * (1.0 - r2 * (3.0 - r2 * (15.0 - 105.0 * r2)))
}

/// ln Φ(x), safe for arbitrarily negative x where erfc underflows.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x >= TAIL_SWITCH {
        ln(norm_cdf(x))
    } else {
        -0.5 * x * x - ln(-x) - 0.5 * LN_2PI + ln(lower_tail_series(x))
    }
}

/// Inverse Mills ratio φ(x)/Φ(x), safe in the lower tail.
pub fn inv_mills(x: f64) -> f64 {
    if x >= TAIL_SWITCH {
        norm_pdf(x) / norm_cdf(x)
    } else {
        -x / lower_tail_series(x)
    }
}

/// Standard normal quantile Φ⁻¹(p), AS 241 (Wichura 1988).
///
/// Relative accuracy about 1e-15 on (0, 1); returns ±∞ at the endpoints.
pub fn norm_cdf_inv(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if abs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4)
            * r
            + 4.5921953931549871457e4)
            * r
            + 1.3731693765509461125e4)
            * r
            + 1.9715909503065514427e3)
            * r
            + 1.3314166789178437745e2)
            * r
            + 3.3871328727963666080e0);
        let den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4)
            * r
            + 2.1213794301586595867e4)
            * r
            + 5.3941960214247511077e3)
            * r
            + 6.8718700749205790830e2)
            * r
            + 4.2313330701600911252e1)
            * r
            + 1.0;
        return num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-ln(r));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1)
            * r
            + 1.27045825245236838258e0)
            * r
            + 3.64784832476320460504e0)
            * r
            + 5.76949722146069140550e0)
            * r
            + 4.63033784615654529590e0)
            * r
            + 1.42343711074968357734e0;
        let den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2)
            * r
            + 1.48103976427480074590e-1)
            * r
            + 6.89767334985100004550e-1)
            * r
            + 1.67638483018380384940e0)
            * r
            + 2.05319162663775882187e0)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3)
            * r
            + 2.65321895265761230930e-2)
            * r
            + 2.96560571828504891230e-1)
            * r
            + 1.78482653991729133580e0)
            * r
            + 5.46378491116411436990e0)
            * r
            + 6.65790464350110377720e0;
        let den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5)
            * r
            + 7.86869131145613259100e-4)
            * r
            + 1.48753612908506148525e-2)
            * r
            + 1.36929880922735805310e-1)
            * r
            + 5.99832206555887937690e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
