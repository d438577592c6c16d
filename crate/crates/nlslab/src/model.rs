//! Equation definition: the loglog nonlinearity `g`, the potential `F`,
//! the Morawetz density `F̃`, and the critical constants of the model.
//!
//! The equation under study is
//!
//! ```text
//! i ∂t u + Δu = |u|^{4/(n-2)} u g(|u|),    g(s) = log^c( log(10 + s²) ),
//! ```
//!
//! with `n ∈ {3, 4}`, loglog exponent `0 < c < c_n`, and Sobolev index
//! `k > n/2`.  The admissible range of `c` is bounded by an exact
//! rational `c_n` whose reciprocal `b_n` governs the long-interval bound;
//! `c_n · b_n = 1` holds exactly and is verified in rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::quad::{self, QuadError};

/// Relative tolerance of the adaptive quadrature behind [`potential_f`]
/// and [`tilde_f`].
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Absolute floor of the same quadrature (guards the `s → 0` regime).
pub const QUAD_ABS_FLOOR: f64 = 1e-30;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported dimension n = {0}: the model is defined for n in {{3, 4}}")]
    UnsupportedDimension(u32),
    #[error("loglog exponent c = {c} violates 0 < c < c_n = {cn} for n = {n}")]
    ExponentOutOfRange { c: f64, cn: f64, n: u32 },
    #[error("Sobolev index k = {k} violates k > n/2 for n = {n}")]
    SobolevIndexTooSmall { k: f64, n: u32 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Identity card of the equation: dimension, loglog exponent, Sobolev
/// index, and the critical space-time exponent `q = 2(n+2)/(n-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: u32,
    c: f64,
    k: f64,
}

impl ModelParams {
    /// Validates `n ∈ {3,4}`, `0 < c < c_n` (strict, compared in exact
    /// rational arithmetic) and `k > n/2`.
    pub fn new(n: u32, c: f64, k: f64) -> Result<Self, ModelError> {
        let constants = critical_constants_with(n, 1.0, 1e-3)?;
        let cn = constants.c_n_f64();
        let c_rat = BigRational::from_float(c)
            .ok_or(ModelError::ExponentOutOfRange { c, cn, n })?;
        if !(c_rat.is_positive() && c_rat < constants.c_n) {
            return Err(ModelError::ExponentOutOfRange { c, cn, n });
        }
        if !(k > n as f64 / 2.0) {
            return Err(ModelError::SobolevIndexTooSmall { k, n });
        }
        Ok(Self { n, c, k })
    }

    /// Builds parameters without the `c < c_n` admissibility bound.
    ///
    /// The functionals `g`, `F`, `F̃` are well defined for any `c > 0`;
    /// this constructor lets harnesses probe them outside the admissible
    /// range of the equation.  `n` and `k` are still validated.
    pub fn new_unchecked(n: u32, c: f64, k: f64) -> Result<Self, ModelError> {
        if !(n == 3 || n == 4) {
            return Err(ModelError::UnsupportedDimension(n));
        }
        if !(k > n as f64 / 2.0) {
            return Err(ModelError::SobolevIndexTooSmall { k, n });
        }
        Ok(Self { n, c, k })
    }

    /// Dimension with the default Sobolev index (`k = 2` for `n = 3`,
    /// `k = 2.5` for `n = 4`).
    pub fn with_default_k(n: u32, c: f64) -> Result<Self, ModelError> {
        let k = match n {
            3 => 2.0,
            4 => 2.5,
            other => return Err(ModelError::UnsupportedDimension(other)),
        };
        Self::new(n, c, k)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Critical space-time exponent `q = 2(n+2)/(n-2)`: 10 for `n = 3`,
    /// 6 for `n = 4`.
    pub fn q(&self) -> f64 {
        2.0 * (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }

    /// Mixed Strichartz exponent `2(n+2)/n` used by the derivative norms.
    pub fn strichartz_exponent(&self) -> f64 {
        2.0 * (self.n as f64 + 2.0) / self.n as f64
    }

    /// Power of `|u|` in the nonlinearity: `4/(n-2)`.
    pub fn nonlinearity_power(&self) -> f64 {
        4.0 / (self.n as f64 - 2.0)
    }

    /// Power of `t` in the integrand of `F` and `F̃`: `(n+2)/(n-2)`.
    fn integrand_power(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }
}

/// The exact constants bounding the admissible loglog exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalConstants {
    /// Upper bound of the admissible `c`, as an exact rational.
    pub c_n: BigRational,
    /// Reciprocal of `c_n`, the exponent driving the long-interval bound.
    pub b_n: BigRational,
    /// Free exponent of the long-interval bound base; configurable, the
    /// closed form is never printed.
    pub a_n: f64,
    /// The `+` in `b_n+`: the bound uses `b_n + epsilon`.
    pub epsilon: f64,
}

impl CriticalConstants {
    pub fn c_n_f64(&self) -> f64 {
        self.c_n.to_f64().unwrap()
    }

    pub fn b_n_f64(&self) -> f64 {
        self.b_n.to_f64().unwrap()
    }

    /// `c_n · b_n = 1`, exactly.
    pub fn product_is_one(&self) -> bool {
        (&self.c_n * &self.b_n).is_one()
    }
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Exact critical constants for dimension `n`, with `a_n` and `epsilon`
/// taken from configuration (defaults 1 and 1e-3).
pub fn critical_constants(n: u32) -> Result<CriticalConstants, ModelError> {
    critical_constants_with(n, 1.0, 1e-3)
}

/// As [`critical_constants`] with explicit `a_n` and `epsilon`.
pub fn critical_constants_with(
    n: u32,
    a_n: f64,
    epsilon: f64,
) -> Result<CriticalConstants, ModelError> {
    let ni = n as i64;
    let (num, den) = match n {
        // (n-2)²(6-n)  /  2n (4n²-15n+22)(46n²-70n+20)
        3 => (
            big(ni - 2).pow(2) * big(6 - ni),
            big(2 * ni) * big(4 * ni * ni - 15 * ni + 22) * big(46 * ni * ni - 70 * ni + 20),
        ),
        // (n+2)(6-n)  /  (n²+12n+4)(44n²-62n+12)
        4 => (
            big(ni + 2) * big(6 - ni),
            big(ni * ni + 12 * ni + 4) * big(44 * ni * ni - 62 * ni + 12),
        ),
        other => return Err(ModelError::UnsupportedDimension(other)),
    };
    let c_n = BigRational::new(num.clone(), den.clone());
    let b_n = BigRational::new(den, num);
    Ok(CriticalConstants { c_n, b_n, a_n, epsilon })
}

/// The raw loglog factor `(log log(10 + s²))^c` for an arbitrary
/// exponent `c`; well defined for all `s ≥ 0` since `log 10 > 1`.
pub fn loglog_g(s: f64, c: f64) -> f64 {
    let inner = (10.0 + s * s).ln().ln();
    (c * inner.ln()).exp()
}

/// Derivative of [`loglog_g`] in `s`.
pub fn loglog_g_derivative(s: f64, c: f64) -> f64 {
    let l1 = (10.0 + s * s).ln();
    let l2 = l1.ln();
    let g = (c * l2.ln()).exp();
    c * g / l2 * (2.0 * s / ((10.0 + s * s) * l1))
}

/// `g(s) = (log log(10 + s²))^c`: strictly positive, nondecreasing in `s`.
pub fn g_eval(s: f64, params: &ModelParams) -> f64 {
    debug_assert!(s >= 0.0);
    loglog_g(s, params.c)
}

/// Closed-form derivative `g'(s)`.
pub fn g_derivative(s: f64, params: &ModelParams) -> f64 {
    loglog_g_derivative(s, params.c)
}

/// The logarithmic derivative ratio `s g'(s) / g(s)
/// = 2 c s² / ((10+s²) · log(10+s²) · log log(10+s²))`.
///
/// Finite for every `s > 0`, vanishing at both ends of the range.
pub fn g_log_derivative_ratio(s: f64, params: &ModelParams) -> f64 {
    debug_assert!(s > 0.0);
    let l1 = (10.0 + s * s).ln();
    let l2 = l1.ln();
    2.0 * params.c * s * s / ((10.0 + s * s) * l1 * l2)
}

/// The potential `F(s) = ∫_0^s t^{(n+2)/(n-2)} g(t) dt`, by adaptive
/// quadrature at relative tolerance `1e-10`.
///
/// `F(0) = 0` and `F` is strictly increasing.
pub fn potential_f(s: f64, params: &ModelParams) -> Result<f64, ModelError> {
    debug_assert!(s >= 0.0);
    let p = params.integrand_power();
    let v = quad::adaptive(
        |t| t.powf(p) * g_eval(t, params),
        0.0,
        s,
        QUAD_REL_TOL,
        QUAD_ABS_FLOOR,
    )?;
    Ok(v)
}

/// The Morawetz density
/// `F̃(s) = ∫_0^s t^{(n+2)/(n-2)} ( 4/(n-2) g(t) + t g'(t) ) dt`.
///
/// Nonnegative (both summands are), and `F̃(s) ≥ 4/(n-2) · F(s)`.
pub fn tilde_f(s: f64, params: &ModelParams) -> Result<f64, ModelError> {
    debug_assert!(s >= 0.0);
    let p = params.integrand_power();
    let coef = 4.0 / (params.n as f64 - 2.0);
    let v = quad::adaptive(
        |t| t.powf(p) * (coef * g_eval(t, params) + t * g_derivative(t, params)),
        0.0,
        s,
        QUAD_REL_TOL,
        QUAD_ABS_FLOOR,
    )?;
    Ok(v)
}

/// Derivative of `F̃` with respect to the amplitude; used by the local
/// momentum identity.
pub fn tilde_f_derivative(s: f64, params: &ModelParams) -> f64 {
    let coef = 4.0 / (params.n as f64 - 2.0);
    s.powf(params.integrand_power()) * (coef * g_eval(s, params) + s * g_derivative(s, params))
}
