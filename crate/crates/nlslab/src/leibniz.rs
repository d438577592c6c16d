//! Periodic 1-D harness for the fractional Leibniz inequality
//!
//! ```text
//! ‖D^{k-1+α}( G(f, f̄) F(|f|) )‖_{L^r}
//!     ≲ ‖f‖^β_{L^{r₁}} ‖D^{k-1+α} f‖_{L^{r₂}} ‖F(|f|)‖_{L^{r₃}}
//! ```
//!
//! under `1/r = β/r₁ + 1/r₂ + 1/r₃`, with `F` drawn from the loglog
//! nonlinearity (whose derivative bounds are those verified in `model`)
//! and `G` from the power catalogue `|z|^{β-1} z²`, `|z|^β z`.  Fractional
//! derivatives are the `|ξ|^s` Fourier multiplier on the periodic
//! lattice.  The harness estimates the implied constant empirically over
//! seeded random band-limited fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::model;

/// Amplitude below which the `|z|` cusp of `G` is quadratically smoothed.
pub const CUSP_SMOOTHING: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LeibnizError {
    #[error("grid size must be a power of two >= 64, got {0}")]
    BadSize(usize),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("Hölder bookkeeping violated: 1/r = {lhs} but β/r₁ + 1/r₂ + 1/r₃ = {rhs}")]
    ExponentMismatch { lhs: f64, rhs: f64 },
    #[error("case parameters out of range: {0}")]
    BadCase(String),
    #[error("right-hand side underflow (field too small)")]
    RhsUnderflow,
    #[error("derivative order must be >= 0, got {0}")]
    NegativeOrder(f64),
}

/// Complex samples over one period of the line.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    size: usize,
    period: f64,
    values: Vec<Complex64>,
}

impl PeriodicField {
    pub fn new(period: f64, values: Vec<Complex64>) -> Result<Self, LeibnizError> {
        let size = values.len();
        if size < 64 || !size.is_power_of_two() {
            return Err(LeibnizError::BadSize(size));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(LeibnizError::BadPeriod(period));
        }
        if !values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
        {
            return Err(LeibnizError::NonFinite);
        }
        Ok(Self {
            size,
            period,
            values,
        })
    }

    pub fn from_profile<F: Fn(f64) -> Complex64>(
        size: usize,
        period: f64,
        f: F,
    ) -> Result<Self, LeibnizError> {
        let values = (0..size)
            .map(|j| f(period * j as f64 / size as f64))
            .collect();
        Self::new(period, values)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Cyclic shift by `offset` grid points.
    pub fn translate(&self, offset: usize) -> Self {
        let n = self.size;
        let values = (0..n)
            .map(|j| self.values[(j + offset) % n])
            .collect();
        Self {
            size: n,
            period: self.period,
            values,
        }
    }

    /// Periodic-quadrature Lebesgue norm; `p = ∞` is the max modulus.
    pub fn lebesgue_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let dx = self.period / self.size as f64;
        (self
            .values
            .iter()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            * dx)
            .powf(1.0 / p)
    }

    fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        FftPlanner::new()
            .plan_fft_forward(self.size)
            .process(&mut buf);
        buf
    }

    /// Signed frequency index with the largest coefficient modulus.
    pub fn dominant_mode(&self) -> i64 {
        let spec = self.spectrum();
        let n = self.size as i64;
        let (mut best, mut best_val) = (0i64, -1.0);
        for (j, c) in spec.iter().enumerate() {
            let m = c.norm();
            if m > best_val {
                best_val = m;
                best = if (j as i64) <= n / 2 {
                    j as i64
                } else {
                    j as i64 - n
                };
            }
        }
        best
    }
}

/// `D^s`: spectral multiplication by `|2π m / period|^s`; the zero mode
/// is annihilated for `s > 0`.
pub fn periodic_frac_deriv(f: &PeriodicField, s: f64) -> Result<PeriodicField, LeibnizError> {
    if s < 0.0 {
        return Err(LeibnizError::NegativeOrder(s));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    let n = f.size;
    let mut buf = f.values.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let base = 2.0 * std::f64::consts::PI / f.period;
    for (j, c) in buf.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        let xi = base * m.unsigned_abs() as f64;
        *c *= if m == 0 { 0.0 } else { xi.powf(s) };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    Ok(PeriodicField {
        size: n,
        period: f.period,
        values: buf,
    })
}

/// The outer factor `F` of the composite nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterFactor {
    /// `F(x) = (log log(10 + x²))^c` — derivative bounds as in the model.
    Loglog { c: f64 },
    /// `F ≡ 1` (test-mode entry; makes the ratio scale-invariant).
    One,
}

impl OuterFactor {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            OuterFactor::Loglog { c } => model::loglog_g(x, c),
            OuterFactor::One => 1.0,
        }
    }
}

/// The inner factor `G` with `|G^{(i)}| = O(|z|^{β+1-i})`; the `|z|` cusp
/// is smoothed quadratically below [`CUSP_SMOOTHING`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerFactor {
    /// `G(z, z̄) = |z|^{β-1} z²`
    PowZSquared,
    /// `G(z, z̄) = |z|^β z`
    PowZ,
}

impl InnerFactor {
    fn eval(&self, z: Complex64, beta: f64) -> Complex64 {
        let smooth = (z.norm_sqr() + CUSP_SMOOTHING * CUSP_SMOOTHING).sqrt();
        match self {
            InnerFactor::PowZSquared => z * z * smooth.powf(beta - 1.0),
            InnerFactor::PowZ => z * smooth.powf(beta),
        }
    }
}

/// One test case of the inequality: the differentiation order
/// `k - 1 + α`, the homogeneity `β`, the Hölder exponents, and the
/// catalogue choices of `F` and `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeibnizCase {
    pub id: String,
    pub alpha: f64,
    pub k_order: u32,
    pub beta: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    /// may be `f64::INFINITY`
    pub r3: f64,
    pub outer: OuterFactor,
    pub inner: InnerFactor,
}

impl LeibnizCase {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: &str,
        alpha: f64,
        k_order: u32,
        beta: f64,
        r: f64,
        r1: f64,
        r2: f64,
        r3: f64,
        outer: OuterFactor,
        inner: InnerFactor,
    ) -> Result<Self, LeibnizError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LeibnizError::BadCase(format!("alpha = {alpha} outside [0,1]")));
        }
        if k_order < 2 {
            return Err(LeibnizError::BadCase(format!("k = {k_order} below 2")));
        }
        if beta < k_order as f64 - 1.0 {
            return Err(LeibnizError::BadCase(format!(
                "beta = {beta} below k - 1 = {}",
                k_order - 1
            )));
        }
        for (name, v) in [("r", r), ("r1", r1), ("r2", r2)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(LeibnizError::BadCase(format!("{name} = {v} outside (1, ∞)")));
            }
        }
        if !(r3 > 1.0) {
            return Err(LeibnizError::BadCase(format!("r3 = {r3} outside (1, ∞]")));
        }
        let lhs = 1.0 / r;
        let rhs = beta / r1 + 1.0 / r2 + if r3.is_infinite() { 0.0 } else { 1.0 / r3 };
        if (lhs - rhs).abs() > 1e-12 {
            return Err(LeibnizError::ExponentMismatch { lhs, rhs });
        }
        Ok(Self {
            id: id.to_string(),
            alpha,
            k_order,
            beta,
            r,
            r1,
            r2,
            r3,
            outer,
            inner,
        })
    }

    /// Total differentiation order `k - 1 + α`.
    pub fn order(&self) -> f64 {
        self.k_order as f64 - 1.0 + self.alpha
    }
}

/// The built-in six-case catalogue.
pub fn builtin_catalogue() -> Vec<LeibnizCase> {
    let c = 1e-4;
    vec![
        LeibnizCase::new("k2-a0-b1-zz", 0.0, 2, 1.0, 4.0 / 3.0, 8.0, 2.0, 8.0,
            OuterFactor::Loglog { c }, InnerFactor::PowZSquared).unwrap(),
        LeibnizCase::new("k2-a05-b2-zz", 0.5, 2, 2.0, 8.0 / 7.0, 8.0, 2.0, 8.0,
            OuterFactor::Loglog { c }, InnerFactor::PowZSquared).unwrap(),
        LeibnizCase::new("k2-a1-b1-mz", 1.0, 2, 1.0, 6.0 / 5.0, 6.0, 2.0, 6.0,
            OuterFactor::Loglog { c }, InnerFactor::PowZ).unwrap(),
        LeibnizCase::new("k3-a05-b2-mz", 0.5, 3, 2.0, 1.25, 10.0, 2.0, 10.0,
            OuterFactor::Loglog { c }, InnerFactor::PowZ).unwrap(),
        LeibnizCase::new("k2-a025-b15-one", 0.25, 2, 1.5, 4.0 / 3.0, 6.0, 2.0, f64::INFINITY,
            OuterFactor::One, InnerFactor::PowZSquared).unwrap(),
        LeibnizCase::new("k4-a0-b3-zz", 0.0, 4, 3.0, 1.2, 12.0, 2.0, 12.0,
            OuterFactor::Loglog { c }, InnerFactor::PowZSquared).unwrap(),
    ]
}

/// `LHS/RHS` of the inequality for one field.
pub fn leibniz_ratio(case: &LeibnizCase, f: &PeriodicField) -> Result<f64, LeibnizError> {
    let order = case.order();
    let composite_values: Vec<Complex64> = f
        .values
        .iter()
        .map(|&z| case.inner.eval(z, case.beta) * case.outer.eval(z.norm()))
        .collect();
    let composite = PeriodicField {
        size: f.size,
        period: f.period,
        values: composite_values,
    };
    let lhs = periodic_frac_deriv(&composite, order)?.lebesgue_norm(case.r);

    let f_outer: Vec<Complex64> = f
        .values
        .iter()
        .map(|&z| Complex64::new(case.outer.eval(z.norm()), 0.0))
        .collect();
    let outer_field = PeriodicField {
        size: f.size,
        period: f.period,
        values: f_outer,
    };
    let rhs = f.lebesgue_norm(case.r1).powf(case.beta)
        * periodic_frac_deriv(f, order)?.lebesgue_norm(case.r2)
        * outer_field.lebesgue_norm(case.r3);
    if rhs < 1e-300 {
        return Err(LeibnizError::RhsUnderflow);
    }
    Ok(lhs / rhs)
}

/// One row of the survey: per-case ratio statistics and the spectral
/// signature (dominant mode) of the worst field.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRow {
    pub case_id: String,
    pub alpha: f64,
    pub k_order: u32,
    pub beta: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub argmax_mode: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurveyTable {
    pub rows: Vec<SurveyRow>,
}

impl SurveyTable {
    /// Comma-separated rendering with a header row.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("case_id,alpha,k,beta,r,r1,r2,r3,max_ratio,median_ratio,argmax_mode\n");
        for row in &self.rows {
            let r3 = if row.r3.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.17e}", row.r3)
            };
            out.push_str(&format!(
                "{},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{}\n",
                row.case_id,
                row.alpha,
                row.k_order,
                row.beta,
                row.r,
                row.r1,
                row.r2,
                r3,
                row.max_ratio,
                row.median_ratio,
                row.argmax_mode,
            ));
        }
        out
    }
}

/// Random band-limited field: Gaussian coefficients on `|m| <= size/8`,
/// deterministic in the seed.
pub fn random_band_limited(size: usize, period: f64, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (size / 8).max(4) as i64;
    let mut spec = vec![Complex64::new(0.0, 0.0); size];
    for m in -band..=band {
        let idx = if m >= 0 { m as usize } else { (size as i64 + m) as usize };
        // mild spectral decay keeps the fields smooth at every size
        let scale = 1.0 / (1.0 + (m.abs() as f64 / 4.0).powi(2));
        spec[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
    }
    let mut buf = spec;
    FftPlanner::new().plan_fft_inverse(size).process(&mut buf);
    let scale = 1.0 / size as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    // normalize the peak to an O(1) random level
    let peak = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let target = rng.gen_range(0.5..2.0);
    let s = if peak > 0.0 { target / peak } else { 1.0 };
    for c in buf.iter_mut() {
        *c *= s;
    }
    PeriodicField {
        size,
        period,
        values: buf,
    }
}

/// Empirical constant survey: `samples` random band-limited fields per
/// case; deterministic for a fixed seed (per-sample seeds are derived
/// from the master seed).
pub fn constant_survey(
    cases: &[LeibnizCase],
    samples: usize,
    seed: u64,
    size: usize,
    period: f64,
) -> Result<SurveyTable, LeibnizError> {
    let mut rows = Vec::with_capacity(cases.len());
    for (ci, case) in cases.iter().enumerate() {
        let mut ratios = Vec::with_capacity(samples);
        let mut max_ratio = 0.0_f64;
        let mut argmax_mode = 0i64;
        for s in 0..samples {
            let sample_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((ci as u64) << 32)
                .wrapping_add(s as u64);
            let f = random_band_limited(size, period, sample_seed);
            let rho = leibniz_ratio(case, &f)?;
            if rho > max_ratio {
                max_ratio = rho;
                argmax_mode = f.dominant_mode();
            }
            ratios.push(rho);
        }
        ratios.sort_by(f64::total_cmp);
        let median_ratio = if ratios.is_empty() {
            0.0
        } else {
            ratios[ratios.len() / 2]
        };
        rows.push(SurveyRow {
            case_id: case.id.clone(),
            alpha: case.alpha,
            k_order: case.k_order,
            beta: case.beta,
            r: case.r,
            r1: case.r1,
            r2: case.r2,
            r3: case.r3,
            max_ratio,
            median_ratio,
            argmax_mode,
        });
    }
    Ok(SurveyTable { rows })
}
