//! Functionals and inequality checks: energy, mass-in-ball, the
//! Morawetz-type estimate and its local momentum identity, space-time
//! norms, the `Q` bundle, the η parameter family, the equal-mass interval
//! partition, the long-interval bound predicate, and the scattering
//! Cauchy detector.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::bourgain::{Interval, IntervalFamily};
use crate::evolve::Trajectory;
use crate::model::{self, ModelError, ModelParams};
use crate::spectral::{RadialField, SpectralBasis, SpectralError, TAIL_WARN_THRESHOLD};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("trajectory needs at least {need} samples, got {got}")]
    DegenerateTrajectory { need: usize, got: usize },
    #[error("radius {0} outside (0, R_max]")]
    RadiusOutOfRange(f64),
    #[error("sample index {0} needs both time neighbors")]
    BoundarySampleIndex(usize),
    #[error("subinterval [{0}, {1}] outside the trajectory span")]
    SubintervalOutOfSpan(f64, f64),
    #[error("space-time exponent must satisfy q >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("eta must be positive, got {0}")]
    InvalidEta(f64),
    #[error("Morawetz weight scale must satisfy A > 1, got {0}")]
    InvalidWeightScale(f64),
    #[error("M = {m} smaller than the observed sup H-norm {observed}")]
    MNotDominating { m: f64, observed: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One line of a diagnostics report: an inequality instance.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` when `rhs > 0`, otherwise 0.
    pub ratio: f64,
    pub pass: bool,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            ratio,
            pass: ratio <= tolerance,
            tolerance,
        }
    }
}

/// A bundle of named inequality checks.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub rows: Vec<CheckRow>,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

// ---------------------------------------------------------------------------
// pointwise functionals

/// Total energy `E = ½ ∫ |∇u|² + ∫ F(u, ū)`.
pub fn energy(
    f: &RadialField,
    params: &ModelParams,
    basis: &SpectralBasis,
) -> Result<f64, DiagnosticsError> {
    let kinetic = 0.5 * basis.seminorm(f, 1.0)?.powi(2);
    let mut potential = 0.0;
    for (&w, v) in f.grid().weights().iter().zip(f.values()) {
        potential += w * model::potential_f(v.norm(), params)?;
    }
    Ok(kinetic + potential)
}

/// `Mass(B(0, R), u) = ( ∫_{|x| <= R} |u|² dx )^{1/2}`, origin-centered.
///
/// The cell containing `R` enters with its covered fraction, so the mass
/// is continuous and nondecreasing in `R` and reproduces the full L²
/// norm exactly at `R = R_max`.
pub fn mass_in_ball(f: &RadialField, radius: f64) -> Result<f64, DiagnosticsError> {
    let grid = f.grid();
    if !(radius > 0.0 && radius <= grid.r_max()) {
        return Err(DiagnosticsError::RadiusOutOfRange(radius));
    }
    let h = grid.spacing();
    let mut acc = 0.0;
    for ((&r, &w), v) in grid.nodes().iter().zip(grid.weights()).zip(f.values()) {
        let frac = ((radius - (r - 0.5 * h)) / h).clamp(0.0, 1.0);
        if frac == 0.0 {
            break;
        }
        acc += frac * w * v.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Checks the mass-control inequalities along a trajectory:
/// `Mass(B(0,R), u(t)) ≲ R sup ‖∇u‖` and `|∂t Mass| ≲ sup ‖∇u‖ / R`.
/// `bound` is the empirical stand-in for the absolute constants.
pub fn mass_bound_checks(
    traj: &Trajectory,
    radius: f64,
    basis: &SpectralBasis,
    bound: f64,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::DegenerateTrajectory {
            need: 3,
            got: traj.len(),
        });
    }
    let mut sup_grad = 0.0_f64;
    let mut masses = Vec::with_capacity(traj.len());
    let mut ratio_mass = 0.0_f64;
    for field in &traj.fields {
        sup_grad = sup_grad.max(basis.seminorm(field, 1.0)?);
        let m = mass_in_ball(field, radius)?;
        masses.push(m);
        if sup_grad > 0.0 {
            ratio_mass = ratio_mass.max(m / (radius * sup_grad));
        }
    }
    let mut ratio_deriv = 0.0_f64;
    if sup_grad > 0.0 {
        for i in 1..masses.len() {
            let dt = traj.times[i] - traj.times[i - 1];
            let rate = (masses[i] - masses[i - 1]).abs() / dt;
            ratio_deriv = ratio_deriv.max(rate * radius / sup_grad);
        }
    }
    Ok(DiagnosticsReport {
        rows: vec![
            CheckRow::new("mass_control", ratio_mass, 1.0, bound),
            CheckRow::new("mass_derivative", ratio_deriv, 1.0, bound),
        ],
    })
}

/// Result of the Morawetz-type space-time check.
#[derive(Debug, Clone)]
pub struct MorawetzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    /// Set when `A |I|^{1/2}` exceeded `R_max` and the spatial integral
    /// was truncated at the wall.
    pub truncated_at_wall: bool,
}

/// Checks `∫_I ∫_{|x| <= A|I|^{1/2}} F̃(u,ū)/|x| dx dt <= bound · E A |I|^{1/2}`.
pub fn morawetz_check(
    traj: &Trajectory,
    a_scale: f64,
    basis: &SpectralBasis,
    params: &ModelParams,
    bound: f64,
) -> Result<MorawetzReport, DiagnosticsError> {
    if traj.len() < 2 {
        return Err(DiagnosticsError::DegenerateTrajectory {
            need: 2,
            got: traj.len(),
        });
    }
    if !(a_scale > 1.0) {
        return Err(DiagnosticsError::InvalidWeightScale(a_scale));
    }
    let (t0, t1) = traj.span();
    let span = t1 - t0;
    let cap = a_scale * span.sqrt();
    let grid = traj.fields[0].grid().clone();
    let truncated_at_wall = cap > grid.r_max();
    let cap = cap.min(grid.r_max());
    let h = grid.spacing();

    // spatial integral of F̃/|x| over the capped ball, per sample
    let mut spatial = Vec::with_capacity(traj.len());
    for field in &traj.fields {
        let mut acc = 0.0;
        for ((&r, &w), v) in grid.nodes().iter().zip(grid.weights()).zip(field.values()) {
            let frac = ((cap - (r - 0.5 * h)) / h).clamp(0.0, 1.0);
            if frac == 0.0 {
                break;
            }
            acc += frac * w * model::tilde_f(v.norm(), params)? / r;
        }
        spatial.push(acc);
    }
    let mut lhs = 0.0;
    for i in 1..spatial.len() {
        lhs += 0.5 * (spatial[i] + spatial[i - 1]) * (traj.times[i] - traj.times[i - 1]);
    }
    let e = energy(&traj.fields[0], params, basis)?;
    let rhs = e * a_scale * span.sqrt();
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(MorawetzReport {
        lhs,
        rhs,
        ratio,
        pass: ratio <= bound,
        truncated_at_wall,
    })
}

/// Residual of the local momentum identity at one interior sample.
#[derive(Debug, Clone)]
pub struct MomentumResidual {
    /// Weighted L² norm of (LHS − RHS) over the trusted radial window.
    pub residual: f64,
    /// Weighted L² norms of the individual identity terms over the same
    /// window: time derivative, gradient flux, Laplacian flux, F̃ flux.
    pub term_norms: [f64; 4],
    /// residual / max(term norms)
    pub relative: f64,
}

/// Evaluates the radial form of the local momentum identity
/// `∂t Im(∂_k u ū) = −2 ∂_j Re(∂_k u ∂_j ū) + ½ ∂_k Δ(|u|²) − ∂_k F̃(u, ū)`
/// with spectral spatial derivatives and a centered time difference,
/// over `r ∈ [r_lo, 0.8 R_max]` (`r_lo` excludes `lo_cells` grid cells at
/// the axis, where the radial reduction degrades).
pub fn momentum_identity_residual(
    traj: &Trajectory,
    sample_index: usize,
    basis: &SpectralBasis,
    params: &ModelParams,
    lo_cells: usize,
) -> Result<MomentumResidual, DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::DegenerateTrajectory {
            need: 3,
            got: traj.len(),
        });
    }
    if sample_index == 0 || sample_index + 1 >= traj.len() {
        return Err(DiagnosticsError::BoundarySampleIndex(sample_index));
    }
    let grid = traj.fields[0].grid().clone();
    let n = grid.n() as f64;
    let nodes = grid.nodes();
    let size = grid.size();

    // radial momentum density Im(u_r ū) at a sample
    let momentum = |field: &RadialField| -> Result<Vec<f64>, DiagnosticsError> {
        let ur = basis.radial_derivative(field, 1)?;
        Ok(ur
            .iter()
            .zip(field.values())
            .map(|(d, v)| (d * v.conj()).im)
            .collect())
    };

    let (im, i0, ip) = (sample_index - 1, sample_index, sample_index + 1);
    let m_minus = momentum(&traj.fields[im])?;
    let m_plus = momentum(&traj.fields[ip])?;
    let dtm = traj.times[i0] - traj.times[im];
    let dtp = traj.times[ip] - traj.times[i0];
    let m_center = momentum(&traj.fields[i0])?;
    // three-point first derivative, valid for unequal spacing
    let dt_term: Vec<f64> = (0..size)
        .map(|i| {
            let (fm, f0, fp) = (m_minus[i], m_center[i], m_plus[i]);
            (dtm / (dtp * (dtp + dtm))) * fp + ((dtp - dtm) / (dtp * dtm)) * f0
                - (dtp / (dtm * (dtp + dtm))) * fm
        })
        .collect();

    let field = &traj.fields[i0];
    let u = field.values();
    let ur = basis.radial_derivative(field, 1)?;
    let urr = basis.radial_derivative(field, 2)?;
    let urrr = basis.radial_derivative(field, 3)?;

    let mut flux_grad = vec![0.0; size];
    let mut flux_lap = vec![0.0; size];
    let mut flux_pot = vec![0.0; size];
    for i in 0..size {
        let r = nodes[i];
        let mod_ur2 = ur[i].norm_sqr();
        let d_mod_ur2 = 2.0 * (urr[i] * ur[i].conj()).re;
        flux_grad[i] = -2.0 * ((n - 1.0) * mod_ur2 / r + d_mod_ur2);

        let sp = 2.0 * (ur[i] * u[i].conj()).re;
        let spp = 2.0 * (urr[i] * u[i].conj()).re + 2.0 * mod_ur2;
        let sppp = 2.0 * (urrr[i] * u[i].conj()).re + 6.0 * (urr[i] * ur[i].conj()).re;
        flux_lap[i] = 0.5 * (sppp + (n - 1.0) * (spp / r - sp / (r * r)));

        let amp = u[i].norm();
        let d_amp = if amp > 1e-300 {
            (u[i].conj() * ur[i]).re / amp
        } else {
            0.0
        };
        flux_pot[i] = -model::tilde_f_derivative(amp, params) * d_amp;
    }

    let r_lo = lo_cells as f64 * grid.spacing();
    let r_hi = 0.8 * grid.r_max();
    let window = |i: usize| nodes[i] >= r_lo && nodes[i] <= r_hi;
    let wnorm = |vals: &dyn Fn(usize) -> f64| -> f64 {
        grid.weights()
            .iter()
            .enumerate()
            .filter(|(i, _)| window(*i))
            .map(|(i, &w)| w * vals(i) * vals(i))
            .sum::<f64>()
            .sqrt()
    };

    let residual = wnorm(&|i| dt_term[i] - (flux_grad[i] + flux_lap[i] + flux_pot[i]));
    let term_norms = [
        wnorm(&|i| dt_term[i]),
        wnorm(&|i| flux_grad[i]),
        wnorm(&|i| flux_lap[i]),
        wnorm(&|i| flux_pot[i]),
    ];
    let max_term = term_norms.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(MomentumResidual {
        residual,
        term_norms,
        relative: if max_term > 0.0 {
            residual / max_term
        } else {
            0.0
        },
    })
}

// ---------------------------------------------------------------------------
// space-time norms

fn check_subinterval(traj: &Trajectory, j0: f64, j1: f64) -> Result<(), DiagnosticsError> {
    let (t0, t1) = traj.span();
    let eps = 1e-9 * (t1 - t0).max(1.0);
    if j0 < t0 - eps || j1 > t1 + eps || j1 < j0 {
        return Err(DiagnosticsError::SubintervalOutOfSpan(j0, j1));
    }
    Ok(())
}

/// Trapezoidal integral over `[j0, j1]` of a per-sample scalar, with
/// linear interpolation at the subinterval ends.
fn time_integral(times: &[f64], values: &[f64], j0: f64, j1: f64) -> f64 {
    let at = |t: f64| -> f64 {
        if t <= times[0] {
            return values[0];
        }
        if t >= *times.last().unwrap() {
            return *values.last().unwrap();
        }
        let k = times.partition_point(|&s| s <= t) - 1;
        let (ta, tb) = (times[k], times[k + 1]);
        let lam = (t - ta) / (tb - ta);
        values[k] * (1.0 - lam) + values[k + 1] * lam
    };
    let mut acc = 0.0;
    let mut prev_t = j0;
    let mut prev_v = at(j0);
    for (&t, &v) in times.iter().zip(values) {
        if t <= j0 || t >= j1 {
            continue;
        }
        acc += 0.5 * (prev_v + v) * (t - prev_t);
        prev_t = t;
        prev_v = v;
    }
    acc += 0.5 * (prev_v + at(j1)) * (j1 - prev_t);
    acc
}

/// `( ∫_J ‖u(t)‖_q^q dt )^{1/q}` over the stored samples.
pub fn spacetime_norm(
    traj: &Trajectory,
    q: f64,
    j0: f64,
    j1: f64,
) -> Result<f64, DiagnosticsError> {
    if !(q >= 1.0) {
        return Err(DiagnosticsError::InvalidExponent(q));
    }
    check_subinterval(traj, j0, j1)?;
    let pows: Vec<f64> = traj
        .fields
        .iter()
        .map(|f| crate::spectral::lebesgue_norm_on_grid(f, q).map(|v| v.powf(q)))
        .collect::<Result<_, _>>()?;
    Ok(time_integral(&traj.times, &pows, j0, j1).powf(1.0 / q))
}

/// The four constituents of `Q(J, u)` plus their sum.
#[derive(Debug, Clone, Copy)]
pub struct QBundle {
    /// `‖u‖_{L_t^∞ H̃^k(J)}` over the stored samples.
    pub sup_sobolev: f64,
    /// `‖D u‖` in `L_t^{2(n+2)/n} L_x^{2(n+2)/n}(J)`.
    pub strichartz_d1: f64,
    /// `‖D^k u‖` in the same mixed norm.
    pub strichartz_dk: f64,
    /// `‖u‖` in the critical `L_t^q L_x^q(J)` norm.
    pub critical: f64,
    pub sum: f64,
}

pub fn q_bundle(
    traj: &Trajectory,
    j0: f64,
    j1: f64,
    basis: &SpectralBasis,
    params: &ModelParams,
) -> Result<QBundle, DiagnosticsError> {
    check_subinterval(traj, j0, j1)?;
    let a = params.strichartz_exponent();
    let mut sup_sobolev = 0.0_f64;
    let mut d1_pows = Vec::with_capacity(traj.len());
    let mut dk_pows = Vec::with_capacity(traj.len());
    for (field, &t) in traj.fields.iter().zip(&traj.times) {
        if t >= j0 - 1e-12 && t <= j1 + 1e-12 {
            sup_sobolev = sup_sobolev.max(basis.sobolev_norm(field, params)?);
        }
        let d1 = basis.frac_deriv(field, 1.0)?;
        let dk = basis.frac_deriv(field, params.k())?;
        d1_pows.push(basis.lebesgue_norm(&d1, a)?.powf(a));
        dk_pows.push(basis.lebesgue_norm(&dk, a)?.powf(a));
    }
    let strichartz_d1 = time_integral(&traj.times, &d1_pows, j0, j1).powf(1.0 / a);
    let strichartz_dk = time_integral(&traj.times, &dk_pows, j0, j1).powf(1.0 / a);
    let critical = spacetime_norm(traj, params.q(), j0, j1)?;
    Ok(QBundle {
        sup_sobolev,
        strichartz_d1,
        strichartz_dk,
        critical,
        sum: sup_sobolev + strichartz_d1 + strichartz_dk + critical,
    })
}

// ---------------------------------------------------------------------------
// the η parameter family

/// Exponent of `g(M)` in `η₁`: `2(n+2)/(6-n)`.
pub fn eta1_exponent(n: u32) -> BigRational {
    let ni = n as i64;
    BigRational::new(BigInt::from(2 * (ni + 2)), BigInt::from(6 - ni))
}

/// Exponent of `g(M)` in `η₂` (printed polynomials per dimension).
pub fn eta2_exponent(n: u32) -> BigRational {
    let ni = n as i64;
    let num = match n {
        3 => 17 * ni.pow(3) - 58 * ni.pow(2) + 84 * ni - 8,
        _ => 3 * ni.pow(3) + 30 * ni.pow(2) + 20 * ni + 8,
    };
    BigRational::new(BigInt::from(num), BigInt::from((6 - ni) * (ni - 2)))
}

/// Exponent of `g(M)` in the Step-7 `η`.
pub fn eta_step7_exponent(n: u32) -> BigRational {
    let ni = n as i64;
    match n {
        3 => BigRational::new(
            BigInt::from(4 * (4 * ni * ni - 15 * ni + 22) * (11 * ni * ni - 16 * ni + 4)),
            BigInt::from((ni - 2) * (ni - 2) * (6 - ni)),
        ),
        _ => BigRational::new(
            BigInt::from(2 * (ni * ni + 12 * ni + 4) * (11 * ni * ni - 16 * ni + 4)),
            BigInt::from((ni + 2) * (6 - ni)),
        ),
    }
}

/// Free multiplicative constants of the η family (the analysis defines
/// them only up to energy powers).
#[derive(Debug, Clone, Copy)]
pub struct EtaConstants {
    pub c1: f64,
    pub c2: f64,
    pub cc: f64,
    /// `η₃ << 1` of the pigeonhole step; configuration only.
    pub eta3: f64,
}

impl Default for EtaConstants {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            cc: 1.0,
            eta3: 1e-2,
        }
    }
}

/// The η parameter family evaluated at an `H̃^k` bound `M` and energy `E`.
#[derive(Debug, Clone, Copy)]
pub struct EtaParameters {
    pub eta1: f64,
    pub eta2: f64,
    pub eta: f64,
    pub m: f64,
    pub e: f64,
    pub constants: EtaConstants,
}

/// `η₁ = c₁/g^{2(n+2)/(6-n)}(M)`, `η₂ = c₂/g^{…}(M)`, `η = c·g^{-…}(M)`,
/// with the printed exponents evaluated exactly.
pub fn eta_parameters(
    e: f64,
    m: f64,
    params: &ModelParams,
    constants: EtaConstants,
) -> EtaParameters {
    let ln_g = model::g_eval(m, params).ln();
    let scaled = |c: f64, exponent: BigRational| c * (-exponent.to_f64().unwrap() * ln_g).exp();
    EtaParameters {
        eta1: scaled(constants.c1, eta1_exponent(params.n())),
        eta2: scaled(constants.c2, eta2_exponent(params.n())),
        eta: scaled(constants.cc, eta_step7_exponent(params.n())),
        m,
        e,
        constants,
    }
}

// ---------------------------------------------------------------------------
// interval partition

/// Divides the trajectory span into consecutive intervals whose
/// `‖u‖_q^q` space-time mass equals `eta1` each (the last piece carries
/// the remainder `<= eta1`), by monotone bisection on the cumulative
/// trapezoid integral.
pub fn partition_intervals(
    traj: &Trajectory,
    eta1: f64,
) -> Result<IntervalFamily, DiagnosticsError> {
    if !(eta1 > 0.0) {
        return Err(DiagnosticsError::InvalidEta(eta1));
    }
    if traj.is_empty() {
        return Err(DiagnosticsError::DegenerateTrajectory { need: 1, got: 0 });
    }
    let q = traj.params.q();
    let (t0, t1) = traj.span();
    let pows: Vec<f64> = traj
        .fields
        .iter()
        .map(|f| crate::spectral::lebesgue_norm_on_grid(f, q).map(|v| v.powf(q)))
        .collect::<Result<_, _>>()?;
    let cumulative = |t: f64| time_integral(&traj.times, &pows, t0, t);
    let total = cumulative(t1);
    let pieces = (total / eta1).floor() as usize;
    // a remainder at rounding level below a whole multiple does not open
    // one more (empty) piece
    let pieces = if pieces > 0 && total - pieces as f64 * eta1 <= 1e-12 * total {
        pieces - 1
    } else {
        pieces
    };
    let mut cuts = Vec::with_capacity(pieces + 2);
    cuts.push(t0);
    for k in 1..=pieces {
        let target = k as f64 * eta1;
        let (mut lo, mut hi) = (*cuts.last().unwrap(), t1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * t1.abs().max(1.0) {
                break;
            }
        }
        let cut = 0.5 * (lo + hi);
        let prev = *cuts.last().unwrap();
        cuts.push(cut.max(prev + f64::EPSILON * t1.abs().max(1.0)));
    }
    cuts.push(t1);
    let intervals: Vec<Interval> = cuts
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]).expect("cuts strictly increasing"))
        .collect();
    Ok(IntervalFamily::new(intervals).expect("partition intervals are sorted and disjoint"))
}

// ---------------------------------------------------------------------------
// long-interval bound predicate

/// Outcome of the long-interval bound check
/// `‖u‖_q^q <= (C₁ g^{a_n}(M))^{C₂ g^{b_n + ε}(M)}`.
#[derive(Debug, Clone)]
pub struct BoundLongReport {
    pub lhs: f64,
    /// Natural log of the right-hand side; the bound itself may overflow
    /// an f64 and is evaluated in log space.
    pub log_rhs: f64,
    pub rhs: f64,
    /// `exp(ln lhs − ln rhs)`; 0 when `lhs == 0`.
    pub ratio: f64,
    pub pass: bool,
}

/// Free constants of the long-interval bound; the analysis only asserts
/// they are large depending on the energy.
#[derive(Debug, Clone, Copy)]
pub struct BoundLongConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundLongConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }
}

pub fn boundlong_predicate(
    traj: &Trajectory,
    m: f64,
    constants: &crate::model::CriticalConstants,
    big_constants: BoundLongConstants,
    params: &ModelParams,
) -> Result<BoundLongReport, DiagnosticsError> {
    if traj.len() < 2 {
        return Err(DiagnosticsError::DegenerateTrajectory {
            need: 2,
            got: traj.len(),
        });
    }
    let observed = traj
        .scalars
        .iter()
        .map(|s| s.sobolev)
        .fold(0.0_f64, f64::max);
    if m < observed {
        return Err(DiagnosticsError::MNotDominating { m, observed });
    }
    let q = traj.params.q();
    let (t0, t1) = traj.span();
    let lhs = spacetime_norm(traj, q, t0, t1)?.powf(q);
    let ln_g = model::g_eval(m, params).ln();
    let b_eps = constants.b_n.to_f64().unwrap() + constants.epsilon;
    // ln RHS = C₂ g^{b_n+ε}(M) · ln( C₁ g^{a_n}(M) )
    let g_pow = (b_eps * ln_g).exp();
    let log_rhs = big_constants.c2 * g_pow * (big_constants.c1.ln() + constants.a_n * ln_g);
    let rhs = log_rhs.exp();
    let ratio = if lhs > 0.0 {
        (lhs.ln() - log_rhs).exp()
    } else {
        0.0
    };
    Ok(BoundLongReport {
        lhs,
        log_rhs,
        rhs,
        ratio,
        pass: lhs == 0.0 || lhs.ln() <= log_rhs,
    })
}

// ---------------------------------------------------------------------------
// scattering detector

/// Cauchy increments of `w(t) = e^{-itΔ} u(t)` in `H̃^k`.
#[derive(Debug, Clone)]
pub struct ScatteringReport {
    /// `(t_{i+1}, ‖w(t_{i+1}) − w(t_i)‖_{H̃^k})`
    pub increments: Vec<(f64, f64)>,
    pub tail_warning: bool,
}

pub fn scattering_cauchy(
    traj: &Trajectory,
    basis: &SpectralBasis,
    params: &ModelParams,
) -> Result<ScatteringReport, DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::DegenerateTrajectory {
            need: 3,
            got: traj.len(),
        });
    }
    let lam = basis.eigenvalues();
    let k = params.k();
    let mut prev: Option<Vec<Complex64>> = None;
    let mut increments = Vec::with_capacity(traj.len() - 1);
    for (field, &t) in traj.fields.iter().zip(&traj.times) {
        // coefficients of e^{-itΔ} u(t): undo the free rotation
        let mut c = basis.to_coefficients(field);
        for (cj, &l) in c.iter_mut().zip(lam) {
            *cj *= Complex64::from_polar(1.0, l * t);
        }
        if let Some(p) = prev.as_ref() {
            let (mut s1, mut sk) = (0.0, 0.0);
            for ((a, b), &l) in c.iter().zip(p).zip(lam) {
                let d = (a - b).norm_sqr();
                s1 += l * d;
                sk += l.powf(k) * d;
            }
            increments.push((t, s1.sqrt() + sk.sqrt()));
        }
        prev = Some(c);
    }
    Ok(ScatteringReport {
        increments,
        tail_warning: traj.max_tail_fraction() > TAIL_WARN_THRESHOLD,
    })
}
