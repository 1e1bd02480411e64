//! The extremal mean-curvature ODE and band-width bounds.
//!
//! Over a scalar-flat base with `Sc ≥ σ`, slice mean curvature obeys
//! `h' ≤ -(σ + c h²)/2` with `c = n/(n-1)`. The extremal profile solves the
//! equality and the maximal band width is the time it needs to travel from
//! `h = -H₋` down to `h = H₊`.
//!
//! Integration runs on the angle `θ = -atan h`, for which
//! `θ' = (σ cos²θ + c sin²θ)/2`. The right-hand side is bounded, so poles of
//! `h` are ordinary crossings of `θ = π/2` and can be located to integrator
//! accuracy.

use alloc::{format, string::String, vec::Vec};
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::warp::{fd_first, LogConcavity, ModelSpace, DENSE_GRID};
use crate::{Error, Result};

/// `|h|` above which [`solve_riccati`] stops recording samples.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Relative agreement required between successive step halvings.
pub const WIDTH_REL_TOL: f64 = 1e-10;

const MAX_HALVINGS: usize = 18;
const MAX_STEPS: usize = 50_000_000;

/// Lower bounds `(σ, H₋, H₊)` on scalar and boundary mean curvature of an
/// `n`-dimensional band. `H₋ = -∞` and `H₊ = -∞` stand for "no bound".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonProblem {
    pub n: u32,
    pub sigma: f64,
    pub h_minus: f64,
    pub h_plus: f64,
}

impl ComparisonProblem {
    pub fn new(n: u32, sigma: f64, h_minus: f64, h_plus: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension must be at least 2, got {n}")));
        }
        if !sigma.is_finite() {
            return Err(Error::Construction(format!("sigma must be finite, got {sigma}")));
        }
        if h_minus.is_nan() || h_plus.is_nan() {
            return Err(Error::Construction(
                "boundary mean curvature bounds must not be NaN".into(),
            ));
        }
        Ok(ComparisonProblem {
            n,
            sigma,
            h_minus,
            h_plus,
        })
    }

    /// `n/(n-1)`
    pub fn c(&self) -> f64 {
        coupling(self.n)
    }

    /// Critical value `√((n-1)|σ|/n)`, the equilibrium of the ODE when `σ < 0`.
    pub fn critical(&self) -> f64 {
        (self.sigma.abs() / self.c()).sqrt()
    }

    /// Initial value `h(0) = -H₋` of the extremal profile.
    pub fn h0(&self) -> f64 {
        -self.h_minus
    }
}

fn coupling(n: u32) -> f64 {
    let n = n as f64;
    n / (n - 1.0)
}

/// Closed-form regime of the extremal profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormTag {
    /// `σ > 0`: `h = -k tan(ω(t - t₀))`.
    TanType,
    /// `σ = 0`: `1/h` is affine in `t`.
    PowerType,
    /// `σ < 0` and `|h| > k`: `h = k coth(ω(t - t₀))`.
    CothType,
    /// Constant solution, `h ≡ ±k` for `σ < 0` or `h ≡ 0` for `σ = 0`.
    ExpConstant,
    /// `σ < 0` and `|h| < k`: the profile rises towards `k`; no model of the
    /// catalog realises it.
    Invalid,
}

pub fn regime_tag(n: u32, sigma: f64, h0: f64) -> ClosedFormTag {
    if sigma > 0.0 {
        return ClosedFormTag::TanType;
    }
    if sigma == 0.0 {
        return if h0 == 0.0 {
            ClosedFormTag::ExpConstant
        } else {
            ClosedFormTag::PowerType
        };
    }
    let k = (sigma.abs() / coupling(n)).sqrt();
    let gap = h0.abs() - k;
    if gap.abs() <= 1e-12 * k {
        ClosedFormTag::ExpConstant
    } else if gap > 0.0 {
        ClosedFormTag::CothType
    } else {
        ClosedFormTag::Invalid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpDirection {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    /// Time of the pole.
    pub t: f64,
    pub direction: BlowUpDirection,
}

/// Integrated extremal profile on the grid `t_k = k·step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSolution {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub blow_up: Option<BlowUp>,
    pub tag: ClosedFormTag,
}

#[derive(Clone, Copy)]
struct AngleOde {
    sigma: f64,
    c: f64,
}

impl AngleOde {
    fn rate(self, th: f64) -> f64 {
        let (s, c) = th.sin_cos();
        0.5 * (self.sigma * c * c + self.c * s * s)
    }

    fn rk4(self, th: f64, dt: f64) -> f64 {
        let k1 = self.rate(th);
        let k2 = self.rate(th + 0.5 * dt * k1);
        let k3 = self.rate(th + 0.5 * dt * k2);
        let k4 = self.rate(th + dt * k3);
        th + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    fn max_rate(self) -> f64 {
        0.5 * self.sigma.abs().max(self.c)
    }

    /// Substep `s ∈ [0, dt]` at which one RK4 step from `th` reaches `target`.
    fn crossing(self, th: f64, dt: f64, target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.rk4(th, mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Time for `θ` to increase from `th0` to `th1` with fixed step `dt`.
    fn travel(self, th0: f64, th1: f64, dt: f64) -> Result<f64> {
        if th0 >= th1 {
            return Ok(0.0);
        }
        let mut th = th0;
        let mut t = 0.0;
        for _ in 0..MAX_STEPS {
            let next = self.rk4(th, dt);
            if next >= th1 {
                return Ok(t + self.crossing(th, dt, th1));
            }
            if next <= th {
                return Err(Error::Numerical(format!("angle stalled at {th} before reaching {th1}")));
            }
            th = next;
            t += dt;
        }
        Err(Error::Numerical(format!(
            "no crossing of {th1} within {MAX_STEPS} steps"
        )))
    }
}

fn angle_of(h: f64) -> f64 {
    if h == f64::INFINITY {
        -FRAC_PI_2
    } else if h == f64::NEG_INFINITY {
        FRAC_PI_2
    } else {
        -h.atan()
    }
}

/// Integrates `h' = -(σ + n/(n-1) h²)/2` from `h(0) = h0` with classical RK4
/// at fixed `step` up to `t_max`. `h0 = +∞` starts on the upper pole.
///
/// Samples stop once `|h|` exceeds [`BLOW_UP_THRESHOLD`]; the pole time is
/// then located by continuing the angle integration to `θ = π/2`.
pub fn solve_riccati(n: u32, sigma: f64, h0: f64, t_max: f64, step: f64) -> Result<RiccatiSolution> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Argument(format!("t_max must be positive, got {t_max}")));
    }
    if n < 2 || !sigma.is_finite() || h0.is_nan() || h0 == f64::NEG_INFINITY {
        return Err(Error::Argument(format!(
            "invalid ODE data n = {n}, sigma = {sigma}, h0 = {h0}"
        )));
    }
    let ode = AngleOde { sigma, c: coupling(n) };
    let th_blow = BLOW_UP_THRESHOLD.atan();
    let mut th = angle_of(h0);
    let mut t = 0.0;
    let mut sol = RiccatiSolution {
        t: alloc::vec![0.0],
        h: alloc::vec![h0],
        blow_up: None,
        tag: regime_tag(n, sigma, h0),
    };
    let steps = (t_max / step).ceil() as usize;
    for k in 1..=steps {
        let dt = (k as f64 * step).min(t_max) - t;
        let next = ode.rk4(th, dt);
        if next > th_blow {
            sol.blow_up = Some(BlowUp {
                t: t + pole_time(ode, th, dt)?,
                direction: BlowUpDirection::Down,
            });
            break;
        }
        th = next;
        t += dt;
        sol.t.push(t);
        sol.h.push(-th.tan());
    }
    Ok(sol)
}

/// Time from angle `th` to the pole, given that one step of `dt` passes the
/// blow-up threshold.
fn pole_time(ode: AngleOde, th: f64, dt: f64) -> Result<f64> {
    let next = ode.rk4(th, dt);
    if next >= FRAC_PI_2 {
        return Ok(ode.crossing(th, dt, FRAC_PI_2));
    }
    Ok(dt + ode.travel(next, FRAC_PI_2, dt)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidthKind {
    Finite { width: f64 },
    Infinite,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthVerdict {
    pub kind: WidthKind,
    pub tag: ClosedFormTag,
    /// Description of the extremal profile behind the verdict.
    pub certificate: String,
    /// Final RK4 step for finite widths.
    pub step: Option<f64>,
}

impl WidthVerdict {
    pub fn width(&self) -> Option<f64> {
        match self.kind {
            WidthKind::Finite { width } => Some(width),
            _ => None,
        }
    }
}

/// Maximal width of a band satisfying the bounds of `p`, defined as
/// `sup{T : h(T) ≥ H₊}` for the extremal profile with `h(0) = -H₋`.
///
/// The verdict is decided by the phase portrait of the ODE; finite widths
/// are integrated with step halving until two successive values agree to
/// [`WIDTH_REL_TOL`].
pub fn width_bound(p: &ComparisonProblem) -> Result<WidthVerdict> {
    let h0 = p.h0();
    let target = p.h_plus;
    let sigma = p.sigma;
    let k = p.critical();
    let tag = regime_tag(p.n, sigma, h0);
    let f0 = sigma + p.c() * h0 * h0;
    let verdict = |kind, certificate: String| WidthVerdict {
        kind,
        tag,
        certificate,
        step: None,
    };

    if h0 < target {
        if sigma < 0.0 && h0.abs() < k && target < k {
            return Ok(verdict(
                WidthKind::Infinite,
                format!("profile rises from {h0} towards h_c = {k} above H+ = {target}"),
            ));
        }
        return Ok(verdict(
            WidthKind::Infeasible,
            format!("profile starts at {h0} below H+ = {target} and never reaches it"),
        ));
    }
    if f0 <= 0.0 {
        return Ok(verdict(
            WidthKind::Infinite,
            format!("profile is nondecreasing from {h0} and stays above H+ = {target}"),
        ));
    }
    if h0 == target {
        return Ok(verdict(
            WidthKind::Finite { width: 0.0 },
            format!("h(0) = H+ = {target}"),
        ));
    }
    let finite = if sigma > 0.0 {
        true
    } else if sigma == 0.0 {
        h0 < 0.0 || target > 0.0
    } else {
        h0 < -k || target > k
    };
    if !finite {
        let limit = if sigma == 0.0 { 0.0 } else { k };
        return Ok(verdict(
            WidthKind::Infinite,
            format!("profile decreases from {h0} to the plateau {limit} >= H+ = {target}"),
        ));
    }

    let ode = AngleOde { sigma, c: p.c() };
    let (th0, th1) = (angle_of(h0), angle_of(target));
    let mut dt = 0.05 / ode.max_rate();
    let mut prev = ode.travel(th0, th1, dt)?;
    let mut converged = false;
    for _ in 0..MAX_HALVINGS {
        dt *= 0.5;
        let cur = ode.travel(th0, th1, dt)?;
        let agree = (cur - prev).abs() <= WIDTH_REL_TOL * cur.abs().max(1.0);
        prev = cur;
        if agree {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "width did not settle under step refinement (last step {dt})"
        )));
    }
    Ok(WidthVerdict {
        kind: WidthKind::Finite { width: prev },
        tag,
        certificate: format!("{tag:?} profile from h = {h0} down to h = {target}"),
        step: Some(dt),
    })
}

/// The extremal profile behind [`width_bound`], sampled at `samples` points.
/// Infinite and infeasible verdicts are sampled over `horizon`.
pub fn extremal_profile(p: &ComparisonProblem, samples: usize, horizon: f64) -> Result<RiccatiSolution> {
    if samples < 2 {
        return Err(Error::Argument("profile needs at least 2 samples".into()));
    }
    let t_max = match width_bound(p)?.kind {
        WidthKind::Finite { width } if width > 0.0 => width,
        WidthKind::Finite { .. } => {
            return Ok(RiccatiSolution {
                t: alloc::vec![0.0],
                h: alloc::vec![p.h0()],
                blow_up: None,
                tag: regime_tag(p.n, p.sigma, p.h0()),
            })
        }
        _ => horizon,
    };
    solve_riccati(p.n, p.sigma, p.h0(), t_max, t_max / (samples - 1) as f64)
}

/// Analytic families of extremal profiles, named after the model whose
/// slice mean curvature they reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthFamily {
    /// `σ > 0`, arctan inversion.
    Cos,
    /// `σ = 0`, reciprocal inversion.
    Power,
    /// `σ < 0`, arcoth inversion.
    Sinh,
}

impl WidthFamily {
    pub fn for_sigma(sigma: f64) -> Self {
        if sigma > 0.0 {
            WidthFamily::Cos
        } else if sigma == 0.0 {
            WidthFamily::Power
        } else {
            WidthFamily::Sinh
        }
    }
}

/// `arcoth x` for `|x| > 1`, zero at `±∞`.
pub fn acoth(x: f64) -> f64 {
    0.5 * (2.0 / (x - 1.0)).ln_1p()
}

/// Width obtained by inverting the closed-form extremal profile of `family`.
/// Boundary data without a finite travel time gives [`Error::Infeasible`].
pub fn closed_form_width(family: WidthFamily, p: &ComparisonProblem) -> Result<f64> {
    if WidthFamily::for_sigma(p.sigma) != family {
        return Err(Error::Argument(format!(
            "sigma = {} does not belong to the {family:?} family",
            p.sigma
        )));
    }
    let (h0, target) = (p.h0(), p.h_plus);
    let c = p.c();
    let k = p.critical();
    let infeasible = || {
        Err(Error::Infeasible(format!(
            "no finite extremal profile from h = {h0} to h = {target} for sigma = {}",
            p.sigma
        )))
    };
    if h0 < target || h0 == f64::NEG_INFINITY {
        return infeasible();
    }
    if h0 == target {
        return Ok(0.0);
    }
    match family {
        WidthFamily::Cos => {
            let omega = c * k / 2.0;
            Ok(((h0 / k).atan() - (target / k).atan()) / omega)
        }
        WidthFamily::Power => {
            if (h0 > 0.0 && target > 0.0) || h0 < 0.0 {
                Ok(2.0 / c * (1.0 / target - 1.0 / h0))
            } else {
                infeasible()
            }
        }
        WidthFamily::Sinh => {
            if (h0 > k && target > k) || h0 < -k {
                let omega = c * k / 2.0;
                Ok((acoth(target / k) - acoth(h0 / k)) / omega)
            } else {
                infeasible()
            }
        }
    }
}

/// Width bound for a band with `Sc ≥ -n(n-1)`, no condition on `∂₋` and
/// `H(∂₊) ≥ h_plus > n-1`: `(2/n) arcoth(h_plus/(n-1))`.
pub fn hyperbolic_corollary_width(n: u32, h_plus: f64) -> Result<f64> {
    let nf = n as f64;
    let p = ComparisonProblem::new(n, -nf * (nf - 1.0), f64::NEG_INFINITY, h_plus)?;
    closed_form_width(WidthFamily::Sinh, &p)
}

/// `(n, σ/λ², H₋/λ, H₊/λ)`, the bounds satisfied after scaling lengths by `λ`.
pub fn scaling_transform(p: &ComparisonProblem, lambda: f64) -> Result<ComparisonProblem> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("scale must be positive, got {lambda}")));
    }
    Ok(ComparisonProblem {
        n: p.n,
        sigma: p.sigma / (lambda * lambda),
        h_minus: p.h_minus / lambda,
        h_plus: p.h_plus / lambda,
    })
}

/// A function sampled on a uniform grid of `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Argument(format!("invalid interval [{a}, {b}]")));
        }
        if values.len() < 4 {
            return Err(Error::Argument("sampled profile needs at least 4 points".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("sampled profile must be finite".into()));
        }
        Ok(SampledProfile { a, b, values })
    }

    pub fn from_fn(a: f64, b: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let step = (b - a) / (points.max(2) - 1) as f64;
        Self::new(a, b, (0..points).map(|k| f(a + k as f64 * step)).collect())
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        self.a + k as f64 * self.step()
    }
}

/// Which hypothesis of the ODE comparison failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonCondition {
    /// `h₁(a) ≤ h₂(a)`
    BoundaryStart,
    /// `h₂(b) ≤ h₁(b)`
    BoundaryEnd,
    /// `c h₁² + 2h₁' ≤ c h₂² + 2h₂'`
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OdeVerdict {
    HypothesesHoldAndEqual,
    HypothesesViolated {
        location: f64,
        which: ComparisonCondition,
    },
    /// Never produced by exact data; signals discretisation error.
    HypothesesHoldButUnequal {
        max_difference: f64,
    },
}

/// Numeric ODE comparison: if `c h₁² + 2h₁' ≤ c h₂² + 2h₂'`,
/// `h₁(a) ≤ h₂(a)` and `h₁(b) ≥ h₂(b)` then `h₁ = h₂`. All checks use the
/// single tolerance `tol`; derivatives are second-order finite differences.
pub fn ode_comparison_check(h1: &SampledProfile, h2: &SampledProfile, n: u32, tol: f64) -> Result<OdeVerdict> {
    if h1.values.len() != h2.values.len() || h1.a != h2.a || h1.b != h2.b {
        return Err(Error::Argument("profiles are sampled on different grids".into()));
    }
    if n < 2 {
        return Err(Error::Argument(format!("dimension must be at least 2, got {n}")));
    }
    let m = h1.values.len();
    let (v1, v2) = (&h1.values, &h2.values);
    if v1[0] > v2[0] + tol {
        return Ok(OdeVerdict::HypothesesViolated {
            location: h1.a,
            which: ComparisonCondition::BoundaryStart,
        });
    }
    if v2[m - 1] > v1[m - 1] + tol {
        return Ok(OdeVerdict::HypothesesViolated {
            location: h1.b,
            which: ComparisonCondition::BoundaryEnd,
        });
    }
    let c = coupling(n);
    let dx = h1.step();
    let (d1, d2) = (fd_first(v1, dx), fd_first(v2, dx));
    let mut worst: Option<(f64, usize)> = None;
    for k in 0..m {
        let excess = (c * v1[k] * v1[k] + 2.0 * d1[k]) - (c * v2[k] * v2[k] + 2.0 * d2[k]);
        if excess > tol && worst.is_none_or(|(w, _)| excess > w) {
            worst = Some((excess, k));
        }
    }
    if let Some((_, k)) = worst {
        return Ok(OdeVerdict::HypothesesViolated {
            location: h1.t(k),
            which: ComparisonCondition::Differential,
        });
    }
    let max_difference = v1.iter().zip(v2).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if max_difference <= tol {
        Ok(OdeVerdict::HypothesesHoldAndEqual)
    } else {
        Ok(OdeVerdict::HypothesesHoldButUnequal { max_difference })
    }
}

/// Hypotheses for comparing two warped products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    ScalarCurvature,
    MeanCurvatureMinus,
    MeanCurvaturePlus,
    Width,
    LogConcavity,
}

/// Which comparison statement applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonCase {
    SameDomain,
    LogConstant,
    StrictlyLogConcave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CompareVerdict {
    EqualityForced { case: ComparisonCase, max_deviation: f64 },
    HypothesisFails { which: Hypothesis, detail: String },
}

/// Tolerance for hypothesis checks, relative to the size of the data.
const COMPARE_TOL: f64 = 1e-9;

/// Checks the hypotheses under which `m1` is forced to agree with `m2`
/// pulled back along the affine map `[a, b] → [c, d]`.
///
/// With equal domains nothing is assumed about `φ₂`. Otherwise `φ₂` must be
/// log-constant, or strictly log-concave with `b - a ≥ d - c`. When all
/// hypotheses hold the profiles are compared on a dense grid; a mismatch is
/// reported as a numerical error since exact data cannot produce it.
pub fn compare_warped_products(m1: &ModelSpace, m2: &ModelSpace) -> Result<CompareVerdict> {
    if m1.base_scalar() != 0.0 || m2.base_scalar() != 0.0 {
        return Err(Error::Unsupported("comparison requires a scalar-flat base".into()));
    }
    if m1.n() != m2.n() {
        return Err(Error::Argument(format!("dimensions differ: {} and {}", m1.n(), m2.n())));
    }
    let (a, b) = m1.domain();
    let (c, d) = m2.domain();
    let pull = |t: f64| if t >= b { d } else { (d - c) / (b - a) * (t - a) + c };
    let fails = |which, detail: String| Ok(CompareVerdict::HypothesisFails { which, detail });

    let case = if a == c && b == d {
        ComparisonCase::SameDomain
    } else {
        match m2.classify(crate::warp::default_log_concavity_tol(m2.warp())) {
            LogConcavity::LogConstant => ComparisonCase::LogConstant,
            LogConcavity::StrictlyLogConcave => ComparisonCase::StrictlyLogConcave,
            LogConcavity::Neither => {
                return fails(
                    Hypothesis::LogConcavity,
                    "second warping function is neither log-constant nor strictly log-concave".into(),
                )
            }
        }
    };

    let grid = |k: usize| a + (b - a) * k as f64 / (DENSE_GRID - 1) as f64;
    for k in 0..DENSE_GRID {
        let t = grid(k);
        let (s1, s2) = (m1.scalar_curvature(t)?, m2.scalar_curvature(pull(t))?);
        if s1 < s2 - COMPARE_TOL * (1.0 + s2.abs()) {
            return fails(
                Hypothesis::ScalarCurvature,
                format!("Sc1 = {s1} < Sc2 = {s2} at t = {t}"),
            );
        }
    }
    let (hm1, hp1) = m1.boundary_mean_curvatures();
    let (hm2, hp2) = m2.boundary_mean_curvatures();
    if hm1 < hm2 - COMPARE_TOL * (1.0 + hm2.abs()) {
        return fails(Hypothesis::MeanCurvatureMinus, format!("H-1 = {hm1} < H-2 = {hm2}"));
    }
    if hp1 < hp2 - COMPARE_TOL * (1.0 + hp2.abs()) {
        return fails(Hypothesis::MeanCurvaturePlus, format!("H+1 = {hp1} < H+2 = {hp2}"));
    }
    if case == ComparisonCase::StrictlyLogConcave && (b - a) < (d - c) - COMPARE_TOL * (d - c) {
        return fails(Hypothesis::Width, format!("width {} < {}", b - a, d - c));
    }

    let mut max_deviation = 0.0_f64;
    let mut scale = 1.0_f64;
    for k in 0..DENSE_GRID {
        let t = grid(k);
        let (h1, h2) = (m1.mean_curvature(t)?, m2.mean_curvature(pull(t))?);
        max_deviation = max_deviation.max((h1 - h2).abs());
        scale = scale.max(h2.abs());
    }
    if max_deviation > 1e-6 * scale {
        return Err(Error::Numerical(format!(
            "hypotheses hold but mean curvature profiles differ by {max_deviation}"
        )));
    }
    Ok(CompareVerdict::EqualityForced { case, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::ModelFamily;
    use core::f64::consts::PI;

    fn problem(n: u32, sigma: f64, hm: f64, hp: f64) -> ComparisonProblem {
        ComparisonProblem::new(n, sigma, hm, hp).unwrap()
    }

    #[test]
    fn tan_solution_and_pole() {
        let sol = solve_riccati(3, 6.0, 0.0, 2.0, 1e-3).unwrap();
        let pole = sol.blow_up.unwrap();
        assert_eq!(pole.direction, BlowUpDirection::Down);
        assert!((pole.t - PI / 3.0).abs() < 1e-6, "{}", pole.t);
        assert_eq!(sol.tag, ClosedFormTag::TanType);
        for (t, h) in sol.t.iter().zip(&sol.h) {
            if *t < 0.9 {
                assert!((h + 2.0 * (1.5 * t).tan()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equilibria() {
        let sol = solve_riccati(5, 0.0, 0.0, 3.0, 0.01).unwrap();
        assert!(sol.blow_up.is_none());
        assert!(sol.h.iter().all(|h| *h == 0.0));
        assert_eq!(sol.tag, ClosedFormTag::ExpConstant);

        let sol = solve_riccati(4, -12.0, 3.0, 3.0, 0.01).unwrap();
        assert_eq!(sol.tag, ClosedFormTag::ExpConstant);
        assert!(sol.h.iter().all(|h| (h - 3.0).abs() < 1e-12));
    }

    #[test]
    fn solver_argument_errors() {
        assert!(matches!(solve_riccati(3, 1.0, 0.0, 1.0, 0.0), Err(Error::Argument(_))));
        assert!(matches!(solve_riccati(3, 1.0, 0.0, 1.0, -1.0), Err(Error::Argument(_))));
        assert!(solve_riccati(3, 1.0, 0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn regime_tags() {
        assert_eq!(regime_tag(4, -12.0, 5.0), ClosedFormTag::CothType);
        assert_eq!(regime_tag(4, -12.0, -5.0), ClosedFormTag::CothType);
        assert_eq!(regime_tag(4, -12.0, 1.0), ClosedFormTag::Invalid);
        assert_eq!(regime_tag(4, 0.0, 1.0), ClosedFormTag::PowerType);
    }

    #[test]
    fn width_examples() {
        let v = width_bound(&problem(7, 42.0, -1e6, -1e6)).unwrap();
        let w = v.width().unwrap();
        assert!(w <= 2.0 * PI / 7.0 && w >= 2.0 * PI / 7.0 - 1e-4, "{w}");

        let h = 2.0 * (-0.45_f64).tan();
        let w = width_bound(&problem(3, 6.0, h, h)).unwrap().width().unwrap();
        assert!((w - 0.6).abs() < 1e-6);

        let w = width_bound(&problem(4, 12.0, 0.0, 0.0)).unwrap();
        assert_eq!(w.kind, WidthKind::Finite { width: 0.0 });

        let w = width_bound(&problem(5, 0.0, f64::NEG_INFINITY, 0.5))
            .unwrap()
            .width()
            .unwrap();
        assert!((w - 3.2).abs() < 1e-8);

        let v = width_bound(&problem(4, -12.0, -4.0, 2.0)).unwrap();
        assert_eq!(v.kind, WidthKind::Infinite);
    }

    #[test]
    fn width_phase_portrait() {
        assert_eq!(
            width_bound(&problem(3, 6.0, 0.0, 0.5)).unwrap().kind,
            WidthKind::Infeasible
        );
        assert_eq!(
            width_bound(&problem(5, 0.0, 0.0, 0.5)).unwrap().kind,
            WidthKind::Infeasible
        );
        assert_eq!(
            width_bound(&problem(5, 0.0, -1.0, -0.5)).unwrap().kind,
            WidthKind::Infinite
        );
        assert!(width_bound(&problem(5, 0.0, 1.0, -3.0)).unwrap().width().is_some());
        // Rising profile below the equilibrium.
        assert_eq!(
            width_bound(&problem(4, -12.0, 1.0, 2.0)).unwrap().kind,
            WidthKind::Infinite
        );
        assert_eq!(
            width_bound(&problem(4, -12.0, -2.0, 4.0)).unwrap().kind,
            WidthKind::Infeasible
        );
        // Coth branch above h_c.
        assert!(width_bound(&problem(4, -12.0, -6.0, 4.0)).unwrap().width().is_some());
        // Below -h_c the profile blows down.
        assert!(width_bound(&problem(4, -12.0, 4.0, -10.0)).unwrap().width().is_some());
    }

    #[test]
    fn closed_form_examples() {
        let h = 2.0 * (-0.45_f64).tan();
        let w = closed_form_width(WidthFamily::Cos, &problem(3, 6.0, h, h)).unwrap();
        assert!((w - 0.6).abs() < 1e-12);

        let w = hyperbolic_corollary_width(3, 4.0).unwrap();
        assert!((w - 2.0 / 3.0 * 0.5 * 3.0_f64.ln()).abs() < 1e-12);
        assert!((w - 0.36620).abs() < 1e-5);

        let w = closed_form_width(WidthFamily::Power, &problem(5, 0.0, -8.0 / 0.5, 0.5)).unwrap();
        assert!((w - 3.1).abs() < 1e-12);

        assert!(matches!(
            closed_form_width(WidthFamily::Sinh, &problem(4, -12.0, -2.0, 1.0)),
            Err(Error::Infeasible(_))
        ));
        assert!(closed_form_width(WidthFamily::Sinh, &problem(4, 12.0, -2.0, 1.0)).is_err());
    }

    #[test]
    fn scaling_examples() {
        let p = problem(3, 6.0, -1.0, -1.0);
        let q = scaling_transform(&p, 2.0).unwrap();
        assert_eq!(q, problem(3, 1.5, -0.5, -0.5));
        assert_eq!(scaling_transform(&p, 1.0).unwrap(), p);
        assert!(scaling_transform(&p, 0.0).is_err());
        assert!(scaling_transform(&p, -1.0).is_err());
    }

    #[test]
    fn ode_check_examples() {
        let f = |t: f64| -2.0 * (1.5 * t).tan();
        let h2 = SampledProfile::from_fn(-0.3, 0.3, 601, f).unwrap();
        assert_eq!(
            ode_comparison_check(&h2, &h2, 3, 1e-6).unwrap(),
            OdeVerdict::HypothesesHoldAndEqual
        );

        let bump = |t: f64| {
            if t.abs() < 0.1 {
                (1.0 - (t / 0.1).powi(2)).powi(3)
            } else {
                0.0
            }
        };
        let h1 = SampledProfile::from_fn(-0.3, 0.3, 601, |t| f(t) - 0.1 * bump(t)).unwrap();
        match ode_comparison_check(&h1, &h2, 3, 1e-6).unwrap() {
            OdeVerdict::HypothesesViolated { location, which } => {
                assert_eq!(which, ComparisonCondition::Differential);
                assert!(location.abs() < 0.1);
            }
            v => panic!("{v:?}"),
        }

        let mut shifted = h2.clone();
        shifted.values[0] += 1.0;
        assert_eq!(
            ode_comparison_check(&shifted, &h2, 3, 1e-6).unwrap(),
            OdeVerdict::HypothesesViolated {
                location: -0.3,
                which: ComparisonCondition::BoundaryStart
            }
        );

        let coarse = SampledProfile::from_fn(-0.3, 0.3, 301, f).unwrap();
        assert!(matches!(
            ode_comparison_check(&coarse, &h2, 3, 1e-6),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn compare_examples() {
        let m = ModelFamily::Cos.build(3, -0.3, 0.3).unwrap();
        assert!(matches!(
            compare_warped_products(&m, &m).unwrap(),
            CompareVerdict::EqualityForced {
                case: ComparisonCase::SameDomain,
                ..
            }
        ));

        let e1 = ModelFamily::Exp.build(4, 0.0, 1.0).unwrap();
        let e2 = ModelFamily::Exp.build(4, 2.0, 5.0).unwrap();
        assert!(matches!(
            compare_warped_products(&e1, &e2).unwrap(),
            CompareVerdict::EqualityForced {
                case: ComparisonCase::LogConstant,
                ..
            }
        ));

        let small = ModelFamily::Cos.build(3, -0.2, 0.2).unwrap();
        assert!(matches!(
            compare_warped_products(&small, &m).unwrap(),
            CompareVerdict::HypothesisFails {
                which: Hypothesis::Width,
                ..
            }
        ));

        let annulus = ModelFamily::SphereAnnulus.build(3, -0.5, 0.5).unwrap();
        assert!(matches!(
            compare_warped_products(&annulus, &m),
            Err(Error::Unsupported(_))
        ));
    }
}
