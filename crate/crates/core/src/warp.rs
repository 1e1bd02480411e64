//! Warping functions, warped-product curvature profiles and the model catalog.
//!
//! A warped product over a closed base `(N, g_N)` with warping function
//! `φ: [a, b] → (0, ∞)` carries the metric `φ(t)² g_N + dt²`. Its scalar
//! curvature and the mean curvature of the slices `N × {t}` are
//!
//! ```text
//! Sc(t) = Sc_N / φ² - 2(n-1) φ''/φ - (n-1)(n-2) (φ'/φ)²
//! h(t)  = (n-1) φ'/φ
//! ```
//!
//! and together they satisfy `Sc + n/(n-1) h² + 2h' = Sc_N / φ²`, which is the
//! identity every comparison argument in this crate is built on.
//!
//! Mean curvature is the trace of the second fundamental form with respect to
//! the inner normal, so the unit sphere in euclidean space has `H = n - 1`.

use alloc::{format, vec::Vec};
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of points used for dense grid scans (classification, constancy).
pub const DENSE_GRID: usize = 2001;

/// Default tolerance for log-concavity classification of analytic warps.
pub const LOG_CONCAVITY_TOL: f64 = 1e-10;

/// Closed-form warping functions. `p` is the exponent parameter of the
/// power-type families (the dimension `n` for the catalog models).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `φ = 1`
    Constant,
    /// `φ = e^t`
    Exp,
    /// `φ = cos(p t / 2)^(2/p)`
    CosPower { p: f64 },
    /// `φ = t^(2/p)`
    Power { p: f64 },
    /// `φ = sinh(p t / 2)^(2/p)`
    SinhPower { p: f64 },
    /// `φ = cos t`
    Cos,
    /// `φ = t`
    Linear,
    /// `φ = sinh t`
    Sinh,
    /// `φ = cosh t`
    Cosh,
}

impl ClosedForm {
    fn value(self, t: f64) -> f64 {
        match self {
            ClosedForm::Constant => 1.0,
            ClosedForm::Exp => t.exp(),
            ClosedForm::CosPower { p } => (p * t / 2.0).cos().powf(2.0 / p),
            ClosedForm::Power { p } => t.powf(2.0 / p),
            ClosedForm::SinhPower { p } => (p * t / 2.0).sinh().powf(2.0 / p),
            ClosedForm::Cos => t.cos(),
            ClosedForm::Linear => t,
            ClosedForm::Sinh => t.sinh(),
            ClosedForm::Cosh => t.cosh(),
        }
    }

    /// `(φ'/φ, (φ'/φ)')`
    fn log_slope(self, t: f64) -> (f64, f64) {
        match self {
            ClosedForm::Constant => (0.0, 0.0),
            ClosedForm::Exp => (1.0, 0.0),
            ClosedForm::CosPower { p } => {
                let x = p * t / 2.0;
                let c = x.cos();
                (-x.tan(), -(p / 2.0) / (c * c))
            }
            ClosedForm::Power { p } => ((2.0 / p) / t, -(2.0 / p) / (t * t)),
            ClosedForm::SinhPower { p } => {
                let x = p * t / 2.0;
                let s = x.sinh();
                (x.cosh() / s, -(p / 2.0) / (s * s))
            }
            ClosedForm::Cos => {
                let c = t.cos();
                (-t.tan(), -1.0 / (c * c))
            }
            ClosedForm::Linear => (1.0 / t, -1.0 / (t * t)),
            ClosedForm::Sinh => {
                let s = t.sinh();
                (t.cosh() / s, -1.0 / (s * s))
            }
            ClosedForm::Cosh => {
                let c = t.cosh();
                (t.tanh(), 1.0 / (c * c))
            }
        }
    }

    /// Open interval on which the function is smooth and positive.
    fn admissible(self) -> (f64, f64) {
        match self {
            ClosedForm::Constant | ClosedForm::Exp | ClosedForm::Cosh => (f64::NEG_INFINITY, f64::INFINITY),
            ClosedForm::CosPower { p } => (-PI / p, PI / p),
            ClosedForm::Cos => (-FRAC_PI_2, FRAC_PI_2),
            ClosedForm::Power { .. } | ClosedForm::SinhPower { .. } | ClosedForm::Linear | ClosedForm::Sinh => {
                (0.0, f64::INFINITY)
            }
        }
    }
}

/// Uniformly sampled warping function with precomputed second-order
/// finite-difference derivatives at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWarp {
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    /// `φ'/φ` at the nodes.
    slope: Vec<f64>,
    /// `(φ'/φ)'` at the nodes, differentiated from `slope`.
    slope_d1: Vec<f64>,
}

impl SampledWarp {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// First derivative by centered differences, one-sided second-order stencils
/// at the ends.
pub(crate) fn fd_first(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx));
    for k in 1..n - 1 {
        d.push((f[k + 1] - f[k - 1]) / (2.0 * dx));
    }
    d.push((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx));
    d
}

fn fd_second(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let dx2 = dx * dx;
    let mut d = Vec::with_capacity(n);
    d.push((2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / dx2);
    for k in 1..n - 1 {
        d.push((f[k + 1] - 2.0 * f[k] + f[k - 1]) / dx2);
    }
    d.push((2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / dx2);
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpKind {
    ClosedForm(ClosedForm),
    Sampled(SampledWarp),
}

/// Value and first two derivatives of a warping function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// A positive function `φ` on a closed interval `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpingFunction {
    a: f64,
    b: f64,
    kind: WarpKind,
}

impl WarpingFunction {
    pub fn closed_form(form: ClosedForm, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        let (lo, hi) = form.admissible();
        if !(a > lo && b < hi) {
            return Err(Error::Construction(format!(
                "{form:?} is only positive and smooth on ({lo}, {hi}); got [{a}, {b}]"
            )));
        }
        Ok(WarpingFunction {
            a,
            b,
            kind: WarpKind::ClosedForm(form),
        })
    }

    /// Builds a sampled warping function from values on the uniform grid
    /// `a = t_0 < ... < t_{m-1} = b`.
    pub fn sampled(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        check_interval(a, b)?;
        if values.len() < 8 {
            return Err(Error::Construction(format!(
                "sampled warping function needs at least 8 points, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Construction(format!(
                "warping function must be positive and finite, found {v}"
            )));
        }
        let dx = (b - a) / (values.len() - 1) as f64;
        let d1 = fd_first(&values, dx);
        let d2 = fd_second(&values, dx);
        let slope: Vec<f64> = d1.iter().zip(&values).map(|(d, v)| d / v).collect();
        let slope_d1 = fd_first(&slope, dx);
        Ok(WarpingFunction {
            a,
            b,
            kind: WarpKind::Sampled(SampledWarp {
                values,
                d1,
                d2,
                slope,
                slope_d1,
            }),
        })
    }

    /// Samples `self` on `points` uniformly spaced nodes.
    pub fn to_sampled(&self, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::Argument(format!("need at least 8 points, got {points}")));
        }
        let values = (0..points)
            .map(|k| self.eval(self.node(k, points)).map(|w| w.value))
            .collect::<Result<Vec<_>>>()?;
        Self::sampled(self.a, self.b, values)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.kind, WarpKind::Sampled(_))
    }

    /// Spacing of the sample grid, `None` for closed forms.
    pub fn grid_spacing(&self) -> Option<f64> {
        match &self.kind {
            WarpKind::Sampled(s) => Some((self.b - self.a) / (s.values.len() - 1) as f64),
            WarpKind::ClosedForm(_) => None,
        }
    }

    fn node(&self, k: usize, points: usize) -> f64 {
        if k + 1 == points {
            self.b
        } else {
            self.a + (self.b - self.a) * k as f64 / (points - 1) as f64
        }
    }

    /// Validates `t` and snaps values within rounding distance of an end point.
    fn locate(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * (self.b - self.a).max(1.0);
        if !(t >= self.a - slack && t <= self.b + slack) {
            return Err(Error::Domain {
                t,
                a: self.a,
                b: self.b,
            });
        }
        Ok(t.max(self.a).min(self.b))
    }

    fn interp(&self, s: &SampledWarp, t: f64, f: impl Fn(&SampledWarp, usize) -> f64) -> f64 {
        let m = s.values.len();
        let x = (t - self.a) / (self.b - self.a) * (m - 1) as f64;
        let k = (x.floor() as usize).min(m - 2);
        let lam = x - k as f64;
        (1.0 - lam) * f(s, k) + lam * f(s, k + 1)
    }

    /// `(φ(t), φ'(t), φ''(t))`.
    pub fn eval(&self, t: f64) -> Result<WarpValue> {
        let t = self.locate(t)?;
        Ok(match &self.kind {
            WarpKind::ClosedForm(form) => {
                let value = form.value(t);
                let (l1, l2) = form.log_slope(t);
                WarpValue {
                    value,
                    d1: value * l1,
                    d2: value * (l2 + l1 * l1),
                }
            }
            WarpKind::Sampled(s) => WarpValue {
                value: self.interp(s, t, |s, k| s.values[k]),
                d1: self.interp(s, t, |s, k| s.d1[k]),
                d2: self.interp(s, t, |s, k| s.d2[k]),
            },
        })
    }

    /// `(φ'/φ, (φ'/φ)')` at `t`. For sampled functions the second entry is a
    /// finite difference of the first, not an algebraic combination of `φ''`.
    pub fn log_slope(&self, t: f64) -> Result<(f64, f64)> {
        let t = self.locate(t)?;
        Ok(match &self.kind {
            WarpKind::ClosedForm(form) => form.log_slope(t),
            WarpKind::Sampled(s) => (
                self.interp(s, t, |s, k| s.slope[k]),
                self.interp(s, t, |s, k| s.slope_d1[k]),
            ),
        })
    }

    /// Samples of `q = (φ'/φ)'` used for classification: a dense analytic
    /// grid for closed forms, centered differences at interior nodes for
    /// sampled functions.
    fn log_curvature_samples(&self) -> Vec<f64> {
        match &self.kind {
            WarpKind::ClosedForm(form) => (0..DENSE_GRID)
                .map(|k| form.log_slope(self.node(k, DENSE_GRID)).1)
                .collect(),
            WarpKind::Sampled(s) => {
                let m = s.slope.len();
                let dx = (self.b - self.a) / (m - 1) as f64;
                (2..m - 2)
                    .map(|k| (s.slope[k + 1] - s.slope[k - 1]) / (2.0 * dx))
                    .collect()
            }
        }
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Construction(format!(
            "domain must be a finite interval with a < b, got [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Log-concavity class of a warping function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogConcavity {
    StrictlyLogConcave,
    LogConstant,
    Neither,
}

/// Tolerance used by [`log_concavity_classify`] when the caller has no
/// preference: `1e-10` for closed forms, `10·Δt²` for sampled functions.
pub fn default_log_concavity_tol(w: &WarpingFunction) -> f64 {
    match w.grid_spacing() {
        Some(dx) => 10.0 * dx * dx,
        None => LOG_CONCAVITY_TOL,
    }
}

/// Classifies `φ` by the sign of `q = (log φ)''` on a dense grid.
pub fn log_concavity_classify(w: &WarpingFunction, tol: f64) -> LogConcavity {
    let q = w.log_curvature_samples();
    let max_abs = q.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let max = q.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    if max_abs <= tol {
        LogConcavity::LogConstant
    } else if max < -tol {
        LogConcavity::StrictlyLogConcave
    } else {
        LogConcavity::Neither
    }
}

/// A warped product `(N × [a, b], φ² g_N + dt²)` of dimension `n` over a base
/// of constant scalar curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    n: u32,
    base_scalar: f64,
    warp: WarpingFunction,
}

/// Sampled curvature data of a warped product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub t: Vec<f64>,
    pub warp: Vec<f64>,
    pub scalar: Vec<f64>,
    pub mean: Vec<f64>,
    pub identity_residual: Vec<f64>,
    /// Mean curvature of `∂₋M`, equal to `-h(a)`.
    pub h_minus: f64,
    /// Mean curvature of `∂₊M`, equal to `h(b)`.
    pub h_plus: f64,
}

impl ModelSpace {
    pub fn new(n: u32, base_scalar: f64, warp: WarpingFunction) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension must be at least 2, got {n}")));
        }
        if !base_scalar.is_finite() {
            return Err(Error::Construction("base scalar curvature must be finite".into()));
        }
        Ok(ModelSpace { n, base_scalar, warp })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base_scalar(&self) -> f64 {
        self.base_scalar
    }

    pub fn warp(&self) -> &WarpingFunction {
        &self.warp
    }

    pub fn domain(&self) -> (f64, f64) {
        self.warp.domain()
    }

    pub fn width(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn scalar_curvature(&self, t: f64) -> Result<f64> {
        let w = self.warp.eval(t)?;
        let n = self.nf();
        let slope = w.d1 / w.value;
        Ok(self.base_scalar / (w.value * w.value)
            - 2.0 * (n - 1.0) * w.d2 / w.value
            - (n - 1.0) * (n - 2.0) * slope * slope)
    }

    /// Mean curvature `h_φ(t) = (n-1) φ'/φ` of the slice `N × {t}` as the
    /// boundary of `N × [a, t]`.
    pub fn mean_curvature(&self, t: f64) -> Result<f64> {
        let w = self.warp.eval(t)?;
        Ok((self.nf() - 1.0) * w.d1 / w.value)
    }

    pub fn mean_curvature_derivative(&self, t: f64) -> Result<f64> {
        Ok((self.nf() - 1.0) * self.warp.log_slope(t)?.1)
    }

    /// `(H(∂₋M), H(∂₊M)) = (-h_φ(a), h_φ(b))`.
    pub fn boundary_mean_curvatures(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        // Both end points are in the domain by construction.
        let ha = self.mean_curvature(a).unwrap_or(f64::NAN);
        let hb = self.mean_curvature(b).unwrap_or(f64::NAN);
        (-ha, hb)
    }

    /// `Sc + n/(n-1) h² + 2h' - Sc_N/φ²`, zero for exact data.
    pub fn identity_residual(&self, t: f64) -> Result<f64> {
        let n = self.nf();
        let phi = self.warp.eval(t)?.value;
        let sc = self.scalar_curvature(t)?;
        let h = self.mean_curvature(t)?;
        let dh = self.mean_curvature_derivative(t)?;
        Ok(sc + n / (n - 1.0) * h * h + 2.0 * dh - self.base_scalar / (phi * phi))
    }

    /// Evaluates every profile on `samples` uniformly spaced points.
    pub fn profile(&self, samples: usize) -> Result<CurvatureProfile> {
        if samples < 2 {
            return Err(Error::Argument("profile needs at least 2 samples".into()));
        }
        let (a, b) = self.domain();
        let mut p = CurvatureProfile {
            t: Vec::with_capacity(samples),
            warp: Vec::with_capacity(samples),
            scalar: Vec::with_capacity(samples),
            mean: Vec::with_capacity(samples),
            identity_residual: Vec::with_capacity(samples),
            h_minus: 0.0,
            h_plus: 0.0,
        };
        for k in 0..samples {
            let t = if k + 1 == samples {
                b
            } else {
                a + (b - a) * k as f64 / (samples - 1) as f64
            };
            p.t.push(t);
            p.warp.push(self.warp.eval(t)?.value);
            p.scalar.push(self.scalar_curvature(t)?);
            p.mean.push(self.mean_curvature(t)?);
            p.identity_residual.push(self.identity_residual(t)?);
        }
        (p.h_minus, p.h_plus) = self.boundary_mean_curvatures();
        Ok(p)
    }

    pub fn classify(&self, tol: f64) -> LogConcavity {
        log_concavity_classify(&self.warp, tol)
    }

    /// Spread `max Sc - min Sc` over a dense grid.
    pub fn scalar_spread(&self) -> Result<f64> {
        let (a, b) = self.domain();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..DENSE_GRID {
            let sc = self.scalar_curvature(a + (b - a) * k as f64 / (DENSE_GRID - 1) as f64)?;
            lo = lo.min(sc);
            hi = hi.max(sc);
        }
        Ok(hi - lo)
    }

    /// Constant scalar curvature and a strictly log-concave or log-constant
    /// warping function.
    pub fn is_model_space(&self, tol: f64) -> Result<bool> {
        let class = self.classify(default_log_concavity_tol(&self.warp));
        Ok(self.scalar_spread()? < tol && class != LogConcavity::Neither)
    }

    /// Same model with the warping function replaced by a sampled copy.
    pub fn to_sampled(&self, points: usize) -> Result<Self> {
        Ok(ModelSpace {
            warp: self.warp.to_sampled(points)?,
            ..self.clone()
        })
    }
}

/// The catalog of model spaces: five families over a scalar-flat base and
/// three annuli in simply connected space forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// `φ = cos(nt/2)^(2/n)`, scalar curvature `n(n-1)`.
    Cos,
    /// `φ = t^(2/n)`, scalar flat.
    Power,
    /// `φ = sinh(nt/2)^(2/n)`, scalar curvature `-n(n-1)`.
    Sinh,
    /// `φ = 1`, the product metric.
    #[serde(rename = "const")]
    Constant,
    /// `φ = e^t`, scalar curvature `-n(n-1)`.
    Exp,
    /// Unit sphere minus two antipodal points, `φ = cos t` over the round
    /// `S^{n-1}`.
    SphereAnnulus,
    /// Euclidean space minus the origin, `φ = t`.
    EuclideanAnnulus,
    /// Hyperbolic space minus a point, `φ = sinh t`.
    HyperbolicAnnulus,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 8] = [
        ModelFamily::Cos,
        ModelFamily::Power,
        ModelFamily::Sinh,
        ModelFamily::Constant,
        ModelFamily::Exp,
        ModelFamily::SphereAnnulus,
        ModelFamily::EuclideanAnnulus,
        ModelFamily::HyperbolicAnnulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Cos => "cos",
            ModelFamily::Power => "power",
            ModelFamily::Sinh => "sinh",
            ModelFamily::Constant => "const",
            ModelFamily::Exp => "exp",
            ModelFamily::SphereAnnulus => "sphere-annulus",
            ModelFamily::EuclideanAnnulus => "euclidean-annulus",
            ModelFamily::HyperbolicAnnulus => "hyperbolic-annulus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Open range allowed for the end points `ℓ₋ < ℓ₊`.
    pub fn parameter_range(self, n: u32) -> (f64, f64) {
        let n = n as f64;
        match self {
            ModelFamily::Cos => (-PI / n, PI / n),
            ModelFamily::SphereAnnulus => (-FRAC_PI_2, FRAC_PI_2),
            ModelFamily::Power | ModelFamily::Sinh | ModelFamily::EuclideanAnnulus | ModelFamily::HyperbolicAnnulus => {
                (0.0, f64::INFINITY)
            }
            ModelFamily::Constant | ModelFamily::Exp => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn default_interval(self, n: u32) -> (f64, f64) {
        match self {
            ModelFamily::Cos => {
                let half = PI / (2.0 * n as f64);
                (-half, half)
            }
            ModelFamily::SphereAnnulus => (-0.5, 0.5),
            ModelFamily::Power | ModelFamily::EuclideanAnnulus => (1.0, 2.0),
            ModelFamily::Sinh | ModelFamily::HyperbolicAnnulus => (0.5, 1.5),
            ModelFamily::Constant | ModelFamily::Exp => (0.0, 1.0),
        }
    }

    /// Scalar curvature of the model for dimension `n`.
    pub fn scalar_curvature(self, n: u32) -> f64 {
        let n = n as f64;
        match self {
            ModelFamily::Cos | ModelFamily::SphereAnnulus => n * (n - 1.0),
            ModelFamily::Power | ModelFamily::Constant | ModelFamily::EuclideanAnnulus => 0.0,
            ModelFamily::Sinh | ModelFamily::Exp | ModelFamily::HyperbolicAnnulus => -n * (n - 1.0),
        }
    }

    pub fn log_concavity(self) -> LogConcavity {
        match self {
            ModelFamily::Constant | ModelFamily::Exp => LogConcavity::LogConstant,
            _ => LogConcavity::StrictlyLogConcave,
        }
    }

    /// Scalar curvature of the base: zero for the five scalar-flat families,
    /// `(n-1)(n-2)` (unit round sphere) for the annuli.
    pub fn base_scalar(self, n: u32) -> f64 {
        let n = n as f64;
        match self {
            ModelFamily::SphereAnnulus | ModelFamily::EuclideanAnnulus | ModelFamily::HyperbolicAnnulus => {
                (n - 1.0) * (n - 2.0)
            }
            _ => 0.0,
        }
    }

    fn form(self, n: u32) -> ClosedForm {
        let p = n as f64;
        match self {
            ModelFamily::Cos => ClosedForm::CosPower { p },
            ModelFamily::Power => ClosedForm::Power { p },
            ModelFamily::Sinh => ClosedForm::SinhPower { p },
            ModelFamily::Constant => ClosedForm::Constant,
            ModelFamily::Exp => ClosedForm::Exp,
            ModelFamily::SphereAnnulus => ClosedForm::Cos,
            ModelFamily::EuclideanAnnulus => ClosedForm::Linear,
            ModelFamily::HyperbolicAnnulus => ClosedForm::Sinh,
        }
    }

    pub fn build(self, n: u32, l_minus: f64, l_plus: f64) -> Result<ModelSpace> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension must be at least 2, got {n}")));
        }
        let (lo, hi) = self.parameter_range(n);
        if !(l_minus.is_finite() && l_plus.is_finite() && lo < l_minus && l_minus < l_plus && l_plus < hi) {
            return Err(Error::Construction(format!(
                "{} model needs {lo} < l- < l+ < {hi}, got l- = {l_minus}, l+ = {l_plus}",
                self.name()
            )));
        }
        let warp = WarpingFunction::closed_form(self.form(n), l_minus, l_plus)?;
        ModelSpace::new(n, self.base_scalar(n), warp)
    }

    pub fn build_default(self, n: u32) -> Result<ModelSpace> {
        let (a, b) = self.default_interval(n);
        self.build(n, a, b)
    }
}

/// All catalog families.
pub fn model_catalog() -> &'static [ModelFamily] {
    &ModelFamily::ALL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_constant_and_exp() {
        let w = WarpingFunction::closed_form(ClosedForm::Constant, 0.0, 1.0).unwrap();
        assert_eq!(
            w.eval(0.5).unwrap(),
            WarpValue {
                value: 1.0,
                d1: 0.0,
                d2: 0.0
            }
        );
        let w = WarpingFunction::closed_form(ClosedForm::Exp, 0.0, 1.0).unwrap();
        let v = w.eval(0.0).unwrap();
        assert_eq!((v.value, v.d1, v.d2), (1.0, 1.0, 1.0));
    }

    #[test]
    fn eval_cos_power_matches_finite_differences() {
        let w = WarpingFunction::closed_form(ClosedForm::CosPower { p: 7.0 }, -0.3, 0.3).unwrap();
        let v = w.eval(0.0).unwrap();
        // Finite-difference oracle at step 1e-5 on the raw closed form.
        let f = |t: f64| (3.5 * t).cos().powf(2.0 / 7.0);
        let s = 1e-5;
        let d1 = (f(s) - f(-s)) / (2.0 * s);
        let d2 = (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s);
        assert!(close(v.value, 1.0, 1e-15));
        assert!(close(v.d1, d1, 1e-9) && close(v.d1, 0.0, 1e-15));
        assert!(close(v.d2, d2, 1e-4));
        assert!(close(v.d2, -3.5, 1e-12));
    }

    #[test]
    fn domain_errors() {
        let w = WarpingFunction::closed_form(ClosedForm::Exp, 0.0, 1.0).unwrap();
        assert!(matches!(w.eval(1.5), Err(Error::Domain { .. })));
        assert!(matches!(w.eval(-0.1), Err(Error::Domain { .. })));
        assert!(w.eval(f64::NAN).is_err());
        assert!(WarpingFunction::closed_form(ClosedForm::Linear, -1.0, 1.0).is_err());
        assert!(WarpingFunction::closed_form(ClosedForm::Exp, 1.0, 1.0).is_err());
        assert!(WarpingFunction::sampled(0.0, 1.0, alloc::vec![1.0; 7]).is_err());
        assert!(WarpingFunction::sampled(0.0, 1.0, alloc::vec![-1.0; 9]).is_err());
    }

    #[test]
    fn scalar_curvature_examples() {
        let cos7 = ModelFamily::Cos.build(7, -0.2, 0.2).unwrap();
        for t in [-0.2, -0.05, 0.0, 0.13, 0.2] {
            assert!(close(cos7.scalar_curvature(t).unwrap(), 42.0, 1e-10));
        }
        let flat = ModelFamily::Constant.build(6, 0.0, 3.0).unwrap();
        assert_eq!(flat.scalar_curvature(1.0).unwrap(), 0.0);
        let exp4 = ModelFamily::Exp.build(4, 0.0, 1.0).unwrap();
        assert!(close(exp4.scalar_curvature(0.7).unwrap(), -12.0, 1e-12));
        let pow5 = ModelFamily::Power.build(5, 0.5, 2.0).unwrap();
        assert!(close(pow5.scalar_curvature(1.3).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn mean_curvature_examples() {
        let cos7 = ModelFamily::Cos.build(7, -0.4, 0.4).unwrap();
        for t in [-0.3, 0.0, 0.25] {
            assert!(close(cos7.mean_curvature(t).unwrap(), -6.0 * (3.5 * t).tan(), 1e-12));
        }
        let exp4 = ModelFamily::Exp.build(4, 0.0, 1.0).unwrap();
        assert!(close(exp4.mean_curvature(0.3).unwrap(), 3.0, 1e-15));
        let flat = ModelFamily::Constant.build(3, 0.0, 1.0).unwrap();
        assert_eq!(flat.mean_curvature(0.3).unwrap(), 0.0);
    }

    #[test]
    fn boundary_mean_curvature_conventions() {
        let (lm, lp) = (-0.3, 0.4);
        let cos7 = ModelFamily::Cos.build(7, lm, lp).unwrap();
        let (hm, hp) = cos7.boundary_mean_curvatures();
        assert!(close(hm, 6.0 * (3.5 * lm).tan(), 1e-12));
        assert!(close(hp, -6.0 * (3.5 * lp).tan(), 1e-12));

        let flat = ModelFamily::Constant.build(4, -1.0, 2.0).unwrap();
        assert_eq!(flat.boundary_mean_curvatures(), (0.0, 0.0));

        let (lm, lp) = (0.3, 0.9);
        let sinh3 = ModelFamily::Sinh.build(3, lm, lp).unwrap();
        let coth = |x: f64| 1.0 / x.tanh();
        let (hm, hp) = sinh3.boundary_mean_curvatures();
        assert!(close(hm, -2.0 * coth(1.5 * lm), 1e-12));
        assert!(close(hp, 2.0 * coth(1.5 * lp), 1e-12));
    }

    #[test]
    fn identity_residual_for_cos_surface() {
        // n = 2, φ = cos t: Sc = 2, h = -tan t, 2h' = -2 sec² t.
        let w = WarpingFunction::closed_form(ClosedForm::Cos, -1.0, 1.0).unwrap();
        let m = ModelSpace::new(2, 0.0, w).unwrap();
        for t in [-0.9, -0.2, 0.0, 0.7] {
            assert!(close(m.scalar_curvature(t).unwrap(), 2.0, 1e-12));
            assert!(m.identity_residual(t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn log_concavity_examples() {
        let exp = WarpingFunction::closed_form(ClosedForm::Exp, 0.0, 1.0).unwrap();
        assert_eq!(log_concavity_classify(&exp, 1e-10), LogConcavity::LogConstant);
        let cos = WarpingFunction::closed_form(ClosedForm::CosPower { p: 4.0 }, -0.5, 0.5).unwrap();
        assert_eq!(log_concavity_classify(&cos, 1e-10), LogConcavity::StrictlyLogConcave);
        let cosh = WarpingFunction::closed_form(ClosedForm::Cosh, -1.0, 1.0).unwrap();
        assert_eq!(log_concavity_classify(&cosh, 1e-10), LogConcavity::Neither);
    }

    #[test]
    fn catalog_parameter_validation() {
        assert!(ModelFamily::Cos.build(7, -0.2, 0.5).is_err());
        assert!(ModelFamily::Cos.build(7, -0.45, 0.2).is_err());
        assert!(ModelFamily::Power.build(3, 0.0, 1.0).is_err());
        assert!(ModelFamily::Sinh.build(3, -0.5, 1.0).is_err());
        assert!(ModelFamily::Exp.build(3, 1.0, 0.5).is_err());
        assert!(ModelFamily::Exp.build(1, 0.0, 0.5).is_err());
        assert!(ModelFamily::SphereAnnulus.build(3, -1.6, 0.0).is_err());
    }

    #[test]
    fn catalog_annuli_scalar_curvature() {
        let s = ModelFamily::SphereAnnulus.build(3, -0.5, 0.5).unwrap();
        assert!(close(s.scalar_curvature(0.2).unwrap(), 6.0, 1e-12));
        let e = ModelFamily::EuclideanAnnulus.build(3, 1.0, 2.0).unwrap();
        assert!(close(e.scalar_curvature(1.5).unwrap(), 0.0, 1e-12));
        let h = ModelFamily::HyperbolicAnnulus.build(4, 0.5, 1.0).unwrap();
        assert!(close(h.scalar_curvature(0.7).unwrap(), -12.0, 1e-11));
    }

    #[test]
    fn every_catalog_entry_is_a_model_space() {
        for n in 2..=7 {
            for family in model_catalog() {
                let m = family.build_default(n).unwrap();
                assert!(m.is_model_space(1e-8).unwrap(), "{family:?} n={n}");
                assert_eq!(m.classify(LOG_CONCAVITY_TOL), family.log_concavity());
                let sc = m.scalar_curvature(m.domain().0).unwrap();
                assert!(close(sc, family.scalar_curvature(n), 1e-9), "{family:?} n={n}");
            }
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in ModelFamily::ALL {
            assert_eq!(ModelFamily::from_name(f.name()), Some(f));
        }
        assert_eq!(ModelFamily::from_name("torus"), None);
    }
}
