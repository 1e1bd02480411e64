//! Self-checks run by `warpband verify`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use warpband_core::band::{build_flat_cylinder, CellMetric, DiscreteBand, Topology};
use warpband_core::bubble::{
    first_variation_check, functional, minimize, minimize_warped, minimize_with, warped_functional, PrescriptionField,
    Region, Stencil, WeightField,
};
use warpband_core::riccati::{
    closed_form_width, hyperbolic_corollary_width, ode_comparison_check, scaling_transform, width_bound,
    ComparisonCondition, ComparisonProblem, OdeVerdict, SampledProfile, WidthFamily, WidthKind,
};
use warpband_core::spectral::{conformal_verdict, lambda1, ConformalVerdict, DiscreteClosedCurve};
use warpband_core::warp::ModelFamily;

use crate::config::Tolerances;
use crate::error::{CliError, Result};
use crate::oracle::{exhaustive_minimum, row_oracle, MAX_FREE_CELLS};
use crate::tables::CheckRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Widths,
    Bubbles,
    Spectral,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Widths => "widths",
            Suite::Bubbles => "bubbles",
            Suite::Spectral => "spectral",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            Suite::Identities,
            Suite::Widths,
            Suite::Bubbles,
            Suite::Spectral,
            Suite::All,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| format!("unknown suite `{s}`, expected identities, widths, bubbles, spectral or all"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest band, in cells, enumerated by the exhaustive bubble check.
    pub max_cells: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_cells: 16, seed: 1 }
    }
}

struct Checks {
    suite: &'static str,
    rows: Vec<CheckRow>,
}

impl Checks {
    fn push(&mut self, check: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.rows.push(CheckRow {
            suite: self.suite.into(),
            check: check.into(),
            passed,
            detail: detail.into(),
        });
    }
}

pub fn run_suite(suite: Suite, opts: VerifyOptions, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Identities => identities(tol),
        Suite::Widths => widths(opts, tol),
        Suite::Bubbles => bubbles(opts, tol),
        Suite::Spectral => spectral(opts, tol),
        Suite::All => {
            let mut rows = Vec::new();
            for s in [Suite::Identities, Suite::Widths, Suite::Bubbles, Suite::Spectral] {
                rows.extend(run_suite(s, opts, tol)?);
            }
            Ok(rows)
        }
    }
}

/// Largest `|Sc + n/(n-1) h² + 2h' - Sc_N/φ²|` over `points` samples of the
/// default interval of `family` in dimension `n`.
pub fn max_identity_residual(family: ModelFamily, n: u32, points: usize) -> Result<f64> {
    let m = family.build_default(n)?;
    let (a, b) = m.domain();
    let mut worst = 0.0_f64;
    for k in 0..points {
        let t = a + (b - a) * k as f64 / (points - 1) as f64;
        worst = worst.max(m.identity_residual(t)?.abs());
    }
    Ok(worst)
}

fn identities(tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut c = Checks {
        suite: "identities",
        rows: Vec::new(),
    };
    for family in ModelFamily::ALL {
        let mut worst = 0.0_f64;
        for n in 2..=7 {
            worst = worst.max(max_identity_residual(family, n, 10_000)?);
        }
        c.push(
            format!("identity:{}", family.name()),
            worst < tol.identity,
            format!("max residual {worst:.3e} for n = 2..7"),
        );
    }
    Ok(c.rows)
}

fn torus_bound(n: u32, sigma: f64) -> f64 {
    2.0 * PI * ((n as f64 - 1.0) / (sigma * n as f64)).sqrt()
}

fn widths(opts: VerifyOptions, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut c = Checks {
        suite: "widths",
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for n in 3..=7u32 {
        let p = ComparisonProblem::new(n, (n * (n - 1)) as f64, -1e6, -1e6)?;
        let w = width_bound(&p)?.width();
        let target = TAU / n as f64;
        let ok = w.is_some_and(|w| w <= target && w >= target - 1e-4);
        c.push(format!("sphere:n={n}"), ok, format!("width {w:?}, 2π/n = {target:.10}"));
    }

    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=8u32);
        let sigma = rng.random_range(0.5..60.0);
        let p = ComparisonProblem::new(n, sigma, f64::NEG_INFINITY, f64::NEG_INFINITY)?;
        let rel = match width_bound(&p)?.width() {
            Some(w) => (w - torus_bound(n, sigma)).abs() / torus_bound(n, sigma),
            None => f64::INFINITY,
        };
        worst = worst.max(rel);
    }
    c.push(
        "torus-bound",
        worst < 1e-4,
        format!("max relative error {worst:.3e} over 20 instances"),
    );

    for family in [WidthFamily::Cos, WidthFamily::Power, WidthFamily::Sinh] {
        let (mut compared, mut worst, mut mismatched) = (0, 0.0_f64, 0);
        for _ in 0..70 {
            let n = rng.random_range(2..=7u32);
            let sigma = match family {
                WidthFamily::Cos => rng.random_range(0.5..50.0),
                WidthFamily::Power => 0.0,
                WidthFamily::Sinh => -rng.random_range(0.5..50.0),
            };
            let p = ComparisonProblem::new(n, sigma, rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))?;
            match (width_bound(&p)?.kind, closed_form_width(family, &p)) {
                (WidthKind::Finite { width }, Ok(w)) => {
                    compared += 1;
                    worst = worst.max((width - w).abs());
                }
                (WidthKind::Finite { .. }, Err(_)) | (_, Ok(_)) => mismatched += 1,
                (_, Err(_)) => {}
            }
        }
        c.push(
            format!("closed-form:{family:?}").to_lowercase(),
            mismatched == 0 && worst < tol.width,
            format!("{compared} finite widths, max difference {worst:.3e}, {mismatched} verdict mismatches"),
        );
    }

    let mut worst = 0.0_f64;
    for n in 2..=7u32 {
        for k in 1..=4 {
            let hp = (n - 1) as f64 * (1.0 + 0.5 * k as f64);
            let closed = hyperbolic_corollary_width(n, hp)?;
            let p = ComparisonProblem::new(n, -((n * (n - 1)) as f64), f64::NEG_INFINITY, hp)?;
            worst = worst.max(width_bound(&p)?.width().map_or(f64::INFINITY, |w| (w - closed).abs()));
        }
    }
    c.push(
        "hyperbolic-corollary",
        worst < tol.width,
        format!("max difference {worst:.3e}"),
    );

    let mut worst = 0.0_f64;
    let mut kinds_differ = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=7u32);
        let p = ComparisonProblem::new(
            n,
            rng.random_range(-20.0..20.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        )?;
        let lambda = rng.random_range(0.2..5.0);
        let (a, b) = (width_bound(&p)?, width_bound(&scaling_transform(&p, lambda)?)?);
        match (a.width(), b.width()) {
            (Some(x), Some(y)) if x > 0.0 => worst = worst.max((y - lambda * x).abs() / (lambda * x)),
            (Some(_), Some(_)) => {}
            _ if std::mem::discriminant(&a.kind) == std::mem::discriminant(&b.kind) => {}
            _ => kinds_differ += 1,
        }
    }
    c.push(
        "scaling",
        kinds_differ == 0 && worst < tol.width,
        format!("max relative error {worst:.3e}, {kinds_differ} verdict changes over 100 instances"),
    );

    let wrong = ode_instances(&mut rng, 200)?;
    c.push(
        "ode-comparison",
        wrong == 0,
        format!("{wrong} incorrect verdicts over 200 instances"),
    );
    Ok(c.rows)
}

/// Exact tan or coth solution of the extremal ODE through `h(0) = h0`.
pub fn exact_profile(n: u32, sigma: f64, h0: f64) -> impl Fn(f64) -> f64 {
    let c = n as f64 / (n as f64 - 1.0);
    let k = (sigma.abs() / c).sqrt();
    let w = c * k / 2.0;
    move |t: f64| {
        if sigma > 0.0 {
            -k * (w * t - (h0 / k).atan()).tan()
        } else {
            let s = 0.5 * ((h0 / k + 1.0) / (h0 / k - 1.0)).ln() / w;
            k / (w * (t + s)).tanh()
        }
    }
}

/// Runs `count` equality and violation instances of the comparison check
/// at `tol = 10·step²` and returns the number of wrong verdicts.
pub fn ode_instances(rng: &mut ChaCha8Rng, count: usize) -> Result<usize> {
    let mut wrong = 0;
    for k in 0..count {
        let n = rng.random_range(2..=7u32);
        let sigma: f64 = if rng.random_bool(0.5) {
            rng.random_range(0.5..10.0)
        } else {
            -rng.random_range(0.5..10.0)
        };
        let c = n as f64 / (n as f64 - 1.0);
        let kk = (sigma.abs() / c).sqrt();
        let h0 = if sigma > 0.0 {
            rng.random_range(-1.0..1.0) * kk
        } else {
            kk * rng.random_range(1.5..3.0)
        };
        let w = c * kk / 2.0;
        let len = if sigma > 0.0 {
            rng.random_range(0.05..0.2_f64)
                .min((FRAC_PI_2 - 0.3 + (h0 / kk).atan()) / w)
        } else {
            rng.random_range(0.05..0.2)
        };
        let points = 801;
        let step = len / (points - 1) as f64;
        let tol = 10.0 * step * step;
        let f = exact_profile(n, sigma, h0);
        let h2 = SampledProfile::from_fn(0.0, len, points, &f)?;
        let delta = 0.05 * (1.0 + h0.abs());
        let (h1, expected) = match k % 4 {
            0 => (h2.clone(), None),
            1 => (
                SampledProfile::from_fn(0.0, len, points, |t| f(t) + delta)?,
                Some(ComparisonCondition::BoundaryStart),
            ),
            2 => (
                SampledProfile::from_fn(0.0, len, points, |t| f(t) - delta * t / len)?,
                Some(ComparisonCondition::BoundaryEnd),
            ),
            _ => (
                SampledProfile::from_fn(0.0, len, points, |t| f(t) - delta * (PI * t / len).sin().powi(2))?,
                Some(ComparisonCondition::Differential),
            ),
        };
        let verdict = ode_comparison_check(&h1, &h2, n, tol)?;
        let correct = match (expected, verdict) {
            (None, OdeVerdict::HypothesesHoldAndEqual) => true,
            (Some(which), OdeVerdict::HypothesesViolated { which: got, .. }) => which == got,
            _ => false,
        };
        wrong += usize::from(!correct);
    }
    Ok(wrong)
}

/// Cell metric with random positive definite coefficients.
pub fn random_metric(rng: &mut ChaCha8Rng) -> CellMetric {
    let g11: f64 = rng.random_range(0.3..2.0);
    let g22: f64 = rng.random_range(0.3..2.0);
    let g12 = rng.random_range(-0.45..0.45) * (g11 * g22).sqrt();
    CellMetric::new(g11, g12, g22)
}

pub fn random_band(rng: &mut ChaCha8Rng, nu: usize, nv: usize, topology: Topology) -> Result<DiscreteBand> {
    let cells = (0..nu * nv).map(|_| random_metric(rng)).collect();
    Ok(DiscreteBand::from_cells(nu, nv, topology, cells)?)
}

pub fn random_field(rng: &mut ChaCha8Rng, band: &DiscreteBand, scale: f64) -> Result<PrescriptionField> {
    Ok(PrescriptionField::custom(
        band,
        (0..band.cell_count())
            .map(|_| rng.random_range(-scale..scale))
            .collect(),
    )?)
}

/// A band and prescription that depend on the row only.
pub fn random_row_instance(rng: &mut ChaCha8Rng, nu: usize, nv: usize) -> Result<(DiscreteBand, PrescriptionField)> {
    let rows: Vec<CellMetric> = (0..nu).map(|_| random_metric(rng)).collect();
    let hrow: Vec<f64> = (0..nu).map(|_| rng.random_range(-2.0..2.0)).collect();
    let band = DiscreteBand::from_cells(nu, nv, Topology::Cylinder, (0..nu * nv).map(|c| rows[c / nv]).collect())?;
    let h = PrescriptionField::custom(&band, (0..nu * nv).map(|c| hrow[c / nv]).collect())?;
    Ok((band, h))
}

fn bubbles(opts: VerifyOptions, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut c = Checks {
        suite: "bubbles",
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shapes: Vec<(usize, usize)> = (2..=opts.max_cells)
        .flat_map(|nu| (3..=4).map(move |nv| (nu, nv)))
        .filter(|&(nu, nv)| nu * nv <= opts.max_cells && (nu - 2) * nv <= MAX_FREE_CELLS)
        .collect();
    if shapes.is_empty() {
        return Err(CliError::Argument(format!(
            "--max-cells {} leaves no band to enumerate",
            opts.max_cells
        )));
    }

    let (mut worst, mut failures) = (0.0_f64, 0);
    for trial in 0..30 {
        let (nu, nv) = shapes[rng.random_range(0..shapes.len())];
        let topology = if trial % 2 == 0 {
            Topology::Cylinder
        } else {
            Topology::Rectangle
        };
        let band = random_band(&mut rng, nu, nv, topology)?;
        let h = random_field(&mut rng, &band, 3.0)?;
        for stencil in [Stencil::Axis, Stencil::Crofton] {
            let rep = minimize_with(&band, &h, stencil)?;
            let best = exhaustive_minimum(&band, |r| Ok(functional(&band, r, &h, stencil)?))?;
            worst = worst.max((rep.value - best).abs() / (1.0 + best.abs()));
            failures += usize::from(!tol.same_cut(rep.value, best) || !rep.region.separates(&band));
        }
    }
    c.push(
        "exhaustive",
        failures == 0,
        format!("60 solves up to {} cells, max relative gap {worst:.3e}", opts.max_cells),
    );

    let (mut worst, mut failures) = (0.0_f64, 0);
    for _ in 0..15 {
        let (nu, nv) = shapes[rng.random_range(0..shapes.len())];
        let band = random_band(&mut rng, nu, nv, Topology::Cylinder)?;
        let h = random_field(&mut rng, &band, 2.0)?;
        let u = WeightField::new(
            &band,
            (0..band.cell_count()).map(|_| rng.random_range(0.2..3.0)).collect(),
        )?;
        let anchor = Region::lower_rows(&band, 1)?;
        let rep = minimize_warped(&band, &u, &h, &anchor)?;
        let best = exhaustive_minimum(&band, |r| {
            Ok(warped_functional(&band, r, &u, &h, &anchor, Stencil::Crofton)?)
        })?;
        worst = worst.max((rep.value - best).abs() / (1.0 + best.abs()));
        failures += usize::from(!tol.same_cut(rep.value, best));
    }
    c.push(
        "exhaustive-warped",
        failures == 0,
        format!("15 weighted solves, max relative gap {worst:.3e}"),
    );

    let (mut worst, mut failures) = (0.0_f64, 0);
    for _ in 0..5 {
        let (band, h) = random_row_instance(&mut rng, 64, 8)?;
        for stencil in [Stencil::Axis, Stencil::Crofton] {
            let rep = minimize_with(&band, &h, stencil)?;
            let best = row_oracle(&band, &h, None, stencil)?;
            worst = worst.max((rep.value - best).abs() / (1.0 + best.abs()));
            failures += usize::from(!tol.same_cut(rep.value, best));
        }
    }
    c.push(
        "rows-64x8",
        failures == 0,
        format!("10 solves, max relative gap {worst:.3e}"),
    );

    let band = build_flat_cylinder(2.0, 1.0, 16, 16)?;
    let rep = minimize(&band, &PrescriptionField::constant(&band, 0.0)?)?;
    c.push(
        "geodesic-circle",
        (rep.value - TAU).abs() < 1e-9,
        format!("value {} vs 2π", rep.value),
    );

    let band = build_flat_cylinder(2.0, 1.0, 64, 64)?;
    let rep = minimize(&band, &PrescriptionField::tan_profile(&band, 1.6)?)?;
    let heights: Vec<usize> = rep
        .chains
        .iter()
        .flat_map(|ch| ch.vertices.iter().map(|v| v.0))
        .collect();
    let centred = !heights.is_empty() && heights.iter().all(|&i| i.abs_diff(32) <= 2);
    let ok = centred && first_variation_check(&rep, tol.first_variation) && rep.region.separates(&band);
    c.push(
        "tan-bubble",
        ok,
        format!("max |H - h| {:.3e}, rows {:?}", rep.max_residual, minmax(&heights)),
    );
    Ok(c.rows)
}

fn minmax(v: &[usize]) -> Option<(usize, usize)> {
    Some((*v.iter().min()?, *v.iter().max()?))
}

pub fn random_curve(rng: &mut ChaCha8Rng, max_vertices: usize) -> Result<DiscreteClosedCurve> {
    let m = rng.random_range(3..=max_vertices);
    let lengths = (0..m).map(|_| rng.random_range(0.01..0.2)).collect();
    let potential = (0..m).map(|_| rng.random_range(-20.0..20.0)).collect();
    Ok(DiscreteClosedCurve::new(lengths, potential)?)
}

fn spectral(opts: VerifyOptions, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut c = Checks {
        suite: "spectral",
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let r = lambda1(&DiscreteClosedCurve::uniform(256, TAU, |_| 0.0)?)?;
    let verdict = conformal_verdict(&r, Some(tol.spectral_relative * r.operator_norm));
    let ok = r.lambda1.abs() < 1e-8 && (r.lambda2 - 1.0).abs() < 1e-3 && verdict == ConformalVerdict::Zero;
    c.push(
        "circle",
        ok,
        format!(
            "λ1 = {:.3e}, λ2 = {:.8}, verdict {}",
            r.lambda1,
            r.lambda2,
            verdict.name()
        ),
    );

    // Uniform circles with constant potential: λ_k = c + (4/h²) sin²(πk/m).
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let m = rng.random_range(3..=512);
        let len = rng.random_range(0.5..20.0);
        let v = rng.random_range(-5.0..5.0);
        let r = lambda1(&DiscreteClosedCurve::uniform(m, len, |_| v)?)?;
        let h = len / m as f64;
        let l2 = v + 4.0 / (h * h) * (PI / m as f64).sin().powi(2);
        let err = (r.lambda1 - v).abs().max((r.lambda2 - l2).abs()) / r.operator_norm;
        worst = worst.max(err);
    }
    c.push(
        "uniform-spectrum",
        worst < 1e-8,
        format!("max relative error {worst:.3e} over 20 circles"),
    );

    let (mut worst, mut negative) = (0.0_f64, 0);
    for _ in 0..20 {
        let curve = random_curve(&mut rng, 512)?;
        let s = rng.random_range(-10.0..10.0);
        let (a, b) = (lambda1(&curve)?, lambda1(&curve.shifted(s))?);
        worst = worst.max((b.lambda1 - a.lambda1 - s).abs() / a.operator_norm.max(1.0));
        negative += usize::from(a.eigenfunction.iter().any(|p| *p <= 0.0) || a.lambda1 > a.lambda2);
    }
    c.push(
        "shift",
        worst < 1e-8,
        format!("max relative error {worst:.3e} over 20 curves"),
    );
    c.push(
        "eigenfunction-sign",
        negative == 0,
        format!("{negative} reports with a sign change"),
    );
    Ok(c.rows)
}
