//! The commands behind the binary. Each returns an [`Outcome`]: a JSON
//! payload, a CSV rendering, optional side tables, warnings and failed
//! verification checks.

use std::path::PathBuf;

use serde::Serialize;
use warpband_core::band::{structural_check, Curve, DiscreteBand, NormalSide, Topology};
use warpband_core::bubble::{
    first_variation_check, functional, minimize_warped_with, minimize_with, warped_functional, MinimizerReport,
    PrescriptionField, Region, Stencil, WeightField,
};
use warpband_core::riccati::{
    closed_form_width, compare_warped_products, extremal_profile, width_bound, CompareVerdict, ComparisonProblem,
    WidthFamily, WidthVerdict,
};
use warpband_core::spectral::{conformal_verdict, lambda1, stability_pipeline, DiscreteClosedCurve, SpectrumReport};
use warpband_core::sweep::{sweep_points, sweep_row, SweepRow, SweepSpec};
use warpband_core::warp::{default_log_concavity_tol, LogConcavity, ModelFamily};

use crate::config::Tolerances;
use crate::error::{CliError, Result};
use crate::oracle::{exhaustive_minimum, row_oracle, OracleKind};
use crate::plot::bubble_plot;
use crate::syntax::{
    build_prescription, AnchorSpec, BandSpec, MapSpec, ModelSpec, PotentialSpec, PrescriptionSpec, WeightSpec,
};
use crate::tables::{read_csv, to_csv, CheckRow, CompareRow, CurveRow, EigenRow, NodeRow, ProfileRow, RiccatiRow};
use crate::verify::{run_suite, Suite, VerifyOptions};

/// A side table requested on the command line, with an optional explicit
/// destination.
#[derive(Debug, Clone, PartialEq)]
pub struct SideTable {
    pub kind: &'static str,
    pub path: Option<PathBuf>,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payload: serde_json::Value,
    pub csv: String,
    pub side: Vec<SideTable>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(payload: &impl Serialize, csv: String) -> Result<Self> {
        let payload =
            serde_json::to_value(payload).map_err(|e| CliError::Argument(format!("cannot encode payload: {e}")))?;
        Ok(Outcome {
            payload,
            csv,
            side: Vec::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelPayload {
    pub family: ModelFamily,
    pub n: u32,
    pub l_minus: f64,
    pub l_plus: f64,
    pub width: f64,
    pub base_scalar: f64,
    pub scalar_curvature: f64,
    pub classification: LogConcavity,
    pub is_model_space: bool,
    pub h_minus: f64,
    pub h_plus: f64,
    pub samples: usize,
    pub max_identity_residual: f64,
}

pub fn model(
    family: ModelFamily,
    n: u32,
    l_minus: Option<f64>,
    l_plus: Option<f64>,
    samples: usize,
    emit_profile: Option<Option<PathBuf>>,
    tol: &Tolerances,
) -> Result<Outcome> {
    let (da, db) = family.default_interval(n);
    let spec = ModelSpec {
        family,
        n,
        interval: Some((l_minus.unwrap_or(da), l_plus.unwrap_or(db))),
    };
    let m = spec.build()?;
    let p = m.profile(samples)?;
    let rows: Vec<ProfileRow> = (0..p.t.len())
        .map(|k| ProfileRow {
            t: p.t[k],
            phi: p.warp[k],
            h: p.mean[k],
            scalar: p.scalar[k],
            identity_residual: p.identity_residual[k],
        })
        .collect();
    let max_identity_residual = p.identity_residual.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    let (a, b) = m.domain();
    let payload = ModelPayload {
        family,
        n,
        l_minus: a,
        l_plus: b,
        width: m.width(),
        base_scalar: m.base_scalar(),
        scalar_curvature: family.scalar_curvature(n),
        classification: m.classify(default_log_concavity_tol(m.warp())),
        is_model_space: m.is_model_space(1e-8)?,
        h_minus: p.h_minus,
        h_plus: p.h_plus,
        samples,
        max_identity_residual,
    };
    let csv = to_csv(&rows)?;
    let mut out = Outcome::new(&payload, csv.clone())?;
    if let Some(path) = emit_profile {
        out.side.push(SideTable {
            kind: "profile",
            path,
            contents: csv,
        });
    }
    if max_identity_residual >= tol.identity {
        out.failures
            .push(format!("curvature identity residual {max_identity_residual:e}"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WidthPayload {
    pub problem: ComparisonProblem,
    pub verdict: WidthVerdict,
    pub closed_form_family: WidthFamily,
    pub closed_form: Option<f64>,
    /// `2π√((n-1)/(σn))` for `σ > 0`.
    pub torus_bound: Option<f64>,
}

pub fn width(
    p: ComparisonProblem,
    samples: usize,
    horizon: f64,
    emit_profile: Option<Option<PathBuf>>,
    tol: &Tolerances,
) -> Result<Outcome> {
    let verdict = width_bound(&p)?;
    let family = WidthFamily::for_sigma(p.sigma);
    let closed_form = closed_form_width(family, &p).ok();
    let torus_bound =
        (p.sigma > 0.0).then(|| std::f64::consts::TAU * ((p.n as f64 - 1.0) / (p.sigma * p.n as f64)).sqrt());
    let mut out = Outcome::new(
        &WidthPayload {
            problem: p,
            verdict: verdict.clone(),
            closed_form_family: family,
            closed_form,
            torus_bound,
        },
        to_csv(&[sweep_row(&p)])?,
    )?;
    match (verdict.width(), closed_form) {
        (Some(w), Some(c)) if (w - c).abs() > tol.width => out
            .failures
            .push(format!("integrated width {w} and closed form {c} differ")),
        (Some(w), None) => out.warnings.push(format!("no closed form for finite width {w}")),
        (None, Some(c)) => out.failures.push(format!("closed form {c} for a non-finite verdict")),
        _ => {}
    }
    if let Some(path) = emit_profile {
        let sol = extremal_profile(&p, samples, horizon)?;
        let rows: Vec<RiccatiRow> = sol.t.iter().zip(&sol.h).map(|(&t, &h)| RiccatiRow { t, h }).collect();
        out.side.push(SideTable {
            kind: "profile",
            path,
            contents: to_csv(&rows)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPayload {
    pub spec: SweepSpec,
    pub points: usize,
    pub rows: Vec<SweepRow>,
}

/// Evaluates every grid point of `spec` on `jobs` threads. Rows come back in
/// grid order whatever the thread count.
pub fn sweep(spec: SweepSpec, jobs: usize) -> Result<Outcome> {
    if jobs == 0 {
        return Err(CliError::Argument("--jobs must be at least 1".into()));
    }
    let points = sweep_points(&spec)?;
    let chunk = points.len().div_ceil(jobs).max(1);
    let rows: Vec<SweepRow> = std::thread::scope(|s| {
        let workers: Vec<_> = points
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(sweep_row).collect::<Vec<_>>()))
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("sweep worker panicked"))
            .collect()
    });
    let csv = to_csv(&rows)?;
    let mut out = Outcome::new(
        &SweepPayload {
            spec,
            points: rows.len(),
            rows: rows.clone(),
        },
        csv,
    )?;
    for r in rows.iter().filter(|r| r.verdict.starts_with("error")) {
        out.warnings
            .push(format!("n = {}, sigma = {}: {}", r.n, r.sigma, r.verdict));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparePayload {
    pub first: String,
    pub second: String,
    pub verdict: CompareVerdict,
}

pub fn compare(first: &ModelSpec, second: &ModelSpec) -> Result<Outcome> {
    let verdict = compare_warped_products(&first.build()?, &second.build()?)?;
    let (name, detail) = match &verdict {
        CompareVerdict::EqualityForced { case, max_deviation } => {
            ("equality_forced", format!("{case:?}, max deviation {max_deviation:e}"))
        }
        CompareVerdict::HypothesisFails { which, detail } => ("hypothesis_fails", format!("{which:?}: {detail}")),
    };
    let row = CompareRow {
        first: first.to_string(),
        second: second.to_string(),
        verdict: name.into(),
        detail,
    };
    Outcome::new(
        &ComparePayload {
            first: row.first.clone(),
            second: row.second.clone(),
            verdict,
        },
        to_csv(&[row])?,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumPayload {
    pub source: String,
    pub vertices: usize,
    pub total_length: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub residual: f64,
    pub operator_norm: f64,
    pub tolerance: f64,
    pub verdict: &'static str,
    pub eigenfunction: Vec<f64>,
}

pub enum CurveSource {
    File(PathBuf),
    Uniform {
        vertices: usize,
        circumference: f64,
        potential: PotentialSpec,
    },
}

pub fn spectrum(source: &CurveSource, tol: Option<f64>, rel: f64) -> Result<Outcome> {
    let (curve, name) = match source {
        CurveSource::File(path) => {
            let rows: Vec<CurveRow> = read_csv(path)?;
            let curve = DiscreteClosedCurve::new(
                rows.iter().map(|r| r.length).collect(),
                rows.iter().map(|r| r.potential).collect(),
            )
            .map_err(|e| CliError::format(path, e))?;
            (curve, format!("file:{}", path.display()))
        }
        CurveSource::Uniform {
            vertices,
            circumference,
            potential,
        } => (
            DiscreteClosedCurve::uniform(*vertices, *circumference, |a| potential.eval(a))?,
            format!("uniform:{vertices},{circumference},{potential}"),
        ),
    };
    let r = lambda1(&curve)?;
    let tolerance = tol.unwrap_or(rel * r.operator_norm);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CliError::Argument(format!(
            "verdict tolerance must be positive, got {tolerance}"
        )));
    }
    let verdict = conformal_verdict(&r, Some(tolerance)).name();
    let rows: Vec<EigenRow> = (0..curve.len())
        .map(|k| EigenRow {
            vertex: k,
            length: curve.lengths()[k],
            potential: curve.potential()[k],
            psi: r.eigenfunction[k],
        })
        .collect();
    let payload = SpectrumPayload {
        source: name,
        vertices: curve.len(),
        total_length: curve.total_length(),
        lambda1: r.lambda1,
        lambda2: r.lambda2,
        residual: r.residual,
        operator_norm: r.operator_norm,
        tolerance,
        verdict,
        eigenfunction: r.eigenfunction,
    };
    Outcome::new(&payload, to_csv(&rows)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSummary {
    pub spec: String,
    pub nu: usize,
    pub nv: usize,
    pub topology: &'static str,
    pub width: f64,
    pub area: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub closed: bool,
    pub vertices: Vec<(usize, usize)>,
    pub length: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySummary {
    pub chain: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub residual: f64,
    pub verdict: &'static str,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralSummary {
    pub holds: bool,
    pub min_margin: f64,
    pub tolerance: f64,
    pub curves_checked: usize,
    pub segments_checked: usize,
    pub segments_skipped: usize,
    pub map: String,
    pub lipschitz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub kind: OracleKind,
    pub value: f64,
    /// Whether the oracle minimum is exact for this instance or only an
    /// upper bound.
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubblePayload {
    pub band: BandSummary,
    pub prescription: String,
    pub weight: Option<String>,
    pub anchor: Option<String>,
    pub stencil: Stencil,
    pub value: f64,
    pub flow_value: f64,
    /// Per row, alternating run lengths starting with cells outside.
    pub region_rows: Vec<Vec<usize>>,
    pub region_cells: usize,
    pub chains: Vec<ChainSummary>,
    pub max_residual: f64,
    pub second_variation: Vec<(String, f64)>,
    pub structural: Option<StructuralSummary>,
    pub stability: Option<StabilitySummary>,
    pub oracle: Option<OracleSummary>,
    pub checks: Vec<Check>,
}

pub struct BubbleArgs {
    pub band: BandSpec,
    pub h: PrescriptionSpec,
    pub u_field: Option<WeightSpec>,
    pub anchor: AnchorSpec,
    pub map: MapSpec,
    pub stencil: Stencil,
    pub oracle: Option<OracleKind>,
    pub plot: Option<Option<PathBuf>>,
}

/// Cylinder whose metric and fields depend on the row only, where the row
/// oracle is exact.
fn column_invariant(band: &DiscreteBand, fields: &[&[f64]]) -> bool {
    let nv = band.nv();
    band.topology() == Topology::Cylinder
        && (0..band.cell_count()).all(|c| {
            let first = c - c % nv;
            band.cells()[c] == band.cells()[first] && fields.iter().all(|f| f[c] == f[first])
        })
}

fn run_oracle(
    band: &DiscreteBand,
    h: &PrescriptionField,
    weights: Option<(&WeightField, &Region)>,
    stencil: Stencil,
    kind: OracleKind,
) -> Result<OracleSummary> {
    match kind {
        OracleKind::Exhaustive => {
            let value = exhaustive_minimum(band, |r| {
                Ok(match weights {
                    None => functional(band, r, h, stencil)?,
                    Some((u, anchor)) => warped_functional(band, r, u, h, anchor, stencil)?,
                })
            })?;
            Ok(OracleSummary {
                kind,
                value,
                exact: true,
            })
        }
        OracleKind::ExhaustiveMonotone => {
            let mut fields = vec![h.values.as_slice()];
            if let Some((u, _)) = weights {
                fields.push(u.values.as_slice());
            }
            let exact = column_invariant(band, &fields);
            Ok(OracleSummary {
                kind,
                value: row_oracle(band, h, weights, stencil)?,
                exact,
            })
        }
    }
}

/// A model prescription without an interval on a warped band of the same
/// family and dimension takes the band's interval.
fn inherit_interval(band: &BandSpec, h: &PrescriptionSpec) -> PrescriptionSpec {
    match (band, h) {
        (BandSpec::Warped { model: bm, .. }, PrescriptionSpec::Model(m))
            if m.interval.is_none() && m.family == bm.family && m.n == bm.n =>
        {
            PrescriptionSpec::Model(ModelSpec {
                interval: Some(bm.interval()),
                ..m.clone()
            })
        }
        _ => h.clone(),
    }
}

fn chain_curve(band: &DiscreteBand, rep: &MinimizerReport, k: usize) -> Result<Curve> {
    Ok(Curve::new(band, rep.chains[k].vertices.clone(), NormalSide::Right)?)
}

pub fn bubble(args: &BubbleArgs, tol: &Tolerances) -> Result<Outcome> {
    let band = args.band.build()?;
    let prescription = inherit_interval(&args.band, &args.h);
    let (h, pulled) = build_prescription(&band, &prescription, args.map)?;
    let weights = match args.u_field {
        Some(u) => Some((u.build(&band)?, args.anchor.build(&band)?)),
        None => None,
    };
    let weights_ref = weights.as_ref().map(|(u, a)| (u, a));
    let rep = match weights_ref {
        Some((u, anchor)) => minimize_warped_with(&band, u, &h, anchor, args.stencil)?,
        None => minimize_with(&band, &h, args.stencil)?,
    };
    let step = 1.0 / band.nu() as f64;
    let mut warnings = Vec::new();
    let mut checks = vec![
        Check {
            name: "flow_consistency",
            passed: tol.same_cut(rep.value, rep.flow_value),
            detail: format!("functional {} vs flow {}", rep.value, rep.flow_value),
        },
        Check {
            name: "separation",
            passed: rep.region.separates(&band),
            detail: format!("{} boundary chains", rep.chains.len()),
        },
        Check {
            name: "first_variation",
            passed: first_variation_check(&rep, tol.first_variation),
            detail: format!("max residual {:e}", rep.max_residual),
        },
    ];
    if !rep.second_variation.is_empty() {
        let worst = rep
            .second_variation
            .iter()
            .map(|(_, q)| *q)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check {
            name: "second_variation",
            passed: worst >= -tol.second_variation,
            detail: format!("smallest sample {worst:e}"),
        });
    }

    let (mut structural, mut stability) = (None, None);
    if let Some((model, map)) = &pulled {
        let stol = tol.structural_per_step * step;
        let mut s = StructuralSummary {
            holds: true,
            min_margin: f64::INFINITY,
            tolerance: stol,
            curves_checked: 0,
            segments_checked: 0,
            segments_skipped: 0,
            map: args.map.to_string(),
            lipschitz: map.lipschitz,
        };
        for k in 0..rep.chains.len() {
            match chain_curve(&band, &rep, k).and_then(|c| Ok(structural_check(&band, map, model, &c, stol)?)) {
                Ok(r) => {
                    s.holds &= r.holds;
                    s.min_margin = s.min_margin.min(r.min_margin);
                    s.curves_checked += 1;
                    s.segments_checked += r.segments_checked;
                    s.segments_skipped += r.segments_skipped;
                }
                Err(e) => warnings.push(format!("structural check skipped on chain {k}: {e}")),
            }
        }
        s.holds &= s.curves_checked > 0;
        if !s.holds {
            warnings.push(format!(
                "band map is not structural on {} curves; stability bound not enforced",
                s.curves_checked
            ));
        }
        match stability_pipeline(&band, &rep, model, map) {
            Ok((chain, r)) => {
                let bound = -tol.stability_per_step * step;
                if s.holds {
                    checks.push(Check {
                        name: "stability",
                        passed: r.lambda1 >= bound,
                        detail: format!("lambda1 {:e} against bound {bound:e}", r.lambda1),
                    });
                }
                stability = Some(stability_summary(chain, &r, bound, tol));
            }
            Err(e) => warnings.push(format!("stability spectrum skipped: {e}")),
        }
        structural = Some(s);
    }

    let oracle = match args.oracle {
        Some(kind) => {
            let o = run_oracle(&band, &h, weights_ref, args.stencil, kind)?;
            let passed = if o.exact {
                tol.same_cut(o.value, rep.value)
            } else {
                rep.value <= o.value + tol.cut_relative * (1.0 + o.value.abs())
            };
            if !o.exact {
                warnings.push("band is not column invariant; row oracle is an upper bound".into());
            }
            checks.push(Check {
                name: "oracle",
                passed,
                detail: format!("oracle {} vs cut {}", o.value, rep.value),
            });
            Some(o)
        }
        None => None,
    };

    let chains = rep
        .chains
        .iter()
        .map(|c| ChainSummary {
            closed: c.closed,
            vertices: c.vertices.clone(),
            length: c.segments.iter().map(|s| s.length).sum(),
            max_residual: c
                .nodes
                .iter()
                .filter(|n| !n.in_collar)
                .fold(0.0, |m, n| m.max(n.residual.abs())),
        })
        .collect();
    let nodes: Vec<NodeRow> = rep
        .chains
        .iter()
        .enumerate()
        .flat_map(|(k, c)| {
            c.nodes.iter().map(move |n| NodeRow {
                chain: k,
                i: n.vertex.0,
                j: n.vertex.1,
                mass: n.mass,
                curvature: n.curvature,
                h: n.h,
                residual: n.residual,
                in_collar: n.in_collar,
            })
        })
        .collect();
    let payload = BubblePayload {
        band: BandSummary {
            spec: args.band.to_string(),
            nu: band.nu(),
            nv: band.nv(),
            topology: band.topology().name(),
            width: band.width(),
            area: band.total_area(),
        },
        prescription: prescription.to_string(),
        weight: args.u_field.map(|u| u.to_string()),
        anchor: args.u_field.map(|_| args.anchor.to_string()),
        stencil: args.stencil,
        value: rep.value,
        flow_value: rep.flow_value,
        region_rows: rep.region.run_lengths(&band),
        region_cells: rep.region.len(),
        chains,
        max_residual: rep.max_residual,
        second_variation: rep.second_variation.clone(),
        structural,
        stability,
        oracle,
        checks,
    };
    let mut out = Outcome::new(&payload, to_csv(&nodes)?)?;
    out.failures = payload
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    out.warnings = warnings;
    if let Some(path) = &args.plot {
        out.side.push(SideTable {
            kind: "plot",
            path: path.clone(),
            contents: to_csv(&bubble_plot(&band, &rep, &h))?,
        });
    }
    Ok(out)
}

fn stability_summary(chain: usize, r: &SpectrumReport, bound: f64, tol: &Tolerances) -> StabilitySummary {
    StabilitySummary {
        chain,
        lambda1: r.lambda1,
        lambda2: r.lambda2,
        residual: r.residual,
        verdict: conformal_verdict(r, Some(tol.spectral_relative * r.operator_norm)).name(),
        bound,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyPayload {
    pub suite: Suite,
    pub seed: u64,
    pub max_cells: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckRow>,
}

pub fn verify(suite: Suite, opts: VerifyOptions, tol: &Tolerances) -> Result<Outcome> {
    let checks = run_suite(suite, opts, tol)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let payload = VerifyPayload {
        suite,
        seed: opts.seed,
        max_cells: opts.max_cells,
        passed: checks.len() - failed,
        failed,
        checks: checks.clone(),
    };
    let mut out = Outcome::new(&payload, to_csv(&checks)?)?;
    out.failures = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}/{}: {}", c.suite, c.check, c.detail))
        .collect();
    Ok(out)
}
