//! Parameter sweeps of [`width_bound`] over a grid of comparison problems.

use alloc::{format, string::String, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::riccati::{width_bound, ComparisonProblem, WidthKind};
use crate::{Error, Result};

/// Inclusive linear range with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Range {
    pub fn single(x: f64) -> Self {
        Range {
            start: x,
            end: x,
            count: 1,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Argument("ranges need at least one point".into()));
        }
        if self.start.is_nan() || self.end.is_nan() {
            return Err(Error::Argument("range bounds must not be NaN".into()));
        }
        if self.count == 1 {
            return Ok(alloc::vec![self.start]);
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.end
                } else {
                    self.start + step * k as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: Vec<u32>,
    pub sigma: Range,
    pub h_minus: Range,
    pub h_plus: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub sigma: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// `"finite"`, `"infinite"`, `"infeasible"` or `"error"`.
    pub verdict: String,
    pub width: Option<f64>,
}

/// All grid points in `n`, `σ`, `H₋`, `H₊` order.
pub fn sweep_points(spec: &SweepSpec) -> Result<Vec<ComparisonProblem>> {
    let sigma = spec.sigma.points()?;
    let hm = spec.h_minus.points()?;
    let hp = spec.h_plus.points()?;
    let mut out = Vec::with_capacity(spec.n.len() * sigma.len() * hm.len() * hp.len());
    for &n in &spec.n {
        for &s in &sigma {
            for &a in &hm {
                for &b in &hp {
                    out.push(ComparisonProblem::new(n, s, a, b)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn sweep_row(p: &ComparisonProblem) -> SweepRow {
    let (verdict, width) = match width_bound(p) {
        Ok(v) => match v.kind {
            WidthKind::Finite { width } => ("finite".into(), Some(width)),
            WidthKind::Infinite => ("infinite".into(), None),
            WidthKind::Infeasible => ("infeasible".into(), None),
        },
        Err(e) => (format!("error: {e}"), None),
    };
    SweepRow {
        n: p.n,
        sigma: p.sigma,
        h_minus: p.h_minus,
        h_plus: p.h_plus,
        verdict,
        width,
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    Ok(sweep_points(spec)?.iter().map(sweep_row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_and_size() {
        let spec = SweepSpec {
            n: alloc::vec![3, 4],
            sigma: Range {
                start: 1.0,
                end: 2.0,
                count: 3,
            },
            h_minus: Range::single(0.0),
            h_plus: Range {
                start: -1.0,
                end: 0.0,
                count: 2,
            },
        };
        let pts = sweep_points(&spec).unwrap();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0].n, 3);
        assert_eq!(pts[11].sigma, 2.0);
        let rows = run_sweep(&spec).unwrap();
        assert!(rows.iter().all(|r| r.verdict == "finite"));
    }
}
