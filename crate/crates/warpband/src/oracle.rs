//! Brute-force minima used to certify the cut solver.

use serde::{Deserialize, Serialize};
use warpband_core::band::DiscreteBand;
use warpband_core::bubble::{perimeter, warped_functional, PrescriptionField, Region, Stencil, WeightField};

use crate::error::{CliError, Result};

/// Largest number of free cells [`exhaustive_minimum`] will enumerate.
pub const MAX_FREE_CELLS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Every admissible cell set.
    Exhaustive,
    /// Every union of whole rows. Exact on bands whose metric and
    /// prescription do not depend on the column, an upper bound otherwise.
    ExhaustiveMonotone,
}

impl std::str::FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exhaustive" => Ok(OracleKind::Exhaustive),
            "exhaustive-monotone" => Ok(OracleKind::ExhaustiveMonotone),
            _ => Err(format!(
                "unknown oracle `{s}`, expected exhaustive or exhaustive-monotone"
            )),
        }
    }
}

/// Cells other than the two hard-assigned collar rows.
pub fn free_cells(band: &DiscreteBand) -> usize {
    band.nu().saturating_sub(2) * band.nv()
}

/// Minimum of `f` over every region containing the first row and avoiding
/// the last.
pub fn exhaustive_minimum(band: &DiscreteBand, f: impl Fn(&Region) -> Result<f64>) -> Result<f64> {
    let free = free_cells(band);
    if free > MAX_FREE_CELLS {
        return Err(CliError::Argument(format!(
            "exhaustive oracle limited to {MAX_FREE_CELLS} free cells, band has {free}"
        )));
    }
    let (nu, nv) = (band.nu(), band.nv());
    let mut best = f64::INFINITY;
    for bits in 0..1u64 << free {
        let r = Region::from_fn(band, |i, j| {
            i == 0 || (i + 1 < nu && bits >> ((i - 1) * nv + j) & 1 == 1)
        })?;
        best = best.min(f(&r)?);
    }
    Ok(best)
}

/// Minimum of `Σ_{interfaces crossed} cut[i] - Σ_{rows inside} bulk[i]` over
/// unions of rows containing row 0 and not the last row. `cut[i]` is the
/// weight of the interface below row `i`.
pub fn row_minimum(bulk: &[f64], cut: &[f64]) -> f64 {
    let nu = bulk.len();
    let (mut inside, mut outside) = (-bulk[0], f64::INFINITY);
    for i in 1..nu {
        let in_next = if i + 1 < nu {
            inside.min(outside + cut[i]) - bulk[i]
        } else {
            f64::INFINITY
        };
        let out_next = outside.min(inside + cut[i]);
        inside = in_next;
        outside = out_next;
    }
    outside
}

/// Row oracle for the plain functional, or the weighted one when
/// `weights = Some((u, anchor))`.
pub fn row_oracle(
    band: &DiscreteBand,
    h: &PrescriptionField,
    weights: Option<(&WeightField, &Region)>,
    stencil: Stencil,
) -> Result<f64> {
    let (nu, nv) = (band.nu(), band.nv());
    let u = |c: usize| weights.map_or(1.0, |(w, _)| w.values[c]);
    let density = |c: usize| h.values[c] * u(c) * band.cell_area(c);
    let bulk: Vec<f64> = (0..nu).map(|i| (0..nv).map(|j| density(i * nv + j)).sum()).collect();
    let zero = PrescriptionField::constant(band, 0.0)?;
    let mut cut = vec![0.0; nu];
    for (i, c) in cut.iter_mut().enumerate().skip(1) {
        let r = Region::lower_rows(band, i)?;
        *c = match weights {
            None => perimeter(band, &r, stencil),
            Some((w, _)) => warped_functional(band, &r, w, &zero, &r, stencil)?,
        };
    }
    let offset = match weights {
        None => 0.0,
        Some((_, anchor)) => (0..band.cell_count())
            .filter(|&c| anchor.contains(c))
            .map(density)
            .sum(),
    };
    Ok(row_minimum(&bulk, &cut) + offset)
}
