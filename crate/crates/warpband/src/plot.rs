//! Plot data in index coordinates: `x` runs along the columns, `y` along
//! the rows from `∂₋` to `∂₊`.

use warpband_core::band::DiscreteBand;
use warpband_core::bubble::{MinimizerReport, PrescriptionField, PRESCRIPTION_CLAMP};

use crate::tables::PlotRow;

fn row(x: f64, y: f64, tag: &str) -> PlotRow {
    PlotRow {
        x,
        y,
        tag: tag.to_string(),
    }
}

pub fn outline(band: &DiscreteBand) -> Vec<PlotRow> {
    let (nu, nv) = (band.nu() as f64, band.nv() as f64);
    [(0.0, 0.0), (nv, 0.0), (nv, nu), (0.0, nu), (0.0, 0.0)]
        .iter()
        .map(|&(x, y)| row(x, y, "outline"))
        .collect()
}

/// One polyline per boundary chain, tagged `bubble:<k>`; closed chains
/// repeat their first vertex.
pub fn bubble_curves(rep: &MinimizerReport) -> Vec<PlotRow> {
    let mut out = Vec::new();
    for (k, chain) in rep.chains.iter().enumerate() {
        let tag = format!("bubble:{k}");
        let first = chain.closed.then(|| chain.vertices.first()).flatten();
        for &(i, j) in chain.vertices.iter().chain(first) {
            out.push(row(j as f64, i as f64, &tag));
        }
    }
    out
}

/// Points where the prescription, linearly interpolated between cell
/// centres of a column, crosses its quartiles. Tagged `h=<level>`.
pub fn h_contours(band: &DiscreteBand, h: &PrescriptionField) -> Vec<PlotRow> {
    let mut finite: Vec<f64> = h
        .values
        .iter()
        .copied()
        .filter(|v| v.abs() < PRESCRIPTION_CLAMP)
        .collect();
    if finite.is_empty() {
        return Vec::new();
    }
    finite.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|q| finite[(q * (finite.len() - 1) as f64) as usize])
        .collect();
    levels.dedup();
    let nv = band.nv();
    let mut out = Vec::new();
    for level in levels {
        let tag = format!("h={level}");
        for j in 0..nv {
            for i in 0..band.nu() - 1 {
                let (a, b) = (h.values[i * nv + j], h.values[(i + 1) * nv + j]);
                if (a - level) * (b - level) < 0.0 || (a == level && b != level) {
                    let s = (level - a) / (b - a);
                    out.push(row(j as f64 + 0.5, i as f64 + 0.5 + s, &tag));
                }
            }
        }
    }
    out
}

pub fn bubble_plot(band: &DiscreteBand, rep: &MinimizerReport, h: &PrescriptionField) -> Vec<PlotRow> {
    let mut rows = outline(band);
    rows.extend(bubble_curves(rep));
    rows.extend(h_contours(band, h));
    rows
}
