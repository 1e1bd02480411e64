//! Plain-text band files.
//!
//! ```text
//! # comments and blank lines are ignored
//! band <nu> <nv> <cylinder|rectangle>
//! <g11> <g12> <g22>      one line per cell, row by row
//! ```

use std::fmt::Write as _;
use std::path::Path;

use warpband_core::band::{CellMetric, DiscreteBand, Topology};

use crate::error::{CliError, Result};

pub fn topology_from_name(name: &str) -> Option<Topology> {
    match name {
        "cylinder" => Some(Topology::Cylinder),
        "rectangle" => Some(Topology::Rectangle),
        _ => None,
    }
}

pub fn format_band(band: &DiscreteBand) -> String {
    let mut out = format!("band {} {} {}\n", band.nu(), band.nv(), band.topology().name());
    for g in band.cells() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", g.g11, g.g12, g.g22).expect("writing to a string");
    }
    out
}

pub fn parse_band(text: &str, origin: &Path) -> Result<DiscreteBand> {
    let err = |line: usize, msg: String| CliError::format(origin, format!("line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (k, header) = lines
        .next()
        .ok_or_else(|| CliError::format(origin, "empty band file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [tag, nu, nv, topology] = fields[..] else {
        return Err(err(k, "expected `band <nu> <nv> <topology>`".into()));
    };
    if tag != "band" {
        return Err(err(k, format!("expected `band`, found `{tag}`")));
    }
    let nu: usize = nu.parse().map_err(|e| err(k, format!("bad row count: {e}")))?;
    let nv: usize = nv.parse().map_err(|e| err(k, format!("bad column count: {e}")))?;
    let topology = topology_from_name(topology).ok_or_else(|| err(k, format!("unknown topology `{topology}`")))?;
    let mut cells = Vec::with_capacity(nu.saturating_mul(nv).min(1 << 24));
    for (k, line) in lines {
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| err(k, format!("bad number: {e}")))?;
        let [g11, g12, g22] = values[..] else {
            return Err(err(
                k,
                format!("expected 3 metric coefficients, found {}", values.len()),
            ));
        };
        cells.push(CellMetric::new(g11, g12, g22));
    }
    if cells.len() != nu * nv {
        return Err(CliError::format(
            origin,
            format!("expected {} cells, found {}", nu * nv, cells.len()),
        ));
    }
    DiscreteBand::from_cells(nu, nv, topology, cells).map_err(|e| CliError::format(origin, e))
}

pub fn read_band(path: &Path) -> Result<DiscreteBand> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_band(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use warpband_core::band::build_flat_cylinder;

    #[test]
    fn round_trip_is_exact() {
        let cells = (0..12)
            .map(|k| CellMetric::new(1.0 + k as f64 / 7.0, 0.1 / 3.0, 2.0))
            .collect();
        let band = DiscreteBand::from_cells(4, 3, Topology::Rectangle, cells).unwrap();
        let back = parse_band(&format_band(&band), Path::new("mem")).unwrap();
        assert_eq!(back, band);
        let cyl = build_flat_cylinder(2.0, 1.0, 8, 8).unwrap();
        assert_eq!(parse_band(&format_band(&cyl), Path::new("mem")).unwrap(), cyl);
    }

    #[test]
    fn comments_and_errors() {
        let text = "# demo\nband 2 3 cylinder\n1 0 1\n1 0 1 # cell\n1 0 1\n\n1 0 1\n1 0 1\n1 0 1\n";
        assert_eq!(parse_band(text, Path::new("x")).unwrap().cell_count(), 6);
        assert!(parse_band("band 2 3 torus\n", Path::new("x")).is_err());
        assert!(parse_band("band 1 1 rectangle\n1 0\n", Path::new("x")).is_err());
        assert!(parse_band("band 1 2 rectangle\n1 0 1\n", Path::new("x")).is_err());
        assert!(parse_band("", Path::new("x")).is_err());
    }
}
