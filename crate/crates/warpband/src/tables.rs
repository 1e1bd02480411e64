//! CSV tables written and read by the command line.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One sample of a curvature profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub phi: f64,
    pub h: f64,
    pub scalar: f64,
    pub identity_residual: f64,
}

/// Input samples of a warping function on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpSampleRow {
    pub t: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiRow {
    pub t: f64,
    pub h: f64,
}

/// Plot data: band outline, bubble boundary and prescription contours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub tag: String,
}

/// Input segments of a closed curve for the spectrum command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub length: f64,
    pub potential: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub vertex: usize,
    pub length: f64,
    pub potential: f64,
    pub psi: f64,
}

/// One vertex of a bubble boundary chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub chain: usize,
    pub i: usize,
    pub j: usize,
    pub mass: f64,
    pub curvature: f64,
    pub h: f64,
    pub residual: f64,
    pub in_collar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub first: String,
    pub second: String,
    pub verdict: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Argument(format!("cannot encode CSV row: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Argument(format!("cannot encode CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn from_csv<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| CliError::format(origin, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    from_csv(&text, path)
}
