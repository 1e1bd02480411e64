//! Smallest eigenvalues of `-Δ + V` on discrete closed curves.
//!
//! With segment lengths `ℓ_k` (node `k` to node `k+1`) and node masses
//! `m_k = (ℓ_{k-1} + ℓ_k)/2` the quadratic form is
//! `Σ (ψ_{k+1} - ψ_k)²/ℓ_k + Σ m_k V_k ψ_k²` against the inner product
//! `Σ m_k ψ_k²`. It is solved in the symmetric form `M^{-1/2} A M^{-1/2}`,
//! a cyclic tridiagonal matrix.
//!
//! Eigenvalues are located by bisection on the inertia of `B - sI`; the
//! first eigenvector comes from inverse iteration with a shift just below
//! `λ₁`, where `B - sI` is positive definite.

use alloc::{format, vec, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::band::{BandMap, DiscreteBand};
use crate::bubble::{pullback_along_chains, MinimizerReport};
use crate::warp::ModelSpace;
use crate::{Error, Result};

/// Relative eigen-residual accepted by [`lambda1`].
pub const RESIDUAL_TOL: f64 = 1e-11;
/// Default verdict tolerance relative to the operator norm.
pub const VERDICT_REL_TOL: f64 = 1e-8;
const MAX_INVERSE_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteClosedCurve {
    lengths: Vec<f64>,
    potential: Vec<f64>,
}

impl DiscreteClosedCurve {
    pub fn new(lengths: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        if lengths.len() < 3 {
            return Err(Error::Argument(format!(
                "closed curves need at least 3 vertices, got {}",
                lengths.len()
            )));
        }
        if lengths.len() != potential.len() {
            return Err(Error::Argument("one potential value per vertex is required".into()));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Argument(format!("segment lengths must be positive, found {l}")));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("potential must be finite".into()));
        }
        Ok(DiscreteClosedCurve { lengths, potential })
    }

    /// `m` equal segments of total length `circumference`, potential sampled
    /// at the vertex angles `2πk/m`.
    pub fn uniform(m: usize, circumference: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let step = core::f64::consts::TAU / m as f64;
        Self::new(
            vec![circumference / m as f64; m],
            (0..m).map(|k| v(step * k as f64)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn masses(&self) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|k| 0.5 * (self.lengths[(k + m - 1) % m] + self.lengths[k]))
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn shifted(&self, c: f64) -> Self {
        DiscreteClosedCurve {
            lengths: self.lengths.clone(),
            potential: self.potential.iter().map(|v| v + c).collect(),
        }
    }

    /// Diagonal and the coupling between `k` and `k+1` of the symmetric
    /// operator.
    pub fn symmetric_operator(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.len();
        let mass = self.masses();
        let diag = (0..m)
            .map(|k| (1.0 / self.lengths[(k + m - 1) % m] + 1.0 / self.lengths[k]) / mass[k] + self.potential[k])
            .collect();
        let off = (0..m)
            .map(|k| -1.0 / (self.lengths[k] * (mass[k] * mass[(k + 1) % m]).sqrt()))
            .collect();
        (diag, off)
    }

    /// Dense symmetric operator, row-major.
    pub fn dense_operator(&self) -> Vec<f64> {
        let m = self.len();
        let (diag, off) = self.symmetric_operator();
        let mut a = vec![0.0; m * m];
        for k in 0..m {
            let l = (k + 1) % m;
            a[k * m + k] += diag[k];
            a[k * m + l] += off[k];
            a[l * m + k] += off[k];
        }
        a
    }

    /// `Σ (ψ_{k+1} - ψ_k)²/ℓ_k + Σ m_k V_k ψ_k²`
    pub fn quadratic_form(&self, psi: &[f64]) -> f64 {
        let m = self.len();
        let mass = self.masses();
        (0..m)
            .map(|k| {
                let d = psi[(k + 1) % m] - psi[k];
                d * d / self.lengths[k] + mass[k] * self.potential[k] * psi[k] * psi[k]
            })
            .sum()
    }
}

/// Cyclic tridiagonal matrix `B - sI` in factored form `L D Lᵀ`, where `L`
/// has a subdiagonal `l` and a dense last row `r`.
struct Factor {
    d: Vec<f64>,
    l: Vec<f64>,
    r: Vec<f64>,
}

impl Factor {
    fn new(diag: &[f64], off: &[f64], s: f64) -> Self {
        let m = diag.len();
        let tiny = f64::MIN_POSITIVE.sqrt();
        let guard = |p: f64| if p.abs() < tiny { -tiny } else { p };
        let mut d = vec![0.0; m];
        let mut l = vec![0.0; m - 2];
        let mut r = vec![0.0; m - 1];
        let mut pivot = diag[0] - s;
        let mut col = off[m - 1];
        let mut last = diag[m - 1] - s;
        for k in 0..m - 2 {
            d[k] = guard(pivot);
            l[k] = off[k] / d[k];
            r[k] = col / d[k];
            pivot = diag[k + 1] - s - off[k] * l[k];
            last -= col * r[k];
            col = if k + 2 == m - 1 { off[k + 1] } else { 0.0 } - r[k] * off[k];
        }
        d[m - 2] = guard(pivot);
        r[m - 2] = col / d[m - 2];
        last -= col * r[m - 2];
        d[m - 1] = guard(last);
        Factor { d, l, r }
    }

    fn negatives(&self) -> usize {
        self.d.iter().filter(|p| **p < 0.0).count()
    }

    fn solve(&self, x: &mut [f64]) {
        let m = x.len();
        for k in 1..m - 1 {
            x[k] -= self.l[k - 1] * x[k - 1];
        }
        x[m - 1] -= (0..m - 1).map(|k| self.r[k] * x[k]).sum::<f64>();
        for k in 0..m {
            x[k] /= self.d[k];
        }
        let xn = x[m - 1];
        for k in (0..m - 1).rev() {
            x[k] -= self.r[k] * xn;
            if k + 2 < m {
                x[k] -= self.l[k] * x[k + 1];
            }
        }
    }
}

fn count_below(diag: &[f64], off: &[f64], s: f64) -> usize {
    Factor::new(diag, off, s).negatives()
}

/// `k`-th smallest eigenvalue (0-based) by bisection on inertia.
fn bisect(diag: &[f64], off: &[f64], k: usize, lo: f64, hi: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn apply(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m)
        .map(|k| diag[k] * x[k] + off[k] * x[(k + 1) % m] + off[(k + m - 1) % m] * x[(k + m - 1) % m])
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// First eigenfunction, positive, with `Σ m_k ψ_k² = 1`.
    pub eigenfunction: Vec<f64>,
    /// `‖(B - λ₁)y‖` for the symmetric operator `B` and unit `y`.
    pub residual: f64,
    /// Gershgorin bound on `‖B‖`.
    pub operator_norm: f64,
}

/// `λ₁`, `λ₂` and the first eigenfunction of `-Δ + V`.
pub fn lambda1(c: &DiscreteClosedCurve) -> Result<SpectrumReport> {
    let m = c.len();
    let (diag, off) = c.symmetric_operator();
    let radius = |k: usize| off[k].abs() + off[(k + m - 1) % m].abs();
    let lo = (0..m).map(|k| diag[k] - radius(k)).fold(f64::INFINITY, f64::min);
    let hi = (0..m).map(|k| diag[k] + radius(k)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let (lo, hi) = (lo - 1e-9 * scale, hi + 1e-9 * scale);

    let (l1_lo, l1_hi) = bisect(&diag, &off, 0, lo, hi);
    let (l2_lo, l2_hi) = bisect(&diag, &off, 1, l1_lo, hi);

    let shift = l1_lo - 1e-10 * scale;
    let factor = Factor::new(&diag, &off, shift);
    let mut y = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.5 * (l1_lo + l1_hi);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_STEPS {
        factor.solve(&mut y);
        let n = norm(&y);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        y.iter_mut().for_each(|v| *v /= n);
        let by = apply(&diag, &off, &y);
        lambda = by.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = norm(&by.iter().zip(&y).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        if residual < RESIDUAL_TOL * scale {
            break;
        }
    }
    if residual >= 10.0 * RESIDUAL_TOL * scale {
        return Err(Error::Numerical(format!(
            "inverse iteration did not converge: residual {residual:e}, operator norm {scale:e}, bracket [{l1_lo}, {l1_hi}]"
        )));
    }
    let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let eigenfunction = c
        .masses()
        .iter()
        .zip(&y)
        .map(|(mk, yk)| sign * yk / mk.sqrt())
        .collect();
    Ok(SpectrumReport {
        lambda1: lambda,
        lambda2: (0.5 * (l2_lo + l2_hi)).max(lambda),
        eigenfunction,
        residual,
        operator_norm: scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConformalVerdict {
    PscAdmitting,
    Zero,
    Obstructed,
}

impl ConformalVerdict {
    pub fn name(self) -> &'static str {
        match self {
            ConformalVerdict::PscAdmitting => "psc_admitting",
            ConformalVerdict::Zero => "zero",
            ConformalVerdict::Obstructed => "obstructed",
        }
    }
}

/// Sign of `λ₁` up to `tol`, by default `1e-8·‖B‖`.
pub fn conformal_verdict(rep: &SpectrumReport, tol: Option<f64>) -> ConformalVerdict {
    let tol = tol.unwrap_or(VERDICT_REL_TOL * rep.operator_norm);
    if rep.lambda1 > tol {
        ConformalVerdict::PscAdmitting
    } else if rep.lambda1 < -tol {
        ConformalVerdict::Obstructed
    } else {
        ConformalVerdict::Zero
    }
}

/// One closed curve per boundary chain of `rep`, with potential
/// `V = -½(Sc + n/(n-1) h² + 2∂_ν h)` for `h = h_φ ∘ map`.
pub fn stability_curves(
    band: &DiscreteBand,
    rep: &MinimizerReport,
    m: &ModelSpace,
    map: &BandMap,
) -> Result<Vec<DiscreteClosedCurve>> {
    if rep.chains.is_empty() {
        return Err(Error::Precondition("minimizer has no boundary".into()));
    }
    if !rep.all_closed() {
        return Err(Error::Unsupported(
            "stability spectrum needs closed boundary chains".into(),
        ));
    }
    let n = m.n() as f64;
    let c = n / (n - 1.0);
    let pulled = pullback_along_chains(band, rep, m, map)?;
    rep.chains
        .iter()
        .zip(pulled)
        .map(|(chain, hv)| {
            let lengths = chain.segments.iter().map(|s| s.length).collect();
            let potential = chain
                .nodes
                .iter()
                .zip(hv)
                .map(|(node, (h, dh))| {
                    let sc = node
                        .scalar
                        .ok_or_else(|| Error::Unsupported("boundary chain touches the band boundary".into()))?;
                    Ok(-0.5 * (sc + c * h * h + 2.0 * dh))
                })
                .collect::<Result<Vec<_>>>()?;
            DiscreteClosedCurve::new(lengths, potential)
        })
        .collect()
}

/// Spectrum of the chain with the smallest `λ₁`, with its index.
pub fn stability_pipeline(
    band: &DiscreteBand,
    rep: &MinimizerReport,
    m: &ModelSpace,
    map: &BandMap,
) -> Result<(usize, SpectrumReport)> {
    let mut best: Option<(usize, SpectrumReport)> = None;
    for (k, curve) in stability_curves(band, rep, m, map)?.iter().enumerate() {
        let s = lambda1(curve)?;
        if best.as_ref().is_none_or(|(_, b)| s.lambda1 < b.lambda1) {
            best = Some((k, s));
        }
    }
    best.ok_or_else(|| Error::Precondition("minimizer has no boundary".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_eigenvalues(c: &DiscreteClosedCurve) -> Vec<f64> {
        let m = c.len();
        let a = nalgebra::DMatrix::from_row_slice(m, m, &c.dense_operator());
        let mut e: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn uniform_circle() {
        let c = DiscreteClosedCurve::uniform(256, core::f64::consts::TAU, |_| 0.0).unwrap();
        let r = lambda1(&c).unwrap();
        assert!(r.lambda1.abs() < 1e-8, "{}", r.lambda1);
        assert!((r.lambda2 - 1.0).abs() < 1e-3, "{}", r.lambda2);
        assert_eq!(conformal_verdict(&r, None), ConformalVerdict::Zero);
        let mass: f64 = c.masses().iter().zip(&r.eigenfunction).map(|(m, p)| m * p * p).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(r.eigenfunction.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn constant_potential_shifts() {
        for v in [1.0, -1.0, 3.5] {
            let c = DiscreteClosedCurve::uniform(64, 3.0, |_| v).unwrap();
            let r = lambda1(&c).unwrap();
            assert!((r.lambda1 - v).abs() < 1e-8);
        }
        let pos = lambda1(&DiscreteClosedCurve::uniform(32, 1.0, |_| 1.0).unwrap()).unwrap();
        let neg = lambda1(&DiscreteClosedCurve::uniform(32, 1.0, |_| -1.0).unwrap()).unwrap();
        assert_eq!(conformal_verdict(&pos, None), ConformalVerdict::PscAdmitting);
        assert_eq!(conformal_verdict(&neg, None), ConformalVerdict::Obstructed);
    }

    #[test]
    fn sine_potential_matches_dense() {
        let c = DiscreteClosedCurve::uniform(512, core::f64::consts::TAU, f64::sin).unwrap();
        let r = lambda1(&c).unwrap();
        let e = dense_eigenvalues(&c);
        assert!((r.lambda1 - e[0]).abs() < 1e-8, "{} vs {}", r.lambda1, e[0]);
        assert!((r.lambda2 - e[1]).abs() < 1e-8);
    }

    #[test]
    fn irregular_curve_matches_dense() {
        let lengths: Vec<f64> = (0..7).map(|k| 0.2 + 0.1 * k as f64).collect();
        let potential = vec![0.5, -2.0, 1.0, 0.0, 3.0, -1.0, 0.25];
        let c = DiscreteClosedCurve::new(lengths, potential).unwrap();
        let r = lambda1(&c).unwrap();
        let e = dense_eigenvalues(&c);
        assert!((r.lambda1 - e[0]).abs() < 1e-9);
        assert!((r.lambda2 - e[1]).abs() < 1e-9);
        let q = c.quadratic_form(&r.eigenfunction);
        assert!((q - r.lambda1).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(DiscreteClosedCurve::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(DiscreteClosedCurve::new(vec![1.0, 0.0, 1.0], vec![0.0; 3]).is_err());
        assert!(DiscreteClosedCurve::new(vec![1.0; 3], vec![0.0; 4]).is_err());
    }
}
