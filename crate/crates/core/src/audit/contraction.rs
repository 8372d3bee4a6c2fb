//! Size of the return-map derivative as the orbit approaches the network.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::WallPoint;
use crate::maps::{operator_norm, Model};

pub const X_PROBES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub y: f64,
    /// Largest operator norm of the derivative over the x probes.
    pub norm: f64,
    /// Same maximum at the mirrored points `(x + pi, -y)`.
    pub mirrored_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionProfile {
    pub rows: Vec<ProfileRow>,
    /// Least-squares slope of `ln norm` against `ln y`.
    pub slope: f64,
    pub expected_slope: f64,
    /// `|slope - expected| <= 5% of |expected|`.
    pub slope_ok: bool,
    pub max_mirror_deviation: f64,
}

/// `count` heights spaced geometrically in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn worst_norm(model: &Model, y: f64, shift: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..X_PROBES {
        let x = TAU * i as f64 / X_PROBES as f64 + shift;
        let j = model.return_jacobian(&WallPoint { x, y })?;
        best = best.max(operator_norm(&j));
    }
    Ok(best)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn contraction_profile(ys: &[f64], model: &Model) -> Result<ContractionProfile> {
    if ys.len() < 2 || ys.iter().any(|&y| !(y > 0.0 && y < 1.0)) {
        return Err(ModelError::InvalidParameter(
            "contraction grid needs at least two heights in (0, 1)".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ys.len());
    for &y in ys {
        rows.push(ProfileRow {
            y,
            norm: worst_norm(model, y, 0.0)?,
            mirrored_norm: worst_norm(model, -y, PI)?,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.y.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    let slope = fit_slope(&lx, &ly);
    let expected_slope = model.spectrum.delta() - 1.0;
    let max_mirror_deviation = rows
        .iter()
        .map(|r| (r.norm - r.mirrored_norm).abs() / r.norm)
        .fold(0.0, f64::max);
    Ok(ContractionProfile {
        slope_ok: (slope - expected_slope).abs() <= 0.05 * expected_slope.abs(),
        rows,
        slope,
        expected_slope,
        max_mirror_deviation,
    })
}
