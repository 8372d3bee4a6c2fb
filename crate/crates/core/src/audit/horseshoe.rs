//! Topological crossing test: does the image of a wall rectangle cross the
//! rectangle at least twice from one horizontal side to the other?

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::{wrap_angle, WallPoint};
use crate::maps::Model;

/// Rectangle `[x0, x0 + width] x [y0, y1]` on the wall, with `x` read
/// modulo `2pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallRect {
    pub x0: f64,
    pub width: f64,
    pub y0: f64,
    pub y1: f64,
}

impl WallRect {
    pub fn new(x0: f64, width: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(width > 0.0 && width < TAU) {
            return Err(ModelError::InvalidRectangle(format!("width {width} must lie in (0, 2pi)")));
        }
        if !(y0 < y1) || !x0.is_finite() {
            return Err(ModelError::InvalidRectangle(format!("need y0 < y1, got [{y0}, {y1}]")));
        }
        if y0 <= 0.0 && y1 >= 0.0 {
            return Err(ModelError::InvalidRectangle("rectangle touches the stable manifold y = 0".into()));
        }
        if y0 < -1.0 || y1 > 1.0 {
            return Err(ModelError::InvalidRectangle("rectangle leaves the wall |y| <= 1".into()));
        }
        Ok(Self { x0: wrap_angle(x0), width, y0, y1 })
    }

    pub fn mirrored(&self) -> Self {
        Self { x0: wrap_angle(self.x0 + std::f64::consts::PI), width: self.width, y0: -self.y1, y1: -self.y0 }
    }

    fn x_inside(&self, x: f64) -> bool {
        wrap_angle(x - self.x0) <= self.width
    }

    /// Point on the test path `t` in `[0, 1]` running from the side nearer
    /// `y = 0` to the far side; `lean` moves the x coordinate across the
    /// rectangle.
    fn path_point(&self, x_start: f64, lean: f64, t: f64) -> WallPoint {
        let (a, b) = (self.y0.abs().min(self.y1.abs()), self.y0.abs().max(self.y1.abs()));
        // Geometric in |y| so both ends are resolved.
        let h = (a.ln() + (b.ln() - a.ln()) * t).exp();
        let y = if self.y0 > 0.0 { h } else { -h };
        let x = self.x0 + self.width * (x_start + lean * t).clamp(0.0, 1.0);
        WallPoint { x: wrap_angle(x), y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    None,
    Below,
    Above,
}

/// Crossings of the band by a sampled curve: maximal runs that pass from
/// below `y0` to above `y1` (or back) while staying inside the rectangle.
pub fn count_crossings(rect: &WallRect, curve: impl IntoIterator<Item = Option<WallPoint>>) -> usize {
    let mut anchor = Anchor::None;
    let mut count = 0;
    for p in curve {
        let Some(p) = p else {
            anchor = Anchor::None;
            continue;
        };
        if p.y < rect.y0 {
            if anchor == Anchor::Above {
                count += 1;
            }
            anchor = Anchor::Below;
        } else if p.y > rect.y1 {
            if anchor == Anchor::Below {
                count += 1;
            }
            anchor = Anchor::Above;
        } else if !rect.x_inside(p.x) {
            anchor = Anchor::None;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeOptions {
    pub samples_per_path: usize,
    /// Vertical test paths, spread evenly across the rectangle.
    pub vertical_paths: usize,
}

impl Default for HorseshoeOptions {
    fn default() -> Self {
        Self { samples_per_path: 8192, vertical_paths: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub rect: WallRect,
    pub contrast: bool,
    /// Crossing count of the image of each test path.
    pub counts: Vec<usize>,
    pub min_count: usize,
    /// Every test path's image crosses the rectangle at least twice.
    pub double_crossing: bool,
}

impl CrossingReport {
    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

pub fn horseshoe_contrast(rect: &WallRect, model: &Model, opts: &HorseshoeOptions) -> Result<CrossingReport> {
    let rect = WallRect::new(rect.x0, rect.width, rect.y0, rect.y1)?;
    let n = opts.samples_per_path.max(2);
    let mut paths: Vec<(f64, f64)> = (0..opts.vertical_paths.max(1))
        .map(|i| ((i as f64 + 0.5) / opts.vertical_paths.max(1) as f64, 0.0))
        .collect();
    // Two diagonals.
    paths.push((0.0, 1.0));
    paths.push((1.0, -1.0));
    let counts: Vec<usize> = paths
        .iter()
        .map(|&(start, lean)| {
            let img = (0..n).map(|i| {
                let w = rect.path_point(start, lean, i as f64 / (n - 1) as f64);
                model.return_map(&w).ok().map(|(q, _)| q)
            });
            count_crossings(&rect, img)
        })
        .collect();
    let min_count = counts.iter().copied().min().unwrap_or(0);
    Ok(CrossingReport {
        rect,
        contrast: model.spectrum.is_contrast(),
        counts,
        min_count,
        double_crossing: min_count >= 2,
    })
}

/// Rectangles spaced geometrically toward the network: for each top height
/// the bottom lies `turns` image windings lower.
pub fn scan_rectangles(model: &Model) -> Vec<WallRect> {
    let per_turn = TAU / model.spectrum.winding();
    let mut out = Vec::new();
    for j in 1..=24 {
        let y1 = 10f64.powf(-0.5 * j as f64);
        for turns in [1.5, 2.5, 3.5] {
            let y0 = y1 * (-turns * per_turn).exp();
            if y0 < 1e-300 {
                continue;
            }
            for (x0, width) in [(-0.25, 0.5), (-1.0, 2.0)] {
                if let Ok(r) = WallRect::new(x0, width, y0, y1) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Runs the crossing test on every rectangle of [`scan_rectangles`].
pub fn horseshoe_scan(model: &Model, opts: &HorseshoeOptions) -> Result<Vec<CrossingReport>> {
    scan_rectangles(model).par_iter().map(|r| horseshoe_contrast(r, model, opts)).collect()
}
