//! Attraction statistics for orbits started near the network.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::WallPoint;
use crate::maps::{Model, StopRule, Termination};

/// Largest `y0` with `||A|| y^delta < y` on `(0, y0)`, capped at the wall
/// height 1.
pub fn trapping_height(model: &Model) -> Result<f64> {
    let delta = model.spectrum.delta();
    if delta <= 1.0 {
        return Err(ModelError::HypothesisViolation(format!(
            "no trapping height when the saddle index {delta} is at most 1"
        )));
    }
    Ok(model.transition.norm().powf(-1.0 / (delta - 1.0)).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub samples: usize,
    /// Range of `|y0|`; both signs are sampled.
    pub y_min: f64,
    pub y_max: f64,
    pub seed: u64,
    pub max_returns: usize,
    /// An orbit is attracted once `|y|` drops below this.
    pub threshold: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { samples: 10_000, y_min: 0.0, y_max: 0.5, seed: 0, max_returns: 64, threshold: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Attracted,
    Escaped,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub index: usize,
    pub x0: f64,
    pub y0: f64,
    pub outcome: Outcome,
    /// Returns taken before the outcome was decided.
    pub steps: usize,
    pub max_abs_y: f64,
    /// First step from which `|y|` decreases strictly along the record.
    pub onset: usize,
    /// `|y|` never returns above a level once it has dropped below it.
    pub monotone: bool,
    pub switches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub seed: u64,
    pub samples: usize,
    pub y_star: f64,
    pub threshold: f64,
    pub attracted: usize,
    pub escaped: usize,
    pub undecided: usize,
    pub fraction_attracted: f64,
    pub max_excursion: f64,
    pub max_steps_to_attract: usize,
    pub all_monotone: bool,
    pub orbits: Vec<OrbitSummary>,
}

/// Iterates one start and classifies it.
pub fn classify_orbit(model: &Model, w: &WallPoint, max_returns: usize, threshold: f64) -> OrbitSummary {
    let stop = StopRule { stable_tol: threshold, underflow_floor: 0.0 };
    let rec = model.iterate(w, max_returns, &stop);
    let outcome = match rec.termination {
        Termination::HitStableManifold { .. } => Outcome::Attracted,
        t if t.is_escape() => Outcome::Escaped,
        _ => Outcome::Undecided,
    };
    let heights: Vec<f64> = rec.steps.iter().map(|s| s.ln_abs_y).chain([rec.last_ln_abs_y]).collect();
    let mut onset = heights.len().saturating_sub(1);
    while onset > 0 && heights[onset] < heights[onset - 1] {
        onset -= 1;
    }
    let monotone = heights.windows(2).all(|h| h[1] <= h[0]);
    let max_abs_y = rec.steps.iter().map(|s| s.point.y.abs()).fold(w.y.abs(), f64::max);
    OrbitSummary {
        index: 0,
        x0: w.x,
        y0: w.y,
        outcome,
        steps: rec.steps.len(),
        max_abs_y,
        onset,
        monotone,
        switches: rec.symbols().switches(),
    }
}

/// Deterministic start point for sample `i`.
pub fn sample_start(seed: u64, i: usize, y_min: f64, y_max: f64) -> WallPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let x = rng.gen::<f64>() * TAU;
    let h = y_min + (y_max - y_min) * rng.gen::<f64>();
    let y = if rng.gen::<bool>() { h } else { -h };
    WallPoint { x, y }
}

pub fn stability_sample(model: &Model, opts: &StabilityOptions) -> Result<StabilityReport> {
    if model.transition.mu() != 0.0 {
        return Err(ModelError::InvalidParameter("stability sampling needs mu = 0".into()));
    }
    let y_star = trapping_height(model)?;
    if !(0.0 <= opts.y_min && opts.y_min <= opts.y_max && opts.y_max < y_star) {
        return Err(ModelError::InvalidParameter(format!(
            "sample range [{}, {}] must lie in [0, y*) with y* = {y_star}",
            opts.y_min, opts.y_max
        )));
    }
    let orbits: Vec<OrbitSummary> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let w = sample_start(opts.seed, i, opts.y_min, opts.y_max);
            OrbitSummary { index: i, ..classify_orbit(model, &w, opts.max_returns, opts.threshold) }
        })
        .collect();
    let count = |o: Outcome| orbits.iter().filter(|s| s.outcome == o).count();
    let attracted = count(Outcome::Attracted);
    Ok(StabilityReport {
        seed: opts.seed,
        samples: opts.samples,
        y_star,
        threshold: opts.threshold,
        attracted,
        escaped: count(Outcome::Escaped),
        undecided: count(Outcome::Undecided),
        fraction_attracted: if opts.samples == 0 { 1.0 } else { attracted as f64 / opts.samples as f64 },
        max_excursion: orbits.iter().map(|o| o.max_abs_y).fold(0.0, f64::max),
        max_steps_to_attract: orbits
            .iter()
            .filter(|o| o.outcome == Outcome::Attracted)
            .map(|o| o.steps)
            .max()
            .unwrap_or(0),
        all_monotone: orbits.iter().all(|o| o.monotone),
        orbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SaddleSpectrum;
    use crate::maps::TransitionSpec;

    #[test]
    fn trapping_height_closed_form() {
        assert_eq!(trapping_height(&Model::default()).unwrap(), 1.0);
        let a = TransitionSpec::new([[2.0, 0.0], [0.0, 2.0]], 0.0, 1.0, 1.0).unwrap();
        let m = Model::new(SaddleSpectrum::canonical(), a);
        assert!((trapping_height(&m).unwrap() - 0.5).abs() < 1e-15);
        let c = Model::new(SaddleSpectrum::contrast(1.0, 2.0, 1.0).unwrap(), TransitionSpec::default());
        assert!(trapping_height(&c).is_err());
    }

    #[test]
    fn start_on_stable_manifold_is_attracted_at_once() {
        let s = classify_orbit(&Model::default(), &WallPoint { x: 1.0, y: 0.0 }, 10, 1e-12);
        assert_eq!(s.outcome, Outcome::Attracted);
        assert_eq!(s.steps, 0);
    }

    #[test]
    fn canonical_samples_collapse_quickly() {
        let opts = StabilityOptions { samples: 2000, ..Default::default() };
        let r = stability_sample(&Model::default(), &opts).unwrap();
        assert_eq!(r.attracted, r.samples);
        assert_eq!(r.escaped, 0);
        assert!(r.max_steps_to_attract <= 7);
        assert!(r.all_monotone);
        assert_eq!(r.attracted + r.escaped + r.undecided, r.samples);
    }

    #[test]
    fn doubled_matrix_below_trapping_height() {
        let a = TransitionSpec::new([[2.0, 0.0], [0.0, 2.0]], 0.0, 1.0, 1.0).unwrap();
        let m = Model::new(SaddleSpectrum::canonical(), a);
        let opts = StabilityOptions { samples: 2000, y_max: 0.5 * (1.0 - 1e-3), max_returns: 200, ..Default::default() };
        let r = stability_sample(&m, &opts).unwrap();
        assert_eq!(r.escaped, 0);
        assert_eq!(r.attracted, r.samples);
        let bad = StabilityOptions { y_max: 0.75, ..opts };
        assert!(stability_sample(&m, &bad).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let opts = StabilityOptions { samples: 300, seed: 42, ..Default::default() };
        let a = stability_sample(&Model::default(), &opts).unwrap();
        let b = stability_sample(&Model::default(), &opts).unwrap();
        assert_eq!(a, b);
    }
}
