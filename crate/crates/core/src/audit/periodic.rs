//! Grid search for periodic points of the return map.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::WallPoint;
use crate::maps::Model;

use super::contraction::log_grid;
use super::orbits::{insert_unique, refine_periodic, sort_orbits, symmetry_partners, OrbitKind, PeriodicOrbit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_period: usize,
    /// Smallest `|y|` searched; orbits entirely below it are dropped.
    pub y_floor: f64,
    pub x_points: usize,
    /// Heights per sign, spaced geometrically in `[y_floor, 1)`.
    pub y_points: usize,
    pub newton_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_period: 4, y_floor: 1e-6, x_points: 512, y_points: 256, newton_steps: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub mu: f64,
    pub orbits: Vec<PeriodicOrbit>,
    /// Index of each orbit's mirror image in `orbits`.
    pub partners: Vec<Option<usize>>,
    pub symmetric: bool,
    pub seeds: usize,
    /// Seeds whose refinement diverged or left the model.
    pub discarded: usize,
}

impl AttractorReport {
    pub fn count(&self, kind: OrbitKind) -> usize {
        self.orbits.iter().filter(|o| o.kind == kind).count()
    }

    /// Largest multiplier modulus over all reported orbits.
    pub fn max_multiplier(&self) -> f64 {
        self.orbits.iter().map(|o| o.max_multiplier()).fold(0.0, f64::max)
    }

    pub fn from_orbits(mu: f64, mut orbits: Vec<PeriodicOrbit>, seeds: usize, discarded: usize) -> Self {
        sort_orbits(&mut orbits);
        let partners = symmetry_partners(&orbits);
        let symmetric = partners.iter().all(Option::is_some);
        Self { mu, orbits, partners, symmetric, seeds, discarded }
    }
}

pub fn seed_grid(opts: &SearchOptions) -> Vec<WallPoint> {
    let hs = log_grid(opts.y_floor, 1.0 - 1e-3, opts.y_points);
    let mut out = Vec::with_capacity(2 * hs.len() * opts.x_points);
    for &h in &hs {
        for sign in [1.0, -1.0] {
            for i in 0..opts.x_points {
                out.push(WallPoint { x: TAU * (i as f64 + 0.5) / opts.x_points as f64, y: sign * h });
            }
        }
    }
    out
}

pub fn periodic_orbit_search(model: &Model, opts: &SearchOptions) -> Result<AttractorReport> {
    if !(1..=6).contains(&opts.max_period) {
        return Err(ModelError::InvalidParameter("max_period must lie in 1..=6".into()));
    }
    if !(opts.y_floor >= 1e-6 && opts.y_floor < 1.0) {
        return Err(ModelError::InvalidParameter("y_floor must lie in [1e-6, 1)".into()));
    }
    let seeds = seed_grid(opts);
    let found: Vec<Vec<Option<PeriodicOrbit>>> = seeds
        .par_iter()
        .map(|w| {
            (1..=opts.max_period)
                .map(|p| {
                    refine_periodic(model, w, p, opts.newton_steps)
                        .filter(|o| o.amplitude >= opts.y_floor)
                })
                .collect()
        })
        .collect();
    let mut orbits = Vec::new();
    let mut discarded = 0;
    for per_seed in found {
        for o in per_seed {
            match o {
                Some(o) => {
                    insert_unique(&mut orbits, o);
                }
                None => discarded += 1,
            }
        }
    }
    Ok(AttractorReport::from_orbits(model.transition.mu(), orbits, seeds.len(), discarded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SaddleSpectrum;
    use crate::maps::TransitionSpec;

    fn small() -> SearchOptions {
        SearchOptions { x_points: 64, y_points: 48, ..Default::default() }
    }

    #[test]
    fn intact_network_has_no_periodic_points() {
        let r = periodic_orbit_search(&Model::default(), &small()).unwrap();
        assert!(r.orbits.is_empty(), "{:?}", r.orbits);
    }

    #[test]
    fn split_network_has_symmetric_attracting_pair() {
        let m = Model::new(SaddleSpectrum::canonical(), TransitionSpec::default().with_mu(0.01));
        let r = periodic_orbit_search(&m, &SearchOptions { max_period: 2, ..small() }).unwrap();
        let fixed: Vec<_> = r.orbits.iter().filter(|o| o.period == 1).collect();
        assert_eq!(fixed.len(), 2);
        assert!(fixed.iter().all(|o| o.kind == OrbitKind::Attracting));
        assert!(fixed.iter().all(|o| (o.amplitude - 0.01).abs() < 2e-3));
        assert!(r.symmetric);
    }

    #[test]
    fn contrast_has_saddles() {
        let m = Model::new(SaddleSpectrum::contrast(1.0, 2.0, 1.0).unwrap(), TransitionSpec::default());
        let r = periodic_orbit_search(&m, &SearchOptions { max_period: 2, ..small() }).unwrap();
        assert!(r.orbits.iter().any(|o| o.max_multiplier() > 1.0));
        assert!(r.count(OrbitKind::Saddle) >= 1);
    }

    #[test]
    fn rejects_out_of_range_options() {
        let m = Model::default();
        assert!(periodic_orbit_search(&m, &SearchOptions { max_period: 7, ..small() }).is_err());
        assert!(periodic_orbit_search(&m, &SearchOptions { y_floor: 1e-7, ..small() }).is_err());
    }
}
