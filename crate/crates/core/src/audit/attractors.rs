//! Attractors of the return map once the homoclinic connections are split,
//! and the transient itineraries leading to them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::WallPoint;
use crate::itinerary::{ItineraryPath, Symbol};
use crate::maps::Model;

use super::orbits::{distance, insert_unique, refine_periodic, OrbitKind, PeriodicOrbit};
use super::periodic::AttractorReport;
use super::stability::sample_start;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub starts: usize,
    pub seed: u64,
    /// Range of `|y0|` for the starts; both signs are sampled.
    pub y_min: f64,
    pub y_max: f64,
    pub max_returns: usize,
    /// Longest period looked for along an orbit.
    pub max_period: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { starts: 256, seed: 0, y_min: 0.5, y_max: 0.95, max_returns: 2000, max_period: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transient {
    pub start: WallPoint,
    /// Symbols emitted before the orbit comes within `1e-6` of its attractor.
    pub itinerary: ItineraryPath,
    pub switches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub mu: f64,
    /// `mu = 0`: the network itself attracts and no cycle exists.
    pub degenerate: bool,
    pub report: AttractorReport,
    pub attractor_count: usize,
    pub amplitude: f64,
    pub converged: usize,
    pub unconverged: usize,
    pub max_transient_switches: usize,
    pub fraction_three_switches: f64,
    /// Transient with the most switches, first in sample order on ties.
    pub longest_transient: Option<Transient>,
}

/// Follows `w` until it settles on a periodic orbit.
pub fn settle(model: &Model, w: &WallPoint, opts: &ScanOptions) -> Option<(PeriodicOrbit, Transient)> {
    let mut pts = vec![*w];
    let mut cur = *w;
    for _ in 0..opts.max_returns {
        let (next, _) = model.return_map(&cur).ok()?;
        pts.push(next);
        cur = next;
        let n = pts.len() - 1;
        for p in 1..=opts.max_period.min(n) {
            if distance(&pts[n], &pts[n - p]) < 1e-12 {
                let orbit = refine_periodic(model, &pts[n], p, 20)?;
                let reach = pts.iter().position(|q| orbit.points.iter().any(|o| distance(q, o) < 1e-6))?;
                let itinerary: ItineraryPath =
                    pts[..=reach].iter().filter_map(|q| Symbol::from_height(q.y)).collect();
                let switches = itinerary.switches();
                return Some((orbit, Transient { start: *w, itinerary, switches }));
            }
        }
    }
    None
}

fn scan_one(model: &Model, opts: &ScanOptions) -> ScanEntry {
    let mu = model.transition.mu();
    if mu == 0.0 {
        return ScanEntry {
            mu,
            degenerate: true,
            report: AttractorReport::from_orbits(mu, Vec::new(), 0, 0),
            attractor_count: 0,
            amplitude: 0.0,
            converged: 0,
            unconverged: 0,
            max_transient_switches: 0,
            fraction_three_switches: 0.0,
            longest_transient: None,
        };
    }
    let results: Vec<Option<(PeriodicOrbit, Transient)>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| settle(model, &sample_start(opts.seed, i, opts.y_min, opts.y_max), opts))
        .collect();
    let mut orbits = Vec::new();
    let mut transients = Vec::new();
    let mut unconverged = 0;
    for r in results {
        match r {
            Some((o, t)) => {
                insert_unique(&mut orbits, o);
                transients.push(t);
            }
            None => unconverged += 1,
        }
    }
    let report = AttractorReport::from_orbits(mu, orbits, opts.starts, unconverged);
    let attracting: Vec<&PeriodicOrbit> =
        report.orbits.iter().filter(|o| o.kind == OrbitKind::Attracting).collect();
    let max_transient_switches = transients.iter().map(|t| t.switches).max().unwrap_or(0);
    let three = transients.iter().filter(|t| t.switches >= 3).count();
    let longest = transients.iter().find(|t| t.switches == max_transient_switches).cloned();
    ScanEntry {
        mu,
        degenerate: false,
        attractor_count: attracting.len(),
        amplitude: attracting.iter().map(|o| o.amplitude).fold(0.0, f64::max),
        converged: transients.len(),
        unconverged,
        max_transient_switches,
        fraction_three_switches: if transients.is_empty() { 0.0 } else { three as f64 / transients.len() as f64 },
        longest_transient: longest,
        report,
    }
}

/// Attractors for each splitting parameter in `mus`.
pub fn attractor_scan(mus: &[f64], model: &Model, opts: &ScanOptions) -> Result<Vec<ScanEntry>> {
    Ok(mus
        .iter()
        .map(|&mu| scan_one(&Model::new(model.spectrum, model.transition.with_mu(mu)), opts))
        .collect())
}
