//! Periodic points of the return map: Newton refinement on `R^p - id`,
//! multipliers and deduplication.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, apply_symmetry, wrap_angle, WallPoint};
use crate::itinerary::{ItineraryPath, Symbol};
use crate::maps::Model;

/// Residual below which a refined point counts as periodic.
pub const PERIODIC_RESIDUAL: f64 = 1e-10;
/// Distance below which two periodic points are the same.
const SAME_POINT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Attracting,
    Saddle,
    Repelling,
    /// A multiplier on the unit circle to within rounding.
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    /// Orbit points in iteration order, starting at the lexicographically
    /// smallest symbol rotation.
    pub points: Vec<WallPoint>,
    pub word: ItineraryPath,
    /// Largest `|y|` along the orbit.
    pub amplitude: f64,
    pub multipliers: [Multiplier; 2],
    pub kind: OrbitKind,
    pub residual: f64,
}

impl PeriodicOrbit {
    pub fn max_multiplier(&self) -> f64 {
        self.multipliers[0].modulus.max(self.multipliers[1].modulus)
    }

    pub fn contains(&self, w: &WallPoint) -> bool {
        self.points.iter().any(|p| distance(p, w) < SAME_POINT)
    }

    pub fn same_as(&self, other: &PeriodicOrbit) -> bool {
        self.period == other.period && other.contains(&self.points[0])
    }

    pub fn mirrored(&self) -> PeriodicOrbit {
        let mut m = self.clone();
        m.points = self.points.iter().map(apply_symmetry).collect();
        m.word = self.word.swapped();
        canonical_rotation(&mut m);
        m
    }
}

pub fn distance(a: &WallPoint, b: &WallPoint) -> f64 {
    angle_diff(a.x, b.x).hypot(a.y - b.y)
}

/// `R^p(w)` with the orbit points and the Jacobian of `R^p`.
pub fn iterate_with_jacobian(
    model: &Model,
    w: &WallPoint,
    p: usize,
) -> Option<(Vec<WallPoint>, WallPoint, Matrix2<f64>)> {
    let mut pts = Vec::with_capacity(p);
    let mut j = Matrix2::identity();
    let mut cur = *w;
    for _ in 0..p {
        if !(cur.y.is_finite() && cur.y != 0.0) {
            return None;
        }
        let dj = model.return_jacobian(&cur).ok()?;
        let (next, _) = model.return_map(&cur).ok()?;
        pts.push(cur);
        j = dj * j;
        cur = next;
    }
    Some((pts, cur, j))
}

fn residual(w: &WallPoint, img: &WallPoint) -> Vector2<f64> {
    Vector2::new(angle_diff(img.x, w.x), img.y - w.y)
}

pub fn multipliers(m: &Matrix2<f64>) -> [Multiplier; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    let mk = |re: f64, im: f64| Multiplier { re, im, modulus: re.hypot(im) };
    if disc >= 0.0 {
        let s = disc.sqrt();
        // Stable form for the smaller root.
        let big = 0.5 * tr + s.copysign(tr);
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (a, b) = if big.abs() >= small.abs() { (big, small) } else { (small, big) };
        [mk(a, 0.0), mk(b, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [mk(0.5 * tr, s), mk(0.5 * tr, -s)]
    }
}

pub fn classify(ms: &[Multiplier; 2]) -> OrbitKind {
    const EPS: f64 = 1e-9;
    let inside = ms.iter().filter(|m| m.modulus < 1.0 - EPS).count();
    let outside = ms.iter().filter(|m| m.modulus > 1.0 + EPS).count();
    match (inside, outside) {
        (2, _) => OrbitKind::Attracting,
        (_, 2) => OrbitKind::Repelling,
        (1, 1) => OrbitKind::Saddle,
        _ => OrbitKind::Neutral,
    }
}

fn canonical_rotation(o: &mut PeriodicOrbit) {
    let p = o.period;
    let key = |i: usize| -> (String, u64, u64) {
        let word: String = (0..p).map(|k| o.word.symbols()[(i + k) % p].as_char()).collect();
        let pt = o.points[i];
        (word, wrap_angle(pt.x).to_bits(), pt.y.to_bits())
    };
    let best = (0..p).min_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap()).unwrap_or(0);
    o.points.rotate_left(best);
    let mut syms = o.word.symbols().to_vec();
    syms.rotate_left(best);
    o.word = ItineraryPath::new(syms);
}

/// Periodic orbit through a point already known to satisfy `R^p(w) = w`.
pub fn orbit_at(model: &Model, w: &WallPoint, p: usize) -> Option<PeriodicOrbit> {
    let (pts, img, j) = iterate_with_jacobian(model, w, p)?;
    let res = residual(w, &img).norm();
    let multipliers = multipliers(&j);
    let word: ItineraryPath = pts.iter().map(|q| Symbol::from_height(q.y).unwrap_or(Symbol::Gamma1)).collect();
    let amplitude = pts.iter().map(|q| q.y.abs()).fold(0.0, f64::max);
    let mut o = PeriodicOrbit {
        period: p,
        points: pts.into_iter().map(|q| WallPoint { x: wrap_angle(q.x), y: q.y }).collect(),
        word,
        amplitude,
        multipliers,
        kind: classify(&multipliers),
        residual: res,
    };
    canonical_rotation(&mut o);
    Some(o)
}

/// Damped Newton iteration on `R^p(w) - w` from `w0`. `None` when the
/// iteration leaves the model, stalls or does not converge.
pub fn refine_periodic(model: &Model, w0: &WallPoint, p: usize, max_iter: usize) -> Option<PeriodicOrbit> {
    let mut w = *w0;
    let (_, img, mut j) = iterate_with_jacobian(model, &w, p)?;
    let mut f = residual(&w, &img);
    for _ in 0..max_iter {
        if f.norm() < 0.01 * PERIODIC_RESIDUAL {
            break;
        }
        let step = (j - Matrix2::identity()).lu().solve(&(-f))?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = WallPoint { x: wrap_angle(w.x + lambda * step[0]), y: w.y + lambda * step[1] };
            if cand.y != 0.0 && cand.y.abs() < 1.0 {
                if let Some((_, img, jc)) = iterate_with_jacobian(model, &cand, p) {
                    let fc = residual(&cand, &img);
                    if fc.norm() < f.norm() {
                        accepted = Some((cand, fc, jc));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let (cand, fc, jc) = accepted?;
        w = cand;
        f = fc;
        j = jc;
    }
    if !(f.norm() < PERIODIC_RESIDUAL) {
        return None;
    }
    // Report the orbit at its minimal period.
    for q in (1..p).filter(|q| p.is_multiple_of(*q)) {
        let (_, img, _) = iterate_with_jacobian(model, &w, q)?;
        if residual(&w, &img).norm() < SAME_POINT {
            return orbit_at(model, &w, q).filter(|o| o.residual < PERIODIC_RESIDUAL);
        }
    }
    orbit_at(model, &w, p)
}

/// Appends `o` unless an equal orbit is already present.
pub fn insert_unique(list: &mut Vec<PeriodicOrbit>, o: PeriodicOrbit) -> bool {
    if list.iter().any(|q| q.same_as(&o)) {
        return false;
    }
    list.push(o);
    true
}

/// Index of the mirror image of each orbit within `list`, if present.
pub fn symmetry_partners(list: &[PeriodicOrbit]) -> Vec<Option<usize>> {
    list.iter()
        .map(|o| {
            let m = o.mirrored();
            list.iter().position(|q| q.same_as(&m))
        })
        .collect()
}

pub fn sort_orbits(list: &mut [PeriodicOrbit]) {
    list.sort_by(|a, b| {
        (a.period, a.points[0].x, a.points[0].y)
            .partial_cmp(&(b.period, b.points[0].x, b.points[0].y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::TransitionSpec;

    #[test]
    fn multipliers_match_eigenvalues() {
        let m = Matrix2::new(2.0, 1.0, 0.5, 0.25);
        let ms = multipliers(&m);
        let ev = m.complex_eigenvalues();
        let mut want: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((ms[0].modulus - want[0]).abs() < 1e-12);
        assert!((ms[1].modulus - want[1]).abs() < 1e-12);
        let rot = Matrix2::new(0.0, -0.5, 0.5, 0.0);
        let ms = multipliers(&rot);
        assert!((ms[0].modulus - 0.5).abs() < 1e-15 && ms[0].im != 0.0);
        assert_eq!(classify(&ms), OrbitKind::Attracting);
    }

    #[test]
    fn split_network_fixed_point() {
        let model = Model::new(crate::geometry::SaddleSpectrum::canonical(), TransitionSpec::default().with_mu(0.01));
        let o = refine_periodic(&model, &WallPoint { x: 0.0, y: 0.01 }, 1, 50).unwrap();
        assert_eq!(o.period, 1);
        assert!((o.points[0].y - 0.01).abs() < 1e-3);
        assert_eq!(o.kind, OrbitKind::Attracting);
        let (_, img, _) = iterate_with_jacobian(&model, &o.points[0], 1).unwrap();
        assert!(distance(&img, &o.points[0]) < PERIODIC_RESIDUAL);
        let m = o.mirrored();
        let (_, img, _) = iterate_with_jacobian(&model, &m.points[0], 1).unwrap();
        assert!(distance(&img, &m.points[0]) < 1e-12);
    }

    #[test]
    fn minimal_period_is_reported() {
        let model = Model::new(crate::geometry::SaddleSpectrum::canonical(), TransitionSpec::default().with_mu(0.01));
        let o = refine_periodic(&model, &WallPoint { x: 0.0, y: 0.01 }, 2, 50).unwrap();
        assert_eq!(o.period, 1);
    }
}
