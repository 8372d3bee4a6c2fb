//! Probing, bracketing and ring scans on a segment, generic over the
//! arithmetic.
//!
//! A "ring" is a maximal parameter interval on which `R^d o beta` stays on
//! one side of the stable manifold; its ends are zeros of `y o R^d o beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::maps::{LogModel, LogPoint, LogStep, Model};
use crate::precision::Arith;

use super::segment::Segment;

/// Tuning knobs of the bracketing machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchTolerances {
    /// Bisection stops once the bracket is narrower than this times
    /// `min(|s|, parent width)`.
    pub bisection_rel: f64,
    /// Heights below this fraction of the segment's height scale count as
    /// lying on the stable manifold.
    pub stable_rel: f64,
    /// Probes per expected ring.
    pub probes_per_ring: usize,
    /// Rings probed toward each end of a parent interval.
    pub max_rings: usize,
    /// Fraction of a ring kept as its closed core.
    pub core_fraction: f64,
}

impl Default for SwitchTolerances {
    fn default() -> Self {
        Self {
            bisection_rel: 1e-15,
            stable_rel: 1e-14,
            probes_per_ring: 32,
            max_rings: 24,
            core_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Probe<N> {
    pub s: N,
    pub up: Option<bool>,
    /// `ln|y|` of the point one return before the probed side.
    pub height: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Ring<N> {
    pub lo: N,
    pub hi: N,
    pub up: bool,
    pub height: f64,
    /// Bracket around the lower end zero, if the end is a zero.
    pub lo_bracket: Option<(N, N)>,
    pub hi_bracket: Option<(N, N)>,
    pub probes: usize,
}

pub(crate) struct Engine<'a, A: Arith> {
    pub ar: A,
    pub lm: LogModel<A::Num>,
    pub model: &'a Model,
    pub seg: &'a Segment,
    pub tol: SwitchTolerances,
}

impl<'a, A: Arith> Engine<'a, A> {
    pub fn new(mut ar: A, model: &'a Model, seg: &'a Segment, tol: SwitchTolerances) -> Self {
        let lm = model.log_model(&mut ar);
        Self { ar, lm, model, seg, tol }
    }

    /// Orbit of `beta(s)` under `depth` returns: sides landed on, `ln|y|`
    /// of the second to last point and the last point.
    pub fn orbit(&mut self, s: &A::Num, depth: usize) -> Option<(Vec<bool>, f64, LogPoint<A::Num>)> {
        let mut p = self.seg.eval(&mut self.ar, &self.lm, s)?;
        let mut sides = Vec::with_capacity(depth);
        let mut prev = self.ar.to_f64(&p.ln_h);
        for _ in 0..depth {
            prev = self.ar.to_f64(&p.ln_h);
            match Model::log_step(&mut self.ar, &self.lm, &p) {
                LogStep::Point(q) => {
                    sides.push(q.up);
                    p = q;
                }
                _ => return None,
            }
        }
        Some((sides, prev, p))
    }

    pub fn probe(&mut self, s: A::Num, depth: usize) -> Probe<A::Num> {
        match self.orbit(&s, depth) {
            Some((sides, height, _)) => Probe { s, up: sides.last().copied(), height },
            None => Probe { s, up: None, height: f64::NEG_INFINITY },
        }
    }

    /// Shrinks a sign-change bracket `(lo, hi)` with `side(lo) = up_lo`.
    pub fn bisect(
        &mut self,
        mut lo: A::Num,
        mut hi: A::Num,
        up_lo: bool,
        depth: usize,
        parent_width: f64,
    ) -> (A::Num, A::Num) {
        loop {
            let scale = self.ar.to_f64(&hi).abs().min(parent_width);
            let w = self.ar.sub(&hi, &lo);
            if self.ar.to_f64(&w) <= self.tol.bisection_rel * scale {
                break;
            }
            let mid = self.ar.midpoint(&lo, &hi);
            if !(self.ar.lt(&lo, &mid) && self.ar.lt(&mid, &hi)) {
                break;
            }
            match self.probe(mid, depth) {
                Probe { s, up: Some(u), .. } if u == up_lo => lo = s,
                Probe { s, up: Some(_), .. } => hi = s,
                Probe { up: None, .. } => break,
            }
        }
        (lo, hi)
    }

    fn ring_step(&self) -> f64 {
        PI / (self.model.spectrum.winding() * self.tol.probes_per_ring as f64)
    }

    /// Rings of `R o beta` from `s = 1` downward. Scanning stops when `done`
    /// returns true for the rings found so far, or at the numeric floor.
    /// The second value is `true` when the floor was reached.
    pub fn top_rings(&mut self, mut done: impl FnMut(&[Ring<A::Num>]) -> bool) -> (Vec<Ring<A::Num>>, bool) {
        let h = self.ring_step();
        let floor = self.tol.stable_rel.ln() + self.seg.ln_scale();
        let mut rings = Vec::new();
        let one = self.ar.num(1.0);
        let mut top = self.probe(one.clone(), 1);
        if top.up.is_none() {
            let d = self.ar.num(4.0 * self.ar.unit_roundoff());
            let s = self.ar.sub(&one, &d);
            top = self.probe(s, 1);
        }
        let Some(mut up) = top.up else {
            return (rings, true);
        };
        let mut cur = Ring {
            lo: top.s.clone(),
            hi: top.s.clone(),
            up,
            height: top.height,
            lo_bracket: None,
            hi_bracket: None,
            probes: 1,
        };
        let mut prev = top.s;
        for j in 1.. {
            let e = self.ar.num(-(j as f64) * h);
            let s = self.ar.exp(&e);
            let p = self.probe(s, 1);
            if p.height.is_finite() && p.height < floor {
                return (rings, true);
            }
            let Some(u) = p.up else {
                continue;
            };
            if u == up {
                cur.height = cur.height.max(p.height);
                cur.lo = p.s.clone();
                cur.probes += 1;
                prev = p.s;
                continue;
            }
            let pw = self.ar.to_f64(&prev);
            let (b_lo, b_hi) = self.bisect(p.s.clone(), prev.clone(), u, 1, pw);
            cur.lo = b_hi.clone();
            cur.lo_bracket = Some((b_lo.clone(), b_hi.clone()));
            let bracket = cur.lo_bracket.clone();
            rings.push(std::mem::replace(
                &mut cur,
                Ring {
                    lo: p.s.clone(),
                    hi: b_lo,
                    up: u,
                    height: p.height,
                    lo_bracket: None,
                    hi_bracket: bracket,
                    probes: 1,
                },
            ));
            up = u;
            prev = p.s;
            if done(&rings) {
                return (rings, false);
            }
        }
        unreachable!()
    }

    /// Sub-rings of `R^depth o beta` inside the parent ring `(lo, hi)`,
    /// probed geometrically toward both ends. Ends are not bisected.
    pub fn inner_probes(&mut self, lo: &A::Num, hi: &A::Num, depth: usize, density: usize) -> Vec<Probe<A::Num>> {
        let h = self.ring_step() / density as f64;
        let width = self.ar.sub(hi, lo);
        let half = self.ar.mul_f64(&width, 0.5);
        let half_f = self.ar.to_f64(&half);
        let mag = self.ar.to_f64(lo).abs().max(self.ar.to_f64(hi).abs());
        let floor = 8.0 * self.ar.unit_roundoff() * mag;
        let jmax = self.tol.probes_per_ring * density * self.tol.max_rings;
        let mut offsets = Vec::new();
        for j in 1..=jmax {
            let f = (-(j as f64) * h).exp();
            if half_f * f < floor {
                break;
            }
            offsets.push(f);
        }
        let mut probes = Vec::with_capacity(2 * offsets.len() + 1);
        for f in offsets.iter().rev() {
            let d = self.ar.mul_f64(&half, *f);
            let s = self.ar.add(lo, &d);
            probes.push(self.probe(s, depth));
        }
        let mid = self.ar.add(lo, &half);
        probes.push(self.probe(mid, depth));
        for f in &offsets {
            let d = self.ar.mul_f64(&half, *f);
            let s = self.ar.sub(hi, &d);
            probes.push(self.probe(s, depth));
        }
        probes
    }

    /// Picks the complete sub-ring of side `up` with the largest height and
    /// bisects both of its ends.
    pub fn select_inner(
        &mut self,
        probes: &[Probe<A::Num>],
        up: bool,
        depth: usize,
        parent_width: f64,
    ) -> Option<Ring<A::Num>> {
        let valid: Vec<usize> = (0..probes.len()).filter(|&i| probes[i].up.is_some()).collect();
        let changes: Vec<usize> = valid
            .windows(2)
            .filter(|w| probes[w[0]].up != probes[w[1]].up)
            .map(|w| w[0])
            .collect();
        let next_valid = |i: usize| valid.iter().copied().find(|&v| v > i).expect("change has a successor");
        let mut best: Option<(f64, usize, usize)> = None;
        for pair in changes.windows(2) {
            let start = next_valid(pair[0]);
            let end = pair[1];
            if probes[start].up != Some(up) {
                continue;
            }
            let height = (start..=end)
                .filter(|&i| probes[i].up.is_some())
                .map(|i| probes[i].height)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_none_or(|(h, _, _)| height >= h) {
                best = Some((height, start, end));
            }
        }
        let (height, start, end) = best?;
        let before = *valid.iter().rev().find(|&&v| v < start)?;
        let after = next_valid(end);
        let (l0, l1) = self.bisect(probes[before].s.clone(), probes[start].s.clone(), !up, depth, parent_width);
        let (h0, h1) = self.bisect(probes[end].s.clone(), probes[after].s.clone(), up, depth, parent_width);
        Some(Ring {
            lo: l1.clone(),
            hi: h0.clone(),
            up,
            height,
            lo_bracket: Some((l0, l1)),
            hi_bracket: Some((h0, h1)),
            probes: probes.len(),
        })
    }

    /// Closed core of a ring.
    pub fn core(&mut self, lo: &A::Num, hi: &A::Num) -> (A::Num, A::Num) {
        let w = self.ar.sub(hi, lo);
        let m = self.ar.mul_f64(&w, (1.0 - self.tol.core_fraction) / 2.0);
        (self.ar.add(lo, &m), self.ar.sub(hi, &m))
    }

    /// Whether the first `sides.len()` returns of `beta(s)` land on `sides`.
    pub fn realizes(&mut self, s: &A::Num, sides: &[bool]) -> bool {
        matches!(self.orbit(s, sides.len()), Some((got, _, _)) if got == sides)
    }

    /// Maximises `ln|y(R o beta)|` over `[a, b]` by golden-section search.
    pub fn apex(&mut self, a: f64, b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let f = |s: f64, e: &mut Self| {
            let n = e.ar.num(s);
            match e.orbit(&n, 1) {
                Some((_, _, p)) => e.ar.to_f64(&p.ln_h),
                None => f64::NEG_INFINITY,
            }
        };
        let (mut a, mut b) = (a, b);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c, self), f(d, self));
        for _ in 0..200 {
            if (b - a) <= 1e-15 * b.abs() {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c, self);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d, self);
            }
        }
        let fb = f(b, self);
        let m = 0.5 * (a + b);
        if fb > f(m, self) {
            b
        } else {
            m
        }
    }
}
