//! Segments on the entry wall ending on the stable manifold, and their
//! spiral images on the caps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::{Cap, CapPoint, WallSide};
use crate::maps::{LogModel, LogPoint, LogStep, Model};
use crate::precision::{Arith, Binary64};

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `beta(s) = (x0, s * y0)`.
    Vertical { x0: f64, y0: f64 },
    /// Piecewise-linear interpolation of monotone samples, `s` from 0 to 1.
    Table { s: Vec<f64>, x: Vec<f64>, y: Vec<f64> },
    /// `beta(s) = R(parent(lo + s * (hi - lo)))` where `parent(lo)` returns
    /// onto the stable manifold.
    Image { parent: Arc<Segment>, lo: f64, hi: f64 },
}

/// Curve `beta: [0, 1] -> wall` with `beta(0)` on the stable manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    kind: Kind,
    up: bool,
    /// `ln|y(beta(1))|`, the segment's height scale.
    ln_scale: f64,
}

impl Default for Segment {
    fn default() -> Self {
        Self::vertical(0.0, 1.0).expect("default seed is valid")
    }
}

impl Segment {
    pub fn vertical(x0: f64, y0: f64) -> Result<Self> {
        if !x0.is_finite() || !(y0.abs() > 0.0 && y0.abs() <= 1.0) {
            return Err(ModelError::InvalidSegment(format!(
                "vertical segment needs finite x0 and 0 < |y0| <= 1, got ({x0}, {y0})"
            )));
        }
        Ok(Self { kind: Kind::Vertical { x0, y0 }, up: y0 > 0.0, ln_scale: y0.abs().ln() })
    }

    /// Table of `(s, x, y)` rows with `s` increasing from 0 to 1, `y(0) = 0`
    /// and both coordinates monotone.
    pub fn from_table(rows: &[(f64, f64, f64)]) -> Result<Self> {
        let bad = |m: &str| Err(ModelError::InvalidSegment(m.to_string()));
        if rows.len() < 2 {
            return bad("a table needs at least two rows");
        }
        if rows.iter().any(|r| !(r.0.is_finite() && r.1.is_finite() && r.2.is_finite())) {
            return bad("table entries must be finite");
        }
        if rows[0].0 != 0.0 || rows[rows.len() - 1].0 != 1.0 {
            return bad("parameter must run from 0 to 1");
        }
        if rows[0].2 != 0.0 {
            return bad("beta(0) must lie on the stable manifold (y = 0)");
        }
        let up = rows[rows.len() - 1].2 > 0.0;
        let sgn = if up { 1.0 } else { -1.0 };
        let mut x_dir = 0.0f64;
        for w in rows.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.0 <= a.0 {
                return bad("parameter values must be strictly increasing");
            }
            if sgn * b.2 <= sgn * a.2 {
                return bad("y must be strictly monotone and keep one sign");
            }
            let d = b.1 - a.1;
            if d != 0.0 {
                if x_dir * d < 0.0 {
                    return bad("x must be monotone");
                }
                x_dir = d.signum();
            }
        }
        if rows.iter().any(|r| r.2.abs() > 1.0) {
            return bad("|y| must not exceed 1");
        }
        let last = rows[rows.len() - 1].2;
        Ok(Self {
            kind: Kind::Table {
                s: rows.iter().map(|r| r.0).collect(),
                x: rows.iter().map(|r| r.1).collect(),
                y: rows.iter().map(|r| r.2).collect(),
            },
            up,
            ln_scale: last.abs().ln(),
        })
    }

    /// Reparametrisation of `parent` on `[lo, hi]` pushed forward by the
    /// return map. `parent(lo)` must return onto the stable manifold.
    pub fn image(parent: Arc<Segment>, lo: f64, hi: f64, model: &Model) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(ModelError::InvalidSegment(format!("bad branch [{lo}, {hi}]")));
        }
        let mut ar = Binary64;
        let lm = model.log_model(&mut ar);
        let end = parent
            .eval(&mut ar, &lm, &hi)
            .and_then(|p| match Model::log_step(&mut ar, &lm, &p) {
                LogStep::Point(q) => Some(q),
                _ => None,
            })
            .ok_or_else(|| ModelError::InvalidSegment("branch end does not return".into()))?;
        Ok(Self { kind: Kind::Image { parent, lo, hi }, up: end.up, ln_scale: end.ln_h })
    }

    pub fn side(&self) -> WallSide {
        if self.up {
            WallSide::Plus
        } else {
            WallSide::Minus
        }
    }

    pub fn ln_scale(&self) -> f64 {
        self.ln_scale
    }

    /// The symmetric segment.
    pub fn mirrored(&self) -> Option<Self> {
        match &self.kind {
            Kind::Vertical { x0, y0 } => Self::vertical(x0 + std::f64::consts::PI, -y0).ok(),
            Kind::Table { s, x, y } => {
                let rows: Vec<_> = s
                    .iter()
                    .zip(x)
                    .zip(y)
                    .map(|((s, x), y)| (*s, x + std::f64::consts::PI, -y))
                    .collect();
                Self::from_table(&rows).ok()
            }
            Kind::Image { .. } => None,
        }
    }

    /// `beta(s)` in log-height form; `None` on the stable manifold.
    pub fn eval<A: Arith>(
        &self,
        ar: &mut A,
        lm: &LogModel<A::Num>,
        s: &A::Num,
    ) -> Option<LogPoint<A::Num>> {
        if ar.is_zero(s) || ar.is_negative(s) {
            return None;
        }
        match &self.kind {
            Kind::Vertical { x0, y0 } => {
                let ls = ar.ln(s);
                let ly = ar.num(y0.abs().ln());
                Some(LogPoint { x: ar.num(*x0), ln_h: ar.add(&ls, &ly), up: self.up })
            }
            Kind::Table { s: ss, x, y } => {
                let sf = ar.to_f64(s).min(1.0);
                let i = match ss.partition_point(|v| *v <= sf) {
                    0 => 0,
                    n => (n - 1).min(ss.len() - 2),
                };
                let s0 = ar.num(ss[i]);
                let ds = ar.num(ss[i + 1] - ss[i]);
                let off = ar.sub(s, &s0);
                let t = ar.div(&off, &ds);
                let lerp = |ar: &mut A, a: f64, b: f64| {
                    let d = ar.num(b - a);
                    let m = ar.mul(&t, &d);
                    let a = ar.num(a);
                    ar.add(&a, &m)
                };
                let xv = lerp(ar, x[i], x[i + 1]);
                let yv = lerp(ar, y[i], y[i + 1]);
                if ar.is_zero(&yv) {
                    return None;
                }
                let ay = ar.abs(&yv);
                Some(LogPoint { x: xv, ln_h: ar.ln(&ay), up: self.up })
            }
            Kind::Image { parent, lo, hi } => {
                let lo_n = ar.num(*lo);
                let w = ar.num(hi - lo);
                let m = ar.mul(s, &w);
                let t = ar.add(&lo_n, &m);
                let p = parent.eval(ar, lm, &t)?;
                match Model::log_step(ar, lm, &p) {
                    LogStep::Point(q) => Some(q),
                    _ => None,
                }
            }
        }
    }

    /// Binary64 convenience wrapper around [`Segment::eval`].
    pub fn point(&self, model: &Model, s: f64) -> Option<LogPoint<f64>> {
        let mut ar = Binary64;
        let lm = model.log_model(&mut ar);
        self.eval(&mut ar, &lm, &s)
    }
}

/// Geometric grid in `s` from 1 down to `s_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub s_min: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { s_min: 1e-12, count: 400 }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count.max(2);
        let l = self.s_min.ln();
        (0..n).map(|i| (l * i as f64 / (n - 1) as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralSamples {
    /// `(s, Phi_O(beta(s)))` with `s` decreasing.
    pub samples: Vec<(f64, CapPoint)>,
    /// Running maximum of `r` over smaller parameters.
    pub r_upper: Vec<f64>,
    /// Running minimum of `r` over larger parameters.
    pub r_lower: Vec<f64>,
    /// `r` decreases along the grid and ends below its start.
    pub r_envelope_ok: bool,
    /// First index from which `phi` is strictly monotone to the end.
    pub phi_monotone_from: Option<usize>,
    /// `|phi|` at the last sample minus `|phi|` at the first.
    pub phi_growth: f64,
}

/// Samples the local-map image of a segment along a geometric grid.
pub fn segment_image(seg: &Segment, grid: &GridSpec, model: &Model) -> Result<SpiralSamples> {
    let spec = model.spectrum;
    let mut samples = Vec::new();
    for s in grid.points() {
        let p = seg.point(model, s).ok_or(ModelError::StableManifoldInput)?;
        samples.push((
            s,
            CapPoint {
                r: (spec.delta() * p.ln_h).exp(),
                phi: p.x - spec.winding() * p.ln_h,
                cap: if p.up { Cap::Top } else { Cap::Bottom },
            },
        ));
    }
    let r: Vec<f64> = samples.iter().map(|(_, c)| c.r).collect();
    let n = r.len();
    let mut r_upper = vec![0.0; n];
    let mut acc = f64::NEG_INFINITY;
    for i in (0..n).rev() {
        acc = acc.max(r[i]);
        r_upper[i] = acc;
    }
    let mut r_lower = vec![0.0; n];
    let mut acc = f64::INFINITY;
    for i in 0..n {
        acc = acc.min(r[i]);
        r_lower[i] = acc;
    }
    let r_envelope_ok = r.windows(2).all(|w| w[1] <= w[0]) && r[n - 1] < r[0];
    let phi: Vec<f64> = samples.iter().map(|(_, c)| c.phi).collect();
    let dir = (phi[n - 1] - phi[n - 2]).signum();
    let mut start = n - 1;
    while start > 0 && (phi[start] - phi[start - 1]) * dir > 0.0 {
        start -= 1;
    }
    let phi_monotone_from = (start < n - 1).then_some(start);
    let phi_growth = phi[n - 1].abs() - phi[0].abs();
    Ok(SpiralSamples { samples, r_upper, r_lower, r_envelope_ok, phi_monotone_from, phi_growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vertical_spiral_closed_form() {
        let model = Model::default();
        let seg = Segment::default();
        let img = segment_image(&seg, &GridSpec { s_min: 1e-10, count: 101 }, &model).unwrap();
        for (s, c) in &img.samples {
            assert!((c.phi - (1.0 / s).ln()).abs() < 1e-13);
            assert!((c.r / (s * s) - 1.0).abs() < 1e-13);
            assert_eq!(c.cap, Cap::Top);
        }
        for w in img.samples.windows(2) {
            let ratio = w[1].1.r / w[0].1.r;
            assert!((ratio / (w[1].0 / w[0].0).powi(2) - 1.0).abs() < 1e-12);
        }
        assert!(img.r_envelope_ok);
        assert_eq!(img.phi_monotone_from, Some(0));
        assert!(img.phi_growth > 20.0);
        let a = seg.point(&model, (-PI).exp()).unwrap();
        let b = seg.point(&model, (-2.0 * PI).exp()).unwrap();
        let phi = |p: &LogPoint<f64>| p.x - p.ln_h;
        assert!((phi(&b) - phi(&a) - PI).abs() < 1e-14);
    }

    #[test]
    fn table_validation() {
        assert!(Segment::from_table(&[(0.0, 0.0, 0.0), (0.5, 0.1, 0.2), (1.0, 0.2, 0.5)]).is_ok());
        let err = Segment::from_table(&[(0.0, 0.0, 0.0), (0.5, 0.1, 0.6), (1.0, 0.2, 0.5)]);
        assert!(matches!(err, Err(ModelError::InvalidSegment(_))));
        let err = Segment::from_table(&[(0.0, 0.0, 0.0), (0.5, 0.3, 0.2), (1.0, 0.2, 0.5)]);
        assert!(err.is_err());
        let err = Segment::from_table(&[(0.0, 0.0, 0.1), (1.0, 0.2, 0.5)]);
        assert!(err.is_err());
    }

    #[test]
    fn table_matches_vertical() {
        let model = Model::default();
        let rows: Vec<_> = (0..=64).map(|i| (i as f64 / 64.0, 0.4, -(i as f64) / 64.0 * 0.5)).collect();
        let t = Segment::from_table(&rows).unwrap();
        let v = Segment::vertical(0.4, -0.5).unwrap();
        for s in [0.9, 0.31, 0.01, 1e-6] {
            let a = t.point(&model, s).unwrap();
            let b = v.point(&model, s).unwrap();
            assert!((a.ln_h - b.ln_h).abs() < 1e-13 && a.up == b.up && !a.up);
        }
        assert_eq!(t.mirrored().unwrap().side(), WallSide::Plus);
    }
}
