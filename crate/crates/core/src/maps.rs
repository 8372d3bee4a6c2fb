//! Transition maps along the two connections, the return map on the entry
//! wall, its Jacobian and orbit iteration.
//!
//! Deep orbits collapse toward `y = 0` double-exponentially, so iteration
//! carries the height as `ln|y|` plus a sign. Ordinary coordinates are used
//! wherever `y` is representable.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::{
    local_map, wrap_angle, Cap, CapPoint, Mirror, SaddleSpectrum, WallPoint, CORNER_TOL,
};
use crate::itinerary::Symbol;
use crate::precision::{Arith, Binary64};

/// Affine transition from the top cap to the wall, in Cartesian cap
/// coordinates `(u, v) = (r cos phi, r sin phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    a: [[f64; 2]; 2],
    mu: f64,
    tau: f64,
    r_max: f64,
}

impl Default for TransitionSpec {
    fn default() -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], mu: 0.0, tau: 1.0, r_max: 1.0 }
    }
}

impl TransitionSpec {
    pub fn new(a: [[f64; 2]; 2], mu: f64, tau: f64, r_max: f64) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if !a.iter().flatten().all(|v| v.is_finite()) || det == 0.0 || !det.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "transition matrix must be finite and invertible (det = {det})"
            )));
        }
        if !mu.is_finite() {
            return Err(ModelError::InvalidParameter(format!("mu = {mu} must be finite")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(ModelError::InvalidParameter(format!("tau = {tau} must be positive")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(ModelError::InvalidParameter(format!("r_max = {r_max} must be positive")));
        }
        Ok(Self { a, mu, tau, r_max })
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn a(&self) -> [[f64; 2]; 2] {
        self.a
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1])
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Wall angle where each connection enters.
    pub fn entry_angle(symbol: Symbol) -> f64 {
        match symbol {
            Symbol::Gamma1 => 0.0,
            Symbol::Gamma2 => PI,
        }
    }

    /// Spectral norm of `A`.
    pub fn norm(&self) -> f64 {
        operator_norm(&self.matrix())
    }
}

/// Largest singular value of a 2x2 matrix.
pub fn operator_norm(m: &Matrix2<f64>) -> f64 {
    m.singular_values().max()
}

/// Spectrum and transition bundled; every map in the model needs both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub spectrum: SaddleSpectrum,
    pub transition: TransitionSpec,
}

impl Default for Model {
    fn default() -> Self {
        Self { spectrum: SaddleSpectrum::canonical(), transition: TransitionSpec::default() }
    }
}

/// Wall point with the height stored as `ln|y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPoint<N> {
    pub x: N,
    pub ln_h: N,
    /// `true` on the `y > 0` side.
    pub up: bool,
}

impl LogPoint<f64> {
    pub fn from_wall(w: &WallPoint) -> Result<Self> {
        if w.y == 0.0 {
            return Err(ModelError::StableManifoldInput);
        }
        Ok(Self { x: w.x, ln_h: w.y.abs().ln(), up: w.y > 0.0 })
    }

    /// Ordinary coordinates; `y` may underflow to zero.
    pub fn to_wall(&self) -> WallPoint {
        let h = self.ln_h.exp();
        WallPoint { x: wrap_angle(self.x), y: if self.up { h } else { -h } }
    }

    pub fn symbol(&self) -> Symbol {
        if self.up {
            Symbol::Gamma1
        } else {
            Symbol::Gamma2
        }
    }
}

/// Outcome of one return in log-height form.
#[derive(Debug, Clone, PartialEq)]
pub enum LogStep<N> {
    Point(LogPoint<N>),
    /// Image lies exactly on the stable manifold.
    Stable,
    LeftNeighbourhood(f64),
    NonTransverse(f64),
    OutsideFlowBox(f64),
}

/// Model constants converted into a given arithmetic.
#[derive(Debug, Clone)]
pub struct LogModel<N> {
    delta: N,
    k: N,
    a: [N; 4],
    mu: N,
    mu_zero: bool,
    pi: N,
    ln_r_max: f64,
}

impl Model {
    pub fn new(spectrum: SaddleSpectrum, transition: TransitionSpec) -> Self {
        Self { spectrum, transition }
    }

    pub fn log_model<A: Arith>(&self, ar: &mut A) -> LogModel<A::Num> {
        let a = self.transition.a;
        LogModel {
            delta: ar.num(self.spectrum.delta()),
            k: ar.num(self.spectrum.winding()),
            a: [ar.num(a[0][0]), ar.num(a[0][1]), ar.num(a[1][0]), ar.num(a[1][1])],
            mu: ar.num(self.transition.mu),
            mu_zero: self.transition.mu == 0.0,
            pi: ar.pi(),
            ln_r_max: self.transition.r_max.ln(),
        }
    }

    /// Transition from a cap to the wall. The bottom branch is the top one
    /// conjugated by the symmetry.
    pub fn transition(&self, c: &CapPoint) -> Result<WallPoint> {
        let t = &self.transition;
        if c.r > t.r_max {
            return Err(ModelError::OutsideFlowBox { r: c.r, r_max: t.r_max });
        }
        let top = match c.cap {
            Cap::Top => *c,
            Cap::Bottom => c.mirrored(),
        };
        let (u, v) = (top.r * top.phi.cos(), top.r * top.phi.sin());
        let x = t.a[0][0] * u + t.a[0][1] * v;
        let y = t.mu + t.a[1][0] * u + t.a[1][1] * v;
        check_height(y)?;
        let w = WallPoint { x: wrap_angle(x), y };
        Ok(match c.cap {
            Cap::Top => w,
            Cap::Bottom => w.mirrored(),
        })
    }

    /// `R = Psi o Phi_O`, with the symbol of the passage.
    pub fn return_map(&self, w: &WallPoint) -> Result<(WallPoint, Symbol)> {
        let c = local_map(w, &self.spectrum)?;
        let symbol = Symbol::from_height(w.y).ok_or(ModelError::StableManifoldInput)?;
        Ok((self.transition(&c)?, symbol))
    }

    /// Analytic derivative of the return map in wall coordinates.
    pub fn return_jacobian(&self, w: &WallPoint) -> Result<Matrix2<f64>> {
        if w.y == 0.0 {
            return Err(ModelError::StableManifoldInput);
        }
        if w.y < 0.0 {
            // R o kappa = kappa o R and D kappa = diag(1, -1).
            let d = Matrix2::new(1.0, 0.0, 0.0, -1.0);
            return Ok(d * self.return_jacobian(&w.mirrored())? * d);
        }
        let delta = self.spectrum.delta();
        let k = self.spectrum.winding();
        let s = w.y;
        let r = s.powf(delta);
        let g = s.powf(delta - 1.0);
        let phi = w.x - k * s.ln();
        let (sn, cs) = phi.sin_cos();
        let m = Matrix2::new(
            -r * sn,
            g * (delta * cs + k * sn),
            r * cs,
            g * (delta * sn - k * cs),
        );
        Ok(self.transition.matrix() * m)
    }

    /// One return in log-height form, generic over the arithmetic.
    pub fn log_step<A: Arith>(
        ar: &mut A,
        m: &LogModel<A::Num>,
        p: &LogPoint<A::Num>,
    ) -> LogStep<A::Num> {
        let ln_r = ar.mul(&m.delta, &p.ln_h);
        let ln_r_f = ar.to_f64(&ln_r);
        if ln_r_f > m.ln_r_max {
            return LogStep::OutsideFlowBox(ln_r_f.exp());
        }
        let kl = ar.mul(&m.k, &p.ln_h);
        let phi = ar.sub(&p.x, &kl);
        let (c, s) = (ar.cos(&phi), ar.sin(&phi));
        let qx = {
            let t1 = ar.mul(&m.a[0], &c);
            let t2 = ar.mul(&m.a[1], &s);
            ar.add(&t1, &t2)
        };
        let qy = {
            let t1 = ar.mul(&m.a[2], &c);
            let t2 = ar.mul(&m.a[3], &s);
            ar.add(&t1, &t2)
        };
        let r = ar.exp(&ln_r);
        let rqx = ar.mul(&r, &qx);
        let x = if p.up { rqx } else { ar.sub(&m.pi, &rqx) };
        let (ln_h, up) = if m.mu_zero {
            if ar.is_zero(&qy) {
                return LogStep::Stable;
            }
            let aq = ar.abs(&qy);
            let lq = ar.ln(&aq);
            (ar.add(&ln_r, &lq), !ar.is_negative(&qy))
        } else {
            let rqy = ar.mul(&r, &qy);
            let y = if p.up { ar.add(&m.mu, &rqy) } else { ar.sub(&rqy, &m.mu) };
            if ar.is_zero(&y) {
                return LogStep::Stable;
            }
            let ay = ar.abs(&y);
            (ar.ln(&ay), !ar.is_negative(&y))
        };
        let lf = ar.to_f64(&ln_h);
        if lf > 0.0 {
            return LogStep::LeftNeighbourhood(lf.exp());
        }
        if lf > -CORNER_TOL {
            return LogStep::NonTransverse(lf.exp());
        }
        LogStep::Point(LogPoint { x, ln_h, up })
    }

    /// Binary64 log-height return.
    pub fn log_return(&self, p: &LogPoint<f64>) -> LogStep<f64> {
        let mut ar = Binary64;
        let m = self.log_model(&mut ar);
        Self::log_step(&mut ar, &m, p)
    }

    /// Symbols emitted by the first `n` passages starting at `p`, in any
    /// arithmetic. Stops early if the orbit terminates.
    pub fn symbols_from<A: Arith>(&self, ar: &mut A, p: &LogPoint<A::Num>, n: usize) -> Vec<Symbol> {
        let m = self.log_model(ar);
        let mut out = Vec::with_capacity(n);
        let mut cur = p.clone();
        for i in 0..n {
            out.push(if cur.up { Symbol::Gamma1 } else { Symbol::Gamma2 });
            if i + 1 == n {
                break;
            }
            match Self::log_step(ar, &m, &cur) {
                LogStep::Point(q) => cur = q,
                _ => break,
            }
        }
        out
    }

    pub fn iterate(&self, w: &WallPoint, n_max: usize, stop: &StopRule) -> OrbitRecord {
        let mut steps = Vec::new();
        let Ok(mut p) = LogPoint::from_wall(w) else {
            return OrbitRecord {
                initial: *w,
                steps,
                termination: Termination::HitStableManifold { tolerance: stop.stable_tol },
                last: *w,
                last_ln_abs_y: f64::NEG_INFINITY,
            };
        };
        let mut ar = Binary64;
        let m = self.log_model(&mut ar);
        let ln_tol = stop.stable_tol.ln();
        let ln_floor = stop.underflow_floor.ln();
        let e = self.spectrum.e();
        let k = self.spectrum.winding();
        let termination = loop {
            if p.ln_h < ln_tol {
                break Termination::HitStableManifold { tolerance: stop.stable_tol };
            }
            if p.ln_h < ln_floor {
                break Termination::Underflow;
            }
            if steps.len() >= n_max {
                break Termination::MaxSteps;
            }
            let before = p.clone();
            let next = Self::log_step(&mut ar, &m, &p);
            steps.push(OrbitStep {
                point: before.to_wall(),
                ln_abs_y: before.ln_h,
                symbol: before.symbol(),
                flight_time: -before.ln_h / e,
                revolutions: (before.x - k * before.ln_h) / TAU,
            });
            match next {
                LogStep::Point(q) => p = LogPoint { x: wrap_angle(q.x), ..q },
                LogStep::Stable => {
                    return OrbitRecord {
                        initial: *w,
                        steps,
                        termination: Termination::HitStableManifold { tolerance: 0.0 },
                        last: WallPoint { x: f64::NAN, y: 0.0 },
                        last_ln_abs_y: f64::NEG_INFINITY,
                    }
                }
                LogStep::LeftNeighbourhood(_) => break Termination::LeftNeighbourhood,
                LogStep::NonTransverse(_) => break Termination::NonTransverse,
                LogStep::OutsideFlowBox(_) => break Termination::OutsideFlowBox,
            }
        };
        OrbitRecord { initial: *w, steps, termination, last: p.to_wall(), last_ln_abs_y: p.ln_h }
    }
}

fn check_height(y: f64) -> Result<()> {
    let h = y.abs();
    if h > 1.0 {
        return Err(ModelError::LeftNeighbourhood(h));
    }
    if 1.0 - h < CORNER_TOL {
        return Err(ModelError::NonTransverse(y));
    }
    Ok(())
}

/// Stopping thresholds for [`Model::iterate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `|y|` falls below this; `0` disables the check.
    pub stable_tol: f64,
    /// Stop once `|y|` is no longer a normal binary64 number; `0` disables.
    pub underflow_floor: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { stable_tol: 0.0, underflow_floor: f64::MIN_POSITIVE }
    }
}

impl StopRule {
    /// Follow the orbit in log-height form with no lower cutoff.
    pub fn unbounded() -> Self {
        Self { stable_tol: 0.0, underflow_floor: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    MaxSteps,
    HitStableManifold { tolerance: f64 },
    LeftNeighbourhood,
    OutsideFlowBox,
    NonTransverse,
    Underflow,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::MaxSteps => "max_steps",
            Termination::HitStableManifold { .. } => "hit_stable_manifold",
            Termination::LeftNeighbourhood => "left_neighbourhood",
            Termination::OutsideFlowBox => "outside_flow_box",
            Termination::NonTransverse => "non_transverse",
            Termination::Underflow => "underflow",
        }
    }

    pub fn is_escape(&self) -> bool {
        matches!(
            self,
            Termination::LeftNeighbourhood | Termination::OutsideFlowBox | Termination::NonTransverse
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitStep {
    /// Input point of the passage.
    pub point: WallPoint,
    pub ln_abs_y: f64,
    pub symbol: Symbol,
    pub flight_time: f64,
    /// Unwrapped exit angle over `2pi`.
    pub revolutions: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub initial: WallPoint,
    pub steps: Vec<OrbitStep>,
    pub termination: Termination,
    /// Point reached after the last recorded passage.
    pub last: WallPoint,
    pub last_ln_abs_y: f64,
}

impl OrbitRecord {
    pub fn symbols(&self) -> crate::itinerary::ItineraryPath {
        self.steps.iter().map(|s| s.symbol).collect()
    }
}
