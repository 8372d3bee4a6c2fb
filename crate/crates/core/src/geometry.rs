//! Linear flow inside the cylindrical block around the saddle-focus, the
//! boundary sections, the local passage map and the `-Id` symmetry.
//!
//! The block has radius 1 and height 2. The wall `rho = 1` is the entry
//! section, parametrised by `(x, y) = (theta, z)`; the caps `z = +-1` are the
//! exit sections, parametrised in polar form `(r, phi)` with `phi` unwrapped.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Distance to the corner circles below which a point counts as non-transverse.
pub const CORNER_TOL: f64 = 1e-14;

/// Reduce an angle to `[0, 2pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed circular difference `a - b` reduced to `[-pi, pi)`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

/// Half-turn on a reduced angle, written so that applying it twice returns
/// the input up to one rounding.
fn half_turn(a: f64) -> f64 {
    if a < PI {
        a + PI
    } else {
        a - PI
    }
}

/// Eigenvalue data `-C +- i alpha`, `E` of the saddle-focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpectrum {
    c: f64,
    e: f64,
    alpha: f64,
    contrast: bool,
}

impl SaddleSpectrum {
    /// Standard regime: requires `C > E > 0` and `alpha > 0`.
    pub fn new(c: f64, e: f64, alpha: f64) -> Result<Self> {
        Self::check_positive(c, e, alpha)?;
        if c <= e {
            return Err(ModelError::HypothesisViolation(format!(
                "contraction rate C = {c} must exceed expansion rate E = {e}; \
                 set the contrast flag to study C <= E"
            )));
        }
        Ok(Self { c, e, alpha, contrast: false })
    }

    /// Contrast regime: any positive rates, including `C <= E`.
    pub fn contrast(c: f64, e: f64, alpha: f64) -> Result<Self> {
        Self::check_positive(c, e, alpha)?;
        Ok(Self { c, e, alpha, contrast: true })
    }

    pub fn canonical() -> Self {
        Self { c: 2.0, e: 1.0, alpha: 1.0, contrast: false }
    }

    fn check_positive(c: f64, e: f64, alpha: f64) -> Result<()> {
        for (name, v) in [("C", c), ("E", e), ("alpha", alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::HypothesisViolation(format!(
                    "{name} = {v} must be finite and positive"
                )));
            }
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_contrast(&self) -> bool {
        self.contrast
    }

    /// Saddle index `C / E`.
    pub fn delta(&self) -> f64 {
        self.c / self.e
    }

    /// Winding per unit of `ln(1/|y|)`, i.e. `alpha / E`.
    pub fn winding(&self) -> f64 {
        self.alpha / self.e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub rho: f64,
    pub theta: f64,
    pub z: f64,
}

impl CylinderPoint {
    pub fn new(rho: f64, theta: f64, z: f64) -> Result<Self> {
        let p = Self { rho, theta: wrap_angle(theta), z };
        if !p.in_block() {
            return Err(ModelError::OutOfBlock(format!("rho = {rho}, z = {z}")));
        }
        Ok(p)
    }

    pub fn in_block(&self) -> bool {
        (0.0..=1.0).contains(&self.rho) && self.z.abs() <= 1.0 && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    Plus,
    Minus,
    Stable,
}

/// Point on the entry wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPoint {
    pub x: f64,
    pub y: f64,
}

impl WallPoint {
    /// Validating constructor; `x` is reduced to `[0, 2pi)`.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() || y.abs() > 1.0 {
            return Err(ModelError::OutOfBlock(format!("wall point ({x}, {y})")));
        }
        Ok(Self { x: wrap_angle(x), y })
    }

    pub fn side(&self) -> WallSide {
        if self.y > 0.0 {
            WallSide::Plus
        } else if self.y < 0.0 {
            WallSide::Minus
        } else {
            WallSide::Stable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cap {
    Top,
    Bottom,
}

/// Point on an exit cap, `phi` unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapPoint {
    pub r: f64,
    pub phi: f64,
    pub cap: Cap,
}

impl CapPoint {
    /// Full turns accumulated by the unwrapped angle.
    pub fn revolutions(&self) -> f64 {
        self.phi / TAU
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryClass {
    SigmaInPlus,
    SigmaInMinus,
    /// Wall circle `z = 0`, the local stable manifold.
    SigmaInStable,
    SigmaOutTop,
    SigmaOutBottom,
    Omega,
    Interior,
}

/// Exact flow of the linear field.
pub fn local_flow(p: &CylinderPoint, t: f64, spec: &SaddleSpectrum) -> CylinderPoint {
    CylinderPoint {
        rho: p.rho * (-spec.c * t).exp(),
        theta: wrap_angle(p.theta + spec.alpha * t),
        z: p.z * (spec.e * t).exp(),
    }
}

/// Time needed to travel from the wall to a cap.
pub fn time_of_flight(w: &WallPoint, spec: &SaddleSpectrum) -> Result<f64> {
    let h = w.y.abs();
    if h == 0.0 {
        return Err(ModelError::StableManifoldInput);
    }
    let inv = 1.0 / h;
    if inv.is_finite() {
        Ok((1.0 / spec.e) * inv.ln())
    } else {
        Ok(-h.ln() / spec.e)
    }
}

/// Passage map from the wall to the caps.
pub fn local_map(w: &WallPoint, spec: &SaddleSpectrum) -> Result<CapPoint> {
    let h = w.y.abs();
    if h == 0.0 {
        return Err(ModelError::StableManifoldInput);
    }
    let cap = if w.y > 0.0 { Cap::Top } else { Cap::Bottom };
    Ok(CapPoint { r: h.powf(spec.delta()), phi: w.x - spec.winding() * h.ln(), cap })
}

pub fn classify_boundary(p: &CylinderPoint) -> Result<BoundaryClass> {
    if !p.in_block() {
        return Err(ModelError::OutOfBlock(format!("rho = {}, z = {}", p.rho, p.z)));
    }
    let on_wall = (1.0 - p.rho) <= CORNER_TOL;
    let on_cap = (1.0 - p.z.abs()) <= CORNER_TOL;
    Ok(match (on_wall, on_cap) {
        (true, true) => BoundaryClass::Omega,
        (true, false) if p.z > 0.0 => BoundaryClass::SigmaInPlus,
        (true, false) if p.z < 0.0 => BoundaryClass::SigmaInMinus,
        (true, false) => BoundaryClass::SigmaInStable,
        (false, true) if p.z > 0.0 => BoundaryClass::SigmaOutTop,
        (false, true) => BoundaryClass::SigmaOutBottom,
        (false, false) => BoundaryClass::Interior,
    })
}

/// The `Z2` action induced by `-Id` on each chart.
pub trait Mirror: Sized {
    fn mirrored(&self) -> Self;
}

impl Mirror for CylinderPoint {
    fn mirrored(&self) -> Self {
        Self { rho: self.rho, theta: half_turn(wrap_angle(self.theta)), z: -self.z }
    }
}

impl Mirror for WallPoint {
    fn mirrored(&self) -> Self {
        Self { x: half_turn(wrap_angle(self.x)), y: -self.y }
    }
}

impl Mirror for CapPoint {
    /// Top gains `+pi`, bottom gains `-pi`, so the unwrapped angle is an
    /// exact involution.
    fn mirrored(&self) -> Self {
        match self.cap {
            Cap::Top => Self { r: self.r, phi: self.phi + PI, cap: Cap::Bottom },
            Cap::Bottom => Self { r: self.r, phi: self.phi - PI, cap: Cap::Top },
        }
    }
}

pub fn apply_symmetry<P: Mirror>(p: &P) -> P {
    p.mirrored()
}
