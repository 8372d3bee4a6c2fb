//! Continuous-time suspension of a return-map orbit: closed-form flow inside
//! the block, a fixed travel time `tau` along each connection tube.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::{angle_diff, wrap_angle, Cap, WallPoint};
use crate::itinerary::Symbol;
use crate::maps::{LogPoint, LogStep, Model, TransitionSpec};

const MAX_SAMPLES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum SampleState {
    Block { rho: f64, theta: f64, z: f64 },
    /// `phase` runs from 0 at the cap to 1 at the wall; `offset` is the
    /// interpolated distance from the connection.
    Tube { connection: Symbol, phase: f64, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedSample {
    pub t: f64,
    #[serde(flatten)]
    pub state: SampleState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SectionEvent {
    SigmaIn { t: f64, x: f64, ln_abs_y: f64, symbol: Option<Symbol> },
    SigmaOut { t: f64, r: f64, phi: f64, cap: Cap },
}

impl SectionEvent {
    pub fn t(&self) -> f64 {
        match self {
            SectionEvent::SigmaIn { t, .. } | SectionEvent::SigmaOut { t, .. } => *t,
        }
    }
}

/// One trip along a connection tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubePassage {
    pub connection: Symbol,
    pub t_start: f64,
    pub t_end: f64,
    /// Distance from the unstable manifold on the cap.
    pub exit_offset: f64,
    /// Distance from the connection's entry point on the wall.
    pub entry_offset: f64,
}

impl TubePassage {
    pub fn offset_at(&self, phase: f64) -> f64 {
        (1.0 - phase) * self.exit_offset + phase * self.entry_offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspendedTrajectory {
    pub tau: f64,
    pub horizon: f64,
    pub samples: Vec<TimedSample>,
    pub events: Vec<SectionEvent>,
    pub tubes: Vec<TubePassage>,
}

/// Distance of a wall point from the entry point of `connection`.
pub fn entry_offset(w: &WallPoint, connection: Symbol) -> f64 {
    angle_diff(w.x, TransitionSpec::entry_angle(connection)).hypot(w.y)
}

fn push_grid(
    samples: &mut Vec<TimedSample>,
    dt: f64,
    from: f64,
    to: f64,
    mut state: impl FnMut(f64) -> SampleState,
) -> Result<()> {
    if dt <= 0.0 || to <= from {
        return Ok(());
    }
    let mut i = (from / dt).ceil() as u64;
    loop {
        let t = i as f64 * dt;
        if t >= to {
            return Ok(());
        }
        if samples.len() >= MAX_SAMPLES {
            return Err(ModelError::InvalidParameter(format!(
                "more than {MAX_SAMPLES} samples requested; increase sample_dt"
            )));
        }
        samples.push(TimedSample { t, state: state(t - from) });
        i += 1;
    }
}

/// Time needed for the orbit of `w` to make `k` full passages and complete
/// its next visit to the block, plus one tube time of margin.
pub fn passage_horizon(w: &WallPoint, k: usize, model: &Model) -> Result<f64> {
    let e = model.spectrum.e();
    let tau = model.transition.tau();
    let mut p = LogPoint::from_wall(w)?;
    let mut t = 0.0;
    for _ in 0..k {
        t += -p.ln_h / e + tau;
        p = match model.log_return(&p) {
            LogStep::Point(q) => q,
            // The orbit stays in the block from here on.
            LogStep::Stable => return Ok(t + tau),
            LogStep::LeftNeighbourhood(h) => return Err(ModelError::LeftNeighbourhood(h)),
            LogStep::NonTransverse(h) => return Err(ModelError::NonTransverse(h)),
            LogStep::OutsideFlowBox(r) => {
                return Err(ModelError::OutsideFlowBox { r, r_max: model.transition.r_max() })
            }
        };
    }
    Ok(t + -p.ln_h / e + 2.0 * tau)
}

pub fn suspend_orbit(
    w: &WallPoint,
    horizon: f64,
    sample_dt: f64,
    model: &Model,
) -> Result<SuspendedTrajectory> {
    if !(horizon > 0.0) {
        return Err(ModelError::InvalidParameter(format!("horizon = {horizon} must be positive")));
    }
    let spec = model.spectrum;
    let tau = model.transition.tau();
    let (c, e, alpha) = (spec.c(), spec.e(), spec.alpha());
    let mut p = LogPoint::from_wall(w)?;
    let mut samples = Vec::new();
    let mut events = vec![SectionEvent::SigmaIn {
        t: 0.0,
        x: w.x,
        ln_abs_y: p.ln_h,
        symbol: Some(p.symbol()),
    }];
    let mut tubes = Vec::new();
    let mut t = 0.0;
    loop {
        let flight = -p.ln_h / e;
        let (x0, l0, sign) = (p.x, p.ln_h, if p.up { 1.0 } else { -1.0 });
        push_grid(&mut samples, sample_dt, t, (t + flight).min(horizon), |s| SampleState::Block {
            rho: (-c * s).exp(),
            theta: wrap_angle(x0 + alpha * s),
            z: sign * (l0 + e * s).exp(),
        })?;
        if t + flight > horizon {
            break;
        }
        let t_out = t + flight;
        let r = (spec.delta() * p.ln_h).exp();
        let cap = if p.up { Cap::Top } else { Cap::Bottom };
        events.push(SectionEvent::SigmaOut {
            t: t_out,
            r,
            phi: p.x - spec.winding() * p.ln_h,
            cap,
        });
        let connection = p.symbol();
        let next = match model.log_return(&p) {
            LogStep::Point(q) => Some(q),
            LogStep::Stable => None,
            LogStep::LeftNeighbourhood(h) => return Err(ModelError::LeftNeighbourhood(h)),
            LogStep::NonTransverse(h) => return Err(ModelError::NonTransverse(h)),
            LogStep::OutsideFlowBox(r) => {
                return Err(ModelError::OutsideFlowBox { r, r_max: model.transition.r_max() })
            }
        };
        let entry = match &next {
            Some(q) => q.to_wall(),
            None => WallPoint { x: f64::NAN, y: 0.0 },
        };
        let passage = TubePassage {
            connection,
            t_start: t_out,
            t_end: t_out + tau,
            exit_offset: r,
            entry_offset: if next.is_some() { entry_offset(&entry, connection) } else { f64::NAN },
        };
        push_grid(&mut samples, sample_dt, t_out, passage.t_end.min(horizon), |s| {
            let phase = s / tau;
            SampleState::Tube { connection, phase, offset: passage.offset_at(phase) }
        })?;
        tubes.push(passage);
        t = passage.t_end;
        if t > horizon {
            break;
        }
        match next {
            Some(q) => {
                events.push(SectionEvent::SigmaIn {
                    t,
                    x: wrap_angle(q.x),
                    ln_abs_y: q.ln_h,
                    symbol: Some(q.symbol()),
                });
                p = LogPoint { x: wrap_angle(q.x), ..q };
            }
            None => {
                // Landed on the stable manifold: the orbit never leaves.
                events.push(SectionEvent::SigmaIn {
                    t,
                    x: entry.x,
                    ln_abs_y: f64::NEG_INFINITY,
                    symbol: None,
                });
                let x0 = entry.x;
                push_grid(&mut samples, sample_dt, t, horizon, |s| SampleState::Block {
                    rho: (-c * s).exp(),
                    theta: wrap_angle(x0 + alpha * s),
                    z: 0.0,
                })?;
                break;
            }
        }
    }
    Ok(SuspendedTrajectory { tau, horizon, samples, events, tubes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::time_of_flight;

    #[test]
    fn events_alternate_with_exact_times() {
        let model = Model::default();
        let w = WallPoint { x: 0.3, y: 0.2 };
        let traj = suspend_orbit(&w, 30.0, 0.05, &model).unwrap();
        assert!(traj.events.len() >= 4);
        for pair in traj.events.windows(2) {
            match (pair[0], pair[1]) {
                (SectionEvent::SigmaIn { t: a, x, ln_abs_y, .. }, SectionEvent::SigmaOut { t: b, .. }) => {
                    let y = ln_abs_y.exp();
                    let tof = time_of_flight(&WallPoint { x, y }, &model.spectrum).unwrap();
                    assert!(((b - a) - tof).abs() <= 1e-10 * tof.max(1.0));
                }
                (SectionEvent::SigmaOut { t: a, .. }, SectionEvent::SigmaIn { t: b, .. }) => {
                    assert!(((b - a) - model.transition.tau()).abs() < 1e-12 * b.max(1.0));
                }
                other => panic!("events do not alternate: {other:?}"),
            }
        }
        assert!(traj.samples.windows(2).all(|s| s[0].t < s[1].t));
        assert!(traj.samples.iter().all(|s| s.t <= 30.0));
    }

    #[test]
    fn tube_offsets_interpolate() {
        let model = Model::default();
        let traj = suspend_orbit(&WallPoint { x: 0.0, y: 0.1 }, 10.0, 0.0, &model).unwrap();
        assert!(traj.samples.is_empty());
        let tube = traj.tubes[0];
        assert_eq!(tube.connection, Symbol::Gamma1);
        assert!((tube.exit_offset - 0.01).abs() < 1e-15);
        assert!((tube.offset_at(0.5) - 0.5 * (tube.exit_offset + tube.entry_offset)).abs() < 1e-16);
    }

    #[test]
    fn horizon_covers_requested_passages() {
        let model = Model::default();
        let w = WallPoint { x: 1.2, y: 0.3 };
        let h = passage_horizon(&w, 3, &model).unwrap();
        let traj = suspend_orbit(&w, h, 0.0, &model).unwrap();
        let ins = traj.events.iter().filter(|e| matches!(e, SectionEvent::SigmaIn { .. })).count();
        let outs = traj.events.iter().filter(|e| matches!(e, SectionEvent::SigmaOut { .. })).count();
        assert_eq!((ins, outs), (5, 4));
    }

    #[test]
    fn rejects_bad_input() {
        let model = Model::default();
        assert!(suspend_orbit(&WallPoint { x: 0.0, y: 0.0 }, 1.0, 0.1, &model).is_err());
        assert!(suspend_orbit(&WallPoint { x: 0.0, y: 0.1 }, 0.0, 0.1, &model).is_err());
    }
}
