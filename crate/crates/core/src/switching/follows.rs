//! Checks whether a suspended trajectory follows a symbolic path: alternate
//! visits to the block around the saddle and to windows on the connections,
//! with exactly one block passage between consecutive connection visits.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::itinerary::{ItineraryPath, Symbol};
use crate::suspension::{SectionEvent, SuspendedTrajectory};

/// Sizes of the neighbourhoods used by [`verify_follows`].
///
/// The block around the saddle is the isolating block itself. The window
/// around each connection is the part of its tube with phase within
/// `window` of the middle and offset at most `tube_radius`. The network
/// neighbourhood is the block plus the tubes with offset at most
/// `network_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Neighbourhoods {
    pub tube_radius: f64,
    pub window: f64,
    pub network_radius: f64,
}

impl Default for Neighbourhoods {
    fn default() -> Self {
        Self { tube_radius: 0.1, window: 0.25, network_radius: 1.0 }
    }
}

impl Neighbourhoods {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::InvalidNeighbourhoods(m.to_string()));
        if !(self.tube_radius > 0.0 && self.tube_radius < 1.0) {
            return bad("tube_radius must lie in (0, 1)");
        }
        // Windows reaching phase 0 or 1 would touch the block.
        if !(self.window > 0.0 && self.window < 0.5) {
            return bad("window must lie in (0, 0.5) so connection windows avoid the block");
        }
        if !(self.network_radius >= self.tube_radius) || !self.network_radius.is_finite() {
            return bad("network_radius must be finite and at least tube_radius");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowsViolation {
    /// 1-based index of the symbol (or block visit) where the check failed.
    pub j: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowsReport {
    pub follows: bool,
    pub t_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub violation: Option<FollowsViolation>,
}

/// Closed time intervals spent inside the block.
fn block_visits(traj: &SuspendedTrajectory) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for ev in &traj.events {
        match ev {
            SectionEvent::SigmaIn { t, .. } => open = Some(*t),
            SectionEvent::SigmaOut { t, .. } => {
                if let Some(a) = open.take() {
                    out.push((a, *t));
                }
            }
        }
    }
    if let Some(a) = open {
        out.push((a, traj.horizon.max(a)));
    }
    out
}

pub fn verify_follows(
    traj: &SuspendedTrajectory,
    path: &ItineraryPath,
    nb: &Neighbourhoods,
) -> Result<FollowsReport> {
    nb.validate()?;
    let k = path.order();
    let blocks = block_visits(traj);
    let mut report = FollowsReport { follows: false, t_values: Vec::new(), z_values: Vec::new(), violation: None };
    let fail = |mut r: FollowsReport, j: usize, reason: String| {
        r.violation = Some(FollowsViolation { j, reason });
        Ok(r)
    };

    // t_j: middle of the j-th block visit; z_j: middle of the j-th tube.
    for j in 0..=k {
        let Some(&(a, b)) = blocks.get(j) else {
            return fail(report, j + 1, format!("trajectory has only {} block visits", blocks.len()));
        };
        report.t_values.push(0.5 * (a + b));
        if j == k {
            break;
        }
        let Some(tube) = traj.tubes.get(j) else {
            return fail(report, j + 1, "trajectory ends before the connection visit".into());
        };
        let want = path.symbols()[j];
        if tube.connection != want {
            return fail(
                report,
                j + 1,
                format!("visits connection {} instead of {}", tube.connection.as_char(), want.as_char()),
            );
        }
        let z = 0.5 * (tube.t_start + tube.t_end);
        let off = tube.offset_at(0.5);
        if !(off <= nb.tube_radius) {
            return fail(report, j + 1, format!("offset {off:e} at the window exceeds tube radius"));
        }
        // Offsets are affine in the phase, so the end points bound the tube.
        let worst = tube.exit_offset.max(tube.entry_offset);
        if !(worst <= nb.network_radius) {
            return fail(report, j + 1, format!("tube offset {worst:e} leaves the network neighbourhood"));
        }
        report.z_values.push(z);
    }

    let ordered = report
        .t_values
        .iter()
        .zip(&report.z_values)
        .zip(report.t_values.iter().skip(1))
        .position(|((t, z), t1)| !(t < z && z < t1));
    if let Some(j) = ordered {
        return fail(report, j + 1, "times are not interleaved".into());
    }

    // Between consecutive connection visits the trajectory must be in the
    // block during exactly one subinterval.
    for j in 0..k.saturating_sub(1) {
        let (z0, z1) = (report.z_values[j], report.z_values[j + 1]);
        let inside: Vec<&SectionEvent> =
            traj.events.iter().filter(|e| e.t() > z0 && e.t() < z1).collect();
        let single = matches!(
            inside.as_slice(),
            [SectionEvent::SigmaIn { .. }, SectionEvent::SigmaOut { .. }]
        );
        if !single {
            return fail(report, j + 1, format!("{} section crossings between visits", inside.len()));
        }
    }
    report.follows = true;
    Ok(report)
}

/// The symbol whose window contains the middle of each tube, in order.
pub fn visited_connections(traj: &SuspendedTrajectory) -> Vec<Symbol> {
    traj.tubes.iter().map(|t| t.connection).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WallPoint;
    use crate::maps::Model;
    use crate::suspension::suspend_orbit;

    #[test]
    fn empty_path_is_vacuous() {
        let model = Model::default();
        let traj = suspend_orbit(&WallPoint { x: 0.3, y: 0.2 }, 5.0, 0.0, &model).unwrap();
        let r = verify_follows(&traj, &ItineraryPath::default(), &Neighbourhoods::default()).unwrap();
        assert!(r.follows);
        assert_eq!(r.t_values.len(), 1);
        assert!(r.z_values.is_empty());
    }

    #[test]
    fn own_connections_are_followed() {
        let model = Model::default();
        let traj = suspend_orbit(&WallPoint { x: 1.2, y: 0.3 }, 20.0, 0.0, &model).unwrap();
        let seen: ItineraryPath = visited_connections(&traj).into_iter().take(2).collect();
        let r = verify_follows(&traj, &seen, &Neighbourhoods::default()).unwrap();
        assert!(r.follows, "{r:?}");
        assert_eq!(r.t_values.len(), 3);
        let wrong = seen.swapped();
        let r = verify_follows(&traj, &wrong, &Neighbourhoods::default()).unwrap();
        assert!(!r.follows);
        assert_eq!(r.violation.unwrap().j, 1);
    }

    #[test]
    fn rejects_overlapping_neighbourhoods() {
        let model = Model::default();
        let traj = suspend_orbit(&WallPoint { x: 0.3, y: 0.2 }, 5.0, 0.0, &model).unwrap();
        for nb in [
            Neighbourhoods { window: 0.5, ..Default::default() },
            Neighbourhoods { tube_radius: 1.5, ..Default::default() },
            Neighbourhoods { network_radius: 0.01, ..Default::default() },
        ] {
            assert!(matches!(
                verify_follows(&traj, &ItineraryPath::default(), &nb),
                Err(ModelError::InvalidNeighbourhoods(_))
            ));
        }
    }
}
