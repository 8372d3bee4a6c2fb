//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary lines are
//! printed in order and the exit status reflects every criterion.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command as Proc, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hswitch::audit::{
    attractor_scan, contraction_profile, horseshoe_contrast, horseshoe_scan, log_grid, periodic_orbit_search,
    stability_sample, HorseshoeOptions, OrbitKind, ScanOptions, SearchOptions, StabilityOptions, WallRect,
};
use hswitch::commands::{run_command, Command, SeedArgs};
use hswitch::config::RunConfig;
use hswitch::geometry::{
    angle_diff, apply_symmetry, local_flow, local_map, time_of_flight, Cap, CylinderPoint, SaddleSpectrum,
    WallPoint,
};
use hswitch::itinerary::{ItineraryPath, StreamKind};
use hswitch::maps::{Model, StopRule, TransitionSpec};
use hswitch::records::{emit_records, Format};
use hswitch::suspension::{passage_horizon, suspend_orbit};
use hswitch::switching::{
    find_crossings, realize_infinite_prefix, realize_path, verify_follows, Neighbourhoods, RealizeMode,
    RealizeOptions, Segment, SwitchTolerances,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20240601);
    r.set_stream(stream);
    r
}

fn random_wall(r: &mut ChaCha8Rng, ln_min: f64) -> WallPoint {
    let x = r.gen::<f64>() * TAU;
    let h = (ln_min * r.gen::<f64>()).exp().min(1.0 - 1e-9);
    WallPoint { x, y: if r.gen::<bool>() { h } else { -h } }
}

/// Classical RK4 on the linear field in Cartesian coordinates, stopped
/// where `|z| = 1` by Newton iteration on a shortened final step.
fn integrate_to_cap(w: &WallPoint, spec: &SaddleSpectrum, h: f64) -> (f64, [f64; 3]) {
    let (c, e, a) = (spec.c(), spec.e(), spec.alpha());
    let f = |s: [f64; 3]| [-c * s[0] - a * s[1], a * s[0] - c * s[1], e * s[2]];
    let step = |s: [f64; 3], dt: f64| {
        let add = |s: [f64; 3], k: [f64; 3], m: f64| [s[0] + m * k[0], s[1] + m * k[1], s[2] + m * k[2]];
        let k1 = f(s);
        let k2 = f(add(s, k1, dt / 2.0));
        let k3 = f(add(s, k2, dt / 2.0));
        let k4 = f(add(s, k3, dt));
        [0, 1, 2].map(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    };
    let mut s = [w.x.cos(), w.x.sin(), w.y];
    let mut t = 0.0;
    loop {
        let next = step(s, h);
        if next[2].abs() >= 1.0 {
            let mut dt = h * (1.0 - s[2].abs()) / (next[2].abs() - s[2].abs());
            for _ in 0..50 {
                let z = step(s, dt)[2].abs();
                let corr = (z - 1.0) / (e * z);
                dt -= corr;
                if corr.abs() < 1e-17 {
                    break;
                }
            }
            return (t + dt, step(s, dt));
        }
        s = next;
        t += h;
    }
}

fn criterion_1() -> Check {
    let spec = SaddleSpectrum::canonical();
    let n = 10_000;
    let worst: Vec<(f64, f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = random_wall(&mut rng(i as u64), -4.0 * std::f64::consts::LN_10);
            let cap = local_map(&w, &spec).unwrap();
            let tof = time_of_flight(&w, &spec).unwrap();
            let closed = (1.0 / spec.e()) * (1.0 / w.y.abs()).ln();
            let (t_int, s) = integrate_to_cap(&w, &spec, 1e-3);
            let r_int = s[0].hypot(s[1]);
            let phi_int = s[1].atan2(s[0]);
            let flow = local_flow(&CylinderPoint { rho: 1.0, theta: w.x, z: w.y }, tof, &spec);
            let cap_ok = (cap.cap == Cap::Top) == (w.y > 0.0) && (s[2] > 0.0) == (w.y > 0.0);
            let r_err = ((cap.r - r_int) / r_int).abs().max(((cap.r - flow.rho) / flow.rho).abs());
            let phi_err = angle_diff(cap.phi, phi_int).abs().max(angle_diff(cap.phi, flow.theta).abs())
                / cap.phi.abs().max(1.0);
            let t_closed = ((tof - closed) / closed).abs();
            let t_int_err = ((tof - t_int) / tof).abs();
            (if cap_ok { r_err.max(phi_err) } else { f64::INFINITY }, t_closed, t_int_err, tof)
        })
        .collect();
    let map_err = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let closed_err = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let int_err = worst.iter().map(|w| w.2).fold(0.0, f64::max);
    ensure(map_err < 1e-9, || format!("local map vs integration rel err {map_err:e}"))?;
    ensure(closed_err == 0.0, || format!("flight time vs closed form {closed_err:e}"))?;
    ensure(int_err < 1e-10, || format!("flight time vs integration {int_err:e}"))?;
    Ok(format!("{n} points: map err {map_err:.1e}, T closed {closed_err:.1e}, T integrated {int_err:.1e}"))
}

fn criterion_2() -> Check {
    let models = [
        Model::default(),
        Model::new(
            SaddleSpectrum::new(3.0, 1.3, 2.2).unwrap(),
            TransitionSpec::new([[0.8, 0.3], [-0.2, 0.9]], 0.02, 1.0, 1.0).unwrap(),
        ),
    ];
    let n = 10_000;
    let mut max_err = 0.0f64;
    let mut compared = 0;
    for (mi, model) in models.iter().enumerate() {
        let res: Vec<Result<Option<f64>, String>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let w = random_wall(&mut rng(1_000_000 * (mi as u64 + 1) + i as u64), -12.0);
                let a = model.return_map(&apply_symmetry(&w));
                let b = model.return_map(&w);
                match (a, b) {
                    (Ok((pa, sa)), Ok((pb, sb))) => {
                        let mb = apply_symmetry(&pb);
                        if sa != sb.swapped() {
                            return Err(format!("symbol not swapped at {w:?}"));
                        }
                        Ok(Some(angle_diff(pa.x, mb.x).abs().max((pa.y - mb.y).abs())))
                    }
                    (Err(ea), Err(eb)) if std::mem::discriminant(&ea) == std::mem::discriminant(&eb) => Ok(None),
                    (a, b) => Err(format!("asymmetric outcome at {w:?}: {a:?} vs {b:?}")),
                }
            })
            .collect();
        for r in res {
            if let Some(e) = r? {
                max_err = max_err.max(e);
                compared += 1;
            }
        }
    }
    ensure(max_err < 1e-12, || format!("max error {max_err:e}"))?;
    Ok(format!("{compared} symmetric pairs over 2 models, max error {max_err:.1e}"))
}

fn criterion_3() -> Check {
    let model = Model::default();
    let seg = Segment::default();
    let a = find_crossings(&seg, 6, &model, &SwitchTolerances::default()).map_err(|e| e.to_string())?;
    let rate = model.spectrum.e() / model.spectrum.alpha();
    let mut worst = 0.0f64;
    for (i, v) in a.iter().enumerate() {
        let z = (-((i + 1) as f64) * PI * rate).exp();
        worst = worst.max((v - z).abs() / z);
    }
    ensure(worst < 1e-10, || format!("crossing rel err {worst:e}"))?;
    let mut ends = vec![1.0];
    ends.extend(&a);
    for (i, w) in ends.windows(2).enumerate() {
        let want = i % 2 == 0;
        for f in [0.25, 0.5, 0.75] {
            let s = (w[1].ln() + f * (w[0].ln() - w[1].ln())).exp();
            let (img, sym) = model.return_map(&seg.point(&model, s).unwrap().to_wall()).map_err(|e| e.to_string())?;
            ensure((img.y > 0.0) == want, || format!("interval {i} sample {f}: y = {}", img.y))?;
            let _ = sym;
        }
    }
    Ok(format!("a_1..a_6 rel err {worst:.1e}; sides alternate on 6 intervals"))
}

fn check_witness(model: &Model, w: &WallPoint, path: &ItineraryPath) -> Result<(), String> {
    let rec = model.iterate(w, path.order(), &StopRule::unbounded());
    let got = rec.symbols();
    ensure(&got == path, || format!("witness of {path} iterates to {got}"))
}

fn criterion_4() -> Check {
    let model = Model::default();
    let seed = Arc::new(Segment::default());
    let opts = RealizeOptions::default();
    let run = |k: usize, mode: RealizeMode| -> Result<usize, String> {
        let paths = ItineraryPath::all_of_order(k);
        let results: Vec<Result<(), String>> = paths
            .par_iter()
            .map(|p| {
                let r = realize_path(p, seed.clone(), mode, &model, &opts).map_err(|e| format!("{p}: {e}"))?;
                check_witness(&model, &r.witness, p)
            })
            .collect();
        for r in results {
            r?;
        }
        Ok(paths.len())
    };
    let n6 = run(6, RealizeMode::Nested)?;
    let n10 = run(10, RealizeMode::Reseeded)?;
    Ok(format!("{n6}/64 order-6 nested, {n10}/1024 order-10 reseeded, all witnesses verified"))
}

fn criterion_5() -> Check {
    let model = Model::default();
    let seed = Arc::new(Segment::default());
    let opts = RealizeOptions::default();
    let mut out = Vec::new();
    for kind in [StreamKind::Constant, StreamKind::Alternating, StreamKind::ThueMorse] {
        let r = realize_infinite_prefix(kind.symbols(), 10, seed.clone(), RealizeMode::Reseeded, &model, &opts)
            .map_err(|e| format!("{kind:?}: {e}"))?;
        ensure(r.widths_strictly_decreasing, || format!("{kind:?}: widths {:?}", r.realization.widths))?;
        let want: ItineraryPath = kind.symbols().take(10).collect();
        check_witness(&model, &r.realization.witness, &want)?;
        out.push(format!("{kind:?} ok"));
    }
    let path: ItineraryPath = "121".parse().unwrap();
    let a = realize_path(&path, seed.clone(), RealizeMode::Nested, &model, &opts).map_err(|e| e.to_string())?;
    let b = realize_path(&path, seed, RealizeMode::Nested, &model, &RealizeOptions { ring_rank: 1, ..opts })
        .map_err(|e| e.to_string())?;
    check_witness(&model, &a.witness, &path)?;
    check_witness(&model, &b.witness, &path)?;
    ensure(a.witness != b.witness, || "witnesses coincide".into())?;
    ensure(a.revolution_counts() != b.revolution_counts(), || "revolution counts coincide".into())?;
    Ok(format!(
        "{}; order-3 witnesses revolutions {:?} vs {:?}",
        out.join(", "),
        a.revolution_counts(),
        b.revolution_counts()
    ))
}

fn criterion_6() -> Check {
    let opts = StabilityOptions { samples: 10_000, y_max: 0.5, threshold: 1e-12, ..Default::default() };
    let r = stability_sample(&Model::default(), &opts).map_err(|e| e.to_string())?;
    ensure(r.attracted == r.samples, || format!("{} of {} attracted", r.attracted, r.samples))?;
    ensure(r.escaped == 0, || format!("{} escapes", r.escaped))?;
    ensure(r.max_steps_to_attract <= 7, || format!("slowest orbit took {} returns", r.max_steps_to_attract))?;
    ensure(r.all_monotone, || "an orbit revisited a higher level".into())?;
    Ok(format!("{}/{} attracted, max {} returns, 0 escapes", r.attracted, r.samples, r.max_steps_to_attract))
}

fn criterion_7() -> Check {
    let canon = Model::default();
    let grid = log_grid(1e-8, 1e-2, 25);
    let prof = contraction_profile(&grid, &canon).map_err(|e| e.to_string())?;
    ensure((prof.slope - 1.0).abs() <= 0.05, || format!("slope {}", prof.slope))?;
    let search = periodic_orbit_search(&canon, &SearchOptions::default()).map_err(|e| e.to_string())?;
    ensure(search.orbits.iter().all(|o| o.max_multiplier() < 1.0), || {
        format!("non-attracting orbit found: {:?}", search.orbits.iter().find(|o| o.max_multiplier() >= 1.0))
    })?;
    let hs = HorseshoeOptions::default();
    let mut rects: Vec<WallRect> = horseshoe_scan(&canon, &hs)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|r| r.double_crossing)
        .map(|r| r.rect)
        .collect();
    ensure(rects.is_empty(), || format!("double crossing at {:?}", rects[0]))?;
    for (y0, y1) in [(0.01, 0.5), (0.01, 0.1), (0.1, 0.5), (0.2, 0.3)] {
        for x0 in [-0.5, 1.0, 3.0] {
            rects.push(WallRect::new(x0, 1.0, y0, y1).unwrap());
            rects.push(WallRect::new(x0, 1.0, -y1, -y0).unwrap());
        }
    }
    for r in &rects {
        let rep = horseshoe_contrast(r, &canon, &hs).map_err(|e| e.to_string())?;
        ensure(!rep.double_crossing, || format!("double crossing at {r:?}"))?;
    }

    let contrast = Model::new(SaddleSpectrum::contrast(1.0, 2.0, 1.0).unwrap(), TransitionSpec::default());
    let cprof = contraction_profile(&grid, &contrast).map_err(|e| e.to_string())?;
    ensure((cprof.slope + 0.5).abs() <= 0.025, || format!("contrast slope {}", cprof.slope))?;
    let csearch = periodic_orbit_search(&contrast, &SearchOptions { max_period: 2, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let saddles = csearch.count(OrbitKind::Saddle);
    ensure(saddles >= 1, || "no saddle periodic point in contrast run".into())?;
    let cscan = horseshoe_scan(&contrast, &hs).map_err(|e| e.to_string())?;
    let doubles = cscan.iter().filter(|r| r.double_crossing).count();
    ensure(doubles >= 1, || "no double crossing in contrast run".into())?;
    Ok(format!(
        "slope {:.4}, {} orbits none unstable, 0 double crossings; contrast slope {:.4}, {saddles} saddles, {doubles} double crossings",
        prof.slope,
        search.orbits.len(),
        cprof.slope
    ))
}

fn criterion_8() -> Check {
    let scan = attractor_scan(&[1e-3, 1e-2], &Model::default(), &ScanOptions::default()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for e in &scan {
        ensure(matches!(e.attractor_count, 1 | 2), || format!("mu = {}: {} attractors", e.mu, e.attractor_count))?;
        ensure(e.report.symmetric, || format!("mu = {}: attractor set not symmetric", e.mu))?;
        ensure(e.max_transient_switches >= 3, || format!("mu = {}: transients switch at most {} times", e.mu, e.max_transient_switches))?;
        parts.push(format!(
            "mu {:.0e}: {} attractors, transient {}",
            e.mu,
            e.attractor_count,
            e.longest_transient.as_ref().map(|t| t.itinerary.to_string()).unwrap_or_default()
        ));
    }
    Ok(parts.join("; "))
}

fn criterion_9() -> Check {
    let model = Model::default();
    let path: ItineraryPath = "121".parse().unwrap();
    let r = realize_path(&path, Arc::new(Segment::default()), RealizeMode::Nested, &model, &RealizeOptions::default())
        .map_err(|e| e.to_string())?;
    let horizon = passage_horizon(&r.witness, path.order(), &model).map_err(|e| e.to_string())?;
    let traj = suspend_orbit(&r.witness, horizon, 0.0, &model).map_err(|e| e.to_string())?;
    let nb = Neighbourhoods::default();
    let own = verify_follows(&traj, &path, &nb).map_err(|e| e.to_string())?;
    ensure(own.follows, || format!("own path rejected: {:?}", own.violation))?;
    ensure(own.t_values.len() == 4 && own.z_values.len() == 3, || "wrong number of times".into())?;
    for j in 0..3 {
        let mut syms = path.symbols().to_vec();
        syms[j] = syms[j].swapped();
        let other = ItineraryPath::new(syms);
        let rep = verify_follows(&traj, &other, &nb).map_err(|e| e.to_string())?;
        ensure(!rep.follows, || format!("{other} accepted"))?;
        ensure(rep.violation.as_ref().map(|v| v.j) == Some(j + 1), || format!("{other}: {:?}", rep.violation))?;
    }
    Ok("witness of 121 follows 121 (4 t, 3 z); 221, 111, 122 rejected at the flipped symbol".into())
}

fn criterion_10() -> Check {
    let cfg = RunConfig::default();
    let commands = [
        Command::AuditStability { samples: 2000, y_min: 0.0, y_max: 0.5, max_returns: 64, threshold: 1e-12 },
        Command::Attractors { mus: vec![1e-3, 1e-2], starts: 64, y_min: 0.5, y_max: 0.95 },
        Command::Crossings { k: 6, seed: SeedArgs { x0: 0.0, y0: 1.0 } },
        Command::Realize {
            path: "1211".parse().unwrap(),
            mode: RealizeMode::Reseeded,
            rank: 0,
            seed: SeedArgs { x0: 0.0, y0: 1.0 },
        },
    ];
    let bytes = |c: &Command| -> Result<Vec<u8>, String> {
        let out = run_command(c, &cfg).map_err(|e| e.to_string())?;
        emit_records(&out.records, Format::Jsonl).map_err(|e| e.to_string())
    };
    for c in &commands {
        let a = bytes(c)?;
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
        let b = single.install(|| bytes(c))?;
        ensure(a == b, || format!("{} differs between runs", c.name()))?;
    }
    let bin = env!("CARGO_BIN_EXE_hswitch");
    let run = || {
        Proc::new(bin)
            .args(["--seed", "7", "audit-stability", "--samples", "500"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || "binary failed".into())?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "binary output differs".into())?;
    Ok(format!("{} commands byte-identical across runs and thread counts; binary stable", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("model fidelity", criterion_1, Some(Duration::from_secs(5))),
        ("equivariance", criterion_2, Some(Duration::from_secs(5))),
        ("crossing law", criterion_3, None),
        ("finite switching", criterion_4, Some(Duration::from_secs(120))),
        ("infinite switching prefix", criterion_5, None),
        ("asymptotic stability", criterion_6, None),
        ("horseshoe absence", criterion_7, None),
        ("splitting attractors", criterion_8, None),
        ("follows verifier", criterion_9, None),
        ("determinism", criterion_10, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let took = start.elapsed();
        let res = match (res, limit) {
            (Ok(_), Some(l)) if took > *l => Err(format!("took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match res {
            Ok(detail) => println!("PASS {:>2} {name} ({took:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2?}): {detail}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
