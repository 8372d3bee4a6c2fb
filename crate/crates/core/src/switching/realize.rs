//! Crossing tables, admissible intervals and realization of symbolic paths.
//!
//! The `j`-th symbol of a path is the side on which the `j`-th return of the
//! seed point lands, so a witness `w = R(beta(s))` emits the path when
//! iterated.

use std::f64::consts::TAU;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::WallPoint;
use crate::itinerary::{ItineraryPath, Symbol};
use crate::maps::{LogPoint, LogStep, Model};
use crate::precision::{Arith, Binary64, Extended, PrecisionMode};

use super::engine::{Engine, Ring, SwitchTolerances};
use super::segment::Segment;

/// Zero parameters of `y o R o beta`, decreasing in `s`.
pub fn find_crossings(
    seg: &Segment,
    k_max: usize,
    model: &Model,
    tol: &SwitchTolerances,
) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(ModelError::InvalidParameter("k_max must be at least 1".into()));
    }
    let mut e = Engine::new(Binary64, model, seg, *tol);
    let (rings, _) = e.top_rings(|r| r.len() >= k_max);
    let zeros: Vec<f64> = rings
        .iter()
        .filter_map(|r| r.lo_bracket.map(|(a, b)| 0.5 * (a + b)))
        .collect();
    if zeros.len() < k_max {
        return Err(ModelError::PrecisionExhausted { found: zeros.len(), wanted: k_max });
    }
    Ok(zeros)
}

/// `|y(R(beta(s)))|`, computed in ordinary coordinates.
pub fn crossing_residual(seg: &Segment, s: f64, model: &Model) -> f64 {
    seg.point(model, s)
        .map(|p| match model.log_return(&p) {
            LogStep::Point(q) => q.ln_h.exp(),
            _ => 0.0,
        })
        .unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizeMode {
    Nested,
    Reseeded,
}

impl FromStr for RealizeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nested" => Ok(RealizeMode::Nested),
            "reseeded" => Ok(RealizeMode::Reseeded),
            _ => Err(format!("unknown mode {s:?} (nested, reseeded)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub depth: usize,
    /// Zeros bounding the ring, as bracket midpoints.
    pub zero_lo: f64,
    pub zero_hi: f64,
    pub probes: usize,
}

/// Parameter interval on a seed segment realizing a symbolic prefix.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleInterval {
    #[serde(skip)]
    pub seed: Arc<Segment>,
    /// Bracketed ring: every point of it realizes `realized`.
    pub ring: [f64; 2],
    /// Ring ends in the working precision.
    pub ring_exact: [String; 2],
    /// Closed core of the ring.
    pub interval: [f64; 2],
    pub realized: ItineraryPath,
    pub depth: usize,
    pub brackets: Vec<BracketRecord>,
    pub precision: PrecisionMode,
}

impl AdmissibleInterval {
    pub fn width(&self) -> f64 {
        self.ring[1] - self.ring[0]
    }
}

/// Options shared by the realization entry points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizeOptions {
    pub precision: PrecisionMode,
    /// Which matching ring to use at depth 1, counted from the outermost.
    pub ring_rank: usize,
    pub tol: SwitchTolerances,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self { precision: PrecisionMode::Binary64, ring_rank: 0, tol: SwitchTolerances::default() }
    }
}

/// One level of the reseeded construction, in that level's own parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReseedLevel {
    pub ring: [f64; 2],
    /// End of the branch carried to the next level; `None` at the last level.
    pub apex: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Realization {
    pub path: ItineraryPath,
    pub mode: RealizeMode,
    pub precision: PrecisionMode,
    /// Nested mode: one interval per depth.
    pub intervals: Vec<AdmissibleInterval>,
    /// Nested mode: closed admissible sets, nested along the path.
    pub admissible: Vec<[f64; 2]>,
    /// Reseeded mode: per-level rings.
    pub levels: Vec<ReseedLevel>,
    /// Width of the realizing set per depth, in seed parameter units.
    pub widths: Vec<f64>,
    pub seed_parameter: f64,
    pub witness: WallPoint,
    pub witness_ln_abs_y: f64,
    /// Symbols emitted by the witness, computed in the working precision.
    pub witness_symbols: ItineraryPath,
    /// Unwrapped exit angle over `2pi` for the seed passage and each of the
    /// witness passages.
    pub revolutions: Vec<f64>,
}

impl Realization {
    pub fn verified(&self) -> bool {
        self.witness_symbols == self.path
    }

    /// Whole turns per passage.
    pub fn revolution_counts(&self) -> Vec<i64> {
        self.revolutions.iter().map(|r| r.floor() as i64).collect()
    }
}

fn sides_of(path: &ItineraryPath) -> Vec<bool> {
    path.symbols().iter().map(|s| *s == Symbol::Gamma1).collect()
}

fn symbol(up: bool) -> Symbol {
    if up {
        Symbol::Gamma1
    } else {
        Symbol::Gamma2
    }
}

fn check_model(model: &Model) -> Result<()> {
    if model.transition.mu() != 0.0 {
        return Err(ModelError::InvalidParameter(
            "path realization needs an intact network (mu = 0)".into(),
        ));
    }
    Ok(())
}

struct Level<N> {
    ring: Ring<N>,
}

fn zero<A: Arith>(ar: &A, bracket: &Option<(A::Num, A::Num)>, end: &A::Num) -> f64 {
    match bracket {
        Some((a, b)) => 0.5 * (ar.to_f64(a) + ar.to_f64(b)),
        None => ar.to_f64(end),
    }
}

fn bracket_record<A: Arith>(ar: &A, depth: usize, ring: &Ring<A::Num>) -> BracketRecord {
    BracketRecord {
        depth,
        zero_lo: zero(ar, &ring.lo_bracket, &ring.lo),
        zero_hi: zero(ar, &ring.hi_bracket, &ring.hi),
        probes: ring.probes,
    }
}

fn interval_from<A: Arith>(
    e: &mut Engine<'_, A>,
    seed: &Arc<Segment>,
    ring: &Ring<A::Num>,
    realized: ItineraryPath,
    brackets: Vec<BracketRecord>,
) -> AdmissibleInterval {
    let (c0, c1) = e.core(&ring.lo, &ring.hi);
    AdmissibleInterval {
        seed: seed.clone(),
        ring: [e.ar.to_f64(&ring.lo), e.ar.to_f64(&ring.hi)],
        ring_exact: [e.ar.render(&ring.lo), e.ar.render(&ring.hi)],
        interval: [e.ar.to_f64(&c0), e.ar.to_f64(&c1)],
        depth: realized.order(),
        realized,
        brackets,
        precision: e.ar.mode(),
    }
}

/// Depth-1 ring: the `rank`-th ring of side `up` counted from `s = 1`.
fn first_level<A: Arith>(e: &mut Engine<'_, A>, up: bool, rank: usize) -> Result<Ring<A::Num>> {
    let (rings, _) = e.top_rings(|r| r.iter().filter(|x| x.up == up).count() > rank);
    rings
        .into_iter()
        .filter(|r| r.up == up)
        .nth(rank)
        .ok_or(ModelError::PrecisionExhausted { found: 0, wanted: 1 })
}

/// Sub-ring of side `target` inside `(lo, hi)` for the prefix `sides`
/// (whose last entry is `target`).
fn next_level<A: Arith>(
    e: &mut Engine<'_, A>,
    lo: &A::Num,
    hi: &A::Num,
    sides: &[bool],
) -> Option<Ring<A::Num>> {
    let depth = sides.len();
    let target = sides[depth - 1];
    let width = {
        let w = e.ar.sub(hi, lo);
        e.ar.to_f64(&w)
    };
    for density in [1, 2, 4] {
        let probes = e.inner_probes(lo, hi, depth, density);
        let Some(ring) = e.select_inner(&probes, target, depth, width) else {
            continue;
        };
        let (c0, c1) = e.core(&ring.lo, &ring.hi);
        let ok = (0..5).all(|i| {
            let f = (2 * i + 1) as f64 / 10.0;
            let w = e.ar.sub(&c1, &c0);
            let d = e.ar.mul_f64(&w, f);
            let s = e.ar.add(&c0, &d);
            e.realizes(&s, sides)
        });
        if ok && e.ar.lt(lo, &ring.lo) && e.ar.lt(&ring.hi, hi) && e.ar.lt(&ring.lo, &ring.hi) {
            return Some(ring);
        }
    }
    None
}

fn refine_generic<A: Arith>(
    ar: A,
    current: &AdmissibleInterval,
    target: Symbol,
    model: &Model,
    tol: &SwitchTolerances,
) -> Result<AdmissibleInterval> {
    let seed = current.seed.clone();
    let mut e = Engine::new(ar, model, &seed, *tol);
    let parse = |e: &mut Engine<'_, A>, s: &str| {
        e.ar.parse(s).ok_or_else(|| ModelError::InvalidParameter(format!("bad interval end {s:?}")))
    };
    let lo = parse(&mut e, &current.ring_exact[0])?;
    let hi = parse(&mut e, &current.ring_exact[1])?;
    let mut realized = current.realized.clone();
    realized.push(target);
    let ring = next_level(&mut e, &lo, &hi, &sides_of(&realized)).ok_or(
        ModelError::PrecisionExhausted { found: current.depth, wanted: current.depth + 1 },
    )?;
    let mut brackets = current.brackets.clone();
    brackets.push(bracket_record(&e.ar, realized.order(), &ring));
    Ok(interval_from(&mut e, &seed, &ring, realized, brackets))
}

/// Extends an admissible interval by one symbol.
pub fn refine_once(
    current: &AdmissibleInterval,
    target: Symbol,
    model: &Model,
    tol: &SwitchTolerances,
) -> Result<AdmissibleInterval> {
    check_model(model)?;
    if current.realized.is_empty() {
        return Err(ModelError::InvalidParameter("cannot refine an empty prefix".into()));
    }
    match current.precision {
        PrecisionMode::Binary64 => refine_generic(Binary64, current, target, model, tol),
        PrecisionMode::Extended { bits } => refine_generic(Extended::new(bits), current, target, model, tol),
    }
}

/// Depth-1 admissible interval for `target` on `seed`.
pub fn initial_interval(
    seed: Arc<Segment>,
    target: Symbol,
    model: &Model,
    opts: &RealizeOptions,
) -> Result<AdmissibleInterval> {
    check_model(model)?;
    fn go<A: Arith>(
        ar: A,
        seed: Arc<Segment>,
        target: Symbol,
        model: &Model,
        opts: &RealizeOptions,
    ) -> Result<AdmissibleInterval> {
        let mut e = Engine::new(ar, model, &seed, opts.tol);
        let ring = first_level(&mut e, target == Symbol::Gamma1, opts.ring_rank)?;
        let rec = bracket_record(&e.ar, 1, &ring);
        Ok(interval_from(&mut e, &seed, &ring, ItineraryPath::new(vec![target]), vec![rec]))
    }
    match opts.precision {
        PrecisionMode::Binary64 => go(Binary64, seed, target, model, opts),
        PrecisionMode::Extended { bits } => go(Extended::new(bits), seed, target, model, opts),
    }
}

/// Witness data for `R(beta(s))` together with the seed passage.
fn witness_from<A: Arith>(
    e: &mut Engine<'_, A>,
    s: &A::Num,
    k: usize,
) -> Option<(LogPoint<A::Num>, ItineraryPath, Vec<f64>)> {
    let start = e.seg.eval(&mut e.ar, &e.lm, s)?;
    let (_, _, w) = e.orbit(s, 1)?;
    let wind = e.model.spectrum.winding();
    let rev = |e: &mut Engine<'_, A>, p: &LogPoint<A::Num>| {
        (e.ar.to_f64(&p.x) - wind * e.ar.to_f64(&p.ln_h)) / TAU
    };
    let mut revolutions = vec![rev(e, &start)];
    let mut symbols = ItineraryPath::default();
    let mut p = w.clone();
    for i in 0..k {
        symbols.push(symbol(p.up));
        revolutions.push(rev(e, &p));
        if i + 1 == k {
            break;
        }
        match Model::log_step(&mut e.ar, &e.lm, &p) {
            LogStep::Point(q) => p = q,
            _ => break,
        }
    }
    Some((w, symbols, revolutions))
}

fn to_wall<A: Arith>(ar: &A, p: &LogPoint<A::Num>) -> (WallPoint, f64) {
    let lp = LogPoint { x: ar.to_f64(&p.x), ln_h: ar.to_f64(&p.ln_h), up: p.up };
    (lp.to_wall(), lp.ln_h)
}

fn nested<A: Arith>(
    ar: A,
    path: &ItineraryPath,
    seed: Arc<Segment>,
    model: &Model,
    opts: &RealizeOptions,
) -> Result<Realization> {
    let k = path.order();
    let sides = sides_of(path);
    let mut e = Engine::new(ar, model, &seed, opts.tol);
    let mut levels = vec![Level { ring: first_level(&mut e, sides[0], opts.ring_rank)? }];
    for d in 1..k {
        let (lo, hi) = {
            let r = &levels[d - 1].ring;
            (r.lo.clone(), r.hi.clone())
        };
        let ring = next_level(&mut e, &lo, &hi, &sides[..=d])
            .ok_or(ModelError::PrecisionExhausted { found: d, wanted: k })?;
        levels.push(Level { ring });
    }

    let mut intervals = Vec::with_capacity(k);
    let mut brackets = Vec::new();
    for (d, lv) in levels.iter().enumerate() {
        brackets.push(bracket_record(&e.ar, d + 1, &lv.ring));
        let realized = path.prefix(d + 1);
        intervals.push(interval_from(&mut e, &seed, &lv.ring, realized, brackets.clone()));
    }

    // Closed admissible sets, built from the deepest level outward so that
    // each contains the next.
    let mut hulls = vec![(e.ar.num(0.0), e.ar.num(0.0)); k];
    for d in (0..k).rev() {
        let (c0, c1) = e.core(&levels[d].ring.lo, &levels[d].ring.hi);
        hulls[d] = if d + 1 == k {
            (c0, c1)
        } else {
            let (n0, n1) = hulls[d + 1].clone();
            (
                if e.ar.lt(&n0, &c0) { n0 } else { c0 },
                if e.ar.lt(&c1, &n1) { n1 } else { c1 },
            )
        };
    }
    let admissible = hulls.iter().map(|(a, b)| [e.ar.to_f64(a), e.ar.to_f64(b)]).collect();

    let last = &levels[k - 1].ring;
    let s_star = e.ar.midpoint(&last.lo, &last.hi);
    let (w, witness_symbols, revolutions) =
        witness_from(&mut e, &s_star, k).ok_or(ModelError::PrecisionExhausted { found: k - 1, wanted: k })?;
    let (witness, witness_ln_abs_y) = to_wall(&e.ar, &w);
    let widths = intervals.iter().map(|i| i.width()).collect();
    let out = Realization {
        path: path.clone(),
        mode: RealizeMode::Nested,
        precision: e.ar.mode(),
        intervals,
        admissible,
        levels: Vec::new(),
        widths,
        seed_parameter: e.ar.to_f64(&s_star),
        witness,
        witness_ln_abs_y,
        witness_symbols,
        revolutions,
    };
    if !out.verified() {
        return Err(ModelError::PrecisionExhausted { found: k - 1, wanted: k });
    }
    Ok(out)
}

fn reseeded(
    path: &ItineraryPath,
    seed: Arc<Segment>,
    model: &Model,
    opts: &RealizeOptions,
) -> Result<Realization> {
    let k = path.order();
    let sides = sides_of(path);
    let mut seg = seed.clone();
    let mut levels = Vec::with_capacity(k);
    let mut branches: Vec<(f64, f64)> = Vec::new();
    let mut scale = 1.0;
    let mut widths = Vec::with_capacity(k);
    let mut tau_star = 0.0;
    for (d, &up) in sides.iter().enumerate() {
        let mut e = Engine::new(Binary64, model, &seg, opts.tol);
        let rank = if d == 0 { opts.ring_rank } else { 0 };
        let ring = first_level(&mut e, up, rank)
            .map_err(|_| ModelError::PrecisionExhausted { found: d, wanted: k })?;
        widths.push((ring.hi - ring.lo) * scale);
        if d + 1 == k {
            tau_star = 0.5 * (ring.lo + ring.hi);
            levels.push(ReseedLevel { ring: [ring.lo, ring.hi], apex: None });
            break;
        }
        // The branch starts at the zero bounding the ring from below, where
        // the image touches the stable manifold.
        let lo = ring.lo_bracket.map_or(ring.lo, |(a, b)| 0.5 * (a + b));
        let apex = e.apex(ring.lo, ring.hi);
        levels.push(ReseedLevel { ring: [ring.lo, ring.hi], apex: Some(apex) });
        branches.push((lo, apex));
        scale *= apex - lo;
        seg = Arc::new(
            Segment::image(seg.clone(), lo, apex, model)
                .map_err(|_| ModelError::PrecisionExhausted { found: d + 1, wanted: k })?,
        );
    }

    // Pull the final parameter back to level 1 and to the seed.
    let mut t = tau_star;
    for &(lo, apex) in branches.iter().skip(1).rev() {
        t = lo + (apex - lo) * t;
    }
    let seed_parameter = match branches.first() {
        Some(&(lo, apex)) => lo + (apex - lo) * t,
        None => t,
    };
    let mut e = Engine::new(Binary64, model, &seed, opts.tol);
    let (w, witness_symbols, revolutions) = match branches.first() {
        Some(&(lo, apex)) => {
            let s1 = Segment::image(seed.clone(), lo, apex, model)?;
            let mut e1 = Engine::new(Binary64, model, &s1, opts.tol);
            let w = s1
                .eval(&mut e1.ar, &e1.lm, &t)
                .ok_or(ModelError::PrecisionExhausted { found: k - 1, wanted: k })?;
            let mut syms = ItineraryPath::default();
            let mut revs = vec![{
                let p0 = seed.point(model, seed_parameter).unwrap_or(LogPoint { x: f64::NAN, ln_h: f64::NAN, up: true });
                (p0.x - model.spectrum.winding() * p0.ln_h) / TAU
            }];
            let mut p = w.clone();
            for i in 0..k {
                syms.push(symbol(p.up));
                revs.push((p.x - model.spectrum.winding() * p.ln_h) / TAU);
                if i + 1 == k {
                    break;
                }
                match model.log_return(&p) {
                    LogStep::Point(q) => p = q,
                    _ => break,
                }
            }
            (w, syms, revs)
        }
        None => witness_from(&mut e, &seed_parameter, k)
            .ok_or(ModelError::PrecisionExhausted { found: 0, wanted: k })?,
    };
    let (witness, witness_ln_abs_y) = to_wall(&Binary64, &w);
    let out = Realization {
        path: path.clone(),
        mode: RealizeMode::Reseeded,
        precision: PrecisionMode::Binary64,
        intervals: Vec::new(),
        admissible: Vec::new(),
        levels,
        widths,
        seed_parameter,
        witness,
        witness_ln_abs_y,
        witness_symbols,
        revolutions,
    };
    if !out.verified() {
        return Err(ModelError::PrecisionExhausted { found: k - 1, wanted: k });
    }
    Ok(out)
}

/// Finds a witness whose iterates follow `path`.
pub fn realize_path(
    path: &ItineraryPath,
    seed: Arc<Segment>,
    mode: RealizeMode,
    model: &Model,
    opts: &RealizeOptions,
) -> Result<Realization> {
    check_model(model)?;
    if path.is_empty() {
        return Err(ModelError::InvalidParameter("path must contain at least one symbol".into()));
    }
    match (mode, opts.precision) {
        (RealizeMode::Nested, PrecisionMode::Binary64) => nested(Binary64, path, seed, model, opts),
        (RealizeMode::Nested, PrecisionMode::Extended { bits }) => {
            nested(Extended::new(bits), path, seed, model, opts)
        }
        (RealizeMode::Reseeded, _) => reseeded(path, seed, model, opts),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefixRealization {
    pub realization: Realization,
    /// Midpoint of the deepest admissible set, on the seed parameter.
    pub point_estimate: f64,
    pub widths_strictly_decreasing: bool,
    /// Revolution counts of the alternative witness using the next ring at
    /// depth 1, when it can be realized.
    pub alternative_revolutions: Option<Vec<i64>>,
}

/// Realizes the first `depth` symbols of an infinite stream.
pub fn realize_infinite_prefix(
    stream: impl Iterator<Item = Symbol>,
    depth: usize,
    seed: Arc<Segment>,
    mode: RealizeMode,
    model: &Model,
    opts: &RealizeOptions,
) -> Result<PrefixRealization> {
    if depth == 0 {
        return Err(ModelError::InvalidParameter("depth must be at least 1".into()));
    }
    let path: ItineraryPath = stream.take(depth).collect();
    if path.order() < depth {
        return Err(ModelError::InvalidParameter("stream ended early".into()));
    }
    let realization = realize_path(&path, seed.clone(), mode, model, opts)?;
    let point_estimate = match realization.admissible.last() {
        Some(q) => 0.5 * (q[0] + q[1]),
        None => realization.seed_parameter,
    };
    let widths_strictly_decreasing = realization.widths.windows(2).all(|w| w[1] < w[0]);
    let alt = RealizeOptions { ring_rank: opts.ring_rank + 1, ..*opts };
    let alternative_revolutions =
        realize_path(&path, seed, mode, model, &alt).ok().map(|r| r.revolution_counts());
    Ok(PrefixRealization { realization, point_estimate, widths_strictly_decreasing, alternative_revolutions })
}
