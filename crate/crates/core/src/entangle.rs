//! Chaotic entanglement: pairs of cupolets whose emitted sequences are each
//! other's control sequences, and event-driven co-simulation of such pairs
//! with no external control.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{BinDynamics, BinId, CycleKey};
use crate::cupolet::{Catalog, Cupolet, Generator};
use crate::dynsys::{self, State};
use crate::error::{Error, Result};
use crate::exchange::{emit, ExchangeFunction};
use crate::par::*;
use crate::section::bin_lookup;

/// Two catalog cupolets driving each other through an exchange function.
///
/// A cupolet's orbit is only defined up to the mirror symmetry of the flow,
/// so each side records which of the two twins takes part. Alignments are
/// offsets into the partner's primitive control word: the emitted stream of
/// A, started at A's cycle element 0, equals B's control stream started at
/// phase `align_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledPair {
    pub a: String,
    pub b: String,
    pub exchange: ExchangeFunction,
    pub mirror_a: bool,
    pub mirror_b: bool,
    pub align_ab: usize,
    pub align_ba: usize,
    pub certified: bool,
}

/// Visitation word of a cupolet or of its mirror twin.
pub fn oriented_visitation(c: &Cupolet, mirrored: bool) -> Vec<u8> {
    c.visitation.iter().map(|b| b ^ u8::from(mirrored)).collect()
}

pub fn oriented_cycle(c: &Cupolet, mirrored: bool) -> Vec<CycleKey> {
    if mirrored {
        c.bin_cycle.iter().map(CycleKey::mirror).collect()
    } else {
        c.bin_cycle.clone()
    }
}

pub fn oriented_samples(c: &Cupolet, mirrored: bool) -> Vec<State> {
    if mirrored {
        c.orbit_samples
            .iter()
            .map(|s| State::new(-s.v_c1, -s.v_c2, -s.i_l).at_time(s.t))
            .collect()
    } else {
        c.orbit_samples.clone()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `r` with `e^∞ = (control shifted by r)^∞`, comparing one common
/// period of both streams.
pub fn cyclic_alignment(e: &[u8], control: &[u8]) -> Option<usize> {
    if e.is_empty() || control.is_empty() {
        return None;
    }
    let n = e.len() / gcd(e.len(), control.len()) * control.len();
    (0..control.len()).find(|&r| (0..n).all(|k| e[k % e.len()] == control[(k + r) % control.len()]))
}

/// Alignment of A's emitted stream against B's control, if they match.
fn directed_match(a: &Cupolet, mirror_a: bool, b: &Cupolet, f: &ExchangeFunction) -> Option<usize> {
    let e = emit(f, &oriented_visitation(a, mirror_a)).ok()?;
    cyclic_alignment(&e, b.control.primitive_root().bits())
}

/// All unordered pairs (including self-pairs) whose emitted sequences match
/// each other's control words cyclically. Orientations are tried with the
/// stored twin first.
pub fn search_pairs(cat: &Catalog, f: &ExchangeFunction) -> Vec<EntangledPair> {
    let cups: Vec<&Cupolet> = cat.cupolets().collect();
    let found: Vec<Vec<EntangledPair>> = (0..cups.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i..cups.len() {
                let (a, b) = (cups[i], cups[j]);
                'orient: for mirror_a in [false, true] {
                    for mirror_b in [false, true] {
                        let ab = directed_match(a, mirror_a, b, f);
                        let ba = directed_match(b, mirror_b, a, f);
                        if let (Some(align_ab), Some(align_ba)) = (ab, ba) {
                            out.push(EntangledPair {
                                a: a.name.clone(),
                                b: b.name.clone(),
                                exchange: f.clone(),
                                mirror_a,
                                mirror_b,
                                align_ab,
                                align_ba,
                                certified: true,
                            });
                            break 'orient;
                        }
                    }
                }
            }
            out
        })
        .collect();
    found.into_iter().flatten().collect()
}

pub fn pairs_csv(pairs: &[EntangledPair]) -> String {
    let mut out = String::from("a,b,exchange,mirror_a,mirror_b,align_ab,align_ba\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.a,
            p.b,
            p.exchange,
            u8::from(p.mirror_a),
            u8::from(p.mirror_b),
            p.align_ab,
            p.align_ba
        );
    }
    out
}

/// A disturbance injected into a running co-simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Flips the queued control bit at `position` of `system`'s queue just
    /// before its crossing number `at`.
    FlipQueued { system: usize, at: usize, position: usize },
    /// Displaces `system`'s state along the bin axis by `offset` at its
    /// crossing number `at`, before the controller reads the bin.
    Displace { system: usize, at: usize, offset: f64 },
    /// Suspends the bit exchange for `gap` crossings of each system, starting
    /// at system A's crossing number `at`. Both systems free-run meanwhile.
    Cutoff { at: usize, gap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoSimRow {
    pub crossing: usize,
    pub system: usize,
    pub plane: u8,
    pub bin: usize,
    pub phase: usize,
    pub in_cycle: bool,
    pub queue_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoSimReport {
    pub periods: usize,
    /// Crossing at which each system was first seen off its cycle for more
    /// than one full period.
    pub destabilized: [Option<usize>; 2],
    /// Crossings where a system found its queue empty and applied `0`.
    pub underruns: [usize; 2],
    pub max_queue: [usize; 2],
    /// Longest run of consecutive in-cycle crossings ending at the last crossing.
    pub final_in_cycle: [usize; 2],
    pub period_crossings: [usize; 2],
    pub rows: Vec<CoSimRow>,
    /// Distance from the stored orbit sampled while free-running in a cutoff.
    pub gap_distances: [Vec<(f64, f64)>; 2],
}

impl CoSimReport {
    /// Both systems stayed on their cycles for the whole run.
    pub fn persisted(&self) -> bool {
        self.destabilized.iter().all(Option::is_none)
            && (0..2).all(|i| self.final_in_cycle[i] >= self.period_crossings[i])
    }

    /// Both systems end the run on their cycles for at least a full period.
    pub fn recovered(&self) -> bool {
        (0..2).all(|i| self.final_in_cycle[i] >= self.period_crossings[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("crossing,system,plane,bin,phase,in_cycle,queue_depth\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.crossing,
                ["A", "B"][r.system],
                r.plane,
                r.bin,
                r.phase,
                u8::from(r.in_cycle),
                r.queue_depth
            );
        }
        out
    }
}

struct Side {
    cycle: HashSet<CycleKey>,
    /// Dense replay of the orbit, one polyline per arc. Filled only when a
    /// cutoff needs orbit distances.
    arcs: Vec<Vec<[f64; 3]>>,
    root: Vec<u8>,
    period: usize,
    at: BinId,
    /// Last control bin, so the exact crossing point can be recomputed.
    prev_post: Option<BinId>,
    exact: Option<State>,
    t: f64,
    phase: usize,
    queue: VecDeque<u8>,
    window: Vec<u8>,
    crossings: usize,
    off_run: usize,
    in_run: usize,
    gap_left: usize,
    destabilized: Option<usize>,
    underruns: usize,
    max_queue: usize,
    distances: Vec<(f64, f64)>,
}

impl Side {
    fn new(cup: &Cupolet, mirrored: bool, partner_align: usize) -> Self {
        let cycle = oriented_cycle(cup, mirrored);
        let root = cup.control.primitive_root().bits().to_vec();
        let p = root.len();
        let first = cycle[0];
        let offset = (partner_align + p - first.phase % p) % p;
        let primed = cycle.len() + offset;
        let queue = (0..primed).map(|j| root[(first.phase + j) % p]).collect();
        Side {
            arcs: Vec::new(),
            period: cycle.len(),
            cycle: cycle.iter().copied().collect(),
            root,
            at: first.bin_id(),
            prev_post: None,
            exact: None,
            t: 0.0,
            phase: first.phase,
            queue,
            window: Vec::new(),
            crossings: 0,
            off_run: 0,
            in_run: 0,
            gap_left: 0,
            destabilized: None,
            underruns: 0,
            max_queue: primed,
            distances: Vec::new(),
        }
    }

    fn orbit_distance(&self, s: &State) -> f64 {
        let x = s.to_array();
        self.arcs
            .iter()
            .flat_map(|arc| arc.windows(2).map(|w| segment_distance(&x, &w[0], &w[1])))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(x: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ax = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let len2 = ab.iter().map(|v| v * v).sum::<f64>();
    let f = if len2 > 0.0 {
        (ab.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (0..3).map(|i| (ax[i] - f * ab[i]).powi(2)).sum::<f64>().sqrt()
}

fn side_names(p: &EntangledPair) -> [&str; 2] {
    [p.a.as_str(), p.b.as_str()]
}

/// Co-simulates a pair for `n_periods` periods of each system, with an
/// optional disturbance. Events are processed in order of continuous time;
/// on equal times system A goes first.
pub fn co_simulate(
    p: &EntangledPair,
    cat: &Catalog,
    gen: &Generator<'_>,
    n_periods: usize,
    perturbation: Option<Perturbation>,
) -> Result<CoSimReport> {
    if !p.certified {
        return Err(Error::InvalidArgument(format!("pair {}/{} is not certified", p.a, p.b)));
    }
    if n_periods == 0 {
        return Err(Error::InvalidArgument("need at least one period".into()));
    }
    cat.fingerprint.ensure_matches(&gen.config().fingerprint())?;
    let [na, nb] = side_names(p);
    let lookup = |name: &str| {
        cat.get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("{name} is not in the catalog")))
    };
    let mut sides = [
        Side::new(lookup(na)?, p.mirror_a, p.align_ba),
        Side::new(lookup(nb)?, p.mirror_b, p.align_ab),
    ];
    match perturbation {
        Some(Perturbation::Displace { system, offset, .. }) => {
            check_displacement(gen, sides.get(system).map(|s| s.at), offset)?;
        }
        Some(Perturbation::Cutoff { gap, .. }) if gap > 0 => {
            for (side, (name, mirrored)) in sides.iter_mut().zip([(na, p.mirror_a), (nb, p.mirror_b)]) {
                let cup = lookup(name)?;
                let sign = if mirrored { -1.0 } else { 1.0 };
                side.arcs = gen
                    .replay_arcs(&cup.control, &cup.bin_cycle)?
                    .iter()
                    .map(|arc| arc.iter().map(|s| s.to_array().map(|v| sign * v)).collect())
                    .collect();
            }
        }
        _ => {}
    }
    let targets = [sides[0].period * n_periods, sides[1].period * n_periods];
    let mut cutoff: Option<(f64, usize)> = None;
    let mut cutoff_pending = [false; 2];
    let mut rows = Vec::new();
    while sides[0].crossings < targets[0] || sides[1].crossings < targets[1] {
        let i = if sides[1].t < sides[0].t { 1 } else { 0 };
        let j = 1 - i;
        let n = sides[i].crossings;

        match perturbation {
            Some(Perturbation::FlipQueued { system, at, position }) if system == i && at == n => {
                let q = &mut sides[i].queue;
                let depth = q.len();
                let bit = q.get_mut(position).ok_or_else(|| {
                    Error::InvalidPerturbation(format!("queue position {position} beyond depth {depth}"))
                })?;
                *bit ^= 1;
            }
            Some(Perturbation::Displace { system, at, offset }) if system == i && at == n => {
                sides[i].at = displaced_bin(gen, sides[i].at, offset)?;
            }
            Some(Perturbation::Cutoff { at, gap }) if i == 0 && at == n && cutoff.is_none() => {
                cutoff = Some((sides[0].t, gap));
                cutoff_pending = [true, true];
            }
            _ => {}
        }
        if let Some((tc, gap)) = cutoff {
            if cutoff_pending[i] && sides[i].t >= tc {
                cutoff_pending[i] = false;
                sides[i].gap_left = gap;
            }
        }

        let side = &mut sides[i];
        let key = CycleKey {
            plane: side.at.plane,
            bin: side.at.bin,
            phase: side.phase,
        };
        let in_cycle = side.cycle.contains(&key);
        if in_cycle {
            side.off_run = 0;
            side.in_run += 1;
        } else {
            side.off_run += 1;
            side.in_run = 0;
            if side.off_run > side.period && side.destabilized.is_none() {
                side.destabilized = Some(n);
            }
        }
        rows.push(CoSimRow {
            crossing: n,
            system: i,
            plane: side.at.plane.bit(),
            bin: side.at.bin,
            phase: side.phase,
            in_cycle,
            queue_depth: side.queue.len(),
        });
        side.crossings += 1;

        if side.gap_left > 0 {
            free_run(gen, side)?;
            continue;
        }

        let bit = side.queue.pop_front().unwrap_or_else(|| {
            side.underruns += 1;
            0
        });
        let post = gen.cache.apply(side.at, bit)?;
        let visited = side.at.plane.bit();
        let hop = gen.cache.hop(post)?;
        side.prev_post = Some(post);
        side.exact = None;
        side.at = hop.to;
        side.t += hop.dt;
        side.phase = (side.phase + 1) % side.root.len();

        let emitted = if p.exchange.is_bitwise() {
            emit(&p.exchange, &[visited]).ok()
        } else {
            side.window.push(visited);
            if side.window.len() == side.period {
                let e = emit(&p.exchange, &side.window).ok();
                side.window.clear();
                e
            } else {
                None
            }
        };
        if sides[j].gap_left == 0 {
            if let Some(bits) = emitted {
                sides[j].queue.extend(bits);
                sides[j].max_queue = sides[j].max_queue.max(sides[j].queue.len());
            }
        }
    }
    Ok(CoSimReport {
        periods: n_periods,
        destabilized: [sides[0].destabilized, sides[1].destabilized],
        underruns: [sides[0].underruns, sides[1].underruns],
        max_queue: [sides[0].max_queue, sides[1].max_queue],
        final_in_cycle: [sides[0].in_run, sides[1].in_run],
        period_crossings: [sides[0].period, sides[1].period],
        rows,
        gap_distances: [
            std::mem::take(&mut sides[0].distances),
            std::mem::take(&mut sides[1].distances),
        ],
    })
}

/// Integrates the uncontrolled flow from the current crossing to the next,
/// recording the distance to the stored orbit along the way.
fn free_run(gen: &Generator<'_>, side: &mut Side) -> Result<()> {
    let cfg = gen.config();
    let geometry = &gen.flow.sections.geometry;
    let start = match side.exact {
        Some(s) => s,
        None => match side.prev_post {
            Some(post) => dynsys::integrate_to_crossing(&gen.flow.center(post)?, cfg, geometry)?.state,
            None => gen.flow.center(side.at)?,
        },
    };
    if side.distances.is_empty() {
        side.distances.push((side.t, side.orbit_distance(&start)));
    }
    let t0 = side.t;
    let start = start.at_time(0.0);
    let mut trace = Vec::new();
    let c = dynsys::integrate_to_crossing_traced(&start, cfg, geometry, |s| trace.push(*s))?;
    for s in trace.iter().step_by(8) {
        side.distances.push((t0 + s.t, side.orbit_distance(s)));
    }
    side.distances.push((t0 + c.state.t, side.orbit_distance(&c.state)));
    let hit = bin_lookup(&c.state, gen.flow.sections)?;
    side.at = BinId {
        plane: hit.plane,
        bin: hit.bin,
    };
    side.exact = Some(c.state.at_time(0.0));
    side.prev_post = None;
    side.t = t0 + c.state.t;
    side.gap_left -= 1;
    Ok(())
}

fn check_displacement(gen: &Generator<'_>, at: Option<BinId>, offset: f64) -> Result<()> {
    let at = at.ok_or_else(|| Error::InvalidPerturbation("system index must be 0 or 1".into()))?;
    let half = gen.flow.sections.bin_width(at.plane) / 2.0;
    if !offset.is_finite() || offset.abs() >= half {
        return Err(Error::InvalidPerturbation(format!(
            "displacement {offset} is not below half a bin width ({half})"
        )));
    }
    Ok(())
}

/// Bin read by the controller after the state at the center of `at` is moved
/// by `offset` along the bin axis.
fn displaced_bin(gen: &Generator<'_>, at: BinId, offset: f64) -> Result<BinId> {
    check_displacement(gen, Some(at), offset)?;
    let axis = gen.flow.sections.plane(at.plane).axis;
    let c = gen.flow.center(at)?;
    let moved = State::new(c.v_c1 + offset * axis[0], c.v_c2, c.i_l + offset * axis[1]);
    let hit = bin_lookup(&moved, gen.flow.sections)?;
    Ok(BinId {
        plane: hit.plane,
        bin: hit.bin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    Blind,
    Knowledgeable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub mode: MeasureMode,
    pub perturbation: Perturbation,
    /// Some system left its cycle for more than a full period.
    pub destroyed: bool,
    pub report: CoSimReport,
}

pub fn measure(
    p: &EntangledPair,
    cat: &Catalog,
    gen: &Generator<'_>,
    mode: MeasureMode,
    perturbation: Perturbation,
    n_periods: usize,
) -> Result<MeasureReport> {
    let matches_mode = matches!(
        (mode, perturbation),
        (MeasureMode::Blind, Perturbation::FlipQueued { .. })
            | (MeasureMode::Knowledgeable, Perturbation::Displace { .. })
    );
    if !matches_mode {
        return Err(Error::InvalidPerturbation(format!("{perturbation:?} is not a {mode:?} measurement")));
    }
    let report = co_simulate(p, cat, gen, n_periods, Some(perturbation))?;
    Ok(MeasureReport {
        mode,
        perturbation,
        destroyed: report.destabilized.iter().any(Option::is_some),
        report,
    })
}

/// `trials` measurements at random systems and times within the first five
/// periods. Blind trials flip a random queued bit; knowledgeable trials
/// displace by `fraction` of half a bin width with a random sign.
#[allow(clippy::too_many_arguments)]
pub fn measurement_trials(
    p: &EntangledPair,
    cat: &Catalog,
    gen: &Generator<'_>,
    mode: MeasureMode,
    trials: usize,
    fraction: f64,
    n_periods: usize,
    seed: u64,
) -> Result<Vec<MeasureReport>> {
    let periods = [
        cat.get(&p.a).map(|c| c.period_crossings),
        cat.get(&p.b).map(|c| c.period_crossings),
    ];
    let periods = periods.map(|n| n.unwrap_or(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbations: Vec<Perturbation> = (0..trials)
        .map(|_| {
            let system = rng.random_range(0..2);
            let at = rng.random_range(periods[system]..5 * periods[system].max(1) + 1);
            match mode {
                MeasureMode::Blind => Perturbation::FlipQueued {
                    system,
                    at,
                    position: rng.random_range(0..periods[system]),
                },
                MeasureMode::Knowledgeable => {
                    let half = gen.flow.sections.bin_width(crate::section::Plane::Left) / 2.0;
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    Perturbation::Displace {
                        system,
                        at,
                        offset: sign * fraction * half,
                    }
                }
            }
        })
        .collect();
    perturbations
        .into_par_iter()
        .map(|q| measure(p, cat, gen, mode, q, n_periods))
        .collect()
}

/// Outcome of suspending the exchange for a few crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffReport {
    pub gap: usize,
    /// Each system ends on its cycle for at least a full period.
    pub recertified: bool,
    /// Orbit distance at the end of the gap exceeds the distance at its start.
    pub drifted: [bool; 2],
    pub report: CoSimReport,
}

/// Cuts the exchange at system A's crossing number `at` for `gap` crossings
/// and then restores it.
pub fn interaction_cutoff(
    p: &EntangledPair,
    cat: &Catalog,
    gen: &Generator<'_>,
    gap: usize,
    at: usize,
    n_periods: usize,
) -> Result<CutoffReport> {
    let report = co_simulate(p, cat, gen, n_periods, Some(Perturbation::Cutoff { at, gap }))?;
    let drifted = [0, 1].map(|i| {
        let d = &report.gap_distances[i];
        match (d.first(), d.last()) {
            (Some(a), Some(b)) => b.1 > a.1,
            _ => false,
        }
    });
    Ok(CutoffReport {
        gap,
        recertified: report.recovered(),
        drifted,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Fingerprint;
    use crate::control::ControlWord;
    use crate::section::Plane;

    fn mock(word: &str, visitation: &str) -> Cupolet {
        let control: ControlWord = word.parse().unwrap();
        let visitation = crate::section::parse_bits(visitation).unwrap();
        let bin_cycle = visitation
            .iter()
            .enumerate()
            .map(|(k, &b)| CycleKey {
                plane: Plane::from_bit(b).unwrap(),
                bin: k,
                phase: k % control.len(),
            })
            .collect();
        Cupolet {
            name: crate::cupolet::cupolet_name(&control),
            control,
            period_crossings: visitation.len(),
            bin_cycle,
            visitation,
            period_time: 1.0,
            orbit_samples: vec![],
            fingerprint: "00".parse().unwrap(),
        }
    }

    fn catalog(entries: &[(&str, &str)]) -> Catalog {
        let fp: Fingerprint = "00".parse().unwrap();
        let mut cat = Catalog::new(fp);
        for (w, v) in entries {
            cat.insert(mock(w, v)).unwrap();
        }
        cat
    }

    #[test]
    fn cyclic_alignment_examples() {
        assert_eq!(cyclic_alignment(&[0, 1], &[1, 0]), Some(1));
        assert_eq!(cyclic_alignment(&[1, 1, 1], &[1]), Some(0));
        assert_eq!(cyclic_alignment(&[0, 1, 1], &[0, 1]), None);
        assert_eq!(cyclic_alignment(&[0, 1, 0, 1], &[1, 0]), Some(1));
        assert_eq!(cyclic_alignment(&[], &[1]), None);
    }

    #[test]
    fn table_pair_found_with_lookup() {
        let cat = catalog(&[
            ("00000000011", "0000011100011111000111"),
            ("0000110011110011", "0000111111111111"),
        ]);
        let f = ExchangeFunction::parse_lookup(
            "0000011100011111000111\t0000110011110011\n0000111111111111\t00000000011\n",
        )
        .unwrap();
        let pairs = search_pairs(&cat, &f);
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].a.as_str(), pairs[0].b.as_str()), ("C00000000011", "C0000110011110011"));
        assert_eq!((pairs[0].align_ab, pairs[0].align_ba), (0, 0));
    }

    #[test]
    fn self_pair_under_identity() {
        let cat = catalog(&[("011", "011"), ("01", "0001")]);
        let pairs = search_pairs(&cat, &ExchangeFunction::Identity);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].a, "C011");
        assert_eq!(pairs[0].b, "C011");
        assert!(!pairs[0].mirror_a);
    }

    #[test]
    fn mirror_twin_can_pair() {
        // Stored twin visits lobe 0 only; its mirror emits the control word 1.
        let cat = catalog(&[("1", "00")]);
        let pairs = search_pairs(&cat, &ExchangeFunction::Identity);
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].mirror_a && pairs[0].mirror_b);
    }

    #[test]
    fn empty_catalog_no_pairs() {
        assert!(search_pairs(&catalog(&[]), &ExchangeFunction::Identity).is_empty());
    }

    #[test]
    fn search_is_symmetric() {
        let cat = catalog(&[("001", "010"), ("01", "001"), ("011", "01"), ("0111", "0110")]);
        for f in [ExchangeFunction::Identity, ExchangeFunction::BitwiseNot, ExchangeFunction::RunDecrement] {
            let pairs = search_pairs(&cat, &f);
            let cups: Vec<&Cupolet> = cat.cupolets().collect();
            for a in &cups {
                for b in &cups {
                    let fwd = [false, true].iter().any(|&ma| {
                        [false, true].iter().any(|&mb| {
                            directed_match(a, ma, b, &f).is_some() && directed_match(b, mb, a, &f).is_some()
                        })
                    });
                    let listed = pairs
                        .iter()
                        .any(|p| (p.a == a.name && p.b == b.name) || (p.a == b.name && p.b == a.name));
                    assert_eq!(fwd, listed, "{} {} {f}", a.name, b.name);
                }
            }
        }
    }
}
