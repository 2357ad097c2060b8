//! Controlled dynamics: one control bit per plane crossing.
//!
//! Every crossing is snapped to the center of the bin it hits (microcontrol).
//! A `1` bit additionally relocates the state to the center of the bin's
//! macrocontrol target. Post-crossing states are therefore always bin
//! centers, and the controlled flow is a deterministic map on
//! `(plane, bin, control phase)`.

use std::fmt;
use std::str::FromStr;

use crate::config::SystemConfig;
use crate::cupolet::CycleDetector;
use crate::dynsys::{self, State};
use crate::error::{Error, Result};
use crate::par::*;
use crate::section::{bin_center, bin_lookup, macro_target, CodingTable, Plane, SectionSet};

/// A repeating binary control sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlWord(Vec<u8>);

impl ControlWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("control word must be non-empty".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("control bits must be 0 or 1".into()));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, phase: usize) -> u8 {
        self.0[phase % self.0.len()]
    }

    /// Lexicographically least rotation.
    pub fn canonical(&self) -> ControlWord {
        let r = least_rotation(&self.0);
        ControlWord(rotate(&self.0, r))
    }

    pub fn is_canonical(&self) -> bool {
        least_rotation(&self.0) == 0
    }

    /// Shortest word whose repetition gives this one.
    pub fn primitive_root(&self) -> ControlWord {
        ControlWord(self.0[..primitive_period(&self.0)].to_vec())
    }
}

impl fmt::Display for ControlWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for ControlWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix('C').unwrap_or(s);
        let bits = crate::section::parse_bits(s)
            .ok_or_else(|| Error::InvalidArgument(format!("control word {s:?} must be a binary string")))?;
        ControlWord::new(bits)
    }
}

/// Start index of the lexicographically least rotation (two-pointer
/// minimum-expression scan, linear time).
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j) % n.max(1)
}

pub fn rotate<T: Clone>(s: &[T], r: usize) -> Vec<T> {
    if s.is_empty() {
        return Vec::new();
    }
    let r = r % s.len();
    s[r..].iter().chain(&s[..r]).cloned().collect()
}

/// Smallest `p` dividing `s.len()` with `s[i] == s[i + p]` throughout.
pub fn primitive_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| s[i] == s[i - p]))
        .unwrap_or(n)
}

/// A bin on one of the two planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinId {
    pub plane: Plane,
    pub bin: usize,
}

/// Free flight from a bin center to the next crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub to: BinId,
    pub dt: f64,
    pub out_of_range: bool,
}

/// One plane intersection under control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRecord {
    pub plane: Plane,
    /// Bin the trajectory intersected, before control.
    pub bin: usize,
    /// Index of the control bit applied at this crossing.
    pub control_phase: usize,
    pub t: f64,
}

impl CrossingRecord {
    pub fn key(&self) -> CycleKey {
        CycleKey {
            plane: self.plane,
            bin: self.bin,
            phase: self.control_phase,
        }
    }
}

/// The controlled-map state at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleKey {
    pub plane: Plane,
    pub bin: usize,
    pub phase: usize,
}

impl CycleKey {
    /// The same crossing under the odd symmetry `x -> -x`.
    pub fn mirror(&self) -> CycleKey {
        CycleKey {
            plane: self.plane.mirror(),
            ..*self
        }
    }

    pub fn bin_id(&self) -> BinId {
        BinId {
            plane: self.plane,
            bin: self.bin,
        }
    }
}

/// The controlled flow seen as a map on bins.
pub trait BinDynamics: Sync {
    /// Free flight from the center of `from` to the next crossing.
    fn hop(&self, from: BinId) -> Result<Hop>;

    /// Bin whose center a `1` bit relocates a crossing in `at` to.
    fn macro_target(&self, at: BinId) -> Result<BinId>;

    /// Bin a control bit sends a crossing in `at` to.
    fn apply(&self, at: BinId, bit: u8) -> Result<BinId> {
        if bit == 0 {
            Ok(at)
        } else {
            self.macro_target(at)
        }
    }
}

/// Integrates the double scroll for every hop.
#[derive(Clone, Copy)]
pub struct FlowDynamics<'a> {
    pub sections: &'a SectionSet,
    pub table: &'a CodingTable,
    pub config: &'a SystemConfig,
}

impl<'a> FlowDynamics<'a> {
    pub fn new(sections: &'a SectionSet, table: &'a CodingTable, config: &'a SystemConfig) -> Result<Self> {
        let fp = config.fingerprint();
        fp.ensure_matches(&sections.fingerprint)?;
        fp.ensure_matches(&table.fingerprint)?;
        Ok(Self {
            sections,
            table,
            config,
        })
    }

    /// Integrates an arbitrary state to its first crossing.
    pub fn enter(&self, s: &State) -> Result<Hop> {
        let c = dynsys::integrate_to_crossing(s, self.config, &self.sections.geometry)?;
        let hit = bin_lookup(&c.state, self.sections)?;
        Ok(Hop {
            to: BinId {
                plane: hit.plane,
                bin: hit.bin,
            },
            dt: c.state.t - s.t,
            out_of_range: hit.out_of_range,
        })
    }

    pub fn center(&self, b: BinId) -> Result<State> {
        bin_center(b.plane, b.bin, self.sections)
    }
}

impl BinDynamics for FlowDynamics<'_> {
    fn hop(&self, from: BinId) -> Result<Hop> {
        self.enter(&self.center(from)?)
    }

    fn macro_target(&self, at: BinId) -> Result<BinId> {
        let bin = macro_target(at.plane, at.bin, self.table, self.config.horizon)?;
        Ok(BinId { plane: at.plane, bin })
    }
}

/// Successor and macrocontrol target of every bin, computed once with
/// [`FlowDynamics`]. Produces exactly the same hops as integrating.
#[derive(Debug, Clone)]
pub struct CachedDynamics {
    hops: [Vec<Result<Hop>>; 2],
    targets: [Vec<Result<BinId>>; 2],
}

impl CachedDynamics {
    pub fn build(flow: &FlowDynamics<'_>) -> Self {
        let n = flow.sections.bins_per_plane;
        let per_plane = |plane: Plane| -> (Vec<Result<Hop>>, Vec<Result<BinId>>) {
            (0..n)
                .into_par_iter()
                .map(|bin| {
                    let b = BinId { plane, bin };
                    (flow.hop(b), flow.macro_target(b))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .unzip()
        };
        let (h0, t0) = per_plane(Plane::Left);
        let (h1, t1) = per_plane(Plane::Right);
        Self {
            hops: [h0, h1],
            targets: [t0, t1],
        }
    }

    pub fn bins_per_plane(&self) -> usize {
        self.hops[0].len()
    }
}

impl BinDynamics for CachedDynamics {
    fn hop(&self, from: BinId) -> Result<Hop> {
        self.hops[from.plane.index()]
            .get(from.bin)
            .cloned()
            .unwrap_or(Err(Error::IndexOutOfRange {
                index: from.bin,
                bins: self.bins_per_plane(),
            }))
    }

    fn macro_target(&self, at: BinId) -> Result<BinId> {
        self.targets[at.plane.index()]
            .get(at.bin)
            .cloned()
            .unwrap_or(Err(Error::IndexOutOfRange {
                index: at.bin,
                bins: self.bins_per_plane(),
            }))
    }
}

/// Integrates from `s` to the next crossing and applies `bit` there.
/// Returns the post-control state (a bin center) and the crossing record.
pub fn controlled_crossing(
    s: &State,
    bit: u8,
    phase: usize,
    ss: &SectionSet,
    ct: &CodingTable,
    cfg: &SystemConfig,
) -> Result<(State, CrossingRecord)> {
    let flow = FlowDynamics::new(ss, ct, cfg)?;
    let c = dynsys::integrate_to_crossing(s, cfg, &ss.geometry)?;
    let hit = bin_lookup(&c.state, ss)?;
    let at = BinId {
        plane: hit.plane,
        bin: hit.bin,
    };
    let post = flow.apply(at, bit)?;
    let record = CrossingRecord {
        plane: hit.plane,
        bin: hit.bin,
        control_phase: phase,
        t: c.state.t,
    };
    Ok((flow.center(post)?.at_time(c.state.t), record))
}

/// Output of a controlled run that reached a periodic cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledRun {
    /// Every crossing consumed, up to the first repeated `(plane, bin, phase)`.
    pub records: Vec<CrossingRecord>,
    /// Plane ids of `records`.
    pub visitation: Vec<u8>,
    /// Number of records before the cycle starts.
    pub transient: usize,
}

impl ControlledRun {
    pub fn cycle(&self) -> &[CrossingRecord] {
        &self.records[self.transient..]
    }
}

/// Drives the bin map with `word` repeated, starting from a crossing at `first`
/// at time `t0` with control phase `phase0`, until a `(plane, bin, phase)`
/// triple repeats.
pub fn run_from<D: BinDynamics + ?Sized>(
    dynamics: &D,
    first: BinId,
    t0: f64,
    phase0: usize,
    word: &ControlWord,
    max_crossings: usize,
) -> Result<ControlledRun> {
    if max_crossings == 0 {
        return Err(Error::InvalidArgument("max_crossings must be at least 1".into()));
    }
    let n = word.len();
    let mut detector = CycleDetector::new();
    let mut records = Vec::new();
    let mut at = first;
    let mut t = t0;
    let mut phase = phase0 % n;
    loop {
        let record = CrossingRecord {
            plane: at.plane,
            bin: at.bin,
            control_phase: phase,
            t,
        };
        if let Some(start) = detector.push(record.key()) {
            let visitation = records.iter().map(|r: &CrossingRecord| r.plane.bit()).collect();
            return Ok(ControlledRun {
                records,
                visitation,
                transient: start,
            });
        }
        if records.len() == max_crossings {
            return Err(Error::NotStabilized {
                crossings: max_crossings,
            });
        }
        records.push(record);
        let post = dynamics.apply(at, word.bit(phase))?;
        let hop = dynamics.hop(post)?;
        at = hop.to;
        t += hop.dt;
        phase = (phase + 1) % n;
    }
}

/// Controlled run from an arbitrary state using integration for every hop.
pub fn run_controlled(
    s0: &State,
    word: &ControlWord,
    max_crossings: usize,
    ss: &SectionSet,
    ct: &CodingTable,
    cfg: &SystemConfig,
) -> Result<ControlledRun> {
    let flow = FlowDynamics::new(ss, ct, cfg)?;
    let entry = flow.enter(s0)?;
    run_from(&flow, entry.to, s0.t + entry.dt, 0, word, max_crossings)
}
