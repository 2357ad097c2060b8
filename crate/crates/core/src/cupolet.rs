//! Cupolet generation, periodicity detection, initial-condition checks,
//! catalog enumeration and persistence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use crate::config::{Fingerprint, SystemConfig};
use crate::control::{
    least_rotation, primitive_period, rotate, run_from, BinDynamics, BinId, CachedDynamics, ControlWord, CycleKey,
    FlowDynamics,
};
use crate::dynsys::{self, State};
use crate::error::{Error, Result};
use crate::par::*;
use crate::section::{parse_bits, parse_header, CodingTable, Plane, SectionSet};

/// Dense samples recorded on every crossing-to-crossing arc.
pub const SAMPLES_PER_ARC: usize = 64;

/// Incremental first-recurrence detector backed by a seen-map.
#[derive(Debug, Clone)]
pub struct CycleDetector<T> {
    seen: HashMap<T, usize>,
    len: usize,
}

impl<T: Eq + Hash> CycleDetector<T> {
    pub fn new() -> Self {
        Self {
            seen: HashMap::new(),
            len: 0,
        }
    }

    /// Feeds the next element. Returns the index of its first occurrence if
    /// it was seen before; the element is then not recorded.
    pub fn push(&mut self, item: T) -> Option<usize> {
        if let Some(&first) = self.seen.get(&item) {
            return Some(first);
        }
        self.seen.insert(item, self.len);
        self.len += 1;
        None
    }
}

impl<T: Eq + Hash> Default for CycleDetector<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Transient length and cycle of the first recurrence in `stream`.
pub fn detect_cycle<T: Eq + Hash + Clone>(stream: impl IntoIterator<Item = T>) -> Option<(usize, Vec<T>)> {
    let mut detector = CycleDetector::new();
    let mut prefix = Vec::new();
    for item in stream {
        if let Some(start) = detector.push(item.clone()) {
            return Some((start, prefix.split_off(start)));
        }
        prefix.push(item);
    }
    None
}

/// A stabilized periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Cupolet {
    pub name: String,
    /// Canonical (least-rotation) control word.
    pub control: ControlWord,
    /// One period of crossings, least rotation of itself.
    pub bin_cycle: Vec<CycleKey>,
    /// Plane ids of `bin_cycle`.
    pub visitation: Vec<u8>,
    pub period_crossings: usize,
    pub period_time: f64,
    /// `SAMPLES_PER_ARC` points per arc, `t` measured from the start of the period.
    pub orbit_samples: Vec<State>,
    pub fingerprint: Fingerprint,
}

impl Cupolet {
    pub fn visitation_string(&self) -> String {
        bits_to_string(&self.visitation)
    }

    /// `(plane, bin)` projection of the cycle, reduced to its primitive root
    /// and least rotation: the geometric identity of the orbit.
    pub fn orbit_key(&self) -> Vec<BinId> {
        let bins: Vec<BinId> = self.bin_cycle.iter().map(CycleKey::bin_id).collect();
        let root = &bins[..primitive_period(&bins)];
        rotate(root, least_rotation(root))
    }
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| char::from(b'0' + b)).collect()
}

pub fn cupolet_name(word: &ControlWord) -> String {
    format!("C{word}")
}

/// Canonical form of a detected cycle: the least rotation of the cycle or of
/// its mirror image, whichever is smaller.
pub fn canonical_cycle(cycle: &[CycleKey]) -> Vec<CycleKey> {
    let mirror: Vec<CycleKey> = cycle.iter().map(CycleKey::mirror).collect();
    let a = rotate(cycle, least_rotation(cycle));
    let b = rotate(&mirror, least_rotation(&mirror));
    a.min(b)
}

/// Reusable generation context: the flow, its cached bin map and the
/// default initial state.
pub struct Generator<'a> {
    pub flow: FlowDynamics<'a>,
    pub cache: CachedDynamics,
    pub start: State,
}

/// Outcome of generating one word from many initial states.
#[derive(Debug, Clone, PartialEq)]
pub struct IcReport {
    pub word: ControlWord,
    pub trials: usize,
    pub stabilized: usize,
    /// Number of distinct canonical bin cycles reached.
    pub distinct_cycles: usize,
    pub failures: Vec<String>,
    pub independent: bool,
}

impl<'a> Generator<'a> {
    pub fn new(ss: &'a SectionSet, ct: &'a CodingTable, cfg: &'a SystemConfig) -> Result<Self> {
        let flow = FlowDynamics::new(ss, ct, cfg)?;
        let cache = CachedDynamics::build(&flow);
        let start = ss.default_initial_state()?;
        Ok(Self { flow, cache, start })
    }

    pub fn config(&self) -> &SystemConfig {
        self.flow.config
    }

    /// Canonical bin cycle reached from an arbitrary state.
    pub fn cycle_from(&self, word: &ControlWord, s: &State) -> Result<Vec<CycleKey>> {
        let entry = self.flow.enter(s)?;
        cycle_on(&self.cache, entry.to, word, self.config().max_crossings)
    }

    pub fn generate(&self, word: &ControlWord) -> Result<Cupolet> {
        let word = word.canonical();
        let cycle = self.cycle_from(&word.primitive_root(), &self.start)?;
        self.assemble(word, cycle)
    }

    /// Integrates one period of `bin_cycle` under `word`, one dense arc per
    /// element from the post-control bin center up to and including the next
    /// crossing. Fails if the replay leaves the cycle.
    pub fn replay_arcs(&self, word: &ControlWord, bin_cycle: &[CycleKey]) -> Result<Vec<Vec<State>>> {
        let mut arcs = Vec::with_capacity(bin_cycle.len());
        for (k, key) in bin_cycle.iter().enumerate() {
            let post = self.flow.apply(key.bin_id(), word.bit(key.phase))?;
            let start = self.flow.center(post)?;
            let mut trace = Vec::new();
            let c = dynsys::integrate_to_crossing_traced(&start, self.config(), &self.flow.sections.geometry, |s| {
                trace.push(*s)
            })?;
            let landed = crate::section::bin_lookup(&c.state, self.flow.sections)?;
            let next = bin_cycle[(k + 1) % bin_cycle.len()];
            if landed.plane != next.plane || landed.bin != next.bin {
                return Err(Error::InvalidArgument(format!(
                    "replay of {} left its cycle at element {k}",
                    cupolet_name(word)
                )));
            }
            arcs.push(trace);
        }
        Ok(arcs)
    }

    /// Builds the cupolet record for a known canonical cycle, resimulating one
    /// period with the integrator to collect orbit samples.
    pub fn assemble(&self, word: ControlWord, bin_cycle: Vec<CycleKey>) -> Result<Cupolet> {
        let arcs = self.replay_arcs(&word, &bin_cycle)?;
        let mut samples = Vec::with_capacity(bin_cycle.len() * SAMPLES_PER_ARC);
        let mut t0 = 0.0;
        for trace in &arcs {
            resample_arc(trace, t0, &mut samples);
            t0 += trace[trace.len() - 1].t;
        }
        let visitation = bin_cycle.iter().map(|k| k.plane.bit()).collect();
        Ok(Cupolet {
            name: cupolet_name(&word),
            control: word,
            period_crossings: bin_cycle.len(),
            bin_cycle,
            visitation,
            period_time: t0,
            orbit_samples: samples,
            fingerprint: self.config().fingerprint(),
        })
    }

    pub fn verify_ic_independence(&self, word: &ControlWord, k: usize, rng_seed: u64) -> Result<IcReport> {
        let states = self.flow.sections.sample_attractor_states(self.config(), k, rng_seed);
        let entries: Vec<Result<BinId>> = states.iter().map(|s| self.flow.enter(s).map(|h| h.to)).collect();
        verify_entries(&self.cache, word, &entries, self.config().max_crossings)
    }

    pub fn enumerate(&self, max_bits: usize) -> Result<Catalog> {
        if max_bits == 0 {
            return Err(Error::InvalidArgument("max bits must be at least 1".into()));
        }
        let words = lyndon_words(max_bits);
        let results: Vec<(ControlWord, Result<Cupolet>)> = words
            .into_par_iter()
            .map(|bits| {
                let w = ControlWord::new(bits).expect("non-empty binary word");
                let r = self.generate(&w);
                (w, r)
            })
            .collect();
        let mut catalog = Catalog::new(self.config().fingerprint());
        for (w, r) in results {
            match r {
                Ok(c) => catalog.insert(c)?,
                Err(e) => {
                    catalog.failures.insert(w, e.to_string());
                }
            }
        }
        Ok(catalog)
    }
}

/// Canonical bin cycle reached by `word` from a crossing in `first` at phase 0.
pub fn cycle_on<D: BinDynamics + ?Sized>(
    dynamics: &D,
    first: BinId,
    word: &ControlWord,
    max_crossings: usize,
) -> Result<Vec<CycleKey>> {
    let run = run_from(dynamics, first, 0.0, 0, word, max_crossings)?;
    let keys: Vec<CycleKey> = run.cycle().iter().map(|r| r.key()).collect();
    Ok(canonical_cycle(&keys))
}

/// Runs `word` from every entry bin and checks that a single cycle is reached.
pub fn verify_entries<D: BinDynamics + ?Sized>(
    dynamics: &D,
    word: &ControlWord,
    entries: &[Result<BinId>],
    max_crossings: usize,
) -> Result<IcReport> {
    if entries.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let word = word.canonical();
    let root = word.primitive_root();
    let mut cycles: Vec<Vec<CycleKey>> = Vec::new();
    let mut failures = Vec::new();
    for entry in entries {
        match entry.clone().and_then(|b| cycle_on(dynamics, b, &root, max_crossings)) {
            Ok(c) => {
                if !cycles.contains(&c) {
                    cycles.push(c);
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let stabilized = entries.len() - failures.len();
    Ok(IcReport {
        word,
        trials: entries.len(),
        stabilized,
        distinct_cycles: cycles.len(),
        independent: failures.is_empty() && cycles.len() == 1,
        failures,
    })
}

pub fn generate(w: &ControlWord, ss: &SectionSet, ct: &CodingTable, cfg: &SystemConfig) -> Result<Cupolet> {
    Generator::new(ss, ct, cfg)?.generate(w)
}

pub fn verify_ic_independence(
    w: &ControlWord,
    k: usize,
    rng_seed: u64,
    ss: &SectionSet,
    ct: &CodingTable,
    cfg: &SystemConfig,
) -> Result<IcReport> {
    Generator::new(ss, ct, cfg)?.verify_ic_independence(w, k, rng_seed)
}

pub fn enumerate_catalog(max_bits: usize, ss: &SectionSet, ct: &CodingTable, cfg: &SystemConfig) -> Result<Catalog> {
    Generator::new(ss, ct, cfg)?.enumerate(max_bits)
}

/// Aperiodic binary necklaces (Lyndon words) of length `1..=n`, in
/// lexicographic order (Duval's generation algorithm).
pub fn lyndon_words(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut w: Vec<i8> = vec![-1];
    while let Some(last) = w.last_mut() {
        *last += 1;
        out.push(w.iter().map(|&b| b as u8).collect());
        let m = w.len();
        while w.len() < n {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&1) {
            w.pop();
        }
    }
    out
}

fn resample_arc(trace: &[State], t_offset: f64, out: &mut Vec<State>) {
    let t_start = trace[0].t;
    let duration = trace[trace.len() - 1].t - t_start;
    let mut seg = 0;
    for j in 0..SAMPLES_PER_ARC {
        let t = t_start + duration * j as f64 / SAMPLES_PER_ARC as f64;
        while seg + 2 < trace.len() && trace[seg + 1].t < t {
            seg += 1;
        }
        let (a, b) = (&trace[seg], &trace[(seg + 1).min(trace.len() - 1)]);
        let span = b.t - a.t;
        let f = if span > 0.0 { ((t - a.t) / span).clamp(0.0, 1.0) } else { 0.0 };
        let (xa, xb) = (a.to_array(), b.to_array());
        let x = [0, 1, 2].map(|i| xa[i] + f * (xb[i] - xa[i]));
        out.push(State::from_array(x, t - t_start + t_offset));
    }
}

/// Cupolets generated under one configuration, keyed by canonical word.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub fingerprint: Fingerprint,
    pub entries: BTreeMap<ControlWord, Cupolet>,
    /// Words that failed to stabilize, with the reason.
    pub failures: BTreeMap<ControlWord, String>,
}

/// Distinct control words that stabilized the same geometric orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub words: Vec<ControlWord>,
    pub period_crossings: usize,
}

impl Catalog {
    pub fn new(fingerprint: Fingerprint) -> Self {
        Self {
            fingerprint,
            entries: BTreeMap::new(),
            failures: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, c: Cupolet) -> Result<()> {
        self.fingerprint.ensure_matches(&c.fingerprint)?;
        if self.entries.contains_key(&c.control) {
            return Err(Error::InvalidArgument(format!("duplicate catalog key {}", c.name)));
        }
        self.entries.insert(c.control.clone(), c);
        Ok(())
    }

    /// Looks up by name (`C0011`) or bare word.
    pub fn get(&self, name: &str) -> Option<&Cupolet> {
        let w: ControlWord = name.parse().ok()?;
        self.entries.get(&w.canonical())
    }

    pub fn cupolets(&self) -> impl Iterator<Item = &Cupolet> {
        self.entries.values()
    }

    /// Groups distinct words whose cupolets share a geometric orbit.
    pub fn injectivity_audit(&self) -> Vec<Collision> {
        let mut groups: BTreeMap<Vec<BinId>, Vec<&Cupolet>> = BTreeMap::new();
        for c in self.cupolets() {
            groups.entry(c.orbit_key()).or_default().push(c);
        }
        groups
            .into_values()
            .filter(|g| g.len() > 1)
            .map(|g| Collision {
                period_crossings: g[0].period_crossings,
                words: g.iter().map(|c| c.control.clone()).collect(),
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# cupolet-catalog v1 fingerprint={}\n", self.fingerprint);
        for c in self.cupolets() {
            let cycle: Vec<String> = c
                .bin_cycle
                .iter()
                .map(|k| format!("{}:{}:{}", k.plane.bit(), k.bin, k.phase))
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:?}\t{}\t{}",
                c.name,
                c.control,
                c.period_crossings,
                c.period_time,
                c.visitation_string(),
                cycle.join(",")
            );
        }
        out
    }

    /// Orbit samples: one `t v_c1 v_c2 i_l` row per sample, a `# name`
    /// line before and a blank line after each cupolet.
    pub fn samples_text(&self) -> String {
        let mut out = format!("# cupolet-samples v1 fingerprint={}\n", self.fingerprint);
        for c in self.cupolets() {
            let _ = writeln!(out, "# {}", c.name);
            for s in &c.orbit_samples {
                let _ = writeln!(out, "{:?} {:?} {:?} {:?}", s.t, s.v_c1, s.v_c2, s.i_l);
            }
            out.push('\n');
        }
        out
    }

    /// Parses a catalog file and, optionally, its sibling samples file.
    pub fn parse(text: &str, samples: Option<&str>) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let fingerprint = parse_header(lines.next().map(|(_, l)| l), "cupolet-catalog")?;
        let mut catalog = Catalog::new(fingerprint.clone());
        for (i, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::Parse { line: i + 1, message: m };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(err(format!("expected 6 tab-separated fields, got {}", f.len())));
            }
            let control: ControlWord = f[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let period_crossings: usize = f[2].parse().map_err(|_| err("bad period_crossings".into()))?;
            let period_time: f64 = f[3].parse().map_err(|_| err("bad period_time".into()))?;
            let visitation = parse_bits(f[4]).ok_or_else(|| err("bad visitation word".into()))?;
            let bin_cycle = f[5]
                .split(',')
                .map(|t| {
                    let mut p = t.split(':');
                    let plane = p.next()?.parse::<u8>().ok().and_then(Plane::from_bit)?;
                    let bin = p.next()?.parse().ok()?;
                    let phase = p.next()?.parse().ok()?;
                    p.next().is_none().then_some(CycleKey { plane, bin, phase })
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("bad bin_cycle".into()))?;
            if f[0] != cupolet_name(&control)
                || bin_cycle.len() != period_crossings
                || visitation.len() != period_crossings
            {
                return Err(err("inconsistent record".into()));
            }
            catalog
                .insert(Cupolet {
                    name: f[0].to_string(),
                    control,
                    bin_cycle,
                    visitation,
                    period_crossings,
                    period_time,
                    orbit_samples: Vec::new(),
                    fingerprint: fingerprint.clone(),
                })
                .map_err(|e| err(e.to_string()))?;
        }
        if let Some(samples) = samples {
            catalog.attach_samples(samples)?;
        }
        Ok(catalog)
    }

    fn attach_samples(&mut self, text: &str) -> Result<()> {
        let mut lines = text.lines().enumerate();
        let fp = parse_header(lines.next().map(|(_, l)| l), "cupolet-samples")?;
        self.fingerprint.ensure_matches(&fp)?;
        let mut current: Option<ControlWord> = None;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                current = None;
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            if let Some(name) = line.strip_prefix("# ") {
                let w: ControlWord = name.parse().map_err(|_| err("bad cupolet name"))?;
                if !self.entries.contains_key(&w) {
                    return Err(err("samples for a cupolet not in the catalog"));
                }
                current = Some(w);
                continue;
            }
            let key = current.as_ref().ok_or_else(|| err("sample row outside a block"))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err("bad sample row"))?;
            if v.len() != 4 {
                return Err(err("expected `t v_c1 v_c2 i_l`"));
            }
            let c = self.entries.get_mut(key).expect("checked above");
            c.orbit_samples.push(State {
                t: v[0],
                v_c1: v[1],
                v_c2: v[2],
                i_l: v[3],
            });
        }
        Ok(())
    }
}
