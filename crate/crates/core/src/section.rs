//! Control planes, their bin partitions, the per-bin coding table of future
//! lobe symbols, and macrocontrol target selection.
//!
//! Each control plane is the half-plane `v_c2 = 0` on the outward side of one
//! lobe's equilibrium, crossed in a single direction. Points on a plane are
//! located by a single coordinate along the principal direction of the
//! calibration crossings; the perpendicular coordinate of a bin center is the
//! local mean of the calibration cloud.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Fingerprint, SystemConfig};
use crate::dynsys::{self, equilibria, integrate_for, rk4_step, Crossing, DoubleScroll, State};
use crate::error::{Error, Result};
use crate::par::*;

/// Transient crossings discarded before calibration starts recording.
const CALIBRATION_TRANSIENT: usize = 100;
/// Relative widening of the observed axis extent on each side.
const RANGE_MARGIN: f64 = 0.02;

/// Lobe label of a control plane. The visitation symbol is the plane id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    Left = 0,
    Right = 1,
}

impl Plane {
    pub const BOTH: [Plane; 2] = [Plane::Left, Plane::Right];

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bit(b: u8) -> Option<Plane> {
        match b {
            0 => Some(Plane::Left),
            1 => Some(Plane::Right),
            _ => None,
        }
    }

    pub fn mirror(self) -> Plane {
        match self {
            Plane::Left => Plane::Right,
            Plane::Right => Plane::Left,
        }
    }
}

/// Where the planes are and which way they are crossed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionGeometry {
    /// `v_c1` of the right-lobe equilibrium; the left plane mirrors it.
    pub anchor: f64,
    /// Sign of `v_c2` after a counted crossing, per plane.
    pub direction: [f64; 2],
}

impl SectionGeometry {
    /// Offset from the plane, negative before a crossing and non-negative after.
    #[inline]
    pub fn signed_offset(&self, plane: Plane, x: &[f64; 3]) -> f64 {
        self.direction[plane.index()] * x[1]
    }

    #[inline]
    pub fn on_side(&self, plane: Plane, x: &[f64; 3]) -> bool {
        match plane {
            Plane::Right => x[0] >= self.anchor,
            Plane::Left => x[0] <= -self.anchor,
        }
    }
}

/// Bin partition of one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBins {
    /// Origin of the in-plane coordinates, as `(v_c1, i_l)`.
    pub origin: [f64; 2],
    /// Unit bin axis in `(v_c1, i_l)`, pointing away from the attractor center.
    pub axis: [f64; 2],
    pub normal: [f64; 2],
    pub lo: f64,
    pub hi: f64,
    /// Perpendicular coordinate of each bin center.
    pub offsets: Vec<f64>,
}

impl PlaneBins {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.offsets.len() as f64
    }

    pub fn axis_coordinate(&self, v_c1: f64, i_l: f64) -> f64 {
        (v_c1 - self.origin[0]) * self.axis[0] + (i_l - self.origin[1]) * self.axis[1]
    }

    /// Bins of the opposite plane under `x -> -x`.
    pub fn mirrored(&self) -> PlaneBins {
        PlaneBins {
            origin: self.origin.map(|v| -v),
            axis: self.axis.map(|v| -v),
            normal: self.normal.map(|v| -v),
            lo: self.lo,
            hi: self.hi,
            offsets: self.offsets.clone(),
        }
    }

    fn normal_coordinate(&self, v_c1: f64, i_l: f64) -> f64 {
        (v_c1 - self.origin[0]) * self.normal[0] + (i_l - self.origin[1]) * self.normal[1]
    }
}

/// Result of locating a section point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinLookup {
    pub plane: Plane,
    pub bin: usize,
    pub out_of_range: bool,
}

/// Calibrated pair of control planes.
#[derive(Debug, Clone)]
pub struct SectionSet {
    pub geometry: SectionGeometry,
    pub planes: [PlaneBins; 2],
    pub bins_per_plane: usize,
    pub tolerance: f64,
    /// Recorded calibration crossings, in trajectory order.
    pub crossings: Vec<Crossing>,
    /// Diagonal of the bounding box of the calibration trajectory.
    pub attractor_diameter: f64,
    pub fingerprint: Fingerprint,
}

impl SectionSet {
    pub fn plane(&self, plane: Plane) -> &PlaneBins {
        &self.planes[plane.index()]
    }

    pub fn bin_width(&self, plane: Plane) -> f64 {
        self.plane(plane).width()
    }

    /// The state every generated cupolet starts from.
    pub fn default_initial_state(&self) -> Result<State> {
        let first = self
            .crossings
            .first()
            .ok_or_else(|| Error::CalibrationFailure("no calibration crossings recorded".into()))?;
        let hit = bin_lookup(&first.state, self)?;
        bin_center(hit.plane, hit.bin, self)
    }

    /// `count` states drawn from the attractor: a random calibration crossing
    /// advanced by a random fraction of a loop.
    pub fn sample_attractor_states(&self, cfg: &SystemConfig, count: usize, seed: u64) -> Vec<State> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = DoubleScroll::new(cfg);
        (0..count)
            .map(|_| {
                let c = &self.crossings[rng.random_range(0..self.crossings.len())];
                let dt: f64 = rng.random_range(0.05..3.0);
                State::from_array(integrate_for(&field, &c.state.to_array(), dt, cfg.step_size), 0.0)
            })
            .collect()
    }
}

/// Finds the crossing direction of the planes from a free trajectory.
fn detect_directions(field: &DoubleScroll, mut x: [f64; 3], anchor: f64, h: f64, bound: f64) -> Result<([f64; 2], [f64; 3])> {
    let mut votes = [[0usize; 2]; 2];
    let mut seen = 0;
    let mut steps = 0usize;
    while seen < 4 * CALIBRATION_TRANSIENT {
        let y = rk4_step(field, &x, h);
        if dynsys::norm(&y) > bound || !y[0].is_finite() {
            return Err(Error::NumericalBlowup {
                norm: dynsys::norm(&y),
                bound,
            });
        }
        if (x[1] < 0.0) != (y[1] < 0.0) {
            let plane = if y[0] >= anchor {
                Some(Plane::Right)
            } else if y[0] <= -anchor {
                Some(Plane::Left)
            } else {
                None
            };
            if let Some(p) = plane {
                let up = (y[1] >= 0.0) as usize;
                votes[p.index()][up] += 1;
                seen += 1;
            }
        }
        x = y;
        steps += 1;
        if steps > 10_000_000 {
            return Err(Error::CalibrationFailure("trajectory never reached the control planes".into()));
        }
    }
    // Odd symmetry: the left plane is crossed opposite to the right one.
    let right_up = votes[1][1] + votes[0][0];
    let right_down = votes[1][0] + votes[0][1];
    let d = if right_up >= right_down { 1.0 } else { -1.0 };
    Ok(([-d, d], x))
}

/// First principal direction of a 2-D point cloud.
fn principal_axis(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let n = points.len() as f64;
    let mean = points.iter().fold([0.0, 0.0], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mean[0], p[1] - mean[1]);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (mean, [theta.cos(), theta.sin()])
}

pub fn calibrate(cfg: &SystemConfig, n_crossings: usize, rng_seed: u64) -> Result<SectionSet> {
    if n_crossings < 1000 {
        return Err(Error::InvalidArgument(format!(
            "calibration needs at least 1000 crossings, got {n_crossings}"
        )));
    }
    cfg.validate()?;
    let eqs = equilibria(cfg)?;
    let anchor = eqs[1].v_c1;
    let field = DoubleScroll::new(cfg);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let x0 = [
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
    ];
    let (direction, x) = detect_directions(&field, x0, anchor, cfg.step_size, cfg.blowup_bound)?;
    let geometry = SectionGeometry { anchor, direction };

    let mut state = State::from_array(x, 0.0);
    for _ in 0..CALIBRATION_TRANSIENT {
        state = dynsys::integrate_to_crossing(&state, cfg, &geometry)?.state;
    }
    let mut crossings = Vec::with_capacity(n_crossings);
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for _ in 0..n_crossings {
        let c = dynsys::integrate_to_crossing_traced(&state, cfg, &geometry, |s| {
            for (k, v) in s.to_array().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        })?;
        state = c.state;
        crossings.push(c);
    }
    let attractor_diameter = dynsys::norm(&[hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]);

    for plane in Plane::BOTH {
        let count = crossings.iter().filter(|c| c.plane == plane).count();
        if (count as f64) < 0.1 * n_crossings as f64 {
            return Err(Error::CalibrationFailure(format!(
                "plane {plane:?} received {count} of {n_crossings} crossings"
            )));
        }
    }
    // The flow is odd, so the left-plane cloud is folded onto the right one and
    // the left bins are fitted as the exact mirror of the right bins.
    let cloud: Vec<[f64; 2]> = crossings
        .iter()
        .map(|c| match c.plane {
            Plane::Right => [c.state.v_c1, c.state.i_l],
            Plane::Left => [-c.state.v_c1, -c.state.i_l],
        })
        .collect();
    let right = fit_bins(&cloud, cfg.bins_per_plane);
    let planes = [right.mirrored(), right];

    Ok(SectionSet {
        geometry,
        planes,
        bins_per_plane: cfg.bins_per_plane,
        tolerance: cfg.crossing_tolerance,
        crossings,
        attractor_diameter,
        fingerprint: cfg.fingerprint(),
    })
}

/// Fits right-plane bins to a cloud of `(v_c1, i_l)` points.
fn fit_bins(cloud: &[[f64; 2]], bins: usize) -> PlaneBins {
    let (origin, mut axis) = principal_axis(cloud);
    if axis[0] < 0.0 {
        axis = [-axis[0], -axis[1]];
    }
    let normal = [-axis[1], axis[0]];
    let mut pb = PlaneBins {
        origin,
        axis,
        normal,
        lo: 0.0,
        hi: 0.0,
        offsets: vec![0.0; bins],
    };
    let coords: Vec<(f64, f64)> = cloud
        .iter()
        .map(|p| (pb.axis_coordinate(p[0], p[1]), pb.normal_coordinate(p[0], p[1])))
        .collect();
    let (min, max) = coords
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.0), b.max(c.0)));
    let margin = RANGE_MARGIN * (max - min);
    pb.lo = min - margin;
    pb.hi = max + margin;

    let width = pb.width();
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (s, n) in coords {
        let i = (((s - pb.lo) / width) as usize).min(bins - 1);
        sum[i] += n;
        count[i] += 1;
    }
    // Empty bins interpolate linearly between their nearest populated neighbours.
    let filled: Vec<usize> = (0..bins).filter(|&i| count[i] > 0).collect();
    for i in 0..bins {
        pb.offsets[i] = if count[i] > 0 {
            sum[i] / count[i] as f64
        } else {
            let right = filled.partition_point(|&j| j < i);
            match (right.checked_sub(1).map(|k| filled[k]), filled.get(right)) {
                (Some(a), Some(&b)) => {
                    let (ya, yb) = (sum[a] / count[a] as f64, sum[b] / count[b] as f64);
                    ya + (yb - ya) * (i - a) as f64 / (b - a) as f64
                }
                (Some(a), None) => sum[a] / count[a] as f64,
                (None, Some(&b)) => sum[b] / count[b] as f64,
                (None, None) => 0.0,
            }
        };
    }
    pb
}

/// Locates a section point. Coordinates beyond the calibrated range clamp to
/// the end bin and raise `out_of_range`.
pub fn bin_lookup(p: &State, ss: &SectionSet) -> Result<BinLookup> {
    if !p.is_finite() || p.v_c2.abs() > ss.tolerance {
        return Err(Error::NotOnSection { offset: p.v_c2.abs() });
    }
    let plane = if p.v_c1 > 0.0 { Plane::Right } else { Plane::Left };
    let pb = ss.plane(plane);
    let s = pb.axis_coordinate(p.v_c1, p.i_l);
    let raw = ((s - pb.lo) / pb.width()).floor();
    let last = ss.bins_per_plane - 1;
    let (bin, out_of_range) = if raw < 0.0 {
        (0, true)
    } else if raw > last as f64 {
        (last, true)
    } else {
        (raw as usize, false)
    };
    Ok(BinLookup { plane, bin, out_of_range })
}

pub fn bin_center(plane: Plane, bin: usize, ss: &SectionSet) -> Result<State> {
    if bin >= ss.bins_per_plane {
        return Err(Error::IndexOutOfRange {
            index: bin,
            bins: ss.bins_per_plane,
        });
    }
    let pb = ss.plane(plane);
    let s = pb.lo + (bin as f64 + 0.5) * pb.width();
    let n = pb.offsets[bin];
    Ok(State::new(
        pb.origin[0] + s * pb.axis[0] + n * pb.normal[0],
        0.0,
        pb.origin[1] + s * pb.axis[1] + n * pb.normal[1],
    ))
}

/// Future lobe words of every bin center under free evolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingTable {
    pub depth: usize,
    /// `words[plane][bin]`, each of length `depth`, symbols in {0, 1}.
    pub words: [Vec<Vec<u8>>; 2],
    pub fingerprint: Fingerprint,
}

impl CodingTable {
    pub fn word(&self, plane: Plane, bin: usize) -> &[u8] {
        &self.words[plane.index()][bin]
    }

    pub fn bins_per_plane(&self) -> usize {
        self.words[0].len()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# cupolet-coding-table v1 fingerprint={}\n", self.fingerprint);
        for plane in Plane::BOTH {
            for (bin, w) in self.words[plane.index()].iter().enumerate() {
                let word: String = w.iter().map(|b| char::from(b'0' + b)).collect();
                let _ = writeln!(out, "{}\t{}\t{}", plane.bit(), bin, word);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let fingerprint = parse_header(lines.next().map(|(_, l)| l), "cupolet-coding-table")?;
        let mut words: [Vec<Vec<u8>>; 2] = [Vec::new(), Vec::new()];
        let mut depth = None;
        for (i, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let mut f = line.split('\t');
            let (Some(p), Some(b), Some(w), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(err("expected plane<TAB>bin<TAB>word"));
            };
            let plane = p.parse::<u8>().ok().and_then(Plane::from_bit).ok_or_else(|| err("bad plane"))?;
            let bin: usize = b.parse().map_err(|_| err("bad bin"))?;
            if bin != words[plane.index()].len() {
                return Err(err("bins must be listed in order"));
            }
            let word = parse_bits(w).ok_or_else(|| err("bad word"))?;
            if *depth.get_or_insert(word.len()) != word.len() {
                return Err(err("inconsistent word length"));
            }
            words[plane.index()].push(word);
        }
        if words[0].len() != words[1].len() || words[0].is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "table must list the same number of bins on both planes".into(),
            });
        }
        Ok(CodingTable {
            depth: depth.unwrap_or(0),
            words,
            fingerprint,
        })
    }
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Option<Vec<u8>> {
    s.bytes()
        .map(|c| match c {
            b'0' => Some(0),
            b'1' => Some(1),
            _ => None,
        })
        .collect()
}

/// Parses `# <kind> v1 fingerprint=<hex>`.
pub(crate) fn parse_header(line: Option<&str>, kind: &str) -> Result<Fingerprint> {
    let err = || Error::Parse {
        line: 1,
        message: format!("expected `# {kind} v1 fingerprint=<hex>` header"),
    };
    let line = line.ok_or_else(err)?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some("#") || parts.next() != Some(kind) || parts.next() != Some("v1") {
        return Err(err());
    }
    let fp = parts.next().and_then(|p| p.strip_prefix("fingerprint=")).ok_or_else(err)?;
    fp.parse()
}

/// Plane labels of the next `depth` crossings from a bin center.
pub fn future_word(plane: Plane, bin: usize, depth: usize, ss: &SectionSet, cfg: &SystemConfig) -> Result<Vec<u8>> {
    let mut s = bin_center(plane, bin, ss)?;
    let mut word = Vec::with_capacity(depth);
    for _ in 0..depth {
        let c = dynsys::integrate_to_crossing(&s, cfg, &ss.geometry)?;
        word.push(c.plane.bit());
        s = c.state;
    }
    Ok(word)
}

pub fn build_coding_table(ss: &SectionSet, cfg: &SystemConfig) -> Result<CodingTable> {
    ss.fingerprint.ensure_matches(&cfg.fingerprint())?;
    let depth = cfg.table_depth;
    let build = |plane: Plane| -> Result<Vec<Vec<u8>>> {
        (0..ss.bins_per_plane)
            .into_par_iter()
            .map(|bin| {
                future_word(plane, bin, depth, ss, cfg).map_err(|e| Error::BinFailure {
                    plane,
                    bin,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    Ok(CodingTable {
        depth,
        words: [build(Plane::Left)?, build(Plane::Right)?],
        fingerprint: ss.fingerprint.clone(),
    })
}

/// Nearest bin on the same plane whose future word differs from the current
/// one at symbol `horizon`. Earlier symbols are not constrained. Ties in
/// distance resolve toward the lower index.
pub fn macro_target(plane: Plane, bin: usize, ct: &CodingTable, horizon: usize) -> Result<usize> {
    if horizon < 1 || horizon > ct.depth {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} outside 1..={}",
            ct.depth
        )));
    }
    let n = ct.bins_per_plane();
    if bin >= n {
        return Err(Error::IndexOutOfRange { index: bin, bins: n });
    }
    let words = &ct.words[plane.index()];
    let current = &words[bin];
    let k = horizon - 1;
    let flips = |j: usize| words[j][k] != current[k];
    for d in 1..n {
        if d <= bin && flips(bin - d) {
            return Ok(bin - d);
        }
        if bin + d < n && flips(bin + d) {
            return Ok(bin + d);
        }
    }
    Err(Error::NoReachableTarget { plane, bin, horizon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(words: &[&str]) -> CodingTable {
        let w: Vec<Vec<u8>> = words.iter().map(|s| parse_bits(s).unwrap()).collect();
        CodingTable {
            depth: w[0].len(),
            words: [w.clone(), w],
            fingerprint: "00".parse().unwrap(),
        }
    }

    /// Exhaustive scan over all bins, independent of the outward search.
    fn brute_target(plane: Plane, bin: usize, ct: &CodingTable, m: usize) -> Option<usize> {
        let words = &ct.words[plane.index()];
        let cur = &words[bin];
        (0..words.len())
            .filter(|&j| words[j][m - 1] != cur[m - 1])
            .min_by_key(|&j| (j.abs_diff(bin), j))
    }

    #[test]
    fn macro_target_prefers_lower_index_on_ties() {
        let ct = table(&["01", "00", "01", "00", "01"]);
        // Bin 2 has word 01: bins 1 and 3 both differ at symbol 2, distance 1.
        assert_eq!(macro_target(Plane::Left, 2, &ct, 2).unwrap(), 1);
        assert_eq!(macro_target(Plane::Right, 0, &ct, 2).unwrap(), 1);
    }

    #[test]
    fn macro_target_ignores_earlier_symbols() {
        let ct = table(&["100", "000", "110", "101"]);
        // From bin 0 (100) at horizon 2: bin 2 is the nearest with a 1 in slot 2.
        assert_eq!(macro_target(Plane::Left, 0, &ct, 2).unwrap(), 2);
        // At horizon 3: bin 3 is the nearest with a 1 in slot 3.
        assert_eq!(macro_target(Plane::Left, 0, &ct, 3).unwrap(), 3);
        // At horizon 1: nearest word starting with 0 -> bin 1.
        assert_eq!(macro_target(Plane::Left, 0, &ct, 1).unwrap(), 1);
        // From bin 3 (101) at horizon 3: adjacent bin 2 ends in 0.
        assert_eq!(macro_target(Plane::Left, 3, &ct, 3).unwrap(), 2);
    }

    #[test]
    fn macro_target_empty_candidate_set() {
        let ct = table(&["01", "11", "01", "11"]);
        // Every bin has a 1 in slot 2.
        assert!(matches!(
            macro_target(Plane::Left, 0, &ct, 2),
            Err(Error::NoReachableTarget { horizon: 2, .. })
        ));
        assert!(matches!(macro_target(Plane::Left, 0, &ct, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(macro_target(Plane::Left, 9, &ct, 1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn macro_target_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let words: Vec<String> = (0..40)
                .map(|_| (0..6).map(|_| if rng.random_bool(0.5) { '1' } else { '0' }).collect())
                .collect();
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let ct = table(&refs);
            for _ in 0..100 {
                let bin = rng.random_range(0..40);
                let m = rng.random_range(1..=6);
                let got = macro_target(Plane::Left, bin, &ct, m).ok();
                assert_eq!(got, brute_target(Plane::Left, bin, &ct, m));
            }
        }
    }

    #[test]
    fn coding_table_text_round_trip() {
        let ct = table(&["0110", "1111", "0000"]);
        let text = ct.to_text();
        assert!(text.starts_with("# cupolet-coding-table v1 fingerprint=00\n"));
        assert!(text.contains("1\t2\t0000\n"));
        assert_eq!(CodingTable::parse(&text).unwrap(), ct);
    }

    #[test]
    fn coding_table_parse_errors() {
        assert!(CodingTable::parse("0\t0\t01\n").is_err());
        let bad = "# cupolet-coding-table v1 fingerprint=ab\n0\t0\t01\n0\t1\t011\n";
        assert!(matches!(CodingTable::parse(bad), Err(Error::Parse { line: 3, .. })));
        let unordered = "# cupolet-coding-table v1 fingerprint=ab\n0\t1\t01\n";
        assert!(CodingTable::parse(unordered).is_err());
    }

    #[test]
    fn principal_axis_of_a_line() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect();
        let (mean, axis) = principal_axis(&pts);
        assert!((mean[0] - 24.5).abs() < 1e-12);
        let expected = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
        assert!((axis[0].abs() - expected[0]).abs() < 1e-12);
        assert!((axis[1].abs() - expected[1]).abs() < 1e-12);
    }
}
