//! Transition graph between cupolets and shortest-path targeting.
//!
//! Switching from cupolet A to cupolet B means: sit on A's cycle at its
//! canonical element 0, then start feeding B's control word from phase 0.
//! The edge weight is the number of crossings before the trajectory is on
//! B's cycle.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::fmt::Write as _;

use crate::config::Fingerprint;
use crate::control::{run_from, BinDynamics, BinId, CycleKey};
use crate::cupolet::{canonical_cycle, Catalog, Cupolet};
use crate::error::{Error, Result};
use crate::par::*;
use crate::section::parse_header;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    pub fingerprint: Fingerprint,
    /// Catalog names in catalog order; edges refer to indices into this list.
    pub nodes: Vec<String>,
    pub edges: BTreeMap<(usize, usize), usize>,
    /// Ordered pairs whose switch did not land on the destination cycle.
    pub failures: Vec<(String, String, String)>,
}

/// Both orientations of a cupolet's cycle.
fn cycle_set(c: &Cupolet) -> HashSet<CycleKey> {
    c.bin_cycle.iter().flat_map(|k| [*k, k.mirror()]).collect()
}

/// Crossings needed to settle on `to` after switching at `start`.
pub fn measure_transition<D: BinDynamics + ?Sized>(
    dynamics: &D,
    start: BinId,
    to: &Cupolet,
    max_crossings: usize,
) -> Result<usize> {
    let run = run_from(dynamics, start, 0.0, 0, &to.control.primitive_root(), max_crossings)?;
    let keys: Vec<CycleKey> = run.cycle().iter().map(|r| r.key()).collect();
    if canonical_cycle(&keys) != to.bin_cycle {
        return Err(Error::TargetingFailed {
            hop: 0,
            reason: format!("switching to {} settled on a different cycle", to.name),
        });
    }
    Ok(run.transient)
}

pub fn build_graph<D: BinDynamics + ?Sized>(cat: &Catalog, dynamics: &D, max_crossings: usize) -> Result<TransitionGraph> {
    if cat.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let cups: Vec<&Cupolet> = cat.cupolets().collect();
    let n = cups.len();
    let measured: Vec<(usize, usize, Result<usize>)> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let w = if i == j {
                Ok(0)
            } else {
                measure_transition(dynamics, cups[i].bin_cycle[0].bin_id(), cups[j], max_crossings)
            };
            (i, j, w)
        })
        .collect();
    let mut edges = BTreeMap::new();
    let mut failures = Vec::new();
    for (i, j, w) in measured {
        match w {
            Ok(w) => {
                edges.insert((i, j), w);
            }
            Err(e) => failures.push((cups[i].name.clone(), cups[j].name.clone(), e.to_string())),
        }
    }
    Ok(TransitionGraph {
        fingerprint: cat.fingerprint.clone(),
        nodes: cups.iter().map(|c| c.name.clone()).collect(),
        edges,
        failures,
    })
}

/// A directed path through the graph. A path from a node to itself has no hops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: usize,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

impl TransitionGraph {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.get(&(from, to)).copied()
    }

    /// Minimal total weight; ties go to fewer hops, then to the
    /// lexicographically smallest node sequence.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Path> {
        let n = self.nodes.len();
        if a >= n || b >= n {
            return None;
        }
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (&(i, j), &w) in &self.edges {
            if i != j {
                out[i].push((j, w));
            }
        }
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0usize, 0usize, vec![a])));
        while let Some(Reverse((cost, hops, path))) = heap.pop() {
            let v = *path.last().expect("paths are never empty");
            if settled[v] {
                continue;
            }
            settled[v] = true;
            if v == b {
                return Some(Path { nodes: path, cost });
            }
            for &(u, w) in &out[v] {
                if !settled[u] {
                    let mut next = path.clone();
                    next.push(u);
                    heap.push(Reverse((cost + w, hops + 1, next)));
                }
            }
        }
        None
    }

    pub fn path_names(&self, p: &Path) -> Vec<String> {
        p.nodes.iter().map(|&i| self.nodes[i].clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# cupolet-graph v1 fingerprint={}\nfrom,to,weight\n", self.fingerprint);
        for (&(i, j), w) in &self.edges {
            let _ = writeln!(out, "{},{},{}", self.nodes[i], self.nodes[j], w);
        }
        out
    }

    /// Reads an edge list written by [`TransitionGraph::to_csv`]. Node names
    /// come from `cat`, which must carry the same fingerprint.
    pub fn parse(text: &str, cat: &Catalog) -> Result<Self> {
        let mut lines = text.lines();
        let fingerprint = parse_header(lines.next(), "cupolet-graph")?;
        cat.fingerprint.ensure_matches(&fingerprint)?;
        let nodes: Vec<String> = cat.cupolets().map(|c| c.name.clone()).collect();
        let mut edges = BTreeMap::new();
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            if line.trim().is_empty() || line.starts_with('#') || line == "from,to,weight" {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split(',').collect();
            let [from, to, w] = fields[..] else {
                return Err(err(format!("expected `from,to,weight`, got {line:?}")));
            };
            let idx = |name: &str| {
                nodes
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| err(format!("{name} is not in the catalog")))
            };
            let w: usize = w.parse().map_err(|_| err(format!("bad weight {w:?}")))?;
            edges.insert((idx(from)?, idx(to)?), w);
        }
        Ok(TransitionGraph {
            fingerprint,
            nodes,
            edges,
            failures: Vec::new(),
        })
    }
}

/// Realized switching schedule of a path that reached its target.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    pub path: Vec<String>,
    /// Transient crossings of each hop.
    pub transients: Vec<usize>,
    /// Crossings spent on each intermediate cycle waiting for its element 0.
    pub dwell: Vec<usize>,
    pub total_transient: usize,
}

/// Drives the dynamics along `path`, starting on the first cupolet's cycle at
/// its element 0. Between hops it waits on the intermediate cycle until
/// element 0 (or its mirror) comes round.
pub fn execute_path<D: BinDynamics + ?Sized>(
    path: &[String],
    cat: &Catalog,
    dynamics: &D,
    max_crossings: usize,
) -> Result<ExecutionReport> {
    let cups: Vec<&Cupolet> = path
        .iter()
        .map(|n| {
            cat.get(n)
                .ok_or_else(|| Error::InvalidArgument(format!("{n} is not in the catalog")))
        })
        .collect::<Result<_>>()?;
    let mut report = ExecutionReport {
        path: path.to_vec(),
        transients: Vec::new(),
        dwell: Vec::new(),
        total_transient: 0,
    };
    let Some(first) = cups.first() else {
        return Ok(report);
    };
    let mut at = first.bin_cycle[0].bin_id();
    // Control phase of the cupolet currently held, in its own frame.
    let mut phase = first.bin_cycle[0].phase;
    for (hop, pair) in cups.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        if hop > 0 {
            let start = from.bin_cycle[0];
            let word = from.control.primitive_root();
            let mut waited = 0;
            while !is_element(at, phase, start) {
                if waited == max_crossings {
                    return Err(Error::TargetingFailed {
                        hop,
                        reason: format!("element 0 of {} never came round", from.name),
                    });
                }
                at = step(dynamics, at, word.bit(phase))?;
                phase = (phase + 1) % word.len();
                waited += 1;
            }
            report.dwell.push(waited);
        }
        let word = to.control.primitive_root();
        let target = cycle_set(to);
        phase = 0;
        let mut transient = 0;
        while !target.contains(&CycleKey {
            plane: at.plane,
            bin: at.bin,
            phase,
        }) {
            if transient == max_crossings {
                return Err(Error::TargetingFailed {
                    hop,
                    reason: format!("not on {} after {max_crossings} crossings", to.name),
                });
            }
            at = step(dynamics, at, word.bit(phase))?;
            phase = (phase + 1) % word.len();
            transient += 1;
        }
        report.transients.push(transient);
        report.total_transient += transient;
    }
    Ok(report)
}

fn is_element(at: BinId, phase: usize, key: CycleKey) -> bool {
    let here = CycleKey {
        plane: at.plane,
        bin: at.bin,
        phase,
    };
    here == key || here == key.mirror()
}

fn step<D: BinDynamics + ?Sized>(dynamics: &D, at: BinId, bit: u8) -> Result<BinId> {
    Ok(dynamics.hop(dynamics.apply(at, bit)?)?.to)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, usize)]) -> TransitionGraph {
        TransitionGraph {
            fingerprint: "00".parse().unwrap(),
            nodes: (0..n).map(|i| format!("C{i}")).collect(),
            edges: edges.iter().map(|&(i, j, w)| ((i, j), w)).collect(),
            failures: Vec::new(),
        }
    }

    /// Cheapest simple path by exhaustive enumeration, same tie rules.
    fn brute(g: &TransitionGraph, a: usize, b: usize) -> Option<(usize, usize, Vec<usize>)> {
        fn walk(g: &TransitionGraph, path: &mut Vec<usize>, cost: usize, b: usize, best: &mut Option<(usize, usize, Vec<usize>)>) {
            let v = *path.last().unwrap();
            if v == b {
                let cand = (cost, path.len() - 1, path.clone());
                if best.as_ref().is_none_or(|cur| cand < *cur) {
                    *best = Some(cand);
                }
                return;
            }
            for u in 0..g.nodes.len() {
                if let Some(w) = g.weight(v, u) {
                    if u != v && !path.contains(&u) {
                        path.push(u);
                        walk(g, path, cost + w, b, best);
                        path.pop();
                    }
                }
            }
        }
        let mut best = None;
        walk(g, &mut vec![a], 0, b, &mut best);
        best
    }

    #[test]
    fn same_node_is_empty_path() {
        let g = graph(3, &[(0, 1, 4)]);
        let p = g.shortest_path(1, 1).unwrap();
        assert_eq!((p.hops(), p.cost), (0, 0));
    }

    #[test]
    fn unreachable_is_none() {
        let g = graph(3, &[(0, 1, 4), (2, 1, 1)]);
        assert!(g.shortest_path(0, 2).is_none());
        assert!(g.shortest_path(0, 7).is_none());
    }

    #[test]
    fn ties_prefer_fewer_hops_then_lexicographic() {
        // 0->3 direct costs 4; 0->1->3 and 0->2->3 also cost 4.
        let g = graph(4, &[(0, 3, 4), (0, 1, 2), (1, 3, 2), (0, 2, 2), (2, 3, 2)]);
        assert_eq!(g.shortest_path(0, 3).unwrap().nodes, vec![0, 3]);
        let g = graph(4, &[(0, 2, 2), (2, 3, 2), (0, 1, 2), (1, 3, 2)]);
        assert_eq!(g.shortest_path(0, 3).unwrap().nodes, vec![0, 1, 3]);
    }

    #[test]
    fn matches_exhaustive_search_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(1..=6);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.random_bool(0.45) {
                        edges.push((i, j, rng.random_range(0..6)));
                    }
                }
            }
            let g = graph(n, &edges);
            for a in 0..n {
                for b in 0..n {
                    let got = g.shortest_path(a, b).map(|p| (p.cost, p.hops(), p.nodes));
                    assert_eq!(got, brute(&g, a, b), "graph {edges:?} {a}->{b}");
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut cat = Catalog::new("00".parse().unwrap());
        for w in ["0", "1"] {
            let control: crate::control::ControlWord = w.parse().unwrap();
            cat.insert(Cupolet {
                name: crate::cupolet::cupolet_name(&control),
                control,
                bin_cycle: vec![CycleKey {
                    plane: crate::section::Plane::Left,
                    bin: w.len(),
                    phase: 0,
                }],
                visitation: vec![0],
                period_crossings: 1,
                period_time: 1.0,
                orbit_samples: vec![],
                fingerprint: "00".parse().unwrap(),
            })
            .unwrap();
        }
        let mut g = graph(2, &[(0, 1, 3), (1, 0, 5), (0, 0, 0)]);
        g.nodes = vec!["C0".into(), "C1".into()];
        let text = g.to_csv();
        assert!(text.contains("C0,C1,3\n"));
        assert_eq!(TransitionGraph::parse(&text, &cat).unwrap(), g);
        let other = text.replace("fingerprint=00", "fingerprint=01");
        assert!(matches!(TransitionGraph::parse(&other, &cat), Err(Error::FingerprintMismatch { .. })));
    }
}
