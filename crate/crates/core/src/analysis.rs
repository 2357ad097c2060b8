//! State-vector weights, collapse checks, symbolic entropy, Lyapunov
//! exponents, single-period spectra and the waveform Gram matrix.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::config::SystemConfig;
use crate::control::{BinDynamics, ControlWord, ControlledRun};
use crate::cupolet::{Catalog, Cupolet, Generator};
use crate::dynsys::{integrate_for, norm, DoubleScroll, State, VectorField};
use crate::entangle::oriented_samples;
use crate::error::{Error, Result};
use crate::par::*;
use crate::section::{bin_center, SectionSet};

/// Points per period used for spectra and Gram waveforms.
pub const WAVEFORM_POINTS: usize = 1024;

/// Nonnegative weights over catalog cupolets, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub weights: BTreeMap<String, f64>,
    pub t: f64,
}

impl StateVector {
    pub fn weight(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cupolet,alpha\n");
        for (k, a) in &self.weights {
            let _ = writeln!(out, "{k},{a:.12e}");
        }
        out
    }
}

/// Distance from `s` to the nearest orbit sample of `c` or of its mirror twin.
pub fn orbit_distance(s: &State, c: &Cupolet) -> f64 {
    [false, true]
        .iter()
        .flat_map(|&m| oriented_samples(c, m))
        .map(|o| o.distance(s))
        .fold(f64::INFINITY, f64::min)
}

/// Gaussian kernel weights `exp(-d_k^2 / w^2)`, normalized.
pub fn superposition_weights(s: &State, cat: &Catalog, kernel_width: f64) -> Result<StateVector> {
    if cat.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if !(kernel_width > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel width {kernel_width} must be positive")));
    }
    let cups: Vec<&Cupolet> = cat.cupolets().collect();
    let d2: Vec<f64> = cups.par_iter().map(|c| orbit_distance(s, c).powi(2)).collect();
    if let Some(c) = cups.iter().find(|c| c.orbit_samples.is_empty()) {
        return Err(Error::InvalidArgument(format!("{} has no orbit samples", c.name)));
    }
    // Shift by the smallest distance so the largest term is exactly 1.
    let base = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = d2.iter().map(|d| (-(d - base) / (kernel_width * kernel_width)).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(StateVector {
        weights: cups.iter().zip(raw).map(|(c, r)| (c.name.clone(), r / total)).collect(),
        t: s.t,
    })
}

/// Default kernel width: 5% of the attractor diameter.
pub fn default_kernel_width(attractor_diameter: f64) -> f64 {
    0.05 * attractor_diameter
}

/// True iff `name`'s weight exceeds `threshold` at every state from index
/// `transient` on.
pub fn collapse_check(
    states: &[State],
    transient: usize,
    name: &str,
    cat: &Catalog,
    kernel_width: f64,
    threshold: f64,
) -> Result<bool> {
    if cat.get(name).is_none() {
        return Err(Error::InvalidArgument(format!("{name} is not in the catalog")));
    }
    for s in states.iter().skip(transient) {
        if superposition_weights(s, cat, kernel_width)?.weight(name) < threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Post-control states (bin centers) of every crossing of a controlled run
/// driven by `word`.
pub fn post_control_states<D: BinDynamics + ?Sized>(
    run: &ControlledRun,
    word: &ControlWord,
    dynamics: &D,
    ss: &SectionSet,
) -> Result<Vec<State>> {
    run.records
        .iter()
        .map(|r| {
            let post = dynamics.apply(r.key().bin_id(), word.bit(r.control_phase))?;
            Ok(bin_center(post.plane, post.bin, ss)?.at_time(r.t))
        })
        .collect()
}

/// Block entropies `H(1..=n_max)` in nats and the rate `H(n_max) - H(n_max - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub block_entropies: Vec<(usize, f64)>,
    pub rate: f64,
}

impl EntropyEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,H\n");
        for (n, h) in &self.block_entropies {
            let _ = writeln!(out, "{n},{h:.12e}");
        }
        let _ = writeln!(out, "# rate={:.12e}", self.rate);
        out
    }
}

/// Empirical entropy of length-`n` blocks, read cyclically so that every
/// position starts a block.
fn block_entropy(symbols: &[u8], n: usize) -> f64 {
    let len = symbols.len();
    let mut counts: HashMap<u64, usize> = HashMap::new();
    let mut code = 0u64;
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for i in 0..len + n - 1 {
        code = ((code << 1) | u64::from(symbols[i % len] & 1)) & mask;
        if i + 1 >= n {
            *counts.entry(code).or_insert(0) += 1;
        }
    }
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    let total = len as f64;
    -c.iter()
        .map(|&k| {
            let p = k as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn block_entropy_rate(symbols: &[u8], n_max: usize) -> Result<EntropyEstimate> {
    if n_max == 0 || n_max > 63 {
        return Err(Error::InvalidArgument(format!("block size {n_max} outside 1..=63")));
    }
    if symbols.len() < 10 * n_max {
        return Err(Error::InsufficientData {
            needed: 10 * n_max,
            got: symbols.len(),
        });
    }
    let block_entropies: Vec<(usize, f64)> = (1..=n_max).map(|n| (n, block_entropy(symbols, n))).collect();
    let h = |n: usize| if n == 0 { 0.0 } else { block_entropies[n - 1].1 };
    let rate = (h(n_max) - h(n_max - 1)).clamp(0.0, std::f64::consts::LN_2);
    Ok(EntropyEstimate { block_entropies, rate })
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Benettin two-trajectory estimate of the largest Lyapunov exponent:
/// separation `d0`, renormalized every `every` time units.
pub fn max_lyapunov_of<F: VectorField + ?Sized>(
    field: &F,
    x0: [f64; 3],
    duration: f64,
    h: f64,
    every: f64,
    bound: f64,
) -> Result<f64> {
    if !(duration > 0.0 && every > 0.0 && h > 0.0) {
        return Err(Error::InvalidArgument("duration, step and interval must be positive".into()));
    }
    let d0 = 1e-8;
    let mut x = x0;
    let mut y = [x0[0] + d0, x0[1], x0[2]];
    let steps = (duration / every).round().max(1.0) as usize;
    let mut sum = 0.0;
    for _ in 0..steps {
        x = integrate_for(field, &x, every, h);
        y = integrate_for(field, &y, every, h);
        let nx = norm(&x);
        if !nx.is_finite() || nx > bound {
            return Err(Error::NumericalBlowup { norm: nx, bound });
        }
        let d = sub(&y, &x);
        let dist = norm(&d);
        if !(dist > 0.0) {
            return Err(Error::NumericalBlowup { norm: dist, bound: 0.0 });
        }
        sum += (dist / d0).ln();
        y = [0, 1, 2].map(|i| x[i] + d[i] * d0 / dist);
    }
    Ok(sum / (steps as f64 * every))
}

/// Largest Lyapunov exponent of the double scroll, measured on the attractor
/// after a transient of 100 time units.
pub fn max_lyapunov(cfg: &SystemConfig, duration: f64) -> Result<f64> {
    if duration < 1e3 {
        return Err(Error::InvalidArgument(format!("duration {duration} is below 1000")));
    }
    let field = DoubleScroll::new(cfg);
    let x0 = integrate_for(&field, &[0.1, 0.0, 0.0], 100.0, cfg.step_size);
    max_lyapunov_of(&field, x0, duration, cfg.step_size, 1.0, cfg.blowup_bound)
}

/// Finite-time exponent of perturbations transverse to the flow along a
/// closed chain of arcs, measured over exactly one period from each start in
/// `starts` (arc index, point index) and averaged.
///
/// Every arc is a dense trajectory; the chain may jump between the end of one
/// arc and the start of the next. The perturbation is carried across jumps
/// unchanged and renormalized at each arc end.
pub fn local_lyapunov_of<F: VectorField + ?Sized>(
    field: &F,
    arcs: &[Vec<State>],
    h: f64,
    starts: &[(usize, usize)],
) -> Result<f64> {
    if arcs.is_empty() || arcs.iter().any(|a| a.len() < 2) || starts.is_empty() {
        return Err(Error::InvalidArgument("need non-empty arcs and starts".into()));
    }
    let d0 = 1e-7;
    let period: f64 = arcs.iter().map(|a| a[a.len() - 1].t - a[0].t).sum();
    let seed_dir = [0.6, -0.48, 0.64];
    let mut total = 0.0;
    for &(arc0, point0) in starts {
        let mut sum = 0.0;
        let mut dir = transverse(field, &arcs[arc0][point0].to_array(), seed_dir);
        let n = arcs.len();
        for step in 0..=n {
            let k = (arc0 + step) % n;
            let arc = &arcs[k];
            let from = if step == 0 { point0 } else { 0 };
            let to = if step == n { point0 } else { arc.len() - 1 };
            if step == n && point0 == 0 {
                break;
            }
            if to <= from {
                continue;
            }
            let x = arc[from].to_array();
            let dt = arc[to].t - arc[from].t;
            let xr = integrate_for(field, &x, dt, h);
            let yp = integrate_for(field, &[0, 1, 2].map(|i| x[i] + d0 * dir[i]), dt, h);
            let d = sub(&yp, &xr);
            let dist = norm(&d);
            sum += (dist / d0).ln();
            dir = transverse(field, &xr, d.map(|v| v / dist));
        }
        total += sum / period;
    }
    Ok(total / starts.len() as f64)
}

/// `v` with its component along the flow at `x` removed, normalized.
fn transverse<F: VectorField + ?Sized>(field: &F, x: &[f64; 3], v: [f64; 3]) -> [f64; 3] {
    let f = field.eval(x);
    let nf = norm(&f);
    let mut w = v;
    if nf > 0.0 {
        let along = (v[0] * f[0] + v[1] * f[1] + v[2] * f[2]) / (nf * nf);
        w = [0, 1, 2].map(|i| v[i] - along * f[i]);
    }
    let nw = norm(&w);
    if nw > 0.0 {
        w.map(|c| c / nw)
    } else {
        v
    }
}

/// Start points spread evenly over every arc.
pub fn phase_starts(arcs: &[Vec<State>], per_arc: usize) -> Vec<(usize, usize)> {
    arcs.iter()
        .enumerate()
        .flat_map(|(k, a)| {
            let len = a.len() - 1;
            (0..per_arc.max(1)).map(move |j| (k, j * len / per_arc.max(1)))
        })
        .collect()
}

/// Local Lyapunov exponent of a cupolet's orbit, averaged over four start
/// points per arc.
pub fn local_lyapunov(cup: &Cupolet, gen: &Generator<'_>) -> Result<f64> {
    let arcs = gen.replay_arcs(&cup.control, &cup.bin_cycle)?;
    let field = DoubleScroll::new(gen.config());
    local_lyapunov_of(&field, &arcs, gen.config().step_size, &phase_starts(&arcs, 4))
}

/// `v_c1` over one period, linearly interpolated onto `WAVEFORM_POINTS`
/// uniform times in `[0, period)`.
pub fn resampled_waveform(cup: &Cupolet) -> Result<Vec<f64>> {
    let s = &cup.orbit_samples;
    if s.len() < 2 || !(cup.period_time > 0.0) {
        return Err(Error::InvalidArgument(format!("{} has no usable orbit samples", cup.name)));
    }
    let period = cup.period_time;
    let mut out = Vec::with_capacity(WAVEFORM_POINTS);
    let mut seg = 0;
    for j in 0..WAVEFORM_POINTS {
        let t = period * j as f64 / WAVEFORM_POINTS as f64;
        while seg + 1 < s.len() && s[seg + 1].t <= t {
            seg += 1;
        }
        let a = &s[seg];
        // The last sample wraps onto the first one a period later.
        let (bt, bv) = if seg + 1 < s.len() {
            (s[seg + 1].t, s[seg + 1].v_c1)
        } else {
            (period, s[0].v_c1)
        };
        let f = if bt > a.t { ((t - a.t) / (bt - a.t)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(a.v_c1 + f * (bv - a.v_c1));
    }
    Ok(out)
}

/// Discrete Fourier magnitudes of `x`.
pub fn magnitude_spectrum(x: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

pub fn cupolet_spectrum(cup: &Cupolet) -> Result<Vec<f64>> {
    Ok(magnitude_spectrum(&resampled_waveform(cup)?))
}

/// Share of non-DC power held by the strongest frequency (both of its
/// conjugate bins).
pub fn dominant_peak_fraction(spectrum: &[f64]) -> f64 {
    let n = spectrum.len();
    let power = |k: usize| spectrum[k] * spectrum[k];
    let total: f64 = (1..n).map(power).sum();
    if total == 0.0 {
        return 0.0;
    }
    let best = (1..=n / 2)
        .map(|k| if k == n - k { power(k) } else { power(k) + power(n - k) })
        .fold(0.0, f64::max);
    best / total
}

/// Local maxima among the positive frequencies above `fraction` of the
/// largest non-DC magnitude.
pub fn count_peaks(spectrum: &[f64], fraction: f64) -> usize {
    let half = &spectrum[..spectrum.len() / 2 + 1];
    let max = half[1..].iter().copied().fold(0.0, f64::max);
    (1..half.len())
        .filter(|&k| {
            let left = half[k - 1];
            let right = half.get(k + 1).copied().unwrap_or(0.0);
            half[k] > fraction * max && half[k] >= left && half[k] >= right
        })
        .count()
}

pub fn spectrum_csv(spectrum: &[f64]) -> String {
    let mut out = String::from("k,magnitude\n");
    for (k, m) in spectrum.iter().enumerate() {
        let _ = writeln!(out, "{k},{m:.12e}");
    }
    out
}

/// Zero-mean, unit-norm waveform.
fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter_mut().for_each(|v| *v -= mean);
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        w.iter_mut().for_each(|v| *v /= n);
    }
    w
}

/// Inner products of the normalized single-period waveforms, in catalog order.
pub fn gram_matrix(cat: &Catalog) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    if cat.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: cat.len(),
        });
    }
    let cups: Vec<&Cupolet> = cat.cupolets().collect();
    let waves: Vec<Vec<f64>> = cups
        .iter()
        .map(|c| resampled_waveform(c).map(normalized))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..waves.len())
        .into_par_iter()
        .map(|i| {
            (0..waves.len())
                .map(|j| waves[i].iter().zip(&waves[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok((cups.iter().map(|c| c.name.clone()).collect(), rows))
}

pub fn gram_csv(names: &[String], m: &[Vec<f64>]) -> String {
    let mut out = format!("cupolet,{}\n", names.join(","));
    for (name, row) in names.iter().zip(m) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    out
}
