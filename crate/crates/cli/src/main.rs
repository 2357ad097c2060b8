//! `cupolet-lab`: batch front end for cupolet generation, entanglement,
//! targeting and analysis.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

mod lab;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cupolet_core::analysis;
use cupolet_core::control::ControlWord;
use cupolet_core::cupolet::{Catalog, Cupolet};
use cupolet_core::entangle::{self, EntangledPair, MeasureMode, Perturbation};
use cupolet_core::exchange::ExchangeFunction;
use cupolet_core::targeting::{self, TransitionGraph};

use lab::{Lab, CATALOG, CODING_TABLE, GRAPH, SAMPLES};

#[derive(Parser, Debug)]
#[command(name = "cupolet-lab", version, about = "Cupolets of the double scroll oscillator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Workspace directory for inputs and outputs [default: $CUPOLET_LAB_DIR or .]
    #[arg(long, global = true)]
    dir: Option<PathBuf>,
    /// Config file of `key = value` lines [default: <dir>/config.txt if present]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set bins_per_plane=2000`
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Override the config's rng_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Calibrate the control planes and write the coding table
    Calibrate,
    /// Stabilize one control word and add it to the catalog
    Gen {
        #[arg(long)]
        bits: String,
    },
    /// Generate every canonical word up to a length
    Enumerate {
        #[arg(long)]
        max_bits: usize,
    },
    /// Print a cupolet's visitation sequence and bin cycle
    Visit {
        #[arg(long)]
        name: String,
    },
    /// Search, co-simulate and measure entangled pairs
    Entangle {
        #[command(subcommand)]
        command: EntangleCommand,
    },
    /// Shortest transition path between two cupolets
    Target {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Crossing budget for each measured transition
        #[arg(long)]
        max_crossings: Option<usize>,
    },
    /// Block entropy of the free visitation stream or a cupolet's word
    Entropy {
        /// Use this cupolet's repeated visitation word
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Single-period spectra of catalog cupolets
    Spectrum {
        /// Only this cupolet
        #[arg(long)]
        name: Option<String>,
    },
    /// Largest Lyapunov exponent, and local exponents of catalog cupolets
    Lyapunov {
        #[arg(long, default_value_t = 1000.0)]
        duration: f64,
        /// Also compute the local exponent of every catalog cupolet
        #[arg(long)]
        local: bool,
    },
    /// Gram matrix of normalized single-period waveforms
    Gram,
}

#[derive(Subcommand, Debug)]
enum EntangleCommand {
    /// List pairs that drive each other under an exchange function
    Search(ExchangeArgs),
    /// Co-simulate a pair with external control removed
    Cosim {
        #[command(flatten)]
        exchange: ExchangeArgs,
        /// Pair as `A,B`
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 100)]
        periods: usize,
        /// Suspend the exchange at this crossing of A ...
        #[arg(long, requires = "gap")]
        cutoff_at: Option<usize>,
        /// ... for this many crossings
        #[arg(long, requires = "cutoff_at")]
        gap: Option<usize>,
    },
    /// Repeated blind or knowledgeable measurements of a pair
    Measure {
        #[command(flatten)]
        exchange: ExchangeArgs,
        #[arg(long)]
        pair: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Knowledgeable displacement as a fraction of half a bin width
        #[arg(long, default_value_t = 0.4)]
        fraction: f64,
        #[arg(long, default_value_t = 100)]
        periods: usize,
    },
}

#[derive(Args, Debug)]
struct ExchangeArgs {
    /// identity, not, rundec or lookup
    #[arg(long, default_value = "identity")]
    exchange: String,
    /// Lookup table file (`visitation<TAB>emitted` lines) for `--exchange lookup`
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Blind,
    Knowledgeable,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    set_workers(cli.global.workers)?;
    let command = recorded_command(std::env::args().skip(1));
    let mut lab = Lab::open(
        cli.global.dir,
        cli.global.config,
        &cli.global.overrides,
        cli.global.seed,
        command,
    )?;
    match cli.command {
        Command::Calibrate => cmd_calibrate(&mut lab),
        Command::Gen { bits } => cmd_gen(&mut lab, &bits),
        Command::Enumerate { max_bits } => cmd_enumerate(&mut lab, max_bits),
        Command::Visit { name } => cmd_visit(&mut lab, &name),
        Command::Entangle { command } => match command {
            EntangleCommand::Search(x) => cmd_search(&mut lab, &x),
            EntangleCommand::Cosim {
                exchange,
                pair,
                periods,
                cutoff_at,
                gap,
            } => cmd_cosim(&mut lab, &exchange, &pair, periods, cutoff_at.zip(gap)),
            EntangleCommand::Measure {
                exchange,
                pair,
                mode,
                trials,
                fraction,
                periods,
            } => cmd_measure(&mut lab, &exchange, &pair, mode, trials, fraction, periods),
        },
        Command::Target { from, to, max_crossings } => cmd_target(&mut lab, &from, &to, max_crossings),
        Command::Entropy { name, n_max } => cmd_entropy(&mut lab, name.as_deref(), n_max),
        Command::Spectrum { name } => cmd_spectrum(&mut lab, name.as_deref()),
        Command::Lyapunov { duration, local } => cmd_lyapunov(&mut lab, duration, local),
        Command::Gram => cmd_gram(&mut lab),
    }
}

/// Arguments as recorded in manifests. The output directory and the worker
/// count do not affect results and are left out, so the same run in two
/// places writes identical files.
fn recorded_command(args: impl Iterator<Item = String>) -> String {
    const UNRECORDED: [&str; 2] = ["--dir", "--workers"];
    let mut kept = Vec::new();
    let mut skip = false;
    for a in args {
        if std::mem::take(&mut skip) {
            continue;
        }
        if UNRECORDED.contains(&a.as_str()) {
            skip = true;
        } else if !UNRECORDED.iter().any(|f| a.starts_with(&format!("{f}="))) {
            kept.push(a);
        }
    }
    kept.join(" ")
}

#[cfg(feature = "parallel")]
fn set_workers(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_workers(n: Option<usize>) -> Result<()> {
    if n == Some(0) {
        bail!("--workers must be at least 1");
    }
    Ok(())
}

fn cmd_calibrate(lab: &mut Lab) -> Result<()> {
    let cal = lab.calibrate()?;
    let ss = &cal.ss;
    let mut out = String::from("key,value\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    row("anchor", format!("{:?}", ss.geometry.anchor));
    row("bins_per_plane", ss.bins_per_plane.to_string());
    row("attractor_diameter", format!("{:?}", ss.attractor_diameter));
    row("calibration_crossings", ss.crossings.len().to_string());
    for (i, label) in ["left", "right"].iter().enumerate() {
        let p = &ss.planes[i];
        row(&format!("{label}_origin"), format!("{:?} {:?}", p.origin[0], p.origin[1]));
        row(&format!("{label}_axis"), format!("{:?} {:?}", p.axis[0], p.axis[1]));
        row(&format!("{label}_range"), format!("{:?} {:?}", p.lo, p.hi));
        row(&format!("{label}_bin_width"), format!("{:?}", p.width()));
    }
    lab.write_headed(CODING_TABLE, &cal.ct.to_text())?;
    lab.write_report("calibration.csv", &out)?;
    println!(
        "calibrated {} bins per plane, attractor diameter {:.4}",
        ss.bins_per_plane, ss.attractor_diameter
    );
    Ok(())
}

fn save_catalog(lab: &Lab, cat: &Catalog) -> Result<()> {
    lab.write_headed(CATALOG, &cat.to_text())?;
    lab.write_raw(SAMPLES, &cat.samples_text())
}

fn describe(c: &Cupolet) -> String {
    format!(
        "{}\tV{}\tn={}\tT={:.4}",
        c.name,
        c.visitation_string(),
        c.period_crossings,
        c.period_time
    )
}

fn cmd_gen(lab: &mut Lab, bits: &str) -> Result<()> {
    let word: ControlWord = bits.parse()?;
    let mut cat = lab.try_catalog()?.unwrap_or_else(|| Catalog::new(lab.fingerprint()));
    let cal = lab.calibrate()?;
    let gen = cal.generator(&lab.cfg)?;
    let c = gen.generate(&word)?;
    println!("{}", describe(&c));
    cat.entries.remove(&c.control);
    cat.failures.remove(&c.control);
    cat.insert(c)?;
    save_catalog(lab, &cat)
}

fn cmd_enumerate(lab: &mut Lab, max_bits: usize) -> Result<()> {
    let cal = lab.calibrate()?;
    let gen = cal.generator(&lab.cfg)?;
    let cat = gen.enumerate(max_bits)?;
    let collisions = cat.injectivity_audit();
    let mut audit = String::from("kind,words,detail\n");
    for c in &collisions {
        let words: Vec<String> = c.words.iter().map(ToString::to_string).collect();
        let _ = writeln!(audit, "collision,{},period {}", words.join(" "), c.period_crossings);
    }
    for (w, reason) in &cat.failures {
        let _ = writeln!(audit, "failure,{w},{}", reason.replace(',', ";"));
    }
    save_catalog(lab, &cat)?;
    lab.write_report("audit.csv", &audit)?;
    println!(
        "{} cupolets, {} failures, {} collisions",
        cat.len(),
        cat.failures.len(),
        collisions.len()
    );
    Ok(())
}

fn find<'a>(cat: &'a Catalog, name: &str) -> Result<&'a Cupolet> {
    cat.get(name).with_context(|| format!("{name} is not in the catalog"))
}

fn cmd_visit(lab: &mut Lab, name: &str) -> Result<()> {
    let cat = lab.catalog()?;
    let c = find(&cat, name)?;
    let mut out = String::from("k,plane,bin,phase\n");
    for (k, key) in c.bin_cycle.iter().enumerate() {
        let _ = writeln!(out, "{k},{},{},{}", key.plane.bit(), key.bin, key.phase);
    }
    println!("{}", describe(c));
    lab.write_report(&format!("visit_{}.csv", c.name), &out)
}

fn exchange_function(lab: &Lab, x: &ExchangeArgs) -> Result<ExchangeFunction> {
    if x.exchange == "lookup" {
        let path = x.table.as_ref().context("--exchange lookup needs --table")?;
        let path = if path.is_absolute() { path.clone() } else { lab.dir.join(path) };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(ExchangeFunction::parse_lookup(&text)?);
    }
    Ok(x.exchange.parse()?)
}

fn cmd_search(lab: &mut Lab, x: &ExchangeArgs) -> Result<()> {
    let f = exchange_function(lab, x)?;
    let cat = lab.catalog()?;
    let pairs = entangle::search_pairs(&cat, &f);
    lab.write_report(&format!("pairs_{}.csv", f.kind()), &entangle::pairs_csv(&pairs))?;
    println!("{} pairs under {f}", pairs.len());
    Ok(())
}

fn find_pair(cat: &Catalog, f: &ExchangeFunction, spec: &str) -> Result<EntangledPair> {
    let (a, b) = spec.split_once(',').context("--pair must look like A,B")?;
    let (a, b) = (find(cat, a.trim())?, find(cat, b.trim())?);
    entangle::search_pairs(cat, f)
        .into_iter()
        .find(|p| (p.a == a.name && p.b == b.name) || (p.a == b.name && p.b == a.name))
        .with_context(|| format!("{} and {} are not entangled under {f}", a.name, b.name))
}

fn cmd_cosim(
    lab: &mut Lab,
    x: &ExchangeArgs,
    pair: &str,
    periods: usize,
    cutoff: Option<(usize, usize)>,
) -> Result<()> {
    let f = exchange_function(lab, x)?;
    let cat = lab.catalog()?;
    let p = find_pair(&cat, &f, pair)?;
    let cal = lab.calibrate()?;
    let gen = cal.generator(&lab.cfg)?;
    let perturbation = cutoff.map(|(at, gap)| Perturbation::Cutoff { at, gap });
    let report = entangle::co_simulate(&p, &cat, &gen, periods, perturbation)?;
    let mut body = report.to_csv();
    for (i, d) in report.gap_distances.iter().enumerate() {
        for (t, dist) in d {
            let _ = writeln!(body, "# gap_distance,{},{t:?},{dist:?}", ["A", "B"][i]);
        }
    }
    lab.write_report(&format!("cosim_{}_{}.csv", p.a, p.b), &body)?;
    println!(
        "persisted={} recovered={} destabilized={:?} underruns={:?}",
        report.persisted(),
        report.recovered(),
        report.destabilized,
        report.underruns
    );
    Ok(())
}

fn cmd_measure(
    lab: &mut Lab,
    x: &ExchangeArgs,
    pair: &str,
    mode: Mode,
    trials: usize,
    fraction: f64,
    periods: usize,
) -> Result<()> {
    let f = exchange_function(lab, x)?;
    let cat = lab.catalog()?;
    let p = find_pair(&cat, &f, pair)?;
    let cal = lab.calibrate()?;
    let gen = cal.generator(&lab.cfg)?;
    let mode = match mode {
        Mode::Blind => MeasureMode::Blind,
        Mode::Knowledgeable => MeasureMode::Knowledgeable,
    };
    let seed = lab.cfg.rng_seed;
    let reports = entangle::measurement_trials(&p, &cat, &gen, mode, trials, fraction, periods, seed)?;
    let mut out = String::from("trial,system,at,parameter,destroyed\n");
    for (i, r) in reports.iter().enumerate() {
        let (system, at, param) = match r.perturbation {
            Perturbation::FlipQueued { system, at, position } => (system, at, position.to_string()),
            Perturbation::Displace { system, at, offset } => (system, at, format!("{offset:?}")),
            Perturbation::Cutoff { at, gap } => (0, at, gap.to_string()),
        };
        let _ = writeln!(out, "{i},{},{at},{param},{}", ["A", "B"][system], r.destroyed);
    }
    let destroyed = reports.iter().filter(|r| r.destroyed).count();
    let file = match mode {
        MeasureMode::Blind => "measure_blind.csv",
        MeasureMode::Knowledgeable => "measure_knowledgeable.csv",
    };
    lab.write_report(file, &out)?;
    println!("{destroyed}/{} trials destroyed the entanglement", reports.len());
    Ok(())
}

fn cmd_target(lab: &mut Lab, from: &str, to: &str, max_crossings: Option<usize>) -> Result<()> {
    let cat = lab.catalog()?;
    let (a, b) = (find(&cat, from)?.name.clone(), find(&cat, to)?.name.clone());
    let stored = match lab.graph_text()? {
        Some(text) => Some(TransitionGraph::parse(&text, &cat).with_context(|| format!("in {GRAPH}"))?),
        None => None,
    };
    let cal = lab.calibrate()?;
    let gen = cal.generator(&lab.cfg)?;
    let max = max_crossings.unwrap_or(lab.cfg.max_crossings);
    let graph = match stored {
        Some(g) => g,
        None => {
            let g = targeting::build_graph(&cat, &gen.cache, max)?;
            lab.write_headed(GRAPH, &g.to_csv())?;
            g
        }
    };
    let (i, j) = (graph.index(&a).context("source not in graph")?, graph.index(&b).context("target not in graph")?);
    let Some(path) = graph.shortest_path(i, j) else {
        bail!("{b} is not reachable from {a}");
    };
    let names = graph.path_names(&path);
    let exec = targeting::execute_path(&names, &cat, &gen.cache, max)?;
    let mut out = String::from("hop,from,to,weight,transient,dwell\n");
    for (k, w) in names.windows(2).enumerate() {
        let weight = graph.weight(path.nodes[k], path.nodes[k + 1]).unwrap_or(0);
        let dwell = if k == 0 { 0 } else { exec.dwell[k - 1] };
        let _ = writeln!(out, "{k},{},{},{weight},{},{dwell}", w[0], w[1], exec.transients[k]);
    }
    lab.write_report(&format!("path_{a}_{b}.csv"), &out)?;
    println!(
        "{} cost={} realized={}",
        names.join(" -> "),
        path.cost,
        exec.total_transient
    );
    if exec.total_transient != path.cost {
        bail!("realized transient {} differs from path cost {}", exec.total_transient, path.cost);
    }
    Ok(())
}

fn cmd_entropy(lab: &mut Lab, name: Option<&str>, n_max: usize) -> Result<()> {
    let (label, symbols) = match name {
        Some(name) => {
            let cat = lab.catalog()?;
            let c = find(&cat, name)?;
            let reps = (10 * n_max).div_ceil(c.period_crossings).max(2);
            (c.name.clone(), c.visitation.repeat(reps))
        }
        None => {
            let cal = lab.calibrate()?;
            let bits: Vec<u8> = cal.ss.crossings.iter().map(|c| c.plane.bit()).collect();
            ("free".to_string(), bits)
        }
    };
    let e = analysis::block_entropy_rate(&symbols, n_max)?;
    lab.write_report(&format!("entropy_{label}.csv"), &e.to_csv())?;
    println!("h = {:.6} nats/symbol over {} symbols", e.rate, symbols.len());
    Ok(())
}

fn cmd_spectrum(lab: &mut Lab, name: Option<&str>) -> Result<()> {
    let cat = lab.catalog()?;
    let cups: Vec<&Cupolet> = match name {
        Some(n) => vec![find(&cat, n)?],
        None => cat.cupolets().collect(),
    };
    let mut out = String::from("cupolet,k,magnitude\n");
    for c in cups {
        let s = analysis::cupolet_spectrum(c)?;
        for (k, m) in s.iter().enumerate() {
            let _ = writeln!(out, "{},{k},{m:.12e}", c.name);
        }
        println!(
            "{}: dominant peak {:.3} of non-DC power, {} peaks above 1%",
            c.name,
            analysis::dominant_peak_fraction(&s),
            analysis::count_peaks(&s, 0.01)
        );
    }
    let file = match name {
        Some(n) => format!("spectrum_{}.csv", find(&cat, n)?.name),
        None => "spectrum.csv".to_string(),
    };
    lab.write_report(&file, &out)
}

fn cmd_lyapunov(lab: &mut Lab, duration: f64, local: bool) -> Result<()> {
    let lambda = analysis::max_lyapunov(&lab.cfg, duration)?;
    let mut out = String::from("quantity,exponent\n");
    let _ = writeln!(out, "max,{lambda:.12e}");
    println!("max exponent {lambda:.6} over {duration} time units");
    if local {
        let cat = lab.catalog()?;
        let cal = lab.calibrate()?;
        let gen = cal.generator(&lab.cfg)?;
        for c in cat.cupolets() {
            let l = analysis::local_lyapunov(c, &gen)?;
            let _ = writeln!(out, "{},{l:.12e}", c.name);
        }
    }
    lab.write_report("lyapunov.csv", &out)
}

fn cmd_gram(lab: &mut Lab) -> Result<()> {
    let cat = lab.catalog()?;
    let (names, m) = analysis::gram_matrix(&cat)?;
    let off = m
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max);
    lab.write_report("gram.csv", &analysis::gram_csv(&names, &m))?;
    println!("{} cupolets, largest off-diagonal magnitude {off:.4}", names.len());
    Ok(())
}
