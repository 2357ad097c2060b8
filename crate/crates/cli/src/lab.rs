//! Workspace directory, configuration loading and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cupolet_core::cupolet::{Catalog, Generator};
use cupolet_core::section::{build_coding_table, calibrate};
use cupolet_core::{CodingTable, Fingerprint, SectionSet, SystemConfig};

pub const CATALOG: &str = "catalog.txt";
pub const SAMPLES: &str = "samples.txt";
pub const CODING_TABLE: &str = "coding_table.txt";
pub const GRAPH: &str = "graph.csv";

/// Provenance written as `#` comment lines into every output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub fingerprint: Fingerprint,
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub version: &'static str,
}

impl RunManifest {
    pub fn header(&self) -> String {
        let list = |v: &[String]| if v.is_empty() { "-".to_string() } else { v.join(" ") };
        format!(
            "# tool: cupolet-lab {}\n# command: {}\n# fingerprint: {}\n# seed: {}\n# inputs: {}\n# outputs: {}\n",
            self.version,
            self.command,
            self.fingerprint,
            self.seed,
            list(&self.inputs),
            list(&self.outputs),
        )
    }
}

pub struct Lab {
    pub dir: PathBuf,
    pub cfg: SystemConfig,
    pub command: String,
    inputs: Vec<String>,
}

/// Calibrated sections and coding table for the active configuration.
pub struct Calibrated {
    pub ss: SectionSet,
    pub ct: CodingTable,
}

impl Calibrated {
    pub fn generator<'a>(&'a self, cfg: &'a SystemConfig) -> Result<Generator<'a>> {
        Ok(Generator::new(&self.ss, &self.ct, cfg)?)
    }
}

impl Lab {
    pub fn open(
        dir: Option<PathBuf>,
        config: Option<PathBuf>,
        overrides: &[String],
        seed: Option<u64>,
        command: String,
    ) -> Result<Self> {
        let dir = dir
            .or_else(|| std::env::var_os("CUPOLET_LAB_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut inputs = Vec::new();
        let config = config.or_else(|| {
            let p = dir.join("config.txt");
            p.exists().then_some(p)
        });
        let mut cfg = match &config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                inputs.push(display_name(path));
                SystemConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => SystemConfig::default(),
        };
        for kv in overrides {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("override {kv:?} is not key=value");
            };
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(seed) = seed {
            cfg.rng_seed = seed;
        }
        cfg.validate()?;
        Ok(Lab {
            dir,
            cfg,
            command,
            inputs,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.cfg.fingerprint()
    }

    fn read(&mut self, name: &str) -> Result<Option<String>> {
        let p = self.path(name);
        if !p.exists() {
            return Ok(None);
        }
        self.inputs.push(name.to_string());
        Ok(Some(fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?))
    }

    /// Calibrates from scratch. A stored coding table is reused when its
    /// fingerprint matches and rejected otherwise.
    pub fn calibrate(&mut self) -> Result<Calibrated> {
        let fp = self.fingerprint();
        let stored = match self.read(CODING_TABLE)? {
            Some(text) => {
                let ct = CodingTable::parse(&text).with_context(|| format!("in {CODING_TABLE}"))?;
                fp.ensure_matches(&ct.fingerprint).with_context(|| format!("{CODING_TABLE} was built under another configuration"))?;
                Some(ct)
            }
            None => None,
        };
        let ss = calibrate(&self.cfg, self.cfg.calibration_crossings, self.cfg.rng_seed)?;
        let ct = match stored {
            Some(ct) => ct,
            None => build_coding_table(&ss, &self.cfg)?,
        };
        Ok(Calibrated { ss, ct })
    }

    /// Loads the stored catalog with its samples; refuses another configuration.
    pub fn catalog(&mut self) -> Result<Catalog> {
        let text = self
            .read(CATALOG)?
            .with_context(|| format!("no {CATALOG} in {}; run `enumerate` or `gen` first", self.dir.display()))?;
        let samples = self.read(SAMPLES)?;
        let cat = Catalog::parse(&text, samples.as_deref()).with_context(|| format!("in {CATALOG}"))?;
        self.fingerprint()
            .ensure_matches(&cat.fingerprint)
            .with_context(|| format!("{CATALOG} was built under another configuration"))?;
        Ok(cat)
    }

    pub fn try_catalog(&mut self) -> Result<Option<Catalog>> {
        if self.path(CATALOG).exists() {
            self.catalog().map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn graph_text(&mut self) -> Result<Option<String>> {
        self.read(GRAPH)
    }

    pub fn manifest(&self, outputs: &[&str]) -> RunManifest {
        let mut inputs = self.inputs.clone();
        inputs.dedup();
        RunManifest {
            fingerprint: self.fingerprint(),
            command: self.command.clone(),
            inputs,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            seed: self.cfg.rng_seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    /// Writes a CSV report: manifest comment lines followed by `body`.
    pub fn write_report(&self, name: &str, body: &str) -> Result<()> {
        let text = format!("{}{}", self.manifest(&[name]).header(), body);
        self.write_raw(name, &text)
    }

    /// Writes a file whose first line is a format header; the manifest goes
    /// right after it.
    pub fn write_headed(&self, name: &str, body: &str) -> Result<()> {
        let (first, rest) = body.split_once('\n').unwrap_or((body, ""));
        let text = format!("{first}\n{}{rest}", self.manifest(&[name]).header());
        self.write_raw(name, &text)
    }

    pub fn write_raw(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
        Ok(())
    }
}

fn display_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}
