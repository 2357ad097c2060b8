//! System configuration and its fingerprint.
//!
//! Every persisted artifact (coding table, catalog, graph, reports) carries the
//! fingerprint of the configuration that produced it. Cupolet identities are
//! only meaningful relative to one configuration, so files with different
//! fingerprints are never mixed.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parameters of the double scroll oscillator plus integrator, section and
/// control settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub c1: f64,
    pub c2: f64,
    pub inductance: f64,
    pub conductance: f64,
    pub m0: f64,
    pub m1: f64,
    pub breakpoint: f64,
    pub step_size: f64,
    pub crossing_tolerance: f64,
    /// Longest free flight allowed between two plane crossings.
    pub max_crossing_time: f64,
    pub blowup_bound: f64,
    pub max_crossings: usize,
    pub bins_per_plane: usize,
    /// Macrocontrol horizon: a '1' bit flips the lobe this many loops downstream.
    pub horizon: usize,
    /// Depth of the per-bin future lobe words.
    pub table_depth: usize,
    pub calibration_crossings: usize,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            c1: 1.0 / 9.0,
            c2: 1.0,
            inductance: 1.0 / 7.0,
            conductance: 0.7,
            m0: -0.5,
            m1: -0.8,
            breakpoint: 1.0,
            step_size: 0.005,
            crossing_tolerance: 1e-10,
            max_crossing_time: 50.0,
            blowup_bound: 1e3,
            max_crossings: 10_000,
            bins_per_plane: 1600,
            horizon: 2,
            table_depth: 16,
            calibration_crossings: 10_000,
            rng_seed: 1,
        }
    }
}

/// Hex digest identifying a [`SystemConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(String);

impl Fingerprint {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn ensure_matches(&self, other: &Fingerprint) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                expected: self.0.clone(),
                found: other.0.clone(),
            })
        }
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Fingerprint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("bad fingerprint {s:?}"),
            });
        }
        Ok(Fingerprint(s.to_ascii_lowercase()))
    }
}

const KEYS: &[&str] = &[
    "c1",
    "c2",
    "inductance",
    "conductance",
    "m0",
    "m1",
    "breakpoint",
    "step_size",
    "crossing_tolerance",
    "max_crossing_time",
    "blowup_bound",
    "max_crossings",
    "bins_per_plane",
    "horizon",
    "table_depth",
    "calibration_crossings",
    "rng_seed",
];

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        let params = [
            self.c1,
            self.c2,
            self.inductance,
            self.conductance,
            self.m0,
            self.m1,
            self.breakpoint,
            self.step_size,
            self.crossing_tolerance,
            self.max_crossing_time,
            self.blowup_bound,
        ];
        if params.iter().any(|p| !p.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.c1 <= 0.0 || self.c2 <= 0.0 || self.inductance <= 0.0 {
            return bad("C1, C2 and L must be positive");
        }
        if self.breakpoint <= 0.0 {
            return bad("breakpoint must be positive");
        }
        if self.step_size <= 0.0 || self.crossing_tolerance <= 0.0 {
            return bad("step size and crossing tolerance must be positive");
        }
        if self.max_crossing_time <= 0.0 || self.blowup_bound <= 0.0 {
            return bad("max crossing time and blowup bound must be positive");
        }
        if self.bins_per_plane < 2 {
            return bad("bins_per_plane must be at least 2");
        }
        if self.horizon < 1 || self.horizon > self.table_depth {
            return bad("horizon must satisfy 1 <= horizon <= table_depth");
        }
        if self.max_crossings < 1 {
            return bad("max_crossings must be at least 1");
        }
        Ok(())
    }

    /// Value of a key as it appears in the canonical text form.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "c1" => format!("{:?}", self.c1),
            "c2" => format!("{:?}", self.c2),
            "inductance" => format!("{:?}", self.inductance),
            "conductance" => format!("{:?}", self.conductance),
            "m0" => format!("{:?}", self.m0),
            "m1" => format!("{:?}", self.m1),
            "breakpoint" => format!("{:?}", self.breakpoint),
            "step_size" => format!("{:?}", self.step_size),
            "crossing_tolerance" => format!("{:?}", self.crossing_tolerance),
            "max_crossing_time" => format!("{:?}", self.max_crossing_time),
            "blowup_bound" => format!("{:?}", self.blowup_bound),
            "max_crossings" => self.max_crossings.to_string(),
            "bins_per_plane" => self.bins_per_plane.to_string(),
            "horizon" => self.horizon.to_string(),
            "table_depth" => self.table_depth.to_string(),
            "calibration_crossings" => self.calibration_crossings.to_string(),
            "rng_seed" => self.rng_seed.to_string(),
            _ => return None,
        };
        Some(v)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("cannot parse {value:?} for key {key}"))
            })
        }
        match key {
            "c1" => self.c1 = num(key, value)?,
            "c2" => self.c2 = num(key, value)?,
            "inductance" | "l" => self.inductance = num(key, value)?,
            "conductance" | "g" => self.conductance = num(key, value)?,
            "m0" => self.m0 = num(key, value)?,
            "m1" => self.m1 = num(key, value)?,
            "breakpoint" | "bp" => self.breakpoint = num(key, value)?,
            "step_size" => self.step_size = num(key, value)?,
            "crossing_tolerance" => self.crossing_tolerance = num(key, value)?,
            "max_crossing_time" => self.max_crossing_time = num(key, value)?,
            "blowup_bound" => self.blowup_bound = num(key, value)?,
            "max_crossings" => self.max_crossings = num(key, value)?,
            "bins_per_plane" => self.bins_per_plane = num(key, value)?,
            "horizon" | "m" => self.horizon = num(key, value)?,
            "table_depth" | "m_max" => self.table_depth = num(key, value)?,
            "calibration_crossings" => self.calibration_crossings = num(key, value)?,
            "rng_seed" | "seed" => self.rng_seed = num(key, value)?,
            _ => return Err(Error::InvalidArgument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical `key = value` text, one line per key in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).expect("known key"));
            out.push('\n');
        }
        out
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let digest = Sha256::digest(self.to_text().as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Fingerprint(hex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_configs_share_fingerprint() {
        let a = SystemConfig::default();
        let b = SystemConfig::default();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().as_str().len(), 16);
    }

    #[test]
    fn any_change_moves_fingerprint() {
        let a = SystemConfig::default();
        let mut b = a.clone();
        b.bins_per_plane = 1601;
        assert_ne!(a.fingerprint(), b.fingerprint());
        let mut c = a.clone();
        c.step_size = 0.0050000001;
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn text_round_trip() {
        let cfg = SystemConfig {
            horizon: 3,
            rng_seed: 99,
            ..SystemConfig::default()
        };
        let back = SystemConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.fingerprint(), back.fingerprint());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(
            SystemConfig::parse("bins_per_plane 12"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(SystemConfig::parse("nonsense = 1").is_err());
        assert!(SystemConfig::parse("horizon = 0").is_err());
        assert!(SystemConfig::parse("horizon = 20").is_err());
        assert!(SystemConfig::parse("bins_per_plane = 1").is_err());
        assert!(SystemConfig::parse("c1 = -1").is_err());
    }

    #[test]
    fn parse_accepts_comments_and_aliases() {
        let cfg = SystemConfig::parse("# header\nm = 3 # horizon\nseed=7\n\n").unwrap();
        assert_eq!(cfg.horizon, 3);
        assert_eq!(cfg.rng_seed, 7);
    }
}
