//! Flat `key = value` system configuration.
//!
//! Keys are exactly the field names of [`SystemConfig`]. Lines starting with
//! `#` and trailing `# ...` comments are ignored. Every key is optional and
//! falls back to [`SystemConfig::default`].

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Modulation orders with a square (or BPSK) constellation.
pub const SUPPORTED_MOD_ORDERS: [usize; 4] = [2, 4, 16, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of antenna arrays, N_A.
    pub n_aa: usize,
    /// Transmit antennas per array, N_T.
    pub n_tx_per_aa: usize,
    /// Receive antennas per user, N_R.
    pub n_rx: usize,
    /// Propagation paths per link, L.
    pub n_paths: usize,
    /// Constellation size, M.
    pub mod_order: usize,
    /// Static power per served user, Watts.
    pub p_c: f64,
    /// Transmit power budget, dBW.
    pub rho_max_dbw: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// Noise power, Watts.
    pub sigma2: f64,
    pub bandwidth_hz: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub phase_only_beamforming: bool,
    /// Antenna counts swept by the fixed-K experiment; empty means just
    /// `n_tx_per_aa`.
    pub sweep_n_tx: Vec<usize>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_aa: 4,
            n_tx_per_aa: 16,
            n_rx: 1,
            n_paths: 3,
            mod_order: 4,
            p_c: 1.0,
            rho_max_dbw: 10.0,
            k_min: 1,
            k_max: 32,
            sigma2: 1.0,
            bandwidth_hz: 1.0,
            n_samples: 10_000,
            seed: 1,
            phase_only_beamforming: false,
            sweep_n_tx: Vec::new(),
        }
    }
}

/// `10^(dBW/10)`.
pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

fn parse_value<V: FromStr>(line: usize, key: &str, raw: &str) -> Result<V> {
    raw.parse().map_err(|_| Error::Config {
        line,
        reason: format!("cannot parse `{raw}` for `{key}`"),
    })
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config {
            line,
            reason: format!("`{key}` expects true/false, got `{raw}`"),
        }),
    }
}

impl SystemConfig {
    pub fn rho_max_watts(&self) -> f64 {
        dbw_to_watts(self.rho_max_dbw)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_aa", self.n_aa),
            ("n_tx_per_aa", self.n_tx_per_aa),
            ("n_rx", self.n_rx),
            ("n_paths", self.n_paths),
            ("k_min", self.k_min),
            ("k_max", self.k_max),
            ("n_samples", self.n_samples),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if self.k_min > self.k_max {
            return Err(Error::invalid("k_min", format!("{} exceeds k_max {}", self.k_min, self.k_max)));
        }
        if !SUPPORTED_MOD_ORDERS.contains(&self.mod_order) {
            return Err(Error::invalid("mod_order", format!("{} not in {SUPPORTED_MOD_ORDERS:?}", self.mod_order)));
        }
        for (name, v) in [("p_c", self.p_c), ("sigma2", self.sigma2), ("bandwidth_hz", self.bandwidth_hz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        if !self.rho_max_dbw.is_finite() {
            return Err(Error::invalid("rho_max_dbw", "must be finite"));
        }
        if self.sweep_n_tx.contains(&0) {
            return Err(Error::invalid("sweep_n_tx", "antenna counts must be at least 1"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(Error::Config { line, reason: format!("duplicate key `{key}`") });
            }
            match key {
                "n_aa" => cfg.n_aa = parse_value(line, key, value)?,
                "n_tx_per_aa" => cfg.n_tx_per_aa = parse_value(line, key, value)?,
                "n_rx" => cfg.n_rx = parse_value(line, key, value)?,
                "n_paths" => cfg.n_paths = parse_value(line, key, value)?,
                "mod_order" => cfg.mod_order = parse_value(line, key, value)?,
                "p_c" => cfg.p_c = parse_value(line, key, value)?,
                "rho_max_dbw" => cfg.rho_max_dbw = parse_value(line, key, value)?,
                "k_min" => cfg.k_min = parse_value(line, key, value)?,
                "k_max" => cfg.k_max = parse_value(line, key, value)?,
                "sigma2" => cfg.sigma2 = parse_value(line, key, value)?,
                "bandwidth_hz" => cfg.bandwidth_hz = parse_value(line, key, value)?,
                "n_samples" => cfg.n_samples = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "phase_only_beamforming" => cfg.phase_only_beamforming = parse_bool(line, key, value)?,
                "sweep_n_tx" => {
                    cfg.sweep_n_tx = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_value(line, key, s))
                        .collect::<Result<_>>()?
                }
                _ => return Err(Error::Config { line, reason: format!("unknown key `{key}`") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Keys affecting the gain samples, in canonical order.
    fn sampling_entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n_aa", self.n_aa.to_string()),
            ("n_tx_per_aa", self.n_tx_per_aa.to_string()),
            ("n_rx", self.n_rx.to_string()),
            ("n_paths", self.n_paths.to_string()),
            ("mod_order", self.mod_order.to_string()),
            ("sigma2", format!("{:?}", self.sigma2)),
            ("n_samples", self.n_samples.to_string()),
            ("seed", self.seed.to_string()),
            ("phase_only_beamforming", self.phase_only_beamforming.to_string()),
        ]
    }

    fn all_entries(&self) -> Vec<(&'static str, String)> {
        let mut e = self.sampling_entries();
        e.extend([
            ("p_c", format!("{:?}", self.p_c)),
            ("rho_max_dbw", format!("{:?}", self.rho_max_dbw)),
            ("k_min", self.k_min.to_string()),
            ("k_max", self.k_max.to_string()),
            ("bandwidth_hz", format!("{:?}", self.bandwidth_hz)),
        ]);
        if !self.sweep_n_tx.is_empty() {
            let list: Vec<String> = self.sweep_n_tx.iter().map(usize::to_string).collect();
            e.push(("sweep_n_tx", list.join(",")));
        }
        e
    }

    /// Canonical `key = value` text; parses back to an equal config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.all_entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 over the canonical text of every key.
    pub fn config_hash(&self) -> String {
        digest_entries(&self.all_entries())
    }

    /// SHA-256 over the keys that determine the gain samples only.
    pub fn sampling_hash(&self) -> String {
        digest_entries(&self.sampling_entries())
    }
}

fn digest_entries(entries: &[(&'static str, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in entries {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
