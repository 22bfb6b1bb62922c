//! Run configuration: defaults, then a `key = value` file, then flags.

use std::path::{Path, PathBuf};

use num_traits::{One, Signed, Zero};

use crate::constants::*;
use crate::error::{Error, Result};
use crate::interval::{parse_decimal, Rational};
use crate::witness::Thresholds;

pub const CACHE_ENV: &str = "SLITFLOW_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".slitflow-cache";

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointSchedule {
    /// Powers of two, the stage times `q_{2k+1}`, and `n`.
    Default,
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sequence: String,
    pub k_from: u64,
    pub k_to: u64,
    pub k_limit: u64,
    pub c: Rational,
    /// Width of the enclosure of `b`.
    pub tol: Rational,
    pub assumptions_max_k: u64,
    pub horizon: u64,
    pub n: u64,
    pub start: Rational,
    pub checkpoints: CheckpointSchedule,
    pub control: bool,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub disclaimer: String,
    pub thresholds: Thresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sequence: "squares".into(),
            k_from: 1,
            k_to: DEFAULT_K_MAX,
            k_limit: MAX_K_LIMIT,
            c: Rational::zero(),
            tol: Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 30)),
            assumptions_max_k: DEFAULT_K_MAX,
            horizon: 100_000_000,
            n: BIRKHOFF_N,
            start: parse_decimal(BIRKHOFF_START).expect("constant"),
            checkpoints: CheckpointSchedule::Default,
            control: false,
            out_dir: None,
            cache_dir: std::env::var_os(CACHE_ENV).map(PathBuf::from).or_else(|| Some(DEFAULT_CACHE_DIR.into())),
            disclaimer: DIAGNOSTIC_DISCLAIMER.into(),
            thresholds: Thresholds::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub fn parse_rational(key: &str, v: &str) -> Result<Rational> {
    parse_decimal(v).ok_or_else(|| usage(format!("{key}: '{v}' is not a number")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    let v = v.trim().replace('_', "");
    if let Some((m, e)) = v.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| usage(format!("{key}: '{v}' is not an integer")))?;
        let e: u32 = e.parse().map_err(|_| usage(format!("{key}: '{v}' is not an integer")))?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(|| usage(format!("{key}: '{v}' overflows")));
    }
    v.parse().map_err(|_| usage(format!("{key}: '{v}' is not an integer")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| usage(format!("{key}: '{v}' is not a number")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("{key}: '{v}' is not a boolean"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let th = &mut self.thresholds;
        match key {
            "sequence" => self.sequence = v.to_string(),
            "from" => self.k_from = parse_u64(key, v)?,
            "to" | "max_k" => self.k_to = parse_u64(key, v)?,
            "k_limit" => self.k_limit = parse_u64(key, v)?,
            "c" => self.c = parse_rational(key, v)?,
            "tol" => self.tol = parse_rational(key, v)?,
            "assumptions_max_k" => self.assumptions_max_k = parse_u64(key, v)?,
            "horizon" => self.horizon = parse_u64(key, v)?,
            "n" => self.n = parse_u64(key, v)?,
            "start" => self.start = parse_rational(key, v)?,
            "checkpoints" => {
                self.checkpoints = if v == "default" {
                    CheckpointSchedule::Default
                } else {
                    let list: Result<Vec<u64>> = v.split(',').map(|s| parse_u64(key, s)).collect();
                    CheckpointSchedule::List(list?)
                }
            }
            "control" => self.control = parse_bool(key, v)?,
            "out" => self.out_dir = Some(v.into()),
            "cache" => self.cache_dir = if v.is_empty() || v == "none" { None } else { Some(v.into()) },
            "disclaimer" => self.disclaimer = v.to_string(),
            "gap_growth_tolerance" => th.gap_growth_tolerance = parse_f64(key, v)?,
            "gap_growth_from_k" => th.gap_growth_from_k = parse_u64(key, v)?,
            "gap_c_bound" => th.gap_c_bound = parse_f64(key, v)?,
            "epsilon_floor" => th.epsilon_floor = parse_f64(key, v)?,
            "epsilon_stability" => th.epsilon_stability = parse_f64(key, v)?,
            "len_times_a_min" => th.len_times_a_window.0 = parse_f64(key, v)?,
            "len_times_a_max" => th.len_times_a_window.1 = parse_f64(key, v)?,
            "hyperbolic_from_k" => th.hyperbolic_from_k = parse_u64(key, v)?,
            "gap_k4_bound" => th.gap_k4_bound = parse_f64(key, v)?,
            "ratio_k4_bound" => th.ratio_k4_bound = parse_f64(key, v)?,
            "birkhoff_amplitude" => th.birkhoff_amplitude = parse_f64(key, v)?,
            "birkhoff_ratio" => th.birkhoff_ratio = parse_f64(key, v)?,
            "birkhoff_tolerance" => th.birkhoff_tolerance = parse_f64(key, v)?,
            _ => return Err(usage(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequence != "squares" {
            return Err(usage(format!(
                "sequence '{}' is not built in; custom rules are available through the library",
                self.sequence
            )));
        }
        if self.c <= -Rational::one() || self.c >= Rational::one() {
            return Err(usage(format!("c = {} must lie in (-1, 1)", self.c)));
        }
        if !self.tol.is_positive() {
            return Err(usage("tol must be positive"));
        }
        if self.k_from == 0 || self.k_from > self.k_to {
            return Err(usage(format!("stage range {}..{} is empty or starts below 1", self.k_from, self.k_to)));
        }
        if self.start.is_negative() || self.start >= Rational::one() {
            return Err(usage("start must lie in [0, 1)"));
        }
        let th = &self.thresholds;
        let positive = [
            th.gap_growth_tolerance,
            th.gap_c_bound,
            th.epsilon_stability,
            th.gap_k4_bound,
            th.ratio_k4_bound,
            th.birkhoff_tolerance,
        ];
        if positive.iter().any(|x| x.is_nan() || *x <= 0.0) {
            return Err(usage("tolerances and bounds must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nfrom = 2\nto = 5\nc = 1/4  # weighted\nn = 1e6\ncheckpoints = 10,100\n").unwrap();
        assert_eq!((c.k_from, c.k_to, c.n), (2, 5, 1_000_000));
        assert_eq!(c.c, ratio(1, 4));
        assert_eq!(c.checkpoints, CheckpointSchedule::List(vec![10, 100]));
        c.set("c", "-0.5").unwrap();
        assert_eq!(c.c, ratio(-1, 2));
        c.validate().unwrap();
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("colour = red"), Err(Error::Usage(_))));
        assert!(matches!(c.apply_text("just words"), Err(Error::Usage(_))));
        c.set("c", "1").unwrap();
        assert!(matches!(c.validate(), Err(Error::Usage(_))));
    }
}
