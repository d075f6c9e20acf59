//! Planner configuration and its flat `key = value` file format.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Unknown keys and unparsable values are errors. When `eta` is not given
//! but `scan_seconds` or `travel_speed` is, eta is derived from the
//! distance the robot could travel during one scan `d` as `d / (1 + d)`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coverage::DEFAULT_CANDIDATE_STRIDE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const DEFAULT_SCAN_SECONDS: f64 = 50.0;
pub const DEFAULT_TRAVEL_SPEED: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    /// Meters.
    pub sensor_range_r: f64,
    pub r_relaxed_factor: f64,
    pub eta: f64,
    /// Meters.
    pub inflation_radius: f64,
    pub coverage_target: f64,
    pub candidate_stride: usize,
    pub seed: u64,
    pub close_loop: bool,
    /// Baseline lane spacing in meters; the sensor range when unset.
    pub lane_spacing: Option<f64>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            sensor_range_r: 2.0,
            r_relaxed_factor: 1.5,
            eta: 0.96,
            inflation_radius: 0.3,
            coverage_target: 1.0,
            candidate_stride: DEFAULT_CANDIDATE_STRIDE,
            seed: 7,
            close_loop: false,
            lane_spacing: None,
        }
    }
}

/// Eta that prices one extra viewpoint like `scan_seconds * travel_speed`
/// meters of travel.
pub fn eta_from_scan_cost(scan_seconds: f64, travel_speed: f64) -> f64 {
    let d = scan_seconds * travel_speed;
    d / (1.0 + d)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value `{value}` for `{key}`")))
}

impl PlanConfig {
    pub fn r_relaxed(&self) -> f64 {
        self.sensor_range_r * self.r_relaxed_factor
    }

    pub fn lane_spacing(&self) -> f64 {
        self.lane_spacing.unwrap_or(self.sensor_range_r)
    }

    /// Apply one setting by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "sensor_range_r" | "r" => self.sensor_range_r = parse(key, value)?,
            "r_relaxed_factor" => self.r_relaxed_factor = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "inflation_radius" | "inflate" => self.inflation_radius = parse(key, value)?,
            "coverage_target" | "target" => self.coverage_target = parse(key, value)?,
            "candidate_stride" => self.candidate_stride = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "close_loop" => self.close_loop = parse(key, value)?,
            "lane_spacing" => self.lane_spacing = Some(parse(key, value)?),
            _ => return Err(ConfigError(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Overlay the settings of a config file onto `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut scan_seconds = None;
        let mut travel_speed = None;
        let mut eta_given = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scan_seconds" => scan_seconds = Some(parse::<f64>(key, value)?),
                "travel_speed" => travel_speed = Some(parse::<f64>(key, value)?),
                _ => {
                    eta_given |= key == "eta";
                    self.set(key, value)
                        .map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?;
                }
            }
        }
        if !eta_given && (scan_seconds.is_some() || travel_speed.is_some()) {
            self.eta = eta_from_scan_cost(
                scan_seconds.unwrap_or(DEFAULT_SCAN_SECONDS),
                travel_speed.unwrap_or(DEFAULT_TRAVEL_SPEED),
            );
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError(msg));
        if !(self.sensor_range_r > 0.0 && self.sensor_range_r.is_finite()) {
            return fail(format!(
                "sensor range must be > 0, got {}",
                self.sensor_range_r
            ));
        }
        if !(self.r_relaxed_factor >= 1.0 && self.r_relaxed_factor.is_finite()) {
            return fail(format!(
                "r_relaxed_factor must be >= 1, got {}",
                self.r_relaxed_factor
            ));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return fail(format!("eta must be in [0, 1), got {}", self.eta));
        }
        if !(self.inflation_radius >= 0.0 && self.inflation_radius.is_finite()) {
            return fail(format!(
                "inflation radius must be >= 0, got {}",
                self.inflation_radius
            ));
        }
        if !(self.coverage_target > 0.0 && self.coverage_target <= 1.0) {
            return fail(format!(
                "coverage target must be in (0, 1], got {}",
                self.coverage_target
            ));
        }
        if self.candidate_stride == 0 {
            return fail("candidate_stride must be >= 1".into());
        }
        if let Some(s) = self.lane_spacing {
            if !(s > 0.0 && s.is_finite()) {
                return fail(format!("lane spacing must be > 0, got {s}"));
            }
        }
        Ok(())
    }
}
