//! Roadside geometry: processors every `processor_spacing` meters, one
//! rectangular danger area each, lead-time arithmetic and the warning policy.
//!
//! Coordinates are road-local meters: `x` along the road in the direction of
//! travel, `y` across it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::class::SoundClass;
use crate::decision::{DetectionResult, Direction};
use crate::error::{Error, Result};

pub const MAX_POSITION_ERROR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub processor_spacing: f64,
    pub mic_height: f64,
    pub danger_length: f64,
    pub road_width: f64,
    /// km/h
    pub max_design_speed: f64,
    pub min_warning_time: f64,
    pub freshness_window: f64,
    pub road_length: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            processor_spacing: 25.0,
            mic_height: 3.0,
            danger_length: 25.0,
            road_width: 7.0,
            max_design_speed: 75.0,
            min_warning_time: 3.0,
            freshness_window: 5.0,
            road_length: 200.0,
        }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("processor_spacing", self.processor_spacing),
            ("mic_height", self.mic_height),
            ("danger_length", self.danger_length),
            ("road_width", self.road_width),
            ("max_design_speed", self.max_design_speed),
            ("min_warning_time", self.min_warning_time),
            ("freshness_window", self.freshness_window),
            ("road_length", self.road_length),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PlanConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("plan config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plain numeric table")
    }

    /// Distance a vehicle at `max_design_speed` covers in `min_warning_time`.
    pub fn min_safe_distance(&self) -> f64 {
        self.min_warning_time * self.max_design_speed / 3.6
    }

    /// How many processors ahead of the detecting one the warning must go.
    pub fn lead_spacing(&self) -> usize {
        (self.min_safe_distance() / self.processor_spacing).ceil() as usize
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DangerArea {
    pub processor_id: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DangerArea {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x_min <= x && x <= self.x_max && self.y_min <= y && y <= self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Processor {
    pub id: usize,
    pub x: f64,
    pub area: DangerArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub config: PlanConfig,
    pub road_length: f64,
    pub processors: Vec<Processor>,
}

impl DeploymentPlan {
    pub fn processor(&self, id: usize) -> Result<&Processor> {
        self.processors.get(id).ok_or(Error::UnknownProcessor(id))
    }

    pub fn area(&self, id: usize) -> Result<&DangerArea> {
        Ok(&self.processor(id)?.area)
    }

    pub fn from_config(config: PlanConfig) -> Result<Self> {
        build_plan(config.road_length, config)
    }
}

pub fn build_plan(road_length: f64, config: PlanConfig) -> Result<DeploymentPlan> {
    config.validate()?;
    if !(road_length >= config.processor_spacing) {
        return Err(Error::InvalidConfig(format!(
            "road of {road_length} m is shorter than one processor spacing ({} m)",
            config.processor_spacing
        )));
    }
    let count = (road_length / config.processor_spacing).floor() as usize + 1;
    let processors = (0..count)
        .map(|id| {
            let x = id as f64 * config.processor_spacing;
            Processor {
                id,
                x,
                area: DangerArea { processor_id: id, x_min: x, x_max: x + config.danger_length, y_min: 0.0, y_max: config.road_width },
            }
        })
        .collect();
    Ok(DeploymentPlan { config: PlanConfig { road_length, ..config }, road_length, processors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianPosition {
    pub client_id: String,
    pub x: f64,
    pub y: f64,
    pub timestamp: f64,
    pub position_error: f64,
}

impl PedestrianPosition {
    pub fn new(client_id: impl Into<String>, x: f64, y: f64, timestamp: f64) -> Self {
        Self { client_id: client_id.into(), x, y, timestamp, position_error: 0.0 }
    }

    pub fn with_error(mut self, position_error: f64) -> Result<Self> {
        if !(0.0..=MAX_POSITION_ERROR).contains(&position_error) {
            return Err(Error::InvalidConfig(format!("position error {position_error} m exceeds {MAX_POSITION_ERROR} m")));
        }
        self.position_error = position_error;
        Ok(self)
    }

    /// Whether this fix is recent enough to act on at time `now`.
    pub fn is_fresh(&self, now: f64, window: f64) -> bool {
        now - self.timestamp <= window
    }
}

/// Clients with a fresh position inside `area`, in input order.
pub fn members_in_area<'a, I>(area: &DangerArea, positions: I, now: f64, window: f64) -> Vec<String>
where
    I: IntoIterator<Item = &'a PedestrianPosition>,
{
    positions.into_iter().filter(|p| p.is_fresh(now, window) && area.contains(p.x, p.y)).map(|p| p.client_id.clone()).collect()
}

/// Seconds for a vehicle at `speed_kmh` to cover `distance` meters.
pub fn warning_lead_time(distance: f64, speed_kmh: f64) -> Result<f64> {
    if !(speed_kmh > 0.0 && speed_kmh.is_finite()) {
        return Err(Error::InvalidConfig(format!("speed must be positive, got {speed_kmh} km/h")));
    }
    Ok(distance * 3600.0 / (speed_kmh * 1000.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningDecision {
    Warn,
    NoWarn,
}

pub fn should_warn(class: SoundClass, direction: Direction) -> bool {
    class.is_risky() && direction != Direction::Receding
}

pub fn warning_decision(result: &DetectionResult) -> WarningDecision {
    if should_warn(result.sound_type, result.direction) {
        WarningDecision::Warn
    } else {
        WarningDecision::NoWarn
    }
}
