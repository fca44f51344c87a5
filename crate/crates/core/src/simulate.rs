//! Scripted end-to-end runs: vehicles drive along the road past the
//! processors, pedestrians report positions, and every detection is
//! dispatched through an in-process warning service.
//!
//! Script lines (blank lines and `#` comments are skipped):
//!
//! ```text
//! VEHICLE <class> <speed_kmh> <start_x> <t>
//! PED <client_id> <x> <y> <t>
//! ```
//!
//! Vehicles travel toward increasing `x`. Passing processor `j` at `x_j`
//! produces a detection there, which warns the danger area of processor
//! `j + lead`, where `lead` is the number of spacings covering the
//! minimum safe distance. Lead time is the pedestrian's distance ahead of
//! the vehicle at detection, at the vehicle's speed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::class::SoundClass;
use crate::decision::Direction;
use crate::deployment::{warning_lead_time, DeploymentPlan, PedestrianPosition};
use crate::error::{Error, Result};
use crate::warnd::protocol::{format_decimal, is_valid_client_id, parse_decimal, WarningMessage};
use crate::warnd::{Message, Recorder, Service};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScriptEvent {
    Vehicle { class: SoundClass, speed_kmh: f64, start_x: f64, t: f64 },
    Ped { client_id: String, x: f64, y: f64, t: f64 },
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptEvent>> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |what: &str| Error::Parse(format!("script line {}: {what}: {raw:?}", i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| parse_decimal(s).ok_or_else(|| err("bad number"));
        match fields.as_slice() {
            ["VEHICLE", class, speed, x, t] => {
                let speed_kmh = num(speed)?;
                if speed_kmh <= 0.0 {
                    return Err(err("vehicle speed must be positive"));
                }
                events.push(ScriptEvent::Vehicle {
                    class: class.parse().map_err(|_| err("bad class"))?,
                    speed_kmh,
                    start_x: num(x)?,
                    t: num(t)?,
                });
            }
            ["PED", id, x, y, t] => {
                if !is_valid_client_id(id) {
                    return Err(err("bad client id"));
                }
                events.push(ScriptEvent::Ped { client_id: id.to_string(), x: num(x)?, y: num(y)?, t: num(t)? });
            }
            _ => return Err(err("expected VEHICLE or PED")),
        }
    }
    Ok(events)
}

/// One WARN line received by one pedestrian.
#[derive(Debug, Clone, PartialEq)]
pub struct WarnRecord {
    pub client_id: String,
    pub message: WarningMessage,
    /// Processor that heard the vehicle.
    pub detector: usize,
    pub lead_time: f64,
}

impl fmt::Display for WarnRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} detector={} lead={}", self.client_id, Message::Warn(self.message), self.detector, format_decimal(self.lead_time))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimReport {
    /// Detections replayed, whether or not anyone was warned.
    pub detections: usize,
    pub warnings: Vec<WarnRecord>,
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.warnings {
            writeln!(f, "{w}")?;
        }
        writeln!(f, "# detections={} warnings={}", self.detections, self.warnings.len())
    }
}

enum Action {
    Ped(String, f64, f64),
    Detect { detector: usize, class: SoundClass, speed_kmh: f64, x: f64 },
}

pub fn simulate(plan: &DeploymentPlan, events: &[ScriptEvent]) -> Result<SimReport> {
    let lead = plan.config.lead_spacing();
    let mut timeline: Vec<(f64, usize, Action)> = Vec::new();
    for ev in events {
        match ev {
            ScriptEvent::Ped { client_id, x, y, t } => timeline.push((*t, 0, Action::Ped(client_id.clone(), *x, *y))),
            ScriptEvent::Vehicle { class, speed_kmh, start_x, t } => {
                let v = speed_kmh / 3.6;
                for p in plan.processors.iter().filter(|p| p.x >= *start_x) {
                    let at = t + (p.x - start_x) / v;
                    timeline.push((at, 1, Action::Detect { detector: p.id, class: *class, speed_kmh: *speed_kmh, x: p.x }));
                }
            }
        }
    }
    // Position reports before detections at the same instant; otherwise script order.
    timeline.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let service: Service<Recorder> = Service::new(plan.clone());
    let mut known: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut report = SimReport::default();
    for (t, _, action) in timeline {
        match action {
            Action::Ped(id, x, y) => {
                let pos = PedestrianPosition::new(id.clone(), x, y, t);
                let accepted =
                    if known.contains_key(&id) { service.update(pos).is_ok() } else { service.register(pos, Recorder::default()).is_ok() };
                if accepted {
                    known.insert(id, (x, y));
                }
            }
            Action::Detect { detector, class, speed_kmh, x } => {
                report.detections += 1;
                let target = detector + lead;
                if target >= plan.processors.len() {
                    continue;
                }
                let delivered = service.dispatch(target, class, Direction::Approaching, t)?;
                for id in delivered {
                    let ped_x = known[&id].0;
                    report.warnings.push(WarnRecord {
                        client_id: id,
                        message: WarningMessage {
                            processor_id: target,
                            sound_class: class,
                            direction: Direction::Approaching,
                            event_time: t,
                        },
                        detector,
                        lead_time: warning_lead_time(ped_x - x, speed_kmh)?,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::{build_plan, PlanConfig};

    fn plan() -> DeploymentPlan {
        build_plan(200.0, PlanConfig::default()).unwrap()
    }

    #[test]
    fn lh_vehicle_warns_once() {
        let events = parse_script("# fast car\nVEHICLE LH 75 0 0\nPED p1 87.5 1 0\n").unwrap();
        let r = simulate(&plan(), &events).unwrap();
        assert_eq!(r.warnings.len(), 1);
        let w = &r.warnings[0];
        assert_eq!((w.detector, w.message.processor_id), (0, 3));
        assert!((w.lead_time - 4.2).abs() < 1e-12);
        assert_eq!(w.to_string(), "p1 WARN 3 LH approaching 0.000 detector=0 lead=4.200");
    }

    #[test]
    fn no_warnings_for_safe_classes_or_outsiders() {
        let ll = parse_script("VEHICLE LL 40 0 0\nPED p1 87.5 1 0\n").unwrap();
        assert!(simulate(&plan(), &ll).unwrap().warnings.is_empty());
        let nv = parse_script("VEHICLE NV 40 0 0\nPED p1 87.5 1 0\n").unwrap();
        assert!(simulate(&plan(), &nv).unwrap().warnings.is_empty());
        let outside = parse_script("VEHICLE H 60 0 0\nPED p1 87.5 20 0\n").unwrap();
        let r = simulate(&plan(), &outside).unwrap();
        assert!(r.warnings.is_empty());
        assert_eq!(r.detections, 9);
    }

    #[test]
    fn stale_positions_are_skipped() {
        // The vehicle reaches processor 2 at 9 s; the pedestrian last reported at 0 s.
        let events = parse_script("VEHICLE H 20 0 0\nPED p1 137.5 1 0\n").unwrap();
        assert!(simulate(&plan(), &events).unwrap().warnings.is_empty());
    }

    #[test]
    fn script_errors() {
        assert!(parse_script("VEHICLE XX 75 0 0").is_err());
        assert!(parse_script("VEHICLE H 0 0 0").is_err());
        assert!(parse_script("PED p!1 0 0 0").is_err());
        assert!(parse_script("TRUCK H 75 0 0").is_err());
    }
}
