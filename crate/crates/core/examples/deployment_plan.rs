//! Processor layout, danger areas and the warning lead-time window.
use roadwarn::deployment::{build_plan, warning_lead_time, PlanConfig};

fn main() -> roadwarn::Result<()> {
    let cfg = PlanConfig::default();
    let plan = build_plan(200.0, cfg)?;
    println!("minimum safe distance {:.1} m, warnings go {} processors ahead", cfg.min_safe_distance(), cfg.lead_spacing());
    for p in &plan.processors {
        let a = p.area;
        println!("processor {} at x={:>5.1}  area x[{:.0}, {:.0}] y[{:.0}, {:.0}]", p.id, p.x, a.x_min, a.x_max, a.y_min, a.y_max);
    }
    let lead = cfg.lead_spacing() as f64 * cfg.processor_spacing;
    for d in [lead, lead + cfg.danger_length / 2.0, lead + cfg.danger_length] {
        println!("{d:>5.1} m ahead at {} km/h: {:.2} s", cfg.max_design_speed, warning_lead_time(d, cfg.max_design_speed)?);
    }
    Ok(())
}
