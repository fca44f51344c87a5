//! Replays a scripted road scene against an in-process warning service.
use roadwarn::deployment::{build_plan, PlanConfig};
use roadwarn::simulate::{parse_script, simulate};

const SCRIPT: &str = "\
# a fast light vehicle and a truck, three pedestrians
PED anna 87.5 1.0 0.0
PED ben 140.0 2.5 0.0
PED cleo 60.0 12.0 0.0
VEHICLE LH 75 0 0
PED anna 88.0 1.0 1.0
VEHICLE H 45 0 2
VEHICLE LL 40 0 3
";

fn main() -> roadwarn::Result<()> {
    let plan = build_plan(200.0, PlanConfig::default())?;
    let report = simulate(&plan, &parse_script(SCRIPT)?)?;
    print!("{report}");
    Ok(())
}
