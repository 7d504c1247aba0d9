//! Bridge crossing: can the robot cross a 0.6 m plywood or aluminium bridge,
//! with and without payload, given its 1.5 cm ground clearance?
//!
//! `cargo run --release --example bridge_safety`

use defonet::assess::{bridge_config, safety_table, OraclePredictor, DEFAULT_CLEARANCE};

fn main() -> defonet::Result<()> {
    let rows = safety_table(&OraclePredictor, &bridge_config(0.6), DEFAULT_CLEARANCE)?;
    println!("{:<10} {:<8} {:>8} {:>10} {:>8}  verdict", "material", "payload", "force N", "sag cm", "voxels");
    for r in &rows {
        println!(
            "{:<10} {:<8} {:>8.1} {:>10.2} {:>8}  {}",
            format!("{:?}", r.material),
            r.payload,
            r.force,
            r.oracle_deflection_m * 100.0,
            r.predicted_voxels,
            if r.verdict.safe { "safe" } else { "UNSAFE" }
        );
    }
    for r in rows.iter().filter(|r| !r.verdict.safe) {
        println!("{}", r.verdict.rationale);
    }
    Ok(())
}
