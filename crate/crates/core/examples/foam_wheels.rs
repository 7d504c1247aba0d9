//! Soft ground: per-wheel settlement of the robot on a foam mat, robot
//! alone and carrying a payload.
//!
//! `cargo run --release --example foam_wheels`

use defonet::assess::{foam_config, foam_wheels, OraclePredictor, DEFAULT_CLEARANCE};

fn main() -> defonet::Result<()> {
    let base = foam_config();
    for payload in [false, true] {
        println!("payload: {payload}");
        for w in foam_wheels(&OraclePredictor, &base, payload, DEFAULT_CLEARANCE)? {
            println!(
                "  {:<13} {:<7} settles {:6.2} cm  {}",
                w.position,
                format!("{:?}", w.wheel),
                w.predicted_settlement_m * 100.0,
                if w.verdict.safe { "ok" } else { "stuck" }
            );
        }
    }
    Ok(())
}
