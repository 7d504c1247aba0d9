//! Closed-form and finite-difference sag of a plywood bridge under the
//! robot at midspan and at the quarter point.
//!
//! `cargo run --release --example beam_oracle`

use defonet::physics::{beam_deflection, beam_deflection_fd, BeamSpec, LoadCase, MaterialSpec, GRAVITY, ROBOT_MASS};

fn main() -> defonet::Result<()> {
    let beam = BeamSpec {
        span: 1.0,
        width: 0.15,
        thickness: 0.006,
        material: MaterialSpec::wood(),
    };
    println!("E·I = {:.3} N·m²", beam.flexural_rigidity());
    for at in [0.5, 0.25] {
        let load = LoadCase::point(ROBOT_MASS * GRAVITY, at);
        let fd = beam_deflection_fd(&beam, &load, 201)?;
        println!("\nload at {:.0}% of the span", at * 100.0);
        println!("{:>6} {:>12} {:>12}", "x (m)", "exact (mm)", "fd (mm)");
        for i in (0..fd.x.len()).step_by(25) {
            let exact = beam_deflection(&beam, &load, fd.x[i])?;
            println!("{:>6.3} {:>12.4} {:>12.4}", fd.x[i], exact * 1e3, fd.w[i] * 1e3);
        }
        println!("peak {:.4} mm", fd.max() * 1e3);
    }
    Ok(())
}
