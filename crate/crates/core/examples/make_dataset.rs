//! Generate a seeded beam dataset, write it with its metadata sidecar and
//! read it back.
//!
//! `cargo run --release --example make_dataset [dir]`

use std::path::PathBuf;

use defonet::physics::{generate_dataset, meta_path, read_meta, write_meta, Dataset, DatasetConfig};

fn main() -> defonet::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    // f32-exact pitch, so the header round-trip compares equal
    let mut cfg = DatasetConfig::beam(32, 0.046875, vec![0.8, 1.0, 1.2]);
    cfg.location_bins = vec![1, 3, 5];
    let generated = generate_dataset(&cfg, 7)?;

    let path = dir.join("beams32.bin");
    generated.dataset.save(&path)?;
    write_meta(&meta_path(&path), &generated.meta)?;

    let back = Dataset::load(&path)?;
    assert_eq!(back, generated.dataset);
    for m in read_meta(&meta_path(&path))? {
        println!(
            "#{:<2} span {:.2} m {:<9} {:>5.1} N at {:.2}  peak {:6.2} mm",
            m.index,
            m.span.unwrap_or(0.0),
            format!("{:?}", m.material),
            m.force,
            m.application_point,
            m.peak_displacement * 1e3
        );
    }
    println!("{} samples at N={} -> {}", back.len(), back.grid.resolution, path.display());
    Ok(())
}
