//! Voxelize a loaded bridge, look at it with an orthographic depth camera
//! and lift the depth image back into the shell the network sees.
//!
//! `cargo run --release --example depth_views [out.png]`

use defonet::assess::slice_png;
use defonet::physics::{generate_sample, BeamScene, BeamSpec, BinTable, LoadCase, MaterialSpec, Scene};
use defonet::voxel::{depth_to_grid, render_depth, voxelize, GridSpec, ViewDir, NO_RETURN};

fn main() -> defonet::Result<()> {
    let grid = GridSpec::new(64, 0.022, [0.0; 3])?;
    let beam = BeamSpec {
        span: 1.2,
        width: 0.15,
        thickness: 0.006,
        material: MaterialSpec::wood(),
    };
    let scene = Scene::Beam(BeamScene::on_layer(beam, &grid, 48));
    let load = LoadCase::point(110.0, 0.5);

    let rest = voxelize(&scene.surface(&grid, None)?, &grid)?;
    for dir in [ViewDir::PosY, ViewDir::NegZ, ViewDir::PosX] {
        let img = render_depth(&rest, dir);
        let shell = depth_to_grid(&img, &grid)?;
        let nearest = img.depth.iter().copied().filter(|&d| d != NO_RETURN).fold(f32::INFINITY, f32::min);
        println!(
            "{dir:?}: {}x{} image, {} hits, nearest {:.3} m, shell {} of {} voxels",
            img.width,
            img.height,
            img.hits(),
            nearest,
            shell.count(),
            rest.count()
        );
    }

    let sample = generate_sample(&scene, &load, &grid, ViewDir::PosY, &BinTable::default())?;
    println!("condition {:?}", sample.condition);
    let out = std::env::args().nth(1).unwrap_or_else(|| "depth_views.png".into());
    slice_png(&sample.input, &sample.target, 32, 8, &out)?;
    println!("wrote {out} (input shell vs deformed target, y = 32)");
    Ok(())
}
