use proptest::prelude::*;

use defonet::condition::{
    decode_vector, encode_block_masks, encode_vector, Condition, FORCE_BINS, LOCATION_BINS, MATERIAL_BINS,
};
use defonet::physics::{beam_deflection, beam_deflection_fd, BeamSpec, LoadCase, MaterialSpec};
use defonet::train::{loss_ae, loss_ae_grad};
use defonet::voxel::{
    depth_to_grid, grid_metrics, read_grid, render_depth, visible_shell, voxelize, GridSpec, HeightField, ViewDir,
    VoxelGrid,
};

fn grid_strategy() -> impl Strategy<Value = VoxelGrid> {
    prop_oneof![Just(8usize), Just(16usize)].prop_flat_map(|n| {
        (prop::collection::vec(prop::bool::weighted(0.2), n * n * n), 0.005f32..0.1).prop_map(move |(bits, pitch)| {
            // grid headers store the pitch as f32
            let spec = GridSpec::new(n, pitch as f64, [0.0; 3]).unwrap();
            VoxelGrid::from_occupancy(spec, bits.into_iter().map(u8::from).collect()).unwrap()
        })
    })
}

fn view_strategy() -> impl Strategy<Value = ViewDir> {
    prop::sample::select(ViewDir::ALL.to_vec())
}

fn beam_strategy() -> impl Strategy<Value = BeamSpec> {
    (0.3f64..2.0, 0.05f64..0.4, 0.003f64..0.03, prop::bool::ANY).prop_map(|(span, width, thickness, wood)| BeamSpec {
        span,
        width,
        thickness,
        material: if wood {
            MaterialSpec::wood()
        } else {
            MaterialSpec::aluminium()
        },
    })
}

fn condition_strategy() -> impl Strategy<Value = Condition> {
    (0..FORCE_BINS, 0..LOCATION_BINS, 0..MATERIAL_BINS).prop_map(|(f, l, m)| Condition::new(f, l, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packed_grids_round_trip(grid in grid_strategy()) {
        let mut bytes = Vec::new();
        defonet::voxel::write_grid(&grid, &mut bytes).unwrap();
        prop_assert_eq!(read_grid(bytes.as_slice()).unwrap(), grid);
    }

    #[test]
    fn depth_view_recovers_the_visible_shell(grid in grid_strategy(), dir in view_strategy()) {
        let img = render_depth(&grid, dir);
        let lifted = depth_to_grid(&img, grid.spec()).unwrap();
        let shell = visible_shell(&grid, dir);
        prop_assert_eq!(&lifted, &shell);
        prop_assert_eq!(render_depth(&shell, dir), img);
        for (s, g) in shell.occupancy().iter().zip(grid.occupancy()) {
            prop_assert!(s <= g);
        }
    }

    #[test]
    fn aligned_slabs_fill_whole_layers(layer in 1usize..14, depth in 1usize..3, pitch in 0.01f64..0.05) {
        let spec = GridSpec::new(16, pitch, [0.0; 3]).unwrap();
        let top = (layer + 1) as f64 * pitch;
        let g = voxelize(&HeightField::flat(&spec, top, depth as f64 * pitch), &spec).unwrap();
        let lo = (layer + 1).saturating_sub(depth);
        for z in 0..16 {
            let full = (lo..=layer).contains(&z);
            let count = (0..16).flat_map(|y| (0..16).map(move |x| (x, y))).filter(|&(x, y)| g.get(x, y, z)).count();
            prop_assert_eq!(count, if full { 256 } else { 0 }, "layer {}", z);
        }
    }

    #[test]
    fn iou_is_symmetric_and_one_on_identity(a in grid_strategy()) {
        let b = a.translated_z(1);
        prop_assert_eq!(grid_metrics(&a, &a).unwrap().iou, 1.0);
        let ab = grid_metrics(&a, &b).unwrap().iou;
        let ba = grid_metrics(&b, &a).unwrap().iou;
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn finite_differences_track_the_closed_form(
        beam in beam_strategy(),
        force in 1.0f64..500.0,
        at in 0.05f64..0.95,
    ) {
        let load = LoadCase::point(force, at);
        let fd = beam_deflection_fd(&beam, &load, 201).unwrap();
        let exact: Vec<f64> = fd.x.iter().map(|&x| beam_deflection(&beam, &load, x.min(beam.span)).unwrap()).collect();
        let peak = exact.iter().copied().fold(0.0, f64::max);
        for (w, e) in fd.w.iter().zip(&exact) {
            prop_assert!((w - e).abs() <= 1e-3 * peak);
        }
    }

    #[test]
    fn deflection_is_reciprocal_and_mirror_symmetric(
        beam in beam_strategy(),
        a in 0.05f64..0.95,
        b in 0.05f64..0.95,
    ) {
        let l = beam.span;
        let w_ab = beam_deflection(&beam, &LoadCase::point(100.0, a), b * l).unwrap();
        let w_ba = beam_deflection(&beam, &LoadCase::point(100.0, b), a * l).unwrap();
        prop_assert!((w_ab - w_ba).abs() <= 1e-12 * w_ab.abs().max(1e-12));
        let mirrored = beam_deflection(&beam, &LoadCase::point(100.0, 1.0 - a), (1.0 - b) * l).unwrap();
        prop_assert!((w_ab - mirrored).abs() <= 1e-9 * w_ab.abs().max(1e-12));
    }

    #[test]
    fn deflection_is_linear_in_force(beam in beam_strategy(), f in 1.0f64..300.0, at in 0.05f64..0.95) {
        let x = beam.span * 0.4;
        let one = beam_deflection(&beam, &LoadCase::point(f, at), x).unwrap();
        let two = beam_deflection(&beam, &LoadCase::point(2.0 * f, at), x).unwrap();
        prop_assert!((two - 2.0 * one).abs() <= 1e-12 * two.abs());
    }

    #[test]
    fn conditions_survive_every_encoding(c in condition_strategy(), spatial in 1usize..6) {
        let v = encode_vector(&c).unwrap();
        prop_assert_eq!(v.iter().filter(|&&b| b == 1.0).count(), 3);
        prop_assert_eq!(decode_vector(&v).unwrap(), c);
        prop_assert_eq!(Condition::from_bytes(c.to_bytes()).unwrap(), c);
        let masks = encode_block_masks(&c, spatial).unwrap();
        for (i, bit) in v.iter().enumerate() {
            prop_assert!(masks.channel(i).iter().all(|x| x == bit));
        }
    }

    #[test]
    fn out_of_range_bins_are_rejected(f in 0usize..6, l in 0usize..12, m in 0usize..5) {
        let valid = f < FORCE_BINS && l < LOCATION_BINS && m < MATERIAL_BINS;
        prop_assert_eq!(Condition::new(f, l, m).is_ok(), valid);
    }

    #[test]
    fn loss_is_finite_and_non_negative(
        pairs in prop::collection::vec((prop::bool::ANY, 0.0f32..=1.0), 1..64),
        alpha in 0.01f64..0.99,
    ) {
        let target: Vec<f32> = pairs.iter().map(|p| p.0 as u8 as f32).collect();
        let output: Vec<f32> = pairs.iter().map(|p| p.1).collect();
        let l = loss_ae(&target, &output, alpha).unwrap();
        prop_assert!(l.is_finite() && l >= 0.0);
        let (_, grad) = loss_ae_grad(&target, &output, alpha).unwrap();
        for ((t, o), g) in target.iter().zip(&output).zip(&grad) {
            prop_assert!(g.is_finite());
            // pushing o toward t never increases the loss
            if *t == 1.0 { prop_assert!(*g <= 0.0) } else if *o > 0.0 { prop_assert!(*g >= 0.0) }
        }
    }
}

#[test]
fn perfect_prediction_costs_almost_nothing() {
    let target = [1.0, 0.0, 1.0, 0.0];
    let l = loss_ae(&target, &target, 0.85).unwrap();
    assert!(l > 0.0 && l < 1e-6, "{l}");
}
