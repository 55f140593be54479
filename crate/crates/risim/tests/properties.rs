//! Structural and physical invariants checked end to end: beam focusing on
//! the receiver, synthesis determinism, transform round trips, and an
//! independent linear-algebra cross-check of the sensing matrix.

use std::path::Path;

use approx::assert_relative_eq;
use num_complex::Complex;
use proptest::prelude::*;

use risim::channel::{run_campaign, synth_freespace, synth_sparse_angular, NoiseSpec};
use risim::cli::scenario::{default_32x32, MethodSpec};
use risim::configure::{conjugate_phase, quantize_binary, PhaseConfig};
use risim::coverage::{coverage_map, GridSpec};
use risim::estimate::hadamard_estimate;
use risim::scene::ElementIndex;
use risim::sensing::{angular_to_spatial, dft2_matrix, hadamard_for, spatial_to_angular};

// ── beam focusing ───────────────────────────────────────────────────────────

/// Runs the full estimate-and-configure pipeline on the default 32×32 scene
/// and maps coverage over a far-side grid (every cell at the receiver's
/// range or beyond). The quantized conjugate configuration forms a beam, so
/// the hottest cell must be the receiver's cell, give or take one neighbor.
///
/// A grid that extends in front of the receiver would not work here: the
/// depth of focus at this aperture is kilometers, so along the beam axis the
/// gain keeps growing toward the surface and the maximum would sit at the
/// grid's near edge instead.
#[test]
fn far_grid_beam_focuses_on_receiver_cell() {
    let rs = default_32x32(MethodSpec::Hadamard)
        .resolve(Path::new("default.json"), None)
        .unwrap();
    let scene = rs.scene;
    let channel = synth_freespace(&scene, false).unwrap();
    let w = hadamard_for(channel.active_count()).unwrap();
    let obs = run_campaign(&channel, &w, &NoiseSpec::noiseless()).unwrap();
    let est = hadamard_estimate(&obs, &w).unwrap();
    let config = quantize_binary(&conjugate_phase(&est.rho_hat));

    let grid = GridSpec {
        origin: [-47.0, 156.0],
        cell_size: 4.0,
        nx: 13,
        ny: 7,
        z: 2.0,
    };
    let map = coverage_map(&scene, &config, &grid, false, "optimized").unwrap();
    let rx_cell = grid.nearest_cell(&scene.rx_position);
    let (ax, ay) = map.argmax();
    assert!(
        ax.abs_diff(rx_cell.0) <= 1 && ay.abs_diff(rx_cell.1) <= 1,
        "beam peak at {:?}, receiver cell {:?}",
        (ax, ay),
        rx_cell
    );
    // the peak stands well above the map's quietest cell
    assert!(map.max_db() - map.min_db() > 10.0);
}

// ── synthesis determinism ───────────────────────────────────────────────────

/// Golden values for the seeded sparse synthesizer: the same seed must keep
/// producing the same channel release after release.
#[test]
fn sparse_synthesis_is_reproducible() {
    let a = synth_sparse_angular::<f64>(4, 4, 2, 7, None).unwrap();
    let b = synth_sparse_angular::<f64>(4, 4, 2, 7, None).unwrap();
    assert_eq!(a.gains, b.gains);

    let u = dft2_matrix::<f64>(4, 4).unwrap();
    let gamma = spatial_to_angular(&a.gains, &u).unwrap();
    let hot: Vec<usize> = gamma
        .iter()
        .enumerate()
        .filter_map(|(i, g)| (g.norm() > 1e-9).then_some(i))
        .collect();
    assert_eq!(hot, vec![2, 4]);
    for &bin in &hot {
        assert_relative_eq!(gamma[bin].norm(), 1.0, epsilon = 1e-12);
    }
    assert_relative_eq!(gamma[2].re, 0.974_377_563_938_739_3, epsilon = 1e-12);
    assert_relative_eq!(gamma[2].im, 0.224_918_569_470_836_97, epsilon = 1e-12);
    assert_relative_eq!(gamma[4].re, 0.901_686_665_814_646_7, epsilon = 1e-12);
    assert_relative_eq!(gamma[4].im, 0.432_390_051_564_632_56, epsilon = 1e-12);
    assert_relative_eq!(a.gains[0].re, 1.876_064_229_753_386, epsilon = 1e-12);
    assert_relative_eq!(a.gains[0].im, 0.657_308_621_035_469_6, epsilon = 1e-12);
}

// ── independent cross-check ─────────────────────────────────────────────────

/// Verifies W·Wᵀ = Wᵀ·W = M·I with nalgebra rather than this crate's own
/// popcount shortcut.
#[test]
fn hadamard_gram_identity_via_nalgebra() {
    let w = hadamard_for(16).unwrap();
    let m = nalgebra::DMatrix::from_fn(16, 16, |r, c| f64::from(w.row(r)[c]));
    let gram = &m.transpose() * &m;
    let expected = nalgebra::DMatrix::<f64>::identity(16, 16) * 16.0;
    assert_relative_eq!(gram, expected, epsilon = 1e-12);
    let outer = &m * &m.transpose();
    assert_relative_eq!(outer, expected, epsilon = 1e-12);
}

// ── property tests ──────────────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_index_is_a_bijection(
        rows in 1usize..=8,
        cols in 1usize..=8,
        pick in 0usize..64,
    ) {
        let flat = pick % (rows * cols);
        let idx = ElementIndex::from_flat(flat, rows, cols).unwrap();
        prop_assert!(idx.k >= 1 && idx.k <= rows);
        prop_assert!(idx.l >= 1 && idx.l <= cols);
        prop_assert_eq!(idx.flat(cols), flat);
        let again = ElementIndex::new(idx.k, idx.l, rows, cols).unwrap();
        prop_assert_eq!(again, idx);
    }

    #[test]
    fn angular_transform_round_trips(
        rows in 1usize..=4,
        cols in 1usize..=4,
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let n = rows * cols;
        let gamma: Vec<Complex<f64>> =
            raw[..n].iter().map(|&(re, im)| Complex::new(re, im)).collect();
        let u = dft2_matrix::<f64>(rows, cols).unwrap();
        let spatial = angular_to_spatial(&gamma, &u).unwrap();
        let back = spatial_to_angular(&spatial, &u).unwrap();
        for (g, b) in gamma.iter().zip(&back) {
            prop_assert!((g - b).norm() < 1e-10, "{g} != {b}");
        }
    }

    #[test]
    fn binary_quantization_is_idempotent(
        phases in proptest::collection::vec(-10.0f64..10.0, 1..=16),
    ) {
        let config = PhaseConfig::from_phases(phases).unwrap();
        let once = quantize_binary(&config);
        prop_assert!(once.is_quantized());
        for &p in once.phases() {
            prop_assert!(p == 0.0 || p == std::f64::consts::PI);
        }
        let twice = quantize_binary(&once);
        prop_assert_eq!(once.phases(), twice.phases());
    }
}
