//! The commutator oracle pair: closed forms against the brute-force
//! operator composition, field-level in 1D/2D for both representations and
//! symbol-level in 3D, plus linearity in T and the vanishing cases.

mod common;

use common::{random_localized_field, random_smooth_field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use tsdirac::commutator::{
    apply_commutator, apply_t_2c, apply_w_2c, brute_force_commutator_2c, brute_force_commutator_4c,
    brute_force_symbol_2c, brute_force_symbol_4c, closed_form_commutator_2c,
    closed_form_commutator_4c, closed_form_symbol_2c, closed_form_symbol_4c, coeffs_2c,
    verify_commutator_linearity, PotentialPoint,
};
use tsdirac::grid::build_grid;
use tsdirac::model::{sample_potentials, PhysParams, PotentialSpec};

/// A smooth, exactly periodic 2D potential with nonzero magnetic components
/// and analytic partials, for the 2D oracle pair on (-8,8)^2.
fn periodic_2d_potential() -> PotentialSpec {
    let w0 = std::f64::consts::PI / 8.0;
    let v = move |x: &[f64]| (w0 * x[0]).sin() * (2.0 * w0 * x[1]).cos();
    let a1 = move |x: &[f64]| (w0 * x[0]).cos() * (w0 * x[1]).cos();
    let a2 = move |x: &[f64]| (2.0 * w0 * x[0]).sin() + 0.5 * (w0 * x[1]).cos();
    PotentialSpec::new(
        2,
        Arc::new(v),
        vec![Arc::new(a1), Arc::new(a2)],
        Some(vec![
            Arc::new(move |x: &[f64]| w0 * (w0 * x[0]).cos() * (2.0 * w0 * x[1]).cos()),
            Arc::new(move |x: &[f64]| -2.0 * w0 * (w0 * x[0]).sin() * (2.0 * w0 * x[1]).sin()),
        ]),
        Some(vec![
            vec![
                Arc::new(move |x: &[f64]| -w0 * (w0 * x[0]).sin() * (w0 * x[1]).cos()),
                Arc::new(move |x: &[f64]| -w0 * (w0 * x[0]).cos() * (w0 * x[1]).sin()),
            ],
            vec![
                Arc::new(move |x: &[f64]| 2.0 * w0 * (2.0 * w0 * x[0]).cos()),
                Arc::new(move |x: &[f64]| -0.5 * w0 * (w0 * x[1]).sin()),
            ],
        ]),
    )
    .unwrap()
}

#[test]
fn oracle_pair_1d_two_component() {
    // M = 128 on (-8,8): mu_max ~ 25, so the aliasing floor of the brute
    // force (the rational potentials have e^{-|mu|} spectral tails) is ~1e-9
    let grid = build_grid(-8.0, 8.0, 128, 1).unwrap();
    let samples = sample_potentials(&PotentialSpec::paper_1d(), &grid).unwrap();
    let params = PhysParams::classical();
    let cf = closed_form_commutator_2c(&samples, &params).unwrap();
    for seed in 0..20 {
        let f = random_localized_field::<2>(&grid, seed, 8);
        let closed = apply_commutator(&cf, &f).unwrap();
        let brute = brute_force_commutator_2c(&samples, &params, &f).unwrap();
        let rel = closed.l2_distance(&brute).unwrap() / brute.l2_norm();
        assert!(rel < 1e-7, "seed {seed}: oracle mismatch {rel:.3e}");
    }
}

#[test]
fn oracle_pair_1d_four_component() {
    let grid = build_grid(-8.0, 8.0, 128, 1).unwrap();
    let samples = sample_potentials(&PotentialSpec::paper_1d(), &grid).unwrap();
    let params = PhysParams::new(0.5, 0.75, 0.5).unwrap();
    let cf = closed_form_commutator_4c(&samples, &params).unwrap();
    for seed in 0..20 {
        let f = random_localized_field::<4>(&grid, 1000 + seed, 8);
        let closed = apply_commutator(&cf, &f).unwrap();
        let brute = brute_force_commutator_4c(&samples, &params, &f).unwrap();
        let rel = closed.l2_distance(&brute).unwrap() / brute.l2_norm();
        assert!(rel < 1e-7, "seed {seed}: oracle mismatch {rel:.3e}");
    }
}

#[test]
fn oracle_pair_2d_both_representations() {
    let grid = build_grid(-8.0, 8.0, 128, 2).unwrap();
    let samples = sample_potentials(&periodic_2d_potential(), &grid).unwrap();
    let params = PhysParams::new(0.5, 1.0, 0.75).unwrap();

    let cf2 = closed_form_commutator_2c(&samples, &params).unwrap();
    let cf4 = closed_form_commutator_4c(&samples, &params).unwrap();
    for seed in 0..20 {
        let f = random_smooth_field::<2>(&grid, 40 + seed, 16);
        let closed = apply_commutator(&cf2, &f).unwrap();
        let brute = brute_force_commutator_2c(&samples, &params, &f).unwrap();
        let rel = closed.l2_distance(&brute).unwrap() / brute.l2_norm();
        assert!(rel < 1e-7, "2c seed {seed}: {rel:.3e}");

        let f = random_smooth_field::<4>(&grid, 80 + seed, 16);
        let closed = apply_commutator(&cf4, &f).unwrap();
        let brute = brute_force_commutator_4c(&samples, &params, &f).unwrap();
        let rel = closed.l2_distance(&brute).unwrap() / brute.l2_norm();
        assert!(rel < 1e-7, "4c seed {seed}: {rel:.3e}");
    }
}

#[test]
fn oracle_residual_tightens_as_the_grid_doubles() {
    let params = PhysParams::classical();
    let residual = |m: usize| -> f64 {
        let grid = build_grid(-32.0, 32.0, m, 1).unwrap();
        let samples = sample_potentials(&PotentialSpec::paper_1d(), &grid).unwrap();
        let cf = closed_form_commutator_2c(&samples, &params).unwrap();
        let f = random_localized_field::<2>(&grid, 9, 16);
        let closed = apply_commutator(&cf, &f).unwrap();
        let brute = brute_force_commutator_2c(&samples, &params, &f).unwrap();
        closed.l2_distance(&brute).unwrap() / brute.l2_norm()
    };
    let r128 = residual(128);
    let r256 = residual(256);
    assert!(
        r256 < 0.1 * r128,
        "aliasing should collapse with resolution: {r128:.3e} -> {r256:.3e}"
    );
}

#[test]
fn vanishes_without_magnetic_potential() {
    // 1D with A = 0: the brute force must cancel to the discretization floor
    let grid = build_grid(-8.0, 8.0, 256, 1).unwrap();
    let no_mag = PotentialSpec::new(
        1,
        Arc::new(|x: &[f64]| (1.0 - x[0]) / (1.0 + x[0] * x[0])),
        vec![Arc::new(|_: &[f64]| 0.0)],
        None,
        None,
    )
    .unwrap();
    let samples = sample_potentials(&no_mag, &grid).unwrap();
    let params = PhysParams::classical();
    let f = random_localized_field::<2>(&grid, 3, 8);
    let brute = brute_force_commutator_2c(&samples, &params, &f).unwrap();
    // scale of the individual (non-cancelling) terms
    let scale = {
        let wf = apply_w_2c(&samples, &params, &f);
        let twf = apply_t_2c(&wf, &params).unwrap();
        2.0 * apply_w_2c(&samples, &params, &twf).l2_norm()
    };
    assert!(
        brute.l2_norm() < 1e-9 * scale,
        "residual {} vs term scale {scale}",
        brute.l2_norm()
    );

    // 2D honeycomb has A = 0 identically; the potential is not periodic on
    // the box, so the test field must be localized and well resolved
    let grid = build_grid(-10.0, 10.0, 256, 2).unwrap();
    let samples = sample_potentials(&PotentialSpec::honeycomb_2d(), &grid).unwrap();
    let f = random_localized_field::<2>(&grid, 4, 8);
    let brute = brute_force_commutator_2c(&samples, &params, &f).unwrap();
    let scale = {
        let wf = apply_w_2c(&samples, &params, &f);
        let twf = apply_t_2c(&wf, &params).unwrap();
        2.0 * apply_w_2c(&samples, &params, &twf).l2_norm()
    };
    assert!(
        brute.l2_norm() < 1e-9 * scale,
        "2D residual {} vs {scale}",
        brute.l2_norm()
    );
}

#[test]
fn one_d_closed_form_ignores_the_electric_potential() {
    let params = PhysParams::new(0.5, 0.25, 1.0).unwrap();
    let pt_a = PotentialPoint {
        v: 0.0,
        a: [1.3, 0.0, 0.0],
        ..Default::default()
    };
    let pt_b = PotentialPoint {
        v: 123.456,
        a: [1.3, 0.0, 0.0],
        dv: [9.0, 0.0, 0.0],
        ..Default::default()
    };
    let (f0_a, _) = coeffs_2c(&pt_a, &params, 1).unwrap();
    let (f0_b, _) = coeffs_2c(&pt_b, &params, 1).unwrap();
    assert_eq!(
        f0_a, f0_b,
        "1D coefficient must be bit-identical under V changes"
    );
}

#[test]
fn linearity_in_t_via_brute_force() {
    let grid = build_grid(-8.0, 8.0, 128, 1).unwrap();
    let samples = sample_potentials(&PotentialSpec::paper_1d(), &grid).unwrap();
    let params = PhysParams::classical();
    let f = random_localized_field::<2>(&grid, 17, 8);

    // derivative part alone vanishes in 1D
    let rep = verify_commutator_linearity(&samples, &params, &f, 1.0, 0.0).unwrap();
    assert!(
        rep.derivative_part_norm < 1e-7 * rep.mass_part_norm.max(1.0),
        "[W,[sigma_1 d_1, W]] should vanish in 1D: {:.3e}",
        rep.derivative_part_norm
    );

    // mass part alone equals the full closed form
    let rep = verify_commutator_linearity(&samples, &params, &f, 0.0, 1.0).unwrap();
    let cf = closed_form_commutator_2c(&samples, &params).unwrap();
    let closed = apply_commutator(&cf, &f).unwrap();
    assert!((rep.combined_norm - closed.l2_norm()).abs() < 1e-7 * closed.l2_norm());

    // generic weights are linear
    let rep = verify_commutator_linearity(&samples, &params, &f, 0.7, -1.3).unwrap();
    assert!(
        rep.residual_rel < 1e-12,
        "linearity residual {:.3e}",
        rep.residual_rel
    );
}

fn random_point(rng: &mut ChaCha8Rng) -> (PotentialPoint, [f64; 3]) {
    // smooth 3D potentials with hand-written partials, evaluated pointwise
    let x: [f64; 3] = [
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ];
    let k = [
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
    ];
    let pt = PotentialPoint {
        v: x[0].sin() * x[1].cos() + x[2],
        a: [
            x[0].cos() * x[1],
            (x[1] + 2.0 * x[2]).sin(),
            x[0] * x[2] + 0.3,
        ],
        dv: [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin(), 1.0],
        da: [
            [-x[0].sin() * x[1], x[0].cos(), 0.0],
            [
                0.0,
                (x[1] + 2.0 * x[2]).cos(),
                2.0 * (x[1] + 2.0 * x[2]).cos(),
            ],
            [x[2], 0.0, x[0]],
        ],
    };
    (pt, k)
}

#[test]
fn symbol_level_oracle_3d_four_component() {
    let params = PhysParams::new(0.5, 0.75, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let (pt, k) = random_point(&mut rng);
        let brute = brute_force_symbol_4c(&pt, &params, 3, &k);
        let closed = closed_form_symbol_4c(&pt, &params, 3, &k).unwrap();
        let scale = brute.max_abs().max(1.0);
        let defect = brute.max_abs_diff(&closed);
        assert!(
            defect < 1e-12 * scale,
            "trial {trial}: symbol defect {defect:.3e} at scale {scale:.3e}"
        );
    }
}

#[test]
fn symbol_level_oracle_1d_2d_both_representations() {
    let params = PhysParams::classical();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for dim in 1..=2usize {
        for _ in 0..50 {
            let (pt, k3) = random_point(&mut rng);
            let k = &k3[..dim];
            let brute = brute_force_symbol_2c(&pt, &params, dim, k);
            let closed = closed_form_symbol_2c(&pt, &params, dim, k).unwrap();
            assert!(brute.max_abs_diff(&closed) < 1e-12 * brute.max_abs().max(1.0));

            let brute = brute_force_symbol_4c(&pt, &params, dim, k);
            let closed = closed_form_symbol_4c(&pt, &params, dim, k).unwrap();
            assert!(brute.max_abs_diff(&closed) < 1e-12 * brute.max_abs().max(1.0));
        }
    }
}

#[test]
fn closed_form_requires_derivative_samples_in_2d() {
    let grid = build_grid(-8.0, 8.0, 16, 2).unwrap();
    let mut samples = sample_potentials(&periodic_2d_potential(), &grid).unwrap();
    samples.grad_v = None;
    let err = closed_form_commutator_2c(&samples, &PhysParams::classical()).unwrap_err();
    assert!(format!("{err}").contains("derivative"));
}
