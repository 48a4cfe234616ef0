use std::f64::consts::PI;

use nhscatter::diagnostics::width;
use nhscatter::floquet::{
    build_channels, solve_floquet_scattering, verify_invisibility, Incidence, Window,
};
use nhscatter::grid::{inner_norm, make_gaussian_packet, SpatialGrid, WaveFunction};
use nhscatter::modulation::{
    classify_sidedness, mean_square_antiderivative, ModulationSpec, Sidedness, Tone,
};
use nhscatter::potential::{effective_potential, PotentialSpec};
use nhscatter::propagator::{
    effective_propagate, gauge_transform, inverse_gauge_transform, propagate, PropagationPlan,
};
use nhscatter::Complex64;
use proptest::prelude::*;

const BETA: f64 = 1.0 / 64.0;

fn packet(grid: SpatialGrid, center: f64, w: f64, k: f64) -> WaveFunction {
    make_gaussian_packet(grid, center, w, k, true).unwrap()
}

/// |w_full - w_eff| / w_eff at t = 40 for the cos drive at strength v0 / omega fixed.
fn averaging_error(omega: f64) -> f64 {
    let v0 = 20.0 * omega / 3.0;
    let grid = SpatialGrid::new(-256.0, 256.0, 4096).unwrap();
    let psi = packet(grid, 0.0, 5.0, 0.0);
    let pot = PotentialSpec::gaussian(v0, BETA).unwrap();
    let m = ModulationSpec::cosine(omega, 1.0).unwrap();
    let plan = PropagationPlan::with_default_dt(40.0, 1_000_000, &m, 0.01).unwrap();
    let full = width(&propagate(&psi, &pot, &m, &plan).unwrap().final_state()).unwrap();
    let eff = effective_potential(&pot, &grid, &m).unwrap();
    let averaged = width(
        &effective_propagate(&psi, &eff, &plan)
            .unwrap()
            .final_state(),
    )
    .unwrap();
    (full - averaged).abs() / averaged
}

#[test]
fn averaged_dynamics_converge_like_one_over_omega() {
    let errors: Vec<f64> = [3.0, 6.0, 12.0, 24.0]
        .iter()
        .map(|&w| averaging_error(w))
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.6..2.6).contains(&ratio), "errors {errors:?}");
    }
    assert!(errors[3] < 0.03, "errors {errors:?}");
}

fn gaussian_solve(
    m: &ModulationSpec,
    range: i32,
    incidence: Incidence,
) -> nhscatter::floquet::FloquetScatteringResult {
    let pot = PotentialSpec::gaussian(7.0, BETA).unwrap();
    let channels = build_channels(0.25, m, -range, range).unwrap();
    let base = Window::default_for(&pot).unwrap();
    let window = Window::new(base.x_min, base.x_max, 2001).unwrap();
    solve_floquet_scattering(&pot, m, &channels, window, incidence).unwrap()
}

#[test]
fn invisibility_holds_from_either_side() {
    let m = ModulationSpec::one_sided(0.9, 0.5).unwrap();
    for incidence in [Incidence::FromLeft, Incidence::FromRight] {
        let res = gaussian_solve(&m, 12, incidence);
        let report = verify_invisibility(&res, 1e-6);
        assert!(report.invisible(), "{incidence:?}: {report:?}");
    }
}

#[test]
fn hermitian_reflection_is_reciprocal() {
    let m = ModulationSpec::cosine(0.9, 1.0).unwrap();
    let left = gaussian_solve(&m, 20, Incidence::FromLeft);
    let right = gaussian_solve(&m, 20, Incidence::FromRight);
    // the even potential makes the two incidences mirror images
    for (a, b) in left.r.iter().zip(&right.r) {
        assert!((a.norm() - b.norm()).abs() < 1e-9);
    }
    assert!((left.flux - 1.0).abs() < 1e-6 && (right.flux - 1.0).abs() < 1e-6);
}

#[test]
fn widening_the_sideband_range_changes_little_once_edges_are_quiet() {
    let m = ModulationSpec::one_sided_negative(0.9, 0.5).unwrap();
    let base = gaussian_solve(&m, 28, Incidence::FromLeft);
    assert!(
        !base.truncation_warning,
        "edge amplitude {}",
        base.edge_channel_amplitude
    );
    let wide = gaussian_solve(&m, 30, Incidence::FromLeft);
    for (p, ch) in base.channels.channels.iter().enumerate() {
        let (_, r, t) = wide.channel(ch.m).unwrap();
        assert!(
            (base.r[p] - r).norm() < 1e-8 && (base.t[p] - t).norm() < 1e-8,
            "m = {}",
            ch.m
        );
    }

    let narrow = gaussian_solve(&m, 4, Incidence::FromLeft);
    assert!(narrow.truncation_warning);
}

fn small_grid() -> SpatialGrid {
    SpatialGrid::new(-48.0, 48.0, 256).unwrap()
}

fn tone() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.5..4.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_drives_conserve_norm(v0 in -10.0..10.0f64, omega in 1.0..5.0f64, amp in 0.1..2.0f64, k in -1.0..1.0f64) {
        let psi = packet(small_grid(), -5.0, 5.0, k);
        let pot = PotentialSpec::gaussian(v0, BETA).unwrap();
        let m = ModulationSpec::cosine(omega, amp).unwrap();
        let plan = PropagationPlan::with_default_dt(3.0, 1000, &m, 0.01).unwrap();
        let traj = propagate(&psi, &pot, &m, &plan).unwrap();
        for i in 0..traj.len() {
            prop_assert!((inner_norm(&traj.state(i)) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gauge_round_trip_is_identity(tones in prop::collection::vec(tone(), 1..4), t in 0.0..20.0f64) {
        let spec = ModulationSpec::new(
            tones.iter().map(|&(re, im, f)| Tone { amplitude: Complex64::new(re, im), frequency: f }).collect(),
        ).unwrap();
        let mut psi = packet(small_grid(), 0.0, 5.0, 0.3);
        psi.time = t;
        let pot = PotentialSpec::gaussian(3.0, BETA).unwrap();
        let back = inverse_gauge_transform(&gauge_transform(&psi, &pot, &spec).unwrap(), &pot, &spec).unwrap();
        for (a, b) in back.values.iter().zip(&psi.values) {
            prop_assert!((a - b).norm() < 1e-14 * (1.0 + b.norm()) * 4.0);
        }
    }

    #[test]
    fn one_sided_spectra_have_no_effective_potential(tones in prop::collection::vec(tone(), 1..5), flip in any::<bool>()) {
        let sign = if flip { -1.0 } else { 1.0 };
        let spec = ModulationSpec::new(
            tones.iter().map(|&(re, im, f)| Tone { amplitude: Complex64::new(re, im), frequency: sign * f }).collect(),
        ).unwrap();
        prop_assert!(matches!(
            classify_sidedness(&spec, 1e-12).classification,
            Sidedness::PositiveOneSided | Sidedness::NegativeOneSided | Sidedness::Zero
        ));
        prop_assert!(mean_square_antiderivative(&spec).norm() < 1e-15);
        let eff = effective_potential(&PotentialSpec::gaussian(7.0, BETA).unwrap(), &small_grid(), &spec).unwrap();
        prop_assert!(eff.max_abs() < 1e-14 * 49.0);
    }

    #[test]
    fn record_times_match_trajectory(total in 0.5..4.0f64, per_period in 32usize..80, spr in 1usize..20) {
        let omega = 3.0;
        let m = ModulationSpec::one_sided(omega, 0.5).unwrap();
        let steps = (total / (2.0 * PI / omega / per_period as f64)).ceil() as usize;
        let plan = PropagationPlan::new(total / steps as f64, spr, total).unwrap();
        let psi = packet(small_grid(), 0.0, 5.0, 0.0);
        let traj = propagate(&psi, &PotentialSpec::gaussian(1.0, BETA).unwrap(), &m, &plan).unwrap();
        let times = plan.record_times(0.0);
        prop_assert_eq!(times.len(), traj.len());
        for (a, b) in times.iter().zip(&traj.times) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
