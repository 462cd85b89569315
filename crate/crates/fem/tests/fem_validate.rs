//! Cross-module checks: discretization behavior of the eigensolvers and
//! capacity machinery against closed-form oracles and the analytic bounds.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nb_core::bounds::{cusp_mu_lower, szego_weinberger_upper, SearchOpts};
use nb_core::CuspProfile;
use nb_fem::assembly::tri_geoms;
use nb_fem::{
    annulus_capacity_oracle, capacity_p, mesh_annulus, mesh_cusp_2d, mesh_square, mu2_fem,
    mup_rayleigh, CondenserSpec, Plate,
};

#[test]
fn square_eigenvalue_refines_from_above_at_quadratic_rate() {
    let mus: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| mu2_fem(&mesh_square(h).unwrap()).unwrap())
        .collect();
    let exact = PI * PI;
    assert!(mus[0] >= mus[1] && mus[1] >= mus[2], "P1 values must decrease: {mus:?}");
    assert!(mus[2] >= exact, "conforming values stay above the true eigenvalue");
    let d: Vec<f64> = mus.iter().map(|m| m - exact).collect();
    // Halving h should shrink the error about 4x; allow a factor-4 window
    // on either side of that rate.
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.0..=16.0).contains(&ratio), "error reduction {ratio} outside [1, 16]: {d:?}");
    }
}

#[test]
fn tip_truncation_is_below_half_a_percent() {
    // One extra grading level halves the truncated tip height; the
    // eigenvalue must barely notice.
    let coarse = mu2_fem(&mesh_cusp_2d(2.0, 0.05, 5).unwrap()).unwrap();
    let fine = mu2_fem(&mesh_cusp_2d(2.0, 0.05, 6).unwrap()).unwrap();
    assert!(
        (coarse - fine).abs() / fine < 0.005,
        "truncation sensitivity too high: {coarse} vs {fine}"
    );
}

#[test]
fn bracket_holds_for_quadratic_cusp_at_p_two() {
    let profile = CuspProfile::new(2, vec![2.0]).unwrap();
    let report = cusp_mu_lower(&profile, 2.0, &SearchOpts::default()).unwrap();
    assert!(report.extrapolated, "2D evaluation must be flagged");

    let mesh = mesh_cusp_2d(2.0, 0.02, 12).unwrap();
    let fem = mup_rayleigh(&mesh, 2.0, 2, 400, 7).unwrap();
    let area: f64 = tri_geoms(&mesh).iter().map(|g| g.area).sum();
    let upper = szego_weinberger_upper(2, area).unwrap();

    assert!(
        report.mu_lower <= fem.value,
        "lower bound exceeds the FEM value: {} > {}\n{report:#?}",
        report.mu_lower,
        fem.value
    );
    assert!(
        fem.value <= upper * 1.02,
        "FEM value exceeds the equal-volume-ball bound: {} > {}\n{report:#?}",
        fem.value,
        upper
    );
}

#[test]
fn annulus_capacity_matches_radial_oracle_above_two() {
    let mesh = mesh_annulus(1.0, 2.0, 0.05).unwrap();
    let cond = CondenserSpec {
        plate0: vec![Plate::Disc { center: [0.0, 0.0], radius: 1.001 }],
        plate1: vec![Plate::Ring { center: [0.0, 0.0], inner: 1.999, outer: 2.001 }],
    };
    let report = capacity_p(&mesh, &cond, 2.5).unwrap();
    assert!(report.grad_norm < 1e-8);
    assert_relative_eq!(
        report.value,
        annulus_capacity_oracle(1.0, 2.0, 2.5),
        max_relative = 0.02
    );
}

#[test]
fn annulus_capacity_matches_radial_oracle_below_two() {
    let mesh = mesh_annulus(1.0, 2.0, 0.05).unwrap();
    let cond = CondenserSpec {
        plate0: vec![Plate::Disc { center: [0.0, 0.0], radius: 1.001 }],
        plate1: vec![Plate::Ring { center: [0.0, 0.0], inner: 1.999, outer: 2.001 }],
    };
    let report = capacity_p(&mesh, &cond, 1.5).unwrap();
    assert!(report.grad_norm < 1e-8);
    assert_relative_eq!(
        report.value,
        annulus_capacity_oracle(1.0, 2.0, 1.5),
        max_relative = 0.02
    );
}
