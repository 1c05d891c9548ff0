mod common;

use common::{angle_gap_deg, salt_and_pepper, strip_patch};
use crackwidth::tilt::{nuclear_norm, warp};
use crackwidth::{
    extract_angle, pre_rotation_search, rotate_patch, rotation_jacobian, soft_threshold, svt,
    tilt_solve, Patch, RotationParam, TiltConfig,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-3.0..3.0))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    random_matrix(rng, n, n).qr().q()
}

#[test]
fn svt_matches_shrunk_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.random_range(2..8);
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let tau = rng.random_range(0.0..3.0);
        let u = random_orthogonal(&mut rng, n);
        let v = random_orthogonal(&mut rng, n);
        let m = &u * DMatrix::from_diagonal(&sigma.clone().into()) * v.transpose();
        let shrunk: Vec<f64> = sigma.iter().map(|s| (s - tau).max(0.0)).collect();
        let want = &u * DMatrix::from_diagonal(&shrunk.into()) * v.transpose();
        assert!((svt(&m, tau) - want).amax() <= 1e-10);
    }
}

#[test]
fn svt_shrinks_diagonal_nuclear_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let d: Vec<f64> = (0..6).map(|_| rng.random_range(0.5..4.0)).collect();
        let m = DMatrix::from_diagonal(&d.clone().into());
        let tau = rng.random_range(0.0..2.0);
        let exact: f64 = d.iter().map(|s| (s - tau).max(0.0)).sum();
        assert!((nuclear_norm(&svt(&m, tau)) - exact).abs() <= 1e-10);
    }
    // with every singular value above the threshold the shrink is exactly τ per rank
    let m = DMatrix::from_diagonal(&vec![3.0, 2.5, 4.0].into());
    assert!((nuclear_norm(&svt(&m, 2.0)) - (9.5 - 2.0 * 3.0)).abs() <= 1e-10);
}

#[test]
fn soft_threshold_is_elementwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_matrix(&mut rng, 9, 7);
    let tau = 1.1;
    let got = soft_threshold(&m, tau);
    for (g, x) in got.iter().zip(m.iter()) {
        let want = x.signum() * (x.abs() - tau).max(0.0);
        assert!((g - want).abs() <= 1e-10);
    }
}

fn finite_difference(patch: &Patch, theta: f64, h: f64) -> DMatrix<f64> {
    (warp(patch, theta + h) - warp(patch, theta - h)) / (2.0 * h)
}

fn interior_max_abs(m: &DMatrix<f64>, border: usize) -> f64 {
    let (r, c) = m.shape();
    let mut worst: f64 = 0.0;
    for i in border..r - border {
        for j in border..c - border {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// At quarter-turn angles the warp samples the pixel grid exactly, where the
/// one-sided bilinear slopes average to the central difference.
#[test]
fn jacobian_matches_finite_differences_on_random_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..20 {
        // the bilinear warp's finite difference carries a cross term bounded by
        // 2h·|vx·vy|; on a 12 px patch interior that is at most 0.032 for h = 1e-3
        let data = (0..12 * 12)
            .map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 })
            .collect();
        let patch = Patch::new(12, 12, (0, 0), data).unwrap();
        let theta = [0.0f64, 90.0, 180.0, 270.0][k % 4].to_radians();
        let jac = rotation_jacobian(&patch, &RotationParam::new(theta));
        let fd = finite_difference(&patch, theta, 1e-3);
        let err = interior_max_abs(&(jac - fd), 2);
        assert!(err <= 5e-2, "patch {k}: {err}");
    }
}

#[test]
fn jacobian_matches_finite_differences_on_smooth_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..10 {
        let (fx, fy, phase) = (
            rng.random_range(0.05..0.15),
            rng.random_range(0.05..0.15),
            rng.random_range(0.0..6.0),
        );
        let patch = Patch::from_fn(32, 32, |x, y| {
            0.5 + 0.5 * (fx * x as f64 + fy * y as f64 + phase).sin()
        })
        .unwrap();
        let theta = rng.random_range(-1.0..1.0);
        let jac = rotation_jacobian(&patch, &RotationParam::new(theta));
        let fd = finite_difference(&patch, theta, 1e-3);
        // away from the border, where rotated samples stay inside the frame
        assert!(interior_max_abs(&(jac - fd), 10) <= 5e-2, "patch {k}");
    }
}

#[test]
fn centered_disk_has_near_zero_jacobian() {
    let patch = Patch::from_fn(32, 32, |x, y| {
        let r2 = (x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2);
        (-r2 / 50.0).exp()
    })
    .unwrap();
    let jac = rotation_jacobian(&patch, &RotationParam::new(0.0));
    assert!(interior_max_abs(&jac, 2) <= 5e-2);
}

#[test]
fn pre_rotation_picks_lowest_nuclear_norm() {
    let patch = strip_patch(64, 30.0, 2.5, 0.0);
    let grid: Vec<f64> = (0..=18).map(|k| k as f64 * 5.0).collect();
    let chosen = pre_rotation_search(&patch, &grid)
        .unwrap()
        .theta
        .to_degrees();
    assert!(
        angle_gap_deg(chosen, 30.0, 1e9) < 1e-9 || angle_gap_deg(chosen, 60.0, 1e9) < 1e-9,
        "{chosen}"
    );
    let score = |deg: f64| {
        let w = warp(&patch, deg.to_radians());
        nuclear_norm(&(&w / w.norm()))
    };
    let best = score(chosen);
    for &g in &grid {
        assert!(best <= score(g) + 1e-12, "{g}° beats {chosen}°");
    }
    let aligned = strip_patch(64, 0.0, 2.5, 0.0);
    assert_eq!(pre_rotation_search(&aligned, &grid).unwrap().theta, 0.0);
}

#[test]
fn aligned_strip_is_a_fixed_point() {
    let patch = strip_patch(64, 0.0, 2.0, 0.0);
    let r = tilt_solve(&patch, &RotationParam::new(0.0), &TiltConfig::default()).unwrap();
    assert!(r.theta_total.abs() <= 1e-3);
    let d = warp(&patch, 0.0);
    let d_l1 = (&d / d.norm()).abs().sum();
    assert!(
        r.sparse.abs().sum() <= 1e-6 * d_l1,
        "{}",
        r.sparse.abs().sum()
    );
}

fn recover(patch: &Patch, cfg: &TiltConfig) -> (f64, crackwidth::TiltResult) {
    let init = pre_rotation_search(patch, &cfg.angle_grid).unwrap();
    let r = tilt_solve(patch, &init, cfg).unwrap();
    (extract_angle(&r).to_degrees(), r)
}

#[test]
fn rotated_strip_is_recovered_with_and_without_corruption() {
    let cfg = TiltConfig::default();
    let clean = strip_patch(64, 20.0, 3.0, 0.0);
    let (angle, _) = recover(&clean, &cfg);
    assert!(angle_gap_deg(angle, 20.0, 90.0) <= 1.0, "{angle}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (noisy, _) = salt_and_pepper(&clean, 0.05, &mut rng);
    let (angle, r) = recover(&noisy, &cfg);
    assert!(angle_gap_deg(angle, 20.0, 90.0) <= 1.0, "{angle}");

    // corruption as seen by the solver: warped and scaled like the input
    let warped = warp(&noisy, r.theta_total);
    let corruption = (&warped - warp(&clean, r.theta_total)) / warped.norm();
    let captured = r.sparse.dot(&corruption) / corruption.norm_squared();
    assert!(captured >= 0.8, "{captured}");
}

#[test]
fn off_grid_angles_are_refined() {
    let cfg = TiltConfig::default();
    for beta in [7.0, 12.5, 23.0, 37.0, 58.0, 83.0] {
        let (angle, r) = recover(&strip_patch(64, beta, 3.5, 0.0), &cfg);
        assert!(angle_gap_deg(angle, beta, 90.0) <= 1.0, "β {beta}: {angle}");
        assert!(r.converged);
    }
}

#[test]
fn objective_trace_is_monotone_and_deterministic() {
    let cfg = TiltConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for beta in [12.5, 33.0, 71.0] {
        let (noisy, _) = salt_and_pepper(&strip_patch(64, beta, 2.5, 0.3), 0.05, &mut rng);
        let (_, a) = recover(&noisy, &cfg);
        let (_, b) = recover(&noisy, &cfg);
        assert_eq!(a.objective_trace, b.objective_trace);
        for w in a.objective_trace.windows(2) {
            assert!(w[1] <= w[0], "{:?}", a.objective_trace);
        }
    }
}

#[test]
fn converged_solution_is_feasible() {
    let cfg = TiltConfig::default();
    let (_, r) = recover(&strip_patch(64, 23.0, 3.0, 0.0), &cfg);
    assert!(r.converged);
    assert!(r.final_residual <= cfg.inner_tol, "{}", r.final_residual);
}

#[test]
fn solution_is_rotation_equivariant() {
    let cfg = TiltConfig::default();
    let base = strip_patch(64, 7.0, 3.0, 0.0);
    let (a0, _) = recover(&base, &cfg);
    for beta in [10.0, 20.0, 40.0] {
        let turned = rotate_patch(&base, f64::to_radians(beta)).unwrap();
        let (a1, _) = recover(&turned, &cfg);
        assert!(
            angle_gap_deg(a1 - a0, beta, 90.0) <= 1.0,
            "β {beta}: {a0} -> {a1}"
        );
    }
}
