use proptest::prelude::*;

use soliton_lab::analyze::{check_q_monotone, Tag};
use soliton_lab::phase::{backward_preserved_regions, forward_preserved_regions};
use soliton_lab::reconstruct::sectional_curvatures;
use soliton_lab::{
    integrate, jacobian, phi, reflect, unstable_seed, x_accel, IntegrationOptions, PhasePoint,
    SolitonParams, Start, Termination,
};

fn params() -> impl Strategy<Value = SolitonParams> {
    (2u32..=8, 0.25f64..4.0).prop_map(|(n, l)| SolitonParams::new(n, l).unwrap())
}

fn point() -> impl Strategy<Value = PhasePoint> {
    (0.0f64..3.0, -2.0f64..2.0, -10.0f64..10.0).prop_map(|(w, x, y)| PhasePoint::new(w, x, y))
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(n)
    }
}

fn field_oracle(p: &SolitonParams, q: [f64; 3]) -> [f64; 3] {
    let (n, l) = (p.nf(), p.lambda());
    let [w, x, y] = q;
    [x * w, x * x - x * y + n - 1.0 - l * w * w, x * y - n * x * x - l * w * w]
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn field_matches_hand_formula(p in params(), q in point()) {
        let v = phi(&p, &q).unwrap().to_array();
        let o = field_oracle(&p, q.to_array());
        for k in 0..3 {
            prop_assert!((v[k] - o[k]).abs() <= 1e-12 * o[k].abs().max(1.0));
        }
    }

    #[test]
    fn jacobian_matches_central_differences(p in params(), q in point()) {
        let j = jacobian(&p, &q).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut a = q.to_array();
            let mut b = q.to_array();
            a[c] += h;
            b[c] -= h;
            let fa = field_oracle(&p, a);
            let fb = field_oracle(&p, b);
            for r in 0..3 {
                let fd = (fa[r] - fb[r]) / (2.0 * h);
                prop_assert!((j[r][c] - fd).abs() < 1e-6, "J[{r}][{c}] = {} vs {fd}", j[r][c]);
            }
        }
    }

    #[test]
    fn reflection_reverses_the_field(p in params(), q in point()) {
        // phi(L q) = -L_* phi(q): omega rate flips, x and y rates are even
        let a = phi(&p, &reflect(&q)).unwrap();
        let b = phi(&p, &q).unwrap();
        prop_assert_eq!(a.d_omega, -b.d_omega);
        prop_assert_eq!(a.d_x, b.d_x);
        prop_assert_eq!(a.d_y, b.d_y);
        prop_assert_eq!(reflect(&reflect(&q)), q);
    }

    #[test]
    fn region_membership_commutes_with_reflection(p in params(), q in point()) {
        for r in forward_preserved_regions().iter().chain(backward_preserved_regions().iter()) {
            let m = r.reflect();
            prop_assert_eq!(m.direction, r.direction.reversed());
            prop_assert_eq!(r.region.contains(&p, &q), m.region.contains(&p, &reflect(&q)));
        }
    }

    #[test]
    fn x_accel_is_the_derivative_of_dx_dt(p in params(), q in point()) {
        // d/dt (dx/dt) = grad(dx/dt) . phi, by the chain rule
        let j = jacobian(&p, &q).unwrap();
        let v = phi(&p, &q).unwrap().to_array();
        let want: f64 = (0..3).map(|c| j[1][c] * v[c]).sum();
        let got = x_accel(&p, &q).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn seeds_sit_on_the_unstable_plane(
        p in params(),
        theta in -1.5f64..1.5,
        delta in 1e-8f64..1e-4,
    ) {
        let seed = unstable_seed(&p, theta, delta).unwrap();
        let d = seed.offset;
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        prop_assert!((norm - delta).abs() <= 1e-12 * delta);
        // the (x, y) part is an eigenvector of eigenvalue 2: y-offset = -n x-offset
        prop_assert!((d[2] + p.nf() * d[1]).abs() <= 1e-15 * delta.max(1e-300) + 1e-22);
        prop_assert!(d[0] >= 0.0);
    }

    #[test]
    fn sphere_points_have_equal_curvatures(p in params(), s in -1.4f64..1.4) {
        // the ellipse n x^2 + lambda omega^2 = n on the line y = n x
        let n = p.nf();
        let x = s.sin();
        let w = (n / p.lambda()).sqrt() * s.cos();
        let (nu1, nu2) = sectional_curvatures(&p, &PhasePoint::new(w, x, n * x)).unwrap();
        let k = p.lambda() / n;
        prop_assert!((nu1 - k).abs() < 1e-9 * k.max(1.0) / s.cos().powi(2));
        prop_assert!((nu2 - k).abs() < 1e-9 * k.max(1.0) / s.cos().powi(2));
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn length_is_the_quadrature_of_omega(q in point(), backward in any::<bool>()) {
        let p = SolitonParams::new(2, 1.0).unwrap();
        let q = PhasePoint::new(q.omega.max(0.1), q.x, q.y);
        let t1 = if backward { -1.0 } else { 1.0 };
        let traj = integrate(&p, q, (0.0, t1), &IntegrationOptions::default(), &[]).unwrap();
        // near a blow-up omega is too steep for a fixed-step rule
        prop_assume!(traj.termination() == Termination::HorizonReached);
        let dense = traj.resample(4001);
        // composite Simpson on the dense output
        let h = (dense.last().unwrap().t - dense[0].t) / (dense.len() - 1) as f64;
        let mut acc = dense[0].omega() + dense.last().unwrap().omega();
        for (i, s) in dense.iter().enumerate().take(dense.len() - 1).skip(1) {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * s.omega();
        }
        let simpson = acc * h / 3.0;
        let r = dense.last().unwrap().r();
        let scale = dense.iter().map(|s| s.omega().abs()).fold(1.0, f64::max);
        prop_assert!((r - simpson).abs() < 1e-7 * scale,
            "r = {r}, simpson = {simpson}, termination {}", traj.termination());
    }

    #[test]
    fn q_decreases_along_runs(q in point(), backward in any::<bool>()) {
        let p = SolitonParams::new(3, 1.0).unwrap();
        let q = PhasePoint::new(q.omega.max(0.1), q.x, q.y);
        let t1 = if backward { -3.0 } else { 3.0 };
        let traj = integrate(&p, q, (0.0, t1), &IntegrationOptions::default(), &[]).unwrap();
        let rep = check_q_monotone(&traj).unwrap();
        prop_assert_eq!(rep.violations, 0);
        // and independently from the raw samples, ordered by t
        let mut s: Vec<_> = traj.samples().iter().filter(|s| s.omega() > 0.0).map(|s| (s.t, s.y() / s.omega())).collect();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in s.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-12 * w[0].1.abs().max(1.0));
        }
    }

    #[test]
    fn reflected_run_is_the_backward_run_of_the_reflection(q in point()) {
        let p = SolitonParams::new(2, 1.0).unwrap();
        let q = PhasePoint::new(q.omega.max(0.1), q.x, q.y);
        let opts = IntegrationOptions::default();
        let fwd = integrate(&p, q, (0.0, 2.0), &opts, &[]).unwrap();
        let bwd = integrate(&p, Start::from(q).reflect(), (0.0, -2.0), &opts, &[]).unwrap();
        prop_assert_eq!(fwd.termination(), bwd.termination());
        for s in bwd.samples() {
            if let Some(a) = fwd.eval(-s.t) {
                let la = reflect(&a.point()).to_array();
                let b = s.point().to_array();
                for k in 0..3 {
                    prop_assert!((la[k] - b[k]).abs() <= 1e-7 * b[k].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn steady_seeds_stay_in_the_plane(side in prop::bool::ANY, delta in 1e-7f64..1e-5) {
        let p = SolitonParams::new(2, 1.0).unwrap().with_steady(true);
        let theta = if side { std::f64::consts::FRAC_PI_2 } else { -std::f64::consts::FRAC_PI_2 };
        let seed = unstable_seed(&p, theta, delta).unwrap();
        let traj = integrate(&p, seed, (0.0, 5.0), &IntegrationOptions::default(), &[]).unwrap();
        prop_assert!(traj.samples().iter().all(|s| s.omega() == 0.0));
    }
}

#[test]
fn tag_involution() {
    for t in [
        Tag::RoundSphere,
        Tag::GaussianFlat,
        Tag::ReversedGaussian,
        Tag::Cylinder,
        Tag::IncompleteBlowup,
        Tag::IncompleteCollapse,
        Tag::Undetermined,
    ] {
        assert_eq!(t.reflect().reflect(), t);
    }
    assert_eq!(Tag::GaussianFlat.reflect(), Tag::ReversedGaussian);
    assert_eq!(Tag::Cylinder.reflect(), Tag::Cylinder);
}
