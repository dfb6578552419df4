use hypstab::boundary::{negative_space, BoundarySymbol, Frequency};
use hypstab::estimate::{estimate_probe, gauss_legendre, Forcing, ProbeOptions};
use hypstab::lopatinski::{dissipative_boundary, BoundaryProblem};
use hypstab::models::{mhd_system, MhdState};
use hypstab::normal_form::two_by_two_problem;
use hypstab::symmetrizer::upper_samples;
use hypstab::{CMat, CVec, Complex64, Error, HyperbolicSystem, RMat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `u_t + b u_y + u_x = 0` on `x > 0`, `u(0) = g`.
fn scalar(b: f64) -> BoundaryProblem {
    let sys = HyperbolicSystem::new(vec![RMat::from_element(1, 1, b), RMat::from_element(1, 1, 1.0)], None).unwrap();
    BoundaryProblem::constant(&sys, CMat::from_element(1, 1, cx(1.0, 0.0))).unwrap()
}

/// Exact ratio for the scalar problem with `f = c exp(-beta x)`.
fn scalar_oracle(b: f64, z: &Frequency, c: Complex64, beta: f64, g: Complex64) -> f64 {
    let lam = cx(z.gamma, z.tau + b * z.eta[0]);
    let bb = c / (lam - beta);
    let aa = g - bb;
    let u2 = aa.norm_sqr() / (2.0 * z.gamma) + bb.norm_sqr() / (2.0 * beta) + 2.0 * (aa * bb.conj() / (lam + beta)).re;
    let f2 = c.norm_sqr() / (2.0 * beta);
    (z.gamma * u2 + g.norm_sqr()) / (f2 / z.gamma + g.norm_sqr())
}

#[test]
fn zero_data_is_degenerate() {
    let bp = scalar(0.3);
    let r = estimate_probe(&bp, &Frequency::new(0.6, vec![0.0], 0.8), &Forcing::zero(), &CVec::zeros(1), &ProbeOptions::default()).unwrap();
    assert!(r.degenerate);
    assert_eq!(r.ratio, 0.0);
}

#[test]
fn scalar_closed_form() {
    let b = 0.3;
    let bp = scalar(b);
    for (z, c, beta, g) in [
        (Frequency::new(0.6, vec![0.0], 0.8), cx(0.0, 0.0), 1.0, cx(1.0, 0.0)),
        (Frequency::new(0.3, vec![-0.5], 0.1), cx(0.5, -0.2), 0.7, cx(0.0, 0.0)),
        (Frequency::new(-0.9, vec![0.2], 0.01), cx(-0.1, 0.4), 2.5, cx(0.3, 0.8)),
    ] {
        let f = if c.norm() == 0.0 { Forcing::zero() } else { Forcing { terms: vec![(CVec::from_element(1, c), beta)] } };
        let r = estimate_probe(&bp, &z, &f, &CVec::from_element(1, g), &ProbeOptions::default()).unwrap();
        let exact = scalar_oracle(b, &z, c, beta, g);
        assert!((r.ratio - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.ratio);
    }
    // boundary data only: (gamma / (2 gamma) + 1) = 3/2
    let r = estimate_probe(&bp, &Frequency::new(0.2, vec![0.1], 0.5), &Forcing::zero(), &CVec::from_element(1, cx(2.0, 0.0)), &ProbeOptions::default())
        .unwrap();
    assert!((r.ratio - 1.5).abs() < 1e-10);
}

#[test]
fn input_checks() {
    let bp = scalar(0.0);
    let z = Frequency::new(0.6, vec![0.0], 0.8);
    let o = ProbeOptions::default();
    assert!(estimate_probe(&bp, &Frequency::new(1.0, vec![0.0], 0.0), &Forcing::zero(), &CVec::zeros(1), &o).is_err());
    assert!(matches!(estimate_probe(&bp, &z, &Forcing::zero(), &CVec::zeros(2), &o), Err(Error::DimensionMismatch { .. })));
    let bad = Forcing { terms: vec![(CVec::from_element(1, cx(1.0, 0.0)), -1.0)] };
    assert!(estimate_probe(&bp, &z, &bad, &CVec::zeros(1), &o).is_err());
}

#[test]
fn failure_point_is_reported() {
    // ker M = E_- exactly
    let bp = two_by_two_problem(1.0, 0.3).unwrap();
    let z = Frequency::new(0.4, vec![-0.3], 0.5);
    let e = negative_space(bp.symbol(), &z, 1e-14).unwrap().basis;
    let m = CMat::from_row_slice(1, 2, &[e[(1, 0)], -e[(0, 0)]]);
    let bad = BoundaryProblem::constant(bp.system(), m).unwrap();
    let r = estimate_probe(&bad, &z, &Forcing::zero(), &CVec::from_element(1, cx(1.0, 0.0)), &ProbeOptions::default());
    assert!(matches!(r, Err(Error::LopatinskiFailureAtPoint(_))));
}

#[test]
fn dissipative_mhd_ratio_is_bounded() {
    let st = MhdState::new(1.2, [0.1, -0.2, 0.3], [0.6, -0.3, 0.8]);
    let sys = mhd_system(&st);
    let bp = BoundaryProblem::constant(&sys, dissipative_boundary(&sys).unwrap()).unwrap();
    let k = bp.symbol().incoming();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut sup = 0.0f64;
    for z in upper_samples(2, 12) {
        for z in [z.clone(), Frequency { gamma: 1e-2, ..z }.normalized()] {
            let c = CVec::from_fn(7, |_, _| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let g = CVec::from_fn(k, |_, _| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let f = Forcing { terms: vec![(c, rng.gen_range(0.1..3.0))] };
            let r = estimate_probe(&bp, &z, &f, &g, &ProbeOptions::default()).unwrap();
            assert!(r.ratio.is_finite());
            sup = sup.max(r.ratio);
        }
    }
    assert!(sup < 1e2, "{sup}");
}

#[test]
fn ratio_grows_toward_the_failing_condition() {
    // a = 1 near the glancing point tau = -eta, boundary data only
    let z = Frequency::new(-0.7, vec![0.7], 0.02).normalized();
    let g = CVec::from_element(1, cx(1.0, 0.0));
    let mut last = 0.0;
    for cc in [0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.99] {
        let r = estimate_probe(&two_by_two_problem(1.0, cc).unwrap(), &z, &Forcing::zero(), &g, &ProbeOptions::default()).unwrap();
        assert!(r.ratio > last, "c = {cc}: {} after {last}", r.ratio);
        last = r.ratio;
    }
}

#[test]
fn gauss_legendre_weights() {
    for n in [1, 2, 5, 12] {
        let (x, w) = gauss_legendre(n);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        // exact for degree 2n - 1
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * n as i32 - 2)).sum();
        assert!((s - 2.0 / (2 * n - 1) as f64).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boundary_data_ratio_matches_mode_formula(
        a in 0.3f64..3.0, cc in -0.9f64..0.9,
        t in -1.0f64..1.0, e in -1.0f64..1.0, gam in 0.02f64..1.0,
    ) {
        // u = e^{-i mu x} e s with M e s = g
        let bp = two_by_two_problem(a, cc / a).unwrap();
        let z = Frequency::new(t, vec![e], gam).normalized();
        let sym: &BoundarySymbol = bp.symbol();
        let v = negative_space(sym, &z, 1e-14).unwrap().basis;
        let gz = sym.g(&z).unwrap();
        let mu = (v.adjoint() * &gz * &v)[(0, 0)];
        let mv = (bp.boundary_matrix(&z) * &v)[(0, 0)];
        let exact = (z.gamma / (-2.0 * mu.im) + 1.0) / mv.norm_sqr();
        let r = estimate_probe(&bp, &z, &Forcing::zero(), &CVec::from_element(1, cx(1.0, 0.0)), &ProbeOptions::default()).unwrap();
        prop_assert!((r.ratio - exact).abs() < 1e-8 * exact, "{} vs {}", r.ratio, exact);
    }
}
