use hypstab::boundary::{BoundarySymbol, Frequency};
use hypstab::classify::{classify_glancing, ClassifyOptions, Glancing};
use hypstab::lopatinski::BoundaryProblem;
use hypstab::models::mhd::{dot, norm3};
use hypstab::models::{euler_state, maxwell_double_roots, maxwell_system_in_frame, mhd_system, BiaxialCrystal, MhdState, PressureLaw};
use hypstab::normal_form::{normal_form_system, two_by_two_problem};
use hypstab::spectral;
use hypstab::symmetrizer::{
    negative_compression, sign_check, stable_projector, totally_nonglancing_symmetrizer, upper_samples, verify_k_family, verify_kreiss,
    verify_symmetrizer, Orientation, SymmetrizerCandidate,
};
use hypstab::{CMat, Complex64, Error, Result};
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cdiag(v: &[Complex64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { c(0.0) })
}

#[test]
fn friedrichs_candidate_passes() {
    for a in [0.5, 1.0, 2.5] {
        let sym = BoundarySymbol::new(&normal_form_system(a).unwrap()).unwrap();
        let cand = SymmetrizerCandidate::friedrichs(&sym).unwrap();
        let g = |z: &Frequency| sym.g(z);
        let r = verify_symmetrizer(&cand, &g, &upper_samples(1, 50)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_hermitian_defect < 1e-15);
        assert!((r.max_norm - a.max(1.0 / a)).abs() < 1e-12);
    }
}

#[test]
fn zero_and_wrong_sign_candidates_fail() {
    let sym = BoundarySymbol::new(&normal_form_system(1.0).unwrap()).unwrap();
    let g = |z: &Frequency| sym.g(z);
    let samples = upper_samples(1, 20);
    let zero = SymmetrizerCandidate::constant(CMat::zeros(2, 2), 0.5, 1.0);
    assert!(!verify_symmetrizer(&zero, &g, &samples).unwrap().passed);
    // G = i Id: Im(-G) = -Id
    let gi = |_: &Frequency| -> Result<CMat> { Ok(cdiag(&[Complex64::i(), Complex64::i()])) };
    let neg = SymmetrizerCandidate::constant(-CMat::identity(2, 2), 0.1, 1.0);
    let r = verify_symmetrizer(&neg, &gi, &samples).unwrap();
    assert_eq!(r.failing.len(), samples.len());
    // norm bound
    let big = SymmetrizerCandidate::friedrichs(&sym).unwrap();
    let tight = SymmetrizerCandidate { big_c: 0.5, ..big };
    assert!(!verify_symmetrizer(&tight, &g, &samples).unwrap().passed);
}

#[test]
fn kreiss_forms_track_the_boundary_condition() {
    let samples = upper_samples(1, 30);
    for (cc, ok) in [(0.0, true), (0.5, true), (0.9, true), (1.5, false)] {
        let bp = two_by_two_problem(1.0, cc).unwrap();
        let cand = SymmetrizerCandidate { c: 0.02, big_c: 50.0, ..SymmetrizerCandidate::friedrichs(bp.symbol()).unwrap() };
        let r = verify_kreiss(&cand, &bp, &samples).unwrap();
        assert_eq!(r.restricted_ok, ok, "c = {cc}: {r:?}");
        assert!(r.consistent);
        // restricted margin on ker M = span(c, 1): (1 - c^2) / (1 + c^2) - c
        let exact = (1.0 - cc * cc) / (1.0 + cc * cc) - 0.02;
        assert!((r.restricted_margin - exact).abs() < 1e-12);
        if ok {
            assert!(r.converted_margin >= -1e-10);
        }
    }
}

#[test]
fn stable_projector_of_diagonal() {
    let g = cdiag(&[Complex64::new(1.0, -1.0), Complex64::new(0.0, 2.0)]);
    let p = stable_projector(&g).unwrap();
    assert!((p - cdiag(&[c(1.0), c(0.0)])).norm() < 1e-14);
}

#[test]
fn elliptic_family_grows_linearly() {
    let g = |_: &Frequency| -> Result<CMat> { Ok(cdiag(&[Complex64::new(0.3, 1.0), Complex64::new(-0.2, 2.0)])) };
    let sigma = cdiag(&[c(2.0), c(3.0)]);
    let fam = |k: f64, _: &Frequency| &sigma * c(k);
    let kappas = [1.0, 2.0, 4.0, 8.0];
    let r = verify_k_family(&fam, &g, &kappas, &upper_samples(1, 5), 10.0).unwrap();
    for (k, m) in kappas.iter().zip(&r.m) {
        assert!((m - 2.0 * k).abs() < 1e-9, "{:?}", r.m);
    }
    assert!(r.passed);
}

#[test]
fn constant_mixed_family_is_bounded() {
    let g = |_: &Frequency| -> Result<CMat> { Ok(cdiag(&[Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)])) };
    let sigma = cdiag(&[c(-1.0), c(1.0)]);
    let fam = |_: f64, _: &Frequency| sigma.clone();
    let r = verify_k_family(&fam, &g, &[1.0, 10.0, 100.0], &upper_samples(1, 5), 5.0).unwrap();
    assert!(!r.increasing);
    assert!(!r.passed);
    assert!(r.m.iter().all(|m| (m - 1.0).abs() < 1e-9), "{:?}", r.m);
}

#[test]
fn sign_lemma_on_decaying_space() {
    let sym = BoundarySymbol::new(&normal_form_system(1.4).unwrap()).unwrap();
    let g = |z: &Frequency| sym.g(z);
    let samples = upper_samples(1, 40);
    let r = sign_check(&SymmetrizerCandidate::friedrichs(&sym).unwrap(), &g, &samples).unwrap();
    assert!(r.passed && r.max_eig < 0.0);
    let id = SymmetrizerCandidate::constant(CMat::identity(2, 2), 1.0, 1.0);
    assert!(!sign_check(&id, &g, &samples).unwrap().passed);
    let gz = Frequency::new(1.0, vec![0.0], 0.0);
    assert!(matches!(sign_check(&id, &g, &[gz]), Err(Error::InvalidInput(_))));
    // -S A_d = diag(-a, 1/a) compressed to E_-
    let sigma = cdiag(&[c(-1.4), c(1.0 / 1.4)]);
    for z in &samples {
        assert!(negative_compression(&sym, &sigma, z).unwrap() < 0.0);
    }
}

#[test]
fn block_symmetrizers_for_fluids() {
    let st = MhdState::new(1.2, [0.1, -0.2, 0.3], [0.6, -0.3, 0.8]);
    let euler = euler_state(1.0, [0.1, 0.2, 0.3], PressureLaw::default());
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    let we = unit([0.3, -0.5, 0.7]);
    let roots = [
        (mhd_system(&st), -(dot(&st.u, &w) + a), w, 2),
        (mhd_system(&st), -(dot(&st.u, &w) - a), w, 2),
        (mhd_system(&euler), -dot(&euler.u, &we), we, 5),
    ];
    for (sys, tau, w, mult) in &roots {
        let sym = BoundarySymbol::new(sys).unwrap();
        let base = Frequency::new(*tau, vec![w[0], w[1]], 0.0);
        let b = totally_nonglancing_symmetrizer(&sym, &base, w[2]).unwrap();
        assert_eq!(b.block.multiplicity(), *mult);
        let expected = match classify_glancing(sys, *tau, w, &ClassifyOptions::default()).unwrap().class {
            Glancing::TotallyIncoming => Orientation::Incoming,
            Glancing::TotallyOutgoing => Orientation::Outgoing,
            other => panic!("{other:?}"),
        };
        assert_eq!(b.orientation, expected);
        // base value -A_bar_d, incoming speeds positive
        let mut ev = spectral::hermitian_eigenvalues(&b.base_value);
        let mut neg: Vec<f64> = b.boundary_speeds.iter().map(|s| -s).collect();
        ev.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        assert!(ev.iter().zip(&neg).all(|(x, y)| (x - y).abs() < 1e-9), "{ev:?} {neg:?}");
        let definite = match b.orientation {
            Orientation::Incoming => ev.iter().all(|&l| l < 0.0),
            Orientation::Outgoing => ev.iter().all(|&l| l > 0.0),
        };
        assert!(definite);
        let near = Frequency::new(tau + 1e-3, vec![w[0] - 1e-3, w[1] + 5e-4], 2e-3);
        assert!(b.identity_defect(&near).unwrap() < 1e-9);
        assert!(b.coercivity(&near).unwrap() > 0.0);
        let f1 = b.family(1.0, &near).unwrap();
        let f3 = b.family(3.0, &near).unwrap();
        match b.orientation {
            Orientation::Incoming => assert!((&f3 - &f1).norm() < 1e-14),
            Orientation::Outgoing => assert!((&f3 - &f1 * c(3.0)).norm() < 1e-12),
        }
    }
}

#[test]
fn mixed_block_is_not_totally_nonglancing() {
    let crystal = BiaxialCrystal::default();
    let sigma = 1.2;
    let sys = maxwell_system_in_frame(&crystal, sigma);
    let sym = BoundarySymbol::new(&sys).unwrap();
    let mut mixed = 0;
    for r in maxwell_double_roots(&crystal).unwrap() {
        let tau = r.tau + sigma * r.xi[2];
        if classify_glancing(&sys, tau, &r.xi, &ClassifyOptions::default()).unwrap().class != Glancing::Mixed {
            continue;
        }
        mixed += 1;
        let base = Frequency::new(tau, vec![r.xi[0], r.xi[1]], 0.0);
        assert!(matches!(totally_nonglancing_symmetrizer(&sym, &base, r.xi[2]), Err(Error::NotApplicable(_))));
    }
    assert!(mixed > 0);
    let base = Frequency::new(0.3, vec![0.0, 0.0], 0.2);
    assert!(totally_nonglancing_symmetrizer(&sym, &base, 1.0).is_err());
}

#[test]
fn kreiss_needs_matching_shapes() {
    let bp = two_by_two_problem(1.0, 0.3).unwrap();
    assert!(BoundaryProblem::constant(bp.system(), CMat::zeros(1, 3)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn friedrichs_identity_holds_pointwise(a in 0.2f64..4.0, t in -1.0f64..1.0, e in -1.0f64..1.0, g in 0.01f64..1.0) {
        let sym = BoundarySymbol::new(&normal_form_system(a).unwrap()).unwrap();
        let z = Frequency::new(t, vec![e], g);
        let sigma = cdiag(&[c(-a), c(1.0 / a)]);
        let im = spectral::imaginary_part(&(&sigma * sym.g(&z).unwrap()));
        prop_assert!((im - CMat::identity(2, 2) * c(g)).norm() < 1e-12);
    }

    #[test]
    fn projector_is_idempotent(a in 0.2f64..4.0, t in -1.0f64..1.0, e in -1.0f64..1.0, g in 0.01f64..1.0) {
        let sym = BoundarySymbol::new(&normal_form_system(a).unwrap()).unwrap();
        let gz = sym.g(&Frequency::new(t, vec![e], g)).unwrap();
        let p = stable_projector(&gz).unwrap();
        prop_assert!((&p * &p - &p).norm() < 1e-9 * p.norm().max(1.0));
        prop_assert!((&p * &gz - &gz * &p).norm() < 1e-9 * gz.norm() * p.norm().max(1.0));
    }
}
