use hypstab::boundary::{
    check_tangent_relation, limit_direction_spread, limit_negative_space, negative_space, BoundaryBlock, BoundarySymbol, Frequency, LimitOptions,
};
use hypstab::classify::{classify_glancing, ClassifyOptions, Glancing};
use hypstab::models::maxwell::DEFAULT_FRAME_SPEED;
use hypstab::models::mhd::{cross, dot, norm3};
use hypstab::models::{euler_state, maxwell_double_roots, maxwell_system_in_frame, mhd_system, mhd_system_in_frame, BiaxialCrystal, MhdState, PressureLaw};
use hypstab::models::shock::reference_euler_shock;
use hypstab::spectral::{self, RMat};
use hypstab::symbol::char_poly;
use hypstab::{CMat, Complex64, HyperbolicSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fluid() -> MhdState {
    MhdState::new(1.2, [0.1, -0.2, 0.3], [0.6, -0.3, 0.8])
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn diag(v: &[f64]) -> RMat {
    RMat::from_diagonal(&nalgebra::DVector::from_vec(v.to_vec()))
}

fn models() -> Vec<HyperbolicSystem> {
    vec![
        mhd_system(&fluid()),
        mhd_system(&euler_state(1.0, [0.1, 0.2, 0.3], PressureLaw::default())),
        maxwell_system_in_frame(&BiaxialCrystal::default(), DEFAULT_FRAME_SPEED),
    ]
}

#[test]
fn scalar_symbol() {
    let sys = HyperbolicSystem::new(vec![RMat::from_element(1, 1, 2.0)], None).unwrap();
    let sym = BoundarySymbol::new(&sys).unwrap();
    let g = sym.g(&Frequency::new(0.6, vec![], 0.8)).unwrap();
    assert!((g[(0, 0)] - Complex64::new(0.3, -0.4)).norm() < 1e-15);
}

#[test]
fn no_real_eigenvalues_off_the_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sys in models() {
        let sym = BoundarySymbol::new(&sys).unwrap();
        for _ in 0..50 {
            let z = Frequency::new(rng.gen_range(-1.0..1.0), vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(1e-3..1.0));
            let eigs = spectral::eigenvalues(&sym.g(&z).unwrap()).unwrap();
            assert!(eigs.iter().all(|e| e.im.abs() > 1e-9));
        }
    }
}

#[test]
fn shock_sides_split_their_spectra() {
    let sp = reference_euler_shock().unwrap();
    for plus in [false, true] {
        let sym = BoundarySymbol::new(&sp.side_system(plus)).unwrap();
        let z = Frequency::new(0.3, vec![0.2, -0.1], 0.5);
        let e = negative_space(&sym, &z, 1e-12).unwrap();
        assert_eq!(e.dim(), sym.incoming());
        assert_eq!(sym.dim(), 7);
    }
    // 1 incoming on the supersonic side, 6 on the subsonic side or the reverse
    let (a, b) = sp.lax_count();
    assert_eq!(a + b, 6);
}

#[test]
fn determinant_factorization() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for sys in models() {
        let sym = BoundarySymbol::new(&sys).unwrap();
        let poly = char_poly(&sys).unwrap();
        let det_ad = sys.boundary_matrix().clone().lu().determinant();
        let n = sys.dim();
        for _ in 0..200 {
            let (t, e1, e2, x, g) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
            let gm = sym.g(&Frequency::new(t, vec![e1, e2], g)).unwrap();
            let lhs = (gm + CMat::identity(n, n) * Complex64::new(x, 0.0)).determinant() * det_ad;
            let c = |v: f64| Complex64::new(v, 0.0);
            let rhs = poly.eval_complex(&[Complex64::new(t, -g), c(e1), c(e2), c(x)]);
            let scale = (1.0 + spectral::spectral_norm(&sys.symbol_c(&[e1, e2, x]))).powi(n as i32);
            assert!((lhs - rhs).norm() < 1e-8 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn negative_space_examples() {
    let sys = HyperbolicSystem::new(vec![diag(&[1.0, -1.0])], None).unwrap();
    let sym = BoundarySymbol::new(&sys).unwrap();
    // G = diag(-i, i)
    let e = negative_space(&sym, &Frequency::new(0.0, vec![], 1.0), 1e-12).unwrap();
    assert_eq!(e.dim(), 1);
    assert!((e.basis[(0, 0)].norm() - 1.0).abs() < 1e-14);
    let inc = BoundarySymbol::new(&HyperbolicSystem::new(vec![diag(&[1.0, 2.0])], None).unwrap()).unwrap();
    assert_eq!(negative_space(&inc, &Frequency::new(0.3, vec![], 0.5), 1e-12).unwrap().dim(), 2);
    let out = BoundarySymbol::new(&HyperbolicSystem::new(vec![diag(&[-1.0, -2.0])], None).unwrap()).unwrap();
    assert_eq!(negative_space(&out, &Frequency::new(0.3, vec![], 0.5), 1e-12).unwrap().dim(), 0);
}

#[test]
fn limits_converge_at_regular_points() {
    let st = fluid();
    let sys = mhd_system(&st);
    let sym = BoundarySymbol::new(&sys).unwrap();
    // xi . H = 0: geometrically regular
    let w = unit(cross(&st.h, &[0.3, 1.0, 0.2]));
    let z = Frequency::new(-dot(&st.u, &w), vec![w[0], w[1]], 0.0);
    assert!(limit_negative_space(&sym, &z, &LimitOptions::default()).unwrap().converged);
    // xi x H = 0: totally nonglancing
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    for s in [1.0, -1.0] {
        let z = Frequency::new(-(dot(&st.u, &w) + s * a), vec![w[0], w[1]], 0.0);
        let r = limit_negative_space(&sym, &z, &LimitOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.basis.dim(), sym.incoming());
    }
}

#[test]
fn mixed_maxwell_limits_depend_on_the_approach() {
    let crystal = BiaxialCrystal::default();
    let sigma = 1.2;
    let sys = maxwell_system_in_frame(&crystal, sigma);
    let sym = BoundarySymbol::new(&sys).unwrap();
    let dirs = vec![
        Frequency::new(0.0, vec![0.0, 0.0], 1.0),
        Frequency::new(0.0, vec![1.0, 0.0], 1.0),
        Frequency::new(0.0, vec![0.0, 1.0], 1.0),
        Frequency::new(0.0, vec![-1.0, 0.0], 1.0),
    ];
    let (mut mixed, mut other) = (0, 0);
    for r in maxwell_double_roots(&crystal).unwrap() {
        let tau = r.tau + sigma * r.xi[2];
        let class = classify_glancing(&sys, tau, &r.xi, &ClassifyOptions::default()).unwrap().class;
        let z = Frequency::new(tau, vec![r.xi[0], r.xi[1]], 0.0);
        let (spread, reps) = limit_direction_spread(&sym, &z, &dirs, &LimitOptions::default()).unwrap();
        assert!(reps.iter().all(|r| r.converged));
        if class == Glancing::Mixed {
            mixed += 1;
            assert!(spread > 1e-3, "spread {spread:.2e}");
        } else {
            other += 1;
            assert!(spread < 1e-8, "spread {spread:.2e}");
        }
    }
    assert!(mixed > 0 && other > 0);
}

#[test]
fn blocks_have_the_expected_size() {
    let st = fluid();
    let sys = mhd_system(&st);
    let sym = BoundarySymbol::new(&sys).unwrap();
    // simple root
    let w = unit([0.3, 0.5, 0.6]);
    let l = hypstab::models::mhd_eigenvalues(&st, &w);
    let z = Frequency::new(-l[6], vec![w[0], w[1]], 0.0);
    let b = BoundaryBlock::new(&sym, &z, Complex64::new(-w[2], 0.0)).unwrap();
    assert_eq!(b.multiplicity(), 1);
    // nonglancing double root: -xi_d semi-simple of multiplicity 2
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    let z = Frequency::new(-(dot(&st.u, &w) + a), vec![w[0], w[1]], 0.0);
    let b = BoundaryBlock::new(&sym, &z, Complex64::new(-w[2], 0.0)).unwrap();
    assert_eq!(b.multiplicity(), 2);
    let s = b.at(&z).unwrap();
    let shifted = &s.block + CMat::identity(2, 2) * Complex64::new(w[2], 0.0);
    assert!(shifted.norm() < 1e-8);
    assert!((&s.w * &s.v - CMat::identity(2, 2)).norm() < 1e-9);
    // glancing wave root
    let wave = HyperbolicSystem::new(vec![RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), diag(&[1.0, -1.0])], None).unwrap();
    let ws = BoundarySymbol::new(&wave).unwrap();
    let h = 0.5f64.sqrt();
    let b = BoundaryBlock::new(&ws, &Frequency::new(h, vec![h], 0.0), Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(b.multiplicity(), 2);
}

#[test]
fn block_polynomials_are_real_at_gamma_zero() {
    let st = fluid();
    let sym = BoundarySymbol::new(&mhd_system(&st)).unwrap();
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    let base = Frequency::new(-(dot(&st.u, &w) - a), vec![w[0], w[1]], 0.0);
    let b = BoundaryBlock::new(&sym, &base, Complex64::new(-w[2], 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let z = Frequency::new(base.tau + rng.gen_range(-1e-2..1e-2), vec![w[0] + rng.gen_range(-1e-2..1e-2), w[1]], 0.0);
        let blk = b.at(&z).unwrap().block;
        let tr = blk[(0, 0)] + blk[(1, 1)];
        let det = blk.determinant();
        assert!(tr.im.abs() < 1e-9 && det.im.abs() < 1e-9, "{tr} {det}");
    }
}

#[test]
fn tangent_relation_residuals() {
    // constant multiplicity
    let sys = HyperbolicSystem::new(vec![diag(&[1.0, 1.0, -1.0]), diag(&[2.0, 2.0, 1.5])], Some(RMat::identity(3, 3))).unwrap();
    let sym = BoundarySymbol::new(&sys).unwrap();
    // tau + xi_1 + 2 xi_2 = 0 at (tau, eta) = (-1, 1), xi_2 = 0
    let r = check_tangent_relation(&sym, &Frequency::new(-1.0, vec![1.0], 0.0), 0.0).unwrap();
    assert_eq!(r.multiplicity, 2);
    assert!(r.residual < 1e-6, "{r:?}");

    let st = fluid();
    let sym = BoundarySymbol::new(&mhd_system(&st)).unwrap();
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    for s in [1.0, -1.0] {
        let z = Frequency::new(-(dot(&st.u, &w) + s * a), vec![w[0], w[1]], 0.0);
        let r = check_tangent_relation(&sym, &z, w[2]).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }
    let e = euler_state(1.0, [0.1, 0.2, 0.3], PressureLaw::default());
    let sym = BoundarySymbol::new(&mhd_system(&e)).unwrap();
    let w = unit([0.3, -0.5, 0.7]);
    let r = check_tangent_relation(&sym, &Frequency::new(-dot(&e.u, &w), vec![w[0], w[1]], 0.0), w[2]).unwrap();
    assert_eq!(r.multiplicity, 5);
    assert!(r.residual < 1e-6, "{r:?}");
}

fn model_strategy() -> impl Strategy<Value = (usize, f64, f64, f64, f64)> {
    (0usize..3, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 1e-3f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn negative_space_dimension_counts_incoming((k, t, e1, e2, g) in model_strategy(), sigma in -0.2f64..0.2) {
        let sys = match k {
            0 => mhd_system_in_frame(&fluid(), sigma, [0.0; 2]),
            1 => mhd_system(&euler_state(1.0, [0.1, 0.2, 0.3 + sigma], PressureLaw::default())),
            _ => maxwell_system_in_frame(&BiaxialCrystal::default(), DEFAULT_FRAME_SPEED + sigma),
        };
        let sym = BoundarySymbol::new(&sys).unwrap();
        let positive = sys.boundary_matrix().complex_eigenvalues().iter().filter(|z| z.re > 0.0).count();
        let e = negative_space(&sym, &Frequency::new(t, vec![e1, e2], g), 1e-14).unwrap();
        prop_assert_eq!(e.dim(), positive);
    }

    #[test]
    fn negative_space_is_homogeneous((k, t, e1, e2, g) in model_strategy(), s in 0.01f64..100.0) {
        let sys = &models()[k];
        let sym = BoundarySymbol::new(sys).unwrap();
        let z = Frequency::new(t, vec![e1, e2], g);
        let a = negative_space(&sym, &z, 1e-14).unwrap();
        let b = negative_space(&sym, &z.scaled(s), 1e-14).unwrap();
        prop_assert!(a.distance(&b) < 1e-9);
    }
}
