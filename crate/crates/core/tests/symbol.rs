use hypstab::models::mhd::{cross, dot, norm3};
use hypstab::models::{euler_state, maxwell_system, mhd_eigenvalues, mhd_system, mhd_system_in_frame, BiaxialCrystal, MhdState, PressureLaw};
use hypstab::spectral::{self, RMat};
use hypstab::symbol::{char_poly, check_friedrichs, check_genuine_coupling, check_hyperbolic, check_noncharacteristic, taylor_localization, ViscousExtension};
use hypstab::{CMat, Complex64, HyperbolicSystem, Poly};
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

fn real_det(m: &RMat) -> f64 {
    m.clone().lu().determinant()
}

/// Roots of `sum c_k t^k` through the companion matrix.
fn roots(c: &[f64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().unwrap().abs() < 1e-14 * c.iter().fold(0.0f64, |m, x| m.max(x.abs())) {
        c.pop();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = CMat::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = Complex64::new(-c[i] / lead, 0.0);
    }
    spectral::eigenvalues(&m).unwrap()
}

#[test]
fn assemble_basics() {
    let sys = mhd_system(&fluid());
    assert_eq!(sys.symbol(&[0.0, 0.0, 0.0]).norm(), 0.0);
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        assert!((sys.symbol(&e) - sys.coeff(j)).norm() < 1e-15);
    }
}

#[test]
fn scalar_char_poly() {
    let sys = HyperbolicSystem::new(vec![RMat::from_element(1, 1, 2.5)], None).unwrap();
    let p = char_poly(&sys).unwrap();
    assert_eq!(p.coeff(&[1, 0]), 1.0);
    assert_eq!(p.coeff(&[0, 1]), 2.5);
    assert_eq!(p.degree(), 1);
}

#[test]
fn normal_form_char_poly() {
    let j = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let ad = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let p = char_poly(&HyperbolicSystem::new(vec![j, ad], None).unwrap()).unwrap();
    // tau^2 - eta^2 - xi^2 in the variables (tau, eta, xi)
    let mut want = Poly::zero(3);
    want.add_term(vec![2, 0, 0], 1.0);
    want.add_term(vec![0, 2, 0], -1.0);
    want.add_term(vec![0, 0, 2], -1.0);
    assert_eq!(p, want);
}

#[test]
fn mhd_char_poly_matches_determinant_and_roots() {
    let st = fluid();
    let sys = mhd_system(&st);
    let p = char_poly(&sys).unwrap();
    assert_eq!(p.degree(), 7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let det = real_det(&sys.full_symbol(x[0], &x[1..]));
        let scale = (x[0].abs() + spectral::spectral_norm(&sys.symbol_c(&x[1..]))).powi(7);
        assert!((p.eval(&x) - det).abs() <= 1e-9 * scale);
    }
    // roots in tau are -lambda for the closed-form speeds
    let w = unit([0.3, 0.4, -0.2]);
    let mut point = vec![0.0];
    point.extend_from_slice(&w);
    let mut r: Vec<f64> = roots(&p.specialize(0, &point)).iter().map(|z| -z.re).collect();
    let mut l = mhd_eigenvalues(&st, &w).to_vec();
    r.sort_by(f64::total_cmp);
    l.sort_by(f64::total_cmp);
    for (a, b) in r.iter().zip(&l) {
        assert!((a - b).abs() < 1e-6, "{r:?} vs {l:?}");
    }
}

#[test]
fn hyperbolicity_checks() {
    assert!(check_hyperbolic(&mhd_system(&fluid()), 200).unwrap().passed);
    assert!(check_hyperbolic(&maxwell_system(&BiaxialCrystal::default()), 200).unwrap().passed);
    let rot = HyperbolicSystem::new(vec![RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])], None).unwrap();
    let r = check_hyperbolic(&rot, 10).unwrap();
    assert!(!r.passed);
    assert!(r.worst_imag > 0.5);
}

#[test]
fn friedrichs_checks() {
    assert!(check_friedrichs(&mhd_system(&fluid())).unwrap().passed);
    let skew = HyperbolicSystem::new(vec![RMat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0])], Some(RMat::identity(2, 2)));
    match skew {
        Ok(s) => assert!(!check_friedrichs(&s).unwrap().passed),
        Err(_) => {}
    }
    let none = HyperbolicSystem::new(vec![RMat::identity(2, 2)], None).unwrap();
    assert!(check_friedrichs(&none).is_err());
}

#[test]
fn transported_symmetrizer_passes() {
    let sys = mhd_system(&fluid());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = RMat::from_fn(7, 7, |i, j| if i == j { 2.0 } else { 0.0 } + rng.gen_range(-0.3..0.3));
    let ti = t.clone().try_inverse().unwrap();
    let coeffs: Vec<RMat> = sys.coeffs().iter().map(|a| &t * a * &ti).collect();
    let s = ti.transpose() * sys.symmetrizer().unwrap() * &ti;
    let s = (&s + s.transpose()) * 0.5;
    let moved = HyperbolicSystem::new(coeffs, Some(s)).unwrap();
    let r = check_friedrichs(&moved).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn noncharacteristic_checks() {
    let st = fluid();
    assert!(check_noncharacteristic(&mhd_system_in_frame(&st, 0.9, [0.0; 2])).passed);
    assert!(!check_noncharacteristic(&mhd_system_in_frame(&st, st.u[2], [0.0; 2])).passed);
    let e = euler_state(1.0, [0.1, 0.2, 0.3], PressureLaw::default());
    assert!(check_noncharacteristic(&mhd_system(&e)).passed);
}

#[test]
fn localization_examples() {
    let j = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let ad = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let wave = HyperbolicSystem::new(vec![j, ad], None).unwrap();
    let l = taylor_localization(&wave, 0.0, &[0.0, 0.0], 1e-9);
    // the origin is a root of every order: the whole polynomial is returned
    if let Ok(l) = l {
        assert_eq!(l.order, 2);
        assert_eq!(l.term, char_poly(&wave).unwrap());
    }
    // constant multiplicity: lambda(xi) = xi_1 + 2 xi_2 double
    let a1 = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0]));
    let a2 = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.0, 0.5]));
    let sys = HyperbolicSystem::new(vec![a1, a2], None).unwrap();
    let l = taylor_localization(&sys, -1.0, &[1.0, 0.0], 1e-9).unwrap();
    assert_eq!(l.order, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ratio = None;
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lin: f64 = x[0] + x[1] + 2.0 * x[2];
        let r = l.term.eval(&x) / (lin * lin);
        let r0 = *ratio.get_or_insert(r);
        assert!((r - r0).abs() < 1e-9 * r0.abs());
    }
    // beta is the third factor at the root: tau - xi_1 = -2
    assert!((ratio.unwrap() + 2.0).abs() < 1e-9);
}

#[test]
fn viscous_coupling() {
    let sys = mhd_system(&fluid());
    let full = check_genuine_coupling(&sys, &ViscousExtension::laplacian(3, RMat::identity(7, 7)), 50).unwrap();
    assert!(full.passed);
    assert!((full.min_eigvec_action - 1.0).abs() < 1e-9);
    let none = check_genuine_coupling(&sys, &ViscousExtension::laplacian(3, RMat::zeros(7, 7)), 50).unwrap();
    assert!(!none.passed);
    let mut fluid_only = RMat::zeros(7, 7);
    for i in 1..4 {
        fluid_only[(i, i)] = 1.0;
    }
    let r = check_genuine_coupling(&sys, &ViscousExtension::laplacian(3, fluid_only), 50).unwrap();
    assert!(r.min_eigvec_action.is_finite() && r.min_cluster_margin.is_finite());
    assert!(r.semidefinite);
}

fn mhd_roots() -> Vec<(HyperbolicSystem, f64, Vec<f64>)> {
    let st = fluid();
    let sys = mhd_system(&st);
    let mut out = Vec::new();
    let w = unit(cross(&st.h, &[0.3, 1.0, 0.2]));
    out.push((sys.clone(), -dot(&st.u, &w), w.to_vec()));
    let w = unit(st.h);
    let a = dot(&w, &st.h) / st.rho.sqrt();
    out.push((sys.clone(), -(dot(&st.u, &w) + a), w.to_vec()));
    out.push((sys, -(dot(&st.u, &w) - a), w.to_vec()));
    out
}

#[test]
fn mhd_localizations_have_expected_order() {
    let orders: Vec<usize> = mhd_roots().iter().map(|(s, t, x)| taylor_localization(s, *t, x, 1e-9).unwrap().order).collect();
    assert_eq!(orders, vec![5, 2, 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assemble_is_linear(x in prop::collection::vec(-2.0f64..2.0, 3), y in prop::collection::vec(-2.0f64..2.0, 3), s in -3.0f64..3.0) {
        let sys = mhd_system(&fluid());
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + b).collect();
        let lhs = sys.symbol(&z);
        let rhs = sys.symbol(&x) * s + sys.symbol(&y);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn localization_is_homogeneous(k in 0usize..3, x in prop::collection::vec(-1.0f64..1.0, 4), s in 0.1f64..5.0) {
        let (sys, t, xi) = &mhd_roots()[k];
        let l = taylor_localization(sys, *t, xi, 1e-9).unwrap();
        for (e, c) in l.term.terms() {
            let deg: u16 = e.iter().sum();
            prop_assert_eq!(deg as usize, l.order, "coefficient {}", c);
        }
        let sx: Vec<f64> = x.iter().map(|v| v * s).collect();
        let a = l.term.eval(&sx);
        let b = s.powi(l.order as i32) * l.term.eval(&x);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn localization_is_hyperbolic_in_time(k in 0usize..3, x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let (sys, t, xi) = &mhd_roots()[k];
        let l = taylor_localization(sys, *t, xi, 1e-9).unwrap();
        let mut point = vec![0.0];
        point.extend_from_slice(&x);
        let r = roots(&l.term.specialize(0, &point));
        let scale = 1.0 + r.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for z in r {
            prop_assert!(z.im.abs() < 1e-6 * scale, "{z}");
        }
    }
}
