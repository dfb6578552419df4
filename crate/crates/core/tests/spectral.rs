use hypstab::spectral::{
    cluster_eigenvalues, eigenvalues, half_plane_subspace, nullspace, subspace_determinant, BlockReducer, SpectralDecomposition,
    DEFAULT_CLUSTER_TOL,
};
use hypstab::{CMat, Complex64, Error, HalfPlane};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(v: &[Complex64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { c(0.0, 0.0) })
}

fn cmat(n: usize, m: usize, v: &[f64]) -> CMat {
    CMat::from_fn(n, m, |i, j| c(v[2 * (i * m + j)], v[2 * (i * m + j) + 1]))
}

fn unitary(n: usize, v: &[f64]) -> CMat {
    cmat(n, n, v).qr().q()
}

fn gram_defect(b: &CMat) -> f64 {
    (b.adjoint() * b - CMat::identity(b.ncols(), b.ncols())).norm()
}

#[test]
fn diagonal_clusters() {
    let cl = cluster_eigenvalues(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], 1e-8);
    assert_eq!(cl.len(), 2);
    assert_eq!((cl[0].center, cl[0].multiplicity()), (c(1.0, 0.0), 2));
    assert_eq!(cl[1].multiplicity(), 1);
    let id = SpectralDecomposition::new(&CMat::identity(3, 3), 1e-7).unwrap();
    assert_eq!(id.clusters.len(), 1);
    assert_eq!(id.clusters[0].multiplicity(), 3);
}

#[test]
fn jordan_block_is_one_cluster() {
    let mut j = CMat::zeros(2, 2);
    j[(0, 1)] = c(1.0, 0.0);
    let d = SpectralDecomposition::new(&j, 1e-7).unwrap();
    assert_eq!(d.clusters.len(), 1);
    assert!((&d.projectors[0] - CMat::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn projector_of_diagonal() {
    let m = diag(&[c(0.0, -1.0), c(0.0, 1.0)]);
    let d = SpectralDecomposition::new(&m, 1e-7).unwrap();
    let k = d.clusters.iter().position(|cl| cl.center.im < 0.0).unwrap();
    assert!((&d.projectors[k] - diag(&[c(1.0, 0.0), c(0.0, 0.0)])).norm() < 1e-14);
}

#[test]
fn hermitian_projectors_are_hermitian() {
    let m = CMat::from_row_slice(3, 3, &[c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(1.0, -1.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(-1.0, 0.0)]);
    let d = SpectralDecomposition::new(&m, 1e-7).unwrap();
    for p in &d.projectors {
        assert!((p - p.adjoint()).norm() < 1e-12);
    }
}

#[test]
fn half_plane_examples() {
    let m = diag(&[c(0.0, -1.0), c(0.0, 1.0)]);
    let e = half_plane_subspace(&m, HalfPlane::ImNegative, 1e-10).unwrap();
    assert_eq!(e.dim(), 1);
    assert!((e.basis[(0, 0)].norm() - 1.0).abs() < 1e-14);
    let up = diag(&[c(1.0, 1.0), c(-2.0, 0.5)]);
    assert_eq!(half_plane_subspace(&up, HalfPlane::ImNegative, 1e-10).unwrap().dim(), 0);
    let on = diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
    assert!(matches!(half_plane_subspace(&on, HalfPlane::ImNegative, 1e-10), Err(Error::OnBoundary { .. })));
}

#[test]
fn subspace_determinant_examples() {
    let e1 = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
    let e2 = CMat::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let diag_dir = CMat::from_column_slice(2, 1, &[c(s, 0.0), c(s, 0.0)]);
    assert!((subspace_determinant(&[&e1, &e2]).unwrap() - 1.0).abs() < 1e-15);
    assert!(subspace_determinant(&[&e1, &e1]).unwrap() < 1e-15);
    assert!((subspace_determinant(&[&e1, &diag_dir]).unwrap() - s).abs() < 1e-15);
    assert!(matches!(subspace_determinant(&[&e1]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn block_diagonal_input_reduces_trivially() {
    let m = diag(&[c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)]);
    let r = BlockReducer::new(&m, DEFAULT_CLUSTER_TOL).unwrap();
    let red = r.reduce(&m).unwrap();
    assert_eq!(red.blocks.len(), 3);
    for (v, w) in red.v.iter().zip(&red.w) {
        assert!(((w * v)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        // a unit coordinate vector up to phase
        assert!((v.iter().map(|z| z.norm()).fold(0.0, f64::max) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn collision_is_reported() {
    let base = diag(&[c(1.0, 0.0), c(1.1, 0.0)]);
    let r = BlockReducer::new(&base, DEFAULT_CLUSTER_TOL).unwrap();
    let far = diag(&[c(1.2, 0.0), c(1.3, 0.0)]);
    assert!(matches!(r.reduce(&far), Err(Error::ClusterCollision(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projectors_idempotent_and_commuting(v in prop::collection::vec(-1.0f64..1.0, 50), shift in prop::collection::vec(-2.0f64..2.0, 5)) {
        // separated spectrum: a small perturbation of a well spaced diagonal
        let mut m = cmat(5, 5, &v) * c(0.05, 0.0);
        for i in 0..5 {
            m[(i, i)] += c(3.0 * i as f64 + 0.1 * shift[i], 0.0);
        }
        let d = SpectralDecomposition::new(&m, 1e-7).unwrap();
        let total: usize = d.clusters.iter().map(|c| c.multiplicity()).sum();
        prop_assert_eq!(total, 5);
        for p in &d.projectors {
            prop_assert!((p * p - p).norm() < 1e-10);
            prop_assert!((p * &m - &m * p).norm() < 1e-10);
        }
        for b in &d.bases {
            prop_assert!(gram_defect(b) < 1e-12);
        }
    }

    #[test]
    fn half_plane_basis_is_orthonormal_and_invariant(v in prop::collection::vec(-1.0f64..1.0, 72)) {
        let m = cmat(6, 6, &v);
        if let Ok(e) = half_plane_subspace(&m, HalfPlane::ImNegative, 1e-6) {
            prop_assert!(gram_defect(&e.basis) < 1e-12);
            let p = &e.basis;
            let resid = (CMat::identity(6, 6) - p * p.adjoint()) * &m * p;
            prop_assert!(resid.norm() < 1e-9);
            let count = eigenvalues(&m).unwrap().iter().filter(|z| z.im < 0.0).count();
            prop_assert_eq!(e.dim(), count);
        }
    }

    #[test]
    fn determinant_symmetric_and_rebasing_invariant(
        v in prop::collection::vec(-1.0f64..1.0, 32),
        u1 in prop::collection::vec(-1.0f64..1.0, 8),
        u2 in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let m = cmat(4, 4, &v);
        let a = nullspace(&m.columns(0, 2).adjoint(), 1e-12);
        let b = m.columns(2, 2).into_owned().qr().q();
        let d = subspace_determinant(&[&a, &b]).unwrap();
        prop_assert!((d - subspace_determinant(&[&b, &a]).unwrap()).abs() < 1e-12);
        let ra = &a * unitary(2, &u1);
        let rb = &b * unitary(2, &u2);
        prop_assert!((d - subspace_determinant(&[&ra, &rb]).unwrap()).abs() < 1e-12);
        prop_assert!(d <= 1.0 + 1e-12);
    }
}
