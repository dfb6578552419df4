//! 2x2 systems `tau + xi A + eta B` with `A` of mixed sign: reduction to
//! `tau + xi diag(a, -1/a) + eta [[0,1],[1,0]]`, the `a|c| < 1` criterion and
//! the base-point symmetrizer of a linearly splitting 2x2 block.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::Frequency;
use crate::error::{Error, Result};
use crate::lopatinski::BoundaryProblem;
use crate::spectral::{self, CMat, RMat};
use crate::symbol::HyperbolicSystem;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Reduction data; `A = a1/a * T diag(a, -1/a) T^-1`,
/// `B = T (alpha Id + beta D + b [[0,1],[1,0]]) T^-1` with `D = diag(a1, a2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoByTwoNormalForm {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    /// Shear `tau' = tau + alpha eta`.
    pub alpha: f64,
    /// Shear `xi' = xi + beta eta`.
    pub beta: f64,
    /// `eta'' = b eta`.
    pub b: f64,
    /// `xi'' = (a1/a) xi'`.
    pub xi_scale: f64,
    /// Change of basis, row-major real and imaginary parts.
    pub basis_re: [f64; 4],
    pub basis_im: [f64; 4],
}

fn eig2(m: &CMat) -> (Complex64, Complex64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

fn eigvec2(m: &CMat, l: Complex64) -> [Complex64; 2] {
    let u = [m[(0, 1)], l - m[(0, 0)]];
    let v = [l - m[(1, 1)], m[(1, 0)]];
    let nu = u[0].norm_sqr() + u[1].norm_sqr();
    let nv = v[0].norm_sqr() + v[1].norm_sqr();
    let w = if nu >= nv { u } else { v };
    let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    if n == 0.0 {
        // already diagonal with this eigenvalue
        if (m[(0, 0)] - l).norm() <= (m[(1, 1)] - l).norm() { [ONE, ZERO] } else { [ZERO, ONE] }
    } else {
        [w[0] / n, w[1] / n]
    }
}

impl TwoByTwoNormalForm {
    pub fn basis(&self) -> CMat {
        let r = &self.basis_re;
        let i = &self.basis_im;
        CMat::from_row_slice(2, 2, &[
            Complex64::new(r[0], i[0]),
            Complex64::new(r[1], i[1]),
            Complex64::new(r[2], i[2]),
            Complex64::new(r[3], i[3]),
        ])
    }

    /// `(A, B)` rebuilt from the recorded transforms.
    pub fn reconstruct(&self) -> (CMat, CMat) {
        let t = self.basis();
        let ti = spectral::inverse(&t).expect("recorded basis is invertible");
        let d = CMat::from_row_slice(2, 2, &[c(self.a1), ZERO, ZERO, c(self.a2)]);
        let j = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let a = &t * &d * &ti;
        let b = &t * (CMat::identity(2, 2) * c(self.alpha) + &d * c(self.beta) + j * c(self.b)) * &ti;
        (a, b)
    }

    /// Map `(tau, xi, eta)` to normal-form frequencies.
    pub fn frequencies(&self, tau: f64, xi: f64, eta: f64) -> (f64, f64, f64) {
        let t1 = tau + self.alpha * eta;
        let x1 = xi + self.beta * eta;
        (t1, self.xi_scale * x1, self.b * eta)
    }
}

/// Reduce a complex pair `(A, B)`.
pub fn two_by_two_normal_form_c(a: &CMat, b: &CMat) -> Result<TwoByTwoNormalForm> {
    if a.shape() != (2, 2) || b.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, found: a.nrows() });
    }
    let scale = a.norm().max(b.norm()).max(1e-300);
    let (l1, l2) = eig2(a);
    if l1.im.abs() > 1e-9 * scale || l2.im.abs() > 1e-9 * scale {
        return Err(Error::NotStrictlyHyperbolic);
    }
    let (mut a1, mut a2) = (l1.re, l2.re);
    if a1 * a2 >= 0.0 {
        return Err(Error::NotMixedSign);
    }
    if a1 < 0.0 {
        std::mem::swap(&mut a1, &mut a2);
    }
    let v1 = eigvec2(a, c(a1));
    let v2 = eigvec2(a, c(a2));
    let p = CMat::from_row_slice(2, 2, &[v1[0], v2[0], v1[1], v2[1]]);
    let pi = spectral::inverse(&p)?;
    let bh = &pi * b * &p;
    // shear removing the diagonal of B
    let beta_c = (bh[(0, 0)] - bh[(1, 1)]) / (a1 - a2);
    let alpha_c = bh[(0, 0)] - beta_c * a1;
    if beta_c.im.abs() > 1e-9 * scale || alpha_c.im.abs() > 1e-9 * scale {
        return Err(Error::NotStrictlyHyperbolic);
    }
    let (bb, cc) = (bh[(0, 1)], bh[(1, 0)]);
    let bc = bb * cc;
    if bc.im.abs() > 1e-9 * scale * scale || bc.re <= 0.0 {
        return Err(Error::NotStrictlyHyperbolic);
    }
    // diag(1, s) makes the off-diagonal entries equal
    let s = (cc / bb).sqrt();
    let btil = bb * s;
    let (t, b_real) = if btil.re >= 0.0 { (s, btil.re) } else { (-s, -btil.re) };
    let ds = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, t]);
    let basis = &p * ds;
    let a_nf = (-a1 / a2).sqrt();
    let nf = TwoByTwoNormalForm {
        a: a_nf,
        a1,
        a2,
        alpha: alpha_c.re,
        beta: beta_c.re,
        b: b_real,
        xi_scale: a1 / a_nf,
        basis_re: [basis[(0, 0)].re, basis[(0, 1)].re, basis[(1, 0)].re, basis[(1, 1)].re],
        basis_im: [basis[(0, 0)].im, basis[(0, 1)].im, basis[(1, 0)].im, basis[(1, 1)].im],
    };
    let (ra, rb) = nf.reconstruct();
    let err = (ra - a).norm().max((rb - b).norm()) / scale;
    if err > 1e-10 {
        return Err(Error::InternalInconsistency(format!("normal form reconstruction error {err:.2e}")));
    }
    Ok(nf)
}

pub fn two_by_two_normal_form(a: &RMat, b: &RMat) -> Result<TwoByTwoNormalForm> {
    two_by_two_normal_form_c(&spectral::to_complex(a), &spectral::to_complex(b))
}

/// Lopatinski condition for `M u = u_1 - c u_2` in normal-form coordinates.
pub fn two_by_two_lopatinski(nf: &TwoByTwoNormalForm, c_bc: Complex64) -> bool {
    nf.a * c_bc.norm() < 1.0
}

/// Membership in the union of the stable lines, `|u_2| <= a |u_1|`.
pub fn in_stable_cone(a: f64, u: &[Complex64; 2]) -> bool {
    u[1].norm() <= a * u[0].norm()
}

/// `tau + xi diag(a, -1/a) + eta [[0,1],[1,0]]` with `x` the boundary coordinate.
pub fn normal_form_system(a: f64) -> Result<HyperbolicSystem> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput("normal form parameter must be positive".into()));
    }
    let b = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let d = RMat::from_row_slice(2, 2, &[a, 0.0, 0.0, -1.0 / a]);
    HyperbolicSystem::new(vec![b, d], Some(RMat::identity(2, 2)))
}

/// Normal-form system with `M = (1, -c)`.
pub fn two_by_two_problem(a: f64, c_bc: f64) -> Result<BoundaryProblem> {
    let m = CMat::from_row_slice(1, 2, &[ONE, c(-c_bc)]);
    BoundaryProblem::constant(&normal_form_system(a)?, m)
}

/// Which clause of the 2x2 splitting assumption failed, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingClause {
    RealCoefficients,
    DeterminantSign,
    PencilHyperbolicity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoByTwoSymmetrizer {
    /// `Sigma_bar` in the original coordinates of the block.
    pub sigma_re: [f64; 4],
    pub sigma_im: [f64; 4],
    pub alpha: f64,
    pub delta: f64,
    /// Smallest eigenvalue of `E = Sigma_bar G_0`.
    pub e_min: f64,
    /// Non-Hermitian parts of `Sigma_bar G_0`, `Sigma_bar G_1`.
    pub self_adjoint_defect: f64,
    /// `|-Im(Sigma_bar G(zeta + h e_gamma))/h - E| / |E|`.
    pub fd_defect: f64,
}

impl TwoByTwoSymmetrizer {
    pub fn sigma(&self) -> CMat {
        let (r, i) = (&self.sigma_re, &self.sigma_im);
        CMat::from_row_slice(2, 2, &(0..4).map(|k| Complex64::new(r[k], i[k])).collect::<Vec<_>>())
    }
}

fn pack(m: &CMat) -> ([f64; 4], [f64; 4]) {
    let mut r = [0.0; 4];
    let mut i = [0.0; 4];
    for k in 0..4 {
        r[k] = m[(k / 2, k % 2)].re;
        i[k] = m[(k / 2, k % 2)].im;
    }
    (r, i)
}

/// Base-point symmetrizer for a 2x2 block sampler `G(zeta)`; `eta_dir` is the
/// transversal tangential direction.
pub fn two_by_two_symmetrizer(sampler: &dyn Fn(&Frequency) -> Result<CMat>, base: &Frequency, eta_dir: &Frequency) -> Result<TwoByTwoSymmetrizer> {
    let ne = base.eta.len();
    let h = 1e-5 * base.norm().max(1.0);
    let diff = |dir: &Frequency| -> Result<CMat> {
        Ok((sampler(&base.offset(dir, h))? - sampler(&base.offset(dir, -h))?) * c(0.5 / h))
    };
    let mut e_tau = Frequency::new(1.0, vec![0.0; ne], 0.0);
    let g0 = diff(&e_tau)?;
    let g1 = diff(eta_dir)?;
    let scale = g0.norm().max(g1.norm());
    // clause i: real characteristic polynomial at gamma = 0
    for k in 0..8 {
        let th = std::f64::consts::TAU * (k as f64 + 0.5) / 8.0;
        e_tau.tau = th.cos();
        let z = base.offset(&e_tau, 1e-3).offset(eta_dir, 1e-3 * th.sin());
        let gz = sampler(&Frequency { gamma: 0.0, ..z })?;
        let tr = gz[(0, 0)] + gz[(1, 1)];
        let det = gz[(0, 0)] * gz[(1, 1)] - gz[(0, 1)] * gz[(1, 0)];
        if tr.im.abs() > 1e-9 * gz.norm().max(1.0) || det.im.abs() > 1e-9 * gz.norm_squared().max(1.0) {
            return Err(Error::AssumptionFailure(format!("{:?}", SplittingClause::RealCoefficients)));
        }
    }
    let (l0, l1) = eig2(&g0);
    let det0 = l0 * l1;
    if det0.im.abs() > 1e-8 * scale * scale || det0.re >= 0.0 {
        return Err(Error::AssumptionFailure(format!("{:?}", SplittingClause::DeterminantSign)));
    }
    let g0i = spectral::inverse(&g0)?;
    for k in 0..64 {
        let th = std::f64::consts::PI * (k as f64 + 0.5) / 64.0;
        let pen = &g0i * (CMat::identity(2, 2) * c(th.cos()) + &g1 * c(th.sin()));
        let (m1, m2) = eig2(&pen);
        let sep = (m1 - m2).norm();
        if m1.im.abs() > 1e-8 * pen.norm() || m2.im.abs() > 1e-8 * pen.norm() || sep < 1e-8 * pen.norm() {
            return Err(Error::AssumptionFailure(format!("{:?}", SplittingClause::PencilHyperbolicity)));
        }
    }
    // diagonalize G_0
    let (x0, x1) = if l0.re > 0.0 { (l0, l1) } else { (l1, l0) };
    let v0 = eigvec2(&g0, x0);
    let v1 = eigvec2(&g0, x1);
    let p = CMat::from_row_slice(2, 2, &[v0[0], v1[0], v0[1], v1[1]]);
    let pi = spectral::inverse(&p)?;
    let g1d = &pi * &g1 * &p;
    let (b1, c1) = (g1d[(0, 1)], g1d[(1, 0)]);
    let bc = b1 * c1;
    if bc.im.abs() > 1e-8 * scale * scale || bc.re >= 0.0 {
        return Err(Error::AssumptionFailure(format!("{:?}", SplittingClause::PencilHyperbolicity)));
    }
    let mut alpha = c1.norm_sqr();
    let mut delta = bc.re;
    if alpha * x0.re < 0.0 {
        alpha = -alpha;
        delta = -delta;
    }
    let sd = CMat::from_row_slice(2, 2, &[c(alpha), ZERO, ZERO, c(delta)]);
    let sigma = pi.adjoint() * sd * &pi;
    let e = &sigma * &g0;
    let e_min = spectral::hermitian_min_eig(&e);
    let sad = (&e - e.adjoint()).norm() / e.norm() + {
        let f = &sigma * &g1;
        (&f - f.adjoint()).norm() / f.norm().max(1e-300)
    };
    let hg = 1e-6 * base.norm().max(1.0);
    let gp = sampler(&base.offset(&Frequency::gamma_direction(ne), hg))?;
    let gb = sampler(base)?;
    let im = spectral::imaginary_part(&(&sigma * (gp - gb))) * c(-1.0 / hg);
    let fd_defect = (spectral::hermitian_part(&im) - spectral::hermitian_part(&e)).norm() / e.norm();
    let (sigma_re, sigma_im) = pack(&sigma);
    Ok(TwoByTwoSymmetrizer { sigma_re, sigma_im, alpha, delta, e_min, self_adjoint_defect: sad, fd_defect })
}
