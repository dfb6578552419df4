//! Maxwell equations in a biaxial crystal, state `(B, E)`.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::normal_form::{two_by_two_normal_form_c, TwoByTwoNormalForm};
use crate::spectral::{CMat, RMat};
use crate::symbol::{geometric_multiplicity, tangent_system, HyperbolicSystem, TangentSystem};

/// Inverse permittivities `alpha_1 > alpha_2 > alpha_3 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiaxialCrystal {
    pub alpha: [f64; 3],
}

impl Default for BiaxialCrystal {
    fn default() -> Self {
        BiaxialCrystal { alpha: [3.0, 2.0, 1.0] }
    }
}

/// Speed of the moving boundary used when none is given; `A_3` itself has
/// a double zero eigenvalue, so a fixed boundary is always characteristic.
pub const DEFAULT_FRAME_SPEED: f64 = 0.25;

fn skew(v: [f64; 3]) -> RMat {
    RMat::from_row_slice(3, 3, &[0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0])
}

impl BiaxialCrystal {
    pub fn new(alpha: [f64; 3]) -> Result<Self> {
        let c = BiaxialCrystal { alpha };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let [a1, a2, a3] = self.alpha;
        if a1 > a2 && a2 > a3 && a3 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput("biaxial crystal needs alpha_1 > alpha_2 > alpha_3 > 0".into()))
        }
    }

    /// `Psi(xi)` and `Phi(xi)` of the characteristic factorization.
    pub fn invariants(&self, xi: &[f64; 3]) -> (f64, f64) {
        let [a1, a2, a3] = self.alpha;
        let (x1, x2, x3) = (xi[0] * xi[0], xi[1] * xi[1], xi[2] * xi[2]);
        let psi = (a1 + a2) * x3 + (a2 + a3) * x1 + (a3 + a1) * x2;
        let phi = a1 * a2 * x3 + a2 * a3 * x1 + a3 * a1 * x2;
        (psi, phi)
    }

    /// `tau^2 (tau^4 - Psi tau^2 + |xi|^2 Phi)`.
    pub fn characteristic(&self, tau: f64, xi: &[f64; 3]) -> f64 {
        let (psi, phi) = self.invariants(xi);
        let r2 = xi.iter().map(|x| x * x).sum::<f64>();
        let t2 = tau * tau;
        t2 * (t2 * t2 - psi * t2 + r2 * phi)
    }

    /// Angle with `sin^2 theta = (alpha_2 - alpha_3)/(alpha_1 - alpha_3)`.
    pub fn optic_angle(&self) -> f64 {
        let [a1, a2, a3] = self.alpha;
        ((a2 - a3) / (a1 - a3)).sqrt().asin()
    }

    /// The four unit optic-axis directions `(+-cos, 0, +-sin)`.
    pub fn optic_axes(&self) -> [[f64; 3]; 4] {
        let t = self.optic_angle();
        let (s, c) = t.sin_cos();
        [[c, 0.0, s], [c, 0.0, -s], [-c, 0.0, s], [-c, 0.0, -s]]
    }
}

/// Coefficient of `xi_j`: `(B, E) -> (e_j x E, -diag(alpha)(e_j x B))`.
pub fn maxwell_coefficient(crystal: &BiaxialCrystal, j: usize) -> RMat {
    let mut e = [0.0; 3];
    e[j] = 1.0;
    let w = skew(e);
    let d = RMat::from_diagonal(&nalgebra::DVector::from_row_slice(&crystal.alpha));
    let mut a = RMat::zeros(6, 6);
    a.view_mut((0, 3), (3, 3)).copy_from(&w);
    a.view_mut((3, 0), (3, 3)).copy_from(&(-(&d * &w)));
    a
}

/// `diag(Id, diag(alpha)^{-1})`.
pub fn maxwell_symmetrizer(crystal: &BiaxialCrystal) -> RMat {
    let mut s = RMat::identity(6, 6);
    for k in 0..3 {
        s[(3 + k, 3 + k)] = 1.0 / crystal.alpha[k];
    }
    s
}

/// Fixed-frame system (boundary direction `x_3`).
pub fn maxwell_system(crystal: &BiaxialCrystal) -> HyperbolicSystem {
    let coeffs = (0..3).map(|j| maxwell_coefficient(crystal, j)).collect();
    HyperbolicSystem::new(coeffs, Some(maxwell_symmetrizer(crystal))).expect("Maxwell coefficients are consistent")
}

/// System relative to the boundary `x_3 = sigma t`.
pub fn maxwell_system_in_frame(crystal: &BiaxialCrystal, sigma: f64) -> HyperbolicSystem {
    maxwell_system(crystal).with_frame_speed(sigma)
}

/// Double root on an optic axis with its tangent system.
#[derive(Debug, Clone)]
pub struct DoubleRoot {
    pub xi: [f64; 3],
    pub tau: f64,
    pub kernel_dim: usize,
    pub tangent: TangentSystem,
    /// Tangential direction (`0` or `1`) paired with `x_3` in the normal form.
    pub tangential: usize,
    /// Normal form of the trace-free parts `(A'_3, A'_tangential)`.
    pub normal_form: TwoByTwoNormalForm,
}

fn trace_free(a: &CMat) -> CMat {
    let t = (a[(0, 0)] + a[(1, 1)]) * Complex64::new(0.5, 0.0);
    a - CMat::identity(2, 2) * t
}

/// Nonzero double roots `tau = +-sqrt(alpha_2)` on the four optic axes. The
/// zero root is left out: its modes violate the divergence constraints.
pub fn maxwell_double_roots(crystal: &BiaxialCrystal) -> Result<Vec<DoubleRoot>> {
    crystal.validate()?;
    let sys = maxwell_system(crystal);
    let t = crystal.alpha[1].sqrt();
    let mut out = Vec::new();
    for xi in crystal.optic_axes() {
        for tau in [t, -t] {
            let tangent = tangent_system(&sys, tau, &xi)?;
            if tangent.multiplicity != 2 {
                return Err(Error::MultiplicityMismatch(format!("optic axis root of multiplicity {}", tangent.multiplicity)));
            }
            let kernel_dim = geometric_multiplicity(&sys, tau, &xi, 1e-8);
            let a = trace_free(&tangent.coeffs[2]);
            // pick the tangential coefficient least aligned with A
            let mut best: Option<(f64, usize, CMat)> = None;
            for j in 0..2 {
                let b = trace_free(&tangent.coeffs[j]);
                let proj = a.dotc(&b) / a.norm_squared().max(1e-300);
                let r = (&b - &a * proj).norm();
                if best.as_ref().map(|(s, _, _)| r > *s).unwrap_or(true) {
                    best = Some((r, j, b));
                }
            }
            let (_, tangential, b) = best.expect("two tangential directions");
            let normal_form = two_by_two_normal_form_c(&a, &b)?;
            out.push(DoubleRoot { xi, tau, kernel_dim, tangent, tangential, normal_form });
        }
    }
    Ok(out)
}
