//! Structural hypotheses on a frozen system: hyperbolicity, Friedrichs
//! symmetry, noncharacteristic boundary and viscous genuine coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::sphere_directions;
use crate::spectral::{self, to_complex, RMat};

use super::HyperbolicSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub samples: usize,
    /// Largest `|Im lambda| / |A(xi)|` seen.
    pub worst_imag: f64,
    pub worst_xi: Vec<f64>,
    pub passed: bool,
}

/// Real spectrum of `A(xi)` over `samples` unit directions.
pub fn check_hyperbolic(sys: &HyperbolicSystem, samples: usize) -> Result<HyperbolicityReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("sample_count must be positive".into()));
    }
    let mut worst = 0.0f64;
    let mut worst_xi = vec![0.0; sys.space_dim()];
    for xi in sphere_directions(sys.space_dim(), samples) {
        let a = sys.symbol(&xi);
        let scale = a.norm().max(1e-300);
        let ev = a.complex_eigenvalues();
        let im = ev.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / scale;
        if im > worst || worst_xi.iter().all(|&x| x == 0.0) {
            worst = worst.max(im);
            worst_xi = xi;
        }
    }
    Ok(HyperbolicityReport { samples, worst_imag: worst, worst_xi, passed: worst <= 1e-8 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsReport {
    pub asymmetry: f64,
    pub min_eig: f64,
    pub passed: bool,
}

pub fn check_friedrichs(sys: &HyperbolicSystem) -> Result<FriedrichsReport> {
    let (asymmetry, min_eig) = sys.symmetrizer_defects()?;
    Ok(FriedrichsReport { asymmetry, min_eig, passed: asymmetry <= 1e-10 && min_eig > 1e-10 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoncharacteristicReport {
    pub abs_det: f64,
    pub threshold: f64,
    /// Smallest singular value of `A_d` relative to the largest.
    pub relative_gap: f64,
    pub passed: bool,
}

/// `det A_d != 0` at threshold `1e-10 |A_d|^N`.
pub fn check_noncharacteristic(sys: &HyperbolicSystem) -> NoncharacteristicReport {
    let ad = sys.boundary_matrix();
    let n = ad.nrows() as i32;
    let s = spectral::singular_values(&to_complex(ad));
    let smax = s.first().copied().unwrap_or(0.0);
    let abs_det: f64 = s.iter().product();
    let threshold = 1e-10 * spectral::spectral_norm(&to_complex(ad)).powi(n);
    let relative_gap = if smax > 0.0 { s.last().copied().unwrap_or(0.0) / smax } else { 0.0 };
    NoncharacteristicReport { abs_det, threshold, relative_gap, passed: smax > 0.0 && abs_det > threshold }
}

/// Second order terms `B(xi) = sum_{j,k} xi_j xi_k B_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscousExtension {
    /// `b[j][k]`, `d x d` blocks of `N x N` matrices.
    pub b: Vec<Vec<RMat>>,
}

impl ViscousExtension {
    pub fn new(b: Vec<Vec<RMat>>) -> Self {
        ViscousExtension { b }
    }

    /// `B_{jk} = delta_{jk} D` for a fixed diffusion matrix `D`.
    pub fn laplacian(d: usize, diffusion: RMat) -> Self {
        let n = diffusion.nrows();
        let b = (0..d)
            .map(|j| (0..d).map(|k| if j == k { diffusion.clone() } else { RMat::zeros(n, n) }).collect())
            .collect();
        ViscousExtension { b }
    }

    pub fn symbol(&self, xi: &[f64]) -> RMat {
        let n = self.b[0][0].nrows();
        let mut m = RMat::zeros(n, n);
        for (j, row) in self.b.iter().enumerate() {
            for (k, bjk) in row.iter().enumerate() {
                m += bjk * (xi[j] * xi[k]);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub samples: usize,
    /// Minimum of `|B v| / |v|` over eigenvectors `v` of `A(xi)`.
    pub min_eigvec_action: f64,
    /// Minimum over eigenvalue clusters of `lambda_min(V^* S B V)`.
    pub min_cluster_margin: f64,
    /// `S B(xi)` symmetric positive semidefinite on the samples.
    pub semidefinite: bool,
    pub passed: bool,
}

pub fn check_genuine_coupling(sys: &HyperbolicSystem, visc: &ViscousExtension, samples: usize) -> Result<CouplingReport> {
    let s = sys.symmetrizer().ok_or(Error::MissingSymmetrizer)?;
    let d = sys.space_dim();
    if visc.b.len() != d || visc.b.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: visc.b.len() });
    }
    let sc = to_complex(s);
    let mut min_action = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    let mut semidefinite = true;
    for xi in sphere_directions(d, samples.max(1)) {
        let b = to_complex(&visc.symbol(&xi));
        let sb = &sc * &b;
        let scale = sb.norm().max(1.0);
        if (&sb - sb.adjoint()).norm() > 1e-10 * scale || spectral::hermitian_min_eig(&spectral::hermitian_part(&sb)) < -1e-10 * scale {
            semidefinite = false;
        }
        let dec = spectral::SpectralDecomposition::new(&sys.symbol_c(&xi), spectral::DEFAULT_CLUSTER_TOL)?;
        for basis in &dec.bases {
            // S-orthonormalize so the margin does not depend on the basis scale
            let gram = basis.adjoint() * &sc * basis;
            let l = gram.cholesky().ok_or_else(|| Error::Singular("cluster Gram matrix".into()))?;
            let linv = spectral::inverse(&l.l())?;
            let v = basis * linv.adjoint();
            let m = v.adjoint() * &sb * &v;
            min_margin = min_margin.min(spectral::hermitian_min_eig(&spectral::hermitian_part(&m)));
            let q = spectral::range_basis(basis, 1e-12);
            min_action = min_action.min(spectral::singular_values(&(&b * &q)).last().copied().unwrap_or(0.0));
        }
    }
    let passed = semidefinite && min_margin > 1e-10;
    Ok(CouplingReport { samples, min_eigvec_action: min_action, min_cluster_margin: min_margin, semidefinite, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentIdentityReport {
    pub multiplicity: usize,
    pub used: usize,
    /// Points dropped because they sit too close to the tangent variety.
    pub skipped: usize,
    /// Mean of `det(tau Id + A'(xi)) / Delta(tau, xi)`.
    pub constant: f64,
    pub spread: f64,
    pub passed: bool,
}

/// Compares the tangent determinant with the localized characteristic
/// polynomial at the points `(tau, xi)` in `points`. A point is kept when
/// `|det| >= cutoff (|p| s)^m`, `s` the size of the tangent coefficients;
/// scanning stops once `want` points are kept.
pub fn check_tangent_identity(
    sys: &HyperbolicSystem,
    tau: f64,
    xi: &[f64],
    points: &[Vec<f64>],
    cutoff: f64,
    want: usize,
) -> Result<TangentIdentityReport> {
    let t = super::tangent_system(sys, tau, xi)?;
    let loc = super::taylor_localization(sys, tau, xi, 1e-9)?;
    let m = t.multiplicity;
    if loc.order != m {
        return Err(Error::InternalInconsistency(format!(
            "root of order {} with {}-dimensional kernel",
            loc.order, m
        )));
    }
    let s = 1.0 + t.coeffs.iter().map(|c| c.norm()).sum::<f64>();
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for p in points {
        if ratios.len() == want {
            break;
        }
        if p.len() != sys.space_dim() + 1 {
            return Err(Error::DimensionMismatch { expected: sys.space_dim() + 1, found: p.len() });
        }
        let d = t.det(p[0], &p[1..]);
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if d.norm() < cutoff * (r * s).powi(m as i32) {
            skipped += 1;
            continue;
        }
        let l = loc.term.eval(p);
        ratios.push(d.re / l);
    }
    if ratios.len() < want.max(1) {
        return Err(Error::InvalidInput(format!("only {} sample points off the tangent variety", ratios.len())));
    }
    let mx = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (mx - mn) / mx.abs().max(mn.abs());
    let constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(TangentIdentityReport {
        multiplicity: m,
        used: ratios.len(),
        skipped,
        constant,
        spread,
        passed: spread < 1e-6 && constant.is_finite(),
    })
}
