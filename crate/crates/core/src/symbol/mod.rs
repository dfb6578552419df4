//! Constant-coefficient first order systems `L = tau Id + sum_j xi_j A_j`,
//! their characteristic polynomials and tangent systems at multiple roots.

pub mod checks;
pub mod poly;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, to_complex, CMat, RMat, SpectralDecomposition};
pub use checks::{
    check_friedrichs, check_genuine_coupling, check_hyperbolic, check_noncharacteristic, check_tangent_identity, ViscousExtension,
};
pub use poly::{affine_determinant, AffineEntry, Poly};

/// Largest state dimension accepted by the exact determinant.
pub const MAX_POLY_DIM: usize = 14;

/// Frozen hyperbolic system: coefficient matrices `A_1..A_d`, an optional
/// Friedrichs symmetrizer and the index of the boundary (normal) direction.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicSystem {
    coeffs: Vec<RMat>,
    symmetrizer: Option<RMat>,
    boundary_index: usize,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    symmetrizer: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    boundary_index: Option<usize>,
}

fn rows_to_mat(rows: &[Vec<f64>], n: usize, what: &str) -> Result<RMat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{what} must be {n}x{n}")));
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn mat_to_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl HyperbolicSystem {
    /// Boundary direction defaults to the last coordinate.
    pub fn new(coeffs: Vec<RMat>, symmetrizer: Option<RMat>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("at least one coefficient matrix is required".into()));
        }
        let n = coeffs[0].nrows();
        for a in &coeffs {
            if a.nrows() != a.ncols() {
                return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
            }
            if a.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("coefficient matrix has non-finite entries".into()));
            }
        }
        if let Some(s) = &symmetrizer {
            if s.nrows() != n || s.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.nrows() });
            }
        }
        let d = coeffs.len();
        Ok(HyperbolicSystem { coeffs, symmetrizer, boundary_index: d - 1 })
    }

    pub fn with_boundary_index(mut self, j: usize) -> Result<Self> {
        if j >= self.coeffs.len() {
            return Err(Error::InvalidInput(format!("boundary index {j} out of range")));
        }
        self.boundary_index = j;
        Ok(self)
    }

    /// Boundary moving with normal speed `sigma`: `A_d -> A_d - sigma Id`.
    pub fn with_frame_speed(mut self, sigma: f64) -> Self {
        let n = self.dim();
        let j = self.boundary_index;
        self.coeffs[j] -= RMat::identity(n, n) * sigma;
        self
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn space_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RMat] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &RMat {
        &self.coeffs[j]
    }

    pub fn symmetrizer(&self) -> Option<&RMat> {
        self.symmetrizer.as_ref()
    }

    pub fn boundary_index(&self) -> usize {
        self.boundary_index
    }

    pub fn boundary_matrix(&self) -> &RMat {
        &self.coeffs[self.boundary_index]
    }

    /// Indices of the tangential directions, in increasing order.
    pub fn tangential_indices(&self) -> Vec<usize> {
        (0..self.space_dim()).filter(|&j| j != self.boundary_index).collect()
    }

    /// `A(xi) = sum_j xi_j A_j`.
    pub fn symbol(&self, xi: &[f64]) -> RMat {
        assert_eq!(xi.len(), self.space_dim(), "frequency length must equal d");
        let n = self.dim();
        let mut m = RMat::zeros(n, n);
        for (a, &x) in self.coeffs.iter().zip(xi) {
            if x != 0.0 {
                m += a * x;
            }
        }
        m
    }

    /// `tau Id + A(xi)`.
    pub fn full_symbol(&self, tau: f64, xi: &[f64]) -> RMat {
        let n = self.dim();
        self.symbol(xi) + RMat::identity(n, n) * tau
    }

    pub fn symbol_c(&self, xi: &[f64]) -> CMat {
        to_complex(&self.symbol(xi))
    }

    /// Maximum deviation from symmetry of `S` and `S A_j`, and the smallest eigenvalue of `S`.
    pub fn symmetrizer_defects(&self) -> Result<(f64, f64)> {
        let s = self.symmetrizer.as_ref().ok_or(Error::MissingSymmetrizer)?;
        let mut asym = (s - s.transpose()).norm() / s.norm();
        for a in &self.coeffs {
            let sa = s * a;
            asym = asym.max((&sa - sa.transpose()).norm() / sa.norm().max(1e-300));
        }
        let ev = spectral::hermitian_min_eig(&to_complex(s));
        Ok((asym, ev))
    }

    pub fn to_json(&self) -> String {
        let j = SystemJson {
            n: self.dim(),
            d: self.space_dim(),
            matrices: self.coeffs.iter().map(mat_to_rows).collect(),
            symmetrizer: self.symmetrizer.as_ref().map(mat_to_rows),
            boundary_index: Some(self.boundary_index),
        };
        serde_json::to_string_pretty(&j).expect("system serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SystemJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_parts(j)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let j: SystemJson = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_parts(j)
    }

    fn from_parts(j: SystemJson) -> Result<Self> {
        if j.matrices.len() != j.d {
            return Err(Error::InvalidInput(format!("matrices: expected {} entries, found {}", j.d, j.matrices.len())));
        }
        let mut coeffs = Vec::with_capacity(j.d);
        for (k, m) in j.matrices.iter().enumerate() {
            coeffs.push(rows_to_mat(m, j.n, &format!("matrices[{k}]"))?);
        }
        let s = match &j.symmetrizer {
            Some(rows) => Some(rows_to_mat(rows, j.n, "symmetrizer")?),
            None => None,
        };
        let sys = HyperbolicSystem::new(coeffs, s)?;
        match j.boundary_index {
            Some(b) => sys.with_boundary_index(b),
            None => Ok(sys),
        }
    }
}

/// A parameter-dependent family of systems.
pub trait SystemFamily<P>: Send + Sync {
    fn at(&self, p: &P) -> HyperbolicSystem;
}

impl<P, F> SystemFamily<P> for F
where
    F: Fn(&P) -> HyperbolicSystem + Send + Sync,
{
    fn at(&self, p: &P) -> HyperbolicSystem {
        self(p)
    }
}

/// Exact `det(tau Id + sum_j xi_j A_j)` in the variables `(tau, xi_1, ..., xi_d)`.
pub fn char_poly(sys: &HyperbolicSystem) -> Result<Poly> {
    let n = sys.dim();
    if n > MAX_POLY_DIM {
        return Err(Error::DegreeOverflow(n));
    }
    let d = sys.space_dim();
    let nv = d + 1;
    let entries: Vec<Vec<AffineEntry>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut lin = vec![0.0; nv];
                    if i == j {
                        lin[0] = 1.0;
                    }
                    for k in 0..d {
                        lin[k + 1] = sys.coeff(k)[(i, j)];
                    }
                    AffineEntry { c0: 0.0, lin }
                })
                .collect()
        })
        .collect();
    Ok(affine_determinant(&entries, nv))
}

/// Scale used when comparing coefficients of different degrees: the size of
/// the symbol at the point, `|tau| + |A(xi)|`.
pub fn frequency_scale(sys: &HyperbolicSystem, tau: f64, xi: &[f64]) -> f64 {
    let a = spectral::spectral_norm(&sys.symbol_c(xi));
    (tau.abs() + a).max(1e-300)
}

/// Lowest-order homogeneous term of the characteristic polynomial at a root.
#[derive(Debug, Clone)]
pub struct LocalizedPoly {
    pub order: usize,
    pub term: Poly,
}

/// Taylor expansion of `det L` at `(tau, xi)`; the order is the multiplicity
/// of the root in the sense of polynomials.
pub fn taylor_localization(sys: &HyperbolicSystem, tau: f64, xi: &[f64], rel_tol: f64) -> Result<LocalizedPoly> {
    let p = char_poly(sys)?;
    let mut x0 = vec![tau];
    x0.extend_from_slice(xi);
    let shifted = p.shift(&x0);
    let s = frequency_scale(sys, tau, xi);
    let n = p.degree();
    let sizes: Vec<f64> = (0..=n)
        .map(|k| shifted.homogeneous_part(k).max_abs_coeff() * s.powi(k as i32 - n as i32))
        .collect();
    let top = sizes.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::InternalInconsistency("characteristic polynomial vanishes".into()));
    }
    let order = sizes.iter().position(|&v| v > rel_tol * top).unwrap_or(n);
    if order == 0 {
        return Err(Error::NotCharacteristic(p.eval(&x0).abs()));
    }
    Ok(LocalizedPoly { order, term: shifted.homogeneous_part(order) })
}

/// Multiplicity of `t = 0` as a root of the univariate polynomial with
/// coefficients `c` (lowest first), comparing `|c_k| s^k`.
pub fn root_order(c: &[f64], s: f64, rel_tol: f64) -> usize {
    let sizes: Vec<f64> = c.iter().enumerate().map(|(k, v)| v.abs() * s.powi(k as i32)).collect();
    let top = sizes.iter().cloned().fold(0.0, f64::max);
    sizes.iter().position(|&v| v > rel_tol * top).unwrap_or(c.len())
}

/// Tangent system at a semi-simple root `(tau, xi)`: `A'_j = W A_j V`.
#[derive(Debug, Clone)]
pub struct TangentSystem {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub multiplicity: usize,
    pub v: CMat,
    pub w: CMat,
    pub coeffs: Vec<CMat>,
    pub boundary_index: usize,
}

impl TangentSystem {
    pub fn symbol(&self, xi: &[f64]) -> CMat {
        let m = self.multiplicity;
        let mut out = CMat::zeros(m, m);
        for (a, &x) in self.coeffs.iter().zip(xi) {
            out += a * Complex64::new(x, 0.0);
        }
        out
    }

    /// `det(tau Id + A'(xi))`.
    pub fn det(&self, tau: f64, xi: &[f64]) -> Complex64 {
        let m = self.multiplicity;
        let l = self.symbol(xi) + CMat::identity(m, m) * Complex64::new(tau, 0.0);
        l.lu().determinant()
    }

    pub fn boundary_coeff(&self) -> &CMat {
        &self.coeffs[self.boundary_index]
    }

    /// `|A'(xi_bar) + tau_bar Id|`, which vanishes for a consistent tangent system.
    pub fn base_defect(&self) -> f64 {
        let m = self.multiplicity;
        (self.symbol(&self.xi) + CMat::identity(m, m) * Complex64::new(self.tau, 0.0)).norm()
    }
}

/// Cluster of `A(xi)` holding the eigenvalue `-tau`.
pub fn root_cluster(sys: &HyperbolicSystem, tau: f64, xi: &[f64], tol_rel: f64) -> Result<(SpectralDecomposition, usize)> {
    let a = sys.symbol_c(xi);
    let dec = SpectralDecomposition::new(&a, tol_rel)?;
    let target = Complex64::new(-tau, 0.0);
    let (k, dist) = dec
        .clusters
        .iter()
        .enumerate()
        .map(|(k, c)| (k, c.members.iter().map(|&i| (dec.eigenvalues[i] - target).norm()).fold(f64::INFINITY, f64::min)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let scale = a.norm().max(1.0);
    if dist > 1e3 * tol_rel * scale {
        return Err(Error::NotCharacteristic(dist));
    }
    Ok((dec, k))
}

/// Geometric multiplicity of the eigenvalue `-tau` of `A(xi)`.
pub fn geometric_multiplicity(sys: &HyperbolicSystem, tau: f64, xi: &[f64], tol_rel: f64) -> usize {
    let l = to_complex(&sys.full_symbol(tau, xi));
    let n = l.nrows();
    let s = spectral::singular_values(&l);
    let scale = sys.symbol(xi).norm().max(tau.abs()).max(1e-300);
    n - s.iter().filter(|&&x| x > tol_rel * scale).count()
}

pub fn tangent_system(sys: &HyperbolicSystem, tau: f64, xi: &[f64]) -> Result<TangentSystem> {
    tangent_system_with(sys, tau, xi, spectral::DEFAULT_CLUSTER_TOL, 1e-8)
}

pub fn tangent_system_with(
    sys: &HyperbolicSystem,
    tau: f64,
    xi: &[f64],
    cluster_tol: f64,
    rank_tol: f64,
) -> Result<TangentSystem> {
    let (dec, k) = root_cluster(sys, tau, xi, cluster_tol)?;
    let m = dec.clusters[k].multiplicity();
    let geo = geometric_multiplicity(sys, tau, xi, rank_tol);
    if geo < m {
        return Err(Error::NotSemiSimple { algebraic: m, geometric: geo });
    }
    let v = dec.bases[k].clone();
    let w = v.adjoint() * &dec.projectors[k];
    let coeffs = sys.coeffs().iter().map(|a| &w * to_complex(a) * &v).collect();
    Ok(TangentSystem {
        tau,
        xi: xi.to_vec(),
        multiplicity: m,
        v,
        w,
        coeffs,
        boundary_index: sys.boundary_index(),
    })
}
