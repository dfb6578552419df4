//! Symmetrizer checks for the boundary symbol and the explicit constructions:
//! `-S A_d`, totally nonglancing blocks, K-families.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{full_xi, negative_space, BoundaryBlock, BoundarySymbol, Frequency};
use crate::error::{Error, Result};
use crate::lopatinski::BoundaryProblem;
use crate::spectral::{self, to_complex, CMat, Schur};
use crate::symbol;

pub type MatrixSampler = Arc<dyn Fn(&Frequency) -> CMat + Send + Sync>;

/// Hermitian `Sigma(zeta)` with advertised constants `c` (lower) and `big_c` (upper).
#[derive(Clone)]
pub struct SymmetrizerCandidate {
    pub sampler: MatrixSampler,
    pub c: f64,
    pub big_c: f64,
}

impl std::fmt::Debug for SymmetrizerCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetrizerCandidate").field("c", &self.c).field("big_c", &self.big_c).finish_non_exhaustive()
    }
}

impl SymmetrizerCandidate {
    pub fn new<F>(f: F, c: f64, big_c: f64) -> Self
    where
        F: Fn(&Frequency) -> CMat + Send + Sync + 'static,
    {
        SymmetrizerCandidate { sampler: Arc::new(f), c, big_c }
    }

    pub fn constant(m: CMat, c: f64, big_c: f64) -> Self {
        Self::new(move |_| m.clone(), c, big_c)
    }

    /// `Sigma = -S A_d` with `c = min eig S`.
    pub fn friedrichs(sym: &BoundarySymbol) -> Result<Self> {
        let s = sym.sys.symmetrizer().ok_or(Error::MissingSymmetrizer)?;
        let sc = to_complex(s);
        let sigma = -(&sc * to_complex(sym.sys.boundary_matrix()));
        let c = spectral::hermitian_min_eig(&sc);
        let big_c = spectral::spectral_norm(&sigma);
        Ok(Self::constant(sigma, c, big_c))
    }

    pub fn at(&self, z: &Frequency) -> CMat {
        (self.sampler)(z)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetrizerReport {
    pub samples: usize,
    pub max_hermitian_defect: f64,
    pub max_norm: f64,
    /// `min (lambda_min(Im Sigma G) - c gamma)`, relative to `|Sigma G|`.
    pub min_margin: f64,
    pub failing: Vec<usize>,
    pub passed: bool,
}

/// Check `Sigma = Sigma^*`, `|Sigma| <= C`, `Im(Sigma G) >= c gamma`.
pub fn verify_symmetrizer(cand: &SymmetrizerCandidate, g: &dyn Fn(&Frequency) -> Result<CMat>, samples: &[Frequency]) -> Result<SymmetrizerReport> {
    let mut herm = 0.0f64;
    let mut max_norm = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut failing = Vec::new();
    for (i, z) in samples.iter().enumerate() {
        let s = cand.at(z);
        let scale = s.norm().max(1e-300);
        let h = (&s - s.adjoint()).norm() / scale;
        herm = herm.max(h);
        let nrm = spectral::spectral_norm(&s);
        max_norm = max_norm.max(nrm);
        let sg = &s * g(z)?;
        let lam = spectral::hermitian_min_eig(&spectral::imaginary_part(&sg));
        let m = (lam - cand.c * z.gamma) / sg.norm().max(1.0);
        margin = margin.min(m);
        if h > 1e-12 || nrm > cand.big_c * (1.0 + 1e-12) || m < -1e-12 {
            failing.push(i);
        }
    }
    Ok(SymmetrizerReport {
        samples: samples.len(),
        max_hermitian_defect: herm,
        max_norm,
        min_margin: margin,
        passed: failing.is_empty(),
        failing,
    })
}

/// `|Im(-S A_d G) - gamma S| / (gamma |S|)`, maximized over samples.
pub fn friedrichs_identity_defect(sym: &BoundarySymbol, samples: &[Frequency]) -> Result<f64> {
    let s = to_complex(sym.sys.symmetrizer().ok_or(Error::MissingSymmetrizer)?);
    let sigma = -(&s * to_complex(sym.sys.boundary_matrix()));
    let mut worst = 0.0f64;
    for z in samples {
        let im = spectral::imaginary_part(&(&sigma * sym.g(z)?));
        let d = (im - &s * Complex64::new(z.gamma, 0.0)).norm() / (z.gamma * s.norm());
        worst = worst.max(d);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KreissReport {
    /// `min lambda_min(Sigma + C M^* M) - c`.
    pub global_margin: f64,
    /// `min lambda_min(Sigma|ker M) - c`.
    pub restricted_margin: f64,
    /// Constant `C'` making `Sigma + C' M^* M >= c/2` from the restricted bound.
    pub converted_big_c: f64,
    pub converted_margin: f64,
    pub global_ok: bool,
    pub restricted_ok: bool,
    /// Verdicts related as expected: global implies restricted, restricted implies converted.
    pub consistent: bool,
}

/// Both forms of the boundary condition on `Sigma`.
pub fn verify_kreiss(cand: &SymmetrizerCandidate, bp: &BoundaryProblem, samples: &[Frequency]) -> Result<KreissReport> {
    let (c, big_c) = (cand.c, cand.big_c);
    let mut global = f64::INFINITY;
    let mut restricted = f64::INFINITY;
    let mut parts = Vec::with_capacity(samples.len());
    let mut conv_c = 0.0f64;
    for z in samples {
        let s = spectral::hermitian_part(&cand.at(z));
        let m = bp.boundary_matrix(z);
        let mm = m.adjoint() * &m;
        global = global.min(spectral::hermitian_min_eig(&(&s + &mm * Complex64::new(big_c, 0.0))) - c);
        let k = spectral::nullspace(&m, 1e-12);
        let r = if k.ncols() == 0 { f64::INFINITY } else { spectral::hermitian_min_eig(&(k.adjoint() * &s * &k)) };
        restricted = restricted.min(r - c);
        // |u''| <= C2 |M u| on (ker M)^perp
        let sv = spectral::singular_values(&m);
        let c2 = 1.0 / sv.iter().copied().filter(|&x| x > 1e-12 * sv[0]).fold(f64::INFINITY, f64::min);
        let cs = spectral::spectral_norm(&s);
        let c1 = cs + c / 2.0 + 2.0 * cs * cs / c.max(1e-300);
        conv_c = conv_c.max(c1 * c2 * c2);
        parts.push((s, mm));
    }
    let converted = parts
        .iter()
        .map(|(s, mm)| spectral::hermitian_min_eig(&(s + mm * Complex64::new(conv_c, 0.0))) - c / 2.0)
        .fold(f64::INFINITY, f64::min);
    let tol = -1e-10;
    let global_ok = global >= tol;
    let restricted_ok = restricted >= tol;
    let converted_ok = converted >= tol;
    let consistent = (!global_ok || restricted_ok) && (!restricted_ok || converted_ok);
    Ok(KreissReport {
        global_margin: global,
        restricted_margin: restricted,
        converted_big_c: conv_c,
        converted_margin: converted,
        global_ok,
        restricted_ok,
        consistent,
    })
}

/// Riesz projector onto the `Im mu < 0` invariant space of `g`.
pub fn stable_projector(g: &CMat) -> Result<CMat> {
    let schur = Schur::new(g)?;
    let select: Vec<bool> = schur.eigenvalues().iter().map(|z| z.im < 0.0).collect();
    Ok(spectral::riesz_projector(&schur, &select)?.0)
}

/// Largest `m` with `x - m y >= 0`, `y >= 0`.
fn largest_m(x: &CMat, y: &CMat) -> f64 {
    let f = |m: f64| spectral::hermitian_min_eig(&(x - y * Complex64::new(m, 0.0)));
    let scale = x.norm().max(y.norm()).max(1.0);
    let tol = -1e-12 * scale;
    let big = 1e12;
    if f(0.0) >= tol {
        if f(big) >= tol {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while f(hi) >= tol {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= tol { lo = mid } else { hi = mid }
        }
        lo
    } else {
        if f(-big) < tol {
            return f64::NEG_INFINITY;
        }
        let (mut lo, mut hi) = (-1.0, 0.0);
        while f(lo) < tol {
            hi = lo;
            lo *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= tol { lo = mid } else { hi = mid }
        }
        lo
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KFamilyReport {
    pub kappas: Vec<f64>,
    /// Fitted `m(kappa)`, the minimum over samples.
    pub m: Vec<f64>,
    pub increasing: bool,
    pub exceeds_bound: bool,
    pub passed: bool,
}

/// Fit `m(kappa)` in `Sigma^kappa + Pi_-^* Pi_- >= m Pi_+^* Pi_+` at `gamma > 0` samples.
pub fn verify_k_family(
    family: &dyn Fn(f64, &Frequency) -> CMat,
    g: &dyn Fn(&Frequency) -> Result<CMat>,
    kappas: &[f64],
    samples: &[Frequency],
    bound: f64,
) -> Result<KFamilyReport> {
    let mut pis = Vec::with_capacity(samples.len());
    for z in samples {
        let gm = g(z)?;
        let pm = stable_projector(&gm)?;
        let n = gm.nrows();
        let pp = CMat::identity(n, n) - &pm;
        pis.push((pm.adjoint() * &pm, pp.adjoint() * &pp));
    }
    let mut ms = Vec::with_capacity(kappas.len());
    for &k in kappas {
        let mut worst = f64::INFINITY;
        for (z, (qm, qp)) in samples.iter().zip(&pis) {
            let x = spectral::hermitian_part(&family(k, z)) + qm;
            worst = worst.min(largest_m(&x, qp));
        }
        ms.push(worst);
    }
    let increasing = ms.windows(2).all(|w| w[1] > w[0] || (w[1].is_infinite() && w[0].is_infinite() && w[1] > 0.0));
    let exceeds_bound = ms.last().map(|&m| m > bound).unwrap_or(false);
    Ok(KFamilyReport { kappas: kappas.to_vec(), m: ms, increasing, exceeds_bound, passed: increasing && exceeds_bound })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignReport {
    /// Largest eigenvalue of the compression of `Sigma` to `E_-`.
    pub max_eig: f64,
    pub failing: Vec<usize>,
    pub passed: bool,
}

/// Negativity of `Sigma` on `E_-(zeta)`.
pub fn sign_check(cand: &SymmetrizerCandidate, g: &dyn Fn(&Frequency) -> Result<CMat>, samples: &[Frequency]) -> Result<SignReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut failing = Vec::new();
    for (i, z) in samples.iter().enumerate() {
        if !(z.gamma > 0.0) {
            return Err(Error::InvalidInput("sign check needs gamma > 0".into()));
        }
        let e = spectral::half_plane_subspace(&g(z)?, spectral::HalfPlane::ImNegative, 1e-14)?;
        if e.dim() == 0 {
            continue;
        }
        let s = spectral::hermitian_part(&cand.at(z));
        let lam = spectral::hermitian_max_eig(&(e.basis.adjoint() * &s * &e.basis));
        worst = worst.max(lam / s.norm().max(1e-300));
        if !(lam < 0.0) {
            failing.push(i);
        }
    }
    Ok(SignReport { max_eig: worst, passed: failing.is_empty(), failing })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Incoming,
    Outgoing,
}

/// Symmetrizer `Sigma_k = -V_k^* S A_d V_k` of a totally nonglancing block.
#[derive(Debug, Clone)]
pub struct BlockSymmetrizer {
    pub block: BoundaryBlock,
    pub orientation: Orientation,
    /// `Sigma_k(zeta_bar) = -A'_{k,d}`.
    pub base_value: CMat,
    /// Eigenvalues of `A'_{k,d}` in the S-orthonormal basis.
    pub boundary_speeds: Vec<f64>,
    s: CMat,
    sad: CMat,
}

impl BlockSymmetrizer {
    pub fn sigma(&self, z: &Frequency) -> Result<CMat> {
        let v = self.block.at(z)?.v;
        Ok(-(v.adjoint() * &self.sad * &v))
    }

    /// `Sigma^kappa`: `Sigma_k` when incoming, `kappa Sigma_k` when outgoing.
    pub fn family(&self, kappa: f64, z: &Frequency) -> Result<CMat> {
        let s = self.sigma(z)?;
        Ok(match self.orientation {
            Orientation::Incoming => s,
            Orientation::Outgoing => s * Complex64::new(kappa, 0.0),
        })
    }

    pub fn block_g(&self, z: &Frequency) -> Result<CMat> {
        Ok(self.block.at(z)?.block)
    }

    /// `|Im(Sigma_k G_k) - gamma V_k^* S V_k| / (gamma |V_k^* S V_k|)`.
    pub fn identity_defect(&self, z: &Frequency) -> Result<f64> {
        let smp = self.block.at(z)?;
        let sigma = -(smp.v.adjoint() * &self.sad * &smp.v);
        let e = smp.v.adjoint() * &self.s * &smp.v;
        let im = spectral::imaginary_part(&(sigma * &smp.block));
        Ok((im - &e * Complex64::new(z.gamma, 0.0)).norm() / (z.gamma * e.norm()).max(1e-300))
    }

    /// `lambda_min(V_k^* S V_k)`, the constant `c_k` of `Im(Sigma_k G_k) >= c_k gamma`.
    pub fn coercivity(&self, z: &Frequency) -> Result<f64> {
        let v = self.block.at(z)?.v;
        Ok(spectral::hermitian_min_eig(&(v.adjoint() * &self.s * &v)))
    }
}

/// Block symmetrizer at a nonglancing root `(tau_bar, eta_bar, xi_bar)` with `gamma = 0`.
pub fn totally_nonglancing_symmetrizer(sym: &BoundarySymbol, base: &Frequency, xi_d: f64) -> Result<BlockSymmetrizer> {
    if base.gamma != 0.0 {
        return Err(Error::InvalidInput("base frequency must have gamma = 0".into()));
    }
    let sys = &sym.sys;
    let s = to_complex(sys.symmetrizer().ok_or(Error::MissingSymmetrizer)?);
    let xi = full_xi(sys, &base.eta, xi_d);
    let t = symbol::tangent_system(sys, base.tau, &xi)?;
    // S-orthonormal basis of the root eigenspace
    let gram = t.v.adjoint() * &s * &t.v;
    let eig = spectral::hermitian_part(&gram).symmetric_eigen();
    let mut inv_sqrt = CMat::zeros(gram.nrows(), gram.nrows());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            return Err(Error::InternalInconsistency("S-Gram matrix is not positive".into()));
        }
        let col = eig.eigenvectors.column(i);
        inv_sqrt += &col * col.adjoint() * Complex64::new(1.0 / l.sqrt(), 0.0);
    }
    let basis = &t.v * inv_sqrt;
    let sad = &s * to_complex(sys.boundary_matrix());
    let apd = basis.adjoint() * &sad * &basis;
    let speeds = spectral::hermitian_eigenvalues(&apd);
    let orientation = if speeds.iter().all(|&x| x > 0.0) {
        Orientation::Incoming
    } else if speeds.iter().all(|&x| x < 0.0) {
        Orientation::Outgoing
    } else {
        return Err(Error::NotApplicable("block is not totally nonglancing".into()));
    };
    let block = BoundaryBlock::new(sym, base, Complex64::new(-xi_d, 0.0))?;
    if block.multiplicity() != t.multiplicity {
        return Err(Error::MultiplicityMismatch(format!("G block {} vs root {}", block.multiplicity(), t.multiplicity)));
    }
    let block = block.with_basis(basis)?;
    let base_value = -apd;
    Ok(BlockSymmetrizer { block, orientation, base_value, boundary_speeds: speeds, s, sad })
}

/// Samples with `gamma > 0` used by the verification routines when the caller has none.
pub fn upper_samples(dim_eta: usize, n: usize) -> Vec<Frequency> {
    crate::grid::sphere_directions(dim_eta + 2, 2 * n)
        .into_iter()
        .filter(|v| v[dim_eta + 1] > 1e-3)
        .take(n)
        .map(|v| Frequency::from_vec(&v))
        .collect()
}

/// `E_-` compression margin for an arbitrary symbol, used by tests and the CLI.
pub fn negative_compression(sym: &BoundarySymbol, sigma: &CMat, z: &Frequency) -> Result<f64> {
    let e = negative_space(sym, z, 1e-14)?;
    Ok(spectral::hermitian_max_eig(&(e.basis.adjoint() * sigma * &e.basis)))
}
