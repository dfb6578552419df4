//! Boundary symbol `G(zeta) = A_d^{-1}((tau - i gamma) Id + sum_j eta_j A_j)`,
//! its stable subspace `E_-` and smooth block reductions near boundary frequencies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::sphere_directions;
use crate::spectral::{
    self, concat_columns, half_plane_from_schur, to_complex, BlockReducer, CMat, HalfPlane, Schur, SubspaceBasis,
};
use crate::symbol::{self, HyperbolicSystem};

/// Boundary frequency `zeta = (tau, eta, gamma)` with `gamma >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub tau: f64,
    pub eta: Vec<f64>,
    pub gamma: f64,
}

impl Frequency {
    pub fn new(tau: f64, eta: Vec<f64>, gamma: f64) -> Self {
        Frequency { tau, eta, gamma }
    }

    pub fn norm(&self) -> f64 {
        (self.tau * self.tau + self.eta.iter().map(|x| x * x).sum::<f64>() + self.gamma * self.gamma).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(1.0 / n)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Frequency { tau: self.tau * s, eta: self.eta.iter().map(|x| x * s).collect(), gamma: self.gamma * s }
    }

    /// `self + t * dir`.
    pub fn offset(&self, dir: &Frequency, t: f64) -> Self {
        Frequency {
            tau: self.tau + t * dir.tau,
            eta: self.eta.iter().zip(&dir.eta).map(|(a, b)| a + t * b).collect(),
            gamma: self.gamma + t * dir.gamma,
        }
    }

    /// Unit vector in the `gamma` direction.
    pub fn gamma_direction(dim_eta: usize) -> Self {
        Frequency { tau: 0.0, eta: vec![0.0; dim_eta], gamma: 1.0 }
    }

    /// Coordinates `(tau, eta..., gamma)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.tau];
        v.extend_from_slice(&self.eta);
        v.push(self.gamma);
        v
    }

    pub fn from_vec(v: &[f64]) -> Self {
        let n = v.len();
        Frequency { tau: v[0], eta: v[1..n - 1].to_vec(), gamma: v[n - 1] }
    }

    fn check(&self, dim_eta: usize) -> Result<()> {
        if self.eta.len() != dim_eta {
            return Err(Error::DimensionMismatch { expected: dim_eta, found: self.eta.len() });
        }
        if !self.to_vec().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("frequency has non-finite components".into()));
        }
        Ok(())
    }
}

/// Precomputed `A_d^{-1}` and `A_d^{-1} A_j` of a noncharacteristic system.
#[derive(Debug, Clone)]
pub struct BoundarySymbol {
    pub sys: HyperbolicSystem,
    inv_ad: CMat,
    tangential: Vec<CMat>,
    incoming: usize,
}

impl BoundarySymbol {
    pub fn new(sys: &HyperbolicSystem) -> Result<Self> {
        let ad = to_complex(sys.boundary_matrix());
        let svals = spectral::singular_values(&ad);
        let smax = svals.first().copied().unwrap_or(0.0);
        let smin = svals.last().copied().unwrap_or(0.0);
        if smin <= 1e-12 * smax.max(1e-300) {
            return Err(Error::Characteristic(format!("boundary matrix is singular (sigma_min = {smin:.3e})")));
        }
        let inv_ad = spectral::inverse(&ad)?;
        let tangential = sys.tangential_indices().iter().map(|&j| &inv_ad * to_complex(sys.coeff(j))).collect();
        let ev = spectral::eigenvalues(&ad)?;
        let incoming = ev.iter().filter(|z| z.re > 0.0).count();
        Ok(BoundarySymbol { sys: sys.clone(), inv_ad, tangential, incoming })
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn dim_eta(&self) -> usize {
        self.tangential.len()
    }

    /// Number of positive eigenvalues of `A_d`, the dimension of `E_-`.
    pub fn incoming(&self) -> usize {
        self.incoming
    }

    pub fn g(&self, z: &Frequency) -> Result<CMat> {
        z.check(self.dim_eta())?;
        let mut g = &self.inv_ad * Complex64::new(z.tau, -z.gamma);
        for (a, &e) in self.tangential.iter().zip(&z.eta) {
            if e != 0.0 {
                g += a * Complex64::new(e, 0.0);
            }
        }
        Ok(g)
    }

    /// `A_d^{-1}`.
    pub fn inv_boundary(&self) -> &CMat {
        &self.inv_ad
    }
}

pub fn build_g(sys: &HyperbolicSystem, z: &Frequency) -> Result<CMat> {
    BoundarySymbol::new(sys)?.g(z)
}

/// `E_-(zeta)`: invariant subspace of `G` for `Im mu < 0`, requires `gamma > 0`.
pub fn negative_space(sym: &BoundarySymbol, z: &Frequency, gap: f64) -> Result<SubspaceBasis> {
    if !(z.gamma > 0.0) {
        return Err(Error::InvalidInput("negative_space needs gamma > 0".into()));
    }
    let g = sym.g(z)?;
    let schur = Schur::new(&g)?;
    let e = half_plane_from_schur(&schur, HalfPlane::ImNegative, gap).map_err(|err| match err {
        Error::OnBoundary { distance, threshold } => Error::GapTooSmall { gap: distance, threshold },
        other => other,
    })?;
    if e.dim() != sym.incoming() {
        return Err(Error::DimensionMismatch { expected: sym.incoming(), found: e.dim() });
    }
    Ok(e)
}

/// Invariant subspace for `Im mu > 0` (the space of solutions decaying as `x -> -infinity`).
pub fn positive_space(sym: &BoundarySymbol, z: &Frequency, gap: f64) -> Result<SubspaceBasis> {
    if !(z.gamma > 0.0) {
        return Err(Error::InvalidInput("positive_space needs gamma > 0".into()));
    }
    let g = sym.g(z)?;
    half_plane_from_schur(&Schur::new(&g)?, HalfPlane::ImPositive, gap)
        .map_err(|err| match err {
            Error::OnBoundary { distance, threshold } => Error::GapTooSmall { gap: distance, threshold },
            other => other,
        })
}

/// Approach to a boundary frequency along `zeta_k = zeta + 2^-k dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub k_start: u32,
    pub k_end: u32,
    /// Approach direction; `None` means the pure `gamma` direction.
    pub direction: Option<Frequency>,
    pub tol: f64,
    pub gap: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { k_start: 4, k_end: 20, direction: None, tol: 1e-5, gap: 1e-14 }
    }
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    /// Extrapolated limit when converged, otherwise the last sample.
    pub basis: SubspaceBasis,
    pub converged: bool,
    pub steps: Vec<f64>,
    /// Largest principal angle between successive samples.
    pub successive: Vec<f64>,
    pub samples: Vec<SubspaceBasis>,
}

/// Orthonormal basis of the dominant `k`-dimensional range of a nearly-orthogonal projector.
fn projector_range(p: &CMat, k: usize) -> SubspaceBasis {
    let n = p.nrows();
    if k == 0 {
        return SubspaceBasis::new(CMat::zeros(n, 0));
    }
    let h = spectral::hermitian_part(p);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut out = CMat::zeros(n, k);
    for (c, &i) in idx.iter().take(k).enumerate() {
        out.set_column(c, &eig.eigenvectors.column(i));
    }
    SubspaceBasis::new(out)
}

/// `E_-` as `gamma -> 0` (or along a general approach direction).
pub fn limit_negative_space(sym: &BoundarySymbol, z: &Frequency, opts: &LimitOptions) -> Result<LimitReport> {
    z.check(sym.dim_eta())?;
    let dir = opts.direction.clone().unwrap_or_else(|| Frequency::gamma_direction(sym.dim_eta()));
    dir.check(sym.dim_eta())?;
    if !(dir.gamma > 0.0) && z.gamma <= 0.0 {
        return Err(Error::InvalidInput("approach direction must enter gamma > 0".into()));
    }
    if opts.k_end <= opts.k_start {
        return Err(Error::InvalidInput("need k_end > k_start".into()));
    }
    let mut samples = Vec::new();
    let mut steps = Vec::new();
    for k in opts.k_start..=opts.k_end {
        let t = 0.5f64.powi(k as i32);
        let zk = z.offset(&dir, t);
        samples.push(negative_space(sym, &zk, opts.gap)?);
        steps.push(t);
    }
    let successive: Vec<f64> = samples.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let converged = successive.last().map(|&d| d < opts.tol).unwrap_or(false);
    let n = samples.len();
    let basis = if converged {
        let p1 = samples[n - 2].projector();
        let p2 = samples[n - 1].projector();
        let ext = p2 * Complex64::new(2.0, 0.0) - p1;
        projector_range(&ext, sym.incoming())
    } else {
        samples[n - 1].clone()
    };
    Ok(LimitReport { basis, converged, steps, successive, samples })
}

/// Largest distance between `E_-` limits taken along several approach directions.
pub fn limit_direction_spread(sym: &BoundarySymbol, z: &Frequency, dirs: &[Frequency], opts: &LimitOptions) -> Result<(f64, Vec<LimitReport>)> {
    let mut reports = Vec::with_capacity(dirs.len());
    for d in dirs {
        let mut o = opts.clone();
        o.direction = Some(d.clone());
        reports.push(limit_negative_space(sym, z, &o)?);
    }
    let mut spread = 0.0f64;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            spread = spread.max(reports[i].basis.distance(&reports[j].basis));
        }
    }
    Ok((spread, reports))
}

/// One invariant block of `G` followed smoothly from a base frequency.
#[derive(Debug, Clone)]
pub struct BoundaryBlock {
    pub sym: BoundarySymbol,
    pub base: Frequency,
    pub reducer: BlockReducer,
    pub index: usize,
}

/// `G♭ = W G V` together with its gauge.
#[derive(Debug, Clone)]
pub struct BlockSample {
    pub v: CMat,
    pub w: CMat,
    pub block: CMat,
}

impl BoundaryBlock {
    /// Block of the cluster of `G(base)` nearest to `center`.
    pub fn new(sym: &BoundarySymbol, base: &Frequency, center: Complex64) -> Result<Self> {
        let g = sym.g(base)?;
        let reducer = BlockReducer::new(&g, spectral::DEFAULT_CLUSTER_TOL)?;
        let index = reducer.cluster_near(center);
        Ok(BoundaryBlock { sym: sym.clone(), base: base.clone(), reducer, index })
    }

    pub fn with_basis(mut self, basis: CMat) -> Result<Self> {
        self.reducer = self.reducer.with_basis(self.index, basis)?;
        Ok(self)
    }

    pub fn multiplicity(&self) -> usize {
        self.reducer.multiplicities[self.index]
    }

    pub fn center(&self) -> Complex64 {
        self.reducer.centers[self.index]
    }

    pub fn base_basis(&self) -> &CMat {
        &self.reducer.base_bases[self.index]
    }

    pub fn at(&self, z: &Frequency) -> Result<BlockSample> {
        let g = self.sym.g(z)?;
        let r = self.reducer.reduce(&g)?;
        let k = self.index;
        Ok(BlockSample { v: r.v[k].clone(), w: r.w[k].clone(), block: r.blocks[k].clone() })
    }

    /// Central difference of `G♭` along `dir` at the base point.
    pub fn derivative(&self, dir: &Frequency, h: f64) -> Result<CMat> {
        let p = self.at(&self.base.offset(dir, h))?.block;
        let m = self.at(&self.base.offset(dir, -h))?.block;
        Ok((p - m) * Complex64::new(0.5 / h, 0.0))
    }
}

/// Insert the boundary component into tangential frequencies.
pub fn full_xi(sys: &HyperbolicSystem, eta: &[f64], xi_d: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(sys.space_dim());
    let mut it = eta.iter();
    for j in 0..sys.space_dim() {
        if j == sys.boundary_index() {
            out.push(xi_d);
        } else {
            out.push(*it.next().expect("eta has d - 1 entries"));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangentRelationReport {
    pub multiplicity: usize,
    /// Relative residual of `G♭'(zeta)` against `A'_d^{-1}((tau - i gamma) + A'(eta))`.
    pub residual: f64,
    /// `|G♭(zeta_bar) + xi_bar Id|`.
    pub base_defect: f64,
}

/// Compare the derivative of the boundary block at a nonglancing semi-simple
/// root with the tangent system prediction.
pub fn check_tangent_relation(sym: &BoundarySymbol, base: &Frequency, xi_d: f64) -> Result<TangentRelationReport> {
    if base.gamma != 0.0 {
        return Err(Error::InvalidInput("base frequency must have gamma = 0".into()));
    }
    let sys = &sym.sys;
    let xi = full_xi(sys, &base.eta, xi_d);
    let t = symbol::tangent_system(sys, base.tau, &xi)?;
    let m = t.multiplicity;
    let ad = t.boundary_coeff().clone();
    let inv_ad = spectral::inverse(&ad)
        .map_err(|_| Error::NotApplicable("root is glancing: tangent boundary coefficient is singular".into()))?;
    let block = BoundaryBlock::new(sym, base, Complex64::new(-xi_d, 0.0))?;
    if block.multiplicity() != m {
        return Err(Error::MultiplicityMismatch(format!("G block has size {}, root multiplicity {m}", block.multiplicity())));
    }
    let align = &t.w * block.base_basis();
    let align_inv = spectral::inverse(&align)?;
    let g0 = block.at(base)?.block;
    let base_defect = (g0 + CMat::identity(m, m) * Complex64::new(xi_d, 0.0)).norm();
    let ne = base.eta.len();
    let h = 1e-5 * base.norm().max(1.0);
    let mut residual = 0.0f64;
    let tang: Vec<usize> = sys.tangential_indices();
    for dir_index in 0..ne + 2 {
        let mut v = vec![0.0; ne + 2];
        v[dir_index] = 1.0;
        let dir = Frequency::from_vec(&v);
        let mut pred = CMat::identity(m, m) * Complex64::new(dir.tau, -dir.gamma);
        for (k, &j) in tang.iter().enumerate() {
            pred += &t.coeffs[j] * Complex64::new(dir.eta[k], 0.0);
        }
        let pred = &align_inv * (&inv_ad * pred) * &align;
        let fd = block.derivative(&dir, h)?;
        residual = residual.max((&fd - &pred).norm() / pred.norm().max(1e-300));
    }
    Ok(TangentRelationReport { multiplicity: m, residual, base_defect })
}

/// Which case of the block structure condition a block satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum BlockCase {
    Elliptic,
    RealScalar,
    Jordan { size: usize },
    ScalarSplitting { count: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockStructureReport {
    pub satisfied: Option<bool>,
    pub case: Option<BlockCase>,
    pub detail: String,
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut n = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            n[i + 1] += ci;
            n[i] -= ci * r;
        }
        c = n;
    }
    c
}

/// Test the block structure condition for a block sampler at a base frequency.
pub fn check_block_structure(sampler: &dyn Fn(&Frequency) -> Result<CMat>, base: &Frequency) -> Result<BlockStructureReport> {
    let g0 = sampler(base)?;
    let nu = g0.nrows();
    let scale = g0.norm().max(1.0);
    let eigs = spectral::eigenvalues(&g0)?;
    let mu: Complex64 = eigs.iter().sum::<Complex64>() / nu as f64;
    let spread = eigs.iter().map(|z| (z - mu).norm()).fold(0.0, f64::max);
    if spread > 1e-6 * scale {
        return Err(Error::InvalidInput(format!("block holds more than one eigenvalue (spread {spread:.2e})")));
    }
    let report = |s: Option<bool>, c: Option<BlockCase>, d: &str| BlockStructureReport { satisfied: s, case: c, detail: d.to_string() };
    if mu.im.abs() > 1e-8 * scale {
        return Ok(report(Some(true), Some(BlockCase::Elliptic), "non-real eigenvalue"));
    }
    let ne = base.eta.len();
    let h = 1e-6 * base.norm().max(1.0);
    let gdir = Frequency::gamma_direction(ne);
    let dg = (sampler(&base.offset(&gdir, h))? - sampler(&base.offset(&gdir, -h))?) * Complex64::new(0.5 / h, 0.0);
    let dscale = dg.norm().max(1e-300);
    // real coefficients of the characteristic polynomial at gamma = 0
    let mut max_imag = 0.0f64;
    for dvec in sphere_directions(ne + 1, 6) {
        let mut d = Frequency::new(dvec[0], dvec[1..].to_vec(), 0.0);
        d = d.scaled(1e-3 * base.norm().max(1.0));
        let z = Frequency { tau: base.tau + d.tau, eta: base.eta.iter().zip(&d.eta).map(|(a, b)| a + b).collect(), gamma: 0.0 };
        let e = spectral::eigenvalues(&sampler(&z)?)?;
        let c = poly_from_roots(&e);
        let cs = c.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
        max_imag = max_imag.max(c.iter().map(|x| x.im.abs()).fold(0.0, f64::max) / cs);
    }
    if max_imag > 1e-8 {
        return Ok(report(Some(false), None, "characteristic polynomial is not real at gamma = 0"));
    }
    if nu == 1 {
        let ok = dg[(0, 0)].norm() > 1e-10;
        return Ok(report(Some(ok), Some(BlockCase::RealScalar), if ok { "real scalar block" } else { "d_gamma vanishes" }));
    }
    let n0 = &g0 - CMat::identity(nu, nu) * mu;
    let mut ranks = Vec::with_capacity(nu);
    let mut pw = CMat::identity(nu, nu);
    for _ in 0..nu {
        pw = &pw * &n0;
        let r = if pw.norm() <= 1e-8 * scale { 0 } else { spectral::rank(&pw, 1e-7) };
        ranks.push(r);
    }
    if ranks[0] == 0 {
        // semi-simple block: must split into real scalar blocks smoothly
        let mut sets: Vec<Vec<CMat>> = Vec::new();
        let mut max_split = 0.0f64;
        let dirs = sphere_directions(ne + 1, 16);
        for dvec in &dirs {
            let dir = Frequency::new(dvec[0], dvec[1..].to_vec(), 0.0);
            let mut pair = Vec::new();
            for s in [2e-3, 1e-3] {
                let z = base.offset(&dir, s * base.norm().max(1.0));
                let gs = sampler(&z)?;
                let dec = spectral::SpectralDecomposition::new(&gs, 1e-12)?;
                let e = &dec.eigenvalues;
                for i in 0..e.len() {
                    for j in i + 1..e.len() {
                        max_split = max_split.max((e[i] - e[j]).norm());
                    }
                }
                pair.push(dec);
            }
            if pair.iter().all(|d| d.clusters.len() == nu) {
                let ext: Vec<CMat> = pair[0]
                    .projectors
                    .iter()
                    .zip(&pair[1].projectors)
                    .map(|(a, b)| b * Complex64::new(2.0, 0.0) - a)
                    .collect();
                sets.push(ext);
            }
        }
        if max_split <= 1e-11 * scale {
            let ok = (0..nu).all(|_| dg.norm() > 1e-10) && spectral::eigenvalues(&dg)?.iter().all(|z| z.norm() > 1e-8 * dscale);
            return Ok(report(Some(ok), Some(BlockCase::ScalarSplitting { count: nu }), "constant multiplicity"));
        }
        if sets.len() < 2 {
            return Ok(report(None, None, "branches not resolvable"));
        }
        let var = sets.iter().skip(1).map(|s| crate::classify::projector_set_distance(&sets[0], s)).fold(0.0, f64::max);
        if var > 1e-2 {
            return Ok(report(Some(false), None, "eigenprojectors depend on the approach direction"));
        }
        if var < 1e-3 {
            let ok = sets[0].iter().all(|p| (p * &dg).trace().norm() > 1e-8 * dscale);
            return Ok(report(Some(ok), Some(BlockCase::ScalarSplitting { count: nu }), "smooth splitting into scalar blocks"));
        }
        return Ok(report(None, None, "projector limits inconclusive"));
    }
    let jordan = (0..nu).all(|j| ranks[j] == nu - 1 - j);
    if !jordan {
        return Ok(report(None, None, "nilpotent part is not a single Jordan block"));
    }
    let mut pnu1 = CMat::identity(nu, nu);
    for _ in 0..nu - 1 {
        pnu1 = &pnu1 * &n0;
    }
    let svd = pnu1.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let imax = (0..svd.singular_values.len())
        .max_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap())
        .unwrap();
    let v: spectral::CVec = vt.row(imax).adjoint();
    let mut cols = Vec::with_capacity(nu);
    let mut x = v.clone();
    cols.push(x.clone());
    for _ in 1..nu {
        x = &n0 * &x;
        cols.push(x.clone());
    }
    cols.reverse();
    let xm = concat_columns(&cols.into_iter().map(|c| CMat::from_column_slice(nu, 1, c.as_slice())).collect::<Vec<_>>());
    let xinv = spectral::inverse(&xm)?;
    let dj = &xinv * &dg * &xm;
    let corner = dj[(nu - 1, 0)].norm() / (dj.norm().max(1e-300));
    let ok = corner > 1e-8;
    Ok(report(Some(ok), Some(BlockCase::Jordan { size: nu }), &format!("relative lower-left entry {corner:.3e}")))
}
