//! Lopatinski determinants, uniform scans over the closed half sphere, and
//! reduced boundary conditions on invariant splittings of `G`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{limit_negative_space, negative_space, BoundarySymbol, Frequency, LimitOptions};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectral::{self, concat_columns, BlockReducer, CMat, HalfPlane, SubspaceBasis};
use crate::symbol::HyperbolicSystem;

type BoundaryOperator = Arc<dyn Fn(&Frequency) -> CMat + Send + Sync>;

/// Boundary value problem `du/dx + iG u = f`, `M u(0) = g`.
#[derive(Clone)]
pub struct BoundaryProblem {
    sym: BoundarySymbol,
    m: BoundaryOperator,
}

impl std::fmt::Debug for BoundaryProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryProblem").field("sys", &self.sym.sys).finish_non_exhaustive()
    }
}

impl BoundaryProblem {
    /// Frequency-independent boundary matrix.
    pub fn constant(sys: &HyperbolicSystem, m: CMat) -> Result<Self> {
        let sym = BoundarySymbol::new(sys)?;
        Self::check_shape(&sym, &m)?;
        Ok(BoundaryProblem { sym, m: Arc::new(move |_| m.clone()) })
    }

    /// `M(zeta)`, homogeneous of degree 0; its shape is checked at `probe`.
    pub fn with_operator<F>(sys: &HyperbolicSystem, m: F, probe: &Frequency) -> Result<Self>
    where
        F: Fn(&Frequency) -> CMat + Send + Sync + 'static,
    {
        let sym = BoundarySymbol::new(sys)?;
        Self::check_shape(&sym, &m(probe))?;
        Ok(BoundaryProblem { sym, m: Arc::new(m) })
    }

    fn check_shape(sym: &BoundarySymbol, m: &CMat) -> Result<()> {
        if m.ncols() != sym.dim() {
            return Err(Error::DimensionMismatch { expected: sym.dim(), found: m.ncols() });
        }
        if m.nrows() != sym.incoming() {
            return Err(Error::DimensionMismatch { expected: sym.incoming(), found: m.nrows() });
        }
        Ok(())
    }

    pub fn symbol(&self) -> &BoundarySymbol {
        &self.sym
    }

    pub fn system(&self) -> &HyperbolicSystem {
        &self.sym.sys
    }

    pub fn boundary_matrix(&self, z: &Frequency) -> CMat {
        (self.m)(z)
    }

    pub fn dim_eta(&self) -> usize {
        self.sym.dim_eta()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LopatinskiOptions {
    pub limit: LimitOptions,
    pub gap: f64,
    pub rank_tol: f64,
}

impl Default for LopatinskiOptions {
    fn default() -> Self {
        LopatinskiOptions { limit: LimitOptions::default(), gap: 1e-14, rank_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LopatinskiValue {
    pub value: f64,
    /// False at `gamma = 0` points whose `E_-` limit did not settle; the value is
    /// then the infimum over the approach samples.
    pub converged: bool,
}

fn kernel(m: &CMat, tol: f64) -> CMat {
    spectral::nullspace(m, tol)
}

fn det_with(e: &SubspaceBasis, k: &CMat) -> Result<f64> {
    if e.dim() + k.ncols() != e.ambient() {
        return Err(Error::DimensionMismatch { expected: e.ambient(), found: e.dim() + k.ncols() });
    }
    spectral::subspace_determinant(&[&e.basis, k])
}

/// `|det(E_-(zeta), ker M(zeta))|` with orthonormal bases.
pub fn lopatinski_det(bp: &BoundaryProblem, z: &Frequency, opts: &LopatinskiOptions) -> Result<LopatinskiValue> {
    let k = kernel(&bp.boundary_matrix(z), opts.rank_tol);
    if z.gamma > 0.0 {
        let e = negative_space(&bp.sym, z, opts.gap)?;
        return Ok(LopatinskiValue { value: det_with(&e, &k)?, converged: true });
    }
    let lim = limit_negative_space(&bp.sym, z, &opts.limit)?;
    if lim.converged {
        Ok(LopatinskiValue { value: det_with(&lim.basis, &k)?, converged: true })
    } else {
        let mut inf = f64::INFINITY;
        for s in &lim.samples {
            inf = inf.min(det_with(s, &k)?);
        }
        Ok(LopatinskiValue { value: inf, converged: false })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub grid: FrequencyGrid,
    /// Replacement `gamma` for boundary points whose limit does not converge; 0 disables.
    pub gamma_floor: f64,
    /// Number of lowest grid minima refined by a local simplex search.
    pub refine: usize,
    pub refine_iterations: usize,
    pub options: LopatinskiOptions,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid: FrequencyGrid::with_total(500),
            gamma_floor: 0.0,
            refine: 0,
            refine_iterations: 200,
            options: LopatinskiOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub zeta: Frequency,
    pub abs_d: f64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub min_value: f64,
    pub argmin: Option<Frequency>,
    pub gamma_floor: f64,
    /// Lowest value found by local refinement, if any was requested.
    pub refined: Option<ScanPoint>,
}

impl ScanResult {
    /// Smallest value over the grid and the refinement.
    pub fn overall_min(&self) -> f64 {
        self.refined.as_ref().map(|r| r.abs_d.min(self.min_value)).unwrap_or(self.min_value)
    }

    pub fn satisfies(&self, threshold: f64) -> bool {
        self.overall_min() > threshold
    }
}

/// Point evaluator used by [`uniform_scan_with`]: `|D|` at one frequency.
pub type Evaluator<'a> = dyn Fn(&Frequency) -> Result<LopatinskiValue> + Sync + 'a;

fn evaluate(eval: &Evaluator<'_>, z: &Frequency, gamma_floor: f64) -> ScanPoint {
    match eval(z) {
        Ok(v) if !v.converged && gamma_floor > 0.0 => {
            let lifted = Frequency { gamma: gamma_floor, ..z.clone() }.normalized();
            match eval(&lifted) {
                Ok(w) => ScanPoint { zeta: z.clone(), abs_d: w.value, converged: false, error: None },
                Err(e) => ScanPoint { zeta: z.clone(), abs_d: f64::NAN, converged: false, error: Some(e.to_string()) },
            }
        }
        Ok(v) => ScanPoint { zeta: z.clone(), abs_d: v.value, converged: v.converged, error: None },
        Err(e) => ScanPoint { zeta: z.clone(), abs_d: f64::NAN, converged: false, error: Some(e.to_string()) },
    }
}

/// Objective on unconstrained coordinates: normalize and reflect `gamma`.
fn point_of(x: &[f64]) -> Frequency {
    let mut v = x.to_vec();
    let n = v.len();
    v[n - 1] = v[n - 1].abs();
    if v[n - 1] < 1e-9 {
        v[n - 1] = 0.0;
    }
    Frequency::from_vec(&v).normalized()
}

fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
        let spread = vals[n] - vals[0];
        if spread.abs() < 1e-15 && vals[0] < 1e-12 {
            break;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best].clone(), vals[best])
}

/// Grid scan of `|D|` over the closed half sphere with optional local refinement.
pub fn uniform_scan(bp: &BoundaryProblem, cfg: &ScanConfig) -> ScanResult {
    let opts = cfg.options.clone();
    let eval = move |z: &Frequency| lopatinski_det(bp, z, &opts);
    uniform_scan_with(&eval, bp.dim_eta(), cfg)
}

/// [`uniform_scan`] for an arbitrary determinant evaluator.
pub fn uniform_scan_with(eval: &Evaluator<'_>, dim_eta: usize, cfg: &ScanConfig) -> ScanResult {
    let zs: Vec<Frequency> = cfg.grid.points(dim_eta).into_iter().map(|(t, e, g)| Frequency::new(t, e, g)).collect();
    let points: Vec<ScanPoint> = zs.par_iter().map(|z| evaluate(eval, z, cfg.gamma_floor)).collect();
    let mut min_value = f64::INFINITY;
    let mut argmin = None;
    for p in &points {
        if p.abs_d < min_value {
            min_value = p.abs_d;
            argmin = Some(p.zeta.clone());
        }
    }
    let refined = if cfg.refine > 0 && !points.is_empty() {
        let mut order: Vec<usize> = (0..points.len()).filter(|&i| points[i].abs_d.is_finite()).collect();
        order.sort_by(|&a, &b| points[a].abs_d.total_cmp(&points[b].abs_d).then(a.cmp(&b)));
        let starts: Vec<usize> = order.into_iter().take(cfg.refine).collect();
        let step = 2.0 / (cfg.grid.directions.max(1) as f64).sqrt().max(1.0);
        let results: Vec<ScanPoint> = starts
            .par_iter()
            .map(|&i| {
                let obj = |x: &[f64]| {
                    let p = evaluate(eval, &point_of(x), cfg.gamma_floor);
                    if p.abs_d.is_finite() { p.abs_d } else { f64::INFINITY }
                };
                let (x, _) = nelder_mead(&obj, &points[i].zeta.to_vec(), step, cfg.refine_iterations);
                evaluate(eval, &point_of(&x), cfg.gamma_floor)
            })
            .collect();
        results.into_iter().filter(|p| p.abs_d.is_finite()).min_by(|a, b| a.abs_d.total_cmp(&b.abs_d))
    } else {
        None
    };
    ScanResult { points, min_value, argmin, gamma_floor: cfg.gamma_floor, refined }
}

/// Reduced boundary conditions on `E_0 + E_1`.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pub e0: SubspaceBasis,
    pub e1: SubspaceBasis,
    pub e0_minus: SubspaceBasis,
    pub e1_minus: SubspaceBasis,
    pub f0: SubspaceBasis,
    pub f1: SubspaceBasis,
    /// `pi_j M` on `E_j`, in orthonormal coordinates of `F_j` and `E_j`.
    pub m0: CMat,
    pub m1: CMat,
    pub delta0: f64,
    pub delta1: f64,
    /// `|pi_1 M E_{0,-}|`, zero by construction.
    pub coupling_defect: f64,
}

fn orthonormal(m: &CMat) -> SubspaceBasis {
    SubspaceBasis::new(spectral::range_basis(m, 1e-12))
}

/// `det(E_{j,-}, ker M_j)` computed inside `E_j`.
fn reduced_det(e: &SubspaceBasis, e_minus_coords: &CMat, mj: &CMat) -> Result<f64> {
    let k = spectral::nullspace(mj, 1e-10);
    if e_minus_coords.ncols() + k.ncols() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: e_minus_coords.ncols() + k.ncols() });
    }
    if e.dim() == 0 {
        return Ok(1.0);
    }
    spectral::subspace_determinant(&[e_minus_coords, &k])
}

/// Split `G(zeta)` by the clusters of `G(base)`: `e1` lists the cluster indices forming `E_1`.
pub fn reduce_boundary(bp: &BoundaryProblem, base: &Frequency, e1: &[usize], z: &Frequency) -> Result<ReducedPair> {
    let sym = bp.symbol();
    let reducer = BlockReducer::new(&sym.g(base)?, spectral::DEFAULT_CLUSTER_TOL)?;
    reduce_with(bp, &reducer, base, e1, z)
}

fn reduce_with(bp: &BoundaryProblem, reducer: &BlockReducer, base: &Frequency, e1: &[usize], z: &Frequency) -> Result<ReducedPair> {
    if !(z.gamma > 0.0) {
        return Err(Error::InvalidInput("reduced conditions are evaluated at gamma > 0".into()));
    }
    let sym = bp.symbol();
    let n = sym.dim();
    if e1.iter().any(|&k| k >= reducer.cluster_count()) {
        return Err(Error::InvalidInput("cluster index out of range".into()));
    }
    let g = sym.g(z)?;
    let red = reducer.reduce(&g)?;
    let (mut v0, mut v1) = (Vec::new(), Vec::new());
    for k in 0..reducer.cluster_count() {
        if e1.contains(&k) { v1.push(red.v[k].clone()) } else { v0.push(red.v[k].clone()) }
    }
    let join = |v: &[CMat]| if v.is_empty() { CMat::zeros(n, 0) } else { concat_columns(v) };
    let q0 = orthonormal(&join(&v0));
    let q1 = orthonormal(&join(&v1));
    let part = |q: &SubspaceBasis| -> Result<CMat> {
        if q.dim() == 0 {
            return Ok(CMat::zeros(0, 0));
        }
        let gq = q.basis.adjoint() * &g * &q.basis;
        Ok(spectral::half_plane_subspace(&gq, HalfPlane::ImNegative, 1e-14)?.basis)
    };
    let c0 = part(&q0)?;
    let c1 = part(&q1)?;
    let e0_minus = SubspaceBasis::new(&q0.basis * &c0);
    let e1_minus = SubspaceBasis::new(&q1.basis * &c1);
    let m = bp.boundary_matrix(z);
    // assumption: ker M(base) misses E_{0,-}(base)
    let me0 = &m * &e0_minus.basis;
    if e0_minus.dim() > 0 && spectral::rank(&me0, 1e-9) < e0_minus.dim() {
        return Err(Error::AssumptionFailure("ker M meets E_{0,-}".into()));
    }
    let f0 = orthonormal(&me0);
    let range_m = orthonormal(&m);
    let f1 = if f0.dim() == 0 {
        range_m.clone()
    } else {
        let proj = CMat::identity(m.nrows(), m.nrows()) - f0.projector();
        orthonormal(&(proj * &range_m.basis))
    };
    let m0 = f0.basis.adjoint() * &m * &q0.basis;
    let m1 = f1.basis.adjoint() * &m * &q1.basis;
    let coupling_defect = if f1.dim() > 0 && e0_minus.dim() > 0 { (f1.basis.adjoint() * &me0).norm() } else { 0.0 };
    let delta0 = reduced_det(&q0, &c0, &m0)?;
    let delta1 = reduced_det(&q1, &c1, &m1)?;
    let _ = base;
    Ok(ReducedPair { e0: q0, e1: q1, e0_minus, e1_minus, f0, f1, m0, m1, delta0, delta1, coupling_defect })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceSample {
    pub zeta: Frequency,
    pub full: f64,
    pub delta0: f64,
    pub delta1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub samples: Vec<EquivalenceSample>,
    pub threshold: f64,
    pub full_ok: bool,
    pub reduced_ok: bool,
    /// Verdicts agree at every sample.
    pub agree: bool,
    /// 0 or 1 when a reduced condition fails, naming the side.
    pub failing_side: Option<usize>,
}

/// Compare `|D|` with the reduced determinants sample by sample.
pub fn check_reduced_equivalence(bp: &BoundaryProblem, base: &Frequency, e1: &[usize], samples: &[Frequency], threshold: f64) -> Result<EquivalenceReport> {
    let reducer = BlockReducer::new(&bp.symbol().g(base)?, spectral::DEFAULT_CLUSTER_TOL)?;
    let opts = LopatinskiOptions::default();
    let rows: Vec<Result<EquivalenceSample>> = samples
        .par_iter()
        .map(|z| {
            let full = lopatinski_det(bp, z, &opts)?.value;
            let r = reduce_with(bp, &reducer, base, e1, z)?;
            Ok(EquivalenceSample { zeta: z.clone(), full, delta0: r.delta0, delta1: r.delta1 })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut agree = true;
    let mut failing_side = None;
    for s in &rows {
        let f = s.full > threshold;
        let r = s.delta0 > threshold && s.delta1 > threshold;
        agree &= f == r;
        if failing_side.is_none() {
            if s.delta0 <= threshold {
                failing_side = Some(0);
            } else if s.delta1 <= threshold {
                failing_side = Some(1);
            }
        }
    }
    let full_ok = rows.iter().all(|s| s.full > threshold);
    let reduced_ok = rows.iter().all(|s| s.delta0 > threshold && s.delta1 > threshold);
    Ok(EquivalenceReport { samples: rows, threshold, full_ok, reduced_ok, agree, failing_side })
}

/// Strictly dissipative boundary matrix for a Friedrichs system: the rows are
/// `q^T S^{1/2}` for the eigenvectors `q` of `S^{-1/2} (S A_d) S^{-1/2}` with
/// positive eigenvalue, so `ker M` is where `u^T S A_d u < 0`.
pub fn dissipative_boundary(sys: &HyperbolicSystem) -> Result<CMat> {
    let s = sys.symmetrizer().ok_or(Error::MissingSymmetrizer)?;
    let es = s.clone().symmetric_eigen();
    if es.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidInput("symmetrizer is not positive definite".into()));
    }
    let root = &es.eigenvectors * spectral::RMat::from_diagonal(&es.eigenvalues.map(f64::sqrt)) * es.eigenvectors.transpose();
    let inv_root = &es.eigenvectors * spectral::RMat::from_diagonal(&es.eigenvalues.map(|l| 1.0 / l.sqrt())) * es.eigenvectors.transpose();
    let sa = s * sys.boundary_matrix();
    let sym = (&sa + sa.transpose()) * 0.5;
    let c = &inv_root * sym * &inv_root;
    let ec = c.symmetric_eigen();
    let rows: Vec<usize> = (0..ec.eigenvalues.len()).filter(|&i| ec.eigenvalues[i] > 0.0).collect();
    let n = sys.dim();
    let mut m = spectral::RMat::zeros(rows.len(), n);
    for (r, &i) in rows.iter().enumerate() {
        let row = ec.eigenvectors.column(i).transpose() * &root;
        m.set_row(r, &row);
    }
    Ok(spectral::to_complex(&m))
}

/// `sigma_min` of `M` restricted to `E_-`: the constant in `|h| <= C |M h|`.
pub fn boundary_injectivity(bp: &BoundaryProblem, z: &Frequency, gap: f64) -> Result<f64> {
    let e = negative_space(bp.symbol(), z, gap)?;
    let me = bp.boundary_matrix(z) * &e.basis;
    Ok(spectral::singular_values(&me).last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RMat;
    use num_complex::Complex64;

    fn wave() -> HyperbolicSystem {
        let b = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let a = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        HyperbolicSystem::new(vec![b, a], Some(RMat::identity(2, 2))).unwrap()
    }

    fn row(c: f64) -> CMat {
        CMat::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(-c, 0.0)])
    }

    #[test]
    fn dissipative_condition_is_uniform() {
        let bp = BoundaryProblem::constant(&wave(), row(0.0)).unwrap();
        let cfg = ScanConfig { grid: FrequencyGrid::with_ladder(40, 4, 1e-2, 0.5), ..Default::default() };
        let r = uniform_scan(&bp, &cfg);
        assert!(r.min_value > 0.1, "{}", r.min_value);
    }

    #[test]
    fn failing_condition_found() {
        let bp = BoundaryProblem::constant(&wave(), row(1.5)).unwrap();
        let cfg = ScanConfig { grid: FrequencyGrid::with_ladder(40, 4, 1e-2, 0.5), refine: 3, ..Default::default() };
        let r = uniform_scan(&bp, &cfg);
        assert!(r.overall_min() < 1e-6, "{}", r.overall_min());
    }

    #[test]
    fn dissipative_boundary_has_incoming_rank() {
        let m = dissipative_boundary(&wave()).unwrap();
        assert_eq!(m.nrows(), 1);
        let bp = BoundaryProblem::constant(&wave(), m).unwrap();
        let v = lopatinski_det(&bp, &Frequency::new(0.6, vec![0.0], 0.8), &LopatinskiOptions::default()).unwrap();
        assert!(v.value > 0.5);
    }

    #[test]
    fn wrong_shape_rejected() {
        let m = CMat::zeros(2, 2);
        assert!(BoundaryProblem::constant(&wave(), m).is_err());
    }
}
