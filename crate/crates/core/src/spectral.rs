//! Dense complex spectral toolkit: ordered Schur forms, Riesz projectors,
//! half-plane invariant subspaces and smooth block reduction.

use nalgebra::linalg::Hessenberg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative cluster tolerance.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;
/// Default distance below which an eigenvalue counts as lying on a dividing line.
pub const DEFAULT_GAP: f64 = 1e-10;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn check_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == C0 {
        return (1.0, C0);
    }
    if x == C0 {
        return (0.0, C1);
    }
    let ax = x.norm();
    let nrm = ax.hypot(y.norm());
    (ax / nrm, (x / ax) * y.conj() / nrm)
}

fn rot_rows(m: &mut CMat, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = a * c + s * b;
        m[(k + 1, j)] = -s.conj() * a + b * c;
    }
}

fn rot_cols(m: &mut CMat, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = a * c + b * s.conj();
        m[(i, k + 1)] = -a * s + b * c;
    }
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let disc = (p * p + b * c).sqrt();
    let den = if (p + disc).norm() >= (p - disc).norm() { p + disc } else { p - disc };
    if den == C0 {
        d
    } else {
        d - b * c / den
    }
}

/// Complex Schur form `A = Q T Q^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMat,
    pub t: CMat,
}

impl Schur {
    pub fn new(a: &CMat) -> Result<Self> {
        let n = check_square(a)?;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if n == 0 {
            return Ok(Schur { q: CMat::zeros(0, 0), t: CMat::zeros(0, 0) });
        }
        if n == 1 {
            return Ok(Schur { q: identity(1), t: a.clone() });
        }
        let (mut q, mut h) = Hessenberg::new(a.clone()).unpack();
        for i in 2..n {
            for j in 0..i - 1 {
                h[(i, j)] = C0;
            }
        }
        let norm = h.norm();
        if norm == 0.0 {
            return Ok(Schur { q, t: h });
        }
        let eps = f64::EPSILON;
        let max_iter = 100 * n.max(10);
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            let mut l = hi;
            while l > 0 {
                let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
                if s == 0.0 {
                    s = norm;
                }
                if h[(l, l - 1)].norm() <= eps * s {
                    h[(l, l - 1)] = C0;
                    break;
                }
                l -= 1;
            }
            if l == hi {
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > max_iter {
                return Err(Error::EigenSolverFailure { iterations: total });
            }
            let shift = if iter % 10 == 0 {
                h[(hi, hi)] + Complex64::new(0.75, 0.4) * h[(hi, hi - 1)].norm()
            } else {
                wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
            };
            for k in l..hi {
                let (x, y) = if k == l {
                    (h[(l, l)] - shift, h[(l + 1, l)])
                } else {
                    (h[(k, k - 1)], h[(k + 1, k - 1)])
                };
                let (c, s) = givens(x, y);
                let start = if k == l { k } else { k - 1 };
                rot_rows(&mut h, k, c, s, start..n);
                rot_cols(&mut h, k, c, s, 0..(k + 3).min(hi + 1));
                rot_cols(&mut q, k, c, s, 0..n);
                if k > l {
                    h[(k + 1, k - 1)] = C0;
                }
            }
        }
        for i in 1..n {
            for j in 0..i {
                h[(i, j)] = C0;
            }
        }
        Ok(Schur { q, t: h })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.t[(i, i)]).collect()
    }

    fn swap(&mut self, k: usize) {
        let n = self.dim();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        if t11 == t22 {
            return;
        }
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rot_rows(&mut self.t, k, c, s, k..n);
        rot_cols(&mut self.t, k, c, s, 0..k + 2);
        rot_cols(&mut self.q, k, c, s, 0..n);
        self.t[(k + 1, k)] = C0;
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }

    /// Move the selected diagonal entries to the leading block, keeping
    /// relative order inside both groups.
    pub fn reorder(&mut self, select: &[bool]) {
        let n = self.dim();
        assert_eq!(select.len(), n);
        let mut flags = select.to_vec();
        let mut front = 0;
        for j in 0..n {
            if flags[j] {
                for k in (front..j).rev() {
                    self.swap(k);
                    flags.swap(k, k + 1);
                }
                front += 1;
            }
        }
    }

    pub fn reconstruct(&self) -> CMat {
        &self.q * &self.t * self.q.adjoint()
    }
}

/// Solve `T11 Y - Y T22 = C` for upper-triangular `T11`, `T22`.
pub fn solve_triangular_sylvester(t11: &CMat, t22: &CMat, c: &CMat) -> Result<CMat> {
    let k = t11.nrows();
    let m = t22.nrows();
    let mut y = CMat::zeros(k, m);
    for j in 0..m {
        let mut rhs: Vec<Complex64> = (0..k).map(|i| c[(i, j)]).collect();
        for l in 0..j {
            let f = t22[(l, j)];
            if f != C0 {
                for i in 0..k {
                    rhs[i] += y[(i, l)] * f;
                }
            }
        }
        let mu = t22[(j, j)];
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for p in i + 1..k {
                acc -= t11[(i, p)] * y[(p, j)];
            }
            let den = t11[(i, i)] - mu;
            if den.norm() == 0.0 {
                return Err(Error::ClusterCollision("Sylvester operator is singular".into()));
            }
            y[(i, j)] = acc / den;
        }
    }
    Ok(y)
}

/// Riesz projector onto the invariant subspace of the selected Schur eigenvalues,
/// together with an orthonormal basis of its range.
pub fn riesz_projector(schur: &Schur, select: &[bool]) -> Result<(CMat, CMat)> {
    let n = schur.dim();
    let k = select.iter().filter(|&&b| b).count();
    let mut s = schur.clone();
    s.reorder(select);
    let basis = s.q.columns(0, k).into_owned();
    if k == 0 {
        return Ok((CMat::zeros(n, n), basis));
    }
    if k == n {
        return Ok((identity(n), basis));
    }
    let t11 = s.t.view((0, 0), (k, k)).into_owned();
    let t12 = s.t.view((0, k), (k, n - k)).into_owned();
    let t22 = s.t.view((k, k), (n - k, n - k)).into_owned();
    let y = solve_triangular_sylvester(&t11, &t22, &(-t12))?;
    let mut ps = CMat::zeros(n, n);
    for i in 0..k {
        ps[(i, i)] = C1;
        for j in 0..n - k {
            ps[(i, k + j)] = -y[(i, j)];
        }
    }
    Ok((&s.q * ps * s.q.adjoint(), basis))
}

/// A group of eigenvalues merged at a given tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub center: Complex64,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// Single-linkage clustering of eigenvalues at absolute tolerance `tol`.
/// Clusters are ordered by real part, then imaginary part, of their centers.
pub fn cluster_eigenvalues(eigs: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= tol {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|members| {
            let sum: Complex64 = members.iter().map(|&i| eigs[i]).sum();
            let center = sum / members.len() as f64;
            Cluster { members, center }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.center
            .re
            .partial_cmp(&b.center.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.center.im.partial_cmp(&b.center.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    clusters
}

/// Eigenvalue clusters of a matrix with their Riesz projectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub schur: Schur,
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    pub projectors: Vec<CMat>,
    pub bases: Vec<CMat>,
    pub tol: f64,
}

fn scale_of(m: &CMat) -> f64 {
    m.norm().max(f64::MIN_POSITIVE)
}

impl SpectralDecomposition {
    /// Decompose with relative cluster tolerance `tol_rel` (scaled by the Frobenius norm).
    pub fn new(m: &CMat, tol_rel: f64) -> Result<Self> {
        let schur = Schur::new(m)?;
        let eigenvalues = schur.eigenvalues();
        let tol = tol_rel * scale_of(m);
        let clusters = cluster_eigenvalues(&eigenvalues, tol);
        let mut projectors = Vec::with_capacity(clusters.len());
        let mut bases = Vec::with_capacity(clusters.len());
        for c in &clusters {
            let mut select = vec![false; eigenvalues.len()];
            for &i in &c.members {
                select[i] = true;
            }
            let (p, b) = riesz_projector(&schur, &select)?;
            projectors.push(p);
            bases.push(b);
        }
        Ok(SpectralDecomposition { schur, eigenvalues, clusters, projectors, bases, tol })
    }
}

pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    Ok(Schur::new(m)?.eigenvalues())
}

/// Which open half of the complex plane to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HalfPlane {
    ImNegative,
    ImPositive,
    ReNegative,
    RePositive,
}

impl HalfPlane {
    fn signed(&self, z: Complex64) -> f64 {
        match self {
            HalfPlane::ImNegative => -z.im,
            HalfPlane::ImPositive => z.im,
            HalfPlane::ReNegative => -z.re,
            HalfPlane::RePositive => z.re,
        }
    }
}

/// Orthonormal basis of a subspace of `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub basis: CMat,
}

impl SubspaceBasis {
    pub fn new(basis: CMat) -> Self {
        SubspaceBasis { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// Largest principal angle; `pi/2` when dimensions differ.
    pub fn distance(&self, other: &SubspaceBasis) -> f64 {
        if self.dim() != other.dim() {
            return std::f64::consts::FRAC_PI_2;
        }
        if self.dim() == 0 {
            return 0.0;
        }
        let resid = &other.basis - &self.basis * (self.basis.adjoint() * &other.basis);
        let s = spectral_norm(&resid).min(1.0);
        s.asin()
    }
}

/// Invariant subspace of the eigenvalues in the open half plane.
pub fn half_plane_subspace(m: &CMat, half: HalfPlane, gap: f64) -> Result<SubspaceBasis> {
    let schur = Schur::new(m)?;
    half_plane_from_schur(&schur, half, gap)
}

pub fn half_plane_from_schur(schur: &Schur, half: HalfPlane, gap: f64) -> Result<SubspaceBasis> {
    let eigs = schur.eigenvalues();
    let mut select = Vec::with_capacity(eigs.len());
    for z in &eigs {
        let d = half.signed(*z);
        if d.abs() < gap {
            return Err(Error::OnBoundary { distance: d.abs(), threshold: gap });
        }
        select.push(d > 0.0);
    }
    let k = select.iter().filter(|&&b| b).count();
    let mut s = schur.clone();
    s.reorder(&select);
    Ok(SubspaceBasis::new(s.q.columns(0, k).into_owned()))
}

/// `|det [B_1 | B_2 | ...]|` for column blocks that together form a square matrix.
pub fn subspace_determinant(blocks: &[&CMat]) -> Result<f64> {
    let n = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    if blocks.iter().any(|b| b.nrows() != n) || total != n {
        return Err(Error::DimensionMismatch { expected: n, found: total });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut m = CMat::zeros(n, n);
    let mut col = 0;
    for b in blocks {
        m.view_mut((0, col), (n, b.ncols())).copy_from(*b);
        col += b.ncols();
    }
    Ok(m.lu().determinant().norm())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the null space, threshold `tol_rel` relative to the
/// largest singular value (absolute when the matrix vanishes).
pub fn nullspace(m: &CMat, tol_rel: f64) -> CMat {
    let (r, c) = m.shape();
    if c == 0 {
        return CMat::zeros(0, 0);
    }
    let rows = r.max(c);
    let mut sq = CMat::zeros(rows, c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thr = tol_rel * smax.max(1e-300);
    let idx: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= thr).collect();
    let mut out = CMat::zeros(c, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        for j in 0..c {
            out[(j, k)] = vt[(i, j)].conj();
        }
    }
    out
}

/// Orthonormal basis of the column range.
pub fn range_basis(m: &CMat, tol_rel: f64) -> CMat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMat::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMat::zeros(r, 0);
    }
    let mut idx: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol_rel * smax).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out = CMat::zeros(r, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span.
pub fn orth_complement(basis: &CMat, tol_rel: f64) -> CMat {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return identity(n);
    }
    nullspace(&basis.adjoint(), tol_rel)
}

/// Numerical rank with threshold relative to the largest singular value.
pub fn rank(m: &CMat, tol_rel: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol_rel * smax).count()
}

/// Hermitian part `(M + M^H)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `Im M = (M - M^H)/(2i)`, a Hermitian matrix.
pub fn imaginary_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Eigenvalues of the Hermitian part, increasing.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn hermitian_min_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

pub fn hermitian_max_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Inverse through LU; `Singular` when the pivot product vanishes.
pub fn inverse(m: &CMat) -> Result<CMat> {
    check_square(m)?;
    m.clone().try_inverse().ok_or_else(|| Error::Singular("matrix is not invertible".into()))
}

pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    check_square(a)?;
    a.clone().lu().solve(b).ok_or_else(|| Error::Singular("linear system is singular".into()))
}

/// Smooth block reduction near a base matrix.
///
/// Each base cluster `k` keeps a fixed basis `B_k` of its invariant subspace;
/// at a nearby matrix the gauge is `V_k = P_k B_k`,
/// `W_k = (B_k^H P_k B_k)^{-1} B_k^H P_k`.
#[derive(Debug, Clone)]
pub struct BlockReducer {
    pub centers: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub base_bases: Vec<CMat>,
    pub base: SpectralDecomposition,
}

/// Blocks `W_k M V_k` with their gauges.
#[derive(Debug, Clone)]
pub struct BlockReduction {
    pub v: Vec<CMat>,
    pub w: Vec<CMat>,
    pub blocks: Vec<CMat>,
    pub projectors: Vec<CMat>,
}

impl BlockReduction {
    /// Block-diagonal assembly `diag(M_1, ..., M_K)`.
    pub fn block_diagonal(&self) -> CMat {
        let n: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let mut out = CMat::zeros(n, n);
        let mut o = 0;
        for b in &self.blocks {
            out.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
            o += b.nrows();
        }
        out
    }

    /// `[V_1 | ... | V_K]`.
    pub fn v_all(&self) -> CMat {
        concat_columns(&self.v)
    }
}

pub fn concat_columns(mats: &[CMat]) -> CMat {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let total: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(n, total);
    let mut c = 0;
    for m in mats {
        out.view_mut((0, c), (n, m.ncols())).copy_from(m);
        c += m.ncols();
    }
    out
}

impl BlockReducer {
    pub fn new(base: &CMat, tol_rel: f64) -> Result<Self> {
        let dec = SpectralDecomposition::new(base, tol_rel)?;
        let centers = dec.clusters.iter().map(|c| c.center).collect();
        let multiplicities = dec.clusters.iter().map(|c| c.multiplicity()).collect();
        let base_bases = dec.bases.clone();
        Ok(BlockReducer { centers, multiplicities, base_bases, base: dec })
    }

    /// Replace the fixed basis of cluster `k` (must span the same subspace).
    pub fn with_basis(mut self, k: usize, basis: CMat) -> Result<Self> {
        if basis.ncols() != self.multiplicities[k] || basis.nrows() != self.base.eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: self.multiplicities[k], found: basis.ncols() });
        }
        let resid = (&self.base.projectors[k] * &basis - &basis).norm() / basis.norm().max(1e-300);
        if resid > 1e-8 {
            return Err(Error::InvalidInput(format!("basis leaves the invariant subspace (residual {resid:.2e})")));
        }
        self.base_bases[k] = basis;
        Ok(self)
    }

    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }

    /// Index of the base cluster nearest to `z`.
    pub fn cluster_near(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (k, c) in self.centers.iter().enumerate() {
            let d = (c - z).norm();
            if d < bd {
                bd = d;
                best = k;
            }
        }
        best
    }

    pub fn reduce(&self, m: &CMat) -> Result<BlockReduction> {
        let n = check_square(m)?;
        if n != self.base.eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: self.base.eigenvalues.len(), found: n });
        }
        let schur = Schur::new(m)?;
        let eigs = schur.eigenvalues();
        let kc = self.centers.len();
        let mut min_sep = f64::INFINITY;
        for a in 0..kc {
            for b in a + 1..kc {
                min_sep = min_sep.min((self.centers[a] - self.centers[b]).norm());
            }
        }
        let mut assign = vec![0usize; n];
        for (i, z) in eigs.iter().enumerate() {
            let k = self.cluster_near(*z);
            if kc > 1 && (self.centers[k] - z).norm() > 0.5 * min_sep {
                return Err(Error::ClusterCollision(
                    "perturbation exceeds half of the base spectral gap".into(),
                ));
            }
            assign[i] = k;
        }
        let mut out = BlockReduction { v: Vec::new(), w: Vec::new(), blocks: Vec::new(), projectors: Vec::new() };
        for k in 0..kc {
            let select: Vec<bool> = assign.iter().map(|&a| a == k).collect();
            let cnt = select.iter().filter(|&&b| b).count();
            if cnt != self.multiplicities[k] {
                return Err(Error::ClusterCollision(format!(
                    "cluster {k} holds {cnt} eigenvalues, expected {}",
                    self.multiplicities[k]
                )));
            }
            let (p, _) = riesz_projector(&schur, &select)?;
            let b = &self.base_bases[k];
            let v = &p * b;
            let g = b.adjoint() * &v;
            let ginv = inverse(&g).map_err(|_| Error::ClusterCollision("gauge lost rank".into()))?;
            let w = ginv * b.adjoint() * &p;
            let blk = &w * m * &v;
            out.v.push(v);
            out.w.push(w);
            out.blocks.push(blk);
            out.projectors.push(p);
        }
        Ok(out)
    }
}

/// Matrix exponential.
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        CMat::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn schur_reconstructs() {
        for n in [1, 2, 3, 5, 8, 14] {
            let a = sample(n, n as u64 + 3);
            let s = Schur::new(&a).unwrap();
            assert!((s.reconstruct() - &a).norm() < 1e-12 * a.norm());
            assert!((s.q.adjoint() * &s.q - identity(n)).norm() < 1e-12);
            for i in 1..n {
                for j in 0..i {
                    assert_eq!(s.t[(i, j)], C0);
                }
            }
        }
    }

    #[test]
    fn schur_handles_jordan_and_zero() {
        let z = CMat::zeros(3, 3);
        assert!(Schur::new(&z).is_ok());
        let mut j = CMat::zeros(4, 4);
        for i in 0..3 {
            j[(i, i + 1)] = C1;
        }
        let s = Schur::new(&j).unwrap();
        assert!((s.reconstruct() - &j).norm() < 1e-14);
    }

    #[test]
    fn reorder_keeps_similarity() {
        let a = sample(6, 11);
        let mut s = Schur::new(&a).unwrap();
        let before = s.eigenvalues();
        let select: Vec<bool> = before.iter().map(|z| z.im < 0.0).collect();
        s.reorder(&select);
        assert!((s.reconstruct() - &a).norm() < 1e-12 * a.norm());
        let k = select.iter().filter(|&&b| b).count();
        for (i, z) in s.eigenvalues().iter().enumerate() {
            assert_eq!(z.im < 0.0, i < k);
        }
    }

    #[test]
    fn projector_is_idempotent_and_commutes() {
        let a = sample(7, 5);
        let dec = SpectralDecomposition::new(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let mut sum = CMat::zeros(7, 7);
        for p in &dec.projectors {
            assert!((p * p - p).norm() < 1e-10);
            assert!((p * &a - &a * p).norm() < 1e-10);
            sum += p;
        }
        assert!((sum - identity(7)).norm() < 1e-10);
    }

    #[test]
    fn half_plane_rejects_axis_eigenvalue() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]));
        assert!(matches!(half_plane_subspace(&m, HalfPlane::ImNegative, 1e-10), Err(Error::OnBoundary { .. })));
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = CMat::from_row_slice(1, 3, &[C1, c(2.0, 0.0), C0]);
        let k = nullspace(&m, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-14);
    }

    #[test]
    fn block_reduction_tracks_perturbation() {
        let base = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]));
        let red = BlockReducer::new(&base, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(red.multiplicities, vec![1, 2]);
        let pert = &base + sample(3, 9) * c(1e-3, 0.0);
        let r = red.reduce(&pert).unwrap();
        for k in 0..2 {
            assert!((&pert * &r.v[k] - &r.v[k] * &r.blocks[k]).norm() < 1e-12);
            assert!((&r.w[k] * &r.v[k] - identity(r.v[k].ncols())).norm() < 1e-12);
        }
        let r0 = red.reduce(&base).unwrap();
        assert!((&r0.v[1] - &red.base_bases[1]).norm() < 1e-12);
    }
}
