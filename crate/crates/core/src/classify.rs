//! Multiplicities, regularity and glancing classification of real
//! characteristic roots `(tau, xi)` of `det(tau Id + A(xi)) = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::sphere_directions;
use crate::spectral::{self, riesz_projector, to_complex, CMat, Schur, SpectralDecomposition};
use crate::symbol::{self, frequency_scale, root_order, HyperbolicSystem, TangentSystem};

/// Regularity verdict for a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularity {
    Simple,
    GeometricallyRegular,
    AlgebraicallyRegular,
    LinearlySplitting { codim: usize },
    Undetermined,
}

/// Numerical evidence collected while classifying.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RegularityEvidence {
    /// Dimension of the directions along which the tangent symbol is scalar.
    pub scalar_kernel_dim: Option<usize>,
    pub tangent_scalar: Option<bool>,
    /// Log-log slopes of the branch spread along the sampled rays.
    pub spread_slopes: Vec<f64>,
    /// Relative variation of `spread / s^2` for quadratic splitting.
    pub quadratic_fit_variation: Option<f64>,
    /// Largest distance between extrapolated branch projectors of two rays.
    pub projector_variation: Option<f64>,
    /// Same comparison for the eigenprojectors of the tangent symbol.
    pub tangent_projector_variation: Option<f64>,
    pub constant_multiplicity: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootClassification {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub regularity: Regularity,
    pub evidence: RegularityEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub directions: usize,
    pub s_max: f64,
    pub s_min: f64,
    pub steps: usize,
    pub agreement_tol: f64,
    pub cluster_tol: f64,
    pub rank_tol: f64,
    pub multiplicity_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            directions: 64,
            s_max: 1e-2,
            s_min: 1e-6,
            steps: 9,
            agreement_tol: 1e-5,
            cluster_tol: spectral::DEFAULT_CLUSTER_TOL,
            rank_tol: 1e-8,
            multiplicity_tol: 1e-9,
        }
    }
}

impl ClassifyOptions {
    fn ladder(&self, s_max: f64) -> Vec<f64> {
        let n = self.steps.max(2);
        let hi = s_max.min(self.s_max);
        let lo = self.s_min.min(hi);
        (0..n).map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64)).collect()
    }
}

/// Algebraic multiplicity of `-tau` as an eigenvalue of `A(xi)`, read from
/// the exact characteristic polynomial and checked against eigenvalue clusters.
pub fn algebraic_multiplicity(sys: &HyperbolicSystem, tau: f64, xi: &[f64], opts: &ClassifyOptions) -> Result<usize> {
    let p = symbol::char_poly(sys)?;
    let mut pt = vec![tau];
    pt.extend_from_slice(xi);
    let coeffs = p.shift(&pt).specialize(0, &vec![0.0; pt.len()]);
    let s = frequency_scale(sys, tau, xi);
    let alg = root_order(&coeffs, s, opts.multiplicity_tol);
    let (dec, k) = symbol::root_cluster(sys, tau, xi, opts.cluster_tol)?;
    let cm = dec.clusters[k].multiplicity();
    if alg == 0 {
        return Err(Error::NotCharacteristic(coeffs[0].abs()));
    }
    if alg != cm {
        return Err(Error::MultiplicityMismatch(format!("polynomial order {alg}, eigenvalue cluster size {cm}")));
    }
    Ok(alg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicities {
    pub algebraic: usize,
    pub geometric: usize,
    pub semi_simple: bool,
}

/// Algebraic and geometric multiplicity of the root `(tau, xi)`.
pub fn multiplicities(sys: &HyperbolicSystem, tau: f64, xi: &[f64], opts: &ClassifyOptions) -> Result<Multiplicities> {
    let algebraic = algebraic_multiplicity(sys, tau, xi, opts)?;
    let geometric = symbol::geometric_multiplicity(sys, tau, xi, opts.rank_tol).min(algebraic);
    Ok(Multiplicities { algebraic, geometric, semi_simple: algebraic == geometric })
}

fn nearest(eigs: &[Complex64], lambda: Complex64, m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eigs.len()).collect();
    idx.sort_by(|&a, &b| (eigs[a] - lambda).norm().partial_cmp(&(eigs[b] - lambda).norm()).unwrap());
    let mut sel: Vec<usize> = idx.into_iter().take(m).collect();
    sel.sort_by(|&a, &b| {
        eigs[a].re.partial_cmp(&eigs[b].re).unwrap().then(eigs[a].im.partial_cmp(&eigs[b].im).unwrap())
    });
    sel
}

fn spread(v: &[Complex64]) -> (f64, f64) {
    let mut mx = 0.0f64;
    let mut mn = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = (v[i] - v[j]).norm();
            mx = mx.max(d);
            mn = mn.min(d);
        }
    }
    (mx, mn)
}

fn shifted(xi: &[f64], w: &[f64], s: f64) -> Vec<f64> {
    xi.iter().zip(w).map(|(a, b)| a + s * b).collect()
}

/// Branch eigenvalues of an `m`-fold cluster near `lambda` at a matrix.
fn branches(a: &CMat, lambda: Complex64, m: usize) -> Result<Vec<Complex64>> {
    let eigs = spectral::eigenvalues(a)?;
    Ok(nearest(&eigs, lambda, m).into_iter().map(|i| eigs[i]).collect())
}

/// Rank-one projectors of the branches (ordered by real part).
fn branch_projectors(a: &CMat, lambda: Complex64, m: usize) -> Result<Vec<CMat>> {
    let schur = Schur::new(a)?;
    let eigs = schur.eigenvalues();
    let sel = nearest(&eigs, lambda, m);
    let mut out = Vec::with_capacity(m);
    for i in sel {
        let mut mask = vec![false; eigs.len()];
        mask[i] = true;
        out.push(riesz_projector(&schur, &mask)?.0);
    }
    Ok(out)
}

/// Eigenprojectors of a matrix with simple spectrum, ordered by real part.
fn simple_projectors(a: &CMat) -> Result<Vec<CMat>> {
    let dec = SpectralDecomposition::new(a, 1e-12)?;
    if dec.clusters.len() != a.nrows() {
        return Err(Error::NotStrictlyHyperbolic);
    }
    Ok(dec.projectors)
}

/// `min_perm max_i |a_i - b_perm(i)|_F`.
pub fn projector_set_distance(a: &[CMat], b: &[CMat]) -> f64 {
    fn rec(a: &[CMat], b: &[CMat], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let d = (&a[i] - &b[j]).norm();
                rec(a, b, used, i + 1, cur.max(d), best);
                used[j] = false;
            }
        }
    }
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Traceless part of a square matrix.
fn traceless(a: &CMat) -> CMat {
    let m = a.nrows();
    let tr = a.trace() / m as f64;
    a - CMat::identity(m, m) * tr
}

/// Orthonormal basis (real) of `{omega : traceless(A'(omega)) = 0}` and of its complement.
fn scalar_kernel(t: &TangentSystem, tol: f64, sys_scale: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = t.coeffs.len();
    let m = t.multiplicity;
    let cols: Vec<CMat> = t.coeffs.iter().map(traceless).collect();
    let mut lin = nalgebra::DMatrix::<f64>::zeros(2 * m * m, d);
    for (j, c) in cols.iter().enumerate() {
        for (k, z) in c.iter().enumerate() {
            lin[(k, j)] = z.re;
            lin[(m * m + k, j)] = z.im;
        }
    }
    let scale = t.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(sys_scale);
    let mut sq = nalgebra::DMatrix::<f64>::zeros(lin.nrows().max(d), d);
    sq.view_mut((0, 0), lin.shape()).copy_from(&lin);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut ker = Vec::new();
    let mut comp = Vec::new();
    for i in 0..svd.singular_values.len() {
        let row: Vec<f64> = (0..d).map(|j| vt[(i, j)]).collect();
        if svd.singular_values[i] <= tol * scale {
            ker.push(row);
        } else {
            comp.push(row);
        }
    }
    (ker, comp)
}

/// Classify the real root `(tau, xi)`.
pub fn classify_regularity(sys: &HyperbolicSystem, tau: f64, xi: &[f64], opts: &ClassifyOptions) -> Result<RootClassification> {
    let alg = algebraic_multiplicity(sys, tau, xi, opts)?;
    let geo = symbol::geometric_multiplicity(sys, tau, xi, opts.rank_tol);
    let mut ev = RegularityEvidence::default();
    let out = |reg: Regularity, ev: RegularityEvidence| RootClassification {
        tau,
        xi: xi.to_vec(),
        multiplicity: alg,
        geometric_multiplicity: geo,
        regularity: reg,
        evidence: ev,
    };
    if alg == 1 {
        return Ok(out(Regularity::Simple, ev));
    }
    let lambda = Complex64::new(-tau, 0.0);
    let a0 = sys.symbol_c(xi);
    let d = sys.space_dim();
    let scale = frequency_scale(sys, tau, xi);
    let coeff_norm: f64 = sys.coeffs().iter().map(|a| a.norm()).sum();
    let eigs = spectral::eigenvalues(&a0)?;
    let sel = nearest(&eigs, lambda, alg);
    let others_gap = (0..eigs.len())
        .filter(|i| !sel.contains(i))
        .map(|i| (eigs[i] - lambda).norm())
        .fold(f64::INFINITY, f64::min);
    // eigenvalues move at most |A(w)| <= sqrt(d) max_j |A_j|_2 per unit step
    let speed = (d as f64).sqrt() * sys.coeffs().iter().map(|a| spectral::spectral_norm(&to_complex(a))).fold(0.0, f64::max);
    let s_cap = if others_gap.is_finite() { others_gap / (4.0 * speed.max(1e-300)) } else { opts.s_max };
    let ladder = opts.ladder(s_cap);
    let dirs = sphere_directions(d, opts.directions);
    let floor = 1e3 * f64::EPSILON * scale;

    // spreads along every ray
    let mut spreads: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(dirs.len());
    for w in &dirs {
        let mut row = Vec::with_capacity(ladder.len());
        for &s in &ladder {
            let b = branches(&sys.symbol_c(&shifted(xi, w, s)), lambda, alg)?;
            let (mx, mn) = spread(&b);
            row.push((s, mx, mn));
        }
        spreads.push(row);
    }
    let max_spread = spreads.iter().flatten().map(|r| r.1).fold(0.0, f64::max);
    for row in &spreads {
        let pts: Vec<(f64, f64)> = row.iter().filter(|r| r.1 > floor).map(|r| (r.0, r.1)).collect();
        if let Some(p) = loglog_slope(&pts) {
            ev.spread_slopes.push(p);
        }
    }

    if geo < alg {
        ev.notes.push("root is not semi-simple".into());
        if max_spread <= 1e-10 * scale {
            ev.constant_multiplicity = true;
            return Ok(out(Regularity::AlgebraicallyRegular, ev));
        }
        return Ok(out(Regularity::Undetermined, ev));
    }

    let tangent = symbol::tangent_system_with(sys, tau, xi, opts.cluster_tol, opts.rank_tol)?;
    let (ker, comp) = scalar_kernel(&tangent, 1e-8, coeff_norm);
    ev.scalar_kernel_dim = Some(ker.len());
    let scalar = comp.is_empty();
    ev.tangent_scalar = Some(scalar);

    if scalar {
        if max_spread <= 1e-10 * scale {
            ev.constant_multiplicity = true;
            ev.notes.push("constant multiplicity along all sampled rays".into());
            // eigenvectors persist if the multiplicity stays geometric
            let w = &dirs[0];
            let p = shifted(xi, w, ladder[0]);
            let lam = branches(&sys.symbol_c(&p), lambda, alg)?;
            let mean: Complex64 = lam.iter().sum::<Complex64>() / alg as f64;
            let g = symbol::geometric_multiplicity(sys, -mean.re, &p, 1e-6);
            return Ok(out(if g == alg { Regularity::GeometricallyRegular } else { Regularity::AlgebraicallyRegular }, ev));
        }
        let finite: Vec<f64> = ev.spread_slopes.clone();
        if finite.is_empty() || finite.iter().any(|p| (p - 2.0).abs() > 0.3) {
            ev.notes.push("branch spread is not quadratic along every ray".into());
            return Ok(out(Regularity::Undetermined, ev));
        }
        // quadratic fit spread / s^2
        let mut fit_var = 0.0f64;
        for row in &spreads {
            let q: Vec<f64> = row.iter().filter(|r| r.1 > 1e6 * floor).map(|r| r.1 / (r.0 * r.0)).collect();
            if q.len() >= 2 {
                let mx = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mn = q.iter().cloned().fold(f64::INFINITY, f64::min);
                fit_var = fit_var.max((mx - mn) / mx.abs().max(1e-300));
            }
        }
        ev.quadratic_fit_variation = Some(fit_var);
        // extrapolated branch projectors per ray
        let gap_target = 1e-9 * scale;
        let mut sets: Vec<Vec<CMat>> = Vec::new();
        for (w, row) in dirs.iter().zip(&spreads) {
            let Some(&(s, _, _)) = row.iter().rev().find(|r| r.2 > gap_target) else {
                continue;
            };
            let p1 = branch_projectors(&sys.symbol_c(&shifted(xi, w, s)), lambda, alg)?;
            let p2 = branch_projectors(&sys.symbol_c(&shifted(xi, w, 0.5 * s)), lambda, alg)?;
            let ext: Vec<CMat> = p1.iter().zip(&p2).map(|(a, b)| b * Complex64::new(2.0, 0.0) - a).collect();
            sets.push(ext);
        }
        if sets.len() < 2 {
            ev.notes.push("too few rays with resolvable branches".into());
            return Ok(out(Regularity::Undetermined, ev));
        }
        let var = sets.iter().skip(1).map(|s| projector_set_distance(&sets[0], s)).fold(0.0, f64::max);
        ev.projector_variation = Some(var);
        let reg = if var > 1e-2 {
            Regularity::AlgebraicallyRegular
        } else if var < 100.0 * opts.agreement_tol {
            Regularity::GeometricallyRegular
        } else {
            ev.notes.push("projector limits neither clearly equal nor clearly distinct".into());
            Regularity::Undetermined
        };
        return Ok(out(reg, ev));
    }

    // first-order splitting
    let nu = comp.len();
    let cscale = tangent.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tdirs = sphere_directions(nu, opts.directions.max(8));
    let mut tsets: Vec<Vec<CMat>> = Vec::new();
    for t in &tdirs {
        let mut omega = vec![0.0; d];
        for (k, c) in comp.iter().enumerate() {
            for j in 0..d {
                omega[j] += t[k] * c[j];
            }
        }
        let c = traceless(&tangent.symbol(&omega));
        let cn = c.norm();
        if cn < 1e-6 * cscale {
            continue;
        }
        let ev_c = spectral::eigenvalues(&c)?;
        let (_, gap) = spread(&ev_c);
        let max_im = ev_c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if gap < 1e-6 * cn || max_im > 1e-8 * cn.max(1.0) {
            ev.notes.push("tangent symbol is not strictly hyperbolic in a transversal direction".into());
            return Ok(out(Regularity::Undetermined, ev));
        }
        match simple_projectors(&c) {
            Ok(p) => tsets.push(p),
            Err(_) => {
                ev.notes.push("tangent eigenprojectors unavailable".into());
                return Ok(out(Regularity::Undetermined, ev));
            }
        }
    }
    // rays in the kernel keep the multiplicity to first order
    for k in &ker {
        for &s in ladder.iter().take(3) {
            let b = branches(&sys.symbol_c(&shifted(xi, k, s)), lambda, alg)?;
            let (mx, _) = spread(&b);
            if mx > 0.2 * s * cscale.max(1e-300) && mx > 1e-9 * scale {
                ev.notes.push("multiplicity is lost to first order along the scalar directions".into());
                return Ok(out(Regularity::Undetermined, ev));
            }
        }
    }
    let tvar = if tsets.len() >= 2 {
        tsets.iter().skip(1).map(|s| projector_set_distance(&tsets[0], s)).fold(0.0, f64::max)
    } else {
        0.0
    };
    ev.tangent_projector_variation = Some(tvar);
    if nu == 1 || tvar < opts.agreement_tol {
        if nu == 1 {
            ev.notes.push("codimension one linear splitting".into());
        }
        Ok(out(Regularity::GeometricallyRegular, ev))
    } else {
        Ok(out(Regularity::LinearlySplitting { codim: nu }, ev))
    }
}

/// Glancing class of a root with respect to the boundary direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Glancing {
    TotallyIncoming,
    TotallyOutgoing,
    Mixed,
    Glancing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlancingReport {
    pub class: Glancing,
    pub nonglancing: bool,
    /// `|Delta^(m)(dx)|` relative to the largest coefficient of `Delta^(m)`.
    pub polynomial_value: f64,
    /// Propagation rates `c_j` from `Delta^(m)(tau, 0, 1) = a prod(tau + c_j)`.
    pub rates: Vec<f64>,
    /// Eigenvalues of the boundary tangent coefficient when the root is semi-simple.
    pub tangent_eigenvalues: Option<Vec<f64>>,
}

fn polynomial_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().unwrap().abs() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let mut comp = CMat::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = Complex64::new(-c[i] / lead, 0.0);
    }
    spectral::eigenvalues(&comp)
}

fn sign_class(v: &[f64]) -> Glancing {
    if v.iter().all(|&x| x > 0.0) {
        Glancing::TotallyIncoming
    } else if v.iter().all(|&x| x < 0.0) {
        Glancing::TotallyOutgoing
    } else {
        Glancing::Mixed
    }
}

/// Sign class of the roots `tau_j = -c_j` of a real-rooted polynomial from
/// its coefficient signs (Descartes' rule is exact in that case).
fn descartes_class(c: &[f64]) -> Glancing {
    let top = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nz: Vec<f64> = c.iter().copied().filter(|v| v.abs() > 1e-12 * top).collect();
    let deg = c.iter().rposition(|v| v.abs() > 1e-12 * top).unwrap_or(0);
    let changes = nz.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    // positive roots in tau are negative rates
    if changes == 0 {
        Glancing::TotallyIncoming
    } else if changes == deg && c[0].abs() > 1e-12 * top {
        Glancing::TotallyOutgoing
    } else {
        Glancing::Mixed
    }
}

/// Nonglancing and incoming/outgoing character, by the localized
/// polynomial and (for semi-simple roots) by the tangent system.
pub fn classify_glancing(sys: &HyperbolicSystem, tau: f64, xi: &[f64], opts: &ClassifyOptions) -> Result<GlancingReport> {
    let loc = symbol::taylor_localization(sys, tau, xi, opts.multiplicity_tol)?;
    let nv = sys.space_dim() + 1;
    let mut dx = vec![0.0; nv];
    dx[1 + sys.boundary_index()] = 1.0;
    let top = loc.term.max_abs_coeff();
    let value = loc.term.eval(&dx).abs() / top;
    let poly_ng = value > 1e-8;
    let univ = loc.term.specialize(0, &dx);
    let roots = polynomial_roots(&univ)?;
    let rtop = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut rates: Vec<f64> = roots.iter().map(|z| -z.re).collect();
    rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // a root of multiplicity k is only resolved to eps^(1/k)
    let im_tol = (10.0 * f64::EPSILON.powf(1.0 / roots.len().max(1) as f64)).max(1e-6);
    if roots.iter().any(|z| z.im.abs() > im_tol * rtop.max(1.0)) {
        return Err(Error::InternalInconsistency("localized polynomial has non-real rates".into()));
    }

    let geo = symbol::geometric_multiplicity(sys, tau, xi, opts.rank_tol);
    let mut tangent_eigs = None;
    let mut class = if poly_ng { descartes_class(&univ) } else { Glancing::Glancing };
    if geo == loc.order {
        let t = symbol::tangent_system_with(sys, tau, xi, opts.cluster_tol, opts.rank_tol)?;
        let ad = t.boundary_coeff();
        let e = spectral::eigenvalues(ad)?;
        let en = ad.norm().max(t.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)).max(1e-300);
        let mut re: Vec<f64> = e.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mat_ng = e.iter().all(|z| z.norm() > 1e-8 * en);
        if mat_ng != poly_ng {
            return Err(Error::InternalInconsistency(format!(
                "polynomial route says nonglancing={poly_ng}, tangent route says {mat_ng}"
            )));
        }
        if mat_ng {
            let c2 = sign_class(&re);
            if c2 != class {
                return Err(Error::InternalInconsistency("incoming/outgoing character disagrees between routes".into()));
            }
        } else {
            class = Glancing::Glancing;
        }
        tangent_eigs = Some(re);
    }
    Ok(GlancingReport { class, nonglancing: poly_ng, polynomial_value: value, rates, tangent_eigenvalues: tangent_eigs })
}

/// Outcome of a linear-splitting check along a multiplicity manifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplittingCheck {
    pub holds: bool,
    pub codim: usize,
    pub geometric_regular_implied: bool,
    pub manifold_defect: f64,
    pub min_transversal_gap: f64,
    pub tangential_defect: f64,
}

/// Check that `A'(omega)` splits strictly in directions transversal to the
/// manifold `q -> xi(q)` (with `xi(0) = xi_bar`) of `m`-fold eigenvalues
/// of the matrix family `xi -> A(xi)`; `lambda` is the eigenvalue at `xi_bar`.
pub fn check_linear_splitting_family(
    family: &dyn Fn(&[f64]) -> CMat,
    xi: &[f64],
    lambda: f64,
    manifold: &dyn Fn(&[f64]) -> Vec<f64>,
    manifold_dim: usize,
    opts: &ClassifyOptions,
) -> Result<SplittingCheck> {
    let d = xi.len();
    let a0 = family(xi);
    let n = a0.nrows();
    let dec = SpectralDecomposition::new(&a0, opts.cluster_tol)?;
    let lam = Complex64::new(lambda, 0.0);
    let k = (0..dec.clusters.len())
        .min_by(|&a, &b| (dec.clusters[a].center - lam).norm().partial_cmp(&(dec.clusters[b].center - lam).norm()).unwrap())
        .ok_or_else(|| Error::InvalidInput("empty matrix".into()))?;
    let m = dec.clusters[k].multiplicity();
    let scale = a0.norm().max(1.0);
    if (dec.clusters[k].center - lam).norm() > 1e-6 * scale {
        return Err(Error::NotCharacteristic((dec.clusters[k].center - lam).norm()));
    }
    let shifted_a0 = &a0 - CMat::identity(n, n) * lam;
    if n - spectral::rank(&shifted_a0, opts.rank_tol) < m {
        return Err(Error::NotSemiSimple { algebraic: m, geometric: n - spectral::rank(&shifted_a0, opts.rank_tol) });
    }
    let v = dec.bases[k].clone();
    let w = v.adjoint() * &dec.projectors[k];
    // derivatives of the family
    let h = 1e-5;
    let mut tcoef = Vec::with_capacity(d);
    for j in 0..d {
        let mut p = xi.to_vec();
        let mut q = xi.to_vec();
        p[j] += h;
        q[j] -= h;
        let da = (family(&p) - family(&q)) * Complex64::new(0.5 / h, 0.0);
        tcoef.push(&w * da * &v);
    }
    let tsym = |om: &[f64]| {
        let mut out = CMat::zeros(m, m);
        for (c, &x) in tcoef.iter().zip(om) {
            out += c * Complex64::new(x, 0.0);
        }
        out
    };
    // manifold samples keep an m-fold semi-simple eigenvalue
    let base = manifold(&vec![0.0; manifold_dim]);
    let mut manifold_defect = base.iter().zip(xi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let probes = sphere_directions(manifold_dim, 8.max(2 * manifold_dim));
    let hq = 1e-3;
    for pz in &probes {
        let q: Vec<f64> = pz.iter().map(|x| x * hq).collect();
        let xq = manifold(&q);
        let aq = family(&xq);
        let eigs = spectral::eigenvalues(&aq)?;
        let near = nearest(&eigs, lam, m);
        let bundle: Vec<Complex64> = near.iter().map(|&i| eigs[i]).collect();
        let (sp, _) = spread(&bundle);
        let mean: Complex64 = bundle.iter().sum::<Complex64>() / m as f64;
        let geo = n - spectral::rank(&(&aq - CMat::identity(n, n) * mean), 1e-7);
        manifold_defect = manifold_defect.max(sp / scale);
        if sp > 1e-7 * scale || geo < m {
            return Err(Error::BadManifold(format!("sampled point has spread {sp:.2e}, geometric multiplicity {geo}")));
        }
    }
    // tangent space by differences
    let mut tan = Vec::with_capacity(manifold_dim);
    for i in 0..manifold_dim {
        let mut qp = vec![0.0; manifold_dim];
        let mut qm = vec![0.0; manifold_dim];
        qp[i] = hq;
        qm[i] = -hq;
        let a = manifold(&qp);
        let b = manifold(&qm);
        tan.push(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * hq)).collect::<Vec<f64>>());
    }
    let tmat = nalgebra::DMatrix::<f64>::from_fn(d, manifold_dim, |r, c| tan[c][r]);
    let cscale = tcoef.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut tangential_defect = 0.0f64;
    for c in 0..manifold_dim {
        let t: Vec<f64> = (0..d).map(|r| tmat[(r, c)]).collect();
        tangential_defect = tangential_defect.max(traceless(&tsym(&t)).norm() / cscale);
    }
    // transversal directions: orthogonal complement of the tangent space
    let comp = {
        let mut sq = nalgebra::DMatrix::<f64>::zeros(d, d);
        if manifold_dim > 0 {
            sq.view_mut((0, 0), (d, manifold_dim)).copy_from(&tmat);
        }
        let svd = sq.svd(true, false);
        let u = svd.u.unwrap();
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        (0..d)
            .filter(|&i| svd.singular_values[i] <= 1e-8 * smax.max(1e-300) || smax == 0.0)
            .map(|i| (0..d).map(|r| u[(r, i)]).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    };
    let codim = d - manifold_dim;
    let mut min_gap = f64::INFINITY;
    for t in sphere_directions(comp.len(), 24) {
        let mut om = vec![0.0; d];
        for (k, c) in comp.iter().enumerate() {
            for j in 0..d {
                om[j] += t[k] * c[j];
            }
        }
        let c = traceless(&tsym(&om));
        let e = spectral::eigenvalues(&c)?;
        let (_, gap) = spread(&e);
        let im = e.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let g = if im > 1e-8 * cscale { 0.0 } else { gap / cscale };
        min_gap = min_gap.min(g);
    }
    let holds = min_gap > 1e-6 && tangential_defect < 1e-5;
    Ok(SplittingCheck {
        holds,
        codim,
        geometric_regular_implied: holds && codim == 1,
        manifold_defect,
        min_transversal_gap: min_gap,
        tangential_defect,
    })
}

/// [`check_linear_splitting_family`] for the linear family of a system.
pub fn check_linear_splitting(
    sys: &HyperbolicSystem,
    tau: f64,
    xi: &[f64],
    manifold: &dyn Fn(&[f64]) -> Vec<f64>,
    manifold_dim: usize,
    opts: &ClassifyOptions,
) -> Result<SplittingCheck> {
    let fam = |x: &[f64]| sys.symbol_c(x);
    check_linear_splitting_family(&fam, xi, -tau, manifold, manifold_dim, opts)
}

/// All distinct real roots `tau` over `xi`, i.e. the eigenvalue clusters of
/// `A(xi)` with their negated centers.
pub fn real_roots(sys: &HyperbolicSystem, xi: &[f64], cluster_tol: f64) -> Result<Vec<(f64, usize)>> {
    let dec = SpectralDecomposition::new(&sys.symbol_c(xi), cluster_tol)?;
    Ok(dec
        .clusters
        .iter()
        .filter(|c| c.center.im.abs() <= 1e-9 * (1.0 + c.center.norm()))
        .map(|c| (-c.center.re, c.multiplicity()))
        .collect())
}
