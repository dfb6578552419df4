//! Measured constant of the maximal estimate
//! `gamma |u|^2 + |u(0)|^2 <= C (|f|^2 / gamma + |g|^2)` for exponential forcings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{negative_space, positive_space, Frequency};
use crate::error::{Error, Result};
use crate::lopatinski::BoundaryProblem;
use crate::spectral::{self, CMat, CVec};

/// `f(x) = sum_k c_k exp(-beta_k x)` with `beta_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub terms: Vec<(CVec, f64)>,
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing { terms: Vec::new() }
    }

    pub fn eval(&self, x: f64, n: usize) -> CVec {
        let mut out = CVec::zeros(n);
        for (c, b) in &self.terms {
            out += c * Complex64::new((-b * x).exp(), 0.0);
        }
        out
    }

    /// Exact `L^2(0, inf)` norm squared.
    pub fn norm_sq(&self) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (ci, bi) in &self.terms {
            for (cj, bj) in &self.terms {
                s += ci.dotc(cj) / (bi + bj);
            }
        }
        s.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Panel growth factor before the resolution cap.
    pub growth: f64,
    pub gap: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { nodes: 10, growth: 1.3, gap: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateProbe {
    pub gamma: f64,
    pub u_norm_sq: f64,
    pub u0_norm_sq: f64,
    pub f_norm_sq: f64,
    pub g_norm_sq: f64,
    pub ratio: f64,
    /// Zero data: ratio set to 0.
    pub degenerate: bool,
    pub truncation: f64,
    pub panels: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let (qn, qn1) = if n == 1 { (z, 1.0) } else { (q1, q0) };
                let d = n as f64 * (z * qn - qn1) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * d * d);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// Bounded solution of `u' + iGu = f`, `M u(0) = g`, and the estimate ratio.
pub fn estimate_probe(bp: &BoundaryProblem, z: &Frequency, f: &Forcing, g: &CVec, opts: &ProbeOptions) -> Result<EstimateProbe> {
    if !(z.gamma > 0.0) {
        return Err(Error::InvalidInput("estimate probe needs gamma > 0".into()));
    }
    let sym = bp.symbol();
    let n = sym.dim();
    if g.len() != sym.incoming() {
        return Err(Error::DimensionMismatch { expected: sym.incoming(), found: g.len() });
    }
    for (c, b) in &f.terms {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        if !(*b > 0.0) {
            return Err(Error::InvalidInput("forcing rates must be positive".into()));
        }
    }
    let f_norm_sq = f.norm_sq();
    let g_norm_sq = g.norm_squared();
    let gamma = z.gamma;
    if f_norm_sq == 0.0 && g_norm_sq == 0.0 {
        return Ok(EstimateProbe {
            gamma,
            u_norm_sq: 0.0,
            u0_norm_sq: 0.0,
            f_norm_sq,
            g_norm_sq,
            ratio: 0.0,
            degenerate: true,
            truncation: 0.0,
            panels: 0,
        });
    }
    let gm = sym.g(z)?;
    let em = negative_space(sym, z, opts.gap)?;
    let ep = positive_space(sym, z, opts.gap)?;
    let (qm, qp) = (&em.basis, &ep.basis);
    let (km, kp) = (qm.ncols(), qp.ncols());
    // oblique projections through the joint basis [Q-, Q+]
    let joint = spectral::concat_columns(&[qm.clone(), qp.clone()]);
    let jinv = spectral::inverse(&joint)?;
    let k = f.terms.len();
    let i = Complex64::new(0.0, 1.0);
    let gmm = qm.adjoint() * &gm * qm;
    let gpp = qp.adjoint() * &gm * qp;
    // unstable part: u_+(x) = sum_k exp(-beta_k x) w_k
    let mut wk = Vec::with_capacity(k);
    let mut ym = CMat::zeros(km, k);
    for (j, (c, b)) in f.terms.iter().enumerate() {
        let coords = &jinv * c;
        for r in 0..km {
            ym[(r, j)] = coords[r];
        }
        if kp > 0 {
            let cp = CMat::from_column_slice(kp, 1, &coords.as_slice()[km..]);
            let lhs = &gpp * i - CMat::identity(kp, kp) * Complex64::new(*b, 0.0);
            let sol = spectral::solve(&lhs, &cp)?;
            wk.push(qp * sol.column(0));
        } else {
            wk.push(CVec::zeros(n));
        }
    }
    let wsum: CVec = wk.iter().fold(CVec::zeros(n), |a, w| a + w);
    // boundary condition fixes the E_- component
    let m = bp.boundary_matrix(z);
    let mq = &m * qm;
    let smin = spectral::singular_values(&mq).last().copied().unwrap_or(0.0);
    if smin <= 1e-13 * spectral::spectral_norm(&m).max(1.0) {
        return Err(Error::LopatinskiFailureAtPoint(smin));
    }
    let rhs = g - &m * &wsum;
    let yh = spectral::solve(&mq, &CMat::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
    let u0 = qm * yh.column(0) + &wsum;
    // augmented system for z = (y, exp(-beta x))
    let dim = km + k;
    let mut aug = CMat::zeros(dim, dim);
    aug.view_mut((0, 0), (km, km)).copy_from(&(&gmm * (-i)));
    aug.view_mut((0, km), (km, k)).copy_from(&ym);
    for (j, (_, b)) in f.terms.iter().enumerate() {
        aug[(km + j, km + j)] = Complex64::new(-b, 0.0);
    }
    let mut z0 = CVec::zeros(dim);
    for r in 0..km {
        z0[r] = yh[(r, 0)];
    }
    for j in 0..k {
        z0[km + j] = Complex64::new(1.0, 0.0);
    }
    let evm = spectral::eigenvalues(&gmm)?;
    let mut kappa = evm.iter().map(|mu| -mu.im).fold(f64::INFINITY, f64::min);
    for (_, b) in &f.terms {
        kappa = kappa.min(*b);
    }
    let truncation = 1e12f64.ln() / kappa;
    let wmax = (1.0 / spectral::spectral_norm(&gm).max(1e-300)).min(truncation / 16.0).max(1e-300);
    let (gx, gw) = gauss_legendre(opts.nodes);
    let mut x0 = 0.0;
    let mut width = (wmax / 64.0).min(truncation / 1024.0);
    let mut state = z0;
    let mut norm_sq = 0.0;
    let mut panels = 0usize;
    let mut cache: Option<(f64, CMat, Vec<CMat>)> = None;
    let unstable = |x: f64| -> CVec {
        let mut s = CVec::zeros(n);
        for ((_, b), w) in f.terms.iter().zip(&wk) {
            s += w * Complex64::new((-b * x).exp(), 0.0);
        }
        s
    };
    while x0 < truncation {
        let w = width.min(truncation - x0);
        let reuse = matches!(&cache, Some((cw, _, _)) if *cw == w);
        if !reuse {
            let full = spectral::expm(&(&aug * Complex64::new(w, 0.0)));
            let nodes: Vec<CMat> = gx.iter().map(|t| spectral::expm(&(&aug * Complex64::new(0.5 * w * (t + 1.0), 0.0)))).collect();
            cache = Some((w, full, nodes));
        }
        let (_, full, nodes) = cache.as_ref().unwrap();
        for (j, e) in nodes.iter().enumerate() {
            let zn = e * &state;
            let ys = CVec::from_iterator(km, zn.iter().take(km).copied());
            let x = x0 + 0.5 * w * (gx[j] + 1.0);
            let wt = gw[j];
            let u = qm * ys + unstable(x);
            norm_sq += 0.5 * w * wt * u.norm_squared();
        }
        state = full * &state;
        x0 += w;
        width = (width * opts.growth).min(wmax);
        panels += 1;
    }
    let u0_norm_sq = u0.norm_squared();
    let ratio = (gamma * norm_sq + u0_norm_sq) / (f_norm_sq / gamma + g_norm_sq);
    Ok(EstimateProbe { gamma, u_norm_sq: norm_sq, u0_norm_sq, f_norm_sq, g_norm_sq, ratio, degenerate: false, truncation, panels })
}
