//! Planar MHD and Euler shocks: construction, the doubled transmission
//! problem and the Majda determinant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{limit_negative_space, negative_space, BoundarySymbol, Frequency};
use crate::error::{Error, Result};
use crate::lopatinski::{BoundaryProblem, LopatinskiOptions, LopatinskiValue};
use crate::spectral::{self, to_complex, CMat, CVec, RMat};
use crate::symbol::HyperbolicSystem;

use super::mhd::{
    conservative_flux, flux_jacobian, mhd_coefficient, mhd_symmetrizer, norm3, rh_residual, MhdState, PressureLaw,
};

/// Shock family: `Left` is the 1-shock (upstream on the `+` side), `Right`
/// the 3-shock (upstream on the `-` side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShockFamily {
    Left,
    Right,
}

/// Front `x_3 = phi(t, y)` with `dphi_t = sigma`, `dphi_y = dphi`, separating
/// `minus` (`x_3 < phi`) from `plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockProblem {
    pub minus: MhdState,
    pub plus: MhdState,
    pub sigma: f64,
    pub dphi: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShockJson {
    rho_minus: f64,
    u_minus: [f64; 3],
    #[serde(rename = "H_minus", default)]
    h_minus: [f64; 3],
    rho_plus: f64,
    u_plus: [f64; 3],
    #[serde(rename = "H_plus", default)]
    h_plus: [f64; 3],
    sigma: f64,
    #[serde(default)]
    dphi: [f64; 2],
    #[serde(default)]
    eos: PressureLaw,
}

impl Serialize for ShockProblem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShockJson {
            rho_minus: self.minus.rho,
            u_minus: self.minus.u,
            h_minus: self.minus.h,
            rho_plus: self.plus.rho,
            u_plus: self.plus.u,
            h_plus: self.plus.h,
            sigma: self.sigma,
            dphi: self.dphi,
            eos: self.minus.eos,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShockProblem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ShockJson::deserialize(d)?;
        Ok(ShockProblem {
            minus: MhdState { rho: j.rho_minus, u: j.u_minus, h: j.h_minus, eos: j.eos },
            plus: MhdState { rho: j.rho_plus, u: j.u_plus, h: j.h_plus, eos: j.eos },
            sigma: j.sigma,
            dphi: j.dphi,
        })
    }
}

/// Normal mass-flux residual scale used to make the RH tolerance relative.
fn rh_scale(sp: &ShockProblem) -> f64 {
    let a = sp.minus.to_vec().iter().chain(sp.plus.to_vec().iter()).fold(1.0f64, |m, x| m.max(x.abs()));
    a * a.max(sp.sigma.abs()).max(sp.minus.sound_speed()).max(sp.plus.sound_speed())
}

impl ShockProblem {
    /// Unnormalized front normal `(-dphi, 1)`.
    fn normal(&self) -> ([f64; 3], f64) {
        let n = [-self.dphi[0], -self.dphi[1], 1.0];
        let l = norm3(&n);
        ([n[0] / l, n[1] / l, n[2] / l], l)
    }

    /// Rankine-Hugoniot residual in the unit-normal form.
    pub fn rh_residual(&self) -> [f64; 7] {
        let (n, l) = self.normal();
        rh_residual(&self.minus, &self.plus, self.sigma / l, &n)
    }

    pub fn rh_defect(&self) -> f64 {
        self.rh_residual().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Linearized system on side `plus` (or `minus`) with the front shear.
    pub fn side_system(&self, plus: bool) -> HyperbolicSystem {
        let s = if plus { &self.plus } else { &self.minus };
        super::mhd::mhd_system_in_frame(s, self.sigma, self.dphi)
    }

    /// Side system in the doubled coordinates: the `-` side is reflected.
    pub fn doubled_side(&self, plus: bool) -> HyperbolicSystem {
        let s = if plus { &self.plus } else { &self.minus };
        let mut coeffs: Vec<RMat> = (0..3).map(|j| mhd_coefficient(s, j)).collect();
        let a3 = &coeffs[2] - &coeffs[0] * self.dphi[0] - &coeffs[1] * self.dphi[1] - RMat::identity(7, 7) * self.sigma;
        coeffs[2] = if plus { a3 } else { -a3 };
        HyperbolicSystem::new(coeffs, Some(mhd_symmetrizer(s))).expect("MHD coefficients are consistent")
    }

    /// 14x14 system for `(U-(-z), U+(z))` on `z > 0`.
    pub fn doubled_system(&self) -> HyperbolicSystem {
        let m = self.doubled_side(false);
        let p = self.doubled_side(true);
        let coeffs = (0..3).map(|j| block_diag(m.coeff(j), p.coeff(j))).collect();
        let s = block_diag(m.symmetrizer().unwrap(), p.symmetrizer().unwrap());
        HyperbolicSystem::new(coeffs, Some(s)).expect("block systems are consistent")
    }

    /// `F'_3 - sum_j dphi_j F'_j - sigma F'_0` at one side.
    pub fn transmission_jacobian(&self, plus: bool) -> RMat {
        let s = if plus { &self.plus } else { &self.minus };
        flux_jacobian(s, 3) - flux_jacobian(s, 1) * self.dphi[0] - flux_jacobian(s, 2) * self.dphi[1]
            - flux_jacobian(s, 0) * self.sigma
    }

    /// Jump `[F_j] = F_j(U+) - F_j(U-)`, `j = 0..3`.
    pub fn flux_jump(&self, j: usize) -> [f64; 7] {
        let a = conservative_flux(&self.plus, j);
        let b = conservative_flux(&self.minus, j);
        let mut out = [0.0; 7];
        for i in 0..7 {
            out[i] = a[i] - b[i];
        }
        out
    }

    /// `X = (tau - i gamma)[F_0] + sum_j eta_j [F_j]`.
    pub fn front_vector(&self, z: &Frequency) -> CVec {
        let f0 = self.flux_jump(0);
        let f1 = self.flux_jump(1);
        let f2 = self.flux_jump(2);
        let w = Complex64::new(z.tau, -z.gamma);
        let (e1, e2) = (z.eta.first().copied().unwrap_or(0.0), z.eta.get(1).copied().unwrap_or(0.0));
        CVec::from_iterator(7, (0..7).map(|i| w * f0[i] + Complex64::new(e1 * f1[i] + e2 * f2[i], 0.0)))
    }

    /// `[-F'~_3(U-) | F'~_3(U+)]`, acting on doubled states.
    pub fn transmission_matrix(&self) -> CMat {
        let mut b = CMat::zeros(7, 14);
        b.view_mut((0, 0), (7, 7)).copy_from(&to_complex(&(-self.transmission_jacobian(false))));
        b.view_mut((0, 7), (7, 7)).copy_from(&to_complex(&self.transmission_jacobian(true)));
        b
    }

    // Characteristic speeds of the two side frames along the normal.
    fn normal_speeds(&self, plus: bool) -> Vec<f64> {
        let a = self.side_system(plus).coeff(2).clone();
        let mut ev: Vec<f64> = a.complex_eigenvalues().iter().map(|c| c.re).collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Smallest relative characteristic speed `|lambda(A~_3)|` over both sides.
    pub fn noncharacteristic_margin(&self) -> f64 {
        let mut m = f64::INFINITY;
        for side in [false, true] {
            let sys = self.side_system(side);
            let s = spectral::singular_values(&to_complex(sys.coeff(2)));
            m = m.min(s.last().copied().unwrap_or(0.0));
        }
        m
    }

    /// `(dim E-, dim E+)` from the sign count of the normal speeds.
    pub fn lax_count(&self) -> (usize, usize) {
        let em = self.normal_speeds(false).iter().filter(|&&l| l < 0.0).count();
        let ep = self.normal_speeds(true).iter().filter(|&&l| l > 0.0).count();
        (em, ep)
    }

    /// RH, noncharacteristic and Lax checks.
    pub fn validate(&self) -> Result<()> {
        self.minus.validate()?;
        self.plus.validate()?;
        let defect = self.rh_defect();
        if defect > 1e-9 * rh_scale(self) {
            return Err(Error::InvalidInput(format!("Rankine-Hugoniot residual {defect:.3e}")));
        }
        let margin = self.noncharacteristic_margin();
        if margin <= 1e-10 {
            return Err(Error::Characteristic(format!("relative speed {margin:.3e} at the front")));
        }
        let (em, ep) = self.lax_count();
        if em + ep != 6 {
            return Err(Error::NotLaxType(format!("dim E- + dim E+ = {em} + {ep}")));
        }
        Ok(())
    }

    /// Lax count from the subspaces themselves at `gamma > 0`.
    pub fn lax_count_at(&self, z: &Frequency) -> Result<(usize, usize)> {
        let (sm, sp) = self.side_symbols()?;
        let em = negative_space(&sm, z, 1e-14)?.dim();
        let ep = negative_space(&sp, z, 1e-14)?.dim();
        Ok((em, ep))
    }

    fn side_symbols(&self) -> Result<(BoundarySymbol, BoundarySymbol)> {
        Ok((BoundarySymbol::new(&self.doubled_side(false))?, BoundarySymbol::new(&self.doubled_side(true))?))
    }

    /// Same upstream state and front speed, upstream field `h`, downstream by Newton.
    pub fn with_field(&self, family: ShockFamily, h: [f64; 3]) -> Result<ShockProblem> {
        let mut sp = *self;
        match family {
            ShockFamily::Right => {
                sp.minus.h = h;
                sp.plus = solve_downstream(&sp.minus, &sp.plus, sp.sigma, sp.dphi, true)?;
            }
            ShockFamily::Left => {
                sp.plus.h = h;
                sp.minus = solve_downstream(&sp.plus, &sp.minus, sp.sigma, sp.dphi, false)?;
            }
        }
        sp.validate()?;
        Ok(sp)
    }
}

fn block_diag(a: &RMat, b: &RMat) -> RMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = RMat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Damped Newton on the RH equations for the unknown side, `fixed` held.
fn solve_downstream(fixed: &MhdState, seed: &MhdState, sigma: f64, dphi: [f64; 2], unknown_plus: bool) -> Result<MhdState> {
    let eos = fixed.eos;
    let resid = |v: &[f64]| -> [f64; 7] {
        let other = MhdState::from_vec(v, eos);
        let sp = if unknown_plus {
            ShockProblem { minus: *fixed, plus: other, sigma, dphi }
        } else {
            ShockProblem { minus: other, plus: *fixed, sigma, dphi }
        };
        sp.rh_residual()
    };
    let norm = |r: &[f64; 7]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = seed.to_vec().to_vec();
    let mut r = resid(&x);
    let scale = fixed.to_vec().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for _ in 0..100 {
        if norm(&r) < 1e-13 * scale * scale {
            return Ok(MhdState::from_vec(&x, eos));
        }
        let mut jac = RMat::zeros(7, 7);
        for k in 0..7 {
            let h = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (resid(&xp), resid(&xm));
            for i in 0..7 {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rv = nalgebra::DVector::from_column_slice(&r);
        let dx = jac.lu().solve(&rv).ok_or_else(|| Error::RootFinder("singular RH Jacobian".into()))?;
        let r0 = norm(&r);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a - t * d).collect();
            if trial[0] > 0.0 {
                let rt = resid(&trial);
                if norm(&rt) < r0 || t < 1e-6 {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return Err(Error::RootFinder("line search stalled".into()));
            }
        }
    }
    if norm(&r) < 1e-11 * scale * scale {
        Ok(MhdState::from_vec(&x, eos))
    } else {
        Err(Error::RootFinder(format!("Newton did not converge, residual {:.3e}", norm(&r))))
    }
}

/// Downstream density on the compressive branch of `j^2/rho + p(rho) = const`.
pub fn hugoniot_density(eos: &PressureLaw, rho_u: f64, mass_flux: f64) -> Result<f64> {
    let j2 = mass_flux * mass_flux;
    let k = j2 / rho_u + eos.pressure(rho_u);
    let f = |r: f64| j2 / r + eos.pressure(r) - k;
    let mut lo = rho_u * (1.0 + 1e-9);
    if f(lo) >= 0.0 {
        return Err(Error::RootFinder("upstream state is not supersonic".into()));
    }
    let mut hi = 2.0 * rho_u;
    let mut n = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(Error::RootFinder("no Hugoniot bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lax shock with normal `x_3`, upstream state `upstream` and upstream
/// normal Mach number `mach > 1`. A small upstream field is reached by
/// continuation from the Euler shock at fixed `sigma`.
pub fn construct_lax_shock(upstream: &MhdState, family: ShockFamily, mach: f64) -> Result<ShockProblem> {
    upstream.validate()?;
    if !(mach > 1.0) {
        return Err(Error::InvalidInput("upstream Mach number must exceed 1".into()));
    }
    let fluid = MhdState { h: [0.0; 3], ..*upstream };
    let c = fluid.sound_speed();
    // relative normal velocity upstream; positive for the 3-shock
    let v_u = match family {
        ShockFamily::Right => mach * c,
        ShockFamily::Left => -mach * c,
    };
    let sigma = fluid.u[2] - v_u;
    let j = fluid.rho * v_u;
    let rho_d = hugoniot_density(&fluid.eos, fluid.rho, j)?;
    let v_d = j / rho_d;
    let down = MhdState { rho: rho_d, u: [fluid.u[0], fluid.u[1], sigma + v_d], h: [0.0; 3], eos: fluid.eos };
    let euler = match family {
        ShockFamily::Right => ShockProblem { minus: fluid, plus: down, sigma, dphi: [0.0; 2] },
        ShockFamily::Left => ShockProblem { minus: down, plus: fluid, sigma, dphi: [0.0; 2] },
    };
    // polish to machine precision with the full residual
    let euler = euler.with_field(family, [0.0; 3])?;
    if norm3(&upstream.h) == 0.0 {
        return Ok(euler);
    }
    euler.with_field(family, upstream.h)
}

/// Householder completion: columns 2.. of the reflector mapping `x` to `e_1`.
pub fn orthogonal_complement_of(x: &CVec) -> Result<CMat> {
    let n = x.len();
    let nx = x.norm();
    if !(nx > 0.0) {
        return Err(Error::FrontDegeneracy);
    }
    let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
    let mut v = x.clone();
    v[0] += phase * nx;
    let vv = v.norm_squared();
    let h = CMat::identity(n, n) - (&v * v.adjoint()) * Complex64::new(2.0 / vv, 0.0);
    Ok(h.columns(1, n - 1).into_owned())
}

/// Doubled problem with the rank-6 operator `M = Y^* B`, `Y` spanning `X^perp`.
#[derive(Debug, Clone)]
pub struct ShockBoundary {
    pub problem: BoundaryProblem,
    pub shock: ShockProblem,
}

impl ShockBoundary {
    pub fn front_vector(&self, z: &Frequency) -> CVec {
        self.shock.front_vector(z)
    }

    /// `Phi(zeta)`: recovers the front amplitude from the doubled trace,
    /// `phi = X^* (B U(0) + g) / |X|^2`.
    pub fn front_recovery(&self, z: &Frequency) -> Result<CMat> {
        let x = self.front_vector(z);
        let n2 = x.norm_squared();
        if !(n2 > 0.0) {
            return Err(Error::FrontDegeneracy);
        }
        let xr = CMat::from_column_slice(7, 1, x.as_slice()).adjoint();
        Ok(xr * self.shock.transmission_matrix() * Complex64::new(1.0 / n2, 0.0))
    }

    pub fn boundary_matrix(&self, z: &Frequency) -> Result<CMat> {
        let y = orthogonal_complement_of(&self.front_vector(z))?;
        Ok(y.adjoint() * self.shock.transmission_matrix())
    }
}

pub fn shock_boundary_problem(sp: &ShockProblem) -> Result<ShockBoundary> {
    sp.validate()?;
    let sys = sp.doubled_system();
    let shock = *sp;
    let b = sp.transmission_matrix();
    let probe = Frequency::new(1.0, vec![0.0, 0.0], 0.0);
    if sp.front_vector(&probe).norm() == 0.0 {
        return Err(Error::FrontDegeneracy);
    }
    let m = move |z: &Frequency| {
        let x = shock.front_vector(z);
        match orthogonal_complement_of(&x) {
            Ok(y) => y.adjoint() * &b,
            Err(_) => CMat::zeros(6, 14),
        }
    };
    let problem = BoundaryProblem::with_operator(&sys, m, &probe)?;
    Ok(ShockBoundary { problem, shock })
}

fn majda_value(sp: &ShockProblem, em: &CMat, ep: &CMat, x: &CVec) -> Result<f64> {
    let (dm, dp) = (em.ncols(), ep.ncols());
    if dm + dp + 1 != 7 {
        return Err(Error::DimensionMismatch { expected: 6, found: dm + dp });
    }
    let im = to_complex(&sp.transmission_jacobian(false)) * em;
    let ip = to_complex(&sp.transmission_jacobian(true)) * ep;
    let qm = spectral::range_basis(&im, 1e-12);
    let qp = spectral::range_basis(&ip, 1e-12);
    if qm.ncols() < dm || qp.ncols() < dp {
        return Ok(0.0);
    }
    let xn = CMat::from_column_slice(7, 1, (x / Complex64::new(x.norm(), 0.0)).as_slice());
    spectral::subspace_determinant(&[&qm, &qp, &xn])
}

/// `|det(F'~_3(U-) E-, F'~_3(U+) E+, X)|` with orthonormalized blocks.
pub fn majda_lopatinski(sp: &ShockProblem, z: &Frequency, opts: &LopatinskiOptions) -> Result<LopatinskiValue> {
    let x = sp.front_vector(z);
    if !(x.norm() > 1e-300) {
        return Err(Error::FrontDegeneracy);
    }
    let (sm, spp) = sp.side_symbols()?;
    if z.gamma > 0.0 {
        let em = negative_space(&sm, z, opts.gap)?;
        let ep = negative_space(&spp, z, opts.gap)?;
        return Ok(LopatinskiValue { value: majda_value(sp, &em.basis, &ep.basis, &x)?, converged: true });
    }
    let lm = limit_negative_space(&sm, z, &opts.limit)?;
    let lp = limit_negative_space(&spp, z, &opts.limit)?;
    if lm.converged && lp.converged {
        return Ok(LopatinskiValue { value: majda_value(sp, &lm.basis.basis, &lp.basis.basis, &x)?, converged: true });
    }
    let mut inf = f64::INFINITY;
    for (a, b) in lm.samples.iter().zip(&lp.samples) {
        inf = inf.min(majda_value(sp, &a.basis, &b.basis, &x)?);
    }
    Ok(LopatinskiValue { value: inf, converged: false })
}

/// Standard stable test shock: `Gamma = 5/3`, `K = 1`, upstream at rest with
/// unit density, 3-shock of Mach 2.
pub fn reference_euler_shock() -> Result<ShockProblem> {
    let up = MhdState { rho: 1.0, u: [0.0; 3], h: [0.0; 3], eos: PressureLaw::default() };
    construct_lax_shock(&up, ShockFamily::Right, 2.0)
}

/// Fixed generic field direction for the `H -> 0` continuations.
pub const FIELD_DIRECTION: [f64; 3] = [0.48, -0.36, 0.8];
