//! Ideal isentropic MHD in the variables `(rho, u, H)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::RMat;
use crate::symbol::HyperbolicSystem;

/// Barotropic pressure law `p = K rho^Gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PressureLaw {
    GammaLaw { k: f64, gamma: f64 },
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw::GammaLaw { k: 1.0, gamma: 5.0 / 3.0 }
    }
}

impl PressureLaw {
    pub fn pressure(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::GammaLaw { k, gamma } => k * rho.powf(gamma),
        }
    }

    /// `c^2 = dp/drho`.
    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::GammaLaw { k, gamma } => k * gamma * rho.powf(gamma - 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PressureLaw::GammaLaw { k, gamma } if k > 0.0 && gamma >= 1.0 => Ok(()),
            _ => Err(Error::InvalidInput("pressure law needs K > 0 and Gamma >= 1".into())),
        }
    }
}

/// Fluid state: density, velocity and magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhdState {
    pub rho: f64,
    pub u: [f64; 3],
    #[serde(rename = "H", alias = "h")]
    pub h: [f64; 3],
    #[serde(default)]
    pub eos: PressureLaw,
}

pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Wave speeds in a unit direction: slow, Alfven (signed), fast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub slow: f64,
    pub alfven: f64,
    pub fast: f64,
}

impl MhdState {
    pub fn new(rho: f64, u: [f64; 3], h: [f64; 3]) -> Self {
        MhdState { rho, u, h, eos: PressureLaw::default() }
    }

    pub fn with_eos(mut self, eos: PressureLaw) -> Self {
        self.eos = eos;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.eos.validate()?;
        if !(self.rho > 0.0) || self.u.iter().chain(self.h.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("state needs rho > 0 and finite u, H".into()));
        }
        Ok(())
    }

    pub fn pressure(&self) -> f64 {
        self.eos.pressure(self.rho)
    }

    pub fn sound_speed_sq(&self) -> f64 {
        self.eos.sound_speed_sq(self.rho)
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed_sq().sqrt()
    }

    /// Speeds in the direction `omega` (normalized internally).
    pub fn wave_speeds(&self, omega: &[f64; 3]) -> WaveSpeeds {
        let n = norm3(omega);
        let w = [omega[0] / n, omega[1] / n, omega[2] / n];
        let c2 = self.sound_speed_sq();
        let h2 = dot(&self.h, &self.h) / self.rho;
        let a = dot(&w, &self.h) / self.rho.sqrt();
        let b2 = {
            let x = cross(&w, &self.h);
            dot(&x, &x) / self.rho
        };
        let cf2 = 0.5 * (c2 + h2 + ((c2 - h2).powi(2) + 4.0 * b2 * c2).sqrt());
        let cs2 = if cf2 > 0.0 { a * a * c2 / cf2 } else { 0.0 };
        WaveSpeeds { slow: cs2.max(0.0).sqrt(), alfven: a, fast: cf2.sqrt() }
    }

    fn unpack(v: &[f64]) -> MhdState {
        MhdState::new(v[0], [v[1], v[2], v[3]], [v[4], v[5], v[6]])
    }

    pub fn to_vec(&self) -> [f64; 7] {
        [self.rho, self.u[0], self.u[1], self.u[2], self.h[0], self.h[1], self.h[2]]
    }

    pub fn from_vec(v: &[f64], eos: PressureLaw) -> Self {
        Self::unpack(v).with_eos(eos)
    }
}

/// Coefficient matrix of `xi_j` in the MHD symbol (`j` zero-based).
pub fn mhd_coefficient(state: &MhdState, j: usize) -> RMat {
    let rho = state.rho;
    let c2 = state.sound_speed_sq();
    let u = state.u;
    let h = state.h;
    let mut a = RMat::zeros(7, 7);
    for i in 0..7 {
        a[(i, i)] = u[j];
    }
    a[(0, 1 + j)] = rho;
    a[(1 + j, 0)] = c2 / rho;
    for k in 0..3 {
        for l in 0..3 {
            let dkj = f64::from(u8::from(k == j));
            let dkl = f64::from(u8::from(k == l));
            let dlj = f64::from(u8::from(l == j));
            a[(1 + k, 4 + l)] += (dkj * h[l] - h[j] * dkl) / rho;
            a[(4 + k, 1 + l)] += h[k] * dlj - h[j] * dkl;
        }
    }
    a
}

/// `diag(c^2/rho, rho Id, Id)`.
pub fn mhd_symmetrizer(state: &MhdState) -> RMat {
    let mut s = RMat::identity(7, 7);
    s[(0, 0)] = state.sound_speed_sq() / state.rho;
    for k in 1..4 {
        s[(k, k)] = state.rho;
    }
    s
}

/// Symbol `tau + sum_j xi_j A_j(U)` with normal direction `x_3`.
pub fn mhd_system(state: &MhdState) -> HyperbolicSystem {
    let coeffs = (0..3).map(|j| mhd_coefficient(state, j)).collect();
    HyperbolicSystem::new(coeffs, Some(mhd_symmetrizer(state))).expect("MHD coefficients are consistent")
}

/// System seen from the front `x_3 = phi(t, y)` with `dphi_t = sigma`,
/// `dphi_{y_j} = dphi[j]`: `A_3 -> A_3 - sum_j dphi_j A_j - sigma Id`.
pub fn mhd_system_in_frame(state: &MhdState, sigma: f64, dphi: [f64; 2]) -> HyperbolicSystem {
    let mut coeffs: Vec<RMat> = (0..3).map(|j| mhd_coefficient(state, j)).collect();
    let a3 = &coeffs[2] - &coeffs[0] * dphi[0] - &coeffs[1] * dphi[1] - RMat::identity(7, 7) * sigma;
    coeffs[2] = a3;
    HyperbolicSystem::new(coeffs, Some(mhd_symmetrizer(state))).expect("MHD coefficients are consistent")
}

/// Closed-form eigenvalues of `A(U, omega)`, increasing.
pub fn mhd_eigenvalues(state: &MhdState, omega: &[f64; 3]) -> [f64; 7] {
    let n = norm3(omega);
    let l0 = dot(&state.u, omega);
    if n == 0.0 {
        return [l0; 7];
    }
    let s = state.wave_speeds(omega);
    let mut ev = [
        l0 - s.fast * n,
        l0 - s.alfven.abs() * n,
        l0 - s.slow * n,
        l0,
        l0 + s.slow * n,
        l0 + s.alfven.abs() * n,
        l0 + s.fast * n,
    ];
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Conservative densities (`j = 0`) and fluxes (`j = 1, 2, 3`).
pub fn conservative_flux(state: &MhdState, j: usize) -> [f64; 7] {
    let rho = state.rho;
    let u = state.u;
    let h = state.h;
    if j == 0 {
        return [rho, rho * u[0], rho * u[1], rho * u[2], h[0], h[1], h[2]];
    }
    let k = j - 1;
    let ptot = state.pressure() + 0.5 * dot(&h, &h);
    let mut f = [0.0; 7];
    f[0] = rho * u[k];
    for i in 0..3 {
        f[1 + i] = rho * u[i] * u[k] - h[k] * h[i] + if i == k { ptot } else { 0.0 };
        f[4 + i] = u[k] * h[i] - h[k] * u[i];
    }
    f
}

/// Jacobian of [`conservative_flux`] with respect to `(rho, u, H)`.
pub fn flux_jacobian(state: &MhdState, j: usize) -> RMat {
    let rho = state.rho;
    let u = state.u;
    let h = state.h;
    let c2 = state.sound_speed_sq();
    let mut m = RMat::zeros(7, 7);
    if j == 0 {
        m[(0, 0)] = 1.0;
        for i in 0..3 {
            m[(1 + i, 0)] = u[i];
            m[(1 + i, 1 + i)] = rho;
            m[(4 + i, 4 + i)] = 1.0;
        }
        return m;
    }
    let k = j - 1;
    let d = |a: usize, b: usize| f64::from(u8::from(a == b));
    m[(0, 0)] = u[k];
    m[(0, 1 + k)] = rho;
    for i in 0..3 {
        m[(1 + i, 0)] = u[i] * u[k] + c2 * d(i, k);
        for l in 0..3 {
            m[(1 + i, 1 + l)] = rho * (d(i, l) * u[k] + u[i] * d(k, l));
            m[(1 + i, 4 + l)] = h[l] * d(i, k) - d(k, l) * h[i] - h[k] * d(i, l);
            m[(4 + i, 1 + l)] = d(k, l) * h[i] - h[k] * d(i, l);
            m[(4 + i, 4 + l)] = u[k] * d(i, l) - d(k, l) * u[i];
        }
    }
    m
}

/// Two unit vectors completing `n` to an orthonormal frame.
pub fn tangent_frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let nn = norm3(n);
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let pick = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let t1 = cross(&n, &pick);
    let l = norm3(&t1);
    let t1 = [t1[0] / l, t1[1] / l, t1[2] / l];
    let t2 = cross(&n, &t1);
    (t1, t2)
}

/// Rankine-Hugoniot residual across a front with unit normal `n` and
/// normal speed `sigma`: mass, momentum, tangential induction, `[H_n]`.
pub fn rh_residual(minus: &MhdState, plus: &MhdState, sigma: f64, n: &[f64; 3]) -> [f64; 7] {
    let (t1, t2) = tangent_frame(n);
    let side = |s: &MhdState| {
        let un = dot(&s.u, n) - sigma;
        let hn = dot(&s.h, n);
        let ptot = s.pressure() + 0.5 * dot(&s.h, &s.h);
        let mut r = [0.0; 7];
        r[0] = s.rho * un;
        for i in 0..3 {
            r[1 + i] = s.rho * s.u[i] * un + n[i] * ptot - hn * s.h[i];
        }
        r[4] = un * dot(&s.h, &t1) - hn * dot(&s.u, &t1);
        r[5] = un * dot(&s.h, &t2) - hn * dot(&s.u, &t2);
        r[6] = hn;
        r
    };
    let a = side(plus);
    let b = side(minus);
    let mut out = [0.0; 7];
    for i in 0..7 {
        out[i] = a[i] - b[i];
    }
    out
}

/// Isentropic Euler as the `H = 0` reduction of the MHD system.
pub fn euler_state(rho: f64, u: [f64; 3], eos: PressureLaw) -> MhdState {
    MhdState { rho, u, h: [0.0; 3], eos }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MhdState {
        MhdState::new(1.3, [0.2, -0.1, 0.4], [0.5, 0.3, -0.7])
    }

    #[test]
    fn symmetrizer_symmetrizes() {
        let sys = mhd_system(&sample());
        let (asym, smin) = sys.symmetrizer_defects().unwrap();
        assert!(asym < 1e-14, "asymmetry {asym}");
        assert!(smin > 0.0);
    }

    #[test]
    fn flux_jacobian_matches_differences() {
        let s = sample();
        let v = s.to_vec();
        for j in 0..4 {
            let jac = flux_jacobian(&s, j);
            for l in 0..7 {
                let h = 1e-6;
                let mut vp = v;
                let mut vm = v;
                vp[l] += h;
                vm[l] -= h;
                let fp = conservative_flux(&MhdState::from_vec(&vp, s.eos), j);
                let fm = conservative_flux(&MhdState::from_vec(&vm, s.eos), j);
                for i in 0..7 {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert!((fd - jac[(i, l)]).abs() < 1e-7, "j={j} ({i},{l}) {fd} vs {}", jac[(i, l)]);
                }
            }
        }
    }

    #[test]
    fn speeds_are_ordered() {
        let s = sample();
        let w = [0.3, 0.4, 0.5];
        let sp = s.wave_speeds(&w);
        let c2 = s.sound_speed_sq();
        let a2 = sp.alfven * sp.alfven;
        assert!(sp.slow * sp.slow <= a2.min(c2) + 1e-14);
        assert!(sp.fast * sp.fast >= a2.max(c2) - 1e-14);
    }
}
