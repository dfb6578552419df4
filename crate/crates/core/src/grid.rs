//! Deterministic direction sets and frequency grids.

use serde::{Deserialize, Serialize};

/// `n` unit vectors in `R^d`, deterministic and roughly uniform.
pub fn sphere_directions(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        0 => Vec::new(),
        1 => (0..n).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(n),
        _ => {
            // Gaussian vectors from a fixed linear congruential stream.
            let mut state: u64 = 0x9E3779B97F4A7C15;
            let mut unif = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
            };
            (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..d)
                        .map(|_| {
                            let (u1, u2) = (unif(), unif());
                            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                        })
                        .collect();
                    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / nrm).collect()
                })
                .collect()
        }
    }
}

/// Fibonacci lattice on the unit sphere of `R^3`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            vec![r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Frequency grid on the closed upper half sphere `{|zeta| = 1, gamma >= 0}`:
/// directions in `(tau, eta)` times a ladder of `gamma` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub directions: usize,
    pub gammas: Vec<f64>,
}

impl FrequencyGrid {
    /// Geometric ladder `0, g_min, ..., g_max` with `levels` values.
    pub fn with_ladder(directions: usize, levels: usize, g_min: f64, g_max: f64) -> Self {
        let mut gammas = vec![0.0];
        if levels > 1 {
            let k = levels - 1;
            for i in 0..k {
                let t = if k == 1 { 1.0 } else { i as f64 / (k - 1) as f64 };
                gammas.push(g_min * (g_max / g_min).powf(t));
            }
        }
        FrequencyGrid { directions, gammas }
    }

    /// Roughly `total` points with a default ladder of five `gamma` levels.
    pub fn with_total(total: usize) -> Self {
        let levels = 5;
        let dirs = total.div_ceil(levels).max(1);
        Self::with_ladder(dirs, levels, 1e-3, 0.5)
    }

    pub fn len(&self) -> usize {
        self.directions * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points `(tau, eta, gamma)` with `|zeta| = 1`, for `eta` of dimension `dim_eta`.
    pub fn points(&self, dim_eta: usize) -> Vec<(f64, Vec<f64>, f64)> {
        let dirs = sphere_directions(dim_eta + 1, self.directions);
        let mut out = Vec::with_capacity(self.len());
        for g in &self.gammas {
            let r = (1.0 - g * g).max(0.0).sqrt();
            for d in &dirs {
                out.push((r * d[0], d[1..].iter().map(|x| r * x).collect(), *g));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit() {
        for d in 1..6 {
            for v in sphere_directions(d, 17) {
                let n: f64 = v.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_points_on_sphere() {
        let g = FrequencyGrid::with_total(500);
        let pts = g.points(2);
        assert!(pts.len() >= 500);
        for (t, e, gm) in pts {
            let n = t * t + e.iter().map(|x| x * x).sum::<f64>() + gm * gm;
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
