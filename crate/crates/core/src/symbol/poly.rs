//! Sparse multivariate polynomials with real coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Polynomial in `nvars` variables, stored as exponent vector -> coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, f64>,
}

fn binomial(n: u16, k: u16) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    /// Build from univariate coefficients `c[k] x^k` in variable 0.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut p = Poly::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(vec![k as u16], c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exps: Vec<u16>, c: f64) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &f64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u16]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<Complex64>())
            .sum()
    }

    /// Sum of absolute values of the monomials at `x` (a rounding scale).
    pub fn eval_abs(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| (c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>()).abs())
            .sum()
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: usize) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e.iter().map(|&x| x as usize).sum::<usize>() == k {
                p.add_term(e.clone(), c);
            }
        }
        p
    }

    /// Taylor shift: the polynomial `x -> p(x0 + x)`.
    pub fn shift(&self, x0: &[f64]) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            let mut partial: Vec<(Vec<u16>, f64)> = vec![(Vec::with_capacity(self.nvars), c)];
            for (i, &ei) in e.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (ei as usize + 1));
                for (pre, pc) in &partial {
                    for b in 0..=ei {
                        let f = binomial(ei, b) * x0[i].powi(i32::from(ei - b));
                        if f == 0.0 {
                            continue;
                        }
                        let mut ne = pre.clone();
                        ne.push(b);
                        next.push((ne, pc * f));
                    }
                }
                partial = next;
            }
            for (ne, v) in partial {
                out.add_term(ne, v);
            }
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                p.add_term(ne, c * f64::from(e[i]));
            }
        }
        p
    }

    /// Univariate specialization: fix every variable except `var` at `point`
    /// and return coefficients in `var`, lowest degree first.
    pub fn specialize(&self, var: usize, point: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.degree() + 1];
        for (e, &c) in &self.terms {
            let mut v = c;
            for (i, &k) in e.iter().enumerate() {
                if i != var {
                    v *= point[i].powi(k as i32);
                }
            }
            out[e[var] as usize] += v;
        }
        while out.len() > 1 && *out.last().unwrap() == 0.0 {
            out.pop();
        }
        out
    }

    /// Multiply by an affine form `c0 + sum_i c_i x_i`.
    fn mul_affine(&self, c0: f64, lin: &[f64]) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if c0 != 0.0 {
                p.add_term(e.clone(), c * c0);
            }
            for (i, &l) in lin.iter().enumerate() {
                if l != 0.0 {
                    let mut ne = e.clone();
                    ne[i] += 1;
                    p.add_term(ne, c * l);
                }
            }
        }
        p
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, &c) in &o.terms {
            p.add_term(e.clone(), c);
        }
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, &c) in &o.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &o.terms {
                let e: Vec<u16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

/// Affine matrix entry `c0 + sum_i lin[i] x_i`.
#[derive(Debug, Clone)]
pub struct AffineEntry {
    pub c0: f64,
    pub lin: Vec<f64>,
}

impl AffineEntry {
    fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.lin.iter().all(|&x| x == 0.0)
    }
}

/// Exact determinant of a matrix of affine entries by cofactor expansion
/// memoized over column subsets.
pub fn affine_determinant(entries: &[Vec<AffineEntry>], nvars: usize) -> Poly {
    let n = entries.len();
    if n == 0 {
        return Poly::constant(nvars, 1.0);
    }
    let mut prev: BTreeMap<u32, Poly> = BTreeMap::new();
    prev.insert(0, Poly::constant(nvars, 1.0));
    for r in (0..n).rev() {
        let mut cur: BTreeMap<u32, Poly> = BTreeMap::new();
        for (mask, p) in &prev {
            if p.is_zero() {
                continue;
            }
            for j in 0..n {
                let bit = 1u32 << j;
                if mask & bit != 0 || entries[r][j].is_zero() {
                    continue;
                }
                let nm = mask | bit;
                let sign = if (nm & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let e = &entries[r][j];
                let lin: Vec<f64> = e.lin.iter().map(|x| x * sign).collect();
                let term = p.mul_affine(e.c0 * sign, &lin);
                let slot = cur.entry(nm).or_insert_with(|| Poly::zero(nvars));
                *slot = &*slot + &term;
            }
        }
        prev = cur;
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    prev.remove(&full).unwrap_or_else(|| Poly::zero(nvars))
}
