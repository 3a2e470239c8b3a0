//! Sums of complex exponentials and their exact (nested) time integrals.
//!
//! Every perturbative integrand of the engine is a finite sum of terms
//! `c·exp(a t' + b t'')`. The integrals over `0 ≤ t'' ≤ t' ≤ t` reduce to
//! divided differences of `z ↦ exp(z t)`, evaluated here without cancellation.

use std::collections::HashMap;

use num_complex::Complex64;

use super::special::phi1;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Divided difference g[a, b] of g(z) = e^{z t}.
pub fn dd1(a: C, b: C, t: f64) -> C {
    t * (a * t).exp() * phi1((b - a) * t)
}

/// Divided difference g[x0, x1, x2] of g(z) = e^{z t}.
pub fn dd2(x0: C, x1: C, x2: C, t: f64) -> C {
    let nodes = [x0, x1, x2];
    let pairs = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)];
    let (mut far, mut dmax) = (pairs[0], -1.0);
    for p in pairs {
        let d = (nodes[p.0] - nodes[p.1]).norm();
        if d > dmax {
            dmax = d;
            far = p;
        }
    }
    if dmax * t < 1.0 {
        let m = (x0 + x1 + x2) / 3.0;
        let y = [(x0 - m) * t, (x1 - m) * t, (x2 - m) * t];
        const J: usize = 28;
        let mut h = [ZERO; J];
        h[0] = C::new(1.0, 0.0);
        for yi in y {
            for j in 1..J {
                let prev = h[j - 1];
                h[j] += yi * prev;
            }
        }
        let mut sum = ZERO;
        let mut fact = 2.0;
        for (j, hj) in h.iter().enumerate() {
            sum += hj / fact;
            fact *= j as f64 + 3.0;
        }
        return t * t * (m * t).exp() * sum;
    }
    let (a, c, mid) = (nodes[far.0], nodes[far.1], nodes[far.2]);
    (dd1(mid, c, t) - dd1(a, mid, t)) / (c - a)
}

fn key(z: C) -> (i64, i64) {
    ((z.re * 1e10).round() as i64, (z.im * 1e10).round() as i64)
}

/// f(s) = Σ c·e^{a s}.
#[derive(Clone, Debug, Default)]
pub struct ExpSum1 {
    pub terms: Vec<(C, C)>,
}

impl ExpSum1 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(c: C, a: C) -> Self {
        Self { terms: vec![(c, a)] }
    }

    pub fn push(&mut self, c: C, a: C) {
        if c != ZERO {
            self.terms.push((c, a));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == ZERO)
    }

    /// Adds the complex conjugate, giving 2·Re of the sum.
    pub fn plus_conj(&self) -> Self {
        let mut out = self.clone();
        for &(c, a) in &self.terms {
            out.terms.push((c.conj(), a.conj()));
        }
        out
    }

    pub fn scale(&self, k: C) -> Self {
        Self { terms: self.terms.iter().map(|&(c, a)| (c * k, a)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: HashMap<(i64, i64), (C, C)> = HashMap::new();
        for &(c1, a1) in &self.terms {
            for &(c2, a2) in &other.terms {
                let a = a1 + a2;
                let e = map.entry(key(a)).or_insert((ZERO, a));
                e.0 += c1 * c2;
            }
        }
        let mut terms: Vec<(C, C)> = map.into_values().collect();
        sort_terms1(&mut terms);
        Self { terms }
    }

    pub fn eval(&self, s: f64) -> C {
        self.terms.iter().map(|&(c, a)| c * (a * s).exp()).sum()
    }

    /// ∫₀^t f(s) ds.
    pub fn integral(&self, t: f64) -> C {
        self.terms.iter().map(|&(c, a)| c * dd1(ZERO, a, t)).sum()
    }
}

fn sort_terms1(terms: &mut [(C, C)]) {
    terms.sort_by(|x, y| {
        x.1.re.total_cmp(&y.1.re).then(x.1.im.total_cmp(&y.1.im))
    });
}

/// f(t', t'') = Σ c·e^{a t' + b t''}.
#[derive(Clone, Debug, Default)]
pub struct ExpSum2 {
    pub terms: Vec<(C, C, C)>,
}

impl ExpSum2 {
    /// A function of the outer variable t' only.
    pub fn outer(f: &ExpSum1) -> Self {
        Self { terms: f.terms.iter().map(|&(c, a)| (c, a, ZERO)).collect() }
    }

    /// A function of the inner variable t'' only.
    pub fn inner(f: &ExpSum1) -> Self {
        Self { terms: f.terms.iter().map(|&(c, a)| (c, ZERO, a)).collect() }
    }

    /// A function of d = t'' − t'.
    pub fn of_difference(f: &ExpSum1) -> Self {
        Self { terms: f.terms.iter().map(|&(c, a)| (c, -a, a)).collect() }
    }

    /// A function of S = t' + t''.
    pub fn of_sum(f: &ExpSum1) -> Self {
        Self { terms: f.terms.iter().map(|&(c, a)| (c, a, a)).collect() }
    }

    pub fn scale(&self, k: C) -> Self {
        Self { terms: self.terms.iter().map(|&(c, a, b)| (c * k, a, b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: HashMap<(i64, i64, i64, i64), (C, C, C)> = HashMap::new();
        for &(c1, a1, b1) in &self.terms {
            if c1 == ZERO {
                continue;
            }
            for &(c2, a2, b2) in &other.terms {
                let (a, b) = (a1 + a2, b1 + b2);
                let (ka, kb) = (key(a), key(b));
                let e = map.entry((ka.0, ka.1, kb.0, kb.1)).or_insert((ZERO, a, b));
                e.0 += c1 * c2;
            }
        }
        let mut terms: Vec<(C, C, C)> = map.into_values().filter(|t| t.0 != ZERO).collect();
        terms.sort_by(|x, y| {
            x.1.re
                .total_cmp(&y.1.re)
                .then(x.1.im.total_cmp(&y.1.im))
                .then(x.2.re.total_cmp(&y.2.re))
                .then(x.2.im.total_cmp(&y.2.im))
        });
        Self { terms }
    }

    pub fn eval(&self, t1: f64, t2: f64) -> C {
        self.terms.iter().map(|&(c, a, b)| c * (a * t1 + b * t2).exp()).sum()
    }

    /// ∫₀^t dt' ∫₀^{t'} dt'' f(t', t'').
    pub fn nested_integral(&self, t: f64) -> C {
        self.terms.iter().map(|&(c, a, b)| c * dd2(ZERO, a, a + b, t)).sum()
    }
}
