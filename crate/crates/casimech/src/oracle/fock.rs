//! Truncated tensor-product Fock basis and sparse operators on it.
//!
//! Ladders are ordered as the cavity modes of the truncation followed by
//! the mechanical mode, which varies fastest.

use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::model::SystemConfig;
use crate::{Error, Result};

type C = Complex64;

/// Default Hilbert-space dimension cap.
pub const DIMENSION_CAP: usize = 200_000;

/// Basis truncation. `n_max` and `m_max` count retained levels, so a ladder
/// with `n_max = 10` holds 0..=9 quanta.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    pub modes: Vec<usize>,
    pub n_max: usize,
    pub m_max: usize,
    pub cap: usize,
}

impl Truncation {
    /// Every cavity mode of `cfg`.
    pub fn for_config(cfg: &SystemConfig, n_max: usize, m_max: usize) -> Self {
        Self { modes: (1..=cfg.cavity.num_modes).collect(), n_max, m_max, cap: DIMENSION_CAP }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.n_max; self.modes.len()];
        d.push(self.m_max);
        d
    }

    pub fn dimension(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.modes.is_empty() || self.modes.len() > 4 {
            return Err(Error::invalid("truncation.modes", "between 1 and 4 cavity modes"));
        }
        if let Some(&n) = self.modes.iter().find(|&&n| n == 0 || n > cfg.cavity.num_modes) {
            return Err(Error::invalid("truncation.modes", format!("mode {n} not in the cavity")));
        }
        if self.n_max < 3 || self.m_max < 3 {
            return Err(Error::invalid("truncation", "need at least 3 levels per ladder"));
        }
        let dim = self.dimension();
        if dim > self.cap {
            return Err(Error::invalid("truncation", format!("dimension {dim} exceeds cap {}", self.cap)));
        }
        for n in [cfg.state.k, cfg.state.kp] {
            let used = (n == cfg.state.k && cfg.state.mu_k != 0.0)
                || (n == cfg.state.kp && cfg.state.mu_kp != 0.0)
                || cfg.drives.iter().any(|d| cfg.target_mode(d.target) == Some(n) && d.is_active());
            if used && !self.modes.contains(&n) {
                return Err(Error::invalid("truncation.modes", format!("mode {n} is populated but not retained")));
            }
        }
        Ok(())
    }
}

/// Sparse operator with a descriptive label.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub label: String,
    pub mat: CsMat<C>,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CsMat<C> {
        let t = self.mat.transpose_view().to_csr();
        t.map(|z| z.conj())
    }

    /// max |A − A†| over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.mat - &self.adjoint();
        d.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[C], y: &mut [C]) {
        spmv(&self.mat, x, y);
    }
}

/// y = A x for a CSR matrix.
pub fn spmv(a: &CsMat<C>, x: &[C], y: &mut [C]) {
    for (row, vec) in a.outer_iterator().enumerate() {
        let mut s = C::new(0.0, 0.0);
        for (col, &v) in vec.iter() {
            s += v * x[col];
        }
        y[row] = s;
    }
}

/// y += c·A x.
pub fn spmv_add(a: &CsMat<C>, c: C, x: &[C], y: &mut [C]) {
    for (row, vec) in a.outer_iterator().enumerate() {
        let mut s = C::new(0.0, 0.0);
        for (col, &v) in vec.iter() {
            s += v * x[col];
        }
        y[row] += c * s;
    }
}

/// Index arithmetic for the product basis.
#[derive(Clone, Debug)]
pub struct Basis {
    pub dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl Basis {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let dim = dims.iter().product();
        Self { dims, strides, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ladders(&self) -> usize {
        self.dims.len()
    }

    /// Occupation of ladder `l` in basis state `idx`.
    pub fn level(&self, idx: usize, l: usize) -> usize {
        (idx / self.strides[l]) % self.dims[l]
    }

    /// Annihilation operator of ladder `l`.
    pub fn lowering(&self, l: usize) -> CsMat<C> {
        let mut tri = TriMat::new((self.dim, self.dim));
        for idx in 0..self.dim {
            let n = self.level(idx, l);
            if n > 0 {
                tri.add_triplet(idx - self.strides[l], idx, C::new((n as f64).sqrt(), 0.0));
            }
        }
        tri.to_csr()
    }

    /// Number operator of ladder `l` as a diagonal.
    pub fn number_diag(&self, l: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.level(i, l) as f64).collect()
    }

    pub fn identity(&self) -> CsMat<C> {
        CsMat::eye(self.dim)
    }

    /// Tensor product of single-ladder vectors.
    pub fn product_state(&self, factors: &[Vec<C>]) -> Vec<C> {
        let mut out = vec![C::new(1.0, 0.0)];
        for f in factors {
            let mut next = Vec::with_capacity(out.len() * f.len());
            for &a in &out {
                for &b in f {
                    next.push(a * b);
                }
            }
            out = next;
        }
        out
    }
}

/// Operator set of the cavity–mirror system in dimensionless units.
pub struct SystemOperators {
    pub basis: Basis,
    pub modes: Vec<usize>,
    /// Cavity lowering operators, in truncation order.
    pub a: Vec<CsMat<C>>,
    pub b: CsMat<C>,
    /// H₀ = Σωₙaₙ†aₙ + ωb†b.
    pub h0: CsMat<C>,
    /// H_I = −½(b + b†):Φ²:.
    pub h_int: CsMat<C>,
    /// :Φ²:/2, the field part of the radiation force.
    pub force: CsMat<C>,
}

impl SystemOperators {
    pub fn new(cfg: &SystemConfig, trunc: &Truncation) -> Result<Self> {
        trunc.validate(cfg)?;
        let basis = Basis::new(trunc.dims());
        let sp = cfg.spectrum();
        let nl = trunc.modes.len();
        let a: Vec<CsMat<C>> = (0..nl).map(|l| basis.lowering(l)).collect();
        let b = basis.lowering(nl);
        let dag = |m: &CsMat<C>| m.transpose_view().to_csr().map(|z| z.conj());
        let mut h0 = diag(&basis.number_diag(nl), cfg.omega_tilde());
        for (l, &n) in trunc.modes.iter().enumerate() {
            h0 = &h0 + &diag(&basis.number_diag(l), sp.freq[n - 1]);
        }
        // :Φ²: built in normal order, exact on the truncated ladders
        let mut phi2: CsMat<C> = CsMat::zero((basis.dim(), basis.dim()));
        for (l, &n) in trunc.modes.iter().enumerate() {
            for (lp, &np) in trunc.modes.iter().enumerate() {
                let c = sp.sign[n - 1] * sp.weight[n - 1] * sp.sign[np - 1] * sp.weight[np - 1];
                let (an, anp) = (&a[l], &a[lp]);
                let (dn, dnp) = (dag(an), dag(anp));
                let t = &(&(an * anp) + &(&dn * &dnp)) + &(&(&dn * anp) + &(&dnp * an));
                phi2 = &phi2 + &t.map(|z| z * c);
            }
        }
        let qb = &b + &dag(&b);
        let h_int = (&qb * &phi2).map(|z| z * -0.5);
        let force = phi2.map(|z| z * 0.5);
        Ok(Self { basis, modes: trunc.modes.clone(), a, b, h0, h_int, force })
    }

    /// Ladder index of cavity mode n.
    pub fn ladder_of(&self, n: usize) -> Option<usize> {
        self.modes.iter().position(|&m| m == n)
    }

    pub fn static_hamiltonian(&self, epsilon: f64) -> FockOperator {
        FockOperator {
            label: "H0 + eps*H_I".into(),
            mat: &self.h0 + &self.h_int.map(|z| z * epsilon),
        }
    }
}

fn diag(d: &[f64], scale: f64) -> CsMat<C> {
    let mut tri = TriMat::new((d.len(), d.len()));
    for (i, &v) in d.iter().enumerate() {
        if v != 0.0 {
            tri.add_triplet(i, i, C::new(v * scale, 0.0));
        }
    }
    tri.to_csr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dimensionless_massive_system, dimensionless_system, InitialState};

    fn ops(modes: usize, n: usize, m: usize) -> (SystemConfig, SystemOperators) {
        let cfg = dimensionless_system(modes, 2.0, 1e-3, InitialState::default(), vec![]).unwrap();
        let t = Truncation::for_config(&cfg, n, m);
        let o = SystemOperators::new(&cfg, &t).unwrap();
        (cfg, o)
    }

    #[test]
    fn ladder_commutator_below_top_level() {
        let (_, o) = ops(2, 5, 6);
        for (l, a) in o.a.iter().chain([&o.b]).enumerate() {
            let ad = a.transpose_view().to_csr().map(|z| z.conj());
            let comm = &(a * &ad) - &(&ad * a);
            for idx in 0..o.basis.dim() {
                let top = o.basis.level(idx, l) + 1 == o.basis.dims[l];
                let v = comm.get(idx, idx).copied().unwrap_or_default();
                if !top {
                    assert!((v - C::new(1.0, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn free_hamiltonian_is_diagonal_count() {
        let (_, o) = ops(2, 4, 5);
        let h = o.static_hamiltonian(0.0);
        for idx in 0..o.basis.dim() {
            let e = o.basis.level(idx, 0) as f64 + 2.0 * o.basis.level(idx, 1) as f64 + 2.0 * o.basis.level(idx, 2) as f64;
            assert!((h.mat.get(idx, idx).copied().unwrap_or_default().re - e).abs() < 1e-14);
        }
        assert_eq!(h.mat.nnz(), o.basis.dim() - 1);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let (_, o) = ops(3, 4, 5);
        let h = o.static_hamiltonian(1e-3);
        assert!(h.hermiticity_defect() <= 1e-14 * h.max_abs());
    }

    #[test]
    fn intermode_sign() {
        // coefficient of a₁†a₂†b† in H_I is −½·2·s₁s₂w₁w₂ = +√2
        let (_, o) = ops(2, 3, 3);
        let idx = |n1: usize, n2: usize, m: usize| (n1 * 3 + n2) * 3 + m;
        let v = o.h_int.get(idx(1, 1, 1), idx(0, 0, 0)).copied().unwrap();
        assert!((v.re - 2f64.sqrt()).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn massive_coupling_halves_mode_one() {
        let s = InitialState::default();
        let m = dimensionless_massive_system(2, 1.0, 2.0 * 2f64.sqrt(), 1e-3, s.clone(), vec![]).unwrap();
        let z = dimensionless_system(2, 2.0, 1e-3, s, vec![]).unwrap();
        let t = Truncation::for_config(&m, 3, 3);
        let (om, oz) = (SystemOperators::new(&m, &t).unwrap(), SystemOperators::new(&z, &t).unwrap());
        let idx = |n1: usize, n2: usize, mm: usize| (n1 * 3 + n2) * 3 + mm;
        let get = |o: &SystemOperators| o.h_int.get(idx(2, 0, 1), idx(0, 0, 0)).copied().unwrap().re;
        // w₁² = p₁²/ω₁ with ω₁ = √2 p₁, against w₁² = p₁ for the massless field
        let ratio = get(&om) / get(&oz);
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14, "{ratio}");
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = dimensionless_system(4, 2.0, 1e-3, InitialState::default(), vec![]).unwrap();
        let mut t = Truncation::for_config(&cfg, 20, 20);
        t.cap = 1000;
        assert!(t.validate(&cfg).is_err());
    }
}
