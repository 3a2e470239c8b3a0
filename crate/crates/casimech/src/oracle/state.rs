//! Initial states: coherent cavity modes and a displaced squeezed thermal
//! mirror, held as an exactly weighted ensemble of pure states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fock::Basis;
use crate::model::SystemConfig;
use crate::{Error, Result};

type C = Complex64;

/// Thermal weights below this value are dropped.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

/// ρ = Σ pᵢ|ψᵢ⟩⟨ψᵢ| with orthonormal members (before truncation).
#[derive(Clone, Debug)]
pub struct FockDensity {
    pub members: Vec<(f64, Vec<C>)>,
    /// Norm lost when projecting members onto the truncated basis.
    pub truncation_loss: f64,
    pub tag: String,
}

impl FockDensity {
    pub fn dim(&self) -> usize {
        self.members.first().map_or(0, |m| m.1.len())
    }

    /// Dense density matrix; intended for small dimensions.
    pub fn to_matrix(&self) -> DMatrix<C> {
        let d = self.dim();
        let mut rho = DMatrix::zeros(d, d);
        for (p, v) in &self.members {
            for i in 0..d {
                if v[i] == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    rho[(i, j)] += *p * v[i] * v[j].conj();
                }
            }
        }
        rho
    }

    pub fn purity(&self) -> f64 {
        purity(&self.members)
    }
}

/// Tr ρ² of a weighted ensemble.
pub fn purity(members: &[(f64, Vec<C>)]) -> f64 {
    let mut s = 0.0;
    for (i, (pi, vi)) in members.iter().enumerate() {
        for (pj, vj) in &members[i..] {
            let o = dot(vi, vj).norm_sqr();
            s += if std::ptr::eq(vi, vj) { pi * pj * o } else { 2.0 * pi * pj * o };
        }
    }
    s
}

pub fn dot(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Truncated coherent state |μ⟩ on `levels` levels, renormalized.
pub fn coherent(mu: C, levels: usize) -> Vec<C> {
    let mut v = Vec::with_capacity(levels);
    let mut c = C::new((-0.5 * mu.norm_sqr()).exp(), 0.0);
    for n in 0..levels {
        v.push(c);
        c = c * mu / ((n + 1) as f64).sqrt();
    }
    normalize(&mut v);
    v
}

fn normalize(v: &mut [C]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    n
}

/// Members D(β)S(ζ)|m⟩ with thermal weights, computed on an enlarged ladder
/// and then truncated to `levels`. Returns (weight, vector, lost norm²).
pub fn dst_members(cfg: &SystemConfig, levels: usize) -> Result<Vec<(f64, Vec<C>, f64)>> {
    let nt = cfg.thermal_occupation();
    let mut weights = Vec::new();
    let mut m = 0usize;
    loop {
        let p = if nt == 0.0 {
            if m == 0 { 1.0 } else { 0.0 }
        } else {
            (nt / (1.0 + nt)).powi(m as i32) / (1.0 + nt)
        };
        if p < WEIGHT_CUTOFF {
            break;
        }
        weights.push(p);
        m += 1;
        if m > 400 {
            return Err(Error::invalid("state.thermal", "thermal occupation too large for the oracle"));
        }
    }
    let big = (2 * levels).max(weights.len() + levels) + 40;
    let s = &cfg.state;
    let zeta = C::from_polar(s.squeeze_r, s.squeeze_phi);
    let beta = s.beta();
    // generator of D(β)S(ζ) = exp(βb† − β*b)·exp(½(ζ*b² − ζb†²))
    let mut lower = DMatrix::<C>::zeros(big, big);
    for n in 1..big {
        lower[(n - 1, n)] = C::new((n as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    let gen_s = (&lower * &lower * zeta.conj() - &raise * &raise * zeta) * C::new(0.5, 0.0);
    let gen_d = &raise * beta - &lower * beta.conj();
    let u = gen_d.exp() * gen_s.exp();
    let total: f64 = weights.iter().sum();
    Ok(weights
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let mut v: Vec<C> = (0..levels).map(|i| u[(i, m)]).collect();
            let kept = normalize(&mut v).powi(2);
            (p / total, v, 1.0 - kept)
        })
        .collect())
}

/// Initial ensemble on `basis`: coherent amplitudes μ_k, μ_k′, vacuum for
/// the other retained modes, and the DST mirror state.
pub fn initial_state(cfg: &SystemConfig, basis: &Basis, modes: &[usize]) -> Result<FockDensity> {
    let nl = modes.len();
    let mut factors: Vec<Vec<C>> = modes
        .iter()
        .map(|&n| coherent(C::new(amplitude(cfg, n), 0.0), basis.dims[n_index(modes, n)]))
        .collect();
    let mut loss: f64 = 0.0;
    for &n in modes {
        let mu = amplitude(cfg, n);
        let levels = basis.dims[n_index(modes, n)];
        let kept: f64 = (0..levels).map(|j| poisson(mu * mu, j)).sum();
        loss = loss.max(1.0 - kept);
    }
    let mut members = Vec::new();
    for (p, v, lost) in dst_members(cfg, basis.dims[nl])? {
        factors.push(v);
        members.push((p, basis.product_state(&factors)));
        factors.pop();
        loss = loss.max(lost);
    }
    Ok(FockDensity { members, truncation_loss: loss, tag: "coherent ⊗ DST".into() })
}

fn amplitude(cfg: &SystemConfig, n: usize) -> f64 {
    if n == cfg.state.k {
        cfg.state.mu_k
    } else if n == cfg.state.kp {
        cfg.state.mu_kp
    } else {
        0.0
    }
}

fn n_index(modes: &[usize], n: usize) -> usize {
    modes.iter().position(|&m| m == n).expect("retained mode")
}

fn poisson(mean: f64, j: usize) -> f64 {
    let mut p = (-mean).exp();
    for i in 1..=j {
        p *= mean / i as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dimensionless_system, InitialState, Thermal};

    fn cfg(state: InitialState) -> SystemConfig {
        dimensionless_system(2, 2.0, 1e-3, state, vec![]).unwrap()
    }

    #[test]
    fn dst_phonon_number_matches_formula() {
        let state = InitialState {
            beta_mag: 2.0,
            theta: 0.3,
            squeeze_r: 0.5,
            squeeze_phi: 0.7,
            thermal: Thermal::Occupation(0.3),
            ..Default::default()
        };
        let c = cfg(state);
        // truncation where the Boltzmann tail and the squeezed tails are negligible
        let members = dst_members(&c, 90).unwrap();
        let n: f64 = members
            .iter()
            .map(|(p, v, _)| p * v.iter().enumerate().map(|(i, z)| i as f64 * z.norm_sqr()).sum::<f64>())
            .sum();
        assert!((n / c.initial_phonons() - 1.0).abs() < 1e-8, "{n} {}", c.initial_phonons());
    }

    #[test]
    fn density_matrix_is_a_state() {
        let state = InitialState {
            mu_k: 0.6,
            beta_mag: 0.4,
            squeeze_r: 0.2,
            thermal: Thermal::Occupation(0.2),
            ..Default::default()
        };
        let c = cfg(state);
        let basis = Basis::new(vec![6, 4, 12]);
        let rho = initial_state(&c, &basis, &[1, 2]).unwrap();
        let m = rho.to_matrix();
        assert!((m.trace().re - 1.0).abs() < 1e-10);
        assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-14));
        let eig = nalgebra::SymmetricEigen::new(hermitian_as_real(&m));
        assert!(eig.eigenvalues.min() > -1e-10);
        assert!(rho.purity() < 1.0);
    }

    /// Real symmetric embedding [[Re, −Im], [Im, Re]] with the same spectrum.
    fn hermitian_as_real(m: &DMatrix<C>) -> DMatrix<f64> {
        let d = m.nrows();
        DMatrix::from_fn(2 * d, 2 * d, |i, j| {
            let z = m[(i % d, j % d)];
            match (i < d, j < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }

    #[test]
    fn vacuum_is_pure() {
        let c = cfg(InitialState::default());
        let basis = Basis::new(vec![4, 4, 4]);
        let rho = initial_state(&c, &basis, &[1, 2]).unwrap();
        assert_eq!(rho.members.len(), 1);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        assert!((rho.members[0].1[0].re - 1.0).abs() < 1e-15);
    }
}
