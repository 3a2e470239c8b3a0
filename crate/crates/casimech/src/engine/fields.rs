//! Classical (zeroth-order) trajectories and vacuum correlators as sums of
//! exponentials in dimensionless time.
//!
//! With H_I = −½ Q_b :Φ²:, Q_b = b + b† and Φ = Σ sₙwₙ(aₙ + aₙ†), the
//! interaction-picture expectation values split into the classical field
//! φ(s), the classical mirror quadrature q(s) and Gaussian fluctuations.

use num_complex::Complex64;

use crate::aux::AuxFunctions;
use crate::model::{SystemConfig, Target};
use crate::numeric::expsum::{ExpSum1, ExpSum2};
use crate::{Error, Result};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn ex(c: C, a: C) -> ExpSum1 {
    ExpSum1::term(c, a)
}

pub(crate) struct Fields {
    pub freq: Vec<f64>,
    pub weight: Vec<f64>,
    pub sign: Vec<f64>,
    /// μₙ + αₙ(s) for every mode, indexed by n − 1.
    pub amp: Vec<ExpSum1>,
    pub omega: f64,
    pub beta: C,
    /// β + α_b(s).
    pub beta_bar: ExpSum1,
    pub n_s: f64,
    pub m: C,
}

impl Fields {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let aux = AuxFunctions::new(cfg);
        let sp = cfg.spectrum();
        let mut amp = vec![ExpSum1::new(); sp.len()];
        for (target, mu) in [(Target::ModeK, cfg.state.mu_k), (Target::ModeKp, cfg.state.mu_kp)] {
            let n = cfg.target_mode(target).expect("cavity target");
            let mut a = ExpSum1::new();
            a.push(C::new(mu, 0.0), C::new(0.0, 0.0));
            let alpha = aux.alpha_expsum(target).ok_or_else(unsupported_table)?;
            amp[n - 1] = a.add(&alpha);
        }
        let mut beta_bar = ExpSum1::new();
        beta_bar.push(cfg.state.beta(), C::new(0.0, 0.0));
        let alpha_b = aux.alpha_expsum(Target::Mechanical).ok_or_else(unsupported_table)?;
        Ok(Self {
            freq: sp.freq.clone(),
            weight: sp.weight.clone(),
            sign: sp.sign.clone(),
            amp,
            omega: cfg.omega_tilde(),
            beta: cfg.state.beta(),
            beta_bar: beta_bar.add(&alpha_b),
            n_s: cfg.fluctuation_phonons(),
            m: cfg.anomalous_moment(),
        })
    }

    /// Same system with every cavity mode in vacuum.
    pub fn without_field(&self) -> Self {
        Self {
            freq: self.freq.clone(),
            weight: self.weight.clone(),
            sign: self.sign.clone(),
            amp: vec![ExpSum1::new(); self.freq.len()],
            omega: self.omega,
            beta: self.beta,
            beta_bar: self.beta_bar.clone(),
            n_s: self.n_s,
            m: self.m,
        }
    }

    /// e^{−iω s}·f(s).
    fn rotate(f: &ExpSum1, w: f64) -> ExpSum1 {
        ExpSum1 { terms: f.terms.iter().map(|&(c, a)| (c, a - I * w)).collect() }
    }

    /// Classical field φ(s) = Σ sₙwₙ·2Re[e^{−iωₙs}(μₙ + αₙ(s))].
    pub fn phi(&self) -> ExpSum1 {
        let mut out = ExpSum1::new();
        for n in 0..self.freq.len() {
            if self.amp[n].is_zero() {
                continue;
            }
            let r = Self::rotate(&self.amp[n], self.freq[n]).scale(C::new(self.sign[n] * self.weight[n], 0.0));
            out = out.add(&r);
        }
        out.plus_conj()
    }

    /// Mirror quadrature q(s) = 2Re[e^{−iωs}(β + α_b(s))].
    pub fn q(&self) -> ExpSum1 {
        Self::rotate(&self.beta_bar, self.omega).plus_conj()
    }

    /// D(d) = Σ wₙ² sin(ωₙd).
    pub fn d_sum(&self) -> ExpSum1 {
        let mut out = ExpSum1::new();
        for n in 0..self.freq.len() {
            let w2 = self.weight[n].powi(2);
            out.push(w2 / (2.0 * I), I * self.freq[n]);
            out.push(-w2 / (2.0 * I), -I * self.freq[n]);
        }
        out
    }

    /// C(d) = Σ wₙ² cos(ωₙd).
    pub fn c_sum(&self) -> ExpSum1 {
        let mut out = ExpSum1::new();
        for n in 0..self.freq.len() {
            let w2 = self.weight[n].powi(2);
            out.push(C::new(0.5 * w2, 0.0), I * self.freq[n]);
            out.push(C::new(0.5 * w2, 0.0), -I * self.freq[n]);
        }
        out
    }

    /// G as a function of d = t'' − t': Σ wₙ² e^{−iωₙ(t'−t'')} = Σ wₙ² e^{iωₙd}.
    pub fn g_sum(&self) -> ExpSum2 {
        let mut out = ExpSum1::new();
        for n in 0..self.freq.len() {
            out.push(C::new(self.weight[n].powi(2), 0.0), I * self.freq[n]);
        }
        ExpSum2::of_difference(&out)
    }

    /// sin(ω(t − s)) as a function of s.
    fn sin_from(&self, t: f64) -> ExpSum1 {
        let w = self.omega;
        let mut s = ExpSum1::new();
        s.push((I * w * t).exp() / (2.0 * I), -I * w);
        s.push(-(-I * w * t).exp() / (2.0 * I), I * w);
        s
    }

    /// Im[e^{−iνs}z] as a function of s.
    fn im_rotated(z: C, nu: f64) -> ExpSum1 {
        let mut s = ExpSum1::new();
        s.push(z / (2.0 * I), -I * nu);
        s.push(-z.conj() / (2.0 * I), I * nu);
        s
    }

    /// First-order wall correction x̃⁽²⁾(t) = ∫₀ᵗ φ(s)² sin(ω(t−s)) ds.
    pub fn x2(&self, t: f64) -> f64 {
        let phi = self.phi();
        if phi.is_zero() {
            return 0.0;
        }
        phi.mul(&phi).mul(&self.sin_from(t)).integral(t).re
    }

    /// First-order photon correction of mode n (1-based).
    pub fn nk1(&self, n: usize, t: f64) -> f64 {
        let i = n - 1;
        let phi = self.phi();
        if phi.is_zero() {
            return 0.0;
        }
        let a = self.amp[i].eval(t);
        let im = Self::im_rotated(a, self.freq[i]);
        2.0 * self.sign[i] * self.weight[i] * self.q().mul(&phi).mul(&im).integral(t).re
    }

    /// First-order phonon correction.
    pub fn nb1(&self, t: f64) -> f64 {
        let phi = self.phi();
        if phi.is_zero() {
            return 0.0;
        }
        let im = Self::im_rotated(self.beta_bar.eval(t), self.omega);
        phi.mul(&phi).mul(&im).integral(t).re
    }

    /// ⟨Q''Q'⟩ for the mechanical state, as a function of (t', t'').
    fn qq(&self) -> ExpSum2 {
        let q = self.q();
        let w = self.omega;
        let mut s = ExpSum1::new();
        s.push(self.m, -I * w);
        s.push(self.m.conj(), I * w);
        let mut d = ExpSum1::new();
        d.push(C::new(self.n_s + 1.0, 0.0), -I * w);
        d.push(C::new(self.n_s, 0.0), I * w);
        ExpSum2::inner(&q)
            .mul(&ExpSum2::outer(&q))
            .add(&ExpSum2::of_sum(&s))
            .add(&ExpSum2::of_difference(&d))
    }

    /// Second-order photon correction of mode n (1-based).
    pub fn nk2(&self, n: usize, t: f64) -> f64 {
        let i = n - 1;
        let (sk, wk, ok) = (self.sign[i], self.weight[i], self.freq[i]);
        let a = self.amp[i].eval(t);
        // r(t') = 2i Im[e^{−iω_k t'}A]
        let mut r = ExpSum1::new();
        r.push(a, -I * ok);
        r.push(-a.conj(), I * ok);
        let phi = self.phi();
        let phi1 = ExpSum2::outer(&phi);
        let phi2 = ExpSum2::inner(&phi);
        let r1 = ExpSum2::outer(&r);
        let kappa1 = ExpSum2::of_difference(&self.d_sum()).scale(C::new(0.0, -2.0));
        let mut cosk = ExpSum1::new();
        cosk.push(C::new(-sk * wk, 0.0), I * ok);
        cosk.push(C::new(-sk * wk, 0.0), -I * ok);
        let kappa2 = ExpSum2::of_difference(&cosk);
        let mut sink = ExpSum1::new();
        sink.push(1.0 / (2.0 * I), I * ok);
        sink.push(-1.0 / (2.0 * I), -I * ok);
        let sink = ExpSum2::of_difference(&sink);
        let cd = ExpSum2::of_difference(&self.c_sum());
        let x1 = kappa1
            .mul(&phi2.mul(&r1).scale(C::new(2.0, 0.0)).add(&sink.scale(2.0 * I * sk * wk)))
            .scale(C::new(2.0, 0.0))
            .add(
                &kappa2
                    .mul(&phi2.mul(&phi1).scale(C::new(2.0, 0.0)).add(&cd.scale(C::new(2.0, 0.0))))
                    .scale(C::new(2.0, 0.0)),
            );
        let ek = ExpSum2::of_difference(&ex(C::new(1.0, 0.0), I * ok));
        let g = self.g_sum();
        let x2 = phi1
            .mul(&r1)
            .mul(&phi2.mul(&phi2))
            .scale(C::new(2.0, 0.0))
            .add(&phi1.mul(&phi2).mul(&ek).scale(C::new(4.0 * sk * wk, 0.0)))
            .add(&r1.mul(&phi2).mul(&g).scale(C::new(4.0, 0.0)))
            .add(&g.mul(&ek).scale(C::new(4.0 * sk * wk, 0.0)));
        let w = self.omega;
        let mut comm = ExpSum1::new();
        comm.push(C::new(-1.0, 0.0), I * w);
        comm.push(C::new(1.0, 0.0), -I * w);
        let comm = ExpSum2::of_difference(&comm);
        let total = self.qq().mul(&x1).add(&comm.mul(&x2));
        (-0.25 * sk * wk * total.nested_integral(t)).re
    }

    /// Second-order phonon correction.
    pub fn nb2(&self, t: f64) -> f64 {
        let w = self.omega;
        let b = self.beta_bar.eval(t);
        let phi = self.phi();
        let phi1 = ExpSum2::outer(&phi);
        let phi2 = ExpSum2::inner(&phi);
        let mut k = ExpSum1::new();
        k.push(b, -I * w);
        k.push(-b.conj(), I * w);
        let mut s = ExpSum1::new();
        s.push(self.m, -I * w);
        s.push(-self.m.conj(), I * w);
        let mut d = ExpSum1::new();
        d.push(C::new(self.n_s, 0.0), I * w);
        d.push(C::new(-(self.n_s + 1.0), 0.0), -I * w);
        let qk = ExpSum2::inner(&self.q())
            .mul(&ExpSum2::outer(&k))
            .add(&ExpSum2::of_sum(&s))
            .add(&ExpSum2::of_difference(&d));
        let cd = ExpSum2::of_difference(&self.c_sum());
        let pp = ExpSum2::of_difference(&self.d_sum())
            .mul(&phi2.mul(&phi1).add(&cd))
            .scale(C::new(0.0, -8.0));
        let g = self.g_sum();
        let p1p2 = phi1
            .mul(&phi1)
            .mul(&phi2.mul(&phi2))
            .add(&phi1.mul(&phi2).mul(&g).scale(C::new(4.0, 0.0)))
            .add(&g.mul(&g).scale(C::new(2.0, 0.0)));
        let mut cos = ExpSum1::new();
        cos.push(C::new(-1.0, 0.0), I * w);
        cos.push(C::new(-1.0, 0.0), -I * w);
        let cqk = ExpSum2::of_difference(&cos);
        let total = qk.mul(&pp).add(&cqk.mul(&p1p2));
        (-0.25 * total.nested_integral(t)).re
    }

    /// Second-order correction to ⟨Q_b⟩ (third order of the wall position).
    pub fn q2(&self, t: f64) -> f64 {
        let phi = self.phi();
        let phi1 = ExpSum2::outer(&phi);
        let phi2 = ExpSum2::inner(&phi);
        let cd = ExpSum2::of_difference(&self.c_sum());
        let total = ExpSum2::outer(&self.sin_from(t))
            .mul(&ExpSum2::inner(&self.q()))
            .mul(&ExpSum2::of_difference(&self.d_sum()).mul(&phi2.mul(&phi1).add(&cd)));
        (-4.0 * total.nested_integral(t)).re
    }

    /// Vacuum-field second-order photon number of mode k, split per mode n of
    /// the partner photon: returns per-n contributions of each sub-term.
    pub fn vacuum_photon_terms(&self, k: usize, t: f64) -> Vec<VacuumTerms> {
        let i = k - 1;
        let wk2 = self.weight[i].powi(2);
        let q = self.q();
        let beta_only = Self::rotate(&ex(self.beta, C::new(0.0, 0.0)), self.omega).plus_conj();
        (0..self.freq.len())
            .map(|n| {
                let nu = self.freq[i] + self.freq[n];
                let pref = wk2 * self.weight[n].powi(2);
                let e = |x: f64| ex(C::new(1.0, 0.0), I * x).integral(t);
                let a = e(nu - self.omega);
                let b = e(nu + self.omega);
                let rot = ex(C::new(1.0, 0.0), I * nu);
                let j_full = q.mul(&rot).integral(t);
                let j_beta = beta_only.mul(&rot).integral(t);
                VacuumTerms {
                    beta: pref * j_beta.norm_sqr(),
                    drive: pref * (j_full.norm_sqr() - j_beta.norm_sqr()),
                    vac: pref * b.norm_sqr(),
                    incoherent: pref * (a.norm_sqr() + b.norm_sqr()),
                    anomalous: pref * 2.0 * a * b.conj(),
                }
            })
            .collect()
    }
}

/// Per-mode pieces of the vacuum-field photon number. The fluctuation part is
/// `incoherent·N_s + Re(anomalous·M)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct VacuumTerms {
    pub beta: f64,
    pub drive: f64,
    pub vac: f64,
    pub incoherent: f64,
    pub anomalous: C,
}

fn unsupported_table() -> Error {
    Error::invalid(
        "drives.form",
        "tabulated drives are supported up to first order only",
    )
}
