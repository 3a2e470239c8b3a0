//! Exact evolution of the truncated system.
//!
//! Each ensemble member is propagated with a fourth-order commutator-free
//! Magnus scheme while drives are on (step doubling for error control) and
//! with a single Krylov exponential per output interval once they are off.
//! Matrix exponentials act through Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use sprs::CsMat;

use super::fock::{spmv, spmv_add, FockOperator, SystemOperators, Truncation};
use super::state::{dot, purity, FockDensity};
use crate::aux::AuxFunctions;
use crate::model::{DriveForm, SystemConfig, Target};
use crate::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Populations above this in the top two levels of a ladder invalidate a run.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Drive amplitude below which a drive is treated as switched off.
const DRIVE_FLOOR: f64 = 1e-15;

const KRYLOV_DIM: usize = 40;
const MIN_STEP: f64 = 1e-12;

/// Sign convention of the drive Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DriveConvention {
    /// (λ_x − iλ_p)c† + h.c., which generates α = −i∫e^{iνs}(λ_x − iλ_p)ds.
    #[default]
    Consistent,
    /// 2λ_xX + 2λ_pP with X = (c + c†)/2, P = (c − c†)/2i, i.e.
    /// (λ_x + iλ_p)c† + h.c.
    Printed,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Local error bound per step (state-vector norm).
    pub tol: f64,
    pub convention: DriveConvention,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, convention: DriveConvention::Consistent }
    }
}

/// Observables at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSample {
    /// Seconds.
    pub t: f64,
    /// ⟨aₙ†aₙ⟩ for the retained modes, in truncation order.
    pub photons: Vec<f64>,
    pub phonons: f64,
    /// ⟨b + b†⟩, so that x/L = 1 + ε⟨b + b†⟩ in units of δL₀/L.
    pub q_b: f64,
    /// ⟨:Φ²:⟩/2.
    pub force: f64,
    /// ⟨H₀ + εH_I⟩ (drive excluded).
    pub energy: f64,
    pub purity: f64,
    /// Largest population in the top two levels of any ladder.
    pub leakage: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub modes: Vec<usize>,
    pub samples: Vec<OracleSample>,
    /// False when the leakage monitor fired.
    pub valid: bool,
    pub steps: usize,
}

impl Trajectory {
    /// Photon number of cavity mode n at every sample.
    pub fn photons_of(&self, n: usize) -> Option<Vec<f64>> {
        let l = self.modes.iter().position(|&m| m == n)?;
        Some(self.samples.iter().map(|s| s.photons[l]).collect())
    }

    pub fn max_leakage(&self) -> f64 {
        self.samples.iter().map(|s| s.leakage).fold(0.0, f64::max)
    }

    /// max |Tr ρ²(t) − Tr ρ²(0)|.
    pub fn purity_drift(&self) -> f64 {
        let p0 = self.samples.first().map_or(0.0, |s| s.purity);
        self.samples.iter().map(|s| (s.purity - p0).abs()).fold(0.0, f64::max)
    }
}

struct DriveTerm {
    target: Target,
    lower: CsMat<C>,
    raise: CsMat<C>,
}

/// Operators plus drive couplings of one configuration.
pub struct Oracle<'a> {
    cfg: &'a SystemConfig,
    pub ops: SystemOperators,
    h_static: CsMat<C>,
    drives: Vec<DriveTerm>,
    numbers: Vec<Vec<f64>>,
    top: Vec<Vec<bool>>,
    drive_end: f64,
}

impl<'a> Oracle<'a> {
    pub fn new(cfg: &'a SystemConfig, trunc: &Truncation) -> Result<Self> {
        let ops = SystemOperators::new(cfg, trunc)?;
        let h_static = ops.static_hamiltonian(cfg.epsilon()).mat;
        let dag = |m: &CsMat<C>| m.transpose_view().to_csr().map(|z| z.conj());
        let mut drives = Vec::new();
        let mut drive_end: f64 = 0.0;
        for d in cfg.drives.iter().filter(|d| d.is_active()) {
            let lower = match cfg.target_mode(d.target) {
                Some(n) => ops.a[ops.ladder_of(n).expect("validated by the truncation")].clone(),
                None => ops.b.clone(),
            };
            let raise = dag(&lower);
            drives.push(DriveTerm { target: d.target, lower, raise });
            let end = match &d.form {
                DriveForm::ExdrRamp => {
                    let r = d.ramp / cfg.unit();
                    let amp = 0.5 * d.g.abs() * r;
                    if amp > DRIVE_FLOOR { (amp / DRIVE_FLOOR).ln() / r } else { 0.0 }
                }
                DriveForm::Tabulated(tab) => cfg.tilde_time(*tab.times.last().expect("validated table")),
                DriveForm::Zero => 0.0,
            };
            drive_end = drive_end.max(end);
        }
        let basis = &ops.basis;
        let numbers: Vec<Vec<f64>> = (0..basis.ladders()).map(|l| basis.number_diag(l)).collect();
        let top = (0..basis.ladders())
            .map(|l| (0..basis.dim()).map(|i| basis.level(i, l) + 2 >= basis.dims[l]).collect())
            .collect();
        Ok(Self { cfg, ops, h_static, drives, numbers, top, drive_end })
    }

    /// Drive coefficient f_j multiplying c_j† at dimensionless time t.
    fn drive_coefficient(&self, target: Target, t: f64, conv: DriveConvention) -> C {
        let (x, p) = AuxFunctions::new(self.cfg).amplitudes(target, t);
        match conv {
            DriveConvention::Consistent => C::new(x, -p),
            DriveConvention::Printed => C::new(x, p),
        }
    }

    /// H(t) = H₀ + εH_I + H_dr(t), t in seconds.
    pub fn hamiltonian(&self, t: f64, conv: DriveConvention) -> FockOperator {
        let tt = self.cfg.tilde_time(t);
        let mut h = self.h_static.clone();
        for d in &self.drives {
            let f = self.drive_coefficient(d.target, tt, conv);
            h = &h + &(&d.raise.map(|z| z * f) + &d.lower.map(|z| z * f.conj()));
        }
        FockOperator { label: "H(t)".into(), mat: h }
    }

    /// y = (s·H_static + Σⱼ(gⱼcⱼ† + gⱼ*cⱼ))x.
    fn apply(&self, s: f64, g: &[C], x: &[C], y: &mut [C]) {
        y.iter_mut().for_each(|z| *z = ZERO);
        spmv_add(&self.h_static, C::new(s, 0.0), x, y);
        for (d, &gj) in self.drives.iter().zip(g) {
            if gj != ZERO {
                spmv_add(&d.raise, gj, x, y);
                spmv_add(&d.lower, gj.conj(), x, y);
            }
        }
    }

    fn observe(&self, t: f64, members: &[(f64, Vec<C>)]) -> OracleSample {
        let nl = self.numbers.len();
        let mut photons = vec![0.0; nl - 1];
        let (mut phonons, mut q_b, mut force, mut energy, mut norm) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut leak = vec![0.0; nl];
        let mut tmp = vec![ZERO; members.first().map_or(0, |m| m.1.len())];
        for (p, v) in members {
            let pops: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
            norm += p * pops.iter().sum::<f64>();
            for l in 0..nl {
                let n: f64 = pops.iter().zip(&self.numbers[l]).map(|(a, b)| a * b).sum();
                if l + 1 < nl {
                    photons[l] += p * n;
                } else {
                    phonons += p * n;
                }
                let top: f64 = pops.iter().zip(&self.top[l]).filter(|(_, &t)| t).map(|(a, _)| a).sum();
                leak[l] += p * top;
            }
            spmv(&self.ops.b, v, &mut tmp);
            q_b += p * 2.0 * dot(v, &tmp).re;
            spmv(&self.ops.force, v, &mut tmp);
            force += p * dot(v, &tmp).re;
            spmv(&self.h_static, v, &mut tmp);
            energy += p * dot(v, &tmp).re;
        }
        OracleSample {
            t,
            photons,
            phonons,
            q_b,
            force,
            energy,
            purity: purity(members),
            leakage: leak.into_iter().fold(0.0, f64::max),
            norm,
        }
    }

    /// Evolves `rho0` and records observables at every time of `t_grid`
    /// (seconds, non-decreasing, starting at or after 0).
    pub fn evolve(&self, rho0: &FockDensity, t_grid: &[f64], opts: EvolveOptions) -> Result<Trajectory> {
        if !(1e-12..=1e-6).contains(&opts.tol) {
            return Err(Error::invalid("tol", "must lie in [1e-12, 1e-6]"));
        }
        if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::invalid("t_grid", "must be non-decreasing from 0"));
        }
        if rho0.dim() != self.ops.basis.dim() {
            return Err(Error::invalid("rho0", "dimension does not match the truncation"));
        }
        let mut members = rho0.members.clone();
        let mut hs: Vec<f64> = vec![0.05; members.len()];
        let mut t_now = 0.0;
        let mut samples = Vec::with_capacity(t_grid.len());
        let mut steps = 0;
        for &t in t_grid {
            let target = self.cfg.tilde_time(t);
            let counts = members
                .par_iter_mut()
                .zip(hs.par_iter_mut())
                .map(|((_, v), h)| self.advance(v, t_now, target, h, opts))
                .collect::<Vec<Result<usize>>>();
            for c in counts {
                steps += c?;
            }
            t_now = target;
            samples.push(self.observe(t, &members));
        }
        let valid = samples.iter().all(|s| s.leakage < LEAKAGE_LIMIT);
        Ok(Trajectory { modes: self.ops.modes.clone(), samples, valid, steps })
    }

    /// Propagates one member from t0 to t1 (dimensionless); returns the
    /// number of accepted steps.
    fn advance(&self, v: &mut Vec<C>, t0: f64, t1: f64, h: &mut f64, opts: EvolveOptions) -> Result<usize> {
        let mut t = t0;
        let mut steps = 0;
        let ktol = (opts.tol * 1e-3).max(1e-15);
        while t < t1 && t < self.drive_end {
            let end = t1.min(self.drive_end);
            let step = h.min(end - t);
            let limited = step < *h;
            let big = self.magnus(v, t, step, opts.convention, ktol)?;
            let half = self.magnus(v, t, 0.5 * step, opts.convention, ktol)?;
            let small = self.magnus(&half, t + 0.5 * step, 0.5 * step, opts.convention, ktol)?;
            let err = small.iter().zip(&big).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / 15.0;
            let fac = if err == 0.0 { 4.0 } else { (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 4.0) };
            if err <= opts.tol {
                *v = small;
                t += step;
                steps += 1;
                if !limited {
                    *h = step * fac;
                }
            } else {
                *h = step * fac;
                if *h < MIN_STEP {
                    return Err(Error::Numerical(format!("step size underflow at t̃ = {t}")));
                }
            }
        }
        if t < t1 {
            *v = self.expm(v, t1 - t, 1.0, &[], ktol)?;
            steps += 1;
        }
        Ok(steps)
    }

    /// One commutator-free fourth-order Magnus step of size h from t.
    fn magnus(&self, v: &[C], t: f64, h: f64, conv: DriveConvention, ktol: f64) -> Result<Vec<C>> {
        let r3 = 3f64.sqrt();
        let (a1, a2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
        let (t1, t2) = (t + (0.5 - r3 / 6.0) * h, t + (0.5 + r3 / 6.0) * h);
        let f1: Vec<C> = self.drives.iter().map(|d| self.drive_coefficient(d.target, t1, conv)).collect();
        let f2: Vec<C> = self.drives.iter().map(|d| self.drive_coefficient(d.target, t2, conv)).collect();
        let mix = |x: f64, y: f64| -> Vec<C> { f1.iter().zip(&f2).map(|(p, q)| p * x + q * y).collect() };
        let w = self.expm(v, h, 0.5, &mix(a2, a1), ktol)?;
        self.expm(&w, h, 0.5, &mix(a1, a2), ktol)
    }

    /// exp(−iτA)v for A = s·H_static + drive(g), by Lanczos with automatic
    /// substepping.
    fn expm(&self, v: &[C], tau: f64, s: f64, g: &[C], ktol: f64) -> Result<Vec<C>> {
        let apply = |x: &[C], y: &mut [C]| self.apply(s, g, x, y);
        let mut out = v.to_vec();
        let mut remaining = tau;
        let mut dt = tau;
        while remaining > 0.0 {
            dt = dt.min(remaining);
            match lanczos_expm(&apply, &out, dt, ktol) {
                Some(w) => {
                    out = w;
                    remaining -= dt;
                    dt *= 1.5;
                }
                None => {
                    dt *= 0.5;
                    if dt < MIN_STEP {
                        return Err(Error::Numerical("Krylov substep underflow".into()));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// exp(−iτA)v for Hermitian A given by `apply`, or None when the Krylov
/// error estimate exceeds `tol`.
pub fn lanczos_expm<F: Fn(&[C], &mut [C])>(apply: &F, v: &[C], tau: f64, tol: f64) -> Option<Vec<C>> {
    let dim = v.len();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nv == 0.0 {
        return Some(v.to_vec());
    }
    let mmax = KRYLOV_DIM.min(dim);
    let mut basis: Vec<Vec<C>> = vec![v.iter().map(|z| z / nv).collect()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![ZERO; dim];
    for j in 0..mmax {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, applied twice
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let m = j + 1;
        let y = tridiagonal_expm(&alpha, &beta, tau);
        if b < 1e-13 * (1.0 + a.abs()) {
            return Some(combine(&basis, &y, nv));
        }
        let err = nv * b * y[m - 1].norm();
        if err <= tol {
            return Some(combine(&basis, &y, nv));
        }
        if m == mmax {
            return None;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    None
}

fn combine(basis: &[Vec<C>], y: &[C], nv: f64) -> Vec<C> {
    let mut out = vec![ZERO; basis[0].len()];
    for (q, &c) in basis.iter().zip(y) {
        let c = c * nv;
        out.iter_mut().zip(q).for_each(|(o, x)| *o += c * x);
    }
    out
}

/// exp(−iτT)e₁ for the real symmetric tridiagonal T.
fn tridiagonal_expm(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    let phase = DVector::from_fn(m, |l, _| C::from_polar(q[(0, l)], -tau * eig.eigenvalues[l]));
    (0..m).map(|i| (0..m).map(|l| phase[l] * q[(i, l)]).sum()).collect()
}

/// Convenience wrapper: builds the operators for `trunc` and evolves.
pub fn evolve(
    rho0: &FockDensity,
    cfg: &SystemConfig,
    trunc: &Truncation,
    t_grid: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    Oracle::new(cfg, trunc)?.evolve(rho0, t_grid, EvolveOptions { tol, ..Default::default() })
}
