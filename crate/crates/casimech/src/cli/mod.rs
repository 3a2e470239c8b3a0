//! Command-line front end: configuration loading, scenario execution and
//! CSV/JSON output.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{ApproximationOpt, FrequencyModeOpt, Grid, Options, RunConfig, Scale, ScenarioKind, SystemBlock};

use crate::engine::{self, Approximation};
use crate::force::{self, FrequencyMode};
use crate::model::{InitialState, MechanicalSpec, SystemConfig};
use crate::oracle::{self, ErrorReport, EvolveOptions, Scenario, Truncation};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column names and rows of one output table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// A loaded configuration together with the hash of its source text.
#[derive(Clone, Debug)]
pub struct Run {
    pub config: RunConfig,
    pub config_hash: String,
}

impl Run {
    pub fn from_text(text: &str) -> Result<Self> {
        let config = RunConfig::parse(text)?;
        Ok(Self { config, config_hash: hex::encode(Sha256::digest(text.as_bytes())) })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn header_line(&self) -> String {
        format!("# casimech v{VERSION}, config-sha256={}", self.config_hash)
    }

    /// Executes the scenario and writes its files into `out`; returns the
    /// written paths.
    pub fn execute(&self, out: &Path) -> Result<Vec<PathBuf>> {
        let cfg = self.config.system.build()?;
        fs::create_dir_all(out)?;
        let name = self.config.scenario.name();
        let mut written = Vec::new();
        if self.config.scenario == ScenarioKind::OracleCompare {
            let summary = oracle_compare(&self.config, &cfg)?;
            let path = out.join(format!("{name}.json"));
            let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Numerical(e.to_string()))?;
            fs::write(&path, json + "\n")?;
            written.push(path);
            let table = oracle_table(&summary);
            let path = out.join(format!("{name}.csv"));
            write_csv(&path, &self.header_line(), &table)?;
            written.push(path);
        } else {
            let table = self.table(&cfg)?;
            let path = out.join(format!("{name}.csv"));
            write_csv(&path, &self.header_line(), &table)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Output table of every scenario except oracle_compare.
    pub fn table(&self, cfg: &SystemConfig) -> Result<Table> {
        let rc = &self.config;
        match rc.scenario {
            ScenarioKind::WallTrajectory => wall_trajectory(rc, cfg),
            ScenarioKind::PhotonNumber => photon_number(rc, cfg),
            ScenarioKind::PhononNumber => phonon_number(rc, cfg),
            ScenarioKind::ResonanceScan => resonance_scan(rc, cfg),
            ScenarioKind::ForceSweep => force_sweep(rc, cfg),
            ScenarioKind::CriticalLength => critical_length(rc, cfg),
            ScenarioKind::OracleCompare => Ok(oracle_table(&oracle_compare(rc, cfg)?)),
        }
    }
}

pub fn write_csv(path: &Path, header: &str, table: &Table) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite output value {x}")));
        }
        w.write_record(row.iter().map(|&x| format_float(x))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    fs::write(path, text)?;
    Ok(())
}

/// Shortest round-trip representation, in exponent form outside
/// [1e-4, 1e15).
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn approximation(o: &Options) -> Approximation {
    match o.approximation {
        ApproximationOpt::Full => Approximation::Full,
        ApproximationOpt::Resonant => Approximation::Resonant,
    }
}

fn frequency_mode(o: &Options) -> FrequencyMode {
    match o.frequency_mode {
        FrequencyModeOpt::Retuned => FrequencyMode::Retuned,
        FrequencyModeOpt::Fixed => FrequencyMode::Fixed,
    }
}

fn flag(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

fn wall_trajectory(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    let order = rc.options.max_order.unwrap_or(3);
    let approx = approximation(&rc.options);
    let rows = rc
        .grid_values()?
        .par_iter()
        .map(|&tt| {
            let p = engine::wall_position(cfg, cfg.seconds(tt), order, approx)?;
            Ok(vec![tt, p.t, p.x0, p.x1_tilde, p.x2_tilde, p.x3, p.x_total, p.gamma_k, flag(p.in_window)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["t_tilde", "t_s", "x0_m", "x1_tilde", "x2_tilde", "x3", "x_total_m", "gamma_k", "in_window"],
        rows,
    })
}

fn photon_number(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    let order = rc.options.max_order.unwrap_or(2);
    let approx = approximation(&rc.options);
    let k = rc.options.k.unwrap_or(cfg.state.k);
    let rows = rc
        .grid_values()?
        .par_iter()
        .map(|&tt| {
            let n = engine::photon_number(cfg, k, cfg.seconds(tt), order, approx)?;
            Ok(vec![
                tt,
                n.t,
                n.order0,
                n.order1,
                n.order2,
                n.n_beta,
                n.n_vac,
                n.n_sq,
                n.n_t,
                n.n_sqt,
                n.n_md,
                n.n_coherent,
                n.tail_estimate,
                n.total(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec![
            "t_tilde", "t_s", "order0", "order1", "order2", "n_beta", "n_vac", "n_sq", "n_t", "n_sqt", "n_md",
            "n_coherent", "tail_estimate", "total",
        ],
        rows,
    })
}

fn phonon_number(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    let order = rc.options.max_order.unwrap_or(2);
    let approx = approximation(&rc.options);
    let rows = rc
        .grid_values()?
        .par_iter()
        .map(|&tt| {
            let n = engine::phonon_number(cfg, cfg.seconds(tt), order, approx)?;
            Ok(vec![tt, n.t, n.order0, n.order1, n.order2, n.total()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns: vec!["t_tilde", "t_s", "order0", "order1", "order2", "total"], rows })
}

/// Minimum number of cavity modes for a resonance scan.
pub const SCAN_MIN_MODES: usize = 8;

fn resonance_scan(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    if cfg.cavity.num_modes < SCAN_MIN_MODES {
        return Err(Error::invalid("cavity.num_modes", format!("a resonance scan needs at least {SCAN_MIN_MODES} modes")));
    }
    let k = rc.options.k.unwrap_or(1);
    if k == 0 || k > cfg.cavity.num_modes {
        return Err(Error::invalid("options.k", "outside the cavity spectrum"));
    }
    let times = if rc.options.times.is_empty() { vec![30.0, 50.0, 100.0] } else { rc.options.times.clone() };
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("options.times", "must be positive"));
    }
    let omegas = rc.grid_values()?;
    let sp = cfg.spectrum();
    let points: Vec<(f64, f64)> = times.iter().flat_map(|&t| omegas.iter().map(move |&w| (t, w))).collect();
    let rows = points.par_iter().map(|&(t, w)| vec![w, t, engine::delta_n_beta(sp, k, w, t)]).collect();
    Ok(Table { columns: vec!["omega_tilde", "t_tilde", "delta_n_beta"], rows })
}

fn with_beta2(cfg: &SystemConfig, beta2: f64) -> Result<SystemConfig> {
    if !(beta2 >= 0.0) {
        return Err(Error::invalid("options.beta2", "must be non-negative"));
    }
    cfg.with_state(InitialState { beta_mag: beta2.sqrt(), ..cfg.state.clone() })
}

fn beta2_list(rc: &RunConfig, cfg: &SystemConfig) -> Vec<f64> {
    if rc.options.beta2.is_empty() {
        vec![cfg.state.beta_mag.powi(2)]
    } else {
        rc.options.beta2.clone()
    }
}

fn force_sweep(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    let ratios = rc.grid_values()?;
    let taus = if rc.options.times.is_empty() { vec![0.0, 1e-6] } else { rc.options.times.clone() };
    let mode = frequency_mode(&rc.options);
    let l0 = cfg.cavity.length;
    let casimir_l0 = force::static_casimir_force(l0)?;
    let mut rows = Vec::new();
    for b2 in beta2_list(rc, cfg) {
        let c = with_beta2(cfg, b2)?;
        for &tau in &taus {
            let block = ratios
                .par_iter()
                .map(|&r| {
                    let f = force::casimir_force(&c, r * l0, tau, mode)?;
                    Ok(vec![b2, tau, r, f.length, f.f_static, f.f_dynamic, f.f_total, f.f_total / casimir_l0.abs()])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.extend(block);
        }
    }
    Ok(Table {
        columns: vec!["beta2", "tau_s", "length_ratio", "length_m", "f_static_n", "f_dynamic_n", "f_total_n", "f_over_casimir_l0"],
        rows,
    })
}

fn critical_length(rc: &RunConfig, cfg: &SystemConfig) -> Result<Table> {
    let betas = match &rc.grid {
        Some(g) => g.values()?,
        None => beta2_list(rc, cfg),
    };
    let taus = if rc.options.times.is_empty() { vec![1e-6] } else { rc.options.times.clone() };
    let mode = frequency_mode(&rc.options);
    let l0 = cfg.cavity.length;
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&b| taus.iter().map(move |&t| (b, t))).collect();
    let rows = points
        .par_iter()
        .map(|&(b2, tau)| {
            let c = with_beta2(cfg, b2)?;
            let lc = force::critical_length(&c, tau, mode)?;
            let (lmin, fmin) = force::minimum_force(&c, tau, mode)?;
            let nk = engine::photon_number(&c, c.state.k, tau, 2, Approximation::Resonant)?.total();
            Ok(vec![b2, tau, lc, lc / l0, lmin, fmin, nk])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["beta2", "tau_s", "l_c_m", "l_c_ratio", "l_min_m", "f_min_n", "n_k_at_tau"],
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub reports: Vec<ErrorReport>,
    /// Residual exponent from the first two couplings, when defined.
    pub scaling_exponent: Option<f64>,
    pub truncation: (usize, usize),
    pub modes: Vec<usize>,
}

/// Default couplings of an oracle comparison.
pub const DEFAULT_EPSILONS: [f64; 2] = [1e-3, 3e-3];

fn oracle_compare(rc: &RunConfig, cfg: &SystemConfig) -> Result<OracleSummary> {
    let o = &rc.options;
    let eps = if o.epsilons.is_empty() { DEFAULT_EPSILONS.to_vec() } else { o.epsilons.clone() };
    let observable = o.observable.unwrap_or(Scenario::PhotonK);
    let (n_max, m_max) = (o.n_max.unwrap_or(10), o.m_max.unwrap_or(12));
    let tol = o.tol.unwrap_or(1e-10);
    let t_tilde = rc.grid_values()?;
    let opts = EvolveOptions { tol, ..Default::default() };
    let runs = eps
        .par_iter()
        .map(|&e| {
            let mech = MechanicalSpec::with_epsilon(cfg.mech.omega, e, cfg.cavity.length);
            oracle_run(&rc.system, mech, observable, (n_max, m_max), opts, &t_tilde)
        })
        .collect::<Vec<_>>();
    let mut reports = Vec::with_capacity(runs.len());
    let mut modes = Vec::new();
    for r in runs {
        let (rep, m) = r?;
        modes = m;
        reports.push(rep);
    }
    let scaling_exponent = match reports.as_slice() {
        [a, b, ..] => oracle::scaling_exponent(a, b).ok(),
        _ => None,
    };
    Ok(OracleSummary { reports, scaling_exponent, truncation: (n_max, m_max), modes })
}

/// One comparison with the mirror mass chosen to give coupling ε.
fn oracle_run(
    sb: &SystemBlock,
    mech: MechanicalSpec,
    observable: Scenario,
    (n_max, m_max): (usize, usize),
    opts: EvolveOptions,
    t_tilde: &[f64],
) -> Result<(ErrorReport, Vec<usize>)> {
    let c = crate::make_system(sb.cavity.clone(), mech, sb.state.clone(), sb.drives.clone())?;
    let trunc = Truncation::for_config(&c, n_max, m_max);
    let grid: Vec<f64> = t_tilde.iter().map(|&t| c.seconds(t)).collect();
    let rep = oracle::compare_with_perturbative(&c, &trunc, observable, &grid, opts)?;
    Ok((rep, trunc.modes))
}

fn oracle_table(s: &OracleSummary) -> Table {
    let mut rows = Vec::new();
    for r in &s.reports {
        for ((t, o), e) in r.times.iter().zip(&r.oracle).zip(&r.engine) {
            rows.push(vec![r.epsilon, *t, o.to_owned(), *e, o - e]);
        }
    }
    Table { columns: vec!["epsilon", "t_s", "oracle", "engine", "residual"], rows }
}
