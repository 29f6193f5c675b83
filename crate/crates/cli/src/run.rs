use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use tfdvqa::ansatz::build_layered_ansatz;
use tfdvqa::dynamics::{
    self, AnsatzDepth, CorrelationConfig, PipelineConfig, QuenchConfig, ThermalSource,
};
use tfdvqa::models::{self, TFIConfig};
use tfdvqa::oracle::{self, HamiltonianSchedule};
use tfdvqa::pauli::{Pauli, PauliString, PauliSum};
use tfdvqa::tfd::{self, TFDSystem};
use tfdvqa::vqa::FlowConfig;

use crate::config::{Command, Format, ResolvedConfig, ResolvedModel};

/// Failure of a run after the config was accepted.
#[derive(Debug)]
pub enum RunError {
    Numerical(tfdvqa::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl From<tfdvqa::Error> for RunError {
    fn from(e: tfdvqa::Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

struct Outputs {
    files: Vec<(String, String)>,
    summary: Value,
}

fn pipeline(cfg: &ResolvedConfig) -> PipelineConfig {
    let v = &cfg.vqa;
    let flow = |step: f64, regularization: f64| FlowConfig {
        step_size: step,
        regularization,
        integrator: v.integrator,
        solver: v.solver,
        ..FlowConfig::default()
    };
    PipelineConfig {
        depth: AnsatzDepth { thermal: v.thermal_depth, dynamics: v.dynamics_depth },
        thermal_flow: flow(v.step, v.thermal_regularization),
        // The real-time step is overridden by run.dt / substeps.
        real_flow: flow(cfg.run.dt, v.regularization),
        substeps: v.substeps,
        seed: v.seed,
    }
}

fn hamiltonian(cfg: &ResolvedConfig) -> tfdvqa::Result<PauliSum> {
    match &cfg.model {
        ResolvedModel::Tfi { n_sites, h_i, .. } => models::build_tfi(&TFIConfig { n_sites: *n_sites, h: *h_i }),
        ResolvedModel::Exciton { monomers, .. } => models::build_exciton_hamiltonian(monomers),
    }
}

fn probe_operator(cfg: &ResolvedConfig) -> tfdvqa::Result<PauliSum> {
    match &cfg.model {
        ResolvedModel::Tfi { n_sites, .. } => {
            let mut op = PauliSum::new(*n_sites);
            op.add_term(1.0, PauliString::single(*n_sites, cfg.run.site, Pauli::X))?;
            Ok(op)
        }
        ResolvedModel::Exciton { monomers, .. } => models::build_dipole_operator(monomers, cfg.run.axis),
    }
}

fn quench(cfg: &ResolvedConfig, verbose: bool) -> Result<Outputs, RunError> {
    let ResolvedModel::Tfi { n_sites, h_i, h_f } = cfg.model else {
        unreachable!("rejected during resolution")
    };
    let mut q = QuenchConfig::new(n_sites, h_i, h_f, cfg.run.beta);
    q.t_max = cfg.run.t_max;
    q.dt = cfg.run.dt;
    if verbose {
        eprintln!("quench: n={n_sites} h_i={h_i} h_f={h_f} beta={}", cfg.run.beta);
    }
    let r = dynamics::run_quench(&q, &pipeline(cfg))?;
    Ok(Outputs {
        files: vec![("quench.csv".into(), r.to_csv())],
        summary: json!({
            "max_deviation": r.max_deviation(),
            "max_drift": r.max_drift(),
            "thermal_fidelity": r.thermal_fidelity,
        }),
    })
}

fn spectrum(cfg: &ResolvedConfig, verbose: bool) -> Result<Outputs, RunError> {
    let h = hamiltonian(cfg)?;
    let op = probe_operator(cfg)?;
    let mut c = CorrelationConfig::new(cfg.run.beta, cfg.run.t_max, cfg.run.dt);
    c.hbar = cfg.run.hbar;
    c.estimator = cfg.vqa.estimator;
    c.shots = cfg.vqa.shot_config();
    c.thermal_source = ThermalSource::Variational;
    if verbose {
        eprintln!("correlation: {} terms in H, beta={}", h.len(), cfg.run.beta);
    }
    let series = dynamics::compute_correlation(&h, &op, &op, &c, &pipeline(cfg))?;
    let sp = dynamics::spectrum(&series, cfg.run.tau, cfg.run.hbar)?;
    let exact_series = series.exact_series().expect("exact correlation requested");
    let sp_exact = dynamics::spectrum(&exact_series, cfg.run.tau, cfg.run.hbar)?;
    let peak = |s: &dynamics::SpectrumSeries| {
        s.peaks(0.01, 0.0).into_iter().map(|i| json!({"omega": s.omegas[i], "intensity": s.intensity[i]})).collect::<Vec<_>>()
    };
    Ok(Outputs {
        files: vec![
            ("correlation.csv".into(), series.to_csv()),
            ("spectrum.csv".into(), sp.to_csv(Some(&sp_exact))?),
        ],
        summary: json!({
            "norm_factor": series.norm_factor,
            "thermal_fidelity": series.thermal_fidelity,
            "max_relative_deviation": series.max_relative_deviation(),
            "bin_width": sp.bin_width(),
            "peaks": peak(&sp),
            "peaks_exact": peak(&sp_exact),
        }),
    })
}

fn thermal_fidelity(cfg: &ResolvedConfig, verbose: bool) -> Result<Outputs, RunError> {
    let h = hamiltonian(cfg)?;
    let ansatz = build_layered_ansatz(2 * h.n_qubits(), cfg.vqa.thermal_depth)?;
    let flow = pipeline(cfg).thermal_flow;
    let sys = TFDSystem::new(h.clone())?;
    let lifted = sys.lift(&h)?;
    let mut csv = String::from("beta,fidelity,energy\n");
    let mut min_fidelity = f64::INFINITY;
    for &beta in &cfg.run.betas {
        let r = tfd::prepare_thermal_state(&h, beta, &ansatz, &flow, cfg.vqa.seed)?;
        let f = r.fidelity_vs_oracle.unwrap_or(f64::NAN);
        let e = r.state.expectation(&lifted)?;
        if verbose {
            eprintln!("beta={beta} fidelity={f}");
        }
        min_fidelity = min_fidelity.min(f);
        csv.push_str(&format!("{beta:?},{f:?},{e:?}\n"));
    }
    Ok(Outputs { files: vec![("thermal_fidelity.csv".into(), csv)], summary: json!({ "min_fidelity": min_fidelity }) })
}

fn oracle_compare(cfg: &ResolvedConfig, _verbose: bool) -> Result<Outputs, RunError> {
    let ResolvedModel::Tfi { n_sites, h_i, h_f } = cfg.model else {
        unreachable!("rejected during resolution")
    };
    let hi = models::build_tfi(&TFIConfig { n_sites, h: h_i })?;
    let hf = models::build_tfi(&TFIConfig { n_sites, h: h_f })?;
    let grid = dynamics::time_grid(cfg.run.t_max, cfg.run.dt)?;
    let gibbs = oracle::gibbs_state(&hi, cfg.run.beta)?;
    let sys = TFDSystem::new(hf.clone())?;
    let doubled = oracle::propagate_state(&oracle::to_dense(sys.h_hat())?, &gibbs.purification, &grid)?;
    let lvn = oracle::evolve_lvn(&HamiltonianSchedule::Constant(oracle::to_dense(&hf)?.matrix), &gibbs.rho, &grid)?;
    let mut csv = String::from("t,max_abs_diff\n");
    let mut worst: f64 = 0.0;
    for ((t, psi), rho) in grid.iter().zip(&doubled).zip(&lvn) {
        let reduced = tfd::partial_trace_fictitious(psi, &sys)?;
        let d = (reduced - rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(d);
        csv.push_str(&format!("{t:?},{d:?}\n"));
    }
    Ok(Outputs { files: vec![("oracle_compare.csv".into(), csv)], summary: json!({ "max_abs_diff": worst }) })
}

/// Runs the experiment and writes its artifacts plus `manifest.json`.
pub fn execute(cfg: &ResolvedConfig, verbose: bool) -> Result<Vec<PathBuf>, RunError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let out = match cfg.command {
        Command::Quench => quench(cfg, verbose)?,
        Command::Spectrum => spectrum(cfg, verbose)?,
        Command::ThermalFidelity => thermal_fidelity(cfg, verbose)?,
        Command::OracleCompare => oracle_compare(cfg, verbose)?,
    };
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if cfg.output.formats.contains(&Format::Csv) {
        for (name, body) in &out.files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
    }
    if cfg.output.formats.contains(&Format::Json) {
        let path = dir.join("summary.json");
        std::fs::write(&path, serde_json::to_string_pretty(&out.summary).expect("summary serializes") + "\n")?;
        written.push(path);
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "outputs": written.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "summary": out.summary,
        "started_unix": started,
        "wall_clock_seconds": clock.elapsed().as_secs_f64(),
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    written.push(path);
    Ok(written)
}
