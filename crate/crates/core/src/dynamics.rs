//! End-to-end experiments: thermal quenches, finite-temperature correlation
//! functions and damped absorption spectra.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_layered_ansatz, AnsatzCircuit, ParameterVector};
use crate::error::{Error, Result};
use crate::estimators::{self, CircuitBlock, ShotConfig};
use crate::models::{build_tfi, TFIConfig};
use crate::oracle::{self, HamiltonianSchedule};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statevector::StateVector;
use crate::tfd::{self, TFDSystem};
use crate::vqa::{self, FlowConfig, FlowMode, TangentModel};

/// Norm below which `B|Ψ⟩` is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;
/// Largest imaginary part tolerated in a spectrum, relative to its peak.
pub const SPECTRUM_IMAG_TOL: f64 = 1e-8;

/// Layer counts of the frozen thermal block and the evolving dynamical block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzDepth {
    pub thermal: usize,
    pub dynamics: usize,
}

impl AnsatzDepth {
    pub fn uniform(depth: usize) -> Self {
        Self { thermal: depth, dynamics: depth }
    }
}

/// Flow settings for the two stages. The real-time step is `dt / substeps`.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub depth: AnsatzDepth,
    pub thermal_flow: FlowConfig,
    pub real_flow: FlowConfig,
    pub substeps: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            depth: AnsatzDepth::uniform(2),
            thermal_flow: FlowConfig::default(),
            real_flow: FlowConfig::default(),
            substeps: 1,
            seed: 0,
        }
    }
}

/// Uniform grid `0, dt, …` reaching `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Config(format!("t_max must be > 0, got {t_max}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    let n = vqa::step_count(t_max, dt);
    Ok((0..=n).map(|i| i as f64 * dt).collect())
}

/// Variational state `U(θ)|ψ_0⟩` sampled on the record grid.
struct RealTimeRun {
    thetas: Vec<ParameterVector>,
    states: Vec<StateVector>,
}

fn real_time_run(
    ansatz: &AnsatzCircuit,
    initial: &StateVector,
    h: &PauliSum,
    grid: &[f64],
    cfg: &PipelineConfig,
) -> Result<RealTimeRun> {
    let substeps = cfg.substeps.max(1);
    let dt = grid.get(1).map_or(0.0, |t| t - grid[0]);
    let mut flow = cfg.real_flow.clone();
    if dt > 0.0 {
        flow.step_size = dt / substeps as f64;
    }
    let duration = *grid.last().unwrap_or(&0.0);
    let model = TangentModel::new(ansatz, initial, h)?;
    let mut thetas = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let theta0 = ParameterVector::zeros(ansatz.n_params());
    vqa::evolve(&model, &theta0, FlowMode::Real, duration, &flow, |s| {
        if s.step % substeps == 0 {
            thetas.push(ParameterVector(s.theta.to_vec()));
            states.push(s.state.clone());
        }
        Ok(())
    })?;
    if states.len() != grid.len() {
        return Err(Error::Contract(format!(
            "flow produced {} samples for a grid of {}",
            states.len(),
            grid.len()
        )));
    }
    Ok(RealTimeRun { thetas, states })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub label: String,
    pub op: PauliSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuenchConfig {
    pub n_sites: usize,
    pub h_i: f64,
    pub h_f: f64,
    pub beta: f64,
    pub t_max: f64,
    pub dt: f64,
    pub observables: Vec<Observable>,
}

/// `zz_<i><i+1>` and `xx_<i><i+1>` for every bond of the open chain.
pub fn default_observables(n_sites: usize) -> Vec<Observable> {
    let mut out = Vec::new();
    for (name, p) in [("zz", Pauli::Z), ("xx", Pauli::X)] {
        for i in 0..n_sites.saturating_sub(1) {
            let mut op = PauliSum::new(n_sites);
            op.add_term(1.0, PauliString::pair(n_sites, i, i + 1, p, p)).expect("sizes agree");
            out.push(Observable { label: format!("{name}_{i}{}", i + 1), op });
        }
    }
    out
}

impl QuenchConfig {
    pub fn new(n_sites: usize, h_i: f64, h_f: f64, beta: f64) -> Self {
        Self { n_sites, h_i, h_f, beta, t_max: 5.0, dt: 0.01, observables: default_observables(n_sites) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::Config("n_sites must be >= 1".into()));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        time_grid(self.t_max, self.dt)?;
        for o in &self.observables {
            if o.op.n_qubits() != self.n_sites {
                return Err(Error::Config(format!("observable {} acts on {} qubits", o.label, o.op.n_qubits())));
            }
            o.op.ensure_hermitian(&o.label)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `vqa[k][i]`: observable `k` at time `i`.
    pub vqa: Vec<Vec<f64>>,
    pub exact: Vec<Vec<f64>>,
    pub thermal_fidelity: Option<f64>,
}

impl QuenchResult {
    /// Largest `|vqa − exact|` over all observables and times.
    pub fn max_deviation(&self) -> f64 {
        self.vqa
            .iter()
            .zip(&self.exact)
            .flat_map(|(v, e)| v.iter().zip(e).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|vqa(t) − vqa(0)|`.
    pub fn max_drift(&self) -> f64 {
        self.vqa
            .iter()
            .flat_map(|v| v.iter().map(move |x| (x - v[0]).abs()))
            .fold(0.0, f64::max)
    }

    /// `t,<label>_vqa,<label>_exact,…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.labels {
            out.push_str(&format!(",{l}_vqa,{l}_exact"));
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:?}"));
            for k in 0..self.labels.len() {
                out.push_str(&format!(",{:?},{:?}", self.vqa[k][i], self.exact[k][i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Thermal prep at `h_i`, then real-time flow under `Ĥ(h_f)` from the frozen
/// thermal state, alongside the exact Liouville–von Neumann reference.
pub fn run_quench(cfg: &QuenchConfig, pipeline: &PipelineConfig) -> Result<QuenchResult> {
    cfg.validate()?;
    let grid = time_grid(cfg.t_max, cfg.dt)?;
    let h_i = build_tfi(&TFIConfig { n_sites: cfg.n_sites, h: cfg.h_i })?;
    let h_f = build_tfi(&TFIConfig { n_sites: cfg.n_sites, h: cfg.h_f })?;
    let sys_f = TFDSystem::new(h_f.clone())?;
    let n_total = sys_f.n_total();

    let thermal_ansatz = build_layered_ansatz(n_total, pipeline.depth.thermal)?;
    let prep = tfd::prepare_thermal_state(&h_i, cfg.beta, &thermal_ansatz, &pipeline.thermal_flow, pipeline.seed)?;
    let dyn_ansatz = build_layered_ansatz(n_total, pipeline.depth.dynamics)?;
    let run = real_time_run(&dyn_ansatz, &prep.state, sys_f.h_hat(), &grid, pipeline)?;

    let lifted: Vec<PauliSum> = cfg.observables.iter().map(|o| sys_f.lift(&o.op)).collect::<Result<_>>()?;
    let vqa: Vec<Vec<f64>> = lifted
        .iter()
        .map(|op| run.states.iter().map(|s| s.expectation(op)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let gibbs = oracle::gibbs_state(&h_i, cfg.beta)?;
    let h_dense = oracle::to_dense(&h_f)?.matrix;
    let rhos = oracle::evolve_lvn(&HamiltonianSchedule::Constant(h_dense), &gibbs.rho, &grid)?;
    let exact = cfg
        .observables
        .iter()
        .map(|o| {
            let d = oracle::to_dense(&o.op)?.matrix;
            Ok(rhos.iter().map(|r| oracle::expectation_dense(r, &d).re).collect())
        })
        .collect::<Result<_>>()?;

    Ok(QuenchResult {
        times: grid,
        labels: cfg.observables.iter().map(|o| o.label.clone()).collect(),
        vqa,
        exact,
        thermal_fidelity: prep.fidelity_vs_oracle,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Direct,
    Circuit,
}

/// Where `|O(β)⟩` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThermalSource {
    /// Imaginary-time flow of the thermal ansatz.
    Variational,
    /// Exact thermofield double from the dense oracle.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationConfig {
    pub beta: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Time unit conversion: the flow propagates under `Ĥ/hbar`.
    pub hbar: f64,
    pub estimator: Estimator,
    pub shots: ShotConfig,
    pub thermal_source: ThermalSource,
    /// Also evaluate the exact correlation on the same grid.
    pub with_exact: bool,
}

impl CorrelationConfig {
    pub fn new(beta: f64, t_max: f64, dt: f64) -> Self {
        Self {
            beta,
            t_max,
            dt,
            hbar: 1.0,
            estimator: Estimator::Direct,
            shots: ShotConfig::exact(),
            thermal_source: ThermalSource::Variational,
            with_exact: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    /// `‖B|O(β)⟩‖`.
    pub norm_factor: f64,
    pub exact: Option<Vec<C64>>,
    pub thermal_fidelity: Option<f64>,
}

impl CorrelationSeries {
    /// `t,re_C,im_C,re_C_exact,im_C_exact`; exact columns are empty when absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_C,im_C,re_C_exact,im_C_exact\n");
        for (i, (t, c)) in self.times.iter().zip(&self.values).enumerate() {
            let (er, ei) = match &self.exact {
                Some(e) => (format!("{:?}", e[i].re), format!("{:?}", e[i].im)),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!("{t:?},{:?},{:?},{er},{ei}\n", c.re, c.im));
        }
        out
    }

    /// `max_t |C(t) − C_exact(t)| / |C_exact(0)|`.
    pub fn max_relative_deviation(&self) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let scale = exact.first()?.norm();
        Some(self.values.iter().zip(exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
    }

    pub fn exact_series(&self) -> Option<CorrelationSeries> {
        Some(CorrelationSeries {
            times: self.times.clone(),
            values: self.exact.clone()?,
            norm_factor: self.norm_factor,
            exact: None,
            thermal_fidelity: None,
        })
    }
}

/// `C(t) = Tr{ρ_eq A(t) B}` from two variational branches:
/// `ψ₁ = U(θ₁) B|O(β)⟩/‖B|O(β)⟩‖` and `ψ₂ = U(θ₂)|O(β)⟩`, both evolved under `Ĥ`,
/// with `C(t) = ‖B|O(β)⟩‖ ⟨ψ₂|A|ψ₁⟩`.
fn shifted_energy(h: &PauliSum, energy: f64) -> Result<PauliSum> {
    let mut shifted = h.clone();
    shifted.add_term(-energy, PauliString::identity(h.n_qubits()))?;
    Ok(shifted)
}

pub fn compute_correlation(
    h: &PauliSum,
    a: &PauliSum,
    b: &PauliSum,
    cfg: &CorrelationConfig,
    pipeline: &PipelineConfig,
) -> Result<CorrelationSeries> {
    a.ensure_hermitian("operator A")?;
    b.ensure_hermitian("operator B")?;
    if !(cfg.hbar > 0.0) || !cfg.hbar.is_finite() {
        return Err(Error::Config(format!("hbar must be > 0, got {}", cfg.hbar)));
    }
    let grid = time_grid(cfg.t_max, cfg.dt)?;
    let sys = TFDSystem::new(h.clone())?;
    let n_total = sys.n_total();
    let a_l = sys.lift(a)?;
    let b_l = sys.lift(b)?;

    let (thermal_ansatz, thermal_theta, base, thermal_fidelity) = match cfg.thermal_source {
        ThermalSource::Variational => {
            let ansatz = build_layered_ansatz(n_total, pipeline.depth.thermal)?;
            let prep = tfd::prepare_thermal_state(h, cfg.beta, &ansatz, &pipeline.thermal_flow, pipeline.seed)?;
            (Some(ansatz), prep.theta, sys.identity_state(), prep.fidelity_vs_oracle)
        }
        ThermalSource::Exact => {
            let g = oracle::gibbs_state(h, cfg.beta)?;
            (None, ParameterVector::zeros(0), g.purification, Some(1.0))
        }
    };
    let thermal = match &thermal_ansatz {
        Some(ansatz) => ansatz.prepare_state(&thermal_theta, &base)?,
        None => base.clone(),
    };

    let mut branch_one = thermal.apply_pauli_sum(&b_l)?;
    let norm_factor = branch_one.norm();
    if norm_factor < DEGENERATE_NORM {
        return Err(Error::DegenerateOperator { norm: norm_factor });
    }
    branch_one.scale(C64::new(1.0 / norm_factor, 0.0));

    let h_flow = sys.h_hat().scaled(1.0 / cfg.hbar);
    let dyn_ansatz = build_layered_ansatz(n_total, pipeline.depth.dynamics)?;
    // Each branch runs under Ĥ/ħ − E_b with E_b its conserved mean energy, so
    // the ansatz does not have to wind the global phase e^{−iE_b t}. The phase
    // is put back when the branches are contracted.
    let (e_one, e_two) = (branch_one.expectation(&h_flow)?, thermal.expectation(&h_flow)?);
    let one = real_time_run(&dyn_ansatz, &branch_one, &shifted_energy(&h_flow, e_one)?, &grid, pipeline)?;
    let two = real_time_run(&dyn_ansatz, &thermal, &shifted_energy(&h_flow, e_two)?, &grid, pipeline)?;
    let phase = |t: f64| C64::from_polar(1.0, -(e_one - e_two) * t);

    let values = match cfg.estimator {
        Estimator::Direct => one
            .states
            .iter()
            .zip(&two.states)
            .zip(&grid)
            .map(|((s1, s2), &t)| Ok(s2.matrix_element(&a_l, s1)? * norm_factor * phase(t)))
            .collect::<Result<Vec<_>>>()?,
        Estimator::Circuit => one
            .thetas
            .iter()
            .zip(&two.thetas)
            .zip(&grid)
            .map(|((t1, t2), &t)| {
                let amplitude = estimators::estimate_transition_amplitude(
                    thermal_ansatz.as_ref().map(|ansatz| CircuitBlock { ansatz, theta: &thermal_theta }),
                    CircuitBlock { ansatz: &dyn_ansatz, theta: t1 },
                    CircuitBlock { ansatz: &dyn_ansatz, theta: t2 },
                    &base,
                    a,
                    b,
                    cfg.shots,
                )?;
                Ok(amplitude * phase(t))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let exact = if cfg.with_exact {
        let scaled: Vec<f64> = grid.iter().map(|t| t / cfg.hbar).collect();
        Some(oracle::exact_correlation(h, a, b, cfg.beta, &scaled)?)
    } else {
        None
    };
    Ok(CorrelationSeries { times: grid, values, norm_factor, exact, thermal_fidelity })
}

#[derive(Clone, Debug)]
pub struct SpectrumSeries {
    /// Ascending; multiplied by the energy scale passed to [`spectrum`].
    pub omegas: Vec<f64>,
    pub intensity: Vec<f64>,
    pub damping_tau: f64,
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::NonUniformGrid("at least two time points are required".into()));
    }
    if times[0].abs() > 1e-12 {
        return Err(Error::NonUniformGrid(format!("grid must start at t = 0, starts at {}", times[0])));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::NonUniformGrid("time step must be positive".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::NonUniformGrid(format!("step {i} is {} instead of {dt}", w[1] - w[0])));
        }
    }
    Ok(dt)
}

/// `I(ω) = Δt Σ_{|t|≤T} e^{iωt} C(t) e^{−|t|/τ}` with `C(−t) = C(t)*`.
///
/// The frequency grid is the DFT grid of the `2N − 1` symmetric samples;
/// `energy_scale` multiplies it on output (`ħ` for eV, `1` otherwise).
pub fn spectrum(series: &CorrelationSeries, tau: f64, energy_scale: f64) -> Result<SpectrumSeries> {
    let dt = check_uniform(&series.times)?;
    if series.values.len() != series.times.len() {
        return Err(Error::Dimension { expected: series.times.len(), found: series.values.len() });
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("damping time must be > 0, got {tau}")));
    }
    let n = series.times.len();
    let len = 2 * n - 1;
    let damp = |t: f64| (-t.abs() / tau).exp();
    // Sample j sits at t = (j − (n − 1)) Δt.
    let mut buf: Vec<C64> = (0..len)
        .map(|j| {
            let k = j as isize - (n as isize - 1);
            let c = if k == 0 {
                C64::new(series.values[0].re, 0.0)
            } else if k > 0 {
                series.values[k as usize]
            } else {
                series.values[(-k) as usize].conj()
            };
            c * damp(k as f64 * dt)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);

    let mut rows: Vec<(f64, C64)> = buf
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let kk = if k <= (len - 1) / 2 { k as f64 } else { k as f64 - len as f64 };
            let omega = std::f64::consts::TAU * kk / (len as f64 * dt);
            // Undo the shift of the time origin to −(n − 1)Δt.
            let phase = C64::from_polar(1.0, -omega * (n - 1) as f64 * dt);
            (omega, v * phase * dt)
        })
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let peak = rows.iter().map(|r| r.1.re.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residue = rows.iter().map(|r| r.1.im.abs()).fold(0.0, f64::max);
    if residue > SPECTRUM_IMAG_TOL * peak.max(1.0) {
        return Err(Error::Contract(format!("spectrum has imaginary residue {residue}")));
    }
    Ok(SpectrumSeries {
        omegas: rows.iter().map(|r| r.0 * energy_scale).collect(),
        intensity: rows.iter().map(|r| r.1.re).collect(),
        damping_tau: tau,
    })
}

impl SpectrumSeries {
    /// Indices of strict local maxima above `min_fraction` of the global maximum,
    /// restricted to `omega > omega_min`.
    pub fn peaks(&self, min_fraction: f64, omega_min: f64) -> Vec<usize> {
        let top = self
            .omegas
            .iter()
            .zip(&self.intensity)
            .filter(|(w, _)| **w > omega_min)
            .map(|(_, i)| *i)
            .fold(f64::NEG_INFINITY, f64::max);
        (1..self.intensity.len().saturating_sub(1))
            .filter(|&i| {
                self.omegas[i] > omega_min
                    && self.intensity[i] > self.intensity[i - 1]
                    && self.intensity[i] > self.intensity[i + 1]
                    && self.intensity[i] >= min_fraction * top
            })
            .collect()
    }

    pub fn bin_width(&self) -> f64 {
        self.omegas.get(1).map_or(0.0, |w| w - self.omegas[0])
    }

    /// `omega,intensity,intensity_exact`.
    pub fn to_csv(&self, exact: Option<&SpectrumSeries>) -> Result<String> {
        if let Some(e) = exact {
            if e.omegas.len() != self.omegas.len() {
                return Err(Error::Dimension { expected: self.omegas.len(), found: e.omegas.len() });
            }
        }
        let mut out = String::from("omega,intensity,intensity_exact\n");
        for (i, (w, v)) in self.omegas.iter().zip(&self.intensity).enumerate() {
            let ex = exact.map_or(String::new(), |e| format!("{:?}", e.intensity[i]));
            out.push_str(&format!("{w:?},{v:?},{ex}\n"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;

    fn series(times: Vec<f64>, f: impl Fn(f64) -> C64) -> CorrelationSeries {
        let values = times.iter().map(|&t| f(t)).collect();
        CorrelationSeries { times, values, norm_factor: 1.0, exact: None, thermal_fidelity: None }
    }

    #[test]
    fn damped_exponential_gives_single_peak() {
        let eps = 3.0;
        let s = series(time_grid(40.0, 0.02).unwrap(), |t| C64::from_polar(1.0, -eps * t));
        let sp = spectrum(&s, 5.0, 1.0).unwrap();
        let peaks = sp.peaks(0.01, f64::NEG_INFINITY);
        assert_eq!(peaks.len(), 1);
        assert!((sp.omegas[peaks[0]] - eps).abs() <= sp.bin_width());
    }

    #[test]
    fn long_tau_narrows_to_grid() {
        let eps = 2.0;
        let s = series(time_grid(50.0, 0.05).unwrap(), |t| C64::from_polar(1.0, -eps * t));
        let sp = spectrum(&s, 1e6, 1.0).unwrap();
        let peaks = sp.peaks(0.01, f64::NEG_INFINITY);
        let p = peaks.iter().copied().max_by(|&a, &b| sp.intensity[a].total_cmp(&sp.intensity[b])).unwrap();
        assert!((sp.omegas[p] - eps).abs() <= sp.bin_width());
        let half = sp.intensity[p] / 2.0;
        let width = sp.intensity.iter().filter(|&&v| v > half).count();
        assert!(width <= 3, "{width} bins above half maximum");
    }

    #[test]
    fn spectrum_is_real_for_arbitrary_series() {
        let s = series(time_grid(10.0, 0.1).unwrap(), |t| C64::new((1.3 * t).cos() + 0.2, (0.7 * t).sin() * t));
        assert!(spectrum(&s, 3.0, 1.0).is_ok());
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let s = series(vec![0.0, 0.1, 0.25, 0.3], |_| C64::new(1.0, 0.0));
        assert!(matches!(spectrum(&s, 1.0, 1.0), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn identity_operators_give_unit_correlation() {
        let h = build_tfi(&TFIConfig { n_sites: 2, h: 1.0 }).unwrap();
        let id = PauliSum::identity(2);
        let mut cfg = CorrelationConfig::new(0.5, 0.2, 0.05);
        cfg.thermal_source = ThermalSource::Exact;
        let c = compute_correlation(&h, &id, &id, &cfg, &PipelineConfig::default()).unwrap();
        for v in &c.values {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-8, "{v}");
        }
    }

    #[test]
    fn exact_source_c0_is_thermal_average() {
        let h = build_tfi(&TFIConfig { n_sites: 2, h: 1.5 }).unwrap();
        let x0 = PauliSum::from_terms(2, vec![PauliTerm::parse_letters(1.0, "XI").unwrap()]).unwrap();
        let mut cfg = CorrelationConfig::new(0.5, 0.05, 0.05);
        cfg.thermal_source = ThermalSource::Exact;
        let c = compute_correlation(&h, &x0, &x0, &cfg, &PipelineConfig::default()).unwrap();
        let g = oracle::gibbs_state(&h, 0.5).unwrap();
        let ab = oracle::to_dense(&x0.product(&x0).unwrap()).unwrap().matrix;
        let want = oracle::expectation_dense(&g.rho, &ab);
        assert!((c.values[0] - want).norm() < 1e-10);
    }

    #[test]
    fn two_level_ground_state_phase_rotates_at_gap() {
        let eps = 2.5;
        let h = PauliSum::from_terms(1, vec![PauliTerm::parse_letters(-eps / 2.0, "Z").unwrap()]).unwrap();
        let x = PauliSum::from_terms(1, vec![PauliTerm::parse_letters(1.0, "X").unwrap()]).unwrap();
        let mut cfg = CorrelationConfig::new(100.0, 3.0, 0.05);
        cfg.thermal_source = ThermalSource::Exact;
        let pipe = PipelineConfig { depth: AnsatzDepth::uniform(2), substeps: 2, ..Default::default() };
        let c = compute_correlation(&h, &x, &x, &cfg, &pipe).unwrap();
        for (t, v) in c.times.iter().zip(&c.values) {
            assert!((v - C64::from_polar(1.0, -eps * t)).norm() < 1e-4, "t = {t}: {v}");
        }
    }

    #[test]
    fn circuit_and_direct_estimators_agree() {
        let h = build_tfi(&TFIConfig { n_sites: 1, h: 0.8 }).unwrap();
        let a = PauliSum::from_terms(1, vec![PauliTerm::parse_letters(0.7, "X").unwrap(), PauliTerm::parse_letters(0.2, "Z").unwrap()])
            .unwrap();
        let cfg = CorrelationConfig::new(0.5, 0.1, 0.05);
        let pipe = PipelineConfig { depth: AnsatzDepth::uniform(1), ..Default::default() };
        let direct = compute_correlation(&h, &a, &a, &cfg, &pipe).unwrap();
        let circuit =
            compute_correlation(&h, &a, &a, &CorrelationConfig { estimator: Estimator::Circuit, ..cfg }, &pipe).unwrap();
        for (x, y) in direct.values.iter().zip(&circuit.values) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_b_rejected() {
        let h = build_tfi(&TFIConfig { n_sites: 1, h: 0.8 }).unwrap();
        let zero = PauliSum::from_terms(1, vec![PauliTerm::parse_letters(0.0, "X").unwrap()]).unwrap();
        let cfg = CorrelationConfig::new(0.5, 0.1, 0.05);
        let err = compute_correlation(&h, &zero, &zero, &cfg, &PipelineConfig::default());
        assert!(matches!(err, Err(Error::DegenerateOperator { .. })));
    }

    #[test]
    fn quench_csv_header() {
        let mut cfg = QuenchConfig::new(2, 1.0, 1.0, 0.5);
        cfg.t_max = 0.02;
        let r = run_quench(&cfg, &PipelineConfig::default()).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("t,zz_01_vqa,zz_01_exact,xx_01_vqa,xx_01_exact\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
