//! McLachlan parameter flows.
//!
//! Real time: `Σ_l Re{M_kl} θ̇_l = −Im{V_k}`.
//! Imaginary time: `Σ_l Re{M_kl} θ̇_l = −Re{V_k}`.
//!
//! with `M_kl = ⟨∂_kψ|∂_lψ⟩` and `V_k = ⟨ψ|H|∂_kψ⟩`. The equations are used
//! as-is, without a global-phase (Berry connection) correction, so a generator
//! that can rotate the global phase of the state is driven by `⟨H⟩`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{AnsatzCircuit, ParameterVector, TangentBlock};
use crate::error::{Error, Result};
use crate::estimators::{self, ShotConfig};
use crate::pauli::PauliSum;
use crate::statevector::StateVector;

pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 0.01;
/// Relative eigenvalue cutoff of the pseudo-inverse fallback.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-10;

/// Angle given to single-qubit generators when leaving the θ = 0 stationary point.
pub const INITIAL_PERTURBATION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    /// Cholesky factorization of `Re{M} + λI`, falling back to the eigen route.
    Cholesky,
    /// Symmetric eigendecomposition with a relative pseudo-inverse cutoff.
    Eigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMode {
    Real,
    Imaginary,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub step_size: f64,
    pub regularization: f64,
    pub integrator: Integrator,
    pub max_steps: usize,
    pub solver: LinearSolver,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step_size: DEFAULT_STEP,
            regularization: DEFAULT_REGULARIZATION,
            integrator: Integrator::Rk4,
            max_steps: 1_000_000,
            solver: LinearSolver::Cholesky,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::Config(format!("step_size must be > 0, got {}", self.step_size)));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::Config("regularization must be >= 0".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct McLachlanSystem {
    pub m: DMatrix<C64>,
    pub v: DVector<C64>,
}

impl McLachlanSystem {
    pub fn n_params(&self) -> usize {
        self.v.len()
    }

    pub fn real_metric(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }

    /// `−Im{V}` in real time, `−Re{V}` in imaginary time.
    pub fn rhs(&self, mode: FlowMode) -> DVector<f64> {
        match mode {
            FlowMode::Real => self.v.map(|z| -z.im),
            FlowMode::Imaginary => self.v.map(|z| -z.re),
        }
    }

    /// Solve `(Re{M} + λI) θ̇ = rhs`.
    pub fn velocity(&self, mode: FlowMode, cfg: &FlowConfig) -> Result<DVector<f64>> {
        solve_regularized(self.real_metric(), self.rhs(mode), cfg)
    }
}

fn solve_regularized(
    mut a: DMatrix<f64>,
    b: DVector<f64>,
    cfg: &FlowConfig,
) -> Result<DVector<f64>> {
    for i in 0..a.nrows() {
        a[(i, i)] += cfg.regularization;
    }
    if cfg.solver == LinearSolver::Cholesky {
        if let Some(chol) = Cholesky::new(a.clone()) {
            let x = chol.solve(&b);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
    }
    solve_eigen(a, b)
}

fn solve_eigen(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    let eig = SymmetricEigen::new(a);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &l| m.min(l.abs()));
    if !(max > 0.0) {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    let cutoff = PSEUDO_INVERSE_CUTOFF * max;
    let proj = eig.eigenvectors.tr_mul(&b);
    let scaled = DVector::from_iterator(
        proj.len(),
        proj.iter().zip(eig.eigenvalues.iter()).map(|(p, &l)| if l > cutoff { p / l } else { 0.0 }),
    );
    let x = &eig.eigenvectors * scaled;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Singular { condition: max / min })
    }
}

/// Column-block width for [`gram`].
const GRAM_BLOCK: usize = 64;

/// Gram matrix `G_kl = ⟨d_k|d_l⟩` through real matrix products.
///
/// With `S = [Re; Im]` and `S' = [Im; −Re]` stacked, `Re G = SᵀS` and
/// `Im G = SᵀS'`. Only block rows at or above the diagonal are formed; the
/// rest follows from symmetry and antisymmetry.
pub(crate) fn gram(block: &TangentBlock) -> DMatrix<C64> {
    let (dim, n) = (block.dim, block.width);
    // The row-major parts, read column-major, are the transposed blocks.
    let s_t = DMatrix::from_iterator(n, 2 * dim, block.re.iter().chain(&block.im).copied());
    let s_prime_t = DMatrix::from_iterator(n, 2 * dim, block.im.iter().copied().chain(block.re.iter().map(|x| -x)));
    let (s, s_prime) = (s_t.transpose(), s_prime_t.transpose());
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut start = 0;
    while start < n {
        let rows = GRAM_BLOCK.min(n - start);
        let rest = n - start;
        let lhs = s_t.rows(start, rows);
        let re = &lhs * s.columns(start, rest);
        let im = &lhs * s_prime.columns(start, rest);
        for i in 0..rows {
            for j in i..rest {
                let z = C64::new(re[(i, j)], im[(i, j)]);
                g[(start + i, start + j)] = z;
                g[(start + j, start + i)] = z.conj();
            }
        }
        start += rows;
    }
    g
}

/// `M_kl = ⟨∂_kψ|∂_lψ⟩`.
pub fn compute_m(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
) -> Result<DMatrix<C64>> {
    let (_, block) = ansatz.tangent_block(theta, initial)?;
    Ok(gram(&block))
}

/// `V_k = ⟨ψ|H|∂_kψ⟩`.
pub fn compute_v(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
    h: &PauliSum,
) -> Result<DVector<C64>> {
    h.ensure_hermitian("Hamiltonian")?;
    let (psi, block) = ansatz.tangent_block(theta, initial)?;
    v_from_tangent(&psi, &block, h)
}

fn v_from_tangent(psi: &StateVector, block: &TangentBlock, h: &PauliSum) -> Result<DVector<C64>> {
    let h_psi = psi.apply_pauli_sum(h)?;
    let w = block.width;
    let (mut v_re, mut v_im) = (vec![0.0; w], vec![0.0; w]);
    for (b, hp) in h_psi.amplitudes().iter().enumerate() {
        let (dr, di) = (&block.re[b * w..(b + 1) * w], &block.im[b * w..(b + 1) * w]);
        for k in 0..w {
            v_re[k] += hp.re * dr[k] + hp.im * di[k];
            v_im[k] += hp.re * di[k] - hp.im * dr[k];
        }
    }
    Ok(DVector::from_iterator(w, v_re.into_iter().zip(v_im).map(|(r, i)| C64::new(r, i))))
}

/// How `M` and `V` are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementSource {
    /// Inner products of derivative statevectors.
    Direct,
    /// Hadamard-test circuits.
    Circuit(ShotConfig),
}

/// Everything that defines `M(θ)` and `V(θ)`: ansatz, reference state, Hamiltonian.
#[derive(Clone, Copy, Debug)]
pub struct TangentModel<'a> {
    pub ansatz: &'a AnsatzCircuit,
    pub initial: &'a StateVector,
    pub hamiltonian: &'a PauliSum,
    pub source: ElementSource,
}

impl<'a> TangentModel<'a> {
    pub fn new(ansatz: &'a AnsatzCircuit, initial: &'a StateVector, hamiltonian: &'a PauliSum) -> Result<Self> {
        hamiltonian.ensure_hermitian("Hamiltonian")?;
        if hamiltonian.n_qubits() != ansatz.n_qubits() {
            return Err(Error::Dimension { expected: ansatz.n_qubits(), found: hamiltonian.n_qubits() });
        }
        if initial.n_qubits() != ansatz.n_qubits() {
            return Err(Error::Dimension { expected: ansatz.n_qubits(), found: initial.n_qubits() });
        }
        Ok(Self { ansatz, initial, hamiltonian, source: ElementSource::Direct })
    }

    pub fn with_source(mut self, source: ElementSource) -> Self {
        self.source = source;
        self
    }

    /// Assemble `M`, `V` at `θ`, returning the prepared state alongside.
    pub fn evaluate(&self, theta: &[f64]) -> Result<(McLachlanSystem, StateVector)> {
        match self.source {
            ElementSource::Direct => {
                let (psi, block) = self.ansatz.tangent_block(theta, self.initial)?;
                let v = v_from_tangent(&psi, &block, self.hamiltonian)?;
                Ok((McLachlanSystem { m: gram(&block), v }, psi))
            }
            ElementSource::Circuit(shots) => {
                let m = estimators::estimate_m_matrix(self.ansatz, theta, self.initial, shots)?;
                let v = estimators::estimate_v_vector(self.ansatz, theta, self.initial, self.hamiltonian, shots)?;
                let psi = self.ansatz.prepare_state(theta, self.initial)?;
                Ok((McLachlanSystem { m, v }, psi))
            }
        }
    }

    pub fn system(&self, theta: &[f64]) -> Result<McLachlanSystem> {
        Ok(self.evaluate(theta)?.0)
    }

    fn velocity_at(&self, theta: &[f64], mode: FlowMode, cfg: &FlowConfig) -> Result<DVector<f64>> {
        self.system(theta)?.velocity(mode, cfg)
    }
}

fn shifted(theta: &[f64], k: &DVector<f64>, h: f64) -> Vec<f64> {
    theta.iter().zip(k.iter()).map(|(t, d)| t + h * d).collect()
}

/// One fixed step of size `h` from `θ`, where `system` is assembled at `θ`.
fn advance(
    model: &TangentModel<'_>,
    mode: FlowMode,
    theta: &[f64],
    system: &McLachlanSystem,
    h: f64,
    cfg: &FlowConfig,
) -> Result<ParameterVector> {
    if system.n_params() != theta.len() {
        return Err(Error::Dimension { expected: theta.len(), found: system.n_params() });
    }
    let k1 = system.velocity(mode, cfg)?;
    let next = match cfg.integrator {
        Integrator::Euler => shifted(theta, &k1, h),
        Integrator::Rk4 => {
            let k2 = model.velocity_at(&shifted(theta, &k1, 0.5 * h), mode, cfg)?;
            let k3 = model.velocity_at(&shifted(theta, &k2, 0.5 * h), mode, cfg)?;
            let k4 = model.velocity_at(&shifted(theta, &k3, h), mode, cfg)?;
            theta
                .iter()
                .enumerate()
                .map(|(i, t)| t + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    Ok(ParameterVector(next))
}

pub fn step_real_time(
    model: &TangentModel<'_>,
    theta: &[f64],
    system: &McLachlanSystem,
    cfg: &FlowConfig,
) -> Result<ParameterVector> {
    cfg.validate()?;
    advance(model, FlowMode::Real, theta, system, cfg.step_size, cfg)
}

pub fn step_imag_time(
    model: &TangentModel<'_>,
    theta: &[f64],
    system: &McLachlanSystem,
    cfg: &FlowConfig,
) -> Result<ParameterVector> {
    cfg.validate()?;
    advance(model, FlowMode::Imaginary, theta, system, cfg.step_size, cfg)
}

/// One recorded point of a flow, handed to the observer.
pub struct FlowSample<'s> {
    pub step: usize,
    pub time: f64,
    pub theta: &'s [f64],
    pub state: &'s StateVector,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub thetas: Vec<ParameterVector>,
    /// `⟨ψ(θ)|H|ψ(θ)⟩` at each recorded point.
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn final_theta(&self) -> &ParameterVector {
        self.thetas.last().expect("trajectory holds at least the initial point")
    }

    /// `step,time,theta_0..theta_{N-1},energy`.
    pub fn to_csv(&self) -> String {
        let n = self.thetas.first().map_or(0, |t| t.len());
        let mut out = String::from("step,time");
        for k in 0..n {
            out.push_str(&format!(",theta_{k}"));
        }
        out.push_str(",energy\n");
        for (i, ((t, th), e)) in self.times.iter().zip(&self.thetas).zip(&self.energies).enumerate() {
            out.push_str(&format!("{i},{t:?}"));
            for v in th.iter() {
                out.push_str(&format!(",{v:?}"));
            }
            out.push_str(&format!(",{e:?}\n"));
        }
        out
    }
}

/// Number of fixed steps covering `duration` with steps no longer than `step_size`.
pub fn step_count(duration: f64, step_size: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    let raw = duration / step_size;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 * raw.max(1.0) {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

/// Integrate the flow over `duration` with fixed steps, calling `observer` at
/// every grid point including `t = 0`.
pub fn evolve(
    model: &TangentModel<'_>,
    theta0: &[f64],
    mode: FlowMode,
    duration: f64,
    cfg: &FlowConfig,
    mut observer: impl FnMut(&FlowSample<'_>) -> Result<()>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(duration >= 0.0) {
        return Err(Error::Config(format!("duration must be >= 0, got {duration}")));
    }
    if theta0.len() != model.ansatz.n_params() {
        return Err(Error::Dimension { expected: model.ansatz.n_params(), found: theta0.len() });
    }
    let n_steps = step_count(duration, cfg.step_size);
    if n_steps > cfg.max_steps {
        return Err(Error::Config(format!(
            "{n_steps} steps needed but max_steps is {}",
            cfg.max_steps
        )));
    }
    let h = if n_steps > 0 { duration / n_steps as f64 } else { 0.0 };
    let mut traj = Trajectory::default();
    let mut theta = ParameterVector(theta0.to_vec());
    for step in 0..=n_steps {
        let time = h * step as f64;
        let (system, state) = if step < n_steps {
            let (s, psi) = model.evaluate(&theta)?;
            (Some(s), psi)
        } else {
            (None, model.ansatz.prepare_state(&theta, model.initial)?)
        };
        let energy = state.expectation(model.hamiltonian)?;
        observer(&FlowSample { step, time, theta: &theta, state: &state })?;
        traj.times.push(time);
        traj.thetas.push(theta.clone());
        traj.energies.push(energy);
        if let Some(system) = system {
            theta = advance(model, mode, &theta, &system, h, cfg)?;
        }
    }
    Ok(traj)
}

/// `θ = 0` except for single-qubit generators, which get `±magnitude` with
/// signs drawn from a seeded stream.
pub fn perturbed_initial_parameters(ansatz: &AnsatzCircuit, magnitude: f64, seed: u64) -> ParameterVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParameterVector(
        ansatz
            .generators()
            .iter()
            .map(|g| {
                let weight = (g.string.x_mask() | g.string.z_mask()).count_ones();
                if weight == 1 {
                    if rng.random_bool(0.5) { magnitude } else { -magnitude }
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_layered_ansatz;
    use crate::pauli::PauliTerm;
    use approx::assert_abs_diff_eq;

    fn single(letters: &str) -> AnsatzCircuit {
        AnsatzCircuit::new(letters.len(), vec![PauliTerm::parse_letters(1.0, letters).unwrap()]).unwrap()
    }

    fn ham(n: usize, terms: &[(f64, &str)]) -> PauliSum {
        PauliSum::from_terms(n, terms.iter().map(|(c, s)| PauliTerm::parse_letters(*c, s).unwrap()).collect())
            .unwrap()
    }

    fn random_theta(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    #[test]
    fn m_diagonal_is_one_and_hermitian() {
        let a = build_layered_ansatz(3, 2).unwrap();
        let theta = random_theta(a.n_params(), 3);
        let m = compute_m(&a, &theta, &StateVector::basis(3, 6)).unwrap();
        for k in 0..a.n_params() {
            assert_abs_diff_eq!(m[(k, k)].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[(k, k)].im, 0.0, epsilon = 1e-12);
            for l in 0..a.n_params() {
                assert!((m[(k, l)] - m[(l, k)].conj()).norm() < 1e-12);
            }
        }
        let eig = SymmetricEigen::new(m.map(|z| z.re));
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn single_generator_metric_is_one() {
        let m = compute_m(&single("Y"), &[0.4], &StateVector::zero(1)).unwrap();
        assert_abs_diff_eq!((m[(0, 0)] - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_hamiltonian_gives_imaginary_v() {
        let a = build_layered_ansatz(2, 2).unwrap();
        let theta = random_theta(a.n_params(), 9);
        let v = compute_v(&a, &theta, &StateVector::basis(2, 1), &PauliSum::identity(2)).unwrap();
        for z in v.iter() {
            assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn v_for_z_generator_on_zero_is_i() {
        let v = compute_v(&single("Z"), &[0.0], &StateVector::zero(1), &ham(1, &[(1.0, "Z")])).unwrap();
        assert_abs_diff_eq!((v[0] - C64::new(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let h = PauliSum::from_terms(1, vec![PauliTerm::parse_letters(C64::new(0.0, 1.0), "Z").unwrap()]).unwrap();
        assert!(matches!(
            compute_v(&single("Z"), &[0.0], &StateVector::zero(1), &h),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn real_v_is_half_energy_gradient() {
        let a = build_layered_ansatz(2, 2).unwrap();
        let h = ham(2, &[(-1.0, "ZZ"), (-1.5, "XI"), (-1.5, "IX"), (0.3, "YY")]);
        let psi0 = StateVector::basis(2, 2);
        let theta = random_theta(a.n_params(), 21);
        let v = compute_v(&a, &theta, &psi0, &h).unwrap();
        let eps = 1e-5;
        for k in 0..a.n_params() {
            let mut tp = theta.clone();
            tp[k] += eps;
            let mut tm = theta.clone();
            tm[k] -= eps;
            let ep = a.prepare_state(&tp, &psi0).unwrap().expectation(&h).unwrap();
            let em = a.prepare_state(&tm, &psi0).unwrap().expectation(&h).unwrap();
            assert_abs_diff_eq!(v[k].re, 0.5 * (ep - em) / (2.0 * eps), epsilon = 1e-7);
        }
    }

    #[test]
    fn zero_v_is_stationary() {
        let sys = McLachlanSystem { m: DMatrix::identity(2, 2), v: DVector::zeros(2) };
        let a = build_layered_ansatz(1, 1).unwrap();
        let psi0 = StateVector::zero(1);
        let h = PauliSum::identity(1);
        let model = TangentModel::new(&a, &psi0, &h).unwrap();
        let cfg = FlowConfig { integrator: Integrator::Euler, ..FlowConfig::default() };
        assert_eq!(step_real_time(&model, &[0.2, 0.3], &sys, &cfg).unwrap().0, vec![0.2, 0.3]);
        assert_eq!(step_imag_time(&model, &[0.2, 0.3], &sys, &cfg).unwrap().0, vec![0.2, 0.3]);
    }

    #[test]
    fn single_x_euler_step() {
        // ψ = e^{iθX}|0⟩, H = X: V = ⟨ψ|X·iX|ψ⟩ = i, so θ̇ = −Im V / M = −1.
        let a = single("X");
        let psi0 = StateVector::zero(1);
        let h = ham(1, &[(1.0, "X")]);
        let model = TangentModel::new(&a, &psi0, &h).unwrap();
        let sys = model.system(&[0.0]).unwrap();
        assert_abs_diff_eq!((sys.v[0] - C64::new(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        let cfg = FlowConfig { integrator: Integrator::Euler, regularization: 0.0, ..FlowConfig::default() };
        let next = step_real_time(&model, &[0.0], &sys, &cfg).unwrap();
        assert_abs_diff_eq!(next[0], -0.01, epsilon = 1e-15);
    }

    #[test]
    fn step_count_hits_duration() {
        assert_eq!(step_count(0.0, 0.01), 0);
        assert_eq!(step_count(0.25, 0.01), 25);
        assert_eq!(step_count(0.255, 0.01), 26);
        assert_eq!(step_count(5.0, 0.01), 500);
    }

    #[test]
    fn zero_duration_returns_initial_point() {
        let a = build_layered_ansatz(1, 1).unwrap();
        let psi0 = StateVector::zero(1);
        let h = ham(1, &[(1.0, "Z")]);
        let model = TangentModel::new(&a, &psi0, &h).unwrap();
        let traj = evolve(&model, &[0.1, 0.2], FlowMode::Real, 0.0, &FlowConfig::default(), |_| Ok(())).unwrap();
        assert_eq!(traj.thetas.len(), 1);
        assert_eq!(traj.thetas[0].0, vec![0.1, 0.2]);
    }

    #[test]
    fn trajectory_csv_header() {
        let traj = Trajectory {
            times: vec![0.0],
            thetas: vec![ParameterVector(vec![0.5, -0.5])],
            energies: vec![1.25],
        };
        let csv = traj.to_csv();
        assert!(csv.starts_with("step,time,theta_0,theta_1,energy\n0,0.0,0.5,-0.5,1.25"));
    }

    #[test]
    fn eigen_and_cholesky_solvers_agree() {
        let a = build_layered_ansatz(2, 1).unwrap();
        let psi0 = StateVector::basis(2, 0);
        let h = ham(2, &[(-1.0, "ZZ"), (-1.5, "XI"), (-1.5, "IX")]);
        let model = TangentModel::new(&a, &psi0, &h).unwrap();
        let sys = model.system(&random_theta(a.n_params(), 5)).unwrap();
        let chol = sys.velocity(FlowMode::Real, &FlowConfig::default()).unwrap();
        let eig = sys
            .velocity(FlowMode::Real, &FlowConfig { solver: LinearSolver::Eigen, ..FlowConfig::default() })
            .unwrap();
        assert!((chol - eig).amax() < 1e-6);
    }

    #[test]
    fn perturbation_touches_only_single_qubit_generators() {
        let a = build_layered_ansatz(3, 2).unwrap();
        let t1 = perturbed_initial_parameters(&a, 1e-3, 7);
        let t2 = perturbed_initial_parameters(&a, 1e-3, 7);
        assert_eq!(t1, t2);
        for (g, v) in a.generators().iter().zip(t1.iter()) {
            let weight = (g.string.x_mask() | g.string.z_mask()).count_ones();
            if weight == 1 {
                assert_eq!(v.abs(), 1e-3);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = FlowConfig { step_size: 0.0, ..FlowConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
