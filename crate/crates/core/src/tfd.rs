//! Doubled Hilbert space: `|I⟩`, lifted operators, `Ĥ = H − H̃`, thermal
//! preparation and the partial trace back to the physical register.
//!
//! Block layout: physical qubit `i` is register qubit `i`, its fictitious
//! partner is register qubit `n + i`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::ansatz::{AnsatzCircuit, ParameterVector};
use crate::error::{Error, Result};
use crate::oracle::{self, identity_state_amplitudes, DenseMatrix};
use crate::pauli::{PauliSum, PauliTerm};
use crate::statevector::StateVector;
use crate::vqa::{self, FlowConfig, FlowMode, TangentModel, Trajectory, INITIAL_PERTURBATION};

/// Qubit budget (doubled register) up to which thermal prep reports an oracle fidelity.
pub const FIDELITY_ORACLE_CAP: usize = oracle::DEFAULT_QUBIT_CAP;

#[derive(Clone, Debug)]
pub struct TFDSystem {
    n_physical: usize,
    h_physical: PauliSum,
    h_hat: PauliSum,
}

impl TFDSystem {
    pub fn new(h_physical: PauliSum) -> Result<Self> {
        let n_physical = h_physical.n_qubits();
        if n_physical == 0 {
            return Err(Error::Contract("physical register must hold at least one qubit".into()));
        }
        let h_hat = build_h_hat_raw(&h_physical)?;
        Ok(Self { n_physical, h_physical, h_hat })
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn n_total(&self) -> usize {
        2 * self.n_physical
    }

    /// Physical Hilbert-space dimension `d = 2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n_physical
    }

    pub fn h_physical(&self) -> &PauliSum {
        &self.h_physical
    }

    pub fn h_hat(&self) -> &PauliSum {
        &self.h_hat
    }

    pub fn lift(&self, op: &PauliSum) -> Result<PauliSum> {
        lift_physical(op, self)
    }

    pub fn identity_state(&self) -> StateVector {
        prepare_identity_state(self.n_physical)
    }
}

/// `Σ_b |b⟩|b̃⟩ / √(2^n)` on `2n` qubits.
pub fn prepare_identity_state(n_physical: usize) -> StateVector {
    StateVector::from_amplitudes(identity_state_amplitudes(n_physical))
        .expect("identity state has power-of-two length")
}

fn shift(op: &PauliSum, offset: usize) -> Result<PauliSum> {
    let n_total = 2 * op.n_qubits();
    PauliSum::from_terms(
        n_total,
        op.terms()
            .iter()
            .map(|t| PauliTerm::new(t.coefficient, t.string.embed(n_total, offset)))
            .collect(),
    )
}

/// Pads every term with identities on the fictitious register.
pub fn lift_physical(op: &PauliSum, sys: &TFDSystem) -> Result<PauliSum> {
    if op.n_qubits() != sys.n_physical {
        return Err(Error::Dimension { expected: sys.n_physical, found: op.n_qubits() });
    }
    shift(op, 0)
}

/// Same letters and coefficients, placed on the fictitious register.
pub fn mirror(op: &PauliSum, sys: &TFDSystem) -> Result<PauliSum> {
    if op.n_qubits() != sys.n_physical {
        return Err(Error::Dimension { expected: sys.n_physical, found: op.n_qubits() });
    }
    shift(op, sys.n_physical)
}

fn build_h_hat_raw(h: &PauliSum) -> Result<PauliSum> {
    h.ensure_hermitian("Hamiltonian")?;
    if let Some(t) = h.terms().iter().find(|t| t.string.y_count() % 2 == 1) {
        return Err(Error::Contract(format!(
            "term {} has an odd number of Y letters; its matrix is not real and the mirrored copy would not purify ρ",
            t.string
        )));
    }
    let mut out = shift(h, 0)?;
    out.extend(&shift(h, h.n_qubits())?.scaled(-1.0))?;
    Ok(out)
}

/// `lift(H) − mirror(H)`.
pub fn build_h_hat(h: &PauliSum, sys: &TFDSystem) -> Result<PauliSum> {
    if h.n_qubits() != sys.n_physical {
        return Err(Error::Dimension { expected: sys.n_physical, found: h.n_qubits() });
    }
    build_h_hat_raw(h)
}

/// `ρ_ab = Σ_c ψ(a, c) ψ(b, c)*`.
pub fn partial_trace_fictitious(state: &StateVector, sys: &TFDSystem) -> Result<DenseMatrix> {
    if state.n_qubits() != sys.n_total() {
        return Err(Error::Dimension { expected: sys.n_total(), found: state.n_qubits() });
    }
    reduce(state)
}

/// Partial trace over the upper half of any even register.
pub fn reduce(state: &StateVector) -> Result<DenseMatrix> {
    let n_total = state.n_qubits();
    if n_total % 2 != 0 {
        return Err(Error::Contract(format!("register of {n_total} qubits cannot be split in half")));
    }
    let d = 1usize << (n_total / 2);
    // Column c of `psi` holds the physical amplitudes paired with fictitious basis state c.
    let psi = DMatrix::from_column_slice(d, d, state.amplitudes());
    Ok(&psi * psi.adjoint())
}

/// Row-major `re,im` pairs, one matrix row per line.
pub fn density_matrix_csv(rho: &DenseMatrix) -> String {
    let mut out = String::new();
    for r in 0..rho.nrows() {
        let row: Vec<String> = (0..rho.ncols())
            .map(|c| {
                let z: C64 = rho[(r, c)];
                format!("{:?},{:?}", z.re, z.im)
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug)]
pub struct ThermalPrepResult {
    pub theta: ParameterVector,
    /// `|⟨O(β)|O(β(θ))⟩|²`, present when the doubled register fits the oracle.
    pub fidelity_vs_oracle: Option<f64>,
    pub beta: f64,
    pub trajectory: Trajectory,
    pub state: StateVector,
}

/// Imaginary-time flow of `lift(H)` from `|I⟩` to `τ = β/2`.
///
/// The ansatz must span the doubled register. `seed` fixes the signs of the
/// initial single-qubit perturbation.
pub fn prepare_thermal_state(
    h: &PauliSum,
    beta: f64,
    ansatz: &AnsatzCircuit,
    cfg: &FlowConfig,
    seed: u64,
) -> Result<ThermalPrepResult> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    let sys = TFDSystem::new(h.clone())?;
    if ansatz.n_qubits() != sys.n_total() {
        return Err(Error::Dimension { expected: sys.n_total(), found: ansatz.n_qubits() });
    }
    let lifted = sys.lift(h)?;
    let initial = sys.identity_state();
    let model = TangentModel::new(ansatz, &initial, &lifted)?;
    let theta0 = vqa::perturbed_initial_parameters(ansatz, INITIAL_PERTURBATION, seed);
    let trajectory = vqa::evolve(&model, &theta0, FlowMode::Imaginary, 0.5 * beta, cfg, |_| Ok(()))?;
    let theta = trajectory.final_theta().clone();
    let state = ansatz.prepare_state(&theta, &initial)?;
    let fidelity_vs_oracle = if sys.n_total() <= FIDELITY_ORACLE_CAP {
        let exact = oracle::gibbs_state(h, beta)?;
        Some(exact.purification.fidelity(&state)?.clamp(0.0, 1.0))
    } else {
        None
    };
    Ok(ThermalPrepResult { theta, fidelity_vs_oracle, beta, trajectory, state })
}
