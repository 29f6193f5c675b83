//! Hadamard-test estimation of `M_kl`, `V_k` and transition amplitudes.
//!
//! The system register is extended by one ancilla (the most significant
//! qubit), prepared in `(|0⟩ + e^{iφ}|1⟩)/√2`. Each circuit builds a branch
//! state `|a⟩` under ancilla 0 and `|b⟩` under ancilla 1; measuring the ancilla
//! in the X basis gives `⟨X⟩ = Re(e^{iφ}⟨a|b⟩)`. Running `φ = 0` and `φ = π/2`
//! recovers `Re⟨a|b⟩` and `−Im⟨a|b⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statevector::{apply_pauli_slice, pauli_expectation, rotate_slice, StateVector};

/// Shot budget for a single circuit; `None` selects the analytic ancilla expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ShotConfig {
    pub shots: Option<u64>,
    pub seed: u64,
}

impl ShotConfig {
    pub fn exact() -> Self {
        Self { shots: None, seed: 0 }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        Self { shots: Some(shots), seed }
    }

    fn validate(&self) -> Result<()> {
        if self.shots == Some(0) {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self::exact()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncillaPhase {
    /// `φ = 0`: measures the real part.
    Zero,
    /// `φ = π/2`: measures the (negated) imaginary part.
    HalfPi,
}

impl AncillaPhase {
    fn factor(self) -> C64 {
        match self {
            AncillaPhase::Zero => C64::new(1.0, 0.0),
            AncillaPhase::HalfPi => C64::new(0.0, 1.0),
        }
    }
}

/// Which ancilla value an operation is conditioned on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Always,
    OnZero,
    OnOne,
}

#[derive(Clone, Debug)]
pub enum CircuitOp {
    Pauli { string: PauliString, control: Control },
    Rotation { generator: PauliString, angle: f64, control: Control },
}

/// An ancilla-interference circuit over a prepared system state.
#[derive(Clone, Debug)]
pub struct HadamardTestPlan {
    pub ancilla_phase: AncillaPhase,
    pub base_preparation: StateVector,
    pub controlled_sequence: Vec<CircuitOp>,
}

impl HadamardTestPlan {
    /// Full `(n+1)`-qubit register after the circuit, before measurement.
    pub fn run(&self) -> Result<StateVector> {
        let n = self.base_preparation.n_qubits();
        let dim = self.base_preparation.dim();
        let mut amps = Vec::with_capacity(2 * dim);
        let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps.extend(self.base_preparation.amplitudes().iter().map(|a| a * w));
        let phase = self.ancilla_phase.factor() * w;
        amps.extend(self.base_preparation.amplitudes().iter().map(|a| a * phase));
        let mut full = StateVector::from_amplitudes(amps)?;
        for op in &self.controlled_sequence {
            let (string, control) = match op {
                CircuitOp::Pauli { string, control } => (string, *control),
                CircuitOp::Rotation { generator, control, .. } => (generator, *control),
            };
            if string.n_qubits() != n {
                return Err(Error::Dimension { expected: n, found: string.n_qubits() });
            }
            let (lo, hi) = full.amplitudes_mut().split_at_mut(dim);
            let targets: &mut [&mut [C64]] = match control {
                Control::Always => &mut [lo, hi],
                Control::OnZero => &mut [lo],
                Control::OnOne => &mut [hi],
            };
            for half in targets.iter_mut() {
                match op {
                    CircuitOp::Pauli { .. } => apply_pauli_slice(half, string),
                    CircuitOp::Rotation { angle, .. } => rotate_slice(half, string, *angle),
                }
            }
        }
        Ok(full)
    }

    /// `⟨X_ancilla⟩ = Re(e^{iφ}⟨a|b⟩)`.
    pub fn ancilla_x(&self) -> Result<f64> {
        let full = self.run()?;
        let n = self.base_preparation.n_qubits();
        let x_anc = PauliString::single(n + 1, n, Pauli::X);
        Ok(pauli_expectation(full.amplitudes(), &x_anc).re)
    }

    /// Exact `⟨X⟩`, or the mean of `shots` ±1 outcomes drawn with `P(+1) = (1 + ⟨X⟩)/2`.
    pub fn measure(&self, shots: ShotConfig, circuit_id: u64) -> Result<f64> {
        let x = self.ancilla_x()?.clamp(-1.0, 1.0);
        match shots.shots {
            None => Ok(x),
            Some(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(shots.seed);
                rng.set_stream(circuit_id);
                let p = 0.5 * (1.0 + x);
                let binom = Binomial::new(n, p).map_err(|e| Error::Contract(e.to_string()))?;
                let plus = binom.sample(&mut rng) as f64;
                Ok(2.0 * plus / n as f64 - 1.0)
            }
        }
    }
}

/// Runs a plan at both ancilla phases and returns the estimate of `⟨a|b⟩`.
fn interfere(
    base: &StateVector,
    sequence: Vec<CircuitOp>,
    shots: ShotConfig,
    circuit_id: u64,
) -> Result<C64> {
    let mut plan = HadamardTestPlan {
        ancilla_phase: AncillaPhase::Zero,
        base_preparation: base.clone(),
        controlled_sequence: sequence,
    };
    let re = plan.measure(shots, circuit_id.wrapping_mul(2))?;
    plan.ancilla_phase = AncillaPhase::HalfPi;
    let minus_im = plan.measure(shots, circuit_id.wrapping_mul(2).wrapping_add(1))?;
    Ok(C64::new(re, -minus_im))
}

fn mix_id(tag: u64, parts: &[u64]) -> u64 {
    // splitmix64 over the parts; distinct element kinds never share a stream.
    let mut h = tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    h >> 1
}

fn rotations(ansatz: &AnsatzCircuit, theta: &[f64], range: std::ops::Range<usize>, control: Control) -> Vec<CircuitOp> {
    ansatz.generators()[range.clone()]
        .iter()
        .zip(&theta[range])
        .map(|(g, &angle)| CircuitOp::Rotation { generator: g.string.clone(), angle, control })
        .collect()
}

fn check_inputs(ansatz: &AnsatzCircuit, theta: &[f64], initial: &StateVector) -> Result<()> {
    if theta.len() != ansatz.n_params() {
        return Err(Error::Dimension { expected: ansatz.n_params(), found: theta.len() });
    }
    if initial.n_qubits() != ansatz.n_qubits() {
        return Err(Error::Dimension { expected: ansatz.n_qubits(), found: initial.n_qubits() });
    }
    Ok(())
}

/// `M_kl` for `k < l`: `R_k` on the ancilla-0 branch after `U_k`, `R_l` on the
/// ancilla-1 branch after `U_l`; the later rotations cancel.
pub fn estimate_m_element(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
    k: usize,
    l: usize,
    shots: ShotConfig,
) -> Result<C64> {
    check_inputs(ansatz, theta, initial)?;
    shots.validate()?;
    let n = ansatz.n_params();
    if l >= n {
        return Err(Error::IndexOutOfRange { index: l, len: n });
    }
    if k >= l {
        return Err(Error::Contract(format!(
            "M element needs k < l (got k={k}, l={l}); the diagonal is 1 and k > l follows by conjugation"
        )));
    }
    let gens = ansatz.generators();
    let mut seq = rotations(ansatz, theta, 0..k + 1, Control::Always);
    seq.push(CircuitOp::Pauli { string: gens[k].string.clone(), control: Control::OnZero });
    seq.extend(rotations(ansatz, theta, k + 1..l + 1, Control::Always));
    seq.push(CircuitOp::Pauli { string: gens[l].string.clone(), control: Control::OnOne });
    interfere(initial, seq, shots, mix_id(1, &[k as u64, l as u64]))
}

/// `V_k = i Σ_j c_j ⟨ψ_0|U† h_j U_N…U_{k+1} R_k U_k…U_1|ψ_0⟩`.
pub fn estimate_v_element(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
    k: usize,
    h: &PauliSum,
    shots: ShotConfig,
) -> Result<C64> {
    check_inputs(ansatz, theta, initial)?;
    shots.validate()?;
    h.ensure_hermitian("Hamiltonian")?;
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::Dimension { expected: ansatz.n_qubits(), found: h.n_qubits() });
    }
    let n = ansatz.n_params();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    let gens = ansatz.generators();
    let mut total = C64::new(0.0, 0.0);
    for (j, term) in h.terms().iter().enumerate() {
        let mut seq = rotations(ansatz, theta, 0..k + 1, Control::Always);
        seq.push(CircuitOp::Pauli { string: gens[k].string.clone(), control: Control::OnOne });
        seq.extend(rotations(ansatz, theta, k + 1..n, Control::Always));
        seq.push(CircuitOp::Pauli { string: term.string.clone(), control: Control::OnZero });
        let overlap = interfere(initial, seq, shots, mix_id(2, &[k as u64, j as u64]))?;
        total += term.coefficient * overlap;
    }
    Ok(C64::new(0.0, 1.0) * total)
}

/// Full `M` from Hadamard tests on the strict upper triangle.
pub fn estimate_m_matrix(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
    shots: ShotConfig,
) -> Result<DMatrix<C64>> {
    let n = ansatz.n_params();
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for k in 0..n {
        m[(k, k)] = C64::new(1.0, 0.0);
        for l in (k + 1)..n {
            let z = estimate_m_element(ansatz, theta, initial, k, l, shots)?;
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
        }
    }
    Ok(m)
}

pub fn estimate_v_vector(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
    h: &PauliSum,
    shots: ShotConfig,
) -> Result<DVector<C64>> {
    let n = ansatz.n_params();
    let mut v = DVector::from_element(n, C64::new(0.0, 0.0));
    for k in 0..n {
        v[k] = estimate_v_element(ansatz, theta, initial, k, h, shots)?;
    }
    Ok(v)
}

/// A parameterized block `U(θ)` used in a transition-amplitude circuit.
#[derive(Clone, Copy, Debug)]
pub struct CircuitBlock<'a> {
    pub ansatz: &'a AnsatzCircuit,
    pub theta: &'a [f64],
}

impl CircuitBlock<'_> {
    fn ops(&self, control: Control) -> Result<Vec<CircuitOp>> {
        if self.theta.len() != self.ansatz.n_params() {
            return Err(Error::Dimension { expected: self.ansatz.n_params(), found: self.theta.len() });
        }
        Ok(rotations(self.ansatz, self.theta, 0..self.theta.len(), control))
    }
}

/// `⟨ψ_0|U†U_2† A U_1 B U|ψ_0⟩` with `A`, `B` given on the physical register
/// (the low qubits of `ψ_0`) and expanded over their Pauli terms.
///
/// The shared preparation `U` (identity when absent) runs uncontrolled. `U_1` runs on the ancilla-1
/// branch and `U_2` on the ancilla-0 branch, since the two parameter sets
/// differ.
pub fn estimate_transition_amplitude(
    preparation: Option<CircuitBlock<'_>>,
    branch_one: CircuitBlock<'_>,
    branch_two: CircuitBlock<'_>,
    initial: &StateVector,
    a: &PauliSum,
    b: &PauliSum,
    shots: ShotConfig,
) -> Result<C64> {
    shots.validate()?;
    a.ensure_hermitian("operator A")?;
    b.ensure_hermitian("operator B")?;
    let n_total = initial.n_qubits();
    for block in preparation.iter().chain([&branch_one, &branch_two]) {
        if block.ansatz.n_qubits() != n_total {
            return Err(Error::Dimension { expected: n_total, found: block.ansatz.n_qubits() });
        }
    }
    if a.n_qubits() > n_total || b.n_qubits() > n_total {
        return Err(Error::Dimension { expected: n_total, found: a.n_qubits().max(b.n_qubits()) });
    }
    let base = match preparation {
        Some(p) => p.ansatz.prepare_state(p.theta, initial)?,
        None => initial.clone(),
    };
    let u1 = branch_one.ops(Control::OnOne)?;
    let u2 = branch_two.ops(Control::OnZero)?;
    let mut total = C64::new(0.0, 0.0);
    for (ia, ta) in a.terms().iter().enumerate() {
        for (ib, tb) in b.terms().iter().enumerate() {
            let mut seq = Vec::with_capacity(u1.len() + u2.len() + 2);
            seq.push(CircuitOp::Pauli { string: tb.string.embed(n_total, 0), control: Control::OnOne });
            seq.extend(u1.iter().cloned());
            seq.extend(u2.iter().cloned());
            seq.push(CircuitOp::Pauli { string: ta.string.embed(n_total, 0), control: Control::OnOne });
            let overlap = interfere(&base, seq, shots, mix_id(3, &[ia as u64, ib as u64]))?;
            total += ta.coefficient * tb.coefficient * overlap;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_layered_ansatz;
    use crate::pauli::PauliTerm;
    use crate::vqa::{compute_m, compute_v};
    use rand::Rng;

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = StateVector::from_amplitudes(
            (0..1 << n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        )
        .unwrap();
        psi.normalize();
        psi
    }

    fn random_theta(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
    }

    #[test]
    fn exact_m_matches_direct() {
        let a = build_layered_ansatz(2, 1).unwrap();
        let theta = random_theta(a.n_params(), 1);
        let psi0 = random_state(2, 2);
        let direct = compute_m(&a, &theta, &psi0).unwrap();
        let circuit = estimate_m_matrix(&a, &theta, &psi0, ShotConfig::exact()).unwrap();
        assert!((direct - circuit).camax() < 1e-12);
    }

    #[test]
    fn diagonal_m_element_rejected() {
        let a = build_layered_ansatz(1, 1).unwrap();
        let err = estimate_m_element(&a, &[0.1, 0.2], &StateVector::zero(1), 1, 1, ShotConfig::exact());
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn real_element_has_vanishing_imaginary_estimate() {
        // Real generators on a real state: X then Z at θ = 0 on |0⟩.
        // M_01 = ⟨iX 0|iZ 0⟩ = ⟨1|0⟩ = 0 is trivially real; use X, X instead: ⟨1|1⟩ = 1.
        let a = AnsatzCircuit::new(
            1,
            vec![PauliTerm::parse_letters(1.0, "X").unwrap(), PauliTerm::parse_letters(1.0, "X").unwrap()],
        )
        .unwrap();
        let shots = ShotConfig::sampled(10_000, 3);
        let z = estimate_m_element(&a, &[0.0, 0.0], &StateVector::zero(1), 0, 1, shots).unwrap();
        let sigma = 1.0 / (10_000f64).sqrt();
        assert!(z.im.abs() <= 3.0 * sigma, "{z}");
        assert!((z.re - 1.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn seeded_shots_reproduce() {
        let a = build_layered_ansatz(2, 1).unwrap();
        let theta = random_theta(a.n_params(), 4);
        let psi0 = random_state(2, 5);
        let s = ShotConfig::sampled(10_000, 42);
        let z1 = estimate_m_element(&a, &theta, &psi0, 1, 4, s).unwrap();
        let z2 = estimate_m_element(&a, &theta, &psi0, 1, 4, s).unwrap();
        assert_eq!(z1.re.to_bits(), z2.re.to_bits());
        assert_eq!(z1.im.to_bits(), z2.im.to_bits());
        let z3 = estimate_m_element(&a, &theta, &psi0, 1, 4, ShotConfig::sampled(10_000, 43)).unwrap();
        assert_ne!(z1, z3);
    }

    #[test]
    fn exact_v_matches_direct() {
        let a = build_layered_ansatz(2, 1).unwrap();
        let theta = random_theta(a.n_params(), 6);
        let psi0 = random_state(2, 7);
        let h = PauliSum::from_terms(
            2,
            vec![
                PauliTerm::parse_letters(-1.0, "ZZ").unwrap(),
                PauliTerm::parse_letters(0.7, "XI").unwrap(),
                PauliTerm::parse_letters(0.2, "II").unwrap(),
            ],
        )
        .unwrap();
        let direct = compute_v(&a, &theta, &psi0, &h).unwrap();
        let circuit = estimate_v_vector(&a, &theta, &psi0, &h, ShotConfig::exact()).unwrap();
        assert!((direct - circuit).camax() < 1e-12);
    }

    #[test]
    fn identity_transition_amplitude_is_one() {
        let a = build_layered_ansatz(2, 1).unwrap();
        let theta = random_theta(a.n_params(), 8);
        let block = CircuitBlock { ansatz: &a, theta: &theta };
        let id = PauliSum::identity(1);
        let c = estimate_transition_amplitude(Some(block), block, block, &random_state(2, 9), &id, &id, ShotConfig::exact())
            .unwrap();
        assert!((c - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_shots_rejected() {
        let a = build_layered_ansatz(1, 1).unwrap();
        let err = estimate_m_element(&a, &[0.0, 0.0], &StateVector::zero(1), 0, 1, ShotConfig::sampled(0, 1));
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
