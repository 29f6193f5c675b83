//! Product-of-exponentials ansatz `U(θ) = Π_k e^{iθ_k R_k}` with `R_1` applied first.
//!
//! Parameter indices are zero-based throughout the crate.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum, PauliTerm};
use crate::statevector::{rotate_rows, rotate_slice, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    generators: Vec<PauliTerm>,
}

/// Rotation angles, one per generator, in radians.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }
}

impl Deref for ParameterVector {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for ParameterVector {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Target size, in `f64` entries per part, of a column tile in
/// [`AnsatzCircuit::tangent_block`].
const TILE_ENTRIES: usize = 8192;

/// Derivative states `∂_k|ψ⟩` as columns, split into real and imaginary
/// parts: entry `(b, k)` sits at `b * width + k`.
pub(crate) struct TangentBlock {
    pub dim: usize,
    pub width: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TangentBlock {
    pub fn column(&self, k: usize) -> Result<StateVector> {
        let at = |b: usize| b * self.width + k;
        StateVector::from_amplitudes((0..self.dim).map(|b| C64::new(self.re[at(b)], self.im[at(b)])).collect())
    }
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, generators: Vec<PauliTerm>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Config("ansatz needs at least one generator".into()));
        }
        for g in &generators {
            if g.n_qubits() != n_qubits {
                return Err(Error::Dimension { expected: n_qubits, found: g.n_qubits() });
            }
            if g.coefficient != C64::new(1.0, 0.0) {
                return Err(Error::Contract("ansatz generators must have unit coefficient".into()));
            }
        }
        Ok(Self { n_qubits, generators })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliTerm] {
        &self.generators
    }

    fn check(&self, theta: &[f64], initial: &StateVector) -> Result<()> {
        if theta.len() != self.generators.len() {
            return Err(Error::Dimension { expected: self.generators.len(), found: theta.len() });
        }
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: initial.n_qubits() });
        }
        Ok(())
    }

    /// `U(θ)|ψ_0⟩`, applying generators in ascending order.
    pub fn prepare_state(&self, theta: &[f64], initial: &StateVector) -> Result<StateVector> {
        self.check(theta, initial)?;
        let mut psi = initial.clone();
        for (g, &angle) in self.generators.iter().zip(theta) {
            rotate_slice(psi.amplitudes_mut(), &g.string, angle);
        }
        Ok(psi)
    }

    /// `∂|ψ(θ)⟩/∂θ_k = U_N…U_{k+1} (iR_k) U_k…U_1 |ψ_0⟩`.
    pub fn derivative_state(
        &self,
        theta: &[f64],
        k: usize,
        initial: &StateVector,
    ) -> Result<StateVector> {
        self.check(theta, initial)?;
        if k >= self.generators.len() {
            return Err(Error::IndexOutOfRange { index: k, len: self.generators.len() });
        }
        let mut psi = initial.clone();
        for (j, (g, &angle)) in self.generators.iter().zip(theta).enumerate() {
            rotate_slice(psi.amplitudes_mut(), &g.string, angle);
            if j == k {
                psi.apply_pauli_string_in_place(&g.string)?;
                psi.scale(C64::new(0.0, 1.0));
            }
        }
        Ok(psi)
    }

    /// The prepared state together with every derivative state.
    pub fn tangent_states(
        &self,
        theta: &[f64],
        initial: &StateVector,
    ) -> Result<(StateVector, Vec<StateVector>)> {
        let (psi, block) = self.tangent_block(theta, initial)?;
        let derivs = (0..block.width).map(|k| block.column(k)).collect::<Result<_>>()?;
        Ok((psi, derivs))
    }

    /// As [`tangent_states`](Self::tangent_states), with the derivatives
    /// stored as the columns of one row-major block.
    ///
    /// Each derivative is created when its generator is reached and then carried
    /// through the remaining rotations, so the cost is `N²/2` rotations rather
    /// than `N²`. Columns are carried in tiles small enough to stay in cache.
    pub(crate) fn tangent_block(&self, theta: &[f64], initial: &StateVector) -> Result<(StateVector, TangentBlock)> {
        self.check(theta, initial)?;
        let width = self.generators.len();
        let dim = initial.dim();
        let tile = (TILE_ENTRIES / dim).clamp(8, width.max(8));
        let mut psi = initial.clone();
        let mut re = vec![0.0; dim * width];
        let mut im = vec![0.0; dim * width];
        for (j, (g, &angle)) in self.generators.iter().zip(theta).enumerate() {
            rotate_slice(psi.amplitudes_mut(), &g.string, angle);
            let mut d = psi.clone();
            d.apply_pauli_string_in_place(&g.string)?;
            // i·P|ψ⟩
            for (b, a) in d.amplitudes().iter().enumerate() {
                re[b * width + j] = -a.im;
                im[b * width + j] = a.re;
            }
        }
        let mut tile_re = vec![0.0; dim * tile];
        let mut tile_im = vec![0.0; dim * tile];
        for start in (0..width).step_by(tile) {
            let cols = tile.min(width - start);
            for b in 0..dim {
                tile_re[b * tile..b * tile + cols].copy_from_slice(&re[b * width + start..b * width + start + cols]);
                tile_im[b * tile..b * tile + cols].copy_from_slice(&im[b * width + start..b * width + start + cols]);
            }
            for (j, (g, &angle)) in self.generators.iter().zip(theta).enumerate().skip(start + 1) {
                let live = (j - start).min(cols);
                rotate_rows(&mut tile_re, &mut tile_im, tile, live, &g.string, angle);
            }
            for b in 0..dim {
                re[b * width + start..b * width + start + cols].copy_from_slice(&tile_re[b * tile..b * tile + cols]);
                im[b * width + start..b * width + start + cols].copy_from_slice(&tile_im[b * tile..b * tile + cols]);
            }
        }
        Ok((psi, TangentBlock { dim, width, re, im }))
    }

    /// One generator per line in the Pauli-sum text format, coefficient 1.
    pub fn to_text(&self) -> String {
        PauliSum::from_terms(self.n_qubits, self.generators.clone())
            .expect("generators share the register")
            .to_text()
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let sum = PauliSum::parse_text(text)?;
        Self::new(sum.n_qubits(), sum.terms().to_vec())
    }
}

/// Generators per layer: `X` then `Z` on each qubit, then `XX`, `YY`, `ZZ` on
/// every pair `i < j` in lexicographic order.
pub fn layer_size(n_qubits: usize) -> usize {
    2 * n_qubits + 3 * n_qubits * (n_qubits - 1) / 2
}

pub fn build_layered_ansatz(n_qubits: usize, depth: usize) -> Result<AnsatzCircuit> {
    if n_qubits < 1 {
        return Err(Error::Config("ansatz needs at least one qubit".into()));
    }
    if depth < 1 {
        return Err(Error::Config("ansatz depth must be at least 1".into()));
    }
    let mut generators = Vec::with_capacity(depth * layer_size(n_qubits));
    for _ in 0..depth {
        for p in [Pauli::X, Pauli::Z] {
            for q in 0..n_qubits {
                generators.push(PauliTerm::unit(PauliString::single(n_qubits, q, p)));
            }
        }
        for i in 0..n_qubits {
            for j in (i + 1)..n_qubits {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    generators.push(PauliTerm::unit(PauliString::pair(n_qubits, i, j, p, p)));
                }
            }
        }
    }
    AnsatzCircuit::new(n_qubits, generators)
}

pub fn prepare_state(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    initial: &StateVector,
) -> Result<StateVector> {
    ansatz.prepare_state(theta, initial)
}

pub fn derivative_state(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    k: usize,
    initial: &StateVector,
) -> Result<StateVector> {
    ansatz.derivative_state(theta, k, initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn names(a: &AnsatzCircuit) -> Vec<String> {
        a.generators().iter().map(|g| g.string.to_string()).collect()
    }

    #[test]
    fn two_qubit_single_layer_order() {
        let a = build_layered_ansatz(2, 1).unwrap();
        assert_eq!(names(&a), ["XI", "IX", "ZI", "IZ", "XX", "YY", "ZZ"]);
    }

    #[test]
    fn one_qubit_has_no_pairs() {
        let a = build_layered_ansatz(1, 1).unwrap();
        assert_eq!(names(&a), ["X", "Z"]);
    }

    #[test]
    fn generator_count_formula() {
        assert_eq!(build_layered_ansatz(4, 3).unwrap().n_params(), 78);
        for n in 1..=6 {
            for depth in 1..=4 {
                let a = build_layered_ansatz(n, depth).unwrap();
                assert_eq!(a.n_params(), depth * (2 * n + 3 * n * (n - 1) / 2));
            }
        }
    }

    #[test]
    fn zero_depth_is_config_error() {
        assert!(matches!(build_layered_ansatz(2, 0), Err(Error::Config(_))));
    }

    #[test]
    fn zero_angles_leave_state_unchanged() {
        let a = build_layered_ansatz(3, 2).unwrap();
        let psi0 = StateVector::basis(3, 5);
        let out = a.prepare_state(&vec![0.0; a.n_params()], &psi0).unwrap();
        assert_eq!(out, psi0);
    }

    #[test]
    fn half_turn_x_gives_i_one() {
        let a = AnsatzCircuit::new(1, vec![PauliTerm::parse_letters(1.0, "X").unwrap()]).unwrap();
        let out = a.prepare_state(&[FRAC_PI_2], &StateVector::zero(1)).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((out.amplitudes()[1] - C64::new(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_of_single_x_at_zero() {
        let a = AnsatzCircuit::new(1, vec![PauliTerm::parse_letters(1.0, "X").unwrap()]).unwrap();
        let d = a.derivative_state(&[0.0], 0, &StateVector::zero(1)).unwrap();
        assert_eq!(d.amplitudes()[1], C64::new(0.0, 1.0));
        assert!(matches!(
            a.derivative_state(&[0.0], 1, &StateVector::zero(1)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn derivative_states_have_unit_norm_and_match_tangent_batch() {
        let a = build_layered_ansatz(3, 2).unwrap();
        let theta: Vec<f64> = (0..a.n_params()).map(|k| 0.1 * k as f64 - 0.7).collect();
        let psi0 = StateVector::basis(3, 3);
        let (psi, batch) = a.tangent_states(&theta, &psi0).unwrap();
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        for (k, d) in batch.iter().enumerate() {
            let single = a.derivative_state(&theta, k, &psi0).unwrap();
            assert_abs_diff_eq!(single.norm(), 1.0, epsilon = 1e-12);
            for (x, y) in single.amplitudes().iter().zip(d.amplitudes()) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let a = build_layered_ansatz(2, 2).unwrap();
        assert_eq!(AnsatzCircuit::parse_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let a = build_layered_ansatz(2, 1).unwrap();
        assert!(a.prepare_state(&[0.0; 3], &StateVector::zero(2)).is_err());
        assert!(a.prepare_state(&[0.0; 7], &StateVector::zero(3)).is_err());
    }
}
