//! Exact dense-matrix reference: Kronecker assembly of Pauli sums, Gibbs
//! states and their purifications, Liouville–von Neumann propagation and
//! equilibrium time-correlation functions.
//!
//! Everything here goes through Hermitian eigendecompositions. Nothing in this
//! module depends on the ansatz or the variational flows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum};
use crate::statevector::StateVector;

pub const DEFAULT_QUBIT_CAP: usize = 12;

pub type DenseMatrix = DMatrix<C64>;

#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub matrix: DenseMatrix,
    pub n_qubits: usize,
}

impl DenseOperator {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Contract(format!(
                "dense operator must be square with power-of-two size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_defect(&self.matrix) <= tol
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.n_qubits, found: state.n_qubits() });
        }
        let v = &self.matrix * DVector::from_column_slice(state.amplitudes());
        StateVector::from_amplitudes(v.as_slice().to_vec())
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix)
    }
}

pub fn hermiticity_defect(m: &DenseMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn pauli_matrix(p: Pauli) -> DenseMatrix {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Explicit Kronecker product `P_{n-1} ⊗ … ⊗ P_0` (qubit 0 is the fastest index).
pub fn pauli_letters_dense(letters: &[Pauli]) -> DenseMatrix {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &p in letters.iter().rev() {
        m = m.kronecker(&pauli_matrix(p));
    }
    m
}

pub fn to_dense_with_cap(p: &PauliSum, cap: usize) -> Result<DenseOperator> {
    let n = p.n_qubits();
    if n > cap {
        return Err(Error::CapExceeded { n_qubits: n, cap });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for term in p.terms() {
        m += pauli_letters_dense(&term.string.letters()) * term.coefficient;
    }
    Ok(DenseOperator { matrix: m, n_qubits: n })
}

pub fn to_dense(p: &PauliSum) -> Result<DenseOperator> {
    to_dense_with_cap(p, DEFAULT_QUBIT_CAP)
}

/// Eigendecomposition `A = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn new(m: &DenseMatrix) -> Self {
        // Symmetrize first so round-off in the input cannot leak into the spectrum.
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        Self { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> DenseMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> DenseMatrix {
        self.map(|lam| C64::from_polar(1.0, -lam * t))
    }
}

pub fn identity_state_amplitudes(n_physical: usize) -> Vec<C64> {
    let d = 1usize << n_physical;
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let w = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for b in 0..d {
        amps[b + (b << n_physical)] = w;
    }
    amps
}

/// `(M ⊗ I)|I⟩` in the block layout: amplitude of `|a⟩|b̃⟩` is `M_{ab}/√d`.
pub fn purify(m: &DenseMatrix) -> Result<StateVector> {
    let d = m.nrows();
    let n = d.trailing_zeros() as usize;
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let w = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            amps[a + (b << n)] = m[(a, b)] * w;
        }
    }
    StateVector::from_amplitudes(amps)
}

#[derive(Clone, Debug)]
pub struct GibbsState {
    pub rho: DenseMatrix,
    /// Thermofield double on `2n` qubits, block layout.
    pub purification: StateVector,
    pub eigen: HermitianEigen,
}

/// `ρ = e^{-βH}/Z` and `|O(β)⟩ ∝ (e^{-βH/2} ⊗ I)|I⟩`.
pub fn gibbs_state(h: &PauliSum, beta: f64) -> Result<GibbsState> {
    h.ensure_hermitian("Hamiltonian")?;
    let dense = to_dense(h)?;
    gibbs_state_dense(&dense, beta)
}

pub fn gibbs_state_dense(h: &DenseOperator, beta: f64) -> Result<GibbsState> {
    if !(beta >= 0.0) {
        return Err(Error::Contract(format!("inverse temperature must be >= 0, got {beta}")));
    }
    let eigen = h.eigen();
    let e0 = eigen.min_value();
    let weights: Vec<f64> = eigen.values.iter().map(|&l| (-beta * (l - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let rho = eigen.map(|l| C64::new((-beta * (l - e0)).exp() / z, 0.0));
    let half = eigen.map(|l| C64::new((-0.5 * beta * (l - e0)).exp(), 0.0));
    let mut purification = purify(&half)?;
    purification.normalize();
    Ok(GibbsState { rho, purification, eigen })
}

/// Hamiltonian schedule for Liouville–von Neumann propagation.
pub enum HamiltonianSchedule<'a> {
    /// Time-independent; propagated by exact conjugation.
    Constant(DenseMatrix),
    /// `H(t)`, integrated with RK4 using `substeps` steps per grid interval.
    TimeDependent { h: Box<dyn Fn(f64) -> DenseMatrix + 'a>, substeps: usize },
}

/// Drift in `Tr ρ` or `Tr ρ²` that triggers a refinement request in the RK4 path.
///
/// RK4 on a commutator keeps the trace exactly, so the purity is tracked as well;
/// an unstable step shows up there first.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

fn commutator_rhs(h: &DenseMatrix, rho: &DenseMatrix) -> DenseMatrix {
    // dρ/dt = -i [H, ρ]
    (h * rho - rho * h) * C64::new(0.0, -1.0)
}

/// `i dρ/dt = [H(t), ρ]` sampled on `t_grid` (the first point is the initial time).
pub fn evolve_lvn(
    schedule: &HamiltonianSchedule<'_>,
    rho0: &DenseMatrix,
    t_grid: &[f64],
) -> Result<Vec<DenseMatrix>> {
    if hermiticity_defect(rho0) > 1e-10 {
        return Err(Error::Contract("initial density matrix is not Hermitian".into()));
    }
    let tr0 = rho0.trace();
    if (tr0 - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::Contract(format!("initial density matrix has trace {tr0}")));
    }
    let Some(&t0) = t_grid.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(t_grid.len());
    match schedule {
        HamiltonianSchedule::Constant(h) => {
            let eig = HermitianEigen::new(h);
            for &t in t_grid {
                let u = eig.propagator(t - t0);
                out.push(&u * rho0 * u.adjoint());
            }
        }
        HamiltonianSchedule::TimeDependent { h, substeps } => {
            let substeps = (*substeps).max(1);
            let mut rho = rho0.clone();
            let purity0 = (rho0 * rho0).trace();
            let mut t = t0;
            out.push(rho.clone());
            for &t_next in &t_grid[1..] {
                let dt = (t_next - t) / substeps as f64;
                for _ in 0..substeps {
                    let k1 = commutator_rhs(&h(t), &rho);
                    let h_mid = h(t + 0.5 * dt);
                    let k2 = commutator_rhs(&h_mid, &(&rho + &k1 * C64::new(0.5 * dt, 0.0)));
                    let k3 = commutator_rhs(&h_mid, &(&rho + &k2 * C64::new(0.5 * dt, 0.0)));
                    let k4 = commutator_rhs(&h(t + dt), &(&rho + &k3 * C64::new(dt, 0.0)));
                    rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
                        * C64::new(dt / 6.0, 0.0);
                    t += dt;
                }
                let drift = (rho.trace() - tr0).norm().max(((&rho * &rho).trace() - purity0).norm());
                if drift > TRACE_DRIFT_TOL {
                    return Err(Error::RefinementRequired { drift });
                }
                out.push(rho.clone());
            }
        }
    }
    Ok(out)
}

/// Exact `e^{-iHt}|ψ⟩` on each grid point.
pub fn propagate_state(h: &DenseOperator, psi0: &StateVector, t_grid: &[f64]) -> Result<Vec<StateVector>> {
    let eig = h.eigen();
    // Work in the eigenbasis: c = V†ψ, ψ(t) = V e^{-iλt} c.
    let c = eig.vectors.adjoint() * DVector::from_column_slice(psi0.amplitudes());
    t_grid
        .iter()
        .map(|&t| {
            let phased = DVector::from_iterator(
                c.len(),
                c.iter().zip(eig.values.iter()).map(|(ci, &l)| ci * C64::from_polar(1.0, -l * t)),
            );
            StateVector::from_amplitudes((&eig.vectors * phased).as_slice().to_vec())
        })
        .collect()
}

/// `C(t) = Tr{ρ_eq e^{iHt} A e^{-iHt} B}`.
pub fn exact_correlation(
    h: &PauliSum,
    a: &PauliSum,
    b: &PauliSum,
    beta: f64,
    t_grid: &[f64],
) -> Result<Vec<C64>> {
    a.ensure_hermitian("operator A")?;
    b.ensure_hermitian("operator B")?;
    let gibbs = gibbs_state(h, beta)?;
    let a_d = to_dense(a)?.matrix;
    let b_d = to_dense(b)?.matrix;
    Ok(correlation_dense(&gibbs.eigen, &gibbs.rho, &a_d, &b_d, t_grid))
}

/// Eigenbasis evaluation: with `A' = V†AV`, `B' = V†BV`, `ρ'` diagonal,
/// `C(t) = Σ_{mn} p_m A'_{mn} B'_{nm} e^{i(λ_m-λ_n)t}`.
pub fn correlation_dense(
    eig: &HermitianEigen,
    rho: &DenseMatrix,
    a: &DenseMatrix,
    b: &DenseMatrix,
    t_grid: &[f64],
) -> Vec<C64> {
    let v = &eig.vectors;
    let a_e = v.adjoint() * a * v;
    let b_e = v.adjoint() * b * v;
    let rho_e = v.adjoint() * rho * v;
    let dim = v.nrows();
    t_grid
        .iter()
        .map(|&t| {
            let mut total = C64::new(0.0, 0.0);
            for m in 0..dim {
                let pm = rho_e[(m, m)].re;
                if pm == 0.0 {
                    continue;
                }
                for n in 0..dim {
                    let phase = C64::from_polar(1.0, (eig.values[m] - eig.values[n]) * t);
                    total += pm * a_e[(m, n)] * b_e[(n, m)] * phase;
                }
            }
            total
        })
        .collect()
}

pub fn expectation_dense(rho: &DenseMatrix, op: &DenseMatrix) -> C64 {
    (rho * op).trace()
}
