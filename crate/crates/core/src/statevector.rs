//! Dense statevector simulation with Pauli-string algebra.
//!
//! Amplitude index `b` encodes qubit `i` in bit `i`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, PauliTerm, MAX_QUBITS};

/// Imaginary residue tolerated in the expectation of a Hermitian observable.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits >= 1 && n_qubits <= MAX_QUBITS.min(30), "unsupported register size");
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index outside register");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    /// Wrap raw amplitudes; the length must be a power of two. No normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Contract(format!("amplitude length {len} is not 2^n with n >= 1")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm, returning the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: C64, other: &StateVector) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += factor * b;
        }
        Ok(())
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: other.n_qubits });
        }
        Ok(())
    }

    fn check_register(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: n });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same(other)?;
        Ok(inner_slices(&self.amplitudes, &other.amplitudes))
    }

    /// In-place `P|ψ⟩` for a bare Pauli string.
    pub fn apply_pauli_string_in_place(&mut self, p: &PauliString) -> Result<()> {
        self.check_register(p.n_qubits())?;
        apply_pauli_slice(&mut self.amplitudes, p);
        Ok(())
    }

    /// `c P|ψ⟩` for a weighted term.
    pub fn apply_pauli_term(&self, term: &PauliTerm) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_pauli_string_in_place(&term.string)?;
        if term.coefficient != C64::new(1.0, 0.0) {
            out.scale(term.coefficient);
        }
        Ok(out)
    }

    /// In-place `e^{iθR}|ψ⟩` for a unit-coefficient generator `R`.
    pub fn apply_rotation_in_place(&mut self, generator: &PauliTerm, angle: f64) -> Result<()> {
        if generator.coefficient != C64::new(1.0, 0.0) {
            return Err(Error::Contract(format!(
                "rotation generator must have unit coefficient, found {}",
                generator.coefficient
            )));
        }
        self.check_register(generator.n_qubits())?;
        rotate_slice(&mut self.amplitudes, &generator.string, angle);
        Ok(())
    }

    pub fn apply_rotation(&self, generator: &PauliTerm, angle: f64) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_rotation_in_place(generator, angle)?;
        Ok(out)
    }

    /// `O|ψ⟩` for a general (not necessarily unitary) Pauli sum.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<StateVector> {
        self.check_register(op.n_qubits())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for term in op.terms() {
            accumulate_pauli(&self.amplitudes, &mut out, &term.string, term.coefficient);
        }
        Ok(StateVector { n_qubits: self.n_qubits, amplitudes: out })
    }

    /// `Σ_j c_j ⟨ψ|h_j|ψ⟩` for a Hermitian observable.
    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        obs.ensure_hermitian("observable")?;
        let value = self.expectation_complex(obs)?;
        if value.im.abs() > EXPECTATION_IMAG_TOL * (1.0 + value.re.abs()) {
            return Err(Error::Contract(format!(
                "expectation has imaginary residue {:.3e}",
                value.im
            )));
        }
        Ok(value.re)
    }

    /// `⟨ψ|O|ψ⟩` without the Hermiticity contract.
    pub fn expectation_complex(&self, obs: &PauliSum) -> Result<C64> {
        self.check_register(obs.n_qubits())?;
        let mut total = C64::new(0.0, 0.0);
        for term in obs.terms() {
            total += term.coefficient * pauli_expectation(&self.amplitudes, &term.string);
        }
        Ok(total)
    }

    /// `⟨self|O|other⟩`.
    pub fn matrix_element(&self, op: &PauliSum, other: &StateVector) -> Result<C64> {
        self.check_same(other)?;
        let applied = other.apply_pauli_sum(op)?;
        self.inner(&applied)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Tensor product with `self` on the low qubits and `high` above them.
    pub fn tensor(&self, high: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * high.dim());
        for h in &high.amplitudes {
            for l in &self.amplitudes {
                amps.push(h * l);
            }
        }
        StateVector { n_qubits: self.n_qubits + high.n_qubits, amplitudes: amps }
    }
}

/// Pure-function wrapper: `c P|ψ⟩`.
pub fn apply_pauli_string(state: &StateVector, p: &PauliTerm) -> Result<StateVector> {
    state.apply_pauli_term(p)
}

/// Pure-function wrapper: `e^{iθR}|ψ⟩`.
pub fn apply_rotation(state: &StateVector, generator: &PauliTerm, angle: f64) -> Result<StateVector> {
    state.apply_rotation(generator, angle)
}

pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.inner(b)
}

pub fn expectation(state: &StateVector, obs: &PauliSum) -> Result<f64> {
    state.expectation(obs)
}

#[inline]
pub(crate) fn inner_slices(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

pub(crate) fn apply_pauli_slice(amps: &mut [C64], p: &PauliString) {
    let x = p.x_mask() as usize;
    let base = p.base_phase();
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= p.phase_of(base, b);
        }
        return;
    }
    let pivot = 1usize << (63 - (x as u64).leading_zeros());
    for b in 0..amps.len() {
        if b & pivot != 0 {
            continue;
        }
        let c = b ^ x;
        let a_b = amps[b];
        let a_c = amps[c];
        amps[c] = p.phase_of(base, b) * a_b;
        amps[b] = p.phase_of(base, c) * a_c;
    }
}

/// `out += coeff * P in`.
pub(crate) fn accumulate_pauli(input: &[C64], out: &mut [C64], p: &PauliString, coeff: C64) {
    let x = p.x_mask() as usize;
    let base = p.base_phase() * coeff;
    for (b, a) in input.iter().enumerate() {
        out[b ^ x] += p.phase_of(base, b) * a;
    }
}

/// `⟨ψ|P|ψ⟩`.
pub(crate) fn pauli_expectation(amps: &[C64], p: &PauliString) -> C64 {
    let x = p.x_mask() as usize;
    let base = p.base_phase();
    let mut total = C64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        total += amps[b ^ x].conj() * p.phase_of(base, b) * a;
    }
    total
}

/// `e^{iθP} = cos θ + i sin θ P` over amplitude pairs `(b, b ^ x)`.
pub(crate) fn rotate_slice(amps: &mut [C64], p: &PauliString, angle: f64) {
    if angle == 0.0 {
        return;
    }
    let (s, c) = angle.sin_cos();
    let is = C64::new(0.0, s);
    let x = p.x_mask() as usize;
    let base = p.base_phase();
    if x == 0 {
        // Diagonal: phase e^{±iθ} (times i^{nY}, which is ±1 here since nY = 0).
        let plus = C64::new(c, 0.0) + is * base;
        let minus = C64::new(c, 0.0) - is * base;
        let z = p.z_mask() as usize;
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if (b & z).count_ones() % 2 == 1 { minus } else { plus };
        }
        return;
    }
    let pivot = 1usize << (63 - (x as u64).leading_zeros());
    for b in 0..amps.len() {
        if b & pivot != 0 {
            continue;
        }
        let d = b ^ x;
        let a_b = amps[b];
        let a_d = amps[d];
        amps[b] = c * a_b + is * p.phase_of(base, d) * a_d;
        amps[d] = c * a_d + is * p.phase_of(base, b) * a_b;
    }
}

/// Applies `e^{iθP}` to the first `cols` columns of a row-major block held
/// as separate real and imaginary parts. Rows are indexed by basis state and
/// are `width` entries wide.
pub(crate) fn rotate_rows(re: &mut [f64], im: &mut [f64], width: usize, cols: usize, p: &PauliString, angle: f64) {
    if angle == 0.0 || cols == 0 {
        return;
    }
    let (s, c) = angle.sin_cos();
    let is = C64::new(0.0, s);
    let x = p.x_mask() as usize;
    let base = p.base_phase();
    let dim = re.len() / width;
    if x == 0 {
        let plus = C64::new(c, 0.0) + is * base;
        let minus = C64::new(c, 0.0) - is * base;
        let z = p.z_mask() as usize;
        for b in 0..dim {
            let f = if (b & z).count_ones() % 2 == 1 { minus } else { plus };
            let row = b * width..b * width + cols;
            for (r, i) in re[row.clone()].iter_mut().zip(&mut im[row]) {
                let (ur, ui) = (*r, *i);
                *r = f.re * ur - f.im * ui;
                *i = f.re * ui + f.im * ur;
            }
        }
        return;
    }
    let pivot = 1usize << (63 - (x as u64).leading_zeros());
    for b in 0..dim {
        if b & pivot != 0 {
            continue;
        }
        let d = b ^ x;
        let fb = is * p.phase_of(base, d);
        let fd = is * p.phase_of(base, b);
        // d > b because d carries the pivot bit.
        let (re_lo, re_hi) = re.split_at_mut(d * width);
        let (im_lo, im_hi) = im.split_at_mut(d * width);
        let rows = (
            &mut re_lo[b * width..b * width + cols],
            &mut im_lo[b * width..b * width + cols],
            &mut re_hi[..cols],
            &mut im_hi[..cols],
        );
        for (((br, bi), dr), di) in rows.0.iter_mut().zip(rows.1.iter_mut()).zip(rows.2.iter_mut()).zip(rows.3.iter_mut()) {
            let (ur, ui, vr, vi) = (*br, *bi, *dr, *di);
            *br = c * ur + fb.re * vr - fb.im * vi;
            *bi = c * ui + fb.re * vi + fb.im * vr;
            *dr = c * vr + fd.re * ur - fd.im * ui;
            *di = c * vi + fd.re * ui + fd.im * ur;
        }
    }
}
