//! Weighted Pauli strings and sums.
//!
//! Qubit `i` is bit `i` of an amplitude index (qubit 0 is the least
//! significant bit). In the text form, the `i`-th letter acts on qubit `i`,
//! so `XI` flips qubit 0 and `IX` flips qubit 1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, stored as bit masks.
///
/// `P|b⟩ = i^{n_Y} (-1)^{|b & z|} |b ^ x⟩`, where `x` marks X/Y positions and
/// `z` marks Z/Y positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "register too large");
        Self { n_qubits, x_mask: 0, z_mask: 0 }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut s = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Single-qubit Pauli `p` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.set(qubit, p);
        s
    }

    /// `p` on both `a` and `b`.
    pub fn pair(n_qubits: usize, a: usize, b: usize, pa: Pauli, pb: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.set(a, pa);
        s.set(b, pb);
        s
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n_qubits, "qubit {qubit} outside register of {}", self.n_qubits);
        let bit = 1u64 << qubit;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x_mask |= bit,
            Pauli::Z => self.z_mask |= bit,
            Pauli::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
        }
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.get(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// `i^{n_Y}`, the constant part of the phase picked up by every basis state.
    pub fn base_phase(&self) -> C64 {
        match self.y_count() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Phase of `⟨b ^ x| P |b⟩`.
    #[inline]
    pub fn phase_of(&self, base: C64, index: usize) -> C64 {
        if (index as u64 & self.z_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }

    /// Place this string on a larger register, shifting qubit `q` to `q + offset`.
    pub fn embed(&self, n_total: usize, offset: usize) -> Self {
        assert!(offset + self.n_qubits <= n_total, "embedding does not fit");
        Self {
            n_qubits: n_total,
            x_mask: self.x_mask << offset,
            z_mask: self.z_mask << offset,
        }
    }

    /// `(phase, product)` with `self * other = phase * product`.
    pub fn multiply(&self, other: &PauliString) -> (C64, PauliString) {
        assert_eq!(self.n_qubits, other.n_qubits);
        // Write each string as i^{y} X^x Z^z; then Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1.
        let sign = (self.z_mask & other.x_mask).count_ones() % 2;
        let product = PauliString {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
        };
        let y_in = self.y_count() + other.y_count();
        let y_out = product.y_count();
        // i^{y_in} (-1)^sign = phase * i^{y_out}
        let exponent = (y_in as i64 + 2 * sign as i64 - y_out as i64).rem_euclid(4);
        let phase = match exponent {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        (phase, product)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("invalid Pauli letter {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse { line: 0, message: "empty Pauli string".into() });
        }
        if letters.len() > MAX_QUBITS {
            return Err(Error::Parse { line: 0, message: "Pauli string too long".into() });
        }
        Ok(PauliString::from_letters(&letters))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coefficient: C64,
}

impl PauliTerm {
    pub fn new(coefficient: impl Into<C64>, string: PauliString) -> Self {
        Self { string, coefficient: coefficient.into() }
    }

    /// Unit-coefficient term, the form used for rotation generators.
    pub fn unit(string: PauliString) -> Self {
        Self::new(1.0, string)
    }

    pub fn parse_letters(coefficient: impl Into<C64>, letters: &str) -> Result<Self> {
        Ok(Self::new(coefficient, letters.parse()?))
    }

    pub fn n_qubits(&self) -> usize {
        self.string.n_qubits()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} {}", self.coefficient.re, self.coefficient.im, self.string)
    }
}

/// A linear combination of Pauli strings over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut sum = Self::new(n_qubits);
        for t in terms {
            sum.push(t)?;
        }
        Ok(sum)
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::new(n_qubits);
        s.terms.push(PauliTerm::unit(PauliString::identity(n_qubits)));
        s
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: term.n_qubits() });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add_term(&mut self, coefficient: impl Into<C64>, string: PauliString) -> Result<()> {
        self.push(PauliTerm::new(coefficient, string))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff every coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.im == 0.0)
    }

    pub fn ensure_hermitian(&self, what: &str) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what} must be Hermitian (real Pauli coefficients)")))
        }
    }

    /// Merge duplicate strings and drop zero coefficients.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if let Some(existing) = out.iter_mut().find(|o| o.string == t.string) {
                existing.coefficient += t.coefficient;
            } else {
                out.push(t.clone());
            }
        }
        out.retain(|t| t.coefficient != C64::new(0.0, 0.0));
        Self { n_qubits: self.n_qubits, terms: out }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm::new(t.coefficient * factor, t.string.clone()))
                .collect(),
        }
    }

    pub fn extend(&mut self, other: &PauliSum) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: other.n_qubits });
        }
        self.terms.extend(other.terms.iter().cloned());
        Ok(())
    }

    /// Operator product, unsimplified.
    pub fn product(&self, other: &PauliSum) -> Result<PauliSum> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: other.n_qubits });
        }
        let mut out = PauliSum::new(self.n_qubits);
        for a in &self.terms {
            for b in &other.terms {
                let (phase, s) = a.string.multiply(&b.string);
                out.terms.push(PauliTerm::new(phase * a.coefficient * b.coefficient, s));
            }
        }
        Ok(out)
    }

    /// Parse the line format `<coeff_re> <coeff_im> <letters>`.
    ///
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut sum: Option<PauliSum> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let parse_f = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad coefficient {s:?}: {e}"),
                })
            };
            let re = parse_f(fields[0])?;
            let im = parse_f(fields[1])?;
            let string: PauliString = fields[2].parse().map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse { line: line_no, message },
                other => other,
            })?;
            let sum = sum.get_or_insert_with(|| PauliSum::new(string.n_qubits()));
            sum.push(PauliTerm::new(C64::new(re, im), string)).map_err(|_| Error::Parse {
                line: line_no,
                message: "register size differs from earlier lines".into(),
            })?;
        }
        sum.ok_or(Error::Parse { line: 0, message: "no terms".into() })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
