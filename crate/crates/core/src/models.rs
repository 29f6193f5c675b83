//! Transverse-field Ising chain and multi-chromophore exciton Hamiltonians.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum, PauliTerm};

/// Hartree in eV.
pub const HARTREE_EV: f64 = 27.211386245988;
/// Bohr radius in Å.
pub const BOHR_ANGSTROM: f64 = 0.529177210903;
/// Converts `μ_a μ_b / r³` with dipoles in e·a₀ and `r` in Å to eV.
pub const DIPOLE_COUPLING_EV: f64 = HARTREE_EV * BOHR_ANGSTROM * BOHR_ANGSTROM * BOHR_ANGSTROM;
/// ħ in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;
/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV_K: f64 = 8.617333262e-5;

pub type Vec3 = [f64; 3];

/// `β = 1/(k_B T)` in eV⁻¹.
pub fn beta_from_kelvin(t: f64) -> f64 {
    1.0 / (BOLTZMANN_EV_K * t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TFIConfig {
    pub n_sites: usize,
    pub h: f64,
}

/// `−h Σ X_i − Σ Z_i Z_{i+1}` on an open chain.
pub fn build_tfi(cfg: &TFIConfig) -> Result<PauliSum> {
    let n = cfg.n_sites;
    if n == 0 {
        return Err(Error::Config("n_sites must be >= 1".into()));
    }
    if !cfg.h.is_finite() {
        return Err(Error::Config("transverse field must be finite".into()));
    }
    let mut out = PauliSum::new(n);
    for i in 0..n {
        out.add_term(-cfg.h, PauliString::single(n, i, Pauli::X))?;
    }
    for i in 0..n.saturating_sub(1) {
        out.add_term(-1.0, PauliString::pair(n, i, i + 1, Pauli::Z, Pauli::Z))?;
    }
    Ok(out)
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `[μ_a·μ_b − 3(μ_a·r̂)(μ_b·r̂)] / r³`, in the units of the inputs.
pub fn dipole_coupling(mu_a: &Vec3, mu_b: &Vec3, r_ab: &Vec3) -> Result<f64> {
    let r2 = dot(r_ab, r_ab);
    if !(r2 > 0.0) {
        return Err(Error::Contract("dipole coupling at zero separation".into()));
    }
    let r = r2.sqrt();
    let rhat = [r_ab[0] / r, r_ab[1] / r, r_ab[2] / r];
    Ok((dot(mu_a, mu_b) - 3.0 * dot(mu_a, &rhat) * dot(mu_b, &rhat)) / (r2 * r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomerData {
    pub excitation_energy_ev: f64,
    pub mu_gg: Vec3,
    pub mu_ee: Vec3,
    pub mu_ge: Vec3,
    pub position_angstrom: Vec3,
}

impl MonomerData {
    pub fn validate(&self) -> Result<()> {
        if !(self.excitation_energy_ev > 0.0) || !self.excitation_energy_ev.is_finite() {
            return Err(Error::Config(format!(
                "excitation_energy_ev must be finite and > 0, got {}",
                self.excitation_energy_ev
            )));
        }
        for (name, v) in [
            ("mu_gg", &self.mu_gg),
            ("mu_ee", &self.mu_ee),
            ("mu_ge", &self.mu_ge),
            ("position_angstrom", &self.position_angstrom),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Dipole combinations entering the pair brackets: `(S, D, T)`.
    fn brackets(&self) -> [Vec3; 3] {
        let s = std::array::from_fn(|k| 0.5 * (self.mu_gg[k] + self.mu_ee[k]));
        let d = std::array::from_fn(|k| 0.5 * (self.mu_gg[k] - self.mu_ee[k]));
        [s, d, self.mu_ge]
    }
}

pub fn parse_monomers(json: &str) -> Result<Vec<MonomerData>> {
    let monomers: Vec<MonomerData> =
        serde_json::from_str(json).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    if monomers.is_empty() {
        return Err(Error::Config("monomer list is empty".into()));
    }
    for (i, m) in monomers.iter().enumerate() {
        m.validate().map_err(|e| Error::Config(format!("monomer {i}: {e}")))?;
    }
    Ok(monomers)
}

pub fn monomers_to_json(monomers: &[MonomerData]) -> String {
    let mut s = serde_json::to_string_pretty(monomers).expect("monomer data serializes");
    s.push('\n');
    s
}

/// Pauli coefficients of the exciton Hamiltonian. Pair arrays are indexed
/// `[a][b]` with `a < b`; entries with `a ≥ b` stay zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitonCoefficients {
    pub e_scalar: f64,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub xx: Vec<Vec<f64>>,
    pub xz: Vec<Vec<f64>>,
    pub zx: Vec<Vec<f64>>,
    pub zz: Vec<Vec<f64>>,
}

const S: usize = 0;
const D: usize = 1;
const T: usize = 2;

pub fn exciton_coefficients(monomers: &[MonomerData]) -> Result<ExcitonCoefficients> {
    let n = monomers.len();
    if n == 0 {
        return Err(Error::Config("at least one monomer is required".into()));
    }
    for m in monomers {
        m.validate()?;
    }
    let br: Vec<[Vec3; 3]> = monomers.iter().map(MonomerData::brackets).collect();
    // pair[a][b][p][q] = (p_a | q_b) in eV
    let mut pair = vec![vec![[[0.0; 3]; 3]; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let r: Vec3 = std::array::from_fn(|k| monomers[b].position_angstrom[k] - monomers[a].position_angstrom[k]);
            for p in 0..3 {
                for q in 0..3 {
                    pair[a][b][p][q] = DIPOLE_COUPLING_EV
                        * dipole_coupling(&br[a][p], &br[b][q], &r).map_err(|_| Error::ZeroSeparation(a, b))?;
                }
            }
        }
    }
    let one_s: Vec<f64> = monomers.iter().map(|m| 0.5 * m.excitation_energy_ev).collect();
    let one_d: Vec<f64> = monomers.iter().map(|m| -0.5 * m.excitation_energy_ev).collect();
    let mut c = ExcitonCoefficients {
        e_scalar: one_s.iter().sum(),
        z: one_d.clone(),
        x: vec![0.0; n],
        xx: vec![vec![0.0; n]; n],
        xz: vec![vec![0.0; n]; n],
        zx: vec![vec![0.0; n]; n],
        zz: vec![vec![0.0; n]; n],
    };
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            c.z[a] += pair[a][b][D][S];
            c.x[a] += pair[a][b][T][S];
            if a < b {
                c.e_scalar += pair[a][b][S][S];
                c.xx[a][b] = pair[a][b][T][T];
                c.xz[a][b] = pair[a][b][T][D];
                c.zx[a][b] = pair[a][b][D][T];
                c.zz[a][b] = pair[a][b][D][D];
            }
        }
    }
    Ok(c)
}

impl ExcitonCoefficients {
    pub fn n_monomers(&self) -> usize {
        self.z.len()
    }

    pub fn to_pauli_sum(&self) -> Result<PauliSum> {
        let n = self.n_monomers();
        let mut out = PauliSum::new(n);
        out.add_term(self.e_scalar, PauliString::identity(n))?;
        for m in 0..n {
            out.add_term(self.z[m], PauliString::single(n, m, Pauli::Z))?;
            if self.x[m] != 0.0 {
                out.add_term(self.x[m], PauliString::single(n, m, Pauli::X))?;
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                for (coef, pa, pb) in [
                    (self.xx[a][b], Pauli::X, Pauli::X),
                    (self.xz[a][b], Pauli::X, Pauli::Z),
                    (self.zx[a][b], Pauli::Z, Pauli::X),
                    (self.zz[a][b], Pauli::Z, Pauli::Z),
                ] {
                    if coef != 0.0 {
                        out.add_term(coef, PauliString::pair(n, a, b, pa, pb))?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Qubit `m` encodes monomer `m`, with `|0⟩` the ground and `|1⟩` the excited state.
pub fn build_exciton_hamiltonian(monomers: &[MonomerData]) -> Result<PauliSum> {
    exciton_coefficients(monomers)?.to_pauli_sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// `Σ_m [μ_I I + μ_Z Z_m + μ_X X_m]` for one Cartesian component.
pub fn build_dipole_operator(monomers: &[MonomerData], axis: Axis) -> Result<PauliSum> {
    let n = monomers.len();
    if n == 0 {
        return Err(Error::Config("at least one monomer is required".into()));
    }
    let k = axis.index();
    let mut identity = 0.0;
    let mut terms = Vec::new();
    for (m, mono) in monomers.iter().enumerate() {
        identity += 0.5 * (mono.mu_gg[k] + mono.mu_ee[k]);
        terms.push(PauliTerm::new(0.5 * (mono.mu_gg[k] - mono.mu_ee[k]), PauliString::single(n, m, Pauli::Z)));
        terms.push(PauliTerm::new(mono.mu_ge[k], PauliString::single(n, m, Pauli::X)));
    }
    let mut out = PauliSum::new(n);
    out.push(PauliTerm::new(C64::new(identity, 0.0), PauliString::identity(n)))?;
    for t in terms {
        out.push(t)?;
    }
    Ok(out)
}

/// Lattice spacing of the synthetic aggregate.
pub const SYNTH_LATTICE_ANGSTROM: f64 = 5.0;
/// Maximum displacement per coordinate from the lattice site.
pub const SYNTH_JITTER_ANGSTROM: f64 = 0.25;

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let cos_t: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    [sin_t * phi.cos(), sin_t * phi.sin(), cos_t]
}

fn scaled(v: Vec3, s: f64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Seeded synthetic chromophores: energies in 3.8–4.4 eV, transition dipoles
/// of 1–3 a.u., small permanent dipoles, sites on a jittered cubic lattice.
pub fn synth_monomers(seed: u64, count: usize) -> Result<Vec<MonomerData>> {
    if count == 0 {
        return Err(Error::Config("count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (1..).find(|s: &usize| s * s * s >= count).unwrap_or(1);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let site = [i % side, (i / side) % side, i / (side * side)];
        let position_angstrom: Vec3 = std::array::from_fn(|k| {
            site[k] as f64 * SYNTH_LATTICE_ANGSTROM + rng.random_range(-SYNTH_JITTER_ANGSTROM..=SYNTH_JITTER_ANGSTROM)
        });
        let excitation_energy_ev = rng.random_range(3.8..=4.4);
        let mu_ge = scaled(random_direction(&mut rng), rng.random_range(1.0..=3.0));
        let mu_gg = scaled(random_direction(&mut rng), rng.random_range(0.0..=0.5));
        let delta = scaled(random_direction(&mut rng), rng.random_range(0.0..=0.3));
        let mu_ee = std::array::from_fn(|k| mu_gg[k] + delta[k]);
        out.push(MonomerData { excitation_energy_ev, mu_gg, mu_ee, mu_ge, position_angstrom });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::to_dense;

    fn mono(eps: f64, gg: Vec3, ee: Vec3, ge: Vec3, pos: Vec3) -> MonomerData {
        MonomerData { excitation_energy_ev: eps, mu_gg: gg, mu_ee: ee, mu_ge: ge, position_angstrom: pos }
    }

    fn terms(p: &PauliSum) -> Vec<(String, f64)> {
        p.terms().iter().map(|t| (t.string.to_string(), t.coefficient.re)).collect()
    }

    fn sorted_spectrum(p: &PauliSum) -> Vec<f64> {
        let mut v: Vec<f64> = to_dense(p).unwrap().eigen().values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn tfi_two_sites() {
        let h = build_tfi(&TFIConfig { n_sites: 2, h: 1.0 }).unwrap();
        assert_eq!(terms(&h), vec![("XI".into(), -1.0), ("IX".into(), -1.0), ("ZZ".into(), -1.0)]);
    }

    #[test]
    fn tfi_four_sites_counts() {
        let h = build_tfi(&TFIConfig { n_sites: 4, h: 1.5 }).unwrap();
        let t = terms(&h);
        assert_eq!(t.iter().filter(|(_, c)| *c == -1.5).count(), 4);
        assert_eq!(t.iter().filter(|(s, c)| *c == -1.0 && s.matches('Z').count() == 2).count(), 3);
        assert_eq!(t.len(), 7);
    }

    #[test]
    fn tfi_zero_field_ground_states_degenerate() {
        let h = build_tfi(&TFIConfig { n_sites: 4, h: 0.0 }).unwrap();
        let d = to_dense(&h).unwrap();
        let e = sorted_spectrum(&h);
        assert!((e[0] + 3.0).abs() < 1e-12 && (e[1] + 3.0).abs() < 1e-12 && e[2] > -3.0 + 1.0);
        assert!((d.matrix[(0, 0)].re + 3.0).abs() < 1e-12);
        assert!((d.matrix[(15, 15)].re + 3.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_examples() {
        let j = dipole_coupling(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((j - 1.0).abs() < 1e-15);
        let j = dipole_coupling(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((j + 2.0).abs() < 1e-15);
        let a = [0.3, -1.2, 0.8];
        let b = [1.1, 0.4, -0.5];
        let r = [0.7, 1.9, -1.3];
        let j1 = dipole_coupling(&a, &b, &r).unwrap();
        let j2 = dipole_coupling(&a, &b, &scaled(r, 2.0)).unwrap();
        assert!((j1 / 8.0 - j2).abs() < 1e-14);
        let swapped = dipole_coupling(&b, &a, &scaled(r, -1.0)).unwrap();
        assert!((j1 - swapped).abs() < 1e-14);
        assert!(dipole_coupling(&a, &b, &[0.0; 3]).is_err());
    }

    #[test]
    fn unit_factor_value() {
        assert!((DIPOLE_COUPLING_EV - 4.0320).abs() < 1e-3);
    }

    #[test]
    fn single_monomer_hamiltonian() {
        let h = build_exciton_hamiltonian(&[mono(4.0, [0.1, 0.0, 0.0], [0.2, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3])])
            .unwrap();
        assert_eq!(terms(&h), vec![("I".into(), 2.0), ("Z".into(), -2.0)]);
        let e = sorted_spectrum(&h);
        assert!(e[0].abs() < 1e-14 && (e[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_dimer_spectrum_is_subset_sums() {
        let z = [0.0; 3];
        let h = build_exciton_hamiltonian(&[mono(3.9, z, z, z, [0.0; 3]), mono(4.2, z, z, z, [5.0, 0.0, 0.0])]).unwrap();
        assert!(h.terms().iter().all(|t| t.string.x_mask().count_ones() + t.string.z_mask().count_ones() <= 1));
        let e = sorted_spectrum(&h);
        for (got, want) in e.iter().zip([0.0, 3.9, 4.2, 8.1]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_only_dimer_has_only_xx_coupling() {
        let z = [0.0; 3];
        let ge1 = [1.0, 0.5, 0.0];
        let ge2 = [0.2, 1.5, -0.3];
        let r = [4.5, 1.0, 0.5];
        let c = exciton_coefficients(&[mono(4.0, z, z, ge1, [0.0; 3]), mono(4.1, z, z, ge2, r)]).unwrap();
        // Hand evaluation of the dipole formula.
        let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let proj1 = (ge1[0] * r[0] + ge1[1] * r[1] + ge1[2] * r[2]) / rn;
        let proj2 = (ge2[0] * r[0] + ge2[1] * r[1] + ge2[2] * r[2]) / rn;
        let hand = (ge1[0] * ge2[0] + ge1[1] * ge2[1] + ge1[2] * ge2[2] - 3.0 * proj1 * proj2) / rn.powi(3);
        assert!((c.xx[0][1] - hand * DIPOLE_COUPLING_EV).abs() < 1e-14);
        assert_eq!((c.xz[0][1], c.zx[0][1], c.zz[0][1]), (0.0, 0.0, 0.0));
        assert_eq!(c.x, vec![0.0, 0.0]);
        assert_eq!(c.e_scalar, 4.05);
    }

    #[test]
    fn coincident_positions_rejected() {
        let m = mono(4.0, [0.1; 3], [0.1; 3], [1.0; 3], [1.0; 3]);
        assert!(matches!(build_exciton_hamiltonian(&[m.clone(), m]), Err(Error::ZeroSeparation(0, 1))));
    }

    #[test]
    fn dipole_operator_example() {
        let m = mono(4.0, [1.0, 0.0, 0.0], [0.0; 3], [0.5, 0.0, 0.0], [0.0; 3]);
        let op = build_dipole_operator(&[m], Axis::X).unwrap();
        assert_eq!(terms(&op), vec![("I".into(), 0.5), ("Z".into(), 0.5), ("X".into(), 0.5)]);
        // ⟨g|μ|g⟩ = 1, ⟨e|μ|e⟩ = 0, ⟨g|μ|e⟩ = 0.5
        let d = to_dense(&op).unwrap().matrix;
        assert!((d[(0, 0)].re - 1.0).abs() < 1e-15 && d[(1, 1)].norm() < 1e-15 && (d[(0, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_dipoles_have_no_z_part() {
        let m = mono(4.0, [0.3, 0.2, 0.1], [0.3, 0.2, 0.1], [1.0, 0.0, 0.0], [0.0; 3]);
        let op = build_dipole_operator(&[m], Axis::Y).unwrap();
        assert_eq!(op.terms()[1].coefficient.re, 0.0);
        assert!(op.is_hermitian());
    }

    #[test]
    fn monomer_json_round_trip_and_strictness() {
        let ms = synth_monomers(3, 2).unwrap();
        let text = monomers_to_json(&ms);
        assert_eq!(parse_monomers(&text).unwrap(), ms);
        let bad = text.replacen("mu_gg", "mu_gx", 1);
        let err = parse_monomers(&bad).unwrap_err().to_string();
        assert!(err.contains("mu_gx"), "{err}");
    }

    #[test]
    fn synth_is_deterministic_and_plausible() {
        let a = monomers_to_json(&synth_monomers(42, 4).unwrap());
        let b = monomers_to_json(&synth_monomers(42, 4).unwrap());
        assert_eq!(a, b);
        let ms = synth_monomers(42, 4).unwrap();
        for (i, m) in ms.iter().enumerate() {
            assert!((3.8..=4.4).contains(&m.excitation_energy_ev));
            let g = dot(&m.mu_ge, &m.mu_ge).sqrt();
            assert!((1.0..=3.0 + 1e-12).contains(&g));
            for n in &ms[i + 1..] {
                let r: Vec3 = std::array::from_fn(|k| m.position_angstrom[k] - n.position_angstrom[k]);
                assert!(dot(&r, &r).sqrt() >= 4.0);
            }
        }
        let c = exciton_coefficients(&ms).unwrap();
        let min_gap = ms.iter().map(|m| m.excitation_energy_ev).fold(f64::INFINITY, f64::min);
        for a in 0..4 {
            for b in (a + 1)..4 {
                for v in [c.xx[a][b], c.xz[a][b], c.zx[a][b], c.zz[a][b]] {
                    assert!(v.is_finite() && v.abs() < min_gap);
                }
            }
        }
    }

    #[test]
    fn room_temperature_beta() {
        assert!((beta_from_kelvin(300.0) - 38.68).abs() < 0.01);
    }
}
