use num_complex::Complex64 as C64;
use proptest::prelude::*;
use tfdvqa::ansatz::AnsatzCircuit;
use tfdvqa::dynamics::{self, CorrelationSeries};
use tfdvqa::estimators::{self, ShotConfig};
use tfdvqa::models::{self, TFIConfig};
use tfdvqa::oracle;
use tfdvqa::pauli::{Pauli, PauliString, PauliSum, PauliTerm};
use tfdvqa::statevector::StateVector;
use tfdvqa::tfd::{self, TFDSystem};
use tfdvqa::vqa;

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn non_identity_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(pauli(), n)
        .prop_filter("identity", |l| l.iter().any(|&p| p != Pauli::I))
        .prop_map(|l| PauliString::from_letters(&l))
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
        let mut s = StateVector::from_amplitudes(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()?;
        (s.normalize() > 1e-3).then_some(s)
    })
}

/// A random ansatz on `n` qubits together with matching angles and a reference state.
fn circuit(n: usize, max_params: usize) -> impl Strategy<Value = (AnsatzCircuit, Vec<f64>, StateVector)> {
    prop::collection::vec((non_identity_string(n), -3.2f64..3.2), 1..=max_params).prop_flat_map(move |gens| {
        let (strings, theta): (Vec<_>, Vec<_>) = gens.into_iter().unzip();
        let ansatz = AnsatzCircuit::new(n, strings.into_iter().map(PauliTerm::unit).collect()).unwrap();
        (Just(ansatz), Just(theta), state(n))
    })
}

fn hermitian_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((non_identity_string(n), -2.0f64..2.0), 1..6).prop_map(move |terms| {
        let mut h = PauliSum::new(n);
        for (s, c) in terms {
            h.add_term(c, s).unwrap();
        }
        h
    })
}

fn max_abs(m: &oracle::DenseMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotations_preserve_norm((ansatz, theta, psi0) in circuit(3, 12)) {
        let psi = ansatz.prepare_state(&theta, &psi0).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_is_hermitian_with_psd_real_part((ansatz, theta, psi0) in circuit(3, 10)) {
        let m = vqa::compute_m(&ansatz, &theta, &psi0).unwrap();
        prop_assert!(max_abs(&(&m - m.adjoint())) < 1e-12);
        for k in 0..m.nrows() {
            prop_assert!((m[(k, k)].re - 1.0).abs() < 1e-12);
        }
        let re = m.map(|z| z.re);
        let min = re.symmetric_eigen().eigenvalues.min();
        prop_assert!(min > -1e-10, "smallest eigenvalue {min}");
    }

    #[test]
    fn exact_estimators_agree_with_statevector((ansatz, theta, psi0) in circuit(2, 6), h in hermitian_sum(2)) {
        let m = vqa::compute_m(&ansatz, &theta, &psi0).unwrap();
        let v = vqa::compute_v(&ansatz, &theta, &psi0, &h).unwrap();
        let m_est = estimators::estimate_m_matrix(&ansatz, &theta, &psi0, ShotConfig::exact()).unwrap();
        let v_est = estimators::estimate_v_vector(&ansatz, &theta, &psi0, &h, ShotConfig::exact()).unwrap();
        prop_assert!(max_abs(&(&m - m_est)) < 1e-12);
        prop_assert!((v - v_est).camax() < 1e-12);
    }

    #[test]
    fn dipole_coupling_is_symmetric(a in vec3(), b in vec3(), r in vec3()) {
        prop_assume!(r.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let j = models::dipole_coupling(&a, &b, &r).unwrap();
        let swapped = models::dipole_coupling(&b, &a, &r).unwrap();
        let reversed = models::dipole_coupling(&a, &b, &[-r[0], -r[1], -r[2]]).unwrap();
        prop_assert!((j - swapped).abs() <= 1e-12 * j.abs().max(1.0));
        prop_assert!((j - reversed).abs() <= 1e-12 * j.abs().max(1.0));
    }

    #[test]
    fn purification_reduces_to_gibbs(n in 1usize..=3, h in 0.1f64..3.0, beta in 0.0f64..2.0) {
        let ham = models::build_tfi(&TFIConfig { n_sites: n, h }).unwrap();
        let g = oracle::gibbs_state(&ham, beta).unwrap();
        let sys = TFDSystem::new(ham).unwrap();
        let reduced = tfd::partial_trace_fictitious(&g.purification, &sys).unwrap();
        prop_assert!(max_abs(&(reduced - &g.rho)) < 1e-12);
    }

    #[test]
    fn h_hat_annihilates_identity_state(h in hermitian_sum(2).prop_filter("odd Y", |h| h.terms().iter().all(|t| t.string.y_count() % 2 == 0))) {
        let sys = TFDSystem::new(h).unwrap();
        let out = sys.identity_state().apply_pauli_sum(sys.h_hat()).unwrap();
        prop_assert!(out.norm() < 1e-12);
    }

    #[test]
    fn fictitious_rotations_leave_physical_state(
        psi in state(4),
        rots in prop::collection::vec((non_identity_string(2), -3.2f64..3.2), 1..8),
    ) {
        let sys = TFDSystem::new(models::build_tfi(&TFIConfig { n_sites: 2, h: 1.0 }).unwrap()).unwrap();
        let before = tfd::partial_trace_fictitious(&psi, &sys).unwrap();
        let mut rotated = psi.clone();
        for (s, angle) in rots {
            rotated.apply_rotation_in_place(&PauliTerm::unit(s.embed(4, 2)), angle).unwrap();
        }
        let after = tfd::partial_trace_fictitious(&rotated, &sys).unwrap();
        prop_assert!(max_abs(&(after - before)) < 1e-12);
    }

    #[test]
    fn autocorrelation_spectrum_is_real(h in 0.2f64..2.5, beta in 0.0f64..2.0, site in 0usize..2) {
        let ham = models::build_tfi(&TFIConfig { n_sites: 2, h }).unwrap();
        let a = PauliSum::from_terms(2, vec![PauliTerm::unit(PauliString::single(2, site, Pauli::X))]).unwrap();
        let times = dynamics::time_grid(6.0, 0.1).unwrap();
        let values = oracle::exact_correlation(&ham, &a, &a, beta, &times).unwrap();
        let series = CorrelationSeries { times, values, norm_factor: 1.0, exact: None, thermal_fidelity: None };
        let sp = dynamics::spectrum(&series, 2.0, 1.0).unwrap();
        prop_assert_eq!(sp.omegas.len(), 2 * series.times.len() - 1);
        prop_assert!(sp.intensity.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn pauli_products_stay_unitary(a in non_identity_string(3), b in non_identity_string(3)) {
        let (phase, p) = a.multiply(&b);
        prop_assert!((phase.norm() - 1.0).abs() < 1e-15);
        let (back_phase, back) = p.multiply(&b);
        prop_assert_eq!(back, a);
        prop_assert!((phase * back_phase - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
