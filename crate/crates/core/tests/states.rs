use proptest::prelude::*;
use qng_core::gaussian_boundary::GaussianStateParams;
use qng_core::photon_stats::{vacuum_after_loss, PhotonNumberDistribution};
use qng_core::state_models::{
    eta_threshold, noisy_single_photon_distribution, noisy_single_photon_vacuum_pair, ModeState,
    MultimodeProductState, NoisySinglePhotonModel, StateSpec,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_photon_statistics(eta in 0.0f64..=1.0, nbar in 0.0f64..2.0, t in 0.01f64..0.99) {
        let m = NoisySinglePhotonModel::new(eta, nbar).unwrap();
        let (p, q) = noisy_single_photon_vacuum_pair(&m, t).unwrap();
        let d = noisy_single_photon_distribution(&m).unwrap();
        prop_assert!((p - d.p0()).abs() < 1e-10);
        prop_assert!((q - vacuum_after_loss(&d, t).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn vacuum_modes_change_nothing(eta in 0.0f64..=1.0, nbar in 0.0f64..0.5, t in 0.01f64..0.99, k in 0usize..6) {
        let m = NoisySinglePhotonModel::new(eta, nbar).unwrap();
        let mut modes = vec![ModeState::Distribution(noisy_single_photon_distribution(&m).unwrap())];
        for i in 0..k {
            modes.push(if i % 2 == 0 {
                ModeState::Distribution(PhotonNumberDistribution::vacuum())
            } else {
                ModeState::Gaussian(GaussianStateParams::new(1.0, 0.0, 0.0).unwrap())
            });
        }
        let (p, q) = MultimodeProductState { modes }.vacuum_pair(t).unwrap();
        let (p1, q1) = noisy_single_photon_vacuum_pair(&m, t).unwrap();
        prop_assert!((p - p1).abs() < 1e-10 && (q - q1).abs() < 1e-10);
    }
}

#[test]
fn weak_noise_asymptote() {
    let nbar = 1e-6;
    for t in [0.1f64, 0.5, 0.9] {
        let eta = eta_threshold(nbar, t).unwrap().value().unwrap();
        let ratio = eta * eta * 2.0 * (2.0 - t) / (3.0 * nbar);
        assert!((0.9..=1.1).contains(&ratio), "T = {t}: {ratio}");
    }
}

#[test]
fn threshold_grows_with_noise_and_transmittance() {
    let ts = [0.1, 0.25, 0.5, 0.75, 0.9];
    let at = |nbar: f64, t: f64| eta_threshold(nbar, t).unwrap().value().unwrap();
    for &t in &ts {
        let mut last = -1.0;
        for nbar in [1e-5, 1e-4, 1e-3, 1e-2, 5e-2] {
            let eta = at(nbar, t);
            assert!(eta > last);
            last = eta;
        }
    }
    for w in ts.windows(2) {
        assert!(at(1e-2, w[1]) > at(1e-2, w[0]));
    }
}

#[test]
fn spec_documents_parse() {
    let spec: StateSpec =
        serde_json::from_str(r#"{"model":"squeezed_coherent","V":0.8,"dx":0.3,"dp":0.0}"#).unwrap();
    let (p, q) = spec.vacuum_pair(0.5).unwrap();
    let d = spec.distribution().unwrap();
    assert!((d.p0() - p).abs() < 1e-10);
    assert!((vacuum_after_loss(&d, 0.5).unwrap() - q).abs() < 1e-10);
    assert!(
        serde_json::from_str::<StateSpec>(r#"{"model":"fock_mixture","probs":[1.0],"x":1}"#)
            .is_err()
    );
}
