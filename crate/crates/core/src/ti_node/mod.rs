//! Trapped-ion node: entangled-photon emission with Zeeman phase evolution,
//! pulsed-excitation probability, readout statistics and ion dephasing.

mod ramsey;
mod spam;

pub use ramsey::{fit_ramsey, ramsey_curve, synthesize_ramsey, RamseyFit, RamseyParams};
pub use spam::{readout_fidelities, simulate_spam_readout, IonReadout, SpamParams};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{PureState, QuantumChannel, Subsystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonParams {
    /// Zeeman splitting between |1'⟩ and |1⟩ as an angular frequency (rad/s).
    pub zeeman_omega: f64,
    /// Ramsey coherence time of the Zeeman qubit, ms.
    pub coherence_time_ms: f64,
    /// Excited-state lifetime used for spectral (linewidth) calculations, ns.
    pub lifetime_spectral_ns: f64,
    /// Excited-state lifetime used for detection-window calculations, ns.
    pub lifetime_temporal_ns: f64,
    /// P_{1/2} → S_{1/2} branching ratio.
    pub branching_s12: f64,
    /// Single-pulse excitation probability.
    pub pi_excitation_prob: f64,
}

impl Default for IonParams {
    fn default() -> Self {
        Self {
            zeeman_omega: 2.0 * PI * 11.22e6,
            coherence_time_ms: 0.989,
            lifetime_spectral_ns: 8.12,
            lifetime_temporal_ns: 8.05,
            branching_s12: 0.995,
            pi_excitation_prob: 0.960,
        }
    }
}

impl IonParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zeeman_omega", self.zeeman_omega),
            ("coherence_time_ms", self.coherence_time_ms),
            ("lifetime_spectral_ns", self.lifetime_spectral_ns),
            ("lifetime_temporal_ns", self.lifetime_temporal_ns),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        for (name, v) in [
            ("branching_s12", self.branching_s12),
            ("pi_excitation_prob", self.pi_excitation_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Relative phase ω·t accumulated after `t_ns` of free evolution.
    pub fn zeeman_phase(&self, t_ns: f64) -> f64 {
        self.zeeman_omega * t_ns * 1e-9
    }
}

/// (|1'⟩|σ+⟩ + e^{iφ}|1⟩|σ−⟩)/√2 with φ = ω·t − φ_comp.
pub fn emit_entangled_state(
    params: &IonParams,
    t_elapsed_ns: f64,
    phi_comp: f64,
) -> Result<PureState> {
    if t_elapsed_ns < 0.0 {
        return Err(Error::param("t_elapsed_ns", "must be non-negative"));
    }
    Ok(PureState::bell(
        params.zeeman_phase(t_elapsed_ns) - phi_comp,
    ))
}

/// Fit parameters of the bright-population curve against pulse energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitationFit {
    pub amplitude: f64,
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
}

impl Default for ExcitationFit {
    /// Operating point: a π pulse (α·E^{β/2} = π) with the amplitude fixed by
    /// the measured 96.0% single-pulse excitation probability.
    fn default() -> Self {
        Self {
            amplitude: 0.960,
            alpha: PI,
            beta: 2.0,
            energy: 1.0,
        }
    }
}

impl ExcitationFit {
    pub fn pulse_area(&self) -> f64 {
        self.alpha * self.energy.powf(self.beta / 2.0)
    }

    /// Energy at which the pulse area reaches π.
    pub fn pi_energy(&self) -> f64 {
        (PI / self.alpha).powf(2.0 / self.beta)
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        Self {
            energy,
            ..self.clone()
        }
    }
}

/// Bright population after one pulse: P_bright = (2A/3)·sin²(α·E^{β/2}/2).
pub fn bright_population(fit: &ExcitationFit) -> f64 {
    2.0 * fit.amplitude / 3.0 * (fit.pulse_area() / 2.0).sin().powi(2)
}

/// P_e = P_bright / (2/3), clamped to [0, 1].
pub fn excitation_probability(fit: &ExcitationFit) -> Result<f64> {
    if !(fit.amplitude > 0.0 && fit.amplitude <= 1.0) {
        return Err(Error::param(
            "amplitude",
            format!("{} not in (0, 1]", fit.amplitude),
        ));
    }
    if !(fit.alpha > 0.0 && fit.beta > 0.0) {
        return Err(Error::param("alpha/beta", "must be positive"));
    }
    if fit.energy < 0.0 {
        return Err(Error::param("energy", "must be non-negative"));
    }
    Ok((bright_population(fit) / (2.0 / 3.0)).clamp(0.0, 1.0))
}

/// exp(−(t/τ_co)^a) for an evolution time in µs.
pub fn coherence_factor(params: &IonParams, t_us: f64, exponent_a: f64) -> f64 {
    let tau_us = params.coherence_time_ms * 1e3;
    (-(t_us / tau_us).powf(exponent_a)).exp()
}

/// Quasi-static dephasing of the ion qubit after `t_us` of storage.
pub fn decoherence_channel(
    params: &IonParams,
    t_us: f64,
    exponent_a: f64,
) -> Result<QuantumChannel> {
    if t_us < 0.0 {
        return Err(Error::param("t_us", "must be non-negative"));
    }
    if !(1.0..=3.0).contains(&exponent_a) {
        return Err(Error::param(
            "exponent_a",
            format!("{exponent_a} not in [1, 3]"),
        ));
    }
    QuantumChannel::dephasing(coherence_factor(params, t_us, exponent_a))?.on(Subsystem::Ion)
}

/// 1 − F_avg = (1 − exp(−(t/τ)^a))/2.
pub fn decoherence_infidelity(params: &IonParams, t_us: f64, exponent_a: f64) -> f64 {
    (1.0 - coherence_factor(params, t_us, exponent_a)) / 2.0
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::qstate::{DensityMatrix, Subsystem};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn emission_is_maximally_entangled(t in 0.0f64..1e7, comp in -10.0f64..10.0) {
            let psi = emit_entangled_state(&IonParams::default(), t, comp).unwrap();
            prop_assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
            let rho = DensityMatrix::from_pure(&psi);
            for keep in [Subsystem::Ion, Subsystem::Photon] {
                let r = rho.partial_trace(keep).unwrap();
                let m = r.matrix();
                prop_assert!((m[(0, 0)].re - 0.5).abs() < 1e-10 && (m[(1, 1)].re - 0.5).abs() < 1e-10);
                prop_assert!(m[(0, 1)].norm() < 1e-10);
            }
        }
    }
}
