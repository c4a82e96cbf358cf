//! Everything between ion emission and the memory or detector: conversion
//! and fiber as a process matrix, arrival-time jitter, PBS leakage, detector
//! dark noise and the detection-window cut.

mod process;

pub use process::{
    process_fidelity, process_matrix_channel, process_tomography, process_tomography_from_outputs,
    ProcessMatrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, QuantumChannel, Subsystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterParams {
    pub awg_rms_ns: f64,
    pub transceiver_rms_ns: f64,
    /// rad/s
    pub zeeman_omega: f64,
}

impl Default for JitterParams {
    fn default() -> Self {
        Self {
            awg_rms_ns: 0.305,
            transceiver_rms_ns: 0.056,
            zeeman_omega: 2.0 * std::f64::consts::PI * 11.22e6,
        }
    }
}

impl JitterParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("awg_rms_ns", self.awg_rms_ns),
            ("transceiver_rms_ns", self.transceiver_rms_ns),
            ("zeeman_omega", self.zeeman_omega),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Phase uncertainty ΔΦ = t_rms·ω in radians.
    pub fn phase_rms(&self) -> f64 {
        jitter_total_rms(self) * 1e-9 * self.zeeman_omega
    }
}

pub fn jitter_total_rms(p: &JitterParams) -> f64 {
    p.awg_rms_ns.hypot(p.transceiver_rms_ns)
}

/// Gaussian quasi-static phase noise on the ion, coherence factor exp(−ΔΦ²/2).
pub fn jitter_dephasing_channel(p: &JitterParams) -> Result<QuantumChannel> {
    p.validate()?;
    let dphi = p.phase_rms();
    QuantumChannel::dephasing((-dphi * dphi / 2.0).exp())?.on(Subsystem::Ion)
}

/// Bell-state infidelity caused by the jitter channel.
pub fn jitter_infidelity(p: &JitterParams) -> f64 {
    let dphi = p.phase_rms();
    (1.0 - (-dphi * dphi / 2.0).exp()) / 2.0
}

/// Leakage ε = 1/extinction as a bit flip on the photon qubit.
pub fn pbs_bitflip_channel(extinction: f64) -> Result<QuantumChannel> {
    if !(extinction >= 1.0) {
        return Err(Error::param(
            "pbs_extinction",
            format!("{extinction} must be at least 1"),
        ));
    }
    QuantumChannel::bit_flip(1.0 / extinction)?.on(Subsystem::Photon)
}

/// (1−p)ρ + p·I/4 with p = 1/(snr+1).
pub fn dark_noise_admixture(rho: &DensityMatrix, snr: f64) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    if rho.is_subnormalized() {
        return Err(Error::BadTrace(rho.trace()));
    }
    if !(snr >= 0.0) {
        return Err(Error::param("snr", format!("{snr} must be non-negative")));
    }
    let p = dark_noise_fraction(snr);
    Ok(rho.mix(&DensityMatrix::maximally_mixed(4)?, 1.0 - p))
}

/// p = 1/(snr+1); zero for infinite SNR.
pub fn dark_noise_fraction(snr: f64) -> f64 {
    if snr.is_infinite() {
        0.0
    } else {
        1.0 / (snr + 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub snr: f64,
    pub pbs_extinction: f64,
    pub window_ns: f64,
    pub lifetime_ns: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            snr: 28.0,
            pbs_extinction: 3500.0,
            window_ns: 30.0,
            lifetime_ns: 8.05,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.snr > 0.0) {
            return Err(Error::param("snr", "must be positive"));
        }
        if !(self.pbs_extinction > 1.0) {
            return Err(Error::param("pbs_extinction", "must exceed 1"));
        }
        if !(self.window_ns > 0.0) {
            return Err(Error::param("window_ns", "must be positive"));
        }
        if !(self.lifetime_ns > 0.0) {
            return Err(Error::param("lifetime_ns", "must be positive"));
        }
        Ok(())
    }
}

/// Fraction of an exponential decay inside the detection window.
pub fn window_efficiency(p: &NoiseParams) -> Result<f64> {
    if !(p.lifetime_ns > 0.0) {
        return Err(Error::param("lifetime_ns", "must be positive"));
    }
    Ok(1.0 - (-p.window_ns.max(0.0) / p.lifetime_ns).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{max_abs_diff, PureState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn jitter_quadrature_sum() {
        let p = JitterParams::default();
        assert_abs_diff_eq!(jitter_total_rms(&p), 0.310, epsilon = 5e-4);
        let zero = JitterParams {
            awg_rms_ns: 0.0,
            transceiver_rms_ns: 0.0,
            ..p.clone()
        };
        assert_eq!(jitter_total_rms(&zero), 0.0);
        let tri = JitterParams {
            awg_rms_ns: 3.0,
            transceiver_rms_ns: 4.0,
            ..p
        };
        assert_abs_diff_eq!(jitter_total_rms(&tri), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn jitter_phase_and_infidelity() {
        let p = JitterParams::default();
        assert_abs_diff_eq!(p.phase_rms(), 2.19e-2, epsilon = 5e-5);
        let bell = PureState::bell(0.0);
        let out = DensityMatrix::from_pure(&bell)
            .apply(&jitter_dephasing_channel(&p).unwrap())
            .unwrap();
        let inf = 1.0 - out.fidelity(&bell).unwrap();
        assert_abs_diff_eq!(inf, 1.2e-4, epsilon = 5e-6);
        assert_abs_diff_eq!(inf, jitter_infidelity(&p), epsilon = 1e-14);
        // small-noise form ΔΦ²/4
        assert_abs_diff_eq!(inf, p.phase_rms().powi(2) / 4.0, epsilon = 1e-7);

        let zero = JitterParams {
            awg_rms_ns: 0.0,
            transceiver_rms_ns: 0.0,
            ..p
        };
        let rho = DensityMatrix::werner(&PureState::bell(0.2), 0.7).unwrap();
        let same = rho
            .apply(&jitter_dephasing_channel(&zero).unwrap())
            .unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn pbs_leakage() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::from_pure(&bell);
        let out = rho.apply(&pbs_bitflip_channel(3500.0).unwrap()).unwrap();
        assert_abs_diff_eq!(
            1.0 - out.fidelity(&bell).unwrap(),
            1.0 / 3500.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(1.0 / 3500.0, 2.9e-4, epsilon = 5e-6);
        let flipped = rho.apply(&pbs_bitflip_channel(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(flipped.fidelity(&bell).unwrap(), 0.0, epsilon = 1e-15);
        let ideal = rho
            .apply(&pbs_bitflip_channel(f64::INFINITY).unwrap())
            .unwrap();
        assert!(max_abs_diff(ideal.matrix(), rho.matrix()) < 1e-15);
        assert!(pbs_bitflip_channel(0.5).is_err());
    }

    #[test]
    fn dark_noise_cases() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::from_pure(&bell);
        let noisy = dark_noise_admixture(&rho, 28.0).unwrap();
        let inf = 1.0 - noisy.fidelity(&bell).unwrap();
        assert_abs_diff_eq!(inf, 0.75 / 29.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inf, 2.59e-2, epsilon = 5e-5);
        let clean = dark_noise_admixture(&rho, f64::INFINITY).unwrap();
        assert!(max_abs_diff(clean.matrix(), rho.matrix()) < 1e-15);
        let mixed = dark_noise_admixture(&rho, 0.0).unwrap();
        let target = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(max_abs_diff(mixed.matrix(), target.matrix()) < 1e-15);
        assert!(dark_noise_admixture(&DensityMatrix::maximally_mixed(2).unwrap(), 1.0).is_err());
    }

    #[test]
    fn window_cases() {
        let p = NoiseParams::default();
        assert_abs_diff_eq!(window_efficiency(&p).unwrap(), 0.976, epsilon = 5e-4);
        let zero = NoiseParams {
            window_ns: 0.0,
            ..p.clone()
        };
        assert_eq!(window_efficiency(&zero).unwrap(), 0.0);
        let half = NoiseParams {
            window_ns: p.lifetime_ns * std::f64::consts::LN_2,
            ..p.clone()
        };
        assert_abs_diff_eq!(window_efficiency(&half).unwrap(), 0.5, epsilon = 1e-15);
        assert!(window_efficiency(&NoiseParams {
            lifetime_ns: 0.0,
            ..p
        })
        .is_err());
    }
}
