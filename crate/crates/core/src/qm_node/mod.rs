//! Atomic-frequency-comb memory: comb efficiency, Stark-controlled readout
//! timing, spectral matching to the ion photon, pump planning and the
//! heralded polarization-storage channel.

mod pump;
mod spectral;

pub use pump::{
    class_ix_config, effective_depth, plan_pump_regions, uniform_native_depth, DonorState,
    Interval, LevelOffset, PumpConfig, PumpPlan, SurvivingSegment, Transition,
};
pub use spectral::{
    adaptive_simpson, bandwidth_match, bandwidth_match_closed_form, spectral_density, SpectralModel,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{c, identity, kron, CMatrix, QuantumChannel, Subsystem};

/// √π / √(4 ln 2), the Gaussian-tooth shape factor.
pub fn gaussian_shape_factor() -> f64 {
    PI.sqrt() / (4.0 * 2f64.ln()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombParams {
    pub d: f64,
    pub finesse: f64,
    /// Tooth FWHM, kHz.
    pub gamma_comb_khz: f64,
    /// Total comb bandwidth, MHz.
    pub bandwidth_mhz: f64,
}

impl Default for CombParams {
    fn default() -> Self {
        Self {
            d: 10.5,
            finesse: 7.7,
            gamma_comb_khz: 259.8,
            bandwidth_mhz: 48.2,
        }
    }
}

impl CombParams {
    /// Tooth spacing Δ = 𝓕·γ in MHz.
    pub fn delta_mhz(&self) -> f64 {
        self.finesse * self.gamma_comb_khz * 1e-3
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(Error::param("d", "must be positive"));
        }
        if !(self.finesse > 0.0) {
            return Err(Error::param("finesse", "must be positive"));
        }
        if !(self.gamma_comb_khz >= 0.0) {
            return Err(Error::param("gamma_comb_khz", "must be non-negative"));
        }
        if !(self.bandwidth_mhz > self.delta_mhz()) {
            return Err(Error::param(
                "bandwidth_mhz",
                "must exceed the tooth spacing",
            ));
        }
        Ok(())
    }
}

/// η = B²(d/𝓕)²·exp(−B·d/𝓕 − 2πB²t²γ²).
pub fn afc_efficiency(comb: &CombParams, t_storage_ns: f64) -> Result<f64> {
    comb.validate()?;
    if !(t_storage_ns >= 0.0) {
        return Err(Error::param("t_storage_ns", "must be non-negative"));
    }
    let b = gaussian_shape_factor();
    let r = comb.d / comb.finesse;
    let tg = t_storage_ns * 1e-9 * comb.gamma_comb_khz * 1e3;
    Ok((b * b * r * r * (-b * r - 2.0 * PI * b * b * tg * tg).exp()).clamp(0.0, 1.0))
}

pub const MAX_READOUT_ORDER: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarkControl {
    /// kHz per (V/cm).
    pub shift_rate: f64,
    pub pulse_voltage: f64,
    pub pulse_duration_ns: f64,
    pub echo_period_ns: f64,
    pub readout_order_n: u32,
    pub first_pulse_start_ns: f64,
    /// Defaults to n·period − 150 ns when absent.
    #[serde(default)]
    pub second_pulse_start_ns: Option<f64>,
    pub second_pulse_reversed: bool,
}

impl Default for StarkControl {
    fn default() -> Self {
        Self {
            shift_rate: 5.80,
            pulse_voltage: 8.6,
            pulse_duration_ns: 100.0,
            echo_period_ns: 500.0,
            readout_order_n: 2,
            first_pulse_start_ns: 50.0,
            second_pulse_start_ns: None,
            second_pulse_reversed: true,
        }
    }
}

impl StarkControl {
    pub fn second_pulse_start(&self) -> f64 {
        self.second_pulse_start_ns
            .unwrap_or(self.readout_order_n as f64 * self.echo_period_ns - 150.0)
    }
}

/// Time of the recalled echo, n·period, after checking the pulse schedule.
pub fn smafc_readout_time(s: &StarkControl) -> Result<f64> {
    let n = s.readout_order_n;
    if !(1..=MAX_READOUT_ORDER).contains(&n) {
        return Err(Error::StarkSchedule(format!(
            "readout order {n} not in 1..={MAX_READOUT_ORDER}"
        )));
    }
    if !(s.echo_period_ns > 0.0 && s.pulse_duration_ns > 0.0) {
        return Err(Error::StarkSchedule(
            "echo period and pulse duration must be positive".into(),
        ));
    }
    let first_end = s.first_pulse_start_ns + s.pulse_duration_ns;
    if s.first_pulse_start_ns < 0.0 || first_end > s.echo_period_ns {
        return Err(Error::StarkSchedule(format!(
            "first pulse [{}, {first_end}] ns must end before the first echo at {} ns",
            s.first_pulse_start_ns, s.echo_period_ns
        )));
    }
    let start = s.second_pulse_start();
    let end = start + s.pulse_duration_ns;
    let window_lo = (n - 1) as f64 * s.echo_period_ns;
    let window_hi = n as f64 * s.echo_period_ns;
    if start <= window_lo || start < first_end || end > window_hi {
        return Err(Error::StarkSchedule(format!(
            "second pulse [{start}, {end}] ns must lie after the first pulse and within ({window_lo}, {window_hi}] ns"
        )));
    }
    if !s.second_pulse_reversed {
        return Err(Error::StarkSchedule(
            "second pulse must have reversed polarity".into(),
        ));
    }
    Ok(window_hi)
}

/// Linear Stark shift in kHz for a field in V/cm.
pub fn stark_splitting(e_field: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::param("rate", "must be positive"));
    }
    Ok(rate * e_field)
}

/// Mean magnitude of an asymmetric ± shift-rate pair.
pub fn mean_stark_rate(plus: f64, minus: f64) -> f64 {
    (plus.abs() + minus.abs()) / 2.0
}

/// Heralded storage: photon amplitudes scaled by (√η_H, √η_V). The output
/// trace is the herald probability.
pub fn storage_channel(eta_h: f64, eta_v: f64) -> Result<QuantumChannel> {
    for (name, v) in [("eta_h", eta_h), ("eta_v", eta_v)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param(name, format!("{v} not in [0, 1]")));
        }
    }
    let mut k = CMatrix::zeros(2, 2);
    k[(0, 0)] = c(eta_h.sqrt(), 0.0);
    k[(1, 1)] = c(eta_v.sqrt(), 0.0);
    QuantumChannel::new(vec![kron(&identity(2), &k)], false)
}

/// Phenomenological residual storage error: photon dephasing whose Bell-state
/// infidelity equals `infidelity`.
pub fn storage_residual_channel(infidelity: f64) -> Result<QuantumChannel> {
    if !(0.0..=0.5).contains(&infidelity) {
        return Err(Error::param(
            "storage residual infidelity",
            format!("{infidelity} not in [0, 0.5]"),
        ));
    }
    QuantumChannel::dephasing(1.0 - 2.0 * infidelity)?.on(Subsystem::Photon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageParams {
    pub eta_h: f64,
    pub eta_v: f64,
    /// Probe-state fidelities of the memory alone.
    pub probe_fidelities: Vec<f64>,
}

impl Default for StorageParams {
    fn default() -> Self {
        Self {
            eta_h: 0.195,
            eta_v: 0.183,
            probe_fidelities: vec![0.9997, 0.9990, 0.9981, 0.9934],
        }
    }
}

impl StorageParams {
    pub fn residual_infidelity(&self) -> f64 {
        if self.probe_fidelities.is_empty() {
            return 0.0;
        }
        self.probe_fidelities.iter().map(|f| 1.0 - f).sum::<f64>()
            / self.probe_fidelities.len() as f64
    }
}
