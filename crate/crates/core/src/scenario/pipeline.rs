//! Analytic channel pipelines for the three tomography configurations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon_chain::{
    dark_noise_admixture, jitter_dephasing_channel, pbs_bitflip_channel, process_matrix_channel,
    ProcessMatrix,
};
use crate::qm_node::{storage_channel, storage_residual_channel};
use crate::qstate::{DensityMatrix, PureState, QuantumChannel, Subsystem};
use crate::ti_node::{decoherence_channel, emit_entangled_state};

use super::{ExperimentConfig, QfcProcess};

pub(crate) fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| Error::Config(vec![format!("{name}: section missing")]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineStep {
    pub channel: String,
    /// Fidelity with the target after this step.
    pub fidelity: f64,
    /// Fidelity lost in this step.
    pub infidelity: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub target: PureState,
    /// State reaching the detectors, before dark counts are mixed in.
    pub pre_detection: DensityMatrix,
    /// Including the dark-count admixture at `snr`.
    pub state: DensityMatrix,
    pub snr: f64,
    pub herald_probability: Option<f64>,
    pub steps: Vec<PipelineStep>,
}

impl PipelineOutput {
    pub fn fidelity(&self) -> f64 {
        self.state.fidelity(&self.target).expect("two-qubit state")
    }
}

struct Tracker {
    target: PureState,
    rho: DensityMatrix,
    last: f64,
    steps: Vec<PipelineStep>,
}

impl Tracker {
    fn new(target: PureState, rho: DensityMatrix) -> Self {
        let last = rho.fidelity(&target).expect("two-qubit state");
        Self {
            target,
            rho,
            last,
            steps: vec![],
        }
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let f = self.rho.fidelity(&self.target)?;
        self.steps.push(PipelineStep {
            channel: name.to_string(),
            fidelity: f,
            infidelity: self.last - f,
        });
        self.last = f;
        Ok(())
    }

    fn apply(&mut self, name: &str, ch: &QuantumChannel) -> Result<()> {
        self.rho = self.rho.apply(ch)?;
        self.record(name)
    }
}

/// Depolarizing weight whose Bell-state infidelity is `eps`: on a maximally
/// entangled pair either a one- or two-qubit depolarizer costs 3q/4.
fn depolarizing_for(eps: f64) -> f64 {
    (4.0 * eps / 3.0).min(1.0)
}

/// Emission through π-photon collection: the part every configuration
/// shares. The emission phase is compensated to φ = 0.
fn source(cfg: &ExperimentConfig, delay_us: f64) -> Result<Tracker> {
    let ion = section(&cfg.ion, "ion")?;
    let timing = section(&cfg.timing, "timing")?;
    let errors = section(&cfg.errors, "errors")?;
    let jitter = section(&cfg.jitter, "jitter")?;
    let t_ns = delay_us * 1e3;
    let psi = emit_entangled_state(ion, t_ns, ion.zeeman_phase(t_ns))?;
    let target = PureState::bell(0.0);
    let mut tr = Tracker::new(target, DensityMatrix::from_pure(&psi));
    tr.record("emission")?;
    tr.apply(
        "ion decoherence",
        &decoherence_channel(
            ion,
            delay_us + timing.mw_propagation_us,
            errors.decoherence_exponent,
        )?,
    )?;
    tr.apply("arrival-time jitter", &jitter_dephasing_channel(jitter)?)?;
    tr.apply(
        "pulse excitation",
        &QuantumChannel::depolarizing(4, depolarizing_for(errors.pulse_excitation))?,
    )?;
    tr.apply(
        "pi-photon collection",
        &QuantumChannel::depolarizing(2, depolarizing_for(errors.pi_collection))?
            .on(Subsystem::Photon)?,
    )?;
    Ok(tr)
}

fn qfc(tr: &mut Tracker, cfg: &ExperimentConfig) -> Result<()> {
    let errors = section(&cfg.errors, "errors")?;
    let chi = match section(&cfg.qfc, "qfc")?.process {
        QfcProcess::Depolarizing => ProcessMatrix::depolarizing(errors.qfc_fidelity)?,
        QfcProcess::Reference => ProcessMatrix::reference_conversion(),
    };
    tr.apply(
        "frequency conversion",
        &process_matrix_channel(&chi)?.on(Subsystem::Photon)?,
    )
}

/// PBS leakage, MW mapping, readout, then dark counts.
fn detect(
    mut tr: Tracker,
    cfg: &ExperimentConfig,
    snr: f64,
    herald: Option<f64>,
) -> Result<PipelineOutput> {
    let errors = section(&cfg.errors, "errors")?;
    let noise = section(&cfg.noise, "noise")?;
    tr.apply(
        "photon-state detection",
        &pbs_bitflip_channel(noise.pbs_extinction)?,
    )?;
    tr.apply(
        "MW rotation",
        &QuantumChannel::depolarizing(2, depolarizing_for(errors.mw_rotation))?
            .on(Subsystem::Ion)?,
    )?;
    tr.apply(
        "SPAM",
        &QuantumChannel::bit_flip(errors.spam)?.on(Subsystem::Ion)?,
    )?;
    let pre_detection = tr.rho.clone();
    tr.rho = dark_noise_admixture(&tr.rho, snr)?;
    tr.record("dark noise")?;
    Ok(PipelineOutput {
        target: tr.target,
        pre_detection,
        state: tr.rho,
        snr,
        herald_probability: herald,
        steps: tr.steps,
    })
}

pub fn ion_photon_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let timing = section(&cfg.timing, "timing")?;
    let snr = section(&cfg.snr, "snr")?.ion_photon;
    let tr = source(cfg, timing.ion_photon_delay_us)?;
    detect(tr, cfg, snr, None)
}

pub fn post_qfc_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let timing = section(&cfg.timing, "timing")?;
    let snr = section(&cfg.snr, "snr")?.post_qfc;
    let mut tr = source(cfg, timing.post_qfc_delay_us)?;
    qfc(&mut tr, cfg)?;
    detect(tr, cfg, snr, None)
}

/// Full link: conversion, heralded storage with post-selection on a
/// retrieved photon, residual storage error, detection.
pub fn ti_qm_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let timing = section(&cfg.timing, "timing")?;
    let storage = section(&cfg.storage, "storage")?;
    let snr = section(&cfg.noise, "noise")?.snr;
    let mut tr = source(cfg, timing.ti_qm_delay_us)?;
    qfc(&mut tr, cfg)?;
    let (stored, herald) = tr
        .rho
        .apply(&storage_channel(storage.eta_h, storage.eta_v)?)?
        .post_select()?;
    tr.rho = stored;
    tr.record("memory storage (heralded)")?;
    tr.apply(
        "memory residual",
        &storage_residual_channel(storage.residual_infidelity())?,
    )?;
    detect(tr, cfg, snr, Some(herald))
}
