//! Scenario configuration, the experiment runner and report output.

mod pipeline;
mod report;
mod run;

pub use pipeline::{
    ion_photon_pipeline, post_qfc_pipeline, ti_qm_pipeline, PipelineOutput, PipelineStep,
};
pub use report::{emit_report, Estimate, OutputFormat, RunReport, SweepPoint};
pub use run::run;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::{ErrorModelParams, LinkStages};
use crate::error::{Error, Result};
use crate::photon_chain::{JitterParams, NoiseParams};
use crate::qm_node::{CombParams, SpectralModel, StarkControl, StorageParams};
use crate::ti_node::{IonParams, SpamParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    IonPhoton,
    PostQfc,
    TiQm,
    Chsh,
    Budget,
    AfcSweep,
    BandwidthSweep,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::IonPhoton,
        Scenario::PostQfc,
        Scenario::TiQm,
        Scenario::Chsh,
        Scenario::Budget,
        Scenario::AfcSweep,
        Scenario::BandwidthSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::IonPhoton => "ion_photon",
            Scenario::PostQfc => "post_qfc",
            Scenario::TiQm => "ti_qm",
            Scenario::Chsh => "chsh",
            Scenario::Budget => "budget",
            Scenario::AfcSweep => "afc_sweep",
            Scenario::BandwidthSweep => "bandwidth_sweep",
        }
    }

    /// Config sections the scenario reads.
    fn required_sections(self) -> &'static [&'static str] {
        const PHOTON: &[&str] = &[
            "shots", "snr", "timing", "ion", "spam", "jitter", "noise", "errors",
        ];
        const QFC: &[&str] = &[
            "shots", "snr", "timing", "ion", "jitter", "noise", "errors", "qfc",
        ];
        const LINK: &[&str] = &[
            "shots", "snr", "timing", "ion", "jitter", "noise", "errors", "qfc", "storage", "comb",
            "stark", "spectral",
        ];
        const CHSH: &[&str] = &[
            "shots", "snr", "timing", "ion", "jitter", "noise", "errors", "qfc", "storage", "chsh",
        ];
        match self {
            Scenario::IonPhoton => PHOTON,
            Scenario::PostQfc => QFC,
            Scenario::TiQm => LINK,
            Scenario::Chsh => CHSH,
            Scenario::Budget => &[
                "timing", "ion", "jitter", "noise", "errors", "storage", "stages", "qfc", "snr",
            ],
            Scenario::AfcSweep => &["comb", "stark", "sweeps"],
            Scenario::BandwidthSweep => &["spectral", "sweeps"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown scenario '{s}'")]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotCounts {
    pub ion_photon: u64,
    pub post_qfc: u64,
    /// Heralded 580 nm detections used for tomography.
    pub ti_qm: u64,
    pub chsh: u64,
    pub bootstrap_resamples: usize,
}

impl Default for ShotCounts {
    fn default() -> Self {
        Self {
            ion_photon: 62_723,
            post_qfc: 2_714,
            ti_qm: 1_780,
            chsh: 3_634,
            bootstrap_resamples: 200,
        }
    }
}

/// Signal-to-noise ratio at the detectors of each configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrSettings {
    pub ion_photon: f64,
    pub post_qfc: f64,
}

impl Default for SnrSettings {
    fn default() -> Self {
        Self {
            ion_photon: 1800.0,
            post_qfc: 28.0,
        }
    }
}

/// Ion free-evolution times. Each photon delay is followed by the MW
/// propagation time before readout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub ion_photon_delay_us: f64,
    pub post_qfc_delay_us: f64,
    pub ti_qm_delay_us: f64,
    pub mw_propagation_us: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            ion_photon_delay_us: 0.5,
            post_qfc_delay_us: 1.66,
            ti_qm_delay_us: 2.66,
            mw_propagation_us: 0.51,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QfcProcess {
    /// Depolarizing χ with the ledger's conversion fidelity.
    #[default]
    Depolarizing,
    /// The bundled reconstructed process matrix.
    Reference,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfcSettings {
    pub process: QfcProcess,
}

/// Analyzer angles θ of cos θ·Z + sin θ·X.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshAngles {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl Default for ChshAngles {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            a0: PI / 2.0,
            a1: 0.0,
            b0: PI / 4.0,
            b1: 3.0 * PI / 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub afc_t_start_us: f64,
    pub afc_t_stop_us: f64,
    pub afc_points: usize,
    pub detuning_start_mhz: f64,
    pub detuning_stop_mhz: f64,
    pub detuning_points: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            afc_t_start_us: 0.5,
            afc_t_stop_us: 5.0,
            afc_points: 46,
            detuning_start_mhz: -60.0,
            detuning_stop_mhz: 60.0,
            detuning_points: 121,
        }
    }
}

/// A scenario config. Every section is optional in the file; the chosen
/// scenario decides which ones must be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub shots: Option<ShotCounts>,
    pub snr: Option<SnrSettings>,
    pub timing: Option<Timing>,
    pub ion: Option<IonParams>,
    pub spam: Option<SpamParams>,
    pub jitter: Option<JitterParams>,
    pub noise: Option<NoiseParams>,
    pub comb: Option<CombParams>,
    pub spectral: Option<SpectralModel>,
    pub stark: Option<StarkControl>,
    pub storage: Option<StorageParams>,
    pub qfc: Option<QfcSettings>,
    pub errors: Option<ErrorModelParams>,
    pub stages: Option<LinkStages>,
    pub chsh: Option<ChshAngles>,
    pub sweeps: Option<SweepSettings>,
}

impl ExperimentConfig {
    /// Every section filled with the reference parameter set.
    pub fn defaults() -> Self {
        Self {
            scenario: Some(Scenario::TiQm),
            master_seed: Some(20_251_016),
            output_dir: Some(PathBuf::from("out")),
            shots: Some(ShotCounts::default()),
            snr: Some(SnrSettings::default()),
            timing: Some(Timing::default()),
            ion: Some(IonParams::default()),
            spam: Some(SpamParams::default()),
            jitter: Some(JitterParams::default()),
            noise: Some(NoiseParams::default()),
            comb: Some(CombParams::default()),
            spectral: Some(SpectralModel::default()),
            stark: Some(StarkControl::default()),
            storage: Some(StorageParams::default()),
            qfc: Some(QfcSettings::default()),
            errors: Some(ErrorModelParams::default()),
            stages: Some(LinkStages::default()),
            chsh: Some(ChshAngles::default()),
            sweeps: Some(SweepSettings::default()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(vec![format!("config parse error: {e}")]))
    }

    fn has_section(&self, name: &str) -> bool {
        match name {
            "shots" => self.shots.is_some(),
            "snr" => self.snr.is_some(),
            "timing" => self.timing.is_some(),
            "ion" => self.ion.is_some(),
            "spam" => self.spam.is_some(),
            "jitter" => self.jitter.is_some(),
            "noise" => self.noise.is_some(),
            "comb" => self.comb.is_some(),
            "spectral" => self.spectral.is_some(),
            "stark" => self.stark.is_some(),
            "storage" => self.storage.is_some(),
            "qfc" => self.qfc.is_some(),
            "errors" => self.errors.is_some(),
            "stages" => self.stages.is_some(),
            "chsh" => self.chsh.is_some(),
            "sweeps" => self.sweeps.is_some(),
            _ => false,
        }
    }

    /// Collect every missing or invalid field instead of stopping at the
    /// first one.
    pub fn validate(&self) -> Result<Scenario> {
        let mut problems = Vec::new();
        let scenario = match self.scenario {
            Some(s) => Some(s),
            None => {
                problems.push("scenario: missing".to_string());
                None
            }
        };
        if self.master_seed.is_none() {
            problems.push("master_seed: missing (no implicit seed)".to_string());
        }
        if self.output_dir.is_none() {
            problems.push("output_dir: missing".to_string());
        }
        if let Some(s) = scenario {
            for section in s.required_sections() {
                if !self.has_section(section) {
                    problems.push(format!("{section}: section required by scenario {s}"));
                }
            }
        }
        let mut check = |section: &str, r: Result<()>| {
            if let Err(e) = r {
                problems.push(format!("{section}: {e}"));
            }
        };
        if let Some(x) = &self.ion {
            check("ion", x.validate());
        }
        if let Some(x) = &self.spam {
            check("spam", x.validate());
        }
        if let Some(x) = &self.jitter {
            check("jitter", x.validate());
        }
        if let Some(x) = &self.noise {
            check("noise", x.validate());
        }
        if let Some(x) = &self.comb {
            check("comb", x.validate());
        }
        if let Some(x) = &self.stark {
            check("stark", crate::qm_node::smafc_readout_time(x).map(|_| ()));
        }
        if let Some(x) = &self.spectral {
            check("spectral", validate_spectral(x));
        }
        if let Some(x) = &self.storage {
            check("storage", validate_storage(x));
        }
        if let Some(x) = &self.errors {
            check("errors", x.validate());
        }
        if let Some(x) = &self.stages {
            check("stages", x.validate());
        }
        if let Some(x) = &self.shots {
            check("shots", validate_shots(x));
        }
        if let Some(x) = &self.snr {
            check("snr", validate_snr(x));
        }
        if let Some(x) = &self.timing {
            check("timing", validate_timing(x));
        }
        if let Some(x) = &self.sweeps {
            check("sweeps", validate_sweeps(x));
        }
        if let Some(x) = &self.chsh {
            check("chsh", validate_angles(x));
        }
        if problems.is_empty() {
            Ok(scenario.expect("checked above"))
        } else {
            Err(Error::Config(problems))
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} must be positive")))
    }
}

fn validate_spectral(m: &SpectralModel) -> Result<()> {
    positive("gamma_natural", m.gamma_natural)?;
    positive("qm_bandwidth", m.qm_bandwidth)?;
    if !(m.zeeman_split >= 0.0 && m.zeeman_split.is_finite()) {
        return Err(Error::param("zeeman_split", "must be non-negative"));
    }
    if !m.detuning_df.is_finite() {
        return Err(Error::param("detuning_df", "must be finite"));
    }
    Ok(())
}

fn validate_storage(s: &StorageParams) -> Result<()> {
    for (name, v) in [("eta_h", s.eta_h), ("eta_v", s.eta_v)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::param(name, format!("{v} not in (0, 1]")));
        }
    }
    if s.probe_fidelities.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::param(
            "probe_fidelities",
            "entries must lie in [0, 1]",
        ));
    }
    Ok(())
}

fn validate_shots(s: &ShotCounts) -> Result<()> {
    for (name, v) in [
        ("ion_photon", s.ion_photon),
        ("post_qfc", s.post_qfc),
        ("ti_qm", s.ti_qm),
    ] {
        if v < 9 {
            return Err(Error::param(
                name,
                format!("{v} shots cannot cover the nine settings"),
            ));
        }
    }
    if s.chsh < 4 {
        return Err(Error::param(
            "chsh",
            "need at least one trial per analyzer pair",
        ));
    }
    if s.bootstrap_resamples < 100 {
        return Err(Error::param("bootstrap_resamples", "must be at least 100"));
    }
    Ok(())
}

fn validate_snr(s: &SnrSettings) -> Result<()> {
    positive("ion_photon", s.ion_photon)?;
    positive("post_qfc", s.post_qfc)
}

fn validate_timing(t: &Timing) -> Result<()> {
    for (name, v) in [
        ("ion_photon_delay_us", t.ion_photon_delay_us),
        ("post_qfc_delay_us", t.post_qfc_delay_us),
        ("ti_qm_delay_us", t.ti_qm_delay_us),
        ("mw_propagation_us", t.mw_propagation_us),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("{v} must be non-negative")));
        }
    }
    Ok(())
}

fn validate_sweeps(s: &SweepSettings) -> Result<()> {
    if s.afc_points < 2 || s.detuning_points < 2 {
        return Err(Error::param("points", "sweeps need at least two points"));
    }
    if !(s.afc_t_start_us > 0.0 && s.afc_t_stop_us > s.afc_t_start_us) {
        return Err(Error::param("afc_t", "need 0 < start < stop"));
    }
    if !(s.detuning_stop_mhz > s.detuning_start_mhz) {
        return Err(Error::param("detuning", "need start < stop"));
    }
    Ok(())
}

fn validate_angles(a: &ChshAngles) -> Result<()> {
    if [a.a0, a.a1, a.b0, a.b1].iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::param("chsh", "angles must be finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_scenario() {
        for s in Scenario::ALL {
            let cfg = ExperimentConfig {
                scenario: Some(s),
                ..ExperimentConfig::defaults()
            };
            assert_eq!(cfg.validate().unwrap(), s);
        }
    }

    #[test]
    fn all_problems_reported() {
        let mut cfg = ExperimentConfig {
            scenario: Some(Scenario::TiQm),
            ..Default::default()
        };
        cfg.noise = Some(NoiseParams {
            snr: -1.0,
            ..NoiseParams::default()
        });
        let Err(Error::Config(problems)) = cfg.validate() else {
            panic!("expected config error")
        };
        assert!(problems.iter().any(|p| p.starts_with("master_seed")));
        assert!(problems.iter().any(|p| p.starts_with("storage")));
        assert!(problems.iter().any(|p| p.starts_with("ion")));
        assert!(problems.iter().any(|p| p.starts_with("noise: invalid")));
        assert!(problems.len() >= 10, "{problems:?}");
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let cfg = ExperimentConfig::defaults();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert!(ExperimentConfig::from_json(r#"{"scenario": "ti_qm", "bogus": 1}"#).is_err());
        assert_eq!("afc_sweep".parse::<Scenario>().unwrap(), Scenario::AfcSweep);
        assert!("nope".parse::<Scenario>().is_err());
    }
}
