//! Photon efficiency chains, entanglement rates and the infidelity ledger.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_chain::{dark_noise_fraction, jitter_infidelity, JitterParams, NoiseParams};
use crate::qm_node::StorageParams;
use crate::ti_node::{decoherence_infidelity, IonParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyStage {
    pub name: String,
    pub value: f64,
    /// (η_H, η_V) when the stage treats the two polarizations differently.
    #[serde(default)]
    pub polarization_dependent: Option<(f64, f64)>,
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "stage",
            reason: format!("{name}: {v} not in (0, 1]"),
        });
    }
    Ok(())
}

impl EfficiencyStage {
    pub fn new(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            polarization_dependent: None,
        }
    }

    pub fn with_pair(name: &str, value: f64, h: f64, v: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            polarization_dependent: Some((h, v)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(&self.name, self.value)?;
        if let Some((h, v)) = self.polarization_dependent {
            check_probability(&self.name, h)?;
            check_probability(&self.name, v)?;
        }
        Ok(())
    }

    /// Pair average, or one arm of the pair, falling back to `value`.
    pub fn value_for(&self, pol: Option<Polarization>) -> f64 {
        match (self.polarization_dependent, pol) {
            (None, _) => self.value,
            (Some((h, v)), None) => 0.5 * (h + v),
            (Some((h, _)), Some(Polarization::H)) => h,
            (Some((_, v)), Some(Polarization::V)) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prefactor {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateChain {
    pub name: String,
    pub stages: Vec<EfficiencyStage>,
    pub repetition_rate_hz: f64,
    #[serde(default)]
    pub prefactors: Vec<Prefactor>,
}

impl RateChain {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Empty("rate chain stages"));
        }
        if !(self.repetition_rate_hz > 0.0 && self.repetition_rate_hz.is_finite()) {
            return Err(Error::param(
                "repetition_rate_hz",
                format!("{} must be positive", self.repetition_rate_hz),
            ));
        }
        for s in &self.stages {
            s.validate()?;
        }
        for p in &self.prefactors {
            if !(p.value > 0.0 && p.value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "prefactor",
                    reason: format!("{}: {}", p.name, p.value),
                });
            }
        }
        Ok(())
    }
}

/// Repetition rate × prefactors × stage values.
pub fn rate(chain: &RateChain) -> Result<f64> {
    chain.validate()?;
    let pre: f64 = chain.prefactors.iter().map(|p| p.value).product();
    let eta: f64 = chain.stages.iter().map(|s| s.value).product();
    Ok(chain.repetition_rate_hz * pre * eta)
}

pub fn end_to_end_efficiency(stages: &[EfficiencyStage], pol: Option<Polarization>) -> Result<f64> {
    if stages.is_empty() {
        return Err(Error::Empty("efficiency stages"));
    }
    for s in stages {
        s.validate()?;
    }
    Ok(stages.iter().map(|s| s.value_for(pol)).product())
}

/// Returns (SNR, p) with p = 1/(SNR + 1); zero noise gives (∞, 0).
pub fn snr_and_noise_rate(signal_rate_hz: f64, noise_rate_hz: f64) -> Result<(f64, f64)> {
    if !(signal_rate_hz >= 0.0 && signal_rate_hz.is_finite()) {
        return Err(Error::param("signal_rate_hz", "must be non-negative"));
    }
    if !(noise_rate_hz >= 0.0 && noise_rate_hz.is_finite()) {
        return Err(Error::param("noise_rate_hz", "must be non-negative"));
    }
    if noise_rate_hz == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let snr = signal_rate_hz / noise_rate_hz;
    Ok((snr, 1.0 / (snr + 1.0)))
}

/// Stage values of the ion, conversion and memory links.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkStages {
    pub branching_prefactor: f64,
    pub r_exp1_hz: f64,
    pub r_exp2_hz: f64,
    pub r_exp3_hz: f64,
    pub p_pi: EfficiencyStage,
    pub p_s12: EfficiencyStage,
    pub qe_369: EfficiencyStage,
    pub t_fib1: EfficiencyStage,
    pub t_opt: EfficiencyStage,
    pub e_obj: EfficiencyStage,
    pub eta_369: EfficiencyStage,
    pub eta_conv: EfficiencyStage,
    pub t_580: EfficiencyStage,
    pub t_fib2: EfficiencyStage,
    pub eta_aom: EfficiencyStage,
    pub qe_580: EfficiencyStage,
    pub eta_bw: EfficiencyStage,
    pub eta_storage: EfficiencyStage,
    /// Count rates used for the SNR figure.
    pub signal_rate_hz: f64,
    pub noise_rate_hz: f64,
}

impl Default for LinkStages {
    fn default() -> Self {
        Self {
            branching_prefactor: 2.0 / 3.0,
            r_exp1_hz: 250e3,
            r_exp2_hz: 194e3,
            r_exp3_hz: 162e3,
            p_pi: EfficiencyStage::new("P_pi", 0.960),
            p_s12: EfficiencyStage::new("P_S1/2", 0.995),
            qe_369: EfficiencyStage::new("QE_369", 0.35),
            t_fib1: EfficiencyStage::new("T_fib1", 0.27),
            t_opt: EfficiencyStage::new("T_opt", 0.9),
            e_obj: EfficiencyStage::new("E_obj", 0.0999),
            eta_369: EfficiencyStage::new("eta_369", 0.708),
            eta_conv: EfficiencyStage::with_pair("eta_conv", 0.007, 0.0070, 0.0075),
            t_580: EfficiencyStage::new("T_580", 0.478),
            t_fib2: EfficiencyStage::new("T_fib2", 0.40),
            eta_aom: EfficiencyStage::new("eta_AOM", 0.80),
            qe_580: EfficiencyStage::new("QE_580", 0.80),
            eta_bw: EfficiencyStage::new("eta_bw", 0.74),
            eta_storage: EfficiencyStage::with_pair("eta_storage", 0.189, 0.195, 0.183),
            signal_rate_hz: 0.2,
            noise_rate_hz: 0.007,
        }
    }
}

impl LinkStages {
    fn ion_stages(&self) -> Vec<EfficiencyStage> {
        vec![
            self.p_pi.clone(),
            self.p_s12.clone(),
            self.t_fib1.clone(),
            self.t_opt.clone(),
            self.e_obj.clone(),
        ]
    }

    pub fn qfc_stages(&self) -> Vec<EfficiencyStage> {
        vec![
            self.eta_369.clone(),
            self.eta_conv.clone(),
            self.t_580.clone(),
            self.t_fib2.clone(),
            self.eta_aom.clone(),
        ]
    }

    pub fn qm_stages(&self) -> Vec<EfficiencyStage> {
        vec![self.eta_bw.clone(), self.eta_storage.clone()]
    }

    /// Every stage between the 369 nm conversion input and memory retrieval.
    pub fn overall_stages(&self) -> Vec<EfficiencyStage> {
        let mut s = self.qfc_stages();
        s.extend(self.qm_stages());
        s
    }

    fn prefactors(&self) -> Vec<Prefactor> {
        vec![Prefactor {
            name: "branching".into(),
            value: self.branching_prefactor,
        }]
    }

    pub fn r369_chain(&self) -> RateChain {
        let mut stages = self.ion_stages();
        stages.push(self.qe_369.clone());
        RateChain {
            name: "R_369".into(),
            stages,
            repetition_rate_hz: self.r_exp1_hz,
            prefactors: self.prefactors(),
        }
    }

    pub fn r580_chain(&self) -> RateChain {
        let mut stages = self.ion_stages();
        stages.extend(self.qfc_stages());
        stages.push(self.qe_580.clone());
        RateChain {
            name: "R_580".into(),
            stages,
            repetition_rate_hz: self.r_exp2_hz,
            prefactors: self.prefactors(),
        }
    }

    pub fn r_ti_qm_chain(&self) -> RateChain {
        let mut stages = self.ion_stages();
        stages.extend(self.overall_stages());
        stages.push(self.qe_580.clone());
        RateChain {
            name: "R_TI-QM".into(),
            stages,
            repetition_rate_hz: self.r_exp3_hz,
            prefactors: self.prefactors(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in [self.r369_chain(), self.r_ti_qm_chain()] {
            c.validate()?;
        }
        for (name, v) in [
            ("r_exp2_hz", self.r_exp2_hz),
            ("branching_prefactor", self.branching_prefactor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        snr_and_noise_rate(self.signal_rate_hz, self.noise_rate_hz)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub r369_hz: f64,
    pub eta_qfc: f64,
    pub r580_hz: f64,
    pub eta_qm: f64,
    pub r_ti_qm_hz: f64,
    /// η_QFC·η_QM with polarization pairs averaged.
    pub eta_overall: f64,
    pub eta_overall_h: f64,
    pub eta_overall_v: f64,
    pub snr: f64,
    pub noise_fraction: f64,
}

pub fn rate_report(s: &LinkStages) -> Result<RateReport> {
    s.validate()?;
    let (snr, noise_fraction) = snr_and_noise_rate(s.signal_rate_hz, s.noise_rate_hz)?;
    Ok(RateReport {
        r369_hz: rate(&s.r369_chain())?,
        eta_qfc: s.qfc_stages().iter().map(|x| x.value).product(),
        r580_hz: rate(&s.r580_chain())?,
        eta_qm: s.qm_stages().iter().map(|x| x.value).product(),
        r_ti_qm_hz: rate(&s.r_ti_qm_chain())?,
        eta_overall: end_to_end_efficiency(&s.overall_stages(), None)?,
        eta_overall_h: end_to_end_efficiency(&s.overall_stages(), Some(Polarization::H))?,
        eta_overall_v: end_to_end_efficiency(&s.overall_stages(), Some(Polarization::V))?,
        snr,
        noise_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelRef {
    Scalar,
    Operation(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSource {
    pub name: String,
    pub infidelity: f64,
    pub model_ref: ModelRef,
}

impl ErrorSource {
    pub fn new(name: &str, infidelity: f64, model_ref: ModelRef) -> Result<Self> {
        if !(0.0..=1.0).contains(&infidelity) {
            return Err(Error::InvalidParameter {
                name: "infidelity",
                reason: format!("{name}: {infidelity} not in [0, 1]"),
            });
        }
        Ok(Self {
            name: name.to_string(),
            infidelity,
            model_ref,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    #[default]
    Sum,
    Product,
}

pub fn total_infidelity(sources: &[ErrorSource], mode: Composition) -> Result<f64> {
    if sources.is_empty() {
        return Err(Error::Empty("error sources"));
    }
    Ok(match mode {
        Composition::Sum => sources.iter().map(|s| s.infidelity).sum(),
        Composition::Product => 1.0 - sources.iter().map(|s| 1.0 - s.infidelity).product::<f64>(),
    })
}

/// Error contributions that enter as measured scalars plus the few knobs of
/// the modelled rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErrorModelParams {
    pub decoherence_exponent: f64,
    pub spam: f64,
    pub mw_rotation: f64,
    /// Bell-state fidelity surviving the conversion process.
    pub qfc_fidelity: f64,
    pub pulse_excitation: f64,
    pub pi_collection: f64,
}

impl Default for ErrorModelParams {
    fn default() -> Self {
        Self {
            decoherence_exponent: 2.0,
            spam: 0.007,
            mw_rotation: 0.001,
            qfc_fidelity: 0.969,
            pulse_excitation: 0.033,
            pi_collection: 0.005,
        }
    }
}

impl ErrorModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(1.0..=3.0).contains(&self.decoherence_exponent) {
            return Err(Error::param("decoherence_exponent", "must lie in [1, 3]"));
        }
        for (name, v) in [
            ("spam", self.spam),
            ("mw_rotation", self.mw_rotation),
            ("qfc_fidelity", self.qfc_fidelity),
            ("pulse_excitation", self.pulse_excitation),
            ("pi_collection", self.pi_collection),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// The ten ledger rows, each from its channel model where one exists.
/// `decoherence_time_us` is the ion's free evolution before readout.
pub fn error_ledger(
    decoherence_time_us: f64,
    ion: &IonParams,
    jitter: &JitterParams,
    noise: &NoiseParams,
    storage: &StorageParams,
    m: &ErrorModelParams,
) -> Result<Vec<ErrorSource>> {
    ion.validate()?;
    jitter.validate()?;
    noise.validate()?;
    m.validate()?;
    if !(decoherence_time_us >= 0.0) {
        return Err(Error::param("decoherence_time_us", "must be non-negative"));
    }
    let op = |s: &str| ModelRef::Operation(s.to_string());
    vec![
        ErrorSource::new(
            "Ion decoherence",
            decoherence_infidelity(ion, decoherence_time_us, m.decoherence_exponent),
            op("decoherence_channel"),
        ),
        ErrorSource::new(
            "Arrival-time jitter phase",
            jitter_infidelity(jitter),
            op("jitter_dephasing_channel"),
        ),
        ErrorSource::new("SPAM", m.spam, ModelRef::Scalar),
        ErrorSource::new("MW rotation", m.mw_rotation, ModelRef::Scalar),
        ErrorSource::new("QFC", 1.0 - m.qfc_fidelity, op("process_matrix_channel")),
        ErrorSource::new("Pulse excitation", m.pulse_excitation, ModelRef::Scalar),
        ErrorSource::new("Pi-photon collection", m.pi_collection, ModelRef::Scalar),
        ErrorSource::new(
            "Dark noise",
            0.75 * dark_noise_fraction(noise.snr),
            op("dark_noise_admixture"),
        ),
        ErrorSource::new(
            "Photon-state detection",
            1.0 / noise.pbs_extinction,
            op("pbs_bitflip_channel"),
        ),
        ErrorSource::new(
            "QM storage",
            storage.residual_infidelity(),
            op("storage_residual_channel"),
        ),
    ]
    .into_iter()
    .collect()
}

fn model_label(m: &ModelRef) -> &str {
    match m {
        ModelRef::Scalar => "scalar",
        ModelRef::Operation(s) => s,
    }
}

/// Ledger rows in percent plus sum and product totals.
pub fn write_ledger_csv<W: Write>(sources: &[ErrorSource], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "infidelity_percent", "model"])?;
    for s in sources {
        w.write_record([
            s.name.as_str(),
            &format!("{:.6e}", s.infidelity * 100.0),
            model_label(&s.model_ref),
        ])?;
    }
    for (label, mode) in [
        ("Total (sum)", Composition::Sum),
        ("Total (product)", Composition::Product),
    ] {
        w.write_record([
            label,
            &format!("{:.6e}", total_infidelity(sources, mode)? * 100.0),
            "",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Stage efficiencies in percent, H and V columns, and the overall product.
pub fn write_stages_csv<W: Write>(stages: &[EfficiencyStage], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "H_percent", "V_percent"])?;
    for s in stages {
        let h = s.value_for(Some(Polarization::H)) * 100.0;
        let v = s.value_for(Some(Polarization::V)) * 100.0;
        w.write_record([s.name.as_str(), &format!("{h:.6}"), &format!("{v:.6}")])?;
    }
    let h = end_to_end_efficiency(stages, Some(Polarization::H))? * 100.0;
    let v = end_to_end_efficiency(stages, Some(Polarization::V))? * 100.0;
    w.write_record(["eta_overall", &format!("{h:.6}"), &format!("{v:.6}")])?;
    w.flush()?;
    Ok(())
}

pub fn write_rates_csv<W: Write>(r: &RateReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "value"])?;
    for (k, v) in [
        ("R_369_Hz", r.r369_hz),
        ("eta_QFC", r.eta_qfc),
        ("R_580_Hz", r.r580_hz),
        ("eta_QM", r.eta_qm),
        ("R_TI-QM_Hz", r.r_ti_qm_hz),
        ("eta_overall", r.eta_overall),
        ("eta_overall_H", r.eta_overall_h),
        ("eta_overall_V", r.eta_overall_v),
        ("SNR", r.snr),
        ("noise_fraction", r.noise_fraction),
    ] {
        w.write_record([k, &format!("{v:.9e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ledger() -> Vec<ErrorSource> {
        error_ledger(
            2.66 + 0.51,
            &IonParams::default(),
            &JitterParams::default(),
            &NoiseParams::default(),
            &StorageParams::default(),
            &ErrorModelParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn r369_from_stage_values() {
        // hand product of the same stage values
        let expect = 2.0 / 3.0 * 0.960 * 250e3 * 0.995 * 0.35 * 0.27 * 0.9 * 0.0999;
        let r = rate_report(&LinkStages::default()).unwrap();
        assert_relative_eq!(r.r369_hz, expect, max_relative = 1e-12);
        assert_relative_eq!(r.r369_hz, 1352.0, max_relative = 0.02);
    }

    #[test]
    fn r580_matches_ratio_form() {
        let r = rate_report(&LinkStages::default()).unwrap();
        let eta_qfc = 0.708 * 0.007 * 0.478 * 0.4 * 0.8;
        assert_relative_eq!(r.eta_qfc, eta_qfc, max_relative = 1e-12);
        let ratio_form = 0.8 / 0.35 * r.r369_hz * (194.0 / 250.0) * eta_qfc;
        assert_relative_eq!(r.r580_hz, ratio_form, max_relative = 1e-12);
        assert_relative_eq!(r.r580_hz, 1.8, max_relative = 0.05);
        let ti_qm = r.r580_hz * (162.0 / 194.0) * 0.74 * 0.189;
        assert_relative_eq!(r.r_ti_qm_hz, ti_qm, max_relative = 1e-12);
    }

    #[test]
    fn qm_efficiency_for_h() {
        let s = LinkStages::default();
        let eta = end_to_end_efficiency(&s.qm_stages(), Some(Polarization::H)).unwrap();
        assert_relative_eq!(eta, 0.74 * 0.195, max_relative = 1e-12);
        assert_relative_eq!(eta, 0.144, max_relative = 0.01);
    }

    #[test]
    fn trivial_chains() {
        let chain = RateChain {
            name: "unit".into(),
            stages: vec![
                EfficiencyStage::new("a", 1.0),
                EfficiencyStage::new("b", 1.0),
            ],
            repetition_rate_hz: 1234.0,
            prefactors: vec![],
        };
        assert_eq!(rate(&chain).unwrap(), 1234.0);
        assert_eq!(
            end_to_end_efficiency(&[EfficiencyStage::new("x", 0.5)], None).unwrap(),
            0.5
        );
        let empty = RateChain {
            stages: vec![],
            ..chain
        };
        assert!(rate(&empty).is_err());
        assert!(end_to_end_efficiency(&[EfficiencyStage::new("x", 0.0)], None).is_err());
    }

    #[test]
    fn composition_modes() {
        let one = [ErrorSource::new("a", 0.07, ModelRef::Scalar).unwrap()];
        assert_eq!(total_infidelity(&one, Composition::Sum).unwrap(), 0.07);
        assert_relative_eq!(
            total_infidelity(&one, Composition::Product).unwrap(),
            0.07,
            max_relative = 1e-15
        );
        let two = [
            ErrorSource::new("a", 0.1, ModelRef::Scalar).unwrap(),
            ErrorSource::new("b", 0.1, ModelRef::Scalar).unwrap(),
        ];
        assert_relative_eq!(
            total_infidelity(&two, Composition::Sum).unwrap(),
            0.2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            total_infidelity(&two, Composition::Product).unwrap(),
            0.19,
            max_relative = 1e-14
        );
        assert!(total_infidelity(&[], Composition::Sum).is_err());
        assert!(ErrorSource::new("bad", 1.5, ModelRef::Scalar).is_err());
    }

    #[test]
    fn snr_cases() {
        let (snr, p) = snr_and_noise_rate(0.2, 0.007).unwrap();
        assert_relative_eq!(snr, 28.571428571428573, max_relative = 1e-12);
        assert_relative_eq!(p, 1.0 / (snr + 1.0), max_relative = 1e-15);
        assert_eq!(snr_and_noise_rate(3.0, 3.0).unwrap(), (1.0, 0.5));
        let (snr, p) = snr_and_noise_rate(0.2, 0.0).unwrap();
        assert!(snr.is_infinite() && p == 0.0);
        assert!(snr_and_noise_rate(0.2, -1.0).is_err());
    }

    #[test]
    fn ledger_rows() {
        let rows = ledger();
        assert_eq!(rows.len(), 10);
        let get = |n: &str| rows.iter().find(|r| r.name == n).unwrap().infidelity;
        // 3/4 of the white-noise weight 1/(snr+1)
        assert_relative_eq!(get("Dark noise"), 0.75 / 29.0, max_relative = 1e-12);
        assert_relative_eq!(
            get("Photon-state detection"),
            1.0 / 3500.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(get("QM storage"), 0.00245, max_relative = 1e-9);
        let total = total_infidelity(&rows, Composition::Sum).unwrap();
        assert!((total - 0.106).abs() < 0.001, "{total}");
        assert!(total_infidelity(&rows, Composition::Product).unwrap() < total);
    }

    #[test]
    fn csv_outputs_are_stable() {
        let rows = ledger();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_ledger_csv(&rows, &mut a).unwrap();
        write_ledger_csv(&rows, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 13);
        let mut stages = Vec::new();
        write_stages_csv(&LinkStages::default().overall_stages(), &mut stages).unwrap();
        let text = String::from_utf8(stages).unwrap();
        assert!(text.contains("eta_storage,19.500000,18.300000"));
        let mut rates = Vec::new();
        write_rates_csv(&rate_report(&LinkStages::default()).unwrap(), &mut rates).unwrap();
        assert!(String::from_utf8(rates)
            .unwrap()
            .starts_with("quantity,value\nR_369_Hz,"));
    }

    #[test]
    fn stage_validation() {
        let mut s = LinkStages::default();
        s.eta_storage.polarization_dependent = Some((0.2, 1.3));
        assert!(s.validate().is_err());
        let json = serde_json::to_string(&LinkStages::default()).unwrap();
        let back: LinkStages = serde_json::from_str(&json).unwrap();
        assert_eq!(back, LinkStages::default());
    }
}
