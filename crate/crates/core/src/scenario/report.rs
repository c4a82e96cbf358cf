use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::budget::{
    write_ledger_csv, write_rates_csv, write_stages_csv, EfficiencyStage, ErrorSource, RateReport,
};
use crate::error::{Error, Result};
use crate::qstate::io::MatrixJson;
use crate::tomography::{write_records_csv, CountRecord, SettingCorrelation};

use super::pipeline::PipelineStep;
use super::Scenario;

/// A reported number with its uncertainty, or tagged exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stddev: Option<f64>,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stddev: None,
            exact: true,
        }
    }

    pub fn sampled(value: f64, stddev: f64) -> Self {
        Self {
            value,
            stddev: Some(stddev),
            exact: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshSummary {
    pub angles: [f64; 4],
    pub s: Estimate,
    pub analytic_s: Estimate,
    /// Best S over all local analyzers for the analytic state.
    pub optimal_s: Estimate,
    /// 2√2·p for the Werner state with the analytic fidelity.
    pub werner_s: Estimate,
    pub trials: u64,
    pub correlations: Vec<SettingCorrelation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemorySummary {
    pub storage_time_ns: f64,
    pub afc_efficiency: Estimate,
    pub bandwidth_match: Option<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReadoutSummary {
    pub dark_fidelity: Estimate,
    pub bright_fidelity: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetSummary {
    pub rows: Vec<ErrorSource>,
    pub total_sum: f64,
    pub total_product: f64,
    /// 1 − sum-mode total.
    pub predicted_fidelity: f64,
    /// Analytic fidelity of the composed channel pipeline.
    pub pipeline_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub y: f64,
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub x_label: String,
    pub y_label: String,
    pub reference_label: Option<String>,
    pub points: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub shots: Option<u64>,
    pub matrix: Option<MatrixJson>,
    pub analytic_matrix: Option<MatrixJson>,
    pub fidelity: Option<Estimate>,
    pub analytic_fidelity: Option<Estimate>,
    pub herald_probability: Option<Estimate>,
    pub chsh: Option<ChshSummary>,
    pub memory: Option<MemorySummary>,
    pub readout: Option<ReadoutSummary>,
    pub rates: Option<RateReport>,
    pub budget: Option<BudgetSummary>,
    pub stages: Option<Vec<EfficiencyStage>>,
    pub breakdown: Option<Vec<PipelineStep>>,
    pub counts: Option<Vec<CountRecord>>,
    pub sweep: Option<Sweep>,
    /// Wall time; kept out of the serialized report so reruns compare equal.
    #[serde(skip)]
    pub runtime: Duration,
}

impl RunReport {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            shots: None,
            matrix: None,
            analytic_matrix: None,
            fidelity: None,
            analytic_fidelity: None,
            herald_probability: None,
            chsh: None,
            memory: None,
            readout: None,
            rates: None,
            budget: None,
            stages: None,
            breakdown: None,
            counts: None,
            sweep: None,
            runtime: Duration::ZERO,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn file_name(&self, suffix: &str) -> String {
        format!("{}_seed{}_{suffix}", self.scenario, self.seed)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    All,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "all" => Ok(Self::All),
            other => Err(Error::Config(vec![format!(
                "format: unknown '{other}' (json, csv, all)"
            )])),
        }
    }
}

fn write_sweep_csv(sweep: &Sweep, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![sweep.x_label.clone(), sweep.y_label.clone()];
    header.extend(sweep.reference_label.clone());
    w.write_record(&header)?;
    for p in &sweep.points {
        let mut row = vec![format!("{:.6}", p.x), format!("{:.9}", p.y)];
        if sweep.reference_label.is_some() {
            row.push(p.reference.map(|r| format!("{r:.9}")).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the report files into `dir` and return their paths.
pub fn emit_report(report: &RunReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = |suffix: &str| dir.join(report.file_name(suffix));
    if matches!(format, OutputFormat::Json | OutputFormat::All) {
        let p = path("summary.json");
        fs::write(&p, report.to_json()? + "\n")?;
        written.push(p);
        if let Some(m) = &report.matrix {
            let p = path("matrix.json");
            fs::write(
                &p,
                serde_json::to_string_pretty(&m.clone().with_basis("ion-photon"))? + "\n",
            )?;
            written.push(p);
        }
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::All) {
        if let Some(b) = &report.budget {
            let p = path("budget.csv");
            write_ledger_csv(&b.rows, fs::File::create(&p)?)?;
            written.push(p);
        }
        if let Some(s) = &report.stages {
            let p = path("stages.csv");
            write_stages_csv(s, fs::File::create(&p)?)?;
            written.push(p);
        }
        if let Some(r) = &report.rates {
            let p = path("rates.csv");
            write_rates_csv(r, fs::File::create(&p)?)?;
            written.push(p);
        }
        if let Some(c) = &report.counts {
            let p = path("counts.csv");
            write_records_csv(c, fs::File::create(&p)?)?;
            written.push(p);
        }
        if let Some(s) = &report.sweep {
            let p = path("sweep.csv");
            write_sweep_csv(s, &p)?;
            written.push(p);
        }
    }
    Ok(written)
}
