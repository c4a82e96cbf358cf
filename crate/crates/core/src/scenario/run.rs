use std::f64::consts::SQRT_2;
use std::time::Instant;

use rand::RngCore;

use crate::budget::{error_ledger, rate_report, total_infidelity, Composition};
use crate::error::Result;
use crate::qm_node::{
    afc_efficiency, bandwidth_match, bandwidth_match_closed_form, smafc_readout_time, SpectralModel,
};
use crate::qstate::io::MatrixJson;
use crate::rng::child_rng;
use crate::ti_node::readout_fidelities;
use crate::tomography::{
    bootstrap_uncertainty, chsh, chsh_optimal, even_split, mle_reconstruct, simulate_chsh,
    simulate_tomography, ChshSettings, Statistic,
};

use super::pipeline::{
    ion_photon_pipeline, post_qfc_pipeline, section, ti_qm_pipeline, PipelineOutput,
};
use super::report::{
    BudgetSummary, ChshSummary, Estimate, MemorySummary, ReadoutSummary, RunReport, Sweep,
    SweepPoint,
};
use super::{ExperimentConfig, Scenario};

const READOUT_SHOTS: u64 = 10_000;

/// Independent seed for one consumer of the master seed.
fn sub_seed(master: u64, stream: u64) -> u64 {
    child_rng(master, stream).next_u64()
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

fn tomography(
    report: &mut RunReport,
    out: &PipelineOutput,
    shots: u64,
    resamples: usize,
    seed: u64,
) -> Result<()> {
    let records = simulate_tomography(
        &out.pre_detection,
        &even_split(shots),
        out.snr,
        sub_seed(seed, 1),
    )?;
    let rho = mle_reconstruct(&records)?;
    let (_, sd) = bootstrap_uncertainty(
        &records,
        resamples,
        &Statistic::Fidelity(out.target.clone()),
        sub_seed(seed, 2),
    )?;
    report.shots = Some(shots);
    report.fidelity = Some(Estimate::sampled(rho.fidelity(&out.target)?, sd));
    report.matrix = Some(MatrixJson::from(&rho));
    report.counts = Some(records);
    analytic(report, out);
    Ok(())
}

fn analytic(report: &mut RunReport, out: &PipelineOutput) {
    report.analytic_fidelity = Some(Estimate::exact(out.fidelity()));
    report.analytic_matrix = Some(MatrixJson::from(&out.state));
    report.herald_probability = out.herald_probability.map(Estimate::exact);
    report.breakdown = Some(out.steps.clone());
}

fn memory(cfg: &ExperimentConfig) -> Result<MemorySummary> {
    let t = smafc_readout_time(section(&cfg.stark, "stark")?)?;
    Ok(MemorySummary {
        storage_time_ns: t,
        afc_efficiency: Estimate::exact(afc_efficiency(section(&cfg.comb, "comb")?, t)?),
        bandwidth_match: Some(Estimate::exact(bandwidth_match(section(
            &cfg.spectral,
            "spectral",
        )?)?)),
    })
}

fn binomial_estimate(p: f64, n: u64) -> Estimate {
    Estimate::sampled(p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Execute the configured scenario. Deterministic for a fixed config.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let scenario = cfg.validate()?;
    let seed = cfg.master_seed.expect("validated");
    let start = Instant::now();
    let mut report = RunReport::new(scenario, seed);
    log::info!("running {scenario} with seed {seed}");
    match scenario {
        Scenario::IonPhoton | Scenario::PostQfc | Scenario::TiQm => {
            let shots = section(&cfg.shots, "shots")?;
            let (out, n) = match scenario {
                Scenario::IonPhoton => (ion_photon_pipeline(cfg)?, shots.ion_photon),
                Scenario::PostQfc => (post_qfc_pipeline(cfg)?, shots.post_qfc),
                _ => (ti_qm_pipeline(cfg)?, shots.ti_qm),
            };
            tomography(&mut report, &out, n, shots.bootstrap_resamples, seed)?;
            if scenario == Scenario::IonPhoton {
                let (dark, bright) = readout_fidelities(
                    section(&cfg.spam, "spam")?,
                    READOUT_SHOTS,
                    sub_seed(seed, 3),
                );
                report.readout = Some(ReadoutSummary {
                    dark_fidelity: binomial_estimate(dark, READOUT_SHOTS),
                    bright_fidelity: binomial_estimate(bright, READOUT_SHOTS),
                });
            }
            if scenario == Scenario::TiQm {
                report.memory = Some(memory(cfg)?);
            }
        }
        Scenario::Chsh => {
            let out = ti_qm_pipeline(cfg)?;
            let a = section(&cfg.chsh, "chsh")?;
            let settings = ChshSettings::from_angles(a.a0, a.a1, a.b0, a.b1);
            let trials = section(&cfg.shots, "shots")?.chsh;
            let sampled = simulate_chsh(
                &out.pre_detection,
                &settings,
                trials,
                out.snr,
                sub_seed(seed, 4),
            )?;
            let visibility = (4.0 * out.fidelity() - 1.0) / 3.0;
            report.chsh = Some(ChshSummary {
                angles: [a.a0, a.a1, a.b0, a.b1],
                s: Estimate::sampled(sampled.s, sampled.sigma),
                analytic_s: Estimate::exact(chsh(&out.state, &settings)?),
                optimal_s: Estimate::exact(chsh_optimal(&out.state)?),
                werner_s: Estimate::exact(2.0 * SQRT_2 * visibility),
                trials,
                correlations: sampled.correlations,
            });
            report.shots = Some(trials);
            analytic(&mut report, &out);
        }
        Scenario::Budget => {
            let timing = section(&cfg.timing, "timing")?;
            let rows = error_ledger(
                timing.ti_qm_delay_us + timing.mw_propagation_us,
                section(&cfg.ion, "ion")?,
                section(&cfg.jitter, "jitter")?,
                section(&cfg.noise, "noise")?,
                section(&cfg.storage, "storage")?,
                section(&cfg.errors, "errors")?,
            )?;
            let total_sum = total_infidelity(&rows, Composition::Sum)?;
            let total_product = total_infidelity(&rows, Composition::Product)?;
            let out = ti_qm_pipeline(cfg)?;
            let stages = section(&cfg.stages, "stages")?;
            report.rates = Some(rate_report(stages)?);
            report.stages = Some(stages.overall_stages());
            report.budget = Some(BudgetSummary {
                rows,
                total_sum,
                total_product,
                predicted_fidelity: 1.0 - total_sum,
                pipeline_fidelity: out.fidelity(),
            });
            report.breakdown = Some(out.steps);
        }
        Scenario::AfcSweep => {
            let sw = section(&cfg.sweeps, "sweeps")?;
            let comb = section(&cfg.comb, "comb")?;
            let points = linspace(sw.afc_t_start_us, sw.afc_t_stop_us, sw.afc_points)
                .map(|t| {
                    Ok(SweepPoint {
                        x: t,
                        y: afc_efficiency(comb, t * 1e3)?,
                        reference: None,
                    })
                })
                .collect::<Result<_>>()?;
            report.sweep = Some(Sweep {
                x_label: "t_us".into(),
                y_label: "efficiency".into(),
                reference_label: None,
                points,
            });
            let t = smafc_readout_time(section(&cfg.stark, "stark")?)?;
            report.memory = Some(MemorySummary {
                storage_time_ns: t,
                afc_efficiency: Estimate::exact(afc_efficiency(comb, t)?),
                bandwidth_match: None,
            });
        }
        Scenario::BandwidthSweep => {
            let sw = section(&cfg.sweeps, "sweeps")?;
            let base = section(&cfg.spectral, "spectral")?;
            let points = linspace(
                sw.detuning_start_mhz,
                sw.detuning_stop_mhz,
                sw.detuning_points,
            )
            .map(|df| {
                let m = SpectralModel {
                    detuning_df: df,
                    ..base.clone()
                };
                Ok(SweepPoint {
                    x: df,
                    y: bandwidth_match(&m)?,
                    reference: Some(bandwidth_match_closed_form(&m)),
                })
            })
            .collect::<Result<_>>()?;
            report.sweep = Some(Sweep {
                x_label: "detuning_MHz".into(),
                y_label: "eta_bw".into(),
                reference_label: Some("eta_bw_closed_form".into()),
                points,
            });
        }
    }
    report.runtime = start.elapsed();
    log::info!("{scenario} finished in {:.2?}", report.runtime);
    Ok(report)
}
