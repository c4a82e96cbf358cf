use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hetlink_core::scenario::{
    emit_report, run, ExperimentConfig, OutputFormat, RunReport, Scenario,
};
use hetlink_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hetlink",
    version,
    about = "Trapped-ion to quantum-memory link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report files.
    Run {
        /// ion_photon, post_qfc, ti_qm, chsh, budget, afc_sweep or bandwidth_sweep
        #[arg(long)]
        scenario: Option<Scenario>,
        /// JSON config; without it the built-in reference parameters are used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Shots, heralds or trials for the chosen scenario.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// json, csv or all
        #[arg(long, default_value = "all")]
        format: OutputFormat,
    },
    /// Print the reference config as JSON.
    Defaults,
}

fn load(config: Option<PathBuf>) -> Result<ExperimentConfig> {
    match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
            ExperimentConfig::from_json(&text)
        }
        None => Ok(ExperimentConfig::defaults()),
    }
}

fn apply_shots(cfg: &mut ExperimentConfig, n: u64) -> Result<()> {
    let scenario = cfg
        .scenario
        .ok_or_else(|| Error::Config(vec!["scenario: missing".into()]))?;
    let shots = cfg.shots.get_or_insert_with(Default::default);
    match scenario {
        Scenario::IonPhoton => shots.ion_photon = n,
        Scenario::PostQfc => shots.post_qfc = n,
        Scenario::TiQm => shots.ti_qm = n,
        Scenario::Chsh => shots.chsh = n,
        other => {
            return Err(Error::Config(vec![format!(
                "--shots: scenario {other} takes no shot count"
            )]))
        }
    }
    Ok(())
}

fn print_summary(report: &RunReport) {
    println!("scenario {} (seed {})", report.scenario, report.seed);
    if let Some(f) = report.fidelity {
        println!(
            "  fidelity          {:.4} ± {:.4}",
            f.value,
            f.stddev.unwrap_or(0.0)
        );
    }
    if let Some(f) = report.analytic_fidelity {
        println!("  analytic fidelity {:.4}", f.value);
    }
    if let Some(c) = &report.chsh {
        println!(
            "  S                 {:.3} ± {:.3} (analytic {:.3})",
            c.s.value,
            c.s.stddev.unwrap_or(0.0),
            c.analytic_s.value
        );
    }
    if let Some(r) = &report.rates {
        println!(
            "  R_369 {:.1} Hz, R_580 {:.3} Hz, R_TI-QM {:.4} Hz",
            r.r369_hz, r.r580_hz, r.r_ti_qm_hz
        );
    }
    if let Some(b) = &report.budget {
        println!(
            "  total infidelity  {:.2}% (sum), pipeline fidelity {:.4}",
            b.total_sum * 100.0,
            b.pipeline_fidelity
        );
    }
    if let Some(s) = &report.sweep {
        println!(
            "  sweep             {} points of {} vs {}",
            s.points.len(),
            s.y_label,
            s.x_label
        );
    }
    println!("  runtime           {:.2?}", report.runtime);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Defaults => {
            println!(
                "{}",
                serde_json::to_string_pretty(&ExperimentConfig::defaults())?
            );
        }
        Command::Run {
            scenario,
            config,
            seed,
            shots,
            out,
            format,
        } => {
            let mut cfg = load(config)?;
            if let Some(s) = scenario {
                cfg.scenario = Some(s);
            }
            if let Some(s) = seed {
                cfg.master_seed = Some(s);
            }
            if let Some(o) = out {
                cfg.output_dir = Some(o);
            }
            if let Some(n) = shots {
                apply_shots(&mut cfg, n)?;
            }
            let report = run(&cfg)?;
            let dir = cfg.output_dir.clone().expect("validated");
            for p in emit_report(&report, &dir, format)? {
                log::info!("wrote {}", p.display());
            }
            print_summary(&report);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("hetlink").chain(args.iter().copied()))
    }

    #[test]
    fn rejects_unknown_scenario_and_format() {
        assert!(parse(&["run", "--scenario", "teleport"]).is_err());
        assert!(parse(&["run", "--scenario", "budget", "--format", "xml"]).is_err());
        assert!(parse(&["run", "--scenario", "budget", "--format", "csv"]).is_ok());
    }

    #[test]
    fn budget_run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        execute(parse(&["run", "--scenario", "budget", "--out", out]).unwrap()).unwrap();
        let mut names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(
            names,
            [
                "budget_seed20251016_budget.csv",
                "budget_seed20251016_rates.csv",
                "budget_seed20251016_stages.csv",
                "budget_seed20251016_summary.json"
            ]
        );
    }

    #[test]
    fn shots_only_for_sampled_scenarios() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let err = execute(
            parse(&["run", "--scenario", "budget", "--shots", "10", "--out", out]).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        execute(
            parse(&[
                "run",
                "--scenario",
                "chsh",
                "--shots",
                "400",
                "--seed",
                "3",
                "--format",
                "json",
                "--out",
                out,
            ])
            .unwrap(),
        )
        .unwrap();
        let text = std::fs::read_to_string(dir.path().join("chsh_seed3_summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["shots"], 400);
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, r#"{"scenario": "ti_qm", "master_seed": 1}"#).unwrap();
        let err = execute(parse(&["run", "--config", cfg.to_str().unwrap()]).unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        match err {
            Error::Config(problems) => assert!(problems.len() > 3, "{problems:?}"),
            other => panic!("unexpected {other}"),
        }
        let missing =
            execute(parse(&["run", "--config", "/nonexistent/cfg.json"]).unwrap()).unwrap_err();
        assert_eq!(missing.exit_code(), 2);
    }
}
