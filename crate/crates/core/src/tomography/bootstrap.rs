use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, PureState};
use crate::rng::child_rng;

use super::chsh::{chsh, ChshSettings};
use super::measurement::{multinomial, CountRecord};
use super::mle::mle_reconstruct;

/// Quantity evaluated on every bootstrap reconstruction.
#[derive(Clone, Debug)]
pub enum Statistic {
    Fidelity(PureState),
    Chsh(ChshSettings),
}

impl Statistic {
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            Statistic::Fidelity(target) => rho.fidelity(target),
            Statistic::Chsh(settings) => chsh(rho, settings),
        }
    }
}

/// Parametric bootstrap: every resample redraws each setting's counts from
/// its observed frequencies, reconstructs by MLE and evaluates `statistic`.
/// Returns (mean, sample standard deviation).
pub fn bootstrap_uncertainty(
    records: &[CountRecord],
    n_resamples: usize,
    statistic: &Statistic,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_resamples < 100 {
        return Err(Error::param("n_resamples", format!("{n_resamples} < 100")));
    }
    if records.is_empty() {
        return Err(Error::Empty("records"));
    }
    for r in records {
        r.validate()?;
    }
    let values: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let resampled: Vec<CountRecord> = records
                .iter()
                .map(|r| {
                    let probs = r.counts.map(|n| n as f64 / r.shots as f64);
                    CountRecord::new(r.setting, multinomial(r.shots, &probs, &mut rng))
                })
                .collect();
            statistic.evaluate(&mle_reconstruct(&resampled)?)
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::{even_split, simulate_tomography};

    #[test]
    fn fidelity_error_bar_is_reasonable() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::werner(&bell, 0.9).unwrap();
        let records = simulate_tomography(&rho, &even_split(1800), f64::INFINITY, 11).unwrap();
        let (mean, std) =
            bootstrap_uncertainty(&records, 200, &Statistic::Fidelity(bell.clone()), 5).unwrap();
        assert!((mean - 0.925).abs() < 0.03, "mean {mean}");
        assert!(std > 0.002 && std < 0.03, "std {std}");
        let again = bootstrap_uncertainty(&records, 200, &Statistic::Fidelity(bell), 5).unwrap();
        assert_eq!((mean, std), again);
    }

    #[test]
    fn rejects_bad_input() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::from_pure(&bell);
        let records = simulate_tomography(&rho, &even_split(900), f64::INFINITY, 1).unwrap();
        assert!(
            bootstrap_uncertainty(&records, 50, &Statistic::Fidelity(bell.clone()), 0).is_err()
        );
        let mut bad = records.clone();
        bad[0] = CountRecord::new(bad[0].setting, [0; 4]);
        assert!(bootstrap_uncertainty(&bad, 100, &Statistic::Fidelity(bell), 0).is_err());
    }
}
