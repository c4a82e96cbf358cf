//! Threshold readout of the ion qubit.
//!
//! Dark ions only see background counts, Poisson with mean `background_mean`.
//! Bright ions scatter Poisson(`mean_bright_counts`) detected photons, but
//! after each scatter the ion leaves the cycling transition with probability
//! `leak_per_scatter`, so the detected count is min(N, K) with K geometric.
//! The verdict is bright iff the count exceeds the threshold.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IonReadout {
    Bright,
    Dark,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpamParams {
    pub mean_bright_counts: f64,
    pub threshold: f64,
    pub dark_fidelity: f64,
    pub bright_fidelity: f64,
    pub leak_per_scatter: f64,
    pub background_mean: f64,
}

impl Default for SpamParams {
    fn default() -> Self {
        Self::calibrated(12.0, 1.5, 0.998, 0.987).expect("default readout calibration")
    }
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut p = (-lambda).exp();
    for i in 1..=k {
        p *= lambda / i as f64;
    }
    p
}

fn poisson_cdf(lambda: f64, k: u64) -> f64 {
    (0..=k)
        .map(|i| poisson_pmf(lambda, i))
        .sum::<f64>()
        .min(1.0)
}

fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f increasing on [lo, hi]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl SpamParams {
    /// Solve for the background mean and leak probability that reproduce the
    /// target dark/bright readout fidelities exactly.
    pub fn calibrated(
        mean_bright_counts: f64,
        threshold: f64,
        dark_fidelity: f64,
        bright_fidelity: f64,
    ) -> Result<Self> {
        let mut p = Self {
            mean_bright_counts,
            threshold,
            dark_fidelity,
            bright_fidelity,
            leak_per_scatter: 0.0,
            background_mean: 0.0,
        };
        p.validate()?;
        let k = p.max_dark_count();
        p.background_mean = bisect(0.0, 50.0, 1.0 - dark_fidelity, |b| 1.0 - poisson_cdf(b, k));
        let floor = p.model_bright_error();
        let target = 1.0 - bright_fidelity;
        if floor > target {
            return Err(Error::param(
                "bright_fidelity",
                format!("unreachable: leak-free bright error is already {floor:e}"),
            ));
        }
        p.leak_per_scatter = bisect(0.0, 1.0, target, |q| {
            Self {
                leak_per_scatter: q,
                ..p.clone()
            }
            .model_bright_error()
        });
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::param("threshold", "must be positive"));
        }
        if !(self.mean_bright_counts > 0.0) {
            return Err(Error::param("mean_bright_counts", "must be positive"));
        }
        for (name, v) in [
            ("dark_fidelity", self.dark_fidelity),
            ("bright_fidelity", self.bright_fidelity),
            ("leak_per_scatter", self.leak_per_scatter),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [0, 1]")));
            }
        }
        if self.background_mean < 0.0 {
            return Err(Error::param("background_mean", "must be non-negative"));
        }
        Ok(())
    }

    /// Largest count still read as dark.
    pub fn max_dark_count(&self) -> u64 {
        self.threshold.floor() as u64
    }

    /// P(dark ion read bright) under the model.
    pub fn model_dark_error(&self) -> f64 {
        1.0 - poisson_cdf(self.background_mean, self.max_dark_count())
    }

    /// P(bright ion read dark) under the model.
    pub fn model_bright_error(&self) -> f64 {
        let k = self.max_dark_count();
        let q = self.leak_per_scatter;
        // P(min(N, K) ≥ m) = P(N ≥ m)·(1 − q)^m
        let tail = |m: u64| -> f64 {
            let n_tail = if m == 0 {
                1.0
            } else {
                1.0 - poisson_cdf(self.mean_bright_counts, m - 1)
            };
            n_tail * (1.0 - q).powi(m as i32)
        };
        (0..=k)
            .map(|m| (tail(m) - tail(m + 1)) * poisson_cdf(self.background_mean, k - m))
            .sum()
    }

    /// Readout error of a pure Poisson bright distribution with no leak and no background.
    pub fn poisson_only_bright_error(&self) -> f64 {
        poisson_cdf(self.mean_bright_counts, self.max_dark_count())
    }
}

fn draw_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive mean").sample(rng) as u64
}

/// One readout shot: photon count and threshold verdict.
pub fn simulate_spam_readout<R: Rng + ?Sized>(
    truth: IonReadout,
    params: &SpamParams,
    rng: &mut R,
) -> (u64, IonReadout) {
    let background = draw_poisson(params.background_mean, rng);
    let counts = match truth {
        IonReadout::Dark => background,
        IonReadout::Bright => {
            let scattered = draw_poisson(params.mean_bright_counts, rng);
            let survived = if params.leak_per_scatter > 0.0 {
                Geometric::new(params.leak_per_scatter)
                    .expect("probability in (0, 1]")
                    .sample(rng)
            } else {
                u64::MAX
            };
            scattered.min(survived) + background
        }
    };
    let verdict = if counts as f64 > params.threshold {
        IonReadout::Bright
    } else {
        IonReadout::Dark
    };
    (counts, verdict)
}

/// Empirical (dark, bright) readout fidelities over `shots` preparations of each state.
pub fn readout_fidelities(params: &SpamParams, shots: u64, seed: u64) -> (f64, f64) {
    let mut rng = rng_from_seed(seed);
    let mut correct = [0u64; 2];
    for (slot, truth) in [IonReadout::Dark, IonReadout::Bright]
        .into_iter()
        .enumerate()
    {
        for _ in 0..shots {
            if simulate_spam_readout(truth, params, &mut rng).1 == truth {
                correct[slot] += 1;
            }
        }
    }
    (
        correct[0] as f64 / shots as f64,
        correct[1] as f64 / shots as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn leak_free_background_free_dark_is_perfect() {
        let p = SpamParams {
            mean_bright_counts: 12.0,
            threshold: 1.5,
            dark_fidelity: 1.0,
            bright_fidelity: 1.0,
            leak_per_scatter: 0.0,
            background_mean: 0.0,
        };
        let (dark, _) = readout_fidelities(&p, 10_000, 1);
        assert_eq!(dark, 1.0);
    }

    #[test]
    fn pure_poisson_misidentification() {
        // P(N ≤ 1) = 13·e^{−12}
        let p = SpamParams {
            leak_per_scatter: 0.0,
            background_mean: 0.0,
            ..SpamParams::default()
        };
        let expected = 13.0 * (-12.0f64).exp();
        assert_abs_diff_eq!(p.poisson_only_bright_error(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 8.0e-5, epsilon = 1e-6);
        assert_abs_diff_eq!(p.model_bright_error(), expected, epsilon = 1e-15);
    }

    #[test]
    fn calibration_hits_targets() {
        let p = SpamParams::default();
        assert_abs_diff_eq!(p.model_dark_error(), 0.002, epsilon = 1e-12);
        assert_abs_diff_eq!(p.model_bright_error(), 0.013, epsilon = 1e-12);
        assert!(p.leak_per_scatter > 0.0 && p.leak_per_scatter < 0.01);
        assert!(SpamParams::calibrated(12.0, 1.5, 0.998, 0.99999).is_err());
    }

    #[test]
    fn threshold_verdict() {
        let p = SpamParams::default();
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            let (n, v) = simulate_spam_readout(IonReadout::Bright, &p, &mut rng);
            assert_eq!(v == IonReadout::Bright, n >= 2);
        }
    }
}
