//! Ramsey fringe model P(t) = C + D·exp(−(t/τ)²)·cos(2π·f·t + φ) and a
//! Levenberg–Marquardt fit for extracting the coherence time.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Times in ms, frequency in kHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyParams {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency_khz: f64,
    pub phase: f64,
    pub tau_ms: f64,
}

impl RamseyParams {
    fn to_vec(self) -> DVector<f64> {
        DVector::from_vec(vec![
            self.offset,
            self.amplitude,
            self.frequency_khz,
            self.phase,
            self.tau_ms,
        ])
    }

    fn from_vec(v: &DVector<f64>) -> Self {
        Self {
            offset: v[0],
            amplitude: v[1],
            frequency_khz: v[2],
            phase: v[3],
            tau_ms: v[4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyFit {
    pub params: RamseyParams,
    /// 1σ standard errors in the same order as the parameters.
    pub std_errors: [f64; 5],
    pub reduced_chi2: f64,
    pub iterations: usize,
}

pub fn ramsey_curve(t_ms: f64, p: &RamseyParams) -> f64 {
    p.offset
        + p.amplitude
            * (-(t_ms / p.tau_ms).powi(2)).exp()
            * (2.0 * PI * p.frequency_khz * t_ms + p.phase).cos()
}

/// Bright fractions from `shots` binomial draws at each time.
pub fn synthesize_ramsey(
    p: &RamseyParams,
    times_ms: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    times_ms
        .iter()
        .map(|&t| {
            let prob = ramsey_curve(t, p).clamp(0.0, 1.0);
            let b = Binomial::new(shots, prob).map_err(|e| Error::param("shots", e.to_string()))?;
            Ok(b.sample(&mut rng) as f64 / shots as f64)
        })
        .collect()
}

fn jacobian_row(t: f64, p: &RamseyParams) -> [f64; 5] {
    let g = (-(t / p.tau_ms).powi(2)).exp();
    let arg = 2.0 * PI * p.frequency_khz * t + p.phase;
    let (s, co) = arg.sin_cos();
    [
        1.0,
        g * co,
        -p.amplitude * g * s * 2.0 * PI * t,
        -p.amplitude * g * s,
        p.amplitude * g * co * 2.0 * t * t / p.tau_ms.powi(3),
    ]
}

fn sum_sq(times: &[f64], data: &[f64], p: &RamseyParams) -> f64 {
    times
        .iter()
        .zip(data)
        .map(|(&t, &y)| (ramsey_curve(t, p) - y).powi(2))
        .sum()
}

/// Grid search over (f, τ) with the linear parameters solved by least squares.
fn initial_guess(times: &[f64], data: &[f64]) -> Option<RamseyParams> {
    let n = times.len();
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let t_min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = t_max - t_min;
    if span <= 0.0 {
        return None;
    }
    let nyquist = (n as f64 - 1.0) / (2.0 * span);
    let y = DVector::from_column_slice(data);
    let mut best: Option<(f64, RamseyParams)> = None;
    let n_freq = 400;
    for i in 0..=n_freq {
        let f = nyquist * i as f64 / n_freq as f64;
        for tau in [0.25, 0.5, 0.75, 1.0, 1.5, 2.5].map(|k| k * t_max) {
            let a = DMatrix::from_fn(n, 3, |r, col| {
                let t = times[r];
                let g = (-(t / tau).powi(2)).exp();
                match col {
                    0 => 1.0,
                    1 => g * (2.0 * PI * f * t).cos(),
                    _ => g * (2.0 * PI * f * t).sin(),
                }
            });
            let Ok(x) = a.clone().svd(true, true).solve(&y, 1e-12) else {
                continue;
            };
            let resid = (&a * &x - &y).norm_squared();
            // a·cos + b·sin = D·cos(θ + φ) with D = √(a²+b²), φ = atan2(−b, a)
            let p = RamseyParams {
                offset: x[0],
                amplitude: x[1].hypot(x[2]),
                frequency_khz: f,
                phase: (-x[2]).atan2(x[1]),
                tau_ms: tau,
            };
            if best.as_ref().is_none_or(|(r, _)| resid < *r) {
                best = Some((resid, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Least-squares fit of the fringe model to bright fractions.
pub fn fit_ramsey(times_ms: &[f64], data: &[f64]) -> Result<RamseyFit> {
    if times_ms.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: times_ms.len(),
            got: data.len(),
        });
    }
    if times_ms.len() < 6 {
        return Err(Error::param(
            "times_ms",
            "need at least 6 points for a 5-parameter fit",
        ));
    }
    let mut p = initial_guess(times_ms, data)
        .ok_or(Error::FitNonConvergence("degenerate time grid".into()))?;
    let mut cost = sum_sq(times_ms, data, &p);
    let mut lambda = 1e-3;
    let n = times_ms.len();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let j = DMatrix::from_fn(n, 5, |r, col| jacobian_row(times_ms[r], &p)[col]);
        let r = DVector::from_fn(n, |i, _| ramsey_curve(times_ms[i], &p) - data[i]);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for d in 0..5 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = RamseyParams::from_vec(&(p.to_vec() + &step));
            if cand.tau_ms <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let c = sum_sq(times_ms, data, &cand);
            if c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence(format!(
            "no convergence after {iterations} iterations"
        )));
    }
    if p.amplitude < 0.0 {
        p.amplitude = -p.amplitude;
        p.phase += PI;
    }
    p.phase = (p.phase + PI).rem_euclid(2.0 * PI) - PI;
    let dof = (n - 5).max(1) as f64;
    let reduced_chi2 = cost / dof;
    let j = DMatrix::from_fn(n, 5, |r, col| jacobian_row(times_ms[r], &p)[col]);
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or(Error::FitNonConvergence(
            "singular normal matrix at optimum".into(),
        ))?;
    let mut std_errors = [0.0; 5];
    for (d, e) in std_errors.iter_mut().enumerate() {
        *e = (cov[(d, d)] * reduced_chi2).max(0.0).sqrt();
    }
    Ok(RamseyFit {
        params: p,
        std_errors,
        reduced_chi2,
        iterations,
    })
}
