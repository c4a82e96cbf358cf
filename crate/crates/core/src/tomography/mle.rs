//! Maximum-likelihood reconstruction of a two-qubit state from the 3×3
//! product-basis grid.
//!
//! Main loop is the RρR fixed-point iteration. If a full step lowers the
//! likelihood it is diluted, ρ ← (I + εR̃)ρ(I + εR̃)/tr with R̃ = R/N − I,
//! and if no dilution helps the estimate is refined by gradient ascent on
//! ρ = T†T / tr(T†T).

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::qstate::{c, CMatrix, DensityMatrix, C64};

use super::measurement::{CountRecord, FrequencyRecord, MeasurementSetting};

type M4 = Matrix4<C64>;
type V4 = Vector4<C64>;

pub const MAX_ITERATIONS: usize = 10_000;
pub const REL_TOL: f64 = 1e-10;
const STATIONARITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct MleOptions {
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: MAX_ITERATIONS,
            rel_tol: REL_TOL,
        }
    }
}

struct Outcome {
    v: V4,
    n: f64,
}

struct Data {
    /// Four outcomes per entry of `settings`, in the same order.
    outcomes: Vec<Outcome>,
    settings: Vec<MeasurementSetting>,
    total: f64,
}

fn prob(v: &V4, rho: &M4) -> f64 {
    (v.adjoint() * rho * v)[(0, 0)].re
}

fn hermitize(m: &M4) -> M4 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn normalize(m: &M4) -> M4 {
    let h = hermitize(m);
    h / c(h.trace().re, 0.0)
}

impl Data {
    fn new(records: &[FrequencyRecord]) -> Result<Self> {
        let mut merged: BTreeMap<MeasurementSetting, [f64; 4]> = BTreeMap::new();
        for r in records {
            if r.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return Err(Error::DegenerateRecord(format!(
                    "{}: negative or non-finite weight",
                    r.setting
                )));
            }
            let slot = merged.entry(r.setting).or_insert([0.0; 4]);
            for (s, w) in slot.iter_mut().zip(r.weights) {
                *s += w;
            }
        }
        let missing: Vec<String> = MeasurementSetting::all()
            .iter()
            .filter(|s| !merged.contains_key(s))
            .map(ToString::to_string)
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingSettings(missing.join(", ")));
        }
        if let Some((s, _)) = merged.iter().find(|(_, w)| w.iter().sum::<f64>() <= 0.0) {
            return Err(Error::DegenerateRecord(format!("{s}: zero shots")));
        }
        let mut outcomes = Vec::with_capacity(36);
        for (s, w) in &merged {
            for (v, &n) in s.outcome_vectors().iter().zip(w) {
                outcomes.push(Outcome { v: *v, n });
            }
        }
        let total = outcomes.iter().map(|o| o.n).sum();
        Ok(Self {
            outcomes,
            settings: merged.keys().copied().collect(),
            total,
        })
    }

    fn log_likelihood(&self, rho: &M4) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.n > 0.0)
            .map(|o| {
                let p = prob(&o.v, rho);
                if p > 0.0 {
                    o.n * p.ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .sum()
    }

    /// R/N with R = Σ n_k/p_k |v_k⟩⟨v_k|.
    fn r_operator(&self, rho: &M4) -> M4 {
        let mut r = M4::zeros();
        for o in self.outcomes.iter().filter(|o| o.n > 0.0) {
            let p = prob(&o.v, rho).max(1e-300);
            r += o.v * o.v.adjoint() * c(o.n / p, 0.0);
        }
        r / c(self.total, 0.0)
    }

    /// Frobenius norm of (R/N − I)ρ, zero exactly at the constrained optimum.
    fn stationarity(&self, rho: &M4) -> f64 {
        ((self.r_operator(rho) - M4::identity()) * rho).norm()
    }

    /// Pauli-expectation linear inversion projected to the PSD cone.
    fn linear_inversion(&self) -> M4 {
        let paulis = [
            mat2([[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]]),
            mat2([[0.0, 1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]),
            mat2([[0.0, 0.0], [0.0, 0.0]], [[0.0, -1.0], [1.0, 0.0]]),
            mat2([[1.0, 0.0], [0.0, -1.0]], [[0.0, 0.0], [0.0, 0.0]]),
        ];
        let index = |a: super::measurement::Axis| match a {
            super::measurement::Axis::X => 1,
            super::measurement::Axis::Y => 2,
            super::measurement::Axis::Z => 3,
        };
        // correlators ⟨σ_a ⊗ σ_b⟩, pooled over settings weighted by shots
        let mut sum = [[0.0f64; 4]; 4];
        let mut weight = [[0.0f64; 4]; 4];
        for (s, chunk) in self.settings.iter().zip(self.outcomes.chunks(4)) {
            let n: f64 = chunk.iter().map(|o| o.n).sum();
            if n <= 0.0 {
                continue;
            }
            let f: Vec<f64> = chunk.iter().map(|o| o.n / n).collect();
            let (ia, ib) = (index(s.ion_axis), index(s.photon_axis));
            let e_ab = f[0] - f[1] - f[2] + f[3];
            let e_a = f[0] + f[1] - f[2] - f[3];
            let e_b = f[0] - f[1] + f[2] - f[3];
            for (a, b, e) in [(ia, ib, e_ab), (ia, 0, e_a), (0, ib, e_b)] {
                sum[a][b] += e * n;
                weight[a][b] += n;
            }
        }
        let mut rho = M4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let e = if a == 0 && b == 0 {
                    1.0
                } else if weight[a][b] > 0.0 {
                    sum[a][b] / weight[a][b]
                } else {
                    0.0
                };
                rho += paulis[a].kronecker2(&paulis[b]) * c(e / 4.0, 0.0);
            }
        }
        project_psd(&rho)
    }
}

fn mat2(re: [[f64; 2]; 2], im: [[f64; 2]; 2]) -> nalgebra::Matrix2<C64> {
    nalgebra::Matrix2::new(
        c(re[0][0], im[0][0]),
        c(re[0][1], im[0][1]),
        c(re[1][0], im[1][0]),
        c(re[1][1], im[1][1]),
    )
}

trait Kron2 {
    fn kronecker2(&self, other: &Self) -> M4;
}

impl Kron2 for nalgebra::Matrix2<C64> {
    fn kronecker2(&self, other: &Self) -> M4 {
        M4::from_fn(|r, col| self[(r / 2, col / 2)] * other[(r % 2, col % 2)])
    }
}

/// Clip negative eigenvalues, renormalize, and mix in a little I/4 if any
/// were clipped so every outcome keeps non-zero probability.
fn project_psd(m: &M4) -> M4 {
    let eig = hermitize(m).symmetric_eigen();
    let clipped = eig.eigenvalues.iter().any(|&l| l < 1e-12);
    let vals = eig.eigenvalues.map(|l| l.max(0.0));
    let total: f64 = vals.iter().sum();
    let d = Matrix4::from_diagonal(&vals.map(|l| c(l / total.max(1e-300), 0.0)));
    let rho = eig.eigenvectors * d * eig.eigenvectors.adjoint();
    if clipped {
        rho * c(0.99, 0.0) + M4::identity() * c(0.01 / 4.0, 0.0)
    } else {
        normalize(&rho)
    }
}

fn rrr_step(data: &Data, rho: &M4, eps: Option<f64>) -> M4 {
    let r = data.r_operator(rho);
    let op = match eps {
        None => r,
        Some(e) => M4::identity() + (r - M4::identity()) * c(e, 0.0),
    };
    normalize(&(op * rho * op))
}

/// ρ = T†T/tr with the likelihood gradient δT ∝ T(R/N − I).
fn gradient_step(data: &Data, rho: &M4, ll: f64) -> Option<(M4, f64)> {
    let eig = hermitize(rho).symmetric_eigen();
    let t = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| c(l.max(0.0).sqrt(), 0.0)))
        * eig.eigenvectors.adjoint();
    let g = t * (data.r_operator(rho) - M4::identity());
    let mut eta = 1.0;
    while eta > 1e-12 {
        let cand_t = t + g * c(eta, 0.0);
        let cand = normalize(&(cand_t.adjoint() * cand_t));
        let cll = data.log_likelihood(&cand);
        if cll > ll {
            return Some((cand, cll));
        }
        eta *= 0.5;
    }
    None
}

fn to_density(m: &M4) -> Result<DensityMatrix> {
    let d = CMatrix::from_fn(4, 4, |r, col| m[(r, col)]);
    DensityMatrix::new(d)
}

fn from_density(rho: &DensityMatrix) -> M4 {
    M4::from_fn(|r, col| rho.matrix()[(r, col)])
}

fn reconstruct(data: &Data, opts: MleOptions) -> Result<DensityMatrix> {
    let mut rho = data.linear_inversion();
    let mut ll = data.log_likelihood(&rho);
    if !ll.is_finite() {
        rho = rho * c(0.9, 0.0) + M4::identity() * c(0.1 / 4.0, 0.0);
        ll = data.log_likelihood(&rho);
    }
    let mut stall = 0;
    for _ in 0..opts.max_iterations {
        let mut next = None;
        for eps in [
            None,
            Some(0.1),
            Some(0.01),
            Some(1e-3),
            Some(1e-4),
            Some(1e-5),
            Some(1e-6),
        ] {
            let cand = rrr_step(data, &rho, eps);
            let cll = data.log_likelihood(&cand);
            if cll >= ll {
                next = Some((cand, cll));
                break;
            }
        }
        let (cand, cll) = match next.or_else(|| gradient_step(data, &rho, ll)) {
            Some(x) => x,
            None => break,
        };
        let rel = (cll - ll) / ll.abs().max(1e-300);
        rho = cand;
        ll = cll;
        if rel < opts.rel_tol {
            if data.stationarity(&rho) < STATIONARITY_TOL {
                return to_density(&rho);
            }
            stall = if rel < 1e-14 { stall + 1 } else { 0 };
            if stall >= 20 {
                // likelihood no longer moves; accept the plateau
                return to_density(&rho);
            }
        } else {
            stall = 0;
        }
    }
    let residual = data.stationarity(&rho);
    if residual < STATIONARITY_TOL * 10.0 {
        return to_density(&rho);
    }
    Err(Error::MleNonConvergence {
        iterations: opts.max_iterations,
        gradient_norm: residual,
    })
}

/// MLE from integer counts on all nine settings.
pub fn mle_reconstruct(records: &[CountRecord]) -> Result<DensityMatrix> {
    for r in records {
        r.validate()?;
    }
    let freqs: Vec<FrequencyRecord> = records.iter().map(CountRecord::frequencies).collect();
    mle_reconstruct_frequencies(&freqs, MleOptions::default())
}

/// MLE from possibly fractional outcome weights.
pub fn mle_reconstruct_frequencies(
    records: &[FrequencyRecord],
    opts: MleOptions,
) -> Result<DensityMatrix> {
    reconstruct(&Data::new(records)?, opts)
}

/// Log-likelihood of `rho` given the records (for diagnostics and tests).
pub fn log_likelihood(records: &[FrequencyRecord], rho: &DensityMatrix) -> Result<f64> {
    Ok(Data::new(records)?.log_likelihood(&from_density(rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::PureState;
    use crate::tomography::measurement::{even_split, simulate_tomography, Axis};

    fn exact(rho: &DensityMatrix, shots: f64) -> Vec<FrequencyRecord> {
        MeasurementSetting::all()
            .iter()
            .map(|s| FrequencyRecord::exact(rho, *s, shots).unwrap())
            .collect()
    }

    #[test]
    fn flat_counts_give_mixed_state() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let recs = simulate_tomography(&rho, &[1_000_000; 9], f64::INFINITY, 5).unwrap();
        let est = mle_reconstruct(&recs).unwrap();
        assert!(est.trace_distance(&rho).unwrap() < 0.01);
    }

    #[test]
    fn exact_bell_counts() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::from_pure(&bell);
        let est = mle_reconstruct_frequencies(&exact(&rho, 1e6), MleOptions::default()).unwrap();
        assert!(est.fidelity(&bell).unwrap() >= 0.999);
    }

    #[test]
    fn sampled_bell_counts() {
        let bell = PureState::bell(0.0);
        let rho = DensityMatrix::from_pure(&bell);
        let recs = simulate_tomography(&rho, &[1_000_000; 9], f64::INFINITY, 6).unwrap();
        assert!(mle_reconstruct(&recs).unwrap().fidelity(&bell).unwrap() >= 0.999);
    }

    #[test]
    fn exact_full_rank_recovered() {
        let rho = DensityMatrix::werner(&PureState::bell(0.7), 0.6).unwrap();
        let est = mle_reconstruct_frequencies(&exact(&rho, 1.0), MleOptions::default()).unwrap();
        assert!(est.trace_distance(&rho).unwrap() < 1e-6);
    }

    #[test]
    fn mle_beats_or_matches_truth_likelihood() {
        let rho = DensityMatrix::werner(&PureState::bell(0.0), 0.85).unwrap();
        let recs = simulate_tomography(&rho, &even_split(1780), 28.0, 8).unwrap();
        let freqs: Vec<FrequencyRecord> = recs.iter().map(CountRecord::frequencies).collect();
        let est = mle_reconstruct(&recs).unwrap();
        assert!(
            log_likelihood(&freqs, &est).unwrap() >= log_likelihood(&freqs, &rho).unwrap() - 1e-9
        );
    }

    #[test]
    fn missing_and_degenerate_rejected() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let recs = simulate_tomography(&rho, &[100; 9], f64::INFINITY, 1).unwrap();
        assert!(matches!(
            mle_reconstruct(&recs[..8]),
            Err(Error::MissingSettings(_))
        ));
        let mut zero = recs.clone();
        zero[0] = CountRecord::new(MeasurementSetting::new(Axis::Z, Axis::Z), [0; 4]);
        assert!(matches!(
            mle_reconstruct(&zero),
            Err(Error::DegenerateRecord(_))
        ));
    }

    #[test]
    fn adversarial_single_outcome_is_physical() {
        let recs: Vec<CountRecord> = MeasurementSetting::all()
            .iter()
            .map(|s| CountRecord::new(*s, [50, 0, 0, 0]))
            .collect();
        let est = mle_reconstruct(&recs).unwrap();
        assert!((est.trace() - 1.0).abs() < 1e-10);
        assert!(est.eigenvalues()[0] >= -1e-9);
    }
}
