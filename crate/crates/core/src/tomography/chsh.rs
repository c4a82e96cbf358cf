use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon_chain::dark_noise_fraction;
use crate::qstate::{hermitian_eigen, kron, pauli_basis, CMatrix, DensityMatrix, Observable};
use crate::rng::child_rng;

use super::measurement::multinomial;

#[derive(Clone, Debug)]
pub struct ChshSettings {
    pub a0: Observable,
    pub a1: Observable,
    pub b0: Observable,
    pub b1: Observable,
}

fn check_dichotomic(name: &'static str, o: &Observable) -> Result<()> {
    if o.dim() != 2 {
        return Err(Error::InvalidObservable(format!(
            "{name} must act on one qubit"
        )));
    }
    let ev = o.eigenvalues();
    if (ev[0] + 1.0).abs() > 1e-9 || (ev[1] - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidObservable(format!(
            "{name} eigenvalues {ev:?} are not ±1"
        )));
    }
    Ok(())
}

impl ChshSettings {
    pub fn new(a0: Observable, a1: Observable, b0: Observable, b1: Observable) -> Result<Self> {
        for (name, o) in [("A0", &a0), ("A1", &a1), ("B0", &b0), ("B1", &b1)] {
            check_dichotomic(name, o)?;
        }
        Ok(Self { a0, a1, b0, b1 })
    }

    /// Analyzers cos θ·Z + sin θ·X for the four angles.
    pub fn from_angles(a0: f64, a1: f64, b0: f64, b1: f64) -> Self {
        Self {
            a0: Observable::xz_plane(a0),
            a1: Observable::xz_plane(a1),
            b0: Observable::xz_plane(b0),
            b1: Observable::xz_plane(b1),
        }
    }

    /// Ion in X and Z, photon at 45° and 135° in the X–Z plane; maximal for
    /// the φ = 0 state.
    pub fn optimal() -> Self {
        use std::f64::consts::PI;
        Self::from_angles(PI / 2.0, 0.0, PI / 4.0, 3.0 * PI / 4.0)
    }

    fn pairs(&self) -> [(&Observable, &Observable, f64); 4] {
        [
            (&self.a0, &self.b0, 1.0),
            (&self.a0, &self.b1, 1.0),
            (&self.a1, &self.b0, 1.0),
            (&self.a1, &self.b1, -1.0),
        ]
    }
}

/// ⟨A ⊗ B⟩.
pub fn correlation(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    rho.expectation(&a.tensor(b)?)
}

/// S = ⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩.
pub fn chsh(rho: &DensityMatrix, s: &ChshSettings) -> Result<f64> {
    let mut total = 0.0;
    for (a, b, sign) in s.pairs() {
        total += sign * correlation(rho, a, b)?;
    }
    Ok(total)
}

/// Largest S over all local analyzers: 2√(m₁ + m₂) from the two largest
/// eigenvalues of TᵀT, T_ij = ⟨σ_i ⊗ σ_j⟩.
pub fn chsh_optimal(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let p = pauli_basis();
    let mut t = nalgebra::Matrix3::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            t[(i, j)] = (rho.matrix() * kron(&p[i + 1], &p[j + 1])).trace().re;
        }
    }
    let mut m: Vec<f64> = (t.transpose() * t)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    m.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (m[0] + m[1]).max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingCorrelation {
    pub label: String,
    /// ++, +−, −+, −−
    pub counts: [u64; 4],
    pub e: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshResult {
    pub s: f64,
    pub sigma: f64,
    pub correlations: Vec<SettingCorrelation>,
}

fn outcome_projectors(o: &Observable) -> [CMatrix; 2] {
    let (_, vecs) = hermitian_eigen(o.matrix());
    // ascending eigenvalues: column 1 is +1, column 0 is −1
    let plus = vecs.column(1).into_owned();
    let minus = vecs.column(0).into_owned();
    [&plus * plus.adjoint(), &minus * minus.adjoint()]
}

/// Sample `trials` correlation measurements split evenly over the four
/// analyzer pairs. Each E = (n₊₊ − n₊₋ − n₋₊ + n₋₋)/N with σ² = (1 − E²)/N.
pub fn simulate_chsh(
    rho: &DensityMatrix,
    s: &ChshSettings,
    trials: u64,
    snr: f64,
    seed: u64,
) -> Result<ChshResult> {
    if trials < 4 {
        return Err(Error::param(
            "trials",
            "need at least one trial per setting",
        ));
    }
    let p_noise = dark_noise_fraction(snr);
    let labels = ["A0B0", "A0B1", "A1B0", "A1B1"];
    let mut correlations = Vec::with_capacity(4);
    let mut total = 0.0;
    let mut var = 0.0;
    for (k, (a, b, sign)) in s.pairs().into_iter().enumerate() {
        let n = trials / 4 + u64::from((k as u64) < trials % 4);
        let pa = outcome_projectors(a);
        let pb = outcome_projectors(b);
        let mut probs = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                let q = (rho.matrix() * kron(&pa[i], &pb[j])).trace().re.max(0.0);
                probs[2 * i + j] = (1.0 - p_noise) * q + p_noise / 4.0;
            }
        }
        let norm: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|x| *x /= norm);
        let counts = multinomial(n, &probs, &mut child_rng(seed, k as u64));
        let e =
            (counts[0] as f64 - counts[1] as f64 - counts[2] as f64 + counts[3] as f64) / n as f64;
        let sigma = ((1.0 - e * e).max(0.0) / n as f64).sqrt();
        total += sign * e;
        var += sigma * sigma;
        correlations.push(SettingCorrelation {
            label: labels[k].to_string(),
            counts,
            e,
            sigma,
        });
    }
    Ok(ChshResult {
        s: total,
        sigma: var.sqrt(),
        correlations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{c, PureState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tsirelson_for_ideal_state() {
        let rho = DensityMatrix::from_pure(&PureState::bell(0.0));
        assert_abs_diff_eq!(
            chsh(&rho, &ChshSettings::optimal()).unwrap(),
            2.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            chsh_optimal(&rho).unwrap(),
            2.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixed_state_has_zero_s() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(
            chsh(&rho, &ChshSettings::optimal()).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn werner_scales_linearly() {
        let rho = DensityMatrix::werner(&PureState::bell(0.0), 0.823).unwrap();
        let s = chsh(&rho, &ChshSettings::optimal()).unwrap();
        assert_abs_diff_eq!(s, 2.0 * 2f64.sqrt() * 0.823, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 2.328, epsilon = 1e-3);
    }

    #[test]
    fn tomography_bases_stay_at_local_bound() {
        use std::f64::consts::PI;
        let rho = DensityMatrix::from_pure(&PureState::bell(0.0));
        let s = ChshSettings::from_angles(PI / 2.0, 0.0, 0.0, PI / 2.0);
        assert!(chsh(&rho, &s).unwrap().abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn non_dichotomic_rejected() {
        let half = Observable::new(crate::qstate::pauli_z() * c(0.5, 0.0)).unwrap();
        let z = Observable::xz_plane(0.0);
        assert!(ChshSettings::new(half, z.clone(), z.clone(), z).is_err());
    }

    #[test]
    fn sampled_chsh_close_to_exact() {
        let rho = DensityMatrix::werner(&PureState::bell(0.0), 0.85).unwrap();
        let exact = chsh(&rho, &ChshSettings::optimal()).unwrap();
        let r = simulate_chsh(&rho, &ChshSettings::optimal(), 400_000, f64::INFINITY, 3).unwrap();
        assert!((r.s - exact).abs() < 5.0 * r.sigma, "{} vs {exact}", r.s);
        let again =
            simulate_chsh(&rho, &ChshSettings::optimal(), 400_000, f64::INFINITY, 3).unwrap();
        assert_eq!(r, again);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::qstate::testutil::two_qubit_state;
    use proptest::prelude::*;

    fn angles() -> impl Strategy<Value = ChshSettings> {
        proptest::array::uniform4(-7.0f64..7.0)
            .prop_map(|[a0, a1, b0, b1]| ChshSettings::from_angles(a0, a1, b0, b1))
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn chsh_is_linear_and_bounded(a in two_qubit_state(), b in two_qubit_state(), w in 0.0f64..=1.0, s in angles()) {
            let mixed = chsh(&a.mix(&b, w), &s).unwrap();
            let expected = w * chsh(&a, &s).unwrap() + (1.0 - w) * chsh(&b, &s).unwrap();
            prop_assert!((mixed - expected).abs() < 1e-10);
            prop_assert!(mixed.abs() <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
            prop_assert!(mixed.abs() <= chsh_optimal(&a.mix(&b, w)).unwrap() + 1e-9);
        }
    }
}
