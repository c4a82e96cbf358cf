//! Emission spectrum of the ion photon and its overlap with the memory band.
//!
//! The spectrum is an incoherent pair of Lorentzians split by the Zeeman
//! splitting. `gamma_natural` is the natural linewidth (FWHM), so each line
//! has half-width Γ/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    /// MHz, FWHM
    pub gamma_natural: f64,
    /// MHz
    pub zeeman_split: f64,
    /// MHz
    pub qm_bandwidth: f64,
    /// Memory band center relative to the spectrum center, MHz.
    pub detuning_df: f64,
}

impl Default for SpectralModel {
    fn default() -> Self {
        Self {
            gamma_natural: 19.6,
            zeeman_split: 11.22,
            qm_bandwidth: 48.2,
            detuning_df: 0.0,
        }
    }
}

impl SpectralModel {
    pub fn half_width(&self) -> f64 {
        self.gamma_natural / 2.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma_natural > 0.0) {
            return Err(Error::param("gamma_natural", "must be positive"));
        }
        if !(self.zeeman_split >= 0.0) {
            return Err(Error::param("zeeman_split", "must be non-negative"));
        }
        if !(self.qm_bandwidth > 0.0) {
            return Err(Error::param("qm_bandwidth", "must be positive"));
        }
        Ok(())
    }
}

/// Double Lorentzian, each line peaking at 1.
pub fn spectral_density(f: f64, m: &SpectralModel) -> f64 {
    let hw2 = m.half_width().powi(2);
    let f0 = m.zeeman_split / 2.0;
    hw2 / ((f - f0).powi(2) + hw2) + hw2 / ((f + f0).powi(2) + hw2)
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
    budget: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    *budget = budget.saturating_sub(2);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 || *budget == 0 {
        *worst = worst.max(delta.abs() / 15.0);
        return left + right + delta / 15.0;
    }
    simpson_step(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        tol / 2.0,
        depth - 1,
        worst,
        budget,
    ) + simpson_step(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        tol / 2.0,
        depth - 1,
        worst,
        budget,
    )
}

/// Adaptive Simpson quadrature. Fails if any panel left unrefined (depth or
/// evaluation budget exhausted) carries an error estimate above `report_tol`.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    report_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let mut worst = 0.0;
    let whole = simpson(fa, fm, fb, a, b);
    let mut budget = 2_000_000;
    let v = simpson_step(f, a, b, fa, fm, fb, whole, tol, 48, &mut worst, &mut budget);
    if worst > report_tol {
        return Err(Error::IntegrationNonConvergence(worst));
    }
    Ok(v)
}

/// ∫ hw²/((x − c)² + hw²) dx over [lo, hi] (infinite bounds allowed).
fn lorentz_integral(lo: f64, hi: f64, center: f64, hw: f64) -> f64 {
    hw * (((hi - center) / hw).atan() - ((lo - center) / hw).atan())
}

fn integrate_spectrum(lo: f64, hi: f64, m: &SpectralModel) -> Result<f64> {
    let hw = m.half_width();
    let f0 = m.zeeman_split / 2.0;
    // numerics on the core, analytic tails beyond it
    let edge = 10.0 * m.gamma_natural + f0;
    let (a, b) = (lo.max(-edge), hi.min(edge));
    let mut total = 0.0;
    if a < b {
        total += adaptive_simpson(&|f| spectral_density(f, m), a, b, 1e-8, 1e-6)?;
    }
    for (tlo, thi) in [(lo, hi.min(-edge)), (lo.max(edge), hi)] {
        if tlo < thi {
            total += lorentz_integral(tlo, thi, f0, hw) + lorentz_integral(tlo, thi, -f0, hw);
        }
    }
    Ok(total)
}

/// Fraction of the photon spectrum inside [−B/2 + Δf, B/2 + Δf].
pub fn bandwidth_match(m: &SpectralModel) -> Result<f64> {
    m.validate()?;
    let lo = m.detuning_df - m.qm_bandwidth / 2.0;
    let hi = m.detuning_df + m.qm_bandwidth / 2.0;
    let inside = integrate_spectrum(lo, hi, m)?;
    let full = integrate_spectrum(f64::NEG_INFINITY, f64::INFINITY, m)?;
    Ok((inside / full).clamp(0.0, 1.0))
}

/// Arctan closed form of [`bandwidth_match`].
pub fn bandwidth_match_closed_form(m: &SpectralModel) -> f64 {
    let hw = m.half_width();
    let f0 = m.zeeman_split / 2.0;
    let lo = m.detuning_df - m.qm_bandwidth / 2.0;
    let hi = m.detuning_df + m.qm_bandwidth / 2.0;
    let inside = lorentz_integral(lo, hi, f0, hw) + lorentz_integral(lo, hi, -f0, hw);
    inside / (2.0 * std::f64::consts::PI * hw)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn density_is_even(f in -500.0f64..500.0, gamma in 0.1f64..100.0, split in 0.0f64..100.0) {
            let m = SpectralModel { gamma_natural: gamma, zeeman_split: split, ..SpectralModel::default() };
            prop_assert!((spectral_density(f, &m) - spectral_density(-f, &m)).abs() <= 1e-15);
        }
    }
}
