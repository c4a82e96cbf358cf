use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::Vector2;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_chain::dark_noise_fraction;
use crate::qstate::{c, DensityMatrix, C64};
use crate::rng::child_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    /// (+1, −1) eigenvectors.
    pub fn eigenvectors(self) -> [Vector2<C64>; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Axis::Z => [
                Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
                Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            ],
            Axis::X => [
                Vector2::new(c(s, 0.0), c(s, 0.0)),
                Vector2::new(c(s, 0.0), c(-s, 0.0)),
            ],
            Axis::Y => [
                Vector2::new(c(s, 0.0), c(0.0, s)),
                Vector2::new(c(s, 0.0), c(0.0, -s)),
            ],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Z => "Z",
            Axis::X => "X",
            Axis::Y => "Y",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" | "z" => Ok(Axis::Z),
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            other => Err(Error::param("axis", format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub ion_axis: Axis,
    pub photon_axis: Axis,
}

impl MeasurementSetting {
    pub fn new(ion_axis: Axis, photon_axis: Axis) -> Self {
        Self {
            ion_axis,
            photon_axis,
        }
    }

    /// The 3×3 grid, ion axis major.
    pub fn all() -> [MeasurementSetting; 9] {
        let mut out = [MeasurementSetting::new(Axis::Z, Axis::Z); 9];
        for (i, a) in Axis::ALL.iter().enumerate() {
            for (j, b) in Axis::ALL.iter().enumerate() {
                out[3 * i + j] = MeasurementSetting::new(*a, *b);
            }
        }
        out
    }

    /// Product eigenvectors for outcomes ++, +−, −+, −−.
    pub fn outcome_vectors(&self) -> [nalgebra::Vector4<C64>; 4] {
        let a = self.ion_axis.eigenvectors();
        let b = self.photon_axis.eigenvectors();
        let prod = |u: &Vector2<C64>, v: &Vector2<C64>| {
            nalgebra::Vector4::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])
        };
        [
            prod(&a[0], &b[0]),
            prod(&a[0], &b[1]),
            prod(&a[1], &b[0]),
            prod(&a[1], &b[1]),
        ]
    }

    /// Born-rule probabilities of the four outcomes.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<[f64; 4]> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: rho.dim(),
            });
        }
        let m = rho.matrix();
        let mut p = [0.0; 4];
        for (k, v) in self.outcome_vectors().iter().enumerate() {
            let mut acc = c(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += v[i].conj() * m[(i, j)] * v[j];
                }
            }
            p[k] = acc.re.max(0.0);
        }
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            p.iter_mut().for_each(|x| *x /= s);
        }
        Ok(p)
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.ion_axis, self.photon_axis)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    /// ++, +−, −+, −−
    pub counts: [u64; 4],
    pub shots: u64,
}

impl CountRecord {
    pub fn new(setting: MeasurementSetting, counts: [u64; 4]) -> Self {
        Self {
            setting,
            counts,
            shots: counts.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.iter().sum::<u64>() != self.shots {
            return Err(Error::DegenerateRecord(format!(
                "{}: counts do not sum to shots",
                self.setting
            )));
        }
        if self.shots == 0 {
            return Err(Error::DegenerateRecord(format!(
                "{}: zero shots",
                self.setting
            )));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> FrequencyRecord {
        FrequencyRecord {
            setting: self.setting,
            weights: self.counts.map(|n| n as f64),
        }
    }
}

/// Possibly fractional outcome weights, e.g. exact expected counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub setting: MeasurementSetting,
    pub weights: [f64; 4],
}

impl FrequencyRecord {
    /// Expected counts shots·p for every outcome.
    pub fn exact(rho: &DensityMatrix, setting: MeasurementSetting, shots: f64) -> Result<Self> {
        let p = setting.probabilities(rho)?;
        Ok(Self {
            setting,
            weights: p.map(|x| x * shots),
        })
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Multinomial draw via successive conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64; 4], rng: &mut R) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 {
            (probs[k] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(left, q)
            .expect("probability in [0, 1]")
            .sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= probs[k];
    }
    out[3] = left;
    out
}

/// Counts for one setting from (1−p)ρ + p·I/4 with p = 1/(snr+1).
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    setting: MeasurementSetting,
    shots: u64,
    snr: f64,
    rng: &mut R,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::param("shots", "must be positive"));
    }
    if !(snr >= 0.0) {
        return Err(Error::param("snr", "must be non-negative"));
    }
    let p_noise = dark_noise_fraction(snr);
    let probs = setting
        .probabilities(rho)?
        .map(|x| (1.0 - p_noise) * x + p_noise / 4.0);
    Ok(CountRecord {
        setting,
        counts: multinomial(shots, &probs, rng),
        shots,
    })
}

/// Split `total` as evenly as possible over the nine settings.
pub fn even_split(total: u64) -> [u64; 9] {
    let base = total / 9;
    let extra = (total % 9) as usize;
    std::array::from_fn(|i| base + u64::from(i < extra))
}

/// Full 3×3 record set; setting i draws from child stream i of `seed`.
pub fn simulate_tomography(
    rho: &DensityMatrix,
    shots_per_setting: &[u64; 9],
    snr: f64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    MeasurementSetting::all()
        .iter()
        .zip(shots_per_setting)
        .enumerate()
        .map(|(i, (s, &n))| simulate_counts(rho, *s, n, snr, &mut child_rng(seed, i as u64)))
        .collect()
}

pub fn write_records_csv<W: Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "setting_ion",
        "setting_photon",
        "n_pp",
        "n_pm",
        "n_mp",
        "n_mm",
    ])?;
    for r in records {
        let mut row = vec![
            r.setting.ion_axis.to_string(),
            r.setting.photon_axis.to_string(),
        ];
        row.extend(r.counts.iter().map(u64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() != 6 {
            return Err(Error::param(
                "counts csv",
                format!("expected 6 columns, got {}", row.len()),
            ));
        }
        let setting = MeasurementSetting::new(row[0].parse()?, row[1].parse()?);
        let mut counts = [0u64; 4];
        for (k, slot) in counts.iter_mut().enumerate() {
            *slot = row[2 + k].trim().parse().map_err(|e| {
                Error::param("counts csv", format!("bad count {:?}: {e}", &row[2 + k]))
            })?;
        }
        out.push(CountRecord::new(setting, counts));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::PureState;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_zz_pattern() {
        let rho = DensityMatrix::from_pure(&PureState::bell(0.0));
        let p = MeasurementSetting::new(Axis::Z, Axis::Z)
            .probabilities(&rho)
            .unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1] + p[2], 0.0, epsilon = 1e-15);
        let rec = simulate_counts(
            &rho,
            MeasurementSetting::new(Axis::Z, Axis::Z),
            1000,
            f64::INFINITY,
            &mut rng_from_seed(1),
        )
        .unwrap();
        assert_eq!(rec.counts[1] + rec.counts[2], 0);
        // YY is anti-correlated for this state
        let y = MeasurementSetting::new(Axis::Y, Axis::Y)
            .probabilities(&rho)
            .unwrap();
        assert_abs_diff_eq!(y[1] + y[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_state_is_flat() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let rec = simulate_counts(
            &rho,
            MeasurementSetting::new(Axis::X, Axis::Y),
            400_000,
            f64::INFINITY,
            &mut rng_from_seed(2),
        )
        .unwrap();
        for n in rec.counts {
            assert!((n as f64 / 400_000.0 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn snr_shifts_toward_uniform() {
        let rho = DensityMatrix::from_pure(&PureState::bell(0.0));
        let n = 2_000_000;
        let rec = simulate_counts(
            &rho,
            MeasurementSetting::new(Axis::Z, Axis::Z),
            n,
            28.0,
            &mut rng_from_seed(3),
        )
        .unwrap();
        let p = 1.0 / 29.0;
        let expected_pp = (1.0 - p) * 0.5 + p / 4.0;
        assert!((rec.counts[0] as f64 / n as f64 - expected_pp).abs() < 2e-3);
        assert!((rec.counts[1] as f64 / n as f64 - p / 4.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_per_seed() {
        let rho = DensityMatrix::werner(&PureState::bell(0.0), 0.8).unwrap();
        let a = simulate_tomography(&rho, &even_split(1780), 28.0, 9).unwrap();
        let b = simulate_tomography(&rho, &even_split(1780), 28.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.shots).sum::<u64>(), 1780);
        assert_eq!(
            even_split(1780),
            [198, 198, 198, 198, 198, 198, 198, 197, 197]
        );
    }

    #[test]
    fn csv_round_trip() {
        let rho = DensityMatrix::werner(&PureState::bell(0.0), 0.8).unwrap();
        let recs = simulate_tomography(&rho, &even_split(900), 28.0, 4).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting_ion,setting_photon,n_pp,n_pm,n_mp,n_mm\n"));
        assert_eq!(read_records_csv(&buf[..]).unwrap(), recs);
    }
}
