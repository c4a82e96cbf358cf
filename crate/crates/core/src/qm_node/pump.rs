//! Spectral pump planning for the memory crystal.
//!
//! Every hyperfine transition of an ion class sits at a fixed offset from the
//! class reference and is inhomogeneously broadened into a band of
//! `line_width_mhz`. A position `x` inside that band labels one sub-ensemble
//! of ions, whose transitions are all at `offset + x`. A pump window empties
//! the ground level of every transition it overlaps; the population lands in
//! the other ground levels and enhances whatever still absorbs in the target
//! band.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::PumpPlan(format!("malformed interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    fn shift(&self, d: f64) -> Interval {
        Interval {
            lo: self.lo + d,
            hi: self.hi + d,
        }
    }
}

fn merge(mut v: Vec<Interval>) -> Vec<Interval> {
    v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub ground: String,
    pub excited: String,
    pub offset_mhz: f64,
}

impl Transition {
    pub fn label(&self) -> String {
        format!("g{}-e{}", self.ground, self.excited)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelOffset {
    pub level: String,
    pub mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    pub ground_offsets: Vec<LevelOffset>,
    pub excited_offsets: Vec<LevelOffset>,
    pub line_width_mhz: f64,
    pub windows: Vec<Interval>,
    pub target: Interval,
    /// Relative enhancement credited to a partly emptied donor level.
    pub partial_weight: f64,
    pub native_d_h: f64,
    pub native_d_v: f64,
}

fn level(level: &str, mhz: f64) -> LevelOffset {
    LevelOffset {
        level: level.to_string(),
        mhz,
    }
}

/// Class IX hyperfine structure and the two 223.2 MHz chirped pump windows
/// placed ±137 MHz around the 248.6 MHz target center.
pub fn class_ix_config() -> PumpConfig {
    PumpConfig {
        ground_offsets: vec![level("1/2", 224.5), level("3/2", 148.1), level("5/2", 0.0)],
        excited_offsets: vec![level("1/2", 0.0), level("3/2", 159.1), level("5/2", 431.8)],
        line_width_mhz: 497.2,
        windows: vec![
            Interval { lo: 0.0, hi: 223.2 },
            Interval {
                lo: 274.0,
                hi: 497.2,
            },
        ],
        target: Interval {
            lo: 224.5,
            hi: 272.7,
        },
        partial_weight: 0.0,
        native_d_h: 5.24,
        native_d_v: 4.66,
    }
}

impl Default for PumpConfig {
    fn default() -> Self {
        class_ix_config()
    }
}

impl PumpConfig {
    pub fn transitions(&self) -> Vec<Transition> {
        self.ground_offsets
            .iter()
            .flat_map(|g| {
                self.excited_offsets.iter().map(move |e| Transition {
                    ground: g.level.clone(),
                    excited: e.level.clone(),
                    offset_mhz: g.mhz + e.mhz,
                })
            })
            .collect()
    }

    pub fn plan(&self) -> Result<PumpPlan> {
        plan_pump_regions(
            &self.transitions(),
            self.line_width_mhz,
            &self.windows,
            self.target,
        )
    }

    /// Enhanced absorption depth for (H, V).
    pub fn effective_depths(&self) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&self.partial_weight) {
            return Err(Error::param(
                "partial_weight",
                format!("{} not in [0, 1]", self.partial_weight),
            ));
        }
        let plan = self.plan()?;
        let h = effective_depth(
            &plan,
            &uniform_native_depth(&plan, self.native_d_h),
            self.partial_weight,
        );
        let v = effective_depth(
            &plan,
            &uniform_native_depth(&plan, self.native_d_v),
            self.partial_weight,
        );
        Ok((h, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DonorState {
    Untouched,
    Partial,
    Full,
}

/// A stretch of the target band where one transition absorbs with fixed
/// donor configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivingSegment {
    pub transition: usize,
    /// Absolute frequency range, MHz.
    pub band: Interval,
    pub self_pumped: bool,
    pub full_donors: u32,
    pub partial_donors: u32,
}

impl SurvivingSegment {
    /// Population of the absorbing ground level relative to no pumping.
    pub fn multiplier(&self, partial_weight: f64) -> f64 {
        if self.self_pumped {
            0.0
        } else {
            1.0 + self.full_donors as f64 + partial_weight * self.partial_donors as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpPlan {
    pub transitions: Vec<Transition>,
    pub pump_windows: Vec<Interval>,
    pub target: Interval,
    pub line_width_mhz: f64,
    /// Per transition, in band coordinates [0, line_width].
    pub pumped_regions: Vec<Vec<Interval>>,
    pub segments: Vec<SurvivingSegment>,
}

impl PumpPlan {
    fn pumped_at(&self, t: usize, x: f64) -> bool {
        self.pumped_regions[t].iter().any(|iv| iv.contains(x))
    }

    fn donor_state(&self, ground: &str, x: f64) -> DonorState {
        let active: Vec<usize> = (0..self.transitions.len())
            .filter(|&i| self.transitions[i].ground == ground && !self.pumped_regions[i].is_empty())
            .collect();
        let hit = active.iter().filter(|&&i| self.pumped_at(i, x)).count();
        match hit {
            0 => DonorState::Untouched,
            n if n == active.len() => DonorState::Full,
            _ => DonorState::Partial,
        }
    }

    /// Transitions that absorb somewhere in the target band.
    pub fn absorbing_transitions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.segments.iter().map(|s| s.transition).collect();
        v.dedup();
        v
    }

    /// Total pumped measure across all transitions, MHz.
    pub fn pumped_measure(&self) -> f64 {
        self.pumped_regions
            .iter()
            .flatten()
            .map(Interval::width)
            .sum()
    }

    /// CSV rows `transition, lo_MHz, hi_MHz, fraction`, where fraction is the
    /// share of the broadened line emptied by that interval.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["transition", "lo_MHz", "hi_MHz", "fraction"])?;
        for (t, regions) in self.transitions.iter().zip(&self.pumped_regions) {
            for iv in regions {
                w.write_record([
                    t.label(),
                    format!("{}", round6(iv.lo)),
                    format!("{}", round6(iv.hi)),
                    format!("{}", round6(iv.width() / self.line_width_mhz)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6 + 0.0
}

pub fn plan_pump_regions(
    transitions: &[Transition],
    line_width_mhz: f64,
    windows: &[Interval],
    target: Interval,
) -> Result<PumpPlan> {
    if !(line_width_mhz > 0.0) {
        return Err(Error::PumpPlan("line width must be positive".into()));
    }
    let target = Interval::new(target.lo, target.hi)?;
    for w in windows {
        let w = Interval::new(w.lo, w.hi)?;
        if w.intersect(&target).is_some() && !w.covers(&target) {
            return Err(Error::PumpPlan(format!(
                "pump window [{}, {}] partly overlaps the target band [{}, {}]",
                w.lo, w.hi, target.lo, target.hi
            )));
        }
    }
    let domain = Interval {
        lo: 0.0,
        hi: line_width_mhz,
    };
    let pumped_regions: Vec<Vec<Interval>> = transitions
        .iter()
        .map(|t| {
            merge(
                windows
                    .iter()
                    .filter_map(|w| w.shift(-t.offset_mhz).intersect(&domain))
                    .collect(),
            )
        })
        .collect();

    let mut plan = PumpPlan {
        transitions: transitions.to_vec(),
        pump_windows: windows.to_vec(),
        target,
        line_width_mhz,
        pumped_regions,
        segments: Vec::new(),
    };

    let mut breaks: Vec<f64> = plan
        .pumped_regions
        .iter()
        .flatten()
        .flat_map(|iv| [iv.lo, iv.hi])
        .collect();
    breaks.sort_by(f64::total_cmp);

    for (ti, t) in transitions.iter().enumerate() {
        let Some(span) = target.shift(-t.offset_mhz).intersect(&domain) else {
            continue;
        };
        let mut cuts = vec![span.lo];
        cuts.extend(
            breaks
                .iter()
                .copied()
                .filter(|&b| b > span.lo && b < span.hi),
        );
        cuts.push(span.hi);
        cuts.dedup();
        let mut segs: Vec<SurvivingSegment> = Vec::new();
        for pair in cuts.windows(2) {
            let x = 0.5 * (pair[0] + pair[1]);
            let mut full = 0;
            let mut partial = 0;
            let mut seen: Vec<&str> = Vec::new();
            for other in transitions {
                if other.ground == t.ground || seen.contains(&other.ground.as_str()) {
                    continue;
                }
                seen.push(&other.ground);
                match plan.donor_state(&other.ground, x) {
                    DonorState::Full => full += 1,
                    DonorState::Partial => partial += 1,
                    DonorState::Untouched => {}
                }
            }
            let seg = SurvivingSegment {
                transition: ti,
                band: Interval {
                    lo: pair[0],
                    hi: pair[1],
                }
                .shift(t.offset_mhz),
                self_pumped: plan.pumped_at(ti, x),
                full_donors: full,
                partial_donors: partial,
            };
            match segs.last_mut() {
                Some(prev)
                    if prev.self_pumped == seg.self_pumped
                        && prev.full_donors == seg.full_donors
                        && prev.partial_donors == seg.partial_donors =>
                {
                    prev.band.hi = seg.band.hi
                }
                _ => segs.push(seg),
            }
        }
        plan.segments.extend(segs);
    }
    Ok(plan)
}

/// Equal split of a measured total depth over the transitions absorbing in
/// the target band.
pub fn uniform_native_depth(plan: &PumpPlan, total: f64) -> Vec<f64> {
    let absorbing = plan.absorbing_transitions();
    let share = if absorbing.is_empty() {
        0.0
    } else {
        total / absorbing.len() as f64
    };
    (0..plan.transitions.len())
        .map(|i| if absorbing.contains(&i) { share } else { 0.0 })
        .collect()
}

/// Band-averaged absorption depth after pumping.
pub fn effective_depth(plan: &PumpPlan, native_d: &[f64], partial_weight: f64) -> f64 {
    plan.segments
        .iter()
        .map(|s| {
            native_d.get(s.transition).copied().unwrap_or(0.0)
                * s.multiplier(partial_weight)
                * s.band.width()
        })
        .sum::<f64>()
        / plan.target.width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn regions(plan: &PumpPlan, g: &str, e: &str) -> Vec<(f64, f64)> {
        let i = plan
            .transitions
            .iter()
            .position(|t| t.ground == g && t.excited == e)
            .unwrap();
        plan.pumped_regions[i]
            .iter()
            .map(|iv| (round6(iv.lo), round6(iv.hi)))
            .collect()
    }

    #[test]
    fn class_ix_regions_reproduced() {
        let plan = class_ix_config().plan().unwrap();
        assert_eq!(regions(&plan, "1/2", "1/2"), vec![(49.5, 272.7)]);
        assert_eq!(regions(&plan, "1/2", "3/2"), vec![(0.0, 113.6)]);
        assert_eq!(
            regions(&plan, "3/2", "1/2"),
            vec![(0.0, 75.1), (125.9, 349.1)]
        );
        assert_eq!(regions(&plan, "3/2", "3/2"), vec![(0.0, 190.0)]);
        assert_eq!(
            regions(&plan, "5/2", "1/2"),
            vec![(0.0, 223.2), (274.0, 497.2)]
        );
        assert_eq!(
            regions(&plan, "5/2", "3/2"),
            vec![(0.0, 64.1), (114.9, 338.1)]
        );
        assert_eq!(regions(&plan, "5/2", "5/2"), vec![(0.0, 65.4)]);
        assert!(regions(&plan, "1/2", "5/2").is_empty());
        assert!(regions(&plan, "3/2", "5/2").is_empty());
    }

    #[test]
    fn class_ix_donor_classification() {
        let plan = class_ix_config().plan().unwrap();
        // |1/2⟩g→|1/2⟩e absorbs for x in [0, 48.2] where |5/2⟩g is fully emptied
        let i = plan
            .transitions
            .iter()
            .position(|t| t.ground == "1/2" && t.excited == "1/2")
            .unwrap();
        let x = 20.0;
        assert_eq!(plan.donor_state("5/2", x), DonorState::Full);
        assert!(!plan.pumped_at(i, x));
        // |5/2⟩g only partly emptied for x in (75.1, 125.9)
        assert_eq!(plan.donor_state("5/2", 100.0), DonorState::Partial);
        assert_eq!(plan.absorbing_transitions().len(), 4);
    }

    #[test]
    fn enhanced_depths() {
        let (h, v) = class_ix_config().effective_depths().unwrap();
        assert!((h - 10.5).abs() <= 0.5, "H depth {h}");
        assert!((v - 9.0).abs() <= 0.5, "V depth {v}");
        // band-averaged multiplier (7.973 + 4.027·w)/4 from the segment table
        let plan = class_ix_config().plan().unwrap();
        let unit = uniform_native_depth(&plan, 4.0);
        assert_abs_diff_eq!(effective_depth(&plan, &unit, 0.0), 7.973029, epsilon = 1e-5);
        assert_abs_diff_eq!(
            effective_depth(&plan, &unit, 1.0) - effective_depth(&plan, &unit, 0.0),
            4.026971,
            epsilon = 1e-5
        );
    }

    #[test]
    fn no_windows_gives_native_depth() {
        let cfg = PumpConfig {
            windows: vec![],
            ..class_ix_config()
        };
        let plan = cfg.plan().unwrap();
        assert!(plan.pumped_regions.iter().all(Vec::is_empty));
        let (h, _) = cfg.effective_depths().unwrap();
        assert_abs_diff_eq!(h, 5.24, epsilon = 1e-12);
    }

    #[test]
    fn covering_window_empties_target() {
        let cfg = PumpConfig {
            windows: vec![Interval {
                lo: -1000.0,
                hi: 2000.0,
            }],
            ..class_ix_config()
        };
        let (h, v) = cfg.effective_depths().unwrap();
        assert_eq!((h, v), (0.0, 0.0));
    }

    #[test]
    fn single_transition_fully_pumped() {
        let t = vec![Transition {
            ground: "a".into(),
            excited: "b".into(),
            offset_mhz: 10.0,
        }];
        let plan = plan_pump_regions(
            &t,
            100.0,
            &[Interval { lo: 0.0, hi: 200.0 }],
            Interval {
                lo: 300.0,
                hi: 310.0,
            },
        )
        .unwrap();
        assert_eq!(
            plan.pumped_regions[0],
            vec![Interval { lo: 0.0, hi: 100.0 }]
        );
    }

    #[test]
    fn straddling_window_rejected() {
        let cfg = PumpConfig {
            windows: vec![Interval { lo: 0.0, hi: 230.0 }],
            ..class_ix_config()
        };
        assert!(matches!(cfg.plan(), Err(Error::PumpPlan(_))));
        let bad = PumpConfig {
            windows: vec![Interval { lo: 5.0, hi: 1.0 }],
            ..class_ix_config()
        };
        assert!(bad.plan().is_err());
    }

    #[test]
    fn csv_export() {
        let plan = class_ix_config().plan().unwrap();
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("transition,lo_MHz,hi_MHz,fraction\n"));
        assert!(text.contains("g1/2-e1/2,49.5,272.7,"));
        assert_eq!(text.lines().count(), 1 + 10);
    }
}
