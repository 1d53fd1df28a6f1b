use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Machine,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: Label,
    pub length: usize,
}

impl ScoredSample {
    pub fn new(score: f64, label: Label, length: usize) -> Self {
        Self { score, label, length }
    }
}

fn class_counts(samples: &[ScoredSample]) -> Result<(usize, usize)> {
    if let Some(s) = samples.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::MetricUndefined(format!("non-finite score {}", s.score)));
    }
    let m = samples.iter().filter(|s| s.label == Label::Machine).count();
    let h = samples.len() - m;
    if m == 0 || h == 0 {
        return Err(Error::MetricUndefined("both labels are required".into()));
    }
    Ok((m, h))
}

/// Mann-Whitney estimate of `P(machine > human)`, ties counted as one half.
pub fn auroc(samples: &[ScoredSample]) -> Result<f64> {
    let (m, h) = class_counts(samples)?;
    let mut order: Vec<&ScoredSample> = samples.iter().collect();
    order.sort_by(|a, b| a.score.total_cmp(&b.score));
    // Sum of mid-ranks of the machine samples.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && order[j + 1].score == order[i].score {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|s| s.label == Label::Machine).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;
    Ok(u / (m as f64 * h as f64))
}

/// Operating point for flagging `score >= threshold`: the smallest observed
/// score whose human false-positive rate is strictly below `fpr_cap`. When no
/// observed score qualifies the threshold is `+inf` and the TPR is zero.
pub fn tpr_at_fpr(samples: &[ScoredSample], fpr_cap: f64) -> Result<(f64, f64)> {
    let (m, h) = class_counts(samples)?;
    let mut sorted: Vec<&ScoredSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
    // Walk thresholds upward; counts of samples at or above the threshold shrink.
    let (mut above_m, mut above_h) = (m, h);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].score;
        if (above_h as f64 / h as f64) < fpr_cap {
            return Ok((above_m as f64 / m as f64, t));
        }
        while i < sorted.len() && sorted[i].score == t {
            match sorted[i].label {
                Label::Machine => above_m -= 1,
                Label::Human => above_h -= 1,
            }
            i += 1;
        }
    }
    Ok((0.0, f64::INFINITY))
}

/// ROC points `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one per distinct score.
pub fn roc_curve(samples: &[ScoredSample]) -> Result<Vec<(f64, f64)>> {
    let (m, h) = class_counts(samples)?;
    let mut sorted: Vec<&ScoredSample> = samples.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].score;
        while i < sorted.len() && sorted[i].score == t {
            match sorted[i].label {
                Label::Machine => tp += 1,
                Label::Human => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / h as f64, tp as f64 / m as f64));
    }
    Ok(points)
}

/// Labels scores: machine first, human second.
pub fn labelled(machine: &[f64], human: &[f64]) -> Vec<ScoredSample> {
    machine
        .iter()
        .map(|&s| ScoredSample::new(s, Label::Machine, 0))
        .chain(human.iter().map(|&s| ScoredSample::new(s, Label::Human, 0)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl BootstrapInterval {
    pub fn excludes_zero(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }
}

/// Percentile bootstrap for `AUROC(a) - AUROC(b)` where the two score sets
/// are paired: `a_machine[i]` and `b_machine[i]` come from the same text, as
/// do the human entries. Machine and human indices are resampled separately.
pub fn paired_auroc_difference(
    a_machine: &[f64],
    a_human: &[f64],
    b_machine: &[f64],
    b_human: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapInterval> {
    if a_machine.len() != b_machine.len() || a_human.len() != b_human.len() {
        return Err(Error::config("paired score sets must have equal sizes"));
    }
    if resamples == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::config("bootstrap needs resamples > 0 and a level in (0,1)"));
    }
    let estimate = auroc(&labelled(a_machine, a_human))? - auroc(&labelled(b_machine, b_human))?;
    let mut rng = CounterRng::new(seed);
    let (nm, nh) = (a_machine.len() as u64, a_human.len() as u64);
    let mut diffs = Vec::with_capacity(resamples);
    let (mut am, mut ah, mut bm, mut bh) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..resamples {
        am.clear();
        bm.clear();
        ah.clear();
        bh.clear();
        for _ in 0..nm {
            let i = rng.below(nm) as usize;
            am.push(a_machine[i]);
            bm.push(b_machine[i]);
        }
        for _ in 0..nh {
            let i = rng.below(nh) as usize;
            ah.push(a_human[i]);
            bh.push(b_human[i]);
        }
        diffs.push(auroc(&labelled(&am, &ah))? - auroc(&labelled(&bm, &bh))?);
    }
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let pick = |q: f64| diffs[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(BootstrapInterval { estimate, lower: pick(tail), upper: pick(1.0 - tail), level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auroc(machine: &[f64], human: &[f64]) -> f64 {
        let mut wins = 0.0;
        for &m in machine {
            for &h in human {
                wins += if m > h { 1.0 } else if m == h { 0.5 } else { 0.0 };
            }
        }
        wins / (machine.len() * human.len()) as f64
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&labelled(&[0.9, 0.8], &[0.2, 0.1])).unwrap(), 1.0);
        assert_eq!(auroc(&labelled(&[1.0; 3], &[1.0; 4])).unwrap(), 0.5);
        assert_eq!(auroc(&labelled(&[3.0, 1.0], &[2.0, 0.0])).unwrap(), 0.75);
        assert!(matches!(auroc(&labelled(&[1.0], &[])), Err(Error::MetricUndefined(_))));
        assert!(auroc(&labelled(&[f64::NAN], &[1.0])).is_err());
    }

    #[test]
    fn tpr_examples() {
        let (tpr, t) = tpr_at_fpr(&labelled(&[5.0; 10], &[0.0; 20]), 0.05).unwrap();
        assert_eq!(tpr, 1.0);
        assert!(t > 0.0 && t <= 5.0);
        let (tpr, _) = tpr_at_fpr(&labelled(&[3.0, 4.0], &[1.0, 2.0]), 0.05).unwrap();
        assert_eq!(tpr, 1.0);
        // Top score is human: no threshold reaches FPR < 1/|human| when the cap is tighter.
        let (tpr, t) = tpr_at_fpr(&labelled(&[1.0], &[2.0, 0.0]), 0.4).unwrap();
        assert_eq!((tpr, t), (0.0, f64::INFINITY));
    }

    #[test]
    fn identical_distributions_stay_under_cap() {
        let scores: Vec<f64> = (0..40).map(|i| (i * 37 % 17) as f64).collect();
        let (tpr, _) = tpr_at_fpr(&labelled(&scores, &scores), 0.05).unwrap();
        assert!(tpr < 0.05 + 1.0 / 40.0);
    }

    #[test]
    fn roc_endpoints() {
        let r = roc_curve(&labelled(&[3.0, 1.0], &[2.0, 0.0])).unwrap();
        assert_eq!(r.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.last(), Some(&(1.0, 1.0)));
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn bootstrap_detects_a_clear_gap() {
        let am: Vec<f64> = (0..50).map(|i| 2.0 + (i % 7) as f64).collect();
        let bm: Vec<f64> = (0..50).map(|i| (i % 7) as f64 - 1.0).collect();
        let h: Vec<f64> = (0..50).map(|i| (i % 5) as f64).collect();
        let ci = paired_auroc_difference(&am, &h, &bm, &h, 500, 0.95, 3).unwrap();
        assert!(ci.estimate > 0.3 && ci.excludes_zero() && ci.lower <= ci.upper);
        let same = paired_auroc_difference(&am, &h, &am, &h, 200, 0.95, 3).unwrap();
        assert_eq!((same.lower, same.upper), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn auroc_matches_pairwise_count(
            machine in prop::collection::vec(-5i32..5, 1..40),
            human in prop::collection::vec(-5i32..5, 1..40),
        ) {
            let m: Vec<f64> = machine.iter().map(|&x| x as f64 * 0.5).collect();
            let h: Vec<f64> = human.iter().map(|&x| x as f64 * 0.5).collect();
            let got = auroc(&labelled(&m, &h)).unwrap();
            prop_assert!((got - brute_auroc(&m, &h)).abs() < 1e-12);
        }

        #[test]
        fn returned_threshold_honours_cap(
            machine in prop::collection::vec(-5i32..5, 1..40),
            human in prop::collection::vec(-5i32..5, 1..40),
            cap in 0.01f64..0.5,
        ) {
            let m: Vec<f64> = machine.iter().map(|&x| x as f64).collect();
            let h: Vec<f64> = human.iter().map(|&x| x as f64).collect();
            let (tpr, t) = tpr_at_fpr(&labelled(&m, &h), cap).unwrap();
            let fpr = h.iter().filter(|&&x| x >= t).count() as f64 / h.len() as f64;
            prop_assert!(fpr < cap);
            let want = m.iter().filter(|&&x| x >= t).count() as f64 / m.len() as f64;
            prop_assert_eq!(tpr, want);
            // No smaller observed score would also satisfy the cap.
            for &s in m.iter().chain(&h).filter(|&&s| s < t) {
                let f = h.iter().filter(|&&x| x >= s).count() as f64 / h.len() as f64;
                prop_assert!(f >= cap);
            }
        }
    }
}
