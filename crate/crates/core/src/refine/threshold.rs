use serde::{Deserialize, Serialize};

use super::RefineError;
use crate::model::{CompareOp, Predicate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTrigger {
    /// `dynamic > threshold` or `dynamic < threshold`.
    pub predicate: Predicate,
    pub op: CompareOp,
    pub threshold: f64,
    /// Fraction of samples the predicate classifies correctly.
    pub accuracy: f64,
}

/// Best single-cut classifier of `failed` from the dynamic's value. Cuts
/// are midpoints between consecutive distinct values; ties in accuracy go
/// to the cut with the smallest magnitude, then to `>`.
pub fn infer_threshold_trigger(samples: &[(f64, bool)], dynamic: &str) -> Result<ThresholdTrigger, RefineError> {
    let positives = samples.iter().filter(|s| s.1).count();
    if positives == 0 || positives == samples.len() {
        return Err(RefineError::SingleClass);
    }
    let mut sorted: Vec<(f64, bool)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.iter().any(|s| !s.0.is_finite()) {
        return Err(RefineError::InsufficientEvidence("non-finite sample value".into()));
    }
    let n = sorted.len();
    // sweep: below = samples with value <= cut
    let (mut pos_below, mut neg_below) = (0usize, 0usize);
    let negatives = n - positives;
    let mut best: Option<(usize, f64, CompareOp)> = None;
    let mut i = 0;
    while i < n {
        let v = sorted[i].0;
        while i < n && sorted[i].0 == v {
            if sorted[i].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            i += 1;
        }
        if i == n {
            break;
        }
        let cut = (v + sorted[i].0) / 2.0;
        let gt = neg_below + (positives - pos_below);
        let lt = pos_below + (negatives - neg_below);
        for (correct, op) in [(gt, CompareOp::Gt), (lt, CompareOp::Lt)] {
            let better = match best {
                None => true,
                Some((bc, bcut, _)) => correct > bc || (correct == bc && cut.abs() < bcut.abs()),
            };
            if better {
                best = Some((correct, cut, op));
            }
        }
    }
    let (correct, threshold, op) =
        best.ok_or_else(|| RefineError::InsufficientEvidence("all samples share one value".into()))?;
    Ok(ThresholdTrigger {
        predicate: Predicate::compare(dynamic, op, threshold),
        op,
        threshold,
        accuracy: correct as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn separable_midpoint() {
        let s = [(20.0, false), (30.0, false), (40.0, true), (50.0, true)];
        let t = infer_threshold_trigger(&s, "f").unwrap();
        assert_eq!(t.predicate, Predicate::compare("f", CompareOp::Gt, 35.0));
        assert_eq!(t.accuracy, 1.0);
        assert_eq!(t.predicate.to_string(), "f > 35");
    }

    #[test]
    fn reversed_direction() {
        let s = [(1.0, true), (2.0, true), (3.0, false)];
        let t = infer_threshold_trigger(&s, "g").unwrap();
        assert_eq!((t.op, t.threshold, t.accuracy), (CompareOp::Lt, 2.5, 1.0));
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(infer_threshold_trigger(&[(1.0, true), (2.0, true)], "f"), Err(RefineError::SingleClass)));
        assert!(infer_threshold_trigger(&[(1.0, true), (1.0, false)], "f").is_err());
    }

    /// Every cut, both directions, counted directly.
    fn brute_force(samples: &[(f64, bool)]) -> f64 {
        let mut values: Vec<f64> = samples.iter().map(|s| s.0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut best = 0;
        for w in values.windows(2) {
            let c = (w[0] + w[1]) / 2.0;
            let gt = samples.iter().filter(|s| (s.0 > c) == s.1).count();
            let lt = samples.iter().filter(|s| (s.0 < c) == s.1).count();
            best = best.max(gt).max(lt);
        }
        best as f64 / samples.len() as f64
    }

    proptest! {
        #[test]
        fn matches_exhaustive_stump(samples in prop::collection::vec((0u8..40, any::<bool>()), 2..100)) {
            let s: Vec<(f64, bool)> = samples.iter().map(|(v, b)| (f64::from(*v), *b)).collect();
            if let Ok(t) = infer_threshold_trigger(&s, "d") {
                prop_assert_eq!(t.accuracy, brute_force(&s));
                let hits = s.iter().filter(|x| (if t.op == CompareOp::Gt { x.0 > t.threshold } else { x.0 < t.threshold }) == x.1).count();
                prop_assert_eq!(hits as f64 / s.len() as f64, t.accuracy);
            }
        }
    }
}
