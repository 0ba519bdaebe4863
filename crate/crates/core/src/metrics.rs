//! Confusion matrix, accuracy and Matthews correlation coefficient.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with label 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub const fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Swaps which class counts as positive.
    pub fn label_swapped(&self) -> Self {
        Self::new(self.tn, self.tp, self.fn_, self.fp)
    }

    /// Flips every prediction.
    pub fn prediction_flipped(&self) -> Self {
        Self::new(self.fn_, self.fp, self.tn, self.tp)
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            what: "y_true vs y_pred",
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty("no labels to compare"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t != 0, p != 0) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// `(TP + TN) / total`; 0 for an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    let total = cm.total();
    if total == 0 {
        return 0.0;
    }
    (cm.tp + cm.tn) as f64 / total as f64
}

/// Matthews correlation coefficient. Defined as 0 when any marginal is
/// empty (for example a single-class prediction).
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let denom_sq = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom_sq == 0.0 {
        return 0.0;
    }
    let value = (tp * tn - fp * fn_) / libm::sqrt(denom_sq);
    value.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub accuracy: f64,
    pub mcc: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            accuracy: 0.8,
            mcc: 0.65,
        }
    }
}

impl Thresholds {
    pub fn is_effective(&self, accuracy: f64, mcc: f64) -> bool {
        accuracy >= self.accuracy && mcc >= self.mcc
    }
}

/// One cell of the evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub market: String,
    pub task: String,
    pub feature_set: String,
    pub classifier: String,
    pub accuracy: f64,
    pub mcc: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub effective: bool,
}

impl EvalRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        market: String,
        task: String,
        feature_set: String,
        classifier: String,
        cm: &ConfusionMatrix,
        n_train: usize,
        n_test: usize,
        thresholds: &Thresholds,
    ) -> Self {
        let accuracy = accuracy(cm);
        let mcc = mcc(cm);
        Self {
            market,
            task,
            feature_set,
            classifier,
            accuracy,
            mcc,
            n_train,
            n_test,
            effective: thresholds.is_effective(accuracy, mcc),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_confusions() {
        assert_eq!(confusion(&[1, 0], &[1, 0]).unwrap(), ConfusionMatrix::new(1, 1, 0, 0));
        assert_eq!(confusion(&[1, 1], &[0, 0]).unwrap(), ConfusionMatrix::new(0, 0, 0, 2));
        assert!(confusion(&[1], &[1, 0]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(accuracy(&ConfusionMatrix::new(1, 1, 0, 0)), 1.0);
        assert_eq!(accuracy(&ConfusionMatrix::new(0, 0, 1, 1)), 0.0);
        assert_eq!(accuracy(&ConfusionMatrix::new(4, 5, 1, 2)), 0.75);
    }

    #[test]
    fn mcc_values() {
        assert_eq!(mcc(&ConfusionMatrix::new(1, 1, 0, 0)), 1.0);
        assert_eq!(mcc(&ConfusionMatrix::new(0, 0, 1, 1)), -1.0);
        let expected = 18.0 / libm::sqrt(5.0 * 6.0 * 6.0 * 7.0);
        assert!((mcc(&ConfusionMatrix::new(4, 5, 1, 2)) - expected).abs() < 1e-12);
        assert!((expected - 0.5071).abs() < 1e-4);
    }

    #[test]
    fn constant_prediction_has_zero_mcc() {
        assert_eq!(mcc(&ConfusionMatrix::new(7, 0, 3, 0)), 0.0);
        assert_eq!(mcc(&ConfusionMatrix::new(0, 5, 0, 9)), 0.0);
    }

    #[test]
    fn effectiveness_thresholds() {
        let t = Thresholds::default();
        assert!(t.is_effective(0.81, 0.66));
        assert!(t.is_effective(0.8, 0.65));
        assert!(!t.is_effective(0.79, 0.9));
        assert!(!t.is_effective(0.9, 0.64));
    }
}
