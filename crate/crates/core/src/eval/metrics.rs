//! Confusion matrices and the derived percentages. "Ironic" is the positive
//! class; any ratio with a zero denominator is reported as 0.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts seen with "non_ironic" as the positive class.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn add(&mut self, gold: Label, pred: Label) {
        match (gold, pred) {
            (Label::Ironic, Label::Ironic) => self.tp += 1,
            (Label::NonIronic, Label::Ironic) => self.fp += 1,
            (Label::Ironic, Label::NonIronic) => self.fn_ += 1,
            (Label::NonIronic, Label::NonIronic) => self.tn += 1,
        }
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        cm.add(g, p);
    }
    Ok(cm)
}

/// All values are percentages in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision_pos: f64,
    pub recall_pos: f64,
    pub f1_pos: f64,
    pub precision_neg: f64,
    pub recall_neg: f64,
    pub f1_neg: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::Empty);
    }
    let precision_pos = pct(cm.tp, cm.tp + cm.fp);
    let recall_pos = pct(cm.tp, cm.tp + cm.fn_);
    let precision_neg = pct(cm.tn, cm.tn + cm.fn_);
    let recall_neg = pct(cm.tn, cm.tn + cm.fp);
    let f1_pos = f1(precision_pos, recall_pos);
    let f1_neg = f1(precision_neg, recall_neg);
    Ok(Metrics {
        accuracy: pct(cm.tp + cm.tn, cm.total()),
        precision_pos,
        recall_pos,
        f1_pos,
        precision_neg,
        recall_neg,
        f1_neg,
        macro_precision: (precision_pos + precision_neg) / 2.0,
        macro_recall: (recall_pos + recall_neg) / 2.0,
        macro_f1: (f1_pos + f1_neg) / 2.0,
    })
}

/// Macro F1 of a labelling, 0 for empty input.
pub fn macro_f1(gold: &[Label], pred: &[Label]) -> f64 {
    confusion(gold, pred)
        .and_then(|cm| metrics(&cm))
        .map_or(0.0, |m| m.macro_f1)
}
