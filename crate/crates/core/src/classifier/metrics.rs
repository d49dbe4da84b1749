use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Accuracy and macro-averaged precision/recall/F1 from a confusion matrix
/// (rows = true class, columns = predicted class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub classes: Vec<String>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: Vec<Vec<u64>>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalMetrics {
    /// Classes never predicted get precision 0; classes never present get
    /// recall 0. Macro averages are unweighted class means.
    pub fn from_confusion(classes: Vec<String>, confusion: Vec<Vec<u64>>) -> Self {
        let k = confusion.len();
        assert!(confusion.iter().all(|r| r.len() == k), "confusion matrix must be square");
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
        for i in 0..k {
            let predicted: u64 = (0..k).map(|r| confusion[r][i]).sum();
            let actual: u64 = confusion[i].iter().sum();
            let p = ratio(confusion[i][i], predicted);
            let r = ratio(confusion[i][i], actual);
            p_sum += p;
            r_sum += r;
            f_sum += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        }
        let kf = k.max(1) as f64;
        EvalMetrics {
            classes,
            accuracy: ratio(trace, total),
            macro_precision: p_sum / kf,
            macro_recall: r_sum / kf,
            macro_f1: f_sum / kf,
            confusion,
        }
    }

    /// Plain-text table with the usual Accuracy / Precision / Recall / F1
    /// columns, in percent.
    pub fn to_table(&self, row_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "| {:<12} | {:>8} | {:>9} | {:>6} | {:>8} |",
            "", "Accuracy", "Precision", "Recall", "F1 score"
        );
        let _ = writeln!(s, "|{:-<14}|{:-<10}|{:-<11}|{:-<8}|{:-<10}|", "", "", "", "", "");
        let pct = |x: f64| format!("{:.1}%", 100.0 * x);
        let _ = writeln!(
            s,
            "| {:<12} | {:>8} | {:>9} | {:>6} | {:>8} |",
            row_label,
            pct(self.accuracy),
            pct(self.macro_precision),
            pct(self.macro_recall),
            pct(self.macro_f1)
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_class_oracle() {
        let m = EvalMetrics::from_confusion(vec!["a".into(), "b".into()], vec![vec![8, 2], vec![3, 7]]);
        assert_abs_diff_eq!(m.accuracy, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.macro_precision, 0.7525252525252526, epsilon = 1e-12);
        assert_abs_diff_eq!(m.macro_recall, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(m.macro_f1, 0.7493734335839599, epsilon = 1e-12);
    }

    #[test]
    fn perfect_and_never_predicted() {
        let m = EvalMetrics::from_confusion(vec!["a".into(), "b".into()], vec![vec![5, 0], vec![0, 3]]);
        assert_eq!((m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1), (1.0, 1.0, 1.0, 1.0));
        let m = EvalMetrics::from_confusion(vec!["a".into(), "b".into()], vec![vec![5, 0], vec![3, 0]]);
        assert_abs_diff_eq!(m.macro_precision, (5.0 / 8.0) / 2.0, epsilon = 1e-15);
        assert!(m.to_table("Racial").contains("62.5%"));
    }
}
