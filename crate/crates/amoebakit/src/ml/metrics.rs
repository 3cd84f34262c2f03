//! Accuracy and Matthews correlation bookkeeping for cross-validation.

/// Matthews correlation coefficient of a 2x2 confusion matrix indexed
/// `[actual][predicted]`. `None` when any marginal count is zero, which
/// happens whenever a fold predicts (or contains) a single class.
pub fn mcc(confusion: [[u64; 2]; 2]) -> Option<f64> {
    let tn = confusion[0][0] as f64;
    let fp = confusion[0][1] as f64;
    let fne = confusion[1][0] as f64;
    let tp = confusion[1][1] as f64;
    let factors = [(tp + fp), (tp + fne), (tn + fp), (tn + fne)];
    if factors.iter().any(|&f| f == 0.0) {
        return None;
    }
    let denom = factors.iter().product::<f64>().sqrt();
    Some((tp * tn - fp * fne) / denom)
}

/// A mean with the half-width of its 95% interval over folds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
}

/// `mean +- 1.96 * stderr`, stderr from the (n-1)-normalized sample
/// standard deviation. A single value has zero half-width.
pub fn mean_ci(values: &[f64]) -> MeanCi {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return MeanCi {
            mean,
            half_width: 0.0,
        };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    MeanCi {
        mean,
        half_width: 1.96 * (var / n).sqrt(),
    }
}

/// Cross-validation summary.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub fold_accuracies: Vec<f64>,
    /// Per-fold MCC; `None` marks an undefined fold (or a multiclass
    /// run, where the 2x2 statistic does not apply).
    pub fold_mccs: Vec<Option<f64>>,
    pub accuracy: MeanCi,
    /// Mean over the folds where MCC was defined; `None` when no fold
    /// produced a value.
    pub mcc: Option<MeanCi>,
    pub mcc_excluded_folds: usize,
    /// Aggregated confusion counts `[actual][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub estimator_note: &'static str,
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "accuracy={:.3}(+-{:.3})",
            self.accuracy.mean, self.accuracy.half_width
        )?;
        match &self.mcc {
            Some(m) => {
                write!(f, " mcc={:.3}(+-{:.3})", m.mean, m.half_width)?;
                if self.mcc_excluded_folds > 0 {
                    write!(f, "*")?;
                }
            }
            None => write!(f, " mcc=nan")?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcc_examples() {
        assert_eq!(mcc([[50, 0], [0, 50]]), Some(1.0));
        assert_eq!(mcc([[25, 25], [25, 25]]), Some(0.0));
        // All predictions land in one class: a zero marginal.
        assert_eq!(mcc([[50, 0], [50, 0]]), None);
        assert_eq!(mcc([[0, 50], [0, 50]]), None);
        // Perfectly wrong is -1.
        assert_eq!(mcc([[0, 30], [30, 0]]), Some(-1.0));
    }

    #[test]
    fn mean_ci_basics() {
        let ci = mean_ci(&[1.0, 1.0, 1.0]);
        assert_eq!(ci.mean, 1.0);
        assert_eq!(ci.half_width, 0.0);
        let ci = mean_ci(&[0.9, 1.1]);
        assert!((ci.mean - 1.0).abs() < 1e-12);
        assert!(ci.half_width > 0.0);
    }
}
