/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub const PERFECT: Prf = Prf {
        precision: 1.0,
        recall: 1.0,
        f1: 1.0,
    };

    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf { precision, recall, f1 }
    }

    /// Scores `correct` hits among `predicted` items against `reference` items.
    ///
    /// A ratio with a zero denominator is 1 when the other set is empty too
    /// and 0 otherwise.
    pub fn from_counts(correct: usize, predicted: usize, reference: usize) -> Self {
        let ratio = |den: usize, other: usize| {
            if den == 0 {
                if other == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                correct as f64 / den as f64
            }
        };
        Prf::new(ratio(predicted, reference), ratio(reference, predicted))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_denominator_convention() {
        assert_eq!(Prf::from_counts(0, 0, 0), Prf::PERFECT);
        assert_eq!(Prf::from_counts(0, 0, 3), Prf::new(0.0, 0.0));
        assert_eq!(Prf::from_counts(0, 2, 0), Prf::new(0.0, 0.0));
        let p = Prf::from_counts(2, 3, 2);
        assert!((p.f1 - 0.8).abs() < 1e-15);
    }
}
