//! Dynamic phase combiners (DS, DW, DWS) and the static Mean/Median baselines.

use std::fmt;
use std::str::FromStr;

/// Scores below this are treated as zero when turned into `1/sqrt(score)`.
pub const ZERO_SCORE: f64 = 1e-12;

/// Per-member combination weights. Unselected members carry `alpha = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberWeights {
    pub alpha: Vec<f64>,
    pub selected: Vec<bool>,
}

impl MemberWeights {
    pub fn survivors(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ds,
    Dw,
    Dws,
    Mean,
    Median,
    /// One tree fitted on the whole training fold.
    Single,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ds,
        Algorithm::Dw,
        Algorithm::Dws,
        Algorithm::Mean,
        Algorithm::Median,
        Algorithm::Single,
    ];

    /// Whether the algorithm consumes competence scores.
    pub fn is_dynamic(self) -> bool {
        matches!(self, Algorithm::Ds | Algorithm::Dw | Algorithm::Dws)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ds => "ds",
            Algorithm::Dw => "dw",
            Algorithm::Dws => "dws",
            Algorithm::Mean => "mean",
            Algorithm::Median => "median",
            Algorithm::Single => "single",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm {s:?}, expected one of ds, dw, dws, mean, median, single"))
    }
}

/// How DWS decides which members to discard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DwsThreshold {
    /// Discard scores above `E_min + (E_max - E_min) / 2`.
    #[default]
    Midpoint,
    /// Discard scores above `(E_max - E_min) / 2`. Members attaining `E_min`
    /// are kept even when this would discard them.
    Literal,
}

/// Index of the lowest score; ties go to the lowest index.
pub fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

/// DS: the prediction of the member with the lowest score, and its index.
pub fn ds_predict(scores: &[f64], query_predictions: &[f64]) -> (f64, usize) {
    assert_eq!(scores.len(), query_predictions.len(), "one score per member");
    let winner = argmin(scores);
    (query_predictions[winner], winner)
}

/// DW weights: `alpha_i = (1/sqrt(s_i)) / sum_n (1/sqrt(s_n))`. If any score
/// is zero the weight is split evenly among the zero-score members.
pub fn dw_weights(scores: &[f64]) -> MemberWeights {
    weights_over(scores, &vec![true; scores.len()])
}

fn weights_over(scores: &[f64], selected: &[bool]) -> MemberWeights {
    let zeros = scores
        .iter()
        .zip(selected)
        .filter(|&(&s, &sel)| sel && s < ZERO_SCORE)
        .count();
    let raw: Vec<f64> = scores
        .iter()
        .zip(selected)
        .map(|(&s, &sel)| match (sel, zeros > 0) {
            (false, _) => 0.0,
            (true, true) => f64::from(u8::from(s < ZERO_SCORE)),
            (true, false) => 1.0 / s.sqrt(),
        })
        .collect();
    let total: f64 = raw.iter().sum();
    MemberWeights {
        alpha: raw.iter().map(|w| w / total).collect(),
        selected: selected.to_vec(),
    }
}

/// DW: weighted mean `sum_i alpha_i * prediction_i`.
pub fn dw_predict(weights: &MemberWeights, query_predictions: &[f64]) -> f64 {
    assert_eq!(weights.alpha.len(), query_predictions.len(), "one weight per member");
    weights
        .alpha
        .iter()
        .zip(query_predictions)
        .map(|(a, p)| a * p)
        .sum()
}

/// DWS: drop members in the upper half of the score interval, then DW over
/// the survivors.
pub fn dws_predict(
    scores: &[f64],
    query_predictions: &[f64],
    threshold: DwsThreshold,
) -> (f64, MemberWeights) {
    assert!(!scores.is_empty(), "DWS needs at least one member");
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tau = match threshold {
        DwsThreshold::Midpoint => lo + (hi - lo) / 2.0,
        DwsThreshold::Literal => (hi - lo) / 2.0,
    };
    let selected: Vec<bool> = scores.iter().map(|&s| s <= tau || s == lo).collect();
    let weights = weights_over(scores, &selected);
    (dw_predict(&weights, query_predictions), weights)
}

pub fn static_mean(query_predictions: &[f64]) -> f64 {
    query_predictions.iter().sum::<f64>() / query_predictions.len() as f64
}

/// Middle order statistic; the mean of the two middle values for even `N`.
pub fn static_median(query_predictions: &[f64]) -> f64 {
    let mut v = query_predictions.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ds_examples() {
        assert_eq!(ds_predict(&[0.3, 0.1, 0.2], &[1.0, 2.0, 3.0]), (2.0, 1));
        assert_eq!(ds_predict(&[9.0], &[4.5]), (4.5, 0));
        assert_eq!(ds_predict(&[0.5, 0.5], &[1.0, 2.0]).1, 0);
    }

    #[test]
    fn dw_examples() {
        let w = dw_weights(&[0.04, 0.16]);
        assert!((w.alpha[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.alpha[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((dw_predict(&w, &[1.0, 4.0]) - 2.0).abs() < 1e-15);

        let w = dw_weights(&[0.3; 4]);
        assert!(w.alpha.iter().all(|a| (a - 0.25).abs() < 1e-15));
        assert!((dw_predict(&w, &[1.0, 2.0, 3.0, 6.0]) - 3.0).abs() < 1e-15);

        assert_eq!(dw_weights(&[0.0, 0.09]).alpha, vec![1.0, 0.0]);
        assert_eq!(dw_weights(&[0.0, 0.5, 0.0]).alpha, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn dw_predict_matches_loop() {
        let w = dw_weights(&[0.2, 0.05, 0.9, 0.33]);
        let preds = [0.1, 0.7, 0.4, 0.25];
        let mut acc = 0.0;
        for (a, p) in w.alpha.iter().zip(preds) {
            acc += a * p;
        }
        assert!((dw_predict(&w, &preds) - acc).abs() < 1e-15);
    }

    #[test]
    fn dws_examples() {
        let (p, w) = dws_predict(&[1.0, 2.0, 10.0], &[1.0, 1.0, 100.0], DwsThreshold::Midpoint);
        assert_eq!(w.selected, vec![true, true, false]);
        assert_eq!(w.alpha[2], 0.0);
        // weights 1 and 1/sqrt(2) over survivors predicting 1.0
        assert!((p - 1.0).abs() < 1e-12);

        let (p, w) = dws_predict(&[0.4; 3], &[1.0, 2.0, 6.0], DwsThreshold::Midpoint);
        assert!(w.selected.iter().all(|&s| s));
        assert!((p - 3.0).abs() < 1e-12);

        let (p, w) = dws_predict(&[0.7], &[0.25], DwsThreshold::Midpoint);
        assert_eq!((p, w.selected), (0.25, vec![true]));
    }

    #[test]
    fn literal_threshold_keeps_minimum() {
        // literal tau = 2.5 would discard every member
        let (p, w) = dws_predict(&[5.0, 6.0, 10.0], &[1.0, 2.0, 3.0], DwsThreshold::Literal);
        assert_eq!(w.selected, vec![true, false, false]);
        assert_eq!(p, 1.0);
        let (_, mid) = dws_predict(&[5.0, 6.0, 10.0], &[1.0, 2.0, 3.0], DwsThreshold::Midpoint);
        assert_eq!(mid.selected, vec![true, true, false]);
    }

    #[test]
    fn static_examples() {
        assert_eq!(static_mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(static_mean(&[0.3]), 0.3);
        assert_eq!(static_median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(static_median(&[1.0, 2.0, 3.0, 10.0]), 2.5);
        assert_eq!(static_median(&[0.3]), 0.3);
        let v = [0.1, 0.4, 0.35, 0.9];
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        assert!((static_mean(&v) - s / 4.0).abs() < 1e-15);
    }

    #[test]
    fn algorithm_ids() {
        assert_eq!("DWS".parse::<Algorithm>().unwrap(), Algorithm::Dws);
        assert!("oracle".parse::<Algorithm>().is_err());
        assert!(Algorithm::Dw.is_dynamic() && !Algorithm::Median.is_dynamic());
    }

    fn case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(1e-6f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn single_member_agreement(s in 0.0f64..1.0, p in -1.0f64..1.0) {
            let s = [s];
            let q = [p];
            prop_assert_eq!(ds_predict(&s, &q).0, p);
            prop_assert!((dw_predict(&dw_weights(&s), &q) - p).abs() <= 1e-15);
            prop_assert!((dws_predict(&s, &q, DwsThreshold::Midpoint).0 - p).abs() <= 1e-15);
            prop_assert_eq!(static_mean(&q), p);
            prop_assert_eq!(static_median(&q), p);
        }

        #[test]
        fn scale_invariance((s, _) in case(), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
            let a = dw_weights(&s);
            let b = dw_weights(&scaled);
            for (x, y) in a.alpha.iter().zip(&b.alpha) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert_eq!(argmin(&s), argmin(&scaled));
        }
    }
}
