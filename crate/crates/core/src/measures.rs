//! Competence measures `m1`..`m8`.
//!
//! Every measure is loss-like: the lower the score, the more competent the
//! member is on the region. Notation below: `f(t_k)` is the observed target of
//! neighbor `k`, `p_k` the member's prediction on it, `q` the member's
//! prediction on the query itself and `d_k` the inverse-distance weight.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::region::RegionOfCompetence;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// Sample variance of `p_k`.
    M1,
    /// `sum |f(t_k) - p_k| * d_k`
    M2,
    /// `sum (f(t_k) - p_k)^2 * d_k`
    M3,
    /// `min (f(t_k) - p_k)^2 * d_k`
    M4,
    /// `max (f(t_k) - p_k)^2 * d_k`
    M5,
    /// `sum (f(t_k) - q)^2 * d_k`
    M6,
    /// `sum sqrt((f(t_k) - p_k)^2 * d_k)`
    M7,
    /// `(f(t_1) - p_1)^2` on the nearest neighbor only.
    M8,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::M1,
        Measure::M2,
        Measure::M3,
        Measure::M4,
        Measure::M5,
        Measure::M6,
        Measure::M7,
        Measure::M8,
    ];

    /// 1-based measure number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_number(n: usize) -> Option<Measure> {
        n.checked_sub(1).and_then(|i| Measure::ALL.get(i)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::M1 => "Variance",
            Measure::M2 => "Sum Absolute Error",
            Measure::M3 => "Sum Squared Error",
            Measure::M4 => "Minimum Squared Error",
            Measure::M5 => "Maximum Squared Error",
            Measure::M6 => "Neighbor's Similarity",
            Measure::M7 => "Root Sum Squared Error",
            Measure::M8 => "Closest Squared Error",
        }
    }

    /// Parses a comma-separated list of measure ids and inclusive ranges,
    /// e.g. `m1..m8` or `m2,m3,M7`. Duplicates are dropped, order is kept.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<Measure>, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let span = match part.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (a.parse::<Measure>()?, b.parse::<Measure>()?);
                    if a > b {
                        return Err(format!("empty measure range {part:?}"));
                    }
                    Measure::ALL[a as usize..=b as usize].to_vec()
                }
                None => vec![part.parse()?],
            };
            for m in span {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        if out.is_empty() {
            return Err("no measures given".to_string());
        }
        Ok(out)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.number())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        s.strip_prefix(['m', 'M'])
            .and_then(|n| n.parse::<usize>().ok())
            .and_then(Measure::from_number)
            .ok_or_else(|| format!("unknown measure {s:?}, expected m1..m8"))
    }
}

/// One score per ensemble member for a single measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetenceScore {
    pub measure: Measure,
    pub per_member: Vec<f64>,
}

impl Deref for CompetenceScore {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.per_member
    }
}

fn weighted_sq_errors<'a>(region: &'a RegionOfCompetence, member: usize) -> impl Iterator<Item = f64> + 'a {
    region
        .observed()
        .iter()
        .zip(region.member_predictions(member))
        .zip(region.d_weights())
        .map(|((y, p), d)| (y - p) * (y - p) * d)
}

/// Sample variance (divisor `K - 1`) of the member's neighbor predictions.
pub fn m1_variance(region: &RegionOfCompetence, member: usize) -> Result<f64> {
    let preds = region.member_predictions(member);
    let k = preds.len();
    if k < 2 {
        return Err(Error::invalid("m1 (variance) needs K >= 2"));
    }
    let mean = preds.iter().sum::<f64>() / k as f64;
    Ok(preds.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (k - 1) as f64)
}

pub fn m2_sum_abs_error(region: &RegionOfCompetence, member: usize) -> f64 {
    region
        .observed()
        .iter()
        .zip(region.member_predictions(member))
        .zip(region.d_weights())
        .map(|((y, p), d)| (y - p).abs() * d)
        .sum()
}

pub fn m3_sum_sq_error(region: &RegionOfCompetence, member: usize) -> f64 {
    weighted_sq_errors(region, member).sum()
}

pub fn m4_min_sq_error(region: &RegionOfCompetence, member: usize) -> f64 {
    weighted_sq_errors(region, member).fold(f64::INFINITY, f64::min)
}

pub fn m5_max_sq_error(region: &RegionOfCompetence, member: usize) -> f64 {
    weighted_sq_errors(region, member).fold(0.0, f64::max)
}

/// Compares the member's prediction on the query against every neighbor's
/// observed target; the member's neighbor predictions are not used.
pub fn m6_neighbor_similarity(region: &RegionOfCompetence, query_prediction: f64) -> f64 {
    region
        .observed()
        .iter()
        .zip(region.d_weights())
        .map(|(y, d)| (y - query_prediction).powi(2) * d)
        .sum()
}

pub fn m7_root_sum_sq_error(region: &RegionOfCompetence, member: usize) -> f64 {
    weighted_sq_errors(region, member).map(f64::sqrt).sum()
}

pub fn m8_closest_sq_error(region: &RegionOfCompetence, member: usize) -> f64 {
    let e = region.observed()[0] - region.member_predictions(member)[0];
    e * e
}

/// Scores one member. `query_prediction` is only read by [`Measure::M6`].
pub fn score_member(
    measure: Measure,
    region: &RegionOfCompetence,
    member: usize,
    query_prediction: f64,
) -> Result<f64> {
    Ok(match measure {
        Measure::M1 => m1_variance(region, member)?,
        Measure::M2 => m2_sum_abs_error(region, member),
        Measure::M3 => m3_sum_sq_error(region, member),
        Measure::M4 => m4_min_sq_error(region, member),
        Measure::M5 => m5_max_sq_error(region, member),
        Measure::M6 => m6_neighbor_similarity(region, query_prediction),
        Measure::M7 => m7_root_sum_sq_error(region, member),
        Measure::M8 => m8_closest_sq_error(region, member),
    })
}

/// Scores every member of the region's ensemble.
pub fn score_all(
    measure: Measure,
    region: &RegionOfCompetence,
    query_predictions: &[f64],
) -> Result<CompetenceScore> {
    if query_predictions.len() != region.n_members() {
        return Err(Error::invalid(format!(
            "{} query predictions for an ensemble of {}",
            query_predictions.len(),
            region.n_members()
        )));
    }
    let per_member = query_predictions
        .iter()
        .enumerate()
        .map(|(n, &q)| score_member(measure, region, n, q))
        .collect::<Result<_>>()?;
    Ok(CompetenceScore { measure, per_member })
}
