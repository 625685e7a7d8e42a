//! Dynamic regressor selection (DRS).
//!
//! A bagged ensemble of CART regression trees is built on a training set.
//! For every query pattern the `K` nearest training patterns form a *region
//! of competence*; each ensemble member is scored on that region by one of
//! eight competence measures ([`measures::Measure`]) and the scores drive one
//! of three dynamic combiners:
//!
//! * **DS** picks the single member with the lowest score.
//! * **DW** averages all members with weights proportional to `1/sqrt(score)`.
//! * **DWS** drops the members in the upper half of the score interval and
//!   applies DW to the rest.
//!
//! Static Mean/Median fusion and a single unbagged tree are provided as
//! baselines, and [`bench`] runs replicated k-fold cross-validation over all
//! of them.
//!
//! ```
//! use drs::dataset::Dataset;
//! use drs::learners::{generate_ensemble, TreeParams};
//! use drs::measures::{score_all, Measure};
//! use drs::region::build_region;
//! use drs::selection::ds_predict;
//!
//! let features: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
//! let targets: Vec<f64> = (0..40).map(|i| ((i as f64) / 40.0).powi(2)).collect();
//! let train = Dataset::from_rows("toy", features, targets).unwrap();
//!
//! let ensemble = generate_ensemble(&train, 10, &TreeParams::default(), 7).unwrap();
//! let query = [0.3];
//! let region = build_region(&query, &train, &ensemble, 5).unwrap();
//! let query_preds = ensemble.predict_all(&query).unwrap();
//! let scores = score_all(Measure::M3, &region, &query_preds).unwrap();
//! let (prediction, winner) = ds_predict(&scores, &query_preds);
//! assert!(winner < 10);
//! assert!((0.0..=1.0).contains(&prediction));
//! ```

pub mod bench;
pub mod cli;
pub mod dataset;
mod error;
pub mod learners;
pub mod measures;
pub mod region;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
