//! Percentile bootstrap bands for net benefit and PPV curves.
//!
//! Patients are resampled with replacement. Replicate `i` draws from a
//! `ChaCha8Rng` seeded with `seed` on stream `i`, so bands do not depend on
//! how replicates are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::ThresholdGrid;
use crate::error::{Error, Result};
use crate::metrics::{PredictionSet, Threshold};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMethod {
    /// Nearest-rank percentile interval.
    #[default]
    Percentile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub method: BandMethod,
}

impl Default for BandSpec {
    fn default() -> Self {
        BandSpec {
            replicates: 1000,
            seed: 1,
            level: 0.95,
            method: BandMethod::Percentile,
        }
    }
}

impl BandSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Usage("bootstrap needs at least one replicate".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain("band level", "(0, 1)", self.level));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint<S = f64> {
    pub t: Threshold<S>,
    pub nb_lower: S,
    pub nb_upper: S,
    /// Absent when every replicate selected nobody at this threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv_lower: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv_upper: Option<S>,
    pub nb_replicates: usize,
    pub ppv_replicates: usize,
    /// Replicates dropped from the PPV pool because nobody was selected.
    pub ppv_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBand<S = f64> {
    pub spec: BandSpec,
    pub points: Vec<BandPoint<S>>,
}

/// Value at nearest rank `ceil(p·N)` (1-based, clamped to `[1, N]`) of a sorted slice.
pub fn nearest_rank<S: Clone>(sorted: &[S], p: f64) -> S {
    let n = sorted.len();
    let rank = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1].clone()
}

/// Per-threshold counts of one replicate.
struct ReplicateCounts {
    tp: Vec<u64>,
    fp: Vec<u64>,
}

pub fn bootstrap_bands<S: Scalar>(
    data: &PredictionSet<S>,
    grid: &ThresholdGrid,
    spec: &BandSpec,
) -> Result<CurveBand<S>> {
    spec.validate()?;
    let n = data.risks().len();
    if n < 2 {
        return Err(Error::Usage("bootstrap needs at least two records".into()));
    }
    let thresholds = grid.thresholds::<S>();
    let m = thresholds.len();

    // bucket k = number of thresholds <= risk; the record is positive at t_j iff j < k
    let buckets: Vec<usize> = data
        .risks()
        .iter()
        .map(|r| thresholds.partition_point(|t| *t.value() <= *r))
        .collect();
    let outcomes = data.outcomes();

    let replicates: Vec<ReplicateCounts> = (0..spec.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            let mut events = vec![0u64; m + 1];
            let mut non_events = vec![0u64; m + 1];
            for _ in 0..n {
                let j = rng.random_range(0..n);
                if outcomes[j] {
                    events[buckets[j]] += 1;
                } else {
                    non_events[buckets[j]] += 1;
                }
            }
            let (mut tp, mut fp) = (vec![0u64; m], vec![0u64; m]);
            let (mut run_tp, mut run_fp) = (0, 0);
            for j in (0..m).rev() {
                run_tp += events[j + 1];
                run_fp += non_events[j + 1];
                tp[j] = run_tp;
                fp[j] = run_fp;
            }
            ReplicateCounts { tp, fp }
        })
        .collect();

    let alpha = 1.0 - spec.level;
    let (p_lo, p_hi) = (alpha / 2.0, 1.0 - alpha / 2.0);
    let by_value = |a: &S, b: &S| a.partial_cmp(b).expect("finite curve values");
    let total = n as u64;

    let points = thresholds
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let w = t.harm_weight();
            let mut nbs: Vec<S> = replicates
                .iter()
                .map(|r| S::ratio(r.tp[j], total) - S::ratio(r.fp[j], total) * w.clone())
                .collect();
            let mut ppvs: Vec<S> = replicates
                .iter()
                .filter(|r| r.tp[j] + r.fp[j] > 0)
                .map(|r| S::ratio(r.tp[j], r.tp[j] + r.fp[j]))
                .collect();
            nbs.sort_by(by_value);
            ppvs.sort_by(by_value);
            let (ppv_lower, ppv_upper) = if ppvs.is_empty() {
                (None, None)
            } else {
                (Some(nearest_rank(&ppvs, p_lo)), Some(nearest_rank(&ppvs, p_hi)))
            };
            BandPoint {
                t: t.clone(),
                nb_lower: nearest_rank(&nbs, p_lo),
                nb_upper: nearest_rank(&nbs, p_hi),
                ppv_lower,
                ppv_upper,
                nb_replicates: nbs.len(),
                ppv_replicates: ppvs.len(),
                ppv_excluded: nbs.len() - ppvs.len(),
            }
        })
        .collect();

    Ok(CurveBand {
        spec: spec.clone(),
        points,
    })
}
