//! Pairwise net benefit comparison of two models on one cohort.
//!
//! Model 1 beats model 2 at `t` iff any of the following holds, and they are
//! all equivalent:
//!
//! * `NB_1 > NB_2`
//! * `PPV_1 > t + (1-t) n NB_2 / (TP_1 + FP_1)` (needs model 1 to select someone)
//! * `s_1 (ȳ_1,above - t) > s_2 (ȳ_2,above - t)`
//! * `(1-s_1)(t - ȳ_1,below) > (1-s_2)(t - ȳ_2,below)`
//!
//! The margins are evaluated from counts as `(TP - t·(TP+FP))/n` and
//! `(t·(TN+FN) - FN)/n`, which stay defined when a group is empty.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{classify_at_threshold, net_benefit, ppv, PredictionSet, Threshold, ThresholdConfusion};
use crate::scalar::{Exact, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Model1,
    Model2,
    Tie,
}

impl Winner {
    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Winner::Model1,
            Ordering::Less => Winner::Model2,
            Ordering::Equal => Winner::Tie,
        }
    }

    /// The verdict with the models swapped.
    pub fn mirrored(self) -> Self {
        match self {
            Winner::Model1 => Winner::Model2,
            Winner::Model2 => Winner::Model1,
            Winner::Tie => Winner::Tie,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict<S = f64> {
    pub t: Threshold<S>,
    pub nb1: S,
    pub nb2: S,
    /// Decided exactly from counts; a tie means equal net benefit.
    pub winner: Winner,
    pub ppv1: S,
    /// `None` when model 1 selects nobody and the PPV route is unavailable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv_superiority_ref: Option<S>,
    pub s1: S,
    pub s2: S,
    pub margin_above_1: S,
    pub margin_above_2: S,
    pub margin_below_1: S,
    pub margin_below_2: S,
}

impl<S: Scalar> ComparisonVerdict<S> {
    pub fn ppv_route_available(&self) -> bool {
        self.ppv_superiority_ref.is_some()
    }
}

/// Reference PPV that model 1 must exceed to beat a competitor with net benefit `nb2`.
pub fn ppv_superiority_reference<S: Scalar>(nb2: &S, positives1: u64, n: u64, t: &Threshold<S>) -> Result<S> {
    if positives1 == 0 {
        return Err(Error::Undefined("model 1 selects nobody; PPV reference undefined"));
    }
    Ok(t.value().clone() + t.complement() * S::from_count(n) * nb2.clone() / S::from_count(positives1))
}

pub fn compare_models<S: Scalar>(
    d1: &PredictionSet<S>,
    d2: &PredictionSet<S>,
    t: &Threshold<S>,
) -> Result<ComparisonVerdict<S>> {
    if d1.outcomes() != d2.outcomes() {
        return Err(Error::Usage(format!(
            "models `{}` and `{}` are not evaluated on the same outcome vector",
            d1.name(),
            d2.name()
        )));
    }
    compare_confusions(&classify_at_threshold(d1, t), &classify_at_threshold(d2, t))
}

/// Compares two confusions from the same cohort and threshold.
pub fn compare_confusions<S: Scalar>(
    c1: &ThresholdConfusion<S>,
    c2: &ThresholdConfusion<S>,
) -> Result<ComparisonVerdict<S>> {
    if c1.t != c2.t || c1.n() != c2.n() || c1.events() != c2.events() {
        return Err(Error::Usage("confusions come from different thresholds or cohorts".into()));
    }
    let winner = exact_winner(c1, c2)?;
    let (nb1, nb2) = (net_benefit(c1), net_benefit(c2));
    let ppv_superiority_ref = match c1.positives() {
        0 => None,
        pos => Some(ppv_superiority_reference(&nb2, pos, c1.n(), &c1.t)?),
    };
    Ok(ComparisonVerdict {
        t: c1.t.clone(),
        winner,
        ppv1: ppv(c1),
        ppv_superiority_ref,
        s1: c1.selection_rate(),
        s2: c2.selection_rate(),
        margin_above_1: margin_above(c1),
        margin_above_2: margin_above(c2),
        margin_below_1: margin_below(c1),
        margin_below_2: margin_below(c2),
        nb1,
        nb2,
    })
}

/// `s_t (ȳ_above - t)`
fn margin_above<S: Scalar>(c: &ThresholdConfusion<S>) -> S {
    (S::from_count(c.tp) - c.t.value().clone() * S::from_count(c.positives())) / S::from_count(c.n())
}

/// `(1 - s_t)(t - ȳ_below)`
fn margin_below<S: Scalar>(c: &ThresholdConfusion<S>) -> S {
    (c.t.value().clone() * S::from_count(c.negatives()) - S::from_count(c.fn_)) / S::from_count(c.n())
}

fn ordering(a: &Exact, b: &Exact) -> Ordering {
    a.cmp(b)
}

/// Runs every route in exact arithmetic and returns the common verdict.
fn exact_winner<S: Scalar>(c1: &ThresholdConfusion<S>, c2: &ThresholdConfusion<S>) -> Result<Winner> {
    let (e1, e2) = (c1.to_exact(), c2.to_exact());
    let (nb1, nb2) = (net_benefit(&e1), net_benefit(&e2));
    let direct = Winner::from_ordering(ordering(&nb1, &nb2));

    let mut routes = vec![
        ("above-threshold margin", Winner::from_ordering(ordering(&margin_above(&e1), &margin_above(&e2)))),
        ("below-threshold margin", Winner::from_ordering(ordering(&margin_below(&e1), &margin_below(&e2)))),
    ];
    if e1.positives() > 0 {
        let reference = ppv_superiority_reference(&nb2, e1.positives(), e1.n(), &e1.t)?;
        routes.push(("PPV reference", Winner::from_ordering(ordering(&ppv(&e1), &reference))));
    }
    let (pos, n) = (e1.positives(), e1.n());
    if pos == e2.positives() && pos > 0 && pos < n {
        let above = |c: &ThresholdConfusion<Exact>| Exact::ratio(c.tp, c.positives());
        let below = |c: &ThresholdConfusion<Exact>| Exact::ratio(c.fn_, c.negatives());
        routes.push(("equal-selection event rate above", Winner::from_ordering(ordering(&above(&e1), &above(&e2)))));
        routes.push(("equal-selection event rate below", Winner::from_ordering(ordering(&below(&e2), &below(&e1)))));
    }

    for (name, verdict) in routes {
        if verdict != direct {
            return Err(Error::InvariantViolation(format!(
                "{name} route says {verdict:?} but net benefit says {direct:?} at t={}",
                c1.t.value().to_real()
            )));
        }
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcomes() -> Vec<bool> {
        [1, 1, 0, 1, 0, 1, 0, 0, 0, 0].iter().map(|&y| y == 1).collect()
    }

    fn d0() -> PredictionSet {
        PredictionSet::new("d0", vec![0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.2, 0.1, 0.05], outcomes()).unwrap()
    }

    /// D0 with the event at 0.6 and the non-event at 0.3 swapped.
    fn d0_degraded() -> PredictionSet {
        PredictionSet::new("degraded", vec![0.9, 0.8, 0.7, 0.3, 0.55, 0.4, 0.6, 0.2, 0.1, 0.05], outcomes()).unwrap()
    }

    fn t(v: f64) -> Threshold {
        Threshold::new(v).unwrap()
    }

    #[test]
    fn self_comparison_ties() {
        let v = compare_models(&d0(), &d0(), &t(0.5)).unwrap();
        assert_eq!(v.winner, Winner::Tie);
        assert_eq!(v.nb1, v.nb2);
        assert_eq!(v.margin_above_1, v.margin_above_2);
        assert_eq!(v.margin_below_1, v.margin_below_2);
    }

    #[test]
    fn degraded_loses() {
        let v = compare_models(&d0(), &d0_degraded(), &t(0.5)).unwrap();
        assert_eq!(v.winner, Winner::Model1);
        assert!((v.nb2 + 0.1).abs() < 1e-12);
        assert!((v.ppv_superiority_ref.unwrap() - 0.4).abs() < 1e-12);
        assert!(v.ppv1 > v.ppv_superiority_ref.unwrap());
        let back = compare_models(&d0_degraded(), &d0(), &t(0.5)).unwrap();
        assert_eq!(back.winner, v.winner.mirrored());
    }

    #[test]
    fn different_cohorts_rejected() {
        let other = PredictionSet::new("x", vec![0.5; 10], vec![true; 10]).unwrap();
        assert!(matches!(compare_models(&d0(), &other, &t(0.5)), Err(Error::Usage(_))));
    }

    #[test]
    fn superiority_reference_values() {
        assert_eq!(ppv_superiority_reference(&0.0, 4, 10, &t(0.3)).unwrap(), 0.3);
        assert!(ppv_superiority_reference(&0.1, 0, 10, &t(0.3)).is_err());
    }

    #[test]
    fn ppv_route_unavailable_when_model1_selects_nobody() {
        let low = PredictionSet::new("low", vec![0.01; 10], outcomes()).unwrap();
        let v = compare_models(&low, &d0(), &t(0.5)).unwrap();
        assert!(!v.ppv_route_available());
        assert_eq!(v.winner, Winner::Model2);
    }
}
