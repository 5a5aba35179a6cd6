//! Net benefit expressed through PPV.
//!
//! With `s_t > 0`, `NB(t) = s_t/(1-t) (PPV(t) - t)`. Consequently a model
//! beats treat-none iff its PPV exceeds `t` (the diagonal of a PPV plot) and
//! beats treat-all iff its PPV exceeds `(π - t)/s_t + t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    classify_at_threshold, net_benefit, net_benefit_treat_all, ppv, PredictionSet, Threshold,
    ThresholdConfusion,
};
use crate::scalar::{within, Exact, Scalar};

/// Model versus the treat-none and treat-all strategies at one threshold.
///
/// The two booleans are decided in exact rational arithmetic from the counts,
/// so they are authoritative even when the floating values sit on a boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultsVerdict<S = f64> {
    pub t: Threshold<S>,
    pub beats_none: bool,
    pub beats_all: bool,
    pub nb: S,
    pub nb_all: S,
    pub ppv: S,
    pub ppv_none_ref: S,
    /// Absent when nobody is selected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv_all_ref: Option<S>,
    pub s_t: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    PositiveNb,
    /// Only the two points `{0, t}` are feasible; `lower`/`upper` hold them.
    ZeroNbTwoPoint,
    NegativeNb,
}

/// Feasible range of PPV for a given net benefit, prevalence and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpvInterval<S = f64> {
    pub t: Threshold<S>,
    pub nb: S,
    pub lower: S,
    pub upper: S,
    pub kind: BoundKind,
}

impl<S: Scalar> PpvInterval<S> {
    pub fn contains(&self, ppv: &S, tol: &S) -> bool {
        match self.kind {
            BoundKind::ZeroNbTwoPoint => within(ppv, &self.lower, tol) || within(ppv, &self.upper, tol),
            _ => {
                *ppv >= self.lower.clone() - tol.clone() && *ppv <= self.upper.clone() + tol.clone()
            }
        }
    }
}

/// Recovers PPV from net benefit and the number of threshold positives.
pub fn ppv_from_nb<S: Scalar>(nb: &S, positives: u64, n: u64, t: &Threshold<S>) -> S {
    if positives == 0 {
        return S::zero();
    }
    S::from_count(n) * nb.clone() / S::from_count(positives) * t.complement() + t.value().clone()
}

/// PPV reference for treat-none: the diagonal.
pub fn treat_none_reference<S: Scalar>(t: &Threshold<S>) -> S {
    t.value().clone()
}

/// PPV reference for treat-all, `(π - t)/s_t + t`. Not clipped to [0, 1].
pub fn treat_all_reference_ppv<S: Scalar>(prevalence: &S, s_t: &S, t: &Threshold<S>) -> Result<S> {
    if *s_t <= S::zero() {
        return Err(Error::Undefined("treat-all PPV reference needs a non-empty selection"));
    }
    Ok((prevalence.clone() - t.value().clone()) / s_t.clone() + t.value().clone())
}

pub fn verdict_vs_defaults<S: Scalar>(data: &PredictionSet<S>, t: &Threshold<S>) -> Result<DefaultsVerdict<S>> {
    verdict_from_confusion(&classify_at_threshold(data, t))
}

pub fn verdict_from_confusion<S: Scalar>(c: &ThresholdConfusion<S>) -> Result<DefaultsVerdict<S>> {
    let (beats_none, beats_all) = exact_default_routes(c)?;
    let prevalence = c.prevalence();
    let s_t = c.selection_rate();
    let ppv_all_ref = if c.positives() > 0 {
        Some(treat_all_reference_ppv(&prevalence, &s_t, &c.t)?)
    } else {
        None
    };
    Ok(DefaultsVerdict {
        t: c.t.clone(),
        beats_none,
        beats_all,
        nb: net_benefit(c),
        nb_all: net_benefit_treat_all(&prevalence, &c.t),
        ppv: ppv(c),
        ppv_none_ref: treat_none_reference(&c.t),
        ppv_all_ref,
        s_t,
    })
}

/// Decides (beats_none, beats_all) by direct NB comparison and through the
/// PPV references, exactly, and fails if the two routes disagree.
pub(crate) fn exact_default_routes<S: Scalar>(c: &ThresholdConfusion<S>) -> Result<(bool, bool)> {
    let e = c.to_exact();
    let zero = Exact::from_count(0);
    let nb = net_benefit(&e);
    let nb_all = net_benefit_treat_all(&e.prevalence(), &e.t);
    let beats_none = nb > zero;
    let beats_all = nb > nb_all;

    let ppv_e = ppv(&e);
    let via_ppv_none = e.positives() > 0 && ppv_e > *e.t.value();
    if via_ppv_none != beats_none {
        return Err(Error::InvariantViolation(format!(
            "treat-none routes disagree at t={}: nb>0 is {beats_none}, ppv>t is {via_ppv_none}",
            c.t.value().to_real()
        )));
    }
    if e.positives() > 0 {
        let reference = treat_all_reference_ppv(&e.prevalence(), &e.selection_rate(), &e.t)?;
        let via_ppv_all = ppv_e > reference;
        if via_ppv_all != beats_all {
            return Err(Error::InvariantViolation(format!(
                "treat-all routes disagree at t={}: nb>nb_all is {beats_all}, ppv>ref is {via_ppv_all}",
                c.t.value().to_real()
            )));
        }
    }
    Ok((beats_none, beats_all))
}

/// Sharp PPV range implied by a net benefit value.
///
/// Writing `a = TP/n ∈ [0, π]` and `b = FP/n ∈ [0, 1-π]`, a fixed `nb = a - wb`
/// (with `w = t/(1-t)`) gives `PPV = nb(1-t)/(a+b) + t`, monotone in `a + b`.
/// The extreme configurations are `b = 0` (PPV = 1 for nb > 0), `a = 0`
/// (PPV = 0 for nb < 0), and the largest admissible `b`, which is
/// `min{(π - nb)/w, 1 - π}`; the two expressions below are the PPV at each of
/// those two candidates. `|nb|` at or below [`Scalar::identity_tolerance`]
/// counts as zero.
pub fn ppv_bounds_given_nb<S: Scalar>(nb: &S, prevalence: &S, t: &Threshold<S>) -> Result<PpvInterval<S>> {
    if !(*prevalence >= S::zero() && *prevalence <= S::one()) {
        return Err(Error::domain("prevalence", "[0, 1]", prevalence.to_real()));
    }
    let tol = S::identity_tolerance();
    let infeasible = || Error::Infeasible {
        nb: nb.to_real(),
        prevalence: prevalence.to_real(),
        t: t.value().to_real(),
    };
    let max_nb = prevalence.clone();
    let min_nb = -((S::one() - prevalence.clone()) * t.harm_weight());
    if *nb > max_nb + tol.clone() || *nb < min_nb - tol.clone() {
        return Err(infeasible());
    }

    let interval = |lower: S, upper: S, kind| PpvInterval {
        t: t.clone(),
        nb: nb.clone(),
        lower,
        upper,
        kind,
    };
    if nb.abs() <= tol {
        return Ok(interval(S::zero(), t.value().clone(), BoundKind::ZeroNbTwoPoint));
    }

    let tv = t.value().clone();
    let headroom = (prevalence.clone() - nb.clone()).max_zero();
    let at_all_events = nb.clone() + headroom / tv.clone();
    let at_all_non_events = nb.clone() + (S::one() - prevalence.clone()) / t.complement();
    let candidates = [at_all_events, at_all_non_events]
        .into_iter()
        .filter(|d| *d > S::zero())
        .map(|d| (nb.clone() * t.complement() / d + tv.clone()).clamp_unit());

    if *nb > S::zero() {
        let lower = candidates.reduce(|a, b| if b > a { b } else { a }).ok_or_else(infeasible)?;
        Ok(interval(lower, S::one(), BoundKind::PositiveNb))
    } else {
        let upper = candidates.reduce(|a, b| if b < a { b } else { a }).ok_or_else(infeasible)?;
        Ok(interval(S::zero(), upper, BoundKind::NegativeNb))
    }
}

trait UnitClamp: Sized {
    fn clamp_unit(self) -> Self;
    fn max_zero(self) -> Self;
}

impl<S: Scalar> UnitClamp for S {
    fn clamp_unit(self) -> Self {
        if self < S::zero() {
            S::zero()
        } else if self > S::one() {
            S::one()
        } else {
            self
        }
    }

    fn max_zero(self) -> Self {
        if self < S::zero() {
            S::zero()
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::PredictionSet;

    fn d0() -> PredictionSet {
        PredictionSet::new(
            "d0",
            vec![0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.2, 0.1, 0.05],
            [1, 1, 0, 1, 0, 1, 0, 0, 0, 0].iter().map(|&y| y == 1).collect(),
        )
        .unwrap()
    }

    fn t(v: f64) -> Threshold {
        Threshold::new(v).unwrap()
    }

    #[test]
    fn ppv_reconstructed_on_d0() {
        assert!((ppv_from_nb(&0.1, 5, 10, &t(0.5)) - 0.6).abs() < 1e-12);
        assert_eq!(ppv_from_nb(&0.0, 5, 10, &t(0.3)), 0.3);
        assert_eq!(ppv_from_nb(&0.0, 0, 10, &t(0.3)), 0.0);
    }

    #[test]
    fn references() {
        assert_eq!(treat_none_reference(&t(0.1)), 0.1);
        assert!((treat_all_reference_ppv(&0.4, &0.5, &t(0.5)).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(treat_all_reference_ppv(&0.3, &0.2, &t(0.3)).unwrap(), 0.3);
        assert!((treat_all_reference_ppv(&0.4, &1.0, &t(0.2)).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(
            treat_all_reference_ppv(&0.4, &0.0, &t(0.2)),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn d0_verdicts() {
        let v = verdict_vs_defaults(&d0(), &t(0.5)).unwrap();
        assert!(v.beats_none && v.beats_all);
        assert!((v.ppv_all_ref.unwrap() - 0.3).abs() < 1e-12);

        let v = verdict_vs_defaults(&d0(), &t(0.7)).unwrap();
        assert!(!v.beats_none);
        assert!((v.nb + 1.0 / 30.0).abs() < 1e-12);
        assert!((v.ppv - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictor_beats_none_when_selecting_an_event() {
        let data = PredictionSet::new(
            "perfect",
            vec![0.999, 0.001, 0.999, 0.001],
            vec![true, false, true, false],
        )
        .unwrap();
        for tv in [0.01, 0.3, 0.5, 0.9] {
            assert!(verdict_vs_defaults(&data, &t(tv)).unwrap().beats_none);
        }
    }

    #[test]
    fn boundary_equality_does_not_beat() {
        // tp = 1, fp = 1 at t = 0.5: nb is exactly zero and ppv equals t
        let data = PredictionSet::new("b", vec![0.6, 0.6, 0.1], vec![true, false, false]).unwrap();
        let v = verdict_vs_defaults(&data, &t(0.5)).unwrap();
        assert_eq!(v.nb, 0.0);
        assert!(!v.beats_none);
    }

    #[test]
    fn empty_selection_has_no_treat_all_reference() {
        let v = verdict_vs_defaults(&d0(), &t(0.95)).unwrap();
        assert!(v.ppv_all_ref.is_none());
        assert!(!v.beats_none);
        // nb_all = (0.4 - 0.95)/0.05 < 0 = nb
        assert!(v.beats_all);
    }

    #[test]
    fn zero_nb_is_two_point() {
        let b = ppv_bounds_given_nb(&0.0, &0.4, &t(0.3)).unwrap();
        assert_eq!(b.kind, BoundKind::ZeroNbTwoPoint);
        assert_eq!((b.lower, b.upper), (0.0, 0.3));
        assert!(b.contains(&0.3, &1e-12) && b.contains(&0.0, &1e-12));
        assert!(!b.contains(&0.15, &1e-12));
    }

    #[test]
    fn d0_interval_contains_observed_ppv() {
        // enumeration over tp <= 4, fp <= 6 with tp - fp = 1: ppv in {1, 2/3, 3/5, 4/7}
        let b = ppv_bounds_given_nb(&0.1, &0.4, &t(0.5)).unwrap();
        assert_eq!(b.kind, BoundKind::PositiveNb);
        assert!(b.contains(&0.6, &1e-12));
        assert!((b.lower - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(b.upper, 1.0);
    }

    #[test]
    fn maximal_nb_forces_pure_positives() {
        let b = ppv_bounds_given_nb(&0.4, &0.4, &t(0.2)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_nb_upper_bound_is_sharp_below_half() {
        // n = 100, n1 = 10, t = 0.25: tp = 10, fp = 33 gives nb = -0.01 and ppv = 10/43
        let tt = t(0.25);
        let c = ThresholdConfusion { t: tt.clone(), tp: 10, fp: 33, tn: 57, fn_: 0 };
        let nb = net_benefit(&c);
        let b = ppv_bounds_given_nb(&nb, &0.1, &tt).unwrap();
        assert_eq!(b.kind, BoundKind::NegativeNb);
        assert!((b.upper - 10.0 / 43.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_nb_rejected() {
        assert!(matches!(
            ppv_bounds_given_nb(&0.5, &0.4, &t(0.5)),
            Err(Error::Infeasible { .. })
        ));
        // min nb = -(0.6)(1) at t = 0.5
        assert!(ppv_bounds_given_nb(&-0.61, &0.4, &t(0.5)).is_err());
        assert!(ppv_bounds_given_nb(&-0.6, &0.4, &t(0.5)).is_ok());
        assert!(ppv_bounds_given_nb(&0.1, &1.5, &t(0.5)).is_err());
    }

    #[test]
    fn exact_bounds() {
        let tt = Threshold::<Exact>::new(Exact::ratio(1, 2)).unwrap();
        let b = ppv_bounds_given_nb(&Exact::ratio(1, 10), &Exact::ratio(2, 5), &tt).unwrap();
        assert_eq!(b.lower, Exact::ratio(4, 7));
    }
}
