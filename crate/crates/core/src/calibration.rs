//! Threshold-split calibration diagnostics.
//!
//! Patients are split at `t` into a selected group (`risk >= t`) and a spared
//! group (`risk < t`). With `s_t` the selected fraction:
//!
//! * `NB = s_t/(1-t) (ȳ_above - t)`
//! * `NB - NB_all = (1-s_t)/(1-t) (t - ȳ_below)`
//! * `NB = s_t/(1-t) (p̄_above - t) + s_t/(1-t) Δ_t` with `Δ_t = ȳ_above - p̄_above`
//!
//! Group statistics of an empty group are `None`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{PredictionSet, Threshold};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary<S = f64> {
    pub t: Threshold<S>,
    pub s_t: S,
    pub n_above: u64,
    pub n_below: u64,
    pub events_above: u64,
    pub events_below: u64,
    /// Observed event rate among `risk >= t`; equals PPV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_above: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_below: Option<S>,
    /// Mean predicted risk among `risk >= t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_above: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_below: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enrichment: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_term: Option<S>,
}

/// Per-group tallies from which a [`CalibrationSummary`] is assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTally<S> {
    pub count: u64,
    pub events: u64,
    pub risk_sum: S,
}

impl<S: Scalar> GroupTally<S> {
    pub fn empty() -> Self {
        GroupTally {
            count: 0,
            events: 0,
            risk_sum: S::zero(),
        }
    }

    pub fn add(&mut self, risk: &S, event: bool) {
        self.count += 1;
        self.events += event as u64;
        self.risk_sum = self.risk_sum.clone() + risk.clone();
    }

    fn event_rate(&self) -> Option<S> {
        (self.count > 0).then(|| S::ratio(self.events, self.count))
    }

    fn mean_risk(&self) -> Option<S> {
        (self.count > 0).then(|| self.risk_sum.clone() / S::from_count(self.count))
    }
}

impl<S: Scalar> CalibrationSummary<S> {
    pub fn from_tallies(t: Threshold<S>, above: &GroupTally<S>, below: &GroupTally<S>) -> Self {
        let n = above.count + below.count;
        let s_t = S::ratio(above.count, n);
        let y_above = above.event_rate();
        let p_above = above.mean_risk();
        let scale = s_t.clone() / t.complement();
        let delta_t = y_above.clone().zip(p_above.clone()).map(|(y, p)| y - p);
        let enrichment = p_above
            .clone()
            .map(|p| scale.clone() * (p - t.value().clone()));
        let calibration_term = delta_t.clone().map(|d| scale.clone() * d);
        CalibrationSummary {
            s_t,
            n_above: above.count,
            n_below: below.count,
            events_above: above.events,
            events_below: below.events,
            y_above,
            y_below: below.event_rate(),
            p_above,
            p_below: below.mean_risk(),
            delta_t,
            enrichment,
            calibration_term,
            t,
        }
    }
}

pub fn threshold_calibration<S: Scalar>(data: &PredictionSet<S>, t: &Threshold<S>) -> CalibrationSummary<S> {
    let mut above = GroupTally::empty();
    let mut below = GroupTally::empty();
    for (risk, &event) in data.risks().iter().zip(data.outcomes()) {
        if *risk >= *t.value() {
            above.add(risk, event);
        } else {
            below.add(risk, event);
        }
    }
    CalibrationSummary::from_tallies(t.clone(), &above, &below)
}

/// `s_t/(1-t) (ȳ_above - t)`, which equals net benefit.
pub fn nb_via_calibration<S: Scalar>(s: &CalibrationSummary<S>) -> Result<S> {
    let y = s
        .y_above
        .clone()
        .ok_or(Error::Undefined("no patients at or above the threshold"))?;
    Ok(s.s_t.clone() / s.t.complement() * (y - s.t.value().clone()))
}

/// `(1-s_t)/(1-t) (t - ȳ_below)`, which equals `NB - NB_all`.
pub fn nb_gap_treat_all<S: Scalar>(s: &CalibrationSummary<S>) -> Result<S> {
    let y = s
        .y_below
        .clone()
        .ok_or(Error::Undefined("no patients below the threshold"))?;
    Ok((S::one() - s.s_t.clone()) / s.t.complement() * (s.t.value().clone() - y))
}

/// Splits net benefit into (enrichment, calibration term).
pub fn nb_decomposition<S: Scalar>(s: &CalibrationSummary<S>) -> Result<(S, S)> {
    match (&s.enrichment, &s.calibration_term) {
        (Some(e), Some(c)) => Ok((e.clone(), c.clone())),
        _ => Err(Error::Undefined("no patients at or above the threshold")),
    }
}

/// `π - (s_t ȳ_above + (1-s_t) ȳ_below)`; zero for any count-derived summary.
pub fn prevalence_identity_residual<S: Scalar>(s: &CalibrationSummary<S>, prevalence: &S) -> Result<S> {
    match (&s.y_above, &s.y_below) {
        (Some(above), Some(below)) => Ok(prevalence.clone()
            - (s.s_t.clone() * above.clone() + (S::one() - s.s_t.clone()) * below.clone())),
        _ => Err(Error::Undefined("prevalence identity needs both groups non-empty")),
    }
}
