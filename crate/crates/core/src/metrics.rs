//! Confusion counting and single-threshold metrics.
//!
//! A patient is classified positive at threshold `t` when `risk >= t`; ties
//! are positive. Every rate is derived from the integer counts of a
//! [`ThresholdConfusion`], which are the source of truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A decision threshold in the open interval (0, 1).
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Threshold<S = f64>(S);

impl<S: Scalar> Threshold<S> {
    pub fn new(t: S) -> Result<Self> {
        if t > S::zero() && t < S::one() {
            Ok(Threshold(t))
        } else {
            Err(Error::domain("threshold", "(0, 1)", t.to_real()))
        }
    }

    pub fn from_real(t: f64) -> Result<Self> {
        let v = S::from_real(t).ok_or_else(|| Error::domain("threshold", "(0, 1)", t))?;
        Self::new(v)
    }

    pub fn value(&self) -> &S {
        &self.0
    }

    pub fn into_inner(self) -> S {
        self.0
    }

    /// Relative harm of a false positive, `t / (1 - t)`.
    pub fn harm_weight(&self) -> S {
        self.0.clone() / self.complement()
    }

    /// `1 - t`
    pub fn complement(&self) -> S {
        S::one() - self.0.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord<S = f64> {
    pub risk: S,
    pub outcome: bool,
}

/// One model's predicted risks paired with the observed binary outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet<S = f64> {
    name: String,
    risks: Vec<S>,
    outcomes: Vec<bool>,
    events: u64,
}

impl<S: Scalar> PredictionSet<S> {
    pub fn new(name: impl Into<String>, risks: Vec<S>, outcomes: Vec<bool>) -> Result<Self> {
        if risks.is_empty() {
            return Err(Error::Usage("a prediction set needs at least one record".into()));
        }
        if risks.len() != outcomes.len() {
            return Err(Error::Usage(format!(
                "{} risks but {} outcomes",
                risks.len(),
                outcomes.len()
            )));
        }
        for (i, r) in risks.iter().enumerate() {
            if !(*r >= S::zero() && *r <= S::one()) {
                return Err(Error::Ingestion {
                    row: Some(i + 1),
                    column: "risk".into(),
                    message: format!("risk {} outside [0, 1]", r.to_real()),
                });
            }
        }
        let events = outcomes.iter().filter(|&&y| y).count() as u64;
        Ok(PredictionSet {
            name: name.into(),
            risks,
            outcomes,
            events,
        })
    }

    pub fn from_records(
        name: impl Into<String>,
        records: impl IntoIterator<Item = PredictionRecord<S>>,
    ) -> Result<Self> {
        let (risks, outcomes) = records.into_iter().map(|r| (r.risk, r.outcome)).unzip();
        Self::new(name, risks, outcomes)
    }

    /// Converts into another scalar type. Lossless from `f64` into `Exact`.
    pub fn convert<T: Scalar>(&self) -> PredictionSet<T> {
        let risks = self
            .risks
            .iter()
            .map(|r| T::from_real(r.to_real()).expect("risk in [0, 1] is finite"))
            .collect();
        PredictionSet {
            name: self.name.clone(),
            risks,
            outcomes: self.outcomes.clone(),
            events: self.events,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn risks(&self) -> &[S] {
        &self.risks
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn records(&self) -> impl Iterator<Item = PredictionRecord<S>> + '_ {
        self.risks
            .iter()
            .zip(&self.outcomes)
            .map(|(risk, &outcome)| PredictionRecord {
                risk: risk.clone(),
                outcome,
            })
    }

    pub fn len(&self) -> u64 {
        self.risks.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.risks.is_empty()
    }

    /// Number of events, `n1`.
    pub fn events(&self) -> u64 {
        self.events
    }

    /// Number of non-events, `n0`.
    pub fn non_events(&self) -> u64 {
        self.len() - self.events
    }

    /// Event fraction `n1 / n`.
    pub fn prevalence(&self) -> S {
        S::ratio(self.events, self.len())
    }
}

/// Confusion counts at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfusion<S = f64> {
    pub t: Threshold<S>,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl<S: Scalar> ThresholdConfusion<S> {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `tp + fp`
    pub fn positives(&self) -> u64 {
        self.tp + self.fp
    }

    /// `tn + fn`
    pub fn negatives(&self) -> u64 {
        self.tn + self.fn_
    }

    pub fn events(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Selection rate `s_t = (tp + fp) / n`.
    pub fn selection_rate(&self) -> S {
        S::ratio(self.positives(), self.n())
    }

    pub fn prevalence(&self) -> S {
        S::ratio(self.events(), self.n())
    }

    /// Same counts evaluated in another scalar type.
    pub fn convert<T: Scalar>(&self) -> ThresholdConfusion<T> {
        let t = T::from_real(self.t.value().to_real()).expect("finite threshold");
        ThresholdConfusion {
            t: Threshold(t),
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
        }
    }

    pub(crate) fn to_exact(&self) -> ThresholdConfusion<crate::Exact> {
        ThresholdConfusion {
            t: Threshold(self.t.value().to_exact()),
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
        }
    }
}

/// Utilities of the four classification outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityWeights<S = f64> {
    /// true positive
    pub u11: S,
    /// false positive
    pub u10: S,
    /// true negative
    pub u00: S,
    /// false negative
    pub u01: S,
}

impl<S: Scalar> UtilityWeights<S> {
    pub fn new(u11: S, u10: S, u00: S, u01: S) -> Self {
        UtilityWeights { u11, u10, u00, u01 }
    }

    /// The weights under which intervention utility equals net benefit.
    pub fn net_benefit(t: &Threshold<S>) -> Self {
        UtilityWeights::new(S::one(), -t.harm_weight(), S::zero(), S::zero())
    }
}

pub fn classify_at_threshold<S: Scalar>(
    data: &PredictionSet<S>,
    t: &Threshold<S>,
) -> ThresholdConfusion<S> {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (risk, &event) in data.risks.iter().zip(&data.outcomes) {
        match (*risk >= *t.value(), event) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    ThresholdConfusion {
        t: t.clone(),
        tp,
        fp,
        tn,
        fn_,
    }
}

/// `tp/n - (fp/n) * t/(1-t)`
pub fn net_benefit<S: Scalar>(c: &ThresholdConfusion<S>) -> S {
    let n = c.n();
    S::ratio(c.tp, n) - S::ratio(c.fp, n) * c.t.harm_weight()
}

/// Net benefit of intervening on everyone, `π - (1-π) t/(1-t)`.
pub fn net_benefit_treat_all<S: Scalar>(prevalence: &S, t: &Threshold<S>) -> S {
    prevalence.clone() - (S::one() - prevalence.clone()) * t.harm_weight()
}

pub fn net_benefit_treat_none<S: Scalar>() -> S {
    S::zero()
}

/// Fraction of true positives among the threshold positives; 0 when nobody is selected.
pub fn ppv<S: Scalar>(c: &ThresholdConfusion<S>) -> S {
    match c.positives() {
        0 => S::zero(),
        pos => S::ratio(c.tp, pos),
    }
}

/// Mean utility per patient under the given outcome weights.
pub fn intervention_utility<S: Scalar>(c: &ThresholdConfusion<S>, w: &UtilityWeights<S>) -> S {
    let total = S::from_count(c.tp) * w.u11.clone()
        + S::from_count(c.fp) * w.u10.clone()
        + S::from_count(c.tn) * w.u00.clone()
        + S::from_count(c.fn_) * w.u01.clone();
    total / S::from_count(c.n())
}

/// `((tp1 - tp2) - t/(1-t) (fp1 - fp2)) / n`, which is zero exactly when the
/// two confusions have equal net benefit.
pub fn nb_equality_gap<S: Scalar>(
    c1: &ThresholdConfusion<S>,
    c2: &ThresholdConfusion<S>,
) -> Result<S> {
    if c1.t != c2.t {
        return Err(Error::Usage(format!(
            "thresholds differ: {} vs {}",
            c1.t.value().to_real(),
            c2.t.value().to_real()
        )));
    }
    if c1.n() != c2.n() {
        return Err(Error::Usage(format!(
            "cohort sizes differ: {} vs {}",
            c1.n(),
            c2.n()
        )));
    }
    let d_tp = S::from_count(c1.tp) - S::from_count(c2.tp);
    let d_fp = S::from_count(c1.fp) - S::from_count(c2.fp);
    Ok((d_tp - c1.t.harm_weight() * d_fp) / S::from_count(c1.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

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
    fn d0_counts() {
        let data = d0();
        assert_eq!((data.len(), data.events(), data.non_events()), (10, 4, 6));
        assert_eq!(data.prevalence(), 0.4);
        let c = classify_at_threshold(&data, &t(0.5));
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (3, 2, 1, 4));
        assert_eq!(c.selection_rate(), 0.5);
    }

    #[test]
    fn thresholds_outside_open_interval_rejected() {
        for v in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(Threshold::<f64>::from_real(v), Err(Error::Domain { .. })));
        }
        assert!(Threshold::<Exact>::from_real(0.999).is_ok());
    }

    #[test]
    fn ties_classify_positive() {
        let data = PredictionSet::new("tie", vec![0.5], vec![true]).unwrap();
        let c = classify_at_threshold(&data, &t(0.5));
        assert_eq!(c.tp, 1);
    }

    #[test]
    fn all_below_threshold_selects_nobody() {
        let data = d0();
        let c = classify_at_threshold(&data, &t(0.95));
        assert_eq!((c.tp, c.fp), (0, 0));
        assert_eq!(c.selection_rate(), 0.0);
        assert_eq!(net_benefit(&c), 0.0);
        assert_eq!(ppv(&c), 0.0);
    }

    #[test]
    fn d0_net_benefit_and_ppv() {
        let c = classify_at_threshold(&d0(), &t(0.5));
        assert!((net_benefit(&c) - 0.1).abs() < 1e-12);
        assert!((ppv(&c) - 0.6).abs() < 1e-12);
        let exact = classify_at_threshold(&d0().convert::<Exact>(), &Threshold::from_real(0.5).unwrap());
        assert_eq!(net_benefit(&exact), Exact::ratio(1, 10));
    }

    #[test]
    fn treat_all_values() {
        assert!((net_benefit_treat_all(&0.4, &t(0.5)) + 0.2).abs() < 1e-12);
        assert_eq!(net_benefit_treat_all(&0.3, &t(0.3)), 0.0);
        for v in [0.01, 0.3, 0.9] {
            assert!((net_benefit_treat_all(&1.0, &t(v)) - 1.0).abs() < 1e-15);
        }
        let tt = t(0.25);
        let treat_all = ThresholdConfusion { t: tt.clone(), tp: 4, fp: 6, tn: 0, fn_: 0 };
        assert!((net_benefit(&treat_all) - net_benefit_treat_all(&0.4, &tt)).abs() < 1e-15);
        assert_eq!(net_benefit_treat_none::<f64>(), 0.0);
    }

    #[test]
    fn ppv_pure_positives() {
        let c = ThresholdConfusion { t: t(0.3), tp: 3, fp: 0, tn: 5, fn_: 2 };
        assert_eq!(ppv(&c), 1.0);
    }

    #[test]
    fn utility_special_cases() {
        let c = classify_at_threshold(&d0(), &t(0.5));
        let ones = UtilityWeights::new(1.0, 1.0, 1.0, 1.0);
        assert!((intervention_utility(&c, &ones) - 1.0).abs() < 1e-15);
        let accuracy = UtilityWeights::new(1.0, 0.0, 1.0, 0.0);
        assert!((intervention_utility(&c, &accuracy) - 0.7).abs() < 1e-15);
        let c7 = classify_at_threshold(&d0(), &t(0.7));
        let w = UtilityWeights::net_benefit(&c7.t);
        assert!((intervention_utility(&c7, &w) - net_benefit(&c7)).abs() < 1e-12);
    }

    #[test]
    fn equality_gap() {
        let a = ThresholdConfusion { t: t(0.5), tp: 3, fp: 2, tn: 4, fn_: 1 };
        let b = ThresholdConfusion { t: t(0.5), tp: 4, fp: 3, tn: 3, fn_: 0 };
        assert_eq!(nb_equality_gap(&a, &a).unwrap(), 0.0);
        assert_eq!(nb_equality_gap(&a, &b).unwrap(), 0.0);
        let other_t = ThresholdConfusion { t: t(0.4), ..a.clone() };
        assert!(matches!(nb_equality_gap(&a, &other_t), Err(Error::Usage(_))));
        let other_n = ThresholdConfusion { tn: 9, ..a.clone() };
        assert!(matches!(nb_equality_gap(&a, &other_n), Err(Error::Usage(_))));
    }

    #[test]
    fn prediction_set_validation() {
        assert!(PredictionSet::<f64>::new("e", vec![], vec![]).is_err());
        assert!(PredictionSet::new("m", vec![0.1, 0.2], vec![true]).is_err());
        let err = PredictionSet::new("r", vec![0.1, 0.2, 1.2], vec![true, false, true]).unwrap_err();
        assert!(matches!(err, Error::Ingestion { row: Some(3), .. }));
        assert!(PredictionSet::new("nan", vec![f64::NAN], vec![true]).is_err());
    }

    #[test]
    fn f32_matches_f64() {
        let d32 = d0().convert::<f32>();
        let c = classify_at_threshold(&d32, &Threshold::from_real(0.5).unwrap());
        assert!((net_benefit(&c) - 0.1f32).abs() < 1e-6);
    }
}
