//! Threshold sweeps and synthetic cohorts.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    nb_decomposition, nb_gap_treat_all, nb_via_calibration, prevalence_identity_residual,
    threshold_calibration, CalibrationSummary,
};
use crate::equivalences::{ppv_from_nb, verdict_from_confusion};
use crate::error::{Error, Result};
use crate::metrics::{classify_at_threshold, PredictionSet, Threshold, ThresholdConfusion};
use crate::scalar::{within, Exact, Scalar};

/// Evenly spaced thresholds `lo, lo+step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid {
            lo: 0.01,
            hi: 0.50,
            step: 0.01,
        }
    }
}

impl ThresholdGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(Error::Usage(format!("grid needs 0 < lo <= hi < 1, got {lo}:{hi}")));
        }
        if !(step >= 1e-9 && step.is_finite()) {
            return Err(Error::Usage(format!("grid step must be at least 1e-9, got {step}")));
        }
        Ok(ThresholdGrid { lo, hi, step })
    }

    /// Grid points, each rounded to 12 decimals so that `0.07` is the double
    /// nearest to 0.07 rather than an accumulated sum.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * 1e12).round() / 1e12)
            .filter(|&t| t > 0.0 && t < 1.0)
            .collect()
    }

    pub fn thresholds<S: Scalar>(&self) -> Vec<Threshold<S>> {
        self.points()
            .into_iter()
            .map(|t| Threshold::from_real(t).expect("grid points lie in (0, 1)"))
            .collect()
    }
}

impl FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(Error::Usage(format!("grid must look like lo:hi:step, got `{s}`")));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad grid number `{v}`")))
        };
        ThresholdGrid::new(num(lo)?, num(hi)?, num(step)?)
    }
}

impl fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Everything known about one model at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<S = f64> {
    pub t: Threshold<S>,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub s_t: S,
    pub nb_model: S,
    pub nb_all: S,
    pub nb_none: S,
    pub ppv: S,
    pub ppv_none_ref: S,
    /// Absent when nobody is selected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv_all_ref: Option<S>,
    pub beats_none: bool,
    pub beats_all: bool,
    pub calibration: CalibrationSummary<S>,
}

impl<S: Scalar> CurvePoint<S> {
    pub fn confusion(&self) -> ThresholdConfusion<S> {
        ThresholdConfusion {
            t: self.t.clone(),
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
        }
    }

    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Net benefit against the treat-all and treat-none curves.
    Decision,
    /// PPV against the diagonal and the dotted treat-all comparison curve.
    Ppv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve<S = f64> {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint<S>>,
}

pub fn curve_point<S: Scalar>(data: &PredictionSet<S>, t: &Threshold<S>) -> Result<CurvePoint<S>> {
    let c = classify_at_threshold(data, t);
    let verdict = verdict_from_confusion(&c)?;
    let point = CurvePoint {
        t: t.clone(),
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
        s_t: verdict.s_t,
        nb_model: verdict.nb,
        nb_all: verdict.nb_all,
        nb_none: S::zero(),
        ppv: verdict.ppv,
        ppv_none_ref: verdict.ppv_none_ref,
        ppv_all_ref: verdict.ppv_all_ref,
        beats_none: verdict.beats_none,
        beats_all: verdict.beats_all,
        calibration: threshold_calibration(data, t),
    };
    check_point(&point, &data.prevalence())?;
    Ok(point)
}

/// Verifies the per-threshold identities on an emitted point. Tolerance is
/// [`Scalar::identity_tolerance`] scaled by `1/(1-t)`.
fn check_point<S: Scalar>(p: &CurvePoint<S>, prevalence: &S) -> Result<()> {
    let tol = S::identity_tolerance() / p.t.complement();
    let fail = |what: &str| {
        Err(Error::InvariantViolation(format!(
            "{what} fails at t={}",
            p.t.value().to_real()
        )))
    };
    let nb = &p.nb_model;
    let expected_all = (prevalence.clone() - p.t.value().clone()) / p.t.complement();
    if !within(&p.nb_all, &expected_all, &tol) {
        return fail("treat-all net benefit");
    }
    let cal = &p.calibration;
    if cal.n_above > 0 {
        if !within(nb, &nb_via_calibration(cal)?, &tol) {
            return fail("selected-group calibration identity");
        }
        let (e, c) = nb_decomposition(cal)?;
        if !within(nb, &(e + c), &tol) {
            return fail("enrichment/calibration decomposition");
        }
        let rebuilt = ppv_from_nb(nb, p.tp + p.fp, p.n(), &p.t);
        if !within(&rebuilt, &p.ppv, &tol) {
            return fail("PPV reconstruction from net benefit");
        }
    }
    if cal.n_below > 0 {
        let gap = nb.clone() - p.nb_all.clone();
        if !within(&gap, &nb_gap_treat_all(cal)?, &tol) {
            return fail("spared-group calibration identity");
        }
    }
    if cal.n_above > 0 && cal.n_below > 0 {
        let residual = prevalence_identity_residual(cal, prevalence)?;
        if residual.abs() > tol {
            return fail("prevalence identity");
        }
    }
    Ok(())
}

fn sweep<S: Scalar>(data: &PredictionSet<S>, grid: &ThresholdGrid) -> Result<Vec<CurvePoint<S>>> {
    grid.thresholds::<S>()
        .par_iter()
        .map(|t| curve_point(data, t))
        .collect()
}

pub fn decision_curve<S: Scalar>(data: &PredictionSet<S>, grid: &ThresholdGrid) -> Result<Curve<S>> {
    Ok(Curve {
        kind: CurveKind::Decision,
        points: sweep(data, grid)?,
    })
}

pub fn ppv_curve<S: Scalar>(data: &PredictionSet<S>, grid: &ThresholdGrid) -> Result<Curve<S>> {
    Ok(Curve {
        kind: CurveKind::Ppv,
        points: sweep(data, grid)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RiskDistribution {
    Uniform,
    Beta { a: f64, b: f64 },
}

impl FromStr for RiskDistribution {
    type Err = Error;

    /// `uniform` or `beta:A:B`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("distribution must be `uniform` or `beta:A:B`, got `{s}`"));
        if s == "uniform" {
            return Ok(RiskDistribution::Uniform);
        }
        let rest = s.strip_prefix("beta:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(':').ok_or_else(bad)?;
        Ok(RiskDistribution::Beta {
            a: a.parse().map_err(|_| bad())?,
            b: b.parse().map_err(|_| bad())?,
        })
    }
}

/// Recipe for a simulated cohort whose reported risks are the true risks
/// shifted on the logit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    pub risk_distribution: RiskDistribution,
    /// Positive values overestimate risk, negative values underestimate it.
    pub logit_shift: f64,
    pub label: String,
}

const RISK_FLOOR: f64 = 1e-12;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Draws a cohort and returns `(truth, reported)`.
///
/// Stream contract: a `ChaCha8Rng` seeded with `seed`; for each record in
/// order, one draw of the true risk `q` followed by one uniform `u`, with
/// outcome `u < q`. Both sets share the outcome vector.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(PredictionSet, PredictionSet)> {
    if spec.n == 0 {
        return Err(Error::Usage("synthetic cohort needs n >= 1".into()));
    }
    if !spec.logit_shift.is_finite() {
        return Err(Error::domain("logit shift", "finite reals", spec.logit_shift));
    }
    let beta = match spec.risk_distribution {
        RiskDistribution::Uniform => None,
        RiskDistribution::Beta { a, b } => Some(
            Beta::new(a, b).map_err(|_| Error::Usage(format!("beta parameters must be positive, got ({a}, {b})")))?,
        ),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = Vec::with_capacity(spec.n);
    let mut outcomes = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let q: f64 = match &beta {
            Some(d) => d.sample(&mut rng),
            None => rng.random(),
        };
        let u: f64 = rng.random();
        outcomes.push(u < q);
        truth.push(q.clamp(RISK_FLOOR, 1.0 - RISK_FLOOR));
    }
    let reported = if spec.logit_shift == 0.0 {
        truth.clone()
    } else {
        truth.iter().map(|&q| logistic(logit(q) + spec.logit_shift)).collect()
    };
    Ok((
        PredictionSet::new(format!("{}-truth", spec.label), truth, outcomes.clone())?,
        PredictionSet::new(spec.label.clone(), reported, outcomes)?,
    ))
}

/// A threshold at which a model loses to a default strategy, with the
/// group event rates that explain it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailurePoint {
    pub t: f64,
    pub nb: f64,
    pub nb_all: f64,
    pub s_t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_above: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_below: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiscalibrationScan {
    pub model: String,
    pub prevalence: f64,
    /// Thresholds with `NB < 0`.
    pub worse_than_none: Vec<FailurePoint>,
    /// Thresholds with `NB < NB_all`.
    pub worse_than_all: Vec<FailurePoint>,
    /// Contiguous grid runs of `worse_than_none`, as `[first, last]` thresholds.
    pub none_regions: Vec<[f64; 2]>,
    pub all_regions: Vec<[f64; 2]>,
}

/// Lists the thresholds where the model is strictly worse than treat-none or
/// treat-all. Signs are decided exactly from counts.
pub fn miscalibration_scan(data: &PredictionSet, grid: &ThresholdGrid) -> Result<MiscalibrationScan> {
    let points = decision_curve(data, grid)?.points;
    let zero = Exact::from_count(0);
    let mut none_flags = Vec::with_capacity(points.len());
    let mut all_flags = Vec::with_capacity(points.len());
    let (mut worse_than_none, mut worse_than_all) = (Vec::new(), Vec::new());
    for p in &points {
        let e = p.confusion().to_exact();
        let nb = crate::metrics::net_benefit(&e);
        let nb_all = crate::metrics::net_benefit_treat_all(&e.prevalence(), &e.t);
        let failure = FailurePoint {
            t: *p.t.value(),
            nb: p.nb_model,
            nb_all: p.nb_all,
            s_t: p.s_t,
            y_above: p.calibration.y_above,
            y_below: p.calibration.y_below,
        };
        let below_none = nb < zero;
        let below_all = nb < nb_all;
        none_flags.push(below_none);
        all_flags.push(below_all);
        if below_none {
            worse_than_none.push(failure.clone());
        }
        if below_all {
            worse_than_all.push(failure);
        }
    }
    let ts: Vec<f64> = points.iter().map(|p| *p.t.value()).collect();
    Ok(MiscalibrationScan {
        model: data.name().to_string(),
        prevalence: data.prevalence(),
        worse_than_none,
        worse_than_all,
        none_regions: runs(&ts, &none_flags),
        all_regions: runs(&ts, &all_flags),
    })
}

fn runs(ts: &[f64], flags: &[bool]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push([ts[s], ts[i - 1]]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push([ts[s], ts[ts.len() - 1]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d0() -> PredictionSet {
        PredictionSet::new(
            "d0",
            vec![0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.2, 0.1, 0.05],
            [1, 1, 0, 1, 0, 1, 0, 0, 0, 0].iter().map(|&y| y == 1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_grid_has_fifty_clean_points() {
        let pts = ThresholdGrid::default().points();
        assert_eq!(pts.len(), 50);
        assert_eq!(pts[0], 0.01);
        assert_eq!(pts[6], 0.07);
        assert_eq!(pts[49], 0.5);
    }

    #[test]
    fn grid_parsing() {
        let g: ThresholdGrid = "0.5:0.5:0.01".parse().unwrap();
        assert_eq!(g.points(), vec![0.5]);
        assert!("0:0.5:0.01".parse::<ThresholdGrid>().is_err());
        assert!("0.2:0.1:0.01".parse::<ThresholdGrid>().is_err());
        assert!("0.1:0.5".parse::<ThresholdGrid>().is_err());
        assert!("0.1:0.5:0".parse::<ThresholdGrid>().is_err());
        let g: ThresholdGrid = "0.1:0.35:0.1".parse().unwrap();
        assert_eq!(g.points(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn d0_single_point() {
        let grid: ThresholdGrid = "0.5:0.5:0.01".parse().unwrap();
        let curve = decision_curve(&d0(), &grid).unwrap();
        assert_eq!(curve.kind, CurveKind::Decision);
        let p = &curve.points[0];
        assert!((p.nb_model - 0.1).abs() < 1e-12);
        assert!((p.nb_all + 0.2).abs() < 1e-12);
        assert!((p.ppv - 0.6).abs() < 1e-12);
        assert!((p.ppv_all_ref.unwrap() - 0.3).abs() < 1e-12);
        assert!(p.ppv > p.ppv_none_ref && p.ppv > p.ppv_all_ref.unwrap());
    }

    #[test]
    fn full_and_empty_selection() {
        let low: ThresholdGrid = "0.01:0.04:0.01".parse().unwrap();
        for p in decision_curve(&d0(), &low).unwrap().points {
            assert_eq!(p.s_t, 1.0);
            assert!((p.nb_model - p.nb_all).abs() < 1e-12);
        }
        let high: ThresholdGrid = "0.91:0.99:0.01".parse().unwrap();
        for p in decision_curve(&d0(), &high).unwrap().points {
            assert_eq!((p.nb_model, p.ppv), (0.0, 0.0));
            assert!(p.ppv_all_ref.is_none());
        }
    }

    #[test]
    fn decision_and_ppv_curves_share_points() {
        let g = ThresholdGrid::default();
        let a = decision_curve(&d0(), &g).unwrap();
        let b = ppv_curve(&d0(), &g).unwrap();
        assert_eq!(b.kind, CurveKind::Ppv);
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn perfect_predictor_ppv_is_one() {
        let data = PredictionSet::new("p", vec![1.0, 0.0, 1.0, 0.0], vec![true, false, true, false]).unwrap();
        for p in ppv_curve(&data, &ThresholdGrid::default()).unwrap().points {
            assert_eq!(p.ppv, 1.0);
        }
    }

    #[test]
    fn synthetic_identity_and_shift() {
        let mut spec = SyntheticSpec {
            n: 500,
            seed: 3,
            risk_distribution: RiskDistribution::Beta { a: 2.0, b: 5.0 },
            logit_shift: 0.0,
            label: "s".into(),
        };
        let (truth, reported) = generate_synthetic(&spec).unwrap();
        assert_eq!(truth.risks(), reported.risks());
        spec.logit_shift = 1.0;
        let (truth2, up) = generate_synthetic(&spec).unwrap();
        assert_eq!(truth, truth2);
        assert_eq!(truth2.name(), "s-truth");
        assert!(truth2.risks().iter().zip(up.risks()).all(|(q, p)| p > q));
        assert_eq!(truth2.outcomes(), up.outcomes());
        spec.logit_shift = -1.0;
        let (_, down) = generate_synthetic(&spec).unwrap();
        assert!(truth2.risks().iter().zip(down.risks()).all(|(q, p)| p < q));
    }

    #[test]
    fn synthetic_validation() {
        let base = SyntheticSpec {
            n: 0,
            seed: 1,
            risk_distribution: RiskDistribution::Uniform,
            logit_shift: 0.0,
            label: "x".into(),
        };
        assert!(generate_synthetic(&base).is_err());
        let bad_beta = SyntheticSpec {
            n: 5,
            risk_distribution: RiskDistribution::Beta { a: 0.0, b: 1.0 },
            ..base.clone()
        };
        assert!(generate_synthetic(&bad_beta).is_err());
    }

    #[test]
    fn distribution_parsing() {
        assert_eq!("uniform".parse::<RiskDistribution>().unwrap(), RiskDistribution::Uniform);
        assert_eq!(
            "beta:2:5".parse::<RiskDistribution>().unwrap(),
            RiskDistribution::Beta { a: 2.0, b: 5.0 }
        );
        assert!("gamma:1".parse::<RiskDistribution>().is_err());
    }

    #[test]
    fn runs_are_contiguous() {
        let ts = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert_eq!(runs(&ts, &[true, true, false, true, true]), vec![[0.1, 0.2], [0.4, 0.5]]);
        assert!(runs(&ts, &[false; 5]).is_empty());
    }
}
