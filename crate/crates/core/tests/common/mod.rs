//! Independent oracles and data generators shared by the integration tests.
//!
//! Nothing here calls into the library's metric code; every expected value is
//! recomputed from raw records or counts.
#![allow(dead_code)]

use netbenefit::{Exact, PredictionSet, Scalar};
use rand::Rng;

pub const D0_RISKS: [f64; 10] = [0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.2, 0.1, 0.05];
pub const D0_OUTCOMES: [u8; 10] = [1, 1, 0, 1, 0, 1, 0, 0, 0, 0];

pub fn d0() -> PredictionSet {
    PredictionSet::new("m1", D0_RISKS.to_vec(), D0_OUTCOMES.iter().map(|&y| y == 1).collect()).unwrap()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn pos(&self) -> u64 {
        self.tp + self.fp
    }
}

/// Per-record loop: a record is positive when its risk is at least `t`.
pub fn loop_counts(risks: &[f64], outcomes: &[bool], t: f64) -> Counts {
    let mut c = Counts { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for i in 0..risks.len() {
        let positive = risks[i] >= t;
        match (positive, outcomes[i]) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

pub fn ex(v: f64) -> Exact {
    Exact::from_float(v).unwrap()
}

pub fn exq(num: u64, den: u64) -> Exact {
    Exact::from_count(num) / Exact::from_count(den)
}

/// Exact net benefit from counts and the exact value of the double `t`.
pub fn exact_nb(c: &Counts, t: f64) -> Exact {
    let t = ex(t);
    let w = t.clone() / (Exact::from_count(1) - t);
    exq(c.tp, c.n()) - exq(c.fp, c.n()) * w
}

/// Exact treat-all net benefit.
pub fn exact_nb_all(events: u64, n: u64, t: f64) -> Exact {
    let t = ex(t);
    let w = t.clone() / (Exact::from_count(1) - t);
    exq(events, n) - exq(n - events, n) * w
}

/// Plain floating evaluation of the net benefit formula.
pub fn float_nb(c: &Counts, t: f64) -> f64 {
    let n = c.n() as f64;
    c.tp as f64 / n - c.fp as f64 / n * t / (1.0 - t)
}

/// Uniform risks and Bernoulli outcomes with a random base rate.
pub fn random_dataset<R: Rng>(rng: &mut R, name: &str, n_lo: usize, n_hi: usize) -> PredictionSet {
    let n = rng.random_range(n_lo..=n_hi);
    let base = rng.random_range(0.02..0.98);
    let risks: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let outcomes: Vec<bool> = (0..n).map(|_| rng.random_bool(base)).collect();
    PredictionSet::new(name, risks, outcomes).unwrap()
}

/// Risks on a coarse 0.05 lattice so that ties with grid thresholds occur.
pub fn coarse_dataset<R: Rng>(rng: &mut R, name: &str, n_lo: usize, n_hi: usize) -> PredictionSet {
    let n = rng.random_range(n_lo..=n_hi);
    let base = rng.random_range(0.05..0.95);
    let risks: Vec<f64> = (0..n).map(|_| rng.random_range(0..=20) as f64 / 20.0).collect();
    let outcomes: Vec<bool> = (0..n).map(|_| rng.random_bool(base)).collect();
    PredictionSet::new(name, risks, outcomes).unwrap()
}
