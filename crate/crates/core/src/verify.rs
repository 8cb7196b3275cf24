//! Randomized property suites over every inequality the crate checks.
//!
//! Trial `i` of a suite draws from a ChaCha8 stream keyed by `(seed, suite, i)`,
//! so a failure is reproduced from the bundle alone.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{gamma_check, WEIGHT_VECTORS};
use crate::error::Result;
use crate::gap::{beta_inv_lower, pf_optimality_check, scaling_study, GapPressure};
use crate::geometry::{check_lem_a3_a4_a5, pf_channel, ChannelGeometry, LemmaVariant, MappedField, QuadConfig, SmoothnessClass};
use crate::rectangle::{
    check_cor32, check_cor33, check_lem_a6, check_thm31, pf_rectangle, random_field, random_mean_zero_field, TrigPolynomial,
};
use crate::window::{envelope_constants, global_c1_c2, lemma32_check, lemma32_check_without_mean, search, EnvelopeTable};

/// Residual floor for exact-sum checks.
pub const SUM_TOL: f64 = 1e-10;
/// Residual floor for quadrature checks.
pub const QUAD_TOL: f64 = 1e-8;
/// Sine truncation for strip-inequality vectors.
pub const STRIP_TRUNCATION: usize = 200;
/// Field sizes for the rectangle suites.
pub const FIELD_N: usize = 6;
pub const FIELD_J: usize = 24;
/// Rectangle shapes for the rectangle suites.
pub const RECTANGLES: [(f64, f64); 4] = [(1.0, 1.0), (8.0, 1.0), (1.0, 8.0), (20.0, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma32,
    Thm31,
    Corollaries,
    LemmasA,
    Gap,
    Pf,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Lemma32, Suite::Thm31, Suite::Corollaries, Suite::LemmasA, Suite::Gap, Suite::Pf];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma32 => "lemma32",
            Suite::Thm31 => "thm31",
            Suite::Corollaries => "corollaries",
            Suite::LemmasA => "lemmasA",
            Suite::Gap => "gap",
            Suite::Pf => "pf",
        }
    }

    fn stream_key(self) -> u64 {
        (self as u64 + 1) << 40
    }
}

/// The rng for trial `trial` of `suite`.
pub fn trial_rng(seed: u64, suite: Suite, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.stream_key() | trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproBundle {
    pub suite: String,
    pub check: String,
    pub seed: u64,
    pub trial: usize,
    pub residual: f64,
    pub inputs: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub count: usize,
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<ReproBundle>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn min_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.min_residual).fold(f64::INFINITY, f64::min)
    }
}

/// Keeps per-check minima and the first few failures.
struct Recorder {
    suite: Suite,
    seed: u64,
    trials: usize,
    checks: Vec<CheckSummary>,
    failures: Vec<ReproBundle>,
    failed: bool,
    notes: Vec<String>,
}

const MAX_BUNDLES: usize = 5;

impl Recorder {
    fn new(suite: Suite, seed: u64, trials: usize) -> Self {
        Self { suite, seed, trials, checks: Vec::new(), failures: Vec::new(), failed: false, notes: Vec::new() }
    }

    fn record(&mut self, check: &str, trial: usize, residual: f64, floor: f64, inputs: impl FnOnce() -> serde_json::Value) {
        match self.checks.iter_mut().find(|c| c.check == check) {
            Some(c) => {
                c.count += 1;
                c.min_residual = c.min_residual.min(residual);
            }
            None => self.checks.push(CheckSummary { check: check.to_string(), count: 1, min_residual: residual }),
        }
        if !(residual >= floor) {
            self.failed = true;
            if self.failures.len() < MAX_BUNDLES {
                self.failures.push(ReproBundle {
                    suite: self.suite.name().to_string(),
                    check: check.to_string(),
                    seed: self.seed,
                    trial,
                    residual,
                    inputs: inputs(),
                });
            }
        }
    }

    /// A pass/fail fact with no residual; `ok = false` records `-1`.
    fn assert(&mut self, check: &str, ok: bool, inputs: impl FnOnce() -> serde_json::Value) {
        self.record(check, 0, if ok { 0.0 } else { -1.0 }, 0.0, inputs);
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite.name().to_string(),
            seed: self.seed,
            trials: self.trials,
            passed: !self.failed,
            checks: self.checks,
            failures: self.failures,
            notes: self.notes,
        }
    }
}

/// Unit vector with i.i.d. normal entries.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `ν` log-uniform on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn reference_table() -> Result<EnvelopeTable> {
    search(8.9)
}

/// Strip inequality for random unit vectors with the certified constants,
/// the envelope constants, and the mean-free variant with `C1 = C2 = 9`.
pub fn lemma32_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let table = reference_table()?;
    let mut rec = Recorder::new(Suite::Lemma32, seed, trials);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Suite::Lemma32, trial);
        let b = random_unit_vector(&mut rng, STRIP_TRUNCATION);
        let nu = log_uniform(&mut rng, 0.01, 100.0);
        let inputs = || json!({ "nu": nu, "len": STRIP_TRUNCATION });
        let c = global_c1_c2(nu, &table)?;
        rec.record("certified", trial, lemma32_check(&b, nu, c.c1, c.c2)?.residual(), -SUM_TOL, inputs);
        let (e1, e2) = envelope_constants(nu);
        rec.record("envelope", trial, lemma32_check(&b, nu, e1, e2)?.residual(), -SUM_TOL, inputs);
        rec.record("no-mean", trial, lemma32_check_without_mean(&b, nu, 9.0, 9.0)?.residual(), -SUM_TOL, inputs);
    }
    Ok(rec.finish())
}

fn rect_inputs(l: f64, h: f64) -> serde_json::Value {
    json!({ "L": l, "H": h, "N": FIELD_N, "J": FIELD_J })
}

/// Rectangle inequality on random mean-zero fields, cycling over [`RECTANGLES`].
pub fn thm31_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut rec = Recorder::new(Suite::Thm31, seed, trials);
    let mut ratio_min = f64::INFINITY;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Suite::Thm31, trial);
        let (l, h) = RECTANGLES[trial % RECTANGLES.len()];
        let q = random_mean_zero_field(&mut rng, l, h, FIELD_N, FIELD_J)?;
        let r = check_thm31(&q)?;
        if (l, h) == (1.0, 1.0) {
            ratio_min = ratio_min.min(1.0 + r / q.l2_sq());
        }
        rec.record("thm31", trial, r, -SUM_TOL, || rect_inputs(l, h));
    }
    if ratio_min.is_finite() {
        rec.note(format!("min (C1 dx^2 + C2 dy^2)/|q|^2 on the unit square: {ratio_min:.6}"));
    }
    Ok(rec.finish())
}

/// Random trigonometric polynomial of degree ≤ 3 with normal coefficients.
pub fn random_multiplier<R: Rng + ?Sized>(rng: &mut R, l: f64) -> TrigPolynomial {
    let deg = rng.random_range(0..=3i64);
    let coeffs = (-deg..=deg)
        .map(|m| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (m, Complex64::new(re, im))
        })
        .collect();
    TrigPolynomial { l, coeffs }
}

/// `‖q‖₋₁` bound and the multiplier bound on random mean-zero fields.
pub fn corollaries_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut rec = Recorder::new(Suite::Corollaries, seed, trials);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Suite::Corollaries, trial);
        let (l, h) = RECTANGLES[trial % RECTANGLES.len()];
        let q = random_mean_zero_field(&mut rng, l, h, FIELD_N, FIELD_J)?;
        rec.record("cor32", trial, check_cor32(&q)?, -SUM_TOL, || rect_inputs(l, h));
        let zeta = if trial % 2 == 0 { TrigPolynomial::cosine(l, 1) } else { random_multiplier(&mut rng, l) };
        let r = check_cor33(&q, &zeta)?;
        rec.record("cor33", trial, r, -SUM_TOL, || {
            json!({ "L": l, "H": h, "N": FIELD_N, "J": FIELD_J, "zeta": zeta.coeffs.iter().map(|(m, c)| (m, c.re, c.im)).collect::<Vec<_>>() })
        });
    }
    Ok(rec.finish())
}

/// Geometries for the channel suites: `(label, geometry)`.
pub fn suite_geometries() -> Vec<(&'static str, ChannelGeometry)> {
    vec![
        ("constant", ChannelGeometry::constant(1.0, 1.0).expect("valid")),
        ("cosine", ChannelGeometry::cosine(1.0, 1.0, 0.25).expect("valid")),
        ("gap", ChannelGeometry::gap(1.0, 0.1, None).expect("valid")),
        ("sawtooth", ChannelGeometry::sawtooth(1.0, 0.5, 1.0).expect("valid")),
        (
            "sampled",
            ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [0.25, 0.6], [0.5, 0.9], [0.8, 0.4], [1.0, 1.0]]).expect("valid"),
        ),
    ]
}

/// Reference height for trial `trial`: alternately `h0` and `√(h0·h1)`.
fn trial_height(g: &ChannelGeometry, trial: usize) -> f64 {
    let s = g.summary();
    if trial % 2 == 0 { s.h0 } else { (s.h0 * s.h1).sqrt() }
}

const MAPPED_N: usize = 2;
const MAPPED_J: usize = 6;

/// Weight identities, both Poincaré bounds, the three transfer bounds and
/// the `η`-weighted bound, `field_trials` random fields per geometry.
pub fn lemmas_a_suite(seed: u64, gamma_trials: usize, field_trials: usize) -> Result<SuiteReport> {
    let mut rec = Recorder::new(Suite::LemmasA, seed, gamma_trials.max(field_trials));
    for trial in 0..gamma_trials {
        let mut rng = trial_rng(seed, Suite::LemmasA, trial);
        for (label, g) in WEIGHT_VECTORS {
            let w: Vec<Complex64> =
                g.iter().map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            let r = gamma_check(g, &w)?;
            rec.record("gamma", trial, r, -SUM_TOL, || json!({ "weights": label, "w": w.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>() }));
        }
    }
    let cfg = QuadConfig::fast();
    for (gi, (label, g)) in suite_geometries().into_iter().enumerate() {
        for trial in 0..field_trials {
            let mut rng = trial_rng(seed, Suite::LemmasA, (1 + gi) * 1_000_000 + trial);
            let h = trial_height(&g, trial);
            let f = random_field(&mut rng, g.l(), h, MAPPED_N, MAPPED_J)?;
            let inputs = || json!({ "geometry": label, "H": h, "N": MAPPED_N, "J": MAPPED_J, "stream": (1 + gi) * 1_000_000 + trial });
            rec.record("pf-rectangle", trial, pf_rectangle(&f), -SUM_TOL, inputs);
            rec.record("eta-weighted", trial, check_lem_a6(&f).residual, -QUAD_TOL, inputs);
            let u = MappedField::new(g.clone(), f)?;
            rec.record("pf-channel", trial, pf_channel(&u, cfg), -QUAD_TOL, inputs);
            let variants: &[LemmaVariant] = if g.class() == SmoothnessClass::C11 {
                &[LemmaVariant::C11, LemmaVariant::Lipschitz]
            } else {
                &[LemmaVariant::Lipschitz]
            };
            for &v in variants {
                let r = check_lem_a3_a4_a5(&u, v, cfg)?;
                rec.record("scaled-energy", trial, r.r3, -QUAD_TOL, inputs);
                rec.record("energy", trial, r.r5, -QUAD_TOL, inputs);
                if let Some(r4) = r.r4 {
                    rec.record("transport", trial, r4, -QUAD_TOL, inputs);
                }
            }
        }
    }
    Ok(rec.finish())
}

/// Default gap heights for the scaling checks.
pub const GAP_HEIGHTS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Lower bound, sandwich, exponent and Poincaré optimality for the gap channel.
pub fn gap_suite(seed: u64) -> Result<SuiteReport> {
    let mut rec = Recorder::new(Suite::Gap, seed, 1);
    let study = scaling_study(&GAP_HEIGHTS)?;
    for row in &study.rows {
        let p = GapPressure::new(row.h0)?;
        let inputs = || json!({ "h0": row.h0 });
        rec.record("p-norm", 0, p.l2_sq().sqrt() - 0.5, 0.0, inputs);
        rec.record("mean", 0, QUAD_TOL - p.mean().abs(), 0.0, inputs);
        rec.record("sandwich", 0, row.upper_bound - row.lower_bound, 0.0, inputs);
        rec.record("lower-bound", 0, row.lower_bound - row.h0.powf(-1.5) / (2.0 * 8f64.sqrt()), 0.0, inputs);
        rec.record("pf-optimality", 0, pf_optimality_check(row.h0)?, -QUAD_TOL, inputs);
        let narrow = GapPressure::with_width(row.h0, Some(0.05))?;
        rec.assert("profile-independence", (narrow.l2_sq() - p.l2_sq()).abs() <= 1e-10, inputs);
    }
    rec.assert("exponent", (-1.6..=-1.4).contains(&study.exponent), || json!({ "exponent": study.exponent }));
    rec.note(format!("fitted exponent {:.6}", study.exponent));
    let ratio = beta_inv_lower(0.125)? / beta_inv_lower(0.5)?;
    rec.note(format!("lower-bound ratio h0 = 0.125 vs 0.5: {ratio:.6}"));
    Ok(rec.finish())
}

/// Both Poincaré bounds on random fields, and the gap-channel optimality check.
pub fn pf_suite(seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut rec = Recorder::new(Suite::Pf, seed, trials);
    let geoms = suite_geometries();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Suite::Pf, trial);
        let (label, g) = &geoms[trial % geoms.len()];
        let h = trial_height(g, trial);
        let f = random_field(&mut rng, g.l(), h, MAPPED_N, MAPPED_J)?;
        let inputs = || json!({ "geometry": label, "H": h });
        rec.record("rectangle", trial, pf_rectangle(&f), -SUM_TOL, inputs);
        let u = MappedField::new(g.clone(), f)?;
        rec.record("channel", trial, pf_channel(&u, QuadConfig::fast()), -QUAD_TOL, inputs);
    }
    for h0 in [0.01, 0.25, 0.5, 0.99] {
        rec.record("gap-optimality", 0, pf_optimality_check(h0)?, -QUAD_TOL, || json!({ "h0": h0 }));
    }
    // sharp constant on the first sine mode
    let one = crate::rectangle::single_mode(1.0, 1.0, 0, 4, 0, 1, Complex64::new(1.0, 0.0))?;
    rec.assert("sharp-mode", pf_rectangle(&one).abs() <= 1e-12 * PI, || json!({}));
    Ok(rec.finish())
}

/// Field trials per geometry in the appendix suite, given the requested trial count.
pub fn field_trials_for(trials: usize) -> usize {
    trials.clamp(1, 100)
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    match suite {
        Suite::Lemma32 => lemma32_suite(seed, trials),
        Suite::Thm31 => thm31_suite(seed, trials),
        Suite::Corollaries => corollaries_suite(seed, trials),
        Suite::LemmasA => lemmas_a_suite(seed, trials, field_trials_for(trials)),
        Suite::Gap => gap_suite(seed),
        Suite::Pf => pf_suite(seed, trials),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(7, Suite::Lemma32, 3).random();
        let b: f64 = trial_rng(7, Suite::Lemma32, 3).random();
        let c: f64 = trial_rng(7, Suite::Lemma32, 4).random();
        let d: f64 = trial_rng(7, Suite::Thm31, 3).random();
        assert_eq!(a, b);
        assert!(a != c && a != d);
    }

    #[test]
    fn small_suites_pass() {
        for suite in Suite::ALL {
            let r = run_suite(suite, 7, 8).unwrap();
            assert!(r.passed, "{suite:?}: {:?}", r.failures);
            assert!(!r.checks.is_empty());
        }
    }

    #[test]
    fn recorder_keeps_bundles() {
        let mut rec = Recorder::new(Suite::Pf, 1, 2);
        rec.record("x", 0, 1.0, 0.0, || json!({}));
        rec.record("x", 1, -1.0, 0.0, || json!({ "k": 1 }));
        let r = rec.finish();
        assert!(!r.passed);
        assert_eq!(r.failures[0].trial, 1);
        assert_eq!(r.min_residual(), -1.0);
    }

    #[test]
    fn log_uniform_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let x = log_uniform(&mut rng, 0.01, 100.0);
            assert!((0.01..=100.0).contains(&x));
        }
    }
}
