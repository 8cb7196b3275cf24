//! Window certificates for the strip inequality
//!
//! ```text
//! Σ_{k≥0} ν²/(ν²+k²)|a_k|² ≤ C1 Σ_{j≥1} ν²/(ν²+j²)|b_j|² + (C2−1) Σ_{k≥1} k²/(ν²+k²)|a_k|²,   a = E b.
//! ```
//!
//! A pair `(k1, j0)` with tail norm `t` certifies
//! `C1(ν) = (1 + j0²/ν²)/(1−t)` and `C2(ν) = (1 + ν²/k1²)/(1−t)`; for a
//! threshold `c` both stay below `c` on `[ν_min, ν_max]`. Small `ν` uses the
//! `(1, 1)` pair, large `ν` uses `(⌊ν/√3⌋, 3⌊ν/√3⌋)` with a Frobenius bound
//! on `t`, and the middle range is covered by a searched chain of windows.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fourier_ops::{coeff, frobenius_tail_bound, tail_norm, tail_norms_for_rows};

/// Case 1 covers `0 < ν ≤ SMALL_NU_LIMIT`.
pub const SMALL_NU_LIMIT: f64 = 0.5;
/// Case 3 takes over from here when the table stops.
pub const LARGE_NU_LIMIT: f64 = 100.0;
/// Worst case of the large-ν certificate, `(1 + 3(58/57)²)/(1 − 0.54298)`.
pub const LARGE_NU_WORST_CASE: f64 = 8.985;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowCertificate {
    pub k1: usize,
    pub j0: usize,
    pub t: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub c_thresh: f64,
}

impl WindowCertificate {
    pub fn c1(&self, nu: f64) -> f64 {
        c1_value(self.j0, self.t, nu)
    }

    pub fn c2(&self, nu: f64) -> f64 {
        c2_value(self.k1, self.t, nu)
    }

    pub fn contains(&self, nu: f64) -> bool {
        self.nu_min <= nu && nu <= self.nu_max
    }
}

fn c1_value(j0: usize, t: f64, nu: f64) -> f64 {
    let j0 = j0 as f64;
    (1.0 + j0 * j0 / (nu * nu)) / (1.0 - t)
}

fn c2_value(k1: usize, t: f64, nu: f64) -> f64 {
    let k1 = k1 as f64;
    (1.0 + nu * nu / (k1 * k1)) / (1.0 - t)
}

/// Window for a known tail norm. `None` when `ν_max < ν_min`.
pub fn window_from_tail(k1: usize, j0: usize, t: f64, c_thresh: f64) -> Result<Option<WindowCertificate>> {
    let slack = (1.0 - t) * c_thresh - 1.0;
    if slack <= 0.0 {
        return domain(format!(
            "threshold {c_thresh} does not exceed 1/(1-t) = {} for ({k1}, {j0})",
            1.0 / (1.0 - t)
        ));
    }
    let s = slack.sqrt();
    let nu_min = j0 as f64 / s;
    let nu_max = k1 as f64 * s;
    Ok((nu_max >= nu_min).then_some(WindowCertificate { k1, j0, t, nu_min, nu_max, c_thresh }))
}

pub fn window_for(k1: usize, j0: usize, c_thresh: f64) -> Result<Option<WindowCertificate>> {
    let t = tail_norm(k1, j0)?;
    window_from_tail(k1, j0, t, c_thresh)
}

/// Candidate pairs `k1 ≤ j0 ≤ ratio·k1`, `k1 ≤ max_k1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_k1: usize,
    pub max_ratio: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        // k1 ≤ j0 ≤ 4 k1 ≤ 400
        Self { max_k1: 100, max_ratio: 4 }
    }
}

/// Tail norms of every candidate pair. Independent of the threshold, so one
/// table serves any number of searches.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    config: SearchConfig,
    entries: Vec<(usize, usize, f64)>,
}

impl CandidateTable {
    pub fn compute(config: SearchConfig) -> Result<Self> {
        let rows: Result<Vec<Vec<(usize, usize, f64)>>> = (1..=config.max_k1)
            .into_par_iter()
            .map(|k1| {
                let norms = tail_norms_for_rows(k1, config.max_ratio * k1)?;
                Ok(norms.into_iter().map(|(j0, t)| (k1, j0, t)).collect())
            })
            .collect();
        let entries = rows?.into_iter().flatten().collect();
        Ok(Self { config, entries })
    }

    pub fn config(&self) -> SearchConfig {
        self.config
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All nonempty windows at `c_thresh`, sorted by `ν_min`. Pairs whose
    /// `1/(1−t)` already exceeds the threshold are skipped.
    pub fn windows(&self, c_thresh: f64) -> Vec<WindowCertificate> {
        let mut out: Vec<WindowCertificate> = self
            .entries
            .iter()
            .filter_map(|&(k1, j0, t)| window_from_tail(k1, j0, t, c_thresh).ok().flatten())
            .collect();
        out.sort_by(|a, b| {
            a.nu_min
                .total_cmp(&b.nu_min)
                .then(b.nu_max.total_cmp(&a.nu_max))
                .then(a.k1.cmp(&b.k1))
                .then(a.j0.cmp(&b.j0))
        });
        out
    }
}

/// The candidate table for the default constraint set, computed on first use.
pub fn default_candidates() -> &'static CandidateTable {
    static TABLE: OnceLock<CandidateTable> = OnceLock::new();
    TABLE.get_or_init(|| CandidateTable::compute(SearchConfig::default()).expect("default search config is valid"))
}

/// Greedy chain over the windows plus any gaps it had to jump.
#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub certificates: Vec<WindowCertificate>,
    pub gaps: Vec<(f64, f64)>,
}

/// Interval-cover greedy: start at the smallest `ν_min`, then repeatedly take
/// the window reaching furthest among those starting inside the current
/// reach (ties: smaller `k1`). Stops once the reach passes `nu_hi`.
pub fn greedy_chain(windows: &[WindowCertificate], nu_hi: f64) -> ChainOutcome {
    let mut certificates = Vec::new();
    let mut gaps = Vec::new();
    let Some(first) = windows.first() else {
        return ChainOutcome { certificates, gaps: vec![(0.0, nu_hi)] };
    };
    certificates.push(*first);
    let mut reach = first.nu_max;
    while reach < nu_hi {
        let best = windows
            .iter()
            .filter(|w| w.nu_min <= reach && w.nu_max > reach)
            .min_by(|a, b| b.nu_max.total_cmp(&a.nu_max).then(a.k1.cmp(&b.k1)).then(a.j0.cmp(&b.j0)));
        if let Some(w) = best {
            certificates.push(*w);
            reach = w.nu_max;
            continue;
        }
        // windows are sorted, so the first one past the reach starts the next run
        match windows.iter().find(|w| w.nu_min > reach) {
            Some(w) => {
                gaps.push((reach, w.nu_min));
                certificates.push(*w);
                reach = w.nu_max;
            }
            None => {
                gaps.push((reach, nu_hi));
                break;
            }
        }
    }
    ChainOutcome { certificates, gaps }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    pub c_thresh: f64,
    pub certificates: Vec<WindowCertificate>,
    pub covered: (f64, f64),
}

impl EnvelopeTable {
    pub fn len(&self) -> usize {
        self.certificates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.certificates.is_empty()
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.covered.0 <= lo && hi <= self.covered.1
    }

    /// The window with the smallest `max(C1, C2)` at `nu`, if any contains it.
    pub fn best_window(&self, nu: f64) -> Option<&WindowCertificate> {
        self.certificates
            .iter()
            .filter(|w| w.contains(nu))
            .min_by(|a, b| a.c1(nu).max(a.c2(nu)).total_cmp(&b.c1(nu).max(b.c2(nu))))
    }

    pub fn to_document(&self) -> EnvelopeDocument {
        EnvelopeDocument {
            c_thresh: self.c_thresh,
            covered: [self.covered.0, self.covered.1],
            certificates: self
                .certificates
                .iter()
                .map(|w| CertificateRecord { k1: w.k1, j0: w.j0, t: w.t, nu_min: w.nu_min, nu_max: w.nu_max })
                .collect(),
        }
    }

    pub fn from_document(doc: &EnvelopeDocument) -> Self {
        Self {
            c_thresh: doc.c_thresh,
            covered: (doc.covered[0], doc.covered[1]),
            certificates: doc
                .certificates
                .iter()
                .map(|r| WindowCertificate {
                    k1: r.k1,
                    j0: r.j0,
                    t: r.t,
                    nu_min: r.nu_min,
                    nu_max: r.nu_max,
                    c_thresh: doc.c_thresh,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: EnvelopeDocument = serde_json::from_str(s)?;
        Ok(Self::from_document(&doc))
    }

    /// One row per window, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,j0,t,nu_min,nu_max\n");
        for w in &self.certificates {
            s.push_str(&format!("{},{},{:.16e},{:.16e},{:.16e}\n", w.k1, w.j0, w.t, w.nu_min, w.nu_max));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub k1: usize,
    pub j0: usize,
    pub t: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDocument {
    pub c_thresh: f64,
    pub covered: [f64; 2],
    pub certificates: Vec<CertificateRecord>,
}

/// Chain over a candidate table, failing with the gap list when the chain
/// breaks before `nu_hi`.
pub fn search_with(candidates: &CandidateTable, c_thresh: f64, nu_hi: f64) -> Result<EnvelopeTable> {
    if !(c_thresh > 1.0) {
        return domain(format!("c_thresh = {c_thresh} must exceed 1"));
    }
    let windows = candidates.windows(c_thresh);
    let chain = greedy_chain(&windows, nu_hi);
    if !chain.gaps.is_empty() {
        return Err(Error::Coverage { gaps: chain.gaps });
    }
    let lo = chain.certificates.first().map_or(f64::NAN, |w| w.nu_min);
    let hi = chain.certificates.last().map_or(f64::NAN, |w| w.nu_max);
    Ok(EnvelopeTable { c_thresh, certificates: chain.certificates, covered: (lo, hi) })
}

/// Search over `k1 ≤ j0 ≤ 4k1 ≤ 400` up to `ν = 100`.
pub fn search(c_thresh: f64) -> Result<EnvelopeTable> {
    search_with(default_candidates(), c_thresh, LARGE_NU_LIMIT)
}

/// Smallest threshold in `[lo, hi]` whose chain reaches `ν = 100` without
/// gaps, to within `resolution`.
pub fn breakdown_threshold(candidates: &CandidateTable, lo: f64, hi: f64, resolution: f64) -> Result<f64> {
    if !(resolution > 0.0 && resolution <= 0.01) {
        return domain(format!("resolution {resolution} must lie in (0, 0.01]"));
    }
    let covers = |c: f64| search_with(candidates, c, LARGE_NU_LIMIT).is_ok();
    if !covers(hi) {
        return domain(format!("no coverage even at c_thresh = {hi}"));
    }
    if covers(lo) {
        return Ok(lo);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if covers(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateCase {
    SmallNu,
    Window,
    LargeNu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedConstants {
    pub nu: f64,
    pub c1: f64,
    pub c2: f64,
    pub case: CertificateCase,
    pub k1: usize,
    pub j0: usize,
    pub t: f64,
}

/// Certified `C1(ν)`, `C2(ν)`: the `(1, 1)` pair for `ν ≤ 1/2`, the best
/// covering window for `1/2 < ν ≤ 100`, and the large-ν pair beyond.
pub fn global_c1_c2(nu: f64, table: &EnvelopeTable) -> Result<CertifiedConstants> {
    if !(nu > 0.0) || !nu.is_finite() {
        return domain(format!("nu = {nu} must be positive and finite"));
    }
    if nu <= SMALL_NU_LIMIT {
        let t = small_nu_tail();
        return Ok(CertifiedConstants {
            nu,
            c1: c1_value(1, t, nu),
            c2: c2_value(1, t, nu),
            case: CertificateCase::SmallNu,
            k1: 1,
            j0: 1,
            t,
        });
    }
    if nu <= LARGE_NU_LIMIT {
        if let Some(w) = table.best_window(nu) {
            return Ok(CertifiedConstants {
                nu,
                c1: w.c1(nu),
                c2: w.c2(nu),
                case: CertificateCase::Window,
                k1: w.k1,
                j0: w.j0,
                t: w.t,
            });
        }
    }
    if nu < LARGE_NU_LIMIT {
        return Err(Error::NotCovered(nu));
    }
    large_nu_constants(nu)
}

/// `t(1, 1) = √(1 − 8/π²)`.
pub fn small_nu_tail() -> f64 {
    (1.0 - 8.0 / (std::f64::consts::PI.powi(2))).sqrt()
}

/// The large-ν certificate: `k1 = ⌊ν/√3⌋`, `j0 = 3k1`, `t` from the
/// Frobenius bound.
pub fn large_nu_constants(nu: f64) -> Result<CertifiedConstants> {
    if nu < LARGE_NU_LIMIT {
        return domain(format!("large-nu certificate needs nu >= {LARGE_NU_LIMIT}, got {nu}"));
    }
    let k1 = (nu / 3f64.sqrt()).floor() as usize;
    let j0 = 3 * k1;
    let t = frobenius_tail_bound(k1, j0)?;
    let c1 = c1_value(j0, t, nu);
    let c2 = c2_value(k1, t, nu);
    debug_assert!(c1 <= LARGE_NU_WORST_CASE && c2 <= LARGE_NU_WORST_CASE);
    Ok(CertifiedConstants { nu, c1, c2, case: CertificateCase::LargeNu, k1, j0, t })
}

/// Envelope constants `C1 = max(9, (9/4)ν⁻²)`, `C2 = 9`.
pub fn envelope_constants(nu: f64) -> (f64, f64) {
    (f64::max(9.0, 2.25 / (nu * nu)), 9.0)
}

/// Evaluated sides of the strip inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `Σ|b|² − Σ_{k≤K}|a_k|²`, the mass of `a` beyond the computed rows.
    pub tail_mass: f64,
}

impl StripCheck {
    pub fn residual(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `a = E b` for rows `0..=k_max`.
pub fn apply_operator(b: &[f64], k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| {
            b.iter()
                .enumerate()
                .filter(|(c, _)| (c + 1 + k) % 2 == 1)
                .map(|(c, &bj)| coeff(k, c + 1) * bj)
                .sum()
        })
        .collect()
}

fn strip_check(b: &[f64], nu: f64, c1: f64, c2: f64, include_mean_row: bool) -> Result<StripCheck> {
    if !(nu > 0.0) {
        return domain(format!("nu = {nu} must be positive"));
    }
    if b.is_empty() {
        return domain("b must have at least one entry");
    }
    let k_max = 2 * b.len();
    let a = apply_operator(b, k_max);
    let nu2 = nu * nu;
    let b_norm_sq: f64 = b.iter().map(|x| x * x).sum();
    let a_norm_sq: f64 = a.iter().map(|x| x * x).sum();
    let tail_mass = (b_norm_sq - a_norm_sq).max(0.0);

    let first_row = if include_mean_row { 0 } else { 1 };
    let mut lhs: f64 = a
        .iter()
        .enumerate()
        .skip(first_row)
        .map(|(k, ak)| nu2 / (nu2 + (k * k) as f64) * ak * ak)
        .sum();
    // rows past k_max: the weight is at most ν²/(ν²+(K+1)²); charge it all to the left
    let kk = (k_max + 1) as f64;
    lhs += tail_mass * nu2 / (nu2 + kk * kk);

    let low: f64 = b
        .iter()
        .enumerate()
        .map(|(c, bj)| {
            let j = (c + 1) as f64;
            nu2 / (nu2 + j * j) * bj * bj
        })
        .sum();
    let high: f64 = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, ak)| {
            let k2 = (k * k) as f64;
            k2 / (nu2 + k2) * ak * ak
        })
        .sum();
    Ok(StripCheck { lhs, rhs: c1 * low + (c2 - 1.0) * high, tail_mass })
}

/// Sides of the strip inequality for a sine-coefficient vector `b`
/// (`b[0]` is mode `j = 1`). Rows of `a` are computed up to `k = 2·len(b)`
/// and the remaining mass is added to the left side.
pub fn lemma32_check(b: &[f64], nu: f64, c1: f64, c2: f64) -> Result<StripCheck> {
    strip_check(b, nu, c1, c2, true)
}

/// The same inequality with the `k = 0` term removed from the left side.
pub fn lemma32_check_without_mean(b: &[f64], nu: f64, c1: f64, c2: f64) -> Result<StripCheck> {
    strip_check(b, nu, c1, c2, false)
}

/// Reference rows `(k1, j0, t, ν_min, ν_max)` at `c_thresh = 8.9`.
pub const REFERENCE_TABLE: [(usize, usize, f64, f64, f64); 7] = [
    (1, 1, 0.43524, 0.498, 2.007),
    (3, 3, 0.57904, 1.810, 4.972),
    (6, 8, 0.54892, 4.608, 10.42),
    (13, 17, 0.58222, 10.31, 21.43),
    (25, 37, 0.54766, 21.27, 43.49),
    (50, 76, 0.54321, 43.41, 87.54),
    (99, 155, 0.53535, 87.54, 175.3),
];
pub const REFERENCE_C_THRESH: f64 = 8.9;
pub const REFERENCE_T_TOL: f64 = 5e-6;
pub const REFERENCE_NU_REL_TOL: f64 = 1e-3;

/// Differences between a table and the reference rows; empty when every row
/// matches within the printed precision.
pub fn compare_reference(table: &EnvelopeTable) -> Vec<String> {
    let mut issues = Vec::new();
    if table.len() != REFERENCE_TABLE.len() {
        issues.push(format!("expected {} rows, got {}", REFERENCE_TABLE.len(), table.len()));
    }
    for (i, (w, &(k1, j0, t, lo, hi))) in table.certificates.iter().zip(REFERENCE_TABLE.iter()).enumerate() {
        if (w.k1, w.j0) != (k1, j0) {
            issues.push(format!("row {i}: (k1, j0) = ({}, {}), expected ({k1}, {j0})", w.k1, w.j0));
        }
        if (w.t - t).abs() > REFERENCE_T_TOL {
            issues.push(format!("row {i}: t = {:.7}, expected {t}", w.t));
        }
        if ((w.nu_min - lo) / lo).abs() > REFERENCE_NU_REL_TOL {
            issues.push(format!("row {i}: nu_min = {:.6}, expected {lo}", w.nu_min));
        }
        if ((w.nu_max - hi) / hi).abs() > REFERENCE_NU_REL_TOL {
            issues.push(format!("row {i}: nu_max = {:.6}, expected {hi}", w.nu_max));
        }
    }
    issues
}
