//! The unitary map sending Fourier sine coefficients on `(0, H)` to Fourier
//! cosine coefficients, its finite leading blocks and the norm of the
//! discarded tail.
//!
//! Rows are indexed by the cosine mode `k >= 0`, columns by the sine mode
//! `j >= 1`. Every public function that takes a row count uses `k1`, the
//! number of rows `0..k1`, so `k1 = 1` is the single `k = 0` row.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};

/// Default truncation column for brute-force tail sums.
pub const DEFAULT_TAIL_COLUMNS: usize = 100_000;

/// Stateless generator for the entries of the sine-to-cosine operator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SineCosineOperator;

impl SineCosineOperator {
    pub fn entry(&self, k: usize, j: usize) -> Result<f64> {
        entry(k, j)
    }

    pub fn block(&self, k1: usize, j0: usize) -> Result<OperatorBlock> {
        block(k1, j0)
    }
}

/// Entry `(k, j)`: `2√2/(jπ)` on the `k = 0` row for odd `j`,
/// `4j/((j²−k²)π)` when `j − k` is odd, zero otherwise.
pub fn entry(k: usize, j: usize) -> Result<f64> {
    if j < 1 {
        return domain(format!("column index j = {j} must be >= 1"));
    }
    Ok(coeff(k, j))
}

#[inline]
pub(crate) fn coeff(k: usize, j: usize) -> f64 {
    debug_assert!(j >= 1);
    if (j + k) % 2 == 0 {
        return 0.0;
    }
    if k == 0 {
        2.0 * SQRT_2 / (j as f64 * PI)
    } else {
        let (jf, kf) = (j as f64, k as f64);
        4.0 * jf / ((jf - kf) * (jf + kf) * PI)
    }
}

/// Dense leading block: rows `0..k1`, columns `1..=j0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    k1: usize,
    j0: usize,
    entries: DMatrix<f64>,
}

impl OperatorBlock {
    pub fn rows(&self) -> usize {
        self.k1
    }

    pub fn cols(&self) -> usize {
        self.j0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Entry at row `k` (0-based) and sine mode `j` (1-based).
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.entries[(k, j - 1)]
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self
            .entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Smallest of the `min(k1, j0)` singular values.
    pub fn sigma_min(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    /// `y = S x` for a real vector supported on columns `1..=j0`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.j0, "vector length must equal column count");
        (0..self.k1)
            .map(|k| (0..self.j0).map(|c| self.entries[(k, c)] * x[c]).sum())
            .collect()
    }
}

pub fn block(k1: usize, j0: usize) -> Result<OperatorBlock> {
    if k1 < 1 || j0 < 1 {
        return domain(format!("block dimensions must be positive, got {k1}x{j0}"));
    }
    let entries = DMatrix::from_fn(k1, j0, |k, c| coeff(k, c + 1));
    Ok(OperatorBlock { k1, j0, entries })
}

/// `t = ‖T‖ = √(1 − σ_min(S)²)` where `S = block(k1, j0)` and `T` holds the
/// same rows restricted to columns `j > j0`.
///
/// `σ_min²` is the smallest eigenvalue of the Gram matrix `S Sᵀ`. Since
/// `σ_min` stays well away from zero for admissible shapes this loses
/// nothing against a full SVD.
pub fn tail_norm(k1: usize, j0: usize) -> Result<f64> {
    check_shape(k1, j0)?;
    let mut gram = DMatrix::<f64>::zeros(k1, k1);
    let mut col = vec![0.0; k1];
    for j in 1..=j0 {
        add_column(&mut gram, &mut col, j);
    }
    gram_tail(&gram)
}

/// Tail norms for a fixed row count and every column count in
/// `k1..=j0_max`, sharing one incrementally updated Gram matrix.
pub fn tail_norms_for_rows(k1: usize, j0_max: usize) -> Result<Vec<(usize, f64)>> {
    check_shape(k1, j0_max)?;
    let mut gram = DMatrix::<f64>::zeros(k1, k1);
    let mut col = vec![0.0; k1];
    let mut out = Vec::with_capacity(j0_max + 1 - k1);
    for j in 1..=j0_max {
        add_column(&mut gram, &mut col, j);
        if j >= k1 {
            out.push((j, gram_tail(&gram)?));
        }
    }
    Ok(out)
}

fn check_shape(k1: usize, j0: usize) -> Result<()> {
    if k1 < 1 {
        return domain("row count k1 must be >= 1");
    }
    if j0 < k1 {
        return Err(Error::Shape { rows: k1, cols: j0 });
    }
    Ok(())
}

fn add_column(gram: &mut DMatrix<f64>, col: &mut [f64], j: usize) {
    let k1 = col.len();
    for (k, c) in col.iter_mut().enumerate() {
        *c = coeff(k, j);
    }
    // only entries with matching parity are nonzero
    for a in 0..k1 {
        if col[a] == 0.0 {
            continue;
        }
        for b in (a..k1).step_by(2) {
            let v = col[a] * col[b];
            gram[(a, b)] += v;
            if a != b {
                gram[(b, a)] += v;
            }
        }
    }
}

fn gram_tail(gram: &DMatrix<f64>) -> Result<f64> {
    let eig = gram.clone().symmetric_eigenvalues();
    let lmin = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if !lmin.is_finite() {
        return Err(Error::Eigen("non-finite eigenvalue of the Gram matrix".into()));
    }
    Ok((1.0 - lmin).max(0.0).sqrt())
}

/// Integral majorant of `‖T‖_F` with the cutoff `κ = (j0−1)/k0`, `k0 = k1−1`:
/// `t² ≤ 4/(π²(j0−1)) + (4/π²)[κ/(κ²−1) + ½ log((κ+1)/(κ−1))]`.
pub fn frobenius_tail_integral_bound(k1: usize, j0: usize) -> Result<f64> {
    if k1 < 1 || j0 < 2 {
        return domain(format!("need k1 >= 1 and j0 >= 2, got ({k1}, {j0})"));
    }
    if k1 == 1 {
        return Ok(first_row_tail(j0).sqrt());
    }
    let kappa = (j0 - 1) as f64 / (k1 - 1) as f64;
    if kappa <= 1.0 {
        return domain(format!("kappa = {kappa} must exceed 1"));
    }
    Ok((first_row_tail(j0) + kappa_term(kappa)).sqrt())
}

/// The same chain with `κ` replaced by its lower bound `j0/k1`, which is the
/// form used to certify the large-ν regime (`j0 = 3k1` gives a bracket
/// independent of `k1`). Never smaller than [`frobenius_tail_integral_bound`].
pub fn frobenius_tail_bound(k1: usize, j0: usize) -> Result<f64> {
    if k1 < 1 || j0 < 2 {
        return domain(format!("need k1 >= 1 and j0 >= 2, got ({k1}, {j0})"));
    }
    if k1 == 1 {
        return Ok(first_row_tail(j0).sqrt());
    }
    let kappa = j0 as f64 / k1 as f64;
    if kappa <= 1.0 {
        return domain(format!("j0/k1 = {kappa} must exceed 1"));
    }
    Ok((first_row_tail(j0) + kappa_term(kappa)).sqrt())
}

fn first_row_tail(j0: usize) -> f64 {
    4.0 / (PI * PI * (j0 - 1) as f64)
}

fn kappa_term(kappa: f64) -> f64 {
    4.0 / (PI * PI) * (kappa / (kappa * kappa - 1.0) + 0.5 * ((kappa + 1.0) / (kappa - 1.0)).ln())
}

/// `Σ_{k<k1} Σ_{j0<j≤j_max} E_kj²`, the Frobenius norm of the tail block
/// truncated at column `j_max`.
pub fn truncated_tail_frobenius_sq(k1: usize, j0: usize, j_max: usize) -> f64 {
    (0..k1)
        .map(|k| {
            let mut s = 0.0;
            // skip the zeros: j runs over the parity opposite to k
            let start = if (j0 + 1 + k) % 2 == 1 { j0 + 1 } else { j0 + 2 };
            let mut j = start;
            while j <= j_max {
                let e = coeff(k, j);
                s += e * e;
                j += 2;
            }
            s
        })
        .sum()
}

/// `Σ_{j≤j_max} E_kj²`.
pub fn row_norm_sq(k: usize, j_max: usize) -> f64 {
    (1..=j_max).map(|j| coeff(k, j).powi(2)).sum()
}

/// `Σ_{k≤k_max} E_kj²`.
pub fn column_norm_sq(j: usize, k_max: usize) -> f64 {
    (0..=k_max).map(|k| coeff(k, j).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entries_match_closed_forms() {
        assert_abs_diff_eq!(entry(0, 1).unwrap(), 2.0 * SQRT_2 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(entry(0, 1).unwrap(), 0.9003163, epsilon = 1e-7);
        assert_abs_diff_eq!(entry(1, 2).unwrap(), 8.0 / (3.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(entry(1, 2).unwrap(), 0.8488264, epsilon = 1e-7);
        assert_eq!(entry(2, 4).unwrap(), 0.0);
        assert_eq!(entry(0, 2).unwrap(), 0.0);
        assert!(matches!(entry(3, 0), Err(Error::Domain(_))));
    }

    // E_kj as the integral ∫₀¹ c_k(η) √2 sin(πjη) dη with c_0 = 1,
    // c_k = √2 cos(πkη), by composite Simpson.
    fn entry_by_quadrature(k: usize, j: usize) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |x: f64| {
            let c = if k == 0 { 1.0 } else { SQRT_2 * (PI * k as f64 * x).cos() };
            c * SQRT_2 * (PI * j as f64 * x).sin()
        };
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn entries_agree_with_defining_integrals() {
        for k in 0..6 {
            for j in 1..7 {
                assert_abs_diff_eq!(coeff(k, j), entry_by_quadrature(k, j), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn small_blocks() {
        let b = block(1, 1).unwrap();
        assert_abs_diff_eq!(b.get(0, 1), 2.0 * SQRT_2 / PI);
        let b = block(2, 2).unwrap();
        assert_abs_diff_eq!(b.get(0, 1), 2.0 * SQRT_2 / PI);
        assert_eq!(b.get(0, 2), 0.0);
        assert_eq!(b.get(1, 1), 0.0);
        assert_abs_diff_eq!(b.get(1, 2), 8.0 / (3.0 * PI));
        let b = block(3, 3).unwrap();
        for k in 0..3 {
            for j in 1..=3 {
                assert_eq!(b.get(k, j) == 0.0, (k + j) % 2 == 0, "({k},{j})");
            }
        }
        assert!(block(0, 3).is_err());
    }

    #[test]
    fn tail_norm_table_values() {
        assert_abs_diff_eq!(tail_norm(1, 1).unwrap(), (1.0 - 8.0 / (PI * PI)).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(tail_norm(1, 1).unwrap(), 0.43524, epsilon = 5e-6);
        assert_abs_diff_eq!(tail_norm(3, 3).unwrap(), 0.57904, epsilon = 5e-6);
        assert_abs_diff_eq!(tail_norm(6, 8).unwrap(), 0.54892, epsilon = 5e-6);
    }

    #[test]
    fn tail_norm_rejects_tall_blocks() {
        assert!(matches!(tail_norm(3, 2), Err(Error::Shape { rows: 3, cols: 2 })));
    }

    #[test]
    fn gram_route_matches_svd_route() {
        for &(k1, j0) in &[(1, 1), (2, 5), (7, 9), (13, 17), (20, 61)] {
            let svd_t = (1.0 - block(k1, j0).unwrap().sigma_min().powi(2)).sqrt();
            assert_abs_diff_eq!(tail_norm(k1, j0).unwrap(), svd_t, epsilon = 1e-12);
        }
    }

    #[test]
    fn incremental_tail_norms_match_direct() {
        let rows = tail_norms_for_rows(5, 20).unwrap();
        assert_eq!(rows.first().unwrap().0, 5);
        assert_eq!(rows.last().unwrap().0, 20);
        for (j0, t) in rows {
            assert_abs_diff_eq!(t, tail_norm(5, j0).unwrap(), epsilon = 1e-13);
        }
    }

    #[test]
    fn frobenius_bounds() {
        let b = frobenius_tail_bound(57, 171).unwrap();
        assert!(b <= 0.54298);
        assert_abs_diff_eq!(b, 0.54298, epsilon = 1e-5);
        let sharp = frobenius_tail_integral_bound(57, 171).unwrap();
        assert!(sharp <= b);
        assert!(frobenius_tail_bound(100, 300).unwrap() <= b);
        assert!(frobenius_tail_integral_bound(3, 3).is_err());
        assert!(frobenius_tail_bound(3, 3).is_err());
    }

    #[test]
    fn frobenius_majorizes_operator_norm() {
        for &(k1, j0) in &[(4, 13), (10, 30), (20, 60)] {
            assert!(tail_norm(k1, j0).unwrap() <= frobenius_tail_integral_bound(k1, j0).unwrap());
        }
    }

    #[test]
    fn unit_rows_and_columns() {
        for j in 1..=50 {
            let s = column_norm_sq(j, 10_000);
            assert!(s < 1.0 && 1.0 - s < 1e-3, "column {j}: {s}");
        }
        for k in 0..=50 {
            let s = row_norm_sq(k, 10_000);
            assert!(s < 1.0 && 1.0 - s < 1e-3, "row {k}: {s}");
        }
    }
}
