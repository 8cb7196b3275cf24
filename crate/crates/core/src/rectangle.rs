//! Truncated Fourier fields on the x-periodic rectangle `(0, L) × (0, H)`.
//!
//! A field is `q = Σ b_nj e^{2πinx/L} √2 sin(πjy/H)` with `|n| ≤ N`,
//! `1 ≤ j ≤ J`. The cosine coefficients `a_nk` (basis `1`, `√2 cos(πky/H)`)
//! are `a_n = E b_n`, kept for `k ≤ K = 2J`. With this normalization
//! `‖q‖₀² = LH Σ|b|²`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fourier_ops::coeff;
use crate::quadrature::gauss_on;

use std::f64::consts::PI;

/// Relative `a`-tail mass above which a field counts as under-resolved.
pub const TRUNCATION_WARN: f64 = 1e-8;
/// Tolerance on `|a00|` relative to `‖b‖` for a field to count as mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

fn operator_matrix(k_max: usize, j_max: usize) -> Arc<DMatrix<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DMatrix<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("operator cache poisoned");
    guard
        .entry((k_max, j_max))
        .or_insert_with(|| Arc::new(DMatrix::from_fn(k_max + 1, j_max, |k, c| coeff(k, c + 1))))
        .clone()
}

/// Unit vector along row 0 of the truncated operator.
fn mean_direction(j_max: usize) -> DVector<f64> {
    let e = DVector::from_fn(j_max, |c, _| coeff(0, c + 1));
    let n = e.norm();
    e / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectangleField {
    l: f64,
    h: f64,
    n_max: usize,
    j_max: usize,
    k_max: usize,
    b: Vec<Complex64>,
    a: Vec<Complex64>,
}

impl RectangleField {
    /// Field from row-major coefficients (`n = −N..=N`, then `j = 1..=J`), as given.
    pub fn new(l: f64, h: f64, n_max: usize, j_max: usize, b: Vec<Complex64>) -> Result<Self> {
        if !(l > 0.0 && h > 0.0 && l.is_finite() && h.is_finite()) {
            return domain(format!("L = {l}, H = {h} must be positive and finite"));
        }
        if j_max < 1 {
            return domain("J must be at least 1");
        }
        let rows = 2 * n_max + 1;
        if b.len() != rows * j_max {
            return domain(format!("expected {} coefficients for N = {n_max}, J = {j_max}, got {}", rows * j_max, b.len()));
        }
        if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("coefficients must be finite");
        }
        let k_max = 2 * j_max;
        let mut field = Self { l, h, n_max, j_max, k_max, b, a: Vec::new() };
        field.refresh_a();
        Ok(field)
    }

    /// Field projected onto mean zero by moving `b_0` along the normalized row 0 of `E`.
    pub fn mean_zero(l: f64, h: f64, n_max: usize, j_max: usize, b: Vec<Complex64>) -> Result<Self> {
        Ok(Self::new(l, h, n_max, j_max, b)?.projected())
    }

    pub fn projected(mut self) -> Self {
        let e = mean_direction(self.j_max);
        let start = self.n_max * self.j_max;
        let row = &mut self.b[start..start + self.j_max];
        let dot: Complex64 = row.iter().zip(e.iter()).map(|(z, &w)| z * w).sum();
        for (z, &w) in row.iter_mut().zip(e.iter()) {
            *z -= dot * w;
        }
        self.refresh_a();
        self
    }

    fn refresh_a(&mut self) {
        let e = operator_matrix(self.k_max, self.j_max);
        let kk = self.k_max + 1;
        let mut a = vec![Complex64::new(0.0, 0.0); (2 * self.n_max + 1) * kk];
        for (row_b, row_a) in self.b.chunks(self.j_max).zip(a.chunks_mut(kk)) {
            for (k, ak) in row_a.iter_mut().enumerate() {
                *ak = row_b.iter().enumerate().map(|(c, z)| z * e[(k, c)]).sum();
            }
        }
        self.a = a;
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `b_nj`, `j ≥ 1`.
    pub fn b(&self, n: i64, j: usize) -> Complex64 {
        self.b[self.row(n) * self.j_max + j - 1]
    }

    /// `a_nk`, `k ≥ 0`.
    pub fn a(&self, n: i64, k: usize) -> Complex64 {
        self.a[self.row(n) * (self.k_max + 1) + k]
    }

    pub fn b_row(&self, n: i64) -> &[Complex64] {
        let r = self.row(n);
        &self.b[r * self.j_max..(r + 1) * self.j_max]
    }

    pub fn a_row(&self, n: i64) -> &[Complex64] {
        let r = self.row(n);
        let kk = self.k_max + 1;
        &self.a[r * kk..(r + 1) * kk]
    }

    fn row(&self, n: i64) -> usize {
        assert!(n.unsigned_abs() as usize <= self.n_max, "strip {n} outside |n| <= {}", self.n_max);
        (n + self.n_max as i64) as usize
    }

    pub fn strips(&self) -> impl Iterator<Item = i64> {
        let n = self.n_max as i64;
        -n..=n
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.b
    }

    /// `|a00|`, the mean of the field divided by `LH`.
    pub fn mean(&self) -> f64 {
        self.a(0, 0).norm()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean() <= MEAN_ZERO_TOL * self.b_norm_sq().sqrt().max(1.0)
    }

    fn require_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NotMeanZero(self.mean()))
        }
    }

    fn b_norm_sq(&self) -> f64 {
        self.b.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `‖q‖₀²` from the sine coefficients.
    pub fn l2_sq(&self) -> f64 {
        self.l * self.h * self.b_norm_sq()
    }

    /// `‖q‖₀²` from the cosine coefficients; short of `l2_sq` by the mass past `K`.
    pub fn l2_sq_from_cosine(&self) -> f64 {
        self.l * self.h * self.a.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Largest relative per-strip mass of `a` lost past row `K`.
    pub fn truncation_residual(&self) -> f64 {
        self.strips()
            .map(|n| {
                let b: f64 = self.b_row(n).iter().map(|z| z.norm_sqr()).sum();
                let a: f64 = self.a_row(n).iter().map(|z| z.norm_sqr()).sum();
                if b > 0.0 { ((b - a) / b).max(0.0) } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// `‖u_y‖₀²` for the sine representation.
    pub fn dy_l2_sq(&self) -> f64 {
        let lh = self.l * self.h;
        self.strips()
            .flat_map(|n| self.b_row(n).iter().enumerate())
            .map(|(c, z)| {
                let mu = (PI * (c + 1) as f64 / self.h).powi(2);
                lh * mu * z.norm_sqr()
            })
            .sum()
    }

    /// `‖∇u‖₀²` for the sine representation.
    pub fn grad_l2_sq(&self) -> f64 {
        let lh = self.l * self.h;
        self.strips()
            .map(|n| {
                let lam = strip_lambda(self.l, n);
                self.b_row(n)
                    .iter()
                    .enumerate()
                    .map(|(c, z)| (lam + (PI * (c + 1) as f64 / self.h).powi(2)) * z.norm_sqr())
                    .sum::<f64>()
                    * lh
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let b = self.b.iter().map(|z| z * s).collect();
        let mut out = Self { b, a: Vec::new(), ..*self };
        out.refresh_a();
        out
    }

    pub fn to_document(&self) -> FieldDocument {
        FieldDocument {
            l: self.l,
            h: self.h,
            n: self.n_max,
            j: self.j_max,
            re: self.b.iter().map(|z| z.re).collect(),
            im: self.b.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_document(doc: &FieldDocument) -> Result<Self> {
        if doc.re.len() != doc.im.len() {
            return domain("re and im arrays differ in length");
        }
        let b = doc.re.iter().zip(&doc.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Self::new(doc.l, doc.h, doc.n, doc.j, b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    /// Reads the coefficients as stored; call [`RectangleField::projected`] for a mean-zero field.
    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn strip_lambda(l: f64, n: i64) -> f64 {
    (2.0 * PI * n as f64 / l).powi(2)
}

/// Per-strip weights `Dx(j) = λ/(λ+μ_j)` and `Dy(k) = μ_k/(λ+μ_k)`,
/// `λ = (2πn/L)²`, `μ_k = (πk/H)²`. At `n = 0, k = 0` the weights are
/// `Dx = 1`, `Dy = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripQuadraticForm {
    pub n: i64,
    pub lambda: f64,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    h: f64,
}

/// `A1 + A2 = Σ|a|²`, `B1 + B2 = Σ|b|²` for one strip, all times `LH`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSums {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl StripQuadraticForm {
    /// Weights indexed by `k = 0..=k_max` (`dx[k]`, `dy[k]`).
    pub fn new(l: f64, h: f64, n: i64, k_max: usize) -> Self {
        let lambda = strip_lambda(l, n);
        let (dx, dy) = (0..=k_max)
            .map(|k| {
                let mu = (PI * k as f64 / h).powi(2);
                if lambda + mu == 0.0 { (1.0, 0.0) } else { (lambda / (lambda + mu), mu / (lambda + mu)) }
            })
            .unzip();
        Self { n, lambda, dx, dy, h }
    }

    pub fn mu(&self, k: usize) -> f64 {
        (PI * k as f64 / self.h).powi(2)
    }

    pub fn sums(&self, b: &[Complex64], a: &[Complex64], lh: f64) -> StripSums {
        let mut s = StripSums { a1: 0.0, a2: 0.0, b1: 0.0, b2: 0.0 };
        for (k, z) in a.iter().enumerate() {
            s.a1 += self.dx[k] * z.norm_sqr();
            s.a2 += self.dy[k] * z.norm_sqr();
        }
        for (c, z) in b.iter().enumerate() {
            s.b1 += self.dx[c + 1] * z.norm_sqr();
            s.b2 += self.dy[c + 1] * z.norm_sqr();
        }
        StripSums { a1: lh * s.a1, a2: lh * s.a2, b1: lh * s.b1, b2: lh * s.b2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualNorms {
    pub dx: f64,
    pub dy: f64,
    pub qm1: f64,
    /// Largest relative per-strip `a` mass past row `K`; above
    /// [`TRUNCATION_WARN`] the `dy` value is under-resolved.
    pub truncation: f64,
}

impl DualNorms {
    pub fn truncation_warning(&self) -> bool {
        self.truncation > TRUNCATION_WARN
    }
}

fn dual_norms_unchecked(q: &RectangleField) -> DualNorms {
    let lh = q.l * q.h;
    let (mut dx2, mut dy2, mut qm2) = (0.0, 0.0, 0.0);
    for n in q.strips() {
        let form = StripQuadraticForm::new(q.l, q.h, n, q.k_max);
        let s = form.sums(q.b_row(n), q.a_row(n), lh);
        dx2 += s.b1;
        dy2 += s.a2;
        qm2 += q
            .b_row(n)
            .iter()
            .enumerate()
            .map(|(c, z)| lh * z.norm_sqr() / (form.lambda + form.mu(c + 1)))
            .sum::<f64>();
    }
    DualNorms { dx: dx2.sqrt(), dy: dy2.sqrt(), qm1: qm2.sqrt(), truncation: q.truncation_residual() }
}

/// `‖∂x q‖₋₁`, `‖∂y q‖₋₁`, `‖q‖₋₁`, exact in the truncated space.
pub fn dual_norms(q: &RectangleField) -> Result<DualNorms> {
    q.require_mean_zero()?;
    Ok(dual_norms_unchecked(q))
}

/// `C1 = max(9, (9/16)L²/H²)`, `C2 = 9`.
pub fn rectangle_constants(l: f64, h: f64) -> (f64, f64) {
    (f64::max(9.0, 9.0 / 16.0 * (l / h).powi(2)), 9.0)
}

/// The certified `β = (1/3)·min(1, 4H/L)`.
pub fn certified_beta(l: f64, h: f64) -> f64 {
    f64::min(1.0, 4.0 * h / l) / 3.0
}

/// `C1·dx² + C2·dy² − ‖q‖₀²`.
pub fn check_thm31(q: &RectangleField) -> Result<f64> {
    let d = dual_norms(q)?;
    let (c1, c2) = rectangle_constants(q.l, q.h);
    Ok(c1 * d.dx * d.dx + c2 * d.dy * d.dy - q.l2_sq())
}

/// `(L²/4π²)·dx² + (H²/π²)·dy² − ‖q‖₋₁²`.
pub fn check_cor32(q: &RectangleField) -> Result<f64> {
    let d = dual_norms(q)?;
    Ok((q.l / (2.0 * PI)).powi(2) * d.dx * d.dx + (q.h / PI).powi(2) * d.dy * d.dy - d.qm1 * d.qm1)
}

/// A trigonometric polynomial `ζ(x) = Σ ζ̂_m e^{2πimx/L}` on the period.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub l: f64,
    pub coeffs: Vec<(i64, Complex64)>,
}

impl TrigPolynomial {
    pub fn constant(l: f64, c: f64) -> Self {
        Self { l, coeffs: vec![(0, Complex64::new(c, 0.0))] }
    }

    /// `cos(2πmx/L)`.
    pub fn cosine(l: f64, m: i64) -> Self {
        let half = Complex64::new(0.5, 0.0);
        if m == 0 {
            return Self::constant(l, 1.0);
        }
        Self { l, coeffs: vec![(m, half), (-m, half)] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|(m, _)| m.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(m, c)| c * Complex64::from_polar(1.0, 2.0 * PI * m as f64 * x / self.l))
            .sum()
    }

    /// `sup|ζ|` sampled on `max(4096, 64·degree)` equispaced points.
    pub fn sup_norm(&self) -> f64 {
        let n = 4096.max(64 * self.degree());
        (0..n).map(|i| self.eval(self.l * i as f64 / n as f64).norm()).fold(0.0, f64::max)
    }
}

/// Largest strip index a product field may reach.
pub const MAX_PRODUCT_STRIPS: usize = 1 << 16;

/// `9M²(dx² + dy²) − ‖∂y(ζq)‖₋₁²`, with the cosine coefficients of `ζq`
/// formed by convolution over `n` and `M = sup|ζ|`.
pub fn check_cor33(q: &RectangleField, zeta: &TrigPolynomial) -> Result<f64> {
    let d = dual_norms(q)?;
    if (zeta.l - q.l).abs() > 1e-12 * q.l {
        return domain(format!("multiplier period {} differs from field period {}", zeta.l, q.l));
    }
    let deg = zeta.degree();
    let n_out = q.n_max.checked_add(deg).filter(|&n| n <= MAX_PRODUCT_STRIPS).ok_or_else(|| {
        Error::IndexOverflow(format!("product strips |n| <= {} + {deg} exceed {MAX_PRODUCT_STRIPS}", q.n_max))
    })?;
    let lh = q.l * q.h;
    let kk = q.k_max + 1;
    let mut lhs = 0.0;
    let n_out = n_out as i64;
    let n_in = q.n_max as i64;
    for n in -n_out..=n_out {
        let form = StripQuadraticForm::new(q.l, q.h, n, q.k_max);
        let mut row = vec![Complex64::new(0.0, 0.0); kk];
        for &(m, zc) in &zeta.coeffs {
            let src = n - m;
            if src.abs() > n_in {
                continue;
            }
            for (acc, a) in row.iter_mut().zip(q.a_row(src)) {
                *acc += zc * a;
            }
        }
        lhs += (1..kk).map(|k| form.dy[k] * row[k].norm_sqr()).sum::<f64>() * lh;
    }
    let m = zeta.sup_norm();
    Ok(9.0 * m * m * (d.dx * d.dx + d.dy * d.dy) - lhs)
}

/// `(H²/π²)·‖u_y‖₀² − ‖u‖₀²` for a sine-represented `u`.
pub fn pf_rectangle(u: &RectangleField) -> f64 {
    (u.h / PI).powi(2) * u.dy_l2_sq() - u.l2_sq()
}

/// Result of the truncated inf-sup eigen-oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfSupReport {
    pub l: f64,
    pub h: f64,
    pub n: usize,
    pub j: usize,
    pub beta: f64,
    /// Same computation with `2J` sine modes.
    pub beta_refined: f64,
    /// Smallest eigenvalue per strip `n = 0..=N` at `J`.
    pub strip_minima: Vec<f64>,
    /// Relative change of `min λ` from `J` to `2J`.
    pub drift: f64,
    pub certified: f64,
}

impl InfSupReport {
    pub fn under_resolved(&self) -> bool {
        self.drift > 0.01
    }

    pub fn dominates_certified(&self) -> bool {
        self.beta >= self.certified - 1e-10
    }
}

/// Rows `0..=K` of `E` restricted to columns `1..=J` (`K = 2J`).
fn strip_matrix(l: f64, h: f64, n: i64, j_max: usize) -> DMatrix<f64> {
    let k_max = 2 * j_max;
    let e = operator_matrix(k_max, j_max);
    let form = StripQuadraticForm::new(l, h, n, k_max);
    // Σ_k Dy_k E_kᵀE_k = I − Σ_k (1 − Dy_k) E_kᵀE_k over all rows; cutting the
    // subtracted sum at K can only raise the form.
    let mut q = DMatrix::<f64>::identity(j_max, j_max);
    let w = DVector::from_fn(k_max + 1, |k, _| 1.0 - form.dy[k]);
    let weighted = DMatrix::from_fn(k_max + 1, j_max, |k, c| w[k] * e[(k, c)]);
    q -= e.transpose() * weighted;
    for c in 0..j_max {
        q[(c, c)] += form.dx[c + 1];
    }
    q
}

fn smallest_eigenvalue(m: DMatrix<f64>) -> Result<f64> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, 1e-14, 10_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence on a {dim}x{dim} strip form")))?;
    eig.eigenvalues.iter().copied().reduce(f64::min).ok_or_else(|| Error::Eigen("empty strip form".into()))
}

/// Orthonormal basis of the complement of a unit vector, via a Householder reflector.
fn complement_basis(u: &DVector<f64>) -> DMatrix<f64> {
    let dim = u.len();
    let mut v = u.clone();
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv = v.dot(&v);
    let reflector = DMatrix::<f64>::identity(dim, dim) - (&v * v.transpose()) * (2.0 / vv);
    reflector.columns(1, dim - 1).into_owned()
}

fn strip_minimum(l: f64, h: f64, n: i64, j_max: usize) -> Result<f64> {
    let q = strip_matrix(l, h, n, j_max);
    if n == 0 {
        let p = complement_basis(&mean_direction(j_max));
        smallest_eigenvalue(p.transpose() * q * p)
    } else {
        smallest_eigenvalue(q)
    }
}

fn strip_minima(l: f64, h: f64, n_max: usize, j_max: usize) -> Result<Vec<f64>> {
    (0..=n_max as i64).into_par_iter().map(|n| strip_minimum(l, h, n, j_max)).collect()
}

/// `β = √(min_n λ_min(Q_n))` over strips `|n| ≤ N` with `J` sine modes.
/// Strips `±n` share a form. The `n = 0` form is restricted to mean-zero
/// coefficient vectors.
pub fn infsup_rectangle(l: f64, h: f64, n_max: usize, j_max: usize) -> Result<InfSupReport> {
    if !(l > 0.0 && h > 0.0) {
        return domain(format!("L = {l}, H = {h} must be positive"));
    }
    if n_max < 1 || j_max < 8 {
        return domain(format!("need N >= 1 and J >= 8, got N = {n_max}, J = {j_max}"));
    }
    let minima = strip_minima(l, h, n_max, j_max)?;
    let refined = strip_minima(l, h, n_max, 2 * j_max)?;
    let lo = minima.iter().copied().fold(f64::INFINITY, f64::min);
    let lo_refined = refined.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(InfSupReport {
        l,
        h,
        n: n_max,
        j: j_max,
        beta: lo.max(0.0).sqrt(),
        beta_refined: lo_refined.max(0.0).sqrt(),
        strip_minima: minima,
        drift: ((lo - lo_refined) / lo).abs(),
        certified: certified_beta(l, h),
    })
}

/// Quadrature accuracy of [`check_lem_a6`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemA6Check {
    pub residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative change of `‖ηu‖ₐ²` when the η rule is doubled.
    pub refinement: f64,
}

impl LemA6Check {
    pub fn resolution_warning(&self) -> bool {
        self.refinement > 1e-6
    }
}

fn eta_weighted_seminorm_sq(u: &RectangleField, points: usize) -> f64 {
    let nodes = gauss_on(points, 0.0, u.h);
    let s2 = std::f64::consts::SQRT_2;
    u.strips()
        .map(|n| {
            let lam = strip_lambda(u.l, n);
            let row = u.b_row(n);
            if row.iter().all(|z| z.norm_sqr() == 0.0) {
                return 0.0;
            }
            nodes
                .iter()
                .map(|&(eta, w)| {
                    let mut val = Complex64::new(0.0, 0.0);
                    let mut der = Complex64::new(0.0, 0.0);
                    for (c, z) in row.iter().enumerate() {
                        let kk = PI * (c + 1) as f64 / u.h;
                        let (s, co) = (kk * eta).sin_cos();
                        val += z * (s2 * s);
                        der += z * (s2 * kk * co);
                    }
                    // ∂ξ(ηu) → 2πin/L·ηU ; ∂η(ηu) = U + ηU'
                    w * (lam * eta * eta * val.norm_sqr() + (val + der * eta).norm_sqr())
                })
                .sum::<f64>()
                * u.l
        })
        .sum()
}

/// `(16/9)·H²·‖u‖ₐ² − ‖η·u‖ₐ²` where `‖·‖ₐ` is the gradient seminorm on
/// the rectangle. The ξ-integral is exact by Parseval; the η-integral uses
/// Gauss-Legendre with `4J` points.
pub fn check_lem_a6(u: &RectangleField) -> LemA6Check {
    let points = 4 * u.j_max.max(4);
    let lhs = eta_weighted_seminorm_sq(u, points);
    let fine = eta_weighted_seminorm_sq(u, 2 * points);
    let rhs = 16.0 / 9.0 * u.h * u.h * u.grad_l2_sq();
    let refinement = if fine > 0.0 { ((lhs - fine) / fine).abs() } else { 0.0 };
    LemA6Check { residual: rhs - fine, lhs: fine, rhs, refinement }
}

/// Coefficients i.i.d. complex standard normal damped by `1/(1+n²+j²)`.
pub fn random_coefficients<R: Rng + ?Sized>(rng: &mut R, n_max: usize, j_max: usize) -> Vec<Complex64> {
    let n = n_max as i64;
    let mut out = Vec::with_capacity((2 * n_max + 1) * j_max);
    for ni in -n..=n {
        for j in 1..=j_max {
            let damp = 1.0 / (1.0 + (ni * ni) as f64 + (j * j) as f64);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out.push(Complex64::new(re, im) * damp);
        }
    }
    out
}

pub fn random_mean_zero_field<R: Rng + ?Sized>(rng: &mut R, l: f64, h: f64, n_max: usize, j_max: usize) -> Result<RectangleField> {
    RectangleField::mean_zero(l, h, n_max, j_max, random_coefficients(rng, n_max, j_max))
}

pub fn random_field<R: Rng + ?Sized>(rng: &mut R, l: f64, h: f64, n_max: usize, j_max: usize) -> Result<RectangleField> {
    RectangleField::new(l, h, n_max, j_max, random_coefficients(rng, n_max, j_max))
}

/// Field with a single nonzero `b_nj`.
pub fn single_mode(l: f64, h: f64, n_max: usize, j_max: usize, n: i64, j: usize, value: Complex64) -> Result<RectangleField> {
    if n.unsigned_abs() as usize > n_max || j < 1 || j > j_max {
        return domain(format!("mode ({n}, {j}) outside N = {n_max}, J = {j_max}"));
    }
    let mut b = vec![Complex64::new(0.0, 0.0); (2 * n_max + 1) * j_max];
    b[(n + n_max as i64) as usize * j_max + j - 1] = value;
    RectangleField::new(l, h, n_max, j_max, b)
}
