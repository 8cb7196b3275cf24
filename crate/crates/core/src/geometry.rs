//! Periodic channel profiles `h(x)`, the map to the reference rectangle
//! and quadrature norms on the channel
//! `Ω = {(x, y) : 0 < x < L, 0 < y < h(x)}`.
//!
//! The map is `x = ξ`, `y = h(ξ)η/H`, so `∂x = ∂ξ − (η/h)h_x∂η`,
//! `∂y = (H/h)∂η` and `dx dy = (h/H) dξ dη`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, gauss_on, trapezoid_periodic};
use crate::rectangle::RectangleField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmoothnessClass {
    /// `h_x` Lipschitz.
    C11,
    /// `h` Lipschitz only.
    C01,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Constant {
        c: f64,
    },
    /// `c0 + c1·cos(2πx/L)`.
    Cosine { c0: f64, c1: f64 },
    /// `h0` on `[3/8, 1/2] ∪ [7/8, 1]`, `top` on `[1/8, 1/4] ∪ [5/8, 3/4]`
    /// (fractions of `L`), joined by quintic ramps of width `w` centered in
    /// the remaining eighths. `w` defaults to `L/8`.
    Gap {
        h0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<f64>,
        #[serde(default = "default_top")]
        top: f64,
    },
    /// Triangle wave: `h0` at `x = 0`, `h1` at `x = L/2`.
    Sawtooth { h0: f64, h1: f64 },
    /// Piecewise linear through `[x, h]` nodes from `x = 0` to `x = L`.
    Sampled { nodes: Vec<[f64; 2]> },
}

fn default_top() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub h0: f64,
    pub h1: f64,
    /// `‖h_x‖∞`.
    pub m: f64,
    /// `max(M², ‖½hh_xx‖∞)`; absent for Lipschitz-only profiles.
    pub m2sq: Option<f64>,
    pub class: SmoothnessClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGeometry {
    l: f64,
    family: Family,
    summary: GeometrySummary,
}

#[derive(Serialize, Deserialize)]
struct GeometryDocument {
    #[serde(rename = "L")]
    l: f64,
    #[serde(flatten)]
    family: Family,
}

/// Quintic smoothstep and its derivatives on `[0, 1]`.
fn smoothstep(r: f64) -> (f64, f64, f64) {
    let r = r.clamp(0.0, 1.0);
    let s = r * r * r * (10.0 - 15.0 * r + 6.0 * r * r);
    let ds = 30.0 * r * r * (1.0 - r) * (1.0 - r);
    let dds = 60.0 * r * (1.0 - r) * (1.0 - 2.0 * r);
    (s, ds, dds)
}

fn geometry_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Geometry(msg.into()))
}

/// Maximum of a function on `[a, b]`: grid scan, then golden-section refinement.
fn maximize(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 2000;
    let (mut best_x, mut best) = (a, f(a));
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let step = (b - a) / n as f64;
    let (mut lo, mut hi) = ((best_x - step).max(a), (best_x + step).min(b));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(f(0.5 * (lo + hi)))
}

impl ChannelGeometry {
    pub fn new(l: f64, family: Family) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return geometry_err(format!("period L = {l} must be positive"));
        }
        let summary = summarize(l, &family)?;
        if !(summary.h0 > 0.0) {
            return geometry_err(format!("minimum height h0 = {} must be positive", summary.h0));
        }
        Ok(Self { l, family, summary })
    }

    pub fn constant(l: f64, c: f64) -> Result<Self> {
        Self::new(l, Family::Constant { c })
    }

    pub fn cosine(l: f64, c0: f64, c1: f64) -> Result<Self> {
        Self::new(l, Family::Cosine { c0, c1 })
    }

    pub fn gap(l: f64, h0: f64, w: Option<f64>) -> Result<Self> {
        Self::new(l, Family::Gap { h0, w, top: 1.0 })
    }

    pub fn sawtooth(l: f64, h0: f64, h1: f64) -> Result<Self> {
        Self::new(l, Family::Sawtooth { h0, h1 })
    }

    pub fn sampled(l: f64, nodes: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(l, Family::Sampled { nodes })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn summary(&self) -> GeometrySummary {
        self.summary
    }

    pub fn class(&self) -> SmoothnessClass {
        self.summary.class
    }

    /// `(h, h_x, h_xx)` at `x` (one-sided at kinks; `h_xx = 0` for piecewise-linear profiles).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let l = self.l;
        let x = x.rem_euclid(l);
        match &self.family {
            Family::Constant { c } => (*c, 0.0, 0.0),
            Family::Cosine { c0, c1 } => {
                let k = 2.0 * PI / l;
                let (s, c) = (k * x).sin_cos();
                (c0 + c1 * c, -c1 * k * s, -c1 * k * k * c)
            }
            Family::Gap { h0, w, top } => {
                let w = w.unwrap_or(l / 8.0);
                let delta = top - h0;
                let eighth = ((8.0 * x / l).floor() as usize).min(7);
                let (base, dir) = match eighth {
                    1 | 5 => return (*top, 0.0, 0.0),
                    3 | 7 => return (*h0, 0.0, 0.0),
                    0 | 4 => (*h0, 1.0),
                    _ => (*top, -1.0),
                };
                let center = (eighth as f64 + 0.5) * l / 8.0;
                let r = (x - (center - 0.5 * w)) / w;
                if r <= 0.0 {
                    return (base, 0.0, 0.0);
                }
                if r >= 1.0 {
                    return (base + dir * delta, 0.0, 0.0);
                }
                let (s, ds, dds) = smoothstep(r);
                (base + dir * delta * s, dir * delta * ds / w, dir * delta * dds / (w * w))
            }
            Family::Sawtooth { h0, h1 } => {
                let slope = 2.0 * (h1 - h0) / l;
                if x <= 0.5 * l {
                    (h0 + slope * x, slope, 0.0)
                } else {
                    (h1 - slope * (x - 0.5 * l), -slope, 0.0)
                }
            }
            Family::Sampled { nodes } => {
                let i = nodes.partition_point(|p| p[0] <= x).clamp(1, nodes.len() - 1);
                let ([xa, ha], [xb, hb]) = (nodes[i - 1], nodes[i]);
                let slope = (hb - ha) / (xb - xa);
                (ha + slope * (x - xa), slope, 0.0)
            }
        }
    }

    pub fn h(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Points in `[0, L]` where the profile is not smooth, including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let l = self.l;
        let mut out = match &self.family {
            Family::Constant { .. } | Family::Cosine { .. } => vec![],
            Family::Gap { w, .. } => {
                let w = w.unwrap_or(l / 8.0);
                [0usize, 2, 4, 6]
                    .iter()
                    .flat_map(|&e| {
                        let c = (e as f64 + 0.5) * l / 8.0;
                        [c - 0.5 * w, c + 0.5 * w]
                    })
                    .collect()
            }
            Family::Sawtooth { .. } => vec![0.5 * l],
            Family::Sampled { nodes } => nodes.iter().map(|p| p[0]).collect(),
        };
        out.push(0.0);
        out.push(l);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * l);
        out
    }

    fn is_smooth_periodic(&self) -> bool {
        matches!(self.family, Family::Constant { .. } | Family::Cosine { .. })
    }

    /// `∫_Ω 1 dA = ∫₀^L h dx`, in closed form.
    pub fn area(&self) -> f64 {
        let l = self.l;
        match &self.family {
            Family::Constant { c } => c * l,
            Family::Cosine { c0, .. } => c0 * l,
            // the smoothstep averages to 1/2 over each ramp
            Family::Gap { h0, top, .. } => 0.5 * (h0 + top) * l,
            Family::Sawtooth { h0, h1 } => 0.5 * (h0 + h1) * l,
            Family::Sampled { nodes } => nodes.windows(2).map(|p| 0.5 * (p[0][1] + p[1][1]) * (p[1][0] - p[0][0])).sum(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GeometryDocument { l: self.l, family: self.family.clone() })?)
    }

    /// Accepts `{L, family, ...}` or the bare sampled form `{L, nodes}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(s)?;
        if let Some(obj) = value.as_object_mut() {
            if !obj.contains_key("family") && obj.contains_key("nodes") {
                obj.insert("family".into(), "sampled".into());
            }
        }
        let doc: GeometryDocument = serde_json::from_value(value)?;
        Self::new(doc.l, doc.family)
    }
}

fn summarize(l: f64, family: &Family) -> Result<GeometrySummary> {
    let c11 = |h0: f64, h1: f64, m: f64, half_hhxx: f64| GeometrySummary {
        h0,
        h1,
        m,
        m2sq: Some(f64::max(m * m, half_hhxx)),
        class: SmoothnessClass::C11,
    };
    let c01 = |h0: f64, h1: f64, m: f64| GeometrySummary { h0, h1, m, m2sq: None, class: SmoothnessClass::C01 };
    Ok(match family {
        Family::Constant { c } => c11(*c, *c, 0.0, 0.0),
        Family::Cosine { c0, c1 } => {
            if !(c1.abs() < *c0) {
                return geometry_err(format!("cosine profile needs |c1| < c0, got c0 = {c0}, c1 = {c1}"));
            }
            let k = 2.0 * PI / l;
            // |(c0 + c1 cos)·c1 cos| peaks at cos = sign(c1)
            c11(c0 - c1.abs(), c0 + c1.abs(), c1.abs() * k, 0.5 * k * k * c1.abs() * (c0 + c1.abs()))
        }
        Family::Gap { h0, w, top } => {
            let w = w.unwrap_or(l / 8.0);
            if !(w > 0.0 && w <= l / 8.0 * (1.0 + 1e-12)) {
                return geometry_err(format!("transition width w = {w} must lie in (0, L/8]"));
            }
            if !(*h0 > 0.0 && h0 <= top) {
                return geometry_err(format!("gap profile needs 0 < h0 <= top, got h0 = {h0}, top = {top}"));
            }
            let delta = top - h0;
            let m = delta * 15.0 / (8.0 * w);
            // rising ramp; the falling ramp is its mirror image
            let half_hhxx = maximize(
                |r| {
                    let (s, _, dds) = smoothstep(r);
                    0.5 * (h0 + delta * s) * (delta * dds / (w * w)).abs()
                },
                0.0,
                1.0,
            );
            c11(*h0, *top, m, half_hhxx)
        }
        Family::Sawtooth { h0, h1 } => {
            if !(*h0 > 0.0 && h0 <= h1) {
                return geometry_err(format!("sawtooth needs 0 < h0 <= h1, got h0 = {h0}, h1 = {h1}"));
            }
            c01(*h0, *h1, 2.0 * (h1 - h0) / l)
        }
        Family::Sampled { nodes } => {
            if nodes.len() < 2 {
                return geometry_err("sampled profile needs at least two nodes");
            }
            if nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return geometry_err("sampled nodes must be finite");
            }
            if nodes.windows(2).any(|p| p[1][0] <= p[0][0]) {
                return geometry_err("sampled x values must be strictly increasing");
            }
            let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
            if first[0].abs() > 1e-12 * l || (last[0] - l).abs() > 1e-12 * l {
                return geometry_err(format!("sampled nodes must run from x = 0 to x = L = {l}"));
            }
            if first[1] != last[1] {
                return geometry_err("sampled profile must have equal end heights");
            }
            let h0 = nodes.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let h1 = nodes.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let m = nodes.windows(2).map(|p| ((p[1][1] - p[0][1]) / (p[1][0] - p[0][0])).abs()).fold(0.0, f64::max);
            c01(h0, h1, m)
        }
    })
}

/// `(h0, h1, M, M2sq, class)`.
pub fn geometry_summary(g: &ChannelGeometry) -> GeometrySummary {
    g.summary()
}

/// A field on the channel stored through its pullback `ũ(ξ, η)` on the
/// rectangle of height `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedField {
    geometry: ChannelGeometry,
    field: RectangleField,
}

impl MappedField {
    pub fn new(geometry: ChannelGeometry, field: RectangleField) -> Result<Self> {
        if (geometry.l() - field.l()).abs() > 1e-12 * geometry.l() {
            return Err(Error::Domain(format!("geometry period {} differs from field period {}", geometry.l(), field.l())));
        }
        Ok(Self { geometry, field })
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    /// The pullback `ũ`.
    pub fn pullback(&self) -> &RectangleField {
        &self.field
    }

    pub fn h_ref(&self) -> f64 {
        self.field.h()
    }

    /// `ũ(ξ, η)`.
    pub fn eval_reference(&self, xi: f64, eta: f64) -> Complex64 {
        let f = &self.field;
        let s2 = std::f64::consts::SQRT_2;
        f.strips()
            .flat_map(|n| {
                let phase = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * xi / f.l());
                f.b_row(n)
                    .iter()
                    .enumerate()
                    .map(move |(c, z)| z * phase * (s2 * (PI * (c + 1) as f64 * eta / f.h()).sin()))
            })
            .sum()
    }

    /// `u(x, y)` for `0 ≤ y ≤ h(x)`.
    pub fn eval_physical(&self, x: f64, y: f64) -> Complex64 {
        self.eval_reference(x, self.h_ref() * y / self.geometry.h(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub xi_points: usize,
    pub eta_points: usize,
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { xi_points: 512, eta_points: 256, tol: 1e-6, max_doublings: 3 }
    }
}

impl QuadConfig {
    /// Coarser start for many-trial property checks.
    pub fn fast() -> Self {
        Self { xi_points: 128, eta_points: 64, ..Self::default() }
    }
}

/// Squared norms of a mapped field on the channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadNorms {
    /// `‖u‖₀,Ω²`.
    pub l2_sq: f64,
    /// `‖u‖ₐ,Ω² = ‖∇u‖₀,Ω²`.
    pub energy_sq: f64,
    /// `‖u_y‖₀,Ω²`.
    pub dy_sq: f64,
    /// `‖Hh⁻¹u‖ₐ,Ω²`.
    pub scaled_energy_sq: f64,
    /// `‖Hh⁻²y·h_x·u‖ₐ,Ω²`; zero for Lipschitz-only profiles.
    pub transport_energy_sq: f64,
    /// `∫_R (h/H) dξ dη`.
    pub area: f64,
    /// Largest relative change over the last doubling.
    pub drift: f64,
    pub xi_points: usize,
    pub eta_points: usize,
}

impl QuadNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.energy_sq.sqrt()
    }

    pub fn drift_warning(&self, tol: f64) -> bool {
        self.drift > tol
    }

    fn as_array(&self) -> [f64; 6] {
        [self.l2_sq, self.energy_sq, self.dy_sq, self.scaled_energy_sq, self.transport_energy_sq, self.area]
    }
}

fn xi_rule(g: &ChannelGeometry, n: usize) -> Vec<(f64, f64)> {
    if g.is_smooth_periodic() {
        trapezoid_periodic(n, g.l())
    } else {
        composite_gauss(&g.breakpoints(), n)
    }
}

fn quad_once(u: &MappedField, nxi: usize, neta: usize) -> QuadNorms {
    let g = &u.geometry;
    let f = &u.field;
    let (l, hh) = (f.l(), f.h());
    let jm = f.j_max();
    let c11 = g.class() == SmoothnessClass::C11;
    let s2 = std::f64::consts::SQRT_2;

    let eta_nodes = gauss_on(neta, 0.0, hh);
    // √2 sin and √2 (πj/H) cos at each η node
    let sin_tab: Vec<f64> = eta_nodes
        .iter()
        .flat_map(|&(eta, _)| (1..=jm).map(move |j| s2 * (PI * j as f64 * eta / hh).sin()))
        .collect();
    let cos_tab: Vec<f64> = eta_nodes
        .iter()
        .flat_map(|&(eta, _)| {
            (1..=jm).map(move |j| {
                let k = PI * j as f64 / hh;
                s2 * k * (k * eta).cos()
            })
        })
        .collect();

    let partials: Vec<[f64; 6]> = xi_rule(g, nxi)
        .par_iter()
        .map(|&(xi, wx)| {
            let (h, hx, hxx) = g.eval(xi);
            let hxx = if c11 { hxx } else { 0.0 };
            // ξ-dependence folded into per-mode coefficients
            let mut c = vec![Complex64::new(0.0, 0.0); jm];
            let mut d = vec![Complex64::new(0.0, 0.0); jm];
            for n in f.strips() {
                let phase = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * xi / l);
                let dphase = phase * Complex64::new(0.0, 2.0 * PI * n as f64 / l);
                for (col, z) in f.b_row(n).iter().enumerate() {
                    c[col] += z * phase;
                    d[col] += z * dphase;
                }
            }
            let jac = h / hh;
            let mut acc = [0.0; 6];
            for (i, &(eta, we)) in eta_nodes.iter().enumerate() {
                let st = &sin_tab[i * jm..(i + 1) * jm];
                let ct = &cos_tab[i * jm..(i + 1) * jm];
                let mut v = Complex64::new(0.0, 0.0);
                let mut v_xi = Complex64::new(0.0, 0.0);
                let mut v_eta = Complex64::new(0.0, 0.0);
                for col in 0..jm {
                    v += c[col] * st[col];
                    v_xi += d[col] * st[col];
                    v_eta += c[col] * ct[col];
                }
                let w = wx * we * jac;
                let t = eta * hx / h;
                let ux = v_xi - v_eta * t;
                let uy = v_eta * (hh / h);
                // Hh⁻¹u
                let sx = (v * (-hx / (h * h)) + ux / h) * hh;
                let sy = uy * (hh / h);
                // (η h_x/h) ũ
                let tx = v * (eta * (hxx / h - 2.0 * hx * hx / (h * h))) + v_xi * t - v_eta * (t * t);
                let ty = (v * (hx / h) + v_eta * t) * (hh / h);
                acc[0] += w * v.norm_sqr();
                acc[1] += w * (ux.norm_sqr() + uy.norm_sqr());
                acc[2] += w * uy.norm_sqr();
                acc[3] += w * (sx.norm_sqr() + sy.norm_sqr());
                if c11 {
                    acc[4] += w * (tx.norm_sqr() + ty.norm_sqr());
                }
                acc[5] += w;
            }
            acc
        })
        .collect();
    let mut total = [0.0; 6];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    QuadNorms {
        l2_sq: total[0],
        energy_sq: total[1],
        dy_sq: total[2],
        scaled_energy_sq: total[3],
        transport_energy_sq: total[4],
        area: total[5],
        drift: 0.0,
        xi_points: nxi,
        eta_points: neta,
    }
}

fn relative_drift(a: &QuadNorms, b: &QuadNorms) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array().iter())
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 { 0.0 } else { (x - y).abs() / scale }
        })
        .fold(0.0, f64::max)
}

/// Tensor quadrature of the mapped integrands, doubling both rules until
/// the relative change drops below `cfg.tol` or the doubling budget runs out.
pub fn quad_norms_with(u: &MappedField, cfg: QuadConfig) -> QuadNorms {
    let (mut nxi, mut neta) = (cfg.xi_points, cfg.eta_points);
    let mut prev = quad_once(u, nxi, neta);
    for _ in 0..cfg.max_doublings.max(1) {
        nxi *= 2;
        neta *= 2;
        let next = quad_once(u, nxi, neta);
        let drift = relative_drift(&prev, &next);
        prev = QuadNorms { drift, ..next };
        if drift < cfg.tol {
            break;
        }
    }
    prev
}

pub fn quad_norms(u: &MappedField) -> QuadNorms {
    quad_norms_with(u, QuadConfig::default())
}

/// Which set of splitting weights fixes the lemma constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVariant {
    /// Weights `(9, 3, 2)` and `(2, 2)`; the transport bound is included.
    C11,
    /// Weights `(36, 9/8, 12)` and `(9/8, 9)`.
    Lipschitz,
}

/// `C3²`, bounding `‖Hh⁻¹u‖ₐ,Ω²` by `‖ũ‖ₐ,R²`.
pub fn c3_sq(variant: LemmaVariant, h: f64, h0: f64, m: f64) -> f64 {
    let r = h / h0;
    match variant {
        LemmaVariant::C11 => f64::max(3.0 * r, (1.0 + 3.0 * m * m) * r.powi(3)),
        LemmaVariant::Lipschitz => f64::max(9.0 / 8.0 * r, (1.0 + 16.0 * m * m) * r.powi(3)),
    }
}

/// `C4²` with `m2sq = max(‖h_x‖², ‖½hh_xx‖)`.
pub fn c4_sq(h: f64, h0: f64, m2sq: f64) -> f64 {
    let r = h / h0;
    f64::max(8.0 * m2sq * r, (2.0 * m2sq + 6.0 * m2sq * m2sq) * r.powi(3))
}

/// `C5²`, bounding `‖v‖ₐ,Ω²` by `‖ṽ‖ₐ,R²`.
pub fn c5_sq(variant: LemmaVariant, h: f64, h0: f64, h1: f64, m: f64) -> f64 {
    match variant {
        LemmaVariant::C11 => f64::max(2.0 * h1 / h, (1.0 + 2.0 * m * m) * h / h0),
        LemmaVariant::Lipschitz => f64::max(9.0 / 8.0 * h1 / h, (1.0 + 9.0 * m * m) * h / h0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaResiduals {
    pub r3: f64,
    /// Present for the C11 variant only.
    pub r4: Option<f64>,
    pub r5: f64,
    /// `‖Hh⁻¹u‖ₐ,Ω² / (C3²‖ũ‖ₐ,R²)`; how close the first bound is to tight.
    pub r3_ratio: f64,
    pub quad: QuadNorms,
}

/// Residuals `C²‖ũ‖ₐ,R² − (mapped energy)` for the three transfer bounds.
pub fn check_lem_a3_a4_a5(u: &MappedField, variant: LemmaVariant, cfg: QuadConfig) -> Result<LemmaResiduals> {
    let s = u.geometry.summary();
    if variant == LemmaVariant::C11 && s.class != SmoothnessClass::C11 {
        return Err(Error::ClassMismatch("the transport bound needs a profile with Lipschitz slope".into()));
    }
    let h = u.h_ref();
    let q = quad_norms_with(u, cfg);
    let rect = u.field.grad_l2_sq();
    let c3 = c3_sq(variant, h, s.h0, s.m);
    let c5 = c5_sq(variant, h, s.h0, s.h1, s.m);
    let r4 = match (variant, s.m2sq) {
        (LemmaVariant::C11, Some(m2)) => Some(c4_sq(h, s.h0, m2) * rect - q.transport_energy_sq),
        _ => None,
    };
    let r3_ratio = if rect > 0.0 { q.scaled_energy_sq / (c3 * rect) } else { 0.0 };
    Ok(LemmaResiduals { r3: c3 * rect - q.scaled_energy_sq, r4, r5: c5 * rect - q.energy_sq, r3_ratio, quad: q })
}

/// `(h1²/8)‖u_y‖₀,Ω² − ‖u‖₀,Ω²`.
pub fn pf_channel(u: &MappedField, cfg: QuadConfig) -> f64 {
    let q = quad_norms_with(u, cfg);
    let h1 = u.geometry.summary().h1;
    h1 * h1 / 8.0 * q.dy_sq - q.l2_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rectangle::{random_field, single_mode};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_extrema(g: &ChannelGeometry, n: usize) -> (f64, f64) {
        (0..=n).map(|i| g.h(g.l() * i as f64 / n as f64)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }

    #[test]
    fn family_summaries() {
        let s = ChannelGeometry::constant(1.0, 1.0).unwrap().summary();
        assert_eq!((s.h0, s.h1, s.m, s.m2sq, s.class), (1.0, 1.0, 0.0, Some(0.0), SmoothnessClass::C11));
        let s = ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap().summary();
        assert_eq!((s.h0, s.h1), (0.75, 1.25));
        assert_relative_eq!(s.m, 0.5 * PI, max_relative = 1e-15);
        let s = ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap().summary();
        assert_eq!((s.m, s.m2sq, s.class), (1.0, None, SmoothnessClass::C01));
        let s = ChannelGeometry::sampled(2.0, vec![[0.0, 1.0], [0.5, 2.0], [2.0, 1.0]]).unwrap().summary();
        assert_eq!((s.h0, s.h1, s.m, s.class), (1.0, 2.0, 2.0, SmoothnessClass::C01));
    }

    #[test]
    fn invalid_families_rejected() {
        assert!(matches!(ChannelGeometry::constant(1.0, 0.0), Err(Error::Geometry(_))));
        assert!(ChannelGeometry::cosine(1.0, 1.0, 1.0).is_err());
        assert!(ChannelGeometry::gap(1.0, 0.1, Some(0.2)).is_err());
        assert!(ChannelGeometry::gap(1.0, -0.1, None).is_err());
        assert!(ChannelGeometry::sawtooth(1.0, 0.0, 1.0).is_err());
        assert!(ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [1.0, 2.0]]).is_err());
        assert!(ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [0.0, 2.0], [1.0, 1.0]]).is_err());
        assert!(ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [0.5, -1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn closed_form_extrema_match_grid() {
        for g in [
            ChannelGeometry::cosine(2.0, 1.0, -0.3).unwrap(),
            ChannelGeometry::gap(1.0, 0.1, None).unwrap(),
            ChannelGeometry::gap(1.0, 0.3, Some(0.05)).unwrap(),
            ChannelGeometry::sawtooth(3.0, 0.2, 0.9).unwrap(),
        ] {
            let (lo, hi) = grid_extrema(&g, 80_000);
            let s = g.summary();
            assert_relative_eq!(lo, s.h0, max_relative = 1e-8);
            assert_relative_eq!(hi, s.h1, max_relative = 1e-8);
            assert_abs_diff_eq!(g.h(0.0), g.h(g.l()), epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_bounds_match_grid() {
        for g in [ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap(), ChannelGeometry::gap(1.0, 0.1, None).unwrap()] {
            let n = 200_000;
            let (mut m, mut hh) = (0.0f64, 0.0f64);
            for i in 0..n {
                let (h, hx, hxx) = g.eval(g.l() * (i as f64 + 0.5) / n as f64);
                m = m.max(hx.abs());
                hh = hh.max((0.5 * h * hxx).abs());
            }
            let s = g.summary();
            assert_relative_eq!(m, s.m, max_relative = 1e-8);
            assert_relative_eq!(m.powi(2).max(hh), s.m2sq.unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn sawtooth_slope_by_finite_differences() {
        let g = ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for n in [10usize, 100, 1000, 10_000] {
            let dx = 1.0 / n as f64;
            let est = (0..n).map(|i| ((g.h((i + 1) as f64 * dx) - g.h(i as f64 * dx)) / dx).abs()).fold(0.0, f64::max);
            let err = (est - g.summary().m).abs();
            assert!(err <= last + 1e-12);
            last = err;
        }
        assert!(last < 1e-9);
    }

    #[test]
    fn json_forms() {
        let g = ChannelGeometry::from_json(r#"{"L": 1.0, "family": "cosine", "c0": 1.0, "c1": 0.25}"#).unwrap();
        assert_eq!(g, ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap());
        let g = ChannelGeometry::from_json(r#"{"L": 1.0, "nodes": [[0, 1], [0.5, 0.5], [1, 1]]}"#).unwrap();
        assert_eq!(g.class(), SmoothnessClass::C01);
        let g = ChannelGeometry::gap(1.0, 0.2, Some(0.1)).unwrap();
        assert_eq!(ChannelGeometry::from_json(&g.to_json().unwrap()).unwrap(), g);
        let g = ChannelGeometry::from_json(r#"{"L": 1.0, "family": "gap", "h0": 0.2}"#).unwrap();
        assert_eq!(g.summary().h1, 1.0);
        assert!(ChannelGeometry::from_json(r#"{"L": 1.0, "family": "blob"}"#).is_err());
    }

    #[test]
    fn area_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in [
            ChannelGeometry::constant(1.0, 0.7).unwrap(),
            ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap(),
            ChannelGeometry::gap(1.0, 0.1, None).unwrap(),
            ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap(),
            ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [0.3, 0.4], [0.7, 0.9], [1.0, 1.0]]).unwrap(),
        ] {
            let f = random_field(&mut rng, 1.0, 0.5, 1, 4).unwrap();
            let u = MappedField::new(g.clone(), f).unwrap();
            let q = quad_norms_with(&u, QuadConfig::fast());
            assert_relative_eq!(q.area, g.area(), max_relative = 1e-10);
        }
    }

    #[test]
    fn constant_geometry_matches_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = random_field(&mut rng, 1.0, 0.8, 3, 8).unwrap();
        let u = MappedField::new(ChannelGeometry::constant(1.0, 0.8).unwrap(), f.clone()).unwrap();
        let q = quad_norms_with(&u, QuadConfig::fast());
        assert_relative_eq!(q.l2_sq, f.l2_sq(), max_relative = 1e-10);
        assert_relative_eq!(q.energy_sq, f.grad_l2_sq(), max_relative = 1e-10);
        assert_relative_eq!(q.dy_sq, f.dy_l2_sq(), max_relative = 1e-10);
        assert_eq!(q.transport_energy_sq, 0.0);
    }

    #[test]
    fn single_sine_on_cosine_geometry() {
        // ‖u‖² = ∫∫ 2 sin²(πη/H) (h/H) dξ dη = ∫h dξ = c0 L
        let g = ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap();
        let f = single_mode(1.0, 0.75, 0, 4, 0, 1, Complex64::new(1.0, 0.0)).unwrap();
        let u = MappedField::new(g, f).unwrap();
        let q = quad_norms_with(&u, QuadConfig::fast());
        assert_relative_eq!(q.l2_sq, 1.0, max_relative = 1e-12);
        // ‖u_y‖² = (π/H)² H² ∫ 1/h dξ · ... = π² ∫ 1/h dξ ; ∫₀¹ 1/(1 + ¼cos) = 1/√(1 − 1/16)
        assert_relative_eq!(q.dy_sq, PI * PI / (1.0 - 1.0 / 16.0f64).sqrt(), max_relative = 1e-10);
        let zero = MappedField::new(
            ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap(),
            RectangleField::new(1.0, 0.75, 1, 4, vec![Complex64::new(0.0, 0.0); 12]).unwrap(),
        )
        .unwrap();
        let z = quad_norms_with(&zero, QuadConfig::fast());
        assert_eq!((z.l2(), z.energy()), (0.0, 0.0));
    }

    #[test]
    fn pushforward_pullback_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = ChannelGeometry::cosine(1.0, 1.0, 0.3).unwrap();
        let u = MappedField::new(g.clone(), random_field(&mut rng, 1.0, 0.7, 2, 6).unwrap()).unwrap();
        for &(xi, eta) in &[(0.1, 0.2), (0.5, 0.69), (0.93, 0.01)] {
            let y = g.h(xi) * eta / 0.7;
            assert!((u.eval_physical(xi, y) - u.eval_reference(xi, eta)).norm() < 1e-13);
        }
        assert!(u.eval_physical(0.3, g.h(0.3)).norm() < 1e-12);
        assert!(u.eval_physical(0.3, 0.0).norm() < 1e-12);
    }

    #[test]
    fn chain_rule_against_direct_grid() {
        // |∇u|² by the mapped formulas vs finite differences in (x, y)
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = ChannelGeometry::cosine(1.0, 1.0, 0.2).unwrap();
        let u = MappedField::new(g.clone(), random_field(&mut rng, 1.0, 0.8, 1, 3).unwrap()).unwrap();
        let q = quad_norms_with(&u, QuadConfig::fast());
        let (nx, ny) = (400, 400);
        let mut direct = 0.0;
        let eps = 1e-6;
        for (x, wx) in trapezoid_periodic(nx, 1.0) {
            let h = g.h(x);
            for (y, wy) in gauss_on(ny / 8, 0.0, h) {
                let ux = (u.eval_physical(x + eps, y) - u.eval_physical(x - eps, y)) / (2.0 * eps);
                let uy = (u.eval_physical(x, y + eps) - u.eval_physical(x, y - eps)) / (2.0 * eps);
                direct += wx * wy * (ux.norm_sqr() + uy.norm_sqr());
            }
        }
        assert_relative_eq!(direct, q.energy_sq, max_relative = 1e-6);
    }

    #[test]
    fn lemma_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let flat = ChannelGeometry::constant(1.0, 1.0).unwrap();
        let u = MappedField::new(flat, random_field(&mut rng, 1.0, 1.0, 2, 6).unwrap()).unwrap();
        let r = check_lem_a3_a4_a5(&u, LemmaVariant::C11, QuadConfig::fast()).unwrap();
        assert_eq!(r.r4, Some(0.0));
        assert!(r.r3 >= 0.0 && r.r5 >= 0.0);

        let g = ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap();
        let u = MappedField::new(g, random_field(&mut rng, 1.0, 0.75, 2, 6).unwrap()).unwrap();
        for variant in [LemmaVariant::C11, LemmaVariant::Lipschitz] {
            let r = check_lem_a3_a4_a5(&u, variant, QuadConfig::fast()).unwrap();
            assert!(r.r3 >= -1e-8 && r.r5 >= -1e-8 && r.r4.unwrap_or(0.0) >= -1e-8, "{r:?}");
        }

        let saw = ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap();
        let u = MappedField::new(saw, random_field(&mut rng, 1.0, 0.5, 2, 6).unwrap()).unwrap();
        assert!(matches!(check_lem_a3_a4_a5(&u, LemmaVariant::C11, QuadConfig::fast()), Err(Error::ClassMismatch(_))));
        let r = check_lem_a3_a4_a5(&u, LemmaVariant::Lipschitz, QuadConfig::fast()).unwrap();
        assert!(r.r4.is_none() && r.r3 >= -1e-8 && r.r5 >= -1e-8);
    }

    #[test]
    fn pf_channel_on_flat_channel() {
        // h = H = 1, u = √2 sin(πy): ‖u_y‖² = π², ‖u‖² = 1
        let g = ChannelGeometry::constant(1.0, 1.0).unwrap();
        let u = MappedField::new(g, single_mode(1.0, 1.0, 0, 2, 0, 1, Complex64::new(1.0, 0.0)).unwrap()).unwrap();
        let r = pf_channel(&u, QuadConfig::fast());
        assert_relative_eq!(r, PI * PI / 8.0 - 1.0, max_relative = 1e-10);
    }
}
