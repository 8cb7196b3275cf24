//! Closed-form inf-sup and Poincaré constants for channel geometries, with
//! the intermediate constants they are assembled from.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{c3_sq, c4_sq, c5_sq, ChannelGeometry, GeometrySummary, LemmaVariant, SmoothnessClass};
use crate::rectangle::rectangle_constants;

/// Slack allowed on `Σ 1/γ ≤ 1` for rounding in vectors that hit 1 exactly.
pub const GAMMA_SUM_TOL: f64 = 1e-12;

/// Splitting weights used by the estimates, each with `Σ 1/γ ≤ 1`.
pub const WEIGHT_VECTORS: [(&str, &[f64]); 7] = [
    ("scaled-energy, C11", &[9.0, 3.0, 2.0]),
    ("scaled-energy, Lipschitz", &[36.0, 9.0 / 8.0, 12.0]),
    ("transport, x part", &[3.0 * PI * PI / 8.0, 3.0 * PI * PI / 8.0, 8.0, 3.0]),
    ("transport, y part", &[9.0 / 2.0, 3.0 / 2.0]),
    ("energy, C11", &[2.0, 2.0]),
    ("energy, Lipschitz", &[9.0 / 8.0, 9.0]),
    ("cross term", &[4.0, 4.0 / 3.0]),
];

pub fn inverse_sum(gammas: &[f64]) -> f64 {
    gammas.iter().map(|g| 1.0 / g).sum()
}

/// Fails if any of the built-in weight vectors is inadmissible.
pub fn check_weight_vectors() -> Result<()> {
    for (label, g) in WEIGHT_VECTORS {
        let s = inverse_sum(g);
        if s > 1.0 + GAMMA_SUM_TOL {
            return domain(format!("weights {label} have inverse sum {s} > 1"));
        }
    }
    Ok(())
}

/// `Σ γ_j|w_j|² − |Σ w_j|²`, nonnegative whenever `Σ 1/γ_j ≤ 1`.
pub fn gamma_check(gammas: &[f64], w: &[Complex64]) -> Result<f64> {
    if gammas.len() != w.len() || gammas.is_empty() {
        return domain(format!("{} weights for {} terms", gammas.len(), w.len()));
    }
    if gammas.iter().any(|&g| !(g > 0.0)) {
        return domain("weights must be positive");
    }
    let s = inverse_sum(gammas);
    if s > 1.0 + GAMMA_SUM_TOL {
        return domain(format!("inverse weight sum {s} exceeds 1"));
    }
    let lhs: f64 = gammas.iter().zip(w).map(|(g, z)| g * z.norm_sqr()).sum();
    let total: Complex64 = w.iter().sum();
    Ok(lhs - total.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    C11,
    Lipschitz,
    Pf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaUse {
    pub label: String,
    pub gamma: Vec<f64>,
}

fn gamma_use(label: &str) -> GammaUse {
    let (l, g) = WEIGHT_VECTORS.iter().find(|(l, _)| *l == label).expect("known weight label");
    GammaUse { label: (*l).to_string(), gamma: g.to_vec() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremTag,
    #[serde(rename = "L")]
    pub l: f64,
    pub h0: f64,
    pub h1: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub m2sq: Option<f64>,
    /// Height of the reference rectangle.
    #[serde(rename = "H")]
    pub h_ref: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3sq: Option<f64>,
    pub c4sq: Option<f64>,
    pub c5sq: Option<f64>,
    pub theta: Option<f64>,
    /// Optimized pair for the Poincaré bound; `γ2` is absent when `M = 0`.
    pub gamma_opt: Option<(f64, Option<f64>)>,
    pub gammas: Vec<GammaUse>,
    /// `β⁻¹` (or `C`) from the intermediate constants before the final majorization.
    pub assembled: f64,
    /// The closed-form `β⁻¹` (or `C`).
    pub value: f64,
    /// `K = √(1 + C²)` for the Poincaré bound.
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub recommended: bool,
}

impl BoundReport {
    fn base(theorem: TheoremTag, l: f64, s: &GeometrySummary, h_ref: f64) -> Self {
        Self {
            theorem,
            l,
            h0: s.h0,
            h1: s.h1,
            m: s.m,
            m2sq: s.m2sq,
            h_ref,
            c1: None,
            c2: None,
            c3sq: None,
            c4sq: None,
            c5sq: None,
            theta: None,
            gamma_opt: None,
            gammas: Vec::new(),
            assembled: f64::NAN,
            value: f64::NAN,
            k: None,
            recommended: false,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `β⁻¹ = (9/4)(1+M²)√(h1/h0)·max(4, L/h0, h1/h0)` with `M² = max(‖h_x‖², ‖½hh_xx‖)`
/// and reference height `H = h0`.
pub fn beta_inv_c11(g: &ChannelGeometry) -> Result<BoundReport> {
    beta_inv_c11_from(g.l(), &g.summary())
}

pub fn beta_inv_c11_from(l: f64, s: &GeometrySummary) -> Result<BoundReport> {
    let m2 = match (s.class, s.m2sq) {
        (SmoothnessClass::C11, Some(m2)) => m2,
        _ => return Err(Error::ClassMismatch("this bound needs a profile with Lipschitz slope".into())),
    };
    let (h0, h1) = (s.h0, s.h1);
    let h = h0;
    let m = m2.sqrt();
    let (c1, c2) = rectangle_constants(l, h);
    let c3 = c3_sq(LemmaVariant::C11, h, h0, m);
    let c4 = c4_sq(h, h0, m2);
    let c5 = c5_sq(LemmaVariant::C11, h, h0, h1, m);
    let beta_inv_sq = h1 / h * f64::max(3.0 * c1 * c3, 1.5 * c1 * c4 + c2 * c5);
    let value = 2.25 * (1.0 + m2) * (h1 / h0).sqrt() * f64::max(4.0, f64::max(l / h0, h1 / h0));
    let mut r = BoundReport::base(TheoremTag::C11, l, s, h);
    r.c1 = Some(c1);
    r.c2 = Some(c2);
    r.c3sq = Some(c3);
    r.c4sq = Some(c4);
    r.c5sq = Some(c5);
    r.gammas = ["scaled-energy, C11", "transport, x part", "transport, y part", "energy, C11"].map(gamma_use).to_vec();
    r.assembled = beta_inv_sq.sqrt();
    r.value = value;
    Ok(r)
}

/// `β⁻¹ = 2·max(4, L/√(h0h1), 8LM/h0)·max(1, 8M)·h1/h0` with
/// `H = min(h0, h0/(8M))` and `θ = 4HM/h0 ≤ 1/2`.
pub fn beta_inv_lipschitz(g: &ChannelGeometry) -> Result<BoundReport> {
    Ok(beta_inv_lipschitz_from(g.l(), &g.summary()))
}

pub fn beta_inv_lipschitz_from(l: f64, s: &GeometrySummary) -> BoundReport {
    let (h0, h1, m) = (s.h0, s.h1, s.m);
    let h = if 8.0 * m > 1.0 { h0 / (8.0 * m) } else { h0 };
    let theta = 4.0 * h * m / h0;
    let (c1, c2) = rectangle_constants(l, h);
    let c3 = c3_sq(LemmaVariant::Lipschitz, h, h0, m);
    let c5 = c5_sq(LemmaVariant::Lipschitz, h, h0, h1, m);
    let beta_inv_sq = h1 / h * f64::max(4.0 * c1 * c3, (4.0 * theta * theta * c1 + c2) * c5);
    let value = 2.0 * f64::max(4.0, f64::max(l / (h0 * h1).sqrt(), 8.0 * l * m / h0)) * f64::max(1.0, 8.0 * m) * h1 / h0;
    let mut r = BoundReport::base(TheoremTag::Lipschitz, l, s, h);
    r.c1 = Some(c1);
    r.c2 = Some(c2);
    r.c3sq = Some(c3);
    r.c5sq = Some(c5);
    r.theta = Some(theta);
    r.gammas = ["scaled-energy, Lipschitz", "energy, Lipschitz", "cross term"].map(gamma_use).to_vec();
    r.assembled = beta_inv_sq.sqrt();
    r.value = value;
    r
}

/// `γ1 = 1 + γ2M² = ¼(√(M²+4) + M)²`, with `1/γ1 + 1/γ2 = 1`.
pub fn optimal_pf_gammas(m: f64) -> (f64, Option<f64>) {
    let g1 = 0.25 * ((m * m + 4.0).sqrt() + m).powi(2);
    let g2 = if m > 0.0 { Some(g1 / (g1 - 1.0)) } else { None };
    (g1, g2)
}

/// `L⁻¹‖p‖₀ ≤ C‖∇p‖₀` with `C = (1+M)/(2π)·max(1, 2√(h0h1)/L)·√(h1/h0)`,
/// `H = √(h0h1)`, and `K = √(1 + C²)`.
pub fn pf_constant(g: &ChannelGeometry) -> BoundReport {
    pf_constant_from(g.l(), &g.summary())
}

pub fn pf_constant_from(l: f64, s: &GeometrySummary) -> BoundReport {
    let (h0, h1, m) = (s.h0, s.h1, s.m);
    let h = (h0 * h1).sqrt();
    let (g1, g2) = optimal_pf_gammas(m);
    let ct_sq = f64::max((l / (2.0 * PI)).powi(2), (h / PI).powi(2)) / (l * l);
    let g2m2 = g2.map_or(0.0, |g2| g2 * m * m);
    let c_sq = ct_sq * h1 / h * f64::max(g1 * h / h0, h1 / h + g2m2 * h / h0);
    let value = (1.0 + m) / (2.0 * PI) * f64::max(1.0, 2.0 * h / l) * (h1 / h0).sqrt();
    let mut r = BoundReport::base(TheoremTag::Pf, l, s, h);
    r.gamma_opt = Some((g1, g2));
    r.assembled = c_sq.sqrt();
    r.value = value;
    r.k = Some((1.0 + value * value).sqrt());
    r
}

/// Every applicable report; among the inf-sup bounds the smaller `β⁻¹` is
/// marked recommended.
pub fn all_bounds(g: &ChannelGeometry) -> Vec<BoundReport> {
    let mut out = Vec::new();
    let lip = beta_inv_lipschitz_from(g.l(), &g.summary());
    match beta_inv_c11(g) {
        Ok(mut c11) => {
            let mut lip = lip;
            if c11.value <= lip.value {
                c11.recommended = true;
            } else {
                lip.recommended = true;
            }
            out.push(c11);
            out.push(lip);
        }
        Err(_) => {
            let mut lip = lip;
            lip.recommended = true;
            out.push(lip);
        }
    }
    let mut pf = pf_constant(g);
    pf.recommended = true;
    out.push(pf);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn built_in_gammas_admissible() {
        check_weight_vectors().unwrap();
        for (_, g) in WEIGHT_VECTORS {
            assert!(inverse_sum(g) <= 1.0 + GAMMA_SUM_TOL);
        }
    }

    #[test]
    fn gamma_check_cases() {
        let one = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(gamma_check(&[2.0, 2.0], &[one, one]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(gamma_check(&[1.5, 1.5], &[one, one]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (_, g) in WEIGHT_VECTORS {
            for _ in 0..200 {
                let w: Vec<Complex64> = g.iter().map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                assert!(gamma_check(g, &w).unwrap() >= -1e-14);
            }
        }
    }

    #[test]
    fn c11_reference_values() {
        let r = beta_inv_c11(&ChannelGeometry::constant(1.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(r.value, 9.0, max_relative = 1e-15);
        assert_relative_eq!(r.assembled, 9.0, max_relative = 1e-15);
        let r = beta_inv_c11(&ChannelGeometry::constant(10.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(r.value, 22.5, max_relative = 1e-15);
        assert!(beta_inv_c11(&ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap()).is_err());
    }

    #[test]
    fn lipschitz_reference_values() {
        let r = beta_inv_lipschitz(&ChannelGeometry::constant(1.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(r.value, 8.0, max_relative = 1e-15);
        assert_eq!(r.theta, Some(0.0));
        assert_eq!(r.h_ref, 1.0);
        let r = beta_inv_lipschitz(&ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap()).unwrap();
        assert_relative_eq!(r.value, 512.0, max_relative = 1e-15);
        assert_relative_eq!(r.theta.unwrap(), 0.5, max_relative = 1e-15);
        assert!(r.assembled <= r.value);
    }

    #[test]
    fn pf_reference_values() {
        let r = pf_constant(&ChannelGeometry::constant(1.0, 1.0).unwrap());
        assert_relative_eq!(r.value, 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(r.k.unwrap(), (1.0 + 1.0 / (PI * PI)).sqrt(), max_relative = 1e-15);
        assert_eq!(r.gamma_opt, Some((1.0, None)));
        let r = pf_constant(&ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap());
        let m = PI / 2.0;
        let expected = (1.0 + m) / (2.0 * PI) * f64::max(1.0, 2.0 * (0.75f64 * 1.25).sqrt()) * (1.25f64 / 0.75).sqrt();
        assert_relative_eq!(r.value, expected, max_relative = 1e-14);
        let (g1, g2) = r.gamma_opt.unwrap();
        let g2 = g2.unwrap();
        assert_abs_diff_eq!(1.0 / g1 + 1.0 / g2, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g1, 1.0 + g2 * m * m, max_relative = 1e-13);
        assert!(g1 <= (1.0 + m).powi(2));
    }

    fn sample_geometries() -> Vec<ChannelGeometry> {
        vec![
            ChannelGeometry::constant(1.0, 1.0).unwrap(),
            ChannelGeometry::constant(7.0, 0.3).unwrap(),
            ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap(),
            ChannelGeometry::cosine(3.0, 0.5, -0.4).unwrap(),
            ChannelGeometry::gap(1.0, 0.01, None).unwrap(),
            ChannelGeometry::gap(1.0, 0.3, Some(0.05)).unwrap(),
            ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap(),
            ChannelGeometry::sawtooth(2.0, 0.9, 1.0).unwrap(),
            ChannelGeometry::sampled(1.0, vec![[0.0, 1.0], [0.2, 0.3], [0.6, 1.4], [1.0, 1.0]]).unwrap(),
        ]
    }

    #[test]
    fn assembled_never_exceeds_closed_form() {
        for g in sample_geometries() {
            for r in all_bounds(&g) {
                assert!(r.assembled <= r.value * (1.0 + 1e-12), "{:?} {} > {}", r.theorem, r.assembled, r.value);
                if let Some(t) = r.theta {
                    assert!(t <= 0.5 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn exactly_one_recommended_infsup_bound() {
        for g in sample_geometries() {
            let rs = all_bounds(&g);
            let n = rs.iter().filter(|r| r.theorem != TheoremTag::Pf && r.recommended).count();
            assert_eq!(n, 1);
            let best = rs.iter().filter(|r| r.theorem != TheoremTag::Pf).map(|r| r.value).fold(f64::INFINITY, f64::min);
            assert!(rs.iter().any(|r| r.recommended && r.value == best));
        }
    }

    #[test]
    fn scale_invariance() {
        for s in [0.1, 3.0, 17.0] {
            let pairs = [
                (ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap(), ChannelGeometry::cosine(s, s, 0.25 * s).unwrap()),
                (ChannelGeometry::sawtooth(1.0, 0.5, 1.0).unwrap(), ChannelGeometry::sawtooth(s, 0.5 * s, s).unwrap()),
                (ChannelGeometry::gap(1.0, 0.1, None).unwrap(), ChannelGeometry::new(s, crate::geometry::Family::Gap { h0: 0.1 * s, w: None, top: s }).unwrap()),
            ];
            for (a, b) in pairs {
                let (ra, rb) = (all_bounds(&a), all_bounds(&b));
                for (x, y) in ra.iter().zip(&rb) {
                    assert_relative_eq!(x.value, y.value, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn report_json_has_all_fields() {
        let r = beta_inv_c11(&ChannelGeometry::cosine(1.0, 1.0, 0.25).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["theorem", "L", "h0", "h1", "M", "m2sq", "H", "c1", "c3sq", "c4sq", "c5sq", "gammas", "assembled", "value"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: BoundReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
