//! The narrow-gap channel and the piecewise-linear pressure that shows the
//! `h0^{-3/2}` growth of `β⁻¹` cannot be improved.
//!
//! On the unit period, `p = −1` on `[0, 3/8]`, rises with slope 16 over
//! `[3/8, 1/2]`, equals `+1` on `[1/2, 7/8]` and falls back over
//! `[7/8, 1]`. The two sloped pieces sit over the flats of height `h0`.

use serde::Serialize;

use crate::bounds::beta_inv_c11;
use crate::error::{domain, Error, Result};
use crate::geometry::ChannelGeometry;
use crate::quadrature::composite_gauss;

/// Pressure on the gap channel of period 1 and top height 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPressure {
    h0: f64,
    geometry: ChannelGeometry,
}

impl GapPressure {
    pub fn new(h0: f64) -> Result<Self> {
        Self::with_width(h0, None)
    }

    /// `w` is the ramp width of the channel profile; `None` uses `1/8`.
    pub fn with_width(h0: f64, w: Option<f64>) -> Result<Self> {
        if !(h0 > 0.0 && h0 < 1.0) {
            return domain(format!("gap height h0 = {h0} must lie in (0, 1)"));
        }
        Ok(Self { h0, geometry: ChannelGeometry::gap(1.0, h0, w)? })
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    /// `(p, p_x)` at `x`; `p` does not depend on `y`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let x = x.rem_euclid(1.0);
        if x <= 0.375 {
            (-1.0, 0.0)
        } else if x <= 0.5 {
            (-1.0 + 16.0 * (x - 0.375), 16.0)
        } else if x <= 0.875 {
            (1.0, 0.0)
        } else {
            (1.0 - 16.0 * (x - 0.875), -16.0)
        }
    }

    fn integrate(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut breaks = self.geometry.breakpoints();
        breaks.extend([0.375, 0.5, 0.875]);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        composite_gauss(&breaks, 2048)
            .iter()
            .map(|&(x, w)| {
                let (p, px) = self.eval(x);
                w * f(p, px, self.geometry.h(x))
            })
            .sum()
    }

    /// `∫_Ω p dA`.
    pub fn mean(&self) -> f64 {
        self.integrate(|p, _, h| p * h)
    }

    /// `‖p‖₀,Ω²`, exact in `y`.
    pub fn l2_sq(&self) -> f64 {
        self.integrate(|p, _, h| p * p * h)
    }

    /// `‖p_x‖₀,Ω²`.
    pub fn px_l2_sq(&self) -> f64 {
        self.integrate(|_, px, h| px * px * h)
    }
}

/// `‖∇p‖₋₁,Ω ≤ √8·h0^{3/2}`: slope 16 over a region of area `h0/4`, then
/// the Poincaré bound on that region, whose height is `h0`.
pub fn grad_dual_upper(h0: f64) -> f64 {
    8f64.sqrt() * h0.powf(1.5)
}

/// The chain `16·√(h0/4)·(h0/√8)` that gives [`grad_dual_upper`].
pub fn grad_dual_chain(h0: f64) -> f64 {
    16.0 * (h0 / 4.0).sqrt() * (h0 / 8f64.sqrt())
}

/// `‖p‖₀,Ω / (√8·h0^{3/2})`, a lower bound on `β⁻¹` for the gap channel.
pub fn beta_inv_lower(h0: f64) -> Result<f64> {
    let p = GapPressure::new(h0)?;
    Ok(p.l2_sq().sqrt() / grad_dual_upper(h0))
}

/// `L⁻²‖p‖₀² − (h1/(256h0))‖p_x‖₀²`, nonnegative when the Poincaré constant
/// is at least `(1/16)√(h1/h0)`.
pub fn pf_optimality_check(h0: f64) -> Result<f64> {
    let p = GapPressure::new(h0)?;
    Ok(p.l2_sq() - p.px_l2_sq() / (256.0 * h0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub h0: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `log(lower bound)` against `log(h0)`.
    pub exponent: f64,
}

impl ScalingStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h0,lower_bound,upper_bound,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r.h0, r.lower_bound, r.upper_bound, r.ratio));
        }
        s
    }
}

/// Smallest allowed `max(h0)/min(h0)` for a scaling fit.
pub const MIN_SCALING_RANGE: f64 = 8.0;

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Lower and upper `β⁻¹` for each gap height, plus the fitted exponent of
/// the lower bound. Needs at least four distinct heights spanning a factor
/// of [`MIN_SCALING_RANGE`].
pub fn scaling_study(h0_list: &[f64]) -> Result<ScalingStudy> {
    let mut hs = h0_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.dedup();
    if hs.len() < 4 {
        return Err(Error::InsufficientRange(format!("need at least 4 distinct h0 values, got {}", hs.len())));
    }
    let (hi, lo) = (hs[0], hs[hs.len() - 1]);
    if !(lo > 0.0 && hi < 1.0) {
        return domain(format!("h0 values must lie in (0, 1), got [{lo}, {hi}]"));
    }
    if hi / lo < MIN_SCALING_RANGE {
        return Err(Error::InsufficientRange(format!("h0 values span a factor {} < {MIN_SCALING_RANGE}", hi / lo)));
    }
    let rows = hs
        .iter()
        .map(|&h0| {
            let lower = beta_inv_lower(h0)?;
            let upper = beta_inv_c11(GapPressure::new(h0)?.geometry())?.value;
            Ok(ScalingRow { h0, lower_bound: lower, upper_bound: upper, ratio: lower / upper })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.h0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.lower_bound.ln()).collect();
    Ok(ScalingStudy { exponent: least_squares_slope(&xs, &ys), rows })
}
