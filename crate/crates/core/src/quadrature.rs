//! Cached Gauss-Legendre rules and a few composite rules built from them.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order must be positive"));
            Arc::new(rule.as_node_weight_pairs().to_vec())
        })
        .clone()
}

/// Gauss-Legendre mapped to `[a, b]`.
pub fn gauss_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(order).iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

/// Periodic trapezoid rule with `n` points on `[0, l)`.
pub fn trapezoid_periodic(n: usize, l: f64) -> Vec<(f64, f64)> {
    let w = l / n as f64;
    (0..n).map(|i| (i as f64 * w, w)).collect()
}

const PANEL_ORDER: usize = 8;

/// Composite Gauss over `[breaks[0], breaks.last()]`, never straddling a
/// break, with about `n` nodes in total.
pub fn composite_gauss(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let total = breaks.last().unwrap() - breaks[0];
    let panels = (n / PANEL_ORDER).max(1);
    let mut out = Vec::with_capacity(n + PANEL_ORDER * breaks.len());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let m = ((b - a) / total * panels as f64).ceil().max(1.0) as usize;
        let step = (b - a) / m as f64;
        for i in 0..m {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == m { b } else { lo + step };
            out.extend(gauss_on(PANEL_ORDER, lo, hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rules_integrate_known_functions() {
        let g: f64 = gauss_on(12, 0.0, 2.0).iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert_relative_eq!(g, 2f64.powi(8) / 8.0, max_relative = 1e-14);
        let t: f64 = trapezoid_periodic(16, 3.0)
            .iter()
            .map(|&(x, w)| w * (2.0 * std::f64::consts::PI * 3.0 * x / 3.0).cos().powi(2))
            .sum();
        assert_relative_eq!(t, 1.5, max_relative = 1e-14);
        let c: f64 = composite_gauss(&[0.0, 0.3, 1.0], 64).iter().map(|&(x, w)| w * x.abs().sqrt()).sum();
        assert_relative_eq!(c, 2.0 / 3.0, max_relative = 1e-4);
    }
}
