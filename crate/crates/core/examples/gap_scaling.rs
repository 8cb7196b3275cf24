//! The narrow-gap channel: exhibited lower bound on β⁻¹, the certified upper
//! bound, and the fitted exponent in h0.

use channel_infsup::gap::{grad_dual_upper, pf_optimality_check, scaling_study, GapPressure};

fn main() -> channel_infsup::Result<()> {
    let hs = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];
    let study = scaling_study(&hs)?;
    println!("      h0      |p|   |grad p|-1 <=   lower     upper    ratio   PF residual");
    for r in &study.rows {
        let p = GapPressure::new(r.h0)?;
        println!(
            "{:>8.4} {:>8.5} {:>14.6} {:>9.3} {:>9.1} {:>8.2e} {:>11.5}",
            r.h0,
            p.l2_sq().sqrt(),
            grad_dual_upper(r.h0),
            r.lower_bound,
            r.upper_bound,
            r.ratio,
            pf_optimality_check(r.h0)?
        );
    }
    println!("fitted exponent of the lower bound: {:.4}", study.exponent);
    Ok(())
}
