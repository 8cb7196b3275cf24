//! A rectangle field pulled back onto a curved channel: quadrature norms and
//! the residuals of the transfer and Poincaré bounds.

use channel_infsup::geometry::{check_lem_a3_a4_a5, pf_channel, quad_norms, ChannelGeometry, LemmaVariant, MappedField, QuadConfig};
use channel_infsup::rectangle::random_field;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> channel_infsup::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = QuadConfig::default();
    for g in [ChannelGeometry::cosine(1.0, 1.0, 0.25)?, ChannelGeometry::sawtooth(1.0, 0.5, 1.0)?] {
        let s = g.summary();
        let u = MappedField::new(g.clone(), random_field(&mut rng, 1.0, s.h0, 2, 6)?)?;
        let n = quad_norms(&u);
        println!("{:?}", g.family());
        println!(
            "  |u|^2 = {:.6}  |grad u|^2 = {:.6}  area = {:.6}  drift = {:.1e}  grid {}x{}",
            n.l2_sq, n.energy_sq, n.area, n.drift, n.xi_points, n.eta_points
        );
        println!("  Poincare residual {:.6}", pf_channel(&u, cfg));
        let r = check_lem_a3_a4_a5(&u, LemmaVariant::Lipschitz, cfg)?;
        println!("  Lipschitz transfer residuals: {:.6} {:.6}", r.r3, r.r5);
        match check_lem_a3_a4_a5(&u, LemmaVariant::C11, cfg) {
            Ok(r) => println!("  C11 transfer residuals: {:.6} {:?} {:.6}", r.r3, r.r4, r.r5),
            Err(e) => println!("  C11 variant: {e}"),
        }
    }
    Ok(())
}
