//! Exact dual norms of random rectangle fields, and the truncated inf-sup
//! eigen-oracle against the certified lower bound.

use channel_infsup::rectangle::{check_cor32, check_thm31, dual_norms, infsup_rectangle, random_mean_zero_field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> channel_infsup::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    println!("    L     H      |q|^2    |dx q|-1    |dy q|-1   slack      cor slack");
    for (l, h) in [(1.0, 1.0), (8.0, 1.0), (1.0, 8.0), (20.0, 1.0)] {
        let q = random_mean_zero_field(&mut rng, l, h, 6, 24)?;
        let d = dual_norms(&q)?;
        println!(
            "{l:>5} {h:>5} {:>10.5} {:>11.5} {:>11.5} {:>7.4} {:>14.4}",
            q.l2_sq(),
            d.dx,
            d.dy,
            check_thm31(&q)?,
            check_cor32(&q)?
        );
    }

    println!("\n    L     H   beta(J)   beta(2J)   certified   drift");
    for (l, h) in [(1.0, 1.0), (4.0, 1.0), (1.0, 4.0), (10.0, 1.0)] {
        let r = infsup_rectangle(l, h, 16, 64)?;
        println!(
            "{l:>5} {h:>5} {:>9.5} {:>10.5} {:>11.5} {:>7.1e}{}",
            r.beta,
            r.beta_refined,
            r.certified,
            r.drift,
            if r.under_resolved() { "  under-resolved" } else { "" }
        );
    }
    Ok(())
}
