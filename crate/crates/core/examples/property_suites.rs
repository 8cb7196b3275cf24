//! Every randomized suite at a small trial count, with per-check minima.
//!
//! ```text
//! cargo run --release --example property_suites -- 500 7
//! ```

use channel_infsup::verify::{run_suite, Suite};

fn main() -> channel_infsup::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    for suite in Suite::ALL {
        let r = run_suite(suite, seed, trials)?;
        println!("{} ({}):", r.suite, if r.passed { "pass" } else { "FAIL" });
        for c in &r.checks {
            println!("  {:<22} n = {:>6}  min residual {:.3e}", c.check, c.count, c.min_residual);
        }
        for n in &r.notes {
            println!("  {n}");
        }
        for b in &r.failures {
            println!("  repro: {}", serde_json::to_string(b)?);
        }
    }
    Ok(())
}
