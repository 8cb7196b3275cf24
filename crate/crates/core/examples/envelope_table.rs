//! Window certificate search: the reference table at 8.9, the table at a
//! lower threshold, and the smallest threshold with a gap-free chain.
//!
//! ```text
//! cargo run --release --example envelope_table
//! ```

use channel_infsup::window::{breakdown_threshold, compare_reference, default_candidates, search, EnvelopeTable};

fn show(t: &EnvelopeTable) {
    println!("c_thresh = {}: {} windows over ({:.4}, {:.2})", t.c_thresh, t.len(), t.covered.0, t.covered.1);
    println!("   k1    j0        t     nu_min     nu_max");
    for w in &t.certificates {
        println!("{:>5} {:>5} {:.6} {:>10.4} {:>10.4}", w.k1, w.j0, w.t, w.nu_min, w.nu_max);
    }
}

fn main() -> channel_infsup::Result<()> {
    let reference = search(8.9)?;
    show(&reference);
    let issues = compare_reference(&reference);
    println!("reference rows: {}\n", if issues.is_empty() { "match".to_string() } else { issues.join("; ") });

    show(&search(5.9)?);

    let c = breakdown_threshold(default_candidates(), 5.0, 7.0, 1e-4)?;
    println!("\nsmallest threshold with a gap-free chain: {c:.4}");
    match search(c - 0.01) {
        Err(e) => println!("at {:.4}: {e}", c - 0.01),
        Ok(t) => println!("at {:.4}: unexpectedly covered by {} windows", c - 0.01, t.len()),
    }
    Ok(())
}
