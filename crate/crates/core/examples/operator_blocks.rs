//! Leading blocks of the sine-to-cosine operator and their tail norms.

use channel_infsup::fourier_ops::{block, frobenius_tail_bound, tail_norm, truncated_tail_frobenius_sq};

fn main() -> channel_infsup::Result<()> {
    let b = block(3, 4)?;
    println!("E block {}x{} (rows k = 0..{}, columns j = 1..={}):", b.rows(), b.cols(), b.rows(), b.cols());
    for k in 0..b.rows() {
        let row: Vec<String> = (0..b.cols()).map(|c| format!("{:>9.5}", b.matrix()[(k, c)])).collect();
        println!("  {}", row.join(" "));
    }
    println!("singular values: {:?}", b.singular_values());

    println!("\n k1  j0   t(k1, j0)");
    for (k1, j0) in [(1, 1), (3, 3), (6, 8), (13, 17), (25, 37), (50, 76), (99, 155)] {
        println!("{k1:>3} {j0:>3}   {:.7}", tail_norm(k1, j0)?);
    }

    let bound = frobenius_tail_bound(57, 171)?;
    let exact = truncated_tail_frobenius_sq(57, 171, 100_000).sqrt();
    println!("\nFrobenius tail at (57, 171): bound {bound:.7}, truncated sum {exact:.7}");
    Ok(())
}
