//! Certified C1(ν), C2(ν) on a log grid, as CSV on stdout, next to the
//! envelope max(9, 9/(4ν²)), 9.

use channel_infsup::cli::log_space;
use channel_infsup::window::{envelope_constants, global_c1_c2, search, CertificateCase};

fn main() -> channel_infsup::Result<()> {
    let table = search(8.9)?;
    println!("nu,c1,c2,envelope_c1,envelope_c2,case,k1,j0");
    for nu in log_space(0.2, 600.0, 200) {
        let c = global_c1_c2(nu, &table)?;
        let (e1, e2) = envelope_constants(nu);
        let case = match c.case {
            CertificateCase::SmallNu => "small",
            CertificateCase::Window => "window",
            CertificateCase::LargeNu => "large",
        };
        println!("{nu:.8e},{:.8e},{:.8e},{e1:.8e},{e2:.8e},{case},{},{}", c.c1, c.c2, c.k1, c.j0);
    }
    Ok(())
}
