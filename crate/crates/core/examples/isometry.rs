//! Exact and sampled isometry constants, the chaos quantities, and the
//! decomposition delta_m <= B_m^2/n + max | |X_i|^2/n - 1 |.

use neighborly::ensembles::{generate_matrix, EnsembleSpec};
use neighborly::randsrc::RngStream;
use neighborly::rip::*;

fn main() -> neighborly::Result<()> {
    let a = generate_matrix(&EnsembleSpec::Gaussian, 40, 24, 3)?;
    let mut stream = RngStream::new(3, 99);
    println!(" m   delta_exact  delta_sampled   B_m^2/n   rhs      candes");
    for m in 1..=4 {
        let exact = isometry_constant_exact(&a, m, DEFAULT_SUPPORT_BUDGET)?;
        let sampled = isometry_constant_sampled(&a, m, 200, &mut stream)?;
        let chaos = chaos_statistics(&a, m, DEFAULT_SUPPORT_BUDGET)?;
        let dec = rip_decomposition_check(&a, &exact, &chaos)?;
        println!(
            "{m:>2}   {:>10.5}  {:>12.5}   {:>8.5}  {:>7.5}  {}",
            exact.delta,
            sampled.delta,
            dec.b_m_sq_over_n,
            dec.rhs,
            candes_criterion(exact.delta)
        );
    }
    Ok(())
}
