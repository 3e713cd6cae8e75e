//! Bound calculators with user-supplied constants, and one Monte Carlo
//! comparison of a Weibull tail against its bound.

use neighborly::bounds::*;
use neighborly::randsrc::RngStream;

fn main() -> neighborly::Result<()> {
    let k = BoundConstants::default();
    println!("constants are user-supplied: C = {}, c = {}", k.c_big, k.c_small);
    for n in [100.0, 1000.0, 10_000.0] {
        let nb = neighborliness_threshold(n, 10.0 * n, &k)?;
        let rip = rip_bound_rhs(n, 10.0 * n, 2.0, &k)?;
        println!("n = {n:>6}: m_bar = {:>5}, RIP bound at m = 2 is {:.4} (vacuous {})", nb.m_bar, rip.rhs, rip.vacuous);
    }

    let a = vec![1.0; 10];
    let sums = weibull_sums(&a, 1.0, 100_000, &mut RngStream::new(5, 0));
    println!("   t    empirical   weibull(c=1/8)   bernstein");
    for t in [2.0, 5.0, 10.0, 15.0] {
        println!(
            "{t:>5} {:>11.5} {:>15.5} {:>11.5}",
            empirical_survival(&sums, t),
            weibull_tail_bound(t, &a, 1.0, 0.125)?,
            bernstein_tail(t, &[2.0; 10], 2.0)?
        );
    }
    Ok(())
}
