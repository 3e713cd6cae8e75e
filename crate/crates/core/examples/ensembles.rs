//! Draw matrices from each ensemble and look at their column norms.

use neighborly::ensembles::{check_h2, generate_matrix, EnsembleSpec};

fn main() -> neighborly::Result<()> {
    let specs = ["gaussian", "rademacher", "sphere", "exponential", "iid_entries(r=1.5)", "lp_ball(p=1)", "masked_bernoulli"];
    println!("{:<20} {:>10} {:>8}", "ensemble", "max|dev|", "H2");
    for s in specs {
        let spec: EnsembleSpec = s.parse()?;
        let a = generate_matrix(&spec, 200, 50, 1)?;
        let h2 = check_h2(&a);
        println!("{:<20} {:>10.4} {:>8}", s, h2.h2_max_deviation, h2.h2_pass);
    }
    Ok(())
}
