//! Faces of the symmetric polytope conv(+-X_i), its neighborliness order,
//! and the cross-check against l1 recovery.

use neighborly::ensembles::{generate_matrix, EnsembleSpec};
use neighborly::polytope::*;
use neighborly::recovery::DEFAULT_RECOVERY_BUDGET;

fn main() -> neighborly::Result<()> {
    let a = generate_matrix(&EnsembleSpec::Gaussian, 8, 12, 0)?;
    for mode in [PolytopeMode::Central, PolytopeMode::Positive] {
        let r = neighborliness_order(&a, 4, DEFAULT_RECOVERY_BUDGET, mode)?;
        let first = r.failures_at_next.first().map(|s| s.to_string());
        println!("{mode:?}: verified order {}, first failure {first:?}", r.verified_order);
    }
    let s = "1:+,5:-".parse()?;
    let f = is_face(&a, &s, PolytopeMode::Central)?;
    println!("{s} is a face: {} (margin {:?})", f.is_face, f.margin);

    for m in 1..=3 {
        let d = donoho_cross_check(&a, m)?;
        let t = three_way_check(&a, m, DEFAULT_RECOVERY_BUDGET)?;
        println!(
            "m = {m}: faces {} / recovery {} agree = {}; three-way disagreements {}",
            d.polytope_side,
            d.recovery_side,
            d.agree,
            t.disagreements.len()
        );
    }
    Ok(())
}
