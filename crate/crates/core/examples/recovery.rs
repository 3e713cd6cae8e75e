//! Basis pursuit, dual certificates and the null-space property on one matrix.

use nalgebra::DVector;
use neighborly::ensembles::{generate_matrix, EnsembleSpec};
use neighborly::recovery::*;

fn main() -> neighborly::Result<()> {
    let a = generate_matrix(&EnsembleSpec::Gaussian, 10, 16, 11)?;

    let s: SignedSupport = "2:+,7:-".parse()?;
    let z = signed_vector(a.cols(), &s, &[1.5, 0.5]);
    let out = exact_recovery_trial(&a, &z)?;
    let (cert, ok) = recovery_verdict(&a, &s)?;
    println!("support {s}: basis pursuit success = {}, certificate gamma = {:?} ({:?}), verdict = {ok}", out.success, cert.gamma, cert.class);

    for m in 1..=3 {
        let r = all_sparse_recovery_check(&a, m, DEFAULT_RECOVERY_BUDGET)?;
        let nsp = nullspace_property_check(&a, m)?;
        println!(
            "m = {m}: {} signed supports, {} certified, {} failed; NSP pass = {} ({} violating supports)",
            r.signed_supports_checked, r.certified, r.failed, nsp.pass, nsp.failures.len()
        );
    }

    // l1 decoding: y = A^T t + sparse corruption
    let t = DVector::from_fn(a.rows(), |i, _| i as f64 - 4.0);
    let mut y = a.entries().transpose() * &t;
    y[3] += 5.0;
    let decoded = decode_l1(&a, &y)?;
    println!("decode error = {:.2e}", (decoded - t).amax());
    Ok(())
}
