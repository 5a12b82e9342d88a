//! First- and second-modulus error bounds for `M^(r)_{n,k}`.

use gamma_ops::builtin;
use gamma_ops::verify::{check_first_modulus_bound, check_second_modulus_bound, REFERENCE_C};
use gamma_ops::QuadratureConfig;

fn main() -> gamma_ops::Result<()> {
    let q = QuadratureConfig::default();
    let f = builtin::t_over_one_plus()?;
    println!("{:>4} {:>2} {:>2}  {:>12} {:>12} {:>12}  {:>10}", "n", "k", "r", "lhs", "2w(sqrt d)", "slack", "emp. C");
    for n in [10, 20, 50, 100, 200] {
        for (k, r) in [(1, 0), (2, 1)] {
            let first = check_first_modulus_bound(&f, 1.0, n, k, r, &q)?;
            let second = check_second_modulus_bound(&f, 1.0, n, k, r, &q)?;
            println!(
                "{n:>4} {k:>2} {r:>2}  {:>12.4e} {:>12.4e} {:>12.4e}  {:>10.4}",
                first.lhs,
                first.rhs,
                first.slack,
                second.empirical_c.unwrap_or(f64::NAN)
            );
        }
    }
    println!("reference C = {REFERENCE_C}");

    // Grid-only functions have no analytic modulus to bound with.
    let s = builtin::sin_exp_neg()?;
    match check_first_modulus_bound(&s, 1.0, 50, 1, 0, &q) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("sin-exp-neg: {e}"),
    }
    Ok(())
}
