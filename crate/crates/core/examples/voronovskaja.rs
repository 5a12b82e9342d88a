//! Scaled deviations `E_n` along a doubling ladder, with Richardson
//! extrapolation, on both the quadrature and the exact rational path.

use gamma_ops::builtin;
use gamma_ops::verify::{
    doubling_ladder, voronovskaja_sequence, voronovskaja_sequence_exact, VoronovskajaOptions,
};
use gamma_ops::QuadratureConfig;

fn main() -> gamma_ops::Result<()> {
    let ladder = doubling_ladder(25, 400)?;
    let q = QuadratureConfig::default();
    let opts = VoronovskajaOptions::default();

    for (id, k, r, x) in [("exp-neg", 1, 0, 1.0), ("t-over-one-plus", 2, 1, 0.5), ("sin-exp-neg", 3, 2, 2.0)] {
        let f = builtin::builtin(id)?;
        let rep = voronovskaja_sequence(&f, x, k, r, &ladder, &q, &opts)?;
        println!("{id} k={k} r={r} x={x}  target {:.8}", rep.target);
        for (n, e) in rep.n_values.iter().zip(&rep.scaled_deviations) {
            println!("  n={n:<4} E_n = {e:.8}");
        }
        println!(
            "  extrapolated {:.8}  converged {}  monotone {}",
            rep.extrapolated.unwrap_or(f64::NAN),
            rep.converged,
            rep.approaches_monotonically()
        );
    }

    let t2 = builtin::monomial(2)?;
    let exact = voronovskaja_sequence_exact(&t2, 1.0, 1, 0, &ladder, true)?;
    println!("t^2 exact:");
    for (n, e) in exact.n_values.iter().zip(&exact.scaled_deviations) {
        println!("  n={n:<4} E_n = {e}");
    }
    println!("  extrapolated {}", exact.extrapolated.unwrap());
    Ok(())
}
