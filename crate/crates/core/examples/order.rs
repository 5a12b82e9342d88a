//! Decay order of the central moments: `n^{floor((m+1)/2)} |M*((t-x)^m)|`.

use gamma_ops::verify::{check_order_lemma, doubling_ladder};

fn main() -> gamma_ops::Result<()> {
    let ladder = doubling_ladder(20, 640)?;
    for (m, k, r) in [(1, 1, 0), (2, 1, 0), (3, 1, 0), (4, 1, 0), (4, 3, 2), (5, 2, 1)] {
        let rep = check_order_lemma(m, k, r, &ladder)?;
        println!("m={m} k={k} r={r} pass={} degenerate={}", rep.pass, rep.degenerate);
        for row in &rep.rows {
            println!(
                "  n={:<4} {:>24}  scaled {:.6}  ratio {}",
                row.n,
                row.coefficient.to_string(),
                row.scaled,
                row.ratio.map(|v| format!("{v:.4}")).unwrap_or_default()
            );
        }
    }
    Ok(())
}
