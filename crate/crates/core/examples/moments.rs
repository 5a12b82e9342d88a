//! Exact moment coefficients of `M_{n,k}` and `M*_{n,k,r}` as rationals.

use gamma_ops::exact_moments::{
    central_moment, closed_form_mstar_central, compare_closed_forms, mstar_central_moment, raw_moment,
};
use gamma_ops::OperatorParams;

fn main() -> gamma_ops::Result<()> {
    let p = OperatorParams::new(10, 2, 0)?;
    println!("{p}");
    for m in 0..=4 {
        println!(
            "  m={m}  raw {:>12}  central {:>14}",
            raw_moment(&p, m)?.to_string(),
            central_moment(&p, m)?.to_string()
        );
    }

    // Closed form versus the binomial-sum oracle for M*.
    let q = OperatorParams::new(20, 1, 1)?;
    for m in 0..=4 {
        let closed = closed_form_mstar_central(&q, m)?;
        let oracle = mstar_central_moment(&q, m)?;
        println!("  {q} m={m}: closed {closed}  oracle {oracle}  equal {}", closed == oracle);
    }

    let checks = compare_closed_forms(5..=30, &[1, 2, 3], &[0, 1, 2], &[0, 1, 2, 3, 4]);
    for m in 0..=4 {
        let of_m: Vec<_> = checks.iter().filter(|c| c.order == m).collect();
        let hits = of_m.iter().filter(|c| c.matches()).count();
        println!("order {m}: {hits}/{} closed forms agree", of_m.len());
    }
    Ok(())
}
