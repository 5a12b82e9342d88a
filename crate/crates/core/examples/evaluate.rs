//! Quadrature evaluation of `M_{n,k}`, its derivative form, `M*` and `G_n`.

use gamma_ops::builtin;
use gamma_ops::operator_eval::{
    apply, apply_derivative, apply_gn, apply_mstar, make_special, SpecialOperator,
};
use gamma_ops::{OperatorParams, QuadratureConfig, SplitPolicy};

fn main() -> gamma_ops::Result<()> {
    let q = QuadratureConfig::default();
    let f = builtin::exp_neg()?;
    let x = 1.0;

    for n in [10, 50, 200, 1000] {
        let p = OperatorParams::new(n, 1, 0)?;
        println!("M_{{{n},1}}(e^-t; 1) = {:.12}", apply(&p, &f, x, &q)?);
    }
    println!("e^-1            = {:.12}", (-1.0f64).exp());

    let p = OperatorParams::new(40, 2, 1)?;
    println!("M^(1)_{{40,2}}(e^-t; 1)    = {:.12}", apply_derivative(&p, &f, x, &q)?);
    println!("M*_{{40,2,1}}(-e^-t; 1)    = {:.12}", apply_mstar(&p, &f.derivative(1)?, x, &q)?);

    let lupas = make_special(SpecialOperator::L, 30)?;
    println!("L_30 -> {lupas}: {:.12}", apply(&lupas, &builtin::inv_one_plus()?, 2.0, &q)?);
    println!("G_30(1/(1+t); 2)     = {:.12}", apply_gn(30, &builtin::inv_one_plus()?, 2.0, &q)?);

    // Same value under either panel layout.
    let uniform = QuadratureConfig {
        split_policy: SplitPolicy::Uniform,
        ..q
    };
    let s = builtin::sin_exp_neg()?;
    let p = OperatorParams::new(100, 3, 0)?;
    println!(
        "sin(t)e^-t at x=2: mode-centered {:.15}  uniform {:.15}",
        apply(&p, &s, 2.0, &q)?,
        apply(&p, &s, 2.0, &uniform)?
    );
    Ok(())
}
