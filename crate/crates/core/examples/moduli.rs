//! Moduli of continuity and smoothness, analytic versus grid, and the
//! K-functional upper bound.

use gamma_ops::builtin;
use gamma_ops::moduli::{
    grid_omega1, grid_omega2, k_functional_upper, omega1, omega2, ModulusGrid,
    DEFAULT_SMOOTHING_SCALES,
};
use gamma_ops::TestFunction;

fn main() -> gamma_ops::Result<()> {
    let grid = ModulusGrid::default();
    for id in ["exp-neg", "inv-one-plus", "sin-exp-neg"] {
        let f = builtin::builtin(id)?;
        for delta in [0.05, 0.5] {
            let w1 = omega1(&f, delta, &grid);
            let w2 = omega2(&f, delta, &grid);
            println!(
                "{id:<12} d={delta:<4} w1 {:.6e} ({:?})  grid {:.6e}   w2 {:.6e}  grid {:.6e}",
                w1.value,
                w1.kind,
                grid_omega1(&f, delta, &grid).value,
                w2.value,
                grid_omega2(&f, delta, &grid).value
            );
        }
    }

    let kink = TestFunction::new("kink", |t: f64| (t - 2.0).abs().min(1.0), 0.0)?;
    for f in [builtin::exp_neg()?, kink] {
        for delta in [1e-3, 1e-2, 1e-1] {
            let k = k_functional_upper(&f, delta, &DEFAULT_SMOOTHING_SCALES, &grid);
            println!("K({}, {delta}) <= {:.6e} via {:?}", f.id(), k.value, k.best);
        }
    }
    Ok(())
}
