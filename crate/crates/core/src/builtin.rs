//! Builtin test functions, each with closed-form derivatives to order 6.
//!
//! | id                | f(t)            | moduli          |
//! |-------------------|-----------------|-----------------|
//! | `exp-neg`         | e^{-t}          | analytic        |
//! | `inv-one-plus`    | 1/(1+t)         | analytic        |
//! | `t-over-one-plus` | t/(1+t)         | analytic        |
//! | `one`, `t`, `t2`, `t3`, `t4` | t^m  | analytic where bounded or affine |
//! | `sin-exp-neg`     | sin(t) e^{-t}   | grid only       |
//!
//! The analytic moduli hold because every level of the first three functions
//! is monotone with a monotone, fixed-sign next derivative, so both the first
//! and second differences are largest at `x = 0` and increase with `h`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use crate::error::{Error, Result};
use crate::test_function::{FunctionLevel, TestFunction};

pub const BUILTIN_ORDER: usize = 6;

pub const BUILTIN_IDS: &[&str] = &[
    "exp-neg",
    "inv-one-plus",
    "t-over-one-plus",
    "one",
    "t",
    "t2",
    "t3",
    "t4",
    "sin-exp-neg",
];

pub fn builtin(id: &str) -> Result<TestFunction> {
    match id {
        "exp-neg" => exp_neg(),
        "inv-one-plus" => inv_one_plus(),
        "t-over-one-plus" => t_over_one_plus(),
        "sin-exp-neg" => sin_exp_neg(),
        "one" => monomial(0),
        "t" => monomial(1),
        "t2" => monomial(2),
        "t3" => monomial(3),
        "t4" => monomial(4),
        other => Err(Error::Config(format!(
            "unknown function `{other}` (known: {})",
            BUILTIN_IDS.join(", ")
        ))),
    }
}

/// `t^m` under its conventional id.
pub fn monomial(m: u32) -> Result<TestFunction> {
    let id = match m {
        0 => "one".to_string(),
        1 => "t".to_string(),
        m => format!("t{m}"),
    };
    let mut coeffs = vec![0; m as usize + 1];
    coeffs[m as usize] = 1;
    TestFunction::polynomial(id, coeffs)
}

pub fn exp_neg() -> Result<TestFunction> {
    let levels = (0..=BUILTIN_ORDER)
        .map(|j| {
            let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            FunctionLevel::new(move |t: f64| sign * (-t).exp(), 0.0)
                .bounded(1.0)
                .with_omega1(|d: f64| -(-d).exp_m1())
                .with_omega2(|d: f64| (-d).exp_m1().powi(2))
        })
        .collect();
    TestFunction::from_levels("exp-neg", levels)
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// Level `j` of `1/(1+t)` times `scale`: `scale (-1)^j j! (1+t)^{-(j+1)}`.
fn reciprocal_level(j: usize, scale: f64) -> FunctionLevel {
    let fact = factorial(j);
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let p = -(j as i32 + 1);
    FunctionLevel::new(move |t: f64| scale * sign * fact * (1.0 + t).powi(p), 0.0)
        .bounded(fact)
        .with_omega1(move |d: f64| fact * (1.0 - (1.0 + d).powi(p)))
        .with_omega2(move |d: f64| {
            fact * (1.0 - 2.0 * (1.0 + d).powi(p) + (1.0 + 2.0 * d).powi(p)).abs()
        })
}

pub fn inv_one_plus() -> Result<TestFunction> {
    let levels = (0..=BUILTIN_ORDER).map(|j| reciprocal_level(j, 1.0)).collect();
    TestFunction::from_levels("inv-one-plus", levels)
}

/// `t/(1+t) = 1 - 1/(1+t)`: same moduli as `1/(1+t)` at every level.
pub fn t_over_one_plus() -> Result<TestFunction> {
    let mut levels = vec![FunctionLevel::new(|t: f64| t / (1.0 + t), 0.0)
        .bounded(1.0)
        .with_omega1(|d: f64| d / (1.0 + d))
        .with_omega2(|d: f64| 2.0 * d * d / ((1.0 + d) * (1.0 + 2.0 * d)))];
    levels.extend((1..=BUILTIN_ORDER).map(|j| reciprocal_level(j, -1.0)));
    TestFunction::from_levels("t-over-one-plus", levels)
}

/// `sin(t) e^{-t}`; level `j` is `2^{j/2} e^{-t} sin(t + 3 pi j / 4)`.
pub fn sin_exp_neg() -> Result<TestFunction> {
    let levels = (0..=BUILTIN_ORDER)
        .map(|j| {
            let amp = SQRT_2.powi(j as i32);
            let phase = 3.0 * FRAC_PI_4 * j as f64;
            FunctionLevel::new(move |t: f64| amp * (-t).exp() * (t + phase).sin(), 0.0)
                .bounded(amp)
        })
        .collect();
    TestFunction::from_levels("sin-exp-neg", levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite difference of level j, compared against level j+1.
    fn check_derivatives(f: &TestFunction) {
        let h = 1e-5;
        for j in 0..BUILTIN_ORDER {
            for &t in &[0.3, 1.0, 2.5, 7.0] {
                let fd = (f.eval_derivative(j, t + h).unwrap() - f.eval_derivative(j, t - h).unwrap())
                    / (2.0 * h);
                let exact = f.eval_derivative(j + 1, t).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "{} level {j} at {t}: fd {fd} vs {exact}",
                    f.id()
                );
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for id in BUILTIN_IDS {
            let f = builtin(id).unwrap();
            assert!(f.order() >= BUILTIN_ORDER, "{id}");
            check_derivatives(&f);
        }
    }

    #[test]
    fn analytic_moduli_dominate_dense_differences() {
        // Brute-force sup over a dense (x, h) grid must not exceed the
        // closed form, and must come close to it.
        for id in ["exp-neg", "inv-one-plus", "t-over-one-plus"] {
            let f = builtin(id).unwrap();
            for j in 0..3 {
                let g = f.derivative(j).unwrap();
                for &delta in &[0.05, 0.3, 1.0] {
                    let mut w1: f64 = 0.0;
                    let mut w2: f64 = 0.0;
                    for ix in 0..=2000 {
                        let x = 20.0 * ix as f64 / 2000.0;
                        for ih in 1..=64 {
                            let h = delta * ih as f64 / 64.0;
                            w1 = w1.max((g.eval(x + h) - g.eval(x)).abs());
                            w2 = w2.max((g.eval(x + 2.0 * h) - 2.0 * g.eval(x + h) + g.eval(x)).abs());
                        }
                    }
                    let a1 = g.analytic_omega1(delta).unwrap();
                    let a2 = g.analytic_omega2(delta).unwrap();
                    assert!(w1 <= a1 * (1.0 + 1e-12) && w1 >= a1 * (1.0 - 1e-9), "{id}^{j} w1 {w1} {a1}");
                    assert!(w2 <= a2 * (1.0 + 1e-9) && w2 >= a2 * (1.0 - 1e-6), "{id}^{j} w2 {w2} {a2}");
                }
            }
        }
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(builtin("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn sup_bounds_hold() {
        for id in ["exp-neg", "inv-one-plus", "t-over-one-plus", "sin-exp-neg"] {
            let f = builtin(id).unwrap();
            for j in 0..=BUILTIN_ORDER {
                let g = f.derivative(j).unwrap();
                let sup = g.sup_norm().unwrap();
                for i in 0..4000 {
                    let t = i as f64 * 0.005;
                    assert!(g.eval(t).abs() <= sup * (1.0 + 1e-12), "{id}^{j} at {t}");
                }
            }
        }
    }
}
