//! Numerical evaluation of `M_{n,k}`, `M^(r)_{n,k}`, `M*_{n,k,r}` and `G_n`.
//!
//! With `t = x v` and `u = v / (1 + v)` the operator `M_{n,k}` becomes the
//! expectation of `f(x u / (1-u))` under a `Beta(n-k+1, n+1)` law, and
//! `M*_{n,k,r}` the same under `Beta(n-k+r+1, n-r+1)`. `G_n(f; x)` is the
//! expectation of `f(n x / s)` with `s ~ Gamma(n+1, 1)`. All weights are
//! evaluated in log space.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exact_moments::{b_norm, OperatorParams};
use crate::quadrature::{find_window, integrate_window, QuadratureConfig};
use crate::test_function::TestFunction;

fn check_point(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn ln_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `log K_{n,k}(x, t)`, finite even where `K` itself leaves the `f64` range.
pub fn kernel_log(p: &OperatorParams, x: f64, t: f64) -> Result<f64> {
    check_point("x", x)?;
    check_point("t", t)?;
    let (n, k) = (p.n(), p.k());
    let ln_beta = ln_factorial(2 * n - k + 1) - ln_factorial(n) - ln_factorial(n - k);
    Ok(ln_beta + (n as f64 + 1.0) * x.ln() + (n - k) as f64 * t.ln()
        - (2 * n - k + 2) as f64 * (x + t).ln())
}

/// `E[f(x u/(1-u))]` for `u ~ Beta(a, b)` with integer shape parameters.
fn beta_expectation(a: u32, b: u32, f: &TestFunction, x: f64, q: &QuadratureConfig) -> Result<f64> {
    let (af, bf) = (a as f64, b as f64);
    let ln_norm = ln_gamma(af + bf) - ln_gamma(af) - ln_gamma(bf);
    let log_density = move |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let lu = if a == 1 { 0.0 } else { (af - 1.0) * u.ln() };
        let lv = if b == 1 { 0.0 } else { (bf - 1.0) * (-u).ln_1p() };
        ln_norm + lu + lv
    };

    // Envelope of |weight * f|: the density tilted by t^alpha = (x u/(1-u))^alpha.
    let alpha = f.growth();
    let left = af - 1.0 + alpha;
    let right = bf - 1.0 - alpha;
    let envelope = move |u: f64| {
        let lu = if left == 0.0 { 0.0 } else { left * u.ln() };
        let lv = if right == 0.0 { 0.0 } else { right * (-u).ln_1p() };
        lu + lv
    };
    let mode = if left + right > 0.0 { left / (left + right) } else { 0.5 };
    let window = find_window(envelope, mode, 0.0, Some(1.0));
    integrate_window(log_density, |u| f.eval(x * u / (1.0 - u)), window, q)
}

fn check_growth(f: &TestFunction, limit: f64) -> Result<()> {
    let alpha = f.growth();
    if alpha > limit {
        return Err(Error::GrowthViolation { alpha, limit });
    }
    Ok(())
}

/// `M_{n,k}(f; x)`; the `r` of `p` is ignored.
///
/// Requires the growth order of `f` to satisfy `alpha <= n - k - 1`.
pub fn apply(p: &OperatorParams, f: &TestFunction, x: f64, q: &QuadratureConfig) -> Result<f64> {
    check_point("x", x)?;
    check_growth(f, p.n() as f64 - p.k() as f64 - 1.0)?;
    beta_expectation(p.n() - p.k() + 1, p.n() + 1, f, x, q)
}

/// `M*_{n,k,r}(g; x)`, the normalized expectation behind the derivative
/// operator. Requires `alpha <= n - r - 1`.
pub fn apply_mstar(p: &OperatorParams, g: &TestFunction, x: f64, q: &QuadratureConfig) -> Result<f64> {
    check_point("x", x)?;
    check_growth(g, p.n() as f64 - p.r() as f64 - 1.0)?;
    beta_expectation(p.n() - p.k() + p.r() + 1, p.n() - p.r() + 1, g, x, q)
}

/// `M^(r)_{n,k}(f; x)`, the `r`-th `x`-derivative of `M_{n,k}(f; x)`, as
/// `b(n,k,r) * M*_{n,k,r}(f^(r); x)`. Uses the analytic derivative carried by
/// `f`; for `r = 0` this is exactly [`apply`].
pub fn apply_derivative(
    p: &OperatorParams,
    f: &TestFunction,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if p.r() == 0 {
        return apply(p, f, x, q);
    }
    let fr = f.derivative(p.r() as usize)?;
    let b = b_norm(p.n(), p.k(), p.r())?.to_f64();
    Ok(b * apply_mstar(p, &fr, x, q)?)
}

/// `G_n(f; x) = int g_n(x,u) f(n/u) du`, evaluated as `E[f(n x / s)]` with
/// `s ~ Gamma(n+1, 1)`. Requires the growth order of `f` to be at most `n - 1`.
pub fn apply_gn(n: u32, f: &TestFunction, x: f64, q: &QuadratureConfig) -> Result<f64> {
    check_point("x", x)?;
    if n == 0 {
        return Err(Error::Constraint("G_n needs n >= 1".into()));
    }
    check_growth(f, n as f64 - 1.0)?;
    let nf = n as f64;
    let ln_norm = -ln_factorial(n);
    let log_density = move |s: f64| {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ln_norm + nf * s.ln() - s
    };
    // f(n x / s) ~ s^{-alpha} as s -> 0.
    let tilt = nf - f.growth();
    let envelope = move |s: f64| tilt * s.ln() - s;
    let window = find_window(envelope, tilt.max(0.0), 0.0, None);
    integrate_window(log_density, |s| f.eval(nf * x / s), window, q)
}

/// The two named special cases of `M_{n,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialOperator {
    /// `F_n = M_{n,1}`.
    F,
    /// `L_n = M_{n+2,2}`.
    L,
}

pub fn make_special(kind: SpecialOperator, n: u32) -> Result<OperatorParams> {
    match kind {
        SpecialOperator::F => OperatorParams::new(n, 1, 0),
        SpecialOperator::L => OperatorParams::new(n + 2, 2, 0),
    }
}
