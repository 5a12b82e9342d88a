//! Empirical checks of the asymptotic formula, the two modulus error bounds,
//! and the order of the central moments.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_moments::{
    abs_f64, b_norm, mstar_central_moment, mstar_raw_moment, polynomial_moment, ratio_to_f64,
    second_moment_numerator, ExactCoefficient, OperatorParams,
};
use crate::operator_eval::apply_derivative;
use crate::quadrature::QuadratureConfig;
use crate::test_function::TestFunction;

/// Constant printed next to the second-modulus bound for context only.
pub const REFERENCE_C: f64 = 4.0;

/// Accepted band for consecutive ratios in the order table.
pub const ORDER_RATIO_BAND: (f64, f64) = (0.3, 3.0);

/// `(2r-k+1) x f^(r+1)(x) + x^2 f^(r+2)(x)`.
pub fn voronovskaja_target(f: &TestFunction, x: f64, k: u32, r: u32) -> Result<f64> {
    let r = r as usize;
    let drift = 2.0 * r as f64 - k as f64 + 1.0;
    Ok(drift * x * f.eval_derivative(r + 1, x)? + x * x * f.eval_derivative(r + 2, x)?)
}

/// `2 E_{2n} - E_n` from the last two rungs of a doubling ladder, which
/// cancels a `c/n` correction term.
pub fn richardson_doubling(n_values: &[u32], values: &[f64]) -> Result<f64> {
    check_doubling(n_values)?;
    if values.len() != n_values.len() {
        return Err(Error::LadderShape("value count differs from ladder length".into()));
    }
    let m = values.len();
    Ok(2.0 * values[m - 1] - values[m - 2])
}

fn check_ascending(n_values: &[u32]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::LadderShape("empty ladder".into()));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::LadderShape(format!("{n_values:?} is not strictly ascending")));
    }
    Ok(())
}

fn check_doubling(n_values: &[u32]) -> Result<()> {
    check_ascending(n_values)?;
    if n_values.len() < 2 {
        return Err(Error::LadderShape("extrapolation needs at least two rungs".into()));
    }
    if n_values.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::LadderShape(format!("{n_values:?} is not a doubling ladder")));
    }
    Ok(())
}

/// Doubling ladder `start, 2 start, ...` up to and including `end`.
pub fn doubling_ladder(start: u32, end: u32) -> Result<Vec<u32>> {
    if start == 0 || end < start {
        return Err(Error::LadderShape(format!("cannot build a ladder from {start} to {end}")));
    }
    let mut out = vec![start];
    while let Some(next) = out.last().and_then(|n| n.checked_mul(2)) {
        if next > end {
            break;
        }
        out.push(next);
    }
    if *out.last().unwrap() != end {
        return Err(Error::LadderShape(format!(
            "{end} is not reached by doubling from {start}"
        )));
    }
    Ok(out)
}

fn ladder_params(n: u32, k: u32, r: u32) -> Result<OperatorParams> {
    let p = OperatorParams::new(n, k, r)?;
    if n <= r + 4 {
        return Err(Error::Constraint(format!(
            "ladder entries need n > r + 4, got n={n}, r={r}"
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronovskajaOptions {
    pub extrapolate: bool,
    /// Allowed `|extrapolated - target|` for the `converged` flag.
    pub tolerance: f64,
}

impl Default for VoronovskajaOptions {
    fn default() -> Self {
        Self {
            extrapolate: true,
            tolerance: 2e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoronovskajaReport {
    pub k: u32,
    pub r: u32,
    pub x: f64,
    pub function: String,
    pub n_values: Vec<u32>,
    /// `E_n = n ((1/b) M^(r)_{n,k}(f;x) - f^(r)(x))`.
    pub scaled_deviations: Vec<f64>,
    pub target: f64,
    pub extrapolated: Option<f64>,
    pub converged: bool,
}

impl VoronovskajaReport {
    /// True when `|E_{2n} - V|` shrinks along each of the final three rungs.
    /// Errors already below `1e-8 max(1, |V|)` count as converged.
    pub fn approaches_monotonically(&self) -> bool {
        let floor = 1e-8 * self.target.abs().max(1.0);
        let errs: Vec<f64> = self
            .scaled_deviations
            .iter()
            .map(|e| (e - self.target).abs())
            .collect();
        let tail = &errs[errs.len().saturating_sub(3)..];
        tail.windows(2).all(|w| w[1] < w[0] || w[1] <= floor)
    }

    /// Richardson value for each rung against its predecessor (`None` for
    /// the first rung).
    pub fn rung_extrapolations(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for i in 1..self.scaled_deviations.len() {
            let doubled = self.n_values[i] == 2 * self.n_values[i - 1];
            out.push(doubled.then(|| 2.0 * self.scaled_deviations[i] - self.scaled_deviations[i - 1]));
        }
        out.truncate(self.scaled_deviations.len());
        out
    }
}

/// Quadrature path: evaluates `E_n` for every `n` of the ladder.
pub fn voronovskaja_sequence(
    f: &TestFunction,
    x: f64,
    k: u32,
    r: u32,
    n_values: &[u32],
    q: &QuadratureConfig,
    options: &VoronovskajaOptions,
) -> Result<VoronovskajaReport> {
    check_ascending(n_values)?;
    if options.extrapolate {
        check_doubling(n_values)?;
    }
    let target = voronovskaja_target(f, x, k, r)?;
    let fr_x = f.eval_derivative(r as usize, x)?;
    let mut scaled = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let p = ladder_params(n, k, r)?;
        let b = b_norm(n, k, r)?.to_f64();
        let value = apply_derivative(&p, f, x, q)? / b;
        scaled.push(n as f64 * (value - fr_x));
    }
    let extrapolated = if options.extrapolate {
        Some(richardson_doubling(n_values, &scaled)?)
    } else {
        None
    };
    let converged = extrapolated.is_some_and(|e| (e - target).abs() <= options.tolerance);
    Ok(VoronovskajaReport {
        k,
        r,
        x,
        function: f.id().to_string(),
        n_values: n_values.to_vec(),
        scaled_deviations: scaled,
        target,
        extrapolated,
        converged,
    })
}

/// Exact-path counterpart of [`VoronovskajaReport`] for polynomial `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVoronovskaja {
    pub n_values: Vec<u32>,
    pub scaled_deviations: Vec<BigRational>,
    pub target: BigRational,
    pub extrapolated: Option<BigRational>,
}

impl ExactVoronovskaja {
    pub fn scaled_f64(&self) -> Vec<f64> {
        self.scaled_deviations.iter().map(ratio_to_f64).collect()
    }
}

fn differentiate(coeffs: &[i64], times: usize) -> Vec<i64> {
    let mut cur = coeffs.to_vec();
    for _ in 0..times {
        cur = cur
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| j as i64 * c)
            .collect();
    }
    cur
}

fn eval_poly(coeffs: &[i64], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, &c| {
        acc * x + BigRational::from_integer(c.into())
    })
}

/// Exact rational `E_n` for a polynomial `f`, using
/// `(1/b) M^(r)_{n,k}(f; x) = M*_{n,k,r}(f^(r); x)` and the exact raw moments
/// of `M*`. `x` is taken as the exact binary value of the `f64`.
pub fn voronovskaja_sequence_exact(
    f: &TestFunction,
    x: f64,
    k: u32,
    r: u32,
    n_values: &[u32],
    extrapolate: bool,
) -> Result<ExactVoronovskaja> {
    check_ascending(n_values)?;
    if extrapolate {
        check_doubling(n_values)?;
    }
    let coeffs = f
        .polynomial_coefficients()
        .ok_or_else(|| Error::Config(format!("`{}` is not a polynomial", f.id())))?;
    let xq = BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("x={x}")))?;
    if xq <= BigRational::zero() {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let dr = differentiate(coeffs, r as usize);
    let fr_x = eval_poly(&dr, &xq);
    let drift = BigRational::from_integer((2 * r as i64 - k as i64 + 1).into());
    let target = drift * &xq * eval_poly(&differentiate(&dr, 1), &xq)
        + &xq * &xq * eval_poly(&differentiate(&dr, 2), &xq);

    let mut scaled = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let p = ladder_params(n, k, r)?;
        let value = polynomial_moment(&dr, &xq, |j| mstar_raw_moment(&p, j))?;
        scaled.push(BigRational::from_integer(n.into()) * (value - &fr_x));
    }
    let extrapolated = if extrapolate {
        let m = scaled.len();
        Some(BigRational::from_integer(2.into()) * &scaled[m - 1] - &scaled[m - 2])
    } else {
        None
    };
    Ok(ExactVoronovskaja {
        n_values: n_values.to_vec(),
        scaled_deviations: scaled,
        target,
        extrapolated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `|M* f^(r) - f^(r)(x)| <= 2 omega(f^(r), sqrt(delta_n))`.
    FirstModulus,
    /// `|M* f^(r) - f^(r)(x)| <= C omega_2(f^(r), gamma_n) + omega(f^(r), drift)`.
    SecondModulus,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::FirstModulus => "omega1",
            BoundKind::SecondModulus => "omega2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: BoundKind,
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub x: f64,
    pub function: String,
    pub lhs: f64,
    pub rhs_components: Vec<(String, f64)>,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub empirical_c: Option<f64>,
    pub numeric_margin: f64,
}

impl BoundReport {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.rhs_components
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

fn bound_params(n: u32, k: u32, r: u32) -> Result<OperatorParams> {
    let p = OperatorParams::new(n, k, r)?;
    if n < r + 2 {
        return Err(Error::Constraint(format!(
            "error bounds need n >= r + 2, got n={n}, r={r}"
        )));
    }
    Ok(p)
}

/// `delta_n` coefficient of `x^2`, exact.
pub fn delta_n_coefficient(p: &OperatorParams) -> Result<ExactCoefficient> {
    let (n, k, r) = (p.n() as i64, p.k() as i64, p.r() as i64);
    if n - r - 1 <= 0 {
        return Err(Error::Constraint(format!("delta_n needs n > r + 1 at {p}")));
    }
    Ok(ExactCoefficient::from_ratio(
        second_moment_numerator(n, k, r),
        (n - r) * (n - r - 1),
    ))
}

/// `delta_n = (4r^2 + 4r(2-k) + 2n + k^2 - 5k + 4) / ((n-r)(n-r-1)) x^2`.
pub fn delta_n(p: &OperatorParams, x: f64) -> Result<f64> {
    Ok(delta_n_coefficient(p)?.to_f64() * x * x)
}

/// `gamma_n = sqrt(delta_n + ((2r-k+1) x / (n-r))^2)`.
pub fn gamma_n(p: &OperatorParams, x: f64) -> Result<f64> {
    let drift = p.drift() as f64 * x / (p.n() - p.r()) as f64;
    Ok((delta_n(p, x)? + drift * drift).sqrt())
}

fn require_modulus(value: Option<f64>, f: &TestFunction, r: u32) -> Result<f64> {
    value.ok_or_else(|| Error::MissingModulus {
        function: f.id().to_string(),
        order: r as usize,
    })
}

fn normalized_deviation(
    f: &TestFunction,
    x: f64,
    p: &OperatorParams,
    q: &QuadratureConfig,
) -> Result<f64> {
    let b = b_norm(p.n(), p.k(), p.r())?.to_f64();
    let fr_x = f.eval_derivative(p.r() as usize, x)?;
    Ok((apply_derivative(p, f, x, q)? / b - fr_x).abs())
}

/// First-modulus bound check with `delta = sqrt(delta_n)`.
pub fn check_first_modulus_bound(
    f: &TestFunction,
    x: f64,
    n: u32,
    k: u32,
    r: u32,
    q: &QuadratureConfig,
) -> Result<BoundReport> {
    let p = bound_params(n, k, r)?;
    let fr = f.derivative(r as usize)?;
    let dn = delta_n(&p, x)?;
    let omega = require_modulus(fr.analytic_omega1(dn.sqrt()), f, r)?;
    let lhs = normalized_deviation(f, x, &p, q)?;
    let rhs = 2.0 * omega;
    let slack = rhs - lhs;
    let numeric_margin = 10.0 * q.abs_tolerance;
    Ok(BoundReport {
        theorem: BoundKind::FirstModulus,
        n,
        k,
        r,
        x,
        function: f.id().to_string(),
        lhs,
        rhs_components: vec![("delta_n".into(), dn), ("omega1".into(), omega)],
        rhs,
        slack,
        holds: slack >= -numeric_margin,
        empirical_c: None,
        numeric_margin,
    })
}

/// Second-modulus bound check. The absolute constant is unknown, so the
/// report carries `empirical_c = max(0, lhs - omega_term) / omega2_term`;
/// `rhs` and `holds` use [`REFERENCE_C`] for context only.
pub fn check_second_modulus_bound(
    f: &TestFunction,
    x: f64,
    n: u32,
    k: u32,
    r: u32,
    q: &QuadratureConfig,
) -> Result<BoundReport> {
    let p = bound_params(n, k, r)?;
    let fr = f.derivative(r as usize)?;
    let gn = gamma_n(&p, x)?;
    let shift = (p.drift() as f64 * x / (n - r) as f64).abs();
    let w2 = require_modulus(fr.analytic_omega2(gn), f, r)?;
    let w1 = if shift == 0.0 {
        0.0
    } else {
        require_modulus(fr.analytic_omega1(shift), f, r)?
    };
    let lhs = normalized_deviation(f, x, &p, q)?;
    let numeric_margin = 10.0 * q.abs_tolerance;
    let excess = (lhs - w1).max(0.0);
    let empirical_c = if w2 > 0.0 {
        Some(excess / w2)
    } else if excess <= numeric_margin {
        Some(0.0)
    } else {
        None
    };
    let rhs = REFERENCE_C * w2 + w1;
    let slack = rhs - lhs;
    Ok(BoundReport {
        theorem: BoundKind::SecondModulus,
        n,
        k,
        r,
        x,
        function: f.id().to_string(),
        lhs,
        rhs_components: vec![
            ("gamma_n".into(), gn),
            ("omega2".into(), w2),
            ("omega1_shift".into(), w1),
        ],
        rhs,
        slack,
        holds: slack >= -numeric_margin,
        empirical_c,
        numeric_margin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub n: u32,
    pub coefficient: ExactCoefficient,
    /// `n^{floor((m+1)/2)} |coefficient|`.
    pub scaled: f64,
    /// `scaled` divided by the previous row's `scaled`; `None` on the first
    /// row and after a zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub m: u32,
    pub k: u32,
    pub r: u32,
    pub rows: Vec<OrderRow>,
    /// Every coefficient is exactly zero.
    pub degenerate: bool,
    pub pass: bool,
}

/// Tabulates `n^{floor((m+1)/2)} |M*((t-x)^m)|` over the ladder and checks
/// that consecutive ratios stay in [`ORDER_RATIO_BAND`].
pub fn check_order_lemma(m: u32, k: u32, r: u32, n_values: &[u32]) -> Result<OrderReport> {
    check_ascending(n_values)?;
    let power = m.div_ceil(2) as i32;
    let mut rows: Vec<OrderRow> = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let p = OperatorParams::new(n, k, r)?;
        if m > p.raw_moment_limit().min(p.mstar_moment_limit()) {
            return Err(Error::MomentUndefined {
                order: m,
                limit: p.raw_moment_limit().min(p.mstar_moment_limit()),
            });
        }
        let coefficient = mstar_central_moment(&p, m)?;
        let scaled = (n as f64).powi(power) * abs_f64(coefficient.value());
        let ratio = rows
            .last()
            .filter(|prev| prev.scaled != 0.0)
            .map(|prev| scaled / prev.scaled);
        rows.push(OrderRow {
            n,
            coefficient,
            scaled,
            ratio,
        });
    }
    let degenerate = rows.iter().all(|row| row.coefficient.is_zero());
    let (lo, hi) = ORDER_RATIO_BAND;
    let pass = degenerate
        || rows
            .iter()
            .filter_map(|row| row.ratio)
            .all(|ratio| ratio.is_finite() && (lo..=hi).contains(&ratio));
    Ok(OrderReport {
        m,
        k,
        r,
        rows,
        degenerate,
        pass,
    })
}

/// Exact `E_n` for `f = t^2`, `k = 1`, `r = 0`, `x = 1`: `2n / (n - 1)`.
pub fn quadratic_reference(n: u32) -> BigRational {
    BigRational::new((2 * n as i64).into(), (n as i64 - 1).into())
}
