//! Exact moments of `M_{n,k}` and of the normalized operator `M*_{n,k,r}`.
//!
//! Every moment of these operators is a rational multiple of `x^m`, so the
//! functions here return only that rational coefficient. Nothing in this
//! module rounds.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The triple `(n, k, r)` identifying one operator instance.
///
/// `k` is the kernel shift (`t^{n-k}` in the kernel) and `r` the derivative
/// order used by `M^(r)_{n,k}` and `M*_{n,k,r}`; plain `M_{n,k}` ignores `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorParams {
    n: u32,
    k: u32,
    r: u32,
}

impl OperatorParams {
    pub fn new(n: u32, k: u32, r: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::Constraint(format!(
                "n and k must be positive (n={n}, k={k})"
            )));
        }
        if k > n {
            return Err(Error::Constraint(format!("k={k} exceeds n={n}")));
        }
        if r > n {
            return Err(Error::Constraint(format!("r={r} exceeds n={n}")));
        }
        Ok(Self { n, k, r })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Same `(n, k)` with a different derivative order.
    pub fn with_r(&self, r: u32) -> Result<Self> {
        Self::new(self.n, self.k, r)
    }

    /// Largest `m` for which `M_{n,k}(t^m; x)` is defined.
    pub fn raw_moment_limit(&self) -> u32 {
        self.n - self.k
    }

    /// Largest `m` for which `M*_{n,k,r}(t^m; x)` is defined.
    pub fn mstar_moment_limit(&self) -> u32 {
        self.n - self.r
    }

    /// `2r - k + 1`, the drift numerator of the first central moment of `M*`.
    pub fn drift(&self) -> i64 {
        2 * self.r as i64 - self.k as i64 + 1
    }
}

impl fmt::Display for OperatorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, k={}, r={})", self.n, self.k, self.r)
    }
}

/// Exact rational coefficient of `x^m` in a moment formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCoefficient(BigRational);

impl ExactCoefficient {
    pub fn new(value: BigRational) -> Self {
        Self(value)
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self(BigRational::new(numer.into(), denom.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl From<BigRational> for ExactCoefficient {
    fn from(value: BigRational) -> Self {
        Self(value)
    }
}

/// Renders as `p/q`, or `p` when the denominator is one.
impl fmt::Display for ExactCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// huge numerators and denominators.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift both parts down to 64 significant bits, then scale back.
    let numer = q.numer();
    let denom = q.denom();
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (numer >> ns as usize).to_f64().unwrap_or(f64::NAN);
    let d = (denom >> ds as usize).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi((ns - ds) as i32)
}

/// Natural logarithm of a positive big rational, accurate for values far
/// outside the `f64` range.
pub fn ratio_ln(q: &BigRational) -> f64 {
    fn big_ln(v: &BigInt) -> f64 {
        let bits = v.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (v >> shift as usize).to_f64().unwrap_or(f64::NAN);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
    big_ln(q.numer()) - big_ln(q.denom())
}

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(int(v))
}

/// Falling factorial `x (x-1) ... (x-m+1)`, equal to one for `m = 0`.
pub fn falling_factorial(x: &BigRational, m: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = x.clone();
    for _ in 0..m {
        acc *= &term;
        term -= BigRational::one();
    }
    acc
}

/// Integer product `lo * (lo+1) * ... * hi`, or one when `lo > hi`.
fn product_range(lo: u64, hi: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = lo;
    while i <= hi {
        acc *= i;
        i += 1;
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    product_range(2, n)
}

/// `M_{n,k}(t^m; x) = [n-k+m]_m / [n]_m * x^m`.
pub fn raw_moment(p: &OperatorParams, m: u32) -> Result<ExactCoefficient> {
    let limit = p.raw_moment_limit();
    if m > limit {
        return Err(Error::MomentUndefined { order: m, limit });
    }
    let num = falling_factorial(&rat((p.n - p.k + m) as i64), m);
    let den = falling_factorial(&rat(p.n as i64), m);
    Ok(ExactCoefficient(num / den))
}

/// Alternating binomial sum `sum_j (-1)^j C(m,j) c_{m-j}` turning raw moment
/// coefficients into the central moment coefficient.
fn binomial_central<F>(m: u32, raw: F) -> Result<ExactCoefficient>
where
    F: Fn(u32) -> Result<ExactCoefficient>,
{
    let mut sum = BigRational::zero();
    for j in 0..=m {
        let c = BigRational::from_integer(binomial(int(m as i64), int(j as i64)));
        let term = c * raw(m - j)?.0;
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(ExactCoefficient(sum))
}

/// `M_{n,k}((t-x)^m; x)` as a coefficient of `x^m`.
pub fn central_moment(p: &OperatorParams, m: u32) -> Result<ExactCoefficient> {
    let limit = p.raw_moment_limit();
    if m > limit {
        return Err(Error::MomentUndefined { order: m, limit });
    }
    binomial_central(m, |j| raw_moment(p, j))
}

/// Kernel normalizer `beta_n = (2n-k+1)! / (n! (n-k)!)`.
pub fn beta_n(n: u32, k: u32) -> Result<ExactCoefficient> {
    let p = OperatorParams::new(n, k, 0)?;
    let (n, k) = (p.n as u64, p.k as u64);
    // (2n-k+1)! / n! = (n+1)...(2n-k+1)
    let num = product_range(n + 1, 2 * n - k + 1);
    Ok(ExactCoefficient(BigRational::new(num, factorial(n - k))))
}

/// `b(n,k,r) = (n-r)! (n-k+r)! / (n! (n-k)!)`, the mass of the derivative kernel.
pub fn b_norm(n: u32, k: u32, r: u32) -> Result<ExactCoefficient> {
    let p = OperatorParams::new(n, k, r)?;
    let (n, k, r) = (p.n as u64, p.k as u64, p.r as u64);
    // (n-k+r)!/(n-k)! over n!/(n-r)!
    let num = product_range(n - k + 1, n - k + r);
    let den = product_range(n - r + 1, n);
    Ok(ExactCoefficient(BigRational::new(num, den)))
}

/// `M*_{n,k,r}(t^m; x) = (n-r-m)! (n-k+r+m)! / ((n-r)! (n-k+r)!) * x^m`.
pub fn mstar_raw_moment(p: &OperatorParams, m: u32) -> Result<ExactCoefficient> {
    let limit = p.mstar_moment_limit();
    if m > limit {
        return Err(Error::MomentUndefined { order: m, limit });
    }
    let (n, k, r, m) = (p.n as u64, p.k as u64, p.r as u64, m as u64);
    let num = product_range(n - k + r + 1, n - k + r + m);
    let den = product_range(n - r - m + 1, n - r);
    Ok(ExactCoefficient(BigRational::new(num, den)))
}

/// `M*_{n,k,r}((t-x)^m; x)` from the binomial expansion of `(t-x)^m`.
///
/// This is the reference against which [`closed_form_mstar_central`] is
/// judged.
pub fn mstar_central_moment(p: &OperatorParams, m: u32) -> Result<ExactCoefficient> {
    let limit = p.mstar_moment_limit();
    if m > limit {
        return Err(Error::MomentUndefined { order: m, limit });
    }
    binomial_central(m, |j| mstar_raw_moment(p, j))
}

/// Published numerator polynomial of the third central moment of `M*`.
pub fn published_c(n: i64, k: i64, r: i64) -> BigInt {
    let v = 8 * r.pow(3) + r.pow(2) * (36 - 2 * k) + r * (51 + 14 * n - 42 * k + 6 * k * k)
        - k.pow(3)
        + 12 * k * k
        - 34 * k
        - n * n
        + n * (17 - 6 * k - 6 * k * k + 2 * k * r)
        + 21;
    int(v)
}

/// Published numerator polynomial of the fourth central moment of `M*`.
pub fn published_d(n: i64, k: i64, r: i64) -> BigInt {
    let (n, k, r) = (int(n), int(k), int(r));
    let c = |v: i64| int(v);
    &r.pow(4) * c(16)
        + r.pow(3) * (c(128) - c(32) * &k)
        + r.pow(2) * (c(348) + c(48) * &n - c(216) * &k + c(24) * k.pow(2))
        + &r * (c(366) + c(177) * &n + &k * (c(6) * n.pow(2) - c(54) * &n - c(440))
            + c(120) * k.pow(2)
            - c(8) * k.pow(3))
        + k.pow(4)
        + k.pow(3) * (c(4) * &n - c(22))
        + c(139) * k.pow(2)
        - &k * (c(245) + c(116) * &n)
        + c(24) * n.pow(2)
        + c(131) * &n
        + c(100)
}

/// Numerator of the second central moment of `M*`:
/// `4r^2 + 4r(2-k) + 2n + k^2 - 5k + 4`.
pub fn second_moment_numerator(n: i64, k: i64, r: i64) -> i64 {
    4 * r * r + 4 * r * (2 - k) + 2 * n + k * k - 5 * k + 4
}

/// Closed forms for the central moments of `M*` of orders `0..=4`, evaluated
/// exactly as published, including the `c` and `d` numerators of orders 3
/// and 4.
///
/// These are not corrected: compare with [`mstar_central_moment`] to detect
/// disagreement.
pub fn closed_form_mstar_central(p: &OperatorParams, m: u32) -> Result<ExactCoefficient> {
    if m > 4 {
        return Err(Error::Constraint(format!(
            "closed forms exist only for orders 0..=4, got {m}"
        )));
    }
    let span = p.n as i64 - p.r as i64;
    if span < m as i64 {
        return Err(Error::Constraint(format!(
            "closed form of order {m} needs n - r >= {m}, got n - r = {span}"
        )));
    }
    let (n, k, r) = (p.n as i64, p.k as i64, p.r as i64);
    let denom: BigInt = (0..m as i64).map(|i| int(span - i)).product();
    let numer = match m {
        0 => return Ok(ExactCoefficient(BigRational::one())),
        1 => int(2 * r - k + 1),
        2 => int(second_moment_numerator(n, k, r)),
        3 => published_c(n, k, r),
        _ => published_d(n, k, r),
    };
    Ok(ExactCoefficient(BigRational::new(numer, denom)))
}

/// One closed-form versus oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub params: OperatorParams,
    pub order: u32,
    pub closed_form: ExactCoefficient,
    pub oracle: ExactCoefficient,
}

impl ClosedFormCheck {
    pub fn matches(&self) -> bool {
        self.closed_form == self.oracle
    }
}

/// Compares the closed form against the binomial-sum oracle for every
/// admissible `(n, k, r)` in the given ranges and each requested order.
///
/// Combinations violating `k <= n`, `r <= n` or `m <= n - r` are skipped.
pub fn compare_closed_forms(
    ns: impl IntoIterator<Item = u32>,
    ks: &[u32],
    rs: &[u32],
    orders: &[u32],
) -> Vec<ClosedFormCheck> {
    let mut out = Vec::new();
    for n in ns {
        for &k in ks {
            for &r in rs {
                let Ok(p) = OperatorParams::new(n, k, r) else {
                    continue;
                };
                for &m in orders {
                    let (Ok(closed_form), Ok(oracle)) =
                        (closed_form_mstar_central(&p, m), mstar_central_moment(&p, m))
                    else {
                        continue;
                    };
                    out.push(ClosedFormCheck {
                        params: p,
                        order: m,
                        closed_form,
                        oracle,
                    });
                }
            }
        }
    }
    out
}

/// Exact value of `sum_j coeffs[j] * moment(j) * x^j` for a polynomial with
/// integer coefficients (ascending powers).
pub fn polynomial_moment<F>(coeffs: &[i64], x: &BigRational, moment: F) -> Result<BigRational>
where
    F: Fn(u32) -> Result<ExactCoefficient>,
{
    let mut acc = BigRational::zero();
    let mut xp = BigRational::one();
    for (j, &a) in coeffs.iter().enumerate() {
        if a != 0 {
            acc += rat(a) * moment(j as u32)?.0 * &xp;
        }
        xp *= x;
    }
    Ok(acc)
}

/// Absolute value as `f64`, used by order tables.
pub fn abs_f64(q: &BigRational) -> f64 {
    ratio_to_f64(&q.abs())
}
