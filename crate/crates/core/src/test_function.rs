//! Test functions with analytic derivatives, growth descriptors and optional
//! closed-form moduli.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Derivative orders always provided by [`TestFunction::polynomial`].
pub const POLYNOMIAL_MIN_ORDER: usize = 6;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One derivative level of a test function: the map itself plus what is
/// known about it analytically.
#[derive(Clone)]
pub struct FunctionLevel {
    eval: RealFn,
    growth: f64,
    sup_bound: Option<f64>,
    omega1: Option<RealFn>,
    omega2: Option<RealFn>,
}

impl FunctionLevel {
    /// `growth` is the polynomial order `alpha` with `|g(t)| = O(t^alpha)`.
    pub fn new<F>(eval: F, growth: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            growth,
            sup_bound: None,
            omega1: None,
            omega2: None,
        }
    }

    /// Marks the level bounded by `sup` on `[0, inf)`.
    pub fn bounded(mut self, sup: f64) -> Self {
        self.sup_bound = Some(sup);
        self
    }

    pub fn with_omega1<F>(mut self, omega: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.omega1 = Some(Arc::new(omega));
        self
    }

    pub fn with_omega2<F>(mut self, omega: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.omega2 = Some(Arc::new(omega));
        self
    }
}

/// A function on `(0, inf)` bundled with analytic derivatives up to a
/// declared order `D`.
///
/// Taking a derivative with [`TestFunction::derivative`] yields another test
/// function whose own level data (growth, bound, moduli) come from the
/// corresponding derivative level.
#[derive(Clone)]
pub struct TestFunction {
    id: Arc<str>,
    levels: Arc<[FunctionLevel]>,
    offset: usize,
    polynomial: Option<Arc<[i64]>>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("derivative_offset", &self.offset)
            .field("order", &self.order())
            .field("growth", &self.growth())
            .finish()
    }
}

impl TestFunction {
    /// Builds a function from its value level followed by derivative levels
    /// `1..=D`.
    pub fn from_levels(id: impl Into<String>, levels: Vec<FunctionLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("a test function needs at least its value level".into()));
        }
        for (j, level) in levels.iter().enumerate() {
            if !(level.growth >= 0.0 && level.growth.is_finite()) {
                return Err(Error::Config(format!(
                    "level {j}: growth order must be finite and non-negative"
                )));
            }
            if let Some(sup) = level.sup_bound {
                if !sup.is_finite() || sup < 0.0 {
                    return Err(Error::Config(format!(
                        "level {j}: bounded flag needs a finite sup-norm bound"
                    )));
                }
            }
        }
        Ok(Self {
            id: Arc::from(id.into()),
            levels: levels.into(),
            offset: 0,
            polynomial: None,
        })
    }

    /// A function with no derivative information.
    pub fn new<F>(id: impl Into<String>, eval: F, growth: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_levels(id, vec![FunctionLevel::new(eval, growth)])
    }

    /// Attaches exact integer polynomial coefficients (ascending powers) so
    /// moment-based exact paths can be used.
    pub fn with_polynomial(mut self, coeffs: Vec<i64>) -> Self {
        self.polynomial = Some(coeffs.into());
        self
    }

    /// Polynomial with integer coefficients `sum coeffs[j] t^j`, with
    /// derivative levels up to at least [`POLYNOMIAL_MIN_ORDER`].
    pub fn polynomial(id: impl Into<String>, coeffs: Vec<i64>) -> Result<Self> {
        let mut levels = Vec::new();
        let mut current = coeffs.clone();
        loop {
            let degree = current.iter().rposition(|&c| c != 0);
            let cs: Vec<f64> = current.iter().map(|&c| c as f64).collect();
            let eval = move |t: f64| cs.iter().rev().fold(0.0, |acc, &c| acc * t + c);
            let mut level = FunctionLevel::new(eval, degree.unwrap_or(0) as f64);
            match degree {
                None => {
                    level = level.bounded(0.0).with_omega1(|_| 0.0).with_omega2(|_| 0.0);
                }
                Some(0) => {
                    let c = current[0].abs() as f64;
                    level = level.bounded(c).with_omega1(|_| 0.0).with_omega2(|_| 0.0);
                }
                Some(1) => {
                    let slope = current[1].abs() as f64;
                    level = level.with_omega1(move |d| slope * d).with_omega2(|_| 0.0);
                }
                _ => {}
            }
            levels.push(level);
            if degree.is_none() && levels.len() > POLYNOMIAL_MIN_ORDER {
                break;
            }
            current = current
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as i64 * c)
                .collect();
        }
        Ok(Self::from_levels(id, levels)?.with_polynomial(coeffs))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Label including the derivative order, e.g. `exp-neg''`.
    pub fn label(&self) -> String {
        format!("{}{}", self.id, "'".repeat(self.offset))
    }

    fn level(&self, j: usize) -> Option<&FunctionLevel> {
        self.levels.get(self.offset + j)
    }

    /// Declared number `D` of available analytic derivatives.
    pub fn order(&self) -> usize {
        self.levels.len() - self.offset - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.levels[self.offset].eval)(t)
    }

    /// `f^(j)(t)`.
    pub fn eval_derivative(&self, j: usize, t: f64) -> Result<f64> {
        let level = self.level(j).ok_or(Error::MissingDerivative {
            requested: j,
            available: self.order(),
        })?;
        Ok((level.eval)(t))
    }

    /// The `j`-th derivative as a test function in its own right.
    pub fn derivative(&self, j: usize) -> Result<TestFunction> {
        if self.level(j).is_none() {
            return Err(Error::MissingDerivative {
                requested: j,
                available: self.order(),
            });
        }
        let polynomial = self.polynomial.as_ref().map(|p| {
            let mut cur: Vec<i64> = p.to_vec();
            for _ in 0..j {
                cur = cur
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, &c)| i as i64 * c)
                    .collect();
            }
            Arc::from(cur)
        });
        Ok(TestFunction {
            id: self.id.clone(),
            levels: self.levels.clone(),
            offset: self.offset + j,
            polynomial,
        })
    }

    pub fn growth(&self) -> f64 {
        self.levels[self.offset].growth
    }

    pub fn is_bounded(&self) -> bool {
        self.levels[self.offset].sup_bound.is_some()
    }

    pub fn sup_norm(&self) -> Option<f64> {
        self.levels[self.offset].sup_bound
    }

    pub fn analytic_omega1(&self, delta: f64) -> Option<f64> {
        self.levels[self.offset].omega1.as_ref().map(|w| w(delta))
    }

    pub fn analytic_omega2(&self, delta: f64) -> Option<f64> {
        self.levels[self.offset].omega2.as_ref().map(|w| w(delta))
    }

    pub fn has_analytic_moduli(&self) -> bool {
        let level = &self.levels[self.offset];
        level.omega1.is_some() && level.omega2.is_some()
    }

    /// Integer coefficients when the function is a known polynomial.
    pub fn polynomial_coefficients(&self) -> Option<&[i64]> {
        self.polynomial.as_deref()
    }

    /// `f(c t)` as a new test function (no derivative or modulus data).
    pub fn rescaled(&self, c: f64) -> TestFunction {
        let inner = self.levels[self.offset].eval.clone();
        let level = FunctionLevel {
            eval: Arc::new(move |t| inner(c * t)),
            growth: self.growth(),
            sup_bound: self.sup_norm(),
            omega1: None,
            omega2: None,
        };
        TestFunction {
            id: Arc::from(format!("{}(c*t)", self.label())),
            levels: Arc::from(vec![level]),
            offset: 0,
            polynomial: None,
        }
    }

    /// Pointwise transform `t -> map(t, f(t))` with a declared growth order.
    pub fn map<F>(&self, id: impl Into<String>, growth: f64, map: F) -> TestFunction
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.levels[self.offset].eval.clone();
        TestFunction {
            id: Arc::from(id.into()),
            levels: Arc::from(vec![FunctionLevel::new(move |t| map(t, inner(t)), growth)]),
            offset: 0,
            polynomial: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_levels() {
        let f = TestFunction::polynomial("p", vec![1, 0, 3]).unwrap();
        assert_eq!(f.order(), POLYNOMIAL_MIN_ORDER);
        assert_eq!(f.eval(2.0), 13.0);
        assert_eq!(f.eval_derivative(1, 2.0).unwrap(), 12.0);
        assert_eq!(f.eval_derivative(2, 2.0).unwrap(), 6.0);
        assert_eq!(f.eval_derivative(3, 2.0).unwrap(), 0.0);
        assert_eq!(f.eval_derivative(6, 2.0).unwrap(), 0.0);
        assert!(f.eval_derivative(7, 2.0).is_err());
        assert_eq!(f.growth(), 2.0);
        assert!(!f.is_bounded());
        let d1 = f.derivative(1).unwrap();
        assert_eq!(d1.polynomial_coefficients().unwrap(), &[0, 6]);
        assert_eq!(d1.analytic_omega1(0.5), Some(3.0));
        assert_eq!(d1.analytic_omega2(0.5), Some(0.0));
        assert_eq!(d1.label(), "p'");
        let d2 = f.derivative(2).unwrap();
        assert!(d2.is_bounded());
        assert_eq!(d2.analytic_omega1(1.0), Some(0.0));
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(TestFunction::from_levels("x", vec![]).is_err());
        assert!(TestFunction::new("x", |t| t, -1.0).is_err());
        let lvl = FunctionLevel::new(|t| t, 0.0).bounded(f64::INFINITY);
        assert!(TestFunction::from_levels("x", vec![lvl]).is_err());
    }

    #[test]
    fn missing_derivative() {
        let f = TestFunction::new("f", |t| t.sin(), 0.0).unwrap();
        assert_eq!(f.order(), 0);
        assert_eq!(
            f.derivative(1).unwrap_err(),
            Error::MissingDerivative {
                requested: 1,
                available: 0
            }
        );
    }
}
