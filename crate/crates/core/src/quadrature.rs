//! Panel Gauss-Legendre integration against unimodal log-space weights.
//!
//! The integrals evaluated by this crate all have the shape
//! `int exp(log_weight(z)) g(z) dz` where `log_weight` is a normalized Beta or
//! Gamma log-density. The integration window is cut where the growth-tilted
//! envelope drops [`LOG_CUTOFF`] below its peak, split at the envelope mode,
//! and covered by a doubling sequence of fixed-order panels.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural-log drop below the envelope peak at which the window is cut.
pub const LOG_CUTOFF: f64 = 60.0;

const GAUSS_ORDER: usize = 20;
const INITIAL_PANELS_PER_SIDE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPolicy {
    /// Panels clustered toward the mode and toward both window ends.
    #[default]
    ModeCentered,
    /// Equal-width panels on each side of the mode.
    Uniform,
}

impl std::str::FromStr for SplitPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode-centered" | "mode-centered-panels" => Ok(Self::ModeCentered),
            "uniform" | "uniform-panels" => Ok(Self::Uniform),
            other => Err(Error::Config(format!("unknown split policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub node_budget: usize,
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub split_policy: SplitPolicy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            node_budget: 1 << 16,
            rel_tolerance: 1e-13,
            abs_tolerance: 1e-14,
            split_policy: SplitPolicy::ModeCentered,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.abs_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive (rel={}, abs={})",
                self.rel_tolerance, self.abs_tolerance
            )));
        }
        if self.node_budget < 15 {
            return Err(Error::Config(format!(
                "node budget {} is below the minimum of 15",
                self.node_budget
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    fn shared() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(GAUSS_ORDER))
    }
}

fn legendre_with_derivative(order: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=order {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Integration window `[lo, hi]` with the envelope mode inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub mode: f64,
    pub hi: f64,
}

/// Finds the window where `envelope` (a unimodal log-envelope with peak at
/// `mode`) stays within [`LOG_CUTOFF`] of its peak.
///
/// `domain_lo` is the left end of the support; `domain_hi` is the right end,
/// or `None` for a half line.
pub fn find_window<E>(envelope: E, mode: f64, domain_lo: f64, domain_hi: Option<f64>) -> Window
where
    E: Fn(f64) -> f64,
{
    let peak = envelope(mode);
    let target = peak - LOG_CUTOFF;
    let below = |z: f64| {
        let v = envelope(z);
        v.is_nan() || v < target
    };

    let lo = if mode <= domain_lo || !below(domain_lo) {
        domain_lo
    } else {
        bisect(domain_lo, mode, &below)
    };

    let hi = match domain_hi {
        Some(end) if mode >= end => end,
        Some(end) => {
            if !below(end) {
                end
            } else {
                bisect_right(mode, end, &below)
            }
        }
        None => {
            let mut step = mode.abs().max(1.0);
            let mut right = mode + step;
            while !below(right) {
                step *= 2.0;
                right = mode + step;
            }
            bisect_right(mode, right, &below)
        }
    };
    Window { lo, mode, hi }
}

/// `below(a)` is true, `below(b)` false: returns the crossing point.
fn bisect<F: Fn(f64) -> bool>(mut a: f64, mut b: f64, below: &F) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if below(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

/// `below(a)` is false, `below(b)` true: returns the crossing point.
fn bisect_right<F: Fn(f64) -> bool>(mut a: f64, mut b: f64, below: &F) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if below(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    b
}

fn breakpoints(a: f64, b: f64, panels: usize, policy: SplitPolicy, out: &mut Vec<f64>) {
    if b <= a {
        return;
    }
    for j in 0..=panels {
        let s = j as f64 / panels as f64;
        let w = match policy {
            SplitPolicy::Uniform => s,
            SplitPolicy::ModeCentered => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
        };
        let z = if j == panels { b } else { a + (b - a) * w };
        if out.last().is_none_or(|&last| z > last) {
            out.push(z);
        }
    }
}

/// Panel estimate with `panels` panels on each side of the mode. Returns
/// `(integral, sum of |terms|, nodes used)`.
fn panel_estimate<W, G>(
    log_weight: &W,
    integrand: &G,
    window: &Window,
    panels: usize,
    policy: SplitPolicy,
) -> (f64, f64, usize)
where
    W: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let rule = GaussLegendre::shared();
    let mut cuts = Vec::with_capacity(2 * panels + 2);
    breakpoints(window.lo, window.mode, panels, policy, &mut cuts);
    if cuts.is_empty() {
        cuts.push(window.mode);
    }
    breakpoints(window.mode, window.hi, panels, policy, &mut cuts);

    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut nodes = 0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut panel = 0.0;
        let mut panel_abs = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = mid + half * z;
            let lw = log_weight(u);
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let term = w * lw.exp() * integrand(u);
            panel += term;
            panel_abs += term.abs();
        }
        sum += half * panel;
        abs_sum += half * panel_abs;
        nodes += rule.nodes.len();
    }
    (sum, abs_sum, nodes)
}

/// Integrates `exp(log_weight(z)) * integrand(z)` over `window`, doubling
/// the panel count until two successive estimates agree.
pub fn integrate_window<W, G>(
    log_weight: W,
    integrand: G,
    window: Window,
    config: &QuadratureConfig,
) -> Result<f64>
where
    W: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    config.validate()?;
    let mut panels = INITIAL_PANELS_PER_SIDE;
    let (mut previous, _, mut used) = panel_estimate(
        &log_weight,
        &integrand,
        &window,
        panels,
        config.split_policy,
    );
    let mut change = f64::INFINITY;
    loop {
        panels *= 2;
        if 2 * panels * GAUSS_ORDER > config.node_budget {
            return Err(Error::NonConvergence {
                estimate: previous,
                change,
                nodes: used,
            });
        }
        let (current, abs_sum, nodes) = panel_estimate(
            &log_weight,
            &integrand,
            &window,
            panels,
            config.split_policy,
        );
        used = nodes;
        if !current.is_finite() {
            return Err(Error::NonConvergence {
                estimate: current,
                change: f64::NAN,
                nodes,
            });
        }
        change = (current - previous).abs();
        // The rounding floor: no rule can resolve differences below it.
        let noise = 64.0 * f64::EPSILON * abs_sum;
        let allowed = config
            .abs_tolerance
            .max(config.rel_tolerance * current.abs())
            .max(noise);
        if change <= allowed {
            return Ok(current);
        }
        previous = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(GAUSS_ORDER);
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
        for deg in 0..(2 * GAUSS_ORDER) {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(z, w)| w * z.powi(deg as i32))
                .sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn small_rule_matches_known_nodes() {
        let rule = GaussLegendre::new(2);
        assert_relative_eq!(rule.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(rule.weights[0], 1.0, epsilon = 1e-15);
        let rule = GaussLegendre::new(3);
        assert_relative_eq!(rule.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(rule.weights[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn window_brackets_the_mass() {
        // log of u^9 (1-u)^9 envelope, mode 1/2.
        let env = |u: f64| 9.0 * u.ln() + 9.0 * (-u).ln_1p();
        let w = find_window(env, 0.5, 0.0, Some(1.0));
        assert!(w.lo > 0.0 && w.lo < 0.5 && w.hi > 0.5 && w.hi < 1.0);
        assert!((env(w.lo) - (env(0.5) - LOG_CUTOFF)).abs() < 1e-6);
        assert!((env(w.hi) - (env(0.5) - LOG_CUTOFF)).abs() < 1e-6);
    }

    #[test]
    fn window_on_half_line() {
        // Gamma(11) log-density shape
        let env = |s: f64| 10.0 * s.ln() - s;
        let w = find_window(env, 10.0, 0.0, None);
        assert!(w.hi > 60.0 && w.lo < 1.0);
    }

    #[test]
    fn integrates_normalized_beta_density() {
        // Beta(3, 4): density 60 u^2 (1-u)^3
        let lw = |u: f64| 60f64.ln() + 2.0 * u.ln() + 3.0 * (-u).ln_1p();
        let w = find_window(lw, 0.4, 0.0, Some(1.0));
        let cfg = QuadratureConfig::default();
        let one = integrate_window(lw, |_| 1.0, w, &cfg).unwrap();
        assert_relative_eq!(one, 1.0, epsilon = 1e-13);
        let mean = integrate_window(lw, |u| u, w, &cfg).unwrap();
        assert_relative_eq!(mean, 3.0 / 7.0, epsilon = 1e-13);
        let uniform = QuadratureConfig {
            split_policy: SplitPolicy::Uniform,
            ..cfg
        };
        let mean_u = integrate_window(lw, |u| u, w, &uniform).unwrap();
        assert_relative_eq!(mean_u, 3.0 / 7.0, epsilon = 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let lw = |_: f64| 0.0;
        let w = Window {
            lo: 0.0,
            mode: 0.5,
            hi: 1.0,
        };
        let cfg = QuadratureConfig {
            node_budget: 200,
            ..QuadratureConfig::default()
        };
        // Highly oscillatory integrand cannot settle with 200 nodes.
        let err = integrate_window(lw, |u| (4000.0 * u).sin(), w, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn config_validation() {
        let mut cfg = QuadratureConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.node_budget = 10;
        assert!(cfg.validate().is_err());
        cfg.node_budget = 100;
        cfg.rel_tolerance = 0.0;
        assert!(cfg.validate().is_err());
        assert_eq!("uniform".parse::<SplitPolicy>().unwrap(), SplitPolicy::Uniform);
        assert!("zigzag".parse::<SplitPolicy>().is_err());
    }
}
