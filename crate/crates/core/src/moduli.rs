//! Moduli of continuity and smoothness, and a constructive K-functional bound.
//!
//! Grid estimates sample the defining supremum on a finite `(x, h)` grid and
//! are therefore lower bounds of the true modulus. Anything that needs an
//! upper bound must use the analytic moduli carried by a [`TestFunction`].

use serde::Serialize;

use crate::test_function::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    GridLowerEstimate,
    AnalyticExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub value: f64,
    pub kind: ModulusKind,
    pub grid_points: usize,
    pub domain_cap: f64,
}

/// Sampling grid for the sup over `x in [0, T]` and `h in (0, delta]`.
///
/// Steps come from one fixed geometric lattice `T 10^{-j / h_per_decade}`,
/// `j = 0, 1, ...`, down to `T 10^{-h_decades}`; a modulus at `delta` uses the
/// lattice points `<= delta`. The sample sets are nested, so estimates on the
/// same grid are monotone in `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusGrid {
    pub domain_cap: f64,
    pub x_points: usize,
    pub h_per_decade: usize,
    pub h_decades: usize,
}

impl Default for ModulusGrid {
    fn default() -> Self {
        Self {
            domain_cap: 20.0,
            x_points: 4001,
            h_per_decade: 64,
            h_decades: 12,
        }
    }
}

impl ModulusGrid {
    fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let last = (self.x_points.max(2) - 1) as f64;
        (0..self.x_points.max(2)).map(move |i| self.domain_cap * i as f64 / last)
    }

    fn hs(&self, delta: f64) -> Vec<f64> {
        let per = self.h_per_decade.max(1);
        (0..=per * self.h_decades)
            .map(|j| self.domain_cap * 10f64.powf(-(j as f64) / per as f64))
            .filter(|&h| h <= delta)
            .collect()
    }
}

fn grid_sup<F>(grid: &ModulusGrid, delta: f64, diff: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let hs = grid.hs(delta);
    let mut best: f64 = 0.0;
    for x in grid.xs() {
        for &h in &hs {
            let d = diff(x, h).abs();
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Grid lower estimate of `sup_{0<h<=delta} sup_x |f(x+h) - f(x)|`.
pub fn grid_omega1(f: &TestFunction, delta: f64, grid: &ModulusGrid) -> ModulusEstimate {
    let value = if delta > 0.0 {
        grid_sup(grid, delta, |x, h| f.eval(x + h) - f.eval(x))
    } else {
        0.0
    };
    ModulusEstimate {
        delta,
        value,
        kind: ModulusKind::GridLowerEstimate,
        grid_points: grid.x_points,
        domain_cap: grid.domain_cap,
    }
}

/// Grid lower estimate of `sup_{0<h<=delta} sup_x |f(x+2h) - 2f(x+h) + f(x)|`.
pub fn grid_omega2(f: &TestFunction, delta: f64, grid: &ModulusGrid) -> ModulusEstimate {
    let value = if delta > 0.0 {
        grid_sup(grid, delta, |x, h| {
            f.eval(x + 2.0 * h) - 2.0 * f.eval(x + h) + f.eval(x)
        })
    } else {
        0.0
    };
    ModulusEstimate {
        delta,
        value,
        kind: ModulusKind::GridLowerEstimate,
        grid_points: grid.x_points,
        domain_cap: grid.domain_cap,
    }
}

/// First-order modulus of continuity: the analytic value when `f` carries
/// one, otherwise a grid lower estimate.
pub fn omega1(f: &TestFunction, delta: f64, grid: &ModulusGrid) -> ModulusEstimate {
    match f.analytic_omega1(delta) {
        Some(value) => ModulusEstimate {
            delta,
            value,
            kind: ModulusKind::AnalyticExact,
            grid_points: 0,
            domain_cap: f64::INFINITY,
        },
        None => grid_omega1(f, delta, grid),
    }
}

/// Second-order modulus of smoothness, analytic when available.
pub fn omega2(f: &TestFunction, delta: f64, grid: &ModulusGrid) -> ModulusEstimate {
    match f.analytic_omega2(delta) {
        Some(value) => ModulusEstimate {
            delta,
            value,
            kind: ModulusKind::AnalyticExact,
            grid_points: 0,
            domain_cap: f64::INFINITY,
        },
        None => grid_omega2(f, delta, grid),
    }
}

/// Default Gaussian mollifier widths for [`k_functional_upper`].
pub const DEFAULT_SMOOTHING_SCALES: [f64; 5] = [0.02, 0.05, 0.1, 0.2, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KCandidate {
    /// `g = f` itself, scored with the analytic second derivative.
    Identity,
    /// Gaussian mollification of width `sigma`.
    Mollifier { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KFunctionalBound {
    pub delta: f64,
    pub value: f64,
    pub best: KCandidate,
    /// `(candidate, ||f - g|| + delta ||g''||)` for every candidate tried.
    pub candidates: Vec<(KCandidate, f64)>,
}

/// Upper bound on `K(f, delta) = inf_g { ||f - g|| + delta ||g''|| }`.
///
/// Candidates are `g = f` (when `f''` is available) and Gaussian
/// mollifications `g_sigma = f * phi_sigma`, with `f` continued to `t < 0` by
/// point reflection `f(-s) = 2 f(0) - f(s)`. Norms are sup norms over the
/// `x` grid on `[0, T]`.
pub fn k_functional_upper(
    f: &TestFunction,
    delta: f64,
    smoothing_scales: &[f64],
    grid: &ModulusGrid,
) -> KFunctionalBound {
    let mut candidates = Vec::new();
    let xs: Vec<f64> = grid.xs().collect();

    if f.order() >= 2 {
        let second = xs
            .iter()
            .map(|&x| f.eval_derivative(2, x).unwrap_or(f64::NAN).abs())
            .fold(0.0, f64::max);
        candidates.push((KCandidate::Identity, delta * second));
    }

    let f0 = f.eval(0.0);
    let extended = |y: f64| if y >= 0.0 { f.eval(y) } else { 2.0 * f0 - f.eval(-y) };

    for &sigma in smoothing_scales.iter().filter(|s| **s > 0.0) {
        // Trapezoid over s in [-8 sigma, 8 sigma]; spectrally accurate for
        // the Gaussian weight.
        const HALF: i32 = 128;
        let step = 8.0 * sigma / HALF as f64;
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let taps: Vec<(f64, f64, f64)> = (-HALF..=HALF)
            .map(|i| {
                let s = i as f64 * step;
                let phi = norm * (-0.5 * (s / sigma).powi(2)).exp() * step;
                let phi2 = phi * (s * s / sigma.powi(4) - 1.0 / (sigma * sigma));
                (s, phi, phi2)
            })
            .collect();
        let mut dist: f64 = 0.0;
        let mut curvature: f64 = 0.0;
        for &x in &xs {
            let mut g = 0.0;
            let mut g2 = 0.0;
            for &(s, phi, phi2) in &taps {
                let v = extended(x - s);
                g += v * phi;
                g2 += v * phi2;
            }
            dist = dist.max((f.eval(x) - g).abs());
            curvature = curvature.max(g2.abs());
        }
        candidates.push((KCandidate::Mollifier { sigma }, dist + delta * curvature));
    }

    let (best, value) = candidates
        .iter()
        .copied()
        .filter(|(_, v)| v.is_finite())
        .fold((KCandidate::Identity, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    KFunctionalBound {
        delta,
        value,
        best,
        candidates,
    }
}
