//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on failure.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use gamma_ops::builtin::{self, monomial};
use gamma_ops::exact_moments::{compare_closed_forms, raw_moment, ratio_to_f64, OperatorParams};
use gamma_ops::operator_eval::apply;
use gamma_ops::verify::{
    check_first_modulus_bound, check_order_lemma, check_second_modulus_bound, doubling_ladder,
    quadratic_reference, voronovskaja_sequence, voronovskaja_sequence_exact, VoronovskajaOptions,
    ORDER_RATIO_BAND,
};
use gamma_ops::QuadratureConfig;
use num_rational::BigRational;

// Pinned tolerances and budgets.
const C1_BUDGET: Duration = Duration::from_secs(10);
const C2_REL_TOL: f64 = 1e-10;
const C2_BUDGET: Duration = Duration::from_secs(30);
const C3_EXTRAP_TOL: f64 = 1e-9;
const C3_LADDER: (u32, u32) = (25, 102_400);
const C4_LAST_TOL: f64 = 0.05;
const C4_EXTRAP_TOL: f64 = 2e-3;
const C4_BUDGET: Duration = Duration::from_secs(20);
const C5_SLACK_FACTOR: f64 = 10.0;
const C5_BUDGET: Duration = Duration::from_secs(60);
const C6_GROWTH: f64 = 1.5;
const C7_M2_LIMIT: f64 = 2.0;
const C7_M2_REL: f64 = 0.05;

const BOUND_FNS: [&str; 2] = ["exp-neg", "t-over-one-plus"];
const BOUND_NS: [u32; 5] = [10, 20, 50, 100, 200];
const BOUND_KS: [u32; 2] = [1, 2];
const BOUND_RS: [u32; 2] = [0, 1];
const BOUND_XS: [f64; 3] = [0.5, 1.0, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn crit1() -> Outcome {
    let start = Instant::now();
    let ks = [1, 2, 3, 4, 5];
    let rs = [0, 1, 2, 3, 4, 5];
    let low = compare_closed_forms(5..=50, &ks, &rs, &[0, 1, 2]);
    let high = compare_closed_forms(5..=50, &ks, &rs, &[3, 4]);
    let elapsed = start.elapsed();
    let low_bad = low.iter().filter(|c| !c.matches()).count();

    let mut log = String::from("n,k,r,m,closed_form,oracle\n");
    let mut rate = String::new();
    for m in [3, 4] {
        let rows: Vec<_> = high.iter().filter(|c| c.order == m).collect();
        let hits = rows.iter().filter(|c| c.matches()).count();
        let _ = write!(
            rate,
            " m={m}: {hits}/{} ({:.1}%)",
            rows.len(),
            100.0 * hits as f64 / rows.len().max(1) as f64
        );
        for c in rows.iter().filter(|c| !c.matches()) {
            let p = &c.params;
            let _ = writeln!(log, "{},{},{},{m},{},{}", p.n(), p.k(), p.r(), c.closed_form, c.oracle);
        }
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("closed_form_mismatches.csv");
    let logged = std::fs::write(&path, &log).is_ok();
    let mut detail = format!(
        "m<=2: {}/{} exact matches; closed-form match rate{rate}; {:.2?}",
        low.len() - low_bad,
        low.len(),
        elapsed
    );
    if logged {
        let _ = write!(detail, "; mismatches logged to {}", path.display());
    }
    for line in log.lines().skip(1).take(5) {
        let _ = write!(detail, "\n      mismatch {line}");
    }
    Outcome {
        pass: low_bad == 0 && !low.is_empty() && elapsed < C1_BUDGET,
        detail,
    }
}

fn crit2() -> Outcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = 0;
    let mut errors = Vec::new();
    for m in 0..=4u32 {
        let f = monomial(m).unwrap();
        for n in [5, 10, 50, 100, 400] {
            for k in [1, 2, 3] {
                let p = OperatorParams::new(n, k, 0).unwrap();
                // The operator is finite for t^m only when m <= n - k - 1.
                if m + k + 1 > n {
                    skipped += 1;
                    continue;
                }
                let coef = raw_moment(&p, m).unwrap().to_f64();
                for x in [0.5f64, 1.0, 2.0, 10.0] {
                    let exact = coef * x.powi(m as i32);
                    match apply(&p, &f, x, &q) {
                        Ok(v) => {
                            worst = worst.max((v - exact).abs() / exact.abs());
                            checked += 1;
                        }
                        Err(e) => errors.push(format!("m={m} n={n} k={k} x={x}: {e}")),
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: errors.is_empty() && worst <= C2_REL_TOL && elapsed < C2_BUDGET,
        detail: format!(
            "{checked} points, max rel err {worst:.2e} (tol {C2_REL_TOL:.0e}); {skipped} (m,n,k) skipped for growth m > n-k-1; {} errors; {elapsed:.2?}{}",
            errors.len(),
            errors.first().map(|e| format!("; first: {e}")).unwrap_or_default()
        ),
    }
}

fn crit3() -> Outcome {
    let f = monomial(2).unwrap();
    let ladder = doubling_ladder(C3_LADDER.0, C3_LADDER.1).unwrap();
    let ex = voronovskaja_sequence_exact(&f, 1.0, 1, 0, &ladder, true).unwrap();
    let identity = ladder
        .iter()
        .zip(&ex.scaled_deviations)
        .all(|(&n, e)| *e == quadratic_reference(n));
    let two = BigRational::from_integer(2.into());
    let err = ratio_to_f64(&(ex.extrapolated.clone().unwrap() - two)).abs();
    Outcome {
        pass: identity && err <= C3_EXTRAP_TOL,
        detail: format!(
            "E_n == 2n/(n-1) on ladder {}..{} ({} rungs): {identity}; |extrapolated - 2| = {err:.2e} (tol {C3_EXTRAP_TOL:.0e})",
            C3_LADDER.0,
            C3_LADDER.1,
            ladder.len()
        ),
    }
}

fn crit4() -> Outcome {
    let start = Instant::now();
    let f = builtin::exp_neg().unwrap();
    let ladder = doubling_ladder(25, 400).unwrap();
    let rep = voronovskaja_sequence(
        &f,
        1.0,
        1,
        0,
        &ladder,
        &QuadratureConfig::default(),
        &VoronovskajaOptions::default(),
    )
    .unwrap();
    let target = (-1.0f64).exp();
    let last = (rep.scaled_deviations.last().unwrap() - target).abs();
    let extrap = (rep.extrapolated.unwrap() - target).abs();
    let elapsed = start.elapsed();
    Outcome {
        pass: last <= C4_LAST_TOL && extrap <= C4_EXTRAP_TOL && elapsed < C4_BUDGET,
        detail: format!(
            "|E_400 - 1/e| = {last:.3e} (tol {C4_LAST_TOL}); |extrapolated - 1/e| = {extrap:.3e} (tol {C4_EXTRAP_TOL:.0e}); {elapsed:.2?}"
        ),
    }
}

fn crit5_and_6() -> (Outcome, Outcome) {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let floor = -C5_SLACK_FACTOR * q.abs_tolerance;
    let mut min_slack = f64::INFINITY;
    let mut count = 0;
    let mut failures = Vec::new();
    let mut c_max = std::collections::BTreeMap::<u32, f64>::new();
    let mut c_finite = true;
    for id in BOUND_FNS {
        let f = builtin::builtin(id).unwrap();
        for n in BOUND_NS {
            for k in BOUND_KS {
                for r in BOUND_RS {
                    for x in BOUND_XS {
                        let first = check_first_modulus_bound(&f, x, n, k, r, &q).unwrap();
                        count += 1;
                        min_slack = min_slack.min(first.slack);
                        if first.slack < floor {
                            failures.push(format!("{id} n={n} k={k} r={r} x={x} slack={:.3e}", first.slack));
                        }
                        let second = check_second_modulus_bound(&f, x, n, k, r, &q).unwrap();
                        match second.empirical_c {
                            Some(c) if c.is_finite() => {
                                let e = c_max.entry(n).or_insert(0.0);
                                *e = e.max(c);
                            }
                            _ => c_finite = false,
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let c5 = Outcome {
        pass: failures.is_empty() && elapsed < C5_BUDGET,
        detail: format!(
            "{count} reports, min slack {min_slack:.3e} (floor {floor:.0e}); {} below floor; {elapsed:.2?}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    };
    let at50 = c_max.get(&50).copied().unwrap_or(f64::NAN);
    let at200 = c_max.get(&200).copied().unwrap_or(f64::NAN);
    let per_n: Vec<String> = c_max.iter().map(|(n, c)| format!("n={n}:{c:.4}")).collect();
    let c6 = Outcome {
        pass: c_finite && at200 <= C6_GROWTH * at50,
        detail: format!(
            "all finite: {c_finite}; max empirical C {}; n=200 / n=50 = {:.3} (limit {C6_GROWTH})",
            per_n.join(" "),
            at200 / at50
        ),
    };
    (c5, c6)
}

fn crit7() -> Outcome {
    let ladder = doubling_ladder(20, 320).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2, 3, 4] {
        let rep = check_order_lemma(m, 1, 0, &ladder).unwrap();
        let ratios: Vec<f64> = rep.rows.iter().filter_map(|r| r.ratio).collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        pass &= rep.pass && !rep.degenerate;
        parts.push(format!("m={m} ratios in [{lo:.3}, {hi:.3}]"));
        if m == 2 {
            let last = rep.rows.last().unwrap().scaled;
            let rel = (last - C7_M2_LIMIT).abs() / C7_M2_LIMIT;
            pass &= rel <= C7_M2_REL;
            parts.push(format!("m=2 scaled at n=320 = {last:.5} (rel {rel:.2e})"));
        }
    }
    Outcome {
        pass,
        detail: format!(
            "band [{}, {}]; {}",
            ORDER_RATIO_BAND.0,
            ORDER_RATIO_BAND.1,
            parts.join("; ")
        ),
    }
}

fn main() {
    let (c5, c6) = crit5_and_6();
    let results = [
        ("1 closed-form moments vs oracle", crit1()),
        ("2 quadrature vs exact monomials", crit2()),
        ("3 exact quadratic ladder", crit3()),
        ("4 quadrature ladder for e^-t", crit4()),
        ("5 first-modulus bound slack", c5),
        ("6 empirical constant stability", c6),
        ("7 central moment order", crit7()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
