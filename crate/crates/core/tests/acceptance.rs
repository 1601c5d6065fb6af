//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dunkl::basis::{phi, Params};
use dunkl::calculus::{commutator_residual, xi_ode_residual, Identity};
use dunkl::oscillation::{scan, EstimateScan, ScanOptions, Statistic};
use dunkl::perturbed::{derive_f2_h, eigen_residual, solve_c1c2, F1Spec, LogFactor};
use dunkl::quadrature::{build_rule, christoffel_products, exactness_report};
use dunkl::spectral::{analyze, m_constants, synthesize_at, xi_map, CoeffSeq};
use dunkl::stats::log_spaced;

const SIGMAS: [f64; 4] = [-0.3, 0.0, 0.5, 2.0];
const SS: [f64; 3] = [0.5, 1.0, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn params(sigma: f64, s: f64) -> Params {
    Params::new(sigma, s).expect("admissible parameters")
}

fn opts() -> ScanOptions {
    ScanOptions {
        jobs: Some(4),
        ..ScanOptions::default()
    }
}

fn run_scan(sigma: f64, stat: Statistic, ks: &[usize]) -> EstimateScan {
    scan(&params(sigma, 1.0), stat, ks, &opts()).expect("scan succeeds")
}

fn orthonormality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            let rule = build_rule(&p, 80).unwrap();
            for i in 0..=60 {
                for j in i..=60 {
                    let g = rule.inner(|x| phi(&p, i, x), |x| phi(&p, j, x));
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs <= 10.0,
        format!("max |G - I| = {worst:.2e} (limit 1e-9), {secs:.2} s (limit 10 s)"),
    )
}

fn exactness() -> Outcome {
    let mut worst_even = 0.0f64;
    let mut worst_odd = 0.0f64;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            for k in 1..=50 {
                let e = exactness_report(&p, k).unwrap();
                worst_even = worst_even.max(e.even_relative);
                worst_odd = worst_odd.max(e.odd_absolute / p.mu0());
            }
        }
    }
    outcome(
        worst_even <= 1e-8 && worst_odd <= 1e-8,
        format!("even moments rel {worst_even:.2e}, odd moments {worst_odd:.2e} (limit 1e-8)"),
    )
}

fn christoffel() -> Outcome {
    // Asserted value: 2s for even k and 2s/(1+2σ) for odd k at every node.
    let mut worst_stated = 0.0f64;
    let mut where_stated = (0.0, 0usize, 0.0);
    // Value implied by the derivative ladder: 2s, except 2s/(1+2σ) at the
    // central node x = 0 of odd k.
    let mut worst_ladder = 0.0f64;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            for k in 1..=200 {
                let rule = build_rule(&p, k).unwrap();
                let prods = christoffel_products(&rule);
                let stated = if k % 2 == 0 {
                    2.0 * s
                } else {
                    2.0 * s / (1.0 + 2.0 * sigma)
                };
                for (&x, &v) in rule.nodes.iter().zip(&prods) {
                    let dev = (v - stated).abs() / (2.0 * s);
                    if dev > worst_stated {
                        worst_stated = dev;
                        where_stated = (sigma, k, x);
                    }
                    let ladder = if k % 2 == 1 && x == 0.0 {
                        2.0 * s / (1.0 + 2.0 * sigma)
                    } else {
                        2.0 * s
                    };
                    worst_ladder = worst_ladder.max((v - ladder).abs() / (2.0 * s));
                }
            }
        }
    }
    let (ws, wk, wx) = where_stated;
    outcome(
        worst_stated <= 1e-8,
        format!(
            "max deviation {worst_stated:.2e}·2s (limit 1e-8·2s), worst at sigma={ws}, k={wk}, x={wx:.4}; \
             with 2s at nonzero nodes of odd k the deviation is {worst_ladder:.2e}·2s"
        ),
    )
}

fn operator_algebra() -> Outcome {
    let ids = [
        Identity::LB,
        Identity::LBp,
        Identity::BBp,
        Identity::DxRel,
        Identity::LSigma,
        Identity::LFactor,
    ];
    let mut worst = 0.0f64;
    let mut which = Identity::LB;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            for id in ids {
                let r = commutator_residual(&p, 128, id).unwrap();
                if r > worst {
                    worst = r;
                    which = id;
                }
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max relative residual {worst:.2e} ({which:?}) (limit 1e-12)"),
    )
}

fn ode_residual() -> Outcome {
    let mut worst = 0.0f64;
    for sigma in [-0.3, 0.5] {
        let p = params(sigma, 1.0);
        for k in [0usize, 5, 50, 500] {
            let b = p.eigenvalue(k).sqrt() / p.s();
            let edge = b + 2.0;
            let grid: Vec<f64> = (0..400)
                .map(|i| -edge + 2.0 * edge * (i as f64 + 0.5) / 400.0)
                .filter(|x| x.abs() > 0.05)
                .collect();
            worst = worst.max(xi_ode_residual(&p, k, &grid).unwrap());
        }
    }
    outcome(worst <= 1e-5, format!("max residual {worst:.2e} (limit 1e-5)"))
}

fn decay_rate() -> Outcome {
    let start = Instant::now();
    let band = |slope: Option<f64>| slope.is_some_and(|m| (m + 1.0 / 6.0).abs() <= 0.03);
    let all = log_spaced(100, 2000, 16, false);
    let even = log_spaced(100, 2000, 16, true);
    let a = run_scan(0.0, Statistic::Thm11Ii, &all);
    let b = run_scan(0.5, Statistic::Thm11Ii, &all);
    let c = run_scan(-0.3, Statistic::Thm11Iii, &even);
    let secs = start.elapsed().as_secs_f64();
    let pass = band(a.fitted_slope) && band(b.fitted_slope) && band(c.fitted_slope) && secs <= 300.0;
    outcome(
        pass,
        format!(
            "slopes {:.4} (sigma=0), {:.4} (sigma=0.5), {:.4} (sigma=-0.3, even k, |x| >= x_(k,k/2)); \
             target -1/6 ± 0.03; {secs:.1} s (limit 300 s)",
            a.fitted_slope.unwrap_or(f64::NAN),
            b.fitted_slope.unwrap_or(f64::NAN),
            c.fitted_slope.unwrap_or(f64::NAN)
        ),
    )
}

fn oscillation_envelope() -> Outcome {
    let ks = log_spaced(100, 2000, 16, false);
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [0.0, 0.5, -0.3] {
        let r = run_scan(sigma, Statistic::Thm11I, &ks);
        let first = r.value_at(100).unwrap();
        let max = r.summary().max;
        pass &= max <= 2.0 * first;
        parts.push(format!("sigma={sigma}: max {max:.4} vs 2×{first:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn phi_bounded() -> Outcome {
    let sigma = -0.3;
    let p = params(sigma, 1.0);
    let ks = log_spaced(50, 2000, 16, true);
    let r = run_scan(sigma, Statistic::Thm12, &ks);
    let slope = r.fitted_slope.unwrap_or(f64::NAN);
    let slope_ok = slope.abs() <= 0.02;

    // sup of φ_k² between the two innermost zeros against p_0²
    let p0_sq = p.p0() * p.p0();
    let mut inner_ok = true;
    let mut inner_worst = 0.0f64;
    for &k in &ks {
        let rule = build_rule(&p, k).unwrap();
        let node = rule.nodes[k / 2 - 1];
        let mut best = 0.0f64;
        for i in 0..=400 {
            let x = node * i as f64 / 400.0;
            best = best.max(phi(&p, k, x).powi(2));
        }
        inner_worst = inner_worst.max(best / p0_sq);
        inner_ok &= best < p0_sq;
    }
    outcome(
        slope_ok && inner_ok,
        format!(
            "slope of log sup phi_k^2 = {slope:.4} (limit |slope| <= 0.02), values {:.3}..{:.3}; \
             max over k of sup_(|x| <= x_(k,k/2)) phi_k^2 / p_0^2 = {inner_worst:.4} (must be < 1)",
            r.summary().min,
            r.summary().max
        ),
    )
}

fn lower_envelope() -> Outcome {
    let all = log_spaced(100, 2000, 16, false);
    let even = log_spaced(100, 2000, 16, true);
    let mut pass = true;
    let mut parts = Vec::new();
    for (sigma, stat, ks) in [
        (0.0, Statistic::Thm13I, &all),
        (0.5, Statistic::Thm13I, &all),
        (-0.3, Statistic::Thm13Ii, &even),
    ] {
        let r = run_scan(sigma, stat, ks);
        let sum = r.summary();
        pass &= sum.min >= 0.25 * sum.median;
        parts.push(format!(
            "sigma={sigma}: min {:.4} vs 0.25×median {:.4}",
            sum.min,
            0.25 * sum.median
        ));
    }
    outcome(pass, parts.join("; "))
}

fn bounded_scan(stat: Statistic, cases: &[(f64, Vec<usize>)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sigma, ks) in cases {
        let r = run_scan(*sigma, stat, ks);
        let slope = r.fitted_slope.unwrap_or(f64::NAN);
        pass &= slope <= 0.02;
        parts.push(format!("sigma={sigma}: slope {slope:.4}"));
    }
    outcome(pass, format!("{} (limit 0.02)", parts.join("; ")))
}

fn root_spacing() -> Outcome {
    let ks = log_spaced(100, 2000, 16, false);
    bounded_scan(Statistic::RootSpacing, &[(0.0, ks.clone()), (0.5, ks)])
}

fn tail_bound() -> Outcome {
    let ks = log_spaced(50, 1000, 16, false);
    let odd: Vec<usize> = log_spaced(50, 1000, 16, true).into_iter().map(|k| k + 1).collect();
    bounded_scan(Statistic::LemmaF, &[(0.0, ks), (0.5, odd)])
}

fn partial_sum() -> Outcome {
    bounded_scan(Statistic::LemmaG, &[(0.0, vec![100, 200, 400, 800])])
}

fn division_by_x() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let grid: Vec<f64> = (0..50).map(|i| 0.2 + 2.8 * i as f64 / 49.0).collect();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sigma = rng.gen_range(-0.45..2.5);
        let s = rng.gen_range(0.5..2.0);
        let p = params(sigma, s);
        let n = rng.gen_range(2..40usize);
        let coeffs: Vec<f64> = (0..n)
            .map(|k| {
                if k % 2 == 1 {
                    rng.gen_range(-1.0..1.0) * (1.0 + k as f64).powi(-4)
                } else {
                    0.0
                }
            })
            .collect();
        let c = CoeffSeq::new(coeffs);
        let d = xi_map(&p, &c).unwrap();
        for &x in &grid {
            let q = synthesize_at(&p, &c.coeffs, x) / x;
            let v = synthesize_at(&p, &d.coeffs, x);
            worst = worst.max((v - q).abs() / (1.0 + q.abs()));
        }
    }
    let mut single = 0.0f64;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            let d = xi_map(&p, &CoeffSeq::unit(1)).unwrap();
            single = single.max((d.coeffs[0] - (2.0 * s / (1.0 + 2.0 * sigma)).sqrt()).abs());
        }
    }
    outcome(
        worst <= 1e-6 && single <= 1e-12,
        format!("pointwise {worst:.2e} (limit 1e-6); d_0 for e_1 off by {single:.2e} (limit 1e-12)"),
    )
}

fn perturbed_catalog() -> Outcome {
    let mut ops = Vec::new();
    for c1 in [-0.25, 0.0, 0.3, 0.7] {
        for c2 in [0.0, 2.0 * c1] {
            for op in solve_c1c2(c1, c2, 1.0) {
                ops.push((format!("c1={c1},c2={c2},a={}", op.a.unwrap()), op, 0.1, None));
            }
        }
    }
    let sigma = 0.3;
    ops.push((
        "power(1,2)".into(),
        derive_f2_h(F1Spec::Power { c: 1.0, r: 2.0 }, sigma, 1.0).unwrap(),
        0.1,
        None,
    ));
    ops.push((
        "cos".into(),
        derive_f2_h(F1Spec::LogDerivative { c: 0.5, g: LogFactor::Cos }, sigma, 1.0).unwrap(),
        0.1,
        Some(1.4),
    ));
    ops.push((
        "exp".into(),
        derive_f2_h(F1Spec::LogDerivative { c: 1.0, g: LogFactor::Exp }, sigma, 1.0).unwrap(),
        0.1,
        None,
    ));
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    let mut eig_worst = 0.0f64;
    for (name, op, lo, hi) in &ops {
        for k in 0..=10usize {
            let hi = hi.unwrap_or_else(|| op.eigenvalue(k).sqrt() / op.s() + 3.0);
            let grid = op.f1.grid(*lo, hi, 200);
            let r = eigen_residual(op, k, &grid).unwrap();
            if r > worst {
                worst = r;
                worst_name = format!("{name}, k={k}");
            }
            let expect = (4.0 * k as f64 + 1.0 + 2.0 * op.sigma()) * op.s();
            eig_worst = eig_worst.max((op.eigenvalue(k) - expect).abs());
        }
    }
    outcome(
        worst <= 1e-4 && eig_worst <= 1e-12,
        format!(
            "{} operators, max residual {worst:.2e} at {worst_name} (limit 1e-4); eigenvalue law off by {eig_worst:.1e}",
            ops.len()
        ),
    )
}

fn m_constant_table() -> Outcome {
    // (sigma, m', ev, odd), evaluated by hand
    let fixtures: [(f64, usize, f64, f64); 14] = [
        (0.0, 1, 1.0, 2.0),
        (0.0, 2, 3.0, 3.0),
        (0.0, 3, 4.0, 5.0),
        (0.5, 2, 6.0, 6.0),
        (0.5, 3, 7.0, 10.0),
        (1.0, 4, 11.0, 11.0),
        (2.0, 1, 3.0, 9.0),
        (2.0, 2, 10.0, 10.0),
        (1.5, 5, 19.0, 25.0),
        (-0.3, 1, 3.0, 6.0),
        (-0.3, 2, 5.0, 5.0),
        (-0.3, 3, 8.0, 11.0),
        (-0.45, 4, 10.0, 10.0),
        (-0.1, 7, 18.0, 21.0),
    ];
    let mut bad = Vec::new();
    for (sigma, m, ev, odd) in fixtures {
        let got = m_constants(sigma, m);
        if got.ev != ev || got.odd != odd {
            bad.push(format!("(sigma={sigma}, m'={m}): got ({}, {})", got.ev, got.odd));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} fixtures match", fixtures.len())
        } else {
            bad.join("; ")
        },
    )
}

fn transform_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut parseval = 0.0f64;
    let mut round = 0.0f64;
    for &sigma in &SIGMAS {
        for &s in &SS {
            let p = params(sigma, s);
            let n = 80;
            let c: Vec<f64> = (0..=n)
                .map(|k| rng.gen_range(-1.0..1.0) * (1.0 + k as f64).powi(-6))
                .collect();
            let rule = build_rule(&p, 2 * n).unwrap();
            let norm = rule.inner(|x| synthesize_at(&p, &c, x), |x| synthesize_at(&p, &c, x));
            let exact: f64 = c.iter().map(|v| v * v).sum();
            parseval = parseval.max((norm - exact).abs() / exact);

            let back = analyze(&p, |x| synthesize_at(&p, &c, x), n).unwrap();
            for k in 0..=n / 2 {
                round = round.max((back.coeffs[k] - c[k]).abs());
            }

            let f = |x: f64| x * (1.0 + x * x) * (-0.5 * s * x * x).exp();
            let coeffs = analyze(&p, f, 12).unwrap();
            for i in 0..60 {
                let x = -4.0 + 8.0 * i as f64 / 59.0;
                let v = synthesize_at(&p, &coeffs.coeffs, x);
                round = round.max((v - f(x)).abs());
            }
        }
    }
    outcome(
        parseval <= 1e-8 && round <= 1e-8,
        format!("Parseval rel {parseval:.2e}, round trip {round:.2e} (limit 1e-8)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 16] = [
        ("orthonormality of phi_0..phi_60", orthonormality),
        ("quadrature exactness k <= 50", exactness),
        ("derivative-weight identity k <= 200", christoffel),
        ("ladder operator algebra at dim 128", operator_algebra),
        ("xi_k'' + q_k xi_k = 0 residual", ode_residual),
        ("k^(-1/6) decay of max xi_k^2", decay_rate),
        ("xi_k^2 sqrt(q_k) bounded on the oscillation set", oscillation_envelope),
        ("sup phi_k^2 bounded for sigma < 0, even k", phi_bounded),
        ("lower envelope k^(1/6) max xi_k^2", lower_envelope),
        ("zero spacing k^(-1/6)", root_spacing),
        ("tail bound past the turning point", tail_bound),
        ("Christoffel sum near the largest zero", partial_sum),
        ("division by x on odd coefficients", division_by_x),
        ("perturbed operator catalog", perturbed_catalog),
        ("embedding index table", m_constant_table),
        ("transform round trip and Parseval", transform_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2} {tag} {name}: {} [{:.1} s]",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
        if !result.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {:?}",
            failed.len(),
            criteria.len(),
            failed
        );
        std::process::exit(1);
    }
}
