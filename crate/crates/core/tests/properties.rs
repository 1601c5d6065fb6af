use proptest::prelude::*;

use dunkl::basis::{eval_basis, perturbed_factorial, poly_scaled, recurrence_coeffs, Kind, Params};
use dunkl::io::fmt_f64;
use dunkl::oscillation::{profile, q_k, Regime};
use dunkl::perturbed::{derive_f2_h, solve_c1c2, F1Spec, LogFactor};
use dunkl::quadrature::build_rule;
use dunkl::spectral::{seq_norms, xi_map, CoeffSeq, SeqParity};

fn sigma() -> impl Strategy<Value = f64> {
    -0.49f64..3.0
}

fn scale() -> impl Strategy<Value = f64> {
    0.2f64..3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn params_reject_out_of_range(sig in -5.0f64..-0.5, s in -2.0f64..0.0) {
        prop_assert!(Params::new(sig, 1.0).is_err());
        prop_assert!(Params::new(0.0, s).is_err());
    }

    #[test]
    fn recurrence_coefficients(sig in sigma(), s in scale()) {
        let p = Params::new(sig, s).unwrap();
        let rc = recurrence_coeffs(&p, 40);
        for k in 1..=40usize {
            let f = if k % 2 == 0 { k as f64 } else { k as f64 + 2.0 * sig };
            let b = rc.get(k);
            prop_assert!(b > 0.0);
            prop_assert!(rel(b, (f / (2.0 * s)).sqrt()) < 1e-14);
        }
        prop_assert!(rel(rc.p0, rc.mu0.powf(-0.5)) < 1e-14);
    }

    #[test]
    fn kinds_differ_by_weight_factors(sig in sigma(), s in scale(), k in 0usize..60, x in 0.05f64..6.0) {
        let p = Params::new(sig, s).unwrap();
        let poly = eval_basis(&p, k, x, Kind::Poly).unwrap().ln_abs();
        let phi = eval_basis(&p, k, x, Kind::Phi).unwrap().ln_abs();
        let xi = eval_basis(&p, k, x, Kind::Xi).unwrap().ln_abs();
        if poly.is_finite() {
            prop_assert!((phi - (poly - s * x * x / 2.0)).abs() < 1e-10 * (1.0 + phi.abs()));
            prop_assert!((xi - (phi + sig * x.ln())).abs() < 1e-10 * (1.0 + xi.abs()));
        }
    }

    #[test]
    fn parity_of_polynomials(sig in sigma(), s in scale(), k in 0usize..200, x in -8.0f64..8.0) {
        let p = Params::new(sig, s).unwrap();
        let a = poly_scaled(&p, k, x);
        let b = poly_scaled(&p, k, -x);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(a.exponent, b.exponent);
        prop_assert!((a.mantissa - sign * b.mantissa).abs() <= 2.0 * f64::EPSILON * a.mantissa.abs());
    }

    #[test]
    fn perturbed_factorial_recursion(sig in sigma(), m in 1usize..30) {
        let p = Params::new(sig, 1.0).unwrap();
        let step = if m % 2 == 0 { m as f64 } else { m as f64 + 2.0 * sig };
        let prev = perturbed_factorial(&p, m - 1);
        let cur = perturbed_factorial(&p, m);
        prop_assert!(cur > 0.0);
        prop_assert!(rel(cur, prev * step) < 1e-13);
    }

    #[test]
    fn rule_structure(sig in sigma(), s in scale(), k in 1usize..120) {
        let p = Params::new(sig, s).unwrap();
        let rule = build_rule(&p, k).unwrap();
        prop_assert_eq!(rule.nodes.len(), k);
        for i in 0..k {
            prop_assert!(rule.weights[i] > 0.0);
            prop_assert!((rule.nodes[i] + rule.nodes[k - 1 - i]).abs() <= 1e-12 * (1.0 + rule.nodes[i].abs()));
            if i + 1 < k {
                prop_assert!(rule.nodes[i] > rule.nodes[i + 1]);
            }
        }
        let mass: f64 = rule.weights.iter().sum();
        prop_assert!(rel(mass, p.mu0()) < 1e-10);
    }

    #[test]
    fn nodes_interlace(sig in sigma(), s in scale(), k in 1usize..150) {
        let p = Params::new(sig, s).unwrap();
        let a = build_rule(&p, k).unwrap();
        let b = build_rule(&p, k + 1).unwrap();
        for i in 0..k {
            prop_assert!(b.nodes[i] > a.nodes[i]);
            prop_assert!(a.nodes[i] > b.nodes[i + 1]);
        }
    }

    #[test]
    fn turning_point_profile(sig in sigma(), s in scale(), k in 2usize..400) {
        let p = Params::new(sig, s).unwrap();
        let pr = profile(&p, k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let sb = sig * (sig - sign);
        prop_assert!((pr.sigma_bar - sb).abs() < 1e-14);
        let base = 2.0 * k as f64 + 1.0 + 2.0 * sig;
        let c_max = if sb > 0.0 { base - 2.0 * sb.sqrt() } else { base };
        prop_assert!(rel(pr.c_max, c_max) < 1e-13);
        if pr.regime == Regime::FourZero {
            let (a, b, xm) = (pr.a_k.unwrap(), pr.b_k.unwrap(), pr.x_max.unwrap());
            prop_assert!(a < xm && xm < b);
            let lam = base * s;
            prop_assert!(q_k(&p, k, a).unwrap().abs() < 1e-9 * lam);
            prop_assert!(q_k(&p, k, b).unwrap().abs() < 1e-9 * lam);
            prop_assert!(rel(s * (b - a).powi(2), pr.c_max) < 1e-10);
            prop_assert!(rel(q_k(&p, k, xm).unwrap(), pr.c_max * s) < 1e-10);
        }
        if let Some(bp) = pr.b_k_plus {
            prop_assert!((q_k(&p, k, bp).unwrap() * bp * bp - 4.0 * std::f64::consts::PI).abs() < 1e-8);
        }
    }

    #[test]
    fn coefficient_parity(v in prop::collection::vec(-1.0f64..1.0, 1..30), odd in any::<bool>()) {
        let c: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(k, &x)| if (k % 2 == 1) == odd { x } else { 0.0 })
            .collect();
        let seq = CoeffSeq::new(c.clone());
        match seq.parity {
            SeqParity::Even => prop_assert!(c.iter().skip(1).step_by(2).all(|&x| x == 0.0)),
            SeqParity::Odd => prop_assert!(c.iter().step_by(2).all(|&x| x == 0.0)),
            _ => {}
        }
    }

    #[test]
    fn weighted_sequence_norms(v in prop::collection::vec(-1.0f64..1.0, 1..60), m in 0.0f64..4.0) {
        let c = CoeffSeq::new(v.clone());
        let n = seq_norms(&c, m).unwrap();
        let n2 = seq_norms(&c, 2.0 * m).unwrap();
        prop_assert!(n.c_m <= n2.ell2_m * (1.0 + 1e-12));
        // ell2_m <= C_{m'} (Σ (1+k)^{m-2m'})^{1/2} when 2m' - m > 1
        let mp = m / 2.0 + 0.75;
        let tail: f64 = (0..v.len()).map(|k| (1.0 + k as f64).powf(m - 2.0 * mp)).sum();
        let np = seq_norms(&c, mp).unwrap();
        prop_assert!(n.ell2_m <= np.c_m * tail.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn division_map_is_bounded(
        sig in sigma(),
        s in scale(),
        v in prop::collection::vec(-1.0f64..1.0, 1..40),
        m in 0.0f64..2.0,
    ) {
        // ‖Ξc‖_{C_m} <= sqrt(2s max(1, 1/(1+2σ))) ‖c‖_{ℓ²_{m'}} (Σ (1+k)^{2m-m'})^{1/2}, m' - 2m > 1
        let p = Params::new(sig, s).unwrap();
        let odd: Vec<f64> = v.iter().enumerate().map(|(k, &x)| if k % 2 == 1 { x } else { 0.0 }).collect();
        let c = CoeffSeq::new(odd);
        let d = xi_map(&p, &c).unwrap();
        let mp = 2.0 * m + 1.5;
        let lhs = seq_norms(&d, m).unwrap().c_m;
        let tail: f64 = (0..c.len()).map(|k| (1.0 + k as f64).powf(2.0 * m - mp)).sum();
        let factor = (2.0 * s * (1.0f64).max(1.0 / (1.0 + 2.0 * sig))).sqrt();
        let rhs = factor * seq_norms(&c, mp).unwrap().ell2_m * tail.sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} > {rhs}");
    }

    #[test]
    fn potential_from_drift(sig in sigma(), c in -2.0f64..2.0, r in 0.5f64..3.0, x in 0.1f64..4.0, which in 0usize..4) {
        let spec = match which {
            0 => F1Spec::InverseMultiple { c1: c },
            1 => F1Spec::Power { c, r },
            2 => F1Spec::LogDerivative { c, g: LogFactor::Exp },
            _ => F1Spec::LogDerivative { c, g: LogFactor::X },
        };
        let op = derive_f2_h(spec, sig, 1.0).unwrap();
        let f1 = spec.f1(x);
        let generic = sig * (sig - 1.0) / (x * x) - f1 * f1 - spec.f1_prime(x);
        prop_assert!((op.f2(x) - generic).abs() <= 1e-10 * (1.0 + generic.abs()));
        prop_assert!((spec.f2_closed(sig, x) - generic).abs() <= 1e-10 * (1.0 + generic.abs()));
        let h = x.powf(sig) * (-spec.primitive(x)).exp();
        prop_assert!(rel(op.h(x), h) < 1e-12);
    }

    #[test]
    fn branches_solve_the_quadratic(c1 in -1.0f64..2.0, c2 in -0.2f64..3.0) {
        let ops = solve_c1c2(c1, c2, 1.0);
        let disc = (2.0 * c1 - 1.0).powi(2) + 4.0 * c2;
        if disc < 0.0 {
            prop_assert!(ops.is_empty());
        }
        for op in &ops {
            let a = op.a.unwrap();
            prop_assert!((a * a + (2.0 * c1 - 1.0) * a - c2).abs() < 1e-10 * (1.0 + c2.abs()));
            prop_assert!((op.sigma() - a - c1).abs() < 1e-12);
            prop_assert!(op.sigma() > -0.5);
        }
        if ops.len() == 2 {
            prop_assert!(ops[0].sigma() != ops[1].sigma());
            prop_assert!(ops[0].eigenvalue(0) != ops[1].eigenvalue(0));
        }
    }

    #[test]
    fn decimal_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
