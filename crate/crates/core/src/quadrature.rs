//! Gaussian quadrature for the weight `|x|^{2σ} e^{-sx²}`.
//!
//! Nodes come from the Jacobi matrix (zero diagonal, off-diagonals `b_j`)
//! followed by Newton polishing on the recurrence. Weights use the
//! Christoffel form `λ_i = 1 / Σ_{j<k} p_j(x_i)²`, evaluated in log space so
//! that weights far below `f64::MIN_POSITIVE` keep their logarithm. The
//! classical `μ₀ v₀²` eigenvector weights are kept as a cross-check.

use serde::Serialize;

use crate::basis::{ln_square_sum, poly_scaled, poly_with_derivative, Params};
use crate::error::{Error, Result};
use crate::tridiag::symmetric_tridiagonal_eigen;

const NEWTON_STEPS: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub k: usize,
    /// Strictly decreasing.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln λ_i`; finite even where `weights[i]` underflows.
    pub ln_weights: Vec<f64>,
    /// `μ₀ v₀²` from the eigenvectors, for cross-checking.
    pub eigvec_weights: Vec<f64>,
    #[serde(skip)]
    params: Params,
}

impl QuadratureRule {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// `Σ λ_i f(x_i)`: integrates `f` against the full weight.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `∫ f g |x|^{2σ} dx` for functions carrying their own Gaussian decay
    /// (like `φ_k`). The factor `e^{sx²}` is combined with `λ_i` in log space.
    pub fn inner<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(&self, f: F, g: G) -> f64 {
        let s = self.params.s();
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| {
                let v = f(x) * g(x);
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (lw + s * x * x + v.abs().ln()).exp()
                }
            })
            .sum()
    }

    /// Largest relative gap between Christoffel and eigenvector weights,
    /// over weights at least `1e-8` times the largest one.
    pub fn weight_crosscheck(&self) -> f64 {
        let wmax = self.weights.iter().cloned().fold(0.0, f64::max);
        self.weights
            .iter()
            .zip(&self.eigvec_weights)
            .filter(|(&w, _)| w >= 1e-8 * wmax)
            .map(|(&w, &e)| (w - e).abs() / w)
            .fold(0.0, f64::max)
    }
}

/// Builds the `k`-point rule whose nodes are the zeros of `p_k`.
pub fn build_rule(p: &Params, k: usize) -> Result<QuadratureRule> {
    if k == 0 {
        return Err(Error::domain("quadrature order must be at least 1"));
    }
    let off: Vec<f64> = (1..k).map(|j| p.b(j)).collect();
    let eig = symmetric_tridiagonal_eigen(&vec![0.0; k], &off)?;
    let mu0 = p.mu0();

    let mut pairs: Vec<(f64, f64)> = eig
        .values
        .iter()
        .zip(&eig.first_components)
        .map(|(&x, &v)| (x, mu0 * v * v))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut nodes: Vec<f64> = pairs.iter().map(|q| q.0).collect();
    let half = k / 2;
    // The nonnegative half is polished, then mirrored.
    for i in 0..half {
        nodes[i] = polish(p, k, nodes[i], &nodes, i);
    }
    for i in 0..half {
        nodes[k - 1 - i] = -nodes[i];
    }
    if k % 2 == 1 {
        nodes[half] = 0.0;
    }

    let mut eigvec_weights: Vec<f64> = pairs.iter().map(|q| q.1).collect();
    for i in 0..half {
        let w = 0.5 * (eigvec_weights[i] + eigvec_weights[k - 1 - i]);
        eigvec_weights[i] = w;
        eigvec_weights[k - 1 - i] = w;
    }

    let ln_weights: Vec<f64> = nodes.iter().map(|&x| -ln_square_sum(p, k, x)).collect();
    let weights = ln_weights.iter().map(|l| l.exp()).collect();

    for w in nodes.windows(2) {
        if w[0] <= w[1] {
            log::warn!("quadrature nodes of order {k} are not strictly decreasing");
            break;
        }
    }

    Ok(QuadratureRule {
        k,
        nodes,
        weights,
        ln_weights,
        eigvec_weights,
        params: *p,
    })
}

/// Newton steps on `p_k`, rejected if they leave the bracket formed by the
/// neighbouring eigenvalues.
fn polish(p: &Params, k: usize, x0: f64, nodes: &[f64], i: usize) -> f64 {
    let hi = if i == 0 { f64::INFINITY } else { nodes[i - 1] };
    let lo = if i + 1 < nodes.len() { nodes[i + 1] } else { f64::NEG_INFINITY };
    let mut x = x0;
    for _ in 0..NEWTON_STEPS {
        let (v, dv) = poly_with_derivative(p, k, x);
        if v.is_zero() || dv.is_zero() {
            break;
        }
        let dx = v.ratio(&dv);
        let next = x - dx;
        if !next.is_finite() || next >= hi || next <= lo {
            break;
        }
        x = next;
        if dx.abs() <= 1e-17 * x.abs() {
            break;
        }
    }
    x
}

/// Max relative error over even moments `∫ x^{2m}`, `2m <= 2k-1`, and the
/// max absolute value of the odd ones.
#[derive(Debug, Clone, Copy)]
pub struct Exactness {
    pub even_relative: f64,
    pub odd_absolute: f64,
}

pub fn exactness_report(p: &Params, k: usize) -> Result<Exactness> {
    let rule = build_rule(p, k)?;
    let mut even_relative = 0.0f64;
    let mut odd_absolute = 0.0f64;
    let k = rule.k;
    // Mirror pairs are summed together so odd moments cancel term by term.
    let term = |i: usize, deg: usize| -> f64 {
        let x = rule.nodes[i];
        let lw = rule.ln_weights[i];
        if x == 0.0 {
            return if deg == 0 { lw.exp() } else { 0.0 };
        }
        let sign = if deg % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
        sign * (lw + deg as f64 * x.abs().ln()).exp()
    };
    for deg in 0..2 * k {
        let mut q = 0.0;
        for i in 0..k / 2 {
            q += term(i, deg) + term(k - 1 - i, deg);
        }
        if k % 2 == 1 {
            q += term(k / 2, deg);
        }
        if deg % 2 == 0 {
            let exact = p.even_moment(deg / 2);
            even_relative = even_relative.max((q - exact).abs() / exact);
        } else {
            odd_absolute = odd_absolute.max(q.abs());
        }
    }
    Ok(Exactness {
        even_relative,
        odd_absolute,
    })
}

/// Worst relative moment error of the `k`-point rule over `x^{2m}`, `2m <= 2k-1`.
pub fn exactness_residual(p: &Params, k: usize) -> Result<f64> {
    exactness_report(p, k).map(|e| e.even_relative)
}

/// Relative error of the rule on `x^deg`, including degrees past exactness.
pub fn moment_error(rule: &QuadratureRule, deg: usize) -> f64 {
    let q = rule.integrate(|x| x.powi(deg as i32));
    if deg % 2 == 1 {
        q.abs()
    } else {
        let exact = rule.params.even_moment(deg / 2);
        (q - exact).abs() / exact
    }
}

/// `p_k'(x_i)² λ_i` at every node of `rule`.
pub fn christoffel_products(rule: &QuadratureRule) -> Vec<f64> {
    let p = &rule.params;
    rule.nodes
        .iter()
        .zip(&rule.ln_weights)
        .map(|(&x, &lw)| {
            let dp = poly_with_derivative(p, rule.k, x).1;
            (2.0 * dp.ln_abs() + lw).exp()
        })
        .collect()
}

/// The value `p_k'(x)² λ` takes at a node `x` of the `k`-point rule:
/// `2s`, except at the central node `0` of odd order where it is `2s/(1+2σ)`.
pub fn christoffel_value(p: &Params, k: usize, x: f64) -> f64 {
    if k % 2 == 1 && x == 0.0 {
        2.0 * p.s() / (1.0 + 2.0 * p.sigma())
    } else {
        2.0 * p.s()
    }
}

/// `(p(x)², ‖p‖² Σ_{ℓ<=k} p_ℓ(x)²)` for `p = Σ coeffs[j] p_j`.
pub fn christoffel_sum_check(p: &Params, k: usize, x: f64, coeffs: &[f64]) -> Result<(f64, f64)> {
    let degree = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .unwrap_or(0);
    if coeffs.len() > k && degree >= k {
        return Err(Error::DegreeTooHigh { degree, max: k.saturating_sub(1) });
    }
    let value: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| if c == 0.0 { 0.0 } else { c * poly_scaled(p, j, x).value() })
        .sum();
    let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
    let sum = ln_square_sum(p, k + 1, x).exp();
    Ok((value * value, norm2 * sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{eval, make_params, phi, Kind};

    #[test]
    fn one_point_rule() {
        let p = make_params(0.3, 1.7).unwrap();
        let r = build_rule(&p, 1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - p.mu0()).abs() < 1e-14 * p.mu0());
    }

    #[test]
    fn two_point_rule() {
        let p = make_params(0.5, 1.0).unwrap();
        let r = build_rule(&p, 2).unwrap();
        assert!((r.nodes[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.nodes[1], -r.nodes[0]);
    }

    #[test]
    fn classical_gauss_hermite_ten_points() {
        // Gauss–Hermite nodes and weights for e^{-x²}, n = 10.
        let want = [
            (3.436_159_118_837_738, 7.640_432_855_232_621e-6),
            (2.532_731_674_232_79, 1.343_645_746_781_233e-3),
            (1.756_683_649_299_882, 3.387_439_445_548_106e-2),
            (1.036_610_829_789_514, 2.401_386_110_823_147e-1),
            (0.342_901_327_223_705, 6.108_626_337_353_258e-1),
        ];
        let p = make_params(0.0, 1.0).unwrap();
        let r = build_rule(&p, 10).unwrap();
        for (i, &(x, w)) in want.iter().enumerate() {
            assert!((r.nodes[i] - x).abs() < 1e-12, "node {i}");
            assert!((r.weights[i] - w).abs() < 1e-12 * w.max(1e-3), "weight {i}");
            assert_eq!(r.nodes[9 - i], -r.nodes[i]);
        }
    }

    #[test]
    fn weights_sum_to_total_mass() {
        for sigma in [-0.3, 0.0, 0.5, 2.0] {
            let p = make_params(sigma, 1.3).unwrap();
            for k in [1, 2, 7, 40, 151] {
                let r = build_rule(&p, k).unwrap();
                let total: f64 = r.weights.iter().sum();
                assert!((total - p.mu0()).abs() < 1e-12 * p.mu0());
                assert!(r.weight_crosscheck() < 1e-6, "sigma={sigma} k={k}");
            }
        }
    }

    #[test]
    fn inner_products() {
        let p = make_params(0.5, 1.0).unwrap();
        let r = build_rule(&p, 40).unwrap();
        let n33 = r.inner(|x| phi(&p, 3, x), |x| phi(&p, 3, x));
        assert!((n33 - 1.0).abs() < 1e-10);
        let n24 = r.inner(|x| phi(&p, 2, x), |x| phi(&p, 4, x));
        assert!(n24.abs() < 1e-10);
        let m1 = r.integrate(|x| x * x);
        assert!((m1 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exactness() {
        let p = make_params(0.0, 1.0).unwrap();
        assert!(exactness_residual(&p, 5).unwrap() < 1e-10);
        let q = make_params(-0.3, 1.0).unwrap();
        let e = exactness_report(&q, 50).unwrap();
        assert!(e.even_relative < 1e-8 && e.odd_absolute < 1e-13, "{e:?}");
        let r = build_rule(&p, 5).unwrap();
        let beyond = moment_error(&r, 10);
        assert!(beyond > 1e-6, "{beyond}");
    }

    #[test]
    fn christoffel_products_nonzero_nodes() {
        let p = make_params(0.5, 1.0).unwrap();
        for k in [3, 4, 9, 30] {
            let r = build_rule(&p, k).unwrap();
            for (prod, &x) in christoffel_products(&r).iter().zip(&r.nodes) {
                let want = christoffel_value(&p, k, x);
                assert!((prod - want).abs() < 1e-10, "k={k} x={x}: {prod} vs {want}");
            }
        }
    }

    #[test]
    fn christoffel_sum_inequality() {
        let p = make_params(0.5, 1.0).unwrap();
        let (lhs, rhs) = christoffel_sum_check(&p, 5, 0.7, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(lhs <= rhs);
        let (lhs, rhs) = christoffel_sum_check(&p, 5, 0.7, &[2.0]).unwrap();
        assert!(lhs <= rhs);
        let p0 = eval(&p, 0, 0.7, Kind::Poly).unwrap();
        assert!((lhs - 4.0 * p0 * p0).abs() < 1e-14);
        assert!(matches!(
            christoffel_sum_check(&p, 5, 0.7, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            Err(Error::DegreeTooHigh { .. })
        ));
    }
}
