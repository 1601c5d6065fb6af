//! Expansion in the eigenbasis `φ_k`: analysis and synthesis, weighted
//! sequence norms, the Sobolev-type norm `‖(1+L)^{m/2} f‖`, division by `x`
//! on odd expansions, and grid estimates of Schwartz-type seminorms.

use serde::{Deserialize, Serialize};

use crate::basis::{gauss_log2, Params, Recurrence};
use crate::calculus::{Parity, SampledFn};
use crate::error::{Error, Result};
use crate::quadrature::build_rule;
use crate::scaled::{ldexp, Scaled};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqParity {
    Even,
    Odd,
    Mixed,
}

/// Coefficients `c_0..c_N` of `Σ c_k φ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeq {
    pub coeffs: Vec<f64>,
    pub parity: SeqParity,
}

impl CoeffSeq {
    /// Tags the sequence with the parity its zero pattern implies.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let odd_zero = coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0);
        let even_zero = coeffs.iter().step_by(2).all(|&c| c == 0.0);
        let parity = if odd_zero {
            SeqParity::Even
        } else if even_zero {
            SeqParity::Odd
        } else {
            SeqParity::Mixed
        };
        CoeffSeq { coeffs, parity }
    }

    /// Unit vector `e_k` of length `k + 1`.
    pub fn unit(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        CoeffSeq::new(c)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn even_part(&self) -> CoeffSeq {
        CoeffSeq::new(parity_mask(&self.coeffs, 0))
    }

    pub fn odd_part(&self) -> CoeffSeq {
        CoeffSeq::new(parity_mask(&self.coeffs, 1))
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn parity_mask(c: &[f64], keep: usize) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(k, &v)| if k % 2 == keep { v } else { 0.0 })
        .collect()
}

/// `c_k = ⟨φ_k, f⟩_σ` for `k <= n`, with a `max(4n, 8)`-point rule; `f` should
/// decay like a Gaussian. Mirror nodes are summed in pairs, so odd or even
/// `f` give exactly vanishing coefficients of the other parity.
pub fn analyze<F: Fn(f64) -> f64>(p: &Params, f: F, n: usize) -> Result<CoeffSeq> {
    analyze_with_order(p, f, n, (4 * n).max(8))
}

pub fn analyze_with_order<F: Fn(f64) -> f64>(p: &Params, f: F, n: usize, order: usize) -> Result<CoeffSeq> {
    if order < n + 1 {
        return Err(Error::domain("quadrature order must exceed the highest index"));
    }
    let rule = build_rule(p, order)?;
    let s = p.s();
    // contributions[i][k] = λ_i e^{s x_i²} f(x_i) φ_k(x_i)
    let contribution = |i: usize| -> Vec<f64> {
        let x = rule.nodes[i];
        let fx = f(x);
        let mut out = vec![0.0; n + 1];
        if fx == 0.0 {
            return out;
        }
        let ln_w = rule.ln_weights[i] + 0.5 * s * x * x + fx.abs().ln();
        let w = Scaled::from_ln(fx.signum(), ln_w);
        let mut rec = Recurrence::new(p, x);
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                rec.step();
            }
            *slot = rec.current().mul(w).value();
        }
        out
    };
    let mut c = vec![0.0; n + 1];
    let m = rule.len();
    for i in 0..m / 2 {
        let a = contribution(i);
        let b = contribution(m - 1 - i);
        for k in 0..=n {
            c[k] += a[k] + b[k];
        }
    }
    if m % 2 == 1 {
        let a = contribution(m / 2);
        for k in 0..=n {
            c[k] += a[k];
        }
    }
    Ok(CoeffSeq::new(c))
}

/// `Σ c_k φ_k(x)` at one point, accumulated alongside the scaled recurrence.
pub fn synthesize_at(p: &Params, c: &[f64], x: f64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let mut rec = Recurrence::new(p, x);
    let mut acc = c[0] * rec.current_mantissa();
    for &ck in &c[1..] {
        let shift = rec.step();
        if shift != 0 {
            acc = ldexp(acc, -shift);
        }
        acc += ck * rec.current_mantissa();
    }
    let mut v = Scaled::from_parts(acc, rec.shared_exponent());
    v.mul_pow2(gauss_log2(p, x));
    v.value()
}

pub fn synthesize(p: &Params, c: &CoeffSeq, grid: &[f64]) -> SampledFn {
    let parity = match c.parity {
        SeqParity::Even => Parity::Even,
        SeqParity::Odd => Parity::Odd,
        SeqParity::Mixed => Parity::None,
    };
    SampledFn::new(
        grid.to_vec(),
        grid.iter().map(|&x| synthesize_at(p, &c.coeffs, x)).collect(),
        parity,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeqNorms {
    pub m: f64,
    /// `(Σ c_k² (1+k)^m)^{1/2}`
    pub ell2_m: f64,
    /// `sup_k |c_k| (1+k)^m`
    pub c_m: f64,
}

pub fn seq_norms(c: &CoeffSeq, m: f64) -> Result<SeqNorms> {
    if !(m >= 0.0) {
        return Err(Error::domain(format!("norm order must be >= 0, got {m}")));
    }
    Ok(SeqNorms {
        m,
        ell2_m: ell2_norm(&c.coeffs, m),
        c_m: sup_norm(&c.coeffs, m),
    })
}

pub fn ell2_norm(c: &[f64], m: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, v)| v * v * (1.0 + k as f64).powf(m))
        .sum::<f64>()
        .sqrt()
}

pub fn sup_norm(c: &[f64], m: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, v)| v.abs() * (1.0 + k as f64).powf(m))
        .fold(0.0, f64::max)
}

/// `(Σ c_k² (1 + (2k+1+2σ)s)^m)^{1/2}`.
pub fn w_sigma_norm(p: &Params, c: &CoeffSeq, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::domain(format!("norm order must be >= 0, got {m}")));
    }
    Ok(c.coeffs
        .iter()
        .enumerate()
        .map(|(k, v)| v * v * (1.0 + p.eigenvalue(k)).powf(m))
        .sum::<f64>()
        .sqrt())
}

/// Division by `x` on odd expansions: `Σ c_k φ_k / x = Σ d_ℓ φ_ℓ` with
/// `d_ℓ = Σ_{k>ℓ odd} (-1)^{(k-ℓ-1)/2} r(ℓ,k) c_k` for even `ℓ`, where
/// `r(ℓ,k)² = 2s (ℓ+2)(ℓ+4)⋯(k-1) / ((ℓ+1+2σ)(ℓ+3+2σ)⋯(k+2σ))`.
/// The products are accumulated as logarithms.
pub fn xi_map(p: &Params, c: &CoeffSeq) -> Result<CoeffSeq> {
    if c.parity != SeqParity::Odd && c.coeffs.iter().any(|&v| v != 0.0) {
        return Err(Error::Parity("division by x needs an odd sequence".into()));
    }
    let n = c.len();
    let two_sigma = 2.0 * p.sigma();
    let ln_2s = (2.0 * p.s()).ln();
    let mut d = vec![0.0; n.max(1)];
    for l in (0..n).step_by(2) {
        let mut ln_r = 0.5 * (ln_2s - (l as f64 + 1.0 + two_sigma).ln());
        let mut sign = 1.0;
        let mut acc = 0.0;
        let mut k = l + 1;
        while k < n {
            let ck = c.coeffs[k];
            if ck != 0.0 {
                acc += sign * ck * ln_r.exp();
            }
            // step k -> k + 2
            ln_r += 0.5 * ((k as f64 + 1.0).ln() - (k as f64 + 2.0 + two_sigma).ln());
            sign = -sign;
            k += 2;
        }
        d[l] = acc;
    }
    Ok(CoeffSeq::new(d))
}

/// `T_σ` on coefficients; the result is one entry longer.
pub fn apply_t(p: &Params, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        if k >= 1 {
            out[k - 1] += 0.5 * p.ladder(k) * ck;
        }
        out[k + 1] -= 0.5 * p.ladder(k + 1) * ck;
    }
    out
}

/// Multiplication by `x` on coefficients; the result is one entry longer.
pub fn apply_x(p: &Params, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        if k >= 1 {
            out[k - 1] += p.b(k) * ck;
        }
        out[k + 1] += p.b(k + 1) * ck;
    }
    out
}

/// Ordinary `d/dx` on coefficients: `T_σ c - 2σ Ξ(c_odd)`.
pub fn apply_d(p: &Params, c: &[f64]) -> Vec<f64> {
    let mut out = apply_t(p, c);
    if p.sigma() != 0.0 {
        let odd = CoeffSeq::new(parity_mask(c, 1));
        let xi = xi_map(p, &odd).expect("odd part is odd");
        for (l, v) in xi.coeffs.iter().enumerate() {
            out[l] -= 2.0 * p.sigma() * v;
        }
    }
    out
}

/// Exponents of the Schwartz-type embedding: `(ev, odd)` indices such that
/// the even/odd `S^{M}` spaces embed in the order-`m` Sobolev space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MConstants {
    pub ev: f64,
    pub odd: f64,
}

pub fn m_constants(sigma: f64, m_prime: usize) -> MConstants {
    let m = m_prime as f64;
    if sigma >= 0.0 {
        let c = sigma.ceil();
        let t = c * (c + 3.0);
        if m_prime % 2 == 0 {
            let v = 1.5 * m + m / 4.0 * t + c;
            MConstants { ev: v, odd: v }
        } else {
            MConstants {
                ev: (3.0 * m - 1.0) / 2.0 + (m - 1.0) / 4.0 * t + c,
                odd: (3.0 * m + 1.0) / 2.0 + (m + 1.0) / 4.0 * t + c,
            }
        }
    } else if m_prime % 2 == 0 {
        MConstants { ev: 2.5 * m, odd: 2.5 * m }
    } else {
        MConstants {
            ev: (5.0 * m + 1.0) / 2.0,
            odd: (5.0 * m + 7.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormFlavor {
    /// `Σ_{i+j<=m} sup |x^i f^{(j)}|`
    S,
    /// `Σ_{i+j<=m} sup |x|^σ |x^i T_σ^j f|`, with the parity split for `σ < 0`
    SSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Sup over a finite grid, hence a lower estimate of the true norm.
    pub value: f64,
    /// Set when the top tenth of the coefficients carries more than `1e-6`
    /// of the squared mass.
    pub truncated: bool,
}

/// Whether the tail of `c` holds a non-negligible share of its `ℓ²` mass.
pub fn truncation_suspect(c: &[f64]) -> bool {
    let total: f64 = c.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return false;
    }
    let start = c.len() - c.len().div_ceil(10);
    let tail: f64 = c[start..].iter().map(|v| v * v).sum();
    tail > 1e-6 * total
}

/// Grid estimate of the `S^m` or perturbed `S_σ^m` seminorm of `Σ c_k φ_k`.
pub fn schwartz_norm_estimate(p: &Params, c: &CoeffSeq, m: usize, flavor: NormFlavor) -> Result<NormEstimate> {
    if m > 4 {
        return Err(Error::domain("norm estimates are limited to m <= 4"));
    }
    let truncated = truncation_suspect(&c.coeffs);
    if truncated {
        log::warn!("coefficient tail carries more than 1e-6 of the mass; norm estimate may be truncated");
    }
    let n = c.len() + m;
    let b = ((2.0 * n as f64 + 2.0 + 2.0 * p.sigma().abs()) / p.s()).sqrt();
    let extent = b + 6.0 / p.s().sqrt();
    let grid = crate::calculus::symmetric_grid(extent, 4001);

    let parts: Vec<(Vec<f64>, Option<usize>)> = if flavor == NormFlavor::SSigma && p.sigma() < 0.0 {
        vec![(c.even_part().coeffs, Some(0)), (c.odd_part().coeffs, Some(1))]
    } else {
        vec![(c.coeffs.clone(), None)]
    };
    let mut best = 0.0f64;
    for (coeffs, part) in parts {
        let mut total = 0.0;
        let mut dj = coeffs.clone();
        for j in 0..=m {
            if j > 0 {
                dj = match flavor {
                    NormFlavor::S => apply_d(p, &dj),
                    NormFlavor::SSigma => apply_t(p, &dj),
                };
            }
            let mut g = dj.clone();
            for i in 0..=(m - j) {
                if i > 0 {
                    g = apply_x(p, &g);
                }
                let weighted = match (flavor, part) {
                    (NormFlavor::S, _) => false,
                    (NormFlavor::SSigma, None) => true,
                    // |x|^σ sits on the terms of the opposite parity to (i + j)
                    (NormFlavor::SSigma, Some(par)) => (i + j + par) % 2 == 1,
                };
                let sup = grid
                    .iter()
                    .map(|&x| {
                        if weighted && x == 0.0 && p.sigma() < 0.0 {
                            return 0.0;
                        }
                        let v = synthesize_at(p, &g, x).abs();
                        if weighted {
                            v * x.abs().powf(p.sigma())
                        } else {
                            v
                        }
                    })
                    .fold(0.0, f64::max);
                total += sup;
            }
        }
        best = best.max(total);
    }
    Ok(NormEstimate { value: best, truncated })
}
