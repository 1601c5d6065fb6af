//! Generalized Hermite polynomials `p_k`, functions `φ_k = p_k e^{-sx²/2}`
//! and `ξ_k = |x|^σ φ_k` for the weight `|x|^{2σ} e^{-sx²}`.
//!
//! Evaluation runs the orthonormal three-term recurrence
//! `x p_{k-1} = b_k p_k + b_{k-1} p_{k-2}` in scaled arithmetic, so degrees
//! in the thousands stay finite. The Gaussian and `|x|^σ` factors are folded
//! into the binary exponent instead of being multiplied in at the end.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::{ilogb, ldexp, Scaled, RESCALE_HI, RESCALE_LO};
use crate::special::ln_gamma;

/// Degree above which evaluations log a precision warning.
pub const DEFAULT_K_MAX: usize = 5000;

/// The pair `(σ, s)` with `σ > -1/2` and `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    sigma: f64,
    s: f64,
}

impl Params {
    pub fn new(sigma: f64, s: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= -0.5 {
            return Err(Error::domain(format!("sigma must be > -1/2, got {sigma}")));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::domain(format!("s must be > 0, got {s}")));
        }
        Ok(Params { sigma, s })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `ln μ₀` where `μ₀ = s^{-(σ+1/2)} Γ(σ+1/2)` is the total mass.
    pub fn ln_mu0(&self) -> f64 {
        -(self.sigma + 0.5) * self.s.ln() + ln_gamma(self.sigma + 0.5)
    }

    pub fn mu0(&self) -> f64 {
        self.ln_mu0().exp()
    }

    /// `ln p₀ = -ln μ₀ / 2`.
    pub fn ln_p0(&self) -> f64 {
        -0.5 * self.ln_mu0()
    }

    pub fn p0(&self) -> f64 {
        self.ln_p0().exp()
    }

    /// The factor `k` (k even) or `k + 2σ` (k odd) appearing everywhere in
    /// the ladder relations.
    pub fn ladder_factor(&self, k: usize) -> f64 {
        if k % 2 == 0 {
            k as f64
        } else {
            k as f64 + 2.0 * self.sigma
        }
    }

    /// Off-diagonal Jacobi coefficient `b_k`, `k >= 1`.
    pub fn b(&self, k: usize) -> f64 {
        (self.ladder_factor(k) / (2.0 * self.s)).sqrt()
    }

    /// `β_k` with `B φ_k = β_k φ_{k-1}` and `B' φ_{k-1} = β_k φ_k`.
    pub fn ladder(&self, k: usize) -> f64 {
        (2.0 * self.ladder_factor(k) * self.s).sqrt()
    }

    /// `σ̄_k = σ(σ - (-1)^k)`.
    pub fn sigma_bar(&self, k: usize) -> f64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.sigma * (self.sigma - sign)
    }

    /// Eigenvalue `(2k+1+2σ)s` of the Dunkl harmonic oscillator.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        (2.0 * k as f64 + 1.0 + 2.0 * self.sigma) * self.s
    }

    /// Moment `∫ x^{2m} |x|^{2σ} e^{-sx²} dx = s^{-(m+σ+1/2)} Γ(m+σ+1/2)`.
    pub fn even_moment(&self, m: usize) -> f64 {
        let a = m as f64 + self.sigma + 0.5;
        (-a * self.s.ln() + ln_gamma(a)).exp()
    }
}

/// Validating constructor, the same as [`Params::new`].
pub fn make_params(sigma: f64, s: f64) -> Result<Params> {
    Params::new(sigma, s)
}

/// Off-diagonal coefficients `b_1..b_{k_max}` plus `p₀` and `μ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCoeffs {
    /// `b[i]` holds `b_{i+1}`.
    pub b: Vec<f64>,
    pub p0: f64,
    pub mu0: f64,
}

impl RecurrenceCoeffs {
    /// `b_k` for `k >= 1`.
    pub fn get(&self, k: usize) -> f64 {
        self.b[k - 1]
    }
}

pub fn recurrence_coeffs(p: &Params, k_max: usize) -> RecurrenceCoeffs {
    RecurrenceCoeffs {
        b: (1..=k_max).map(|k| p.b(k)).collect(),
        p0: p.p0(),
        mu0: p.mu0(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Poly,
    Phi,
    Xi,
}

/// A basis value at one point, stored as `mantissa * 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub k: usize,
    pub x: f64,
    pub mantissa: f64,
    pub exponent: i64,
    pub kind: Kind,
}

impl BasisEval {
    fn from_scaled(k: usize, x: f64, kind: Kind, v: Scaled) -> Self {
        BasisEval {
            k,
            x,
            mantissa: v.mantissa,
            exponent: v.exponent,
            kind,
        }
    }

    pub fn scaled(&self) -> Scaled {
        Scaled {
            mantissa: self.mantissa,
            exponent: self.exponent,
        }
    }

    /// Reconstructed value; may over- or underflow for extreme inputs.
    pub fn value(&self) -> f64 {
        ldexp(self.mantissa, self.exponent)
    }

    pub fn ln_abs(&self) -> f64 {
        self.scaled().ln_abs()
    }
}

/// Forward three-term recurrence for the orthonormal `p_j` at a fixed `x`,
/// with the two live values sharing one binary exponent.
#[derive(Debug, Clone)]
pub(crate) struct Recurrence {
    sigma: f64,
    inv_2s: f64,
    x: f64,
    j: usize,
    prev: f64,
    cur: f64,
    exp: i64,
}

impl Recurrence {
    pub(crate) fn new(p: &Params, x: f64) -> Self {
        let p0 = Scaled::from_ln(1.0, p.ln_p0());
        Recurrence {
            sigma: p.sigma,
            inv_2s: 0.5 / p.s,
            x,
            j: 0,
            prev: 0.0,
            cur: p0.mantissa,
            exp: p0.exponent,
        }
    }

    #[inline]
    fn b(&self, k: usize) -> f64 {
        let f = if k % 2 == 0 {
            k as f64
        } else {
            k as f64 + 2.0 * self.sigma
        };
        (f * self.inv_2s).sqrt()
    }

    /// Advances from `p_j` to `p_{j+1}`. Returns the binary shift applied
    /// to the mantissas (values were divided by `2^shift`), or 0.
    #[inline]
    pub(crate) fn step(&mut self) -> i64 {
        let k = self.j + 1;
        let back = if k >= 2 { self.b(k - 1) * self.prev } else { 0.0 };
        let next = (self.x * self.cur - back) / self.b(k);
        self.prev = self.cur;
        self.cur = next;
        self.j = k;
        let m = self.cur.abs().max(self.prev.abs());
        if m > RESCALE_HI || (m < RESCALE_LO && m > 0.0) {
            let shift = ilogb(m);
            self.cur = ldexp(self.cur, -shift);
            self.prev = ldexp(self.prev, -shift);
            self.exp += shift;
            shift
        } else {
            0
        }
    }

    pub(crate) fn advance_to(&mut self, k: usize) {
        while self.j < k {
            self.step();
        }
    }

    /// `p_j` at the current degree.
    pub(crate) fn current(&self) -> Scaled {
        Scaled::from_parts(self.cur, self.exp)
    }

    /// `p_{j-1}` (zero when `j = 0`).
    pub(crate) fn previous(&self) -> Scaled {
        Scaled::from_parts(self.prev, self.exp)
    }

    pub(crate) fn current_mantissa(&self) -> f64 {
        self.cur
    }

    pub(crate) fn shared_exponent(&self) -> i64 {
        self.exp
    }
}

fn warn_k(k: usize) {
    if k > DEFAULT_K_MAX {
        log::warn!("degree {k} exceeds {DEFAULT_K_MAX}; double precision accuracy degrades");
    }
}

/// `log2` of `e^{-sx²/2}`.
pub(crate) fn gauss_log2(p: &Params, x: f64) -> f64 {
    -p.s * x * x / (2.0 * LN_2)
}

/// Scaled `p_k(x)`.
pub fn poly_scaled(p: &Params, k: usize, x: f64) -> Scaled {
    warn_k(k);
    let mut rec = Recurrence::new(p, x);
    rec.advance_to(k);
    rec.current()
}

/// Scaled `(p_{k-1}(x), p_k(x), p_{k+1}(x))`; the first entry is zero for `k = 0`.
pub fn poly_triple(p: &Params, k: usize, x: f64) -> [Scaled; 3] {
    warn_k(k + 1);
    let mut rec = Recurrence::new(p, x);
    rec.advance_to(k);
    let pm = rec.previous();
    let pk = rec.current();
    rec.step();
    [pm, pk, rec.current()]
}

/// Applies the weight factor of `kind` to a scaled polynomial value.
fn fold_weight(p: &Params, k: usize, x: f64, kind: Kind, poly: Scaled) -> Result<Scaled> {
    let mut v = poly;
    match kind {
        Kind::Poly => {}
        Kind::Phi => v.mul_pow2(gauss_log2(p, x)),
        Kind::Xi => {
            if x == 0.0 {
                if p.sigma > 0.0 || (p.sigma < 0.0 && k % 2 == 1) {
                    return Ok(Scaled::ZERO);
                }
                if p.sigma < 0.0 {
                    return Err(Error::singular(
                        0.0,
                        format!("xi_{k} is unbounded at 0 for sigma < 0 and even k"),
                    ));
                }
                // σ = 0: ξ = φ
            } else if v.is_zero() {
                return Ok(v);
            } else {
                v.mul_pow2(gauss_log2(p, x) + p.sigma * x.abs().log2());
            }
        }
    }
    Ok(v)
}

pub fn eval_basis(p: &Params, k: usize, x: f64, kind: Kind) -> Result<BasisEval> {
    if kind == Kind::Xi && x == 0.0 && p.sigma < 0.0 && k % 2 == 0 {
        return Err(Error::singular(
            0.0,
            format!("xi_{k} is unbounded at 0 for sigma < 0 and even k"),
        ));
    }
    let poly = poly_scaled(p, k, x);
    let v = fold_weight(p, k, x, kind, poly)?;
    Ok(BasisEval::from_scaled(k, x, kind, v))
}

/// Plain-float convenience wrapper around [`eval_basis`].
pub fn eval(p: &Params, k: usize, x: f64, kind: Kind) -> Result<f64> {
    eval_basis(p, k, x, kind).map(|e| e.value())
}

/// `φ_k(x)` as a plain float.
pub fn phi(p: &Params, k: usize, x: f64) -> f64 {
    let mut v = poly_scaled(p, k, x);
    v.mul_pow2(gauss_log2(p, x));
    v.value()
}

/// `ξ_k(x)²`, finite for `x != 0`.
pub fn xi_squared(p: &Params, k: usize, x: f64) -> f64 {
    match eval_basis(p, k, x, Kind::Xi) {
        Ok(v) => {
            let m = v.mantissa;
            ldexp(m * m, 2 * v.exponent)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Scaled `(p_k(x), p_k'(x))`, the derivative from the ladder relation
/// `T_σ p_k = β_k p_{k-1}`.
pub fn poly_with_derivative(p: &Params, k: usize, x: f64) -> (Scaled, Scaled) {
    let mut rec = Recurrence::new(p, x);
    rec.advance_to(k);
    if k == 0 {
        return (rec.current(), Scaled::ZERO);
    }
    let beta = p.ladder(k);
    let exp = rec.shared_exponent();
    let pk = rec.current_mantissa();
    let pkm1 = rec.prev;
    let m = if k % 2 == 0 {
        beta * pkm1
    } else if x == 0.0 {
        beta * pkm1 / (1.0 + 2.0 * p.sigma)
    } else {
        beta * pkm1 - 2.0 * p.sigma * pk / x
    };
    (rec.current(), Scaled::from_parts(m, exp))
}

/// Scaled `p_k'(x)`.
pub fn poly_derivative_scaled(p: &Params, k: usize, x: f64) -> Scaled {
    poly_with_derivative(p, k, x).1
}

/// Exact derivative of `p_k`, `φ_k` or `ξ_k` at `x` via the ladder identities.
pub fn eval_derivative(p: &Params, k: usize, x: f64, kind: Kind) -> Result<f64> {
    let (pk, dp) = poly_with_derivative(p, k, x);
    match kind {
        Kind::Poly => Ok(dp.value()),
        Kind::Phi => {
            // (p' - s x p) e^{-sx²/2}
            let g = gauss_log2(p, x);
            let mut a = dp;
            a.mul_pow2(g);
            let mut b = pk;
            b.mul_pow2(g);
            Ok(a.value() - p.s * x * b.value())
        }
        Kind::Xi => {
            if x == 0.0 {
                if p.sigma == 0.0 {
                    return eval_derivative(p, k, x, Kind::Phi);
                }
                return Err(Error::singular(0.0, "xi_k' at 0 requires sigma = 0"));
            }
            // (p' + (σ/x - s x) p) |x|^σ e^{-sx²/2}
            let t = gauss_log2(p, x) + p.sigma * x.abs().log2();
            let mut a = dp;
            a.mul_pow2(t);
            let mut b = pk;
            b.mul_pow2(t);
            Ok(a.value() + (p.sigma / x - p.s * x) * b.value())
        }
    }
}

/// Values `p_0(x), ..., p_n(x)` in scaled form.
pub fn poly_all(p: &Params, n: usize, x: f64) -> Vec<Scaled> {
    let mut rec = Recurrence::new(p, x);
    let mut out = Vec::with_capacity(n + 1);
    out.push(rec.current());
    for _ in 0..n {
        rec.step();
        out.push(rec.current());
    }
    out
}

/// Values `φ_0(x), ..., φ_n(x)` as plain floats.
pub fn phi_all(p: &Params, n: usize, x: f64) -> Vec<f64> {
    let g = gauss_log2(p, x);
    poly_all(p, n, x)
        .into_iter()
        .map(|mut v| {
            v.mul_pow2(g);
            v.value()
        })
        .collect()
}

/// `ln Σ_{j<n} p_j(x)²`, accumulated in one scaled recurrence pass.
pub fn ln_square_sum(p: &Params, n: usize, x: f64) -> f64 {
    assert!(n >= 1, "square sum needs at least one term");
    let mut rec = Recurrence::new(p, x);
    // acc carries the sum in units of 2^(2 * exponent)
    let mut acc = rec.cur * rec.cur;
    for _ in 1..n {
        let shift = rec.step();
        if shift != 0 {
            acc = ldexp(acc, -2 * shift);
        }
        acc += rec.cur * rec.cur;
    }
    acc.ln() + 2.0 * rec.exp as f64 * LN_2
}

/// `p_k(0)` for even `k`, accumulated in log space.
pub fn p_at_zero(p: &Params, k: usize) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::Parity(format!("p_at_zero needs even k, got {k}")));
    }
    let mut ln = p.ln_p0();
    let mut j = 2;
    while j <= k {
        ln += 0.5 * ((j as f64 - 1.0 + 2.0 * p.sigma).ln() - (j as f64).ln());
        j += 2;
    }
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln.exp())
}

/// `p_k'(0)` for odd `k`, accumulated in log space.
pub fn dp_at_zero(p: &Params, k: usize) -> Result<f64> {
    if k % 2 == 0 {
        return Err(Error::Parity(format!("dp_at_zero needs odd k, got {k}")));
    }
    let two_sigma = 2.0 * p.sigma;
    let mut ln = p.ln_p0() + 0.5 * (2.0 * p.s).ln();
    let mut j = 1;
    while j <= k {
        ln += 0.5 * (j as f64 + two_sigma).ln();
        j += 2;
    }
    let mut j = 2;
    while j < k {
        ln -= 0.5 * (j as f64).ln();
        j += 2;
    }
    let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln.exp() / (1.0 + two_sigma))
}

/// `ln γ_k`, the log of the (positive) leading coefficient of `p_k`.
pub fn log_leading_coeff(p: &Params, k: usize) -> f64 {
    let half_ln_2s = 0.5 * (2.0 * p.s).ln();
    (1..=k).fold(p.ln_p0(), |acc, j| {
        acc + half_ln_2s - 0.5 * p.ladder_factor(j).ln()
    })
}

/// `m!_σ`: `0!_σ = 1`, multiplied by `m` at even steps and `m + 2σ` at odd ones.
pub fn perturbed_factorial(p: &Params, m: usize) -> f64 {
    (1..=m).map(|j| p.ladder_factor(j)).product()
}
