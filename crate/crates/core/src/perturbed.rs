//! Operators `P = H - 2 f₁ d/dx + f₂` on the half line obtained by
//! conjugating the even part of the Dunkl oscillator with a positive
//! function `h`.
//!
//! Given `f₁` with primitive `F₁`, the pair
//! `f₂ = σ(σ-1)x⁻² - f₁² - f₁'` and `h = x^σ e^{-F₁}` makes
//! `P = h L_ev h⁻¹`. The eigenfunctions are `√2 h φ_{2k}` with eigenvalues
//! `(4k+1+2σ)s`, orthonormal in `L²(ℝ₊, e^{2F₁} dx)`.
//!
//! Interchanging `h` and `d/dx` in `P` gives an operator of the same type;
//! that variant is not modelled here.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{eval_basis, Kind, Params};
use crate::calculus::{Parity, SampledFn};
use crate::error::{Error, Result};
use crate::fd;
use crate::quadrature::build_rule;
use crate::scaled::Scaled;

/// Distance kept from the excluded points of `U` when building grids.
pub const U_CLEARANCE: f64 = 0.05;

/// The function `g` in `f₁ = c g'/g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogFactor {
    X,
    Cos,
    Exp,
    /// `g = exp(x^n)`, `n ≠ 0`.
    ExpPow(i32),
}

impl LogFactor {
    pub fn name(&self) -> &'static str {
        match self {
            LogFactor::X => "x",
            LogFactor::Cos => "cos",
            LogFactor::Exp => "exp",
            LogFactor::ExpPow(_) => "exp_xn",
        }
    }

    /// `g'/g`
    fn ratio1(&self, x: f64) -> f64 {
        match *self {
            LogFactor::X => 1.0 / x,
            LogFactor::Cos => -x.tan(),
            LogFactor::Exp => 1.0,
            LogFactor::ExpPow(n) => {
                let n = n as f64;
                n * x.powf(n - 1.0)
            }
        }
    }

    /// `g''/g`
    fn ratio2(&self, x: f64) -> f64 {
        match *self {
            LogFactor::X => 0.0,
            LogFactor::Cos => -1.0,
            LogFactor::Exp => 1.0,
            LogFactor::ExpPow(n) => {
                let n = n as f64;
                n * (n - 1.0) * x.powf(n - 2.0) + n * n * x.powf(2.0 * n - 2.0)
            }
        }
    }

    /// `ln |g|`
    fn ln_abs(&self, x: f64) -> f64 {
        match *self {
            LogFactor::X => x.ln(),
            LogFactor::Cos => x.cos().abs().ln(),
            LogFactor::Exp => x,
            LogFactor::ExpPow(n) => x.powi(n),
        }
    }
}

/// The first-order coefficient `f₁`, one of a closed set of families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum F1Spec {
    /// `c₁ / x`
    InverseMultiple { c1: f64 },
    /// `c x^r`, `r ≠ -1`
    Power { c: f64, r: f64 },
    /// `c g'/g`
    LogDerivative { c: f64, g: LogFactor },
}

impl F1Spec {
    pub fn family(&self) -> &'static str {
        match self {
            F1Spec::InverseMultiple { .. } => "inverse_multiple",
            F1Spec::Power { .. } => "power",
            F1Spec::LogDerivative { .. } => "log_derivative",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite")))
            }
        };
        match *self {
            F1Spec::InverseMultiple { c1 } => finite(c1, "c1"),
            F1Spec::Power { c, r } => {
                finite(c, "c")?;
                finite(r, "r")?;
                if r == -1.0 {
                    return Err(Error::BadFamily(
                        "r = -1 belongs to the inverse_multiple family".into(),
                    ));
                }
                Ok(())
            }
            F1Spec::LogDerivative { c, g } => {
                finite(c, "c")?;
                if g == LogFactor::ExpPow(0) {
                    return Err(Error::BadFamily("exp_xn needs n != 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn f1(&self, x: f64) -> f64 {
        match *self {
            F1Spec::InverseMultiple { c1 } => c1 / x,
            F1Spec::Power { c, r } => c * x.powf(r),
            F1Spec::LogDerivative { c, g } => c * g.ratio1(x),
        }
    }

    pub fn f1_prime(&self, x: f64) -> f64 {
        match *self {
            F1Spec::InverseMultiple { c1 } => -c1 / (x * x),
            F1Spec::Power { c, r } => c * r * x.powf(r - 1.0),
            F1Spec::LogDerivative { c, g } => {
                let r1 = g.ratio1(x);
                c * (g.ratio2(x) - r1 * r1)
            }
        }
    }

    /// The primitive `F₁` used for `h` and the weight.
    pub fn primitive(&self, x: f64) -> f64 {
        match *self {
            F1Spec::InverseMultiple { c1 } => c1 * x.ln(),
            F1Spec::Power { c, r } => c * x.powf(r + 1.0) / (r + 1.0),
            F1Spec::LogDerivative { c, g } => c * g.ln_abs(x),
        }
    }

    /// Family-specific closed form of `f₂`.
    pub fn f2_closed(&self, sigma: f64, x: f64) -> f64 {
        let base = sigma * (sigma - 1.0) / (x * x);
        match *self {
            F1Spec::InverseMultiple { c1 } => base + c1 * (1.0 - c1) / (x * x),
            F1Spec::Power { c, r } => {
                base - c * c * x.powf(2.0 * r) - c * r * x.powf(r - 1.0)
            }
            F1Spec::LogDerivative { c, g } => match g {
                LogFactor::Cos => {
                    let t = x.tan();
                    base - c * (c - 1.0) * t * t + c
                }
                LogFactor::Exp => base - c * c,
                _ => {
                    let r1 = g.ratio1(x);
                    base - c * (c - 1.0) * r1 * r1 - c * g.ratio2(x)
                }
            },
        }
    }

    /// Whether `x` lies in the open set `U` where the coefficients are defined.
    pub fn in_domain(&self, x: f64) -> bool {
        x > 0.0 && x.is_finite() && self.pole_distance(x) > 1e-12
    }

    /// Distance from `x > 0` to the nearest point excluded from `U`
    /// (`0` itself included).
    pub fn boundary_distance(&self, x: f64) -> f64 {
        x.min(self.pole_distance(x))
    }

    /// Distance to the nearest excluded point other than `0`.
    fn pole_distance(&self, x: f64) -> f64 {
        match self {
            F1Spec::LogDerivative {
                g: LogFactor::Cos, ..
            } => {
                let j = ((x - FRAC_PI_2) / PI).round().max(0.0);
                (x - (FRAC_PI_2 + j * PI)).abs()
            }
            _ => f64::INFINITY,
        }
    }

    /// `n` equispaced points on `[lo, hi]`, dropping those closer than
    /// [`U_CLEARANCE`] to a point excluded from `U`.
    pub fn grid(&self, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .filter(|&x| x > 0.0 && self.pole_distance(x) >= U_CLEARANCE)
            .collect()
    }

    fn params_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match *self {
            F1Spec::InverseMultiple { c1 } => {
                m.insert("c1".into(), c1);
            }
            F1Spec::Power { c, r } => {
                m.insert("c".into(), c);
                m.insert("r".into(), r);
            }
            F1Spec::LogDerivative { c, g } => {
                m.insert("c".into(), c);
                if let LogFactor::ExpPow(n) = g {
                    m.insert("n".into(), n as f64);
                }
            }
        }
        m
    }
}

/// `P = H - 2f₁ d/dx + f₂` together with its conjugating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedOperator {
    pub f1: F1Spec,
    pub params: Params,
    /// Exponent of `h = x^a` for the `c₁/x` family solved from `(c₁, c₂)`.
    pub a: Option<f64>,
}

/// JSON form of a [`PerturbedOperator`].
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDescriptor {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub sigma: f64,
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    pub eigenvalue_law: String,
    pub ground_eigenvalue: f64,
}

/// Assembles `f₂`, `F₁` and `h` for the given `f₁`.
pub fn derive_f2_h(spec: F1Spec, sigma: f64, s: f64) -> Result<PerturbedOperator> {
    let params = Params::new(sigma, s)?;
    spec.validate()?;
    Ok(PerturbedOperator {
        f1: spec,
        params,
        a: None,
    })
}

/// All operators `H - 2c₁x⁻¹ d/dx + c₂x⁻²` of the form above: one per root
/// `a` of `a² + (2c₁-1)a - c₂ = 0` with `σ = a + c₁ > -1/2`, sorted by `a`.
pub fn solve_c1c2(c1: f64, c2: f64, s: f64) -> Vec<PerturbedOperator> {
    let b = 2.0 * c1 - 1.0;
    let disc = b * b + 4.0 * c2;
    if !(disc >= 0.0) || !c1.is_finite() {
        return Vec::new();
    }
    let root = disc.sqrt();
    let mut roots = vec![(-b - root) / 2.0];
    if root > 0.0 {
        roots.push((-b + root) / 2.0);
    }
    roots
        .into_iter()
        .filter_map(|a| {
            let params = Params::new(a + c1, s).ok()?;
            Some(PerturbedOperator {
                f1: F1Spec::InverseMultiple { c1 },
                params,
                a: Some(a),
            })
        })
        .collect()
}

impl PerturbedOperator {
    pub fn sigma(&self) -> f64 {
        self.params.sigma()
    }

    pub fn s(&self) -> f64 {
        self.params.s()
    }

    /// `(4k+1+2σ)s`, the eigenvalue of `√2 h φ_{2k}`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        (4.0 * k as f64 + 1.0 + 2.0 * self.sigma()) * self.s()
    }

    pub fn f1(&self, x: f64) -> f64 {
        self.f1.f1(x)
    }

    /// `σ(σ-1)x⁻² - f₁² - f₁'`.
    pub fn f2(&self, x: f64) -> f64 {
        let sigma = self.sigma();
        let f1 = self.f1.f1(x);
        sigma * (sigma - 1.0) / (x * x) - f1 * f1 - self.f1.f1_prime(x)
    }

    pub fn primitive(&self, x: f64) -> f64 {
        self.f1.primitive(x)
    }

    /// `ln h(x) = σ ln x - F₁(x)`.
    pub fn ln_h(&self, x: f64) -> f64 {
        match (self.a, self.f1) {
            (Some(a), F1Spec::InverseMultiple { .. }) => a * x.ln(),
            _ => self.sigma() * x.ln() - self.f1.primitive(x),
        }
    }

    pub fn h(&self, x: f64) -> f64 {
        self.ln_h(x).exp()
    }

    /// Density `e^{2F₁}` of the Hilbert space.
    pub fn weight(&self, x: f64) -> f64 {
        (2.0 * self.f1.primitive(x)).exp()
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::singular(x, "outside the half line"));
        }
        if !self.f1.in_domain(x) {
            return Err(Error::singular(x, "excluded from the domain of f1"));
        }
        Ok(())
    }

    /// `√2 h(x) φ_{2k}(x)` in scaled form.
    pub fn eigen_scaled(&self, k: usize, x: f64) -> Result<Scaled> {
        self.check_point(x)?;
        let ln_h = self.ln_h(x);
        if !ln_h.is_finite() {
            return Err(Error::singular(x, "h is not finite"));
        }
        let mut v = eval_basis(&self.params, 2 * k, x, Kind::Phi)?.scaled();
        v.mul_pow2(ln_h / LN_2 + 0.5);
        Ok(v)
    }

    pub fn eigen_value_at(&self, k: usize, x: f64) -> Result<f64> {
        self.eigen_scaled(k, x).map(|v| v.value())
    }

    /// `P u` at `x` for a function `u`, by five-point differences with step `step`.
    pub fn apply<F: Fn(f64) -> f64>(&self, u: F, x: f64, step: f64) -> f64 {
        let s = self.s();
        let u0 = u(x);
        let d1 = fd::first(&u, x, step);
        let d2 = fd::second(&u, x, step);
        -d2 + s * s * x * x * u0 - 2.0 * self.f1(x) * d1 + self.f2(x) * u0
    }

    /// Finite-difference step at `x` for the `k`-th eigenfunction.
    pub fn fd_step(&self, k: usize, x: f64) -> f64 {
        let wavelength = 1.0 / self.eigenvalue(k).sqrt();
        let scale = x.min(self.f1.boundary_distance(x)).min(wavelength);
        (1e-3 * scale).max(1e-5).min(1e-3)
    }

    pub fn descriptor(&self) -> OperatorDescriptor {
        let mut params = self.f1.params_map();
        if let (Some(_), F1Spec::InverseMultiple { c1 }) = (self.a, self.f1) {
            let sigma = self.sigma();
            params.insert("c2".into(), sigma * (sigma - 1.0) + c1 * (1.0 - c1));
        }
        OperatorDescriptor {
            family: self.f1.family().into(),
            g: match self.f1 {
                F1Spec::LogDerivative { g, .. } => Some(g.name().into()),
                _ => None,
            },
            params,
            sigma: self.sigma(),
            s: self.s(),
            a: self.a,
            eigenvalue_law: "(4k+1+2sigma)s".into(),
            ground_eigenvalue: self.eigenvalue(0),
        }
    }
}

/// Samples `√2 h φ_{2k}` on `grid ⊂ U`.
pub fn eigenfunction(op: &PerturbedOperator, k: usize, grid: &[f64]) -> Result<SampledFn> {
    let values = grid
        .iter()
        .map(|&x| op.eigen_value_at(k, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledFn::new(grid.to_vec(), values, Parity::None))
}

fn check_stencil(op: &PerturbedOperator, x: f64, step: f64) -> Result<()> {
    if op.f1.boundary_distance(x) <= 4.0 * step {
        return Err(Error::singular(
            x,
            "closer than four difference steps to the boundary of U",
        ));
    }
    Ok(())
}

/// `max |P u - λ u| / (λ ‖u‖_∞)` over `grid` for `u = √2 h φ_{2k}`.
pub fn eigen_residual(op: &PerturbedOperator, k: usize, grid: &[f64]) -> Result<f64> {
    let lambda = op.eigenvalue(k);
    let u = |x: f64| op.eigen_value_at(k, x).unwrap_or(f64::NAN);
    let mut worst = 0.0f64;
    let mut norm = 0.0f64;
    for &x in grid {
        let step = op.fd_step(k, x);
        check_stencil(op, x, step)?;
        let u0 = op.eigen_value_at(k, x)?;
        norm = norm.max(u0.abs());
        let r = op.apply(u, x, step) - lambda * u0;
        if r.is_nan() {
            return Err(Error::singular(x, "eigenfunction undefined on the stencil"));
        }
        worst = worst.max(r.abs());
    }
    Ok(worst / (lambda * norm))
}

/// [`eigen_residual`] for every `k` in `ks`, computed in parallel.
pub fn residual_scan(op: &PerturbedOperator, ks: &[usize], grid: &[f64]) -> Result<Vec<f64>> {
    ks.par_iter().map(|&k| eigen_residual(op, k, grid)).collect()
}

/// Compares `h⁻¹ P (h φ_{2j})` with `L_ev φ_{2j} = -φ'' - 2σφ'/x + s²x²φ`,
/// both by finite differences. Returns the maximum difference relative to
/// `max |L_ev φ_{2j}|`.
pub fn conjugation_residual(op: &PerturbedOperator, j: usize, grid: &[f64]) -> Result<f64> {
    let p = op.params;
    let (sigma, s) = (p.sigma(), p.s());
    let phi = |x: f64| crate::basis::phi(&p, 2 * j, x);
    let hphi = |x: f64| op.h(x) * phi(x);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &x in grid {
        op.check_point(x)?;
        let step = op.fd_step(j, x);
        check_stencil(op, x, step)?;
        let lhs = op.apply(hphi, x, step) / op.h(x);
        let rhs = -fd::second(phi, x, step) - 2.0 * sigma * fd::first(phi, x, step) / x
            + s * s * x * x * phi(x);
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    Ok(worst / scale)
}

/// `∫₀^∞ u_k u_j e^{2F₁} dx`, with Gaussian quadrature of `order` nodes for
/// the weight `|x|^{2σ} e^{-sx²}` and the integrand folded in log space.
pub fn inner_product(op: &PerturbedOperator, k: usize, j: usize, order: usize) -> Result<f64> {
    let order = order.max(k + j + 2);
    let order = order + order % 2;
    let rule = build_rule(&op.params, order)?;
    let (sigma, s) = (op.sigma(), op.s());
    let mut total = 0.0;
    for (&x, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
        let y = x.abs();
        let mut v = op.eigen_scaled(k, y)?.mul(op.eigen_scaled(j, y)?);
        let ln_factor = lw + 2.0 * op.primitive(y) - 2.0 * sigma * y.ln() + s * y * y;
        v.mul_pow2(ln_factor / LN_2);
        total += v.value();
    }
    Ok(0.5 * total)
}

/// The operator after the substitution `y = e^x`, acting on functions on ℝ:
/// `P₁ = -e^{-2x} d²/dx² - 2(f₁(e^x)e^{-x} - e^{-2x}/2) d/dx + s²e^{2x} + f₂(e^x)`
/// in `L²(ℝ, e^{2F₁(e^x)} e^x dx)`.
#[derive(Debug, Clone, Copy)]
pub struct LogChart<'a> {
    pub op: &'a PerturbedOperator,
}

/// Samples of the transformed eigenfunction and its residual.
#[derive(Debug, Clone)]
pub struct LogChartSample {
    pub description: String,
    pub k: usize,
    pub eigenvalue: f64,
    pub eigenfunction: SampledFn,
    pub residual: f64,
}

impl LogChart<'_> {
    /// Coefficients `[a₂, a₁, a₀]` of `P₁ = a₂ d² + a₁ d + a₀` at `x`.
    pub fn coefficients(&self, x: f64) -> [f64; 3] {
        let y = x.exp();
        let inv2 = (-2.0 * x).exp();
        let s = self.op.s();
        [
            -inv2,
            -2.0 * (self.op.f1(y) / y - 0.5 * inv2),
            s * s * y * y + self.op.f2(y),
        ]
    }

    pub fn weight(&self, x: f64) -> f64 {
        (2.0 * self.op.primitive(x.exp()) + x).exp()
    }

    pub fn eigenfunction_at(&self, k: usize, x: f64) -> Result<f64> {
        self.op.eigen_value_at(k, x.exp())
    }

    fn step(&self, k: usize, x: f64) -> f64 {
        let y = x.exp();
        self.op.fd_step(k, y) / y
    }

    /// Relative residual `max |P₁u - λu| / (λ‖u‖_∞)` over `grid`.
    pub fn residual(&self, k: usize, grid: &[f64]) -> Result<f64> {
        let lambda = self.op.eigenvalue(k);
        let u = |x: f64| self.eigenfunction_at(k, x).unwrap_or(f64::NAN);
        let mut worst = 0.0f64;
        let mut norm = 0.0f64;
        for &x in grid {
            let step = self.step(k, x);
            let u0 = self.eigenfunction_at(k, x)?;
            let [a2, a1, a0] = self.coefficients(x);
            let r = a2 * fd::second(u, x, step) + a1 * fd::first(u, x, step) + a0 * u0
                - lambda * u0;
            if r.is_nan() {
                return Err(Error::singular(x, "eigenfunction undefined on the stencil"));
            }
            norm = norm.max(u0.abs());
            worst = worst.max(r.abs());
        }
        Ok(worst / (lambda * norm))
    }

    /// `∫_ℝ u_k(x)² e^{2F₁(e^x)} e^x dx` by composite Simpson on `[lo, hi]`.
    pub fn norm_squared(&self, k: usize, lo: f64, hi: f64, intervals: usize) -> Result<f64> {
        let n = intervals + intervals % 2;
        let dx = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * dx;
            let y = x.exp();
            let mut v = self.op.eigen_scaled(k, y)?;
            v = v.mul(v);
            v.mul_pow2((2.0 * self.op.primitive(y) + x) / LN_2);
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            total += w * v.value();
        }
        Ok(total * dx / 3.0)
    }

    /// Integration window in `x` outside which `u_k² e^{2F₁(e^x)} e^x` is
    /// below `e^{-tail}` relative to its bulk.
    pub fn window(&self, k: usize, tail: f64) -> (f64, f64) {
        let sigma = self.op.sigma();
        let s = self.op.s();
        let lo = -tail / (2.0 * sigma + 1.0);
        let turning = ((4 * k) as f64 + 1.0 + 2.0 * sigma).max(1.0) / s;
        let hi = (turning.sqrt() + (tail / s).sqrt()).ln();
        (lo.max(-400.0), hi)
    }
}

pub fn log_change_of_variables(
    op: &PerturbedOperator,
    k: usize,
    grid: &[f64],
) -> Result<LogChartSample> {
    let chart = LogChart { op };
    let values = grid
        .iter()
        .map(|&x| chart.eigenfunction_at(k, x))
        .collect::<Result<Vec<_>>>()?;
    let residual = chart.residual(k, grid)?;
    Ok(LogChartSample {
        description: "P1 = -e^{-2x} d^2/dx^2 - 2(f1(e^x) e^{-x} - e^{-2x}/2) d/dx \
                      + s^2 e^{2x} + f2(e^x) on L^2(R, e^{2F1(e^x)} e^x dx)"
            .into(),
        k,
        eigenvalue: op.eigenvalue(k),
        eigenfunction: SampledFn::new(grid.to_vec(), values, Parity::None),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn inverse_multiple_h_is_power() {
        let op = derive_f2_h(F1Spec::InverseMultiple { c1: 0.4 }, 0.9, 1.0).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let h: f64 = x;
            assert!((op.h(x) - h.powf(0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_family_f2() {
        let (sigma, c) = (0.3, 0.7);
        let op = derive_f2_h(
            F1Spec::LogDerivative {
                c,
                g: LogFactor::Exp,
            },
            sigma,
            1.0,
        )
        .unwrap();
        for x in uniform(0.2, 3.0, 15) {
            let expect = sigma * (sigma - 1.0) / (x * x) - c * c;
            assert!((op.f2(x) - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn closed_forms_match_generic() {
        let specs = [
            F1Spec::InverseMultiple { c1: -0.3 },
            F1Spec::Power { c: 1.0, r: 2.0 },
            F1Spec::Power { c: -0.5, r: 0.5 },
            F1Spec::LogDerivative { c: 0.8, g: LogFactor::X },
            F1Spec::LogDerivative { c: 0.8, g: LogFactor::Cos },
            F1Spec::LogDerivative { c: -1.2, g: LogFactor::Exp },
            F1Spec::LogDerivative { c: 0.4, g: LogFactor::ExpPow(3) },
            F1Spec::LogDerivative { c: 0.4, g: LogFactor::ExpPow(-1) },
        ];
        for spec in specs {
            let op = derive_f2_h(spec, 0.6, 1.5).unwrap();
            for x in spec.grid(0.2, 3.0, 40) {
                let a = op.f2(x);
                let b = spec.f2_closed(0.6, x);
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{spec:?} at {x}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            derive_f2_h(F1Spec::Power { c: 1.0, r: -1.0 }, 0.0, 1.0),
            Err(Error::BadFamily(_))
        ));
        assert!(matches!(
            derive_f2_h(F1Spec::InverseMultiple { c1: 0.0 }, -0.5, 1.0),
            Err(Error::Domain(_))
        ));
        let op = derive_f2_h(F1Spec::LogDerivative { c: 1.0, g: LogFactor::Cos }, 0.0, 1.0)
            .unwrap();
        assert!(matches!(
            op.eigen_value_at(0, FRAC_PI_2),
            Err(Error::SingularPoint { .. })
        ));
        assert!(op.eigen_value_at(0, -1.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let ops = solve_c1c2(0.0, 0.0, 1.0);
        assert_eq!(ops.len(), 2);
        assert_eq!(ops[0].a, Some(0.0));
        assert_eq!(ops[1].a, Some(1.0));
        assert!((ops[0].eigenvalue(0) - 1.0).abs() < 1e-15);
        assert!((ops[1].eigenvalue(0) - 3.0).abs() < 1e-15);

        let ops = solve_c1c2(0.25, 0.5, 1.0);
        let sig: Vec<f64> = ops.iter().map(|o| o.sigma()).collect();
        assert_eq!(ops.len(), 2);
        assert!((sig[0] + 0.25).abs() < 1e-15 && (sig[1] - 1.25).abs() < 1e-15);

        assert!(solve_c1c2(0.0, -1.0, 1.0).is_empty());
        // c2 = 2c1 with c1 = 0.7: the root a = -1.4 gives sigma = -0.7
        assert_eq!(solve_c1c2(0.7, 1.4, 1.0).len(), 1);
    }

    #[test]
    fn trivial_branch_is_even_hermite() {
        let op = &solve_c1c2(0.0, 0.0, 1.0)[0];
        let p = Params::new(0.0, 1.0).unwrap();
        for x in [0.1, 0.7, 2.0] {
            let u = op.eigen_value_at(0, x).unwrap();
            let expect = SQRT_2 * crate::basis::phi(&p, 0, x);
            assert!((u - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_small() {
        let op = &solve_c1c2(0.3, 0.0, 1.0)[1];
        assert!((op.sigma() - 0.7).abs() < 1e-15);
        let grid = uniform(0.1, 6.0, 60);
        for k in 0..=10 {
            let r = eigen_residual(op, k, &grid).unwrap();
            assert!(r <= 1e-4, "k = {k}: {r}");
        }
    }

    #[test]
    fn normalization_and_orthogonality() {
        let op = derive_f2_h(F1Spec::Power { c: 1.0, r: 2.0 }, 0.4, 1.0).unwrap();
        for k in 0..4 {
            for j in 0..4 {
                let v = inner_product(&op, k, j, 24).unwrap();
                let expect = if k == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "({k},{j}) -> {v}");
            }
        }
    }

    #[test]
    fn log_chart() {
        let op = derive_f2_h(F1Spec::InverseMultiple { c1: 0.2 }, 0.5, 1.0).unwrap();
        let chart = LogChart { op: &op };
        let grid = uniform(-2.0, 1.0, 61);
        let r = chart.residual(0, &grid).unwrap();
        assert!(r <= 1e-4, "{r}");
        let (lo, hi) = chart.window(0, 60.0);
        let n = chart.norm_squared(0, lo, hi, 20000).unwrap();
        assert!((n - 1.0).abs() < 1e-7, "{n}");
    }

    #[test]
    fn conjugation() {
        let op = derive_f2_h(F1Spec::Power { c: 0.5, r: 1.5 }, 0.3, 1.0).unwrap();
        let grid = uniform(0.2, 4.0, 40);
        for j in 0..5 {
            let r = conjugation_residual(&op, j, &grid).unwrap();
            assert!(r < 1e-4, "j = {j}: {r}");
        }
    }
}
