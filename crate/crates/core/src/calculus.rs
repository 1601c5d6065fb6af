//! The Dunkl operator `T_σ f = f' + σ (f(x) - f(-x)) / x`, pointwise on
//! symmetric grids and as exact banded matrices on the eigenbasis `φ_k`.
//!
//! In coefficient space (`f = Σ c_k φ_k`) the ladder operators act by
//! `B e_k = β_k e_{k-1}` and `B' e_{k-1} = β_k e_k`, from which
//! `X = (B + B') / 2s` (multiplication by `x`) and `T_σ = (B - B') / 2`.

use serde::{Deserialize, Serialize};

use crate::basis::{eval_basis, eval_derivative, gauss_log2, poly_scaled, Kind, Params};
use crate::error::{Error, Result};
use crate::fd;
use crate::oscillation::q_k;
use crate::scaled::{ldexp, Scaled};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Function values on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub parity: Parity,
}

impl SampledFn {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, parity: Parity) -> Self {
        assert_eq!(grid.len(), values.len(), "grid and values differ in length");
        SampledFn { grid, values, parity }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &[f64], f: F, parity: Parity) -> Self {
        SampledFn::new(grid.to_vec(), grid.iter().map(|&x| f(x)).collect(), parity)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `n` equispaced points on `[-a, a]`; `0` is included when `n` is odd.
pub fn symmetric_grid(a: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let mut g: Vec<f64> = (0..n)
        .map(|i| -a + 2.0 * a * i as f64 / (n - 1) as f64)
        .collect();
    for i in 0..n / 2 {
        g[n - 1 - i] = -g[i];
    }
    if n % 2 == 1 {
        g[n / 2] = 0.0;
    }
    g
}

fn check_symmetric(grid: &[f64]) -> Result<()> {
    let n = grid.len();
    let scale = grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..n.div_ceil(2) {
        if (grid[i] + grid[n - 1 - i]).abs() > 1e-12 * scale {
            return Err(Error::GridAsymmetric);
        }
    }
    Ok(())
}

/// Applies `T_σ` to samples of `f` given samples of `f'` on the same
/// symmetric grid. At `x = 0` the removable value `(1+2σ) f'(0)` is used.
pub fn apply_t_pointwise(p: &Params, f: &SampledFn, dfdx: &SampledFn) -> Result<SampledFn> {
    check_symmetric(&f.grid)?;
    if f.grid != dfdx.grid {
        return Err(Error::domain("f and f' must share a grid"));
    }
    let n = f.len();
    let sigma = p.sigma();
    let values = (0..n)
        .map(|i| {
            let x = f.grid[i];
            let d = dfdx.values[i];
            if x == 0.0 {
                (1.0 + 2.0 * sigma) * d
            } else {
                let reflected = f.values[n - 1 - i];
                d + sigma * (f.values[i] - reflected) / x
            }
        })
        .collect();
    let parity = match f.parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::None => Parity::None,
    };
    Ok(SampledFn::new(f.grid.clone(), values, parity))
}

/// Samples of `φ_k` (or `p_k`, `ξ_k`) and their exact derivatives.
pub fn sample_basis(p: &Params, k: usize, grid: &[f64], kind: Kind) -> Result<(SampledFn, SampledFn)> {
    let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
    let mut v = Vec::with_capacity(grid.len());
    let mut d = Vec::with_capacity(grid.len());
    for &x in grid {
        v.push(eval_basis(p, k, x, kind)?.value());
        d.push(eval_derivative(p, k, x, kind)?);
    }
    Ok((
        SampledFn::new(grid.to_vec(), v, parity),
        SampledFn::new(grid.to_vec(), d, parity),
    ))
}

/// `T_σ x^m = c x^{m-1}` with `c = m` (m even) or `m + 2σ` (m odd); returns
/// the coefficient of `T_σ^j x^m`, which is a multiple of `x^{m-j}`.
pub fn monomial_image(p: &Params, m: usize, j: usize) -> f64 {
    if j > m {
        return 0.0;
    }
    ((m - j + 1)..=m).map(|d| p.ladder_factor(d)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpName {
    T,
    B,
    Bp,
    L,
    Sigma,
    X,
}

/// Tridiagonal matrix acting on coefficient vectors; column `k` is the
/// image of `e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    pub name: OpName,
    pub dim: usize,
    /// `sub[i]` is entry `(i+1, i)`.
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` is entry `(i, i+1)`.
    pub sup: Vec<f64>,
}

impl OpMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.sub[j]
        } else if j == i + 1 {
            self.sup[i]
        } else {
            0.0
        }
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * c.get(i).copied().unwrap_or(0.0);
            if i > 0 {
                acc += self.sub[i - 1] * c.get(i - 1).copied().unwrap_or(0.0);
            }
            if i + 1 < n {
                acc += self.sup[i] * c.get(i + 1).copied().unwrap_or(0.0);
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> Dense {
        let n = self.dim;
        let mut d = Dense::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                d.set(i, j, self.get(i, j));
            }
        }
        d
    }
}

pub fn op_matrix(p: &Params, name: OpName, dim: usize) -> Result<OpMatrix> {
    if dim < 2 {
        return Err(Error::domain("operator matrices need dim >= 2"));
    }
    let s = p.s();
    let beta: Vec<f64> = (1..dim).map(|k| p.ladder(k)).collect();
    let zeros = vec![0.0; dim - 1];
    let (sub, diag, sup) = match name {
        OpName::B => (zeros.clone(), vec![0.0; dim], beta.clone()),
        OpName::Bp => (beta.clone(), vec![0.0; dim], zeros.clone()),
        OpName::X => {
            let b: Vec<f64> = beta.iter().map(|v| v / (2.0 * s)).collect();
            (b.clone(), vec![0.0; dim], b)
        }
        OpName::T => (
            beta.iter().map(|v| -0.5 * v).collect(),
            vec![0.0; dim],
            beta.iter().map(|v| 0.5 * v).collect(),
        ),
        OpName::L => (zeros.clone(), (0..dim).map(|k| p.eigenvalue(k)).collect(), zeros.clone()),
        OpName::Sigma => (zeros.clone(), (0..dim).map(|k| reflection_sign(k) * p.sigma()).collect(), zeros.clone()),
    };
    Ok(OpMatrix { name, dim, sub, diag, sup })
}

fn reflection_sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Small dense square matrix used for operator products.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n);
        for i in 0..n {
            d.set(i, i, 1.0);
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[l * n + j];
                }
            }
        }
        out
    }

    pub fn add_scaled(&self, other: &Dense, alpha: f64) -> Dense {
        Dense {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect(),
        }
    }

    /// Max absolute entry of the leading `m x m` block.
    pub fn block_max(&self, m: usize) -> f64 {
        let mut best = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                best = best.max(self.get(i, j).abs());
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identity {
    /// `[L, B] = -2s B`
    LB,
    /// `[L, B'] = 2s B'`
    LBp,
    /// `[B, B'] = 2s (1 + 2Σ)`
    BBp,
    /// `[T_σ, x] = 1 + 2Σ`
    DxRel,
    /// `[L, Σ] = 0`
    LSigma,
    /// `L = B B' - (1+2Σ)s = B' B + (1+2Σ)s`
    LFactor,
}

/// Max-norm residual of an operator identity on the interior
/// `(dim-4) x (dim-4)` block, relative to the size of the terms.
pub fn commutator_residual(p: &Params, dim: usize, which: Identity) -> Result<f64> {
    if dim < 8 {
        return Err(Error::domain("commutator checks need dim >= 8"));
    }
    let m = dim - 4;
    let s = p.s();
    let dense = |name| op_matrix(p, name, dim).map(|o| o.to_dense());
    let comm = |a: &Dense, b: &Dense| a.mul(b).add_scaled(&b.mul(a), -1.0);
    let one_plus_2sigma = {
        let sig = dense(OpName::Sigma)?;
        Dense::identity(dim).add_scaled(&sig, 2.0)
    };
    let (residual, scale) = match which {
        Identity::LB => {
            let (l, b) = (dense(OpName::L)?, dense(OpName::B)?);
            let c = comm(&l, &b);
            (c.add_scaled(&b, 2.0 * s), l.block_max(m) * b.block_max(m))
        }
        Identity::LBp => {
            let (l, b) = (dense(OpName::L)?, dense(OpName::Bp)?);
            let c = comm(&l, &b);
            (c.add_scaled(&b, -2.0 * s), l.block_max(m) * b.block_max(m))
        }
        Identity::BBp => {
            let (b, bp) = (dense(OpName::B)?, dense(OpName::Bp)?);
            let c = comm(&b, &bp);
            (c.add_scaled(&one_plus_2sigma, -2.0 * s), b.block_max(m) * bp.block_max(m))
        }
        Identity::DxRel => {
            let (t, x) = (dense(OpName::T)?, dense(OpName::X)?);
            let c = comm(&t, &x);
            (c.add_scaled(&one_plus_2sigma, -1.0), t.block_max(m) * x.block_max(m))
        }
        Identity::LSigma => {
            let (l, sig) = (dense(OpName::L)?, dense(OpName::Sigma)?);
            let c = comm(&l, &sig);
            (c, (l.block_max(m) * sig.block_max(m)).max(f64::MIN_POSITIVE))
        }
        Identity::LFactor => {
            let (l, b, bp) = (dense(OpName::L)?, dense(OpName::B)?, dense(OpName::Bp)?);
            let r1 = b.mul(&bp).add_scaled(&one_plus_2sigma, -s).add_scaled(&l, -1.0);
            let r2 = bp.mul(&b).add_scaled(&one_plus_2sigma, s).add_scaled(&l, -1.0);
            let r = if r1.block_max(m) > r2.block_max(m) { r1 } else { r2 };
            (r, b.block_max(m) * bp.block_max(m))
        }
    };
    Ok(residual.block_max(m) / scale)
}

/// Finite-difference step used for `ξ_k''`.
pub fn ode_step(k: usize) -> f64 {
    1e-3 * (1.0f64).min(1.0 / (k.max(1) as f64).sqrt())
}

/// `max |ξ_k'' + q_k ξ_k| / (1 + |q_k ξ_k|)` over the grid, `ξ_k''` from
/// five-point differences.
///
/// The stencil values are taken relative to the weight `|x|^σ e^{-sx²/2}`
/// at the centre, so the rounding of that large exponent is shared by all
/// five samples instead of being amplified by `1/h²`.
pub fn xi_ode_residual(p: &Params, k: usize, grid: &[f64]) -> Result<f64> {
    let h = ode_step(k);
    let mut worst = 0.0f64;
    for &x in grid {
        if x.abs() < 2.0 * h {
            return Err(Error::singular(x, "grid point within the difference stencil of 0"));
        }
        let polys: Vec<Scaled> = (0..5)
            .map(|j| poly_scaled(p, k, x + (j as f64 - 2.0) * h))
            .collect();
        let top = polys
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.exponent)
            .max()
            .unwrap_or(0);
        let mut samples = [0.0; 5];
        for (j, slot) in samples.iter_mut().enumerate() {
            let dt = (j as f64 - 2.0) * h;
            let t = x + dt;
            let rel = (-0.5 * p.s() * dt * (2.0 * x + dt)).exp() * (t / x).powf(p.sigma());
            *slot = ldexp(polys[j].mantissa, polys[j].exponent - top) * rel;
        }
        let mut scale = Scaled::from_parts(1.0, top);
        scale.mul_pow2(gauss_log2(p, x) + p.sigma() * x.abs().log2());
        let scale = scale.value();
        let d2 = (-samples[0] + 16.0 * samples[1] - 30.0 * samples[2] + 16.0 * samples[3]
            - samples[4])
            / (12.0 * h * h);
        let q = q_k(p, k, x)?;
        let qx = q * samples[2] * scale;
        worst = worst.max((d2 + q * samples[2]).abs() * scale / (1.0 + qx.abs()));
    }
    Ok(worst)
}

/// `(lhs, rhs)` of the log-derivative identity
/// `ξ_k'/ξ_k = sx ± σ/x - β_{k+1} p_{k+1}/p_k` (`+` for even `k`); the
/// left side is a five-point difference.
pub fn log_derivative_check(p: &Params, k: usize, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Err(Error::singular(0.0, "log-derivative identity needs x != 0"));
    }
    let pm = if k == 0 { Scaled::ZERO } else { poly_scaled(p, k - 1, x) };
    let pk = poly_scaled(p, k, x);
    let pn = poly_scaled(p, k + 1, x);
    let scale_ln = [pm, pk, pn]
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if pk.is_zero() || pk.ln_abs() < scale_ln + (1e-12f64).ln() {
        return Err(Error::NearZeroDivision {
            x,
            value: if pk.is_zero() { 0.0 } else { (pk.ln_abs() - scale_ln).exp() },
        });
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = p.s() * x + sign * p.sigma() / x - p.ladder(k + 1) * pn.ratio(&pk);

    let h = 1e-5 * (1.0f64).min(x.abs() / 4.0);
    // ξ_k / p_k(x) avoids losing the scale of large polynomial values
    let base = eval_basis(p, k, x, Kind::Xi)?.scaled();
    let ratio = |t: f64| -> f64 {
        eval_basis(p, k, t, Kind::Xi)
            .map(|v| v.scaled().ratio(&base))
            .unwrap_or(f64::NAN)
    };
    let lhs = fd::first(ratio, x, h);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_params;
    use crate::quadrature::build_rule;

    #[test]
    fn t_on_monomials() {
        let p = make_params(0.5, 1.0).unwrap();
        let grid = symmetric_grid(2.0, 41);
        let f = SampledFn::from_fn(&grid, |x| x, Parity::Odd);
        let df = SampledFn::from_fn(&grid, |_| 1.0, Parity::Even);
        let t = apply_t_pointwise(&p, &f, &df).unwrap();
        for v in &t.values {
            assert!((v - 2.0).abs() < 1e-14);
        }
        let f = SampledFn::from_fn(&grid, |x| x * x, Parity::Even);
        let df = SampledFn::from_fn(&grid, |x| 2.0 * x, Parity::Odd);
        let t = apply_t_pointwise(&p, &f, &df).unwrap();
        for (v, x) in t.values.iter().zip(&grid) {
            assert!((v - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn unperturbed_is_derivative() {
        let p = make_params(0.0, 1.0).unwrap();
        let grid = symmetric_grid(3.0, 30);
        let f = SampledFn::from_fn(&grid, |x| x.sin() + x * x, Parity::None);
        let df = SampledFn::from_fn(&grid, |x| x.cos() + 2.0 * x, Parity::None);
        let t = apply_t_pointwise(&p, &f, &df).unwrap();
        assert_eq!(t.values, df.values);
    }

    #[test]
    fn asymmetric_grid_rejected() {
        let p = make_params(0.5, 1.0).unwrap();
        let grid = vec![-1.0, 0.0, 2.0];
        let f = SampledFn::from_fn(&grid, |x| x, Parity::Odd);
        assert_eq!(apply_t_pointwise(&p, &f, &f), Err(Error::GridAsymmetric));
    }

    #[test]
    fn matrix_examples() {
        let p = make_params(0.5, 1.0).unwrap();
        let l = op_matrix(&p, OpName::L, 4).unwrap();
        assert_eq!(l.diag, vec![2.0, 4.0, 6.0, 8.0]);
        let b = op_matrix(&p, OpName::B, 6).unwrap();
        let mut e0 = vec![0.0; 6];
        e0[0] = 1.0;
        assert!(b.apply(&e0).iter().all(|&v| v == 0.0));
        let bp = op_matrix(&p, OpName::Bp, 6).unwrap();
        let sig = op_matrix(&p, OpName::Sigma, 6).unwrap();
        for k in 0..5 {
            let mut e = vec![0.0; 6];
            e[k] = 1.0;
            let bpb = bp.apply(&b.apply(&e));
            let want = l_entry(&p, k) - (1.0 + 2.0 * sig.diag[k]) * p.s();
            assert!((bpb[k] - want).abs() < 1e-13);
        }
    }

    fn l_entry(p: &Params, k: usize) -> f64 {
        p.eigenvalue(k)
    }

    #[test]
    fn identities_hold() {
        for sigma in [-0.3, 0.0, 0.5, 2.0] {
            let p = make_params(sigma, 0.7).unwrap();
            for which in [
                Identity::LB,
                Identity::LBp,
                Identity::BBp,
                Identity::DxRel,
                Identity::LSigma,
                Identity::LFactor,
            ] {
                let r = commutator_residual(&p, 64, which).unwrap();
                assert!(r <= 1e-12, "{which:?} sigma={sigma}: {r}");
            }
            assert!(commutator_residual(&p, 8, Identity::LB).unwrap().is_finite());
        }
    }

    #[test]
    fn ode_residual_examples() {
        let p = make_params(0.0, 1.0).unwrap();
        let grid: Vec<f64> = (1..60).map(|i| -3.0 + 0.1 * i as f64).filter(|x: &f64| x.abs() > 0.01).collect();
        assert!(xi_ode_residual(&p, 0, &grid).unwrap() <= 1e-6);
        let q = make_params(0.5, 1.0).unwrap();
        let b = (101.0f64 + 1.0).sqrt();
        let grid: Vec<f64> = (1..200).map(|i| b * 1.2 * i as f64 / 200.0).collect();
        assert!(xi_ode_residual(&q, 50, &grid).unwrap() <= 1e-5);
        let r = make_params(-0.3, 1.0).unwrap();
        assert!(matches!(
            xi_ode_residual(&r, 50, &[-0.5, 0.0, 0.5]),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn log_derivative_examples() {
        let p = make_params(0.0, 1.3).unwrap();
        let (lhs, rhs) = log_derivative_check(&p, 0, 0.8).unwrap();
        assert!((rhs + 1.3 * 0.8).abs() < 1e-14);
        assert!((lhs - rhs).abs() < 1e-8);
        let q = make_params(0.5, 1.0).unwrap();
        let (lhs, rhs) = log_derivative_check(&q, 7, 1.3).unwrap();
        assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()));
        let rule = build_rule(&q, 7).unwrap();
        assert!(matches!(
            log_derivative_check(&q, 7, rule.nodes[0]),
            Err(Error::NearZeroDivision { .. })
        ));
    }

    #[test]
    fn monomial_images() {
        let p = make_params(0.5, 1.0).unwrap();
        assert_eq!(monomial_image(&p, 1, 1), 2.0);
        assert_eq!(monomial_image(&p, 2, 1), 2.0);
        assert_eq!(monomial_image(&p, 3, 3), 4.0 * 2.0 * 2.0);
    }
}
