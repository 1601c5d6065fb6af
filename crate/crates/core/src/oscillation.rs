//! Geometry of the potential `q_k = (2k+1+2σ)s - s²x² - σ̄_k x⁻²` in the
//! Schrödinger form `ξ_k'' + q_k ξ_k = 0`, and numerical scans of the
//! eigenfunction envelope estimates that live on it.
//!
//! Scans evaluate a statistic for each `k` in a list, in parallel, on an
//! adaptive grid over `x >= 0` (every sampled function is even or odd, so
//! the negative half carries no new information). Local maxima found on the
//! grid are polished by golden-section search.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{eval_basis, ln_square_sum, Kind, Params};
use crate::error::{Error, Result};
use crate::quadrature::build_rule;
use crate::stats::{log_log_fit, median, Summary};

/// `q_k(x)`; singular at `0` unless `σ̄_k = 0`.
pub fn q_k(p: &Params, k: usize, x: f64) -> Result<f64> {
    let sb = p.sigma_bar(k);
    let s = p.s();
    let base = (2.0 * k as f64 + 1.0 + 2.0 * p.sigma()) * s - s * s * x * x;
    if sb == 0.0 {
        return Ok(base);
    }
    if x == 0.0 {
        return Err(Error::singular(0.0, format!("q_{k} has a pole at 0")));
    }
    Ok(base - sb / (x * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FourZero,
    TwoZeroPos,
    TwoZeroNeg,
    TwoZeroZero,
    NoOscillation,
}

/// Turning points and oscillation region of `q_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationProfile {
    pub k: usize,
    pub sigma: f64,
    pub s: f64,
    pub sigma_bar: f64,
    pub c_max: f64,
    /// Positive maximizer of `q_k` (`0` when `σ̄_k = 0`, none when `σ̄_k < 0`).
    pub x_max: Option<f64>,
    pub a_k: Option<f64>,
    pub b_k: Option<f64>,
    /// Smaller positive root of `q_k(b) b² = 4π`, only used when `σ̄_k < 0`.
    pub b_k_plus: Option<f64>,
    pub regime: Regime,
}

/// Bisection for the smaller positive root of `g(b) = q_k(b) b² - 4π`.
/// `g` is increasing on `(0, sqrt(c/2s))`, so that is the bracket.
fn bisect_b_plus(p: &Params, k: usize, hint: f64) -> Option<f64> {
    let s = p.s();
    let c = 2.0 * k as f64 + 1.0 + 2.0 * p.sigma();
    let sb = p.sigma_bar(k);
    let g = |b: f64| c * s * b * b - s * s * b.powi(4) - sb - 4.0 * PI;
    let mut lo = hint * 1e-6;
    let mut hi = (c / (2.0 * s)).sqrt();
    if !(g(lo) < 0.0 && g(hi) >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Closed form of the smaller root of `q_k(b) b² = 4π`, if real.
pub fn b_plus_closed_form(p: &Params, k: usize) -> Option<f64> {
    let s = p.s();
    let c = 2.0 * k as f64 + 1.0 + 2.0 * p.sigma();
    let e = p.sigma_bar(k) + 4.0 * PI;
    let disc = c * c - 4.0 * e;
    if disc < 0.0 {
        return None;
    }
    Some((2.0 * e / (s * (c + disc.sqrt()))).sqrt())
}

pub fn profile(p: &Params, k: usize) -> OscillationProfile {
    let s = p.s();
    let c = 2.0 * k as f64 + 1.0 + 2.0 * p.sigma();
    let sb = p.sigma_bar(k);
    let mut prof = OscillationProfile {
        k,
        sigma: p.sigma(),
        s,
        sigma_bar: sb,
        c_max: c,
        x_max: None,
        a_k: None,
        b_k: None,
        b_k_plus: None,
        regime: Regime::TwoZeroZero,
    };
    if sb > 0.0 {
        let root = sb.sqrt();
        prof.c_max = c - 2.0 * root;
        let xm = (root / s).sqrt();
        prof.x_max = Some(xm);
        if prof.c_max > 0.0 {
            let d = (c * c - 4.0 * sb).sqrt();
            let b2 = (c + d) / (2.0 * s);
            prof.b_k = Some(b2.sqrt());
            // product of the two roots in x² is σ̄/s²
            prof.a_k = Some((sb / (s * s * b2)).sqrt());
            prof.regime = Regime::FourZero;
        } else if prof.c_max == 0.0 {
            prof.a_k = Some(xm);
            prof.b_k = Some(xm);
            prof.regime = Regime::TwoZeroPos;
        } else {
            prof.regime = Regime::NoOscillation;
        }
    } else if sb == 0.0 {
        prof.x_max = Some(0.0);
        prof.b_k = Some((c / s).sqrt());
        prof.regime = Regime::TwoZeroZero;
    } else {
        let d = (c * c - 4.0 * sb).sqrt();
        let b = ((c + d) / (2.0 * s)).sqrt();
        prof.b_k = Some(b);
        prof.b_k_plus = bisect_b_plus(p, k, b);
        prof.regime = Regime::TwoZeroNeg;
    }
    prof
}

impl OscillationProfile {
    /// Nonnegative part `[lo, hi]` of the closure of `Ĵ_k`, if nonempty.
    pub fn jhat_positive(&self) -> Option<(f64, f64)> {
        match self.regime {
            Regime::FourZero => Some((self.a_k?, self.b_k?)),
            Regime::TwoZeroZero => Some((0.0, self.b_k?)),
            Regime::TwoZeroNeg => Some((self.b_k_plus.unwrap_or(0.0), self.b_k?)),
            Regime::TwoZeroPos | Regime::NoOscillation => None,
        }
    }
}

/// Membership in `Ĵ_k`: the oscillation region `q_k > 0`, with
/// `(-b_{k,+}, b_{k,+})` removed when `σ̄_k < 0`.
pub fn jhat_contains(prof: &OscillationProfile, x: f64) -> bool {
    let ax = x.abs();
    match prof.regime {
        Regime::FourZero => {
            let (a, b) = (prof.a_k.unwrap_or(0.0), prof.b_k.unwrap_or(0.0));
            ax > a && ax < b
        }
        Regime::TwoZeroZero => ax < prof.b_k.unwrap_or(0.0),
        Regime::TwoZeroNeg => {
            let b = prof.b_k.unwrap_or(0.0);
            match prof.b_k_plus {
                Some(bp) => ax >= bp && ax < b,
                None => ax > 0.0 && ax < b,
            }
        }
        Regime::TwoZeroPos | Regime::NoOscillation => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `max_{Ĵ_k} ξ_k² √q_k`
    Thm11I,
    /// `k^{1/6} max_ℝ ξ_k²`, for odd `k` or `σ >= 0`
    Thm11Ii,
    /// `k^{1/6} max_{|x| >= x_{k,k/2}} ξ_k²`, for even `k` and `σ < 0`
    Thm11Iii,
    /// `sup_ℝ φ_k²`, for even `k` and `σ < 0`
    Thm12,
    /// `k^{1/6} max_ℝ ξ_k²` as a lower envelope
    Thm13I,
    /// `k^{1/6} max_{|x| >= x_{k,k/2}} ξ_k²` as a lower envelope
    Thm13Ii,
    /// `k^{1/6}` times the largest distance from `Ĵ_k` to a zero of `p_k`
    RootSpacing,
    /// `k^{5/12} sup_{x >= b_{k+1}} ξ_k(x) (x - b_k)²`
    LemmaF,
    /// `k^{-1/6} max_{|x - x_{k,1}| <= ε k^{-1/6}} Σ_{ℓ<k} ξ_ℓ²`
    LemmaG,
}

impl Statistic {
    pub const ALL: [Statistic; 9] = [
        Statistic::Thm11I,
        Statistic::Thm11Ii,
        Statistic::Thm11Iii,
        Statistic::Thm12,
        Statistic::Thm13I,
        Statistic::Thm13Ii,
        Statistic::RootSpacing,
        Statistic::LemmaF,
        Statistic::LemmaG,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Thm11I => "thm11_i",
            Statistic::Thm11Ii => "thm11_ii",
            Statistic::Thm11Iii => "thm11_iii",
            Statistic::Thm12 => "thm12",
            Statistic::Thm13I => "thm13_i",
            Statistic::Thm13Ii => "thm13_ii",
            Statistic::RootSpacing => "root_spacing",
            Statistic::LemmaF => "lemmaF",
            Statistic::LemmaG => "lemmaG",
        }
    }

    pub fn parse(s: &str) -> Option<Statistic> {
        Statistic::ALL.iter().copied().find(|st| st.name() == s)
    }

    /// Whether the fitted slope refers to the unnormalized maximum (a decay
    /// rate) rather than to the normalized per-k value (a boundedness check).
    pub fn fits_raw(&self) -> bool {
        matches!(
            self,
            Statistic::Thm11Ii | Statistic::Thm11Iii | Statistic::Thm13I | Statistic::Thm13Ii
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Grid points per local wavelength.
    pub density: f64,
    /// Window half-width factor for the partial-sum statistic near the largest zero.
    pub epsilon: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// Smallest `k` entering the slope fit.
    pub fit_kmin: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            density: 40.0,
            epsilon: 1.0,
            jobs: None,
            fit_kmin: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateScan {
    pub sigma: f64,
    pub s: f64,
    pub statistic: Statistic,
    pub k_list: Vec<usize>,
    /// Normalized statistic per `k`.
    pub per_k_values: Vec<f64>,
    /// Unnormalized extremum per `k` (e.g. `max ξ_k²` without `k^{1/6}`).
    pub raw_values: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl EstimateScan {
    pub fn summary(&self) -> Summary {
        let v = &self.per_k_values;
        let (imax, max) = v
            .iter()
            .enumerate()
            .fold((None, f64::NEG_INFINITY), |acc, (i, &x)| {
                if x > acc.1 {
                    (Some(i), x)
                } else {
                    acc
                }
            });
        Summary {
            slope: self.fitted_slope,
            intercept: self.intercept,
            min: v.iter().cloned().fold(f64::INFINITY, f64::min),
            max,
            median: median(v),
            argmax_k: imax.map(|i| self.k_list[i]),
        }
    }

    /// The value recorded for `k`, if it was scanned.
    pub fn value_at(&self, k: usize) -> Option<f64> {
        self.k_list.iter().position(|&j| j == k).map(|i| self.per_k_values[i])
    }
}

/// Sample points on `[lo, hi]` with step `min(2π/√|q_k|, 2π δ) / density`,
/// where `δ = (2s² b_k)^{-1/3}` is the Airy width at the turning point.
pub fn adaptive_grid(p: &Params, k: usize, lo: f64, hi: f64, density: f64) -> Vec<f64> {
    let s = p.s();
    let c = 2.0 * k as f64 + 1.0 + 2.0 * p.sigma();
    let b_ref = (c / s).sqrt().max(1e-3);
    let airy = (2.0 * s * s * b_ref).powf(-1.0 / 3.0);
    let cap = 2.0 * PI * airy;
    let min_step = 1e-13 * (1.0 + hi.abs());
    let mut out = vec![lo];
    let mut x = lo;
    while x < hi {
        let wave = match q_k(p, k, x) {
            Ok(q) if q != 0.0 => (2.0 * PI / q.abs().sqrt()).min(cap),
            _ => cap,
        };
        let step = (wave / density).max(min_step);
        x += step;
        if x < hi {
            out.push(x);
        }
    }
    if *out.last().unwrap() < hi {
        out.push(hi);
    }
    out
}

/// Maximum of `f` over the sampled grid, polishing the best local maxima by
/// golden-section search. Returns `(argmax, max)`.
pub fn refined_max<F: Fn(f64) -> f64>(f: &F, grid: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let n = grid.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i + 1 == n || vals[i] >= vals[i + 1];
            left && right && vals[i].is_finite()
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(8);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best.1 {
            best = (grid[i], v);
        }
    }
    for i in peaks {
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(n - 1)];
        if b > a {
            let (x, v) = golden_max(f, a, b);
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..100 {
        if (b - a) <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn xi_sq(p: &Params, k: usize, x: f64) -> f64 {
    match eval_basis(p, k, x, Kind::Xi) {
        Ok(v) => {
            let y = v.value();
            y * y
        }
        Err(_) => f64::INFINITY,
    }
}

fn phi_sq(p: &Params, k: usize, x: f64) -> f64 {
    let y = eval_basis(p, k, x, Kind::Phi).map(|v| v.value()).unwrap_or(f64::NAN);
    y * y
}

/// Left end used when a scan region reaches down to `0`.
fn near_zero(p: &Params, k: usize) -> f64 {
    if p.sigma_bar(k) == 0.0 {
        0.0
    } else {
        1e-8
    }
}

/// `Σ_{ℓ<n} ξ_ℓ(x)²`.
pub fn xi_square_sum(p: &Params, n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if p.sigma() == 0.0 {
            ln_square_sum(p, n, 0.0).exp()
        } else if p.sigma() > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (ln_square_sum(p, n, x) + 2.0 * p.sigma() * x.abs().ln() - p.s() * x * x).exp()
}

/// Smallest positive zero of `p_k` for even `k`.
fn smallest_positive_node(p: &Params, k: usize) -> Result<f64> {
    let rule = build_rule(p, k)?;
    Ok(rule.nodes[k / 2 - 1])
}

/// `(normalized, raw)` value of `stat` at one `k`.
pub fn statistic_at(p: &Params, stat: Statistic, k: usize, opts: &ScanOptions) -> Result<(f64, f64)> {
    let prof = profile(p, k);
    let kf = k as f64;
    let density = opts.density;
    let sigma = p.sigma();
    match stat {
        Statistic::Thm11I => {
            let (lo, hi) = prof
                .jhat_positive()
                .ok_or_else(|| Error::Regime(format!("oscillation region of k = {k} is empty")))?;
            let lo = if lo == 0.0 { near_zero(p, k) } else { lo };
            let grid = adaptive_grid(p, k, lo, hi, density);
            let f = |x: f64| {
                let q = q_k(p, k, x).unwrap_or(0.0);
                if q <= 0.0 {
                    0.0
                } else {
                    xi_sq(p, k, x) * q.sqrt()
                }
            };
            let (_, m) = refined_max(&f, &grid);
            Ok((m, m))
        }
        Statistic::Thm11Ii | Statistic::Thm13I => {
            if sigma < 0.0 && k % 2 == 0 {
                return Err(Error::Regime(format!(
                    "xi_{k} is unbounded for sigma < 0 and even k; use the restricted statistic"
                )));
            }
            let b = prof.b_k.unwrap_or(0.0);
            let grid = adaptive_grid(p, k, near_zero(p, k), b + 2.0, density);
            let (_, m) = refined_max(&|x| xi_sq(p, k, x), &grid);
            Ok((kf.powf(1.0 / 6.0) * m, m))
        }
        Statistic::Thm11Iii | Statistic::Thm13Ii => {
            if !(sigma < 0.0 && k % 2 == 0 && k > 0) {
                return Err(Error::Regime(
                    "restricted maximum applies to even k >= 2 and sigma < 0".into(),
                ));
            }
            let x0 = smallest_positive_node(p, k)?;
            let b = prof.b_k.unwrap_or(0.0);
            let grid = adaptive_grid(p, k, x0, b + 2.0, density);
            let (_, m) = refined_max(&|x| xi_sq(p, k, x), &grid);
            Ok((kf.powf(1.0 / 6.0) * m, m))
        }
        Statistic::Thm12 => {
            if sigma >= 0.0 {
                return Err(Error::domain("phi_k boundedness scan needs sigma < 0"));
            }
            if k % 2 == 1 {
                return Err(Error::Parity(format!("phi_k boundedness scan needs even k, got {k}")));
            }
            let b = prof.b_k.unwrap_or(0.0);
            let mut grid = adaptive_grid(p, k, 1e-8, b + 2.0, density);
            grid.insert(0, 0.0);
            let (_, m) = refined_max(&|x| phi_sq(p, k, x), &grid);
            Ok((m, m))
        }
        Statistic::RootSpacing => {
            let (lo, hi) = prof
                .jhat_positive()
                .ok_or_else(|| Error::Regime(format!("oscillation region of k = {k} is empty")))?;
            let rule = build_rule(p, k)?;
            let d = max_node_distance(&rule.nodes, lo, hi);
            Ok((kf.powf(1.0 / 6.0) * d, d))
        }
        Statistic::LemmaF => {
            let b = prof
                .b_k
                .ok_or_else(|| Error::Regime(format!("no turning point for k = {k}")))?;
            let b_next = profile(p, k + 1)
                .b_k
                .ok_or_else(|| Error::Regime(format!("no turning point for k = {}", k + 1)))?;
            let grid = adaptive_grid(p, k, b_next, b_next + 5.0, density);
            let f = |x: f64| {
                let v = eval_basis(p, k, x, Kind::Xi).map(|e| e.value()).unwrap_or(f64::NAN);
                v * (x - b) * (x - b)
            };
            let (_, m) = refined_max(&f, &grid);
            Ok((kf.powf(5.0 / 12.0) * m, m))
        }
        Statistic::LemmaG => {
            if k == 0 {
                return Err(Error::domain("partial sums need k >= 1"));
            }
            let rule = build_rule(p, k)?;
            let x1 = rule.nodes[0];
            let half = opts.epsilon * kf.powf(-1.0 / 6.0);
            let f = |x: f64| xi_square_sum(p, k, x);
            let m = if half <= 0.0 {
                f(x1)
            } else {
                let grid: Vec<f64> = (0..=200)
                    .map(|i| x1 - half + 2.0 * half * i as f64 / 200.0)
                    .collect();
                refined_max(&f, &grid).1
            };
            Ok((kf.powf(-1.0 / 6.0) * m, m))
        }
    }
}

/// Largest distance from a point of `[lo, hi]` to the nearest entry of
/// `nodes`: the maximum sits at an endpoint or at a midpoint between
/// consecutive nodes.
pub fn max_node_distance(nodes: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nearest = |x: f64| -> f64 {
        let i = sorted.partition_point(|&v| v < x);
        let mut d = f64::INFINITY;
        if i < sorted.len() {
            d = d.min((sorted[i] - x).abs());
        }
        if i > 0 {
            d = d.min((x - sorted[i - 1]).abs());
        }
        d
    };
    let mut best = nearest(lo).max(nearest(hi));
    for w in sorted.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid >= lo && mid <= hi {
            best = best.max(nearest(mid));
        }
    }
    best
}

/// Evaluates `stat` for every `k` in `k_list`, in parallel, merged in list order.
pub fn scan(p: &Params, stat: Statistic, k_list: &[usize], opts: &ScanOptions) -> Result<EstimateScan> {
    let work = || -> Vec<Result<(f64, f64)>> {
        k_list
            .par_iter()
            .map(|&k| statistic_at(p, stat, k, opts))
            .collect()
    };
    let results = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut per_k = Vec::with_capacity(k_list.len());
    let mut raw = Vec::with_capacity(k_list.len());
    for r in results {
        let (v, m) = r?;
        per_k.push(v);
        raw.push(m);
    }
    let fit_idx: Vec<usize> = (0..k_list.len())
        .filter(|&i| k_list[i] >= opts.fit_kmin)
        .collect();
    let ks: Vec<usize> = fit_idx.iter().map(|&i| k_list[i]).collect();
    let ys: Vec<f64> = fit_idx
        .iter()
        .map(|&i| if stat.fits_raw() { raw[i] } else { per_k[i] })
        .collect();
    let fit = if ys.iter().all(|&y| y > 0.0 && y.is_finite()) {
        log_log_fit(&ks, &ys)
    } else {
        None
    };
    Ok(EstimateScan {
        sigma: p.sigma(),
        s: p.s(),
        statistic: stat,
        k_list: k_list.to_vec(),
        per_k_values: per_k,
        raw_values: raw,
        fitted_slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
    })
}
