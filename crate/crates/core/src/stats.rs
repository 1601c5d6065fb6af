//! Small summary statistics for scan results.

use serde::Serialize;

/// Least-squares fit `y = intercept + slope * x`; `None` for fewer than two
/// distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope and intercept of `ln y` against `ln k`.
pub fn log_log_fit(ks: &[usize], ys: &[f64]) -> Option<(f64, f64)> {
    let lx: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub argmax_k: Option<usize>,
}

/// `count` roughly log-spaced integers in `[kmin, kmax]`, deduplicated;
/// with `even_only` every entry is rounded to an even number.
pub fn log_spaced(kmin: usize, kmax: usize, count: usize, even_only: bool) -> Vec<usize> {
    assert!(kmin >= 1 && kmax >= kmin, "need 1 <= kmin <= kmax");
    let fix = |k: usize| -> usize {
        if even_only && k % 2 == 1 {
            if k + 1 <= kmax {
                k + 1
            } else {
                k - 1
            }
        } else {
            k
        }
    };
    let mut out: Vec<usize> = if count <= 1 || kmin == kmax {
        vec![fix(kmin)]
    } else {
        let (a, b) = ((kmin as f64).ln(), (kmax as f64).ln());
        (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                fix(t.exp().round() as usize)
            })
            .collect()
    };
    out.sort_unstable();
    out.dedup();
    out
}
