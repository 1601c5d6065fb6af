//! Implicit QL with Wilkinson shifts for symmetric tridiagonal matrices,
//! tracking only the first component of each eigenvector (all that
//! Golub–Welsch needs).

use crate::error::{Error, Result};

/// Eigenvalues and first eigenvector components, unsorted.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Diagonalizes the matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`). Gives up after `60 n` sweeps in total.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    assert!(n >= 1 && off.len() + 1 == n, "off-diagonal length must be n-1");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    let max_iter = 60 * n;
    let mut iterations = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Convergence { iterations });
            }
            // Wilkinson shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(TridiagEigen {
        values: d,
        first_components: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let r = symmetric_tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        let mut v = r.values.clone();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        for z in r.first_components {
            assert!((z * z - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let r = symmetric_tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        let mut v = r.values.clone();
        v.sort_by(f64::total_cmp);
        for (j, &lam) in v.iter().enumerate() {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let want = 2.0 - 2.0 * theta.cos();
            assert!((lam - want).abs() < 1e-13, "{j}: {lam} vs {want}");
        }
        let total: f64 = r.first_components.iter().map(|z| z * z).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_entry() {
        let r = symmetric_tridiagonal_eigen(&[3.5], &[]).unwrap();
        assert_eq!(r.values, vec![3.5]);
        assert_eq!(r.first_components, vec![1.0]);
    }
}
