//! Restarted GMRES on a matrix-free operator.
//!
//! Arnoldi with modified Gram-Schmidt and Givens rotations; nothing exotic.
//! The operators solved here are nonsymmetric compact-ish perturbations of
//! the identity, so plain restarted GMRES converges in a handful of
//! iterations at desk scale.

/// Restart length, total iteration cap and relative residual target.
#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            restart: 50,
            max_iterations: 500,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` with `apply(x, out)` computing `out = A x`.
/// Starts from `x = 0`. Returns the iterate and the convergence record.
pub fn gmres(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    cfg: &GmresConfig,
) -> (Vec<f64>, GmresOutcome) {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (
            x,
            GmresOutcome {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        );
    }

    let mut total_iters = 0;
    let mut residual;
    let mut scratch = vec![0.0; n];

    'outer: while total_iters < cfg.max_iterations {
        // r = b - A x
        apply(&x, &mut scratch);
        let mut r: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        residual = beta / bnorm;
        if residual <= cfg.tolerance {
            break;
        }
        for ri in r.iter_mut() {
            *ri /= beta;
        }

        let m = cfg.restart.min(cfg.max_iterations - total_iters);
        let mut basis: Vec<Vec<f64>> = vec![r];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut cols = 0;
        for j in 0..m {
            apply(&basis[j], &mut scratch);
            let mut w = scratch.clone();
            for (i, q) in basis.iter().enumerate() {
                let hij = dot(q, &w);
                h[i][j] = hij;
                for (wk, qk) in w.iter_mut().zip(q) {
                    *wk -= hij * qk;
                }
            }
            let hnext = norm(&w);
            h[j + 1][j] = hnext;

            // apply accumulated rotations to the new column
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + hnext * hnext).sqrt();
            if denom == 0.0 {
                cols = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = hnext / denom;
            h[j][j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            total_iters += 1;
            cols = j + 1;
            residual = g[j + 1].abs() / bnorm;

            if residual <= cfg.tolerance || hnext == 0.0 {
                break;
            }
            for wk in w.iter_mut() {
                *wk /= hnext;
            }
            basis.push(w);
        }

        // back substitution on the triangular system
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for k in i + 1..cols {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * qi;
            }
        }

        if residual <= cfg.tolerance {
            break 'outer;
        }
    }

    // final true residual
    apply(&x, &mut scratch);
    let r: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
    residual = norm(&r) / bnorm;

    (
        x,
        GmresOutcome {
            iterations: total_iters,
            relative_residual: residual,
            converged: residual <= cfg.tolerance,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_returns_zero() {
        let (x, out) = gmres(|v, o| o.copy_from_slice(v), &[0.0; 8], &GmresConfig::default());
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }

    #[test]
    fn identity_converges_immediately() {
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let (x, out) = gmres(|v, o| o.copy_from_slice(v), &b, &GmresConfig::default());
        assert!(out.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn small_dense_system() {
        // diagonally dominant 4x4
        let a = [
            [4.0, 1.0, 0.0, 0.5],
            [-1.0, 5.0, 0.3, 0.0],
            [0.0, 0.7, 3.0, -0.2],
            [0.2, 0.0, -0.4, 6.0],
        ];
        let apply = |v: &[f64], o: &mut [f64]| {
            for i in 0..4 {
                o[i] = (0..4).map(|j| a[i][j] * v[j]).sum();
            }
        };
        let xstar = [1.0, -1.0, 2.0, 0.25];
        let mut b = vec![0.0; 4];
        apply(&xstar, &mut b);
        let (x, out) = gmres(apply, &b, &GmresConfig::default());
        assert!(out.converged);
        for (xi, si) in x.iter().zip(&xstar) {
            assert!((xi - si).abs() < 1e-9);
        }
    }

    #[test]
    fn iteration_cap_reports_stall() {
        // Rotation-like operator that GMRES cannot crack in two iterations.
        let apply = |v: &[f64], o: &mut [f64]| {
            let n = v.len();
            for i in 0..n {
                o[i] = v[(i + 1) % n];
            }
        };
        let b: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let cfg = GmresConfig {
            restart: 2,
            max_iterations: 2,
            tolerance: 1e-14,
        };
        let (_, out) = gmres(apply, &b, &cfg);
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }
}
