//! Dense assembly of the singular operators and small-matrix spectra.
//!
//! Assembly is quadratic in memory and reserved for `M <= 2048`; larger
//! grids only get the matrix-free appliers. All matrices act on coefficient
//! vectors under the uniform `dx` Gram weight, so discrete adjointness is
//! plain matrix transposition.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::PvRule;
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFn};
use crate::spectral::derivative;

/// Largest grid for which dense assembly is offered.
pub const DENSE_ASSEMBLY_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    A,
    B,
    AStar,
    BStar,
}

fn check_cap(grid: Grid) -> Result<()> {
    if grid.len() > DENSE_ASSEMBLY_CAP {
        return Err(Error::invalid(format!(
            "dense assembly capped at M = {DENSE_ASSEMBLY_CAP}, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Dense spectral differentiation matrix (first order) on the padded
/// transform, restricted to the base window. Antisymmetric to rounding.
pub fn derivative_matrix(grid: Grid) -> Result<DMatrix<f64>> {
    check_cap(grid)?;
    let m = grid.len();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut basis = vec![0.0; m];
            basis[j] = 1.0;
            let e = SampledFn::new(grid, basis).expect("basis vector");
            derivative(&e, 1).expect("derivative of basis").values().to_vec()
        })
        .collect();
    let mut d = DMatrix::zeros(m, m);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            d[(i, j)] = v;
        }
    }
    Ok(d)
}

/// Assemble the dense matrix of one of the four singular operators.
pub fn assemble_operator(
    kind: OperatorKind,
    f: &SampledFn,
    rule: PvRule,
) -> Result<DMatrix<f64>> {
    let grid = f.grid();
    check_cap(grid)?;
    let m = grid.len();
    let dx = grid.spacing();
    let fv = f.values();
    let f1 = derivative(f, 1)?;
    let f1v = f1.values();
    let weight = dx / PI;

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m];
            for j in 0..m {
                if j == i {
                    continue;
                }
                let y = (i as f64 - j as f64) * dx;
                let inv = 1.0 / y;
                let slope = (fv[i] - fv[j]) * inv;
                let den = 1.0 + slope * slope;
                let num = match kind {
                    OperatorKind::A => f1v[i] - slope,
                    OperatorKind::B => 1.0 + f1v[i] * slope,
                    OperatorKind::AStar => slope - f1v[j],
                    OperatorKind::BStar => -(1.0 + f1v[j] * slope),
                };
                row[j] = weight * inv * num / den;
            }
            row
        })
        .collect();

    let mut matrix = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }

    if rule.diagonal_correction {
        let f2 = derivative(f, 2)?;
        for i in 0..m {
            let coeff = match kind {
                OperatorKind::A | OperatorKind::AStar => {
                    f2.values()[i] / (2.0 * (1.0 + f1v[i] * f1v[i]))
                }
                OperatorKind::B | OperatorKind::BStar => {
                    f1v[i] * f2.values()[i] / (2.0 * (1.0 + f1v[i] * f1v[i]))
                }
            };
            matrix[(i, i)] += weight * coeff;
        }
        match kind {
            OperatorKind::B => {
                let d = derivative_matrix(grid)?;
                matrix -= d * weight;
            }
            OperatorKind::BStar => {
                let d = derivative_matrix(grid)?;
                matrix += d * weight;
            }
            _ => {}
        }
    }
    Ok(matrix)
}

/// `lambda I - A(f)*` as a dense matrix.
pub fn assemble_shifted_adjoint(f: &SampledFn, lambda: f64, rule: PvRule) -> Result<DMatrix<f64>> {
    let mut m = assemble_operator(OperatorKind::AStar, f, rule)?;
    m.scale_mut(-1.0);
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    Ok(m)
}

/// Operator max-row-sum (the L-infinity operator norm of the matrix).
pub fn max_row_sum(matrix: &DMatrix<f64>) -> f64 {
    (0..matrix.nrows())
        .map(|i| matrix.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

/// Smallest singular value by inverse power iteration on the normal
/// equations, with LU factorizations of the matrix and its transpose.
/// Returns 0 when the LU solve detects exact singularity.
pub fn smallest_singular_value(matrix: &DMatrix<f64>) -> f64 {
    let n = matrix.nrows();
    let lu = matrix.clone().lu();
    let lu_t = matrix.transpose().lu();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
    let mut v = nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0_f64));
    v /= v.norm();

    let mut estimate = f64::INFINITY;
    for _ in 0..2000 {
        let w = match lu_t.solve(&v) {
            Some(w) => w,
            None => return 0.0,
        };
        let z = match lu.solve(&w) {
            Some(z) => z,
            None => return 0.0,
        };
        let norm = z.norm();
        if !norm.is_finite() || norm == 0.0 {
            return 0.0;
        }
        let next = 1.0 / norm.sqrt();
        v = z / norm;
        if (next - estimate).abs() <= 1e-12 * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// GMRES iteration count for one seeded right-hand side of
/// `(lambda - A(f)*) x = b`; part of the resolvent probe record.
pub(crate) fn seeded_rhs(grid: Grid, seed: u64) -> SampledFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SampledFn::new(grid, values).expect("seeded rhs is finite")
}
