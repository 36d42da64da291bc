//! Refined-grid quadrature oracles.
//!
//! An independent evaluation path for the singular operators: inputs are
//! lifted to a refined lattice by trigonometric interpolation, the kernels
//! are re-coded here from their direct integral forms, and every derivative
//! the diagonal term needs is taken by fourth-order centered finite
//! differences instead of the FFT route. Outputs are restricted back to the
//! base nodes. Nothing in this module calls the production kernel code.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::SampledFn;
use crate::singular::BnmSpec;
use crate::spectral::refine;

/// Marker recorded in reports produced through this path.
pub const ORACLE_CODE_PATH: &str = "oracle-fd-quadrature";

/// Marker for the production path.
pub const FAMILY_CODE_PATH: &str = "family-spectral";

/// Operators the oracle can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    A,
    B,
    AStar,
    BStar,
}

const MAX_REFINED_POINTS: usize = 16384;

fn check_refinement(base_points: usize, refinement: usize) -> Result<()> {
    if ![1, 2, 4, 8].contains(&refinement) {
        return Err(Error::invalid(format!(
            "refinement must be one of 1, 2, 4, 8; got {refinement}"
        )));
    }
    if base_points * refinement > MAX_REFINED_POINTS {
        return Err(Error::invalid(format!(
            "refined grid {} exceeds the {MAX_REFINED_POINTS}-point memory cap",
            base_points * refinement
        )));
    }
    Ok(())
}

/// Fourth-order centered first derivative, zero extension at the edges.
fn fd1(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    let at = |i: isize| -> f64 {
        if (0..n as isize).contains(&i) {
            v[i as usize]
        } else {
            0.0
        }
    };
    (0..n as isize)
        .map(|i| (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * dx))
        .collect()
}

/// Fourth-order centered second derivative, zero extension at the edges.
fn fd2(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    let at = |i: isize| -> f64 {
        if (0..n as isize).contains(&i) {
            v[i as usize]
        } else {
            0.0
        }
    };
    (0..n as isize)
        .map(|i| {
            (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2))
                / (12.0 * dx * dx)
        })
        .collect()
}

/// Evaluate one of the four operators on a `refinement`-times finer lattice
/// and restrict the result to the base nodes.
pub fn oracle_operator(
    tag: OperatorTag,
    f: &SampledFn,
    density: &SampledFn,
    refinement: usize,
) -> Result<SampledFn> {
    f.same_grid(density)?;
    check_refinement(f.len(), refinement)?;

    let ff = refine(f, refinement)?;
    let dd = refine(density, refinement)?;
    let fine = ff.grid();
    let dx = fine.spacing();
    let n = fine.len();
    let fv = ff.values();
    let dv = dd.values();
    let f1 = fd1(fv, dx);
    let f2 = fd2(fv, dx);
    let d1 = fd1(dv, dx);

    let base = f.grid();
    let values: Vec<f64> = (0..base.len())
        .into_par_iter()
        .map(|ib| {
            let i = ib * refinement;
            let mut acc = 0.0;
            for k in 1..=n {
                for (j, y) in [
                    (i as isize - k as isize, k as f64 * dx),
                    (i as isize + k as isize, -(k as f64) * dx),
                ] {
                    if !(0..n as isize).contains(&j) {
                        continue;
                    }
                    let j = j as usize;
                    if dv[j] == 0.0 {
                        continue;
                    }
                    let inv = 1.0 / y;
                    let slope = (fv[i] - fv[j]) * inv;
                    let den = 1.0 + slope * slope;
                    let num = match tag {
                        OperatorTag::A => f1[i] - slope,
                        OperatorTag::B => 1.0 + f1[i] * slope,
                        OperatorTag::AStar => slope - f1[j],
                        OperatorTag::BStar => -(1.0 + f1[j] * slope),
                    };
                    acc += dv[j] * inv * num / den;
                }
            }
            // analytic y -> 0 limit restoring the punctured node
            let q = 2.0 * (1.0 + f1[i] * f1[i]);
            acc += match tag {
                OperatorTag::A | OperatorTag::AStar => f2[i] * dv[i] / q,
                OperatorTag::B => -d1[i] + f1[i] * f2[i] * dv[i] / q,
                OperatorTag::BStar => d1[i] + f1[i] * f2[i] * dv[i] / q,
            };
            acc * dx / PI
        })
        .collect();
    SampledFn::new(base, values)
}

/// Refined evaluation of a multilinear family member, same contract.
pub fn oracle_family(spec: &BnmSpec, theta: &SampledFn, refinement: usize) -> Result<SampledFn> {
    check_refinement(theta.len(), refinement)?;
    for g in spec.a_list().iter().chain(spec.b_list()) {
        theta.same_grid(g)?;
    }

    let th = refine(theta, refinement)?;
    let a: Vec<SampledFn> = spec
        .a_list()
        .iter()
        .map(|f| refine(f, refinement))
        .collect::<Result<_>>()?;
    let b: Vec<SampledFn> = spec
        .b_list()
        .iter()
        .map(|f| refine(f, refinement))
        .collect::<Result<_>>()?;

    let fine = th.grid();
    let dx = fine.spacing();
    let n = fine.len();
    let tv = th.values();
    let av: Vec<&[f64]> = a.iter().map(|f| f.values()).collect();
    let bv: Vec<&[f64]> = b.iter().map(|f| f.values()).collect();

    let t1 = fd1(tv, dx);
    let a1: Vec<Vec<f64>> = av.iter().map(|v| fd1(v, dx)).collect();
    let a2: Vec<Vec<f64>> = av.iter().map(|v| fd2(v, dx)).collect();
    let b1: Vec<Vec<f64>> = bv.iter().map(|v| fd1(v, dx)).collect();
    let b2: Vec<Vec<f64>> = bv.iter().map(|v| fd2(v, dx)).collect();

    let base = theta.grid();
    let values: Vec<f64> = (0..base.len())
        .into_par_iter()
        .map(|ib| {
            let i = ib * refinement;
            let mut acc = 0.0;
            for k in 1..=n {
                for (j, y) in [
                    (i as isize - k as isize, k as f64 * dx),
                    (i as isize + k as isize, -(k as f64) * dx),
                ] {
                    if !(0..n as isize).contains(&j) {
                        continue;
                    }
                    let j = j as usize;
                    if tv[j] == 0.0 {
                        continue;
                    }
                    let inv = 1.0 / y;
                    let mut num = tv[j] * inv;
                    for bl in &bv {
                        num *= (bl[i] - bl[j]) * inv;
                    }
                    let mut den = 1.0;
                    for al in &av {
                        let s = (al[i] - al[j]) * inv;
                        den *= 1.0 + s * s;
                    }
                    acc += num / den;
                }
            }
            // diagonal limit of the even part of the integrand
            let mut b0 = 1.0;
            for d in &b1 {
                b0 *= d[i];
            }
            let mut b1sum = 0.0;
            for l in 0..b1.len() {
                let mut prod = b2[l][i];
                for (r, d) in b1.iter().enumerate() {
                    if r != l {
                        prod *= d[i];
                    }
                }
                b1sum += prod;
            }
            let mut q0 = 1.0;
            let mut s = 0.0;
            for l in 0..a1.len() {
                let d1v = a1[l][i];
                q0 *= 1.0 + d1v * d1v;
                s += d1v * a2[l][i] / (1.0 + d1v * d1v);
            }
            acc += (-t1[i] * b0 - 0.5 * tv[i] * b1sum + tv[i] * b0 * s) / q0;
            acc * dx / PI
        })
        .collect();
    SampledFn::new(base, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::singular::ops::{op_a, op_a_star, op_b, op_b_star};
    use crate::singular::{bnm_apply, BnmSpec};
    use crate::window::gaussian;

    fn rel_l2(a: &SampledFn, b: &SampledFn) -> f64 {
        a.sub(b).norm_l2() / b.norm_l2().max(1e-300)
    }

    #[test]
    fn zero_interface_oracle_vanishes_for_a() {
        let g = Grid::new(20.0, 128).unwrap();
        let zero = SampledFn::zeros(g);
        let w = gaussian(g, 1.0, 1.0, 0.0);
        let out = oracle_operator(OperatorTag::A, &zero, &w, 4).unwrap();
        assert_eq!(out.norm_max(), 0.0);
    }

    #[test]
    fn refinement_one_matches_base_rule_closely() {
        // same punctured rule, only the diagonal-derivative route differs
        let g = Grid::new(20.0, 256).unwrap();
        let f = gaussian(g, 0.8, 1.0, 0.2);
        let w = gaussian(g, 1.0, 0.9, -0.3);
        let base = op_a(&f, &w).unwrap();
        let oracle = oracle_operator(OperatorTag::A, &f, &w, 1).unwrap();
        assert!(rel_l2(&oracle, &base) < 1e-8);
    }

    #[test]
    fn refinement_rejects_bad_factors_and_caps_memory() {
        let g = Grid::new(20.0, 4096).unwrap();
        let f = SampledFn::zeros(g);
        assert!(oracle_operator(OperatorTag::A, &f, &f, 3).is_err());
        assert!(oracle_operator(OperatorTag::A, &f, &f, 8).is_err());
    }

    #[test]
    fn base_operators_agree_with_refined_oracle() {
        let g = Grid::new(20.0, 512).unwrap();
        let f = gaussian(g, 0.8, 1.0, 0.2);
        let w = gaussian(g, 1.0, 0.9, -0.3);
        for (tag, base) in [
            (OperatorTag::A, op_a(&f, &w).unwrap()),
            (OperatorTag::B, op_b(&f, &w).unwrap()),
            (OperatorTag::AStar, op_a_star(&f, &w).unwrap()),
            (OperatorTag::BStar, op_b_star(&f, &w).unwrap()),
        ] {
            let oracle = oracle_operator(tag, &f, &w, 8).unwrap();
            let rel = rel_l2(&base, &oracle);
            assert!(rel < 1e-4, "{tag:?}: base vs oracle {rel}");
        }
    }

    #[test]
    fn family_member_agrees_with_refined_oracle() {
        let g = Grid::new(20.0, 512).unwrap();
        let f = gaussian(g, 0.8, 1.0, 0.2);
        let th = gaussian(g, 1.0, 0.9, -0.3);
        let spec = BnmSpec::diagonal(&f, 1, 1);
        let base = bnm_apply(&spec, &th).unwrap();
        let oracle = oracle_family(&spec, &th, 8).unwrap();
        let rel = rel_l2(&base, &oracle);
        assert!(rel < 1e-4, "family vs oracle {rel}");
    }
}
