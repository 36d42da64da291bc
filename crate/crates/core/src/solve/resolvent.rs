//! Resolvent probes of `lambda - A(f)*` for `|lambda| >= 1`.
//!
//! Invertibility of the shifted double layer potential for every real shift
//! outside `(-1, 1)` is what makes the density equation solvable; the probe
//! returns the computed smallest singular value of the dense matrix (Gram
//! weight `dx`) as a conditioning witness, plus a Krylov iteration count on
//! one seeded right-hand side. The positive floor observed here is a
//! grid-dependent number, not an analytic constant.

use super::gmres::{gmres, GmresConfig};
use crate::error::{Error, Result};
use crate::grid::SampledFn;
use crate::singular::dense::{assemble_shifted_adjoint, seeded_rhs, smallest_singular_value};
use crate::singular::ops::op_a_star_with;
use crate::singular::PvRule;

/// Shift ladder bracketing the endpoint `|lambda| = 1` where invertibility
/// is sharpest.
pub const LAMBDA_LADDER: [f64; 10] = [-4.0, -2.0, -1.5, -1.25, -1.0, 1.0, 1.25, 1.5, 2.0, 4.0];

#[derive(Debug, Clone, Copy)]
pub struct ResolventProbe {
    pub lambda: f64,
    pub min_singular_value: f64,
    pub gmres_iterations: usize,
}

pub fn resolvent_probe(f: &SampledFn, lambda: f64) -> Result<ResolventProbe> {
    resolvent_probe_with(f, lambda, PvRule::default())
}

pub fn resolvent_probe_with(f: &SampledFn, lambda: f64, rule: PvRule) -> Result<ResolventProbe> {
    if !(lambda.is_finite() && lambda.abs() >= 1.0) {
        return Err(Error::invalid(format!(
            "resolvent probes require |lambda| >= 1, got {lambda}"
        )));
    }
    let matrix = assemble_shifted_adjoint(f, lambda, rule)?;
    let min_singular_value = smallest_singular_value(&matrix);

    let grid = f.grid();
    let apply = |v: &[f64], out: &mut [f64]| {
        let vf = SampledFn::new(grid, v.to_vec()).expect("krylov iterate is finite");
        let image = op_a_star_with(f, &vf, rule).expect("operator application");
        for ((o, x), a) in out.iter_mut().zip(v).zip(image.values()) {
            *o = lambda * x - a;
        }
    };
    let rhs = seeded_rhs(grid, 0xBADC_0FFE ^ lambda.to_bits());
    let (_, outcome) = gmres(apply, rhs.values(), &GmresConfig::default());

    Ok(ResolventProbe {
        lambda,
        min_singular_value,
        gmres_iterations: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::window::gaussian;

    #[test]
    fn rejects_shifts_inside_the_gap() {
        let g = Grid::new(20.0, 64).unwrap();
        let f = SampledFn::zeros(g);
        assert!(resolvent_probe(&f, 0.5).is_err());
        assert!(resolvent_probe(&f, -0.99).is_err());
        assert!(resolvent_probe(&f, f64::NAN).is_err());
    }

    #[test]
    fn flat_interface_gives_exactly_abs_lambda() {
        let g = Grid::new(20.0, 128).unwrap();
        let f = SampledFn::zeros(g);
        for &lambda in &[1.0, -1.0, 1.5, -2.0] {
            let probe = resolvent_probe(&f, lambda).unwrap();
            assert!(
                (probe.min_singular_value - lambda.abs()).abs() < 1e-12,
                "lambda {lambda}: sigma_min {}",
                probe.min_singular_value
            );
        }
    }

    #[test]
    fn gaussian_family_stays_bounded_below() {
        let g = Grid::new(20.0, 128).unwrap();
        for &lambda in &[1.0, -1.0, 1.5, -2.0] {
            let f = gaussian(g, 1.0, 1.0, 0.0);
            let probe = resolvent_probe(&f, lambda).unwrap();
            assert!(
                probe.min_singular_value > 0.1,
                "lambda {lambda}: sigma_min {}",
                probe.min_singular_value
            );
        }
    }

    #[test]
    fn sigma_min_is_lipschitz_in_lambda() {
        // |sigma_min(lambda') - sigma_min(lambda)| <= |lambda' - lambda|
        let g = Grid::new(20.0, 128).unwrap();
        let f = gaussian(g, 1.2, 0.9, 0.3);
        let mut prev: Option<ResolventProbe> = None;
        for &lambda in &[1.0, 1.25, 1.5, 2.0, 4.0] {
            let probe = resolvent_probe(&f, lambda).unwrap();
            if let Some(last) = prev {
                let bound = (lambda - last.lambda).abs() + 1e-9;
                assert!(
                    (probe.min_singular_value - last.min_singular_value).abs() <= bound,
                    "jump at lambda {lambda}"
                );
            }
            prev = Some(probe);
        }
    }

    #[test]
    fn amplitude_sweep_keeps_positive_floor() {
        let g = Grid::new(20.0, 128).unwrap();
        for i in 0..=4 {
            let c = 0.5 * i as f64;
            let f = gaussian(g, c, 1.0, 0.0);
            let probe = resolvent_probe(&f, 1.0).unwrap();
            assert!(
                probe.min_singular_value > 0.05,
                "c = {c}: sigma_min {}",
                probe.min_singular_value
            );
        }
    }
}
