//! Discrete fractional Sobolev norms.
//!
//! For non-integer `s = [s] + {s}` in `(0,2)` the norm is
//! `(||u||_{W^{[s]}_p}^p + [u]_{W^s_p}^p)^{1/p}`, where the Gagliardo
//! seminorm is evaluated in its shift form: the double integral collapses to
//! an integral over the shift `xi` of `||u^{([s])} - tau_xi u^{([s])}||_p^p /
//! |xi|^{1 + {s} p}`, which the lattice realizes as a sum over whole-cell
//! shifts `xi = k dx`, `1 <= |k| <= M/2`. Shifts use zero extension, matching
//! the truncation model.

use crate::error::{Error, Result};
use crate::grid::SampledFn;
use crate::spectral::derivative;

/// Regularity/integrability exponent pair `(s, p)` for the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    s: f64,
    p: f64,
}

impl SobolevIndex {
    /// Requires `p` in `(1, inf)` and `s` in `(0, 2)`, `s` not an integer.
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
        }
        if !(s.is_finite() && s > 0.0 && s < 2.0) {
            return Err(Error::invalid(format!("s must lie in (0, 2), got {s}")));
        }
        if s.fract() == 0.0 {
            return Err(Error::invalid(format!(
                "integer s = {s} is not a fractional index; use wkp_norm"
            )));
        }
        Ok(SobolevIndex { s, p })
    }

    /// The well-posedness range for the evolution requires `s > 1 + 1/p`.
    pub fn new_solver_range(s: f64, p: f64) -> Result<Self> {
        let idx = SobolevIndex::new(s, p)?;
        if s <= 1.0 + 1.0 / p {
            return Err(Error::invalid(format!(
                "solver range requires s in (1 + 1/p, 2); got s = {s}, p = {p}"
            )));
        }
        Ok(idx)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Index pair one derivative down, `(s - 1, p)`; only valid for `s > 1`.
    pub fn lowered(&self) -> Result<SobolevIndex> {
        SobolevIndex::new(self.s - 1.0, self.p)
    }
}

fn lp_norm_pow(values: &[f64], p: f64, dx: f64) -> f64 {
    dx * values.iter().map(|v| v.abs().powf(p)).sum::<f64>()
}

/// Gagliardo seminorm `[u]_{W^s_p}` in the lattice shift form.
fn seminorm_pow(base: &SampledFn, frac: f64, p: f64) -> f64 {
    let m = base.len();
    let dx = base.grid().spacing();
    let v = base.values();
    let mut total = 0.0;
    for k in 1..=(m / 2) {
        let xi = k as f64 * dx;
        let weight = dx / xi.powf(1.0 + frac * p);
        // tau_{+xi} and tau_{-xi}, zero extension outside the window.
        let mut diff_pow = 0.0;
        for i in 0..m {
            let fwd = if i + k < m { v[i + k] } else { 0.0 };
            let bwd = if i >= k { v[i - k] } else { 0.0 };
            diff_pow += (v[i] - fwd).abs().powf(p) + (v[i] - bwd).abs().powf(p);
        }
        total += weight * dx * diff_pow;
    }
    total
}

/// Discrete `W^s_p` norm for fractional `s` in `(0, 2)`.
pub fn sobolev_norm(u: &SampledFn, idx: SobolevIndex) -> Result<f64> {
    let p = idx.p();
    let whole = idx.s().floor();
    let frac = idx.s() - whole;
    let dx = u.grid().spacing();

    let (base_pow, seminorm_base) = if whole == 0.0 {
        (lp_norm_pow(u.values(), p, dx), u.clone())
    } else {
        let du = derivative(u, 1)?;
        let pow = lp_norm_pow(u.values(), p, dx) + lp_norm_pow(du.values(), p, dx);
        (pow, du)
    };

    let total = base_pow + seminorm_pow(&seminorm_base, frac, p);
    Ok(total.powf(1.0 / p))
}

/// Plain integer-order `W^k_p` norm, `k <= 2`.
pub fn wkp_norm(u: &SampledFn, k: u32, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
    }
    if k > 2 {
        return Err(Error::invalid(format!("wkp_norm supports k <= 2, got {k}")));
    }
    let dx = u.grid().spacing();
    let mut total = lp_norm_pow(u.values(), p, dx);
    let mut current = u.clone();
    for _ in 0..k {
        current = derivative(&current, 1)?;
        total += lp_norm_pow(current.values(), p, dx);
    }
    Ok(total.powf(1.0 / p))
}
