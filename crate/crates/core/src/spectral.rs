//! FFT-based transforms on the zero-padded lattice.
//!
//! Every transform here embeds the `M` samples into a circle of `2M` nodes
//! (period `4L`) before applying a Fourier multiplier. The padding suppresses
//! the periodic wrap-around of the slowly decaying convolution kernels; the
//! outputs are restricted back to the base window.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::SampledFn;

/// Zero-padding factor applied before every transform.
pub const PAD_FACTOR: usize = 2;

/// Signed frequency of padded-bin `j` on a grid with half-width `L`:
/// the padded circle has period `4L`, so `xi_j = pi * j~ / (2L)`.
fn bin_frequency(j: usize, n: usize, half_width: f64) -> f64 {
    let signed = if j <= n / 2 {
        j as isize
    } else {
        j as isize - n as isize
    };
    std::f64::consts::PI * signed as f64 / (PAD_FACTOR as f64 * half_width)
}

fn padded_buffer(u: &SampledFn) -> Vec<Complex64> {
    let m = u.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); PAD_FACTOR * m];
    for (slot, &v) in buf.iter_mut().zip(u.values()) {
        slot.re = v;
    }
    buf
}

/// Apply a Fourier multiplier `symbol(xi)` on the padded circle and restrict
/// the (real part of the) result back to the base window.
///
/// The Nyquist bin is zeroed whenever the symbol there has a nonzero
/// imaginary part, so that real input yields real output.
pub fn apply_multiplier(u: &SampledFn, symbol: impl Fn(f64) -> Complex64) -> SampledFn {
    let m = u.len();
    let n = PAD_FACTOR * m;
    let mut buf = padded_buffer(u);

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let l = u.grid().half_width();
    for (j, slot) in buf.iter_mut().enumerate() {
        let mut s = symbol(bin_frequency(j, n, l));
        if j == n / 2 && s.im != 0.0 {
            s = Complex64::new(0.0, 0.0);
        }
        *slot *= s;
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = buf[..m].iter().map(|c| c.re * scale).collect();
    SampledFn::new(u.grid(), values).expect("multiplier output stays finite")
}

fn require_finite(u: &SampledFn, what: &'static str) -> Result<()> {
    if u.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Spectral derivative of the given order. Exact for band-limited data.
///
/// Orders 1 through 3 are supported; odd orders zero the Nyquist bin so the
/// differentiation matrix stays real and antisymmetric.
pub fn derivative(u: &SampledFn, order: u32) -> Result<SampledFn> {
    if !(1..=3).contains(&order) {
        return Err(Error::invalid(format!(
            "derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    require_finite(u, "derivative input")?;
    Ok(apply_multiplier(u, |xi| {
        Complex64::new(0.0, xi).powu(order)
    }))
}

/// Hilbert transform `H[u](x) = (1/pi) PV int u(x-y)/y dy`, realized as the
/// Fourier multiplier `-i sgn(xi)` on the padded circle.
pub fn hilbert(u: &SampledFn) -> Result<SampledFn> {
    require_finite(u, "hilbert input")?;
    Ok(apply_multiplier(u, |xi| {
        Complex64::new(0.0, -xi.signum())
    }))
}

/// Trigonometric interpolation of `u` onto a `factor`-refined grid.
///
/// Spectrally accurate for smooth decaying samples; used by the refined
/// quadrature oracles to lift base-grid data.
pub fn refine(u: &SampledFn, factor: usize) -> Result<SampledFn> {
    let fine_grid = u.grid().refined(factor)?;
    if factor == 1 {
        return Ok(u.clone());
    }
    let m = u.len();
    let n = PAD_FACTOR * m;
    let n_fine = n * factor;

    let mut coarse = padded_buffer(u);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut coarse);

    // Spread the spectrum into the larger bin set; the coarse Nyquist bin is
    // dropped (it is ambiguous between +/-, and decaying smooth data has no
    // content there).
    let mut fine = vec![Complex64::new(0.0, 0.0); n_fine];
    for j in 0..n {
        if j == n / 2 {
            continue;
        }
        let signed = if j < n / 2 {
            j as isize
        } else {
            j as isize - n as isize
        };
        let dst = signed.rem_euclid(n_fine as isize) as usize;
        fine[dst] = coarse[j] * factor as f64;
    }

    planner.plan_fft_inverse(n_fine).process(&mut fine);
    let scale = 1.0 / n_fine as f64;
    let values = fine[..m * factor].iter().map(|c| c.re * scale).collect();
    SampledFn::new(fine_grid, values)
}

/// Fraction of (padded-circle) spectral energy carried by frequencies with
/// `|xi| > xi_cut`. Returns zero for the zero function.
pub fn highpass_energy_fraction(u: &SampledFn, xi_cut: f64) -> f64 {
    let m = u.len();
    let n = PAD_FACTOR * m;
    let mut buf = padded_buffer(u);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let l = u.grid().half_width();
    let mut total = 0.0;
    let mut high = 0.0;
    for (j, c) in buf.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if bin_frequency(j, n, l).abs() > xi_cut {
            high += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        high / total
    }
}
