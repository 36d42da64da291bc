//! Smooth window profiles and stock test fixtures.
//!
//! The truncation model treats everything as identically zero outside the
//! window, so any fixture fed to the nonlocal operators has to reach the far
//! field tolerance before the domain edge. The profiles here are built from
//! `tanh` ramps: analytic, and their tails undershoot 1e-12 by construction.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, SampledFn};

/// Smooth plateau: 1 on roughly `|x| <= L/2`, machine zero at the edges.
pub fn plateau_window(grid: Grid) -> SampledFn {
    let l = grid.half_width();
    plateau(grid, 0.5 * l, l / 32.0)
}

/// Smooth plateau that is 1 on `|x| <= flat` and decays over scale `ramp`.
pub fn plateau(grid: Grid, flat: f64, ramp: f64) -> SampledFn {
    SampledFn::from_fn(grid, |x| {
        0.5 * (((x + flat) / ramp).tanh() - ((x - flat) / ramp).tanh())
    })
    .expect("plateau values are finite")
}

/// Fixed far-field taper: identity on `|x| <= 0.75 L`, zero at the edges.
///
/// The nonlocal operators produce outputs with algebraically decaying tails
/// that do not meet the far-field tolerance at finite `L`; this taper brings
/// such outputs back inside the decaying class before they are differentiated
/// or fed into the time stepper.
pub fn edge_taper(u: &SampledFn) -> SampledFn {
    let g = u.grid();
    let l = g.half_width();
    u.mul(&plateau(g, 0.75 * l, l / 60.0))
}

/// Gaussian bump `amplitude * exp(-((x-center)/width)^2)`.
pub fn gaussian(grid: Grid, amplitude: f64, width: f64, center: f64) -> SampledFn {
    SampledFn::from_fn(grid, |x| {
        let z = (x - center) / width;
        amplitude * (-z * z).exp()
    })
    .expect("gaussian values are finite")
}

/// Windowed oscillatory mode `amplitude * cos(k x)` under the plateau window.
pub fn windowed_mode(grid: Grid, amplitude: f64, k: f64) -> SampledFn {
    let w = plateau_window(grid);
    SampledFn::from_fn(grid, |x| amplitude * (k * x).cos())
        .expect("mode values are finite")
        .mul(&w)
}

/// Seeded smooth decaying profile: a few random Gaussian bumps.
pub fn random_smooth(grid: Grid, seed: u64, amplitude: f64) -> SampledFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_width();
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0) * amplitude,
                rng.gen_range(0.6..2.0),
                rng.gen_range(-0.25 * l..0.25 * l),
            )
        })
        .collect();
    SampledFn::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(a, w, c)| {
                let z = (x - c) / w;
                a * (-z * z).exp()
            })
            .sum()
    })
    .expect("random smooth values are finite")
}

/// Seeded profile with a slowly decaying Fourier tail (kept smooth enough for
/// the quasilinear operators): mode amplitudes ~ k^{-5/2} up to `M/3`.
pub fn rough_profile(grid: Grid, seed: u64, amplitude: f64) -> SampledFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_width();
    let k_max = grid.len() / 3;
    let modes: Vec<(f64, f64, f64)> = (1..=k_max)
        .map(|k| {
            let xi = std::f64::consts::PI * k as f64 / l;
            let amp = (k as f64).powf(-2.5);
            (xi, amp, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let w = plateau_window(grid);
    let raw = SampledFn::from_fn(grid, |x| {
        modes
            .iter()
            .map(|&(xi, a, phase)| a * (xi * x + phase).cos())
            .sum()
    })
    .expect("rough profile values are finite")
    .mul(&w);
    let peak = raw.norm_max().max(1e-300);
    raw.scale(amplitude / peak)
}
