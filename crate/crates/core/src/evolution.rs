//! The quasilinear interface evolution `df/dt = Phi(f)[f]` and its IMEX
//! integrator.
//!
//! `Phi(f)[h] = -(B(f)*[theta(f)[h]])'` with `theta(f)[h]` the density
//! solve. The leading constant-coefficient part of the linearization at the
//! flat interface is the Fourier multiplier `xi -> -sigma b_mu |xi|^3`; the
//! stepper treats that part implicitly (diagonal in Fourier space,
//! unconditionally stable for the stiff cubic symbol) and the remainder
//! explicitly, with step-doubling error control.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFn, FAR_FIELD_TOL};
use crate::params::PhysicalParams;
use crate::solve::{solve_theta_with, SolveOptions};
use crate::singular::ops::op_b_star_with;
use crate::sobolev::{sobolev_norm, SobolevIndex};
use crate::spectral::{apply_multiplier, derivative};
use crate::window::edge_taper;

/// Quasilinear curvature operator `kappa(f)[h] = h'' / (1 + f'^2)^{3/2}`;
/// at `h = f` this is the curvature of the interface graph.
pub fn curvature_quasilinear(f: &SampledFn, h: &SampledFn) -> Result<SampledFn> {
    f.same_grid(h)?;
    let f1 = derivative(f, 1)?;
    let h2 = derivative(h, 2)?;
    Ok(h2.zip_map(&f1, |num, s| num / (1.0 + s * s).powf(1.5)))
}

/// Symbol of the leading multiplier: `-sigma b_mu |xi|^3`.
pub fn phi_pi0_symbol(xi: f64, params: &PhysicalParams) -> f64 {
    -params.surface_tension * params.b_mu() * xi.abs().powi(3)
}

/// Apply the leading multiplier on the padded circle.
pub fn phi_pi0_apply(h: &SampledFn, params: &PhysicalParams) -> SampledFn {
    apply_multiplier(h, |xi| Complex64::new(phi_pi0_symbol(xi, params), 0.0))
}

/// One application of `Phi(f)[h]`.
#[derive(Debug, Clone)]
pub struct PhiApplication {
    pub value: SampledFn,
    pub theta: SampledFn,
    pub solve_iterations: usize,
}

/// `Phi(f)[h] = -(B(f)*[theta])'` for the solved density.
///
/// The adjoint output carries `1/x` far-field tails (it sees the nonzero
/// mean of the density), which violate the decay the spectral derivative
/// needs; it is edge-tapered first, so the returned field is exact away from
/// the outer 25% of the window and decays at the edges.
pub fn phi_apply(
    f: &SampledFn,
    h: &SampledFn,
    params: &PhysicalParams,
    opts: &SolveOptions,
) -> Result<PhiApplication> {
    let solution = solve_theta_with(f, h, params, opts)?;
    let value = phi_from_theta(f, &solution.theta, opts)?;
    Ok(PhiApplication {
        value,
        theta: solution.theta,
        solve_iterations: solution.iterations,
    })
}

/// The transport side of the evolution for an already-solved density.
pub fn phi_from_theta(f: &SampledFn, theta: &SampledFn, opts: &SolveOptions) -> Result<SampledFn> {
    let bstar = op_b_star_with(f, theta, opts.rule)?;
    Ok(derivative(&edge_taper(&bstar), 1)?.scale(-1.0))
}

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct SteppingConfig {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub safety: f64,
    /// Relative step-doubling error accepted per step.
    pub error_tolerance: f64,
    pub end_time: f64,
}

impl SteppingConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.dt_min
            && self.dt_min <= self.dt_initial
            && self.dt_initial <= self.dt_max;
        if !ordered {
            return Err(Error::invalid(format!(
                "need 0 < dt_min <= dt_initial <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_initial, self.dt_max
            )));
        }
        if !(self.error_tolerance > 0.0 && self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::invalid(
                "error tolerance must be positive and safety in (0, 1]".to_string(),
            ));
        }
        if !(self.end_time > 0.0) {
            return Err(Error::invalid("end time must be positive".to_string()));
        }
        Ok(())
    }
}

impl Default for SteppingConfig {
    fn default() -> Self {
        SteppingConfig {
            dt_initial: 1e-3,
            dt_min: 1e-9,
            dt_max: 5e-2,
            safety: 0.8,
            error_tolerance: 1e-6,
            end_time: 0.5,
        }
    }
}

/// Evolution state: time, interface, the density solved for that interface,
/// the current step size and the accepted-step count.
#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub interface: SampledFn,
    pub density: SampledFn,
    pub dt: f64,
    pub step_count: usize,
    pub solve_iterations: usize,
}

impl SimState {
    pub fn new(
        f0: SampledFn,
        params: &PhysicalParams,
        cfg: &SteppingConfig,
        opts: &SolveOptions,
    ) -> Result<Self> {
        cfg.validate()?;
        let solution = solve_theta_with(&f0, &f0, params, opts)?;
        Ok(SimState {
            time: 0.0,
            interface: f0,
            density: solution.theta,
            dt: cfg.dt_initial,
            step_count: 0,
            solve_iterations: solution.iterations,
        })
    }
}

/// One implicit-explicit Euler substep: the cubic multiplier is inverted
/// diagonally in Fourier space, the remainder enters explicitly.
fn imex_euler(
    f: &SampledFn,
    phi_value: &SampledFn,
    params: &PhysicalParams,
    dt: f64,
) -> SampledFn {
    let explicit = phi_value.sub(&phi_pi0_apply(f, params));
    let rhs = f.add(&explicit.scale(dt));
    apply_multiplier(&rhs, |xi| {
        Complex64::new(1.0 / (1.0 - dt * phi_pi0_symbol(xi, params)), 0.0)
    })
}

/// One accepted adaptive step. Step-doubling compares one `dt` step against
/// two `dt/2` steps; the halved solution is kept. Fails with `DtUnderflow`
/// when the controller drives `dt` below `dt_min`.
pub fn step_imex(
    state: &SimState,
    params: &PhysicalParams,
    cfg: &SteppingConfig,
    opts: &SolveOptions,
) -> Result<SimState> {
    cfg.validate()?;
    let f = &state.interface;
    let phi_f = phi_from_theta(f, &state.density, opts)?;
    let mut dt = state.dt.min(cfg.dt_max).max(cfg.dt_min);
    let mut iterations = 0;

    loop {
        let coarse = imex_euler(f, &phi_f, params, dt);
        let half = imex_euler(f, &phi_f, params, 0.5 * dt);
        let phi_half = match phi_apply(&half, &half, params, opts) {
            Ok(app) => {
                iterations += app.solve_iterations;
                app
            }
            Err(e) => return Err(e),
        };
        let fine = imex_euler(&half, &phi_half.value, params, 0.5 * dt);

        let scale = fine.norm_l2().max(f.norm_l2()).max(1e-12);
        let err = fine.sub(&coarse).norm_l2() / scale;

        if err <= cfg.error_tolerance {
            let solution = solve_theta_with(&fine, &fine, params, opts)?;
            iterations += solution.iterations;
            let growth = if err > 0.0 {
                (cfg.error_tolerance / err).sqrt().min(5.0)
            } else {
                5.0
            };
            let dt_next = (cfg.safety * dt * growth).clamp(cfg.dt_min, cfg.dt_max);
            return Ok(SimState {
                time: state.time + dt,
                interface: fine,
                density: solution.theta,
                dt: dt_next,
                step_count: state.step_count + 1,
                solve_iterations: iterations,
            });
        }

        let shrink = (cfg.error_tolerance / err).sqrt().max(0.1);
        let dt_new = cfg.safety * dt * shrink;
        if dt_new < cfg.dt_min {
            return Err(Error::DtUnderflow {
                time: state.time,
                dt: dt_new,
                error_estimate: err,
            });
        }
        dt = dt_new;
    }
}

/// Per-frame diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct FrameDiagnostics {
    pub sobolev_norm: f64,
    pub max_abs: f64,
    /// `||Phi(f)[f]||_2`, the steady-state residual.
    pub steady_residual: f64,
    pub dt: f64,
    pub solver_iterations: usize,
}

/// Snapshot of the evolution at one cadence tick.
#[derive(Debug, Clone)]
pub struct FrameRecord {
    pub time: f64,
    pub interface: SampledFn,
    pub density: SampledFn,
    pub diagnostics: FrameDiagnostics,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Reached the configured end time.
    Completed,
    /// dt underflow: the maximal time was reached numerically.
    DtUnderflow { time: f64, error_estimate: f64 },
    /// The density solve failed and could not be recovered.
    SolverFailure { time: f64, detail: String },
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub frames: Vec<FrameRecord>,
    pub termination: Termination,
}

/// Simulation-wide options: frame cadence and the diagnostic norm index.
#[derive(Debug, Clone, Copy)]
pub struct SimulationOptions {
    pub frame_interval: f64,
    pub sobolev_index: SobolevIndex,
    pub solve: SolveOptions,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            frame_interval: 0.05,
            sobolev_index: SobolevIndex::new_solver_range(1.75, 2.0)
                .expect("stock index is in range"),
            solve: SolveOptions::default(),
        }
    }
}

fn frame_from_state(state: &SimState, opts: &SimulationOptions) -> Result<FrameRecord> {
    let phi = phi_from_theta(&state.interface, &state.density, &opts.solve)?;
    Ok(FrameRecord {
        time: state.time,
        interface: state.interface.clone(),
        density: state.density.clone(),
        diagnostics: FrameDiagnostics {
            sobolev_norm: sobolev_norm(&state.interface, opts.sobolev_index)?,
            max_abs: state.interface.norm_max(),
            steady_residual: phi.norm_l2(),
            dt: state.dt,
            solver_iterations: state.solve_iterations,
        },
    })
}

/// Advance `f0` to the configured end time, emitting frames at the cadence.
/// Step failures terminate the run but preserve the frame history.
pub fn simulate(
    f0: SampledFn,
    params: &PhysicalParams,
    cfg: &SteppingConfig,
    opts: &SimulationOptions,
) -> Result<Simulation> {
    cfg.validate()?;
    params.validate()?;
    if !f0.is_decaying(1e3 * FAR_FIELD_TOL) {
        return Err(Error::invalid(format!(
            "initial interface is not decaying: far field max {:.3e}",
            f0.far_field_max()
        )));
    }
    if !(opts.frame_interval > 0.0) {
        return Err(Error::invalid("frame interval must be positive".to_string()));
    }

    let grid = f0.grid();
    let mut state = SimState::new(f0, params, cfg, &opts.solve)?;
    let mut frames = vec![frame_from_state(&state, opts)?];
    let mut next_tick = opts.frame_interval;

    let termination = loop {
        if state.time >= cfg.end_time - 1e-14 {
            break Termination::Completed;
        }
        // do not overshoot the end time
        let mut capped = state.clone();
        capped.dt = capped.dt.min(cfg.end_time - state.time).max(cfg.dt_min);
        match step_imex(&capped, params, cfg, &opts.solve) {
            Ok(next) => {
                state = next;
                if state.time + 1e-14 >= next_tick || state.time >= cfg.end_time - 1e-14 {
                    frames.push(frame_from_state(&state, opts)?);
                    while next_tick <= state.time + 1e-14 {
                        next_tick += opts.frame_interval;
                    }
                }
            }
            Err(Error::DtUnderflow {
                time,
                error_estimate,
                ..
            }) => {
                break Termination::DtUnderflow {
                    time,
                    error_estimate,
                }
            }
            Err(Error::SolverStalled {
                residual,
                iterations,
            }) => {
                break Termination::SolverFailure {
                    time: state.time,
                    detail: format!(
                        "density solve stalled at residual {residual:.3e} after {iterations} iterations"
                    ),
                }
            }
            Err(other) => return Err(other),
        }
    };

    Ok(Simulation {
        grid,
        frames,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hilbert;
    use crate::window::{gaussian, windowed_mode};

    #[test]
    fn curvature_trivial_cases() {
        let g = Grid::new(20.0, 256).unwrap();
        let f = gaussian(g, 1.0, 1.0, 0.0);
        let zero = SampledFn::zeros(g);
        assert_eq!(curvature_quasilinear(&f, &zero).unwrap().norm_max(), 0.0);

        let h = gaussian(g, 1.0, 1.2, 0.4);
        let flat = curvature_quasilinear(&zero, &h).unwrap();
        let h2 = derivative(&h, 2).unwrap();
        assert!(flat.sub(&h2).norm_max() < 1e-12);
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let g = Grid::new(20.0, 1024).unwrap();
        let f = gaussian(g, 1.0, 1.0, 0.0);
        let kappa = curvature_quasilinear(&f, &f).unwrap();

        // centered-difference oracle
        let v = f.values();
        let dx = g.spacing();
        let m = g.len();
        let mut oracle = vec![0.0; m];
        for i in 1..m - 1 {
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
            oracle[i] = d2 / (1.0 + d1 * d1).powf(1.5);
        }
        let num: f64 = (1..m - 1)
            .map(|i| (kappa.values()[i] - oracle[i]).powi(2))
            .sum();
        let den: f64 = (1..m - 1).map(|i| oracle[i].powi(2)).sum();
        let rel = (num / den).sqrt();
        assert!(rel < 1e-6, "relative error vs finite differences {rel}");
    }

    #[test]
    fn multiplier_symbol_values() {
        let p = PhysicalParams::default();
        assert_eq!(phi_pi0_symbol(0.0, &p), 0.0);
        // sigma b_mu = 1/3: at xi = 2 the symbol is -8/3
        assert!((phi_pi0_symbol(2.0, &p) + 8.0 * p.surface_tension * p.b_mu()).abs() < 1e-15);
        assert_eq!(phi_pi0_symbol(-2.0, &p), phi_pi0_symbol(2.0, &p));
    }

    #[test]
    fn multiplier_acts_as_cubic_decay_on_modes() {
        let g = Grid::new(20.0, 512).unwrap();
        let p = PhysicalParams::default();
        let k = 2.0;
        let h = windowed_mode(g, 1.0, k);
        let out = phi_pi0_apply(&h, &p);
        let expect = h.scale(phi_pi0_symbol(k, &p));
        let m = g.len();
        let num: f64 = (m / 4..3 * m / 4)
            .map(|i| (out.values()[i] - expect.values()[i]).powi(2))
            .sum();
        let den: f64 = (m / 4..3 * m / 4).map(|i| expect.values()[i].powi(2)).sum();
        assert!((num / den).sqrt() < 0.02);
    }

    #[test]
    fn phi_vanishes_on_zero_data() {
        let g = Grid::new(20.0, 256).unwrap();
        let p = PhysicalParams::default();
        let opts = SolveOptions::default();
        let zero = SampledFn::zeros(g);
        let f = gaussian(g, 0.5, 1.0, 0.0);
        // linear in h
        let app = phi_apply(&f, &zero, &p, &opts).unwrap();
        assert_eq!(app.value.norm_max(), 0.0);
        // flat steady state
        let app = phi_apply(&zero, &zero, &p, &opts).unwrap();
        assert_eq!(app.value.norm_max(), 0.0);
    }

    #[test]
    fn phi_at_flat_interface_matches_closed_form() {
        // Phi(0)[h] = b_mu (sigma H[h'''] - Theta H[h'])
        let g = Grid::new(20.0, 512).unwrap();
        let p = PhysicalParams::default();
        let opts = SolveOptions::default();
        let zero = SampledFn::zeros(g);
        let h = gaussian(g, 1.0, 1.0, 0.3);
        let got = phi_apply(&zero, &h, &p, &opts).unwrap().value;
        let expect = hilbert(&derivative(&h, 3).unwrap())
            .unwrap()
            .scale(p.surface_tension)
            .sub(&hilbert(&derivative(&h, 1).unwrap()).unwrap().scale(p.theta_coefficient()))
            .scale(p.b_mu());
        let m = g.len();
        let num: f64 = (m / 4..3 * m / 4)
            .map(|i| (got.values()[i] - expect.values()[i]).powi(2))
            .sum();
        let den: f64 = (m / 4..3 * m / 4).map(|i| expect.values()[i].powi(2)).sum();
        let rel = (num / den).sqrt();
        assert!(rel < 1e-6, "closed-form gap {rel}");
    }

    #[test]
    fn zero_state_is_steady() {
        let g = Grid::new(20.0, 128).unwrap();
        let p = PhysicalParams::default();
        let cfg = SteppingConfig {
            end_time: 0.05,
            ..SteppingConfig::default()
        };
        let opts = SimulationOptions::default();
        let sim = simulate(SampledFn::zeros(g), &p, &cfg, &opts).unwrap();
        assert_eq!(sim.termination, Termination::Completed);
        for frame in &sim.frames {
            assert!(frame.interface.norm_max() <= 1e-10);
        }
    }

    #[test]
    fn step_doubling_error_is_second_order() {
        let g = Grid::new(20.0, 256).unwrap();
        let p = PhysicalParams::default();
        let opts = SolveOptions::default();
        let f = windowed_mode(g, 0.01, 2.0);
        let sol = solve_theta_with(&f, &f, &p, &opts).unwrap();
        let phi_f = phi_from_theta(&f, &sol.theta, &opts).unwrap();

        let gap = |dt: f64| {
            let coarse = imex_euler(&f, &phi_f, &p, dt);
            let half = imex_euler(&f, &phi_f, &p, 0.5 * dt);
            let sol_h = solve_theta_with(&half, &half, &p, &opts).unwrap();
            let phi_h = phi_from_theta(&half, &sol_h.theta, &opts).unwrap();
            let fine = imex_euler(&half, &phi_h, &p, 0.5 * dt);
            fine.sub(&coarse).norm_l2()
        };
        let e1 = gap(2e-3);
        let e2 = gap(1e-3);
        assert!(e1 / e2 >= 3.5, "O(dt^2) ratio test: {} / {} = {}", e1, e2, e1 / e2);
    }

    #[test]
    fn small_mode_decays_at_the_linearized_rate() {
        let g = Grid::new(20.0, 256).unwrap();
        let p = PhysicalParams::default();
        let k = 2.0;
        let f0 = windowed_mode(g, 0.01, k);
        let cfg = SteppingConfig {
            dt_initial: 1e-3,
            dt_max: 5e-3,
            error_tolerance: 1e-8,
            end_time: 0.2,
            ..SteppingConfig::default()
        };
        let opts = SimulationOptions::default();
        let sim = simulate(f0.clone(), &p, &cfg, &opts).unwrap();
        assert_eq!(sim.termination, Termination::Completed);
        let last = sim.frames.last().unwrap();
        let a0 = f0.inner(&f0);
        let at = last.interface.inner(&f0);
        let measured = -(at / a0).ln() / last.time;
        let expected =
            p.surface_tension * p.b_mu() * k.powi(3) + p.theta_coefficient() * p.b_mu() * k;
        let rel = (measured - expected).abs() / expected;
        assert!(rel < 0.05, "decay rate {measured} vs {expected} (rel {rel})");
    }

    #[test]
    fn dt_underflow_is_reported() {
        let g = Grid::new(20.0, 128).unwrap();
        let p = PhysicalParams::default();
        let f = gaussian(g, 0.5, 1.0, 0.0);
        let cfg = SteppingConfig {
            dt_initial: 1e-3,
            dt_min: 1e-3,
            dt_max: 1e-3,
            error_tolerance: 1e-16,
            ..SteppingConfig::default()
        };
        let opts = SolveOptions::default();
        let state = SimState::new(f, &p, &cfg, &opts).unwrap();
        match step_imex(&state, &p, &cfg, &opts) {
            Err(Error::DtUnderflow { error_estimate, .. }) => {
                assert!(error_estimate > 1e-16);
            }
            other => panic!("expected dt underflow, got {other:?}"),
        }
    }
}
