//! Explicit finite-difference reference solver on the fixed domain `[0, 1]`.
//!
//! The free boundary is never tracked explicitly. Each step applies
//! `u += dt (u_xx − 1)` with a mirror node at `x = 0` and then clamps `u ≥ 0`; the
//! positivity set of the clamped field is the oxygenated region, and `u = u_x = 0`
//! at its edge comes out of the obstacle formulation rather than a boundary condition.

use crate::error::{Error, Result};
use crate::integrator::{Event, EventKind};
use crate::model::{initial_profile, Method, ProblemSpec, State, Termination, Trajectory};

/// Values at or below this are treated as absorbed when locating the boundary.
pub const POSITIVE_EPS: f64 = 1e-12;

pub const DEFAULT_NX: usize = 1001;
pub const DEFAULT_DT_FACTOR: f64 = 0.4;
pub const MIN_NX: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub nx: usize,
    /// Time step as a fraction of `dx²`; explicit stability needs at most 0.5.
    pub dt_factor: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            nx: DEFAULT_NX,
            dt_factor: DEFAULT_DT_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleField {
    pub nx: usize,
    pub dx: f64,
    pub u: Vec<f64>,
    pub t: f64,
    pub s_est: f64,
    pub dt_grid: f64,
    // index of the last node with u > POSITIVE_EPS, if any
    last_positive: Option<usize>,
}

impl OracleField {
    /// Grid samples of `(1 − x)² / 2` at `t = 0`.
    pub fn initial(opts: &OracleOptions) -> Result<Self> {
        if opts.nx < MIN_NX {
            return Err(Error::InvalidParameter(format!(
                "oracle needs nx >= {MIN_NX}, got {}",
                opts.nx
            )));
        }
        let dx = 1.0 / (opts.nx - 1) as f64;
        let dt_grid = opts.dt_factor * dx * dx;
        check_stability(dt_grid, dx)?;
        let u = (0..opts.nx)
            .map(|i| initial_profile((i as f64 * dx).min(1.0)))
            .collect::<Result<Vec<_>>>()?;
        let mut field = Self {
            nx: opts.nx,
            dx,
            u,
            t: 0.0,
            s_est: 0.0,
            dt_grid,
            last_positive: None,
        };
        field.last_positive = field.u.iter().rposition(|&v| v > POSITIVE_EPS);
        field.s_est = estimate_boundary(&field);
        Ok(field)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn surface(&self) -> f64 {
        self.u[0]
    }

    /// Trapezoid integral of u over [0, 1].
    pub fn mass(&self) -> f64 {
        let inner: f64 = self.u[1..self.nx - 1].iter().sum();
        self.dx * (inner + 0.5 * (self.u[0] + self.u[self.nx - 1]))
    }

    pub fn is_extinct(&self) -> bool {
        self.last_positive.is_none()
    }

    /// Steps with `dt_grid` until `t_target`, shortening the last step to land on it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target && !self.is_extinct() {
            let dt = self.dt_grid.min(t_target - self.t);
            self.step_by(dt)?;
            if t_target - self.t < 1e-15 {
                self.t = t_target;
            }
        }
        if self.is_extinct() && self.t < t_target {
            // absorbing state: nothing changes any more
            self.t = t_target;
        }
        Ok(())
    }

    fn step_by(&mut self, dt: f64) -> Result<()> {
        check_stability(dt, self.dx)?;
        let n = self.nx;
        let Some(last) = self.last_positive else {
            self.t += dt;
            return Ok(());
        };
        // Nodes beyond last + 1 see only zero neighbours and stay clamped at zero.
        let end = (last + 1).min(n - 2);
        let r = dt / (self.dx * self.dx);
        let mut left = self.u[1]; // mirror node u[-1] = u[1]
        let mut new_last = None;
        for i in 0..=end {
            let centre = self.u[i];
            let right = self.u[i + 1];
            let v = (centre + r * (left + right - 2.0 * centre) - dt).max(0.0);
            left = centre;
            self.u[i] = v;
            if v > POSITIVE_EPS {
                new_last = Some(i);
            }
        }
        self.u[n - 1] = 0.0;
        self.last_positive = new_last;
        self.t += dt;
        self.s_est = boundary_from(self, new_last);
        Ok(())
    }
}

fn check_stability(dt: f64, dx: f64) -> Result<()> {
    let limit = 0.5 * dx * dx;
    if dt > limit || !(dt > 0.0) {
        Err(Error::Unstable { dt, limit })
    } else {
        Ok(())
    }
}

/// One explicit step of length `dt_grid`.
pub fn oracle_step(field: &mut OracleField) -> Result<()> {
    field.step_by(field.dt_grid)
}

fn boundary_from(field: &OracleField, last: Option<usize>) -> f64 {
    match last {
        None => 0.0,
        Some(j) => (field.x(j) + (2.0 * field.u[j]).sqrt()).min(1.0),
    }
}

/// Free-boundary position from the last node with `u > ε`, refined with the local
/// quadratic `u ≈ (x − s)² / 2`: `s = x_j + sqrt(2 u_j)`. Zero for an absorbed field.
pub fn estimate_boundary(field: &OracleField) -> f64 {
    boundary_from(field, field.u.iter().rposition(|&v| v > POSITIVE_EPS))
}

/// Runs the oracle through `sample_times` (reported clock, origin `spec.t0`), recording
/// `(t, s_est, u(0, t))` at the start and at every sample time.
///
/// Stops early with [`Termination::Extinction`] once the field is absorbed everywhere.
pub fn oracle_solve(
    spec: &ProblemSpec,
    opts: &OracleOptions,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let mut field = OracleField::initial(opts)?;
    let t0 = spec.t0;
    let mut samples = vec![State::new(t0, field.s_est, field.surface())];
    let mut event = None;
    for &t in sample_times {
        if t < t0 || t <= samples.last().map_or(f64::NEG_INFINITY, |s| s.t) {
            if t == t0 {
                continue;
            }
            return Err(Error::InvalidParameter(format!(
                "oracle sample times must increase from t0 = {t0}; got {t}"
            )));
        }
        field.advance_to(t - t0)?;
        let state = State::new(t, field.s_est, field.surface());
        samples.push(state);
        if field.is_extinct() {
            event = Some(Event {
                kind: EventKind::Extinction,
                t_event: t,
                state,
                bracket: field.dt_grid,
            });
            break;
        }
    }
    Ok(Trajectory {
        method: Method::Oracle,
        time_origin: t0,
        samples,
        termination: if event.is_some() {
            Termination::Extinction
        } else {
            Termination::HorizonReached
        },
        event,
        extinction_estimate: None,
    })
}

/// `n` evenly spaced times in `(start, end]`.
pub fn uniform_times(start: f64, end: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| start + (end - start) * k as f64 / n as f64)
        .collect()
}
