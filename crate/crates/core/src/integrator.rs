//! Time integration of the reduced (s, a) systems with event detection.
//!
//! Events are located by bisection on the length of the step that first produced an
//! invalid state, re-taking a single step from the accepted start each time, so the
//! event state is always one the scheme itself can reach.

use std::thread;

use crate::error::{Error, Result};
use crate::model::{MomentMethod, ProblemSpec, State, Termination, Trajectory};
use crate::moments::{check_constraint, rhs};

/// Bracket width at which event refinement stops.
pub const EVENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Rk4Fixed {
        dt: f64,
    },
    /// Dormand–Prince 5(4) with a standard step-size controller.
    Rk45Adaptive {
        rtol: f64,
        atol: f64,
        dt_min: f64,
        dt_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub scheme: Scheme,
    /// Horizon on the internal clock (time since the start of the run).
    pub t_end: f64,
    pub s_min: f64,
    pub a_min: f64,
    /// Keep every `stride`-th accepted step; the first and last states are always kept.
    pub stride: usize,
}

impl IntegratorOptions {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        Self {
            scheme: Scheme::Rk4Fixed { dt: spec.dt },
            t_end: spec.duration(),
            s_min: spec.s_min,
            a_min: spec.a_min,
            stride: 1,
        }
    }

    pub fn adaptive(mut self, rtol: f64, atol: f64, dt_min: f64, dt_max: f64) -> Self {
        self.scheme = Scheme::Rk45Adaptive {
            rtol,
            atol,
            dt_min,
            dt_max,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self.scheme {
            Scheme::Rk4Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return bad(format!("dt must be positive, got {dt}"))
            }
            Scheme::Rk45Adaptive {
                rtol,
                atol,
                dt_min,
                dt_max,
            } => {
                if !(rtol > 0.0 && atol > 0.0) {
                    return bad(format!(
                        "rtol and atol must be positive, got {rtol}, {atol}"
                    ));
                }
                if !(dt_min > 0.0 && dt_min <= dt_max) {
                    return bad(format!("need 0 < dt_min <= dt_max, got {dt_min}, {dt_max}"));
                }
            }
            _ => {}
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.t_end));
        }
        if !(self.s_min > 0.0) {
            return bad(format!("s_min must be positive, got {}", self.s_min));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Extinction,
    ConstraintViolated,
    ConcentrationFloor,
}

impl From<EventKind> for Termination {
    fn from(kind: EventKind) -> Self {
        match kind {
            EventKind::Extinction => Termination::Extinction,
            EventKind::ConstraintViolated => Termination::ConstraintViolated,
            EventKind::ConcentrationFloor => Termination::ConcentrationFloor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    /// Reported-clock time of the last valid state before the crossing.
    pub t_event: f64,
    pub state: State,
    /// Width of the final bisection bracket.
    pub bracket: f64,
}

/// Bisects `[lo, hi]` until narrower than [`EVENT_TOLERANCE`].
///
/// A value counts as "non-negative" when `v >= 0`; NaN counts as negative. The
/// endpoints must fall on different sides. Returns the final bracket, with the
/// returned `lo` on the same side as the input `lo`.
pub fn refine_event<F>(lo: f64, hi: f64, mut predicate: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let side = |v: f64| v >= 0.0;
    let lo_side = side(predicate(lo));
    if lo_side == side(predicate(hi)) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    while (hi - lo).abs() >= EVENT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if side(predicate(mid)) == lo_side {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

type Vec2 = [f64; 2];

fn axpy(y: &Vec2, h: f64, k: &Vec2) -> Vec2 {
    [y[0] + h * k[0], y[1] + h * k[1]]
}

/// Right-hand side over the packed state `[s, a]`.
fn field(method: MomentMethod, y: &Vec2) -> Result<Vec2> {
    let d = rhs(method, y[1], y[0])?;
    if d.ds_dt.is_finite() && d.da_dt.is_finite() {
        Ok([d.ds_dt, d.da_dt])
    } else {
        Err(Error::SingularDenominator(f64::NAN))
    }
}

fn rk4_step(method: MomentMethod, y: &Vec2, h: f64) -> Result<Vec2> {
    let k1 = field(method, y)?;
    let k2 = field(method, &axpy(y, 0.5 * h, &k1))?;
    let k3 = field(method, &axpy(y, 0.5 * h, &k2))?;
    let k4 = field(method, &axpy(y, h, &k3))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution and the embedded error estimate.
fn dp_step(method: MomentMethod, y: &Vec2, h: f64) -> Result<(Vec2, Vec2)> {
    debug_assert_eq!(DP_C[0], 0.0);
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * DP_A[i][j] * kj[0];
            yi[1] += h * DP_A[i][j] * kj[1];
        }
        k[i] = field(method, &yi)?;
    }
    let mut high = *y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for c in 0..2 {
            high[c] += h * DP_B5[i] * k[i][c];
            err[c] += h * (DP_B5[i] - DP_B4[i]) * k[i][c];
        }
    }
    Ok((high, err))
}

/// Which event a candidate state triggers, if any. Extinction takes precedence.
struct Monitor {
    method: MomentMethod,
    s_min: f64,
    a_min: f64,
    constraint_armed: bool,
}

impl Monitor {
    fn margin(&self, y: &Vec2) -> f64 {
        let mut m = (y[0] - self.s_min).min(y[1] - self.a_min);
        if self.constraint_armed {
            m = m.min(-check_constraint(self.method, y[1], y[0]));
        }
        m
    }

    fn classify(&self, outcome: &Result<Vec2>) -> EventKind {
        match outcome {
            Ok(y) if y[0] < self.s_min || y[0].is_nan() => EventKind::Extinction,
            Ok(y) if y[1] < self.a_min || y[1].is_nan() => EventKind::ConcentrationFloor,
            Ok(_) => EventKind::ConstraintViolated,
            Err(Error::DegenerateBoundary(_)) => EventKind::Extinction,
            Err(_) => EventKind::ConcentrationFloor,
        }
    }
}

/// Integrates one of the moment methods from `(a0, s0 = 1)`.
///
/// Sample times are on the reported clock (`spec.t0` plus internal time). The run
/// stops at the horizon or at the first event; the constraint event is only armed
/// when the initial slack is non-positive.
pub fn integrate(spec: &ProblemSpec, opts: &IntegratorOptions) -> Result<Trajectory> {
    spec.validate()?;
    opts.validate()?;
    let method = spec
        .method
        .moment()
        .ok_or(Error::NotPolynomial(spec.method.name()))?;
    let monitor = Monitor {
        method,
        s_min: opts.s_min,
        a_min: opts.a_min,
        constraint_armed: check_constraint(method, spec.a0, spec.s0) <= 0.0,
    };
    let t0 = spec.t0;
    let mut y: Vec2 = [spec.s0, spec.a0];
    let mut tau = 0.0;
    let mut samples = vec![State::new(t0, y[0], y[1])];
    let mut accepted = 0usize;
    let mut event = None;

    let mut controller = match opts.scheme {
        Scheme::Rk4Fixed { dt } => Controller::Fixed { dt, steps: 0 },
        Scheme::Rk45Adaptive { dt_max, .. } => Controller::Adaptive {
            h: dt_max,
            last_h: 0.0,
        },
    };

    while tau < opts.t_end {
        let outcome = match controller {
            Controller::Fixed { .. } => {
                let h = controller.next_fixed(tau, opts.t_end);
                fixed_advance(method, &monitor, &y, h)?
            }
            Controller::Adaptive { .. } => {
                let (h, next) = controller.propose(method, &y, tau, opts)?;
                match next {
                    Ok(n) if monitor.margin(&n) >= 0.0 => StepOutcome::Reached(n),
                    _ => {
                        locate_event(&monitor, &y, h, |s, hh| dp_step(method, s, hh).map(|r| r.0))?
                    }
                }
            }
        };
        match outcome {
            StepOutcome::Reached(next) => {
                y = next;
                tau = controller.time_after(tau, opts.t_end);
                accepted += 1;
                if accepted.is_multiple_of(opts.stride) || tau >= opts.t_end {
                    samples.push(State::new(t0 + tau, y[0], y[1]));
                }
            }
            StepOutcome::Event {
                offset,
                state: at,
                kind,
                bracket,
            } => {
                let state = State::new(t0 + tau + offset, at[0], at[1]);
                if state.t > samples.last().map_or(f64::NEG_INFINITY, |st| st.t) {
                    samples.push(state);
                }
                event = Some(Event {
                    kind,
                    t_event: state.t,
                    state,
                    bracket,
                });
                break;
            }
        }
    }

    if let Some(last) = samples.last().copied() {
        if event.is_none() && (last.t - (t0 + tau)).abs() > 0.0 {
            samples.push(State::new(t0 + tau, y[0], y[1]));
        }
    }

    let termination = event.map_or(Termination::HorizonReached, |e| e.kind.into());
    let extinction_estimate = if termination == Termination::Extinction {
        extrapolate_extinction(&samples)
    } else {
        None
    };
    Ok(Trajectory {
        method: spec.method,
        time_origin: t0,
        samples,
        termination,
        event,
        extinction_estimate,
    })
}

/// Largest relative change of s accepted in one fixed step before it is split.
const SPLIT_FRACTION: f64 = 0.05;

enum StepOutcome {
    Reached(Vec2),
    Event {
        offset: f64,
        state: Vec2,
        kind: EventKind,
        bracket: f64,
    },
}

/// One fixed RK4 step of length `h`, split in halves where it is invalid or moves s by
/// more than [`SPLIT_FRACTION`]; near s → 0 the right-hand side blows up like 1/s and a
/// full step can jump across the singularity to a plausible-looking state.
fn fixed_advance(method: MomentMethod, monitor: &Monitor, y: &Vec2, h: f64) -> Result<StepOutcome> {
    let next = rk4_step(method, y, h);
    if let Ok(n) = &next {
        if monitor.margin(n) >= 0.0 && (n[0] - y[0]).abs() <= SPLIT_FRACTION * y[0] {
            return Ok(StepOutcome::Reached(*n));
        }
    }
    if h <= EVENT_TOLERANCE {
        return match next {
            Ok(n) if monitor.margin(&n) >= 0.0 => Ok(StepOutcome::Reached(n)),
            _ => locate_event(monitor, y, h, |s, hh| rk4_step(method, s, hh)),
        };
    }
    let half = 0.5 * h;
    match fixed_advance(method, monitor, y, half)? {
        StepOutcome::Reached(mid) => Ok(match fixed_advance(method, monitor, &mid, h - half)? {
            StepOutcome::Event {
                offset,
                state,
                kind,
                bracket,
            } => StepOutcome::Event {
                offset: half + offset,
                state,
                kind,
                bracket,
            },
            reached => reached,
        }),
        event => Ok(event),
    }
}

/// Bisects the step length in `[0, h]` for the last valid state reachable from `start`.
fn locate_event<S>(monitor: &Monitor, start: &Vec2, h: f64, stepper: S) -> Result<StepOutcome>
where
    S: Fn(&Vec2, f64) -> Result<Vec2>,
{
    let score = |hh: f64| -> f64 {
        if hh == 0.0 {
            return monitor.margin(start);
        }
        match stepper(start, hh) {
            Ok(n) => monitor.margin(&n),
            Err(_) => f64::NAN,
        }
    };
    let (h_lo, h_hi) = refine_event(0.0, h, score)?;
    let kind = monitor.classify(&stepper(start, h_hi));
    let state = if h_lo > 0.0 {
        stepper(start, h_lo)?
    } else {
        *start
    };
    Ok(StepOutcome::Event {
        offset: h_lo,
        state,
        kind,
        bracket: h_hi - h_lo,
    })
}

enum Controller {
    Fixed { dt: f64, steps: u64 },
    Adaptive { h: f64, last_h: f64 },
}

impl Controller {
    /// Proposes the next step. For the adaptive scheme, retries internally until the
    /// error estimate is acceptable or the step fails outright (left to event handling).
    fn propose(
        &mut self,
        method: MomentMethod,
        y: &Vec2,
        tau: f64,
        opts: &IntegratorOptions,
    ) -> Result<(f64, Result<Vec2>)> {
        match self {
            Controller::Fixed { .. } => unreachable!("fixed steps go through next_fixed"),
            Controller::Adaptive { h, last_h } => {
                let Scheme::Rk45Adaptive {
                    rtol,
                    atol,
                    dt_min,
                    dt_max,
                } = opts.scheme
                else {
                    unreachable!("adaptive controller with fixed scheme")
                };
                loop {
                    let step = h.min(opts.t_end - tau).min(dt_max);
                    match dp_step(method, y, step) {
                        Ok((next, err)) => {
                            let norm = err
                                .iter()
                                .zip(y.iter().zip(next.iter()))
                                .map(|(e, (p, q))| e.abs() / (atol + rtol * p.abs().max(q.abs())))
                                .fold(0.0, f64::max);
                            let factor = if norm == 0.0 {
                                5.0
                            } else {
                                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                            };
                            if norm <= 1.0 {
                                *h = (step * factor).min(dt_max);
                                *last_h = step;
                                return Ok((step, Ok(next)));
                            }
                            if step <= dt_min {
                                return Err(Error::StepUnderflow { t: tau, h: step });
                            }
                            *h = (step * factor).max(dt_min);
                        }
                        Err(e) => {
                            if step <= dt_min {
                                *last_h = step;
                                return Ok((step, Err(e)));
                            }
                            *h = (0.5 * step).max(dt_min);
                        }
                    }
                }
            }
        }
    }

    /// Length of the next fixed step; steps land on multiples of dt so times do not drift.
    fn next_fixed(&mut self, tau: f64, t_end: f64) -> f64 {
        let Controller::Fixed { dt, steps } = self else {
            unreachable!("next_fixed on adaptive controller")
        };
        *steps += 1;
        (*steps as f64 * *dt).min(t_end) - tau
    }

    fn time_after(&self, tau: f64, t_end: f64) -> f64 {
        match self {
            Controller::Fixed { dt, steps } => (*steps as f64 * dt).min(t_end),
            Controller::Adaptive { last_h: h, .. } => {
                let t = tau + h;
                if (t_end - t).abs() <= 1e-15 * t_end.max(1.0) {
                    t_end
                } else {
                    t
                }
            }
        }
    }
}

/// Fits t as a quadratic in s through the last three samples and evaluates at s = 0.
fn extrapolate_extinction(samples: &[State]) -> Option<f64> {
    let n = samples.len();
    if n < 3 {
        return None;
    }
    let p = &samples[n - 3..];
    let (s0, s1, s2) = (p[0].s, p[1].s, p[2].s);
    if s0 == s1 || s1 == s2 || s0 == s2 {
        return None;
    }
    let l0 = (0.0 - s1) * (0.0 - s2) / ((s0 - s1) * (s0 - s2));
    let l1 = (0.0 - s0) * (0.0 - s2) / ((s1 - s0) * (s1 - s2));
    let l2 = (0.0 - s0) * (0.0 - s1) / ((s2 - s0) * (s2 - s1));
    let t = l0 * p[0].t + l1 * p[1].t + l2 * p[2].t;
    t.is_finite().then_some(t)
}

/// Integrates several problems, optionally on scoped threads. Results keep input order.
pub fn integrate_batch(
    jobs: &[(ProblemSpec, IntegratorOptions)],
    parallel: bool,
) -> Vec<Result<Trajectory>> {
    if !parallel {
        return jobs.iter().map(|(s, o)| integrate(s, o)).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(s, o)| scope.spawn(move || integrate(s, o)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration thread panicked"))
            .collect()
    })
}
