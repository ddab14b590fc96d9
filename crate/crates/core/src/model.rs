//! Problem data, polynomial concentration profiles and the steady state.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrator::Event;

/// Sealed-face concentration at which both constraints are tight for s = 1 in the
/// degree-6 method: 128a − 29s² = 0.
pub const DEFAULT_A0: f64 = 29.0 / 128.0;

/// Offset between the internal clock of the moment methods and the table clock.
pub const DEFAULT_T0: f64 = 0.05;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_END: f64 = 0.25;
pub const DEFAULT_S_MIN: f64 = 1e-3;
pub const DEFAULT_A_MIN: f64 = 0.0;

/// Solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Deg3,
    Deg6,
    Oracle,
}

/// The two polynomial (integral) methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    Deg3,
    Deg6,
}

impl Method {
    pub fn moment(self) -> Option<MomentMethod> {
        match self {
            Method::Deg3 => Some(MomentMethod::Deg3),
            Method::Deg6 => Some(MomentMethod::Deg6),
            Method::Oracle => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Deg3 => "deg3",
            Method::Deg6 => "deg6",
            Method::Oracle => "oracle",
        }
    }
}

impl From<MomentMethod> for Method {
    fn from(m: MomentMethod) -> Self {
        match m {
            MomentMethod::Deg3 => Method::Deg3,
            MomentMethod::Deg6 => Method::Deg6,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deg3" => Ok(Method::Deg3),
            "deg6" => Ok(Method::Deg6),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

impl MomentMethod {
    /// Sealed-face concentration that puts the sign constraint exactly at zero for boundary `s`.
    pub fn constraint_boundary_a(self, s: f64) -> f64 {
        match self {
            MomentMethod::Deg3 => s * s / 5.0,
            MomentMethod::Deg6 => 29.0 * s * s / 128.0,
        }
    }
}

/// Method selection, initial values, time origin and integration controls.
///
/// `t0` shifts every reported time; `t_end` is measured on the reported clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub method: Method,
    pub a0: f64,
    pub s0: f64,
    pub t0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub s_min: f64,
    pub a_min: f64,
}

impl ProblemSpec {
    /// Defaults: a0 = 29/128, s0 = 1, RK4 step 1e-4, s_min = 1e-3, a_min = 0.
    /// Moment methods report on a clock shifted by [`DEFAULT_T0`]; the oracle runs on
    /// physical time since sealing.
    pub fn new(method: Method) -> Self {
        let t0 = match method {
            Method::Oracle => 0.0,
            _ => DEFAULT_T0,
        };
        Self {
            method,
            a0: DEFAULT_A0,
            s0: 1.0,
            t0,
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            s_min: DEFAULT_S_MIN,
            a_min: DEFAULT_A_MIN,
        }
    }

    /// Replaces `a0` with the value on the method's constraint boundary (0.2 for Deg3).
    pub fn with_constraint_start(mut self) -> Self {
        if let Some(m) = self.method.moment() {
            self.a0 = m.constraint_boundary_a(self.s0);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.s0 != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "s0 must be exactly 1, got {}",
                self.s0
            )));
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a0 must be positive, got {}",
                self.a0
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.s_min > 0.0 && self.s_min < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "s_min must lie in (0, 1), got {}",
                self.s_min
            )));
        }
        if !(self.a_min >= 0.0 && self.a_min < self.a0) {
            return Err(Error::InvalidParameter(format!(
                "a_min must lie in [0, a0), got {}",
                self.a_min
            )));
        }
        if !self.t0.is_finite() || !(self.t_end > self.t0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end ({}) must exceed t0 ({})",
                self.t_end, self.t0
            )));
        }
        Ok(())
    }

    /// Integration horizon on the internal clock.
    pub fn duration(&self) -> f64 {
        self.t_end - self.t0
    }
}

/// Reduced-order state: time, free-boundary position and sealed-face concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub t: f64,
    pub s: f64,
    pub a: f64,
}

impl State {
    pub fn new(t: f64, s: f64, a: f64) -> Self {
        Self { t, s, a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    HorizonReached,
    Extinction,
    ConstraintViolated,
    ConcentrationFloor,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::HorizonReached => "horizon_reached",
            Termination::Extinction => "extinction",
            Termination::ConstraintViolated => "constraint_violated",
            Termination::ConcentrationFloor => "concentration_floor",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Time series of states on the reported clock, plus why it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: Method,
    /// Offset added to the internal clock to obtain `samples[i].t`.
    pub time_origin: f64,
    pub samples: Vec<State>,
    pub termination: Termination,
    pub event: Option<Event>,
    /// Quadratic extrapolation of s(t) → 0, only set on extinction. An estimate.
    pub extinction_estimate: Option<f64>,
}

impl Trajectory {
    pub fn first(&self) -> Option<&State> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&State> {
        self.samples.last()
    }

    pub fn t_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    /// Linear interpolation between neighbouring samples.
    pub fn state_at(&self, t: f64) -> Result<State> {
        let (start, end) = self.t_range().ok_or(Error::OutOfRange {
            t,
            start: f64::NAN,
            end: f64::NAN,
        })?;
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let hi = self.samples.partition_point(|st| st.t < t);
        if self.samples[hi].t == t || hi == 0 {
            return Ok(State {
                t,
                ..self.samples[hi]
            });
        }
        let (p, q) = (self.samples[hi - 1], self.samples[hi]);
        let w = (t - p.t) / (q.t - p.t);
        Ok(State {
            t,
            s: p.s + w * (q.s - p.s),
            a: p.a + w * (q.a - p.a),
        })
    }
}

/// Coefficients of a polynomial profile in powers of ξ = x/s.
///
/// Deg6: `u = a + b ξ² + c ξ⁴ + d ξ⁶`. Deg3: `u = a + b ξ² + c ξ³` with `d = 0`.
/// In both cases `a + b + c + d = 0`, i.e. `u(s) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ProfileCoefficients {
    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }
}

/// Concentration before the boundary starts to recede: `(1 − x)² / 2`.
pub fn initial_profile(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, 1]",
        });
    }
    let r = 1.0 - x;
    Ok(0.5 * r * r)
}

fn check_boundary(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateBoundary(s))
    }
}

/// Degree-6 coefficients fixed by u(s) = u_x(s) = u_x(0) = 0 and u_xx(s) = 1.
pub fn coeffs_deg6(a: f64, s: f64) -> Result<ProfileCoefficients> {
    check_boundary(s)?;
    let q = s * s / 8.0;
    Ok(ProfileCoefficients {
        a,
        b: -3.0 * a + q,
        c: 3.0 * a - 2.0 * q,
        d: -a + q,
    })
}

/// Degree-3 coefficients fixed by u(s) = u_x(s) = u_x(0) = 0.
pub fn coeffs_deg3(a: f64, s: f64) -> Result<ProfileCoefficients> {
    check_boundary(s)?;
    Ok(ProfileCoefficients {
        a,
        b: -3.0 * a,
        c: 2.0 * a,
        d: 0.0,
    })
}

/// A concrete polynomial profile at one state, with its spatial and parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub method: MomentMethod,
    pub coeffs: ProfileCoefficients,
    pub s: f64,
}

impl Profile {
    pub fn new(method: MomentMethod, a: f64, s: f64) -> Result<Self> {
        let coeffs = match method {
            MomentMethod::Deg3 => coeffs_deg3(a, s)?,
            MomentMethod::Deg6 => coeffs_deg6(a, s)?,
        };
        Ok(Self { method, coeffs, s })
    }

    /// u(x); no domain check.
    pub fn value(&self, x: f64) -> f64 {
        let ProfileCoefficients { a, b, c, d } = self.coeffs;
        let xi = x / self.s;
        let z = xi * xi;
        match self.method {
            MomentMethod::Deg6 => a + z * (b + z * (c + z * d)),
            MomentMethod::Deg3 => a + z * (b + xi * c),
        }
    }

    /// du/dξ.
    fn d_xi(&self, xi: f64) -> f64 {
        let ProfileCoefficients { b, c, d, .. } = self.coeffs;
        let z = xi * xi;
        match self.method {
            MomentMethod::Deg6 => xi * (2.0 * b + z * (4.0 * c + z * 6.0 * d)),
            MomentMethod::Deg3 => xi * (2.0 * b + 3.0 * c * xi),
        }
    }

    pub fn dx(&self, x: f64) -> f64 {
        self.d_xi(x / self.s) / self.s
    }

    pub fn dxx(&self, x: f64) -> f64 {
        let ProfileCoefficients { b, c, d, .. } = self.coeffs;
        let xi = x / self.s;
        let z = xi * xi;
        let d2 = match self.method {
            MomentMethod::Deg6 => 2.0 * b + z * (12.0 * c + z * 30.0 * d),
            MomentMethod::Deg3 => 2.0 * b + 6.0 * c * xi,
        };
        d2 / (self.s * self.s)
    }

    /// ∂u/∂a at fixed x.
    pub fn d_da(&self, x: f64) -> f64 {
        let xi = x / self.s;
        let z = xi * xi;
        match self.method {
            MomentMethod::Deg6 => {
                let w = 1.0 - z;
                w * w * w
            }
            MomentMethod::Deg3 => 1.0 + z * (-3.0 + 2.0 * xi),
        }
    }

    /// ∂u/∂s at fixed x.
    pub fn d_ds(&self, x: f64) -> f64 {
        let xi = x / self.s;
        let z = xi * xi;
        let through_xi = -xi / self.s * self.d_xi(xi);
        match self.method {
            // b, c, d carry s²/8, −s²/4, s²/8.
            MomentMethod::Deg6 => through_xi + self.s / 4.0 * z * (1.0 + z * (-2.0 + z)),
            MomentMethod::Deg3 => through_xi,
        }
    }
}

/// Concentration of a moment-method profile at `x ∈ [0, s]`.
pub fn eval_profile(method: MomentMethod, a: f64, s: f64, x: f64) -> Result<f64> {
    let profile = Profile::new(method, a, s)?;
    if !(0.0..=s).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, s]",
        });
    }
    Ok(profile.value(x))
}

/// Penetration depth of the pre-sealing steady state `C'' = m`, `C(0) = C0`,
/// `C(X0) = C'(X0) = 0`, whose solution is `C = m (X − X0)² / 2`.
pub fn steady_state_boundary(c0: f64, m: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain {
            name: "m",
            value: m,
            domain: "(0, inf)",
        });
    }
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(Error::Domain {
            name: "C0",
            value: c0,
            domain: "[0, inf)",
        });
    }
    Ok((2.0 * c0 / m).sqrt())
}

/// Steady-state concentration at depth `x`; zero beyond the penetration depth.
pub fn steady_state_profile(c0: f64, m: f64, x: f64) -> Result<f64> {
    let x0 = steady_state_boundary(c0, m)?;
    if x >= x0 {
        return Ok(0.0);
    }
    let r = x - x0;
    Ok(0.5 * m * r * r)
}
