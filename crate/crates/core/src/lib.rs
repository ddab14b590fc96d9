//! Solvers for the sealed-surface oxygen diffusion problem with constant absorption.
//!
//! After the oxygen supply is cut off, the concentration `u(x, t)` obeys
//!
//! ```text
//! u_t = u_xx - 1,            0 < x < s(t)
//! u(s, t) = u_x(s, t) = 0,   u_x(0, t) = 0
//! u(x, 0) = (1 - x)^2 / 2,   s(0) = 1
//! ```
//!
//! in transformed (linear) coordinates. The crate provides:
//!
//! - [`model`]: problem data, polynomial concentration profiles and the steady state.
//! - [`moments`]: reduced ODE systems of the degree-3 and degree-6 integral methods,
//!   their sign constraints and moment-identity residuals.
//! - [`integrator`]: fixed-step RK4 and adaptive Dormand–Prince integration with event detection.
//! - [`oracle`]: an explicit finite-difference obstacle-problem solver used as ground truth.
//! - [`reference`]: the published comparison tables and trajectory-vs-table metrics.

pub mod error;
pub mod integrator;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod reference;

pub use error::{Error, Result};
pub use integrator::{integrate, integrate_batch, Event, EventKind, IntegratorOptions, Scheme};
pub use model::{Method, MomentMethod, ProblemSpec, State, Termination, Trajectory};
