use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("degenerate free boundary: s = {0}")]
    DegenerateBoundary(f64),
    #[error("singular denominator ({0:e}) in the reduced system")]
    SingularDenominator(f64),
    #[error("extinction: sealed-face concentration a = {0:e} is below the guard")]
    Extinction(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("explicit step unstable: dt = {dt:e} exceeds 0.5*dx^2 = {limit:e}")]
    Unstable { dt: f64, limit: f64 },
    #[error("predicate does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("adaptive step underflow at t = {t}: h = {h:e} below dt_min")]
    StepUnderflow { t: f64, h: f64 },
    #[error("time {t} is outside the trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("{0} is not a polynomial moment method")]
    NotPolynomial(&'static str),
}
