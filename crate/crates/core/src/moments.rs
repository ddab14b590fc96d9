//! Reduced ODE systems of the integral methods and their moment identities.
//!
//! Both methods close the profile with the zeroth and first moments of `u_t = u_xx − 1`
//! over `[0, s]`:
//!
//! ```text
//! d/dt ∫ u dx   = −s
//! d/dt ∫ x u dx = a − s²/2
//! ```
//!
//! Substituting the polynomial profile turns these into a 2×2 linear system in
//! `(a', s')`, whose solution is the right-hand side used by the integrator.

use crate::error::{Error, Result};
use crate::model::{MomentMethod, Profile, State};
use crate::quadrature::simpson;

/// Guard on the denominators of the reduced systems.
pub const DENOMINATOR_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub ds_dt: f64,
    pub da_dt: f64,
}

/// Left-minus-right of the zeroth and first moment equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResidual {
    pub zeroth: f64,
    pub first: f64,
}

impl MomentResidual {
    pub fn max_abs(&self) -> f64 {
        self.zeroth.abs().max(self.first.abs())
    }
}

fn check_boundary(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateBoundary(s))
    }
}

/// Degree-6 system:
/// `s' = (3/s)(128a − 29s²)/(48a + 5s²)`,
/// `a' = (−84as² − 11s⁴ − 768a²) / (2s²(48a + 5s²))`.
pub fn rhs_deg6(a: f64, s: f64) -> Result<Derivative> {
    check_boundary(s)?;
    let s2 = s * s;
    let den = 48.0 * a + 5.0 * s2;
    if den.abs() < DENOMINATOR_GUARD || !den.is_finite() {
        return Err(Error::SingularDenominator(den));
    }
    Ok(Derivative {
        ds_dt: 3.0 / s * (128.0 * a - 29.0 * s2) / den,
        da_dt: (-84.0 * a * s2 - 11.0 * s2 * s2 - 768.0 * a * a) / (2.0 * s2 * den),
    })
}

/// Degree-3 system:
/// `s' = (4/3)(5a − s²)/(a s)`, `a' = −2/3 − 20a/(3s²)`.
pub fn rhs_deg3(a: f64, s: f64) -> Result<Derivative> {
    check_boundary(s)?;
    if a.abs() < DENOMINATOR_GUARD || !a.is_finite() {
        return Err(Error::Extinction(a));
    }
    let s2 = s * s;
    Ok(Derivative {
        ds_dt: 4.0 / 3.0 * (5.0 * a - s2) / (a * s),
        da_dt: -2.0 / 3.0 - 20.0 * a / (3.0 * s2),
    })
}

pub fn rhs(method: MomentMethod, a: f64, s: f64) -> Result<Derivative> {
    match method {
        MomentMethod::Deg3 => rhs_deg3(a, s),
        MomentMethod::Deg6 => rhs_deg6(a, s),
    }
}

/// Signed slack of the sign constraint: `128a − 29s²` (Deg6) or `5a − s²` (Deg3).
/// Non-positive slack means the boundary does not advance.
pub fn check_constraint(method: MomentMethod, a: f64, s: f64) -> f64 {
    match method {
        MomentMethod::Deg3 => 5.0 * a - s * s,
        MomentMethod::Deg6 => 128.0 * a - 29.0 * s * s,
    }
}

/// Residuals of the moment equations in the integer-coefficient form:
///
/// - Deg6: `16(a's + as') + s²s' + 35s` and `6(a's² + 2ass') + s³s' − 48(a − s²/2)`
/// - Deg3: `a's + as' + 2s` and `3(a's² + 2ass') − 20(a − s²/2)`
pub fn moment_residual(
    method: MomentMethod,
    state: &State,
    derivative: &Derivative,
) -> Result<MomentResidual> {
    let State { s, a, .. } = *state;
    check_boundary(s)?;
    let Derivative { ds_dt, da_dt } = *derivative;
    let zeroth_lhs = da_dt * s + a * ds_dt;
    let first_lhs = da_dt * s * s + 2.0 * a * s * ds_dt;
    let first_rhs = a - s * s / 2.0;
    Ok(match method {
        MomentMethod::Deg6 => MomentResidual {
            zeroth: 16.0 * zeroth_lhs + s * s * ds_dt + 35.0 * s,
            first: 6.0 * first_lhs + s * s * s * ds_dt - 48.0 * first_rhs,
        },
        MomentMethod::Deg3 => MomentResidual {
            zeroth: zeroth_lhs + 2.0 * s,
            first: 3.0 * first_lhs - 20.0 * first_rhs,
        },
    })
}

/// Factors relating the integer-coefficient residuals of [`moment_residual`] to the raw
/// moment residuals of [`quadrature_residual`].
pub fn residual_scales(method: MomentMethod) -> (f64, f64) {
    match method {
        MomentMethod::Deg6 => (35.0, 48.0),
        MomentMethod::Deg3 => (2.0, 20.0),
    }
}

/// Raw residuals of `∫ u_t dx = ∫ (u_xx − 1) dx` and `∫ x u_t dx = ∫ x (u_xx − 1) dx`,
/// with `u_t = a' ∂u/∂a + s' ∂u/∂s` and all integrals by composite Simpson.
///
/// Uses only the profile and its derivatives, not the closed-form moment equations.
pub fn quadrature_residual(
    method: MomentMethod,
    state: &State,
    derivative: &Derivative,
    panels: usize,
) -> Result<MomentResidual> {
    let profile = Profile::new(method, state.a, state.s)?;
    let Derivative { ds_dt, da_dt } = *derivative;
    let u_t = |x: f64| da_dt * profile.d_da(x) + ds_dt * profile.d_ds(x);
    let source = |x: f64| profile.dxx(x) - 1.0;
    let s = state.s;
    let zeroth = simpson(|x| u_t(x) - source(x), 0.0, s, panels);
    let first = simpson(|x| x * (u_t(x) - source(x)), 0.0, s, panels);
    Ok(MomentResidual { zeroth, first })
}

/// Total oxygen `∫₀ˢ u dx`: `s(48a + s²)/105` (Deg6) or `as/2` (Deg3).
pub fn oxygen_mass(method: MomentMethod, a: f64, s: f64) -> Result<f64> {
    check_boundary(s)?;
    Ok(match method {
        MomentMethod::Deg6 => s * (48.0 * a + s * s) / 105.0,
        MomentMethod::Deg3 => a * s / 2.0,
    })
}

/// First moment `∫₀ˢ x u dx`: `s²(24a + s²)/192` (Deg6) or `3as²/20` (Deg3).
pub fn first_moment(method: MomentMethod, a: f64, s: f64) -> Result<f64> {
    check_boundary(s)?;
    let s2 = s * s;
    Ok(match method {
        MomentMethod::Deg6 => s2 * (24.0 * a + s2) / 192.0,
        MomentMethod::Deg3 => 3.0 * a * s2 / 20.0,
    })
}

/// Time derivative of [`oxygen_mass`] by the chain rule.
pub fn mass_rate(method: MomentMethod, state: &State, derivative: &Derivative) -> Result<f64> {
    let State { s, a, .. } = *state;
    check_boundary(s)?;
    let Derivative { ds_dt, da_dt } = *derivative;
    Ok(match method {
        MomentMethod::Deg6 => (48.0 * (da_dt * s + a * ds_dt) + 3.0 * s * s * ds_dt) / 105.0,
        MomentMethod::Deg3 => (da_dt * s + a * ds_dt) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_A0;
    use proptest::prelude::*;

    const METHODS: [MomentMethod; 2] = [MomentMethod::Deg3, MomentMethod::Deg6];

    #[test]
    fn deg6_at_constraint_boundary() {
        let d = rhs_deg6(DEFAULT_A0, 1.0).unwrap();
        assert_eq!(d.ds_dt, 0.0);
        assert_eq!(d.da_dt, -35.0 / 16.0);
    }

    #[test]
    fn deg6_receding() {
        let d = rhs_deg6(0.1, 1.0).unwrap();
        let expected = 3.0 * (12.8 - 29.0) / 9.8;
        assert!((d.ds_dt - expected).abs() < 1e-12);
        assert!((d.ds_dt + 4.959_183_673_469_388).abs() < 1e-12);
    }

    #[test]
    fn deg3_examples() {
        let d = rhs_deg3(0.2, 1.0).unwrap();
        assert!(d.ds_dt.abs() < 1e-15);
        assert!((d.da_dt + 2.0).abs() < 1e-15);
        let d = rhs_deg3(0.1, 1.0).unwrap();
        assert!((d.ds_dt + 20.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        assert_eq!(rhs_deg6(0.1, 0.0), Err(Error::DegenerateBoundary(0.0)));
        assert_eq!(rhs_deg3(0.1, -0.5), Err(Error::DegenerateBoundary(-0.5)));
        assert!(matches!(rhs_deg3(0.0, 0.5), Err(Error::Extinction(_))));
        // 48a + 5s² = 0 only for negative a
        let s: f64 = 0.3;
        assert!(matches!(
            rhs_deg6(-5.0 * s * s / 48.0, s),
            Err(Error::SingularDenominator(_))
        ));
    }

    #[test]
    fn constraint_examples() {
        assert_eq!(check_constraint(MomentMethod::Deg6, DEFAULT_A0, 1.0), 0.0);
        assert_eq!(
            check_constraint(MomentMethod::Deg3, 0.2265625, 1.0),
            0.1328125
        );
        assert!((check_constraint(MomentMethod::Deg3, 0.1, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn residual_examples() {
        let st = State::new(0.0, 1.0, DEFAULT_A0);
        let d = rhs_deg6(st.a, st.s).unwrap();
        let r = moment_residual(MomentMethod::Deg6, &st, &d).unwrap();
        assert!(r.max_abs() < 1e-12);

        let st = State::new(0.0, 0.9, 0.15);
        let d = rhs_deg3(st.a, st.s).unwrap();
        assert!(
            moment_residual(MomentMethod::Deg3, &st, &d)
                .unwrap()
                .max_abs()
                < 1e-12
        );

        let st = State::new(0.0, 1.0, 0.2);
        let zero = Derivative {
            ds_dt: 0.0,
            da_dt: 0.0,
        };
        let r = moment_residual(MomentMethod::Deg6, &st, &zero).unwrap();
        assert_eq!(r.zeroth, 35.0);
        assert!(moment_residual(MomentMethod::Deg6, &State::new(0.0, 0.0, 0.2), &zero).is_err());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(oxygen_mass(MomentMethod::Deg3, 0.2, 1.0).unwrap(), 0.1);
        let m = oxygen_mass(MomentMethod::Deg6, DEFAULT_A0, 1.0).unwrap();
        assert!((m - 95.0 / 8.0 / 105.0).abs() < 1e-16);
        assert_eq!(oxygen_mass(MomentMethod::Deg3, 0.0, 0.7).unwrap(), 0.0);
        // the degree-6 profile keeps its s²/8 part when a = 0
        let s: f64 = 0.7;
        assert!(
            (oxygen_mass(MomentMethod::Deg6, 0.0, s).unwrap() - s.powi(3) / 105.0).abs() < 1e-17
        );
        for method in METHODS {
            assert!(oxygen_mass(method, 0.1, 0.0).is_err());
        }
    }

    #[test]
    fn quadrature_matches_closed_form_for_arbitrary_rates() {
        // The closed forms must agree with the raw integrals for any (a', s'), not just the
        // one produced by the matching right-hand side.
        let st = State::new(0.0, 0.73, 0.11);
        let d = Derivative {
            ds_dt: -1.7,
            da_dt: 0.4,
        };
        for method in METHODS {
            let closed = moment_residual(method, &st, &d).unwrap();
            let quad = quadrature_residual(method, &st, &d, 2048).unwrap();
            let (k0, k1) = residual_scales(method);
            assert!(
                (closed.zeroth - k0 * quad.zeroth).abs() < 1e-12,
                "{method:?} {closed:?} {quad:?}"
            );
            assert!(
                (closed.first - k1 * quad.first).abs() < 1e-12,
                "{method:?} {closed:?} {quad:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn rhs_solves_moment_system(a in 0.01f64..0.3, s in 0.05f64..1.0) {
            for method in METHODS {
                let st = State::new(0.0, s, a);
                let d = rhs(method, a, s).unwrap();
                let r = moment_residual(method, &st, &d).unwrap();
                // residual scale grows like 1/s through the rates
                prop_assert!(r.max_abs() < 1e-10, "{:?} {:?}", method, r);
                let law = mass_rate(method, &st, &d).unwrap() + s;
                prop_assert!(law.abs() < 1e-10);
            }
        }

        #[test]
        fn receding_under_constraint(a in 1e-6f64..0.3, s in 0.01f64..1.0) {
            for method in METHODS {
                if check_constraint(method, a, s) <= 0.0 {
                    prop_assert!(rhs(method, a, s).unwrap().ds_dt <= 0.0);
                }
            }
        }

        #[test]
        fn first_moment_matches_quadrature(a in 0.0f64..0.3, s in 0.05f64..1.0) {
            for method in METHODS {
                let p = Profile::new(method, a, s).unwrap();
                let q = simpson(|x| x * p.value(x), 0.0, s, 2048);
                prop_assert!((first_moment(method, a, s).unwrap() - q).abs() < 1e-12);
            }
        }
    }
}
