//! Single-coordinate propagators: the free kernel, the exact kernel of the
//! contact interaction, and two large-time approximations of the latter.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DerivedParams;
use crate::specfun::erfcx;

fn check_time(t: f64, function: &'static str) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            reason: format!("propagation time must be positive, got {t}"),
        })
    }
}

/// `sqrt(mass / (2πiħt))` on the principal branch.
#[inline]
fn free_prefactor(t: f64, mass: f64, hbar: f64) -> Complex64 {
    Complex64::from_polar((mass / (2.0 * PI * hbar * t)).sqrt(), -FRAC_PI_4)
}

/// Free-particle kernel `sqrt(m/2πiħt) exp(i m (x-y)² / 2ħt)`.
pub fn free_propagator(x: f64, y: f64, t: f64, mass: f64, hbar: f64) -> Result<Complex64> {
    check_time(t, "free_propagator")?;
    let dx = x - y;
    Ok(free_prefactor(t, mass, hbar) * Complex64::cis(mass * dx * dx / (2.0 * hbar * t)))
}

/// Auxiliary quantities of the exact contact-interaction kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernelVars {
    pub g: f64,
    /// `iħt / 2μ`
    pub beta: Complex64,
    /// `(|x|+|y|)/sqrt(2iħt/μ) - g sqrt(iħt/2μ)`
    pub u: Complex64,
}

impl DeltaKernelVars {
    pub fn new(x: f64, y: f64, t: f64, d: &DerivedParams) -> Result<Self> {
        check_time(t, "delta_kernel_vars")?;
        Ok(Self::from_distance(x.abs() + y.abs(), t, d))
    }

    fn from_distance(dist: f64, t: f64, d: &DerivedParams) -> Self {
        let beta = Complex64::new(0.0, d.hbar * t / (2.0 * d.mu));
        let s = (d.hbar * t / (2.0 * d.mu)).sqrt();
        // sqrt(2iħt/μ) = 2s e^{iπ/4}, sqrt(iħt/2μ) = s e^{iπ/4}
        let u = Complex64::from_polar(dist / (2.0 * s), -FRAC_PI_4)
            - Complex64::from_polar(d.g * s, FRAC_PI_4);
        Self { g: d.g, beta, u }
    }
}

/// Interaction part `(g/2) exp(-(|x|+|y|)²/4β) erfcx(u)` of the exact kernel,
/// as a function of `dist = |x| + |y|`.
///
/// For `Re u < 0` (attractive side) the reflection formula is applied
/// analytically, which turns the growing `exp(u²)` into the bound-state factor
/// `exp(-g dist + g²β)` and keeps every intermediate finite.
pub fn interaction_kernel(dist: f64, t: f64, d: &DerivedParams) -> Result<Complex64> {
    check_time(t, "interaction_kernel")?;
    if d.g == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let vars = DeltaKernelVars::from_distance(dist, t, d);
    // exp(-dist²/4β) = exp(i μ dist² / 2ħt)
    let chirp = Complex64::cis(d.mu * dist * dist / (2.0 * d.hbar * t));
    let scaled = if vars.u.re >= 0.0 {
        chirp * erfcx(vars.u)?
    } else {
        let bound = Complex64::from_polar(
            (-d.g * dist).exp(),
            d.g * d.g * d.hbar * t / (2.0 * d.mu),
        );
        2.0 * bound - chirp * erfcx(-vars.u)?
    };
    Ok(0.5 * d.g * scaled)
}

/// Exact propagator of `P²/2μ - V0 δ(X)`, valid for both signs of `V0`.
pub fn delta_propagator(x: f64, y: f64, t: f64, d: &DerivedParams) -> Result<Complex64> {
    check_time(t, "delta_propagator")?;
    Ok(free_propagator(x, y, t, d.mu, d.hbar)? + interaction_kernel(x.abs() + y.abs(), t, d)?)
}

/// Kernel obtained by keeping the leading `1/(√π u)` term of `erfcx` with
/// `|y| -> -y`:
/// `(4πβ)^{-1/2} e^{-(x-y)²/4β} + g√β / (√π(|x| - y - 2gβ)) e^{-(|x|-y)²/4β}`.
pub fn approx_propagator_k1(x: f64, y: f64, t: f64, d: &DerivedParams) -> Result<Complex64> {
    let free = free_propagator(x, y, t, d.mu, d.hbar)?;
    if d.g == 0.0 {
        return Ok(free);
    }
    let beta = Complex64::new(0.0, d.hbar * t / (2.0 * d.mu));
    let dist = x.abs() - y;
    let denom = dist - 2.0 * d.g * beta;
    let scale = dist.abs().max((2.0 * d.g * beta).norm()).max(1.0);
    if denom.norm() <= 1e-12 * scale {
        return Err(Error::Singularity {
            x,
            y,
            t,
            denominator: denom.norm(),
        });
    }
    let sqrt_beta = beta.sqrt();
    let chirp = Complex64::cis(d.mu * dist * dist / (2.0 * d.hbar * t));
    Ok(free + d.g * sqrt_beta / (PI.sqrt() * denom) * chirp)
}

/// Time-dependent amplitudes of the two-wave kernel and their limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// `T(q) = q / (q - ig)`
    pub transmission: Complex64,
    /// `R(q) = ig / (q - ig)`
    pub reflection: Complex64,
}

/// Plane-wave transmission and reflection amplitudes `(T, R)` of the contact
/// potential at wavenumber `q`.
pub fn plane_wave_coefficients(q: f64, g: f64) -> (Complex64, Complex64) {
    let denom = Complex64::new(q, -g);
    (q / denom, Complex64::new(0.0, g) / denom)
}

/// `c₋ = ((|-a+vt| + a)/(iħtg/μ) - 1)^{-1}`, `c₊ = 1 + c₋`, with the prefactor
/// evaluated at the classical initial and final separations.
pub fn amplitudes(t: f64, d: &DerivedParams) -> Result<ScatteringAmplitudes> {
    check_time(t, "amplitudes")?;
    let (transmission, reflection) = plane_wave_coefficients(d.q, d.g);
    let c_minus = if d.g == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let travelled = (-d.a + d.v * t).abs() + d.a;
        let ratio = travelled / Complex64::new(0.0, d.hbar * t * d.g / d.mu);
        (ratio - 1.0).inv()
    };
    Ok(ScatteringAmplitudes {
        c_plus: 1.0 + c_minus,
        c_minus,
        transmission,
        reflection,
    })
}

/// Two-wave kernel `sqrt(μ/2πiħt) (c₊ e^{iμ(x-y)²/2ħt} + c₋ e^{iμ(x+y)²/2ħt})`.
pub fn approx_propagator_k2(x: f64, y: f64, t: f64, d: &DerivedParams) -> Result<Complex64> {
    let amp = amplitudes(t, d)?;
    let chirp = |s: f64| Complex64::cis(d.mu * s * s / (2.0 * d.hbar * t));
    let direct = chirp(x - y);
    let mirrored = chirp(x + y);
    Ok(free_prefactor(t, d.mu, d.hbar) * (amp.c_plus * direct + amp.c_minus * mirrored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive, PhysParams};
    use proptest::prelude::*;

    fn eq_masses() -> DerivedParams {
        derive(&PhysParams::default()).unwrap()
    }

    fn free_case() -> DerivedParams {
        derive(&PhysParams::default().with_v0(0.0)).unwrap()
    }

    #[test]
    fn free_kernel_at_coincident_points() {
        let k = free_propagator(0.3, 0.3, 1.0, 2.0, 1.0).unwrap();
        assert!((k.norm() - (1.0 / PI).sqrt()).abs() < 1e-15);
        assert!((k.arg() + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn free_kernel_rejects_nonpositive_time() {
        assert!(free_propagator(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(free_propagator(0.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(delta_propagator(0.0, 1.0, 0.0, &eq_masses()).is_err());
        assert!(approx_propagator_k2(0.0, 1.0, -2.0, &eq_masses()).is_err());
    }

    #[test]
    fn free_kernel_short_time_limit() {
        // ∫ K(x,y,ε) φ(y) dy -> φ(x) for a Gaussian φ
        let d = eq_masses();
        let eps = 1e-4 * d.t_c;
        let phi = |y: f64| (-(y - 0.2) * (y - 0.2) / (2.0 * 0.25)).exp();
        for &x in &[-0.4, 0.2, 0.9] {
            let half = 3.0;
            let kmax = 2.0 * half * d.mu / (d.hbar * eps);
            let h = (PI / 16.0) / kmax;
            let n = (2.0 * half / h).ceil() as usize;
            let h = 2.0 * half / n as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                let y = x - half + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 * h } else { h };
                acc += free_propagator(x, y, eps, d.mu, d.hbar).unwrap() * phi(y) * w;
            }
            assert!((acc - phi(x)).norm() < 1e-3, "x={x}: {acc} vs {}", phi(x));
        }
    }

    #[test]
    fn delta_kernel_vars_definitions() {
        let d = eq_masses();
        let (x, y, t) = (1.5, -4.0, 0.7);
        let v = DeltaKernelVars::new(x, y, t, &d).unwrap();
        let i = Complex64::i();
        let beta = i * d.hbar * t / (2.0 * d.mu);
        assert!((v.beta - beta).norm() < 1e-15);
        assert_eq!(v.beta.re, 0.0);
        let u = (x.abs() + y.abs()) / (2.0 * i * d.hbar * t / d.mu).sqrt()
            - d.g * (i * d.hbar * t / (2.0 * d.mu)).sqrt();
        assert!((v.u - u).norm() < 1e-14);
    }

    #[test]
    fn attractive_kernel_matches_direct_formula() {
        // direct evaluation where exp(u²) is harmless
        let d = derive(&PhysParams::default().with_v0(3.0)).unwrap();
        for &(x, y, t) in &[(0.1, -0.2, 0.5), (1.0, 0.5, 0.3), (-2.0, -1.0, 2.0)] {
            let v = DeltaKernelVars::new(x, y, t, &d).unwrap();
            let dist = x.abs() + y.abs();
            let direct = 0.5 * d.g * (-dist * dist / (4.0 * v.beta)).exp() * erfcx(v.u).unwrap();
            let got = interaction_kernel(dist, t, &d).unwrap();
            assert!((got - direct).norm() < 1e-12 * direct.norm(), "{got} vs {direct}");
        }
    }

    #[test]
    fn k1_agrees_with_exact_kernel_after_collision() {
        let d = eq_masses();
        let t = 2.0 * d.t_c;
        let exact = delta_propagator(d.a, -d.a, t, &d).unwrap();
        let approx = approx_propagator_k1(d.a, -d.a, t, &d).unwrap();
        assert!((exact - approx).norm() <= 0.05 * exact.norm());
    }

    #[test]
    fn k1_second_term_is_gaussian_in_distance() {
        // with a real-time kernel the envelope is |g√β/(√π(D - 2gβ))|, decaying like 1/D
        let d = eq_masses();
        let t = 1.0;
        let f = |x: f64| {
            (approx_propagator_k1(x, -1.0, t, &d).unwrap()
                - free_propagator(x, -1.0, t, d.mu, d.hbar).unwrap())
            .norm()
        };
        let beta = d.hbar * t / (2.0 * d.mu);
        for &x in &[1.0, 5.0, 20.0] {
            let dist: f64 = x + 1.0;
            let want = d.g.abs() * beta.sqrt()
                / (PI.sqrt() * (dist * dist + 4.0 * d.g * d.g * beta * beta).sqrt());
            assert!((f(x) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn k1_singular_denominator_is_an_error() {
        // the denominator only vanishes for g = 0, where the interaction term is dropped;
        // force a zero through a degenerate time scale instead
        let mut d = eq_masses();
        d.hbar = 1e-300;
        let err = approx_propagator_k1(0.0, 0.0, 1e-10, &d);
        assert!(matches!(err, Err(Error::Singularity { .. })), "{err:?}");
    }

    #[test]
    fn amplitude_examples() {
        let d = eq_masses();
        let a = amplitudes(1.3, &d).unwrap();
        assert!((a.c_plus - a.c_minus - 1.0).norm() < 1e-15);
        assert!((a.transmission.norm_sqr() - 0.8).abs() < 1e-15);
        assert!((a.reflection.norm_sqr() - 0.2).abs() < 1e-15);

        let (t, r) = plane_wave_coefficients(4.0, -4.0);
        assert!((t.norm_sqr() - 0.5).abs() < 1e-15 && (r.norm_sqr() - 0.5).abs() < 1e-15);

        let free = amplitudes(1.0, &free_case()).unwrap();
        assert_eq!(free.c_minus, Complex64::new(0.0, 0.0));
        assert_eq!(free.c_plus, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn amplitudes_approach_plane_wave_limits() {
        let d = eq_masses();
        let late = amplitudes(100.0 * d.t_c, &d).unwrap();
        assert!((late.c_plus.norm_sqr() - 0.8).abs() < 1e-2);
        assert!((late.c_plus - late.transmission).norm() < 1e-2);
        assert!((late.c_minus - late.reflection).norm() < 1e-2);

        let target = late.reflection.norm();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let t = d.t_c * (2.0 + k as f64 * 0.5);
            let gap = (amplitudes(t, &d).unwrap().c_minus.norm() - target).abs();
            assert!(gap <= prev + 1e-15, "not monotone at t={t}");
            prev = gap;
        }
    }

    #[test]
    fn k2_branches_match_exact_kernel_at_packet_centers() {
        // At the classical arguments only one exponential of the two-wave kernel is
        // stationary on each side of the origin: transmitted (x > 0) carries c₊ on the
        // direct wave, reflected (x < 0) adds c₋ on the mirrored wave to the free one.
        let d = eq_masses();
        let amp_of = |t: f64| amplitudes(t, &d).unwrap();
        for &tau in &[2.0, 3.0, 5.0] {
            let t = tau * d.t_c;
            let y = -d.a;
            let pref = free_prefactor(t, d.mu, d.hbar);
            let k = d.mu / (2.0 * d.hbar * t);
            let amp = amp_of(t);

            let x = -d.a + d.v * t;
            let exact = delta_propagator(x, y, t, &d).unwrap();
            let branch = pref * amp.c_plus * Complex64::cis(k * (x - y) * (x - y));
            assert!((exact - branch).norm() <= 0.05 * exact.norm(), "t={t}");

            let x = d.a - d.v * t;
            let exact = delta_propagator(x, y, t, &d).unwrap();
            let branch = pref
                * (Complex64::cis(k * (x - y) * (x - y))
                    + amp.c_minus * Complex64::cis(k * (x + y) * (x + y)));
            assert!((exact - branch).norm() <= 0.05 * exact.norm(), "t={t}");
        }
    }

    proptest! {
        #[test]
        fn delta_kernel_reduces_to_free_kernel_without_interaction(
            x in -30.0f64..30.0, y in -30.0f64..30.0, t in 0.01f64..10.0
        ) {
            let d = free_case();
            prop_assert_eq!(
                delta_propagator(x, y, t, &d).unwrap(),
                free_propagator(x, y, t, d.mu, d.hbar).unwrap()
            );
            prop_assert_eq!(
                approx_propagator_k1(x, y, t, &d).unwrap(),
                free_propagator(x, y, t, d.mu, d.hbar).unwrap()
            );
            let k2 = approx_propagator_k2(x, y, t, &d).unwrap();
            let k0 = free_propagator(x, y, t, d.mu, d.hbar).unwrap();
            prop_assert!((k2 - k0).norm() < 1e-12);
        }

        #[test]
        fn kernels_are_exchange_symmetric(
            x in -30.0f64..30.0, y in -30.0f64..30.0, t in 0.01f64..10.0, v0 in -8.0f64..8.0
        ) {
            let d = derive(&PhysParams::default().with_v0(v0)).unwrap();
            let a = delta_propagator(x, y, t, &d).unwrap();
            let b = delta_propagator(y, x, t, &d).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            let a = approx_propagator_k2(x, y, t, &d).unwrap();
            let b = approx_propagator_k2(y, x, t, &d).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            // K1 assumes y < 0; symmetric when both points lie in that regime
            let (xn, yn) = (-x.abs() - 0.1, -y.abs() - 0.1);
            let a = approx_propagator_k1(xn, yn, t, &d).unwrap();
            let b = approx_propagator_k1(yn, xn, t, &d).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn transmission_and_reflection_conserve_flux(q in 0.01f64..50.0, g in -50.0f64..50.0) {
            let (t, r) = plane_wave_coefficients(q, g);
            prop_assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-14);
            prop_assert!((t - r - 1.0).norm() < 1e-14);
        }
    }
}
