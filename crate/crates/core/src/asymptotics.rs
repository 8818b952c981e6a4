//! Long-time form of the scattered state.
//!
//! After the collision the relative packet is `T φ₊ + R φ₋`, a transmitted
//! and a reflected copy of the freely moving Gaussian. Multiplied by the
//! center-of-mass packet, each term factorizes into one Gaussian per
//! particle because `α² = α1 α2`, which gives a two-term Schmidt form with
//! weights `|T|²` and `|R|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evolution::EvolutionFactors;
use crate::model::{ComplexField1D, DerivedParams, Grid1D, PhysParams};
use crate::propagators::plane_wave_coefficients;

/// Times (in units of `t_c`) from which the asymptotic form is considered valid.
pub const VALIDITY_ONSET: f64 = 2.0;

/// `norm · exp(-scale (x - center)² / 2w) · exp(i (k x + phase))` with complex `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub norm: Complex64,
    pub scale: f64,
    pub center: f64,
    pub width_sq: Complex64,
    pub wavenumber: f64,
    pub phase: f64,
}

impl GaussianPacket {
    pub fn eval(&self, x: f64) -> Complex64 {
        let s = x - self.center;
        self.norm
            * (-(self.scale * s * s) / (2.0 * self.width_sq)).exp()
            * Complex64::cis(self.wavenumber * x + self.phase)
    }

    /// The packet evaluated at `-x`, as a packet in `x`.
    pub fn mirrored(&self) -> Self {
        Self { center: -self.center, wavenumber: -self.wavenumber, ..*self }
    }

    pub fn sample(&self, grid: &Grid1D) -> ComplexField1D {
        ComplexField1D::from_fn(*grid, |x| self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticState {
    pub t: f64,
    pub transmission: Complex64,
    pub reflection: Complex64,
    pub phi_plus: GaussianPacket,
    pub phi_minus: GaussianPacket,
    pub phi1_plus: GaussianPacket,
    pub phi1_minus: GaussianPacket,
    pub phi2_plus: GaussianPacket,
    pub phi2_minus: GaussianPacket,
    /// Whether `t ≥ VALIDITY_ONSET · t_c`.
    pub valid: bool,
}

impl AsymptoticState {
    pub fn new(t: f64, p: &PhysParams, d: &DerivedParams) -> Self {
        let f = EvolutionFactors::new(t, p, d);
        let (transmission, reflection) = plane_wave_coefficients(d.q, d.g);
        let shift = d.v * t - d.a;
        let phase = -d.q * d.v * t / 2.0;

        let phi_plus = GaussianPacket {
            norm: f.n_t * d.alpha.sqrt(),
            scale: d.alpha * d.alpha,
            center: shift,
            width_sq: f.sigma_t_sq,
            wavenumber: d.q,
            phase,
        };
        let phi1_plus = GaussianPacket {
            norm: f.n_t * d.alpha1.powf(0.25),
            scale: d.alpha1,
            center: d.alpha2 * shift,
            width_sq: f.sigma_t_sq,
            wavenumber: d.q,
            phase,
        };
        let phi2_plus = GaussianPacket {
            norm: f.n_t * d.alpha2.powf(0.25),
            scale: d.alpha2,
            center: -d.alpha1 * shift,
            width_sq: f.sigma_t_sq,
            wavenumber: -d.q,
            phase: 0.0,
        };
        Self {
            t,
            transmission,
            reflection,
            phi_plus,
            phi_minus: phi_plus.mirrored(),
            phi1_plus,
            phi1_minus: phi1_plus.mirrored(),
            phi2_plus,
            phi2_minus: phi2_plus.mirrored(),
            valid: t >= VALIDITY_ONSET * d.t_c,
        }
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.transmission.norm_sqr(), self.reflection.norm_sqr())
    }

    pub fn relative(&self, x: f64) -> Complex64 {
        self.transmission * self.phi_plus.eval(x) + self.reflection * self.phi_minus.eval(x)
    }

    /// `T Φ1(x1) Φ2(x2) + R Φ1(-x1) Φ2(-x2)`.
    pub fn separated(&self, x1: f64, x2: f64) -> Complex64 {
        self.transmission * self.phi1_plus.eval(x1) * self.phi2_plus.eval(x2)
            + self.reflection * self.phi1_minus.eval(x1) * self.phi2_minus.eval(x2)
    }
}

/// `T(q) φ₊(x, t) + R(q) φ₋(x, t)`.
pub fn approx_relative(x: f64, t: f64, d: &DerivedParams, p: &PhysParams) -> Complex64 {
    AsymptoticState::new(t, p, d).relative(x)
}

/// `Φ_c(α1 x1 + α2 x2, t) · Φ̃_r(x1 - x2, t)`.
pub fn asymptotic_two_particle(x1: f64, x2: f64, t: f64, d: &DerivedParams, p: &PhysParams) -> Complex64 {
    let x0 = d.alpha1 * x1 + d.alpha2 * x2;
    crate::evolution::com_wavefunction(x0, t, p, d) * approx_relative(x1 - x2, t, d, p)
}

fn neg_x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Entropy of the two-term state with weights `q²/(q²+g²)` and `g²/(q²+g²)`.
pub fn asymptotic_entropy(q: f64, g: f64) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    let denom = q * q + g * g;
    neg_x_ln_x(q * q / denom) + neg_x_ln_x(g * g / denom)
}

/// Normalized particle-1 factors of the transmitted and reflected terms on
/// `grid`, with their weights `(|T|², |R|²)`.
pub fn asymptotic_schmidt_modes(
    t: f64,
    d: &DerivedParams,
    p: &PhysParams,
    grid: &Grid1D,
) -> (ComplexField1D, ComplexField1D, (f64, f64)) {
    let s = AsymptoticState::new(t, p, d);
    (
        s.phi1_plus.sample(grid).normalized(),
        s.phi1_minus.sample(grid).normalized(),
        s.weights(),
    )
}
