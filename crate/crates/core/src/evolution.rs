//! Time evolution of the initial product state.
//!
//! The center-of-mass packet spreads freely and is known in closed form. The
//! relative packet is propagated with the exact contact-interaction kernel
//! `K = K⁰_μ + K_int`: the `K⁰_μ` part acting on a Gaussian is again done in
//! closed form and only `∫ K_int(x, y, t) φ_r(y) dy` is integrated numerically,
//! with a trapezoid step that resolves the kernel's chirped phase.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    initial_relative, ComplexField1D, ComplexField2D, DerivedParams, Grid1D, PhysParams,
};
use crate::propagators::interaction_kernel;

/// Below this fraction of `t_c` the interaction term is dropped.
pub const INTERACTION_ONSET_FRACTION: f64 = 0.05;

/// Maximum tolerated deviation of `||Φ_r||` from 1.
pub const RELATIVE_NORM_TOLERANCE: f64 = 1e-2;

/// Complex width and normalization of the freely spreading Gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionFactors {
    /// `σ² + iħt/m`
    pub sigma_t_sq: Complex64,
    /// `π^{-1/4} (σ + iħt/(mσ))^{-1/2}`
    pub n_t: Complex64,
}

impl EvolutionFactors {
    pub fn new(t: f64, p: &PhysParams, d: &DerivedParams) -> Self {
        let s = p.sigma;
        let sigma_t_sq = Complex64::new(s * s, p.hbar * t / d.m);
        let n_t = PI.powf(-0.25) * Complex64::new(s, p.hbar * t / (d.m * s)).sqrt().inv();
        Self { sigma_t_sq, n_t }
    }
}

/// Spreading center-of-mass Gaussian `N_t exp(-x0² / 2σ_t²)`.
pub fn com_wavefunction(x0: f64, t: f64, p: &PhysParams, d: &DerivedParams) -> Complex64 {
    let f = EvolutionFactors::new(t, p, d);
    com_with_factors(x0, &f)
}

#[inline]
fn com_with_factors(x0: f64, f: &EvolutionFactors) -> Complex64 {
    f.n_t * (-x0 * x0 / (2.0 * f.sigma_t_sq)).exp()
}

/// Free evolution (reduced mass, no interaction) of the initial relative packet:
/// `√α N_t exp(-α²(x + a - vt)² / 2σ_t²) exp(iq(x - vt/2))`.
pub fn free_relative(x: f64, t: f64, p: &PhysParams, d: &DerivedParams) -> Complex64 {
    let f = EvolutionFactors::new(t, p, d);
    free_relative_with_factors(x, t, p, d, &f)
}

#[inline]
fn free_relative_with_factors(
    x: f64,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    f: &EvolutionFactors,
) -> Complex64 {
    let shift = d.alpha * (x + p.a - d.v * t);
    d.alpha.sqrt()
        * f.n_t
        * (-shift * shift / (2.0 * f.sigma_t_sq)).exp()
        * Complex64::cis(p.q * (x - 0.5 * d.v * t))
}

/// Discretization controls for the interaction integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Half-width `W` of the integration window around `y = -a`.
    pub support_halfwidth: f64,
    /// Largest kernel phase advance per step, in radians.
    pub phase_resolution: f64,
    /// Multiplier on the phase-resolved step (`< 1` refines).
    pub step_scale: f64,
}

impl QuadratureSpec {
    /// `W = 8σ/α`, `π/8` radians per step.
    pub fn for_params(p: &PhysParams, d: &DerivedParams) -> Self {
        Self {
            support_halfwidth: 8.0 * p.sigma / d.alpha,
            phase_resolution: PI / 8.0,
            step_scale: 1.0,
        }
    }

    pub fn with_step_scale(self, step_scale: f64) -> Self {
        Self { step_scale, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_halfwidth > 0.0 && self.support_halfwidth.is_finite()) {
            return Err(Error::Parameter {
                name: "support_halfwidth",
                reason: format!("must be positive, got {}", self.support_halfwidth),
            });
        }
        if !(self.phase_resolution > 0.0 && self.phase_resolution <= PI / 4.0) {
            return Err(Error::Parameter {
                name: "phase_resolution",
                reason: format!("must lie in (0, π/4], got {}", self.phase_resolution),
            });
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::Parameter {
                name: "step_scale",
                reason: format!("must be positive, got {}", self.step_scale),
            });
        }
        Ok(())
    }

    /// Highest local wavenumber of `K_int(x, y, t) φ_r(y)` over the window.
    pub fn max_wavenumber(&self, x_abs: f64, t: f64, p: &PhysParams, d: &DerivedParams) -> f64 {
        d.mu * (x_abs + p.a + self.support_halfwidth) / (p.hbar * t) + p.q
    }

    /// Trapezoid step for the integral at `|x|`.
    pub fn step(&self, x_abs: f64, t: f64, p: &PhysParams, d: &DerivedParams) -> f64 {
        self.step_scale * self.phase_resolution / self.max_wavenumber(x_abs, t, p, d)
    }
}

/// `∫ K_int(x, y, t) φ_r(y) dy` over `y ∈ [-a - W, min(-a + W, 0)]`.
pub fn interaction_integral(
    x: f64,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let lo = -p.a - spec.support_halfwidth;
    let hi = (-p.a + spec.support_halfwidth).min(0.0);
    if hi <= lo || d.g == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let x_abs = x.abs();
    let n = ((hi - lo) / spec.step(x_abs, t, p, d)).ceil().max(2.0) as usize;
    let h = (hi - lo) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let y = lo + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * interaction_kernel(x_abs + y.abs(), t, d)? * initial_relative(y, d, p);
    }
    Ok(acc * h)
}

/// `Φ_r(x, t)` at a single point, without any norm check.
pub fn relative_wavefunction(
    x: f64,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(initial_relative(x, d, p));
    }
    let free = free_relative(x, t, p, d);
    if t < INTERACTION_ONSET_FRACTION * d.t_c {
        return Ok(free);
    }
    Ok(free + interaction_integral(x, t, p, d, spec)?)
}

/// L² norm of a relative wave function sampled on a uniform grid.
///
/// The contact interaction makes `Φ_r` cusped at `x = 0`, where
/// `Φ_r'(0⁺) - Φ_r'(0⁻) = -2g Φ_r(0)`. When the origin is a grid node the
/// leading Euler–Maclaurin term of that kink, `(h²/12)·(-4g|Φ_r(0)|²)`, is
/// added to the trapezoid sum; otherwise the plain trapezoid value is returned.
pub fn relative_norm(field: &ComplexField1D, d: &DerivedParams) -> f64 {
    let grid = &field.grid;
    let plain = field.norm();
    let k = (-grid.x_min / grid.dx).round();
    if k < 1.0 || k >= (grid.n - 1) as f64 || (grid.x(k as usize)).abs() > 1e-9 * grid.dx {
        return plain;
    }
    let at_origin = field.values[k as usize].norm_sqr();
    let correction = grid.dx * grid.dx / 12.0 * (-4.0 * d.g * at_origin);
    (plain * plain + correction).max(0.0).sqrt()
}

/// `Φ_r(·, t)` sampled on `x_grid`.
///
/// Points are independent quadratures evaluated in parallel; each sum runs in
/// a fixed order so the result does not depend on the thread count. Grids
/// symmetric about the origin evaluate the interaction integral once per `|x|`.
pub fn relative_evolve(
    x_grid: &Grid1D,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    spec: &QuadratureSpec,
) -> Result<ComplexField1D> {
    spec.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            function: "relative_evolve",
            reason: format!("time must be non-negative, got {t}"),
        });
    }
    let n = x_grid.n;
    let symmetric = (x_grid.x_min + x_grid.x_max).abs() <= 1e-12 * x_grid.x_max.abs().max(1.0);
    let with_interaction = t >= INTERACTION_ONSET_FRACTION * d.t_c && d.g != 0.0;

    let interaction: Vec<Complex64> = if with_interaction {
        let unique = if symmetric { n.div_ceil(2) } else { n };
        (0..unique)
            .into_par_iter()
            .map(|i| interaction_integral(x_grid.x(i), t, p, d, spec))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let f = EvolutionFactors::new(t, p, d);
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            let x = x_grid.x(i);
            if t == 0.0 {
                return initial_relative(x, d, p);
            }
            let free = free_relative_with_factors(x, t, p, d, &f);
            if !with_interaction {
                return free;
            }
            let j = if symmetric { i.min(n - 1 - i) } else { i };
            free + interaction[j]
        })
        .collect();

    let field = ComplexField1D::new(*x_grid, values)?;
    let norm = relative_norm(&field, d);
    if (norm - 1.0).abs() > RELATIVE_NORM_TOLERANCE || !norm.is_finite() {
        return Err(Error::Quadrature {
            t,
            norm,
            tolerance: RELATIVE_NORM_TOLERANCE,
            step_scale: spec.step_scale,
        });
    }
    Ok(field)
}

/// `Ψ(x1, x2) = Φ_c(α1 x1 + α2 x2, t) Φ_r(x1 - x2, t)` on `grid × grid`, with
/// `relative` sampled on the difference grid of `grid` with itself.
pub fn assemble_two_particle(
    grid: &Grid1D,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    relative: &ComplexField1D,
) -> Result<ComplexField2D> {
    let diff = Grid1D::difference(grid, grid)?;
    if relative.grid.n != diff.n || (relative.grid.x_min - diff.x_min).abs() > 1e-9 * diff.dx {
        return Err(Error::Input(
            "relative wave function is not sampled on the difference grid".into(),
        ));
    }
    let f = EvolutionFactors::new(t, p, d);
    let n = grid.n;
    let values = DMatrix::from_fn(n, n, |i, j| {
        let x0 = d.alpha1 * grid.x(i) + d.alpha2 * grid.x(j);
        com_with_factors(x0, &f) * relative.values[i + n - 1 - j]
    });
    ComplexField2D::new(*grid, *grid, values)
}

/// Full two-particle wave function on `grid × grid` at time `t`.
pub fn two_particle_wavefunction(
    grid: &Grid1D,
    t: f64,
    p: &PhysParams,
    d: &DerivedParams,
    spec: &QuadratureSpec,
) -> Result<ComplexField2D> {
    let diff = Grid1D::difference(grid, grid)?;
    let relative = relative_evolve(&diff, t, p, d, spec)?;
    assemble_two_particle(grid, t, p, d, &relative)
}
