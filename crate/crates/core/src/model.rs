//! Physical parameters, sampling grids, coordinate transforms and the
//! initial product state of the two colliding particles.
//!
//! The two-body Hamiltonian separates into a free center-of-mass part
//! (total mass `m`) and a relative part (reduced mass `mu`) carrying the
//! contact interaction `-V0 δ(x1 - x2)`. With matched position variances
//! `m1 (ΔX1)² = m2 (ΔX2)²` the initial product of Gaussians factorizes as
//! `φ_c(x0) φ_r(x)`, which is what makes the exact propagator usable.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical inputs in atomic units.
///
/// Sign convention for `v0`: positive is attractive, negative repulsive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub m1: f64,
    pub m2: f64,
    pub v0: f64,
    /// Initial mean separation of the packets.
    pub a: f64,
    /// Initial relative wavenumber.
    pub q: f64,
    pub sigma: f64,
    pub hbar: f64,
}

impl Default for PhysParams {
    /// Equal masses, repulsive `V0 = -5`, `a = 10`, `q = 5`, `σ = 1/2`.
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            v0: -5.0,
            a: 10.0,
            q: 5.0,
            sigma: 0.5,
            hbar: 1.0,
        }
    }
}

impl PhysParams {
    pub fn with_masses(self, m1: f64, m2: f64) -> Self {
        Self { m1, m2, ..self }
    }

    pub fn with_v0(self, v0: f64) -> Self {
        Self { v0, ..self }
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("a", self.a),
            ("q", self.q),
            ("sigma", self.sigma),
            ("hbar", self.hbar),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if !self.v0.is_finite() {
            return Err(Error::Parameter {
                name: "v0",
                reason: format!("must be finite, got {}", self.v0),
            });
        }
        Ok(())
    }

    /// Non-fatal diagnostics about the regime of validity.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(d) = derive(self) {
            let min_sep = 4.0 * self.sigma / d.alpha;
            if self.a < min_sep {
                out.push(format!(
                    "initial separation a={} is below 4σ/α={min_sep:.4}; packets are not well \
                     separated and the asymptotic analysis degrades",
                    self.a
                ));
            }
        }
        out
    }
}

/// Quantities derived from [`PhysParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub m: f64,
    pub mu: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// `sqrt(alpha1 * alpha2)`
    pub alpha: f64,
    /// Interaction wavenumber `mu V0 / hbar²`.
    pub g: f64,
    pub a1: f64,
    pub a2: f64,
    /// Mean speed of the relative packet, `hbar q / mu`.
    pub v: f64,
    /// Classical collision time `a / v`.
    pub t_c: f64,
    pub u1: f64,
    pub u2: f64,
    pub hbar: f64,
    pub q: f64,
    pub a: f64,
    pub sigma: f64,
}

impl DerivedParams {
    /// Collision time in the `m a / (hbar q)` convention, reported alongside
    /// `t_c` for comparison only.
    pub fn t_c_total_mass(&self) -> f64 {
        self.m * self.a / (self.hbar * self.q)
    }
}

pub fn derive(p: &PhysParams) -> Result<DerivedParams> {
    p.validate()?;
    let m = p.m1 + p.m2;
    let mu = p.m1 * p.m2 / m;
    let alpha1 = p.m1 / m;
    let alpha2 = p.m2 / m;
    let v = p.hbar * p.q / mu;
    Ok(DerivedParams {
        m,
        mu,
        alpha1,
        alpha2,
        alpha: (alpha1 * alpha2).sqrt(),
        g: mu * p.v0 / (p.hbar * p.hbar),
        a1: alpha2 * p.a,
        a2: alpha1 * p.a,
        v,
        t_c: p.a / v,
        u1: p.hbar * p.q / p.m1,
        u2: p.hbar * p.q / p.m2,
        hbar: p.hbar,
        q: p.q,
        a: p.a,
        sigma: p.sigma,
    })
}

/// Maps particle coordinates to `(x0, x)`, center of mass and separation.
pub fn to_com_relative(x1: f64, x2: f64, d: &DerivedParams) -> (f64, f64) {
    (d.alpha1 * x1 + d.alpha2 * x2, x1 - x2)
}

pub fn from_com_relative(x0: f64, x: f64, d: &DerivedParams) -> (f64, f64) {
    (x0 + d.alpha2 * x, x0 - d.alpha1 * x)
}

/// Normalized center-of-mass Gaussian at `t = 0`.
pub fn initial_com(x0: f64, _d: &DerivedParams, p: &PhysParams) -> Complex64 {
    let s = p.sigma;
    let amp = s.powf(-0.5) * PI.powf(-0.25) * (-x0 * x0 / (2.0 * s * s)).exp();
    Complex64::new(amp, 0.0)
}

/// Normalized relative Gaussian centered at `-a` carrying wavenumber `q`.
pub fn initial_relative(x: f64, d: &DerivedParams, p: &PhysParams) -> Complex64 {
    let s = p.sigma;
    let shifted = d.alpha * (x + p.a);
    let amp = (d.alpha / s).sqrt() * PI.powf(-0.25) * (-shifted * shifted / (2.0 * s * s)).exp();
    Complex64::from_polar(amp, p.q * x)
}

/// Single-particle initial packet of particle 1, centered at `-a1` with wavenumber `+q`.
pub fn initial_particle1(x1: f64, d: &DerivedParams, p: &PhysParams) -> Complex64 {
    single_particle_gaussian(x1 + d.a1, d.alpha1, p.q * x1, p.sigma)
}

/// Single-particle initial packet of particle 2, centered at `a2` with wavenumber `-q`.
pub fn initial_particle2(x2: f64, d: &DerivedParams, p: &PhysParams) -> Complex64 {
    single_particle_gaussian(x2 - d.a2, d.alpha2, -p.q * x2, p.sigma)
}

fn single_particle_gaussian(offset: f64, alpha_j: f64, phase: f64, sigma: f64) -> Complex64 {
    let amp = alpha_j.powf(0.25) / (sigma.sqrt() * PI.powf(0.25))
        * (-alpha_j * offset * offset / (2.0 * sigma * sigma)).exp();
    Complex64::from_polar(amp, phase)
}

/// Width parameter of the slowest-spreading single-particle packet at time `t`
/// used by the default grid extent rule.
pub fn spread_width(t: f64, p: &PhysParams, d: &DerivedParams) -> f64 {
    let s2 = p.sigma * p.sigma;
    let growth = p.hbar * t / (p.sigma * d.m);
    (s2 + growth * growth).sqrt() / d.alpha1.sqrt().min(d.alpha2.sqrt())
}

/// Default half-width `L` of the `[-L, L]` particle grids: the farthest
/// classical single-particle center over `[0, t_max]` plus six spread widths,
/// so transmitted and reflected packets stay on the grid through `t_max`.
pub fn default_extent(p: &PhysParams, d: &DerivedParams, t_max: f64) -> f64 {
    let farthest = |a_j: f64, u_j: f64| a_j.max((u_j * t_max - a_j).abs());
    farthest(d.a1, d.u1).max(farthest(d.a2, d.u2)) + 6.0 * spread_width(t_max, p, d)
}

/// Uniform grid of `n` points on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter {
                name: "grid_n",
                reason: format!("need at least 2 points, got {n}"),
            });
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Parameter {
                name: "grid",
                reason: format!("invalid interval [{x_min}, {x_max}]"),
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / (n - 1) as f64,
        })
    }

    /// `[-half_width, half_width]` with `n` points.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Grid of all pairwise differences `x1_i - x2_j` between two grids of
    /// identical spacing; index `k` corresponds to `i - j + (n2 - 1)`.
    pub fn difference(g1: &Grid1D, g2: &Grid1D) -> Result<Self> {
        check_same_spacing(g1, g2)?;
        let n = g1.n + g2.n - 1;
        let x_min = g1.x_min - g2.x_max;
        Ok(Self {
            x_min,
            x_max: x_min + (n - 1) as f64 * g1.dx,
            n,
            dx: g1.dx,
        })
    }

    /// Trapezoid weight of point `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }
}

pub(crate) fn check_same_spacing(g1: &Grid1D, g2: &Grid1D) -> Result<()> {
    let tol = 1e-12 * g1.dx.abs().max(g2.dx.abs());
    if (g1.dx - g2.dx).abs() > tol {
        return Err(Error::Input(format!(
            "grid spacings differ: {} vs {}",
            g1.dx, g2.dx
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl ComplexField1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Input(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    /// Trapezoid-rule L² norm.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Trapezoid-rule inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexField1D) -> Result<Complex64> {
        if self.values.len() != other.values.len() {
            return Err(Error::Input("inner product of fields of different length".into()));
        }
        check_same_spacing(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.weight(i))
            .sum())
    }

    /// Trapezoid L² distance `||self - other||`.
    pub fn distance(&self, other: &ComplexField1D) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::Input("distance between fields of different length".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.grid.weight(i) * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= n);
        }
        self
    }
}

/// Two-particle amplitude `values[(i, j)] = Ψ(x1_i, x2_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid1: Grid1D,
    pub grid2: Grid1D,
    pub values: DMatrix<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid1: Grid1D, grid2: Grid1D, values: DMatrix<Complex64>) -> Result<Self> {
        if values.nrows() != grid1.n || values.ncols() != grid2.n {
            return Err(Error::Input(format!(
                "matrix is {}x{} but grids are {}x{}",
                values.nrows(),
                values.ncols(),
                grid1.n,
                grid2.n
            )));
        }
        check_same_spacing(&grid1, &grid2)?;
        Ok(Self {
            grid1,
            grid2,
            values,
        })
    }

    pub fn from_fn(grid1: Grid1D, grid2: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = DMatrix::from_fn(grid1.n, grid2.n, |i, j| f(grid1.x(i), grid2.x(j)));
        Self {
            grid1,
            grid2,
            values,
        }
    }

    /// Trapezoid-rule L² norm over both axes.
    pub fn norm(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.grid2.n {
            let wj = self.grid2.weight(j);
            for i in 0..self.grid1.n {
                acc += self.grid1.weight(i) * wj * self.values[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }
}
