use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{asymptotic_entropy, asymptotic_two_particle, AsymptoticState};
use crate::entanglement::{density_eigenvalues, entropy, reduced_density, schmidt_values, Subsystem};
use crate::error::Error;
use crate::evolution::{assemble_two_particle, relative_evolve, relative_norm, QuadratureSpec};
use crate::model::{derive, DerivedParams, Grid1D, PhysParams};
use crate::propagators::{delta_propagator, free_propagator, plane_wave_coefficients};
use crate::specfun::{erfcx, erfcx_continued_fraction, erfcx_series, CF_SECTOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, tolerance: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            residual: f64::INFINITY,
            tolerance,
            passed: false,
            detail: err.to_string(),
        }
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn erfcx_checks() -> Vec<CheckOutcome> {
    let mut annulus: f64 = 0.0;
    for r in [3.0, 4.0, 5.0, 6.0] {
        for k in 0..=8 {
            let z = Complex64::from_polar(r, -CF_SECTOR + 2.0 * CF_SECTOR * k as f64 / 8.0);
            annulus = annulus.max(rel_err(erfcx_series(z), erfcx_continued_fraction(z)));
        }
    }
    let at_zero = erfcx(Complex64::new(0.0, 0.0)).map(|w| (w - 1.0).norm());

    let mut reflection: f64 = 0.0;
    let mut reflection_err = None;
    for re in [-4.0, -1.5, -0.2, 0.0, 0.7, 2.0, 5.0] {
        for im in [-6.0, -2.0, -0.5, 0.0, 0.3, 1.0, 4.0] {
            let z = Complex64::new(re, im);
            match (erfcx(-z), erfcx(z)) {
                (Ok(lhs), Ok(w)) => {
                    let big = 2.0 * (z * z).exp();
                    let scale = lhs.norm().max(big.norm()).max(w.norm());
                    reflection = reflection.max((lhs - (big - w)).norm() / scale);
                }
                (Err(e), _) | (_, Err(e)) => reflection_err = Some(e),
            }
        }
    }

    let mut out = vec![CheckOutcome::new(
        "erfcx_two_methods_on_annulus",
        annulus,
        1e-10,
        "series vs continued fraction, 3 ≤ |z| ≤ 6",
    )];
    out.push(match at_zero {
        Ok(r) => CheckOutcome::new("erfcx_at_zero", r, 0.0, "erfcx(0) = 1 exactly"),
        Err(e) => CheckOutcome::failed("erfcx_at_zero", 0.0, &e),
    });
    out.push(match reflection_err {
        None => CheckOutcome::new("erfcx_reflection", reflection, 1e-9, "erfcx(-z) = 2exp(z²) - erfcx(z)"),
        Some(e) => CheckOutcome::failed("erfcx_reflection", 1e-9, &e),
    });
    out
}

fn propagator_checks(p: &PhysParams, d: &DerivedParams) -> Vec<CheckOutcome> {
    let free = match derive(&PhysParams { v0: 0.0, ..*p }) {
        Ok(f) => f,
        Err(e) => return vec![CheckOutcome::failed("kernel_free_reduction", 1e-14, &e)],
    };
    let mut reduction: f64 = 0.0;
    for (x, y) in [(-3.0, 2.0), (0.5, 0.5), (12.0, -9.0), (-0.1, -20.0)] {
        for tau in [0.1, 1.0, 3.0] {
            let t = tau * d.t_c;
            match (delta_propagator(x, y, t, &free), free_propagator(x, y, t, free.mu, free.hbar)) {
                (Ok(a), Ok(b)) => reduction = reduction.max(rel_err(a, b)),
                (Err(e), _) | (_, Err(e)) => {
                    return vec![CheckOutcome::failed("kernel_free_reduction", 1e-14, &e)]
                }
            }
        }
    }
    let mut unitarity: f64 = 0.0;
    for q in [0.3, 1.0, d.q, 10.0] {
        let (t, r) = plane_wave_coefficients(q, d.g);
        unitarity = unitarity.max((t.norm_sqr() + r.norm_sqr() - 1.0).abs());
    }
    vec![
        CheckOutcome::new("kernel_free_reduction", reduction, 1e-14, "delta kernel at g = 0 equals free kernel"),
        CheckOutcome::new("plane_wave_unitarity", unitarity, 1e-14, "|T|² + |R|² = 1"),
    ]
}

fn evolution_checks(p: &PhysParams, d: &DerivedParams, grid: &Grid1D, spec: &QuadratureSpec) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let diff = match Grid1D::difference(grid, grid) {
        Ok(g) => g,
        Err(e) => return vec![CheckOutcome::failed("relative_norm", 1e-3, &e)],
    };
    let mut at_tc = None;
    for tau in [1.0, 2.0] {
        let name = format!("relative_norm_t{tau}tc");
        match relative_evolve(&diff, tau * d.t_c, p, d, spec) {
            Ok(rel) => {
                let n = relative_norm(&rel, d);
                out.push(CheckOutcome::new(&name, (n - 1.0).abs(), 1e-3, format!("||Φ_r|| = {n}")));
                if tau == 1.0 {
                    at_tc = Some(rel);
                }
            }
            Err(Error::Quadrature { norm, .. }) => out.push(CheckOutcome::new(
                &name,
                (norm - 1.0).abs(),
                1e-3,
                format!("quadrature rejected: ||Φ_r|| = {norm}"),
            )),
            Err(e) => out.push(CheckOutcome::failed(&name, 1e-3, &e)),
        }
    }
    let Some(rel) = at_tc else {
        return out;
    };
    let psi = match assemble_two_particle(grid, d.t_c, p, d, &rel) {
        Ok(psi) => psi,
        Err(e) => {
            out.push(CheckOutcome::failed("norm2d_t1tc", 1e-2, &e));
            return out;
        }
    };
    let n2 = psi.norm();
    out.push(CheckOutcome::new("norm2d_t1tc", (n2 - 1.0).abs(), 1e-2, format!("||Ψ|| = {n2}")));

    let routes = schmidt_values(&psi).and_then(|s| {
        let ev1 = density_eigenvalues(&reduced_density(&psi, Subsystem::One)?);
        let ev2 = density_eigenvalues(&reduced_density(&psi, Subsystem::Two)?);
        Ok((s, ev1, ev2))
    });
    match routes {
        Ok((s, ev1, ev2)) => {
            let mut dev: f64 = 0.0;
            for (k, pk) in s.p.iter().enumerate() {
                dev = dev.max((ev1[k] - pk).abs()).max((ev2[k] - pk).abs());
            }
            let clip = |v: &[f64]| v.iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
            let sym = (entropy(&clip(&ev1)) - entropy(&clip(&ev2))).abs();
            out.push(CheckOutcome::new("route_equivalence_t1tc", dev, 1e-8, "SVD spectrum vs reduced density eigenvalues"));
            out.push(CheckOutcome::new("subsystem_entropy_symmetry_t1tc", sym, 1e-8, "S(ρ1) = S(ρ2)"));
        }
        Err(e) => out.push(CheckOutcome::failed("route_equivalence_t1tc", 1e-8, &e)),
    }
    out
}

fn asymptotic_checks(p: &PhysParams, d: &DerivedParams) -> Vec<CheckOutcome> {
    let t = 2.0 * d.t_c;
    let s = AsymptoticState::new(t, p, d);
    let mut sep: f64 = 0.0;
    let span = 2.0 * d.a;
    for i in 0..=12 {
        for j in 0..=12 {
            let x1 = -span + 2.0 * span * i as f64 / 12.0;
            let x2 = -span + 2.0 * span * j as f64 / 12.0 + 0.37;
            let a = asymptotic_two_particle(x1, x2, t, d, p);
            let b = s.separated(x1, x2);
            if a.norm().max(b.norm()) > 1e-280 {
                sep = sep.max(rel_err(a, b));
            }
        }
    }
    let (w_t, w_r) = s.weights();
    let two_term = (entropy(&[w_t, w_r]) - asymptotic_entropy(d.q, d.g)).abs();
    vec![
        CheckOutcome::new("separability_identity", sep, 1e-10, "Φ_c·Φ̃_r vs T Φ1 Φ2 + R Φ1 Φ2 (mirrored)"),
        CheckOutcome::new("asymptotic_entropy_two_term", two_term, 1e-12, "entropy of {|T|², |R|²}"),
    ]
}

/// The invariant suite behind `validate`, in a fixed order.
pub fn run_checks(p: &PhysParams, d: &DerivedParams, grid: &Grid1D, spec: &QuadratureSpec) -> Vec<CheckOutcome> {
    let mut out = erfcx_checks();
    out.extend(propagator_checks(p, d));
    out.extend(evolution_checks(p, d, grid, spec));
    out.extend(asymptotic_checks(p, d));
    out
}
