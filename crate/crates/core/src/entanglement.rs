//! Schmidt decomposition, reduced density matrices and von Neumann entropy.
//!
//! A sampled field `Ψ(x1_i, x2_j)` is turned into the matrix
//! `M = Ψ·sqrt(dx1·dx2)`, so that its singular values squared are the
//! Schmidt probabilities and its singular vectors divided by `sqrt(dx)` are
//! L²-normalized Schmidt functions.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{relative_evolve, relative_norm, QuadratureSpec};
use crate::model::{ComplexField1D, ComplexField2D, DerivedParams, Grid1D, PhysParams};

/// Probabilities at or below this value are dropped from spectra and entropies.
pub const SPECTRUM_FLOOR: f64 = 1e-14;

/// Largest accepted relative deviation of the input norm from 1.
pub const FIELD_NORM_TOLERANCE: f64 = 0.1;

/// Samples smaller than this fraction of the largest one are set to zero
/// before factorization. Gaussian tails otherwise reach subnormal magnitudes,
/// on which the bidiagonal SVD iteration can stall.
const FLUSH_RELATIVE: f64 = 1e-30;

/// Iteration cap for the SVD; reaching it is reported as an input error.
const SVD_MAX_ITERATIONS: usize = 100_000;

/// Number of leading probabilities kept per time sample in an [`EntropyTrace`].
pub const TRACE_SPECTRUM_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Descending Schmidt probabilities above [`SPECTRUM_FLOOR`].
    pub p: Vec<f64>,
    /// Particle-1 Schmidt functions; empty for a values-only decomposition.
    pub modes1: Vec<ComplexField1D>,
    /// Particle-2 Schmidt functions, paired with `modes1`.
    pub modes2: Vec<ComplexField1D>,
    /// Probability carried by the discarded tail.
    pub truncation_mass: f64,
    /// Norm of the field before internal renormalization.
    pub input_norm: f64,
}

impl SchmidtSpectrum {
    pub fn entropy(&self) -> f64 {
        entropy(&self.p)
    }

    /// Effective number of terms, `1 / Σ p_k²`.
    pub fn participation(&self) -> f64 {
        1.0 / self.p.iter().map(|p| p * p).sum::<f64>()
    }
}

/// `S = -Σ p ln p` over `p > SPECTRUM_FLOOR`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&pk| pk > SPECTRUM_FLOOR)
        .map(|&pk| -pk * pk.ln())
        .sum()
}

fn weighted_matrix(field: &ComplexField2D) -> Result<(DMatrix<Complex64>, f64)> {
    if field.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("field contains non-finite samples".into()));
    }
    let norm = field.norm();
    if !((norm - 1.0).abs() <= FIELD_NORM_TOLERANCE) {
        return Err(Error::Input(format!(
            "field norm {norm} is not within {FIELD_NORM_TOLERANCE} of 1"
        )));
    }
    let w = (field.grid1.dx * field.grid2.dx).sqrt();
    let peak = field.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cutoff = peak * FLUSH_RELATIVE;
    let zero = Complex64::new(0.0, 0.0);
    Ok((field.values.map(|z| if z.norm() < cutoff { zero } else { z * w }), norm))
}

fn decompose(m: DMatrix<Complex64>, vectors: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, vectors, vectors, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| Error::Input("singular value decomposition did not converge".into()))
}

fn probabilities(singular: impl Iterator<Item = f64>) -> (Vec<f64>, f64) {
    let sq: Vec<f64> = singular.map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    let mut kept = Vec::new();
    let mut tail = 0.0;
    for s2 in sq {
        let p = s2 / total;
        if p > SPECTRUM_FLOOR {
            kept.push(p);
        } else {
            tail += p;
        }
    }
    (kept, tail)
}

/// Full Schmidt decomposition: probabilities and phase-fixed mode pairs.
///
/// Each particle-1 mode is rotated so that its largest-magnitude sample is
/// real positive; the partner mode takes the conjugate phase.
pub fn schmidt(field: &ComplexField2D) -> Result<SchmidtSpectrum> {
    let (m, input_norm) = weighted_matrix(field)?;
    let svd = decompose(m, true)?;
    let (p, truncation_mass) = probabilities(svd.singular_values.iter().copied());
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let (s1, s2) = (field.grid1.dx.sqrt(), field.grid2.dx.sqrt());

    let mut modes1 = Vec::with_capacity(p.len());
    let mut modes2 = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let col = u.column(k);
        let peak = col
            .iter()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = Complex64::from_polar(1.0, -peak.arg());
        let m1 = col.iter().map(|z| z * phase / s1).collect();
        let m2 = v_t.row(k).iter().map(|z| z / phase / s2).collect();
        modes1.push(ComplexField1D::new(field.grid1, m1)?);
        modes2.push(ComplexField1D::new(field.grid2, m2)?);
    }
    Ok(SchmidtSpectrum { p, modes1, modes2, truncation_mass, input_norm })
}

/// Schmidt probabilities only (no singular vectors).
pub fn schmidt_values(field: &ComplexField2D) -> Result<SchmidtSpectrum> {
    let (m, input_norm) = weighted_matrix(field)?;
    let svd = decompose(m, false)?;
    let (p, truncation_mass) = probabilities(svd.singular_values.iter().copied());
    Ok(SchmidtSpectrum {
        p,
        modes1: Vec::new(),
        modes2: Vec::new(),
        truncation_mass,
        input_norm,
    })
}

/// Reduced density kernel of one particle as the matrix `ρ(x_i, x_j)·dx`,
/// renormalized to unit trace.
pub fn reduced_density(field: &ComplexField2D, subsystem: Subsystem) -> Result<DMatrix<Complex64>> {
    let (m, _) = weighted_matrix(field)?;
    let rho = match subsystem {
        Subsystem::One => &m * m.adjoint(),
        Subsystem::Two => m.transpose() * m.map(|z| z.conj()),
    };
    let trace = rho.trace().re;
    Ok(rho / Complex64::from(trace))
}

/// Eigenvalues of a Hermitian density matrix, descending.
pub fn density_eigenvalues(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Entropy of a time series of evolved states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Trapezoid norms of the two-particle fields.
    pub norms: Vec<f64>,
    /// Norms of the relative wave functions on the difference grid.
    pub relative_norms: Vec<f64>,
    /// Leading probabilities per sample.
    pub spectra: Vec<Vec<f64>>,
    /// Samples that failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl EntropyTrace {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

struct Sample {
    entropy: f64,
    norm: f64,
    relative_norm: f64,
    spectrum: Vec<f64>,
}

fn sample(
    t: f64,
    grid: &Grid1D,
    diff: &Grid1D,
    p: &PhysParams,
    d: &DerivedParams,
    spec: &QuadratureSpec,
) -> Result<Sample> {
    let rel = relative_evolve(diff, t, p, d, spec)?;
    let psi = crate::evolution::assemble_two_particle(grid, t, p, d, &rel)?;
    let s = schmidt_values(&psi)?;
    Ok(Sample {
        entropy: s.entropy(),
        norm: s.input_norm,
        relative_norm: relative_norm(&rel, d),
        spectrum: s.p.iter().take(TRACE_SPECTRUM_LEN).copied().collect(),
    })
}

/// Entropy at each requested time on the square grid `grid × grid`.
///
/// Samples are independent and run in parallel; a failing sample is recorded
/// in `failures` and left out of the other columns.
pub fn entropy_trace(
    times: &[f64],
    p: &PhysParams,
    d: &DerivedParams,
    grid: &Grid1D,
    spec: &QuadratureSpec,
) -> Result<EntropyTrace> {
    spec.validate()?;
    let diff = Grid1D::difference(grid, grid)?;
    let results: Vec<(f64, Result<Sample>)> = times
        .par_iter()
        .map(|&t| {
            let r = if t > 0.0 && t.is_finite() {
                sample(t, grid, &diff, p, d, spec)
            } else {
                Err(Error::Input(format!("sample time {t} must be positive")))
            };
            (t, r)
        })
        .collect();

    let mut trace = EntropyTrace {
        times: Vec::new(),
        entropy: Vec::new(),
        norms: Vec::new(),
        relative_norms: Vec::new(),
        spectra: Vec::new(),
        failures: Vec::new(),
    };
    for (t, r) in results {
        match r {
            Ok(s) => {
                trace.times.push(t);
                trace.entropy.push(s.entropy);
                trace.norms.push(s.norm);
                trace.relative_norms.push(s.relative_norm);
                trace.spectra.push(s.spectrum);
            }
            Err(e) => trace.failures.push((t, e.to_string())),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn gaussian(x: f64, c: f64, w: f64, k: f64) -> Complex64 {
        let n = (std::f64::consts::PI * w * w).powf(-0.25);
        Complex64::from_polar(n * (-(x - c).powi(2) / (2.0 * w * w)).exp(), k * x)
    }

    fn grid() -> Grid1D {
        Grid1D::symmetric(10.0, 121).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - LN_2).abs() < 1e-15);
        assert!((entropy(&[0.8, 0.2]) - 0.500402).abs() < 1e-6);
        assert_eq!(entropy(&[1.0, 1e-15, 0.0]), 0.0);
    }

    #[test]
    fn product_field_has_rank_one() {
        let f = ComplexField2D::from_fn(grid(), grid(), |x1, x2| {
            gaussian(x1, -1.0, 1.0, 2.0) * gaussian(x2, 0.5, 0.7, -1.0)
        });
        let s = schmidt(&f).unwrap();
        assert!((s.p[0] - 1.0).abs() < 1e-12);
        assert!(s.p[1..].iter().sum::<f64>() < 1e-10);
        assert!(s.entropy() < 1e-9);
        let rho = reduced_density(&f, Subsystem::One).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((&rho * &rho - &rho).norm() < 1e-10);
    }

    #[test]
    fn product_with_subnormal_tails_factorizes() {
        let g = Grid1D::symmetric(36.0, 128).unwrap();
        let f = ComplexField2D::from_fn(g, g, |x1, x2| {
            gaussian(x1, -5.0, 0.7, 5.0) * gaussian(x2, 5.0, 0.7, -5.0)
        });
        assert!(f.values.iter().any(|z| z.norm() > 0.0 && z.norm() < f64::MIN_POSITIVE));
        let s = schmidt(&f).unwrap();
        assert_eq!(s.p.len(), 1);
    }

    #[test]
    fn two_bump_field_has_equal_weights() {
        let f = ComplexField2D::from_fn(grid(), grid(), |x1, x2| {
            let b = |y1: f64, y2: f64| gaussian(y1, 4.0, 0.6, 0.0) * gaussian(y2, 4.0, 0.6, 0.0);
            (b(x1, x2) + b(-x1, -x2)) / 2f64.sqrt()
        });
        let s = schmidt(&f).unwrap();
        assert!((s.p[0] - 0.5).abs() < 1e-9 && (s.p[1] - 0.5).abs() < 1e-9, "{:?}", &s.p[..2]);
        assert!((s.entropy() - LN_2).abs() < 1e-8);
    }

    #[test]
    fn modes_are_orthonormal_and_reconstruct_the_field() {
        let f = ComplexField2D::from_fn(grid(), grid(), |x1, x2| {
            0.8 * gaussian(x1, -2.0, 1.0, 1.0) * gaussian(x2, 2.0, 1.0, -1.0)
                + 0.6 * gaussian(x1, 2.0, 0.8, -0.5) * gaussian(x2, -1.0, 1.2, 0.5)
                + Complex64::new(0.0, 0.3) * gaussian(x1 + x2, 0.0, 1.5, 0.0) * gaussian(x1 - x2, 0.0, 2.0, 0.0)
        });
        let f = ComplexField2D::new(f.grid1, f.grid2, f.values.clone() / Complex64::from(f.norm())).unwrap();
        let s = schmidt(&f).unwrap();
        assert!((s.p.iter().sum::<f64>() + s.truncation_mass - 1.0).abs() < 1e-12);
        for (a, fam) in [(0, &s.modes1), (1, &s.modes2)] {
            for i in 0..4 {
                for j in 0..4 {
                    let ip = fam[i].inner(&fam[j]).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-8, "family {a} <{i}|{j}> = {ip}");
                }
            }
        }
        let scale = s.input_norm;
        let mut max_err: f64 = 0.0;
        for i in 0..f.grid1.n {
            for j in 0..f.grid2.n {
                let r: Complex64 = (0..s.p.len())
                    .map(|k| s.p[k].sqrt() * scale * s.modes1[k].values[i] * s.modes2[k].values[j])
                    .sum();
                max_err = max_err.max((r - f.values[(i, j)]).norm());
            }
        }
        // the tail below the spectrum floor carries amplitudes up to ~1e-7
        assert!(max_err < 1e-6, "{max_err}");
        for m in &s.modes1 {
            let peak = m.values.iter().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap();
            assert!(peak.im.abs() < 1e-12 && peak.re > 0.0);
        }
    }

    #[test]
    fn non_finite_and_unnormalized_fields_are_rejected() {
        let mut f = ComplexField2D::from_fn(grid(), grid(), |x1, x2| gaussian(x1, 0.0, 1.0, 0.0) * gaussian(x2, 0.0, 1.0, 0.0));
        let mut g = f.clone();
        g.values *= Complex64::from(2.0);
        assert!(matches!(schmidt(&g), Err(Error::Input(_))));
        f.values[(3, 4)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(schmidt_values(&f), Err(Error::Input(_))));
        assert!(matches!(reduced_density(&f, Subsystem::Two), Err(Error::Input(_))));
    }

    fn random_field(seed: u64, n: usize) -> ComplexField2D {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Grid1D::symmetric(3.0, n).unwrap();
        let values = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut f = ComplexField2D::new(g, g, values).unwrap();
        let norm = f.norm();
        f.values /= Complex64::from(norm);
        f
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn routes_and_subsystems_agree(seed in any::<u64>(), n in 4usize..24) {
            let f = random_field(seed, n);
            let s = schmidt_values(&f).unwrap();
            for sub in [Subsystem::One, Subsystem::Two] {
                let rho = reduced_density(&f, sub).unwrap();
                prop_assert!((&rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-12));
                let ev = density_eigenvalues(&rho);
                for (k, pk) in s.p.iter().enumerate() {
                    prop_assert!((ev[k] - pk).abs() < 1e-8);
                }
                prop_assert!((entropy(&ev.iter().map(|e| e.max(0.0)).collect::<Vec<_>>()) - s.entropy()).abs() < 1e-8);
            }
        }

        #[test]
        fn entropy_ignores_global_phase(seed in any::<u64>(), theta in 0.0f64..6.3) {
            let f = random_field(seed, 12);
            let mut g = f.clone();
            g.values *= Complex64::from_polar(1.0, theta);
            let a = schmidt_values(&f).unwrap().entropy();
            let b = schmidt_values(&g).unwrap().entropy();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_records_bad_times_without_aborting() {
        let p = PhysParams::default();
        let d = crate::model::derive(&p).unwrap();
        let g = Grid1D::symmetric(30.0, 96).unwrap();
        let spec = QuadratureSpec::for_params(&p, &d);
        let tr = entropy_trace(&[-1.0, 0.1 * d.t_c], &p, &d, &g, &spec).unwrap();
        assert!(tr.is_partial());
        assert_eq!(tr.times, vec![0.1 * d.t_c]);
        assert_eq!(tr.failures.len(), 1);
        assert!(tr.entropy[0] >= 0.0 && tr.entropy[0] < 0.02);
        assert_eq!(tr.norms.len(), tr.spectra.len());
    }
}
