//! Scaled complementary error function `erfcx(z) = exp(z²) erfc(z)` for
//! complex arguments.
//!
//! Two independent evaluation routes are used:
//!
//! * the Maclaurin series `Σ (-z)^n / Γ(n/2 + 1)`, summed in double-double
//!   arithmetic so that the `exp(|z|²)` cancellation between terms still
//!   leaves ~16 significant digits out to `|z| ≈ 7`;
//! * the Laplace continued fraction
//!   `erfcx(z) = π^{-1/2} / (z + ½/(z + 1/(z + 3/2/(z + …))))`,
//!   valid for `Re z > 0` and fast for large `|z|` away from the imaginary axis.
//!
//! The left half-plane is reached through `erfcx(-z) = 2 exp(z²) - erfcx(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this modulus the series is used (unless the continued fraction applies).
const SERIES_MAX_RADIUS: f64 = 7.0;
/// Continued fraction used for `|z| >= CF_MIN_RADIUS` inside the sector
/// `|arg z| <= CF_SECTOR`, and everywhere in `Re z >= 0` beyond `SERIES_MAX_RADIUS`.
const CF_MIN_RADIUS: f64 = 4.0;
pub const CF_SECTOR: f64 = 0.4 * PI;
const CF_MAX_TERMS: usize = 4000;

/// Smallest `|z|` accepted by [`erfcx_asymptotic`].
pub const ASYMPTOTIC_MIN_RADIUS: f64 = 4.0;

// 2/sqrt(pi) as a double-double
const TWO_OVER_SQRT_PI_HI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const TWO_OVER_SQRT_PI_LO: f64 = 1.533_545_961_316_588e-17;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `exp(z²) erfc(z)` with ~1e-14 relative accuracy for `|z| <= 50`.
///
/// Returns [`Error::Overflow`] when `Re z` is so negative that `exp(z²)` is
/// not representable; the error carries a saturated value.
pub fn erfcx(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain {
            function: "erfcx",
            reason: format!("non-finite argument {z}"),
        });
    }
    let r = z.norm();
    if z.re >= 0.0 {
        Ok(erfcx_right(z, r))
    } else if r < SERIES_MAX_RADIUS {
        Ok(erfcx_series(z))
    } else {
        let z2 = z * z;
        if z2.re > 709.0 {
            let saturated = Complex64::from_polar(f64::INFINITY, z2.im);
            return Err(Error::Overflow { z, saturated });
        }
        Ok(2.0 * z2.exp() - erfcx_right(-z, r))
    }
}

fn erfcx_right(z: Complex64, r: f64) -> Complex64 {
    let in_sector = z.im.atan2(z.re).abs() <= CF_SECTOR;
    if (r >= CF_MIN_RADIUS && in_sector) || r >= SERIES_MAX_RADIUS {
        erfcx_continued_fraction(z)
    } else {
        erfcx_series(z)
    }
}

/// Laplace continued fraction, evaluated with the modified Lentz method.
///
/// Only meaningful for `Re z > 0`; convergence degrades towards the imaginary
/// axis for small `|z|`.
pub fn erfcx_continued_fraction(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = if z.norm() == 0.0 { tiny } else { z };
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..=CF_MAX_TERMS {
        let a = 0.5 * k as f64;
        d = z + a * d;
        if d.norm() < TINY {
            d = tiny;
        }
        d = d.inv();
        c = z + a / c;
        if c.norm() < TINY {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// Maclaurin series of `erfcx`, summed in double-double arithmetic.
pub fn erfcx_series(z: Complex64) -> Complex64 {
    let zsq = CDd::square(z);
    // t_n = (-z)^n / Γ(n/2 + 1), stepped two at a time: t_{n+2} = t_n z² / ((n+2)/2)
    let mut even = CDd::from_f64(1.0, 0.0);
    let two_over_sqrt_pi = Dd::new(TWO_OVER_SQRT_PI_HI, TWO_OVER_SQRT_PI_LO);
    let mut odd = CDd {
        re: Dd::from(-z.re).mul(two_over_sqrt_pi),
        im: Dd::from(-z.im).mul(two_over_sqrt_pi),
    };
    let mut sum = even.add(odd);
    let min_terms = 2.0 * z.norm_sqr() + 4.0;
    let mut n = 0usize;
    loop {
        even = even.mul(zsq).scale(2.0).div_f64((n + 2) as f64);
        odd = odd.mul(zsq).scale(2.0).div_f64((n + 3) as f64);
        sum = sum.add(even).add(odd);
        n += 2;
        let tail = even.approx_norm() + odd.approx_norm();
        if (n as f64 >= min_terms && tail <= 1e-32 * sum.approx_norm()) || tail == 0.0 || n > 2000
        {
            break;
        }
    }
    sum.to_complex()
}

/// Truncated large-`|z|` expansion
/// `(√π z)^{-1} Σ_{k<order} (-1)^k (2k-1)!! / (2z²)^k`.
///
/// `order = 1` keeps only the leading `1/(√π z)` term.
pub fn erfcx_asymptotic(z: Complex64, order: usize) -> Result<Complex64> {
    if z.norm() < ASYMPTOTIC_MIN_RADIUS || !z.norm().is_finite() {
        return Err(Error::Domain {
            function: "erfcx_asymptotic",
            reason: format!("|z| = {} is below {ASYMPTOTIC_MIN_RADIUS}", z.norm()),
        });
    }
    if order == 0 {
        return Err(Error::Domain {
            function: "erfcx_asymptotic",
            reason: "order must be at least 1".into(),
        });
    }
    let inv_2z2 = (2.0 * z * z).inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..order {
        term *= -((2 * k - 1) as f64) * inv_2z2;
        sum += term;
    }
    Ok(sum / (PI.sqrt() * z))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    #[inline]
    fn scale(self, s: f64) -> Dd {
        let (p, e) = two_prod(self.hi, s);
        Dd::renorm(p, e + self.lo * s)
    }

    #[inline]
    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let r = ((self.hi - p) - e + self.lo) / b;
        Dd::renorm(q1, r)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x, 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    fn from_f64(re: f64, im: f64) -> Self {
        Self {
            re: re.into(),
            im: im.into(),
        }
    }

    /// Exact square of a double-precision complex number.
    fn square(z: Complex64) -> Self {
        let (xx, exx) = two_prod(z.re, z.re);
        let (yy, eyy) = two_prod(z.im, z.im);
        let (xy, exy) = two_prod(z.re, z.im);
        Self {
            re: Dd::renorm(xx, exx).add(Dd::renorm(yy, eyy).neg()),
            im: Dd::renorm(2.0 * xy, 2.0 * exy),
        }
    }

    #[inline]
    fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    #[inline]
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    #[inline]
    fn scale(self, s: f64) -> CDd {
        CDd {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    #[inline]
    fn div_f64(self, b: f64) -> CDd {
        CDd {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }

    #[inline]
    fn approx_norm(&self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}
