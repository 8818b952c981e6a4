use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("argument outside the domain of {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// `erfcx` result not representable; `saturated` carries the clamped value.
    #[error("overflow evaluating erfcx at {z}")]
    Overflow { z: Complex64, saturated: Complex64 },

    #[error("kernel denominator vanishes ({denominator:e}) at x={x}, y={y}, t={t}")]
    Singularity {
        x: f64,
        y: f64,
        t: f64,
        denominator: f64,
    },

    #[error(
        "quadrature failure at t={t}: norm {norm:.6} deviates from 1 by more than {tolerance:e}; \
         refine the quadrature step (current step scale {step_scale}) or the grid spacing"
    )]
    Quadrature {
        t: f64,
        norm: f64,
        tolerance: f64,
        step_scale: f64,
    },

    #[error("invalid input field: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
