use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integration end {t_end} reaches the horizon guard at {limit} (horizon {horizon})")]
    HorizonExceeded { t_end: f64, limit: f64, horizon: f64 },

    #[error("coefficient blow-up at t = {t}: |a| = {a}, |b| = {b}")]
    CoefficientBlowup { t: f64, a: f64, b: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("frequency denominator vanished at t = {t} (value {value:e})")]
    DenominatorVanished { t: f64, value: f64 },

    #[error("frequency function near zero at t = {t} (|omega| = {value:e})")]
    OmegaNearZero { t: f64, value: f64 },

    #[error("parameter domain violation: {0}")]
    ParameterDomain(String),

    #[error("property (EP) violated: |K^| = {modulus:e} at nu = {nu}")]
    EpViolated { nu: f64, modulus: f64 },

    #[error("seed kernel transform exceeds unit modulus: max |K^| = {max_modulus}")]
    NotSubunit { max_modulus: f64 },

    #[error("aliasing suspected: trailing-edge energy fraction {fraction:e}")]
    AliasingSuspected { fraction: f64 },

    #[error("synthesized kernel is not real: imaginary residue {residue:e} of peak")]
    NonRealSynthesis { residue: f64 },

    #[error("degenerate normalizer in truncated relaxation: {value:e}")]
    DegenerateNormalizer { value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
