use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{0}: result overflows double precision")]
    Overflow(&'static str),

    #[error("{0}: series did not converge")]
    NonConvergence(&'static str),

    #[error("perpetual formula requires positive rate, got r = {0}")]
    NonPositiveRate(f64),

    #[error("unknown firm id `{0}`")]
    UnknownFirm(String),

    #[error("contract references unknown obligor `{0}`")]
    UnresolvedObligor(String),

    #[error("duplicate firm id `{0}`")]
    DuplicateFirm(String),

    #[error("pool is empty")]
    EmptyPool,

    #[error("default indicator of `{0}` is degenerate (all paths default or all survive)")]
    DegenerateMarginal(String),

    #[error(
        "tranche [{attachment}, {detachment}] is unpriceable: zero premium leg with positive protection leg"
    )]
    Unpriceable { attachment: f64, detachment: f64 },

    #[error("simulation horizon {horizon} is shorter than deal maturity {maturity}")]
    HorizonTooShort { horizon: f64, maturity: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::NonConvergence(_)
                | Error::DegenerateMarginal(_)
                | Error::Unpriceable { .. }
        )
    }
}

pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {value}")))
    }
}
