use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter {name} = {value}: must be positive and finite")]
    InvalidParameter { name: &'static str, value: f64 },

    /// E[T^k] is infinite: the tail of the density decays like t^(-b*beta-1).
    #[error("moment of order {order} does not exist (requires order < b*beta = {limit})")]
    MomentDoesNotExist { order: f64, limit: f64 },

    #[error("series did not converge after {terms} terms (last partial sum {partial_sum})")]
    SeriesNonConvergence { terms: usize, partial_sum: f64 },

    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },

    /// A likelihood ratio test could not use its fits.
    #[error("fits did not converge (full model: {full}; restricted model: {restricted})")]
    FitNonConvergence { full: String, restricted: String },

    #[error("quadrature failed: estimated error {abs_error:e} for value {value} after {intervals} subintervals")]
    Quadrature {
        value: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("singular or indefinite matrix: {0}")]
    SingularMatrix(String),

    #[error("data error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Data {
        row: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            row,
            message: msg.into(),
        }
    }

    /// True for failures caused by bad input data rather than bad arguments or numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Data { .. } | Error::Io(_) | Error::Csv(_))
    }

    /// True for failures of an iterative numerical procedure.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SeriesNonConvergence { .. }
                | Error::NonConvergence { .. }
                | Error::FitNonConvergence { .. }
                | Error::Quadrature { .. }
                | Error::SingularMatrix(_)
        )
    }
}
