use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A rounded result exceeded the largest finite value of the working format.
    #[error("overflow in {context} at step {step}")]
    Overflow { context: &'static str, step: usize },

    #[error("evaluation point is zero; evaluate the constant coefficient directly")]
    DegeneratePoint,

    #[error("newton iteration stalled after {iterations} iterations (best iterate {best:e})")]
    Stalled { best: f64, iterations: u32 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::Overflow { .. })
    }
}
