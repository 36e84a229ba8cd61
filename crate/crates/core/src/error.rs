use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A raw Bessel value left the representable range; use the reduced functions.
    #[error("{function} overflowed at order {order}, z = {z}")]
    Overflow {
        function: &'static str,
        order: u32,
        z: String,
    },

    #[error("domain error in {0}")]
    Domain(String),

    /// Evaluation point sits on (or within roundoff of) a pole.
    #[error("pole: {0}")]
    Pole(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("frequency {omega:e} rad/s outside tabulated range [{lo:e}, {hi:e}]")]
    OutOfRange { omega: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("maximiser stuck at bracket edge after {0} widenings")]
    BracketEdge(usize),

    #[error("failed to parse {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
