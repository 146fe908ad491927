use std::fmt;

/// Errors raised by the numerical kernels and the experiment drivers.
#[derive(Debug)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    Domain(String),
    /// Evaluation at (or within the pole-proximity threshold of) a pole.
    Pole {
        function: &'static str,
        at: String,
    },
    /// A quadrature or series could not reach the requested accuracy.
    Accuracy {
        what: String,
        achieved: f64,
        target: f64,
    },
    /// A table or sum would exceed its memory/desk-scale guard.
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },
    /// Evaluation point outside the certified window of a series.
    Window {
        y: f64,
        lo: f64,
        hi: f64,
    },
    /// Index or parameter outside an admissible range.
    Range(String),
    /// A Dirichlet series was requested outside its absolute-convergence region.
    Convergence(String),
    /// Contour placed on the wrong side of the poles.
    Contour(String),
    /// Parameters outside the regime where an approximation is defined.
    Regime(String),
    /// Golden or cached data missing on disk.
    MissingData(String),
    /// Malformed input data.
    Parse(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn accuracy(what: impl Into<String>, achieved: f64, target: f64) -> Self {
        Error::Accuracy {
            what: what.into(),
            achieved,
            target,
        }
    }

    /// True for failures that the CLI maps to the accuracy exit code.
    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Pole { function, at } => write!(f, "{function}: pole at {at}"),
            Error::Accuracy {
                what,
                achieved,
                target,
            } => write!(
                f,
                "accuracy failure in {what}: error estimate {achieved:.3e} exceeds target {target:.3e}"
            ),
            Error::Capacity {
                what,
                requested,
                limit,
            } => write!(f, "{what}: requested {requested} exceeds limit {limit}"),
            Error::Window { y, lo, hi } => {
                write!(f, "y = {y} outside the certified window [{lo}, {hi}]")
            }
            Error::Range(m) => write!(f, "range error: {m}"),
            Error::Convergence(m) => write!(f, "convergence error: {m}"),
            Error::Contour(m) => write!(f, "contour placement error: {m}"),
            Error::Regime(m) => write!(f, "regime error: {m}"),
            Error::MissingData(m) => write!(f, "missing data: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
