use core::fmt;

/// Everything that can go wrong in the solver and the analysis routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Moment order below the minimum of 3.
    OrderTooLow(usize),
    /// Velocity dimension outside `1..=3`.
    BadDimension(usize),
    /// A parameter that must be strictly positive was not.
    NonPositive { name: &'static str, value: f64 },
    /// A parameter outside its admissible range.
    OutOfRange { name: &'static str, value: f64 },
    /// Non-positive density, either in a single cell or while building a state.
    Vacuum { cell: Option<usize>, density: f64 },
    /// Non-positive thermal velocity after transport in the given cell.
    NegativeTemperature { cell: usize, theta: f64 },
    /// NaN or infinity appeared in the state.
    NonFinite { cell: usize },
    /// Zero maximal signal speed, so no CFL time step exists.
    DegenerateSpeed,
    /// Right side of the periodic Poisson problem is not mean-free.
    Unsolvable { mean: f64 },
    /// Array lengths that should agree do not.
    LengthMismatch { expected: usize, found: usize },
    /// A simulation step failed; carries the step count.
    StepFailed { step: usize, source: alloc::boxed::Box<Error> },
    /// Fewer local maxima than the fit needs.
    InsufficientPeaks { found: usize },
    /// Not enough points for a least-squares line.
    InsufficientPoints { found: usize },
    /// Two extrapolation points share the same grid spacing.
    DuplicateSpacing(f64),
    /// Successive rate differences change sign or vanish.
    NotMonotone,
    /// Moment orders of a convergence study are not equally spaced.
    NotArithmetic,
    /// The trace never leaves the fitted envelope.
    NoRecurrence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OrderTooLow(m) => write!(f, "moment order M = {m} is below the minimum of 3"),
            Error::BadDimension(d) => write!(f, "velocity dimension D = {d} must be 1, 2 or 3"),
            Error::NonPositive { name, value } => write!(f, "{name} must be positive, got {value}"),
            Error::OutOfRange { name, value } => write!(f, "{name} = {value} is out of range"),
            Error::Vacuum { cell: Some(j), density } => {
                write!(f, "non-positive density {density} in cell {j}")
            }
            Error::Vacuum { cell: None, density } => write!(f, "non-positive density {density}"),
            Error::NegativeTemperature { cell, theta } => {
                write!(f, "non-positive thermal velocity {theta} in cell {cell}")
            }
            Error::NonFinite { cell } => write!(f, "non-finite coefficient in cell {cell}"),
            Error::DegenerateSpeed => f.write_str("maximal signal speed is zero"),
            Error::Unsolvable { mean } => {
                write!(f, "Poisson right side has non-zero mean {mean}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected length {expected}, found {found}")
            }
            Error::StepFailed { step, source } => write!(f, "step {step} failed: {source}"),
            Error::InsufficientPeaks { found } => {
                write!(f, "insufficient peaks: found {found}, need at least 3")
            }
            Error::InsufficientPoints { found } => {
                write!(f, "insufficient points: found {found}, need at least 3")
            }
            Error::DuplicateSpacing(dx) => write!(f, "duplicate grid spacing {dx}"),
            Error::NotMonotone => f.write_str("rate differences vanish or change sign"),
            Error::NotArithmetic => f.write_str("moment orders are not an arithmetic sequence"),
            Error::NoRecurrence => f.write_str("no recurrence in window"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, Error> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}
