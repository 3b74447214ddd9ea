use core::fmt;

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The inertia matrix is too badly conditioned to invert.
    SingularMass { condition: f64 },
    /// A mass transform would leave a link with zero or negative mass.
    NonPositiveMass { m1: f64, m2: f64 },
    /// The closed loop left the divergence envelope or produced a non-finite value.
    Diverged { time: f64, norm: f64 },
    /// A metric window contained no samples.
    EmptyWindow { t_start: f64 },
    /// A comparison table was requested without its reference row.
    MissingBaseline(String),
    /// A scenario or configuration violates one of its invariants.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularMass { condition } => {
                write!(f, "inertia matrix is singular (condition number {condition:e})")
            }
            Error::NonPositiveMass { m1, m2 } => {
                write!(f, "mass transform gives non-positive masses ({m1}, {m2})")
            }
            Error::Diverged { time, norm } => {
                write!(f, "closed loop diverged at t = {time} s (|x| + |xdot| = {norm})")
            }
            Error::EmptyWindow { t_start } => write!(f, "no samples at or after t = {t_start} s"),
            Error::MissingBaseline(label) => write!(f, "comparison is missing the '{label}' row"),
            Error::Invalid(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
