use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The configuration lies outside every branch support, so the guidance
    /// velocity `j / rho` has a vanishing denominator.
    #[error(
        "velocity undefined at r_A = {r_a}, r_B = {r_b}, t = {t}: equilibrium density is zero"
    )]
    UndefinedVelocity { r_a: f64, r_b: f64, t: f64 },

    #[error("trajectory stalled after {events} events at t = {t} without branch separation")]
    Stall { events: usize, t: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
