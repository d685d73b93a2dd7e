#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod ensemble;
pub mod error;
pub mod nonlocality;
pub mod packet;
pub mod spin;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};

/// Library version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
