pub mod channels;
pub mod designs;
pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod optics;
pub mod search;
pub mod sic_measurement;
pub mod suite;
pub mod witness;

pub use error::{Error, Result};
