pub mod conserved;
pub mod error;
pub mod integrator;
pub mod morawetz;
pub mod scattering;
pub mod spectral;
pub mod virial;

pub use error::{NlsError, Result};
