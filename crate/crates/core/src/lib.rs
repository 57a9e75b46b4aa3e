//! Gaussian area, entropy and density functionals on simplicial manifolds,
//! the rescaled swept boundary surface of a moving boundary, and
//! desk-scale verification of the monotonicity, slicing and translator
//! entropy inequalities.

pub mod error;
pub mod flow;
pub mod gaussian;
pub mod linalg;
pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod shapes;
pub mod simplicial;
pub mod slicing;
pub mod smf;
pub mod sweep;
pub mod zoo;

pub use error::{Error, Result};
pub use quadrature::{Estimate, QuadConfig};
pub use simplicial::{Projection, SimplicialManifold};
