pub mod chebyshev;
pub mod extrapolation;
pub mod jet;
pub mod quadrature;

pub use extrapolation::{decay_order_fit, richardson, Extrapolation, PowerLawFit};
pub use jet::Jet;
