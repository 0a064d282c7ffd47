//! Terminality, weighted blow-up and complement computations for
//! Brieskorn–Pham hypersurface singularities x₁^a₁ + … + x_k^a_k = 0.
//!
//! All arithmetic is exact. The main entry points are
//! [`terminality::is_terminal`], [`blowup::diff_boundary`],
//! [`complements::minimal_complement_index`] and [`pipeline::analyze`].

pub mod blowup;
pub mod bp_model;
pub mod complements;
pub mod error;
pub mod numerics;
pub mod pipeline;
pub mod search;
pub mod terminality;

pub use bp_model::{ExponentTuple, LatticeVector};
pub use error::{Error, Result};
pub use numerics::Rational;
