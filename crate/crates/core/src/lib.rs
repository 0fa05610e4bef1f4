pub mod catenoid;
pub mod continuation;
pub mod enclosing;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod radial;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Version tag carried by every serialized report and summary.
pub const SCHEMA_VERSION: u32 = 1;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/catenoids.md")]
    mod catenoids {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
