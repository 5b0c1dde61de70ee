//! Synthesis of rotated surface codes onto sparse device graphs.

pub mod allocate;
pub mod arch;
pub mod bridge;
pub mod circuit;
pub mod driver;
pub mod error;
pub mod geom;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
