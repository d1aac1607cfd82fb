//! Exact intersection theory on iterated blow-up towers and parabolic slope asymptotics.

pub mod bundle;
pub mod cone;
pub mod error;
pub mod lattice;
pub mod par;
pub mod poly;
pub mod rational;
pub mod report;
pub mod ring;
pub mod scenario;
pub mod selftest;
pub mod slope;
pub mod stability;

pub use error::{Error, Result};
pub use par::Execution;
pub use rational::Rational;
