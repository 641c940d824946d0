//! Exact divisor theory on compact tropical curves (metric graphs).
//!
//! All lengths, offsets and function values are exact rationals. The crate
//! covers linear equivalence, reduced divisors, the reduced-divisor map of a
//! divisor, ranks with Riemann–Roch checks, and the special
//! divisors built on them (Weierstrass points, very ampleness, the
//! classification of curves whose canonical divisor is not very ample).

pub mod corpus;
pub mod divisor;
pub mod error;
pub mod graph;
pub mod io;
pub mod plfunction;
pub mod rational;
pub mod rank;
pub mod redmap;
pub mod reduction;
pub mod special;
mod workgraph;

pub use divisor::Divisor;
pub use error::{Error, Result};
pub use graph::{Edge, Germ, MetricGraph, PointOnGraph};
pub use plfunction::PLFunction;
pub use rational::Rational;
