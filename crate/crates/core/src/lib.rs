//! Tabulation hashing: simple, twisted, double and mixed constructions, the
//! classic baselines they are measured against, a sequential generator built
//! on the twisted scheme, the data structures that consume them (linear
//! probing, chaining, cuckoo, two-choice, minwise and k-partition sketches),
//! and the machinery to verify their distributional behavior exactly at tiny
//! geometries and statistically at desk scale.
//!
//! Keys are unsigned integers of at most 64 bits, read as vectors of
//! characters; see [`keyspace::TabConfig`] for the geometry. All hashers are
//! immutable after construction and safe to share across threads.

pub mod analysis;
pub mod apps;
mod error;
pub mod hashers;
pub mod keyspace;
pub mod prg;
pub mod tablefile;

pub use error::{Result, TabError};
pub use hashers::KeyHasher;
pub use keyspace::{EntropySource, Key, TabConfig};
