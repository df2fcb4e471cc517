//! Asymptotic *-distributions of block-modified Wishart matrices.
//!
//! The crate covers the partition calculus behind easy and twisted block maps,
//! exact generalized *-moments of their Choi matrices, compound free Poisson
//! limits, structural classification of symmetric partitions, and Monte Carlo
//! verification of the limits.

pub mod classify;
pub mod error;
pub mod free_poisson;
pub mod maps;
pub mod moments;
pub mod partition;
pub mod wishart;
pub mod word;

pub use error::{Error, Result};
pub use free_poisson::{AtomicMeasure, CompoundFreePoissonLaw};
pub use maps::{ChoiMatrix, CMatrix, LinearBlockMap};
pub use moments::{MomentTable, MultiplicativityReport};
pub use partition::{Partition, Permutation};
pub use word::{Exponent, ExponentWord};
