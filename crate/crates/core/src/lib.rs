//! Symbolic computation in the free factor complex of F₂ = ⟨a, b⟩.

pub mod conjugacy;
pub mod error;
pub mod export;
pub mod factor_graph;
pub mod farey;
pub mod golden;
pub mod model;
pub mod primitive;
pub mod word;

pub use error::{F2Error, ParseWordError, Result};
pub use factor_graph::BlockGraph;
pub use primitive::{Automorphism, Vertex};
pub use word::{CyclicWord, Gen, Letter, Word};
