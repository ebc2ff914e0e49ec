//! Short words in `SL_m(Z/p^n Z)` over an arbitrary generating set.
//!
//! Words are built by recursive commutator lifting along the congruence
//! filtration, starting from exact search tables at low levels, and every
//! emitted word is verified by exact evaluation.

pub mod error;
pub mod lab;
pub mod lie;
pub mod logexp;
pub mod matrix;
pub mod problem;
pub mod residue;
pub mod search;
pub mod selftest;
pub mod synth;
pub mod word;

pub use error::{Error, Result};
pub use lie::{bracket, solve_bracket_sl2, solve_two_brackets, BracketPair, BracketQuad, LieElement};
pub use matrix::ModMatrix;
pub use residue::{GroupSpec, Residue, ResidueRing};
pub use synth::{build_base_table, verify, BaseMethod, BaseTable, SynthConfig, Synthesis, Synthesizer};
pub use word::{GeneratingSet, Word};
