//! Correction of approximate unitary representations of graph products of
//! abelian groups over chordal graphs.
//!
//! * [`chordal`]: graphs, chordality recognition, construction sequences.
//! * [`words`]: normal forms for words in graph products.
//! * [`linalg`]: dense complex matrices, Hermitian eigensolver, polar factor.
//! * [`reps`]: representations, relation defects, generators, perturbation.
//! * [`stabilize`]: the recursive correction and its report.
//! * [`cli`]: the `graphstab` command line.

pub mod chordal;
pub mod cli;
pub mod linalg;
pub mod reps;
pub mod stabilize;
pub mod words;

pub use chordal::{construction_sequence, is_chordal, Chordality, ConstructionSequence, Graph, GraphError};
pub use linalg::{hs_distance, hs_norm, ComplexMatrix, C64};
pub use reps::{relation_defect, DefectReport, Rep, RepError, VertexData, VertexGroup};
pub use stabilize::{stabilize, verify_exact, StabilizeError, StabilizeParams, StabilizeReport};
pub use words::{normal_form, parse_word, words_equal, Word};
