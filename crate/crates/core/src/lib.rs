//! Exact construction and verification of differential graded Lie algebra towers built from
//! strongly connected digraphs, over the p-local rationals.

pub mod cache;
pub mod dgl;
pub mod digraph;
pub mod field;
pub mod frobenius;
pub mod homotopy;
pub mod lie;
pub mod linalg;
pub mod plocal;
pub mod realization;
pub mod tensor;
pub mod verify;

pub use dgl::{DglError, DglPresentation, Scale};
pub use digraph::{Digraph, GroupTable, VertexPermutation};
pub use field::{Coeff, Mod61};
pub use lie::{LieBasisElement, LieExpression, MultiDegree};
pub use linalg::{Locality, SparseVector};
pub use plocal::{LocalPrime, LocalRing, PLocalRational};
pub use tensor::{Alphabet, GeneratorName, GradedGenerator, Letter, TensorDerivation, TensorElement, Word};
