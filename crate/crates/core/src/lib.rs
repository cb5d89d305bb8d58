//! Exact-arithmetic mutation of quivers with potential and of their
//! representations: quiver mutation, QP premutation and reduction via the
//! constructive splitting of the degree-2 part, representation mutation in
//! both directions, the morphism-level functors, and the natural isomorphism
//! certifying that the two directions are quasi-inverse.

pub mod error;
pub mod field;
pub mod matrix;
pub mod potential;
pub mod qp;
pub mod quiver;
pub mod subspace;

pub use error::{Error, Result};
pub use field::{Field, Scalar, DEFAULT_PRIME};
pub use matrix::Mat;
pub use potential::{Path, PathSum, Potential, RightEquivalence, Truncation};
pub use qp::{split, Sign, SplitResult, QP};
pub use quiver::{Arrow, ArrowId, Quiver, VertexId};
pub use subspace::{column_spaces, induced_map, make_chart, make_subspace_chart, Subspace, SubquotientChart};
