//! Weighted dual graphs of rational curves on smooth surfaces, the `D^♮`
//! correction divisor, and the explicit families where `K + D^♮` is trivial
//! or canonical.

pub mod canonical;
mod exact;
pub mod families;
pub mod graph;
pub mod notation;
pub mod twig;
pub mod verify;

pub use twig::{Twig, TwigError, TwigParts};
pub use graph::{DualGraph, GraphError, IntersectionMatrix, ShapeReport, VertexId};
pub use canonical::{
    c_pairing, classify_k_type, compute_dnatural, format_rational, CanonicalError, Classification,
    DNatural, KType,
};
pub use families::{
    build_family, build_family_unbounded, classify_family, figure1_graph, figure1_spec,
    predicted_k_type, FamilyError, FamilyInstance, FamilyMatch, NotInList, Stage,
};
pub use notation::{parse_dgn, parse_twig, to_dgn, ParseError};
pub use verify::{run_suite, Budget, Report, Suite, SuiteRun};
