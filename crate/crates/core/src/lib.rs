//! Extension theory of symmetric operators with non-dense domains in
//! finite-dimensional complex Hilbert spaces.
//!
//! The crate builds extensions of a symmetric operator `A` through the
//! generalized Neumann formulas, decides their invertibility three ways,
//! constructs invertible self-adjoint (exit-space) extensions, and evaluates
//! generalized resolvents both by compression and through the Shtraus
//! parametrization.

pub mod cayley;
pub mod error;
pub mod hilbert;
pub mod identities;
pub mod instances;
pub mod invertibility;
pub mod io;
pub mod linalg;
pub mod neumann;
pub mod operators;
pub mod resolvents;
pub mod tolerances;

pub use cayley::{
    cayley, defect_data, forbidden_operator, inverse_cayley, is_admissible, Admissibility,
    DefectData,
};
pub use error::{Error, Result};
pub use hilbert::{direct_sum_embed, orthonormalize, SectorSpec, Subspace, DEFAULT_TOL};
pub use identities::{verify_suite, SuiteOptions, SuiteReport};
pub use instances::{gen_symmetric, truncated_shift, InstanceSpec};
pub use invertibility::{
    build_invertible_selfadjoint, check_invertibility, double, ExtensionChain, InvertibilityVerdict,
};
pub use linalg::{CMat, CVec};
pub use neumann::{
    classify, extend, recover_parameter, Classification, ContractionParameter, ExtensionReport,
    ParameterKind,
};
pub use num_complex::Complex64;
pub use operators::{make_operator, DomainOperator, LinearRelation};
pub use resolvents::{EmbeddedExtension, IAdmissibilityVerdict, ParameterFunction};
pub use tolerances::Tolerances;
