use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place so that
/// reports can embed the set they were produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Rank and kernel decisions.
    pub rank: f64,
    /// Graph-inclusion slack before `NotAnExtension` is raised.
    pub inclusion: f64,
    /// Decision margin below which an invertibility instance is borderline.
    pub margin: f64,
    /// Minimum `|Im z|` for a base point.
    pub real_axis: f64,
    /// Upper bound on the discrete liminf proxy for I-admissibility.
    pub rate_bound: f64,
    /// Kernel threshold for the extrapolated boundary limit.
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            inclusion: 1e-8,
            margin: 1e-6,
            real_axis: 1e-8,
            rate_bound: 1e3,
            limit: 1e-6,
        }
    }
}
