//! Generalized Neumann formulas.
//!
//! For a symmetric `A`, a non-real `z` and an admissible non-expanding
//! `T : D(T) ⊆ N_z(A) → N_z̄(A)`,
//!
//! ```text
//! D(B) = D(A) ∔ (T - E) D(T)
//! B (f + Tψ - ψ) = A f + z Tψ - z̄ ψ
//! ```
//!
//! and conversely `D(T) = N_z(A) ∩ R(B - z)`, `T ⊆ (B - z̄)(B - z)^{-1}`.
//! Isometric parameters give symmetric extensions; non-expanding ones give
//! dissipative extensions for `z` in the lower half-plane and accumulative
//! ones for `z` in the upper half-plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{self, check_point, check_symmetric, defect_data, defect_data_unchecked};
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CVec};
use crate::operators::{make_operator, DomainOperator};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterKind {
    Isometric,
    StrictlyContractive,
    Mixed,
}

/// A non-expanding `T` with `D(T) ⊆ N_z(A)` and `R(T) ⊆ N_z̄(A)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionParameter {
    #[serde(with = "io::complex")]
    pub z: Complex64,
    pub t: DomainOperator,
    pub kind: ParameterKind,
}

impl ContractionParameter {
    /// Validates the shape against `A`'s defect spaces at `z` and the
    /// contraction bound.
    pub fn new(a: &DomainOperator, z: Complex64, t: DomainOperator) -> Result<Self> {
        let dd = defect_data(a, z)?;
        cayley::check_parameter_shape(&t, &dd, cayley::SHAPE_SLACK)?;
        let t = t.with_tol(a.tol());
        let norm = t.norm();
        if norm > 1.0 + a.tol().max(1e-12) {
            return Err(Error::NotContractive { norm });
        }
        let kind = kind_of(&t);
        Ok(ContractionParameter { z, t, kind })
    }

    /// Skips validation; for parameters produced internally.
    pub(crate) fn from_parts(z: Complex64, t: DomainOperator) -> Self {
        let kind = kind_of(&t);
        ContractionParameter { z, t, kind }
    }

    pub fn empty(a: &DomainOperator, z: Complex64) -> Self {
        Self::from_parts(
            z,
            DomainOperator::trivial(a.ambient_dim()).with_tol(a.tol()),
        )
    }

    /// `||P_graph(T) - P_graph(T')||`.
    pub fn distance(&self, other: &ContractionParameter) -> f64 {
        self.t.graph_distance(&other.t)
    }
}

fn kind_of(t: &DomainOperator) -> ParameterKind {
    if t.is_isometric() {
        ParameterKind::Isometric
    } else if t.norm() < 1.0 - t.tol() {
        ParameterKind::StrictlyContractive
    } else {
        ParameterKind::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SelfAdjoint,
    Symmetric,
    Dissipative,
    Accumulative,
    /// `Im (Bv, v)` takes both signs; never produced by a non-expanding
    /// parameter.
    Indefinite,
}

/// The extension `B` together with what is known about it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub b: DomainOperator,
    pub parameter: ContractionParameter,
    pub classification: Classification,
    pub invertible: bool,
    pub defect_numbers_of_b: (usize, usize),
    #[serde(with = "io::opt_cvec")]
    pub kernel_witness: Option<CVec>,
}

/// Builds `B` from the Neumann formulas, refusing non-admissible
/// parameters.
pub fn extend(
    a: &DomainOperator,
    z: Complex64,
    param: &ContractionParameter,
) -> Result<ExtensionReport> {
    check_point(z)?;
    check_symmetric(a)?;
    let dd = defect_data(a, z)?;
    let t = &param.t;
    cayley::check_parameter_shape(t, &dd, cayley::SHAPE_SLACK)?;
    let u = cayley::cayley(a, z)?;
    let adm = cayley::admissibility_of(&u, t, a.tol());
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            witness: adm
                .witness
                .map(|w| w.iter().copied().collect())
                .unwrap_or_default(),
            margin: adm.margin,
        });
    }
    let b = neumann_operator(a, z, t)?;
    let classification = classify_operator(&b);
    let kernel_witness = b.kernel_witness();
    let defect_numbers_of_b = defect_data_unchecked(&b, z).defect_numbers;
    Ok(ExtensionReport {
        invertible: kernel_witness.is_none(),
        b,
        parameter: param.clone(),
        classification,
        defect_numbers_of_b,
        kernel_witness,
    })
}

/// `B` on `D(A) + (T - E) D(T)` without any admissibility check.
pub(crate) fn neumann_operator(
    a: &DomainOperator,
    z: Complex64,
    t: &DomainOperator,
) -> Result<DomainOperator> {
    let tf = t.domain().frame();
    let basis = linalg::hcat(a.domain().frame(), &(t.action() - tf));
    let images = linalg::hcat(a.action(), &(t.action() * z - tf * z.conj()));
    Ok(DomainOperator::from_basis(&basis, &images, a.tol())?.with_tol(a.tol()))
}

/// Recovers the Neumann parameter of an extension `B ⊇ A` at `z`.
pub fn recover_parameter(
    a: &DomainOperator,
    b: &DomainOperator,
    z: Complex64,
) -> Result<ContractionParameter> {
    recover_parameter_with(a, b, z, &Tolerances::default())
}

pub fn recover_parameter_with(
    a: &DomainOperator,
    b: &DomainOperator,
    z: Complex64,
    tols: &Tolerances,
) -> Result<ContractionParameter> {
    check_point(z)?;
    let residual = a.graph_inclusion_residual(b);
    if residual > tols.inclusion {
        return Err(Error::NotAnExtension { residual });
    }
    let dd = defect_data(a, z)?;
    let shifted = b.shifted(z);
    let range = shifted.range();
    let dom_t = dd.n_z.intersect_with_tol(&range, a.tol())?;
    // (B - z) g = ψ  ⇒  Tψ = (B - z̄) g
    let solve = linalg::pinv(shifted.action(), a.tol());
    let coeffs = solve * dom_t.frame();
    let images = b.shifted(z.conj()).action() * coeffs;
    let t = make_operator(dom_t, images)?.with_tol(a.tol());
    Ok(ContractionParameter::from_parts(z, t))
}

/// Labels an extension by the sign of `Im (Bv, v)` over `D(B)`, decided on
/// the eigenvalues of the imaginary part of the compression.
pub fn classify_operator(b: &DomainOperator) -> Classification {
    let g = b.compressed();
    let scale = linalg::op_norm(&g).max(1.0);
    let tol = b.tol() * scale;
    let im_part = (&g - g.adjoint()) * Complex64::new(0.0, -0.5);
    let ev = linalg::hermitian_eigenvalues(&im_part);
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    if lo >= -tol && hi <= tol {
        if b.domain().is_full() {
            Classification::SelfAdjoint
        } else {
            Classification::Symmetric
        }
    } else if lo >= -tol {
        Classification::Dissipative
    } else if hi <= tol {
        Classification::Accumulative
    } else {
        Classification::Indefinite
    }
}

pub fn classify(report: &ExtensionReport) -> Classification {
    classify_operator(&report.b)
}
