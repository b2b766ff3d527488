//! Range and defect subspaces, the Cayley transform and its inverse, the
//! forbidden operator and the admissibility test for Neumann parameters.
//!
//! For a symmetric `A` and non-real `z`:
//!
//! * `M_z = (A - z) D(A)`, `N_z = H ⊖ M_z`;
//! * `U_z : M_z → M_z̄`, `(A - z) f ↦ (A - z̄) f`, an isometry;
//! * a parameter `T : D(T) ⊆ N_z → N_z̄` is admissible iff `W_z = U_z ⊕ T`
//!   has no nonzero fixed vector;
//! * the forbidden operator `X_z` pairs `f ∈ N_z` with `ψ ∈ N_z̄` whenever
//!   `f - ψ ∈ (E - U_z) M_z = D(A)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Subspace;
use crate::io;
use crate::linalg::{self, CMat, CVec};
use crate::operators::{DomainOperator, LinearRelation};

pub const REAL_AXIS_GAP: f64 = 1e-8;

pub(crate) fn check_point(z: Complex64) -> Result<()> {
    if z.im.abs() < REAL_AXIS_GAP || !z.re.is_finite() || !z.im.is_finite() {
        Err(Error::RealPoint(z))
    } else {
        Ok(())
    }
}

pub(crate) fn check_symmetric(a: &DomainOperator) -> Result<()> {
    if a.is_symmetric() {
        Ok(())
    } else {
        Err(Error::NotSymmetric {
            deviation: a.symmetry_deviation(),
        })
    }
}

/// Range and defect subspaces of `A` at `z` and at `z̄`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectData {
    #[serde(with = "io::complex")]
    pub z: Complex64,
    pub m_z: Subspace,
    pub n_z: Subspace,
    pub m_zbar: Subspace,
    pub n_zbar: Subspace,
    pub defect_numbers: (usize, usize),
}

fn range_at(a: &DomainOperator, z: Complex64) -> Subspace {
    a.shifted(z).range()
}

/// Computes `M_z`, `N_z`, `M_z̄`, `N_z̄`; the `z̄` pair is computed
/// independently rather than by conjugation.
pub fn defect_data(a: &DomainOperator, z: Complex64) -> Result<DefectData> {
    check_point(z)?;
    check_symmetric(a)?;
    Ok(defect_data_unchecked(a, z))
}

/// The same subspaces without the symmetry precondition; used for
/// dissipative and accumulative extensions.
pub fn defect_data_unchecked(a: &DomainOperator, z: Complex64) -> DefectData {
    let m_z = range_at(a, z);
    let n_z = m_z.complement();
    let m_zbar = range_at(a, z.conj());
    let n_zbar = m_zbar.complement();
    let defect_numbers = (n_z.dim(), n_zbar.dim());
    DefectData {
        z,
        m_z,
        n_z,
        m_zbar,
        n_zbar,
        defect_numbers,
    }
}

/// `U_z(A) = (A - z̄)(A - z)^{-1}` with `D(U_z) = M_z`.
pub fn cayley(a: &DomainOperator, z: Complex64) -> Result<DomainOperator> {
    check_point(z)?;
    check_symmetric(a)?;
    let frame = a.domain().frame();
    let from = a.action() - frame * z;
    let to = a.action() - frame * z.conj();
    Ok(DomainOperator::from_basis(&from, &to, a.tol())?.with_tol(a.tol()))
}

/// `B = (z W - z̄)(W - E)^{-1}` as the relation
/// `{((W - E) w, (z W - z̄) w) : w ∈ D(W)}`.
pub fn inverse_cayley(w: &DomainOperator, z: Complex64) -> Result<LinearRelation> {
    check_point(z)?;
    let frame = w.domain().frame();
    let first = w.action() - frame;
    let second = w.action() * z - frame * z.conj();
    Ok(LinearRelation::from_pairs(&first, &second, w.tol()))
}

/// The forbidden operator as a relation, with its operator form when
/// single-valued.
#[derive(Debug, Clone)]
pub struct ForbiddenOperator {
    pub relation: LinearRelation,
    pub operator: Option<DomainOperator>,
}

impl ForbiddenOperator {
    pub fn is_single_valued(&self) -> bool {
        self.operator.is_some()
    }

    pub fn domain(&self) -> Subspace {
        self.relation.domain()
    }
}

/// `X_z(A) = {(f, ψ) ∈ N_z × N_z̄ : f - ψ ∈ D(A)}`, found as the null space
/// of `[N_z | -N_z̄ | -F]` where `F` frames `D(A)`.
pub fn forbidden_operator(a: &DomainOperator, z: Complex64) -> Result<ForbiddenOperator> {
    let dd = defect_data(a, z)?;
    Ok(forbidden_from_defects(a, &dd))
}

pub(crate) fn forbidden_from_defects(a: &DomainOperator, dd: &DefectData) -> ForbiddenOperator {
    let d = a.ambient_dim();
    let tol = a.tol();
    let n = dd.n_z.dim();
    let nb = dd.n_zbar.dim();
    let system = linalg::hcat(
        &linalg::hcat(dd.n_z.frame(), &(-dd.n_zbar.frame())),
        &(-a.domain().frame()),
    );
    let ns = linalg::null_space(&system, tol);
    let first = dd.n_z.frame() * ns.rows(0, n);
    let second = dd.n_zbar.frame() * ns.rows(n, nb);
    let relation = if ns.ncols() == 0 {
        LinearRelation::from_pairs(&CMat::zeros(d, 0), &CMat::zeros(d, 0), tol)
    } else {
        LinearRelation::from_pairs(&first, &second, tol)
    };
    let operator = relation.to_operator();
    ForbiddenOperator { relation, operator }
}

/// Outcome of the fixed-point admissibility test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Smallest singular value of `W_z - E` on `D(W_z)`.
    pub margin: f64,
    #[serde(with = "io::opt_cvec")]
    pub witness: Option<CVec>,
}

pub(crate) fn check_parameter_shape(t: &DomainOperator, dd: &DefectData, slack: f64) -> Result<()> {
    if t.ambient_dim() != dd.n_z.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: dd.n_z.ambient_dim(),
            actual: t.ambient_dim(),
        });
    }
    let dom_res = dd.n_z.inclusion_residual(t.domain());
    if dom_res > slack {
        return Err(Error::ParameterShapeViolation {
            reason: format!("D(T) leaves N_z (residual {dom_res:.3e})"),
        });
    }
    let act = t.action();
    let ran_res = linalg::op_norm(&(act - dd.n_zbar.projector() * act));
    if ran_res > slack * linalg::op_norm(act).max(1.0) {
        return Err(Error::ParameterShapeViolation {
            reason: format!("R(T) leaves N_zbar (residual {ran_res:.3e})"),
        });
    }
    Ok(())
}

/// Fixed-point test on `W_z = U_z(A) ⊕ T`.
pub fn is_admissible(
    a: &DomainOperator,
    z: Complex64,
    t: &DomainOperator,
) -> Result<Admissibility> {
    let dd = defect_data(a, z)?;
    check_parameter_shape(t, &dd, SHAPE_SLACK)?;
    let u = cayley(a, z)?;
    Ok(admissibility_of(&u, t, a.tol()))
}

/// Slack for `D(T) ⊆ N_z`, `R(T) ⊆ N_z̄`.
pub(crate) const SHAPE_SLACK: f64 = 1e-8;

pub(crate) fn admissibility_of(u: &DomainOperator, t: &DomainOperator, tol: f64) -> Admissibility {
    let frame = linalg::hcat(u.domain().frame(), t.domain().frame());
    let action = linalg::hcat(u.action(), t.action());
    let w_minus_e = &action - &frame;
    match linalg::smallest_singular(&w_minus_e) {
        None => Admissibility {
            admissible: true,
            margin: f64::INFINITY,
            witness: None,
        },
        Some((s, v)) => {
            let admissible = s > tol;
            let witness = (!admissible).then(|| linalg::normalize_phase(&(&frame * v)));
            Admissibility {
                admissible,
                margin: s,
                witness,
            }
        }
    }
}
