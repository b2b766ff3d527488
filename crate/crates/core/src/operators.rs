//! Linear operators on C^d with explicit, possibly non-dense domains, and
//! linear relations (graph subspaces of C^d ⊕ C^d).
//!
//! Every operator is closed since everything here is finite-dimensional;
//! closedness hypotheses need no checking.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, Subspace, DEFAULT_TOL};
use crate::io::cmat;
use crate::linalg::{self, CMat, CVec};

/// A linear operator `A` with domain `span(domain.frame)` acting by
/// `domain.frame * c  ↦  action * c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct DomainOperator {
    domain: Subspace,
    action: CMat,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    ambient_dim: usize,
    domain_frame: Vec<Vec<[f64; 2]>>,
    action: Vec<Vec<[f64; 2]>>,
}

impl From<DomainOperator> for OperatorRepr {
    fn from(a: DomainOperator) -> Self {
        OperatorRepr {
            ambient_dim: a.ambient_dim(),
            domain_frame: cmat::to_rows(a.domain.frame()),
            action: cmat::to_rows(&a.action),
        }
    }
}

impl TryFrom<OperatorRepr> for DomainOperator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let d = r.ambient_dim;
        let mut frame = cmat::from_rows(&r.domain_frame).map_err(Error::Malformed)?;
        if frame.nrows() == 0 {
            frame = CMat::zeros(d, 0);
        }
        check_dim(d, frame.nrows())?;
        let k = frame.ncols();
        let action = cmat::from_rows(&r.action).map_err(Error::Malformed)?;
        let action = cmat::reshape(action, d, k).map_err(Error::Malformed)?;
        make_operator(Subspace::from_frame(frame, DEFAULT_TOL)?, action)
    }
}

pub fn make_operator(domain: Subspace, action: CMat) -> Result<DomainOperator> {
    let expected = (domain.ambient_dim(), domain.dim());
    if action.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: action.shape(),
        });
    }
    Ok(DomainOperator { domain, action })
}

impl DomainOperator {
    /// Operator with domain spanned by the columns of `basis` sending column
    /// `j` to column `j` of `images`. Linear dependencies among the basis
    /// columns are resolved by least squares.
    pub fn from_basis(basis: &CMat, images: &CMat, tol: f64) -> Result<Self> {
        if basis.shape() != images.shape() {
            return Err(Error::ShapeMismatch {
                expected: basis.shape(),
                actual: images.shape(),
            });
        }
        let domain = Subspace::span_of(basis, tol);
        let coords = domain.frame().adjoint() * basis;
        let action = images * linalg::pinv(&coords, tol);
        Ok(DomainOperator { domain, action })
    }

    /// Total operator given by a square matrix.
    pub fn from_matrix(m: &CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "from_matrix needs a square matrix");
        DomainOperator {
            domain: Subspace::full(m.nrows()),
            action: m.clone(),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_matrix(&linalg::identity(d))
    }

    /// The operator with domain `{0}`.
    pub fn trivial(d: usize) -> Self {
        DomainOperator {
            domain: Subspace::zero(d),
            action: CMat::zeros(d, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain.ambient_dim()
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn action(&self) -> &CMat {
        &self.action
    }

    pub fn tol(&self) -> f64 {
        self.domain.tol()
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.domain = self.domain.with_tol(tol);
        self
    }

    /// `action * Fᴴ`: acts as the operator on `D(A)` and as zero on its
    /// orthogonal complement.
    pub fn padded_matrix(&self) -> CMat {
        &self.action * self.domain.frame().adjoint()
    }

    /// The full matrix of a total operator.
    pub fn full_matrix(&self) -> Option<CMat> {
        self.domain.is_full().then(|| self.padded_matrix())
    }

    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        check_dim(self.ambient_dim(), v.len())?;
        let residual = self.domain.residual(v);
        if residual > self.tol() * v.norm() {
            return Err(Error::DomainViolation { residual });
        }
        Ok(&self.action * self.domain.coords(v))
    }

    /// The Gram form `Fᴴ · action`, the compression of `A` to its domain.
    pub fn compressed(&self) -> CMat {
        self.domain.frame().adjoint() * &self.action
    }

    /// `(Af, g) = (f, Ag)` on `D(A)`: the compression is Hermitian.
    pub fn symmetry_deviation(&self) -> f64 {
        linalg::hermitian_part_deviation(&self.compressed())
    }

    pub fn is_symmetric(&self) -> bool {
        let g = self.compressed();
        linalg::hermitian_part_deviation(&g) <= self.tol() * linalg::op_norm(&g).max(1.0)
    }

    /// Smallest singular value of the action in domain coordinates (the
    /// injectivity margin), `+inf` on the zero domain.
    pub fn injectivity_margin(&self) -> f64 {
        linalg::smallest_singular(&self.action).map_or(f64::INFINITY, |(s, _)| s)
    }

    pub fn is_injective(&self) -> bool {
        self.injectivity_margin() > self.tol()
    }

    /// Unit kernel vector (phase-normalized) when the operator is not
    /// injective.
    pub fn kernel_witness(&self) -> Option<CVec> {
        let (s, v) = linalg::smallest_singular(&self.action)?;
        (s <= self.tol()).then(|| linalg::normalize_phase(&(self.domain.frame() * v)))
    }

    pub fn range(&self) -> Subspace {
        Subspace::span_of(&self.action, self.tol())
    }

    pub fn is_isometric(&self) -> bool {
        let k = self.domain.dim();
        let gram = self.action.adjoint() * &self.action;
        linalg::op_norm(&(gram - linalg::identity(k))) <= self.tol()
    }

    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.action)
    }

    pub fn is_nonexpanding(&self) -> bool {
        self.norm() <= 1.0 + self.tol()
    }

    pub fn graph(&self) -> LinearRelation {
        let m = linalg::vcat(self.domain.frame(), &self.action);
        LinearRelation {
            ambient_dim: self.ambient_dim(),
            graph: Subspace::span_of(&m, self.tol()),
        }
    }

    /// `||P_graph(A) - P_graph(B)||`.
    pub fn graph_distance(&self, other: &DomainOperator) -> f64 {
        self.graph().graph.distance(&other.graph().graph)
    }

    /// Residual of `graph(self) ⊆ graph(other)`.
    pub fn graph_inclusion_residual(&self, other: &DomainOperator) -> f64 {
        other.graph().graph.inclusion_residual(&self.graph().graph)
    }

    pub fn inverse(&self) -> Result<DomainOperator> {
        let margin = self.injectivity_margin();
        if margin <= self.tol() {
            return Err(Error::NotInvertible { margin });
        }
        let out = DomainOperator::from_basis(&self.action, self.domain.frame(), self.tol())?;
        Ok(out.with_tol(self.tol()))
    }

    /// `A - z E` on `D(A)`.
    pub fn shifted(&self, z: Complex64) -> DomainOperator {
        DomainOperator {
            domain: self.domain.clone(),
            action: &self.action - self.domain.frame() * z,
        }
    }

    pub fn scale(&self, s: Complex64) -> DomainOperator {
        DomainOperator {
            domain: self.domain.clone(),
            action: &self.action * s,
        }
    }

    pub fn negate(&self) -> DomainOperator {
        self.scale(-linalg::ONE)
    }

    /// `A ⊕ B` on `C^{d1} ⊕ C^{d2}`.
    pub fn direct_sum(&self, other: &DomainOperator) -> DomainOperator {
        let frame = linalg::block_diag(self.domain.frame(), other.domain.frame());
        DomainOperator {
            domain: Subspace::from_frame_unchecked(frame, self.tol()),
            action: linalg::block_diag(&self.action, &other.action),
        }
    }

    /// `self ∘ inner`, defined on `{v ∈ D(inner) : inner v ∈ D(self)}`.
    pub fn compose(&self, inner: &DomainOperator) -> Result<DomainOperator> {
        check_dim(self.ambient_dim(), inner.ambient_dim())?;
        let outside = &inner.action - self.domain.projector() * &inner.action;
        let ok = linalg::null_space(&outside, self.tol());
        let basis = inner.domain.frame() * &ok;
        let images = &self.action * self.domain.frame().adjoint() * (&inner.action * &ok);
        Ok(DomainOperator::from_basis(&basis, &images, self.tol())?.with_tol(self.tol()))
    }

    /// Restriction to a subspace of the domain.
    pub fn restrict(&self, sub: &Subspace) -> Result<DomainOperator> {
        check_dim(self.ambient_dim(), sub.ambient_dim())?;
        let residual = self.domain.inclusion_residual(sub);
        if residual > self.tol().sqrt().max(self.tol()) {
            return Err(Error::DomainViolation { residual });
        }
        let action = &self.action * (self.domain.frame().adjoint() * sub.frame());
        Ok(DomainOperator {
            domain: sub.clone().with_tol(self.tol()),
            action,
        })
    }

    /// Pushes the operator through an isometry `J : C^d → C^D`, giving
    /// `J A J*` on `J D(A)`.
    pub fn embed(&self, j: &CMat) -> DomainOperator {
        DomainOperator {
            domain: Subspace::from_frame_unchecked(j * self.domain.frame(), self.tol()),
            action: j * &self.action,
        }
    }
}

pub fn direct_sum_op(a: &DomainOperator, b: &DomainOperator) -> DomainOperator {
    a.direct_sum(b)
}

pub fn negate(a: &DomainOperator) -> DomainOperator {
    a.negate()
}

pub fn inverse_op(a: &DomainOperator) -> Result<DomainOperator> {
    a.inverse()
}

/// A linear relation in `C^d ⊕ C^d`, stored as its graph subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearRelation {
    pub ambient_dim: usize,
    pub graph: Subspace,
}

impl LinearRelation {
    pub fn from_pairs(first: &CMat, second: &CMat, tol: f64) -> Self {
        LinearRelation {
            ambient_dim: first.nrows(),
            graph: Subspace::span_of(&linalg::vcat(first, second), tol),
        }
    }

    fn first_rows(&self) -> CMat {
        self.graph.frame().rows(0, self.ambient_dim).into_owned()
    }

    fn second_rows(&self) -> CMat {
        self.graph
            .frame()
            .rows(self.ambient_dim, self.ambient_dim)
            .into_owned()
    }

    /// The multivalued part `{ψ : (0, ψ) ∈ R}`.
    pub fn multivalued_part(&self) -> Subspace {
        let tol = self.graph.tol();
        let ns = linalg::null_space(&self.first_rows(), tol);
        Subspace::span_of(&(self.second_rows() * ns), tol)
    }

    pub fn domain(&self) -> Subspace {
        Subspace::span_of(&self.first_rows(), self.graph.tol())
    }

    pub fn is_operator(&self) -> bool {
        self.multivalued_part().is_zero()
    }

    pub fn to_operator(&self) -> Option<DomainOperator> {
        if !self.is_operator() {
            return None;
        }
        let tol = self.graph.tol();
        DomainOperator::from_basis(&self.first_rows(), &self.second_rows(), tol)
            .ok()
            .map(|op| op.with_tol(tol))
    }
}

pub fn relation_is_operator(r: &LinearRelation) -> bool {
    r.is_operator()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::orthonormalize;
    use crate::linalg::{basis_vector, c, diag, I, ONE, ZERO};

    fn worked_a() -> DomainOperator {
        let dom = orthonormalize(&[basis_vector(2, 0)], 2, 1e-12).unwrap();
        make_operator(dom, CMat::from_column_slice(2, 1, &[ONE, ZERO])).unwrap()
    }

    #[test]
    fn make_operator_examples() {
        let a = worked_a();
        assert_eq!(a.domain().dim(), 1);
        let e = DomainOperator::identity(2);
        assert_eq!(e.full_matrix().unwrap(), linalg::identity(2));
        let t = DomainOperator::trivial(2);
        assert_eq!(t.domain().dim(), 0);
        assert!(make_operator(Subspace::full(2), CMat::zeros(2, 1)).is_err());
    }

    #[test]
    fn apply_examples() {
        let a = worked_a();
        let v = CVec::from_column_slice(&[c(2.0, 0.0), ZERO]);
        assert!((a.apply(&v).unwrap() - &v).norm() < 1e-15);
        assert!(matches!(
            a.apply(&basis_vector(2, 1)),
            Err(Error::DomainViolation { .. })
        ));
        assert_eq!(a.apply(&CVec::zeros(2)).unwrap().norm(), 0.0);
    }

    #[test]
    fn symmetry_examples() {
        assert!(worked_a().is_symmetric());
        let dom = orthonormalize(&[basis_vector(2, 0)], 2, 1e-12).unwrap();
        let b = make_operator(dom, CMat::from_column_slice(2, 1, &[I, ZERO])).unwrap();
        assert!(!b.is_symmetric());
        let h = CMat::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(-3.0, 0.0)],
        );
        assert!(DomainOperator::from_matrix(&h).is_symmetric());
    }

    #[test]
    fn injectivity_and_inverse_examples() {
        let singular = DomainOperator::from_matrix(&diag(&[ONE, ZERO]));
        assert!(!singular.is_injective());
        assert!(matches!(
            singular.inverse(),
            Err(Error::NotInvertible { .. })
        ));
        let w = singular.kernel_witness().unwrap();
        assert!((w - basis_vector(2, 1)).norm() < 1e-12);
        assert!(DomainOperator::from_matrix(&diag(&[ONE, c(0.3, 0.0)])).is_injective());
        assert!(DomainOperator::trivial(3).is_injective());

        let a = worked_a();
        assert!(a.inverse().unwrap().graph_distance(&a) < 1e-14);
        let d = DomainOperator::from_matrix(&diag(&[c(2.0, 0.0), c(3.0, 0.0)]));
        let inv = d.inverse().unwrap().full_matrix().unwrap();
        assert!((inv - diag(&[c(0.5, 0.0), c(1.0 / 3.0, 0.0)])).norm() < 1e-14);
    }

    #[test]
    fn isometry_examples() {
        let dom = orthonormalize(&[basis_vector(2, 1)], 2, 1e-12).unwrap();
        let mk = |s: f64| {
            make_operator(
                dom.clone(),
                CMat::from_column_slice(2, 1, &[ZERO, c(s, 0.0)]),
            )
            .unwrap()
        };
        assert!(mk(-1.0).is_isometric() && mk(-1.0).is_nonexpanding());
        assert!(!mk(0.5).is_isometric() && mk(0.5).is_nonexpanding());
        assert!(!mk(2.0).is_isometric() && !mk(2.0).is_nonexpanding());
    }

    #[test]
    fn graph_examples() {
        let g = DomainOperator::identity(1).graph();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Subspace::span_of(
            &CMat::from_column_slice(2, 1, &[c(r, 0.0), c(r, 0.0)]),
            1e-12,
        );
        assert!(g.graph.distance(&expected) < 1e-14);
        assert!(g.is_operator());
        let vertical = LinearRelation::from_pairs(
            &CMat::zeros(2, 1),
            &CMat::from_column_slice(2, 1, &[ONE, ZERO]),
            1e-12,
        );
        assert!(!relation_is_operator(&vertical));
        assert!(worked_a().graph().is_operator());
    }

    #[test]
    fn combinators() {
        let a = worked_a();
        let sum = direct_sum_op(&a, &negate(&a));
        let f = CVec::from_column_slice(&[ONE, ZERO, ONE, ZERO]);
        let out = sum.apply(&f).unwrap();
        assert!((out - CVec::from_column_slice(&[ONE, ZERO, -ONE, ZERO])).norm() < 1e-14);
        assert_eq!(sum.graph().graph.dim(), 2);

        let span_e1 = orthonormalize(&[basis_vector(2, 0)], 2, 1e-12).unwrap();
        let inc = DomainOperator::identity(2).restrict(&span_e1).unwrap();
        assert!(inc.graph_distance(&a) < 1e-14);
        assert!(a.restrict(&Subspace::full(2)).is_err());

        let d = DomainOperator::from_matrix(&diag(&[c(2.0, 0.0), c(-1.0, 0.0)]));
        let id = d.inverse().unwrap().compose(&d).unwrap();
        assert!(id.graph_distance(&DomainOperator::identity(2)) < 1e-14);
    }

    #[test]
    fn operator_json_schema() {
        let a = worked_a();
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["ambient_dim"], 2);
        assert!(json.get("domain_frame").is_some() && json.get("action").is_some());
        let back: DomainOperator = serde_json::from_value(json).unwrap();
        assert!(back.graph_distance(&a) < 1e-15);
        let t: DomainOperator =
            serde_json::from_str(r#"{"ambient_dim":2,"domain_frame":[[],[]],"action":[[],[]]}"#)
                .unwrap();
        assert_eq!(t.domain().dim(), 0);
    }
}
