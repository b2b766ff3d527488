//! Subspaces of C^d stored as orthonormal frames, and the small amount of
//! geometry built on them: projections, complements, intersections and
//! canonical direct-sum embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::cmat;
use crate::linalg::{self, CMat, CVec};

/// Default rank tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A closed subspace of C^d given by a `d x k` matrix with orthonormal
/// columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SubspaceRepr", into = "SubspaceRepr")]
pub struct Subspace {
    ambient_dim: usize,
    frame: CMat,
    tol: f64,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    frame: Vec<Vec<[f64; 2]>>,
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr {
            ambient_dim: s.ambient_dim,
            frame: cmat::to_rows(&s.frame),
        }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;

    fn try_from(r: SubspaceRepr) -> Result<Self> {
        let mut frame = cmat::from_rows(&r.frame).map_err(Error::Malformed)?;
        if frame.nrows() == 0 {
            frame = CMat::zeros(r.ambient_dim, 0);
        }
        check_dim(r.ambient_dim, frame.nrows())?;
        Subspace::from_frame(frame, DEFAULT_TOL)
    }
}

impl Subspace {
    /// Wraps a frame after checking orthonormality (to `sqrt(tol)`, which
    /// admits frames that went through a round trip of text serialization).
    pub fn from_frame(frame: CMat, tol: f64) -> Result<Self> {
        let k = frame.ncols();
        let d = frame.nrows();
        if k > d {
            return Err(Error::ShapeMismatch {
                expected: (d, d),
                actual: (d, k),
            });
        }
        let gram = frame.adjoint() * &frame;
        let dev = (gram - linalg::identity(k)).norm();
        if dev > tol.sqrt().max(1e-8) {
            return Err(Error::Malformed(format!(
                "frame columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Subspace {
            ambient_dim: d,
            frame,
            tol,
        })
    }

    pub(crate) fn from_frame_unchecked(frame: CMat, tol: f64) -> Self {
        Subspace {
            ambient_dim: frame.nrows(),
            frame,
            tol,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self::from_frame_unchecked(CMat::zeros(ambient_dim, 0), DEFAULT_TOL)
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::from_frame_unchecked(linalg::identity(ambient_dim), DEFAULT_TOL)
    }

    /// Orthonormal frame for the span of the columns of `m`.
    pub fn span_of(m: &CMat, tol: f64) -> Self {
        Self::from_frame_unchecked(linalg::column_space(m, tol), tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn projector(&self) -> CMat {
        &self.frame * self.frame.adjoint()
    }

    pub fn project(&self, v: &CVec) -> Result<CVec> {
        check_dim(self.ambient_dim, v.len())?;
        Ok(&self.frame * (self.frame.adjoint() * v))
    }

    /// Coordinates of `v` in the frame (no membership check).
    pub fn coords(&self, v: &CVec) -> CVec {
        self.frame.adjoint() * v
    }

    /// `||v - P v||`, the distance of `v` from the subspace.
    pub fn residual(&self, v: &CVec) -> f64 {
        (v - &self.frame * (self.frame.adjoint() * v)).norm()
    }

    /// Relative membership test `||v - P v|| <= tol * ||v||`.
    pub fn contains(&self, v: &CVec, tol: f64) -> bool {
        self.residual(v) <= tol * v.norm()
    }

    /// Whether every frame column of `other` lies in `self` within `tol`.
    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        self.inclusion_residual(other) <= tol
    }

    /// `||(I - P_self) F_other||`.
    pub fn inclusion_residual(&self, other: &Subspace) -> f64 {
        if other.is_zero() {
            return 0.0;
        }
        let r = &other.frame - &self.frame * (self.frame.adjoint() * &other.frame);
        linalg::op_norm(&r)
    }

    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim;
        if self.is_zero() {
            return Subspace::full(d).with_tol(self.tol);
        }
        if self.is_full() {
            return Subspace::zero(d).with_tol(self.tol);
        }
        let proj = linalg::identity(d) - self.projector();
        // the complementary projector has singular values 0 or 1
        let frame = linalg::column_space(&proj, 0.5);
        Self::from_frame_unchecked(frame, self.tol)
    }

    /// Cosines of the principal angles with `other`, in decreasing order,
    /// together with the matching unit vectors in `self`.
    pub fn principal_cosines(&self, other: &Subspace) -> Result<Vec<(f64, CVec)>> {
        check_dim(self.ambient_dim, other.ambient_dim)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Vec::new());
        }
        let cross = self.frame.adjoint() * &other.frame;
        let dec = linalg::svd(&cross);
        Ok(dec
            .s
            .iter()
            .enumerate()
            .map(|(j, &s)| (s.min(1.0), &self.frame * dec.u.column(j)))
            .collect())
    }

    /// Intersection by principal-angle thresholding: directions whose
    /// cosine is at least `1 - tol` are kept.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.intersect_with_tol(other, self.tol)
    }

    pub fn intersect_with_tol(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        let kept: Vec<CVec> = self
            .principal_cosines(other)?
            .into_iter()
            .filter(|(cos, _)| *cos >= 1.0 - tol)
            .map(|(_, v)| v)
            .collect();
        let m = linalg::from_columns(self.ambient_dim, &kept);
        Ok(Subspace::span_of(&m, self.tol))
    }

    pub fn span_sum(&self, other: &Subspace) -> Result<Subspace> {
        check_dim(self.ambient_dim, other.ambient_dim)?;
        Ok(Subspace::span_of(
            &linalg::hcat(&self.frame, &other.frame),
            self.tol,
        ))
    }

    /// Spectral-norm distance between orthogonal projectors; 1 when the
    /// dimensions differ.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return 1.0;
        }
        linalg::op_norm(&(self.projector() - other.projector()))
    }

    /// Image of the subspace under a linear map given as a matrix.
    pub fn image(&self, m: &CMat) -> Result<Subspace> {
        if m.ncols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                actual: m.ncols(),
            });
        }
        Ok(Subspace::span_of(&(m * &self.frame), self.tol))
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Orthonormal frame for the span of `vectors`, rank decided by singular
/// values against `tol`.
pub fn orthonormalize(vectors: &[CVec], ambient_dim: usize, tol: f64) -> Result<Subspace> {
    for v in vectors {
        check_dim(ambient_dim, v.len())?;
    }
    let m = linalg::from_columns(ambient_dim, vectors);
    Ok(Subspace::span_of(&m, tol))
}

/// Canonical embeddings of `C^{d_i}` into `C^{sum d_i}` and the matching
/// coordinate projections.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub total_dim: usize,
    pub embeddings: Vec<CMat>,
}

impl DirectSum {
    pub fn projection(&self, part: usize) -> CMat {
        self.embeddings[part].adjoint()
    }

    pub fn offset(&self, part: usize) -> usize {
        self.embeddings[..part].iter().map(CMat::ncols).sum()
    }
}

pub fn direct_sum_embed(parts: &[usize]) -> DirectSum {
    let total: usize = parts.iter().sum();
    let mut offset = 0;
    let embeddings = parts
        .iter()
        .map(|&d| {
            let mut e = CMat::zeros(total, d);
            for k in 0..d {
                e[(offset + k, k)] = linalg::ONE;
            }
            offset += d;
            e
        })
        .collect();
    DirectSum {
        total_dim: total,
        embeddings,
    }
}

/// The sector `{lambda : eps < |arg lambda| < pi - eps}` in the half-plane
/// selected by `half_plane_sign`, sampled along rays at decreasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub half_plane_sign: i8,
    pub epsilon: f64,
    pub ray_angles: Vec<f64>,
    pub radii: Vec<f64>,
}

impl SectorSpec {
    pub fn new(
        half_plane_sign: i8,
        epsilon: f64,
        ray_angles: Vec<f64>,
        radii: Vec<f64>,
    ) -> Result<Self> {
        let s = SectorSpec {
            half_plane_sign,
            epsilon,
            ray_angles,
            radii,
        };
        s.validate()?;
        Ok(s)
    }

    /// Three rays (the bisector and the two rays `pi/6` inside the sector
    /// edges) and radii `10^-1 .. 10^-6`, with `epsilon = pi/6`.
    pub fn default_for(half_plane_sign: i8) -> Self {
        use std::f64::consts::PI;
        let sgn = if half_plane_sign >= 0 { 1.0 } else { -1.0 };
        SectorSpec {
            half_plane_sign: sgn as i8,
            epsilon: PI / 6.0,
            ray_angles: vec![sgn * PI / 3.0, sgn * PI / 2.0, sgn * 2.0 * PI / 3.0],
            radii: (1..=6).map(|k| 10f64.powi(-k)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        use std::f64::consts::PI;
        if self.half_plane_sign != 1 && self.half_plane_sign != -1 {
            return Err(Error::InvalidSector(
                "half_plane_sign must be +1 or -1".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < PI / 2.0) {
            return Err(Error::InvalidSector("epsilon must lie in (0, pi/2)".into()));
        }
        for &theta in &self.ray_angles {
            let a = theta.abs();
            let side = theta.sin().signum() as i8;
            if !(a > self.epsilon && a < PI - self.epsilon) || side != self.half_plane_sign {
                return Err(Error::InvalidSector(format!(
                    "ray angle {theta} lies outside the sector"
                )));
            }
        }
        if self.radii.iter().any(|&r| r <= 0.0) || self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSector(
                "radii must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}
