//! Generalized resolvents of self-adjoint exit-space extensions.
//!
//! An [`EmbeddedExtension`] is a Hermitian `Ã` on `C^{d+e}` extending the
//! image of `A` under an isometric embedding `J : C^d → C^{d+e}`. Its
//! compressed resolvent `R_λ = J*(Ã - λ)^{-1}J` is reproduced by the
//! Shtraus formula from the parameter function
//!
//! ```text
//! F(λ) = (𝔅_λ - λ̄0)(𝔅_λ - λ0)^{-1} |N_λ0(A),   𝔅_λ = R_λ^{-1} + λ.
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{self, check_point, defect_data, DefectData};
use crate::error::{Error, Result};
use crate::hilbert::{SectorSpec, Subspace};
use crate::invertibility::ExtensionChain;
use crate::io;
use crate::linalg::{self, CMat, CVec};
use crate::neumann;
use crate::operators::{make_operator, DomainOperator};
use crate::tolerances::Tolerances;

/// Largest admissible off-`N_λ̄0` component of `F(λ)`, relative to its
/// norm. Exceeding it means `Ã` does not extend `A`.
const LEAKAGE_SLACK: f64 = 1e-6;

fn half_plane(z: Complex64) -> i8 {
    if z.im > 0.0 {
        1
    } else {
        -1
    }
}

/// A self-adjoint `Ã ⊇ J A J*` in `C^{d+e}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddedExtension {
    pub a: DomainOperator,
    pub atilde: DomainOperator,
    #[serde(with = "io::cmat")]
    pub embed: CMat,
    pub exit_dim: usize,
}

impl EmbeddedExtension {
    /// Checks that `J` is isometric, `Ã` is total and Hermitian, and
    /// `graph(J A) ⊆ graph(Ã J)`.
    pub fn new(
        a: DomainOperator,
        atilde: DomainOperator,
        embed: CMat,
        tols: &Tolerances,
    ) -> Result<Self> {
        let ext = Self::new_unchecked(a, atilde, embed)?;
        let residual = ext.hypothesis_residual();
        if residual > tols.inclusion {
            return Err(Error::InvalidExtension(format!(
                "not a self-adjoint extension (residual {residual:.3e})"
            )));
        }
        Ok(ext)
    }

    /// Shape checks only; [`Self::hypothesis_residual`] measures the rest.
    pub fn new_unchecked(a: DomainOperator, atilde: DomainOperator, embed: CMat) -> Result<Self> {
        let big = atilde.ambient_dim();
        if embed.shape() != (big, a.ambient_dim()) {
            return Err(Error::ShapeMismatch {
                expected: (big, a.ambient_dim()),
                actual: embed.shape(),
            });
        }
        if !atilde.domain().is_full() {
            return Err(Error::InvalidExtension(
                "the extension must be total".into(),
            ));
        }
        let gram = embed.adjoint() * &embed;
        if linalg::op_norm(&(gram - linalg::identity(a.ambient_dim()))) > 1e-10 {
            return Err(Error::InvalidExtension("embedding is not isometric".into()));
        }
        let exit_dim = big - a.ambient_dim();
        Ok(EmbeddedExtension {
            a,
            atilde,
            embed,
            exit_dim,
        })
    }

    /// `Ã` on `C^d` itself.
    pub fn canonical(a: &DomainOperator, b: &DomainOperator, tols: &Tolerances) -> Result<Self> {
        Self::new(
            a.clone(),
            b.clone(),
            linalg::identity(a.ambient_dim()),
            tols,
        )
    }

    pub fn from_chain(
        a: &DomainOperator,
        chain: &ExtensionChain,
        tols: &Tolerances,
    ) -> Result<Self> {
        Self::new(
            a.clone(),
            chain.final_extension.clone(),
            chain.embedding(),
            tols,
        )
    }

    /// Largest of the Hermitian defect of `Ã` and the residual of
    /// `graph(J A) ⊆ graph(Ã)`, both relative to `||Ã||`.
    pub fn hypothesis_residual(&self) -> f64 {
        let m = self.matrix();
        let scale = linalg::op_norm(&m).max(1.0);
        let herm = linalg::hermitian_part_deviation(&m) / scale;
        let inclusion = self
            .a
            .embed(&self.embed)
            .graph_inclusion_residual(&self.atilde);
        herm.max(inclusion)
    }

    pub fn matrix(&self) -> CMat {
        self.atilde.padded_matrix()
    }

    pub fn dim(&self) -> usize {
        self.a.ambient_dim()
    }

    pub fn tol(&self) -> f64 {
        self.a.tol()
    }

    /// `(A^{-1}, Ã^{-1})` with the same embedding.
    pub fn inverse(&self) -> Result<Self> {
        let margin = self.a.injectivity_margin();
        if margin <= self.a.tol() {
            return Err(Error::NotInvertibleBase { margin });
        }
        Ok(EmbeddedExtension {
            a: self.a.inverse()?,
            atilde: self.atilde.inverse()?,
            embed: self.embed.clone(),
            exit_dim: self.exit_dim,
        })
    }

    /// Projector onto the exit space `C^{d+e} ⊖ J C^d`.
    fn exit_projector(&self) -> CMat {
        linalg::identity(self.atilde.ambient_dim()) - &self.embed * self.embed.adjoint()
    }

    fn shifted_inverse(&self, lambda: Complex64) -> Result<CMat> {
        let m = self.matrix();
        let scale = linalg::op_norm(&m).max(1.0);
        let shifted = &m - linalg::identity(m.nrows()) * lambda;
        linalg::checked_inverse(&shifted, self.tol() * scale)
            .map_err(|margin| Error::SpectrumHit { lambda, margin })
    }
}

/// `J* (Ã - λ)^{-1} J`.
pub fn compressed_resolvent(ext: &EmbeddedExtension, lambda: Complex64) -> Result<CMat> {
    let inv = ext.shifted_inverse(lambda)?;
    Ok(ext.embed.adjoint() * inv * &ext.embed)
}

/// `𝔏̃_λ = {h : (Ã - λ) h ∈ J C^d}`.
pub fn script_l(ext: &EmbeddedExtension, lambda: Complex64) -> Subspace {
    let big = ext.atilde.ambient_dim();
    if ext.exit_dim == 0 {
        return Subspace::full(big).with_tol(ext.tol());
    }
    let m = ext.matrix() - linalg::identity(big) * lambda;
    let ns = linalg::null_space(&(ext.exit_projector() * m), ext.tol());
    Subspace::from_frame_unchecked(linalg::column_space(&ns, ext.tol()), ext.tol())
}

/// `𝔅_λ = J*Ã (J*|𝔏̃_λ)^{-1}`.
pub fn frak_b(ext: &EmbeddedExtension, lambda: Complex64) -> Result<DomainOperator> {
    let l = script_l(ext, lambda);
    let proj = ext.embed.adjoint() * l.frame();
    let margin = linalg::smallest_singular(&proj).map_or(0.0, |(s, _)| s);
    if l.dim() > ext.dim() || margin <= ext.tol() {
        return Err(Error::ProjectionDegenerate { lambda, margin });
    }
    let images = ext.embed.adjoint() * ext.matrix() * l.frame();
    Ok(DomainOperator::from_basis(&proj, &images, ext.tol())?.with_tol(ext.tol()))
}

/// `(E + (λ - λ̄0) R_λ)(E + (λ - λ0) R_λ)^{-1}`, which equals
/// `(𝔅_λ - λ̄0)(𝔅_λ - λ0)^{-1}` without inverting `R_λ`.
fn cayley_of_resolvent(
    ext: &EmbeddedExtension,
    lambda: Complex64,
    lambda0: Complex64,
) -> Result<CMat> {
    let r = compressed_resolvent(ext, lambda)?;
    let id = linalg::identity(ext.dim());
    let num = &id + &r * (lambda - lambda0.conj());
    let den = &id + &r * (lambda - lambda0);
    let den_inv = linalg::checked_inverse(&den, ext.tol())
        .map_err(|margin| Error::ResolventSingular { lambda, margin })?;
    Ok(num * den_inv)
}

fn frak_f_coords(
    ext: &EmbeddedExtension,
    lambda: Complex64,
    lambda0: Complex64,
    dd: &DefectData,
) -> Result<CMat> {
    let n = dd.n_z.frame();
    let nbar = dd.n_zbar.frame();
    if n.ncols() == 0 {
        return Ok(CMat::zeros(nbar.ncols(), 0));
    }
    let image = cayley_of_resolvent(ext, lambda, lambda0)? * n;
    let coords = nbar.adjoint() * &image;
    let leak = linalg::op_norm(&(&image - nbar * &coords));
    if leak > LEAKAGE_SLACK * linalg::op_norm(&image).max(1.0) {
        return Err(Error::NotAnExtension { residual: leak });
    }
    Ok(coords)
}

fn check_half_plane(lambda: Complex64, lambda0: Complex64) -> Result<()> {
    check_point(lambda)?;
    check_point(lambda0)?;
    if half_plane(lambda) != half_plane(lambda0) {
        return Err(Error::InvalidSector(format!(
            "{lambda} is not in the half-plane of {lambda0}"
        )));
    }
    Ok(())
}

/// `𝔉(λ; λ0)`: the operator `N_λ0(A) → N_λ̄0(A)` generated by `Ã` at `λ`.
pub fn frak_f(
    ext: &EmbeddedExtension,
    lambda: Complex64,
    lambda0: Complex64,
) -> Result<DomainOperator> {
    check_half_plane(lambda, lambda0)?;
    let dd = defect_data(&ext.a, lambda0)?;
    let k = frak_f_coords(ext, lambda, lambda0, &dd)?;
    let t = make_operator(dd.n_z.clone(), dd.n_zbar.frame() * k)?.with_tol(ext.tol());
    let norm = t.norm();
    if norm > 1.0 + Tolerances::default().inclusion {
        return Err(Error::NotContractive { norm });
    }
    Ok(t)
}

/// `𝔉(λ; λ0)` recovered as the Neumann parameter of `𝔅_λ`.
pub fn frak_f_via_quotient(
    ext: &EmbeddedExtension,
    lambda: Complex64,
    lambda0: Complex64,
) -> Result<DomainOperator> {
    check_half_plane(lambda, lambda0)?;
    let b = frak_b(ext, lambda)?;
    Ok(neumann::recover_parameter(&ext.a, &b, lambda0)?.t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    #[serde(with = "io::complex")]
    pub lambda: Complex64,
    /// Coordinates against the function's defect frames.
    #[serde(with = "io::cmat")]
    pub matrix: CMat,
}

#[derive(Debug, Clone)]
pub enum ParameterSource {
    Constant(CMat),
    Extension(Box<EmbeddedExtension>),
    Samples(Vec<Sample>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Constant,
    FromExtension,
    User,
}

/// `λ ↦ F(λ)` on `Π_λ0`, stored in coordinates of fixed orthonormal frames
/// of `N_λ0(A)` and `N_λ̄0(A)`.
#[derive(Debug, Clone)]
pub struct ParameterFunction {
    pub lambda0: Complex64,
    pub defect: DefectData,
    pub source: ParameterSource,
}

impl ParameterFunction {
    /// `F ≡ T` for a `T` defined on all of `N_λ0(A)`.
    pub fn constant(a: &DomainOperator, lambda0: Complex64, t: &DomainOperator) -> Result<Self> {
        let defect = defect_data(a, lambda0)?;
        cayley::check_parameter_shape(t, &defect, cayley::SHAPE_SLACK)?;
        if t.domain().dim() != defect.n_z.dim() {
            return Err(Error::ParameterShapeViolation {
                reason: "a constant parameter must be defined on all of N_z".into(),
            });
        }
        let k = defect.n_zbar.frame().adjoint() * t.padded_matrix() * defect.n_z.frame();
        Ok(ParameterFunction {
            lambda0,
            defect,
            source: ParameterSource::Constant(k),
        })
    }

    pub fn from_extension(ext: &EmbeddedExtension, lambda0: Complex64) -> Result<Self> {
        let defect = defect_data(&ext.a, lambda0)?;
        Ok(ParameterFunction {
            lambda0,
            defect,
            source: ParameterSource::Extension(Box::new(ext.clone())),
        })
    }

    /// Samples are given in coordinates of `defect`'s frames and must be
    /// non-expanding.
    pub fn from_samples(
        a: &DomainOperator,
        lambda0: Complex64,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        let defect = defect_data(a, lambda0)?;
        let shape = (defect.n_zbar.dim(), defect.n_z.dim());
        for s in &samples {
            check_half_plane(s.lambda, lambda0)?;
            if s.matrix.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    actual: s.matrix.shape(),
                });
            }
            let norm = linalg::op_norm(&s.matrix);
            if norm > 1.0 + a.tol().max(1e-12) {
                return Err(Error::NotContractive { norm });
            }
        }
        Ok(ParameterFunction {
            lambda0,
            defect,
            source: ParameterSource::Samples(samples),
        })
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            ParameterSource::Constant(_) => Provenance::Constant,
            ParameterSource::Extension(_) => Provenance::FromExtension,
            ParameterSource::Samples(_) => Provenance::User,
        }
    }

    /// `F(λ)` in frame coordinates.
    pub fn evaluate(&self, lambda: Complex64) -> Result<CMat> {
        check_half_plane(lambda, self.lambda0)?;
        match &self.source {
            ParameterSource::Constant(k) => Ok(k.clone()),
            ParameterSource::Extension(ext) => {
                frak_f_coords(ext, lambda, self.lambda0, &self.defect)
            }
            ParameterSource::Samples(samples) => samples
                .iter()
                .find(|s| (s.lambda - lambda).norm() <= 1e-12 * lambda.norm().max(1.0))
                .map(|s| s.matrix.clone())
                .ok_or(Error::MissingSample(lambda)),
        }
    }

    /// `F(λ)` as a map on `C^d`, zero off `N_λ0(A)`.
    pub fn padded(&self, lambda: Complex64) -> Result<CMat> {
        let k = self.evaluate(lambda)?;
        Ok(self.defect.n_zbar.frame() * k * self.defect.n_z.frame().adjoint())
    }

    /// `F(λ)` as an operator `N_λ0(A) → N_λ̄0(A)`.
    pub fn operator(&self, lambda: Complex64) -> Result<DomainOperator> {
        let k = self.evaluate(lambda)?;
        make_operator(self.defect.n_z.clone(), self.defect.n_zbar.frame() * k)
    }
}

/// `(A_{F(λ)} - λ)^{-1}` for `λ ∈ Π_λ0`, and `(A_{F(λ̄)*} - λ)^{-1}` with
/// base point `λ̄0` for `λ̄ ∈ Π_λ0`.
pub fn shtraus_resolvent(
    a: &DomainOperator,
    f: &ParameterFunction,
    lambda: Complex64,
) -> Result<CMat> {
    check_point(lambda)?;
    let lambda0 = f.lambda0;
    let dd = &f.defect;
    let (base, t) = if half_plane(lambda) == half_plane(lambda0) {
        let k = f.evaluate(lambda)?;
        let t = make_operator(dd.n_z.clone(), dd.n_zbar.frame() * k)?;
        (lambda0, t)
    } else {
        let k = f.evaluate(lambda.conj())?;
        let t = make_operator(dd.n_zbar.clone(), dd.n_z.frame() * k.adjoint())?;
        (lambda0.conj(), t)
    };
    let t = t.with_tol(a.tol());
    let u = cayley::cayley(a, base)?;
    let adm = cayley::admissibility_of(&u, &t, a.tol());
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            witness: adm
                .witness
                .map(|w| w.iter().copied().collect())
                .unwrap_or_default(),
            margin: adm.margin,
        });
    }
    let b = neumann::neumann_operator(a, base, &t)?;
    let Some(m) = b.full_matrix() else {
        return Err(Error::InvalidExtension("A_F is not total".into()));
    };
    let scale = linalg::op_norm(&m).max(1.0);
    let shifted = m - linalg::identity(a.ambient_dim()) * lambda;
    linalg::checked_inverse(&shifted, a.tol() * scale)
        .map_err(|margin| Error::ResolventSingular { lambda, margin })
}

/// Twelve points on each of the circles `|λ - λ0| = 0.3|Im λ0|` and
/// `0.9|Im λ0|`; all stay inside `Π_λ0`.
pub fn default_grid(lambda0: Complex64) -> Vec<Complex64> {
    let h = lambda0.im.abs();
    let mut out = Vec::with_capacity(24);
    for radius in [0.3 * h, 0.9 * h] {
        for k in 0..12 {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 12.0;
            out.push(lambda0 + Complex64::from_polar(radius, theta));
        }
    }
    out
}

/// Outcome of the sampled boundary test at `λ → 0` inside the sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IAdmissibilityVerdict {
    pub admissible: bool,
    #[serde(with = "io::opt_cvec")]
    pub witness: Option<CVec>,
    /// Ray-averaged extrapolated `F(0+)` as a map on `C^d`.
    #[serde(with = "io::cmat")]
    pub limit_estimate: CMat,
    /// Per-ray `min (1 - ||F(λ)ψ||)/|λ|` over the two smallest radii, for
    /// the witness (or the best kernel candidate).
    pub rate_estimates: Vec<f64>,
    /// `||(F(0+) - (λ̄0/λ0) X) ψ||` stacked over rays.
    pub residual: f64,
    /// Largest disagreement between per-ray limits.
    pub ray_spread: f64,
    /// Dimension of `D(X_{1/λ0}(A^{-1}))`.
    pub forbidden_dim: usize,
}

/// Value at `0` of the interpolating polynomial through `(r_k, y_k)`.
pub(crate) fn neville_at_zero(radii: &[f64], values: &[CMat]) -> CMat {
    let mut p: Vec<CMat> = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (ri, rj) = (radii[i], radii[i + m]);
            p[i] = (&p[i] * Complex64::new(-rj, 0.0) + &p[i + 1] * Complex64::new(ri, 0.0))
                / Complex64::new(ri - rj, 0.0);
        }
    }
    p.swap_remove(0)
}

/// Number of smallest radii used for extrapolation.
const EXTRAPOLATION_POINTS: usize = 4;

/// Decides whether the boundary conditions at `λ → 0` along the sector
/// force `ψ = 0`.
pub fn i_admissibility_test(
    a: &DomainOperator,
    f: &ParameterFunction,
    sector: &SectorSpec,
    tols: &Tolerances,
) -> Result<IAdmissibilityVerdict> {
    let lambda0 = f.lambda0;
    check_point(lambda0)?;
    sector.validate()?;
    if sector.half_plane_sign != half_plane(lambda0) {
        return Err(Error::InvalidSector(
            "sector lies in the other half-plane".into(),
        ));
    }
    if sector.radii.len() < EXTRAPOLATION_POINTS {
        return Err(Error::InsufficientSamples {
            required: EXTRAPOLATION_POINTS,
            actual: sector.radii.len(),
        });
    }
    let d = a.ambient_dim();
    let margin = a.injectivity_margin();
    if margin <= a.tol() {
        return Err(Error::NotInvertibleBase { margin });
    }
    let a_inv = a.inverse()?;
    let w = lambda0.inv();
    let dd_inv = cayley::defect_data_unchecked(&a_inv, w);
    let forbidden = cayley::forbidden_from_defects(&a_inv, &dd_inv);
    let Some(x) = forbidden.operator else {
        return Err(Error::InvalidExtension(
            "forbidden relation is multivalued".into(),
        ));
    };
    let g = x.domain().frame().clone();
    let gdim = g.ncols();
    if gdim == 0 {
        return Ok(IAdmissibilityVerdict {
            admissible: true,
            witness: None,
            limit_estimate: CMat::zeros(d, d),
            rate_estimates: Vec::new(),
            residual: 0.0,
            ray_spread: 0.0,
            forbidden_dim: 0,
        });
    }
    let target = x.action() * (lambda0.conj() / lambda0);

    let nr = sector.radii.len();
    let tail = &sector.radii[nr - EXTRAPOLATION_POINTS..];
    let mut limits = Vec::with_capacity(sector.ray_angles.len());
    let mut stacked = CMat::zeros(0, gdim);
    for &theta in &sector.ray_angles {
        let values = tail
            .iter()
            .map(|&r| f.padded(Complex64::from_polar(r, theta)))
            .collect::<Result<Vec<_>>>()?;
        let lim = neville_at_zero(tail, &values);
        stacked = linalg::vcat(&stacked, &(&lim * &g - &target));
        limits.push(lim);
    }
    let rays = limits.len() as f64;
    let mut limit_estimate = CMat::zeros(d, d);
    for l in &limits {
        limit_estimate += l;
    }
    limit_estimate /= Complex64::new(rays, 0.0);
    let ray_spread = limits
        .iter()
        .map(|l| linalg::op_norm(&(l - &limit_estimate)))
        .fold(0.0, f64::max);

    let svd = linalg::right_svd(&stacked);
    let threshold = tols.limit * rays.sqrt();
    let mut best: Option<(f64, CVec, Vec<f64>, f64)> = None;
    for (j, &s) in svd.s.iter().enumerate() {
        if s > threshold {
            continue;
        }
        let psi = linalg::normalize_phase(&(&g * svd.v.column(j)));
        let rates = rate_proxies(f, sector, &psi)?;
        let worst = rates.iter().copied().fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, psi, rates, s));
        }
    }
    Ok(match best {
        Some((worst, psi, rates, s)) if worst < tols.rate_bound => IAdmissibilityVerdict {
            admissible: false,
            witness: Some(psi),
            limit_estimate,
            rate_estimates: rates,
            residual: s,
            ray_spread,
            forbidden_dim: gdim,
        },
        Some((_, _, rates, s)) => IAdmissibilityVerdict {
            admissible: true,
            witness: None,
            limit_estimate,
            rate_estimates: rates,
            residual: s,
            ray_spread,
            forbidden_dim: gdim,
        },
        None => IAdmissibilityVerdict {
            admissible: true,
            witness: None,
            limit_estimate,
            rate_estimates: Vec::new(),
            residual: svd.s.last().copied().unwrap_or(0.0),
            ray_spread,
            forbidden_dim: gdim,
        },
    })
}

fn rate_proxies(f: &ParameterFunction, sector: &SectorSpec, psi: &CVec) -> Result<Vec<f64>> {
    let nr = sector.radii.len();
    let smallest = &sector.radii[nr - 2..];
    sector
        .ray_angles
        .iter()
        .map(|&theta| {
            let mut best = f64::INFINITY;
            for &r in smallest {
                let img = f.padded(Complex64::from_polar(r, theta))? * psi;
                best = best.min((psi.norm() - img.norm()) / r);
            }
            Ok(best)
        })
        .collect()
}
