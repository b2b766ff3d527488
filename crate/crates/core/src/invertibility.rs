//! Invertibility of Neumann extensions and the step-by-step construction
//! of invertible self-adjoint extensions.
//!
//! With `A` invertible, the extension `B` built from `T` at `z` is
//! invertible exactly when `(z/z̄) T` is admissible at `1/z` for `A^{-1}`,
//! equivalently when `T - (z̄/z) X_{1/z}(A^{-1})` is injective on
//! `D(T) ∩ D(X_{1/z}(A^{-1}))`. Both routes are computed alongside the
//! direct kernel test so that disagreement can be flagged.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cayley::{self, check_point, check_symmetric, defect_data};
use crate::error::{Error, Result};
use crate::hilbert::Subspace;
use crate::io;
use crate::linalg::{self, CMat, CVec};
use crate::neumann::{self, ContractionParameter, ExtensionReport};
use crate::operators::{make_operator, DomainOperator};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvertibilityMargins {
    /// Smallest singular value of `B` on `D(B)`.
    pub direct: f64,
    /// Admissibility margin of `(z/z̄) T` for `A^{-1}` at `1/z`.
    pub via_admissibility: f64,
    /// Injectivity margin of `T - (z̄/z) X_{1/z}(A^{-1})`.
    pub via_forbidden: f64,
}

impl InvertibilityMargins {
    pub fn min(&self) -> f64 {
        self.direct
            .min(self.via_admissibility)
            .min(self.via_forbidden)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertibilityVerdict {
    pub direct: bool,
    pub via_admissibility: bool,
    pub via_forbidden: bool,
    pub agree: bool,
    pub margins: InvertibilityMargins,
    /// Unit vector of `ker B` when `B` is singular.
    #[serde(with = "io::opt_cvec")]
    pub witness: Option<CVec>,
}

fn require_invertible_base(a: &DomainOperator) -> Result<DomainOperator> {
    let margin = a.injectivity_margin();
    if margin <= a.tol() {
        return Err(Error::NotInvertibleBase { margin });
    }
    a.inverse()
}

/// Decides invertibility of the extension of `A` by `T` at `z` three ways.
pub fn check_invertibility(
    a: &DomainOperator,
    z: Complex64,
    t: &DomainOperator,
) -> Result<InvertibilityVerdict> {
    check_point(z)?;
    check_symmetric(a)?;
    let a_inv = require_invertible_base(a)?;
    let param = ContractionParameter::new(a, z, t.clone())?;
    let report = neumann::extend(a, z, &param)?;
    Ok(verdict_for(&a_inv, z, &param.t, &report))
}

pub(crate) fn verdict_for(
    a_inv: &DomainOperator,
    z: Complex64,
    t: &DomainOperator,
    report: &ExtensionReport,
) -> InvertibilityVerdict {
    let tol = a_inv.tol();
    let w = z.inv();
    let rot = z / z.conj();

    let direct_margin = report.b.injectivity_margin();
    let direct = direct_margin > tol;

    // N_{1/z}(A^{-1}) = N_z(A), so the rotated T has the right shape
    let rotated = t.scale(rot);
    let u_inv = cayley::cayley(a_inv, w).expect("A^{-1} is symmetric at a non-real point");
    let adm = cayley::admissibility_of(&u_inv, &rotated, tol);

    let forb_margin = forbidden_margin(a_inv, z, t, tol);
    let via_forbidden = forb_margin > tol;

    InvertibilityVerdict {
        direct,
        via_admissibility: adm.admissible,
        via_forbidden,
        agree: direct == adm.admissible && direct == via_forbidden,
        margins: InvertibilityMargins {
            direct: direct_margin,
            via_admissibility: adm.margin,
            via_forbidden: forb_margin,
        },
        witness: report.kernel_witness.clone(),
    }
}

fn forbidden_margin(a_inv: &DomainOperator, z: Complex64, t: &DomainOperator, tol: f64) -> f64 {
    let dd = cayley::defect_data_unchecked(a_inv, z.inv());
    let x = cayley::forbidden_from_defects(a_inv, &dd);
    let Some(xop) = x.operator else {
        // a multivalued forbidden relation cannot occur for symmetric A
        return 0.0;
    };
    let common = match t.domain().intersect_with_tol(xop.domain(), tol) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    if common.is_zero() {
        return f64::INFINITY;
    }
    let (Ok(t_r), Ok(x_r)) = (t.restrict(&common), xop.restrict(&common)) else {
        return 0.0;
    };
    let rot = z.conj() / z;
    let diff = t_r.action() - x_r.action() * rot;
    linalg::smallest_singular(&diff).map_or(f64::INFINITY, |(s, _)| s)
}

/// `A ⊕ (-A)` on `C^d ⊕ C^d`; equal defect numbers `(n+m, m+n)`.
pub fn double(a: &DomainOperator) -> DomainOperator {
    a.direct_sum(&a.negate()).with_tol(a.tol())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Doubling {
    /// Double only when the defect numbers differ.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainOptions {
    pub seed: u64,
    pub doubling: Doubling,
    /// Minimum distance of the chosen image to both forbidden points.
    pub min_score: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            seed: 0,
            doubling: Doubling::Auto,
            min_score: 1e-6,
        }
    }
}

/// One rank-one isometric step `f ↦ h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStep {
    pub parameter: ContractionParameter,
    pub extension: DomainOperator,
    /// Distance of `h` to the nearer of the two forbidden images.
    pub score: f64,
    pub defect_after: (usize, usize),
    pub attempts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionChain {
    #[serde(with = "io::complex")]
    pub z: Complex64,
    /// The operator the chain starts from: `A`, or `A ⊕ (-A)` when doubled.
    pub base: DomainOperator,
    pub steps: Vec<ChainStep>,
    pub final_extension: DomainOperator,
    /// Dimension of the exit space; the original space sits in the first
    /// `ambient_dim - exit_dim` coordinates.
    pub exit_dim: usize,
}

/// Extends `A` one defect direction at a time, keeping every intermediate
/// extension invertible, until a self-adjoint operator is reached.
pub fn build_invertible_selfadjoint(
    a: &DomainOperator,
    z: Complex64,
    opts: &ChainOptions,
) -> Result<ExtensionChain> {
    check_point(z)?;
    check_symmetric(a)?;
    require_invertible_base(a)?;
    let dd = defect_data(a, z)?;
    let (n, m) = dd.defect_numbers;
    let doubled = match opts.doubling {
        Doubling::Always => true,
        Doubling::Never if n != m => {
            return Err(Error::SpecInfeasible(format!(
                "defect numbers ({n}, {m}) differ and doubling is disabled"
            )))
        }
        Doubling::Never => false,
        Doubling::Auto => n != m,
    };
    let base = if doubled { double(a) } else { a.clone() };
    let exit_dim = if doubled { a.ambient_dim() } else { 0 };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut current = base.clone();
    let mut steps = Vec::new();
    loop {
        let dd = defect_data(&current, z)?;
        if dd.defect_numbers.0 == 0 {
            break;
        }
        let step = chain_step(&current, z, &dd, opts, &mut rng)?;
        current = step.extension.clone();
        steps.push(step);
    }
    if current.symmetry_deviation()
        > current.tol().sqrt() * linalg::op_norm(current.action()).max(1.0)
        || !current.domain().is_full()
    {
        return Err(Error::InvalidExtension(
            "chain ended on a non-self-adjoint operator".into(),
        ));
    }
    Ok(ExtensionChain {
        z,
        base,
        steps,
        final_extension: current,
        exit_dim,
    })
}

fn random_unit_in(sub: &Subspace, rng: &mut ChaCha8Rng) -> CVec {
    let k = sub.dim();
    let coeffs = CVec::from_fn(k, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let v = sub.frame() * coeffs;
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Candidate unit images in `N_z̄`: frame vectors under a phase sweep plus
/// seeded random directions when `N_z̄` has dimension at least two.
fn image_candidates(n_zbar: &Subspace, rng: &mut ChaCha8Rng) -> Vec<CVec> {
    let k = n_zbar.dim();
    let phases = if k == 1 { 72 } else { 12 };
    let mut out = Vec::new();
    for j in 0..k {
        let base = n_zbar.frame().column(j).into_owned();
        for p in 0..phases {
            let theta = 2.0 * std::f64::consts::PI * p as f64 / phases as f64;
            out.push(&base * Complex64::from_polar(1.0, theta));
        }
    }
    if k >= 2 {
        for _ in 0..64 {
            out.push(random_unit_in(n_zbar, rng));
        }
    }
    out
}

fn chain_step(
    current: &DomainOperator,
    z: Complex64,
    dd: &cayley::DefectData,
    opts: &ChainOptions,
    rng: &mut ChaCha8Rng,
) -> Result<ChainStep> {
    let d = current.ambient_dim();
    let tol = current.tol();
    let w = z.inv();
    let rot_back = z.conj() / z;
    let inv = current.inverse()?;
    let x_direct = cayley::forbidden_from_defects(current, dd);
    let dd_inv = cayley::defect_data_unchecked(&inv, w);
    let x_inverse = cayley::forbidden_from_defects(&inv, &dd_inv);
    let (Some(x_direct), Some(x_inverse)) = (x_direct.operator, x_inverse.operator) else {
        return Err(Error::InvalidExtension(
            "forbidden relation is multivalued".into(),
        ));
    };

    let max_attempts = d * 10;
    let n_frame = dd.n_z.dim();
    let mut attempts = 0;
    while attempts < max_attempts {
        let f = if attempts < n_frame {
            dd.n_z.frame().column(attempts).into_owned()
        } else {
            random_unit_in(&dd.n_z, rng)
        };
        attempts += 1;
        let p_inv = x_inverse.apply(&f).map(|v| v * rot_back);
        let p_dir = x_direct.apply(&f);
        let (Ok(p_inv), Ok(p_dir)) = (p_inv, p_dir) else {
            continue;
        };
        let mut best: Option<(f64, CVec)> = None;
        for h in image_candidates(&dd.n_zbar, rng) {
            let score = (&h - &p_inv).norm().min((&h - &p_dir).norm());
            let better = match &best {
                None => true,
                Some((s, _)) => {
                    score > *s + 1e-12 || ((score - *s).abs() <= 1e-12 && rng.random::<bool>())
                }
            };
            if better {
                best = Some((score, h));
            }
        }
        let Some((score, h)) = best else { continue };
        if score < opts.min_score {
            continue;
        }
        let dom = Subspace::from_frame_unchecked(CMat::from_columns(std::slice::from_ref(&f)), tol);
        let t = make_operator(dom, CMat::from_columns(&[h]))?.with_tol(tol);
        let parameter = ContractionParameter::from_parts(z, t);
        let report = neumann::extend(current, z, &parameter)?;
        if !report.invertible {
            continue;
        }
        return Ok(ChainStep {
            parameter,
            extension: report.b,
            score,
            defect_after: report.defect_numbers_of_b,
            attempts,
        });
    }
    Err(Error::ChoiceExhausted { attempts })
}

impl ExtensionChain {
    /// The original operator's coordinates inside the final space.
    pub fn embedding(&self) -> CMat {
        let total = self.final_extension.ambient_dim();
        let inner = total - self.exit_dim;
        CMat::identity(total, inner)
    }

    pub fn is_exit_space(&self) -> bool {
        self.exit_dim > 0
    }
}
