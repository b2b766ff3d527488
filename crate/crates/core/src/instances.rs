//! Seeded generators for test operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cayley::{inverse_cayley, DefectData};
use crate::error::{Error, Result};
use crate::hilbert::{Subspace, DEFAULT_TOL};
use crate::linalg::{self, CMat, CVec};
use crate::operators::{make_operator, DomainOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub ambient_dim: usize,
    /// Both defect numbers, equal in finite dimension.
    pub defect: usize,
    pub dense_range: bool,
    /// Eigenvalue magnitudes of the compressed form lie in `[lo, hi]`.
    pub spectrum_window: (f64, f64),
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            ambient_dim: 4,
            defect: 1,
            dense_range: false,
            spectrum_window: (0.5, 4.0),
            seed: 0,
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.spectrum_window;
        if self.defect > self.ambient_dim {
            return Err(Error::SpecInfeasible(format!(
                "defect {} exceeds dimension {}",
                self.defect, self.ambient_dim
            )));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::SpecInfeasible(format!(
                "spectrum window [{lo}, {hi}] must be positive and ordered"
            )));
        }
        // R(A) has dimension d - n, so it is dense only when n = 0
        if self.dense_range && self.defect > 0 {
            return Err(Error::SpecInfeasible(
                "a dense range needs defect 0 in finite dimension".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    if d == 0 {
        return CMat::zeros(0, 0);
    }
    let qr = gaussian_matrix(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            linalg::ONE
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// A symmetric injective operator with `dim D(A) = d - n`. The compressed
/// form is a Hermitian matrix with prescribed eigenvalue magnitudes; the
/// action also has a random component off the domain.
pub fn gen_symmetric(spec: &InstanceSpec) -> Result<DomainOperator> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.ambient_dim;
    let k = d - spec.defect;
    let q = random_unitary(d, &mut rng);
    let dom = q.columns(0, k).into_owned();
    let off = q.columns(k, d - k).into_owned();

    let (lo, hi) = spec.spectrum_window;
    let eigs: Vec<Complex64> = (0..k)
        .map(|_| {
            let mag = lo + (hi - lo) * rng.random::<f64>();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(sign * mag, 0.0)
        })
        .collect();
    let rot = random_unitary(k, &mut rng);
    let herm = &rot * linalg::diag(&eigs) * rot.adjoint();
    let coupling = gaussian_matrix(d - k, k, &mut rng);
    let action = &dom * herm + off * coupling;
    let domain = Subspace::from_frame(dom, DEFAULT_TOL)?;
    make_operator(domain, action)
}

/// The finite section of the shift construction: the partial isometry
/// `f_k ↦ f_{k+1}` (`k < N`) on `C^{N+1}` mapped through the inverse Cayley
/// transform at `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedShift {
    pub operator: DomainOperator,
    pub note: String,
}

pub fn truncated_shift(n: usize) -> Result<TruncatedShift> {
    if n == 0 {
        return Err(Error::SpecInfeasible(
            "the shift section needs N >= 1".into(),
        ));
    }
    let d = n + 1;
    let frame = CMat::identity(d, n);
    let mut images = CMat::zeros(d, n);
    for k in 0..n {
        images[(k + 1, k)] = linalg::ONE;
    }
    let v = make_operator(Subspace::from_frame(frame, DEFAULT_TOL)?, images)?;
    let relation = inverse_cayley(&v, linalg::I)?;
    let operator = relation
        .to_operator()
        .ok_or_else(|| Error::InvalidExtension("shift section has a fixed vector".into()))?;
    Ok(TruncatedShift {
        operator,
        note: format!(
            "finite section on C^{d}: defect numbers (1, 1), not the (0, 1) of the infinite shift"
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterShape {
    /// Isometric on all of `N_z`.
    Unitary,
    /// Isometric on a random subspace of `N_z`.
    PartialIsometry,
    /// Norm uniformly in `(0, 1)` on a random subspace of `N_z`.
    Contraction,
}

fn random_subframe(sub: &Subspace, dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let coeffs = random_unitary(sub.dim(), rng);
    sub.frame() * coeffs.columns(0, dim)
}

/// A random non-expanding `T : D(T) ⊆ N_z → N_z̄` (not necessarily
/// admissible).
pub fn random_parameter(
    dd: &DefectData,
    shape: ParameterShape,
    rng: &mut ChaCha8Rng,
) -> Result<DomainOperator> {
    let n = dd.n_z.dim();
    let tol = dd.n_z.tol();
    if n == 0 {
        return Ok(DomainOperator::trivial(dd.n_z.ambient_dim()).with_tol(tol));
    }
    let k = match shape {
        ParameterShape::Unitary => n,
        _ => rng.random_range(1..=n),
    };
    let dom = random_subframe(&dd.n_z, k, rng);
    let coeffs = match shape {
        ParameterShape::Unitary | ParameterShape::PartialIsometry => {
            random_unitary(n, rng).columns(0, k).into_owned()
        }
        ParameterShape::Contraction => {
            let g = gaussian_matrix(n, k, rng);
            let target = 0.05 + 0.9 * rng.random::<f64>();
            let norm = linalg::op_norm(&g).max(f64::MIN_POSITIVE);
            g * Complex64::new(target / norm, 0.0)
        }
    };
    let action = dd.n_zbar.frame() * coeffs;
    Ok(make_operator(Subspace::from_frame(dom, tol)?, action)?.with_tol(tol))
}

/// A non-real point with `|Im z| ≥ 0.2` and `|z| ≤ 3`.
pub fn random_point(rng: &mut ChaCha8Rng) -> Complex64 {
    let re = rng.random_range(-2.0..2.0);
    let im = rng.random_range(0.2..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    Complex64::new(re, im)
}

pub fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> CVec {
    let v = CVec::from_fn(d, |_, _| complex_gaussian(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{defect_data, forbidden_operator};
    use crate::linalg::I;

    #[test]
    fn generated_instances_are_symmetric_and_injective() {
        for seed in 0..20 {
            for (d, n) in [(2, 1), (5, 2), (6, 0), (3, 3)] {
                let spec = InstanceSpec {
                    ambient_dim: d,
                    defect: n,
                    seed,
                    ..Default::default()
                };
                let a = gen_symmetric(&spec).unwrap();
                assert!(a.is_symmetric());
                assert!(a.is_injective());
                assert_eq!(a.domain().dim(), d - n);
                assert_eq!(defect_data(&a, I).unwrap().defect_numbers, (n, n));
                let ev = linalg::hermitian_eigenvalues(&a.compressed());
                assert!(ev
                    .iter()
                    .all(|e| e.abs() >= 0.5 - 1e-9 && e.abs() <= 4.0 + 1e-9));
            }
        }
    }

    #[test]
    fn two_by_two_matches_worked_shape() {
        let a = gen_symmetric(&InstanceSpec {
            ambient_dim: 2,
            defect: 1,
            ..Default::default()
        })
        .unwrap();
        // non-dense range: the complement of R(A) is a line
        assert_eq!(a.range().complement().dim(), 1);
        let inv = a.inverse().unwrap();
        let x = forbidden_operator(&inv, I.inv()).unwrap();
        assert_eq!(x.domain().dim(), 1);
    }

    #[test]
    fn infeasible_specs() {
        let bad = [
            InstanceSpec {
                ambient_dim: 2,
                defect: 5,
                ..Default::default()
            },
            InstanceSpec {
                dense_range: true,
                defect: 1,
                ..Default::default()
            },
            InstanceSpec {
                spectrum_window: (0.0, 1.0),
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(matches!(
                gen_symmetric(&spec),
                Err(Error::SpecInfeasible(_))
            ));
        }
    }

    #[test]
    fn dense_range_defect_zero_has_empty_forbidden_domain() {
        let a = gen_symmetric(&InstanceSpec {
            ambient_dim: 3,
            defect: 0,
            dense_range: true,
            ..Default::default()
        })
        .unwrap();
        let x = forbidden_operator(&a.inverse().unwrap(), c_inv()).unwrap();
        assert!(x.domain().is_zero());
    }

    fn c_inv() -> Complex64 {
        Complex64::new(0.3, 1.1).inv()
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = InstanceSpec {
            ambient_dim: 5,
            defect: 2,
            seed: 42,
            ..Default::default()
        };
        let a = serde_json::to_string(&gen_symmetric(&spec).unwrap()).unwrap();
        let b = serde_json::to_string(&gen_symmetric(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shift_section() {
        for n in 1..6 {
            let s = truncated_shift(n).unwrap();
            let a = &s.operator;
            assert!(a.is_symmetric());
            assert!(a.is_injective());
            assert_eq!(a.domain().dim(), n);
            assert_eq!(defect_data(a, I).unwrap().defect_numbers, (1, 1));
        }
        // N = 1: f0 ↦ f1, so A(f1 - f0) = i(f1 + f0)
        let a = truncated_shift(1).unwrap().operator;
        let f = CVec::from_column_slice(&[-linalg::ONE, linalg::ONE]);
        let g = CVec::from_column_slice(&[I, I]);
        assert!((a.apply(&f).unwrap() - g).norm() < 1e-12);
        assert!(truncated_shift(0).is_err());
    }

    #[test]
    fn random_parameters_respect_shape() {
        let a = gen_symmetric(&InstanceSpec {
            ambient_dim: 6,
            defect: 3,
            ..Default::default()
        })
        .unwrap();
        let dd = defect_data(&a, Complex64::new(0.5, -1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for shape in [
            ParameterShape::Unitary,
            ParameterShape::PartialIsometry,
            ParameterShape::Contraction,
        ] {
            let t = random_parameter(&dd, shape, &mut rng).unwrap();
            assert!(dd.n_z.contains_subspace(t.domain(), 1e-10));
            assert!(t.norm() <= 1.0 + 1e-12);
            if shape != ParameterShape::Contraction {
                assert!(t.is_isometric());
            }
        }
    }
}
