//! The numerical identity suite run by `symext verify`.
//!
//! Every check that depends on `Ã` folds in [`EmbeddedExtension::hypothesis_residual`]:
//! several identities (the `𝔅` inversion one in particular) hold for any
//! invertible `Ã`, so without the hypothesis a corrupted extension would
//! still pass.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{self, defect_data};
use crate::error::Result;
use crate::hilbert::SectorSpec;
use crate::instances::{random_parameter, ParameterShape};
use crate::linalg;
use crate::neumann::{self, ContractionParameter};
use crate::operators::DomainOperator;
use crate::resolvents::{self, EmbeddedExtension, ParameterFunction};
use crate::tolerances::Tolerances;

/// Bound for the Cayley-level identities.
pub const CAYLEY_TOL: f64 = 1e-10;
/// Bound for the `𝔏̃ / 𝔅 / 𝔉` identities.
pub const RESOLVENT_IDENTITY_TOL: f64 = 1e-8;
/// Bound for both Neumann round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-9;
/// Bound for `R_λ* = R_λ̄`.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Largest residual seen, `null` when skipped.
    pub value: Option<f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub lambda0: Complex64,
    pub grid: Vec<Complex64>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl SuiteOptions {
    pub fn new(lambda0: Complex64) -> Self {
        SuiteOptions {
            lambda0,
            grid: resolvents::default_grid(lambda0),
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

fn judged(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        status: if value < threshold {
            Status::Pass
        } else {
            Status::Fail
        },
        value: Some(value),
        threshold,
        note: String::new(),
    }
}

fn skipped(name: &str, threshold: f64, note: &str) -> Check {
    Check {
        name: name.into(),
        status: Status::Skipped,
        value: None,
        threshold,
        note: note.into(),
    }
}

fn failed(name: &str, threshold: f64, note: String) -> Check {
    Check {
        name: name.into(),
        status: Status::Fail,
        value: None,
        threshold,
        note,
    }
}

fn from_result(name: &str, threshold: f64, r: Result<f64>) -> Check {
    match r {
        Ok(v) => judged(name, v, threshold),
        Err(e) => failed(name, threshold, e.to_string()),
    }
}

/// `M_z(A) = M_{1/z}(A^{-1})` and `N_z(A) = N_{1/z}(A^{-1})`, as the
/// largest projector distance.
pub fn defect_space_inversion_residual(a: &DomainOperator, z: Complex64) -> Result<f64> {
    let inv = a.inverse()?;
    let d1 = defect_data(a, z)?;
    let d2 = defect_data(&inv, z.inv())?;
    Ok([
        d1.m_z.distance(&d2.m_z),
        d1.n_z.distance(&d2.n_z),
        d1.m_zbar.distance(&d2.m_zbar),
        d1.n_zbar.distance(&d2.n_zbar),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// `||U_z(A) - (z̄/z) U_{1/z}(A^{-1})||` on `M_z(A)`.
pub fn cayley_inversion_residual(a: &DomainOperator, z: Complex64) -> Result<f64> {
    let u = cayley::cayley(a, z)?;
    let u_inv = cayley::cayley(&a.inverse()?, z.inv())?.restrict(u.domain())?;
    Ok(linalg::op_norm(
        &(u.action() - u_inv.action() * (z.conj() / z)),
    ))
}

/// Graph distance between `A` and the inverse Cayley transform of `U_z(A)`.
pub fn cayley_round_trip(a: &DomainOperator, z: Complex64) -> Result<f64> {
    let u = cayley::cayley(a, z)?;
    let rel = cayley::inverse_cayley(&u, z)?;
    Ok(rel.graph.distance(&a.graph().graph))
}

/// `recover ∘ extend` on `count` seeded admissible parameters; returns the
/// largest graph distance.
pub fn neumann_round_trip(
    a: &DomainOperator,
    z: Complex64,
    seed: u64,
    count: usize,
) -> Result<f64> {
    let dd = defect_data(a, z)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let shapes = [
        ParameterShape::Contraction,
        ParameterShape::PartialIsometry,
        ParameterShape::Unitary,
    ];
    let mut done = 0;
    let mut tries = 0;
    while done < count && tries < 20 * count {
        let shape = shapes[tries % shapes.len()];
        tries += 1;
        let t = random_parameter(&dd, shape, &mut rng)?;
        if !cayley::is_admissible(a, z, &t)?.admissible {
            continue;
        }
        let param = ContractionParameter::new(a, z, t)?;
        let b = neumann::extend(a, z, &param)?.b;
        let back = neumann::recover_parameter(a, &b, z)?;
        worst = worst.max(back.distance(&param));
        // extend ∘ recover on the extension just produced
        let again = neumann::extend(a, z, &back)?.b;
        worst = worst.max(again.graph_distance(&b));
        done += 1;
    }
    Ok(worst)
}

/// `max ||R_λ* - R_λ̄||` over the grid.
pub fn resolvent_symmetry(ext: &EmbeddedExtension, grid: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &lam in grid {
        let r = resolvents::compressed_resolvent(ext, lam)?;
        let rb = resolvents::compressed_resolvent(ext, lam.conj())?;
        worst = worst.max(linalg::op_norm(&(r.adjoint() - rb)));
    }
    Ok(worst)
}

/// `Ã 𝔏̃_λ(A, Ã) = 𝔏̃_{1/λ}(A^{-1}, Ã^{-1})`.
pub fn script_l_inversion_residual(ext: &EmbeddedExtension, grid: &[Complex64]) -> Result<f64> {
    let inv = ext.inverse()?;
    let mut worst: f64 = 0.0;
    for &lam in grid {
        let l = resolvents::script_l(ext, lam);
        let mapped = crate::hilbert::Subspace::span_of(&(ext.matrix() * l.frame()), ext.tol());
        worst = worst.max(mapped.distance(&resolvents::script_l(&inv, lam.inv())));
    }
    Ok(worst)
}

/// `𝔅_λ(A, Ã)^{-1} = 𝔅_{1/λ}(A^{-1}, Ã^{-1})` as graphs.
pub fn frak_b_inversion_residual(ext: &EmbeddedExtension, grid: &[Complex64]) -> Result<f64> {
    let inv = ext.inverse()?;
    let mut worst: f64 = 0.0;
    for &lam in grid {
        let lhs = resolvents::frak_b(ext, lam)?.inverse()?;
        let rhs = resolvents::frak_b(&inv, lam.inv())?;
        worst = worst.max(lhs.graph_distance(&rhs));
    }
    Ok(worst)
}

/// `𝔉(1/λ; 1/λ0, A^{-1}, Ã^{-1}) = (λ0/λ̄0) 𝔉(λ; λ0, A, Ã)`.
pub fn frak_f_inversion_residual(
    ext: &EmbeddedExtension,
    lambda0: Complex64,
    grid: &[Complex64],
) -> Result<f64> {
    let inv = ext.inverse()?;
    let rot = lambda0 / lambda0.conj();
    let mut worst: f64 = 0.0;
    for &lam in grid {
        let lhs = resolvents::frak_f(&inv, lam.inv(), lambda0.inv())?.padded_matrix();
        let rhs = resolvents::frak_f(ext, lam, lambda0)?.padded_matrix() * rot;
        worst = worst.max(linalg::op_norm(&(lhs - rhs)));
    }
    Ok(worst)
}

/// Runs the whole suite. Defect-dependent checks are skipped when
/// `N_λ0(A) = {0}`; inverse-based checks are skipped when `A` is singular.
pub fn verify_suite(ext: &EmbeddedExtension, opts: &SuiteOptions) -> SuiteReport {
    let a = &ext.a;
    let z = opts.lambda0;
    let grid = &opts.grid;
    let hyp = ext.hypothesis_residual();
    let with_hyp = |r: Result<f64>| r.map(|v| v.max(hyp));
    let invertible = a.is_injective();
    let defect = defect_data(a, z).map(|d| d.defect_numbers.0).unwrap_or(0);
    let singular_note = "A is not injective";
    let no_defect = "defect numbers are (0, 0)";

    let mut checks = Vec::new();
    checks.push(if invertible {
        from_result(
            "defect_space_inversion",
            CAYLEY_TOL,
            defect_space_inversion_residual(a, z)
                .and_then(|v| Ok(v.max(defect_space_inversion_residual(a, z.conj())?))),
        )
    } else {
        skipped("defect_space_inversion", CAYLEY_TOL, singular_note)
    });
    checks.push(if invertible {
        from_result(
            "cayley_inversion",
            CAYLEY_TOL,
            cayley_inversion_residual(a, z)
                .and_then(|v| Ok(v.max(cayley_inversion_residual(a, z.conj())?))),
        )
    } else {
        skipped("cayley_inversion", CAYLEY_TOL, singular_note)
    });
    checks.push(if invertible {
        from_result(
            "script_l_inversion",
            RESOLVENT_IDENTITY_TOL,
            with_hyp(script_l_inversion_residual(ext, grid)),
        )
    } else {
        skipped("script_l_inversion", RESOLVENT_IDENTITY_TOL, singular_note)
    });
    checks.push(if invertible {
        from_result(
            "frak_b_inversion",
            RESOLVENT_IDENTITY_TOL,
            with_hyp(frak_b_inversion_residual(ext, grid)),
        )
    } else {
        skipped("frak_b_inversion", RESOLVENT_IDENTITY_TOL, singular_note)
    });
    checks.push(if !invertible {
        skipped("frak_f_inversion", RESOLVENT_IDENTITY_TOL, singular_note)
    } else if defect == 0 {
        skipped("frak_f_inversion", RESOLVENT_IDENTITY_TOL, no_defect)
    } else {
        from_result(
            "frak_f_inversion",
            RESOLVENT_IDENTITY_TOL,
            with_hyp(frak_f_inversion_residual(ext, z, grid)),
        )
    });
    checks.push(from_result(
        "cayley_round_trip",
        CAYLEY_TOL,
        cayley_round_trip(a, z).and_then(|v| Ok(v.max(cayley_round_trip(a, z.conj())?))),
    ));
    checks.push(if defect == 0 {
        skipped("neumann_round_trip", ROUND_TRIP_TOL, no_defect)
    } else {
        from_result(
            "neumann_round_trip",
            ROUND_TRIP_TOL,
            neumann_round_trip(a, z, opts.seed, 8),
        )
    });
    checks.push(from_result(
        "resolvent_symmetry",
        SYMMETRY_TOL,
        with_hyp(resolvent_symmetry(ext, grid)),
    ));
    checks.push(if !invertible {
        skipped("i_admissibility", opts.tolerances.limit, singular_note)
    } else if defect == 0 {
        skipped("i_admissibility", opts.tolerances.limit, no_defect)
    } else {
        i_admissibility_check(ext, z, &opts.tolerances, hyp)
    });

    let all_pass = checks.iter().all(|c| c.status != Status::Fail);
    SuiteReport {
        checks,
        all_pass,
        tolerances: opts.tolerances,
    }
}

/// The verdict on `𝔉` must match whether `Ã` is invertible.
fn i_admissibility_check(
    ext: &EmbeddedExtension,
    lambda0: Complex64,
    tols: &Tolerances,
    hyp: f64,
) -> Check {
    let name = "i_admissibility";
    if hyp >= tols.inclusion {
        return Check {
            name: name.into(),
            status: Status::Fail,
            value: Some(hyp),
            threshold: tols.inclusion,
            note: "the extension hypothesis does not hold".into(),
        };
    }
    let sector = SectorSpec::default_for(if lambda0.im > 0.0 { 1 } else { -1 });
    let verdict = ParameterFunction::from_extension(ext, lambda0)
        .and_then(|f| resolvents::i_admissibility_test(&ext.a, &f, &sector, tols));
    match verdict {
        Ok(v) => {
            let expected = ext.atilde.is_injective();
            Check {
                name: name.into(),
                status: if v.admissible == expected {
                    Status::Pass
                } else {
                    Status::Fail
                },
                value: Some(v.residual),
                threshold: tols.limit,
                note: format!(
                    "admissible = {}, extension invertible = {expected}",
                    v.admissible
                ),
            }
        }
        Err(e) => failed(name, tols.limit, e.to_string()),
    }
}
