//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p symext-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symext::cayley::{self, defect_data};
use symext::identities;
use symext::instances::{random_parameter, random_point, ParameterShape};
use symext::invertibility::{ChainOptions, Doubling};
use symext::linalg::{self, basis_vector, c, CMat, I, ONE, ZERO};
use symext::neumann::{extend, recover_parameter};
use symext::resolvents::{
    self, compressed_resolvent, default_grid, shtraus_resolvent, ParameterFunction,
};
use symext::{
    build_invertible_selfadjoint, gen_symmetric, make_operator, orthonormalize, Complex64,
    ContractionParameter, DomainOperator, EmbeddedExtension, Error, InstanceSpec, SectorSpec,
    Tolerances,
};

const ROUND_TRIP_TOL: f64 = 1e-9;
const GRAY_LOW: f64 = 1e-12;
const GRAY_HIGH: f64 = 1e-6;
const CAYLEY_TOL: f64 = 1e-10;
const MIN_EIGENVALUE: f64 = 1e-8;
const CONTAINMENT_TOL: f64 = 1e-8;
const SHTRAUS_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-8;
const WITNESS_RESIDUAL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-10;
const DISTINCT_GAP: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn instance(rng: &mut ChaCha8Rng, max_dim: usize, max_defect: usize) -> DomainOperator {
    let d = rng.random_range(2..=max_dim);
    let n = rng.random_range(1..=max_defect.min(d));
    gen_symmetric(&InstanceSpec {
        ambient_dim: d,
        defect: n,
        seed: rng.random(),
        ..Default::default()
    })
    .expect("feasible spec")
}

fn worked_a() -> DomainOperator {
    let dom = orthonormalize(&[basis_vector(2, 0)], 2, 1e-12).unwrap();
    make_operator(dom, CMat::from_column_slice(2, 1, &[ONE, ZERO])).unwrap()
}

fn worked_param(cst: Complex64) -> DomainOperator {
    let dom = orthonormalize(&[basis_vector(2, 1)], 2, 1e-12).unwrap();
    make_operator(dom, CMat::from_column_slice(2, 1, &[ZERO, cst])).unwrap()
}

fn admissible_parameter(
    a: &DomainOperator,
    z: Complex64,
    rng: &mut ChaCha8Rng,
) -> ContractionParameter {
    let dd = defect_data(a, z).unwrap();
    let shapes = [
        ParameterShape::Contraction,
        ParameterShape::PartialIsometry,
        ParameterShape::Unitary,
    ];
    loop {
        let shape = shapes[rng.random_range(0..shapes.len())];
        let t = random_parameter(&dd, shape, rng).unwrap();
        if cayley::is_admissible(a, z, &t).unwrap().admissible {
            return ContractionParameter::new(a, z, t).unwrap();
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = instance(&mut rng, 10, 3);
        let z = random_point(&mut rng);
        let param = admissible_parameter(&a, z, &mut rng);
        let b = extend(&a, z, &param).unwrap().b;
        let back = recover_parameter(&a, &b, z).unwrap();
        worst = worst.max(back.distance(&param));
        let again = extend(&a, z, &back).unwrap().b;
        worst = worst.max(again.graph_distance(&b));
    }
    outcome(
        worst < ROUND_TRIP_TOL,
        format!("200 instances, worst distance {worst:.2e} (bound {ROUND_TRIP_TOL:.0e})"),
    )
}

/// A parameter that sends one unit `f ∈ N_z` to `(z̄/z) X_{1/z}(A^{-1}) f`,
/// which makes the extension singular.
fn singular_parameter(
    a: &DomainOperator,
    z: Complex64,
    rng: &mut ChaCha8Rng,
) -> Option<DomainOperator> {
    let dd = defect_data(a, z).ok()?;
    let inv = a.inverse().ok()?;
    let x = cayley::forbidden_operator(&inv, z.inv()).ok()?.operator?;
    let k = dd.n_z.dim();
    let coeffs = symext::instances::random_unit(k, rng);
    let f = dd.n_z.frame() * coeffs;
    let image = x.apply(&f).ok()? * (z.conj() / z);
    let dom = orthonormalize(&[f], a.ambient_dim(), 1e-12).ok()?;
    let t = make_operator(dom, CMat::from_columns(&[image])).ok()?;
    cayley::is_admissible(a, z, &t)
        .ok()?
        .admissible
        .then_some(t)
}

fn gray(m: f64) -> bool {
    (GRAY_LOW..=GRAY_HIGH).contains(&m)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut counted, mut agreed, mut excluded, mut singular) = (0, 0, 0, 0);
    let mut attempts = 0;
    while counted < 500 && attempts < 5000 {
        attempts += 1;
        let a = instance(&mut rng, 8, 3);
        let z = random_point(&mut rng);
        let t = if attempts % 2 == 0 {
            match singular_parameter(&a, z, &mut rng) {
                Some(t) => t,
                None => continue,
            }
        } else {
            admissible_parameter(&a, z, &mut rng).t
        };
        let v = symext::check_invertibility(&a, z, &t).unwrap();
        let m = v.margins;
        if gray(m.direct) || gray(m.via_admissibility) || gray(m.via_forbidden) {
            excluded += 1;
            continue;
        }
        counted += 1;
        agreed += v.agree as usize;
        singular += (!v.direct) as usize;
    }
    // worked family: invertible exactly when c ≠ -1
    let a = worked_a();
    let mut family_ok = true;
    for k in 1..72 {
        let cst = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 72.0);
        for scale in [1.0, 0.6] {
            let v = symext::check_invertibility(&a, I, &worked_param(cst * scale)).unwrap();
            let expected = k != 36 || scale != 1.0;
            family_ok &= v.agree && v.direct == expected;
        }
    }
    outcome(
        counted == 500 && agreed == counted && family_ok,
        format!(
            "{agreed}/{counted} triples agree ({singular} singular, {excluded} borderline excluded); worked family {}",
            if family_ok { "exact" } else { "MISMATCH" }
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut spaces, mut cayley): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let a = instance(&mut rng, 8, 3);
        for _ in 0..5 {
            let z = random_point(&mut rng);
            spaces = spaces.max(identities::defect_space_inversion_residual(&a, z).unwrap());
            cayley = cayley.max(identities::cayley_inversion_residual(&a, z).unwrap());
        }
    }
    outcome(
        spaces < CAYLEY_TOL && cayley < CAYLEY_TOL,
        format!("500 (A, z) pairs, defect_space_inversion {spaces:.2e}, cayley_inversion {cayley:.2e} (bound {CAYLEY_TOL:.0e})"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut failures = Vec::new();
    let (mut min_eig, mut worst_herm, mut worst_contain) = (f64::INFINITY, 0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let a = instance(&mut rng, 7, 3);
        let z = random_point(&mut rng);
        let n = defect_data(&a, z).unwrap().defect_numbers.0;
        for doubling in [Doubling::Never, Doubling::Always] {
            let opts = ChainOptions {
                seed,
                doubling,
                ..Default::default()
            };
            let chain = match build_invertible_selfadjoint(&a, z, &opts) {
                Ok(ch) => ch,
                Err(e) => {
                    failures.push(format!("seed {seed}: {e}"));
                    continue;
                }
            };
            let expected_steps = if doubling == Doubling::Always {
                2 * n
            } else {
                n
            };
            let injective = chain.steps.iter().all(|s| s.extension.is_injective());
            let m = chain.final_extension.full_matrix().unwrap();
            let herm = linalg::hermitian_part_deviation(&m) / linalg::op_norm(&m).max(1.0);
            let eig = linalg::hermitian_eigenvalues(&m)
                .iter()
                .map(|e| e.abs())
                .fold(f64::INFINITY, f64::min);
            let contain = a
                .embed(&chain.embedding())
                .graph_inclusion_residual(&chain.final_extension);
            min_eig = min_eig.min(eig);
            worst_herm = worst_herm.max(herm);
            worst_contain = worst_contain.max(contain);
            if chain.steps.len() != expected_steps
                || !injective
                || herm > 1e-10
                || eig <= MIN_EIGENVALUE
                || contain > CONTAINMENT_TOL
            {
                failures.push(format!("seed {seed} {doubling:?}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "200 chains, min |eigenvalue| {min_eig:.2e}, Hermitian defect {worst_herm:.2e}, containment {worst_contain:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    )
}

struct ResolventCase {
    ext: EmbeddedExtension,
    lambda0: Complex64,
}

fn resolvent_cases(doubling: Doubling, seed: u64) -> Vec<ResolventCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..25)
        .map(|k| {
            let a = instance(&mut rng, 5, 2);
            let lambda0 = random_point(&mut rng);
            let opts = ChainOptions {
                seed: k,
                doubling,
                ..Default::default()
            };
            let chain = build_invertible_selfadjoint(&a, lambda0, &opts).unwrap();
            let ext = EmbeddedExtension::from_chain(&a, &chain, &Tolerances::default()).unwrap();
            ResolventCase { ext, lambda0 }
        })
        .collect()
}

fn shtraus_error(case: &ResolventCase) -> f64 {
    let f = ParameterFunction::from_extension(&case.ext, case.lambda0).unwrap();
    let mut worst: f64 = 0.0;
    for lam in default_grid(case.lambda0) {
        for l in [lam, lam.conj()] {
            let direct = compressed_resolvent(&case.ext, l).unwrap();
            let viaf = shtraus_resolvent(&case.ext.a, &f, l).unwrap();
            worst = worst.max(linalg::op_norm(&(direct - viaf)));
        }
    }
    worst
}

fn criterion_5(exit: &[ResolventCase], canonical: &[ResolventCase]) -> Outcome {
    let we = exit.iter().map(shtraus_error).fold(0.0, f64::max);
    let wc = canonical.iter().map(shtraus_error).fold(0.0, f64::max);
    outcome(
        we < SHTRAUS_TOL && wc < SHTRAUS_TOL,
        format!("exit-space {we:.2e}, canonical {wc:.2e} over 25 + 25 extensions x 48 points (bound {SHTRAUS_TOL:.0e})"),
    )
}

fn criterion_6(cases: &[ResolventCase]) -> Outcome {
    let (mut l_inv, mut b_inv, mut f_inv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut skipped = 0;
    for case in cases {
        for lam in default_grid(case.lambda0) {
            let grid = [lam];
            let r10 = identities::script_l_inversion_residual(&case.ext, &grid);
            let r12 = identities::frak_b_inversion_residual(&case.ext, &grid);
            let r13 = identities::frak_f_inversion_residual(&case.ext, case.lambda0, &grid);
            match (r10, r12, r13) {
                (Ok(a), Ok(b), Ok(c)) => {
                    l_inv = l_inv.max(a);
                    b_inv = b_inv.max(b);
                    f_inv = f_inv.max(c);
                }
                (Err(Error::ProjectionDegenerate { .. } | Error::SpectrumHit { .. }), _, _)
                | (_, Err(Error::ProjectionDegenerate { .. } | Error::SpectrumHit { .. }), _) => {
                    skipped += 1
                }
                _ => f_inv = f64::INFINITY,
            }
        }
    }
    outcome(
        l_inv < IDENTITY_TOL && b_inv < IDENTITY_TOL && f_inv < IDENTITY_TOL,
        format!("25 instances, script_l_inversion {l_inv:.2e}, frak_b_inversion {b_inv:.2e}, frak_f_inversion {f_inv:.2e} ({skipped} degenerate points skipped; bound {IDENTITY_TOL:.0e})"),
    )
}

fn criterion_7(exit: &[ResolventCase], canonical: &[ResolventCase]) -> Outcome {
    let tols = Tolerances::default();
    let a = worked_a();
    let f = ParameterFunction::constant(&a, I, &worked_param(-ONE)).unwrap();
    let v = resolvents::i_admissibility_test(&a, &f, &SectorSpec::default_for(1), &tols).unwrap();
    let witness_ok = v
        .witness
        .as_ref()
        .is_some_and(|w| (w - basis_vector(2, 1)).norm() < 1e-10);
    let proxy = v
        .rate_estimates
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let rejected =
        !v.admissible && witness_ok && v.residual < WITNESS_RESIDUAL && proxy < tols.rate_bound;

    let mut accepted = 0;
    let total = exit.len() + canonical.len();
    for case in exit.iter().chain(canonical) {
        let f = ParameterFunction::from_extension(&case.ext, case.lambda0).unwrap();
        let sign = if case.lambda0.im > 0.0 { 1 } else { -1 };
        let v = resolvents::i_admissibility_test(
            &case.ext.a,
            &f,
            &SectorSpec::default_for(sign),
            &tols,
        )
        .unwrap();
        accepted += v.admissible as usize;
    }

    // dense range forces defect 0, where the only parameter is the empty one
    let mut dense_ok = 0;
    for seed in 0..20 {
        let a = gen_symmetric(&InstanceSpec {
            ambient_dim: 2 + (seed as usize % 5),
            defect: 0,
            dense_range: true,
            seed,
            ..Default::default()
        })
        .unwrap();
        let z = c(0.2 * seed as f64 - 1.0, 0.8);
        let f =
            ParameterFunction::constant(&a, z, &DomainOperator::trivial(a.ambient_dim())).unwrap();
        let v =
            resolvents::i_admissibility_test(&a, &f, &SectorSpec::default_for(1), &tols).unwrap();
        dense_ok += (v.admissible && v.forbidden_dim == 0) as usize;
    }
    outcome(
        rejected && accepted == total && dense_ok == 20,
        format!(
            "c = -1 rejected: {rejected} (residual {:.1e}, proxy {proxy:.1e}); invertible-extension parameters accepted {accepted}/{total}; dense-range accepted {dense_ok}/20",
            v.residual
        ),
    )
}

fn criterion_8(exit: &[ResolventCase], canonical: &[ResolventCase]) -> Outcome {
    let worst = exit
        .iter()
        .chain(canonical)
        .map(|case| identities::resolvent_symmetry(&case.ext, &default_grid(case.lambda0)).unwrap())
        .fold(0.0, f64::max);
    outcome(
        worst < SYMMETRY_TOL,
        format!("50 extensions x 24 points, worst {worst:.2e} (bound {SYMMETRY_TOL:.0e})"),
    )
}

fn criterion_9() -> Outcome {
    let a = worked_a();
    let f1 = ParameterFunction::constant(&a, I, &worked_param(I)).unwrap();
    let f2 =
        ParameterFunction::constant(&a, I, &worked_param(Complex64::from_polar(1.0, 2.0))).unwrap();
    let gap = default_grid(I)
        .into_iter()
        .map(|lam| {
            let r1 = shtraus_resolvent(&a, &f1, lam).unwrap();
            let r2 = shtraus_resolvent(&a, &f2, lam).unwrap();
            linalg::op_norm(&(r1 - r2))
        })
        .fold(0.0, f64::max);
    outcome(
        gap > DISTINCT_GAP,
        format!("largest grid gap {gap:.3e} (needs > {DISTINCT_GAP:.0e})"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let exit = resolvent_cases(Doubling::Always, 505);
    let canonical = resolvent_cases(Doubling::Never, 506);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 Neumann round trip", criterion_1()),
        ("2 invertibility equivalence", criterion_2()),
        ("3 Cayley identities", criterion_3()),
        ("4 invertible self-adjoint builder", criterion_4()),
        ("5 Shtraus correspondence", criterion_5(&exit, &canonical)),
        ("6 resolvent-function identities", criterion_6(&exit)),
        (
            "7 I-admissibility discrimination",
            criterion_7(&exit, &canonical),
        ),
        ("8 resolvent symmetry", criterion_8(&exit, &canonical)),
        ("9 distinct parameters, distinct resolvents", criterion_9()),
    ];
    let mut all = true;
    for (name, o) in &results {
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        all &= o.pass;
    }
    println!(
        "acceptance finished in {:.1}s",
        start.elapsed().as_secs_f64()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
