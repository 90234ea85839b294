//! Invariant checks shared by the property suites and the acceptance run.
//! Each check takes a seed and a dimension and reports the first violation.

#![allow(dead_code)]

use liftkit::constructions::{self, random_dephasing_lift, ChainSpec, JumpFamily};
use liftkit::la::{self, Mat};
use liftkit::lifting::{self, AnalyzeOptions, LiftedGenerator};
use liftkit::lindblad::{self, GkslSpec};
use liftkit::opalg::{self, DensityState, Keep, Superoperator};
use liftkit::random;
use liftkit::spectra::{self, WorstCaseDecay};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Wraps checks as 200-case proptests over a seed and a dimension range.
#[allow(unused_macros)]
macro_rules! property_suite {
    ($($name:ident in $dims:expr;)*) => {
        proptest::proptest! {
            #![proptest_config(proptest::test_runner::Config::with_cases(200))]
            $(
                #[test]
                fn $name(seed in proptest::prelude::any::<u64>(), d in $dims) {
                    common::$name(seed, d).map_err(proptest::test_runner::TestCaseError::fail)?;
                }
            )*
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- opalg ----

pub fn s_inner_gram_is_positive(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let s = r.random_range(0.0..=1.0);
    let sigma = random::random_state(&mut r, d);
    let xs: Vec<Mat> = (0..3).map(|_| random::random_matrix(&mut r, d)).collect();
    let mut g = la::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            g[[i, j]] = opalg::s_inner(&xs[i], &xs[j], &sigma, s).unwrap();
        }
    }
    ensure!(la::fro(&(&g - &la::adjoint(&g))) < 1e-10 * la::fro(&g), "Gram matrix not Hermitian");
    let min = la::min_eigh(&la::hermitize(&g)).unwrap();
    ensure!(min > 0.0, "Gram min eigenvalue {min}");
    Ok(())
}

pub fn kms_adjoint_is_an_involution(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let sigma = random::random_state(&mut r, d);
    let phi = random::random_superoperator(&mut r, d);
    let back = opalg::kms_adjoint(&opalg::kms_adjoint(&phi, &sigma).unwrap(), &sigma).unwrap();
    let err = (&back - &phi).fro() / phi.fro().max(1.0);
    ensure!(err < 1e-11, "(Φ⋆)⋆ − Φ = {err:e}");
    Ok(())
}

pub fn weighting_inverse_and_modular_identity(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let sigma = random::random_state(&mut r, d);
    let g = opalg::weighting_map(&sigma).unwrap();
    let gi = opalg::weighting_power(&sigma, -1.0).unwrap();
    let err = (&g.compose(&gi) - &Superoperator::identity(d)).fro();
    ensure!(err < 1e-11, "Γ Γ^-1 − id = {err:e}");
    let delta = opalg::modular_map(&sigma).unwrap();
    let lr = Superoperator::left(sigma.op()).compose(&Superoperator::right(&sigma.pow(-1.0).unwrap()));
    let err = la::max_abs(&(delta.mat() - lr.mat())) / la::max_abs(lr.mat()).max(1.0);
    ensure!(err < 1e-12, "Δ − L_σ R_σ^-1 = {err:e}");
    Ok(())
}

/// `d` encodes the factor sizes as `(1 + d % 2, 1 + (d / 2) % 2)`.
pub fn partial_trace_inverts_tensor(seed: u64, d: usize) -> Check {
    let (da, db) = (1 + d % 2, 1 + (d / 2) % 2);
    let mut r = rng(seed);
    let a = random::random_matrix(&mut r, da);
    let b = random::random_matrix(&mut r, db);
    let ab = opalg::tensor(&a, &b);
    let ra = opalg::partial_trace(&ab, da, db, Keep::A).unwrap();
    let rb = opalg::partial_trace(&ab, da, db, Keep::B).unwrap();
    let wa = a.mapv(|z| z * la::trace(&b));
    let wb = b.mapv(|z| z * la::trace(&a));
    ensure!(la::fro(&(&ra - &wa)) < 1e-12 * la::fro(&wa).max(1.0), "tr_B(A⊗B) ≠ tr(B) A");
    ensure!(la::fro(&(&rb - &wb)) < 1e-12 * la::fro(&wb).max(1.0), "tr_A(A⊗B) ≠ tr(A) B");
    Ok(())
}

pub fn choi_of_cp_composition_is_psd(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let phi = random::random_cp_map(&mut r, d, 2);
    let psi = random::random_cp_map(&mut r, d, 3);
    for (name, m) in [("Φ", &phi), ("Ψ", &psi)] {
        ensure!(opalg::is_cp(m, 1e-10).unwrap().pass, "{name} not CP");
    }
    let rep = opalg::is_cp(&phi.compose(&psi), 1e-10).unwrap();
    ensure!(rep.pass, "Choi(Φ∘Ψ) min eigenvalue {}", rep.residual);
    Ok(())
}

// ---- lindblad ----

fn random_spec(r: &mut ChaCha8Rng, d: usize) -> GkslSpec {
    let k = r.random_range(1..=2);
    GkslSpec {
        h: random::random_hermitian(r, d),
        jumps: (0..k).map(|_| random::random_matrix(r, d)).collect(),
    }
}

pub fn gksl_is_unital_and_hermiticity_preserving(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let l = lindblad::build_gksl(&random_spec(&mut r, d)).unwrap();
    let scale = l.fro();
    ensure!(la::fro(&l.apply(&la::eye(d))) < 1e-12 * scale, "L(1) ≠ 0");
    let x = random::random_matrix(&mut r, d);
    let err = la::fro(&(&l.apply(&la::adjoint(&x)) - &la::adjoint(&l.apply(&x))));
    ensure!(err < 1e-12 * scale * la::fro(&x), "L(X†) − L(X)† = {err:e}");
    Ok(())
}

pub fn evolution_keeps_hermitian_inputs_hermitian(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let l = lindblad::build_gksl(&random_spec(&mut r, d)).unwrap();
    let t = r.random_range(0.0..3.0);
    let x = random::random_hermitian(&mut r, d);
    let y = lindblad::evolve(&l, &x, t).unwrap();
    let err = la::fro(&(&y - &la::adjoint(&y)));
    ensure!(err < 1e-11 * la::fro(&x).max(1.0), "anti-Hermitian part {err:e} at t = {t}");
    Ok(())
}

pub fn distance_to_equilibrium_is_non_increasing(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let l = lindblad::build_gksl(&random_spec(&mut r, d)).unwrap();
    if !lindblad::ergodicity_check(&l, 1e-9).unwrap().ergodic {
        return Ok(());
    }
    let sigma = lindblad::invariant_state(&l).unwrap();
    let x = random::random_matrix(&mut r, d);
    let mean = la::eye(d).mapv(|z| z * la::trace(&sigma.op().dot(&x)));
    let prop = lindblad::Propagator::new(&l);
    let mut prev = f64::INFINITY;
    for k in 0..12 {
        let t = 0.25 * k as f64;
        let n = opalg::kms_norm(&(&prop.apply(t, &x) - &mean), &sigma).unwrap();
        ensure!(n <= prev * (1.0 + 1e-9) + 1e-12, "t = {t}: {n} > {prev}");
        prev = n;
    }
    Ok(())
}

pub fn conditional_expectation_laws(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let sigma = random::random_state(&mut r, d);
    // Commutant of a random Hermitian `A`: the span of its eigenprojections.
    let a = random::random_hermitian(&mut r, d);
    let basis = lindblad::kernel_basis(&Superoperator::commutator(&a), 1e-9).unwrap();
    let e = lindblad::conditional_expectation(&basis, &sigma).unwrap();
    let x = random::random_matrix(&mut r, d);
    let ex = e.apply(&x);
    let nx = la::fro(&x);
    ensure!(la::fro(&(&e.apply(&ex) - &ex)) < 1e-10 * nx, "E² ≠ E");
    ensure!(la::fro(&(&e.apply(&la::eye(d)) - &la::eye(d))) < 1e-10, "E(1) ≠ 1");
    let drift = (la::trace(&sigma.op().dot(&ex)) - la::trace(&sigma.op().dot(&x))).norm();
    ensure!(drift < 1e-10 * nx, "tr(σE(X)) − tr(σX) = {drift:e}");
    let y = random::random_matrix(&mut r, d);
    let lhs = opalg::kms_inner(&y, &ex, &sigma).unwrap();
    let rhs = opalg::kms_inner(&e.apply(&y), &x, &sigma).unwrap();
    ensure!((lhs - rhs).norm() < 1e-10 * nx * la::fro(&y), "E is not KMS self-adjoint");
    Ok(())
}

// ---- spectra ----

pub fn decomposition_parts_have_the_right_symmetry(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let sigma = random::random_state(&mut r, d);
    let l = random::random_superoperator(&mut r, d);
    let (s, a) = spectra::decompose(&l, &sigma).unwrap();
    let tol = 1e-11 * l.fro();
    ensure!((&opalg::kms_adjoint(&s, &sigma).unwrap() - &s).fro() < tol, "L_S⋆ ≠ L_S");
    ensure!((&opalg::kms_adjoint(&a, &sigma).unwrap() + &a).fro() < tol, "L_A⋆ ≠ −L_A");
    ensure!((&(&s + &a) - &l).fro() < tol, "L_S + L_A ≠ L");
    Ok(())
}

pub fn gap_is_invariant_under_kms_adjoint(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let gamma = r.random_range(0.1..10.0);
    let lift = random_dephasing_lift(&mut r, d, gamma).unwrap();
    let l = lift.l_gamma();
    let ls = opalg::kms_adjoint(&l, lift.sigma()).unwrap();
    let g1 = spectra::spectral_gap(&l, lift.sigma()).unwrap();
    let g2 = spectra::spectral_gap(&ls, lift.sigma()).unwrap();
    ensure!((g1 - g2).abs() <= 1e-9 * l.norm(), "gap {g1} vs adjoint gap {g2}");
    Ok(())
}

pub fn singular_gap_equals_spectral_gap_when_symmetric(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let sigma = random::random_state(&mut r, d);
    let l = random::random_superoperator(&mut r, d);
    let (s, _) = spectra::decompose(&l, &sigma).unwrap();
    // Shift below zero so the spectrum has no kernel ambiguity.
    let top = spectra::spectrum(&s, &sigma).unwrap().iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let shifted = &s - &Superoperator::identity(d).scale(la::c(top + 0.5));
    let sg = spectra::singular_gap(&shifted, &sigma).unwrap();
    let eg = spectra::spectral_gap(&shifted, &sigma).unwrap();
    ensure!((sg - eg).abs() < 1e-10 * shifted.norm().max(1.0), "singular gap {sg} vs spectral gap {eg}");
    Ok(())
}

pub fn relaxation_time_exceeds_half_inverse_singular_gap(seed: u64, d: usize) -> Check {
    let mut r = rng(seed);
    let gamma = r.random_range(0.2..5.0);
    let lift = random_dephasing_lift(&mut r, d, gamma).unwrap();
    let l = lift.l_gamma();
    let sg = spectra::singular_gap(&l, lift.sigma()).unwrap();
    let gap = spectra::spectral_gap(&l, lift.sigma()).unwrap();
    let decay = WorstCaseDecay::new(&l, lift.sigma()).unwrap();
    let Some(t_rel) = decay.relaxation_time(40.0 / gap, 400).unwrap() else {
        return Err("no relaxation within the horizon".into());
    };
    ensure!(t_rel >= 0.95 / (2.0 * sg), "t_rel {t_rel} < 1/(2s) = {}", 0.5 / sg);
    Ok(())
}

// ---- lifting ----

fn span_projector(basis: &[Mat]) -> Mat {
    let d = basis[0].nrows();
    let cols = la::columns(&basis.iter().map(la::vec).collect::<Vec<_>>(), d * d);
    let q = la::range_basis(&cols, 1e-10).unwrap();
    q.dot(&la::adjoint(&q))
}

fn dephasing_lift(seed: u64, d: usize) -> LiftedGenerator {
    random_dephasing_lift(&mut rng(seed), d, 1.0).unwrap()
}

pub fn fixed_points_do_not_depend_on_gamma(seed: u64, d: usize) -> Check {
    let lift = dephasing_lift(seed, d);
    let p = span_projector(lift.f_basis());
    for g in [0.1, 1.0, 10.0] {
        let k = lindblad::kernel_basis(&lift.l_gamma_at(g), 1e-10).unwrap();
        ensure!(k.len() == lift.f_basis().len(), "γ = {g}: dim {} vs {}", k.len(), lift.f_basis().len());
        ensure!(la::fro(&(&span_projector(&k) - &p)) < 1e-8, "γ = {g}: kernels differ");
    }
    Ok(())
}

pub fn overdamped_generator_is_symmetric_negative_and_unital(seed: u64, d: usize) -> Check {
    let lift = dephasing_lift(seed, d);
    let model = lifting::overdamped_generator(&lift).unwrap();
    let g = &model.l_o;
    let scale = la::norm2(g).unwrap().max(1.0);
    ensure!(la::fro(&(g - &la::adjoint(g))) < 1e-11 * scale, "L_O not KMS self-adjoint");
    let top = la::eigvalsh(&la::hermitize(g)).unwrap().iter().cloned().fold(f64::MIN, f64::max);
    ensure!(top < 1e-11 * scale, "L_O has positive eigenvalue {top}");
    ensure!(la::fro(&model.apply(&lift, &la::eye(d))) < 1e-11 * scale, "L_O(1) ≠ 0");
    Ok(())
}

pub fn overdamped_kernel_is_the_fixed_point_algebra(seed: u64, d: usize) -> Check {
    let lift = dephasing_lift(seed, d);
    let model = lifting::overdamped_generator(&lift).unwrap();
    let k = model.kernel_dim().unwrap();
    ensure!(k == lift.f_basis().len(), "dim ker L_O = {k}, dim F = {}", lift.f_basis().len());
    for f in lift.f_basis() {
        ensure!(la::fro(&model.apply(&lift, f)) < 1e-10 * la::fro(f), "L_O does not annihilate F");
    }
    Ok(())
}

pub fn empirical_rate_sits_between_the_bounds(seed: u64, d: usize) -> Check {
    let lift = dephasing_lift(seed, d);
    let opts = AnalyzeOptions { n_gamma: 5, n_time: 60, ..Default::default() };
    let r = lifting::analyze(&lift, &opts).unwrap();
    for row in &r.rows {
        ensure!(row.nu_emp >= 0.95 * row.nu_lower, "below lower bound: {row:?}");
        let cap = (1.0 + row.c_emp.ln()) * r.nu_upper * 1.05;
        ensure!(row.nu_emp <= cap, "above upper bound {cap}: {row:?}");
    }
    Ok(())
}

// ---- constructions ----

/// Path graph with random rates in `[0.1, 0.5]` plus an occasional chord.
pub fn random_chain(r: &mut ChaCha8Rng, n: usize) -> ChainSpec {
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        let w = r.random_range(0.1..0.5);
        q[i][i + 1] = w;
        q[i + 1][i] = w;
    }
    if n > 2 && r.random_bool(0.5) {
        let w = r.random_range(0.05..0.2);
        q[0][n - 1] = w;
        q[n - 1][0] = w;
    }
    for i in 0..n {
        q[i][i] = -q[i].iter().sum::<f64>();
    }
    ChainSpec { n, q, kappa: (0..n).map(|i| i as f64).collect() }
}

/// GNS lift of `−[V, [V, ·]]` on a qubit, scaled to unit gap; composite
/// dimension 4.
pub fn random_gns(r: &mut ChaCha8Rng) -> (JumpFamily, LiftedGenerator) {
    let sigma_b = DensityState::maximally_mixed(2);
    let l = constructions::random_symmetric_generator(r, 2, 1);
    let l = &l * (1.0 / spectra::spectral_gap(&l, &sigma_b).unwrap());
    let fam = constructions::jump_family_from_gksl(&l, &sigma_b, 1e-10).unwrap();
    let (lift, _) = constructions::gns_lift(&fam, &sigma_b, 1.0).unwrap();
    (fam, lift)
}

pub fn chain_lift_is_hypocoercive_and_ergodic(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let spec = random_chain(&mut r, n);
    let lift = constructions::chain_lift(&spec, r.random_range(0.1..10.0)).unwrap();
    let l = lift.l_gamma();
    ensure!(spectra::hypocoercivity_check(&l, lift.sigma()).unwrap().hypocoercive, "not hypocoercive");
    ensure!(lindblad::ergodicity_check(&l, 1e-9).unwrap().ergodic, "not ergodic");
    let f = lift.f_basis();
    ensure!(f.len() == 1, "dim F = {}", f.len());
    let one = la::eye(n);
    let ip = opalg::hs_inner(&f[0], &one).unwrap().norm();
    ensure!((ip - la::fro(&f[0]) * la::fro(&one)).abs() < 1e-10, "F ≠ span{{1}}");
    Ok(())
}

pub fn certificate_matrix_is_symmetric_psd(seed: u64, n: usize) -> Check {
    let cert = constructions::chain_certificate(&random_chain(&mut rng(seed), n)).unwrap();
    let m = ndarray::Array2::from_shape_fn((n, n), |(i, j)| cert.m[i][j]);
    ensure!(m.iter().zip(m.t().iter()).all(|(a, b)| (a - b).abs() < 1e-14), "M not symmetric");
    let min = la::min_eigh(&la::from_real(&m)).unwrap();
    ensure!(min >= -1e-10, "M min eigenvalue {min}");
    Ok(())
}

/// Random thermal qubit family: a diagonal jump plus, away from `p0 = ½`,
/// a lowering pair.
pub fn gns_artifacts_satisfy_their_constraints(seed: u64, _d: usize) -> Check {
    let mut r = rng(seed);
    let p0 = r.random_range(0.15..0.85);
    let sigma_b = DensityState::from_diag(&[p0, 1.0 - p0]).unwrap();
    let mut v = la::zeros(2, 2);
    v[[0, 1]] = la::c(r.random_range(0.2..1.5));
    let w: f64 = ((1.0 - p0) / p0).ln();
    let h = r.random_range(0.1..1.0);
    let mut fam = JumpFamily { jumps: vec![la::diag(&[h, -h])], bohr: vec![0.0], conj: vec![0] };
    if w.abs() > 1e-3 {
        let (a, b) = if w > 0.0 { (v.clone(), la::adjoint(&v)) } else { (la::adjoint(&v), v) };
        fam.jumps.extend([a, b]);
        fam.bohr.extend([w.abs(), -w.abs()]);
        fam.conj = vec![0, 2, 1];
    }
    let (_, art) = constructions::gns_lift(&fam, &sigma_b, 1.0).unwrap();
    let res = art.residual(&fam).unwrap();
    ensure!(res < 1e-11, "constraint residual {res:e}");
    Ok(())
}

pub fn schur_on_integer_line_is_dephasing(_seed: u64, n: usize) -> Check {
    let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
    let (l, _) = constructions::schur_generator(&pts).unwrap();
    let kappa: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let dep = constructions::dephasing_generator(&kappa).unwrap();
    ensure!(l.mat() == dep.mat(), "Schur and dephasing generators differ");
    Ok(())
}

fn slope_in_band(lift: &LiftedGenerator, x0: &Mat) -> Check {
    let model = lifting::overdamped_generator(lift).unwrap();
    let study = lifting::overdamped_convergence_test(lift, &model, x0, 1.0, &[0.2, 0.1, 0.05, 0.025]).unwrap();
    if let Some(s) = study.slope {
        ensure!((0.8..=1.2).contains(&s), "slope {s}: {:?}", study.rows);
    }
    Ok(())
}

pub fn overdamped_limit_is_first_order_on_chains(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let lift = constructions::chain_lift(&random_chain(&mut r, n), 1.0).unwrap();
    let x0 = la::diag(&(0..n).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>());
    slope_in_band(&lift, &x0)
}

pub fn overdamped_limit_is_first_order_on_gns_lifts(seed: u64, _d: usize) -> Check {
    let mut r = rng(seed);
    let (_, lift) = random_gns(&mut r);
    let h = random::random_hermitian(&mut r, 4);
    let x0 = lift.from_coords(&lift.coords(&h));
    slope_in_band(&lift, &x0)
}

/// Optimality of GNS lifts with `κ ≥ 0` at the 0.02 level. The explicit
/// constants put `ν_max/√λ_O` near 0.004, so this check fails.
pub fn gns_lower_bound_is_a_fixed_fraction_of_sqrt_gap(seed: u64, _d: usize) -> Check {
    let mut r = rng(seed);
    let (fam, lift) = random_gns(&mut r);
    let sigma_b = DensityState::maximally_mixed(2);
    let (k, _) = constructions::intertwining_kappa(&fam.generator(), &fam, &sigma_b, 1e-9).unwrap();
    ensure!(k.unwrap_or(-1.0) >= -1e-10, "family is not κ ≥ 0 intertwining");
    let model = lifting::overdamped_generator(&lift).unwrap();
    let consts = lifting::bound_constants(&lift, &model, None).unwrap();
    let ratio = lifting::lower_bound_rate(&consts, 1.0).nu_max / model.lambda_o.sqrt();
    ensure!(ratio >= 0.02, "ν_max/√λ_O = {ratio}");
    Ok(())
}

/// `(name, check, dimension range)` for every invariant, in module order.
pub type Entry = (&'static str, fn(u64, usize) -> Check, std::ops::RangeInclusive<usize>);

pub const ALL: &[Entry] = &[
    ("opalg: s_inner positive definite", s_inner_gram_is_positive, 2..=4),
    ("opalg: kms_adjoint involution", kms_adjoint_is_an_involution, 2..=4),
    ("opalg: weighting inverse and modular identity", weighting_inverse_and_modular_identity, 2..=4),
    ("opalg: partial trace of tensor", partial_trace_inverts_tensor, 0..=3),
    ("opalg: CP composition", choi_of_cp_composition_is_psd, 2..=4),
    ("lindblad: unital, Hermiticity preserving", gksl_is_unital_and_hermiticity_preserving, 2..=4),
    ("lindblad: evolution keeps Hermiticity", evolution_keeps_hermitian_inputs_hermitian, 2..=4),
    ("lindblad: contraction to equilibrium", distance_to_equilibrium_is_non_increasing, 2..=4),
    ("lindblad: conditional expectation laws", conditional_expectation_laws, 2..=4),
    ("spectra: decomposition symmetry", decomposition_parts_have_the_right_symmetry, 2..=4),
    ("spectra: gap under KMS adjoint", gap_is_invariant_under_kms_adjoint, 2..=4),
    ("spectra: singular = spectral gap if symmetric", singular_gap_equals_spectral_gap_when_symmetric, 2..=4),
    ("spectra: t_rel ≥ 1/(2s)", relaxation_time_exceeds_half_inverse_singular_gap, 2..=4),
    ("lifting: F(L_γ) independent of γ", fixed_points_do_not_depend_on_gamma, 2..=4),
    ("lifting: L_O symmetric, negative, unital", overdamped_generator_is_symmetric_negative_and_unital, 2..=4),
    ("lifting: ker L_O = F(L_γ)", overdamped_kernel_is_the_fixed_point_algebra, 2..=4),
    ("lifting: ν_emp between bounds", empirical_rate_sits_between_the_bounds, 2..=4),
    ("lifting: overdamped slope on chains", overdamped_limit_is_first_order_on_chains, 2..=4),
    ("lifting: overdamped slope on GNS lifts", overdamped_limit_is_first_order_on_gns_lifts, 2..=2),
    ("constructions: chain lift hypocoercive", chain_lift_is_hypocoercive_and_ergodic, 2..=4),
    ("constructions: certificate M symmetric PSD", certificate_matrix_is_symmetric_psd, 2..=4),
    ("constructions: GNS artifact constraints", gns_artifacts_satisfy_their_constraints, 2..=2),
    ("constructions: Schur on a line = dephasing", schur_on_integer_line_is_dephasing, 2..=4),
    ("constructions: GNS ν_lower/√λ_O ≥ 0.02", gns_lower_bound_is_a_fixed_fraction_of_sqrt_gap, 2..=2),
];

/// Invariants that cannot hold with the explicit bound constants.
pub const KNOWN_UNATTAINABLE: &[&str] = &["constructions: GNS ν_lower/√λ_O ≥ 0.02"];

/// Runs `check` on `trials` seeds spread over `dims`; returns the first
/// failure as `(seed, dim, message)`.
pub fn sweep(check: fn(u64, usize) -> Check, dims: std::ops::RangeInclusive<usize>, trials: u64) -> Option<(u64, usize, String)> {
    let span = (dims.end() - dims.start() + 1) as u64;
    for t in 0..trials {
        let seed = 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(t + 1);
        let d = dims.start() + (t % span) as usize;
        if let Err(e) = check(seed, d) {
            return Some((seed, d, e));
        }
    }
    None
}
