//! Randomized property suites.
//!
//! Each case draws an instance whose answer is known by construction (see
//! [`gen`]) and compares it against the library and against direct
//! eigenvalue counts. Cases are independent and seeded from
//! `(seed, suite, case)`, so reports do not depend on scheduling.

pub mod gen;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::completion::{assemble, is_solution, minimal_completion, schur_inertia};
use crate::error::Error;
use crate::factor::{inertia_balance, JSpace};
use crate::lifting::{
    defect_data, extract_lift_parameters, lift, verify_defect_identities, verify_link_identities,
};
use crate::quasicontraction::{
    extremal_extensions, is_member, is_member_by_counts, split_counts, uniqueness_report,
};
use crate::relations::{
    antitonicity_check, antitonicity_matrices, friedrichs_krein, inverse_duality_distances,
    common_lower_bound, membership_report, resolvent_interval_check, translation_residuals,
    uniqueness_relation_report, AntitonicityMode,
};
use crate::spectral::{max_norm, DenseMatrix, Inertia, SymmetricMatrix, ToleranceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Completion,
    Factor,
    Lifting,
    Quasicontraction,
    Relations,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Completion,
        Suite::Factor,
        Suite::Lifting,
        Suite::Quasicontraction,
        Suite::Relations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Completion => "completion",
            Suite::Factor => "factor",
            Suite::Lifting => "lifting",
            Suite::Quasicontraction => "quasicontraction",
            Suite::Relations => "relations",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::ALL.to_vec(),
            s => vec![s],
        }
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|s| *s == self).unwrap_or(Self::ALL.len()) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Self::ALL
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFailure {
    pub case: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest relative residual seen over passing and failing cases.
    pub max_residual: f64,
    /// The first few failures, in case order.
    pub failures: Vec<CaseFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }
}

const REPORTED_FAILURES: usize = 10;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for one case; the same triple always yields the same stream.
pub fn case_rng(seed: u64, suite: Suite, case: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ suite.index()) ^ case as u64))
}

/// Runs `cases` cases of every suite in `suite`.
pub fn run(suite: Suite, seed: u64, cases: usize, tol: &ToleranceProfile) -> VerifyReport {
    let suites = suite
        .members()
        .into_iter()
        .map(|s| run_suite(s, seed, cases, tol))
        .collect();
    VerifyReport {
        seed,
        cases,
        suites,
    }
}

fn run_suite(suite: Suite, seed: u64, cases: usize, tol: &ToleranceProfile) -> SuiteReport {
    let outcomes: Vec<Outcome> = (0..cases)
        .into_par_iter()
        .map(|case| run_case(suite, seed, case, tol))
        .collect();
    let mut report = SuiteReport {
        suite: suite.name(),
        cases,
        passed: 0,
        failed: 0,
        max_residual: 0.0,
        failures: Vec::new(),
    };
    for (case, o) in outcomes.into_iter().enumerate() {
        report.max_residual = report.max_residual.max(o.residual);
        match o.failure {
            None => report.passed += 1,
            Some(message) => {
                report.failed += 1;
                if report.failures.len() < REPORTED_FAILURES {
                    report.failures.push(CaseFailure { case, message });
                }
            }
        }
    }
    report
}

/// Result of a single case.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub failure: Option<String>,
}

pub fn run_case(suite: Suite, seed: u64, case: usize, tol: &ToleranceProfile) -> Outcome {
    let mut rng = case_rng(seed, suite, case);
    let mut check = Check::default();
    let result = catch_unwind(AssertUnwindSafe(|| match suite {
        Suite::Completion => completion_case(&mut rng, tol, &mut check),
        Suite::Factor => factor_case(&mut rng, tol, &mut check),
        Suite::Lifting => lifting_case(&mut rng, tol, &mut check),
        Suite::Quasicontraction => quasicontraction_case(&mut rng, tol, &mut check),
        Suite::Relations => relations_case(&mut rng, tol, &mut check),
        Suite::All => Err(Failure("\"all\" is not a single suite".into())),
    }));
    let failure = match result {
        Ok(Ok(())) => None,
        Ok(Err(Failure(msg))) => Some(msg),
        Err(payload) => Some(format!(
            "panic: {}",
            payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unknown")
        )),
    };
    Outcome {
        residual: check.max_residual,
        failure,
    }
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type CaseResult = std::result::Result<(), Failure>;

#[derive(Debug, Default)]
struct Check {
    max_residual: f64,
}

impl Check {
    fn residual(&mut self, what: &str, value: f64, bound: f64) -> CaseResult {
        self.max_residual = self.max_residual.max(value);
        if value <= bound {
            Ok(())
        } else {
            Err(Failure(format!("{what}: residual {value:.3e} exceeds {bound:.3e}")))
        }
    }

    fn equal<T: PartialEq + fmt::Debug>(&self, what: &str, found: T, expected: T) -> CaseResult {
        if found == expected {
            Ok(())
        } else {
            Err(Failure(format!("{what}: found {found:?}, expected {expected:?}")))
        }
    }
}

/// Relative distance `‖a − b‖ / (1 + ‖b‖)` in the max norm.
fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    max_norm(&(a - b)) / (1.0 + max_norm(b))
}

/// Eigenvalue counts straight from an eigensolve, threshold `τ·n·max(‖M‖, scale)`.
fn direct_inertia(m: &DenseMatrix, scale: f64, tol: &ToleranceProfile) -> Inertia {
    let n = m.nrows();
    if n == 0 {
        return Inertia::default();
    }
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let norm = eigs.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let thr = tol.zero * n.max(1) as f64 * norm.max(scale);
    Inertia {
        n_plus: eigs.iter().filter(|l| **l > thr).count(),
        n_minus: eigs.iter().filter(|l| **l < -thr).count(),
        n_zero: eigs.iter().filter(|l| l.abs() <= thr).count(),
        n_inf: 0,
    }
}

fn negatives(m: &DenseMatrix, scale: f64, tol: &ToleranceProfile) -> usize {
    direct_inertia(m, scale, tol).n_minus
}

fn completion_case(rng: &mut ChaCha8Rng, tol: &ToleranceProfile, check: &mut Check) -> CaseResult {
    let inst = gen::completion_instance(rng);
    let blk = &inst.block;
    let sol = minimal_completion(blk, tol)?;
    check.equal("kappa", sol.kappa, inst.kappa)?;

    let a11 = blk.a11.as_matrix();
    let e = a11.clone().symmetric_eigen();
    let root = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(|l| l.abs().sqrt()))
        * e.eigenvectors.transpose();
    check.residual("|A11|^(1/2) S = A12", rel(&(&root * &sol.s), &blk.a12), tol.residual)?;
    let floor = sol.s.transpose() * &sol.j * &sol.s;
    check.residual("a22_min = S*JS", rel(&sol.a22_min, &floor), tol.residual)?;

    let full = assemble(blk, &sol.a22_min())?;
    check.equal(
        "nu_-(minimal completion)",
        negatives(full.as_matrix(), 1.0, tol),
        inst.kappa,
    )?;

    let n2 = blk.n2();
    for k in 0..10 {
        let member = k < 5;
        let y = if member {
            let rank = rng.random_range(0..=n2);
            gen::psd(rng, n2, rank)
        } else {
            gen::indefinite(rng, n2)
        };
        let a22 = SymmetricMatrix::symmetrize(&sol.a22_min + y.as_matrix());
        let by_order = is_solution(blk, &a22, tol)?;
        let full = assemble(blk, &a22)?;
        let by_count = negatives(full.as_matrix(), 1.0, tol) == inst.kappa;
        check.equal("membership by order", by_order, member)?;
        check.equal("membership by count", by_count, member)?;
        let scale = 1.0 + max_norm(a22.as_matrix());
        check.equal(
            "Schur inertia",
            schur_inertia(blk, &a22, tol)?,
            direct_inertia(full.as_matrix(), scale, tol),
        )?;
    }
    Ok(())
}

fn factor_case(rng: &mut ChaCha8Rng, tol: &ToleranceProfile, check: &mut Check) -> CaseResult {
    // Inertia balance between the two defect operators.
    let n1 = rng.random_range(1..=5);
    let n2 = rng.random_range(1..=5);
    let j1s = gen::signs_up_to(rng, n1, n1);
    let j2s = gen::signs_up_to(rng, n2, n2);
    let t = gen::j_operator(rng, &j1s, &j2s);
    let (j1, j2) = (JSpace::from_signs(&j1s)?, JSpace::from_signs(&j2s)?);
    let (left, right) = inertia_balance(&t, &j1, &j2, tol)?;
    let scale = 1.0 + t.norm_squared();
    let m1 = j1.j().as_matrix() - t.transpose() * j2.j().as_matrix() * &t;
    let m2 = j2.j().as_matrix() - &t * j1.j().as_matrix() * t.transpose();
    let (d1, d2) = (direct_inertia(&m1, scale, tol), direct_inertia(&m2, scale, tol));
    check.equal("inertia of J1 - T*J2T", left, d1)?;
    check.equal("inertia of J2 - TJ1T*", right, d2)?;
    let neg = |s: &[f64]| s.iter().filter(|x| **x < 0.0).count();
    let pos = |s: &[f64]| s.iter().filter(|x| **x > 0.0).count();
    check.equal("negative balance", d1.n_minus + neg(&j2s), d2.n_minus + neg(&j1s))?;
    check.equal("positive balance", d1.n_plus + pos(&j2s), d2.n_plus + pos(&j1s))?;
    check.equal("zero balance", d1.n_zero, d2.n_zero)?;

    // Additivity over the generalized Schur complement.
    let inst = gen::completion_instance(rng);
    let blk = &inst.block;
    let n2 = blk.n2();
    let a22 = if rng.random_bool(0.3) {
        let sol = minimal_completion(blk, tol)?;
        let rank = rng.random_range(0..=n2);
        SymmetricMatrix::symmetrize(&sol.a22_min + gen::psd(rng, n2, rank).as_matrix())
    } else {
        gen::indefinite(rng, n2)
    };
    let full = assemble(blk, &a22)?;
    let e = blk.a11.as_matrix().clone().symmetric_eigen();
    let thr = 1e-9 * (1.0 + e.eigenvalues.amax());
    let pinv_root = e.eigenvalues.map(|l| if l.abs() > thr { l.abs().powf(-0.5) } else { 0.0 });
    let sign = e.eigenvalues.map(|l| if l.abs() > thr { l.signum() } else { 0.0 });
    let w = &e.eigenvectors * DMatrix::from_diagonal(&pinv_root) * e.eigenvectors.transpose();
    let j = &e.eigenvectors * DMatrix::from_diagonal(&sign) * e.eigenvectors.transpose();
    let floor = blk.a12.transpose() * &w * j * &w * &blk.a12;
    let complement = a22.as_matrix() - &floor;
    let cscale = max_norm(a22.as_matrix()) + max_norm(&floor);
    let scale = 1.0 + max_norm(full.as_matrix());
    let direct = direct_inertia(full.as_matrix(), scale, tol);
    check.equal(
        "nu_-(A) = nu_-(A11) + nu_-(Schur complement)",
        direct.n_minus,
        inst.kappa + negatives(&complement, cscale, tol),
    )?;
    check.equal("Schur inertia", schur_inertia(blk, &a22, tol)?, direct)?;

    // Splitting of ν₋(I − T²) into ν₋(I + T) + ν₋(I − T).
    let n = rng.random_range(1..=6);
    let lambdas: Vec<f64> = (0..n)
        .map(|_| match rng.random_range(0..10) {
            0 => 1.0,
            1 => -1.0,
            _ => loop {
                let l: f64 = rng.random_range(-3.0..3.0);
                if (l.abs() - 1.0).abs() >= 0.05 {
                    break l;
                }
            },
        })
        .collect();
    let t = gen::symmetric_with_spectrum(rng, &lambdas);
    let below = lambdas.iter().filter(|l| **l < -1.0).count();
    let above = lambdas.iter().filter(|l| **l > 1.0).count();
    check.equal("(nu_-(I+T), nu_-(I-T))", split_counts(&t, tol)?, (below, above))?;
    Ok(())
}

fn lifting_case(rng: &mut ChaCha8Rng, tol: &ToleranceProfile, check: &mut Check) -> CaseResult {
    let inst = gen::lift_instance(rng)?;
    let d = defect_data(&inst.t, &inst.j1, &inst.j2, tol)?;
    check.equal("kappa1", d.kappa1, inst.kappa1)?;
    check.equal("kappa2", d.kappa2, inst.kappa2)?;
    check.equal("defect identities", verify_defect_identities(&d, tol), true)?;
    check.equal("link identities", verify_link_identities(&d, tol), true)?;

    let (j1p, j2p) = (&inst.j1prime, &inst.j2prime);
    let tt = lift(&d, &inst.params, j1p, j2p, tol)?;
    let back = extract_lift_parameters(&tt, &d, j1p, j2p, tol)?;
    let again = lift(&d, &back, j1p, j2p, tol)?;
    check.residual("lift round trip", rel(&again, &tt), tol.residual)?;
    check.residual("Gamma1 recovered", rel(&back.gamma1, &inst.params.gamma1), tol.residual)?;
    check.residual("Gamma2 recovered", rel(&back.gamma2, &inst.params.gamma2), tol.residual)?;
    check.residual("Gamma recovered", rel(&back.gamma, &inst.params.gamma), tol.residual)?;

    let jt1 = inst.j1.direct_sum(j1p);
    let jt2 = inst.j2.direct_sum(j2p);
    let scale = 1.0 + tt.norm_squared();
    let neg = |j: &JSpace| j.j().as_matrix().diagonal().iter().filter(|x| **x < 0.0).count();
    let k1 = negatives(&(jt1.j().as_matrix() - tt.transpose() * jt2.j().as_matrix() * &tt), scale, tol);
    let k2 = negatives(&(jt2.j().as_matrix() - &tt * jt1.j().as_matrix() * tt.transpose()), scale, tol);
    check.equal("lifted kappa1", k1, inst.kappa1 - neg(j2p))?;
    check.equal("lifted kappa2", k2, inst.kappa2 - neg(j1p))?;
    Ok(())
}

fn quasicontraction_case(
    rng: &mut ChaCha8Rng,
    tol: &ToleranceProfile,
    check: &mut Check,
) -> CaseResult {
    let n1 = rng.random_range(1..=4);
    let n2 = rng.random_range(1..=2);
    let want_unique = rng.random_bool(0.5);
    let inst = gen::column_instance(rng, n1, n2, want_unique);
    let col = &inst.column;
    let pair = extremal_extensions(col, tol)?;
    let bound = tol.psd;
    check.residual("T_min", rel(pair.t_min.as_matrix(), inst.t_min().as_matrix()), bound)?;
    check.residual("T_max", rel(pair.t_max.as_matrix(), inst.t_max().as_matrix()), bound)?;

    let dual = extremal_extensions(&col.negated(), tol)?;
    check.residual("(-T)_min = -T_max", rel(&-dual.t_min.as_matrix(), pair.t_max.as_matrix()), bound)?;
    check.residual("(-T)_max = -T_min", rel(&-dual.t_max.as_matrix(), pair.t_min.as_matrix()), bound)?;

    let gap = pair.t_max.as_matrix() - pair.t_min.as_matrix();
    let mut expected = DMatrix::zeros(n1 + n2, n1 + n2);
    expected.view_mut((n1, n1), (n2, n2)).copy_from(&inst.gap());
    check.residual("gap formula", rel(&gap, &expected), bound)?;

    let t11 = col.t11.as_matrix();
    let scale = 1.0 + max_norm(t11);
    let id = DMatrix::identity(n1, n1);
    let kp = negatives(&(&id - t11), scale, tol);
    let km = negatives(&(&id + t11), scale, tol);
    check.equal("(kappa_plus, kappa_minus)", (pair.kappa_plus, pair.kappa_minus), (kp, km))?;

    let mid = (pair.t_min.as_matrix() + pair.t_max.as_matrix()) * 0.5;
    let n = n1 + n2;
    let idn = DMatrix::identity(n, n);
    for k in 0..21 {
        let s = -1.5 + 0.15 * k as f64;
        let mut t = mid.clone();
        for i in n1..n {
            t[(i, i)] += s;
        }
        let scale = 1.0 + max_norm(&t);
        let by_counts_direct =
            negatives(&(&idn + &t), scale, tol) == km && negatives(&(&idn - &t), scale, tol) == kp;
        let t = SymmetricMatrix::symmetrize(t);
        let by_order = is_member(&pair, &t, tol)?;
        let by_counts = is_member_by_counts(&pair, &t, tol)?;
        check.equal("grid membership by counts", by_counts, by_order)?;
        check.equal("grid membership by direct counts", by_counts_direct, by_order)?;
    }

    for member in [true, false] {
        let t = gen::extension_candidate(rng, &inst, member);
        check.equal("candidate membership", is_member(&pair, &t, tol)?, member)?;
    }

    let report = uniqueness_report(col, tol)?;
    check.equal("gap test", report.unique(), inst.unique)?;
    let rank = report.isometry.map(|r| r.rank);
    check.equal("rank test", rank, Some(inst.unique))?;
    Ok(())
}

fn relations_case(rng: &mut ChaCha8Rng, tol: &ToleranceProfile, check: &mut Check) -> CaseResult {
    let want_unique = rng.random_bool(0.5);
    let inst = gen::relation_instance(rng, 5, want_unique);
    let a = &inst.relation;
    let fk = friedrichs_krein(a, tol)?;
    let bound = tol.psd;
    let t_min = inst.to_full(&inst.column.t_min());
    let t_max = inst.to_full(&inst.column.t_max());
    check.residual("T_min", rel(fk.t_min().as_matrix(), t_min.as_matrix()), bound)?;
    check.residual("T_max", rel(fk.t_max().as_matrix(), t_max.as_matrix()), bound)?;
    check.residual("A_F", fk.a_f.distance(&gen::inverse_cayley(&t_min)), tol.subspace)?;
    check.residual("A_K", fk.a_k.distance(&gen::inverse_cayley(&t_max)), tol.subspace)?;
    let t11 = inst.column.column.t11.as_matrix();
    let n1 = t11.nrows();
    let kappa = negatives(&(DMatrix::identity(n1, n1) - t11 * t11), 1.0 + max_norm(t11), tol);
    check.equal("kappa", fk.kappa, kappa)?;

    let n2 = inst.column.column.n2();
    for member in [true, true, false, false] {
        if !member && n2 == 0 {
            continue;
        }
        let t = inst.to_full(&gen::extension_candidate(rng, &inst.column, member));
        let a_tilde = gen::inverse_cayley(&t);
        let r = membership_report(&fk, a, &a_tilde, tol)?;
        check.equal("membership by Cayley transform", r.by_cayley, member)?;
        check.equal("membership by relation order", r.by_order, member)?;
        check.equal("membership by negative count", r.by_count, member)?;
        if member {
            let mu = common_lower_bound(&fk, &a_tilde, tol)?;
            for step in [0.1, 1.0, 10.0] {
                let shift = -mu + step;
                check.equal("shifted resolvent interval", resolvent_interval_check(&fk, &a_tilde, shift, tol)?, true)?;
            }
        }
    }

    let (d1, d2) = inverse_duality_distances(a, tol)?;
    check.residual("(A^-1)_F = (A_K)^-1", d1, tol.residual)?;
    check.residual("(A^-1)_K = (A_F)^-1", d2, tol.residual)?;

    let u = uniqueness_relation_report(a, tol)?;
    check.equal("gap test", u.column.unique(), inst.column.unique)?;
    let expected_rank = (inst.column.column.n2() > 0).then_some(inst.column.unique);
    check.equal("rank test", u.column.isometry.map(|r| r.rank), expected_rank)?;
    check.equal("A_F = A_K", u.graphs_equal, inst.column.unique)?;
    let (pairing, form) = translation_residuals(a, 4, rng.random(), tol)?;
    check.residual("resolvent pairing identity", pairing, tol.zero)?;
    check.residual("defect form identity", form, tol.zero)?;

    let flip = rng.random_bool(0.5);
    let (h1, h2) = gen::ordered_matrix_pair(rng, flip);
    let scale = 1.0;
    let same = direct_inertia(h1.as_matrix(), scale, tol) == direct_inertia(h2.as_matrix(), scale, tol);
    check.equal("matrix antitonicity", antitonicity_matrices(&h1, &h2, tol)?, same)?;

    let p = gen::ordered_relation_pair(rng);
    check.equal(
        "relation antitonicity",
        antitonicity_check(&p.h1, &p.h2, AntitonicityMode::Relation, tol)?,
        p.i1 == p.i2,
    )?;
    Ok(())
}
