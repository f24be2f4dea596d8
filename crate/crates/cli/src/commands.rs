use std::io::Read;
use std::path::Path;

use kreinkit::completion::{self, IncompleteBlock};
use kreinkit::factor::JSpace;
use kreinkit::io::{self, AnyFile, MatrixFile, RelationFile};
use kreinkit::lifting::{self, LiftParameters};
use kreinkit::quasicontraction::{self, SymmetricColumn};
use kreinkit::relations::{self, LinearRelation};
use kreinkit::spectral::{self, DenseMatrix, SymmetricMatrix, ToleranceProfile};
use kreinkit::verify;
use kreinkit::{Error, Result};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::{Cli, Command};

pub struct Output {
    pub json: String,
    pub code: u8,
}

fn ok(v: Value) -> Result<Output> {
    Ok(Output {
        json: serde_json::to_string_pretty(&v).expect("report serializes"),
        code: 0,
    })
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::NonFinite
        | Error::DimensionMismatch(_)
        | Error::NotSymmetricMatrix { .. }
        | Error::NotSymmetric
        | Error::NotSelfadjoint => 3,
        Error::IdentityViolated(_)
        | Error::IndexMismatch { .. }
        | Error::EigenNonConvergence
        | Error::NotALifting { .. } => 1,
        _ => 2,
    }
}

fn tolerance(flag: Option<f64>) -> Result<ToleranceProfile> {
    let env = match std::env::var("KREINKIT_TOL") {
        Ok(s) => Some(
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("KREINKIT_TOL={s:?} is not a number")))?,
        ),
        Err(_) => None,
    };
    match flag.or(env) {
        Some(zero) => ToleranceProfile::DEFAULT.with_zero(zero),
        None => Ok(ToleranceProfile::DEFAULT),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut buf).map(|_| ())
    } else {
        std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf).map(|_| ()))
    };
    res.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(buf)
}

fn matrix(path: &Path) -> Result<DenseMatrix> {
    io::parse_matrix(&read(path)?)
}

fn symmetric(path: &Path) -> Result<SymmetricMatrix> {
    SymmetricMatrix::new(matrix(path)?)
}

/// A relation file, or a matrix file read as the graph of an operator.
fn relation(path: &Path) -> Result<LinearRelation> {
    match io::parse_any(&read(path)?)? {
        AnyFile::Relation(r) => Ok(r),
        AnyFile::Matrix(m) => LinearRelation::from_operator(&m),
    }
}

fn mat(m: &DenseMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).expect("matrix serializes")
}

fn rel(a: &LinearRelation) -> Value {
    serde_json::to_value(RelationFile::from_relation(a)).expect("relation serializes")
}

fn signs(list: &str) -> Result<JSpace> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad sign {s:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    JSpace::from_signs(&values)
}

pub fn run(cli: Cli) -> Result<Output> {
    let tol = tolerance(cli.tol)?;
    let _ = ToleranceProfile::set_default(tol);
    match cli.command {
        Command::Inertia { path } => inertia(&path, &tol),
        Command::Complete { a11, a12, with_a22 } => complete(&a11, &a12, with_a22.as_deref(), &tol),
        Command::Extremes { t11, t21 } => extremes(&t11, &t21, &tol),
        Command::CheckInterval { t11, t21, t } => check_interval(&t11, &t21, &t, &tol),
        Command::Lift {
            t,
            j1,
            j2,
            j1p,
            j2p,
            gamma1,
            gamma2,
            gamma,
        } => {
            let t = matrix(&t)?;
            let j1 = match j1 {
                Some(s) => signs(&s)?,
                None => JSpace::identity(t.ncols()),
            };
            let j2 = match j2 {
                Some(s) => signs(&s)?,
                None => JSpace::identity(t.nrows()),
            };
            let (j1p, j2p) = (signs(&j1p)?, signs(&j2p)?);
            let mut p = LiftParameters::zeros(t.ncols(), t.nrows(), j1p.dim(), j2p.dim());
            if let Some(g) = gamma1 {
                p.gamma1 = matrix(&g)?;
            }
            if let Some(g) = gamma2 {
                p.gamma2 = matrix(&g)?;
            }
            if let Some(g) = gamma {
                p.gamma = matrix(&g)?;
            }
            lift(&t, &j1, &j2, &j1p, &j2p, &p, &tol)
        }
        Command::Cayley { path, inverse } => {
            let a = relation(&path)?;
            let image = a.cayley();
            ok(json!({
                "direction": if inverse { "inverse" } else { "forward" },
                "relation": rel(&image),
                "operator": image.as_bounded_operator(&tol)?.and_then(|op| op.full()).map(|m| mat(&m)),
            }))
        }
        Command::Extensions { path, member } => extensions(&path, member.as_deref(), &tol),
        Command::Verify { suite, seed, cases } => {
            let report = verify::run(suite, seed, cases, &tol);
            let code = if report.passed() { 0 } else { 1 };
            for s in &report.suites {
                eprintln!(
                    "{:<16} {:>5} passed {:>5} failed  max residual {:.3e}",
                    s.suite, s.passed, s.failed, s.max_residual
                );
            }
            Ok(Output {
                json: serde_json::to_string_pretty(&report).expect("report serializes"),
                code,
            })
        }
    }
}

fn inertia(path: &Path, tol: &ToleranceProfile) -> Result<Output> {
    match io::parse_any(&read(path)?)? {
        AnyFile::Matrix(m) => {
            let i = spectral::inertia_of(&SymmetricMatrix::new(m)?, tol)?;
            ok(json!({"n_plus": i.n_plus, "n_minus": i.n_minus, "n_zero": i.n_zero, "n_inf": 0}))
        }
        AnyFile::Relation(a) => {
            let i = relations::relation_inertia(&a, tol)?;
            ok(json!({"n_plus": i.i_plus, "n_minus": i.i_minus, "n_zero": i.i_zero, "n_inf": i.i_inf}))
        }
    }
}

fn complete(a11: &Path, a12: &Path, a22: Option<&Path>, tol: &ToleranceProfile) -> Result<Output> {
    let blk = IncompleteBlock::new(symmetric(a11)?, matrix(a12)?)?;
    if let Some(path) = a22 {
        let a22 = symmetric(path)?;
        let solution = completion::is_solution(&blk, &a22, tol)?;
        let i = completion::schur_inertia(&blk, &a22, tol)?;
        return ok(json!({
            "solution": solution,
            "inertia": {"n_plus": i.n_plus, "n_minus": i.n_minus, "n_zero": i.n_zero},
        }));
    }
    let sol = completion::minimal_completion(&blk, tol)?;
    ok(json!({
        "completable": true,
        "S": mat(&sol.s),
        "J": mat(&sol.j),
        "a22_min": mat(&sol.a22_min),
        "kappa": sol.kappa,
    }))
}

fn column(t11: &Path, t21: &Path) -> Result<SymmetricColumn> {
    SymmetricColumn::new(symmetric(t11)?, matrix(t21)?)
}

fn extremes(t11: &Path, t21: &Path, tol: &ToleranceProfile) -> Result<Output> {
    let col = column(t11, t21)?;
    let pair = quasicontraction::extremal_extensions(&col, tol)?;
    let unique = quasicontraction::uniqueness_report(&col, tol)?.unique();
    ok(json!({
        "t_min": mat(pair.t_min.as_matrix()),
        "t_max": mat(pair.t_max.as_matrix()),
        "kappa": pair.kappa,
        "kappa_plus": pair.kappa_plus,
        "kappa_minus": pair.kappa_minus,
        "unique": unique,
    }))
}

fn check_interval(t11: &Path, t21: &Path, t: &Path, tol: &ToleranceProfile) -> Result<Output> {
    let col = column(t11, t21)?;
    let t = symmetric(t)?;
    let pair = quasicontraction::extremal_extensions(&col, tol)?;
    let by_order = quasicontraction::is_member(&pair, &t, tol)?;
    let by_counts = quasicontraction::is_member_by_counts(&pair, &t, tol)?;
    if by_order != by_counts {
        return Err(Error::IdentityViolated(format!(
            "interval test says {by_order} but eigenvalue counts say {by_counts}"
        )));
    }
    ok(json!({"member": by_order, "member_by_counts": by_counts}))
}

fn lift(
    t: &DenseMatrix,
    j1: &JSpace,
    j2: &JSpace,
    j1p: &JSpace,
    j2p: &JSpace,
    p: &LiftParameters,
    tol: &ToleranceProfile,
) -> Result<Output> {
    let d = lifting::defect_data(t, j1, j2, tol)?;
    let lifted = lifting::lift(&d, p, j1p, j2p, tol)?;
    let back = lifting::extract_lift_parameters(&lifted, &d, j1p, j2p, tol)?;
    let again = lifting::lift(&d, &back, j1p, j2p, tol)?;
    let round_trip = spectral::max_norm(&(&again - &lifted));
    let (jt1, jt2) = (j1.direct_sum(j1p), j2.direct_sum(j2p));
    let defect = |a: &JSpace, b: &JSpace, m: &DenseMatrix| -> Result<usize> {
        let s = SymmetricMatrix::symmetrize(a.j().as_matrix() - m.transpose() * b.j().as_matrix() * m);
        spectral::negative_index(&s, tol)
    };
    ok(json!({
        "lifted": mat(&lifted),
        "kappa1": d.kappa1,
        "kappa2": d.kappa2,
        "lifted_kappa1": defect(&jt1, &jt2, &lifted)?,
        "lifted_kappa2": defect(&jt2, &jt1, &lifted.transpose())?,
        "round_trip_residual": round_trip,
    }))
}

fn extension_report(h: &LinearRelation, tol: &ToleranceProfile) -> Result<Value> {
    let part = relations::operator_part(h, tol)?;
    let op: DenseMatrix = if part.domain.ncols() == 0 {
        DMatrix::zeros(h.space_dim(), h.space_dim())
    } else {
        &part.domain * part.op.as_matrix() * part.domain.transpose()
    };
    Ok(json!({
        "relation": rel(h),
        "operator": mat(&op),
        "mul": mat(&part.mul),
    }))
}

fn extensions(path: &Path, member: Option<&Path>, tol: &ToleranceProfile) -> Result<Output> {
    let a = relation(path)?;
    let fk = relations::friedrichs_krein(&a, tol)?;
    let mut out = json!({
        "kappa": fk.kappa,
        "a_f": extension_report(&fk.a_f, tol)?,
        "a_k": extension_report(&fk.a_k, tol)?,
    });
    if let Some(path) = member {
        let candidate = relation(path)?;
        let verdict = match relations::membership_report(&fk, &a, &candidate, tol) {
            Ok(r) if r.agree() => json!({
                "member": r.by_cayley,
                "by_cayley": r.by_cayley,
                "by_order": r.by_order,
                "by_count": r.by_count,
            }),
            Ok(r) => {
                return Err(Error::IdentityViolated(format!(
                    "membership tests disagree: {r:?}"
                )))
            }
            Err(Error::NotAnExtension { mismatch }) => json!({
                "member": false,
                "extends": false,
                "mismatch": mismatch,
            }),
            Err(e) => return Err(e),
        };
        out["membership"] = verdict;
    }
    ok(out)
}
