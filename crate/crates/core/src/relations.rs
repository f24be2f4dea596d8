//! Linear relations in `ℝⁿ` (subspaces of `ℝⁿ ⊕ ℝⁿ`), the Cayley transform,
//! and the extremal selfadjoint extensions `A_K ≤ Ã ≤ A_F` of a symmetric
//! relation with a prescribed number of negative squares.
//!
//! A relation is stored as an orthonormal basis of its graph. Two relations
//! are equal when the orthogonal projectors onto their graphs agree.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasicontraction::{
    extremal_extensions, uniqueness_report, ExtremalPair, SymmetricColumn, UniquenessReport,
};
use crate::spectral::{
    complement, inertia_scaled, loewner_leq, max_norm, null_space_scaled, orth, orth_scaled,
    spectral_decompose, subspace_distance, DenseMatrix, SymmetricMatrix, ToleranceProfile,
};

#[derive(Debug, Clone)]
pub struct LinearRelation {
    dim: usize,
    basis: DenseMatrix,
}

// Blocks of an orthonormal graph basis have size 1, so rank decisions on
// them use 1 as the floor of the singular value scale.
fn orth1(m: &DenseMatrix, tol: &ToleranceProfile) -> DenseMatrix {
    orth_scaled(m, 1.0, tol)
}

fn null1(m: &DenseMatrix, tol: &ToleranceProfile) -> DenseMatrix {
    null_space_scaled(m, 1.0, tol)
}

/// Moore–Penrose inverse with the singular value cutoff of [`orth1`].
fn pinv(m: &DenseMatrix, tol: &ToleranceProfile) -> Result<DenseMatrix> {
    if m.is_empty() {
        return Ok(DMatrix::zeros(m.ncols(), m.nrows()));
    }
    let svd = crate::spectral::thin_svd(m);
    let smax = svd.singular_values.iter().fold(0.0, |a: f64, &s| a.max(s));
    let eps = tol.zero * m.nrows().max(m.ncols()) as f64 * smax.max(1.0);
    Ok(svd.pseudo_inverse(eps))
}

fn stack(top: &DenseMatrix, bottom: &DenseMatrix) -> DenseMatrix {
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.rows_mut(0, top.nrows()).copy_from(top);
    m.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    m
}

/// Largest entry of the part of `q` outside the span of orthonormal `space`.
fn outside(q: &DenseMatrix, space: &DenseMatrix) -> f64 {
    max_norm(&(q - space * (space.transpose() * q)))
}

impl LinearRelation {
    /// The relation spanned by the pairs `(F[:, i], F′[:, i])`. Dependent
    /// generators are merged.
    pub fn from_generators(f: &DenseMatrix, fp: &DenseMatrix) -> Result<Self> {
        if f.nrows() != fp.nrows() || f.ncols() != fp.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "generator blocks are {}x{} and {}x{}",
                f.nrows(),
                f.ncols(),
                fp.nrows(),
                fp.ncols()
            )));
        }
        crate::spectral::check_finite(f)?;
        crate::spectral::check_finite(fp)?;
        let mut g = stack(f, fp);
        for mut c in g.column_iter_mut() {
            let size = c.amax();
            if size > 0.0 {
                c /= size;
            }
        }
        let basis = orth(&g, &ToleranceProfile::current());
        Ok(LinearRelation {
            dim: f.nrows(),
            basis,
        })
    }

    /// Graph of `M`.
    pub fn from_operator(m: &DenseMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        Self::from_generators(&DMatrix::identity(n, n), m)
    }

    /// `{0} × span Q`.
    pub fn multivalued(q: &DenseMatrix) -> Result<Self> {
        Self::from_generators(&DMatrix::zeros(q.nrows(), q.ncols()), q)
    }

    fn from_basis_unchecked(dim: usize, m: DenseMatrix) -> Self {
        LinearRelation {
            dim,
            basis: orth1(&m, &ToleranceProfile::current()),
        }
    }

    pub fn space_dim(&self) -> usize {
        self.dim
    }

    pub fn graph_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of the graph, `2n × r`.
    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn f_part(&self) -> DenseMatrix {
        self.basis.rows(0, self.dim).into_owned()
    }

    pub fn fp_part(&self) -> DenseMatrix {
        self.basis.rows(self.dim, self.dim).into_owned()
    }

    pub fn graph_projector(&self) -> DenseMatrix {
        &self.basis * self.basis.transpose()
    }

    pub fn distance(&self, other: &LinearRelation) -> f64 {
        if self.dim != other.dim {
            return 1.0;
        }
        subspace_distance(&self.basis, &other.basis)
    }

    pub fn approx_eq(&self, other: &LinearRelation, tol: &ToleranceProfile) -> bool {
        self.distance(other) <= tol.subspace
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &LinearRelation, tol: &ToleranceProfile) -> bool {
        self.dim == other.dim && outside(&other.basis, &self.basis) <= tol.subspace
    }

    pub fn domain(&self, tol: &ToleranceProfile) -> DenseMatrix {
        orth1(&self.f_part(), tol)
    }

    pub fn range(&self, tol: &ToleranceProfile) -> DenseMatrix {
        orth1(&self.fp_part(), tol)
    }

    pub fn kernel(&self, tol: &ToleranceProfile) -> DenseMatrix {
        let c = null1(&self.fp_part(), tol);
        orth1(&(self.f_part() * c), tol)
    }

    pub fn mul(&self, tol: &ToleranceProfile) -> DenseMatrix {
        let c = null1(&self.f_part(), tol);
        orth1(&(self.fp_part() * c), tol)
    }

    /// `{(h, k) : (f′, h) = (f, k) for all (f, f′) ∈ A}`.
    pub fn adjoint(&self) -> LinearRelation {
        let rotated = stack(&self.fp_part(), &(-self.f_part()));
        let q = orth1(&rotated, &ToleranceProfile::current());
        LinearRelation {
            dim: self.dim,
            basis: complement(&q, 2 * self.dim),
        }
    }

    pub fn inverse(&self) -> LinearRelation {
        LinearRelation {
            dim: self.dim,
            basis: stack(&self.fp_part(), &self.f_part()),
        }
    }

    pub fn negate(&self) -> LinearRelation {
        LinearRelation {
            dim: self.dim,
            basis: stack(&self.f_part(), &(-self.fp_part())),
        }
    }

    /// `{(f, f′ + c·f)}`.
    pub fn shift(&self, c: f64) -> LinearRelation {
        let f = self.f_part();
        Self::from_basis_unchecked(self.dim, stack(&f, &(self.fp_part() + &f * c)))
    }

    /// `{(f + f′, f − f′)}`.
    pub fn cayley(&self) -> LinearRelation {
        let (f, fp) = (self.f_part(), self.fp_part());
        Self::from_basis_unchecked(self.dim, stack(&(&f + &fp), &(&f - &fp)))
    }

    /// `(f′, f)` on the graph basis.
    pub fn form_gram(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(self.f_part().transpose() * self.fp_part())
    }

    /// The operator `dom A → ℝⁿ` when `mul A = {0}`.
    pub fn as_bounded_operator(&self, tol: &ToleranceProfile) -> Result<Option<BoundedOperator>> {
        if self.mul(tol).ncols() > 0 {
            return Ok(None);
        }
        let f = self.f_part();
        let domain = orth1(&f, tol);
        let map = self.fp_part() * pinv(&f, tol)? * &domain;
        Ok(Some(BoundedOperator { domain, map }))
    }
}

/// An operator given on an orthonormal basis of its domain: `A·domain = map`.
#[derive(Debug, Clone)]
pub struct BoundedOperator {
    pub domain: DenseMatrix,
    pub map: DenseMatrix,
}

impl BoundedOperator {
    /// The `n×n` matrix when the domain is the whole space.
    pub fn full(&self) -> Option<DenseMatrix> {
        (self.domain.ncols() == self.domain.nrows()).then(|| &self.map * self.domain.transpose())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationClass {
    pub symmetric: bool,
    pub selfadjoint: bool,
    pub nonnegative: bool,
    /// Negative squares of the form `(f′, f)`.
    pub form_negatives: usize,
}

pub fn classify(a: &LinearRelation, tol: &ToleranceProfile) -> Result<RelationClass> {
    let adj = a.adjoint();
    let symmetric = adj.contains(a, tol);
    let selfadjoint = symmetric && a.graph_dim() == adj.graph_dim();
    let form_negatives = inertia_scaled(&a.form_gram(), 1.0, tol)?.n_minus;
    Ok(RelationClass {
        symmetric,
        selfadjoint,
        nonnegative: symmetric && form_negatives == 0,
        form_negatives,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInertia {
    pub i_plus: usize,
    pub i_minus: usize,
    pub i_zero: usize,
    pub i_inf: usize,
}

/// A selfadjoint relation split into its multivalued part and the symmetric
/// operator it induces on `dom H = (mul H)^⊥`.
#[derive(Debug, Clone)]
pub struct OperatorPart {
    pub domain: DenseMatrix,
    pub mul: DenseMatrix,
    /// Matrix of the operator part in the `domain` basis.
    pub op: SymmetricMatrix,
}

impl OperatorPart {
    /// Smallest eigenvalue of the operator part, `+∞` when `dom H = {0}`.
    pub fn lower_bound(&self) -> Result<f64> {
        if self.op.dim() == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(spectral_decompose(&self.op)?.eigenvalues[0])
    }

    /// `(H + s)^{-1}` on the whole space, zero on `mul H`.
    pub fn resolvent(&self, s: f64, tol: &ToleranceProfile) -> Result<SymmetricMatrix> {
        let n = self.domain.nrows();
        let d = self.op.dim();
        let shifted = SymmetricMatrix::symmetrize(self.op.as_matrix() + DMatrix::identity(d, d) * s);
        let dec = spectral_decompose(&shifted)?;
        let scale = 1.0 + max_norm(self.op.as_matrix()) + s.abs();
        if dec.eigenvalues.iter().any(|l| l.abs() <= tol.zero * scale) {
            return Err(Error::PreconditionViolated(format!(
                "H + {s} is not invertible on dom H"
            )));
        }
        let inv = dec.map(|l| 1.0 / l);
        if n == 0 {
            return Ok(SymmetricMatrix::zeros(0));
        }
        Ok(SymmetricMatrix::symmetrize(
            &self.domain * inv.as_matrix() * self.domain.transpose(),
        ))
    }
}

fn require_selfadjoint(h: &LinearRelation, tol: &ToleranceProfile) -> Result<()> {
    if !classify(h, tol)?.selfadjoint {
        return Err(Error::NotSelfadjoint);
    }
    Ok(())
}

pub fn operator_part(h: &LinearRelation, tol: &ToleranceProfile) -> Result<OperatorPart> {
    require_selfadjoint(h, tol)?;
    let mul = h.mul(tol);
    let domain = complement(&mul, h.space_dim());
    let f = h.f_part();
    let op = domain.transpose() * h.fp_part() * pinv(&f, tol)? * &domain;
    Ok(OperatorPart {
        domain,
        mul,
        op: SymmetricMatrix::symmetrize(op),
    })
}

pub fn relation_inertia(h: &LinearRelation, tol: &ToleranceProfile) -> Result<RelationInertia> {
    let part = operator_part(h, tol)?;
    let scale = 1.0 + max_norm(part.op.as_matrix());
    let i = inertia_scaled(&part.op, scale, tol)?;
    Ok(RelationInertia {
        i_plus: i.n_plus,
        i_minus: i.n_minus,
        i_zero: i.n_zero,
        i_inf: part.mul.ncols(),
    })
}

/// `H1 ≤ H2` for selfadjoint relations, decided by
/// `(H2 − a)^{-1} ⪯ (H1 − a)^{-1}` with `a` one below both lower bounds.
pub fn relation_leq(h1: &LinearRelation, h2: &LinearRelation, tol: &ToleranceProfile) -> Result<bool> {
    let p1 = operator_part(h1, tol)?;
    let p2 = operator_part(h2, tol)?;
    relation_leq_at(&p1, &p2, None, tol)
}

/// [`relation_leq`] at a caller-chosen shift `a`, which must lie below
/// both lower bounds.
pub fn relation_leq_shifted(
    h1: &LinearRelation,
    h2: &LinearRelation,
    a: f64,
    tol: &ToleranceProfile,
) -> Result<bool> {
    let p1 = operator_part(h1, tol)?;
    let p2 = operator_part(h2, tol)?;
    relation_leq_at(&p1, &p2, Some(a), tol)
}

fn relation_leq_at(
    p1: &OperatorPart,
    p2: &OperatorPart,
    a: Option<f64>,
    tol: &ToleranceProfile,
) -> Result<bool> {
    let low = finite_or_zero(p1.lower_bound()?.min(p2.lower_bound()?));
    let a = match a {
        Some(a) if a >= low => {
            return Err(Error::ShiftNotAdmissible { shift: a, bound: low });
        }
        Some(a) => a,
        None => low - 1.0,
    };
    let r1 = p1.resolvent(-a, tol)?;
    let r2 = p2.resolvent(-a, tol)?;
    loewner_leq(&r2, &r1, tol)
}

/// Gram matrix of a form on the graph basis and its negative squares.
#[derive(Debug, Clone)]
pub struct FormData {
    pub gram: SymmetricMatrix,
    pub negatives: usize,
}

/// `A` seen through its Cayley transform: `T1 = C(A)` restricted to
/// `H1 = ran(I + A)` and split along `H1 ⊕ H2`.
#[derive(Debug, Clone)]
pub struct CayleyColumn {
    /// Orthonormal basis of `H1`.
    pub b1: DenseMatrix,
    /// Orthonormal basis of `H2 = H1^⊥`.
    pub b2: DenseMatrix,
    /// `T1·b1` in ℝⁿ.
    pub map: DenseMatrix,
    /// `(B1ᵀ T1 B1, B2ᵀ T1 B1)`.
    pub column: SymmetricColumn,
}

impl CayleyColumn {
    /// `[B1 B2]·T·[B1 B2]ᵀ` for `T` given in block coordinates.
    pub fn to_full(&self, t: &SymmetricMatrix) -> SymmetricMatrix {
        let u = self.basis();
        SymmetricMatrix::symmetrize(&u * t.as_matrix() * u.transpose())
    }

    /// `[B1 B2]ᵀ·T·[B1 B2]`.
    pub fn to_blocks(&self, t: &SymmetricMatrix) -> SymmetricMatrix {
        t.congruence(&self.basis())
    }

    fn basis(&self) -> DenseMatrix {
        let n = self.b1.nrows();
        let mut u = DMatrix::zeros(n, n);
        u.columns_mut(0, self.b1.ncols()).copy_from(&self.b1);
        u.columns_mut(self.b1.ncols(), self.b2.ncols()).copy_from(&self.b2);
        u
    }
}

fn require_symmetric(a: &LinearRelation, tol: &ToleranceProfile) -> Result<()> {
    if !classify(a, tol)?.symmetric {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

pub fn cayley_column(a: &LinearRelation, tol: &ToleranceProfile) -> Result<CayleyColumn> {
    require_symmetric(a, tol)?;
    let t1 = a.cayley();
    let op = t1.as_bounded_operator(tol)?.ok_or(Error::CayleyNotOperator)?;
    let b1 = op.domain;
    let b2 = complement(&b1, a.space_dim());
    let t11 = SymmetricMatrix::new(b1.transpose() * &op.map)?;
    let t21 = b2.transpose() * &op.map;
    Ok(CayleyColumn {
        column: SymmetricColumn::new(t11, t21)?,
        b1,
        b2,
        map: op.map,
    })
}

fn close(a: &DenseMatrix, b: &DenseMatrix, tol: &ToleranceProfile) -> bool {
    max_norm(&(a - b)) <= tol.residual * (1.0 + max_norm(a) + max_norm(b))
}

/// The form `(P1 f′, f)` with `P1` the projector onto `ran(I + A)`, checked
/// against the Cayley side: `4a1 = ‖g‖² − ‖T11 g‖²`, `4a = ‖g‖² − ‖T1 g‖²`,
/// `‖T21 g‖² = 4‖P2 f‖²` and `a1 = a + ‖P2 f‖²` with `g = f + f′`.
pub fn form_a1(a: &LinearRelation, tol: &ToleranceProfile) -> Result<FormData> {
    let cc = cayley_column(a, tol)?;
    let (f, fp) = (a.f_part(), a.fp_part());
    let p1 = &cc.b1 * cc.b1.transpose();
    let p2 = &cc.b2 * cc.b2.transpose();
    let gram = SymmetricMatrix::symmetrize(f.transpose() * &p1 * &fp);
    let g = &f + &fp;
    let tg = &f - &fp;
    let gg = g.transpose() * &g;
    let checks = [
        (
            "4a1 = |g|^2 - |T11 g|^2",
            gram.as_matrix() * 4.0,
            &gg - tg.transpose() * &p1 * &tg,
        ),
        (
            "4a = |g|^2 - |T1 g|^2",
            a.form_gram().as_matrix() * 4.0,
            &gg - tg.transpose() * &tg,
        ),
        (
            "|T21 g|^2 = 4|P2 f|^2",
            tg.transpose() * &p2 * &tg,
            f.transpose() * &p2 * &f * 4.0,
        ),
        (
            "a1 = a + |P2 f|^2",
            gram.as_matrix().clone(),
            a.form_gram().as_matrix() + f.transpose() * &p2 * &f,
        ),
    ];
    for (name, lhs, rhs) in checks {
        let lhs = SymmetricMatrix::symmetrize(lhs);
        let rhs = SymmetricMatrix::symmetrize(rhs);
        if !close(lhs.as_matrix(), rhs.as_matrix(), tol) {
            return Err(Error::IdentityViolated(format!("{name} fails")));
        }
    }
    let negatives = inertia_scaled(&gram, 1.0, tol)?.n_minus;
    Ok(FormData { gram, negatives })
}

/// Extremal selfadjoint extensions of a symmetric relation with
/// `ν₋(Ã) = κ`, and the quasi-contractive data they come from.
#[derive(Debug, Clone)]
pub struct ExtremalRelations {
    /// Friedrichs extension, the image of `T_min`.
    pub a_f: LinearRelation,
    /// Kreĭn–von Neumann extension, the image of `T_max`.
    pub a_k: LinearRelation,
    pub kappa: usize,
    pub cayley: CayleyColumn,
    /// Extremal extensions of `C(A)` in block coordinates.
    pub pair: ExtremalPair,
}

impl ExtremalRelations {
    pub fn t_min(&self) -> SymmetricMatrix {
        self.cayley.to_full(&self.pair.t_min)
    }

    pub fn t_max(&self) -> SymmetricMatrix {
        self.cayley.to_full(&self.pair.t_max)
    }
}

pub fn friedrichs_krein(a: &LinearRelation, tol: &ToleranceProfile) -> Result<ExtremalRelations> {
    let a1 = form_a1(a, tol)?;
    let kappa = a1.negatives;
    let nu_a = classify(a, tol)?.form_negatives;
    if kappa != nu_a {
        return Err(Error::NotSolvable {
            kappa11: kappa,
            kappa1: nu_a,
        });
    }
    let cayley = cayley_column(a, tol)?;
    let (c11, c1) = crate::quasicontraction::column_counts(&cayley.column, tol)?;
    if (c11, c1) != (kappa, nu_a) {
        return Err(Error::IdentityViolated(format!(
            "form indices ({kappa}, {nu_a}) differ from Cayley indices ({c11}, {c1})"
        )));
    }
    let pair = extremal_extensions(&cayley.column, tol)?;
    let a_f = LinearRelation::from_operator(cayley.to_full(&pair.t_min).as_matrix())?.cayley();
    let a_k = LinearRelation::from_operator(cayley.to_full(&pair.t_max).as_matrix())?.cayley();
    for (name, ext) in [("A_F", &a_f), ("A_K", &a_k)] {
        if !ext.contains(a, tol) {
            return Err(Error::IdentityViolated(format!("{name} does not extend A")));
        }
        let i = relation_inertia(ext, tol)?;
        if i.i_minus != kappa {
            return Err(Error::IdentityViolated(format!(
                "{name} has {} negative eigenvalues, expected {kappa}",
                i.i_minus
            )));
        }
    }
    Ok(ExtremalRelations {
        a_f,
        a_k,
        kappa,
        cayley,
        pair,
    })
}

/// The three membership tests for `Ext_{A,κ}(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipReport {
    /// `T_min ⪯ C(Ã) ⪯ T_max`, equivalently
    /// `(A_F + I)^{-1} ⪯ (Ã + I)^{-1} ⪯ (A_K + I)^{-1}`.
    pub by_cayley: bool,
    /// `A_K ≤ Ã ≤ A_F`.
    pub by_order: bool,
    /// `i₋(Ã) = κ`.
    pub by_count: bool,
}

impl MembershipReport {
    pub fn agree(&self) -> bool {
        self.by_cayley == self.by_order && self.by_order == self.by_count
    }
}

fn require_extension(
    a: &LinearRelation,
    ext: &LinearRelation,
    tol: &ToleranceProfile,
) -> Result<()> {
    if a.space_dim() != ext.space_dim() {
        return Err(Error::DimensionMismatch(format!(
            "relations live in dimensions {} and {}",
            a.space_dim(),
            ext.space_dim()
        )));
    }
    let mismatch = outside(a.basis(), ext.basis());
    if mismatch > tol.subspace {
        return Err(Error::NotAnExtension { mismatch });
    }
    require_selfadjoint(ext, tol)
}

pub fn membership_report(
    fk: &ExtremalRelations,
    a: &LinearRelation,
    a_tilde: &LinearRelation,
    tol: &ToleranceProfile,
) -> Result<MembershipReport> {
    require_extension(a, a_tilde, tol)?;
    let by_cayley = match a_tilde.cayley().as_bounded_operator(tol)? {
        Some(op) => match op.full() {
            Some(t) => {
                let t = SymmetricMatrix::symmetrize(t);
                loewner_leq(&fk.t_min(), &t, tol)? && loewner_leq(&t, &fk.t_max(), tol)?
            }
            None => false,
        },
        None => false,
    };
    let by_order = relation_leq(&fk.a_k, a_tilde, tol)? && relation_leq(a_tilde, &fk.a_f, tol)?;
    let by_count = relation_inertia(a_tilde, tol)?.i_minus == fk.kappa;
    Ok(MembershipReport {
        by_cayley,
        by_order,
        by_count,
    })
}

/// Whether `Ã ∈ Ext_{A,κ}(0, ∞)`, decided through the Cayley transform and
/// checked against the relation order and the eigenvalue count.
pub fn ext_membership(
    a: &LinearRelation,
    a_tilde: &LinearRelation,
    tol: &ToleranceProfile,
) -> Result<bool> {
    let fk = friedrichs_krein(a, tol)?;
    let r = membership_report(&fk, a, a_tilde, tol)?;
    if !r.agree() {
        return Err(Error::IdentityViolated(format!(
            "membership tests disagree: {r:?}"
        )));
    }
    Ok(r.by_cayley)
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

/// Smallest lower bound of `A_F`, `A_K` and `Ã`; 0 when all three are purely
/// multivalued. Shifts accepted by [`resolvent_interval_check`] exceed its
/// negative.
pub fn common_lower_bound(
    fk: &ExtremalRelations,
    a_tilde: &LinearRelation,
    tol: &ToleranceProfile,
) -> Result<f64> {
    let mut mu = f64::INFINITY;
    for h in [&fk.a_f, &fk.a_k, a_tilde] {
        mu = mu.min(operator_part(h, tol)?.lower_bound()?);
    }
    Ok(finite_or_zero(mu))
}

/// `(A_F + a)^{-1} ⪯ (Ã + a)^{-1} ⪯ (A_K + a)^{-1}` for `a` above minus the
/// common lower bound of `A_F`, `A_K` and `Ã`.
pub fn resolvent_interval_check(
    fk: &ExtremalRelations,
    a_tilde: &LinearRelation,
    a: f64,
    tol: &ToleranceProfile,
) -> Result<bool> {
    let pf = operator_part(&fk.a_f, tol)?;
    let pk = operator_part(&fk.a_k, tol)?;
    let pt = operator_part(a_tilde, tol)?;
    let mu = finite_or_zero(pf.lower_bound()?.min(pk.lower_bound()?).min(pt.lower_bound()?));
    if a <= -mu {
        return Err(Error::ShiftNotAdmissible { shift: a, bound: -mu });
    }
    let rf = pf.resolvent(a, tol)?;
    let rk = pk.resolvent(a, tol)?;
    let rt = pt.resolvent(a, tol)?;
    Ok(loewner_leq(&rf, &rt, tol)? && loewner_leq(&rt, &rk, tol)?)
}

/// Graph distances for `(A^{-1})_F = (A_K)^{-1}` and `(A^{-1})_K = (A_F)^{-1}`.
pub fn inverse_duality_distances(a: &LinearRelation, tol: &ToleranceProfile) -> Result<(f64, f64)> {
    let fk = friedrichs_krein(a, tol)?;
    let inv = friedrichs_krein(&a.inverse(), tol)?;
    Ok((
        inv.a_f.distance(&fk.a_k.inverse()),
        inv.a_k.distance(&fk.a_f.inverse()),
    ))
}

pub fn inverse_duality_check(a: &LinearRelation, tol: &ToleranceProfile) -> Result<bool> {
    let (d1, d2) = inverse_duality_distances(a, tol)?;
    Ok(d1 <= tol.subspace && d2 <= tol.subspace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AntitonicityMode {
    /// Invertible symmetric matrices; the inertias must agree.
    Matrix,
    /// Semibounded selfadjoint relations; the negative counts must agree.
    Relation,
}

/// Whether `H2^{-1} ≤ H1^{-1}` given `H1 ≤ H2`, checked against the inertia
/// condition that characterizes it.
pub fn antitonicity_check(
    h1: &LinearRelation,
    h2: &LinearRelation,
    mode: AntitonicityMode,
    tol: &ToleranceProfile,
) -> Result<bool> {
    match mode {
        AntitonicityMode::Matrix => {
            let m1 = full_operator(h1, tol)?;
            let m2 = full_operator(h2, tol)?;
            antitonicity_matrices(&m1, &m2, tol)
        }
        AntitonicityMode::Relation => {
            if !relation_leq(h1, h2, tol)? {
                return Err(Error::PreconditionViolated("H1 <= H2 fails".into()));
            }
            let holds = relation_leq(&h2.inverse(), &h1.inverse(), tol)?;
            let same = relation_inertia(h1, tol)?.i_minus == relation_inertia(h2, tol)?.i_minus;
            if holds != same {
                return Err(Error::IdentityViolated(format!(
                    "inverse order {holds} but equal negative counts {same}"
                )));
            }
            Ok(holds)
        }
    }
}

fn full_operator(h: &LinearRelation, tol: &ToleranceProfile) -> Result<SymmetricMatrix> {
    let op = h
        .as_bounded_operator(tol)?
        .and_then(|op| op.full())
        .ok_or_else(|| Error::PreconditionViolated("relation is not an everywhere defined operator".into()))?;
    SymmetricMatrix::new(op).map_err(|_| Error::NotSelfadjoint)
}

pub fn antitonicity_matrices(
    h1: &SymmetricMatrix,
    h2: &SymmetricMatrix,
    tol: &ToleranceProfile,
) -> Result<bool> {
    let d1 = spectral_decompose(h1)?;
    let d2 = spectral_decompose(h2)?;
    let i1 = d1.inertia(tol);
    let i2 = d2.inertia(tol);
    if i1.n_zero > 0 || i2.n_zero > 0 {
        return Err(Error::PreconditionViolated("H1 and H2 must be invertible".into()));
    }
    if !loewner_leq(h1, h2, tol)? {
        return Err(Error::PreconditionViolated("H1 <= H2 fails".into()));
    }
    let inv1 = d1.map(|l| 1.0 / l);
    let inv2 = d2.map(|l| 1.0 / l);
    let holds = loewner_leq(&inv2, &inv1, tol)?;
    if holds != (i1 == i2) {
        return Err(Error::IdentityViolated(format!(
            "inverse order {holds} but inertias {i1:?} vs {i2:?}"
        )));
    }
    Ok(holds)
}

/// Both uniqueness decisions for `A_F = A_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationUniqueness {
    pub column: UniquenessReport,
    /// `A_F` and `A_K` have the same graph.
    pub graphs_equal: bool,
}

pub fn uniqueness_relation_report(
    a: &LinearRelation,
    tol: &ToleranceProfile,
) -> Result<RelationUniqueness> {
    let fk = friedrichs_krein(a, tol)?;
    let column = uniqueness_report(&fk.cayley.column, tol)?;
    let graphs_equal = fk.a_f.approx_eq(&fk.a_k, tol);
    if graphs_equal != column.unique() {
        return Err(Error::IdentityViolated(format!(
            "gap test says {} but A_F = A_K is {graphs_equal}",
            column.unique()
        )));
    }
    Ok(RelationUniqueness {
        column,
        graphs_equal,
    })
}

/// Largest relative errors of `(T1 g, φ) = 2((A + I)^{-1} g, φ)` and
/// `((I − T1ᵀT1) g, g) = 4(Â g, g)` over `probes` random `g ∈ H1`, `φ ∈ H2`,
/// where `Â = (I + A)^{-*} A (I + A)^{-1}` on `H1`.
pub fn translation_residuals(
    a: &LinearRelation,
    probes: usize,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<(f64, f64)> {
    let cc = cayley_column(a, tol)?;
    let (d1, d2) = (cc.b1.ncols(), cc.b2.ncols());
    // (A + I)^{-1} g = (T1 + I) g / 2
    let resolvent = (&cc.map + &cc.b1) * 0.5;
    let hat = SymmetricMatrix::symmetrize(resolvent.transpose() * (&cc.b1 - &resolvent));
    let defect = DMatrix::identity(d1, d1) - cc.map.transpose() * &cc.map;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| DMatrix::from_fn(n, 1, |_, _| StandardNormal.sample(&mut rng));
    let (mut pairing, mut form) = (0.0f64, 0.0f64);
    for _ in 0..probes {
        let x = draw(d1);
        let y = draw(d2);
        let g = &cc.b1 * &x;
        let phi = &cc.b2 * &y;
        let lhs = (phi.transpose() * &cc.map * &x)[(0, 0)];
        let rhs = 2.0 * (phi.transpose() * &resolvent * &x)[(0, 0)];
        let scale = 1.0 + g.norm() * phi.norm();
        pairing = pairing.max((lhs - rhs).abs() / scale);
        let lhs = (x.transpose() * &defect * &x)[(0, 0)];
        let rhs = 4.0 * (x.transpose() * hat.as_matrix() * &x)[(0, 0)];
        form = form.max((lhs - rhs).abs() / (1.0 + g.norm_squared()));
    }
    Ok((pairing, form))
}

/// Whether `A_F = A_K`, decided by the gap of the Cayley column and checked
/// against the graphs themselves and the translation identities.
pub fn krein_uniqueness_relation(a: &LinearRelation, tol: &ToleranceProfile) -> Result<bool> {
    let report = uniqueness_relation_report(a, tol)?;
    let (pairing, form) = translation_residuals(a, 8, a.space_dim() as u64, tol)?;
    if pairing > tol.residual || form > tol.residual {
        return Err(Error::IdentityViolated(format!(
            "translation identities fail ({pairing:.3e}, {form:.3e})"
        )));
    }
    Ok(report.graphs_equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::DEFAULT
    }

    fn m(r: usize, c: usize, v: &[f64]) -> DenseMatrix {
        DMatrix::from_row_slice(r, c, v)
    }

    fn graph(d: &[f64]) -> LinearRelation {
        LinearRelation::from_operator(SymmetricMatrix::from_diagonal(d).as_matrix()).unwrap()
    }

    fn e(n: usize, i: usize) -> DenseMatrix {
        let mut v = DMatrix::zeros(n, 1);
        v[(i, 0)] = 1.0;
        v
    }

    /// `e1 ↦ e1` on `span{e1}` in ℝ².
    fn example_one() -> LinearRelation {
        LinearRelation::from_generators(&e(2, 0), &e(2, 0)).unwrap()
    }

    #[test]
    fn construction_examples() {
        let a = LinearRelation::from_operator(&m(1, 1, &[2.0])).unwrap();
        let expected = LinearRelation::from_generators(&m(1, 1, &[1.0]), &m(1, 1, &[2.0])).unwrap();
        assert!(a.approx_eq(&expected, &tol()));
        let s = 5f64.sqrt();
        assert_abs_diff_eq!(a.basis()[(0, 0)].abs(), 1.0 / s, epsilon = 1e-14);

        let pure = LinearRelation::multivalued(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(pure.mul(&tol()).ncols(), 2);
        assert_eq!(pure.domain(&tol()).ncols(), 0);

        let f = m(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let fp = m(2, 3, &[2.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let dup = LinearRelation::from_generators(&f, &fp).unwrap();
        assert_eq!(dup.graph_dim(), 2);
        assert!(dup.approx_eq(&graph(&[2.0, 3.0]), &tol()));
        assert!(LinearRelation::from_generators(&m(2, 1, &[1.0, 0.0]), &m(1, 1, &[1.0])).is_err());
    }

    #[test]
    fn calculus_examples() {
        let mm = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let a = LinearRelation::from_operator(&mm).unwrap();
        let adj = LinearRelation::from_operator(&mm.transpose()).unwrap();
        assert!(a.adjoint().approx_eq(&adj, &tol()));

        let inv = graph(&[1.0, 0.0]).inverse();
        let mul = inv.mul(&tol());
        assert_eq!(mul.ncols(), 1);
        assert_abs_diff_eq!(mul[(1, 0)].abs(), 1.0, epsilon = 1e-14);

        assert!(graph(&[0.0, 0.0]).shift(1.0).approx_eq(&graph(&[1.0, 1.0]), &tol()));
    }

    #[test]
    fn classification_examples() {
        let c = classify(&graph(&[1.0, -2.0]), &tol()).unwrap();
        assert!(c.symmetric && c.selfadjoint);
        assert_eq!(c.form_negatives, 1);

        // {((x, 0), (x, y))} is e1 ↦ e1 with mul = span{e2}; its graph is
        // 2-dimensional, so being symmetric it is already selfadjoint.
        let f = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = LinearRelation::from_generators(&f, &DMatrix::identity(2, 2)).unwrap();
        let c = classify(&a, &tol()).unwrap();
        assert!(c.symmetric && c.selfadjoint);
        assert_eq!(c.form_negatives, 0);
        let c = classify(&example_one(), &tol()).unwrap();
        assert!(c.symmetric && !c.selfadjoint);
        assert_eq!(c.form_negatives, 0);
        // oracle: the form's Gram on the generators (x,0;x,y) is [[1,0],[0,0]]
        let gram = f.transpose() * DMatrix::<f64>::identity(2, 2);
        assert_abs_diff_eq!(gram, m(2, 2, &[1.0, 0.0, 0.0, 0.0]), epsilon = 0.0);

        let rot = LinearRelation::from_operator(&m(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        assert!(!classify(&rot, &tol()).unwrap().symmetric);
    }

    #[test]
    fn cayley_examples() {
        for a in [0.0, 0.5, 3.0, -0.3, -7.0] {
            let c = LinearRelation::from_operator(&m(1, 1, &[a])).unwrap().cayley();
            let expected = LinearRelation::from_operator(&m(1, 1, &[(1.0 - a) / (1.0 + a)])).unwrap();
            assert!(c.approx_eq(&expected, &tol()), "a = {a}");
        }
        let pure = LinearRelation::multivalued(&DMatrix::identity(2, 2)).unwrap();
        assert!(pure.cayley().approx_eq(&graph(&[-1.0, -1.0]), &tol()));

        let a = example_one();
        assert!(a.cayley().cayley().approx_eq(&a, &tol()));
        assert!(a.cayley().inverse().approx_eq(&a.negate().cayley(), &tol()));
    }

    #[test]
    fn bounded_operator_examples() {
        let mm = m(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let op = LinearRelation::from_operator(&mm).unwrap().as_bounded_operator(&tol()).unwrap().unwrap();
        assert_abs_diff_eq!(op.full().unwrap(), mm, epsilon = 1e-12);
        assert!(graph(&[1.0, 0.0]).inverse().as_bounded_operator(&tol()).unwrap().is_none());
        let t1 = example_one().cayley().as_bounded_operator(&tol()).unwrap().unwrap();
        assert_eq!(t1.domain.ncols(), 1);
        assert!(t1.full().is_none());
    }

    #[test]
    fn inertia_examples() {
        let i = relation_inertia(&graph(&[2.0, -3.0, 0.0]), &tol()).unwrap();
        assert_eq!(i, RelationInertia { i_plus: 1, i_minus: 1, i_zero: 1, i_inf: 0 });
        let i = relation_inertia(&graph(&[1.0, 0.0]).inverse(), &tol()).unwrap();
        assert_eq!(i, RelationInertia { i_plus: 1, i_minus: 0, i_zero: 0, i_inf: 1 });
        assert!(matches!(relation_inertia(&example_one(), &tol()), Err(Error::NotSelfadjoint)));
    }

    #[test]
    fn form_a1_examples() {
        let a = graph(&[1.0, -2.0]);
        let fd = form_a1(&a, &tol()).unwrap();
        assert_abs_diff_eq!(fd.gram.as_matrix(), a.form_gram().as_matrix(), epsilon = 1e-12);
        assert_eq!(fd.negatives, 1);

        let f = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = LinearRelation::from_generators(&f, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(form_a1(&a, &tol()).unwrap().negatives, 0);

        // graph(-2) on span{e1}: T1 = -3 on e1, so T21 = 0 and both indices are 1
        let a = LinearRelation::from_generators(&e(2, 0), &(e(2, 0) * -2.0)).unwrap();
        let fd = form_a1(&a, &tol()).unwrap();
        let direct = inertia_scaled(&a.form_gram(), 1.0, &tol()).unwrap().n_minus;
        assert_eq!((fd.negatives, direct), (1, 1));

        let rot = LinearRelation::from_operator(&m(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        assert!(matches!(form_a1(&rot, &tol()), Err(Error::NotSymmetric)));
    }

    #[test]
    fn friedrichs_krein_worked_example() {
        let a = example_one();
        let fk = friedrichs_krein(&a, &tol()).unwrap();
        assert!(fk.a_k.distance(&graph(&[1.0, 0.0])) <= 1e-9);
        let expected_f = LinearRelation::from_generators(
            &m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            &DMatrix::identity(2, 2),
        )
        .unwrap();
        assert!(fk.a_f.distance(&expected_f) <= 1e-9);
        let mul = fk.a_f.mul(&tol());
        assert_eq!(mul.ncols(), 1);
        assert_abs_diff_eq!(mul[(1, 0)].abs(), 1.0, epsilon = 1e-12);
        assert_eq!(fk.kappa, 0);
        assert!(relation_leq(&fk.a_k, &fk.a_f, &tol()).unwrap());
        assert!(!relation_leq(&fk.a_f, &fk.a_k, &tol()).unwrap());
    }

    #[test]
    fn friedrichs_krein_selfadjoint_is_fixed() {
        let a = graph(&[2.0, -0.5, 0.0]);
        let fk = friedrichs_krein(&a, &tol()).unwrap();
        assert!(fk.a_f.approx_eq(&a, &tol()));
        assert!(fk.a_k.approx_eq(&a, &tol()));
        assert_eq!(fk.kappa, 1);
    }

    #[test]
    fn relation_order_examples() {
        assert!(relation_leq(&graph(&[0.0]), &graph(&[1.0]), &tol()).unwrap());
        assert!(!relation_leq(&graph(&[1.0]), &graph(&[0.0]), &tol()).unwrap());
        assert!(relation_leq(&graph(&[1.0, -1.0]), &graph(&[2.0, -0.5]), &tol()).unwrap());
        // the verdict does not depend on the shift
        for a in [-2.0, -5.0, -100.0] {
            assert!(relation_leq_shifted(&graph(&[1.0, -1.0]), &graph(&[2.0, -0.5]), a, &tol()).unwrap());
        }
        assert!(matches!(
            relation_leq_shifted(&graph(&[1.0]), &graph(&[2.0]), 1.5, &tol()),
            Err(Error::ShiftNotAdmissible { .. })
        ));
        assert!(matches!(relation_leq(&example_one(), &graph(&[0.0, 0.0]), &tol()), Err(Error::NotSelfadjoint)));
    }

    #[test]
    fn membership_examples() {
        let a = example_one();
        let fk = friedrichs_krein(&a, &tol()).unwrap();
        for ext in [&fk.a_f, &fk.a_k] {
            let r = membership_report(&fk, &a, ext, &tol()).unwrap();
            assert!(r.by_cayley && r.agree());
        }
        for t in [0.0, 0.3, 4.0] {
            assert!(ext_membership(&a, &graph(&[1.0, t]), &tol()).unwrap(), "t = {t}");
        }
        for t in [-0.2, -5.0] {
            assert!(!ext_membership(&a, &graph(&[1.0, t]), &tol()).unwrap(), "t = {t}");
        }
        assert!(matches!(
            ext_membership(&a, &graph(&[2.0, 0.0]), &tol()),
            Err(Error::NotAnExtension { .. })
        ));
    }

    #[test]
    fn resolvent_interval_examples() {
        let a = example_one();
        let fk = friedrichs_krein(&a, &tol()).unwrap();
        for ext in [fk.a_f.clone(), fk.a_k.clone(), graph(&[1.0, 2.0])] {
            for s in [0.1, 1.0, 10.0] {
                assert!(resolvent_interval_check(&fk, &ext, s, &tol()).unwrap());
            }
        }
        assert!(matches!(
            resolvent_interval_check(&fk, &fk.a_k, 0.0, &tol()),
            Err(Error::ShiftNotAdmissible { .. })
        ));
    }

    #[test]
    fn inverse_duality_examples() {
        assert!(inverse_duality_check(&example_one(), &tol()).unwrap());
        assert!(inverse_duality_check(&graph(&[2.0, -0.5]), &tol()).unwrap());
    }

    #[test]
    fn antitonicity_examples() {
        let h1 = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        let h2 = SymmetricMatrix::from_diagonal(&[2.0, -0.5]);
        assert!(antitonicity_matrices(&h1, &h2, &tol()).unwrap());
        let h1 = SymmetricMatrix::from_diagonal(&[1.0, 1.0]);
        let h2 = SymmetricMatrix::from_diagonal(&[2.0, 2.0]);
        assert!(antitonicity_matrices(&h1, &h2, &tol()).unwrap());
        let h1 = SymmetricMatrix::from_diagonal(&[-1.0]);
        let h2 = SymmetricMatrix::from_diagonal(&[1.0]);
        assert!(!antitonicity_matrices(&h1, &h2, &tol()).unwrap());
        assert!(matches!(
            antitonicity_matrices(&h2, &h1, &tol()),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(antitonicity_check(&graph(&[1.0, -1.0]), &graph(&[2.0, -0.5]), AntitonicityMode::Matrix, &tol()).unwrap());
        // relation mode: H1 = diag(1, 0) has a kernel, H2^{-1} has a multivalued part
        assert!(antitonicity_check(&graph(&[1.0, 0.0]), &graph(&[2.0, 0.0]), AntitonicityMode::Relation, &tol()).unwrap());
        assert!(!antitonicity_check(&graph(&[-1.0]), &graph(&[1.0]), AntitonicityMode::Relation, &tol()).unwrap());
    }

    #[test]
    fn uniqueness_examples() {
        assert!(krein_uniqueness_relation(&graph(&[1.0, -3.0]), &tol()).unwrap());
        assert!(!krein_uniqueness_relation(&example_one(), &tol()).unwrap());
        // C(A) = [0; 1] on span{e1}: A = {(e1 + e2, e1 - e2)}
        let f = m(2, 1, &[1.0, 1.0]);
        let fp = m(2, 1, &[1.0, -1.0]);
        let a = LinearRelation::from_generators(&f, &fp).unwrap();
        assert!(krein_uniqueness_relation(&a, &tol()).unwrap());
    }

    #[test]
    fn cayley_not_operator() {
        // graph(-1): ker(A + I) = ℝ
        assert!(matches!(
            friedrichs_krein(&graph(&[-1.0]), &tol()),
            Err(Error::CayleyNotOperator)
        ));
    }
}
