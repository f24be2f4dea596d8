//! Defect and link operators of an operator between two J-spaces, column and
//! row extensions with minimal negative index, the parametrization of all
//! 2×2 liftings, and the kernel/range geometry of J-contractions.
//!
//! Operators nominally defined on a defect space `ran D` are stored as
//! full-space matrices that vanish on `ker D` and map into the relevant range.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::JSpace;
use crate::spectral::{
    inertia_scaled, intersection, loewner_margin, max_norm, null_space_scaled, operator_norm, orth_scaled,
    spectral_decompose, spectral_decompose_scaled, subspace_distance, DenseMatrix, SymmetricMatrix,
    ToleranceProfile,
};

/// `|M|^{1/2}` together with everything derived from the same eigendecomposition.
#[derive(Debug, Clone)]
pub(crate) struct Defect {
    pub root: SymmetricMatrix,
    pub root_pinv: SymmetricMatrix,
    pub projector: SymmetricMatrix,
    pub signature: SymmetricMatrix,
    pub kappa: usize,
}

impl Defect {
    /// `scale` bounds the size of the terms `m` was formed from.
    pub(crate) fn of(m: &SymmetricMatrix, scale: f64, tol: &ToleranceProfile) -> Result<Self> {
        let dec = spectral_decompose_scaled(m, scale)?;
        Ok(Defect {
            root: dec.map_on_support(tol, |l| l.abs().sqrt()),
            root_pinv: dec.pseudo_inverse_power(0.5, tol),
            projector: dec.range_projector(tol),
            signature: dec.signature(tol),
            kappa: dec.inertia(tol).n_minus,
        })
    }

    /// Residual of projecting the columns of `b` onto `ran D`.
    fn range_residual(&self, b: &DenseMatrix) -> f64 {
        max_norm(&(b - self.projector.as_matrix() * b))
    }
}

fn range_check(defect: &Defect, b: &DenseMatrix, tol: &ToleranceProfile) -> Result<()> {
    let residual = defect.range_residual(b);
    if residual > tol.residual * (1.0 + max_norm(b)) {
        Err(Error::RangeInclusionFailed { residual })
    } else {
        Ok(())
    }
}

fn close(a: &DenseMatrix, b: &DenseMatrix, scale: f64, tol: &ToleranceProfile) -> bool {
    max_norm(&(a - b)) <= tol.residual * (1.0 + scale)
}

fn neg_index(m: &SymmetricMatrix, scale: f64, tol: &ToleranceProfile) -> Result<usize> {
    Ok(inertia_scaled(m, scale, tol)?.n_minus)
}

/// `1 + ‖X‖²`, the size of the terms in `J − XᵀJX`.
pub(crate) fn gram_scale(x: &DenseMatrix) -> f64 {
    1.0 + operator_norm(x).powi(2)
}

fn check_shape(m: &DenseMatrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    crate::spectral::check_finite(m)
}

fn stack_rows(top: &DenseMatrix, bottom: &DenseMatrix) -> DenseMatrix {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

fn stack_cols(left: &DenseMatrix, right: &DenseMatrix) -> DenseMatrix {
    let mut out = DMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols())
        .copy_from(right);
    out
}

/// `T: H1 → H2` with its defect operators, signatures and link operators.
#[derive(Debug, Clone)]
pub struct JContractionData {
    pub t: DenseMatrix,
    pub j1: JSpace,
    pub j2: JSpace,
    /// `|J1 − TᵀJ2T|^{1/2}`
    pub d_t: SymmetricMatrix,
    /// `|J2 − TJ1Tᵀ|^{1/2}`
    pub d_tstar: SymmetricMatrix,
    pub jt: SymmetricMatrix,
    pub jtstar: SymmetricMatrix,
    /// `D_{T*}^{[-1]}·T·J1·D_T`, an `n2×n1` matrix.
    pub l_t: DenseMatrix,
    /// `D_T^{[-1]}·Tᵀ·J2·D_{T*}`, an `n1×n2` matrix.
    pub l_tstar: DenseMatrix,
    pub kappa1: usize,
    pub kappa2: usize,
    defect: Defect,
    defect_star: Defect,
}

impl JContractionData {
    pub fn n1(&self) -> usize {
        self.t.ncols()
    }

    pub fn n2(&self) -> usize {
        self.t.nrows()
    }

    /// Orthogonal projector onto `ran D_T`.
    pub fn p_t(&self) -> &SymmetricMatrix {
        &self.defect.projector
    }

    /// Orthogonal projector onto `ran D_{T*}`.
    pub fn p_tstar(&self) -> &SymmetricMatrix {
        &self.defect_star.projector
    }

    /// `J_T` as a symmetry on `H1`.
    pub fn jt_space(&self) -> JSpace {
        JSpace::new(self.jt.clone(), &ToleranceProfile::DEFAULT)
            .expect("signature is an involution")
    }

    /// `J_{T*}` as a symmetry on `H2`.
    pub fn jtstar_space(&self) -> JSpace {
        JSpace::new(self.jtstar.clone(), &ToleranceProfile::DEFAULT)
            .expect("signature is an involution")
    }

    fn scale(&self) -> f64 {
        let t = operator_norm(&self.t);
        (1.0 + t) * (1.0 + t)
    }
}

pub fn defect_data(
    t: &DenseMatrix,
    j1: &JSpace,
    j2: &JSpace,
    tol: &ToleranceProfile,
) -> Result<JContractionData> {
    check_shape(t, j2.dim(), j1.dim(), "T")?;
    let m1 = j1.j() - &j2.j().congruence(t);
    let m2 = j2.j() - &j1.j().congruence(&t.transpose());
    let defect = Defect::of(&m1, gram_scale(t), tol)?;
    let defect_star = Defect::of(&m2, gram_scale(t), tol)?;
    let tj1 = t * j1.j().as_matrix();
    let tj2 = t.transpose() * j2.j().as_matrix();
    let l_t = defect_star.root_pinv.as_matrix() * &tj1 * defect.root.as_matrix();
    let l_tstar = defect.root_pinv.as_matrix() * &tj2 * defect_star.root.as_matrix();
    let data = JContractionData {
        t: t.clone(),
        j1: j1.clone(),
        j2: j2.clone(),
        d_t: defect.root.clone(),
        d_tstar: defect_star.root.clone(),
        jt: defect.signature.clone(),
        jtstar: defect_star.signature.clone(),
        l_t,
        l_tstar,
        kappa1: defect.kappa,
        kappa2: defect_star.kappa,
        defect,
        defect_star,
    };
    let s = data.scale();
    let lhs = data.d_tstar.as_matrix() * &data.l_t;
    let rhs = &tj1 * data.d_t.as_matrix();
    let lhs_star = data.d_t.as_matrix() * &data.l_tstar;
    let rhs_star = &tj2 * data.d_tstar.as_matrix();
    if !close(&lhs, &rhs, s, tol) || !close(&lhs_star, &rhs_star, s, tol) {
        return Err(Error::IdentityViolated(
            "link operators do not satisfy their defining relations".into(),
        ));
    }
    Ok(data)
}

/// The defining identities `J·D² = J1 − TᵀJ2T`, `J·D = D·J` and the
/// intertwining identities `(J1 − TᵀJ2T)J1Tᵀ = TᵀJ2(J2 − TJ1Tᵀ)` and its mirror.
pub fn verify_defect_identities(d: &JContractionData, tol: &ToleranceProfile) -> bool {
    let s = d.scale();
    let m1 = d.j1.j() - &d.j2.j().congruence(&d.t);
    let m2 = d.j2.j() - &d.j1.j().congruence(&d.t.transpose());
    let (j1, j2) = (d.j1.j().as_matrix(), d.j2.j().as_matrix());
    let (dt, dts) = (d.d_t.as_matrix(), d.d_tstar.as_matrix());
    let (jt, jts) = (d.jt.as_matrix(), d.jtstar.as_matrix());
    let t = &d.t;
    close(&(jt * dt * dt), m1.as_matrix(), s, tol)
        && close(&(jts * dts * dts), m2.as_matrix(), s, tol)
        && close(&(jt * dt), &(dt * jt), s, tol)
        && close(&(jts * dts), &(dts * jts), s, tol)
        && close(
            &(m1.as_matrix() * j1 * t.transpose()),
            &(t.transpose() * j2 * m2.as_matrix()),
            s * s,
            tol,
        )
        && close(
            &(m2.as_matrix() * j2 * t),
            &(t * j1 * m1.as_matrix()),
            s * s,
            tol,
        )
}

/// The three link identities, compressed to the defect spaces:
/// `L_TᵀJ_{T*}P_{T*} = J_T L_{T*}`,
/// `P_T(J_T − D_T J1 D_T)P_T = L_TᵀJ_{T*}L_T`,
/// `P_{T*}(J_{T*} − D_{T*}J2D_{T*})P_{T*} = L_{T*}ᵀJ_T L_{T*}`.
pub fn verify_link_identities(d: &JContractionData, tol: &ToleranceProfile) -> bool {
    let s = d.scale() * d.scale();
    let (pt, pts) = (d.p_t().as_matrix(), d.p_tstar().as_matrix());
    let (jt, jts) = (d.jt.as_matrix(), d.jtstar.as_matrix());
    let (dt, dts) = (d.d_t.as_matrix(), d.d_tstar.as_matrix());
    let (lt, lts) = (&d.l_t, &d.l_tstar);
    let first = close(&(lt.transpose() * jts * pts), &(jt * lts), s, tol);
    let second = close(
        &(pt * (jt - dt * d.j1.j().as_matrix() * dt) * pt),
        &(lt.transpose() * jts * lt),
        s,
        tol,
    );
    let third = close(
        &(pts * (jts - dts * d.j2.j().as_matrix() * dts) * pts),
        &(lts.transpose() * jt * lts),
        s,
        tol,
    );
    first && second && third
}

fn require_contractive(defect_m: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<()> {
    let zero = SymmetricMatrix::zeros(defect_m.dim());
    let margin = if defect_m.dim() == 0 {
        0.0
    } else {
        loewner_margin(&zero, defect_m)?
    };
    let slack = tol.psd * (1.0 + defect_m.norm()?);
    if margin < -slack {
        Err(Error::NotJContractive {
            min_eigenvalue: margin,
        })
    } else {
        Ok(())
    }
}

fn target_index(kappa: usize, exit: usize) -> Result<usize> {
    kappa.checked_sub(exit).ok_or(Error::NegativeTargetIndex {
        kappa,
        exit_index: exit,
    })
}

fn assert_index(
    expected: usize,
    m: &SymmetricMatrix,
    scale: f64,
    tol: &ToleranceProfile,
) -> Result<()> {
    let found = neg_index(m, scale, tol)?;
    if found != expected {
        return Err(Error::IndexMismatch { expected, found });
    }
    Ok(())
}

/// `T_c = [T; KᵀD_T]` for a J-contraction `K: (H2', J2') → (ran D_T, J_T)`.
pub fn column_extend(
    d: &JContractionData,
    k: &DenseMatrix,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<DenseMatrix> {
    check_shape(k, d.n1(), j2prime.dim(), "K")?;
    range_check(&d.defect, k, tol)?;
    let target = target_index(d.kappa1, j2prime.negative_index(tol)?)?;
    require_contractive(&(j2prime.j() - &d.jt.congruence(k)), tol)?;
    let tc = stack_rows(&d.t, &(k.transpose() * d.d_t.as_matrix()));
    let jt2 = d.j2.direct_sum(j2prime);
    assert_index(
        target,
        &(d.j1.j() - &jt2.j().congruence(&tc)),
        gram_scale(&tc),
        tol,
    )?;
    Ok(tc)
}

/// Recovers `K` from a column extension `[T; C]` via `K = D_T^{[-1]}Cᵀ`.
pub fn extract_column_parameter(
    t_c: &DenseMatrix,
    d: &JContractionData,
    tol: &ToleranceProfile,
) -> Result<DenseMatrix> {
    if t_c.ncols() != d.n1() || t_c.nrows() < d.n2() {
        return Err(Error::DimensionMismatch(format!(
            "column extension is {}x{}, T is {}x{}",
            t_c.nrows(),
            t_c.ncols(),
            d.n2(),
            d.n1()
        )));
    }
    let mismatch = max_norm(&(t_c.rows(0, d.n2()) - &d.t));
    if mismatch > tol.residual * (1.0 + max_norm(&d.t)) {
        return Err(Error::NotALifting { mismatch });
    }
    let ct = t_c.rows(d.n2(), t_c.nrows() - d.n2()).transpose();
    range_check(&d.defect, &ct, tol)?;
    Ok(d.defect.root_pinv.as_matrix() * ct)
}

/// `T_r = [T, D_{T*}B]` for a J-contraction `B: (H1', J1') → (ran D_{T*}, J_{T*})`.
pub fn row_extend(
    d: &JContractionData,
    b: &DenseMatrix,
    j1prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<DenseMatrix> {
    check_shape(b, d.n2(), j1prime.dim(), "B")?;
    range_check(&d.defect_star, b, tol)?;
    let target = target_index(d.kappa2, j1prime.negative_index(tol)?)?;
    require_contractive(&(j1prime.j() - &d.jtstar.congruence(b)), tol)?;
    let tr = stack_cols(&d.t, &(d.d_tstar.as_matrix() * b));
    let jt1 = d.j1.direct_sum(j1prime);
    assert_index(
        target,
        &(d.j2.j() - &jt1.j().congruence(&tr.transpose())),
        gram_scale(&tr),
        tol,
    )?;
    Ok(tr)
}

/// Recovers `B` from a row extension `[T, R]` via `B = D_{T*}^{[-1]}R`.
pub fn extract_row_parameter(
    t_r: &DenseMatrix,
    d: &JContractionData,
    tol: &ToleranceProfile,
) -> Result<DenseMatrix> {
    if t_r.nrows() != d.n2() || t_r.ncols() < d.n1() {
        return Err(Error::DimensionMismatch(format!(
            "row extension is {}x{}, T is {}x{}",
            t_r.nrows(),
            t_r.ncols(),
            d.n2(),
            d.n1()
        )));
    }
    let mismatch = max_norm(&(t_r.columns(0, d.n1()) - &d.t));
    if mismatch > tol.residual * (1.0 + max_norm(&d.t)) {
        return Err(Error::NotALifting { mismatch });
    }
    let r = t_r.columns(d.n1(), t_r.ncols() - d.n1()).into_owned();
    range_check(&d.defect_star, &r, tol)?;
    Ok(d.defect_star.root_pinv.as_matrix() * r)
}

/// `ν₋(J̃1 − T_rᵀJ2T_r)` for `T_r = [T, D_{T*}B]`, computed as
/// `κ1 + ν₋(J1' − BᵀJ_{T*}B)` and checked against the direct count.
pub fn row_index_formula(
    d: &JContractionData,
    b: &DenseMatrix,
    j1prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<usize> {
    check_shape(b, d.n2(), j1prime.dim(), "B")?;
    let b = d.p_tstar().as_matrix() * b;
    let formula = d.kappa1
        + neg_index(
            &(j1prime.j() - &d.jtstar.congruence(&b)),
            gram_scale(&b),
            tol,
        )?;
    let tr = stack_cols(&d.t, &(d.d_tstar.as_matrix() * &b));
    let jt1 = d.j1.direct_sum(j1prime);
    assert_index(
        formula,
        &(jt1.j() - &d.j2.j().congruence(&tr)),
        gram_scale(&tr),
        tol,
    )?;
    Ok(formula)
}

/// `ν₋(J̃2 − T_cJ1T_cᵀ)` for `T_c = [T; KᵀD_T]`, computed as
/// `κ2 + ν₋(J2' − KᵀJ_TK)` and checked against the direct count.
pub fn column_index_formula(
    d: &JContractionData,
    k: &DenseMatrix,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<usize> {
    check_shape(k, d.n1(), j2prime.dim(), "K")?;
    let k = d.p_t().as_matrix() * k;
    let formula = d.kappa2 + neg_index(&(j2prime.j() - &d.jt.congruence(&k)), gram_scale(&k), tol)?;
    let tc = stack_rows(&d.t, &(k.transpose() * d.d_t.as_matrix()));
    let jt2 = d.j2.direct_sum(j2prime);
    assert_index(
        formula,
        &(jt2.j() - &d.j1.j().congruence(&tc.transpose())),
        gram_scale(&tc),
        tol,
    )?;
    Ok(formula)
}

/// Parameters of a lifting: `Γ1: H1' → ran D_{T*}` (`n2×n1'`),
/// `Γ2: ran D_T → H2'` (`n2'×n1`), and a Hilbert-space contraction
/// `Γ: ran D_{Γ1} → ran D_{Γ2*}` (`n2'×n1'`).
#[derive(Debug, Clone, PartialEq)]
pub struct LiftParameters {
    pub gamma1: DenseMatrix,
    pub gamma2: DenseMatrix,
    pub gamma: DenseMatrix,
}

impl LiftParameters {
    pub fn zeros(n1: usize, n2: usize, n1p: usize, n2p: usize) -> Self {
        LiftParameters {
            gamma1: DMatrix::zeros(n2, n1p),
            gamma2: DMatrix::zeros(n2p, n1),
            gamma: DMatrix::zeros(n2p, n1p),
        }
    }
}

struct ParameterDefects {
    /// `|J1' − Γ1ᵀJ_{T*}Γ1|^{1/2}`
    d_g1: Defect,
    /// `|J2' − Γ2J_TΓ2ᵀ|^{1/2}`
    d_g2star: Defect,
}

fn parameter_defects(
    d: &JContractionData,
    gamma1: &DenseMatrix,
    gamma2: &DenseMatrix,
    j1prime: &JSpace,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<ParameterDefects> {
    Ok(ParameterDefects {
        d_g1: Defect::of(
            &(j1prime.j() - &d.jtstar.congruence(gamma1)),
            gram_scale(gamma1),
            tol,
        )?,
        d_g2star: Defect::of(
            &(j2prime.j() - &d.jt.congruence(&gamma2.transpose())),
            gram_scale(gamma2),
            tol,
        )?,
    })
}

fn lift_targets(
    d: &JContractionData,
    j1prime: &JSpace,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<(usize, usize)> {
    let (e1, e2) = (j1prime.negative_index(tol)?, j2prime.negative_index(tol)?);
    if e2 > d.kappa1 || e1 > d.kappa2 {
        return Err(Error::HypothesisViolated(format!(
            "lifting requires kappa1 - nu_-(J2') = {} - {e2} >= 0 and kappa2 - nu_-(J1') = {} - {e1} >= 0",
            d.kappa1, d.kappa2
        )));
    }
    Ok((d.kappa1 - e2, d.kappa2 - e1))
}

fn lifted_indices(
    d: &JContractionData,
    tt: &DenseMatrix,
    j1prime: &JSpace,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<(usize, usize)> {
    let jt1 = d.j1.direct_sum(j1prime);
    let jt2 = d.j2.direct_sum(j2prime);
    let s = gram_scale(tt);
    Ok((
        neg_index(&(jt1.j() - &jt2.j().congruence(tt)), s, tol)?,
        neg_index(&(jt2.j() - &jt1.j().congruence(&tt.transpose())), s, tol)?,
    ))
}

fn invariant(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterInvariantViolated(what.into()))
    }
}

/// Assembles
/// `T̃ = [[T, D_{T*}Γ1], [Γ2D_T, −Γ2L_TᵀJ_{T*}Γ1 + D_{Γ2*}ΓD_{Γ1}]]`
/// and checks that both defect indices are the minimal ones.
pub fn lift(
    d: &JContractionData,
    p: &LiftParameters,
    j1prime: &JSpace,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<DenseMatrix> {
    let (n1p, n2p) = (j1prime.dim(), j2prime.dim());
    check_shape(&p.gamma1, d.n2(), n1p, "Gamma1")?;
    check_shape(&p.gamma2, n2p, d.n1(), "Gamma2")?;
    check_shape(&p.gamma, n2p, n1p, "Gamma")?;
    let (k1, k2) = lift_targets(d, j1prime, j2prime, tol)?;

    let g1_res = d.defect_star.range_residual(&p.gamma1);
    invariant(
        g1_res <= tol.residual * (1.0 + max_norm(&p.gamma1)),
        "ran Gamma1 must lie in ran D_T*",
    )?;
    let g2_res = d.defect.range_residual(&p.gamma2.transpose());
    invariant(
        g2_res <= tol.residual * (1.0 + max_norm(&p.gamma2)),
        "Gamma2 must vanish on ker D_T",
    )?;
    let pd = parameter_defects(d, &p.gamma1, &p.gamma2, j1prime, j2prime, tol)?;
    invariant(pd.d_g1.kappa == 0, "Gamma1 must be J-contractive")?;
    invariant(pd.d_g2star.kappa == 0, "Gamma2* must be J-contractive")?;
    invariant(
        operator_norm(&p.gamma) <= 1.0 + tol.psd,
        "Gamma must be a contraction",
    )?;
    invariant(
        pd.d_g2star.range_residual(&p.gamma) <= tol.residual * (1.0 + max_norm(&p.gamma))
            && pd.d_g1.range_residual(&p.gamma.transpose())
                <= tol.residual * (1.0 + max_norm(&p.gamma)),
        "Gamma must map ran D_Gamma1 into ran D_Gamma2*",
    )?;

    let r = d.d_tstar.as_matrix() * &p.gamma1;
    let c = &p.gamma2 * d.d_t.as_matrix();
    let x = -(&p.gamma2 * d.l_t.transpose() * d.jtstar.as_matrix() * &p.gamma1)
        + pd.d_g2star.root.as_matrix() * &p.gamma * pd.d_g1.root.as_matrix();
    let tt = stack_rows(&stack_cols(&d.t, &r), &stack_cols(&c, &x));
    let (found1, found2) = lifted_indices(d, &tt, j1prime, j2prime, tol)?;
    if found1 != k1 {
        return Err(Error::IndexMismatch {
            expected: k1,
            found: found1,
        });
    }
    if found2 != k2 {
        return Err(Error::IndexMismatch {
            expected: k2,
            found: found2,
        });
    }
    Ok(tt)
}

/// Inverse of [`lift`]: recovers the unique parameter triplet of a lifting.
pub fn extract_lift_parameters(
    t_tilde: &DenseMatrix,
    d: &JContractionData,
    j1prime: &JSpace,
    j2prime: &JSpace,
    tol: &ToleranceProfile,
) -> Result<LiftParameters> {
    let (n1, n2, n1p, n2p) = (d.n1(), d.n2(), j1prime.dim(), j2prime.dim());
    check_shape(t_tilde, n2 + n2p, n1 + n1p, "lifted operator")?;
    let mismatch = max_norm(&(t_tilde.view((0, 0), (n2, n1)) - &d.t));
    if mismatch > tol.residual * (1.0 + max_norm(&d.t)) {
        return Err(Error::NotALifting { mismatch });
    }
    let (k1, k2) = lift_targets(d, j1prime, j2prime, tol)?;
    let (found1, found2) = lifted_indices(d, t_tilde, j1prime, j2prime, tol)?;
    if found1 != k1 {
        return Err(Error::IndexMismatch {
            expected: k1,
            found: found1,
        });
    }
    if found2 != k2 {
        return Err(Error::IndexMismatch {
            expected: k2,
            found: found2,
        });
    }
    let r = t_tilde.view((0, n1), (n2, n1p)).into_owned();
    let c = t_tilde.view((n2, 0), (n2p, n1)).into_owned();
    let x = t_tilde.view((n2, n1), (n2p, n1p)).into_owned();

    range_check(&d.defect_star, &r, tol)?;
    let gamma1 = d.defect_star.root_pinv.as_matrix() * &r;
    range_check(&d.defect, &c.transpose(), tol)?;
    let gamma2 = &c * d.defect.root_pinv.as_matrix();

    let pd = parameter_defects(d, &gamma1, &gamma2, j1prime, j2prime, tol)?;
    let y = x + &gamma2 * d.l_t.transpose() * d.jtstar.as_matrix() * &gamma1;
    range_check(&pd.d_g2star, &y, tol)?;
    range_check(&pd.d_g1, &y.transpose(), tol)?;
    let gamma = pd.d_g2star.root_pinv.as_matrix() * y * pd.d_g1.root_pinv.as_matrix();
    Ok(LiftParameters {
        gamma1,
        gamma2,
        gamma,
    })
}

fn require_j_contraction(d: &JContractionData) -> Result<()> {
    if d.kappa1 > 0 {
        let m1 = d.j1.j() - &d.j2.j().congruence(&d.t);
        let min_eigenvalue = spectral_decompose(&m1)?.eigenvalues[0];
        return Err(Error::NotJContractive { min_eigenvalue });
    }
    Ok(())
}

/// `J2·T` maps `ker D_T` onto `ker D_{T*}` and `J1·Tᵀ` maps `ker D_{T*}`
/// onto `ker D_T`.
pub fn kernel_map_check(d: &JContractionData, tol: &ToleranceProfile) -> Result<bool> {
    require_j_contraction(d)?;
    let s = 1.0 + operator_norm(&d.t);
    let ker_t = null_space_scaled(d.d_t.as_matrix(), s, tol);
    let ker_ts = null_space_scaled(d.d_tstar.as_matrix(), s, tol);
    let forward = orth_scaled(&(d.j2.j().as_matrix() * &d.t * &ker_t), s, tol);
    let backward = orth_scaled(&(d.j1.j().as_matrix() * d.t.transpose() * &ker_ts), s, tol);
    Ok(subspace_distance(&forward, &ker_ts) <= tol.subspace
        && subspace_distance(&backward, &ker_t) <= tol.subspace)
}

/// Orthonormal basis of `ran(T·J1·D_T)`, checked against
/// `ran T ∩ ran D_{T*}` and `ran(D_{T*}·L_T)`.
pub fn range_intersection(d: &JContractionData, tol: &ToleranceProfile) -> Result<DenseMatrix> {
    require_j_contraction(d)?;
    let s = d.scale();
    let q = orth_scaled(&(&d.t * d.j1.j().as_matrix() * d.d_t.as_matrix()), s, tol);
    let direct = intersection(
        &orth_scaled(&d.t, s, tol),
        &orth_scaled(d.d_tstar.as_matrix(), s, tol),
        tol,
    );
    let via_link = orth_scaled(&(d.d_tstar.as_matrix() * &d.l_t), s, tol);
    let d1 = subspace_distance(&q, &direct);
    let d2 = subspace_distance(&q, &via_link);
    if d1 > tol.subspace || d2 > tol.subspace {
        return Err(Error::IdentityViolated(format!(
            "range intersection descriptions disagree (distances {d1:.3e}, {d2:.3e})"
        )));
    }
    Ok(q)
}

/// Three equivalent descriptions of J-isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JIsometryReport {
    /// `TᵀJ2T = J1`
    pub gram: bool,
    /// `ker T = {0}` and `ran T ∩ ran D_{T*} = {0}`
    pub rank: bool,
    /// No nonzero `Tφ` lies in `ran D_{T*}`.
    pub unbounded_ratio: bool,
}

impl JIsometryReport {
    pub fn isometric(&self) -> bool {
        self.gram
    }
}

pub fn j_isometry_test(d: &JContractionData, tol: &ToleranceProfile) -> Result<JIsometryReport> {
    require_j_contraction(d)?;
    let n1 = d.n1();
    let gram_err = max_norm((&d.j2.j().congruence(&d.t) - d.j1.j()).as_matrix());
    let gram = gram_err <= tol.residual * (1.0 + operator_norm(&d.t).powi(2));
    let cap = range_intersection(d, tol)?;
    let s = 1.0 + operator_norm(&d.t);
    let rank = orth_scaled(&d.t, s, tol).ncols() == n1 && cap.ncols() == 0;
    let outside = (DMatrix::identity(d.n2(), d.n2()) - d.p_tstar().as_matrix()) * &d.t;
    let unbounded_ratio = orth_scaled(&outside, s, tol).ncols() == n1;
    let report = JIsometryReport {
        gram,
        rank,
        unbounded_ratio,
    };
    if gram != rank || rank != unbounded_ratio {
        return Err(Error::IdentityViolated(format!(
            "J-isometry criteria disagree: {report:?}"
        )));
    }
    Ok(report)
}
