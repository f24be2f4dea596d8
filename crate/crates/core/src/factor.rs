//! Factorizations through J-contractions.
//!
//! For a symmetric `A` and `B: H1 → H2` with a symmetry `J2` on `H2`:
//!
//! * [`schur_negativity_factor`] writes `Bᵀ = |A|^{1/2}·K` with `K` J-contractive,
//!   which is possible exactly when `ν₋(A) = ν₋(A − BᵀJ2B) + ν₋(J2)`;
//! * [`douglas_factor`] writes `B = C·|A|^{1/2}` with `C` J-bicontractive
//!   (`A ⪰ BᵀJ2B`) or J-isometric (`A = BᵀJ2B`), given `ν₋(A) = ν₋(J2)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    inertia_scaled, loewner_leq, max_norm, operator_norm, spectral_decompose, DenseMatrix, Inertia,
    SymmetricMatrix, ToleranceProfile,
};

/// A finite-dimensional space with a fundamental symmetry `j = jᵀ = j⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct JSpace {
    j: SymmetricMatrix,
}

impl JSpace {
    pub fn new(j: SymmetricMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let n = j.dim();
        let sq = j.as_matrix() * j.as_matrix();
        let err = max_norm(&(sq - DMatrix::identity(n, n)));
        if err > tol.residual {
            return Err(Error::InvalidInput(format!(
                "J is not an involution: ||J^2 - I|| = {err:.3e}"
            )));
        }
        Ok(JSpace { j })
    }

    /// `diag(signs)`; every entry must be `±1`.
    pub fn from_signs(signs: &[f64]) -> Result<Self> {
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidInput(format!(
                "signature entries must be +1 or -1, got {signs:?}"
            )));
        }
        Ok(JSpace {
            j: SymmetricMatrix::from_diagonal(signs),
        })
    }

    pub fn identity(n: usize) -> Self {
        JSpace {
            j: SymmetricMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn j(&self) -> &SymmetricMatrix {
        &self.j
    }

    pub fn negative_index(&self, tol: &ToleranceProfile) -> Result<usize> {
        Ok(spectral_decompose(&self.j)?.inertia(tol).n_minus)
    }

    /// `J ⊕ J'`.
    pub fn direct_sum(&self, other: &JSpace) -> JSpace {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(self.j.as_matrix());
        m.view_mut((a, a), (b, b)).copy_from(other.j.as_matrix());
        JSpace {
            j: SymmetricMatrix::symmetrize(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Contractive,
    Bicontractive,
    Isometric,
    Unitary,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JFactorResult {
    pub factor: DenseMatrix,
    /// `J2 − KᵀJ_A K` for the Schur factor, `J_A − CᵀJ2C` for the Douglas factor.
    pub defect_gram: SymmetricMatrix,
    /// `J2 − C·J_A·Cᵀ` for the Douglas factor.
    pub co_defect_gram: Option<SymmetricMatrix>,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    Inequality,
    Equality,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bicontraction {
    Bicontractive { c: DenseMatrix },
    IsometricBicontractive { c: DenseMatrix },
    Neither,
}

fn check_operator(t: &DenseMatrix, n_in: usize, n_out: usize, what: &str) -> Result<()> {
    if t.nrows() != n_out || t.ncols() != n_in {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {n_out}x{n_in}",
            t.nrows(),
            t.ncols()
        )));
    }
    crate::spectral::check_finite(t)
}

fn inertia(a: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<Inertia> {
    Ok(spectral_decompose(a)?.inertia(tol))
}

/// Inertias of `J1 − TᵀJ2T` and `J2 − TJ1Tᵀ`, after checking that they
/// balance against the inertias of `J2` and `J1`.
pub fn inertia_balance(
    t: &DenseMatrix,
    j1: &JSpace,
    j2: &JSpace,
    tol: &ToleranceProfile,
) -> Result<(Inertia, Inertia)> {
    check_operator(t, j1.dim(), j2.dim(), "T")?;
    let scale = 1.0 + operator_norm(t).powi(2);
    let left = inertia_scaled(&(j1.j() - &j2.j().congruence(t)), scale, tol)?;
    let right = inertia_scaled(&(j2.j() - &j1.j().congruence(&t.transpose())), scale, tol)?;
    let ij1 = inertia(j1.j(), tol)?;
    let ij2 = inertia(j2.j(), tol)?;
    let ok = left.n_minus + ij2.n_minus == right.n_minus + ij1.n_minus
        && left.n_plus + ij2.n_plus == right.n_plus + ij1.n_plus
        && left.n_zero == right.n_zero;
    if !ok {
        return Err(Error::IdentityViolated(format!(
            "inertia balance fails: {left:?} + {ij2:?} vs {right:?} + {ij1:?}"
        )));
    }
    Ok((left, right))
}

/// `Bᵀ = |A|^{1/2}·K` with `K` J-contractive into `(ran A, sign A)`, or
/// `None` when `ν₋(A) ≠ ν₋(A − BᵀJ2B) + ν₋(J2)`.
pub fn schur_negativity_factor(
    a: &SymmetricMatrix,
    b: &DenseMatrix,
    j2: &JSpace,
    tol: &ToleranceProfile,
) -> Result<Option<JFactorResult>> {
    check_operator(b, a.dim(), j2.dim(), "B")?;
    let dec = spectral_decompose(a)?;
    let nu_a = dec.inertia(tol).n_minus;
    let scale = dec.norm() + operator_norm(b).powi(2);
    let nu_schur = inertia_scaled(&(a - &j2.j().congruence(b)), scale, tol)?.n_minus;
    let nu_j2 = j2.negative_index(tol)?;
    if nu_a != nu_schur + nu_j2 {
        return Ok(None);
    }
    let k = dec
        .solve_in_range(0.5, &b.transpose(), tol)?
        .map_err(|residual| {
            Error::IdentityViolated(format!(
                "index equality holds but ran B* is not in ran |A|^(1/2) (residual {residual:.3e})"
            ))
        })?;
    let ja = dec.range_signature(tol);
    let defect = j2.j() - &ja.congruence(&k);
    let zero = SymmetricMatrix::zeros(defect.dim());
    if !loewner_leq(&zero, &defect, tol)? {
        return Err(Error::IdentityViolated(
            "factor K is not J-contractive although the index equality holds".into(),
        ));
    }
    Ok(Some(JFactorResult {
        factor: k,
        defect_gram: defect,
        co_defect_gram: None,
        classification: Classification::Contractive,
    }))
}

/// `B = C·|A|^{1/2}` with `C` vanishing on `ker A`.
pub fn douglas_factor(
    a: &SymmetricMatrix,
    b: &DenseMatrix,
    j2: &JSpace,
    mode: FactorMode,
    tol: &ToleranceProfile,
) -> Result<Option<JFactorResult>> {
    check_operator(b, a.dim(), j2.dim(), "B")?;
    let dec = spectral_decompose(a)?;
    let nu_a = dec.inertia(tol).n_minus;
    let nu_j2 = j2.negative_index(tol)?;
    if nu_a != nu_j2 {
        return Err(Error::HypothesisViolated(format!(
            "nu_-(A) = {nu_a} differs from nu_-(J2) = {nu_j2}"
        )));
    }
    let pulled = j2.j().congruence(b);
    let holds = match mode {
        FactorMode::Inequality => loewner_leq(&pulled, a, tol)?,
        FactorMode::Equality => {
            let scale = 1.0 + dec.norm() + operator_norm(b).powi(2);
            max_norm((a - &pulled).as_matrix()) <= tol.residual * scale
        }
    };
    if !holds {
        return Ok(None);
    }
    let ct = dec
        .solve_in_range(0.5, &b.transpose(), tol)?
        .map_err(|residual| {
            Error::IdentityViolated(format!(
                "A >= B*J2B holds but ran B* is not in ran |A|^(1/2) (residual {residual:.3e})"
            ))
        })?;
    let c = ct.transpose();
    let ja = dec.range_signature(tol);
    let defect = &ja - &j2.j().congruence(&c);
    let co_defect = j2.j() - &ja.congruence(&ct);
    let zero_n = SymmetricMatrix::zeros(defect.dim());
    let zero_m = SymmetricMatrix::zeros(co_defect.dim());
    if !loewner_leq(&zero_n, &defect, tol)? || !loewner_leq(&zero_m, &co_defect, tol)? {
        return Err(Error::IdentityViolated(
            "Douglas factor is not J-bicontractive".into(),
        ));
    }
    let classification = match mode {
        FactorMode::Inequality => Classification::Bicontractive,
        FactorMode::Equality => {
            let bound = tol.residual * (1.0 + operator_norm(&c).powi(2));
            if max_norm(defect.as_matrix()) > bound {
                return Err(Error::IdentityViolated(
                    "A = B*J2B holds but C is not J-isometric".into(),
                ));
            }
            if rank(b, tol) == j2.dim() {
                Classification::Unitary
            } else {
                Classification::Isometric
            }
        }
    };
    Ok(Some(JFactorResult {
        factor: c,
        defect_gram: defect,
        co_defect_gram: Some(co_defect),
        classification,
    }))
}

fn rank(m: &DenseMatrix, tol: &ToleranceProfile) -> usize {
    crate::spectral::orth(m, tol).ncols()
}

/// Which of the bicontraction factorizations applies to `(A, B, J2)`.
pub fn bicontraction_classify(
    a: &SymmetricMatrix,
    b: &DenseMatrix,
    j2: &JSpace,
    tol: &ToleranceProfile,
) -> Result<Bicontraction> {
    check_operator(b, a.dim(), j2.dim(), "B")?;
    if inertia(a, tol)?.n_minus != j2.negative_index(tol)? {
        return Ok(Bicontraction::Neither);
    }
    if let Some(r) = douglas_factor(a, b, j2, FactorMode::Equality, tol)? {
        return Ok(Bicontraction::IsometricBicontractive { c: r.factor });
    }
    if let Some(r) = douglas_factor(a, b, j2, FactorMode::Inequality, tol)? {
        return Ok(Bicontraction::Bicontractive { c: r.factor });
    }
    Ok(Bicontraction::Neither)
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

    fn js(s: &[f64]) -> JSpace {
        JSpace::from_signs(s).unwrap()
    }

    #[test]
    fn jspace_validation() {
        assert!(JSpace::from_signs(&[1.0, 0.5]).is_err());
        let swap = SymmetricMatrix::new(m(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!(JSpace::new(swap, &tol()).is_ok());
        assert!(JSpace::new(SymmetricMatrix::from_diagonal(&[2.0]), &tol()).is_err());
        assert_eq!(
            js(&[1.0, -1.0])
                .direct_sum(&js(&[-1.0]))
                .negative_index(&tol())
                .unwrap(),
            2
        );
    }

    #[test]
    fn balance_scalar_examples() {
        let (l, r) = inertia_balance(&m(1, 1, &[2.0]), &js(&[1.0]), &js(&[1.0]), &tol()).unwrap();
        assert_eq!((l.n_minus, r.n_minus), (1, 1));
        let (l, r) = inertia_balance(&m(1, 1, &[2.0]), &js(&[1.0]), &js(&[-1.0]), &tol()).unwrap();
        // 1 + 4 = 5 on the left, -1 - 4 = -5 on the right
        assert_eq!((l.n_minus, r.n_minus), (0, 1));
        assert_eq!(l.n_minus + 1, r.n_minus + 0);
        let (l, r) = inertia_balance(
            &DMatrix::zeros(2, 1),
            &js(&[-1.0]),
            &js(&[1.0, -1.0]),
            &tol(),
        )
        .unwrap();
        assert_eq!((l.n_plus, l.n_minus), (0, 1));
        assert_eq!((r.n_plus, r.n_minus), (1, 1));
    }

    #[test]
    fn schur_factor_examples() {
        let a = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        let r = schur_negativity_factor(&a, &m(1, 2, &[1.0, 0.0]), &js(&[1.0]), &tol())
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(r.factor, m(2, 1, &[1.0, 0.0]), epsilon = 1e-14);
        assert_abs_diff_eq!(r.defect_gram.as_matrix()[(0, 0)], 0.0, epsilon = 1e-14);

        let none = schur_negativity_factor(
            &SymmetricMatrix::identity(2),
            &m(1, 2, &[2.0, 0.0]),
            &js(&[1.0]),
            &tol(),
        )
        .unwrap();
        assert!(none.is_none());

        let a = SymmetricMatrix::from_diagonal(&[2.0, -1.0]);
        let zero = DMatrix::zeros(1, 2);
        assert!(schur_negativity_factor(&a, &zero, &js(&[1.0]), &tol())
            .unwrap()
            .is_some());
        assert!(schur_negativity_factor(&a, &zero, &js(&[-1.0]), &tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn douglas_examples() {
        let a = SymmetricMatrix::from_diagonal(&[4.0]);
        let r = douglas_factor(
            &a,
            &m(1, 1, &[1.0]),
            &js(&[1.0]),
            FactorMode::Inequality,
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(r.factor[(0, 0)], 0.5, epsilon = 1e-14);
        assert_eq!(r.classification, Classification::Bicontractive);

        let r = douglas_factor(
            &a,
            &m(1, 1, &[2.0]),
            &js(&[1.0]),
            FactorMode::Equality,
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(r.factor[(0, 0)], 1.0, epsilon = 1e-14);
        assert_eq!(r.classification, Classification::Unitary);

        let a = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        let r = douglas_factor(
            &a,
            &DMatrix::identity(2, 2),
            &js(&[1.0, -1.0]),
            FactorMode::Equality,
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(r.factor, DMatrix::identity(2, 2), epsilon = 1e-14);
        assert_eq!(r.classification, Classification::Unitary);

        // equality with a rank-deficient B into a larger space is isometric only
        let r = douglas_factor(
            &SymmetricMatrix::from_diagonal(&[4.0]),
            &m(2, 1, &[2.0, 0.0]),
            &js(&[1.0, 1.0]),
            FactorMode::Equality,
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(r.classification, Classification::Isometric);

        assert!(matches!(
            douglas_factor(
                &a,
                &DMatrix::identity(2, 2),
                &js(&[1.0, 1.0]),
                FactorMode::Inequality,
                &tol()
            ),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(douglas_factor(
            &SymmetricMatrix::from_diagonal(&[1.0]),
            &m(1, 1, &[2.0]),
            &js(&[1.0]),
            FactorMode::Inequality,
            &tol()
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn douglas_vanishes_on_kernel() {
        let a = SymmetricMatrix::from_diagonal(&[4.0, 0.0]);
        let r = douglas_factor(
            &a,
            &m(1, 2, &[1.0, 0.0]),
            &js(&[1.0]),
            FactorMode::Inequality,
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(r.factor, m(1, 2, &[0.5, 0.0]), epsilon = 1e-14);
    }

    #[test]
    fn classify_examples() {
        let a = SymmetricMatrix::from_diagonal(&[4.0]);
        match bicontraction_classify(&a, &m(1, 1, &[1.0]), &js(&[1.0]), &tol()).unwrap() {
            Bicontraction::Bicontractive { c } => {
                assert_abs_diff_eq!(c[(0, 0)], 0.5, epsilon = 1e-14)
            }
            other => panic!("{other:?}"),
        }
        match bicontraction_classify(&a, &m(1, 1, &[2.0]), &js(&[1.0]), &tol()).unwrap() {
            Bicontraction::IsometricBicontractive { c } => {
                assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-14)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            bicontraction_classify(
                &SymmetricMatrix::identity(1),
                &m(1, 1, &[2.0]),
                &js(&[1.0]),
                &tol()
            )
            .unwrap(),
            Bicontraction::Neither
        );
    }
}
