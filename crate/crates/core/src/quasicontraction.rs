//! Selfadjoint extensions `T` of a symmetric column `[T11; T21]` that keep
//! `ν₋(I − T²)` at its least possible value `ν₋(I − T11²)`.
//!
//! When such extensions exist they form the operator interval
//! `T_min ⪯ T ⪯ T_max` between two explicit extremal extensions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::factor::JSpace;
use crate::lifting::{defect_data, j_isometry_test, JIsometryReport};
use crate::spectral::{
    inertia_scaled, loewner_leq, max_norm, operator_norm, spectral_decompose_scaled, DenseMatrix,
    SymmetricMatrix, ToleranceProfile,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricColumn {
    pub t11: SymmetricMatrix,
    pub t21: DenseMatrix,
}

impl SymmetricColumn {
    pub fn new(t11: SymmetricMatrix, t21: DenseMatrix) -> Result<Self> {
        if t21.ncols() != t11.dim() {
            return Err(Error::DimensionMismatch(format!(
                "T21 has {} columns but T11 is {}x{}",
                t21.ncols(),
                t11.dim(),
                t11.dim()
            )));
        }
        crate::spectral::check_finite(&t21)?;
        Ok(SymmetricColumn { t11, t21 })
    }

    pub fn n1(&self) -> usize {
        self.t11.dim()
    }

    pub fn n2(&self) -> usize {
        self.t21.nrows()
    }

    /// The column `[T11; T21]` as an `(n1+n2)×n1` matrix.
    pub fn stacked(&self) -> DenseMatrix {
        let (n1, n2) = (self.n1(), self.n2());
        let mut m = DMatrix::zeros(n1 + n2, n1);
        m.view_mut((0, 0), (n1, n1)).copy_from(self.t11.as_matrix());
        m.view_mut((n1, 0), (n2, n1)).copy_from(&self.t21);
        m
    }

    pub fn negated(&self) -> SymmetricColumn {
        SymmetricColumn {
            t11: -&self.t11,
            t21: -&self.t21,
        }
    }
}

/// The two extremal extensions and the data they are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPair {
    pub t_min: SymmetricMatrix,
    pub t_max: SymmetricMatrix,
    /// `V` with `T21 = V·|I − T11²|^{1/2}` and `ker V ⊃ ker |I − T11²|`.
    pub v: DenseMatrix,
    /// `sign(I − T11²)`.
    pub j: SymmetricMatrix,
    pub kappa: usize,
    /// Eigenvalues of any member above 1.
    pub kappa_plus: usize,
    /// Eigenvalues of any member below −1.
    pub kappa_minus: usize,
}

impl ExtremalPair {
    pub fn n1(&self) -> usize {
        self.v.ncols()
    }

    pub fn n2(&self) -> usize {
        self.v.nrows()
    }

    pub fn dim(&self) -> usize {
        self.t_min.dim()
    }
}

fn shifted(t: &SymmetricMatrix, c: f64) -> SymmetricMatrix {
    let n = t.dim();
    SymmetricMatrix::symmetrize(DMatrix::identity(n, n) * c + t.as_matrix())
}

/// `ν₋(c·I + T)` with the zero threshold sized by `1 + ‖T‖`.
fn neg_shift(t: &SymmetricMatrix, c: f64, tol: &ToleranceProfile) -> Result<usize> {
    let scale = 1.0 + max_norm(t.as_matrix()) * t.dim().max(1) as f64;
    Ok(inertia_scaled(&shifted(t, c), scale, tol)?.n_minus)
}

/// `I − XᵀX` for a rectangular `X`, with its natural scale.
fn gram_defect(x: &DenseMatrix) -> (SymmetricMatrix, f64) {
    let n = x.ncols();
    let m = SymmetricMatrix::symmetrize(DMatrix::identity(n, n) - x.transpose() * x);
    (m, 1.0 + operator_norm(x).powi(2))
}

fn neg_gram_defect(x: &DenseMatrix, tol: &ToleranceProfile) -> Result<usize> {
    let (m, scale) = gram_defect(x);
    Ok(inertia_scaled(&m, scale, tol)?.n_minus)
}

/// `(ν₋(I + T), ν₋(I − T))`, checked to add up to `ν₋(I − T²)`.
pub fn split_counts(t: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<(usize, usize)> {
    let plus = neg_shift(t, 1.0, tol)?;
    let minus = neg_shift(&-t, 1.0, tol)?;
    let total = neg_gram_defect(t.as_matrix(), tol)?;
    if plus + minus != total {
        return Err(Error::IdentityViolated(format!(
            "nu_-(I+T) + nu_-(I-T) = {plus} + {minus} but nu_-(I-T^2) = {total}"
        )));
    }
    Ok((plus, minus))
}

/// `(ν₋(I − T11²), ν₋(I − T1ᵀT1))`.
pub fn column_counts(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<(usize, usize)> {
    Ok((
        neg_gram_defect(col.t11.as_matrix(), tol)?,
        neg_gram_defect(&col.stacked(), tol)?,
    ))
}

pub fn solvable(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<bool> {
    let (a, b) = column_counts(col, tol)?;
    Ok(a == b)
}

fn require_solvable(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<usize> {
    let (kappa11, kappa1) = column_counts(col, tol)?;
    if kappa11 != kappa1 {
        return Err(Error::NotSolvable { kappa11, kappa1 });
    }
    Ok(kappa11)
}

fn assemble(col: &SymmetricColumn, corner: &DenseMatrix) -> SymmetricMatrix {
    let (n1, n2) = (col.n1(), col.n2());
    let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
    m.view_mut((0, 0), (n1 + n2, n1)).copy_from(&col.stacked());
    m.view_mut((0, n1), (n1, n2)).copy_from(&col.t21.transpose());
    m.view_mut((n1, n1), (n2, n2)).copy_from(corner);
    SymmetricMatrix::symmetrize(m)
}

fn build_pair(col: &SymmetricColumn, kappa: usize, tol: &ToleranceProfile) -> Result<ExtremalPair> {
    let (n1, n2) = (col.n1(), col.n2());
    let (defect, scale) = gram_defect(col.t11.as_matrix());
    let dec = spectral_decompose_scaled(&defect, scale)?;
    let vt = dec
        .solve_in_range(0.5, &col.t21.transpose(), tol)?
        .map_err(|residual| {
            Error::IdentityViolated(format!(
                "index condition holds but ran T21* is not in ran D (residual {residual:.3e})"
            ))
        })?;
    let v = vt.transpose();
    let j = dec.signature(tol);
    let id1: DenseMatrix = DMatrix::identity(n1, n1);
    let id2: DenseMatrix = DMatrix::identity(n2, n2);
    let t11 = col.t11.as_matrix();
    let low = -&id2 + &v * (&id1 - t11) * j.as_matrix() * &vt;
    let high = &id2 - &v * (&id1 + t11) * j.as_matrix() * &vt;
    Ok(ExtremalPair {
        t_min: assemble(col, &low),
        t_max: assemble(col, &high),
        v,
        j,
        kappa,
        kappa_plus: neg_shift(&-&col.t11, 1.0, tol)?,
        kappa_minus: neg_shift(&col.t11, 1.0, tol)?,
    })
}

fn close(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: &ToleranceProfile) -> bool {
    let scale = 1.0 + max_norm(a.as_matrix()) + max_norm(b.as_matrix());
    max_norm((a - b).as_matrix()) <= tol.residual * scale
}

/// Builds `T_min` and `T_max`, checks that both have `ν₋(I − T²) = κ` and
/// that negating the column swaps and negates them.
pub fn extremal_extensions(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<ExtremalPair> {
    let kappa = require_solvable(col, tol)?;
    let pair = build_pair(col, kappa, tol)?;
    for (name, t) in [("T_min", &pair.t_min), ("T_max", &pair.t_max)] {
        let found = neg_gram_defect(t.as_matrix(), tol)?;
        if found != kappa {
            return Err(Error::IdentityViolated(format!(
                "nu_-(I - {name}^2) = {found}, expected {kappa}"
            )));
        }
    }
    let dual = build_pair(&col.negated(), kappa, tol)?;
    if !close(&dual.t_min, &-&pair.t_max, tol) || !close(&dual.t_max, &-&pair.t_min, tol) {
        return Err(Error::IdentityViolated(
            "negating the column does not swap the extremal extensions".into(),
        ));
    }
    Ok(pair)
}

fn check_extension(pair: &ExtremalPair, t: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<()> {
    if t.dim() != pair.dim() {
        return Err(Error::DimensionMismatch(format!(
            "candidate is {}x{}, extensions are {}x{}",
            t.dim(),
            t.dim(),
            pair.dim(),
            pair.dim()
        )));
    }
    let n1 = pair.n1();
    let given = pair.t_min.as_matrix().columns(0, n1);
    let mismatch = max_norm(&(t.as_matrix().columns(0, n1) - given));
    if mismatch > tol.residual * (1.0 + max_norm(&given.into_owned())) {
        return Err(Error::NotAnExtension { mismatch });
    }
    Ok(())
}

/// `T_min ⪯ T ⪯ T_max` for a selfadjoint extension `T` of the column.
pub fn is_member(pair: &ExtremalPair, t: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<bool> {
    check_extension(pair, t, tol)?;
    Ok(loewner_leq(&pair.t_min, t, tol)? && loewner_leq(t, &pair.t_max, tol)?)
}

/// Membership decided by eigenvalue counts: `ν₋(I + T) = κ₋` and
/// `ν₋(I − T) = κ₊`.
pub fn is_member_by_counts(
    pair: &ExtremalPair,
    t: &SymmetricMatrix,
    tol: &ToleranceProfile,
) -> Result<bool> {
    check_extension(pair, t, tol)?;
    Ok(neg_shift(t, 1.0, tol)? == pair.kappa_minus && neg_shift(&-t, 1.0, tol)? == pair.kappa_plus)
}

/// `I − VJVᵀ` on the second block.
pub fn gap_block(pair: &ExtremalPair) -> SymmetricMatrix {
    let n2 = pair.n2();
    let vjv = &pair.v * pair.j.as_matrix() * pair.v.transpose();
    SymmetricMatrix::symmetrize(DMatrix::identity(n2, n2) - vjv)
}

/// `T_max − T_min`, checked against `diag(0, 2(I − VJVᵀ))`.
pub fn uniqueness_gap(pair: &ExtremalPair, tol: &ToleranceProfile) -> Result<SymmetricMatrix> {
    let gap = &pair.t_max - &pair.t_min;
    let n1 = pair.n1();
    let mut expected = DMatrix::zeros(pair.dim(), pair.dim());
    expected
        .view_mut((n1, n1), (pair.n2(), pair.n2()))
        .copy_from(&(gap_block(pair).as_matrix() * 2.0));
    let expected = SymmetricMatrix::symmetrize(expected);
    if !close(&gap, &expected, tol) {
        return Err(Error::IdentityViolated(format!(
            "T_max - T_min deviates from diag(0, 2(I - VJV*)) by {:.3e}",
            max_norm((&gap - &expected).as_matrix())
        )));
    }
    Ok(gap)
}

/// Both ways of deciding whether the extremal extensions coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniquenessReport {
    /// `I − VJVᵀ = 0`.
    pub gap_zero: bool,
    /// Criteria for `Vᵀ: H2 → (ran D, J)` being J-isometric; `None` when
    /// `H2 = {0}`.
    pub isometry: Option<JIsometryReport>,
}

impl UniquenessReport {
    pub fn unique(&self) -> bool {
        self.gap_zero
    }
}

pub fn uniqueness_report(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<UniquenessReport> {
    let pair = extremal_extensions(col, tol)?;
    let block = gap_block(&pair);
    let scale = 1.0 + operator_norm(&pair.v).powi(2);
    let gap_zero = max_norm(block.as_matrix()) <= tol.residual * scale;
    if col.n2() == 0 {
        return Ok(UniquenessReport {
            gap_zero,
            isometry: None,
        });
    }
    let (defect, dscale) = gram_defect(col.t11.as_matrix());
    let dec = spectral_decompose_scaled(&defect, dscale)?;
    let q = dec.range_basis(tol);
    let signs: Vec<f64> = dec
        .eigenvalues
        .iter()
        .filter(|l| l.abs() > dec.zero_threshold(tol))
        .map(|l| l.signum())
        .collect();
    let restricted = q.transpose() * pair.v.transpose();
    let d = defect_data(
        &restricted,
        &JSpace::identity(col.n2()),
        &JSpace::from_signs(&signs)?,
        tol,
    )?;
    let isometry = j_isometry_test(&d, tol)?;
    if isometry.isometric() != gap_zero {
        return Err(Error::IdentityViolated(format!(
            "gap test says {gap_zero} but the isometry test says {}",
            isometry.isometric()
        )));
    }
    Ok(UniquenessReport {
        gap_zero,
        isometry: Some(isometry),
    })
}

/// Whether the extremal extensions coincide, i.e. the column has exactly one
/// selfadjoint extension of minimal index.
pub fn krein_uniqueness_criterion(col: &SymmetricColumn, tol: &ToleranceProfile) -> Result<bool> {
    Ok(uniqueness_report(col, tol)?.unique())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::inertia_of;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::DEFAULT
    }

    fn col(t11: &[f64], t21: &[f64]) -> SymmetricColumn {
        let n1 = t11.len();
        SymmetricColumn::new(
            SymmetricMatrix::from_diagonal(t11),
            DMatrix::from_row_slice(t21.len() / n1.max(1), n1, t21),
        )
        .unwrap()
    }

    fn diag(d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(d)
    }

    #[test]
    fn split_counts_examples() {
        assert_eq!(split_counts(&diag(&[2.0, -3.0, 0.0]), &tol()).unwrap(), (1, 1));
        let direct = inertia_of(&diag(&[-3.0, -8.0, 1.0]), &tol()).unwrap().n_minus;
        assert_eq!(direct, 2);
        assert_eq!(split_counts(&SymmetricMatrix::zeros(3), &tol()).unwrap(), (0, 0));
        assert_eq!(split_counts(&diag(&[0.5, -0.5]), &tol()).unwrap(), (0, 0));
        assert_eq!(split_counts(&diag(&[1.0, -1.0]), &tol()).unwrap(), (0, 0));
    }

    #[test]
    fn solvability_examples() {
        assert!(solvable(&col(&[2.0], &[0.0]), &tol()).unwrap());
        assert!(!solvable(&col(&[0.0], &[2.0]), &tol()).unwrap());
        assert!(solvable(&col(&[0.3, -4.0], &[0.0, 0.0, 0.0, 0.0]), &tol()).unwrap());
        assert!(matches!(
            extremal_extensions(&col(&[0.0], &[2.0]), &tol()),
            Err(Error::NotSolvable { kappa11: 0, kappa1: 1 })
        ));
    }

    #[test]
    fn extremal_examples() {
        let p = extremal_extensions(&col(&[0.0], &[0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(p.t_min.as_matrix(), diag(&[0.0, -1.0]).as_matrix(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.t_max.as_matrix(), diag(&[0.0, 1.0]).as_matrix(), epsilon = 1e-14);

        let p = extremal_extensions(&col(&[2.0], &[0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(p.t_min.as_matrix(), diag(&[2.0, -1.0]).as_matrix(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.t_max.as_matrix(), diag(&[2.0, 1.0]).as_matrix(), epsilon = 1e-14);
        assert_eq!((p.kappa, p.kappa_plus, p.kappa_minus), (1, 1, 0));
        assert_abs_diff_eq!(p.j[(0, 0)], -1.0, epsilon = 0.0);

        let p = extremal_extensions(&col(&[0.0], &[1.0]), &tol()).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(p.v[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.t_min.as_matrix(), &swap, epsilon = 1e-14);
        assert_abs_diff_eq!(p.t_max.as_matrix(), &swap, epsilon = 1e-14);
    }

    #[test]
    fn extension_through_kernel_of_defect() {
        // T11 = 1 has D = 0, so V must vanish and T21 must be 0.
        let p = extremal_extensions(&col(&[1.0], &[0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(p.v[(0, 0)], 0.0, epsilon = 0.0);
        assert_eq!((p.kappa_plus, p.kappa_minus), (0, 0));
        assert!(!solvable(&col(&[1.0], &[0.1]), &tol()).unwrap());
    }

    #[test]
    fn membership_examples() {
        let p = extremal_extensions(&col(&[0.0], &[0.0]), &tol()).unwrap();
        assert!(is_member(&p, &p.t_min, &tol()).unwrap());
        assert!(is_member(&p, &p.t_max, &tol()).unwrap());
        for t in [-1.0, -0.4, 0.0, 0.9, 1.0] {
            assert!(is_member(&p, &diag(&[0.0, t]), &tol()).unwrap());
            assert!(is_member_by_counts(&p, &diag(&[0.0, t]), &tol()).unwrap());
        }
        for t in [-1.2, 1.5] {
            assert!(!is_member(&p, &diag(&[0.0, t]), &tol()).unwrap());
            assert!(!is_member_by_counts(&p, &diag(&[0.0, t]), &tol()).unwrap());
        }
        let mid = (&p.t_min + &p.t_max).scale(0.5);
        assert!(is_member(&p, &mid, &tol()).unwrap());
        assert!(matches!(
            is_member(&p, &diag(&[0.5, 0.0]), &tol()),
            Err(Error::NotAnExtension { .. })
        ));
    }

    #[test]
    fn gap_examples() {
        let p = extremal_extensions(&col(&[0.0], &[0.0]), &tol()).unwrap();
        let g = uniqueness_gap(&p, &tol()).unwrap();
        assert_abs_diff_eq!(g.as_matrix(), diag(&[0.0, 2.0]).as_matrix(), epsilon = 1e-14);

        let p = extremal_extensions(&col(&[0.0], &[1.0]), &tol()).unwrap();
        let g = uniqueness_gap(&p, &tol()).unwrap();
        assert_abs_diff_eq!(g.as_matrix(), &DMatrix::zeros(2, 2), epsilon = 1e-14);

        let p = extremal_extensions(&col(&[0.0], &[0.5]), &tol()).unwrap();
        let g = uniqueness_gap(&p, &tol()).unwrap();
        assert_abs_diff_eq!(g[(1, 1)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn uniqueness_examples() {
        assert!(krein_uniqueness_criterion(&col(&[0.0], &[1.0]), &tol()).unwrap());
        assert!(!krein_uniqueness_criterion(&col(&[0.0], &[0.5]), &tol()).unwrap());
        assert!(!krein_uniqueness_criterion(&col(&[0.0], &[0.0]), &tol()).unwrap());
        assert!(!krein_uniqueness_criterion(&col(&[1.0], &[0.0]), &tol()).unwrap());
        let empty = SymmetricColumn::new(diag(&[0.2, 3.0]), DMatrix::zeros(0, 2)).unwrap();
        assert!(krein_uniqueness_criterion(&empty, &tol()).unwrap());
        // indefinite defect: T11 = 2, D = sqrt(3), J = -1, V = T21/sqrt(3)
        let r = uniqueness_report(&col(&[2.0], &[0.0]), &tol()).unwrap();
        assert!(!r.gap_zero);
    }

    #[test]
    fn duality_swaps_extremes() {
        let c = SymmetricColumn::new(
            SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2])).unwrap(),
            DMatrix::from_row_slice(1, 2, &[0.4, 0.2]),
        )
        .unwrap();
        let p = extremal_extensions(&c, &tol()).unwrap();
        let q = extremal_extensions(&c.negated(), &tol()).unwrap();
        assert_abs_diff_eq!(q.t_min.as_matrix(), (-&p.t_max).as_matrix(), epsilon = 1e-12);
        assert_abs_diff_eq!(q.t_max.as_matrix(), (-&p.t_min).as_matrix(), epsilon = 1e-12);
    }
}
