//! Completion of an incomplete symmetric 2×2 block `[[A11, A12], [A12ᵀ, *]]`
//! with the smallest possible number of negative eigenvalues.
//!
//! A completion with `ν₋ = ν₋(A11)` exists iff `ran A12 ⊂ ran |A11|^{1/2}`.
//! Writing `A12 = |A11|^{1/2}·S` with `ran S ⊂ ran A11`, the admissible corners
//! are exactly `A22 = SᵀJS + Y` with `Y ⪰ 0`, where `J = sign(A11)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{
    inertia_scaled, loewner_leq, max_norm, spectral_decompose, DenseMatrix, Inertia,
    SpectralDecomposition, SymmetricMatrix, ToleranceProfile,
};

#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteBlock {
    pub a11: SymmetricMatrix,
    pub a12: DenseMatrix,
}

impl IncompleteBlock {
    pub fn new(a11: SymmetricMatrix, a12: DenseMatrix) -> Result<Self> {
        if a12.nrows() != a11.dim() {
            return Err(Error::DimensionMismatch(format!(
                "A12 has {} rows but A11 is {}x{}",
                a12.nrows(),
                a11.dim(),
                a11.dim()
            )));
        }
        crate::spectral::check_finite(&a12)?;
        Ok(IncompleteBlock { a11, a12 })
    }

    pub fn n1(&self) -> usize {
        self.a11.dim()
    }

    pub fn n2(&self) -> usize {
        self.a12.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionSolution {
    pub s: DenseMatrix,
    pub j: DenseMatrix,
    pub a22_min: DenseMatrix,
    pub kappa: usize,
}

impl CompletionSolution {
    pub fn a22_min(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(self.a22_min.clone())
    }
}

/// `S = |A11|^{[-1/2]}·A12`, or the projection residual if the range
/// inclusion fails.
fn factor_s(
    dec: &SpectralDecomposition,
    blk: &IncompleteBlock,
    tol: &ToleranceProfile,
) -> Result<std::result::Result<DenseMatrix, f64>> {
    // Support is classified from A11's own eigenvalues and then |A11|^{1/2}
    // is inverted on it, so the kernel is the same for A11 and its root.
    dec.solve_in_range(0.5, &blk.a12, tol)
}

pub fn completable(blk: &IncompleteBlock, tol: &ToleranceProfile) -> Result<bool> {
    let dec = spectral_decompose(&blk.a11)?;
    Ok(factor_s(&dec, blk, tol)?.is_ok())
}

pub fn minimal_completion(
    blk: &IncompleteBlock,
    tol: &ToleranceProfile,
) -> Result<CompletionSolution> {
    let dec = spectral_decompose(&blk.a11)?;
    let s = factor_s(&dec, blk, tol)?.map_err(|residual| Error::NotCompletable { residual })?;
    let j = dec.signature(tol);
    let a22_min = j.congruence(&s);
    Ok(CompletionSolution {
        s,
        j: j.into_inner(),
        a22_min: a22_min.into_inner(),
        kappa: dec.inertia(tol).n_minus,
    })
}

fn check_a22(blk: &IncompleteBlock, a22: &SymmetricMatrix) -> Result<()> {
    if a22.dim() != blk.n2() {
        return Err(Error::DimensionMismatch(format!(
            "A22 is {}x{} but A12 has {} columns",
            a22.dim(),
            a22.dim(),
            blk.n2()
        )));
    }
    Ok(())
}

/// Whether `a22` completes the block without raising the negative index,
/// decided by `a22_min ⪯ a22`.
pub fn is_solution(
    blk: &IncompleteBlock,
    a22: &SymmetricMatrix,
    tol: &ToleranceProfile,
) -> Result<bool> {
    check_a22(blk, a22)?;
    let sol = minimal_completion(blk, tol)?;
    loewner_leq(&sol.a22_min(), a22, tol)
}

pub fn assemble(blk: &IncompleteBlock, a22: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_a22(blk, a22)?;
    let (n1, n2) = (blk.n1(), blk.n2());
    let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
    m.view_mut((0, 0), (n1, n1)).copy_from(blk.a11.as_matrix());
    m.view_mut((0, n1), (n1, n2)).copy_from(&blk.a12);
    m.view_mut((n1, 0), (n2, n1))
        .copy_from(&blk.a12.transpose());
    m.view_mut((n1, n1), (n2, n2)).copy_from(a22.as_matrix());
    Ok(SymmetricMatrix::symmetrize(m))
}

/// Inertia of the assembled block computed as
/// `inertia(A11) + inertia(A22 − SᵀJS)`.
pub fn schur_inertia(
    blk: &IncompleteBlock,
    a22: &SymmetricMatrix,
    tol: &ToleranceProfile,
) -> Result<Inertia> {
    check_a22(blk, a22)?;
    let sol = minimal_completion(blk, tol)?;
    let floor = sol.a22_min();
    let schur = a22 - &floor;
    let scale = max_norm(a22.as_matrix()) + max_norm(floor.as_matrix());
    let top = spectral_decompose(&blk.a11)?.inertia(tol);
    let bottom = inertia_scaled(&schur, scale, tol)?;
    Ok(top + bottom)
}
