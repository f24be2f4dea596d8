//! Random instance generators with known answers.
//!
//! Every generator builds its instance from the structure the answer depends
//! on (eigenvalues, defect signatures, contraction parameters), so the
//! expected outcome is known by construction rather than by computation.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::completion::IncompleteBlock;
use crate::error::Result;
use crate::factor::JSpace;
use crate::lifting::LiftParameters;
use crate::quasicontraction::SymmetricColumn;
use crate::relations::LinearRelation;
use crate::spectral::{DenseMatrix, SymmetricMatrix};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let qr = gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn symmetric_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[f64]) -> SymmetricMatrix {
    let q = random_orthogonal(rng, eigenvalues.len());
    SymmetricMatrix::symmetrize(&q * DMatrix::from_diagonal(&eigenvalues.into()) * q.transpose())
}

/// `GGᵀ` with `G` an `n×rank` Gaussian, so exactly `n − rank` zero eigenvalues.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> SymmetricMatrix {
    let g = gaussian(rng, n, rank) / (rank.max(1) as f64).sqrt();
    SymmetricMatrix::symmetrize(&g * g.transpose())
}

/// Symmetric with at least one eigenvalue at or below `−0.1`.
pub fn indefinite<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymmetricMatrix {
    let mut eigs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    if n > 0 {
        eigs[0] = rng.random_range(-2.0..-0.1);
    }
    symmetric_with_spectrum(rng, &eigs)
}

fn magnitude<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.5..3.0)
}

/// Symmetric power `|M|^{p}` of a positive semidefinite matrix.
fn psd_power(m: &DenseMatrix, p: f64) -> DenseMatrix {
    if m.is_empty() {
        return m.clone();
    }
    let e = m.clone().symmetric_eigen();
    let d = e.eigenvalues.map(|l| if l > 0.0 { l.powf(p) } else { 0.0 });
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

#[derive(Debug, Clone)]
pub struct CompletionInstance {
    pub block: IncompleteBlock,
    /// `ν₋(A11)`, hence of every admissible completion.
    pub kappa: usize,
}

/// `A11` with prescribed inertia (possibly singular) and `A12 = |A11|^{1/2}R`,
/// which makes the block completable.
pub fn completion_instance<R: Rng + ?Sized>(rng: &mut R) -> CompletionInstance {
    let n1 = rng.random_range(1..=6);
    let n2 = rng.random_range(1..=6);
    let kappa = rng.random_range(0..=n1.min(2));
    let zeros = if rng.random_bool(0.3) {
        rng.random_range(0..=n1 - kappa)
    } else {
        0
    };
    let eigs: Vec<f64> = (0..n1)
        .map(|i| {
            if i < kappa {
                -magnitude(rng)
            } else if i < kappa + zeros {
                0.0
            } else {
                magnitude(rng)
            }
        })
        .collect();
    let q = random_orthogonal(rng, n1);
    let a11 = SymmetricMatrix::symmetrize(&q * DMatrix::from_diagonal(&eigs.as_slice().into()) * q.transpose());
    let root = DMatrix::from_diagonal(&eigs.iter().map(|l| l.abs().sqrt()).collect::<Vec<_>>().as_slice().into());
    let a12 = &q * root * q.transpose() * gaussian(rng, n1, n2);
    CompletionInstance {
        block: IncompleteBlock::new(a11, a12).expect("shapes agree"),
        kappa,
    }
}

/// Diagonal signature with `negatives` entries `−1` at random positions.
pub fn signs<R: Rng + ?Sized>(rng: &mut R, n: usize, negatives: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n).map(|i| if i < negatives { -1.0 } else { 1.0 }).collect();
    for i in (1..n).rev() {
        s.swap(i, rng.random_range(0..=i));
    }
    s
}

/// Signature with a uniformly drawn number of negatives, at most `max_negatives`.
pub fn signs_up_to<R: Rng + ?Sized>(rng: &mut R, n: usize, max_negatives: usize) -> Vec<f64> {
    let k = rng.random_range(0..=max_negatives.min(n));
    signs(rng, n, k)
}

/// `exp(J·K)` with `K` skew, which satisfies `UᵀJU = J`.
pub fn j_unitary<R: Rng + ?Sized>(rng: &mut R, signs: &[f64], strength: f64) -> DenseMatrix {
    let n = signs.len();
    let g = gaussian(rng, n, n) * strength;
    let k = &g - g.transpose();
    (DMatrix::from_diagonal(&signs.into()) * k).exp()
}

fn split(signs: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let pos = (0..signs.len()).filter(|&i| signs[i] > 0.0).collect();
    let neg = (0..signs.len()).filter(|&i| signs[i] < 0.0).collect();
    (pos, neg)
}

/// `U·diag(σ)·Vᵀ` of shape `rows×cols` with the given singular value sampler.
fn with_singular_values<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    mut sigma: impl FnMut(&mut R) -> f64,
) -> DenseMatrix {
    let u = random_orthogonal(rng, rows);
    let v = random_orthogonal(rng, cols);
    let k = rows.min(cols);
    let mut d = DMatrix::zeros(rows, cols);
    for i in 0..k {
        d[(i, i)] = sigma(rng);
    }
    u * d * v.transpose()
}

/// Places the positive-to-positive block `a` and the negative-to-negative
/// block `b` according to the sign patterns, then mixes both sides with
/// J-unitaries so that the defect inertias are unchanged.
fn assemble_canonical<R: Rng + ?Sized>(
    rng: &mut R,
    src: &[f64],
    dst: &[f64],
    a: &DenseMatrix,
    b: &DenseMatrix,
    strength: f64,
) -> DenseMatrix {
    let (sp, sn) = split(src);
    let (dp, dn) = split(dst);
    let mut x = DMatrix::zeros(dst.len(), src.len());
    for (i, &r) in dp.iter().enumerate() {
        for (j, &c) in sp.iter().enumerate() {
            x[(r, c)] = a[(i, j)];
        }
    }
    for (i, &r) in dn.iter().enumerate() {
        for (j, &c) in sn.iter().enumerate() {
            x[(r, c)] = b[(i, j)];
        }
    }
    j_unitary(rng, dst, strength) * x * j_unitary(rng, src, strength)
}

fn unit_or<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    if rng.random_bool(0.25) {
        1.0
    } else {
        rng.random_range(low..high)
    }
}

/// An operator `(ℝ^{n1}, J1) → (ℝ^{n2}, J2)` whose defect operators have
/// eigenvalues either exactly zero or well away from it.
pub fn j_operator<R: Rng + ?Sized>(rng: &mut R, j1: &[f64], j2: &[f64]) -> DenseMatrix {
    let (p1, q1) = (j1.iter().filter(|s| **s > 0.0).count(), j1.iter().filter(|s| **s < 0.0).count());
    let (p2, q2) = (j2.iter().filter(|s| **s > 0.0).count(), j2.iter().filter(|s| **s < 0.0).count());
    let mut sigma = |rng: &mut R| {
        if rng.random_bool(0.5) {
            unit_or(rng, 0.0, 0.9)
        } else {
            unit_or(rng, 1.1, 2.0)
        }
    };
    let a = with_singular_values(rng, p2, p1, &mut sigma);
    let b = with_singular_values(rng, q2, q1, &mut sigma);
    assemble_canonical(rng, j1, j2, &a, &b, 0.3)
}

/// A J-contraction `(ℝ^{n}, src) → (ℝ^{m}, dst)`; needs `ν₋(src) ≤ ν₋(dst)`.
pub fn j_contraction<R: Rng + ?Sized>(rng: &mut R, src: &[f64], dst: &[f64]) -> DenseMatrix {
    let (sp, sn) = split(src);
    let (dp, dn) = split(dst);
    assert!(sn.len() <= dn.len(), "a J-contraction needs nu_-(src) <= nu_-(dst)");
    let a = with_singular_values(rng, dp.len(), sp.len(), |r| unit_or(r, 0.0, 0.9));
    let b = with_singular_values(rng, dn.len(), sn.len(), |r| unit_or(r, 1.1, 2.0));
    assemble_canonical(rng, src, dst, &a, &b, 0.3)
}

/// Eigenvectors spanning the support of `m` and the signs of the
/// corresponding eigenvalues; `scale` sizes the zero threshold.
pub fn signed_support(m: &DenseMatrix, scale: f64) -> (DenseMatrix, Vec<f64>) {
    if m.is_empty() {
        return (DMatrix::zeros(m.nrows(), 0), Vec::new());
    }
    let e = m.clone().symmetric_eigen();
    let thr = 1e-9 * scale.max(1.0);
    let idx: Vec<usize> = (0..m.nrows()).filter(|&i| e.eigenvalues[i].abs() > thr).collect();
    let q = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    let s = idx.iter().map(|&i| e.eigenvalues[i].signum()).collect();
    (q, s)
}

fn diag(s: &[f64]) -> DenseMatrix {
    DMatrix::from_diagonal(&s.into())
}

#[derive(Debug, Clone)]
pub struct LiftInstance {
    pub t: DenseMatrix,
    pub j1: JSpace,
    pub j2: JSpace,
    pub j1prime: JSpace,
    pub j2prime: JSpace,
    pub params: LiftParameters,
    /// `ν₋(J1 − TᵀJ2T)` and `ν₋(J2 − TJ1Tᵀ)` from the construction's own eigensolve.
    pub kappa1: usize,
    pub kappa2: usize,
}

/// Random `T` with all dimensions at most 4 and an admissible parameter triplet.
pub fn lift_instance<R: Rng + ?Sized>(rng: &mut R) -> Result<LiftInstance> {
    let n1 = rng.random_range(1..=4);
    let n2 = rng.random_range(1..=4);
    let j1s = signs_up_to(rng, n1, n1);
    let j2s = signs_up_to(rng, n2, n2);
    let t = j_operator(rng, &j1s, &j2s);
    let (j1m, j2m) = (diag(&j1s), diag(&j2s));
    let scale = 1.0 + t.norm_squared();
    let m1 = &j1m - t.transpose() * &j2m * &t;
    let m2 = &j2m - &t * &j1m * t.transpose();
    let (q_t, s_t) = signed_support(&m1, scale);
    let (q_ts, s_ts) = signed_support(&m2, scale);
    let kappa1 = s_t.iter().filter(|s| **s < 0.0).count();
    let kappa2 = s_ts.iter().filter(|s| **s < 0.0).count();

    let n1p = rng.random_range(1..=4);
    let n2p = rng.random_range(1..=4);
    let j1ps = signs_up_to(rng, n1p, kappa2);
    let j2ps = signs_up_to(rng, n2p, kappa1);

    let gamma1 = &q_ts * j_contraction(rng, &j1ps, &s_ts);
    let gamma2 = (&q_t * j_contraction(rng, &j2ps, &s_t)).transpose();
    let jt = &q_t * diag(&s_t) * q_t.transpose();
    let jts = &q_ts * diag(&s_ts) * q_ts.transpose();
    let dg1 = diag(&j1ps) - gamma1.transpose() * &jts * &gamma1;
    let dg2 = diag(&j2ps) - &gamma2 * &jt * gamma2.transpose();
    let (p1, _) = signed_support(&dg1, 1.0 + gamma1.norm_squared());
    let (p2, _) = signed_support(&dg2, 1.0 + gamma2.norm_squared());
    let c = with_singular_values(rng, n2p, n1p, |r| unit_or(r, 0.0, 1.0));
    let gamma = &p2 * p2.transpose() * c * &p1 * p1.transpose();

    Ok(LiftInstance {
        t,
        j1: JSpace::from_signs(&j1s)?,
        j2: JSpace::from_signs(&j2s)?,
        j1prime: JSpace::from_signs(&j1ps)?,
        j2prime: JSpace::from_signs(&j2ps)?,
        params: LiftParameters {
            gamma1,
            gamma2,
            gamma,
        },
        kappa1,
        kappa2,
    })
}

/// A solvable symmetric column together with the data its extremal
/// extensions are built from.
#[derive(Debug, Clone)]
pub struct ColumnInstance {
    pub column: SymmetricColumn,
    /// `V` with `T21 = V·|I − T11²|^{1/2}`, vanishing on the kernel.
    pub v: DenseMatrix,
    /// `sign(I − T11²)`, zero on the kernel.
    pub j: DenseMatrix,
    /// Whether the extremal extensions coincide.
    pub unique: bool,
}

impl ColumnInstance {
    /// `[[T11, T21ᵀ], [T21, corner]]`.
    fn with_corner(&self, corner: &DenseMatrix) -> SymmetricMatrix {
        let (n1, n2) = (self.column.n1(), self.column.n2());
        let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(self.column.t11.as_matrix());
        m.view_mut((n1, 0), (n2, n1)).copy_from(&self.column.t21);
        m.view_mut((0, n1), (n1, n2)).copy_from(&self.column.t21.transpose());
        m.view_mut((n1, n1), (n2, n2)).copy_from(corner);
        SymmetricMatrix::symmetrize(m)
    }

    /// Lower extremal extension, corner `−I + V(I − T11)JVᵀ`.
    pub fn t_min(&self) -> SymmetricMatrix {
        let n1 = self.column.n1();
        let n2 = self.column.n2();
        let ia = DMatrix::identity(n1, n1) - self.column.t11.as_matrix();
        self.with_corner(&(-DMatrix::identity(n2, n2) + &self.v * ia * &self.j * self.v.transpose()))
    }

    /// Upper extremal extension, corner `I − V(I + T11)JVᵀ`.
    pub fn t_max(&self) -> SymmetricMatrix {
        let n1 = self.column.n1();
        let n2 = self.column.n2();
        let ib = DMatrix::identity(n1, n1) + self.column.t11.as_matrix();
        self.with_corner(&(DMatrix::identity(n2, n2) - &self.v * ib * &self.j * self.v.transpose()))
    }

    /// `2(I − VJVᵀ)`, the corner of `T_max − T_min`.
    pub fn gap(&self) -> DenseMatrix {
        let n2 = self.column.n2();
        (DMatrix::identity(n2, n2) - &self.v * &self.j * self.v.transpose()) * 2.0
    }
}

/// `T11` with eigenvalues away from `±1` or exactly `±1`, and
/// `V = [G^{1/2}W, V₋]` in the eigenbasis of `J`, where `G = I + V₋V₋ᵀ` and
/// `‖W‖ ≤ 1`; this is exactly the solvability condition. Orthonormal rows of
/// `W` make the extremal extensions coincide.
pub fn column_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n1: usize,
    n2: usize,
    want_unique: bool,
) -> ColumnInstance {
    let lambdas: Vec<f64> = (0..n1)
        .map(|_| {
            if rng.random_bool(0.1) {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            } else {
                loop {
                    let l: f64 = rng.random_range(-2.5..2.5);
                    if (l.abs() - 1.0).abs() >= 0.1 {
                        break l;
                    }
                }
            }
        })
        .collect();
    let q = random_orthogonal(rng, n1);
    let inside: Vec<usize> = (0..n1).filter(|&i| lambdas[i].abs() < 1.0).collect();
    let outside: Vec<usize> = (0..n1).filter(|&i| lambdas[i].abs() > 1.0).collect();
    let p = inside.len();
    let vm = gaussian(rng, n2, outside.len()) * rng.random_range(0.0..1.5);
    let g = DMatrix::identity(n2, n2) + &vm * vm.transpose();
    let unique = n2 == 0 || (want_unique && p >= n2);
    let w = if unique {
        random_orthogonal(rng, p).rows(0, n2).into_owned()
    } else {
        with_singular_values(rng, n2, p, |r| r.random_range(0.0..0.9))
    };
    let vp = psd_power(&g, 0.5) * w;
    let mut v_eig = DMatrix::zeros(n2, n1);
    for (k, &i) in inside.iter().enumerate() {
        v_eig.set_column(i, &vp.column(k));
    }
    for (k, &i) in outside.iter().enumerate() {
        v_eig.set_column(i, &vm.column(k));
    }
    let v = v_eig * q.transpose();
    let defect: Vec<f64> = lambdas.iter().map(|l| (1.0 - l * l).abs().sqrt()).collect();
    let sign: Vec<f64> = lambdas
        .iter()
        .map(|l| match l.abs() {
            a if a < 1.0 => 1.0,
            a if a > 1.0 => -1.0,
            _ => 0.0,
        })
        .collect();
    let d = &q * diag(&defect) * q.transpose();
    let j = &q * diag(&sign) * q.transpose();
    let t11 = SymmetricMatrix::symmetrize(&q * diag(&lambdas) * q.transpose());
    let t21 = &v * d;
    ColumnInstance {
        column: SymmetricColumn::new(t11, t21).expect("shapes agree"),
        v,
        j,
        unique,
    }
}

/// Candidate `T = T_min + diag(0, Y)`. Members use `Y = G^{1/2}KG^{1/2}` with
/// `0 ⪯ K ⪯ I` and `G` the gap; non-members leave `[0, G]` by at least `0.1`.
pub fn extension_candidate<R: Rng + ?Sized>(
    rng: &mut R,
    inst: &ColumnInstance,
    member: bool,
) -> SymmetricMatrix {
    let n2 = inst.column.n2();
    let g = inst.gap();
    let y = if member {
        let ks: Vec<f64> = (0..n2)
            .map(|_| match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..1.0),
            })
            .collect();
        let k = symmetric_with_spectrum(rng, &ks);
        let root = psd_power(&g, 0.5);
        &root * k.as_matrix() * &root
    } else {
        let u = gaussian(rng, n2, 1).normalize();
        let c: f64 = rng.random_range(0.1..1.0);
        if rng.random_bool(0.5) {
            &g + &u * u.transpose() * c
        } else {
            -&u * u.transpose() * c
        }
    };
    let t_min = inst.t_min();
    let n1 = inst.column.n1();
    let mut t = t_min.into_inner();
    let mut corner = t.view_mut((n1, n1), (n2, n2));
    corner += y;
    SymmetricMatrix::symmetrize(t)
}

/// A symmetric relation whose Cayley transform is the column of `column`
/// written in the orthonormal basis `basis = [B1 B2]`.
#[derive(Debug, Clone)]
pub struct RelationInstance {
    pub relation: LinearRelation,
    pub basis: DenseMatrix,
    pub column: ColumnInstance,
}

impl RelationInstance {
    /// `basis · T · basisᵀ` for `T` in block coordinates.
    pub fn to_full(&self, t: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(&self.basis * t.as_matrix() * self.basis.transpose())
    }
}

/// `A = {(g + T1g, g − T1g) : g ∈ H1}` on `ℝⁿ`, `n ≤ n_max`.
pub fn relation_instance<R: Rng + ?Sized>(rng: &mut R, n_max: usize, want_unique: bool) -> RelationInstance {
    let n = rng.random_range(1..=n_max);
    let n1 = rng.random_range(1..=n);
    let column = column_instance(rng, n1, n - n1, want_unique);
    let basis = random_orthogonal(rng, n);
    let b1 = basis.columns(0, n1);
    let t1 = &basis * column.column.stacked();
    let f = &b1 + &t1;
    let fp = &b1 - &t1;
    RelationInstance {
        relation: LinearRelation::from_generators(&f, &fp).expect("generators are finite"),
        basis,
        column,
    }
}

/// Graph of the symmetric matrix `T` pulled back through the Cayley transform.
pub fn inverse_cayley(t: &SymmetricMatrix) -> LinearRelation {
    LinearRelation::from_operator(t.as_matrix())
        .expect("finite matrix")
        .cayley()
}

/// Invertible `H1 ⪯ H2` with all eigenvalues at least `0.1` in magnitude.
/// With `flip`, the increment is pushed along a negative direction of `H1`
/// far enough to change the inertia whenever `H1` has one.
pub fn ordered_matrix_pair<R: Rng + ?Sized>(rng: &mut R, flip: bool) -> (SymmetricMatrix, SymmetricMatrix) {
    loop {
        let n = rng.random_range(1..=5);
        let negatives = rng.random_range(0..=n);
        let eigs: Vec<f64> = (0..n)
            .map(|i| if i < negatives { -1.0 } else { 1.0 } * rng.random_range(0.3..3.0))
            .collect();
        let q = random_orthogonal(rng, n);
        let h1 = SymmetricMatrix::symmetrize(&q * diag(&eigs) * q.transpose());
        let inc = if flip && negatives > 0 {
            let u = q.column(0).into_owned();
            let push = -eigs[0] + rng.random_range(0.3..2.0);
            &u * u.transpose() * push
        } else {
            let rank = rng.random_range(0..=n);
            psd(rng, n, rank).into_inner()
        };
        let h2 = SymmetricMatrix::symmetrize(h1.as_matrix() + inc);
        let min_abs = h2
            .as_matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.abs()));
        if min_abs >= 0.1 {
            return (h1, h2);
        }
    }
}

/// Selfadjoint relations `H1 ≤ H2` given through their resolvents at `a0`.
#[derive(Debug, Clone)]
pub struct RelationPair {
    pub h1: LinearRelation,
    pub h2: LinearRelation,
    /// `(Hᵢ − a0)^{-1}`, with `0 ⪯ R2 ⪯ R1`.
    pub r1: DenseMatrix,
    pub r2: DenseMatrix,
    pub a0: f64,
    /// `i₋(H1)` and `i₋(H2)`.
    pub i1: usize,
    pub i2: usize,
}

/// `Hi = {(Rᵢg, g + a0·Rᵢg)}`; singular `Rᵢ` give multivalued parts.
pub fn ordered_relation_pair<R: Rng + ?Sized>(rng: &mut R) -> RelationPair {
    loop {
        let n = rng.random_range(1..=5);
        let a0: f64 = rng.random_range(-2.0..0.5);
        let rank = rng.random_range(0..=n);
        let r1 = psd(rng, n, rank).into_inner() * rng.random_range(0.5..3.0);
        let ks: Vec<f64> = (0..n)
            .map(|_| match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..1.0),
            })
            .collect();
        let k = symmetric_with_spectrum(rng, &ks);
        let root = psd_power(&r1, 0.5);
        let r2 = &root * (DMatrix::identity(n, n) - k.as_matrix()) * &root;
        // Operator-part eigenvalues are a0 + 1/ρ over the positive eigenvalues ρ of R.
        let counts = |r: &DenseMatrix| -> Option<usize> {
            let mut neg = 0;
            for rho in r.clone().symmetric_eigen().eigenvalues.iter() {
                if *rho <= 1e-8 {
                    continue;
                }
                let mu = a0 + 1.0 / rho;
                if mu.abs() < 0.05 || *rho < 1e-3 {
                    return None;
                }
                if mu < 0.0 {
                    neg += 1;
                }
            }
            Some(neg)
        };
        let (Some(i1), Some(i2)) = (counts(&r1), counts(&r2)) else {
            continue;
        };
        let make = |r: &DenseMatrix| {
            let f = r.clone();
            let fp = DMatrix::identity(n, n) + r * a0;
            LinearRelation::from_generators(&f, &fp).expect("finite generators")
        };
        return RelationPair {
            h1: make(&r1),
            h2: make(&r2),
            r1,
            r2,
            a0,
            i1,
            i2,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(&mut rng, 5);
        assert!((q.transpose() * &q - DMatrix::identity(5, 5)).amax() < 1e-12);
    }

    #[test]
    fn j_unitary_preserves_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = [1.0, -1.0, 1.0, -1.0];
        let u = j_unitary(&mut rng, &s, 0.5);
        let j = diag(&s);
        assert!((u.transpose() * &j * &u - &j).amax() < 1e-12);
    }

    #[test]
    fn j_contraction_has_nonnegative_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let src = [1.0, -1.0, 1.0];
            let dst = [-1.0, 1.0, -1.0, 1.0];
            let x = j_contraction(&mut rng, &src, &dst);
            let m = diag(&src) - x.transpose() * diag(&dst) * &x;
            let min = m.symmetric_eigen().eigenvalues.min();
            assert!(min > -1e-10, "{min}");
        }
    }

    #[test]
    fn column_solvability_by_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n1 = rng.random_range(1..=4);
            let n2 = rng.random_range(0..=2);
            let unique = rng.random_bool(0.5);
            let inst = column_instance(&mut rng, n1, n2, unique);
            let t11 = inst.column.t11.as_matrix();
            let t1 = inst.column.stacked();
            let count = |m: DenseMatrix| m.symmetric_eigen().eigenvalues.iter().filter(|l| **l < -1e-9).count();
            let a = count(DMatrix::identity(n1, n1) - t11 * t11);
            let b = count(DMatrix::identity(n1, n1) - t1.transpose() * &t1);
            assert_eq!(a, b);
        }
    }
}
