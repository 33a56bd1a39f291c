//! Finite-dimensional semifinite algebras: a direct sum of matrix factors
//! `⊕_k M_{n_k}(C)` with trace `τ(x) = Σ_k w_k · Tr(x_k)`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMatrix, C64};

/// Projection detection tolerance on `‖e² − e‖_∞` and `‖e − e*‖_∞`.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Relative threshold for merging nearly equal eigenvalues.
pub const MERGE_REL_TOL: f64 = 1e-9;
/// Singular values below this are treated as zero when computing kernels.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, f64)>", into = "Vec<(usize, f64)>")]
pub struct AlgebraShape {
    blocks: Vec<Block>,
}

impl TryFrom<Vec<(usize, f64)>> for AlgebraShape {
    type Error = Error;

    fn try_from(v: Vec<(usize, f64)>) -> Result<Self> {
        AlgebraShape::new(v)
    }
}

impl From<AlgebraShape> for Vec<(usize, f64)> {
    fn from(s: AlgebraShape) -> Self {
        s.blocks.iter().map(|b| (b.dim, b.weight)).collect()
    }
}

impl AlgebraShape {
    pub fn new(blocks: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|(dim, weight)| Block { dim, weight })
            .collect();
        if blocks.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::InvalidShape(format!("block {k} has dimension 0")));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(Error::InvalidShape(format!(
                    "block {k} has non-positive weight {}",
                    b.weight
                )));
            }
        }
        Ok(AlgebraShape { blocks })
    }

    /// `n` one-dimensional atoms of weight 1, i.e. `ℓ^∞_n` with counting trace.
    pub fn atoms(n: usize) -> Result<Self> {
        Self::new((0..n).map(|_| (1, 1.0)))
    }

    /// A single `n × n` matrix factor.
    pub fn matrix(n: usize, weight: f64) -> Result<Self> {
        Self::new([(n, weight)])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// τ(1) = Σ w_k n_k.
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    /// Dimension of the algebra as a vector space, Σ n_k².
    pub fn hs_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Start of each block in the Hilbert–Schmidt coordinate vector.
    pub fn hs_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = acc;
                acc += b.dim * b.dim;
                o
            })
            .collect()
    }

    /// Every factor is one-dimensional: the algebra is commutative.
    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    /// Total matrix size Σ n_k.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    fn check(&self, other: &AlgebraShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                Vec::<(usize, f64)>::from(self.clone()),
                Vec::<(usize, f64)>::from(other.clone())
            )))
        }
    }
}

/// Element of the algebra: one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

/// Row-major complex blocks, each entry an `[re, im]` pair.
pub type OperatorLiteral = Vec<Vec<Vec<[f64; 2]>>>;

impl Operator {
    pub fn new(shape: AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (m, b)) in blocks.iter().zip(shape.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::ShapeMismatch(format!(
                    "block {k} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("block {k} has non-finite entries")));
            }
        }
        Ok(Operator { shape, blocks })
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|b| CMatrix::zeros(b.dim, b.dim)).collect();
        Operator { shape: shape.clone(), blocks }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| CMatrix::identity(b.dim, b.dim))
            .collect();
        Operator { shape: shape.clone(), blocks }
    }

    /// Diagonal operator; `values` lists the diagonals of all blocks in order.
    pub fn diagonal(shape: &AlgebraShape, values: &[f64]) -> Result<Self> {
        if values.len() != shape.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} diagonal entries, got {}",
                shape.total_dim(),
                values.len()
            )));
        }
        let mut it = values.iter();
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| {
                let d: Vec<C64> = it.by_ref().take(b.dim).map(|&v| C64::new(v, 0.0)).collect();
                CMatrix::from_diagonal(&DVector::from_vec(d))
            })
            .collect();
        Operator::new(shape.clone(), blocks)
    }

    pub fn from_literal(shape: &AlgebraShape, lit: &OperatorLiteral) -> Result<Self> {
        if lit.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "literal has {} blocks, shape has {}",
                lit.len(),
                shape.num_blocks()
            )));
        }
        let mut blocks = Vec::with_capacity(lit.len());
        for (k, (rows, b)) in lit.iter().zip(shape.blocks()).enumerate() {
            if rows.len() != b.dim || rows.iter().any(|r| r.len() != b.dim) {
                return Err(Error::ShapeMismatch(format!(
                    "literal block {k} is not {}x{}",
                    b.dim, b.dim
                )));
            }
            blocks.push(CMatrix::from_fn(b.dim, b.dim, |i, j| {
                let [re, im] = rows[i][j];
                C64::new(re, im)
            }));
        }
        Operator::new(shape.clone(), blocks)
    }

    pub fn to_literal(&self) -> OperatorLiteral {
        self.blocks
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect()
            })
            .collect()
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Operator {
        Operator {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(&self, other: &Operator, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Operator> {
        self.shape.check(&other.shape)?;
        Ok(Operator {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Operator {
        self.map_blocks(|m| m.scale(c))
    }

    pub fn adjoint(&self) -> Operator {
        self.map_blocks(|m| m.adjoint())
    }

    /// Weighted trace τ(x) = Σ_k w_k Tr(x_k); complex in general.
    pub fn trace_complex(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.shape.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    /// Real part of τ(x); exact trace for self-adjoint x.
    pub fn trace(&self) -> f64 {
        self.trace_complex().re
    }

    /// ‖x‖_∞: the largest block operator norm.
    pub fn norm_inf(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Largest entry modulus; a cheap exactness measure.
    pub fn max_abs_entry(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// |x| = (x*x)^{1/2}.
    pub fn abs(&self) -> Operator {
        self.map_blocks(linalg::abs_matrix)
    }

    /// Hermitian part (x + x*)/2.
    pub fn real_part(&self) -> Operator {
        self.map_blocks(|m| (m + m.adjoint()).scale(0.5))
    }

    /// Functional calculus on the Hermitian part.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64 + Copy) -> Operator {
        self.map_blocks(|m| linalg::hermitian_fn(m, f))
    }

    /// `(weight, singular value)` pairs over all blocks, unsorted.
    pub fn weighted_singular_values(&self) -> Vec<(f64, f64)> {
        self.blocks
            .iter()
            .zip(self.shape.blocks())
            .flat_map(|(m, b)| linalg::singular_values(m).into_iter().map(move |s| (b.weight, s)))
            .collect()
    }

    /// `(weight, eigenvalue)` pairs of the Hermitian part, unsorted.
    pub fn weighted_eigenvalues(&self) -> Vec<(f64, f64)> {
        self.blocks
            .iter()
            .zip(self.shape.blocks())
            .flat_map(|(m, b)| linalg::hermitian_eigen(m).0.into_iter().map(move |s| (b.weight, s)))
            .collect()
    }

    pub fn selfadjoint_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| linalg::op_norm(&(m - m.adjoint())))
            .fold(0.0, f64::max)
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.selfadjoint_residual() <= tol
    }

    /// Self-adjoint with smallest eigenvalue ≥ −tol.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_selfadjoint(tol) && self.min_eigenvalue() >= -tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.weighted_eigenvalues()
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.weighted_eigenvalues()
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn projection_residual(&self) -> f64 {
        let idem = self
            .blocks
            .iter()
            .map(|m| linalg::op_norm(&(m * m - m)))
            .fold(0.0, f64::max);
        idem.max(self.selfadjoint_residual())
    }

    pub fn is_projection(&self) -> bool {
        self.projection_residual() <= PROJECTION_TOL
    }

    /// e^⊥ = 1 − e.
    pub fn complement(&self) -> Operator {
        Operator::identity(&self.shape).try_sub(self).expect("same shape")
    }

    pub fn spectral_decompose(&self, tol: f64) -> Result<SpectralDecomposition> {
        let residual = self.selfadjoint_residual();
        if residual > tol {
            return Err(Error::NotSelfAdjoint { residual, tol });
        }
        let merge = MERGE_REL_TOL * (1.0 + self.norm_inf());

        // (eigenvalue, block, eigenvector)
        let mut pieces: Vec<(f64, usize, DVector<C64>)> = Vec::new();
        for (k, m) in self.blocks.iter().enumerate() {
            let (vals, vecs) = linalg::hermitian_eigen(m);
            for (i, v) in vals.into_iter().enumerate() {
                pieces.push((v, k, vecs.column(i).into_owned()));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..pieces.len() {
            match groups.last_mut() {
                Some(g) if pieces[i].0 - pieces[*g.last().unwrap()].0 <= merge => g.push(i),
                _ => groups.push(vec![i]),
            }
        }

        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projections = Vec::with_capacity(groups.len());
        let mut traces = Vec::with_capacity(groups.len());
        for g in groups {
            let lambda = g.iter().map(|&i| pieces[i].0).sum::<f64>() / g.len() as f64;
            let mut p = Operator::zeros(&self.shape);
            let mut tr = 0.0;
            for &i in &g {
                let (_, k, ref v) = pieces[i];
                p.blocks[k] += v * v.adjoint();
                tr += self.shape.blocks()[k].weight;
            }
            eigenvalues.push(lambda);
            projections.push(p);
            traces.push(tr);
        }
        Ok(SpectralDecomposition {
            eigenvalues,
            projections,
            traces,
            merge_tol: merge,
            shape: self.shape.clone(),
        })
    }

    /// ∫_{(lo, hi]} λ de_λ: the part of the spectrum inside the half-open window.
    pub fn spectral_window(&self, lo: f64, hi: f64) -> Result<Operator> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        let sd = self.spectral_decompose(PROJECTION_TOL.max(1e-9 * (1.0 + self.norm_inf())))?;
        Ok(sd.window(lo, hi, |l| l))
    }

    /// Spectral projection χ_{(lo, hi]}(x).
    pub fn spectral_projection(&self, lo: f64, hi: f64) -> Result<Operator> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        let sd = self.spectral_decompose(PROJECTION_TOL.max(1e-9 * (1.0 + self.norm_inf())))?;
        Ok(sd.window(lo, hi, |_| 1.0))
    }

    /// Lattice meet e ∧ f: the projection onto range(e) ∩ range(f), computed
    /// as the kernel of e^⊥ + f^⊥.
    pub fn proj_meet(&self, other: &Operator) -> Result<Operator> {
        self.shape.check(&other.shape)?;
        for p in [self, other] {
            let residual = p.projection_residual();
            if residual > PROJECTION_TOL {
                return Err(Error::NotProjection { residual });
            }
        }
        let sum = self.complement().try_add(&other.complement())?;
        Ok(sum.map_blocks(|m| {
            let n = m.nrows();
            let (vals, vecs) = linalg::hermitian_eigen(m);
            let mut p = CMatrix::zeros(n, n);
            for (i, v) in vals.iter().enumerate() {
                if v.abs() < KERNEL_TOL {
                    let col = vecs.column(i);
                    p += col * col.adjoint();
                }
            }
            p
        }))
    }

    /// Coordinates in the orthonormal basis `w_k^{-1/2} E_ij` for ⟨a,b⟩ = τ(a*b):
    /// block-major, then row-major.
    pub fn to_hs_vector(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.shape.hs_dim());
        let mut idx = 0;
        for (m, b) in self.blocks.iter().zip(self.shape.blocks()) {
            let s = b.weight.sqrt();
            for i in 0..b.dim {
                for j in 0..b.dim {
                    v[idx] = m[(i, j)] * s;
                    idx += 1;
                }
            }
        }
        v
    }

    pub fn from_hs_vector(shape: &AlgebraShape, v: &DVector<C64>) -> Result<Operator> {
        if v.len() != shape.hs_dim() {
            return Err(Error::ShapeMismatch(format!(
                "coordinate vector has length {}, expected {}",
                v.len(),
                shape.hs_dim()
            )));
        }
        let mut idx = 0;
        let blocks = shape
            .blocks()
            .iter()
            .map(|b| {
                let s = 1.0 / b.weight.sqrt();
                let m = CMatrix::from_fn(b.dim, b.dim, |i, j| v[idx + i * b.dim + j] * s);
                idx += b.dim * b.dim;
                m
            })
            .collect();
        Ok(Operator { shape: shape.clone(), blocks })
    }

    /// Diagonal entries of all blocks concatenated (real parts).
    pub fn diagonal_values(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|m| (0..m.nrows()).map(move |i| m[(i, i)].re))
            .collect()
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator shapes must match")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator shapes must match")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator shapes must match")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Distinct eigenvalues, strictly increasing.
    pub eigenvalues: Vec<f64>,
    /// Eigenprojections, mutually orthogonal, summing to 1.
    pub projections: Vec<Operator>,
    /// τ(P_i) for each eigenprojection.
    pub traces: Vec<f64>,
    pub merge_tol: f64,
    shape: AlgebraShape,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> Operator {
        self.window(f64::NEG_INFINITY, f64::INFINITY, |l| l)
    }

    /// Σ f(λ_i) P_i over lo < λ_i ≤ hi; eigenvalues within the merge
    /// tolerance of `hi` are included, those within it of `lo` are not.
    pub fn window(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Operator {
        let mut out = Operator::zeros(&self.shape);
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            if *l > lo + self.merge_tol && *l <= hi + self.merge_tol {
                out = &out + &p.scale(f(*l));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(n: usize) -> AlgebraShape {
        AlgebraShape::atoms(n).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(AlgebraShape::new([]).is_err());
        assert!(AlgebraShape::new([(0, 1.0)]).is_err());
        assert!(AlgebraShape::new([(2, 0.0)]).is_err());
        let s = AlgebraShape::new([(2, 0.5), (1, 3.0)]).unwrap();
        assert_eq!(s.total_trace(), 4.0);
        assert_eq!(s.hs_dim(), 5);
    }

    #[test]
    fn trace_examples() {
        let x = Operator::diagonal(&atoms(3), &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(x.trace(), 6.0);
        let s = AlgebraShape::new([(1, 3.0)]).unwrap();
        assert_eq!(Operator::diagonal(&s, &[2.0]).unwrap().trace(), 6.0);
        assert_eq!(Operator::zeros(&s).trace(), 0.0);
        let s3 = AlgebraShape::new([(2, 0.5), (3, 2.0)]).unwrap();
        assert_eq!(Operator::identity(&s3).trace(), s3.total_trace());
    }

    #[test]
    fn trace_rejects_mismatched_shapes() {
        let a = Operator::identity(&atoms(2));
        let b = Operator::identity(&atoms(3));
        assert!(matches!(a.try_add(&b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn abs_examples() {
        let x = Operator::diagonal(&atoms(2), &[-3.0, 2.0]).unwrap();
        let a = x.abs();
        assert_eq!(a.diagonal_values().iter().map(|v| v.round()).collect::<Vec<_>>(), vec![3.0, 2.0]);
        let s = AlgebraShape::matrix(2, 1.0).unwrap();
        let lit = vec![vec![vec![[0.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]];
        let n = Operator::from_literal(&s, &lit).unwrap();
        let want = Operator::diagonal(&s, &[0.0, 1.0]).unwrap();
        assert!((&n.abs() - &want).max_abs_entry() < 1e-14);
    }

    #[test]
    fn spectral_decompose_examples() {
        let s = AlgebraShape::matrix(3, 1.0).unwrap();
        let x = Operator::diagonal(&s, &[1.0, 1.0, 2.0]).unwrap();
        let sd = x.spectral_decompose(1e-9).unwrap();
        assert_eq!(sd.eigenvalues.len(), 2);
        assert!((sd.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert_eq!(sd.traces, vec![2.0, 1.0]);

        let id = Operator::identity(&s);
        let sd = id.spectral_decompose(1e-9).unwrap();
        assert_eq!(sd.eigenvalues.len(), 1);
        assert!((&sd.projections[0] - &id).max_abs_entry() < 1e-14);
    }

    #[test]
    fn spectral_decompose_rejects_non_selfadjoint() {
        let s = AlgebraShape::matrix(2, 1.0).unwrap();
        let lit = vec![vec![vec![[0.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]];
        let n = Operator::from_literal(&s, &lit).unwrap();
        assert!(matches!(n.spectral_decompose(1e-9), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn spectral_window_examples() {
        let s = AlgebraShape::matrix(3, 1.0).unwrap();
        let x = Operator::diagonal(&s, &[0.2, 1.5, 3.0]).unwrap();
        let w = x.spectral_window(1.0, 2.0).unwrap();
        let want = Operator::diagonal(&s, &[0.0, 1.5, 0.0]).unwrap();
        assert!((&w - &want).max_abs_entry() < 1e-14);
        assert!(x.spectral_window(3.0, f64::INFINITY).unwrap().max_abs_entry() < 1e-14);
        assert!(matches!(x.spectral_window(2.0, 1.0), Err(Error::InvalidWindow { .. })));
        // boundary at hi is included
        let w = x.spectral_window(0.2, 1.5).unwrap();
        assert!((&w - &want).max_abs_entry() < 1e-14);
    }

    #[test]
    fn spectral_window_partition() {
        let s = AlgebraShape::new([(2, 1.0), (1, 0.5)]).unwrap();
        let x = Operator::diagonal(&s, &[0.1, 0.5, 4.0]).unwrap();
        let m = 2.0;
        let low = x.spectral_window(0.0 - 1e-3, 1.0 / m).unwrap();
        let mid = x.spectral_window(1.0 / m, m).unwrap();
        let high = x.spectral_window(m, f64::INFINITY).unwrap();
        let sum = &(&low + &mid) + &high;
        assert!((&sum - &x).max_abs_entry() < 1e-14);
    }

    #[test]
    fn proj_meet_examples() {
        let s = AlgebraShape::matrix(3, 1.0).unwrap();
        let e = Operator::diagonal(&s, &[1.0, 1.0, 0.0]).unwrap();
        let f = Operator::diagonal(&s, &[0.0, 1.0, 1.0]).unwrap();
        let m = e.proj_meet(&f).unwrap();
        assert!((&m - &Operator::diagonal(&s, &[0.0, 1.0, 0.0]).unwrap()).max_abs_entry() < 1e-12);
        let one = Operator::identity(&s);
        assert!((&e.proj_meet(&one).unwrap() - &e).max_abs_entry() < 1e-12);

        let s2 = AlgebraShape::matrix(2, 1.0).unwrap();
        let line = vec![vec![vec![[0.5, 0.0], [0.5, 0.0]], vec![[0.5, 0.0], [0.5, 0.0]]]];
        let p = Operator::from_literal(&s2, &line).unwrap();
        let q = Operator::diagonal(&s2, &[1.0, 0.0]).unwrap();
        assert!(p.proj_meet(&q).unwrap().max_abs_entry() < 1e-12);
        let not_proj = Operator::diagonal(&s2, &[2.0, 0.0]).unwrap();
        assert!(matches!(not_proj.proj_meet(&q), Err(Error::NotProjection { .. })));
    }

    #[test]
    fn hs_roundtrip_and_inner_product() {
        let s = AlgebraShape::new([(2, 0.25), (1, 3.0)]).unwrap();
        let x = Operator::diagonal(&s, &[1.0, 2.0, 3.0]).unwrap();
        let back = Operator::from_hs_vector(&s, &x.to_hs_vector()).unwrap();
        assert!((&back - &x).max_abs_entry() < 1e-15);
        // ⟨x, x⟩ = τ(x* x)
        let v = x.to_hs_vector();
        let ip = v.dotc(&v).re;
        assert!((ip - (&x.adjoint() * &x).trace()).abs() < 1e-12);
    }
}
