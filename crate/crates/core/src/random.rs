//! Seeded random instances used by experiments, the self-test and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraShape, Operator};
use crate::{CMatrix, C64};

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 20_240_611;

pub type LabRng = ChaCha8Rng;

pub fn rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a label.
pub fn sub_rng(seed: u64, stream: u64) -> LabRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Up to `max_blocks` blocks of dimension ≤ `max_dim`, weights in [0.2, 3).
pub fn shape(rng: &mut impl Rng, max_blocks: usize, max_dim: usize) -> AlgebraShape {
    let k = rng.random_range(1..=max_blocks);
    AlgebraShape::new((0..k).map(|_| (rng.random_range(1..=max_dim), 0.2 + 2.8 * rng.random::<f64>())))
        .expect("valid random shape")
}

pub fn operator(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    let blocks = shape
        .blocks()
        .iter()
        .map(|b| complex_gaussian_matrix(rng, b.dim))
        .collect();
    Operator::new(shape.clone(), blocks).expect("shape-consistent blocks")
}

pub fn selfadjoint(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    operator(rng, shape).real_part()
}

/// x = a* a for Gaussian a, scaled to unit operator norm.
pub fn positive(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    let a = operator(rng, shape);
    let p = (&a.adjoint() * &a).real_part();
    let n = p.norm_inf();
    if n > 0.0 {
        p.scale(1.0 / n)
    } else {
        p
    }
}

/// Random operator with ‖z‖_∞ ≤ 1.
pub fn contraction(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    let a = operator(rng, shape);
    let n = a.norm_inf();
    let c = rng.random_range(0.1..1.0);
    a.scale(c / n)
}

/// Block-unitary via QR of a Gaussian matrix.
pub fn unitary(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    let blocks = shape
        .blocks()
        .iter()
        .map(|b| complex_gaussian_matrix(rng, b.dim).qr().q())
        .collect();
    Operator::new(shape.clone(), blocks).expect("shape-consistent blocks")
}

/// Random orthogonal projection of random rank in each block.
pub fn projection(rng: &mut impl Rng, shape: &AlgebraShape) -> Operator {
    let u = unitary(rng, shape);
    let diag: Vec<f64> = (0..shape.total_dim())
        .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
        .collect();
    let d = Operator::diagonal(shape, &diag).expect("diagonal fits");
    &(&u * &d) * &u.adjoint()
}

/// Nonnegative vector on `n` atoms with a few zero entries.
pub fn nonnegative_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.2 {
                0.0
            } else {
                rng.random_range(0.0..5.0)
            }
        })
        .collect()
}

/// Nonnegative matrix with every row and column sum at most 1.
pub fn sub_doubly_stochastic(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut max_line = 0.0f64;
    for i in 0..n {
        max_line = max_line.max(m[i].iter().sum());
        max_line = max_line.max((0..n).map(|r| m[r][i]).sum());
    }
    let shrink = rng.random_range(0.6..1.0) / max_line;
    for row in &mut m {
        for v in row.iter_mut() {
            *v *= shrink;
        }
    }
    m
}
