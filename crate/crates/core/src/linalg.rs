//! Dense numerical kernels: matrix exponential, the φ₁ matrix function,
//! Hermitian eigen-solves and Gauss–Legendre rules.

use nalgebra::DMatrix;

use crate::{CMatrix, C64};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling threshold for the degree-13 diagonal Padé approximant.
const THETA13: f64 = 5.371920351148152;

/// Induced 1-norm (max absolute column sum).
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a fixed degree-13 Padé
/// approximant. `expm(0)` is exactly the identity.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let ident = CMatrix::identity(n, n);
    if n == 0 {
        return ident;
    }
    let nrm = norm1(a);
    if nrm == 0.0 {
        return ident;
    }
    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = if squarings > 0 {
        a.scale(0.5f64.powi(squarings))
    } else {
        a.clone()
    };

    let b = PADE13.map(|v| C64::new(v, 0.0));
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = &scaled * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// φ₁(M) = Σ_k M^k/(k+1)!, read off the top-right block of
/// exp([[M, I], [0, 0]]).
pub fn phi1(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(m);
    for i in 0..n {
        aug[(i, n + i)] = C64::new(1.0, 0.0);
    }
    let e = expm(&aug);
    e.view((0, n), (n, n)).into_owned()
}

/// Hermitian eigen-decomposition of the Hermitian part of `a`, eigenvalues
/// ascending, eigenvectors as matching columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.clone().singular_values().iter().copied().collect()
}

/// Spectral norm.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// |a| = (a* a)^{1/2}, through the SVD a = U Σ V*.
pub fn abs_matrix(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sigma = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new(s, 0.0)));
    let out = vt.adjoint() * sigma * &vt;
    (&out + out.adjoint()).scale(0.5)
}

/// Apply a real function to a Hermitian matrix through its eigenbasis.
pub fn hermitian_fn(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(a);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::new(f(v), 0.0)),
    ));
    let out = &vecs * d * vecs.adjoint();
    (&out + out.adjoint()).scale(0.5)
}

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [0, t].
pub fn gauss_legendre_on(order: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let nodes = x.iter().map(|&xi| 0.5 * t * (xi + 1.0)).collect();
    let weights = w.iter().map(|&wi| 0.5 * t * wi).collect();
    (nodes, weights)
}
