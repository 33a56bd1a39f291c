//! Positive Dunford–Schwartz maps and commuting d-parameter semigroups
//! `T_u = exp(Σ u_i L_i)` acting on a block algebra.
//!
//! Maps are stored as matrices in the orthonormal basis `w_k^{-1/2} E_ij` of
//! the inner product ⟨a, b⟩ = τ(a* b), so the trace-adjoint T† is the plain
//! conjugate transpose.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraShape, Operator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::random;
use crate::spaces::norm_p;
use crate::{CMatrix, C64};

/// Default tolerance for DS⁺ certification.
pub const DS_TOL: f64 = 1e-9;
/// Choi PSD tolerance relative to the Choi trace.
pub const CHOI_REL_TOL: f64 = 1e-9;
/// Commutation residual tolerance relative to the generator scale.
pub const COMMUTATION_REL_TOL: f64 = 1e-9;
/// Random operators used to confirm a positive verdict.
pub const CONFIRMATION_SAMPLES: usize = 20;
const CONFIRMATION_SEED: u64 = 0x0d5_c0f1;

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    shape: AlgebraShape,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(shape: AlgebraShape, matrix: CMatrix) -> Result<Self> {
        let d = shape.hs_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "superoperator must be {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Superoperator { shape, matrix })
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let d = shape.hs_dim();
        Superoperator { shape: shape.clone(), matrix: CMatrix::identity(d, d) }
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let d = shape.hs_dim();
        Superoperator { shape: shape.clone(), matrix: CMatrix::zeros(d, d) }
    }

    /// Tabulate a linear map by applying it to every basis element.
    pub fn from_map(shape: &AlgebraShape, f: impl Fn(&Operator) -> Operator) -> Result<Self> {
        let d = shape.hs_dim();
        let mut matrix = CMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = DVector::zeros(d);
            e[j] = C64::new(1.0, 0.0);
            let basis = Operator::from_hs_vector(shape, &e)?;
            let image = f(&basis);
            if image.shape() != shape {
                return Err(Error::ShapeMismatch("map changed the algebra shape".into()));
            }
            matrix.set_column(j, &image.to_hs_vector());
        }
        Ok(Superoperator { shape: shape.clone(), matrix })
    }

    /// Action f ↦ M f of a real matrix on the atoms of a commutative algebra.
    pub fn from_atom_matrix(shape: &AlgebraShape, m: &[Vec<f64>]) -> Result<Self> {
        if !shape.is_diagonal() {
            return Err(Error::ShapeMismatch("atom matrices need a commutative algebra".into()));
        }
        let n = shape.num_blocks();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("atom matrix must be {n}x{n}")));
        }
        let w: Vec<f64> = shape.blocks().iter().map(|b| b.weight.sqrt()).collect();
        let matrix = CMatrix::from_fn(n, n, |i, j| C64::new(m[i][j] * w[i] / w[j], 0.0));
        Ok(Superoperator { shape: shape.clone(), matrix })
    }

    /// The map x ↦ c·x.
    pub fn scaled_identity(shape: &AlgebraShape, c: f64) -> Self {
        let mut s = Self::identity(shape);
        s.matrix *= C64::new(c, 0.0);
        s
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.shape() != &self.shape {
            return Err(Error::ShapeMismatch("operator and map live on different algebras".into()));
        }
        Operator::from_hs_vector(&self.shape, &(&self.matrix * x.to_hs_vector()))
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("composing maps on different algebras".into()));
        }
        Ok(Superoperator { shape: self.shape.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("adding maps on different algebras".into()));
        }
        Ok(Superoperator { shape: self.shape.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn scale(&self, c: f64) -> Superoperator {
        Superoperator { shape: self.shape.clone(), matrix: self.matrix.scale(c) }
    }

    /// Trace-adjoint T†: τ(T†(a)* b) = τ(a* T(b)).
    pub fn adjoint(&self) -> Superoperator {
        Superoperator { shape: self.shape.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn exp(&self) -> Superoperator {
        Superoperator { shape: self.shape.clone(), matrix: linalg::expm(&self.matrix) }
    }

    /// Frobenius norm of the coordinate matrix.
    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.matrix)
    }

    pub fn power(&self, k: usize) -> Superoperator {
        let d = self.matrix.nrows();
        let mut out = CMatrix::identity(d, d);
        let mut base = self.matrix.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Superoperator { shape: self.shape.clone(), matrix: out }
    }

    /// Image of the (unnormalized) matrix unit E_ij of block `source`, read
    /// in block `target`.
    fn component_image(&self, source: usize, i: usize, j: usize, target: usize) -> CMatrix {
        let offs = self.shape.hs_offsets();
        let bs = self.shape.blocks();
        let (ns, ws) = (bs[source].dim, bs[source].weight);
        let (nt, wt) = (bs[target].dim, bs[target].weight);
        let col = offs[source] + i * ns + j;
        let scale = ws.sqrt() / wt.sqrt();
        CMatrix::from_fn(nt, nt, |a, b| self.matrix[(offs[target] + a * nt + b, col)] * scale)
    }

    /// Choi matrix Σ_ij E_ij ⊗ T_{target←source}(E_ij).
    pub fn choi_block(&self, source: usize, target: usize) -> CMatrix {
        let bs = self.shape.blocks();
        let (ns, nt) = (bs[source].dim, bs[target].dim);
        let mut c = CMatrix::zeros(ns * nt, ns * nt);
        for i in 0..ns {
            for j in 0..ns {
                let img = self.component_image(source, i, j, target);
                c.view_mut((i * nt, j * nt), (nt, nt)).copy_from(&img);
            }
        }
        c
    }
}

// ---------------------------------------------------------------------------
// certification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Positivity {
    CpChoiPassed,
    DiagonalStochasticPassed,
    Failed { witness: PositivityWitness },
}

impl Positivity {
    pub fn passed(&self) -> bool {
        !matches!(self, Positivity::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityWitness {
    /// "CP check failed" or "negative entry".
    pub reason: String,
    pub source_block: usize,
    pub target_block: usize,
    /// Smallest Choi eigenvalue, or the offending entry.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub samples: usize,
    pub max_l1_ratio: f64,
    pub max_linf_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DSCertificate {
    pub positivity: Positivity,
    pub subunital: bool,
    /// ‖(T(1) − 1)₊‖_∞.
    pub subunital_slack: f64,
    pub subtracial: bool,
    /// ‖(T†(1) − 1)₊‖_∞.
    pub subtracial_slack: f64,
    pub verdict: bool,
    /// Redundant norm checks on random operators, run when the verdict holds.
    pub confirmation: Option<ContractionCheck>,
}

fn excess_over_one(y: &Operator) -> f64 {
    (y.real_part().max_eigenvalue() - 1.0).max(0.0)
}

fn positivity(t: &Superoperator, tol: f64) -> Positivity {
    let shape = t.shape();
    let n = shape.num_blocks();
    if shape.is_diagonal() {
        let scale = 1.0 + linalg::max_abs(t.matrix());
        for k in 0..n {
            for l in 0..n {
                let v = t.matrix[(k, l)];
                if v.re < -tol * scale || v.im.abs() > tol * scale {
                    return Positivity::Failed {
                        witness: PositivityWitness {
                            reason: "negative entry".into(),
                            source_block: l,
                            target_block: k,
                            value: if v.im.abs() > tol * scale { v.im } else { v.re },
                        },
                    };
                }
            }
        }
        return Positivity::DiagonalStochasticPassed;
    }
    for l in 0..n {
        for k in 0..n {
            let c = t.choi_block(l, k);
            let herm = linalg::max_abs(&(&c - c.adjoint()));
            let tr = c.trace().re;
            let thresh = CHOI_REL_TOL * tr.abs().max(f64::MIN_POSITIVE);
            let (vals, _) = linalg::hermitian_eigen(&c);
            let min = vals.first().copied().unwrap_or(0.0);
            if min < -thresh || herm > tol * (1.0 + linalg::max_abs(&c)) {
                return Positivity::Failed {
                    witness: PositivityWitness {
                        reason: "CP check failed".into(),
                        source_block: l,
                        target_block: k,
                        value: min,
                    },
                };
            }
        }
    }
    Positivity::CpChoiPassed
}

fn confirm_contraction(t: &Superoperator) -> ContractionCheck {
    let mut rng = random::rng(CONFIRMATION_SEED);
    let mut max_l1: f64 = 0.0;
    let mut max_linf: f64 = 0.0;
    for _ in 0..CONFIRMATION_SAMPLES {
        let x = random::operator(&mut rng, t.shape());
        let y = t.apply(&x).expect("same shape");
        let r1 = norm_p(&y, 1.0).unwrap() / norm_p(&x, 1.0).unwrap();
        let ri = y.norm_inf() / x.norm_inf();
        max_l1 = max_l1.max(r1);
        max_linf = max_linf.max(ri);
    }
    ContractionCheck {
        samples: CONFIRMATION_SAMPLES,
        max_l1_ratio: max_l1,
        max_linf_ratio: max_linf,
        passed: max_l1 <= 1.0 + 1e-9 && max_linf <= 1.0 + 1e-9,
    }
}

/// Certify T ∈ DS⁺: positive (via complete positivity, or entrywise on a
/// commutative algebra), T(1) ≤ 1 and T†(1) ≤ 1.
pub fn verify_ds_plus(t: &Superoperator, tol: f64) -> DSCertificate {
    let one = Operator::identity(t.shape());
    let positivity = positivity(t, tol);
    let subunital_slack = excess_over_one(&t.apply(&one).expect("same shape"));
    let subtracial_slack = excess_over_one(&t.adjoint().apply(&one).expect("same shape"));
    let subunital = subunital_slack <= tol;
    let subtracial = subtracial_slack <= tol;
    let verdict = positivity.passed() && subunital && subtracial;
    DSCertificate {
        positivity,
        subunital,
        subunital_slack,
        subtracial,
        subtracial_slack,
        verdict,
        confirmation: verdict.then(|| confirm_contraction(t)),
    }
}

// ---------------------------------------------------------------------------
// semigroups

/// Commuting generators L_1..L_d with T_u = exp(Σ u_i L_i) ∈ DS⁺.
#[derive(Debug, Clone)]
pub struct Semigroup {
    d: usize,
    generators: Vec<Superoperator>,
    pub commutation_residual: f64,
    pub ds_spotchecks: Vec<(Vec<f64>, DSCertificate)>,
    pub label: String,
}

impl Semigroup {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn generators(&self) -> &[Superoperator] {
        &self.generators
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.generators[0].shape()
    }

    /// T_u as a map.
    pub fn map_at(&self, u: &[f64]) -> Result<Superoperator> {
        self.check_u(u)?;
        let mut sum = Superoperator::zero(self.shape());
        for (ui, l) in u.iter().zip(&self.generators) {
            if *ui != 0.0 {
                sum = sum.add(&l.scale(*ui))?;
            }
        }
        Ok(sum.exp())
    }

    /// exp(s L_i).
    pub fn axis_map(&self, axis: usize, s: f64) -> Superoperator {
        self.generators[axis].scale(s).exp()
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "u has {} components, semigroup has d = {}",
                u.len(),
                self.d
            )));
        }
        if let Some(bad) = u.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("u must be ≥ 0 componentwise, got {bad}")));
        }
        Ok(())
    }

    /// Sum of generator norms, induced 1-norm of the coordinate matrices.
    pub fn generator_scale(&self) -> f64 {
        self.generators.iter().map(|l| linalg::norm1(l.matrix())).sum()
    }
}

pub fn make_semigroup(generators: Vec<Superoperator>, d: usize) -> Result<Semigroup> {
    make_labelled(generators, d, "custom".into())
}

fn make_labelled(generators: Vec<Superoperator>, d: usize, label: String) -> Result<Semigroup> {
    if d == 0 || generators.len() != d {
        return Err(Error::InvalidArgument(format!(
            "expected d = {d} ≥ 1 generators, got {}",
            generators.len()
        )));
    }
    let shape = generators[0].shape().clone();
    if generators.iter().any(|g| g.shape() != &shape) {
        return Err(Error::ShapeMismatch("generators live on different algebras".into()));
    }
    let scale = generators.iter().map(|g| g.frobenius()).fold(1.0, f64::max);
    let mut residual: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let a = &generators[i].matrix * &generators[j].matrix;
            let b = &generators[j].matrix * &generators[i].matrix;
            let r = linalg::frobenius(&(a - b));
            if r > COMMUTATION_REL_TOL * scale * scale {
                return Err(Error::NonCommuting { i, j, residual: r });
            }
            residual = residual.max(r);
        }
    }
    let mut sg = Semigroup {
        d,
        generators,
        commutation_residual: residual,
        ds_spotchecks: Vec::new(),
        label,
    };
    let mut points: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    points.push(vec![1.0; d]);
    points.push(vec![0.1; d]);
    for u in points {
        let cert = verify_ds_plus(&sg.map_at(&u)?, DS_TOL);
        if !cert.verdict {
            return Err(Error::SpotcheckFailed {
                u,
                reason: format!(
                    "positivity {:?}, unital slack {:.3e}, tracial slack {:.3e}",
                    cert.positivity, cert.subunital_slack, cert.subtracial_slack
                ),
            });
        }
        sg.ds_spotchecks.push((u, cert));
    }
    Ok(sg)
}

/// T_u(x) = exp(Σ u_i L_i)(x).
pub fn evolve(sg: &Semigroup, u: &[f64], x: &Operator) -> Result<Operator> {
    sg.map_at(u)?.apply(x)
}

// ---------------------------------------------------------------------------
// built-in families

pub type RealMatrix = Vec<Vec<f64>>;
pub type ComplexMatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Graph Laplacian of the n-cycle on n weight-1 atoms.
    HeatCycle { n: usize },
    /// Schur multiplier semigroup x ↦ exp(−u q) ⊙ x on one matrix factor.
    Schur {
        q: RealMatrix,
        #[serde(default = "unit_weight")]
        weight: f64,
    },
    /// Several Schur multiplier generators on one factor (d = qs.len()).
    SchurMulti {
        qs: Vec<RealMatrix>,
        #[serde(default = "unit_weight")]
        weight: f64,
    },
    /// Poisson semigroup exp(u(M − I)) of a sub-doubly-stochastic M on atoms.
    Substochastic { m: RealMatrix },
    /// T_u = id for every u.
    Trivial {
        shape: AlgebraShape,
        #[serde(default = "one")]
        d: usize,
    },
    /// Tensor product of families; generators act on their own factor.
    Tensor { factors: Vec<FamilySpec> },
    /// Raw generator matrices in the Hilbert–Schmidt basis.
    Raw {
        shape: AlgebraShape,
        generators: Vec<ComplexMatrixLiteral>,
    },
}

fn unit_weight() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

impl FamilySpec {
    pub fn label(&self) -> String {
        match self {
            FamilySpec::HeatCycle { n } => format!("heat_cycle({n})"),
            FamilySpec::Schur { q, .. } => format!("schur({})", q.len()),
            FamilySpec::SchurMulti { qs, .. } => format!("schur_multi({}x{})", qs.len(), qs.first().map_or(0, |q| q.len())),
            FamilySpec::Substochastic { m } => format!("substochastic({})", m.len()),
            FamilySpec::Trivial { d, .. } => format!("trivial(d={d})"),
            FamilySpec::Tensor { factors } => {
                let inner: Vec<String> = factors.iter().map(|f| f.label()).collect();
                format!("tensor[{}]", inner.join(","))
            }
            FamilySpec::Raw { generators, .. } => format!("raw(d={})", generators.len()),
        }
    }

    /// Distance matrix q_jk = |j − k|.
    pub fn schur_line(n: usize) -> Self {
        FamilySpec::Schur { q: line_distance(n), weight: 1.0 }
    }
}

pub fn line_distance(n: usize) -> RealMatrix {
    (0..n)
        .map(|j| (0..n).map(|k| (j as f64 - k as f64).abs()).collect())
        .collect()
}

fn family_generators(spec: &FamilySpec) -> Result<(AlgebraShape, Vec<Superoperator>)> {
    match spec {
        FamilySpec::HeatCycle { n } => {
            if *n == 0 {
                return Err(Error::InvalidFamily("heat_cycle needs n ≥ 1".into()));
            }
            let shape = AlgebraShape::atoms(*n)?;
            let mut l = vec![vec![0.0; *n]; *n];
            for i in 0..*n {
                let mut nbrs = vec![(i + 1) % n, (i + n - 1) % n];
                nbrs.retain(|&j| j != i);
                nbrs.dedup();
                for j in nbrs {
                    l[i][j] += 1.0;
                    l[i][i] -= 1.0;
                }
            }
            Ok((shape.clone(), vec![Superoperator::from_atom_matrix(&shape, &l)?]))
        }
        FamilySpec::Schur { q, weight } => schur_generators(std::slice::from_ref(q), *weight),
        FamilySpec::SchurMulti { qs, weight } => schur_generators(qs, *weight),
        FamilySpec::Substochastic { m } => {
            let n = m.len();
            if n == 0 || m.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidFamily("substochastic needs a square matrix".into()));
            }
            for i in 0..n {
                let row: f64 = m[i].iter().sum();
                let col: f64 = m.iter().map(|r| r[i]).sum();
                if m[i].iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidFamily("substochastic entries must be ≥ 0".into()));
                }
                if row > 1.0 + 1e-12 || col > 1.0 + 1e-12 {
                    return Err(Error::InvalidFamily(format!(
                        "row/column {i} sums ({row}, {col}) exceed 1"
                    )));
                }
            }
            let shape = AlgebraShape::atoms(n)?;
            let gen: RealMatrix = (0..n)
                .map(|i| (0..n).map(|j| m[i][j] - if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            Ok((shape.clone(), vec![Superoperator::from_atom_matrix(&shape, &gen)?]))
        }
        FamilySpec::Trivial { shape, d } => {
            if *d == 0 {
                return Err(Error::InvalidFamily("trivial needs d ≥ 1".into()));
            }
            Ok((shape.clone(), vec![Superoperator::zero(shape); *d]))
        }
        FamilySpec::Tensor { factors } => {
            let mut it = factors.iter();
            let first = it
                .next()
                .ok_or_else(|| Error::InvalidFamily("tensor needs at least one factor".into()))?;
            let mut acc = family_generators(first)?;
            for f in it {
                acc = tensor_pair(acc, family_generators(f)?)?;
            }
            Ok(acc)
        }
        FamilySpec::Raw { shape, generators } => {
            let d = shape.hs_dim();
            let gens = generators
                .iter()
                .map(|g| {
                    if g.len() != d || g.iter().any(|r| r.len() != d) {
                        return Err(Error::InvalidFamily(format!("raw generator must be {d}x{d}")));
                    }
                    Superoperator::new(
                        shape.clone(),
                        CMatrix::from_fn(d, d, |i, j| C64::new(g[i][j][0], g[i][j][1])),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((shape.clone(), gens))
        }
    }
}

fn schur_generators(qs: &[RealMatrix], weight: f64) -> Result<(AlgebraShape, Vec<Superoperator>)> {
    let n = qs.first().map_or(0, |q| q.len());
    if n == 0 {
        return Err(Error::InvalidFamily("schur needs a nonempty q".into()));
    }
    let shape = AlgebraShape::matrix(n, weight)?;
    let mut gens = Vec::with_capacity(qs.len());
    for q in qs {
        check_conditionally_negative(q, n)?;
        let diag: Vec<C64> = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| C64::new(-q[j][k], 0.0))
            .collect();
        let m = CMatrix::from_diagonal(&DVector::from_vec(diag));
        gens.push(Superoperator::new(shape.clone(), m)?);
    }
    Ok((shape, gens))
}

/// q symmetric with zero diagonal and −q PSD on the complement of the
/// all-ones vector.
fn check_conditionally_negative(q: &RealMatrix, n: usize) -> Result<()> {
    if q.len() != n || q.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidFamily(format!("q must be {n}x{n}")));
    }
    let scale = 1.0 + q.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for j in 0..n {
        if q[j][j].abs() > 1e-12 * scale {
            return Err(Error::InvalidFamily("q must have zero diagonal".into()));
        }
        for k in 0..n {
            if (q[j][k] - q[k][j]).abs() > 1e-12 * scale {
                return Err(Error::InvalidFamily("q must be symmetric".into()));
            }
        }
    }
    let proj = CMatrix::from_fn(n, n, |i, j| {
        C64::new(if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64, 0.0)
    });
    let negq = CMatrix::from_fn(n, n, |i, j| C64::new(-q[i][j], 0.0));
    let restricted = &proj * negq * &proj;
    let (vals, _) = linalg::hermitian_eigen(&restricted);
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -1e-9 * scale {
        return Err(Error::InvalidFamily(format!(
            "q is not conditionally negative definite (eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

fn tensor_pair(
    a: (AlgebraShape, Vec<Superoperator>),
    b: (AlgebraShape, Vec<Superoperator>),
) -> Result<(AlgebraShape, Vec<Superoperator>)> {
    let (sa, ga) = a;
    let (sb, gb) = b;
    let shape = AlgebraShape::new(sa.blocks().iter().flat_map(|x| {
        sb.blocks().iter().map(move |y| (x.dim * y.dim, x.weight * y.weight))
    }))?;
    let poffs = shape.hs_offsets();
    let aoffs = sa.hs_offsets();
    let boffs = sb.hs_offsets();

    // (block, row, col) for each factor coordinate
    let coords = |s: &AlgebraShape, offs: &[usize]| -> Vec<(usize, usize, usize)> {
        let mut v = Vec::with_capacity(s.hs_dim());
        for (k, blk) in s.blocks().iter().enumerate() {
            debug_assert_eq!(v.len(), offs[k]);
            for i in 0..blk.dim {
                for j in 0..blk.dim {
                    v.push((k, i, j));
                }
            }
        }
        v
    };
    let ca = coords(&sa, &aoffs);
    let cb = coords(&sb, &boffs);
    let nb = sb.num_blocks();
    let index = |ia: usize, ib: usize| -> usize {
        let (k, i, j) = ca[ia];
        let (l, r, s) = cb[ib];
        let m = sb.blocks()[l].dim;
        let dim = sa.blocks()[k].dim * m;
        poffs[k * nb + l] + (i * m + r) * dim + (j * m + s)
    };

    let dp = shape.hs_dim();
    let mut gens = Vec::with_capacity(ga.len() + gb.len());
    for g in &ga {
        let mut mat = CMatrix::zeros(dp, dp);
        for ib in 0..cb.len() {
            for ia in 0..ca.len() {
                for ja in 0..ca.len() {
                    let v = g.matrix[(ia, ja)];
                    if v != C64::new(0.0, 0.0) {
                        mat[(index(ia, ib), index(ja, ib))] = v;
                    }
                }
            }
        }
        gens.push(Superoperator::new(shape.clone(), mat)?);
    }
    for g in &gb {
        let mut mat = CMatrix::zeros(dp, dp);
        for ia in 0..ca.len() {
            for ib in 0..cb.len() {
                for jb in 0..cb.len() {
                    let v = g.matrix[(ib, jb)];
                    if v != C64::new(0.0, 0.0) {
                        mat[(index(ia, ib), index(ia, jb))] = v;
                    }
                }
            }
        }
        gens.push(Superoperator::new(shape.clone(), mat)?);
    }
    Ok((shape, gens))
}

/// Build and certify a built-in family.
pub fn make_family(spec: &FamilySpec) -> Result<Semigroup> {
    let (_, gens) = family_generators(spec)?;
    let d = gens.len();
    make_labelled(gens, d, spec.label())
}

/// Cyclic shift of n weight-1 atoms: (Tf)_i = f_{i−1}.
pub fn cyclic_shift(n: usize) -> Result<Superoperator> {
    let shape = AlgebraShape::atoms(n)?;
    let m: RealMatrix = (0..n)
        .map(|i| (0..n).map(|j| if (j + 1) % n == i { 1.0 } else { 0.0 }).collect())
        .collect();
    Superoperator::from_atom_matrix(&shape, &m)
}

/// The built-in families exercised by the laboratory suites, with d ∈ {1,2,3}.
pub fn builtin_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::HeatCycle { n: 2 },
        FamilySpec::HeatCycle { n: 8 },
        FamilySpec::schur_line(3),
        FamilySpec::Substochastic {
            m: vec![
                vec![0.0, 0.5, 0.3],
                vec![0.4, 0.1, 0.2],
                vec![0.3, 0.2, 0.4],
            ],
        },
        FamilySpec::Trivial { shape: AlgebraShape::new([(2, 0.5), (1, 2.0)]).unwrap(), d: 1 },
        FamilySpec::SchurMulti {
            qs: vec![line_distance(3), vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]],
            weight: 0.5,
        },
        FamilySpec::Tensor { factors: vec![FamilySpec::HeatCycle { n: 3 }, FamilySpec::HeatCycle { n: 2 }] },
        FamilySpec::Tensor {
            factors: vec![FamilySpec::HeatCycle { n: 2 }, FamilySpec::HeatCycle { n: 3 }, FamilySpec::schur_line(2)],
        },
        FamilySpec::Trivial { shape: AlgebraShape::new([(2, 1.0), (1, 0.5)]).unwrap(), d: 3 },
    ]
}

/// Commutative members of [`builtin_families`].
pub fn commutative_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::HeatCycle { n: 2 },
        FamilySpec::HeatCycle { n: 4 },
        FamilySpec::HeatCycle { n: 8 },
        FamilySpec::Substochastic {
            m: vec![
                vec![0.0, 0.5, 0.3],
                vec![0.4, 0.1, 0.2],
                vec![0.3, 0.2, 0.4],
            ],
        },
        FamilySpec::Trivial { shape: AlgebraShape::atoms(4).unwrap(), d: 1 },
        FamilySpec::Tensor { factors: vec![FamilySpec::HeatCycle { n: 3 }, FamilySpec::HeatCycle { n: 2 }] },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_shift_is_doubly_stochastic() {
        let c = verify_ds_plus(&cyclic_shift(5).unwrap(), DS_TOL);
        assert!(c.verdict);
        assert_eq!(c.positivity, Positivity::DiagonalStochasticPassed);
        assert!(c.confirmation.unwrap().passed);
    }

    #[test]
    fn doubling_map_fails_subunitality() {
        let shape = AlgebraShape::new([(2, 1.0), (1, 0.5)]).unwrap();
        let c = verify_ds_plus(&Superoperator::scaled_identity(&shape, 2.0), DS_TOL);
        assert!(!c.verdict);
        assert!(!c.subunital);
        assert!((c.subunital_slack - 1.0).abs() < 1e-12);
        assert!(c.positivity.passed());
        assert!(c.confirmation.is_none());
    }

    #[test]
    fn transpose_is_positive_but_not_cp() {
        let shape = AlgebraShape::matrix(2, 1.0).unwrap();
        let t = Superoperator::from_map(&shape, |x| x.map_blocks(|m| m.transpose())).unwrap();
        let c = verify_ds_plus(&t, DS_TOL);
        assert!(!c.verdict);
        match c.positivity {
            Positivity::Failed { witness } => assert_eq!(witness.reason, "CP check failed"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn adjoint_is_an_involution() {
        let sg = make_family(&FamilySpec::schur_line(3)).unwrap();
        let t = sg.map_at(&[0.7]).unwrap();
        assert_eq!(t.adjoint().adjoint(), t);
    }

    #[test]
    fn adjoint_is_trace_dual() {
        let mut rng = random::rng(11);
        let shape = AlgebraShape::new([(2, 0.3), (1, 2.0)]).unwrap();
        let m = random::complex_gaussian_matrix(&mut rng, shape.hs_dim());
        let t = Superoperator::new(shape.clone(), m).unwrap();
        let a = random::operator(&mut rng, &shape);
        let b = random::operator(&mut rng, &shape);
        let lhs = (&t.adjoint().apply(&a).unwrap().adjoint() * &b).trace_complex();
        let rhs = (&a.adjoint() * &t.apply(&b).unwrap()).trace_complex();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn heat_cycle_two_matches_spec_generator() {
        let sg = make_family(&FamilySpec::HeatCycle { n: 2 }).unwrap();
        let m = sg.generators()[0].matrix();
        assert_eq!(m[(0, 0)].re, -1.0);
        assert_eq!(m[(0, 1)].re, 1.0);
        let shape = sg.shape().clone();
        let x = Operator::diagonal(&shape, &[1.0, -1.0]).unwrap();
        for u in [0.3, 1.0, 2.5] {
            let y = evolve(&sg, &[u], &x).unwrap();
            let want = x.scale((-2.0 * u).exp());
            assert!((&y - &want).max_abs_entry() < 1e-13);
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let sg = make_family(&builtin_families()[7]).unwrap();
        let mut rng = random::rng(2);
        let x = random::operator(&mut rng, sg.shape());
        let y = evolve(&sg, &[0.0, 0.0, 0.0], &x).unwrap();
        assert!((&y - &x).max_abs_entry() < 1e-12);
        assert!(evolve(&sg, &[0.0, -1.0, 0.0], &x).is_err());
        assert!(evolve(&sg, &[0.0, 1.0], &x).is_err());
    }

    #[test]
    fn semigroup_law() {
        let mut rng = random::rng(9);
        for spec in builtin_families() {
            let sg = make_family(&spec).unwrap();
            let d = sg.d();
            let u: Vec<f64> = (0..d).map(|i| 0.3 + 0.2 * i as f64).collect();
            let v: Vec<f64> = (0..d).map(|i| 0.9 - 0.1 * i as f64).collect();
            let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let x = random::operator(&mut rng, sg.shape());
            let lhs = evolve(&sg, &uv, &x).unwrap();
            let rhs = evolve(&sg, &u, &evolve(&sg, &v, &x).unwrap()).unwrap();
            assert!((&lhs - &rhs).max_abs_entry() < 1e-9 * (1.0 + x.max_abs_entry()), "{}", spec.label());
        }
    }

    #[test]
    fn family_validation() {
        assert!(make_family(&FamilySpec::HeatCycle { n: 0 }).is_err());
        let not_cnd = vec![vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert!(matches!(
            make_family(&FamilySpec::Schur { q: not_cnd, weight: 1.0 }),
            Err(Error::InvalidFamily(_))
        ));
        let too_big = vec![vec![0.8, 0.5], vec![0.1, 0.1]];
        assert!(make_family(&FamilySpec::Substochastic { m: too_big }).is_err());
    }

    #[test]
    fn schur_family_is_cp_unital_tracial() {
        let sg = make_family(&FamilySpec::schur_line(4)).unwrap();
        for (_, cert) in &sg.ds_spotchecks {
            assert_eq!(cert.positivity, Positivity::CpChoiPassed);
            assert!(cert.subunital_slack < 1e-12 && cert.subtracial_slack < 1e-12);
        }
        let one = Operator::identity(sg.shape());
        let t = sg.map_at(&[1.3]).unwrap();
        assert!((&t.apply(&one).unwrap() - &one).max_abs_entry() < 1e-12);
    }

    #[test]
    fn schur_pair_commutes() {
        let sg = make_family(&builtin_families()[5]).unwrap();
        assert_eq!(sg.d(), 2);
        assert!(sg.commutation_residual < 1e-12);
    }

    #[test]
    fn noncommuting_generators_rejected() {
        let shape = AlgebraShape::atoms(3).unwrap();
        let a = Superoperator::from_atom_matrix(&shape, &[vec![-1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let b = Superoperator::from_atom_matrix(&shape, &[vec![0.0, 0.0, 0.0], vec![0.0, -1.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
        assert!(matches!(make_semigroup(vec![a, b], 2), Err(Error::NonCommuting { i: 0, j: 1, .. })));
    }

    #[test]
    fn non_ds_generator_fails_spotcheck() {
        let shape = AlgebraShape::atoms(2).unwrap();
        let grow = Superoperator::scaled_identity(&shape, 0.5);
        assert!(matches!(make_semigroup(vec![grow], 1), Err(Error::SpotcheckFailed { .. })));
    }

    #[test]
    fn trivial_family_is_identity() {
        let shape = AlgebraShape::new([(2, 1.0)]).unwrap();
        let sg = make_family(&FamilySpec::Trivial { shape: shape.clone(), d: 2 }).unwrap();
        assert_eq!(sg.map_at(&[3.0, 4.0]).unwrap(), Superoperator::identity(&shape));
    }

    #[test]
    fn tensor_generators_act_on_their_factor() {
        let sg = make_family(&FamilySpec::Tensor {
            factors: vec![FamilySpec::HeatCycle { n: 2 }, FamilySpec::schur_line(2)],
        })
        .unwrap();
        assert_eq!(sg.d(), 2);
        assert_eq!(sg.shape().num_blocks(), 2);
        assert_eq!(sg.shape().blocks()[0].dim, 2);
        // identity is fixed by both generators
        let one = Operator::identity(sg.shape());
        for l in sg.generators() {
            assert!(l.apply(&one).unwrap().max_abs_entry() < 1e-14);
        }
    }
}
