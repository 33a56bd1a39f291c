//! Experiments that measure the quantitative statements about A_t: mean
//! convergence, rate and continuity bounds, the dyadic comparison, and the
//! maximal inequalities (with an empirical constant in place of the
//! non-constructive one).

use serde::{Deserialize, Serialize};

use crate::algebra::Operator;
use crate::averaging::{average_map_phi1, average_phi1};
use crate::dynamics::{verify_ds_plus, Semigroup, Superoperator, DS_TOL};
use crate::error::{Error, Result};
use crate::spaces::{norm_p, NormDescriptor};

/// Slack allowed on every checked inequality.
pub const BOUND_SLACK: f64 = 1e-9;
/// Largest commutative algebra the exhaustive projection search accepts.
pub const BRUTE_FORCE_MAX_ATOMS: usize = 12;
/// Stand-in for t → ∞ appended to the default maximal grid.
pub const LIMIT_T: f64 = 1e6;
/// Default maximal grid: 64 log-spaced points over [1e−3, 1e3].
pub const MAXIMAL_GRID_POINTS: usize = 64;

/// Convergence is exact in finite dimension: almost-uniform, bilateral
/// almost-uniform and norm convergence all coincide, so only norm decay is
/// measured.
pub const FINITE_DIMENSION_NOTE: &str =
    "finite dimension: a.u., b.a.u. and norm convergence coincide; only norm decay is measured";

/// Cap rayon's global pool at `NCERG_THREADS` when that variable is set.
/// Results never depend on the thread count.
pub fn configure_threads() {
    if let Some(n) = std::env::var("NCERG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub t_grid: Vec<f64>,
    /// ‖A_t(x) − x‖ along the grid.
    pub values: Vec<f64>,
    pub norm: NormDescriptor,
    /// Values non-increasing over the last half of the grid.
    pub monotone_tail: bool,
    /// values.last / values.first (0 when the first value vanishes).
    pub final_ratio: f64,
}

fn check_decreasing_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("t grid is empty".into()));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("t grid must be positive".into()));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("t grid must be strictly decreasing".into()));
    }
    Ok(())
}

pub fn mean_convergence_table(
    sg: &Semigroup,
    x: &Operator,
    norm: &NormDescriptor,
    t_grid: &[f64],
) -> Result<ConvergenceReport> {
    check_decreasing_grid(t_grid)?;
    norm.validate()?;
    let values = t_grid
        .iter()
        .map(|&t| norm.norm(&(&average_phi1(sg, x, t)? - x)))
        .collect::<Result<Vec<f64>>>()?;
    let half = values.len() / 2;
    let tail = &values[half..];
    let monotone_tail = tail
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    let first = values[0];
    let final_ratio = if first > 0.0 { values[values.len() - 1] / first } else { 0.0 };
    Ok(ConvergenceReport {
        t_grid: t_grid.to_vec(),
        values,
        norm: norm.clone(),
        monotone_tail,
        final_ratio,
    })
}

// ---------------------------------------------------------------------------
// bound checks

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub kind: String,
    /// The parameters of this row, e.g. `[t]` or `[s, t]`.
    pub params: Vec<f64>,
    pub lhs: f64,
    /// Bound including slack.
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub slack: f64,
    pub rows: Vec<BoundRow>,
    pub violations: usize,
    /// max(lhs − rhs); negative when every row holds.
    pub max_excess: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str, slack: f64) -> Self {
        BoundReport {
            name: name.into(),
            slack,
            rows: Vec::new(),
            violations: 0,
            max_excess: f64::NEG_INFINITY,
            passed: true,
            notes: Vec::new(),
        }
    }

    fn push(&mut self, kind: &str, params: Vec<f64>, lhs: f64, bound: f64) {
        let rhs = bound + self.slack;
        let passed = lhs <= rhs;
        self.max_excess = self.max_excess.max(lhs - rhs);
        if !passed {
            self.violations += 1;
            self.passed = false;
        }
        self.rows.push(BoundRow { kind: kind.into(), params, lhs, rhs, passed });
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// C(t₀, d) = 2 t₀^{-1} Σ_{k=1}^d binom(d, k).
pub fn rate_constant(t0: f64, d: usize) -> f64 {
    let s: f64 = (1..=d as u64).map(|k| binomial(d as u64, k)).sum();
    2.0 / t0 * s
}

/// 2 (t₀^d − (t₀ − v)^d) / t₀^d.
pub fn shift_coefficient(t0: f64, v: f64, d: usize) -> f64 {
    let di = d as i32;
    2.0 * (t0.powi(di) - (t0 - v).powi(di)) / t0.powi(di)
}

/// 2 (t^d − s^d) / t^d.
pub fn continuity_coefficient(s: f64, t: f64, d: usize) -> f64 {
    let di = d as i32;
    2.0 * (t.powi(di) - s.powi(di)) / t.powi(di)
}

/// Coefficient of ‖x‖_∞ in the dyadic comparison of A_t with A_{1/⌊1/t⌋}:
/// ⌊1/t⌋^d (⌊1/t⌋^{−d} − t^d) + |⌊1/t⌋^d − t^{−d}| t^d.
pub fn e8_coefficient(t: f64, d: usize) -> f64 {
    let k = floor_inv(t);
    let di = d as i32;
    let kd = k.powi(di);
    kd * (k.powi(-di) - t.powi(di)) + (kd - t.powi(-di)).abs() * t.powi(di)
}

fn floor_inv(t: f64) -> f64 {
    (1.0 / t * (1.0 + 1e-14)).floor()
}

/// With x = A_{t₀}(y): ‖A_t(x) − x‖_p ≤ t C(t₀, d) ‖y‖_p for 0 < t < t₀, and
/// ‖T_v(x) − x‖_p ≤ 2(t₀^d − (t₀ − v)^d)/t₀^d ‖y‖_p for v ∈ [0, t]^d with
/// max component v.
pub fn check_rate_l33(
    sg: &Semigroup,
    y: &Operator,
    t0: f64,
    p: f64,
    t_grid: &[f64],
    slack: f64,
) -> Result<BoundReport> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0 && t < t0)) {
        return Err(Error::InvalidArgument(format!("grid point {t} outside (0, {t0})")));
    }
    let d = sg.d();
    let c = rate_constant(t0, d);
    let x = average_phi1(sg, y, t0)?;
    let ny = norm_p(y, p)?;
    let mut rep = BoundReport::new("rate", slack);
    for &t in t_grid {
        let lhs = norm_p(&(&average_phi1(sg, &x, t)? - &x), p)?;
        rep.push("average", vec![t], lhs, t * c * ny);
        let diag = vec![t; d];
        let harmonic: Vec<f64> = (0..d).map(|i| t / (i + 1) as f64).collect();
        for v in [diag, harmonic] {
            let vmax = v.iter().copied().fold(0.0, f64::max);
            let lhs = norm_p(&(&sg.map_at(&v)?.apply(&x)? - &x), p)?;
            rep.push("shift", v, lhs, shift_coefficient(t0, vmax, d) * ny);
        }
    }
    rep.notes.push(format!("C(t0, d) = {c}"));
    Ok(rep)
}

/// ‖A_t(x) − A_s(x)‖_p ≤ 2 (t^d − s^d)/t^d ‖x‖_p for 0 < s < t.
pub fn check_continuity_l333(
    sg: &Semigroup,
    x: &Operator,
    p: f64,
    pairs: &[(f64, f64)],
    slack: f64,
) -> Result<BoundReport> {
    if let Some(&(s, t)) = pairs.iter().find(|&&(s, t)| !(s > 0.0 && s < t && t.is_finite())) {
        return Err(Error::InvalidArgument(format!("need 0 < s < t, got ({s}, {t})")));
    }
    let d = sg.d();
    let nx = norm_p(x, p)?;
    let mut rep = BoundReport::new("continuity", slack);
    for &(s, t) in pairs {
        let lhs = norm_p(&(&average_phi1(sg, x, t)? - &average_phi1(sg, x, s)?), p)?;
        rep.push("pair", vec![s, t], lhs, continuity_coefficient(s, t, d) * nx);
    }
    Ok(rep)
}

/// ‖A_t(x) − A_{1/⌊1/t⌋}(x)‖_∞ ≤ e8_coefficient(t, d) ‖x‖_∞ for t ∈ (0, 1).
///
/// The comparison regions are the cubes [0, t]^d and [0, 1/⌊1/t⌋]^d.
pub fn check_dyadic_e8(sg: &Semigroup, x: &Operator, t_grid: &[f64], slack: f64) -> Result<BoundReport> {
    if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidArgument(format!("dyadic check needs t in (0, 1), got {t}")));
    }
    let d = sg.d();
    let nx = x.norm_inf();
    let mut rep = BoundReport::new("dyadic", slack);
    let mut coefs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = floor_inv(t);
        let lhs = (&average_phi1(sg, x, t)? - &average_phi1(sg, x, 1.0 / k)?).norm_inf();
        let coef = e8_coefficient(t, d);
        coefs.push(coef);
        rep.push("dyadic", vec![t, k], lhs, coef * nx);
    }
    let non_increasing = coefs.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    rep.notes.push(format!(
        "coefficients {:?}; non-increasing along grid: {non_increasing}",
        coefs
    ));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// maximal inequalities

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalStrategy {
    /// Cut the mean S of the averages at the lowest level λ' with
    /// τ{S > λ'} inside the budget.
    Chebyshev,
    /// Peel the top eigenvector of the worst e·A·e until the target holds.
    GreedyPeel,
    /// Exhaustive search over subsets of atoms (commutative, ≤ 12 atoms).
    BruteForce,
}

impl MaximalStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MaximalStrategy::Chebyshev => "chebyshev",
            MaximalStrategy::GreedyPeel => "greedy_peel",
            MaximalStrategy::BruteForce => "brute_force",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximalReport {
    pub lambda: f64,
    pub trace_budget: f64,
    pub projection_found: bool,
    pub tau_e_perp: f64,
    /// sup over the grid of ‖e·A·e‖_∞.
    pub achieved_sup: f64,
    /// achieved_sup / λ.
    pub achieved_constant: f64,
    pub strategy: String,
    pub grid_points: usize,
    /// Upper bound on the sup between neighbouring grid points,
    /// max 2(1 − (s/t)^d)‖x‖_∞.
    pub grid_modulus: f64,
    #[serde(skip)]
    pub projection: Option<Operator>,
}

/// The default grid for sup_{t>0}: log-spaced over [1e−3, 1e3] plus t = 1e6.
pub fn default_maximal_grid() -> Vec<f64> {
    let n = MAXIMAL_GRID_POINTS;
    let mut g: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64))
        .collect();
    g.push(LIMIT_T);
    g
}

fn check_positive_input(x: &Operator, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    if !x.is_positive(1e-9 * (1.0 + x.norm_inf())) {
        return Err(Error::InvalidArgument("maximal inequalities need x ≥ 0".into()));
    }
    Ok(())
}

fn sup_compressed(e: &Operator, avgs: &[Operator]) -> f64 {
    avgs.iter()
        .map(|a| (&(e * a) * e).norm_inf())
        .fold(0.0, f64::max)
}

/// Smallest level λ' among {below spectrum} ∪ spectrum(S) with
/// τ{S > λ'} ≤ budget; returns χ_{(−∞, λ']}(S).
fn chebyshev_projection(s: &Operator, budget: f64) -> Result<Operator> {
    let sd = s.spectral_decompose(1e-8 * (1.0 + s.norm_inf()))?;
    let total: f64 = sd.traces.iter().sum();
    if total <= budget + 1e-12 {
        return Ok(Operator::zeros(s.shape()));
    }
    let mut tail = total;
    for (i, tr) in sd.traces.iter().enumerate() {
        tail -= tr;
        if tail <= budget + 1e-12 {
            let mut e = Operator::zeros(s.shape());
            for p in &sd.projections[..=i] {
                e = &e + p;
            }
            return Ok(e);
        }
    }
    Ok(Operator::identity(s.shape()))
}

fn greedy_peel(avgs: &[Operator], target: f64, budget: f64) -> (Operator, bool) {
    let shape = avgs[0].shape().clone();
    let mut e = Operator::identity(&shape);
    let mut spent = 0.0;
    loop {
        let (worst, val) = avgs
            .iter()
            .enumerate()
            .map(|(i, a)| (i, (&(&e * a) * &e).norm_inf()))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        if val <= target * (1.0 + 1e-12) {
            return (e, true);
        }
        let c = (&(&e * &avgs[worst]) * &e).real_part();
        // top eigenvector over all blocks
        let mut best: Option<(f64, usize, nalgebra::DVector<crate::C64>)> = None;
        for (k, m) in c.blocks().iter().enumerate() {
            let (vals, vecs) = crate::linalg::hermitian_eigen(m);
            if let Some(&top) = vals.last() {
                if best.as_ref().is_none_or(|b| top > b.0) {
                    best = Some((top, k, vecs.column(vals.len() - 1).into_owned()));
                }
            }
        }
        let Some((_, k, v)) = best else {
            return (e, false);
        };
        let w = shape.blocks()[k].weight;
        if spent + w > budget + 1e-12 {
            return (e, false);
        }
        spent += w;
        let mut blocks: Vec<crate::CMatrix> = e.blocks().to_vec();
        blocks[k] -= &v * v.adjoint();
        e = Operator::new(shape.clone(), blocks).expect("same shape");
    }
}

fn brute_force(avgs: &[Operator], budget: f64) -> Result<Operator> {
    let shape = avgs[0].shape().clone();
    if !shape.is_diagonal() || shape.num_blocks() > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::BruteForceTooLarge {
            max: BRUTE_FORCE_MAX_ATOMS,
            got: if shape.is_diagonal() { shape.num_blocks() } else { shape.total_dim().max(BRUTE_FORCE_MAX_ATOMS + 1) },
        });
    }
    let n = shape.num_blocks();
    let weights: Vec<f64> = shape.blocks().iter().map(|b| b.weight).collect();
    // on a commutative algebra ‖e a e‖_∞ = max over kept atoms of |a_i|
    let peaks: Vec<f64> = (0..n)
        .map(|i| avgs.iter().map(|a| a.blocks()[i][(0, 0)].norm()).fold(0.0, f64::max))
        .collect();
    let mut best: Option<(f64, f64, u32)> = None;
    for mask in 0u32..(1 << n) {
        let removed: f64 = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| weights[i]).sum();
        if removed > budget + 1e-12 {
            continue;
        }
        let sup = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| peaks[i]).fold(0.0, f64::max);
        let better = match best {
            None => true,
            Some((bs, br, _)) => sup < bs || (sup == bs && removed < br),
        };
        if better {
            best = Some((sup, removed, mask));
        }
    }
    let (_, _, mask) = best.expect("keeping every atom is always admissible");
    let diag: Vec<f64> = (0..n).map(|i| if mask & (1 << i) != 0 { 1.0 } else { 0.0 }).collect();
    Operator::diagonal(&shape, &diag)
}

fn run_strategy(
    avgs: &[Operator],
    x: &Operator,
    lambda: f64,
    budget: f64,
    strategy: MaximalStrategy,
    d: usize,
    grid: &[f64],
) -> Result<MaximalReport> {
    let (e, found) = match strategy {
        MaximalStrategy::Chebyshev => {
            let mut s = Operator::zeros(x.shape());
            for a in avgs {
                s = &s + a;
            }
            let s = s.scale(1.0 / avgs.len() as f64).real_part();
            (chebyshev_projection(&s, budget)?, true)
        }
        MaximalStrategy::GreedyPeel => greedy_peel(avgs, lambda, budget),
        MaximalStrategy::BruteForce => (brute_force(avgs, budget)?, true),
    };
    let tau_e_perp = e.complement().trace();
    let achieved_sup = sup_compressed(&e, avgs);
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let grid_modulus = sorted
        .windows(2)
        .map(|w| 2.0 * (1.0 - (w[0] / w[1]).powi(d as i32)) * x.norm_inf())
        .fold(0.0, f64::max);
    Ok(MaximalReport {
        lambda,
        trace_budget: budget,
        projection_found: found && tau_e_perp <= budget + 1e-12,
        tau_e_perp,
        achieved_sup,
        achieved_constant: achieved_sup / lambda,
        strategy: strategy.name().into(),
        grid_points: avgs.len(),
        grid_modulus,
        projection: Some(e),
    })
}

/// Look for e with τ(e^⊥) ≤ 2‖x‖₁/λ keeping sup_t ‖e A_t(x) e‖_∞ small; the
/// sup runs over `t_grid`.
pub fn maximal_projection_search(
    sg: &Semigroup,
    x: &Operator,
    lambda: f64,
    t_grid: &[f64],
    strategy: MaximalStrategy,
) -> Result<MaximalReport> {
    check_positive_input(x, lambda)?;
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument("t grid must be nonempty and positive".into()));
    }
    let avgs = t_grid
        .iter()
        .map(|&t| average_map_phi1(sg, t)?.apply(x).map(|a| a.real_part()))
        .collect::<Result<Vec<_>>>()?;
    let budget = 2.0 * norm_p(x, 1.0)? / lambda;
    run_strategy(&avgs, x, lambda, budget, strategy, sg.d(), t_grid)
}

/// Discrete maximal inequality: e with τ(e^⊥) ≤ ‖x‖₁/λ and
/// sup_{n ≤ N} ‖e M_n(x) e‖_∞ ≤ λ where M_n = (1/n)Σ_{k<n} T^k.
/// Exhaustive on small commutative algebras, Chebyshev otherwise.
pub fn yeadon_discrete_check(t: &Superoperator, x: &Operator, lambda: f64, n_max: usize) -> Result<MaximalReport> {
    check_positive_input(x, lambda)?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("need N ≥ 1".into()));
    }
    if !verify_ds_plus(t, DS_TOL).verdict {
        return Err(Error::InvalidArgument("map is not certified DS+".into()));
    }
    let mut avgs = Vec::with_capacity(n_max);
    let mut term = x.clone();
    let mut sum = x.clone();
    avgs.push(x.clone());
    for n in 2..=n_max {
        term = t.apply(&term)?;
        sum = &sum + &term;
        avgs.push(sum.scale(1.0 / n as f64).real_part());
    }
    let budget = norm_p(x, 1.0)? / lambda;
    let shape = x.shape();
    let strategy = if shape.is_diagonal() && shape.num_blocks() <= BRUTE_FORCE_MAX_ATOMS {
        MaximalStrategy::BruteForce
    } else {
        MaximalStrategy::Chebyshev
    };
    let mut rep = run_strategy(&avgs, x, lambda, budget, strategy, 1, &[])?;
    rep.grid_modulus = 0.0;
    Ok(rep)
}

/// Empirical ratios ‖x‖_{M_φ}/‖x‖₁ over a sample, for φ with φ(0⁺) > 0 and
/// φ(∞) < ∞ where the two norms are equivalent without a stated constant.
pub fn marcinkiewicz_l1_ratio_range(
    phi: &crate::spaces::ConcavePhi,
    samples: &[Operator],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for x in samples {
        let l1 = norm_p(x, 1.0)?;
        if l1 == 0.0 {
            continue;
        }
        let r = crate::spaces::marcinkiewicz_norm(x, phi) / l1;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
