//! Local ergodic averages A_t(x) = t^{-d} ∫_{[0,t]^d} T_u(x) du.
//!
//! Two independent routes: tensor Gauss–Legendre quadrature of the orbit, and
//! the closed form A_t = Π_i φ₁(t L_i), valid because the generators commute.

use serde::{Deserialize, Serialize};

use crate::algebra::Operator;
use crate::dynamics::{Semigroup, Superoperator};
use crate::error::{Error, Result};
use crate::linalg;


/// Gauss–Legendre points per axis unless stated otherwise.
pub const DEFAULT_ORDER: usize = 12;
/// The error estimate compares against this many extra points per axis.
pub const ERROR_ESTIMATE_EXTRA: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum AveragingMethod {
    #[serde(rename = "quad")]
    Quadrature {
        #[serde(default = "default_order")]
        order: usize,
    },
    #[serde(rename = "phi1")]
    #[default]
    Phi1Exact,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

/// How the d-dimensional quadrature is organised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMode {
    /// Π_i of one-dimensional rules, using exp(Σ u_i L_i) = Π exp(u_i L_i).
    #[default]
    Factorized,
    /// Every node of the d-dimensional grid, exp(Σ u_i L_i) evaluated directly.
    FullGrid,
}

#[derive(Debug, Clone)]
pub struct QuadratureAverage {
    pub value: Operator,
    /// ‖A_t^{(order)} − A_t^{(order+4)}‖_∞.
    pub error_estimate: f64,
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("averaging needs t > 0, got {t}")))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order >= 2 && order.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "quadrature order must be an even integer ≥ 2, got {order}"
        )))
    }
}

/// (1/t) ∫_0^t exp(s L_i) ds as a map, by Gauss–Legendre.
fn axis_quadrature(sg: &Semigroup, axis: usize, t: f64, order: usize) -> Superoperator {
    let (nodes, weights) = linalg::gauss_legendre_on(order, t);
    let shape = sg.shape();
    let mut acc = Superoperator::zero(shape);
    for (s, w) in nodes.iter().zip(&weights) {
        acc = acc.add(&sg.axis_map(axis, *s).scale(w / t)).expect("same shape");
    }
    acc
}

/// φ₁(t L_i) = (1/t) ∫_0^t exp(s L_i) ds.
fn axis_phi1(sg: &Semigroup, axis: usize, t: f64) -> Superoperator {
    let l = &sg.generators()[axis];
    Superoperator::new(l.shape().clone(), linalg::phi1(&l.matrix().scale(t))).expect("same shape")
}

fn compose_all(sg: &Semigroup, maps: Vec<Superoperator>) -> Superoperator {
    maps.into_iter()
        .fold(Superoperator::identity(sg.shape()), |acc, m| acc.compose(&m).expect("same shape"))
}

/// A_t as a map, in closed form.
pub fn average_map_phi1(sg: &Semigroup, t: f64) -> Result<Superoperator> {
    check_t(t)?;
    Ok(compose_all(sg, (0..sg.d()).map(|i| axis_phi1(sg, i, t)).collect()))
}

/// A_t as a map, by factorized tensor quadrature.
pub fn average_map_quadrature(sg: &Semigroup, t: f64, order: usize) -> Result<Superoperator> {
    check_t(t)?;
    check_order(order)?;
    Ok(compose_all(sg, (0..sg.d()).map(|i| axis_quadrature(sg, i, t, order)).collect()))
}

pub fn average_map(sg: &Semigroup, t: f64, method: AveragingMethod) -> Result<Superoperator> {
    match method {
        AveragingMethod::Quadrature { order } => average_map_quadrature(sg, t, order),
        AveragingMethod::Phi1Exact => average_map_phi1(sg, t),
    }
}

pub fn average_phi1(sg: &Semigroup, x: &Operator, t: f64) -> Result<Operator> {
    average_map_phi1(sg, t)?.apply(x)
}

fn full_grid(sg: &Semigroup, x: &Operator, t: f64, order: usize) -> Result<Operator> {
    let (nodes, weights) = linalg::gauss_legendre_on(order, t);
    let d = sg.d();
    let vol = t.powi(d as i32);
    let mut acc = Operator::zeros(sg.shape());
    let mut idx = vec![0usize; d];
    loop {
        let u: Vec<f64> = idx.iter().map(|&j| nodes[j]).collect();
        let w: f64 = idx.iter().map(|&j| weights[j]).product();
        acc = &acc + &sg.map_at(&u)?.apply(x)?.scale(w / vol);
        // odometer, last axis fastest
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(acc);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn average_quadrature_with(
    sg: &Semigroup,
    x: &Operator,
    t: f64,
    order: usize,
    mode: QuadratureMode,
) -> Result<QuadratureAverage> {
    check_t(t)?;
    check_order(order)?;
    let eval = |o: usize| -> Result<Operator> {
        match mode {
            QuadratureMode::Factorized => average_map_quadrature(sg, t, o)?.apply(x),
            QuadratureMode::FullGrid => full_grid(sg, x, t, o),
        }
    };
    let value = eval(order)?;
    let finer = eval(order + ERROR_ESTIMATE_EXTRA)?;
    let error_estimate = (&value - &finer).norm_inf();
    Ok(QuadratureAverage { value, error_estimate })
}

pub fn average_quadrature(sg: &Semigroup, x: &Operator, t: f64, order: usize) -> Result<QuadratureAverage> {
    average_quadrature_with(sg, x, t, order, QuadratureMode::Factorized)
}

pub fn average(sg: &Semigroup, x: &Operator, t: f64, method: AveragingMethod) -> Result<Operator> {
    match method {
        AveragingMethod::Quadrature { order } => Ok(average_quadrature(sg, x, t, order)?.value),
        AveragingMethod::Phi1Exact => average_phi1(sg, x, t),
    }
}

/// (1/n) Σ_{k<n} T^k as a map.
pub fn discrete_average_map(t: &Superoperator, n: usize) -> Result<Superoperator> {
    if n < 1 {
        return Err(Error::InvalidArgument("discrete average needs n ≥ 1".into()));
    }
    let mut power = Superoperator::identity(t.shape());
    let mut acc = Superoperator::zero(t.shape());
    for _ in 0..n {
        acc = acc.add(&power)?;
        power = t.compose(&power)?;
    }
    Ok(acc.scale(1.0 / n as f64))
}

/// (1/n) Σ_{k=0}^{n−1} T^k(x).
pub fn discrete_average(t: &Superoperator, x: &Operator, n: usize) -> Result<Operator> {
    if n < 1 {
        return Err(Error::InvalidArgument("discrete average needs n ≥ 1".into()));
    }
    let mut term = x.clone();
    let mut acc = x.clone();
    for _ in 1..n {
        term = t.apply(&term)?;
        acc = &acc + &term;
    }
    Ok(acc.scale(1.0 / n as f64))
}

/// A_{n/m}(x) rebuilt from y_m = ∫_{[0,1]^d} T_{v/m}(x) dv and the discrete
/// averages of the axis steps S_i = T_{e_i/m}:
/// `n^{-d} Σ_{i_1..i_d < n} S_1^{i_1} ⋯ S_d^{i_d}(y_m)`.
pub fn product_average_e5(sg: &Semigroup, x: &Operator, n: usize, m: usize) -> Result<Operator> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidArgument(format!("need n, m ≥ 1, got n = {n}, m = {m}")));
    }
    let step = 1.0 / m as f64;
    // ∫_{[0,1]^d} T_{v/m} dv = A_{1/m}
    let mut y = average_quadrature(sg, x, step, DEFAULT_ORDER)?.value;
    for axis in 0..sg.d() {
        let s = sg.axis_map(axis, step);
        y = discrete_average(&s, &y, n)?;
    }
    Ok(y)
}

/// ‖A‖ bound helper: max |entry| of the difference of two maps.
pub fn map_distance(a: &Superoperator, b: &Superoperator) -> f64 {
    linalg::max_abs(&(a.matrix() - b.matrix()))
}

/// Fixed points: L_i(x) = 0 for every generator.
pub fn is_fixed_point(sg: &Semigroup, x: &Operator, tol: f64) -> Result<bool> {
    for l in sg.generators() {
        if l.apply(x)?.max_abs_entry() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::dynamics::{builtin_families, cyclic_shift, make_family, FamilySpec};
    use crate::random;

    /// (1/t)∫_0^t e^{−2s} ds.
    fn heat2_factor(t: f64) -> f64 {
        (1.0 - (-2.0 * t).exp()) / (2.0 * t)
    }

    #[test]
    fn trivial_semigroup_average_is_identity() {
        let shape = AlgebraShape::new([(2, 1.0)]).unwrap();
        let sg = make_family(&FamilySpec::Trivial { shape: shape.clone(), d: 2 }).unwrap();
        let mut rng = random::rng(1);
        let x = random::operator(&mut rng, &shape);
        for t in [0.1, 1.0, 7.0] {
            let q = average_quadrature(&sg, &x, t, 12).unwrap();
            assert!((&q.value - &x).max_abs_entry() < 1e-13);
            assert!((&average_phi1(&sg, &x, t).unwrap() - &x).max_abs_entry() < 1e-14);
        }
    }

    #[test]
    fn heat2_closed_form() {
        let sg = make_family(&FamilySpec::HeatCycle { n: 2 }).unwrap();
        let x = Operator::diagonal(sg.shape(), &[1.0, -1.0]).unwrap();
        let want = heat2_factor(1.0);
        assert!((want - 0.4323323584).abs() < 1e-10);
        let q = average_quadrature(&sg, &x, 1.0, 12).unwrap();
        let p = average_phi1(&sg, &x, 1.0).unwrap();
        for y in [&q.value, &p] {
            let v = y.diagonal_values();
            assert!((v[0] - want).abs() < 1e-13 && (v[1] + want).abs() < 1e-13);
        }
        assert!(q.error_estimate < 1e-13);
    }

    #[test]
    fn full_grid_matches_factorized() {
        let sg = make_family(&builtin_families()[6]).unwrap();
        let mut rng = random::rng(4);
        let x = random::operator(&mut rng, sg.shape());
        let a = average_quadrature_with(&sg, &x, 0.7, 8, QuadratureMode::Factorized).unwrap();
        let b = average_quadrature_with(&sg, &x, 0.7, 8, QuadratureMode::FullGrid).unwrap();
        assert!((&a.value - &b.value).max_abs_entry() < 1e-12);
    }

    #[test]
    fn argument_validation() {
        let sg = make_family(&FamilySpec::HeatCycle { n: 2 }).unwrap();
        let x = Operator::identity(sg.shape());
        assert!(average_phi1(&sg, &x, 0.0).is_err());
        assert!(average_quadrature(&sg, &x, -1.0, 12).is_err());
        assert!(average_quadrature(&sg, &x, 1.0, 0).is_err());
        assert!(average_quadrature(&sg, &x, 1.0, 7).is_err());
        assert!(discrete_average(&cyclic_shift(2).unwrap(), &x, 0).is_err());
        assert!(product_average_e5(&sg, &x, 0, 1).is_err());
    }

    #[test]
    fn discrete_average_examples() {
        let t = cyclic_shift(4).unwrap();
        let x = Operator::diagonal(t.shape(), &[4.0, 0.0, 0.0, 0.0]).unwrap();
        let y = discrete_average(&t, &x, 4).unwrap();
        for v in y.diagonal_values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert_eq!(discrete_average(&t, &x, 1).unwrap(), x);
        let id = Superoperator::identity(t.shape());
        assert!((&discrete_average(&id, &x, 7).unwrap() - &x).max_abs_entry() < 1e-14);
        let map = discrete_average_map(&t, 3).unwrap();
        assert!((&map.apply(&x).unwrap() - &discrete_average(&t, &x, 3).unwrap()).max_abs_entry() < 1e-14);
    }

    #[test]
    fn e5_single_term_is_a1() {
        let sg = make_family(&FamilySpec::HeatCycle { n: 4 }).unwrap();
        let mut rng = random::rng(8);
        let x = random::operator(&mut rng, sg.shape());
        let y = product_average_e5(&sg, &x, 1, 1).unwrap();
        assert!((&y - &average_phi1(&sg, &x, 1.0).unwrap()).max_abs_entry() < 1e-12);
        let y = product_average_e5(&sg, &x, 3, 2).unwrap();
        assert!((&y - &average_phi1(&sg, &x, 1.5).unwrap()).max_abs_entry() < 1e-10);
    }

    #[test]
    fn fixed_points_are_preserved() {
        let sg = make_family(&FamilySpec::schur_line(3)).unwrap();
        // diagonal operators are fixed by a zero-diagonal Schur multiplier
        let x = Operator::diagonal(sg.shape(), &[1.0, -2.0, 0.5]).unwrap();
        assert!(is_fixed_point(&sg, &x, 1e-14).unwrap());
        for t in [0.2, 3.0] {
            assert!((&average_phi1(&sg, &x, t).unwrap() - &x).max_abs_entry() < 1e-13);
        }
    }
}
