//! Generalized singular-value rearrangement μ_t(x), distribution functions
//! and Hardy–Littlewood submajorization.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, MERGE_REL_TOL};
use crate::error::{Error, Result};

/// Eigenvalues within this distance of λ do not count as exceeding λ.
pub const DISTRIBUTION_BOUNDARY_TOL: f64 = 1e-12;
/// Relative tolerance of the knot-wise submajorization check.
pub const HL_TOL: f64 = 1e-10;
/// Singular values at round-off level relative to ‖x‖_∞ are zero.
const ZERO_REL_TOL: f64 = 1e-14;

/// Non-increasing, right-continuous step function on (0, ∞) with finite
/// support, stored as `(right_endpoint, value)` knots.
///
/// Canonical form: endpoints strictly increasing, values strictly decreasing
/// and positive. The function vanishes after the last endpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct StepFunction {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for StepFunction {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        StepFunction::new(v)
    }
}

impl From<StepFunction> for Vec<(f64, f64)> {
    fn from(f: StepFunction) -> Self {
        f.knots
    }
}

impl StepFunction {
    /// Build from `(right_endpoint, value)` knots; rejects increasing values,
    /// negative values and non-increasing endpoints, then canonicalizes.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_end = 0.0;
        let mut prev_val = f64::INFINITY;
        let mut pieces = Vec::with_capacity(knots.len());
        for &(end, val) in &knots {
            if !(end.is_finite() && val.is_finite()) {
                return Err(Error::InvalidArgument("step function knots must be finite".into()));
            }
            if end <= prev_end {
                return Err(Error::InvalidArgument(format!(
                    "endpoints must be positive and strictly increasing (got {end} after {prev_end})"
                )));
            }
            if val < 0.0 {
                return Err(Error::InvalidArgument(format!("negative value {val}")));
            }
            if val > prev_val {
                return Err(Error::InvalidArgument(format!(
                    "values must be non-increasing ({val} after {prev_val})"
                )));
            }
            pieces.push((end - prev_end, val));
            prev_end = end;
            prev_val = val;
        }
        Ok(Self::from_sorted_pieces(pieces))
    }

    /// Zero function.
    pub fn zero() -> Self {
        StepFunction { knots: Vec::new() }
    }

    /// Characteristic function of [0, len).
    pub fn indicator(len: f64) -> Self {
        Self::from_pieces(vec![(len, 1.0)])
    }

    /// Decreasing rearrangement of a finite family of `(length, value)`
    /// pieces with nonnegative values.
    pub fn from_pieces(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|&(len, val)| len > 0.0 && val > 0.0);
        pieces.sort_by(|a, b| b.1.total_cmp(&a.1));
        Self::from_sorted_pieces(pieces)
    }

    fn from_sorted_pieces(pieces: Vec<(f64, f64)>) -> Self {
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        let mut end = 0.0;
        for (len, val) in pieces {
            if len <= 0.0 {
                continue;
            }
            end += len;
            if val <= 0.0 {
                break;
            }
            match knots.last_mut() {
                Some(last) if last.1 == val => last.0 = end,
                _ => knots.push((end, val)),
            }
        }
        StepFunction { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// `(interval length, value)` pairs.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.knots
            .iter()
            .map(|&(end, val)| {
                let p = (end - prev, val);
                prev = end;
                p
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.knots.is_empty()
    }

    /// Value at t ≥ 0 (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        self.knots
            .iter()
            .find(|&&(end, _)| t < end)
            .map_or(0.0, |&(_, v)| v)
    }

    /// lim_{t→0+} f(t), the sup norm.
    pub fn sup(&self) -> f64 {
        self.knots.first().map_or(0.0, |k| k.1)
    }

    pub fn support_end(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.0)
    }

    pub fn total_integral(&self) -> f64 {
        self.pieces().iter().map(|(l, v)| l * v).sum()
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        assert!(c >= 0.0, "step functions scale by nonnegative factors");
        Self::from_sorted_pieces(self.pieces().into_iter().map(|(l, v)| (l, c * v)).collect())
    }

    /// ∫_0^s f(t) dt.
    pub fn partial_integral(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::InvalidArgument(format!("partial integral needs s ≥ 0, got {s}")));
        }
        Ok(self.cumulative(s))
    }

    pub(crate) fn cumulative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &(end, val) in &self.knots {
            if s <= prev {
                break;
            }
            acc += (s.min(end) - prev) * val;
            prev = end;
        }
        acc
    }

    /// Right endpoints of all intervals.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.0)
    }
}

/// Anything with a decreasing rearrangement: operators and step functions.
pub trait Rearrangeable {
    fn mu(&self) -> StepFunction;

    /// `(measure, value)` pairs whose decreasing rearrangement is `mu`, in no
    /// particular order. Used by norms that do not need sorting.
    fn weighted_values(&self) -> Vec<(f64, f64)>;
}

impl Rearrangeable for StepFunction {
    fn mu(&self) -> StepFunction {
        self.clone()
    }

    fn weighted_values(&self) -> Vec<(f64, f64)> {
        self.pieces()
    }
}

impl Rearrangeable for Operator {
    fn mu(&self) -> StepFunction {
        mu(self)
    }

    fn weighted_values(&self) -> Vec<(f64, f64)> {
        self.weighted_singular_values()
    }
}

/// τ{|x| > λ}, with strict inequality.
pub fn distribution(x: &Operator, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "distribution needs λ ≥ 0, got {lambda}"
        )));
    }
    Ok(x.weighted_singular_values()
        .into_iter()
        .filter(|&(_, s)| s > lambda + DISTRIBUTION_BOUNDARY_TOL)
        .map(|(w, _)| w)
        .sum())
}

/// μ_t(x) = inf{λ > 0 : τ{|x| > λ} ≤ t}.
///
/// Singular values within the eigenvalue merge tolerance are grouped into a
/// single level, so μ of a projection is exactly an indicator.
pub fn mu(x: &Operator) -> StepFunction {
    let mut sv = x.weighted_singular_values();
    sv.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top = sv.first().map_or(0.0, |p| p.1);
    let merge = MERGE_REL_TOL * (1.0 + top);
    let zero = ZERO_REL_TOL * (1.0 + top);

    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let mut group: Vec<(f64, f64)> = Vec::new();
    let flush = |group: &mut Vec<(f64, f64)>, pieces: &mut Vec<(f64, f64)>| {
        if group.is_empty() {
            return;
        }
        let len: f64 = group.iter().map(|g| g.0).sum();
        let val = group.iter().map(|g| g.0 * g.1).sum::<f64>() / len;
        pieces.push((len, if val <= zero { 0.0 } else { val }));
        group.clear();
    };
    for (w, s) in sv {
        if let Some(&(_, last)) = group.last() {
            if last - s > merge {
                flush(&mut group, &mut pieces);
            }
        }
        group.push((w, s));
    }
    flush(&mut group, &mut pieces);
    StepFunction::from_pieces(pieces)
}

/// ∫_0^s μ_t(f) dt.
pub fn partial_integral(f: &StepFunction, s: f64) -> Result<f64> {
    f.partial_integral(s)
}

/// Hardy–Littlewood order: true iff ∫_0^s a ≤ ∫_0^s b for every s ≥ 0.
///
/// Both cumulative integrals are piecewise linear with breakpoints at the
/// knots, so checking s = 0 and every knot of either function decides the
/// inequality everywhere.
pub fn hl_leq(a: &StepFunction, b: &StepFunction) -> bool {
    let tol = HL_TOL * (1.0 + a.total_integral().max(b.total_integral()));
    std::iter::once(0.0)
        .chain(a.endpoints())
        .chain(b.endpoints())
        .all(|s| a.cumulative(s) <= b.cumulative(s) + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;

    #[test]
    fn canonical_form_merges_and_validates() {
        let f = StepFunction::new(vec![(1.0, 2.0), (2.0, 2.0), (3.0, 1.0), (4.0, 0.0)]).unwrap();
        assert_eq!(f.knots(), &[(2.0, 2.0), (3.0, 1.0)]);
        assert!(StepFunction::new(vec![(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(StepFunction::new(vec![(2.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(StepFunction::new(vec![(1.0, -1.0)]).is_err());
        assert!(StepFunction::new(vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn distribution_examples() {
        let s = AlgebraShape::atoms(3).unwrap();
        let x = Operator::diagonal(&s, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(distribution(&x, 1.5).unwrap(), 2.0);
        assert_eq!(distribution(&x, 3.0).unwrap(), 0.0);
        assert_eq!(distribution(&x, 0.0).unwrap(), 3.0);
        assert!(distribution(&x, -1.0).is_err());
    }

    #[test]
    fn mu_examples() {
        let s = AlgebraShape::atoms(3).unwrap();
        let x = Operator::diagonal(&s, &[3.0, 1.0, 2.0]).unwrap();
        let m = mu(&x);
        assert_eq!(m.knots().len(), 3);
        for (got, want) in m.knots().iter().zip([(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]) {
            assert!((got.0 - want.0).abs() < 1e-14 && (got.1 - want.1).abs() < 1e-14);
        }
        assert_eq!(m.eval(3.5), 0.0);

        let s = AlgebraShape::new([(1, 0.25)]).unwrap();
        let m = mu(&Operator::diagonal(&s, &[5.0]).unwrap());
        assert_eq!(m.knots().len(), 1);
        assert!((m.knots()[0].0 - 0.25).abs() < 1e-15 && (m.knots()[0].1 - 5.0).abs() < 1e-14);
    }

    #[test]
    fn partial_integral_examples() {
        let s = AlgebraShape::atoms(3).unwrap();
        let m = mu(&Operator::diagonal(&s, &[3.0, 1.0, 2.0]).unwrap());
        assert!((partial_integral(&m, 2.0).unwrap() - 5.0).abs() < 1e-13);
        assert_eq!(partial_integral(&m, 0.0).unwrap(), 0.0);
        assert!((partial_integral(&m, 100.0).unwrap() - 6.0).abs() < 1e-13);
        assert!(partial_integral(&m, -1.0).is_err());
    }

    #[test]
    fn hl_leq_examples() {
        let f = StepFunction::new(vec![(1.0, 3.0), (2.5, 1.0)]).unwrap();
        assert!(hl_leq(&f, &f));
        assert!(hl_leq(&StepFunction::zero(), &f));
        assert!(!hl_leq(&f, &StepFunction::zero()));
        // same total mass, flatter profile is dominated
        let flat = StepFunction::new(vec![(4.5, 1.0)]).unwrap();
        assert!(hl_leq(&flat, &f));
        assert!(!hl_leq(&f, &flat));
    }

    #[test]
    fn projection_mu_is_indicator() {
        use crate::random;
        let mut rng = random::rng(5);
        for _ in 0..20 {
            let s = random::shape(&mut rng, 3, 5);
            let e = random::projection(&mut rng, &s);
            let m = mu(&e);
            let te = e.trace();
            if te < 1e-9 {
                assert!(m.is_zero());
                continue;
            }
            assert_eq!(m.knots().len(), 1, "{:?}", m.knots());
            assert!((m.knots()[0].0 - te).abs() < 1e-9);
            assert!((m.knots()[0].1 - 1.0).abs() < 1e-12);
        }
    }
}
