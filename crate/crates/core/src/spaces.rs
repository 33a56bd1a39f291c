//! Fully symmetric norms: L^p, L¹+L^∞, L¹∩L^∞, Orlicz (Luxemburg), Lorentz and
//! Marcinkiewicz, plus the structural predicates of each space.
//!
//! Every norm only depends on the decreasing rearrangement, so all of them
//! accept anything [`Rearrangeable`]: operators and step functions alike.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rearrangement::{Rearrangeable, StepFunction};

/// Relative tolerance of the Luxemburg bisection.
pub const LUXEMBURG_REL_WIDTH: f64 = 1e-13;
/// Interval tolerance of the golden-section probe in the Marcinkiewicz sup.
pub const GOLDEN_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// exponent helper

/// Serialize p as a number, or the string "inf" for p = ∞.
pub mod exponent {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid exponent {s:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Orlicz functions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrliczSpec {
    Power {
        p: f64,
    },
    ExpMinusOne,
    /// Convex piecewise-linear Φ through (0, 0) and the given knots,
    /// extended with the last slope.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        delta2_at_zero: bool,
        delta2_at_infinity: bool,
    },
}

/// A validated Orlicz function Φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OrliczSpec", into = "OrliczSpec")]
pub struct OrliczFunction {
    spec: OrliczSpec,
}

impl TryFrom<OrliczSpec> for OrliczFunction {
    type Error = Error;
    fn try_from(spec: OrliczSpec) -> Result<Self> {
        OrliczFunction::new(spec)
    }
}

impl From<OrliczFunction> for OrliczSpec {
    fn from(f: OrliczFunction) -> Self {
        f.spec
    }
}

impl OrliczFunction {
    pub fn new(spec: OrliczSpec) -> Result<Self> {
        match &spec {
            OrliczSpec::Power { p } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidOrlicz(format!("power exponent must be ≥ 1, got {p}")));
                }
            }
            OrliczSpec::ExpMinusOne => {}
            OrliczSpec::PiecewiseLinear { knots, .. } => {
                if knots.is_empty() {
                    return Err(Error::InvalidOrlicz("piecewise-linear Φ needs a knot".into()));
                }
                let mut prev = (0.0, 0.0);
                for &(u, v) in knots {
                    if !(u.is_finite() && v.is_finite()) || u <= prev.0 {
                        return Err(Error::InvalidOrlicz(format!(
                            "knot abscissae must increase from 0 (got {u} after {})",
                            prev.0
                        )));
                    }
                    prev = (u, v);
                }
            }
        }
        let f = OrliczFunction { spec };
        f.validate_shape()?;
        Ok(f)
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(OrliczSpec::Power { p })
    }

    pub fn exp_minus_one() -> Self {
        Self::new(OrliczSpec::ExpMinusOne).expect("built-in Orlicz function")
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>, delta2_at_zero: bool, delta2_at_infinity: bool) -> Result<Self> {
        Self::new(OrliczSpec::PiecewiseLinear { knots, delta2_at_zero, delta2_at_infinity })
    }

    pub fn spec(&self) -> &OrliczSpec {
        &self.spec
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match &self.spec {
            OrliczSpec::Power { p } => u.powf(*p),
            OrliczSpec::ExpMinusOne => u.exp_m1(),
            OrliczSpec::PiecewiseLinear { knots, .. } => {
                let mut prev = (0.0, 0.0);
                let mut slope = 0.0;
                for &(ku, kv) in knots {
                    slope = (kv - prev.1) / (ku - prev.0);
                    if u <= ku {
                        return prev.1 + slope * (u - prev.0);
                    }
                    prev = (ku, kv);
                }
                prev.1 + slope * (u - prev.0)
            }
        }
    }

    pub fn delta2_at_zero(&self) -> bool {
        match &self.spec {
            OrliczSpec::Power { .. } | OrliczSpec::ExpMinusOne => true,
            OrliczSpec::PiecewiseLinear { delta2_at_zero, .. } => *delta2_at_zero,
        }
    }

    pub fn delta2_at_infinity(&self) -> bool {
        match &self.spec {
            OrliczSpec::Power { .. } => true,
            OrliczSpec::ExpMinusOne => false,
            OrliczSpec::PiecewiseLinear { delta2_at_infinity, .. } => *delta2_at_infinity,
        }
    }

    /// Φ(0) = 0, Φ > 0 on (0, ∞), convex on a 256-point log grid over
    /// [1e−6, 1e6] (points where Φ overflows are skipped).
    fn validate_shape(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidOrlicz("Φ(0) must be 0".into()));
        }
        let grid = log_grid(1e-6, 1e6, 256);
        let vals: Vec<f64> = grid.iter().map(|&u| self.eval(u)).collect();
        for (u, v) in grid.iter().zip(&vals) {
            if v.is_finite() && *v <= 0.0 {
                return Err(Error::InvalidOrlicz(format!("Φ({u}) = {v} is not positive")));
            }
        }
        let pts: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
            .chain(grid.iter().copied().zip(vals.iter().copied()))
            .filter(|p| p.1.is_finite())
            .collect();
        for w in pts.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            if s2 < s1 - 1e-9 * (1.0 + s1.abs()) {
                return Err(Error::InvalidOrlicz(format!("Φ is not convex near u = {}", w[1].0)));
            }
        }
        Ok(())
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// concave functions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// t^α, 0 < α ≤ 1.
    Power { alpha: f64 },
    /// min(t, c).
    Min { c: f64 },
    /// log(1 + t).
    Log1p,
    /// Concave piecewise-linear φ: the value `zero_plus` at 0⁺, linear
    /// interpolation through the knots, then slope `final_slope`.
    PiecewiseLinear {
        zero_plus: f64,
        knots: Vec<(f64, f64)>,
        final_slope: f64,
    },
}

/// A validated concave φ with φ(0) = 0 and φ > 0 on (0, ∞).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiSpec", into = "PhiSpec")]
pub struct ConcavePhi {
    spec: PhiSpec,
}

impl TryFrom<PhiSpec> for ConcavePhi {
    type Error = Error;
    fn try_from(spec: PhiSpec) -> Result<Self> {
        ConcavePhi::new(spec)
    }
}

impl From<ConcavePhi> for PhiSpec {
    fn from(f: ConcavePhi) -> Self {
        f.spec
    }
}

impl ConcavePhi {
    pub fn new(spec: PhiSpec) -> Result<Self> {
        match &spec {
            PhiSpec::Power { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidPhi(format!("t^α needs 0 < α ≤ 1, got {alpha}")));
                }
            }
            PhiSpec::Min { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidPhi(format!("min(t, c) needs c > 0, got {c}")));
                }
            }
            PhiSpec::Log1p => {}
            PhiSpec::PiecewiseLinear { zero_plus, knots, final_slope } => {
                if !(*zero_plus >= 0.0 && zero_plus.is_finite()) {
                    return Err(Error::InvalidPhi("φ(0⁺) must be finite and ≥ 0".into()));
                }
                if knots.is_empty() {
                    return Err(Error::InvalidPhi("piecewise-linear φ needs a knot".into()));
                }
                let mut prev = (0.0, *zero_plus);
                let mut prev_slope = f64::INFINITY;
                for &(t, v) in knots {
                    if !(t.is_finite() && v.is_finite()) || t <= prev.0 {
                        return Err(Error::InvalidPhi(format!(
                            "knot abscissae must increase from 0 (got {t} after {})",
                            prev.0
                        )));
                    }
                    let slope = (v - prev.1) / (t - prev.0);
                    if slope > prev_slope + 1e-12 * (1.0 + prev_slope.abs()) {
                        return Err(Error::InvalidPhi(format!("φ is not concave at t = {}", prev.0)));
                    }
                    prev_slope = slope;
                    prev = (t, v);
                }
                if !(final_slope.is_finite() && *final_slope >= 0.0) || *final_slope > prev_slope + 1e-12 {
                    return Err(Error::InvalidPhi(format!(
                        "final slope {final_slope} must lie in [0, {prev_slope}]"
                    )));
                }
                let first = knots[0];
                if *zero_plus == 0.0 && first.1 <= 0.0 {
                    return Err(Error::InvalidPhi("φ(t) must be positive for t > 0".into()));
                }
            }
        }
        Ok(ConcavePhi { spec })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(PhiSpec::Power { alpha })
    }

    pub fn sqrt() -> Self {
        Self::power(0.5).expect("built-in φ")
    }

    pub fn identity() -> Self {
        Self::power(1.0).expect("built-in φ")
    }

    pub fn min(c: f64) -> Result<Self> {
        Self::new(PhiSpec::Min { c })
    }

    pub fn log1p() -> Self {
        Self::new(PhiSpec::Log1p).expect("built-in φ")
    }

    pub fn piecewise_linear(zero_plus: f64, knots: Vec<(f64, f64)>, final_slope: f64) -> Result<Self> {
        Self::new(PhiSpec::PiecewiseLinear { zero_plus, knots, final_slope })
    }

    pub fn spec(&self) -> &PhiSpec {
        &self.spec
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.spec {
            PhiSpec::Power { alpha } => {
                if *alpha == 1.0 {
                    t
                } else {
                    t.powf(*alpha)
                }
            }
            PhiSpec::Min { c } => t.min(*c),
            PhiSpec::Log1p => t.ln_1p(),
            PhiSpec::PiecewiseLinear { zero_plus, knots, final_slope } => {
                let mut prev = (0.0, *zero_plus);
                for &(kt, kv) in knots {
                    if t <= kt {
                        return prev.1 + (kv - prev.1) / (kt - prev.0) * (t - prev.0);
                    }
                    prev = (kt, kv);
                }
                prev.1 + final_slope * (t - prev.0)
            }
        }
    }

    /// lim_{t→0+} φ(t).
    pub fn phi_at_zero_plus(&self) -> f64 {
        match &self.spec {
            PhiSpec::PiecewiseLinear { zero_plus, .. } => *zero_plus,
            _ => 0.0,
        }
    }

    /// lim_{t→∞} φ(t); `None` for +∞.
    pub fn phi_at_infinity(&self) -> Option<f64> {
        match &self.spec {
            PhiSpec::Power { .. } | PhiSpec::Log1p => None,
            PhiSpec::Min { c } => Some(*c),
            PhiSpec::PiecewiseLinear { knots, final_slope, .. } => {
                if *final_slope > 0.0 {
                    None
                } else {
                    knots.last().map(|k| k.1)
                }
            }
        }
    }

    /// lim_{t→∞} φ(t)/t.
    pub fn slope_at_infinity(&self) -> f64 {
        match &self.spec {
            PhiSpec::Power { alpha } => {
                if *alpha == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PhiSpec::Min { .. } | PhiSpec::Log1p => 0.0,
            PhiSpec::PiecewiseLinear { final_slope, .. } => *final_slope,
        }
    }

    /// lim_{t→0+} φ(t)/t; `None` for +∞.
    pub fn slope_at_zero(&self) -> Option<f64> {
        match &self.spec {
            PhiSpec::Power { alpha } => (*alpha == 1.0).then_some(1.0),
            PhiSpec::Min { .. } | PhiSpec::Log1p => Some(1.0),
            PhiSpec::PiecewiseLinear { zero_plus, knots, .. } => {
                if *zero_plus > 0.0 {
                    None
                } else {
                    Some(knots[0].1 / knots[0].0)
                }
            }
        }
    }

    /// Breakpoints where φ fails to be smooth.
    fn kinks(&self) -> Vec<f64> {
        match &self.spec {
            PhiSpec::Min { c } => vec![*c],
            PhiSpec::PiecewiseLinear { knots, .. } => knots.iter().map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }

    /// Smooth and strictly concave: interior maxima of K/φ need probing.
    fn is_curved(&self) -> bool {
        match &self.spec {
            PhiSpec::Power { alpha } => *alpha < 1.0,
            PhiSpec::Log1p => true,
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// descriptors and traits

/// Symbolic description of a fully symmetric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum NormDescriptor {
    #[serde(rename = "lp")]
    Lp {
        #[serde(with = "exponent")]
        p: f64,
    },
    #[serde(rename = "l1+linf")]
    L1PlusLinf,
    #[serde(rename = "l1&linf")]
    L1CapLinf,
    #[serde(rename = "orlicz")]
    Orlicz { phi: OrliczFunction },
    #[serde(rename = "lorentz")]
    Lorentz { phi: ConcavePhi },
    #[serde(rename = "marcinkiewicz")]
    Marcinkiewicz { phi: ConcavePhi },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTraits {
    pub order_continuous: bool,
    /// 1 ∈ E when τ(1) = ∞.
    pub contains_unit_when_trace_infinite: bool,
    /// E ⊂ R_τ; equivalent to 1 ∉ E.
    pub subset_of_r_tau: bool,
}

impl SpaceTraits {
    fn new(order_continuous: bool, contains_unit: bool) -> Self {
        SpaceTraits {
            order_continuous,
            contains_unit_when_trace_infinite: contains_unit,
            subset_of_r_tau: !contains_unit,
        }
    }
}

impl NormDescriptor {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(NormDescriptor::Lp { p })
    }

    /// Re-check invariants of a descriptor built by hand.
    pub fn validate(&self) -> Result<()> {
        match self {
            NormDescriptor::Lp { p } => check_exponent(*p),
            NormDescriptor::Orlicz { phi } => OrliczFunction::new(phi.spec.clone()).map(|_| ()),
            NormDescriptor::Lorentz { phi } | NormDescriptor::Marcinkiewicz { phi } => {
                ConcavePhi::new(phi.spec.clone()).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable label, also used as a CSV column header.
    pub fn label(&self) -> String {
        match self {
            NormDescriptor::Lp { p } if p.is_infinite() => "Linf".into(),
            NormDescriptor::Lp { p } => format!("L{p}"),
            NormDescriptor::L1PlusLinf => "L1+Linf".into(),
            NormDescriptor::L1CapLinf => "L1&Linf".into(),
            NormDescriptor::Orlicz { phi } => format!("Orlicz({})", orlicz_label(phi)),
            NormDescriptor::Lorentz { phi } => format!("Lorentz({})", phi_label(phi)),
            NormDescriptor::Marcinkiewicz { phi } => format!("Marcinkiewicz({})", phi_label(phi)),
        }
    }

    pub fn norm<X: Rearrangeable + ?Sized>(&self, x: &X) -> Result<f64> {
        match self {
            NormDescriptor::Lp { p } => norm_p(x, *p),
            NormDescriptor::L1PlusLinf => Ok(norm_l1_plus_linf(x)),
            NormDescriptor::L1CapLinf => Ok(norm_l1_cap_linf(x)),
            NormDescriptor::Orlicz { phi } => luxemburg_norm(x, phi),
            NormDescriptor::Lorentz { phi } => Ok(lorentz_norm(x, phi)),
            NormDescriptor::Marcinkiewicz { phi } => Ok(marcinkiewicz_norm(x, phi)),
        }
    }
}

fn orlicz_label(f: &OrliczFunction) -> String {
    match &f.spec {
        OrliczSpec::Power { p } => format!("u^{p}"),
        OrliczSpec::ExpMinusOne => "e^u-1".into(),
        OrliczSpec::PiecewiseLinear { .. } => "pl".into(),
    }
}

fn phi_label(f: &ConcavePhi) -> String {
    match &f.spec {
        PhiSpec::Power { alpha } => format!("t^{alpha}"),
        PhiSpec::Min { c } => format!("min(t,{c})"),
        PhiSpec::Log1p => "log(1+t)".into(),
        PhiSpec::PiecewiseLinear { .. } => "pl".into(),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidArgument(format!("L^p needs p ≥ 1, got {p}")))
    } else {
        Ok(())
    }
}

pub fn space_traits(descriptor: &NormDescriptor) -> Result<SpaceTraits> {
    descriptor.validate()?;
    Ok(match descriptor {
        NormDescriptor::Lp { p } if p.is_infinite() => SpaceTraits::new(false, true),
        NormDescriptor::Lp { .. } => SpaceTraits::new(true, false),
        NormDescriptor::L1PlusLinf => SpaceTraits::new(false, true),
        NormDescriptor::L1CapLinf => SpaceTraits::new(false, false),
        NormDescriptor::Orlicz { phi } => {
            SpaceTraits::new(phi.delta2_at_zero() && phi.delta2_at_infinity(), false)
        }
        NormDescriptor::Lorentz { phi } => {
            let finite_at_inf = phi.phi_at_infinity().is_some();
            SpaceTraits::new(phi.phi_at_zero_plus() == 0.0 && !finite_at_inf, finite_at_inf)
        }
        NormDescriptor::Marcinkiewicz { phi } => SpaceTraits::new(false, phi.slope_at_infinity() > 0.0),
    })
}

/// Rearrangements that may live on an infinite trace: either a finitely
/// supported step function or the unit 1 when τ(1) = ∞.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolicRearrangement {
    Step(StepFunction),
    /// μ_t(1) ≡ 1 on (0, ∞).
    InfiniteUnit,
}

/// Membership in R_τ = {x : μ_t(x) → 0 as t → ∞}. Always true for step
/// functions: their support is finite.
pub fn in_r_tau(f: &StepFunction) -> bool {
    f.eval(f.support_end()) == 0.0
}

impl SymbolicRearrangement {
    pub fn in_r_tau(&self) -> bool {
        match self {
            SymbolicRearrangement::Step(f) => in_r_tau(f),
            SymbolicRearrangement::InfiniteUnit => false,
        }
    }
}

// ---------------------------------------------------------------------------
// norms

/// ‖x‖_p = τ(|x|^p)^{1/p}; p = ∞ gives the sup.
pub fn norm_p<X: Rearrangeable + ?Sized>(x: &X, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let vals = x.weighted_values();
    let top = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(top);
    }
    let s: f64 = vals.iter().map(|&(w, v)| w * (v / top).powf(p)).sum();
    Ok(top * s.powf(1.0 / p))
}

/// ‖x‖_{L¹+L^∞} = ∫_0^1 μ_t(x) dt.
pub fn norm_l1_plus_linf<X: Rearrangeable + ?Sized>(x: &X) -> f64 {
    x.mu().cumulative(1.0)
}

/// max{‖x‖₁, ‖x‖_∞}.
pub fn norm_l1_cap_linf<X: Rearrangeable + ?Sized>(x: &X) -> f64 {
    let vals = x.weighted_values();
    let l1: f64 = vals.iter().map(|&(w, v)| w * v).sum();
    let linf = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    l1.max(linf)
}

/// The modular a ↦ τ(Φ(|x|/a)).
pub fn orlicz_modular<X: Rearrangeable + ?Sized>(x: &X, phi: &OrliczFunction, a: f64) -> f64 {
    modular_of(&x.weighted_values(), phi, a)
}

fn modular_of(vals: &[(f64, f64)], phi: &OrliczFunction, a: f64) -> f64 {
    vals.iter().map(|&(w, v)| w * phi.eval(v / a)).sum()
}

/// Luxemburg norm inf{a > 0 : τ(Φ(|x|/a)) ≤ 1} by bracketing and bisection.
pub fn luxemburg_norm<X: Rearrangeable + ?Sized>(x: &X, phi: &OrliczFunction) -> Result<f64> {
    let vals: Vec<(f64, f64)> = x
        .weighted_values()
        .into_iter()
        .filter(|&(w, v)| w > 0.0 && v > 0.0)
        .collect();
    if vals.is_empty() {
        return Ok(0.0);
    }
    let top = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let m = |a: f64| modular_of(&vals, phi, a);

    let mut hi = top;
    let mut guard = 0;
    while m(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Numerical("Luxemburg bracket did not close above".into()));
        }
    }
    let mut lo = hi;
    guard = 0;
    while m(lo) <= 1.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Numerical("Luxemburg bracket did not close below".into()));
        }
    }
    for _ in 0..400 {
        if hi - lo <= LUXEMBURG_REL_WIDTH * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if m(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// ‖x‖_{Λ_φ} = ∫ μ_t(x) dφ(t), exact for step functions.
pub fn lorentz_norm<X: Rearrangeable + ?Sized>(x: &X, phi: &ConcavePhi) -> f64 {
    let f = x.mu();
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &(end, val) in f.knots() {
        acc += val * (phi.eval(end) - phi.eval(prev));
        prev = end;
    }
    acc
}

/// ‖x‖_{M_φ} = sup_{s>0} φ(s)^{-1} ∫_0^s μ_t(x) dt.
///
/// Candidates: the limit s → 0⁺, every knot of μ and φ inside the support,
/// and for curved φ a golden-section probe of each segment.
pub fn marcinkiewicz_norm<X: Rearrangeable + ?Sized>(x: &X, phi: &ConcavePhi) -> f64 {
    let f = x.mu();
    if f.is_zero() {
        return 0.0;
    }
    let ratio = |s: f64| f.cumulative(s) / phi.eval(s);
    let end = f.support_end();

    let mut best = match phi.slope_at_zero() {
        Some(slope) if slope > 0.0 => f.sup() / slope,
        _ => 0.0,
    };

    let mut pts: Vec<f64> = f
        .endpoints()
        .chain(phi.kinks().into_iter().filter(|&k| k > 0.0 && k < end))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for &s in &pts {
        best = best.max(ratio(s));
    }
    if phi.is_curved() {
        let mut left = 0.0;
        for &right in &pts {
            let a = if left == 0.0 { right * 1e-12 } else { left };
            best = best.max(golden_max(&ratio, a, right));
            left = right;
        }
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = GOLDEN_TOL * (b - a).max(f64::MIN_POSITIVE);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = f(a).max(f(b)).max(fc).max(fd);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            best = best.max(fd);
        }
    }
    best
}

/// One representative of every implemented norm family.
pub fn standard_descriptors() -> Vec<NormDescriptor> {
    vec![
        NormDescriptor::lp(1.0).expect("valid descriptor"),
        NormDescriptor::lp(2.5).expect("valid descriptor"),
        NormDescriptor::lp(f64::INFINITY).expect("valid descriptor"),
        NormDescriptor::L1PlusLinf,
        NormDescriptor::L1CapLinf,
        NormDescriptor::Orlicz { phi: OrliczFunction::power(3.0).expect("valid descriptor") },
        NormDescriptor::Orlicz { phi: OrliczFunction::exp_minus_one() },
        NormDescriptor::Lorentz { phi: ConcavePhi::sqrt() },
        NormDescriptor::Lorentz { phi: ConcavePhi::log1p() },
        NormDescriptor::Marcinkiewicz { phi: ConcavePhi::sqrt() },
        NormDescriptor::Marcinkiewicz { phi: ConcavePhi::min(2.0).expect("valid descriptor") },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraShape, Operator};

    fn diag(vals: &[f64]) -> Operator {
        Operator::diagonal(&AlgebraShape::atoms(vals.len()).unwrap(), vals).unwrap()
    }

    #[test]
    fn norm_p_examples() {
        let x = diag(&[3.0, 4.0]);
        assert!((norm_p(&x, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((norm_p(&x, 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((norm_p(&x, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
        assert!(norm_p(&x, 0.5).is_err());
    }

    #[test]
    fn l1_plus_linf_and_cap_examples() {
        let x = diag(&[3.0, 1.0, 2.0]);
        assert!((norm_l1_plus_linf(&x) - 3.0).abs() < 1e-12);
        assert!((norm_l1_cap_linf(&x) - 6.0).abs() < 1e-12);
        let half = Operator::diagonal(&AlgebraShape::atoms(1).unwrap(), &[0.5]).unwrap();
        assert!((norm_l1_cap_linf(&half) - 0.5).abs() < 1e-15);
        assert!((norm_l1_cap_linf(&x.scale(2.0)) - 12.0).abs() < 1e-12);
        // projection with τ(e) ≥ 1
        let e = Operator::diagonal(&AlgebraShape::new([(3, 0.5)]).unwrap(), &[1.0, 1.0, 0.0]).unwrap();
        assert!((norm_l1_plus_linf(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn luxemburg_examples() {
        let x = diag(&[3.0, 4.0]);
        let sq = OrliczFunction::power(2.0).unwrap();
        assert!((luxemburg_norm(&x, &sq).unwrap() - 5.0).abs() < 1e-10);
        let one = diag(&[1.0]);
        let e = OrliczFunction::exp_minus_one();
        let want = 1.0 / std::f64::consts::LN_2;
        assert!((luxemburg_norm(&one, &e).unwrap() - want).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&diag(&[0.0, 0.0]), &e).unwrap(), 0.0);
    }

    #[test]
    fn lorentz_examples() {
        let x = diag(&[1.0, 1.0]);
        assert!((lorentz_norm(&x, &ConcavePhi::sqrt()) - 2f64.sqrt()).abs() < 1e-14);
        let y = diag(&[3.0, 1.0, 2.0]);
        assert!((lorentz_norm(&y, &ConcavePhi::identity()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn marcinkiewicz_examples() {
        let x = diag(&[1.0]);
        assert!((marcinkiewicz_norm(&x, &ConcavePhi::sqrt()) - 1.0).abs() < 1e-12);
        let y = diag(&[3.0, 1.0, 2.0]);
        assert!((marcinkiewicz_norm(&y, &ConcavePhi::identity()) - 3.0).abs() < 1e-12);
        let m = ConcavePhi::min(1.0).unwrap();
        assert!((marcinkiewicz_norm(&y, &m) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_is_zero_for_every_norm() {
        let z = diag(&[0.0, 0.0, 0.0]);
        for d in all_descriptors() {
            assert_eq!(d.norm(&z).unwrap(), 0.0, "{}", d.label());
        }
    }

    fn all_descriptors() -> Vec<NormDescriptor> {
        standard_descriptors()
    }

    #[test]
    fn space_traits_examples() {
        let t = space_traits(&NormDescriptor::Orlicz { phi: OrliczFunction::power(2.0).unwrap() }).unwrap();
        assert!(t.order_continuous);
        let t = space_traits(&NormDescriptor::Lorentz { phi: ConcavePhi::min(1.0).unwrap() }).unwrap();
        assert!(t.contains_unit_when_trace_infinite && !t.subset_of_r_tau);
        let t = space_traits(&NormDescriptor::Marcinkiewicz { phi: ConcavePhi::sqrt() }).unwrap();
        assert!(!t.contains_unit_when_trace_infinite && t.subset_of_r_tau);
        let t = space_traits(&NormDescriptor::Lorentz { phi: ConcavePhi::sqrt() }).unwrap();
        assert!(t.order_continuous && t.subset_of_r_tau);
        let t = space_traits(&NormDescriptor::Orlicz { phi: OrliczFunction::exp_minus_one() }).unwrap();
        assert!(!t.order_continuous);
        let pl = OrliczFunction::piecewise_linear(vec![(1.0, 1.0), (2.0, 3.0)], true, false).unwrap();
        assert!(!space_traits(&NormDescriptor::Orlicz { phi: pl }).unwrap().order_continuous);
        for d in all_descriptors() {
            let t = space_traits(&d).unwrap();
            assert_eq!(t.subset_of_r_tau, !t.contains_unit_when_trace_infinite);
        }
    }

    #[test]
    fn space_traits_rejects_unvalidated() {
        let bad = NormDescriptor::Lp { p: 0.3 };
        assert!(space_traits(&bad).is_err());
    }

    #[test]
    fn r_tau_membership() {
        let f = StepFunction::new(vec![(1.0, 2.0), (3.0, 1.0)]).unwrap();
        assert!(in_r_tau(&f));
        assert!(in_r_tau(&diag(&[1.0, 5.0]).mu()));
        assert!(!SymbolicRearrangement::InfiniteUnit.in_r_tau());
        assert!(SymbolicRearrangement::Step(f).in_r_tau());
    }

    #[test]
    fn descriptor_validation_errors() {
        assert!(OrliczFunction::power(0.5).is_err());
        assert!(OrliczFunction::piecewise_linear(vec![(1.0, 2.0), (2.0, 2.5)], true, true).is_err());
        assert!(OrliczFunction::piecewise_linear(vec![(1.0, 0.0), (2.0, 1.0)], true, true).is_err());
        assert!(ConcavePhi::power(1.5).is_err());
        assert!(ConcavePhi::min(0.0).is_err());
        assert!(ConcavePhi::piecewise_linear(0.0, vec![(1.0, 1.0), (2.0, 3.0)], 0.0).is_err());
        assert!(ConcavePhi::piecewise_linear(0.0, vec![(1.0, 1.0)], 2.0).is_err());
        let ok = ConcavePhi::piecewise_linear(0.5, vec![(1.0, 1.0), (3.0, 2.0)], 0.0).unwrap();
        assert_eq!(ok.phi_at_infinity(), Some(2.0));
        assert_eq!(ok.phi_at_zero_plus(), 0.5);
    }

    #[test]
    fn descriptor_json_syntax() {
        let d: NormDescriptor = serde_json::from_str(r#"{"kind":"lp","p":"inf"}"#).unwrap();
        assert_eq!(d, NormDescriptor::Lp { p: f64::INFINITY });
        let d: NormDescriptor =
            serde_json::from_str(r#"{"kind":"orlicz","phi":{"name":"power","p":3}}"#).unwrap();
        assert_eq!(d.label(), "Orlicz(u^3)");
        let d: NormDescriptor =
            serde_json::from_str(r#"{"kind":"marcinkiewicz","phi":{"name":"power","alpha":0.5}}"#).unwrap();
        assert!(matches!(d, NormDescriptor::Marcinkiewicz { .. }));
        assert!(serde_json::from_str::<NormDescriptor>(r#"{"kind":"lorentz","phi":{"name":"power","alpha":2}}"#).is_err());
        assert!(serde_json::from_str::<NormDescriptor>(r#"{"kind":"lp","p":2,"extra":1}"#).is_err());
        let back = serde_json::to_string(&NormDescriptor::Lp { p: f64::INFINITY }).unwrap();
        assert_eq!(back, r#"{"kind":"lp","p":"inf"}"#);
    }
}
