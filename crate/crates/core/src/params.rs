//! Balance parameters `<Δ, Γ>` and the predicates built on them.
//!
//! Every comparison a tree makes against its parameters goes through this
//! module. In rational mode the predicates are exact integer
//! cross-multiplications (weights are widened to `u128`, so no product can
//! overflow); in real mode they are plain `f64` comparisons against
//! precomputed constants.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// `1 + √2`, the classic Δ.
pub const CLASSIC_DELTA: f64 = 1.0 + std::f64::consts::SQRT_2;
/// `√2`, the classic Γ.
pub const CLASSIC_GAMMA: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("balance parameter {0} is below 1")]
    BelowOne(String),
    #[error("zero denominator in {0}/0")]
    ZeroDenominator(u64),
    #[error("balance parameter {0} is not a finite number")]
    NotFinite(f64),
    #[error("alpha = {0} is outside the open interval (0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("numerator or denominator {0} does not fit in 32 bits")]
    TooLarge(u64),
    #[error("cannot parse parameter set `{0}`")]
    Parse(String),
}

/// A positive fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self, ParamError> {
        if den == 0 {
            return Err(ParamError::ZeroDenominator(num));
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        let fit = |v: u64| u32::try_from(v).map_err(|_| ParamError::TooLarge(v));
        Ok(Ratio {
            num: fit(num)?,
            den: fit(den)?,
        })
    }

    pub fn integer(v: u32) -> Self {
        Ratio { num: v, den: 1 }
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// A single parameter value as given by the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Exact(Ratio),
    Real(f64),
}

impl Value {
    pub fn ratio(num: u64, den: u64) -> Result<Self, ParamError> {
        Ratio::new(num, den).map(Value::Exact)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64(),
            Value::Real(x) => x,
        }
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Exact(Ratio::integer(v))
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => r.fmt(f),
            Value::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Rational {
        dn: u128,
        dd: u128,
        gn: u128,
        gd: u128,
    },
    Real {
        delta: f64,
        gamma: f64,
    },
}

/// Which side of a node is too heavy under Δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overhang {
    None,
    Left,
    Right,
}

/// Whether the rebalancing scheme is known to maintain the balance criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Feasibility {
    pub bottom_up_feasible: bool,
    pub top_down_feasible: bool,
}

/// The named parameter sets used throughout the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Canonical {
    /// `<1+√2, √2>`
    Classic,
    /// `<3, 2>`
    Integral,
    /// `<3, 4/3>`
    TopDown,
    /// `<2, 3/2>`
    Tight,
    /// `<3/2, 5/4>`
    Overtight,
}

impl Canonical {
    pub const ALL: [Canonical; 5] = [
        Canonical::Classic,
        Canonical::Integral,
        Canonical::TopDown,
        Canonical::Tight,
        Canonical::Overtight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Canonical::Classic => "classic",
            Canonical::Integral => "integral",
            Canonical::TopDown => "topdown",
            Canonical::Tight => "tight",
            Canonical::Overtight => "overtight",
        }
    }

    pub fn params(self) -> BalanceParams {
        let r = |n, d| Value::Exact(Ratio::new(n, d).expect("canonical ratio"));
        let (delta, gamma) = match self {
            Canonical::Classic => (Value::Real(CLASSIC_DELTA), Value::Real(CLASSIC_GAMMA)),
            Canonical::Integral => (r(3, 1), r(2, 1)),
            Canonical::TopDown => (r(3, 1), r(4, 3)),
            Canonical::Tight => (r(2, 1), r(3, 2)),
            Canonical::Overtight => (r(3, 2), r(5, 4)),
        };
        BalanceParams::new(delta, gamma).expect("canonical parameters are valid")
    }
}

/// The pair `<Δ, Γ>`.
///
/// Δ bounds the ratio between sibling subtree weights, Γ decides between a
/// single and a double rotation. Both must be at least 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceParams {
    delta: Value,
    gamma: Value,
    repr: Repr,
}

impl BalanceParams {
    pub fn new(delta: impl Into<Value>, gamma: impl Into<Value>) -> Result<Self, ParamError> {
        let (delta, gamma) = (delta.into(), gamma.into());
        for v in [delta, gamma] {
            match v {
                Value::Real(x) if !x.is_finite() => return Err(ParamError::NotFinite(x)),
                Value::Real(x) if x < 1.0 => return Err(ParamError::BelowOne(v.to_string())),
                Value::Exact(r) if r.num < r.den => {
                    return Err(ParamError::BelowOne(v.to_string()))
                }
                _ => {}
            }
        }
        let repr = match (delta, gamma) {
            (Value::Exact(d), Value::Exact(g)) => Repr::Rational {
                dn: d.num as u128,
                dd: d.den as u128,
                gn: g.num as u128,
                gd: g.den as u128,
            },
            _ => Repr::Real {
                delta: delta.to_f64(),
                gamma: gamma.to_f64(),
            },
        };
        Ok(BalanceParams { delta, gamma, repr })
    }

    /// `<Δ, Γ>` from the α parameterisation: `Δ = (1-α)/α`, `Γ = 1/(1-α)`.
    pub fn from_alpha(alpha: f64) -> Result<Self, ParamError> {
        let (d, g) = delta_gamma_from_alpha(alpha)?;
        BalanceParams::new(d, g)
    }

    pub fn delta(&self) -> Value {
        self.delta
    }

    pub fn gamma(&self) -> Value {
        self.gamma
    }

    pub fn mode(&self) -> Mode {
        match self.repr {
            Repr::Rational { .. } => Mode::Rational,
            Repr::Real { .. } => Mode::Real,
        }
    }

    /// `heavy > light · Δ`
    #[inline]
    pub fn exceeds_delta(&self, heavy: u64, light: u64) -> bool {
        match self.repr {
            Repr::Rational { dn, dd, .. } => heavy as u128 * dd > light as u128 * dn,
            Repr::Real { delta, .. } => heavy as f64 > light as f64 * delta,
        }
    }

    /// Both `left·Δ ≥ right` and `right·Δ ≥ left`.
    #[inline]
    pub fn is_balanced(&self, left: u64, right: u64) -> bool {
        !self.exceeds_delta(right, left) && !self.exceeds_delta(left, right)
    }

    /// [`is_balanced`](Self::is_balanced) for weights that fit in `u32`,
    /// specialised once so it can sit in a tight loop.
    pub(crate) fn balance_test(&self) -> impl Fn(u32, u32) -> bool {
        let (dn, dd, delta) = match self.repr {
            // Both numerator and denominator fit in u32, so products of a
            // u32 weight fit in u64.
            Repr::Rational { dn, dd, .. } => (dn as u64, dd as u64, 0.0),
            Repr::Real { delta, .. } => (0, 0, delta),
        };
        move |l: u32, r: u32| {
            let (l, r) = (l as u64, r as u64);
            if dd != 0 {
                l * dn >= r * dd && r * dn >= l * dd
            } else {
                l as f64 * delta >= r as f64 && r as f64 * delta >= l as f64
            }
        }
    }

    #[inline]
    pub fn overhang_side(&self, left: u64, right: u64) -> Overhang {
        if self.exceeds_delta(right, left) {
            Overhang::Right
        } else if self.exceeds_delta(left, right) {
            Overhang::Left
        } else {
            Overhang::None
        }
    }

    /// `inner > outer · Γ`, where `inner` is the grandchild subtree closer
    /// to the rotation pivot.
    #[inline]
    pub fn needs_double_rotation(&self, inner: u64, outer: u64) -> bool {
        match self.repr {
            Repr::Rational { gn, gd, .. } => inner as u128 * gd > outer as u128 * gn,
            Repr::Real { gamma, .. } => inner as f64 > outer as f64 * gamma,
        }
    }

    /// `inner ≥ outer · Γ`: the same test with ties sent to the double
    /// rotation. Bottom-up rebalancing uses this form; with ⟨3,2⟩ a single
    /// rotation at a tie (inner = 2·outer) can leave the lowered pivot
    /// out of balance after a deletion.
    #[inline]
    pub fn needs_double_rotation_at_tie(&self, inner: u64, outer: u64) -> bool {
        match self.repr {
            Repr::Rational { gn, gd, .. } => inner as u128 * gd >= outer as u128 * gn,
            Repr::Real { gamma, .. } => inner as f64 >= outer as f64 * gamma,
        }
    }

    /// The canonical set these parameters are equal to, if any.
    pub fn canonical(&self) -> Option<Canonical> {
        Canonical::ALL
            .into_iter()
            .find(|c| c.params().repr == self.repr)
    }

    /// Only the five canonical sets carry a known answer; anything else is
    /// reported infeasible for both schemes.
    pub fn classify_feasibility(&self) -> Feasibility {
        match self.canonical() {
            Some(Canonical::Classic) | Some(Canonical::Integral) => Feasibility {
                bottom_up_feasible: true,
                top_down_feasible: false,
            },
            Some(Canonical::TopDown) => Feasibility {
                bottom_up_feasible: true,
                top_down_feasible: true,
            },
            _ => Feasibility::default(),
        }
    }

    /// Short name: the canonical name, or `custom:<Δ>:<Γ>`.
    pub fn name(&self) -> String {
        match self.canonical() {
            Some(c) => c.name().to_string(),
            None => format!("custom:{}:{}", self.delta, self.gamma),
        }
    }
}

impl fmt::Display for BalanceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.delta, self.gamma)
    }
}

impl FromStr for BalanceParams {
    type Err = ParamError;

    /// Accepts `classic`, `integral`, `topdown`, `tight`, `overtight` or
    /// `custom:<dn>/<dd>:<gn>/<gd>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(c) = Canonical::ALL.into_iter().find(|c| c.name() == s) {
            return Ok(c.params());
        }
        let bad = || ParamError::Parse(s.to_string());
        let rest = s.strip_prefix("custom:").ok_or_else(bad)?;
        let (d, g) = rest.split_once(':').ok_or_else(bad)?;
        let frac = |t: &str| -> Result<Value, ParamError> {
            let (n, d) = t.split_once('/').unwrap_or((t, "1"));
            let n = n.trim().parse::<u64>().map_err(|_| bad())?;
            let d = d.trim().parse::<u64>().map_err(|_| bad())?;
            Value::ratio(n, d)
        };
        BalanceParams::new(frac(d)?, frac(g)?)
    }
}

/// `(Δ, Γ) = ((1-α)/α, 1/(1-α))` for `0 < α < 1/2`.
pub fn delta_gamma_from_alpha(alpha: f64) -> Result<(f64, f64), ParamError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(ParamError::AlphaOutOfRange(alpha));
    }
    Ok(((1.0 - alpha) / alpha, 1.0 / (1.0 - alpha)))
}

/// Inverse of the Δ half of [`delta_gamma_from_alpha`]: `α = 1/(1+Δ)`.
pub fn alpha_from_delta(delta: f64) -> f64 {
    1.0 / (1.0 + delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BalanceParams {
        s.parse().unwrap()
    }

    #[test]
    fn make_params_examples() {
        let integral = BalanceParams::new(3u32, 2u32).unwrap();
        assert_eq!(integral.mode(), Mode::Rational);
        assert_eq!(integral.canonical(), Some(Canonical::Integral));

        let classic = BalanceParams::new(CLASSIC_DELTA, CLASSIC_GAMMA).unwrap();
        assert_eq!(classic.mode(), Mode::Real);
        assert_eq!(classic.canonical(), Some(Canonical::Classic));

        let half = Value::ratio(1, 2).unwrap();
        assert!(matches!(
            BalanceParams::new(half, 2u32),
            Err(ParamError::BelowOne(_))
        ));
        assert!(matches!(
            Value::ratio(3, 0),
            Err(ParamError::ZeroDenominator(3))
        ));
        assert!(BalanceParams::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn ratios_are_reduced() {
        let r = Ratio::new(8, 6).unwrap();
        assert_eq!((r.num(), r.den()), (4, 3));
        assert_eq!(p("custom:6/2:8/6"), p("topdown"));
    }

    #[test]
    fn mixed_inputs_use_real_mode() {
        let m = BalanceParams::new(3u32, 1.5).unwrap();
        assert_eq!(m.mode(), Mode::Real);
    }

    #[test]
    fn is_balanced_examples() {
        let q = p("integral");
        assert!(q.is_balanced(1, 1));
        assert!(!q.is_balanced(1, 4));
        assert!(q.is_balanced(2, 6));
    }

    #[test]
    fn overhang_examples() {
        assert_eq!(p("integral").overhang_side(1, 4), Overhang::Right);
        assert_eq!(p("integral").overhang_side(4, 1), Overhang::Left);
        assert_eq!(p("overtight").overhang_side(3, 3), Overhang::None);
    }

    #[test]
    fn double_rotation_examples() {
        assert!(p("integral").needs_double_rotation(3, 1));
        assert!(!p("integral").needs_double_rotation(2, 1));
        assert!(p("topdown").needs_double_rotation(2, 1));
        assert!(p("integral").needs_double_rotation_at_tie(2, 1));
        assert!(!p("integral").needs_double_rotation_at_tie(3, 2));
    }

    #[test]
    fn alpha_conversion_examples() {
        let (d, g) = delta_gamma_from_alpha(1.0 - std::f64::consts::SQRT_2 / 2.0).unwrap();
        assert!((d - CLASSIC_DELTA).abs() < 1e-12);
        assert!((g - CLASSIC_GAMMA).abs() < 1e-12);

        let (d, g) = delta_gamma_from_alpha(0.25).unwrap();
        assert!((d - 3.0).abs() < 1e-12 && (g - 4.0 / 3.0).abs() < 1e-12);

        let (d, g) = delta_gamma_from_alpha(1.0 / 3.0).unwrap();
        assert!((d - 2.0).abs() < 1e-12 && (g - 1.5).abs() < 1e-12);

        for bad in [0.0, 0.5, -0.1, 0.7, f64::NAN] {
            assert!(delta_gamma_from_alpha(bad).is_err());
        }
    }

    #[test]
    fn feasibility_of_canonical_sets() {
        let f = |s| p(s).classify_feasibility();
        assert!(f("topdown").top_down_feasible);
        assert_eq!(f("tight"), Feasibility::default());
        assert_eq!(f("overtight"), Feasibility::default());
        let integral = f("integral");
        assert!(integral.bottom_up_feasible && !integral.top_down_feasible);
        let classic = f("classic");
        assert!(classic.bottom_up_feasible && !classic.top_down_feasible);
        assert_eq!(f("custom:4:2"), Feasibility::default());
    }

    #[test]
    fn names_round_trip() {
        for c in Canonical::ALL {
            assert_eq!(p(c.name()).name(), c.name());
        }
        assert_eq!(p("custom:7/2:3/2").name(), "custom:7/2:3/2");
        assert!("custom:3".parse::<BalanceParams>().is_err());
        assert!("nope".parse::<BalanceParams>().is_err());
    }
}
