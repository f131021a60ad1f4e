//! Model parameters, derived constants and the regime/case classification.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;

/// Inputs of the threshold-switching surplus model plus the fixed cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub mu_plus: T,
    pub mu_minus: T,
    pub sigma_plus: T,
    pub sigma_minus: T,
    pub a: T,
    pub q: T,
    pub beta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(mu_plus: T, sigma_plus: T, mu_minus: T, sigma_minus: T, a: T, q: T, beta: T) -> Result<Self> {
        let p = Self {
            mu_plus,
            mu_minus,
            sigma_plus,
            sigma_minus,
            a,
            q,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("mu_plus", self.mu_plus),
            ("mu_minus", self.mu_minus),
            ("sigma_plus", self.sigma_plus),
            ("sigma_minus", self.sigma_minus),
            ("a", self.a),
            ("q", self.q),
            ("beta", self.beta),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        let positive = [
            ("sigma_plus", self.sigma_plus),
            ("sigma_minus", self.sigma_minus),
            ("a", self.a),
            ("q", self.q),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if v <= T::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Copy with a different transaction cost.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        let mut p = *self;
        p.beta = beta;
        p.validate()?;
        Ok(p)
    }

    /// Drift of the regime active at surplus level `x` (the lower regime owns `x = a`).
    #[inline]
    pub fn drift(&self, x: T) -> T {
        if x <= self.a {
            self.mu_minus
        } else {
            self.mu_plus
        }
    }

    #[inline]
    pub fn volatility(&self, x: T) -> T {
        if x <= self.a {
            self.sigma_minus
        } else {
            self.sigma_plus
        }
    }

    /// Converts every field to another scalar type.
    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        ModelParams {
            mu_plus: c(self.mu_plus),
            mu_minus: c(self.mu_minus),
            sigma_plus: c(self.sigma_plus),
            sigma_minus: c(self.sigma_minus),
            a: c(self.a),
            q: c(self.q),
            beta: c(self.beta),
        }
    }
}

/// Auxiliary levels that only exist in some cases and require inverting g'.
/// They are filled in by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuxLevels<T> {
    pub a4: Option<T>,
    pub a5: Option<T>,
    pub a6: Option<T>,
    pub a7: Option<T>,
    pub x1: Option<T>,
    pub x2: Option<T>,
    pub x3: Option<T>,
    pub x4: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T> {
    pub theta1_plus: T,
    pub theta2_plus: T,
    pub theta1_minus: T,
    pub theta2_minus: T,
    pub c_minus: T,
    pub c_plus: T,
    pub big_theta: T,
    pub x0: Option<T>,
    pub a1: Option<T>,
    pub a2: Option<T>,
    pub a3: Option<T>,
    pub aux: AuxLevels<T>,
}

/// Positive roots of `sigma^2/2 t^2 -/+ mu t - q = 0`, computed without
/// cancellation: returns `(theta1, theta2)` with `theta1 - theta2 = 2 mu / sigma^2`.
pub fn characteristic_roots<T: Real>(mu: T, sigma: T, q: T) -> (T, T) {
    let two = T::lit(2.0);
    let s2 = sigma * sigma;
    let r = (mu * mu + two * q * s2).sqrt();
    if mu == T::zero() {
        let t = r / s2;
        (t, t)
    } else if mu > T::zero() {
        let t1 = (r + mu) / s2;
        (t1, two * q / (r + mu))
    } else {
        let t2 = (r - mu) / s2;
        (two * q / (r - mu), t2)
    }
}

/// `ln(arg) / denom` when `arg > 0` and the result is positive.
fn positive_log_ratio<T: Real>(arg: T, denom: T) -> Option<T> {
    if !(arg > T::zero()) || !arg.is_finite() {
        return None;
    }
    let v = arg.ln() / denom;
    (v > T::zero() && v.is_finite()).then_some(v)
}

impl<T: Real> DerivedConstants<T> {
    pub fn derive(params: &ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let (t1p, t2p) = characteristic_roots(params.mu_plus, params.sigma_plus, params.q);
        let (t1m, t2m) = characteristic_roots(params.mu_minus, params.sigma_minus, params.q);
        let one = T::one();
        let c_minus = (t1m - t1p) / (t2m + t1m);
        let c_plus = (t2p - t2m) / (t2p + t1p);
        let big_theta = c_plus * t1p * t1p + (one - c_plus) * t2p * t2p;

        let a1 = positive_log_ratio(t1m / t2m, (t2m + t1m) / T::lit(2.0));
        let a2 = if t2p - t2m > T::zero() {
            positive_log_ratio((t2p + t1m) / (t2p - t2m), t1m + t2m)
        } else {
            None
        };
        let a3_num = (one - c_minus * c_plus) * t1p * t1p - (one - c_plus) * c_minus * t2p * t2p;
        let a3 = positive_log_ratio(a3_num / ((one - c_minus) * big_theta), t1m + t2m);

        let mut consts = Self {
            theta1_plus: t1p,
            theta2_plus: t2p,
            theta1_minus: t1m,
            theta2_minus: t2m,
            c_minus,
            c_plus,
            big_theta,
            x0: None,
            a1,
            a2,
            a3,
            aux: AuxLevels::default(),
        };
        let (p, h) = consts.upper_mix(params.a);
        let x0_arg = h * t1p * t1p / (p * t2p * t2p);
        consts.x0 = (x0_arg > T::zero() && x0_arg.is_finite()).then(|| x0_arg.ln() / (t2p + t1p) + params.a);
        Ok(consts)
    }

    /// Coefficients `(P, H)` of g on `(a, inf)` after dividing g by the positive
    /// factor `(1 - c_-) e^{theta1_minus a}`:
    /// `g(x) = P e^{theta2_plus (x-a)} - H e^{-theta1_plus (x-a)}`.
    pub(crate) fn upper_mix(&self, a: T) -> (T, T) {
        let one = T::one();
        let e = (-(self.theta1_minus + self.theta2_minus) * a).exp();
        let cm = self.c_minus;
        let cp = self.c_plus;
        let p = (one - cp) * (one + cm * e / (one - cm));
        let h = (one - cp * cm) * e / (one - cm) - cp;
        (p, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignRegime {
    BothPositive,
    BothNonpositive,
    PlusNonpositiveMinusPositive,
    PlusPositiveMinusNonpositive,
}

impl SignRegime {
    pub fn of<T: Real>(p: &ModelParams<T>) -> Self {
        match (p.mu_plus > T::zero(), p.mu_minus > T::zero()) {
            (true, true) => Self::BothPositive,
            (false, false) => Self::BothNonpositive,
            (false, true) => Self::PlusNonpositiveMinusPositive,
            (true, false) => Self::PlusPositiveMinusNonpositive,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::BothPositive => "both-positive",
            Self::BothNonpositive => "both-nonpositive",
            Self::PlusNonpositiveMinusPositive => "plus-nonpositive-minus-positive",
            Self::PlusPositiveMinusNonpositive => "plus-positive-minus-nonpositive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubCase {
    I,
    II,
    III,
    IV,
    /// `a <= a1` in the mixed regime with positive lower drift.
    AAtMostA1,
    /// `a > a1` in the same regime.
    AAboveA1,
    None,
}

impl SubCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
            Self::IV => "iv",
            Self::AAtMostA1 => "a<=a1",
            Self::AAboveA1 => "a>a1",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseLabel {
    pub regime: SignRegime,
    pub sub_case: SubCase,
}

impl CaseLabel {
    /// All nine labels, in a fixed order.
    pub const ALL: [CaseLabel; 9] = [
        CaseLabel::new(SignRegime::BothPositive, SubCase::I),
        CaseLabel::new(SignRegime::BothPositive, SubCase::II),
        CaseLabel::new(SignRegime::BothPositive, SubCase::III),
        CaseLabel::new(SignRegime::BothPositive, SubCase::IV),
        CaseLabel::new(SignRegime::BothNonpositive, SubCase::None),
        CaseLabel::new(SignRegime::PlusNonpositiveMinusPositive, SubCase::AAtMostA1),
        CaseLabel::new(SignRegime::PlusNonpositiveMinusPositive, SubCase::AAboveA1),
        CaseLabel::new(SignRegime::PlusPositiveMinusNonpositive, SubCase::I),
        CaseLabel::new(SignRegime::PlusPositiveMinusNonpositive, SubCase::II),
    ];

    pub const fn new(regime: SignRegime, sub_case: SubCase) -> Self {
        Self { regime, sub_case }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.regime.as_str(), self.sub_case.as_str())
    }
}

/// Comparisons that are false whenever a constant is absent.
fn le<T: Real>(x: Option<T>, y: Option<T>) -> bool {
    matches!((x, y), (Some(x), Some(y)) if x <= y)
}

fn lt<T: Real>(x: Option<T>, y: Option<T>) -> bool {
    matches!((x, y), (Some(x), Some(y)) if x < y)
}

fn min_of<T: Real>(xs: &[Option<T>]) -> Option<T> {
    xs.iter().try_fold(T::infinity(), |m, x| x.map(|v| m.min(v)))
}

fn max_of<T: Real>(xs: &[Option<T>]) -> Option<T> {
    xs.iter().try_fold(T::neg_infinity(), |m, x| x.map(|v| m.max(v)))
}

/// Truth value of every printed bullet of the both-positive case lists, in
/// the order (i), (ii), (iii), (iv).
pub fn both_positive_conditions<T: Real>(p: &ModelParams<T>, k: &DerivedConstants<T>) -> [bool; 4] {
    let a = Some(p.a);
    let (a1, a2, a3) = (k.a1, k.a2, k.a3);
    let cp_pos = k.c_plus > T::zero();
    let th_pos = k.big_theta > T::zero();
    let case_i = (le(a2, a) && le(a, a1) && cp_pos)
        || (le(a3, a) && le(a, min_of(&[a1, a2])) && cp_pos)
        || (le(a3, a) && le(a, a1) && !cp_pos && th_pos);
    let case_ii = (le(a, min_of(&[a1, a2, a3])) && cp_pos)
        || (le(a, a1) && !cp_pos && !th_pos)
        || (le(a, min_of(&[a1, a3])) && !cp_pos && th_pos);
    let case_iii = (le(max_of(&[a1, a2]), a) && cp_pos)
        || (le(max_of(&[a1, a3]), a) && lt(a, a2) && cp_pos)
        || (le(max_of(&[a1, a3]), a) && !cp_pos && th_pos);
    let case_iv = (lt(a1, a) && lt(a, min_of(&[a2, a3])) && cp_pos)
        || (lt(a1, a) && !cp_pos && !th_pos)
        || (lt(a1, a) && lt(a, a3) && !cp_pos && th_pos);
    [case_i, case_ii, case_iii, case_iv]
}

/// Truth value of the bullets of the two cases for `mu_+ > 0 >= mu_-`.
pub fn plus_positive_conditions<T: Real>(p: &ModelParams<T>, k: &DerivedConstants<T>) -> [bool; 2] {
    let a = Some(p.a);
    let cp_pos = k.c_plus > T::zero();
    let th_pos = k.big_theta > T::zero();
    let case_i = (cp_pos && le(k.a2, a))
        || (cp_pos && le(k.a3, a) && le(a, k.a2))
        || (!cp_pos && le(k.a3, a) && th_pos);
    let case_ii = (cp_pos && lt(a, min_of(&[k.a2, k.a3])))
        || (!cp_pos && !th_pos)
        || (!cp_pos && lt(a, k.a3) && th_pos);
    [case_i, case_ii]
}

/// Assigns the unique case label; ties at equality go to the first listed case.
pub fn classify_case<T: Real>(p: &ModelParams<T>, k: &DerivedConstants<T>) -> CaseLabel {
    let regime = SignRegime::of(p);
    let sub_case = match regime {
        SignRegime::BothPositive => {
            let c = both_positive_conditions(p, k);
            [SubCase::I, SubCase::II, SubCase::III, SubCase::IV]
                .into_iter()
                .zip(c)
                .find_map(|(s, hit)| hit.then_some(s))
                .unwrap_or(SubCase::IV)
        }
        SignRegime::BothNonpositive => SubCase::None,
        SignRegime::PlusNonpositiveMinusPositive => {
            if le(Some(p.a), k.a1) {
                SubCase::AAtMostA1
            } else {
                SubCase::AAboveA1
            }
        }
        SignRegime::PlusPositiveMinusNonpositive => {
            if plus_positive_conditions(p, k)[0] {
                SubCase::I
            } else {
                SubCase::II
            }
        }
    };
    CaseLabel { regime, sub_case }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Concave,
    Convex,
}

impl Curvature {
    pub fn symbol(&self) -> char {
        match self {
            Self::Concave => '-',
            Self::Convex => '+',
        }
    }
}

/// Breakpoints splitting `(0, inf)` and the sign of g'' on each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityProfile<T> {
    pub label: CaseLabel,
    pub breakpoints: Vec<T>,
    pub signs: Vec<Curvature>,
}

impl<T: Real> ConvexityProfile<T> {
    /// Declared curvature at `x`; points exactly on a breakpoint belong to the left piece.
    pub fn curvature_at(&self, x: T) -> Curvature {
        let idx = self.breakpoints.iter().filter(|&&b| x > b).count();
        self.signs[idx]
    }

    pub fn pattern(&self) -> String {
        self.signs.iter().map(Curvature::symbol).collect()
    }
}

pub fn convexity_profile<T: Real>(
    p: &ModelParams<T>,
    k: &DerivedConstants<T>,
    label: CaseLabel,
) -> Result<ConvexityProfile<T>> {
    use Curvature::{Concave as N, Convex as P};
    let need = |v: Option<T>, what: &'static str| {
        v.ok_or_else(|| Error::Solver {
            message: format!("{what} is undefined although the case {label} requires it"),
            trace: "convexity_profile".into(),
        })
    };
    let (breakpoints, signs) = match (label.regime, label.sub_case) {
        (SignRegime::BothPositive, SubCase::I) => (vec![p.a], vec![N, P]),
        (SignRegime::BothPositive, SubCase::II) => (vec![need(k.x0, "x0")?], vec![N, P]),
        (SignRegime::BothPositive, SubCase::III) => (vec![need(k.a1, "a1")?], vec![N, P]),
        (SignRegime::BothPositive, _) => (
            vec![need(k.a1, "a1")?, p.a, need(k.x0, "x0")?],
            vec![N, P, N, P],
        ),
        (SignRegime::BothNonpositive, _) => (vec![], vec![P]),
        (SignRegime::PlusNonpositiveMinusPositive, SubCase::AAtMostA1) => (vec![p.a], vec![N, P]),
        (SignRegime::PlusNonpositiveMinusPositive, _) => (vec![need(k.a1, "a1")?], vec![N, P]),
        (SignRegime::PlusPositiveMinusNonpositive, SubCase::I) => (vec![], vec![P]),
        (SignRegime::PlusPositiveMinusNonpositive, _) => (vec![p.a, need(k.x0, "x0")?], vec![P, N, P]),
    };
    Ok(ConvexityProfile {
        label,
        breakpoints,
        signs,
    })
}
