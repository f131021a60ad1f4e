//! Maximisers of `zeta(z1, z2) = (z2 - z1 - beta) / (g(z2) - g(z1))`.
//!
//! Every case reduces to inverting monotone functions built from
//! `psi(x, y) = int_x^y (1 - g'(s) / g'(y)) ds` and from the inverses of g'
//! on the pieces where g is concave or convex.

use std::cell::RefCell;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{classify_case, convexity_profile, AuxLevels, CaseLabel, ConvexityProfile, SignRegime, SubCase};
use crate::numerics::{brent, first_true, integrate, Bracket, QuadOptions};
use crate::real::Real;
use crate::scale::ScaleContext;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPair<T> {
    pub z1: T,
    pub z2: T,
    pub zeta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSolutionSet<T> {
    pub pairs: Vec<BarrierPair<T>>,
    pub case: CaseLabel,
    pub profile: ConvexityProfile<T>,
    pub levels: AuxLevels<T>,
    pub branch_trace: Vec<String>,
    pub degenerate_triple: bool,
}

impl<T: Real> BarrierSolutionSet<T> {
    /// Largest zeta among the returned pairs.
    pub fn zeta_star(&self) -> T {
        self.pairs.iter().fold(T::neg_infinity(), |m, p| m.max(p.zeta))
    }

    /// The pair with the largest upper barrier.
    pub fn primary(&self) -> BarrierPair<T> {
        *self
            .pairs
            .iter()
            .max_by(|a, b| a.z2.partial_cmp(&b.z2).unwrap_or(std::cmp::Ordering::Equal))
            .expect("solution sets are never empty")
    }
}

/// `zeta(z1, z2)`, evaluated with the rescaled g.
pub fn zeta<T: Real>(ctx: &ScaleContext<T>, z1: T, z2: T) -> T {
    (z2 - z1 - ctx.beta()) / (ctx.g(z2) - ctx.g(z1))
}

fn psi_unchecked<T: Real>(ctx: &ScaleContext<T>, x: T, y: T) -> T {
    if x >= y {
        return T::zero();
    }
    let lgy = ctx.ln_g_prime(y);
    let f = |s: T| T::one() - (ctx.ln_g_prime(s) - lgy).exp();
    let opts = QuadOptions::default();
    let a = ctx.a();
    let r = if x < a && a < y {
        integrate(f, x, a, &opts).and_then(|l| integrate(f, a, y, &opts).map(|r| l + r))
    } else {
        integrate(f, x, y, &opts)
    };
    r.unwrap_or(T::nan())
}

/// `psi(x, y)` by adaptive quadrature, split at the threshold.
pub fn psi<T: Real>(ctx: &ScaleContext<T>, x: T, y: T) -> Result<T> {
    if x > y || x < T::zero() {
        return Err(Error::Ordering(format!("psi needs 0 <= x <= y, got x = {x}, y = {y}")));
    }
    let v = psi_unchecked(ctx, x, y);
    if v.is_nan() {
        return Err(Error::Quadrature {
            lo: x.to_f64_lossy(),
            hi: y.to_f64_lossy(),
            estimate: f64::NAN,
        });
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Solves `f(x) = target` for `f` monotone on the bracket.
pub fn invert_monotone<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    target: T,
    bracket: Bracket<T>,
    direction: Direction,
) -> Result<T> {
    let sign = match direction {
        Direction::Increasing => T::one(),
        Direction::Decreasing => -T::one(),
    };
    brent(|x| sign * (f(x) - target), bracket, T::arg_tol(), "inverting a monotone function")
}

/// Monotone piece of g'.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<T> {
    pub lo: T,
    /// `None` for the unbounded last piece.
    pub hi: Option<T>,
    pub direction: Direction,
}

/// Named member of the family of monotone functions whose inverses give the barriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyFn {
    Phi,
    PhiBar,
    PhiTilde,
    Phi0,
    Omega1,
    Omega2,
    Omega3,
    Omega4,
}

impl fmt::Display for FamilyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Phi => "phi",
            Self::PhiBar => "phi_bar",
            Self::PhiTilde => "phi_tilde",
            Self::Phi0 => "phi_0",
            Self::Omega1 => "omega_1",
            Self::Omega2 => "omega_2",
            Self::Omega3 => "omega_3",
            Self::Omega4 => "omega_4",
        };
        f.write_str(s)
    }
}

/// Crossover levels of the two multi-piece cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossovers<T> {
    BothPositiveIv { x1: T, x2: T },
    PlusPositiveIi { x3: T, x4: T },
}

/// The piecewise structure of g' for one parameter set, with the auxiliary
/// levels of the active case. All family functions and inverses hang off it.
#[derive(Debug, Clone)]
pub struct Landscape<T> {
    pub ctx: ScaleContext<T>,
    pub label: CaseLabel,
    pub profile: ConvexityProfile<T>,
    pub levels: AuxLevels<T>,
    pieces: Vec<Piece<T>>,
}

impl<T: Real> Landscape<T> {
    pub fn new(ctx: &ScaleContext<T>) -> Result<Self> {
        let label = classify_case(&ctx.params, &ctx.consts);
        Self::with_label(ctx, label)
    }

    pub fn with_label(ctx: &ScaleContext<T>, label: CaseLabel) -> Result<Self> {
        let profile = convexity_profile(&ctx.params, &ctx.consts, label)?;
        let mut pieces = Vec::with_capacity(profile.signs.len());
        let mut lo = T::zero();
        for (i, sign) in profile.signs.iter().enumerate() {
            let hi = profile.breakpoints.get(i).copied();
            let direction = match sign {
                crate::model::Curvature::Concave => Direction::Decreasing,
                crate::model::Curvature::Convex => Direction::Increasing,
            };
            pieces.push(Piece { lo, hi, direction });
            if let Some(h) = hi {
                lo = h;
            }
        }
        let mut land = Self {
            ctx: *ctx,
            label,
            profile,
            levels: AuxLevels::default(),
            pieces,
        };
        land.fill_levels()?;
        Ok(land)
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    #[inline]
    fn gp(&self, x: T) -> T {
        self.ctx.g_prime(x)
    }

    /// Finds `s` in the piece with `g'(s) = y`, clamped to the piece ends.
    /// On a decreasing piece this is `inf{s : g'(s) <= y}`, on an increasing
    /// piece `inf{s : g'(s) >= y}`.
    pub fn inverse_on(&self, piece: Piece<T>, y: T) -> Result<T> {
        let f_lo = self.gp(piece.lo);
        match piece.direction {
            Direction::Decreasing => {
                let hi = piece.hi.expect("decreasing pieces are bounded");
                if y >= f_lo {
                    return Ok(piece.lo);
                }
                if y <= self.gp(hi) {
                    return Ok(hi);
                }
                brent(|s| self.gp(s) - y, Bracket::new(piece.lo, hi), T::arg_tol(), "inverting g' on a concave piece")
            }
            Direction::Increasing => {
                if y <= f_lo {
                    return Ok(piece.lo);
                }
                let hi = match piece.hi {
                    Some(h) => {
                        if y >= self.gp(h) {
                            return Ok(h);
                        }
                        h
                    }
                    None => self.expand(piece.lo, |s| self.gp(s) >= y, "g' on the last convex piece")?,
                };
                brent(|s| self.gp(s) - y, Bracket::new(piece.lo, hi), T::arg_tol(), "inverting g' on a convex piece")
            }
        }
    }

    /// Doubles the distance from `lo` until `reached` holds.
    fn expand<P: FnMut(T) -> bool>(&self, lo: T, mut reached: P, what: &str) -> Result<T> {
        let k = &self.ctx.consts;
        let scale = T::one()
            / k.theta1_plus
                .max(k.theta2_plus)
                .max(k.theta1_minus)
                .max(k.theta2_minus);
        let mut width = scale.max(self.ctx.beta());
        let limit = self.ctx.x_max();
        loop {
            let hi = lo + width;
            if hi > limit {
                return Err(Error::NoBracket {
                    lo: lo.to_f64_lossy(),
                    hi: limit.to_f64_lossy(),
                    f_lo: f64::NAN,
                    f_hi: f64::NAN,
                    context: format!("expanding the search interval for {what} up to the overflow limit of g"),
                });
            }
            if reached(hi) {
                return Ok(hi);
            }
            width = width + width;
        }
    }

    fn piece_ending_at(&self, b: T) -> Piece<T> {
        *self
            .pieces
            .iter()
            .find(|p| p.hi == Some(b))
            .expect("breakpoint belongs to the profile")
    }

    fn piece_starting_at(&self, b: T) -> Piece<T> {
        *self
            .pieces
            .iter()
            .find(|p| p.lo == b)
            .expect("breakpoint belongs to the profile")
    }

    fn last_piece(&self) -> Piece<T> {
        *self.pieces.last().expect("profile has a piece")
    }

    /// `psi(u(g'(x)), x)` with `u` the inverse of g' on `piece`.
    fn psi_from(&self, piece: Piece<T>, x: T) -> T {
        match self.inverse_on(piece, self.gp(x)) {
            Ok(u) => psi_unchecked(&self.ctx, u, x),
            Err(_) => T::nan(),
        }
    }

    /// Inverts an increasing function `f` with `f(lo) <= target`, on
    /// `[lo, hi]` or on `[lo, inf)` when `hi` is `None`.
    fn invert_up<F: Fn(T) -> T>(&self, f: F, target: T, lo: T, hi: Option<T>, what: &str) -> Result<T> {
        let hi = match hi {
            Some(h) => h,
            None => self.expand(lo, |x| f(x) >= target, what)?,
        };
        let err = RefCell::new(None::<String>);
        let r = brent(
            |x| {
                let v = f(x);
                if v.is_nan() {
                    err.borrow_mut().get_or_insert_with(|| format!("{what} undefined at {x}"));
                }
                v - target
            },
            Bracket::new(lo, hi),
            T::arg_tol(),
            what,
        );
        match (r, err.into_inner()) {
            (Ok(x), None) => Ok(x),
            (Ok(_), Some(m)) | (Err(_), Some(m)) => Err(Error::Solver {
                message: m,
                trace: what.to_string(),
            }),
            (Err(e), None) => Err(e),
        }
    }

    /// Evaluates a member of the function family, enforcing its domain.
    pub fn eval(&self, which: FamilyFn, x: T) -> Result<T> {
        let dom = |ok: bool, domain: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::Domain {
                    what: "family argument",
                    x: x.to_f64_lossy(),
                    domain: format!("{which}: {domain}"),
                })
            }
        };
        let v = match which {
            FamilyFn::Phi0 => {
                dom(x >= T::zero(), "[0, inf)".into())?;
                psi_unchecked(&self.ctx, T::zero(), x)
            }
            FamilyFn::Phi | FamilyFn::PhiBar | FamilyFn::PhiTilde => {
                let b = self.single_breakpoint(which)?;
                dom(x >= b, format!("[{b}, inf)"))?;
                self.psi_from(self.piece_ending_at(b), x)
            }
            FamilyFn::Omega1 => {
                let (a1, x2) = (self.need(self.ctx.consts.a1, "a1")?, self.need_iv_level(self.levels.x2, "x2")?);
                let gap_lo = self.omega1_gap_start()?;
                dom(
                    (x >= a1 && x <= gap_lo) || x >= x2,
                    format!("[{a1}, {gap_lo}] U [{x2}, inf)"),
                )?;
                self.psi_from(self.pieces[0], x)
            }
            FamilyFn::Omega2 => {
                let x0 = self.need_iv_level(self.ctx.consts.x0, "x0")?;
                let x1 = self.need_iv_level(self.levels.x1, "x1")?;
                dom(x >= x0, format!("[{x0}, inf)"))?;
                if x < x1 {
                    self.psi_from(self.pieces[2], x)
                } else {
                    self.psi_from(self.pieces[0], x)
                }
            }
            FamilyFn::Omega3 => {
                let x4 = self.need_pm_level(self.levels.x4, "x4")?;
                let gap_lo = self.omega3_gap_start()?;
                dom(
                    (x >= T::zero() && x <= gap_lo) || x >= x4,
                    format!("[0, {gap_lo}] U [{x4}, inf)"),
                )?;
                psi_unchecked(&self.ctx, T::zero(), x)
            }
            FamilyFn::Omega4 => {
                let x0 = self.need_pm_level(self.ctx.consts.x0, "x0")?;
                let x3 = self.need_pm_level(self.levels.x3, "x3")?;
                dom(x >= x0, format!("[{x0}, inf)"))?;
                if x < x3 {
                    self.psi_from(self.pieces[1], x)
                } else {
                    psi_unchecked(&self.ctx, T::zero(), x)
                }
            }
        };
        if v.is_nan() {
            return Err(Error::Solver {
                message: format!("{which} could not be evaluated at {x}"),
                trace: self.label.to_string(),
            });
        }
        Ok(v)
    }

    fn need(&self, v: Option<T>, what: &str) -> Result<T> {
        v.ok_or_else(|| Error::Solver {
            message: format!("{what} is undefined for this parameter set"),
            trace: self.label.to_string(),
        })
    }

    fn need_iv_level(&self, v: Option<T>, what: &str) -> Result<T> {
        if self.label != CaseLabel::new(SignRegime::BothPositive, SubCase::IV) {
            return Err(Error::Domain {
                what: "family function",
                x: f64::NAN,
                domain: format!("{what} only exists in case both-positive / iv, not {}", self.label),
            });
        }
        self.need(v, what)
    }

    fn need_pm_level(&self, v: Option<T>, what: &str) -> Result<T> {
        if self.label != CaseLabel::new(SignRegime::PlusPositiveMinusNonpositive, SubCase::II) {
            return Err(Error::Domain {
                what: "family function",
                x: f64::NAN,
                domain: format!(
                    "{what} only exists in case plus-positive-minus-nonpositive / ii, not {}",
                    self.label
                ),
            });
        }
        self.need(v, what)
    }

    /// Breakpoint for the single-switch functions phi, phi_bar, phi_tilde.
    fn single_breakpoint(&self, which: FamilyFn) -> Result<T> {
        use SignRegime::*;
        use SubCase::*;
        let b = match (which, self.label.regime, self.label.sub_case) {
            (FamilyFn::Phi, BothPositive, I) | (FamilyFn::Phi, PlusNonpositiveMinusPositive, AAtMostA1) => {
                Some(self.ctx.a())
            }
            (FamilyFn::PhiBar, BothPositive, II) => self.ctx.consts.x0,
            (FamilyFn::PhiTilde, BothPositive, III) | (FamilyFn::PhiTilde, PlusNonpositiveMinusPositive, AAboveA1) => {
                self.ctx.consts.a1
            }
            _ => Option::None,
        };
        b.ok_or_else(|| Error::Domain {
            what: "family function",
            x: f64::NAN,
            domain: format!("{which} is not defined in case {}", self.label),
        })
    }

    /// `(g')_2^{-1}(g'(x2))`, the left end of the gap in the domain of omega_1.
    fn omega1_gap_start(&self) -> Result<T> {
        let x2 = self.need_iv_level(self.levels.x2, "x2")?;
        self.inverse_on(self.pieces[1], self.gp(x2))
    }

    /// `(g-hat')_-^{-1}(g'(x4))`, the left end of the gap in the domain of omega_3.
    fn omega3_gap_start(&self) -> Result<T> {
        let x4 = self.need_pm_level(self.levels.x4, "x4")?;
        self.inverse_on(self.pieces[0], self.gp(x4))
    }

    fn fill_levels(&mut self) -> Result<()> {
        use SignRegime::*;
        use SubCase::*;
        match (self.label.regime, self.label.sub_case) {
            (BothPositive, I) | (PlusNonpositiveMinusPositive, AAtMostA1) => {
                let a4 = self.inverse_on(self.last_piece(), self.gp(T::zero()))?;
                self.levels.a4 = Some(a4);
            }
            (BothPositive, IV) => {
                let k = self.ctx.consts;
                let (a1, x0) = (self.need(k.a1, "a1")?, self.need(k.x0, "x0")?);
                let last = self.pieces[3];
                let a5 = if self.gp(x0) >= self.gp(a1) {
                    x0
                } else {
                    self.inverse_on(last, self.gp(a1))?
                };
                let a6 = self.inverse_on(last, self.gp(self.ctx.a()))?;
                self.levels.a5 = Some(a5);
                self.levels.a6 = Some(a6);
                let span = Bracket::new(a5, a6);
                let x1 = first_true(|x| self.crossover_integral_1(x) >= T::zero(), span, T::arg_tol()).unwrap_or(a6);
                let x2 = first_true(|x| self.crossover_integral_2(x) >= T::zero(), span, T::arg_tol()).unwrap_or(a6);
                self.levels.x1 = Some(x1);
                self.levels.x2 = Some(x2);
            }
            (PlusPositiveMinusNonpositive, II) => {
                let x0 = self.need(self.ctx.consts.x0, "x0")?;
                let a7 = self.inverse_on(self.pieces[2], self.gp(self.ctx.a()))?;
                self.levels.a7 = Some(a7);
                let span = Bracket::new(x0, a7);
                let x3 = first_true(|x| self.crossover_integral_3(x) >= T::zero(), span, T::arg_tol()).unwrap_or(a7);
                let x4 = first_true(|x| self.crossover_integral_4(x) >= T::zero(), span, T::arg_tol()).unwrap_or(a7);
                self.levels.x3 = Some(x3);
                self.levels.x4 = Some(x4);
            }
            _ => {}
        }
        Ok(())
    }

    /// Integral from `(g')_1^{-1}(g'(x))` to `(g')_3^{-1}(g'(x))` (defines x1).
    pub fn crossover_integral_1(&self, x: T) -> T {
        self.psi_from(self.pieces[0], x) - self.psi_from(self.pieces[2], x)
    }

    /// `psi((g')_2^{-1}(g'(x)), x)` (defines x2).
    pub fn crossover_integral_2(&self, x: T) -> T {
        self.psi_from(self.pieces[1], x)
    }

    /// Integral from 0 to `(g-hat')_+^{-1}(g'(x))` (defines x3).
    pub fn crossover_integral_3(&self, x: T) -> T {
        psi_unchecked(&self.ctx, T::zero(), x) - self.psi_from(self.pieces[1], x)
    }

    /// `psi((g-hat')_-^{-1}(g'(x)), x)` (defines x4).
    pub fn crossover_integral_4(&self, x: T) -> T {
        self.psi_from(self.pieces[0], x)
    }

    pub fn crossover_levels(&self) -> Option<Crossovers<T>> {
        match (self.levels.x1, self.levels.x2, self.levels.x3, self.levels.x4) {
            (Some(x1), Some(x2), _, _) => Some(Crossovers::BothPositiveIv { x1, x2 }),
            (_, _, Some(x3), Some(x4)) => Some(Crossovers::PlusPositiveIi { x3, x4 }),
            _ => None,
        }
    }

    /// A level beyond which no maximiser can place its upper barrier: the
    /// point on the last convex piece where g' exceeds its running maximum and
    /// `psi(b, .)` has passed beta, `b` being the last breakpoint.
    pub fn upper_bound(&self) -> Result<T> {
        let last = self.last_piece();
        let b = last.lo;
        let peak = std::iter::once(T::zero())
            .chain(self.profile.breakpoints.iter().copied())
            .map(|x| self.gp(x))
            .fold(T::neg_infinity(), T::max);
        let xa = self.inverse_on(last, peak)?;
        let beta = self.ctx.beta();
        if psi_unchecked(&self.ctx, b, xa) >= beta {
            return Ok(xa);
        }
        self.invert_up(|x| psi_unchecked(&self.ctx, b, x), beta, xa, None, "psi(b, .) = beta")
    }

    fn pair(&self, z1: T, z2: T) -> BarrierPair<T> {
        BarrierPair {
            z1,
            z2,
            zeta: zeta(&self.ctx, z1, z2),
        }
    }

    /// Computes the maximiser set for the active case.
    pub fn solve(&self) -> Result<BarrierSolutionSet<T>> {
        use SignRegime::*;
        use SubCase::*;
        let mut trace = Vec::new();
        let mut degenerate = false;
        let pairs = match (self.label.regime, self.label.sub_case) {
            (BothNonpositive, _) | (PlusPositiveMinusNonpositive, I) => {
                trace.push(format!("{}: g convex, pair (0, phi_0^-1(beta))", self.label));
                vec![self.convex_pair()?]
            }
            (BothPositive, I) | (PlusNonpositiveMinusPositive, AAtMostA1) => {
                trace.push(format!("{}: single switch at a, pair from phi^-1(beta)", self.label));
                vec![self.single_switch(FamilyFn::Phi)?]
            }
            (BothPositive, II) => {
                trace.push(format!("{}: single switch at x0, pair from phi_bar^-1(beta)", self.label));
                vec![self.single_switch(FamilyFn::PhiBar)?]
            }
            (BothPositive, III) | (PlusNonpositiveMinusPositive, AAboveA1) => {
                trace.push(format!("{}: single switch at a1, pair from phi_tilde^-1(beta)", self.label));
                vec![self.single_switch(FamilyFn::PhiTilde)?]
            }
            (BothPositive, _) => self.two_family(Family::Iv, &mut trace, &mut degenerate)?,
            (PlusPositiveMinusNonpositive, _) => self.two_family(Family::PmIi, &mut trace, &mut degenerate)?,
            (PlusNonpositiveMinusPositive, _) => unreachable!("mixed regime has two sub-cases"),
        };
        let set = BarrierSolutionSet {
            pairs,
            case: self.label,
            profile: self.profile.clone(),
            levels: self.levels,
            branch_trace: trace,
            degenerate_triple: degenerate,
        };
        self.validate(&set)?;
        Ok(set)
    }

    fn convex_pair(&self) -> Result<BarrierPair<T>> {
        let beta = self.ctx.beta();
        let z2 = self.invert_up(
            |x| psi_unchecked(&self.ctx, T::zero(), x),
            beta,
            T::zero(),
            None,
            "phi_0(z2) = beta",
        )?;
        Ok(self.pair(T::zero(), z2))
    }

    fn single_switch(&self, which: FamilyFn) -> Result<BarrierPair<T>> {
        let b = self.single_breakpoint(which)?;
        let dec = self.piece_ending_at(b);
        let beta = self.ctx.beta();
        let what = format!("{which}(z2) = beta");
        let z2 = self.invert_up(|x| self.psi_from(dec, x), beta, b, None, &what)?;
        let z1 = self.inverse_on(dec, self.gp(z2))?;
        debug_assert!(self.piece_starting_at(b).direction == Direction::Increasing);
        Ok(self.pair(z1, z2))
    }

    /// Shared logic of the two cases with competing candidate families.
    fn two_family(&self, fam: Family, trace: &mut Vec<String>, degenerate: &mut bool) -> Result<Vec<BarrierPair<T>>> {
        let beta = self.ctx.beta();
        let tol = T::lit(1e-10) * T::one().max(beta);
        let tie = T::lit(1e-9);
        let spec = self.family_spec(fam)?;

        // First family: omega_1 / omega_3, defined on [start, gap_lo] U [gap_hi, inf).
        let first_at_gap_lo = (spec.first)(self, spec.gap_lo);
        let first_at_gap_hi = (spec.first)(self, spec.gap_hi);
        let mut first_z2: Vec<T> = Vec::new();
        if (beta - first_at_gap_hi).abs() <= tol && spec.gap_lo < spec.gap_hi {
            *degenerate = true;
            first_z2.extend([spec.gap_lo, spec.gap_hi]);
            trace.push(format!(
                "beta = {}({}) within {:e}: two upper barriers share one lower barrier",
                spec.first_name,
                spec.gap_hi,
                tol.to_f64_lossy()
            ));
        } else if beta <= first_at_gap_lo {
            first_z2.push(self.invert_up(|x| (spec.first)(self, x), beta, spec.first_start, Some(spec.gap_lo), spec.first_name)?);
        } else if beta >= first_at_gap_hi {
            first_z2.push(self.invert_up(|x| (spec.first)(self, x), beta, spec.gap_hi, None, spec.first_name)?);
        } else {
            trace.push(format!(
                "beta falls in the jump of {} between {} and {}; no preimage",
                spec.first_name, first_at_gap_lo, first_at_gap_hi
            ));
        }

        // Second family: omega_2 / omega_4, first branch on [x0, switch), second on [switch, inf).
        let second_left = (spec.second_left)(self, spec.switch);
        let second_right = (spec.second_right)(self, spec.switch);
        let second = if beta < second_left {
            let z2 = self.invert_up(|x| (spec.second_left)(self, x), beta, spec.second_start, Some(spec.switch), spec.second_name)?;
            Some((z2, true))
        } else if beta >= second_right {
            let z2 = self.invert_up(|x| (spec.second_right)(self, x), beta, spec.switch, None, spec.second_name)?;
            Some((z2, false))
        } else {
            trace.push(format!(
                "beta falls in the jump of {} between {} and {}; no preimage",
                spec.second_name, second_left, second_right
            ));
            None
        };

        let first_pairs = |lower: &dyn Fn(T) -> Result<T>| -> Result<Vec<BarrierPair<T>>> {
            first_z2
                .iter()
                .map(|&z2| Ok(self.pair(lower(z2)?, z2)))
                .collect()
        };
        let first_lower = |z2: T| (spec.first_lower)(self, z2);
        let second_pair = |z2: T, left: bool| -> Result<BarrierPair<T>> {
            let z1 = if left {
                (spec.second_lower_left)(self, z2)?
            } else {
                (spec.second_lower_right)(self, z2)?
            };
            Ok(self.pair(z1, z2))
        };

        let in_upper_set = beta > second_right;
        let mut out = match (first_z2.is_empty(), second) {
            (true, None) => {
                return Err(Error::Solver {
                    message: format!("neither {} nor {} has a preimage of beta", spec.first_name, spec.second_name),
                    trace: trace.join("; "),
                })
            }
            (true, Some((z2, left))) => {
                trace.push(format!("only the {} family applies", spec.second_name));
                vec![second_pair(z2, left)?]
            }
            (false, None) => {
                trace.push(format!("only the {} family applies", spec.first_name));
                first_pairs(&first_lower)?
            }
            (false, Some(_)) if in_upper_set => {
                trace.push(format!(
                    "beta > {}(switch) = {}: first family selected",
                    spec.second_name, second_right
                ));
                first_pairs(&first_lower)?
            }
            (false, Some((z2b, left))) => {
                let g_first = self.gp(first_z2[0]);
                let g_second = self.gp(z2b);
                let rel = (g_first - g_second).abs() / g_first.max(g_second);
                if rel <= tie {
                    trace.push(format!(
                        "g' at both candidate upper barriers agrees within {:e}: both families returned",
                        tie.to_f64_lossy()
                    ));
                    let mut v = first_pairs(&first_lower)?;
                    v.push(second_pair(z2b, left)?);
                    v
                } else if g_first < g_second {
                    trace.push(format!("g'({}^-1) < g'({}^-1): first family", spec.first_name, spec.second_name));
                    first_pairs(&first_lower)?
                } else {
                    trace.push(format!("g'({}^-1) > g'({}^-1): second family", spec.first_name, spec.second_name));
                    vec![second_pair(z2b, left)?]
                }
            }
        };
        out.sort_by(|a, b| a.z2.partial_cmp(&b.z2).unwrap_or(std::cmp::Ordering::Equal));
        Ok(out)
    }

    fn family_spec(&self, fam: Family) -> Result<FamilySpec<T>> {
        match fam {
            Family::Iv => {
                let a1 = self.need(self.ctx.consts.a1, "a1")?;
                let x0 = self.need(self.ctx.consts.x0, "x0")?;
                let x1 = self.need(self.levels.x1, "x1")?;
                let x2 = self.need(self.levels.x2, "x2")?;
                Ok(FamilySpec {
                    first_name: "omega_1",
                    second_name: "omega_2",
                    first_start: a1,
                    gap_lo: self.omega1_gap_start()?,
                    gap_hi: x2,
                    first: |l, x| l.psi_from(l.pieces[0], x),
                    first_lower: |l, z2| l.inverse_on(l.pieces[0], l.gp(z2)),
                    second_start: x0,
                    switch: x1,
                    second_left: |l, x| l.psi_from(l.pieces[2], x),
                    second_right: |l, x| l.psi_from(l.pieces[0], x),
                    second_lower_left: |l, z2| l.inverse_on(l.pieces[2], l.gp(z2)),
                    second_lower_right: |l, z2| l.inverse_on(l.pieces[0], l.gp(z2)),
                })
            }
            Family::PmIi => {
                let x0 = self.need(self.ctx.consts.x0, "x0")?;
                let x3 = self.need(self.levels.x3, "x3")?;
                let x4 = self.need(self.levels.x4, "x4")?;
                Ok(FamilySpec {
                    first_name: "omega_3",
                    second_name: "omega_4",
                    first_start: T::zero(),
                    gap_lo: self.omega3_gap_start()?,
                    gap_hi: x4,
                    first: |l, x| psi_unchecked(&l.ctx, T::zero(), x),
                    first_lower: |_, _| Ok(T::zero()),
                    second_start: x0,
                    switch: x3,
                    second_left: |l, x| l.psi_from(l.pieces[1], x),
                    second_right: |l, x| psi_unchecked(&l.ctx, T::zero(), x),
                    second_lower_left: |l, z2| l.inverse_on(l.pieces[1], l.gp(z2)),
                    second_lower_right: |_, _| Ok(T::zero()),
                })
            }
        }
    }

    /// Rejects pairs that violate `psi(z1, z2) = beta` or smooth pasting.
    fn validate(&self, set: &BarrierSolutionSet<T>) -> Result<()> {
        let beta = self.ctx.beta();
        let guard = T::lit(1e-6).max(T::epsilon() * T::lit(1024.0));
        for p in &set.pairs {
            let r = psi_unchecked(&self.ctx, p.z1, p.z2);
            let bad_psi = !((r - beta).abs() <= guard * T::one().max(beta));
            let bad_order = !(p.z1 >= T::zero() && p.z1 + beta < p.z2);
            let bad_paste = p.z1 > T::zero() && {
                let (u, v) = (self.gp(p.z1), self.gp(p.z2));
                !((u - v).abs() <= guard * u.max(v))
            };
            if bad_psi || bad_order || bad_paste {
                return Err(Error::Solver {
                    message: format!(
                        "pair ({}, {}) fails validation: psi = {r}, beta = {beta}",
                        p.z1, p.z2
                    ),
                    trace: set.branch_trace.join("; "),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Family {
    Iv,
    PmIi,
}

type FamFn<T> = fn(&Landscape<T>, T) -> T;
type LowerFn<T> = fn(&Landscape<T>, T) -> Result<T>;

struct FamilySpec<T> {
    first_name: &'static str,
    second_name: &'static str,
    first_start: T,
    gap_lo: T,
    gap_hi: T,
    first: FamFn<T>,
    first_lower: LowerFn<T>,
    second_start: T,
    switch: T,
    second_left: FamFn<T>,
    second_right: FamFn<T>,
    second_lower_left: LowerFn<T>,
    second_lower_right: LowerFn<T>,
}

/// Classifies, builds the landscape and solves in one call.
pub fn solve_barriers<T: Real>(ctx: &ScaleContext<T>) -> Result<BarrierSolutionSet<T>> {
    Landscape::new(ctx)?.solve()
}
