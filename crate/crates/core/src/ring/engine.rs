//! Normal-form reduction of tower monomials.
//!
//! Each component `u` is processed from the top level `r_u` down. In the
//! ambient tower a level without `t_l` must carry exactly one `d_l`, which is
//! integrated out along the `P^1` fibre. The first level carrying `t_l`
//! (and no `d_l`) restricts the class to the exceptional divisor `Delta_l`,
//! a `P^1`-bundle over `Delta_(l-1)`. There the remaining powers of `t_l`
//! reduce through `t_l^2 = s * t_l t_(l-1)` and the fibre integral of `t_l` is
//! `-1`; pullbacks integrate to 0 and any `d_(l')` with `l' <= l` restricts to
//! 0. Reaching level 0 lands on `D_u`, with `t_0 = [D_u]`. What survives is a
//! signed base monomial looked up in the table of `X`.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::rational::Rational;

use super::class::{TowerClass, TowerMonomial};
use super::geometry::TowerShape;

/// The sign `s` in `t_l^2 = s * t_l t_(l-1)` on `Delta_l`.
///
/// `Delta_l = P(N + O)` with `c_1(N) = t_(l-1)` and `t_l` restricting to the
/// tautological class `c_1(O(-1))`, whose Grothendieck relation is
/// `t_l^2 = c_1(N) t_l`.
pub const DELTA_SELF_INTERSECTION_SIGN: i32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Step {
    DegreeFilter { degree: u32, expected: u32 },
    DSquared { component: usize, level: usize },
    DTimesT { component: usize, level: usize },
    StripD { component: usize, level: usize },
    Unsaturated { component: usize, level: usize },
    EnterDelta { component: usize, level: usize },
    PullbackVanishes { component: usize, level: usize },
    DeltaDescend { component: usize, level: usize, carried: u32 },
    LeftoverD { component: usize, level: usize },
    ReachDivisor { component: usize, power: u32 },
    BaseLookup { sign: i32, monomial: String },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::DegreeFilter { degree, expected } => {
                write!(f, "degree {degree} != {expected}: zero")
            }
            Step::DSquared { component, level } => write!(f, "d{component}_{level}^2 = 0"),
            Step::DTimesT { component, level } => {
                write!(f, "d{component}_{level} t{component}_{level} = 0")
            }
            Step::StripD { component, level } => write!(f, "strip d{component}_{level}"),
            Step::Unsaturated { component, level } => {
                write!(f, "fiber direction {component}_{level} unsaturated: zero")
            }
            Step::EnterDelta { component, level } => {
                write!(f, "enter Delta-tower at t{component}_{level}")
            }
            Step::PullbackVanishes { component, level } => {
                write!(f, "pullback integrates to 0 on Delta{component}_{level}")
            }
            Step::DeltaDescend { component, level, carried } => {
                write!(f, "Delta-descent {component}: level {level} -> {} (carry t^{carried})", level - 1)
            }
            Step::LeftoverD { component, level } => {
                write!(f, "d{component}_{level} restricts to 0 on Delta")
            }
            Step::ReachDivisor { component, power } => {
                write!(f, "base [D{component}]^{power}")
            }
            Step::BaseLookup { sign, monomial } => write!(f, "lookup {sign:+} <{monomial}>"),
        }
    }
}

/// Result of reducing one monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    Zero,
    /// `sign * <g^base, [X]>`
    Base { sign: i32, base: Vec<u32> },
}

fn record(steps: &mut Option<&mut Vec<Step>>, step: impl FnOnce() -> Step) {
    if let Some(s) = steps.as_deref_mut() {
        s.push(step());
    }
}

/// Reduces component `u` to `sign * [D_u]^power`, or `None` if it vanishes.
fn reduce_component(
    u: usize,
    d: &[u32],
    t: &[u32],
    steps: &mut Option<&mut Vec<Step>>,
) -> Option<(i32, u32)> {
    let mut level = d.len();
    let mut excess;
    loop {
        if level == 0 {
            return Some((1, 0));
        }
        let (i, j) = (d[level - 1], t[level - 1]);
        if i >= 2 {
            record(steps, || Step::DSquared { component: u, level });
            return None;
        }
        if j == 0 {
            if i == 1 {
                record(steps, || Step::StripD { component: u, level });
                level -= 1;
                continue;
            }
            record(steps, || Step::Unsaturated { component: u, level });
            return None;
        }
        if i >= 1 {
            record(steps, || Step::DTimesT { component: u, level });
            return None;
        }
        record(steps, || Step::EnterDelta { component: u, level });
        excess = j - 1;
        break;
    }

    // On Delta_level carrying t_level^excess times a pullback.
    let mut sign = 1i32;
    loop {
        if excess == 0 {
            record(steps, || Step::PullbackVanishes { component: u, level });
            return None;
        }
        let carried = excess - 1;
        sign = -sign;
        if carried % 2 == 1 {
            sign *= DELTA_SELF_INTERSECTION_SIGN;
        }
        record(steps, || Step::DeltaDescend { component: u, level, carried });
        level -= 1;
        if level == 0 {
            let power = carried + 1;
            record(steps, || Step::ReachDivisor { component: u, power });
            return Some((sign, power));
        }
        if d[level - 1] > 0 {
            record(steps, || Step::LeftoverD { component: u, level });
            return None;
        }
        excess = t[level - 1] + carried;
    }
}

/// Reduces a monomial to a signed base monomial of degree `n`, without table lookup.
pub fn reduce_monomial(shape: &TowerShape, m: &TowerMonomial, mut steps: Option<&mut Vec<Step>>) -> Reduced {
    let expected = shape.pairing_dim();
    let degree = m.degree();
    if degree != expected {
        record(&mut steps, || Step::DegreeFilter { degree, expected });
        return Reduced::Zero;
    }
    let mut sign = 1;
    let mut base = m.base().to_vec();
    for u in (1..=shape.components()).rev() {
        match reduce_component(u, m.d_exps(u), m.t_exps(u), &mut steps) {
            None => return Reduced::Zero,
            Some((s, power)) => {
                sign *= s;
                base[shape.base().divisor_generator(u)] += power;
            }
        }
    }
    record(&mut steps, || Step::BaseLookup { sign, monomial: shape.base().render_base(&base) });
    Reduced::Base { sign, base }
}

fn check_shape(shape: &TowerShape, m: &TowerMonomial) -> Result<()> {
    let fits = m.base().len() == shape.base().generator_count()
        && m.components() == shape.components()
        && (1..=shape.components()).all(|u| {
            let r = shape.ranks()[u - 1];
            m.d_exps(u).len() == r && m.t_exps(u).len() == r
        });
    if fits {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("monomial does not match the tower shape".into()))
    }
}

/// `<m, [X(D, r)]>` for a single monomial.
///
/// Fails if the monomial was built for a different tower shape.
pub fn pair_monomial(shape: &TowerShape, m: &TowerMonomial) -> Result<Rational> {
    check_shape(shape, m)?;
    match reduce_monomial(shape, m, None) {
        Reduced::Zero => Ok(Rational::zero()),
        Reduced::Base { sign, base } => {
            let value = shape.base().lookup(&base)?;
            Ok(if sign < 0 { -value } else { value.clone() })
        }
    }
}

/// `<c, [X(D, r)]>`; monomials of the wrong degree contribute 0.
pub fn pair_eval(shape: &TowerShape, class: &TowerClass) -> Result<Rational> {
    let mut total = Rational::zero();
    for (m, c) in class.terms() {
        let v = pair_monomial(shape, m)?;
        if !v.is_zero() {
            total += c * v;
        }
    }
    Ok(total)
}

/// Pairs many classes, spreading the work according to `exec`.
pub fn pair_eval_batch(shape: &TowerShape, classes: &[TowerClass], exec: Execution) -> Result<Vec<Rational>> {
    map_ordered(exec, classes, |c| pair_eval(shape, c)).into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialTrace {
    pub monomial: String,
    pub steps: Vec<Step>,
}

/// [`pair_eval`] that also reports the reduction rules applied to each monomial.
pub fn pair_eval_traced(shape: &TowerShape, class: &TowerClass) -> Result<(Rational, Vec<MonomialTrace>)> {
    let mut total = Rational::zero();
    let mut traces = Vec::new();
    for (m, c) in class.terms() {
        check_shape(shape, m)?;
        let mut steps = Vec::new();
        let reduced = reduce_monomial(shape, m, Some(&mut steps));
        if let Reduced::Base { sign, base } = reduced {
            let v = shape.base().lookup(&base)?;
            total += if sign < 0 { -(c * v) } else { c * v };
        }
        traces.push(MonomialTrace { monomial: m.render(shape), steps });
    }
    Ok((total, traces))
}
