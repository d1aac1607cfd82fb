//! Closed-form values of extremal pairings, independent of the reduction engine.
//!
//! A nonvanishing pairing `<eta d^I t^J, [X(D, r)]>` forces `|I| + |J| >= r`
//! and `sigma(I) + sigma(J) >= 2^r - 1`, with equality exactly on the all-`d`
//! pattern, where the value is `<eta, [X]>`. With one extra factor `t_l`,
//! equality happens exactly for `J = (1^l, 0)`, `I = (0^l, 1^(r-l))`, where the
//! value is `(-1)^l <eta, [D]>`. With the extra factor only equality in the
//! grading decides the value: `t_2^3` has `|J| = r` on `X(D, 2)` and pairs to
//! a nonzero multiple of `<[D]>`. These statements decide many monomials
//! without any reduction; anything else is reported as not covered.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{sigma_extremal, sigma_weight, MultiIndex};
use crate::rational::Rational;

use super::class::{TowerClass, TowerMonomial};
use super::geometry::TowerShape;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    Value(Rational),
    NotCovered,
}

impl ClosedForm {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            ClosedForm::Value(v) => Some(v),
            ClosedForm::NotCovered => None,
        }
    }
}

/// An extra factor `t_(component, level)` multiplying the monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtraT {
    pub component: usize,
    pub level: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bounds {
    Fail,
    Equality,
    Strict,
}

fn bounds(i: &MultiIndex, j: &MultiIndex) -> Bounds {
    let r = i.len() as u64;
    let norm = i.norm() + j.norm();
    let sigma: BigUint = sigma_weight(i) + sigma_weight(j);
    let extremal = sigma_extremal(i.len());
    if norm < r || sigma < extremal {
        Bounds::Fail
    } else if norm == r || sigma == extremal {
        Bounds::Equality
    } else {
        Bounds::Strict
    }
}

/// With an extra `t` factor, `|I| + |J| = r` alone does not force vanishing.
fn bounds_with_extra(i: &MultiIndex, j: &MultiIndex) -> Bounds {
    let sigma: BigUint = sigma_weight(i) + sigma_weight(j);
    match bounds(i, j) {
        Bounds::Equality if sigma != sigma_extremal(i.len()) => Bounds::Strict,
        b => b,
    }
}

fn all_d_pattern(i: &MultiIndex, j: &MultiIndex) -> bool {
    i.is_all_ones() && j.is_zero()
}

/// `J = (1^l, 0^(r-l))`, `I = (0^l, 1^(r-l))`.
fn mixed_pattern(i: &MultiIndex, j: &MultiIndex, l: usize) -> bool {
    let r = i.len();
    l >= 1
        && l <= r
        && (0..r).all(|k| {
            let below = k < l;
            j.exps()[k] == u32::from(below) && i.exps()[k] == u32::from(!below)
        })
}

fn check_base(eta: &TowerClass) -> Result<()> {
    if eta.is_base() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("eta must be a class pulled back from the base".into()))
    }
}

fn check_index(shape: &TowerShape, u: usize, idx: &MultiIndex) -> Result<()> {
    let r = shape.ranks()[u - 1];
    if idx.len() != r {
        return Err(Error::ShapeMismatch(format!(
            "multi-index of length {} for a component of rank {r}",
            idx.len()
        )));
    }
    Ok(())
}

/// `<eta, [X]>`
fn eta_on_x(shape: &TowerShape, eta: &TowerClass) -> Result<Rational> {
    shape.base().pair(eta)
}

/// `<eta, [D_v]> = <eta [D_v], [X]>`
fn eta_on_divisor(shape: &TowerShape, eta: &TowerClass, v: usize) -> Result<Rational> {
    let dv = TowerClass::monomial(
        TowerMonomial::generator(shape, shape.base().divisor_generator(v)),
        Rational::from_integer(1.into()),
    );
    shape.base().pair(&(eta * &dv))
}

fn sign(l: usize) -> Rational {
    Rational::from_integer(if l.is_multiple_of(2) { 1.into() } else { (-1).into() })
}

fn require_single(shape: &TowerShape) -> Result<()> {
    if shape.is_single_component() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("closed form needs a single-component tower".into()))
    }
}

/// `<eta d^I t^J, [X(D, r)]>` on a single-component tower.
pub fn closed_form_d_ij(shape: &TowerShape, i: &MultiIndex, j: &MultiIndex, eta: &TowerClass) -> Result<ClosedForm> {
    require_single(shape)?;
    check_base(eta)?;
    check_index(shape, 1, i)?;
    check_index(shape, 1, j)?;
    Ok(match bounds(i, j) {
        Bounds::Fail => ClosedForm::Value(Rational::zero()),
        Bounds::Equality if all_d_pattern(i, j) => ClosedForm::Value(eta_on_x(shape, eta)?),
        Bounds::Equality => ClosedForm::Value(Rational::zero()),
        Bounds::Strict => ClosedForm::NotCovered,
    })
}

/// `<t_l eta d^I t^J, [X(D, r)]>` on a single-component tower.
pub fn closed_form_td_ij(
    shape: &TowerShape,
    level: usize,
    i: &MultiIndex,
    j: &MultiIndex,
    eta: &TowerClass,
) -> Result<ClosedForm> {
    require_single(shape)?;
    closed_form_nc(shape, std::slice::from_ref(i), std::slice::from_ref(j), eta, Some(ExtraT { component: 1, level }))
}

/// `<[t_(v,l)] eta prod_u d_u^(P_u) t_u^(Q_u), [X(D, r)]>` on any tower.
///
/// With an extra `t_(v,l)` the extremal value is `(-1)^l <eta, [D_v]>`.
pub fn closed_form_nc(
    shape: &TowerShape,
    p: &[MultiIndex],
    q: &[MultiIndex],
    eta: &TowerClass,
    extra: Option<ExtraT>,
) -> Result<ClosedForm> {
    check_base(eta)?;
    let s = shape.components();
    if p.len() != s || q.len() != s {
        return Err(Error::ShapeMismatch(format!("expected {s} index pairs")));
    }
    for u in 1..=s {
        check_index(shape, u, &p[u - 1])?;
        check_index(shape, u, &q[u - 1])?;
    }
    if let Some(x) = extra {
        if x.component == 0 || x.component > s {
            return Err(Error::IndexOutOfRange { index: x.component, bound: s });
        }
        let r = shape.ranks()[x.component - 1];
        if x.level == 0 || x.level > r {
            return Err(Error::IndexOutOfRange { index: x.level, bound: r });
        }
    }

    let mut all_on_pattern = true;
    let mut any_strict = false;
    for u in 1..=s {
        let (pu, qu) = (&p[u - 1], &q[u - 1]);
        let (on_pattern, b) = match extra {
            Some(x) if x.component == u => (mixed_pattern(pu, qu, x.level), bounds_with_extra(pu, qu)),
            _ => (all_d_pattern(pu, qu), bounds(pu, qu)),
        };
        match b {
            Bounds::Fail => return Ok(ClosedForm::Value(Rational::zero())),
            Bounds::Equality if !on_pattern => return Ok(ClosedForm::Value(Rational::zero())),
            Bounds::Equality => {}
            Bounds::Strict => {
                any_strict = true;
                all_on_pattern = false;
            }
        }
    }
    if any_strict || !all_on_pattern {
        return Ok(ClosedForm::NotCovered);
    }
    Ok(ClosedForm::Value(match extra {
        None => eta_on_x(shape, eta)?,
        Some(x) => sign(x.level) * eta_on_divisor(shape, eta, x.component)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::ring::BaseGeometry;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn curve(r: usize) -> TowerShape {
        let base = BaseGeometry::from_entries(1, &["D"], [("w", int(1)), ("D", int(1))]).unwrap();
        TowerShape::new(base, vec![r]).unwrap()
    }

    fn base_class(shape: &TowerShape, text: &str) -> TowerClass {
        TowerClass::monomial(TowerMonomial::parse(shape, text).unwrap(), int(1))
    }

    #[test]
    fn all_d_extremal() {
        let s = curve(2);
        let w = base_class(&s, "w");
        assert_eq!(closed_form_d_ij(&s, &mi(&[1, 1]), &mi(&[0, 0]), &w).unwrap(), ClosedForm::Value(int(1)));
        assert_eq!(closed_form_d_ij(&s, &mi(&[0, 1]), &mi(&[0, 0]), &w).unwrap(), ClosedForm::Value(int(0)));
        assert_eq!(closed_form_d_ij(&s, &mi(&[1, 1]), &mi(&[1, 0]), &w).unwrap(), ClosedForm::NotCovered);
    }

    #[test]
    fn mixed_extremal() {
        let one = |s: &TowerShape| TowerClass::one(s);
        let s1 = curve(1);
        assert_eq!(closed_form_td_ij(&s1, 1, &mi(&[0]), &mi(&[1]), &one(&s1)).unwrap(), ClosedForm::Value(int(-1)));
        assert_eq!(closed_form_td_ij(&s1, 1, &mi(&[1]), &mi(&[0]), &one(&s1)).unwrap(), ClosedForm::Value(int(0)));
        let s2 = curve(2);
        assert_eq!(closed_form_td_ij(&s2, 1, &mi(&[0, 1]), &mi(&[1, 0]), &one(&s2)).unwrap(), ClosedForm::Value(int(-1)));
        // extra t at a level other than |J| is off-pattern
        assert_eq!(closed_form_td_ij(&s2, 2, &mi(&[0, 1]), &mi(&[1, 0]), &one(&s2)).unwrap(), ClosedForm::Value(int(0)));
    }

    #[test]
    fn norm_equality_alone_is_not_decisive_with_extra_t() {
        let s2 = curve(2);
        let one = TowerClass::one(&s2);
        let cf = closed_form_td_ij(&s2, 2, &mi(&[0, 0]), &mi(&[0, 2]), &one).unwrap();
        assert_eq!(cf, ClosedForm::NotCovered);
        let m = TowerMonomial::parse(&s2, "t2^3").unwrap();
        assert_ne!(crate::ring::pair_monomial(&s2, &m).unwrap(), int(0));
    }

    #[test]
    fn rejects_non_base_eta() {
        let s = curve(1);
        let t = base_class(&s, "t1");
        assert!(closed_form_d_ij(&s, &mi(&[1]), &mi(&[0]), &t).is_err());
    }
}
