//! Polynomials in a small parameter `eps` with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EpsilonPolynomial {
    coeffs: BTreeMap<u32, Rational>,
}

/// Where the first positive root of a polynomial lies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    /// No positive root in `(0, value]`, and some root within `precision` above it.
    Finite(Rational),
    /// No positive root at all.
    Unbounded,
}

impl Bound {
    pub fn min(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Unbounded, b) | (b, Bound::Unbounded) => b,
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(if a <= b { a } else { b }),
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => f.write_str(&format_rational(v)),
            Bound::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl EpsilonPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: u32, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, Rational> {
        &self.coeffs
    }

    pub fn coefficient(&self, exp: u32) -> Rational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn lowest_term(&self) -> Option<(u32, &Rational)> {
        self.coeffs.iter().next().map(|(k, c)| (*k, c))
    }

    /// Sign for all sufficiently small positive `eps`; `None` for the zero polynomial.
    pub fn sign_near_zero(&self) -> Option<Ordering> {
        self.lowest_term().map(|(_, c)| c.cmp(&Rational::zero()))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (*e, c * k)))
    }

    pub fn shift(&self, by: u32) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (e + by, c.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                out.add_term(a + b, x * y);
            }
        }
        out
    }

    pub fn eval(&self, eps: &Rational) -> Rational {
        let Some(deg) = self.degree() else {
            return Rational::zero();
        };
        let mut acc = Rational::zero();
        for k in (0..=deg).rev() {
            acc = acc * eps + self.coefficient(k);
        }
        acc
    }

    /// Lower end of a bracket `(lo, lo + precision]` containing the first positive root.
    ///
    /// Exact: there are no roots in `(0, lo]`.
    pub fn first_positive_root(&self, precision: &Rational) -> Result<Bound> {
        if !precision.is_positive() {
            return Err(Error::NonPositiveEpsilon(format!("precision {}", format_rational(precision))));
        }
        if self.is_zero() {
            return Err(Error::NoPositiveEpsilon("polynomial vanishes identically".into()));
        }
        let dense = Dense::from_sparse(self).strip_low_zeros().squarefree();
        if dense.degree() == 0 {
            return Ok(Bound::Unbounded);
        }
        let chain = dense.sturm_chain();
        let zero = Rational::zero();
        let v0 = sign_changes(&chain, &zero);
        let roots_upto = |x: &Rational| v0 - sign_changes(&chain, x);
        let mut hi = dense.cauchy_bound();
        if roots_upto(&hi) == 0 {
            return Ok(Bound::Unbounded);
        }
        let mut lo = zero;
        while &hi - &lo > *precision || lo.is_zero() {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            if roots_upto(&mid) > 0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Bound::Finite(lo))
    }

    /// Number of distinct roots in `(0, x]`.
    pub fn positive_roots_upto(&self, x: &Rational) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::NoPositiveEpsilon("polynomial vanishes identically".into()));
        }
        if !x.is_positive() {
            return Ok(0);
        }
        let dense = Dense::from_sparse(self).strip_low_zeros().squarefree();
        let chain = dense.sturm_chain();
        Ok((sign_changes(&chain, &Rational::zero()) - sign_changes(&chain, x)) as usize)
    }

    /// `(exponent, "p/q")` pairs with exact coefficients.
    pub fn to_string_map(&self) -> BTreeMap<String, String> {
        self.coeffs.iter().map(|(e, c)| (e.to_string(), format_rational(c))).collect()
    }
}

impl fmt::Display for EpsilonPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            let show_coef = *e == 0 || !a.is_one();
            if show_coef {
                f.write_str(&format_rational(&a))?;
            }
            match e {
                0 => {}
                1 => write!(f, "{}e", if show_coef { "*" } else { "" })?,
                _ => write!(f, "{}e^{e}", if show_coef { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

/// Dense coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug)]
struct Dense(Vec<Rational>);

impl Dense {
    fn from_sparse(p: &EpsilonPolynomial) -> Self {
        let deg = p.degree().unwrap_or(0) as usize;
        let mut v = vec![Rational::zero(); deg + 1];
        for (e, c) in p.coeffs() {
            v[*e as usize] = c.clone();
        }
        Dense(v).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(Rational::zero());
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn lead(&self) -> &Rational {
        &self.0[self.0.len() - 1]
    }

    fn strip_low_zeros(self) -> Self {
        let k = self.0.iter().take_while(|c| c.is_zero()).count();
        Dense(self.0[k..].to_vec()).trimmed()
    }

    fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Dense(vec![Rational::zero()]);
        }
        Dense(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer((k as i64).into()))
                .collect(),
        )
        .trimmed()
    }

    fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// `(quotient, remainder)`.
    fn div_rem(&self, d: &Self) -> (Self, Self) {
        let mut rem = self.0.clone();
        let dd = d.degree();
        if self.degree() < dd {
            return (Dense(vec![Rational::zero()]), self.clone());
        }
        let mut quot = vec![Rational::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / d.lead();
            if !c.is_zero() {
                for (i, dc) in d.0.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd.max(1));
        (Dense(quot).trimmed(), Dense(rem).trimmed())
    }

    fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn squarefree(self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            self
        } else {
            self.div_rem(&g).0
        }
    }

    fn sturm_chain(&self) -> Vec<Dense> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[n - 1].degree() == 0 {
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            chain.push(Dense(r.0.into_iter().map(|c| -c).collect()));
        }
        chain
    }

    fn cauchy_bound(&self) -> Rational {
        let lead = self.lead().abs();
        let m = self.0[..self.degree()].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero);
        Rational::one() + m
    }
}

fn sign_changes(chain: &[Dense], x: &Rational) -> i64 {
    let mut last = Ordering::Equal;
    let mut changes = 0;
    for p in chain {
        let s = p.eval(x).cmp(&Rational::zero());
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn p(terms: &[(u32, i64, i64)]) -> EpsilonPolynomial {
        EpsilonPolynomial::from_terms(terms.iter().map(|&(e, n, d)| (e, rat(n, d))))
    }

    #[test]
    fn arithmetic() {
        let a = p(&[(0, 1, 1), (1, 1, 1)]);
        let sq = a.mul(&a);
        assert_eq!(sq, p(&[(0, 1, 1), (1, 2, 1), (2, 1, 1)]));
        assert_eq!(sq.eval(&int(2)), int(9));
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.to_string(), "1 + e");
    }

    #[test]
    fn first_root_of_quadratic() {
        // 1 - e/2 - e^2/2 has its positive root at 1
        let q = p(&[(0, 1, 1), (1, -1, 2), (2, -1, 2)]);
        let prec = rat(1, 1000);
        let Bound::Finite(lo) = q.first_positive_root(&prec).unwrap() else { panic!() };
        assert!(lo < int(1) && int(1) - &lo <= prec);
        assert_eq!(q.positive_roots_upto(&lo).unwrap(), 0);
        assert_eq!(q.positive_roots_upto(&int(1)).unwrap(), 1);
    }

    #[test]
    fn strips_eps_factor_and_repeated_roots() {
        // e^3 (e - 1/2)^2 (e - 3)
        let f = p(&[(0, -1, 2), (1, 1, 1)]);
        let g = p(&[(0, -3, 1), (1, 1, 1)]);
        let q = EpsilonPolynomial::monomial(3, int(1)).mul(&f).mul(&f).mul(&g);
        let Bound::Finite(lo) = q.first_positive_root(&rat(1, 100)).unwrap() else { panic!() };
        assert!(lo < rat(1, 2) && rat(1, 2) - lo <= rat(1, 100));
    }

    #[test]
    fn no_positive_root() {
        let q = p(&[(0, 1, 1), (2, 1, 1)]);
        assert_eq!(q.first_positive_root(&rat(1, 10)).unwrap(), Bound::Unbounded);
        let q = p(&[(0, 2, 1), (1, 1, 1)]);
        assert_eq!(q.first_positive_root(&rat(1, 10)).unwrap(), Bound::Unbounded);
        assert_eq!(q.positive_roots_upto(&int(100)).unwrap(), 0);
        assert!(EpsilonPolynomial::zero().first_positive_root(&rat(1, 10)).is_err());
    }

    proptest! {
        #[test]
        fn bracket_is_exact(roots in proptest::collection::vec((1i64..50, 1i64..10), 1..4)) {
            let mut q = EpsilonPolynomial::constant(int(1));
            for (n, d) in &roots {
                q = q.mul(&EpsilonPolynomial::from_terms([(0, -rat(*n, *d)), (1, int(1))]));
            }
            let smallest = roots.iter().map(|(n, d)| rat(*n, *d)).min().unwrap();
            let prec = rat(1, 1000);
            let Bound::Finite(lo) = q.first_positive_root(&prec).unwrap() else { panic!() };
            prop_assert!(lo < smallest && &smallest - &lo <= prec);
        }
    }
}
