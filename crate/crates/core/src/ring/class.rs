use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

use super::geometry::{split_power, TowerShape};

/// A monomial `g^base * prod_u d_u^(I_u) t_u^(J_u)`.
///
/// All generators have even real degree, so monomials commute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TowerMonomial {
    base: Vec<u32>,
    d: Vec<Vec<u32>>,
    t: Vec<Vec<u32>>,
}

impl TowerMonomial {
    pub fn one(shape: &TowerShape) -> Self {
        Self {
            base: vec![0; shape.base().generator_count()],
            d: shape.ranks().iter().map(|&r| vec![0; r]).collect(),
            t: shape.ranks().iter().map(|&r| vec![0; r]).collect(),
        }
    }

    pub fn from_parts(base: Vec<u32>, d: Vec<Vec<u32>>, t: Vec<Vec<u32>>) -> Self {
        debug_assert_eq!(d.len(), t.len());
        Self { base, d, t }
    }

    pub fn generator(shape: &TowerShape, g: usize) -> Self {
        let mut m = Self::one(shape);
        m.base[g] += 1;
        m
    }

    /// `d_(u,l)`, both indices 1-based.
    pub fn d(shape: &TowerShape, u: usize, l: usize) -> Self {
        let mut m = Self::one(shape);
        m.d[u - 1][l - 1] += 1;
        m
    }

    /// `t_(u,l)`, both indices 1-based.
    pub fn t(shape: &TowerShape, u: usize, l: usize) -> Self {
        let mut m = Self::one(shape);
        m.t[u - 1][l - 1] += 1;
        m
    }

    pub fn base(&self) -> &[u32] {
        &self.base
    }

    pub fn d_exps(&self, u: usize) -> &[u32] {
        &self.d[u - 1]
    }

    pub fn t_exps(&self, u: usize) -> &[u32] {
        &self.t[u - 1]
    }

    pub fn components(&self) -> usize {
        self.d.len()
    }

    pub fn degree(&self) -> u32 {
        self.base.iter().sum::<u32>()
            + self.d.iter().flatten().sum::<u32>()
            + self.t.iter().flatten().sum::<u32>()
    }

    pub fn is_base(&self) -> bool {
        self.d.iter().chain(&self.t).flatten().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let add = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        Self {
            base: add(&self.base, &other.base),
            d: self.d.iter().zip(&other.d).map(|(a, b)| add(a, b)).collect(),
            t: self.t.iter().zip(&other.t).map(|(a, b)| add(a, b)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let scale = |v: &[u32]| v.iter().map(|x| x * k).collect::<Vec<_>>();
        Self {
            base: scale(&self.base),
            d: self.d.iter().map(|v| scale(v)).collect(),
            t: self.t.iter().map(|v| scale(v)).collect(),
        }
    }

    /// Parses whitespace-separated factors such as `"w^2 d1 t2"`.
    ///
    /// Base generators are referred to by name (`w`/`omega`, divisor names,
    /// extras). Tower classes are `d<l>`/`t<l>` on single-component towers and
    /// `d<u>_<l>`/`t<u>_<l>` in general.
    pub fn parse(shape: &TowerShape, text: &str) -> Result<Self> {
        let mut m = Self::one(shape);
        for token in text.split(|c: char| c.is_whitespace() || c == '*').filter(|s| !s.is_empty()) {
            if token == "1" {
                continue;
            }
            let (name, power) = split_power(token)?;
            if let Some(g) = shape.base().generator_index(name) {
                m.base[g] += power;
                continue;
            }
            let (kind, u, l) = parse_tower_symbol(shape, name)?;
            match kind {
                'd' => m.d[u - 1][l - 1] += power,
                _ => m.t[u - 1][l - 1] += power,
            }
        }
        Ok(m)
    }

    pub fn render(&self, shape: &TowerShape) -> String {
        let mut parts = Vec::new();
        let base = shape.base().render_base(&self.base);
        if base != "1" {
            parts.push(base);
        }
        let single = self.d.len() == 1;
        for (kind, table) in [('d', &self.d), ('t', &self.t)] {
            for (u, exps) in table.iter().enumerate() {
                for (l, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let sym = if single {
                        format!("{kind}{}", l + 1)
                    } else {
                        format!("{kind}{}_{}", u + 1, l + 1)
                    };
                    parts.push(if e == 1 { sym } else { format!("{sym}^{e}") });
                }
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

fn parse_tower_symbol(shape: &TowerShape, name: &str) -> Result<(char, usize, usize)> {
    let bad = || Error::Parse(format!("unknown factor {name:?}"));
    let mut chars = name.chars();
    let kind = chars.next().filter(|c| *c == 'd' || *c == 't').ok_or_else(bad)?;
    let rest = chars.as_str();
    let (u, l) = match rest.split_once('_') {
        Some((u, l)) => (u.parse::<usize>().map_err(|_| bad())?, l.parse::<usize>().map_err(|_| bad())?),
        None => {
            let l = rest.parse::<usize>().map_err(|_| bad())?;
            if !shape.is_single_component() {
                return Err(Error::Parse(format!(
                    "{name:?} is ambiguous on a {}-component tower; write {kind}<u>_<l>",
                    shape.components()
                )));
            }
            (1, l)
        }
    };
    if u == 0 || u > shape.components() {
        return Err(Error::IndexOutOfRange { index: u, bound: shape.components() });
    }
    let r = shape.ranks()[u - 1];
    if l == 0 || l > r {
        return Err(Error::IndexOutOfRange { index: l, bound: r });
    }
    Ok((kind, u, l))
}

/// A formal rational combination of tower monomials. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TowerClass {
    terms: BTreeMap<TowerMonomial, Rational>,
}

impl TowerClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one(shape: &TowerShape) -> Self {
        Self::monomial(TowerMonomial::one(shape), Rational::one())
    }

    pub fn monomial(m: TowerMonomial, coef: Rational) -> Self {
        let mut c = Self::zero();
        c.add_term(m, coef);
        c
    }

    /// A base class `sum_g x_g g` from a coefficient vector over the base generators.
    pub fn from_base_vector(shape: &TowerShape, coeffs: &[Rational]) -> Self {
        let mut c = Self::zero();
        for (g, x) in coeffs.iter().enumerate() {
            c.add_term(TowerMonomial::generator(shape, g), x.clone());
        }
        c
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TowerMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &TowerMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: TowerMonomial, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(coef);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coef;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn pow(&self, shape: &TowerShape, k: u32) -> Self {
        let mut acc = Self::one(shape);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Homogeneous degree of every term, `None` for the zero class or mixed degrees.
    pub fn degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(TowerMonomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn is_base(&self) -> bool {
        self.terms.keys().all(TowerMonomial::is_base)
    }

    /// Keeps only the terms of the given degree.
    pub fn graded_part(&self, degree: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn render(&self, shape: &TowerShape) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if k > 0 {
                out.push_str(if negative { " - " } else { " + " });
            } else if negative {
                out.push('-');
            }
            let abs = c.abs();
            let mono = m.render(shape);
            match (mono.as_str(), abs.is_one()) {
                ("1", _) => out.push_str(&format_rational(&abs)),
                (_, true) => out.push_str(&mono),
                _ => out.push_str(&format!("{}*{mono}", format_rational(&abs))),
            }
        }
        out
    }
}

impl Add for &TowerClass {
    type Output = TowerClass;
    fn add(self, rhs: &TowerClass) -> TowerClass {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &TowerClass {
    type Output = TowerClass;
    fn sub(self, rhs: &TowerClass) -> TowerClass {
        self + &(-rhs)
    }
}

impl Neg for &TowerClass {
    type Output = TowerClass;
    fn neg(self) -> TowerClass {
        TowerClass { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul for &TowerClass {
    type Output = TowerClass;
    fn mul(self, rhs: &TowerClass) -> TowerClass {
        let mut out = TowerClass::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::ring::BaseGeometry;

    fn shape(ranks: Vec<usize>) -> TowerShape {
        let divisors: Vec<String> = (1..=ranks.len()).map(|u| format!("D{u}")).collect();
        let base = BaseGeometry::new(1, divisors, vec![], Default::default()).unwrap();
        TowerShape::new(base, ranks).unwrap()
    }

    #[test]
    fn parse_and_render_single_component() {
        let s = shape(vec![2]);
        let m = TowerMonomial::parse(&s, "w^2 d1 t2 d1").unwrap();
        assert_eq!(m.base(), &[2, 0]);
        assert_eq!(m.d_exps(1), &[2, 0]);
        assert_eq!(m.t_exps(1), &[0, 1]);
        assert_eq!(m.render(&s), "w^2 d1^2 t2");
        assert_eq!(m.degree(), 5);
    }

    #[test]
    fn parse_multi_component_requires_component_index() {
        let s = shape(vec![1, 2]);
        assert!(TowerMonomial::parse(&s, "d1").is_err());
        let m = TowerMonomial::parse(&s, "D2 t2_2 d1_1").unwrap();
        assert_eq!(m.t_exps(2), &[0, 1]);
        assert_eq!(m.render(&s), "D2 d1_1 t2_2");
        assert!(TowerMonomial::parse(&s, "t2_3").is_err());
        assert!(TowerMonomial::parse(&s, "x7").is_err());
    }

    #[test]
    fn class_arithmetic_drops_zeros() {
        let s = shape(vec![1]);
        let t = TowerClass::monomial(TowerMonomial::t(&s, 1, 1), int(1));
        let d = TowerClass::monomial(TowerMonomial::d(&s, 1, 1), rat(1, 2));
        let sum = &t + &d;
        assert_eq!(sum.len(), 2);
        let back = &sum - &d;
        assert_eq!(back, t);
        assert!((&t - &t).is_zero());
        let sq = &sum * &sum;
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coefficient(&TowerMonomial::t(&s, 1, 1).mul(&TowerMonomial::d(&s, 1, 1))), int(1));
        assert_eq!(sq.degree(), Some(2));
    }
}
