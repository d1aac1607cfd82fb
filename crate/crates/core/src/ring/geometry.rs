use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::class::TowerClass;

/// Name of generator `g_0`, the Kaehler class of the base.
pub const OMEGA: &str = "w";

/// The base manifold `X` as far as intersection theory is concerned: its
/// dimension, named degree-1 generators and the table of top-degree pairings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGeometry {
    dim: u32,
    divisors: Vec<String>,
    extras: Vec<String>,
    table: BTreeMap<Vec<u32>, Rational>,
}

impl BaseGeometry {
    /// Generators are ordered `w, D_1..D_s, extras...`; every table key is an
    /// exponent vector over that list of total degree `dim`.
    pub fn new(
        dim: u32,
        divisors: Vec<String>,
        extras: Vec<String>,
        table: BTreeMap<Vec<u32>, Rational>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGeometry("base dimension must be >= 1".into()));
        }
        let mut seen = vec![OMEGA.to_string()];
        for name in divisors.iter().chain(&extras) {
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('^') {
                return Err(Error::InvalidGeometry(format!("bad generator name {name:?}")));
            }
            if seen.contains(name) {
                return Err(Error::InvalidGeometry(format!("duplicate generator name {name:?}")));
            }
            seen.push(name.clone());
        }
        let gens = seen.len();
        for key in table.keys() {
            if key.len() != gens {
                return Err(Error::InvalidGeometry(format!(
                    "table key {key:?} has {} exponents, expected {gens}",
                    key.len()
                )));
            }
            let deg: u32 = key.iter().sum();
            if deg != dim {
                return Err(Error::InvalidGeometry(format!(
                    "table key {key:?} has degree {deg}, expected {dim}"
                )));
            }
        }
        Ok(Self { dim, divisors, extras, table })
    }

    /// Convenience constructor from `(monomial text, value)` pairs, e.g. `("w D", 1)`.
    pub fn from_entries<'a>(
        dim: u32,
        divisors: &[&str],
        entries: impl IntoIterator<Item = (&'a str, Rational)>,
    ) -> Result<Self> {
        let shell = Self::new(
            dim,
            divisors.iter().map(|s| s.to_string()).collect(),
            Vec::new(),
            BTreeMap::new(),
        )?;
        let mut table = BTreeMap::new();
        for (text, value) in entries {
            table.insert(shell.parse_base_monomial(text)?, value);
        }
        Self::new(dim, shell.divisors, Vec::new(), table)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn divisor_count(&self) -> usize {
        self.divisors.len()
    }

    pub fn generator_count(&self) -> usize {
        1 + self.divisors.len() + self.extras.len()
    }

    pub fn generator_names(&self) -> Vec<&str> {
        std::iter::once(OMEGA)
            .chain(self.divisors.iter().map(String::as_str))
            .chain(self.extras.iter().map(String::as_str))
            .collect()
    }

    /// Index of the generator `[D_u]` (1-based `u`).
    pub fn divisor_generator(&self, u: usize) -> usize {
        debug_assert!(u >= 1 && u <= self.divisors.len());
        u
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        if name == OMEGA || name == "omega" {
            return Some(0);
        }
        self.divisors
            .iter()
            .chain(&self.extras)
            .position(|n| n == name)
            .map(|k| k + 1)
    }

    pub fn table(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.table
    }

    /// `<g^m, [X]>` for a degree-`dim` exponent vector; missing entries are errors.
    pub fn lookup(&self, exps: &[u32]) -> Result<&Rational> {
        self.table.get(exps).ok_or_else(|| Error::MissingTableEntry {
            monomial: self.render_base(exps),
            degree: exps.iter().sum(),
        })
    }

    /// Pairs a base-only class against `[X]`; components of degree other than `dim` contribute 0.
    pub fn pair(&self, class: &TowerClass) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, c) in class.terms() {
            if !m.is_base() {
                return Err(Error::ShapeMismatch(format!(
                    "expected a base class, found tower monomial {m:?}"
                )));
            }
            if m.base().iter().sum::<u32>() == self.dim {
                total += c * self.lookup(m.base())?;
            }
        }
        Ok(total)
    }

    pub fn render_base(&self, exps: &[u32]) -> String {
        let names = self.generator_names();
        let parts: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| {
                let name = names.get(g).copied().unwrap_or("?");
                if e == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }

    pub fn parse_base_monomial(&self, text: &str) -> Result<Vec<u32>> {
        let mut exps = vec![0u32; self.generator_count()];
        for token in text.split(|c: char| c.is_whitespace() || c == '*').filter(|s| !s.is_empty()) {
            if token == "1" {
                continue;
            }
            let (name, power) = split_power(token)?;
            let g = self
                .generator_index(name)
                .ok_or_else(|| Error::Parse(format!("unknown base generator {name:?}")))?;
            exps[g] += power;
        }
        Ok(exps)
    }
}

pub(crate) fn split_power(token: &str) -> Result<(&str, u32)> {
    match token.split_once('^') {
        Some((name, p)) => {
            let power = p
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
            Ok((name, power))
        }
        None => Ok((token, 1)),
    }
}

/// Largest supported rank of a single tower component.
pub const MAX_TOWER_RANK: usize = 30;

/// A base geometry together with the tower ranks `r = (r_1, ..., r_s)`, one per divisor component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerShape {
    base: BaseGeometry,
    ranks: Vec<usize>,
}

impl TowerShape {
    pub fn new(base: BaseGeometry, ranks: Vec<usize>) -> Result<Self> {
        if ranks.len() != base.divisor_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} tower ranks given for {} divisor components",
                ranks.len(),
                base.divisor_count()
            )));
        }
        if let Some(u) = ranks.iter().position(|&r| r == 0) {
            return Err(Error::ShapeMismatch(format!("tower rank r_{} must be >= 1", u + 1)));
        }
        if let Some(u) = ranks.iter().position(|&r| r > MAX_TOWER_RANK) {
            return Err(Error::ShapeMismatch(format!(
                "tower rank r_{} exceeds {MAX_TOWER_RANK} (epsilon exponents 2^(r-1) would overflow)",
                u + 1
            )));
        }
        Ok(Self { base, ranks })
    }

    pub fn base(&self) -> &BaseGeometry {
        &self.base
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn components(&self) -> usize {
        self.ranks.len()
    }

    /// `|r| = r_1 + ... + r_s`
    pub fn fiber_dim(&self) -> u32 {
        self.ranks.iter().sum::<usize>() as u32
    }

    /// Complex dimension `n + |r|` of `X(D, r)`.
    pub fn pairing_dim(&self) -> u32 {
        self.base.dim() + self.fiber_dim()
    }

    /// `sigma = 2^(r_1) + ... + 2^(r_s) - s`, the exponent of the leading slope term.
    pub fn sigma(&self) -> u32 {
        self.ranks.iter().map(|&r| (1u32 << r) - 1).sum()
    }

    pub fn is_single_component(&self) -> bool {
        self.ranks.len() == 1
    }
}
