//! Weight-lattice combinatorics for the equivariant category: characters of
//! the torus `(C^x)^r`, the admissible family `f_1, ..., f_r`, the projections
//! between consecutive tower levels and multi-index gradings.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// A character of `(C^x)^r`, identified with a vector in `Z^r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Character(Vec<i64>);

impl Character {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ShapeMismatch("characters need rank r >= 1".into()));
        }
        Ok(Self(coords))
    }

    pub fn zero(r: usize) -> Self {
        Self(vec![0; r.max(1)])
    }

    /// The canonical basis character `e_j` (1-based).
    pub fn basis(j: usize, r: usize) -> Result<Self> {
        check_index(j, r)?;
        let mut coords = vec![0; r];
        coords[j - 1] = 1;
        Ok(Self(coords))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// `pi_j`, the j-th coordinate (1-based); coordinates past the rank read as 0.
    pub fn coord(&self, j: usize) -> i64 {
        self.0.get(j.wrapping_sub(1)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// View in `Z^s`, `s >= r`, by appending zeros.
    pub fn embed(&self, s: usize) -> Result<Self> {
        if s < self.rank() {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed a rank-{} character into Z^{s}",
                self.rank()
            )));
        }
        let mut coords = self.0.clone();
        coords.resize(s, 0);
        Ok(Self(coords))
    }
}

impl Character {
    /// `"0"` or `"f_j"` when the character is one of the distinguished weights.
    pub fn label(&self) -> Option<String> {
        if self.is_zero() {
            return Some("0".into());
        }
        (1..=self.rank()).find(|&j| f_char(j, self.rank()).is_ok_and(|f| &f == self)).map(|j| format!("f_{j}"))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_index(j: usize, r: usize) -> Result<()> {
    if j == 0 || j > r {
        Err(Error::IndexOutOfRange { index: j, bound: r })
    } else {
        Ok(())
    }
}

/// `f_j = e_j + 2 e_(j-1) + sum_(i>=2) e_(j-i)`, with `e_k = 0` for `k <= 0`.
pub fn f_char(j: usize, r: usize) -> Result<Character> {
    check_index(j, r)?;
    let mut coords = vec![0; r];
    coords[j - 1] = 1;
    if j >= 2 {
        coords[j - 2] = 2;
    }
    for c in coords.iter_mut().take(j.saturating_sub(2)) {
        *c = 1;
    }
    Ok(Character(coords))
}

/// The projection `Z^(j+1) -> Z^j` on its defining domain `{0, f_1, ..., f_(j+1)}`:
/// `f_(j+1) -> f_j`, `f_i -> f_i` for `i <= j`, `0 -> 0`.
pub fn pi_project(f: &Character) -> Result<Character> {
    let top = f.rank();
    if top < 2 {
        return Err(Error::ShapeMismatch(
            "projection needs a character of rank j+1 >= 2".into(),
        ));
    }
    let j = top - 1;
    if f.is_zero() {
        return Ok(Character::zero(j));
    }
    for i in 1..=top {
        if f_char(i, top)? == *f {
            return f_char(i.min(j), j);
        }
    }
    Err(Error::OutsideProjectionDomain(f.to_string()))
}

/// Exponent vector `I = (i_1, ..., i_r)` in `Z_(>=0)^r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn zeros(r: usize) -> Self {
        Self(vec![0; r])
    }

    pub fn ones(r: usize) -> Self {
        Self(vec![1; r])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|I|`
    pub fn norm(&self) -> u64 {
        self.0.iter().map(|&i| u64::from(i)).sum()
    }

    /// `sigma(I)` in machine integers, `None` on overflow.
    pub fn sigma_u64(&self) -> Option<u64> {
        self.0.iter().enumerate().try_fold(0u64, |acc, (l, &i)| {
            let weight = 1u64.checked_shl(l as u32).filter(|_| l < 64)?;
            acc.checked_add(u64::from(i).checked_mul(weight)?)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&i| i == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.0.iter().all(|&i| i == 1)
    }
}

/// `sigma(I) = sum_l i_l 2^(l-1)`, exact for any length.
pub fn sigma_weight(index: &MultiIndex) -> BigUint {
    index
        .0
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (l, &i)| acc + (BigUint::from(i) << l))
}

/// `2^r - 1`, the extremal grading of a single tower of rank `r`.
pub fn sigma_extremal(r: usize) -> BigUint {
    (BigUint::one() << r) - BigUint::one()
}

/// The support pattern a nonvanishing pairing `<eta d^I t^J, [X(D,r)]>` must have:
/// `I` is zero up to some level `l` and one afterwards, `J` vanishes after `l`,
/// and every tail sum `j_mu + ... + j_l` is at least `2 + (l - mu)`.
pub fn nonvanishing_pattern(i: &MultiIndex, j: &MultiIndex) -> bool {
    let r = i.len();
    if j.len() != r {
        return false;
    }
    let ones = i.0.iter().rev().take_while(|&&x| x == 1).count();
    let l = r - ones;
    if i.0[..l].iter().any(|&x| x != 0) || j.0[l..].iter().any(|&x| x != 0) {
        return false;
    }
    let mut tail = 0u64;
    for mu in (1..=l).rev() {
        tail += u64::from(j.0[mu - 1]);
        if tail < 2 + (l - mu) as u64 {
            return false;
        }
    }
    true
}

pub const STRATA: usize = 3;

/// Torus weights of an equivariant bundle on the three fixed strata
/// `X(D,r)[0]`, `X(D,r)[1]`, `X(D,r)[2]`, as multisets of characters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightProfile {
    r: usize,
    strata: [Vec<Character>; STRATA],
}

impl WeightProfile {
    pub fn new(r: usize, strata: [Vec<Character>; STRATA]) -> Result<Self> {
        if r == 0 {
            return Err(Error::ShapeMismatch("tower rank must be >= 1".into()));
        }
        let rank = strata[0].len();
        if strata.iter().any(|s| s.len() != rank) {
            return Err(Error::ShapeMismatch(
                "all strata must carry the same number of weights".into(),
            ));
        }
        if let Some(bad) = strata.iter().flatten().find(|c| c.rank() != r) {
            return Err(Error::ShapeMismatch(format!(
                "weight {bad} does not have rank {r}"
            )));
        }
        let mut strata = strata;
        for s in &mut strata {
            s.sort();
        }
        Ok(Self { r, strata })
    }

    pub fn tower_rank(&self) -> usize {
        self.r
    }

    pub fn bundle_rank(&self) -> usize {
        self.strata[0].len()
    }

    pub fn stratum(&self, i: usize) -> &[Character] {
        &self.strata[i]
    }

    /// Multiplicity of each distinct weight on a stratum, in sorted order.
    pub fn multiplicities(&self, i: usize) -> Vec<(Character, usize)> {
        let mut out: Vec<(Character, usize)> = Vec::new();
        for c in &self.strata[i] {
            match out.last_mut() {
                Some((last, n)) if last == c => *n += 1,
                _ => out.push((c.clone(), 1)),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightViolation {
    pub stratum: usize,
    pub weight: Character,
}

/// Membership test for the equivariant category: weights on strata `[1]` and
/// `[2]` must be 0, weights on `[0]` must lie in `{f_1, ..., f_r}`. Returns the
/// first offending weight, scanning strata in order `[0]`, `[1]`, `[2]`.
pub fn check_category_weights(profile: &WeightProfile, r: usize) -> Result<Option<WeightViolation>> {
    if profile.tower_rank() != r {
        return Err(Error::ShapeMismatch(format!(
            "profile has tower rank {}, expected {r}",
            profile.tower_rank()
        )));
    }
    let allowed: Vec<Character> = (1..=r).map(|j| f_char(j, r)).collect::<Result<_>>()?;
    for w in profile.stratum(0) {
        if !w.is_zero() && !allowed.contains(w) {
            return Ok(Some(WeightViolation { stratum: 0, weight: w.clone() }));
        }
    }
    for stratum in 1..STRATA {
        if let Some(w) = profile.stratum(stratum).iter().find(|w| !w.is_zero()) {
            return Ok(Some(WeightViolation { stratum, weight: w.clone() }));
        }
    }
    Ok(None)
}
