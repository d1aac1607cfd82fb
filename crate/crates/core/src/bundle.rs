//! Parabolic bundles as discrete data, and their transport to the tower.

use num_traits::One;

use crate::error::{Error, Result};
use crate::lattice::{f_char, Character, WeightProfile};
use crate::rational::Rational;
use crate::ring::{TowerClass, TowerMonomial, TowerShape};

/// A bundle `V` on the base with one flag of subbundles of `V|_(D_u)` per divisor component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicBundle {
    pub rank: usize,
    /// `c1(V)`, a degree-1 class on the base.
    pub c1: TowerClass,
    /// `filtrations[u-1][i-1] = R_i = rk V_(u,i)`.
    pub filtrations: Vec<Vec<usize>>,
    /// `ch2(V)`, a degree-2 class on the base.
    pub ch2: Option<TowerClass>,
    /// `c1(V_1)` for the first flag step, used only by [`ch_upstairs_r1`].
    pub sub_c1: Option<TowerClass>,
}

/// A candidate destabilizing subobject of a [`ParabolicBundle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubobjectData {
    pub rank: usize,
    pub c1: TowerClass,
    pub filtrations: Vec<Vec<usize>>,
}

fn check_base_class(class: &TowerClass, degree: u32, what: &str) -> Result<()> {
    if !class.is_base() {
        return Err(Error::InvalidBundle(format!("{what} must be a class on the base")));
    }
    match class.degree() {
        Some(d) if d != degree => Err(Error::InvalidBundle(format!("{what} must have degree {degree}"))),
        _ => Ok(()),
    }
}

fn check_filtrations(shape: &TowerShape, rank: usize, filtrations: &[Vec<usize>]) -> Result<()> {
    if filtrations.len() != shape.components() {
        return Err(Error::ShapeMismatch(format!(
            "{} filtrations for {} divisor components",
            filtrations.len(),
            shape.components()
        )));
    }
    for (u, (f, r)) in filtrations.iter().zip(shape.ranks()).enumerate() {
        if f.len() != *r {
            return Err(Error::ShapeMismatch(format!(
                "filtration {} has length {}, tower rank is {r}",
                u + 1,
                f.len()
            )));
        }
        if f.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidBundle(format!("filtration {} is not nondecreasing", u + 1)));
        }
        if f.last().is_some_and(|&top| top > rank) {
            return Err(Error::InvalidBundle(format!("filtration {} exceeds the rank {rank}", u + 1)));
        }
    }
    Ok(())
}

impl ParabolicBundle {
    pub fn new(shape: &TowerShape, rank: usize, c1: TowerClass, filtrations: Vec<Vec<usize>>) -> Result<Self> {
        let b = Self { rank, c1, filtrations, ch2: None, sub_c1: None };
        b.validate(shape)?;
        Ok(b)
    }

    pub fn validate(&self, shape: &TowerShape) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidBundle("rank must be positive".into()));
        }
        check_base_class(&self.c1, 1, "c1")?;
        if let Some(ch2) = &self.ch2 {
            check_base_class(ch2, 2, "ch2")?;
        }
        if let Some(sub) = &self.sub_c1 {
            check_base_class(sub, 1, "c1 of the first flag step")?;
        }
        check_filtrations(shape, self.rank, &self.filtrations)
    }

    pub fn filtration(&self, u: usize) -> &[usize] {
        &self.filtrations[u - 1]
    }
}

impl SubobjectData {
    /// Checks `1 <= rank < parent rank` and `R'_(u,i) <= min(R_(u,i), rank)`.
    pub fn validate_against(&self, shape: &TowerShape, parent: &ParabolicBundle, index: usize) -> Result<()> {
        let bad = |message: String| Error::MalformedSubobject { index, message };
        if self.rank == 0 || self.rank >= parent.rank {
            return Err(bad(format!("rank {} not in [1, {})", self.rank, parent.rank)));
        }
        check_base_class(&self.c1, 1, "c1").map_err(|e| bad(e.to_string()))?;
        check_filtrations(shape, self.rank, &self.filtrations).map_err(|e| bad(e.to_string()))?;
        for (u, (sub, par)) in self.filtrations.iter().zip(&parent.filtrations).enumerate() {
            for (i, (a, b)) in sub.iter().zip(par).enumerate() {
                if a > b {
                    return Err(bad(format!("R'_({},{}) = {a} exceeds the parent's {b}", u + 1, i + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn as_bundle(&self) -> ParabolicBundle {
        ParabolicBundle {
            rank: self.rank,
            c1: self.c1.clone(),
            filtrations: self.filtrations.clone(),
            ch2: None,
            sub_c1: None,
        }
    }
}

/// `c1(W) = c1(V) + sum_u sum_l R_l(V_u) t_(u,l)`.
pub fn c1_upstairs(shape: &TowerShape, b: &ParabolicBundle) -> Result<TowerClass> {
    check_filtrations(shape, b.rank, &b.filtrations)?;
    let mut out = b.c1.clone();
    for (u, f) in b.filtrations.iter().enumerate() {
        for (l, &r) in f.iter().enumerate() {
            out.add_term(TowerMonomial::t(shape, u + 1, l + 1), Rational::from_integer(r.into()));
        }
    }
    Ok(out)
}

/// Graded pieces of `ch(W)` through degree 2 for a single blow-up of a single divisor:
/// `[rk V, c1(V) + R t, ch2(V) + t c1(V_1) + (R/2) t^2]`.
pub fn ch_upstairs_r1(shape: &TowerShape, b: &ParabolicBundle) -> Result<[TowerClass; 3]> {
    if shape.ranks() != [1] {
        return Err(Error::ShapeMismatch("Chern character transport needs one divisor and r = 1".into()));
    }
    b.validate(shape)?;
    let r = Rational::from_integer(b.filtrations[0][0].into());
    let t = TowerClass::monomial(TowerMonomial::t(shape, 1, 1), Rational::one());
    let deg0 = TowerClass::one(shape).scale(&Rational::from_integer(b.rank.into()));
    let deg1 = &b.c1 + &t.scale(&r);
    let ch2 = b.ch2.clone().unwrap_or_else(TowerClass::zero);
    let sub_c1 = b.sub_c1.clone().unwrap_or_else(TowerClass::zero);
    let half = Rational::new(1.into(), 2.into());
    let deg2 = &(&ch2 + &(&t * &sub_c1)) + &(&t * &t).scale(&(r * half));
    Ok([deg0, deg1, deg2])
}

/// Equivariant weights of the bundle on the tower over component `u`:
/// `f_i` with multiplicity `R_i - R_(i-1)` and `0` with multiplicity `rank - R_r` on `[0]`,
/// and `0` with multiplicity `rank` on `[1]` and `[2]`.
pub fn weights_from_filtration(b: &ParabolicBundle, u: usize) -> Result<WeightProfile> {
    if u == 0 || u > b.filtrations.len() {
        return Err(Error::IndexOutOfRange { index: u, bound: b.filtrations.len() });
    }
    let f = &b.filtrations[u - 1];
    let r = f.len();
    if f.windows(2).any(|w| w[0] > w[1]) || f.last().is_some_and(|&top| top > b.rank) {
        return Err(Error::InvalidBundle(format!("filtration {u} is not a flag in rank {}", b.rank)));
    }
    let mut stratum0 = Vec::with_capacity(b.rank);
    let mut prev = 0;
    for (i, &ri) in f.iter().enumerate() {
        let fi = f_char(i + 1, r)?;
        stratum0.extend(std::iter::repeat_n(fi, ri - prev));
        prev = ri;
    }
    stratum0.extend(std::iter::repeat_n(Character::zero(r), b.rank - prev));
    let zeros = vec![Character::zero(r); b.rank];
    WeightProfile::new(r, [stratum0, zeros.clone(), zeros])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::check_category_weights;
    use crate::rational::{int, rat};
    use crate::ring::{pair_eval, BaseGeometry};
    use proptest::prelude::*;

    fn plane(ranks: Vec<usize>) -> TowerShape {
        let names: Vec<String> = (1..=ranks.len()).map(|u| format!("D{u}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        // every divisor is a line: all pairings are 1
        let mut entries = vec![("w^2".to_string(), int(1))];
        for a in &names {
            entries.push((format!("w {a}"), int(1)));
            for b in &names {
                if a <= b {
                    let key = if a == b { format!("{a}^2") } else { format!("{a} {b}") };
                    entries.push((key, int(1)));
                }
            }
        }
        let base = BaseGeometry::from_entries(2, &names, entries.iter().map(|(k, v)| (k.as_str(), v.clone()))).unwrap();
        TowerShape::new(base, ranks).unwrap()
    }

    fn class(shape: &TowerShape, text: &str, c: Rational) -> TowerClass {
        TowerClass::monomial(TowerMonomial::parse(shape, text).unwrap(), c)
    }

    #[test]
    fn c1_single_blowup() {
        let s = plane(vec![1]);
        let b = ParabolicBundle::new(&s, 2, class(&s, "w", int(3)), vec![vec![1]]).unwrap();
        let expected = &class(&s, "w", int(3)) + &class(&s, "t1", int(1));
        assert_eq!(c1_upstairs(&s, &b).unwrap(), expected);
    }

    #[test]
    fn c1_two_components() {
        let s = plane(vec![2, 1]);
        let c1 = class(&s, "w", int(1));
        let b = ParabolicBundle::new(&s, 3, c1.clone(), vec![vec![1, 2], vec![1]]).unwrap();
        let mut expected = c1;
        expected.add_term(TowerMonomial::t(&s, 1, 1), int(1));
        expected.add_term(TowerMonomial::t(&s, 1, 2), int(2));
        expected.add_term(TowerMonomial::t(&s, 2, 1), int(1));
        assert_eq!(c1_upstairs(&s, &b).unwrap(), expected);
    }

    #[test]
    fn zero_filtration_leaves_c1() {
        let s = plane(vec![2]);
        let c1 = class(&s, "w", int(2));
        let b = ParabolicBundle::new(&s, 2, c1.clone(), vec![vec![0, 0]]).unwrap();
        assert_eq!(c1_upstairs(&s, &b).unwrap(), c1);
    }

    #[test]
    fn rejects_bad_filtrations() {
        let s = plane(vec![2]);
        let c1 = class(&s, "w", int(0));
        assert!(ParabolicBundle::new(&s, 2, c1.clone(), vec![vec![2, 1]]).is_err());
        assert!(ParabolicBundle::new(&s, 2, c1.clone(), vec![vec![1, 3]]).is_err());
        assert!(ParabolicBundle::new(&s, 2, c1, vec![vec![1]]).is_err());
    }

    #[test]
    fn subobject_bounds() {
        let s = plane(vec![1]);
        let parent = ParabolicBundle::new(&s, 3, class(&s, "w", int(1)), vec![vec![1]]).unwrap();
        let ok = SubobjectData { rank: 1, c1: TowerClass::zero(), filtrations: vec![vec![1]] };
        assert!(ok.validate_against(&s, &parent, 0).is_ok());
        let too_big = SubobjectData { rank: 2, c1: TowerClass::zero(), filtrations: vec![vec![2]] };
        assert!(too_big.validate_against(&s, &parent, 1).is_err());
        let full = SubobjectData { rank: 3, c1: TowerClass::zero(), filtrations: vec![vec![0]] };
        assert!(full.validate_against(&s, &parent, 2).is_err());
    }

    #[test]
    fn chern_character_matches_truncated_series() {
        // ch(W) = ch(V) + (e^t - 1) ch(V_1), truncated at degree 2
        let s = plane(vec![1]);
        let mut b = ParabolicBundle::new(&s, 2, class(&s, "w", int(3)), vec![vec![1]]).unwrap();
        b.ch2 = Some(class(&s, "w^2", rat(1, 2)));
        b.sub_c1 = Some(class(&s, "w", int(1)));
        let [d0, d1, d2] = ch_upstairs_r1(&s, &b).unwrap();
        let t = class(&s, "t1", int(1));
        let ch_v1 = &TowerClass::one(&s) + b.sub_c1.as_ref().unwrap();
        let series = &t + &(&t * &t).scale(&rat(1, 2));
        let correction = &series * &ch_v1;
        let ch_v = &(&TowerClass::one(&s).scale(&int(2)) + &b.c1) + b.ch2.as_ref().unwrap();
        let full = &ch_v + &correction;
        assert_eq!(d0, full.graded_part(0));
        assert_eq!(d1, full.graded_part(1));
        assert_eq!(d2, full.graded_part(2));
        // pairings on the tower: <ch2(W) w> = <ch2(V) w> + <t w w> + 1/2 <t^2 w>
        let w = class(&s, "w", int(1));
        let value = pair_eval(&s, &(&d2 * &w)).unwrap();
        assert_eq!(value, rat(-1, 2));
        assert!(ch_upstairs_r1(&plane(vec![2]), &b).is_err());
    }

    #[test]
    fn weights_examples() {
        let s = plane(vec![1]);
        let b = ParabolicBundle::new(&s, 2, TowerClass::zero(), vec![vec![1]]).unwrap();
        let p = weights_from_filtration(&b, 1).unwrap();
        assert_eq!(p.multiplicities(0), vec![(Character::zero(1), 1), (f_char(1, 1).unwrap(), 1)]);

        let s = plane(vec![2]);
        let b = ParabolicBundle::new(&s, 3, TowerClass::zero(), vec![vec![1, 1]]).unwrap();
        let p = weights_from_filtration(&b, 1).unwrap();
        assert_eq!(p.multiplicities(0), vec![(Character::zero(2), 2), (f_char(1, 2).unwrap(), 1)]);

        let b = ParabolicBundle::new(&s, 3, TowerClass::zero(), vec![vec![0, 0]]).unwrap();
        let p = weights_from_filtration(&b, 1).unwrap();
        assert!(p.stratum(0).iter().all(Character::is_zero));
    }

    fn flag(r: usize, rank: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0..=rank, r).prop_map(|mut v| {
            v.sort_unstable();
            v
        })
    }

    proptest! {
        #[test]
        fn weights_are_admissible((rank, r, f) in (1usize..6, 1usize..5).prop_flat_map(|(rank, r)| (Just(rank), Just(r), flag(r, rank)))) {
            let s = plane(vec![r]);
            let b = ParabolicBundle::new(&s, rank, TowerClass::zero(), vec![f]).unwrap();
            let p = weights_from_filtration(&b, 1).unwrap();
            for i in 0..3 {
                prop_assert_eq!(p.stratum(i).len(), rank);
            }
            prop_assert_eq!(check_category_weights(&p, r).unwrap(), None);
        }

        #[test]
        fn c1_is_additive((a, b) in (1usize..4).prop_flat_map(|r| (flag(r, 3), flag(r, 3)))) {
            let s = plane(vec![a.len()]);
            let sum: Vec<usize> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ba = ParabolicBundle::new(&s, 3, TowerClass::zero(), vec![a]).unwrap();
            let bb = ParabolicBundle::new(&s, 3, TowerClass::zero(), vec![b]).unwrap();
            let bs = ParabolicBundle::new(&s, 6, TowerClass::zero(), vec![sum]).unwrap();
            let lhs = &c1_upstairs(&s, &ba).unwrap() + &c1_upstairs(&s, &bb).unwrap();
            prop_assert_eq!(lhs, c1_upstairs(&s, &bs).unwrap());
        }

        #[test]
        fn t_terms_die_against_all_d(r in 1usize..4, f in flag(3, 3), k in -5i64..5) {
            let s = plane(vec![r]);
            let c1 = class(&s, "w", int(k));
            let b = ParabolicBundle::new(&s, 3, c1.clone(), vec![f[..r].to_vec()]).unwrap();
            let mut all_d = TowerClass::one(&s);
            for l in 1..=r {
                all_d = &all_d * &TowerClass::monomial(TowerMonomial::d(&s, 1, l), int(1));
            }
            let w = class(&s, "w", int(1));
            let lhs = pair_eval(&s, &(&(&c1_upstairs(&s, &b).unwrap() * &all_d) * &w)).unwrap();
            let rhs = s.base().pair(&(&c1 * &w)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
