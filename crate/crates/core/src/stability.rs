//! Parabolic and equivariant (semi)stability over finite lists of subobjects.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::bundle::{c1_upstairs, ParabolicBundle, SubobjectData};
use crate::cone::{omega_class, WeightSpec};
use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::poly::{Bound, EpsilonPolynomial};
use crate::rational::Rational;
use crate::ring::{TowerClass, TowerMonomial, TowerShape};
use crate::slope::{par_slope, slope_poly_of};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl Verdict {
    pub fn is_semistable(self) -> bool {
        self != Verdict::Unstable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::StrictlySemistable => "strictly-semistable",
            Verdict::Unstable => "unstable",
        }
    }
}

/// The subobject of largest slope, first listed among equals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub index: usize,
    pub slope: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub parent_slope: Rational,
    pub witness: Option<Witness>,
}

impl StabilityVerdict {
    pub fn is_vacuous(&self) -> bool {
        self.witness.is_none()
    }
}

/// A parabolic bundle with the data needed to compare slopes.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub shape: TowerShape,
    pub bundle: ParabolicBundle,
    pub weights: WeightSpec,
    pub omega: Vec<Rational>,
    pub subobjects: Vec<SubobjectData>,
}

impl Scenario {
    pub fn new(
        shape: TowerShape,
        bundle: ParabolicBundle,
        weights: WeightSpec,
        omega: Vec<Rational>,
        subobjects: Vec<SubobjectData>,
    ) -> Result<Self> {
        bundle.validate(&shape)?;
        if omega.len() != shape.base().generator_count() {
            return Err(Error::ShapeMismatch("w has the wrong number of coefficients".into()));
        }
        for (i, s) in subobjects.iter().enumerate() {
            s.validate_against(&shape, &bundle, i)?;
        }
        Ok(Self { shape, bundle, weights, omega, subobjects })
    }
}

fn decide(parent: &Rational, subs: &[Rational]) -> StabilityVerdict {
    let mut witness: Option<Witness> = None;
    for (index, s) in subs.iter().enumerate() {
        if witness.as_ref().is_none_or(|w| s > &w.slope) {
            witness = Some(Witness { index, slope: s.clone() });
        }
    }
    let verdict = match witness.as_ref().map(|w| w.slope.cmp(parent)) {
        None | Some(Ordering::Less) => Verdict::Stable,
        Some(Ordering::Equal) => Verdict::StrictlySemistable,
        Some(Ordering::Greater) => Verdict::Unstable,
    };
    StabilityVerdict { verdict, parent_slope: parent.clone(), witness }
}

pub fn par_stability(sc: &Scenario) -> Result<StabilityVerdict> {
    let parent = par_slope(&sc.shape, &sc.bundle, &sc.omega, &sc.weights)?;
    let subs = sc
        .subobjects
        .iter()
        .map(|s| par_slope(&sc.shape, &s.as_bundle(), &sc.omega, &sc.weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(decide(&parent, &subs))
}

/// Slope polynomials of the parent and of every subobject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeTable {
    pub parent: EpsilonPolynomial,
    pub subobjects: Vec<EpsilonPolynomial>,
}

pub fn slope_table(sc: &Scenario, exec: Execution) -> Result<SlopeTable> {
    let omega = omega_class(&sc.shape, &sc.omega, &sc.weights)?;
    let mut bundles = vec![sc.bundle.clone()];
    bundles.extend(sc.subobjects.iter().map(SubobjectData::as_bundle));
    // parallelism goes to the outer loop, each expansion runs sequentially
    let polys = map_ordered(exec, &bundles, |b| {
        slope_poly_of(&sc.shape, &c1_upstairs(&sc.shape, b)?, b.rank, &omega, Execution::Sequential)
    });
    let mut polys = polys.into_iter().collect::<Result<Vec<_>>>()?;
    let parent = polys.remove(0);
    Ok(SlopeTable { parent, subobjects: polys })
}

impl SlopeTable {
    pub fn verdict_at(&self, eps: &Rational) -> Result<StabilityVerdict> {
        if !eps.is_positive() {
            return Err(Error::NonPositiveEpsilon(crate::rational::format_rational(eps)));
        }
        let subs: Vec<Rational> = self.subobjects.iter().map(|p| p.eval(eps)).collect();
        Ok(decide(&self.parent.eval(eps), &subs))
    }

    pub fn differences(&self) -> Vec<EpsilonPolynomial> {
        self.subobjects.iter().map(|s| self.parent.sub(s)).collect()
    }
}

pub fn equi_stability_at(sc: &Scenario, eps: &Rational, exec: Execution) -> Result<StabilityVerdict> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEpsilon(crate::rational::format_rational(eps)));
    }
    slope_table(sc, exec)?.verdict_at(eps)
}

/// The verdict for all small `eps`, valid on `(0, bound]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearZeroVerdict {
    pub verdict: Verdict,
    /// Index of the subobject whose slope is largest for small `eps`.
    pub witness: Option<usize>,
    pub bound: Bound,
    /// Subobjects whose slope polynomial equals the parent's.
    pub ties: Vec<usize>,
}

/// Compares `p` and `q` for all sufficiently small positive `eps`.
fn cmp_near_zero(p: &EpsilonPolynomial, q: &EpsilonPolynomial) -> Ordering {
    p.sub(q).sign_near_zero().unwrap_or(Ordering::Equal)
}

pub(crate) fn analyze_near_zero(table: &SlopeTable, precision: &Rational) -> Result<NearZeroVerdict> {
    let mut bound = Bound::Unbounded;
    let mut ties = Vec::new();
    let mut worst: Option<usize> = None;
    for (i, diff) in table.differences().into_iter().enumerate() {
        if diff.is_zero() {
            ties.push(i);
        } else {
            bound = bound.min(diff.first_positive_root(precision)?);
        }
        let sub = &table.subobjects[i];
        if worst.is_none_or(|w| cmp_near_zero(sub, &table.subobjects[w]) == Ordering::Greater) {
            worst = Some(i);
        }
    }
    let verdict = match worst.map(|w| cmp_near_zero(&table.subobjects[w], &table.parent)) {
        None | Some(Ordering::Less) => Verdict::Stable,
        Some(Ordering::Equal) => Verdict::StrictlySemistable,
        Some(Ordering::Greater) => Verdict::Unstable,
    };
    Ok(NearZeroVerdict { verdict, witness: worst, bound, ties })
}

/// Errors with [`Error::IdenticalSlopes`] when a subobject has the parent's
/// slope for every `eps`.
pub fn equi_stability_near_zero(sc: &Scenario, precision: &Rational, exec: Execution) -> Result<NearZeroVerdict> {
    let nz = analyze_near_zero(&slope_table(sc, exec)?, precision)?;
    if let Some(&index) = nz.ties.first() {
        return Err(Error::IdenticalSlopes { index });
    }
    Ok(nz)
}

/// A grid point at which the equivariant and parabolic verdicts disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// 1: parabolic stability did not give stability at `eps`.
    /// 2: semistability at `eps` came with parabolic instability.
    pub direction: u8,
    pub epsilon: Rational,
    pub equivariant: StabilityVerdict,
    pub parabolic: StabilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrespondenceReport {
    pub parabolic: StabilityVerdict,
    pub near_zero: NearZeroVerdict,
    pub grid: Vec<Rational>,
    pub verdicts: Vec<StabilityVerdict>,
    pub counterexamples: Vec<Counterexample>,
}

/// `bound * k / 10` for `k = 1..=10`, or `k / 10` without a bound.
pub fn default_grid(bound: &Bound) -> Vec<Rational> {
    let top = bound.finite().cloned().unwrap_or_else(Rational::one);
    (1..=10).map(|k| &top * Rational::new(k.into(), 10.into())).collect()
}

/// Checks on a grid below the per-scenario bound that parabolic stability gives
/// equivariant stability, and that equivariant semistability excludes
/// parabolic instability.
pub fn correspondence_check(
    sc: &Scenario,
    grid: Option<&[Rational]>,
    precision: &Rational,
    exec: Execution,
) -> Result<CorrespondenceReport> {
    let parabolic = par_stability(sc)?;
    let table = slope_table(sc, exec)?;
    let near_zero = analyze_near_zero(&table, precision)?;
    let grid: Vec<Rational> = match grid {
        Some(g) => g
            .iter()
            .filter(|e| e.is_positive() && near_zero.bound.finite().is_none_or(|b| *e <= b))
            .cloned()
            .collect(),
        None => default_grid(&near_zero.bound),
    };
    let mut verdicts = Vec::with_capacity(grid.len());
    let mut counterexamples = Vec::new();
    for eps in &grid {
        let equi = table.verdict_at(eps)?;
        let direction = if parabolic.verdict == Verdict::Stable && equi.verdict != Verdict::Stable {
            Some(1)
        } else if equi.verdict.is_semistable() && parabolic.verdict == Verdict::Unstable {
            Some(2)
        } else {
            None
        };
        if let Some(direction) = direction {
            counterexamples.push(Counterexample {
                direction,
                epsilon: eps.clone(),
                equivariant: equi.clone(),
                parabolic: parabolic.clone(),
            });
        }
        verdicts.push(equi);
    }
    Ok(CorrespondenceReport { parabolic, near_zero, grid, verdicts, counterexamples })
}

/// Every subobject of a bundle on a curve with rank in `ranks`, degree in
/// `degrees`, and flags `R'_(u,i) <= min(R_(u,i), rank)` that are nondecreasing.
pub fn curve_subobjects(
    shape: &TowerShape,
    parent: &ParabolicBundle,
    ranks: std::ops::RangeInclusive<usize>,
    degrees: std::ops::RangeInclusive<i64>,
) -> Result<Vec<SubobjectData>> {
    let base = shape.base();
    if base.dim() != 1 {
        return Err(Error::ShapeMismatch("subobject generation is for curves".into()));
    }
    let mut w_exp = vec![0; base.generator_count()];
    w_exp[0] = 1;
    let w_degree = base.lookup(&w_exp)?.clone();
    if w_degree.is_zero() {
        return Err(Error::InvalidGeometry("w has degree 0".into()));
    }
    let w = TowerMonomial::generator(shape, 0);
    let mut out = Vec::new();
    for rank in ranks.filter(|r| (1..parent.rank).contains(r)) {
        let per_component: Vec<Vec<Vec<usize>>> =
            parent.filtrations.iter().map(|f| flags_below(f, rank)).collect();
        let combos = cartesian(&per_component);
        for deg in degrees.clone() {
            let c1 = TowerClass::monomial(w.clone(), Rational::from_integer(deg.into()) / &w_degree);
            for filtrations in &combos {
                out.push(SubobjectData { rank, c1: c1.clone(), filtrations: filtrations.clone() });
            }
        }
    }
    Ok(out)
}

fn flags_below(caps: &[usize], rank: usize) -> Vec<Vec<usize>> {
    fn go(caps: &[usize], rank: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            out.push(cur.clone());
            return;
        }
        let cap = caps[cur.len()].min(rank);
        for v in min..=cap {
            cur.push(v);
            go(caps, rank, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(caps, rank, 0, &mut Vec::new(), &mut out);
    out
}

fn cartesian(choices: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::ring::BaseGeometry;
    use proptest::prelude::*;

    fn curve() -> TowerShape {
        let base = BaseGeometry::from_entries(1, &["P"], [("w", int(1)), ("P", int(1))]).unwrap();
        TowerShape::new(base, vec![1]).unwrap()
    }

    fn plane() -> TowerShape {
        let base = BaseGeometry::from_entries(2, &["D"], [("w^2", int(1)), ("w D", int(1)), ("D^2", int(1))]).unwrap();
        TowerShape::new(base, vec![1]).unwrap()
    }

    fn deg(shape: &TowerShape, d: i64) -> TowerClass {
        TowerClass::monomial(TowerMonomial::generator(shape, 0), int(d))
    }

    fn sub(shape: &TowerShape, rank: usize, d: i64, r: usize) -> SubobjectData {
        SubobjectData { rank, c1: deg(shape, d), filtrations: vec![vec![r]] }
    }

    fn scenario(shape: TowerShape, rank: usize, d: i64, r: usize, lambda: Rational, subs: Vec<SubobjectData>) -> Scenario {
        let b = ParabolicBundle::new(&shape, rank, deg(&shape, d), vec![vec![r]]).unwrap();
        let w = WeightSpec::new(&shape, vec![vec![lambda]], false).unwrap();
        let mut omega = vec![int(0); shape.base().generator_count()];
        omega[0] = int(1);
        Scenario::new(shape, b, w, omega, subs).unwrap()
    }

    #[test]
    fn parabolic_examples() {
        let s = curve();
        let sc = scenario(s.clone(), 2, 0, 1, rat(1, 2), vec![sub(&s, 1, 0, 1)]);
        let v = par_stability(&sc).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable);
        assert_eq!(v.witness, Some(Witness { index: 0, slope: rat(1, 2) }));

        let sc = scenario(s.clone(), 2, 0, 1, rat(1, 2), vec![sub(&s, 1, -1, 1), sub(&s, 1, -1, 0)]);
        let v = par_stability(&sc).unwrap();
        assert_eq!(v.verdict, Verdict::Stable);
        assert_eq!(v.witness.unwrap().slope, rat(-1, 2));

        // 1/4 = (0 + 1/2) / 2 is reached by a rank-1 subobject of degree 0 with weight 1/4
        let sc = scenario(s.clone(), 2, 0, 1, rat(1, 4), vec![sub(&s, 1, -1, 0), sub(&s, 1, 0, 1)]);
        assert_eq!(par_stability(&sc).unwrap().verdict, Verdict::Unstable);
        let sc = scenario(s.clone(), 2, 1, 0, rat(1, 2), vec![sub(&s, 1, 0, 0), sub(&s, 1, -3, 0)]);
        let v = par_stability(&sc).unwrap();
        assert_eq!(v.verdict, Verdict::Stable);
        let sc = scenario(s.clone(), 4, 2, 0, rat(1, 2), vec![sub(&s, 2, 1, 0)]);
        assert_eq!(par_stability(&sc).unwrap().verdict, Verdict::StrictlySemistable);

        let sc = scenario(s, 2, 0, 1, rat(1, 2), vec![]);
        let v = par_stability(&sc).unwrap();
        assert!(v.is_vacuous() && v.verdict == Verdict::Stable);
    }

    #[test]
    fn equivariant_at_eps() {
        let s = plane();
        let sc = scenario(s.clone(), 2, 3, 1, rat(1, 2), vec![sub(&s, 1, 1, 1), sub(&s, 1, 1, 0)]);
        let par = par_stability(&sc).unwrap();
        assert_eq!(par.verdict, Verdict::Stable);
        let eq = equi_stability_at(&sc, &rat(1, 10), Execution::default()).unwrap();
        assert_eq!(eq.verdict, Verdict::Stable);

        let c = curve();
        let sc = scenario(c.clone(), 2, 0, 1, rat(1, 2), vec![sub(&c, 1, 0, 1)]);
        let eq = equi_stability_at(&sc, &rat(1, 100), Execution::default()).unwrap();
        assert_eq!(eq.verdict, Verdict::Unstable);
        assert_eq!(eq.witness.unwrap().index, 0);
        assert!(equi_stability_at(&sc, &int(0), Execution::default()).is_err());
    }

    #[test]
    fn near_zero_verdicts() {
        let s = plane();
        let prec = rat(1, 1000);
        let sc = scenario(s.clone(), 2, 3, 1, rat(1, 2), vec![sub(&s, 1, 1, 1)]);
        let nz = equi_stability_near_zero(&sc, &prec, Execution::default()).unwrap();
        assert_eq!(nz.verdict, Verdict::Stable);
        assert!(nz.bound.finite().is_none_or(|b| b.is_positive()));

        // same parabolic slope, broken at higher order
        let tie = scenario(s.clone(), 2, 2, 0, rat(1, 2), vec![sub(&s, 1, 1, 0)]);
        assert_eq!(par_stability(&tie).unwrap().verdict, Verdict::StrictlySemistable);
        let err = equi_stability_near_zero(&tie, &prec, Execution::default()).unwrap_err();
        assert!(matches!(err, Error::IdenticalSlopes { index: 0 }));
    }

    #[test]
    fn higher_order_breaks_parabolic_tie() {
        // both parabolic slopes are 1/2; the full slopes are eps/2 - eps^2/12 and eps/2 - eps^2/8
        let s = plane();
        let sc = scenario(s.clone(), 3, 1, 1, rat(1, 2), vec![sub(&s, 1, 0, 1)]);
        assert_eq!(par_stability(&sc).unwrap().verdict, Verdict::StrictlySemistable);
        let table = slope_table(&sc, Execution::default()).unwrap();
        assert_eq!(table.parent, EpsilonPolynomial::from_terms([(1, rat(1, 2)), (2, rat(-1, 12))]));
        assert_eq!(table.subobjects[0], EpsilonPolynomial::from_terms([(1, rat(1, 2)), (2, rat(-1, 8))]));
        let nz = equi_stability_near_zero(&sc, &rat(1, 1000), Execution::default()).unwrap();
        assert_eq!(nz.verdict, Verdict::Stable);
        assert_eq!(nz.bound, Bound::Unbounded);
    }

    #[test]
    fn correspondence_on_examples() {
        let c = curve();
        let parent = ParabolicBundle::new(&c, 3, deg(&c, 1), vec![vec![2]]).unwrap();
        let subs = curve_subobjects(&c, &parent, 1..=2, -2..=3).unwrap();
        assert_eq!(subs.len(), 6 * (2 + 3));
        let w = WeightSpec::new(&c, vec![vec![rat(2, 3)]], false).unwrap();
        let sc = Scenario::new(c, parent, w, vec![int(1), int(0)], subs).unwrap();
        let report = correspondence_check(&sc, None, &rat(1, 1000), Execution::default()).unwrap();
        assert!(report.counterexamples.is_empty());
        assert_eq!(report.grid.len(), 10);
    }

    #[test]
    fn flags_respect_caps() {
        assert_eq!(flags_below(&[1, 2], 1), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(flags_below(&[0], 3), vec![vec![0]]);
    }

    #[test]
    fn rejects_malformed_subobjects() {
        let s = curve();
        let b = ParabolicBundle::new(&s, 2, deg(&s, 0), vec![vec![1]]).unwrap();
        let w = WeightSpec::new(&s, vec![vec![rat(1, 2)]], false).unwrap();
        let bad = vec![sub(&s, 1, 0, 0), sub(&s, 2, 0, 1)];
        let err = Scenario::new(s, b, w, vec![int(1), int(0)], bad).unwrap_err();
        assert!(matches!(err, Error::MalformedSubobject { index: 1, .. }));
    }

    /// rank, degree, flag rank, weight as (num, den), subobjects as (degree, flag rank)
    type CurveCase = (usize, i64, usize, (i64, i64), Vec<(i64, usize)>);

    fn curve_case() -> impl Strategy<Value = CurveCase> {
        (2usize..4, -4i64..5).prop_flat_map(|(rank, d)| {
            (
                Just(rank),
                Just(d),
                0..=rank,
                (1i64..9, 10i64..11),
                proptest::collection::vec((-4i64..5, 0usize..2), 0..5),
            )
        })
    }

    proptest! {
        #[test]
        fn adding_subobjects_only_worsens((rank, d, r, (ln, ld), extra) in curve_case(), more in (-4i64..5, 0usize..2)) {
            let s = curve();
            let subs: Vec<SubobjectData> = extra.iter().map(|(e, f)| sub(&s, 1, *e, (*f).min(r))).collect();
            let sc = scenario(s.clone(), rank, d, r, rat(ln, ld), subs.clone());
            let before = par_stability(&sc).unwrap().verdict;
            let mut grown = subs;
            grown.push(sub(&s, 1, more.0, more.1.min(r)));
            let sc2 = scenario(s, rank, d, r, rat(ln, ld), grown);
            prop_assert!(par_stability(&sc2).unwrap().verdict >= before);
        }

        #[test]
        fn near_zero_matches_grid((rank, d, r, (ln, ld), extra) in curve_case()) {
            let s = plane();
            let subs: Vec<SubobjectData> = extra.iter().map(|(e, f)| sub(&s, 1, *e, (*f).min(r))).collect();
            let sc = scenario(s, rank, d, r, rat(ln, ld), subs);
            let table = slope_table(&sc, Execution::Sequential).unwrap();
            let nz = analyze_near_zero(&table, &rat(1, 1000)).unwrap();
            prop_assume!(nz.ties.is_empty());
            for eps in default_grid(&nz.bound) {
                prop_assert_eq!(table.verdict_at(&eps).unwrap().verdict, nz.verdict);
            }
        }

        #[test]
        fn scaling_w_keeps_verdicts((rank, d, r, (ln, ld), extra) in curve_case(), k in 1i64..6) {
            let s = plane();
            let subs: Vec<SubobjectData> = extra.iter().map(|(e, f)| sub(&s, 1, *e, (*f).min(r))).collect();
            let mut sc = scenario(s, rank, d, r, rat(ln, ld), subs);
            let before = par_stability(&sc).unwrap().verdict;
            sc.omega = sc.omega.iter().map(|x| x * int(k)).collect();
            prop_assert_eq!(par_stability(&sc).unwrap().verdict, before);
        }
    }
}
