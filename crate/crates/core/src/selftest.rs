//! The built-in acceptance suite behind `paratower selftest`.
//!
//! Random corpora come from a fixed-seed generator, so every run checks the
//! same cases and produces the same report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bundle::ParabolicBundle;
use crate::cone::{epsilon_kahler_threshold, kxr_check, omega_class, omega_conditions, omega_in_cone, ConePoint, ConeSpec, WeightSpec};
use crate::error::Result;
use crate::lattice::{f_char, nonvanishing_pattern, pi_project, sigma_extremal, sigma_weight, MultiIndex};
use crate::par::Execution;
use crate::poly::EpsilonPolynomial;
use crate::rational::{format_rational, Rational};
use crate::report::{free_of_floats, run, Command, RunOptions, CONVENTIONS};
use crate::ring::{closed_form::ClosedForm, closed_form_nc, pair_monomial, BaseGeometry, ExtraT, TowerClass, TowerMonomial, TowerShape};
use crate::slope::{dim1_exact_slope, leading_term_report};
use crate::stability::{correspondence_check, curve_subobjects, Scenario, Verdict};

const SEED: u64 = 0x7061_7261_746f_7772;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub detail: String,
    pub budget: Option<Duration>,
    pub within_budget: bool,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, budget: Option<Duration>) -> Self {
        Self { id, name, passed: false, checks: 0, failures: Vec::new(), detail: String::new(), budget, within_budget: true }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
        if !ok {
            self.passed = false;
        }
    }

    fn finish(mut self, started: Instant, detail: String) -> Self {
        self.within_budget = self.budget.is_none_or(|b| started.elapsed() <= b);
        self.passed = self.failures.is_empty() && self.within_budget;
        self.detail = detail;
        self
    }

    fn fail_with(mut self, started: Instant, err: &crate::Error) -> Self {
        self.failures.push(format!("error: {err}"));
        self.finish(started, String::new())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "detail": self.detail,
            "budget_seconds": self.budget.map(|b| b.as_secs()),
            "within_budget": self.within_budget,
        })
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn z(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// A curve with `s` marked divisors of the given degrees, `<w> = 1`.
pub fn curve_geometry(ranks: Vec<usize>, degrees: &[i64]) -> Result<TowerShape> {
    let names: Vec<String> = (1..=ranks.len()).map(|u| format!("P{u}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut entries: Vec<(String, Rational)> = vec![("w".into(), z(1))];
    entries.extend(names.iter().zip(degrees).map(|(n, d)| (n.clone(), z(*d))));
    let base = BaseGeometry::from_entries(1, &refs, entries.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    TowerShape::new(base, ranks)
}

/// The projective plane with `s` curves of the given degrees, `w` a line.
pub fn plane_geometry(ranks: Vec<usize>, degrees: &[i64]) -> Result<TowerShape> {
    let names: Vec<String> = (1..=ranks.len()).map(|u| format!("C{u}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut entries: Vec<(String, Rational)> = vec![("w^2".into(), z(1))];
    for (a, da) in names.iter().zip(degrees) {
        entries.push((format!("w {a}"), z(*da)));
        for (b, db) in names.iter().zip(degrees) {
            if a < b {
                entries.push((format!("{a} {b}"), z(da * db)));
            } else if a == b {
                entries.push((format!("{a}^2"), z(da * da)));
            }
        }
    }
    let base = BaseGeometry::from_entries(2, &refs, entries.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    TowerShape::new(base, ranks)
}

fn random_lambdas(rng: &mut ChaCha8Rng, r: usize, last_zero: bool) -> Vec<Rational> {
    let den: i64 = rng.gen_range((r as i64 + 2)..=12);
    let free = if last_zero { r - 1 } else { r };
    let mut nums: Vec<i64> = Vec::new();
    while nums.len() < free {
        let n = rng.gen_range(1..den);
        if !nums.contains(&n) {
            nums.push(n);
        }
    }
    nums.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<Rational> = nums.into_iter().map(|n| q(n, den)).collect();
    if last_zero {
        out.push(z(0));
    }
    out
}

fn random_flag(rng: &mut ChaCha8Rng, r: usize, rank: usize) -> Vec<usize> {
    let mut f: Vec<usize> = (0..r).map(|_| rng.gen_range(0..=rank)).collect();
    f.sort_unstable();
    f
}

fn base_class(shape: &TowerShape, coeffs: &[Rational]) -> TowerClass {
    TowerClass::from_base_vector(shape, coeffs)
}

fn elapsed_ok(budget: Duration) -> Option<Duration> {
    Some(budget)
}

/// Slope polynomials vanish below `eps^sigma` and start with the parabolic slope.
pub fn criterion_leading_term(exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(1, "leading term of the slope polynomial", elapsed_ok(Duration::from_secs(30)));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut rank_lists: Vec<Vec<usize>> = (1..=3).map(|r| vec![r]).collect();
    for a in 1..=3 {
        for b in 1..=3 {
            rank_lists.push(vec![a, b]);
        }
    }
    let mut scenarios = 0;
    let mut by_dim = BTreeMap::new();
    for n in [1u32, 2] {
        for ranks in &rank_lists {
            for k in 0..3 {
                let s = ranks.len();
                let degrees: Vec<i64> = (0..s).map(|_| rng.gen_range(1..=if n == 1 { 3 } else { 2 })).collect();
                let shape = match if n == 1 { curve_geometry(ranks.clone(), &degrees) } else { plane_geometry(ranks.clone(), &degrees) } {
                    Ok(s) => s,
                    Err(e) => return res.fail_with(started, &e),
                };
                let g = shape.base().generator_count();
                let rank = rng.gen_range(1..=4usize);
                let c1: Vec<Rational> = (0..g).map(|_| z(rng.gen_range(-4..=4))).collect();
                let mut omega = vec![z(rng.gen_range(1..=3))];
                omega.extend((1..g).map(|_| q(rng.gen_range(0..=2), 2)));
                let last_zero = k == 2 && rng.gen_bool(0.5);
                let lambdas: Vec<Vec<Rational>> = ranks.iter().map(|&r| random_lambdas(&mut rng, r, last_zero)).collect();
                let filtrations: Vec<Vec<usize>> = ranks.iter().map(|&r| random_flag(&mut rng, r, rank)).collect();
                let label = format!("n={n} r={ranks:?} rank={rank} F={filtrations:?} L={}", fmt_table(&lambdas));
                let outcome = (|| -> Result<_> {
                    let weights = WeightSpec::new(&shape, lambdas, last_zero)?;
                    let b = ParabolicBundle::new(&shape, rank, base_class(&shape, &c1), filtrations)?;
                    leading_term_report(&shape, &b, &omega, &weights, exec)
                })();
                scenarios += 1;
                *by_dim.entry(n).or_insert(0) += 1;
                match outcome {
                    Ok(report) => res.check(report.passes(), || format!("{label}: {}", report.deviations().join("; "))),
                    Err(e) => res.check(false, || format!("{label}: {e}")),
                }
            }
        }
    }
    let detail = format!("{scenarios} scenarios ({} on curves, {} on surfaces)", by_dim[&1], by_dim[&2]);
    res.finish(started, detail)
}

fn fmt_table(t: &[Vec<Rational>]) -> String {
    let rows: Vec<String> = t
        .iter()
        .map(|r| format!("({})", r.iter().map(format_rational).collect::<Vec<_>>().join(",")))
        .collect();
    rows.join("")
}

fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Closed-form extremal values agree with the reduction engine on every monomial they decide.
pub fn criterion_oracle(_exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(2, "closed forms agree with the reduction engine", elapsed_ok(Duration::from_secs(10)));
    let mut covered = 0usize;
    let mut swept = 0usize;
    for n in [1u32, 2] {
        for r in 1..=3usize {
            let shapes = if n == 1 {
                vec![curve_geometry(vec![r], &[1]), curve_with(vec![r], 2, 3)]
            } else {
                vec![plane_geometry(vec![r], &[1]), surface_with(vec![r])]
            };
            for shape in shapes {
                let shape = match shape {
                    Ok(s) => s,
                    Err(e) => return res.fail_with(started, &e),
                };
                let total = n + r as u32;
                for extra in std::iter::once(None).chain((1..=r).map(Some)) {
                    let extra_deg = u32::from(extra.is_some());
                    for ij_deg in 0..=(total - extra_deg) {
                        let eta_deg = total - extra_deg - ij_deg;
                        for ij in compositions(2 * r, ij_deg) {
                            let i = MultiIndex::new(ij[..r].to_vec());
                            let j = MultiIndex::new(ij[r..].to_vec());
                            for eta_exps in compositions(2, eta_deg) {
                                swept += 1;
                                let m = build_monomial(&shape, &eta_exps, &i, &j, extra);
                                let engine = match pair_monomial(&shape, &m) {
                                    Ok(v) => v,
                                    Err(e) => return res.fail_with(started, &e),
                                };
                                if extra.is_none() && !engine.is_zero() {
                                    res.check(nonvanishing_pattern(&i, &j), || {
                                        format!("{} pairs to {} outside the support pattern", m.render(&shape), format_rational(&engine))
                                    });
                                }
                                let eta = TowerClass::monomial(TowerMonomial::from_parts(eta_exps.clone(), vec![vec![0; r]], vec![vec![0; r]]), Rational::one());
                                let extra_t = extra.map(|level| ExtraT { component: 1, level });
                                match closed_form_nc(&shape, std::slice::from_ref(&i), std::slice::from_ref(&j), &eta, extra_t) {
                                    Ok(ClosedForm::Value(v)) => {
                                        covered += 1;
                                        res.check(v == engine, || {
                                            format!("{}: closed form {} vs engine {}", m.render(&shape), format_rational(&v), format_rational(&engine))
                                        });
                                    }
                                    Ok(ClosedForm::NotCovered) => {}
                                    Err(e) => return res.fail_with(started, &e),
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    res.finish(started, format!("{swept} monomials swept, {covered} decided by closed forms"))
}

fn curve_with(ranks: Vec<usize>, w: i64, points: i64) -> Result<TowerShape> {
    let base = BaseGeometry::from_entries(1, &["P"], [("w", z(w)), ("P", z(points))])?;
    TowerShape::new(base, ranks)
}

fn surface_with(ranks: Vec<usize>) -> Result<TowerShape> {
    let base = BaseGeometry::from_entries(2, &["D"], [("w^2", z(2)), ("w D", z(3)), ("D^2", z(-1))])?;
    TowerShape::new(base, ranks)
}

fn build_monomial(shape: &TowerShape, eta: &[u32], i: &MultiIndex, j: &MultiIndex, extra: Option<usize>) -> TowerMonomial {
    let mut t = j.exps().to_vec();
    if let Some(l) = extra {
        t[l - 1] += 1;
    }
    let m = TowerMonomial::from_parts(eta.to_vec(), vec![i.exps().to_vec()], vec![t]);
    debug_assert_eq!(m.components(), shape.components());
    m
}

/// On curves with one blow-up the slope at `w + d - alpha t` is the parabolic slope.
pub fn criterion_curve_exactness(_exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(3, "exact slope on curves", None);
    let worked = (|| -> Result<(Rational, Rational)> {
        let shape = curve_geometry(vec![1], &[1])?;
        let b = ParabolicBundle::new(&shape, 2, base_class(&shape, &[z(3), z(0)]), vec![vec![1]])?;
        dim1_exact_slope(&shape, &b, &q(1, 2))
    })();
    match worked {
        Ok(pair) => res.check(pair == (q(7, 4), q(7, 4)), || format!("worked example gave {pair:?}")),
        Err(e) => return res.fail_with(started, &e),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    for _ in 0..100 {
        let points = rng.gen_range(1..=4);
        let rank = rng.gen_range(1..=5usize);
        let deg = rng.gen_range(-10..=10);
        let r = rng.gen_range(0..=rank);
        let den = rng.gen_range(2..=20);
        let alpha = q(rng.gen_range(1..den), den);
        let outcome = (|| -> Result<(Rational, Rational)> {
            let shape = curve_geometry(vec![1], &[points])?;
            let b = ParabolicBundle::new(&shape, rank, base_class(&shape, &[z(deg), z(0)]), vec![vec![r]])?;
            dim1_exact_slope(&shape, &b, &alpha)
        })();
        let label = format!("rank {rank}, degree {deg}, R = {r}, alpha = {}, {points} points", format_rational(&alpha));
        match outcome {
            Ok((s, p)) => res.check(s == p, || format!("{label}: {} vs {}", format_rational(&s), format_rational(&p))),
            Err(e) => res.check(false, || format!("{label}: {e}")),
        }
    }
    res.finish(started, "worked example and 100 random scenarios".into())
}

/// Certified threshold on the plane, grid membership below it, failure above it, and convexity.
pub fn criterion_kahler_cone(_exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(4, "Kähler cone threshold and convexity", None);
    let outcome = (|| -> Result<String> {
        let shape = plane_geometry(vec![2], &[1])?;
        let cone = ConeSpec::new(vec![vec![z(1), z(1)]], 2)?;
        let omega = vec![z(1), z(0)];
        let c = vec![z(0), z(1)];
        let weights = WeightSpec::new(&shape, vec![vec![q(1, 2), q(1, 4)]], false)?;
        let precision = q(1, 1000);
        let th = epsilon_kahler_threshold(&shape, &omega, &weights, &cone, std::slice::from_ref(&c), &precision)?;
        let eps0 = th.epsilon.finite().cloned().unwrap_or_else(Rational::zero);
        res.check((&eps0 - z(1)).abs_le(&precision), || format!("threshold {} is not within 1/1000 of 1", format_rational(&eps0)));
        let binding = EpsilonPolynomial::from_terms([(0, z(1)), (1, q(-1, 2)), (2, q(-1, 2))]);
        res.check(th.binding.iter().any(|b| b.poly == binding), || "1 - e/2 - e^2/2 is not among the binding conditions".into());
        let conditions = omega_conditions(&shape, &omega, &weights, &cone, std::slice::from_ref(&c))?;
        let om = omega_class(&shape, &omega, &weights)?.symbolic_point(&shape, 1);
        let point_at = |eps: &Rational| {
            let at = |v: &[EpsilonPolynomial]| v.iter().map(|p| p.eval(eps)).collect::<Vec<_>>();
            ConePoint { omega: at(&om.omega), a: at(&om.a), b: at(&om.b) }
        };
        for k in 1..=100 {
            let eps = &eps0 * q(k, 100);
            let inside = omega_in_cone(&conditions, &eps) && kxr_check(&shape, 2, &point_at(&eps), &cone, &c)?.holds;
            res.check(inside, || format!("Omega leaves the cone at eps = {}", format_rational(&eps)));
        }
        let above = th.upper.clone().unwrap_or_else(|| &eps0 + &precision);
        let outside = !omega_in_cone(&conditions, &above) && !kxr_check(&shape, 2, &point_at(&above), &cone, &c)?.holds;
        res.check(outside, || format!("Omega still in the cone at eps = {}", format_rational(&above)));

        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
        let mut passing = Vec::new();
        let mut drawn = 0;
        while passing.len() < 200 && drawn < 100_000 {
            drawn += 1;
            let p = ConePoint {
                omega: vec![q(rng.gen_range(1..=40), 10), q(rng.gen_range(-10..=10), 10)],
                a: (0..2).map(|_| q(rng.gen_range(-2..=30), 10)).collect(),
                b: (0..2).map(|_| q(rng.gen_range(-20..=2), 10)).collect(),
            };
            if kxr_check(&shape, 2, &p, &cone, &c)?.holds {
                passing.push(p);
            }
        }
        res.check(passing.len() == 200, || "could not sample 200 points of the cone".into());
        for pair in passing.chunks(2) {
            let (p, o) = (&pair[0], &pair[1]);
            let ok = kxr_check(&shape, 2, &p.add(o), &cone, &c)?.holds && kxr_check(&shape, 2, &p.scale(&z(2)), &cone, &c)?.holds;
            res.check(ok, || "sum or double of passing points leaves the cone".into());
        }
        Ok(format!("threshold {} (binding root below {}), {} convex pairs", format_rational(&eps0), format_rational(&above), passing.len() / 2))
    })();
    match outcome {
        Ok(detail) => res.finish(started, detail),
        Err(e) => res.fail_with(started, &e),
    }
}

trait AbsLe {
    fn abs_le(&self, bound: &Rational) -> bool;
}

impl AbsLe for Rational {
    fn abs_le(&self, bound: &Rational) -> bool {
        self <= bound && &-self.clone() <= bound
    }
}

/// Parabolic and equivariant stability agree below the per-scenario bound.
pub fn criterion_stability(exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(5, "stability correspondence on curves", None);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut tally: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut subobjects = 0usize;
    for _ in 0..100 {
        let points = rng.gen_range(1..=3);
        let rank = rng.gen_range(2..=4usize);
        let deg = rng.gen_range(-6..=6i64);
        let r = rng.gen_range(0..=rank);
        let den = rng.gen_range(2..=12);
        let alpha = q(rng.gen_range(1..den), den);
        let shift = rng.gen_range(3..=6i64);
        let outcome = (|| -> Result<_> {
            let shape = curve_geometry(vec![1], &[points])?;
            let b = ParabolicBundle::new(&shape, rank, base_class(&shape, &[z(deg), z(0)]), vec![vec![r]])?;
            let low = deg.div_euclid(rank as i64) - shift;
            let subs = curve_subobjects(&shape, &b, 1..=1, low..=low + 5)?;
            let weights = WeightSpec::new(&shape, vec![vec![alpha.clone()]], false)?;
            let sc = Scenario::new(shape, b, weights, vec![z(1), z(0)], subs)?;
            correspondence_check(&sc, None, &q(1, 1000), exec).map(|rep| (rep, sc.subobjects.len()))
        })();
        let label = format!("rank {rank}, degree {deg}, R = {r}, alpha = {}, {points} points", format_rational(&alpha));
        match outcome {
            Ok((rep, n)) => {
                subobjects += n;
                *tally.entry(rep.parabolic.verdict.as_str()).or_insert(0) += 1;
                res.check(rep.counterexamples.is_empty(), || {
                    let c = &rep.counterexamples[0];
                    format!("{label}: direction {} fails at eps = {}", c.direction, format_rational(&c.epsilon))
                });
                res.check(rep.parabolic.verdict != Verdict::Stable || rep.near_zero.verdict == Verdict::Stable, || {
                    format!("{label}: near-zero verdict disagrees with parabolic stability")
                });
            }
            Err(e) => res.check(false, || format!("{label}: {e}")),
        }
    }
    let counts: Vec<String> = tally.iter().map(|(k, v)| format!("{v} {k}")).collect();
    res.finish(started, format!("100 scenarios, {subobjects} subobjects, parabolic verdicts: {}", counts.join(", ")))
}

/// Projection identities of the weight characters and extremality of the grading.
pub fn criterion_lattice(_exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(6, "weight lattice identities", None);
    let outcome = (|| -> Result<()> {
        for r in 2..=64usize {
            for j in 1..r {
                let top = f_char(j + 1, j + 1)?;
                res.check(pi_project(&top)? == f_char(j, j)?, || format!("projection of f_{} in rank {}", j + 1, j + 1));
                for i in 1..=j {
                    res.check(pi_project(&f_char(i, j + 1)?)? == f_char(i, j)?, || format!("projection fixes f_{i} in rank {}", j + 1));
                }
                res.check(f_char(j + 1, j + 1)?.embed(r)? == f_char(j + 1, r)?, || format!("embedding f_{} into rank {r}", j + 1));
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        return res.fail_with(started, &e);
    }
    let mut pattern_pairs = 0usize;
    for r in 1..=6usize {
        let extremal = sigma_extremal(r);
        let ones = MultiIndex::ones(r);
        for total in 0..=(r as u32 + 3) {
            for ij in compositions(2 * r, total) {
                let i = MultiIndex::new(ij[..r].to_vec());
                let j = MultiIndex::new(ij[r..].to_vec());
                let sigma: BigUint = sigma_weight(&i) + sigma_weight(&j);
                if total == r as u32 && j.is_zero() {
                    let single_extremal = sigma_weight(&i) == extremal;
                    res.check(single_extremal == (i == ones), || format!("single index {:?}", i.exps()));
                }
                if !nonvanishing_pattern(&i, &j) {
                    continue;
                }
                pattern_pairs += 1;
                let norm = i.norm() + j.norm();
                res.check(norm >= r as u64 && sigma >= extremal, || format!("bounds fail for I={:?} J={:?}", i.exps(), j.exps()));
                let equality = norm == r as u64 || sigma == extremal;
                let extremal_pattern = j.is_zero() && i == ones;
                res.check(equality == extremal_pattern, || format!("equality case I={:?} J={:?}", i.exps(), j.exps()));
            }
        }
        res.check(sigma_weight(&ones) == extremal && sigma_extremal(r) + BigUint::one() == BigUint::one() << r, || format!("sigma of ones, r = {r}"));
    }
    res.finish(started, format!("ranks up to 64 for projections, {pattern_pairs} supported pairs up to rank 6"))
}

/// Embedded scenarios used by the determinism check and the examples.
pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    ("plane_line", include_str!("../scenarios/plane_line.json")),
    ("plane_line_r2", include_str!("../scenarios/plane_line_r2.json")),
    ("plane_last_weight_zero", include_str!("../scenarios/plane_last_weight_zero.json")),
    ("curve_point", include_str!("../scenarios/curve_point.json")),
    ("curve_rank_two", include_str!("../scenarios/curve_rank_two.json")),
    ("curve_two_points", include_str!("../scenarios/curve_two_points.json")),
];

/// Reports are identical across runs and execution modes and contain no floats.
pub fn criterion_determinism(_exec: Execution) -> CriterionResult {
    let started = Instant::now();
    let mut res = CriterionResult::new(7, "deterministic exact reports", None);
    let mut reports = 0;
    for (name, text) in BUILTIN_SCENARIOS {
        for cmd in [Command::Pair, Command::Slope, Command::Cone, Command::Stability, Command::Weights] {
            let seq = RunOptions { exec: Execution::Sequential, ..Default::default() };
            let par = RunOptions { exec: Execution::Parallel, ..Default::default() };
            let runs: Vec<_> = [&seq, &seq, &par].iter().map(|o| run(cmd, text, o)).collect();
            match (&runs[0], &runs[1], &runs[2]) {
                (Ok(a), Ok(b), Ok(c)) => {
                    reports += 1;
                    res.check(a.to_json_string() == b.to_json_string(), || format!("{name} {}: reruns differ", cmd.name()));
                    res.check(a.value["results"] == c.value["results"], || format!("{name} {}: parallel run differs", cmd.name()));
                    res.check(free_of_floats(&a.value), || format!("{name} {}: report contains a float", cmd.name()));
                }
                (Err(a), Err(b), Err(c)) => {
                    res.check(a == b && b == c, || format!("{name} {}: errors differ", cmd.name()));
                }
                _ => res.check(false, || format!("{name} {}: runs disagree on success", cmd.name())),
            }
        }
    }
    res.finish(started, format!("{reports} reports compared"))
}

pub type CriterionFn = fn(Execution) -> CriterionResult;

pub const CRITERIA: &[CriterionFn] = &[
    criterion_leading_term,
    criterion_oracle,
    criterion_curve_exactness,
    criterion_kahler_cone,
    criterion_stability,
    criterion_lattice,
    criterion_determinism,
];

pub fn run_all(exec: Execution) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|f| f(exec)).collect()
}

/// The selftest report; identical from run to run.
pub fn selftest_report(exec: Execution) -> crate::report::Report {
    let results = run_all(exec);
    let ok = results.iter().all(|r| r.passed);
    let value = json!({
        "command": "selftest",
        "conventions": CONVENTIONS,
        "criteria": results.iter().map(CriterionResult::to_json).collect::<Vec<_>>(),
        "ok": ok,
    });
    crate::report::Report { value, ok }
}
