//! Kähler cone predicates on the tower, the class `Omega(w, Lambda, eps)`, and
//! certified thresholds for its cone membership.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{Bound, EpsilonPolynomial};
use crate::rational::{format_rational, Rational};
use crate::ring::{TowerClass, TowerMonomial, TowerShape};

/// An open cone `{x : A x > 0}` in the coefficient space of base classes
/// (coordinates ordered `w, D_1, ..., D_s`, then extra generators).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    rows: Vec<Vec<Rational>>,
}

impl ConeSpec {
    /// The rows must all have length `dim` and `w` itself must satisfy them.
    pub fn new(rows: Vec<Vec<Rational>>, dim: usize) -> Result<Self> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidGeometry(format!(
                    "cone inequality {} has {} coefficients, expected {dim}",
                    k + 1,
                    row.len()
                )));
            }
            if !row[0].is_positive() {
                return Err(Error::InvalidGeometry(format!("w violates cone inequality {}", k + 1)));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(Vec::len)
    }

    /// Index of the first violated inequality.
    pub fn violated(&self, x: &[Rational]) -> Option<usize> {
        self.rows.iter().position(|row| !dot(row, x).is_positive())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.violated(x).is_none()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[Rational], k: &Rational, y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a + k * b).collect()
}

/// Parabolic weights `1 > lambda_(u,1) > ... > lambda_(u,r_u) > 0`.
///
/// In last-weight-zero mode the final weight of each component is `0` and the
/// matching ratio `beta_(u,r_u)` becomes the parameter `eps` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpec {
    lambdas: Vec<Vec<Rational>>,
    last_weight_zero: bool,
}

impl WeightSpec {
    pub fn new(shape: &TowerShape, lambdas: Vec<Vec<Rational>>, last_weight_zero: bool) -> Result<Self> {
        if lambdas.len() != shape.components() {
            return Err(Error::MalformedWeights(format!(
                "{} weight lists for {} components",
                lambdas.len(),
                shape.components()
            )));
        }
        for (u, (ls, &r)) in lambdas.iter().zip(shape.ranks()).enumerate() {
            let u = u + 1;
            if ls.len() != r {
                return Err(Error::MalformedWeights(format!("component {u}: {} weights, tower rank {r}", ls.len())));
            }
            let free = if last_weight_zero {
                if !ls[r - 1].is_zero() {
                    return Err(Error::MalformedWeights(format!("component {u}: last weight must be 0")));
                }
                &ls[..r - 1]
            } else {
                &ls[..]
            };
            let mut prev = Rational::one();
            for (i, l) in free.iter().enumerate() {
                if !(l < &prev && l.is_positive()) {
                    return Err(Error::MalformedWeights(format!(
                        "component {u}: weight {} = {} breaks 1 > l_1 > ... > 0",
                        i + 1,
                        format_rational(l)
                    )));
                }
                prev = l.clone();
            }
        }
        Ok(Self { lambdas, last_weight_zero })
    }

    pub fn lambdas(&self, u: usize) -> &[Rational] {
        &self.lambdas[u - 1]
    }

    pub fn all(&self) -> &[Vec<Rational>] {
        &self.lambdas
    }

    pub fn last_weight_zero(&self) -> bool {
        self.last_weight_zero
    }

    /// `beta_(u,1) = lambda_(u,1)`, `beta_(u,j) = lambda_(u,j) / lambda_(u,j-1)`;
    /// `None` stands for the symbolic `eps` in last-weight-zero mode.
    pub fn betas(&self, u: usize) -> Vec<Option<Rational>> {
        let ls = self.lambdas(u);
        let r = ls.len();
        (0..r)
            .map(|j| {
                if self.last_weight_zero && j == r - 1 {
                    None
                } else if j == 0 {
                    Some(ls[0].clone())
                } else {
                    Some(&ls[j] / &ls[j - 1])
                }
            })
            .collect()
    }
}

/// One summand `coef * eps^eps_exp * monomial` of `Omega`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaTerm {
    pub monomial: TowerMonomial,
    pub coef: Rational,
    pub eps_exp: u32,
}

/// `Omega(w, Lambda, eps) = w + sum_u sum_j eps^(2^(j-1)) (d_(u,j) - beta_(u,j) t_(u,j))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaClass {
    pub terms: Vec<OmegaTerm>,
}

pub(crate) fn level_exponent(j: usize) -> Result<u32> {
    1u32.checked_shl((j - 1) as u32)
        .ok_or_else(|| Error::Unsupported(format!("eps exponent overflow at level {j}")))
}

pub fn omega_class(shape: &TowerShape, omega: &[Rational], weights: &WeightSpec) -> Result<OmegaClass> {
    let g = shape.base().generator_count();
    if omega.len() != g {
        return Err(Error::ShapeMismatch(format!("w has {} coefficients, expected {g}", omega.len())));
    }
    if weights.all().len() != shape.components()
        || weights.all().iter().zip(shape.ranks()).any(|(l, r)| l.len() != *r)
    {
        return Err(Error::MalformedWeights("weights do not match the tower".into()));
    }
    let mut terms = Vec::new();
    for (k, c) in omega.iter().enumerate() {
        if !c.is_zero() {
            terms.push(OmegaTerm { monomial: TowerMonomial::generator(shape, k), coef: c.clone(), eps_exp: 0 });
        }
    }
    for u in 1..=shape.components() {
        for (j, beta) in weights.betas(u).into_iter().enumerate() {
            let j = j + 1;
            let e = level_exponent(j)?;
            terms.push(OmegaTerm { monomial: TowerMonomial::d(shape, u, j), coef: Rational::one(), eps_exp: e });
            let (coef, eps_exp) = match beta {
                Some(b) => (-b, e),
                None => (-Rational::one(), e + 1),
            };
            if !coef.is_zero() {
                terms.push(OmegaTerm { monomial: TowerMonomial::t(shape, u, j), coef, eps_exp });
            }
        }
    }
    Ok(OmegaClass { terms })
}

impl OmegaClass {
    /// The class obtained by substituting a value for `eps`.
    pub fn at(&self, eps: &Rational) -> TowerClass {
        let mut out = TowerClass::zero();
        for term in &self.terms {
            out.add_term(term.monomial.clone(), &term.coef * crate::rational::pow(eps, term.eps_exp));
        }
        out
    }

    /// `(w part, a, b)` of component `u` as polynomials in `eps`.
    pub fn symbolic_point(&self, shape: &TowerShape, u: usize) -> SymbolicPoint {
        let g = shape.base().generator_count();
        let r = shape.ranks()[u - 1];
        let mut point = SymbolicPoint {
            omega: vec![EpsilonPolynomial::zero(); g],
            a: vec![EpsilonPolynomial::zero(); r],
            b: vec![EpsilonPolynomial::zero(); r],
        };
        for term in &self.terms {
            let p = EpsilonPolynomial::monomial(term.eps_exp, term.coef.clone());
            let m = &term.monomial;
            if m.is_base() {
                let k = m.base().iter().position(|&e| e == 1).unwrap_or(0);
                point.omega[k] = point.omega[k].add(&p);
                continue;
            }
            if let Some(l) = m.d_exps(u).iter().position(|&e| e == 1) {
                point.a[l] = point.a[l].add(&p);
            } else if let Some(l) = m.t_exps(u).iter().position(|&e| e == 1) {
                point.b[l] = point.b[l].add(&p);
            }
        }
        point
    }
}

/// A point `w + sum a_i d_i + b_i t_i` of a single-component tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConePoint {
    pub omega: Vec<Rational>,
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl ConePoint {
    pub fn scale(&self, k: &Rational) -> Self {
        let s = |v: &[Rational]| v.iter().map(|x| x * k).collect();
        Self { omega: s(&self.omega), a: s(&self.a), b: s(&self.b) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let s = |x: &[Rational], y: &[Rational]| x.iter().zip(y).map(|(p, q)| p + q).collect();
        Self { omega: s(&self.omega, &other.omega), a: s(&self.a, &other.a), b: s(&self.b, &other.b) }
    }
}

/// Same as [`ConePoint`] with coefficients depending on `eps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicPoint {
    pub omega: Vec<EpsilonPolynomial>,
    pub a: Vec<EpsilonPolynomial>,
    pub b: Vec<EpsilonPolynomial>,
}

impl From<&ConePoint> for SymbolicPoint {
    fn from(p: &ConePoint) -> Self {
        let c = |v: &[Rational]| v.iter().map(|x| EpsilonPolynomial::constant(x.clone())).collect();
        Self { omega: c(&p.omega), a: c(&p.a), b: c(&p.b) }
    }
}

/// One strict inequality `poly > 0` of the membership system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub label: String,
    pub poly: EpsilonPolynomial,
}

/// The inequalities describing `K(Y_j)` at a point, for `1 <= i <= j`:
/// `a_i > 0`, `b_i < 0`, `w + (b_1 + ... + b_i) c` in `K(X)`, and
/// `a_i + b_i + b_(i+1) + ... + b_j > 0`.
pub fn kxr_conditions(j: usize, p: &SymbolicPoint, cone: &ConeSpec, c: &[Rational]) -> Result<Vec<Condition>> {
    if j == 0 || j > p.a.len() || p.b.len() != p.a.len() {
        return Err(Error::IndexOutOfRange { index: j, bound: p.a.len() });
    }
    if cone.dim().is_some_and(|d| d != p.omega.len() || d != c.len()) {
        return Err(Error::ShapeMismatch("cone, point and divisor class dimensions differ".into()));
    }
    let mut out = Vec::new();
    let mut b_prefix = EpsilonPolynomial::zero();
    for i in 1..=j {
        out.push(Condition { label: format!("a_{i} > 0"), poly: p.a[i - 1].clone() });
        out.push(Condition {
            label: format!("b_{i} < 0"),
            poly: p.b[i - 1].scale(&-Rational::one()),
        });
        b_prefix = b_prefix.add(&p.b[i - 1]);
        for (k, row) in cone.rows().iter().enumerate() {
            let mut poly = b_prefix.scale(&dot(row, c));
            for (coef, om) in row.iter().zip(&p.omega) {
                poly = poly.add(&om.scale(coef));
            }
            out.push(Condition {
                label: format!("w + (b_1 + ... + b_{i}) c in K(X), inequality {}", k + 1),
                poly,
            });
        }
        let mut tail = p.a[i - 1].clone();
        for b in &p.b[i - 1..j] {
            tail = tail.add(b);
        }
        out.push(Condition { label: format!("a_{i} + b_{i} + ... + b_{j} > 0"), poly: tail });
    }
    Ok(out)
}

/// Result of a membership test with every failed condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub holds: bool,
    pub violations: Vec<String>,
}

/// Membership of `w + sum a_i d_i + b_i t_i` in the Kähler cone of `Y_j`.
pub fn kxr_check(shape: &TowerShape, j: usize, p: &ConePoint, cone: &ConeSpec, c: &[Rational]) -> Result<Membership> {
    if !shape.is_single_component() {
        return Err(Error::ShapeMismatch("cone membership is described for one divisor".into()));
    }
    if j > shape.ranks()[0] {
        return Err(Error::IndexOutOfRange { index: j, bound: shape.ranks()[0] });
    }
    let conditions = kxr_conditions(j, &SymbolicPoint::from(p), cone, c)?;
    let violations: Vec<String> = conditions
        .into_iter()
        .filter(|cond| !cond.poly.coefficient(0).is_positive())
        .map(|cond| cond.label)
        .collect();
    Ok(Membership { holds: violations.is_empty(), violations })
}

/// Membership in the Kähler cone of a single blow-up pair:
/// `w, w + b c` in `K(X)`, `w', w' + b c'` in `K(X')`, and `b < 0`.
#[allow(clippy::too_many_arguments)]
pub fn kxx_check(
    w: &[Rational],
    w_prime: &[Rational],
    b: &Rational,
    cone_x: &ConeSpec,
    cone_x_prime: &ConeSpec,
    c: &[Rational],
    c_prime: &[Rational],
) -> Membership {
    let mut violations = Vec::new();
    if !cone_x.contains(w) {
        violations.push("w in K(X)".to_string());
    }
    if !cone_x.contains(&axpy(w, b, c)) {
        violations.push("w + b c in K(X)".to_string());
    }
    if !cone_x_prime.contains(w_prime) {
        violations.push("w' in K(X')".to_string());
    }
    if !cone_x_prime.contains(&axpy(w_prime, b, c_prime)) {
        violations.push("w' + b c' in K(X')".to_string());
    }
    if !b.is_negative() {
        violations.push("b < 0".to_string());
    }
    Membership { holds: violations.is_empty(), violations }
}

/// Certified range `(0, epsilon]` on which `Omega(w, Lambda, eps)` satisfies the cone system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub epsilon: Bound,
    /// Upper end of the bracket containing the binding root.
    pub upper: Option<Rational>,
    /// Conditions whose first positive root lies in `(epsilon, upper]`.
    pub binding: Vec<Condition>,
    /// Set when the tower has several components and the per-component
    /// systems are tested jointly.
    pub heuristic: bool,
}

/// Divisor classes `c_u = [D_u]` as coefficient vectors.
pub fn divisor_classes(shape: &TowerShape) -> Vec<Vec<Rational>> {
    let g = shape.base().generator_count();
    (1..=shape.components())
        .map(|u| {
            let mut v = vec![Rational::zero(); g];
            v[shape.base().divisor_generator(u)] = Rational::one();
            v
        })
        .collect()
}

/// The polynomial inequalities `Omega(w, Lambda, eps)` must satisfy, per component.
pub fn omega_conditions(
    shape: &TowerShape,
    omega: &[Rational],
    weights: &WeightSpec,
    cone: &ConeSpec,
    classes: &[Vec<Rational>],
) -> Result<Vec<Condition>> {
    if classes.len() != shape.components() {
        return Err(Error::ShapeMismatch("one divisor class per component is required".into()));
    }
    let om = omega_class(shape, omega, weights)?;
    let mut all = Vec::new();
    for u in 1..=shape.components() {
        let point = om.symbolic_point(shape, u);
        for mut cond in kxr_conditions(shape.ranks()[u - 1], &point, cone, &classes[u - 1])? {
            if shape.components() > 1 {
                cond.label = format!("component {u}: {}", cond.label);
            }
            all.push(cond);
        }
    }
    Ok(all)
}

pub fn epsilon_kahler_threshold(
    shape: &TowerShape,
    omega: &[Rational],
    weights: &WeightSpec,
    cone: &ConeSpec,
    classes: &[Vec<Rational>],
    precision: &Rational,
) -> Result<Threshold> {
    let conditions = omega_conditions(shape, omega, weights, cone, classes)?;
    let mut epsilon = Bound::Unbounded;
    let mut roots = Vec::with_capacity(conditions.len());
    for cond in &conditions {
        if cond.poly.sign_near_zero() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NoPositiveEpsilon(cond.label.clone()));
        }
        let bound = cond.poly.first_positive_root(precision)?;
        epsilon = epsilon.min(bound.clone());
        roots.push(bound);
    }
    let upper = epsilon.finite().map(|e| e + precision);
    let mut binding = Vec::new();
    if let Some(up) = &upper {
        for (cond, root) in conditions.iter().zip(&roots) {
            if root.finite().is_some() && cond.poly.positive_roots_upto(up)? > 0 {
                binding.push(cond.clone());
            }
        }
    }
    Ok(Threshold { epsilon, upper, binding, heuristic: shape.components() > 1 })
}

/// True when `Omega` at this `eps` satisfies every condition.
pub fn omega_in_cone(conditions: &[Condition], eps: &Rational) -> bool {
    conditions.iter().all(|c| c.poly.eval(eps).is_positive())
}
