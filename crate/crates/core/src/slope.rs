//! Slopes of tower bundles as exact polynomials in `eps`, and the parabolic slope downstairs.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::bundle::{c1_upstairs, ParabolicBundle};
use crate::cone::{omega_class, OmegaClass, WeightSpec};
use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::poly::EpsilonPolynomial;
use crate::rational::{factorial, Rational};
use crate::ring::{pair_eval, pair_monomial, TowerClass, TowerMonomial, TowerShape};

/// One monomial of `Omega^(N-1) / (N-1)!`: `coef * eps^eps_exp * monomial`.
#[derive(Clone, Debug)]
struct ExpansionTerm {
    monomial: TowerMonomial,
    coef: Rational,
    eps_exp: u32,
}

/// Terms of `Omega^k / k!` that can pair nontrivially: every `d` appears at
/// most once, never next to the `t` of its own level, and the base part has
/// degree at most `dim X`.
fn expand_power(shape: &TowerShape, omega: &OmegaClass, k: u32) -> Result<Vec<ExpansionTerm>> {
    struct Walk<'a> {
        shape: &'a TowerShape,
        terms: &'a [crate::cone::OmegaTerm],
        dim: u32,
        out: Vec<ExpansionTerm>,
    }

    impl Walk<'_> {
        fn go(&mut self, idx: usize, left: u32, acc: ExpansionTerm) -> Result<()> {
            if left == 0 {
                self.out.push(acc);
                return Ok(());
            }
            if idx == self.terms.len() {
                return Ok(());
            }
            let term = &self.terms[idx];
            let m = &term.monomial;
            let is_d = (1..=self.shape.components()).any(|u| m.d_exps(u).contains(&1));
            let clashes = (1..=self.shape.components()).any(|u| {
                m.t_exps(u).iter().zip(acc.monomial.d_exps(u)).any(|(t, d)| *t > 0 && *d > 0)
            });
            let max = if clashes {
                0
            } else if is_d {
                left.min(1)
            } else {
                left
            };
            let mut factor = TowerMonomial::one(self.shape);
            let mut coef = Rational::one();
            for e in 0..=max {
                if e > 0 {
                    factor = factor.mul(m);
                    coef = coef * &term.coef / Rational::from_integer(e.into());
                }
                let monomial = acc.monomial.mul(&factor);
                if monomial.base().iter().sum::<u32>() > self.dim {
                    break;
                }
                let eps_exp = u64::from(term.eps_exp) * u64::from(e) + u64::from(acc.eps_exp);
                let eps_exp = u32::try_from(eps_exp)
                    .map_err(|_| Error::Unsupported("eps exponent exceeds the supported range".into()))?;
                let next = ExpansionTerm { monomial, coef: &acc.coef * &coef, eps_exp };
                self.go(idx + 1, left - e, next)?;
            }
            Ok(())
        }
    }

    let mut walk = Walk { shape, terms: &omega.terms, dim: shape.base().dim(), out: Vec::new() };
    let start = ExpansionTerm { monomial: TowerMonomial::one(shape), coef: Rational::one(), eps_exp: 0 };
    walk.go(0, k, start)?;
    Ok(walk.out)
}

/// `slope(W) = <c1(W) Omega^(N-1) / (N-1)!, [X(D, r)]> / rk W` with `N = dim X(D, r)`.
pub fn slope_poly_of(
    shape: &TowerShape,
    w_c1: &TowerClass,
    rank: usize,
    omega: &OmegaClass,
    exec: Execution,
) -> Result<EpsilonPolynomial> {
    if rank == 0 {
        return Err(Error::InvalidBundle("rank must be positive".into()));
    }
    if !w_c1.is_zero() && w_c1.degree() != Some(1) {
        return Err(Error::ShapeMismatch("c1 must be a degree-1 class".into()));
    }
    let terms = expand_power(shape, omega, shape.pairing_dim() - 1)?;
    let c1_terms: Vec<(&TowerMonomial, &Rational)> = w_c1.terms().collect();
    let values = map_ordered(exec, &terms, |term| -> Result<(u32, Rational)> {
        let mut total = Rational::zero();
        for (m, c) in &c1_terms {
            let v = pair_monomial(shape, &term.monomial.mul(m))?;
            if !v.is_zero() {
                total += v * *c;
            }
        }
        Ok((term.eps_exp, total * &term.coef))
    });
    let mut acc: BTreeMap<u32, Rational> = BTreeMap::new();
    for value in values {
        let (e, v) = value?;
        if !v.is_zero() {
            *acc.entry(e).or_insert_with(Rational::zero) += v;
        }
    }
    let inv_rank = Rational::new(1.into(), rank.into());
    Ok(EpsilonPolynomial::from_terms(acc.into_iter().map(|(e, v)| (e, v * &inv_rank))))
}

pub fn slope_poly(
    shape: &TowerShape,
    w_c1: &TowerClass,
    rank: usize,
    omega: &[Rational],
    weights: &WeightSpec,
    exec: Execution,
) -> Result<EpsilonPolynomial> {
    slope_poly_of(shape, w_c1, rank, &omega_class(shape, omega, weights)?, exec)
}

/// `(1/rk V) (<c1(V) w^(n-1)/(n-1)!, [X]> + sum_u sum_i R_(u,i) lambda_(u,i) <w^(n-1)/(n-1)!, [D_u]>)`.
pub fn par_slope(shape: &TowerShape, b: &ParabolicBundle, omega: &[Rational], weights: &WeightSpec) -> Result<Rational> {
    b.validate(shape)?;
    let base = shape.base();
    let n = base.dim();
    let w = TowerClass::from_base_vector(shape, omega);
    let w_pow = w.pow(shape, n - 1).scale(&(Rational::one() / factorial(n - 1)));
    let mut total = base.pair(&(&b.c1 * &w_pow))?;
    for u in 1..=shape.components() {
        let d = TowerClass::monomial(TowerMonomial::generator(shape, base.divisor_generator(u)), Rational::one());
        let on_divisor = base.pair(&(&w_pow * &d))?;
        let lambdas = weights.lambdas(u);
        let weighted: Rational = b
            .filtration(u)
            .iter()
            .zip(lambdas)
            .map(|(r, l)| Rational::from_integer((*r).into()) * l)
            .sum();
        total += weighted * on_divisor;
    }
    Ok(total / Rational::from_integer(b.rank.into()))
}

/// `sum_u (2^(r_u) - 1)`, the order at which the slope polynomial starts.
pub fn expected_order(shape: &TowerShape) -> u32 {
    shape.sigma()
}

/// The full slope polynomial of a parabolic bundle next to the prediction
/// `slope(eps) = par-slope * eps^sigma + O(eps^(sigma+1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeReport {
    pub polynomial: EpsilonPolynomial,
    pub sigma: u32,
    pub par_slope: Rational,
}

impl SlopeReport {
    pub fn leading(&self) -> Option<(u32, Rational)> {
        self.polynomial.lowest_term().map(|(e, c)| (e, c.clone()))
    }

    pub fn coefficient_at_sigma(&self) -> Rational {
        self.polynomial.coefficient(self.sigma)
    }

    /// Every coefficient of `eps^k` with `k < sigma` is zero.
    pub fn vanishes_below_sigma(&self) -> bool {
        self.polynomial.coeffs().keys().all(|&e| e >= self.sigma)
    }

    pub fn leading_matches(&self) -> bool {
        self.coefficient_at_sigma() == self.par_slope
    }

    pub fn passes(&self) -> bool {
        self.vanishes_below_sigma() && self.leading_matches()
    }

    /// Readable description of each failed expectation.
    pub fn deviations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (e, c) in self.polynomial.coeffs().range(..self.sigma) {
            out.push(format!("coefficient of eps^{e} is {} instead of 0", crate::rational::format_rational(c)));
        }
        if !self.leading_matches() {
            out.push(format!(
                "coefficient of eps^{} is {} instead of {}",
                self.sigma,
                crate::rational::format_rational(&self.coefficient_at_sigma()),
                crate::rational::format_rational(&self.par_slope)
            ));
        }
        out
    }
}

pub fn leading_term_report(
    shape: &TowerShape,
    b: &ParabolicBundle,
    omega: &[Rational],
    weights: &WeightSpec,
    exec: Execution,
) -> Result<SlopeReport> {
    let c1 = c1_upstairs(shape, b)?;
    let polynomial = slope_poly(shape, &c1, b.rank, omega, weights, exec)?;
    Ok(SlopeReport { polynomial, sigma: expected_order(shape), par_slope: par_slope(shape, b, omega, weights)? })
}

/// On a curve with one blow-up, evaluates the slope at `Omega = w + d - alpha t` and
/// returns it next to the parabolic slope with weight `alpha`.
pub fn dim1_exact_slope(shape: &TowerShape, b: &ParabolicBundle, alpha: &Rational) -> Result<(Rational, Rational)> {
    if shape.base().dim() != 1 || shape.ranks() != [1] {
        return Err(Error::ShapeMismatch("needs a curve, one divisor and r = 1".into()));
    }
    let weights = WeightSpec::new(shape, vec![vec![alpha.clone()]], false)?;
    let mut omega = TowerClass::monomial(TowerMonomial::generator(shape, 0), Rational::one());
    omega.add_term(TowerMonomial::d(shape, 1, 1), Rational::one());
    omega.add_term(TowerMonomial::t(shape, 1, 1), -alpha.clone());
    let c1 = c1_upstairs(shape, b)?;
    let slope = pair_eval(shape, &(&c1 * &omega))? / Rational::from_integer(b.rank.into());
    let mut w = vec![Rational::zero(); shape.base().generator_count()];
    w[0] = Rational::one();
    Ok((slope, par_slope(shape, b, &w, &weights)?))
}
