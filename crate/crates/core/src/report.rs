//! Command runners producing deterministic JSON reports.
//!
//! Reports contain no floating-point numbers: rationals are `"p/q"` strings,
//! polynomials are maps from exponent to coefficient string, and object keys
//! are sorted.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bundle::{c1_upstairs, ch_upstairs_r1, weights_from_filtration};
use crate::cone::{epsilon_kahler_threshold, kxr_check, omega_class, omega_conditions, omega_in_cone, ConePoint};
use crate::error::{Error, Result};
use crate::lattice::check_category_weights;
use crate::par::Execution;
use crate::poly::{Bound, EpsilonPolynomial};
use crate::rational::{format_rational, Rational};
use crate::ring::{pair_eval_traced, TowerClass, TowerMonomial, DELTA_SELF_INTERSECTION_SIGN};
use crate::scenario::{Loaded, Mode, ScenarioFile};
use crate::slope::{dim1_exact_slope, leading_term_report};
use crate::stability::{correspondence_check, StabilityVerdict};

/// Conventions fixed by this implementation, embedded in every report.
pub const CONVENTIONS: &[&str] = &[
    "weight ratios: beta_(u,1) = lambda_(u,1) and beta_(u,j) = lambda_(u,j) / lambda_(u,j-1), so beta_(u,1) ... beta_(u,i) = lambda_(u,i)",
    "Omega(w, Lambda, eps) = w + sum_u sum_j eps^(2^(j-1)) (d_(u,j) - beta_(u,j) t_(u,j)); in last-weight-zero mode beta_(u,r_u) = eps",
    "exceptional tower: t_l^2 = t_l t_(l-1) with t_0 = [D_u], so <t_1^2, [X(D,1)]> = -<[D], [X]>",
    "mixed extremal pairings: <t_(v,l) eta prod d^P t^Q, [X(D,r)]> = (-1)^l <eta [D_v], [X]>",
    "with an extra t factor, closed forms decide only sigma(P) + sigma(Q) = 2^r - 1; |P| + |Q| = r alone does not force vanishing",
    "curve exact slope: evaluated at Omega = w + d - alpha t",
    "cone membership: the last condition is a_i + b_i + ... + b_j > 0 for every i <= j; several components are tested jointly on a shared w",
    "weights on the deepest stratum lie in {0, f_1, ..., f_r}",
    "near-zero stability bound: exact for the given scenario, not uniform in the data",
];

/// A finished report and whether its verdicts all passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub value: Value,
    pub ok: bool,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value).expect("reports contain only strings, integers and booleans");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Pair,
    Slope,
    Cone,
    Stability,
    Weights,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pair => "pair",
            Command::Slope => "slope",
            Command::Cone => "cone",
            Command::Stability => "stability",
            Command::Weights => "weights",
        }
    }
}

/// Command-line overrides of a scenario's `options`.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub epsilon: Option<Rational>,
    pub precision: Option<Rational>,
    pub last_weight_zero: bool,
    pub trace: bool,
    pub monomials: Vec<String>,
    pub exec: Execution,
    pub max_rank: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            precision: None,
            last_weight_zero: false,
            trace: false,
            monomials: Vec::new(),
            exec: Execution::default(),
            max_rank: 8,
        }
    }
}

pub const DEFAULT_PRECISION: (i64, i64) = (1, 1000);

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

pub fn poly_json(p: &EpsilonPolynomial) -> Value {
    let map: Map<String, Value> = p.coeffs().iter().map(|(e, c)| (e.to_string(), q(c))).collect();
    Value::Object(map)
}

pub fn bound_json(b: &Bound) -> Value {
    match b {
        Bound::Finite(x) => q(x),
        Bound::Unbounded => Value::String("unbounded".into()),
    }
}

pub fn verdict_json(v: &StabilityVerdict) -> Value {
    json!({
        "verdict": v.verdict.as_str(),
        "parent_slope": q(&v.parent_slope),
        "witness": v.witness.as_ref().map(|w| json!({"index": w.index, "slope": q(&w.slope)})),
    })
}

struct Ctx {
    loaded: Loaded,
    mode: Mode,
    epsilon: Option<Rational>,
    precision: Rational,
    opts: RunOptions,
}

impl Ctx {
    fn new(file: &ScenarioFile, opts: &RunOptions) -> Result<Self> {
        let loaded = file.load(opts.max_rank)?;
        let mode = if opts.last_weight_zero {
            Mode::LastWeightZero
        } else {
            loaded.options.mode.unwrap_or_default()
        };
        let epsilon = opts.epsilon.clone().or_else(|| loaded.options.epsilon.as_ref().map(|x| x.0.clone()));
        let precision = opts
            .precision
            .clone()
            .or_else(|| loaded.options.precision.as_ref().map(|x| x.0.clone()))
            .unwrap_or_else(|| Rational::new(DEFAULT_PRECISION.0.into(), DEFAULT_PRECISION.1.into()));
        if let Some(e) = &epsilon {
            if *e <= Rational::from_integer(0.into()) {
                return Err(Error::NonPositiveEpsilon(format_rational(e)));
            }
        }
        Ok(Self { loaded, mode, epsilon, precision, opts: opts.clone() })
    }

    fn options_echo(&self) -> Value {
        json!({
            "epsilon": self.epsilon.as_ref().map(q),
            "precision": q(&self.precision),
            "mode": match self.mode { Mode::Standard => "standard", Mode::LastWeightZero => "last-weight-zero" },
            "execution": if self.opts.exec.is_parallel() { "parallel" } else { "sequential" },
        })
    }
}

/// Runs one command on the text of a scenario file.
pub fn run(command: Command, input: &str, opts: &RunOptions) -> Result<Report> {
    let file = ScenarioFile::from_json(input)?;
    let ctx = Ctx::new(&file, opts)?;
    let (results, ok) = match command {
        Command::Pair => run_pair(&ctx)?,
        Command::Slope => run_slope(&ctx)?,
        Command::Cone => run_cone(&ctx)?,
        Command::Stability => run_stability(&ctx)?,
        Command::Weights => run_weights(&ctx)?,
    };
    let value = json!({
        "command": command.name(),
        "input_sha256": sha256_hex(input.as_bytes()),
        "options": ctx.options_echo(),
        "conventions": CONVENTIONS,
        "results": results,
        "ok": ok,
    });
    Ok(Report { value, ok })
}

fn run_pair(ctx: &Ctx) -> Result<(Value, bool)> {
    let shape = &ctx.loaded.shape;
    let mut monomials = ctx.opts.monomials.clone();
    if monomials.is_empty() {
        monomials = ctx.loaded.options.monomials.clone();
    }
    if monomials.is_empty() {
        return Err(Error::Parse("no monomial given (use --monomial or options.monomials)".into()));
    }
    let mut out = Vec::new();
    for text in &monomials {
        let m = TowerMonomial::parse(shape, text)?;
        let class = TowerClass::monomial(m.clone(), Rational::from_integer(1.into()));
        let (value, traces) = pair_eval_traced(shape, &class)?;
        let steps: Vec<String> = traces.iter().flat_map(|t| t.steps.iter().map(ToString::to_string)).collect();
        out.push(json!({
            "monomial": m.render(shape),
            "degree": m.degree(),
            "pairing_dimension": shape.pairing_dim(),
            "value": q(&value),
            "trace": steps,
        }));
    }
    Ok((json!({ "pairings": out, "delta_self_intersection_sign": DELTA_SELF_INTERSECTION_SIGN }), true))
}

fn run_slope(ctx: &Ctx) -> Result<(Value, bool)> {
    let l = &ctx.loaded;
    let shape = &l.shape;
    let bundle = l.bundle()?;
    let weights = l.weights(ctx.mode)?;
    let report = leading_term_report(shape, bundle, &l.omega, &weights, ctx.opts.exec)?;
    let mut results = json!({
        "polynomial": poly_json(&report.polynomial),
        "polynomial_text": report.polynomial.to_string(),
        "sigma": report.sigma,
        "leading": report.leading().map(|(e, c)| json!({"exponent": e, "coefficient": q(&c)})),
        "par_slope": q(&report.par_slope),
        "vanishes_below_sigma": report.vanishes_below_sigma(),
        "leading_matches": report.leading_matches(),
        "deviations": report.deviations(),
    });
    let obj = results.as_object_mut().expect("object");
    if let Some(eps) = &ctx.epsilon {
        obj.insert("value_at_epsilon".into(), json!({"epsilon": q(eps), "slope": q(&report.polynomial.eval(eps))}));
    }
    let is_curve_r1 = shape.base().dim() == 1 && shape.ranks() == [1] && ctx.mode == Mode::Standard;
    let unit_w = l.omega.iter().enumerate().all(|(i, x)| *x == Rational::from_integer(i64::from(i == 0).into()));
    if is_curve_r1 && unit_w {
        let (slope, par) = dim1_exact_slope(shape, bundle, &weights.lambdas(1)[0])?;
        obj.insert("exact_curve_slope".into(), json!({"slope": q(&slope), "par_slope": q(&par), "equal": slope == par}));
    }
    if shape.ranks() == [1] && (bundle.ch2.is_some() || bundle.sub_c1.is_some()) {
        let ch = ch_upstairs_r1(shape, bundle)?;
        obj.insert("chern_character".into(), json!(ch.iter().map(|c| c.render(shape)).collect::<Vec<_>>()));
    }
    if ctx.opts.trace {
        let om = omega_class(shape, &l.omega, &weights)?;
        let terms: Vec<Value> = om
            .terms
            .iter()
            .map(|t| json!({"monomial": t.monomial.render(shape), "coefficient": q(&t.coef), "eps_exponent": t.eps_exp}))
            .collect();
        obj.insert("omega".into(), Value::Array(terms));
        obj.insert("c1_upstairs".into(), Value::String(c1_upstairs(shape, bundle)?.render(shape)));
    }
    Ok((results, report.passes()))
}

fn run_cone(ctx: &Ctx) -> Result<(Value, bool)> {
    let l = &ctx.loaded;
    let shape = &l.shape;
    let cone = l.cone()?;
    let weights = l.weights(ctx.mode)?;
    let th = epsilon_kahler_threshold(shape, &l.omega, &weights, cone, &l.divisor_classes, &ctx.precision)?;
    let conditions = omega_conditions(shape, &l.omega, &weights, cone, &l.divisor_classes)?;
    let mut results = json!({
        "threshold": bound_json(&th.epsilon),
        "bracket_upper": th.upper.as_ref().map(q),
        "binding": th.binding.iter().map(|c| json!({"condition": c.label, "polynomial": poly_json(&c.poly), "text": c.poly.to_string()})).collect::<Vec<_>>(),
        "joint_components": th.heuristic,
        "conditions": conditions.iter().map(|c| json!({"condition": c.label, "text": c.poly.to_string()})).collect::<Vec<_>>(),
    });
    let mut ok = true;
    if let Some(eps) = &ctx.epsilon {
        let holds = omega_in_cone(&conditions, eps);
        let violations: Vec<&str> = conditions
            .iter()
            .filter(|c| c.poly.eval(eps) <= Rational::from_integer(0.into()))
            .map(|c| c.label.as_str())
            .collect();
        let mut entry = json!({"epsilon": q(eps), "holds": holds, "violations": violations});
        if shape.is_single_component() {
            let om = omega_class(shape, &l.omega, &weights)?.symbolic_point(shape, 1);
            let at = |v: &[EpsilonPolynomial]| v.iter().map(|p| p.eval(eps)).collect::<Vec<_>>();
            let point = ConePoint { omega: at(&om.omega), a: at(&om.a), b: at(&om.b) };
            let m = kxr_check(shape, shape.ranks()[0], &point, cone, &l.divisor_classes[0])?;
            entry["point_check"] = json!({"holds": m.holds, "violations": m.violations});
        }
        ok = holds;
        results["membership_at_epsilon"] = entry;
    }
    Ok((results, ok))
}

fn run_stability(ctx: &Ctx) -> Result<(Value, bool)> {
    let sc = ctx.loaded.stability_scenario(ctx.mode)?;
    let grid: Option<Vec<Rational>> =
        ctx.loaded.options.epsilon_grid.as_ref().map(|g| g.iter().map(|x| x.0.clone()).collect());
    let report = correspondence_check(&sc, grid.as_deref(), &ctx.precision, ctx.opts.exec)?;
    let nz = &report.near_zero;
    let mut results = json!({
        "subobjects": sc.subobjects.len(),
        "parabolic": verdict_json(&report.parabolic),
        "near_zero": {
            "verdict": nz.verdict.as_str(),
            "witness": nz.witness,
            "bound": bound_json(&nz.bound),
            "identical_slopes": nz.ties,
        },
        "grid": report.grid.iter().map(q).collect::<Vec<_>>(),
        "grid_verdicts": report.verdicts.iter().map(|v| v.verdict.as_str()).collect::<Vec<_>>(),
        "counterexamples": report.counterexamples.iter().map(|c| json!({
            "direction": c.direction,
            "epsilon": q(&c.epsilon),
            "equivariant": verdict_json(&c.equivariant),
            "parabolic": verdict_json(&c.parabolic),
        })).collect::<Vec<_>>(),
    });
    if let Some(eps) = &ctx.epsilon {
        let table = crate::stability::slope_table(&sc, ctx.opts.exec)?;
        results["at_epsilon"] = json!({"epsilon": q(eps), "equivariant": verdict_json(&table.verdict_at(eps)?)});
    }
    Ok((results, report.counterexamples.is_empty()))
}

fn run_weights(ctx: &Ctx) -> Result<(Value, bool)> {
    let l = &ctx.loaded;
    let bundle = l.bundle()?;
    let mut ok = true;
    let mut out = Vec::new();
    for u in 1..=l.shape.components() {
        let profile = weights_from_filtration(bundle, u)?;
        let violation = check_category_weights(&profile, profile.tower_rank())?;
        ok &= violation.is_none();
        let strata: Vec<Value> = (0..3)
            .map(|i| {
                let entries: Vec<Value> = profile
                    .multiplicities(i)
                    .into_iter()
                    .map(|(c, n)| json!({"weight": c.to_string(), "name": c.label(), "multiplicity": n}))
                    .collect();
                json!({"stratum": i, "weights": entries})
            })
            .collect();
        out.push(json!({
            "component": u,
            "filtration": bundle.filtration(u),
            "strata": strata,
            "admissible": violation.is_none(),
            "violation": violation.map(|v| json!({"stratum": v.stratum, "weight": v.weight.to_string()})),
        }));
    }
    Ok((json!({ "components": out }), ok))
}

/// True when no JSON number in the value is a float.
pub fn free_of_floats(v: &Value) -> bool {
    match v {
        Value::Number(n) => !n.is_f64(),
        Value::Array(a) => a.iter().all(free_of_floats),
        Value::Object(o) => o.values().all(free_of_floats),
        Value::String(s) => !looks_like_decimal(s),
        _ => true,
    }
}

/// `1.5`, `-0.25`, `3e-4` and similar, appearing as whole words.
fn looks_like_decimal(s: &str) -> bool {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')')
        .any(|w| w.parse::<f64>().is_ok() && w.parse::<i128>().is_err())
}
