//! JSON scenario files.
//!
//! Rationals are written as strings `"p/q"` (plain JSON integers are also
//! accepted); floating-point numbers are rejected. Classes are maps from
//! monomial text to coefficient, e.g. `{"w": "3", "D": "-1/2"}`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::bundle::{ParabolicBundle, SubobjectData};
use crate::cone::{divisor_classes, ConeSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};
use crate::ring::{BaseGeometry, TowerClass, TowerMonomial, TowerShape};
use crate::stability::{curve_subobjects, Scenario};

/// A rational read from `"p/q"` text or a JSON integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as a \"p/q\" string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Q, E> {
                Err(E::custom(format!("floating-point value {v} is not accepted, write it as \"p/q\"")))
            }
        }
        de.deserialize_any(V)
    }
}

pub type ClassSpec = BTreeMap<String, Q>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub dim: u32,
    pub divisors: Vec<String>,
    #[serde(default)]
    pub extra_generators: Vec<String>,
    /// Degree-`dim` base monomials and their intersection numbers.
    pub table: BTreeMap<String, Q>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
    pub c1: ClassSpec,
    pub filtrations: Vec<Vec<usize>>,
    #[serde(default)]
    pub ch2: Option<ClassSpec>,
    #[serde(default)]
    pub sub_c1: Option<ClassSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubobjectSpec {
    pub rank: usize,
    pub c1: ClassSpec,
    pub filtrations: Vec<Vec<usize>>,
}

/// All subobjects of a bundle on a curve with rank and degree in these closed ranges.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub ranks: [usize; 2],
    pub degrees: [i64; 2],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFileSpec {
    /// Rows `a` of the strict system `a . x > 0`, over the coordinates `w, D_1, ..., extras`.
    pub inequalities: Vec<Vec<Q>>,
    /// `c_u = c1(O(D_u))` per component; defaults to the generator `D_u`.
    #[serde(default)]
    pub divisor_classes: Option<Vec<ClassSpec>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Standard,
    LastWeightZero,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default)]
    pub epsilon: Option<Q>,
    #[serde(default)]
    pub precision: Option<Q>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub epsilon_grid: Option<Vec<Q>>,
    #[serde(default)]
    pub monomials: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub base: BaseSpec,
    pub tower: TowerSpec,
    /// The base Kähler class; defaults to `w`.
    #[serde(default)]
    pub omega: Option<ClassSpec>,
    #[serde(default)]
    pub bundle: Option<BundleSpec>,
    /// `weights[u][i] = lambda_(u,i+1)`.
    #[serde(default)]
    pub weights: Option<Vec<Vec<Q>>>,
    #[serde(default)]
    pub cone: Option<ConeFileSpec>,
    #[serde(default)]
    pub subobjects: Vec<SubobjectSpec>,
    #[serde(default)]
    pub subobject_window: Option<WindowSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

impl ScenarioFile {
    /// Parses JSON, naming the offending field and position on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed: Self = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Error::Parse(format!("at `{}`: {}", e.path(), e.inner())))?;
        de.end().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(parsed)
    }
}

/// A scenario file resolved against its own geometry.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub shape: TowerShape,
    pub omega: Vec<Rational>,
    pub bundle: Option<ParabolicBundle>,
    pub weights_table: Option<Vec<Vec<Rational>>>,
    pub cone: Option<ConeSpec>,
    pub divisor_classes: Vec<Vec<Rational>>,
    pub subobjects: Vec<SubobjectData>,
    pub options: OptionsSpec,
}

fn class_from_spec(shape: &TowerShape, spec: &ClassSpec, what: &str) -> Result<TowerClass> {
    let mut out = TowerClass::zero();
    for (text, q) in spec {
        let m = TowerMonomial::parse(shape, text).map_err(|e| Error::Parse(format!("{what}: {e}")))?;
        if !m.is_base() {
            return Err(Error::Parse(format!("{what}: `{text}` is not a class on the base")));
        }
        out.add_term(m, q.0.clone());
    }
    Ok(out)
}

fn vector_from_spec(shape: &TowerShape, spec: &ClassSpec, what: &str) -> Result<Vec<Rational>> {
    let g = shape.base().generator_count();
    let mut v = vec![Rational::zero(); g];
    for (text, q) in spec {
        let idx = shape
            .base()
            .generator_index(text.trim())
            .ok_or_else(|| Error::Parse(format!("{what}: `{text}` is not a base generator")))?;
        v[idx] += &q.0;
    }
    Ok(v)
}

impl ScenarioFile {
    /// Builds the geometry and all optional pieces. Tower ranks above `max_rank` are refused.
    pub fn load(&self, max_rank: usize) -> Result<Loaded> {
        if let Some(&r) = self.tower.ranks.iter().find(|&&r| r > max_rank) {
            return Err(Error::Unsupported(format!("tower rank {r} exceeds the configured limit {max_rank}")));
        }
        let shell = BaseGeometry::new(
            self.base.dim,
            self.base.divisors.clone(),
            self.base.extra_generators.clone(),
            BTreeMap::new(),
        )?;
        let mut table = BTreeMap::new();
        for (text, q) in &self.base.table {
            let key = shell.parse_base_monomial(text).map_err(|e| Error::Parse(format!("base.table: {e}")))?;
            if table.insert(key, q.0.clone()).is_some() {
                return Err(Error::Parse(format!("base.table: `{text}` repeats an earlier entry")));
            }
        }
        let base = BaseGeometry::new(self.base.dim, self.base.divisors.clone(), self.base.extra_generators.clone(), table)?;
        let shape = TowerShape::new(base, self.tower.ranks.clone())?;

        let omega = match &self.omega {
            Some(spec) => vector_from_spec(&shape, spec, "omega")?,
            None => {
                let mut v = vec![Rational::zero(); shape.base().generator_count()];
                v[0] = Rational::one();
                v
            }
        };
        let bundle = match &self.bundle {
            Some(b) => {
                let mut bundle = ParabolicBundle::new(
                    &shape,
                    b.rank,
                    class_from_spec(&shape, &b.c1, "bundle.c1")?,
                    b.filtrations.clone(),
                )?;
                bundle.ch2 = b.ch2.as_ref().map(|c| class_from_spec(&shape, c, "bundle.ch2")).transpose()?;
                bundle.sub_c1 = b.sub_c1.as_ref().map(|c| class_from_spec(&shape, c, "bundle.sub_c1")).transpose()?;
                bundle.validate(&shape)?;
                Some(bundle)
            }
            None => None,
        };
        let weights_table = self
            .weights
            .as_ref()
            .map(|w| w.iter().map(|row| row.iter().map(|q| q.0.clone()).collect()).collect());
        let cone = self
            .cone
            .as_ref()
            .map(|c| {
                let rows = c.inequalities.iter().map(|row| row.iter().map(|q| q.0.clone()).collect()).collect();
                ConeSpec::new(rows, shape.base().generator_count())
            })
            .transpose()?;
        let divisor_classes = match self.cone.as_ref().and_then(|c| c.divisor_classes.as_ref()) {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(u, spec)| vector_from_spec(&shape, spec, &format!("cone.divisor_classes[{u}]")))
                .collect::<Result<_>>()?,
            None => divisor_classes(&shape),
        };
        let mut subobjects: Vec<SubobjectData> = self
            .subobjects
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(SubobjectData {
                    rank: s.rank,
                    c1: class_from_spec(&shape, &s.c1, &format!("subobjects[{i}].c1"))?,
                    filtrations: s.filtrations.clone(),
                })
            })
            .collect::<Result<_>>()?;
        if let Some(window) = &self.subobject_window {
            let parent = bundle
                .as_ref()
                .ok_or_else(|| Error::Parse("subobject_window needs a bundle".into()))?;
            subobjects.extend(curve_subobjects(
                &shape,
                parent,
                window.ranks[0]..=window.ranks[1],
                window.degrees[0]..=window.degrees[1],
            )?);
        }
        Ok(Loaded {
            shape,
            omega,
            bundle,
            weights_table,
            cone,
            divisor_classes,
            subobjects,
            options: self.options.clone(),
        })
    }
}

impl Loaded {
    pub fn bundle(&self) -> Result<&ParabolicBundle> {
        self.bundle.as_ref().ok_or_else(|| Error::Parse("scenario has no `bundle`".into()))
    }

    pub fn cone(&self) -> Result<&ConeSpec> {
        self.cone.as_ref().ok_or_else(|| Error::Parse("scenario has no `cone`".into()))
    }

    pub fn weights(&self, mode: Mode) -> Result<WeightSpec> {
        let table = self.weights_table.clone().ok_or_else(|| Error::Parse("scenario has no `weights`".into()))?;
        WeightSpec::new(&self.shape, table, mode == Mode::LastWeightZero)
    }

    pub fn stability_scenario(&self, mode: Mode) -> Result<Scenario> {
        Scenario::new(
            self.shape.clone(),
            self.bundle()?.clone(),
            self.weights(mode)?,
            self.omega.clone(),
            self.subobjects.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    const PLANE: &str = r#"{
        "base": {"dim": 2, "divisors": ["D"], "table": {"w^2": "1", "w D": "1", "D^2": "1"}},
        "tower": {"ranks": [1]},
        "bundle": {"rank": 2, "c1": {"w": "3"}, "filtrations": [[1]]},
        "weights": [["1/2"]],
        "cone": {"inequalities": [["1", "1"]]},
        "subobjects": [{"rank": 1, "c1": {"w": 1}, "filtrations": [[0]]}]
    }"#;

    #[test]
    fn loads_a_complete_file() {
        let file = ScenarioFile::from_json(PLANE).unwrap();
        let l = file.load(8).unwrap();
        assert_eq!(l.omega, vec![int(1), int(0)]);
        assert_eq!(l.bundle().unwrap().rank, 2);
        assert_eq!(l.weights(Mode::Standard).unwrap().lambdas(1), &[rat(1, 2)]);
        assert_eq!(l.divisor_classes, vec![vec![int(0), int(1)]]);
        assert_eq!(l.subobjects.len(), 1);
        assert!(l.stability_scenario(Mode::Standard).is_ok());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = PLANE.replace("\"rank\": 2", "\"rank\": \"two\"");
        let err = ScenarioFile::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("bundle.rank"), "{err}");
        let float = PLANE.replace("[\"1/2\"]", "[0.5]");
        let err = ScenarioFile::from_json(&float).unwrap_err().to_string();
        assert!(err.contains("weights[0][0]") && err.contains("p/q"), "{err}");
        let unknown = PLANE.replace("\"tower\"", "\"towr\"");
        assert!(ScenarioFile::from_json(&unknown).is_err());
    }

    #[test]
    fn rank_limit() {
        let deep = PLANE.replace("\"ranks\": [1]", "\"ranks\": [9]");
        let file = ScenarioFile::from_json(&deep).unwrap();
        assert!(matches!(file.load(8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn window_generates_subobjects() {
        let text = r#"{
            "base": {"dim": 1, "divisors": ["P"], "table": {"w": "1", "P": "1"}},
            "tower": {"ranks": [1]},
            "bundle": {"rank": 2, "c1": {"w": "0"}, "filtrations": [[1]]},
            "weights": [["1/2"]],
            "subobject_window": {"ranks": [1, 1], "degrees": [-2, 3]}
        }"#;
        let l = ScenarioFile::from_json(text).unwrap().load(8).unwrap();
        assert_eq!(l.subobjects.len(), 12);
    }
}
