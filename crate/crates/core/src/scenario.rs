//! Scenario files: a module definition plus the runs to perform on it.
//!
//! ```toml
//! name = "diagonal-5"
//! rank = 2
//! trunc = 12
//! prime = 3
//! alpha = "5"
//! nabla = [["0", "0"], ["0", "5"]]   # entries are polynomials in t
//! phi = [["1", "0"], ["0", "1"]]     # optional
//! k = [1, 2, 3]
//! truncations = [8, 12]
//! suites = ["keylm"]
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{parse_q, Q};
use crate::pgmod::{ModuleError, TorsionModule};
use crate::polymat::PolyMat;
use crate::series::{Coord, TruncSeries};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: field `{field}`: {msg}")]
    Field {
        field: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("could not read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub rank: usize,
    pub trunc: usize,
    pub prime: u64,
    pub alpha: String,
    pub nabla: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub truncations: Vec<usize>,
    #[serde(default)]
    pub suites: Vec<String>,
}

const BUNDLED: [(&str, &str); 8] = [
    ("diagonal-2", include_str!("../scenarios/diagonal-2.toml")),
    (
        "diagonal-3-2",
        include_str!("../scenarios/diagonal-3-2.toml"),
    ),
    ("diagonal-5", include_str!("../scenarios/diagonal-5.toml")),
    ("nilpotent", include_str!("../scenarios/nilpotent.toml")),
    ("rank-one-0", include_str!("../scenarios/rank-one-0.toml")),
    (
        "rank-one-3-2",
        include_str!("../scenarios/rank-one-3-2.toml"),
    ),
    ("zero", include_str!("../scenarios/zero.toml")),
    ("zero-3-2", include_str!("../scenarios/zero-3-2.toml")),
];

/// The bundled scenarios, sorted by name.
pub fn bundled() -> Vec<Scenario> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            Scenario::parse(text).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"))
        })
        .collect()
}

pub fn bundled_named(name: &str) -> Option<Scenario> {
    bundled().into_iter().find(|s| s.name == name)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Scenario {
    /// Parses and validates; errors carry a line number.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        sc.validate(text)?;
        Ok(sc)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Scenario::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn alpha_value(&self) -> Q {
        parse_q(&self.alpha).expect("validated")
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.clone())
    }

    /// The module at the scenario's own truncation.
    pub fn module(&self) -> Result<TorsionModule, ScenarioError> {
        self.module_at(self.trunc)
    }

    pub fn module_at(&self, trunc: usize) -> Result<TorsionModule, ScenarioError> {
        let field_err = |field: &str, msg: String| ScenarioError::Field {
            field: field.into(),
            line: 0,
            msg,
        };
        let nabla = matrix(&self.nabla, trunc).map_err(|m| field_err("nabla", m))?;
        let phi = match &self.phi {
            Some(p) => Some(matrix(p, trunc).map_err(|m| field_err("phi", m))?),
            None => None,
        };
        let m = TorsionModule::new(nabla, phi, self.prime, self.alpha_value(), self.label())?;
        Ok(m)
    }

    fn validate(&self, text: &str) -> Result<(), ScenarioError> {
        let line = |field: &str| {
            text.lines()
                .position(|l| {
                    let l = l.trim_start();
                    l.strip_prefix(field)
                        .is_some_and(|rest| rest.trim_start().starts_with('='))
                })
                .map_or(1, |i| i + 1)
        };
        let bad = |field: &str, msg: String| ScenarioError::Field {
            field: field.into(),
            line: line(field),
            msg,
        };
        if self.rank == 0 {
            return Err(bad("rank", "rank must be positive".into()));
        }
        if self.trunc < 2 {
            return Err(bad("trunc", "truncation must be at least 2".into()));
        }
        if ![2, 3, 5, 7, 11, 13].contains(&self.prime) {
            return Err(bad(
                "prime",
                format!("{} is not a supported prime", self.prime),
            ));
        }
        if parse_q(&self.alpha).is_none() {
            return Err(bad(
                "alpha",
                format!("`{}` is not a rational number", self.alpha),
            ));
        }
        for (field, m) in [("nabla", Some(&self.nabla)), ("phi", self.phi.as_ref())] {
            let Some(m) = m else { continue };
            if m.len() != self.rank || m.iter().any(|row| row.len() != self.rank) {
                return Err(bad(field, format!("expected a {0}x{0} matrix", self.rank)));
            }
            matrix(m, self.trunc).map_err(|msg| bad(field, msg))?;
        }
        if let Some(&t) = self.truncations.iter().find(|&&t| t < 2) {
            return Err(bad("truncations", format!("truncation {t} is below 2")));
        }
        if let Some(s) = self
            .suites
            .iter()
            .find(|s| !crate::verify::SUITES.contains(&s.as_str()))
        {
            return Err(bad("suites", format!("unknown suite `{s}`")));
        }
        self.module().map_err(|e| bad("nabla", e.to_string()))?;
        Ok(())
    }
}

fn matrix(entries: &[Vec<String>], trunc: usize) -> Result<PolyMat, String> {
    let rows = entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    TruncSeries::parse(e, trunc, Coord::T)
                        .map_err(|err| format!("entry `{e}`: {err}"))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolyMat::from_series(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{q, qf};
    use crate::pgmod::SenShape;

    #[test]
    fn bundled_round_trip() {
        let all = bundled();
        assert_eq!(all.len(), 8);
        let mut names: Vec<_> = all.iter().map(|s| s.name.clone()).collect();
        names.sort();
        assert_eq!(
            names,
            all.iter().map(|s| s.name.clone()).collect::<Vec<_>>()
        );
        for s in all {
            assert_eq!(Scenario::parse(&s.emit()).unwrap(), s);
        }
    }

    #[test]
    fn bundled_modules_match_constructors() {
        let d = bundled_named("diagonal-5").unwrap().module().unwrap();
        let model = TorsionModule::make_sen_model(&SenShape::Diagonal(q(5)), 12, 3).unwrap();
        assert_eq!(d.nabla_mat(), model.nabla_mat());
        assert_eq!(d.alpha(), &q(5));
        let r = bundled_named("rank-one-3-2").unwrap().module_at(8).unwrap();
        assert_eq!((r.rank(), r.trunc(), r.alpha()), (1, 8, &qf(3, 2)));
    }

    #[test]
    fn polynomial_entries() {
        let mut s = bundled_named("zero").unwrap();
        s.nabla[0][1] = "t".into();
        // a t-dependent ∇ no longer commutes with φ = 1
        assert!(matches!(
            Scenario::parse(&s.emit()),
            Err(ScenarioError::Field { .. })
        ));
        s.phi = None;
        let s = Scenario::parse(&s.emit()).unwrap();
        let m = s.module().unwrap();
        assert_eq!(m.nabla_mat().coeff(1).get(0, 1), &q(1));
    }

    #[test]
    fn errors_carry_lines() {
        let text =
            "name = \"x\"\nrank = 1\ntrunc = 4\nprime = 3\nalpha = \"1/0\"\nnabla = [[\"0\"]]\n";
        match Scenario::parse(text) {
            Err(ScenarioError::Field { field, line, .. }) => {
                assert_eq!((field.as_str(), line), ("alpha", 5))
            }
            other => panic!("{other:?}"),
        }
        let text =
            "name = \"x\"\nrank = 1\ntrunc = 4\nprime = 3\nalpha = \"1\"\nnabla = [[\"t +\"]]\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Field { line: 6, .. })
        ));
        let text = "name = \"x\"\nrank = \n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Syntax { line: 2, .. })
        ));
        let text = "name = \"x\"\nrank = 1\ntrunc = 4\nprime = 3\nalpha = \"1\"\nnabla = [[\"0\"]]\nsuites = [\"nosuch\"]\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Field { line: 7, .. })
        ));
    }
}
