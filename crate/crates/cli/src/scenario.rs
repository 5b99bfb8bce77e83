//! Scenario files: a JSON array of records, each with an `id`, a `kind` and
//! the kind's parameters.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sublab_core::harness::{ArrayBuilder, CounterexampleConfig, GridPolicy, PdeSettings};
use sublab_core::{GCoefficients, PathFunctional, TestFunction};

use crate::error::ConfigError;

/// Default clip level of unbounded test functions.
pub const DEFAULT_CLIP: f64 = 8.0;

fn default_clip() -> f64 {
    DEFAULT_CLIP
}

fn one() -> f64 {
    1.0
}

/// Test function descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    PositivePart {
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Identity {
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Abs {
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Square {
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Cube {
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Power {
        p: f64,
        #[serde(default)]
        odd: bool,
        #[serde(default = "default_clip")]
        clip: f64,
    },
    Ramp {
        start: f64,
        end: f64,
    },
    Constant {
        value: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl FunctionSpec {
    pub fn build(&self) -> sublab_core::Result<TestFunction> {
        match *self {
            FunctionSpec::PositivePart { clip } => TestFunction::positive_part(clip),
            FunctionSpec::Identity { clip } => TestFunction::identity(clip),
            FunctionSpec::Abs { clip } => TestFunction::abs(clip),
            FunctionSpec::Square { clip } => TestFunction::square(clip),
            FunctionSpec::Cube { clip } => TestFunction::cube(clip),
            FunctionSpec::Power { p, odd, clip } => {
                TestFunction::power(p, odd, clip, sublab_core::test_function::DEFAULT_MESH)
            }
            FunctionSpec::Ramp { start, end } => TestFunction::ramp(start, end),
            FunctionSpec::Constant { value } => Ok(TestFunction::constant(value)),
            FunctionSpec::Piecewise {
                ref breakpoints,
                ref values,
            } => TestFunction::new(breakpoints.clone(), values.clone()),
        }
    }

    pub fn clip(&self) -> Option<f64> {
        match *self {
            FunctionSpec::PositivePart { clip }
            | FunctionSpec::Identity { clip }
            | FunctionSpec::Abs { clip }
            | FunctionSpec::Square { clip }
            | FunctionSpec::Cube { clip }
            | FunctionSpec::Power { clip, .. } => Some(clip),
            _ => None,
        }
    }
}

/// Path functional descriptors; `phi` for the single-function kinds,
/// `times` and `factors` for skeletons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    Terminal { phi: FunctionSpec },
    RunningMax { phi: FunctionSpec },
    RunningMaxAbs { phi: FunctionSpec },
    SuffixMax { phi: FunctionSpec },
    Skeleton { times: Vec<f64>, factors: Vec<FunctionSpec> },
}

impl FunctionalSpec {
    pub fn build(&self) -> sublab_core::Result<PathFunctional> {
        let f = match self {
            FunctionalSpec::Terminal { phi } => PathFunctional::Terminal { phi: phi.build()? },
            FunctionalSpec::RunningMax { phi } => PathFunctional::RunningMax { phi: phi.build()? },
            FunctionalSpec::RunningMaxAbs { phi } => PathFunctional::RunningMaxAbs { phi: phi.build()? },
            FunctionalSpec::SuffixMax { phi } => PathFunctional::SuffixMax { phi: phi.build()? },
            FunctionalSpec::Skeleton { times, factors } => PathFunctional::Skeleton {
                times: times.clone(),
                factors: factors.iter().map(FunctionSpec::build).collect::<sublab_core::Result<_>>()?,
            },
        };
        f.validate()?;
        Ok(f)
    }

    pub fn clip(&self) -> Option<f64> {
        match self {
            FunctionalSpec::Terminal { phi }
            | FunctionalSpec::RunningMax { phi }
            | FunctionalSpec::RunningMaxAbs { phi }
            | FunctionalSpec::SuffixMax { phi } => phi.clip(),
            FunctionalSpec::Skeleton { factors, .. } => {
                factors.iter().filter_map(FunctionSpec::clip).reduce(f64::max)
            }
        }
    }
}

/// `[sigma_lo^2, sigma_hi^2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Coefficients(pub GCoefficients);

impl TryFrom<[f64; 2]> for Coefficients {
    type Error = sublab_core::Error;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        GCoefficients::new(v[0], v[1]).map(Coefficients)
    }
}

impl From<Coefficients> for [f64; 2] {
    fn from(c: Coefficients) -> Self {
        [c.0.sigma_lower_sq(), c.0.sigma_upper_sq()]
    }
}

/// An explicit PDE grid, overriding the one derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGrid {
    pub half_width: f64,
    pub dx: f64,
}

/// How a convergence table is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapCriteria {
    /// Gaps must not increase by more than `monotone_tolerance` from one
    /// row to the next.
    #[serde(default)]
    pub nonincreasing: bool,
    #[serde(default)]
    pub monotone_tolerance: f64,
    /// Gaps must strictly decrease.
    #[serde(default)]
    pub strictly_decreasing: bool,
    /// Last gap at most this fraction of the first.
    #[serde(default)]
    pub last_over_first: Option<f64>,
    /// Rows with `n` below this are reported but not judged.
    #[serde(default)]
    pub judge_from: Option<usize>,
}

impl Default for GapCriteria {
    fn default() -> Self {
        Self {
            nonincreasing: true,
            monotone_tolerance: 0.0,
            strictly_decreasing: false,
            last_over_first: Some(1.0),
            judge_from: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RosenthalKind {
    SuffixSq,
    MaxSq,
    MaxP,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    Gnormal {
        g: Coefficients,
        #[serde(default = "one")]
        rho: f64,
        phi: FunctionSpec,
        #[serde(default)]
        expected: Option<f64>,
        #[serde(default = "default_gnormal_tolerance")]
        tolerance: f64,
        #[serde(default)]
        pde: PdeSettings,
        #[serde(default)]
        grid: Option<ExplicitGrid>,
    },
    Clt {
        array: ArrayBuilder,
        phi: FunctionSpec,
        n_list: Vec<usize>,
        g: Coefficients,
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        grid_policy: GridPolicy,
        #[serde(default)]
        pde: PdeSettings,
        #[serde(default)]
        criteria: GapCriteria,
    },
    Fclt {
        array: ArrayBuilder,
        functional: FunctionalSpec,
        n_list: Vec<usize>,
        g: Coefficients,
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        grid_policy: GridPolicy,
        #[serde(default)]
        pde: PdeSettings,
        #[serde(default)]
        criteria: GapCriteria,
    },
    Rosenthal {
        variant: RosenthalKind,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        c_p: Option<f64>,
    },
    Exponential {
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    Counterexample {
        tau: f64,
        a: f64,
        #[serde(default)]
        config: CounterexampleConfig,
    },
    Levy {
        g: Coefficients,
        n_list: Vec<usize>,
        phis: Vec<FunctionSpec>,
        #[serde(default)]
        grid_policy: GridPolicy,
        #[serde(default)]
        pde: PdeSettings,
        #[serde(default)]
        criteria: GapCriteria,
    },
    Axioms {
        #[serde(default = "default_axiom_count")]
        count: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_gnormal_tolerance() -> f64 {
    2e-3
}

fn default_count() -> usize {
    100
}

fn default_axiom_count() -> usize {
    1000
}

pub const KINDS: [(&str, &str); 8] = [
    ("gnormal", "G-normal expectation of a test function from the G-heat equation"),
    ("clt", "gaps between sums of a triangular array and the G-normal limit"),
    ("fclt", "gaps for path functionals: terminal, skeleton, running statistics"),
    ("rosenthal", "seeded batch of maximal moment inequalities"),
    ("exponential", "seeded batch of the exponential inequality"),
    ("counterexample", "third moments showing xi + a eta is not G-normal"),
    ("levy", "marginals of a process with G-Brownian conditional moments"),
    ("axioms", "seeded checks of the sub-linear expectation axioms"),
];

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Gnormal { .. } => "gnormal",
            ScenarioKind::Clt { .. } => "clt",
            ScenarioKind::Fclt { .. } => "fclt",
            ScenarioKind::Rosenthal { .. } => "rosenthal",
            ScenarioKind::Exponential { .. } => "exponential",
            ScenarioKind::Counterexample { .. } => "counterexample",
            ScenarioKind::Levy { .. } => "levy",
            ScenarioKind::Axioms { .. } => "axioms",
        }
    }

    /// Seed of a randomized scenario.
    pub fn seed(&self) -> Option<u64> {
        match *self {
            ScenarioKind::Rosenthal { seed, .. }
            | ScenarioKind::Exponential { seed, .. }
            | ScenarioKind::Axioms { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn set_seed(&mut self, new: u64) {
        match self {
            ScenarioKind::Rosenthal { seed, .. }
            | ScenarioKind::Exponential { seed, .. }
            | ScenarioKind::Axioms { seed, .. } => *seed = new,
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

/// Reads and validates a scenario file.
pub fn parse_scenarios(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ConfigError::NotFound(path.display().to_string())
        } else {
            ConfigError::Io {
                path: path.display().to_string(),
                source,
            }
        }
    })?;
    parse_scenarios_str(&text)
}

pub fn parse_scenarios_str(text: &str) -> Result<Vec<Scenario>, ConfigError> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
    let mut out = Vec::with_capacity(raw.len());
    let mut seen = HashSet::new();
    for (i, value) in raw.into_iter().enumerate() {
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| ConfigError::Validation {
                scenario: format!("#{i}"),
                field: "id".into(),
                reason: "missing or not a string".into(),
            })?;
        let kind = value.get("kind").and_then(|v| v.as_str()).unwrap_or("");
        if !KINDS.iter().any(|(k, _)| *k == kind) {
            return Err(ConfigError::Validation {
                scenario: id,
                field: "kind".into(),
                reason: format!("unknown kind {kind:?}"),
            });
        }
        let scenario: Scenario = serde_json::from_value(value).map_err(|e| ConfigError::Validation {
            scenario: id.clone(),
            field: "parameters".into(),
            reason: e.to_string(),
        })?;
        if !seen.insert(scenario.id.clone()) {
            return Err(ConfigError::Validation {
                scenario: id,
                field: "id".into(),
                reason: "duplicate id".into(),
            });
        }
        out.push(scenario);
    }
    Ok(out)
}

fn parse_error(text: &str, e: &serde_json::Error) -> ConfigError {
    let line = e.line();
    ConfigError::Parse {
        line,
        column: e.column(),
        context: text.lines().nth(line.saturating_sub(1)).unwrap_or("").trim_end().to_string(),
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list() {
        assert!(parse_scenarios_str("[]").unwrap().is_empty());
    }

    #[test]
    fn gnormal_round_trip() {
        let text = r#"[{"id": "pos", "kind": "gnormal", "g": [0.25, 1.0], "rho": 1.0,
                        "phi": {"type": "positive_part"}}]"#;
        let s = parse_scenarios_str(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, "pos");
        match &s[0].kind {
            ScenarioKind::Gnormal { g, rho, phi, tolerance, .. } => {
                assert_eq!(<[f64; 2]>::from(*g), [0.25, 1.0]);
                assert_eq!(*rho, 1.0);
                assert_eq!(*phi, FunctionSpec::PositivePart { clip: 8.0 });
                assert_eq!(*tolerance, 2e-3);
            }
            other => panic!("wrong kind {other:?}"),
        }
        let again = parse_scenarios_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn validation_errors() {
        let dup = r#"[{"id": "a", "kind": "axioms"}, {"id": "a", "kind": "axioms"}]"#;
        assert!(matches!(parse_scenarios_str(dup), Err(ConfigError::Validation { field, .. }) if field == "id"));
        let unknown = r#"[{"id": "a", "kind": "bogus"}]"#;
        assert!(matches!(parse_scenarios_str(unknown), Err(ConfigError::Validation { field, .. }) if field == "kind"));
        let bad_g = r#"[{"id": "a", "kind": "gnormal", "g": [1.0, 0.5], "phi": {"type": "abs"}}]"#;
        assert!(matches!(parse_scenarios_str(bad_g), Err(ConfigError::Validation { .. })));
    }

    #[test]
    fn parse_error_carries_line() {
        let text = "[\n  {\"id\": \"a\",\n   \"kind\": }\n]";
        match parse_scenarios_str(text) {
            Err(ConfigError::Parse { line, context, .. }) => {
                assert_eq!(line, 3);
                assert!(context.contains("kind"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            parse_scenarios(Path::new("/nonexistent/scenarios.json")),
            Err(ConfigError::NotFound(_))
        ));
    }
}
