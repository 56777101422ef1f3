//! Periodic claim models and the JSON model file.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::pmf::{self, convolve, Pmf, DEFAULT_TAIL_EPS};
use crate::scalar::{parse_rational, NumericMode, Rational, Scalar};

/// Claim distributions that repeat with period `seasons.len()`.
///
/// Season `j` is the law of `Z_{j+1}, Z_{j+1+m}, ...`; the aggregate is the
/// law of one full cycle of claims.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalModel<T> {
    seasons: Vec<Pmf<T>>,
    aggregate: Pmf<T>,
    mean_s: T,
}

impl<T: Scalar> SeasonalModel<T> {
    pub fn new(seasons: Vec<Pmf<T>>) -> Result<Self> {
        let first = seasons.first().ok_or_else(|| RuinError::InvalidParameter("model needs at least one season".into()))?;
        let aggregate = seasons.iter().skip(1).fold(first.clone(), |acc, s| convolve(&acc, s));
        let mean_s = aggregate.mean();
        Ok(SeasonalModel { seasons, aggregate, mean_s })
    }

    /// Same claim law in every one of `period` seasons.
    pub fn homogeneous(claim: Pmf<T>, period: usize) -> Result<Self> {
        Self::new(vec![claim; period.max(1)])
    }

    pub fn period(&self) -> usize {
        self.seasons.len()
    }

    pub fn seasons(&self) -> &[Pmf<T>] {
        &self.seasons
    }

    pub fn season(&self, j: usize) -> &Pmf<T> {
        &self.seasons[j % self.seasons.len()]
    }

    pub fn aggregate(&self) -> &Pmf<T> {
        &self.aggregate
    }

    /// `E S` computed from the stored (possibly truncated) masses.
    pub fn mean_s(&self) -> &T {
        &self.mean_s
    }

    /// Upper bound on how far `mean_s` underestimates the untruncated mean.
    pub fn mean_deficit_bound(&self) -> f64 {
        self.aggregate.tail_mean_bound()
    }

    pub fn is_truncated(&self) -> bool {
        self.seasons.iter().any(Pmf::is_truncated)
    }

    /// Every season made proper by lumping its truncated tail into one atom.
    pub fn closed(&self) -> Self {
        if !self.is_truncated() {
            return self.clone();
        }
        Self::new(self.seasons.iter().map(Pmf::closed).collect()).expect("non-empty")
    }

    /// The same model observed from season `j` onwards.
    pub fn rotated(&self, j: usize) -> Self {
        let m = self.period();
        Self::new((0..m).map(|i| self.seasons[(i + j) % m].clone()).collect()).expect("non-empty")
    }

    pub fn map_into<U: Scalar>(&self, convert: impl Fn(&T) -> U + Copy) -> SeasonalModel<U> {
        SeasonalModel {
            seasons: self.seasons.iter().map(|s| s.map_into(convert)).collect(),
            aggregate: self.aggregate.map_into(convert),
            mean_s: convert(&self.mean_s),
        }
    }

    pub fn to_f64(&self) -> SeasonalModel<f64> {
        self.map_into(Scalar::to_f64)
    }

    pub fn all_seasons_identical(&self) -> bool {
        self.seasons.windows(2).all(|w| w[0].masses() == w[1].masses() && w[0].tail_deficit() == w[1].tail_deficit())
    }
}

/// A model in one of the two public numeric modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Float(SeasonalModel<f64>),
    Exact(SeasonalModel<Rational>),
}

impl Model {
    pub fn mode(&self) -> NumericMode {
        match self {
            Model::Float(_) => NumericMode::Float,
            Model::Exact(_) => NumericMode::Exact,
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Model::Float(m) => m.period(),
            Model::Exact(m) => m.period(),
        }
    }

    pub fn mean_s(&self) -> f64 {
        match self {
            Model::Float(m) => *m.mean_s(),
            Model::Exact(m) => m.mean_s().to_f64(),
        }
    }

    /// Double-precision view of the model.
    pub fn to_f64(&self) -> SeasonalModel<f64> {
        match self {
            Model::Float(m) => m.clone(),
            Model::Exact(m) => m.to_f64(),
        }
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Model> {
        spec.build()
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| RuinError::Parse(e.to_string()))?;
        spec.build()
    }
}

/// One season in a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeasonSpec {
    /// Weights as JSON numbers or decimal/fraction strings such as `"0.25"` or `"1/3"`.
    Weights { weights: Vec<serde_json::Value> },
    Poisson { poisson: f64 },
    Geometric { geometric: f64 },
}

/// Contents of a model file:
/// `{"seasons": [...], "tail_eps": 1e-12, "mode": "float" | "exact"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub seasons: Vec<SeasonSpec>,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
    #[serde(default = "default_mode")]
    pub mode: NumericMode,
}

fn default_tail_eps() -> f64 {
    DEFAULT_TAIL_EPS
}

fn default_mode() -> NumericMode {
    NumericMode::Float
}

fn weight_text(v: &serde_json::Value) -> Result<String> {
    match v {
        // serde_json prints the shortest round-tripping form, so 0.3 becomes "0.3".
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => Err(RuinError::Parse(format!("weight must be a number or numeric string, got {other}"))),
    }
}

impl ModelSpec {
    pub fn with_mode(mut self, mode: NumericMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn build(&self) -> Result<Model> {
        if self.seasons.is_empty() {
            return Err(RuinError::Parse("model has no seasons".into()));
        }
        match self.mode {
            NumericMode::Float => {
                let seasons = self
                    .seasons
                    .iter()
                    .map(|s| match s {
                        SeasonSpec::Weights { weights } => {
                            let w = weights
                                .iter()
                                .map(|v| {
                                    let text = weight_text(v)?;
                                    parse_rational(&text)
                                        .map(|r| r.to_f64())
                                        .ok_or_else(|| RuinError::Parse(format!("cannot parse weight '{text}'")))
                                })
                                .collect::<Result<Vec<f64>>>()?;
                            Pmf::from_weights(w)
                        }
                        SeasonSpec::Poisson { poisson } => pmf::poisson(*poisson, self.tail_eps),
                        SeasonSpec::Geometric { geometric } => pmf::geometric(*geometric, self.tail_eps),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Float(SeasonalModel::new(seasons)?))
            }
            NumericMode::Exact => {
                let seasons = self
                    .seasons
                    .iter()
                    .enumerate()
                    .map(|(season, s)| match s {
                        SeasonSpec::Weights { weights } => {
                            let w = weights
                                .iter()
                                .map(|v| {
                                    let text = weight_text(v)?;
                                    parse_rational(&text).ok_or_else(|| RuinError::Parse(format!("cannot parse weight '{text}'")))
                                })
                                .collect::<Result<Vec<Rational>>>()?;
                            Pmf::from_weights(w)
                        }
                        _ => Err(RuinError::ExactModeUnsupported { season }),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Exact(SeasonalModel::new(seasons)?))
            }
        }
    }
}

/// Models used in the worked examples, embedded so reproduction is hermetic.
pub mod builtin {
    use super::*;

    fn weights(rows: &[&[&str]]) -> Vec<SeasonSpec> {
        rows.iter()
            .map(|r| SeasonSpec::Weights { weights: r.iter().map(|s| serde_json::Value::String(s.to_string())).collect() })
            .collect()
    }

    /// Three seasons on `{0, 1, 2}` with `E S = 2.7`.
    pub fn first_example() -> ModelSpec {
        ModelSpec {
            seasons: weights(&[&["0.5", "0.25", "0.25"], &["0.4", "0.3", "0.3"], &["0.3", "0.35", "0.35"]]),
            tail_eps: DEFAULT_TAIL_EPS,
            mode: NumericMode::Float,
        }
    }

    /// Poisson seasons with rates 1/2, 2/3, 4/5.
    pub fn poisson_example() -> ModelSpec {
        ModelSpec {
            seasons: [0.5, 2.0 / 3.0, 0.8].iter().map(|&l| SeasonSpec::Poisson { poisson: l }).collect(),
            tail_eps: DEFAULT_TAIL_EPS,
            mode: NumericMode::Float,
        }
    }

    /// Geometric seasons with parameters 3/4, 2/3, 1/3.
    pub fn geometric_example() -> ModelSpec {
        ModelSpec {
            seasons: [0.75, 2.0 / 3.0, 1.0 / 3.0].iter().map(|&p| SeasonSpec::Geometric { geometric: p }).collect(),
            tail_eps: DEFAULT_TAIL_EPS,
            mode: NumericMode::Float,
        }
    }

    pub fn by_name(name: &str) -> Option<ModelSpec> {
        match name {
            "first" => Some(first_example()),
            "poisson" => Some(poisson_example()),
            "geometric" => Some(geometric_example()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 3] = ["first", "poisson", "geometric"];
}
