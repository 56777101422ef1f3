use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuinError {
    #[error("weight vector is empty")]
    EmptyWeights,
    #[error("weight {index} is negative or not a number")]
    NegativeWeight { index: usize },
    #[error("weights sum to zero")]
    ZeroTotal,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("season index {index} out of range for a model with period {period}")]
    InvalidSeasonIndex { index: usize, period: usize },
    #[error("model has period {found}, this computation needs period {expected}")]
    WrongPeriod { expected: usize, found: usize },
    #[error("net profit condition violated (E S = {mean_s}); ultimate ruin is certain or degenerate")]
    NotSubcritical { mean_s: f64 },
    #[error("net profit condition violated for the homogeneous model (E Z = {mean} >= 1)")]
    NetProfitViolated { mean: f64 },
    #[error("zero pattern of the first atoms matches no solver branch")]
    NoBranchMatched,
    #[error("far-field boundary system is ill-conditioned at N = {boundary} (relative determinant {rel_det:e})")]
    IllConditionedBoundary { boundary: usize, rel_det: f64 },
    #[error("coefficient growth needs at least {needed_bits} bits, beyond what this mode allows ({available_bits})")]
    PrecisionExhausted { needed_bits: usize, available_bits: usize },
    #[error("printed recursion admits no survival probability in [0, 1] at N = {boundary}")]
    NoAdmissibleRoot { boundary: usize },
    #[error("enumeration of {paths:e} claim paths refused (limit 1e8)")]
    RefuseTooLarge { paths: f64 },
    #[error("enumeration needs finite-support seasons; season {season} was truncated")]
    InfiniteSupport { season: usize },
    #[error("exact mode requires finite weight vectors; season {season} is a parametric family")]
    ExactModeUnsupported { season: usize },
    #[error("model file error: {0}")]
    Parse(String),
    #[error("unknown {kind} '{name}', available: {available}")]
    UnknownStrategy { kind: &'static str, name: String, available: String },
}

pub type Result<T, E = RuinError> = std::result::Result<T, E>;
