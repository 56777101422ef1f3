//! Ultimate ruin probabilities for the three-season model.
//!
//! Survival probabilities satisfy a linear recurrence whose leading
//! coefficient is the first non-zero atom of the aggregate claim `S`. Up to
//! two starting values stay unknown; they are pinned by requiring
//! `phi(n) = 1` at a far boundary `N`. The recurrence has growing modes, so
//! the work is redone in wider binary floating point whenever double
//! precision cannot carry the cancellation.

mod branch;
mod classify;
mod generic;
mod homogeneous;
mod identities;

pub use classify::*;
pub use generic::{coefficient_triples, CoefficientTriple};
pub use homogeneous::homogeneous_ultimate;
pub use identities::{boundary_identity_residual, recurrence_residual};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::scalar::{BigFloat, Rational, Scalar};

/// First far-field boundary tried in adaptive mode.
pub const INITIAL_BOUNDARY: usize = 250;
/// Adaptive doubling stops here.
pub const MAX_BOUNDARY: usize = 16384;
/// Largest mantissa used before giving up.
pub const MAX_PRECISION_BITS: usize = 1 << 18;
/// Fixed-precision solves refuse boundary systems below this relative determinant.
pub const ILL_CONDITIONED_REL_DET: f64 = 1e-30;

const STEP_TOLERANCE: f64 = 1e-10;
const RESIDUAL_TOLERANCE: f64 = 1e-6;
const CLAMP_WARNING: f64 = 1e-6;
const GUARD_BITS_F64: f64 = 40.0;
const GUARD_BITS_WIDE: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Fixed(usize),
    Adaptive,
}

/// Which version of the closed-form case formulas the branch solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaVariant {
    /// Formulas re-derived from the survival identities.
    Corrected,
    /// Formulas exactly as published, kept for comparison.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Per-case closed-form recursions.
    Branch,
    /// One recurrence driven by the leading atom of `S`.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub boundary: Boundary,
    /// Largest surplus reported.
    pub u_max: usize,
    pub precision_escalation: bool,
    pub formulas: FormulaVariant,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            boundary: Boundary::Adaptive,
            u_max: 20,
            precision_escalation: true,
            formulas: FormulaVariant::Corrected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveMeta {
    pub solver: &'static str,
    pub branch: Option<Branch>,
    pub leading_atom: Option<usize>,
    /// Starting values fixed by the far-field condition.
    pub free_parameters: usize,
    /// Mantissa bits of the accepted run; `None` for exact arithmetic.
    pub precision_bits: Option<usize>,
    /// Number of wider-precision reruns.
    pub escalations: usize,
    pub boundaries_tried: Vec<usize>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl SolveMeta {
    pub(crate) fn new(solver: &'static str) -> Self {
        SolveMeta {
            solver,
            branch: None,
            leading_atom: None,
            free_parameters: 0,
            precision_bits: None,
            escalations: 0,
            boundaries_tried: Vec::new(),
            converged: true,
            warnings: Vec::new(),
        }
    }
}

/// Survival probabilities `phi(u)` for `u in 0..=u_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalVector<T> {
    /// Reported values, clamped to `[0, 1]`.
    pub phi: Vec<T>,
    /// Unclamped values on `0..=max(N + 1, u_max)`.
    pub raw: Vec<T>,
    /// Far-field boundary `N` of the accepted run (0 when none is used).
    pub boundary_index: usize,
    /// `max |phi(n) - 1|` over `n in [N - 16, N - 1]`.
    pub residual: f64,
    pub meta: SolveMeta,
}

impl<T: Scalar> SurvivalVector<T> {
    pub fn u_max(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi_f64(&self) -> Vec<f64> {
        self.phi.iter().map(Scalar::to_f64).collect()
    }

    pub fn psi_f64(&self) -> Vec<f64> {
        self.phi.iter().map(|p| 1.0 - p.to_f64()).collect()
    }

    pub fn raw_f64(&self) -> Vec<f64> {
        self.raw.iter().map(Scalar::to_f64).collect()
    }

    pub fn to_f64(&self) -> SurvivalVector<f64> {
        SurvivalVector {
            phi: self.phi_f64(),
            raw: self.raw_f64(),
            boundary_index: self.boundary_index,
            residual: self.residual,
            meta: self.meta.clone(),
        }
    }

    pub(crate) fn from_raw(raw: Vec<T>, u_max: usize, boundary_index: usize, mut meta: SolveMeta) -> Self {
        let phi: Vec<T> = raw[..=u_max]
            .iter()
            .enumerate()
            .map(|(u, x)| {
                let (zero, one) = (x.zero_like(), x.one_like());
                let clamped = if *x < zero {
                    zero
                } else if *x > one {
                    one
                } else {
                    return x.clone();
                };
                let moved = (clamped.to_f64() - x.to_f64()).abs();
                if moved > CLAMP_WARNING {
                    let msg = format!("phi({u}) = {} clamped into [0, 1]", x.to_f64());
                    log::warn!("{msg}");
                    meta.warnings.push(msg);
                }
                clamped
            })
            .collect();
        let raw_f: Vec<f64> = raw.iter().map(Scalar::to_f64).collect();
        let residual = far_field_residual(&raw_f, boundary_index);
        SurvivalVector { phi, raw, boundary_index, residual, meta }
    }
}

fn far_field_residual(raw: &[f64], boundary: usize) -> f64 {
    if boundary == 0 {
        return 0.0;
    }
    let hi = boundary.min(raw.len());
    let lo = boundary.saturating_sub(16).min(hi);
    raw[lo..hi].iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)
}

/// Output of one kernel pass at a fixed boundary and working precision.
pub(crate) struct RawRun<T> {
    /// `phi(n)` for `n in 0..=max(N + 1, len)`.
    pub phi: Vec<T>,
    /// Largest `log2 |coefficient|` seen while propagating.
    pub max_log2: f64,
    /// `log2` of the relative determinant of the boundary system (0 if trivial).
    pub rel_det_log2: f64,
    pub free_parameters: usize,
    pub branch: Option<Branch>,
    pub leading_atom: usize,
}

impl<T> RawRun<T> {
    fn bits_needed(&self, guard: f64) -> f64 {
        self.max_log2.max(0.0) + (-self.rel_det_log2).max(0.0) + guard
    }
}

fn kernel_run<T: Scalar>(
    model: &SeasonalModel<T>,
    kind: SolverKind,
    formulas: FormulaVariant,
    boundary: usize,
    len: usize,
) -> Result<RawRun<T>> {
    match kind {
        SolverKind::Generic => generic::run(model, boundary, len),
        SolverKind::Branch => branch::run(model, formulas, boundary, len),
    }
}

/// A fixed-boundary solve after precision handling.
#[doc(hidden)]
pub struct FixedSolve<T> {
    phi: Vec<T>,
    boundary: usize,
    precision_bits: Option<usize>,
    escalations: usize,
    free_parameters: usize,
    branch: Option<Branch>,
    leading_atom: usize,
}

impl<T> FixedSolve<T> {
    fn from_run<U>(run: RawRun<U>, phi: Vec<T>, boundary: usize, precision_bits: Option<usize>, escalations: usize) -> Self {
        FixedSolve {
            phi,
            boundary,
            precision_bits,
            escalations,
            free_parameters: run.free_parameters,
            branch: run.branch,
            leading_atom: run.leading_atom,
        }
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for super::Rational {}
}

/// Public numeric modes the ultimate solvers accept.
pub trait SolveScalar: Scalar + sealed::Sealed {
    #[doc(hidden)]
    fn fixed_solve(
        model: &SeasonalModel<Self>,
        kind: SolverKind,
        opts: &SolveOptions,
        boundary: usize,
        len: usize,
    ) -> Result<FixedSolve<Self>>;
}

/// Runs `attempt` at `N`, `N + 1`, `N + 2` while the boundary system is singular.
fn with_boundary_retries<T>(boundary: usize, mut attempt: impl FnMut(usize) -> Result<FixedSolve<T>>) -> Result<FixedSolve<T>> {
    let mut last = None;
    for n in boundary..boundary + 3 {
        match attempt(n) {
            Err(e @ RuinError::IllConditionedBoundary { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

fn widen(model: &SeasonalModel<f64>, bits: usize) -> SeasonalModel<BigFloat> {
    let seasons = model.seasons().iter().map(|s| s.map_into(|x| BigFloat::from_f64(*x, bits))).collect();
    SeasonalModel::new(seasons).expect("non-empty")
}

fn round_bits(bits: f64) -> usize {
    let capped = bits.min(2.0 * MAX_PRECISION_BITS as f64);
    ((capped.ceil() as usize).div_ceil(64)) * 64
}

/// Bits to report when double precision overflowed outright: the exponent
/// range alone is exhausted, so at least that many bits are missing.
fn bits_lower_bound(needed: f64) -> usize {
    if needed.is_finite() {
        needed.ceil() as usize
    } else {
        f64::MAX_EXP as usize + GUARD_BITS_F64 as usize
    }
}

impl SolveScalar for f64 {
    fn fixed_solve(
        model: &SeasonalModel<f64>,
        kind: SolverKind,
        opts: &SolveOptions,
        boundary: usize,
        len: usize,
    ) -> Result<FixedSolve<f64>> {
        with_boundary_retries(boundary, |n| {
            let first = kernel_run::<f64>(model, kind, opts.formulas, n, len);
            let mut bits = match &first {
                Ok(run) => {
                    let needed = run.bits_needed(GUARD_BITS_F64);
                    if needed <= 53.0 && run.max_log2 < 660.0 {
                        let phi = run.phi.clone();
                        return Ok(FixedSolve::from_run(first.unwrap(), phi, n, Some(53), 0));
                    }
                    if !opts.precision_escalation {
                        if run.rel_det_log2 < ILL_CONDITIONED_REL_DET.log2() {
                            return Err(RuinError::IllConditionedBoundary { boundary: n, rel_det: run.rel_det_log2.exp2() });
                        }
                        return Err(RuinError::PrecisionExhausted { needed_bits: bits_lower_bound(needed), available_bits: 53 });
                    }
                    // An overflowed run says nothing about the width needed; the wide run measures it.
                    if needed.is_finite() { round_bits((needed + GUARD_BITS_WIDE).max(256.0)) } else { 256 }
                }
                Err(RuinError::IllConditionedBoundary { .. }) if opts.precision_escalation => 256,
                Err(e) => return Err(e.clone()),
            };
            let mut escalations = 0;
            loop {
                escalations += 1;
                log::debug!("boundary {n}: rerunning with {bits} bits");
                let run = kernel_run::<BigFloat>(&widen(model, bits), kind, opts.formulas, n, len)?;
                let needed = run.bits_needed(GUARD_BITS_WIDE);
                if needed <= bits as f64 {
                    let phi = run.phi.iter().map(Scalar::to_f64).collect();
                    return Ok(FixedSolve::from_run(run, phi, n, Some(bits), escalations));
                }
                let next = round_bits(needed + GUARD_BITS_WIDE).max(2 * bits);
                if next > MAX_PRECISION_BITS {
                    return Err(RuinError::PrecisionExhausted {
                        needed_bits: bits_lower_bound(needed),
                        available_bits: MAX_PRECISION_BITS,
                    });
                }
                bits = next;
            }
        })
    }
}

impl SolveScalar for Rational {
    fn fixed_solve(
        model: &SeasonalModel<Rational>,
        kind: SolverKind,
        opts: &SolveOptions,
        boundary: usize,
        len: usize,
    ) -> Result<FixedSolve<Rational>> {
        with_boundary_retries(boundary, |n| {
            let run = kernel_run::<Rational>(model, kind, opts.formulas, n, len)?;
            let phi = run.phi.clone();
            Ok(FixedSolve::from_run(run, phi, n, None, 0))
        })
    }
}

/// Survival probabilities of a subcritical three-season model.
pub fn solve_ultimate<T: SolveScalar>(
    model: &SeasonalModel<T>,
    kind: SolverKind,
    opts: &SolveOptions,
) -> Result<SurvivalVector<T>> {
    let class = classify_net_profit(model)?;
    if class.kind != NetProfitKind::Subcritical {
        return Err(RuinError::NotSubcritical { mean_s: class.mean_s });
    }
    let closed = model.closed();
    let u_max = opts.u_max;
    let mut meta = SolveMeta::new(match kind {
        SolverKind::Branch => "branch",
        SolverKind::Generic => "generic",
    });
    let mut n = match opts.boundary {
        Boundary::Fixed(n) => n.max(2),
        Boundary::Adaptive => INITIAL_BOUNDARY.max(u_max + 32),
    };
    let mut previous: Option<Vec<f64>> = None;
    let accepted = loop {
        let solve = T::fixed_solve(&closed, kind, opts, n, u_max)?;
        meta.boundaries_tried.push(solve.boundary);
        meta.escalations += solve.escalations;
        let phi_f: Vec<f64> = solve.phi.iter().map(Scalar::to_f64).collect();
        let residual = far_field_residual(&phi_f, solve.boundary);
        if opts.boundary != Boundary::Adaptive {
            break solve;
        }
        let settled = match &previous {
            Some(prev) => (0..=u_max).map(|u| (prev[u] - phi_f[u]).abs()).fold(0.0, f64::max) < STEP_TOLERANCE,
            None => solve.free_parameters == 0,
        };
        if settled && residual <= RESIDUAL_TOLERANCE {
            break solve;
        }
        if 2 * n > MAX_BOUNDARY {
            meta.converged = false;
            let msg = format!("adaptive boundary stopped at N = {} without meeting tolerances", solve.boundary);
            log::warn!("{msg}");
            meta.warnings.push(msg);
            break solve;
        }
        previous = Some(phi_f);
        n *= 2;
    };
    meta.branch = accepted.branch;
    meta.leading_atom = Some(accepted.leading_atom);
    meta.free_parameters = accepted.free_parameters;
    meta.precision_bits = accepted.precision_bits;
    Ok(SurvivalVector::from_raw(accepted.phi, u_max, accepted.boundary, meta))
}

pub fn ultimate_branch<T: SolveScalar>(model: &SeasonalModel<T>, opts: &SolveOptions) -> Result<SurvivalVector<T>> {
    solve_ultimate(model, SolverKind::Branch, opts)
}

pub fn ultimate_generic<T: SolveScalar>(model: &SeasonalModel<T>, opts: &SolveOptions) -> Result<SurvivalVector<T>> {
    solve_ultimate(model, SolverKind::Generic, opts)
}
