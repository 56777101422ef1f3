//! Solvers and finite-horizon methods registered by name, so callers can
//! pick an algorithm from configuration at run time.

use std::collections::BTreeMap;

use crate::error::{Result, RuinError};
use crate::finite_time::{finite_time_ruin, RuinMatrix};
use crate::model::{Model, SeasonalModel};
use crate::oracle::{enumerate_finite_time_from, mc_finite_time_grid};
use crate::scalar::Scalar;
use crate::ultimate::{homogeneous_ultimate, solve_ultimate, SolveOptions, SolverKind, SurvivalVector};

/// Computes `phi(u)` for `u in 0..=opts.u_max`, with season 0 first.
pub trait UltimateSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<SurvivalVector<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteTimeRequest {
    pub u_max: usize,
    pub t_max: usize,
    pub start_season: usize,
    /// Used by sampling methods only.
    pub n_paths: u64,
    pub seed: u64,
}

impl Default for FiniteTimeRequest {
    fn default() -> Self {
        FiniteTimeRequest { u_max: 20, t_max: 20, start_season: 0, n_paths: 100_000, seed: 42 }
    }
}

/// Fills `psi(u, T)` for `u in 0..=u_max`, `T in 1..=t_max`.
pub trait FiniteTimeMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn compute(&self, model: &Model, request: &FiniteTimeRequest) -> Result<RuinMatrix<f64>>;
}

struct KindSolver(SolverKind);

impl UltimateSolver for KindSolver {
    fn name(&self) -> &'static str {
        match self.0 {
            SolverKind::Branch => "branch",
            SolverKind::Generic => "generic",
        }
    }

    fn summary(&self) -> &'static str {
        match self.0 {
            SolverKind::Branch => "closed-form recursion for the matching zero-atom case",
            SolverKind::Generic => "single recurrence led by the first non-zero atom of S",
        }
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<SurvivalVector<f64>> {
        match model {
            Model::Float(m) => solve_ultimate(m, self.0, opts),
            Model::Exact(m) => solve_ultimate(m, self.0, opts).map(|v| v.to_f64()),
        }
    }
}

struct Homogeneous;

fn homogeneous_of<T: Scalar>(m: &SeasonalModel<T>, u_max: usize) -> Result<SurvivalVector<f64>> {
    if !m.all_seasons_identical() {
        return Err(RuinError::InvalidParameter("the homogeneous solver needs identical seasons".into()));
    }
    homogeneous_ultimate(&m.seasons()[0], u_max).map(|v| v.to_f64())
}

impl UltimateSolver for Homogeneous {
    fn name(&self) -> &'static str {
        "homogeneous"
    }

    fn summary(&self) -> &'static str {
        "recursion for a single claim law; requires identical seasons"
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<SurvivalVector<f64>> {
        match model {
            Model::Float(m) => homogeneous_of(m, opts.u_max),
            Model::Exact(m) => homogeneous_of(m, opts.u_max),
        }
    }
}

struct Recursion;

impl FiniteTimeMethod for Recursion {
    fn name(&self) -> &'static str {
        "recursion"
    }

    fn summary(&self) -> &'static str {
        "one-step recursion over horizons"
    }

    fn compute(&self, model: &Model, r: &FiniteTimeRequest) -> Result<RuinMatrix<f64>> {
        match model {
            Model::Float(m) => finite_time_ruin(m, r.u_max, r.t_max, r.start_season),
            Model::Exact(m) => finite_time_ruin(m, r.u_max, r.t_max, r.start_season).map(|x| x.to_f64()),
        }
    }
}

struct Enumeration;

fn enumerate_all<T: Scalar>(m: &SeasonalModel<T>, r: &FiniteTimeRequest) -> Result<RuinMatrix<f64>> {
    let rows = (0..=r.u_max)
        .map(|u| (1..=r.t_max).map(|t| enumerate_finite_time_from(m, u, t, r.start_season).map(|p| p.to_f64())).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(RuinMatrix::from_rows(rows, r.start_season))
}

impl FiniteTimeMethod for Enumeration {
    fn name(&self) -> &'static str {
        "enumeration"
    }

    fn summary(&self) -> &'static str {
        "every claim path visited; finite support only"
    }

    fn compute(&self, model: &Model, r: &FiniteTimeRequest) -> Result<RuinMatrix<f64>> {
        if r.t_max == 0 {
            return Err(RuinError::InvalidParameter("t_max must be at least 1".into()));
        }
        match model {
            Model::Float(m) => enumerate_all(m, r),
            Model::Exact(m) => enumerate_all(m, r),
        }
    }
}

struct MonteCarlo;

impl FiniteTimeMethod for MonteCarlo {
    fn name(&self) -> &'static str {
        "monte-carlo"
    }

    fn summary(&self) -> &'static str {
        "seeded simulation of the surplus process"
    }

    fn compute(&self, model: &Model, r: &FiniteTimeRequest) -> Result<RuinMatrix<f64>> {
        if r.t_max == 0 {
            return Err(RuinError::InvalidParameter("t_max must be at least 1".into()));
        }
        let us: Vec<usize> = (0..=r.u_max).collect();
        let ts: Vec<usize> = (1..=r.t_max).collect();
        let grid = mc_finite_time_grid(&model.to_f64(), &us, &ts, r.start_season, r.n_paths, r.seed)?;
        let rows = grid.into_iter().map(|row| row.into_iter().map(|e| e.p_hat).collect()).collect();
        Ok(RuinMatrix::from_rows(rows, r.start_season))
    }
}

pub struct Registry {
    ultimate: BTreeMap<&'static str, Box<dyn UltimateSolver>>,
    finite: BTreeMap<&'static str, Box<dyn FiniteTimeMethod>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register_ultimate(Box::new(KindSolver(SolverKind::Branch)));
        r.register_ultimate(Box::new(KindSolver(SolverKind::Generic)));
        r.register_ultimate(Box::new(Homogeneous));
        r.register_finite(Box::new(Recursion));
        r.register_finite(Box::new(Enumeration));
        r.register_finite(Box::new(MonteCarlo));
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry { ultimate: BTreeMap::new(), finite: BTreeMap::new() }
    }

    /// Adds or replaces a solver under its own name.
    pub fn register_ultimate(&mut self, solver: Box<dyn UltimateSolver>) {
        self.ultimate.insert(solver.name(), solver);
    }

    pub fn register_finite(&mut self, method: Box<dyn FiniteTimeMethod>) {
        self.finite.insert(method.name(), method);
    }

    pub fn ultimate(&self, name: &str) -> Result<&dyn UltimateSolver> {
        self.ultimate.get(name).map(|b| b.as_ref()).ok_or_else(|| RuinError::UnknownStrategy {
            kind: "ultimate solver",
            name: name.to_string(),
            available: self.ultimate_names().join(", "),
        })
    }

    pub fn finite(&self, name: &str) -> Result<&dyn FiniteTimeMethod> {
        self.finite.get(name).map(|b| b.as_ref()).ok_or_else(|| RuinError::UnknownStrategy {
            kind: "finite-time method",
            name: name.to_string(),
            available: self.finite_names().join(", "),
        })
    }

    pub fn ultimate_names(&self) -> Vec<&'static str> {
        self.ultimate.keys().copied().collect()
    }

    pub fn finite_names(&self) -> Vec<&'static str> {
        self.finite.keys().copied().collect()
    }
}
