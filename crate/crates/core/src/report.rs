//! A complete ruin table: finite horizons `1..=t_max` plus the ultimate row.

use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::finite_time::RuinMatrix;
use crate::model::{Model, SeasonalModel};
use crate::registry::{FiniteTimeMethod, FiniteTimeRequest, UltimateSolver};
use crate::scalar::Scalar;
use crate::ultimate::{classify_net_profit, NetProfitClass, NetProfitKind, SolveMeta, SolveOptions, SurvivalVector};

/// Where the ultimate row came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum UltimateSource {
    Solver {
        meta: SolveMeta,
        /// Far-field boundary of the accepted run.
        boundary_index: usize,
        residual: f64,
    },
    /// Fixed by the net profit class without solving anything.
    Classified { class: NetProfitClass },
    /// No ultimate row could be produced.
    Unavailable { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuinTable {
    pub finite: RuinMatrix<f64>,
    /// `psi(u)` for `u in 0..=u_max`; `None` when unavailable.
    pub ultimate: Option<Vec<f64>>,
    pub source: UltimateSource,
    pub finite_method: &'static str,
}

impl RuinTable {
    pub fn u_max(&self) -> usize {
        self.finite.u_max()
    }

    pub fn t_max(&self) -> usize {
        self.finite.t_max()
    }
}

fn solved(v: SurvivalVector<f64>) -> (Option<Vec<f64>>, UltimateSource) {
    let psi = v.psi_f64();
    (Some(psi), UltimateSource::Solver { meta: v.meta, boundary_index: v.boundary_index, residual: v.residual })
}

fn rotated_class<T: Scalar>(
    m: &SeasonalModel<T>,
    start: usize,
    wrap: fn(SeasonalModel<T>) -> Model,
) -> Result<(Model, Option<NetProfitClass>)> {
    let r = m.rotated(start);
    let class = if r.period() == 3 { Some(classify_net_profit(&r)?) } else { None };
    Ok((wrap(r), class))
}

/// Computes every row of the table for surpluses `0..=request.u_max`.
///
/// Supercritical and critical three-season models take their ultimate row
/// from the classification. Solver failures are returned as errors rather
/// than folded into the table.
pub fn ruin_table(
    model: &Model,
    finite: &dyn FiniteTimeMethod,
    solver: &dyn UltimateSolver,
    request: &FiniteTimeRequest,
    opts: &SolveOptions,
) -> Result<RuinTable> {
    let period = model.period();
    if request.start_season >= period {
        return Err(RuinError::InvalidSeasonIndex { index: request.start_season, period });
    }
    let matrix = finite.compute(model, request)?;
    let (rotated, class) = match model {
        Model::Float(m) => rotated_class(m, request.start_season, Model::Float)?,
        Model::Exact(m) => rotated_class(m, request.start_season, Model::Exact)?,
    };
    let opts = SolveOptions { u_max: request.u_max, ..*opts };
    let (ultimate, source) = match class {
        Some(class) if class.kind != NetProfitKind::Subcritical => {
            let row = (0..=request.u_max).map(|u| class.psi(u).unwrap_or(1.0)).collect();
            (Some(row), UltimateSource::Classified { class })
        }
        Some(_) => {
            solved(solver.solve(&rotated, &opts)?)
        }
        None if solver.name() == "homogeneous" => match solver.solve(&rotated, &opts) {
            Ok(v) => solved(v),
            Err(e) => (None, UltimateSource::Unavailable { reason: e.to_string() }),
        },
        None => {
            let reason = format!("the {} solver needs three seasons, model has {period}", solver.name());
            (None, UltimateSource::Unavailable { reason })
        }
    };
    Ok(RuinTable { finite: matrix, ultimate, source, finite_method: finite.name() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;
    use crate::registry::Registry;

    #[test]
    fn first_example_table_shape() {
        let r = Registry::default();
        let model = builtin::first_example().build().unwrap();
        let req = FiniteTimeRequest { u_max: 5, t_max: 6, ..Default::default() };
        let t = ruin_table(&model, r.finite("recursion").unwrap(), r.ultimate("generic").unwrap(), &req, &SolveOptions::default())
            .unwrap();
        assert_eq!((t.u_max(), t.t_max()), (5, 6));
        let inf = t.ultimate.unwrap();
        assert_eq!(inf.len(), 6);
        for u in 0..=5 {
            assert!(*t.finite.get(u, 6) <= inf[u] + 1e-12);
        }
    }

    #[test]
    fn supercritical_row_is_classified() {
        let r = Registry::default();
        let spec = crate::ModelSpec {
            seasons: vec![crate::SeasonSpec::Weights { weights: vec![0.into(), 0.into(), 1.into()] }; 3],
            ..builtin::first_example()
        };
        let model = spec.build().unwrap();
        let req = FiniteTimeRequest { u_max: 3, t_max: 2, ..Default::default() };
        let t = ruin_table(&model, r.finite("recursion").unwrap(), r.ultimate("branch").unwrap(), &req, &SolveOptions::default())
            .unwrap();
        assert_eq!(t.ultimate.unwrap(), vec![1.0; 4]);
        assert!(matches!(t.source, UltimateSource::Classified { .. }));
    }
}
