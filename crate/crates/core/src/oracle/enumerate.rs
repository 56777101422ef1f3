use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::scalar::Scalar;

/// Largest number of claim tuples an enumeration may visit.
pub const ENUMERATION_LIMIT: f64 = 1e8;

/// `psi(u, T)` by visiting every claim tuple `(z_1, ..., z_T)`, starting in season 0.
pub fn enumerate_finite_time<T: Scalar>(model: &SeasonalModel<T>, u: usize, horizon: usize) -> Result<T> {
    enumerate_finite_time_from(model, u, horizon, 0)
}

pub fn enumerate_finite_time_from<T: Scalar>(
    model: &SeasonalModel<T>,
    u: usize,
    horizon: usize,
    start_season: usize,
) -> Result<T> {
    let m = model.period();
    if start_season >= m {
        return Err(RuinError::InvalidSeasonIndex { index: start_season, period: m });
    }
    if let Some(season) = model.seasons().iter().position(|s| s.is_truncated()) {
        return Err(RuinError::InfiniteSupport { season });
    }
    let width = model.seasons().iter().map(|s| s.max_support()).max().unwrap_or(0) + 1;
    let paths = (width as f64).powi(horizon as i32);
    if paths > ENUMERATION_LIMIT {
        return Err(RuinError::RefuseTooLarge { paths });
    }
    let zero = model.mean_s().zero_like();
    if horizon == 0 {
        return Ok(zero);
    }
    Ok(visit(model, u as i64, horizon, start_season, &zero))
}

/// Probability that a path starting with surplus `w` in season `j` is ruined
/// within `left` more claims. A ruined prefix contributes its whole mass.
fn visit<T: Scalar>(model: &SeasonalModel<T>, w: i64, left: usize, j: usize, zero: &T) -> T {
    let season = model.season(j);
    let mut total = zero.clone();
    for (k, p) in season.masses().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let next = w + 1 - k as i64;
        if next <= 0 {
            total = total + p.clone();
        } else if left > 1 {
            total = total + p.clone() * visit(model, next, left - 1, (j + 1) % model.period(), zero);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_time::finite_time_ruin;
    use crate::model::{builtin, Model};
    use crate::scalar::{parse_rational, NumericMode};

    fn first_exact() -> SeasonalModel<crate::Rational> {
        let Model::Exact(m) = builtin::first_example().with_mode(NumericMode::Exact).build().unwrap() else { unreachable!() };
        m
    }

    #[test]
    fn first_example_cells() {
        let m = first_exact();
        assert_eq!(enumerate_finite_time(&m, 0, 1).unwrap(), parse_rational("1/2").unwrap());
        let dp = finite_time_ruin(&m, 1, 3, 0).unwrap();
        assert_eq!(enumerate_finite_time(&m, 1, 3).unwrap(), *dp.get(1, 3));
    }

    #[test]
    fn unreachable_surplus_is_safe() {
        // Each step moves the surplus down by at most 1, and ruin needs W <= 0.
        let m = first_exact();
        assert!(enumerate_finite_time(&m, 6, 5).unwrap().is_zero());
        assert!(!enumerate_finite_time(&m, 6, 6).unwrap().is_zero());
    }

    #[test]
    fn refusals() {
        let m = first_exact();
        assert!(matches!(enumerate_finite_time(&m, 0, 17), Err(RuinError::RefuseTooLarge { .. })));
        let Model::Float(p) = builtin::poisson_example().build().unwrap() else { unreachable!() };
        assert_eq!(enumerate_finite_time(&p, 0, 2), Err(RuinError::InfiniteSupport { season: 0 }));
        assert!(matches!(enumerate_finite_time_from(&m, 0, 2, 3), Err(RuinError::InvalidSeasonIndex { .. })));
    }
}
