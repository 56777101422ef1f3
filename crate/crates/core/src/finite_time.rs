//! Finite-horizon ruin probabilities for periodic claim sequences.
//!
//! With `psi_j(u, T)` the probability of ruin within `T` steps when the first
//! claim is drawn from season `j`,
//!
//! ```text
//! psi_j(u, 1) = P(Z_j > u)
//! psi_j(u, T) = psi_j(u, 1) + sum_{k=0}^{u} psi_{j+1}(u + 1 - k, T - 1) P(Z_j = k)
//! ```
//!
//! where season indices wrap modulo the period. Horizon `T` needs the
//! previous horizon at one more surplus value, so the working set shrinks by
//! one column per step: horizon `T` is evaluated on `0..=u_max + t_max - T`.

use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::pmf::Pmf;
use crate::scalar::Scalar;

/// `psi(u, T)` for `u in 0..=u_max`, `T in 1..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuinMatrix<T> {
    /// Indexed `[u][T - 1]`.
    psi: Vec<Vec<T>>,
    start_season: usize,
}

impl<T: Scalar> RuinMatrix<T> {
    /// Builds a matrix from rows indexed `[u][T - 1]`, all of equal length.
    pub fn from_rows(psi: Vec<Vec<T>>, start_season: usize) -> Self {
        assert!(!psi.is_empty() && !psi[0].is_empty() && psi.iter().all(|r| r.len() == psi[0].len()));
        RuinMatrix { psi, start_season }
    }

    pub fn get(&self, u: usize, horizon: usize) -> &T {
        &self.psi[u][horizon - 1]
    }

    pub fn u_max(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn t_max(&self) -> usize {
        self.psi[0].len()
    }

    pub fn start_season(&self) -> usize {
        self.start_season
    }

    /// Row of the table for one horizon, over all surpluses.
    pub fn horizon_row(&self, horizon: usize) -> Vec<T> {
        self.psi.iter().map(|row| row[horizon - 1].clone()).collect()
    }

    pub fn to_f64(&self) -> RuinMatrix<f64> {
        RuinMatrix {
            psi: self.psi.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
            start_season: self.start_season,
        }
    }
}

/// Probability that the first claim alone ruins surplus `u`.
pub fn one_step_ruin<T: Scalar>(season: &Pmf<T>, u: usize) -> T {
    season.tail(u as isize)
}

pub fn finite_time_ruin<T: Scalar>(
    model: &SeasonalModel<T>,
    u_max: usize,
    t_max: usize,
    start_season: usize,
) -> Result<RuinMatrix<T>> {
    let m = model.period();
    if start_season >= m {
        return Err(RuinError::InvalidSeasonIndex { index: start_season, period: m });
    }
    if t_max == 0 {
        return Err(RuinError::InvalidParameter("t_max must be at least 1".into()));
    }
    let width = u_max + t_max - 1;
    let tails: Vec<Vec<T>> = model.seasons().iter().map(|s| s.tails(width)).collect();

    let mut psi: Vec<Vec<T>> = (0..=u_max).map(|_| Vec::with_capacity(t_max)).collect();
    let record = |layer: &[Vec<T>], psi: &mut Vec<Vec<T>>| {
        for (u, row) in psi.iter_mut().enumerate() {
            row.push(layer[start_season][u].clone());
        }
    };

    let mut prev: Vec<Vec<T>> = tails.clone();
    record(&prev, &mut psi);
    for horizon in 2..=t_max {
        let w = u_max + t_max - horizon;
        let layer: Vec<Vec<T>> = (0..m)
            .map(|j| {
                let season = model.season(j).masses();
                let next = &prev[(j + 1) % m];
                (0..=w)
                    .map(|u| {
                        let kmax = u.min(season.len() - 1);
                        (0..=kmax).fold(tails[j][u].clone(), |acc, k| {
                            acc + next[u + 1 - k].clone() * season[k].clone()
                        })
                    })
                    .collect()
            })
            .collect();
        record(&layer, &mut psi);
        prev = layer;
    }
    Ok(RuinMatrix { psi, start_season })
}
