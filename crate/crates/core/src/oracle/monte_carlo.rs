//! Monte Carlo estimates of ruin probabilities.
//!
//! Path `i` draws its claims from a ChaCha8 generator seeded with the run
//! seed and switched to stream `i`, so every path has its own reproducible
//! random sequence and the estimate does not depend on how paths are spread
//! over threads. Claims are drawn by inverse transform from a cumulative
//! table; for truncated laws the missing tail mass is given to the largest
//! stored claim size, which biases ruin estimates upward by at most the
//! truncation deficit per step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::ultimate::{classify_net_profit, NetProfitKind};

/// Identifier recorded with every estimate for reproducibility.
pub const RNG_ALGORITHM: &str = "chacha8-stream-per-path";

/// Horizon used by [`mc_ultimate_proxy`] when none is given.
pub const DEFAULT_PROXY_HORIZON: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / n_paths)`.
    pub std_err: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl McEstimate {
    fn new(ruined: u64, n_paths: u64, seed: u64) -> Self {
        let p_hat = ruined as f64 / n_paths as f64;
        let std_err = (p_hat * (1.0 - p_hat) / n_paths as f64).sqrt();
        McEstimate { p_hat, std_err, n_paths, seed }
    }
}

/// Standardised difference between an estimate and a reference value, using
/// the binomial standard error at the reference probability. A reference
/// of exactly 0 or 1 gives `0` on agreement and infinity otherwise.
pub fn z_score(estimate: &McEstimate, reference: f64) -> f64 {
    let se = (reference * (1.0 - reference) / estimate.n_paths as f64).sqrt();
    let diff = estimate.p_hat - reference;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= f64::EPSILON {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

struct Sampler {
    cumulative: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(model: &SeasonalModel<f64>) -> Self {
        let cumulative = model
            .seasons()
            .iter()
            .map(|s| {
                let mut acc = 0.0;
                let mut c: Vec<f64> = s.masses().iter().map(|p| {
                    acc += p;
                    acc
                }).collect();
                *c.last_mut().expect("non-empty pmf") = 1.0;
                c
            })
            .collect();
        Sampler { cumulative }
    }

    fn draw(&self, season: usize, x: f64) -> i64 {
        let c = &self.cumulative[season];
        c.partition_point(|&v| v <= x).min(c.len() - 1) as i64
    }

    /// First ruin time of path `index`, or `None` if it survives `horizon` steps.
    fn ruin_time(&self, u: usize, horizon: usize, start_season: usize, seed: u64, index: u64) -> Option<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let m = self.cumulative.len();
        let mut w = u as i64;
        for n in 0..horizon {
            let x: f64 = rng.random();
            w += 1 - self.draw((start_season + n) % m, x);
            if w <= 0 {
                return Some(n + 1);
            }
        }
        None
    }

    /// Histogram of first ruin times `1..=horizon` over `n_paths` paths.
    fn histogram(&self, u: usize, horizon: usize, start_season: usize, n_paths: u64, seed: u64) -> Vec<u64> {
        (0..n_paths)
            .into_par_iter()
            .fold(
                || vec![0u64; horizon + 1],
                |mut h, i| {
                    if let Some(t) = self.ruin_time(u, horizon, start_season, seed, i) {
                        h[t] += 1;
                    }
                    h
                },
            )
            .reduce(
                || vec![0u64; horizon + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

fn check_paths(n_paths: u64) -> Result<()> {
    if n_paths == 0 {
        return Err(RuinError::InvalidParameter("n_paths must be at least 1".into()));
    }
    Ok(())
}

/// Estimate of `psi(u, horizon)` starting in season 0.
pub fn mc_finite_time(model: &SeasonalModel<f64>, u: usize, horizon: usize, n_paths: u64, seed: u64) -> Result<McEstimate> {
    check_paths(n_paths)?;
    let hist = Sampler::new(model).histogram(u, horizon, 0, n_paths, seed);
    Ok(McEstimate::new(hist.iter().sum(), n_paths, seed))
}

/// Estimates on a grid of surpluses and horizons, indexed `[u][horizon]`.
///
/// One set of paths per surplus is simulated to the largest horizon and
/// every horizon is read off the recorded first ruin times, so estimates in
/// one row are nested rather than independent.
pub fn mc_finite_time_grid(
    model: &SeasonalModel<f64>,
    surpluses: &[usize],
    horizons: &[usize],
    start_season: usize,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<Vec<McEstimate>>> {
    check_paths(n_paths)?;
    if start_season >= model.period() {
        return Err(RuinError::InvalidSeasonIndex { index: start_season, period: model.period() });
    }
    let sampler = Sampler::new(model);
    let t_max = horizons.iter().copied().max().unwrap_or(0);
    Ok(surpluses
        .iter()
        .map(|&u| {
            let hist = sampler.histogram(u, t_max, start_season, n_paths, seed);
            horizons.iter().map(|&t| McEstimate::new(hist[..=t].iter().sum(), n_paths, seed)).collect()
        })
        .collect())
}

/// Finite-horizon estimate at a long horizon as a stand-in for `psi(u)`.
///
/// Ruin after `horizon` steps is never counted, so the expectation of the
/// estimate is `psi(u, horizon) <= psi(u)`: the proxy is biased low.
pub fn mc_ultimate_proxy(
    model: &SeasonalModel<f64>,
    u: usize,
    horizon: Option<usize>,
    n_paths: u64,
    seed: u64,
) -> Result<McEstimate> {
    let class = classify_net_profit(model)?;
    if class.kind != NetProfitKind::Subcritical {
        return Err(RuinError::NotSubcritical { mean_s: class.mean_s });
    }
    mc_finite_time(model, u, horizon.unwrap_or(DEFAULT_PROXY_HORIZON), n_paths, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::Pmf;

    #[test]
    fn no_claims_no_ruin() {
        let m = SeasonalModel::homogeneous(Pmf::point_mass(0, 1.0), 3).unwrap();
        let e = mc_finite_time(&m, 0, 20, 1000, 7).unwrap();
        assert_eq!(e.p_hat, 0.0);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn reproducible_and_nested() {
        let m = SeasonalModel::new(vec![
            Pmf::from_weights(vec![0.5, 0.25, 0.25]).unwrap(),
            Pmf::from_weights(vec![0.4, 0.3, 0.3]).unwrap(),
            Pmf::from_weights(vec![0.3, 0.35, 0.35]).unwrap(),
        ])
        .unwrap();
        let a = mc_finite_time(&m, 1, 5, 5000, 11).unwrap();
        let b = mc_finite_time(&m, 1, 5, 5000, 11).unwrap();
        assert_eq!(a, b);
        let grid = mc_finite_time_grid(&m, &[1], &[2, 5], 0, 5000, 11).unwrap();
        assert_eq!(grid[0][1], a);
        assert!(grid[0][0].p_hat <= grid[0][1].p_hat);
    }

    #[test]
    fn draws_follow_the_table() {
        let m = SeasonalModel::homogeneous(Pmf::from_weights(vec![0.25, 0.0, 0.75]).unwrap(), 1).unwrap();
        let s = Sampler::new(&m);
        assert_eq!(s.draw(0, 0.0), 0);
        assert_eq!(s.draw(0, 0.2499), 0);
        assert_eq!(s.draw(0, 0.25), 2);
        assert_eq!(s.draw(0, 0.9999999), 2);
    }

    #[test]
    fn z_score_edge_cases() {
        let e = McEstimate { p_hat: 0.0, std_err: 0.0, n_paths: 10, seed: 0 };
        assert_eq!(z_score(&e, 0.0), 0.0);
        assert_eq!(z_score(&e, 1.0), f64::NEG_INFINITY);
        let e = McEstimate { p_hat: 0.6, std_err: 0.0, n_paths: 100, seed: 0 };
        assert!((z_score(&e, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_paths_rejected() {
        let m = SeasonalModel::homogeneous(Pmf::point_mass(0, 1.0), 3).unwrap();
        assert!(matches!(mc_finite_time(&m, 0, 1, 0, 1), Err(RuinError::InvalidParameter(_))));
    }
}
