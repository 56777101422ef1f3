//! Ultimate ruin when every claim has the same law.
//!
//! `psi(0) = E Z` and, for `u >= 1`,
//!
//! ```text
//! F(0) psi(u) = sum_{j=1}^{u-1} (1 - F(j)) psi(u-j) + sum_{j>=u} (1 - F(j))
//! ```
//!
//! The tail sum is evaluated as `E Z - sum_{j<u} (1 - F(j))` so truncated
//! laws need no infinite summation. The factor `F(0)` comes from moving the
//! `j = 0` term of the full convolution to the left-hand side; `F(0) > 0`
//! whenever `E Z < 1`.

use super::{SolveMeta, SurvivalVector};
use crate::error::{Result, RuinError};
use crate::pmf::Pmf;
use crate::scalar::Scalar;

pub fn homogeneous_ultimate<T: Scalar>(claim: &Pmf<T>, u_max: usize) -> Result<SurvivalVector<T>> {
    let claim = claim.closed();
    let mean = claim.mean();
    let one = claim.one();
    if mean >= one {
        return Err(RuinError::NetProfitViolated { mean: mean.to_f64() });
    }
    let f0 = claim.mass(0);
    let tails = claim.tails(u_max);
    let mut psi = vec![mean.clone()];
    let mut remaining = mean;
    for u in 1..=u_max {
        remaining = remaining - tails[u - 1].clone();
        let acc = (1..u).fold(remaining.clone(), |acc, j| acc + tails[j].clone() * psi[u - j].clone());
        psi.push(acc / f0.clone());
    }
    let phi = psi.into_iter().map(|p| one.clone() - p).collect();
    Ok(SurvivalVector::from_raw(phi, u_max, 0, SolveMeta::new("homogeneous")))
}
