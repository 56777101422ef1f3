//! Residuals of the two survival identities, for checking solver output.

use crate::model::SeasonalModel;
use crate::pmf::convolve;

/// `|(3 - E S) - (phi(0) + b0 c0 phi(2) + b0 c1 phi(1) + c0 phi(1))|`.
pub fn boundary_identity_residual(model: &SeasonalModel<f64>, phi: &[f64]) -> f64 {
    let (b, c) = (&model.seasons()[1], &model.seasons()[2]);
    let (b0, c0, c1) = (b.mass(0), c.mass(0), c.mass(1));
    let rhs = phi[0] + b0 * c0 * phi[2] + b0 * c1 * phi[1] + c0 * phi[1];
    ((3.0 - model.mean_s()) - rhs).abs()
}

/// Largest residual of
/// `phi(u) = sum_{k=0}^{u+2} s_{u+2-k} phi(k+1) - a_{u+1} b0 c0 phi(2) - a_{u+1} b0 c1 phi(1) - c0 phi(1) (a*b)_{u+2}`
/// over `u in 0..=u_last`; needs `phi` up to index `u_last + 3`.
pub fn recurrence_residual(model: &SeasonalModel<f64>, phi: &[f64], u_last: usize) -> f64 {
    let (a, b, c) = (&model.seasons()[0], &model.seasons()[1], &model.seasons()[2]);
    let ab = convolve(a, b);
    let s = model.aggregate();
    let (b0, c0, c1) = (b.mass(0), c.mass(0), c.mass(1));
    (0..=u_last)
        .map(|u| {
            let conv: f64 = (0..=u + 2).map(|k| s.mass(u + 2 - k) * phi[k + 1]).sum();
            let a1 = a.mass(u + 1);
            let rhs = conv - a1 * b0 * c0 * phi[2] - a1 * b0 * c1 * phi[1] - c0 * phi[1] * ab.mass(u + 2);
            (phi[u] - rhs).abs()
        })
        .fold(0.0, f64::max)
}
