//! Branch-free solver.
//!
//! With `a`, `b`, `c` the season laws, `s` the law of their sum and
//! `d = 3 - E S`, survival probabilities satisfy
//!
//! ```text
//! d = phi(0) + b0 c0 phi(2) + (b0 c1 + c0) phi(1)
//! phi(u) = sum_{j=0}^{u+2} s_j phi(u+3-j) - a_{u+1} b0 c0 phi(2)
//!          - a_{u+1} b0 c1 phi(1) - c0 (a*b)_{u+2} phi(1)
//! ```
//!
//! If `s_L` is the first non-zero atom of `S`, the second identity for
//! `u >= L` determines `phi(u + 3 - L)` from smaller indices. The first
//! identity and the second for `u < L` form a small system for
//! `phi(0), phi(1), phi(2)` that is eliminated in exact rationals so that
//! structural zeros are never mistaken for rounding noise. Every `phi(n)` is
//! then carried as a combination of `phi(0)`, `phi(1)` and `d`, and the
//! `2 - L` unknowns left over are fixed by `phi(N) = phi(N + 1) = 1`.

use num_traits::Zero;

use super::{leading_atom, RawRun};
use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::pmf::convolve;
use crate::scalar::{Rational, Scalar};

/// Coefficients of `phi(0)`, `phi(1)`, `d`.
type Lin<T> = [T; 3];

/// Coefficients of `phi(0)`, `phi(1)`, `phi(2)`, `d` in an equation `... = 0`.
type Equation = [Rational; 4];

fn at(v: &[Rational], k: usize) -> Rational {
    v.get(k).cloned().unwrap_or_else(Rational::zero)
}

fn conv_at(p: &[Rational], q: &[Rational], n: usize) -> Rational {
    (0..=n).fold(Rational::zero(), |acc, k| acc + at(p, k) * at(q, n - k))
}

/// Solves the low block; returns each of `phi(0..3)` over `(phi0, phi1, d)`
/// and the indices among `{0, 1}` that remain free.
fn low_block(a: &[Rational], b: &[Rational], c: &[Rational], lead: usize) -> Result<([Lin<Rational>; 3], Vec<usize>)> {
    let ab: Vec<Rational> = (0..=4).map(|n| conv_at(a, b, n)).collect();
    let s: Vec<Rational> = (0..=5).map(|n| conv_at(&ab, c, n)).collect();
    let (b0, c0, c1) = (at(b, 0), at(c, 0), at(c, 1));
    let one = Rational::from_integer(1.into());

    let mut equations: Vec<Equation> = vec![[one.clone(), &b0 * &c1 + &c0, &b0 * &c0, -one.clone()]];
    for u in 0..lead {
        // s_j multiplies phi(u + 3 - j); indices above 2 carry zero atoms here.
        let mut e: Equation = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        for j in 0..=u + 2 {
            let idx = u + 3 - j;
            if idx <= 2 {
                e[idx] += at(&s, j);
            } else if !Zero::is_zero(&at(&s, j)) {
                return Err(RuinError::NoBranchMatched);
            }
        }
        e[u] -= one.clone();
        let a1 = at(a, u + 1);
        e[2] -= &a1 * &b0 * &c0;
        e[1] -= &a1 * &b0 * &c1 + &c0 * &ab[u + 2];
        equations.push(e);
    }

    // Gaussian elimination pivoting on the highest unknown present.
    let mut solved: [Option<Equation>; 3] = [None, None, None];
    for mut e in equations {
        for v in 0..3 {
            if let Some(expr) = &solved[v] {
                let coef = std::mem::take(&mut e[v]);
                if !Zero::is_zero(&coef) {
                    for k in 0..4 {
                        e[k] += &coef * &expr[k];
                    }
                }
            }
        }
        let Some(p) = (0..3).rev().find(|&k| !Zero::is_zero(&e[k])) else {
            if Zero::is_zero(&e[3]) {
                continue;
            }
            return Err(RuinError::NoBranchMatched);
        };
        // x_p = -(sum_{k != p} e_k x_k) / e_p
        let pivot = e[p].clone();
        let mut expr: Equation = std::array::from_fn(|k| if k == p { Rational::zero() } else { -&e[k] / &pivot });
        expr[p] = Rational::zero();
        for other in solved.iter_mut().flatten() {
            let coef = std::mem::take(&mut other[p]);
            if !Zero::is_zero(&coef) {
                for k in 0..4 {
                    other[k] += &coef * &expr[k];
                }
            }
        }
        solved[p] = Some(expr);
    }

    let free: Vec<usize> = (0..2).filter(|&v| solved[v].is_none()).collect();
    let lin = |v: usize| -> Lin<Rational> {
        match &solved[v] {
            Some(expr) => [expr[0].clone(), expr[1].clone(), expr[3].clone()],
            None => {
                let mut l = [Rational::zero(), Rational::zero(), Rational::zero()];
                l[v] = one.clone();
                l
            }
        }
    };
    if solved[2].is_none() {
        // phi(2) never determined: the leading-atom propagation cannot start.
        return Err(RuinError::NoBranchMatched);
    }
    Ok(([lin(0), lin(1), lin(2)], free))
}

fn lin_log2<T: Scalar>(l: &Lin<T>) -> f64 {
    l.iter().map(Scalar::log2_abs).fold(f64::NEG_INFINITY, f64::max)
}

struct Propagation<T> {
    rows: Vec<Lin<T>>,
    free: Vec<usize>,
    lead: usize,
    max_log2: f64,
}

fn propagate<T: Scalar>(model: &SeasonalModel<T>, top: usize) -> Result<Propagation<T>> {
    let lead = leading_atom(model).ok_or(RuinError::NoBranchMatched)?;
    if lead > 2 || model.period() != 3 {
        return Err(RuinError::NoBranchMatched);
    }
    let exact: Vec<Vec<Rational>> =
        model.seasons().iter().map(|s| s.masses().iter().map(Scalar::to_rational).collect()).collect();
    let (low, free) = low_block(&exact[0], &exact[1], &exact[2], lead)?;

    let proto = model.mean_s();
    let to_t = |l: &Lin<Rational>| -> Lin<T> { std::array::from_fn(|k| proto.from_rational_like(&l[k])) };
    let (a, b, c) = (&model.seasons()[0], &model.seasons()[1], &model.seasons()[2]);
    let s = model.aggregate().masses();
    let ab = convolve(a, b);
    let (b0, c0, c1) = (b.mass(0), c.mass(0), c.mass(1));
    let b0c0 = b0.clone() * c0.clone();
    let b0c1 = b0 * c1;
    let s_lead = s[lead].clone();

    let mut phi: Vec<Lin<T>> = Vec::with_capacity(top + 1);
    phi.extend(low.iter().map(to_t));
    let mut max_log2 = phi.iter().map(lin_log2).fold(f64::NEG_INFINITY, f64::max);
    for n in 3..=top {
        let u = n + lead - 3;
        let mut acc = phi[u].clone();
        let jmax = (u + 2).min(s.len() - 1);
        for j in lead + 1..=jmax {
            let sj = &s[j];
            if sj.is_zero() {
                continue;
            }
            let src = &phi[u + 3 - j];
            for k in 0..3 {
                acc[k] = acc[k].clone() - sj.clone() * src[k].clone();
            }
        }
        let a_next = a.mass(u + 1);
        let w2 = a_next.clone() * b0c0.clone();
        let w1 = a_next * b0c1.clone() + c0.clone() * ab.mass(u + 2);
        for k in 0..3 {
            acc[k] = acc[k].clone() + w2.clone() * phi[2][k].clone() + w1.clone() * phi[1][k].clone();
        }
        let next: Lin<T> = std::array::from_fn(|k| acc[k].clone() / s_lead.clone());
        max_log2 = max_log2.max(lin_log2(&next));
        phi.push(next);
    }
    phi.truncate(top + 1);
    Ok(Propagation { rows: phi, free, lead, max_log2 })
}

/// `phi(n) = alpha_n phi(0) + beta_n phi(1) + gamma_n (3 - E S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTriple<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

/// Coefficient rows for `n in 0..=n_max`, with `phi(0)` and `phi(1)` treated
/// as unknowns even where the low-order identities pin them down.
pub fn coefficient_triples<T: Scalar>(model: &SeasonalModel<T>, n_max: usize) -> Result<Vec<CoefficientTriple<T>>> {
    let p = propagate(model, n_max.max(2))?;
    Ok(p.rows
        .into_iter()
        .take(n_max + 1)
        .map(|[alpha, beta, gamma]| CoefficientTriple { alpha, beta, gamma })
        .collect())
}

pub(crate) fn run<T: Scalar>(model: &SeasonalModel<T>, boundary: usize, len: usize) -> Result<RawRun<T>> {
    let top = len.max(boundary + 1);
    let Propagation { rows: phi, free, lead, max_log2 } = propagate(model, top)?;
    let proto = model.mean_s();
    let zero = proto.zero_like();
    let d = proto.from_usize_like(3) - proto.clone();

    // Far-field closure for the free starting values.
    let mut x = [zero.clone(), zero.clone()];
    let mut rel_det_log2 = 0.0;
    let one = proto.one_like();
    let rhs = |n: usize| one.clone() - phi[n][2].clone() * d.clone();
    match free.as_slice() {
        [] => {}
        [v] => {
            let g = phi[boundary][*v].clone();
            if g.is_zero() {
                return Err(RuinError::IllConditionedBoundary { boundary, rel_det: 0.0 });
            }
            x[*v] = rhs(boundary) / g;
        }
        _ => {
            let (r1, r2) = (&phi[boundary], &phi[boundary + 1]);
            let det = r1[0].clone() * r2[1].clone() - r1[1].clone() * r2[0].clone();
            if det.is_zero() {
                return Err(RuinError::IllConditionedBoundary { boundary, rel_det: 0.0 });
            }
            let norm = |r: &Lin<T>| r[0].log2_abs().max(r[1].log2_abs());
            rel_det_log2 = det.log2_abs() - norm(r1) - norm(r2);
            let (h1, h2) = (rhs(boundary), rhs(boundary + 1));
            x[0] = (h1.clone() * r2[1].clone() - r1[1].clone() * h2.clone()) / det.clone();
            x[1] = (r1[0].clone() * h2 - r2[0].clone() * h1) / det;
        }
    }
    let values = phi
        .iter()
        .map(|l| l[0].clone() * x[0].clone() + l[1].clone() * x[1].clone() + l[2].clone() * d.clone())
        .collect();
    Ok(RawRun { phi: values, max_log2, rel_det_log2, free_parameters: free.len(), branch: None, leading_atom: lead })
}
