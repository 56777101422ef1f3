//! Closed-form recursions, one per zero pattern of the first atoms.
//!
//! Cases 1 to 4 express `phi(n)` through coefficient sequences in the unknown
//! starting values and `d = 3 - E S`; the unknowns are then fixed by the far
//! boundary. Cases 5 to 10 give the starting values explicitly and step
//! forward with a recursion led by `s_2`.
//!
//! Four published formulas do not satisfy the survival identities. The
//! corrected forms are used unless [`FormulaVariant::Printed`] is requested:
//!
//! * case 2: the term `-c0 phi(1) sum_k a_k b_{n-k}` in the `phi(1)`
//!   coefficient is `+c0 sum_k a_k b_{n-k}` (without `phi(1)`);
//! * case 4: the inhomogeneous terms are `-/+ a_{n-1}`, not
//!   `-/+ sum_{k<n} a_k b_{n-k}`;
//! * case 6: `phi(0) = 0` and `phi(1) = d / (b0 c1)`;
//! * cases 7 and 10: the sum in the step recursion is subtracted;
//! * case 8: `phi(1) = 0`, `phi(2) = d / (b0 c0)` and the step recursion
//!   starts at `u = 2` with the extra term `a_{u+1} b0 c0 phi(2)`.
//!
//! In the printed case 2 the `phi(1)` coefficient itself depends on
//! `phi(1)`, so the boundary condition becomes a quadratic whose root in
//! `[0, 1]` is found by bisection.

use super::{detect_branch, leading_atom, Branch, FormulaVariant, RawRun};
use crate::error::{Result, RuinError};
use crate::model::SeasonalModel;
use crate::pmf::{convolve, Pmf};
use crate::scalar::{max_log2, Scalar};

struct Ctx<'a, T> {
    a: &'a Pmf<T>,
    b: &'a Pmf<T>,
    s: &'a [T],
    ab: Pmf<T>,
    d: T,
    zero: T,
    one: T,
}

impl<T: Scalar> Ctx<'_, T> {
    fn s(&self, k: usize) -> T {
        self.s.get(k).cloned().unwrap_or_else(|| self.zero.clone())
    }

    /// `(x_u - sum_{j=lead+1}^{u+2} s_j x_{u+3-j} + h) / s_lead` with `u = n + lead - 3`.
    fn step(&self, x: &[T], n: usize, lead: usize, h: T) -> T {
        let u = n + lead - 3;
        let jmax = (u + 2).min(self.s.len() - 1);
        let mut acc = x[u].clone() + h;
        for j in lead + 1..=jmax {
            if !self.s[j].is_zero() {
                acc = acc - self.s[j].clone() * x[u + 3 - j].clone();
            }
        }
        acc / self.s[lead].clone()
    }

    /// `sum_{k=lo}^{hi} a_k b_{n-k}`.
    fn ab_partial(&self, n: usize, lo: usize, hi: usize) -> T {
        (lo..=hi.min(n)).fold(self.zero.clone(), |acc, k| acc + self.a.mass(k) * self.b.mass(n - k))
    }
}

/// Fills `x[start..=top]` with `step` plus the inhomogeneous term `h(n)`.
fn extend<T: Scalar>(ctx: &Ctx<T>, x: &mut Vec<T>, start: usize, top: usize, lead: usize, h: impl Fn(usize) -> T) {
    for n in start..=top {
        let v = ctx.step(x, n, lead, h(n));
        x.push(v);
    }
}

/// Solves `sum_i basis_i(N + r) x_i = 1 - dseq(N + r) d` for the free values.
fn close<T: Scalar>(ctx: &Ctx<T>, basis: &[&[T]], dseq: &[T], boundary: usize) -> Result<(Vec<T>, f64)> {
    let rhs = |n: usize| ctx.one.clone() - dseq[n].clone() * ctx.d.clone();
    let singular = || RuinError::IllConditionedBoundary { boundary, rel_det: 0.0 };
    match basis {
        [g] => {
            let g = g[boundary].clone();
            if g.is_zero() {
                return Err(singular());
            }
            Ok((vec![rhs(boundary) / g], 0.0))
        }
        [p, q] => {
            let (n, m) = (boundary, boundary + 1);
            let det = p[n].clone() * q[m].clone() - q[n].clone() * p[m].clone();
            if det.is_zero() {
                return Err(singular());
            }
            let rel = det.log2_abs() - p[n].log2_abs().max(q[n].log2_abs()) - p[m].log2_abs().max(q[m].log2_abs());
            let (h1, h2) = (rhs(n), rhs(m));
            let x0 = (h1.clone() * q[m].clone() - q[n].clone() * h2.clone()) / det.clone();
            let x1 = (p[n].clone() * h2 - p[m].clone() * h1) / det;
            Ok((vec![x0, x1], rel))
        }
        _ => unreachable!("one or two free values"),
    }
}

fn combine<T: Scalar>(ctx: &Ctx<T>, basis: &[&[T]], x: &[T], dseq: &[T]) -> Vec<T> {
    (0..dseq.len())
        .map(|n| basis.iter().zip(x).fold(dseq[n].clone() * ctx.d.clone(), |acc, (b, xi)| acc + b[n].clone() * xi.clone()))
        .collect()
}

/// Forward recursion led by `s_2`:
/// `s2 phi(u+1) = (1 - s3) phi(u) -/+ sum_{k=1}^{u-1} phi(k) s_{u+3-k} + extra(u)`.
fn step_two<T: Scalar>(ctx: &Ctx<T>, phi: &mut Vec<T>, from_u: usize, top: usize, subtract: bool, extra: impl Fn(usize) -> T) {
    let s2 = ctx.s(2);
    let one_minus_s3 = ctx.one.clone() - ctx.s(3);
    for u in from_u..top {
        let mut sum = ctx.zero.clone();
        for k in 1..u {
            let sk = ctx.s(u + 3 - k);
            if !sk.is_zero() {
                sum = sum + phi[k].clone() * sk;
            }
        }
        let base = one_minus_s3.clone() * phi[u].clone();
        let acc = if subtract { base - sum } else { base + sum };
        phi.push((acc + extra(u)) / s2.clone());
    }
}

fn bisect<T: Scalar>(f: impl Fn(&T) -> T, lo: T, hi: T, iterations: usize) -> Option<T> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(&lo), f(&hi));
    let zero = flo.zero_like();
    if flo.is_zero() {
        return Some(lo);
    }
    if fhi.is_zero() {
        return Some(hi);
    }
    let lo_negative = flo < zero;
    if lo_negative == (fhi < zero) {
        return None;
    }
    let half = lo.from_f64_like(0.5);
    for _ in 0..iterations {
        let mid = (lo.clone() + hi.clone()) * half.clone();
        let fm = f(&mid);
        if fm.is_zero() {
            return Some(mid);
        }
        if (fm < zero) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * half)
}

pub(crate) fn run<T: Scalar>(model: &SeasonalModel<T>, formulas: FormulaVariant, boundary: usize, len: usize) -> Result<RawRun<T>> {
    let branch = detect_branch(model)?;
    let lead = leading_atom(model).ok_or(RuinError::NoBranchMatched)?;
    let proto = model.mean_s();
    let (a, b, c) = (&model.seasons()[0], &model.seasons()[1], &model.seasons()[2]);
    let ctx = Ctx {
        a,
        b,
        s: model.aggregate().masses(),
        ab: convolve(a, b),
        d: proto.from_usize_like(3) - proto.clone(),
        zero: proto.zero_like(),
        one: proto.one_like(),
    };
    let printed = formulas == FormulaVariant::Printed;
    let top = len.max(boundary + 1);
    let (a0, b0, c0) = (a.mass(0), b.mass(0), c.mass(0));
    let (b1, c1) = (b.mass(1), c.mass(1));
    let (zero, one, d) = (ctx.zero.clone(), ctx.one.clone(), ctx.d.clone());

    let mut rel_det_log2 = 0.0;
    let mut free_parameters = 0;
    let (phi, max_coef) = match branch {
        Branch::AllZeroAtoms => {
            let b0c0 = b0.clone() * c0.clone();
            let mut alpha = vec![one.clone(), zero.clone(), -(one.clone() / b0c0.clone())];
            let mut beta = vec![zero.clone(), one.clone(), -(c1.clone() / c0.clone()) - one.clone() / b0.clone()];
            let mut gamma = vec![zero.clone(), zero.clone(), one.clone() / b0c0];
            extend(&ctx, &mut alpha, 3, top, 0, |n| -a.mass(n - 2));
            extend(&ctx, &mut beta, 3, top, 0, |n| c0.clone() * (ctx.ab.mass(n - 1) - a.mass(n - 2)));
            extend(&ctx, &mut gamma, 3, top, 0, |n| a.mass(n - 2));
            let basis: [&[T]; 2] = [&alpha, &beta];
            let (x, rel) = close(&ctx, &basis, &gamma, boundary)?;
            rel_det_log2 = rel;
            free_parameters = 2;
            let m = max_log2(&alpha).max(max_log2(&beta)).max(max_log2(&gamma));
            (combine(&ctx, &basis, &x, &gamma), m)
        }
        Branch::FirstSeasonShifted => {
            let b0c0 = b0.clone() * c0.clone();
            let beta2 = -(c1.clone() / c0.clone()) - one.clone() / b0.clone();
            let mut gamma = vec![zero.clone(), zero.clone(), one.clone() / b0c0];
            extend(&ctx, &mut gamma, 3, top, 1, |n| a.mass(n - 1));
            free_parameters = 1;
            if printed {
                // beta_hat = p + phi(1) q
                let mut p = vec![zero.clone(), one.clone(), beta2];
                let mut q = vec![zero.clone(), zero.clone(), zero.clone()];
                extend(&ctx, &mut p, 3, top, 1, |n| -(a.mass(n - 1) * c0.clone()));
                extend(&ctx, &mut q, 3, top, 1, |n| -(c0.clone() * ctx.ab_partial(n, 1, n)));
                let (pn, qn, gn) = (p[boundary].clone(), q[boundary].clone(), gamma[boundary].clone());
                let f = |x: &T| (qn.clone() * x.clone() + pn.clone()) * x.clone() + gn.clone() * d.clone() - one.clone();
                let x = bisect(f, zero.clone(), one.clone(), 200).ok_or(RuinError::NoAdmissibleRoot { boundary })?;
                let m = max_log2(&p).max(max_log2(&q)).max(max_log2(&gamma));
                let phi = (0..=top)
                    .map(|n| (p[n].clone() + x.clone() * q[n].clone()) * x.clone() + gamma[n].clone() * d.clone())
                    .collect();
                (phi, m)
            } else {
                let mut beta = vec![zero.clone(), one.clone(), beta2];
                extend(&ctx, &mut beta, 3, top, 1, |n| c0.clone() * (ctx.ab_partial(n, 1, n) - a.mass(n - 1)));
                let basis: [&[T]; 1] = [&beta];
                let (x, _) = close(&ctx, &basis, &gamma, boundary)?;
                let m = max_log2(&beta).max(max_log2(&gamma));
                (combine(&ctx, &basis, &x, &gamma), m)
            }
        }
        Branch::SecondSeasonShifted => {
            let c0sq = c0.clone() * c0.clone();
            let mut alpha = vec![
                one.clone(),
                -(one.clone() / c0.clone()),
                c1.clone() / c0sq.clone() + one.clone() / (a0.clone() * b1.clone() * c0.clone()),
            ];
            let mut gamma = vec![zero.clone(), one.clone() / c0.clone(), -(c1.clone() / c0sq)];
            extend(&ctx, &mut alpha, 3, top, 1, |n| -ctx.ab_partial(n, 0, n - 1));
            extend(&ctx, &mut gamma, 3, top, 1, |n| ctx.ab_partial(n, 0, n - 1));
            let basis: [&[T]; 1] = [&alpha];
            let (x, _) = close(&ctx, &basis, &gamma, boundary)?;
            free_parameters = 1;
            let m = max_log2(&alpha).max(max_log2(&gamma));
            (combine(&ctx, &basis, &x, &gamma), m)
        }
        Branch::ThirdSeasonShifted => {
            let b0c1 = b0.clone() * c1.clone();
            let mut alpha = vec![one.clone(), -(one.clone() / b0c1.clone())];
            let mut gamma = vec![zero.clone(), one.clone() / b0c1];
            let h = |n: usize| if printed { ctx.ab_partial(n, 0, n - 1) } else { a.mass(n - 1) };
            extend(&ctx, &mut alpha, 2, top, 1, |n| -h(n));
            extend(&ctx, &mut gamma, 2, top, 1, h);
            let basis: [&[T]; 1] = [&alpha];
            let (x, _) = close(&ctx, &basis, &gamma, boundary)?;
            free_parameters = 1;
            let m = max_log2(&alpha).max(max_log2(&gamma));
            (combine(&ctx, &basis, &x, &gamma), m)
        }
        Branch::FirstTwoShifted | Branch::SecondSeasonDoubleShifted => {
            let phi1 = d.clone() / c0.clone();
            let mut phi = vec![zero.clone(), phi1.clone()];
            step_two(&ctx, &mut phi, 1, top, true, |u| c0.clone() * phi1.clone() * ctx.ab.mass(u + 2));
            let m = max_log2(&phi);
            (phi, m)
        }
        Branch::FirstAndThirdShifted => {
            let b0c1 = b0.clone() * c1.clone();
            let (phi0, phi1) = if printed {
                let phi1 = d.clone() / (ctx.s(2) + b0c1.clone());
                (ctx.s(2) * phi1.clone(), phi1)
            } else {
                (zero.clone(), d.clone() / b0c1.clone())
            };
            let mut phi = vec![phi0, phi1.clone()];
            step_two(&ctx, &mut phi, 1, top, true, |u| a.mass(u + 1) * b0c1.clone() * phi1.clone());
            let m = max_log2(&phi);
            (phi, m)
        }
        Branch::LastTwoShifted | Branch::ThirdSeasonDoubleShifted => {
            let mut phi = vec![d.clone(), d.clone() / ctx.s(2)];
            step_two(&ctx, &mut phi, 1, top, !printed, |_| zero.clone());
            let m = max_log2(&phi);
            (phi, m)
        }
        Branch::FirstSeasonDoubleShifted => {
            let mut phi;
            if printed {
                let phi1 = d.clone() / (one.clone() / a.mass(2) + c0.clone());
                phi = vec![zero.clone(), phi1.clone()];
                step_two(&ctx, &mut phi, 1, top, true, |u| c0.clone() * phi1.clone() * ctx.ab.mass(u + 2));
            } else {
                let b0c0 = b0.clone() * c0.clone();
                let phi2 = d.clone() / b0c0.clone();
                phi = vec![zero.clone(), zero.clone(), phi2.clone()];
                step_two(&ctx, &mut phi, 2, top, true, |u| a.mass(u + 1) * b0c0.clone() * phi2.clone());
            }
            let m = max_log2(&phi);
            (phi, m)
        }
    };
    Ok(RawRun { phi, max_log2: max_coef, rel_det_log2, free_parameters, branch: Some(branch), leading_atom: lead })
}
