//! Probability mass functions on the non-negative integers.
//!
//! A [`Pmf`] stores the masses at `0..=max_support` plus a `tail_deficit`,
//! the probability that was cut away when an infinite-support family was
//! truncated. For user-supplied finite vectors the deficit is zero.

use crate::error::{Result, RuinError};
use crate::scalar::Scalar;

/// Truncation threshold used for Poisson and geometric seasons.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    masses: Vec<T>,
    tail_deficit: T,
    /// Upper bound on the mean lost to truncation, `sum_{k > K} k p_k`.
    tail_mean: f64,
}

impl<T: Scalar> Pmf<T> {
    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        let first = weights.first().ok_or(RuinError::EmptyWeights)?;
        let zero = first.zero_like();
        let mut total = zero.clone();
        for (index, w) in weights.iter().enumerate() {
            // `!(w >= 0)` also rejects NaN.
            if !(*w >= zero) {
                return Err(RuinError::NegativeWeight { index });
            }
            total = total + w.clone();
        }
        if total.is_zero() {
            return Err(RuinError::ZeroTotal);
        }
        let masses = weights.into_iter().map(|w| w / total.clone()).collect();
        Ok(Pmf { masses, tail_deficit: zero, tail_mean: 0.0 })
    }

    /// Degenerate distribution at `k`.
    pub fn point_mass(k: usize, one: T) -> Self {
        let zero = one.zero_like();
        let mut masses = vec![zero.clone(); k + 1];
        masses[k] = one;
        Pmf { masses, tail_deficit: zero, tail_mean: 0.0 }
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Mass at `k`, zero outside the stored support.
    pub fn mass(&self, k: usize) -> T {
        self.masses.get(k).cloned().unwrap_or_else(|| self.tail_deficit.zero_like())
    }

    /// Mass at a possibly negative index.
    pub fn mass_at(&self, k: isize) -> T {
        if k < 0 {
            self.tail_deficit.zero_like()
        } else {
            self.mass(k as usize)
        }
    }

    pub fn max_support(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn tail_deficit(&self) -> &T {
        &self.tail_deficit
    }

    pub fn is_truncated(&self) -> bool {
        !self.tail_deficit.is_zero()
    }

    pub fn tail_mean_bound(&self) -> f64 {
        self.tail_mean
    }

    pub fn zero(&self) -> T {
        self.tail_deficit.zero_like()
    }

    pub fn one(&self) -> T {
        self.tail_deficit.one_like()
    }

    /// `sum_k k p_k` over the stored masses.
    pub fn mean(&self) -> T {
        self.masses
            .iter()
            .enumerate()
            .skip(1)
            .fold(self.zero(), |acc, (k, p)| acc + p.from_usize_like(k) * p.clone())
    }

    /// `P(X <= x)`; `cdf(-1) = 0`.
    pub fn cdf(&self, x: isize) -> T {
        if x < 0 {
            return self.zero();
        }
        let upto = (x as usize).min(self.max_support());
        self.masses[..=upto].iter().fold(self.zero(), |acc, p| acc + p.clone())
    }

    /// `P(X > x)`, including the truncated tail.
    pub fn tail(&self, x: isize) -> T {
        let from = if x < 0 { 0 } else { x as usize + 1 };
        let rest = self.masses.iter().skip(from).fold(self.zero(), |acc, p| acc + p.clone());
        rest + self.tail_deficit.clone()
    }

    /// `tail(x)` for every `x` in `0..=upto`, computed from suffix sums.
    pub fn tails(&self, upto: usize) -> Vec<T> {
        let mut suffix = vec![self.tail_deficit.clone(); self.masses.len() + 1];
        for k in (0..self.masses.len()).rev() {
            suffix[k] = suffix[k + 1].clone() + self.masses[k].clone();
        }
        (0..=upto).map(|x| suffix.get(x + 1).cloned().unwrap_or_else(|| self.tail_deficit.clone())).collect()
    }

    /// Exact point-mass location, if the distribution is degenerate.
    pub fn point_mass_location(&self) -> Option<usize> {
        if self.is_truncated() {
            return None;
        }
        let mut nonzero = self.masses.iter().enumerate().filter(|(_, p)| !p.is_zero());
        let (k, p) = nonzero.next()?;
        (nonzero.next().is_none() && *p == self.one()).then_some(k)
    }

    /// Moves the truncated tail into an extra atom at `max_support + 1`,
    /// giving a proper distribution with the same low atoms.
    pub fn closed(&self) -> Pmf<T> {
        if !self.is_truncated() {
            return self.clone();
        }
        let mut masses = self.masses.clone();
        masses.push(self.tail_deficit.clone());
        Pmf { masses, tail_deficit: self.zero(), tail_mean: 0.0 }
    }

    /// Converts the stored values into another backend.
    pub fn map_into<U: Scalar>(&self, convert: impl Fn(&T) -> U) -> Pmf<U> {
        Pmf {
            masses: self.masses.iter().map(&convert).collect(),
            tail_deficit: convert(&self.tail_deficit),
            tail_mean: self.tail_mean,
        }
    }

    pub fn to_f64(&self) -> Pmf<f64> {
        self.map_into(Scalar::to_f64)
    }
}

/// Distribution of the sum of two independent variables.
pub fn convolve<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>) -> Pmf<T> {
    let zero = p.zero();
    let mut masses = vec![zero; p.masses.len() + q.masses.len() - 1];
    for (i, a) in p.masses.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.masses.iter().enumerate() {
            masses[i + j] = masses[i + j].clone() + a.clone() * b.clone();
        }
    }
    let (dp, dq) = (p.tail_deficit.clone(), q.tail_deficit.clone());
    let tail_deficit = dp.clone() + dq.clone() - dp * dq;
    // E[(X+Y) 1{truncated}] <= tail means plus the other mean times the deficit.
    let tail_mean = p.tail_mean
        + q.tail_mean
        + p.tail_deficit.to_f64() * q.mean().to_f64()
        + q.tail_deficit.to_f64() * p.mean().to_f64();
    Pmf { masses, tail_deficit, tail_mean }
}

/// Convolution truncated to indices `0..=upto` (zero-padded).
pub fn convolve_upto<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>, upto: usize) -> Vec<T> {
    let zero = p.zero();
    let mut out = vec![zero.clone(); upto + 1];
    for (i, a) in p.masses.iter().enumerate().take(upto + 1) {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.masses.iter().enumerate().take(upto + 1 - i) {
            out[i + j] = out[i + j].clone() + a.clone() * b.clone();
        }
    }
    out
}

/// Poisson(`lambda`) truncated at the first `K` whose residual tail is at most `tail_eps`.
pub fn poisson(lambda: f64, tail_eps: f64) -> Result<Pmf<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(RuinError::InvalidParameter(format!("Poisson rate must be positive, got {lambda}")));
    }
    check_eps(tail_eps)?;
    // Generate terms well past the truncation point, then sum tails from the top.
    let mut terms = vec![(-lambda).exp()];
    let mut k = 0usize;
    loop {
        k += 1;
        let next = terms[k - 1] * lambda / k as f64;
        terms.push(next);
        if (k as f64) > lambda && (next < tail_eps * 1e-6 || next < f64::MIN_POSITIVE) {
            break;
        }
    }
    let mut suffix = vec![0.0; terms.len() + 1];
    let mut suffix_mean = vec![0.0; terms.len() + 1];
    for j in (0..terms.len()).rev() {
        suffix[j] = suffix[j + 1] + terms[j];
        suffix_mean[j] = suffix_mean[j + 1] + j as f64 * terms[j];
    }
    let cut = (0..terms.len()).find(|&k| suffix[k + 1] <= tail_eps).expect("tail eventually drops below eps");
    terms.truncate(cut + 1);
    Ok(Pmf { masses: terms, tail_deficit: suffix[cut + 1], tail_mean: suffix_mean[cut + 1] })
}

/// Geometric law `P(X = k) = p (1-p)^k`, truncated like [`poisson`].
pub fn geometric(p: f64, tail_eps: f64) -> Result<Pmf<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RuinError::InvalidParameter(format!("geometric parameter must lie in (0, 1), got {p}")));
    }
    check_eps(tail_eps)?;
    let q = 1.0 - p;
    let mut cut = 0usize;
    while q.powi(cut as i32 + 1) > tail_eps {
        cut += 1;
    }
    let masses = (0..=cut).map(|k| p * q.powi(k as i32)).collect();
    let deficit = q.powi(cut as i32 + 1);
    let tail_mean = deficit * ((cut + 1) as f64 + q / p);
    Ok(Pmf { masses, tail_deficit: deficit, tail_mean })
}

fn check_eps(tail_eps: f64) -> Result<()> {
    if tail_eps > 0.0 && tail_eps < 1.0 {
        Ok(())
    } else {
        Err(RuinError::InvalidParameter(format!("tail_eps must lie in (0, 1), got {tail_eps}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, Rational};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn first_z1() -> Pmf<f64> {
        Pmf::from_weights(vec![0.5, 0.25, 0.25]).unwrap()
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn weights_are_normalized() {
        assert_eq!(first_z1().masses(), &[0.5, 0.25, 0.25]);
        let p = Pmf::from_weights(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.masses(), &[0.5, 0.25, 0.25]);
        let p = Pmf::from_weights(vec![1.0]).unwrap();
        assert_eq!(p.point_mass_location(), Some(0));
        assert!(!p.is_truncated());
    }

    #[test]
    fn weight_errors() {
        assert_eq!(Pmf::<f64>::from_weights(vec![]), Err(RuinError::EmptyWeights));
        assert_eq!(Pmf::from_weights(vec![0.5, -0.1]), Err(RuinError::NegativeWeight { index: 1 }));
        assert_eq!(Pmf::from_weights(vec![0.0, 0.0]), Err(RuinError::ZeroTotal));
        assert_eq!(Pmf::from_weights(vec![f64::NAN]), Err(RuinError::NegativeWeight { index: 0 }));
    }

    #[test]
    fn poisson_examples() {
        let p = poisson(0.5, DEFAULT_TAIL_EPS).unwrap();
        assert_abs_diff_eq!(p.masses()[0], 0.606531, epsilon = 1e-6);
        assert_eq!(format!("{:.3}", 1.0 - p.masses()[0]), "0.393");
        let total: f64 = p.masses().iter().sum();
        assert!(total >= 1.0 - 1e-12);
        assert!(*p.tail_deficit() <= 1e-12 && *p.tail_deficit() > 0.0);

        let p = poisson(2.0 / 3.0, DEFAULT_TAIL_EPS).unwrap();
        let expected = (2.0 / 3.0) * (-2.0f64 / 3.0).exp();
        assert_abs_diff_eq!(p.masses()[1], expected, epsilon = 1e-15);

        // The cut point is minimal: one fewer atom would leave too much tail.
        let p = poisson(0.8, 1e-6).unwrap();
        let k = p.max_support();
        assert!(*p.tail_deficit() <= 1e-6);
        assert!(*p.tail_deficit() + p.masses()[k] > 1e-6);

        assert!(matches!(poisson(0.0, 1e-12), Err(RuinError::InvalidParameter(_))));
        assert!(matches!(poisson(1.0, 0.0), Err(RuinError::InvalidParameter(_))));
    }

    #[test]
    fn geometric_examples() {
        let g = geometric(0.75, DEFAULT_TAIL_EPS).unwrap();
        assert_eq!(g.masses()[0], 0.75);
        assert_eq!(g.masses()[1], 0.1875);
        assert_abs_diff_eq!(1.0 - g.masses()[0], 0.25);
        // Mean by direct summation against (1 - p) / p.
        let direct: f64 = g.masses().iter().enumerate().map(|(k, m)| k as f64 * m).sum();
        assert_abs_diff_eq!(direct, 1.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g.mean(), 1.0 / 3.0, epsilon = 1e-10);
        for p in [0.1, 0.5, 0.9] {
            assert_eq!(geometric(p, 1e-12).unwrap().masses()[0], p);
        }
        let k = g.max_support() as i32;
        assert!(0.25f64.powi(k + 1) <= 1e-12 && 0.25f64.powi(k) > 1e-12);
        assert!(geometric(1.0, 1e-12).is_err());
    }

    #[test]
    fn convolution_examples() {
        let a = first_z1();
        let b = Pmf::from_weights(vec![0.4, 0.3, 0.3]).unwrap();
        let c = Pmf::from_weights(vec![0.3, 0.35, 0.35]).unwrap();
        let s = convolve(&convolve(&a, &b), &c);
        assert_abs_diff_eq!(s.masses()[0], 0.5 * 0.4 * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean(), 2.7, epsilon = 1e-12);
        let delta = Pmf::point_mass(0, 1.0);
        assert_eq!(convolve(&a, &delta).masses(), a.masses());
    }

    #[test]
    fn exact_mode_cdf_tail() {
        let a = Pmf::from_weights(vec![q("0.5"), q("0.25"), q("0.25")]).unwrap();
        assert_eq!(a.tail(0), q("1/2"));
        assert_eq!(a.cdf(-1), q("0"));
        assert_eq!(a.cdf(a.max_support() as isize), q("1"));
        assert_eq!(a.tail(5), q("0"));
        assert_eq!(a.tails(3), vec![q("1/2"), q("1/4"), q("0"), q("0")]);
    }

    #[test]
    fn truncated_family_totals() {
        for pmf in [poisson(0.8, 1e-12).unwrap(), geometric(1.0 / 3.0, 1e-12).unwrap()] {
            let k = pmf.max_support() as isize;
            assert_abs_diff_eq!(pmf.cdf(k), 1.0 - pmf.tail_deficit(), epsilon = 1e-15);
            assert!(pmf.tail_mean_bound() < 1e-9);
            let closed = pmf.closed();
            assert!(!closed.is_truncated());
            assert_eq!(closed.max_support(), pmf.max_support() + 1);
        }
    }

    fn weights() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..20, 1..6).prop_filter("positive total", |w| w.iter().any(|&x| x > 0))
    }

    fn exact(w: &[u32]) -> Pmf<Rational> {
        Pmf::from_weights(w.iter().map(|&x| Rational::from_integer(x.into())).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn convolution_is_commutative_and_mass_preserving(wp in weights(), wq in weights()) {
            let (p, q) = (exact(&wp), exact(&wq));
            let pq = convolve(&p, &q);
            let qp = convolve(&q, &p);
            prop_assert_eq!(pq.masses(), qp.masses());
            let total = pq.masses().iter().fold(pq.zero(), |a, m| a + m.clone());
            prop_assert_eq!(total, pq.one());
            prop_assert_eq!(pq.mean(), p.mean() + q.mean());
        }

        #[test]
        fn float_mean_is_additive(wp in weights(), wq in weights()) {
            let p = Pmf::from_weights(wp.iter().map(|&x| x as f64).collect()).unwrap();
            let q = Pmf::from_weights(wq.iter().map(|&x| x as f64).collect()).unwrap();
            prop_assert!((convolve(&p, &q).mean() - p.mean() - q.mean()).abs() <= 1e-10);
        }

        #[test]
        fn cdf_and_tail_are_monotone_complements(w in weights()) {
            let p = exact(&w);
            let mut prev_cdf = p.zero();
            let mut prev_tail = p.one();
            for x in -1..(w.len() as isize + 2) {
                let (c, t) = (p.cdf(x), p.tail(x));
                prop_assert!(c >= prev_cdf && t <= prev_tail);
                prop_assert_eq!(c.clone() + t.clone(), p.one());
                prev_cdf = c;
                prev_tail = t;
            }
        }
    }
}
