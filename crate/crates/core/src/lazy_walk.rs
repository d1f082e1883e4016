//! The lazy random walk with steps `-1, 0, +1` of probability `1/4, 1/2, 1/4`
//! and its Donsker rescaling.
//!
//! After `l` steps the walk sits at `j` with probability
//! `p̃_l(j) = 2^{-2l} C(2l, l + j)`.

use num_rational::BigRational;

use crate::scalar::Mass;

/// Single-step law of the lazy walk.
pub fn increment_pmf<T: Mass>() -> [(i64, T); 3] {
    [(-1, T::ratio(1, 4)), (0, T::ratio(1, 2)), (1, T::ratio(1, 4))]
}

/// Exact law of the lazy walk after `steps` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyWalkPmf<T> {
    steps: u64,
    // mass[k] is the probability of site k - steps
    mass: Vec<T>,
}

impl<T: Mass> LazyWalkPmf<T> {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `p̃_l(j)`; zero outside `[-l, l]`.
    pub fn get(&self, j: i64) -> T {
        let l = self.steps as i64;
        if j.abs() > l {
            T::zero()
        } else {
            self.mass[(j + l) as usize].clone()
        }
    }

    /// `(j, p̃_l(j))` for `j = -l..=l`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> {
        let l = self.steps as i64;
        self.mass.iter().enumerate().map(move |(k, p)| (k as i64 - l, p))
    }

    pub fn total(&self) -> T {
        self.mass.iter().fold(T::zero(), |acc, p| acc + p.clone())
    }

    /// `Σ j² p̃_l(j)`.
    pub fn second_moment(&self) -> T {
        self.iter().fold(T::zero(), |acc, (j, p)| acc + T::ratio(j * j, 1) * p.clone())
    }
}

/// `p̃_l(·)` by multiplicative recurrence on normalised probabilities:
/// the centre `Π_{k ≤ l} (2k-1)/(2k)`, then `p̃(j+1) = p̃(j)·(l-j)/(l+j+1)`.
/// Nothing overflows; float tails underflow gracefully.
pub fn pmf<T: Mass>(l: u64) -> LazyWalkPmf<T> {
    let li = l as i64;
    let mut centre = T::one();
    for k in 1..=li {
        centre = centre * T::ratio(2 * k - 1, 2 * k);
    }
    let mut mass = vec![T::zero(); (2 * l + 1) as usize];
    mass[l as usize] = centre.clone();
    let mut p = centre;
    for j in 0..li {
        p = p * T::ratio(li - j, li + j + 1);
        mass[(li + j + 1) as usize] = p.clone();
        mass[(li - j - 1) as usize] = p.clone();
    }
    LazyWalkPmf { steps: l, mass }
}

/// `p̃_{l+1}(j) - p̃_l(j) - [¼p̃_l(j-1) + ¼p̃_l(j+1) - ½p̃_l(j)]`, exactly.
pub fn heat_step_residual(l: u64, j: i64) -> BigRational {
    let cur = pmf::<BigRational>(l);
    let next = pmf::<BigRational>(l + 1);
    let q = |n: i64| BigRational::new(1.into(), n.into());
    next.get(j) - cur.get(j) - (q(4) * cur.get(j - 1) + q(4) * cur.get(j + 1) - q(2) * cur.get(j))
}

/// `p̃_l(j) / p̃_{l+1}(j)` in lowest terms:
/// `2(l+1+j)(l+1-j) / ((l+1)(2l+1))`, which equals
/// `1 + ((l+1) - 2j²) / ((l+1)(2l+1))` and exceeds 1 exactly when `l ≥ 2j²`.
pub fn ratio_check(l: u64, j: i64) -> BigRational {
    let (l, j) = (l as i64, j.abs());
    assert!(j <= l, "ratio_check needs |j| <= l");
    BigRational::new(
        (2 * (l + 1 + j) * (l + 1 - j)).into(),
        ((l + 1) * (2 * l + 1)).into(),
    )
}

/// Float evaluation of the same closed form, for sweeps over large `l`.
pub fn ratio_check_f64(l: u64, j: i64) -> f64 {
    let (l, j) = (l as f64, j as f64);
    1.0 + ((l + 1.0) - 2.0 * j * j) / ((l + 1.0) * (2.0 * l + 1.0))
}

/// `⌊m(1 + t)⌋`, the number of lazy steps behind `B^m_t`.
pub fn donsker_steps(m: u32, t: f64) -> u64 {
    // guard against 1.9999999999 from decimal inputs like t = 0.7
    (m as f64 * (1.0 + t) + 1e-9).floor() as u64
}

/// Law of the Donsker walk `B^m_t`: `B^m_t = scale · J` with `J ~ p̃_{⌊m(1+t)⌋}`.
pub fn scaled_marginal(m: u32, t: f64) -> (f64, LazyWalkPmf<f64>) {
    ((2.0 / m as f64).sqrt(), pmf::<f64>(donsker_steps(m, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// l-fold convolution of the increment law.
    fn convolve(l: u64) -> Vec<BigRational> {
        let mut cur = vec![BigRational::one()];
        for _ in 0..l {
            let mut next = vec![BigRational::zero(); cur.len() + 2];
            for (k, p) in cur.iter().enumerate() {
                for (d, w) in increment_pmf::<BigRational>() {
                    next[(k as i64 + 1 + d) as usize] += p * &w;
                }
            }
            cur = next;
        }
        cur
    }

    /// C(n, k) by Pascal's triangle.
    fn binomial(n: u64, k: u64) -> BigInt {
        let mut row = vec![BigInt::one()];
        for _ in 0..n {
            let mut next = vec![BigInt::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row[k as usize].clone()
    }

    #[test]
    fn increment_moments() {
        let inc = increment_pmf::<BigRational>();
        let mean: BigRational = inc.iter().map(|(d, p)| q(*d, 1) * p).sum();
        let second: BigRational = inc.iter().map(|(d, p)| q(d * d, 1) * p).sum();
        assert!(mean.is_zero());
        assert_eq!(second, q(1, 2));
    }

    #[test]
    fn pmf_small_cases() {
        let p0 = pmf::<BigRational>(0);
        assert_eq!(p0.get(0), q(1, 1));
        assert!(p0.get(1).is_zero());
        let p1 = pmf::<BigRational>(1);
        assert_eq!((p1.get(-1), p1.get(0), p1.get(1)), (q(1, 4), q(1, 2), q(1, 4)));
        assert_eq!(pmf::<BigRational>(2).get(0), q(3, 8));
    }

    #[test]
    fn pmf_equals_convolution_and_binomial() {
        for l in 0..=12u64 {
            let conv = convolve(l);
            let p = pmf::<BigRational>(l);
            for (k, c) in conv.iter().enumerate() {
                let j = k as i64 - l as i64;
                assert_eq!(&p.get(j), c, "l = {l}, j = {j}");
                let closed = BigRational::new(binomial(2 * l, (l as i64 + j) as u64), BigInt::from(4).pow(l as u32));
                assert_eq!(p.get(j), closed);
            }
        }
    }

    #[test]
    fn exact_invariants_up_to_64() {
        for l in 0..=64u64 {
            let p = pmf::<BigRational>(l);
            assert_eq!(p.total(), BigRational::one(), "l = {l}");
            for j in 0..=l as i64 {
                assert_eq!(p.get(j), p.get(-j));
                assert!(heat_step_residual(l, j).is_zero());
                assert!(heat_step_residual(l, -j).is_zero());
            }
        }
    }

    #[test]
    fn heat_residual_examples() {
        assert!(heat_step_residual(1, 0).is_zero());
        assert!(heat_step_residual(0, 0).is_zero());
        assert!(heat_step_residual(5, 3).is_zero());
    }

    #[test]
    fn ratio_matches_direct_quotient() {
        for l in 0..=40u64 {
            let a = pmf::<BigRational>(l);
            let b = pmf::<BigRational>(l + 1);
            for j in -(l as i64)..=l as i64 {
                assert_eq!(ratio_check(l, j), a.get(j) / b.get(j), "l = {l}, j = {j}");
                let closed = 1.0 + ((l + 1) as f64 - 2.0 * (j * j) as f64) / ((l + 1) as f64 * (2 * l + 1) as f64);
                assert!((ratio_check_f64(l, j) - closed).abs() < 1e-15);
            }
        }
        // direct evaluation: p̃_2(1)/p̃_3(1) = (1/4)/(15/64) and p̃_2(0)/p̃_3(0) = (3/8)/(5/16)
        assert_eq!(ratio_check(2, 1), q(16, 15));
        assert_eq!(ratio_check(2, 0), q(6, 5));
        // growing mass when j² > (l + 1)/2
        assert!(ratio_check(4, 2) < q(1, 1));
    }

    #[test]
    fn float_pmf_tracks_exact() {
        for &l in &[0u64, 1, 7, 50, 133] {
            let exact = pmf::<BigRational>(l);
            let float = pmf::<f64>(l);
            for j in -(l as i64)..=l as i64 {
                let e = Mass::to_f64(&exact.get(j));
                assert!((float.get(j) - e).abs() <= 1e-15 * e.max(1e-300) * (l as f64 + 1.0));
            }
        }
        let big = pmf::<f64>(5000);
        assert!((big.total() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn scaled_marginal_variance() {
        let (scale, p) = scaled_marginal(4, 0.0);
        assert_eq!(p.steps(), 4);
        assert!((scale - 0.5f64.sqrt()).abs() < 1e-16);
        let (scale, p) = scaled_marginal(100, 1.0);
        assert_eq!(p.steps(), 200);
        let var = scale * scale * p.second_moment();
        assert!((var - 2.0).abs() < 1e-12);
        // exact: (2/m)·(l/2) = l/m
        let exact = pmf::<BigRational>(donsker_steps(37, 0.3)).second_moment() * q(2, 37);
        assert_eq!(exact, q(donsker_steps(37, 0.3) as i64, 37));
    }

    proptest! {
        #[test]
        fn float_pmf_is_normalised_and_symmetric(l in 0u64..3000) {
            let p = pmf::<f64>(l);
            prop_assert!((p.total() - 1.0).abs() < 1e-13);
            for j in 0..=(l as i64).min(50) {
                prop_assert_eq!(p.get(j), p.get(-j));
            }
        }
    }
}
