//! Terminating generalized hypergeometric series pFq.

use serde::{Deserialize, Serialize};

use super::{is_nonpositive_integer, NeumaierSum};
use crate::error::{Error, Result};

/// Parameters and argument of pFq(a₁…a_p; b₁…b_q; x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricSpec {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub argument: f64,
}

impl HypergeometricSpec {
    pub fn new(upper: Vec<f64>, lower: Vec<f64>, argument: f64) -> Self {
        Self { upper, lower, argument }
    }

    /// Index n of the last non-zero term: the smallest |a_i| among upper
    /// parameters that are non-positive integers.
    pub fn terminating_index(&self) -> Result<usize> {
        self.upper
            .iter()
            .filter(|a| is_nonpositive_integer(**a))
            .map(|a| (-a) as usize)
            .min()
            .ok_or(Error::NonTerminating)
    }

    /// The first `count` terms of the series. Terms past the terminating index
    /// are exactly zero.
    pub fn terms(&self, count: usize) -> Result<Vec<f64>> {
        let n = self.terminating_index()?;
        let mut out = Vec::with_capacity(count);
        let mut term = 1.0;
        for k in 0..count {
            out.push(term);
            if k >= n {
                term = 0.0;
                continue;
            }
            let kf = k as f64;
            let mut ratio = self.argument / (kf + 1.0);
            for a in &self.upper {
                ratio *= a + kf;
            }
            for b in &self.lower {
                let d = b + kf;
                if d == 0.0 {
                    return Err(Error::VanishingDenominator { parameter: *b, term: k });
                }
                ratio /= d;
            }
            term *= ratio;
        }
        Ok(out)
    }

    /// Finite sum over k = 0..=n with compensated accumulation.
    pub fn evaluate(&self) -> Result<f64> {
        let n = self.terminating_index()?;
        let mut acc = NeumaierSum::default();
        for t in self.terms(n + 1)? {
            acc.add(t);
        }
        Ok(acc.sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_gauss() {
        let v = HypergeometricSpec::new(vec![-1.0, 1.0], vec![2.0], 1.0).evaluate().unwrap();
        assert!((v - 0.5).abs() < 1e-16);
    }

    #[test]
    fn single_term_when_n_is_zero() {
        let spec = HypergeometricSpec::new(vec![-0.0, 1.5, 5.0, 0.5, 1.0], vec![2.0, 3.0, 0.5, 1.5], 1.0);
        assert_eq!(spec.evaluate().unwrap(), 1.0);
    }

    #[test]
    fn five_f_four_hand_sum() {
        let upper = [-2.0, 1.5, 5.0, 0.5, 1.0];
        let lower = [2.0, 3.0, 0.5, 1.5];
        // Independent term-by-term sum built from explicit rising factorials.
        let rise = |z: f64, k: u32| (0..k).map(|i| z + f64::from(i)).product::<f64>();
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let expect: f64 = (0..=2u32)
            .map(|k| {
                let num: f64 = upper.iter().map(|a| rise(*a, k)).product();
                let den: f64 = lower.iter().map(|b| rise(*b, k)).product();
                num / den / fact(k)
            })
            .sum();
        let got = HypergeometricSpec::new(upper.to_vec(), lower.to_vec(), 1.0).evaluate().unwrap();
        assert!((got - expect).abs() < 1e-15 * expect.abs(), "{got} vs {expect}");
    }

    #[test]
    fn tie_break_takes_smallest_magnitude() {
        let spec = HypergeometricSpec::new(vec![-5.0, -2.0, 1.0], vec![3.0], 0.5);
        assert_eq!(spec.terminating_index().unwrap(), 2);
    }

    #[test]
    fn non_terminating_rejected() {
        let spec = HypergeometricSpec::new(vec![0.5, 1.0], vec![2.0], 0.5);
        assert_eq!(spec.evaluate(), Err(Error::NonTerminating));
    }

    #[test]
    fn vanishing_lower_parameter() {
        let spec = HypergeometricSpec::new(vec![-3.0, 1.0], vec![-1.0], 1.0);
        assert!(matches!(spec.evaluate(), Err(Error::VanishingDenominator { term: 1, .. })));
        // A lower non-positive integer reached only after termination is harmless.
        let ok = HypergeometricSpec::new(vec![-1.0, 1.0], vec![-3.0], 1.0);
        assert!(ok.evaluate().is_ok());
    }

    #[test]
    fn tail_terms_are_exact_zeros() {
        let spec = HypergeometricSpec::new(vec![-3.0, 2.5], vec![1.5], 0.7);
        let terms = spec.terms(10).unwrap();
        assert!(terms[4..].iter().all(|t| *t == 0.0));
        let full: f64 = terms.iter().sum();
        let trimmed: f64 = terms[..4].iter().sum();
        assert_eq!(full, trimmed);
    }
}
