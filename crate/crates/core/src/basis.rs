//! Monomial basis of the polynomial space of bounded degree.
//!
//! Multi-indices are enumerated degree first, then lexicographically with the
//! first coordinate most significant, so for two variables and degree 2 the
//! order is `1, t1, t2, t1^2, t1*t2, t2^2`. The weights attached to each
//! monomial make the explicit feature map reproduce the inhomogeneous
//! polynomial kernel as a plain scalar product.

use crate::error::{Error, Result};

/// Exponent tuple of one monomial, `t1^a1 * ... * tn^an`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Evaluates the bare monomial `x^alpha`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.exponents.len(), "point dimension mismatch");
        self.exponents
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

/// Binomial coefficient in checked 64-bit arithmetic.
fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 1..=k {
        // acc * (n - k + i) is divisible by i at every step
        let num = (acc as u128).checked_mul((n - k + i) as u128)?;
        let next = num / i as u128;
        acc = u64::try_from(next).ok()?;
    }
    Some(acc)
}

/// Multinomial coefficient `k! / (a1! ... an!)` for `k = |alpha|`.
///
/// Panics if `k` differs from the degree of `alpha`; overflow of 64-bit
/// arithmetic is reported as a configuration error.
pub fn multinomial(k: u32, alpha: &MultiIndex) -> Result<u64> {
    assert_eq!(k, alpha.degree(), "k must equal |alpha|");
    let mut acc: u64 = 1;
    let mut seen: u64 = 0;
    for &e in alpha.exponents() {
        seen += e as u64;
        let factor = binomial(seen, e as u64)
            .ok_or_else(|| Error::Config("multinomial coefficient overflows u64".into()))?;
        acc = acc
            .checked_mul(factor)
            .ok_or_else(|| Error::Config("multinomial coefficient overflows u64".into()))?;
    }
    Ok(acc)
}

/// Feature-map weight for one monomial:
/// `sqrt(theta^|alpha| * C(d,|alpha|) * multinomial(|alpha|; alpha))`.
///
/// Panics if `|alpha| > d`.
pub fn gamma(alpha: &MultiIndex, d: u32, theta: f64) -> Result<f64> {
    let k = alpha.degree();
    assert!(k <= d, "|alpha| must not exceed the kernel degree");
    let binom = binomial(d as u64, k as u64)
        .ok_or_else(|| Error::Config("binomial coefficient overflows u64".into()))?;
    let multi = multinomial(k, alpha)?;
    Ok((theta.powi(k as i32) * binom as f64 * multi as f64).sqrt())
}

/// All multi-indices with `|alpha| <= d` in `n` variables, degree-lexicographic.
pub fn enumerate_multi_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "need at least one variable");
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    for deg in 0..=d {
        fill_degree(&mut current, 0, deg, &mut out);
    }
    out
}

// Exponents of total degree `remaining` over positions `pos..`, first
// coordinate most significant and descending.
fn fill_degree(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_degree(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// Ordered monomial basis of the degree-`d` polynomial space together with
/// the feature-map weights of one kernel instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBasis {
    dim: usize,
    degree: u32,
    theta: f64,
    indices: Vec<MultiIndex>,
    gammas: Vec<f64>,
}

impl FeatureBasis {
    /// Builds the basis for `n` variables, maximum degree `d` and scale
    /// `theta`. Fails fast when the feature dimension `C(n+d,d)` would
    /// exceed `2^31` or a coefficient overflows 64-bit arithmetic.
    pub fn new(dim: usize, degree: u32, theta: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Config("ambient dimension must be >= 1".into()));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Config("theta must be positive and finite".into()));
        }
        let m = binomial(dim as u64 + degree as u64, degree as u64)
            .filter(|&m| m <= 1 << 31)
            .ok_or(Error::FeatureSpaceTooLarge { n: dim, d: degree })?;
        let indices = enumerate_multi_indices(dim, degree);
        debug_assert_eq!(indices.len() as u64, m);
        let gammas = indices
            .iter()
            .map(|alpha| gamma(alpha, degree, theta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            degree,
            theta,
            indices,
            gammas,
        })
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximum degree `d`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Feature dimension `m = C(n+d,d)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Position of an exponent tuple in basis order.
    pub fn find(&self, exponents: &[u32]) -> Option<usize> {
        self.indices.iter().position(|a| a.exponents() == exponents)
    }

    /// True when two bases describe the same kernel instance.
    pub fn compatible(&self, other: &Self) -> bool {
        self.dim == other.dim && self.degree == other.degree && self.theta == other.theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn enumerate_one_variable_degree_one() {
        let idx = enumerate_multi_indices(1, 1);
        assert_eq!(idx, vec![mi(&[0]), mi(&[1])]);
    }

    #[test]
    fn enumerate_two_variables_degree_two() {
        let idx = enumerate_multi_indices(2, 2);
        let expected: Vec<MultiIndex> = [
            [0, 0],
            [1, 0],
            [0, 1],
            [2, 0],
            [1, 1],
            [0, 2],
        ]
        .iter()
        .map(|e| mi(e))
        .collect();
        assert_eq!(idx, expected);
        assert_eq!(idx.len(), 6); // C(4,2)
    }

    #[test]
    fn enumeration_is_a_bijection() {
        for (n, d) in [(1usize, 5u32), (2, 3), (3, 3), (4, 2)] {
            let idx = enumerate_multi_indices(n, d);
            let m = binomial(n as u64 + d as u64, d as u64).unwrap();
            assert_eq!(idx.len() as u64, m);
            let mut seen = std::collections::HashSet::new();
            for a in &idx {
                assert!(a.degree() <= d);
                assert!(seen.insert(a.exponents().to_vec()), "duplicate {:?}", a);
            }
            // sorted by degree, then descending lexicographic within a degree
            for w in idx.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                assert!(
                    a.degree() < b.degree()
                        || (a.degree() == b.degree() && a.exponents() > b.exponents())
                );
            }
        }
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(0, &mi(&[0, 0])).unwrap(), 1);
        assert_eq!(multinomial(2, &mi(&[1, 1])).unwrap(), 2);
        assert_eq!(multinomial(3, &mi(&[2, 1])).unwrap(), 3);
        assert_eq!(multinomial(4, &mi(&[2, 2])).unwrap(), 6);
    }

    #[test]
    fn gamma_values() {
        // constant term is always 1
        for d in [1u32, 2, 5] {
            for theta in [0.25, 0.5, 1.0, 3.0] {
                assert_eq!(gamma(&mi(&[0, 0]), d, theta).unwrap(), 1.0);
            }
        }
        assert!((gamma(&mi(&[1, 1]), 2, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(gamma(&mi(&[2, 0]), 2, 0.25).unwrap(), 0.25);
    }

    #[test]
    fn gamma_squared_exact_for_dyadic_theta() {
        // theta = 1/4: gamma^2 * 4^|alpha| must equal C(d,k)*multinomial exactly
        let basis = FeatureBasis::new(3, 4, 0.25).unwrap();
        for (alpha, g) in basis.indices().iter().zip(basis.gammas()) {
            let k = alpha.degree();
            let exact = binomial(4, k as u64).unwrap() * multinomial(k, alpha).unwrap();
            assert_eq!(g * g * 4f64.powi(k as i32), exact as f64);
        }
    }

    #[test]
    fn basis_size_and_weights_positive() {
        let basis = FeatureBasis::new(2, 2, 1.0).unwrap();
        assert_eq!(basis.len(), 6);
        assert!(basis.gammas().iter().all(|&g| g > 0.0));
        assert_eq!(basis.gammas()[0], 1.0);
        assert_eq!(basis.find(&[1, 1]), Some(4));
    }

    #[test]
    fn oversized_basis_is_rejected() {
        match FeatureBasis::new(100, 20, 1.0) {
            Err(Error::FeatureSpaceTooLarge { n: 100, d: 20 }) => {}
            other => panic!("expected FeatureSpaceTooLarge, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn invalid_theta_is_rejected() {
        assert!(FeatureBasis::new(2, 2, 0.0).is_err());
        assert!(FeatureBasis::new(2, 2, f64::NAN).is_err());
    }

    proptest! {
        // multinomial theorem: sum over |alpha|=k of multi * x^alpha = (sum x)^k
        #[test]
        fn multinomial_theorem(xs in proptest::collection::vec(-1.5f64..1.5, 2..4), k in 0u32..5) {
            let n = xs.len();
            let total: f64 = enumerate_multi_indices(n, k)
                .into_iter()
                .filter(|a| a.degree() == k)
                .map(|a| multinomial(k, &a).unwrap() as f64 * a.monomial(&xs))
                .sum();
            let direct = xs.iter().sum::<f64>().powi(k as i32);
            let scale = xs.iter().map(|x| x.abs()).sum::<f64>().powi(k as i32).max(1.0);
            prop_assert!((total - direct).abs() <= 1e-12 * scale);
        }
    }
}
