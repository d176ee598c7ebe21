use crate::error::domain;
use crate::kernels::{RateMatrix, StochasticKernel};
use crate::linalg::{LayeredSystem, SparseMatrix};
use crate::value::Value;
use crate::Result;

/// Probability of reaching state `a` before state `b` from `i`, for a
/// nearest-neighbour chain on `0..=N` with generator rows `generator`
/// (`P − I` or a Q-matrix).
pub fn hit_before<T: Value>(generator: &SparseMatrix<T>, i: usize, a: usize, b: usize) -> Result<T> {
    if !(a <= i && i <= b && b < generator.len()) {
        return Err(domain(format!("need a <= i <= b < {}, got a={a}, i={i}, b={b}", generator.len())));
    }
    if i == a {
        return Ok(T::one());
    }
    if i == b {
        return Ok(T::zero());
    }
    let size = b - a + 1;
    let mut system = LayeredSystem::new(&(0..size).collect::<Vec<_>>())?;
    let mut rhs = vec![T::zero(); size];
    system.add(0, 0, T::one());
    rhs[0] = T::one();
    system.add(size - 1, size - 1, T::one());
    for x in a + 1..b {
        for (y, v) in generator.row(x) {
            if *y < a || *y > b {
                return Err(domain(format!("state {x} jumps past the interval to {y}")));
            }
            system.add(x - a, y - a, v.clone());
        }
    }
    let h = system.solve(&rhs)?;
    Ok(h[i - a].clone())
}

pub fn discrete_hit_prob<T: Value>(chain: &StochasticKernel<T>, i: usize, a: usize, b: usize) -> Result<T> {
    hit_before(&chain.generator(), i, a, b)
}

pub fn rate_hit_prob<T: Value>(rates: &RateMatrix<T>, i: usize, a: usize, b: usize) -> Result<T> {
    hit_before(rates.matrix(), i, a, b)
}

/// `(1/(2i+1) − 1/(2b+1)) / (1/(2a+1) − 1/(2b+1))`.
pub fn harmonic_hit_prob<T: Value>(i: usize, a: usize, b: usize) -> T {
    let inv = |x: usize| T::ratio(1, 2 * x as i64 + 1);
    (inv(i) - inv(b)) / (inv(a) - inv(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WedgeSpec;
    use crate::kernels::projected_wedge_chain;
    use crate::Angle;
    use num::rational::BigRational as Q;

    #[test]
    fn matches_the_harmonic_formula_exactly() {
        let chain: StochasticKernel<Q> = projected_wedge_chain(&WedgeSpec::new(Angle::PiOver6, 40), 40).unwrap();
        for (i, a, b) in [(5, 1, 30), (2, 1, 3), (20, 10, 40)] {
            assert_eq!(discrete_hit_prob(&chain, i, a, b).unwrap(), harmonic_hit_prob::<Q>(i, a, b));
        }
        assert_eq!(discrete_hit_prob(&chain, 4, 4, 9).unwrap(), Q::from_integer(1.into()));
        assert!(discrete_hit_prob(&chain, 3, 4, 9).is_err());
    }

    #[test]
    fn far_barrier_limit() {
        let chain: StochasticKernel<f64> =
            projected_wedge_chain(&WedgeSpec::new(Angle::PiOver4, 10_000), 10_000).unwrap();
        let p = discrete_hit_prob(&chain, 2, 1, 10_000).unwrap();
        assert!((p - harmonic_hit_prob::<f64>(2, 1, 10_000)).abs() < 1e-10);
        assert!((p - 0.6).abs() < 1e-3);
    }
}
