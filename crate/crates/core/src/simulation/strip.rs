use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::engine::path_rng;
use crate::error::domain;
use crate::Result;

/// Triangle wave of period 2 folding `ℝ` onto `[0, 1]`.
pub fn seesaw(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r <= 1.0 {
        r
    } else {
        2.0 - r
    }
}

/// `n` draws of `seesaw(U + Y_t)` with `U` uniform on `[0, 1]` and `Y_t`
/// centred Gaussian of variance `t`.
pub fn strip_seesaw_samples(t: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("time {t} must be positive")));
    }
    let normal = Normal::new(0.0, t.sqrt()).map_err(|e| domain(e.to_string()))?;
    let mut rng = path_rng(seed, 0);
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            seesaw(u + normal.sample(&mut rng))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_values() {
        assert_eq!(seesaw(2.5), 0.5);
        assert_eq!(seesaw(3.5), 0.5);
        assert_eq!(seesaw(-0.25), 0.25);
        assert_eq!(seesaw(1.0), 1.0);
        assert_eq!(seesaw(4.0), 0.0);
    }

    #[test]
    fn samples_are_reproducible() {
        let a = strip_seesaw_samples(1.0, 100, 5).unwrap();
        assert_eq!(a, strip_seesaw_samples(1.0, 100, 5).unwrap());
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(strip_seesaw_samples(0.0, 10, 5).is_err());
    }
}
