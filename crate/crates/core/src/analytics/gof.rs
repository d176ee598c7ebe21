//! Goodness-of-fit statistics.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::domain;
use crate::Result;

/// Bins are merged with their neighbours until every expected count reaches
/// this value.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins actually used after merging.
    pub bins: usize,
    /// Number of original bins folded into a neighbour.
    pub merged: usize,
}

impl ChiSquare {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Upper tail `P(χ²_dof > x)`.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

/// Groups consecutive bins so each group's weight reaches `min`; a short
/// final group is folded into the previous one.
fn merge_groups(weights: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        current.push(i);
        acc += w;
        if acc >= min {
            groups.push(std::mem::take(&mut current));
            acc = 0.0;
        }
    }
    if !current.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(current),
            None => groups.push(current),
        }
    }
    groups
}

/// Pearson test of `observed` counts against cell probabilities `probs`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(domain("observed and expected bins differ in number"));
    }
    let total: u64 = observed.iter().sum();
    let mass: f64 = probs.iter().sum();
    if total == 0 || !(mass > 0.0) {
        return Err(domain("chi-square test needs positive totals"));
    }
    let expected: Vec<f64> = probs.iter().map(|p| p / mass * total as f64).collect();
    let groups = merge_groups(&expected, MIN_EXPECTED);
    if groups.len() < 2 {
        return Err(domain("too few counts for a chi-square test"));
    }
    let statistic = groups
        .iter()
        .map(|g| {
            let o: f64 = g.iter().map(|&i| observed[i] as f64).sum();
            let e: f64 = g.iter().map(|&i| expected[i]).sum();
            (o - e).powi(2) / e
        })
        .sum();
    let dof = groups.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        bins: groups.len(),
        merged: observed.len() - groups.len(),
    })
}

pub fn chi_square_uniform(observed: &[u64]) -> Result<ChiSquare> {
    chi_square_gof(observed, &vec![1.0; observed.len()])
}

/// Two-sample homogeneity test on a shared binning.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() || a.is_empty() {
        return Err(domain("samples are binned differently"));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(domain("homogeneity test needs two non-empty samples"));
    }
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64).collect();
    // the smaller expected cell of each column must reach the minimum
    let weights: Vec<f64> = pooled.iter().map(|c| c * na.min(nb) / n).collect();
    let groups = merge_groups(&weights, MIN_EXPECTED);
    if groups.len() < 2 {
        return Err(domain("too few counts for a homogeneity test"));
    }
    let mut statistic = 0.0;
    for g in &groups {
        let oa: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let ob: f64 = g.iter().map(|&i| b[i] as f64).sum();
        let col = oa + ob;
        let (ea, eb) = (col * na / n, col * nb / n);
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = groups.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        bins: groups.len(),
        merged: a.len() - groups.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovSmirnov {
    pub n: usize,
    pub distance: f64,
    pub p_value: f64,
    /// Critical distance at the 0.1% level.
    pub critical_0_001: f64,
}

impl KolmogorovSmirnov {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Kolmogorov tail `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn stephens(n: usize) -> f64 {
    let rn = (n as f64).sqrt();
    rn + 0.12 + 0.11 / rn
}

/// Critical KS distance at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / stephens(n)
}

/// One-sample KS test against a continuous `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KolmogorovSmirnov> {
    if samples.is_empty() {
        return Err(domain("KS test needs samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(KolmogorovSmirnov {
        n,
        distance: d,
        p_value: kolmogorov_sf(stephens(n) * d),
        critical_0_001: ks_critical(n, 1e-3),
    })
}

pub fn ks_uniform(samples: &[f64]) -> Result<KolmogorovSmirnov> {
    ks_test(samples, |x| x.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn exact_counts_pass_perfectly() {
        let r = chi_square_uniform(&[100; 10]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 9);
    }

    #[test]
    fn sparse_bins_are_merged() {
        let r = chi_square_gof(&[1, 2, 1, 50, 46], &[0.01, 0.02, 0.01, 0.5, 0.46]).unwrap();
        assert_eq!(r.bins, 2);
        assert_eq!(r.merged, 3);
    }

    #[test]
    fn chi_square_tail() {
        // P(χ²_2 > x) = e^{−x/2}
        assert!((chi_square_sf(3.0, 2) - (-1.5f64).exp()).abs() < 1e-14);
        // 0.1% critical value for one degree of freedom
        assert!((chi_square_sf(10.827_566_170_662_733, 1) - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn ks_grid_distance() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_uniform(&xs).unwrap();
        assert!(r.distance <= 0.5 / n as f64 + 1e-15);
        // asymptotic 0.1% point is 1.9495/√n
        assert!((ks_critical(1_000_000, 1e-3) * 1000.0 - 1.9495).abs() < 1e-3);
    }

    #[test]
    fn calibrated_p_values() {
        let mut ps = Vec::new();
        for seed in 0..20 {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            let mut counts = [0u64; 10];
            for _ in 0..100_000 {
                counts[rng.random_range(0..10)] += 1;
            }
            ps.push(chi_square_uniform(&counts).unwrap().p_value);
        }
        ps.sort_by(f64::total_cmp);
        let median = 0.5 * (ps[9] + ps[10]);
        assert!(median > 0.2 && median < 0.8, "median {median}");
    }

    #[test]
    fn homogeneity_detects_shift() {
        let a = [500, 500, 500, 500];
        let same = chi_square_homogeneity(&a, &[250, 250, 250, 250]).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        let shifted = chi_square_homogeneity(&a, &[400, 250, 200, 150]).unwrap();
        assert!(!shifted.passes(1e-3));
    }
}
