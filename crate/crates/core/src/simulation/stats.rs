use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::engine::{LastSide, PathRecord};
use crate::error::domain;
use crate::geometry::{layer_range, Site};
use crate::Result;

/// Counts over labelled bins, with the run's seed and layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub seed: u64,
    pub workers: usize,
}

impl EmpiricalDistribution {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|c| *c as f64 / self.total as f64).collect()
    }
}

/// Exit law over the `2M + 1` sites of layer `M`, labelled by transverse
/// offset. Paths that stopped elsewhere are an error.
pub fn exit_distribution(records: &[PathRecord], layer: usize, seed: u64, workers: usize) -> Result<EmpiricalDistribution> {
    let range = layer_range(layer);
    let mut counts = vec![0u64; range.len()];
    for r in records {
        if !range.contains(&r.exit) {
            let s = Site::from_index(r.exit);
            return Err(domain(format!(
                "path exited at layer {} instead of {layer}",
                s.layer
            )));
        }
        counts[r.exit - range.start] += 1;
    }
    let m = layer as i32;
    Ok(EmpiricalDistribution {
        labels: (-m..=m).map(|y| y.to_string()).collect(),
        counts,
        total: records.len() as u64,
        seed,
        workers,
    })
}

/// Joint counts of `(exit site, side)` with the three side labels, for
/// comparing two runs cell by cell.
pub fn exit_side_counts(records: &[PathRecord], layer: usize, key: impl Fn(&PathRecord) -> usize) -> Vec<u64> {
    let width = 2 * layer + 1;
    let mut counts = vec![0u64; 3 * width];
    for r in records {
        let site = key(r);
        let y = Site::from_index(site).transverse + layer as i32;
        let s = match r.side {
            LastSide::Lower => 0,
            LastSide::Undefined => 1,
            LastSide::Upper => 2,
        };
        counts[s * width + y as usize] += 1;
    }
    counts
}

/// Exit fraction `s = (y/M + 1)/2` of a layer-`M` site.
pub fn exit_fraction(site: Site, layer: usize) -> f64 {
    (site.transverse as f64 / layer as f64 + 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveBin {
    pub s_lo: f64,
    pub s_hi: f64,
    pub n: u64,
    /// `None` for an empty bin.
    pub p_hat: Option<f64>,
    pub stderr: Option<f64>,
    /// `(s, paths, upper)` per exit site in the bin.
    #[serde(skip)]
    pub sites: Vec<(f64, u64, u64)>,
}

/// `P(last side = upper | exit fraction in bin)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCurve {
    pub layer: usize,
    pub bins: Vec<CurveBin>,
    /// Paths that never touched a side and are left out of the curve.
    pub undefined: u64,
    pub total: u64,
}

pub fn last_side_curve(records: &[PathRecord], layer: usize, bins: usize) -> Result<SideCurve> {
    if bins < 2 {
        return Err(domain("need at least two bins"));
    }
    let width = 2 * layer + 1;
    let start = layer_range(layer).start;
    let mut paths = vec![0u64; width];
    let mut upper = vec![0u64; width];
    let mut undefined = 0;
    for r in records {
        let Some(j) = r.exit.checked_sub(start).filter(|j| *j < width) else {
            return Err(domain("record did not exit on the curve's layer"));
        };
        match r.side {
            LastSide::Undefined => undefined += 1,
            side => {
                paths[j] += 1;
                if side == LastSide::Upper {
                    upper[j] += 1;
                }
            }
        }
    }
    let mut out: Vec<CurveBin> = (0..bins)
        .map(|b| CurveBin {
            s_lo: b as f64 / bins as f64,
            s_hi: (b + 1) as f64 / bins as f64,
            n: 0,
            p_hat: None,
            stderr: None,
            sites: Vec::new(),
        })
        .collect();
    for j in 0..width {
        let s = exit_fraction(Site::new(layer as u32, j as i32 - layer as i32), layer);
        let b = ((s * bins as f64) as usize).min(bins - 1);
        out[b].sites.push((s, paths[j], upper[j]));
    }
    for bin in &mut out {
        let n: u64 = bin.sites.iter().map(|x| x.1).sum();
        let u: u64 = bin.sites.iter().map(|x| x.2).sum();
        bin.n = n;
        if n > 0 {
            let p = u as f64 / n as f64;
            bin.p_hat = Some(p);
            bin.stderr = Some((p * (1.0 - p) / n as f64).sqrt());
        }
    }
    Ok(SideCurve {
        layer,
        bins: out,
        undefined,
        total: records.len() as u64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveScore {
    pub name: String,
    /// Bins whose estimate lies within `k` standard errors of the prediction.
    pub within: usize,
    pub scored: usize,
    pub k: f64,
    pub max_z: f64,
    pub z: Vec<Option<f64>>,
}

impl SideCurve {
    /// Scores a predicted curve. The prediction for a bin is the path-weighted
    /// mean of `f(s)` over its exit sites; the standard error is the binomial
    /// one at the predicted value.
    pub fn score(&self, name: &str, k: f64, f: impl Fn(f64) -> Result<f64>) -> Result<CurveScore> {
        let mut z = Vec::with_capacity(self.bins.len());
        let (mut within, mut scored, mut max_z) = (0, 0, 0.0f64);
        for bin in &self.bins {
            let Some(p_hat) = bin.p_hat else {
                z.push(None);
                continue;
            };
            let mut pred = 0.0;
            for (s, n, _) in &bin.sites {
                pred += *n as f64 * f(*s)?;
            }
            pred /= bin.n as f64;
            let se = (pred * (1.0 - pred) / bin.n as f64).sqrt().max(1e-300);
            let zi = (p_hat - pred) / se;
            scored += 1;
            if zi.abs() <= k {
                within += 1;
            }
            max_z = max_z.max(zi.abs());
            z.push(Some(zi));
        }
        Ok(CurveScore {
            name: name.into(),
            within,
            scored,
            k,
            max_z,
            z,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s_lo,s_hi,n,p_hat,stderr\n");
        for b in &self.bins {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", b.s_lo, b.s_hi, b.n, opt(b.p_hat), opt(b.stderr));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(layer: u32, y: i32, side: LastSide) -> PathRecord {
        PathRecord {
            start: 0,
            exit: Site::new(layer, y).index(),
            side,
            steps: 1,
        }
    }

    #[test]
    fn binning_by_exit_fraction() {
        let records = vec![
            rec(4, -4, LastSide::Lower),
            rec(4, 4, LastSide::Upper),
            rec(4, 3, LastSide::Upper),
            rec(4, 3, LastSide::Lower),
            rec(4, 0, LastSide::Undefined),
        ];
        let c = last_side_curve(&records, 4, 4).unwrap();
        assert_eq!(c.undefined, 1);
        assert_eq!(c.bins[0].p_hat, Some(0.0));
        assert_eq!(c.bins[3].n, 3);
        assert!((c.bins[3].p_hat.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.bins[1].p_hat, None);
        let d = exit_distribution(&records, 4, 1, 1).unwrap();
        assert_eq!(d.counts.iter().sum::<u64>(), 5);
        assert_eq!(d.counts[7], 2);
        assert!(exit_distribution(&records, 3, 1, 1).is_err());
    }

    #[test]
    fn scoring_uses_the_prediction() {
        let mut records = Vec::new();
        for i in 0..1000 {
            records.push(rec(2, 2, if i % 4 == 0 { LastSide::Lower } else { LastSide::Upper }));
        }
        let c = last_side_curve(&records, 2, 2).unwrap();
        let s = c.score("flat", 3.0, |_| Ok(0.75)).unwrap();
        assert_eq!((s.within, s.scored), (1, 1));
        let s = c.score("half", 3.0, |_| Ok(0.5)).unwrap();
        assert_eq!(s.within, 0);
        assert!(c.to_csv().lines().nth(1).unwrap().starts_with("0,0.5,0,,"));
    }
}
