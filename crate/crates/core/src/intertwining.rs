//! The uniform-fiber link between the 1-D chains and the 2-D walks, and the
//! residuals of the identities it satisfies.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{layer_range, site_count, Site};
use crate::kernels::{RateMatrix, StochasticKernel};
use crate::linalg::SparseMatrix;
use crate::value::Value;
use crate::{Error, Result};

/// Markov kernel from layer indices `0..=K` to sites: row `k` is uniform on
/// the `2k + 1` sites of layer `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovLink<T> {
    layers: usize,
    weights: Vec<T>,
}

impl<T: Value> MarkovLink<T> {
    /// Number of 1-D states.
    pub fn source_len(&self) -> usize {
        self.layers + 1
    }

    pub fn target_len(&self) -> usize {
        site_count(self.layers)
    }

    pub fn row(&self, k: usize) -> Vec<(usize, T)> {
        layer_range(k).map(|i| (i, self.weights[k].clone())).collect()
    }

    pub fn weight(&self, k: usize) -> &T {
        &self.weights[k]
    }

    /// `μΛ` for a measure `μ` on 1-D states.
    pub fn push(&self, mu: &BTreeMap<usize, T>) -> BTreeMap<usize, T> {
        let mut out = BTreeMap::new();
        for (k, m) in mu {
            if m.is_zero() {
                continue;
            }
            for (i, w) in self.row(*k) {
                out.insert(i, m.clone() * w);
            }
        }
        out
    }
}

/// Uniform fiber link over layers `0..=layers`; serves both the wedge
/// lattice and the vase grid, which share the site layout.
pub fn build_link<T: Value>(layers: usize) -> MarkovLink<T> {
    MarkovLink {
        layers,
        weights: (0..=layers).map(|k| T::ratio(1, 2 * k as i64 + 1)).collect(),
    }
}

/// Whether the operators are transition kernels or Q-matrices. The
/// residual is the same expression in both cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Stochastic,
    Rates,
}

fn check_shapes<T: Value>(link: &MarkovLink<T>, two: &SparseMatrix<T>, one: &SparseMatrix<T>) -> Result<()> {
    if two.len() != link.target_len() {
        return Err(Error::Shape {
            what: "two-dimensional operator",
            expected: link.target_len(),
            found: two.len(),
        });
    }
    if one.len() != link.source_len() {
        return Err(Error::Shape {
            what: "one-dimensional operator",
            expected: link.source_len(),
            found: one.len(),
        });
    }
    Ok(())
}

fn diff_max<T: Value>(a: &BTreeMap<usize, T>, b: &BTreeMap<usize, T>) -> T {
    let mut worst = T::zero();
    for (i, x) in a {
        let d = (x.clone() - b.get(i).cloned().unwrap_or_else(T::zero)).abs();
        if d > worst {
            worst = d;
        }
    }
    for (i, y) in b {
        if !a.contains_key(i) {
            let d = y.abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn pick_max<T: Value>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// `max |Λ A^n − B^n Λ|` over all entries, with `A` on sites and `B` on
/// layers. Exact in rational arithmetic.
pub fn power_residual<T: Value>(
    link: &MarkovLink<T>,
    two: &SparseMatrix<T>,
    one: &SparseMatrix<T>,
    power: u32,
) -> Result<T> {
    check_shapes(link, two, one)?;
    let residual = (0..link.source_len())
        .into_par_iter()
        .map(|k| {
            let mut lhs: BTreeMap<usize, T> = link.row(k).into_iter().collect();
            let mut rhs: BTreeMap<usize, T> = BTreeMap::from([(k, T::one())]);
            for _ in 0..power {
                lhs = two.left_mul(&lhs);
                rhs = one.left_mul(&rhs);
            }
            diff_max(&lhs, &link.push(&rhs))
        })
        .reduce(T::zero, pick_max);
    Ok(residual)
}

/// One-step residual of `ΛP = QΛ` (kernels) or `ΛQ = Q̃Λ` (rates).
pub fn intertwining_residual<T: Value>(
    link: &MarkovLink<T>,
    two: &SparseMatrix<T>,
    one: &SparseMatrix<T>,
) -> Result<T> {
    power_residual(link, two, one, 1)
}

pub fn kernel_residual<T: Value>(
    link: &MarkovLink<T>,
    two: &StochasticKernel<T>,
    one: &StochasticKernel<T>,
) -> Result<T> {
    intertwining_residual(link, two.matrix(), one.matrix())
}

pub fn rate_residual<T: Value>(link: &MarkovLink<T>, two: &RateMatrix<T>, one: &RateMatrix<T>) -> Result<T> {
    intertwining_residual(link, two.matrix(), one.matrix())
}

const POISSON_TAIL: f64 = 1e-14;

/// Row vector `μ e^{tQ}` by uniformization with rate `lambda`.
fn uniformized_apply(q: &SparseMatrix<f64>, mu: &[f64], t: f64, lambda: f64) -> Vec<f64> {
    let n = mu.len();
    let mut term = mu.to_vec();
    let mut out = vec![0.0; n];
    let lt = lambda * t;
    // Poisson weights in log space so large λt does not underflow the first term
    let mut log_w = -lt;
    let mut cumulative = 0.0;
    let mut m = 0u64;
    loop {
        let w = log_w.exp();
        for (o, x) in out.iter_mut().zip(&term) {
            *o += w * x;
        }
        cumulative += w;
        if 1.0 - cumulative < POISSON_TAIL && (m as f64) > lt {
            break;
        }
        // term ← term (I + Q/λ)
        let mut next = term.clone();
        for (i, ti) in term.iter().enumerate() {
            if *ti == 0.0 {
                continue;
            }
            for (j, v) in q.row(i) {
                next[*j] += ti * v / lambda;
            }
        }
        term = next;
        m += 1;
        log_w += lt.ln() - (m as f64).ln();
        if m > 100_000 {
            break;
        }
    }
    out
}

/// `max |Λ e^{tQ} − e^{tQ̃} Λ|`, both sides uniformized with the same rate.
pub fn semigroup_residual(
    link: &MarkovLink<f64>,
    two: &RateMatrix<f64>,
    one: &RateMatrix<f64>,
    t: f64,
) -> Result<f64> {
    check_shapes(link, two.matrix(), one.matrix())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time {t} must be nonnegative")));
    }
    let lambda = (0..two.len())
        .map(|i| two.exit_rate(i))
        .chain((0..one.len()).map(|i| one.exit_rate(i)))
        .fold(0.0, f64::max)
        .max(1e-300);
    let residual = (0..link.source_len())
        .into_par_iter()
        .map(|k| {
            let mut start = vec![0.0; link.target_len()];
            for (i, w) in link.row(k) {
                start[i] = w;
            }
            let lhs = uniformized_apply(two.matrix(), &start, t, lambda);
            let mut e = vec![0.0; link.source_len()];
            e[k] = 1.0;
            let proj = uniformized_apply(one.matrix(), &e, t, lambda);
            let mut worst: f64 = 0.0;
            for (layer, m) in proj.iter().enumerate() {
                let w = link.weight(layer);
                for i in layer_range(layer) {
                    worst = worst.max((lhs[i] - m * w).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(residual)
}

/// Draws a site from `Λ(k, ·)`.
pub fn filter_sample<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Site {
    let k = k as i32;
    Site::new(k as u32, rng.random_range(-k..=k))
}

/// `Σ_j q(i, j)/(2j + 1) − 1/(2i + 1)` at state `i`.
pub fn harmonic_defect<T: Value>(chain: &StochasticKernel<T>, i: usize) -> T {
    let lhs = chain
        .matrix()
        .row(i)
        .iter()
        .fold(T::zero(), |acc, (j, p)| acc + p.clone() * T::ratio(1, 2 * *j as i64 + 1));
    lhs - T::ratio(1, 2 * i as i64 + 1)
}

/// Largest `|harmonic_defect|` over the non-apex, non-absorbing states.
pub fn harmonic_residual<T: Value>(chain: &StochasticKernel<T>) -> T {
    (1..chain.len())
        .filter(|&i| !chain.is_absorbing(i))
        .map(|i| harmonic_defect(chain, i).abs())
        .fold(T::zero(), pick_max)
}

/// One identity check, as written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub mode: String,
    pub size: usize,
    pub residual: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// Exact residuals pass only when zero; float residuals against `tol`.
    pub fn new<T: Value>(identity: impl Into<String>, size: usize, residual: &T, tol: f64) -> Self {
        let pass = if T::EXACT {
            residual.is_zero()
        } else {
            residual.to_f64() <= tol
        };
        ResidualReport {
            identity: identity.into(),
            mode: if T::EXACT { "rational" } else { "float" }.into(),
            size,
            residual: residual.to_f64(),
            pass,
        }
    }
}
