//! Green functions of absorbed chains and their time reversal.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::Site;
use crate::kernels::StochasticKernel;
use crate::linalg::{LayeredSystem, SparseMatrix, SparseRow};
use crate::value::Value;
use crate::{Error, Result};

/// Expected number of steps spent at each state before absorption, for a
/// chain started at `source`. Absorbing states carry zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenVector<T> {
    pub source: usize,
    pub absorbing_layer: usize,
    pub visits: Vec<T>,
}

impl<T: Value> GreenVector<T> {
    pub fn get(&self, i: usize) -> &T {
        &self.visits[i]
    }

    /// `layer,transverse,visits` rows. For a chain on layers the transverse
    /// column is zero.
    pub fn to_csv(&self, space: StateSpace) -> String {
        let mut out = String::from("layer,transverse,visits\n");
        for (i, v) in self.visits.iter().enumerate() {
            let (k, y) = match space {
                StateSpace::Sites => {
                    let s = Site::from_index(i);
                    (s.layer as usize, s.transverse)
                }
                StateSpace::Layers => (i, 0),
            };
            let _ = writeln!(out, "{k},{y},{:.17e}", v.to_f64());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpace {
    Sites,
    Layers,
}

fn is_absorbed<T: Value>(kernel: &StochasticKernel<T>, i: usize, layer: usize) -> bool {
    kernel.matrix().layer(i) >= layer || kernel.is_absorbing(i)
}

/// Solves `g (I − P_TT) = e_source` over the transient states `T` (layers
/// below `absorbing_layer` whose rows are not absorbing). Holding steps count
/// as visits.
pub fn green_vector<T: Value>(
    kernel: &StochasticKernel<T>,
    source: usize,
    absorbing_layer: usize,
) -> Result<GreenVector<T>> {
    let n = kernel.len();
    if source >= n {
        return Err(Error::Shape {
            what: "source state",
            expected: n,
            found: source,
        });
    }
    if is_absorbed(kernel, source, absorbing_layer) {
        return Ok(GreenVector {
            source,
            absorbing_layer,
            visits: vec![T::zero(); n],
        });
    }
    let m = kernel.matrix();
    let mut system = LayeredSystem::new(m.layers())?;
    for y in 0..n {
        system.add(y, y, T::one());
    }
    for x in 0..n {
        if is_absorbed(kernel, x, absorbing_layer) {
            continue;
        }
        for (y, p) in m.row(x) {
            if !is_absorbed(kernel, *y, absorbing_layer) {
                system.add(*y, x, -p.clone());
            }
        }
    }
    let mut rhs = vec![T::zero(); n];
    rhs[source] = T::one();
    let visits = system.solve(&rhs)?;
    if let Some((i, v)) = visits.iter().enumerate().find(|(_, v)| {
        if T::EXACT {
            v.is_negative()
        } else {
            v.to_f64() < -1e-9 || !v.to_f64().is_finite()
        }
    }) {
        return Err(Error::Solver(format!("negative visit count {:e} at state {i}", v.to_f64())));
    }
    Ok(GreenVector {
        source,
        absorbing_layer,
        visits,
    })
}

/// `(2y + 1)(1 − (2y + 1)/(2N + 1))`: the shape of the projected chain's
/// Green function from 0, killed at `N`, up to a constant factor.
pub fn green_closed_form_1d<T: Value>(n: usize, y: usize) -> T {
    let m = 2 * y as i64 + 1;
    T::ratio(m, 1) * (T::one() - T::ratio(m, 2 * n as i64 + 1))
}

/// Ratio of a solved Green vector to [`green_closed_form_1d`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenFit {
    pub layers: usize,
    /// Mean of `g(y) / shape(y)` over `1 ≤ y < N`.
    pub constant: f64,
    /// `(max − min) / mean` of the same ratios.
    pub relative_variation: f64,
    pub inv_cos2: f64,
    pub inv_sin2: f64,
    /// `"1/sin^2"`, `"1/cos^2"`, `"both"` or `"neither"`, at relative 1e−8.
    pub matches: String,
    /// Visits at the source, which depend on the apex parameter.
    pub at_source: f64,
}

pub fn fit_green_constant<T: Value>(green: &GreenVector<T>, sin2: f64) -> Result<GreenFit> {
    let n = green.absorbing_layer;
    if n < 2 || green.visits.len() <= n {
        return Err(Error::domain("green fit needs a chain on 0..=N with N >= 2"));
    }
    let ratios: Vec<f64> = (1..n)
        .map(|y| green.visits[y].to_f64() / green_closed_form_1d::<f64>(n, y))
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inv_cos2 = 1.0 / (1.0 - sin2);
    let inv_sin2 = 1.0 / sin2;
    let close = |c: f64| ((mean - c) / c).abs() < 1e-8;
    let matches = match (close(inv_sin2), close(inv_cos2)) {
        (true, true) => "both",
        (true, false) => "1/sin^2",
        (false, true) => "1/cos^2",
        (false, false) => "neither",
    };
    Ok(GreenFit {
        layers: n,
        constant: mean,
        relative_variation: (hi - lo) / mean,
        inv_cos2,
        inv_sin2,
        matches: matches.into(),
        at_source: green.visits[green.source].to_f64(),
    })
}

/// Time reversal of a chain run from `source` until absorption.
#[derive(Clone, Debug)]
pub struct Reversal<T> {
    /// `p̂(x, y) = g(y) p(y, x) / g(x)` on transient states; entry states
    /// (where the forward chain is absorbed) jump back along the last step.
    pub kernel: StochasticKernel<T>,
    /// Forward absorption law, which is the reversal's starting law.
    pub initial: BTreeMap<usize, T>,
    /// Probability `1/g(source)` of being killed at each visit to the source.
    pub source_killing: T,
}

pub fn nagasawa_reverse<T: Value>(kernel: &StochasticKernel<T>, green: &GreenVector<T>) -> Result<Reversal<T>> {
    let n = kernel.len();
    if green.visits.len() != n {
        return Err(Error::Shape {
            what: "green vector",
            expected: n,
            found: green.visits.len(),
        });
    }
    let m = kernel.matrix();
    let layer = green.absorbing_layer;
    let g = &green.visits;

    let mut incoming: Vec<SparseRow<T>> = vec![Vec::new(); n];
    let mut initial: BTreeMap<usize, T> = BTreeMap::new();
    for x in 0..n {
        if is_absorbed(kernel, x, layer) || g[x].is_zero() {
            continue;
        }
        for (y, p) in m.row(x) {
            let flow = g[x].clone() * p.clone();
            if flow.is_zero() {
                continue;
            }
            incoming[*y].push((x, flow.clone()));
            if is_absorbed(kernel, *y, layer) {
                let e = initial.entry(*y).or_insert_with(T::zero);
                *e = e.clone() + flow;
            }
        }
    }

    let mut rows: Vec<SparseRow<T>> = Vec::with_capacity(n);
    for (z, inflow) in incoming.into_iter().enumerate() {
        let denom = if is_absorbed(kernel, z, layer) {
            match initial.get(&z) {
                Some(nu) => nu.clone(),
                None => {
                    rows.push(vec![(z, T::one())]);
                    continue;
                }
            }
        } else {
            if g[z].is_zero() || (!T::EXACT && g[z].to_f64() <= 0.0) {
                if inflow.is_empty() {
                    rows.push(vec![(z, T::one())]);
                    continue;
                }
                return Err(Error::Unreachable {
                    state: z,
                });
            }
            g[z].clone()
        };
        rows.push(inflow.into_iter().map(|(x, f)| (x, f / denom.clone())).collect());
    }
    let source_killing = T::one() / g[green.source].clone();
    let mut killing = BTreeMap::new();
    killing.insert(green.source, source_killing.clone());
    // in floating point the solve leaves O(ε) defects in the row sums; put
    // them back on the diagonal-free rows by rescaling only when tiny
    if !T::EXACT {
        for (i, row) in rows.iter_mut().enumerate() {
            let target = T::one() - killing.get(&i).cloned().unwrap_or_else(T::zero);
            let s = crate::value::sum(row.iter().map(|(_, v)| v));
            let defect = (s.clone() - target.clone()).abs().to_f64();
            if defect > 0.0 && defect < 1e-9 && !s.is_zero() {
                for (_, v) in row.iter_mut() {
                    *v = v.clone() * target.clone() / s.clone();
                }
            }
        }
    }
    let kernel = StochasticKernel::with_killing(SparseMatrix::new(rows, m.layers().to_vec())?, killing)?;
    Ok(Reversal {
        kernel,
        initial,
        source_killing,
    })
}

/// Mean one-step displacement of a site in lattice coordinates
/// `(Δlayer, Δtransverse)`.
pub fn mean_step<T: Value>(kernel: &StochasticKernel<T>, site: Site) -> (T, T) {
    let mut dk = T::zero();
    let mut dy = T::zero();
    for (j, p) in kernel.matrix().row(site.index()) {
        let to = Site::from_index(*j);
        dk = dk + p.clone() * T::from_i64(to.layer as i64 - site.layer as i64).unwrap_or_else(T::zero);
        dy = dy + p.clone() * T::from_i64((to.transverse - site.transverse) as i64).unwrap_or_else(T::zero);
    }
    (dk, dy)
}

/// Reflects a lattice displacement across the inner normal of the upper
/// wedge side. In lattice coordinates the side direction is `(1, 1)` and the
/// reflection is `(a, b) ↦ (a − 2w, b − 2w)` with `w = a cos²α + b sin²α`.
pub fn reflect_across_upper_normal<T: Value>(dk: &T, dy: &T, sin2: &T) -> (T, T) {
    let cos2 = T::one() - sin2.clone();
    let w = dk.clone() * cos2 + dy.clone() * sin2.clone();
    let two_w = w.clone() + w;
    (dk.clone() - two_w.clone(), dy.clone() - two_w)
}

/// Largest deviation of the reversed wedge kernel from the closed-form
/// table at inner sites `2 ≤ k ≤ N − 2`: horizontal steps scaled by
/// `(N − k ± 1)/(N − k)`, vertical steps unchanged at `cos²α/2`.
pub fn reversal_table_gap<T: Value>(reversal: &Reversal<T>, layers: usize, sin2: &T) -> T {
    let half = T::half();
    let vertical = (T::one() - sin2.clone()) * half.clone();
    let horizontal = sin2.clone() * half;
    let mut worst = T::zero();
    let mut update = |got: T, want: T| {
        let d = (got - want).abs();
        if d > worst {
            worst = d;
        }
    };
    for k in 2..layers.saturating_sub(1) as u32 {
        let nk = (layers as u32 - k) as i64;
        for y in -(k as i32) + 1..k as i32 {
            let i = Site::new(k, y).index();
            let p = |to: Site| reversal.kernel.prob(i, to.index());
            update(p(Site::new(k, y + 1)), vertical.clone());
            update(p(Site::new(k, y - 1)), vertical.clone());
            update(p(Site::new(k - 1, y)), horizontal.clone() * T::ratio(nk + 1, nk));
            update(p(Site::new(k + 1, y)), horizontal.clone() * T::ratio(nk - 1, nk));
        }
    }
    worst
}

/// Compares `P(path)` with the reversed probability of the reversed path
/// for every path from `source` that reaches `absorbing_layer` within
/// `max_len` steps. Returns the number of paths and the largest gap.
pub fn path_reversal_gap<T: Value>(
    kernel: &StochasticKernel<T>,
    reversal: &Reversal<T>,
    source: usize,
    absorbing_layer: usize,
    max_len: usize,
) -> (usize, T) {
    let m = kernel.matrix();
    let mut stack = vec![(vec![source], T::one())];
    let (mut count, mut worst) = (0, T::zero());
    while let Some((path, prob)) = stack.pop() {
        let last = *path.last().expect("paths are never empty");
        if m.layer(last) >= absorbing_layer {
            let mut backward = reversal.initial.get(&last).cloned().unwrap_or_else(T::zero)
                * reversal.source_killing.clone();
            for w in path.windows(2) {
                backward = backward * reversal.kernel.prob(w[1], w[0]);
            }
            let d = (prob - backward).abs();
            if d > worst {
                worst = d;
            }
            count += 1;
            continue;
        }
        if path.len() > max_len {
            continue;
        }
        for (j, p) in m.row(last) {
            let mut next = path.clone();
            next.push(*j);
            stack.push((next, prob.clone() * p.clone()));
        }
    }
    (count, worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_wedge_lattice, WedgeSpec};
    use crate::kernels::{projected_wedge_chain, wedge_kernel};
    use crate::Angle;
    use num::rational::BigRational as Q;
    use num::{One, Zero};

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    /// Expected visits by summing the substochastic powers until the
    /// surviving mass drops below `tol`.
    fn visits_by_powers(kernel: &StochasticKernel<f64>, source: usize, layer: usize, tol: f64) -> Vec<f64> {
        let n = kernel.len();
        let mut dist = vec![0.0; n];
        dist[source] = 1.0;
        let mut acc = vec![0.0; n];
        loop {
            let mass: f64 = dist.iter().sum();
            if mass < tol {
                break;
            }
            for (a, d) in acc.iter_mut().zip(&dist) {
                *a += d;
            }
            let mut next = vec![0.0; n];
            for (x, d) in dist.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                for (y, p) in kernel.matrix().row(x) {
                    if !is_absorbed(kernel, *y, layer) {
                        next[*y] += d * p;
                    }
                }
            }
            dist = next;
        }
        acc
    }

    #[test]
    fn small_chain_matches_power_sums() {
        let spec = WedgeSpec::new(Angle::PiOver4, 2).with_apex_hold(q(1, 8));
        let chain: StochasticKernel<Q> = projected_wedge_chain(&spec, 2).unwrap();
        let g = green_vector(&chain, 0, 2).unwrap();
        let oracle = visits_by_powers(&chain.to_f64(), 0, 2, 1e-13);
        assert!((g.get(1).to_f64() - oracle[1]).abs() < 1e-11);
        assert!((g.get(0).to_f64() - oracle[0]).abs() < 1e-11);
        assert!(g.get(2).is_zero());
    }

    #[test]
    fn two_dimensional_green_factorizes() {
        let n = 8;
        let spec = WedgeSpec::new(Angle::PiOver6, n);
        let lattice = build_wedge_lattice(&spec).unwrap();
        let p: StochasticKernel<Q> = wedge_kernel(&lattice, n).unwrap();
        let chain: StochasticKernel<Q> = projected_wedge_chain(&spec, n).unwrap();
        let g2 = green_vector(&p, 0, n).unwrap();
        let g1 = green_vector(&chain, 0, n).unwrap();
        for site in lattice.sites() {
            let k = site.layer as usize;
            let expected = g1.get(k).clone() / q(2 * k as i64 + 1, 1);
            assert_eq!(g2.get(site.index()), &expected, "{site:?}");
        }
    }

    #[test]
    fn closed_form_shape_and_constant() {
        assert_eq!(green_closed_form_1d::<Q>(2, 1), q(6, 5));
        assert!(green_closed_form_1d::<Q>(7, 7).is_zero());
        for alpha in [Angle::PiOver6, Angle::PiOver4, Angle::PiOver3] {
            let spec = WedgeSpec::new(alpha, 12);
            let chain: StochasticKernel<Q> = projected_wedge_chain(&spec, 12).unwrap();
            let g = green_vector(&chain, 0, 12).unwrap();
            let s2: Q = alpha.sin2().unwrap();
            for y in 1..12 {
                assert_eq!(g.get(y).clone(), green_closed_form_1d::<Q>(12, y) / s2.clone());
            }
            // from the apex, visits at 0 are N/(r(2N+1))
            let r: Q = spec.apex_probability().unwrap();
            assert_eq!(g.get(0).clone(), q(12, 25) / r);
        }
    }

    #[test]
    fn fit_reports_the_matching_prefactor() {
        let spec = WedgeSpec::new(Angle::PiOver6, 50);
        let chain: StochasticKernel<f64> = projected_wedge_chain(&spec, 50).unwrap();
        let fit = fit_green_constant(&green_vector(&chain, 0, 50).unwrap(), 0.25).unwrap();
        assert!(fit.relative_variation < 1e-10);
        assert_eq!(fit.matches, "1/sin^2");
        assert!((fit.constant - 4.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_absorption_is_a_solver_error() {
        // a closed class {1, 2} that never reaches layer 3
        let rows = vec![
            vec![(1, 1.0)],
            vec![(2, 1.0)],
            vec![(1, 1.0)],
            vec![(3, 1.0)],
        ];
        let k = StochasticKernel::new(SparseMatrix::new(rows, vec![0, 1, 2, 3]).unwrap()).unwrap();
        assert!(matches!(green_vector(&k, 0, 3), Err(Error::Solver(_))));
    }

    fn reversed(n: usize, alpha: Angle) -> (StochasticKernel<Q>, GreenVector<Q>, Reversal<Q>) {
        let lattice = build_wedge_lattice(&WedgeSpec::new(alpha, n)).unwrap();
        let p: StochasticKernel<Q> = wedge_kernel(&lattice, n).unwrap();
        let g = green_vector(&p, 0, n).unwrap();
        let rev = nagasawa_reverse(&p, &g).unwrap();
        (p, g, rev)
    }

    #[test]
    fn reversed_table() {
        let n = 10;
        let (_, _, rev) = reversed(n, Angle::PiOver6);
        let (s2, c2) = (q(1, 4), q(3, 4));
        for k in 2..n as u32 - 1 {
            let nk = (n as u32 - k) as i64;
            for y in -(k as i32) + 1..k as i32 {
                let i = Site::new(k, y).index();
                assert_eq!(rev.kernel.prob(i, Site::new(k, y + 1).index()), c2.clone() / q(2, 1));
                assert_eq!(rev.kernel.prob(i, Site::new(k, y - 1).index()), c2.clone() / q(2, 1));
                assert_eq!(
                    rev.kernel.prob(i, Site::new(k - 1, y).index()),
                    s2.clone() / q(2, 1) * q(nk + 1, nk)
                );
                assert_eq!(
                    rev.kernel.prob(i, Site::new(k + 1, y).index()),
                    s2.clone() / q(2, 1) * q(nk - 1, nk)
                );
            }
        }
    }

    #[test]
    fn reversed_boundary_mean_is_the_mirror_image() {
        let n = 10;
        for alpha in [Angle::PiOver6, Angle::PiOver4, Angle::PiOver3] {
            let (p, _, rev) = reversed(n, alpha);
            let s2: Q = alpha.sin2().unwrap();
            let half = s2.clone() / q(2, 1);
            for k in 2..n as u32 - 1 {
                let site = Site::new(k, k as i32);
                let (fk, fy) = mean_step(&p, site);
                let (mk, my) = reflect_across_upper_normal(&fk, &fy, &s2);
                let (rk, ry) = mean_step(&rev.kernel, site);
                let nk = (n as u32 - k) as i64;
                let rho_up = q(nk - 1, nk) - Q::one();
                let rho_down = q(nk + 1, nk) - Q::one();
                assert_eq!(rk - mk, half.clone() * rho_up - half.clone() * rho_down.clone());
                assert_eq!(ry - my, -half.clone() * rho_down);
            }
        }
    }

    #[test]
    fn reversal_approaches_forward_probabilities() {
        let mut last = f64::INFINITY;
        let site = Site::new(3, 1).index();
        let toward_apex = Site::new(2, 1).index();
        for n in [8, 16, 32] {
            let lattice = build_wedge_lattice(&WedgeSpec::new(Angle::PiOver4, n)).unwrap();
            let p: StochasticKernel<f64> = wedge_kernel(&lattice, n).unwrap();
            let g = green_vector(&p, 0, n).unwrap();
            let rev = nagasawa_reverse(&p, &g).unwrap();
            let gap = (rev.kernel.prob(site, toward_apex) - p.prob(site, toward_apex)).abs();
            assert!((gap - 0.25 / (n - 3) as f64).abs() < 1e-10);
            assert!(gap < last);
            last = gap;
        }
    }

    fn enumerate_paths(
        p: &StochasticKernel<Q>,
        layer: usize,
        path: &mut Vec<usize>,
        max_len: usize,
        out: &mut Vec<(Vec<usize>, Q)>,
        prob: Q,
    ) {
        let last = *path.last().unwrap();
        if p.matrix().layer(last) >= layer {
            out.push((path.clone(), prob));
            return;
        }
        if path.len() > max_len {
            return;
        }
        for (j, v) in p.matrix().row(last) {
            path.push(*j);
            enumerate_paths(p, layer, path, max_len, out, prob.clone() * v.clone());
            path.pop();
        }
    }

    #[test]
    fn pathwise_reversal_identity() {
        let n = 3;
        let (p, _, rev) = reversed(n, Angle::PiOver4);
        let mut paths = Vec::new();
        enumerate_paths(&p, n, &mut vec![0], 8, &mut paths, Q::one());
        assert!(paths.len() > 100);
        for (path, forward) in paths {
            let z = *path.last().unwrap();
            let mut backward = rev.initial[&z].clone();
            for w in path.windows(2).rev() {
                backward *= rev.kernel.prob(w[1], w[0]);
            }
            backward *= rev.source_killing.clone();
            assert_eq!(forward, backward, "{path:?}");
        }
    }

    #[test]
    fn library_gaps_agree_with_the_tests() {
        let (_, _, rev) = reversed(10, Angle::PiOver3);
        assert!(reversal_table_gap(&rev, 10, &q(3, 4)).is_zero());
        let (p3, _, rev3) = reversed(3, Angle::PiOver6);
        let (count, gap) = path_reversal_gap(&p3, &rev3, 0, 3, 6);
        assert!(count > 10 && gap.is_zero());
        assert!(!reversal_table_gap(&rev, 10, &q(1, 4)).is_zero());
    }

    #[test]
    fn initial_law_is_uniform_on_the_exit_layer() {
        let (_, _, rev) = reversed(5, Angle::PiOver3);
        assert_eq!(rev.initial.len(), 11);
        assert!(rev.initial.values().all(|v| *v == q(1, 11)));
    }

    #[test]
    fn csv_layout() {
        let chain: StochasticKernel<f64> = projected_wedge_chain(&WedgeSpec::new(Angle::PiOver4, 3), 3).unwrap();
        let g = green_vector(&chain, 0, 3).unwrap();
        let csv = g.to_csv(StateSpace::Layers);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("layer,transverse,visits\n0,0,"));
    }
}
