//! Transition operators: the wedge walk, its projected birth-death chain,
//! the vase Q-matrix and its projection.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use num::rational::BigRational;

use crate::geometry::{layer_range, site_layers, Site, VaseGrid, WedgeLattice, WedgeSpec};
use crate::linalg::{SparseMatrix, SparseRow};
use crate::value::{parse_rational, Value};
use crate::{Error, Result};

const FLOAT_ROW_TOL: f64 = 1e-12;

/// Row-stochastic operator. Rows listed in `killing` may be substochastic;
/// the missing mass is the probability of being killed from that state.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticKernel<T> {
    matrix: SparseMatrix<T>,
    killing: BTreeMap<usize, T>,
}

impl<T: Value> StochasticKernel<T> {
    pub fn new(matrix: SparseMatrix<T>) -> Result<Self> {
        Self::with_killing(matrix, BTreeMap::new())
    }

    pub fn with_killing(matrix: SparseMatrix<T>, killing: BTreeMap<usize, T>) -> Result<Self> {
        let k = StochasticKernel { matrix, killing };
        k.validate()?;
        Ok(k)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.matrix.len() {
            if let Some((j, p)) = self.matrix.row(i).iter().find(|(_, p)| p.is_negative()) {
                return Err(Error::domain(format!(
                    "negative probability {p:?} on ({i}, {j})"
                )));
            }
            let total = self.matrix.row_sum(i) + self.killing.get(&i).cloned().unwrap_or_else(T::zero);
            let defect = (total - T::one()).abs();
            let ok = if T::EXACT {
                defect.is_zero()
            } else {
                defect.to_f64() <= FLOAT_ROW_TOL
            };
            if !ok {
                return Err(Error::domain(format!(
                    "row {i} sums to 1 {:+e}",
                    defect.to_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn prob(&self, i: usize, j: usize) -> T {
        self.matrix.entry(i, j)
    }

    pub fn killing(&self) -> &BTreeMap<usize, T> {
        &self.killing
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        let row = self.matrix.row(i);
        row.len() == 1 && row[0].0 == i && row[0].1.is_one()
    }

    /// Generator rows `P − I`.
    pub fn generator(&self) -> SparseMatrix<T> {
        let mut g = self.matrix.clone();
        for (i, row) in g.rows_mut().iter_mut().enumerate() {
            row.push((i, -T::one()));
        }
        g
    }

    pub fn to_f64(&self) -> StochasticKernel<f64> {
        StochasticKernel {
            matrix: self.matrix.map(|v| v.to_f64()),
            killing: self.killing.iter().map(|(i, v)| (*i, v.to_f64())).collect(),
        }
    }

    pub fn to_triplets(&self) -> String {
        write_triplets(&self.matrix)
    }
}

/// Q-matrix: nonnegative off-diagonal rates, each row summing to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix<T> {
    matrix: SparseMatrix<T>,
}

impl<T: Value> RateMatrix<T> {
    /// Builds a Q-matrix from off-diagonal rates; the diagonal is filled in.
    pub fn from_off_diagonal(mut rows: Vec<SparseRow<T>>, layer: Vec<usize>) -> Result<Self> {
        for (i, row) in rows.iter_mut().enumerate() {
            if let Some((j, r)) = row.iter().find(|(j, r)| *j == i || r.is_negative()) {
                return Err(Error::domain(format!("invalid off-diagonal rate {r:?} at ({i}, {j})")));
            }
            let out = crate::value::sum(row.iter().map(|(_, r)| r));
            row.retain(|(_, r)| !r.is_zero());
            if !out.is_zero() {
                row.push((i, -out));
            }
        }
        Ok(RateMatrix {
            matrix: SparseMatrix::new(rows, layer)?,
        })
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn rate(&self, i: usize, j: usize) -> T {
        self.matrix.entry(i, j)
    }

    pub fn exit_rate(&self, i: usize) -> T {
        -self.matrix.entry(i, i)
    }

    pub fn to_triplets(&self) -> String {
        write_triplets(&self.matrix)
    }
}

impl RateMatrix<f64> {
    /// Embedded jump chain; states with zero exit rate become absorbing.
    pub fn jump_chain(&self) -> Result<StochasticKernel<f64>> {
        let rows = (0..self.len())
            .map(|i| {
                let out = self.exit_rate(i);
                if out <= 0.0 {
                    vec![(i, 1.0)]
                } else {
                    self.matrix
                        .row(i)
                        .iter()
                        .filter(|(j, _)| *j != i)
                        .map(|(j, r)| (*j, r / out))
                        .collect()
                }
            })
            .collect();
        StochasticKernel::new(SparseMatrix::new(rows, self.matrix.layers().to_vec())?)
    }
}

/// Wedge walk on the lattice, absorbed on reaching layer `absorb_at`.
///
/// Inner sites step `±cos α` with probability `sin²α/2` and `±i sin α` with
/// probability `cos²α/2`. Boundary sites push away from the apex along the
/// lattice and either step inward or hold. The apex moves to each of the
/// three layer-1 sites with probability `r`.
pub fn wedge_kernel<T: Value>(lattice: &WedgeLattice, absorb_at: usize) -> Result<StochasticKernel<T>> {
    let n = lattice.layers();
    if absorb_at < 2 || absorb_at > n {
        return Err(Error::domain(format!(
            "absorbing layer {absorb_at} must lie in 2..={n}"
        )));
    }
    let s2: T = lattice.spec.alpha.sin2()?;
    let c2 = T::one() - s2.clone();
    let p = s2 / T::ratio(2, 1);
    let q = c2 / T::ratio(2, 1);
    let r: T = lattice.spec.apex_probability()?;

    let idx = |k: u32, y: i32| Site::new(k, y).index();
    let rows: Vec<SparseRow<T>> = lattice
        .sites()
        .iter()
        .map(|site| {
            let (k, y) = (site.layer, site.transverse);
            let i = site.index();
            if k as usize >= absorb_at {
                return vec![(i, T::one())];
            }
            if k == 0 {
                let mut row = vec![
                    (idx(1, -1), r.clone()),
                    (idx(1, 0), r.clone()),
                    (idx(1, 1), r.clone()),
                ];
                let hold = T::one() - r.clone() * T::ratio(3, 1);
                if !hold.is_zero() {
                    row.insert(0, (i, hold));
                }
                return row;
            }
            let ki = k as i32;
            if y.abs() < ki {
                vec![
                    (idx(k - 1, y), p.clone()),
                    (idx(k, y - 1), q.clone()),
                    (idx(k, y + 1), q.clone()),
                    (idx(k + 1, y), p.clone()),
                ]
            } else {
                let sign = y.signum();
                vec![
                    (idx(k, y - sign), q.clone()),
                    (i, q.clone()),
                    (idx(k + 1, y), p.clone()),
                    (idx(k + 1, y + sign), p.clone()),
                ]
            }
        })
        .collect();
    StochasticKernel::new(SparseMatrix::new(rows, site_layers(n))?)
}

/// Birth-death chain on `{0, …, N}` intertwined with [`wedge_kernel`]:
/// `q(i, i±1) = sin²α/2 · (2i + 1 ± 2)/(2i + 1)`, holding `cos²α`. States
/// from `absorb_at` on are absorbing.
pub fn projected_wedge_chain<T: Value>(spec: &WedgeSpec, absorb_at: usize) -> Result<StochasticKernel<T>> {
    spec.validate()?;
    let n = spec.layers;
    if absorb_at < 1 || absorb_at > n {
        return Err(Error::domain(format!("absorbing state {absorb_at} must lie in 1..={n}")));
    }
    let s2: T = spec.alpha.sin2()?;
    let c2 = T::one() - s2.clone();
    let half_s2 = s2 / T::ratio(2, 1);
    let r: T = spec.apex_probability()?;
    let rows = (0..=n)
        .map(|i| {
            if i >= absorb_at {
                return vec![(i, T::one())];
            }
            if i == 0 {
                let hold = T::one() - r.clone() * T::ratio(3, 1);
                let mut row = vec![(1, r.clone() * T::ratio(3, 1))];
                if !hold.is_zero() {
                    row.insert(0, (0, hold));
                }
                return row;
            }
            let m = 2 * i as i64 + 1;
            vec![
                (i - 1, half_s2.clone() * T::ratio(m - 2, m)),
                (i, c2.clone()),
                (i + 1, half_s2.clone() * T::ratio(m + 2, m)),
            ]
        })
        .collect();
    StochasticKernel::new(SparseMatrix::new(rows, (0..=n).collect())?)
}

/// Transverse (within-layer) jump rates of the vase walk.
///
/// The horizontal rates of a vase layer are fixed by the isotropy
/// requirement; schemes differ only in how sites of one layer exchange mass.
pub trait TransverseScheme: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Rates `(toward +y, toward −y)` out of site `(k, y)`, `0 < k`, given the
    /// layer's forward and backward horizontal rates.
    fn rates(&self, k: usize, y: i32, forward: f64, backward: f64) -> (f64, f64);
}

/// Rate `1/2` to each transverse neighbour; a boundary site only steps
/// inward.
///
/// With this scheme the uniform fiber law is preserved only when the
/// forward and backward horizontal rates coincide (straight walls): boundary
/// sites leave their layer at rate `2A` while inner sites leave at `A + B`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IsotropicTransverse;

impl TransverseScheme for IsotropicTransverse {
    fn name(&self) -> &'static str {
        "isotropic"
    }

    fn rates(&self, k: usize, y: i32, _forward: f64, _backward: f64) -> (f64, f64) {
        let k = k as i32;
        let up = if y < k { 0.5 } else { 0.0 };
        let down = if y > -k { 0.5 } else { 0.0 };
        (up, down)
    }
}

/// Isotropic rates plus the outward transverse flux
/// `J_j = (2j + 1)(A − B)/(2k + 1)` across the edge between `|y| = j` and
/// `j + 1`. This is the unique correction that keeps every site of a layer
/// at the same net rate, so that the uniform fiber law is exactly invariant
/// for curved walls.
#[derive(Clone, Copy, Debug, Default)]
pub struct FiberBalancedTransverse;

impl FiberBalancedTransverse {
    fn flux(k: usize, j: i32, forward: f64, backward: f64) -> f64 {
        (2 * j + 1) as f64 * (forward - backward) / (2 * k + 1) as f64
    }
}

impl TransverseScheme for FiberBalancedTransverse {
    fn name(&self) -> &'static str {
        "fiber-balanced"
    }

    fn rates(&self, k: usize, y: i32, forward: f64, backward: f64) -> (f64, f64) {
        let ki = k as i32;
        let a = y.abs();
        let outward = if a < ki {
            0.5 + 0.5 * Self::flux(k, a, forward, backward)
        } else {
            0.0
        };
        let inward = if a > 0 {
            0.5 - 0.5 * Self::flux(k, a - 1, forward, backward)
        } else {
            outward
        };
        match y.signum() {
            1 => (outward, inward),
            -1 => (inward, outward),
            _ => (outward, outward),
        }
    }
}

/// Named transverse schemes.
pub fn transverse_scheme(name: &str) -> Result<Arc<dyn TransverseScheme>> {
    transverse_schemes()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::Parse(format!("unknown transverse scheme `{name}`")))
}

pub fn transverse_schemes() -> Vec<Arc<dyn TransverseScheme>> {
    vec![Arc::new(FiberBalancedTransverse), Arc::new(IsotropicTransverse)]
}

pub const DEFAULT_APEX_RATE: f64 = 1.0 / 6.0;

/// Horizontal rates `(forward, backward)` at vase layer `0 < k < K`.
pub fn vase_horizontal_rates(grid: &VaseGrid, k: usize) -> Result<(f64, f64)> {
    let (ck, cp) = (grid.cotangents[k], grid.cotangents[k - 1]);
    if !(ck > 0.0 && cp > 0.0 && ck.is_finite() && cp.is_finite()) {
        return Err(Error::domain(format!("degenerate vase angle at layer {k}")));
    }
    Ok((1.0 / (ck * (ck + cp)), 1.0 / (cp * (ck + cp))))
}

/// Q-matrix of the vase walk; layer `K` is absorbing.
pub fn vase_rate_matrix(
    grid: &VaseGrid,
    apex_rate: f64,
    scheme: &dyn TransverseScheme,
) -> Result<RateMatrix<f64>> {
    if !(apex_rate > 0.0 && apex_rate.is_finite()) {
        return Err(Error::domain(format!("apex rate {apex_rate} must be positive")));
    }
    let big_k = grid.layers;
    let idx = |k: usize, y: i32| Site::new(k as u32, y).index();
    let mut rows: Vec<SparseRow<f64>> = vec![Vec::new(); grid.site_count()];
    rows[0] = vec![(idx(1, -1), apex_rate), (idx(1, 0), apex_rate), (idx(1, 1), apex_rate)];
    for k in 1..big_k {
        let (fwd, bwd) = vase_horizontal_rates(grid, k)?;
        let ki = k as i32;
        for y in -ki..=ki {
            let row = &mut rows[idx(k, y)];
            let (up, down) = scheme.rates(k, y, fwd, bwd);
            if up < 0.0 || down < 0.0 {
                return Err(Error::domain(format!(
                    "scheme {} gives negative transverse rate at ({k}, {y})",
                    scheme.name()
                )));
            }
            if up > 0.0 {
                row.push((idx(k, y + 1), up));
            }
            if down > 0.0 {
                row.push((idx(k, y - 1), down));
            }
            if y.abs() < ki {
                row.push((idx(k + 1, y), fwd));
                row.push((idx(k - 1, y), bwd));
            } else {
                row.push((idx(k + 1, y), fwd));
                row.push((idx(k + 1, y + y.signum()), fwd));
            }
        }
    }
    RateMatrix::from_off_diagonal(rows, site_layers(big_k))
}

/// Projected Q-matrix on `{x_0, …, x_K}`; `x_K` is absorbing.
pub fn projected_vase_rates(grid: &VaseGrid, apex_rate: f64) -> Result<RateMatrix<f64>> {
    if !(apex_rate > 0.0 && apex_rate.is_finite()) {
        return Err(Error::domain(format!("apex rate {apex_rate} must be positive")));
    }
    let big_k = grid.layers;
    let mut rows: Vec<SparseRow<f64>> = vec![Vec::new(); big_k + 1];
    rows[0] = vec![(1, 3.0 * apex_rate)];
    for (k, row) in rows.iter_mut().enumerate().take(big_k).skip(1) {
        let (fwd, bwd) = vase_horizontal_rates(grid, k)?;
        let m = (2 * k + 1) as f64;
        *row = vec![(k + 1, (m + 2.0) / m * fwd), (k - 1, (m - 2.0) / m * bwd)];
    }
    RateMatrix::from_off_diagonal(rows, (0..=big_k).collect())
}

/// Sites of layer `k` in index order.
pub fn fiber(k: usize) -> std::ops::Range<usize> {
    layer_range(k)
}

fn write_triplets<T: Value>(m: &SparseMatrix<T>) -> String {
    let mut out = String::new();
    for i in 0..m.len() {
        for (j, v) in m.row(i) {
            let value = if T::EXACT {
                let f = format!("{v:?}");
                // BigRational's Debug is `Ratio { numer: .., denom: .. }`
                let r = parse_debug_ratio(&f).unwrap_or(f);
                r.replace('/', ",")
            } else {
                format!("{:e}", v.to_f64())
            };
            out.push_str(&format!("{i},{j},{value}\n"));
        }
    }
    out
}

fn parse_debug_ratio(s: &str) -> Option<String> {
    let numer = s.split("numer:").nth(1)?.split(',').next()?.trim().to_string();
    let denom = s.split("denom:").nth(1)?.trim().trim_end_matches('}').trim().to_string();
    Some(format!("{numer}/{denom}"))
}

/// Parses the triplet format back into sparse rows: `from,to,num,den` or
/// `from,to,float` per line.
pub fn parse_triplets<T: Value>(text: &str, n: usize) -> Result<Vec<SparseRow<T>>> {
    let mut rows: Vec<SparseRow<T>> = vec![Vec::new(); n];
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let fields: Vec<&str> = line.split(',').collect();
        let parse_idx = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad state index in `{line}`")))
        };
        let (i, j) = match fields.as_slice() {
            [i, j, ..] => (parse_idx(i)?, parse_idx(j)?),
            _ => return Err(Error::Parse(format!("bad triplet `{line}`"))),
        };
        let v = match fields.as_slice() {
            [_, _, num, den] => T::from_rational(&parse_rational(&format!("{num}/{den}"))?),
            [_, _, x] => {
                let x: f64 = x
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value in `{line}`")))?;
                if T::EXACT {
                    T::from_rational(
                        &BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("bad value in `{line}`")))?,
                    )
                } else {
                    T::from_f64(x).ok_or_else(|| Error::Parse(format!("bad value in `{line}`")))?
                }
            }
            _ => return Err(Error::Parse(format!("bad triplet `{line}`"))),
        };
        if i >= n || j >= n {
            return Err(Error::Shape {
                what: "triplet state",
                expected: n,
                found: i.max(j),
            });
        }
        rows[i].push((j, v));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_vase_grid, build_wedge_lattice, LinearShape, PowerShape};
    use crate::Angle;
    use num::rational::BigRational as Q;
    use num::{One, Zero};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn wedge(alpha: Angle, n: usize) -> StochasticKernel<Q> {
        let lattice = build_wedge_lattice(&WedgeSpec::new(alpha, n)).unwrap();
        wedge_kernel(&lattice, n).unwrap()
    }

    #[test]
    fn inner_rows() {
        let k = wedge(Angle::PiOver4, 5);
        let s = Site::new(3, 1).index();
        for (k2, y2) in [(2, 1), (4, 1), (3, 0), (3, 2)] {
            assert_eq!(k.prob(s, Site::new(k2, y2).index()), q(1, 4));
        }
        let k = wedge(Angle::PiOver6, 5);
        assert_eq!(k.prob(s, Site::new(4, 1).index()), q(1, 8));
        assert_eq!(k.prob(s, Site::new(2, 1).index()), q(1, 8));
        assert_eq!(k.prob(s, Site::new(3, 2).index()), q(3, 8));
        assert_eq!(k.prob(s, Site::new(3, 0).index()), q(3, 8));
    }

    #[test]
    fn boundary_and_apex_rows() {
        let k = wedge(Angle::PiOver4, 5);
        let s = Site::new(2, 2).index();
        for (k2, y2) in [(3, 2), (3, 3), (2, 1), (2, 2)] {
            assert_eq!(k.prob(s, Site::new(k2, y2).index()), q(1, 4));
        }
        let lower = Site::new(2, -2).index();
        for (k2, y2) in [(3, -2), (3, -3), (2, -1), (2, -2)] {
            assert_eq!(k.prob(lower, Site::new(k2, y2).index()), q(1, 4));
        }
        // default r = 1/4 at pi/4: hold 1/4
        assert_eq!(k.prob(0, 0), q(1, 4));
        for y in -1..=1 {
            assert_eq!(k.prob(0, Site::new(1, y).index()), q(1, 4));
        }
        assert!(k.is_absorbing(Site::new(5, 3).index()));
        assert!(!k.is_absorbing(Site::new(4, 3).index()));
    }

    #[test]
    fn boundary_drift_direction() {
        // mean displacement of an upper boundary row has argument 2α − π/2
        for alpha in [0.2, 0.5, 0.9, 1.3] {
            let lattice = build_wedge_lattice(&WedgeSpec::new(Angle::Radians(alpha), 6)).unwrap();
            let k: StochasticKernel<f64> = wedge_kernel(&lattice, 6).unwrap();
            let site = Site::new(3, 3);
            let (x0, y0) = lattice.position(site);
            let (mut dx, mut dy) = (0.0, 0.0);
            for (j, p) in k.matrix().row(site.index()) {
                let (x, y) = lattice.position(Site::from_index(*j));
                dx += p * (x - x0);
                dy += p * (y - y0);
            }
            let expected = 2.0 * alpha - std::f64::consts::FRAC_PI_2;
            assert!((dy.atan2(dx) - expected).abs() < 1e-12);
            assert!((dy / dx - expected.tan()).abs() < 1e-12 * expected.tan().abs().max(1.0));
        }
    }

    #[test]
    fn absorbing_layer_range() {
        let lattice = build_wedge_lattice(&WedgeSpec::new(Angle::PiOver4, 5)).unwrap();
        assert!(wedge_kernel::<f64>(&lattice, 1).is_err());
        assert!(wedge_kernel::<f64>(&lattice, 6).is_err());
        let k = wedge_kernel::<f64>(&lattice, 3).unwrap();
        assert!(k.is_absorbing(Site::new(4, 0).index()));
        assert!(k.is_absorbing(Site::new(3, 0).index()));
    }

    #[test]
    fn projected_chain_rows() {
        let chain: StochasticKernel<Q> = projected_wedge_chain(&WedgeSpec::new(Angle::PiOver4, 5), 5).unwrap();
        assert_eq!(chain.prob(1, 0), q(1, 12));
        assert_eq!(chain.prob(1, 1), q(1, 2));
        assert_eq!(chain.prob(1, 2), q(5, 12));
        let chain: StochasticKernel<Q> = projected_wedge_chain(&WedgeSpec::new(Angle::PiOver6, 5), 5).unwrap();
        assert_eq!(chain.prob(2, 1), q(3, 40));
        assert_eq!(chain.prob(2, 2), q(3, 4));
        assert_eq!(chain.prob(2, 3), q(7, 40));
        // apex: r = 1/3 at pi/6, so the apex always leaves
        assert_eq!(chain.prob(0, 1), Q::one());
        assert!(chain.prob(0, 0).is_zero());
    }

    #[test]
    fn reciprocal_odd_is_harmonic_off_the_apex() {
        for alpha in [Angle::PiOver6, Angle::PiOver4, Angle::PiOver3] {
            let chain: StochasticKernel<Q> = projected_wedge_chain(&WedgeSpec::new(alpha, 60), 60).unwrap();
            for i in 1..60 {
                let lhs = chain
                    .matrix()
                    .row(i)
                    .iter()
                    .fold(Q::zero(), |acc, (j, p)| acc + p * q(1, 2 * *j as i64 + 1));
                assert_eq!(lhs, q(1, 2 * i as i64 + 1));
            }
        }
    }

    fn unit_grid(n: usize) -> VaseGrid {
        build_vase_grid(Arc::new(LinearShape::new(1.0).unwrap()), n, n).unwrap()
    }

    #[test]
    fn straight_vase_rates() {
        let g = unit_grid(4);
        let qm = vase_rate_matrix(&g, DEFAULT_APEX_RATE, &IsotropicTransverse).unwrap();
        let s = Site::new(2, 1).index();
        assert!((qm.rate(s, Site::new(3, 1).index()) - 0.5).abs() < 1e-10);
        assert!((qm.rate(s, Site::new(1, 1).index()) - 0.5).abs() < 1e-10);
        assert!((qm.rate(s, Site::new(2, 2).index()) - 0.5).abs() < 1e-15);
        assert!((qm.exit_rate(s) - 2.0).abs() < 1e-10);
        let b = Site::new(2, 2).index();
        assert!((qm.rate(b, Site::new(2, 1).index()) - 0.5).abs() < 1e-15);
        assert!((qm.rate(b, Site::new(3, 3).index()) - 0.5).abs() < 1e-10);
        assert!(qm.rate(b, Site::new(1, 1).index()).abs() < 1e-300);
        // both schemes agree on straight walls
        let balanced = vase_rate_matrix(&g, DEFAULT_APEX_RATE, &FiberBalancedTransverse).unwrap();
        for i in 0..g.site_count() {
            for j in 0..g.site_count() {
                assert!((qm.rate(i, j) - balanced.rate(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rate_rows_sum_to_zero() {
        let g = build_vase_grid(Arc::new(PowerShape::new(2.0).unwrap()), 16, 16).unwrap();
        for scheme in transverse_schemes() {
            let qm = vase_rate_matrix(&g, 0.3, scheme.as_ref()).unwrap();
            for i in 0..qm.len() {
                assert!(qm.matrix().row_sum(i).abs() < 1e-12);
                for (j, r) in qm.matrix().row(i) {
                    assert!(*j == i || *r >= 0.0);
                }
            }
        }
    }

    #[test]
    fn curved_vase_pushes_toward_the_apex() {
        // h = x²: segments shorten with x, so the outward rate dominates
        let g = build_vase_grid(Arc::new(PowerShape::new(2.0).unwrap()), 64, 70).unwrap();
        let k = g.nearest_layer(1.0);
        let (fwd, bwd) = vase_horizontal_rates(&g, k).unwrap();
        assert!(g.cotangents[k] < g.cotangents[k - 1]);
        assert!(fwd > bwd);
        // drift of the projected chain is positive, matching h'/h > 0
        let qt = projected_vase_rates(&g, DEFAULT_APEX_RATE).unwrap();
        let drift = qt.rate(k, k + 1) * (g.abscissas[k + 1] - g.abscissas[k])
            - qt.rate(k, k - 1) * (g.abscissas[k] - g.abscissas[k - 1]);
        assert!(drift > 0.0);
    }

    #[test]
    fn projected_vase_rates_on_straight_walls() {
        let g = unit_grid(6);
        let qt = projected_vase_rates(&g, 0.25).unwrap();
        assert!((qt.rate(1, 2) - 5.0 / 3.0 * 0.5).abs() < 1e-10);
        assert!((qt.rate(1, 0) - 1.0 / 3.0 * 0.5).abs() < 1e-10);
        assert!((qt.rate(0, 1) - 0.75).abs() < 1e-15);
        assert_eq!(qt.exit_rate(6), 0.0);
    }

    #[test]
    fn wedge_profile_matches_wedge_chain_ratios() {
        let alpha: f64 = 0.7;
        let g = build_vase_grid(Arc::new(LinearShape::new(alpha.tan()).unwrap()), 5, 30).unwrap();
        let qt = projected_vase_rates(&g, DEFAULT_APEX_RATE).unwrap();
        let chain: StochasticKernel<f64> =
            projected_wedge_chain(&WedgeSpec::new(Angle::Radians(alpha), 30), 30).unwrap();
        for k in 1..30 {
            let vase_ratio = qt.rate(k, k + 1) / qt.rate(k, k - 1);
            let wedge_ratio = chain.prob(k, k + 1) / chain.prob(k, k - 1);
            let exact = (2 * k + 3) as f64 / (2 * k - 1) as f64;
            assert!((vase_ratio - exact).abs() < 1e-9 * exact);
            assert!((wedge_ratio - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn jump_chain_normalises_rates() {
        let g = unit_grid(4);
        let qm = vase_rate_matrix(&g, DEFAULT_APEX_RATE, &IsotropicTransverse).unwrap();
        let jc = qm.jump_chain().unwrap();
        assert!((jc.prob(0, Site::new(1, 0).index()) - 1.0 / 3.0).abs() < 1e-15);
        assert!(jc.is_absorbing(Site::new(4, 0).index()));
    }

    #[test]
    fn triplets_round_trip_exactly() {
        let k = wedge(Angle::PiOver6, 4);
        let text = k.to_triplets();
        assert!(text.lines().next().unwrap().split(',').count() == 4);
        let rows = parse_triplets::<Q>(&text, k.len()).unwrap();
        let back = StochasticKernel::new(SparseMatrix::new(rows, k.matrix().layers().to_vec()).unwrap()).unwrap();
        assert_eq!(back, k);
    }

    proptest! {
        #[test]
        fn float_kernels_are_stochastic(alpha in 0.05f64..1.5, n in 2usize..25) {
            let spec = WedgeSpec::new(Angle::Radians(alpha), n);
            let lattice = build_wedge_lattice(&spec).unwrap();
            let k: StochasticKernel<f64> = wedge_kernel(&lattice, n).unwrap();
            let triplets = parse_triplets::<f64>(&k.to_triplets(), k.len()).unwrap();
            for (i, row) in triplets.iter().enumerate() {
                let s: f64 = row.iter().map(|(_, v)| v).sum();
                prop_assert!((s - 1.0).abs() <= 1e-12, "row {} sums to {}", i, s);
            }
            let chain: StochasticKernel<f64> = projected_wedge_chain(&spec, n).unwrap();
            prop_assert_eq!(chain.len(), n + 1);
        }
    }
}
