use std::sync::Arc;

use super::{site_count, Shape, Site};
use crate::{Error, Result};

const LEVEL_TOL: f64 = 1e-10;

/// Vase grid: abscissas `x_k = h⁻¹(k/N)` and the boundary-segment angles
/// `tan α_k = (1/N) / (x_{k+1} − x_k)`.
#[derive(Clone, Debug)]
pub struct VaseGrid {
    pub shape: Arc<dyn Shape>,
    /// Transverse resolution `N`; sites sit at `y / N`.
    pub resolution: usize,
    /// Number of layers `K`; abscissas run `x_0 ..= x_K`.
    pub layers: usize,
    pub abscissas: Vec<f64>,
    /// `cot α_k = N (x_{k+1} − x_k)` for `k < K`.
    pub cotangents: Vec<f64>,
    pub angles: Vec<f64>,
}

impl VaseGrid {
    pub fn site_count(&self) -> usize {
        site_count(self.layers)
    }

    /// Planar embedding `x_k + i y/N`.
    pub fn position(&self, site: Site) -> (f64, f64) {
        (
            self.abscissas[site.layer as usize],
            site.transverse as f64 / self.resolution as f64,
        )
    }

    /// Index of the abscissa closest to `x`.
    pub fn nearest_layer(&self, x: f64) -> usize {
        let mut best = 0;
        for (k, &xk) in self.abscissas.iter().enumerate() {
            if (xk - x).abs() < (self.abscissas[best] - x).abs() {
                best = k;
            }
        }
        best
    }
}

/// Solves `h(x) = level` for strictly increasing `h` by bisection, expanding
/// the bracket from `lo` until it straddles the level.
fn invert(shape: &dyn Shape, level: f64, lo: f64) -> Result<f64> {
    let cap = shape.domain_hint().unwrap_or(1e12);
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 }.min(cap);
    while shape.value(hi) < level {
        if hi >= cap {
            return Err(Error::domain(format!(
                "level {level} unreachable: h({cap}) = {} < {level}",
                shape.value(cap)
            )));
        }
        hi = (2.0 * hi).min(cap);
    }
    let mut lo = lo;
    if shape.value(lo) > level {
        return Err(Error::domain(format!("shape is not increasing below x = {lo}")));
    }
    // bisect down to adjacent floats: steep profiles near the apex need the
    // full precision in x to land on the level
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shape.value(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(x)
}

pub fn build_vase_grid(shape: Arc<dyn Shape>, resolution: usize, layers: usize) -> Result<VaseGrid> {
    if resolution == 0 || layers == 0 {
        return Err(Error::domain("vase grid needs positive resolution and layers"));
    }
    if shape.value(0.0) != 0.0 {
        return Err(Error::domain("shape must satisfy h(0) = 0"));
    }
    if let Some(b) = shape.domain_hint() {
        let top = layers as f64 / resolution as f64;
        if shape.value(b) < top - LEVEL_TOL {
            return Err(Error::domain(format!(
                "h({b}) = {} does not reach level K/N = {top}",
                shape.value(b)
            )));
        }
    }

    let n = resolution as f64;
    let mut abscissas = Vec::with_capacity(layers + 1);
    abscissas.push(0.0);
    for k in 1..=layers {
        let level = k as f64 / n;
        let prev = abscissas[k - 1];
        let x = invert(shape.as_ref(), level, prev)?;
        if x <= prev {
            return Err(Error::domain(format!("non-monotone shape near x = {x}")));
        }
        // sample the segment for interior dips
        for j in 1..8 {
            let t = prev + (x - prev) * j as f64 / 8.0;
            let v = shape.value(t);
            if !(v > shape.value(prev) - LEVEL_TOL && v < level + LEVEL_TOL) {
                return Err(Error::domain(format!("non-monotone shape between {prev} and {x}")));
            }
        }
        if (shape.value(x) - level).abs() > LEVEL_TOL {
            return Err(Error::domain(format!(
                "h(x_{k}) = {} misses level {level}",
                shape.value(x)
            )));
        }
        abscissas.push(x);
    }

    let cotangents: Vec<f64> = abscissas.windows(2).map(|w| n * (w[1] - w[0])).collect();
    let angles = cotangents.iter().map(|c| (1.0 / c).atan()).collect();
    Ok(VaseGrid {
        shape,
        resolution,
        layers,
        abscissas,
        cotangents,
        angles,
    })
}
