//! One-dimensional diffusion facts used as oracles for the projected chains.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::Quadrature;
use crate::error::domain;
use crate::geometry::{build_vase_grid, Shape};
use crate::kernels::projected_vase_rates;
use crate::Result;

/// Probability that a 3-dimensional Bessel process from `x` hits `a`
/// before `b`.
pub fn bessel3_hit(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a <= x && x <= b) {
        return Err(domain(format!("need 0 < a <= x <= b, got a={a}, x={x}, b={b}")));
    }
    if b.is_infinite() {
        return Ok(a / x);
    }
    Ok((1.0 / x - 1.0 / b) / (1.0 / a - 1.0 / b))
}

/// `φ(x) = ∫_1^x du / h(u)²`, a scale function of `(h′/h) ∂ + ½ ∂²`.
pub fn scale_function(shape: &dyn Shape, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("scale function needs x > 0, got {x}")));
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if x < 1.0 { (x, 1.0) } else { (1.0, x) };
    if shape.value(lo) <= 0.0 {
        return Err(domain(format!("h({lo}) = {} is not positive", shape.value(lo))));
    }
    let q = Quadrature::with_tolerance(1e-12);
    // u = lo·e^s spreads the mass of fast-decaying integrands
    let r = q.integrate(
        |s| {
            let u = lo * s.exp();
            u / shape.value(u).powi(2)
        },
        0.0,
        (hi / lo).ln(),
    )?;
    Ok(if x < 1.0 { -r.value } else { r.value })
}

/// `P(hit a before b | start x)` from a scale function.
pub fn scale_hit(shape: &dyn Shape, x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a <= x && x <= b) {
        return Err(domain(format!("need 0 < a <= x <= b, got a={a}, x={x}, b={b}")));
    }
    let (px, pa, pb) = (scale_function(shape, x)?, scale_function(shape, a)?, scale_function(shape, b)?);
    Ok((px - pb) / (pa - pb))
}

/// A test function with its first two derivatives.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name)
    }
}

impl TestFunction {
    pub fn exp_decay() -> Self {
        TestFunction {
            name: "exp(-x)".into(),
            f: Arc::new(|x: f64| (-x).exp()),
            df: Arc::new(|x: f64| -(-x).exp()),
            d2f: Arc::new(|x: f64| (-x).exp()),
        }
    }

    pub fn square() -> Self {
        TestFunction {
            name: "x^2".into(),
            f: Arc::new(|x| x * x),
            df: Arc::new(|x| 2.0 * x),
            d2f: Arc::new(|_| 2.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFunction {
            name: format!("{c}"),
            f: Arc::new(move |_| c),
            df: Arc::new(|_| 0.0),
            d2f: Arc::new(|_| 0.0),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exp" | "exp(-x)" => Ok(Self::exp_decay()),
            "square" | "x^2" => Ok(Self::square()),
            "one" | "1" => Ok(Self::constant(1.0)),
            other => Err(crate::Error::Parse(format!(
                "unknown test function `{other}` (known: exp, square, one)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResidual {
    pub resolution: usize,
    pub layer: usize,
    pub grid_point: f64,
    pub discrete: f64,
    pub continuum: f64,
    pub residual: f64,
}

/// `|N² (Q̃f)(x_k) − ((h′/h) f′ + ½ f″)(x)|` with `x_k` the grid point
/// nearest `x` on the vase grid of resolution `N`.
pub fn generator_residual(
    shape: Arc<dyn Shape>,
    test: &TestFunction,
    x: f64,
    resolution: usize,
) -> Result<GeneratorResidual> {
    let level = shape.value(x);
    if !(level.is_finite() && level > 0.0) {
        return Err(domain(format!("h({x}) = {level} must be positive")));
    }
    let n = resolution as f64;
    let layers = (level * n).ceil() as usize + 2;
    let grid = build_vase_grid(shape.clone(), resolution, layers)?;
    let k = grid.nearest_layer(x);
    if k < 2 || k + 1 >= layers {
        return Err(domain(format!("x = {x} is too close to the apex at resolution {resolution}")));
    }
    let rates = projected_vase_rates(&grid, crate::kernels::DEFAULT_APEX_RATE)?;
    let xs = &grid.abscissas;
    let f = &test.f;
    let discrete = n * n
        * (rates.rate(k, k + 1) * (f(xs[k + 1]) - f(xs[k])) + rates.rate(k, k - 1) * (f(xs[k - 1]) - f(xs[k])));
    let continuum = shape.derivative(x) / shape.value(x) * (test.df)(x) + 0.5 * (test.d2f)(x);
    Ok(GeneratorResidual {
        resolution,
        layer: k,
        grid_point: xs[k],
        discrete,
        continuum,
        residual: (discrete - continuum).abs(),
    })
}
