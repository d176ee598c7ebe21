use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::{Error, Result};

/// Profile `h` of a vase `{Re z ≥ 0, |Im z| ≤ h(Re z)}`.
///
/// Implementations must satisfy `h(0) = 0`, `h > 0` on `(0, ∞)` and be
/// strictly increasing on their domain.
pub trait Shape: Send + Sync + Debug {
    /// Round-trippable spec string, e.g. `power:1.5`.
    fn describe(&self) -> String;

    fn value(&self, x: f64) -> f64;

    fn derivative(&self, x: f64) -> f64;

    /// Upper end of the domain, when the shape is only defined on `[0, b]`.
    fn domain_hint(&self) -> Option<f64> {
        None
    }
}

/// `h(x) = slope · x`; the wedge with `tan α = slope`.
#[derive(Clone, Debug)]
pub struct LinearShape {
    pub slope: f64,
}

impl LinearShape {
    pub fn new(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::domain(format!("linear slope {slope} must be positive")));
        }
        Ok(LinearShape { slope })
    }
}

impl Shape for LinearShape {
    fn describe(&self) -> String {
        format!("linear:{}", self.slope)
    }

    fn value(&self, x: f64) -> f64 {
        self.slope * x
    }

    fn derivative(&self, _x: f64) -> f64 {
        self.slope
    }
}

/// `h(x) = x^β`.
#[derive(Clone, Debug)]
pub struct PowerShape {
    pub exponent: f64,
}

impl PowerShape {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::domain(format!("power exponent {exponent} must be positive")));
        }
        Ok(PowerShape { exponent })
    }
}

impl Shape for PowerShape {
    fn describe(&self) -> String {
        format!("power:{}", self.exponent)
    }

    fn value(&self, x: f64) -> f64 {
        x.powf(self.exponent)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.exponent * x.powf(self.exponent - 1.0)
    }
}

/// Monotone cubic Hermite interpolant (Fritsch–Carlson) through tabulated
/// `(x, h(x))` points, starting at `(0, 0)`.
#[derive(Clone, Debug)]
pub struct TabulatedShape {
    xs: Vec<f64>,
    hs: Vec<f64>,
    slopes: Vec<f64>,
    source: String,
}

impl TabulatedShape {
    pub fn from_points(xs: Vec<f64>, hs: Vec<f64>) -> Result<Self> {
        if xs.len() != hs.len() {
            return Err(Error::Shape {
                what: "tabulated shape columns",
                expected: xs.len(),
                found: hs.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::domain("tabulated shape needs at least two points"));
        }
        if xs[0] != 0.0 || hs[0] != 0.0 {
            return Err(Error::domain("tabulated shape must start at (0, 0)"));
        }
        for w in xs.windows(2).zip(hs.windows(2)) {
            let ((x0, x1), (h0, h1)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
            if !(x1 > x0 && h1 > h0) {
                return Err(Error::domain("tabulated shape must be strictly increasing"));
            }
        }

        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (hs[i + 1] - hs[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
        for (i, &d) in secants.iter().enumerate() {
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let norm = a.hypot(b);
            if norm > 3.0 {
                let t = 3.0 / norm;
                slopes[i] = t * a * d;
                slopes[i + 1] = t * b * d;
            }
        }
        let source = xs
            .iter()
            .zip(&hs)
            .map(|(x, h)| format!("{x}:{h}"))
            .collect::<Vec<_>>()
            .join(",");
        Ok(TabulatedShape {
            xs,
            hs,
            slopes,
            source,
        })
    }

    /// Parses `x,h` rows, one per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut hs = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (x, h) = line
                .split_once([',', ':'])
                .ok_or_else(|| Error::Parse(format!("expected `x,h`, got `{line}`")))?;
            xs.push(parse_f64(x)?);
            hs.push(parse_f64(h)?);
        }
        Self::from_points(xs, hs)
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            i => (i - 1).min(self.xs.len() - 2),
        }
    }
}

impl Shape for TabulatedShape {
    fn describe(&self) -> String {
        format!("table:{}", self.source)
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let w = x1 - x0;
        let t = (x - x0) / w;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.hs[i]
            + (t3 - 2.0 * t2 + t) * w * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.hs[i + 1]
            + (t3 - t2) * w * self.slopes[i + 1]
    }

    fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let w = x1 - x0;
        let t = (x - x0) / w;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.hs[i]
            + (-6.0 * t2 + 6.0 * t) * self.hs[i + 1])
            / w
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[i]
            + (3.0 * t2 - 2.0 * t) * self.slopes[i + 1]
    }

    fn domain_hint(&self) -> Option<f64> {
        self.xs.last().copied()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

pub type ShapeFactory = fn(Option<&str>) -> Result<Arc<dyn Shape>>;

/// Shape constructors addressable by name, so configuration can select a
/// profile with a string like `power:1.5`.
#[derive(Clone)]
pub struct ShapeRegistry {
    factories: BTreeMap<String, ShapeFactory>,
}

impl ShapeRegistry {
    pub fn empty() -> Self {
        ShapeRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// `linear[:slope]`, `power[:exponent]` and `table:<x:h,x:h,...|path>`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("linear", |arg| {
            let slope = arg.map(parse_f64).transpose()?.unwrap_or(1.0);
            Ok(Arc::new(LinearShape::new(slope)?))
        });
        reg.register("power", |arg| {
            let exponent = arg.map(parse_f64).transpose()?.unwrap_or(1.0);
            Ok(Arc::new(PowerShape::new(exponent)?))
        });
        reg.register("table", |arg| {
            let arg = arg.ok_or_else(|| Error::Parse("table shape needs points or a file path".into()))?;
            let text = if arg.contains(':') && !std::path::Path::new(arg).exists() {
                arg.replace(',', "\n")
            } else {
                std::fs::read_to_string(arg).map_err(|e| Error::Parse(format!("{arg}: {e}")))?
            };
            Ok(Arc::new(TabulatedShape::parse(&text)?))
        });
        reg
    }

    pub fn register(&mut self, name: &str, factory: ShapeFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &str) -> Result<Arc<dyn Shape>> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::Parse(format!(
                "unknown shape `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(arg)
    }
}

impl Default for ShapeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
