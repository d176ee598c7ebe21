use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// Gauss–Kronrod 7/15 abscissas and weights on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Globally adaptive Gauss–Kronrod (7/15) integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    /// Absolute error target.
    pub tolerance: f64,
    /// Relative error target; the looser of the two applies.
    pub relative: f64,
    /// Maximum number of integrand evaluations.
    pub budget: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            tolerance: 1e-10,
            relative: 0.0,
            budget: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut absolute = WGK[7] * fc.abs();
    for i in 0..7 {
        let x = h * XGK[i];
        let (lo, hi) = (f(c - x), f(c + x));
        kronrod += WGK[i] * (lo + hi);
        absolute += WGK[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    // the difference cannot resolve below rounding in the sum itself
    let roundoff = 5.0 * f64::EPSILON * absolute * h.abs();
    (kronrod * h, ((kronrod - gauss) * h).abs().max(roundoff))
}

impl Quadrature {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Quadrature {
            tolerance,
            ..Default::default()
        }
    }

    pub fn with_relative(mut self, relative: f64) -> Self {
        self.relative = relative;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.tolerance.max(self.relative * value.abs())
    }

    /// `∫_a^b f`. The integrand must be finite on the closed interval; move
    /// endpoint singularities out with a substitution first.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<Integral> {
        if a == b {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let (value, error) = gk15(&mut f, a, b);
        let mut evaluations = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let (mut total, mut err) = (value, error);
        while err > self.target(total) {
            if !total.is_finite() {
                return Err(Error::domain("integrand is not finite on the interval"));
            }
            if evaluations + 30 > self.budget {
                return Err(Error::Quadrature {
                    tolerance: self.tolerance,
                    estimate: err,
                    budget: self.budget,
                });
            }
            let worst = heap.pop().expect("heap holds at least one segment");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // cannot split further; accept what is left
                heap.push(worst);
                break;
            }
            let (v1, e1) = gk15(&mut f, worst.a, mid);
            let (v2, e2) = gk15(&mut f, mid, worst.b);
            evaluations += 30;
            total += v1 + v2 - worst.value;
            err += e1 + e2 - worst.error;
            heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
            // resum occasionally so the running totals do not drift
            if heap.len() % 64 == 0 {
                total = heap.iter().map(|s| s.value).sum();
                err = heap.iter().map(|s| s.error).sum();
            }
        }
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if error > self.target(value) {
            return Err(Error::Quadrature {
                tolerance: self.tolerance,
                estimate: error,
                budget: self.budget,
            });
        }
        Ok(Integral {
            value,
            error,
            evaluations,
        })
    }

    /// `∫_0^s t^{e0} (1 − t)^{e1} g(t, 1 − t) dt` for `0 ≤ s ≤ 1/2` and
    /// `e0 > −1`. A negative `e0` is removed by `t = v^m`, `m = 1/(1 + e0)`,
    /// which turns `t^{e0} dt` into `m dv`.
    pub fn left_singular(
        &self,
        e0: f64,
        e1: f64,
        mut g: impl FnMut(f64, f64) -> f64,
        s: f64,
    ) -> Result<Integral> {
        if !(e0 > -1.0) {
            return Err(Error::domain(format!("exponent {e0} is not integrable at 0")));
        }
        if e0 < 0.0 {
            let m = 1.0 / (1.0 + e0);
            self.integrate(
                |v| {
                    let t = v.powf(m);
                    m * (1.0 - t).powf(e1) * g(t, 1.0 - t)
                },
                0.0,
                s.powf(1.0 / m),
            )
        } else {
            self.integrate(|t| t.powf(e0) * (1.0 - t).powf(e1) * g(t, 1.0 - t), 0.0, s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(10) - 3.0 * x, 0.0, 2.0).unwrap();
        assert!((r.value - (2f64.powi(11) / 11.0 - 6.0)).abs() < 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let q = Quadrature::with_tolerance(1e-12);
        let r = q.integrate(|x| (50.0 * x).sin(), 0.0, 3.0).unwrap();
        assert!((r.value - (1.0 - 150f64.cos()) / 50.0).abs() < 1e-12);
        let q = q.with_relative(1e-13);
        let r = q.integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0).unwrap();
        assert!((r.value - 2.0 * 100.0 * (100f64).atan()).abs() < 1e-9);
    }

    #[test]
    fn singular_endpoint_substitution() {
        let q = Quadrature::with_tolerance(1e-13);
        // ∫_0^{1/2} t^{-2/3} dt = 3 (1/2)^{1/3}
        let r = q.left_singular(-2.0 / 3.0, 0.0, |_, _| 1.0, 0.5).unwrap();
        assert!((r.value - 3.0 * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-13);
        let r = q.left_singular(-0.5, 0.0, |t, _| t, 0.25).unwrap();
        assert!((r.value - 2.0 / 3.0 * 0.125).abs() < 1e-13);
        assert!(q.left_singular(-1.0, 0.0, |_, _| 1.0, 0.5).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = Quadrature {
            tolerance: 1e-14,
            relative: 0.0,
            budget: 100,
        };
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
