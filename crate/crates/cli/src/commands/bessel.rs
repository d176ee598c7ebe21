use std::sync::Arc;

use clap::{Arg, ArgMatches};
use intertwine_core::analytics::{bessel3_hit, scale_hit};
use intertwine_core::geometry::{build_vase_grid, ShapeRegistry, WedgeSpec};
use intertwine_core::kernels::{projected_vase_rates, projected_wedge_chain};
use intertwine_core::simulation::{discrete_hit_prob, rate_hit_prob};
use intertwine_core::Angle;
use serde_json::json;

use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct BesselCheck;

/// Discrete and continuum probabilities of hitting `a` before `b` from `i`.
fn wedge_pair(alpha: Angle, i: usize, a: usize, b: usize) -> intertwine_core::Result<(f64, f64)> {
    let chain = projected_wedge_chain::<f64>(&WedgeSpec::new(alpha, b), b)?;
    Ok((discrete_hit_prob(&chain, i, a, b)?, bessel3_hit(i as f64, a as f64, b as f64)?))
}

impl Check for BesselCheck {
    fn name(&self) -> &'static str {
        "bessel-check"
    }

    fn about(&self) -> &'static str {
        "Projected-chain hitting probabilities against the continuum scale function"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::alpha("pi/4"),
            Arg::new("shape")
                .long("shape")
                .help("Use the projected vase chain of this shape (e.g. power:1.5) instead of the wedge chain"),
            args::usize_arg("resolution", "100", "Vase transverse resolution N"),
            args::fraction("apex-rate", "1/6", "Vase apex rate"),
            args::usize_arg("start", "50", "Start index i"),
            args::usize_arg("lower", "25", "Lower index a"),
            args::usize_arg("upper", "200", "Upper index b"),
            args::f64_arg("tolerance", "0.02", "Allowed absolute difference"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let (i, a, b): (usize, usize, usize) = (args::get(m, "start"), args::get(m, "lower"), args::get(m, "upper"));
        if !(1 <= a && a <= i && i <= b) {
            return Err(CliError::Usage(format!("need 1 <= lower <= start <= upper, got {a}, {i}, {b}")));
        }
        let tol: f64 = args::get(m, "tolerance");
        let (results, discrete, continuum) = match m.get_one::<String>("shape") {
            None => {
                let alpha: Angle = args::get(m, "alpha");
                let (d, c) = wedge_pair(alpha, i, a, b)?;
                let (d2, c2) = wedge_pair(alpha, 2 * i, 2 * a, 2 * b)?;
                let ratio = (d2 - c2).abs() / (d - c).abs();
                (
                    json!({
                        "chain": "wedge",
                        "discrete": d,
                        "continuum": c,
                        "doubled": { "discrete": d2, "continuum": c2, "difference_ratio": ratio },
                    }),
                    d,
                    c,
                )
            }
            Some(spec) => {
                let shape = ShapeRegistry::builtin().build(spec)?;
                let grid = build_vase_grid(Arc::clone(&shape), args::get(m, "resolution"), b)?;
                let rates = projected_vase_rates(&grid, args::rate(m, "apex-rate")?)?;
                let xs = &grid.abscissas;
                let d = rate_hit_prob(&rates, i, a, b)?;
                let c = scale_hit(shape.as_ref(), xs[i], xs[a], xs[b])?;
                (
                    json!({
                        "chain": "vase",
                        "abscissas": { "start": xs[i], "lower": xs[a], "upper": xs[b] },
                        "discrete": d,
                        "continuum": c,
                    }),
                    d,
                    c,
                )
            }
        };
        let table = format!("discrete,continuum,difference\n{discrete},{continuum},{}\n", (discrete - continuum).abs());
        Ok(Outcome {
            seed: None,
            checks: vec![CheckResult::at_most("|discrete - continuum|", (discrete - continuum).abs(), tol)],
            results,
            resolved: Default::default(),
            table: Some(table),
        })
    }
}
