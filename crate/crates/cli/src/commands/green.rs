use clap::{Arg, ArgMatches};
use intertwine_core::geometry::{build_wedge_lattice, layer_range, WedgeSpec};
use intertwine_core::green::{fit_green_constant, green_vector, StateSpace};
use intertwine_core::kernels::{projected_wedge_chain, wedge_kernel};
use intertwine_core::{Mode, Value};
use num::rational::BigRational;
use serde_json::json;

use super::{resolved_mode, to_value, wedge_spec};
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct Green;

struct Solved {
    fit: intertwine_core::green::GreenFit,
    /// `max |(2k+1) G(0,(k,y)) − G̃(0,k)| / G̃(0,k)`, when sites were solved.
    factorization: Option<f64>,
    exact: bool,
    csv: String,
}

fn solve<T: Value>(spec: &WedgeSpec, sites: bool) -> intertwine_core::Result<Solved> {
    let n = spec.layers;
    let chain = projected_wedge_chain::<T>(spec, n)?;
    let g1 = green_vector(&chain, 0, n)?;
    let fit = fit_green_constant(&g1, spec.alpha.sin2::<f64>()?)?;
    if !sites {
        return Ok(Solved {
            fit,
            factorization: None,
            exact: T::EXACT,
            csv: g1.to_csv(StateSpace::Layers),
        });
    }
    let lattice = build_wedge_lattice(spec)?;
    let g2 = green_vector(&wedge_kernel::<T>(&lattice, n)?, 0, n)?;
    let mut worst = T::zero();
    for k in 0..n {
        let width = T::ratio(2 * k as i64 + 1, 1);
        for i in layer_range(k) {
            let d = ((g2.get(i).clone() * width.clone() - g1.get(k).clone()) / g1.get(k).clone()).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(Solved {
        fit,
        factorization: Some(worst.to_f64()),
        exact: T::EXACT,
        csv: g2.to_csv(StateSpace::Sites),
    })
}

impl Check for Green {
    fn name(&self) -> &'static str {
        "green"
    }

    fn about(&self) -> &'static str {
        "Green function from the apex: linear solve against the closed form"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::alpha("pi/4"),
            args::usize_arg("layers", "50", "Absorbing layer N"),
            args::mode(),
            args::apex_hold(),
            args::choice("space", &["layers", "sites"], "layers", "Report the 1-D chain or the 2-D walk"),
            args::f64_arg("tolerance", "1e-10", "Allowed relative variation of the fitted constant"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let spec = wedge_spec(m, args::get(m, "layers"));
        let sites = args::get::<String>(m, "space") == "sites";
        let mode = args::resolve_mode(m, spec.alpha)?;
        let solved = match mode {
            Mode::Rational => solve::<BigRational>(&spec, sites)?,
            Mode::Float => solve::<f64>(&spec, sites)?,
        };
        let tol: f64 = args::get(m, "tolerance");
        let mut checks = vec![CheckResult::at_most(
            "G(0,y)/((2y+1)(1-(2y+1)/(2N+1))) constant (relative variation)",
            solved.fit.relative_variation,
            tol,
        )];
        if let Some(gap) = solved.factorization {
            checks.push(CheckResult::zero(
                "G(0,(k,y)) = G~(0,k)/(2k+1) (relative gap)",
                gap,
                solved.exact,
                tol,
            ));
        }
        Ok(Outcome {
            seed: None,
            checks,
            results: json!({
                "fit": to_value(&solved.fit),
                "factorization_gap": solved.factorization,
            }),
            resolved: resolved_mode(mode),
            table: Some(solved.csv),
        })
    }
}
