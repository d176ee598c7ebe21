use std::sync::Arc;

use clap::{Arg, ArgMatches};
use intertwine_core::geometry::{build_vase_grid, build_wedge_lattice, ShapeRegistry, WedgeSpec};
use intertwine_core::intertwining::{
    build_link, harmonic_residual, kernel_residual, rate_residual, semigroup_residual, ResidualReport,
};
use intertwine_core::kernels::{
    projected_vase_rates, projected_wedge_chain, transverse_scheme, vase_rate_matrix, wedge_kernel,
};
use intertwine_core::{Mode, Value};
use num::rational::BigRational;
use serde_json::json;

use super::{resolved_mode, wedge_spec};
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct VerifyIntertwining;

/// Each report with the tolerance it was judged against.
type Reports = Vec<(ResidualReport, f64)>;

fn wedge_reports<T: Value>(spec: &WedgeSpec, tol: f64) -> intertwine_core::Result<Reports> {
    let n = spec.layers;
    let lattice = build_wedge_lattice(spec)?;
    let two = wedge_kernel::<T>(&lattice, n)?;
    let one = projected_wedge_chain::<T>(spec, n)?;
    let link = build_link::<T>(n);
    Ok(vec![
        (
            ResidualReport::new::<T>("Lambda P = Q Lambda", two.len(), &kernel_residual(&link, &two, &one)?, tol),
            tol,
        ),
        (
            ResidualReport::new::<T>("q harmonic for 1/(2i+1)", one.len(), &harmonic_residual(&one), tol),
            tol,
        ),
    ])
}

impl Check for VerifyIntertwining {
    fn name(&self) -> &'static str {
        "verify-intertwining"
    }

    fn about(&self) -> &'static str {
        "Residuals of the wedge or vase intertwining identities"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::choice("geometry", &["wedge", "vase"], "wedge", "Which walk to check"),
            args::alpha("pi/4"),
            args::usize_arg("layers", "50", "Layer count N (wedge) or K (vase)"),
            args::mode(),
            args::apex_hold(),
            args::string_arg("shape", "power:2", "Vase shape: linear[:slope], power[:exponent], table:<x:h,...|file>"),
            args::usize_arg("resolution", "32", "Vase transverse resolution N"),
            args::string_arg("scheme", "fiber-balanced", "Vase transverse rates: fiber-balanced or isotropic"),
            args::fraction("apex-rate", "1/6", "Vase apex rate to each layer-1 site"),
            args::f64_list("times", "0.1,1.0", "Vase semigroup check times"),
            args::f64_arg("tolerance", "1e-12", "Float tolerance for one-step residuals"),
            args::f64_arg("semigroup-tolerance", "1e-10", "Tolerance for semigroup residuals"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let tol: f64 = args::get(m, "tolerance");
        let layers: usize = args::get(m, "layers");
        let geometry: String = args::get(m, "geometry");
        let mut mode = Mode::Float;
        let reports = if geometry == "wedge" {
            let spec = wedge_spec(m, layers);
            mode = args::resolve_mode(m, spec.alpha)?;
            match mode {
                Mode::Rational => wedge_reports::<BigRational>(&spec, tol)?,
                Mode::Float => wedge_reports::<f64>(&spec, tol)?,
            }
        } else {
            if m.get_one::<Mode>("mode") == Some(&Mode::Rational) {
                return Err(CliError::Usage("the vase walk is checked in float mode only".into()));
            }
            let shape = ShapeRegistry::builtin().build(&args::get::<String>(m, "shape"))?;
            let grid = build_vase_grid(Arc::clone(&shape), args::get(m, "resolution"), layers)?;
            let apex = args::rate(m, "apex-rate")?;
            let scheme = transverse_scheme(&args::get::<String>(m, "scheme"))?;
            let two = vase_rate_matrix(&grid, apex, scheme.as_ref())?;
            let one = projected_vase_rates(&grid, apex)?;
            let link = build_link::<f64>(layers);
            let stol: f64 = args::get(m, "semigroup-tolerance");
            let mut reports = vec![(
                ResidualReport::new::<f64>("Lambda Q = Q~ Lambda", two.len(), &rate_residual(&link, &two, &one)?, tol),
                tol,
            )];
            for t in args::list::<f64>(m, "times") {
                let residual = semigroup_residual(&link, &two, &one, t)?;
                let identity = format!("Lambda exp(tQ) = exp(tQ~) Lambda at t={t}");
                reports.push((ResidualReport::new::<f64>(identity, two.len(), &residual, stol), stol));
            }
            reports
        };
        let checks = reports
            .iter()
            .map(|(r, tol)| CheckResult::zero(r.identity.clone(), r.residual, r.mode == "rational", *tol))
            .collect();
        let reports: Vec<ResidualReport> = reports.into_iter().map(|(r, _)| r).collect();
        let mut table = String::from("identity,mode,size,residual,pass\n");
        for r in &reports {
            table.push_str(&format!("\"{}\",{},{},{:e},{}\n", r.identity, r.mode, r.size, r.residual, r.pass));
        }
        Ok(Outcome {
            seed: None,
            checks,
            results: json!({ "reports": reports }),
            resolved: resolved_mode(mode),
            table: Some(table),
        })
    }
}
