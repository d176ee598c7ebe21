use std::sync::Arc;

use clap::{Arg, ArgMatches};
use intertwine_core::analytics::{generator_residual, TestFunction};
use intertwine_core::geometry::ShapeRegistry;
use serde_json::json;

use super::to_value;
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct VaseGenerator;

impl Check for VaseGenerator {
    fn name(&self) -> &'static str {
        "vase-generator"
    }

    fn about(&self) -> &'static str {
        "Projected vase generator against its diffusion limit as the resolution grows"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::string_arg("shape", "power:2", "Vase shape"),
            args::string_arg("function", "exp", "Test function: exp, square or one"),
            args::f64_arg("x", "1", "Evaluation point"),
            Arg::new("resolutions")
                .long("resolutions")
                .value_parser(clap::value_parser!(usize))
                .value_delimiter(',')
                .num_args(1..)
                .default_value("64,128,256")
                .help("Resolutions N, each double the previous for the ratio check"),
            args::f64_arg("ratio-min", "0.3", "Lower bound on residual(2N)/residual(N)"),
            args::f64_arg("ratio-max", "0.7", "Upper bound on residual(2N)/residual(N)"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let shape = ShapeRegistry::builtin().build(&args::get::<String>(m, "shape"))?;
        let f = TestFunction::parse(&args::get::<String>(m, "function"))?;
        let x: f64 = args::get(m, "x");
        let resolutions = args::list::<usize>(m, "resolutions");
        let rows = resolutions
            .iter()
            .map(|&n| generator_residual(Arc::clone(&shape), &f, x, n))
            .collect::<intertwine_core::Result<Vec<_>>>()?;
        let (lo, hi): (f64, f64) = (args::get(m, "ratio-min"), args::get(m, "ratio-max"));
        let mut checks = Vec::new();
        for w in rows.windows(2) {
            let name = format!("residual({})/residual({})", w[1].resolution, w[0].resolution);
            if w[0].residual == 0.0 && w[1].residual == 0.0 {
                // a test function the discrete generator reproduces exactly
                checks.push(CheckResult::at_most(name, 0.0, 0.0));
            } else {
                checks.push(CheckResult::within(name, w[1].residual / w[0].residual, lo, hi));
            }
        }
        let mut table = String::from("resolution,layer,grid_point,discrete,continuum,residual\n");
        for r in &rows {
            table.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.resolution, r.layer, r.grid_point, r.discrete, r.continuum, r.residual
            ));
        }
        Ok(Outcome {
            seed: None,
            checks,
            results: json!({ "rows": to_value(&rows) }),
            resolved: Default::default(),
            table: Some(table),
        })
    }
}
