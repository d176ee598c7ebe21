use std::sync::Arc;

use clap::{Arg, ArgMatches};
use intertwine_core::experiments::{hitting_report, simulate_vase, simulate_wedge, watts_comparison};
use intertwine_core::geometry::ShapeRegistry;
use intertwine_core::kernels::transverse_scheme;
use intertwine_core::simulation::{PathRecord, RunConfig};
use serde_json::json;

use super::{to_value, wedge_spec};
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

fn run_args() -> Vec<Arg> {
    vec![
        args::u64_arg("paths", "100000", "Number of paths"),
        args::u64_arg("seed", "7", "Master seed"),
        args::usize_arg("bins", "20", "Bins of the last-side curve"),
        args::u64_arg("step-cap", "100000000", "Per-path step cap"),
        args::f64_arg("level", "0.001", "Significance level of the uniformity test"),
        args::f64_arg("sigma", "4", "Allowed |z| for each symmetric exit pair"),
    ]
}

fn run_config(m: &ArgMatches, ctx: &Context) -> Result<RunConfig, CliError> {
    let paths: u64 = args::get(m, "paths");
    if paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    Ok(RunConfig::new(paths, args::get(m, "seed"))
        .with_workers(ctx.workers)
        .with_step_cap(args::get(m, "step-cap")))
}

fn summarize(records: &[PathRecord], layer: usize, m: &ArgMatches, config: &RunConfig) -> Result<Outcome, CliError> {
    let hitting = hitting_report(records, layer, config)?;
    let cmp = watts_comparison(records, layer, args::get(m, "bins"), 3.0)?;
    let level: f64 = args::get(m, "level");
    let checks = vec![
        CheckResult::above("exit law uniform (chi-square p)", hitting.uniformity.p_value, level),
        CheckResult::at_most("exit law symmetric (max |z|)", hitting.symmetry_max_z, args::get(m, "sigma")),
    ];
    Ok(Outcome {
        seed: Some(config.seed),
        checks,
        results: json!({
            "n_paths": config.n_paths,
            "stop_layer": layer,
            "exit": to_value(&hitting.exit),
            "uniformity": to_value(&hitting.uniformity),
            "symmetry_max_z": hitting.symmetry_max_z,
            "mean_steps": hitting.mean_steps,
            "undefined": cmp.curve.undefined,
            "bins": to_value(&cmp.curve.bins),
            "scores": [to_value(&cmp.closed), to_value(&cmp.composed)],
        }),
        table: Some(cmp.curve.to_csv()),
        resolved: Default::default(),
    })
}

pub struct SimulateWedge;

impl Check for SimulateWedge {
    fn name(&self) -> &'static str {
        "simulate-wedge"
    }

    fn about(&self) -> &'static str {
        "Apex-started wedge walks: exit law and last-side curve"
    }

    fn args(&self) -> Vec<Arg> {
        let mut a = vec![
            args::alpha("pi/6"),
            args::usize_arg("stop-layer", "30", "Absorbing layer M"),
            args::apex_hold(),
        ];
        a.extend(run_args());
        a
    }

    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Outcome, CliError> {
        let layer: usize = args::get(m, "stop-layer");
        let config = run_config(m, ctx)?;
        let records = simulate_wedge(&wedge_spec(m, layer), &config)?;
        summarize(&records, layer, m, &config)
    }
}

pub struct SimulateVase;

impl Check for SimulateVase {
    fn name(&self) -> &'static str {
        "simulate-vase"
    }

    fn about(&self) -> &'static str {
        "Apex-started vase walks (embedded jump chain): exit law and last-side curve"
    }

    fn args(&self) -> Vec<Arg> {
        let mut a = vec![
            args::string_arg("shape", "power:2", "Vase shape: linear[:slope], power[:exponent], table:<x:h,...|file>"),
            args::usize_arg("resolution", "20", "Transverse resolution N"),
            args::usize_arg("stop-layer", "20", "Absorbing layer K"),
            args::string_arg("scheme", "fiber-balanced", "Transverse rates: fiber-balanced or isotropic"),
            args::fraction("apex-rate", "1/6", "Apex rate to each layer-1 site"),
        ];
        a.extend(run_args());
        a
    }

    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Outcome, CliError> {
        let layer: usize = args::get(m, "stop-layer");
        let config = run_config(m, ctx)?;
        let shape = ShapeRegistry::builtin().build(&args::get::<String>(m, "shape"))?;
        let scheme = transverse_scheme(&args::get::<String>(m, "scheme"))?;
        let records = simulate_vase(
            Arc::clone(&shape),
            args::get(m, "resolution"),
            layer,
            args::rate(m, "apex-rate")?,
            scheme.as_ref(),
            &config,
        )?;
        summarize(&records, layer, m, &config)
    }
}
