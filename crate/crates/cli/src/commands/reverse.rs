use clap::{Arg, ArgMatches};
use intertwine_core::experiments::reversal_consistency;
use intertwine_core::geometry::{build_wedge_lattice, WedgeSpec};
use intertwine_core::green::{green_vector, nagasawa_reverse, path_reversal_gap, reversal_table_gap};
use intertwine_core::kernels::wedge_kernel;
use intertwine_core::simulation::RunConfig;
use intertwine_core::{Mode, Value};
use num::rational::BigRational;
use serde_json::json;

use super::{resolved_mode, to_value, wedge_spec};
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct Reverse;

fn reversed_table<T: Value>(spec: &WedgeSpec) -> intertwine_core::Result<(f64, bool, String)> {
    let n = spec.layers;
    let p = wedge_kernel::<T>(&build_wedge_lattice(spec)?, n)?;
    let rev = nagasawa_reverse(&p, &green_vector(&p, 0, n)?)?;
    let gap = reversal_table_gap(&rev, n, &spec.alpha.sin2::<T>()?);
    Ok((gap.to_f64(), T::EXACT, rev.kernel.to_triplets()))
}

impl Check for Reverse {
    fn name(&self) -> &'static str {
        "reverse"
    }

    fn about(&self) -> &'static str {
        "Time-reversed wedge walk: closed-form table, path identity and simulated consistency"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::alpha("pi/6"),
            args::usize_arg("layers", "10", "Absorbing layer N"),
            args::mode(),
            args::apex_hold(),
            args::usize_arg("enumerate-layers", "3", "Absorbing layer for the exhaustive path check"),
            args::usize_arg("max-length", "8", "Longest path enumerated"),
            args::u64_arg("paths", "100000", "Paths per direction for the simulated check (0 skips it)"),
            args::u64_arg("seed", "7", "Master seed"),
            args::f64_arg("tolerance", "1e-12", "Float tolerance for the table"),
            args::f64_arg("level", "0.001", "Significance level of the simulated check"),
        ]
    }

    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Outcome, CliError> {
        let spec = wedge_spec(m, args::get(m, "layers"));
        let mode = args::resolve_mode(m, spec.alpha)?;
        let (gap, exact, triplets) = match mode {
            Mode::Rational => reversed_table::<BigRational>(&spec)?,
            Mode::Float => reversed_table::<f64>(&spec)?,
        };
        let tol: f64 = args::get(m, "tolerance");
        let mut checks = vec![CheckResult::zero("reversed kernel matches the table", gap, exact, tol)];

        let small = wedge_spec(m, args::get(m, "enumerate-layers"));
        let max_len: usize = args::get(m, "max-length");
        let (paths, path_gap) = match mode {
            Mode::Rational => {
                let p = wedge_kernel::<BigRational>(&build_wedge_lattice(&small)?, small.layers)?;
                let rev = nagasawa_reverse(&p, &green_vector(&p, 0, small.layers)?)?;
                let (c, g) = path_reversal_gap(&p, &rev, 0, small.layers, max_len);
                (c, g.to_f64())
            }
            Mode::Float => {
                let p = wedge_kernel::<f64>(&build_wedge_lattice(&small)?, small.layers)?;
                let rev = nagasawa_reverse(&p, &green_vector(&p, 0, small.layers)?)?;
                path_reversal_gap(&p, &rev, 0, small.layers, max_len)
            }
        };
        checks.push(CheckResult::zero("path probability = reversed path probability", path_gap, exact, tol));

        let n_paths: u64 = args::get(m, "paths");
        let seed: u64 = args::get(m, "seed");
        let simulated = if n_paths > 0 {
            let config = RunConfig::new(n_paths, seed).with_workers(ctx.workers);
            let c = reversal_consistency(&spec, &config)?;
            let level: f64 = args::get(m, "level");
            checks.push(CheckResult::above("exit law: forward vs reversed (chi-square p)", c.exit_law.p_value, level));
            checks.push(CheckResult::above(
                "(exit, side): forward vs reversed (chi-square p)",
                c.joint.p_value,
                level,
            ));
            checks.push(CheckResult::at_most("reversed paths killed off the apex", c.misplaced_kills as f64, 0.0));
            Some(c)
        } else {
            None
        };
        Ok(Outcome {
            seed: simulated.as_ref().map(|_| seed),
            checks,
            results: json!({
                "table_gap": gap,
                "enumerated_paths": paths,
                "path_gap": path_gap,
                "consistency": simulated.as_ref().map(to_value),
            }),
            resolved: resolved_mode(mode),
            table: Some(format!(
                "{}\n{triplets}",
                if exact { "from,to,num,den" } else { "from,to,value" }
            )),
        })
    }
}
