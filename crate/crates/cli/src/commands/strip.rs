use clap::{Arg, ArgMatches};
use intertwine_core::analytics::ks_uniform;
use intertwine_core::simulation::strip_seesaw_samples;
use serde_json::json;

use super::to_value;
use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct StripCheck;

impl Check for StripCheck {
    fn name(&self) -> &'static str {
        "strip-check"
    }

    fn about(&self) -> &'static str {
        "Uniformity of the folded Gaussian in the unit strip"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::f64_list("times", "0.25,1,4", "Variances t of the Gaussian displacement"),
            args::usize_arg("samples", "100000", "Samples per time"),
            args::u64_arg("seed", "11", "Master seed; time j uses seed + j"),
            args::f64_arg("level", "0.001", "Significance level of the KS test"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let seed: u64 = args::get(m, "seed");
        let level: f64 = args::get(m, "level");
        let mut checks = Vec::new();
        let mut rows = Vec::new();
        let mut table = String::from("t,n,distance,critical_0_001,p_value\n");
        for (j, t) in args::list::<f64>(m, "times").into_iter().enumerate() {
            let ks = ks_uniform(&strip_seesaw_samples(t, args::get(m, "samples"), seed.wrapping_add(j as u64))?)?;
            checks.push(CheckResult::above(format!("KS uniform at t={t} (p)"), ks.p_value, level));
            table.push_str(&format!("{t},{},{},{},{}\n", ks.n, ks.distance, ks.critical_0_001, ks.p_value));
            rows.push(json!({ "t": t, "ks": to_value(&ks) }));
        }
        Ok(Outcome {
            seed: Some(seed),
            checks,
            results: json!({ "times": rows }),
            resolved: Default::default(),
            table: Some(table),
        })
    }
}
