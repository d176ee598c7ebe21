use clap::{Arg, ArgMatches};
use intertwine_core::analytics::{
    curves_csv, sc_map, watts_closed, watts_composed, watts_via_hypergeometric, watts_via_integral,
};
use serde_json::json;

use crate::{args, Check, CheckResult, CliError, Context, Outcome};

pub struct Watts;

impl Check for Watts {
    fn name(&self) -> &'static str {
        "watts"
    }

    fn about(&self) -> &'static str {
        "Last-side curves in closed form and the three-way identity"
    }

    fn args(&self) -> Vec<Arg> {
        vec![
            args::usize_arg("grid", "9", "Interior grid points (the CSV adds 0 and 1)"),
            args::f64_arg("tolerance", "1e-8", "Allowed pairwise gap of the three evaluations"),
            args::f64_arg("symmetry-tolerance", "1e-12", "Allowed defect of f(s) + f(1-s) = 1"),
        ]
    }

    fn run(&self, m: &ArgMatches, _ctx: &Context) -> Result<Outcome, CliError> {
        let grid: usize = args::get(m, "grid");
        if grid == 0 {
            return Err(CliError::Usage("--grid must be at least 1".into()));
        }
        let mut rows = Vec::with_capacity(grid);
        let (mut identity, mut symmetry): (f64, f64) = (0.0, 0.0);
        for i in 1..=grid {
            let a = i as f64 / (grid + 1) as f64;
            let (c, h, g) = (watts_closed(a)?, watts_via_hypergeometric(a)?, watts_via_integral(a)?);
            identity = identity.max((c - h).abs()).max((c - g).abs()).max((h - g).abs());
            symmetry = symmetry
                .max((c + watts_closed(1.0 - a)? - 1.0).abs())
                .max((sc_map(a)? + sc_map(1.0 - a)? - 1.0).abs());
            rows.push(json!({
                "a": a,
                "closed": c,
                "hypergeometric": h,
                "integral": g,
                "composed": watts_composed(a)?,
            }));
        }
        Ok(Outcome {
            seed: None,
            checks: vec![
                CheckResult::at_most("three-way identity (max pairwise gap)", identity, args::get(m, "tolerance")),
                CheckResult::at_most("symmetry (max defect)", symmetry, args::get(m, "symmetry-tolerance")),
            ],
            results: json!({ "rows": rows }),
            resolved: Default::default(),
            table: Some(curves_csv(grid)?),
        })
    }
}
