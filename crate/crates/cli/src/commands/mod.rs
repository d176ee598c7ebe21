//! The built-in subcommands.

mod bessel;
mod generator;
mod green;
mod intertwining;
mod reverse;
mod simulate;
mod strip;
mod watts;

use intertwine_core::geometry::WedgeSpec;
use clap::ArgMatches;
use intertwine_core::Angle;

use crate::{args, Check};

pub fn all() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(intertwining::VerifyIntertwining),
        Box::new(simulate::SimulateWedge),
        Box::new(simulate::SimulateVase),
        Box::new(green::Green),
        Box::new(reverse::Reverse),
        Box::new(watts::Watts),
        Box::new(bessel::BesselCheck),
        Box::new(strip::StripCheck),
        Box::new(generator::VaseGenerator),
    ]
}

fn wedge_spec(m: &ArgMatches, layers: usize) -> WedgeSpec {
    let alpha: Angle = args::get(m, "alpha");
    let mut spec = WedgeSpec::new(alpha, layers);
    if let Some(r) = m.get_one("apex-hold") {
        spec = spec.with_apex_hold(Clone::clone(r));
    }
    spec
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}

fn resolved_mode(mode: intertwine_core::Mode) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), mode.to_string().into());
    m
}
