//! Argument builders and accessors shared by the commands.

use std::str::FromStr;

use clap::{Arg, ArgMatches};
use intertwine_core::value::parse_rational;
use intertwine_core::{Angle, Mode};
use num::rational::BigRational;

use crate::CliError;

fn parse_angle(s: &str) -> Result<Angle, String> {
    Angle::from_str(s).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::from_str(s).map_err(|e| e.to_string())
}

fn parse_fraction(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

pub fn alpha(default: &'static str) -> Arg {
    Arg::new("alpha")
        .long("alpha")
        .value_parser(parse_angle)
        .default_value(default)
        .help("Half-opening angle: radians, or pi/6, pi/4, pi/3 (exact)")
}

pub fn mode() -> Arg {
    Arg::new("mode")
        .long("mode")
        .value_parser(parse_mode)
        .help("rational or float; defaults to rational for pi/6, pi/4, pi/3")
}

pub fn apex_hold() -> Arg {
    Arg::new("apex-hold")
        .long("apex-hold")
        .value_parser(parse_fraction)
        .help("Apex jump probability r to each layer-1 site (default min(1/3, cos^2/2))")
}

pub fn usize_arg(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(clap::value_parser!(usize))
        .default_value(default)
        .help(help)
}

pub fn u64_arg(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(clap::value_parser!(u64))
        .default_value(default)
        .help(help)
}

pub fn f64_arg(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(clap::value_parser!(f64))
        .default_value(default)
        .help(help)
}

pub fn f64_list(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(clap::value_parser!(f64))
        .value_delimiter(',')
        .num_args(1..)
        .default_value(default)
        .help(help)
}

pub fn string_arg(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id).long(id).default_value(default).help(help)
}

pub fn choice(id: &'static str, values: &[&'static str], default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(values.to_vec())
        .default_value(default)
        .help(help)
}

pub fn get<T: Clone + Send + Sync + 'static>(m: &ArgMatches, id: &str) -> T {
    m.get_one::<T>(id).cloned().expect("argument has a default")
}

pub fn list<T: Clone + Send + Sync + 'static>(m: &ArgMatches, id: &str) -> Vec<T> {
    m.get_many::<T>(id).map(|v| v.cloned().collect()).unwrap_or_default()
}

/// Requested mode, falling back to rational when the angle allows it.
pub fn resolve_mode(m: &ArgMatches, angle: Angle) -> Result<Mode, CliError> {
    match m.get_one::<Mode>("mode") {
        Some(Mode::Rational) if angle.sin2_exact().is_none() => Err(CliError::Usage(format!(
            "rational mode needs alpha in pi/6, pi/4, pi/3 (got {angle})"
        ))),
        Some(mode) => Ok(*mode),
        None if angle.sin2_exact().is_some() => Ok(Mode::Rational),
        None => Ok(Mode::Float),
    }
}

pub fn rate(m: &ArgMatches, id: &str) -> Result<f64, CliError> {
    let r: BigRational = get(m, id);
    num::ToPrimitive::to_f64(&r).ok_or_else(|| CliError::Usage(format!("--{id} is not a finite number")))
}

pub fn fraction(id: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(id)
        .long(id)
        .value_parser(parse_fraction)
        .default_value(default)
        .help(help)
}
