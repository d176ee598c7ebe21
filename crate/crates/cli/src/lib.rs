//! Command-line front end.
//!
//! Every subcommand is a [`Check`] registered by name in a [`Registry`].
//! A run produces a [`Record`] that embeds the resolved parameters, the seed
//! and the toolkit version, plus a list of pass/fail checks that decide the
//! exit status.

mod args;
pub mod commands;
mod record;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};
use intertwine_core::VERSION;

pub use record::{CheckResult, Outcome, Record};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "INTERTWINE_OUTPUT_DIR";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Invalid parameters; exit status 2.
    Usage(String),
    /// The computation itself failed; exit status 1.
    Run(intertwine_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<intertwine_core::Error> for CliError {
    fn from(e: intertwine_core::Error) -> Self {
        use intertwine_core::Error as E;
        match e {
            E::Domain(_) | E::Parse(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Context {
    pub workers: usize,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn args(&self) -> Vec<Arg>;
    fn run(&self, matches: &ArgMatches, ctx: &Context) -> Result<Outcome, CliError>;
}

#[derive(Default)]
pub struct Registry {
    checks: Vec<Box<dyn Check>>,
}

impl Registry {
    pub fn builtin() -> Self {
        let mut r = Registry::default();
        for c in commands::all() {
            r.register(c);
        }
        r
    }

    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Check> {
        self.checks.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn command(&self) -> Command {
        let mut cmd = Command::new("intertwine")
            .version(VERSION)
            .about("Reflected random walks in wedges and vases: identity checks, simulations and closed forms")
            .subcommand_required(true)
            .arg_required_else_help(true);
        for c in &self.checks {
            let mut sub = Command::new(c.name()).about(c.about());
            for a in c.args() {
                sub = sub.arg(a);
            }
            cmd = cmd.subcommand(sub.args(common_args()));
        }
        cmd
    }
}

fn common_args() -> Vec<Arg> {
    vec![
        Arg::new("format")
            .long("format")
            .value_parser(["json", "csv"])
            .default_value("json")
            .help("Output format"),
        Arg::new("output")
            .long("output")
            .short('o')
            .value_parser(clap::value_parser!(PathBuf))
            .help(format!(
                "Output file; defaults to <${OUTPUT_DIR_ENV}>/<command>.<format> when that is set, else stdout"
            )),
        Arg::new("workers")
            .long("workers")
            .value_parser(clap::value_parser!(u64).range(1..))
            .default_value("1")
            .help("Worker threads for path simulation (results do not depend on it)"),
        Arg::new("quiet")
            .long("quiet")
            .action(ArgAction::SetTrue)
            .help("Do not print the failure report on stderr"),
    ]
}

/// Ids that do not change a run's content and stay out of the record.
const UNRECORDED: [&str; 3] = ["output", "format", "quiet"];

fn resolved_params(cmd: &Command, matches: &ArgMatches) -> serde_json::Map<String, serde_json::Value> {
    let mut params = serde_json::Map::new();
    for arg in cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if UNRECORDED.contains(&id) || matches!(id, "help" | "version") {
            continue;
        }
        let Ok(Some(raw)) = matches.try_get_raw(id) else {
            continue;
        };
        let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
        let value = match values.as_slice() {
            [one] => serde_json::Value::String(one.clone()),
            many => serde_json::Value::from(many.to_vec()),
        };
        params.insert(id.to_string(), value);
    }
    params
}

fn destination(matches: &ArgMatches, name: &str, format: &str) -> Option<PathBuf> {
    if let Some(p) = matches.get_one::<PathBuf>("output") {
        return Some(p.clone());
    }
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{name}.{format}")))
}

fn emit(text: &str, dest: Option<PathBuf>) -> std::io::Result<()> {
    match dest {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)
        }
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Parses `argv`, runs the selected command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Registry::builtin().run(argv)
}

impl Registry {
    pub fn run<I, T>(&self, argv: I) -> u8
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let mut cmd = self.command();
        let matches = match cmd.try_get_matches_from_mut(argv) {
            Ok(m) => m,
            Err(e) => {
                let _ = e.print();
                return match e.kind() {
                    clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                    _ => EXIT_USAGE,
                };
            }
        };
        let Some((name, sub)) = matches.subcommand() else {
            return EXIT_USAGE;
        };
        let check = self.get(name).expect("clap only accepts registered subcommands");
        let sub_cmd = cmd.find_subcommand(name).expect("registered subcommand");
        let params = resolved_params(sub_cmd, sub);
        let ctx = Context {
            workers: *sub.get_one::<u64>("workers").expect("defaulted") as usize,
        };
        let quiet = sub.get_flag("quiet");
        let format = sub.get_one::<String>("format").expect("defaulted").clone();

        let outcome = match check.run(sub, &ctx) {
            Ok(o) => o,
            Err(CliError::Usage(msg)) => {
                let _ = sub_cmd
                    .clone()
                    .error(clap::error::ErrorKind::ValueValidation, msg)
                    .print();
                return EXIT_USAGE;
            }
            Err(CliError::Run(e)) => {
                let report = record::error_report(name, &params, &e);
                eprintln!("{report}");
                return EXIT_CHECK_FAILED;
            }
        };
        let record = Record::new(name, params, outcome);
        let text = match format.as_str() {
            "csv" => record.to_csv(),
            _ => record.to_json(),
        };
        if let Err(e) = emit(&text, destination(sub, name, &format)) {
            eprintln!("cannot write output: {e}");
            return EXIT_CHECK_FAILED;
        }
        if record.pass {
            EXIT_PASS
        } else {
            if !quiet {
                eprintln!("{}", record.failure_report());
            }
            EXIT_CHECK_FAILED
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Always(bool);

    impl Check for Always {
        fn name(&self) -> &'static str {
            "always"
        }

        fn about(&self) -> &'static str {
            "fixed verdict"
        }

        fn args(&self) -> Vec<Arg> {
            Vec::new()
        }

        fn run(&self, _: &ArgMatches, _: &Context) -> Result<Outcome, CliError> {
            Ok(Outcome {
                checks: vec![CheckResult::at_most("x", if self.0 { 0.0 } else { 1.0 }, 0.5)],
                ..Outcome::default()
            })
        }
    }

    #[test]
    fn registry_replaces_by_name_and_maps_exit_codes() {
        let mut r = Registry::default();
        r.register(Box::new(Always(false)));
        r.register(Box::new(Always(true)));
        assert_eq!(r.names(), vec!["always"]);
        let dir = std::env::temp_dir().join(format!("intertwine-registry-{}", std::process::id()));
        let out = dir.join("a.json");
        assert_eq!(r.run(["x", "always", "--output", out.to_str().unwrap()]), EXIT_PASS);
        let mut f = Registry::default();
        f.register(Box::new(Always(false)));
        assert_eq!(f.run(["x", "always", "--quiet", "--output", out.to_str().unwrap()]), EXIT_CHECK_FAILED);
        assert_eq!(f.run(["x", "always", "--nope"]), EXIT_USAGE);
        let _ = std::fs::remove_dir_all(dir);
    }

    #[test]
    fn builtin_registry_has_nine_commands() {
        assert_eq!(Registry::builtin().names().len(), 9);
        Registry::builtin().command().debug_assert();
    }
}
