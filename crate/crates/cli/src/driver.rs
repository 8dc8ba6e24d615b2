//! Argument parsing and output handling for the `vortexlab` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{parse_config_file, Config, Kind};
use crate::error::CliError;
use crate::registry::{Registry, RunOptions};

pub fn command(registry: &Registry) -> Command {
    let mut cmd = Command::new("vortexlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Point-vortex crystals, their instability and confinement experiments")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .default_value("out")
                .help("directory for output files"),
        )
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("flat `key = value` file; command-line flags override it"),
        )
        .arg(
            Arg::new("parallel")
                .long("parallel")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("spread independent grid points over threads (results are identical)"),
        );
    for e in registry.iter() {
        let mut sub = Command::new(e.name()).about(e.about());
        for p in e.params() {
            let help = match p.default {
                Some(d) if p.kind != Kind::Flag => format!("{} [default: {d}]", p.help),
                _ => p.help.to_string(),
            };
            let mut arg = Arg::new(p.name).long(p.name).help(help);
            arg = if p.kind == Kind::Flag {
                arg.action(ArgAction::SetTrue)
            } else {
                arg.action(ArgAction::Set).allow_negative_numbers(true)
            };
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn raw_values(kinds: &[(&'static str, Kind)], m: &ArgMatches) -> BTreeMap<String, String> {
    let mut raw = BTreeMap::new();
    for &(name, kind) in kinds {
        if m.value_source(name) != Some(ValueSource::CommandLine) {
            continue;
        }
        let v = if kind == Kind::Flag {
            "true".to_string()
        } else {
            m.get_one::<String>(name).cloned().unwrap_or_default()
        };
        raw.insert(name.to_string(), v);
    }
    raw
}

fn write_outputs(dir: &Path, name: &str, files: &[(String, Vec<u8>)], json: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (f, bytes) in files {
        fs::write(dir.join(f), bytes)?;
    }
    fs::write(dir.join(format!("{name}.json")), json)?;
    Ok(())
}

fn execute(registry: &Registry, matches: &ArgMatches) -> Result<(), CliError> {
    let (name, sub) = matches.subcommand().ok_or_else(|| CliError::Usage("no experiment given".into()))?;
    let exp = registry
        .get(name)
        .ok_or_else(|| CliError::Usage(format!("unknown experiment `{name}`")))?;
    let specs = exp.params();
    let mut raw = match sub.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let kinds: Vec<_> = specs.iter().map(|s| (s.name, s.kind)).collect();
    raw.extend(raw_values(&kinds, sub));
    let config = Config::resolve(name, &specs, &raw)?;
    let options = RunOptions { parallel: sub.get_flag("parallel") };
    let out = exp.run(&config, options)?;
    let json = out.json_bytes();
    let dir = PathBuf::from(sub.get_one::<String>("out").map(String::as_str).unwrap_or("out"));
    write_outputs(&dir, name, &out.files, &json)?;
    std::io::stdout().write_all(&json)?;
    match out.failure {
        Some(msg) => Err(CliError::VerifyFailed(msg)),
        None => Ok(()),
    }
}

/// Run the command line `args` (including the program name) and return the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let registry = Registry::standard();
    let matches = match command(&registry).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&registry, &matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vortexlab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_is_well_formed() {
        command(&Registry::standard()).debug_assert();
    }

    #[test]
    fn bad_arguments_are_usage_errors() {
        assert_eq!(run_cli(["vortexlab", "spectrum", "--bogus", "1"]), 2);
        assert_eq!(run_cli(["vortexlab", "nothing"]), 2);
        assert_eq!(run_cli(["vortexlab", "--help"]), 0);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.txt");
        fs::write(&cfg, "n = 5\nalpha = 1.5\n").unwrap();
        let out = dir.path().join("o");
        let code = run_cli([
            "vortexlab",
            "crystal",
            "--config",
            cfg.to_str().unwrap(),
            "--alpha",
            "1.25",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("crystal.json")).unwrap()).unwrap();
        assert_eq!(v["config"]["n"].to_string(), "5");
        assert_eq!(v["config"]["alpha"].to_string(), "1.2500000000000000e+0");
        assert!(out.join("crystal.csv").exists());
    }
}
