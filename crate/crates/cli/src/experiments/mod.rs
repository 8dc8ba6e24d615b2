pub mod blob;
pub mod bounds;
pub mod crystal;
pub mod domain;
pub mod escape;
pub mod spectrum;
pub mod verify;

use vortexlab::crystal::CrystalSpec;
use vortexlab::ode::IntegratorSettings;
use vortexlab::AlphaModel;

use crate::config::{Config, ParamSpec};
use crate::error::CliError;

pub(crate) fn crystal_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::int("n", "3", "total number of vortices (ring of n-1 plus centre)"),
        ParamSpec::float("alpha", "1", "model exponent in [1, 2)"),
    ]
}

pub(crate) fn crystal_spec(config: &Config) -> Result<CrystalSpec, CliError> {
    let model = AlphaModel::new(config.float("alpha")?)?;
    Ok(CrystalSpec::new(config.int("n")?, model)?)
}

pub(crate) fn settings_params(rtol: &'static str, atol: &'static str) -> Vec<ParamSpec> {
    vec![
        ParamSpec::float("rtol", rtol, "relative integration tolerance"),
        ParamSpec::float("atol", atol, "absolute integration tolerance"),
    ]
}

pub(crate) fn settings(config: &Config) -> Result<IntegratorSettings, CliError> {
    let s = IntegratorSettings {
        rel_tol: config.float("rtol")?,
        abs_tol: config.float("atol")?,
        ..Default::default()
    };
    s.validate()?;
    Ok(s)
}

/// Render CSV (or any text) into memory.
pub(crate) fn render(f: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
