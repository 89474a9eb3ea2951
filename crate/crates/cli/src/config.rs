//! Run configuration: a TOML document overlaid by command-line flags.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use muntz_core::biortho::QuadratureSpec;
use muntz_core::Execution;
use serde::{Deserialize, Serialize};

use crate::seq::SeqSpec;
use crate::CliError;

pub const OUT_DIR_ENV: &str = "MUNTZ_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Density,
    FuchsEval,
    FuchsVerify,
    Surgery,
    Biortho,
    Recover,
    Witness,
    Crosscheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::FuchsEval => "fuchs-eval",
            Command::FuchsVerify => "fuchs-verify",
            Command::Surgery => "surgery",
            Command::Biortho => "biortho",
            Command::Recover => "recover",
            Command::Witness => "witness",
            Command::Crosscheck => "crosscheck",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panels_per_unit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequential: Option<bool>,
}

/// Command-specific parameters; each command fills in its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub params: Params,
}

fn pick<T>(top: Option<T>, base: Option<T>) -> Option<T> {
    top.or(base)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let (q, p) = (self.quadrature, self.params);
        let (tq, tp) = (top.quadrature, top.params);
        RunConfig {
            command: pick(top.command, self.command),
            seq: pick(top.seq, self.seq),
            horizon: pick(top.horizon, self.horizon),
            alpha: pick(top.alpha, self.alpha),
            seed: pick(top.seed, self.seed),
            output: pick(top.output, self.output),
            quadrature: Quadrature {
                tolerance: pick(tq.tolerance, q.tolerance),
                panels_per_unit: pick(tq.panels_per_unit, q.panels_per_unit),
                radial_cutoff: pick(tq.radial_cutoff, q.radial_cutoff),
                cutoff_radius: pick(tq.cutoff_radius, q.cutoff_radius),
                sequential: pick(tq.sequential, q.sequential),
            },
            params: Params {
                z: pick(tp.z, p.z),
                mu: pick(tp.mu, p.mu),
                terms: pick(tp.terms, p.terms),
                delta: pick(tp.delta, p.delta),
                b: pick(tp.b, p.b),
                target: pick(tp.target, p.target),
                coefficients: pick(tp.coefficients, p.coefficients),
                points: pick(tp.points, p.points),
                r_max: pick(tp.r_max, p.r_max),
                truncation: pick(tp.truncation, p.truncation),
            },
        }
    }

    /// Fills the shared defaults and checks the shared fields. The output
    /// directory falls back to the environment.
    pub fn resolve(mut self, command: Command, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Usage(format!("config is for `{}` but `{}` was invoked", c.name(), command.name())));
            }
        }
        self.command = Some(command);
        let seq = self.seq.as_deref().ok_or_else(|| CliError::Usage("--seq is required".into()))?;
        let spec: SeqSpec = seq.parse().map_err(|e| CliError::Usage(format!("--seq: {e}")))?;
        self.seq = Some(spec.to_string());
        let horizon = *self.horizon.get_or_insert(if command == Command::Surgery { 500.0 } else { 1000.0 });
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(CliError::Usage(format!("--horizon must be positive, got {horizon}")));
        }
        let alpha = *self.alpha.get_or_insert(FRAC_PI_4);
        if !(0.0..PI).contains(&alpha) {
            return Err(CliError::Usage(format!("--alpha must lie in [0, pi), got {alpha}")));
        }
        self.seed.get_or_insert(0);
        if self.output.is_none() {
            self.output = env_out;
        }
        let d = QuadratureSpec::default();
        let q = &mut self.quadrature;
        let tol = *q.tolerance.get_or_insert(d.tolerance);
        let ppu = *q.panels_per_unit.get_or_insert(d.panels_per_unit);
        q.radial_cutoff.get_or_insert(d.radial_cutoff);
        q.cutoff_radius.get_or_insert(d.cutoff_radius);
        q.sequential.get_or_insert(false);
        if tol.is_nan() || tol <= 0.0 || ppu == 0 {
            return Err(CliError::Usage("--tolerance must be positive and --panels-per-unit at least 1".into()));
        }
        Ok(self)
    }

    pub fn seq_spec(&self) -> SeqSpec {
        self.seq.as_deref().unwrap_or_default().parse().expect("resolved sequence spec")
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let d = QuadratureSpec::default();
        let q = &self.quadrature;
        QuadratureSpec {
            cutoff_radius: q.cutoff_radius.unwrap_or(d.cutoff_radius),
            panels_per_unit: q.panels_per_unit.unwrap_or(d.panels_per_unit),
            tolerance: q.tolerance.unwrap_or(d.tolerance),
            radial_cutoff: q.radial_cutoff.unwrap_or(d.radial_cutoff),
            execution: if q.sequential == Some(true) { Execution::Sequential } else { Execution::Parallel },
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.expect("resolved horizon")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.expect("resolved alpha")
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("resolved seed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<RunConfig>("seq = \"power:2\"\nbogus = 1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[params]\nmu = 2.5\nnu = 1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[quadrature]\ntolerance = 1e-9\n").is_ok());
    }

    #[test]
    fn flags_override_file_values() {
        let file: RunConfig = toml::from_str("seq = \"power:2\"\nalpha = 0.5\n[params]\nmu = 2.5\nterms = 4\n").unwrap();
        let flags = RunConfig { alpha: Some(0.7), params: Params { terms: Some(8), ..Params::default() }, ..RunConfig::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.alpha, Some(0.7));
        assert_eq!(merged.params.terms, Some(8));
        assert_eq!(merged.params.mu, Some(2.5));
        assert_eq!(merged.seq.as_deref(), Some("power:2"));
    }

    #[test]
    fn resolution_fills_defaults_and_checks_ranges() {
        let base = RunConfig { seq: Some("power:2".into()), ..RunConfig::default() };
        let r = base.clone().resolve(Command::Witness, Some("out".into())).unwrap();
        assert_eq!(r.horizon, Some(1000.0));
        assert_eq!(r.output, Some(PathBuf::from("out")));
        assert_eq!(r.quadrature.tolerance, Some(QuadratureSpec::default().tolerance));
        let bad = RunConfig { alpha: Some(4.0), ..base.clone() };
        assert!(matches!(bad.resolve(Command::Witness, None), Err(CliError::Usage(_))));
        let wrong = RunConfig { command: Some(Command::Density), ..base };
        assert!(matches!(wrong.resolve(Command::Witness, None), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::default().resolve(Command::Density, None), Err(CliError::Usage(_))));
    }
}
