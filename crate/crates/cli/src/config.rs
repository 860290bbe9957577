use std::path::PathBuf;

use fraccx_core::semilinear::ProblemParams;
use fraccx_core::spectral::{DomainKind, DomainSpec};
use fraccx_core::FracParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub frac: FracParams,
    #[serde(default)]
    pub problem: Option<ProblemSection>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: CommandOptions,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default)]
    pub lambda: Option<f64>,
    pub q_exp: f64,
    pub p_exp: f64,
    #[serde(default)]
    pub allow_supercritical: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Resolution {
    pub modes: usize,
    /// `(nx, ny)` cylinder grids for `crosscheck`.
    pub grid_levels: Vec<[usize; 2]>,
    /// Mode counts for `pohozaev`; each level uses `nx = 2m − 1`, `ny = 2m`.
    pub pohozaev_modes: Vec<usize>,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            modes: 256,
            grid_levels: vec![[63, 64], [127, 128], [255, 256]],
            pohozaev_modes: vec![32, 64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    /// Absolute width of the Λ bracket.
    pub lambda: f64,
    pub sup_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            lambda: 1e-4,
            sup_cap: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StartChoice {
    #[default]
    Warm,
    Cold,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandOptions {
    /// Explicit λ values for `branch`; otherwise a uniform grid below Λ.
    pub lambda_grid: Option<Vec<f64>>,
    pub lambda_count: usize,
    /// Upper end of the automatic grid as a fraction of the Λ bracket.
    pub lambda_fraction: f64,
    pub start: StartChoice,
    /// Order of the profile for `profile`; defaults to α.
    pub profile_beta: Option<f64>,
    pub profile_samples: usize,
    pub profile_s_max: f64,
}

impl Default for CommandOptions {
    fn default() -> Self {
        Self {
            lambda_grid: None,
            lambda_count: 20,
            lambda_fraction: 0.98,
            start: StartChoice::Warm,
            profile_beta: None,
            profile_samples: 401,
            profile_s_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Profile,
    Solve,
    Branch,
    LambdaStar,
    SecondSolution,
    Crosscheck,
    Pohozaev,
    TraceCheck,
    Supercritical,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Profile => "profile",
            Command::Solve => "solve",
            Command::Branch => "branch",
            Command::LambdaStar => "lambda-star",
            Command::SecondSolution => "second-solution",
            Command::Crosscheck => "crosscheck",
            Command::Pohozaev => "pohozaev",
            Command::TraceCheck => "trace-check",
            Command::Supercritical => "supercritical",
        }
    }

    fn needs_problem(self) -> bool {
        !matches!(
            self,
            Command::Constants | Command::Profile | Command::TraceCheck | Command::Crosscheck
        )
    }

    fn needs_lambda(self) -> bool {
        matches!(
            self,
            Command::Solve | Command::SecondSolution | Command::Pohozaev | Command::Supercritical
        )
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))
    }

    /// First twelve hex digits of the SHA-256 of the canonical config,
    /// ignoring where output goes and how many threads compute it.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            output_dir: None,
            threads: None,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..6])
    }

    /// Problem parameters with `lambda` replaced by `lambda_default` when absent.
    pub fn problem_params(&self, lambda_default: f64) -> Result<ProblemParams, CliError> {
        let ps = self
            .problem
            .as_ref()
            .ok_or_else(|| bad("missing `problem` section"))?;
        let pp = ProblemParams {
            lambda: ps.lambda.unwrap_or(lambda_default),
            q_exp: ps.q_exp,
            p_exp: ps.p_exp,
            frac: self.frac,
            domain: self.domain.clone(),
            allow_supercritical: ps.allow_supercritical,
        };
        pp.validate().map_err(|e| bad(format!("problem: {e}")))?;
        Ok(pp)
    }

    /// Check every precondition of `cmd` that does not require solving.
    pub fn validate(&self, cmd: Command) -> Result<(), CliError> {
        self.domain
            .validate()
            .map_err(|e| bad(format!("domain: {e}")))?;
        self.frac
            .validate()
            .map_err(|e| bad(format!("frac: {e}")))?;
        if self.domain.dim() != self.frac.n_dim {
            return Err(bad(format!(
                "frac.n_dim = {} does not match a {:?} domain",
                self.frac.n_dim, self.domain.kind
            )));
        }
        if self.resolution.modes == 0 {
            return Err(bad("resolution.modes must be positive"));
        }
        let t = &self.tolerances;
        if !(t.residual > 0.0 && t.lambda > 0.0 && t.sup_cap > 0.0) {
            return Err(bad("tolerances must be positive"));
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be positive"));
        }
        if cmd.needs_problem() {
            let ps = self
                .problem
                .as_ref()
                .ok_or_else(|| bad("missing `problem` section"))?;
            if cmd.needs_lambda() && ps.lambda.is_none() {
                return Err(bad(format!("`{}` needs problem.lambda", cmd.name())));
            }
            self.problem_params(1.0)?;
        }
        match cmd {
            Command::Crosscheck | Command::Pohozaev | Command::Supercritical => {
                if self.domain.kind != DomainKind::Interval {
                    return Err(bad(format!("`{}` needs an interval domain", cmd.name())));
                }
            }
            Command::TraceCheck if self.frac.n_dim != 1 || self.frac.alpha >= 1.0 => {
                return Err(bad("`trace-check` needs n_dim = 1 and alpha < 1"));
            }
            _ => {}
        }
        match cmd {
            Command::Crosscheck => {
                if self.resolution.grid_levels.len() < 2 {
                    return Err(bad("crosscheck needs at least two grid levels"));
                }
                if self
                    .resolution
                    .grid_levels
                    .iter()
                    .any(|l| l[0] < 2 || l[1] < 8)
                {
                    return Err(bad("grid levels need nx >= 2 and ny >= 8"));
                }
            }
            Command::Pohozaev => {
                if self.resolution.pohozaev_modes.len() < 2
                    || self.resolution.pohozaev_modes.contains(&0)
                {
                    return Err(bad("pohozaev needs at least two positive mode counts"));
                }
            }
            Command::Supercritical => {
                if !self.problem.as_ref().is_some_and(|p| p.allow_supercritical) {
                    return Err(bad(
                        "`supercritical` needs problem.allow_supercritical = true",
                    ));
                }
            }
            Command::Branch => {
                let o = &self.options;
                if let Some(g) = &o.lambda_grid {
                    if g.windows(2).any(|w| !(w[0] < w[1])) || g.iter().any(|l| !(*l > 0.0)) {
                        return Err(bad("options.lambda_grid must be positive and increasing"));
                    }
                } else if o.lambda_count == 0
                    || !(o.lambda_fraction > 0.0 && o.lambda_fraction < 1.0)
                {
                    return Err(bad("need lambda_count > 0 and 0 < lambda_fraction < 1"));
                }
            }
            Command::Profile => {
                let beta = self.options.profile_beta.unwrap_or(self.frac.alpha);
                if !(beta > 0.0 && beta < 2.0) {
                    return Err(bad("profile_beta must lie in (0, 2)"));
                }
                if self.options.profile_samples < 2 || !(self.options.profile_s_max > 0.0) {
                    return Err(bad(
                        "profile sampling needs at least two samples on a positive range",
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str =
        r#"{"domain": {"kind": "interval", "lengths": [2.0]}, "frac": {"alpha": 0.5, "n_dim": 1}}"#;

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::parse(MIN).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("/elsewhere".into());
        b.threads = Some(4);
        assert_eq!(a.hash(), b.hash());
        b.resolution.modes += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn commands_needing_lambda_reject_missing_problem() {
        let c = RunConfig::parse(MIN).unwrap();
        assert!(c.validate(Command::Constants).is_ok());
        assert!(c.validate(Command::Solve).is_err());
        assert!(c.validate(Command::Pohozaev).is_err());
    }
}
