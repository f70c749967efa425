use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd_core::fock::{FockConfig, Truncation};
use cvqkd_core::integrate::IntegrationConfig;
use cvqkd_core::{Adversary, Channel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::table::Format;
use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "cvqkd", version, about = "Key rates and attack statistics for squeezed-pulse CV-QKD with post-selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One operating point.
    ///
    /// Columns: alpha0, r, t2, beta_c, p1, p0, r_acc, delta, i_ab, g_ab, p_c, tau, s_ab, adversary.
    /// Defaults: --alpha0 0.6 --r 0 --t2 1 --beta-c 0 --adversary general.
    Point(Run<NoExtra>),
    /// Acceptance rate, error rate and information versus threshold.
    ///
    /// Columns: beta_c, r_acc, delta, i_ab, g_ab.
    /// Defaults: --alpha0 0.6 --r 0 --t2 1, beta_c from 0 to 1.5 in steps of 0.01.
    Fig1(Run<Fig1Args>),
    /// Intercept-resend success rates at amplitudes calibrated to a fixed error rate.
    ///
    /// Columns: beta_c, then per squeezing value r: alpha0_r<r>, delta_r<r>, r_acc_r<r>,
    /// simquad_r<r>, phase_r<r>, projection_r<r>.
    /// Defaults: --delta 0.001, --r-values 0,0.5, beta_c from 0 to 2 in steps of 0.1, --t2 1.
    Fig2(Run<Fig2Args>),
    /// Joint density of Bob's and Eve's amplitude quadratures on a grid.
    ///
    /// Columns: beta_r, eps_r, density.
    /// Defaults: --alpha0 1 --r 0.5 --t2 0.75, beta_r in [-1.5, 3], eps_r in [-3, 2], step 0.025.
    Fig3(Run<Fig3Args>),
    /// Optimal amplitude, threshold and key rate versus channel loss.
    ///
    /// Columns: r, loss, alpha0_star, beta_c_star, s_star, positive.
    /// Defaults: --r-values 0,0.5,2, loss from 0.02 to 0.96 in steps of 0.02, --adversary general.
    Fig4(Run<Fig4Args>),
    /// Optimal key rate versus squeezing for both adversaries.
    ///
    /// Columns: loss, r, s_general, s_quadrature, alpha0_general, beta_c_general,
    /// alpha0_quadrature, beta_c_quadrature.
    /// Defaults: --loss-values 0.5,0.75,0.9, r from 0 to 1.5 in steps of 0.05.
    Fig5(Run<Fig5Args>),
    /// Maximize the key rate over amplitude and threshold.
    ///
    /// Columns: r, loss, adversary, alpha0_star, beta_c_star, s_star, positive, evaluations.
    /// Defaults: --r 0 --loss 0.5 --adversary general.
    Optimize(Run<OptimizeArgs>),
    /// Amplitude at which the lossless bit error rate hits a target.
    ///
    /// Columns: r, beta_c, target_delta, alpha0, delta.
    /// Defaults: --r 0 --beta-c 0 --delta 0.001.
    Calibrate(Run<CalibrateArgs>),
}

#[derive(Debug, Args)]
pub struct Run<E: Args> {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub extra: E,
    /// JSON file with any of the flags above, keyed by flag name; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryArg {
    Quadrature,
    General,
}

impl From<AdversaryArg> for Adversary {
    fn from(a: AdversaryArg) -> Self {
        match a {
            AdversaryArg::Quadrature => Adversary::QuadratureEve,
            AdversaryArg::General => Adversary::GeneralBound,
        }
    }
}

pub fn adversary_name(a: Adversary) -> &'static str {
    match a {
        Adversary::QuadratureEve => "quadrature",
        Adversary::GeneralBound => "general",
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Shared {
    /// Pulse amplitude α₀.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Squeezing parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Channel transmission T².
    #[arg(long, conflicts_with = "loss")]
    pub t2: Option<f64>,
    /// Channel loss R² = 1 − T².
    #[arg(long)]
    pub loss: Option<f64>,
    /// Post-selection threshold.
    #[arg(long)]
    pub beta_c: Option<f64>,
    #[arg(long, value_enum)]
    pub adversary: Option<AdversaryArg>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; `-` is standard output.
    #[arg(long)]
    pub out: Option<String>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Fixed number-basis truncation (default: grow until the tail is negligible).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Random seed; no subcommand samples at present.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct NoExtra {}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Fig1Args {
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Fig2Args {
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_step: Option<f64>,
    /// Target bit error rate for the amplitude calibration.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub r_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Fig3Args {
    #[arg(long, allow_hyphen_values = true)]
    pub beta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Fig4Args {
    #[arg(long, value_delimiter = ',')]
    pub r_values: Option<Vec<f64>>,
    #[arg(long)]
    pub loss_min: Option<f64>,
    #[arg(long)]
    pub loss_max: Option<f64>,
    #[arg(long)]
    pub loss_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct Fig5Args {
    #[arg(long, value_delimiter = ',')]
    pub loss_values: Option<Vec<f64>>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct OptimizeArgs {
    /// Extra pattern searches started from the next-best grid cells.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub delta: Option<f64>,
}

/// Flags with the config file filled in underneath.
pub struct Resolved<E> {
    pub shared: Shared,
    pub extra: E,
}

impl<E: Args + Serialize + DeserializeOwned> Run<E> {
    pub fn resolve(self) -> Result<Resolved<E>, Failure> {
        let Some(path) = &self.config else {
            return Ok(Resolved { shared: self.shared, extra: self.extra });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        let Value::Object(file) = file else {
            return Err(Failure::Validation(format!("{}: expected a JSON object", path.display())));
        };
        let shared_flags = to_object(&self.shared)?;
        let extra_flags = to_object(&self.extra)?;
        if let Some(k) = file.keys().find(|k| !shared_flags.contains_key(*k) && !extra_flags.contains_key(*k)) {
            return Err(Failure::Validation(format!("{}: unknown key `{k}`", path.display())));
        }
        Ok(Resolved { shared: overlay(&file, shared_flags)?, extra: overlay(&file, extra_flags)? })
    }
}

fn to_object<T: Serialize>(v: &T) -> Result<Map<String, Value>, Failure> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => Ok(m),
        _ => Err(Failure::Validation("flags do not serialize to an object".into())),
    }
}

fn overlay<T: DeserializeOwned>(file: &Map<String, Value>, flags: Map<String, Value>) -> Result<T, Failure> {
    let mut merged: Map<String, Value> =
        file.iter().filter(|(k, _)| flags.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    // A channel given on the command line replaces the file's, whichever form it used.
    if ["t2", "loss"].iter().any(|k| flags.get(*k).is_some_and(|v| !v.is_null())) {
        merged.remove("t2");
        merged.remove("loss");
    }
    for (k, v) in flags {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Validation(format!("config: {e}")))
}

impl Shared {
    pub fn channel(&self, default_t2: f64) -> Result<Channel, Failure> {
        let ch = match (self.t2, self.loss) {
            (Some(_), Some(_)) => return Err(Failure::Validation("give either t2 or loss, not both".into())),
            (Some(t2), None) => Channel::from_transmission(t2),
            (None, Some(loss)) => Channel::from_loss(loss),
            (None, None) => Channel::from_transmission(default_t2),
        };
        Ok(ch?)
    }

    pub fn integration(&self) -> Result<IntegrationConfig, Failure> {
        let d = IntegrationConfig::default();
        let cfg = d.with_tolerances(self.abs_tol.unwrap_or(d.abs_tol), self.rel_tol.unwrap_or(d.rel_tol));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn fock(&self) -> Result<FockConfig, Failure> {
        let cfg = match self.n_max {
            Some(n) => FockConfig { n_max: Truncation::Fixed(n), ..FockConfig::default() },
            None => FockConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn adversary(&self) -> Adversary {
        self.adversary.unwrap_or(AdversaryArg::General).into()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }
}
