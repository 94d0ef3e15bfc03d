use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Output destination shared by every command. Without `--out` the primary
/// artifact goes to stdout. In a config file these are top-level keys next
/// to `command`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Gap/no-gap verdict for the pair (t^p log^{-β}, t^p log^α).
    Classify(ClassifyArgs),
    /// Verdicts on a grid of (α, β).
    PhaseDiagram(PhaseDiagramArgs),
    /// Conforming vs enriched minima on a sequence of meshes.
    Gap(GapArgs),
    /// Log-log or ψ-harmonic radial cutoff with its energy.
    Cutoff(CutoffArgs),
    /// Luxemburg norm of a gradient field on a sample grid.
    Norm(NormArgs),
    /// Numeric Legendre transform against the closed-form conjugate.
    Conjugate(ConjugateArgs),
    /// Boundary flux ∫ (b₂·ν) u₂ over the square.
    Flux(FluxArgs),
    /// Cell-centred samples of the saddle fields.
    Fields(FieldsArgs),
}

fn two() -> f64 {
    2.0
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub p: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

fn default_axis() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 1.25, 2.0, 3.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramArgs {
    #[arg(long, value_delimiter = ',', default_values_t = default_axis())]
    #[serde(default = "default_axis")]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = default_axis())]
    #[serde(default = "default_axis")]
    pub betas: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Auto,
    #[value(name = "G", alias = "g")]
    #[serde(rename = "G", alias = "g")]
    G,
    Dirichlet,
}

fn default_levels() -> Vec<usize> {
    vec![32, 64, 128]
}
fn auto() -> ModeArg {
    ModeArg::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct GapArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_levels())]
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub grading: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    #[serde(default = "auto")]
    pub mode: ModeArg,
    /// Boundary data `amplitude · u₂` in Dirichlet mode.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Run G-mode outside the certified regime.
    #[arg(long)]
    #[serde(default)]
    pub force: bool,
    /// CSV of both minimizers' nodal values on the finest level.
    #[arg(long)]
    #[serde(default)]
    pub nodal_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKindArg {
    Loglog,
    PsiHarmonic,
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CutoffArgs {
    #[arg(long, value_enum)]
    pub kind: CutoffKindArg,
    /// Inner radius of the log-log cutoff.
    #[arg(long)]
    #[serde(default)]
    pub eps: Option<f64>,
    /// ψ = t² log^α(e + t); also the integrand for the log-log energy.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    #[serde(default = "one")]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    #[serde(default = "quarter")]
    pub r2: f64,
    /// Inner radius; if absent it is found from `--delta`.
    #[arg(long)]
    #[serde(default)]
    pub r1: Option<f64>,
    /// Energy budget: the inner radius is chosen so that c ≤ δ.
    #[arg(long)]
    #[serde(default)]
    pub delta: Option<f64>,
    /// CSV of the profile (u, r, eta, eta_prime).
    #[arg(long)]
    #[serde(default)]
    pub profile_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormField {
    /// `∇u₂`.
    GradU2,
    /// `∇(η u₂)`.
    Enrichment,
}

fn grad_u2() -> NormField {
    NormField::GradU2
}
fn default_grid() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct NormArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = NormField::GradU2)]
    #[serde(default = "grad_u2")]
    pub field: NormField,
    /// Cells per side of the midpoint grid.
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

fn default_s() -> Vec<f64> {
    vec![10.0, 1e3, 1e6]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConjugateArgs {
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_s())]
    #[serde(default = "default_s")]
    pub s: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

fn default_nquad() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct FluxArgs {
    #[arg(long, default_value_t = 1024)]
    #[serde(default = "default_nquad")]
    pub nquad: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

fn default_fields_n() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct FieldsArgs {
    /// Cells per side.
    #[arg(long, default_value_t = 64)]
    #[serde(default = "default_fields_n")]
    pub n: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

impl Command {
    pub fn output(&self) -> &Output {
        match self {
            Command::Classify(a) => &a.output,
            Command::PhaseDiagram(a) => &a.output,
            Command::Gap(a) => &a.output,
            Command::Cutoff(a) => &a.output,
            Command::Norm(a) => &a.output,
            Command::Conjugate(a) => &a.output,
            Command::Flux(a) => &a.output,
            Command::Fields(a) => &a.output,
        }
    }

    fn output_mut(&mut self) -> &mut Output {
        match self {
            Command::Classify(a) => &mut a.output,
            Command::PhaseDiagram(a) => &mut a.output,
            Command::Gap(a) => &mut a.output,
            Command::Cutoff(a) => &mut a.output,
            Command::Norm(a) => &mut a.output,
            Command::Conjugate(a) => &mut a.output,
            Command::Flux(a) => &mut a.output,
            Command::Fields(a) => &mut a.output,
        }
    }

    /// Parses a config file: `{"command": "gap", "alpha": 2, ..., "out": "r.json"}`.
    /// Unknown keys are rejected.
    pub fn from_config(text: &str) -> Result<Command, String> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| "config must be a JSON object".to_string())?;
        let mut out = serde_json::Map::new();
        for key in ["out", "format"] {
            if let Some(v) = obj.remove(key) {
                out.insert(key.to_string(), v);
            }
        }
        let output: Output = serde_json::from_value(out.into()).map_err(|e| e.to_string())?;
        let mut cmd: Command = serde_json::from_value(value).map_err(|e| e.to_string())?;
        *cmd.output_mut() = output;
        Ok(cmd)
    }
}
