use serde::{Deserialize, Serialize};

use super::energy::{functional_g, separating_functional, EnrichedField};
use super::mesh::{build_mesh, MeshSpace};
use super::solver::{minimize, BoundaryData, MinimizeOptions};
use crate::error::{Error, Result};
use crate::orlicz::DoublePhase;
use crate::regime::{classify_pair, Rule, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapMode {
    /// Minimize 𝒢 with zero boundary values.
    G,
    /// Minimize ℱ with boundary values `amplitude · u₂`.
    Dirichlet { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub levels: Vec<usize>,
    pub grading: f64,
    /// `None` picks G-mode in the gap regime and Dirichlet mode otherwise.
    pub mode: Option<GapMode>,
    /// Run G-mode even when the classifier does not certify `b₂ ∈ L^{Φ*}`.
    pub force: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            levels: vec![32, 64, 128],
            grading: 2.0,
            mode: None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapLevel {
    pub n: usize,
    pub h_min: f64,
    /// Enriched minimum.
    #[serde(rename = "E1")]
    pub e1: f64,
    /// Conforming minimum.
    #[serde(rename = "E2")]
    pub e2: f64,
    pub s_opt: f64,
    pub sep_value: f64,
    pub iters: Iterations,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Iterations {
    pub conforming: usize,
    pub enriched: usize,
}

/// Both minimizers of one level, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFields {
    pub conforming: EnrichedField,
    pub enriched: EnrichedField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub alpha: f64,
    pub beta: f64,
    pub grading: f64,
    pub mode: GapMode,
    pub verdict: Verdict,
    pub rule: Rule,
    pub levels: Vec<GapLevel>,
}

pub fn gap_level(mesh: &MeshSpace, dp: &DoublePhase, mode: GapMode) -> Result<GapLevel> {
    gap_level_fields(mesh, dp, mode).map(|(level, _)| level)
}

pub fn gap_level_fields(mesh: &MeshSpace, dp: &DoublePhase, mode: GapMode) -> Result<(GapLevel, LevelFields)> {
    let base = match mode {
        GapMode::G => MinimizeOptions::default(),
        GapMode::Dirichlet { amplitude } => MinimizeOptions {
            linear_term: false,
            boundary: BoundaryData::Saddle { amplitude },
            ..Default::default()
        },
    };
    let conf = minimize(mesh, dp, base)?;
    let enr = minimize(mesh, dp, MinimizeOptions { enriched: true, ..base })?;
    let e1 = enr.objective;
    let e2 = conf.objective;
    if e1 > e2 + 1e-12 * e2.abs().max(1.0) {
        return Err(Error::Evaluation(format!(
            "enriched minimum {e1} exceeds conforming minimum {e2}"
        )));
    }
    let level = GapLevel {
        n: mesh.n,
        h_min: mesh.h_min(),
        e1,
        e2,
        s_opt: enr.field.s,
        sep_value: separating_functional(mesh, &enr.field)?,
        iters: Iterations {
            conforming: conf.iterations,
            enriched: enr.iterations,
        },
        converged: enr.converged && conf.converged,
    };
    Ok((
        level,
        LevelFields {
            conforming: conf.field,
            enriched: enr.field,
        },
    ))
}

/// Conforming and enriched minima on each mesh level, with the classifier
/// verdict for `Φ_{2,α,β}` attached.
pub fn gap_experiment(alpha: f64, beta: f64, opts: &GapOptions) -> Result<GapReport> {
    gap_experiment_fields(alpha, beta, opts).map(|(report, _, _)| report)
}

/// [`gap_experiment`] that also returns the finest mesh and its minimizers.
pub fn gap_experiment_fields(
    alpha: f64,
    beta: f64,
    opts: &GapOptions,
) -> Result<(GapReport, MeshSpace, LevelFields)> {
    if opts.levels.is_empty() || opts.levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("mesh levels must be nonempty and ascending".into()));
    }
    let regime = classify_pair(alpha, beta)?;
    let mode = match opts.mode {
        None if regime.verdict == Verdict::Gap => GapMode::G,
        None => GapMode::Dirichlet { amplitude: 1.0 },
        Some(GapMode::G) if regime.verdict != Verdict::Gap && !opts.force => {
            return Err(Error::BNotDualIntegrable(format!(
                "verdict for (alpha, beta) = ({alpha}, {beta}) is {:?}; the linear term is not \
                 certified to be bounded, use Dirichlet mode or force",
                regime.verdict
            )));
        }
        Some(m) => m,
    };
    let dp = DoublePhase::log_pair(alpha, beta)?;
    let mut levels = Vec::with_capacity(opts.levels.len());
    let mut last = None;
    for &n in &opts.levels {
        let mesh = build_mesh(n, opts.grading)?;
        let (level, fields) = gap_level_fields(&mesh, &dp, mode)?;
        levels.push(level);
        last = Some((mesh, fields));
    }
    let (mesh, fields) = last.expect("levels are nonempty");
    let report = GapReport {
        alpha,
        beta,
        grading: opts.grading,
        mode,
        verdict: regime.verdict,
        rule: regime.rule,
        levels,
    };
    Ok((report, mesh, fields))
}

/// `(t, 𝒢(t·E))` for each `t`.
pub fn scaling_probe(t_grid: &[f64], dp: &DoublePhase, mesh: &MeshSpace) -> Result<Vec<(f64, f64)>> {
    t_grid
        .iter()
        .map(|&t| {
            let mut f = EnrichedField::zeros(mesh);
            f.s = t;
            Ok((t, functional_g(mesh, dp, &f)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeTraceRow {
    pub r: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeTrace {
    pub rows: Vec<ConeTraceRow>,
    pub origin_value: f64,
    /// Slopes of `ln|u(r) − u(0)|` against `ln ln(1/r)` in each cone, when
    /// the deviations are resolvable.
    pub fit_upper: Option<f64>,
    pub fit_lower: Option<f64>,
}

const ARC_SAMPLES: usize = 32;

fn fit_slope(rows: &[ConeTraceRow], origin: f64, pick: impl Fn(&ConeTraceRow) -> f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.r < 1.0)
        .filter_map(|row| {
            let d = (pick(row) - origin).abs();
            (d > 1e-12).then(|| ((1.0 / row.r).ln().ln(), d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Means of the field over arcs of radius `r` inside the upper and lower
/// cones `|x₁| < |x₂|`.
pub fn cone_trace_diagnostic(field: &EnrichedField, mesh: &MeshSpace, radii: &[f64]) -> Result<ConeTrace> {
    let h = mesh.h_min();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r >= h && r <= 1.0) {
            return Err(Error::Range(format!(
                "radius {r} outside the resolved range [{h}, 1]"
            )));
        }
        let mut upper = 0.0;
        let mut lower = 0.0;
        for k in 0..ARC_SAMPLES {
            let th = std::f64::consts::FRAC_PI_4
                + std::f64::consts::FRAC_PI_2 * (k as f64 + 0.5) / ARC_SAMPLES as f64;
            let (c, s) = (th.cos(), th.sin());
            upper += field.eval(mesh, [r * c, r * s])?;
            lower += field.eval(mesh, [r * c, -r * s])?;
        }
        rows.push(ConeTraceRow {
            r,
            upper: upper / ARC_SAMPLES as f64,
            lower: lower / ARC_SAMPLES as f64,
        });
    }
    let origin_value = field.values[mesh.origin];
    Ok(ConeTrace {
        fit_upper: fit_slope(&rows, origin_value, |row| row.upper),
        fit_lower: fit_slope(&rows, origin_value, |row| row.lower),
        rows,
        origin_value,
    })
}
