use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dphase::cutoff::{
    build_loglog_cutoff, build_psi_harmonic_cutoff, build_psi_harmonic_cutoff_log, cutoff_energy,
    find_inner_radius, EnergyCertificate,
};
use dphase::fem::{gap_experiment_fields, Enrichment, GapMode, GapOptions};
use dphase::geometry::{boundary_flux_by_side, sample_fields, Point2, SaddleFields};
use dphase::json::{fmt17, fmt9, to_string};
use dphase::orlicz::{conjugate_log_power, conjugate_numeric, luxemburg_norm, DoublePhase, OrliczFunction, Sample};
use dphase::regime::{classify, phase_diagram};
use serde::Serialize;

use crate::config::*;

#[derive(Debug)]
pub enum CliError {
    Core(dphase::Error),
    Config(String),
    Io(String),
}

impl From<dphase::Error> for CliError {
    fn from(e: dphase::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config(_) => "CONFIG_INVALID",
            CliError::Io(_) => "IO_ERROR",
        }
    }

    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_precondition() => 2,
            CliError::Core(_) => 3,
            CliError::Config(_) => 2,
            CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Config(m) | CliError::Io(m) => m.clone(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = to_string(v).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn no_csv(name: &str) -> CliError {
    CliError::Config(format!("{name} has no CSV output"))
}

/// Runs one command and returns the primary artifact; side files are
/// written directly.
pub fn run(cmd: &Command) -> Result<String> {
    let format = cmd.output().format;
    match cmd {
        Command::Classify(a) => {
            let dp = DoublePhase::new(
                OrliczFunction::log_power(a.p, -a.beta)?,
                OrliczFunction::log_power(a.p, a.alpha)?,
                dphase::orlicz::Weight::Checkerboard,
            )?;
            let report = classify(&dp.phi, &dp.psi)?;
            match format {
                Some(Format::Csv) => Err(no_csv("classify")),
                _ => json(&report),
            }
        }
        Command::PhaseDiagram(a) => {
            let cells = phase_diagram(&a.alphas, &a.betas)?;
            match format {
                Some(Format::Json) => json(&cells),
                _ => {
                    let mut s = String::from("alpha,beta,verdict,rule\n");
                    for c in &cells {
                        let verdict = serde_json::to_value(c.verdict).unwrap();
                        let rule = serde_json::to_value(c.rule).unwrap();
                        writeln!(
                            s,
                            "{},{},{},{}",
                            fmt17(c.alpha),
                            fmt17(c.beta),
                            verdict.as_str().unwrap(),
                            rule.as_str().unwrap()
                        )
                        .unwrap();
                    }
                    Ok(s)
                }
            }
        }
        Command::Gap(a) => gap(a, format),
        Command::Cutoff(a) => cutoff(a, format),
        Command::Norm(a) => norm(a, format),
        Command::Conjugate(a) => conjugate(a, format),
        Command::Flux(a) => {
            if a.nquad < 64 || a.nquad % 2 != 0 {
                return Err(CliError::Core(dphase::Error::Domain(format!(
                    "nquad must be an even number of at least 64, got {}",
                    a.nquad
                ))));
            }
            let sides = boundary_flux_by_side(a.nquad);
            let flux: f64 = sides.iter().sum();
            match format {
                Some(Format::Json) => {
                    #[derive(Serialize)]
                    struct Flux {
                        nquad: usize,
                        flux: f64,
                        sides: [f64; 4],
                    }
                    json(&Flux {
                        nquad: a.nquad,
                        flux,
                        sides,
                    })
                }
                Some(Format::Csv) => Err(no_csv("flux")),
                None => Ok(format!("{}\n", fmt9(flux))),
            }
        }
        Command::Fields(a) => {
            if a.n == 0 {
                return Err(CliError::Core(dphase::Error::Domain("grid must be positive".into())));
            }
            let rows = sample_fields(a.n);
            match format {
                Some(Format::Json) => json(&rows),
                _ => {
                    let mut s = String::from("x1,x2,a,u2,grad_u2,b2\n");
                    for r in &rows {
                        writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            fmt17(r.x1),
                            fmt17(r.x2),
                            r.a,
                            fmt17(r.u2),
                            fmt17(r.grad_u2),
                            fmt17(r.b2)
                        )
                        .unwrap();
                    }
                    Ok(s)
                }
            }
        }
    }
}

fn gap(a: &GapArgs, format: Option<Format>) -> Result<String> {
    let mode = match a.mode {
        ModeArg::Auto => None,
        ModeArg::G => Some(GapMode::G),
        ModeArg::Dirichlet => Some(GapMode::Dirichlet { amplitude: a.amplitude }),
    };
    let opts = GapOptions {
        levels: a.levels.clone(),
        grading: a.grading,
        mode,
        force: a.force,
    };
    let (report, mesh, fields) = gap_experiment_fields(a.alpha, a.beta, &opts)?;
    if let Some(path) = &a.nodal_csv {
        let e = Enrichment::default();
        let mut s = String::from("x1,x2,conforming,enriched_nodal,enriched_total\n");
        for (k, x) in mesh.vertices.iter().enumerate() {
            let base = fields.enriched.values[k];
            let total = base + fields.enriched.s * e.value(Point2::new(x[0], x[1]));
            writeln!(
                s,
                "{},{},{},{},{}",
                fmt17(x[0]),
                fmt17(x[1]),
                fmt17(fields.conforming.values[k]),
                fmt17(base),
                fmt17(total)
            )
            .unwrap();
        }
        write_file(path, &s)?;
    }
    match format {
        Some(Format::Csv) => {
            let mut s = String::from("n,h_min,E1,E2,s_opt,sep_value,iters_conforming,iters_enriched,converged\n");
            for l in &report.levels {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    l.n,
                    fmt17(l.h_min),
                    fmt17(l.e1),
                    fmt17(l.e2),
                    fmt17(l.s_opt),
                    fmt17(l.sep_value),
                    l.iters.conforming,
                    l.iters.enriched,
                    l.converged
                )
                .unwrap();
            }
            Ok(s)
        }
        _ => json(&report),
    }
}

#[derive(Serialize)]
struct CutoffReport {
    kind: CutoffKindArg,
    alpha: f64,
    u1: f64,
    u2: f64,
    r1: f64,
    r2: f64,
    c: f64,
    energy: f64,
    certificate: Option<EnergyCertificate>,
}

fn cutoff(a: &CutoffArgs, format: Option<Format>) -> Result<String> {
    let psi = OrliczFunction::log_power(2.0, a.alpha)?;
    let cut = match a.kind {
        CutoffKindArg::Loglog => {
            let eps = a
                .eps
                .ok_or_else(|| CliError::Config("--kind loglog needs --eps".into()))?;
            build_loglog_cutoff(eps)?
        }
        CutoffKindArg::PsiHarmonic => match (a.r1, a.delta) {
            (Some(r1), None) => build_psi_harmonic_cutoff(&psi, r1, a.r2)?,
            (None, Some(delta)) => {
                let inner = find_inner_radius(&psi, a.r2, delta)?;
                build_psi_harmonic_cutoff_log(&psi, inner.u1, -a.r2.ln())?
            }
            _ => {
                return Err(CliError::Config(
                    "--kind psi-harmonic needs exactly one of --r1 and --delta".into(),
                ))
            }
        },
    };
    let energy = match &cut.certificate {
        Some(c) => c.energy,
        None => cutoff_energy(&cut, (&psi).into())?,
    };
    let mut profile = String::from("u,r,eta,eta_prime\n");
    for node in &cut.profile {
        let u = node.w.exp();
        writeln!(
            profile,
            "{},{},{},{}",
            fmt17(u),
            fmt17((-u).exp()),
            fmt17(node.eta),
            fmt17((node.ln_y + u).exp())
        )
        .unwrap();
    }
    if let Some(path) = &a.profile_csv {
        write_file(path, &profile)?;
    }
    match format {
        Some(Format::Csv) => Ok(profile),
        _ => json(&CutoffReport {
            kind: a.kind,
            alpha: a.alpha,
            u1: cut.u1,
            u2: cut.u2,
            r1: cut.r1(),
            r2: cut.r2(),
            c: cut.c,
            energy,
            certificate: cut.certificate,
        }),
    }
}

fn norm(a: &NormArgs, format: Option<Format>) -> Result<String> {
    if a.grid == 0 {
        return Err(CliError::Core(dphase::Error::Domain("grid must be positive".into())));
    }
    let dp = DoublePhase::log_pair(a.alpha, a.beta)?;
    let f = SaddleFields::default();
    let e = Enrichment::default();
    let h = 2.0 / a.grid as f64;
    let mut samples = Vec::with_capacity(a.grid * a.grid);
    for j in 0..a.grid {
        for i in 0..a.grid {
            let x = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
            let p = Point2::new(x[0], x[1]);
            let g = match a.field {
                NormField::GradU2 => f.grad_u2(p),
                NormField::Enrichment => e.grad(p),
            };
            samples.push(Sample {
                x,
                value: g[0].hypot(g[1]),
                weight: h * h,
            });
        }
    }
    let value = luxemburg_norm(&samples, &dp)?;
    if format == Some(Format::Csv) {
        return Err(no_csv("norm"));
    }
    #[derive(Serialize)]
    struct NormReport {
        alpha: f64,
        beta: f64,
        field: NormField,
        grid: usize,
        norm: f64,
    }
    json(&NormReport {
        alpha: a.alpha,
        beta: a.beta,
        field: a.field,
        grid: a.grid,
        norm: value,
    })
}

fn conjugate(a: &ConjugateArgs, format: Option<Format>) -> Result<String> {
    let f = OrliczFunction::log_power(a.p, a.gamma)?;
    let class = conjugate_log_power(a.p, a.gamma)?.function;
    let closed = OrliczFunction::from(class.clone());
    #[derive(Serialize)]
    struct Row {
        s: f64,
        numeric: f64,
        closed_form: f64,
        ratio: f64,
    }
    let rows = a
        .s
        .iter()
        .map(|&s| {
            let numeric = conjugate_numeric(&f, s)?;
            let closed_form = closed.eval(s)?;
            Ok(Row {
                s,
                numeric,
                closed_form,
                ratio: numeric / closed_form,
            })
        })
        .collect::<std::result::Result<Vec<_>, dphase::Error>>()?;
    match format {
        Some(Format::Csv) => {
            let mut s = String::from("s,numeric,closed_form,ratio\n");
            for r in &rows {
                writeln!(s, "{},{},{},{}", fmt17(r.s), fmt17(r.numeric), fmt17(r.closed_form), fmt17(r.ratio)).unwrap();
            }
            Ok(s)
        }
        _ => {
            #[derive(Serialize)]
            struct ConjugateReport {
                function: OrliczFunction,
                conjugate: OrliczFunction,
                rows: Vec<Row>,
            }
            json(&ConjugateReport {
                function: f,
                conjugate: closed,
                rows,
            })
        }
    }
}
