//! Command line front end.
//!
//! Every command renders its whole output in memory first, so a failure never
//! leaves partial output behind. Exit codes: 0 success, 1 validation failure,
//! 2 parse or IO failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::heap::{enumerate_paths, evaluate_heap, BlockHeuristic, HeapHeuristic, PropagationOptions, UnitHeuristic};
use crate::ingestion::{normalize_dim, read_matrix_csv_file, read_opinion_csv, MeanAggregator, OpinionAggregator};
use crate::matrix::SquareMatrix;
use crate::model::{check_influence, classify_factors, DirectInfluenceMatrix, FactorId, PeapVariant, StrategyResult, ValidationReport};
use crate::peap::{evaluate_peap, PeapConfig};
use crate::project::{load_project, Project};
use crate::report::{
    ClassifyPayload, ComparisonReport, EvaluatePayload, Format, NormalizePayload, PathsPayload, ReportMetadata,
    TrmPayload,
};
use crate::verify::{run_verification, summary_line, VerifyConfig, DEFAULT_CASES, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "effprop", version, about = "Effort assignment and propagation over decision systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArg {
    /// Project file (JSON).
    #[arg(long)]
    project: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl OnOff {
    fn on(self) -> bool {
        self == OnOff::On
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyFilter {
    UPeap,
    WPeap,
    Peap,
    Heap,
    All,
}

#[derive(Debug, Args)]
struct Selection {
    #[arg(long, value_enum, default_value_t = StrategyFilter::All)]
    strategy: StrategyFilter,
    /// Block heuristic (uni, bsr, bepr); all when omitted.
    #[arg(long)]
    block: Option<BlockHeuristic>,
    /// Unit heuristic (uni, nsig, uepf); all when omitted.
    #[arg(long)]
    unit: Option<UnitHeuristic>,
    /// Strategic path ordinal (1-based); all when omitted.
    #[arg(long)]
    path: Option<usize>,
    /// Restrict parallel propagation to significant edges.
    #[arg(long, value_enum)]
    gating: Option<OnOff>,
    /// Let effort propagate to later sublevels of the same block.
    #[arg(long, value_enum)]
    within_block: Option<OnOff>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate opinions and row-normalize the direct influence matrix.
    #[command(group(clap::ArgGroup::new("source").required(true).args(["project", "dim", "opinions"])))]
    Normalize {
        #[arg(long)]
        project: Option<PathBuf>,
        /// Direct influence matrix as labelled CSV.
        #[arg(long)]
        dim: Option<PathBuf>,
        /// Expert opinion matrices as labelled CSV, 0-6 scale.
        #[arg(long, num_args = 1..)]
        opinions: Vec<PathBuf>,
        /// Per-expert weights for `--opinions`.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Total relation matrix, threshold and significant edges.
    Trm {
        #[command(flatten)]
        project: ProjectArg,
        #[command(flatten)]
        output: Output,
    },
    /// Accessible, latent and excluded factors with their levels.
    Classify {
        #[command(flatten)]
        project: ProjectArg,
        #[command(flatten)]
        output: Output,
    },
    /// Enumerate strategic paths.
    Paths {
        #[command(flatten)]
        project: ProjectArg,
        #[command(flatten)]
        output: Output,
    },
    /// Per-factor efforts, inflows and propagation factors of strategies.
    Evaluate {
        #[command(flatten)]
        project: ProjectArg,
        #[command(flatten)]
        selection: Selection,
        #[command(flatten)]
        output: Output,
    },
    /// TotalEPI of strategies side by side.
    Compare {
        #[command(flatten)]
        project: ProjectArg,
        #[command(flatten)]
        selection: Selection,
        #[command(flatten)]
        output: Output,
    },
    /// Check the engines against the brute-force oracles.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
        #[command(flatten)]
        output: Output,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_PARSE
                }
            };
        }
    };
    let (result, out_path) = execute(cli.command);
    match result {
        Ok((text, code)) => {
            let written = match out_path {
                Some(p) => std::fs::write(&p, text.as_bytes()),
                None => out.write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_PARSE;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_parse_failure() {
        EXIT_PARSE
    } else {
        EXIT_VALIDATION
    }
}

fn execute(command: Command) -> (Result<(String, i32)>, Option<PathBuf>) {
    match command {
        Command::Normalize {
            project,
            dim,
            opinions,
            weights,
            output,
        } => {
            let r = cmd_normalize(project.as_deref(), dim.as_deref(), &opinions, weights)
                .and_then(|p| p.render(output.format));
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Trm { project, output } => {
            let r = load_project(&project.project).and_then(|p| {
                let trm = p.total_relation()?;
                TrmPayload::new(&p.system, &trm).render(output.format)
            });
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Classify { project, output } => {
            let r = load_project(&project.project).and_then(|p| {
                let (daf, ndaf) = classify_factors(&p.system)?;
                ClassifyPayload::new(&p.system, daf, ndaf).render(output.format)
            });
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Paths { project, output } => {
            let r = load_project(&project.project).and_then(|p| {
                let paths = enumerate_paths(&p.system)?;
                PathsPayload::new(&p.system, &paths).render(output.format)
            });
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Evaluate {
            project,
            selection,
            output,
        } => {
            let r = load_project(&project.project).and_then(|mut p| {
                let results = evaluate_selection(&mut p, &selection)?;
                EvaluatePayload {
                    metadata: ReportMetadata::new(p.id(), p.options.clone()),
                    results,
                }
                .render(output.format)
            });
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Compare {
            project,
            selection,
            output,
        } => {
            let r = load_project(&project.project).and_then(|mut p| compare(&mut p, &selection, output.format));
            (r.map(|s| (s, EXIT_OK)), output.out)
        }
        Command::Verify { seed, cases, output } => {
            let r = run_verification(VerifyConfig { seed, cases }).and_then(|s| {
                let code = if s.passed { EXIT_OK } else { EXIT_VALIDATION };
                let text = match output.format {
                    Format::Md => format!("{}\n{}\n", s.render(Format::Md)?, summary_line(&s)),
                    f => s.render(f)?,
                };
                Ok((text, code))
            });
            (r, output.out)
        }
    }
}

fn compare(p: &mut Project, selection: &Selection, format: Format) -> Result<String> {
    let results = evaluate_selection(p, selection)?;
    ComparisonReport::new(ReportMetadata::new(p.id(), p.options.clone()), &results).render(format)
}

/// Evaluates the strategies picked by `selection`. Flag overrides are written
/// back into the project options so they show up in report metadata.
fn evaluate_selection(p: &mut Project, selection: &Selection) -> Result<Vec<StrategyResult>> {
    if let Some(g) = selection.gating {
        p.options.peap_gating = g.on();
    }
    if let Some(w) = selection.within_block {
        p.options.within_block_propagation = w.on();
    }
    let mut results = Vec::new();

    let variants: &[PeapVariant] = match selection.strategy {
        StrategyFilter::UPeap => &[PeapVariant::Uniform],
        StrategyFilter::WPeap => &[PeapVariant::Weighted],
        StrategyFilter::Peap | StrategyFilter::All => &[PeapVariant::Uniform, PeapVariant::Weighted],
        StrategyFilter::Heap => &[],
    };
    if !variants.is_empty() {
        let gate = p.gate()?;
        let config = PeapConfig {
            gating: p.options.peap_gating,
            total_effort: p.options.total_effort,
        };
        for &v in variants {
            results.push(evaluate_peap(&p.system, &p.nsig, &p.ndim, v, config, gate.as_ref())?);
        }
    }

    if matches!(selection.strategy, StrategyFilter::Heap | StrategyFilter::All) {
        let paths = enumerate_paths(&p.system)?;
        let chosen: Vec<_> = match selection.path {
            Some(k) if k == 0 || k > paths.len() => {
                return Err(Error::PathOutOfRange {
                    index: k,
                    count: paths.len(),
                })
            }
            Some(k) => vec![&paths[k - 1]],
            None => paths.iter().collect(),
        };
        let heuristics: Vec<HeapHeuristic> = HeapHeuristic::grid()
            .into_iter()
            .filter(|h| selection.block.is_none_or(|b| b == h.block))
            .filter(|h| selection.unit.is_none_or(|u| u == h.unit))
            .collect();
        let opts = PropagationOptions {
            within_block: p.options.within_block_propagation,
        };
        for path in chosen {
            for &h in &heuristics {
                results.push(evaluate_heap(path, h, &p.nsig, &p.ndim, opts, p.options.total_effort)?);
            }
        }
    }
    Ok(results)
}

fn cmd_normalize(
    project: Option<&Path>,
    dim: Option<&Path>,
    opinions: &[PathBuf],
    weights: Option<Vec<f64>>,
) -> Result<NormalizePayload> {
    let (factors, dim) = if let Some(path) = project {
        let p = load_project(path)?;
        let ids = p.system.factors().iter().map(|f| f.id.clone()).collect();
        match p.dim {
            Some(d) => (ids, d),
            // a project given as an N-DIM is already normalized
            None => {
                return Ok(NormalizePayload {
                    factors: ids,
                    dim: None,
                    ndim: p.ndim.matrix().to_rows(),
                })
            }
        }
    } else if let Some(path) = dim {
        let m = read_matrix_csv_file(path)?;
        let d = SquareMatrix::from_rows(&m.rows)?;
        let report = ValidationReport {
            violations: check_influence(m.ids.len(), &d, false),
        };
        report.into_result()?;
        (m.ids, DirectInfluenceMatrix(d))
    } else {
        let mut ids: Option<Vec<FactorId>> = None;
        let mut matrices = Vec::with_capacity(opinions.len());
        for path in opinions {
            let expert = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (these, m) = read_opinion_csv(std::fs::File::open(path)?, &expert)?;
            match &ids {
                Some(first) if *first != these => {
                    return Err(Error::Project(format!(
                        "opinion file `{}` lists factors in a different order",
                        path.display()
                    )))
                }
                Some(_) => {}
                None => ids = Some(these),
            }
            matrices.push(m);
        }
        let dim = MeanAggregator { weights }.aggregate(&matrices)?;
        (ids.ok_or(Error::NoOpinions)?, dim)
    };
    let ndim = normalize_dim(&dim);
    Ok(NormalizePayload {
        factors,
        dim: Some(dim.0.to_rows()),
        ndim: ndim.matrix().to_rows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("effprop").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_version_succeed() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("compare"));
        let (code, out, _) = run_args(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains(env!("CARGO_PKG_VERSION")));
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, out, err) = run_args(&["compare"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.contains("--project"));
        let (code, _, _) = run_args(&["normalize"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn normalize_row() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("dim.csv");
        std::fs::write(&f, "factor,a,b,c\na,2,1,1\nb,0,0,0\nc,1,0,0\n").unwrap();
        let (code, out, err) = run_args(&["normalize", "--dim", f.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["ndim"][0], serde_json::json!([0.5, 0.25, 0.25]));
        assert_eq!(v["ndim"][1], serde_json::json!([0.0, 0.0, 0.0]));
    }

    #[test]
    fn negative_dim_is_validation_failure() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("dim.csv");
        std::fs::write(&f, "factor,a,b\na,0,-1\nb,1,0\n").unwrap();
        let (code, out, err) = run_args(&["normalize", "--dim", f.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("negative influence"));
    }
}
