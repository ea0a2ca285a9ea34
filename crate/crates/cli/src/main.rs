//! Command-line pipeline driver.
//!
//! Subcommands: `connect` (join components), `reduce` (multi-resolution
//! ladder), `features` (graph statistics CSV), `classify` (grid-search SVM
//! cross-validation), and `render` (SVG). Exit codes: 0 on success, 1 on a
//! usage error, 2 on a data error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod io;

use commands::CliError;

#[derive(Parser)]
#[command(name = "shapegraph", version, about = "Shape-graph reduction and classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join all connected components of a graph into one.
    Connect {
        /// Input graph (.json document or .swc).
        input: PathBuf,
        /// Output graph document.
        output: PathBuf,
        /// Samples per edge when ingesting SWC.
        #[arg(long, default_value_t = shapegraph::DEFAULT_SAMPLES_PER_EDGE)]
        samples: usize,
    },
    /// Produce the multi-resolution reduction ladder of a graph.
    Reduce {
        /// Input graph (.json document or .swc).
        input: PathBuf,
        /// Directory for the per-resolution documents.
        outdir: PathBuf,
        /// Comma-separated strictly decreasing resolutions in (0,1).
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.6, 0.4])]
        resolutions: Vec<f64>,
        /// Short-terminal threshold as a fraction of the length percentile.
        #[arg(long, default_value_t = 0.25)]
        theta_tag: f64,
        /// Length percentile anchoring the short-terminal threshold.
        #[arg(long, default_value_t = 50.0)]
        theta_til: f64,
        /// Chamfer percentile bounding similar-terminal clusters.
        #[arg(long, default_value_t = 1.0)]
        phi_til: f64,
        /// Also write the per-level edge- and node-clustering stages.
        #[arg(long)]
        emit_intermediates: bool,
        /// Samples per edge when ingesting SWC.
        #[arg(long, default_value_t = shapegraph::DEFAULT_SAMPLES_PER_EDGE)]
        samples: usize,
    },
    /// Compute feature vectors for a set of graph documents.
    Features {
        /// Glob over graph files (quote it: 'out/*.json').
        pattern: String,
        /// Output CSV path.
        output: PathBuf,
        /// Feature mode: 37 or 17.
        #[arg(long, default_value = "37")]
        mode: String,
        /// Two-column id,label file assigning labels to graph stems.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Cross-validated SVM grid search over a feature CSV.
    Classify {
        /// Feature CSV produced by `features`.
        features: PathBuf,
        /// Cross-validation scheme: `loo` or `kfold:K`.
        #[arg(long, default_value = "loo")]
        scheme: String,
        /// Parameter grid: `default` (18 x 250) or `coarse`.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Seed for stratified fold shuffling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSON summary path.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-cell accuracy CSV (h,eta,accuracy).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Render a graph document to SVG.
    Render {
        /// Input graph (.json document or .swc).
        input: PathBuf,
        /// Output SVG path.
        output: PathBuf,
        /// Color nodes/edges by provenance cluster labels in the metadata.
        #[arg(long)]
        color_clusters: bool,
        /// Samples per edge when ingesting SWC.
        #[arg(long, default_value_t = shapegraph::DEFAULT_SAMPLES_PER_EDGE)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version as "errors" with successful exit.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Connect { input, output, samples } => commands::connect(&input, &output, samples),
        Command::Reduce {
            input,
            outdir,
            resolutions,
            theta_tag,
            theta_til,
            phi_til,
            emit_intermediates,
            samples,
        } => commands::reduce(
            &input,
            &outdir,
            resolutions,
            theta_tag,
            theta_til,
            phi_til,
            emit_intermediates,
            samples,
        ),
        Command::Features {
            pattern,
            output,
            mode,
            labels,
        } => commands::features(&pattern, &output, &mode, labels.as_deref()),
        Command::Classify {
            features,
            scheme,
            grid,
            seed,
            out,
            table,
        } => commands::classify(&features, &scheme, &grid, seed, &out, table.as_deref()),
        Command::Render {
            input,
            output,
            color_clusters,
            samples,
        } => commands::render(&input, &output, color_clusters, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Path stem used as a graph id in CSV outputs.
pub(crate) fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".to_string())
}
