use clap::{Parser, Subcommand, ValueEnum};
use scalekit::cli::{
    cmd_complexity, cmd_fit_runtime, cmd_predict, cmd_sample, cmd_scale, cmd_sweep, GlobalOpts,
    OutputFormat,
};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    #[value(name = "json-lines")]
    JsonLines,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::JsonLines => OutputFormat::JsonLines,
        }
    }
}

/// Model staged conv networks: complexity accounting, scaling strategies,
/// design-space sampling, and runtime prediction.
#[derive(Parser)]
#[command(name = "scalekit", version, about)]
struct Cli {
    /// Directory for output artifacts
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Tabular artifact format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute flops, params, and activations of a model
    Complexity {
        /// Registry name or spec file path
        model: String,
    },
    /// Scale a model by a flop factor with a chosen strategy
    Scale {
        /// Registry name or spec file path
        model: String,
        /// Named strategy: d, w, r, dw, wr, dr, dwr, dWr (default dWr)
        #[arg(long)]
        policy: Option<String>,
        /// Width share of the fast-scaling family, in [0, 1]
        #[arg(long)]
        alpha: Option<f64>,
        /// Flop multiplier, >= 1
        #[arg(long)]
        s: f64,
        /// Keep continuous widths/depths instead of discretizing
        #[arg(long)]
        no_quantize: bool,
    },
    /// Scale a model over a grid of factors for several strategies
    Sweep {
        /// Registry name or spec file path
        model: String,
        /// Comma-separated strategy names
        #[arg(long, value_delimiter = ',', required = true)]
        policies: Vec<String>,
        /// Comma-separated strictly increasing flop multipliers
        #[arg(long = "s-grid", value_delimiter = ',', required = true)]
        s_grid: Vec<f64>,
        /// Keep continuous widths/depths instead of discretizing
        #[arg(long)]
        no_quantize: bool,
    },
    /// Randomly sample RegNet models inside a flop window
    Sample {
        /// Block family: Y or Z
        #[arg(long, default_value = "Y")]
        kind: String,
        /// Target flop count, e.g. 500MF or 4GF
        #[arg(long)]
        flops: String,
        /// Relative acceptance window around the target
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
        /// Number of models to accept
        #[arg(long, default_value_t = 32)]
        count: usize,
    },
    /// Fit the linear epoch-time model from a measurement CSV
    FitRuntime {
        /// CSV with header model,strategy,flops,params,acts,epoch_time_min,batch_size
        measurements: PathBuf,
        /// Feature set: acts or acts+flops
        #[arg(long, default_value = "acts")]
        features: String,
    },
    /// Predict epoch time of a model from a fitted runtime model
    Predict {
        /// Fitted model JSON written by fit-runtime
        model_file: PathBuf,
        /// Registry name or spec file path
        model: String,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let opts = GlobalOpts {
        out_dir: cli.out,
        format: cli.format.into(),
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Complexity { model } => cmd_complexity(model, &opts),
        Command::Scale {
            model,
            policy,
            alpha,
            s,
            no_quantize,
        } => cmd_scale(model, policy.as_deref(), *alpha, *s, !no_quantize, &opts),
        Command::Sweep {
            model,
            policies,
            s_grid,
            no_quantize,
        } => cmd_sweep(model, policies, s_grid, !no_quantize, &opts),
        Command::Sample {
            kind,
            flops,
            tolerance,
            count,
        } => cmd_sample(kind, flops, *tolerance, *count, &opts),
        Command::FitRuntime {
            measurements,
            features,
        } => cmd_fit_runtime(measurements, features, &opts),
        Command::Predict { model_file, model } => cmd_predict(model_file, model, &opts),
    };
    if result.exit_code == 0 {
        println!("{}", result.summary);
    } else {
        eprintln!("{}", result.summary);
    }
    std::process::exit(result.exit_code);
}
