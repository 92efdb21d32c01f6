use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use contour::gcr::tube_capture_probability;
use contour::harness::{
    analyze_csv, emit_analysis, emit_report, run_eigen_study, run_study, scores_csv, MethodConfig, ReportFormat,
    StudyConfig,
};
use contour::simgen::{generate, oracle_lambda, ModelId, ModelSpec, OracleModel};
use contour::{Error, Norm, Result};

#[derive(Parser)]
#[command(name = "contour", version, about = "Contour regression for sufficient dimension reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output format: json, text or tsv.
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Study configuration (key = value text, or a JSON report to re-run).
    #[arg(long)]
    config: PathBuf,
    /// Override `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the subspace distance norm: frobenius or spectral.
    #[arg(long)]
    norm: Option<Norm>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded comparison study and report mean distances.
    Study(StudyArgs),
    /// Average the diagnostic eigenvalues of SCR and GCR over replicates.
    EigenStudy(StudyArgs),
    /// Monte-Carlo conditional second moments for the two-predictor designs.
    Oracle {
        /// ex2_1 or ex2_2.
        #[arg(long)]
        model: String,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1_000_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability that an independent point falls in a tube of radius rho.
    TubeProb {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a reduction of a CSV data set.
    Analyze {
        /// Input CSV with a header row.
        #[arg(long)]
        input: PathBuf,
        /// Name of the response column.
        #[arg(long)]
        response: String,
        /// Method with parameters, e.g. `gcr:r=0.15:rho=3.5` or `sir:h=6`.
        #[arg(long, default_value = "gcr")]
        method: MethodConfig,
        /// Dimension of the reduction.
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Also write per-observation scores as CSV.
        #[arg(long)]
        scores: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Write a simulated data set as CSV (columns x1..xp, y).
    Generate {
        #[arg(long)]
        model: ModelId,
        /// Noise level, or location `a` for Ex6_5.
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_config(args: &StudyArgs) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = StudyConfig::from_source(&text)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(norm) = args.norm {
        cfg.norm = norm;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Study(args) => {
            let report = run_study(&load_config(&args)?)?;
            write_out(args.output.out.as_deref(), &emit_report(&report, args.output.format))
        }
        Command::EigenStudy(args) => {
            let report = run_eigen_study(&load_config(&args)?)?;
            write_out(args.output.out.as_deref(), &emit_report(&report, args.output.format))
        }
        Command::Oracle {
            model,
            c,
            sigma,
            pairs,
            seed,
            out,
        } => {
            let model = match model.to_ascii_lowercase().replace('.', "_").as_str() {
                "ex2_1" => OracleModel::Ex2_1,
                "ex2_2" => OracleModel::Ex2_2,
                other => return Err(Error::InvalidArgument(format!("oracle model must be ex2_1 or ex2_2, got '{other}'"))),
            };
            let (l1, l2) = oracle_lambda(model, c, sigma, pairs, seed)?;
            write_out(out.as_deref(), format!("lambda1\t{l1}\nlambda2\t{l2}\n").as_bytes())
        }
        Command::TubeProb {
            p,
            rho,
            samples,
            seed,
            out,
        } => {
            let prob = tube_capture_probability(p, rho, samples, seed)?;
            write_out(out.as_deref(), format!("{prob}\n").as_bytes())
        }
        Command::Analyze {
            input,
            response,
            method,
            q,
            scores,
            output,
        } => {
            let report = analyze_csv(&input, &response, &method, q)?;
            if let Some(path) = scores {
                write_out(Some(&path), scores_csv(&report).as_bytes())?;
            }
            write_out(output.out.as_deref(), &emit_analysis(&report, output.format))
        }
        Command::Generate {
            model,
            sigma,
            n,
            seed,
            out,
        } => {
            let data = generate(&ModelSpec {
                id: model,
                sigma_or_a: sigma,
                n,
                seed,
            })?
            .data;
            let p = data.p();
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<String> = (1..=p).map(|k| format!("x{k}")).collect();
            header.push("y".into());
            w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
            for i in 0..data.n() {
                let mut row: Vec<String> = (0..p).map(|k| data.predictors()[(i, k)].to_string()).collect();
                row.push(data.response()[i].to_string());
                w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            write_out(out.as_deref(), &bytes)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
