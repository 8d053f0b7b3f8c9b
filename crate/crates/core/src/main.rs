use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cf_secrecy::channel::secrecy_power_policy;
use cf_secrecy::channel::{db_to_linear, make_instance, InstanceFile, Mode};
use cf_secrecy::experiment::{
    output_path, rational_spot_check, run_codec_demo, run_lemma1, run_snr_sweep, run_theta_sweep,
    write_lemma1_csv, write_sidecar, write_sweep_csv, write_theta_csv, CodecDemoConfig, GainSpec,
    Lemma1Config, RunMode, SnrGrid, SweepConfig,
};
use cf_secrecy::lattice::{brute_force_minima, SearchOptions};
use cf_secrecy::matrix::build_f;
use cf_secrecy::plot::emit_plot;
use cf_secrecy::rates::analyze;
use cf_secrecy::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cfsec",
    version,
    about = "Secure compute-and-forward rates for the Gaussian wiretap MAC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rates for one channel instance, printed as JSON.
    Rates(RatesArgs),
    /// Secure and baseline sum rates over an SNR grid (CSV).
    Sweep(SweepArgs),
    /// Two-user sweep over the eavesdropper angle (CSV).
    ThetaSweep(ThetaArgs),
    /// Quantized-sum entropy against its bounds (CSV).
    Lemma1(Lemma1Args),
    /// Encode with scalar nested lattices and check alignment and uniformity (JSON).
    CodecDemo(CodecArgs),
    /// Render a CSV from this tool as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// JSON instance file; overrides --h/--g/--snr-db.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Cross-check the minima against exhaustive enumeration in this box.
    #[arg(long)]
    enum_radius: Option<i64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    users: usize,
    #[arg(long, default_value = "0:60:2", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fixed gains instead of Gaussian draws.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "g"
    )]
    h: Option<Vec<f64>>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "h"
    )]
    g: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long, default_value_t = 25.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Print rates at constructed rational-ratio angles.
    #[arg(long)]
    spot_check: bool,
}

#[derive(Args)]
struct Lemma1Args {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    users: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gains: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Index of the quantizing lattice.
    #[arg(long, default_value_t = 0)]
    lattice: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    blocks: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 4)]
    grid_ratio: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn rates(args: RatesArgs) -> Result<()> {
    let inst = match &args.instance {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            InstanceFile::from_json(&text)?.to_instance(Mode::Secrecy)?
        }
        None => {
            let snr = args.snr_db.ok_or_else(|| {
                Error::InvalidParameter("--snr-db is required without --instance".into())
            })?;
            make_instance(&args.h, &args.g, db_to_linear(snr), Mode::Secrecy)?
        }
    };
    let report = analyze(&inst, &SearchOptions::default())?;
    let oracle = match args.enum_radius {
        Some(radius) => {
            let em = build_f(&inst, &secrecy_power_policy(&inst)?)?;
            let brute = brute_force_minima(&em, radius)?;
            let agree = brute
                .norms
                .iter()
                .zip(&report.norms)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1e-300));
            let inside = report
                .coefficients
                .iter()
                .flatten()
                .all(|c| c.abs() <= radius);
            Some(json!({
                "radius": radius,
                "norms": brute.norms,
                "rows": brute.rows,
                "search_inside_box": inside,
                "agree": agree,
            }))
        }
        None => None,
    };
    print_json(&json!({ "report": report, "enumeration": oracle }))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::snr_sweep(
        args.users,
        SnrGrid::parse(&args.snr_db)?,
        args.trials,
        args.seed,
    );
    if let (Some(h), Some(g)) = (args.h, args.g) {
        cfg.users = h.len();
        cfg.gains = GainSpec::Fixed { h, g };
    }
    let out = output_path(args.out.as_deref(), "sweep.csv");
    cfg.out = Some(out.clone());
    let rows = run_snr_sweep(&cfg)?;
    write_sweep_csv(&out, &rows)?;
    write_sidecar(&out, &cfg)?;
    if let Some(svg) = args.plot {
        emit_plot(&out, None, &svg)?;
    }
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn theta_sweep(args: ThetaArgs) -> Result<()> {
    let out = output_path(args.out.as_deref(), "theta.csv");
    let cfg = json!({
        "mode": RunMode::ThetaSweep,
        "snr_db": args.snr_db,
        "points": args.points,
        "h": [1.0, 2f64.sqrt()],
        "g": "sqrt(3) * (cos theta, sin theta)",
        "out": out,
    });
    let rows = run_theta_sweep(args.snr_db, args.points)?;
    write_theta_csv(&out, &rows)?;
    write_sidecar(&out, &cfg)?;
    if let Some(svg) = args.plot {
        emit_plot(&out, None, &svg)?;
    }
    let positive = rows.iter().filter(|r| r.r_sum_secure > 0.0).count();
    eprintln!(
        "wrote {} rows to {}; secure sum rate positive at {positive} angles",
        rows.len(),
        out.display()
    );
    if args.spot_check {
        let slopes = [(0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2)];
        print_json(&rational_spot_check(args.snr_db, &slopes, 0.05)?)?;
    }
    Ok(())
}

fn lemma1(args: Lemma1Args) -> Result<()> {
    let cfg = Lemma1Config {
        dims: args.n,
        users: args.users,
        gains: args.gains,
        snr_db: args.snr_db,
        epsilon: args.epsilon,
        trials: args.trials,
        seed: args.seed,
        lattice: args.lattice,
    };
    let out = output_path(args.out.as_deref(), "lemma1.csv");
    let rows = run_lemma1(&cfg)?;
    write_lemma1_csv(&out, &rows)?;
    write_sidecar(&out, &json!({ "mode": RunMode::Lemma1, "config": cfg }))?;
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn codec_demo(args: CodecArgs) -> Result<()> {
    let mut cfg = CodecDemoConfig {
        block_len: args.n,
        blocks: args.blocks,
        snr_db: args.snr_db,
        grid_ratio: args.grid_ratio,
        trials: args.trials,
        seed: args.seed,
        ..CodecDemoConfig::default()
    };
    if let Some(h) = args.h {
        cfg.h = h;
    }
    if let Some(g) = args.g {
        cfg.g = g;
    }
    let report = run_codec_demo(&cfg)?;
    match args.out {
        Some(out) => {
            write_json(&out, &report)?;
            write_sidecar(&out, &json!({ "mode": RunMode::CodecDemo, "config": cfg }))?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        None => print_json(&report),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rates(a) => rates(a),
        Command::Sweep(a) => sweep(a),
        Command::ThetaSweep(a) => theta_sweep(a),
        Command::Lemma1(a) => lemma1(a),
        Command::CodecDemo(a) => codec_demo(a),
        Command::Plot(a) => emit_plot(&a.csv, None, &a.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
