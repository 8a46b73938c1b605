mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigFile;
use sphgof::Error;

#[derive(Parser, Debug)]
#[command(name = "sphgof", version, about = "Harmonic-space Gaussianity testing")]
struct Cli {
    /// Worker threads (0 = all cores). Also via SPHGOF_WORKERS. Never
    /// affects numerical results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// JSON config file; its fields override the flags.
    #[arg(long, global = true)]
    config: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a coefficient array (null Gaussian or an alternative) to CSV.
    Simulate(SimulateArgs),
    /// Finite-L Monte Carlo calibration of the sup statistic.
    Calibrate(CalibrateArgs),
    /// Calibration against the limiting field sampled on a grid.
    LimitCalibrate(LimitCalibrateArgs),
    /// Test a coefficient file for Gaussianity.
    Test(TestArgs),
    /// Rejection-rate sweep over the non-Gaussianity fraction.
    Power(PowerArgs),
    /// Run the oracle verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct AlternativeFlags {
    /// gaussian | mixture | segments | heavy-tail
    #[arg(long, default_value = "gaussian")]
    alternative: String,
    /// Fraction of field energy carried by the segment component.
    #[arg(long, default_value_t = 0.0)]
    png: f64,
    /// Degrees of freedom of the heavy-tail scale mixture.
    #[arg(long, default_value_t = 5.0)]
    nu: f64,
    #[arg(long, default_value_t = 4.0)]
    segment_count: f64,
    #[arg(long, default_value_t = 0.3)]
    segment_length_min: f64,
    #[arg(long, default_value_t = 1.0)]
    segment_length_max: f64,
    #[arg(long, default_value_t = 0.0)]
    segment_level_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    segment_level_sd: f64,
    #[arg(long, default_value_t = 0.03)]
    segment_half_width: f64,
}

impl AlternativeFlags {
    fn segments(&self) -> sphgof::alternatives::SegmentParams {
        sphgof::alternatives::SegmentParams {
            count_mean: self.segment_count,
            length_min: self.segment_length_min,
            length_max: self.segment_length_max,
            level_mean: self.segment_level_mean,
            level_sd: self.segment_level_sd,
            half_width: self.segment_half_width,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    lmax: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// "flat" or a spectrum CSV path.
    #[arg(long, default_value = "flat")]
    spectrum: String,
    #[command(flatten)]
    alt: AlternativeFlags,
    /// Output coefficient CSV.
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long)]
    lmax: u32,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value = "0.1,0.05,0.01")]
    levels: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Calibrate against the limiting field instead of finite-L nulls.
    #[arg(long, default_value_t = false)]
    limit: bool,
    #[arg(long, default_value_t = 128)]
    grid_alpha: usize,
    #[arg(long, default_value_t = 64)]
    grid_r: usize,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct LimitCalibrateArgs {
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value = "0.1,0.05,0.01")]
    levels: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 128)]
    grid_alpha: usize,
    #[arg(long, default_value_t = 64)]
    grid_r: usize,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct TestArgs {
    /// Coefficient CSV to test.
    #[arg(long)]
    input: String,
    /// Calibration table (finite-L at the matching degree, or limit-law).
    #[arg(long)]
    calibration: String,
    /// Report JSON output (text goes to stdout).
    #[arg(long)]
    out: Option<String>,
    /// Optional export of the corrected-process surface as CSV.
    #[arg(long)]
    field_out: Option<String>,
    #[arg(long, default_value_t = 64)]
    field_alphas: usize,
    #[arg(long, default_value_t = 32)]
    field_rs: usize,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[arg(long)]
    lmax: u32,
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5")]
    png_list: String,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long)]
    calibration: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    alt: AlternativeFlags,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Closed-form checks only (fast).
    #[arg(long, default_value_t = false)]
    quick: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return fail(&e),
    };
    let workers = overrides.workers.unwrap_or_else(|| {
        std::env::var("SPHGOF_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(cli.workers)
    });
    if workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args, &overrides),
        Command::Calibrate(args) => commands::calibrate(args, &overrides),
        Command::LimitCalibrate(args) => commands::limit_calibrate(args, &overrides),
        Command::Test(args) => commands::test(args, &overrides),
        Command::Power(args) => commands::power(args, &overrides),
        Command::Verify(args) => commands::verify(args, &overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

/// 2 for configuration/usage problems, 1 for runtime failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput { .. }
        | Error::Domain(_)
        | Error::NonpositiveSpectrum { .. }
        | Error::LmaxMismatch { .. }
        | Error::UnderResolvedQuadrature { .. } => 2,
        Error::DegenerateRow { .. } | Error::CovarianceNotPsd { .. } | Error::Io(_) => 1,
    }
}
