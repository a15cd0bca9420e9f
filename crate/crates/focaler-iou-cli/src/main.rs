//! `focaler-iou`: evaluate IoU-family losses over box files, check analytic
//! gradients, run and sweep synthetic regression simulations, analyze sample
//! difficulty, and render the bundled reference numbers.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use focaler_iou::{FocusMode, SiouParams};

use focaler_iou_cli::commands::{self, EvalArgs, GradcheckArgs, SweepArgs};
use focaler_iou_cli::config::interval_from_fields;

#[derive(Parser)]
#[command(
    name = "focaler-iou",
    version,
    about = "Bounding-box regression loss toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FocalerFlags {
    /// Lower bound of the focusing interval (requires --focaler-u)
    #[arg(long, value_name = "F")]
    focaler_d: Option<f64>,
    /// Upper bound of the focusing interval (requires --focaler-d)
    #[arg(long, value_name = "F")]
    focaler_u: Option<f64>,
}

#[derive(Args)]
struct SiouFlags {
    /// SIoU shape exponent
    #[arg(long, value_name = "F", default_value_t = 4.0)]
    siou_theta: f64,
    /// SIoU angle-term denominator guard
    #[arg(long, value_name = "F", default_value_t = 1e-7)]
    siou_eps: f64,
}

impl SiouFlags {
    fn params(&self) -> Result<SiouParams> {
        Ok(SiouParams::new(self.siou_theta, self.siou_eps)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a loss over a CSV of box pairs
    Eval {
        /// Input CSV with header id,x1,y1,x2,y2,gx1,gy1,gx2,gy2
        input: PathBuf,
        /// Loss token: iou, giou, diou, ciou, eiou or siou
        #[arg(long, default_value = "iou")]
        loss: String,
        #[command(flatten)]
        focaler: FocalerFlags,
        #[command(flatten)]
        siou: SiouFlags,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare analytic gradients against central finite differences
    Gradcheck {
        /// Comma-separated loss tokens, or "all"
        #[arg(long, default_value = "all")]
        kinds: String,
        /// Sample pairs per kind
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Maximum admissible relative error
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Relative finite-difference step
        #[arg(long, default_value_t = 1e-6)]
        step: f64,
        #[command(flatten)]
        focaler: FocalerFlags,
        #[command(flatten)]
        siou: SiouFlags,
        /// Optional JSON report path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the synthetic regression simulator from a JSON config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Directory for summary.csv and per-config trace CSVs
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Sweep Focaler intervals over a (d, u) grid
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Base loss the intervals are composed with
        #[arg(long, default_value = "iou")]
        loss: String,
        /// Comma-separated d values in [0, 1]
        #[arg(long)]
        d_grid: String,
        /// Comma-separated u values in [0, 1]
        #[arg(long)]
        u_grid: String,
        /// Output summary CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// IoU-distribution statistics and a recommended focusing interval
    Analyze {
        /// Input CSV with header id,x1,y1,x2,y2,gx1,gy1,gx2,gy2
        input: PathBuf,
        /// focus_hard or focus_easy
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Output JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the bundled paper-reported detector numbers
    Report {
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Eval { input, loss, focaler, siou, out } => commands::eval(&EvalArgs {
            input,
            kind: loss.parse()?,
            interval: interval_from_fields(focaler.focaler_d, focaler.focaler_u, "eval")?,
            siou: siou.params()?,
            out,
        }),
        Command::Gradcheck { kinds, n, seed, tol, step, focaler, siou, out } => {
            commands::gradcheck(&GradcheckArgs {
                kinds: commands::parse_kinds(&kinds)?,
                n,
                seed,
                tol,
                step,
                interval: interval_from_fields(focaler.focaler_d, focaler.focaler_u, "gradcheck")?,
                siou: siou.params()?,
                out,
            })
        }
        Command::Simulate { config, out_dir } => commands::simulate(&config, &out_dir),
        Command::Sweep { config, loss, d_grid, u_grid, out } => commands::sweep(&SweepArgs {
            config,
            kind: loss.parse()?,
            d_grid: commands::parse_grid(&d_grid, "--d-grid")?,
            u_grid: commands::parse_grid(&u_grid, "--u-grid")?,
            out,
        }),
        Command::Analyze { input, mode, bins, out } => {
            commands::analyze(&input, mode.parse::<FocusMode>()?, bins, &out)
        }
        Command::Report { out } => commands::report(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders its own message; route usage errors to stderr
            if code == 0 {
                print!("{e}");
            } else {
                eprint!("{e}");
            }
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
