use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use effham_core::report::{run_report, summary, ModelSource, ReportOptions};

#[derive(Debug, Parser)]
#[command(name = "effham", version, about = "Effective-Hamiltonian diagnostics for multi-tone models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build effective Hamiltonians for a model and write defect/oracle diagnostics.
    Report {
        /// A `.ham` file or `builtin:NAME`.
        model: String,
        /// Orders to build, 2 to 6.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        orders: Vec<usize>,
        /// End of the time grid (default 10 / min ω).
        #[arg(long)]
        tmax: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Coupling scale factors for the sweep table.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        #[arg(long, default_value_t = effham_core::model::DEFAULT_TOL_ZERO)]
        tol_zero: f64,
        #[arg(long, default_value_t = effham_core::model::DEFAULT_GAP_MIN)]
        gap_min: f64,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV time-series path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Report { model, orders, tmax, grid, sweep, tol_zero, gap_min, out, csv } => {
            let source: ModelSource = match model.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let to_stdout = out.is_none();
            let opts = ReportOptions { orders, tmax, grid, sweep, tol_zero, gap_min, out, csv, ..ReportOptions::default() };
            match run_report(&source, &opts) {
                Ok(report) => {
                    if to_stdout {
                        print!("{}", report.to_json());
                    }
                    eprint!("{}", summary(&report));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
