use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wigner_grav::dynamics::EvolutionKind;
use wigner_grav::experiments::{
    cmd_diffusion_purities, cmd_negativity, cmd_potentials, cmd_purity_curve, cmd_trajectories,
    CommonArgs, DiffusionArgs, ExperimentReport, Format, NegativityArgs, PotentialsArgs,
    PurityCurveArgs, TrajectoryArgs,
};
use wigner_grav::observables::PurityMethod;
use wigner_grav::quadrature::{QuadratureConfig, Rule};
use wigner_grav::Result;

#[derive(Parser)]
#[command(
    name = "wigner-grav",
    version,
    about = "Gravitationally coupled Wigner function experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Parameter file with `key = value` lines.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 32)]
    pos_nodes: usize,
    #[arg(long, default_value_t = 512)]
    mom_nodes: usize,
    #[arg(long, default_value = "gauss-legendre")]
    rule: Rule,
}

impl Common {
    fn into_args(self) -> CommonArgs {
        CommonArgs {
            params_file: self.params,
            output: self.output,
            format: self.format,
            quadrature: QuadratureConfig {
                pos_nodes: self.pos_nodes,
                mom_nodes: self.mom_nodes,
                rule: self.rule,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Marginal purity against time.
    PurityCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Comma-separated subset of qt, taylor, fit.
        #[arg(long, value_delimiter = ',', default_value = "qt,taylor,fit")]
        kinds: Vec<EvolutionKind>,
        #[arg(long, default_value = "analytic")]
        method: PurityMethod,
    },
    /// Momentum-marginal negativity of the stepwise model.
    Negativity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.5)]
        t_max: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        d_over_threshold: f64,
    },
    /// Global and reduced purities under momentum diffusion.
    DiffusionPurities {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.5)]
        t_max: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        d_over_threshold: f64,
        /// Cross-check against brute-force quadrature (slow).
        #[arg(long)]
        oracle: bool,
    },
    /// Relative trajectories under the exact and approximate potentials.
    Trajectories {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Newtonian potential and its quadratic approximations.
    Potentials {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
}

fn run(cli: Cli) -> Result<ExperimentReport> {
    match cli.command {
        Command::PurityCurve {
            common,
            t_max,
            steps,
            kinds,
            method,
        } => cmd_purity_curve(&PurityCurveArgs {
            common: common.into_args(),
            t_max,
            steps,
            kinds,
            method,
        }),
        Command::Negativity {
            common,
            t_max,
            steps,
            d_over_threshold,
        } => cmd_negativity(&NegativityArgs {
            common: common.into_args(),
            t_max,
            steps,
            d_over_threshold,
        }),
        Command::DiffusionPurities {
            common,
            t_max,
            steps,
            d_over_threshold,
            oracle,
        } => cmd_diffusion_purities(&DiffusionArgs {
            common: common.into_args(),
            t_max,
            steps,
            d_over_threshold,
            oracle,
        }),
        Command::Trajectories {
            common,
            t_max,
            steps,
        } => cmd_trajectories(&TrajectoryArgs {
            common: common.into_args(),
            t_max,
            steps,
        }),
        Command::Potentials { common, points } => cmd_potentials(&PotentialsArgs {
            common: common.into_args(),
            points,
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            eprint!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
