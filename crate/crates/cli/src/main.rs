use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use liesys_cli::{run, Experiment, MethodName, Resolution, RunRequest};

/// Reproduce the Lie-system integrator experiments and write CSV data.
#[derive(Parser)]
#[command(name = "liesys", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cayley-Klein system: trajectory and invariant tracks.
    Ck(Common),
    /// Planar limit-cycle system: circle retention of geometric vs RK4 runs.
    LimitCycle(Common),
    /// Global error against a tiny-step reference for halving step sizes.
    Convergence(Common),
    /// Riccati superposition rule against direct integration.
    RiccatiCheck(Common),
}

#[derive(Args)]
struct Common {
    /// magnus2, magnus4, rkmk or rk4.
    #[arg(long)]
    method: Option<MethodName>,
    /// Step size; must divide the interval.
    #[arg(long = "h", conflicts_with = "steps")]
    h: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    /// Comma-separated initial point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    kappa1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa2: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long = "ref-steps")]
    ref_steps: Option<usize>,
}

impl Common {
    fn into_request(self, experiment: Experiment) -> RunRequest {
        let mut req = RunRequest::new(experiment, self.out);
        req.method = self.method;
        req.resolution = match (self.h, self.steps) {
            (Some(h), _) => Some(Resolution::StepSize(h)),
            (None, Some(n)) => Some(Resolution::Steps(n)),
            (None, None) => None,
        };
        req.t0 = self.t0.unwrap_or(req.t0);
        req.t1 = self.t1.unwrap_or(req.t1);
        req.x0 = self.x0;
        req.kappa1 = self.kappa1.unwrap_or(req.kappa1);
        req.kappa2 = self.kappa2.unwrap_or(req.kappa2);
        req.ref_steps = self.ref_steps;
        req
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let req = match cli.command {
        Command::Ck(c) => c.into_request(Experiment::Ck),
        Command::LimitCycle(c) => c.into_request(Experiment::LimitCycle),
        Command::Convergence(c) => c.into_request(Experiment::Convergence),
        Command::RiccatiCheck(c) => c.into_request(Experiment::RiccatiCheck),
    };
    match run(&req).with_context(|| format!("{:?} run failed", req.experiment)) {
        Ok(report) => {
            print!("{}", report.summary());
            if report.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
