//! Command-line front end. Exit codes: 0 success, 2 usage or parse, 3 capacity, 4 I/O.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bsaa::worst_case_regret_bsaa;
use crate::design::{solve_design_capped, DEFAULT_N_MAX_CAP};
use crate::error::Result;
use crate::experiments::{run_sample_complexity, run_sweep, x_grid, SweepConfig, Table};
use crate::km::{worst_case_regret_km, LatticeSpec};
use crate::model::{CensoringDesign, CostParameters, StepCdf};
use crate::oracle::{exact_expected_regret, mc_expected_regret};
use crate::policies::Policy;

#[derive(Debug, Parser)]
#[command(name = "censored-regret", version, about = "Worst-case regret of newsvendor policies on censored data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleModeArg {
    Exact,
    Mc,
}

#[derive(Debug, clap::Args)]
pub struct Costs {
    /// Underage cost per unit.
    #[arg(long, default_value_t = 0.8)]
    pub cu: f64,
    /// Overage cost per unit.
    #[arg(long, default_value_t = 0.2)]
    pub co: f64,
}

#[derive(Debug, clap::Args)]
pub struct Lattice {
    /// KM lattice mesh.
    #[arg(long, default_value_t = 0.005)]
    pub mesh: f64,
    /// KM local refinement rounds.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
}

impl Lattice {
    fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.mesh, self.refine)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst-case regret certificate for one design.
    Regret {
        /// Design literal `level:count[,level:count...]`.
        #[arg(long)]
        design: String,
        #[arg(long, default_value = "bsaa")]
        policy: String,
        #[command(flatten)]
        costs: Costs,
        /// BSAA grid tolerance.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        lattice: Lattice,
    },
    /// Regret-vs-n sweep written as CSV.
    Sweep {
        #[arg(long, default_value = "km")]
        policy: String,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0.8)]
        q: f64,
        /// Comma-separated numbers of uncensored samples.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,5,10")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        lattice: Lattice,
        #[arg(long)]
        output: PathBuf,
    },
    /// Minimal KM sample size reaching a fraction of the no-information regret.
    SampleComplexity {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0.25)]
        target_frac: f64,
        /// Explicit comma-separated x values; overrides the x range.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, default_value_t = 0.70)]
        x_min: f64,
        #[arg(long, default_value_t = 0.95)]
        x_max: f64,
        #[arg(long, default_value_t = 0.01)]
        x_step: f64,
        #[arg(long, default_value_t = 1000)]
        n_cap: usize,
        #[command(flatten)]
        lattice: Lattice,
        #[arg(long)]
        output: PathBuf,
    },
    /// Optimal BSAA exploration design under an inventory budget.
    DesignOpt {
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0.02)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_N_MAX_CAP)]
        n_max_cap: usize,
    },
    /// Expected regret of a policy at a fixed demand distribution.
    Oracle {
        #[arg(long)]
        policy: String,
        #[arg(long)]
        design: String,
        /// Distribution literal `point:prob[,point:prob...]`.
        #[arg(long)]
        dist: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: OracleModeArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        costs: Costs,
    },
}

/// Fails early on an output path that cannot be created, before any long computation.
fn check_writable(path: &std::path::Path) -> Result<()> {
    Table { header: Vec::new(), rows: Vec::new() }.write_csv(path)
}

fn costs(c: &Costs) -> Result<CostParameters> {
    CostParameters::new(c.cu, c.co)
}

/// Executes one parsed command, writing its report to `out`.
pub fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Regret { design, policy, costs: c, tol, lattice } => {
            let design: CensoringDesign = design.parse()?;
            let cp = costs(c)?;
            let cert = match policy.parse::<Policy>()? {
                Policy::Bsaa => worst_case_regret_bsaa(&design, &cp, *tol)?,
                Policy::Km => worst_case_regret_km(&design, &cp, &lattice.spec()?)?,
            };
            writeln!(out, "design: {design}")?;
            writeln!(out, "{cert}")?;
        }
        Command::Sweep { policy, x, q, m, n_min, n_max, tol, lattice, output } => {
            let config = SweepConfig {
                policy: policy.parse()?,
                x: *x,
                q: *q,
                m_values: m.clone(),
                n_range: *n_min..=*n_max,
                tol: *tol,
                lattice: lattice.spec()?,
            };
            check_writable(output)?;
            let table = run_sweep(&config)?;
            table.write_csv(output)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), output.display())?;
        }
        Command::SampleComplexity { q, target_frac, x, x_min, x_max, x_step, n_cap, lattice, output } => {
            let xs = if x.is_empty() { x_grid(*x_min, *x_max, *x_step)? } else { x.clone() };
            let lattice = lattice.spec()?;
            check_writable(output)?;
            let table = run_sample_complexity(*q, *target_frac, &xs, *n_cap, &lattice)?;
            table.write_csv(output)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), output.display())?;
        }
        Command::DesignOpt { budget, q, eps, n_max_cap } => {
            let res = solve_design_capped(*budget, *q, *eps, *n_max_cap)?;
            let levels: Vec<String> = res.levels.iter().map(|v| v.to_string()).collect();
            writeln!(out, "budget: {}", res.budget)?;
            writeln!(out, "n_star: {}", res.n_star)?;
            writeln!(out, "levels: {}", levels.join(","))?;
            writeln!(out, "value: {}", res.value)?;
            writeln!(out, "u_bar: {}", res.u_bar)?;
            writeln!(out, "n_max: {}", res.n_max)?;
        }
        Command::Oracle { policy, design, dist, mode, trials, seed, costs: c } => {
            let policy: Policy = policy.parse()?;
            let design: CensoringDesign = design.parse()?;
            let dist: StepCdf = dist.parse()?;
            let cp = costs(c)?;
            let est = match mode {
                OracleModeArg::Exact => exact_expected_regret(policy, &design, &dist, &cp)?,
                OracleModeArg::Mc => mc_expected_regret(policy, &design, &dist, &cp, *trials, *seed)?,
            };
            writeln!(out, "mode: {}", est.mode)?;
            writeln!(out, "mean: {}", est.mean)?;
            writeln!(out, "std_error: {}", est.std_error)?;
            writeln!(out, "trials: {}", est.trials)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli.command, &mut out) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
