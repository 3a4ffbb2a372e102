use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubeperc::output::{write_csv, write_json};
use cubeperc::{run, ExperimentSpec, HarnessError, Kind, Params};

/// Percolation, first-passage percolation and Richardson's model on the n-cube.
#[derive(Parser)]
#[command(name = "cubeperc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bernoulli bond percolation at p = c/n: P(0 connected to 1).
    Percolate(Common),
    /// Oriented first-passage time with exponential(1) weights.
    Ofpp(Common),
    /// Richardson's model: infection time of the top vertex.
    Richardson(Common),
    /// Richardson's model: time until every vertex is infected.
    Cover(Common),
    /// Branching translation process: snapshot at --t, or --first-hit.
    Btp(Common),
    /// Both sides of the forward/backward duality identity.
    Duality(Common),
    /// Layer comparison of T(y,0) against T(y,1).
    Conjecture(Common),
    /// Exact overlap counts f(n,k) and tails F(n,k).
    Count(Common),
    /// Closed-form quantities (--what extinction|constants|erlang|R|ofpp-bound|btp-moments).
    Analytic(Common),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct Common {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Deficit for the {T <= 1 - eps} frequency (ofpp, default 0.2).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    oriented: bool,
    /// Population cap for btp (default 1000000).
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    first_hit: bool,
    /// Algorithm for count: dp or brute.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    what: Option<String>,
    /// Extra analytic arguments as k=v,k=v.
    #[arg(long)]
    params: Option<String>,
    /// JSON destination; '-' or omitted for standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Raw samples as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "CUBEPERC_JOBS", default_value_t = 0)]
    jobs: usize,
}

impl Command {
    fn into_parts(self) -> (Kind, Common) {
        match self {
            Command::Percolate(a) => (Kind::Percolate, a),
            Command::Ofpp(a) => (Kind::Ofpp, a),
            Command::Richardson(a) => (Kind::Richardson, a),
            Command::Cover(a) => (Kind::Cover, a),
            Command::Btp(a) => (Kind::Btp, a),
            Command::Duality(a) => (Kind::Duality, a),
            Command::Conjecture(a) => (Kind::Conjecture, a),
            Command::Count(a) => (Kind::Count, a),
            Command::Analytic(a) => (Kind::Analytic, a),
        }
    }
}

fn build_spec(kind: Kind, a: Common) -> Result<ExperimentSpec, HarnessError> {
    let extra = match &a.params {
        Some(text) => Params::parse_extra(text)?,
        None => Default::default(),
    };
    let params = Params {
        n: a.n,
        c: a.c,
        p: a.p,
        t: a.t,
        s: a.s,
        eps: a.eps,
        cap: a.cap,
        oriented: a.oriented,
        first_hit: a.first_hit,
        method: a.method,
        what: a.what,
        extra,
    };
    Ok(ExperimentSpec { kind, params, reps: a.reps, seed: a.seed, jobs: a.jobs, out: a.out, csv: a.csv })
}

fn execute(kind: Kind, args: Common) -> Result<(), HarnessError> {
    let spec = build_spec(kind, args)?;
    let result = run(&spec)?;
    if let Some(path) = &spec.csv {
        write_csv(&result, path)?;
    }
    write_json(&result, spec.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (kind, args) = cli.command.into_parts();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cubeperc {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
