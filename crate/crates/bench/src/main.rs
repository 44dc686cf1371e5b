use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spf_bench::demo::lift_demo;
use spf_bench::harness::{measure, noise_sweep, phase_transition};
use spf_bench::io::{format_matrix, format_vector, read_matrix, read_vector};
use spf_bench::json::to_json_string;
use spf_bench::spec::{Algorithm, ExperimentSpec, NoiseSweepSpec};
use spf_core::theory::{
    dof_bound, frobenius_noise_constant, measurement_lower_bound, noise_amp_constant, omega_bounds,
};
use spf_core::{
    bp_solve, gaussian_operator, htp_constants, init_optimal, init_pf_proxy, init_rowsparse,
    init_thresholding, random_sparse_rank_one, spf_run, AdmmConfig, BpProblem, BpVariant,
    BpWeights, CMat, CVec, GaussianSpec, Operator, RowNorm, SpfConfig,
    DEFAULT_COMBINATORIAL_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "spf",
    version,
    about = "Sparse power factorization experiments"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a sparse rank-one matrix from measurements.
    Recover(RecoverArgs),
    /// Success rates over a grid; writes CSV.
    PhaseTransition {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median SNR and noise amplification over (nu, m); writes CSV.
    NoiseSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Theoretical constants and bounds as JSON.
    Theory(TheoryArgs),
    /// Blind deconvolution round trip through the lifted operator.
    LiftDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s1: usize,
        #[arg(long)]
        s2: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a random instance and write its measurements and truth.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Optimal,
    Thresh,
    RowsparseF,
    RowsparseS,
    Proxy,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Spf,
    Pf,
    BpLr,
    BpRs,
    BpRslr,
    BpDs,
    BpDslr,
}

#[derive(clap::Args)]
struct RecoverArgs {
    /// Operator file or `gaussian:m,n1,n2,seed`.
    #[arg(long)]
    operator: String,
    /// Measurements, one `re,im` pair per line.
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    s1: usize,
    #[arg(long)]
    s2: usize,
    #[arg(long, value_enum, default_value = "thresh")]
    init: InitArg,
    #[arg(long, value_enum, default_value = "spf")]
    algo: AlgoArg,
    /// Writes the estimate as a matrix file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Signal used to normalize the convex objectives (unit weights otherwise).
    #[arg(long)]
    weights_from: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = DEFAULT_COMBINATORIAL_BUDGET as u64)]
    budget: u64,
}

#[derive(clap::Args)]
struct TheoryArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    s1: Option<usize>,
    #[arg(long)]
    s2: Option<usize>,
    /// Target mean-square distortion.
    #[arg(long = "D", alias = "d")]
    d: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    s1: usize,
    #[arg(long)]
    s2: usize,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for `b.csv`, `truth.csv` and `operator.bin`.
    #[arg(long)]
    dir: PathBuf,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Recover(args) => recover(args),
        Command::PhaseTransition { config, out } => {
            let spec: ExperimentSpec = read_json(&config)?;
            emit(out.as_deref(), &phase_transition(&spec)?.to_csv())
        }
        Command::NoiseSweep { config, out } => {
            let spec: NoiseSweepSpec = read_json(&config)?;
            emit(out.as_deref(), &noise_sweep(&spec)?.to_csv())
        }
        Command::Theory(args) => emit(None, &to_json_string(&theory(&args)?)?),
        Command::LiftDemo { n, s1, s2, m, seed } => {
            emit(None, &to_json_string(&lift_demo(n, s1, s2, m, seed)?)?)
        }
        Command::Simulate(args) => simulate(args),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn load_operator(arg: &str) -> anyhow::Result<Operator> {
    if let Some(rest) = arg.strip_prefix("gaussian:") {
        let parts = rest
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad operator spec {arg:?}"))?;
        let [m, n1, n2, seed] = parts[..] else {
            bail!("expected gaussian:m,n1,n2,seed, got {arg:?}");
        };
        return Ok(gaussian_operator(&GaussianSpec::new(
            m as usize,
            n1 as usize,
            n2 as usize,
            seed,
        ))?);
    }
    let file = File::open(arg).with_context(|| format!("opening {arg}"))?;
    Operator::read_from(BufReader::new(file)).with_context(|| format!("reading operator {arg}"))
}

#[derive(Serialize)]
struct RecoverReport {
    algorithm: &'static str,
    init: Option<&'static str>,
    m: usize,
    n1: usize,
    n2: usize,
    s1: usize,
    s2: usize,
    outer_iterations: usize,
    stop_reason: String,
    relative_residual: f64,
    nnz_rows: usize,
    nnz_cols: usize,
    frobenius_norm: f64,
}

fn recover(args: RecoverArgs) -> anyhow::Result<()> {
    let op = load_operator(&args.operator)?;
    let b = read_vector(&args.b)?;
    let (m, n1, n2) = op.dims();
    if b.len() != m {
        bail!("operator has {m} measurements but b has {}", b.len());
    }
    let algorithm = match args.algo {
        AlgoArg::Spf => Algorithm::Spf,
        AlgoArg::Pf => Algorithm::Pf,
        AlgoArg::BpLr => Algorithm::BpLr,
        AlgoArg::BpRs => Algorithm::BpRs,
        AlgoArg::BpRslr => Algorithm::BpRslr,
        AlgoArg::BpDs => Algorithm::BpDs,
        AlgoArg::BpDslr => Algorithm::BpDslr,
    };
    let (x_hat, init_name, iterations, stop_reason): (CMat, _, _, String) = match algorithm {
        Algorithm::Spf | Algorithm::Pf => {
            let (s1, s2) = if algorithm == Algorithm::Pf {
                (n1, n2)
            } else {
                (args.s1, args.s2)
            };
            let budget = args.budget as u128;
            let init = match args.init {
                InitArg::Optimal => init_optimal(&op, &b, s1, s2, budget)?,
                InitArg::Thresh => init_thresholding(&op, &b, s1, s2)?,
                InitArg::RowsparseF => init_rowsparse(&op, &b, s1, RowNorm::Frobenius, budget)?,
                InitArg::RowsparseS => init_rowsparse(&op, &b, s1, RowNorm::Spectral, budget)?,
                InitArg::Proxy => init_pf_proxy(&op, &b)?,
            };
            let mut cfg = SpfConfig::new(s1, s2);
            cfg.max_outer = args.max_outer;
            let out = spf_run(&op, &b, &cfg, &init.v0)?;
            if let Some(path) = &args.trace {
                std::fs::write(path, out.trace.to_csv())?;
            }
            let reason = out
                .trace
                .stop_reason
                .map(|r| r.as_str())
                .unwrap_or("")
                .to_string();
            (
                out.x_hat,
                Some(init.method.as_str()),
                out.trace.len(),
                reason,
            )
        }
        _ => {
            let variant = match algorithm {
                Algorithm::BpLr => BpVariant::LR,
                Algorithm::BpRs => BpVariant::RS,
                Algorithm::BpRslr => BpVariant::RSLR,
                Algorithm::BpDs => BpVariant::DS,
                _ => BpVariant::DSLR,
            };
            let weights = match &args.weights_from {
                Some(path) => BpWeights::from_signal(&read_matrix(path)?),
                None => BpWeights {
                    row_l12: Some(1.0),
                    col_l12: Some(1.0),
                    nuclear: Some(1.0),
                },
            };
            let problem = BpProblem {
                op: &op,
                b: b.clone(),
                weights,
            };
            let out = bp_solve(&problem, variant, &AdmmConfig::default())?;
            let reason = if out.converged {
                "converged"
            } else {
                "max_iters"
            };
            (out.z, None, out.iterations, reason.to_string())
        }
    };
    let residual = (&b - op.apply(&x_hat)?).norm() / b.norm();
    let nonzero = |it: &mut dyn Iterator<Item = f64>| it.filter(|&n| n > 0.0).count();
    let report = RecoverReport {
        algorithm: algorithm.as_str(),
        init: init_name,
        m,
        n1,
        n2,
        s1: args.s1,
        s2: args.s2,
        outer_iterations: iterations,
        stop_reason,
        relative_residual: residual,
        nnz_rows: nonzero(&mut x_hat.row_iter().map(|r| r.norm())),
        nnz_cols: nonzero(&mut x_hat.column_iter().map(|c| c.norm())),
        frobenius_norm: x_hat.norm(),
    };
    if let Some(path) = &args.out {
        std::fs::write(path, format_matrix(&x_hat))?;
    }
    emit(None, &to_json_string(&report)?)
}

#[derive(Serialize)]
struct TheoryReport {
    delta: f64,
    nu: f64,
    l: u64,
    k: f64,
    c_htp: f64,
    rho: f64,
    tau: f64,
    omega_feasible: bool,
    sin_omega_inf: f64,
    sin_omega_sup: f64,
    noise_amp_constant: Option<f64>,
    frobenius_noise_constant: Option<f64>,
    dof_bound: Option<i64>,
    measurement_lower_bound: Option<f64>,
}

fn theory(args: &TheoryArgs) -> anyhow::Result<TheoryReport> {
    let c = htp_constants(args.delta)?;
    let w = omega_bounds(args.delta, args.nu)?;
    let (amp, frob) = if w.feasible {
        (
            noise_amp_constant(args.delta, args.nu).ok(),
            frobenius_noise_constant(args.delta, args.nu).ok(),
        )
    } else {
        (None, None)
    };
    let dof = match (args.s1, args.s2) {
        (Some(s1), Some(s2)) => Some((s1, s2)),
        (None, None) => None,
        _ => bail!("--s1 and --s2 go together"),
    };
    let lower = match (dof, args.d, args.sigma2) {
        (Some((s1, s2)), Some(d), Some(sigma2)) => {
            Some(measurement_lower_bound(s1, s2, d, sigma2)?)
        }
        (_, None, None) => None,
        _ => bail!("the measurement lower bound needs --s1, --s2, --D and --sigma2"),
    };
    Ok(TheoryReport {
        delta: args.delta,
        nu: args.nu,
        l: c.l,
        k: c.k,
        c_htp: c.c_htp,
        rho: c.rho,
        tau: c.tau,
        omega_feasible: w.feasible,
        sin_omega_inf: w.sin_inf(),
        sin_omega_sup: w.sin_sup(),
        noise_amp_constant: amp,
        frobenius_noise_constant: frob,
        dof_bound: dof.map(|(s1, s2)| dof_bound(s1, s2)),
        measurement_lower_bound: lower,
    })
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let op: Operator = gaussian_operator(&GaussianSpec::new(args.m, args.n1, args.n2, args.seed))?;
    let truth = random_sparse_rank_one::<f64>(
        args.n1,
        args.n2,
        args.s1,
        args.s2,
        args.seed.wrapping_add(1),
    )?;
    let x = truth.matrix();
    let b: CVec = measure(&op, &x, args.nu, args.seed.wrapping_add(2))?;
    std::fs::create_dir_all(&args.dir)?;
    let mut w = BufWriter::new(File::create(args.dir.join("operator.bin"))?);
    op.write_to(&mut w)?;
    w.flush()?;
    std::fs::write(args.dir.join("b.csv"), format_vector(&b))?;
    std::fs::write(args.dir.join("truth.csv"), format_matrix(&x))?;
    Ok(())
}
