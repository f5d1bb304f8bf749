//! `grasspc`: runs the experiments of the core crate and writes CSV tables.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grasspc_core::experiments::{
    self, trial_traces, DistortionConfig, ExperimentError, GainsConfig, MseConfig, SumRateExperiment, TraceModel,
};
use grasspc_core::mumimo::Scheme;
use grasspc_core::rng::{purpose, substream};
use grasspc_core::InitMode;

use config::{
    ConfigError, DistortionFile, GainsFile, GenTraceFile, MseFile, Source, SumRateFile, TrainConfig,
};

#[derive(Debug, Parser)]
#[command(name = "grasspc", version, about = "Grassmannian predictive coding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Experiment configuration (see docs/config.md).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Worker threads for trial-level parallelism.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    /// Output file (CSV, or a codebook file for `train`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Train a shape-gain codebook (open loop, then closed loop).
    Train(Common),
    /// Operational distortion against its bounds over a magnitude-size grid.
    Distortion(Common),
    /// Closed-loop prediction gains over a β grid.
    Gains(Common),
    /// GPC and memoryless MSE over a β grid.
    Mse(Common),
    /// Multiuser zero-forcing sum rate.
    Sumrate(Common),
    /// Synthetic channel traces.
    GenTrace(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Distortion(_) => "distortion",
            Command::Gains(_) => "gains",
            Command::Mse(_) => "mse",
            Command::Sumrate(_) => "sumrate",
            Command::GenTrace(_) => "gen-trace",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Train(c) | Command::Distortion(c) | Command::Gains(c) | Command::Mse(c) | Command::Sumrate(c) | Command::GenTrace(c) => c,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Run {
    command: &'static str,
    source: Source,
    seed: u64,
    out: PathBuf,
}

impl Run {
    fn provenance(&self) -> String {
        format!(
            "# grasspc {} config_sha256={} seed={} version={}\n",
            self.command,
            self.source.hash,
            self.seed,
            env!("CARGO_PKG_VERSION")
        )
    }

    fn write_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut buf = self.provenance().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| CliError::Config(e.to_string());
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.write_record(r).map_err(io)?;
            }
            w.flush().map_err(|e| CliError::Config(e.to_string()))?;
        }
        write_file(&self.out, &buf)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("grasspc: configuration error: {m}"),
                CliError::Numerical(m) => eprintln!("grasspc: numerical failure: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let c = cli.command.common();
    let run = Run { command: cli.command.name(), source: Source::read(&c.config)?, seed: c.seed, out: c.out.clone() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads.into())
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", c.threads)))?;
    pool.install(|| match cli.command {
        Command::Train(_) => train(&run),
        Command::Distortion(_) => distortion(&run),
        Command::Gains(_) => gains(&run),
        Command::Mse(_) => mse(&run),
        Command::Sumrate(_) => sumrate(&run),
        Command::GenTrace(_) => gen_trace(&run),
    })
}

fn train(run: &Run) -> Result<()> {
    let cfg: TrainConfig = run.source.parse()?;
    let model = cfg.model.model()?;
    let spec = cfg.codebook.spec(&run.source.dir)?;
    let traces = trial_traces(&model, spec.train_steps, spec.train_traces, run.seed, purpose::TRAINING_TRACE)?;
    let report = experiments::train_codebook(&traces, &spec, run.seed)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for (name, s) in [("open-loop", &report.open_loop), ("closed-loop", &report.closed_loop)] {
        let last = |h: &[f64]| h.last().map_or("fixed".to_string(), |d| format!("{d:.6e} after {} iterations", h.len()));
        println!(
            "{name}: {} samples ({} skipped), direction distortion {}, magnitude distortion {}, training MSE {:.6e} ({:.2} dB)",
            s.samples,
            s.skipped,
            last(&s.direction_history),
            last(&s.magnitude_history),
            s.training_mse,
            grasspc_core::analysis::to_db(s.training_mse)
        );
    }
    let mut buf = run.provenance().into_bytes();
    report.closed_loop.codebook.write_to(&mut buf).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&run.out, &buf)
}

fn distortion(run: &Run) -> Result<()> {
    let f: DistortionFile = run.source.parse()?;
    let cfg = DistortionConfig {
        model: f.model.model()?,
        steps: f.run.steps,
        trials: f.run.trials,
        transient: f.run.transient,
        init: f.run.init_or(InitMode::Exact),
        seed: run.seed,
        directions: f.codebook.directions()?,
        magnitude_bits: f.codebook.magnitude_bits()?,
        magnitude_range: f.codebook.magnitude_range()?,
        max_iters: f.codebook.max_iters,
        train_traces: f.codebook.train_traces,
        train_steps: f.codebook.train_steps,
    };
    let rows = experiments::run_distortion(&cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_d.to_string(),
                r.n_m.to_string(),
                r.total_bits.to_string(),
                num(r.operational),
                num(r.operational_stderr),
                num(r.d_lower),
                num(r.d_upper),
                num(r.gamma_lower),
                num(r.lambda_upper),
                num(r.memoryless_bound),
            ]
        })
        .collect();
    run.write_csv(
        &["n_d", "n_m", "total_bits", "operational", "operational_stderr", "d_lower", "d_upper", "gamma_lower", "lambda_upper", "memoryless_bound"],
        &table,
    )
}

fn gains(run: &Run) -> Result<()> {
    let f: GainsFile = run.source.parse()?;
    let Some((lo, hi)) = f.codebook.magnitude_range()? else {
        return Err(CliError::Config("gains sweeps uniform magnitude codebooks; set magnitudes = \"uniform\"".into()));
    };
    let cfg = GainsConfig {
        n: f.sweep.n,
        betas: f.sweep.betas.clone(),
        steps: f.run.steps,
        trials: f.run.trials,
        transient: f.run.transient,
        init: f.run.init_or(InitMode::Exact),
        seed: run.seed,
        directions: f.codebook.directions()?,
        magnitude_bits: f.codebook.magnitude_bits()?,
        magnitude_lo: lo,
        magnitude_hi: hi,
        unquantized: f.gains.as_ref().is_none_or(|g| g.unquantized),
        max_iters: f.codebook.max_iters,
        train_traces: f.codebook.train_traces,
        train_steps: f.codebook.train_steps,
    };
    let rows = experiments::run_gains(&cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.magnitude_bits.map_or("unquantized".into(), |b| b.to_string()),
                num(r.beta),
                num(r.g_clp),
                num(r.g_clp_db),
                num(r.g_clp_db_stderr),
            ]
        })
        .collect();
    run.write_csv(&["magnitude_bits", "beta", "g_clp", "g_clp_db", "g_clp_db_stderr"], &table)
}

fn mse(run: &Run) -> Result<()> {
    let f: MseFile = run.source.parse()?;
    let cfg = MseConfig {
        n: f.sweep.n,
        betas: f.sweep.betas.clone(),
        steps: f.run.steps,
        trials: f.run.trials,
        transient: f.run.transient,
        init: f.run.init_or(InitMode::Exact),
        seed: run.seed,
        gpc: f.codebook.spec(&run.source.dir)?,
        memoryless_bits: f.memoryless.bits.clone(),
        packing_candidates: f.memoryless.candidates,
    };
    if let Some(b) = cfg.memoryless_bits.iter().find(|&&b| b > 16) {
        return Err(CliError::Config(format!("[memoryless] bits = {b} is larger than 16")));
    }
    let rows = experiments::run_mse(&cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.scheme.to_string(), r.bits.to_string(), num(r.beta), num(r.mse), num(r.mse_stderr), num(r.mse_db)])
        .collect();
    run.write_csv(&["scheme", "bits", "beta", "mse", "mse_stderr", "mse_db"], &table)
}

fn sumrate(run: &Run) -> Result<()> {
    let f: SumRateFile = run.source.parse()?;
    let schemes = f.system.schemes()?;
    let gpc = match (&f.codebook, schemes.contains(&Scheme::Gpc)) {
        (Some(c), _) => c.spec(&run.source.dir)?,
        (None, true) => return Err(CliError::Config("the gpc scheme needs a [codebook] section".into())),
        (None, false) => experiments::CodebookSpec::fixed(
            experiments::DirectionSpec::Packing { bits: 0, candidates: 1 },
            experiments::MagnitudeSpec::Uniform { bits: 0, lo: 0.0, hi: 1.0 },
        ),
    };
    let cfg = SumRateExperiment {
        schemes,
        nt: f.system.nt,
        users: f.system.users,
        snr_db: f.system.snr_db.clone(),
        fdts: f.system.fdts.clone(),
        bits: f.system.bits,
        trials: f.run.trials,
        steps: f.run.steps,
        transient: f.run.transient,
        init: f.run.init_or(InitMode::Memoryless),
        seed: run.seed,
        gpc,
    };
    let rows = experiments::run_sumrate(&cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                num(r.snr_db),
                r.fdts.map_or(String::new(), num),
                r.bits.to_string(),
                r.trial_count.to_string(),
                num(r.sum_rate_mean),
                num(r.sum_rate_stderr),
            ]
        })
        .collect();
    run.write_csv(&["scheme", "snr_db", "fdts", "bits", "trials", "sum_rate_mean", "sum_rate_stderr"], &table)
}

fn gen_trace(run: &Run) -> Result<()> {
    let f: GenTraceFile = run.source.parse()?;
    let model: TraceModel = f.model.model()?;
    if f.trace.count == 0 {
        return Err(CliError::Config("[trace] count must be positive".into()));
    }
    let n = model.dim();
    let mut header = vec!["trace".to_string(), "step".to_string()];
    for i in 0..n {
        header.push(format!("h{i}_re"));
        header.push(format!("h{i}_im"));
    }
    let mut table = Vec::new();
    for t in 0..f.trace.count {
        let trace = model.generate(f.trace.steps, run.seed, substream(purpose::CHANNEL, t as u64, 0))?;
        for k in 0..trace.len() {
            let coords = if f.trace.normalized { trace.normalized[k].coords() } else { &trace.raw[k][..] };
            let mut row = vec![t.to_string(), k.to_string()];
            for z in coords {
                row.push(num(z.re));
                row.push(num(z.im));
            }
            table.push(row);
        }
        if trace.rescales > 0 {
            eprintln!("warning: trace {t} was rescaled {} times to stay in floating-point range", trace.rescales);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    run.write_csv(&header, &table)
}
