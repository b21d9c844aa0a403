//! Command-line benchmark front end.
//!
//! Thin wrapper over the library: every subcommand parses inputs, calls one
//! library pipeline, writes artifacts, and prints a short summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hogmt::bench::{
    self, parse_config, run_ber_sweep, run_characterization, run_spatial_demo,
    write_characterization_outputs, write_sweep_outputs, ExperimentConfig,
};
use hogmt::channel::{impulse_to_kernel, synth_channel};
use hogmt::decompose::{hogmt_decompose, select_eigen_with_mode, verify_duality, ThresholdMode};
use hogmt::ensemble::{deterministic_eigensystem, ensemble_klt, ChannelEnsemble};
use hogmt::error::Error;
use hogmt::grid::FlatteningMap;
use hogmt::io;
use hogmt::modem::{modulate, random_bits, Constellation, Scheme};
use hogmt::precode::{precode, residual_interference};

const CONFIG_SCHEMA: &str = "\
CONFIG SCHEMA (flat key = value, '#' comments):
  schema_version = 1                     required, must be 1
  channel.num_users = <int >= 1>         users U
  channel.num_time = <int >= 1>          time instances T
  channel.tap_count_min = <int >= 1>     minimum delay taps per (u,u',t)
  channel.tap_count_max = <int >= min>   maximum delay taps (<= T)
  channel.gain_mean_profile = <profile>  per-t tap gain mean
  channel.gain_std_profile = <profile>   per-t tap gain std (>= 0)
  channel.cross_user_coupling = <0..1>   relative power of u != u' paths
  modulations = bpsk,qpsk,qam16,qam64    any non-empty subset
  epsilons = <floats in (0,1)>           eigen-selection thresholds
  epsilon_mode = relative|absolute       sigma_n > eps*sigma_1 or sigma_n > eps
  snr_db_grid = <floats>                 Es/N0 points in dB
  trials = <int >= 1>                    Monte-Carlo trials per point
  arms = hogmt,zf,thp_zf,ideal           any non-empty subset
  master_seed = <u64>                    root of all derived seeds
  output_dir = <path>                    artifact directory
  power_mode = unnormalized|genie_normalized
  warmup_skip = auto|<int>               leading instants excluded from BER
                                         counting (auto = tap_count_max when
                                         T allows, else 0)

  <profile> is one of:
    const:v                              constant value
    sin:base,amp,cycles[,phase]          base + amp*sin(2*pi*cycles*t/T + phase)
    step:v1,v2                           v1 on the first half, v2 on the second
    list:v0,v1,...                       exactly T comma-separated values
";

#[derive(Parser)]
#[command(
    name = "hogmt",
    version,
    about = "Non-stationary channel synthesis, eigenfunction precoding, and BER benchmarks",
    after_long_help = CONFIG_SCHEMA
)]
struct Cli {
    /// Experiment config file (see --help for the schema).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Summary format printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one channel realization and write its kernel container.
    Synth {
        /// Also write the lossy CSV dump of the kernel.
        #[arg(long)]
        csv: bool,
    },
    /// Decompose a kernel file into an eigensystem file; prints the sigma
    /// spectrum summary (mode counts above decade thresholds).
    Decompose {
        /// Input kernel container (HGMT).
        #[arg(long)]
        input: PathBuf,
    },
    /// Precode a symbol grid against an eigensystem file.
    Precode {
        /// Input eigensystem container (HGES).
        #[arg(long)]
        eigen: PathBuf,
        /// Symbol grid container (HGSG); a random grid is generated when
        /// omitted.
        #[arg(long)]
        symbols: Option<PathBuf>,
        /// Modulation for the generated grid.
        #[arg(long, default_value = "qam16")]
        modulation: String,
        /// Selection threshold applied before precoding.
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Threshold semantics.
        #[arg(long, value_enum, default_value_t = EpsMode::Relative)]
        epsilon_mode: EpsMode,
        /// Kernel container for the noiseless residual report.
        #[arg(long)]
        kernel: Option<PathBuf>,
    },
    /// Ensemble statistics: either generate realizations from --config or
    /// read kernel containers from a directory.
    Characterize {
        /// Directory of HGMT kernel files to analyze instead of generating.
        #[arg(long = "in")]
        input_dir: Option<PathBuf>,
    },
    /// Full BER sweep over arms, thresholds, modulations, and SNR.
    BerSweep {
        /// Use the built-in 10-user spatio-temporal preset instead of a
        /// config file.
        #[arg(long)]
        preset: bool,
    },
    /// 30-user purely spatial precoding comparison.
    SpatialDemo {
        /// Use the built-in spatial preset instead of a config file.
        #[arg(long)]
        preset: bool,
    },
    /// Decompose (or load) and report worst-case duality residuals.
    DualityReport {
        /// Input kernel container (HGMT).
        #[arg(long)]
        kernel: PathBuf,
        /// Optional precomputed eigensystem (HGES); decomposed on the fly
        /// when omitted.
        #[arg(long)]
        eigen: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EpsMode {
    Relative,
    Absolute,
}

impl From<EpsMode> for ThresholdMode {
    fn from(m: EpsMode) -> Self {
        match m {
            EpsMode::Relative => ThresholdMode::Relative,
            EpsMode::Absolute => ThresholdMode::Absolute,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::InvalidConfig("this subcommand needs --config <path> (see --help)".into())
    })?;
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn print_aggregates(sweep: &bench::SweepResult, format: Format) {
    match format {
        Format::Csv => {
            println!("method,modulation,epsilon,snr_db,trials,bits,errors,ber,ci_lo,ci_hi");
            for a in &sweep.aggregates {
                let (lo, hi) = a.wilson_ci(1.96);
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    a.method,
                    a.modulation.name(),
                    a.epsilon.map(|e| e.to_string()).unwrap_or_default(),
                    a.snr_db,
                    a.trials,
                    a.bits_total,
                    a.bits_error,
                    a.ber(),
                    lo,
                    hi
                );
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = sweep
                .aggregates
                .iter()
                .map(|a| {
                    let (lo, hi) = a.wilson_ci(1.96);
                    serde_json::json!({
                        "method": a.method,
                        "modulation": a.modulation.name(),
                        "epsilon": a.epsilon,
                        "snr_db": a.snr_db,
                        "trials": a.trials,
                        "bits": a.bits_total,
                        "errors": a.bits_error,
                        "ber": a.ber(),
                        "ci_lo": lo,
                        "ci_hi": hi,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Synth { csv } => {
            let cfg = load_config(cli)?;
            let dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
            std::fs::create_dir_all(&dir)?;
            let mut ch = cfg.channel.clone();
            ch.seed = cli.seed.unwrap_or(cfg.master_seed);
            let h = synth_channel(&ch)?;
            let k = impulse_to_kernel(&h);
            let kernel_path = dir.join("kernel.hgmt");
            io::write_kernel(&kernel_path, &k)?;
            if *csv {
                io::export_kernel_csv(&dir.join("kernel.csv"), &k)?;
            }
            println!(
                "wrote {} ({} users, {} instants, |k|_F = {})",
                kernel_path.display(),
                k.num_users,
                k.num_time,
                k.frobenius_norm()
            );
            Ok(0)
        }
        Command::Decompose { input } => {
            let k = io::read_kernel(input)?;
            let map = FlatteningMap::user_major(k.num_users, k.num_time);
            let es = hogmt_decompose(&k, &map)?;
            let dir = out_dir(cli);
            std::fs::create_dir_all(&dir)?;
            let eigen_path = dir.join("eigensystem.hges");
            io::write_eigensystem(&eigen_path, &es)?;
            let sigma_1 = es.triples.first().map(|t| t.sigma).unwrap_or(0.0);
            println!("threshold,count");
            for d in 0..=12 {
                let cut = sigma_1 * 10f64.powi(-d);
                let count = es.triples.iter().filter(|t| t.sigma > cut).count();
                println!("1e-{d},{count}");
            }
            eprintln!("wrote {}", eigen_path.display());
            Ok(0)
        }
        Command::Precode {
            eigen,
            symbols,
            modulation,
            epsilon,
            epsilon_mode,
            kernel,
        } => {
            let es = io::read_eigensystem(eigen)?;
            let scheme = Scheme::parse(modulation)?;
            let c = Constellation::new(scheme);
            let s = match symbols {
                Some(path) => io::read_symbol_grid(path)?,
                None => {
                    let bits = random_bits(
                        es.num_users * es.num_time * c.bits_per_symbol,
                        cli.seed.unwrap_or(0),
                    );
                    modulate(&bits, &c, es.num_users, es.num_time)?
                }
            };
            let selected = select_eigen_with_mode(&es, *epsilon, (*epsilon_mode).into())?;
            let (x, report) = precode(&selected, &s)?;
            let dir = out_dir(cli);
            std::fs::create_dir_all(&dir)?;
            let x_path = dir.join("precoded.hgsg");
            io::write_symbol_grid(&x_path, &x)?;
            let residual = match kernel {
                Some(kp) => {
                    let k = io::read_kernel(kp)?;
                    let (_, rel) = residual_interference(&k, &x, &s)?;
                    rel.sqrt().to_string()
                }
                None => String::new(),
            };
            println!("kept_n,residual,tx_power");
            println!("{},{},{}", report.kept_n, residual, report.tx_power);
            eprintln!("wrote {}", x_path.display());
            Ok(0)
        }
        Command::Characterize { input_dir } => match input_dir {
            Some(dir_in) => {
                let mut paths: Vec<PathBuf> = std::fs::read_dir(dir_in)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().map(|x| x == "hgmt").unwrap_or(false))
                    .collect();
                paths.sort();
                if paths.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "no .hgmt files under {}",
                        dir_in.display()
                    )));
                }
                let kernels: Vec<_> = paths
                    .iter()
                    .map(|p| io::read_kernel(p))
                    .collect::<Result<_, _>>()?;
                let map = FlatteningMap::user_major(kernels[0].num_users, kernels[0].num_time);
                let klt = if kernels.len() == 1 {
                    let m = hogmt::decompose::kernel_as_matrix(&kernels[0], &map);
                    deterministic_eigensystem(
                        &m,
                        (map.num_users, map.num_time),
                        (map.num_users, map.num_time),
                    )?
                } else {
                    ensemble_klt(&ChannelEnsemble::from_kernels(&kernels, &map)?)?
                };
                let lambdas = klt.lambdas();
                let summary = serde_json::json!({
                    "realizations": kernels.len(),
                    "total_gain": klt.total_power(),
                    "mode_count": klt.modes.len(),
                    "top_lambdas": lambdas.iter().take(10).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&summary)?);
                Ok(0)
            }
            None => {
                let cfg = load_config(cli)?;
                let ch = run_characterization(&cfg)?;
                let manifest = write_characterization_outputs(&cfg, &ch)?;
                println!(
                    "total_gain_eigen = {}, total_gain_direct = {}, modes = {}",
                    ch.total_gain_eigen,
                    ch.total_gain_direct,
                    ch.klt.modes.len()
                );
                println!("manifest: {}", manifest.display());
                Ok(0)
            }
        },
        Command::BerSweep { preset } => {
            let cfg = if *preset {
                ExperimentConfig::paper_spatiotemporal(cli.seed.unwrap_or(1), out_dir(cli))
            } else {
                load_config(cli)?
            };
            let sweep = run_ber_sweep(&cfg)?;
            let manifest = write_sweep_outputs(&cfg, &sweep)?;
            print_aggregates(&sweep, cli.format);
            eprintln!("manifest: {}", manifest.display());
            if sweep.failure_fraction() > 0.01 {
                eprintln!("{} of {} trials failed", sweep.failures.len(), sweep.trials);
                return Ok(3);
            }
            Ok(0)
        }
        Command::SpatialDemo { preset } => {
            let cfg = if *preset {
                ExperimentConfig::paper_spatial(cli.seed.unwrap_or(1), out_dir(cli))
            } else {
                load_config(cli)?
            };
            let sweep = run_spatial_demo(&cfg)?;
            let manifest = write_sweep_outputs(&cfg, &sweep)?;
            print_aggregates(&sweep, cli.format);
            eprintln!("manifest: {}", manifest.display());
            if sweep.failure_fraction() > 0.01 {
                return Ok(3);
            }
            Ok(0)
        }
        Command::DualityReport { kernel, eigen } => {
            let k = io::read_kernel(kernel)?;
            let es = match eigen {
                Some(path) => io::read_eigensystem(path)?,
                None => {
                    let map = FlatteningMap::user_major(k.num_users, k.num_time);
                    hogmt_decompose(&k, &map)?
                }
            };
            let residuals = verify_duality(&k, &es)?;
            let sigma_1 = es.triples.first().map(|t| t.sigma).unwrap_or(0.0);
            let mut max_all = 0.0f64;
            let mut max_significant = 0.0f64;
            for (t, r) in es.triples.iter().zip(&residuals) {
                max_all = max_all.max(*r);
                if t.sigma > 1e-8 * sigma_1 {
                    max_significant = max_significant.max(*r);
                }
            }
            println!("modes,max_residual_significant,max_residual_all");
            println!("{},{},{}", es.triples.len(), max_significant, max_all);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidConfig(_) | Error::BadContainer(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
