use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use hybridbf::ici::{IciMode, IciProfile};
use hybridbf::objectives::NoiseModel;
use hybridbf_sim::experiment::{design, first_channel, realization_stream};
use hybridbf_sim::presets::{preset, preset_names, STUDIES};
use hybridbf_sim::{run_experiment, ExperimentConfig, MethodName, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Conventional,
    Reduced,
    NoIci,
    NoIciIdeal,
    /// conventional, reduced and no-ici
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IciArg {
    Cfo,
    Scalar,
    None,
}

/// Monte Carlo spectral-efficiency experiments for ICI-aware hybrid
/// beamforming.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    config: Option<PathBuf>,
    /// Built-in experiment, see --list-presets.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    list_presets: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Result CSV; defaults to the config's `output` or results.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Replace the ICI mode; the value of the configured mode is kept when
    /// the mode matches, otherwise S = 0.3 or epsilon = 0.1.
    #[arg(long, value_enum)]
    ici_mode: Option<IciArg>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write one optimizer trace CSV per run into `<out stem>_traces/`.
    #[arg(long)]
    trace: bool,
    /// Fill the time_ms_mean column (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Write the configured ICI profile as CSV and continue.
    #[arg(long)]
    dump_ici: Option<PathBuf>,
    /// Write realization 0 of the unswept configuration (CSV, or JSON
    /// when the path ends in .json).
    #[arg(long)]
    dump_channel: Option<PathBuf>,
    /// Write the precoder of realization 0, first SNR, first method.
    #[arg(long)]
    dump_precoder: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name).with_context(|| format!("unknown preset {name:?}; try --list-presets"))?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.realizations {
        cfg.realizations = n;
    }
    if let Some(m) = cli.method {
        cfg.methods = match m {
            MethodArg::Conventional => vec![MethodName::Conventional],
            MethodArg::Reduced => vec![MethodName::Reduced],
            MethodArg::NoIci => vec![MethodName::NoIci],
            MethodArg::NoIciIdeal => vec![MethodName::NoIciIdeal],
            MethodArg::All => vec![MethodName::Conventional, MethodName::Reduced, MethodName::NoIci],
        };
    }
    if let Some(mode) = cli.ici_mode {
        cfg.ici = match (mode, cfg.ici) {
            (IciArg::None, _) => IciMode::None,
            (IciArg::Scalar, IciMode::Scalar { s }) => IciMode::Scalar { s },
            (IciArg::Scalar, _) => IciMode::Scalar { s: 0.3 },
            (IciArg::Cfo, IciMode::Cfo { epsilon }) => IciMode::Cfo { epsilon },
            (IciArg::Cfo, _) => IciMode::Cfo { epsilon: 0.1 },
        };
    }
    cfg.timing |= cli.timing;
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

fn dumps(cli: &Cli, cfg: &ExperimentConfig) -> Result<()> {
    if let Some(path) = &cli.dump_ici {
        let profile = IciProfile::<f64>::from_mode(cfg.channel.num_subcarriers, cfg.ici)?;
        profile.write_csv(create(path)?)?;
    }
    if cli.dump_channel.is_none() && cli.dump_precoder.is_none() {
        return Ok(());
    }
    let h = first_channel(cfg)?;
    if let Some(path) = &cli.dump_channel {
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_writer_pretty(create(path)?, &h.to_dump())?;
        } else {
            h.write_csv(create(path)?)?;
        }
    }
    if let Some(path) = &cli.dump_precoder {
        let point = cfg.base_point();
        let ici = IciProfile::from_mode(cfg.channel.num_subcarriers, cfg.ici)?;
        let snr = cfg.snr_db.first().copied().unwrap_or(10.0);
        let psi = NoiseModel::<f64>::from_snr_db(snr)?.psi();
        let (p, _, _) = design(cfg.methods[0], &h, &ici, psi, &point, &realization_stream(cfg.seed, 0, 0))?;
        p.write_csv(create(path)?)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_presets {
        for (study, about) in STUDIES {
            println!("{study:<16} {about}");
        }
        println!("\nappend -desk or -full, e.g. {}", preset_names()[0]);
        return Ok(());
    }
    let cfg = resolve(&cli)?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    dumps(&cli, &cfg)?;

    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
    let trace_dir = cli.trace.then(|| {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
        out.with_file_name(format!("{stem}_traces"))
    });
    let table = run_experiment(&cfg, &RunOptions { threads: cli.threads, trace_dir })?;
    table.write_csv(&out)?;
    log::info!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(())
}
