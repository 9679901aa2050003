//! Monte Carlo execution of an [`ExperimentConfig`].

use std::path::{Path, PathBuf};
use std::time::Instant;

use hybridbf::channel::generate_channel;
use hybridbf::ici::{none_profile, IciProfile};
use hybridbf::manifold::OptTrace;
use hybridbf::objectives::{sum_rate, NoiseModel};
use hybridbf::precoding::{run_conventional, run_no_ici_baseline, run_reduced, HybridPrecoder};
use hybridbf::{derive_stream, ChannelRealization64, RngStream};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MethodName, SweepPoint};
use crate::table::{ResultRow, ResultTable};
use crate::HarnessError;

/// Degenerate draws are replaced at most this many times per realization.
pub const MAX_REDRAWS: u32 = 10;

/// Fork label of the analog-initialization stream.
const INIT_FORK: u64 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Directory receiving one optimizer trace CSV per run.
    pub trace_dir: Option<PathBuf>,
}

/// Channel stream of realization `r`, redraw `attempt`.
pub fn realization_stream(seed: u64, r: usize, attempt: u32) -> RngStream {
    derive_stream(seed, r as u64 | ((attempt as u64) << 40))
}

/// Precoder of `method` for one channel, plus its design time in ms.
pub fn design(
    method: MethodName,
    h: &ChannelRealization64,
    ici: &IciProfile<f64>,
    psi: f64,
    point: &SweepPoint,
    stream: &RngStream,
) -> hybridbf::Result<(HybridPrecoder<f64>, OptTrace, f64)> {
    let init = stream.fork(INIT_FORK);
    let start = Instant::now();
    let (p, trace) = match method {
        MethodName::Conventional => run_conventional(h, ici, psi, &point.pipeline, &init)?,
        MethodName::Reduced => run_reduced(h, ici, psi, &point.pipeline, &init)?,
        MethodName::NoIci | MethodName::NoIciIdeal => run_no_ici_baseline(h, psi, &point.pipeline, &init)?,
    };
    Ok((p, trace, start.elapsed().as_secs_f64() * 1e3))
}

/// Profile a method's result is scored against.
pub fn evaluation_profile(method: MethodName, configured: &IciProfile<f64>) -> hybridbf::Result<IciProfile<f64>> {
    match method {
        MethodName::NoIciIdeal => none_profile(configured.num_subcarriers()),
        _ => Ok(configured.clone()),
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    se: f64,
    millis: f64,
}

struct Job<'a> {
    /// `(index, point)` pairs sharing this realization's channel stream.
    points: Vec<(usize, &'a SweepPoint)>,
    realization: usize,
}

fn write_trace(dir: &Path, name: String, trace: &OptTrace) -> Result<(), HarnessError> {
    let path = dir.join(name);
    let file = std::fs::File::create(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    trace.write_csv(std::io::BufWriter::new(file)).map_err(|source| HarnessError::Io { path, source })
}

/// Samples of one realization, per point, ordered by SNR then method.
fn run_realization(
    cfg: &ExperimentConfig,
    design_point: Option<&SweepPoint>,
    job: &Job<'_>,
    stream: &RngStream,
    opts: &RunOptions,
) -> Result<Vec<Vec<Sample>>, HarnessError> {
    // fixed designs: (snr, method) -> precoder, computed once
    let mut fixed = Vec::new();
    if let Some(d) = design_point {
        let h = generate_channel::<f64>(&d.channel, stream)?;
        let ici = IciProfile::from_mode(d.channel.num_subcarriers, d.ici)?;
        for &snr in &d.snr_db {
            let psi = NoiseModel::<f64>::from_snr_db(snr)?.psi();
            for &method in &cfg.methods {
                let (p, trace, millis) = design(method, &h, &ici, psi, d, stream)?;
                if let Some(dir) = &opts.trace_dir {
                    write_trace(dir, format!("fixed_r{}_snr{}_{}.csv", job.realization, snr, method.as_str()), &trace)?;
                }
                fixed.push((p, millis));
            }
        }
    }

    let mut out = Vec::with_capacity(job.points.len());
    for &(point_index, point) in &job.points {
        let h = generate_channel::<f64>(&point.channel, stream)?;
        let ici = IciProfile::from_mode(point.channel.num_subcarriers, point.ici)?;
        let mut samples = Vec::with_capacity(point.snr_db.len() * cfg.methods.len());
        for &snr in &point.snr_db {
            let psi = NoiseModel::<f64>::from_snr_db(snr)?.psi();
            for &method in &cfg.methods {
                let idx = samples.len();
                let designed;
                let (precoder, millis) = if design_point.is_some() {
                    let (p, m) = &fixed[idx];
                    (p, *m)
                } else {
                    let (p, trace, millis) = design(method, &h, &ici, psi, point, stream)?;
                    if let Some(dir) = &opts.trace_dir {
                        let name = format!("p{}_r{}_snr{}_{}.csv", point_index, job.realization, snr, method.as_str());
                        write_trace(dir, name, &trace)?;
                    }
                    designed = p;
                    (&designed, millis)
                };
                let eval = evaluation_profile(method, &ici)?;
                let se = sum_rate(&h, &precoder.analog, &precoder.digital, &eval, psi)?;
                samples.push(Sample { se, millis });
            }
        }
        out.push(samples);
    }
    Ok(out)
}

fn run_job(
    cfg: &ExperimentConfig,
    design_point: Option<&SweepPoint>,
    job: &Job<'_>,
    opts: &RunOptions,
) -> Result<Vec<Vec<Sample>>, HarnessError> {
    let mut attempt = 0;
    loop {
        let stream = realization_stream(cfg.seed, job.realization, attempt);
        match run_realization(cfg, design_point, job, &stream, opts) {
            Ok(samples) => return Ok(samples),
            Err(HarnessError::Core(e)) if e.is_degenerate() && attempt < MAX_REDRAWS => {
                log::warn!("realization {} attempt {attempt}: {e}; redrawing", job.realization);
                attempt += 1;
            }
            Err(HarnessError::Core(e)) if e.is_degenerate() => {
                return Err(HarnessError::Aborted { realization: job.realization, attempts: attempt + 1, source: e });
            }
            Err(e) => return Err(e),
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every sweep value, SNR and method over `cfg.realizations` channel
/// draws. Realization `r` uses stream `(seed, r)` for every method and
/// sweep value, and results are reduced in realization order, so the
/// table does not depend on the thread count.
///
/// A degenerate draw (rank-deficient effective channel and the like) is
/// replaced by stream `(seed, r + attempt * 2^40)`. With fixed precoders
/// the whole realization, design included, is redrawn.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ResultTable, HarnessError> {
    cfg.validate()?;
    let sweep = cfg.effective_sweep();
    let points = cfg.points()?;
    let base = cfg.base_point();
    let design_point = cfg.fixed_precoders.then_some(&base);
    if let Some(dir) = &opts.trace_dir {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
    }

    let indexed: Vec<(usize, &SweepPoint)> = points.iter().enumerate().collect();
    let jobs: Vec<Job<'_>> = if cfg.fixed_precoders {
        (0..cfg.realizations).map(|realization| Job { points: indexed.clone(), realization }).collect()
    } else {
        indexed
            .iter()
            .flat_map(|&p| (0..cfg.realizations).map(move |realization| Job { points: vec![p], realization }))
            .collect()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<Vec<Sample>>, HarnessError>> =
        pool.install(|| jobs.par_iter().map(|job| run_job(cfg, design_point, job, opts)).collect());

    // per point, per realization; the first failure in job order wins
    let mut by_point: Vec<Vec<Vec<Sample>>> = vec![Vec::with_capacity(cfg.realizations); points.len()];
    for (job, result) in jobs.iter().zip(results) {
        for (&(point_index, _), samples) in job.points.iter().zip(result?) {
            by_point[point_index].push(samples);
        }
    }

    let mut table = ResultTable::default();
    for (point, runs) in points.iter().zip(&by_point) {
        for (si, &snr) in point.snr_db.iter().enumerate() {
            for (mi, &method) in cfg.methods.iter().enumerate() {
                let idx = si * cfg.methods.len() + mi;
                let se: Vec<f64> = runs.iter().map(|s| s[idx].se).collect();
                let ms: Vec<f64> = runs.iter().map(|s| s[idx].millis).collect();
                let (mean, std) = mean_std(&se);
                table.rows.push(ResultRow {
                    sweep_param: sweep.axis.as_str().to_string(),
                    sweep_value: point.value,
                    snr_db: snr,
                    method: method.as_str().to_string(),
                    se_mean_bps_hz: mean,
                    se_std: std,
                    realizations: se.len(),
                    time_ms_mean: cfg.timing.then(|| mean_std(&ms).0),
                    seed: cfg.seed,
                });
            }
        }
    }
    table.sort();
    Ok(table)
}

/// Conventional and reduced designs on identical instances, with the
/// design time recorded.
pub fn timing_comparison(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ResultTable, HarnessError> {
    let cfg = ExperimentConfig {
        methods: vec![MethodName::Conventional, MethodName::Reduced],
        timing: true,
        ..cfg.clone()
    };
    run_experiment(&cfg, opts)
}

/// First-attempt channel of realization 0 at the unswept configuration.
pub fn first_channel(cfg: &ExperimentConfig) -> Result<ChannelRealization64, HarnessError> {
    Ok(generate_channel(&cfg.channel, &realization_stream(cfg.seed, 0, 0))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Sweep, SweepAxis};
    use hybridbf::channel::ChannelConfig;
    use hybridbf::precoding::PipelineSettings;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            channel: ChannelConfig { tx_antennas: 9, num_users: 2, num_subcarriers: 4, ..Default::default() },
            pipeline: PipelineSettings { rf_chains: 3, ..Default::default() },
            realizations: 3,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn one_row_per_value_snr_and_method() {
        let cfg = ExperimentConfig {
            snr_db: vec![0.0, 20.0],
            sweep: Some(Sweep { axis: SweepAxis::Distance, values: vec![1.0, 5.0] }),
            methods: MethodName::ALL.to_vec(),
            ..tiny()
        };
        let table = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(table.rows.len(), 2 * 2 * 4);
        assert!(table.rows.iter().all(|r| r.realizations == 3 && r.time_ms_mean.is_none()));
    }

    #[test]
    fn methods_see_the_same_channel() {
        // the no-ICI baseline and its ideal evaluation share a precoder
        let cfg = ExperimentConfig { realizations: 1, methods: vec![MethodName::NoIci, MethodName::NoIciIdeal], ..tiny() };
        let table = run_experiment(&cfg, &RunOptions::default()).unwrap();
        let b = table.find(10.0, 10.0, "no-ici").unwrap().se_mean_bps_hz;
        let c = table.find(10.0, 10.0, "no-ici-ideal").unwrap().se_mean_bps_hz;
        assert!(b <= c);
    }

    #[test]
    fn rate_rises_with_snr_for_fixed_design() {
        let cfg = ExperimentConfig { snr_db: vec![0.0, 25.0], methods: vec![MethodName::NoIci], ..tiny() };
        let table = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert!(table.rows[1].se_mean_bps_hz > table.rows[0].se_mean_bps_hz);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = tiny();
        let a = run_experiment(&cfg, &RunOptions { threads: Some(1), trace_dir: None }).unwrap();
        let b = run_experiment(&cfg, &RunOptions { threads: Some(4), trace_dir: None }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn timing_comparison_fills_times() {
        let cfg = ExperimentConfig { realizations: 1, methods: vec![MethodName::NoIci], ..tiny() };
        let table = timing_comparison(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| r.time_ms_mean.is_some_and(|t| t >= 0.0)));
    }

    #[test]
    fn fixed_precoders_match_a_redesign_at_the_base_point() {
        let sweep = Some(Sweep { axis: SweepAxis::Distance, values: vec![1.0, 5.0, 10.0] });
        let fixed = ExperimentConfig { sweep: sweep.clone(), fixed_precoders: true, ..tiny() };
        let free = ExperimentConfig { sweep, ..tiny() };
        let a = run_experiment(&fixed, &RunOptions::default()).unwrap();
        let b = run_experiment(&free, &RunOptions::default()).unwrap();
        for method in ["conventional", "reduced"] {
            let at = |t: &ResultTable, d| t.find(d, 10.0, method).unwrap().se_mean_bps_hz;
            assert_eq!(at(&a, 5.0), at(&b, 5.0));
            assert!(at(&a, 1.0) > at(&a, 5.0) && at(&a, 5.0) > at(&a, 10.0));
        }
    }

    #[test]
    fn zero_realizations_rejected() {
        let cfg = ExperimentConfig { realizations: 0, ..tiny() };
        assert!(matches!(run_experiment(&cfg, &RunOptions::default()), Err(HarnessError::Config(_))));
    }

    #[test]
    fn mean_and_sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
