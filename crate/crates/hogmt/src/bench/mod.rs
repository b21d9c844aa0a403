//! Experiment orchestration: seeded end-to-end pipelines, BER sweeps over
//! SNR, selection threshold and modulation, ensemble characterization, and
//! deterministic artifact emission.
//!
//! A sweep factors into independent work items (trial, modulation): each
//! trial draws its own channel from a derived seed, decomposes it once, and
//! then every arm, threshold, and SNR point reuses that decomposition with
//! shared payload and noise seeds, so arm differences are paired. Trials run
//! in parallel; results are reduced in trial order, which makes the output
//! byte-identical across worker counts.

pub mod config;
pub mod seeds;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array4;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use config::{parse_config, Arm, ExperimentConfig, PowerMode, WarmupSkip};
pub use seeds::{channel_seed, data_seed, derive_seed, noise_seed};

use crate::baselines::{
    counting_mask, masked_ber, zf_receiver_baseline, LinkOptions, ThpLink,
};
use crate::channel::{apply_kernel, impulse_to_kernel, synth_channel, spreading_to_transfer,
    atomic_kernel, impulse_to_spreading};
use crate::decompose::{hogmt_decompose, select_eigen_with_mode};
use crate::ensemble::{ensemble_klt, ChannelEnsemble, EnsembleEigenSystem};
use crate::error::{Error, Result};
use crate::grid::FlatteningMap;
use crate::modem::{
    awgn, demodulate, modulate, random_bits, theoretical_ber, Constellation, LinkResult, Scheme,
};
use crate::precode::{normalize_power, precode};
use crate::stats::{
    ccf_direct_with_sem, ccf_from_eigen, global_scattering, lsf_direct_with_sem, lsf_from_eigen,
    stationary_degenerate_check, tf_path_gain, total_gain, AxisPairing, StationarityReport,
};

/// Pooled bit counts for one (arm, modulation, epsilon, SNR) cell.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub method: String,
    pub modulation: Scheme,
    pub epsilon: Option<f64>,
    pub snr_db: f64,
    pub trials: usize,
    pub bits_total: u64,
    pub bits_error: u64,
}

impl AggregateRow {
    pub fn ber(&self) -> f64 {
        if self.bits_total == 0 {
            0.0
        } else {
            self.bits_error as f64 / self.bits_total as f64
        }
    }

    /// Wilson score interval at the given normal quantile (1.96 for 95%).
    pub fn wilson_ci(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.bits_error, self.bits_total, z)
    }
}

pub fn wilson_interval(errors: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Complete result of a BER sweep.
#[derive(Debug)]
pub struct SweepResult {
    pub rows: Vec<LinkResult>,
    pub aggregates: Vec<AggregateRow>,
    /// (trial index, error description) for trials excluded from the pool.
    pub failures: Vec<(usize, String)>,
    pub trials: usize,
}

impl SweepResult {
    pub fn failure_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.trials as f64
        }
    }

    /// Look up the aggregate BER curve of one arm at a fixed modulation and
    /// threshold, ordered like the config's SNR grid.
    pub fn curve(&self, method: &str, modulation: Scheme, epsilon: Option<f64>) -> Vec<&AggregateRow> {
        self.aggregates
            .iter()
            .filter(|a| {
                a.method == method
                    && a.modulation == modulation
                    && match (a.epsilon, epsilon) {
                        (Some(x), Some(y)) => (x - y).abs() < 1e-12 * y.abs().max(1e-300),
                        (None, None) => true,
                        _ => false,
                    }
            })
            .collect()
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<LinkResult>> {
    let mut ch_cfg = cfg.channel.clone();
    ch_cfg.seed = channel_seed(cfg.master_seed, trial as u64);
    let h = synth_channel(&ch_cfg)?;
    let k = impulse_to_kernel(&h);
    let map = FlatteningMap::user_major(k.num_users, k.num_time);
    let es = hogmt_decompose(&k, &map)?;
    let opts = LinkOptions {
        signal_power_ref: 1.0,
        warmup_skip: cfg.effective_warmup(),
    };
    let mask = counting_mask(k.num_users, k.num_time, opts.warmup_skip);

    let mut rows = Vec::new();
    for (mi, &scheme) in cfg.modulations.iter().enumerate() {
        let c = Constellation::new(scheme);
        let n_bits = k.num_users * k.num_time * c.bits_per_symbol;
        let bits = random_bits(n_bits, data_seed(cfg.master_seed, trial as u64, mi as u64));
        let s = modulate(&bits, &c, k.num_users, k.num_time)?;

        if cfg.arms.contains(&Arm::Ideal) {
            for (si, &snr) in cfg.snr_db_grid.iter().enumerate() {
                let seed = noise_seed(cfg.master_seed, trial as u64, si as u64);
                let noisy = awgn(&s, snr, 1.0, seed)?;
                let rx = demodulate(&noisy, &c);
                let (total, errors) = masked_ber(&bits, &rx, &mask, c.bits_per_symbol)?;
                rows.push(LinkResult {
                    method: "ideal".into(),
                    modulation: scheme,
                    epsilon: None,
                    snr_db: snr,
                    bits_total: total,
                    bits_error: errors,
                    seed,
                });
            }
        }

        if cfg.arms.contains(&Arm::Hogmt) {
            for &eps in &cfg.epsilons {
                let selected = select_eigen_with_mode(&es, eps, cfg.epsilon_mode)?;
                let (x, _report) = precode(&selected, &s)?;
                let (x_tx, gain) = match cfg.power_mode {
                    PowerMode::Unnormalized => (x, 1.0),
                    PowerMode::GenieNormalized => normalize_power(&x, 1.0)?,
                };
                let clean = apply_kernel(&k, &x_tx)?;
                for (si, &snr) in cfg.snr_db_grid.iter().enumerate() {
                    let seed = noise_seed(cfg.master_seed, trial as u64, si as u64);
                    let mut noisy = awgn(&clean, snr, 1.0, seed)?;
                    if gain != 1.0 {
                        noisy.values.mapv_inplace(|z| z / gain);
                    }
                    let rx = demodulate(&noisy, &c);
                    let (total, errors) = masked_ber(&bits, &rx, &mask, c.bits_per_symbol)?;
                    rows.push(LinkResult {
                        method: "hogmt".into(),
                        modulation: scheme,
                        epsilon: Some(eps),
                        snr_db: snr,
                        bits_total: total,
                        bits_error: errors,
                        seed,
                    });
                }
            }
        }

        if cfg.arms.contains(&Arm::Zf) {
            for (si, &snr) in cfg.snr_db_grid.iter().enumerate() {
                let seed = noise_seed(cfg.master_seed, trial as u64, si as u64);
                let (res, _cond) =
                    zf_receiver_baseline(&k, &es, &s, &c, &bits, snr, seed, &opts)?;
                rows.push(res);
            }
        }

        if cfg.arms.contains(&Arm::ThpZf) {
            let thp = ThpLink::prepare(&k, &s, &c)?;
            for (si, &snr) in cfg.snr_db_grid.iter().enumerate() {
                let seed = noise_seed(cfg.master_seed, trial as u64, si as u64);
                rows.push(thp.run(&bits, snr, seed, &opts)?);
            }
        }
    }
    Ok(rows)
}

/// Run the full BER sweep described by the config.
///
/// Failed trials are recorded and excluded from the pooled aggregates.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let outcomes: Vec<(usize, std::result::Result<Vec<LinkResult>, String>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| (trial, run_trial(cfg, trial).map_err(|e| e.to_string())))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut pool: BTreeMap<(String, usize, Option<u64>, u64), (u64, u64, usize)> = BTreeMap::new();
    let mut sorted = outcomes;
    sorted.sort_by_key(|(t, _)| *t);
    for (trial, outcome) in sorted {
        match outcome {
            Err(msg) => failures.push((trial, msg)),
            Ok(trial_rows) => {
                for r in &trial_rows {
                    let mi = cfg
                        .modulations
                        .iter()
                        .position(|&m| m == r.modulation)
                        .expect("modulation from config");
                    let ei = r.epsilon.map(|e| {
                        cfg.epsilons
                            .iter()
                            .position(|&x| (x - e).abs() < 1e-300 || x == e)
                            .expect("epsilon from config") as u64
                    });
                    let si = cfg
                        .snr_db_grid
                        .iter()
                        .position(|&x| x == r.snr_db)
                        .expect("snr from config") as u64;
                    let entry = pool
                        .entry((r.method.clone(), mi, ei, si))
                        .or_insert((0, 0, 0));
                    entry.0 += r.bits_total;
                    entry.1 += r.bits_error;
                    entry.2 += 1;
                }
                rows.extend(trial_rows);
            }
        }
    }

    let aggregates = pool
        .into_iter()
        .map(|((method, mi, ei, si), (bits, errs, n))| AggregateRow {
            method,
            modulation: cfg.modulations[mi],
            epsilon: ei.map(|i| cfg.epsilons[i as usize]),
            snr_db: cfg.snr_db_grid[si as usize],
            trials: n,
            bits_total: bits,
            bits_error: errs,
        })
        .collect();

    Ok(SweepResult {
        rows,
        aggregates,
        failures,
        trials: cfg.trials,
    })
}

/// The purely spatial pipeline: same engine on a single-instant channel.
pub fn run_spatial_demo(cfg: &ExperimentConfig) -> Result<SweepResult> {
    if cfg.channel.num_time != 1 || cfg.channel.tap_count_max != 1 {
        return Err(Error::InvalidConfig(
            "spatial demo needs channel.num_time = 1 and single-tap channels".into(),
        ));
    }
    run_ber_sweep(cfg)
}

/// SNR (dB) at which a measured curve first reaches `target` BER, by linear
/// interpolation in log-BER. `None` if the curve never gets there.
pub fn snr_at_ber(snrs: &[f64], bers: &[f64], target: f64) -> Option<f64> {
    assert_eq!(snrs.len(), bers.len());
    let floor = 1e-12;
    let lt = target.max(floor).ln();
    for i in 0..snrs.len() {
        let b = bers[i].max(floor);
        if b <= target {
            if i == 0 {
                return Some(snrs[0]);
            }
            let prev = bers[i - 1].max(floor);
            if prev <= target {
                return Some(snrs[i - 1]);
            }
            let frac = (prev.ln() - lt) / (prev.ln() - b.ln());
            return Some(snrs[i - 1] + frac * (snrs[i] - snrs[i - 1]));
        }
    }
    None
}

/// Characterization of a generated kernel ensemble.
pub struct CharacterizationResult {
    pub klt: EnsembleEigenSystem,
    /// Eigen statistics under both axis pairings, with the direct estimates
    /// and their standard errors.
    pub ccf_eigen_printed: Array4<f64>,
    pub ccf_eigen_decomposition: Array4<f64>,
    pub ccf_direct: Array4<f64>,
    pub ccf_sem: Array4<f64>,
    pub lsf_eigen_printed: Array4<f64>,
    pub lsf_eigen_decomposition: Array4<f64>,
    pub lsf_direct: Array4<f64>,
    pub lsf_sem: Array4<f64>,
    pub total_gain_eigen: f64,
    pub total_gain_direct: f64,
    /// Worst |eigen - direct| / (3 sem + floor) over bins, per pairing.
    pub ccf_agreement_z: (f64, f64),
    pub lsf_agreement_z: (f64, f64),
    /// Stationarity diagnostic from the single-user atomic-kernel pipeline.
    pub stationarity: Option<StationarityReport>,
}

fn agreement_z(eigen: &Array4<f64>, direct: &Array4<f64>, sem: &Array4<f64>, scale: f64) -> f64 {
    let floor = 1e-9 * scale.max(1e-30);
    eigen
        .iter()
        .zip(direct.iter())
        .zip(sem.iter())
        .map(|((e, d), s)| (e - d).abs() / (3.0 * s + floor))
        .fold(0.0, f64::max)
}

/// Generate `cfg.trials` kernel realizations, decompose the ensemble, and
/// compute every statistic eigen-based and directly.
pub fn run_characterization(cfg: &ExperimentConfig) -> Result<CharacterizationResult> {
    cfg.validate()?;
    if cfg.trials < 2 {
        return Err(Error::InvalidConfig(
            "characterization needs at least 2 realizations".into(),
        ));
    }
    let (num_u, num_t) = (cfg.channel.num_users, cfg.channel.num_time);
    let map = FlatteningMap::user_major(num_u, num_t);

    let mut kernels = Vec::with_capacity(cfg.trials);
    let mut raw4d = Vec::with_capacity(cfg.trials);
    let mut atomic = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let mut ch_cfg = cfg.channel.clone();
        ch_cfg.seed = channel_seed(cfg.master_seed, trial as u64);
        let h = synth_channel(&ch_cfg)?;
        let k = impulse_to_kernel(&h);
        raw4d.push(k.values.clone());
        kernels.push(k);
        // single-user slice drives the TF/delay-Doppler analysis
        let s = impulse_to_spreading(h.pair_slice(0, 0).view());
        let l = spreading_to_transfer(&s, Some(num_t.max(h.max_delay)))?;
        atomic.push(atomic_kernel(&l, 1.0)?.values);
    }

    let ensemble = ChannelEnsemble::from_kernels(&kernels, &map)?;
    let klt = ensemble_klt(&ensemble)?;

    let ccf_eigen_printed = ccf_from_eigen(&klt, AxisPairing::Printed);
    let ccf_eigen_decomposition = ccf_from_eigen(&klt, AxisPairing::Decomposition);
    let (ccf_direct, ccf_sem) = ccf_direct_with_sem(&raw4d)?;
    let lsf_eigen_printed = lsf_from_eigen(&klt, AxisPairing::Printed);
    let lsf_eigen_decomposition = lsf_from_eigen(&klt, AxisPairing::Decomposition);
    let (lsf_direct, lsf_sem) = lsf_direct_with_sem(&raw4d)?;

    let tg_eigen = total_gain(&klt);
    let tg_direct: f64 = lsf_direct.iter().sum();

    let ccf_agreement_z = (
        agreement_z(&ccf_eigen_printed, &ccf_direct, &ccf_sem, tg_eigen),
        agreement_z(&ccf_eigen_decomposition, &ccf_direct, &ccf_sem, tg_eigen),
    );
    let lsf_agreement_z = (
        agreement_z(&lsf_eigen_printed, &lsf_direct, &lsf_sem, tg_eigen),
        agreement_z(&lsf_eigen_decomposition, &lsf_direct, &lsf_sem, tg_eigen),
    );

    let stationarity = stationary_degenerate_check(&atomic).ok();

    Ok(CharacterizationResult {
        klt,
        ccf_eigen_printed,
        ccf_eigen_decomposition,
        ccf_direct,
        ccf_sem,
        lsf_eigen_printed,
        lsf_eigen_decomposition,
        lsf_direct,
        lsf_sem,
        total_gain_eigen: tg_eigen,
        total_gain_direct: tg_direct,
        ccf_agreement_z,
        lsf_agreement_z,
        stationarity,
    })
}

// ---------------------------------------------------------------------------
// artifact emission
// ---------------------------------------------------------------------------

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(String, String, usize)> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    f.write_all(contents.as_bytes())?;
    Ok((name.to_string(), sha256_hex(contents.as_bytes()), contents.len()))
}

/// Write the sweep artifacts (per-trial rows, pooled aggregates with 95%
/// intervals, closed-form reference curves, failures) plus a manifest that
/// hashes every emitted file. Returns the manifest path.
pub fn write_sweep_outputs(cfg: &ExperimentConfig, sweep: &SweepResult) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut files = Vec::new();

    let config_text = cfg.to_config_text();
    files.push(write_file(&cfg.output_dir, "config.cfg", &config_text)?);

    let mut rows_csv = String::from(LinkResult::csv_header());
    rows_csv.push('\n');
    for r in &sweep.rows {
        rows_csv.push_str(&r.csv_row());
        rows_csv.push('\n');
    }
    files.push(write_file(&cfg.output_dir, "link_results.csv", &rows_csv)?);

    let mut agg_csv =
        String::from("method,modulation,epsilon,snr_db,trials,bits,errors,ber,ci_lo,ci_hi\n");
    for a in &sweep.aggregates {
        let (lo, hi) = a.wilson_ci(1.96);
        let eps = a.epsilon.map(|e| e.to_string()).unwrap_or_default();
        agg_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            a.method,
            a.modulation.name(),
            eps,
            a.snr_db,
            a.trials,
            a.bits_total,
            a.bits_error,
            a.ber(),
            lo,
            hi
        ));
    }
    files.push(write_file(&cfg.output_dir, "ber_aggregate.csv", &agg_csv)?);

    let mut theory_csv = String::from("method,modulation,epsilon,snr_db,ber\n");
    for &m in &cfg.modulations {
        for &snr in &cfg.snr_db_grid {
            theory_csv.push_str(&format!(
                "theory,{},,{},{}\n",
                m.name(),
                snr,
                theoretical_ber(m, snr)
            ));
        }
    }
    files.push(write_file(&cfg.output_dir, "theory.csv", &theory_csv)?);

    if !sweep.failures.is_empty() {
        let mut fail_csv = String::from("trial,error\n");
        for (t, e) in &sweep.failures {
            fail_csv.push_str(&format!("{t},{}\n", e.replace(',', ";")));
        }
        files.push(write_file(&cfg.output_dir, "failures.csv", &fail_csv)?);
    }

    let manifest = serde_json::json!({
        "schema_version": 1,
        "code_version": env!("CARGO_PKG_VERSION"),
        "master_seed": cfg.master_seed,
        "config_sha256": sha256_hex(config_text.as_bytes()),
        "trials": sweep.trials,
        "failed_trials": sweep.failures.len(),
        "files": files.iter().map(|(name, sha, bytes)| {
            serde_json::json!({"name": name, "sha256": sha, "bytes": bytes})
        }).collect::<Vec<_>>(),
    });
    let manifest_path = cfg.output_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest_path)
}

fn array4_csv(name: &str, axes: [&str; 4], a: &Array4<f64>) -> String {
    let mut s = format!("{},{},{},{},{}\n", axes[0], axes[1], axes[2], axes[3], name);
    let d = a.raw_dim();
    for i0 in 0..d[0] {
        for i1 in 0..d[1] {
            for i2 in 0..d[2] {
                for i3 in 0..d[3] {
                    s.push_str(&format!("{i0},{i1},{i2},{i3},{}\n", a[[i0, i1, i2, i3]]));
                }
            }
        }
    }
    s
}

/// Write characterization artifacts: one CSV per statistic plus a JSON
/// summary. Returns the manifest path.
pub fn write_characterization_outputs(
    cfg: &ExperimentConfig,
    ch: &CharacterizationResult,
) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut files = Vec::new();
    let lag_axes = ["dt", "df", "dtau", "dnu"];
    let loc_axes = ["t", "f", "tau", "nu"];

    files.push(write_file(
        &cfg.output_dir,
        "ccf_eigen.csv",
        &array4_csv("ccf_eigen_printed", lag_axes, &ch.ccf_eigen_printed),
    )?);
    files.push(write_file(
        &cfg.output_dir,
        "ccf_direct.csv",
        &array4_csv("ccf_direct", lag_axes, &ch.ccf_direct),
    )?);
    files.push(write_file(
        &cfg.output_dir,
        "lsf_eigen.csv",
        &array4_csv("lsf_eigen_printed", loc_axes, &ch.lsf_eigen_printed),
    )?);
    files.push(write_file(
        &cfg.output_dir,
        "lsf_direct.csv",
        &array4_csv("lsf_direct", loc_axes, &ch.lsf_direct),
    )?);

    let gs = global_scattering(&ch.klt, AxisPairing::Printed);
    let pg = tf_path_gain(&ch.klt, AxisPairing::Printed);
    let mut gs_csv = String::from("tau,nu,value\n");
    for ((a, b), v) in gs.indexed_iter() {
        gs_csv.push_str(&format!("{a},{b},{v}\n"));
    }
    files.push(write_file(&cfg.output_dir, "global_scattering.csv", &gs_csv)?);
    let mut pg_csv = String::from("t,f,value\n");
    for ((a, b), v) in pg.indexed_iter() {
        pg_csv.push_str(&format!("{a},{b},{v}\n"));
    }
    files.push(write_file(&cfg.output_dir, "tf_path_gain.csv", &pg_csv)?);

    let lambdas = ch.klt.lambdas();
    let summary = serde_json::json!({
        "total_gain_eigen": ch.total_gain_eigen,
        "total_gain_direct": ch.total_gain_direct,
        "mode_count": ch.klt.modes.len(),
        "top_lambdas": lambdas.iter().take(10).collect::<Vec<_>>(),
        "separability_top_modes": ch.klt.modes.iter().take(10).map(|m| m.separability).collect::<Vec<_>>(),
        "ccf_agreement_z": {"printed": ch.ccf_agreement_z.0, "decomposition": ch.ccf_agreement_z.1},
        "lsf_agreement_z": {"printed": ch.lsf_agreement_z.0, "decomposition": ch.lsf_agreement_z.1},
        "stationarity_off_support_mass": ch.stationarity.as_ref().map(|s| s.off_support_mass),
    });
    let summary_text = serde_json::to_string_pretty(&summary)?;
    files.push(write_file(&cfg.output_dir, "summary.json", &summary_text)?);

    let manifest = serde_json::json!({
        "schema_version": 1,
        "code_version": env!("CARGO_PKG_VERSION"),
        "master_seed": cfg.master_seed,
        "config_sha256": sha256_hex(cfg.to_config_text().as_bytes()),
        "files": files.iter().map(|(name, sha, bytes)| {
            serde_json::json!({"name": name, "sha256": sha, "bytes": bytes})
        }).collect::<Vec<_>>(),
    });
    let manifest_path = cfg.output_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(dir: PathBuf) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::paper_spatiotemporal(5, dir);
        cfg.channel.num_users = 2;
        cfg.channel.num_time = 12;
        cfg.channel.tap_count_min = 2;
        cfg.channel.tap_count_max = 4;
        cfg.channel.gain_mean_profile = vec![0.5; 12];
        cfg.channel.gain_std_profile = vec![0.4; 12];
        cfg.trials = 3;
        cfg.snr_db_grid = vec![6.0, 12.0];
        cfg.epsilons = vec![1e-1, 1e-4];
        cfg
    }

    #[test]
    fn sweep_rows_and_aggregates_are_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_cfg(dir.path().to_path_buf());
        let sweep = run_ber_sweep(&cfg).unwrap();
        assert!(sweep.failures.is_empty(), "{:?}", sweep.failures);
        // arms: ideal (2 snr) + hogmt (2 eps x 2 snr) + zf (2) + thp (2) per trial
        assert_eq!(sweep.rows.len(), 3 * (2 + 4 + 2 + 2));
        let agg_bits: u64 = sweep.aggregates.iter().map(|a| a.bits_total).sum();
        let row_bits: u64 = sweep.rows.iter().map(|r| r.bits_total).sum();
        assert_eq!(agg_bits, row_bits);
        // paired noise seeds across arms at fixed (trial, snr)
        let seeds: std::collections::BTreeSet<u64> = sweep
            .rows
            .iter()
            .filter(|r| r.snr_db == 6.0)
            .map(|r| r.seed)
            .collect();
        assert_eq!(seeds.len(), 3, "one noise seed per trial at a fixed snr");
    }

    #[test]
    fn sweep_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_cfg(dir.path().to_path_buf());
        let a = run_ber_sweep(&cfg).unwrap();
        let b = run_ber_sweep(&cfg).unwrap();
        let fmt = |s: &SweepResult| {
            s.rows
                .iter()
                .map(|r| r.csv_row())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(fmt(&a), fmt(&b));
    }

    #[test]
    fn outputs_include_manifest_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_cfg(dir.path().to_path_buf());
        let sweep = run_ber_sweep(&cfg).unwrap();
        let manifest_path = write_sweep_outputs(&cfg, &sweep).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
        let files = manifest["files"].as_array().unwrap();
        assert!(files.len() >= 4);
        for f in files {
            let name = f["name"].as_str().unwrap();
            let bytes = std::fs::read(cfg.output_dir.join(name)).unwrap();
            assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes), "{name}");
        }
    }

    #[test]
    fn snr_interpolation() {
        let snrs = [0.0, 4.0, 8.0];
        let bers = [1e-1, 1e-2, 1e-4];
        assert_eq!(snr_at_ber(&snrs, &bers, 2e-1), Some(0.0));
        let at = snr_at_ber(&snrs, &bers, 1e-2).unwrap();
        assert!((at - 4.0).abs() < 1e-12);
        let mid = snr_at_ber(&snrs, &bers, 1e-3).unwrap();
        assert!(mid > 4.0 && mid < 8.0);
        assert_eq!(snr_at_ber(&snrs, &bers, 1e-6), None);
    }

    #[test]
    fn characterization_runs_on_small_ensemble() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_cfg(dir.path().to_path_buf());
        cfg.trials = 40;
        let ch = run_characterization(&cfg).unwrap();
        assert!(ch.total_gain_eigen > 0.0);
        // the centered eigen total tracks the raw second moment up to the
        // mean's energy
        assert!(ch.total_gain_eigen <= ch.total_gain_direct * 1.01);
        let manifest = write_characterization_outputs(&cfg, &ch).unwrap();
        assert!(manifest.exists());
    }

    #[test]
    fn ideal_arm_bpsk_matches_gaussian_tail() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_cfg(dir.path().to_path_buf());
        cfg.channel.num_users = 2;
        cfg.channel.num_time = 100;
        cfg.channel.gain_mean_profile = vec![0.5; 100];
        cfg.channel.gain_std_profile = vec![0.4; 100];
        cfg.channel.tap_count_min = 1;
        cfg.channel.tap_count_max = 1; // keep the trial cheap; only ideal runs
        cfg.arms = [Arm::Ideal].into();
        cfg.modulations = vec![Scheme::Bpsk];
        cfg.snr_db_grid = vec![0.0];
        cfg.trials = 100;
        cfg.warmup_skip = WarmupSkip::Fixed(0);
        let sweep = run_ber_sweep(&cfg).unwrap();
        let agg = &sweep.aggregates[0];
        assert_eq!(agg.bits_total, 100 * 200);
        let p = theoretical_ber(Scheme::Bpsk, 0.0); // 0.078650 at 0 dB
        let (lo, hi) = agg.wilson_ci(1.96);
        assert!(
            lo <= p && p <= hi,
            "BPSK at 0 dB: measured {} CI [{lo}, {hi}] vs theory {p}",
            agg.ber()
        );
    }

    #[test]
    fn genie_normalized_power_changes_the_link() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_cfg(dir.path().to_path_buf());
        cfg.arms = [Arm::Hogmt].into();
        cfg.epsilons = vec![1e-1]; // heavy truncation: scaling matters
        cfg.trials = 6;
        let base = run_ber_sweep(&cfg).unwrap();
        cfg.power_mode = PowerMode::GenieNormalized;
        let genie = run_ber_sweep(&cfg).unwrap();
        let total = |s: &SweepResult| -> u64 { s.aggregates.iter().map(|a| a.bits_error).sum() };
        assert_ne!(
            total(&base),
            total(&genie),
            "power accounting should be measurable"
        );
        // determinism holds within each mode
        let again = run_ber_sweep(&cfg).unwrap();
        assert_eq!(total(&genie), total(&again));
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(0, 1000, 1.96);
        assert!(lo == 0.0 && hi < 0.01);
        let (lo, hi) = wilson_interval(500, 1000, 1.96);
        assert!(lo < 0.5 && hi > 0.5 && hi - lo < 0.07);
    }
}
