//! Sweeps and reports behind the command-line tool. Every run is a pure
//! function of its configuration; writers add a JSON sidecar echoing it.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, gaussian_gains_from, make_instance, ChannelInstance, Mode};
use crate::codec::{
    build_chain, crypto_lemma_check, dither_uniformity, eavesdropper_observation, encode, Binning,
    CryptoLemmaReport, LatticeChain,
};
use crate::error::{Error, Result};
use crate::lattice::SearchOptions;
use crate::lemma1::{lemma1_row, Lemma1Row, QuantizerExperiment};
use crate::rates::{analyze, RateReport};

pub const SWEEP_SCHEMA: &str = "cfsec_sweep_v1";
pub const THETA_SCHEMA: &str = "cfsec_theta_v1";
pub const LEMMA1_SCHEMA: &str = "cfsec_lemma1_v1";
/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CFSEC_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    SnrSweep,
    ThetaSweep,
    Rates,
    Lemma1,
    CodecDemo,
}

/// Inclusive dB grid `start:stop:step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn single(db: f64) -> Self {
        Self {
            start: db,
            stop: db,
            step: 1.0,
        }
    }

    /// Parses `start:stop:step` or a single value.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{s}' in grid '{text}'")))
        };
        let grid = match parts.as_slice() {
            [one] => Self::single(num(one)?),
            [a, b, c] => Self {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "grid '{text}' is not start:stop:step"
                )))
            }
        };
        grid.points()?;
        Ok(grid)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::NonFinite("snr grid"));
        }
        if self.step <= 0.0 {
            return Err(Error::DegenerateGrid(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if self.stop < self.start {
            return Err(Error::DegenerateGrid("empty grid".into()));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GainSpec {
    /// `h` and `g` i.i.d. standard normal, drawn once per trial.
    Gaussian,
    Fixed {
        h: Vec<f64>,
        g: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: RunMode,
    pub snr_db: SnrGrid,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(rename = "K")]
    pub users: usize,
    pub gains: GainSpec,
}

impl SweepConfig {
    pub fn snr_sweep(users: usize, snr_db: SnrGrid, trials: usize, seed: u64) -> Self {
        Self {
            mode: RunMode::SnrSweep,
            snr_db,
            trials,
            seed,
            out: None,
            users,
            gains: GainSpec::Gaussian,
        }
    }

    /// Grid points; theta sweeps read `trials` as the number of angles.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.users == 0 {
            return Err(Error::NoUsers);
        }
        if let GainSpec::Fixed { h, g } = &self.gains {
            if h.len() != self.users || g.len() != self.users {
                return Err(Error::LengthMismatch {
                    h: h.len(),
                    g: g.len(),
                });
            }
        }
        self.snr_db.points()
    }
}

/// Independent stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Resolves an output path against the default directory.
pub fn output_path(out: Option<&Path>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(default_name)
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes `config` as pretty JSON next to `out`.
pub fn write_sidecar<C: Serialize>(out: &Path, config: &C) -> Result<PathBuf> {
    let path = sidecar_path(out);
    let mut f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&mut f, config)?;
    writeln!(f)?;
    Ok(path)
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(f))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// `trial` or `mean`.
    pub kind: &'static str,
    pub snr_db: f64,
    pub trial: Option<usize>,
    pub r_sum_secure: f64,
    pub r_baseline: f64,
    pub r_nonsecure_cf: f64,
    pub capacity_sum: f64,
    pub degraded: bool,
}

impl SweepRow {
    fn from_report(snr_db: f64, trial: usize, r: &RateReport) -> Self {
        Self {
            kind: "trial",
            snr_db,
            trial: Some(trial),
            r_sum_secure: r.r_sum_secure,
            r_baseline: r.r_baseline,
            r_nonsecure_cf: r.r_nonsecure_sum,
            capacity_sum: r.capacity_sum,
            degraded: r.degraded_search,
        }
    }
}

fn trial_gains(cfg: &SweepConfig, trial: usize) -> (Vec<f64>, Vec<f64>) {
    match &cfg.gains {
        GainSpec::Gaussian => {
            gaussian_gains_from(cfg.users, &mut trial_rng(cfg.seed, trial as u64))
        }
        GainSpec::Fixed { h, g } => (h.clone(), g.clone()),
    }
}

/// Per-trial and per-point mean rates over the SNR grid. Gains are drawn
/// once per trial and held across the grid.
pub fn run_snr_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.validate()?;
    let opts = SearchOptions::default();
    let gains: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.trials).map(|t| trial_gains(cfg, t)).collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let mut trials: Vec<(usize, SweepRow)> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let (h, g) = &gains[t];
            let inst = make_instance(h, g, db_to_linear(grid[i]), Mode::Secrecy)?;
            Ok((
                i,
                SweepRow::from_report(grid[i], t, &analyze(&inst, &opts)?),
            ))
        })
        .collect::<Result<_>>()?;
    trials.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.trial.cmp(&b.1.trial)));
    let mut rows = Vec::with_capacity(trials.len() + grid.len());
    for (i, chunk) in trials
        .chunk_by(|a, b| a.0 == b.0)
        .map(|c| (c[0].0, c))
        .collect::<Vec<_>>()
    {
        let n = chunk.len() as f64;
        let mean = |f: fn(&SweepRow) -> f64| chunk.iter().map(|(_, r)| f(r)).sum::<f64>() / n;
        let summary = SweepRow {
            kind: "mean",
            snr_db: grid[i],
            trial: None,
            r_sum_secure: mean(|r| r.r_sum_secure),
            r_baseline: mean(|r| r.r_baseline),
            r_nonsecure_cf: mean(|r| r.r_nonsecure_cf),
            capacity_sum: mean(|r| r.capacity_sum),
            degraded: chunk.iter().any(|(_, r)| r.degraded),
        };
        rows.extend(chunk.iter().map(|(_, r)| r.clone()));
        rows.push(summary);
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        SWEEP_SCHEMA,
        "snr_db",
        "trial",
        "r_sum_secure",
        "r_baseline",
        "r_nonsecure_cf",
        "capacity_sum",
        "degraded",
    ])?;
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            fmt(r.snr_db),
            r.trial.map(|t| t.to_string()).unwrap_or_default(),
            fmt(r.r_sum_secure),
            fmt(r.r_baseline),
            fmt(r.r_nonsecure_cf),
            fmt(r.capacity_sum),
            r.degraded.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two users with `h = [1, sqrt 2]` and `g = sqrt 3 (cos theta, sin theta)`,
/// so that `|h| = |g|`.
pub fn theta_instance(theta: f64, power: f64) -> Result<ChannelInstance> {
    let r = 3f64.sqrt();
    make_instance(
        &[1.0, 2f64.sqrt()],
        &[r * theta.cos(), r * theta.sin()],
        power,
        Mode::Secrecy,
    )
}

/// Cell midpoints `2 pi (i + 1/2) / points`, which avoid the angles where a
/// gain vanishes.
pub fn theta_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| std::f64::consts::TAU * (i as f64 + 0.5) / points as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub r_sum_secure: f64,
    pub r_baseline: f64,
    pub r_nonsecure_cf: f64,
    pub capacity_sum: f64,
    pub degraded: bool,
}

pub fn run_theta_sweep(snr_db: f64, points: usize) -> Result<Vec<ThetaRow>> {
    if points == 0 {
        return Err(Error::DegenerateGrid("no theta points".into()));
    }
    let power = db_to_linear(snr_db);
    let opts = SearchOptions::default();
    theta_grid(points)
        .par_iter()
        .map(|&theta| {
            let r = analyze(&theta_instance(theta, power)?, &opts)?;
            Ok(ThetaRow {
                theta,
                r_sum_secure: r.r_sum_secure,
                r_baseline: r.r_baseline,
                r_nonsecure_cf: r.r_nonsecure_sum,
                capacity_sum: r.capacity_sum,
                degraded: r.degraded_search,
            })
        })
        .collect()
}

pub fn write_theta_csv(path: &Path, rows: &[ThetaRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        THETA_SCHEMA,
        "theta",
        "r_sum_secure",
        "r_baseline",
        "r_nonsecure_cf",
        "capacity_sum",
        "degraded",
    ])?;
    for r in rows {
        w.write_record([
            "point".to_string(),
            fmt(r.theta),
            fmt(r.r_sum_secure),
            fmt(r.r_baseline),
            fmt(r.r_nonsecure_cf),
            fmt(r.capacity_sum),
            r.degraded.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Angle whose gains satisfy `g_l = x_l h_l` for rationals `x_l`, taken
/// from the rational parametrization of `x_1^2 + 2 x_2^2 = 3` through
/// `(1, 1)` with slope `t = p / q`.
pub fn rational_theta(p: i64, q: i64) -> Result<(f64, [(i64, i64); 2])> {
    if q == 0 {
        return Err(Error::InvalidParameter("zero denominator".into()));
    }
    // s = -(2 + 4t) / (1 + 2t^2), x = 1 + s, y = 1 + t s
    let den = q * q + 2 * p * p;
    let s_num = -(2 * q * q + 4 * p * q);
    let x = (den + s_num, den);
    let y = (den * q + p * s_num, den * q);
    let reduce = |(a, b): (i64, i64)| {
        let g = gcd(a.abs(), b.abs()).max(1);
        let sign = if b < 0 { -1 } else { 1 };
        (sign * a / g, sign * b / g)
    };
    let (x, y) = (reduce(x), reduce(y));
    if x.0 == 0 || y.0 == 0 {
        return Err(Error::ZeroGain(if x.0 == 0 { 0 } else { 1 }));
    }
    let g1 = x.0 as f64 / x.1 as f64;
    let g2 = 2f64.sqrt() * y.0 as f64 / y.1 as f64;
    Ok((g2.atan2(g1).rem_euclid(std::f64::consts::TAU), [x, y]))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotCheck {
    pub theta: f64,
    /// `g_l / h_l` as reduced fractions.
    pub ratios: [(i64, i64); 2],
    pub r_sum_secure: f64,
    /// Mean secure sum rate at `theta +/- offset`.
    pub neighbor_mean: f64,
}

/// Secure sum rate at constructed rational-ratio angles against nearby
/// generic angles.
pub fn rational_spot_check(
    snr_db: f64,
    slopes: &[(i64, i64)],
    offset: f64,
) -> Result<Vec<SpotCheck>> {
    let power = db_to_linear(snr_db);
    let opts = SearchOptions::default();
    let rate = |theta: f64| -> Result<f64> {
        Ok(analyze(&theta_instance(theta, power)?, &opts)?.r_sum_secure)
    };
    slopes
        .iter()
        .map(|&(p, q)| {
            let (theta, ratios) = rational_theta(p, q)?;
            Ok(SpotCheck {
                theta,
                ratios,
                r_sum_secure: rate(theta)?,
                neighbor_mean: 0.5 * (rate(theta - offset)? + rate(theta + offset)?),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Config {
    pub dims: Vec<usize>,
    #[serde(rename = "K")]
    pub users: usize,
    pub gains: Option<Vec<f64>>,
    pub snr_db: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Lattice whose quantizer is examined.
    pub lattice: usize,
}

impl Lemma1Config {
    pub fn new(dims: Vec<usize>, users: usize, trials: u64) -> Self {
        Self {
            dims,
            users,
            gains: None,
            snr_db: 0.0,
            epsilon: 0.1,
            trials,
            seed: 1,
            lattice: 0,
        }
    }
}

pub fn run_lemma1(cfg: &Lemma1Config) -> Result<Vec<Lemma1Row>> {
    let gains = cfg.gains.clone().unwrap_or_else(|| vec![1.0; cfg.users]);
    if gains.len() != cfg.users {
        return Err(Error::DimensionMismatch {
            expected: cfg.users,
            got: gains.len(),
        });
    }
    let power = db_to_linear(cfg.snr_db);
    cfg.dims
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let exp = QuantizerExperiment::new(n, &gains, power, cfg.trials, cfg.epsilon)?;
            lemma1_row(&exp, cfg.lattice, cfg.seed.wrapping_add(i as u64))
        })
        .collect()
}

pub fn write_lemma1_csv(path: &Path, rows: &[Lemma1Row]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        LEMMA1_SCHEMA,
        "n",
        "K",
        "epsilon",
        "entropy_bits_per_dim",
        "ratio_bound_bits",
        "clean_bound_bits",
        "tail_prob",
        "mc_entropy_bits",
        "mc_std_err",
    ])?;
    for r in rows {
        w.write_record([
            "row".to_string(),
            r.n.to_string(),
            r.users.to_string(),
            fmt(r.epsilon),
            fmt(r.entropy_bits_per_dim),
            fmt(r.ratio_bound_bits),
            fmt(r.clean_bound_bits),
            fmt(r.tail_prob),
            fmt(r.mc_entropy_bits),
            fmt(r.mc_std_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecDemoConfig {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub snr_db: f64,
    pub block_len: usize,
    pub blocks: usize,
    pub grid_ratio: u64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for CodecDemoConfig {
    fn default() -> Self {
        Self {
            h: vec![1.0, 1.5],
            g: vec![1.0, 2.0],
            snr_db: 20.0,
            block_len: 1,
            blocks: 8,
            grid_ratio: 4,
            trials: 1000,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerStats {
    pub user: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// `mean <= P + 3 std_dev / sqrt(trials)`.
    pub within_limit: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodecReport {
    pub chain: LatticeChain,
    pub secure_rates: Vec<f64>,
    pub message_bits: Vec<u32>,
    pub rate_loss: Vec<f64>,
    /// Largest integer misalignment over all trials, in dither units.
    pub alignment_residual: i64,
    pub alignment_float_residual: f64,
    pub power: Vec<PowerStats>,
    pub dither_p_values: Vec<f64>,
    pub crypto_lemma: CryptoLemmaReport,
}

/// Encodes random messages for every user and reports alignment, power and
/// uniformity statistics.
pub fn run_codec_demo(cfg: &CodecDemoConfig) -> Result<CodecReport> {
    if cfg.trials < 2 {
        return Err(Error::InvalidParameter(
            "codec demo needs at least two trials".into(),
        ));
    }
    let power = db_to_linear(cfg.snr_db);
    let inst = make_instance(&cfg.h, &cfg.g, power, Mode::Secrecy)?;
    let report = analyze(&inst, &SearchOptions::default())?;
    let chain = build_chain(&inst, cfg.block_len, cfg.blocks, cfg.grid_ratio)?;
    let k = inst.users();
    let binnings: Vec<Binning> = (0..k)
        .map(|u| {
            Binning::new(
                &chain,
                u,
                report.allocation[u],
                cfg.seed.wrapping_add(u as u64),
            )
        })
        .collect::<Result<_>>()?;

    let outcomes: Vec<(i64, f64, Vec<f64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            let cws = binnings
                .iter()
                .map(|b| {
                    let bin = rng.random_range(0..b.bins);
                    encode(&chain, b, bin, rng.random())
                })
                .collect::<Result<Vec<_>>>()?;
            let obs = eavesdropper_observation(&chain, &cws, Some(rng.random()))?;
            Ok((
                obs.grid_residual,
                obs.float_residual,
                cws.iter().map(|c| c.power()).collect(),
            ))
        })
        .collect::<Result<_>>()?;

    let n = cfg.trials as f64;
    let power_stats = (0..k)
        .map(|u| {
            let vals: Vec<f64> = outcomes.iter().map(|o| o.2[u]).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            PowerStats {
                user: u,
                mean,
                std_dev: var.sqrt(),
                within_limit: mean <= power + 3.0 * (var / n).sqrt(),
            }
        })
        .collect();
    let dither_p_values = (0..k)
        .map(|u| {
            dither_uniformity(
                &chain,
                u,
                0,
                100_000,
                16,
                cfg.seed.wrapping_add(100 + u as u64),
            )
        })
        .collect();
    Ok(CodecReport {
        secure_rates: report.allocation.clone(),
        message_bits: binnings.iter().map(|b| b.message_bits).collect(),
        rate_loss: binnings.iter().map(|b| b.rate_loss).collect(),
        alignment_residual: outcomes.iter().map(|o| o.0).max().unwrap_or(0),
        alignment_float_residual: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        power: power_stats,
        dither_p_values,
        crypto_lemma: crypto_lemma_check(&chain, 100_000, cfg.seed)?,
        chain,
    })
}
