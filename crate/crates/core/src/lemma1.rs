//! Entropy of the lattice-quantized sum of independent cell-uniform vectors,
//! for product lattices `beta_l Z^n`.
//!
//! Coordinates are i.i.d. for product lattices, so the per-dimension entropy
//! is a one-dimensional quantity computed exactly from the CDF of a sum of
//! uniforms. Monte Carlo estimates pool coordinates.

use std::collections::BTreeMap;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::stats::{entropy_bits, entropy_estimate, EntropyEstimate};

pub const MIN_MC_TRIALS: u64 = 10_000;
const CHUNK: u64 = 4096;
const MAX_COORDINATES: u64 = 1 << 32;

#[derive(Clone, Debug, Serialize)]
pub struct QuantizerExperiment {
    n: usize,
    gains: Vec<f64>,
    power: f64,
    trials: u64,
    epsilon: f64,
    betas: Vec<f64>,
}

impl QuantizerExperiment {
    /// Lattices are scaled so that `beta_l^2 / 12 = g_l^2 P`.
    pub fn new(n: usize, gains: &[f64], power: f64, trials: u64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if gains.is_empty() {
            return Err(Error::NoUsers);
        }
        if gains.iter().any(|g| !g.is_finite()) || !power.is_finite() || !epsilon.is_finite() {
            return Err(Error::NonFinite("experiment parameters"));
        }
        if let Some(i) = gains.iter().position(|&g| g == 0.0) {
            return Err(Error::ZeroGain(i));
        }
        if power <= 0.0 {
            return Err(Error::NonPositivePower(power));
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if (n as u64)
            .saturating_mul(gains.len() as u64)
            .saturating_mul(trials)
            > MAX_COORDINATES
        {
            return Err(Error::InvalidParameter(
                "n * K * trials exceeds the memory budget".into(),
            ));
        }
        let betas = gains
            .iter()
            .map(|g| g.abs() * (12.0 * power).sqrt())
            .collect();
        Ok(Self {
            n,
            gains: gains.to_vec(),
            power,
            trials,
            epsilon,
            betas,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn with_trials(&self, trials: u64) -> Result<Self> {
        Self::new(self.n, &self.gains, self.power, trials, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, &self.gains, self.power, self.trials, epsilon)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.users() {
            return Err(Error::DimensionMismatch {
                expected: self.users(),
                got: j,
            });
        }
        Ok(())
    }

    fn check_trials(&self) -> Result<()> {
        if self.trials < MIN_MC_TRIALS {
            return Err(Error::InvalidParameter(format!(
                "Monte Carlo needs at least {MIN_MC_TRIALS} trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }

    pub fn covering_radius(&self, l: usize) -> f64 {
        (self.n as f64).sqrt() / 2.0 * self.betas[l]
    }

    pub fn effective_radius(&self, l: usize) -> f64 {
        self.betas[l] * (-ln_unit_ball_volume(self.n) / self.n as f64).exp()
    }

    /// `sigma_zeq^2 = sum_l (r_cov,l / r_eff,l)^2 g_l^2 P`.
    pub fn sigma_zeq_sq(&self) -> f64 {
        let rho = radius_ratio_sq(self.n);
        self.gains.iter().map(|g| rho * g * g * self.power).sum()
    }
}

/// `ln V_n` for the unit ball in `R^n`.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    let n = n as f64;
    0.5 * n * std::f64::consts::PI.ln() - ln_gamma(0.5 * n + 1.0)
}

/// `(r_cov / r_eff)^2` for the cube lattice `Z^n`; independent of scale.
pub fn radius_ratio_sq(n: usize) -> f64 {
    let nf = n as f64;
    nf / 4.0 * (2.0 * ln_unit_ball_volume(n) / nf).exp()
}

/// Index of the nearest multiple of `beta`, ties to even.
pub fn quantize_index(x: f64, beta: f64) -> i64 {
    (x / beta).round_ties_even() as i64
}

fn stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn cells(betas: &[f64]) -> Vec<Uniform<f64>> {
    betas
        .iter()
        .map(|&b| Uniform::new(-0.5 * b, 0.5 * b).expect("positive width"))
        .collect()
}

fn draw_sum<R: Rng>(cells: &[Uniform<f64>], rng: &mut R) -> f64 {
    cells.iter().map(|c| c.sample(rng)).sum()
}

/// One draw of `u_j = Q_{Lambda_j}(sum_l s_l)`, `s_l` uniform over the cube cell.
pub fn quantize_sum(exp: &QuantizerExperiment, j: usize, seed: u64) -> Result<Vec<f64>> {
    exp.check_index(j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bj = exp.betas[j];
    let cells = cells(&exp.betas);
    Ok((0..exp.n)
        .map(|_| quantize_index(draw_sum(&cells, &mut rng), bj) as f64 * bj)
        .collect())
}

/// CDF of `sum_l s_l` with `s_l ~ U[-w_l/2, w_l/2)`, by inclusion-exclusion.
pub fn uniform_sum_cdf(widths: &[f64], x: f64) -> f64 {
    let k = widths.len();
    let shift: f64 = widths.iter().sum::<f64>() / 2.0;
    let y = x + shift;
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 2.0 * shift {
        return 1.0;
    }
    let mut acc = 0.0;
    for mask in 0u32..(1 << k) {
        let offset: f64 = (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| widths[i])
            .sum();
        let t = y - offset;
        if t > 0.0 {
            let sign = if mask.count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            acc += sign * t.powi(k as i32);
        }
    }
    let denom: f64 = widths.iter().product::<f64>() * (1..=k).map(|i| i as f64).product::<f64>();
    (acc / denom).clamp(0.0, 1.0)
}

/// Exact pmf of the quantizer index of one coordinate of `u_j`.
pub fn exact_pmf(exp: &QuantizerExperiment, j: usize) -> Result<Vec<(i64, f64)>> {
    exp.check_index(j)?;
    let bj = exp.betas[j];
    let half_span: f64 = exp.betas.iter().sum::<f64>() / 2.0;
    let top = (half_span / bj).ceil() as i64 + 1;
    Ok((-top..=top)
        .map(|m| {
            let lo = (m as f64 - 0.5) * bj;
            let hi = (m as f64 + 0.5) * bj;
            (
                m,
                uniform_sum_cdf(&exp.betas, hi) - uniform_sum_cdf(&exp.betas, lo),
            )
        })
        .filter(|&(_, p)| p > 0.0)
        .collect())
}

/// `(1/n) H(u_j)` in bits, exact.
pub fn entropy_per_dim(exp: &QuantizerExperiment, j: usize) -> Result<f64> {
    let pmf: Vec<f64> = exact_pmf(exp, j)?.into_iter().map(|(_, p)| p).collect();
    Ok(entropy_bits(&pmf))
}

/// Per-coordinate quantizer index counts over `trials` vectors.
pub fn sample_counts(exp: &QuantizerExperiment, j: usize, seed: u64) -> Result<BTreeMap<i64, u64>> {
    exp.check_index(j)?;
    let coords = exp.trials * exp.n as u64;
    let chunks = coords.div_ceil(CHUNK);
    let bj = exp.betas[j];
    let cells = cells(&exp.betas);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let len = CHUNK.min(coords - c * CHUNK);
            let mut local = BTreeMap::new();
            for _ in 0..len {
                *local
                    .entry(quantize_index(draw_sum(&cells, &mut rng), bj))
                    .or_insert(0u64) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(counts)
}

/// Monte Carlo per-dimension entropy, pooled over coordinates.
pub fn entropy_per_dim_mc(
    exp: &QuantizerExperiment,
    j: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    exp.check_trials()?;
    let counts: Vec<u64> = sample_counts(exp, j, seed)?.into_values().collect();
    Ok(entropy_estimate(&counts))
}

/// `1/2 log2((sum_l rho_l g_l^2 + eps) / (g_j^2 / rho_j))` with
/// `rho = (r_cov / r_eff)^2` for the cube lattices.
pub fn ratio_bound(exp: &QuantizerExperiment, j: usize) -> Result<f64> {
    exp.check_index(j)?;
    let rho = radius_ratio_sq(exp.n);
    Ok(bound_with_ratio(exp, j, rho))
}

/// The same bound with every radius ratio set to one.
pub fn clean_bound(exp: &QuantizerExperiment, j: usize) -> Result<f64> {
    exp.check_index(j)?;
    Ok(bound_with_ratio(exp, j, 1.0))
}

fn bound_with_ratio(exp: &QuantizerExperiment, j: usize, rho: f64) -> f64 {
    let num: f64 = exp.gains.iter().map(|g| rho * g * g).sum::<f64>() + exp.epsilon;
    let den = exp.gains[j] * exp.gains[j] / rho;
    0.5 * (num / den).log2()
}

/// Second moment per dimension of the ball matched to the covering radius,
/// scaled by `(r_eff / r_cov)^2`. Must not exceed `g_l^2 P`.
pub fn ball_moment(exp: &QuantizerExperiment, l: usize) -> f64 {
    let r_cov = exp.covering_radius(l);
    let r_eff = exp.effective_radius(l);
    let ball = r_cov * r_cov / (exp.n as f64 + 2.0);
    (r_eff / r_cov).powi(2) * ball
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub std_err: f64,
    pub radius: f64,
    pub samples: u64,
}

/// `Pr(||sum_l s_l|| > sqrt(n sigma_zeq^2 + n eps))`, Monte Carlo.
pub fn tail_probability(exp: &QuantizerExperiment, seed: u64) -> Result<TailEstimate> {
    exp.check_trials()?;
    let n = exp.n as f64;
    let radius_sq = n * exp.sigma_zeq_sq() + n * exp.epsilon;
    let chunks = exp.trials.div_ceil(CHUNK);
    let cells = cells(&exp.betas);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let len = CHUNK.min(exp.trials - c * CHUNK);
            (0..len)
                .filter(|_| {
                    let norm_sq: f64 = (0..exp.n).map(|_| draw_sum(&cells, &mut rng).powi(2)).sum();
                    norm_sq > radius_sq
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / exp.trials as f64;
    Ok(TailEstimate {
        probability: p,
        std_err: (p * (1.0 - p) / exp.trials as f64).sqrt(),
        radius: radius_sq.sqrt(),
        samples: exp.trials,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Row {
    pub n: usize,
    pub users: usize,
    pub epsilon: f64,
    pub entropy_bits_per_dim: f64,
    pub ratio_bound_bits: f64,
    pub clean_bound_bits: f64,
    pub tail_prob: f64,
    pub mc_entropy_bits: f64,
    pub mc_std_err: f64,
}

/// One output row for lattice `j`, Monte Carlo columns included.
pub fn lemma1_row(exp: &QuantizerExperiment, j: usize, seed: u64) -> Result<Lemma1Row> {
    let mc = entropy_per_dim_mc(exp, j, seed)?;
    let tail = tail_probability(exp, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(Lemma1Row {
        n: exp.n,
        users: exp.users(),
        epsilon: exp.epsilon,
        entropy_bits_per_dim: entropy_per_dim(exp, j)?,
        ratio_bound_bits: ratio_bound(exp, j)?,
        clean_bound_bits: clean_bound(exp, j)?,
        tail_prob: tail.probability,
        mc_entropy_bits: mc.miller_madow,
        mc_std_err: mc.std_err,
    })
}
