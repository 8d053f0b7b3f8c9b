//! Desk-scale wiretap encoder on scalar nested lattices.
//!
//! Every coordinate uses the fine lattice `gamma Z` and a per-user coarse
//! lattice `beta_l Z` with `beta_l = r_l gamma`. Values are carried as
//! integers in units of `delta = gamma / DITHER_STEPS`, so modulo
//! reduction and the alignment at the eavesdropper are exact.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cfrac;
use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::stats::{chi_square_independence, chi_square_uniform};

/// Dither resolution: quanta per fine-lattice step.
pub const DITHER_STEPS: i64 = 1 << 16;
pub const RATIO_TOLERANCE: f64 = 0.01;
pub const MAX_DENOMINATOR: u64 = 10_000;
const MAX_CODEBOOK_BITS: f64 = 120.0;
const MAX_EXACT_TUPLES: u64 = 10_000_000;

/// Reduces `x` into `[-m/2, m/2)` modulo `m` (`m > 0`).
pub fn mod_centered(x: i64, m: i64) -> i64 {
    (x + m / 2).rem_euclid(m) - m / 2
}

/// Real-valued reduction modulo `beta Z` into `[-beta/2, beta/2)`.
pub fn mod_lattice(x: f64, beta: f64) -> f64 {
    x - beta * (x / beta + 0.5).floor()
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeChain {
    pub gains: Vec<f64>,
    pub power: f64,
    /// Fine lattice step.
    pub gamma: f64,
    /// `beta_l / gamma` per user.
    pub ratios: Vec<u64>,
    pub betas: Vec<f64>,
    /// Users from the densest coarse lattice to the coarsest (ascending `|g|`).
    pub nesting_order: Vec<usize>,
    /// Block length `n`.
    pub block_len: usize,
    /// Number of outer blocks `B`.
    pub blocks: usize,
    /// Relative error of each realized ratio `beta_l / beta_first` against
    /// `|g_l| / |g_first|`.
    pub ratio_error: Vec<f64>,
    /// Realized second moment over the target, `(beta_l^2/12) / (g_l^2 P)`.
    pub power_fraction: Vec<f64>,
    pub within_tolerance: bool,
}

impl LatticeChain {
    pub fn users(&self) -> usize {
        self.gains.len()
    }

    /// `N = B n`.
    pub fn total_len(&self) -> usize {
        self.block_len * self.blocks
    }

    pub fn delta(&self) -> f64 {
        self.gamma / DITHER_STEPS as f64
    }

    /// Coarse lattice of `user` in dither units.
    pub fn coarse_units(&self, user: usize) -> i64 {
        self.ratios[user] as i64 * DITHER_STEPS
    }

    /// Whether `Lambda_K ⊆ ... ⊆ Lambda_1` holds (each ratio divides the next
    /// in nesting order). The fine lattice always contains every coarse one.
    pub fn is_nested(&self) -> bool {
        self.nesting_order
            .windows(2)
            .all(|w| self.ratios[w[1]].is_multiple_of(self.ratios[w[0]]))
    }

    /// Inner rate `log2 r_l` in bits per dimension.
    pub fn inner_rate(&self, user: usize) -> f64 {
        (self.ratios[user] as f64).log2()
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Common denominator `q` and numerators for `xs` (each `>= 1`).
fn rational_ratios(xs: &[f64]) -> (u64, Vec<u64>) {
    let max_err = |q: u64, ps: &[u64]| {
        xs.iter()
            .zip(ps)
            .map(|(x, &p)| ((p as f64 / q as f64) - x).abs() / x)
            .fold(0.0, f64::max)
    };
    let mut q = 1u64;
    let mut ok = true;
    for &x in xs {
        match cfrac::approximate(x, RATIO_TOLERANCE, MAX_DENOMINATOR) {
            Some((_, qi, err)) if err <= RATIO_TOLERANCE => {
                q = lcm(q, qi);
                if q > MAX_DENOMINATOR {
                    ok = false;
                    break;
                }
            }
            _ => {
                ok = false;
                break;
            }
        }
    }
    let round = |q: u64| -> Vec<u64> {
        xs.iter()
            .map(|x| ((x * q as f64).round() as u64).max(1))
            .collect()
    };
    if ok {
        let ps = round(q);
        if max_err(q, &ps) <= RATIO_TOLERANCE {
            return (q, ps);
        }
    }
    // simultaneous search over denominators
    let mut best = (f64::INFINITY, 1u64);
    for q in 1..=MAX_DENOMINATOR {
        let e = max_err(q, &round(q));
        if e <= RATIO_TOLERANCE {
            return (q, round(q));
        }
        if e < best.0 {
            best = (e, q);
        }
    }
    (best.1, round(best.1))
}

/// Scalar chain whose coarse scalings follow `|g_l|`, with integer
/// fine-to-coarse ratios `r_l = grid_ratio * m_l`.
pub fn build_chain(
    inst: &ChannelInstance,
    block_len: usize,
    blocks: usize,
    grid_ratio: u64,
) -> Result<LatticeChain> {
    if let Some(i) = inst.g().iter().position(|&g| g == 0.0) {
        return Err(Error::ZeroGain(i));
    }
    if grid_ratio < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid_ratio must be >= 2, got {grid_ratio}"
        )));
    }
    if block_len == 0 || blocks == 0 {
        return Err(Error::InvalidParameter(
            "block length and block count must be positive".into(),
        ));
    }
    let k = inst.users();
    let mag: Vec<f64> = inst.g().iter().map(|g| g.abs()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mag[a].total_cmp(&mag[b]).then(a.cmp(&b)));
    let first = order[0];
    let xs: Vec<f64> = mag.iter().map(|m| m / mag[first]).collect();
    let (q, numerators) = rational_ratios(&xs);
    let ratios: Vec<u64> = numerators.iter().map(|m| m * grid_ratio).collect();
    let target: Vec<f64> = mag
        .iter()
        .map(|m| (12.0 * inst.power()).sqrt() * m)
        .collect();
    let gamma = target
        .iter()
        .zip(&ratios)
        .map(|(t, &r)| t / r as f64)
        .fold(f64::INFINITY, f64::min);
    let betas: Vec<f64> = ratios.iter().map(|&r| r as f64 * gamma).collect();
    let ratio_error: Vec<f64> = xs
        .iter()
        .zip(&numerators)
        .map(|(x, &p)| ((p as f64 / q as f64) - x).abs() / x)
        .collect();
    let power_fraction: Vec<f64> = betas
        .iter()
        .zip(&target)
        .map(|(b, t)| (b / t).powi(2))
        .collect();
    let within_tolerance = ratio_error.iter().all(|&e| e <= RATIO_TOLERANCE);
    Ok(LatticeChain {
        gains: inst.g().to_vec(),
        power: inst.power(),
        gamma,
        ratios,
        betas,
        nesting_order: order,
        block_len,
        blocks,
        ratio_error,
        power_fraction,
        within_tolerance,
    })
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

fn inv_mod(a: u128, m: u128) -> Option<u128> {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u128)
}

/// Wiretap binning of one user's outer codebook. Codewords are indexed by
/// `c in [0, T)`, `T = r^N`; the bijection `c = a k + b mod T` scatters
/// `k = w S + j` so that bin `w` holds `S = T / M` codewords.
#[derive(Clone, Debug, Serialize)]
pub struct Binning {
    pub user: usize,
    pub radix: u64,
    pub digits: usize,
    pub codewords: u128,
    pub bins: u128,
    pub bin_size: u128,
    pub message_bits: u32,
    /// Requested rate minus realized `message_bits / N`.
    pub rate_loss: f64,
    mult: u128,
    mult_inv: u128,
    offset: u128,
}

impl Binning {
    /// Bins for `rate` bits per dimension, rounded down to a power of two
    /// that divides the codebook size.
    pub fn new(chain: &LatticeChain, user: usize, rate: f64, seed: u64) -> Result<Self> {
        let radix = chain.ratios[user];
        let digits = chain.total_len();
        let bits = digits as f64 * (radix as f64).log2();
        if bits > MAX_CODEBOOK_BITS {
            return Err(Error::InvalidParameter(format!(
                "outer codebook of {bits:.0} bits exceeds the desk-scale limit"
            )));
        }
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate must be >= 0, got {rate}"
            )));
        }
        let codewords = (radix as u128).pow(digits as u32);
        let two_adic = radix.trailing_zeros() * digits as u32;
        let wanted = (rate * digits as f64 + 1e-9).floor().max(0.0) as u32;
        let message_bits = wanted.min(two_adic);
        let bins = 1u128 << message_bits;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mult, mult_inv) = loop {
            let a = rng.random_range(1..codewords.max(2));
            if let Some(inv) = inv_mod(a, codewords) {
                break (a, inv);
            }
            if codewords == 1 {
                break (0, 0);
            }
        };
        let offset = if codewords > 1 {
            rng.random_range(0..codewords)
        } else {
            0
        };
        Ok(Self {
            user,
            radix,
            digits,
            codewords,
            bins,
            bin_size: codewords / bins,
            message_bits,
            rate_loss: rate - message_bits as f64 / digits as f64,
            mult,
            mult_inv,
            offset,
        })
    }

    pub fn codeword(&self, bin: u128, member: u128) -> u128 {
        let k = bin * self.bin_size + member;
        (mul_mod(self.mult, k, self.codewords) + self.offset) % self.codewords
    }

    pub fn bin_of(&self, codeword: u128) -> u128 {
        let shifted = (codeword + self.codewords - self.offset % self.codewords) % self.codewords;
        mul_mod(self.mult_inv, shifted, self.codewords) / self.bin_size
    }

    /// Base-`r` digits of a codeword index, least significant first.
    pub fn digits_of(&self, mut codeword: u128) -> Vec<u64> {
        (0..self.digits)
            .map(|_| {
                let d = (codeword % self.radix as u128) as u64;
                codeword /= self.radix as u128;
                d
            })
            .collect()
    }
}

/// One user's transmission. Integer fields are in dither units `delta`.
#[derive(Clone, Debug, Serialize)]
pub struct Codeword {
    pub user: usize,
    pub bin: u128,
    pub index: u128,
    /// Inner codeword coordinates `t` (fine-grid points in `[-beta/2, beta/2)`).
    pub t: Vec<i64>,
    pub dither: Vec<i64>,
    /// `[t + d] mod Lambda_l`, the pre-scaling signal.
    pub t_tilde: Vec<i64>,
    /// `x = t_tilde / g_l`, real.
    pub x: Vec<f64>,
}

impl Codeword {
    pub fn power(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>() / self.x.len() as f64
    }
}

/// Fine-grid point for digit `d` of a radix-`r` alphabet, in dither units.
pub fn digit_to_units(d: u64, radix: u64) -> i64 {
    (d as i64 - (radix / 2) as i64) * DITHER_STEPS
}

/// Dithers, reduces and scales one block.
pub fn transmit_block(
    chain: &LatticeChain,
    user: usize,
    t: &[i64],
    dither: &[i64],
) -> (Vec<i64>, Vec<f64>) {
    let m = chain.coarse_units(user);
    let delta = chain.delta();
    let g = chain.gains[user];
    let t_tilde: Vec<i64> = t
        .iter()
        .zip(dither)
        .map(|(a, b)| mod_centered(a + b, m))
        .collect();
    let x = t_tilde.iter().map(|&v| v as f64 * delta / g).collect();
    (t_tilde, x)
}

pub fn sample_dither<R: Rng>(
    chain: &LatticeChain,
    user: usize,
    len: usize,
    rng: &mut R,
) -> Vec<i64> {
    let half = chain.coarse_units(user) / 2;
    (0..len).map(|_| rng.random_range(-half..half)).collect()
}

/// Picks a uniform codeword from bin `bin`, dithers it and scales by `1/g`.
pub fn encode(chain: &LatticeChain, binning: &Binning, bin: u128, seed: u64) -> Result<Codeword> {
    if bin >= binning.bins {
        return Err(Error::EmptyBin {
            bin,
            bins: binning.bins,
        });
    }
    let user = binning.user;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let member = rng.random_range(0..binning.bin_size);
    let index = binning.codeword(bin, member);
    let t: Vec<i64> = binning
        .digits_of(index)
        .into_iter()
        .map(|d| digit_to_units(d, binning.radix))
        .collect();
    let dither = sample_dither(chain, user, t.len(), &mut rng);
    let n = chain.block_len;
    let mut t_tilde = Vec::with_capacity(t.len());
    let mut x = Vec::with_capacity(t.len());
    for (tb, db) in t.chunks(n).zip(dither.chunks(n)) {
        let (tt, xx) = transmit_block(chain, user, tb, db);
        t_tilde.extend(tt);
        x.extend(xx);
    }
    Ok(Codeword {
        user,
        bin,
        index,
        t,
        dither,
        t_tilde,
        x,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Observation {
    pub y: Vec<f64>,
    /// `sum_l t_tilde_l`, dither units.
    pub aligned: Vec<i64>,
    /// Max over coordinates of `|sum_l round(g_l x_l / delta) - sum_l t_tilde_l|`.
    pub grid_residual: i64,
    /// Max over coordinates of `|sum_l g_l x_l - sum_l t_tilde_l delta|`.
    pub float_residual: f64,
}

/// `y_E = sum_l g_l x_l + z_E`; `noise_seed = None` gives the noiseless sum.
pub fn eavesdropper_observation(
    chain: &LatticeChain,
    codewords: &[Codeword],
    noise_seed: Option<u64>,
) -> Result<Observation> {
    let k = chain.users();
    if codewords.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: codewords.len(),
        });
    }
    let len = chain.total_len();
    let delta = chain.delta();
    let mut y = vec![0.0; len];
    let mut aligned = vec![0i64; len];
    let mut requantized = vec![0i64; len];
    for cw in codewords {
        if cw.x.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: cw.x.len(),
            });
        }
        let g = chain.gains[cw.user];
        for i in 0..len {
            let v = g * cw.x[i];
            y[i] += v;
            aligned[i] += cw.t_tilde[i];
            requantized[i] += (v / delta).round() as i64;
        }
    }
    let grid_residual = requantized
        .iter()
        .zip(&aligned)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or(0);
    let float_residual = y
        .iter()
        .zip(&aligned)
        .map(|(v, &a)| (v - a as f64 * delta).abs())
        .fold(0.0, f64::max);
    if let Some(seed) = noise_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in y.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += z;
        }
    }
    Ok(Observation {
        y,
        aligned,
        grid_residual,
        float_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CryptoLemmaReport {
    /// `|L_1|`.
    pub alphabet: u64,
    /// Every column of the joint table of `([t_1 + s] mod Lambda_1, s)` is
    /// exactly uniform, with `s = sum_{l >= 2} t_l`. `None` when the tuple
    /// space was too large to enumerate.
    pub exact_uniform: Option<bool>,
    pub trials: u64,
    pub uniformity_p: f64,
    pub independence_p: f64,
}

impl CryptoLemmaReport {
    pub fn passes(&self, significance: f64) -> bool {
        self.exact_uniform != Some(false)
            && self.uniformity_p > significance
            && self.independence_p > significance
    }
}

/// Checks that the modulo sum seen through the densest coarse lattice is
/// uniform over its inner codebook and independent of the other users' sum.
/// Works in fine-grid units.
pub fn crypto_lemma_check(
    chain: &LatticeChain,
    trials: u64,
    seed: u64,
) -> Result<CryptoLemmaReport> {
    if chain.users() < 2 {
        return Err(Error::InvalidParameter("needs at least two users".into()));
    }
    let first = chain.nesting_order[0];
    let r1 = chain.ratios[first];
    let others: Vec<usize> = chain.nesting_order[1..].to_vec();
    let point = |d: u64, r: u64| d as i64 - (r / 2) as i64;

    // exact enumeration
    let tuples = others
        .iter()
        .try_fold(r1, |acc, &u| acc.checked_mul(chain.ratios[u]))
        .unwrap_or(u64::MAX);
    let exact_uniform = if tuples <= MAX_EXACT_TUPLES {
        let mut table: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
        let other_tuples = tuples / r1;
        for idx in 0..other_tuples {
            let mut rest = idx;
            let mut s = 0i64;
            for &u in &others {
                let r = chain.ratios[u];
                s += point(rest % r, r);
                rest /= r;
            }
            let row = table.entry(s).or_insert_with(|| vec![0; r1 as usize]);
            for d1 in 0..r1 {
                let m = mod_centered(point(d1, r1) + s, r1 as i64);
                row[(m + (r1 / 2) as i64) as usize] += 1;
            }
        }
        Some(table.values().all(|row| row.iter().all(|&c| c == row[0])))
    } else {
        None
    };

    // Monte Carlo
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut joint: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
    let mut marginal = vec![0u64; r1 as usize];
    for _ in 0..trials {
        let t1 = point(rng.random_range(0..r1), r1);
        let s: i64 = others
            .iter()
            .map(|&u| {
                let r = chain.ratios[u];
                point(rng.random_range(0..r), r)
            })
            .sum();
        let m = (mod_centered(t1 + s, r1 as i64) + (r1 / 2) as i64) as usize;
        marginal[m] += 1;
        joint.entry(s).or_insert_with(|| vec![0; r1 as usize])[m] += 1;
    }
    // cells = |L_1| x distinct sums; require about five expected hits each
    let cells = r1 * joint.len().max(1) as u64;
    if trials < 5 * cells {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials are too few for {cells} cells"
        )));
    }
    let (_, uniformity_p) = chi_square_uniform(&marginal);
    // rows = mod-sum value, columns = s
    let cols: Vec<&Vec<u64>> = joint.values().collect();
    let table: Vec<Vec<u64>> = (0..r1 as usize)
        .map(|m| cols.iter().map(|c| c[m]).collect())
        .collect();
    let (_, independence_p) = chi_square_independence(&table);
    Ok(CryptoLemmaReport {
        alphabet: r1,
        exact_uniform,
        trials,
        uniformity_p,
        independence_p,
    })
}

/// Chi-square p-value for uniformity of `[t + d] mod Lambda_l` over `cells`
/// equal sub-intervals of the Voronoi cell, with `t` held fixed.
pub fn dither_uniformity(
    chain: &LatticeChain,
    user: usize,
    t: i64,
    samples: u64,
    cells: usize,
    seed: u64,
) -> f64 {
    let m = chain.coarse_units(user);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; cells];
    for _ in 0..samples {
        let d = sample_dither(chain, user, 1, &mut rng)[0];
        let v = mod_centered(t + d, m) + m / 2;
        let cell = ((v as i128 * cells as i128) / m as i128) as usize;
        counts[cell.min(cells - 1)] += 1;
    }
    chi_square_uniform(&counts).1
}
