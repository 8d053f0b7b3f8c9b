//! Computation rates, successive-cancellation orders and the secure sum
//! rate of the alignment scheme, plus the random-coding baseline and the
//! high-SNR slope fits used to check the DoF behaviour.
//!
//! All logarithms are base 2; rates are in bits per channel use.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{secrecy_power_policy, ChannelInstance, PowerPolicy};
use crate::error::{Error, Result};
use crate::lattice::{integer_det, shortest_independent_vectors, CoefficientMatrix, SearchOptions};
use crate::matrix::{build_f, EffectiveMatrix};

/// Largest `K` for which all admissible orders are listed explicitly.
pub const MAX_LISTED_USERS: usize = 9;

/// A successive-cancellation order. `to_equation[l]` is the equation that
/// serves user `l`; `to_user[k]` is the user recovered at step `k`.
/// Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    to_equation: Vec<usize>,
    to_user: Vec<usize>,
}

impl Permutation {
    pub fn from_user_order(to_user: Vec<usize>) -> Result<Self> {
        let k = to_user.len();
        let mut to_equation = vec![usize::MAX; k];
        for (eq, &u) in to_user.iter().enumerate() {
            if u >= k || to_equation[u] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "{to_user:?} is not a permutation"
                )));
            }
            to_equation[u] = eq;
        }
        Ok(Self {
            to_equation,
            to_user,
        })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            to_equation: (0..k).collect(),
            to_user: (0..k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.to_user.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_user.is_empty()
    }

    /// `pi(user)`.
    pub fn equation_of(&self, user: usize) -> usize {
        self.to_equation[user]
    }

    /// `pi^{-1}(step)`.
    pub fn user_at(&self, step: usize) -> usize {
        self.to_user[step]
    }

    pub fn user_order(&self) -> &[usize] {
        &self.to_user
    }
}

/// `max(1/2 log2(snr / |F a|^2), 0)`.
pub fn rate_comb(em: &EffectiveMatrix, a: &[i64], snr: f64) -> Result<f64> {
    if a.len() != em.dim() {
        return Err(Error::DimensionMismatch {
            expected: em.dim(),
            got: a.len(),
        });
    }
    if a.iter().all(|&x| x == 0) {
        return Err(Error::ZeroVector);
    }
    if !(snr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "snr must be positive, got {snr}"
        )));
    }
    Ok(clamped_rate(snr, em.norm_sq(a)))
}

fn clamped_rate(snr: f64, norm: f64) -> f64 {
    let r = 0.5 * (snr / norm).log2();
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Leading-minor test: solving the users in `to_user` order, with the
/// equations taken in row order, never needs a row swap.
fn prefix_ok(rows: &[Vec<i64>], to_user: &[usize]) -> bool {
    let k = to_user.len();
    let sub: Vec<Vec<i64>> = rows[..k]
        .iter()
        .map(|r| to_user.iter().map(|&c| r[c]).collect())
        .collect();
    integer_det(&sub) != 0
}

fn check_full_rank(rows: &[Vec<i64>]) -> Result<usize> {
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: rows.iter().map(Vec::len).find(|&l| l != k).unwrap_or(k),
        });
    }
    if k == 0 || integer_det(rows) == 0 {
        return Err(Error::RankDeficient);
    }
    Ok(k)
}

/// All orders in which Gaussian elimination without row switching can
/// recover one new user per decoded equation.
pub fn admissible_orders(rows: &[Vec<i64>]) -> Result<Vec<Permutation>> {
    let k = check_full_rank(rows)?;
    if k > MAX_LISTED_USERS {
        return Err(Error::InvalidParameter(format!(
            "listing orders is limited to K <= {MAX_LISTED_USERS}"
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn walk(
        rows: &[Vec<i64>],
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Permutation>,
    ) {
        let k = rows.len();
        if prefix.len() == k {
            out.push(Permutation::from_user_order(prefix.clone()).expect("valid by construction"));
            return;
        }
        for u in 0..k {
            if used[u] {
                continue;
            }
            prefix.push(u);
            if prefix_ok(rows, prefix) {
                used[u] = true;
                walk(rows, prefix, used, out);
                used[u] = false;
            }
            prefix.pop();
        }
    }
    walk(rows, &mut prefix, &mut used, &mut out);
    Ok(out)
}

/// Best admissible order for an additive objective
/// `base(pi^{-1}(0)) + sum_k gain[k][pi^{-1}(k)]` (branch and bound; the
/// first order found wins ties).
fn best_order(rows: &[Vec<i64>], gain: &[Vec<f64>], base: &[f64]) -> (f64, Vec<usize>) {
    let k = rows.len();
    struct Search<'a> {
        rows: &'a [Vec<i64>],
        gain: &'a [Vec<f64>],
        base: &'a [f64],
        prefix: Vec<usize>,
        used: Vec<bool>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn bound(&self, depth: usize) -> f64 {
            (depth..self.rows.len())
                .map(|eq| {
                    (0..self.rows.len())
                        .filter(|&u| !self.used[u])
                        .map(|u| self.gain[eq][u] + if eq == 0 { self.base[u] } else { 0.0 })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum()
        }

        fn walk(&mut self, value: f64) {
            let depth = self.prefix.len();
            let k = self.rows.len();
            if depth == k {
                if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                    self.best = Some((value, self.prefix.clone()));
                }
                return;
            }
            if let Some((b, _)) = &self.best {
                if value + self.bound(depth) <= *b {
                    return;
                }
            }
            for u in 0..k {
                if self.used[u] {
                    continue;
                }
                self.prefix.push(u);
                if prefix_ok(self.rows, &self.prefix) {
                    self.used[u] = true;
                    let step = self.gain[depth][u] + if depth == 0 { self.base[u] } else { 0.0 };
                    self.walk(value + step);
                    self.used[u] = false;
                }
                self.prefix.pop();
            }
        }
    }
    let mut s = Search {
        rows,
        gain,
        base,
        prefix: Vec::with_capacity(k),
        used: vec![false; k],
        best: None,
    };
    s.walk(0.0);
    s.best.expect("a full-rank matrix has an admissible order")
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    /// Per-equation computation rates under `best_pi`, in row order of the
    /// coefficient matrix.
    pub r_comb: Vec<f64>,
    pub best_pi: Permutation,
    pub r_sum_secure: f64,
    /// Per-user secure rates `R_l`.
    pub allocation: Vec<f64>,
    pub r_baseline: f64,
    /// Best sum of computation rates over admissible orders (no secrecy).
    pub r_nonsecure_sum: f64,
    pub capacity_sum: f64,
    /// `1/2 log2(sum g^2 / g_first^2)` for the first user of `best_pi`.
    pub penalty: f64,
    pub coefficients: Vec<Vec<i64>>,
    pub norms: Vec<f64>,
    pub degraded_search: bool,
}

fn is_secrecy_policy(inst: &ChannelInstance, policy: &PowerPolicy) -> bool {
    inst.g()
        .iter()
        .zip(policy.alphas())
        .all(|(g, a)| (g * g - a).abs() <= 1e-12 * a.abs().max(1e-300))
        && inst.users() == policy.alphas().len()
}

/// Secure sum rate maximized over admissible orders, clamped at zero.
pub fn secure_sum_rate(
    inst: &ChannelInstance,
    policy: &PowerPolicy,
    em: &EffectiveMatrix,
    coeffs: &CoefficientMatrix,
) -> Result<RateReport> {
    if !is_secrecy_policy(inst, policy) {
        return Err(Error::InvalidParameter(
            "secure sum rate needs the alpha_l = g_l^2 policy".into(),
        ));
    }
    let k = check_full_rank(&coeffs.rows)?;
    let snr = em.snr();
    // rate[eq][user]
    let rate: Vec<Vec<f64>> = coeffs
        .norms
        .iter()
        .map(|&n| snr.iter().map(|&s| clamped_rate(s, n)).collect())
        .collect();
    let g2: Vec<f64> = inst.g().iter().map(|g| g * g).collect();
    let g2_total: f64 = g2.iter().sum();
    let penalty: Vec<f64> = g2.iter().map(|&x| 0.5 * (g2_total / x).log2()).collect();

    // the first equation's rate is not counted in the secure objective
    let mut secure_gain = rate.clone();
    secure_gain[0].iter_mut().for_each(|x| *x = 0.0);
    let neg_penalty: Vec<f64> = penalty.iter().map(|p| -p).collect();
    let (secure_value, order) = best_order(&coeffs.rows, &secure_gain, &neg_penalty);
    let best_pi = Permutation::from_user_order(order)?;

    let (nonsecure, _) = best_order(&coeffs.rows, &rate, &vec![0.0; k]);

    let r_comb: Vec<f64> = (0..k).map(|eq| rate[eq][best_pi.user_at(eq)]).collect();
    let r_sum_secure = secure_value.max(0.0);
    let caps: Vec<f64> = (0..k).map(|u| r_comb[best_pi.equation_of(u)]).collect();
    let allocation = allocate_user_rates(r_sum_secure, &caps)?;

    Ok(RateReport {
        r_comb,
        r_sum_secure,
        allocation,
        r_baseline: baseline_random_coding(inst),
        r_nonsecure_sum: nonsecure,
        capacity_sum: inst.capacity_sum(),
        penalty: penalty[best_pi.user_at(0)],
        best_pi,
        coefficients: coeffs.rows.clone(),
        norms: coeffs.norms.clone(),
        degraded_search: coeffs.degraded,
    })
}

/// Full pipeline for one instance under the secrecy policy.
pub fn analyze(inst: &ChannelInstance, opts: &SearchOptions) -> Result<RateReport> {
    let policy = secrecy_power_policy(inst)?;
    let em = build_f(inst, &policy)?;
    let coeffs = shortest_independent_vectors(&em, opts)?;
    secure_sum_rate(inst, &policy, &em, &coeffs)
}

/// Splits a sum-rate budget over users, filling the largest caps first.
pub fn allocate_user_rates(budget: f64, caps: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = caps.iter().sum();
    if !(budget >= 0.0) || budget > total + 1e-9 * total.max(1.0) {
        return Err(Error::InfeasibleBudget {
            budget,
            caps: total,
        });
    }
    let mut idx: Vec<usize> = (0..caps.len()).collect();
    idx.sort_by(|&a, &b| caps[b].total_cmp(&caps[a]).then(a.cmp(&b)));
    let mut out = vec![0.0; caps.len()];
    let mut remaining = budget;
    for i in idx {
        if remaining <= 0.0 {
            break;
        }
        let r = caps[i].min(remaining);
        out[i] = r;
        remaining -= r;
    }
    Ok(out)
}

/// Secure sum rate of i.i.d. Gaussian random coding,
/// `max(1/2 log2((1 + |h|^2 P) / (1 + |g|^2 P)), 0)`.
pub fn baseline_random_coding(inst: &ChannelInstance) -> f64 {
    let p = inst.power();
    let r = 0.5 * ((1.0 + inst.h_norm_sq() * p) / (1.0 + inst.g_norm_sq() * p)).log2();
    // rounding noise when |h| = |g| analytically
    if r > 1e-12 {
        r
    } else {
        0.0
    }
}

/// `(sum_k R_comb,k, 1/2 log2(1 + |h|^2 P) - (K/2) log2 K)`.
///
/// The left side is taken without clamping, where it does not depend on
/// the order.
pub fn sum_comb_lower_bound(
    inst: &ChannelInstance,
    policy: &PowerPolicy,
    opts: &SearchOptions,
) -> Result<(f64, f64)> {
    let em = build_f(inst, policy)?;
    let coeffs = shortest_independent_vectors(&em, opts)?;
    let lhs = 0.5 * em.snr().iter().map(|s| s.log2()).sum::<f64>()
        - 0.5 * coeffs.norms.iter().map(|n| n.log2()).sum::<f64>();
    let k = inst.users() as f64;
    let rhs = inst.capacity_sum() - 0.5 * k * k.log2();
    Ok((lhs, rhs))
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateGrid("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateGrid("constant abscissa".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Mean of `metric` over the family at each grid point.
pub fn family_curve<M>(
    family: &[ChannelInstance],
    snr_grid_db: &[f64],
    opts: &SearchOptions,
    metric: M,
) -> Result<Vec<f64>>
where
    M: Fn(&RateReport) -> f64 + Sync,
{
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty instance family".into()));
    }
    snr_grid_db
        .iter()
        .map(|&db| {
            let p = crate::channel::db_to_linear(db);
            let vals: Result<Vec<f64>> = family
                .par_iter()
                .map(|inst| Ok(metric(&analyze(&inst.with_power(p)?, opts)?)))
                .collect();
            Ok(vals?.iter().sum::<f64>() / family.len() as f64)
        })
        .collect()
}

fn check_grid(snr_grid_db: &[f64]) -> Result<()> {
    if snr_grid_db.len() < 8 {
        return Err(Error::DegenerateGrid(format!(
            "{} points, need at least 8",
            snr_grid_db.len()
        )));
    }
    if snr_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::DegenerateGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    let span = snr_grid_db[snr_grid_db.len() - 1] - snr_grid_db[0];
    if span < 40.0 {
        return Err(Error::DegenerateGrid(format!("spans {span} dB, need 40")));
    }
    Ok(())
}

/// Slope of the family-mean `metric` against `1/2 log2(1 + P)` over the top
/// half of the grid.
pub fn slope_over_top_half<M>(
    family: &[ChannelInstance],
    snr_grid_db: &[f64],
    opts: &SearchOptions,
    metric: M,
) -> Result<f64>
where
    M: Fn(&RateReport) -> f64 + Sync,
{
    check_grid(snr_grid_db)?;
    let top = &snr_grid_db[snr_grid_db.len() / 2..];
    let ys = family_curve(family, top, opts, metric)?;
    let xs: Vec<f64> = top
        .iter()
        .map(|&db| 0.5 * (1.0 + crate::channel::db_to_linear(db)).log2())
        .collect();
    fit_slope(&xs, &ys)
}

/// Secure DoF estimate: slope of the mean secure sum rate.
pub fn dof_slope(
    family: &[ChannelInstance],
    snr_grid_db: &[f64],
    opts: &SearchOptions,
) -> Result<f64> {
    slope_over_top_half(family, snr_grid_db, opts, |r| r.r_sum_secure)
}
