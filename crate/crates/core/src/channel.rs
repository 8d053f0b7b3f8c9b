//! Problem instances for the real K-user Gaussian wiretap MAC.
//!
//! Both receivers see unit-variance Gaussian noise. All quantities here are
//! linear scale; decibels are converted once by [`db_to_linear`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether an instance will be used with the alignment (secrecy) scheme,
/// which scales user `l` by `1/g_l` and therefore needs every `g_l != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Secrecy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelInstance {
    h: Vec<f64>,
    g: Vec<f64>,
    power: f64,
}

impl ChannelInstance {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Per-user power `P` (linear).
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn h_norm_sq(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum()
    }

    pub fn g_norm_sq(&self) -> f64 {
        self.g.iter().map(|x| x * x).sum()
    }

    /// Same gains at a different power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        check_power(power)?;
        Ok(Self {
            power,
            ..self.clone()
        })
    }

    /// Sum capacity of the legitimate MAC, `1/2 log2(1 + |h|^2 P)`.
    pub fn capacity_sum(&self) -> f64 {
        0.5 * (1.0 + self.h_norm_sq() * self.power).log2()
    }
}

fn check_power(power: f64) -> Result<()> {
    if !power.is_finite() {
        return Err(Error::NonFinite("power"));
    }
    if power <= 0.0 {
        return Err(Error::NonPositivePower(power));
    }
    Ok(())
}

pub fn make_instance(h: &[f64], g: &[f64], power: f64, mode: Mode) -> Result<ChannelInstance> {
    if h.len() != g.len() {
        return Err(Error::LengthMismatch {
            h: h.len(),
            g: g.len(),
        });
    }
    if h.is_empty() {
        return Err(Error::NoUsers);
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("h"));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("g"));
    }
    check_power(power)?;
    if mode == Mode::Secrecy {
        if let Some(i) = g.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroGain(i));
        }
    }
    Ok(ChannelInstance {
        h: h.to_vec(),
        g: g.to_vec(),
        power,
    })
}

/// Per-user power scaling `SNR_l = alpha_l * P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerPolicy {
    alphas: Vec<f64>,
}

impl PowerPolicy {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        for (index, &value) in alphas.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("alpha"));
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveAlpha { index, value });
            }
        }
        Ok(Self { alphas })
    }

    /// Every user at full power, `alpha_l = 1`.
    pub fn uniform(users: usize) -> Self {
        Self {
            alphas: vec![1.0; users],
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn snr(&self, power: f64) -> Vec<f64> {
        self.alphas.iter().map(|a| a * power).collect()
    }
}

/// The alignment scheme's policy: user `l` builds its codebook at `g_l^2 P`
/// so that `x_l = x~_l / g_l` meets the power constraint.
pub fn secrecy_power_policy(inst: &ChannelInstance) -> Result<PowerPolicy> {
    if let Some(i) = inst.g.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroGain(i));
    }
    PowerPolicy::new(inst.g.iter().map(|x| x * x).collect())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Draws `h` and `g` i.i.d. standard normal from a seeded stream.
pub fn gaussian_gains(users: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_gains_from(users, &mut rng)
}

pub fn gaussian_gains_from<R: rand::Rng>(users: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let h = (0..users).map(|_| StandardNormal.sample(rng)).collect();
    let g = (0..users).map(|_| StandardNormal.sample(rng)).collect();
    (h, g)
}

/// JSON instance description, either literal gains or a seeded Gaussian draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceFile {
    Literal {
        h: Vec<f64>,
        g: Vec<f64>,
        snr_db: f64,
    },
    Seeded {
        #[serde(rename = "K")]
        users: usize,
        gain_seed: u64,
        snr_db: f64,
    },
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_instance(&self, mode: Mode) -> Result<ChannelInstance> {
        match self {
            InstanceFile::Literal { h, g, snr_db } => {
                make_instance(h, g, db_to_linear(*snr_db), mode)
            }
            InstanceFile::Seeded {
                users,
                gain_seed,
                snr_db,
            } => {
                let (h, g) = gaussian_gains(*users, *gain_seed);
                make_instance(&h, &g, db_to_linear(*snr_db), mode)
            }
        }
    }
}
