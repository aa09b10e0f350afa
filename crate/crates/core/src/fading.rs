//! Squared channel gain sampling.
//!
//! Rayleigh links give exponential gains; the Rician source-to-source links
//! use the Nakagami approximation, a Gamma law with integer shape.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::system::{DerivedParams, SystemConfig};

/// Random stream handle used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Independent sub-stream for chunk `index` of a run seeded with `seed`.
///
/// Sub-streams differ only in the ChaCha stream id, so a chunk's draws are a
/// pure function of `(seed, index)` no matter which worker runs it.
pub fn sub_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn draw_exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    mean * e
}

/// Gamma sample with integer `shape` and the given mean, i.e. rate
/// `shape / mean`.
#[inline]
pub fn draw_gamma<R: Rng + ?Sized>(shape: u32, mean: f64, rng: &mut R) -> f64 {
    debug_assert!(shape >= 1);
    let mut acc = 0.0;
    for _ in 0..shape {
        let e: f64 = rng.sample(Exp1);
        acc += e;
    }
    acc * (mean / shape as f64)
}

/// One joint realization of every squared gain in the network.
///
/// Tensors are stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub m: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub n_e: usize,
    /// `[pair][tx][rx]`
    pub g_sd: Vec<f64>,
    /// `[pair][tx][eve]`, second stage
    pub g_se: Vec<f64>,
    /// `[source][eve]`, first stage
    pub g_ke: Vec<f64>,
    /// `[from][to]`; the diagonal is zero and never read
    pub g_ss: Vec<f64>,
}

impl ChannelDraw {
    pub fn zeros(m: usize, n_t: usize, n_r: usize, n_e: usize) -> Self {
        Self {
            m,
            n_t,
            n_r,
            n_e,
            g_sd: vec![0.0; m * n_t * n_r],
            g_se: vec![0.0; m * n_t * n_e],
            g_ke: vec![0.0; m * n_e],
            g_ss: vec![0.0; m * m],
        }
    }

    pub fn for_config(config: &SystemConfig) -> Self {
        Self::zeros(config.m, config.n_t, config.n_r, config.n_e)
    }

    pub fn shapes(&self) -> [Vec<usize>; 4] {
        [
            vec![self.m, self.n_t, self.n_r],
            vec![self.m, self.n_t, self.n_e],
            vec![self.m, self.n_e],
            vec![self.m, self.m],
        ]
    }

    /// All `n_t * n_r` main gains of pair `m`.
    pub fn sd_pair(&self, m: usize) -> &[f64] {
        let w = self.n_t * self.n_r;
        &self.g_sd[m * w..(m + 1) * w]
    }

    /// The `n_r` main gains from antenna `i` of pair `m`.
    pub fn sd_row(&self, m: usize, i: usize) -> &[f64] {
        let start = (m * self.n_t + i) * self.n_r;
        &self.g_sd[start..start + self.n_r]
    }

    pub fn se_pair(&self, m: usize) -> &[f64] {
        let w = self.n_t * self.n_e;
        &self.g_se[m * w..(m + 1) * w]
    }

    pub fn se_row(&self, m: usize, i: usize) -> &[f64] {
        let start = (m * self.n_t + i) * self.n_e;
        &self.g_se[start..start + self.n_e]
    }

    pub fn ke_row(&self, k: usize) -> &[f64] {
        &self.g_ke[k * self.n_e..(k + 1) * self.n_e]
    }

    pub fn ss(&self, from: usize, to: usize) -> f64 {
        self.g_ss[from * self.m + to]
    }

    pub fn set_ss(&mut self, from: usize, to: usize, v: f64) {
        self.g_ss[from * self.m + to] = v;
    }

    /// Redraws every gain in place, in the fixed order sd, se, ke, ss.
    pub fn redraw<R: Rng + ?Sized>(
        &mut self,
        config: &SystemConfig,
        derived: &DerivedParams,
        rng: &mut R,
    ) {
        let (sd, se, ke) = (config.var_sd(), config.var_se(), config.var_ke());
        for g in &mut self.g_sd {
            *g = draw_exponential(sd, rng);
        }
        for g in &mut self.g_se {
            *g = draw_exponential(se, rng);
        }
        for g in &mut self.g_ke {
            *g = draw_exponential(ke, rng);
        }
        for from in 0..self.m {
            for to in 0..self.m {
                let v = if from == to {
                    0.0
                } else {
                    draw_gamma(derived.m_nakagami, config.sigma_ss2, rng)
                };
                self.set_ss(from, to, v);
            }
        }
    }
}

pub fn draw_realization<R: Rng + ?Sized>(
    config: &SystemConfig,
    derived: &DerivedParams,
    rng: &mut R,
) -> ChannelDraw {
    let mut d = ChannelDraw::for_config(config);
    d.redraw(config, derived, rng);
    d
}
