//! Monte Carlo estimation of the secrecy outage probability.
//!
//! Trials are split into fixed chunks of `2^16`. Chunk `c` draws from the
//! sub-stream `(seed, c)` and produces integer outage counts, so the merged
//! result is identical for any worker count or completion order.
//!
//! The per-trial kernels only sample the gains a scheme actually reads and
//! test outage on linear SNRs: `C_main - C_eve < R_s` is evaluated as
//! `1 + snr_main < rho * (1 + snr_eve)`.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::fading::{sub_stream, ChannelDraw};
use crate::rates::{second_stage_snr, select_tas, Scheme, SchemeChoice, TxMode};
use crate::system::{derive, DerivedParams, SystemConfig};

pub const CHUNK_TRIALS: u64 = 1 << 16;

/// How chunks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Chunks are spread over the current rayon pool. Falls back to
    /// sequential execution without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SopEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub scheme: Scheme,
    /// Own-stream then relayed-stream probability for the cooperative
    /// schemes; one entry per pair for the non-cooperative scheme.
    pub per_stream: Option<Vec<f64>>,
}

/// Which streams an estimate in a breakdown covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StreamRole {
    /// The scheduled pair's own stream.
    Own,
    /// Streams forwarded by the scheduled pair.
    Relayed,
    /// Stream of pair `k` under independent transmission.
    Independent(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamEstimate {
    pub role: StreamRole,
    pub estimate: SopEstimate,
    /// Fraction of relayed streams decoded in the first stage.
    pub decode_rate: Option<f64>,
}

/// Wald standard error, with the rule-of-three surrogate at the boundary.
pub fn wald_stderr(p: f64, n: u64) -> f64 {
    let n = n as f64;
    if p <= 0.0 || p >= 1.0 {
        3.0 / n
    } else {
        (p * (1.0 - p) / n).sqrt()
    }
}

/// Outage thresholds in the linear SNR domain.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub rho: f64,
    pub rho_full: f64,
    /// First-stage decoding needs `g_ss > theta0`.
    pub theta0: f64,
    pub gamma_s: f64,
}

impl Thresholds {
    pub fn new(derived: &DerivedParams) -> Self {
        Self {
            rho: derived.rho,
            rho_full: derived.rho_full,
            theta0: derived.theta0,
            gamma_s: derived.gamma_s,
        }
    }

    #[inline]
    pub fn own_outage(&self, main: f64, eve2: f64) -> bool {
        1.0 + main < self.rho * (1.0 + eve2)
    }

    #[inline]
    pub fn noncoop_outage(&self, main: f64, eve: f64) -> bool {
        1.0 + main < self.rho_full * (1.0 + eve)
    }

    /// `(outage, decoded)` of a relayed stream.
    ///
    /// `eve1` is the eavesdropper's first-stage SNR for that stream.
    #[inline]
    pub fn relayed_outage(&self, main: f64, eve2: f64, eve1: f64, g_ss: f64) -> (bool, bool) {
        if g_ss > self.theta0 {
            (1.0 + main < self.rho * (1.0 + eve2.max(eve1)), true)
        } else {
            (1.0 + self.gamma_s * g_ss < self.rho * (1.0 + eve1), false)
        }
    }
}

/// Outage flag of every stream of a full realization, ordered by owner.
///
/// Mirrors [`crate::rates::stream_secrecy`] on linear SNRs.
pub fn outage_flags(
    draw: &ChannelDraw,
    scheme: SchemeChoice,
    config: &SystemConfig,
    derived: &DerivedParams,
) -> Vec<bool> {
    let th = Thresholds::new(derived);
    let (chosen, mode) = match scheme {
        SchemeChoice::NonCoop => {
            return (0..draw.m)
                .map(|m| {
                    let a = second_stage_snr(draw.sd_pair(m), config.n_r, TxMode::Stc, config);
                    let b = second_stage_snr(draw.se_pair(m), config.n_e, TxMode::Stc, config);
                    th.noncoop_outage(a.expect("shape"), b.expect("shape"))
                })
                .collect();
        }
        SchemeChoice::Rsdps(m) => (m, TxMode::Stc),
        SchemeChoice::Tas => {
            let s = select_tas(draw);
            (s.pair, TxMode::Tas(s.antenna))
        }
    };
    let (ms, es) = match mode {
        TxMode::Stc => (draw.sd_pair(chosen), draw.se_pair(chosen)),
        TxMode::Tas(a) => (draw.sd_row(chosen, a), draw.se_row(chosen, a)),
    };
    let main = second_stage_snr(ms, config.n_r, mode, config).expect("shape");
    let eve2 = second_stage_snr(es, config.n_e, mode, config).expect("shape");
    (0..draw.m)
        .map(|k| {
            if k == chosen {
                th.own_outage(main, eve2)
            } else {
                let eve1 = derived.gamma_s * draw.ke_row(k).iter().sum::<f64>();
                th.relayed_outage(main, eve2, eve1, draw.ss(k, chosen)).0
            }
        })
        .collect()
}

/// Integer counts of one or more chunks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    own_out: u64,
    relayed_out: u64,
    relayed_decoded: u64,
    per_pair_out: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.own_out += other.own_out;
        self.relayed_out += other.relayed_out;
        self.relayed_decoded += other.relayed_decoded;
        if self.per_pair_out.len() < other.per_pair_out.len() {
            self.per_pair_out.resize(other.per_pair_out.len(), 0);
        }
        for (a, b) in self.per_pair_out.iter_mut().zip(&other.per_pair_out) {
            *a += b;
        }
        self
    }
}

#[inline]
fn exp_sum<R: Rng>(n: usize, rng: &mut R) -> f64 {
    let mut s = 0.0;
    for _ in 0..n {
        let e: f64 = rng.sample(Exp1);
        s += e;
    }
    s
}

/// Precomputed per-run constants of the trial kernels.
struct Kernel {
    scheme: Scheme,
    m: usize,
    n_t: usize,
    n_r: usize,
    n_e: usize,
    th: Thresholds,
    m_nak: usize,
    /// Second-stage SNR per unit exponential, STC.
    stc_sd: f64,
    stc_se: f64,
    /// Second-stage SNR per unit exponential, single antenna.
    tas_sd: f64,
    tas_se: f64,
    /// First-stage eavesdropper SNR per unit exponential.
    ke: f64,
    /// Source-to-source gain per unit exponential.
    ss: f64,
}

impl Kernel {
    fn new(config: &SystemConfig, derived: &DerivedParams, scheme: Scheme) -> Self {
        let stc = config.p_t / (config.n_t as f64 * config.n0);
        let tas = config.p_t / config.n0;
        Self {
            scheme,
            m: config.m,
            n_t: config.n_t,
            n_r: config.n_r,
            n_e: config.n_e,
            th: Thresholds::new(derived),
            m_nak: derived.m_nakagami as usize,
            stc_sd: stc * config.var_sd(),
            stc_se: stc * config.var_se(),
            tas_sd: tas * config.var_sd(),
            tas_se: tas * config.var_se(),
            ke: derived.gamma_s * config.var_ke(),
            ss: config.sigma_ss2 / derived.m_nakagami as f64,
        }
    }

    fn run_chunk(&self, seed: u64, chunk: u64, total_trials: u64) -> Tally {
        let start = chunk * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(total_trials);
        let mut rng = sub_stream(seed, chunk);
        let mut tally = Tally {
            trials: end - start,
            per_pair_out: vec![0; if self.scheme == Scheme::NonCoop { self.m } else { 0 }],
            ..Default::default()
        };
        match self.scheme {
            Scheme::NonCoop => {
                for _ in start..end {
                    for k in 0..self.m {
                        let a = self.stc_sd * exp_sum(self.n_t * self.n_r, &mut rng);
                        let b = self.stc_se * exp_sum(self.n_t * self.n_e, &mut rng);
                        if self.th.noncoop_outage(a, b) {
                            tally.per_pair_out[k] += 1;
                        }
                    }
                }
                tally.own_out = tally.per_pair_out.iter().sum();
            }
            Scheme::Rsdps => {
                for _ in start..end {
                    let a = self.stc_sd * exp_sum(self.n_t * self.n_r, &mut rng);
                    let b = self.stc_se * exp_sum(self.n_t * self.n_e, &mut rng);
                    self.tally_streams(a, b, &mut rng, &mut tally);
                }
            }
            Scheme::Tas => {
                for _ in start..end {
                    let mut best = f64::NEG_INFINITY;
                    for _ in 0..self.m * self.n_t {
                        let s = exp_sum(self.n_r, &mut rng);
                        if s > best {
                            best = s;
                        }
                    }
                    let a = self.tas_sd * best;
                    let b = self.tas_se * exp_sum(self.n_e, &mut rng);
                    self.tally_streams(a, b, &mut rng, &mut tally);
                }
            }
        }
        tally
    }

    #[inline]
    fn tally_streams<R: Rng>(&self, main: f64, eve2: f64, rng: &mut R, tally: &mut Tally) {
        if self.th.own_outage(main, eve2) {
            tally.own_out += 1;
        }
        for _ in 1..self.m {
            let g_ss = self.ss * exp_sum(self.m_nak, rng);
            let eve1 = self.ke * exp_sum(self.n_e, rng);
            let (out, dec) = self.th.relayed_outage(main, eve2, eve1, g_ss);
            tally.relayed_out += out as u64;
            tally.relayed_decoded += dec as u64;
        }
    }
}

fn run(config: &SystemConfig, scheme: Scheme, trials: u64, seed: u64, exec: Execution) -> Tally {
    assert!(trials >= 1, "trials must be ≥ 1");
    let derived = derive(config);
    let kernel = Kernel::new(config, &derived, scheme);
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..chunks)
                .into_par_iter()
                .map(|c| kernel.run_chunk(seed, c, trials))
                .reduce(Tally::default, Tally::merge)
        }
        _ => (0..chunks)
            .map(|c| kernel.run_chunk(seed, c, trials))
            .fold(Tally::default(), Tally::merge),
    }
}

fn estimate(p: f64, trials: u64, scheme: Scheme, per_stream: Option<Vec<f64>>) -> SopEstimate {
    let p = p.clamp(0.0, 1.0);
    SopEstimate {
        p_hat: p,
        stderr: wald_stderr(p, trials),
        trials,
        scheme,
        per_stream,
    }
}

fn summarize(config: &SystemConfig, scheme: Scheme, t: &Tally) -> (SopEstimate, Vec<StreamEstimate>) {
    let m = config.m as u64;
    let n = t.trials;
    let total_out = t.own_out + t.relayed_out;
    let p_all = total_out as f64 / (n * m) as f64;
    let mut parts = Vec::new();
    if scheme == Scheme::NonCoop {
        for (k, &c) in t.per_pair_out.iter().enumerate() {
            parts.push(StreamEstimate {
                role: StreamRole::Independent(k),
                estimate: estimate(c as f64 / n as f64, n, scheme, None),
                decode_rate: None,
            });
        }
    } else {
        parts.push(StreamEstimate {
            role: StreamRole::Own,
            estimate: estimate(t.own_out as f64 / n as f64, n, scheme, None),
            decode_rate: None,
        });
        if m > 1 {
            let streams = n * (m - 1);
            parts.push(StreamEstimate {
                role: StreamRole::Relayed,
                estimate: estimate(t.relayed_out as f64 / streams as f64, n, scheme, None),
                decode_rate: Some(t.relayed_decoded as f64 / streams as f64),
            });
        }
    }
    let per_stream = parts.iter().map(|p| p.estimate.p_hat).collect();
    (estimate(p_all, n, scheme, Some(per_stream)), parts)
}

/// Average fraction of streams in outage over `trials` realizations.
pub fn estimate_sop(config: &SystemConfig, scheme: Scheme, trials: u64, seed: u64) -> SopEstimate {
    estimate_sop_with(config, scheme, trials, seed, Execution::default())
}

pub fn estimate_sop_with(
    config: &SystemConfig,
    scheme: Scheme,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> SopEstimate {
    let t = run(config, scheme, trials, seed, exec);
    summarize(config, scheme, &t).0
}

/// Per-role estimates without the final averaging over streams.
pub fn estimate_stream_breakdown(
    config: &SystemConfig,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Vec<StreamEstimate> {
    let t = run(config, scheme, trials, seed, Execution::default());
    summarize(config, scheme, &t).1
}

/// Overall estimate and breakdown from a single run.
pub fn estimate_with_breakdown(
    config: &SystemConfig,
    scheme: Scheme,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> (SopEstimate, Vec<StreamEstimate>) {
    let t = run(config, scheme, trials, seed, exec);
    summarize(config, scheme, &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_outage() {
        let cfg = SystemConfig {
            r_s: 1e6,
            ..Default::default()
        };
        for s in [Scheme::NonCoop, Scheme::Rsdps, Scheme::Tas] {
            assert_eq!(estimate_sop(&cfg, s, 5000, 1).p_hat, 1.0);
        }
    }

    #[test]
    fn chunk_merge_is_order_free() {
        let cfg = SystemConfig {
            m: 3,
            ..Default::default()
        };
        let trials = 3 * CHUNK_TRIALS + 17;
        let a = run(&cfg, Scheme::Rsdps, trials, 9, Execution::Sequential);
        let b = run(&cfg, Scheme::Rsdps, trials, 9, Execution::Parallel);
        assert_eq!(a, b);
        assert_eq!(a.trials, trials);
    }

    #[test]
    fn zero_decode_threshold_always_decodes() {
        let cfg = SystemConfig {
            r_o: 0.0,
            m: 3,
            ..Default::default()
        };
        let parts = estimate_stream_breakdown(&cfg, Scheme::Tas, 200_000, 3);
        assert_eq!(parts[1].decode_rate, Some(1.0));
    }

    #[test]
    fn single_pair_tas_breakdown_matches_total() {
        let cfg = SystemConfig {
            m: 1,
            ..Default::default()
        };
        let (total, parts) = estimate_with_breakdown(&cfg, Scheme::Tas, 100_000, 4, Execution::Sequential);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].estimate.p_hat, total.p_hat);
    }

    #[test]
    fn boundary_stderr() {
        assert_eq!(wald_stderr(0.0, 1000), 0.003);
        assert!((wald_stderr(0.5, 100) - 0.05).abs() < 1e-15);
    }
}
