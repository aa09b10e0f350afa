//! Instantaneous rates, pair/antenna selection and per-stream secrecy
//! capacities for one channel realization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::ChannelDraw;
use crate::system::{DerivedParams, SystemConfig};

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    NonCoop,
    Rsdps,
    Tas,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::NonCoop => "noncoop",
            Scheme::Rsdps => "rsdps",
            Scheme::Tas => "tas",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noncoop" | "non-coop" => Some(Scheme::NonCoop),
            "rsdps" => Some(Scheme::Rsdps),
            "tas" | "tas-sdps" => Some(Scheme::Tas),
            _ => None,
        }
    }
}

/// How the second-stage transmitter uses its antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxMode {
    /// Space-time coding over all `n_t` antennas with the power split evenly.
    Stc,
    /// Single selected antenna.
    Tas(usize),
}

/// Scheme with the scheduling choice made explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    NonCoop,
    Rsdps(usize),
    Tas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub pair: usize,
    pub antenna: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSecrecy {
    pub stream_owner: usize,
    pub secrecy_capacity: f64,
    pub first_stage_decoded: bool,
}

fn half_band_rate(config: &SystemConfig, snr: f64) -> f64 {
    0.5 * config.bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

fn full_band_rate(config: &SystemConfig, snr: f64) -> f64 {
    config.bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

pub fn rate_first_stage_main(g_ss: f64, config: &SystemConfig, derived: &DerivedParams) -> f64 {
    half_band_rate(config, derived.gamma_s * g_ss)
}

/// First-stage eavesdropper rate with maximal-ratio combining over its antennas.
pub fn rate_first_stage_eve(g_ke_row: &[f64], config: &SystemConfig, derived: &DerivedParams) -> f64 {
    half_band_rate(config, derived.gamma_s * g_ke_row.iter().sum::<f64>())
}

/// Post-combining SNR of a second-stage link for a slice of gains.
///
/// STC expects `n_t * n_cols` gains; TAS expects `n_cols` gains of the
/// selected antenna.
pub fn second_stage_snr(
    slice: &[f64],
    n_cols: usize,
    mode: TxMode,
    config: &SystemConfig,
) -> Result<f64> {
    let (expected, norm) = match mode {
        TxMode::Stc => (config.n_t * n_cols, config.n_t as f64 * config.n0),
        TxMode::Tas(_) => (n_cols, config.n0),
    };
    if slice.len() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            got: slice.len(),
        });
    }
    Ok(config.p_t * slice.iter().sum::<f64>() / norm)
}

pub fn rate_second_stage_main(
    g_sd_slice: &[f64],
    mode: TxMode,
    config: &SystemConfig,
    _derived: &DerivedParams,
) -> Result<f64> {
    Ok(half_band_rate(
        config,
        second_stage_snr(g_sd_slice, config.n_r, mode, config)?,
    ))
}

pub fn rate_second_stage_eve(
    g_se_slice: &[f64],
    mode: TxMode,
    config: &SystemConfig,
    _derived: &DerivedParams,
) -> Result<f64> {
    Ok(half_band_rate(
        config,
        second_stage_snr(g_se_slice, config.n_e, mode, config)?,
    ))
}

/// Selection combining across the two stages.
pub fn eve_overall(stage1: f64, stage2: f64) -> f64 {
    stage1.max(stage2)
}

/// Pair and antenna with the largest summed main-channel gain; ties go to the
/// lexicographically smallest index.
pub fn select_tas(draw: &ChannelDraw) -> Selection {
    let mut best = Selection {
        pair: 0,
        antenna: 0,
    };
    let mut best_sum = f64::NEG_INFINITY;
    for m in 0..draw.m {
        for i in 0..draw.n_t {
            let s: f64 = draw.sd_row(m, i).iter().sum();
            if s > best_sum {
                best_sum = s;
                best = Selection { pair: m, antenna: i };
            }
        }
    }
    best
}

/// Secrecy capacity of every stream in the realization, ordered by owner.
pub fn stream_secrecy(
    draw: &ChannelDraw,
    scheme: SchemeChoice,
    config: &SystemConfig,
    derived: &DerivedParams,
) -> Vec<StreamSecrecy> {
    let (chosen, mode) = match scheme {
        SchemeChoice::NonCoop => return noncoop_streams(draw, config),
        SchemeChoice::Rsdps(m) => (m, TxMode::Stc),
        SchemeChoice::Tas => {
            let sel = select_tas(draw);
            (sel.pair, TxMode::Tas(sel.antenna))
        }
    };
    let (main_slice, eve_slice) = match mode {
        TxMode::Stc => (draw.sd_pair(chosen), draw.se_pair(chosen)),
        TxMode::Tas(a) => (draw.sd_row(chosen, a), draw.se_row(chosen, a)),
    };
    let c_main = rate_second_stage_main(main_slice, mode, config, derived).expect("draw shape");
    let c_eve2 = rate_second_stage_eve(eve_slice, mode, config, derived).expect("draw shape");
    (0..draw.m)
        .map(|k| {
            if k == chosen {
                return StreamSecrecy {
                    stream_owner: k,
                    secrecy_capacity: c_main - c_eve2,
                    first_stage_decoded: true,
                };
            }
            let c_ks = rate_first_stage_main(draw.ss(k, chosen), config, derived);
            let c_ke = rate_first_stage_eve(draw.ke_row(k), config, derived);
            let decoded = c_ks > config.r_o;
            let secrecy = if decoded {
                c_main - eve_overall(c_ke, c_eve2)
            } else {
                c_ks - c_ke
            };
            StreamSecrecy {
                stream_owner: k,
                secrecy_capacity: secrecy,
                first_stage_decoded: decoded,
            }
        })
        .collect()
}

fn noncoop_streams(draw: &ChannelDraw, config: &SystemConfig) -> Vec<StreamSecrecy> {
    (0..draw.m)
        .map(|m| {
            let main = second_stage_snr(draw.sd_pair(m), config.n_r, TxMode::Stc, config)
                .expect("draw shape");
            let eve = second_stage_snr(draw.se_pair(m), config.n_e, TxMode::Stc, config)
                .expect("draw shape");
            StreamSecrecy {
                stream_owner: m,
                secrecy_capacity: full_band_rate(config, main) - full_band_rate(config, eve),
                first_stage_decoded: true,
            }
        })
        .collect()
}
