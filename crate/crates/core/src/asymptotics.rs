//! High-MER lower/upper bounds, diversity orders and slope fitting.
//!
//! Each bound replaces the combined gains by stochastically ordered maxima
//! over individual links and keeps the leading term in `1/MER`:
//!
//! `Pr(all L main links < kappa * Z) ~ kappa^L E[Z^L] / prod(sigma_d)`,
//! with `Z` the largest of independent exponential eavesdropper links and
//! `E[Z^L] = L! sum_{S nonempty} (-1)^(|S|+1) (sum_{i in S} r_i)^(-L)`.
//!
//! The lower bound uses `sum <= L * max` on the main side and `sum >= max` on
//! the eavesdropper side; the upper bound uses the opposite orderings. The
//! additive offsets and the MER-independent first-stage outage floor are
//! dropped, so both bounds are exact power laws in the MER.

use serde::Serialize;

use crate::closed_form::{self, combinatorics::subsets, EvalOptions};
use crate::error::{Error, Result};
use crate::numerics::{ln_factorial, SignedSeries, Summation};
use crate::rates::Scheme;
use crate::system::{derive, DerivedParams, SystemConfig};

/// Which side of the sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Transmit and source powers used by [`high_snr_regime`], relative to `n0`.
pub const HIGH_SNR: f64 = 1e12;

/// Config in which the MER is the only parameter left finite.
///
/// Slopes and bounds describe the limit where the SNR offsets vanish and
/// every relayed stream is decoded in the first stage. At finite SNR the
/// first-stage outage floor dominates long before 30 dB MER, so the fits run
/// with `r_o = 0` and powers `10^12 * n0`.
pub fn high_snr_regime(config: &SystemConfig) -> SystemConfig {
    SystemConfig {
        r_o: 0.0,
        p_t: HIGH_SNR * config.n0,
        p_s: HIGH_SNR * config.n0,
        ..config.clone()
    }
}

pub fn diversity_order(scheme: Scheme, config: &SystemConfig) -> u32 {
    let base = (config.n_t * config.n_r) as u32;
    match scheme {
        Scheme::NonCoop | Scheme::Rsdps => base,
        Scheme::Tas => config.m as u32 * base,
    }
}

/// `ln sum_{S} (-1)^(|S|+1) w_S^(-L)` over nonempty subsets of `weights`.
fn ln_max_moment_sum(weights: &[f64], l: u32, budget: u128) -> Result<f64> {
    let mut acc = SignedSeries::new();
    for s in subsets(weights, budget)? {
        acc.push_ln(s.sign < 0.0, -(l as f64) * s.rate_sum.ln());
    }
    let v = acc.sum(Summation::LogDomain).value;
    Ok(v.ln())
}

/// One linearized piece: `kappa^L L! / (prod sigma_d) * sum_S ...`, with the
/// eavesdropper rates given relative to `1 / var_se`.
fn piece(l: u32, kappa: f64, var_sd: f64, var_se: f64, weights: &[f64], budget: u128) -> Result<f64> {
    let ln_sum = ln_max_moment_sum(weights, l, budget)?;
    let ratio = kappa * var_se / var_sd;
    Ok((ln_factorial(l) + ln_sum).exp() * ratio.powi(l as i32))
}

struct Layout {
    l: u32,
    kappa: f64,
    own: Vec<f64>,
    relay: Vec<f64>,
}

fn layout(scheme: Scheme, side: Side, config: &SystemConfig, d: &DerivedParams) -> Layout {
    let (n_t, n_r, n_e) = (config.n_t as f64, config.n_r as f64, config.n_e as f64);
    // relative rate of a first-stage link seen through the power ratio delta
    let rel = |delta: f64| delta * config.var_se() / config.var_ke();
    let rho = if scheme == Scheme::NonCoop { d.rho_full } else { d.rho };
    match (scheme, side) {
        (Scheme::Tas, Side::Lower) => {
            let own = vec![1.0; config.n_e];
            let mut relay = own.clone();
            relay.extend(std::iter::repeat_n(rel(d.lambda1), config.n_e));
            Layout {
                l: diversity_order(Scheme::Tas, config),
                kappa: rho / n_r,
                own,
                relay,
            }
        }
        (Scheme::Tas, Side::Upper) => {
            let own = vec![1.0 / n_e; config.n_e];
            let mut relay = own.clone();
            relay.extend(std::iter::repeat_n(rel(d.lambda1) / n_e, config.n_e));
            Layout {
                l: diversity_order(Scheme::Tas, config),
                kappa: rho,
                own,
                relay,
            }
        }
        (_, Side::Lower) => {
            let l = (config.n_t * config.n_r) as u32;
            let own = vec![1.0; config.n_t * config.n_e];
            let mut relay = own.clone();
            relay.extend(std::iter::repeat_n(rel(d.delta1), config.n_e));
            Layout {
                l,
                kappa: rho / l as f64,
                own,
                relay,
            }
        }
        (_, Side::Upper) => {
            let own = vec![1.0 / (n_t * n_e); config.n_t * config.n_e];
            let mut relay = own.clone();
            relay.extend(std::iter::repeat_n(rel(d.delta1) / n_e, config.n_e));
            Layout {
                l: (config.n_t * config.n_r) as u32,
                kappa: rho,
                own,
                relay,
            }
        }
    }
}

/// Asymptotic bound of the scheme's SOP at the config's MER.
pub fn sop_bound(scheme: Scheme, side: Side, config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_bound_with_budget(scheme, side, config, derived, EvalOptions::default().term_budget)
}

pub fn sop_bound_with_budget(
    scheme: Scheme,
    side: Side,
    config: &SystemConfig,
    d: &DerivedParams,
    budget: u128,
) -> Result<f64> {
    let lay = layout(scheme, side, config, d);
    let own = piece(lay.l, lay.kappa, config.var_sd(), config.var_se(), &lay.own, budget)?;
    if scheme == Scheme::NonCoop || config.m == 1 {
        return Ok(own);
    }
    let relay = piece(lay.l, lay.kappa, config.var_sd(), config.var_se(), &lay.relay, budget)?;
    let p_bar = closed_form::p_bar_o_km(config, d);
    Ok(closed_form::mix_streams(config.m, own, p_bar * relay))
}

pub fn sop_lower_rsdps(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_bound(Scheme::Rsdps, Side::Lower, config, derived)
}

pub fn sop_upper_rsdps(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_bound(Scheme::Rsdps, Side::Upper, config, derived)
}

pub fn sop_lower_tas(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_bound(Scheme::Tas, Side::Lower, config, derived)
}

pub fn sop_upper_tas(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_bound(Scheme::Tas, Side::Upper, config, derived)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiversityFit {
    /// Least-squares slope of `log10 sop` against `log10 lambda_se`.
    pub slope: f64,
    pub intercept: f64,
    pub mer_window_db: (f64, f64),
    /// RMS of the `log10` residuals.
    pub residual: f64,
    pub points_used: usize,
}

/// Fits `log10 sop = intercept + slope * log10 lambda` over the points whose
/// MER lies inside `window_db` (inclusive, in dB).
pub fn fit_diversity(points: &[(f64, f64)], window_db: (f64, f64)) -> Result<DiversityFit> {
    let eps = 1e-9;
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(lam, _)| {
            let db = 10.0 * lam.log10();
            db >= window_db.0 - eps && db <= window_db.1 + eps
        })
        .collect();
    if inside.len() < 3 {
        return Err(Error::InsufficientPoints { got: inside.len() });
    }
    if let Some(&(lambda, value)) = inside.iter().find(|p| p.1.is_nan() || p.1 <= 0.0) {
        return Err(Error::NonPositiveSop { lambda, value });
    }
    let xs: Vec<f64> = inside.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = inside.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DiversityFit {
        slope,
        intercept,
        mer_window_db: window_db,
        residual,
        points_used: inside.len(),
    })
}

/// Evenly spaced MER grid in dB, endpoints included.
pub fn mer_grid_db(window_db: (f64, f64), points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::InsufficientPoints { got: points });
    }
    let step = (window_db.1 - window_db.0) / (points - 1) as f64;
    Ok((0..points).map(|i| window_db.0 + step * i as f64).collect())
}

/// Exact SOP sampled over a MER grid, as `(lambda_se, sop)` pairs.
pub fn exact_curve(scheme: Scheme, config: &SystemConfig, mer_db: &[f64]) -> Result<Vec<(f64, f64)>> {
    mer_db
        .iter()
        .map(|&db| {
            let c = config.with_mer_db(db);
            let d = derive(&c);
            Ok((d.lambda_se, closed_form::sop(scheme, &c, &d)?))
        })
        .collect()
}

/// Slope tolerance used when comparing fits with [`diversity_order`].
pub fn slope_tolerance(scheme: Scheme, config: &SystemConfig) -> f64 {
    match scheme {
        Scheme::NonCoop | Scheme::Rsdps => 0.2,
        Scheme::Tas if config.m <= 4 => 0.3,
        Scheme::Tas => 0.5,
    }
}
