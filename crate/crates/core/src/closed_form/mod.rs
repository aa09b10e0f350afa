//! Exact secrecy outage probabilities.
//!
//! Every per-stream probability has the form
//! `Pr(max of K iid Gamma(L) < rho * Z + c)`, with `Z` either a single Gamma
//! variable or the larger of two independent ones. It is evaluated by one of
//! two routes:
//!
//! * [`Route::Series`]: the finite alternating series obtained by expanding
//!   the Gamma CDFs, summed sign-tracked in the log domain;
//! * [`Route::Integral`]: one-dimensional adaptive quadrature of the same
//!   probability with a positive, log-domain integrand.
//!
//! [`Route::Auto`] takes the series when its condition number
//! `sum |t| / |sum t|` is small and switches to quadrature otherwise. At high
//! MER the series lose every digit to cancellation, so the curves used for
//! slope fits come from the quadrature route.

pub mod combinatorics;
mod integral;
mod series;

use crate::error::{Error, Result};
use crate::numerics::{GammaLaw, QuadOptions, SignedSeries, Summation};
use crate::system::{DerivedParams, SystemConfig};

pub use combinatorics::{compositions, subsets, CompositionTerm, SubsetTerm};

/// Evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    #[default]
    Auto,
    Series,
    Integral,
}

/// Threshold exponent of the non-cooperative evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoncoopExponent {
    /// `2^(R_s/B)`, consistent with full-band rates.
    #[default]
    FullBand,
    /// `2^(2 R_s/B)` in the series, the legacy half-band threshold.
    Legacy,
}

/// Form of the first-stage outage series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstStageForm {
    #[default]
    Corrected,
    /// Legacy series with misplaced factors, kept for comparison.
    /// Only available on the series route.
    Legacy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub route: Route,
    pub summation: Summation,
    /// Largest number of compositions or subsets an evaluator may enumerate.
    pub term_budget: u128,
    pub noncoop_exponent: NoncoopExponent,
    pub first_stage: FirstStageForm,
    /// [`Route::Auto`] accepts a series whose condition number is below this.
    pub condition_limit: f64,
    pub quad: QuadOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            route: Route::Auto,
            summation: Summation::LogDomain,
            term_budget: 1_000_000,
            noncoop_exponent: NoncoopExponent::FullBand,
            first_stage: FirstStageForm::Corrected,
            condition_limit: 1e4,
            quad: QuadOptions::default(),
        }
    }
}

impl EvalOptions {
    pub fn with_route(route: Route) -> Self {
        Self {
            route,
            ..Default::default()
        }
    }
}

/// Law of the eavesdropper quantity `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum EveLaw {
    Single(GammaLaw),
    /// `max(A, B)` of independent Gamma variables.
    MaxOf(GammaLaw, GammaLaw),
}

/// `Pr(max of copies iid main < rho * Z + offset)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OutageEvent {
    pub main: GammaLaw,
    pub copies: u32,
    pub rho: f64,
    pub offset: f64,
    pub eve: EveLaw,
}

fn event_value(ev: &OutageEvent, opts: &EvalOptions) -> Result<f64> {
    let series = || -> Result<(f64, f64)> {
        let mut acc = SignedSeries::new();
        series::push_event(ev, 0.0, opts.term_budget, &mut acc)?;
        let v = acc.sum(opts.summation);
        Ok((v.value, v.condition()))
    };
    match opts.route {
        Route::Series => series().map(|v| v.0),
        Route::Integral => integral::event_probability(ev, &opts.quad),
        Route::Auto => match series() {
            Ok((v, cond)) if cond <= opts.condition_limit => Ok(v),
            Ok(_) | Err(Error::TermBudget { .. }) => integral::event_probability(ev, &opts.quad),
            Err(e) => Err(e),
        },
    }
}

fn checked(evaluator: &'static str, value: f64, config: &SystemConfig) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&value) || value.is_nan() {
        return Err(Error::OutOfRange {
            evaluator,
            value,
            config: config.summary(),
        });
    }
    Ok(value.clamp(0.0, 1.0))
}

fn gamma(shape: usize, scale: f64) -> GammaLaw {
    GammaLaw::new(shape as u32, scale)
}

/// Law of the source-to-source gain.
fn ss_law(config: &SystemConfig, d: &DerivedParams) -> GammaLaw {
    GammaLaw::new(d.m_nakagami, config.sigma_ss2 / d.m_nakagami as f64)
}

fn first_stage_eve_law(config: &SystemConfig) -> GammaLaw {
    gamma(config.n_e, config.var_ke())
}

pub(crate) fn noncoop_event(config: &SystemConfig, d: &DerivedParams, exponent: NoncoopExponent) -> OutageEvent {
    OutageEvent {
        main: gamma(config.n_t * config.n_r, config.var_sd()),
        copies: 1,
        rho: match exponent {
            NoncoopExponent::FullBand => d.rho_full,
            NoncoopExponent::Legacy => d.rho,
        },
        offset: d.delta0_prime,
        eve: EveLaw::Single(gamma(config.n_t * config.n_e, config.var_se())),
    }
}

pub(crate) fn rsdps_own_event(config: &SystemConfig, d: &DerivedParams) -> OutageEvent {
    OutageEvent {
        main: gamma(config.n_t * config.n_r, config.var_sd()),
        copies: 1,
        rho: d.rho,
        offset: d.delta0,
        eve: EveLaw::Single(gamma(config.n_t * config.n_e, config.var_se())),
    }
}

pub(crate) fn rsdps_relay_event(config: &SystemConfig, d: &DerivedParams) -> OutageEvent {
    OutageEvent {
        eve: EveLaw::MaxOf(
            gamma(config.n_t * config.n_e, config.var_se()),
            gamma(config.n_e, config.var_ke() / d.delta1),
        ),
        ..rsdps_own_event(config, d)
    }
}

pub(crate) fn tas_own_event(config: &SystemConfig, d: &DerivedParams) -> OutageEvent {
    OutageEvent {
        main: gamma(config.n_r, config.var_sd()),
        copies: (config.m * config.n_t) as u32,
        rho: d.rho,
        offset: d.lambda0,
        eve: EveLaw::Single(gamma(config.n_e, config.var_se())),
    }
}

pub(crate) fn tas_relay_event(config: &SystemConfig, d: &DerivedParams) -> OutageEvent {
    OutageEvent {
        eve: EveLaw::MaxOf(
            gamma(config.n_e, config.var_se()),
            gamma(config.n_e, config.var_ke() / d.lambda1),
        ),
        ..tas_own_event(config, d)
    }
}

/// Non-cooperative SOP; identical for every pair.
pub fn sop_noncoop(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_noncoop_with(config, derived, &EvalOptions::default())
}

pub fn sop_noncoop_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let v = event_value(&noncoop_event(config, d, opts.noncoop_exponent), opts)?;
    checked("sop_noncoop", v, config)
}

/// SOP of the scheduled pair's own stream under round-robin scheduling.
pub fn sop_rsdps_own(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_rsdps_own_with(config, derived, &EvalOptions::default())
}

pub fn sop_rsdps_own_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let v = event_value(&rsdps_own_event(config, d), opts)?;
    checked("sop_rsdps_own", v, config)
}

/// Probability that a relayed stream is decoded in the first stage.
pub fn p_bar_o_km(config: &SystemConfig, derived: &DerivedParams) -> f64 {
    ss_law(config, derived).sf(derived.theta0)
}

/// First-stage outage probability of a relayed stream.
pub fn p_so_km(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    p_so_km_with(config, derived, &EvalOptions::default())
}

pub fn p_so_km_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let x3 = ss_law(config, d);
    if config.r_s >= config.r_o {
        return checked("p_so_km", x3.cdf(d.theta0), config);
    }
    let x2 = first_stage_eve_law(config);
    if opts.first_stage == FirstStageForm::Legacy {
        let v = series::first_stage_outage_legacy(
            x2.scale,
            config.sigma_ss2,
            d.m_nakagami,
            x2.shape,
            d.rho,
            d.theta0,
            d.theta1,
        );
        return checked("p_so_km", v, config);
    }
    let series = || {
        let mut acc = SignedSeries::new();
        series::push_first_stage_outage(&x2, &x3, d.rho, d.theta0, d.theta1, &mut acc);
        acc.sum(opts.summation)
    };
    let integral = || integral::first_stage_outage(&x2, &x3, d.rho, d.theta0, d.theta1, &opts.quad);
    let v = match opts.route {
        Route::Series => series().value,
        Route::Integral => integral()?,
        Route::Auto => {
            let s = series();
            if s.condition() <= opts.condition_limit {
                s.value
            } else {
                integral()?
            }
        }
    };
    checked("p_so_km", v, config)
}

fn relayed(
    name: &'static str,
    ev: &OutageEvent,
    config: &SystemConfig,
    d: &DerivedParams,
    opts: &EvalOptions,
) -> Result<f64> {
    let p_bar = p_bar_o_km(config, d);
    let second = if p_bar > 0.0 { event_value(ev, opts)? } else { 0.0 };
    let v = p_bar * second + p_so_km_with(config, d, opts)?;
    checked(name, v, config)
}

/// SOP of a stream relayed by the scheduled pair under round-robin
/// scheduling.
pub fn sop_rsdps_relayed(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_rsdps_relayed_with(config, derived, &EvalOptions::default())
}

pub fn sop_rsdps_relayed_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    relayed("sop_rsdps_relayed", &rsdps_relay_event(config, d), config, d, opts)
}

/// Mixes own and relayed stream probabilities over the `M` streams.
pub fn mix_streams(m: usize, own: f64, relayed: f64) -> f64 {
    ((m - 1) as f64 * relayed + own) / m as f64
}

pub fn sop_rsdps(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_rsdps_with(config, derived, &EvalOptions::default())
}

pub fn sop_rsdps_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let own = sop_rsdps_own_with(config, d, opts)?;
    if config.m == 1 {
        return Ok(own);
    }
    let rel = sop_rsdps_relayed_with(config, d, opts)?;
    checked("sop_rsdps", mix_streams(config.m, own, rel), config)
}

/// SOP of the selected pair's own stream under antenna selection.
pub fn sop_tas_selected(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_tas_selected_with(config, derived, &EvalOptions::default())
}

pub fn sop_tas_selected_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let v = event_value(&tas_own_event(config, d), opts)?;
    checked("sop_tas_selected", v, config)
}

pub fn sop_tas_relayed(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_tas_relayed_with(config, derived, &EvalOptions::default())
}

pub fn sop_tas_relayed_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    relayed("sop_tas_relayed", &tas_relay_event(config, d), config, d, opts)
}

pub fn sop_tas(config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_tas_with(config, derived, &EvalOptions::default())
}

pub fn sop_tas_with(config: &SystemConfig, d: &DerivedParams, opts: &EvalOptions) -> Result<f64> {
    let own = sop_tas_selected_with(config, d, opts)?;
    if config.m == 1 {
        return Ok(own);
    }
    let rel = sop_tas_relayed_with(config, d, opts)?;
    checked("sop_tas", mix_streams(config.m, own, rel), config)
}

/// Exact SOP of `scheme` with default options.
pub fn sop(scheme: crate::rates::Scheme, config: &SystemConfig, derived: &DerivedParams) -> Result<f64> {
    sop_with(scheme, config, derived, &EvalOptions::default())
}

pub fn sop_with(
    scheme: crate::rates::Scheme,
    config: &SystemConfig,
    d: &DerivedParams,
    opts: &EvalOptions,
) -> Result<f64> {
    use crate::rates::Scheme;
    match scheme {
        Scheme::NonCoop => sop_noncoop_with(config, d, opts),
        Scheme::Rsdps => sop_rsdps_with(config, d, opts),
        Scheme::Tas => sop_tas_with(config, d, opts),
    }
}
