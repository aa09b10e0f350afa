//! Network configuration and the derived scalar shorthands shared by every
//! evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the multi-pair network.
///
/// Field names match the on-disk config format exactly; unknown keys are
/// rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of source-destination pairs.
    #[serde(rename = "M")]
    pub m: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub n_e: usize,
    /// Second-stage forwarding power.
    pub p_t: f64,
    /// First-stage source power.
    pub p_s: f64,
    pub n0: f64,
    pub bandwidth: f64,
    pub r_s: f64,
    pub r_o: f64,
    pub sigma_md2: f64,
    pub sigma_me2: f64,
    /// First-stage wiretap variance; `None` tracks `sigma_me2`.
    pub sigma_ke2: Option<f64>,
    pub sigma_ss2: f64,
    pub k_rician: f64,
    pub alpha_sd: f64,
    pub alpha_se: f64,
    pub alpha_ke: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 4,
            n_t: 2,
            n_r: 2,
            n_e: 2,
            p_t: 10.0,
            p_s: 10.0,
            n0: 1.0,
            bandwidth: 1.0,
            r_s: 0.5,
            r_o: 1.0,
            sigma_md2: 1.0,
            sigma_me2: 1.0,
            sigma_ke2: None,
            sigma_ss2: 1.0,
            k_rician: 1.0,
            alpha_sd: 1.0,
            alpha_se: 1.0,
            alpha_ke: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig {
            field: "config",
            reason: e.to_string(),
        })?;
        validate(cfg)
    }

    pub fn sigma_ke2(&self) -> f64 {
        self.sigma_ke2.unwrap_or(self.sigma_me2)
    }

    /// Mean of one main-channel gain, including the relative link scalar.
    pub fn var_sd(&self) -> f64 {
        self.alpha_sd * self.sigma_md2
    }

    pub fn var_se(&self) -> f64 {
        self.alpha_se * self.sigma_me2
    }

    pub fn var_ke(&self) -> f64 {
        self.alpha_ke * self.sigma_ke2()
    }

    /// Sets the main-to-eavesdropper ratio in dB with `sigma_md2 = 1`.
    ///
    /// An explicit `sigma_ke2` keeps its ratio to `sigma_me2`.
    pub fn with_mer_db(&self, mer_db: f64) -> Self {
        let sigma_me2 = 10f64.powf(-mer_db / 10.0);
        let ratio = self.sigma_ke2.map(|ke| ke / self.sigma_me2);
        Self {
            sigma_md2: 1.0,
            sigma_me2,
            sigma_ke2: ratio.map(|r| r * sigma_me2),
            ..self.clone()
        }
    }

    /// Sets `p_t / n0` in dB; `p_s` follows `p_t` when `tie_source` is set.
    pub fn with_snr_db(&self, snr_db: f64, tie_source: bool) -> Self {
        let p_t = self.n0 * 10f64.powf(snr_db / 10.0);
        Self {
            p_t,
            p_s: if tie_source { p_t } else { self.p_s },
            ..self.clone()
        }
    }

    /// Compact one-line description used in error reports.
    pub fn summary(&self) -> String {
        format!(
            "M={} n_t={} n_r={} n_e={} p_t={} p_s={} n0={} B={} r_s={} r_o={} \
             sigma_md2={} sigma_me2={} sigma_ke2={} sigma_ss2={} K={}",
            self.m,
            self.n_t,
            self.n_r,
            self.n_e,
            self.p_t,
            self.p_s,
            self.n0,
            self.bandwidth,
            self.r_s,
            self.r_o,
            self.sigma_md2,
            self.sigma_me2,
            self.sigma_ke2(),
            self.sigma_ss2,
            self.k_rician
        )
    }
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.to_string(),
    }
}

/// Checks every config invariant, naming the first violated field.
pub fn validate(config: SystemConfig) -> Result<SystemConfig> {
    let counts = [
        ("M", config.m),
        ("n_t", config.n_t),
        ("n_r", config.n_r),
        ("n_e", config.n_e),
    ];
    for (name, v) in counts {
        if v < 1 {
            return Err(invalid(name, "must be ≥ 1"));
        }
    }
    let positive = [
        ("p_t", config.p_t),
        ("p_s", config.p_s),
        ("n0", config.n0),
        ("bandwidth", config.bandwidth),
        ("sigma_md2", config.sigma_md2),
        ("sigma_me2", config.sigma_me2),
        ("sigma_ke2", config.sigma_ke2()),
        ("sigma_ss2", config.sigma_ss2),
        ("alpha_sd", config.alpha_sd),
        ("alpha_se", config.alpha_se),
        ("alpha_ke", config.alpha_ke),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, "must be a finite value > 0"));
        }
    }
    let nonnegative = [
        ("r_s", config.r_s),
        ("r_o", config.r_o),
        ("k_rician", config.k_rician),
    ];
    for (name, v) in nonnegative {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid(name, "must be a finite value ≥ 0"));
        }
    }
    Ok(config)
}

/// Shorthand symbols computed once from a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// `2^(2 R_s / B)`, the half-band threshold of the cooperative schemes.
    pub rho: f64,
    /// `2^(R_s / B)`, the full-band threshold of the non-cooperative scheme.
    pub rho_full: f64,
    pub delta0_prime: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gamma_s: f64,
    pub lambda_se: f64,
    pub m_nakagami: u32,
    /// Unrounded `(1 + K)^2 / (2K + 1)`.
    pub m_raw: f64,
}

/// Nakagami shape used by both the sampler and the closed forms.
pub fn nakagami_shape(k_rician: f64) -> (f64, u32) {
    let raw = (1.0 + k_rician).powi(2) / (2.0 * k_rician + 1.0);
    (raw, (raw.round() as u32).max(1))
}

pub fn derive(config: &SystemConfig) -> DerivedParams {
    let b = config.bandwidth;
    let n_t = config.n_t as f64;
    let rho = (2.0 * config.r_s / b).exp2();
    let rho_full = (config.r_s / b).exp2();
    let gamma_s = config.p_s / config.n0;
    let theta0 = (2.0 * config.r_o / b).exp_m1_base2() / gamma_s;
    let theta1 = (rho - 1.0) / gamma_s;
    let (m_raw, m) = nakagami_shape(config.k_rician);
    let mf = m as f64;
    let ss = config.sigma_ss2;
    let ke = config.var_ke();
    let n_e = config.n_e as i32;
    let ln_fact = |n: u32| crate::numerics::ln_factorial(n);
    let theta3 = (ln_fact(m - 1) + mf * ss.ln() - mf * mf.ln()).exp();
    let theta4 = (-(n_e as f64) * ke.ln() + mf * (mf / ss).ln()
        - ln_fact(config.n_e as u32 - 1)
        - ln_fact(m - 1))
    .exp();
    DerivedParams {
        rho,
        rho_full,
        delta0_prime: (config.r_s / b).exp_m1_base2() * n_t * config.n0 / config.p_t,
        delta0: (2.0 * config.r_s / b).exp_m1_base2() * n_t * config.n0 / config.p_t,
        delta1: config.p_t / (config.p_s * n_t),
        theta0,
        theta1,
        theta2: (theta0 - theta1) / rho,
        theta3,
        theta4,
        lambda0: (2.0 * config.r_s / b).exp_m1_base2() * config.n0 / config.p_t,
        lambda1: config.p_t / config.p_s,
        gamma_s,
        lambda_se: config.sigma_md2 / config.sigma_me2,
        m_nakagami: m,
        m_raw,
    }
}

trait ExpM1Base2 {
    fn exp_m1_base2(self) -> f64;
}

impl ExpM1Base2 for f64 {
    /// `2^x - 1` without cancellation for small `x`.
    fn exp_m1_base2(self) -> f64 {
        (self * std::f64::consts::LN_2).exp_m1()
    }
}
