//! Finite-series evaluation of `Pr(max_K Y < rho * Z + c)`.
//!
//! `F_Y(y)^K` is expanded over weak compositions, `(rho Z + c)^beta2` by the
//! binomial theorem, and every `E[Z^p exp(-a Z)]` is a sum of Gamma
//! integrals. All terms are pushed sign-tracked in the log domain.

use super::combinatorics::composition_terms;
use super::{EveLaw, OutageEvent};
use crate::error::Result;
use crate::numerics::{ln_binomial, ln_factorial, ln_pow, GammaLaw, SignedSeries};

/// `ln` of `int_0^inf z^p exp(-a z) f(z) dz` for the Gamma law `f`.
fn ln_moment(f: &GammaLaw, p: u32, a: f64) -> f64 {
    let n = f.shape;
    ln_factorial(p + n - 1)
        - ln_factorial(n - 1)
        - n as f64 * f.scale.ln()
        - (p + n) as f64 * (a + 1.0 / f.scale).ln()
}

/// `ln` of `int z^p exp(-a z) f(z) exp(-z/t) (z/t)^d / d! dz`, the `d`-th
/// term of `1 - F_g(z)` for a companion law `g` with per-unit scale `t`.
fn ln_cross_moment(f: &GammaLaw, t: f64, d: u32, p: u32, a: f64) -> f64 {
    let n = f.shape;
    ln_factorial(p + n - 1 + d)
        - ln_factorial(n - 1)
        - n as f64 * f.scale.ln()
        - ln_factorial(d)
        - d as f64 * t.ln()
        - (p + n + d) as f64 * (a + 1.0 / f.scale + 1.0 / t).ln()
}

/// Signed terms of `E[Z^p exp(-a Z)]`, as `(negative, ln |t|)`.
fn moment_terms(eve: &EveLaw, p: u32, a: f64, out: &mut Vec<(bool, f64)>) {
    match eve {
        EveLaw::Single(f) => out.push((false, ln_moment(f, p, a))),
        EveLaw::MaxOf(f, g) => {
            // density of the max: f F_g + g F_f, with F = 1 - (Poisson tail)
            for (x, y) in [(f, g), (g, f)] {
                out.push((false, ln_moment(x, p, a)));
                for d in 0..y.shape {
                    out.push((true, ln_cross_moment(x, y.scale, d, p, a)));
                }
            }
        }
    }
}

/// Pushes `weight * Pr(event)` onto `acc`, where `weight = exp(ln_weight)`.
pub(crate) fn push_event(
    ev: &OutageEvent,
    ln_weight: f64,
    budget: u128,
    acc: &mut SignedSeries,
) -> Result<()> {
    let terms = composition_terms(ev.copies, ev.main.shape, ev.main.scale, budget)?;
    let ln_rho = ev.rho.ln();
    let mut moments = Vec::new();
    for t in &terms {
        let a = t.beta3 * ev.rho;
        let ln_shift = -t.beta3 * ev.offset;
        for p in 0..=t.beta2 {
            let ln_coef = ln_weight
                + t.ln_abs_beta1
                + ln_binomial(t.beta2, p)
                + p as f64 * ln_rho
                + ln_pow(ev.offset, t.beta2 - p)
                + ln_shift;
            if ln_coef == f64::NEG_INFINITY {
                continue;
            }
            moments.clear();
            moment_terms(&ev.eve, p, a, &mut moments);
            for &(neg, l) in &moments {
                acc.push_ln(neg ^ t.beta1_negative, ln_coef + l);
            }
        }
    }
    Ok(())
}

/// Pushes the first-stage outage probability
/// `Pr(X3 < rho X2 + theta1, X3 < theta0)` for the branch `theta1 < theta0`.
///
/// With `theta2 = (theta0 - theta1) / rho` it equals
/// `F3(theta0) S2(theta2) + F2(theta2) - int_0^theta2 f2(x) S3(rho x + theta1) dx`.
pub(crate) fn push_first_stage_outage(
    x2: &GammaLaw,
    x3: &GammaLaw,
    rho: f64,
    theta0: f64,
    theta1: f64,
    acc: &mut SignedSeries,
) {
    let theta2 = (theta0 - theta1) / rho;
    acc.push_ln(false, x3.ln_cdf(theta0) + crate::numerics::ln_gamma_q(x2.shape, theta2 / x2.scale));
    acc.push_ln(false, x2.ln_cdf(theta2));
    // S3(y) = exp(-c y) sum_{g<m} (c y)^g / g!, c = 1/scale3
    let c = 1.0 / x3.scale;
    let n = x2.shape;
    let a = 1.0 / x2.scale + c * rho;
    for g in 0..x3.shape {
        for p in 0..=g {
            let q = p + n;
            let ln_t = -c * theta1 + g as f64 * c.ln() + p as f64 * rho.ln()
                + ln_pow(theta1, g - p)
                - ln_factorial(p)
                - ln_factorial(g - p)
                - n as f64 * x2.scale.ln()
                - ln_factorial(n - 1)
                + ln_factorial(q - 1)
                - q as f64 * a.ln()
                + crate::numerics::ln_gamma_p(q, a * theta2);
            acc.push_ln(true, ln_t);
        }
    }
}

/// Legacy form of the first-stage outage series, kept with its
/// coefficient slips for comparison.
pub(crate) fn first_stage_outage_legacy(
    sigma_e: f64,
    sigma_ss: f64,
    m: u32,
    n_e: u32,
    rho: f64,
    theta0: f64,
    theta1: f64,
) -> f64 {
    let c = m as f64 / sigma_ss;
    let theta2 = (theta0 - theta1) / rho;
    let fact = |k: u32| ln_factorial(k).exp();
    let gamma_m = fact(m - 1);
    let mut s3 = 0.0;
    for g in 0..m {
        s3 += theta0.powi(g as i32) / fact(g) * (-theta0 * c).exp() * c.powi(g as i32);
    }
    let mut s2_legacy = 0.0;
    for g in 0..n_e {
        s2_legacy += ((theta2 / sigma_e) * (-theta2 / sigma_e).exp()).powi(g as i32) / fact(g);
    }
    let theta3 = fact(m - 1) * sigma_ss.powi(m as i32) / (m as f64).powi(m as i32);
    let theta4 = (1.0 / sigma_e).powi(n_e as i32) * c.powi(m as i32) / (fact(n_e - 1) * gamma_m);
    let mut tail = 0.0;
    for g in 0..n_e {
        tail += fact(n_e - 1) / fact(g) * theta2.powi(g as i32) * (1.0 / sigma_e).powi((n_e - g) as i32);
    }
    let f2_part =
        theta3 * theta4 * (fact(n_e - 1) * (1.0 / sigma_e).powi(-(n_e as i32)) - (-theta2 / sigma_e).exp() * tail);
    let a = 1.0 / sigma_e + rho * c;
    let mut double = 0.0;
    for g in 0..m {
        for p in 0..=g {
            let q = p + n_e;
            let mut inner = 0.0;
            for l in 0..q {
                inner += fact(q - 1) * theta2.powi(l as i32) / (fact(l) * a.powi((q - l) as i32));
            }
            let bracket = rho.powi(g as i32) * fact(q - 1) / a.powi(q as i32) - inner * (-theta2 * a).exp();
            double += fact(n_e - 1) * theta4 / (fact(p) * fact(g - p))
                * c.powi(g as i32 - m as i32)
                * (theta1 / rho).powi((g - p) as i32)
                * (-theta1 * c).exp()
                * bracket;
        }
    }
    (1.0 - s3) * s2_legacy + f2_part - double
}
