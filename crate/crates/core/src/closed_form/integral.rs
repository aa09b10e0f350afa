//! Quadrature evaluation of the same probabilities as [`super::series`].
//!
//! Integrands are positive and computed in the log domain, so the result
//! keeps full relative precision where the series cancel.

use super::{EveLaw, OutageEvent};
use crate::error::Result;
use crate::numerics::{integrate, integrate_half_line, ln_add_exp, GammaLaw, QuadOptions};

impl EveLaw {
    pub(crate) fn ln_pdf(&self, z: f64) -> f64 {
        match self {
            EveLaw::Single(f) => f.ln_pdf(z),
            EveLaw::MaxOf(f, g) => ln_add_exp(
                f.ln_pdf(z) + g.ln_cdf(z),
                g.ln_pdf(z) + f.ln_cdf(z),
            ),
        }
    }

    fn dominant(&self) -> GammaLaw {
        match self {
            EveLaw::Single(f) => *f,
            EveLaw::MaxOf(f, g) => GammaLaw::new(f.shape.max(g.shape), f.scale.max(g.scale)),
        }
    }
}

/// `Pr(max_K Y < rho Z + c) = int F_Y(rho z + c)^K f_Z(z) dz`.
pub(crate) fn event_probability(ev: &OutageEvent, opts: &QuadOptions) -> Result<f64> {
    let dom = ev.eve.dominant();
    // At high MER the integrand behaves like z^(K L + n - 1) exp(-z / s).
    let scale = dom.scale * (dom.shape + ev.copies * ev.main.shape) as f64;
    let k = ev.copies as f64;
    let f = |z: f64| {
        let l = k * ev.main.ln_cdf(ev.rho * z + ev.offset) + ev.eve.ln_pdf(z);
        l.exp()
    };
    integrate_half_line(f, scale, opts, "outage event")
}

/// `Pr(X3 < rho X2 + theta1, X3 < theta0)` for `theta1 < theta0`.
pub(crate) fn first_stage_outage(
    x2: &GammaLaw,
    x3: &GammaLaw,
    rho: f64,
    theta0: f64,
    theta1: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let theta2 = (theta0 - theta1) / rho;
    let head = x3.cdf(theta0) * x2.sf(theta2);
    let g = |x: f64| (x2.ln_pdf(x) + x3.ln_cdf(rho * x + theta1)).exp();
    let (v, err) = integrate(g, 0.0, theta2, opts);
    let v = crate::numerics::check_quadrature(v, err, opts, "first-stage outage")?;
    Ok(head + v)
}
