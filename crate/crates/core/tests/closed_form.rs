use coopsec::asymptotics::high_snr_regime;
use coopsec::closed_form::{
    self, EvalOptions, FirstStageForm, NoncoopExponent, Route,
};
use coopsec::numerics::Summation;
use coopsec::{derive, Error, Scheme, SystemConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Gamma};

type Evaluator = fn(&SystemConfig, &coopsec::DerivedParams, &EvalOptions) -> coopsec::Result<f64>;

const EVALUATORS: [(&str, Evaluator); 7] = [
    ("noncoop", closed_form::sop_noncoop_with),
    ("rsdps_own", closed_form::sop_rsdps_own_with),
    ("rsdps_relayed", closed_form::sop_rsdps_relayed_with),
    ("rsdps", closed_form::sop_rsdps_with),
    ("tas_selected", closed_form::sop_tas_selected_with),
    ("tas_relayed", closed_form::sop_tas_relayed_with),
    ("tas", closed_form::sop_tas_with),
];

fn small(m: usize, mer_db: f64) -> SystemConfig {
    SystemConfig {
        m,
        n_t: 1,
        n_r: 1,
        n_e: 1,
        ..Default::default()
    }
    .with_mer_db(mer_db)
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn single_antenna_own_stream_matches_exponential_oracle() {
    // X ~ Exp(sd), Y ~ Exp(se): Pr(X < rho Y + c) = 1 - sd/(sd + rho se) e^{-c/sd}
    for mer in [-5.0, 0.0, 5.0, 10.0, 20.0] {
        let cfg = small(1, mer);
        let d = derive(&cfg);
        let (sd, se) = (cfg.var_sd(), cfg.var_se());
        let oracle = 1.0 - sd / (sd + d.rho * se) * (-d.delta0 / sd).exp();
        let got = closed_form::sop_rsdps_own(&cfg, &d).unwrap();
        assert!((got - oracle).abs() < 1e-12, "mer {mer}: {got} vs {oracle}");
        let oracle_nc = 1.0 - sd / (sd + d.rho_full * se) * (-d.delta0_prime / sd).exp();
        let got_nc = closed_form::sop_noncoop(&cfg, &d).unwrap();
        assert!((got_nc - oracle_nc).abs() < 1e-12);
    }
}

#[test]
fn single_antenna_relayed_stream_matches_laplace_oracle() {
    // Pr(X < rho max(A,B) + c) = 1 - e^{-c/sd} E[e^{-t Z}], t = rho/sd
    for mer in [0.0, 5.0, 10.0] {
        let cfg = SystemConfig { r_o: 0.0, ..small(2, mer) };
        let d = derive(&cfg);
        let sd = cfg.var_sd();
        let a = cfg.var_se();
        let b = cfg.var_ke() / d.delta1;
        let t = d.rho / sd;
        let lap = 1.0 - t / (t + 1.0 / a) - t / (t + 1.0 / b) + t / (t + 1.0 / a + 1.0 / b);
        let oracle = 1.0 - (-d.delta0 / sd).exp() * lap;
        let got = closed_form::sop_rsdps_relayed(&cfg, &d).unwrap();
        assert!((got - oracle).abs() < 1e-12, "mer {mer}: {got} vs {oracle}");
    }
}

#[test]
fn two_pair_antenna_selection_matches_binomial_oracle() {
    // Pr(max(X1, X2) < W), W = rho Y + c: sum_k C(2,k)(-1)^k e^{-kc/sd} / (1 + k rho se/sd)
    for mer in [0.0, 5.0, 10.0, 15.0] {
        let cfg = small(2, mer);
        let d = derive(&cfg);
        let (sd, se) = (cfg.var_sd(), cfg.var_se());
        let oracle: f64 = [(0, 1.0), (1, -2.0), (2, 1.0)]
            .iter()
            .map(|&(k, c)| c * (-(k as f64) * d.lambda0 / sd).exp() / (1.0 + k as f64 * d.rho * se / sd))
            .sum();
        let got = closed_form::sop_tas_selected(&cfg, &d).unwrap();
        assert!((got - oracle).abs() < 1e-12, "mer {mer}: {got} vs {oracle}");
    }
}

#[test]
fn symmetric_case_is_one_half() {
    let cfg = SystemConfig {
        r_s: 0.0,
        ..small(1, 0.0)
    };
    let d = derive(&cfg);
    for route in [Route::Series, Route::Integral, Route::Auto] {
        let v = closed_form::sop_noncoop_with(&cfg, &d, &EvalOptions::with_route(route)).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{route:?}: {v}");
    }
}

#[test]
fn naive_and_log_domain_summation_agree() {
    let naive = EvalOptions {
        route: Route::Series,
        summation: Summation::Naive,
        ..Default::default()
    };
    let logd = EvalOptions {
        summation: Summation::LogDomain,
        ..naive
    };
    for n_t in 1..=2 {
        for n_e in 1..=2 {
            for n_r in 1..=2 {
                for m in [1, 2, 3] {
                    for mer in [0.0, 5.0, 10.0] {
                        let cfg = SystemConfig {
                            m,
                            n_t,
                            n_r,
                            n_e,
                            ..Default::default()
                        }
                        .with_mer_db(mer);
                        let d = derive(&cfg);
                        for (name, f) in EVALUATORS {
                            let a = f(&cfg, &d, &naive).unwrap();
                            let b = f(&cfg, &d, &logd).unwrap();
                            assert!(
                                (a - b).abs() <= 1e-8 * b.abs().max(1e-300),
                                "{name} {}: naive {a} log {b}",
                                cfg.summary()
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn series_and_quadrature_routes_agree() {
    let series = EvalOptions::with_route(Route::Series);
    let quad = EvalOptions::with_route(Route::Integral);
    for m in [1, 2, 4] {
        for n in [1, 2] {
            for n_e in [1, 2, 3] {
                for mer in [-5.0, 0.0, 5.0, 10.0] {
                    for r_o in [0.0, 0.3, 1.0] {
                        let cfg = SystemConfig {
                            m,
                            n_t: n,
                            n_r: n,
                            n_e,
                            r_o,
                            k_rician: 3.0,
                            ..Default::default()
                        }
                        .with_mer_db(mer);
                        let d = derive(&cfg);
                        for (name, f) in EVALUATORS {
                            let a = f(&cfg, &d, &series).unwrap();
                            let b = f(&cfg, &d, &quad).unwrap();
                            assert!(
                                (a - b).abs() <= 1e-9 * b.max(1e-3),
                                "{name} {}: series {a} quad {b}",
                                cfg.summary()
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn quadrature_keeps_relative_precision_where_series_cancel() {
    let cfg = high_snr_regime(&SystemConfig { m: 2, ..small(2, 45.0) });
    let d = derive(&cfg);
    let series = closed_form::sop_tas_with(&cfg, &d, &EvalOptions::with_route(Route::Series));
    let quad = closed_form::sop_tas_with(&cfg, &d, &EvalOptions::with_route(Route::Integral)).unwrap();
    let auto = closed_form::sop_tas(&cfg, &d).unwrap();
    assert!(quad > 0.0);
    assert_eq!(auto, quad);
    if let Ok(s) = series {
        assert!((s - quad).abs() < 1e-9);
    }
}

#[test]
fn reduction_identities() {
    for n_r in 1..=3 {
        for n_e in 1..=3 {
            for mer in [-5.0, 0.0, 7.0, 15.0] {
                let cfg = SystemConfig {
                    m: 1,
                    n_t: 1,
                    n_r,
                    n_e,
                    ..Default::default()
                }
                .with_mer_db(mer);
                let d = derive(&cfg);
                let own = closed_form::sop_rsdps_own(&cfg, &d).unwrap();
                let tas_sel = closed_form::sop_tas_selected(&cfg, &d).unwrap();
                let tas = closed_form::sop_tas(&cfg, &d).unwrap();
                assert!((tas_sel - own).abs() <= 1e-12, "{tas_sel} vs {own}");
                assert!((tas - own).abs() <= 1e-12);
                let multi = SystemConfig { n_t: 2, ..cfg.clone() };
                let dm = derive(&multi);
                let rs = closed_form::sop_rsdps(&multi, &dm).unwrap();
                let rs_own = closed_form::sop_rsdps_own(&multi, &dm).unwrap();
                assert!((rs - rs_own).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn decode_probability_matches_density_quadrature() {
    // K = 2 + sqrt(6) gives shape (1+K)^2/(2K+1) = 3
    let cfg = SystemConfig {
        k_rician: 2.0 + 6f64.sqrt(),
        sigma_ss2: 1.3,
        r_o: 2.0,
        p_s: 4.0,
        ..Default::default()
    };
    let d = derive(&cfg);
    assert_eq!(d.m_nakagami, 3);
    let rate = 3.0f64 / 1.3;
    let pdf = |x: f64| rate.powi(3) * x * x * (-rate * x).exp() / 2.0;
    let oracle = 1.0 - simpson(pdf, 0.0, d.theta0, 4000);
    let got = closed_form::p_bar_o_km(&cfg, &d);
    assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
}

#[test]
fn first_stage_outage_matches_joint_event_simulation() {
    // K = 1 + sqrt(2) gives shape 2; R_s < R_o selects the two-threshold branch
    let cfg = SystemConfig {
        n_e: 2,
        k_rician: 1.0 + 2f64.sqrt(),
        r_s: 0.5,
        r_o: 1.5,
        p_s: 5.0,
        sigma_me2: 0.4,
        ..Default::default()
    };
    let d = derive(&cfg);
    assert_eq!(d.m_nakagami, 2);
    let analytic = closed_form::p_so_km(&cfg, &d).unwrap();

    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let ss = Gamma::new(2.0, cfg.sigma_ss2 / 2.0).unwrap();
    let ke = Exp::new(1.0 / cfg.var_ke()).unwrap();
    let n = 4_000_000u64;
    let mut hits = 0u64;
    for _ in 0..n {
        let g = ss.sample(&mut rng);
        let e: f64 = ke.sample(&mut rng) + ke.sample(&mut rng);
        let c_ks = 0.5 * (1.0 + d.gamma_s * g).log2();
        let c_ke = 0.5 * (1.0 + d.gamma_s * e).log2();
        if c_ks <= cfg.r_o && c_ks - c_ke < cfg.r_s {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((analytic - p).abs() <= 4.0 * se, "analytic {analytic} mc {p} se {se}");

    let legacy = closed_form::p_so_km_with(
        &cfg,
        &d,
        &EvalOptions {
            route: Route::Series,
            first_stage: FirstStageForm::Legacy,
            ..Default::default()
        },
    );
    match legacy {
        Ok(v) => assert!((v - p).abs() > 4.0 * se, "legacy form {v} unexpectedly matches {p}"),
        Err(Error::OutOfRange { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn vanishing_first_stage_leakage_reduces_relay_to_own() {
    for n in [1, 2] {
        for mer in [0.0, 10.0] {
            let cfg = SystemConfig {
                m: 3,
                n_t: n,
                n_r: n,
                n_e: n,
                r_o: 0.0,
                sigma_ke2: Some(1e-14),
                ..Default::default()
            }
            .with_mer_db(mer);
            let d = derive(&cfg);
            let own = closed_form::sop_rsdps_own(&cfg, &d).unwrap();
            let rel = closed_form::sop_rsdps_relayed(&cfg, &d).unwrap();
            assert!((own - rel).abs() < 1e-9, "{own} vs {rel}");
            let own = closed_form::sop_tas_selected(&cfg, &d).unwrap();
            let rel = closed_form::sop_tas_relayed(&cfg, &d).unwrap();
            assert!((own - rel).abs() < 1e-9, "{own} vs {rel}");
        }
    }
}

#[test]
fn antenna_selection_slope_over_one_decade() {
    let base = high_snr_regime(&small(2, 0.0));
    let at = |mer: f64| {
        let cfg = base.with_mer_db(mer);
        closed_form::sop_tas(&cfg, &derive(&cfg)).unwrap()
    };
    let slope = (at(30.0) / at(20.0)).log10();
    assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn antenna_selection_beats_round_robin() {
    let mut checked = 0;
    for m in [2, 4] {
        for n_t in [1, 2] {
            for n_r in [1, 2] {
                for n_e in [1, 2] {
                    for mer in [0.0, 5.0, 10.0] {
                        let cfg = SystemConfig {
                            m,
                            n_t,
                            n_r,
                            n_e,
                            ..Default::default()
                        }
                        .with_mer_db(mer);
                        let d = derive(&cfg);
                        let tas = closed_form::sop_tas(&cfg, &d).unwrap();
                        let rs = closed_form::sop_rsdps(&cfg, &d).unwrap();
                        assert!(tas <= rs, "{}: tas {tas} rsdps {rs}", cfg.summary());
                        checked += 1;
                    }
                }
            }
        }
    }
    for mer in [-10.0, 20.0] {
        let cfg = SystemConfig::default().with_mer_db(mer);
        let d = derive(&cfg);
        assert!(closed_form::sop_tas(&cfg, &d).unwrap() <= closed_form::sop_rsdps(&cfg, &d).unwrap());
        checked += 1;
    }
    assert_eq!(checked, 50);
}

#[test]
fn series_route_reports_term_budget() {
    let cfg = SystemConfig {
        m: 20,
        n_t: 4,
        n_r: 4,
        ..Default::default()
    };
    let d = derive(&cfg);
    let r = closed_form::sop_tas_selected_with(&cfg, &d, &EvalOptions::with_route(Route::Series));
    assert!(matches!(r, Err(Error::TermBudget { .. })), "{r:?}");
    let v = closed_form::sop_tas_selected(&cfg, &d).unwrap();
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn legacy_noncoop_exponent_is_a_different_curve() {
    let cfg = small(1, 5.0);
    let d = derive(&cfg);
    let canon = closed_form::sop_noncoop(&cfg, &d).unwrap();
    let legacy = closed_form::sop_noncoop_with(
        &cfg,
        &d,
        &EvalOptions {
            noncoop_exponent: NoncoopExponent::Legacy,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(legacy > canon);
}

fn grid_point() -> impl Strategy<Value = SystemConfig> {
    (
        1usize..=5,
        1usize..=3,
        1usize..=3,
        1usize..=3,
        -15.0f64..40.0,
        0.0f64..2.0,
        0.0f64..2.0,
        0.0f64..6.0,
        -5.0f64..30.0,
    )
        .prop_map(|(m, n_t, n_r, n_e, mer, r_s, r_o, k, snr)| {
            SystemConfig {
                m,
                n_t,
                n_r,
                n_e,
                r_s,
                r_o,
                k_rician: k,
                ..Default::default()
            }
            .with_mer_db(mer)
            .with_snr_db(snr, true)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn every_evaluator_stays_in_unit_interval(cfg in grid_point()) {
        let d = derive(&cfg);
        for scheme in [Scheme::NonCoop, Scheme::Rsdps, Scheme::Tas] {
            let v = closed_form::sop(scheme, &cfg, &d).unwrap();
            prop_assert!((0.0..=1.0).contains(&v), "{:?} {}", scheme, v);
        }
        for (name, f) in EVALUATORS {
            let v = f(&cfg, &d, &EvalOptions::default()).unwrap();
            prop_assert!((0.0..=1.0).contains(&v), "{} {}", name, v);
        }
    }
}
