use coopsec::asymptotics::{
    diversity_order, exact_curve, fit_diversity, high_snr_regime, mer_grid_db, sop_bound, Side,
};
use coopsec::closed_form;
use coopsec::{derive, Error, Scheme, SystemConfig};

fn antennas(m: usize, n_t: usize, n_r: usize, n_e: usize) -> SystemConfig {
    SystemConfig {
        m,
        n_t,
        n_r,
        n_e,
        ..Default::default()
    }
}

fn bound_at(scheme: Scheme, side: Side, base: &SystemConfig, lambda: f64) -> f64 {
    let cfg = base.with_mer_db(10.0 * lambda.log10());
    sop_bound(scheme, side, &cfg, &derive(&cfg)).unwrap()
}

fn bound_configs() -> Vec<SystemConfig> {
    vec![
        antennas(1, 1, 1, 1),
        antennas(2, 1, 1, 1),
        antennas(4, 2, 2, 2),
        antennas(3, 2, 1, 3),
        SystemConfig {
            r_o: 0.0,
            ..antennas(2, 1, 2, 2)
        },
    ]
}

#[test]
fn bounds_are_exact_power_laws() {
    for base in bound_configs() {
        for scheme in [Scheme::NonCoop, Scheme::Rsdps, Scheme::Tas] {
            let d = diversity_order(scheme, &base) as i32;
            for side in [Side::Lower, Side::Upper] {
                let reference = bound_at(scheme, side, &base, 10.0) * 10f64.powi(d);
                for k in 1..=12 {
                    let lambda = 10f64.powf(1.0 + 0.5 * k as f64);
                    let scaled = bound_at(scheme, side, &base, lambda) * lambda.powi(d);
                    assert!(
                        (scaled / reference - 1.0).abs() < 1e-12,
                        "{scheme:?} {side:?} {}: {scaled} vs {reference}",
                        base.summary()
                    );
                }
            }
        }
    }
}

#[test]
fn doubling_the_ratio_divides_by_two_to_the_order() {
    let base = antennas(3, 2, 2, 1);
    for scheme in [Scheme::Rsdps, Scheme::Tas] {
        let d = diversity_order(scheme, &base) as i32;
        for side in [Side::Lower, Side::Upper] {
            let a = bound_at(scheme, side, &base, 500.0);
            let b = bound_at(scheme, side, &base, 1000.0);
            assert!((a / b / 2f64.powi(d) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn lower_bound_is_below_upper_bound() {
    for base in bound_configs() {
        for scheme in [Scheme::Rsdps, Scheme::Tas] {
            let lo = bound_at(scheme, Side::Lower, &base, 100.0);
            let hi = bound_at(scheme, Side::Upper, &base, 100.0);
            assert!(lo > 0.0 && lo <= hi, "{scheme:?}: {lo} {hi}");
        }
    }
}

#[test]
fn exact_curve_is_sandwiched_at_high_ratio() {
    for base in bound_configs() {
        let base = high_snr_regime(&base);
        for scheme in [Scheme::Rsdps, Scheme::Tas] {
            for lambda in [1e4, 1e5] {
                let cfg = base.with_mer_db(10.0 * f64::log10(lambda));
                let d = derive(&cfg);
                let exact = closed_form::sop(scheme, &cfg, &d).unwrap();
                let lo = sop_bound(scheme, Side::Lower, &cfg, &d).unwrap();
                let hi = sop_bound(scheme, Side::Upper, &cfg, &d).unwrap();
                assert!(
                    lo * 0.99 <= exact && exact <= hi * 1.01,
                    "{scheme:?} {}: {lo} <= {exact} <= {hi}",
                    cfg.summary()
                );
            }
        }
    }
}

#[test]
fn single_antenna_round_robin_slope() {
    let cfg = high_snr_regime(&antennas(2, 1, 1, 1));
    let grid = mer_grid_db((30.0, 45.0), 4).unwrap();
    let curve = exact_curve(Scheme::Rsdps, &cfg, &grid).unwrap();
    let fit = fit_diversity(&curve, (30.0, 45.0)).unwrap();
    assert!((fit.slope + 1.0).abs() <= 0.15, "slope {}", fit.slope);
}

#[test]
fn exact_slopes_match_diversity_orders() {
    for (base, scheme, tol) in [
        (antennas(2, 1, 1, 1), Scheme::NonCoop, 0.2),
        (antennas(2, 2, 2, 2), Scheme::Rsdps, 0.2),
        (antennas(2, 1, 1, 1), Scheme::Tas, 0.3),
        (antennas(3, 1, 2, 1), Scheme::Tas, 0.3),
    ] {
        let cfg = high_snr_regime(&base);
        let grid = mer_grid_db((30.0, 50.0), 5).unwrap();
        let curve = exact_curve(scheme, &cfg, &grid).unwrap();
        let fit = fit_diversity(&curve, (30.0, 50.0)).unwrap();
        let d = diversity_order(scheme, &cfg) as f64;
        assert!((fit.slope + d).abs() <= tol, "{scheme:?}: slope {} order {d}", fit.slope);
    }
}

#[test]
fn synthetic_power_law_fit() {
    let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6]
        .iter()
        .map(|&l: &f64| (l, 3.0 * l.powi(-2)))
        .collect();
    let fit = fit_diversity(&pts, (30.0, 60.0)).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
    assert_eq!(fit.points_used, 4);

    let flat: Vec<(f64, f64)> = pts.iter().map(|&(l, _)| (l, 0.25)).collect();
    assert!(fit_diversity(&flat, (30.0, 60.0)).unwrap().slope.abs() < 1e-12);
}

#[test]
fn fit_rejects_bad_windows() {
    let pts = vec![(1e3, 1e-3), (1e4, 1e-4)];
    assert!(matches!(
        fit_diversity(&pts, (30.0, 40.0)),
        Err(Error::InsufficientPoints { .. })
    ));
    let pts = vec![(1e3, 1e-3), (1e4, 0.0), (1e5, 1e-5)];
    assert!(matches!(
        fit_diversity(&pts, (30.0, 50.0)),
        Err(Error::NonPositiveSop { .. })
    ));
    assert!(mer_grid_db((30.0, 50.0), 2).is_err());
}

#[test]
fn diversity_orders() {
    let cfg = antennas(4, 2, 3, 1);
    assert_eq!(diversity_order(Scheme::NonCoop, &cfg), 6);
    assert_eq!(diversity_order(Scheme::Rsdps, &cfg), 6);
    assert_eq!(diversity_order(Scheme::Tas, &cfg), 24);
}
