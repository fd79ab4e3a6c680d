//! Individual checks of the battery at reduced budgets, and the degenerate
//! and deliberately broken configurations.

use geo_langevin::validate::{self, Budget, Settings, Status};
use geo_langevin::{ModelParams, StreamFactory};

fn seeds(label: u64) -> StreamFactory {
    StreamFactory::new(7).derive(label)
}

#[test]
fn bath_statistics_at_reduced_budget() {
    let p = ModelParams::desk_scale();
    let noise = validate::noise_calibration(&p, 300_000, seeds(1)).unwrap();
    assert!(noise.passed(), "{noise:?}");
    let (eq, ac) = validate::velocity_statistics(&p, 2_000, seeds(2)).unwrap();
    assert!((ac.values["relative_error"]).abs() < 0.05, "{ac:?}");
    assert!(eq.values["z"].abs() < 4.0, "{eq:?}");
    let msd = validate::msd_slope(&p, 2_000, seeds(3)).unwrap();
    assert!(msd.values["relative_error"].abs() < 0.1, "{msd:?}");
}

#[test]
fn position_spectrum_against_transfer_function() {
    let c = validate::position_spectrum(&ModelParams::desk_scale(), 200, seeds(4)).unwrap();
    assert!((c.values["band_ratio"] - 1.0).abs() < 0.1, "{c:?}");
    assert!((c.values["log_slope"] + 4.0).abs() < 0.1, "{c:?}");
}

#[test]
fn deterministic_checks_pass() {
    let p = ModelParams::desk_scale();
    assert!(validate::om_three_step(&p).unwrap().passed());
    assert!(validate::phase_quantization(&p).unwrap().passed());
    assert!(validate::line_integral_order(&p).unwrap().passed());
}

#[test]
fn full_battery_at_zero_temperature() {
    let p = ModelParams {
        kt: 0.0,
        ..ModelParams::desk_scale()
    };
    let settings = Settings {
        budget: Budget {
            ensemble_paths: 50,
            ..Budget::default()
        },
        ..Settings::new(1)
    };
    let r = validate::validate(&p, &settings);
    assert!(r.passed);
    let skipped = r.checks.iter().filter(|c| c.status == Status::Skipped).count();
    assert_eq!(skipped, 7);
}

#[test]
fn reports_are_reproducible() {
    let p = ModelParams {
        duration: 4.0,
        ..ModelParams::desk_scale()
    };
    let settings = Settings {
        budget: Budget {
            noise_steps: 10_000,
            ou_paths: 100,
            msd_paths: 100,
            spectrum_paths: 5,
            lattice_samples: 500,
            ensemble_paths: 100,
        },
        ..Settings::new(42)
    };
    let a = geo_langevin::parallel::pool(Some(1))
        .unwrap()
        .install(|| validate::validate(&p, &settings));
    let b = geo_langevin::parallel::pool(Some(3))
        .unwrap()
        .install(|| validate::validate(&p, &settings));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
