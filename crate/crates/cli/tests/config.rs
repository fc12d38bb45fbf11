use compass_cli::{parse_config, CliError};
use compass_core::experiments::{ScenarioConfig, DEFAULT_ANGLES};
use compass_core::{ModelSpec, RfGeometry};

fn invalid_key(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Invalid { key, .. }) => key,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_document_is_the_reference_scenario() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg.scenario, ScenarioConfig::default());

    let s = &cfg.scenario;
    assert_eq!(s.model, ModelSpec::cigar(1e4));
    assert_eq!(s.field.b0, 47e-6);
    assert_eq!(s.rf_amplitude, 150e-9);
    assert_eq!(s.rf, RfGeometry::Off);
    assert_eq!(s.angle_grid.len(), DEFAULT_ANGLES);
    let nu = s.field.omega / (2.0 * std::f64::consts::PI);
    assert!((nu - 1.316e6).abs() < 1e3, "ν = {nu}");
}

#[test]
fn negative_decay_rate_names_the_key() {
    let err = parse_config("[model]\nk_per_second = -1\n").unwrap_err();
    assert!(err.to_string().contains("positive"), "{err}");
    assert_eq!(invalid_key("[model]\nk_per_second = -1\n"), "model.k_per_second");
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    for text in ["foo = 1\n", "[model]\nfoo = 1\n", "[solver]\nfoo = \"x\"\n"] {
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }), "{err:?}");
        assert!(err.to_string().contains("foo"), "{err}");
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = "name = \"a\"\n\n[model]\nk_per_second = = 3\n";
    match parse_config(text) {
        Err(CliError::Parse { line, column, .. }) => {
            assert_eq!(line, 4);
            assert!(column > 1);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn keys_are_applied_with_units() {
    let cfg = parse_config(
        r#"
name = "disc at 1e5"
angles = 7
channels = "generic-noise"

[model]
preset = "disc"
k_per_second = 1e5
gamma_noise_per_k = 0.1

[field]
b0_tesla = 50e-6
phi_rad = 1.5707963267948966
rf = "perpendicular"
b_rf_tesla = 100e-9

[solver]
dt_seconds = 5e-9
"#,
    )
    .unwrap();
    let s = &cfg.scenario;
    assert_eq!(s.name, "disc at 1e5");
    assert_eq!(s.angle_grid.len(), 7);
    assert_eq!(s.model.nuclei, ModelSpec::disc(1e5).nuclei);
    assert_eq!(s.model.k, 1e5);
    assert_eq!(s.effective_model().gamma_noise, 1e4);
    assert_eq!(s.field.b0, 50e-6);
    assert_eq!(s.rf, RfGeometry::Perpendicular);
    assert_eq!(s.rf_amplitude, 100e-9);
    assert_eq!(s.solver.dt, 5e-9);
}

#[test]
fn validation_errors_name_their_keys() {
    assert_eq!(invalid_key("[field]\nb0_tesla = 0\n"), "field.b0_tesla");
    assert_eq!(invalid_key("[model]\ngamma_z_per_second = -3\n"), "model.gamma_z_per_second");
    assert_eq!(invalid_key("angles = 0\n"), "angles");
    assert_eq!(invalid_key("angle_grid_rad = [0.5, 0.1]\n"), "angle_grid_rad");
    assert_eq!(invalid_key("angle_grid_rad = [2.0]\n"), "angle_grid_rad");
    assert_eq!(invalid_key("[field]\nrf = \"fixed\"\n"), "field.rf_theta_rad");
    assert_eq!(invalid_key("[solver]\nrf_phase_samples = 0\n"), "solver.rf_phase_samples");
    assert_eq!(invalid_key("[negativity]\ntheta_rad = 3.0\n"), "negativity.theta_rad");
    assert_eq!(
        invalid_key("[model]\ngamma_noise_per_k = 0.1\ngamma_noise_per_second = 5.0\n"),
        "model.gamma_noise_per_k"
    );
    assert_eq!(
        invalid_key("[model]\nnuclei = [{ax_mev = 1, ay_mev = 1, az_mev = 1}, {ax_mev = 1, ay_mev = 1, az_mev = 1}, {ax_mev = 1, ay_mev = 1, az_mev = 1}]\n"),
        "model.nuclei"
    );
}

#[test]
fn negativity_section_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg.negativity.theta, std::f64::consts::FRAC_PI_4);
    assert_eq!(cfg.negativity.gammas, vec![0.0, 1e2, 1e3, 1e4]);
    assert_eq!(cfg.negativity.t_end, 300e-6);
}
