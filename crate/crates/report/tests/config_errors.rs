use timelab_report::{parse_config, ReportError, ScenarioConfig};

fn field_of(err: ReportError) -> String {
    match err {
        ReportError::Config { field, .. } => field,
        other => panic!("expected a config error, got {other}"),
    }
}

const THETA: &str = r#"{ "kind": "theta_record", "m": 1.0, "x0": -2.0, "p_x0": 1.0 }"#;

#[test]
fn negative_mass_names_m() {
    let text = THETA.replace("\"m\": 1.0", "\"m\": -1.0");
    let err = parse_config(&text).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert_eq!(field_of(err), "m");
}

#[test]
fn negative_mass_in_arrival_names_m() {
    let text = r#"{ "kind": "arrival_povm", "m": -2.0,
        "particle": { "x0": -10.0, "p0": 2.0, "sigma": 1.0 },
        "grid": { "x_min": -200.0, "x_max": 200.0 } }"#;
    assert_eq!(field_of(parse_config(text).unwrap_err()), "m");
}

#[test]
fn unknown_field_is_named() {
    let text = THETA.replace("\"x0\"", "\"mass_typo\": 1.0, \"x0\"");
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "mass_typo");
}

#[test]
fn missing_field_is_named() {
    let text = r#"{ "kind": "theta_record", "m": 1.0, "x0": -2.0 }"#;
    assert_eq!(field_of(parse_config(text).unwrap_err()), "p_x0");
}

#[test]
fn unknown_kind_is_rejected() {
    let text = r#"{ "kind": "telepathy", "m": 1.0 }"#;
    assert_eq!(field_of(parse_config(text).unwrap_err()), "kind");
}

#[test]
fn grid_must_be_power_of_two() {
    let text = r#"{ "kind": "arrival_povm", "m": 1.0,
        "particle": { "x0": -10.0, "p0": 2.0, "sigma": 1.0 },
        "grid": { "n_points": 1000, "x_min": -200.0, "x_max": 200.0 } }"#;
    assert_eq!(field_of(parse_config(text).unwrap_err()), "grid.n_points");
}

#[test]
fn defaults_are_filled_in() {
    let text = r#"{ "kind": "arrival_povm", "m": 1.0,
        "particle": { "x0": -10.0, "p0": 2.0, "sigma": 1.0 },
        "grid": { "x_min": -200.0, "x_max": 200.0 } }"#;
    let ScenarioConfig::ArrivalPovm(c) = parse_config(text).unwrap() else { panic!() };
    assert_eq!(c.grid.n_points, 4096);
    assert_eq!(c.n_t, 2048);
    assert_eq!(c.threshold, 0.1);
}

fn sweep_text(axes: &str) -> String {
    format!(
        r#"{{ "kind": "sweep", "base": {{ "kind": "total_energy_ideal", "h_box": 0.5, "p_x": 1.0,
            "coupling": {{ "type": "box", "width": 1.0 }}, "z0": 0.0, "x_range": [-1.0, 2.0] }},
            "axes": {axes} }}"#
    )
}

#[test]
fn empty_axis_list_is_a_config_error() {
    assert_eq!(field_of(parse_config(&sweep_text("[]")).unwrap_err()), "axes");
}

#[test]
fn empty_axis_values_are_a_config_error() {
    let text = sweep_text(r#"[{ "parameter": "z0", "values": [] }]"#);
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "axes");
}

#[test]
fn unknown_axis_parameter_is_a_config_error() {
    let text = sweep_text(r#"[{ "parameter": "warp_factor", "values": [1.0] }]"#);
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("warp_factor"), "{err}");
    assert_eq!(field_of(err), "axes");
}

#[test]
fn swept_values_are_validated() {
    let text = sweep_text(r#"[{ "parameter": "x_range.1", "values": [-5.0] }]"#);
    assert!(parse_config(&text).unwrap_err().is_config());
}

#[test]
fn nested_sweeps_are_rejected() {
    let inner = sweep_text(r#"[{ "parameter": "z0", "values": [0.1] }]"#);
    let text = format!(r#"{{ "kind": "sweep", "base": {inner}, "axes": [{{ "parameter": "z0", "values": [0.1] }}] }}"#);
    assert_eq!(field_of(parse_config(&text).unwrap_err()), "base");
}

#[test]
fn shipped_scenarios_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            timelab_report::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 10);
}
