use wmac::scenario_file::{load_scenario_file, parse_scenario, scenario_to_toml};
use wmac::CliError;
use wmac_core::dynamics::{JointReference, MassTransform};
use wmac_core::scenario::{preset, JumpPlan, PRESET_IDS};

#[test]
fn theta_override_keeps_every_other_default() {
    let spec = parse_scenario("[memory]\ntheta = 0.25\n", "custom").unwrap();
    let mut expected = preset(1).unwrap();
    expected.memory.theta = 0.25;
    expected.id = "custom".into();
    assert_eq!(spec, expected);
}

#[test]
fn empty_document_is_a_validation_error() {
    for text in ["", "\n\n", "# only a comment\n"] {
        assert!(
            matches!(parse_scenario(text, "x"), Err(CliError::Validation(_))),
            "{text:?}"
        );
    }
}

#[test]
fn presets_round_trip() {
    for id in PRESET_IDS {
        let spec = preset(id).unwrap();
        let text = scenario_to_toml(&spec).unwrap();
        assert_eq!(parse_scenario(&text, "ignored").unwrap(), spec, "preset {id}");
    }
}

#[test]
fn preset_file_on_disk_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.toml");
    let spec = preset(1).unwrap();
    std::fs::write(&path, scenario_to_toml(&spec).unwrap()).unwrap();
    assert_eq!(load_scenario_file(&path).unwrap(), spec);
}

#[test]
fn file_name_becomes_the_default_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slow-arm.toml");
    std::fs::write(&path, "duration = 500.0\n").unwrap();
    let spec = load_scenario_file(&path).unwrap();
    assert_eq!(spec.id, "slow-arm");
    assert_eq!(spec.duration, 500.0);
}

#[test]
fn base_preset_can_be_chosen() {
    let spec = parse_scenario("preset = 6\nseed = 3\n", "x").unwrap();
    let mut expected = preset(6).unwrap();
    expected.seed = 3;
    expected.id = "x".into();
    assert_eq!(spec, expected);
    assert!(matches!(
        parse_scenario("preset = 12\n", "x"),
        Err(CliError::Parse { .. })
    ));
}

#[test]
fn tagged_tables_replace_the_preset_value() {
    let text = r#"
duration = 100.0

[jumps]
kind = "periodic_squared_increment"
period = 25.0
fraction = 0.5

[[reference]]
kind = "constant"
value = 0.3

[[reference]]
kind = "sine"
amplitude = 0.5
omega = 1.0
"#;
    let spec = parse_scenario(text, "x").unwrap();
    assert_eq!(
        spec.jumps,
        JumpPlan::PeriodicSquaredIncrement {
            period: 25.0,
            fraction: 0.5
        }
    );
    assert_eq!(spec.jump_schedule().events.len(), 3);
    assert_eq!(spec.reference[0], JointReference::Constant { value: 0.3 });
    assert_eq!(
        spec.reference[1],
        JointReference::Sine {
            amplitude: 0.5,
            omega: 1.0
        }
    );
}

#[test]
fn explicit_jump_list_replaces_the_preset_list() {
    let text =
        "[jumps]\nkind = \"explicit\"\nevents = [{ time = 3.0, transform = { kind = \"scale\", factor = 2.0 } }]\n";
    let spec = parse_scenario(text, "x").unwrap();
    let events = spec.jump_schedule().events;
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].transform, MassTransform::Scale { factor: 2.0 });
}

#[test]
fn syntax_errors_carry_the_line() {
    let err = parse_scenario("seed = 1\n[memory]\ntheta = = 0.3\n", "x").unwrap_err();
    match err {
        CliError::Parse { line, .. } => assert_eq!(line, Some(3)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_fields_carry_line_and_path() {
    let err = parse_scenario("seed = 1\n\n[memory]\nthta = 0.3\n", "x").unwrap_err();
    match err {
        CliError::Parse {
            line, field, message, ..
        } => {
            assert_eq!(line, Some(4));
            assert_eq!(field.as_deref(), Some("memory.thta"));
            assert!(message.contains("thta"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn wrong_types_carry_line_and_path() {
    let err = parse_scenario("[gains]\nkv = \"high\"\n", "x").unwrap_err();
    match err {
        CliError::Parse { line, field, .. } => {
            assert_eq!(line, Some(2));
            assert_eq!(field.as_deref(), Some("gains.kv"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invariant_violations_are_validation_errors() {
    for text in [
        "masses = [0.0, 1.0]\n",
        "[memory]\ntheta = -1.0\n",
        "duration = 100.0\n",
        "[controller]\nhidden = 0\n",
    ] {
        assert!(
            matches!(parse_scenario(text, "x"), Err(CliError::Validation(_))),
            "{text}"
        );
    }
}

#[test]
fn errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[memory]\nthta = 1\n").unwrap();
    let message = load_scenario_file(&path).unwrap_err().to_string();
    assert!(message.contains("broken.toml:2"), "{message}");
}
