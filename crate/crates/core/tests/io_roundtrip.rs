use proptest::prelude::*;
use spacelike_mcf::flow::{run, FlowConfig, FlowMode};
use spacelike_mcf::grid::{BoundaryKind, DomainSpec, GraphState};
use spacelike_mcf::io::{parse_config, parse_config_with, read_snapshot, snapshot_from_json, snapshot_to_json, write_snapshot, Format};

const BASE: &str = r#"
schema_version = 1
signature = [1, 1]
checks = ["h_decay"]
initial = { type = "cosine", amplitude = 0.1 }

[domain]
kind = "interval"
bounds = [[0.0, 1.0]]
resolution = [16]
boundary = "neumann"

[flow]
mode = "neumann"
t_end = 0.25
"#;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
        Just(-0.0),
        Just(1.0 / 3.0),
        prop::num::f64::NORMAL,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshot_is_bit_exact(
        cells in 3usize..12,
        m in 1usize..=3,
        t in finite(),
        seed in prop::collection::vec(finite(), 39),
    ) {
        let d = DomainSpec::interval(-1.0, 2.0, cells, BoundaryKind::Dirichlet);
        let u: Vec<f64> = (0..(cells + 1) * m).map(|k| seed[k % seed.len()]).collect();
        let s = GraphState::new(d, m, t, u).unwrap().with_current_boundary().unwrap();
        let back = snapshot_from_json(&snapshot_to_json(&s).unwrap()).unwrap();
        prop_assert_eq!(back.t.to_bits(), s.t.to_bits());
        for (a, b) in back.u.iter().zip(&s.u) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back, s);
    }

    #[test]
    fn config_survives_both_formats(t_end in 0.01f64..10.0, amp in 0.0f64..0.2, cells in 4usize..200) {
        let over = [format!("flow.t_end={t_end:e}"), format!("initial.amplitude={amp:e}"), format!("domain.resolution.0={cells}")];
        let cfg = parse_config_with(BASE, Format::Toml, &over).unwrap();
        prop_assert_eq!(cfg.flow.t_end, t_end);
        prop_assert_eq!(cfg.domain.resolution[0], cells);
        let via_json = parse_config(&cfg.to_json(), Format::Json).unwrap();
        let via_toml = parse_config(&cfg.to_toml().unwrap(), Format::Toml).unwrap();
        prop_assert_eq!(&via_json, &cfg);
        prop_assert_eq!(&via_toml, &cfg);
        prop_assert_eq!(via_json.hash(), cfg.hash());
    }
}

#[test]
fn non_finite_snapshot_is_refused() {
    let d = DomainSpec::interval(0.0, 1.0, 4, BoundaryKind::Neumann);
    let s = GraphState::new(d, 1, 0.0, vec![0.0, f64::NAN, 0.0, 0.0, 0.0]).unwrap();
    assert!(snapshot_to_json(&s).is_err());
}

#[test]
fn overrides_and_unknown_keys() {
    assert!(parse_config(BASE, Format::Toml).is_ok());
    assert!(parse_config(&format!("{BASE}\nbogus = 1\n"), Format::Toml).is_err());
    assert!(parse_config_with(BASE, Format::Toml, &["flow.nonsense=1".into()]).is_err());
    assert!(parse_config_with(BASE, Format::Toml, &["flow.t_end=-1".into()]).is_err());
    assert!(parse_config_with(BASE, Format::Toml, &["signature=[2, 1]".into()]).is_err());
    assert!(parse_config_with(BASE, Format::Toml, &["no_equals_sign".into()]).is_err());
}

#[test]
fn replay_from_snapshot_continues_the_run() {
    let d = DomainSpec::interval(0.0, 1.0, 32, BoundaryKind::Neumann);
    let s = GraphState::from_fn(d, 1, 0.0, |x, out| out[0] = 0.1 * (std::f64::consts::PI * x[0]).cos()).unwrap();
    let dt = 1.0 / 8192.0;
    let cfg = |t_end: f64| FlowConfig { fixed_dt: Some(dt), ..FlowConfig::new(FlowMode::Neumann, t_end) };

    let whole = run(&cfg(0.25), &s).unwrap();
    let first = run(&cfg(0.125), &s).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.json");
    write_snapshot(&path, first.last()).unwrap();
    let resumed = run(&cfg(0.25), &read_snapshot(&path).unwrap()).unwrap();

    assert_eq!(resumed.last().t.to_bits(), whole.last().t.to_bits());
    assert_eq!(resumed.last().u, whole.last().u);
}
