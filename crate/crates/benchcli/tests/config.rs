use benchcli::config::{parse_field, ExperimentConfig, ExperimentKind, KEYS};
use benchcli::BenchError;
use magwell::fieldlab::{FieldSpec, Gauge};
use magwell::symflow::Integrator;

fn config_error(text: &str) -> String {
    match ExperimentConfig::parse(text) {
        Err(BenchError::Config(msg)) => msg,
        other => panic!("expected a config error for {text:?}, got {other:?}"),
    }
}

#[test]
fn empty_text_gives_defaults() {
    let cfg = ExperimentConfig::parse("").unwrap();
    assert_eq!(cfg.experiment, None);
    assert_eq!(cfg.field, FieldSpec::Fig2);
    assert_eq!(cfg.gauge, Gauge::LandauX);
    assert_eq!(cfg.amplitudes, vec![0.05, 0.025, 0.0125]);
    assert_eq!(cfg.hbars, vec![0.02, 0.01, 0.005]);
    assert_eq!(cfg.orders, vec![2, 3, 4]);
    assert_eq!(cfg.criteria, (1..=9).collect::<Vec<_>>());
    assert_eq!((cfg.t_end, cfg.dt), (500.0, 1e-3));
    assert_eq!((cfg.fast_order, cfg.slow_order), (8, 6));
}

#[test]
fn keys_comments_and_aliases() {
    let text = "\
# comment line
experiment = spectrum
field = constant 1.5
gauge = symmetric
hbar = 0.02, 0.01
n = 64
N = 2, 3
E = 0.1
integrator = composition4
start = 0.5, -0.25
seed = 42
";
    let cfg = ExperimentConfig::parse(text).unwrap();
    assert_eq!(cfg.experiment, Some(ExperimentKind::Spectrum));
    assert_eq!(cfg.field, FieldSpec::Constant(1.5));
    assert_eq!(cfg.gauge, Gauge::Symmetric);
    assert_eq!(cfg.hbars, vec![0.02, 0.01]);
    assert_eq!(cfg.grid_n, 64);
    assert_eq!(cfg.orders, vec![2, 3]);
    assert_eq!(cfg.amplitudes, vec![0.1]);
    assert_eq!(cfg.integrator, Integrator::Composition4);
    assert_eq!(cfg.start, [0.5, -0.25]);
    assert_eq!(cfg.seed, 42);
}

#[test]
fn every_listed_key_is_accepted() {
    let sample = |key: &str| -> &str {
        match key {
            "experiment" => "report",
            "field" => "fig2",
            "gauge" => "landau_x",
            "output_dir" => "results",
            "integrator" => "boris",
            "start" | "flow_center" => "0.1, 0.2",
            "orders" | "N" => "2, 4",
            "criteria" => "1, 7",
            "seed" | "csv_stride" | "flow_stride" | "ray_halvings" | "symplectic_points" | "grid_n" | "n"
            | "eigen_count" | "weyl_count" => "3",
            "fast_order" => "8",
            "slow_order" | "stencil_order" | "count_stencil_order" => "4",
            _ => "0.5",
        }
    };
    for key in KEYS {
        let text = format!("{key} = {}", sample(key));
        ExperimentConfig::parse(&text).unwrap_or_else(|e| panic!("{key}: {e}"));
    }
}

#[test]
fn rejected_inputs() {
    assert!(config_error("colour = red").contains("unknown key"));
    assert!(config_error("seed = 1\nseed = 2").contains("twice"));
    assert!(config_error("[spectrum]\nn = 4").contains("sections"));
    assert!(config_error("dt = -1e-3").contains("dt"));
    assert!(config_error("t_end = 0").contains("t_end"));
    assert!(config_error("hbar = 0.01, 0").contains("hbars"));
    assert!(config_error("n = 0").contains("grid_n"));
    assert!(config_error("n = many").contains("cannot parse"));
    assert!(config_error("experiment = dance").contains("unknown experiment"));
    assert!(config_error("integrator = euler").contains("integrator"));
    assert!(config_error("gauge = coulomb").contains("gauge"));
    assert!(config_error("start = 1, 2, 3").contains("two numbers"));
    assert!(config_error("N = 1").contains("orders"));
    assert!(config_error("N = 10").contains("orders"));
    assert!(config_error("criteria = 0").contains("criteria"));
    assert!(config_error("amplitudes =").contains("amplitudes"));
}

#[test]
fn field_grammar() {
    assert_eq!(parse_field("fig2").unwrap(), FieldSpec::Fig2);
    assert_eq!(parse_field("  constant 2.5 ").unwrap(), FieldSpec::Constant(2.5));
    assert_eq!(parse_field("radial 1, 0.5").unwrap(), FieldSpec::Radial(vec![1.0, 0.5]));
    assert_eq!(
        parse_field("polynomial 0,0:1; 2,0:1; 0,2:0.5").unwrap(),
        FieldSpec::Polynomial(vec![(0, 0, 1.0), (2, 0, 1.0), (0, 2, 0.5)])
    );
    for bad in ["", "fig3", "fig2 extra", "constant", "radial", "polynomial", "polynomial 1:2", "polynomial 1,2"] {
        assert!(matches!(parse_field(bad), Err(BenchError::Config(_))), "{bad:?}");
    }
}

#[test]
fn experiment_names_round_trip() {
    for kind in ExperimentKind::ALL {
        assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        assert_eq!(kind.to_string(), kind.name());
    }
    assert_eq!("compare-flows".parse::<ExperimentKind>().unwrap(), ExperimentKind::CompareFlows);
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(BenchError::Config("x".into()).exit_code(), 2);
    assert_eq!(BenchError::Numerical("x".into()).exit_code(), 3);
}
