use benchcli::config::ExperimentConfig;
use benchcli::criteria::Metric;
use benchcli::experiments::{run_birkhoff, run_trajectory};
use benchcli::output::{fmt_num, to_json, write_atomic, Csv};
use benchcli::svg::{line_plot, Axes, Series};
use proptest::prelude::*;

#[test]
fn csv_has_header_and_seventeen_digits() {
    let mut csv = Csv::new(&["a", "b"]);
    csv.row(&[0.1, -2.0 / 3.0]);
    csv.labelled_row(&["x"], &[0.5]);
    assert_eq!(csv.len(), 2);
    let text = csv.render();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,b");
    assert_eq!(lines[1], "1.0000000000000001e-1,-6.6666666666666663e-1");
    assert_eq!(lines[2], "x,5.0000000000000000e-1");
    assert!(text.ends_with('\n'));
}

proptest! {
    #[test]
    fn formatted_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = fmt_num(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
        prop_assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }
}

#[test]
fn metrics_check_their_bounds() {
    assert!(Metric::range("r", 2.0, 1.7, 2.3).pass);
    assert!(!Metric::range("r", 2.4, 1.7, 2.3).pass);
    assert!(!Metric::at_most("m", f64::NAN, 1.0).pass);
    assert!(Metric::at_least("l", 0.0, 0.0).pass);
    assert!(Metric::info("i", f64::NAN).pass);
    assert!(!Metric::greater_than("g", 0.0, 0.0).pass);
    assert!(Metric::greater_than("g", 1e-3, 0.0).pass);
    assert_eq!(Metric::at_most("m", 0.5, 1e-6).tolerance(), "<= 1e-6");
    assert_eq!(Metric::greater_than("g", 1.0, 0.0).tolerance(), "> 0");
    assert_eq!(Metric::range("r", 1.0, 2.0 / 3.0, 1.5).tolerance(), "[0.666667, 1.5]");
    let json = to_json(&Metric::range("r", 2.0, 1.7, 2.3)).unwrap();
    let keys: Vec<usize> = ["name", "value", "lower", "upper", "exclusive", "pass"]
        .iter()
        .map(|k| json.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "{json}");
}

#[test]
fn atomic_write_replaces_the_whole_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_atomic(dir.path(), "a.txt", "first version, longer").unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "first version, longer");
    write_atomic(dir.path(), "a.txt", "second").unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1, "temporary files must not remain");
    let nested = dir.path().join("x/y");
    write_atomic(&nested, "b.csv", "1\n").unwrap();
    assert!(nested.join("b.csv").exists());
}

#[test]
fn svg_is_well_formed_and_skips_non_positive_log_values() {
    let axes = Axes {
        title: "t <&>",
        x_label: "x",
        y_label: "y",
        log_x: false,
        log_y: true,
    };
    let series = [Series {
        name: "s".into(),
        points: vec![(0.0, 0.0), (1.0, 1.0), (2.0, 10.0)],
    }];
    let svg = line_plot(&axes, &series);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("t &lt;&amp;&gt;"));
    assert_eq!(svg.matches("<circle").count(), 2);
    assert!(!svg.contains("NaN") && !svg.contains("inf"));
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig::parse("E = 0.05, 0.025\nt_end = 2\ncsv_stride = 50\nN = 2, 3\n").unwrap()
}

#[test]
fn trajectory_outputs_are_deterministic() {
    let cfg = small_config();
    let a = run_trajectory(&cfg).unwrap();
    let b = run_trajectory(&cfg).unwrap();
    let names: Vec<&str> = a.artifacts.iter().map(|x| x.name.as_str()).collect();
    assert_eq!(
        names,
        ["trajectory_0.csv", "trajectory_0.svg", "trajectory_1.csv", "trajectory_1.svg", "level_set_deviation.csv"]
    );
    for (x, y) in a.artifacts.iter().zip(&b.artifacts) {
        assert_eq!(x.contents, y.contents, "{}", x.name);
    }
    // 2000 steps thinned by 50, plus the header.
    assert_eq!(a.artifacts[0].contents.lines().count(), 42);
}

#[test]
fn birkhoff_report_is_deterministic_and_reports_c1() {
    let cfg = small_config();
    let a = run_birkhoff(&cfg).unwrap();
    let b = run_birkhoff(&cfg).unwrap();
    assert_eq!(a.artifacts[0].contents, b.artifacts[0].contents);
    assert!(a.summary.contains("c1 = 0.500000000000"), "{}", a.summary);
    let json: serde_json::Value = serde_json::from_str(&a.artifacts[0].contents).unwrap();
    assert!(json["normal_form"]["eig_coeffs"]["c1"].as_f64().is_some());
    for fit in json["residual_fits"].as_array().unwrap() {
        let order = fit["order"].as_f64().unwrap();
        assert!(fit["exponent"].as_f64().unwrap() >= order + 0.7);
    }
}

#[test]
fn constant_field_normal_form_has_no_kappa() {
    let cfg = ExperimentConfig::parse("field = constant 1\nN = 2").unwrap();
    let out = run_birkhoff(&cfg).unwrap();
    assert!(out.summary.contains("max |kappa coefficient| = 0.000e0"), "{}", out.summary);
    assert!(out.summary.contains("not available"));
}
