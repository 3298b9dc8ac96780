//! Flat `key = value` configuration with defaults for every key.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use magwell::fieldlab::{FieldSpec, Gauge, Vec2};
use magwell::symflow::Integrator;
use serde::Serialize;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Trajectory,
    CompareFlows,
    Birkhoff,
    Spectrum,
    Counting,
    Report,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Trajectory,
        ExperimentKind::CompareFlows,
        ExperimentKind::Birkhoff,
        ExperimentKind::Spectrum,
        ExperimentKind::Counting,
        ExperimentKind::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::CompareFlows => "compare-flows",
            ExperimentKind::Birkhoff => "birkhoff",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Counting => "counting",
            ExperimentKind::Report => "report",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Every tunable of the harness. Keys are listed in [`KEYS`]; the README
/// documents their meaning.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    #[serde(serialize_with = "display")]
    pub field: FieldSpec,
    #[serde(serialize_with = "display")]
    pub gauge: Gauge,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Acceptance criteria run by `report`.
    pub criteria: Vec<usize>,
    // trajectory
    /// Gyration amplitudes `E = |q̇|/2 = √H`.
    pub amplitudes: Vec<f64>,
    pub start: Vec2,
    pub t_end: f64,
    pub dt: f64,
    #[serde(serialize_with = "display")]
    pub integrator: Integrator,
    pub csv_stride: usize,
    // compare-flows
    /// Energies `ε = H` of the initial states.
    pub flow_energies: Vec<f64>,
    pub flow_center: Vec2,
    pub flow_t_end: f64,
    pub flow_dt: f64,
    pub flow_stride: usize,
    pub orders: Vec<usize>,
    // birkhoff
    pub fast_order: usize,
    pub slow_order: usize,
    pub ray_angles: Vec<f64>,
    pub ray_radius: f64,
    pub ray_halvings: usize,
    pub symplectic_points: usize,
    // spectrum
    pub hbars: Vec<f64>,
    pub grid_n: usize,
    pub stencil_order: usize,
    /// Box half-width in units of `√ħ`.
    pub box_scale: f64,
    pub eigen_count: usize,
    pub weyl_count: usize,
    pub weyl_half_width: f64,
    pub weyl_momentum: f64,
    pub weyl_cap: f64,
    /// Coarser of the two `ħ` at which the band comparison constant is taken.
    pub weyl_hbar: f64,
    // counting
    pub level: f64,
    pub count_half_width: f64,
    pub count_stencil_order: usize,
    /// Grid spacing at most `spacing_factor·√(ħ/level)`.
    pub spacing_factor: f64,
    /// Half-width of the gap window in units of `ħ`.
    pub gap_window: f64,
    pub localization_hbar: f64,
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            field: FieldSpec::Fig2,
            gauge: Gauge::LandauX,
            output_dir: PathBuf::from("out"),
            seed: 1,
            criteria: (1..=9).collect(),
            amplitudes: vec![0.05, 0.025, 0.0125],
            start: [1.0, 0.0],
            t_end: 500.0,
            dt: 1e-3,
            integrator: Integrator::ImplicitMidpoint,
            csv_stride: 100,
            flow_energies: vec![0.05, 0.025, 0.0125],
            flow_center: [0.3, 0.0],
            flow_t_end: 50.0,
            flow_dt: 1e-3,
            flow_stride: 100,
            orders: vec![2, 3, 4],
            fast_order: 8,
            slow_order: 6,
            ray_angles: vec![0.3, 1.9, 4.0],
            ray_radius: 0.1,
            ray_halvings: 4,
            symplectic_points: 50,
            hbars: vec![0.02, 0.01, 0.005],
            grid_n: 96,
            stencil_order: 8,
            box_scale: 7.0,
            eigen_count: 4,
            weyl_count: 6,
            weyl_half_width: 1.5,
            weyl_momentum: 2.8,
            weyl_cap: 3.0,
            weyl_hbar: 0.01,
            level: 2.5,
            count_half_width: 1.3,
            count_stencil_order: 4,
            spacing_factor: 0.3,
            gap_window: 0.1,
            localization_hbar: 0.01,
        }
    }
}

/// Recognized keys.
pub const KEYS: [&str; 44] = [
    "experiment",
    "field",
    "gauge",
    "output_dir",
    "seed",
    "criteria",
    "amplitudes",
    "start",
    "t_end",
    "dt",
    "integrator",
    "csv_stride",
    "flow_energies",
    "flow_center",
    "flow_t_end",
    "flow_dt",
    "flow_stride",
    "orders",
    "fast_order",
    "slow_order",
    "ray_angles",
    "ray_radius",
    "ray_halvings",
    "symplectic_points",
    "hbars",
    "grid_n",
    "stencil_order",
    "box_scale",
    "eigen_count",
    "weyl_count",
    "weyl_half_width",
    "weyl_momentum",
    "weyl_cap",
    "weyl_hbar",
    "level",
    "count_half_width",
    "count_stencil_order",
    "spacing_factor",
    "gap_window",
    "localization_hbar",
    // Aliases.
    "E",
    "hbar",
    "N",
    "n",
];

fn config_err(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, BenchError> {
    v.trim()
        .parse()
        .map_err(|_| config_err(format!("{key}: cannot parse '{v}'")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, BenchError> {
    let items: Vec<T> = v
        .split(',')
        .map(|s| number(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(config_err(format!("{key}: empty list")));
    }
    Ok(items)
}

fn pair(key: &str, v: &str) -> Result<Vec2, BenchError> {
    match list::<f64>(key, v)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(config_err(format!("{key}: expected two numbers, got '{v}'"))),
    }
}

/// Field grammar:
///
/// ```text
/// fig2
/// constant <B0>
/// radial <c0>, <c1>, ...          B = Σ c_k r^{2k}
/// polynomial <i>,<j>:<c>; ...     B = Σ c x^i y^j
/// ```
pub fn parse_field(text: &str) -> Result<FieldSpec, BenchError> {
    let text = text.trim();
    let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let rest = rest.trim();
    match head {
        "fig2" if rest.is_empty() => Ok(FieldSpec::Fig2),
        "constant" => Ok(FieldSpec::Constant(number("field", rest)?)),
        "radial" => Ok(FieldSpec::Radial(list("field", rest)?)),
        "polynomial" => {
            let mut terms = Vec::new();
            for term in rest.split(';').map(str::trim).filter(|t| !t.is_empty()) {
                let (exps, coeff) = term
                    .split_once(':')
                    .ok_or_else(|| config_err(format!("field: term '{term}' is not 'i,j:c'")))?;
                let exps: Vec<usize> = list("field", exps)?;
                let [i, j] = exps[..] else {
                    return Err(config_err(format!("field: term '{term}' needs two exponents")));
                };
                terms.push((i, j, number("field", coeff)?));
            }
            if terms.is_empty() {
                return Err(config_err("field: polynomial without terms"));
            }
            Ok(FieldSpec::Polynomial(terms))
        }
        _ => Err(config_err(format!("field: unknown specification '{text}'"))),
    }
}

fn parse_gauge(v: &str) -> Result<Gauge, BenchError> {
    match v.trim() {
        "landau_x" => Ok(Gauge::LandauX),
        "symmetric" => Ok(Gauge::Symmetric),
        other => Err(config_err(format!("gauge: unknown gauge '{other}'"))),
    }
}

impl ExperimentConfig {
    /// Parses configuration text. Unknown keys, section headers and
    /// repeated keys are errors; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let ini = Ini::load_from_str(text).map_err(|e| config_err(format!("syntax: {e}")))?;
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                return Err(config_err(format!("sections are not supported ([{name}])")));
            }
            for (key, value) in props.iter() {
                if !seen.insert(key.to_string()) {
                    return Err(config_err(format!("{key}: given twice")));
                }
                cfg.set(key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), BenchError> {
        match key {
            "experiment" => self.experiment = Some(v.trim().parse().map_err(config_err)?),
            "field" => self.field = parse_field(v)?,
            "gauge" => self.gauge = parse_gauge(v)?,
            "output_dir" => self.output_dir = PathBuf::from(v.trim()),
            "seed" => self.seed = number(key, v)?,
            "criteria" => self.criteria = list(key, v)?,
            "amplitudes" | "E" => self.amplitudes = list(key, v)?,
            "start" => self.start = pair(key, v)?,
            "t_end" => self.t_end = number(key, v)?,
            "dt" => self.dt = number(key, v)?,
            "integrator" => self.integrator = v.trim().parse().map_err(config_err)?,
            "csv_stride" => self.csv_stride = number(key, v)?,
            "flow_energies" => self.flow_energies = list(key, v)?,
            "flow_center" => self.flow_center = pair(key, v)?,
            "flow_t_end" => self.flow_t_end = number(key, v)?,
            "flow_dt" => self.flow_dt = number(key, v)?,
            "flow_stride" => self.flow_stride = number(key, v)?,
            "orders" | "N" => self.orders = list(key, v)?,
            "fast_order" => self.fast_order = number(key, v)?,
            "slow_order" => self.slow_order = number(key, v)?,
            "ray_angles" => self.ray_angles = list(key, v)?,
            "ray_radius" => self.ray_radius = number(key, v)?,
            "ray_halvings" => self.ray_halvings = number(key, v)?,
            "symplectic_points" => self.symplectic_points = number(key, v)?,
            "hbars" | "hbar" => self.hbars = list(key, v)?,
            "grid_n" | "n" => self.grid_n = number(key, v)?,
            "stencil_order" => self.stencil_order = number(key, v)?,
            "box_scale" => self.box_scale = number(key, v)?,
            "eigen_count" => self.eigen_count = number(key, v)?,
            "weyl_count" => self.weyl_count = number(key, v)?,
            "weyl_half_width" => self.weyl_half_width = number(key, v)?,
            "weyl_momentum" => self.weyl_momentum = number(key, v)?,
            "weyl_cap" => self.weyl_cap = number(key, v)?,
            "weyl_hbar" => self.weyl_hbar = number(key, v)?,
            "level" => self.level = number(key, v)?,
            "count_half_width" => self.count_half_width = number(key, v)?,
            "count_stencil_order" => self.count_stencil_order = number(key, v)?,
            "spacing_factor" => self.spacing_factor = number(key, v)?,
            "gap_window" => self.gap_window = number(key, v)?,
            "localization_hbar" => self.localization_hbar = number(key, v)?,
            other => return Err(config_err(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Positivity and non-emptiness of every numeric parameter.
    pub fn validate(&self) -> Result<(), BenchError> {
        let positive = [
            ("t_end", self.t_end),
            ("dt", self.dt),
            ("flow_t_end", self.flow_t_end),
            ("flow_dt", self.flow_dt),
            ("ray_radius", self.ray_radius),
            ("box_scale", self.box_scale),
            ("weyl_half_width", self.weyl_half_width),
            ("weyl_momentum", self.weyl_momentum),
            ("weyl_cap", self.weyl_cap),
            ("weyl_hbar", self.weyl_hbar),
            ("level", self.level),
            ("count_half_width", self.count_half_width),
            ("spacing_factor", self.spacing_factor),
            ("gap_window", self.gap_window),
            ("localization_hbar", self.localization_hbar),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("{key} must be positive, got {v}")));
            }
        }
        let lists = [
            ("amplitudes", &self.amplitudes),
            ("flow_energies", &self.flow_energies),
            ("hbars", &self.hbars),
        ];
        for (key, values) in lists {
            if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(config_err(format!("{key}: entries must be positive")));
            }
        }
        let counts = [
            ("csv_stride", self.csv_stride),
            ("flow_stride", self.flow_stride),
            ("grid_n", self.grid_n),
            ("eigen_count", self.eigen_count),
            ("weyl_count", self.weyl_count),
            ("symplectic_points", self.symplectic_points),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(config_err(format!("{key} must be positive")));
            }
        }
        if self.orders.iter().any(|n| *n < 2 || *n > self.fast_order) {
            return Err(config_err(format!(
                "orders must lie in [2, fast_order = {}], got {:?}",
                self.fast_order, self.orders
            )));
        }
        if self.criteria.iter().any(|c| !(1..=9).contains(c)) {
            return Err(config_err(format!("criteria must lie in 1..=9, got {:?}", self.criteria)));
        }
        if self.ray_angles.is_empty() {
            return Err(config_err("ray_angles: empty list"));
        }
        Ok(())
    }
}
