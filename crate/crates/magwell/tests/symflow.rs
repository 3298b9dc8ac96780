use std::f64::consts::PI;

use magwell::fieldlab::*;
use magwell::numeric::loglog_slope;
use magwell::symflow::*;
use proptest::prelude::*;

fn unit_setup() -> (MagneticField, VectorPotential) {
    let f = MagneticField::constant(1.0).unwrap();
    let a = VectorPotential::build(&f, Gauge::Symmetric).unwrap();
    (f, a)
}

fn fig2_setup() -> (MagneticField, VectorPotential) {
    let f = MagneticField::fig2();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    (f, a)
}

/// State at `q` with velocity `v`, i.e. `p = A(q) + v/2`.
fn with_velocity(pot: &VectorPotential, q: Vec2, v: Vec2) -> PhaseState {
    let a = pot.eval(q);
    PhaseState::new(q, [a[0] + 0.5 * v[0], a[1] + 0.5 * v[1]])
}

#[test]
fn hamiltonian_examples() {
    let (f, a) = unit_setup();
    assert_eq!(hamiltonian(&a, &PhaseState::new([0.0, 0.0], [0.5, 0.0])), 0.25);
    assert_eq!(hamiltonian(&a, &sigma_embed(&a, [0.3, 0.9])), 0.0);
    let s = with_velocity(&a, [0.2, 0.1], [0.6, -0.8]);
    assert!((hamiltonian(&a, &s) - 0.25).abs() < 1e-15);
    let g = guiding_center(&f, &a, &s);
    assert!((g.radius - 0.5).abs() < 1e-15);
}

#[test]
fn unit_field_circle_radius_and_period() {
    let (f, a) = unit_setup();
    let s0 = with_velocity(&a, [0.0, 0.0], [1.0, 0.0]);
    let c0 = guiding_center(&f, &a, &s0).center;
    // Clockwise rotation: the centre sits at (0, −1/2).
    assert!((c0[0]).abs() < 1e-15 && (c0[1] + 0.5).abs() < 1e-15);
    let traj = integrate_h(&f, &a, s0, 2.0 * PI, 1e-3, Integrator::Composition4).unwrap();
    let mut worst_r: f64 = 0.0;
    for s in &traj.states {
        let r = ((s.q[0] - c0[0]).powi(2) + (s.q[1] - c0[1]).powi(2)).sqrt();
        worst_r = worst_r.max((r - 0.5).abs());
        let g = guiding_center(&f, &a, s);
        assert!((g.center[0] - c0[0]).abs() < 1e-10 && (g.center[1] - c0[1]).abs() < 1e-10);
    }
    assert!(worst_r < 1e-6);
    // First return of the angle to zero, linearly interpolated.
    let angle = |s: &PhaseState| (s.q[1] - c0[1]).atan2(s.q[0] - c0[0]);
    let mut period = f64::NAN;
    let base = angle(&traj.states[0]);
    let mut unwrapped = 0.0;
    let mut prev = base;
    for i in 1..traj.len() {
        let th = angle(&traj.states[i]);
        let mut d = th - prev;
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        let before = unwrapped;
        unwrapped += d;
        prev = th;
        if unwrapped <= -2.0 * PI {
            let frac = (-2.0 * PI - before) / (unwrapped - before);
            period = traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]);
            break;
        }
    }
    assert!((period - PI).abs() < 1e-6, "period {period}");
}

#[test]
fn midpoint_energy_drift_over_long_time() {
    let (f, a) = unit_setup();
    let s0 = with_velocity(&a, [0.0, 0.0], [1.0, 0.0]);
    let traj = integrate_h_with(&f, &a, s0, 500.0, 1e-3, Integrator::ImplicitMidpoint, 100).unwrap();
    assert!(traj.relative_energy_drift() <= 1e-8);

    let (f, a) = fig2_setup();
    let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 0.4]);
    // The midpoint rule conserves quadratic invariants only; on a curved
    // field its energy error is a bounded O(dt²) oscillation.
    let traj = integrate_h_with(&f, &a, s0, 100.0, 1e-3, Integrator::ImplicitMidpoint, 100).unwrap();
    assert!(traj.relative_energy_drift() <= 1e-5, "{}", traj.relative_energy_drift());
    let traj = integrate_h_with(&f, &a, s0, 500.0, 1e-3, Integrator::Composition4, 100).unwrap();
    assert!(traj.relative_energy_drift() <= 1e-8, "{}", traj.relative_energy_drift());
}

#[test]
fn angular_velocity_from_phase_fit() {
    let (f, a) = unit_setup();
    let s0 = with_velocity(&a, [0.0, 0.0], [1.0, 0.0]);
    let traj = integrate_h(&f, &a, s0, 3.0, 1e-3, Integrator::Composition4).unwrap();
    let mut phases = Vec::new();
    let mut prev = 0.0f64;
    let mut acc = 0.0;
    for s in &traj.states {
        let v = [2.0 * (s.p[0] + 0.5 * s.q[1]), 2.0 * (s.p[1] - 0.5 * s.q[0])];
        let th = v[1].atan2(v[0]);
        let mut d = th - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        acc += d;
        prev = th;
        phases.push(acc);
    }
    let (slope, _) = magwell::numeric::linear_fit(&traj.times, &phases);
    assert!((slope + 2.0).abs() < 1e-6, "{slope}");
}

#[test]
fn start_on_sigma_is_stationary() {
    let (f, a) = fig2_setup();
    let s0 = sigma_embed(&a, [0.5, -0.3]);
    for m in [Integrator::ImplicitMidpoint, Integrator::Boris, Integrator::Composition4] {
        let traj = integrate_h(&f, &a, s0, 5.0, 1e-3, m).unwrap();
        assert!(traj.states.iter().all(|s| s.distance(&s0) < 1e-14));
    }
}

#[test]
fn reversibility() {
    let (f, a) = fig2_setup();
    let s0 = with_velocity(&a, [1.0, 0.0], [0.1, 0.45]);
    for m in [Integrator::ImplicitMidpoint, Integrator::Composition4, Integrator::Boris] {
        let fwd = integrate_h_with(&f, &a, s0, 20.0, 1e-3, m, 1000).unwrap();
        let back = integrate_h_with(&f, &a, *fwd.last(), 20.0, -1e-3, m, 1000).unwrap();
        assert!(back.last().distance(&s0) < 1e-7, "{m}: {}", back.last().distance(&s0));
    }
}

#[test]
fn boris_preserves_speed_and_tracks_midpoint() {
    let (f, a) = fig2_setup();
    let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 0.45]);
    let boris = integrate_h_with(&f, &a, s0, 10.0, 1e-4, Integrator::Boris, 100).unwrap();
    assert!(boris.relative_energy_drift() < 1e-12);
    let mid = integrate_h_with(&f, &a, s0, 10.0, 1e-4, Integrator::Composition4, 100).unwrap();
    assert!(boris.last().distance(mid.last()) < 1e-3);
}

#[test]
fn step_rules() {
    let (f, a) = fig2_setup();
    let s0 = sigma_embed(&a, [0.0, 0.0]);
    assert!(matches!(
        integrate_h(&f, &a, s0, 1.0, 0.01, Integrator::ImplicitMidpoint),
        Err(FlowError::StepTooLarge { .. })
    ));
    assert!(matches!(
        integrate_h(&f, &a, s0, 1.0, 0.0, Integrator::ImplicitMidpoint),
        Err(FlowError::InvalidStep { .. })
    ));
    assert!(matches!(
        integrate_h(&f, &a, s0, -1.0, 1e-3, Integrator::ImplicitMidpoint),
        Err(FlowError::InvalidHorizon { .. })
    ));
}

#[test]
fn leaving_the_domain_is_reported() {
    let f = MagneticField::constant(1.0).unwrap().with_domain(Rect::square(1.0)).unwrap();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    let s0 = with_velocity(&a, [0.0, 0.0], [4.0, 0.0]);
    assert!(matches!(
        integrate_h(&f, &a, s0, 10.0, 1e-3, Integrator::ImplicitMidpoint),
        Err(FlowError::LeftDomain { .. })
    ));
}

#[test]
fn fig2_orbit_is_bounded_and_hugs_a_level_set() {
    let (f, a) = fig2_setup();
    let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 2.0 * 0.05f64.sqrt()]);
    let traj = integrate_h_with(&f, &a, s0, 500.0, 1e-3, Integrator::ImplicitMidpoint, 10).unwrap();
    assert!(traj.states.iter().all(|s| s.q[0].abs() < 2.0 && s.q[1].abs() < 2.0));
    assert!(level_set_deviation(&f, &a, &traj) < 0.2);
}

/// Level-set deviation at three amplitudes `E = |q̇|/2`: the fit in `log E`
/// should have slope near 2.
#[test]
fn level_set_drift_is_quadratic_in_amplitude() {
    let (f, a) = fig2_setup();
    let amps = [0.05, 0.025, 0.0125];
    let devs: Vec<f64> = amps
        .iter()
        .map(|&e| {
            let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 2.0 * e]);
            let traj = integrate_h_with(&f, &a, s0, 100.0, 1e-3, Integrator::ImplicitMidpoint, 1).unwrap();
            level_set_deviation(&f, &a, &traj)
        })
        .collect();
    let slope = loglog_slope(&amps, &devs);
    assert!((1.7..=2.3).contains(&slope), "slope {slope}, {devs:?}");
}

#[test]
fn csv_layout() {
    let (f, a) = unit_setup();
    let s0 = with_velocity(&a, [0.0, 0.0], [1.0, 0.0]);
    let traj = integrate_h_with(&f, &a, s0, 0.01, 1e-3, Integrator::ImplicitMidpoint, 5).unwrap();
    let text = trajectory_csv(&f, &a, &traj);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,q1,q2,p1,p2,H,c1,c2,I,B_at_c");
    assert_eq!(lines.len(), 1 + traj.len());
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[5], 0.25);
    assert_eq!(row[7], -0.5);
    assert_eq!(row[8], 0.25);
    let digits = lines[1].split(',').nth(5).unwrap().split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(digits.len(), 17);
}

#[test]
fn mirror_points_constant_field_none() {
    let (f, a) = unit_setup();
    let s0 = with_velocity(&a, [0.0, 0.0], [1.0, 0.0]);
    let traj = integrate_h_with(&f, &a, s0, 50.0, 1e-3, Integrator::ImplicitMidpoint, 10).unwrap();
    assert!(mirror_points(&f, &a, &traj).is_empty());
}

#[test]
fn mirror_points_on_fig2_level_set() {
    let (f, a) = fig2_setup();
    let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 0.6]);
    let traj = integrate_h_with(&f, &a, s0, 400.0, 1e-3, Integrator::ImplicitMidpoint, 10).unwrap();
    let events = mirror_points(&f, &a, &traj);
    assert!(!events.is_empty());
}

/// `K = I·B(g⁻¹(z₂))`, the order-2 normal form, with the chain rule through
/// the Darboux chart as derivative.
struct LeadingOrder {
    chart: DarbouxChart,
}

impl SlowHamiltonian for LeadingOrder {
    fn k_and_derivatives(&self, action: f64, z2: Vec2) -> [f64; 4] {
        let q = self.chart.inverse(z2).unwrap();
        let f = self.chart.field();
        let b = f.eval(q);
        let g = f.grad(q);
        let psi1 = self.chart.psi_q1(q).unwrap();
        let dx = g[0] - psi1 * g[1] / b;
        let dxi = g[1] / b;
        [action * b, b, action * dx, action * dxi]
    }
}

struct UnitField;

impl SlowHamiltonian for UnitField {
    fn k_and_derivatives(&self, action: f64, _z2: Vec2) -> [f64; 4] {
        [action, 1.0, 0.0, 0.0]
    }
}

/// Hand-built symplectic chart for `B = 1`, Landau gauge `A = (0, q₁)`.
struct UnitChart;

impl NormalChart for UnitChart {
    fn to_phase(&self, z: &NormalPoint) -> Result<PhaseState, FlowError> {
        let (x1, xi1) = (z.z1[0], z.z1[1]);
        let q = [z.z2[0] + x1, z.z2[1] + xi1];
        Ok(PhaseState::new(q, [xi1, q[0] - x1]))
    }

    fn from_phase(&self, s: &PhaseState) -> Result<NormalPoint, FlowError> {
        let pi = [s.p[0], s.p[1] - s.q[0]];
        let (x1, xi1) = (-pi[1], pi[0]);
        Ok(NormalPoint {
            z1: [x1, xi1],
            z2: [s.q[0] - x1, s.q[1] - xi1],
        })
    }
}

#[test]
fn normal_flow_for_unit_field_rotates_z1() {
    let z0 = NormalPoint { z1: [0.3, -0.1], z2: [0.5, 0.2] };
    let traj = integrate_k(&UnitField, z0, 10.0, 1e-2, Integrator::ImplicitMidpoint, 1).unwrap();
    for (t, z) in traj.times.iter().zip(&traj.points) {
        let (s, c) = (-2.0 * t).sin_cos();
        let expect = [c * 0.3 + 0.1 * s, s * 0.3 - 0.1 * c];
        assert!((z.z1[0] - expect[0]).abs() < 1e-12 && (z.z1[1] - expect[1]).abs() < 1e-12);
        assert_eq!(z.z2, z0.z2);
    }
}

#[test]
fn unit_chart_is_exact_normal_form() {
    let (f, _) = unit_setup();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    let s0 = with_velocity(&a, [0.3, -0.4], [0.8, 0.3]);
    let z0 = UnitChart.from_phase(&s0).unwrap();
    assert!(UnitChart.to_phase(&z0).unwrap().distance(&s0) < 1e-15);
    assert!((hamiltonian(&a, &s0) - z0.action()).abs() < 1e-15);
    let th = integrate_h(&f, &a, s0, 100.0, 1e-3, Integrator::Composition4).unwrap();
    let tk = integrate_k(&UnitField, z0, 100.0, 1e-3, Integrator::Composition4, 1).unwrap();
    let d = compare_flows(&th, &tk, &UnitChart).unwrap();
    assert!(d.max() <= 1e-8, "{}", d.max());

    let short = integrate_k(&UnitField, z0, 50.0, 1e-3, Integrator::Composition4, 1).unwrap();
    assert_eq!(compare_flows(&th, &short, &UnitChart).unwrap_err(), FlowError::MismatchedGrids);
}

/// The slow flow of `I·B∘g⁻¹` must follow the guiding centre of the full
/// flow mapped through the chart, which fixes the orientation of `(x₂, ξ₂)`.
#[test]
fn leading_normal_flow_follows_guiding_center() {
    let (f, a) = fig2_setup();
    let chart = DarbouxChart::new(&f);
    let s0 = with_velocity(&a, [1.0, 0.0], [0.0, 0.2]);
    let g0 = guiding_center(&f, &a, &s0);
    let t_end = 60.0;
    let th = integrate_h_with(&f, &a, s0, t_end, 1e-3, Integrator::ImplicitMidpoint, 1000).unwrap();
    let z0 = NormalPoint {
        z1: [hamiltonian(&a, &s0).sqrt() / g0.field_at_center.sqrt(), 0.0],
        z2: chart.forward(g0.center).unwrap(),
    };
    let nf = LeadingOrder { chart: chart.clone() };
    let tk = integrate_k(&nf, z0, t_end, 1e-2, Integrator::ImplicitMidpoint, 100).unwrap();
    let gc_end = chart.forward(guiding_center(&f, &a, th.last()).center).unwrap();
    let z_end = tk.points.last().unwrap().z2;
    let moved = ((gc_end[0] - z0.z2[0]).powi(2) + (gc_end[1] - z0.z2[1]).powi(2)).sqrt();
    let err = ((gc_end[0] - z_end[0]).powi(2) + (gc_end[1] - z_end[1]).powi(2)).sqrt();
    assert!(moved > 0.1, "drift too small to test: {moved}");
    assert!(err < 0.1 * moved, "err {err}, moved {moved}");
    assert!(tk.points.iter().all(|p| (p.action() - z0.action()).abs() < 1e-14));
}

proptest! {
    #[test]
    fn unit_guiding_center_is_exact(x in -1.0f64..1.0, y in -1.0f64..1.0, vx in -1.0f64..1.0, vy in -1.0f64..1.0) {
        let (f, a) = unit_setup();
        let s0 = with_velocity(&a, [x, y], [vx, vy]);
        let g = guiding_center(&f, &a, &s0);
        prop_assert!((g.action - hamiltonian(&a, &s0)).abs() < 1e-15);
        let traj = integrate_h_with(&f, &a, s0, 1.0, 1e-3, Integrator::ImplicitMidpoint, 50).unwrap();
        for s in &traj.states {
            let gs = guiding_center(&f, &a, s);
            prop_assert!((gs.center[0] - g.center[0]).abs() < 1e-10);
            prop_assert!((gs.center[1] - g.center[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn midpoint_step_is_symmetric(x in -1.0f64..1.0, y in -1.0f64..1.0, h in 1e-3f64..0.1) {
        let f = |v: &[f64; 2]| [v[1], -v[0].sin()];
        let one = midpoint_step(&f, &[x, y], h).unwrap();
        let back = midpoint_step(&f, &one, -h).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-12 && (back[1] - y).abs() < 1e-12);
        let four = yoshida_step(&f, &[x, y], h).unwrap();
        let back = yoshida_step(&f, &four, -h).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-12 && (back[1] - y).abs() < 1e-12);
    }
}
