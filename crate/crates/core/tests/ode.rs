use std::f64::consts::PI;

use cyclostab::error::Error;
use cyclostab::model::presets::{counterexample, two_compartment};
use cyclostab::model::{CompartmentalSystem, GainVector, NonlinearCyclicSystem, ScalarFn};
use cyclostab::ode::{
    compartmental_rhs, detect_oscillation, lumped_rhs, simulate_ode, write_ode_csv, AmplitudeTrend,
    OscillationOptions,
};
use cyclostab::secant::secant_satisfied;
use cyclostab::trajectory::{Layout, Schedule, TimeStep, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_system(a: &[f64], b: &[f64]) -> NonlinearCyclicSystem {
    NonlinearCyclicSystem::lumped(
        a.iter().map(|v| ScalarFn::linear(*v).unwrap()).collect(),
        b.iter().map(|v| ScalarFn::linear(*v).unwrap()).collect(),
    )
    .unwrap()
}

#[test]
fn lumped_examples() {
    assert!(lumped_rhs(&counterexample(), &[1.0; 3]).unwrap().iter().all(|v| v.abs() < 1e-15));
    let out = lumped_rhs(&linear_system(&[1.0; 3], &[1.0; 3]), &[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(out, vec![-1.0, 1.0, 0.0]);
}

#[test]
fn single_compartment_equals_lumped() {
    let base = counterexample();
    let sys = CompartmentalSystem::new(1, base.clone(), vec![]).unwrap();
    let x = [0.7, 1.3, 1.1];
    assert_eq!(compartmental_rhs(&sys, &x).unwrap(), lumped_rhs(&base, &x).unwrap());
}

#[test]
fn identical_compartments_decouple() {
    let sys = two_compartment(0.3).unwrap();
    let x = [0.7, 1.3, 1.1, 0.7, 1.3, 1.1];
    let out = compartmental_rhs(&sys, &x).unwrap();
    let single = lumped_rhs(sys.base(), &x[..3]).unwrap();
    assert_eq!(&out[..3], single.as_slice());
    assert_eq!(&out[3..], single.as_slice());
}

#[test]
fn flux_is_antisymmetric() {
    let base = linear_system(&[0.0; 3], &[0.0; 3]);
    let sys = CompartmentalSystem::uniform(3, base, vec![ScalarFn::linear(0.5).unwrap(); 3]).unwrap();
    let x = [1.0, 2.0, 3.0, 0.5, -1.0, 2.0, 4.0, 0.0, 1.0];
    let out = compartmental_rhs(&sys, &x).unwrap();
    for i in 0..3 {
        let total: f64 = (0..3).map(|j| out[j * 3 + i]).sum();
        assert!(total.abs() < 1e-15);
    }
    // first compartment only sees interface 0
    assert!((out[0] - 0.5 * (0.5 - 1.0)).abs() < 1e-15);
}

#[test]
fn equilibrium_is_kept() {
    let traj = simulate_ode(&counterexample(), &[1.0; 3], &Schedule::new(50.0, TimeStep::Auto, Some(1.0)).unwrap())
        .unwrap();
    assert!(traj.last_state().iter().all(|v| (v - 1.0).abs() < 1e-14));
}

#[test]
fn rk4_is_fourth_order() {
    let sys = linear_system(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
    let x0 = [1.0, 0.0, -0.5];
    let end = |dt: f64| {
        simulate_ode(&sys, &x0, &Schedule::new(2.0, TimeStep::Fixed(dt), None).unwrap())
            .unwrap()
            .last_state()
            .to_vec()
    };
    let reference = end(0.0125);
    let err = |x: Vec<f64>| x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ratio = err(end(0.1)) / err(end(0.05));
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

fn series(f: impl Fn(f64) -> f64, t_end: f64, samples: usize) -> Trajectory {
    let times: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
    let states = times.iter().map(|t| vec![f(*t)]).collect();
    Trajectory::from_samples(times, states, Layout::Lumped { n: 1 }).unwrap()
}

#[test]
fn synthetic_signals() {
    let period = 2.5;
    let t = series(|t| (2.0 * PI * t / period).sin(), 50.0, 5001);
    let r = detect_oscillation(&t, 0, &OscillationOptions::default()).unwrap();
    assert!(r.oscillating);
    assert!((r.period.unwrap() - period).abs() <= 2.0 * 0.01);
    assert_eq!(r.trend, Some(AmplitudeTrend::Sustained));

    let decay = detect_oscillation(&series(|t| (-t).exp(), 10.0, 1001), 0, &OscillationOptions::default()).unwrap();
    assert!(!decay.oscillating);
    assert_eq!(decay.peaks, 0);

    let flat = detect_oscillation(&series(|_| 3.0, 10.0, 1001), 0, &OscillationOptions::default()).unwrap();
    assert!(!flat.oscillating);

    let growing = detect_oscillation(
        &series(|t| (0.05 * t).exp() * (2.0 * PI * t).sin(), 40.0, 8001),
        0,
        &OscillationOptions::default(),
    )
    .unwrap();
    assert_eq!(growing.trend, Some(AmplitudeTrend::Growing));
}

#[test]
fn short_window_is_an_error() {
    let err = detect_oscillation(&series(|t| t.sin(), 10.0, 150), 0, &OscillationOptions::default()).unwrap_err();
    assert!(matches!(err, Error::WindowTooShort { .. }));
}

#[test]
fn csv_header() {
    let sys = two_compartment(0.1).unwrap();
    let traj = simulate_ode(&sys, &[1.0; 6], &Schedule::new(0.01, TimeStep::Auto, None).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_ode_csv(&traj, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().any(|l| l == "t,x_1_1,x_1_2,x_1_3,x_2_1,x_2_2,x_2_3"));
}

/// Piecewise-linear nondecreasing output with slopes in [lo, hi] on a wide table.
fn monotone_table(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (ScalarFn, f64) {
    let xs = vec![-100.0, -1.0, 0.0, 1.0, 100.0];
    let slopes: Vec<f64> = (0..4).map(|_| rng.random_range(lo..hi)).collect();
    let mut ys = vec![0.0; 5];
    ys[1] = -slopes[1];
    ys[0] = ys[1] - 99.0 * slopes[0];
    ys[3] = slopes[2];
    ys[4] = ys[3] + 99.0 * slopes[3];
    // g(s)/s is an average of slopes between 0 and s
    let sector = slopes.iter().cloned().fold(0.0, f64::max);
    (ScalarFn::tabulated(xs, ys).unwrap(), sector)
}

#[test]
fn secant_compartmental_systems_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut systems = Vec::new();
    while systems.len() < 5 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut g = Vec::new();
        let mut gains = Vec::new();
        for ai in &a {
            let (f, s) = monotone_table(&mut rng, 0.3, 1.5);
            gains.push(s / ai);
            g.push(f);
        }
        if !secant_satisfied(&GainVector::new(gains).unwrap()).holds {
            continue;
        }
        let f = a.iter().map(|v| ScalarFn::linear(*v).unwrap()).collect();
        let base = NonlinearCyclicSystem::lumped(f, g).unwrap();
        let m = rng.random_range(2..=4);
        let flux = (0..m - 1)
            .map(|_| (0..3).map(|_| ScalarFn::linear(rng.random_range(0.0..0.5)).unwrap()).collect())
            .collect();
        systems.push(CompartmentalSystem::new(m, base, flux).unwrap());
    }
    let schedule = Schedule::new(500.0, TimeStep::Fixed(0.02), Some(500.0)).unwrap();
    for k in 0..100 {
        let sys = &systems[k % systems.len()];
        let x0: Vec<f64> = (0..sys.m() * 3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let traj = simulate_ode(sys, &x0, &schedule).unwrap();
        let norm = traj.last_state().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-4, "run {k}: |x(500)| = {norm}");
    }
}
