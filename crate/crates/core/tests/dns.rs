use num_complex::Complex64;
use wavebif::dns::*;
use wavebif::spectral::mat_vec;
use wavebif::{FluxModel, NormalizedParameters};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(n: usize, seed: u64, scale: f64) -> FieldState {
    let mut s = FieldState::zeros(n).unwrap();
    s.add_noise(seed, scale, n / 2 - 1);
    s
}

/// Apply `exp(t M_k)` mode by mode.
fn propagate_exact(s: &FieldState, a: f64, delta: f64, f: &FluxModel, t: f64) -> FieldState {
    let mut out = s.clone();
    for k in 1..s.n() / 2 {
        let e = linear_propagator(k as i64, a, delta, f, t).unwrap();
        let (tau, u) = s.coefficient(k as i64);
        let v = mat_vec(&e, [tau, u]);
        out.set_mode(k, v[0], v[1]).unwrap();
    }
    out.time = s.time + t;
    out
}

#[test]
fn linear_problems_are_exact_for_any_dt() {
    let f = FluxModel::new(-1.0, 0.0, 0.0);
    let (a, delta) = (1.0, 0.0);
    let s0 = random_state(32, 4, 0.5);
    for scheme in [Scheme::Etdrk4, Scheme::StrangSplit] {
        for (dt, steps) in [(0.37, 10), (7.3, 1), (1e-3, 50)] {
            let cfg = StepperConfig {
                dt,
                scheme,
                ..StepperConfig::new(dt)
            };
            let mut st = Stepper::new(32, NormalizedParameters::normalized(a, delta), f.clone(), cfg).unwrap();
            let mut s = s0.clone();
            for _ in 0..steps {
                st.step(&mut s).unwrap();
            }
            let exact = propagate_exact(&s0, a, delta, &f, dt * steps as f64);
            assert!(s.max_diff(&exact) < 1e-12, "{scheme:?} dt={dt}: {}", s.max_diff(&exact));
        }
    }
}

#[test]
fn single_mode_step_matches_propagator() {
    let f = FluxModel::new(0.0, 0.0, 0.0);
    let mut s = FieldState::zeros(16).unwrap();
    s.set_mode(3, c(0.2, -0.1), c(0.05, 0.3)).unwrap();
    let mut st = Stepper::new(
        16,
        NormalizedParameters::normalized(1.0, 1.0),
        f.clone(),
        StepperConfig::new(0.25),
    )
    .unwrap();
    let mut t = s.clone();
    st.step(&mut t).unwrap();
    let e = linear_propagator(3, 1.0, 1.0, &f, 0.25).unwrap();
    let v = mat_vec(&e, [c(0.2, -0.1), c(0.05, 0.3)]);
    assert!((t.tau_coefficient(3) - v[0]).norm() < 1e-15);
    assert!((t.u_coefficient(3) - v[1]).norm() < 1e-15);
    for k in [1, 2, 4, 7] {
        assert_eq!(t.coefficient(k), (c(0.0, 0.0), c(0.0, 0.0)));
    }
}

#[test]
fn nonlinear_term_of_single_cosine() {
    let f = FluxModel::new(0.0, 1.0, 0.0);
    let mut s = FieldState::zeros(32).unwrap();
    s.set_mode(1, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    for dealias in [Dealias::ZeroPadDouble, Dealias::TwoThirds] {
        let cfg = StepperConfig {
            dealias,
            ..StepperConfig::new(0.1)
        };
        let out = nonlinear_term(&s, &f, cfg).unwrap();
        assert!(out.tau_modes().iter().all(|z| *z == c(0.0, 0.0)));
        for k in 1..16 {
            let want = if k == 2 { c(0.0, 1.0) } else { c(0.0, 0.0) };
            assert!((out.u_coefficient(k) - want).norm() < 1e-14, "k={k}");
        }
    }
    let zero = nonlinear_term(&FieldState::zeros(32).unwrap(), &f, StepperConfig::new(0.1)).unwrap();
    assert_eq!(zero, FieldState::zeros(32).unwrap());
}

#[test]
fn cubic_term_is_exact_with_padding() {
    // tau = 2 cos x: tau^3 / 6 = (3 cos x + cos 3x) / 3
    let f = FluxModel::new(0.0, 0.0, 1.0);
    let mut s = FieldState::zeros(16).unwrap();
    s.set_mode(1, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let out = nonlinear_term(&s, &f, StepperConfig::new(0.1)).unwrap();
    assert!((out.u_coefficient(1) - c(0.0, 0.5)).norm() < 1e-14);
    assert!((out.u_coefficient(3) - c(0.0, 0.5)).norm() < 1e-14);
}

type Transformation = Box<dyn Fn(&FieldState) -> FieldState>;

#[test]
fn step_commutes_with_shift_and_reflection() {
    let f = FluxModel::new(0.0, 1.0, 2.0);
    let n = 64;
    let s = random_state(n, 11, 0.05);
    for scheme in [Scheme::Etdrk4, Scheme::StrangSplit] {
        let cfg = StepperConfig {
            scheme,
            ..StepperConfig::new(0.5)
        };
        let mut st = Stepper::new(n, NormalizedParameters::normalized(1.0, 1.01), f.clone(), cfg).unwrap();
        let cell = 2.0 * std::f64::consts::PI / n as f64;
        let transforms: [Transformation; 3] = [
            Box::new(move |x| x.shifted(cell)),
            Box::new(|x| x.shifted(-2.3)),
            Box::new(|x| x.reflected()),
        ];
        for t in &transforms {
            let mut a = t(&s);
            st.step(&mut a).unwrap();
            let mut b = s.clone();
            st.step(&mut b).unwrap();
            assert!(a.max_diff(&t(&b)) < 1e-10);
        }
    }
}

fn nonlinear_run(scheme: Scheme, dt: f64, t_end: f64) -> FieldState {
    let f = FluxModel::new(0.0, 1.0, 2.0);
    let mut s = FieldState::zeros(32).unwrap();
    s.set_mode(1, c(0.4, 0.0), c(0.0, -0.4)).unwrap();
    s.set_mode(2, c(0.0, 0.1), c(0.05, 0.0)).unwrap();
    let cfg = StepperConfig {
        scheme,
        ..StepperConfig::new(dt)
    };
    let mut st = Stepper::new(32, NormalizedParameters::normalized(1.0, 1.01), f, cfg).unwrap();
    evolve(s, &mut st, t_end, &ObserverConfig::default()).unwrap().state
}

fn observed_order(scheme: Scheme, dts: [f64; 3]) -> (f64, f64) {
    let t_end = 4.0;
    let reference = nonlinear_run(Scheme::Etdrk4, 1e-3, t_end);
    let e: Vec<f64> = dts
        .iter()
        .map(|&dt| nonlinear_run(scheme, dt, t_end).max_diff(&reference))
        .collect();
    ((e[0] / e[1]).log2(), (e[1] / e[2]).log2())
}

#[test]
fn strang_is_at_least_second_order() {
    // coarser steps sit in the stiff pre-asymptotic range where the observed order dips
    let (p1, p2) = observed_order(Scheme::StrangSplit, [0.0125, 0.00625, 0.003125]);
    assert!(p1 > 1.9 && p2 > 1.9, "{p1} {p2}");
}

#[test]
fn etdrk4_is_fourth_order() {
    let (p1, p2) = observed_order(Scheme::Etdrk4, [0.05, 0.025, 0.0125]);
    assert!(p1 > 3.7 && p2 > 3.7, "{p1} {p2}");
}

#[test]
fn near_onset_growth_rate() {
    // config A with sigma''' = 2: a = 1, so the rate is mu.
    let mu = 0.005;
    let f = FluxModel::new(0.0, 0.0, 2.0);
    let mut st = Stepper::new(
        64,
        NormalizedParameters::normalized(1.0, 1.0 + mu),
        f,
        StepperConfig::new(0.5),
    )
    .unwrap();
    let mut s = FieldState::zeros(64).unwrap();
    s.set_mode(1, c(1e-7, 0.0), c(0.0, -1e-7)).unwrap();
    let ev = evolve(s, &mut st, 600.0, &ObserverConfig { stride: 20, k0: 1 }).unwrap();
    let pts: Vec<(f64, f64)> = ev
        .records
        .iter()
        .filter(|r| r.t >= 100.0)
        .map(|r| (r.t, r.abs_tau_k0.ln()))
        .collect();
    let slope = wavebif::harness::fit_slope(&pts).unwrap();
    assert!(((slope - mu) / mu).abs() < 0.05, "{slope}");
}

#[test]
fn mean_stays_exactly_zero() {
    let f = FluxModel::new(0.0, 1.0, 2.0);
    let mut st = Stepper::new(
        32,
        NormalizedParameters::normalized(1.0, 1.01),
        f,
        StepperConfig::new(0.1),
    )
    .unwrap();
    let s = random_state(32, 2, 0.05);
    let ev = evolve(s, &mut st, 1000.0, &ObserverConfig { stride: 100, k0: 1 }).unwrap();
    assert_eq!(ev.state.coefficient(0), (c(0.0, 0.0), c(0.0, 0.0)));
    assert!(ev
        .records
        .iter()
        .all(|r| r.mean_tau.abs() < 1e-12 && r.mean_u.abs() < 1e-12));
}

#[test]
fn decay_below_threshold() {
    let f = FluxModel::new(0.0, 0.0, 2.0);
    let mut st = Stepper::new(
        64,
        NormalizedParameters::normalized(1.0, 0.99),
        f,
        StepperConfig::new(0.5),
    )
    .unwrap();
    let s = random_state(64, 5, 1e-3);
    let ev = evolve(s, &mut st, 2000.0, &ObserverConfig { stride: 100, k0: 1 }).unwrap();
    assert!(ev.records.last().unwrap().abs_tau_k0 < 1e-5);
}

#[test]
fn subcritical_large_data_blows_up() {
    let f = FluxModel::new(0.0, 0.0, -2.0);
    let mut st = Stepper::new(
        32,
        NormalizedParameters::normalized(1.0, 1.01),
        f,
        StepperConfig::new(0.05),
    )
    .unwrap();
    let mut s = FieldState::zeros(32).unwrap();
    s.set_mode(1, c(1.0, 0.0), c(0.0, -1.0)).unwrap();
    match evolve(s, &mut st, 1000.0, &ObserverConfig::default()) {
        Err(wavebif::error::Error::Blowup { time }) => assert!(time > 0.0 && time < 1000.0),
        other => panic!("expected blowup, got {:?}", other.map(|e| e.state.time)),
    }
}

#[test]
fn checkpoint_restart_is_seamless() {
    let f = FluxModel::new(0.0, 1.0, 2.0);
    let p = NormalizedParameters::normalized(1.0, 1.01);
    let obs = ObserverConfig::default();
    let s = random_state(32, 8, 0.05);
    let mut st = Stepper::new(32, p, f.clone(), StepperConfig::new(0.25)).unwrap();
    let straight = evolve(s.clone(), &mut st, 20.0, &obs).unwrap().state;
    let half = evolve(s, &mut st, 10.0, &obs).unwrap().state;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    write_checkpoint(&half, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 32 * 32);
    let back = read_checkpoint(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, half);
    let resumed = evolve(back, &mut st, 20.0, &obs).unwrap().state;
    assert_eq!(resumed, straight);
}
