use super::*;
use crate::hubbard::FieldSchedule;

fn small_config(restarts: usize) -> SolveConfig {
    SolveConfig {
        optimizer: OptimizerConfig {
            restarts,
            max_evals: 1500,
            ..Default::default()
        },
        reps: 2,
        ..Default::default()
    }
}

fn plaquette(u: f64) -> LatticeSpec {
    LatticeSpec::new(2, 2, -1.0, u).with_schedule(FieldSchedule::Abs)
}

fn check_shape(r: &RunResult) {
    let min = r.restart_energies.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(r.energy, min);
    assert_eq!(r.restart_energies[r.selected_restart], r.energy);
    assert!(r.candidates.iter().all(|c| r.energy <= c.energy));
    assert_eq!(r.gate_count, r.circuit.len());
}

#[test]
fn noninteracting_vha_reaches_the_exact_energy() {
    let spec = LatticeSpec::new(2, 1, -1.0, 0.0).open();
    let ed = exact_ground_state(&spec).unwrap();
    let r = run_vha_ps(&spec, &small_config(2)).unwrap();
    assert!((r.energy - ed.energy).abs() < 1e-6, "{} vs {}", r.energy, ed.energy);
    check_shape(&r);
}

#[test]
fn every_driver_respects_the_variational_bound() {
    let spec = plaquette(-2.0);
    let ed = exact_ground_state(&spec).unwrap();
    let config = small_config(2);
    let mf = run_mf(&spec, &config).unwrap();
    let vha = run_vha_ps(&spec, &config).unwrap();
    let veha = run_veha(&spec, &config).unwrap();
    let vmfha = run_vmfha(&spec, &config, Some(&vha)).unwrap();
    for r in [&mf, &vha, &veha, &vmfha] {
        assert!(r.energy >= ed.energy - 1e-9, "{}: {} < {}", r.algorithm, r.energy, ed.energy);
        check_shape(r);
    }
    assert!(vha.energy <= mf.energy + 1e-9);
    // The warm start places the plain-ansatz optimum inside the search.
    assert!(vmfha.energy <= vha.energy + 1e-9);
    assert_eq!(mf.candidates.len(), 2);
    assert_eq!(veha.candidates.len(), 3);
}

#[test]
fn extended_ansatz_leaves_the_vacuum() {
    // On the plaquette the pairing family from the vacuum cannot reach the
    // ground state, so only descent and the bound are checked here.
    let spec = plaquette(-3.0);
    let ed = exact_ground_state(&spec).unwrap();
    let r = run_veha(&spec, &small_config(2)).unwrap();
    let vacuum = EnergyModel::new(&spec).unwrap().energy(&QuantumState::zero(8));
    assert!(r.energy < vacuum - 1.0, "{} vs vacuum {vacuum}", r.energy);
    assert!(r.energy >= ed.energy - 1e-9);
    check_shape(&r);
}

#[test]
fn refinement_never_leaves_the_start_worse() {
    let spec = plaquette(-3.0);
    let config = small_config(1);
    let ed = exact_ground_state(&spec).unwrap().energy;
    for previous in [run_vha_ps(&spec, &config).unwrap(), run_vmfha(&spec, &config, None).unwrap()] {
        let again = refine(&previous, &spec, &config).unwrap();
        assert!(again.energy <= previous.energy + 1e-12);
        assert_eq!(again.label, previous.label);
        let noisy = SolveConfig {
            noise: NoiseModel::new(1e-4),
            optimizer: OptimizerConfig {
                max_evals: 30,
                ..config.optimizer.clone()
            },
            ..config.clone()
        };
        let refined = refine(&previous, &spec, &noisy).unwrap();
        assert_eq!(refined.parameters.len(), previous.parameters.len());
        assert!(refined.energy >= ed - 1e-9);
    }
    let mut broken = run_mf(&spec, &config).unwrap();
    broken.mf_params = None;
    assert!(refine(&broken, &spec, &config).is_err());
}

#[test]
fn reruns_are_bit_identical() {
    let spec = plaquette(1.5);
    let config = small_config(2);
    let a = run_vmfha(&spec, &config, None).unwrap();
    let b = run_vmfha(&spec, &config, None).unwrap();
    assert_eq!(a, b);
    let shots = SolveConfig {
        measurement: Measurement::Shots(200),
        optimizer: OptimizerConfig {
            max_evals: 40,
            ..config.optimizer.clone()
        },
        ..config.clone()
    };
    assert_eq!(run_vha_ps(&spec, &shots).unwrap(), run_vha_ps(&spec, &shots).unwrap());
}

#[test]
fn noisy_objectives_default_to_the_derivative_free_method() {
    let mut config = SolveConfig::default();
    assert_eq!(config.method(), Method::QuasiNewton);
    config.noise = NoiseModel::new(1e-4);
    assert_eq!(config.method(), Method::Cobyla);
    config.noise = NoiseModel::ideal();
    config.measurement = Measurement::Shots(10);
    assert_eq!(config.method(), Method::Cobyla);
}

#[test]
fn noisy_mean_field_energy_stays_above_the_noiseless_one() {
    // Dephasing mixes the prepared state with states of higher energy.
    let spec = plaquette(-3.0);
    let clean = run_mf(&spec, &small_config(1)).unwrap();
    let noisy = run_mf(
        &spec,
        &SolveConfig {
            noise: NoiseModel::new(1e-3),
            ..small_config(1)
        },
    )
    .unwrap();
    assert!(noisy.energy > clean.energy);
    assert_eq!(noisy.circuit, clean.circuit);
}

#[test]
fn algorithm_labels_round_trip() {
    for a in Algorithm::ALL {
        assert_eq!(a.label().parse::<Algorithm>().unwrap(), a);
    }
    assert!("vha".parse::<Algorithm>().is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let spec = plaquette(1.0);
    let mut config = small_config(1);
    config.optimizer.restarts = 0;
    assert!(run_vha_ps(&spec, &config).is_err());
    let config = SolveConfig {
        mitigate_in_loop: true,
        noise: NoiseModel::new(1e-4),
        stretches: vec![1.0, 1.0],
        ..small_config(1)
    };
    assert!(run_mf(&spec, &config).is_err());
}
