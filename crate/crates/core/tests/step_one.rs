use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twostep::environment::{CostWeights, LinearPlant, Pendulum, PendulumParams};
use twostep::lqr::{
    collect_data, kleinman_iteration, policy_iteration, CollectionSettings, ExplorationSignal, GainMatrix,
    MomentRule, DEFAULT_MAX_ITER,
};
use twostep::numerics::{is_hurwitz, Mat};

fn k0() -> GainMatrix<f64> {
    GainMatrix::from_row(&[-2.87, -2.0])
}

fn oracle_gain() -> GainMatrix<f64> {
    let plant = Pendulum::new(PendulumParams::standard()).unwrap();
    let (a, b) = plant.linearize();
    kleinman_iteration(&a, &b, &CostWeights::pendulum_default(), &k0(), 1e-10, 100)
        .unwrap()
        .k_star
}

fn max_gap(a: &GainMatrix<f64>, b: &GainMatrix<f64>) -> f64 {
    (a.matrix() - b.matrix()).max_abs()
}

#[test]
fn linear_plant_recovers_riccati_gain() {
    let pendulum = Pendulum::new(PendulumParams::standard()).unwrap();
    let (a, b) = pendulum.linearize();
    let plant = LinearPlant::new(a, b).unwrap();
    let k_star = oracle_gain();
    for seed in 0..5 {
        let signal = ExplorationSignal::new(seed, 1);
        let data = collect_data(&plant, &k0(), |t| signal.value(t), &CollectionSettings::default()).unwrap();
        let report = policy_iteration(&data, &k0(), &CostWeights::pendulum_default(), 1e-3, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        let gap = max_gap(&report.k_final, &k_star);
        assert!(gap < 1e-3, "seed {seed}: {:?} vs {:?}", report.k_final, k_star);
    }
}

#[test]
fn trapezoid_moments_are_too_coarse_at_window_scale() {
    // Why the integrated rule is the default: at the default sub-step the
    // trapezoid error in the moments moves K well past 1e-3.
    let pendulum = Pendulum::new(PendulumParams::standard()).unwrap();
    let (a, b) = pendulum.linearize();
    let plant = LinearPlant::new(a, b).unwrap();
    let settings = CollectionSettings {
        rule: MomentRule::Trapezoid,
        ..CollectionSettings::default()
    };
    let signal = ExplorationSignal::new(0, 1);
    let data = collect_data(&plant, &k0(), |t| signal.value(t), &settings).unwrap();
    let report = policy_iteration(&data, &k0(), &CostWeights::pendulum_default(), 1e-3, DEFAULT_MAX_ITER).unwrap();
    assert!(max_gap(&report.k_final, &oracle_gain()) > 1e-3);
}

#[test]
fn nonlinear_pendulum_gain_is_close_and_stabilizing() {
    let plant = Pendulum::new(PendulumParams::standard()).unwrap();
    let (a, b) = plant.linearize();
    let reference = GainMatrix::from_row(&[-10.756, -1.2997]);
    let mut close = 0;
    for seed in 0..5 {
        let signal = ExplorationSignal::new(seed, 1);
        let data = collect_data(&plant, &k0(), |t| signal.value(t), &CollectionSettings::default()).unwrap();
        let report = policy_iteration(&data, &k0(), &CostWeights::pendulum_default(), 1e-3, DEFAULT_MAX_ITER).unwrap();
        assert!(report.k_final.stabilizes(&a, &b));
        if max_gap(&report.k_final, &reference) <= 0.1 {
            close += 1;
        }
    }
    assert!(close >= 4);
}

fn random_plant(n: usize, rng: &mut ChaCha8Rng) -> (Mat<f64>, Mat<f64>) {
    // Shifted random matrix so that K₀ = 0 is admissible.
    loop {
        let a = Mat::from_fn(n, n, |i, j| rng.random_range(-1.0..1.0) - if i == j { 2.5 } else { 0.0 });
        if is_hurwitz(&a) {
            let b = Mat::from_fn(n, 1, |_, _| rng.random_range(0.5..1.5));
            return (a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn learning_matches_model_based_iteration(seed in 0u64..10_000, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_plant(n, &mut rng);
        let weights = CostWeights::new(Mat::identity(n), Mat::identity(1)).unwrap();
        let k0 = GainMatrix::zeros(1, n);
        let oracle = kleinman_iteration(&a, &b, &weights, &k0, 1e-10, 100).unwrap();

        let plant = LinearPlant::new(a, b).unwrap();
        let signal = ExplorationSignal::new(seed, 1);
        let settings = CollectionSettings { windows: 30, x0: Some(vec![0.5; n]), ..CollectionSettings::default() };
        let data = collect_data(&plant, &k0, |t| signal.value(t), &settings).unwrap();
        let report = policy_iteration(&data, &k0, &weights, 1e-8, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(max_gap(&report.k_final, &oracle.k_star) < 1e-4,
            "{:?} vs {:?}", report.k_final, oracle.k_star);
    }
}

#[test]
fn kleinman_values_decrease_monotonically() {
    let plant = Pendulum::new(PendulumParams::standard()).unwrap();
    let (a, b) = plant.linearize();
    let res = kleinman_iteration(&a, &b, &CostWeights::pendulum_default(), &k0(), 1e-12, 100).unwrap();
    assert!(res.p_history.len() >= 3);
    for pair in res.p_history.windows(2) {
        // Pᵢ − Pᵢ₊₁ must be positive semidefinite
        let diff = &pair[0] - &pair[1];
        let eig = diff.symmetrize().symmetric_eigenvalues().unwrap();
        assert!(eig.iter().all(|&l| l >= -1e-9 * pair[0].max_abs()), "{eig:?}");
    }
}

#[test]
fn single_precision_pipeline_runs() {
    let plant = Pendulum::<f32>::new(PendulumParams::standard()).unwrap();
    let (a, b) = plant.linearize();
    let k0 = GainMatrix::from_row(&[-2.87f32, -2.0]);
    let res = kleinman_iteration(&a, &b, &CostWeights::pendulum_default(), &k0, 1e-3, 50).unwrap();
    let k = res.k_star.matrix();
    assert!((k[(0, 0)] + 10.762).abs() < 0.01 && (k[(0, 1)] + 1.2952).abs() < 0.01);
}
