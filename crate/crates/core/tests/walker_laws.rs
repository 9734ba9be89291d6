use rwdre::env::{bernoulli_init, Boundary, Occupancy, SpinFlipSpec, SseDynamics, Window};
use rwdre::estimators::{estimate_rho_tilde, estimate_speed, Domain, EnvKind, ExperimentPlan};
use rwdre::oracle::{annealed_exact, OracleEnv};
use rwdre::theory::{static_speed_mirrored, ModelParams};
use rwdre::walker::{
    run_dt, simulate_coupled_pair, simulate_ct, FrozenEnv, Periodic, StaticDiscrete, WalkerParams,
};
use rwdre::Seed;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

#[test]
fn homogeneous_walk_on_all_ones() {
    let params = WalkerParams::continuous(7.0, 3.0).unwrap();
    let t = 2.0;
    let n = 10_000u64;
    let ones = Occupancy::filled(Window::centered(200, Boundary::Torus), true);
    let (mut xs, mut jumps) = (Vec::new(), Vec::new());
    for r in 0..n {
        let mut env = FrozenEnv::new(ones.clone());
        let path = simulate_ct(&mut env, &params, t, Seed(21).replica(r)).unwrap();
        xs.push(path.final_position() as f64);
        jumps.push(path.jumps() as f64);
    }
    let (mx, vx) = mean_var(&xs);
    assert!(
        (mx - 4.0 * t).abs() <= 3.0 * (vx / n as f64).sqrt(),
        "mean {mx}"
    );
    let lam = 10.0 * t;
    let (mj, vj) = mean_var(&jumps);
    assert!(
        (mj - lam).abs() <= 3.0 * (lam / n as f64).sqrt(),
        "jump mean {mj}"
    );
    // Var of the sample variance of Poisson(λ) is about (λ + 2λ²)/n
    assert!(
        (vj - lam).abs() <= 3.0 * ((lam + 2.0 * lam * lam) / n as f64).sqrt(),
        "jump var {vj}"
    );
}

#[test]
fn jump_clock_ignores_a_dynamic_environment() {
    let params = WalkerParams::continuous(2.0, 1.0).unwrap();
    let t = 3.0;
    let n = 4000u64;
    let window = Window::centered(60, Boundary::Torus);
    let mut jumps = Vec::new();
    for r in 0..n {
        let seed = Seed(22).replica(r);
        let occ = bernoulli_init(0.3, window, seed.derive(0)).unwrap();
        let mut env = SseDynamics::new(occ, seed.derive(1));
        jumps.push(
            simulate_ct(&mut env, &params, t, seed.derive(2))
                .unwrap()
                .jumps() as f64,
        );
    }
    let lam = 3.0 * t;
    let (mj, vj) = mean_var(&jumps);
    assert!(
        (mj - lam).abs() <= 3.0 * (lam / n as f64).sqrt(),
        "jump mean {mj}"
    );
    assert!(
        (vj - lam).abs() <= 3.0 * ((lam + 2.0 * lam * lam) / n as f64).sqrt(),
        "jump var {vj}"
    );
}

#[test]
fn half_density_exclusion_has_no_drift() {
    let params = WalkerParams::continuous(2.0, 1.0).unwrap();
    let plan = ExperimentPlan::new(EnvKind::Sse { rho: 0.5 }, params, vec![5.0], 4000, 23);
    let v = estimate_speed(&plan).unwrap();
    assert!(v.v_hat.abs() <= 3.0 * v.stderr, "{v:?}");
}

/// The finite-horizon speed in a frozen environment overshoots the limit (the
/// trap-time distribution has a heavy tail here), so check that it approaches
/// the limit from above as the horizon grows.
#[test]
fn discrete_walk_in_a_frozen_environment() {
    let (p, rho) = (0.7, 0.8);
    let params = WalkerParams::discrete(p).unwrap();
    let speed = |n_steps: u64| {
        let window = Window::new(
            -(n_steps as i64) - 1,
            2 * n_steps as usize + 2,
            Boundary::Torus,
        )
        .unwrap();
        let speeds: Vec<f64> = (0..1000u64)
            .map(|r| {
                let seed = Seed(24).derive(n_steps).replica(r);
                let mut env = StaticDiscrete(bernoulli_init(rho, window, seed.derive(0)).unwrap());
                let x = run_dt(&mut env, &params, n_steps, &mut seed.derive(1).rng()).unwrap();
                x as f64 / n_steps as f64
            })
            .collect();
        let (m, v) = mean_var(&speeds);
        (m, (v / speeds.len() as f64).sqrt())
    };
    let theory = static_speed_mirrored(&ModelParams::discrete(p, rho).unwrap()).unwrap();
    let (short, se_short) = speed(1000);
    let (long, se_long) = speed(10_000);
    assert!(long > theory - 3.0 * se_long);
    assert!(
        short - long > 3.0 * se_short.hypot(se_long),
        "{short} then {long}"
    );
    assert!(
        (long - theory).abs() < 0.1 * theory,
        "speed {long} ± {se_long} vs {theory}"
    );
}

#[test]
fn coupled_marginals_match_the_exact_law() {
    let params = WalkerParams::continuous(2.0, 1.0).unwrap();
    let (rho, t, n) = (0.5, 1.0, 100_000u64);
    let exact = annealed_exact(6, &OracleEnv::Sse, rho, &params, t).unwrap();
    let window = Window::torus(6).unwrap();
    let (lo, hi) = (exact.support[0], *exact.support.last().unwrap());
    let mut lower = vec![0u64; (hi - lo + 1) as usize];
    let mut upper = lower.clone();
    for r in 0..n {
        let seed = Seed(25).replica(r);
        let occ = bernoulli_init(rho, window, seed.derive(0)).unwrap();
        let mut env = Periodic(SseDynamics::new(occ, seed.derive(1)));
        let pair = simulate_coupled_pair(&mut env, &params, 0, 2, t, seed.derive(2)).unwrap();
        assert_eq!(pair.violations, 0);
        lower[(pair.lower.final_position() - lo) as usize] += 1;
        upper[(pair.upper.final_position() - 2 - lo) as usize] += 1;
    }
    for counts in [lower, upper] {
        let tv: f64 = counts
            .iter()
            .zip(&exact.probs)
            .map(|(&c, p)| (c as f64 / n as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "tv {tv}");
    }
}

#[test]
fn mirror_symmetry_is_exact_on_a_small_torus() {
    let params = WalkerParams::continuous(3.0, 1.0).unwrap();
    for rho in [0.2, 0.35] {
        let a = annealed_exact(6, &OracleEnv::Sse, rho, &params, 0.8).unwrap();
        let b = annealed_exact(6, &OracleEnv::Sse, 1.0 - rho, &params, 0.8).unwrap();
        assert!(a.reflected().total_variation(&b) < 1e-9);
    }
}

#[test]
fn fast_flips_give_density_occupation() {
    let rho = 0.8;
    let spec = SpinFlipSpec::independent_with_density(50.0, rho).unwrap();
    let params = WalkerParams::continuous(7.0, 3.0).unwrap();
    let plan = ExperimentPlan::new(EnvKind::SpinFlip { spec, rho }, params, vec![2.0], 2000, 26)
        .with_domain(Domain::Auto);
    let (m, se) = estimate_rho_tilde(&plan).unwrap();
    assert!((m - rho).abs() <= 3.0 * se, "occupation {m} ± {se}");
}
