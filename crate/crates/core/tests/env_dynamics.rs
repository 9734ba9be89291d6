use rwdre::env::{
    bernoulli_init, build_sse_schedule, parallel_exclusion_step, spinflip_evolve, sse_evolve,
    Boundary, Occupancy, Parity, SpinFlipSpec, Window,
};
use rwdre::oracle::{evolve_env_law, OracleEnv, OracleOptions};
use rwdre::Seed;

fn within(x: f64, target: f64, sigma: f64) -> bool {
    (x - target).abs() <= 3.0 * sigma
}

#[test]
fn link_count_has_poisson_mean() {
    let window = Window::torus(20).unwrap();
    let t = 2.0;
    let n = 1000;
    let total: usize = (0..n)
        .map(|s| build_sse_schedule(window, t, Seed(s)).unwrap().len())
        .sum();
    let mean = total as f64 / n as f64;
    let expected = window.n_edges() as f64 * t;
    assert!(
        within(mean, expected, (expected / n as f64).sqrt()),
        "mean {mean} vs {expected}"
    );
}

#[test]
fn exclusion_preserves_the_product_marginal() {
    let window = Window::torus(21).unwrap();
    let (rho, t, n) = (0.3, 1.5, 10_000u64);
    let mut ones = 0u64;
    for r in 0..n {
        let seed = Seed(5).replica(r);
        let env = bernoulli_init(rho, window, seed.derive(0)).unwrap();
        let sched = build_sse_schedule(window, t, seed.derive(1)).unwrap();
        let end = sse_evolve(&env, &sched, t).unwrap();
        ones += end.get(0).unwrap() as u64;
        assert_eq!(end.particle_count(), env.particle_count());
    }
    let p = ones as f64 / n as f64;
    assert!(
        within(p, rho, (rho * (1.0 - rho) / n as f64).sqrt()),
        "p {p}"
    );
}

#[test]
fn exclusion_keeps_fixed_count_configurations_exchangeable() {
    let len = 6;
    let uniform: Vec<f64> = (0..1usize << len)
        .map(|eta| {
            if eta.count_ones() == 3 {
                1.0 / 20.0
            } else {
                0.0
            }
        })
        .collect();
    let laws = evolve_env_law(
        len,
        &OracleEnv::Sse,
        &uniform,
        &[0.5, 2.0],
        &OracleOptions::default(),
    )
    .unwrap();
    for (law, tail) in laws {
        assert!(tail < 1e-12);
        let dev = law
            .iter()
            .zip(&uniform)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "deviation {dev}");
    }
}

#[test]
fn independent_flips_match_two_state_chain() {
    let gamma = 1.0;
    let t = 0.4;
    let spec = SpinFlipSpec::independent(gamma, gamma).unwrap();
    let window = Window::torus(11).unwrap();
    let n = 10_000u64;
    let (mut changed, mut s0, mut s5, mut s05) = (0u64, 0.0, 0.0, 0.0);
    for r in 0..n {
        let seed = Seed(9).replica(r);
        let env = bernoulli_init(0.5, window, seed.derive(0)).unwrap();
        let end = spinflip_evolve(&env, &spec, t, seed.derive(1)).unwrap();
        changed += (end.get(0).unwrap() != env.get(0).unwrap()) as u64;
        let (a, b) = (
            end.get(0).unwrap() as u8 as f64,
            end.get(5).unwrap() as u8 as f64,
        );
        s0 += a;
        s5 += b;
        s05 += a * b;
    }
    let nf = n as f64;
    let p = changed as f64 / nf;
    let exact = (1.0 - (-2.0 * gamma * t).exp()) / 2.0;
    assert!(
        within(p, exact, (exact * (1.0 - exact) / nf).sqrt()),
        "p {p} vs {exact}"
    );
    let cov = s05 / nf - (s0 / nf) * (s5 / nf);
    assert!(within(cov, 0.0, 0.25 / nf.sqrt()), "cov {cov}");
}

#[test]
fn single_particle_full_sweep_variance() {
    // One even and one odd sweep move a particle from an even site by
    // 0, -1, +1 or +2, each with probability 1/4: variance 5/4.
    let n = 10_000u64;
    let mut d = Vec::with_capacity(n as usize);
    for r in 0..n {
        let mut cells = vec![0u8; 20];
        cells[10] = 1;
        let env = Occupancy::from_cells(0, Boundary::Torus, cells).unwrap();
        let seed = Seed(13).replica(r);
        let a = parallel_exclusion_step(&env, Parity::Even, seed.derive(0)).unwrap();
        let b = parallel_exclusion_step(&a, Parity::Odd, seed.derive(1)).unwrap();
        let x = b.cells().iter().position(|&c| c == 1).unwrap() as f64 - 10.0;
        d.push(x);
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // fourth central moment 41/16, so Var(sample variance) ≈ (41/16 − 25/16)/n
    assert!(within(var, 1.25, (1.0 / n as f64).sqrt()), "variance {var}");
    assert!(within(mean, 0.5, (1.25 / n as f64).sqrt()));
}

#[test]
fn alternating_sweeps_conserve_alternating_pattern() {
    let cells: Vec<u8> = (0..16).map(|i| (i % 2 == 0) as u8).collect();
    let mut env = Occupancy::from_cells(0, Boundary::Torus, cells).unwrap();
    let mut parity = Parity::Even;
    for k in 0..50 {
        env = parallel_exclusion_step(&env, parity, Seed(k)).unwrap();
        parity = parity.other();
        assert_eq!(env.particle_count(), 8);
    }
}

#[test]
fn glauber_structure_by_enumeration() {
    let k = 0.4;
    let spec = SpinFlipSpec::glauber(k).unwrap();
    let report = spec.compute_m_epsilon();
    let spin = |b: usize| 2.0 * b as f64 - 1.0;
    let rate = |l: usize, c: usize, r: usize| {
        1.0 / (1.0 + (2.0 * k * spin(c) * (spin(l) + spin(r))).exp())
    };
    let mut m_left: f64 = 0.0;
    let mut m_right: f64 = 0.0;
    let mut eps = f64::INFINITY;
    for l in 0..2 {
        for c in 0..2 {
            for r in 0..2 {
                m_left = m_left.max((rate(l, c, r) - rate(1 - l, c, r)).abs());
                m_right = m_right.max((rate(l, c, r) - rate(l, c, 1 - r)).abs());
                eps = eps.min(rate(l, c, r) + rate(l, 1 - c, r));
            }
        }
    }
    assert!((report.m - (m_left + m_right)).abs() < 1e-12);
    assert!((report.m - (2.0 * k).tanh()).abs() < 1e-12);
    assert!((report.epsilon - eps).abs() < 1e-12);
    assert!((report.epsilon - 1.0).abs() < 1e-12);
    assert!(report.attractive);
}

#[test]
fn bernoulli_init_ignores_thread_count() {
    let window = Window::centered(500, Boundary::Torus);
    let reference = bernoulli_init(0.37, window, Seed(77)).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let again = pool.install(|| bernoulli_init(0.37, window, Seed(77)).unwrap());
        assert_eq!(again, reference);
    }
}
