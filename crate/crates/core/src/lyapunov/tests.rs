use super::*;
use crate::linalg::qr;

fn traj_from_scalars(xs: &[f64]) -> Trajectory<f64> {
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    embed(&Mat::from_rows(&rows), None).unwrap()
}

#[test]
fn embedding_dimensions() {
    let states = Mat::<f64>::zeros(120, 40);
    let input = vec![0.5; 120];
    let traj = embed(&states, Some(&input)).unwrap();
    assert_eq!(traj.dimension(), 41);
    assert_eq!(traj.len(), 120);

    let traj = embed(&states, None).unwrap();
    assert_eq!(traj.dimension(), 40);

    let single = Mat::<f64>::zeros(10, 1);
    assert_eq!(embed(&single, None).unwrap().dimension(), 1);

    let mut bad = Mat::<f64>::zeros(4, 2);
    bad[(1, 1)] = f64::NAN;
    assert!(matches!(embed(&bad, None), Err(Error::NonFinite(_))));

    let short_input = vec![0.0; 5];
    assert!(embed(&states, Some(&short_input)).is_err());
}

#[test]
fn neighbor_search_matches_brute_force() {
    // dense periodic orbit on a circle
    let n = 400;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * (k as f64) * 0.05;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let traj = embed(&Mat::from_rows(&rows), None).unwrap();
    let diameter = traj.diameter();
    let config = EmbeddingConfig::<f64>::default();
    let t = 17;
    let found = neighbors(&traj, t, &config, diameter).unwrap();

    // brute force with the same radius rule: the first radius already has
    // enough neighbors here
    let eps = config.epsilon_frac * diameter;
    let mut brute: Vec<usize> = (0..n - 1)
        .filter(|&k| k != t)
        .filter(|&k| {
            let d: f64 = traj
                .point(k)
                .iter()
                .zip(traj.point(t))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d <= eps
        })
        .collect();
    brute.sort_unstable();
    let mut sorted = found.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, brute);

    // monotonicity in the radius
    let mut last = 0;
    for frac in [0.02, 0.05, 0.1, 0.2, 0.4] {
        let cfg = EmbeddingConfig {
            epsilon_frac: frac,
            neighbor_count: Some(1),
            ..EmbeddingConfig::default()
        };
        let count = neighbors(&traj, t, &cfg, diameter).unwrap().len();
        assert!(count >= last);
        last = count;
    }
}

#[test]
fn duplicate_points_are_neighbors_at_distance_zero() {
    let xs = vec![0.5, 0.1, 0.5, 0.9, 0.2, 0.4, 0.3];
    let traj = traj_from_scalars(&xs);
    let config = EmbeddingConfig {
        neighbor_count: Some(1),
        ..EmbeddingConfig::default()
    };
    let found = neighbors(&traj, 0, &config, traj.diameter()).unwrap();
    assert!(found.contains(&2), "duplicate of point 0 must be included");
}

#[test]
fn too_sparse_neighborhoods_error_out() {
    let xs = vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0];
    let traj = traj_from_scalars(&xs);
    let config = EmbeddingConfig {
        epsilon_frac: 0.01,
        max_epsilon_frac: 0.02,
        neighbor_count: Some(2),
        ..EmbeddingConfig::default()
    };
    assert!(matches!(
        neighbors(&traj, 0, &config, traj.diameter()),
        Err(Error::InsufficientNeighbors { .. })
    ));
}

#[test]
fn exact_linear_map_is_recovered() {
    let a = Mat::from_rows(&[
        vec![0.9, 0.2, -0.1],
        vec![0.0, 0.5, 0.3],
        vec![-0.2, 0.1, 0.7],
    ]);
    let mut rng = crate::rng::SplitMix64::new(8);
    let mus: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    let zs: Vec<Vec<f64>> = mus.iter().map(|mu| a.mul_vec(mu)).collect();
    let pairs: Vec<(&[f64], &[f64])> = mus
        .iter()
        .zip(&zs)
        .map(|(m, z)| (m.as_slice(), z.as_slice()))
        .collect();
    let jac = estimate_jacobian(&pairs, 3).unwrap();
    assert!(jac.max_abs_diff(&a) < 1e-8);
}

#[test]
fn scalar_pair_gives_the_slope() {
    let mu = [1.0];
    let z = [0.9];
    let pairs: Vec<(&[f64], &[f64])> = vec![(&mu, &z)];
    let jac = estimate_jacobian(&pairs, 1).unwrap();
    assert!((jac[(0, 0)] - 0.9).abs() < 1e-6);
}

#[test]
fn rank_deficient_neighbors_stay_finite() {
    // all displacements along one direction in 2-D
    let mus = [[1.0, 0.0], [2.0, 0.0], [0.5, 0.0]];
    let zs = [[0.9, 0.1], [1.8, 0.2], [0.45, 0.05]];
    let pairs: Vec<(&[f64], &[f64])> = mus
        .iter()
        .zip(&zs)
        .map(|(m, z)| (m.as_slice(), z.as_slice()))
        .collect();
    let jac = estimate_jacobian(&pairs, 2).unwrap();
    assert!(jac.is_finite());
    // constrained direction: J e_x matches the observed slope
    assert!((jac[(0, 0)] - 0.9).abs() < 1e-6);
    assert!((jac[(1, 0)] - 0.1).abs() < 1e-6);
    // unconstrained direction is regularized toward zero
    assert!(jac[(0, 1)].abs() < 1e-3);
    assert!(jac[(1, 1)].abs() < 1e-3);
}

#[test]
fn linear_contraction_spectrum() {
    let mut xs = Vec::with_capacity(400);
    let mut x = 1.0f64;
    for _ in 0..400 {
        xs.push(x);
        x *= 0.9;
    }
    let traj = traj_from_scalars(&xs);
    let spec = spectrum(&traj, &EmbeddingConfig::default()).unwrap();
    assert_eq!(spec.exponents.len(), 1);
    assert!(
        (spec.exponents[0] - 0.9f64.ln()).abs() < 1e-3,
        "lambda {} vs ln 0.9 {}",
        spec.exponents[0],
        0.9f64.ln()
    );
}

fn logistic_orbit(n: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(n);
    let mut x = 0.34567f64;
    for _ in 0..100 {
        x = 4.0 * x * (1.0 - x);
    }
    for _ in 0..n {
        xs.push(x);
        x = 4.0 * x * (1.0 - x);
    }
    xs
}

#[test]
fn logistic_map_spectrum_matches_the_derivative_oracle() {
    let xs = logistic_orbit(10_000);
    // oracle: average log derivative along the same orbit
    let oracle: f64 = xs
        .iter()
        .map(|&x| (4.0 - 8.0 * x).abs().ln())
        .sum::<f64>()
        / xs.len() as f64;
    assert!((oracle - std::f64::consts::LN_2).abs() < 0.01);

    let traj = traj_from_scalars(&xs);
    let config = EmbeddingConfig {
        epsilon_frac: 0.01,
        ..EmbeddingConfig::default()
    };
    let spec = spectrum(&traj, &config).unwrap();
    assert!(
        (spec.exponents[0] - oracle).abs() < 0.05,
        "estimate {} vs oracle {oracle}",
        spec.exponents[0]
    );
    assert!((spec.exponents[0] - std::f64::consts::LN_2).abs() < 0.05);
}

fn henon_orbit(n: usize) -> Vec<[f64; 2]> {
    let (a, b) = (1.4, 0.3);
    let (mut x, mut y) = (0.1f64, 0.1f64);
    for _ in 0..1000 {
        let nx = 1.0 - a * x * x + y;
        y = b * x;
        x = nx;
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push([x, y]);
        let nx = 1.0 - a * x * x + y;
        y = b * x;
        x = nx;
    }
    out
}

/// Tangent-map oracle: QR-accumulated analytic Jacobians along the orbit.
fn henon_tangent_spectrum(orbit: &[[f64; 2]]) -> (f64, f64) {
    let b = 0.3;
    let mut q = Mat::<f64>::identity(2);
    let mut sums = [0.0f64; 2];
    for p in &orbit[..orbit.len() - 1] {
        let jac = Mat::from_rows(&[vec![-2.8 * p[0], 1.0], vec![b, 0.0]]);
        let (qn, r) = qr(&jac.mul(&q));
        sums[0] += r[(0, 0)].abs().ln();
        sums[1] += r[(1, 1)].abs().ln();
        q = qn;
    }
    let n = (orbit.len() - 1) as f64;
    (sums[0] / n, sums[1] / n)
}

#[test]
fn henon_spectrum_matches_the_tangent_map_oracle() {
    let orbit = henon_orbit(10_000);
    let (l1_oracle, l2_oracle) = henon_tangent_spectrum(&orbit);
    assert!((l1_oracle - 0.419).abs() < 0.02, "oracle l1 {l1_oracle}");
    // volume contraction is exact for the oracle: l1 + l2 = ln b
    assert!((l1_oracle + l2_oracle - 0.3f64.ln()).abs() < 1e-9);

    let rows: Vec<Vec<f64>> = orbit.iter().map(|p| p.to_vec()).collect();
    let traj = embed(&Mat::from_rows(&rows), None).unwrap();
    let spec = spectrum(&traj, &EmbeddingConfig::default()).unwrap();
    assert!(
        (spec.exponents[0] - l1_oracle).abs() < 0.05,
        "l1 {} vs oracle {l1_oracle}",
        spec.exponents[0]
    );
    let volume: f64 = spec.exponents.iter().sum();
    assert!(
        (volume - 0.3f64.ln()).abs() < 0.05,
        "volume {volume} vs ln 0.3 {}",
        0.3f64.ln()
    );
}

#[test]
fn spectrum_is_invariant_under_coordinate_relabeling() {
    // Non-chaotic quasi-periodic trajectory on a 2-torus: rounding noise is
    // not amplified, so the sorted spectra must agree to full tolerance.
    let n = 800;
    let (alpha, beta) = (0.61803398875f64, 0.41421356237f64);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * alpha * k as f64;
            let ph = 2.0 * std::f64::consts::PI * beta * k as f64;
            vec![th.cos(), th.sin(), ph.cos(), ph.sin()]
        })
        .collect();
    let swapped: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r[2], r[3], r[0], r[1]])
        .collect();
    let config = EmbeddingConfig::<f64>::default();
    let a = spectrum(&embed(&Mat::from_rows(&rows), None).unwrap(), &config).unwrap();
    let b = spectrum(&embed(&Mat::from_rows(&swapped), None).unwrap(), &config).unwrap();
    for (x, y) in a.exponents.iter().zip(&b.exponents) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }

    // On a chaotic orbit rounding differences are exponentially amplified,
    // so relabeling agreement is statistical rather than bitwise.
    let orbit = henon_orbit(4_000);
    let rows: Vec<Vec<f64>> = orbit.iter().map(|p| p.to_vec()).collect();
    let swapped: Vec<Vec<f64>> = orbit.iter().map(|p| vec![p[1], p[0]]).collect();
    let a = spectrum(&embed(&Mat::from_rows(&rows), None).unwrap(), &config).unwrap();
    let b = spectrum(&embed(&Mat::from_rows(&swapped), None).unwrap(), &config).unwrap();
    for (x, y) in a.exponents.iter().zip(&b.exponents) {
        assert!((x - y).abs() < 2e-3, "{x} vs {y}");
    }
}

#[test]
fn spectrum_is_deterministic() {
    let xs = logistic_orbit(2_000);
    let traj = traj_from_scalars(&xs);
    let config = EmbeddingConfig {
        epsilon_frac: 0.02,
        ..EmbeddingConfig::default()
    };
    let a = spectrum(&traj, &config).unwrap();
    let b = spectrum(&traj, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn too_few_valid_iterations_is_reported() {
    let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let traj = traj_from_scalars(&xs);
    assert!(spectrum(&traj, &EmbeddingConfig::default()).is_err());
}

#[test]
fn return_map_basics() {
    let constant = vec![2.0f64; 5];
    let pairs = return_map(&constant);
    assert_eq!(pairs.len(), 4);
    assert!(pairs.iter().all(|&(a, b)| a == 2.0 && b == 2.0));

    let period2 = vec![1.0f64, -1.0, 1.0, -1.0, 1.0];
    let mut pairs = return_map(&period2);
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs.dedup();
    assert_eq!(pairs.len(), 2);

    let xs = logistic_orbit(200);
    for (x, y) in return_map(&xs) {
        assert!((y - 4.0 * x * (1.0 - x)).abs() < 1e-12);
    }

    let csv = return_map_csv(&constant);
    assert!(csv.starts_with("x_k,x_k1\n"));
    assert_eq!(csv.lines().count(), 5);
}
