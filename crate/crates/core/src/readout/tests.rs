use super::*;
use crate::rng::SplitMix64;

fn random_instance(rng: &mut SplitMix64, rows: usize, cols: usize) -> (Mat<f64>, Vec<f64>) {
    let x = Mat::from_rows(
        &(0..rows)
            .map(|_| (0..cols).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect::<Vec<_>>(),
    );
    let y = (0..rows).map(|_| rng.uniform(-1.0, 1.0)).collect();
    (x, y)
}

/// Independent iterative minimizer of the ridge cost: plain gradient descent
/// with a power-iteration step size, run to tight convergence.
fn ridge_by_gradient_descent(x: &Mat<f64>, y: &[f64], lambda: f64) -> Vec<f64> {
    let n = x.cols() + 1;
    let rows = x.rows();
    // normal matrix a = B^T B + lambda I with B = [1 | x], rhs = B^T y
    let mut a = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    for (r, &target) in y.iter().enumerate().take(rows) {
        let mut feat = vec![1.0];
        feat.extend_from_slice(x.row(r));
        for i in 0..n {
            b[i] += feat[i] * target;
            for j in 0..n {
                a[i][j] += feat[i] * feat[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    // largest eigenvalue by power iteration for a safe step size
    let mut v = vec![1.0f64; n];
    let mut lam_max = 1.0;
    for _ in 0..200 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                w[i] += a[i][j] * v[j];
            }
        }
        lam_max = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / lam_max;
        }
    }
    let eta = 1.0 / lam_max;
    let mut w = vec![0.0f64; n];
    for _ in 0..500_000 {
        let mut grad = vec![0.0f64; n];
        let mut gmax = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                grad[i] += a[i][j] * w[j];
            }
            grad[i] -= b[i];
            gmax = gmax.max(grad[i].abs());
        }
        if gmax < 1e-13 {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= eta * gi;
        }
    }
    w
}

/// Dense solve with partial pivoting, independent of the Cholesky path.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i: &usize, &j: &usize| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        let pivot_row = a[k].clone();
        for i in k + 1..n {
            let f = a[i][k] / pivot_row[k];
            for (aij, pj) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                *aij -= f * pj;
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

#[test]
fn identity_regression_recovers_unit_weight() {
    let x = Mat::<f64>::from_rows(&[vec![0.3], vec![-0.7], vec![1.2], vec![0.05]]);
    let y: Vec<f64> = vec![0.3, -0.7, 1.2, 0.05];
    let fit = ridge_fit(&x, &y, 0.0).unwrap();
    assert!(fit.weights[0].abs() < 1e-12);
    assert!((fit.weights[1] - 1.0).abs() < 1e-12);
}

#[test]
fn huge_penalty_shrinks_all_weights_to_zero() {
    let mut rng = SplitMix64::new(2);
    let (x, y) = random_instance(&mut rng, 30, 4);
    let fit = ridge_fit(&x, &y, 1e9).unwrap();
    for w in &fit.weights {
        assert!(w.abs() < 1e-6);
    }
}

#[test]
fn closed_form_matches_iterative_minimizer() {
    let mut rng = SplitMix64::new(11);
    let (x, y) = random_instance(&mut rng, 50, 5);
    let fit = ridge_fit(&x, &y, 1e-3).unwrap();
    let oracle = ridge_by_gradient_descent(&x, &y, 1e-3);
    for (a, b) in fit.weights.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn normal_equation_equivalence_via_independent_solver() {
    let mut rng = SplitMix64::new(13);
    let (x, y) = random_instance(&mut rng, 40, 6);
    let lambda = 5e-4;
    let fit = ridge_fit(&x, &y, lambda).unwrap();

    let n = x.cols() + 1;
    let mut a = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    for (r, &target) in y.iter().enumerate() {
        let mut feat = vec![1.0];
        feat.extend_from_slice(x.row(r));
        for i in 0..n {
            b[i] += feat[i] * target;
            for j in 0..n {
                a[i][j] += feat[i] * feat[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    let explicit = gauss_solve(a, b);
    let scale = explicit.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    for (got, want) in fit.weights.iter().zip(&explicit) {
        assert!((got - want).abs() <= 1e-10 * scale.max(1.0));
    }
}

#[test]
fn ridge_solution_is_a_cost_minimum() {
    let mut rng = SplitMix64::new(17);
    let (x, y) = random_instance(&mut rng, 60, 5);
    let fit = ridge_fit(&x, &y, 1e-3).unwrap();
    let j_star = fit.cost(&x, &y).unwrap();
    for _ in 0..100 {
        let mut delta: Vec<f64> = (0..fit.weights.len())
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect();
        let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        for d in &mut delta {
            *d *= 1e-3 / norm;
        }
        let perturbed = RidgeReadout {
            weights: fit
                .weights
                .iter()
                .zip(&delta)
                .map(|(w, d)| w + d)
                .collect(),
            lambda: fit.lambda,
        };
        assert!(perturbed.cost(&x, &y).unwrap() >= j_star);
    }
}

#[test]
fn rank_deficient_system_without_penalty_is_singular() {
    // duplicated column makes X X^T rank deficient
    let x = Mat::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]);
    let y = vec![1.0, 2.0, 3.0];
    assert!(matches!(
        ridge_fit(&x, &y, 0.0),
        Err(Error::SingularNormalMatrix)
    ));
    assert!(ridge_fit(&x, &y, 1e-6).is_ok());
}

#[test]
fn prediction_basics() {
    let x = Mat::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5]]);
    let zero = RidgeReadout { weights: vec![0.0; 3], lambda: 0.0 };
    assert_eq!(zero.predict(&x).unwrap(), vec![0.0, 0.0]);

    let bias_only = RidgeReadout { weights: vec![2.5, 0.0, 0.0], lambda: 0.0 };
    assert_eq!(bias_only.predict(&x).unwrap(), vec![2.5, 2.5]);

    let mut rng = SplitMix64::new(3);
    let (x, y) = random_instance(&mut rng, 20, 3);
    let fit = ridge_fit(&x, &y, 1e-4).unwrap();
    assert_eq!(fit.predict(&x).unwrap(), fit.predict(&x).unwrap());

    assert!(zero.predict(&Mat::from_rows(&[vec![1.0]])).is_err());
}

#[test]
fn nmse_reference_values() {
    let y = vec![0.2, 0.4, 0.9, -0.3];
    assert_eq!(nmse(&y, &y).unwrap(), 0.0);

    // constant mean predictor scores exactly 1
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let pred = vec![mean; y.len()];
    assert_eq!(nmse(&y, &pred).unwrap(), 1.0);

    // hand evaluation: (1/2)(0 + 1) / 0.25 = 2
    assert_eq!(nmse(&[0.0, 1.0], &[0.0, 0.0]).unwrap(), 2.0);

    assert!(matches!(
        nmse(&[1.0, 1.0], &[1.0, 1.0]),
        Err(Error::ZeroVarianceTarget)
    ));
}

#[test]
fn nmse_is_invariant_under_affine_target_maps() {
    let mut rng = SplitMix64::new(23);
    let y: Vec<f64> = (0..50).map(|_| rng.uniform(0.0, 1.0)).collect();
    let p: Vec<f64> = (0..50).map(|_| rng.uniform(0.0, 1.0)).collect();
    let base = nmse(&y, &p).unwrap();
    for (a, c) in [(2.0, 0.0), (-0.5, 1.0), (10.0, -3.0)] {
        let ys: Vec<f64> = y.iter().map(|v| a * v + c).collect();
        let ps: Vec<f64> = p.iter().map(|v| a * v + c).collect();
        assert!((nmse(&ys, &ps).unwrap() - base).abs() < 1e-12);
    }
}

#[test]
fn prediction_error_reference_values() {
    let y = vec![0.5, -0.25, 1.0];
    assert_eq!(prediction_error(&y, &y).unwrap(), 0.0);
    assert_eq!(prediction_error(&y, &[0.0, 0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(prediction_error(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 0.5);
    assert!(matches!(
        prediction_error(&[0.0, 0.0], &[0.0, 0.0]),
        Err(Error::ZeroNormTarget)
    ));
}

#[test]
fn logistic_at_origin_is_one_half() {
    assert_eq!(logistic(0.0f64), 0.5);
    let readout = LogisticReadout {
        weights: Mat::<f64>::zeros(3, 4),
    };
    let h = readout
        .activations(&Mat::from_rows(&[vec![0.2, -0.4, 1.0, 0.0]]))
        .unwrap();
    for c in 0..3 {
        assert_eq!(h[(0, c)], 0.5);
    }
}

#[test]
fn separable_toy_set_reaches_full_training_accuracy() {
    let x = Mat::from_rows(&[
        vec![1.0, 0.0],
        vec![0.9, 0.1],
        vec![0.0, 1.0],
        vec![0.1, 0.9],
    ]);
    let labels = Mat::from_rows(&[
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ]);
    let mut rng = SplitMix64::new(9);
    let fit = logistic_fit(&x, &labels, 0.1, 20, &mut rng).unwrap();
    let pred = fit.classify(&x).unwrap();
    assert_eq!(pred, vec![0, 0, 1, 1]);
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = SplitMix64::new(31);
    let x = Mat::from_rows(
        &(0..3)
            .map(|_| (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect::<Vec<_>>(),
    );
    let labels = Mat::<f64>::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    let mut readout = LogisticReadout::init(2, 4, &mut rng);
    // move away from the near-zero init so the gradient has size
    for c in 0..2 {
        for f in 0..4 {
            readout.weights[(c, f)] += rng.uniform(-0.5, 0.5);
        }
    }
    let grad = readout.gradient(&x, &labels).unwrap();
    let h = 1e-6;
    for c in 0..2 {
        for f in 0..4 {
            let mut plus = readout.clone();
            plus.weights[(c, f)] += h;
            let mut minus = readout.clone();
            minus.weights[(c, f)] -= h;
            let fd = (plus.squared_error(&x, &labels).unwrap()
                - minus.squared_error(&x, &labels).unwrap())
                / (2.0 * h);
            let denom = fd.abs().max(grad[(c, f)].abs()).max(1e-9);
            assert!(
                ((grad[(c, f)] - fd) / denom).abs() < 1e-6,
                "grad[{c},{f}] analytic {} vs fd {fd}",
                grad[(c, f)]
            );
        }
    }
}

#[test]
fn logistic_outputs_stay_in_the_open_unit_interval() {
    let mut rng = SplitMix64::new(37);
    let mut readout = LogisticReadout::init(3, 5, &mut rng);
    for c in 0..3 {
        for f in 0..5 {
            readout.weights[(c, f)] = rng.uniform(-1.0, 1.0);
        }
    }
    let x = Mat::from_rows(
        &(0..20)
            .map(|_| (0..5).map(|_| rng.uniform(-3.0, 3.0)).collect())
            .collect::<Vec<_>>(),
    );
    let h = readout.activations(&x).unwrap();
    for r in 0..20 {
        for c in 0..3 {
            assert!(h[(r, c)] > 0.0 && h[(r, c)] < 1.0);
        }
    }
}

#[test]
fn classification_breaks_ties_toward_the_lowest_class() {
    let readout = LogisticReadout {
        weights: Mat::from_rows(&[vec![0.3, -0.2], vec![0.3, -0.2]]),
    };
    let pred = readout
        .classify(&Mat::from_rows(&[vec![1.0, 0.5]]))
        .unwrap();
    assert_eq!(pred, vec![0]);

    let better_second = LogisticReadout {
        weights: Mat::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]),
    };
    let pred = better_second
        .classify(&Mat::from_rows(&[vec![0.1, 0.9]]))
        .unwrap();
    assert_eq!(pred, vec![1]);
}

#[test]
fn accuracy_of_perfect_predictions() {
    assert_eq!(accuracy(&[1usize, 2, 3], &[1, 2, 3]), 1.0);
    assert_eq!(accuracy(&[1usize, 2, 3], &[1, 2, 0]), 2.0 / 3.0);
}

#[test]
fn logistic_fit_validates_inputs() {
    let x = Mat::from_rows(&[vec![1.0, 0.0]]);
    let bad_labels = Mat::from_rows(&[vec![0.5, 0.5]]);
    let mut rng = SplitMix64::new(1);
    assert!(logistic_fit(&x, &bad_labels, 0.1, 5, &mut rng).is_err());

    let labels = Mat::from_rows(&[vec![1.0, 0.0]]);
    assert!(logistic_fit(&x, &labels, -0.1, 5, &mut rng).is_err());
}
