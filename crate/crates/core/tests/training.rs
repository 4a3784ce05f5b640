use gradkit::data::{add_intercept, gen_circle, iris, shuffle_dataset, Schema};
use gradkit::models::{
    linreg_grad_rows, linreg_nll, logreg_grad_rows, logreg_nll, mlp_accuracy, mlp_grad, mlp_nll, LinearParams,
    LogisticParams, MlpParams, Penalty,
};
use gradkit::optim::{gradient_descent, sgd, Normalize, TrainConfig};
use gradkit::rng::SeededRng;
use gradkit::Vector;

fn petal() -> gradkit::data::Dataset {
    add_intercept(&iris(&Schema::new("Petal.Length", &["Petal.Width"])).unwrap()).unwrap()
}

fn setosa() -> gradkit::data::Dataset {
    add_intercept(&iris(&Schema::new("Species", &["Sepal.Length"]).positive("setosa")).unwrap()).unwrap()
}

#[test]
fn full_batch_sgd_is_gradient_descent() {
    let ds = setosa();
    let (x, y) = (&ds.x, &ds.y);
    let cfg = TrainConfig::new(0.005, 500).with_trace_every(100);
    let loss = |t: &Vector| logreg_nll(&LogisticParams { theta: t.clone() }, x, y);
    let gd = gradient_descent(|t| logreg_grad_rows(t, x, y, 0..x.rows()), loss, &Vector::zeros(2), &cfg).unwrap();
    let full = sgd(
        |t, rows| logreg_grad_rows(t, x, y, rows),
        loss,
        x.rows(),
        &Vector::zeros(2),
        &cfg.clone().with_batch_size(x.rows()),
    )
    .unwrap();
    assert_eq!(gd, full);
}

#[test]
fn linear_fit_reaches_the_table_values() {
    let ds = petal();
    let (x, y) = (&ds.x, &ds.y);
    let trace = gradient_descent(
        |t| linreg_grad_rows(t, x, y, 0..x.rows()),
        |t| linreg_nll(&LinearParams { theta: t.clone() }, x, y),
        &Vector::zeros(2),
        &TrainConfig::new(1e-4, 1000),
    )
    .unwrap();
    assert!((trace.final_theta[0] - 1.1).abs() < 0.05);
    assert!((trace.final_theta[1] - 2.2).abs() < 0.05);
    let losses: Vec<f64> = trace.iterations.iter().map(|p| p.loss).collect();
    assert!(losses.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn ridge_shrinks_only_the_slope() {
    let ds = petal();
    let (x, y) = (&ds.x, &ds.y);
    let fit = |lambda: f64| {
        let cfg = TrainConfig::new(1e-4, 20_000).with_l2(Penalty::new(lambda).unwrap().excluding(0));
        gradient_descent(
            |t| linreg_grad_rows(t, x, y, 0..x.rows()),
            |t| linreg_nll(&LinearParams { theta: t.clone() }, x, y),
            &Vector::zeros(2),
            &cfg,
        )
        .unwrap()
        .final_theta
    };
    let plain = fit(0.0);
    let ridge = fit(50.0);
    assert!(ridge[1].abs() < plain[1].abs());
    assert!(ridge[0] > plain[0]);
}

#[test]
fn seeded_sgd_is_bitwise_reproducible() {
    let run = |seed: u64| {
        let ds = shuffle_dataset(&setosa(), seed).unwrap();
        let (x, y) = (&ds.x, &ds.y);
        let cfg = TrainConfig::new(0.01, 5000).with_batch_size(15).with_trace_every(250);
        sgd(
            |t, rows| logreg_grad_rows(t, x, y, rows),
            |t| logreg_nll(&LogisticParams { theta: t.clone() }, x, y),
            x.rows(),
            &Vector::zeros(2),
            &cfg,
        )
        .unwrap()
    };
    let a = run(4);
    let b = run(4);
    assert_eq!(a, b);
    let bits = |v: &Vector| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.final_theta), bits(&b.final_theta));
    assert_ne!(a.final_theta, run(5).final_theta);
}

#[test]
fn mean_normalization_matches_a_scaled_learning_rate() {
    let ds = shuffle_dataset(&setosa(), 1).unwrap();
    let (x, y) = (&ds.x, &ds.y);
    let go = |cfg: TrainConfig| {
        sgd(
            |t, rows| logreg_grad_rows(t, x, y, rows),
            |t| logreg_nll(&LogisticParams { theta: t.clone() }, x, y),
            x.rows(),
            &Vector::zeros(2),
            &cfg,
        )
        .unwrap()
        .final_theta
    };
    // bs = 30 divides 150, so every batch has exactly 30 rows
    let mean = go(TrainConfig::new(0.3, 200).with_batch_size(30).with_normalize(Normalize::Mean));
    let sum = go(TrainConfig::new(0.01, 200).with_batch_size(30));
    for j in 0..2 {
        assert!((mean[j] - sum[j]).abs() < 1e-9 * sum[j].abs().max(1.0));
    }
}

#[test]
fn mlp_training_is_deterministic_and_learns_the_circle() {
    let ds = gen_circle(75, 21).unwrap();
    let (x, y) = (&ds.x, &ds.y);
    let train = || {
        let init = MlpParams::random_init(2, 4, &mut SeededRng::new(21));
        gradient_descent(
            |f| Ok(mlp_grad(&MlpParams::from_flat(2, 4, f)?, x, y)?.flatten()),
            |f| mlp_nll(&MlpParams::from_flat(2, 4, f)?, x, y),
            &init.flatten(),
            &TrainConfig::new(0.003, 1000),
        )
        .unwrap()
    };
    let a = train();
    assert_eq!(a, train());
    let fitted = MlpParams::from_flat(2, 4, &a.final_theta).unwrap();
    assert!(mlp_accuracy(&fitted, x, y).unwrap() >= 0.99);
    assert!(a.final_loss() < a.iterations[0].loss);
}
