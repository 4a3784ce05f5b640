use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use gradkit::autodiff::{central_differences, grad, max_relative_error};
use gradkit::data::{add_intercept, gen_circle, parse_delimited, shuffle_dataset, Dataset, Schema};
use gradkit::models::{
    linreg_grad, linreg_grad_rows, linreg_nll, logreg_grad, logreg_grad_rows, logreg_nll, mlp_accuracy, mlp_grad,
    mlp_nll, record_linreg_nll, record_logreg_nll, LinearParams, LogisticParams, MlpParams, Penalty,
};
use gradkit::optim::{gradient_descent, rows_evaluated, sgd, Normalize, TrainConfig, TrainTrace};
use gradkit::rng::SeededRng;
use gradkit::{Matrix, Vector};
use serde::Serialize;

use crate::manifest::{self, DataFingerprint, RunManifest};
use crate::output::{format_coefficients, sig4, toml_string, trace_csv, write_atomic};
use crate::plot::{LinePlot, Series};
use crate::{
    Command, DataArgs, Failure, FitLinear, FitLogistic, FitMlp, GenCircle, GradCheck, ModelKind, NormalizeArg, Rerun,
    SgdSweep,
};

/// Largest acceptable gradient-check error.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-5;

const PARAMS: &str = "params.toml";
const TRACE: &str = "trace.csv";

pub fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Rerun(r) => rerun(r),
        other => execute(other),
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::FitLinear(a) => fit_linear(a),
        Command::FitLogistic(a) => fit_logistic(a),
        Command::FitMlp(a) => fit_mlp(a),
        Command::SgdSweep(a) => sgd_sweep(a),
        Command::GradCheck(a) => grad_check(a),
        Command::GenCircle(a) => gen_circle_cmd(a),
        Command::Rerun(_) => Err(Failure::Usage("a manifest cannot record a rerun".into())),
    }
}

fn rerun(r: Rerun) -> Result<(), Failure> {
    let m = RunManifest::read(&r.manifest)?;
    if let Some(fp) = &m.data {
        fp.verify()?;
    }
    let mut cmd = m.invocation;
    match &mut cmd {
        Command::FitLinear(a) => a.out = r.out,
        Command::FitLogistic(a) => a.out = r.out,
        Command::FitMlp(a) => a.out = r.out,
        Command::SgdSweep(a) => a.out_dir = r.out,
        Command::GenCircle(a) => a.out = r.out,
        Command::GradCheck(_) => {}
        Command::Rerun(_) => return Err(Failure::Usage("a manifest cannot record a rerun".into())),
    }
    execute(cmd)
}

struct Loaded {
    ds: Dataset,
    fingerprint: DataFingerprint,
    args: DataArgs,
}

/// Reads the data file and pins its absolute path for the manifest.
fn load(args: &DataArgs) -> Result<Loaded, Failure> {
    let path = fs::canonicalize(&args.data).map_err(|e| Failure::io(&args.data, e))?;
    let bytes = fs::read(&path).map_err(|e| Failure::io(&path, e))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::Data(format!("{} is not UTF-8 text", path.display())))?;
    let schema = Schema {
        response: args.response.clone(),
        features: args.features.clone(),
        positive: args.positive.clone(),
    };
    let ds = parse_delimited(text, &schema).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let mut args = args.clone();
    args.data = path.clone();
    Ok(Loaded {
        ds,
        fingerprint: DataFingerprint::of(&path, &bytes),
        args,
    })
}

fn normalize(arg: NormalizeArg) -> Normalize {
    match arg {
        NormalizeArg::Sum => Normalize::Sum,
        NormalizeArg::Mean => Normalize::Mean,
    }
}

fn penalty(l2: f64) -> Result<Penalty, Failure> {
    Penalty::new(l2)
        .map(|p| p.excluding(0))
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn write_run(dir: &Path, files: &[(&str, String)], manifest: RunManifest) -> Result<(), Failure> {
    for (name, contents) in files {
        write_atomic(&dir.join(name), contents.as_bytes())?;
    }
    manifest.write(&dir.join(manifest::FILE_NAME))
}

fn artifact_names(files: &[(&str, String)]) -> Vec<String> {
    files.iter().map(|(n, _)| n.to_string()).collect()
}

#[derive(Serialize)]
struct RegressionParams<'a> {
    model: &'a str,
    response: &'a str,
    features: &'a [String],
    theta: Vec<f64>,
    final_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviance: Option<f64>,
    iters: usize,
    lr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
}

fn fit_linear(a: FitLinear) -> Result<(), Failure> {
    let cfg = TrainConfig {
        lr: a.lr,
        iters: a.iters,
        l2: penalty(a.l2)?,
        trace_every: a.trace_every,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    let loaded = load(&a.data)?;
    let ds = add_intercept(&loaded.ds)?;
    let (x, y) = (&ds.x, &ds.y);

    let trace = gradient_descent(
        |t| linreg_grad_rows(t, x, y, 0..x.rows()),
        |t| linreg_nll(&LinearParams { theta: t.clone() }, x, y),
        &Vector::zeros(x.cols()),
        &cfg,
    )?;

    let params = RegressionParams {
        model: "linear",
        response: &ds.response_name,
        features: &ds.feature_names,
        theta: trace.final_theta.to_vec(),
        final_loss: trace.final_loss(),
        deviance: None,
        iters: a.iters,
        lr: a.lr,
        batch_size: None,
    };
    let files = [(PARAMS, toml_string(&params)?), (TRACE, trace_csv(&trace))];
    let out = a.out.clone();
    let invocation = Command::FitLinear(FitLinear {
        data: loaded.args,
        out: PathBuf::new(),
        ..a
    });
    let m = RunManifest::new(invocation, Some(loaded.fingerprint), None, artifact_names(&files));
    write_run(&out, &files, m)?;

    println!("{}", format_coefficients(&ds.feature_names, &trace.final_theta));
    println!("residual sum of squares = {}", sig4(trace.final_loss()));
    Ok(())
}

fn fit_logistic(a: FitLogistic) -> Result<(), Failure> {
    let cfg = TrainConfig {
        lr: a.lr,
        iters: a.iters,
        batch_size: a.batch_size,
        seed: a.seed,
        normalize: normalize(a.normalize),
        l2: penalty(a.l2)?,
        trace_every: a.trace_every,
    };
    cfg.validate()?;
    let loaded = load(&a.data)?;
    let mut ds = add_intercept(&loaded.ds)?;
    cfg.resolve_batch(ds.len())?;
    if a.batch_size > 0 {
        ds = shuffle_dataset(&ds, a.seed)?;
    }
    let trace = train_logistic(&ds, &cfg)?;
    let nll = logreg_nll(&LogisticParams { theta: trace.final_theta.clone() }, &ds.x, &ds.y)?;

    let params = RegressionParams {
        model: "logistic",
        response: &ds.response_name,
        features: &ds.feature_names,
        theta: trace.final_theta.to_vec(),
        final_loss: trace.final_loss(),
        deviance: Some(2.0 * nll),
        iters: a.iters,
        lr: a.lr,
        batch_size: Some(a.batch_size),
    };
    let files = [(PARAMS, toml_string(&params)?), (TRACE, trace_csv(&trace))];
    let out = a.out.clone();
    let seed = (a.batch_size > 0).then_some(a.seed);
    let invocation = Command::FitLogistic(FitLogistic {
        data: loaded.args,
        out: PathBuf::new(),
        ..a
    });
    let m = RunManifest::new(invocation, Some(loaded.fingerprint), seed, artifact_names(&files));
    write_run(&out, &files, m)?;

    println!("{}", format_coefficients(&ds.feature_names, &trace.final_theta));
    println!("residual deviance = {}", sig4(2.0 * nll));
    Ok(())
}

fn train_logistic(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainTrace, Failure> {
    let (x, y) = (&ds.x, &ds.y);
    Ok(sgd(
        |t, rows| logreg_grad_rows(t, x, y, rows),
        |t| logreg_nll(&LogisticParams { theta: t.clone() }, x, y),
        ds.len(),
        &Vector::zeros(x.cols()),
        cfg,
    )?)
}

#[derive(Serialize)]
struct MlpParamsFile {
    model: &'static str,
    features: Vec<String>,
    hidden: usize,
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    final_loss: f64,
    accuracy: f64,
    iters: usize,
    lr: f64,
    seed: u64,
}

fn fit_mlp(a: FitMlp) -> Result<(), Failure> {
    let cfg = TrainConfig {
        lr: a.lr,
        iters: a.iters,
        trace_every: a.trace_every,
        seed: a.seed,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    if a.hidden == 0 {
        return Err(Failure::Usage("--hidden must be >= 1".into()));
    }
    let loaded = load(&a.data)?;
    let (x, y) = (&loaded.ds.x, &loaded.ds.y);
    let input = x.cols();
    let init = MlpParams::random_init(input, a.hidden, &mut SeededRng::new(a.seed));
    // surface label problems as data errors before training
    mlp_nll(&init, x, y)?;

    let unflat = |flat: &Vector| MlpParams::from_flat(input, a.hidden, flat);
    let trace = gradient_descent(
        |flat| Ok(mlp_grad(&unflat(flat)?, x, y)?.flatten()),
        |flat| mlp_nll(&unflat(flat)?, x, y),
        &init.flatten(),
        &cfg,
    )?;
    let fitted = unflat(&trace.final_theta)?;
    let accuracy = mlp_accuracy(&fitted, x, y)?;

    let params = MlpParamsFile {
        model: "mlp",
        features: loaded.ds.feature_names.clone(),
        hidden: a.hidden,
        w1: (0..a.hidden).map(|j| fitted.w1.row(j).to_vec()).collect(),
        b1: fitted.b1.to_vec(),
        w2: fitted.w2.to_vec(),
        b2: fitted.b2,
        final_loss: trace.final_loss(),
        accuracy,
        iters: a.iters,
        lr: a.lr,
        seed: a.seed,
    };
    let files = [(PARAMS, toml_string(&params)?), (TRACE, trace_csv(&trace))];
    let out = a.out.clone();
    let seed = Some(a.seed);
    let invocation = Command::FitMlp(FitMlp {
        data: loaded.args,
        out: PathBuf::new(),
        ..a
    });
    let m = RunManifest::new(invocation, Some(loaded.fingerprint), seed, artifact_names(&files));
    write_run(&out, &files, m)?;

    println!("accuracy = {accuracy}");
    println!("cross-entropy = {}", sig4(trace.final_loss()));
    Ok(())
}

#[derive(Serialize)]
struct SweepLeg {
    batch_size: usize,
    theta: Vec<f64>,
    final_loss: f64,
    rows_evaluated: usize,
}

#[derive(Serialize)]
struct SweepParams<'a> {
    model: &'a str,
    features: &'a [String],
    lr: f64,
    iters: usize,
    legs: Vec<SweepLeg>,
}

fn sgd_sweep(a: SgdSweep) -> Result<(), Failure> {
    if a.batch_sizes.is_empty() {
        return Err(Failure::Usage("--batch-sizes needs at least one value".into()));
    }
    let base = TrainConfig {
        lr: a.lr,
        iters: a.iters,
        seed: a.seed,
        normalize: normalize(a.normalize),
        trace_every: a.trace_every,
        ..TrainConfig::default()
    };
    base.validate()?;
    let loaded = load(&a.data)?;
    let ds = shuffle_dataset(&add_intercept(&loaded.ds)?, a.seed)?;
    if a.coordinate >= ds.x.cols() {
        return Err(Failure::Usage(format!(
            "--coordinate {} out of range for {} coefficients",
            a.coordinate,
            ds.x.cols()
        )));
    }
    for &bs in &a.batch_sizes {
        if bs == 0 {
            return Err(Failure::Usage("batch sizes must be >= 1".into()));
        }
        base.clone().with_batch_size(bs).resolve_batch(ds.len())?;
    }

    let legs: Vec<Result<TrainTrace, Failure>> = thread::scope(|scope| {
        let handles: Vec<_> = a
            .batch_sizes
            .iter()
            .map(|&bs| {
                let cfg = base.clone().with_batch_size(bs);
                let ds = &ds;
                scope.spawn(move || train_logistic(ds, &cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep leg panicked")).collect()
    });
    let legs = legs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let j = a.coordinate;
    let mut files: Vec<(String, String)> = Vec::new();
    let mut compute = format!("batch_size,iter,rows_evaluated,theta_{j}\n");
    let mut by_iter = Vec::new();
    let mut by_rows = Vec::new();
    for (&bs, trace) in a.batch_sizes.iter().zip(&legs) {
        files.push((format!("trace_bs{bs}.csv"), trace_csv(trace)));
        for p in &trace.iterations {
            compute.push_str(&format!("{bs},{},{},{}\n", p.iter, rows_evaluated(p.iter, bs), p.theta[j]));
        }
        let pts = trace.coordinate(j);
        by_iter.push(Series {
            label: bs.to_string(),
            points: pts.iter().map(|&(i, v)| (i as f64, v)).collect(),
        });
        by_rows.push(Series {
            label: bs.to_string(),
            points: pts.iter().map(|&(i, v)| (rows_evaluated(i, bs) as f64, v)).collect(),
        });
    }
    files.push(("compute.csv".into(), compute));
    let y_label = format!("theta_{j} ({})", ds.feature_names[j]);
    let plot = |x_label: &str, series| LinePlot {
        x_label: x_label.into(),
        y_label: y_label.clone(),
        legend_title: "Batch Size".into(),
        reference: a.reference,
        series,
    };
    files.push(("theta_vs_iteration.svg".into(), plot("Iteration", by_iter).to_svg()));
    files.push(("theta_vs_rows.svg".into(), plot("Gradient rows evaluated", by_rows).to_svg()));

    let params = SweepParams {
        model: "logistic",
        features: &ds.feature_names,
        lr: a.lr,
        iters: a.iters,
        legs: a
            .batch_sizes
            .iter()
            .zip(&legs)
            .map(|(&bs, t)| SweepLeg {
                batch_size: bs,
                theta: t.final_theta.to_vec(),
                final_loss: t.final_loss(),
                rows_evaluated: rows_evaluated(a.iters, bs),
            })
            .collect(),
    };
    files.push((PARAMS.into(), toml_string(&params)?));

    let file_refs: Vec<(&str, String)> = files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
    let out = a.out_dir.clone();
    let seed = Some(a.seed);
    let invocation = Command::SgdSweep(SgdSweep {
        data: loaded.args,
        out_dir: PathBuf::new(),
        ..a.clone()
    });
    let m = RunManifest::new(invocation, Some(loaded.fingerprint), seed, artifact_names(&file_refs));
    write_run(&out, &file_refs, m)?;

    for (&bs, t) in a.batch_sizes.iter().zip(&legs) {
        println!("batch size {bs}: {}", format_coefficients(&ds.feature_names, &t.final_theta));
    }
    Ok(())
}

fn random_design(rng: &mut SeededRng, n: usize, d: usize) -> Matrix {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        data.push(1.0);
        data.extend((1..d).map(|_| 2.0 * rng.normal()));
    }
    Matrix::new(n, d, data).expect("n, d >= 1")
}

fn random_vector(rng: &mut SeededRng, n: usize, scale: f64) -> Vector {
    Vector::try_from_iter((0..n).map(|_| scale * rng.normal())).expect("n >= 1")
}

fn random_labels(rng: &mut SeededRng, n: usize) -> Vector {
    Vector::try_from_iter((0..n).map(|_| f64::from(u8::from(rng.uniform() < 0.5)))).expect("n >= 1")
}

/// Max relative error between the analytic gradient and both oracles for
/// one random instance of `model`.
fn check_once(model: ModelKind, rng: &mut SeededRng, h: f64) -> Result<f64, Failure> {
    let n = 5 + rng.below(46) as usize;
    let err = match model {
        ModelKind::Linear => {
            let d = 1 + rng.below(5) as usize;
            let (x, theta) = (random_design(rng, n, d), random_vector(rng, d, 1.0));
            let y = random_vector(rng, n, 3.0);
            let analytic = linreg_grad(&LinearParams { theta: theta.clone() }, &x, &y)?;
            let (_, ad) = grad(|t, th| record_linreg_nll(t, th, &x, &y), &theta)?;
            let fd = central_differences(|t| linreg_nll(&LinearParams { theta: t.clone() }, &x, &y), &theta, h)?;
            max_relative_error(&analytic, &ad).max(max_relative_error(&analytic, &fd))
        }
        ModelKind::Logistic => {
            let d = 1 + rng.below(5) as usize;
            let (x, theta) = (random_design(rng, n, d), random_vector(rng, d, 1.0));
            let y = random_labels(rng, n);
            let analytic = logreg_grad(&LogisticParams { theta: theta.clone() }, &x, &y)?;
            let (_, ad) = grad(|t, th| record_logreg_nll(t, th, &x, &y), &theta)?;
            let fd = central_differences(|t| logreg_nll(&LogisticParams { theta: t.clone() }, &x, &y), &theta, h)?;
            max_relative_error(&analytic, &ad).max(max_relative_error(&analytic, &fd))
        }
        ModelKind::Mlp => {
            let (input, hidden) = (1 + rng.below(3) as usize, 1 + rng.below(5) as usize);
            let n = 6 + rng.below(15) as usize;
            let x = Matrix::new(n, input, (0..n * input).map(|_| 2.0 * rng.normal()).collect())?;
            let y = random_labels(rng, n);
            let params = MlpParams::from_flat(input, hidden, &random_vector(rng, hidden * (input + 2) + 1, 1.0))?;
            let backprop = mlp_grad(&params, &x, &y)?.flatten();
            let fd = central_differences(
                |flat| mlp_nll(&MlpParams::from_flat(input, hidden, flat)?, &x, &y),
                &params.flatten(),
                h,
            )?;
            max_relative_error(&backprop, &fd)
        }
    };
    Ok(err)
}

fn grad_check(a: GradCheck) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::Usage("--trials must be >= 1".into()));
    }
    if !a.h.is_finite() || a.h <= 0.0 {
        return Err(Failure::Usage(format!("--h must be positive, got {}", a.h)));
    }
    let models = match a.model {
        Some(m) => vec![m],
        None => vec![ModelKind::Linear, ModelKind::Logistic, ModelKind::Mlp],
    };
    let mut rng = SeededRng::new(a.seed);
    let mut worst: f64 = 0.0;
    for model in models {
        let mut model_worst: f64 = 0.0;
        for _ in 0..a.trials {
            model_worst = model_worst.max(check_once(model, &mut rng, a.h)?);
        }
        println!("{model:?}: max relative error {model_worst:.3e} over {} trials", a.trials);
        worst = worst.max(model_worst);
    }
    println!("max relative error: {worst:.3e}");
    if worst.is_nan() || worst > GRAD_CHECK_TOLERANCE {
        return Err(Failure::Check(format!(
            "gradient check failed: {worst:.3e} exceeds {GRAD_CHECK_TOLERANCE:e}"
        )));
    }
    Ok(())
}

fn gen_circle_cmd(a: GenCircle) -> Result<(), Failure> {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be >= 1".into()));
    }
    let ds = gen_circle(a.n, a.seed)?;
    write_atomic(&a.out, ds.to_csv_string().as_bytes())?;
    let file_name = a
        .out
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circle.csv".into());
    let manifest_path = a.out.with_file_name(format!("{file_name}.manifest.json"));
    let invocation = Command::GenCircle(GenCircle {
        out: PathBuf::new(),
        ..a.clone()
    });
    RunManifest::new(invocation, None, Some(a.seed), vec![file_name]).write(&manifest_path)?;
    println!("wrote {} rows to {}", ds.len(), a.out.display());
    Ok(())
}
