//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Experiment settings come from the shipped files in `configs/`, so the
//! numbers here are the same ones the CLI reproduces.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use reszo::benchmarks::{Benchmark, BenchmarkSpec, NeuralNetProblem, RosenbrockProblem};
use reszo::diagnostics::{
    attach_diagnostics, bias_within_gradient_fraction, default_fd_step, finite_difference_gradient, summarize_cd,
    DiagnosticsRecord,
};
use reszo::estimators::{rszo_estimate, szo_estimate, tzo_estimate};
use reszo::harness::{run_experiment, AggregateCurve, ExperimentConfig, ExperimentResult, CURVE_FILE, TRIALS_FILE};
use reszo::linalg::{DenseMatrix, DenseVector};
use reszo::optimizers::{run_observed, Method, OptimizerConfig, Phase, StepObserver, StepView};
use reszo::regression::{fit_quadratic, rank1_swap_inverse, spd_inverse};
use reszo::rng::SeededRng;
use reszo::sampling::{sample_gaussian, sample_unit_sphere};
use reszo::{BlackBoxObjective, FnProblem, Problem, ZoError};

// Tolerances, fixed in advance.
const MC_DIRECTIONS: usize = 100_000;
const MC_STANDARD_ERRORS: f64 = 5.0;
const SWAP_COUNT: usize = 1000;
const SWAP_TOL: f64 = 1e-6;
const DROP_READD_TOL: f64 = 1e-10;
const AFFINE_SLOPE_TOL: f64 = 1e-8;
const AFFINE_CURVATURE_TOL: f64 = 1e-7;
const ORACLE_POINTS: usize = 20;
const ORACLE_REL_TOL: f64 = 1e-5;
const FIGURE_DECAY: f64 = 100.0;
const FIGURE_QUERY_RATIO: f64 = 0.7;
const ABLATION_NOISE: f64 = 0.10;
const ADAPTIVE_FACTOR: f64 = 2.0;
const CD_REFERENCE_MAX: [(usize, f64); 3] = [(100, 25.1522), (400, 77.3924), (900, 104.1276)];
const CD_FACTOR: f64 = 3.0;
const CD_SQRT_D_RANGE: (f64, f64) = (1.0, 6.0);
const BIAS_FRACTION: f64 = 0.95;
const NN_REDUCTION: f64 = 10.0;

type Verdict = reszo::Result<(bool, String)>;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

// 1 ----------------------------------------------------------------------

fn estimator_expectations() -> Verdict {
    let bench = Benchmark::build(&BenchmarkSpec::ridge(10).with_seed(11))?;
    let mut f = bench.objective();
    let d = 10;
    let mut rng = SeededRng::new(5);
    let x = sample_gaussian(&mut rng, d)?;
    let delta = 0.01;

    // Running sums per estimator: [szo, rszo, tzo].
    let mut sum = [DenseVector::zeros(d), DenseVector::zeros(d), DenseVector::zeros(d)];
    let mut sq = [DenseVector::zeros(d), DenseVector::zeros(d), DenseVector::zeros(d)];
    let mut prev = f.evaluate(&(&x + sample_unit_sphere(&mut rng, d)? * delta))?;
    for _ in 0..MC_DIRECTIONS {
        let u = sample_unit_sphere(&mut rng, d)?;
        let one = szo_estimate(&mut f, &x, &u, delta)?;
        let residual = rszo_estimate(&mut f, &x, &u, delta, prev)?;
        prev = residual.last_value;
        let two = tzo_estimate(&mut f, &x, &u, delta)?;
        for (k, g) in [one, residual, two].iter().enumerate() {
            sum[k] += &g.gradient_estimate;
            sq[k] += g.gradient_estimate.component_mul(&g.gradient_estimate);
        }
    }
    let n = MC_DIRECTIONS as f64;
    let mean: Vec<DenseVector> = sum.iter().map(|s| s / n).collect();
    let var: Vec<DenseVector> = (0..3)
        .map(|k| (&sq[k] / n - mean[k].component_mul(&mean[k])) * (n / (n - 1.0)))
        .collect();

    let mut worst: f64 = 0.0;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for j in 0..d {
            let se = (var[a][j] / n + var[b][j] / n).sqrt();
            worst = worst.max((mean[a][j] - mean[b][j]).abs() / se);
        }
    }
    Ok((
        worst <= MC_STANDARD_ERRORS,
        format!(
            "largest pairwise gap {worst:.2} pooled SE over {MC_DIRECTIONS} directions (limit {MC_STANDARD_ERRORS})"
        ),
    ))
}

// 2 ----------------------------------------------------------------------

fn sherman_morrison() -> Verdict {
    let d = 8;
    let rows = 24;
    let mut rng = SeededRng::new(2);
    let homogeneous = |rng: &mut SeededRng| -> reszo::Result<DenseVector> {
        let x = sample_gaussian(rng, d)?;
        Ok(DenseVector::from_fn(d + 1, |i, _| if i < d { x[i] } else { 1.0 }))
    };
    let mut design: Vec<DenseVector> = (0..rows).map(|_| homogeneous(&mut rng)).collect::<Result<_, _>>()?;
    let gram = |design: &[DenseVector]| -> DenseMatrix {
        design
            .iter()
            .fold(DenseMatrix::zeros(d + 1, d + 1), |acc, r| acc + r * r.transpose())
    };
    let mut inv = spd_inverse(&gram(&design)).expect("well-conditioned start");

    let mut swap_err: f64 = 0.0;
    for step in 0..SWAP_COUNT {
        let slot = step % rows;
        let fresh = homogeneous(&mut rng)?;
        inv = rank1_swap_inverse(&inv, &design[slot], &fresh)?;
        design[slot] = fresh;
        let direct = spd_inverse(&gram(&design)).expect("invertible");
        swap_err = swap_err.max((&inv - direct).amax());
    }

    let mut readd_err: f64 = 0.0;
    for r in &design {
        let same = rank1_swap_inverse(&inv, r, r)?;
        readd_err = readd_err.max((&same - &inv).amax());
    }
    Ok((
        swap_err <= SWAP_TOL && readd_err <= DROP_READD_TOL,
        format!(
            "{SWAP_COUNT} swaps max-abs error {swap_err:.2e} (limit {SWAP_TOL:.0e}); drop-then-re-add {readd_err:.2e} (limit {DROP_READD_TOL:.0e})"
        ),
    ))
}

// 3 ----------------------------------------------------------------------

#[derive(Default)]
struct AffineProbe {
    slope: DenseVector,
    slope_err: f64,
    curvature_err: f64,
    steps: usize,
}

impl StepObserver for AffineProbe {
    fn observe(&mut self, _: &BlackBoxObjective, step: &StepView<'_>) -> Option<DiagnosticsRecord> {
        if step.phase == Phase::Regression {
            let g = step.surrogate_slope.expect("regression slope");
            self.slope_err = self.slope_err.max((g - &self.slope).amax());
            if step.method == Method::QReszo {
                let fit = fit_quadratic(step.window.expect("window")).expect("quadratic fit");
                self.curvature_err = self.curvature_err.max(fit.h.expect("curvature").amax());
            }
            self.steps += 1;
        }
        None
    }
}

fn affine_exact_fit() -> Verdict {
    let d = 6;
    let slope = DenseVector::from_vec(vec![1.5, -2.0, 0.25, 3.0, -0.75, 0.5]);
    let s = slope.clone();
    let problem: Arc<dyn Problem> = Arc::new(FnProblem::new("affine", d, move |x: &DenseVector| s.dot(x) + 4.0));
    let x0 = DenseVector::from_element(d, 0.3);

    let mut lines = Vec::new();
    let mut ok = true;
    for (method, window_m) in [(Method::LReszo, d + 3), (Method::QReszo, 2 * d + 4)] {
        let mut cfg = OptimizerConfig::new(method, 1e-3, 0.05, 80);
        cfg.window_m = window_m;
        cfg.warm_eta = 1e-3;
        cfg.warm_delta = 0.1;
        let mut probe = AffineProbe {
            slope: slope.clone(),
            ..Default::default()
        };
        run_observed(&mut BlackBoxObjective::new(problem.clone()), &cfg, &x0, &mut probe)?;
        ok &= probe.steps > 0 && probe.slope_err <= AFFINE_SLOPE_TOL;
        if method == Method::QReszo {
            ok &= probe.curvature_err <= AFFINE_CURVATURE_TOL;
            lines.push(format!(
                "{method}: slope {:.1e}, curvature {:.1e}",
                probe.slope_err, probe.curvature_err
            ));
        } else {
            lines.push(format!("{method}: slope {:.1e}", probe.slope_err));
        }
    }
    Ok((ok, format!("{} over all regression steps", lines.join("; "))))
}

// 4 ----------------------------------------------------------------------

fn gradient_oracles() -> Verdict {
    let mut rng = SeededRng::new(4);
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in [
        BenchmarkSpec::ridge(100),
        BenchmarkSpec::logistic(100),
        BenchmarkSpec::rosenbrock(200),
    ] {
        let bench = Benchmark::build(&spec)?;
        let f = bench.objective();
        let mut worst: f64 = 0.0;
        for _ in 0..ORACLE_POINTS {
            let x = &bench.x0 + sample_gaussian(&mut rng, spec.d)? * 0.5;
            let exact = f.analytic_gradient(&x).expect("analytic gradient");
            let fd = finite_difference_gradient(&f, &x, default_fd_step(&x))?;
            worst = worst.max((&exact - fd).norm() / exact.norm());
        }
        ok &= worst <= ORACLE_REL_TOL;
        parts.push(format!("{} {worst:.1e}", spec.problem.name()));
    }
    Ok((
        ok,
        format!(
            "worst relative error: {} (limit {ORACLE_REL_TOL:.0e})",
            parts.join(", ")
        ),
    ))
}

// 5 ----------------------------------------------------------------------

fn ridge_figure() -> Verdict {
    let m = 110;
    let run = |name: &str| -> reszo::Result<(Method, AggregateCurve)> {
        let cfg = load(name);
        Ok((cfg.optimizer.method, run_experiment(&cfg)?.curve))
    };
    let curves: Vec<(Method, AggregateCurve)> = [
        "ridge_tzo.toml",
        "ridge_rszo.toml",
        "ridge_l_reszo.toml",
        "ridge_q_reszo.toml",
    ]
    .iter()
    .map(|n| run(n))
    .collect::<Result<_, _>>()?;
    let get = |want: Method| &curves.iter().find(|(m, _)| *m == want).unwrap().1;

    // (i) two orders of magnitude after iteration m.
    let mut decay_ok = true;
    let mut decay = Vec::new();
    for (method, c) in &curves {
        let ratio = c.mean_at(method.queries_after(m)) / c.final_mean();
        decay_ok &= ratio >= FIGURE_DECAY;
        decay.push(format!("{method} {ratio:.1e}"));
    }

    // (ii) regression methods reach TZO's final gap with ≤ 0.7× its queries.
    let tzo = get(Method::Tzo);
    let tzo_queries = *tzo.queries.last().unwrap() as f64;
    let mut speed_ok = true;
    let mut speed = Vec::new();
    for method in [Method::LReszo, Method::QReszo] {
        match get(method).queries_to_reach(tzo.final_mean()) {
            Some(q) => {
                let ratio = q as f64 / tzo_queries;
                speed_ok &= ratio <= FIGURE_QUERY_RATIO;
                speed.push(format!("{method} {ratio:.2}"));
            }
            None => {
                speed_ok = false;
                speed.push(format!("{method} never"));
            }
        }
    }

    // (iii) RSZO needs the most queries to reach the gap every method reaches.
    let target = curves
        .iter()
        .map(|(_, c)| c.final_mean())
        .fold(f64::NEG_INFINITY, f64::max);
    let to_target: Vec<(Method, u64)> = curves
        .iter()
        .map(|(m, c)| (*m, c.queries_to_reach(target).expect("final gap reached")))
        .collect();
    let slowest = to_target.iter().max_by_key(|(_, q)| *q).unwrap().0;
    let order_ok = slowest == Method::Rszo;

    Ok((
        decay_ok && speed_ok && order_ok,
        format!(
            "decay from iteration {m}: [{}]; queries to TZO final gap / TZO budget: [{}]; slowest to {target:.2e}: {slowest}",
            decay.join(", "),
            speed.join(", ")
        ),
    ))
}

// 6 ----------------------------------------------------------------------

fn final_or_diverged(cfg: &ExperimentConfig) -> reszo::Result<Option<ExperimentResult>> {
    match run_experiment(cfg) {
        Ok(r) => Ok(Some(r)),
        Err(ZoError::ExperimentFailed(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn delta_ablation() -> Verdict {
    let base = load("ridge_l_reszo.toml");
    let radii = [0.01, 0.005, 0.002, 0.001];
    let mut finals = Vec::new();
    let mut text = Vec::new();
    for &delta in &radii {
        let mut cfg = base.clone();
        cfg.optimizer.delta = delta;
        match final_or_diverged(&cfg)? {
            Some(r) => {
                finals.push(r.curve.final_mean());
                text.push(format!(
                    "δ={delta} {:.2e} ({} diverged)",
                    r.curve.final_mean(),
                    r.curve.diverged
                ));
            }
            None => return Ok((false, format!("δ={delta}: every trial diverged"))),
        }
    }
    let monotone = finals.windows(2).all(|w| w[1] <= w[0] * (1.0 + ABLATION_NOISE));

    let mut zero = base.clone();
    zero.optimizer.delta = 0.0;
    let zero_ok = match final_or_diverged(&zero)? {
        None => {
            text.push("δ=0 all diverged".into());
            true
        }
        Some(r) => {
            let worst = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            text.push(format!(
                "δ=0 {:.2e} ({} diverged)",
                r.curve.final_mean(),
                r.curve.diverged
            ));
            r.curve.final_mean() > worst
        }
    };

    let mut adaptive = base.clone();
    adaptive.optimizer.adaptive_delta = true;
    let a = run_experiment(&adaptive)?.curve.final_mean();
    let best = finals.iter().copied().fold(f64::INFINITY, f64::min);
    let adaptive_ok = a <= ADAPTIVE_FACTOR * best;
    text.push(format!("adaptive {a:.2e}"));

    Ok((monotone && zero_ok && adaptive_ok, text.join(", ")))
}

// 7 ----------------------------------------------------------------------

fn cd_study() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, reference) in CD_REFERENCE_MAX {
        let cfg = load(&format!("cd_ridge_d{d}.toml"));
        let result = run_experiment(&cfg)?;
        let s = summarize_cd(&result.traces[0]).ok_or_else(|| ZoError::ExperimentFailed("no C_d values".into()))?;
        let scaled = s.max / (d as f64).sqrt();
        let within = s.max >= reference / CD_FACTOR && s.max <= reference * CD_FACTOR;
        let scaled_ok = scaled >= CD_SQRT_D_RANGE.0 && scaled <= CD_SQRT_D_RANGE.1;
        ok &= within && scaled_ok;
        parts.push(format!(
            "d={d} max {:.2} (reference {reference:.2}) p99 {:.2} mean {:.2} max/√d {scaled:.2}",
            s.max, s.p99, s.mean
        ));
    }
    Ok((ok, parts.join("; ")))
}

// 8 ----------------------------------------------------------------------

fn bias_property() -> Verdict {
    let cfg = load("ridge_l_reszo.toml");
    let bench = cfg.build_benchmark()?;
    let mut opt = cfg.optimizer.clone();
    opt.adaptive_delta = true;
    let trace = attach_diagnostics(&mut bench.objective(), &opt, &bench.x0)?;
    let frac = bias_within_gradient_fraction(&trace, opt.window_m).unwrap_or(0.0);
    let mut ratios: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| r.iteration > opt.window_m)
        .filter_map(|r| r.diagnostics.as_ref())
        .map(|d| d.xi_norm / d.grad_norm)
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = reszo::harness::percentile(&ratios, 0.5);
    Ok((
        frac >= BIAS_FRACTION,
        format!(
            "{:.1}% of {} regression iterations have ‖ξ‖ ≤ ‖∇f‖ (need {:.0}%); median ‖ξ‖/‖∇f‖ {median:.2}",
            100.0 * frac,
            ratios.len(),
            100.0 * BIAS_FRACTION
        ),
    ))
}

// 9 ----------------------------------------------------------------------

fn rosenbrock_and_network() -> Verdict {
    let rosen = RosenbrockProblem::new(200).value(&DenseVector::zeros(200));
    let net = NeuralNetProblem::generate(&BenchmarkSpec::neural_net(6))?;
    let teacher = net.value(net.teacher());
    let mut ok = rosen == 0.0 && teacher == 0.0;
    let mut parts = vec![format!("rosenbrock f(0)={rosen:e}, teacher loss {teacher:e}")];
    for name in ["nn_l_reszo.toml", "nn_q_reszo.toml"] {
        let cfg = load(name);
        let r = run_experiment(&cfg)?;
        let reduction = r.curve.mean_gap[0] / r.curve.final_mean();
        ok &= reduction >= NN_REDUCTION && r.curve.diverged == 0;
        parts.push(format!(
            "{} reduction {reduction:.1}× over {} queries ({} of {} diverged)",
            cfg.optimizer.method,
            r.curve.queries.last().unwrap(),
            r.curve.diverged,
            cfg.trials
        ));
    }
    Ok((ok, parts.join("; ")))
}

// 10 ---------------------------------------------------------------------

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir()?;
    let exe = env!("CARGO_BIN_EXE_reszo");
    let run = |config: &Path, out: &Path| -> reszo::Result<()> {
        let status = Command::new(exe)
            .args(["run", "--trials", "4", "--config"])
            .arg(config)
            .arg("--output")
            .arg(out)
            .output()?;
        if !status.status.success() {
            return Err(ZoError::ExperimentFailed(
                String::from_utf8_lossy(&status.stderr).into_owned(),
            ));
        }
        Ok(())
    };
    let first = dir.path().join("first");
    run(&config_path("ridge_l_reszo.toml"), &first)?;
    let manifest = first.join(reszo::harness::MANIFEST_FILE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&manifest, &a)?;
    run(&manifest, &b)?;

    let mut same = true;
    for file in [CURVE_FILE, TRIALS_FILE] {
        let bytes: Vec<Vec<u8>> = [&first, &a, &b]
            .iter()
            .map(|d| std::fs::read(d.join(file)))
            .collect::<Result<_, _>>()?;
        same &= bytes[0] == bytes[1] && bytes[1] == bytes[2];
    }
    Ok((
        same,
        "curve.csv and trials.csv identical across config run and two manifest re-runs".into(),
    ))
}

// ------------------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    check: fn() -> Verdict,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "estimator expectation identity",
            limit: Duration::from_secs(30),
            check: estimator_expectations,
        },
        Criterion {
            id: 2,
            name: "Sherman-Morrison swaps",
            limit: Duration::from_secs(5),
            check: sherman_morrison,
        },
        Criterion {
            id: 3,
            name: "exact fit on affine objectives",
            limit: Duration::from_secs(5),
            check: affine_exact_fit,
        },
        Criterion {
            id: 4,
            name: "analytic gradients vs central differences",
            limit: Duration::from_secs(10),
            check: gradient_oracles,
        },
        Criterion {
            id: 5,
            name: "ridge convergence comparison",
            limit: Duration::from_secs(600),
            check: ridge_figure,
        },
        Criterion {
            id: 6,
            name: "smoothing-radius ablation",
            limit: Duration::from_secs(600),
            check: delta_ablation,
        },
        Criterion {
            id: 7,
            name: "C_d growth with dimension",
            limit: Duration::from_secs(900),
            check: cd_study,
        },
        Criterion {
            id: 8,
            name: "surrogate bias within gradient norm",
            limit: Duration::from_secs(120),
            check: bias_property,
        },
        Criterion {
            id: 9,
            name: "Rosenbrock and network sanity",
            limit: Duration::from_secs(600),
            check: rosenbrock_and_network,
        },
        Criterion {
            id: 10,
            name: "CLI determinism",
            limit: Duration::MAX,
            check: cli_determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed < c.limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if c.limit == Duration::MAX {
            String::new()
        } else {
            format!(" / {}s", c.limit.as_secs())
        };
        println!(
            "criterion {:>2} {}: {} -- {} [{:.1}s{}]",
            c.id,
            if passed { "PASS" } else { "FAIL" },
            c.name,
            detail,
            elapsed.as_secs_f64(),
            budget
        );
        if !passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
