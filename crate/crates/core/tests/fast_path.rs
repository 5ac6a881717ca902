use reszo::benchmarks::{Benchmark, BenchmarkSpec};
use reszo::diagnostics::DiagnosticsRecord;
use reszo::optimizers::{run_observed, Method, OptimizerConfig, Phase, StepObserver, StepView};
use reszo::regression::{fit_linear, LinearMode, SolverPath};
use reszo::BlackBoxObjective;

/// Refits every regression step through the pseudoinverse and records the
/// relative distance to the slope the optimizer actually used.
#[derive(Default)]
struct Refit {
    worst: f64,
    steps: usize,
}

impl StepObserver for Refit {
    fn observe(&mut self, _: &BlackBoxObjective, step: &StepView) -> Option<DiagnosticsRecord> {
        if step.phase == Phase::Regression {
            let window = step.window.unwrap();
            let reference = fit_linear(window, LinearMode::InterceptCentered, false).unwrap();
            let used = step.surrogate_slope.unwrap();
            let rel = (used - &reference.g).norm() / reference.g.norm();
            self.worst = self.worst.max(rel);
            self.steps += 1;
        }
        None
    }
}

#[test]
fn cached_inverse_matches_pseudoinverse_fit_at_every_step() {
    let bench = Benchmark::build(&BenchmarkSpec::ridge(100)).unwrap();
    let mut cfg = OptimizerConfig::new(Method::LReszo, 8e-6, 0.002, 1500);
    cfg.window_m = 110;
    cfg.fast_path = true;
    cfg.seed = 3;
    let mut refit = Refit::default();
    let trace = run_observed(&mut bench.objective(), &cfg, &bench.x0, &mut refit).unwrap();

    let cached = trace
        .records
        .iter()
        .filter(|r| r.solver_path == Some(SolverPath::CachedRank1))
        .count();
    assert!(cached > 1000, "fast path used on only {cached} steps");
    assert_eq!(refit.steps, 1500 - 110);
    assert!(refit.worst < 1e-5, "worst relative slope difference {:e}", refit.worst);
}

#[test]
fn fast_path_does_not_change_query_accounting() {
    let bench = Benchmark::build(&BenchmarkSpec::ridge(20).with_seed(4)).unwrap();
    let mut cfg = OptimizerConfig::new(Method::LReszo, 1e-5, 0.002, 300);
    cfg.window_m = 30;
    cfg.fast_path = true;
    let a = reszo::run(&mut bench.objective(), &cfg, &bench.x0).unwrap();
    cfg.fast_path = false;
    let b = reszo::run(&mut bench.objective(), &cfg, &bench.x0).unwrap();
    assert_eq!(a.total_queries(), 301);
    assert_eq!(a.total_queries(), b.total_queries());
    let qa: Vec<u64> = a.records.iter().map(|r| r.queries).collect();
    let qb: Vec<u64> = b.records.iter().map(|r| r.queries).collect();
    assert_eq!(qa, qb);
}
