//! Classic zeroth-order gradient estimators.
//!
//! * single-point: `(d/δ) f(x + δu) u`
//! * residual feedback: `(d/δ) (f(x + δu) - f_prev) u`, where `f_prev` is the
//!   value queried at the previous iteration's perturbed point
//! * two-point: `(d/(2δ)) (f(x + δu) - f(x - δu)) u`
//!
//! The public functions take unit directions. The `*_scaled` variants accept
//! an explicit direction factor in place of `d`, which the optimizers use for
//! Gaussian directions (factor 1, the Gaussian-smoothing normalization).

use crate::error::{Result, ZoError};
use crate::linalg::{ensure_dim, DenseVector};
use crate::objective::BlackBoxObjective;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub gradient_estimate: DenseVector,
    /// 1 for the single-point estimators, 2 for the two-point estimator.
    pub evaluations_used: u32,
    /// Newest queried value; the residual-feedback estimator chains on it.
    pub last_value: f64,
    /// Value at `x + δu`. Equals `last_value` for the single-point estimators.
    pub forward_value: f64,
}

fn check_inputs(f: &BlackBoxObjective, x: &DenseVector, u: &DenseVector, delta: f64) -> Result<()> {
    ensure_dim(x, f.dimension())?;
    ensure_dim(u, f.dimension())?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ZoError::precondition(format!(
            "smoothing radius must be positive, got {delta}"
        )));
    }
    Ok(())
}

fn check_unit(u: &DenseVector) -> Result<()> {
    let n = u.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(ZoError::precondition(format!("direction must have unit norm, got {n}")));
    }
    Ok(())
}

pub fn szo_estimate(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
) -> Result<EstimateOutcome> {
    check_unit(u)?;
    let d = f.dimension() as f64;
    szo_estimate_scaled(f, x, u, delta, d)
}

pub fn szo_estimate_scaled(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
    factor: f64,
) -> Result<EstimateOutcome> {
    check_inputs(f, x, u, delta)?;
    let value = f.evaluate(&(x + u * delta))?;
    Ok(EstimateOutcome {
        gradient_estimate: u * (factor / delta * value),
        evaluations_used: 1,
        last_value: value,
        forward_value: value,
    })
}

pub fn rszo_estimate(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
    prev_value: f64,
) -> Result<EstimateOutcome> {
    check_unit(u)?;
    let d = f.dimension() as f64;
    rszo_estimate_scaled(f, x, u, delta, prev_value, d)
}

pub fn rszo_estimate_scaled(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
    prev_value: f64,
    factor: f64,
) -> Result<EstimateOutcome> {
    check_inputs(f, x, u, delta)?;
    let value = f.evaluate(&(x + u * delta))?;
    Ok(EstimateOutcome {
        gradient_estimate: u * (factor / delta * (value - prev_value)),
        evaluations_used: 1,
        last_value: value,
        forward_value: value,
    })
}

pub fn tzo_estimate(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
) -> Result<EstimateOutcome> {
    check_unit(u)?;
    let d = f.dimension() as f64;
    tzo_estimate_scaled(f, x, u, delta, d)
}

pub fn tzo_estimate_scaled(
    f: &mut BlackBoxObjective,
    x: &DenseVector,
    u: &DenseVector,
    delta: f64,
    factor: f64,
) -> Result<EstimateOutcome> {
    check_inputs(f, x, u, delta)?;
    let plus = f.evaluate(&(x + u * delta))?;
    let minus = f.evaluate(&(x - u * delta))?;
    Ok(EstimateOutcome {
        gradient_estimate: u * (factor / (2.0 * delta) * (plus - minus)),
        evaluations_used: 2,
        last_value: minus,
        forward_value: plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnProblem;
    use crate::rng::SeededRng;
    use crate::sampling::sample_unit_sphere;
    use approx::assert_abs_diff_eq;

    fn obj(d: usize, f: impl Fn(&DenseVector) -> f64 + Send + Sync + 'static) -> BlackBoxObjective {
        BlackBoxObjective::from_problem(FnProblem::new("t", d, f))
    }

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::from_column_slice(xs)
    }

    #[test]
    fn szo_on_constant() {
        let mut f = obj(1, |_| 2.0);
        let out = szo_estimate(&mut f, &v(&[0.3]), &v(&[1.0]), 0.5).unwrap();
        assert_eq!(out.gradient_estimate[0], 4.0);
        assert_eq!(out.evaluations_used, 1);
        assert_eq!(f.query_count(), 1);
    }

    #[test]
    fn szo_on_identity() {
        let mut f = obj(1, |x| x[0]);
        let out = szo_estimate(&mut f, &v(&[0.0]), &v(&[1.0]), 0.1).unwrap();
        assert_abs_diff_eq!(out.gradient_estimate[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn szo_carries_dimension_factor() {
        let mut f = obj(2, |x| x[0]);
        let out = szo_estimate(&mut f, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 0.2).unwrap();
        assert_abs_diff_eq!(out.gradient_estimate[0], 2.0, epsilon = 1e-15);
        assert_eq!(out.gradient_estimate[1], 0.0);
    }

    #[test]
    fn rszo_on_constant_is_zero() {
        let mut f = obj(3, |_| 1.5);
        let u = v(&[0.0, 0.6, 0.8]);
        let out = rszo_estimate(&mut f, &v(&[1.0, 2.0, 3.0]), &u, 0.3, 1.5).unwrap();
        assert!(out.gradient_estimate.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn rszo_direct_formula() {
        let mut f = obj(1, |x| x[0]);
        let prev = -0.1; // f(-0.1)
        let out = rszo_estimate(&mut f, &v(&[0.0]), &v(&[1.0]), 0.1, prev).unwrap();
        assert_abs_diff_eq!(out.gradient_estimate[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.last_value, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn rszo_chaining_costs_one_query_per_step() {
        let mut f = obj(2, |x| x.norm_squared());
        let mut rng = SeededRng::new(1);
        let x = v(&[0.5, 0.5]);
        let mut prev = f.evaluate(&x).unwrap();
        let k = 7;
        for _ in 0..k {
            let u = sample_unit_sphere(&mut rng, 2).unwrap();
            prev = rszo_estimate(&mut f, &x, &u, 0.1, prev).unwrap().last_value;
        }
        assert_eq!(f.query_count(), k + 1);
    }

    #[test]
    fn tzo_exact_on_quadratic() {
        let mut f = obj(1, |x| x[0] * x[0]);
        let out = tzo_estimate(&mut f, &v(&[1.0]), &v(&[1.0]), 0.1).unwrap();
        assert_abs_diff_eq!(out.gradient_estimate[0], 2.0, epsilon = 1e-12);
        assert_eq!(out.evaluations_used, 2);
        assert_eq!(f.query_count(), 2);
    }

    #[test]
    fn tzo_on_constant_and_linear() {
        let mut c = obj(2, |_| 4.0);
        let u = v(&[0.6, -0.8]);
        let out = tzo_estimate(&mut c, &v(&[1.0, 1.0]), &u, 0.05).unwrap();
        assert!(out.gradient_estimate.iter().all(|&g| g == 0.0));

        let a = v(&[1.5, -2.0, 0.5]);
        let a2 = a.clone();
        let mut lin = obj(3, move |x| a2.dot(x));
        let mut rng = SeededRng::new(9);
        let u = sample_unit_sphere(&mut rng, 3).unwrap();
        let out = tzo_estimate(&mut lin, &v(&[0.1, 0.2, 0.3]), &u, 0.01).unwrap();
        let expected = &u * (3.0 * a.dot(&u));
        for i in 0..3 {
            assert_abs_diff_eq!(out.gradient_estimate[i], expected[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn non_positive_delta_rejected() {
        let mut f = obj(1, |x| x[0]);
        for delta in [0.0, -1.0, f64::NAN] {
            assert!(szo_estimate(&mut f, &v(&[0.0]), &v(&[1.0]), delta).is_err());
            assert!(rszo_estimate(&mut f, &v(&[0.0]), &v(&[1.0]), delta, 0.0).is_err());
            assert!(tzo_estimate(&mut f, &v(&[0.0]), &v(&[1.0]), delta).is_err());
        }
        assert_eq!(f.query_count(), 0);
    }

    #[test]
    fn non_unit_direction_rejected() {
        let mut f = obj(2, |x| x[0]);
        assert!(szo_estimate(&mut f, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 0.1).is_err());
    }

    #[test]
    fn estimates_are_collinear_with_direction() {
        let mut f = obj(4, |x| (x[0] - 1.0).powi(2) + x[1].sin() + x[2] * x[3]);
        let mut rng = SeededRng::new(4);
        let x = v(&[0.3, -0.2, 0.9, 0.1]);
        for _ in 0..20 {
            let u = sample_unit_sphere(&mut rng, 4).unwrap();
            for g in [
                szo_estimate(&mut f, &x, &u, 0.1).unwrap().gradient_estimate,
                rszo_estimate(&mut f, &x, &u, 0.1, 0.7).unwrap().gradient_estimate,
                tzo_estimate(&mut f, &x, &u, 0.1).unwrap().gradient_estimate,
            ] {
                let s = g.dot(&u);
                assert!((&g - &u * s).norm() <= 1e-12 * (1.0 + g.norm()));
            }
        }
    }
}
