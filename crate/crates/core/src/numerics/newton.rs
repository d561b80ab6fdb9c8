use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_NEWTON_STEPS: usize = 200;
const MAX_HALVINGS: usize = 60;

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0_f64,
        |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

/// Damped Newton iteration for `F(x) = 0`.
///
/// Each full step is halved until the max-norm of the residual decreases, so
/// accepted iterates have strictly decreasing residual. Non-finite trial
/// residuals count as no improvement.
pub fn damped_newton<F, J>(
    residual: F,
    jacobian: J,
    initial_guess: &[f64],
    tol: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!(
            "Newton tolerance must be positive, got {tol}"
        )));
    }
    let mut x = initial_guess.to_vec();
    let mut f = residual(&x);
    let mut norm = max_norm(&f);
    if !norm.is_finite() {
        return Err(Error::Invalid(
            "residual is not finite at the initial guess".into(),
        ));
    }

    for _ in 0..MAX_NEWTON_STEPS {
        if norm < tol {
            return Ok(x);
        }
        let jac = jacobian(&x);
        let rhs = -DVector::from_column_slice(&f);
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence {
            what: "damped Newton (singular Jacobian)",
            iterations: 0,
            residual: norm,
        })?;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, si)| xi + lambda * si)
                .collect();
            let ft = residual(&trial);
            let nt = max_norm(&ft);
            if nt.is_finite() && nt < norm {
                x = trial;
                f = ft;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if norm < tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            what: "damped Newton",
            iterations: MAX_NEWTON_STEPS,
            residual: norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_square_root() {
        let x = damped_newton(
            |x| vec![x[0] * x[0] - 1.0],
            |x| DMatrix::from_element(1, 1, 2.0 * x[0]),
            &[2.0],
            1e-14,
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn damping_rescues_overshoot() {
        // atan has a tiny basin for undamped Newton.
        let x = damped_newton(
            |x| vec![x[0].atan()],
            |x| DMatrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0])),
            &[10.0],
            1e-14,
        )
        .unwrap();
        assert!(x[0].abs() < 1e-14);
    }

    #[test]
    fn reports_failure_with_residual() {
        let err = damped_newton(
            |x| vec![x[0] * x[0] + 1.0],
            |x| DMatrix::from_element(1, 1, 2.0 * x[0]),
            &[0.5],
            1e-12,
        )
        .unwrap_err();
        match err {
            Error::NoConvergence { residual, .. } => assert!(residual >= 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(damped_newton(|x| x.to_vec(), |_| DMatrix::identity(1, 1), &[1.0], 0.0).is_err());
    }
}
