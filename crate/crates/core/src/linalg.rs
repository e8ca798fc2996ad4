//! Dense linear-algebra kernels used by the chain solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `a x = b` by LU with partial pivoting.
pub(crate) fn lu_solve(a: DMatrix<f64>, b: DVector<f64>, context: &str) -> Result<DVector<f64>> {
    let x = a.lu().solve(&b).ok_or_else(|| Error::Singular {
        context: context.to_string(),
    })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            context: context.to_string(),
        });
    }
    Ok(x)
}

/// Stationary vector of an irreducible chain by Grassmann–Taksar–Heyman
/// state reduction. `rates` holds the off-diagonal transition rates,
/// row-major; the diagonal is ignored. No subtractions are performed, so the
/// result is accurate to working precision regardless of conditioning.
pub(crate) fn gth_stationary(mut rates: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = rates.nrows();
    for k in (1..n).rev() {
        let out: f64 = (0..k).map(|j| rates[(k, j)]).sum();
        if out <= 0.0 {
            return Err(Error::Singular {
                context: format!("state reduction: state {k} cannot reach lower states"),
            });
        }
        for i in 0..k {
            rates[(i, k)] /= out;
        }
        for i in 0..k {
            let a_ik = rates[(i, k)];
            if a_ik == 0.0 {
                continue;
            }
            for j in 0..k {
                if i != j {
                    rates[(i, j)] += a_ik * rates[(k, j)];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for j in 1..n {
        x[j] = (0..j).map(|i| x[i] * rates[(i, j)]).sum();
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        // -2 I1 + I2 = -2, I1 - 2 I2 = -1
        let a = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -2.0]);
        let b = DVector::from_vec(vec![-2.0, -1.0]);
        let x = lu_solve(a, b, "test").unwrap();
        assert!((x[0] - 5.0 / 3.0).abs() < 1e-14);
        assert!((x[1] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn lu_reports_singularity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(lu_solve(a, b, "test").is_err());
    }

    #[test]
    fn gth_matches_birth_death_closed_form() {
        // M/M/2/2 with λ = μ = 1: π ∝ (1, 1, 1/2).
        let rates = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        let pi = gth_stationary(rates).unwrap();
        for (got, want) in pi.iter().zip([0.4, 0.4, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn gth_handles_non_reversible_cycle() {
        // 0 -> 1 -> 2 -> 0 at rates 1, 2, 3: π ∝ (1/1, 1/2, 1/3).
        let rates = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 3.0, 0.0, 0.0]);
        let pi = gth_stationary(rates).unwrap();
        let z = 1.0 + 0.5 + 1.0 / 3.0;
        for (got, want) in pi.iter().zip([1.0 / z, 0.5 / z, 1.0 / 3.0 / z]) {
            assert!((got - want).abs() < 1e-15);
        }
    }
}
