//! Dense symmetric eigenvalues (cyclic Jacobi) and cancellation-stable
//! quadratic roots. Desk-scale only: everything is O(n^3) or better.

/// Eigenvalues of a symmetric matrix in row-major storage, unsorted.
///
/// Cyclic Jacobi rotations; terminates when the off-diagonal Frobenius norm
/// falls below `1e-14` of the matrix norm. Quadratic convergence makes the
/// sweep cap generous.
pub(crate) fn symmetric_eigenvalues(n: usize, matrix: &[f64]) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 || n < 2 {
        return (0..n)
            .map(|i| a.get(i * n + i).copied().unwrap_or(0.0))
            .collect();
    }
    let tol = 1e-14 * frob;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Apply the rotation on rows and columns p, q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

pub(crate) fn smallest_eigenvalue(n: usize, matrix: &[f64]) -> f64 {
    symmetric_eigenvalues(n, matrix)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// One-sided Jacobi (Hestenes) orthogonalization: plane rotations make the
/// given vectors mutually orthogonal while preserving their span. The final
/// norms are the singular values of the original stack, at full working
/// precision. A Gram-matrix eigensolve would lose half the digits to
/// squaring and could not support a `1e-10` relative cutoff.
pub(crate) fn hestenes_orthogonalize(cols: &mut [Vec<f64>]) {
    let m = cols.len();
    for _sweep in 0..60 {
        let mut converged = true;
        for i in 0..m {
            for j in (i + 1)..m {
                let (ci, cj) = {
                    let (a, b) = cols.split_at_mut(j);
                    (&mut a[i], &mut b[0])
                };
                let aii: f64 = ci.iter().map(|x| x * x).sum();
                let ajj: f64 = cj.iter().map(|x| x * x).sum();
                let aij: f64 = ci.iter().zip(cj.iter()).map(|(x, y)| x * y).sum();
                if aij == 0.0 || aij.abs() <= 1e-15 * (aii * ajj).sqrt() {
                    continue;
                }
                converged = false;
                let tau = (ajj - aii) / (2.0 * aij);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let xi = *x;
                    let yi = *y;
                    *x = c * xi - s * yi;
                    *y = s * xi + c * yi;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Both real roots of `a t^2 + b t + c = 0`, returned in ascending order.
///
/// Requires `a != 0` and a nonnegative discriminant. The larger-magnitude
/// root is computed first and the other recovered from the product of roots,
/// avoiding the cancellation of the textbook formula.
pub(crate) fn stable_quadratic_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
    debug_assert!(a != 0.0);
    let disc = b * b - 4.0 * a * c;
    debug_assert!(disc >= 0.0, "negative discriminant {disc}");
    let sqrt_disc = disc.max(0.0).sqrt();
    let q = if b >= 0.0 {
        -(b + sqrt_disc) / 2.0
    } else {
        -(b - sqrt_disc) / 2.0
    };
    let (r1, r2) = if q == 0.0 {
        // b = 0 and disc = 0: double root at the origin.
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    if r1 <= r2 {
        (r1, r2)
    } else {
        (r2, r1)
    }
}
