//! Constructive convexity machinery for the inflated image set of a family
//! of scalar quadratics.
//!
//! For functionals `f_k(x) = a_k ||x||^2 + 2 <b_k, x> + c_k`, any two points
//! `x_v, x_w` and a weight `lambda` in (0, 1), the witness construction
//! produces
//!
//! ```text
//! x~ = alpha * y_v + lambda x_v + (1 - lambda) x_w
//! ```
//!
//! where `y_v` is a unit vector orthogonal to every `b_k` and `alpha` solves
//!
//! ```text
//! alpha^2 ||y_v||^2 + 2 alpha <y_v, lambda x_v + (1-lambda) x_w>
//!     - lambda (1-lambda) ||x_v - x_w||^2 = 0.
//! ```
//!
//! The two properties that make this work: `||x~||^2` equals the convex
//! combination of the endpoint squared norms (membership in the sphere that
//! the alpha-equation encodes), and `<b_k, x~>` equals `<b_k, .>` of the
//! convex combination (orthogonality). Together they force
//! `f_k(x~) = lambda f_k(x_v) + (1-lambda) f_k(x_w)` exactly, for every `k`
//! simultaneously. The discriminant of the alpha-equation is a sum of a
//! square and a positive product, so a real root always exists.
//!
//! The construction needs a nonzero kernel direction, i.e. the span of the
//! `b_k` must not be the whole space ([`Error::FullRank`] otherwise).

use crate::linalg::{hestenes_orthogonalize, stable_quadratic_roots};
use crate::model::{ScalarQuadratic, Vector};
use crate::rng::Rng;
use crate::{Error, Result};

/// Relative singular-value cutoff used to decide the rank of the span of
/// the linear terms.
const RANK_THRESHOLD: f64 = 1e-10;

/// Output of the witness construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessResult {
    /// The constructed point.
    pub x_tilde: Vector,
    /// Both real roots of the alpha-equation, ascending.
    pub alpha_roots: (f64, f64),
    /// The root used for `x_tilde` (larger magnitude; positive on a tie).
    pub chosen_alpha: f64,
    /// `<y_v, p>^2 + lambda (1-lambda) ||y_v||^2 ||x_v - x_w||^2`, with
    /// `p` the convex combination of the endpoints. Always nonnegative.
    pub discriminant: f64,
    /// The unit kernel direction `y_v`.
    pub kernel_vector: Vector,
    /// Per-functional slack
    /// `lambda f_k(x_v) + (1-lambda) f_k(x_w) - f_k(x_tilde)`; zero up to
    /// roundoff by construction.
    pub slacks: Vec<f64>,
}

/// Orthogonalizes copies of the given vectors (Hestenes plane rotations,
/// which preserve the span) and reports them with their norms, which are
/// the singular values of the stack.
fn orthogonalized_span(bs: &[Vector]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut cols: Vec<Vec<f64>> = bs.iter().map(|b| b.as_slice().to_vec()).collect();
    hestenes_orthogonalize(&mut cols);
    let sigma: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    (cols, sigma)
}

fn rank_from_singular_values(sigma: &[f64]) -> usize {
    let max = sigma.iter().fold(0.0f64, |m, s| m.max(*s));
    if max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|s| **s > RANK_THRESHOLD * max).count()
}

/// Numerical rank of the span of the given vectors.
pub fn rank_of_span(bs: &[Vector]) -> usize {
    rank_from_singular_values(&orthogonalized_span(bs).1)
}

/// A unit vector orthogonal to every `b` in `bs`.
///
/// The rank of the span is decided by a relative singular-value cutoff of
/// `1e-10`; if it equals the ambient dimension the kernel is trivial and the
/// call fails with [`Error::FullRank`]. An all-zero family yields `e_1`.
pub fn kernel_vector(bs: &[Vector], n: usize) -> Result<Vector> {
    if n == 0 {
        return Err(Error::DegenerateInput("ambient dimension is zero"));
    }
    for b in bs {
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.dim(),
            });
        }
    }
    let (cols, sigma) = orthogonalized_span(bs);
    let rank = rank_from_singular_values(&sigma);
    if rank >= n {
        return Err(Error::FullRank { rank, dim: n });
    }
    if rank == 0 {
        return Ok(Vector::unit(n, 0));
    }

    // Orthonormal basis of the span: the orthogonalized vectors whose norms
    // survived the rank cutoff, normalized.
    let sigma_max = sigma.iter().fold(0.0f64, |m, s| m.max(*s));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rank);
    for (col, s) in cols.into_iter().zip(&sigma) {
        if *s > RANK_THRESHOLD * sigma_max {
            basis.push(col.into_iter().map(|x| x / s).collect());
        }
    }

    // The coordinate direction with the largest residual against the basis
    // is the stablest seed for the kernel direction: the residual norms
    // square-sum to n - rank >= 1.
    let mut best_j = 0;
    let mut best_res = f64::NEG_INFINITY;
    for j in 0..n {
        let projected: f64 = basis.iter().map(|q| q[j] * q[j]).sum();
        let res = 1.0 - projected;
        if res > best_res {
            best_res = res;
            best_j = j;
        }
    }
    let mut y: Vec<f64> = vec![0.0; n];
    y[best_j] = 1.0;
    // Two orthogonalization passes for a clean kernel direction.
    for _ in 0..2 {
        for q in &basis {
            let proj: f64 = y.iter().zip(q).map(|(yi, qi)| yi * qi).sum();
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi -= proj * qi;
            }
        }
    }
    let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        // Cannot happen with rank < n; defensive against pathological input.
        return Err(Error::FullRank { rank, dim: n });
    }
    for x in y.iter_mut() {
        *x /= norm;
    }
    Ok(Vector::raw(y))
}

/// Roots of the alpha-equation together with its (always nonnegative)
/// discriminant
/// `<y_v, p>^2 + lambda (1-lambda) ||y_v||^2 ||x_v - x_w||^2`.
///
/// Roots come from the cancellation-stable quadratic formula: the
/// larger-magnitude root first, the other via the product of roots.
pub fn sphere_alpha(
    y_v: &Vector,
    x_v: &Vector,
    x_w: &Vector,
    lambda: f64,
) -> Result<((f64, f64), f64)> {
    let n = y_v.dim();
    if x_v.dim() != n || x_w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if x_v.dim() != n { x_v.dim() } else { x_w.dim() },
        });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::DegenerateInput("lambda must lie strictly in (0, 1)"));
    }
    if x_v == x_w {
        return Err(Error::DegenerateInput("endpoints coincide"));
    }
    let y_norm_sq = y_v.norm_sq();
    if y_norm_sq == 0.0 {
        return Err(Error::DegenerateInput("kernel direction is zero"));
    }
    let midpoint = x_v.scaled(lambda).add_scaled(x_w, 1.0 - lambda);
    let y_dot_p = y_v.dot(&midpoint);
    let sep_sq = x_v.sub(x_w).norm_sq();
    let discriminant = y_dot_p * y_dot_p + lambda * (1.0 - lambda) * y_norm_sq * sep_sq;
    let roots = stable_quadratic_roots(y_norm_sq, 2.0 * y_dot_p, -lambda * (1.0 - lambda) * sep_sq);
    Ok((roots, discriminant))
}

fn pick_alpha(roots: (f64, f64)) -> f64 {
    // The product of the roots is negative, so lo < 0 < hi. Prefer the
    // larger magnitude; magnitudes within roundoff of each other count as a
    // tie, resolved toward the positive root.
    let (lo, hi) = roots;
    if lo.abs() > hi.abs() * (1.0 + 1e-9) {
        lo
    } else {
        hi
    }
}

/// Builds the witness point for the family `fs` at `(x_v, x_w, lambda)`.
///
/// Coincident endpoints short-circuit to `x_tilde = x_v` with `alpha = 0`;
/// the rank precondition is still checked so [`Error::FullRank`] surfaces
/// either way.
pub fn convexity_witness(
    fs: &[ScalarQuadratic],
    x_v: &Vector,
    x_w: &Vector,
    lambda: f64,
) -> Result<WitnessResult> {
    if fs.is_empty() {
        return Err(Error::DegenerateInput("empty family of functionals"));
    }
    let n = fs[0].dim();
    for f in fs {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.dim(),
            });
        }
    }
    if x_v.dim() != n || x_w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if x_v.dim() != n { x_v.dim() } else { x_w.dim() },
        });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::DegenerateInput("lambda must lie strictly in (0, 1)"));
    }
    let bs: Vec<Vector> = fs.iter().map(|f| f.b.clone()).collect();
    let y_v = kernel_vector(&bs, n)?;

    let slacks_at = |x_tilde: &Vector| -> Result<Vec<f64>> {
        fs.iter()
            .map(|f| Ok(lambda * f.eval(x_v)? + (1.0 - lambda) * f.eval(x_w)? - f.eval(x_tilde)?))
            .collect()
    };

    if x_v == x_w {
        let x_tilde = x_v.clone();
        let slacks = slacks_at(&x_tilde)?;
        return Ok(WitnessResult {
            x_tilde,
            alpha_roots: (0.0, 0.0),
            chosen_alpha: 0.0,
            discriminant: 0.0,
            kernel_vector: y_v,
            slacks,
        });
    }

    let (alpha_roots, discriminant) = sphere_alpha(&y_v, x_v, x_w, lambda)?;
    let chosen_alpha = pick_alpha(alpha_roots);
    let midpoint = x_v.scaled(lambda).add_scaled(x_w, 1.0 - lambda);
    let x_tilde = midpoint.add_scaled(&y_v, chosen_alpha);
    let slacks = slacks_at(&x_tilde)?;
    Ok(WitnessResult {
        x_tilde,
        alpha_roots,
        chosen_alpha,
        discriminant,
        kernel_vector: y_v,
        slacks,
    })
}

/// Sampling plan for [`sample_image`].
#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub count: usize,
    /// Per-coordinate sampling intervals.
    pub box_bounds: Vec<(f64, f64)>,
    /// Upper bound of the positive jitter added to each image coordinate;
    /// zero disables the jitter entirely and yields the raw image set.
    pub shift: f64,
    pub seed: u64,
}

/// Smallest jitter: the inflation adds points from the *open* positive
/// orthant, so zero itself is excluded.
const JITTER_FLOOR: f64 = 1e-12;

/// Point cloud `(f_0(x), ..., f_m(x))` for `x` uniform in the box, each
/// coordinate optionally inflated by a jitter drawn from
/// `(JITTER_FLOOR, shift]`. Deterministic in `cfg.seed`, with an independent
/// stream per sample index.
pub fn sample_image(fs: &[ScalarQuadratic], cfg: &SampleConfig) -> Result<Vec<Vec<f64>>> {
    if fs.is_empty() {
        return Err(Error::DegenerateInput("empty family of functionals"));
    }
    if cfg.count == 0 {
        return Err(Error::DegenerateInput("sample count must be positive"));
    }
    if cfg.shift < 0.0 {
        return Err(Error::DegenerateInput("jitter shift must be nonnegative"));
    }
    let n = fs[0].dim();
    if cfg.box_bounds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cfg.box_bounds.len(),
        });
    }
    for &(lo, hi) in &cfg.box_bounds {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::DegenerateInput("invalid sampling box"));
        }
    }
    let mut cloud = Vec::with_capacity(cfg.count);
    for index in 0..cfg.count {
        let mut rng = Rng::for_index(cfg.seed, index as u64);
        let x: Vec<f64> = cfg
            .box_bounds
            .iter()
            .map(|&(lo, hi)| rng.uniform(lo, hi))
            .collect();
        let row: Vec<f64> = fs
            .iter()
            .map(|f| {
                let v = f.eval_slice(&x);
                if cfg.shift > 0.0 {
                    // (1 - u) maps [0, 1) onto (0, 1], keeping the jitter in
                    // the open-at-zero interval.
                    let u = rng.next_f64();
                    v + JITTER_FLOOR + (cfg.shift - JITTER_FLOOR) * (1.0 - u)
                } else {
                    v
                }
            })
            .collect();
        cloud.push(row);
    }
    Ok(cloud)
}
