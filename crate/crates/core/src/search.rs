//! Multi-start local descent on the pointwise maximum of a family of
//! functionals, seeded with low-discrepancy samples over a box.
//!
//! This is the shared engine behind strictly-feasible-point search: a point
//! `x` with `max_k f_k(x) < 0` simultaneously satisfies every functional
//! strictly. Absence of a result is a budget statement, not a proof.

use crate::model::Vector;
use crate::rng::{halton, Rng};

/// Budget and geometry for the strict-point search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Half-width of the sampling cube `[-h, h]^n`.
    pub box_halfwidth: f64,
    /// Number of low-discrepancy samples.
    pub samples: usize,
    /// How many of the best samples get a local descent.
    pub descents: usize,
    /// Iteration cap per descent.
    pub max_descent_iters: usize,
    /// Simplex resolution for multiplier searches (denominator of the grid).
    pub grid: usize,
    /// Seed for the randomized parts.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            box_halfwidth: 10.0,
            samples: 1024,
            descents: 8,
            max_descent_iters: 200,
            grid: 200,
            seed: 0,
        }
    }
}

/// Anything that can report a value and a gradient at a point.
pub(crate) trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Magnitude scale of the evaluation (all terms taken in absolute
    /// value); bounds the roundoff of `value`.
    fn value_scale(&self, x: &[f64]) -> f64;
}

impl Objective for crate::model::ScalarQuadratic {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_slice(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad_slice(x)
    }
    fn value_scale(&self, x: &[f64]) -> f64 {
        let mut norm_sq = 0.0;
        let mut lin = 0.0;
        for (xi, bi) in x.iter().zip(self.b.iter()) {
            norm_sq += xi * xi;
            lin += (bi * xi).abs();
        }
        self.a.abs() * norm_sq + 2.0 * lin + self.c.abs()
    }
}

pub(crate) struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evals: u64,
}

fn max_value<F: Objective>(fs: &[F], x: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (k, f) in fs.iter().enumerate() {
        let v = f.value(x);
        if v > best {
            best = v;
            arg = k;
        }
    }
    (best, arg)
}

/// Minimize `max_k f_k` over the box by sampling plus steepest descent with
/// backtracking on the active functional.
pub(crate) fn minimize_max<F: Objective>(fs: &[F], n: usize, cfg: &SearchConfig) -> SearchResult {
    let h = cfg.box_halfwidth;
    let mut evals: u64 = 0;
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::with_capacity(cfg.samples + 2);

    let origin = vec![0.0; n];
    let (v0, _) = max_value(fs, &origin);
    evals += fs.len() as u64;
    starts.push((v0, origin));

    let mut rng = Rng::new(cfg.seed);
    for i in 0..cfg.samples {
        // Alternate Halton coverage with plain uniform draws.
        let x: Vec<f64> = if i % 4 != 3 {
            halton(i as u64, n)
                .into_iter()
                .map(|u| (2.0 * u - 1.0) * h)
                .collect()
        } else {
            (0..n).map(|_| rng.uniform(-h, h)).collect()
        };
        let (v, _) = max_value(fs, &x);
        evals += fs.len() as u64;
        starts.push((v, x));
    }

    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = starts[0].clone();

    for (start_value, start) in starts.into_iter().take(cfg.descents.max(1)) {
        let mut x = start;
        let mut fx = start_value;
        for _ in 0..cfg.max_descent_iters {
            let (_, active) = max_value(fs, &x);
            let g = fs[active].gradient(&x);
            let gnorm_sq: f64 = g.iter().map(|gi| gi * gi).sum();
            if gnorm_sq < 1e-24 {
                break;
            }
            let mut t = 1.0 / (1.0 + gnorm_sq.sqrt());
            let mut moved = false;
            for _ in 0..40 {
                let y: Vec<f64> = x
                    .iter()
                    .zip(&g)
                    .map(|(xi, gi)| (xi - t * gi).clamp(-h, h))
                    .collect();
                let (fy, _) = max_value(fs, &y);
                evals += fs.len() as u64;
                if fy < fx - 1e-12 * (1.0 + fx.abs()) {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if fx < best.0 {
            best = (fx, x);
        }
    }

    SearchResult {
        point: best.1,
        value: best.0,
        evals,
    }
}

/// A point where every functional is strictly negative, if the budget finds
/// one. The returned point is re-verified by evaluation with a roundoff
/// guard: a value must clear zero by more than the evaluation's own error
/// bound, otherwise "strictly negative" would be a statement about noise.
pub(crate) fn strict_point<F: Objective>(
    fs: &[F],
    n: usize,
    cfg: &SearchConfig,
) -> (Option<Vector>, u64) {
    if fs.is_empty() {
        return (Some(Vector::zeros(n)), 0);
    }
    let result = minimize_max(fs, n, cfg);
    let guard = 64.0 * f64::EPSILON;
    let verified = result.value < 0.0
        && fs
            .iter()
            .all(|f| f.value(&result.point) < -guard * f.value_scale(&result.point));
    if verified {
        (Some(Vector::raw(result.point)), result.evals)
    } else {
        (None, result.evals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarQuadratic;

    fn q(a: f64, b: &[f64], c: f64) -> ScalarQuadratic {
        ScalarQuadratic::new(a, Vector::from_slice(b).unwrap(), c).unwrap()
    }

    #[test]
    fn finds_interior_of_ball() {
        let fs = [q(1.0, &[0.0, 0.0], -1.0)];
        let (pt, _) = strict_point(&fs, 2, &SearchConfig::default());
        let pt = pt.expect("ball interior");
        assert!(pt.norm() < 1.0);
    }

    #[test]
    fn no_strict_point_for_pure_square() {
        let fs = [q(1.0, &[0.0, 0.0], 0.0)];
        let (pt, _) = strict_point(&fs, 2, &SearchConfig::default());
        assert!(pt.is_none());
    }

    #[test]
    fn finds_annulus_point() {
        // ||x||^2 - 1 < 0 and 0.25 - ||x||^2 < 0: a thin annulus.
        let fs = [q(1.0, &[0.0, 0.0], -1.0), q(-1.0, &[0.0, 0.0], 0.25)];
        let (pt, _) = strict_point(&fs, 2, &SearchConfig::default());
        let pt = pt.expect("annulus point");
        let r = pt.norm();
        assert!(r > 0.5 && r < 1.0, "radius {r}");
    }

    #[test]
    fn deterministic_given_seed() {
        let fs = [q(1.0, &[1.0, -2.0], -0.5)];
        let cfg = SearchConfig::default();
        let (a, _) = strict_point(&fs, 2, &cfg);
        let (b, _) = strict_point(&fs, 2, &cfg);
        assert_eq!(a, b);
    }
}
