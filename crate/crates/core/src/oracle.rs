//! Brute-force grid ground truth for small instances.
//!
//! Nothing here certifies anything: a grid minimum is evidence, and its only
//! job is to contradict (or fail to contradict) the certified solvers in
//! tests. Kept deliberately independent of the dual and KKT code paths.

use crate::model::{Problem, ScalarQuadratic, Vector};
use crate::{Error, Result};

/// Feasibility slack applied to grid points, so boundary optima that fall
/// between grid nodes are not rejected.
const FEASIBILITY_SLACK: f64 = 1e-9;

const GRID_LIMIT: u128 = 100_000_000;

/// A rectangular grid: per-coordinate intervals and a common per-axis count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    box_bounds: Vec<(f64, f64)>,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(box_bounds: Vec<(f64, f64)>, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::DegenerateInput(
                "grid needs at least 2 points per axis",
            ));
        }
        if box_bounds.is_empty() {
            return Err(Error::DegenerateInput("grid box is empty"));
        }
        for &(lo, hi) in &box_bounds {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFiniteEntry {
                    context: "grid box",
                });
            }
            if lo > hi {
                return Err(Error::DegenerateInput("grid box has lo > hi"));
            }
        }
        let mut size: u128 = 1;
        for _ in &box_bounds {
            size = size.saturating_mul(points_per_axis as u128);
            if size > GRID_LIMIT {
                return Err(Error::GridTooLarge {
                    size,
                    limit: GRID_LIMIT,
                });
            }
        }
        Ok(Self {
            box_bounds,
            points_per_axis,
        })
    }

    /// `[-h, h]^n` with the given per-axis count.
    pub fn symmetric(n: usize, halfwidth: f64, points_per_axis: usize) -> Result<Self> {
        Self::new(vec![(-halfwidth, halfwidth); n], points_per_axis)
    }

    pub fn dim(&self) -> usize {
        self.box_bounds.len()
    }

    fn coordinate(&self, axis: usize, index: usize) -> f64 {
        let (lo, hi) = self.box_bounds[axis];
        lo + (hi - lo) * index as f64 / (self.points_per_axis - 1) as f64
    }

    fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.box_bounds[axis];
        (hi - lo) / (self.points_per_axis - 1) as f64
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.box_bounds)
            .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }

    /// Visits every grid point in lexicographic index order.
    fn for_each(&self, mut visit: impl FnMut(&[f64])) {
        let n = self.dim();
        let mut index = vec![0usize; n];
        let mut x: Vec<f64> = (0..n).map(|i| self.coordinate(i, 0)).collect();
        loop {
            visit(&x);
            // Odometer increment.
            let mut axis = n;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < self.points_per_axis {
                    x[axis] = self.coordinate(axis, index[axis]);
                    break;
                }
                index[axis] = 0;
                x[axis] = self.coordinate(axis, 0);
            }
        }
    }
}

/// Result of a grid minimization.
#[derive(Debug, Clone, PartialEq)]
pub enum GridOutcome {
    Found {
        point: Vector,
        value: f64,
    },
    /// No grid point satisfied every constraint within the slack.
    Infeasible,
}

fn max_violation(p: &Problem, x: &[f64]) -> f64 {
    p.constraints()
        .iter()
        .fold(f64::NEG_INFINITY, |m, q| m.max(q.eval_slice(x)))
}

/// Pulls an infeasible candidate back onto the feasible set by backtracking
/// the scalar `theta` along the segment from a strictly interior anchor to
/// the candidate: the largest feasible `theta` is located by a descending
/// scan and sharpened by bisection. This reaches points *on* a curved
/// boundary, where a shortened axis step would stall.
fn project_to_feasible(p: &Problem, anchor: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let at = |theta: f64| -> Vec<f64> {
        anchor
            .iter()
            .zip(y)
            .map(|(a, yi)| a + theta * (yi - a))
            .collect()
    };
    let feasible = |theta: f64| max_violation(p, &at(theta)) <= FEASIBILITY_SLACK;
    if feasible(1.0) {
        return Some(y.to_vec());
    }
    const STEPS: usize = 64;
    let mut bracket = None;
    let mut infeasible_theta = 1.0;
    for i in (0..STEPS).rev() {
        let theta = i as f64 / STEPS as f64;
        if feasible(theta) {
            bracket = Some((theta, infeasible_theta));
            break;
        }
        infeasible_theta = theta;
    }
    let (mut lo, mut hi) = bracket?;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(lo))
}

/// Global minimization over the grid (ties broken by the lexicographically
/// first index), refined locally in three stages: coordinate descent with 20
/// step halvings (every move projected back to feasibility by scalar
/// backtracking toward the most interior grid point), a shrinking subgrid
/// zoom, and a quadratic-penalty polish. The refined value never exceeds the
/// raw grid value.
pub fn grid_minimize(p: &Problem, g: &GridSpec) -> Result<GridOutcome> {
    if g.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: g.dim(),
        });
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    // The deepest-interior grid point anchors the feasibility projection.
    let mut anchor: Option<(Vec<f64>, f64)> = None;
    g.for_each(|x| {
        let violation = max_violation(p, x);
        match &anchor {
            Some((_, incumbent)) if violation >= *incumbent => {}
            _ => anchor = Some((x.to_vec(), violation)),
        }
        if violation <= FEASIBILITY_SLACK {
            let value = p.objective().eval_slice(x);
            match &best {
                Some((_, incumbent)) if value >= *incumbent => {}
                _ => best = Some((x.to_vec(), value)),
            }
        }
    });
    let Some((mut x, mut value)) = best else {
        return Ok(GridOutcome::Infeasible);
    };
    let anchor = anchor.expect("nonempty grid").0;

    // Refinement: full coordinate moves at a halving step scale, each
    // projected back to feasibility. Several sweeps are allowed per scale so
    // the iterate can travel along a constraint boundary before the step
    // shrinks.
    let n = p.dim();
    let mut steps: Vec<f64> = (0..n).map(|i| g.spacing(i)).collect();
    for _level in 0..20 {
        for _sweep in 0..48 {
            let mut improved = false;
            for axis in 0..n {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[axis] = (y[axis] + sign * steps[axis])
                        .clamp(g.box_bounds[axis].0, g.box_bounds[axis].1);
                    let Some(candidate) = project_to_feasible(p, &anchor, &y) else {
                        continue;
                    };
                    if !g.contains(&candidate) {
                        continue;
                    }
                    let vy = p.objective().eval_slice(&candidate);
                    if vy < value {
                        x = candidate;
                        value = vy;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        for s in steps.iter_mut() {
            *s *= 0.5;
        }
    }

    // Zoom stage: rescan a box around the incumbent. Coordinate moves stall
    // where two constraint surfaces meet in an edge; a dense subgrid has no
    // such blind spot. When the subgrid optimum presses against the box
    // boundary the box is recentered at full size (travel), otherwise it
    // shrinks.
    let mut half: Vec<f64> = (0..n).map(|i| 3.0 * g.spacing(i)).collect();
    const ZOOM_POINTS: usize = 21;
    let zoom_size = (ZOOM_POINTS as u128).checked_pow(n as u32);
    let zoom_rounds = match zoom_size {
        Some(size) if size <= 10_000_000 => 60,
        _ => 0,
    };
    for _round in 0..zoom_rounds {
        let mut improved_point: Option<(Vec<f64>, f64)> = None;
        let sub = GridSpec {
            box_bounds: (0..n)
                .map(|i| {
                    let (lo, hi) = g.box_bounds[i];
                    ((x[i] - half[i]).max(lo), (x[i] + half[i]).min(hi))
                })
                .collect(),
            points_per_axis: ZOOM_POINTS,
        };
        sub.for_each(|y| {
            if max_violation(p, y) <= FEASIBILITY_SLACK {
                let vy = p.objective().eval_slice(y);
                let incumbent = improved_point.as_ref().map(|(_, v)| *v).unwrap_or(value);
                if vy < incumbent {
                    improved_point = Some((y.to_vec(), vy));
                }
            }
        });
        let mut traveling = false;
        if let Some((y, vy)) = improved_point {
            traveling = (0..n).any(|i| (y[i] - x[i]).abs() >= 0.8 * half[i]);
            x = y;
            value = vy;
        }
        if !traveling {
            for h in half.iter_mut() {
                *h *= 0.35;
            }
            if half.iter().all(|h| *h < 1e-9) {
                break;
            }
        }
    }

    // Penalty polish: where the feasible set pinches into a sliver (two
    // constraint surfaces meeting near tangentially) no axis-aligned grid
    // can resolve the optimum. The quadratic penalty turns the same optimum
    // into the bottom of a smooth unconstrained valley; the residual
    // violation at penalty weight rho is O(1/rho), far below the
    // feasibility slack at the last ramp stage.
    let penalty = |rho: f64, z: &[f64]| -> f64 {
        let mut pen = 0.0;
        for q in p.constraints() {
            let v = q.eval_slice(z);
            if v > 0.0 {
                pen += v * v;
            }
        }
        p.objective().eval_slice(z) + rho * pen
    };
    let scale0 = (0..n).map(|i| g.spacing(i)).fold(0.0f64, f64::max);
    let mut y = x.clone();
    for rho in [1e3, 1e6, 1e9, 1e12] {
        y = nelder_mead(&|z: &[f64]| penalty(rho, z), g, &y, scale0, 400 * n);
    }
    let candidate = if max_violation(p, &y) <= FEASIBILITY_SLACK {
        Some(y.clone())
    } else {
        project_to_feasible(p, &anchor, &y)
    };
    if let Some(c) = candidate {
        let vc = p.objective().eval_slice(&c);
        if vc < value && g.contains(&c) {
            x = c;
            value = vc;
        }
    }

    Ok(GridOutcome::Found {
        point: Vector::raw(x),
        value,
    })
}

/// Deterministic Nelder-Mead on `f`, clamped to the box. Used on the
/// penalty landscape, where it can follow the narrow curved valleys that
/// axis-aligned moves cannot.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    g: &GridSpec,
    start: &[f64],
    scale: f64,
    max_iters: usize,
) -> Vec<f64> {
    let n = start.len();
    let clamp = |mut x: Vec<f64>| -> Vec<f64> {
        for (xi, (lo, hi)) in x.iter_mut().zip(&g.box_bounds) {
            *xi = xi.clamp(*lo, *hi);
        }
        x
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let base = clamp(start.to_vec());
    simplex.push((base.clone(), f(&base)));
    for i in 0..n {
        let mut v = base.clone();
        v[i] += scale;
        let v = clamp(v);
        let fv = f(&v);
        simplex.push((v, fv));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread: f64 = (0..n)
            .map(|i| (simplex[n].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if spread < 1e-12 * (1.0 + simplex[0].0.iter().fold(0.0f64, |m, x| m.max(x.abs()))) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(v, _)| v[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point_at = |t: f64| -> Vec<f64> {
            clamp(
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect(),
            )
        };
        let reflected = point_at(1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = point_at(2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                point_at(0.5)
            } else {
                point_at(-0.5)
            };
            let fc = f(&contracted);
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    entry.1 = f(&shrunk);
                    entry.0 = shrunk;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}

/// Grid point with the most negative value of `q`, when one dips below
/// `-1e-12`. Absence is evidence of nonnegativity, never proof.
pub fn grid_refute_nonneg(q: &ScalarQuadratic, g: &GridSpec) -> Result<Option<Vector>> {
    if g.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: g.dim(),
        });
    }
    let mut worst: Option<(Vec<f64>, f64)> = None;
    g.for_each(|x| {
        let v = q.eval_slice(x);
        match &worst {
            Some((_, incumbent)) if v >= *incumbent => {}
            _ => worst = Some((x.to_vec(), v)),
        }
    });
    Ok(match worst {
        Some((x, v)) if v < -1e-12 => Some(Vector::raw(x)),
        _ => None,
    })
}
