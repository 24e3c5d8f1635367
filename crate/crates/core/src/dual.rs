//! Lagrangian dual of the scalar QCQP and the global solver built on it.
//!
//! With multipliers `gamma >= 0`, the aggregated quadratic
//! `L(x, gamma) = a(gamma) ||x||^2 + 2 <b(gamma), x> + c(gamma)` has a
//! closed-form infimum over `x`:
//!
//! - `a > 0`: attained at `x = -b / a` with value `c - ||b||^2 / a`;
//! - `a = 0, b = 0`: flat, every `x` attains the value `c`;
//! - otherwise: unbounded below.
//!
//! The dual function `g(gamma)` is concave; [`solve`] maximizes it with
//! projected supergradient ascent (multi-start), then polishes the best
//! iterate with per-coordinate golden-section and a bisection on the exact
//! dual derivative, recovers a primal point, and certifies it through
//! [`crate::kkt::check_kkt_with_slater`].

use crate::kkt::{self, CheckReport};
use crate::linalg::stable_quadratic_roots;
use crate::model::{Certificate, Multipliers, Problem, ToleranceSet, Vector, Verdict};
use crate::rng::Rng;
use crate::search::{self, SearchConfig};
use crate::{Error, Result};

/// How the inner minimization of the Lagrangian ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStatus {
    /// Positive aggregated curvature; unique minimizer `-b/a`.
    Attained,
    /// Dual value `-inf`: negative curvature, or zero curvature with a
    /// nonzero linear term.
    UnboundedBelow,
    /// Zero curvature and zero linear term: every point is a minimizer; the
    /// minimizer field carries the zero vector by convention.
    FlatAttained,
}

/// Value and minimizer of `inf_x L(x, gamma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEvaluation {
    /// `-inf` exactly when the status is [`DualStatus::UnboundedBelow`].
    pub value: f64,
    pub minimizer: Option<Vector>,
    pub status: DualStatus,
}

/// Dual value at `gamma` (plain multipliers only).
pub fn dual_value(p: &Problem, gamma: &Multipliers) -> Result<DualEvaluation> {
    if gamma.gamma0().is_some() {
        return Err(Error::UnexpectedGamma0);
    }
    let agg = p.aggregate(gamma)?;
    Ok(if agg.a > 0.0 {
        let minimizer = agg.b.scaled(-1.0 / agg.a);
        DualEvaluation {
            value: agg.c - agg.b.norm_sq() / agg.a,
            minimizer: Some(minimizer),
            status: DualStatus::Attained,
        }
    } else if agg.a == 0.0 && agg.b.is_zero() {
        DualEvaluation {
            value: agg.c,
            minimizer: Some(Vector::zeros(p.dim())),
            status: DualStatus::FlatAttained,
        }
    } else {
        DualEvaluation {
            value: f64::NEG_INFINITY,
            minimizer: None,
            status: DualStatus::UnboundedBelow,
        }
    })
}

/// Budgets and tolerances for [`solve`].
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Acceptable |dual value - J(x*)| at the end.
    pub gap_tol: f64,
    /// Independent ascent restarts.
    pub restarts: usize,
    /// Supergradient iterations per restart.
    pub ascent_iters: usize,
    /// Initial step size; the schedule is `step0 / sqrt(t)`.
    pub step0: f64,
    pub seed: u64,
    /// Budget for the strictly-feasible-point search and the flat-case
    /// primal recovery.
    pub search: SearchConfig,
    pub tolerances: ToleranceSet,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            restarts: 10,
            ascent_iters: 5000,
            step0: 1.0,
            seed: 0,
            search: SearchConfig::default(),
            tolerances: ToleranceSet::default(),
        }
    }
}

/// Hard cap on any single multiplier; reaching it with a still-growing dual
/// value is treated as divergence.
const GAMMA_CAP: f64 = 1e9;
/// Dual values above this are read as "unbounded above" (primal infeasible
/// by weak duality).
const DIVERGENCE_VALUE: f64 = 1e8;

struct RawDual<'p> {
    p: &'p Problem,
}

impl<'p> RawDual<'p> {
    /// Aggregated coefficients at raw gamma, without multiplier validation.
    fn aggregate(&self, gamma: &[f64]) -> (f64, Vec<f64>, f64) {
        let obj = self.p.objective();
        let mut a = obj.a;
        let mut c = obj.c;
        let mut b: Vec<f64> = obj.b.iter().copied().collect();
        for (q, &g) in self.p.constraints().iter().zip(gamma) {
            a += g * q.a;
            c += g * q.c;
            for (bi, qi) in b.iter_mut().zip(q.b.iter()) {
                *bi += g * qi;
            }
        }
        (a, b, c)
    }

    fn value(&self, gamma: &[f64]) -> f64 {
        let (a, b, c) = self.aggregate(gamma);
        if a > 0.0 {
            c - b.iter().map(|bi| bi * bi).sum::<f64>() / a
        } else if a == 0.0 && b.iter().all(|bi| *bi == 0.0) {
            c
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Dual partial derivative `f_k(x(gamma))` where the dual is smooth
    /// (attained with `a > 0`); `None` elsewhere.
    fn derivative(&self, gamma: &[f64], k: usize) -> Option<f64> {
        let (a, b, _) = self.aggregate(gamma);
        if a <= 0.0 {
            return None;
        }
        let x: Vec<f64> = b.iter().map(|bi| -bi / a).collect();
        Some(self.p.constraints()[k].eval_slice(&x))
    }
}

/// Feasible interval for coordinate `k` given the others: `gamma_k >= 0` and
/// `a(gamma) >= 0`. `None` when no choice of this coordinate can restore
/// nonnegative curvature.
fn coordinate_interval(raw: &RawDual, gamma: &[f64], k: usize) -> Option<(f64, f64)> {
    let a_k = raw.p.constraints()[k].a;
    let mut rest = raw.p.objective().a;
    for (j, (q, &g)) in raw.p.constraints().iter().zip(gamma).enumerate() {
        if j != k {
            rest += g * q.a;
        }
    }
    let mut lo = 0.0f64;
    let mut hi = GAMMA_CAP;
    if a_k > 0.0 {
        lo = lo.max(-rest / a_k);
    } else if a_k < 0.0 {
        let bound = rest / -a_k;
        if bound < 0.0 {
            return None;
        }
        hi = hi.min(bound);
    } else if rest < 0.0 {
        return None;
    }
    if lo > hi {
        return None;
    }
    Some((lo, hi))
}

/// Golden-section maximization of a concave 1-D function; endpoints are
/// evaluated explicitly so boundary maxima are hit exactly.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut best_t = lo;
    let mut best_v = f(lo);
    let v_hi = f(hi);
    if v_hi > best_v {
        best_t = hi;
        best_v = v_hi;
    }
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..160 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-16 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    let v_mid = f(mid);
    if v_mid > best_v {
        best_t = mid;
        best_v = v_mid;
    }
    (best_t, best_v)
}

/// Projected supergradient ascent from one start.
fn ascent(raw: &RawDual, start: Vec<f64>, cfg: &SolveConfig) -> (Vec<f64>, f64) {
    let m = raw.p.num_constraints();
    let mut gamma = start;
    let mut best = (gamma.clone(), raw.value(&gamma));
    for t in 1..=cfg.ascent_iters {
        let (a, b, _) = raw.aggregate(&gamma);
        let step = cfg.step0 / (t as f64).sqrt();
        let direction: Vec<f64> = if a > 0.0 {
            let x: Vec<f64> = b.iter().map(|bi| -bi / a).collect();
            raw.p
                .constraints()
                .iter()
                .map(|q| q.eval_slice(&x))
                .collect()
        } else if a == 0.0 && b.iter().all(|bi| *bi == 0.0) {
            raw.p.constraints().iter().map(|q| q.c).collect()
        } else {
            // Outside the effective domain: climb back along the curvature
            // coefficients until a(gamma) turns nonnegative.
            raw.p.constraints().iter().map(|q| q.a).collect()
        };
        for k in 0..m {
            gamma[k] = (gamma[k] + step * direction[k]).clamp(0.0, GAMMA_CAP);
        }
        let v = raw.value(&gamma);
        if v > best.1 {
            best = (gamma.clone(), v);
        }
    }
    best
}

/// Cyclic per-coordinate golden-section maximization of the dual.
fn golden_polish(raw: &RawDual, gamma: &mut [f64], value: &mut f64) {
    let m = raw.p.num_constraints();
    for _pass in 0..60 {
        let mut improved = false;
        for k in 0..m {
            let Some((lo, mut hi)) = coordinate_interval(raw, gamma, k) else {
                continue;
            };
            // Keep the window tight around the incumbent, expanding only if
            // the maximizer presses against the upper edge.
            hi = hi.min((gamma[k].abs() + 1.0) * 1e3).max(lo);
            loop {
                let f = |t: f64| {
                    let mut g = gamma.to_vec();
                    g[k] = t;
                    raw.value(&g)
                };
                let (t, v) = golden_max(f, lo, hi);
                if v > *value + 1e-15 * (1.0 + value.abs()) {
                    gamma[k] = t;
                    *value = v;
                    improved = true;
                }
                let full_hi = coordinate_interval(raw, gamma, k)
                    .map(|(_, h)| h)
                    .unwrap_or(hi);
                if t >= hi - 1e-9 * (1.0 + hi.abs()) && hi < full_hi {
                    hi = (hi * 8.0).min(full_hi);
                    continue;
                }
                break;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Bisection on the exact dual derivative `f_k(x(gamma))`, coordinate by
/// coordinate. Golden-section alone localizes the maximizer only to about
/// sqrt(eps) because of the flat quadratic top; the derivative sign is sharp
/// down to machine precision.
fn derivative_polish(raw: &RawDual, gamma: &mut [f64], value: &mut f64) {
    let m = raw.p.num_constraints();
    // Coordinate-wise bisection is a Gauss-Seidel iteration when several
    // constraints are active; its linear convergence wants a generous pass
    // budget (the loop exits early once nothing moves).
    for _pass in 0..500 {
        let mut moved = false;
        for k in 0..m {
            let Some((lo, hi)) = coordinate_interval(raw, gamma, k) else {
                continue;
            };
            let deriv = |t: f64, g: &[f64]| -> Option<f64> {
                let mut gg = g.to_vec();
                gg[k] = t;
                raw.derivative(&gg, k)
            };
            let Some(s_now) = deriv(gamma[k], gamma) else {
                continue;
            };
            if s_now == 0.0 {
                continue;
            }
            // Bracket a sign change of the (nonincreasing) derivative.
            let (mut neg, mut pos) = if s_now > 0.0 {
                let mut u = (gamma[k].max(lo) + 1.0).min(hi);
                let mut found = None;
                for _ in 0..64 {
                    match deriv(u, gamma) {
                        Some(s) if s <= 0.0 => {
                            found = Some(u);
                            break;
                        }
                        _ => {}
                    }
                    if u >= hi {
                        break;
                    }
                    u = (u * 4.0).min(hi);
                }
                match found {
                    Some(u) => (u, gamma[k]),
                    None => {
                        // Derivative positive across the interval: push to
                        // the edge.
                        if raw.value(&replaced(gamma, k, hi)) > *value {
                            gamma[k] = hi;
                            *value = raw.value(gamma);
                            moved = true;
                        }
                        continue;
                    }
                }
            } else {
                // The zero lies below gamma_k. The dual can drop to -inf at
                // the lower edge of the curvature domain where the
                // derivative is undefined, so probe geometrically toward
                // the edge rather than trusting the endpoint itself.
                let span = gamma[k] - lo;
                let mut found = None;
                let mut frac = 0.25;
                for _ in 0..64 {
                    let u = lo + span * frac;
                    if u <= lo {
                        break;
                    }
                    if let Some(s) = deriv(u, gamma) {
                        if s > 0.0 {
                            found = Some(u);
                            break;
                        }
                    }
                    frac *= 0.25;
                }
                match found {
                    Some(u) => (gamma[k], u),
                    None => {
                        // Derivative negative all the way down to the edge.
                        if raw.value(&replaced(gamma, k, lo)) > *value {
                            gamma[k] = lo;
                            *value = raw.value(gamma);
                            moved = true;
                        }
                        continue;
                    }
                }
            };
            for _ in 0..200 {
                let mid = 0.5 * (neg + pos);
                if mid == neg || mid == pos {
                    break;
                }
                match deriv(mid, gamma) {
                    Some(s) if s > 0.0 => pos = mid,
                    Some(_) => neg = mid,
                    None => break,
                }
            }
            let candidate = 0.5 * (neg + pos);
            let v = raw.value(&replaced(gamma, k, candidate));
            // The incumbent value can sit an ulp or two above the true
            // maximum from roundoff in the dual evaluation; the bisection
            // point is backed by a derivative sign change, so accept it
            // within that noise floor.
            if v >= *value - 1e-12 * (1.0 + value.abs()) {
                if candidate != gamma[k] {
                    moved = true;
                }
                gamma[k] = candidate;
                *value = v;
            }
        }
        if !moved {
            break;
        }
    }
}

fn replaced(gamma: &[f64], k: usize, t: f64) -> Vec<f64> {
    let mut g = gamma.to_vec();
    g[k] = t;
    g
}

/// Flat-case primal recovery: with `a(gamma) = 0` and `b(gamma) = 0` every
/// point minimizes the Lagrangian, so the primal solution is pinned down by
/// complementarity and feasibility alone. Scalar root-finding along random
/// directions lands on the boundary of an active constraint.
fn recover_flat(
    p: &Problem,
    gamma: &[f64],
    cfg: &SolveConfig,
    slater: Option<&Vector>,
) -> Option<Vector> {
    let tol = &cfg.tolerances;
    let accepts = |x: &Vector| -> bool {
        let feas = match p.feasibility_violation(x) {
            Ok(f) => f,
            Err(_) => return false,
        };
        if feas > tol.feasibility {
            return false;
        }
        let comp = p
            .constraints()
            .iter()
            .zip(gamma)
            .fold(0.0f64, |m, (q, &g)| {
                m.max((g * q.eval_slice(x.as_slice())).abs())
            });
        comp <= tol.complementarity
    };

    let gamma_max = gamma.iter().fold(0.0f64, |m, g| m.max(*g));
    let mut active: Vec<usize> = (0..gamma.len())
        .filter(|&k| gamma[k] > 1e-8 * (1.0 + gamma_max))
        .collect();
    active.sort_by(|&i, &j| gamma[j].total_cmp(&gamma[i]));

    if active.is_empty() {
        // All multipliers vanish: any feasible point closes the gap.
        let zero = Vector::zeros(p.dim());
        if accepts(&zero) {
            return Some(zero);
        }
        if let Some(s) = slater {
            if accepts(s) {
                return Some(s.clone());
            }
        }
        return None;
    }

    let n = p.dim();
    let mut rng = Rng::for_index(cfg.seed, 0xF1A7);
    for _attempt in 0..512 {
        let mut d: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let norm = d.iter().map(|di| di * di).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for di in d.iter_mut() {
            *di /= norm;
        }
        let d_sq: f64 = d.iter().map(|di| di * di).sum();
        for &k in &active {
            let q = &p.constraints()[k];
            let qa = q.a * d_sq;
            let qb = 2.0 * q.b.iter().zip(&d).map(|(bi, di)| bi * di).sum::<f64>();
            let qc = q.c;
            let mut roots: Vec<f64> = Vec::new();
            if qa != 0.0 {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let (r1, r2) = stable_quadratic_roots(qa, qb, qc);
                    roots.push(r1);
                    roots.push(r2);
                }
            } else if qb != 0.0 {
                roots.push(-qc / qb);
            }
            for t in roots {
                let x = Vector::raw(d.iter().map(|di| t * di).collect());
                if accepts(&x) {
                    return Some(x);
                }
            }
        }
    }
    None
}

/// Strictly feasible point of `p` within the search budget, or `None` after
/// the budget is exhausted. Absence is not a proof that none exists.
pub fn find_slater_point(p: &Problem, cfg: &SearchConfig) -> Option<Vector> {
    let (pt, _) = search::strict_point(p.constraints(), p.dim(), cfg);
    pt
}

/// Globally solve the scalar QCQP by dual maximization.
///
/// Returns the maximizing multipliers, the recovered primal point, and its
/// certificate (always [`Verdict::GloballyOptimal`] or
/// [`Verdict::ConditionallyOptimal`]; anything weaker is reported as an
/// error instead).
pub fn solve(p: &Problem, cfg: &SolveConfig) -> Result<(Multipliers, Vector, Certificate)> {
    let m = p.num_constraints();
    let raw = RawDual { p };

    // The set { gamma >= 0 : a(gamma) >= 0 } must be nonempty for the dual
    // to be anything but -inf: that needs a_J >= 0 or some a_k > 0.
    if p.objective().a < 0.0 && p.constraints().iter().all(|q| q.a <= 0.0) {
        return Err(Error::DualDivergence {
            reason: "no nonnegative multipliers can make the aggregated curvature nonnegative; \
                     the problem is unbounded below on its feasible set or lacks the required \
                     curvature structure"
                .to_string(),
        });
    }

    let slater = find_slater_point(p, &cfg.search);

    // Stage 1: multi-start projected supergradient ascent.
    let mut best: (Vec<f64>, f64) = (vec![0.0; m], f64::NEG_INFINITY);
    for r in 0..cfg.restarts.max(1) {
        let start: Vec<f64> = if r == 0 {
            vec![0.0; m]
        } else {
            let mut rng = Rng::for_index(cfg.seed, r as u64);
            (0..m).map(|_| rng.uniform(0.0, 2.0)).collect()
        };
        let (gamma, value) = ascent(&raw, start, cfg);
        if value > best.1 {
            best = (gamma, value);
        }
    }

    // Stage 2 and 3: coordinate polish, alternated so a wrong active set
    // guessed by one stage gets corrected by the other.
    let (mut gamma, mut value) = best;
    for _ in 0..2 {
        golden_polish(&raw, &mut gamma, &mut value);
        derivative_polish(&raw, &mut gamma, &mut value);
    }

    if value > DIVERGENCE_VALUE {
        return Err(Error::DualDivergence {
            reason: format!(
                "dual value climbed to {value:.3e} without leveling off; by weak duality the \
                 problem has no feasible point"
            ),
        });
    }
    if value == f64::NEG_INFINITY {
        return Err(Error::NoConvergence {
            gap: f64::INFINITY,
            best_value: value,
        });
    }

    // Primal recovery: flat case first when the aggregated quadratic has
    // (numerically) vanished, then the smooth attained case.
    let (a, b, _c) = raw.aggregate(&gamma);
    let scale_a = 1.0
        + p.objective().a.abs()
        + p.constraints()
            .iter()
            .zip(&gamma)
            .map(|(q, g)| g * q.a.abs())
            .sum::<f64>();
    let scale_b = 1.0
        + p.objective().b.inf_norm()
        + p.constraints()
            .iter()
            .zip(&gamma)
            .map(|(q, g)| g * q.b.inf_norm())
            .sum::<f64>();
    let b_inf = b.iter().fold(0.0f64, |m, bi| m.max(bi.abs()));

    let mut candidates: Vec<Vector> = Vec::new();
    if a.abs() <= 1e-9 * scale_a && b_inf <= 1e-9 * scale_b {
        if let Some(x) = recover_flat(p, &gamma, cfg, slater.as_ref()) {
            candidates.push(x);
        }
    }
    if a > 0.0 {
        candidates.push(Vector::raw(b.iter().map(|bi| -bi / a).collect()));
    }

    let multipliers = Multipliers::new(gamma.clone())?;
    let mut best_failure: Option<(f64, CheckReport, Vector)> = None;
    for x in candidates {
        let report =
            kkt::check_kkt_with_slater(p, &x, &multipliers, &cfg.tolerances, slater.as_ref())?;
        let objective_value = p.objective().eval(&x)?;
        let gap = (value - objective_value).abs();
        let verdict_ok = matches!(
            report.verdict,
            Verdict::GloballyOptimal | Verdict::ConditionallyOptimal
        );
        if verdict_ok && gap <= cfg.gap_tol {
            let certificate = Certificate {
                point: x.clone(),
                multipliers: multipliers.clone(),
                stationarity_residual: report.stationarity_residual,
                complementarity_residual: report.complementarity_residual,
                feasibility_residual: report.feasibility_residual,
                aggregated_curvature: report.curvature_margin,
                verdict: report.verdict,
                tolerances: cfg.tolerances,
            };
            return Ok((multipliers, x, certificate));
        }
        match &best_failure {
            Some((g, _, _)) if gap >= *g => {}
            _ => best_failure = Some((gap, report, x)),
        }
    }

    Err(Error::NoConvergence {
        gap: best_failure.map(|(g, _, _)| g).unwrap_or(f64::INFINITY),
        best_value: value,
    })
}
