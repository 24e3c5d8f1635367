//! Executable theorem of the alternative for a family of scalar quadratics.
//!
//! For functionals `f_0, ..., f_m`, at most one of these can hold:
//!
//! 1. some `x` makes every `f_k(x) < 0` strictly;
//! 2. some nonnegative, not-all-zero combination `sum_k gamma_k f_k` is
//!    nonnegative on the whole space.
//!
//! Statement 2 reduces, for scalar quadratics, to an exact closed-form test
//! on the combined coefficients: with `(a, b, c) = sum_k gamma_k (a_k, b_k,
//! c_k)`, global nonnegativity holds iff `a > 0` and `c - ||b||^2 / a >= 0`,
//! or `a = 0`, `b = 0`, `c >= 0`. Both searches are budgeted; when neither
//! side is found the verdict is an honest [`AlternativeOutcome::Undecided`],
//! not a third truth value. Exclusivity of the two statements is guaranteed
//! when the linear terms do not span the whole space, and the verdict
//! carries that rank status.

use crate::gis::rank_of_span;
use crate::model::{Multipliers, ScalarQuadratic, Vector};
use crate::search::{self, SearchConfig};
use crate::{Error, Result};

/// Which side of the alternative was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlternativeOutcome {
    StrictPointFound,
    MultiplierFound,
    /// Both budgets exhausted with neither side verified.
    Undecided,
}

impl std::fmt::Display for AlternativeOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlternativeOutcome::StrictPointFound => "StrictPointFound",
            AlternativeOutcome::MultiplierFound => "MultiplierFound",
            AlternativeOutcome::Undecided => "Undecided",
        };
        f.write_str(s)
    }
}

/// Work counters for the two searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BudgetReport {
    /// Functional evaluations spent looking for a strict point.
    pub strict_search_evals: u64,
    /// Simplex grid points visited by the multiplier search.
    pub simplex_points: u64,
    /// Local refinement steps after the grid scan.
    pub refinement_steps: u64,
}

/// Rank of the span of the linear terms versus the ambient dimension; the
/// exclusivity guarantee needs `rank < dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCondition {
    pub rank: usize,
    pub dim: usize,
}

impl RankCondition {
    pub fn holds(&self) -> bool {
        self.rank < self.dim
    }
}

/// Result of running both searches.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeVerdict {
    pub outcome: AlternativeOutcome,
    pub strict_point: Option<Vector>,
    /// Nonnegativity multiplier over the whole family, stored in Fritz-John
    /// form: `gamma0` weights `fs[0]`, `gamma` the rest.
    pub multiplier: Option<Multipliers>,
    pub budget_used: BudgetReport,
    pub rank_condition: RankCondition,
}

fn combined(fs: &[ScalarQuadratic], gamma: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = fs[0].dim();
    let mut a = 0.0;
    let mut c = 0.0;
    let mut b = vec![0.0; n];
    for (f, &g) in fs.iter().zip(gamma) {
        a += g * f.a;
        c += g * f.c;
        for (bi, fi) in b.iter_mut().zip(f.b.iter()) {
            *bi += g * fi;
        }
    }
    (a, b, c)
}

/// Global nonnegativity margin of the combination: the infimum of
/// `sum gamma_k f_k` over the whole space (`-inf` when unbounded below).
fn margin(fs: &[ScalarQuadratic], gamma: &[f64]) -> f64 {
    let (a, b, c) = combined(fs, gamma);
    if a > 0.0 {
        c - b.iter().map(|bi| bi * bi).sum::<f64>() / a
    } else if a == 0.0 && b.iter().all(|bi| *bi == 0.0) {
        c
    } else {
        f64::NEG_INFINITY
    }
}

fn validate_family(fs: &[ScalarQuadratic]) -> Result<usize> {
    let Some(first) = fs.first() else {
        return Err(Error::DegenerateInput("empty family of functionals"));
    };
    let n = first.dim();
    for f in fs {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.dim(),
            });
        }
    }
    Ok(n)
}

/// Exact test: is `sum_k gamma_k f_k(x) >= 0` for every `x`?
///
/// This is the closed-form criterion on the combined coefficients; no
/// sampling is involved, so a `true` answer is a proof for the given data.
pub fn nonnegativity_certificate(fs: &[ScalarQuadratic], gamma: &[f64]) -> Result<bool> {
    validate_family(fs)?;
    if gamma.len() != fs.len() {
        return Err(Error::DimensionMismatch {
            expected: fs.len(),
            found: gamma.len(),
        });
    }
    for (index, &value) in gamma.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteEntry {
                context: "multiplier",
            });
        }
        if value < 0.0 {
            return Err(Error::NegativeMultiplier { index, value });
        }
    }
    if gamma.iter().all(|g| *g == 0.0) {
        return Err(Error::AllZeroMultipliers);
    }
    Ok(margin(fs, gamma) >= 0.0)
}

/// A point where every functional is strictly negative, if the search budget
/// finds one; the returned point is verified by evaluation.
pub fn find_strict_point(fs: &[ScalarQuadratic], cfg: &SearchConfig) -> Result<Option<Vector>> {
    let n = validate_family(fs)?;
    let (pt, _) = search::strict_point(fs, n, cfg);
    Ok(pt)
}

fn find_strict_point_counted(
    fs: &[ScalarQuadratic],
    cfg: &SearchConfig,
) -> Result<(Option<Vector>, u64)> {
    let n = validate_family(fs)?;
    Ok(search::strict_point(fs, n, cfg))
}

/// Visits every lattice point of the unit simplex with denominator `grid`.
fn for_each_simplex_point(dim: usize, grid: usize, visit: &mut impl FnMut(&[f64])) {
    let mut counts = vec![0usize; dim];
    let mut gamma = vec![0.0; dim];
    fn recurse(
        counts: &mut Vec<usize>,
        gamma: &mut Vec<f64>,
        axis: usize,
        remaining: usize,
        grid: usize,
        visit: &mut impl FnMut(&[f64]),
    ) {
        if axis + 1 == counts.len() {
            counts[axis] = remaining;
            gamma[axis] = remaining as f64 / grid as f64;
            visit(gamma);
            return;
        }
        for k in 0..=remaining {
            counts[axis] = k;
            gamma[axis] = k as f64 / grid as f64;
            recurse(counts, gamma, axis + 1, remaining - k, grid, visit);
        }
    }
    recurse(&mut counts, &mut gamma, 0, grid, grid, visit);
}

fn search_multiplier_counted(
    fs: &[ScalarQuadratic],
    cfg: &SearchConfig,
) -> Result<(Option<Multipliers>, u64, u64)> {
    validate_family(fs)?;
    let dim = fs.len();
    // The composition count explodes with the family size; coarsen the grid
    // for larger families and lean on the local refinement.
    let grid = match dim {
        0..=3 => cfg.grid.max(2),
        4 => cfg.grid.clamp(2, 60),
        _ => cfg.grid.clamp(2, 24),
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut visited: u64 = 0;
    for_each_simplex_point(dim, grid, &mut |gamma| {
        visited += 1;
        let m = margin(fs, gamma);
        match &best {
            Some((incumbent, _)) if m <= *incumbent => {}
            _ => best = Some((m, gamma.to_vec())),
        }
    });
    let Some((mut best_margin, mut gamma)) = best else {
        return Ok((None, visited, 0));
    };

    // Compass refinement on the simplex: transfer mass between coordinate
    // pairs at a halving step.
    let mut refinement_steps: u64 = 0;
    let mut delta = 1.0 / grid as f64;
    while delta > 1e-13 && refinement_steps < 200_000 {
        let mut improved = false;
        'pairs: for i in 0..dim {
            for j in 0..dim {
                if i == j || gamma[j] < delta {
                    continue;
                }
                let mut candidate = gamma.clone();
                candidate[i] += delta;
                candidate[j] -= delta;
                refinement_steps += 1;
                let m = margin(fs, &candidate);
                if m > best_margin {
                    best_margin = m;
                    gamma = candidate;
                    improved = true;
                    continue 'pairs;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }

    if best_margin >= 0.0 && nonnegativity_certificate(fs, &gamma)? {
        let mult = Multipliers::fritz_john(gamma[0], gamma[1..].to_vec())?;
        Ok((Some(mult), visited, refinement_steps))
    } else {
        Ok((None, visited, refinement_steps))
    }
}

/// Searches the unit simplex (the test is invariant under positive scaling)
/// for a combination certified nonnegative by
/// [`nonnegativity_certificate`]; grid scan plus compass refinement.
pub fn search_multiplier(
    fs: &[ScalarQuadratic],
    cfg: &SearchConfig,
) -> Result<Option<Multipliers>> {
    Ok(search_multiplier_counted(fs, cfg)?.0)
}

/// Runs both searches and reports exactly one side, or
/// [`AlternativeOutcome::Undecided`] when both budgets come up empty.
///
/// Both returned artifacts are verified before being reported, so the two
/// sides can only coexist if the exclusivity theory itself were violated;
/// that is surfaced loudly as [`Error::InternalContradiction`].
pub fn alternative(fs: &[ScalarQuadratic], cfg: &SearchConfig) -> Result<AlternativeVerdict> {
    let n = validate_family(fs)?;
    let bs: Vec<Vector> = fs.iter().map(|f| f.b.clone()).collect();
    let rank_condition = RankCondition {
        rank: rank_of_span(&bs),
        dim: n,
    };

    let (strict_point, strict_search_evals) = find_strict_point_counted(fs, cfg)?;
    let (multiplier, simplex_points, refinement_steps) = search_multiplier_counted(fs, cfg)?;
    let budget_used = BudgetReport {
        strict_search_evals,
        simplex_points,
        refinement_steps,
    };

    match (strict_point, multiplier) {
        (Some(point), Some(mult)) => Err(Error::InternalContradiction(format!(
            "strict point {:?} and nonnegativity multiplier {:?} were both verified for the \
             same family; the two statements are mutually exclusive (rank condition holds: {})",
            point.as_slice(),
            mult,
            rank_condition.holds(),
        ))),
        (Some(point), None) => Ok(AlternativeVerdict {
            outcome: AlternativeOutcome::StrictPointFound,
            strict_point: Some(point),
            multiplier: None,
            budget_used,
            rank_condition,
        }),
        (None, Some(mult)) => Ok(AlternativeVerdict {
            outcome: AlternativeOutcome::MultiplierFound,
            strict_point: None,
            multiplier: Some(mult),
            budget_used,
            rank_condition,
        }),
        (None, None) => Ok(AlternativeVerdict {
            outcome: AlternativeOutcome::Undecided,
            strict_point: None,
            multiplier: None,
            budget_used,
            rank_condition,
        }),
    }
}
