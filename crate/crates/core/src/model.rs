//! Problem data: vectors, scalar quadratic functionals, multipliers and
//! certificates.
//!
//! Every quadratic here is kept in the canonical form
//! `f(x) = a ||x||^2 + 2 <b, x> + c`. Note the factor 2 on the linear term.

use crate::{Error, Result};

/// A dense real vector.
///
/// Entries are validated to be finite on construction; arithmetic helpers
/// assume matching dimensions (public entry points check and report
/// [`Error::DimensionMismatch`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    /// Wraps `entries`, rejecting NaN and infinities.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFiniteEntry { context: "vector" });
        }
        Ok(Self { entries })
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// All-zero vector of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    /// Standard basis vector `e_i` in dimension `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        assert!(i < n, "unit index out of range");
        let mut entries = vec![0.0; n];
        entries[i] = 1.0;
        Self { entries }
    }

    /// Construction without the finiteness check, for values produced by
    /// arithmetic on already-validated inputs.
    pub(crate) fn raw(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inf_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn scaled(&self, t: f64) -> Vector {
        Vector::raw(self.entries.iter().map(|e| t * e).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::raw(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::raw(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, other: &Vector, t: f64) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::raw(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == 0.0)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// One quadratic functional `f(x) = a ||x||^2 + 2 <b, x> + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuadratic {
    /// Curvature scalar multiplying `||x||^2`.
    pub a: f64,
    /// Linear term; the evaluation carries a factor 2 on `<b, x>`.
    pub b: Vector,
    /// Constant offset.
    pub c: f64,
}

impl ScalarQuadratic {
    pub fn new(a: f64, b: Vector, c: f64) -> Result<Self> {
        if !a.is_finite() || !c.is_finite() {
            return Err(Error::NonFiniteEntry {
                context: "quadratic coefficient",
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// `a ||x||^2 + 2 <b, x> + c`.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self.eval_slice(x.as_slice()))
    }

    pub(crate) fn eval_slice(&self, x: &[f64]) -> f64 {
        let mut norm_sq = 0.0;
        let mut lin = 0.0;
        for (xi, bi) in x.iter().zip(self.b.iter()) {
            norm_sq += xi * xi;
            lin += bi * xi;
        }
        self.a * norm_sq + 2.0 * lin + self.c
    }

    /// Gradient `2 a x + 2 b`.
    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(Vector::raw(self.grad_slice(x.as_slice())))
    }

    pub(crate) fn grad_slice(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.b.iter())
            .map(|(xi, bi)| 2.0 * self.a * xi + 2.0 * bi)
            .collect()
    }

    /// Same functional with the constant shifted by `-delta`.
    pub fn shifted(&self, delta: f64) -> ScalarQuadratic {
        ScalarQuadratic {
            a: self.a,
            b: self.b.clone(),
            c: self.c - delta,
        }
    }
}

/// A scalar QCQP instance: one objective and `m >= 1` inequality constraints
/// `f_k(x) <= 0`, all over the same dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    n: usize,
    objective: ScalarQuadratic,
    constraints: Vec<ScalarQuadratic>,
}

impl Problem {
    pub fn new(objective: ScalarQuadratic, constraints: Vec<ScalarQuadratic>) -> Result<Self> {
        let n = objective.dim();
        if constraints.is_empty() {
            return Err(Error::DegenerateInput(
                "a problem needs at least one constraint",
            ));
        }
        for q in &constraints {
            if q.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: q.dim(),
                });
            }
        }
        Ok(Self {
            n,
            objective,
            constraints,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of constraints `m`.
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &ScalarQuadratic {
        &self.objective
    }

    pub fn constraints(&self) -> &[ScalarQuadratic] {
        &self.constraints
    }

    /// Values `(f_1(x), ..., f_m(x))`.
    pub fn constraint_values(&self, x: &Vector) -> Result<Vec<f64>> {
        self.constraints.iter().map(|q| q.eval(x)).collect()
    }

    /// `max_k max(f_k(x), 0)`; zero exactly when `x` is feasible.
    pub fn feasibility_violation(&self, x: &Vector) -> Result<f64> {
        let mut worst = 0.0f64;
        for q in &self.constraints {
            worst = worst.max(q.eval(x)?.max(0.0));
        }
        Ok(worst)
    }

    /// Lagrangian aggregation: with `(g0, gamma)` taken from `m` (and
    /// `g0 = 1` when absent), returns the scalar quadratic with coefficients
    ///
    /// ```text
    /// a = g0 a_J + sum_k gamma_k a_k
    /// b = g0 b_J + sum_k gamma_k b_k
    /// c = g0 c_J + sum_k gamma_k c_k
    /// ```
    pub fn aggregate(&self, m: &Multipliers) -> Result<ScalarQuadratic> {
        if m.len() != self.num_constraints() {
            return Err(Error::DimensionMismatch {
                expected: self.num_constraints(),
                found: m.len(),
            });
        }
        let g0 = m.gamma0().unwrap_or(1.0);
        let mut a = g0 * self.objective.a;
        let mut c = g0 * self.objective.c;
        let mut b: Vec<f64> = self.objective.b.iter().map(|e| g0 * e).collect();
        for (q, &g) in self.constraints.iter().zip(m.gamma()) {
            a += g * q.a;
            c += g * q.c;
            for (bi, qi) in b.iter_mut().zip(q.b.iter()) {
                *bi += g * qi;
            }
        }
        Ok(ScalarQuadratic {
            a,
            b: Vector::raw(b),
            c,
        })
    }

    /// The objective with its constant replaced by `c - optimal_value`, so
    /// that evaluating the result at any `x` gives `J(x) - optimal_value`.
    pub fn shift_objective(&self, optimal_value: f64) -> ScalarQuadratic {
        self.objective.shifted(optimal_value)
    }
}

/// Nonnegative Lagrange multipliers, optionally in Fritz-John form (an extra
/// `gamma0 >= 0` weighting the objective, with `(gamma0, gamma)` not all
/// zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    gamma: Vec<f64>,
    gamma0: Option<f64>,
}

impl Multipliers {
    /// Plain KKT multipliers (`gamma0` absent).
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        Self::validate(&gamma)?;
        Ok(Self {
            gamma,
            gamma0: None,
        })
    }

    /// Fritz-John multipliers; rejects the all-zero tuple.
    pub fn fritz_john(gamma0: f64, gamma: Vec<f64>) -> Result<Self> {
        if !gamma0.is_finite() {
            return Err(Error::NonFiniteEntry {
                context: "multiplier",
            });
        }
        if gamma0 < 0.0 {
            return Err(Error::NegativeMultiplier {
                index: 0,
                value: gamma0,
            });
        }
        Self::validate(&gamma)?;
        if gamma0 == 0.0 && gamma.iter().all(|g| *g == 0.0) {
            return Err(Error::AllZeroMultipliers);
        }
        Ok(Self {
            gamma,
            gamma0: Some(gamma0),
        })
    }

    fn validate(gamma: &[f64]) -> Result<()> {
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
        Ok(())
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn gamma0(&self) -> Option<f64> {
        self.gamma0
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Outcome classification for a certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// All residuals within tolerance, aggregated curvature nonnegative, and
    /// a strictly feasible point is known: the candidate is a global
    /// minimizer.
    GloballyOptimal,
    /// The KKT system holds, but no strictly feasible point was supplied or
    /// found, so sufficiency cannot be invoked.
    ConditionallyOptimal,
    /// The Fritz-John system holds with the objective weight at zero.
    FritzJohnOnly,
    /// Some condition failed.
    Rejected,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::GloballyOptimal => "GloballyOptimal",
            Verdict::ConditionallyOptimal => "ConditionallyOptimal",
            Verdict::FritzJohnOnly => "FritzJohnOnly",
            Verdict::Rejected => "Rejected",
        };
        f.write_str(s)
    }
}

/// Tolerances used when classifying a certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSet {
    /// Infinity-norm bound on the aggregated gradient at the candidate.
    pub stationarity: f64,
    /// Bound on `max_k |gamma_k f_k(x)|`.
    pub complementarity: f64,
    /// Bound on `max_k max(f_k(x), 0)`.
    pub feasibility: f64,
    /// Allowed negative slack on the aggregated curvature.
    pub curvature: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            stationarity: 1e-8,
            complementarity: 1e-8,
            feasibility: 1e-8,
            curvature: 1e-10,
        }
    }
}

impl ToleranceSet {
    /// Uniform tolerance on all four thresholds.
    pub fn uniform(tol: f64) -> Self {
        Self {
            stationarity: tol,
            complementarity: tol,
            feasibility: tol,
            curvature: tol,
        }
    }
}

/// A candidate point together with multipliers, residuals and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub point: Vector,
    pub multipliers: Multipliers,
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    pub feasibility_residual: f64,
    /// `a_J + sum_k gamma_k a_k` (weighted by `gamma0` in Fritz-John form).
    pub aggregated_curvature: f64,
    pub verdict: Verdict,
    pub tolerances: ToleranceSet,
}
