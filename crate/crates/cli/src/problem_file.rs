//! Problem-file ingestion: JSON parsing, invariant validation and the
//! scalar/matrix mode split.
//!
//! Schema (version 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 2,
//!   "objective":   { "a": 1.0, "b": [-2.0, 0.0], "c": 4.0 },
//!   "constraints": [ { "a": 1.0, "b": [0.0, 0.0], "c": -1.0 } ],
//!   "candidate":   { "x": [1.0, 0.0], "gamma": [1.0] }
//! }
//! ```
//!
//! A quadratic may carry a full symmetric matrix under `"A"` (an `n x n`
//! array of rows) instead of the scalar `"a"`; any such entry switches the
//! whole file into matrix mode, which only the `certify` command accepts.
//! Scalar entries inside a matrix-mode file embed as `a * I`.
//!
//! Syntax problems surface as [`FileError::Parse`] with serde's line/column
//! context; everything else is collected into one
//! [`FileError::Validation`] listing every violated invariant at once.

use sqcqp_core::kkt::{GeneralQuadratic, SymMatrix};
use sqcqp_core::{Multipliers, Problem, ScalarQuadratic, Vector};

#[derive(Debug)]
pub enum FileError {
    Io(String),
    Parse(String),
    Validation(Vec<String>),
}

impl std::fmt::Display for FileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FileError::Io(msg) => write!(f, "cannot read problem file: {msg}"),
            FileError::Parse(msg) => write!(f, "problem file is not valid JSON: {msg}"),
            FileError::Validation(problems) => {
                writeln!(f, "problem file violates {} invariant(s):", problems.len())?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Optional candidate block: a point and plain multipliers to certify.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub x: Vector,
    pub gamma: Multipliers,
}

/// A validated problem file.
#[derive(Debug)]
pub enum LoadedProblem {
    Scalar {
        problem: Problem,
        candidate: Option<Candidate>,
    },
    General {
        objective: GeneralQuadratic,
        constraints: Vec<GeneralQuadratic>,
        candidate: Option<Candidate>,
    },
}

impl LoadedProblem {
    pub fn candidate(&self) -> Option<&Candidate> {
        match self {
            LoadedProblem::Scalar { candidate, .. } => candidate.as_ref(),
            LoadedProblem::General { candidate, .. } => candidate.as_ref(),
        }
    }

    /// The scalar problem, or a validation-style error for commands that
    /// cannot work with matrix mode.
    pub fn scalar(&self, command: &str) -> Result<&Problem, FileError> {
        match self {
            LoadedProblem::Scalar { problem, .. } => Ok(problem),
            LoadedProblem::General { .. } => Err(FileError::Validation(vec![format!(
                "`{command}` handles scalar problems only; matrix-mode files are limited to \
                 `certify`"
            )])),
        }
    }
}

pub fn load_problem(path: &str) -> Result<LoadedProblem, FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| FileError::Io(format!("{path}: {e}")))?;
    parse_problem(&text)
}

type Value = serde_json::Value;

struct Validator {
    problems: Vec<String>,
}

impl Validator {
    fn complain(&mut self, msg: String) {
        self.problems.push(msg);
    }

    fn finite_number(&mut self, v: Option<&Value>, what: &str) -> Option<f64> {
        match v {
            Some(Value::Number(n)) => match n.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.complain(format!("{what}: expected a finite number"));
                    None
                }
            },
            Some(_) => {
                self.complain(format!("{what}: expected a finite number"));
                None
            }
            None => {
                self.complain(format!("{what}: missing"));
                None
            }
        }
    }

    fn float_array(&mut self, v: Option<&Value>, len: usize, what: &str) -> Option<Vec<f64>> {
        let Some(Value::Array(items)) = v else {
            self.complain(format!("{what}: expected an array of {len} numbers"));
            return None;
        };
        if items.len() != len {
            self.complain(format!(
                "{what}: expected {len} entries, found {}",
                items.len()
            ));
            return None;
        }
        let mut out = Vec::with_capacity(len);
        for (i, item) in items.iter().enumerate() {
            out.push(self.finite_number(Some(item), &format!("{what}[{i}]"))?);
        }
        Some(out)
    }

    fn matrix(&mut self, v: &Value, n: usize, what: &str) -> Option<SymMatrix> {
        let Value::Array(rows) = v else {
            self.complain(format!("{what}: expected an array of {n} rows"));
            return None;
        };
        if rows.len() != n {
            self.complain(format!("{what}: expected {n} rows, found {}", rows.len()));
            return None;
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let parsed = self.float_array(Some(row), n, &format!("{what}[{i}]"))?;
            entries.extend(parsed);
        }
        // Symmetry of the file contents, before the checker symmetrizes.
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((entries[i * n + j] - entries[j * n + i]).abs());
            }
        }
        if worst > 1e-12 {
            self.complain(format!(
                "{what}: matrix is not symmetric (max asymmetry {worst:.3e} exceeds 1e-12)"
            ));
            return None;
        }
        match SymMatrix::new(n, entries) {
            Ok(m) => Some(m),
            Err(e) => {
                self.complain(format!("{what}: {e}"));
                None
            }
        }
    }
}

enum AnyQuadratic {
    Scalar(ScalarQuadratic),
    General(GeneralQuadratic),
}

fn parse_quadratic(val: &Validator, v: &Value) -> bool {
    // Only used for mode detection: does this entry carry "A"?
    let _ = val;
    matches!(v, Value::Object(map) if map.contains_key("A"))
}

fn quadratic(validator: &mut Validator, v: &Value, n: usize, what: &str) -> Option<AnyQuadratic> {
    let Value::Object(map) = v else {
        validator.complain(format!("{what}: expected an object"));
        return None;
    };
    let b = validator.float_array(map.get("b"), n, &format!("{what}.b"));
    let c = validator.finite_number(map.get("c"), &format!("{what}.c"));
    let has_a = map.contains_key("a");
    let has_matrix = map.contains_key("A");
    if has_a && has_matrix {
        validator.complain(format!("{what}: carries both \"a\" and \"A\"; pick one"));
        return None;
    }
    if has_matrix {
        let a = validator.matrix(map.get("A").unwrap(), n, &format!("{what}.A"))?;
        let b = Vector::new(b?).ok()?;
        match GeneralQuadratic::new(a, b, c?) {
            Ok(q) => Some(AnyQuadratic::General(q)),
            Err(e) => {
                validator.complain(format!("{what}: {e}"));
                None
            }
        }
    } else {
        let a = validator.finite_number(map.get("a"), &format!("{what}.a"))?;
        let b = Vector::new(b?).ok()?;
        match ScalarQuadratic::new(a, b, c?) {
            Ok(q) => Some(AnyQuadratic::Scalar(q)),
            Err(e) => {
                validator.complain(format!("{what}: {e}"));
                None
            }
        }
    }
}

pub fn parse_problem(text: &str) -> Result<LoadedProblem, FileError> {
    let root: Value = serde_json::from_str(text).map_err(|e| FileError::Parse(e.to_string()))?;
    let mut validator = Validator {
        problems: Vec::new(),
    };

    let Value::Object(map) = &root else {
        return Err(FileError::Validation(vec![
            "top level: expected an object".to_string()
        ]));
    };

    match map.get("version") {
        Some(Value::Number(v)) if v.as_i64() == Some(1) => {}
        Some(other) => validator.complain(format!("version: expected 1, found {other}")),
        None => validator.complain("version: missing".to_string()),
    }

    let n = match map.get("n") {
        Some(Value::Number(v)) => match v.as_u64() {
            Some(n) if n >= 1 => n as usize,
            _ => {
                validator.complain("n: expected a positive integer".to_string());
                0
            }
        },
        _ => {
            validator.complain("n: expected a positive integer".to_string());
            0
        }
    };
    if n == 0 {
        return Err(FileError::Validation(validator.problems));
    }

    let constraint_values: Vec<&Value> = match map.get("constraints") {
        Some(Value::Array(items)) if !items.is_empty() => items.iter().collect(),
        Some(Value::Array(_)) => {
            validator.complain("constraints: at least one constraint is required".to_string());
            Vec::new()
        }
        _ => {
            validator.complain("constraints: expected a non-empty array".to_string());
            Vec::new()
        }
    };

    // Matrix mode is contagious: one "A" anywhere switches the file.
    let matrix_mode = map
        .get("objective")
        .map(|v| parse_quadratic(&validator, v))
        .unwrap_or(false)
        || constraint_values
            .iter()
            .any(|v| parse_quadratic(&validator, v));

    let objective = match map.get("objective") {
        Some(v) => quadratic(&mut validator, v, n, "objective"),
        None => {
            validator.complain("objective: missing".to_string());
            None
        }
    };
    let constraints: Vec<Option<AnyQuadratic>> = constraint_values
        .iter()
        .enumerate()
        .map(|(k, v)| quadratic(&mut validator, v, n, &format!("constraints[{k}]")))
        .collect();

    let m = constraints.len();
    let candidate = match map.get("candidate") {
        None => None,
        Some(Value::Object(cmap)) => {
            let x = validator.float_array(cmap.get("x"), n, "candidate.x");
            let gamma = validator.float_array(cmap.get("gamma"), m, "candidate.gamma");
            match (x, gamma) {
                (Some(x), Some(gamma)) => {
                    let x = Vector::new(x).expect("validated finite");
                    match Multipliers::new(gamma) {
                        Ok(gamma) => Some(Candidate { x, gamma }),
                        Err(e) => {
                            validator.complain(format!("candidate.gamma: {e}"));
                            None
                        }
                    }
                }
                _ => None,
            }
        }
        Some(_) => {
            validator.complain("candidate: expected an object".to_string());
            None
        }
    };

    if !validator.problems.is_empty() {
        return Err(FileError::Validation(validator.problems));
    }
    let objective = objective.expect("no complaints implies presence");
    let constraints: Vec<AnyQuadratic> = constraints
        .into_iter()
        .map(|c| c.expect("no complaints implies presence"))
        .collect();

    if matrix_mode {
        let lift = |q: AnyQuadratic| match q {
            AnyQuadratic::Scalar(s) => GeneralQuadratic::from_scalar(&s),
            AnyQuadratic::General(g) => g,
        };
        Ok(LoadedProblem::General {
            objective: lift(objective),
            constraints: constraints.into_iter().map(lift).collect(),
            candidate,
        })
    } else {
        let unwrap_scalar = |q: AnyQuadratic| match q {
            AnyQuadratic::Scalar(s) => s,
            AnyQuadratic::General(_) => unreachable!("mode detection saw no matrices"),
        };
        let problem = Problem::new(
            unwrap_scalar(objective),
            constraints.into_iter().map(unwrap_scalar).collect(),
        )
        .map_err(|e| FileError::Validation(vec![e.to_string()]))?;
        Ok(LoadedProblem::Scalar { problem, candidate })
    }
}

/// Canonical file text for a scalar problem; parsing it back recovers the
/// problem exactly.
#[cfg(test)]
pub fn emit_problem(p: &Problem) -> String {
    use crate::output::fmt_f64;
    let quad = |q: &ScalarQuadratic| {
        let b: Vec<String> = q.b.iter().map(|x| fmt_f64(*x)).collect();
        format!(
            "{{\"a\": {}, \"b\": [{}], \"c\": {}}}",
            fmt_f64(q.a),
            b.join(", "),
            fmt_f64(q.c)
        )
    };
    let constraints: Vec<String> = p.constraints().iter().map(quad).collect();
    format!(
        "{{\n  \"version\": 1,\n  \"n\": {},\n  \"objective\": {},\n  \"constraints\": [\n    {}\n  ]\n}}\n",
        p.dim(),
        quad(p.objective()),
        constraints.join(",\n    ")
    )
}
