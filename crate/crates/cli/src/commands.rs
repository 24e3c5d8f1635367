//! Subcommand dispatch and implementations.
//!
//! Exit codes:
//!
//! - `0`   success (for `solve`/`certify`: a globally optimal verdict)
//! - `1`   a check or search that ran but did not certify
//! - `2`   `solve` finished with a conditionally optimal verdict
//! - `3`   `solve` exhausted its budget (no convergence)
//! - `4`   `witness` hit the full-rank obstruction
//! - `64`  command line usage error
//! - `66`  unreadable or invalid problem file

use sqcqp_core::dual::{self, SolveConfig};
use sqcqp_core::gis::{self, SampleConfig};
use sqcqp_core::kkt::{self, CheckReport};
use sqcqp_core::oracle::{self, GridOutcome, GridSpec};
use sqcqp_core::slemma;
use sqcqp_core::{Error, SearchConfig, ToleranceSet, Vector, Verdict};

use crate::output::{csv_cloud, Json};
use crate::problem_file::{load_problem, FileError, LoadedProblem};

const USAGE: &str = "\
usage: sqcqp <command> [options]

commands:
  solve <file> [--gap TOL] [--restarts K] [--seed S]
      Globally solve a scalar problem; prints value, point, multipliers and
      the certificate as JSON. Exit 0 = globally optimal, 2 = conditionally
      optimal (no strictly feasible point found), 3 = no convergence.

  certify <file> [--tol T]
      Check the candidate block of the file (KKT residuals). Works for
      scalar and matrix-mode files. Exit 0 when globally optimal, 1 otherwise.

  witness <file> --xv <csv> --xw <csv> --lambda L
      Build the image-set convexity witness for the file's functionals
      (objective first). Exit 4 when the linear terms span the whole space.

  slemma <file> [--include-objective JSTAR]
      Run the theorem-of-the-alternative searches on the constraints; with
      --include-objective, prepend the shifted objective J - JSTAR.

  sample <file> --count N --box B --shift S --seed SEED [--out PATH]
      Sample the (optionally inflated) image set as CSV.

  oracle <file> [--box B] [--points P]
      Brute-force grid minimization; prints the grid optimum as JSON.
";

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    64
}

fn file_error(err: FileError) -> i32 {
    eprintln!("error: {err}");
    66
}

struct Parsed {
    file: String,
    flags: Vec<(String, String)>,
}

impl Parsed {
    fn get(&self, name: &str) -> Option<&str> {
        self.flags
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn f64_flag(&self, name: &str, default: f64) -> Result<f64, String> {
        match self.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{name}: expected a finite number, found `{raw}`")),
        }
    }

    fn usize_flag(&self, name: &str, default: usize) -> Result<usize, String> {
        match self.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| format!("{name}: expected a nonnegative integer, found `{raw}`")),
        }
    }

    fn u64_flag(&self, name: &str, default: u64) -> Result<u64, String> {
        match self.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| format!("{name}: expected a nonnegative integer, found `{raw}`")),
        }
    }
}

/// One positional file argument plus `--name value` flags from an accepted
/// set.
fn parse_args(args: &[String], accepted: &[&str]) -> Result<Parsed, String> {
    let mut file = None;
    let mut flags = Vec::new();
    let mut iter = args.iter();
    while let Some(token) = iter.next() {
        if let Some(name) = token.strip_prefix("--") {
            if !accepted.contains(&name) {
                return Err(format!("unknown flag --{name}"));
            }
            let Some(value) = iter.next() else {
                return Err(format!("--{name} needs a value"));
            };
            flags.push((name.to_string(), value.clone()));
        } else if file.is_none() {
            file = Some(token.clone());
        } else {
            return Err(format!("unexpected argument `{token}`"));
        }
    }
    let Some(file) = file else {
        return Err("missing problem file".to_string());
    };
    Ok(Parsed { file, flags })
}

fn parse_csv_vector(raw: &str, what: &str) -> Result<Vector, String> {
    let entries: Result<Vec<f64>, _> = raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match entries {
        Ok(values) => Vector::new(values).map_err(|e| format!("{what}: {e}")),
        Err(_) => Err(format!(
            "{what}: expected comma-separated numbers, found `{raw}`"
        )),
    }
}

fn tolerances_json(tol: &ToleranceSet) -> Json {
    Json::Obj(vec![
        ("stationarity", Json::Num(tol.stationarity)),
        ("complementarity", Json::Num(tol.complementarity)),
        ("feasibility", Json::Num(tol.feasibility)),
        ("curvature", Json::Num(tol.curvature)),
    ])
}

fn report_json(report: &CheckReport) -> Json {
    Json::Obj(vec![
        (
            "stationarity_residual",
            Json::Num(report.stationarity_residual),
        ),
        (
            "complementarity_residual",
            Json::Num(report.complementarity_residual),
        ),
        (
            "feasibility_residual",
            Json::Num(report.feasibility_residual),
        ),
        ("curvature_margin", Json::Num(report.curvature_margin)),
        (
            "slater_point",
            match &report.slater_point {
                Some(p) => Json::floats(p.as_slice()),
                None => Json::Null,
            },
        ),
        ("verdict", Json::Str(report.verdict.to_string())),
        (
            "note",
            match &report.note {
                Some(n) => Json::Str(n.clone()),
                None => Json::Null,
            },
        ),
        ("tolerances", tolerances_json(&report.tolerances)),
    ])
}

pub fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        return usage_error("missing command");
    };
    match command.as_str() {
        "solve" => cmd_solve(&args[1..]),
        "certify" => cmd_certify(&args[1..]),
        "witness" => cmd_witness(&args[1..]),
        "slemma" => cmd_slemma(&args[1..]),
        "sample" => cmd_sample(&args[1..]),
        "oracle" => cmd_oracle(&args[1..]),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            0
        }
        other => usage_error(&format!("unknown command `{other}`")),
    }
}

fn cmd_solve(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["gap", "restarts", "seed"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let cfg = {
        let gap = parsed.f64_flag("gap", 1e-6);
        let restarts = parsed.usize_flag("restarts", 10);
        let seed = parsed.u64_flag("seed", 0);
        match (gap, restarts, seed) {
            (Ok(gap), Ok(restarts), Ok(seed)) => SolveConfig {
                gap_tol: gap,
                restarts,
                seed,
                search: SearchConfig {
                    seed,
                    ..SearchConfig::default()
                },
                ..SolveConfig::default()
            },
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return usage_error(&e),
        }
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let problem = match loaded.scalar("solve") {
        Ok(p) => p,
        Err(e) => return file_error(e),
    };

    match dual::solve(problem, &cfg) {
        Ok((multipliers, x, certificate)) => {
            let value = problem
                .objective()
                .eval(&x)
                .expect("solution dimension matches problem");
            let doc = Json::Obj(vec![
                ("value", Json::Num(value)),
                ("x", Json::floats(x.as_slice())),
                ("gamma", Json::floats(multipliers.gamma())),
                (
                    "certificate",
                    Json::Obj(vec![
                        (
                            "stationarity_residual",
                            Json::Num(certificate.stationarity_residual),
                        ),
                        (
                            "complementarity_residual",
                            Json::Num(certificate.complementarity_residual),
                        ),
                        (
                            "feasibility_residual",
                            Json::Num(certificate.feasibility_residual),
                        ),
                        (
                            "aggregated_curvature",
                            Json::Num(certificate.aggregated_curvature),
                        ),
                        ("verdict", Json::Str(certificate.verdict.to_string())),
                        ("tolerances", tolerances_json(&certificate.tolerances)),
                    ]),
                ),
            ]);
            println!("{}", doc.render());
            match certificate.verdict {
                Verdict::GloballyOptimal => 0,
                _ => 2,
            }
        }
        Err(Error::NoConvergence { gap, best_value }) => {
            let doc = Json::Obj(vec![
                ("error", Json::Str("no convergence".to_string())),
                ("gap", Json::Num(gap)),
                ("best_value", Json::Num(best_value)),
            ]);
            println!("{}", doc.render());
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_certify(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["tol"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let tol = match parsed.get("tol") {
        None => ToleranceSet::default(),
        Some(raw) => match raw.parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => ToleranceSet::uniform(t),
            _ => return usage_error(&format!("--tol: expected a positive number, found `{raw}`")),
        },
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let Some(candidate) = loaded.candidate() else {
        return file_error(FileError::Validation(vec![
            "certify requires a candidate block ({\"x\": [...], \"gamma\": [...]})".to_string(),
        ]));
    };

    let report = match &loaded {
        LoadedProblem::Scalar { problem, .. } => {
            kkt::check_kkt(problem, &candidate.x, &candidate.gamma, &tol)
        }
        LoadedProblem::General {
            objective,
            constraints,
            ..
        } => kkt::check_kkt_general(objective, constraints, &candidate.x, &candidate.gamma, &tol),
    };
    match report {
        Ok(report) => {
            println!("{}", report_json(&report).render());
            if report.verdict == Verdict::GloballyOptimal {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_witness(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["xv", "xw", "lambda"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let (Some(xv_raw), Some(xw_raw), Some(lambda_raw)) =
        (parsed.get("xv"), parsed.get("xw"), parsed.get("lambda"))
    else {
        return usage_error("witness needs --xv, --xw and --lambda");
    };
    let x_v = match parse_csv_vector(xv_raw, "--xv") {
        Ok(v) => v,
        Err(e) => return usage_error(&e),
    };
    let x_w = match parse_csv_vector(xw_raw, "--xw") {
        Ok(v) => v,
        Err(e) => return usage_error(&e),
    };
    let Ok(lambda) = lambda_raw.parse::<f64>() else {
        return usage_error(&format!(
            "--lambda: expected a number, found `{lambda_raw}`"
        ));
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let problem = match loaded.scalar("witness") {
        Ok(p) => p,
        Err(e) => return file_error(e),
    };
    let mut family = vec![problem.objective().clone()];
    family.extend(problem.constraints().iter().cloned());

    match gis::convexity_witness(&family, &x_v, &x_w, lambda) {
        Ok(w) => {
            let doc = Json::Obj(vec![
                ("x_tilde", Json::floats(w.x_tilde.as_slice())),
                (
                    "alpha_roots",
                    Json::Arr(vec![Json::Num(w.alpha_roots.0), Json::Num(w.alpha_roots.1)]),
                ),
                ("chosen_alpha", Json::Num(w.chosen_alpha)),
                ("discriminant", Json::Num(w.discriminant)),
                ("kernel_vector", Json::floats(w.kernel_vector.as_slice())),
                ("slacks", Json::floats(&w.slacks)),
            ]);
            println!("{}", doc.render());
            0
        }
        Err(Error::FullRank { rank, dim }) => {
            let doc = Json::Obj(vec![
                (
                    "error",
                    Json::Str("linear terms span the whole space".to_string()),
                ),
                ("rank", Json::Int(rank as i64)),
                ("dim", Json::Int(dim as i64)),
            ]);
            println!("{}", doc.render());
            4
        }
        Err(e @ (Error::DegenerateInput(_) | Error::DimensionMismatch { .. })) => {
            usage_error(&e.to_string())
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_slemma(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["include-objective", "seed"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let seed = match parsed.u64_flag("seed", 0) {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let problem = match loaded.scalar("slemma") {
        Ok(p) => p,
        Err(e) => return file_error(e),
    };
    let mut family = Vec::new();
    if let Some(raw) = parsed.get("include-objective") {
        let Ok(jstar) = raw.parse::<f64>() else {
            return usage_error(&format!(
                "--include-objective: expected a number, found `{raw}`"
            ));
        };
        family.push(problem.shift_objective(jstar));
    }
    family.extend(problem.constraints().iter().cloned());

    let cfg = SearchConfig {
        seed,
        ..SearchConfig::default()
    };
    match slemma::alternative(&family, &cfg) {
        Ok(verdict) => {
            let multiplier_json = match &verdict.multiplier {
                Some(m) => {
                    let mut flat = Vec::new();
                    if let Some(g0) = m.gamma0() {
                        flat.push(g0);
                    }
                    flat.extend_from_slice(m.gamma());
                    Json::floats(&flat)
                }
                None => Json::Null,
            };
            let doc = Json::Obj(vec![
                ("outcome", Json::Str(verdict.outcome.to_string())),
                (
                    "strict_point",
                    match &verdict.strict_point {
                        Some(p) => Json::floats(p.as_slice()),
                        None => Json::Null,
                    },
                ),
                ("multiplier", multiplier_json),
                (
                    "budget",
                    Json::Obj(vec![
                        (
                            "strict_search_evals",
                            Json::Int(verdict.budget_used.strict_search_evals as i64),
                        ),
                        (
                            "simplex_points",
                            Json::Int(verdict.budget_used.simplex_points as i64),
                        ),
                        (
                            "refinement_steps",
                            Json::Int(verdict.budget_used.refinement_steps as i64),
                        ),
                    ]),
                ),
                (
                    "rank_condition",
                    Json::Obj(vec![
                        ("rank", Json::Int(verdict.rank_condition.rank as i64)),
                        ("dim", Json::Int(verdict.rank_condition.dim as i64)),
                        ("holds", Json::Bool(verdict.rank_condition.holds())),
                    ]),
                ),
            ]);
            println!("{}", doc.render());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_sample(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["count", "box", "shift", "seed", "out"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let count = match parsed.usize_flag("count", 1000) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let halfwidth = match parsed.f64_flag("box", 10.0) {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let shift = match parsed.f64_flag("shift", 0.0) {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let seed = match parsed.u64_flag("seed", 0) {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let problem = match loaded.scalar("sample") {
        Ok(p) => p,
        Err(e) => return file_error(e),
    };
    let mut family = vec![problem.objective().clone()];
    family.extend(problem.constraints().iter().cloned());
    let cfg = SampleConfig {
        count,
        box_bounds: vec![(-halfwidth, halfwidth); problem.dim()],
        shift,
        seed,
    };
    match gis::sample_image(&family, &cfg) {
        Ok(cloud) => {
            let text = csv_cloud(&cloud);
            match parsed.get("out") {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {path}: {e}");
                        return 66;
                    }
                    0
                }
                None => {
                    print!("{text}");
                    0
                }
            }
        }
        Err(e @ (Error::DegenerateInput(_) | Error::DimensionMismatch { .. })) => {
            usage_error(&e.to_string())
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_oracle(args: &[String]) -> i32 {
    let parsed = match parse_args(args, &["box", "points"]) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let halfwidth = match parsed.f64_flag("box", 10.0) {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let points = match parsed.usize_flag("points", 51) {
        Ok(p) => p,
        Err(e) => return usage_error(&e),
    };
    let loaded = match load_problem(&parsed.file) {
        Ok(l) => l,
        Err(e) => return file_error(e),
    };
    let problem = match loaded.scalar("oracle") {
        Ok(p) => p,
        Err(e) => return file_error(e),
    };
    let grid = match GridSpec::symmetric(problem.dim(), halfwidth, points) {
        Ok(g) => g,
        Err(e) => return usage_error(&e.to_string()),
    };
    match oracle::grid_minimize(problem, &grid) {
        Ok(GridOutcome::Found { point, value }) => {
            let doc = Json::Obj(vec![
                ("point", Json::floats(point.as_slice())),
                ("value", Json::Num(value)),
            ]);
            println!("{}", doc.render());
            0
        }
        Ok(GridOutcome::Infeasible) => {
            let doc = Json::Obj(vec![("infeasible", Json::Bool(true))]);
            println!("{}", doc.render());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
