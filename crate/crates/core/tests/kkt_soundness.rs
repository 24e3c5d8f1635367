//! Soundness of the certificate checker against the brute-force oracle:
//! instances are built so a known `(x*, gamma*)` satisfies the KKT system
//! exactly, and whenever the checker claims global optimality with a
//! strictly feasible point in hand, no feasible grid point may do better.

use sqcqp_core::kkt;
use sqcqp_core::oracle::{self, GridOutcome, GridSpec};
use sqcqp_core::{Multipliers, Problem, ScalarQuadratic, ToleranceSet, Vector, Verdict};

struct TestRng(u64);

impl TestRng {
    fn new(seed: u64) -> Self {
        Self(seed ^ 0xa076_1d64_78bd_642f)
    }
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }
    fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Builds an instance where `(x_star, gamma)` satisfies stationarity and
/// complementarity by construction: active constraints pass through
/// `x_star`, inactive ones keep positive slack there, and the objective's
/// linear term is back-solved from the stationarity equation. All constraint
/// curvatures are positive so the feasible set is compact.
fn kkt_instance(seed: u64) -> (Problem, Vector, Multipliers) {
    let mut rng = TestRng::new(seed);
    let n = 1 + rng.index(3);
    let m = 1 + rng.index(3);
    let x_star: Vec<f64> = (0..n).map(|_| rng.uniform(-1.5, 1.5)).collect();
    let x_norm_sq: f64 = x_star.iter().map(|x| x * x).sum();

    let mut constraints = Vec::with_capacity(m);
    let mut gamma = Vec::with_capacity(m);
    for k in 0..m {
        let active = k == 0 || rng.index(2) == 0;
        let a = rng.uniform(0.2, 2.0);
        let b: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let lin: f64 = b.iter().zip(&x_star).map(|(bi, xi)| bi * xi).sum();
        let slack = if active { 0.0 } else { rng.uniform(0.2, 1.0) };
        let c = -(a * x_norm_sq + 2.0 * lin) - slack;
        constraints.push(ScalarQuadratic::new(a, Vector::new(b).unwrap(), c).unwrap());
        gamma.push(if active { rng.uniform(0.2, 2.0) } else { 0.0 });
    }

    // Aggregated curvature target, then the objective curvature follows.
    let curvature: f64 = rng.uniform(0.0, 3.0);
    let a_j = curvature
        - constraints
            .iter()
            .zip(&gamma)
            .map(|(q, g)| g * q.a)
            .sum::<f64>();
    // Stationarity: (a_J + sum g a_k) x* + (b_J + sum g b_k) = 0.
    let b_j: Vec<f64> = (0..n)
        .map(|i| {
            -curvature * x_star[i]
                - constraints
                    .iter()
                    .zip(&gamma)
                    .map(|(q, g)| g * q.b[i])
                    .sum::<f64>()
        })
        .collect();
    let objective =
        ScalarQuadratic::new(a_j, Vector::new(b_j).unwrap(), rng.uniform(-2.0, 2.0)).unwrap();
    let problem = Problem::new(objective, constraints).unwrap();
    (
        problem,
        Vector::new(x_star).unwrap(),
        Multipliers::new(gamma).unwrap(),
    )
}

#[test]
fn certified_global_optima_are_never_beaten_by_the_grid() {
    let tol = ToleranceSet::default();
    let mut certified = 0usize;
    for seed in 0..50u64 {
        let (problem, x_star, gamma) = kkt_instance(0x50D + seed);
        let report = kkt::check_kkt(&problem, &x_star, &gamma, &tol).unwrap();
        assert!(
            report.stationarity_residual <= 1e-8,
            "seed {seed}: construction broke stationarity ({})",
            report.stationarity_residual
        );
        assert!(report.complementarity_residual <= 1e-8);
        if report.verdict != Verdict::GloballyOptimal {
            // No strictly feasible point found within budget: nothing to
            // check against the oracle for this instance.
            continue;
        }
        certified += 1;
        let n = problem.dim();
        let points = match n {
            1 => 2001,
            2 => 201,
            _ => 41,
        };
        // Every feasible set here sits inside a curvature-0.2 ball through
        // x*; [-6, 6]^n is a generous cover.
        let grid = GridSpec::symmetric(n, 6.0, points).unwrap();
        let j_star = problem.objective().eval(&x_star).unwrap();
        match oracle::grid_minimize(&problem, &grid).unwrap() {
            GridOutcome::Found { value, .. } => {
                assert!(
                    value >= j_star - 1e-4,
                    "seed {seed}: grid found {value} below certified {j_star}"
                );
            }
            GridOutcome::Infeasible => panic!("seed {seed}: x* is feasible, grid disagrees"),
        }
    }
    assert!(certified >= 40, "only {certified}/50 instances certified");
}
