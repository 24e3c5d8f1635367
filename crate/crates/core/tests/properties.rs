//! Property tests over randomized instances.

use proptest::prelude::*;

use sqcqp_core::dual::{self, DualStatus};
use sqcqp_core::gis;
use sqcqp_core::oracle::{self, GridSpec};
use sqcqp_core::slemma;
use sqcqp_core::{Multipliers, Problem, ScalarQuadratic, Vector};

fn quadratic(n: usize) -> impl Strategy<Value = ScalarQuadratic> {
    (
        -2.0..2.0f64,
        proptest::collection::vec(-2.0..2.0f64, n),
        -2.0..2.0f64,
    )
        .prop_map(|(a, b, c)| ScalarQuadratic::new(a, Vector::new(b).unwrap(), c).unwrap())
}

fn problem(n: usize, m: usize) -> impl Strategy<Value = Problem> {
    (quadratic(n), proptest::collection::vec(quadratic(n), m))
        .prop_map(|(objective, constraints)| Problem::new(objective, constraints).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The dual value never exceeds the objective at any feasible point.
    #[test]
    fn weak_duality(
        p in (1usize..4, 1usize..3).prop_flat_map(|(n, m)| problem(n, m)),
        gamma_raw in proptest::collection::vec(0.0..3.0f64, 2),
        x_raw in proptest::collection::vec(-3.0..3.0f64, 3),
    ) {
        let m = p.num_constraints();
        let n = p.dim();
        let gamma = Multipliers::new(gamma_raw[..m].to_vec()).unwrap();
        let x = Vector::new(x_raw[..n].to_vec()).unwrap();
        let feasible = p.constraints().iter().all(|q| q.eval(&x).unwrap() <= 0.0);
        if feasible {
            let dual = dual::dual_value(&p, &gamma).unwrap();
            let jx = p.objective().eval(&x).unwrap();
            prop_assert!(dual.value <= jx + 1e-9);
        }
    }

    /// Midpoint concavity of the dual where both endpoints are attained.
    #[test]
    fn dual_concavity(
        p in (1usize..4, 1usize..3).prop_flat_map(|(n, m)| problem(n, m)),
        g1_raw in proptest::collection::vec(0.0..4.0f64, 2),
        g2_raw in proptest::collection::vec(0.0..4.0f64, 2),
    ) {
        let m = p.num_constraints();
        let g1 = Multipliers::new(g1_raw[..m].to_vec()).unwrap();
        let g2 = Multipliers::new(g2_raw[..m].to_vec()).unwrap();
        let v1 = dual::dual_value(&p, &g1).unwrap();
        let v2 = dual::dual_value(&p, &g2).unwrap();
        if v1.status == DualStatus::Attained && v2.status == DualStatus::Attained {
            let mid_gamma: Vec<f64> = g1
                .gamma()
                .iter()
                .zip(g2.gamma())
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let mid = dual::dual_value(&p, &Multipliers::new(mid_gamma).unwrap()).unwrap();
            prop_assert!(mid.value >= 0.5 * v1.value + 0.5 * v2.value - 1e-9);
        }
    }

    /// The witness construction satisfies its three defining identities for
    /// arbitrary rank-deficient families.
    #[test]
    fn witness_identities(
        fs in proptest::collection::vec(quadratic(4), 2..4),
        xv_raw in proptest::collection::vec(-3.0..3.0f64, 4),
        xw_raw in proptest::collection::vec(-3.0..3.0f64, 4),
        lambda in 0.05..0.95f64,
    ) {
        let x_v = Vector::new(xv_raw).unwrap();
        let x_w = Vector::new(xw_raw).unwrap();
        let w = match gis::convexity_witness(&fs, &x_v, &x_w, lambda) {
            Ok(w) => w,
            // Full rank is possible for three generic vectors only with
            // probability zero, but degenerate draws are legal.
            Err(_) => return Ok(()),
        };
        prop_assert!(w.discriminant >= 0.0);
        let target = lambda * x_v.norm_sq() + (1.0 - lambda) * x_w.norm_sq();
        prop_assert!((w.x_tilde.norm_sq() - target).abs() < 1e-9);
        for (f, slack) in fs.iter().zip(&w.slacks) {
            let expected = lambda * f.eval(&x_v).unwrap()
                + (1.0 - lambda) * f.eval(&x_w).unwrap()
                - f.eval(&w.x_tilde).unwrap();
            prop_assert!((slack - expected).abs() < 1e-12);
            prop_assert!(slack.abs() < 1e-9);
        }
    }

    /// A `true` nonnegativity certificate is never contradicted by a grid
    /// scan; a `false` one is refuted exactly at the analytic minimizer.
    #[test]
    fn certificate_against_grid(
        fs in proptest::collection::vec(quadratic(2), 1..3),
        gamma_raw in proptest::collection::vec(0.0..2.0f64, 3),
    ) {
        let gamma = &gamma_raw[..fs.len()];
        if gamma.iter().all(|g| *g == 0.0) {
            return Ok(());
        }
        let mut a = 0.0;
        let mut c = 0.0;
        let mut b = vec![0.0; 2];
        for (f, g) in fs.iter().zip(gamma) {
            a += g * f.a;
            c += g * f.c;
            for (bi, fi) in b.iter_mut().zip(f.b.iter()) {
                *bi += g * fi;
            }
        }
        let combination = ScalarQuadratic::new(a, Vector::new(b.clone()).unwrap(), c).unwrap();
        if slemma::nonnegativity_certificate(&fs, gamma).unwrap() {
            let grid = GridSpec::symmetric(2, 5.0, 101).unwrap();
            let refutation = oracle::grid_refute_nonneg(&combination, &grid).unwrap();
            prop_assert!(refutation.is_none());
            // Direct statement: the grid minimum stays above -1e-9.
            for i in 0..101 {
                for j in 0..101 {
                    let x = Vector::new(vec![
                        -5.0 + 10.0 * i as f64 / 100.0,
                        -5.0 + 10.0 * j as f64 / 100.0,
                    ])
                    .unwrap();
                    prop_assert!(combination.eval(&x).unwrap() >= -1e-9);
                }
            }
        } else if a > 0.0 {
            let minimizer = Vector::new(b.iter().map(|bi| -bi / a).collect()).unwrap();
            prop_assert!(combination.eval(&minimizer).unwrap() < 0.0);
        }
    }
}
