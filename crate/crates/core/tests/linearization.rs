mod common;

use proptest::prelude::*;

use common::{all_assignments, small_case};
use netslice_core::milp::{build_model, encode_solution, evaluate, BuildConfig, BuildError};
use netslice_core::model::SolveStatus;
use netslice_core::solver::{solve_exact, SolverLimits};
use netslice_core::verify::verify;

const TOL: f64 = 1e-6;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Under both M and 2M the model accepts exactly the placements the
    /// verifier accepts, so both share the optimum.
    #[test]
    fn model_feasibility_matches_verifier(seed in any::<u64>()) {
        let case = small_case(seed, false);
        let candidates = all_assignments(&case.graph, &case.requests, &case.routing);
        let mut optima = Vec::new();
        for scale in [1.0, 2.0] {
            let config = BuildConfig { big_m_scale: scale, ..BuildConfig::with_routing(case.routing) };
            let (model, index) = match build_model(&case.graph, &case.requests, &config) {
                Ok(built) => built,
                Err(BuildError::EmptyAuthorizedSet { .. } | BuildError::Unroutable { .. }) => {
                    prop_assert!(candidates.iter().all(|s| !verify(&case.graph, &case.requests, s, &case.routing).overall));
                    return Ok(());
                }
                Err(e) => panic!("{e}"),
            };
            let mut best: Option<usize> = None;
            for sol in &candidates {
                let values = encode_solution(&model, &index, &case.requests, sol);
                let in_model = evaluate(&model, &values, TOL).is_empty();
                let verified = verify(&case.graph, &case.requests, sol, &case.routing).overall;
                prop_assert_eq!(in_model, verified, "assignment {:?}", sol.assignment);
                if in_model {
                    prop_assert!((model.objective_value(&values) - sol.objective as f64).abs() < TOL);
                    best = Some(best.map_or(sol.objective, |b| b.min(sol.objective)));
                }
            }
            optima.push(best);
        }
        prop_assert_eq!(optima[0], optima[1]);

        let solved = solve_exact(&case.graph, &case.requests, &case.routing, &SolverLimits::default());
        let expected = if solved.status == SolveStatus::Optimal { Some(solved.objective) } else { None };
        prop_assert_eq!(optima[0], expected);
    }
}
