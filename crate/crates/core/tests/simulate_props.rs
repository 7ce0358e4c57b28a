mod common;

use dmn_core::model::{enumerate_feasible_profiles, DelayProfile, NetworkSpec};
use dmn_core::networks::{self, BUNDLED_CODE, BUNDLED_SPECS};
use dmn_core::rng;
use dmn_core::simulate::{
    bscfb_scheme, check_memoryless_markov, check_positive_delay_markov, equivalence_check,
    estimate_error, run_trial, BscfbConfig, Code, ForwardCode, JointOptions, TableCode,
};
use proptest::prelude::*;
use rand::Rng;

fn bundled() -> Vec<NetworkSpec> {
    BUNDLED_SPECS
        .iter()
        .map(|(name, _)| networks::bundled(name).unwrap())
        .collect()
}

fn random_code(spec: &NetworkSpec, n: usize, profile: &DelayProfile, seed: u64) -> Code {
    let mut r = rng::stream(seed, rng::TABLE, &[n as u64]);
    let nodes = spec.n_nodes();
    let sizes = (0..nodes)
        .map(|i| {
            (0..nodes)
                .map(|j| if i == j { 1 } else { r.random_range(1..=2) })
                .collect()
        })
        .collect();
    TableCode::random(spec, n, profile, sizes, &mut r)
        .unwrap()
        .to_code(spec)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn all_one_codes_satisfy_both_chains(seed in any::<u64>(), n in 1usize..3) {
        for spec in bundled() {
            let code = random_code(&spec, n, &DelayProfile::positive(spec.n_nodes()), seed);
            let opts = JointOptions::default();
            prop_assert!(equivalence_check(&spec, &code, opts).unwrap() <= 1e-9);
            for v in check_memoryless_markov(&spec, &code, opts).unwrap() {
                prop_assert!(v.mi <= 1e-9, "{v:?}");
            }
            for v in check_positive_delay_markov(&spec, &code, opts).unwrap() {
                prop_assert!(v.mi <= 1e-9, "{v:?}");
            }
        }
    }

    #[test]
    fn zero_delay_codes_are_memoryless(seed in any::<u64>(), n in 1usize..3) {
        for spec in bundled() {
            for profile in enumerate_feasible_profiles(&spec) {
                let code = random_code(&spec, n, &profile, seed);
                for v in check_memoryless_markov(&spec, &code, JointOptions::default()).unwrap() {
                    prop_assert!(v.mi <= 1e-9, "{profile}: {v:?}");
                }
            }
        }
    }

    #[test]
    fn reverse_link_never_errs(seed in any::<u64>(), eps in 0.0f64..0.3, n in 20usize..120) {
        let report = bscfb_scheme(&BscfbConfig {
            eps,
            n,
            forward_rate: 0.05,
            trials: 8,
            seed,
            forward_code: ForwardCode::Uncoded,
        })
        .unwrap();
        prop_assert_eq!(report.errors.pair(2, 1).unwrap().errors, 0);
    }
}

// Per slot and channel, output frequencies given the channel inputs match q.
fn empirical_law_matches(spec: &NetworkSpec, code: &Code, trials: u64) {
    let n = code.blocklength;
    for h in 0..spec.alpha() {
        let table = spec.channel(h);
        let mut counts = vec![vec![vec![0u64; table.n_cols()]; table.n_rows()]; n];
        for t in 0..trials {
            let trace = run_trial(spec, code, 11, t).unwrap();
            for k in 0..n {
                let row = spec.channel_row(h, &trace.x[k], &trace.y[k]);
                counts[k][row][spec.channel_col(h, &trace.y[k])] += 1;
            }
        }
        let mut checked = 0;
        for slot in &counts {
            for (row, c) in slot.iter().enumerate() {
                let total: u64 = c.iter().sum();
                if total < 10_000 {
                    continue;
                }
                checked += 1;
                for (col, &m) in c.iter().enumerate() {
                    let dev = (m as f64 / total as f64 - table.rows[row][col]).abs();
                    assert!(dev < 0.01, "channel {h} row {row} col {col}: {dev}");
                }
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn empirical_conditionals_converge() {
    let spec = networks::bundled("bscfb").unwrap();
    let code = TableCode::from_json(BUNDLED_CODE).unwrap().to_code(&spec).unwrap();
    empirical_law_matches(&spec, &code, 100_000);

    let relay = networks::bundled("causal-relay").unwrap();
    let profile = DelayProfile::new(vec![1, 0, 1]).unwrap();
    empirical_law_matches(&relay, &random_code(&relay, 2, &profile, 5), 100_000);
}

#[test]
fn bundled_code_relays_exactly() {
    let spec = networks::bundled("bscfb").unwrap();
    let code = TableCode::from_json(BUNDLED_CODE).unwrap().to_code(&spec).unwrap();
    let report = estimate_error(&spec, &code, 2000, 3).unwrap();
    assert_eq!(report.pair(2, 1).unwrap().errors, 0);
    let det = networks::bundled("deterministic").unwrap();
    let report = estimate_error(&det, &code, 200, 3).unwrap();
    assert!(report.pairs.iter().all(|p| p.errors == 0));
}

#[test]
fn error_reports_ignore_thread_count() {
    let spec = networks::bscfb(0.11).unwrap();
    let code = dmn_core::simulate::bscfb_code(0.11, 200, 0.3, ForwardCode::Ldpc).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_error(&spec, &code, 64, 9).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(4));
}
