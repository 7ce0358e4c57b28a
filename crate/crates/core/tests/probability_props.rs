mod common;

use common::{random_joint, random_policies, random_spec};
use dmn_core::model::{partitions_valid, NodeSet};
use dmn_core::probability::{
    compose_channels, conditional_mutual_information as cmi, factorized_joint, x_name, y_name,
};
use proptest::prelude::*;

fn names(set: NodeSet, f: fn(usize) -> String) -> Vec<String> {
    set.iter().map(f).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mi_chain_rule_and_bounds(seed in any::<u64>(), ca in 1usize..4, cb in 1usize..4, cc in 1usize..4) {
        let p = random_joint(seed, &[ca, cb, cc]);
        let a_bc = cmi(&p, &["V0"], &["V1", "V2"], &[]).unwrap();
        let a_c = cmi(&p, &["V0"], &["V2"], &[]).unwrap();
        let a_b_c = cmi(&p, &["V0"], &["V1"], &["V2"]).unwrap();
        prop_assert!(a_c >= 0.0 && a_b_c >= 0.0);
        prop_assert!((a_bc - (a_c + a_b_c)).abs() < 1e-9);
        let b_a_c = cmi(&p, &["V1"], &["V0"], &["V2"]).unwrap();
        prop_assert!((a_b_c - b_a_c).abs() < 1e-9);
        let ha = p.entropy(&["V0"]).unwrap();
        let hb = p.entropy(&["V1"]).unwrap();
        let ab = cmi(&p, &["V0"], &["V1"], &[]).unwrap();
        prop_assert!(ab <= ha.min(hb) + 1e-9);
        // I(A;B) = H(A) + H(B) - H(A,B)
        let hab = p.entropy(&["V0", "V1"]).unwrap();
        prop_assert!((ab - (ha + hb - hab)).abs() < 1e-9);
    }

    #[test]
    fn marginals_are_consistent(seed in any::<u64>()) {
        let p = random_joint(seed, &[2, 3, 2]);
        let m = p.marginalize(&["V2", "V0"]).unwrap();
        prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for c in 0..2 {
            for a in 0..2 {
                let direct: f64 = (0..3).map(|b| p.prob(&[a, b, c])).sum();
                prop_assert!((m.prob(&[c, a]) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composed_channel_is_stochastic(seed in any::<u64>(), n in 1usize..4, alpha in 1usize..4) {
        let spec = random_spec(seed, n, alpha);
        prop_assert!(partitions_valid(&spec));
        let q = compose_channels(&spec).unwrap();
        prop_assert_eq!(q.rows.len(), q.n_rows());
        for row in &q.rows {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    // Conditioning the factorized joint on a channel's inputs recovers that
    // channel wherever the conditioning event has positive probability.
    #[test]
    fn joint_recovers_each_channel(seed in any::<u64>(), n in 1usize..4, alpha in 1usize..4) {
        let spec = random_spec(seed, n, alpha);
        let joint = factorized_joint(&spec, &random_policies(&spec, seed)).unwrap();
        for h in 0..spec.alpha() {
            let (s, g) = spec.channel_inputs(h);
            let mut keep = names(s, x_name);
            keep.extend(names(g, y_name));
            keep.extend(names(spec.channel_outputs(h), y_name));
            let m = joint.marginalize(&refs(&keep)).unwrap();
            let table = spec.channel(h);
            let cols = table.n_cols();
            for (r, row) in table.rows.iter().enumerate() {
                let block = &m.probs()[r * cols..(r + 1) * cols];
                let pr: f64 = block.iter().sum();
                if pr > 1e-9 {
                    for c in 0..cols {
                        prop_assert!((block[c] / pr - row[c]).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
