#![allow(dead_code)]

use dmn_core::model::{ChannelTable, NetworkSpec, NodeSet, Partition};
use dmn_core::probability::{input_policy, JointPmf, Variable};
use dmn_core::rng;
use rand::Rng;

pub fn random_row(r: &mut impl Rng, cols: usize) -> Vec<f64> {
    // Occasional exact zeros exercise the zero-probability paths.
    let w: Vec<f64> = (0..cols)
        .map(|_| if r.random_bool(0.15) { 0.0 } else { r.random::<f64>() + 0.01 })
        .collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        let mut row = vec![0.0; cols];
        row[r.random_range(0..cols)] = 1.0;
        return row;
    }
    w.iter().map(|v| v / s).collect()
}

/// Random valid spec with `n_nodes` nodes, `alpha` channels and alphabets of
/// size 1 or 2. Blocks may be empty.
pub fn random_spec(seed: u64, n_nodes: usize, alpha: usize) -> NetworkSpec {
    let mut r = rng::stream(seed, rng::TABLE, &[0xabc]);
    let mut s_blocks = vec![NodeSet::from_mask(0); alpha];
    let mut g_blocks = vec![NodeSet::from_mask(0); alpha];
    for i in 0..n_nodes {
        let a = r.random_range(0..alpha);
        let b = r.random_range(0..alpha);
        s_blocks[a] = s_blocks[a].union(NodeSet::singleton(i));
        g_blocks[b] = g_blocks[b].union(NodeSet::singleton(i));
    }
    let xa: Vec<usize> = (0..n_nodes).map(|_| r.random_range(1..=2)).collect();
    let ya: Vec<usize> = (0..n_nodes).map(|_| r.random_range(1..=2)).collect();
    let s = Partition::new(s_blocks);
    let g = Partition::new(g_blocks);
    let rows = (0..alpha)
        .map(|h| {
            let n_rows: usize = s.prefix(h + 1).iter().map(|i| xa[i]).product::<usize>()
                * g.prefix(h).iter().map(|i| ya[i]).product::<usize>();
            let cols: usize = g.block(h).iter().map(|i| ya[i]).product();
            (0..n_rows).map(|_| random_row(&mut r, cols)).collect()
        })
        .collect();
    NetworkSpec::new(xa, ya, s, g, rows)
        .validated()
        .expect("random spec is valid")
}

pub fn random_policies(spec: &NetworkSpec, seed: u64) -> Vec<ChannelTable> {
    let mut r = rng::stream(seed, rng::TABLE, &[0xdef]);
    (0..spec.alpha())
        .map(|h| {
            let cols: usize = spec
                .input_partition()
                .block(h)
                .iter()
                .map(|i| spec.input_alphabets()[i])
                .product();
            input_policy(spec, h, |_| random_row(&mut r, cols))
        })
        .collect()
}

pub fn random_joint(seed: u64, cards: &[usize]) -> JointPmf {
    let mut r = rng::stream(seed, rng::TABLE, &[0x123]);
    let vars = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::new(format!("V{i}"), c))
        .collect();
    let size = cards.iter().product();
    JointPmf::new(vars, random_row(&mut r, size)).unwrap()
}
