//! Ready-made network specs.

use crate::error::{Error, Result};
use crate::model::{NetworkSpec, NodeSet, Partition};

fn check_eps(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "eps",
            value: eps,
            expected: "[0, 1]",
        })
    }
}

fn bsc_rows(eps: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]
}

fn point(col: usize, cols: usize) -> Vec<f64> {
    let mut row = vec![0.0; cols];
    row[col] = 1.0;
    row
}

/// Two nodes, two channels. Channel 1 is a BSC(eps) from `X1` to `Y2`;
/// channel 2 hands node 1 the bit `Y1 = X2 xor Y2`.
pub fn bscfb(eps: f64) -> Result<NetworkSpec> {
    check_eps(eps)?;
    // Channel 2 rows are indexed by (x1, x2, y2).
    let q2 = (0..8).map(|r| point((r >> 1 & 1) ^ (r & 1), 2)).collect();
    NetworkSpec::new(
        vec![2, 2],
        vec![2, 2],
        Partition::new(vec![NodeSet::singleton(0), NodeSet::singleton(1)]),
        Partition::new(vec![NodeSet::singleton(1), NodeSet::singleton(0)]),
        vec![bsc_rows(eps), q2],
    )
    .validated()
}

/// The noiseless two-channel network `Y2 = X1`, then `Y1 = X2 xor Y2`.
pub fn deterministic_feedback() -> NetworkSpec {
    bscfb(0.0).expect("eps = 0 is valid")
}

/// A point-to-point BSC as a single-channel two-node network: node 1 sends,
/// node 2 receives, and the unused alphabets have size 1.
pub fn classical_bsc(eps: f64) -> Result<NetworkSpec> {
    check_eps(eps)?;
    NetworkSpec::new(
        vec![2, 1],
        vec![1, 2],
        Partition::new(vec![NodeSet::full(2)]),
        Partition::new(vec![NodeSet::full(2)]),
        vec![bsc_rows(eps)],
    )
    .validated()
}

/// `n` binary nodes on one channel with `Y_i = X_i`.
pub fn identity(n: usize) -> NetworkSpec {
    let size = 1usize << n;
    NetworkSpec::new(
        vec![2; n],
        vec![2; n],
        Partition::new(vec![NodeSet::full(n)]),
        Partition::new(vec![NodeSet::full(n)]),
        vec![(0..size).map(|r| point(r, size)).collect()],
    )
}

/// Causal relay layout with zero-delay set `N0`: the delayed nodes `N1`
/// transmit into channel 1, which feeds `N0`; everyone transmits into
/// channel 2, which feeds `N1`.
pub fn causal_relay(
    zero_delay: NodeSet,
    input_alphabets: Vec<usize>,
    output_alphabets: Vec<usize>,
    q1: Vec<Vec<f64>>,
    q2: Vec<Vec<f64>>,
) -> NetworkSpec {
    let n = input_alphabets.len();
    let delayed = zero_delay.complement(n);
    NetworkSpec::new(
        input_alphabets,
        output_alphabets,
        Partition::new(vec![delayed, zero_delay]),
        Partition::new(vec![zero_delay, delayed]),
        vec![q1, q2],
    )
}

/// Binary causal relay layout with uniform channel rows.
pub fn uniform_causal_relay(zero_delay: NodeSet, n: usize) -> NetworkSpec {
    let delayed = zero_delay.complement(n);
    let uniform = |rows_log: usize, cols_log: usize| {
        vec![vec![1.0 / (1usize << cols_log) as f64; 1 << cols_log]; 1 << rows_log]
    };
    causal_relay(
        zero_delay,
        vec![2; n],
        vec![2; n],
        uniform(delayed.len(), zero_delay.len()),
        uniform(n + zero_delay.len(), delayed.len()),
    )
}

/// Discrete three-node relay: `N1 = {1, 3}`, `N0 = {2}`. Node 2 hears
/// `Y2 = X1 xor Z2` and node 3 hears `Y3 = X1 xor X2 xor Y2 xor Z3`, with
/// independent `Z2, Z3 ~ Bernoulli(eps)`. A zero-delay relay sending
/// `X2 = Y2` removes `Z2` from node 3's observation.
pub fn causal_relay_template(eps: f64) -> Result<NetworkSpec> {
    check_eps(eps)?;
    // Channel 1 rows (x1, x3) with |X3| = 1; channel 2 rows (x1, x2, x3, y2),
    // columns (y1, y3) with |Y1| = 1.
    let q2 = (0..8)
        .map(|r| {
            let (x1, x2, y2) = (r >> 2 & 1, r >> 1 & 1, r & 1);
            let clean = x1 ^ x2 ^ y2;
            let mut row = vec![eps; 2];
            row[clean] = 1.0 - eps;
            row
        })
        .collect();
    causal_relay(
        NodeSet::singleton(1),
        vec![2, 2, 1],
        vec![1, 2, 2],
        bsc_rows(eps),
        q2,
    )
    .validated()
}

/// Spec files shipped with the crate, by name.
pub const BUNDLED_SPECS: [(&str, &str); 4] = [
    ("bscfb", include_str!("../data/bscfb.json")),
    ("classical-bsc", include_str!("../data/classical_bsc.json")),
    ("deterministic", include_str!("../data/deterministic.json")),
    ("causal-relay", include_str!("../data/causal_relay.json")),
];

/// A two-slot `(1, 0)` table code for the feedback network: node 1 repeats
/// one bit, node 2 sends its bit xor what it just heard.
pub const BUNDLED_CODE: &str = include_str!("../data/bscfb_code.json");

fn unknown(name: &str) -> Error {
    Error::InvalidSpec(vec![format!(
        "unknown network `{name}` (expected bscfb, classical-bsc, deterministic or causal-relay)"
    )])
}

/// Parses the bundled spec called `name`.
pub fn bundled(name: &str) -> Result<NetworkSpec> {
    let (_, text) = BUNDLED_SPECS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| unknown(name))?;
    NetworkSpec::from_json(text)?.validated()
}

/// Generator for a named network with parameter `eps` (ignored by
/// `deterministic`).
pub fn generate(name: &str, eps: f64) -> Result<NetworkSpec> {
    match name {
        "bscfb" => bscfb(eps),
        "classical-bsc" => classical_bsc(eps),
        "deterministic" => Ok(deterministic_feedback()),
        "causal-relay" => causal_relay_template(eps),
        _ => Err(unknown(name)),
    }
}
