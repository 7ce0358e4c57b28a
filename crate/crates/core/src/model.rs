//! Network specifications, partitions and delay profiles.
//!
//! A generalized DMN is described by its alphabets, two ordered partitions of
//! the node set (which nodes transmit into, and which nodes receive from, each
//! of the `alpha` channels) and one conditional probability table per channel.
//! Within a time slot the channels fire in order, so channel `h` may depend on
//! every input transmitted into channels `1..=h` and on every output produced
//! by channels `1..h`.
//!
//! Node indices are 1-based in every external format and in `Display` output;
//! [`NodeSet`] iterates 0-based indices for internal use.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{x_name, y_name, Variable};

/// Tolerance for row sums of conditional probability tables.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Largest network the bitmask representation supports.
pub const MAX_NODES: usize = 64;

/// A set of nodes stored as a bitmask (bit `i` is node `i + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_mask(mask: u64) -> Self {
        NodeSet(mask)
    }

    /// Builds a set from 1-based node numbers.
    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Result<Self> {
        let mut mask = 0u64;
        for node in nodes {
            if node == 0 || node > MAX_NODES {
                return Err(Error::InvalidNode {
                    node,
                    n_nodes: MAX_NODES,
                });
            }
            mask |= 1 << (node - 1);
        }
        Ok(NodeSet(mask))
    }

    /// All nodes `1..=n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(index: usize) -> Self {
        NodeSet(1 << index)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 >> index & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> NodeSet {
        NodeSet::full(n).difference(self)
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    /// 0-based member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// 1-based member numbers in ascending order.
    pub fn nodes(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// An ordered tuple of node sets. It is an alpha-partition of `{1..N}` when
/// the blocks are pairwise disjoint and cover every node; empty blocks are
/// allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<NodeSet>,
}

impl Partition {
    pub fn new(blocks: Vec<NodeSet>) -> Self {
        Partition { blocks }
    }

    /// Builds a partition from lists of 1-based node numbers.
    pub fn from_lists(lists: &[Vec<usize>]) -> Result<Self> {
        lists
            .iter()
            .map(|l| NodeSet::from_nodes(l.iter().copied()))
            .collect::<Result<Vec<_>>>()
            .map(Partition::new)
    }

    pub fn blocks(&self) -> &[NodeSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block `h` (0-based); empty when out of range.
    pub fn block(&self, h: usize) -> NodeSet {
        self.blocks.get(h).copied().unwrap_or_default()
    }

    /// Union of the first `h` blocks, i.e. blocks `0..h`.
    pub fn prefix(&self, h: usize) -> NodeSet {
        self.blocks
            .iter()
            .take(h)
            .fold(NodeSet::EMPTY, |acc, b| acc.union(*b))
    }

    fn is_partition_of(&self, n: usize) -> bool {
        self.first_overlap().is_none() && self.prefix(self.len()) == NodeSet::full(n)
    }

    fn first_overlap(&self) -> Option<(usize, usize)> {
        for a in 0..self.blocks.len() {
            for b in a + 1..self.blocks.len() {
                if !self.blocks[a].is_disjoint(self.blocks[b]) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    fn to_lists(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.nodes()).collect()
    }
}

/// Conditional pmf of an output block given an input block.
///
/// Rows are indexed by the joint input assignment and columns by the joint
/// output assignment, both mixed-radix with the first variable most
/// significant. A table with no output variables has a single column.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub input_vars: Vec<Variable>,
    pub output_vars: Vec<Variable>,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelTable {
    pub fn new(input_vars: Vec<Variable>, output_vars: Vec<Variable>, rows: Vec<Vec<f64>>) -> Self {
        ChannelTable {
            input_vars,
            output_vars,
            rows,
        }
    }

    /// Expected row count from the input variable cardinalities.
    pub fn n_rows(&self) -> usize {
        self.input_vars.iter().map(|v| v.card).product()
    }

    pub fn n_cols(&self) -> usize {
        self.output_vars.iter().map(|v| v.card).product()
    }

    #[inline]
    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }

    /// Shape and stochasticity problems, as human-readable strings.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rows.len() != self.n_rows() {
            out.push(format!(
                "expected {} rows, found {}",
                self.n_rows(),
                self.rows.len()
            ));
        }
        let cols = self.n_cols();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != cols {
                out.push(format!("row {r}: expected {cols} columns, found {}", row.len()));
                continue;
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                out.push(format!("row {r}: entry out of [0,1]"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                out.push(format!("row {r} not stochastic (sums to {s})"));
            }
        }
        out
    }

    /// Single-column identity-free check used by constructors of derived
    /// tables.
    pub fn ensure_stochastic(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::NotStochastic(p.join("; ")))
        }
    }
}

/// Category of a spec invariant violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    AlphabetCount,
    EmptyAlphabet,
    PartitionLength,
    BlocksNotDisjoint,
    PartitionNotCovering,
    ChannelCount,
    ChannelShape,
    EntryOutOfRange,
    RowNotStochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        writeln!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {}", v.message)?;
        }
        Ok(())
    }
}

/// A generalized discrete network `(X_I, Y_I, alpha, S, G, q)`.
///
/// Construction does not enforce the invariants; call [`validate_spec`] (or
/// [`NetworkSpec::validated`]) before handing a spec to the analysis code.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    n_nodes: usize,
    input_alphabets: Vec<usize>,
    output_alphabets: Vec<usize>,
    alpha: usize,
    input_partition: Partition,
    output_partition: Partition,
    channels: Vec<ChannelTable>,
}

impl NetworkSpec {
    /// Assembles a spec, deriving each channel's variable lists from the
    /// partitions. `channel_rows[h]` holds the rows of channel `h + 1`.
    pub fn new(
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        input_partition: Partition,
        output_partition: Partition,
        channel_rows: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        let n_nodes = input_alphabets.len();
        let alpha = channel_rows.len();
        Self::from_parts(
            n_nodes,
            alpha,
            input_alphabets,
            output_alphabets,
            input_partition,
            output_partition,
            channel_rows,
        )
    }

    fn from_parts(
        n_nodes: usize,
        alpha: usize,
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        input_partition: Partition,
        output_partition: Partition,
        channel_rows: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        let card = |sizes: &[usize], i: usize| sizes.get(i).copied().unwrap_or(0);
        let channels = channel_rows
            .into_iter()
            .enumerate()
            .map(|(h, rows)| {
                let xs = input_partition.prefix(h + 1);
                let ys = output_partition.prefix(h);
                let mut input_vars: Vec<Variable> = xs
                    .iter()
                    .map(|i| Variable::new(x_name(i), card(&input_alphabets, i)))
                    .collect();
                input_vars.extend(
                    ys.iter()
                        .map(|i| Variable::new(y_name(i), card(&output_alphabets, i))),
                );
                let output_vars = output_partition
                    .block(h)
                    .iter()
                    .map(|i| Variable::new(y_name(i), card(&output_alphabets, i)))
                    .collect();
                ChannelTable::new(input_vars, output_vars, rows)
            })
            .collect();
        NetworkSpec {
            n_nodes,
            input_alphabets,
            output_alphabets,
            alpha,
            input_partition,
            output_partition,
            channels,
        }
    }

    /// Returns the spec if it passes validation, otherwise the violation list.
    pub fn validated(self) -> Result<Self> {
        let report = validate_spec(&self);
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidSpec(
                report.violations.into_iter().map(|v| v.message).collect(),
            ))
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn input_alphabets(&self) -> &[usize] {
        &self.input_alphabets
    }

    pub fn output_alphabets(&self) -> &[usize] {
        &self.output_alphabets
    }

    pub fn input_partition(&self) -> &Partition {
        &self.input_partition
    }

    pub fn output_partition(&self) -> &Partition {
        &self.output_partition
    }

    pub fn channels(&self) -> &[ChannelTable] {
        &self.channels
    }

    pub fn channel(&self, h: usize) -> &ChannelTable {
        &self.channels[h]
    }

    /// `(S^h, G^{h-1})` for 0-based channel `h`: the nodes whose inputs and
    /// outputs feed channel `h + 1`.
    pub fn channel_inputs(&self, h: usize) -> (NodeSet, NodeSet) {
        (
            self.input_partition.prefix(h + 1),
            self.output_partition.prefix(h),
        )
    }

    /// `G_h` for 0-based channel `h`.
    pub fn channel_outputs(&self, h: usize) -> NodeSet {
        self.output_partition.block(h)
    }

    /// Row of channel `h` for per-node input and output symbols `x`, `y`.
    pub fn channel_row(&self, h: usize, x: &[usize], y: &[usize]) -> usize {
        let (xs, ys) = self.channel_inputs(h);
        let mut idx = 0;
        for i in xs.iter() {
            idx = idx * self.input_alphabets[i] + x[i];
        }
        for i in ys.iter() {
            idx = idx * self.output_alphabets[i] + y[i];
        }
        idx
    }

    /// Column of channel `h` holding the symbols `y` of its output block.
    pub fn channel_col(&self, h: usize, y: &[usize]) -> usize {
        self.output_partition
            .block(h)
            .iter()
            .fold(0, |idx, i| idx * self.output_alphabets[i] + y[i])
    }

    /// Writes column `col` of channel `h` into the output block of `y`.
    pub fn write_outputs(&self, h: usize, mut col: usize, y: &mut [usize]) {
        let block: Vec<usize> = self.output_partition.block(h).iter().collect();
        for &i in block.iter().rev() {
            y[i] = col % self.output_alphabets[i];
            col /= self.output_alphabets[i];
        }
    }

    /// Row of the input policy for channel `h`: `(X_{S^{h-1}}, Y_{G^{h-1}})`
    /// in 1-based terms.
    pub fn policy_row(&self, h: usize, x: &[usize], y: &[usize]) -> usize {
        let mut idx = 0;
        for i in self.input_partition.prefix(h).iter() {
            idx = idx * self.input_alphabets[i] + x[i];
        }
        for i in self.output_partition.prefix(h).iter() {
            idx = idx * self.output_alphabets[i] + y[i];
        }
        idx
    }

    /// Column of the input policy for channel `h`: `X_{S_h}`.
    pub fn policy_col(&self, h: usize, x: &[usize]) -> usize {
        self.input_partition
            .block(h)
            .iter()
            .fold(0, |idx, i| idx * self.input_alphabets[i] + x[i])
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n_nodes)
    }

    /// Variables `X1..XN, Y1..YN`, the layout of every full network joint.
    pub fn network_variables(&self) -> Vec<Variable> {
        let mut vars: Vec<Variable> = (0..self.n_nodes)
            .map(|i| Variable::new(x_name(i), self.input_alphabets[i]))
            .collect();
        vars.extend((0..self.n_nodes).map(|i| Variable::new(y_name(i), self.output_alphabets[i])));
        vars
    }

    pub fn from_file(file: SpecFile) -> Result<Self> {
        let mut problems = Vec::new();
        if file.n_nodes == 0 || file.n_nodes > MAX_NODES {
            problems.push(format!("n_nodes must be in 1..={MAX_NODES}"));
        }
        for (name, part) in [
            ("input_partition", &file.input_partition),
            ("output_partition", &file.output_partition),
        ] {
            for block in part {
                for &i in block {
                    if i == 0 || i > file.n_nodes {
                        problems.push(format!("{name}: node {i} outside 1..={}", file.n_nodes));
                    }
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidSpec(problems));
        }
        let input_partition = Partition::from_lists(&file.input_partition)?;
        let output_partition = Partition::from_lists(&file.output_partition)?;
        Ok(Self::from_parts(
            file.n_nodes,
            file.alpha,
            file.input_alphabets,
            file.output_alphabets,
            input_partition,
            output_partition,
            file.channels.into_iter().map(|c| c.rows).collect(),
        ))
    }

    pub fn to_file(&self) -> SpecFile {
        SpecFile {
            n_nodes: self.n_nodes,
            input_alphabets: self.input_alphabets.clone(),
            output_alphabets: self.output_alphabets.clone(),
            alpha: self.alpha,
            input_partition: self.input_partition.to_lists(),
            output_partition: self.output_partition.to_lists(),
            channels: self
                .channels
                .iter()
                .map(|c| ChannelRows {
                    rows: c.rows.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("spec serializes");
        s.push('\n');
        s
    }
}

/// On-disk form of a [`NetworkSpec`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpecFile {
    pub n_nodes: usize,
    pub input_alphabets: Vec<usize>,
    pub output_alphabets: Vec<usize>,
    pub alpha: usize,
    pub input_partition: Vec<Vec<usize>>,
    pub output_partition: Vec<Vec<usize>>,
    pub channels: Vec<ChannelRows>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelRows {
    pub rows: Vec<Vec<f64>>,
}

/// Lists every violated invariant of `spec`.
pub fn validate_spec(spec: &NetworkSpec) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let n = spec.n_nodes;
    if spec.input_alphabets.len() != n || spec.output_alphabets.len() != n {
        report.push(
            AlphabetCount,
            format!(
                "expected {n} input and output alphabets, found {} and {}",
                spec.input_alphabets.len(),
                spec.output_alphabets.len()
            ),
        );
    }
    for (kind, sizes) in [("input", &spec.input_alphabets), ("output", &spec.output_alphabets)] {
        for (i, &s) in sizes.iter().enumerate() {
            if s == 0 {
                report.push(EmptyAlphabet, format!("{kind} alphabet of node {} is empty", i + 1));
            }
        }
    }
    for (name, part) in [
        ("input", &spec.input_partition),
        ("output", &spec.output_partition),
    ] {
        if part.len() != spec.alpha {
            report.push(
                PartitionLength,
                format!("{name} partition has {} blocks, alpha is {}", part.len(), spec.alpha),
            );
        }
        if let Some((a, b)) = part.first_overlap() {
            report.push(
                BlocksNotDisjoint,
                format!(
                    "{name} partition blocks not disjoint: block {} and block {} share {}",
                    a + 1,
                    b + 1,
                    part.block(a).intersection(part.block(b))
                ),
            );
        }
        let missing = NodeSet::full(n).difference(part.prefix(part.len()));
        if !missing.is_empty() {
            report.push(
                PartitionNotCovering,
                format!("{name} partition does not cover nodes {missing}"),
            );
        }
    }
    if spec.channels.len() != spec.alpha {
        report.push(
            ChannelCount,
            format!("{} channels given, alpha is {}", spec.channels.len(), spec.alpha),
        );
    }
    for (h, ch) in spec.channels.iter().enumerate() {
        let cols = ch.n_cols();
        if ch.rows.len() != ch.n_rows() {
            report.push(
                ChannelShape,
                format!(
                    "channel {}: expected {} rows, found {}",
                    h + 1,
                    ch.n_rows(),
                    ch.rows.len()
                ),
            );
        }
        for (r, row) in ch.rows.iter().enumerate() {
            if row.len() != cols {
                report.push(
                    ChannelShape,
                    format!(
                        "channel {} row {}: expected {cols} columns, found {}",
                        h + 1,
                        r,
                        row.len()
                    ),
                );
                continue;
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p) || p.is_nan()) {
                report.push(
                    EntryOutOfRange,
                    format!("channel {} row {}: entry outside [0,1]", h + 1, r),
                );
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL || s.is_nan() {
                report.push(
                    RowNotStochastic,
                    format!("channel {} row {} not stochastic (sums to {s})", h + 1, r),
                );
            }
        }
    }
    report
}

/// Position of node `i` (1-based) in the two partitions: returns `(h_i, m_i)`,
/// 1-based, with `i ∈ S_{h_i}` and `i ∈ G_{m_i}`.
pub fn locate_node(spec: &NetworkSpec, node: usize) -> Result<(usize, usize)> {
    if node == 0 || node > spec.n_nodes {
        return Err(Error::InvalidNode {
            node,
            n_nodes: spec.n_nodes,
        });
    }
    let find = |p: &Partition| p.blocks().iter().position(|b| b.contains(node - 1));
    match (find(&spec.input_partition), find(&spec.output_partition)) {
        (Some(h), Some(m)) => Ok((h + 1, m + 1)),
        _ => Err(Error::InvalidSpec(vec![format!(
            "node {node} is not covered by both partitions"
        )])),
    }
}

/// Per-node delay bits `b_i ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DelayProfile(Vec<u8>);

impl DelayProfile {
    pub fn new(delays: Vec<u8>) -> Result<Self> {
        if let Some(d) = delays.iter().find(|&&d| d > 1) {
            return Err(Error::InvalidProfile(format!("delay {d} is not 0 or 1")));
        }
        Ok(DelayProfile(delays))
    }

    /// The all-one profile.
    pub fn positive(n: usize) -> Self {
        DelayProfile(vec![1; n])
    }

    /// Parses `"1,0,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let delays = text
            .split(',')
            .map(|t| match t.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::InvalidProfile(format!("bad delay `{other}`"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        DelayProfile::new(delays)
    }

    pub fn delays(&self) -> &[u8] {
        &self.0
    }

    /// Delay of 0-based node `i`.
    pub fn delay(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&b| b == 1)
    }
}

impl fmt::Display for DelayProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// A profile is feasible when every zero-delay node transmits into a strictly
/// later channel than the one it receives from (`h_i > m_i`), so no node waits
/// on its own transmission within a slot.
pub fn is_feasible(spec: &NetworkSpec, profile: &DelayProfile) -> bool {
    if profile.len() != spec.n_nodes {
        return false;
    }
    profile.delays().iter().enumerate().all(|(i, &b)| {
        b == 1
            || match locate_node(spec, i + 1) {
                Ok((h, m)) => h > m,
                Err(_) => false,
            }
    })
}

/// All feasible profiles, lexicographic in `(b_1, ..., b_N)`.
pub fn enumerate_feasible_profiles(spec: &NetworkSpec) -> Vec<DelayProfile> {
    let n = spec.n_nodes;
    (0u64..1 << n)
        .map(|code| DelayProfile((0..n).map(|i| (code >> (n - 1 - i) & 1) as u8).collect()))
        .filter(|p| is_feasible(spec, p))
        .collect()
}

/// Invariant check used by tests: each block list is an alpha-partition.
pub fn partitions_valid(spec: &NetworkSpec) -> bool {
    spec.input_partition.len() == spec.alpha
        && spec.output_partition.len() == spec.alpha
        && spec.input_partition.is_partition_of(spec.n_nodes)
        && spec.output_partition.is_partition_of(spec.n_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks;

    fn classical(n: usize) -> NetworkSpec {
        networks::identity(n)
    }

    #[test]
    fn bscfb_validates() {
        let spec = networks::bscfb(0.11).unwrap();
        let report = validate_spec(&spec);
        assert!(report.is_ok(), "{report}");
        assert!(partitions_valid(&spec));
    }

    #[test]
    fn overlapping_blocks_reported() {
        let spec = NetworkSpec::new(
            vec![2, 2],
            vec![2, 2],
            Partition::from_lists(&[vec![1], vec![1, 2]]).unwrap(),
            Partition::from_lists(&[vec![2], vec![1]]).unwrap(),
            networks::bscfb(0.1).unwrap().channels().iter().map(|c| c.rows.clone()).collect(),
        );
        let report = validate_spec(&spec);
        assert!(report.has(ViolationKind::BlocksNotDisjoint));
        assert!(report.to_string().contains("blocks not disjoint"));
    }

    #[test]
    fn non_stochastic_row_reported() {
        let mut file = networks::bscfb(0.1).unwrap().to_file();
        file.channels[0].rows[0] = vec![0.8, 0.1];
        let spec = NetworkSpec::from_file(file).unwrap();
        let report = validate_spec(&spec);
        assert!(report.has(ViolationKind::RowNotStochastic));
        assert!(report.to_string().contains("row 0 not stochastic"));
    }

    #[test]
    fn shape_and_cover_violations() {
        let mut file = networks::bscfb(0.1).unwrap().to_file();
        file.channels[1].rows.pop();
        file.output_partition = vec![vec![2], vec![]];
        let spec = NetworkSpec::from_file(file).unwrap();
        let report = validate_spec(&spec);
        assert!(report.has(ViolationKind::ChannelShape));
        assert!(report.has(ViolationKind::PartitionNotCovering));
    }

    #[test]
    fn out_of_range_node_rejected_at_parse() {
        let mut file = networks::bscfb(0.1).unwrap().to_file();
        file.input_partition = vec![vec![1], vec![3]];
        assert!(matches!(NetworkSpec::from_file(file), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn locate_bscfb_nodes() {
        let spec = networks::bscfb(0.11).unwrap();
        assert_eq!(locate_node(&spec, 1).unwrap(), (1, 2));
        assert_eq!(locate_node(&spec, 2).unwrap(), (2, 1));
        assert!(matches!(
            locate_node(&spec, 3),
            Err(Error::InvalidNode { node: 3, .. })
        ));
        assert!(locate_node(&spec, 0).is_err());
    }

    #[test]
    fn locate_classical() {
        let spec = classical(3);
        for i in 1..=3 {
            assert_eq!(locate_node(&spec, i).unwrap(), (1, 1));
        }
    }

    #[test]
    fn feasibility_examples() {
        let spec = networks::bscfb(0.11).unwrap();
        assert!(is_feasible(&spec, &DelayProfile::parse("1,0").unwrap()));
        assert!(!is_feasible(&spec, &DelayProfile::parse("0,0").unwrap()));
        assert!(!is_feasible(&spec, &DelayProfile::parse("0,1").unwrap()));
        assert!(is_feasible(&spec, &DelayProfile::positive(2)));
        assert!(!is_feasible(&classical(2), &DelayProfile::parse("0,0").unwrap()));
        assert!(!is_feasible(&spec, &DelayProfile::positive(3)));
    }

    #[test]
    fn feasible_profile_lists() {
        let spec = networks::bscfb(0.11).unwrap();
        let got: Vec<String> = enumerate_feasible_profiles(&spec)
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(got, ["1,0", "1,1"]);
        let got: Vec<String> = enumerate_feasible_profiles(&classical(2))
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(got, ["1,1"]);
    }

    #[test]
    fn causal_relay_profiles_free_on_zero_delay_set() {
        // N_1 = {1, 3}, N_0 = {2}: nodes in N_0 may choose either delay.
        let spec = networks::causal_relay_template(0.1).unwrap();
        let got: Vec<String> = enumerate_feasible_profiles(&spec)
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(got, ["1,0,1", "1,1,1"]);

        // N_0 = {1, 2}, N_1 = {3}: 2^2 profiles.
        let spec = networks::uniform_causal_relay(NodeSet::from_nodes([1, 2]).unwrap(), 3);
        assert!(validate_spec(&spec).is_ok());
        let got: Vec<String> = enumerate_feasible_profiles(&spec)
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(got, ["0,0,1", "0,1,1", "1,0,1", "1,1,1"]);

        // N_0 empty: only the all-one profile.
        let spec = networks::uniform_causal_relay(NodeSet::EMPTY, 2);
        assert!(validate_spec(&spec).is_ok());
        assert_eq!(enumerate_feasible_profiles(&spec).len(), 1);
    }

    #[test]
    fn profile_parse_errors() {
        assert!(DelayProfile::parse("1,2").is_err());
        assert!(DelayProfile::parse("1,x").is_err());
        assert!(DelayProfile::new(vec![0, 3]).is_err());
        assert_eq!(DelayProfile::parse(" 1, 0 ").unwrap().delays(), &[1, 0]);
    }

    #[test]
    fn node_set_ops() {
        let a = NodeSet::from_nodes([1, 3]).unwrap();
        let b = NodeSet::from_nodes([3, 4]).unwrap();
        assert_eq!(a.union(b).nodes(), vec![1, 3, 4]);
        assert_eq!(a.intersection(b).nodes(), vec![3]);
        assert_eq!(a.complement(4).nodes(), vec![2, 4]);
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(NodeSet::EMPTY.to_string(), "{}");
        assert!(NodeSet::from_nodes([0]).is_err());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let spec = networks::bscfb(0.11).unwrap();
        let text = spec.to_json();
        let back = NetworkSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_json(), text);
    }
}
