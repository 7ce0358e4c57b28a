//! Running codes on a network.
//!
//! Within slot `k` the channels fire in order. Before channel `h` fires,
//! every node of its input block `S_h` transmits; a node with delay `b_i`
//! sees its first `k - b_i` received symbols, so a zero-delay node sees the
//! current slot's symbol (produced by an earlier channel, which feasibility
//! guarantees). Then `Y_{G_h}` is drawn from `q^(h)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{BinaryBlockCode, IraLdpc, RandomCodebook, Uncoded};
use crate::error::{Error, Result};
use crate::model::{is_feasible, DelayProfile, NetworkSpec, NodeSet, Partition};
use crate::probability::{binary_entropy, compose_channels, CmiPlan, JointPmf, Variable};
use crate::rng;

/// A message as digits, one per radix of its [`MessageSet`].
pub type Message = Vec<u64>;

/// Message alphabet `∏ radices`; empty radices mean the single message.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MessageSet {
    pub radices: Vec<u64>,
}

impl MessageSet {
    pub fn trivial() -> Self {
        MessageSet::default()
    }

    /// A set of size `m` as one digit.
    pub fn of_size(m: u64) -> Self {
        if m <= 1 {
            MessageSet::trivial()
        } else {
            MessageSet { radices: vec![m] }
        }
    }

    pub fn bits(k: usize) -> Self {
        MessageSet {
            radices: vec![2; k],
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.radices.iter().all(|&r| r <= 1)
    }

    /// Size, or `None` if it overflows.
    pub fn size(&self) -> Option<u128> {
        self.radices
            .iter()
            .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
    }

    pub fn log2_size(&self) -> f64 {
        self.radices.iter().map(|&r| (r as f64).log2()).sum()
    }

    fn draw(&self, r: &mut impl Rng) -> Message {
        self.radices.iter().map(|&m| r.random_range(0..m)).collect()
    }

    /// Mixed-radix index of `msg`, most significant digit first.
    pub fn index(&self, msg: &[u64]) -> u128 {
        self.radices
            .iter()
            .zip(msg)
            .fold(0, |acc, (&r, &d)| acc * r as u128 + d as u128)
    }

    pub fn message(&self, mut index: u128) -> Message {
        let mut m = vec![0; self.radices.len()];
        for (d, &r) in m.iter_mut().zip(&self.radices).rev() {
            *d = (index % r as u128) as u64;
            index /= r as u128;
        }
        m
    }
}

/// Per-trial transmit logic of one node.
pub trait NodeEncoder {
    /// `X_{i,k}` for 0-based `slot`, given the permitted received prefix
    /// `Y_i^{k - b_i}`. Must depend only on its arguments and the node's own
    /// messages.
    fn encode(&mut self, slot: usize, received: &[usize]) -> usize;
}

/// Deterministic encoders and decoders of a code.
pub trait CodeLogic: Send + Sync {
    /// Encoder of 0-based `node`, given its outgoing messages `W_{i,1..N}`.
    fn encoder<'a>(&'a self, node: usize, own: &'a [Message]) -> Box<dyn NodeEncoder + 'a>;

    /// Estimate of `W_{from,at}` at node `at` from `W_{at,1..N}` and `Y_at^n`.
    fn decode(&self, from: usize, at: usize, own: &[Message], received: &[usize]) -> Message;
}

#[derive(Clone)]
pub struct Code {
    pub blocklength: usize,
    /// `messages[i][j]` is the alphabet of `W_{i+1,j+1}`.
    pub messages: Vec<Vec<MessageSet>>,
    pub profile: DelayProfile,
    pub logic: Arc<dyn CodeLogic>,
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Code")
            .field("blocklength", &self.blocklength)
            .field("messages", &self.messages)
            .field("profile", &self.profile)
            .finish_non_exhaustive()
    }
}

impl Code {
    fn check(&self, spec: &NetworkSpec) -> Result<()> {
        let n = spec.n_nodes();
        if self.blocklength == 0 {
            return Err(Error::DimensionMismatch("blocklength must be >= 1".into()));
        }
        if self.profile.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "delay profile has {} entries for {n} nodes",
                self.profile.len()
            )));
        }
        if !is_feasible(spec, &self.profile) {
            return Err(Error::InfeasibleProfile(self.profile.to_string()));
        }
        if self.messages.len() != n || self.messages.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "message sizes must be {n} x {n}"
            )));
        }
        for (i, row) in self.messages.iter().enumerate() {
            if !row[i].is_trivial() {
                return Err(Error::DimensionMismatch(format!(
                    "W{},{} must be the single message",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Pairs `(i, j)`, 0-based, with more than one message.
    pub fn active_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.messages.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !self.messages[i][j].is_trivial())
            .collect()
    }
}

/// Realization of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimTrace {
    /// `x[k][i]` is `X_{i+1,k+1}`.
    pub x: Vec<Vec<usize>>,
    pub y: Vec<Vec<usize>>,
    pub messages: Vec<Vec<Message>>,
    /// `(from, at, estimate)` for each active pair, 0-based.
    pub estimates: Vec<(usize, usize, Message)>,
}

impl SimTrace {
    /// Active pairs whose estimate differs from the sent message.
    pub fn errors(&self) -> Vec<(usize, usize)> {
        self.estimates
            .iter()
            .filter(|(i, j, est)| *est != self.messages[*i][*j])
            .map(|(i, j, _)| (*i, *j))
            .collect()
    }

    /// CSV `slot,node,X,Y` with 1-based slots and nodes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("slot,node,X,Y\n");
        for (k, (xs, ys)) in self.x.iter().zip(&self.y).enumerate() {
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                s.push_str(&format!("{},{},{x},{y}\n", k + 1, i + 1));
            }
        }
        s
    }
}

fn sample(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (c, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return c;
        }
    }
    // Rounding left `u` above the total: take the last positive entry.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn check_symbol(spec: &NetworkSpec, node: usize, x: usize) -> Result<()> {
    if x >= spec.input_alphabets()[node] {
        return Err(Error::DimensionMismatch(format!(
            "encoder of node {} produced symbol {x} outside its alphabet",
            node + 1
        )));
    }
    Ok(())
}

/// Runs trial number `trial` of `code`. Messages and channel draws come from
/// streams keyed by `(seed, trial)`, so trials can run in any order.
pub fn run_trial(spec: &NetworkSpec, code: &Code, seed: u64, trial: u64) -> Result<SimTrace> {
    code.check(spec)?;
    let n_nodes = spec.n_nodes();
    let n = code.blocklength;
    let mut mr = rng::stream(seed, rng::MESSAGE, &[trial]);
    let messages: Vec<Vec<Message>> = code
        .messages
        .iter()
        .map(|row| row.iter().map(|m| m.draw(&mut mr)).collect())
        .collect();
    let mut encoders: Vec<Box<dyn NodeEncoder + '_>> = (0..n_nodes)
        .map(|i| code.logic.encoder(i, &messages[i]))
        .collect();
    let mut received: Vec<Vec<usize>> = vec![Vec::with_capacity(n); n_nodes];
    let mut x = vec![vec![0; n_nodes]; n];
    let mut y = vec![vec![0; n_nodes]; n];
    for k in 0..n {
        for h in 0..spec.alpha() {
            for i in spec.input_partition().block(h).iter() {
                let len = k + 1 - code.profile.delay(i) as usize;
                let sym = encoders[i].encode(k, &received[i][..len]);
                check_symbol(spec, i, sym)?;
                x[k][i] = sym;
            }
            let row = spec.channel_row(h, &x[k], &y[k]);
            let u: f64 = rng::stream(seed, rng::CHANNEL, &[trial, k as u64, h as u64]).random();
            let col = sample(&spec.channel(h).rows[row], u);
            spec.write_outputs(h, col, &mut y[k]);
            for i in spec.channel_outputs(h).iter() {
                received[i].push(y[k][i]);
            }
        }
    }
    drop(encoders);
    let estimates = code
        .active_pairs()
        .into_iter()
        .map(|(i, j)| (i, j, code.logic.decode(i, j, &messages[j], &received[j])))
        .collect();
    Ok(SimTrace {
        x,
        y,
        messages,
        estimates,
    })
}

/// Error statistics of one message pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairError {
    /// 1-based sender.
    pub from: usize,
    /// 1-based receiver.
    pub to: usize,
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    /// Half-width of the 95% Wilson interval.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub pairs: Vec<PairError>,
}

impl ErrorReport {
    pub fn pair(&self, from: usize, to: usize) -> Option<&PairError> {
        self.pairs.iter().find(|p| p.from == from && p.to == to)
    }
}

/// Half-width of the 95% Wilson score interval.
pub fn wilson_half_width(errors: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n)
}

/// Monte Carlo error rates over `trials` independent blocks.
pub fn estimate_error(spec: &NetworkSpec, code: &Code, trials: u64, seed: u64) -> Result<ErrorReport> {
    if trials == 0 {
        return Err(Error::OutOfRange {
            what: "trials",
            value: 0.0,
            expected: ">= 1",
        });
    }
    code.check(spec)?;
    let pairs = code.active_pairs();
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trace = run_trial(spec, code, seed, t)?;
            let errs = trace.errors();
            Ok::<_, Error>(
                pairs
                    .iter()
                    .map(|p| u64::from(errs.contains(p)))
                    .collect::<Vec<u64>>(),
            )
        })
        .try_reduce(
            || vec![0; pairs.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(ErrorReport {
        pairs: pairs
            .iter()
            .zip(counts)
            .map(|(&(i, j), errors)| PairError {
                from: i + 1,
                to: j + 1,
                trials,
                errors,
                estimate: errors as f64 / trials as f64,
                half_width: wilson_half_width(errors, trials),
            })
            .collect(),
    })
}

/// Table-driven code description.
///
/// The encoder table of node `i` at slot `k` is indexed by
/// `own * |Y_i|^(k - b_i) + prefix`, where `own` is the mixed-radix index of
/// `(W_{i,1}, ..., W_{i,N})` and `prefix` that of the permitted received
/// symbols, most significant first. Decoder tables are indexed by
/// `own * |Y_to|^n + received` and hold the message index of `W_{from,to}`.
/// Missing encoders send 0; missing decoders guess message 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCode {
    pub blocklength: usize,
    pub delay_profile: Vec<u8>,
    pub message_sizes: Vec<Vec<u64>>,
    pub encoders: Vec<EncoderTable>,
    #[serde(default)]
    pub decoders: Vec<DecoderTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderTable {
    /// 1-based node.
    pub node: usize,
    pub slots: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderTable {
    pub from: usize,
    pub to: usize,
    pub table: Vec<u64>,
}

/// Checked table lookups for one spec.
struct TableLogic {
    sizes: Vec<Vec<u64>>,
    out_alphabets: Vec<usize>,
    /// `encoders[i][k]`, empty when the node always sends 0.
    encoders: Vec<Vec<Vec<usize>>>,
    decoders: Vec<Vec<Option<Vec<u64>>>>,
}

impl TableLogic {
    fn own_index(&self, node: usize, own: &[Message]) -> usize {
        self.sizes[node]
            .iter()
            .zip(own)
            .fold(0, |acc, (&m, msg)| {
                acc * m as usize + msg.first().copied().unwrap_or(0) as usize
            })
    }

    fn seq_index(&self, node: usize, seq: &[usize]) -> usize {
        seq.iter()
            .fold(0, |acc, &y| acc * self.out_alphabets[node] + y)
    }
}

struct TableEncoder<'a> {
    logic: &'a TableLogic,
    node: usize,
    own: usize,
}

impl NodeEncoder for TableEncoder<'_> {
    fn encode(&mut self, slot: usize, received: &[usize]) -> usize {
        let Some(table) = self.logic.encoders[self.node].get(slot) else {
            return 0;
        };
        let width = self.logic.out_alphabets[self.node].pow(received.len() as u32);
        table[self.own * width + self.logic.seq_index(self.node, received)]
    }
}

impl CodeLogic for TableLogic {
    fn encoder<'a>(&'a self, node: usize, own: &'a [Message]) -> Box<dyn NodeEncoder + 'a> {
        Box::new(TableEncoder {
            logic: self,
            node,
            own: self.own_index(node, own),
        })
    }

    fn decode(&self, from: usize, at: usize, own: &[Message], received: &[usize]) -> Message {
        let idx = match &self.decoders[from][at] {
            Some(table) => {
                let width = self.out_alphabets[at].pow(received.len() as u32);
                table[self.own_index(at, own) * width + self.seq_index(at, received)]
            }
            None => 0,
        };
        MessageSet::of_size(self.sizes[from][at]).message(idx as u128)
    }
}

/// Largest encoder or decoder table accepted.
pub const MAX_TABLE_ENTRIES: u128 = 1 << 24;

fn table_len(own: u128, card: usize, len: usize) -> Result<usize> {
    let size = (card as u128)
        .checked_pow(len as u32)
        .and_then(|w| w.checked_mul(own))
        .unwrap_or(u128::MAX);
    if size > MAX_TABLE_ENTRIES {
        return Err(Error::StateSpaceTooLarge {
            size,
            cap: MAX_TABLE_ENTRIES,
        });
    }
    Ok(size as usize)
}

impl TableCode {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("code serializes");
        s.push('\n');
        s
    }

    /// Checks every table against `spec` and builds the runnable code.
    pub fn to_code(&self, spec: &NetworkSpec) -> Result<Code> {
        let n = spec.n_nodes();
        let bad = |m: String| Error::InvalidCode(m);
        if self.message_sizes.len() != n || self.message_sizes.iter().any(|r| r.len() != n) {
            return Err(bad(format!("message_sizes must be {n} x {n}")));
        }
        if self.message_sizes.iter().flatten().any(|&m| m == 0) {
            return Err(bad("message sizes must be >= 1".into()));
        }
        let profile = DelayProfile::new(self.delay_profile.clone())?;
        if profile.len() != n {
            return Err(bad(format!("delay_profile needs {n} entries")));
        }
        if !is_feasible(spec, &profile) {
            return Err(Error::InfeasibleProfile(profile.to_string()));
        }
        let own_size = |i: usize| -> u128 {
            self.message_sizes[i]
                .iter()
                .fold(1u128, |a, &m| a.saturating_mul(m as u128))
        };
        let mut encoders = vec![Vec::new(); n];
        for e in &self.encoders {
            if e.node == 0 || e.node > n {
                return Err(Error::InvalidNode {
                    node: e.node,
                    n_nodes: n,
                });
            }
            let i = e.node - 1;
            if !encoders[i].is_empty() {
                return Err(bad(format!("node {} has two encoders", e.node)));
            }
            if e.slots.len() != self.blocklength {
                return Err(bad(format!(
                    "encoder of node {} has {} slots, blocklength is {}",
                    e.node,
                    e.slots.len(),
                    self.blocklength
                )));
            }
            for (k, table) in e.slots.iter().enumerate() {
                let len = k + 1 - profile.delay(i) as usize;
                let want = table_len(own_size(i), spec.output_alphabets()[i], len)?;
                if table.len() != want {
                    return Err(bad(format!(
                        "encoder of node {} slot {} has {} entries, expected {want}",
                        e.node,
                        k + 1,
                        table.len()
                    )));
                }
                if let Some(s) = table.iter().find(|&&s| s >= spec.input_alphabets()[i]) {
                    return Err(bad(format!(
                        "encoder of node {} slot {} emits {s}, alphabet size {}",
                        e.node,
                        k + 1,
                        spec.input_alphabets()[i]
                    )));
                }
            }
            encoders[i] = e.slots.clone();
        }
        let mut decoders = vec![vec![None; n]; n];
        for d in &self.decoders {
            for node in [d.from, d.to] {
                if node == 0 || node > n {
                    return Err(Error::InvalidNode { node, n_nodes: n });
                }
            }
            let (i, j) = (d.from - 1, d.to - 1);
            if i == j {
                return Err(bad("decoder from a node to itself".into()));
            }
            let want = table_len(own_size(j), spec.output_alphabets()[j], self.blocklength)?;
            if d.table.len() != want {
                return Err(bad(format!(
                    "decoder {}->{} has {} entries, expected {want}",
                    d.from,
                    d.to,
                    d.table.len()
                )));
            }
            if d.table.iter().any(|&m| m >= self.message_sizes[i][j]) {
                return Err(bad(format!("decoder {}->{} emits an invalid message", d.from, d.to)));
            }
            decoders[i][j] = Some(d.table.clone());
        }
        let logic = TableLogic {
            sizes: self.message_sizes.clone(),
            out_alphabets: spec.output_alphabets().to_vec(),
            encoders,
            decoders,
        };
        let code = Code {
            blocklength: self.blocklength,
            messages: self
                .message_sizes
                .iter()
                .map(|r| r.iter().map(|&m| MessageSet::of_size(m)).collect())
                .collect(),
            profile,
            logic: Arc::new(logic),
        };
        code.check(spec)?;
        Ok(code)
    }

    /// Uniformly random encoder and decoder tables.
    pub fn random(
        spec: &NetworkSpec,
        blocklength: usize,
        profile: &DelayProfile,
        message_sizes: Vec<Vec<u64>>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let n = spec.n_nodes();
        let own = |i: usize| message_sizes[i].iter().product::<u64>() as u128;
        let mut encoders = Vec::new();
        for i in 0..n {
            let mut slots = Vec::new();
            for k in 0..blocklength {
                let len = k + 1 - profile.delay(i) as usize;
                let size = table_len(own(i), spec.output_alphabets()[i], len)?;
                slots.push(
                    (0..size)
                        .map(|_| rng.random_range(0..spec.input_alphabets()[i]))
                        .collect(),
                );
            }
            encoders.push(EncoderTable { node: i + 1, slots });
        }
        let mut decoders = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let m = message_sizes[i][j];
                if i == j || m <= 1 {
                    continue;
                }
                let size = table_len(own(j), spec.output_alphabets()[j], blocklength)?;
                decoders.push(DecoderTable {
                    from: i + 1,
                    to: j + 1,
                    table: (0..size).map(|_| rng.random_range(0..m)).collect(),
                });
            }
        }
        Ok(TableCode {
            blocklength,
            delay_profile: profile.delays().to_vec(),
            message_sizes,
            encoders,
            decoders,
        })
    }
}

/// Default cap on the number of entries of an induced joint.
pub const DEFAULT_JOINT_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, Copy)]
pub struct JointOptions {
    pub cap: u128,
    /// Enumerate message tuples in parallel. Each tuple fills its own block
    /// of the table, so the result is identical either way.
    pub parallel: bool,
}

impl Default for JointOptions {
    fn default() -> Self {
        JointOptions {
            cap: DEFAULT_JOINT_CAP,
            parallel: false,
        }
    }
}

pub fn w_name(i: usize, j: usize) -> String {
    format!("W{},{}", i + 1, j + 1)
}

pub fn slot_x_name(i: usize, k: usize) -> String {
    format!("X{}[{}]", i + 1, k + 1)
}

pub fn slot_y_name(i: usize, k: usize) -> String {
    format!("Y{}[{}]", i + 1, k + 1)
}

/// Variables of an induced joint: `W_{i,j}` for `i != j`, then for each slot
/// `X1[k]..XN[k], Y1[k]..YN[k]`.
pub fn induced_variables(spec: &NetworkSpec, code: &Code) -> Result<Vec<Variable>> {
    let n = spec.n_nodes();
    let mut vars = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let size = code.messages[i][j]
                    .size()
                    .filter(|&s| s <= DEFAULT_JOINT_CAP)
                    .ok_or(Error::StateSpaceTooLarge {
                        size: u128::MAX,
                        cap: DEFAULT_JOINT_CAP,
                    })?;
                vars.push(Variable::new(w_name(i, j), size as usize));
            }
        }
    }
    for k in 0..code.blocklength {
        for i in 0..n {
            vars.push(Variable::new(slot_x_name(i, k), spec.input_alphabets()[i]));
        }
        for i in 0..n {
            vars.push(Variable::new(slot_y_name(i, k), spec.output_alphabets()[i]));
        }
    }
    Ok(vars)
}

struct Enumerator<'a> {
    spec: &'a NetworkSpec,
    code: &'a Code,
    /// Stride of `X_i[k]` and `Y_i[k]` in the flat index.
    x_stride: Vec<Vec<usize>>,
    y_stride: Vec<Vec<usize>>,
}

struct PathState {
    x: Vec<Vec<usize>>,
    y: Vec<Vec<usize>>,
    received: Vec<Vec<usize>>,
}

impl Enumerator<'_> {
    fn walk(
        &self,
        encoders: &mut [Box<dyn NodeEncoder + '_>],
        state: &mut PathState,
        step: usize,
        offset: usize,
        prob: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let alpha = self.spec.alpha();
        if step == self.code.blocklength * alpha {
            out[offset] += prob;
            return Ok(());
        }
        let (k, h) = (step / alpha, step % alpha);
        let mut offset = offset;
        for i in self.spec.input_partition().block(h).iter() {
            let len = k + 1 - self.code.profile.delay(i) as usize;
            let sym = encoders[i].encode(k, &state.received[i][..len]);
            check_symbol(self.spec, i, sym)?;
            state.x[k][i] = sym;
            offset += sym * self.x_stride[k][i];
        }
        let row = self.spec.channel_row(h, &state.x[k], &state.y[k]);
        let outputs: Vec<usize> = self.spec.channel_outputs(h).iter().collect();
        for (col, &q) in self.spec.channel(h).rows[row].iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            self.spec.write_outputs(h, col, &mut state.y[k]);
            let mut off = offset;
            for &i in &outputs {
                off += state.y[k][i] * self.y_stride[k][i];
                state.received[i].push(state.y[k][i]);
            }
            self.walk(encoders, state, step + 1, off, prob * q, out)?;
            for &i in &outputs {
                state.received[i].pop();
            }
        }
        for &i in &outputs {
            state.y[k][i] = 0;
        }
        Ok(())
    }
}

/// Exact joint of messages, inputs and outputs induced by `code`.
pub fn induced_joint(spec: &NetworkSpec, code: &Code, options: JointOptions) -> Result<JointPmf> {
    code.check(spec)?;
    let n = spec.n_nodes();
    let vars = induced_variables(spec, code)?;
    let size = vars
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.card as u128))
        .unwrap_or(u128::MAX);
    if size > options.cap {
        return Err(Error::StateSpaceTooLarge {
            size,
            cap: options.cap,
        });
    }
    let size = size as usize;
    let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
    let strides = crate::probability::strides(&cards);
    let n_w = n * (n - 1);
    let w_block: usize = cards[n_w..].iter().product();
    let n_msgs: usize = cards[..n_w].iter().product();
    let mut x_stride = vec![vec![0; n]; code.blocklength];
    let mut y_stride = vec![vec![0; n]; code.blocklength];
    for k in 0..code.blocklength {
        for i in 0..n {
            x_stride[k][i] = strides[n_w + k * 2 * n + i];
            y_stride[k][i] = strides[n_w + k * 2 * n + n + i];
        }
    }
    let en = Enumerator {
        spec,
        code,
        x_stride,
        y_stride,
    };
    let weight = 1.0 / n_msgs as f64;
    let fill = |m: usize, block: &mut [f64]| -> Result<()> {
        // Digits of the message tuple, in variable order.
        let mut rest = m;
        let mut digits = vec![0u64; n_w];
        for v in (0..n_w).rev() {
            digits[v] = (rest % cards[v]) as u64;
            rest /= cards[v];
        }
        let mut it = digits.into_iter();
        let messages: Vec<Vec<Message>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Vec::new()
                        } else {
                            let d = it.next().expect("one digit per pair");
                            code.messages[i][j].message(d as u128)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut encoders: Vec<Box<dyn NodeEncoder + '_>> = (0..n)
            .map(|i| code.logic.encoder(i, &messages[i]))
            .collect();
        let mut state = PathState {
            x: vec![vec![0; n]; code.blocklength],
            y: vec![vec![0; n]; code.blocklength],
            received: vec![Vec::new(); n],
        };
        en.walk(&mut encoders, &mut state, 0, 0, weight, block)
    };
    let mut probs = vec![0.0; size];
    if options.parallel {
        probs
            .par_chunks_mut(w_block)
            .enumerate()
            .try_for_each(|(m, block)| fill(m, block))?;
    } else {
        for (m, block) in probs.chunks_mut(w_block).enumerate() {
            fill(m, block)?;
        }
    }
    JointPmf::new(vars, probs)
}

/// One Markov-chain check value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovValue {
    /// 1-based slot.
    pub slot: usize,
    /// 1-based channel.
    pub channel: usize,
    pub mi: f64,
}

/// Everything generated before slot `k` (0-based): messages and all earlier
/// inputs and outputs.
fn past(spec: &NetworkSpec, code: &Code, k: usize) -> Vec<String> {
    let n = spec.n_nodes();
    let mut names = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                names.push(w_name(i, j));
            }
        }
    }
    for l in 0..k.min(code.blocklength) {
        names.extend((0..n).map(|i| slot_x_name(i, l)));
        names.extend((0..n).map(|i| slot_y_name(i, l)));
    }
    names
}

fn slot_names(set: NodeSet, k: usize, f: fn(usize, usize) -> String) -> Vec<String> {
    set.iter().map(|i| f(i, k)).collect()
}

fn cmi(joint: &JointPmf, a: &[String], b: &[String], c: &[String]) -> Result<f64> {
    fn s(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }
    Ok(CmiPlan::new(joint.vars(), &s(a), &s(b), &s(c))?.evaluate(joint.probs()))
}

/// `I(U^{k-1}; Y_{G_h}[k] | X_{S^h}[k], Y_{G^{h-1}}[k])` for every slot and
/// channel, where `U^{k-1}` is everything generated before slot `k`.
pub fn check_memoryless_markov(
    spec: &NetworkSpec,
    code: &Code,
    options: JointOptions,
) -> Result<Vec<MarkovValue>> {
    let joint = induced_joint(spec, code, options)?;
    let mut out = Vec::new();
    for k in 0..code.blocklength {
        let a = past(spec, code, k);
        for h in 0..spec.alpha() {
            let (s, g) = spec.channel_inputs(h);
            let b = slot_names(spec.channel_outputs(h), k, slot_y_name);
            let mut c = slot_names(s, k, slot_x_name);
            c.extend(slot_names(g, k, slot_y_name));
            out.push(MarkovValue {
                slot: k + 1,
                channel: h + 1,
                mi: cmi(&joint, &a, &b, &c)?,
            });
        }
    }
    Ok(out)
}

/// `I(U^{k-1}, X_{S_h}[k]; Y_{G^{h-1}}[k] | X_{S^{h-1}}[k])` for every slot
/// and channel. Only defined for the all-one profile.
pub fn check_positive_delay_markov(
    spec: &NetworkSpec,
    code: &Code,
    options: JointOptions,
) -> Result<Vec<MarkovValue>> {
    if !code.profile.is_positive() {
        return Err(Error::NotPositiveDelay(code.profile.to_string()));
    }
    let joint = induced_joint(spec, code, options)?;
    let mut out = Vec::new();
    for k in 0..code.blocklength {
        for h in 0..spec.alpha() {
            let mut a = past(spec, code, k);
            a.extend(slot_names(spec.input_partition().block(h), k, slot_x_name));
            let b = slot_names(spec.output_partition().prefix(h), k, slot_y_name);
            let c = slot_names(spec.input_partition().prefix(h), k, slot_x_name);
            out.push(MarkovValue {
                slot: k + 1,
                channel: h + 1,
                mi: cmi(&joint, &a, &b, &c)?,
            });
        }
    }
    Ok(out)
}

/// The single-channel network `(X_I, Y_I, 1, I, I, q^(1)...q^(alpha))`.
pub fn composed_network(spec: &NetworkSpec) -> Result<NetworkSpec> {
    let table = compose_channels(spec)?;
    let all = NodeSet::full(spec.n_nodes());
    NetworkSpec::new(
        spec.input_alphabets().to_vec(),
        spec.output_alphabets().to_vec(),
        Partition::new(vec![all]),
        Partition::new(vec![all]),
        vec![table.rows],
    )
    .validated()
}

/// L1 distance between the induced joints of `code` on `spec` and on its
/// composed single-channel network. Only defined for the all-one profile.
pub fn equivalence_check(spec: &NetworkSpec, code: &Code, options: JointOptions) -> Result<f64> {
    if !code.profile.is_positive() {
        return Err(Error::NotPositiveDelay(code.profile.to_string()));
    }
    let stepwise = induced_joint(spec, code, options)?;
    let composed = induced_joint(&composed_network(spec)?, code, options)?;
    stepwise.l1_distance(&composed)
}

/// Forward code used by the feedback scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ForwardCode {
    /// Irregular repeat-accumulate LDPC with belief propagation.
    #[default]
    Ldpc,
    /// Random codebook with minimum-distance decoding (small dimensions).
    Codebook,
    /// Information bits sent as they are.
    Uncoded,
}

impl std::str::FromStr for ForwardCode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ldpc" => Ok(ForwardCode::Ldpc),
            "codebook" => Ok(ForwardCode::Codebook),
            "uncoded" => Ok(ForwardCode::Uncoded),
            other => Err(format!("unknown forward code `{other}`")),
        }
    }
}

/// Seed of the bundled forward code construction. Trial seeds only drive
/// messages and channel noise, so every run uses the same code.
pub const FORWARD_CODE_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Serialize)]
pub struct BscfbConfig {
    pub eps: f64,
    pub n: usize,
    pub forward_rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub forward_code: ForwardCode,
}

#[derive(Debug, Clone, Serialize)]
pub struct BscfbReport {
    pub eps: f64,
    pub n: usize,
    pub forward_capacity: f64,
    /// Information bits per block on the forward link.
    pub forward_bits: usize,
    /// `(R_{1,2}, R_{2,1})` actually carried.
    pub achieved: (f64, f64),
    pub errors: ErrorReport,
}

struct BscfbLogic {
    code: Box<dyn BinaryBlockCode>,
    eps: f64,
}

enum BscfbEncoder {
    /// Node 1 sends its codeword.
    Forward(Vec<u8>),
    /// Node 2 masks its bit with the current reception.
    Relay(Vec<u64>),
}

impl NodeEncoder for BscfbEncoder {
    fn encode(&mut self, slot: usize, received: &[usize]) -> usize {
        match self {
            BscfbEncoder::Forward(word) => word[slot] as usize,
            BscfbEncoder::Relay(bits) => bits[slot] as usize ^ received[slot],
        }
    }
}

impl CodeLogic for BscfbLogic {
    fn encoder<'a>(&'a self, node: usize, own: &'a [Message]) -> Box<dyn NodeEncoder + 'a> {
        if node == 0 {
            let info: Vec<u8> = own[1].iter().map(|&b| b as u8).collect();
            Box::new(BscfbEncoder::Forward(self.code.encode(&info)))
        } else {
            Box::new(BscfbEncoder::Relay(own[0].clone()))
        }
    }

    fn decode(&self, from: usize, _at: usize, _own: &[Message], received: &[usize]) -> Message {
        if from == 0 {
            let r: Vec<u8> = received.iter().map(|&y| y as u8).collect();
            self.code.decode(&r, self.eps).into_iter().map(u64::from).collect()
        } else {
            received.iter().map(|&y| y as u64).collect()
        }
    }
}

/// The zero-delay code for the BSC with correlated feedback: node 1 sends a
/// forward codeword, node 2 sends `X2 = X' xor Y2` in the same slot, so node
/// 1 reads `X'` off `Y1` without error.
pub fn bscfb_code(eps: f64, n: usize, forward_rate: f64, kind: ForwardCode) -> Result<Code> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::OutOfRange {
            what: "eps",
            value: eps,
            expected: "[0, 0.5)",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "blocklength",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let capacity = 1.0 - binary_entropy(eps)?;
    if forward_rate.is_nan() || forward_rate <= 0.0 {
        return Err(Error::OutOfRange {
            what: "forward rate",
            value: forward_rate,
            expected: "> 0",
        });
    }
    if forward_rate >= capacity {
        return Err(Error::RateAboveCapacity {
            rate: forward_rate,
            capacity,
        });
    }
    let k = ((forward_rate * n as f64) + 1e-9).floor() as usize;
    if k == 0 {
        return Err(Error::InvalidCode(format!(
            "rate {forward_rate} carries no bits at blocklength {n}"
        )));
    }
    let code: Box<dyn BinaryBlockCode> = match kind {
        ForwardCode::Ldpc => Box::new(IraLdpc::new(n, k, FORWARD_CODE_SEED)?),
        ForwardCode::Codebook => Box::new(RandomCodebook::new(n, k, FORWARD_CODE_SEED)?),
        ForwardCode::Uncoded => Box::new(Uncoded::new(n, k)?),
    };
    Ok(Code {
        blocklength: n,
        messages: vec![
            vec![MessageSet::trivial(), MessageSet::bits(k)],
            vec![MessageSet::bits(n), MessageSet::trivial()],
        ],
        profile: DelayProfile::new(vec![1, 0])?,
        logic: Arc::new(BscfbLogic { code, eps }),
    })
}

/// Runs the feedback scheme and reports both links.
pub fn bscfb_scheme(config: &BscfbConfig) -> Result<BscfbReport> {
    let spec = crate::networks::bscfb(config.eps)?;
    let code = bscfb_code(config.eps, config.n, config.forward_rate, config.forward_code)?;
    let errors = estimate_error(&spec, &code, config.trials, config.seed)?;
    let forward_bits = code.messages[0][1].radices.len();
    Ok(BscfbReport {
        eps: config.eps,
        n: config.n,
        forward_capacity: 1.0 - binary_entropy(config.eps)?,
        forward_bits,
        achieved: (forward_bits as f64 / config.n as f64, 1.0),
        errors,
    })
}
