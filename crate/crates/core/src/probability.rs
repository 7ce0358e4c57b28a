//! Exact finite probability tables.
//!
//! [`JointPmf`] stores a dense table over a named list of discrete variables,
//! flattened mixed-radix with the first variable most significant (the same
//! convention as [`ChannelTable`] rows and columns). Information measures are
//! in bits with `0 log 0 = 0`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_spec, ChannelTable, NetworkSpec, STOCHASTIC_TOL};

/// Values in `(-MI_CLAMP, 0)` are rounding noise and reported as 0.
pub const MI_CLAMP: f64 = 1e-12;

pub fn x_name(i: usize) -> String {
    format!("X{}", i + 1)
}

pub fn y_name(i: usize) -> String {
    format!("Y{}", i + 1)
}

/// A named discrete variable taking values `0..card`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(rename = "size")]
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Variable {
            name: name.into(),
            card,
        }
    }
}

/// Strides for a mixed-radix layout, most significant first.
pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Walks every index of a mixed-radix layout, tracking the digits and any
/// number of derived linear indices.
struct Odometer<'a> {
    cards: &'a [usize],
    digits: Vec<usize>,
}

impl<'a> Odometer<'a> {
    fn new(cards: &'a [usize]) -> Self {
        Odometer {
            cards,
            digits: vec![0; cards.len()],
        }
    }

    /// Advances to the next index, updating each tracked index with its
    /// per-digit weights. Returns false after the last index.
    fn step(&mut self, tracked: &mut [usize], weights: &[&[usize]]) -> bool {
        for v in (0..self.cards.len()).rev() {
            self.digits[v] += 1;
            if self.digits[v] < self.cards[v] {
                for (t, w) in tracked.iter_mut().zip(weights) {
                    *t += w[v];
                }
                return true;
            }
            self.digits[v] = 0;
            for (t, w) in tracked.iter_mut().zip(weights) {
                *t -= w[v] * (self.cards[v] - 1);
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    vars: Vec<Variable>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// Validates dimensions, non-negativity and normalization.
    pub fn new(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        let pmf = JointPmf::from_parts(vars, probs)?;
        if let Some(p) = pmf.probs.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::NotStochastic(format!("negative entry {p}")));
        }
        let total: f64 = pmf.probs.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic(format!("entries sum to {total}")));
        }
        Ok(pmf)
    }

    /// Checks the shape only.
    pub(crate) fn from_parts(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &vars {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let size: usize = vars.iter().map(|v| v.card).product();
        if size != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} variables need {size} entries, got {}",
                vars.len(),
                probs.len()
            )));
        }
        Ok(JointPmf { vars, probs })
    }

    pub fn uniform(vars: Vec<Variable>) -> Result<Self> {
        let size: usize = vars.iter().map(|v| v.card).product();
        JointPmf::new(vars, vec![1.0 / size as f64; size])
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.card).collect()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Flat index of a full assignment given in variable order.
    pub fn index_of(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(strides(&self.cards()))
            .map(|(v, s)| v * s)
            .sum()
    }

    pub fn prob(&self, values: &[usize]) -> f64 {
        self.probs[self.index_of(values)]
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(Error::DuplicateVariable(n.to_string()));
                }
                self.position(n)
            })
            .collect()
    }

    /// Weight of each source digit in the flat index of a sub-layout made of
    /// `positions` (in that order); zero for dropped variables.
    fn sub_weights(&self, positions: &[usize]) -> Vec<usize> {
        let sub_cards: Vec<usize> = positions.iter().map(|&p| self.vars[p].card).collect();
        let sub_strides = strides(&sub_cards);
        let mut w = vec![0; self.vars.len()];
        for (k, &p) in positions.iter().enumerate() {
            w[p] = sub_strides[k];
        }
        w
    }

    /// Sums out every variable not in `keep`. The result lists the kept
    /// variables in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let pos = self.positions(keep)?;
        let vars: Vec<Variable> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let out = self.marginal_table(&pos);
        JointPmf::from_parts(vars, out)
    }

    fn marginal_table(&self, positions: &[usize]) -> Vec<f64> {
        let size: usize = positions.iter().map(|&p| self.vars[p].card).product();
        let mut out = vec![0.0; size];
        let cards = self.cards();
        let w = self.sub_weights(positions);
        let mut odo = Odometer::new(&cards);
        let mut idx = [0usize];
        let mut flat = 0;
        loop {
            out[idx[0]] += self.probs[flat];
            flat += 1;
            if !odo.step(&mut idx, &[&w]) {
                break;
            }
        }
        out
    }

    /// Conditional pmf of the remaining variables given an assignment.
    pub fn condition(&self, given: &[(&str, usize)]) -> Result<JointPmf> {
        let names: Vec<&str> = given.iter().map(|g| g.0).collect();
        let pos = self.positions(&names)?;
        for (&p, &(name, value)) in pos.iter().zip(given) {
            if value >= self.vars[p].card {
                return Err(Error::OutOfRange {
                    what: "conditioning value",
                    value: value as f64,
                    expected: "below the variable's alphabet size",
                });
            }
            let _ = name;
        }
        let rest: Vec<usize> = (0..self.vars.len()).filter(|p| !pos.contains(p)).collect();
        let vars: Vec<Variable> = rest.iter().map(|&p| self.vars[p].clone()).collect();
        let size: usize = vars.iter().map(|v| v.card).product();
        let mut out = vec![0.0; size];
        let cards = self.cards();
        let w = self.sub_weights(&rest);
        let mut odo = Odometer::new(&cards);
        let mut idx = [0usize];
        let mut flat = 0;
        loop {
            if pos
                .iter()
                .zip(given)
                .all(|(&p, &(_, value))| odo.digits[p] == value)
            {
                out[idx[0]] += self.probs[flat];
            }
            flat += 1;
            if !odo.step(&mut idx, &[&w]) {
                break;
            }
        }
        let mass: f64 = out.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvent);
        }
        out.iter_mut().for_each(|p| *p /= mass);
        JointPmf::from_parts(vars, out)
    }

    /// Sum of absolute differences; both tables must share a layout.
    pub fn l1_distance(&self, other: &JointPmf) -> Result<f64> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch(
                "joint tables have different variables".into(),
            ));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    pub fn max_abs_diff(&self, other: &JointPmf) -> Result<f64> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch(
                "joint tables have different variables".into(),
            ));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Entropy of the listed variables, in bits.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let pos = self.positions(names)?;
        Ok(self
            .marginal_table(&pos)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum())
    }

    pub fn to_file(&self) -> JointFile {
        JointFile {
            variables: self.vars.clone(),
            probs: self.probs.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("pmf serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: JointFile = serde_json::from_str(text)?;
        JointPmf::new(file.variables, file.probs)
    }
}

/// On-disk form of a [`JointPmf`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JointFile {
    pub variables: Vec<Variable>,
    pub probs: Vec<f64>,
}

/// A compiled `I(A; B | C)` over a fixed variable layout, for evaluating the
/// same measure on many tables.
#[derive(Debug, Clone)]
pub struct CmiPlan {
    cards: Vec<usize>,
    weights: [Vec<usize>; 3],
    sizes: [usize; 3],
    trivial: bool,
}

impl CmiPlan {
    pub fn new(vars: &[Variable], a: &[&str], b: &[&str], c: &[&str]) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in a.iter().chain(b).chain(c) {
            if !seen.insert(*n) {
                return Err(Error::OverlappingGroups(n.to_string()));
            }
        }
        let find = |n: &str| {
            vars.iter()
                .position(|v| v.name == n)
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))
        };
        let groups: Vec<Vec<usize>> = [a, b, c]
            .iter()
            .map(|g| g.iter().map(|n| find(n)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let mut weights: [Vec<usize>; 3] = Default::default();
        let mut sizes = [1; 3];
        for (g, pos) in groups.iter().enumerate() {
            let sub_cards: Vec<usize> = pos.iter().map(|&p| cards[p]).collect();
            let s = strides(&sub_cards);
            let mut w = vec![0; cards.len()];
            for (k, &p) in pos.iter().enumerate() {
                w[p] = s[k];
            }
            weights[g] = w;
            sizes[g] = sub_cards.iter().product();
        }
        Ok(CmiPlan {
            trivial: a.is_empty() || b.is_empty(),
            cards,
            weights,
            sizes,
        })
    }

    /// Evaluates the measure on a table laid out like the plan's variables.
    pub fn evaluate(&self, probs: &[f64]) -> f64 {
        if self.trivial {
            return 0.0;
        }
        let [na, nb, nc] = self.sizes;
        let mut abc = vec![0.0; na * nb * nc];
        let mut odo = Odometer::new(&self.cards);
        let mut idx = [0usize; 3];
        let w: [&[usize]; 3] = [&self.weights[0], &self.weights[1], &self.weights[2]];
        let mut flat = 0;
        loop {
            let p = probs[flat];
            if p > 0.0 {
                abc[(idx[0] * nb + idx[1]) * nc + idx[2]] += p;
            }
            flat += 1;
            if !odo.step(&mut idx, &w) {
                break;
            }
        }
        let mut ac = vec![0.0; na * nc];
        let mut bc = vec![0.0; nb * nc];
        let mut cc = vec![0.0; nc];
        for a in 0..na {
            for b in 0..nb {
                for c in 0..nc {
                    let p = abc[(a * nb + b) * nc + c];
                    ac[a * nc + c] += p;
                    bc[b * nc + c] += p;
                    cc[c] += p;
                }
            }
        }
        let mut total = 0.0;
        for a in 0..na {
            for b in 0..nb {
                for c in 0..nc {
                    let p = abc[(a * nb + b) * nc + c];
                    if p > 0.0 {
                        total += p * ((p * cc[c]) / (ac[a * nc + c] * bc[b * nc + c])).log2();
                    }
                }
            }
        }
        if total < 0.0 && total > -MI_CLAMP {
            0.0
        } else {
            total
        }
    }
}

/// `I(A; B | C)` in bits. Empty `A` or `B` gives 0; empty `C` is
/// unconditional mutual information.
pub fn conditional_mutual_information(
    p: &JointPmf,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    Ok(CmiPlan::new(&p.vars, a, b, c)?.evaluate(&p.probs))
}

/// `H(eps)` in bits.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange {
            what: "eps",
            value: eps,
            expected: "[0, 1]",
        });
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(eps) + term(1.0 - eps))
}

fn require_valid(spec: &NetworkSpec) -> Result<()> {
    let report = validate_spec(spec);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(
            report.violations.into_iter().map(|v| v.message).collect(),
        ))
    }
}

/// Enumerates every `(x_I, y_I)` pair, calling `f(x, y, flat_index)` with the
/// index of the pair in the `X1..XN, Y1..YN` layout.
pub(crate) fn for_each_network_assignment(
    spec: &NetworkSpec,
    mut f: impl FnMut(&[usize], &[usize], usize),
) {
    let n = spec.n_nodes();
    let mut cards = spec.input_alphabets().to_vec();
    cards.extend_from_slice(spec.output_alphabets());
    let size: usize = cards.iter().product();
    let mut digits = vec![0; 2 * n];
    for flat in 0..size {
        f(&digits[..n], &digits[n..], flat);
        for v in (0..2 * n).rev() {
            digits[v] += 1;
            if digits[v] < cards[v] {
                break;
            }
            digits[v] = 0;
        }
    }
}

/// `∏_h q^(h)(y_{G_h} | x_{S^h}, y_{G^{h-1}})` for one full assignment.
pub(crate) fn channel_product(spec: &NetworkSpec, x: &[usize], y: &[usize]) -> f64 {
    let mut prob = 1.0;
    for h in 0..spec.alpha() {
        prob *= spec
            .channel(h)
            .prob(spec.channel_row(h, x, y), spec.channel_col(h, y));
        if prob == 0.0 {
            break;
        }
    }
    prob
}

/// Collapses the alpha channels into one channel from `X_I` to `Y_I`.
pub fn compose_channels(spec: &NetworkSpec) -> Result<ChannelTable> {
    require_valid(spec)?;
    let vars = spec.network_variables();
    let n = spec.n_nodes();
    let input_vars = vars[..n].to_vec();
    let output_vars = vars[n..].to_vec();
    let n_rows: usize = input_vars.iter().map(|v| v.card).product();
    let n_cols: usize = output_vars.iter().map(|v| v.card).product();
    let mut rows = vec![vec![0.0; n_cols]; n_rows];
    for_each_network_assignment(spec, |x, y, flat| {
        rows[flat / n_cols][flat % n_cols] = channel_product(spec, x, y);
    });
    Ok(ChannelTable::new(input_vars, output_vars, rows))
}

/// Shape of the conditional input pmf for 0-based channel `h`:
/// `p(X_{S_h} | X_{S^{h-1}}, Y_{G^{h-1}})`.
pub fn input_policy_vars(spec: &NetworkSpec, h: usize) -> (Vec<Variable>, Vec<Variable>) {
    let xs = spec.input_partition().prefix(h);
    let ys = spec.output_partition().prefix(h);
    let mut inputs: Vec<Variable> = xs
        .iter()
        .map(|i| Variable::new(x_name(i), spec.input_alphabets()[i]))
        .collect();
    inputs.extend(
        ys.iter()
            .map(|i| Variable::new(y_name(i), spec.output_alphabets()[i])),
    );
    let outputs = spec
        .input_partition()
        .block(h)
        .iter()
        .map(|i| Variable::new(x_name(i), spec.input_alphabets()[i]))
        .collect();
    (inputs, outputs)
}

/// Builds an input policy table for channel `h` from a row function.
pub fn input_policy(
    spec: &NetworkSpec,
    h: usize,
    mut row: impl FnMut(usize) -> Vec<f64>,
) -> ChannelTable {
    let (inputs, outputs) = input_policy_vars(spec, h);
    let n_rows: usize = inputs.iter().map(|v| v.card).product();
    let rows = (0..n_rows).map(&mut row).collect();
    ChannelTable::new(inputs, outputs, rows)
}

fn check_policies(spec: &NetworkSpec, inputs: &[ChannelTable]) -> Result<()> {
    if inputs.len() != spec.alpha() {
        return Err(Error::DimensionMismatch(format!(
            "{} input policies for {} channels",
            inputs.len(),
            spec.alpha()
        )));
    }
    for (h, policy) in inputs.iter().enumerate() {
        let (iv, ov) = input_policy_vars(spec, h);
        if policy.input_vars != iv || policy.output_vars != ov {
            return Err(Error::DimensionMismatch(format!(
                "input policy {} has the wrong variables",
                h + 1
            )));
        }
        let problems = policy.problems();
        if !problems.is_empty() {
            let shape = problems.iter().any(|p| p.contains("expected"));
            let msg = format!("input policy {}: {}", h + 1, problems.join("; "));
            return Err(if shape {
                Error::DimensionMismatch(msg)
            } else {
                Error::NotStochastic(msg)
            });
        }
    }
    Ok(())
}

/// `∏_h p(x_{S_h} | x_{S^{h-1}}, y_{G^{h-1}}) q^(h)(y_{G_h} | x_{S^h}, y_{G^{h-1}})`
/// over the `X1..XN, Y1..YN` layout.
pub fn factorized_joint(spec: &NetworkSpec, inputs: &[ChannelTable]) -> Result<JointPmf> {
    require_valid(spec)?;
    check_policies(spec, inputs)?;
    let vars = spec.network_variables();
    let size: usize = vars.iter().map(|v| v.card).product();
    let mut probs = vec![0.0; size];
    for_each_network_assignment(spec, |x, y, flat| {
        let mut p = 1.0;
        for (h, policy) in inputs.iter().enumerate() {
            p *= policy.prob(spec.policy_row(h, x, y), spec.policy_col(h, x))
                * spec
                    .channel(h)
                    .prob(spec.channel_row(h, x, y), spec.channel_col(h, y));
            if p == 0.0 {
                break;
            }
        }
        probs[flat] = p;
    });
    JointPmf::new(vars, probs)
}

/// `p_X(x_I) ∏_h q^(h)(...)`: inputs chosen jointly up front, then passed
/// through the composed channel.
pub fn product_input_joint(spec: &NetworkSpec, p_x: &JointPmf) -> Result<JointPmf> {
    require_valid(spec)?;
    let vars = spec.network_variables();
    let n = spec.n_nodes();
    if p_x.vars() != &vars[..n] {
        return Err(Error::DimensionMismatch(
            "input pmf must range over X1..XN in order".into(),
        ));
    }
    let n_cols: usize = spec.output_alphabets().iter().product();
    let size = p_x.probs().len() * n_cols;
    let mut probs = vec![0.0; size];
    for_each_network_assignment(spec, |x, y, flat| {
        let px = p_x.probs()[flat / n_cols];
        if px > 0.0 {
            probs[flat] = px * channel_product(spec, x, y);
        }
    });
    JointPmf::new(vars, probs)
}

/// Precomputed structure of a factorized network joint, for evaluating it on
/// many parameter settings. Parameters are a list of pmf rows; each support
/// entry of the joint is its channel product times one cell of some rows.
#[derive(Debug, Clone)]
pub struct FactorizedLayout {
    vars: Vec<Variable>,
    row_cols: Vec<usize>,
    /// (flat index, channel product, (row, col) cells).
    support: Vec<(usize, f64, Vec<(usize, usize)>)>,
    size: usize,
}

impl FactorizedLayout {
    /// Rows are the input policies of every channel in order: all rows of
    /// `p(X_{S_1})`, then all rows of `p(X_{S_2} | X_{S^1}, Y_{G^1})`, and so on.
    pub fn capacity(spec: &NetworkSpec) -> Result<Self> {
        require_valid(spec)?;
        let mut offsets = Vec::new();
        let mut row_cols = Vec::new();
        for h in 0..spec.alpha() {
            let (inputs, outputs) = input_policy_vars(spec, h);
            offsets.push(row_cols.len());
            let n_rows: usize = inputs.iter().map(|v| v.card).product();
            let n_cols: usize = outputs.iter().map(|v| v.card).product();
            row_cols.extend(std::iter::repeat_n(n_cols, n_rows));
        }
        Ok(Self::build(spec, row_cols, |x, y| {
            (0..spec.alpha())
                .map(|h| (offsets[h] + spec.policy_row(h, x, y), spec.policy_col(h, x)))
                .collect()
        }))
    }

    /// A single row: the joint pmf of `X_I`.
    pub fn positive_delay(spec: &NetworkSpec) -> Result<Self> {
        require_valid(spec)?;
        let n_x: usize = spec.input_alphabets().iter().product();
        Ok(Self::build(spec, vec![n_x], |x, _| {
            let col = x
                .iter()
                .zip(spec.input_alphabets())
                .fold(0, |idx, (v, c)| idx * c + v);
            vec![(0, col)]
        }))
    }

    fn build(
        spec: &NetworkSpec,
        row_cols: Vec<usize>,
        cells: impl Fn(&[usize], &[usize]) -> Vec<(usize, usize)>,
    ) -> Self {
        let vars = spec.network_variables();
        let size = vars.iter().map(|v| v.card).product();
        let mut support = Vec::new();
        for_each_network_assignment(spec, |x, y, flat| {
            let q = channel_product(spec, x, y);
            if q > 0.0 {
                support.push((flat, q, cells(x, y)));
            }
        });
        FactorizedLayout {
            vars,
            row_cols,
            support,
            size,
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    /// Number of columns in each parameter row.
    pub fn row_cols(&self) -> &[usize] {
        &self.row_cols
    }

    /// Writes the joint for the given parameter rows into `out`.
    pub fn fill(&self, rows: &[&[f64]], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.size, 0.0);
        for (flat, q, cells) in &self.support {
            let mut p = *q;
            for &(r, c) in cells {
                p *= rows[r][c];
            }
            out[*flat] = p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn binvars(names: &[&str]) -> Vec<Variable> {
        names.iter().map(|n| Variable::new(*n, 2)).collect()
    }

    /// Uniform X1 pushed through the BSC-FB forward channel, with X2 uniform
    /// and independent.
    fn bscfb_uniform(eps: f64) -> JointPmf {
        let spec = networks::bscfb(eps).unwrap();
        let px = JointPmf::uniform(binvars(&["X1", "X2"])).unwrap();
        product_input_joint(&spec, &px).unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        close(binary_entropy(0.5).unwrap(), 1.0, 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89 evaluated at high precision.
        close(binary_entropy(0.11).unwrap(), 0.499_915_958_164_528_7, 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn marginalize_uniform_pair() {
        let p = JointPmf::uniform(binvars(&["A", "B"])).unwrap();
        let m = p.marginalize(&["A"]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
        assert_eq!(p.marginalize(&["A", "B"]).unwrap(), p);
        assert!(matches!(
            p.marginalize(&["C"]),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn marginalize_bscfb_forward_pair() {
        let eps = 0.2;
        let m = bscfb_uniform(eps).marginalize(&["X1", "Y2"]).unwrap();
        let want = [(1.0 - eps) / 2.0, eps / 2.0, eps / 2.0, (1.0 - eps) / 2.0];
        for (a, b) in m.probs().iter().zip(want) {
            close(*a, b, 1e-15);
        }
    }

    #[test]
    fn marginalize_reorders() {
        let p = JointPmf::new(binvars(&["A", "B"]), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = p.marginalize(&["B", "A"]).unwrap();
        assert_eq!(q.probs(), &[0.1, 0.3, 0.2, 0.4]);
    }

    #[test]
    fn condition_examples() {
        let p = JointPmf::uniform(binvars(&["A", "B"])).unwrap();
        assert_eq!(p.condition(&[("A", 0)]).unwrap().probs(), &[0.5, 0.5]);

        let eps = 0.11;
        let c = bscfb_uniform(eps)
            .marginalize(&["X1", "Y2"])
            .unwrap()
            .condition(&[("X1", 0)])
            .unwrap();
        close(c.probs()[0], 1.0 - eps, 1e-15);
        close(c.probs()[1], eps, 1e-15);

        let point = JointPmf::new(binvars(&["A", "B"]), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            point.condition(&[("A", 1)]),
            Err(Error::ZeroProbabilityEvent)
        ));
    }

    #[test]
    fn joint_rejects_bad_tables() {
        assert!(JointPmf::new(binvars(&["A"]), vec![0.5, 0.6]).is_err());
        assert!(JointPmf::new(binvars(&["A"]), vec![1.5, -0.5]).is_err());
        assert!(JointPmf::new(binvars(&["A"]), vec![1.0]).is_err());
        assert!(JointPmf::new(binvars(&["A", "A"]), vec![0.25; 4]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let p = JointPmf::uniform(binvars(&["X", "Y"])).unwrap();
        assert_eq!(conditional_mutual_information(&p, &["X"], &["Y"], &[]).unwrap(), 0.0);

        // Four-outcome oracle: sum p log p(x,y)/(p(x)p(y)) for the BSC.
        let eps: f64 = 0.25;
        let oracle = 2.0 * ((1.0 - eps) / 2.0) * ((1.0 - eps) * 2.0).log2()
            + 2.0 * (eps / 2.0) * (eps * 2.0).log2();
        let mi = conditional_mutual_information(&bscfb_uniform(eps), &["X1"], &["Y2"], &[])
            .unwrap();
        close(mi, oracle, 1e-12);
        close(mi, 0.188_721_875_540_867, 1e-12);

        let mi = conditional_mutual_information(
            &bscfb_uniform(0.11),
            &["X2", "Y2"],
            &["Y1"],
            &["X1"],
        )
        .unwrap();
        close(mi, 1.0, 1e-12);
    }

    #[test]
    fn mutual_information_group_errors() {
        let p = JointPmf::uniform(binvars(&["X", "Y"])).unwrap();
        assert!(matches!(
            conditional_mutual_information(&p, &["X"], &["X"], &[]),
            Err(Error::OverlappingGroups(_))
        ));
        assert!(matches!(
            conditional_mutual_information(&p, &["X"], &["Z"], &[]),
            Err(Error::UnknownVariable(_))
        ));
        assert_eq!(conditional_mutual_information(&p, &["X"], &[], &["Y"]).unwrap(), 0.0);
    }

    #[test]
    fn compose_deterministic_pair() {
        let spec = networks::deterministic_feedback();
        let c = compose_channels(&spec).unwrap();
        // Inputs (X1, X2), outputs (Y1, Y2) = (X1 xor X2, X1).
        for x1 in 0..2 {
            for x2 in 0..2 {
                let row = &c.rows[x1 * 2 + x2];
                let y1 = x1 ^ x2;
                let col = y1 * 2 + x1;
                for (k, p) in row.iter().enumerate() {
                    assert_eq!(*p, if k == col { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn compose_bscfb() {
        let eps = 0.11;
        let c = compose_channels(&networks::bscfb(eps).unwrap()).unwrap();
        c.ensure_stochastic().unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y1 in 0..2 {
                    for y2 in 0..2 {
                        let q1 = if y2 == x1 { 1.0 - eps } else { eps };
                        let q2 = if y1 == x2 ^ y2 { 1.0 } else { 0.0 };
                        close(c.rows[x1 * 2 + x2][y1 * 2 + y2], q1 * q2, 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn compose_classical_is_identity() {
        let spec = networks::classical_bsc(0.25).unwrap();
        let c = compose_channels(&spec).unwrap();
        assert_eq!(c.rows, spec.channel(0).rows);
    }

    #[test]
    fn factorized_joint_feedback_policy() {
        let spec = networks::bscfb(0.11).unwrap();
        let p1 = input_policy(&spec, 0, |_| vec![0.5, 0.5]);
        // Row layout (X1, Y2): X2 = Y2.
        let p2 = input_policy(&spec, 1, |r| if r % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] });
        let joint = factorized_joint(&spec, &[p1, p2]).unwrap();
        let y1 = joint.marginalize(&["Y1"]).unwrap();
        close(y1.probs()[0], 1.0, 1e-15);
    }

    #[test]
    fn factorized_joint_rejects_bad_policies() {
        let spec = networks::bscfb(0.11).unwrap();
        let p1 = input_policy(&spec, 0, |_| vec![0.5, 0.6]);
        let p2 = input_policy(&spec, 1, |_| vec![0.5, 0.5]);
        assert!(matches!(
            factorized_joint(&spec, &[p1, p2.clone()]),
            Err(Error::NotStochastic(_))
        ));
        let short = input_policy(&spec, 0, |_| vec![1.0]);
        assert!(matches!(
            factorized_joint(&spec, &[short, p2.clone()]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(factorized_joint(&spec, &[p2]).is_err());
    }

    #[test]
    fn product_joint_matches_unconditional_policies() {
        let spec = networks::bscfb(0.3).unwrap();
        let p1 = input_policy(&spec, 0, |_| vec![0.3, 0.7]);
        let p2 = input_policy(&spec, 1, |_| vec![0.6, 0.4]);
        let a = factorized_joint(&spec, &[p1, p2]).unwrap();
        let px = JointPmf::new(
            binvars(&["X1", "X2"]),
            vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4],
        )
        .unwrap();
        let b = product_input_joint(&spec, &px).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
    }

    #[test]
    fn product_joint_classical_bsc() {
        let eps = 0.25;
        let spec = networks::classical_bsc(eps).unwrap();
        let px = JointPmf::new(
            vec![Variable::new("X1", 2), Variable::new("X2", 1)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let joint = product_input_joint(&spec, &px).unwrap();
        let m = joint.marginalize(&["X1", "Y2"]).unwrap();
        let want = [(1.0 - eps) / 2.0, eps / 2.0, eps / 2.0, (1.0 - eps) / 2.0];
        for (a, b) in m.probs().iter().zip(want) {
            close(*a, b, 1e-15);
        }
        assert!(product_input_joint(&spec, &JointPmf::uniform(binvars(&["X1"])).unwrap()).is_err());
    }

    #[test]
    fn point_masses_stay_point_masses() {
        let spec = networks::deterministic_feedback();
        let px = JointPmf::new(binvars(&["X1", "X2"]), vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let joint = product_input_joint(&spec, &px).unwrap();
        assert_eq!(joint.probs().iter().filter(|&&p| p == 1.0).count(), 1);
        let p1 = input_policy(&spec, 0, |_| vec![0.0, 1.0]);
        let p2 = input_policy(&spec, 1, |_| vec![1.0, 0.0]);
        let joint = factorized_joint(&spec, &[p1, p2]).unwrap();
        assert_eq!(joint.probs().iter().filter(|&&p| p == 1.0).count(), 1);
    }

    #[test]
    fn layout_fill_matches_factorized_joint() {
        let spec = networks::bscfb(0.2).unwrap();
        let rows1 = [vec![0.25, 0.75]];
        let rows2 = vec![
            vec![0.1, 0.9],
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            vec![0.3, 0.7],
        ];
        let layout = FactorizedLayout::capacity(&spec).unwrap();
        assert_eq!(layout.row_cols(), &[2, 2, 2, 2, 2]);
        let params: Vec<&[f64]> = rows1.iter().chain(&rows2).map(|r| r.as_slice()).collect();
        let mut out = Vec::new();
        layout.fill(&params, &mut out);
        let p1 = input_policy(&spec, 0, |r| rows1[r].clone());
        let p2 = input_policy(&spec, 1, |r| rows2[r].clone());
        let joint = factorized_joint(&spec, &[p1, p2]).unwrap();
        for (a, b) in out.iter().zip(joint.probs()) {
            close(*a, *b, 1e-15);
        }
    }

    #[test]
    fn positive_layout_matches_product_joint() {
        let spec = networks::bscfb(0.2).unwrap();
        let px = vec![0.1, 0.2, 0.3, 0.4];
        let layout = FactorizedLayout::positive_delay(&spec).unwrap();
        let mut out = Vec::new();
        layout.fill(&[&px], &mut out);
        let joint =
            product_input_joint(&spec, &JointPmf::new(binvars(&["X1", "X2"]), px).unwrap()).unwrap();
        for (a, b) in out.iter().zip(joint.probs()) {
            close(*a, *b, 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let joint = bscfb_uniform(0.11);
        let back = JointPmf::from_json(&joint.to_json()).unwrap();
        assert_eq!(back, joint);
    }
}
