//! Cut-set outer bounds.
//!
//! Two bounds are evaluated per cut `T`:
//!
//! * capacity mode: `sum_h I(X_{T∩S^h}, Y_{T∩G^{h-1}}; Y_{T^c∩G_h} | X_{T^c∩S^h}, Y_{T^c∩G^{h-1}})`
//!   for joints built from per-channel conditional input policies;
//! * positive-delay mode: `I(X_T; Y_{T^c} | X_{T^c})` for joints whose inputs
//!   are drawn up front and pushed through the composed channel.
//!
//! The outer region is a union over distributions of an intersection over
//! cuts, so the grid search reports per-distribution verdicts. The per-cut
//! maximum over the grid is also reported, labeled as a loose hull.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkSpec, NodeSet, STOCHASTIC_TOL};
use crate::probability::{
    binary_entropy, product_input_joint, x_name, y_name, CmiPlan, FactorizedLayout, JointPmf,
};

/// Default limit on the number of grid distributions enumerated.
pub const DEFAULT_GRID_CAP: u128 = 10_000_000;

/// Slack allowed when comparing a rate sum with its cap.
pub const RATE_TOL: f64 = 1e-12;

/// Largest node count for which cuts are enumerated.
pub const MAX_CUT_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    Capacity,
    PositiveDelay,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Capacity => "capacity",
            BoundMode::PositiveDelay => "positive-delay",
        })
    }
}

impl FromStr for BoundMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "capacity" => Ok(BoundMode::Capacity),
            "positive-delay" => Ok(BoundMode::PositiveDelay),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// A proper, nonempty node subset `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    nodes: NodeSet,
    n_nodes: usize,
}

impl Cut {
    pub fn new(nodes: NodeSet, n_nodes: usize) -> Result<Self> {
        let full = NodeSet::full(n_nodes);
        if nodes.is_empty() || nodes == full || !nodes.difference(full).is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "cut {nodes} is not a proper nonempty subset of 1..={n_nodes}"
            )));
        }
        Ok(Cut { nodes, n_nodes })
    }

    pub fn from_mask(mask: u64, n_nodes: usize) -> Result<Self> {
        Cut::new(NodeSet::from_mask(mask), n_nodes)
    }

    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    pub fn complement(&self) -> NodeSet {
        self.nodes.complement(self.n_nodes)
    }

    pub fn mask(&self) -> u64 {
        self.nodes.mask()
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.nodes.fmt(f)
    }
}

/// All `2^N - 2` cuts in increasing bitmask order.
pub fn enumerate_cuts(n_nodes: usize) -> Result<Vec<Cut>> {
    if n_nodes < 2 {
        return Err(Error::TooFewNodes(n_nodes));
    }
    if n_nodes > MAX_CUT_NODES {
        return Err(Error::StateSpaceTooLarge {
            size: 1u128 << n_nodes,
            cap: 1u128 << MAX_CUT_NODES,
        });
    }
    (1..(1u64 << n_nodes) - 1)
        .map(|m| Cut::from_mask(m, n_nodes))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutConstraint {
    #[serde(serialize_with = "ser_cut")]
    pub cut: Cut,
    /// One term per channel in capacity mode, a single term otherwise.
    pub terms: Vec<f64>,
    pub cap: f64,
}

fn ser_cut<S: serde::Serializer>(cut: &Cut, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(cut.mask())
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn names(nodes: NodeSet, f: fn(usize) -> String) -> Vec<String> {
    nodes.iter().map(f).collect()
}

/// Compiled MI terms for one cut.
#[derive(Debug, Clone)]
struct CutPlan {
    cut: Cut,
    terms: Vec<CmiPlan>,
}

impl CutPlan {
    fn new(spec: &NetworkSpec, mode: BoundMode, cut: Cut) -> Result<Self> {
        let vars = spec.network_variables();
        let t = cut.nodes();
        let tc = cut.complement();
        let groups: Vec<[Vec<String>; 3]> = match mode {
            BoundMode::Capacity => (0..spec.alpha())
                .map(|h| {
                    let (s, g) = spec.channel_inputs(h);
                    let out = spec.channel_outputs(h);
                    let mut a = names(t.intersection(s), x_name);
                    a.extend(names(t.intersection(g), y_name));
                    let b = names(tc.intersection(out), y_name);
                    let mut c = names(tc.intersection(s), x_name);
                    c.extend(names(tc.intersection(g), y_name));
                    [a, b, c]
                })
                .collect(),
            BoundMode::PositiveDelay => {
                vec![[names(t, x_name), names(tc, y_name), names(tc, x_name)]]
            }
        };
        let terms = groups
            .iter()
            .map(|[a, b, c]| CmiPlan::new(&vars, &strs(a), &strs(b), &strs(c)))
            .collect::<Result<_>>()?;
        Ok(CutPlan { cut, terms })
    }

    fn evaluate(&self, probs: &[f64]) -> CutConstraint {
        let terms: Vec<f64> = self.terms.iter().map(|p| p.evaluate(probs)).collect();
        CutConstraint {
            cut: self.cut,
            cap: terms.iter().sum(),
            terms,
        }
    }
}

fn check_joint(spec: &NetworkSpec, joint: &JointPmf) -> Result<()> {
    if joint.vars() != spec.network_variables().as_slice() {
        return Err(Error::DimensionMismatch(
            "joint must range over X1..XN, Y1..YN of the network".into(),
        ));
    }
    Ok(())
}

fn check_cut(spec: &NetworkSpec, cut: &Cut) -> Result<()> {
    if cut.n_nodes != spec.n_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "cut over {} nodes used with a {}-node network",
            cut.n_nodes,
            spec.n_nodes()
        )));
    }
    Ok(())
}

/// Capacity-mode constraint for one cut.
pub fn capacity_cut_cap(spec: &NetworkSpec, joint: &JointPmf, cut: &Cut) -> Result<CutConstraint> {
    check_joint(spec, joint)?;
    check_cut(spec, cut)?;
    Ok(CutPlan::new(spec, BoundMode::Capacity, *cut)?.evaluate(joint.probs()))
}

/// Positive-delay constraint `I(X_T; Y_{T^c} | X_{T^c})` for one cut.
pub fn positive_delay_cut_cap(
    spec: &NetworkSpec,
    joint: &JointPmf,
    cut: &Cut,
) -> Result<CutConstraint> {
    check_joint(spec, joint)?;
    check_cut(spec, cut)?;
    Ok(CutPlan::new(spec, BoundMode::PositiveDelay, *cut)?.evaluate(joint.probs()))
}

pub fn cut_cap(
    spec: &NetworkSpec,
    joint: &JointPmf,
    cut: &Cut,
    mode: BoundMode,
) -> Result<CutConstraint> {
    match mode {
        BoundMode::Capacity => capacity_cut_cap(spec, joint, cut),
        BoundMode::PositiveDelay => positive_delay_cut_cap(spec, joint, cut),
    }
}

/// Whether `joint` has the factorized form the bound of `mode` ranges over.
///
/// Both modes require that the conditional of `Y_{G_h}` given
/// `(X_{S^h}, Y_{G^{h-1}})` equals `q^(h)` on every positive-probability
/// event. Positive-delay mode additionally requires
/// `joint = p_X · composed channel`.
pub fn check_factorization(spec: &NetworkSpec, joint: &JointPmf, mode: BoundMode) -> bool {
    if check_joint(spec, joint).is_err() {
        return false;
    }
    for h in 0..spec.alpha() {
        let ch = spec.channel(h);
        let mut keep: Vec<&str> = ch.input_vars.iter().map(|v| v.name.as_str()).collect();
        keep.extend(ch.output_vars.iter().map(|v| v.name.as_str()));
        let Ok(m) = joint.marginalize(&keep) else {
            return false;
        };
        let cols = ch.n_cols();
        for (r, row) in m.probs().chunks(cols).enumerate() {
            let mass: f64 = row.iter().sum();
            if mass <= 0.0 {
                continue;
            }
            if row
                .iter()
                .zip(&ch.rows[r])
                .any(|(p, q)| (p / mass - q).abs() > STOCHASTIC_TOL)
            {
                return false;
            }
        }
    }
    if mode == BoundMode::PositiveDelay {
        let xs: Vec<String> = (0..spec.n_nodes()).map(x_name).collect();
        let xs: Vec<&str> = xs.iter().map(String::as_str).collect();
        let rebuilt = joint
            .marginalize(&xs)
            .and_then(|px| product_input_joint(spec, &px));
        match rebuilt.and_then(|r| r.max_abs_diff(joint)) {
            Ok(d) if d <= STOCHASTIC_TOL => {}
            _ => return false,
        }
    }
    true
}

/// Nonnegative rates `R_{i,j}` with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTuple {
    rates: Vec<Vec<f64>>,
}

impl RateTuple {
    pub fn zeros(n_nodes: usize) -> Self {
        RateTuple {
            rates: vec![vec![0.0; n_nodes]; n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.rates.len()
    }

    /// Sets `R_{i,j}` for 1-based `i != j`.
    pub fn set(&mut self, i: usize, j: usize, rate: f64) -> Result<()> {
        let n = self.n_nodes();
        for node in [i, j] {
            if node == 0 || node > n {
                return Err(Error::InvalidNode { node, n_nodes: n });
            }
        }
        if i == j && rate != 0.0 {
            return Err(Error::OutOfRange {
                what: "diagonal rate",
                value: rate,
                expected: "0",
            });
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::OutOfRange {
                what: "rate",
                value: rate,
                expected: "finite and >= 0",
            });
        }
        self.rates[i - 1][j - 1] = rate;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rates[i - 1][j - 1]
    }

    /// Parses `"1,2=0.45;2,1=0.95"`; unlisted pairs are 0.
    pub fn parse(text: &str, n_nodes: usize) -> Result<Self> {
        let mut t = RateTuple::zeros(n_nodes);
        let bad = |s: &str| Error::InvalidCode(format!("bad rate entry `{s}`, expected i,j=rate"));
        for entry in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (pair, rate) = entry.split_once('=').ok_or_else(|| bad(entry))?;
            let (i, j) = pair.split_once(',').ok_or_else(|| bad(entry))?;
            let i: usize = i.trim().parse().map_err(|_| bad(entry))?;
            let j: usize = j.trim().parse().map_err(|_| bad(entry))?;
            let r: f64 = rate.trim().parse().map_err(|_| bad(entry))?;
            t.set(i, j, r)?;
        }
        Ok(t)
    }

    /// `sum_{i in T, j not in T} R_{i,j}`.
    pub fn cut_sum(&self, cut: &Cut) -> f64 {
        let t = cut.nodes();
        let tc = cut.complement();
        t.iter()
            .flat_map(|i| tc.iter().map(move |j| (i, j)))
            .map(|(i, j)| self.rates[i][j])
            .sum()
    }

    /// Whether every cut constraint holds.
    pub fn satisfies(&self, constraints: &[CutConstraint]) -> bool {
        constraints
            .iter()
            .all(|c| self.cut_sum(&c.cut) <= c.cap + RATE_TOL)
    }
}

/// Compositions of `k` into `parts` nonnegative parts, lexicographic.
fn compositions(k: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(k: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=k {
            prefix.push(a);
            rec(k - a, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, parts, &mut Vec::new(), &mut out);
    out
}

/// A grid distribution: one composition of `k` per parameter row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: u64,
    pub resolution: u32,
    pub numerators: Vec<Vec<u32>>,
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .numerators
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                format!("({})", cells.join(","))
            })
            .collect();
        write!(f, "#{} {}/{}", self.index, rows.join(" "), self.resolution)
    }
}

/// Constraint set of one grid distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRegionReport {
    pub point: GridPoint,
    pub constraints: Vec<CutConstraint>,
}

/// Exhaustive simplex grid over the free distribution of one bound.
pub struct BoundGrid {
    mode: BoundMode,
    k: u32,
    layout: FactorizedLayout,
    /// Per parameter row: index into `tables`.
    row_table: Vec<usize>,
    /// Probability vectors of each composition table.
    tables: Vec<(Vec<Vec<u32>>, Vec<Vec<f64>>)>,
    plans: Vec<CutPlan>,
    points: u64,
}

impl BoundGrid {
    /// Grid over every cut, or over `only` when given.
    pub fn new(
        spec: &NetworkSpec,
        mode: BoundMode,
        k: u32,
        cap: u128,
        only: Option<Cut>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange {
                what: "grid resolution",
                value: 0.0,
                expected: ">= 1",
            });
        }
        let layout = match mode {
            BoundMode::Capacity => FactorizedLayout::capacity(spec)?,
            BoundMode::PositiveDelay => FactorizedLayout::positive_delay(spec)?,
        };
        let mut points: u128 = 1;
        let mut widths: Vec<usize> = Vec::new();
        let mut row_table = Vec::new();
        for &cols in layout.row_cols() {
            // Number of compositions: C(k + cols - 1, cols - 1).
            let mut count: u128 = 1;
            for i in 1..cols as u128 {
                count = count * (k as u128 + i) / i;
            }
            points = points.saturating_mul(count);
            if points > cap {
                return Err(Error::GridTooLarge { points, cap });
            }
            let t = match widths.iter().position(|&w| w == cols) {
                Some(t) => t,
                None => {
                    widths.push(cols);
                    widths.len() - 1
                }
            };
            row_table.push(t);
        }
        let tables = widths
            .iter()
            .map(|&w| {
                let comps = compositions(k, w);
                let probs = comps
                    .iter()
                    .map(|c| c.iter().map(|&a| a as f64 / k as f64).collect())
                    .collect();
                (comps, probs)
            })
            .collect();
        let cuts = match only {
            Some(c) => {
                check_cut(spec, &c)?;
                vec![c]
            }
            None => enumerate_cuts(spec.n_nodes())?,
        };
        let plans = cuts
            .into_iter()
            .map(|c| CutPlan::new(spec, mode, c))
            .collect::<Result<_>>()?;
        Ok(BoundGrid {
            mode,
            k,
            layout,
            row_table,
            tables,
            plans,
            points: points as u64,
        })
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    pub fn resolution(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn n_cuts(&self) -> usize {
        self.plans.len()
    }

    /// Composition index of each row for grid point `index`; the first row
    /// is the most significant digit.
    fn digits(&self, mut index: u64) -> Vec<usize> {
        let mut d = vec![0; self.row_table.len()];
        for r in (0..d.len()).rev() {
            let base = self.tables[self.row_table[r]].0.len() as u64;
            d[r] = (index % base) as usize;
            index /= base;
        }
        d
    }

    fn constraints(&self, index: u64, buf: &mut Vec<f64>) -> Vec<CutConstraint> {
        let digits = self.digits(index);
        let rows: Vec<&[f64]> = digits
            .iter()
            .zip(&self.row_table)
            .map(|(&d, &t)| self.tables[t].1[d].as_slice())
            .collect();
        self.layout.fill(&rows, buf);
        self.plans.iter().map(|p| p.evaluate(buf)).collect()
    }

    pub fn point(&self, index: u64) -> GridPoint {
        let numerators = self
            .digits(index)
            .iter()
            .zip(&self.row_table)
            .map(|(&d, &t)| self.tables[t].0[d].clone())
            .collect();
        GridPoint {
            index,
            resolution: self.k,
            numerators,
        }
    }

    pub fn report(&self, index: u64) -> RateRegionReport {
        RateRegionReport {
            point: self.point(index),
            constraints: self.constraints(index, &mut Vec::new()),
        }
    }

    /// Reports for every grid point, in index order.
    pub fn all_reports(&self) -> Vec<RateRegionReport> {
        (0..self.points)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| RateRegionReport {
                point: self.point(i),
                constraints: self.constraints(i, buf),
            })
            .collect()
    }

    /// Lowest-index grid point whose constraints admit `rates`.
    pub fn find_witness(&self, rates: &RateTuple) -> Option<RateRegionReport> {
        (0..self.points)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                rates.satisfies(&self.constraints(i, buf)).then_some(i)
            })
            .find_first(Option::is_some)
            .flatten()
            .map(|i| self.report(i))
    }

    /// Per-cut maximum over the grid with the lowest maximizing index.
    pub fn hull(&self) -> Hull {
        let best = (0..self.points)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                self.constraints(i, buf)
                    .into_iter()
                    .map(|c| (c.cap, i))
                    .collect::<Vec<_>>()
            })
            .reduce_with(|a, b| {
                a.into_iter()
                    .zip(b)
                    .map(|(x, y)| {
                        if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                            y
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .unwrap_or_default();
        let rows = best
            .into_iter()
            .enumerate()
            .map(|(c, (_, i))| {
                let report = self.report(i);
                HullRow {
                    constraint: report.constraints[c].clone(),
                    argmax: report.point,
                }
            })
            .collect();
        Hull {
            mode: self.mode,
            resolution: self.k,
            points: self.points,
            rows,
        }
    }
}

/// Per-cut maxima over a grid. This over-approximates the outer region,
/// which is a union of intersections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hull {
    pub mode: BoundMode,
    pub resolution: u32,
    pub points: u64,
    pub rows: Vec<HullRow>,
}

impl Hull {
    pub fn max_for(&self, mask: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.constraint.cut.mask() == mask)
            .map(|r| r.constraint.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullRow {
    pub constraint: CutConstraint,
    pub argmax: GridPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Inside,
    NotFoundAtResolution,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Inside => "inside",
            Verdict::NotFoundAtResolution => "not-found-at-this-resolution",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub mode: BoundMode,
    pub resolution: u32,
    pub points: u64,
    pub verdict: Verdict,
    pub witness: Option<RateRegionReport>,
}

/// Searches the grid for a distribution whose cut constraints admit `rates`.
/// A negative answer only covers this resolution.
pub fn region_membership(
    spec: &NetworkSpec,
    rates: &RateTuple,
    mode: BoundMode,
    k: u32,
    cap: u128,
) -> Result<Membership> {
    if rates.n_nodes() != spec.n_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "rate tuple for {} nodes, network has {}",
            rates.n_nodes(),
            spec.n_nodes()
        )));
    }
    let grid = BoundGrid::new(spec, mode, k, cap, None)?;
    let witness = grid.find_witness(rates);
    Ok(Membership {
        mode,
        resolution: k,
        points: grid.len(),
        verdict: if witness.is_some() {
            Verdict::Inside
        } else {
            Verdict::NotFoundAtResolution
        },
        witness,
    })
}

/// Capacity region of the BSC with correlated feedback:
/// `R12 <= 1 - H(eps)`, `R21 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscfbRegion {
    pub forward_cap: f64,
    pub reverse_cap: f64,
}

impl BscfbRegion {
    pub fn contains(&self, r12: f64, r21: f64) -> bool {
        r12 <= self.forward_cap && r21 <= self.reverse_cap
    }
}

pub fn bscfb_capacity_region(eps: f64) -> Result<BscfbRegion> {
    Ok(BscfbRegion {
        forward_cap: 1.0 - binary_entropy(eps)?,
        reverse_cap: 1.0,
    })
}

/// Closed-form comparison for the Gaussian causal relay example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBounds {
    pub power: f64,
    /// `1/2 log2(3 + 2P/5)`.
    pub positive_delay_cap: f64,
    /// `1/2 log2(1 + 2P)`.
    pub achievable_rate: f64,
    pub separated: bool,
}

pub fn gaussian_relay_bounds(power: f64) -> Result<GaussianBounds> {
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::OutOfRange {
            what: "power",
            value: power,
            expected: "finite and > 0",
        });
    }
    let positive_delay_cap = 0.5 * (3.0 + 2.0 * power / 5.0).log2();
    let achievable_rate = 0.5 * (1.0 + 2.0 * power).log2();
    Ok(GaussianBounds {
        power,
        positive_delay_cap,
        achievable_rate,
        separated: achievable_rate > positive_delay_cap,
    })
}
