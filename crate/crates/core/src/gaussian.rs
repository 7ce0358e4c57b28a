//! Three-node Gaussian causal relay.
//!
//! Node 1 transmits `X1`, node 2 hears `Y2 = X1 + 3 Z2` and relays in the same
//! slot, node 3 hears `Y3 = 2 X1 + X2 - Y2 + Z3`. The relay forwards its
//! reception (`X2 = Y2`) while its running energy stays within
//! `n (P + 10)`, which cancels `Z2` at node 3 and leaves `Y3 = 2 X1 + Z3`.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::bounds::{gaussian_relay_bounds, GaussianBounds};
use crate::error::{Error, Result};
use crate::rng;

/// Relay power exceeds the source power by this much.
pub const RELAY_EXTRA_POWER: f64 = 10.0;
pub const DEFAULT_BACKOFF: f64 = 0.5;
pub const DEFAULT_TARGET_RATE: f64 = 1.2;
/// Largest explicit codebook.
pub const DEFAULT_CODEBOOK_CAP: u128 = 1 << 20;
/// Relative slack on the source energy check, for rounding in `sum X1^2`.
const ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianRelayConfig {
    pub power: f64,
    pub n: usize,
    pub seed: u64,
    /// Total relay energy per block; `n (P + 10)` when `None`.
    pub relay_budget: Option<f64>,
}

impl GaussianRelayConfig {
    pub fn new(power: f64, n: usize, seed: u64) -> Result<Self> {
        let c = GaussianRelayConfig {
            power,
            n,
            seed,
            relay_budget: None,
        };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if !self.power.is_finite() || self.power <= 0.0 {
            return Err(Error::OutOfRange {
                what: "power",
                value: self.power,
                expected: "finite and > 0",
            });
        }
        if self.n == 0 {
            return Err(Error::OutOfRange {
                what: "blocklength",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if let Some(b) = self.relay_budget {
            if b.is_nan() || b < 0.0 {
                return Err(Error::OutOfRange {
                    what: "relay budget",
                    value: b,
                    expected: ">= 0",
                });
            }
        }
        Ok(())
    }

    pub fn budget(&self) -> f64 {
        self.relay_budget
            .unwrap_or(self.n as f64 * (self.power + RELAY_EXTRA_POWER))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaySlot {
    pub x1: f64,
    pub z2: f64,
    pub y2: f64,
    pub x2: f64,
    pub z3: f64,
    pub y3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelayTrace {
    pub slots: Vec<RelaySlot>,
    /// `sum X1^2`.
    pub source_energy: f64,
    /// `sum X2^2`.
    pub relay_energy: f64,
    /// Whether the relay forwarded in every slot.
    pub gate_open: bool,
}

impl RelayTrace {
    /// CSV `slot,x1,z2,y2,x2,z3,y3`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("slot,x1,z2,y2,x2,z3,y3\n");
        for (k, t) in self.slots.iter().enumerate() {
            s.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                k + 1,
                t.x1,
                t.z2,
                t.y2,
                t.x2,
                t.z3,
                t.y3
            ));
        }
        s
    }
}

fn noise(seed: u64, block: u64, slot: usize, which: u64) -> f64 {
    StandardNormal.sample(&mut rng::stream(seed, rng::NOISE, &[block, slot as u64, which]))
}

/// Runs block number `block` with the given source symbols.
pub fn simulate_relay(config: &GaussianRelayConfig, source: &[f64], block: u64) -> Result<RelayTrace> {
    config.check()?;
    if source.len() != config.n {
        return Err(Error::DimensionMismatch(format!(
            "source has {} symbols, blocklength is {}",
            source.len(),
            config.n
        )));
    }
    let budget = config.budget();
    let mut slots = Vec::with_capacity(config.n);
    let mut heard = 0.0;
    let mut relay_energy = 0.0;
    let mut gate_open = true;
    for (k, &x1) in source.iter().enumerate() {
        let z2 = noise(config.seed, block, k, 0);
        let z3 = noise(config.seed, block, k, 1);
        let y2 = x1 + 3.0 * z2;
        heard += y2 * y2;
        let x2 = if heard <= budget {
            y2
        } else {
            gate_open = false;
            0.0
        };
        relay_energy += x2 * x2;
        let y3 = 2.0 * x1 + x2 - y2 + z3;
        slots.push(RelaySlot {
            x1,
            z2,
            y2,
            x2,
            z3,
            y3,
        });
    }
    Ok(RelayTrace {
        source_energy: source.iter().map(|x| x * x).sum(),
        relay_energy,
        gate_open,
        slots,
    })
}

/// How node 1 picks its symbols in the neutralization experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// i.i.d. `N(0, P - delta)`.
    Gaussian { delta: f64 },
    /// `sqrt(P)` in every slot.
    Constant,
}

/// Source symbols of block number `block`.
pub fn source_block(config: &GaussianRelayConfig, source: Source, block: u64) -> Result<Vec<f64>> {
    match source {
        Source::Gaussian { delta } => {
            if !(0.0..config.power).contains(&delta) {
                return Err(Error::OutOfRange {
                    what: "delta",
                    value: delta,
                    expected: "[0, P)",
                });
            }
            let normal = Normal::new(0.0, (config.power - delta).sqrt()).expect("positive sd");
            let mut r = rng::stream(config.seed, rng::SOURCE, &[block]);
            Ok((0..config.n).map(|_| normal.sample(&mut r)).collect())
        }
        Source::Constant => Ok(vec![config.power.sqrt(); config.n]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralizationReport {
    pub blocks: u64,
    /// Fraction of blocks in which the relay forwarded in every slot.
    pub open_fraction: f64,
    /// Fraction of blocks with `sum X1^2 <= n P`.
    pub source_compliance: f64,
    /// Largest `sum X2^2 / (n (P + 10))` seen.
    pub max_relay_load: f64,
}

/// Gate-open frequency over `blocks` independent blocks.
pub fn neutralization_rate(
    config: &GaussianRelayConfig,
    source: Source,
    blocks: u64,
) -> Result<NeutralizationReport> {
    config.check()?;
    if blocks == 0 {
        return Err(Error::OutOfRange {
            what: "blocks",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let n_p = config.n as f64 * config.power * (1.0 + ENERGY_TOL);
    let full_budget = config.n as f64 * (config.power + RELAY_EXTRA_POWER);
    let (open, compliant, load) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let trace = simulate_relay(config, &source_block(config, source, b)?, b)?;
            Ok((
                u64::from(trace.gate_open),
                u64::from(trace.source_energy <= n_p),
                trace.relay_energy / full_budget,
            ))
        })
        .try_reduce(
            || (0, 0, 0.0),
            |a: (u64, u64, f64), b| Ok::<_, Error>((a.0 + b.0, a.1 + b.1, a.2.max(b.2))),
        )?;
    Ok(NeutralizationReport {
        blocks,
        open_fraction: open as f64 / blocks as f64,
        source_compliance: compliant as f64 / blocks as f64,
        max_relay_load: load,
    })
}

/// Sample moments of `Y3` over `samples` slots with `X1 = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalLaw {
    pub x: f64,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub gate_open: bool,
}

pub fn conditional_law(power: f64, x: f64, samples: usize, seed: u64) -> Result<ConditionalLaw> {
    let config = GaussianRelayConfig::new(power, samples, seed)?;
    let trace = simulate_relay(&config, &vec![x; samples], 0)?;
    let m = samples as f64;
    let mean = trace.slots.iter().map(|s| s.y3).sum::<f64>() / m;
    let variance = trace
        .slots
        .iter()
        .map(|s| (s.y3 - mean).powi(2))
        .sum::<f64>()
        / (m - 1.0).max(1.0);
    Ok(ConditionalLaw {
        x,
        samples,
        mean,
        variance,
        gate_open: trace.gate_open,
    })
}

/// CDF of the noncentral chi-square law with `k` degrees of freedom and
/// noncentrality `lambda`, as a Poisson mixture of central laws.
pub fn noncentral_chi2_cdf(x: f64, k: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let half = lambda / 2.0;
    if half == 0.0 {
        return gamma_lr(k / 2.0, x / 2.0);
    }
    let spread = half.sqrt();
    let lo = (half - 12.0 * spread - 30.0).max(0.0).floor() as u64;
    let hi = (half + 12.0 * spread + 30.0).ceil() as u64;
    let ln_half = half.ln();
    let mut total = 0.0;
    for j in lo..=hi {
        let jf = j as f64;
        let w = (-half + jf * ln_half - ln_gamma(jf + 1.0)).exp();
        total += w * gamma_lr(k / 2.0 + jf, x / 2.0);
    }
    total.clamp(0.0, 1.0)
}

/// How the codebook experiment draws competing codewords.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookMode {
    /// One fixed Gaussian codebook with explicit nearest-neighbour search.
    Explicit { cap: u128 },
    /// A fresh codebook per trial. Only the transmitted codeword is drawn;
    /// the chance that some other codeword lies closer is exact given the
    /// received block, and the error is sampled from it.
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodebookConfig {
    pub power: f64,
    pub delta: f64,
    pub rate: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub mode: CodebookMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookReport {
    pub n: usize,
    pub rate: f64,
    /// `ceil(rate n)`.
    pub log2_codewords: u32,
    pub trials: u64,
    pub errors: u64,
    pub block_error_rate: f64,
    pub half_width: f64,
    /// Average of the per-trial error probabilities (ensemble mode only).
    pub mean_error_probability: Option<f64>,
    pub gate_open_fraction: f64,
    pub source_compliance: f64,
}

fn codeword(seed: u64, n: usize, index: u64, sd: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, sd).expect("positive sd");
    let mut r = rng::stream(seed, rng::CODEBOOK, &[n as u64, index]);
    (0..n).map(|_| normal.sample(&mut r)).collect()
}

fn dist2(y3: &[f64], c: &[f64]) -> f64 {
    y3.iter().zip(c).map(|(y, x)| (y - 2.0 * x).powi(2)).sum()
}

/// Block error rate of Gaussian codes at power `P - delta` over the
/// neutralized relay, decoded by nearest neighbour on `Y3` against `2 X1`.
pub fn codebook_experiment(config: &CodebookConfig) -> Result<CodebookReport> {
    let relay = GaussianRelayConfig::new(config.power, config.n, config.seed)?;
    if !(0.0..config.power).contains(&config.delta) {
        return Err(Error::OutOfRange {
            what: "delta",
            value: config.delta,
            expected: "[0, P)",
        });
    }
    if !config.rate.is_finite() || config.rate < 0.0 {
        return Err(Error::OutOfRange {
            what: "rate",
            value: config.rate,
            expected: "finite and >= 0",
        });
    }
    if config.trials == 0 {
        return Err(Error::OutOfRange {
            what: "trials",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let bits = (config.rate * config.n as f64 - 1e-9).ceil().max(0.0);
    if bits > 1000.0 {
        return Err(Error::CodebookTooLarge {
            size: u128::MAX,
            cap: u128::MAX,
        });
    }
    let bits = bits as u32;
    let sd = (config.power - config.delta).sqrt();
    let n_p = config.n as f64 * config.power * (1.0 + ENERGY_TOL);

    let explicit = match config.mode {
        CodebookMode::Explicit { cap } => {
            let size = 1u128.checked_shl(bits).unwrap_or(u128::MAX);
            if bits >= 127 || size > cap {
                return Err(Error::CodebookTooLarge { size, cap });
            }
            let book: Vec<Vec<f64>> = (0..size as u64)
                .into_par_iter()
                .map(|i| codeword(config.seed, config.n, i, sd))
                .collect();
            Some(book)
        }
        CodebookMode::Ensemble => None,
    };
    let others = 2f64.powi(bits as i32) - 1.0;

    // (error, error probability, gate open, source compliant)
    let outcomes: Vec<(bool, f64, bool, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(config.seed, rng::MESSAGE, &[t]);
            match &explicit {
                Some(book) => {
                    let m = r.random_range(0..book.len());
                    let trace = simulate_relay(&relay, &book[m], t)?;
                    let y3: Vec<f64> = trace.slots.iter().map(|s| s.y3).collect();
                    let best = book
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (dist2(&y3, c), i))
                        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                        .map_or(0, |(_, i)| i);
                    let err = best != m;
                    Ok((err, f64::from(u8::from(err)), trace.gate_open, trace.source_energy <= n_p))
                }
                None => {
                    let c0 = codeword(config.seed, config.n, t, sd);
                    let trace = simulate_relay(&relay, &c0, t)?;
                    let y3: Vec<f64> = trace.slots.iter().map(|s| s.y3).collect();
                    let p_err = if others == 0.0 {
                        0.0
                    } else {
                        let scale = 4.0 * sd * sd;
                        let lambda = y3.iter().map(|y| y * y).sum::<f64>() / scale;
                        let p = noncentral_chi2_cdf(dist2(&y3, &c0) / scale, config.n as f64, lambda);
                        -(others * (-p).ln_1p()).exp_m1()
                    };
                    let u: f64 = r.random();
                    Ok((u < p_err, p_err, trace.gate_open, trace.source_energy <= n_p))
                }
            }
        })
        .collect::<Result<_>>()?;

    let trials = config.trials;
    let errors = outcomes.iter().filter(|o| o.0).count() as u64;
    let frac = |f: fn(&(bool, f64, bool, bool)) -> bool| {
        outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64
    };
    Ok(CodebookReport {
        n: config.n,
        rate: config.rate,
        log2_codewords: bits,
        trials,
        errors,
        block_error_rate: errors as f64 / trials as f64,
        half_width: crate::simulate::wilson_half_width(errors, trials),
        mean_error_probability: explicit
            .is_none()
            .then(|| outcomes.iter().map(|o| o.1).sum::<f64>() / trials as f64),
        gate_open_fraction: frac(|o| o.2),
        source_compliance: frac(|o| o.3),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub bounds: GaussianBounds,
    pub target_rate: f64,
    /// `target_rate` exceeds the positive-delay cap.
    pub above_cap: bool,
    /// `target_rate` is below the zero-delay achievable rate.
    pub below_achievable: bool,
    pub demonstrated: bool,
}

/// Compares the positive-delay cap, the zero-delay achievable rate and an
/// operating point.
pub fn separation_report(power: f64, target_rate: f64) -> Result<SeparationReport> {
    let bounds = gaussian_relay_bounds(power)?;
    let above_cap = target_rate > bounds.positive_delay_cap;
    let below_achievable = target_rate < bounds.achievable_rate;
    Ok(SeparationReport {
        bounds,
        target_rate,
        above_cap,
        below_achievable,
        demonstrated: bounds.separated && above_cap && below_achievable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal as SNormal};

    fn phi(x: f64) -> f64 {
        SNormal::new(0.0, 1.0).unwrap().cdf(x)
    }

    #[test]
    fn zero_source_leaves_pure_noise() {
        let config = GaussianRelayConfig::new(5.0, 50, 3).unwrap();
        let trace = simulate_relay(&config, &[0.0; 50], 0).unwrap();
        assert!(trace.gate_open);
        for s in &trace.slots {
            assert!((s.y3 - s.z3).abs() < 1e-12);
        }
    }

    #[test]
    fn open_gate_cancels_relay_noise() {
        let config = GaussianRelayConfig::new(5.0, 100, 4).unwrap();
        let source: Vec<f64> = (0..100).map(|k| (k as f64 * 0.1).sin() * 2.0).collect();
        let trace = simulate_relay(&config, &source, 1).unwrap();
        assert!(trace.gate_open);
        for s in &trace.slots {
            assert!((s.y3 - (2.0 * s.x1 + s.z3)).abs() < 1e-12);
            assert!((s.y2 - (s.x1 + 3.0 * s.z2)).abs() < 1e-12);
        }
        assert!(trace.relay_energy <= config.budget());
    }

    #[test]
    fn shut_gate_passes_relay_noise() {
        let mut config = GaussianRelayConfig::new(5.0, 20_000, 5).unwrap();
        config.relay_budget = Some(0.0);
        let trace = simulate_relay(&config, &vec![1.0; 20_000], 2).unwrap();
        assert!(!trace.gate_open);
        assert_eq!(trace.relay_energy, 0.0);
        let resid: Vec<f64> = trace.slots.iter().map(|s| s.y3 - s.x1).collect();
        for (s, r) in trace.slots.iter().zip(&resid) {
            assert!((r - (-3.0 * s.z2 + s.z3)).abs() < 1e-12);
        }
        let m = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / m;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!((var - 10.0).abs() < 0.5, "{var}");
    }

    #[test]
    fn relay_budget_never_exceeded() {
        // A loud source forces the gate shut part way through.
        let config = GaussianRelayConfig::new(5.0, 200, 6).unwrap();
        let trace = simulate_relay(&config, &vec![6.0; 200], 0).unwrap();
        assert!(!trace.gate_open);
        assert!(trace.relay_energy <= config.budget());
    }

    #[test]
    fn traces_are_seeded() {
        let config = GaussianRelayConfig::new(5.0, 10, 9).unwrap();
        let a = simulate_relay(&config, &[1.0; 10], 0).unwrap();
        assert_eq!(a, simulate_relay(&config, &[1.0; 10], 0).unwrap());
        assert_ne!(a, simulate_relay(&config, &[1.0; 10], 1).unwrap());
    }

    #[test]
    fn bad_inputs() {
        assert!(GaussianRelayConfig::new(0.0, 10, 1).is_err());
        assert!(GaussianRelayConfig::new(5.0, 0, 1).is_err());
        let config = GaussianRelayConfig::new(5.0, 10, 1).unwrap();
        assert!(simulate_relay(&config, &[0.0; 3], 0).is_err());
        assert!(neutralization_rate(&config, Source::Gaussian { delta: 5.0 }, 10).is_err());
    }

    #[test]
    fn chi2_cdf_against_normal_closed_form() {
        // One degree of freedom: (mu + Z)^2 <= x.
        for (mu, x) in [(0.0, 1.0f64), (1.5, 2.0), (0.7, 9.0), (2.0, 0.3)] {
            let want = phi(x.sqrt() - mu) - phi(-x.sqrt() - mu);
            let got = noncentral_chi2_cdf(x, 1.0, mu * mu);
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        // Two central degrees of freedom: 1 - exp(-x/2).
        let got = noncentral_chi2_cdf(3.0, 2.0, 0.0);
        assert!((got - (1.0 - (-1.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn chi2_cdf_large_noncentrality() {
        // Mean k + lambda, variance 2(k + 2 lambda).
        let (k, lambda) = (24.0f64, 400.0f64);
        let mean = k + lambda;
        let sd = (2.0 * (k + 2.0 * lambda)).sqrt();
        assert!(noncentral_chi2_cdf(mean - 6.0 * sd, k, lambda) < 1e-6);
        assert!(noncentral_chi2_cdf(mean + 6.0 * sd, k, lambda) > 1.0 - 1e-6);
        let mid = noncentral_chi2_cdf(mean, k, lambda);
        assert!(mid > 0.45 && mid < 0.6, "{mid}");
    }

    #[test]
    fn single_codeword_never_errs() {
        let r = codebook_experiment(&CodebookConfig {
            power: 5.0,
            delta: 0.5,
            rate: 0.0,
            n: 8,
            trials: 50,
            seed: 1,
            mode: CodebookMode::Explicit { cap: 16 },
        })
        .unwrap();
        assert_eq!((r.errors, r.log2_codewords), (0, 0));
        let r = codebook_experiment(&CodebookConfig {
            mode: CodebookMode::Ensemble,
            rate: 0.0,
            power: 5.0,
            delta: 0.5,
            n: 8,
            trials: 50,
            seed: 1,
        })
        .unwrap();
        assert_eq!(r.errors, 0);
        assert_eq!(r.mean_error_probability, Some(0.0));
    }

    #[test]
    fn codebook_cap_enforced() {
        let err = codebook_experiment(&CodebookConfig {
            power: 5.0,
            delta: 0.5,
            rate: 1.2,
            n: 24,
            trials: 10,
            seed: 1,
            mode: CodebookMode::Explicit {
                cap: DEFAULT_CODEBOOK_CAP,
            },
        });
        assert!(matches!(err, Err(Error::CodebookTooLarge { .. })));
    }

    #[test]
    fn separation_examples() {
        let r = separation_report(5.0, DEFAULT_TARGET_RATE).unwrap();
        assert!(r.above_cap && r.below_achievable && r.demonstrated);
        let r = separation_report(1.0, DEFAULT_TARGET_RATE).unwrap();
        assert!(!r.demonstrated);
        assert!(r.bounds.positive_delay_cap >= r.bounds.achievable_rate);
        let r = separation_report(1.25, DEFAULT_TARGET_RATE).unwrap();
        assert!(!r.bounds.separated && !r.demonstrated);
    }

    #[test]
    fn csv_layout() {
        let config = GaussianRelayConfig::new(5.0, 3, 1).unwrap();
        let csv = simulate_relay(&config, &[1.0, 0.0, -1.0], 0).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "slot,x1,z2,y2,x2,z3,y3");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,1.000000,"));
    }
}
