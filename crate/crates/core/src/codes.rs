//! Binary block codes for the forward BSC link.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// A binary block code with a decoder for a BSC of known crossover.
pub trait BinaryBlockCode: Send + Sync {
    fn length(&self) -> usize;
    fn dimension(&self) -> usize;
    fn encode(&self, info: &[u8]) -> Vec<u8>;
    fn decode(&self, received: &[u8], crossover: f64) -> Vec<u8>;
}

/// Sends the information bits as they are, padded with zeros.
#[derive(Debug, Clone)]
pub struct Uncoded {
    n: usize,
    k: usize,
}

impl Uncoded {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidCode(format!("dimension {k} exceeds length {n}")));
        }
        Ok(Uncoded { n, k })
    }
}

impl BinaryBlockCode for Uncoded {
    fn length(&self) -> usize {
        self.n
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn encode(&self, info: &[u8]) -> Vec<u8> {
        let mut c = info.to_vec();
        c.resize(self.n, 0);
        c
    }

    fn decode(&self, received: &[u8], _crossover: f64) -> Vec<u8> {
        received[..self.k].to_vec()
    }
}

/// Largest dimension accepted by [`RandomCodebook`].
pub const MAX_CODEBOOK_BITS: usize = 20;

/// `2^k` uniformly drawn codewords with minimum-Hamming-distance decoding
/// (lowest index wins ties).
#[derive(Debug, Clone)]
pub struct RandomCodebook {
    n: usize,
    k: usize,
    words: Vec<Vec<u8>>,
}

impl RandomCodebook {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k > MAX_CODEBOOK_BITS {
            return Err(Error::CodebookTooLarge {
                size: 1u128 << k.min(127),
                cap: 1u128 << MAX_CODEBOOK_BITS,
            });
        }
        let mut r = rng::stream(seed, rng::CODEBOOK, &[n as u64, k as u64]);
        let words = (0..1usize << k)
            .map(|_| (0..n).map(|_| r.random_range(0..2u8)).collect())
            .collect();
        Ok(RandomCodebook { n, k, words })
    }

    fn index(info: &[u8]) -> usize {
        info.iter().fold(0, |acc, &b| acc << 1 | b as usize)
    }
}

impl BinaryBlockCode for RandomCodebook {
    fn length(&self) -> usize {
        self.n
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn encode(&self, info: &[u8]) -> Vec<u8> {
        self.words[Self::index(info)].clone()
    }

    fn decode(&self, received: &[u8], _crossover: f64) -> Vec<u8> {
        let best = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.iter().zip(received).filter(|(a, b)| a != b).count(), i))
            .min()
            .map_or(0, |(_, i)| i);
        (0..self.k).map(|b| (best >> (self.k - 1 - b) & 1) as u8).collect()
    }
}

/// Share of information columns with the high degree.
const HIGH_DEGREE_SHARE: f64 = 0.4;
const LOW_DEGREE: usize = 3;
const HIGH_DEGREE: usize = 12;
pub const DEFAULT_BP_ITERATIONS: usize = 200;

/// Systematic irregular repeat-accumulate LDPC code decoded by belief
/// propagation.
///
/// Codewords are `[info (k bits), parity (m = n - k bits)]`. Check `j` sums
/// its information neighbours with parity bits `j` and `j - 1`, so encoding
/// is a running XOR.
#[derive(Debug, Clone)]
pub struct IraLdpc {
    n: usize,
    k: usize,
    /// Information neighbours of each check.
    check_info: Vec<Vec<usize>>,
    max_iterations: usize,
}

impl IraLdpc {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidCode(format!(
                "need 0 < k < n for an LDPC code, got k = {k}, n = {n}"
            )));
        }
        let m = n - k;
        let mut r = rng::stream(seed, rng::CODEBOOK, &[n as u64, k as u64]);
        let n_high = (k as f64 * HIGH_DEGREE_SHARE).round() as usize;
        let mut degrees: Vec<usize> = (0..k)
            .map(|i| if i < n_high { HIGH_DEGREE } else { LOW_DEGREE }.min(m))
            .collect();
        degrees.shuffle(&mut r);
        let mut load = vec![0usize; m];
        let mut check_info = vec![Vec::new(); m];
        let mut order: Vec<usize> = (0..m).collect();
        for (col, &d) in degrees.iter().enumerate() {
            // Least-loaded distinct checks, random among equals.
            order.shuffle(&mut r);
            order.sort_by_key(|&c| load[c]);
            for &c in &order[..d] {
                load[c] += 1;
                check_info[c].push(col);
            }
        }
        Ok(IraLdpc {
            n,
            k,
            check_info,
            max_iterations: DEFAULT_BP_ITERATIONS,
        })
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations.max(1);
        self
    }

    fn checks(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.check_info.iter().enumerate().map(move |(j, info)| {
            let mut vars = info.clone();
            if j > 0 {
                vars.push(self.k + j - 1);
            }
            vars.push(self.k + j);
            vars
        })
    }

    /// Whether `word` satisfies every parity check.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.checks()
            .all(|vars| vars.iter().fold(0, |acc, &v| acc ^ word[v]) == 0)
    }
}

impl BinaryBlockCode for IraLdpc {
    fn length(&self) -> usize {
        self.n
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn encode(&self, info: &[u8]) -> Vec<u8> {
        let mut word = info.to_vec();
        let mut acc = 0u8;
        for neighbours in &self.check_info {
            acc ^= neighbours.iter().fold(0, |a, &i| a ^ info[i]);
            word.push(acc);
        }
        word
    }

    fn decode(&self, received: &[u8], crossover: f64) -> Vec<u8> {
        let eps = crossover.clamp(1e-12, 0.5);
        let llr0 = ((1.0 - eps) / eps).ln();
        let channel: Vec<f64> = received
            .iter()
            .map(|&y| if y == 0 { llr0 } else { -llr0 })
            .collect();

        let checks: Vec<Vec<usize>> = self.checks().collect();
        let mut start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        for vars in &checks {
            start.push(edge_var.len());
            edge_var.extend_from_slice(vars);
        }
        start.push(edge_var.len());
        let n_edges = edge_var.len();
        let mut var_edges = vec![Vec::new(); self.n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[v].push(e);
        }

        let mut v2c: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
        let mut c2v = vec![0.0; n_edges];
        let mut hard: Vec<u8> = received.to_vec();
        let mut t = Vec::new();
        let mut suffix = Vec::new();
        for _ in 0..self.max_iterations {
            for c in 0..checks.len() {
                let edges = start[c]..start[c + 1];
                t.clear();
                t.extend(edges.clone().map(|e| (v2c[e] / 2.0).tanh()));
                suffix.clear();
                suffix.resize(t.len() + 1, 1.0);
                for i in (0..t.len()).rev() {
                    suffix[i] = suffix[i + 1] * t[i];
                }
                let mut prefix = 1.0;
                for (i, e) in edges.enumerate() {
                    let p = (prefix * suffix[i + 1]).clamp(-0.999_999_999_999, 0.999_999_999_999);
                    c2v[e] = 2.0 * p.atanh();
                    prefix *= t[i];
                }
            }
            for v in 0..self.n {
                let total: f64 = channel[v] + var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
                for &e in &var_edges[v] {
                    v2c[e] = total - c2v[e];
                }
                hard[v] = u8::from(total < 0.0);
            }
            let satisfied = (0..checks.len()).all(|c| {
                edge_var[start[c]..start[c + 1]]
                    .iter()
                    .fold(0, |acc, &v| acc ^ hard[v])
                    == 0
            });
            if satisfied {
                break;
            }
        }
        hard.truncate(self.k);
        hard
    }
}
