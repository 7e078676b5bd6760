//! Exact queries against small models by brute-force enumeration.
//!
//! The oracle exists for testing, evaluation, and calibration: it enumerates
//! the full joint table (guarded by a cell cap), and answers marginal,
//! conditional, divergence, and entropy queries exactly. Learning code never
//! calls into this module.

use crate::error::{FgError, Result};
use crate::model::{
    cell_count, for_each_cell, index_of, strides, Assignment, FactorGraph, VariableSpec,
};

/// Default ceiling on the number of joint configurations the oracle will
/// enumerate (2^24 cells).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Neumaier-compensated accumulator; keeps long alternating or highly mixed
/// sums accurate to a few ulps.
#[derive(Debug, Clone, Default)]
pub struct StableSum {
    sum: f64,
    comp: f64,
}

impl StableSum {
    pub fn new() -> Self {
        StableSum { sum: 0.0, comp: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The fully enumerated joint distribution of a factor graph.
#[derive(Debug, Clone)]
pub struct JointTable {
    variables: Vec<VariableSpec>,
    cards: Vec<u32>,
    strides: Vec<usize>,
    probs: Vec<f64>,
    log_partition: f64,
}

impl JointTable {
    /// Enumerates the joint with the default cap.
    pub fn from_graph(graph: &FactorGraph) -> Result<Self> {
        Self::from_graph_capped(graph, DEFAULT_ENUMERATION_CAP)
    }

    /// Enumerates the joint, refusing to build more than `cap` cells.
    pub fn from_graph_capped(graph: &FactorGraph, cap: u64) -> Result<Self> {
        let cells = graph.state_count();
        if cells > cap as u128 {
            return Err(FgError::CapExceeded { cells, cap });
        }
        let cards = graph.cardinalities();
        let n = cards.len();
        let total = cells as usize;

        // Log-score every configuration, then normalize through a
        // max-shifted log-sum-exp.
        let mut scores = vec![0.0f64; total];
        let factor_data: Vec<(&[u32], &[u32], &[f64])> = graph
            .factors()
            .iter()
            .map(|f| (f.scope(), f.cards(), f.log_values()))
            .collect();
        let mut buf = vec![0u32; n];
        for_each_cell(&cards, |idx, values| {
            buf[..n].copy_from_slice(values);
            let mut score = 0.0;
            for (scope, fcards, table) in &factor_data {
                let mut fidx = 0usize;
                for (pos, &var) in scope.iter().enumerate() {
                    fidx = fidx * fcards[pos] as usize + buf[var as usize] as usize;
                }
                score += table[fidx];
            }
            scores[idx] = score;
        });

        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = StableSum::new();
        for &s in &scores {
            acc.add((s - max).exp());
        }
        let log_partition = max + acc.value().ln();
        let probs: Vec<f64> = scores.iter().map(|&s| (s - log_partition).exp()).collect();

        Ok(JointTable {
            variables: graph.variables().to_vec(),
            strides: strides(&cards),
            cards,
            probs,
            log_partition,
        })
    }

    /// Builds a joint table directly from probabilities that already sum to
    /// one (within 1e-9). Useful for handcrafted distributions in tests.
    pub fn from_probs(variables: Vec<VariableSpec>, probs: Vec<f64>) -> Result<Self> {
        let cards: Vec<u32> = variables.iter().map(|v| v.cardinality).collect();
        let expected = cell_count(&cards);
        if expected > usize::MAX as u128 || probs.len() != expected as usize {
            return Err(FgError::TableSizeMismatch {
                expected: expected.min(usize::MAX as u128) as usize,
                got: probs.len(),
            });
        }
        let mut acc = StableSum::new();
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(FgError::NonFiniteEntry(i));
            }
            acc.add(p);
        }
        if (acc.value() - 1.0).abs() > 1e-9 {
            return Err(FgError::InvalidParameter(format!(
                "probabilities sum to {}, expected 1",
                acc.value()
            )));
        }
        Ok(JointTable {
            strides: strides(&cards),
            cards,
            variables,
            probs,
            log_partition: 0.0,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn cards(&self) -> &[u32] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Natural log of the normalizing constant of the source graph.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Probability of the full assignment `x`.
    pub fn prob(&self, x: &Assignment) -> Result<f64> {
        if !x.is_full_for(self.n()) {
            return Err(FgError::ScopeMismatch(
                "joint lookup needs a full assignment".into(),
            ));
        }
        Ok(self.probs[index_of(x.values(), &self.cards)])
    }

    /// Probability of a partial event, summing over unassigned variables.
    pub fn event_prob(&self, event: &Assignment) -> Result<f64> {
        for (&var, &v) in event.scope().iter().zip(event.values()) {
            let card = *self
                .cards
                .get(var as usize)
                .ok_or(FgError::UnknownVariable(var))?;
            if v >= card {
                return Err(FgError::ValueOutOfRange { variable: var, value: v, cardinality: card });
            }
        }
        if event.is_full_for(self.n()) {
            return Ok(self.probs[index_of(event.values(), &self.cards)]);
        }
        let mut acc = StableSum::new();
        let pairs: Vec<(usize, u32)> = event
            .scope()
            .iter()
            .map(|&v| (v as usize, event.value_of(v).unwrap()))
            .collect();
        'cells: for idx in 0..self.probs.len() {
            for &(var, val) in &pairs {
                if ((idx / self.strides[var]) as u32 % self.cards[var]) != val {
                    continue 'cells;
                }
            }
            acc.add(self.probs[idx]);
        }
        Ok(acc.value())
    }

    /// Marginal distribution over `scope` (sorted ids; empty scope allowed).
    pub fn marginal(&self, scope: &[u32]) -> Result<ProbTable> {
        for &var in scope {
            if var as usize >= self.n() {
                return Err(FgError::UnknownVariable(var));
            }
        }
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FgError::UnorderedScope(scope.to_vec()));
        }
        let out_cards: Vec<u32> = scope.iter().map(|&v| self.cards[v as usize]).collect();
        let out_len = cell_count(&out_cards) as usize;
        let mut out = vec![0.0f64; out_len];
        let scope_idx: Vec<usize> = scope.iter().map(|&v| v as usize).collect();
        for_each_cell(&self.cards, |idx, values| {
            let mut oidx = 0usize;
            for (pos, &var) in scope_idx.iter().enumerate() {
                oidx = oidx * out_cards[pos] as usize + values[var] as usize;
            }
            out[oidx] += self.probs[idx];
        });
        Ok(ProbTable {
            scope: scope.to_vec(),
            cards: out_cards,
            probs: out,
        })
    }

    /// Conditional distribution over `target` given the event `given`.
    pub fn conditional(&self, target: &[u32], given: &Assignment) -> Result<ProbTable> {
        let overlap: Vec<u32> = target
            .iter()
            .copied()
            .filter(|&v| given.value_of(v).is_some())
            .collect();
        if !overlap.is_empty() {
            return Err(FgError::OverlappingScopes(overlap));
        }
        let mut union: Vec<u32> = target.iter().copied().chain(given.scope().iter().copied()).collect();
        union.sort_unstable();
        let joint = self.marginal(&union)?;
        let target_cards: Vec<u32> = target.iter().map(|&v| self.cards[v as usize]).collect();
        let mut out = vec![0.0f64; cell_count(&target_cards) as usize];
        let mut denom = StableSum::new();
        for_each_cell(&joint.cards, |idx, values| {
            let consistent = given
                .scope()
                .iter()
                .all(|&g| {
                    let pos = joint.scope.binary_search(&g).unwrap();
                    values[pos] == given.value_of(g).unwrap()
                });
            if consistent {
                let mut tidx = 0usize;
                for (tpos, &t) in target.iter().enumerate() {
                    let pos = joint.scope.binary_search(&t).unwrap();
                    tidx = tidx * target_cards[tpos] as usize + values[pos] as usize;
                }
                out[tidx] += joint.probs[idx];
                denom.add(joint.probs[idx]);
            }
        });
        let z = denom.value();
        if z <= 0.0 {
            return Err(FgError::InvalidParameter(
                "conditioning event has zero probability".into(),
            ));
        }
        for v in &mut out {
            *v /= z;
        }
        Ok(ProbTable {
            scope: target.to_vec(),
            cards: target_cards,
            probs: out,
        })
    }

    /// Smallest single-variable conditional probability over all full
    /// assignments: the positivity level of the distribution.
    pub fn min_conditional_gamma(&self) -> f64 {
        let mut gamma = f64::INFINITY;
        for var in 0..self.n() {
            let stride = self.strides[var];
            let card = self.cards[var] as usize;
            for idx in 0..self.probs.len() {
                if !(idx / stride).is_multiple_of(card) {
                    continue; // visit each fiber once, at value 0
                }
                let mut total = 0.0;
                for v in 0..card {
                    total += self.probs[idx + v * stride];
                }
                if total <= 0.0 {
                    return 0.0;
                }
                for v in 0..card {
                    let c = self.probs[idx + v * stride] / total;
                    if c < gamma {
                        gamma = c;
                    }
                }
            }
        }
        gamma
    }

    /// Conditional entropy `H(X | Y)` in nats, computed as
    /// `H(X ∪ Y) − H(Y)`. The sets may overlap; `H(X | Y) = 0` whenever `X`
    /// is contained in `Y`.
    pub fn conditional_entropy(&self, x: &[u32], y: &[u32]) -> Result<f64> {
        let mut union: Vec<u32> = x.iter().chain(y.iter()).copied().collect();
        union.sort_unstable();
        union.dedup();
        let mut ys = y.to_vec();
        ys.sort_unstable();
        ys.dedup();
        let h_union = self.marginal(&union)?.entropy();
        let h_given = self.marginal(&ys)?.entropy();
        Ok(h_union - h_given)
    }
}

/// A normalized probability table over a sorted scope.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    pub scope: Vec<u32>,
    pub cards: Vec<u32>,
    pub probs: Vec<f64>,
}

impl ProbTable {
    pub fn prob(&self, values: &[u32]) -> f64 {
        self.probs[index_of(values, &self.cards)]
    }

    /// Shannon entropy in nats; zero-probability cells contribute nothing.
    pub fn entropy(&self) -> f64 {
        let mut acc = StableSum::new();
        for &p in &self.probs {
            if p > 0.0 {
                acc.add(-p * p.ln());
            }
        }
        acc.value()
    }

    pub fn total(&self) -> f64 {
        let mut acc = StableSum::new();
        for &p in &self.probs {
            acc.add(p);
        }
        acc.value()
    }
}

fn require_same_layout(p: &JointTable, q: &JointTable) -> Result<()> {
    if p.cards != q.cards {
        return Err(FgError::ScopeMismatch(
            "joint tables cover different variable layouts".into(),
        ));
    }
    Ok(())
}

/// Kullback–Leibler divergence `D(P || Q)` in nats. Requires `Q` positive
/// wherever `P` is.
pub fn kl_divergence(p: &JointTable, q: &JointTable) -> Result<f64> {
    require_same_layout(p, q)?;
    let mut acc = StableSum::new();
    for (i, (&pp, &qq)) in p.probs.iter().zip(q.probs.iter()).enumerate() {
        if pp == 0.0 {
            continue;
        }
        if qq <= 0.0 {
            return Err(FgError::NonFiniteEntry(i));
        }
        acc.add(pp * (pp / qq).ln());
    }
    Ok(acc.value())
}

/// `D(P || Q) + D(Q || P)`.
pub fn symmetric_kl(p: &JointTable, q: &JointTable) -> Result<f64> {
    Ok(kl_divergence(p, q)? + kl_divergence(q, p)?)
}

/// KL divergence divided by the number of variables (per-variable nats).
pub fn normalized_kl(p: &JointTable, q: &JointTable) -> Result<f64> {
    Ok(kl_divergence(p, q)? / p.n() as f64)
}

/// Symmetric KL divided by the number of variables.
pub fn normalized_symmetric_kl(p: &JointTable, q: &JointTable) -> Result<f64> {
    Ok(symmetric_kl(p, q)? / p.n() as f64)
}
