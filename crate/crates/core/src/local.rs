//! Exact conditionals from factor neighborhoods, without global inference.
//!
//! Conditioning a set of variables on (a superset of) its Markov blanket
//! renders the rest of the graph irrelevant: the conditional is the
//! normalized product of just the factors that touch the set. This makes
//! exact conditional queries cheap on arbitrarily large graphs, which is
//! what both the Gibbs sampler and ground-truth checks on long chains use.

use crate::canonical::DistributionAccess;
use crate::error::{FgError, Result};
use crate::model::{cell_count, for_each_cell, markov_blanket_of, Assignment, FactorGraph, VariableSpec};
use crate::oracle::StableSum;

/// Access that answers conditional queries exactly whenever the conditioning
/// set covers the event's Markov blanket. Joint queries are not supported.
pub struct LocalAccess<'a> {
    graph: &'a FactorGraph,
    scopes: Vec<Vec<u32>>,
}

impl<'a> LocalAccess<'a> {
    pub fn new(graph: &'a FactorGraph) -> Self {
        LocalAccess { graph, scopes: graph.scopes() }
    }
}

impl DistributionAccess for LocalAccess<'_> {
    fn variables(&self) -> &[VariableSpec] {
        self.graph.variables()
    }

    fn log_prob(&self, _event: &Assignment) -> Result<f64> {
        Err(FgError::UnsupportedQuery(
            "local access answers conditionals only; joint probabilities would need inference",
        ))
    }

    fn log_conditional(&self, event: &Assignment, given: &Assignment) -> Result<f64> {
        let blanket = markov_blanket_of(&self.scopes, event.scope());
        for var in &blanket {
            if given.value_of(*var).is_none() {
                return Err(FgError::UnsupportedQuery(
                    "conditioning set must cover the event's Markov blanket",
                ));
            }
        }
        // Normalized product of the factors touching the event's scope,
        // evaluated over all completions of that scope.
        let touching: Vec<usize> = self
            .scopes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().any(|v| event.value_of(*v).is_some()))
            .map(|(j, _)| j)
            .collect();
        let cards: Vec<u32> = event
            .scope()
            .iter()
            .map(|&v| self.graph.variables()[v as usize].cardinality)
            .collect();
        let score_of = |vals: &[u32]| -> Result<f64> {
            let joint = Assignment::new(event.scope().to_vec(), vals.to_vec())?.union(given)?;
            let mut s = 0.0;
            for &j in &touching {
                s += self.graph.factors()[j].log_value_in(&joint)?;
            }
            Ok(s)
        };
        let mut scores = Vec::with_capacity(cell_count(&cards) as usize);
        let mut fail: Option<FgError> = None;
        for_each_cell(&cards, |_, vals| {
            if fail.is_some() {
                return;
            }
            match score_of(vals) {
                Ok(s) => scores.push(s),
                Err(e) => fail = Some(e),
            }
        });
        if let Some(e) = fail {
            return Err(e);
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = StableSum::new();
        for &s in &scores {
            acc.add((s - max).exp());
        }
        let log_z = max + acc.value().ln();
        let event_score = score_of(event.values())?;
        Ok(event_score - log_z)
    }
}
