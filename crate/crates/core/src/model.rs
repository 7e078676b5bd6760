//! Variables, assignments, factors, and the factor graph itself.
//!
//! Conventions used throughout the crate:
//!
//! * variable ids are dense `0..n` and every scope is a strictly increasing
//!   id list, so a scope is simultaneously a set and a canonical ordering;
//! * factor tables store natural-log values, row-major, with the **last**
//!   scope variable varying fastest;
//! * scope families are ordered by size first, then lexicographically.

use crate::error::{FgError, Result};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// One discrete variable: dense id, number of states, optional display name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub id: u32,
    pub cardinality: u32,
    pub name: Option<String>,
}

impl VariableSpec {
    pub fn new(id: u32, cardinality: u32) -> Self {
        VariableSpec { id, cardinality, name: None }
    }

    pub fn named(id: u32, cardinality: u32, name: impl Into<String>) -> Self {
        VariableSpec { id, cardinality, name: Some(name.into()) }
    }

    /// Display name, falling back to `x<id>`.
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("x{}", self.id))
    }
}

/// A (possibly partial) assignment: values attached to a sorted scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    scope: Vec<u32>,
    values: Vec<u32>,
}

impl Assignment {
    /// Partial assignment over `scope` (strictly increasing ids).
    pub fn new(scope: Vec<u32>, values: Vec<u32>) -> Result<Self> {
        if scope.len() != values.len() {
            return Err(FgError::ScopeMismatch(format!(
                "scope has {} ids but {} values were given",
                scope.len(),
                values.len()
            )));
        }
        require_sorted_set(&scope)?;
        Ok(Assignment { scope, values })
    }

    /// Full assignment over variables `0..values.len()`.
    pub fn full(values: Vec<u32>) -> Self {
        let scope = (0..values.len() as u32).collect();
        Assignment { scope, values }
    }

    /// The empty assignment (used as a neutral conditioning set).
    pub fn empty() -> Self {
        Assignment { scope: Vec::new(), values: Vec::new() }
    }

    pub fn scope(&self) -> &[u32] {
        &self.scope
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.scope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scope.is_empty()
    }

    /// True when the assignment covers exactly the variables `0..n`.
    pub fn is_full_for(&self, n: usize) -> bool {
        self.scope.len() == n && self.scope.iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    /// Value of `var`, if it is in scope.
    pub fn value_of(&self, var: u32) -> Option<u32> {
        self.scope
            .binary_search(&var)
            .ok()
            .map(|pos| self.values[pos])
    }

    /// Projects onto `scope`, which must be contained in this assignment.
    pub fn restrict_to(&self, scope: &[u32]) -> Result<Assignment> {
        let mut values = Vec::with_capacity(scope.len());
        for &var in scope {
            match self.value_of(var) {
                Some(v) => values.push(v),
                None => return Err(FgError::NotASubset(scope.to_vec())),
            }
        }
        Assignment::new(scope.to_vec(), values)
    }

    /// Merges two assignments with disjoint scopes.
    pub fn union(&self, other: &Assignment) -> Result<Assignment> {
        let shared: Vec<u32> = self
            .scope
            .iter()
            .copied()
            .filter(|v| other.value_of(*v).is_some())
            .collect();
        if !shared.is_empty() {
            return Err(FgError::OverlappingScopes(shared));
        }
        let mut pairs: Vec<(u32, u32)> = self
            .scope
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .chain(other.scope.iter().copied().zip(other.values.iter().copied()))
            .collect();
        pairs.sort_unstable_by_key(|&(var, _)| var);
        let (scope, values) = pairs.into_iter().unzip();
        Ok(Assignment { scope, values })
    }
}

/// Builds the assignment over `partial`'s scope that keeps `partial`'s value
/// on the variables in `kept` and takes the `baseline` value everywhere else.
///
/// `kept` must be a subset of `partial`'s scope, and `baseline` must cover
/// every variable of that scope.
pub fn substitute_defaults(
    kept: &[u32],
    partial: &Assignment,
    baseline: &Assignment,
) -> Result<Assignment> {
    require_sorted_set(kept)?;
    for &var in kept {
        if partial.value_of(var).is_none() {
            return Err(FgError::NotASubset(kept.to_vec()));
        }
    }
    let mut values = Vec::with_capacity(partial.len());
    for (pos, &var) in partial.scope().iter().enumerate() {
        if kept.binary_search(&var).is_ok() {
            values.push(partial.values()[pos]);
        } else {
            match baseline.value_of(var) {
                Some(v) => values.push(v),
                None => {
                    return Err(FgError::ScopeMismatch(format!(
                        "baseline does not cover variable {var}"
                    )))
                }
            }
        }
    }
    Assignment::new(partial.scope().to_vec(), values)
}

/// A positive factor stored as natural-log values over its scope.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<u32>,
    cards: Vec<u32>,
    log_values: Vec<f64>,
}

impl Factor {
    /// `cards[i]` is the cardinality of `scope[i]`; `log_values` must have
    /// one finite entry per joint value of the scope.
    pub fn new(scope: Vec<u32>, cards: Vec<u32>, log_values: Vec<f64>) -> Result<Self> {
        if scope.is_empty() {
            return Err(FgError::EmptyScope);
        }
        require_sorted_set(&scope)?;
        if cards.len() != scope.len() {
            return Err(FgError::ScopeMismatch(format!(
                "{} cardinalities for a scope of {} variables",
                cards.len(),
                scope.len()
            )));
        }
        for (pos, &card) in cards.iter().enumerate() {
            if card < 2 {
                return Err(FgError::InvalidParameter(format!(
                    "variable {} needs cardinality >= 2, got {card}",
                    scope[pos]
                )));
            }
        }
        let expected = cell_count(&cards);
        if expected > usize::MAX as u128 || log_values.len() != expected as usize {
            return Err(FgError::TableSizeMismatch {
                expected: expected.min(usize::MAX as u128) as usize,
                got: log_values.len(),
            });
        }
        if let Some(bad) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(FgError::NonFiniteEntry(bad));
        }
        Ok(Factor { scope, cards, log_values })
    }

    /// The all-ones factor (every log value zero) over `scope`.
    pub fn unit(scope: Vec<u32>, cards: Vec<u32>) -> Result<Self> {
        let len = cell_count(&cards) as usize;
        Factor::new(scope, cards, vec![0.0; len])
    }

    pub fn scope(&self) -> &[u32] {
        &self.scope
    }

    pub fn cards(&self) -> &[u32] {
        &self.cards
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn log_values_mut(&mut self) -> &mut [f64] {
        &mut self.log_values
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// Row-major index of `values` (last scope variable fastest).
    pub fn index_of(&self, values: &[u32]) -> usize {
        index_of(values, &self.cards)
    }

    /// Log value at `values`, given in scope order.
    pub fn log_value(&self, values: &[u32]) -> f64 {
        self.log_values[self.index_of(values)]
    }

    /// Log value at the restriction of `x` to this factor's scope.
    pub fn log_value_in(&self, x: &Assignment) -> Result<f64> {
        let mut values = Vec::with_capacity(self.scope.len());
        for (pos, &var) in self.scope.iter().enumerate() {
            let v = x
                .value_of(var)
                .ok_or_else(|| FgError::NotASubset(self.scope.clone()))?;
            if v >= self.cards[pos] {
                return Err(FgError::ValueOutOfRange {
                    variable: var,
                    value: v,
                    cardinality: self.cards[pos],
                });
            }
            values.push(v);
        }
        Ok(self.log_value(&values))
    }

    /// Largest absolute log value in the table.
    pub fn max_abs_log(&self) -> f64 {
        self.log_values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// True when every entry is within `tol` of zero (an all-ones factor).
    pub fn is_unit(&self, tol: f64) -> bool {
        self.log_values.iter().all(|v| v.abs() <= tol)
    }
}

/// A factor graph: dense variables plus positive factors over them.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    variables: Vec<VariableSpec>,
    factors: Vec<Factor>,
}

impl FactorGraph {
    /// Validates that ids are dense, cardinalities are >= 2, and every factor
    /// scope refers to known variables with matching cardinalities.
    pub fn new(variables: Vec<VariableSpec>, factors: Vec<Factor>) -> Result<Self> {
        if variables.is_empty() {
            return Err(FgError::InvalidParameter("a graph needs at least one variable".into()));
        }
        for (i, var) in variables.iter().enumerate() {
            if var.id as usize != i {
                return Err(FgError::InvalidParameter(format!(
                    "variable ids must be dense 0..n, found id {} at position {i}",
                    var.id
                )));
            }
            if var.cardinality < 2 {
                return Err(FgError::InvalidParameter(format!(
                    "variable {} needs cardinality >= 2, got {}",
                    var.id, var.cardinality
                )));
            }
        }
        for factor in &factors {
            for (pos, &var) in factor.scope().iter().enumerate() {
                let spec = variables
                    .get(var as usize)
                    .ok_or(FgError::UnknownVariable(var))?;
                if spec.cardinality != factor.cards()[pos] {
                    return Err(FgError::ScopeMismatch(format!(
                        "factor declares cardinality {} for variable {var}, graph says {}",
                        factor.cards()[pos],
                        spec.cardinality
                    )));
                }
            }
        }
        Ok(FactorGraph { variables, factors })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn cardinalities(&self) -> Vec<u32> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn scopes(&self) -> Vec<Vec<u32>> {
        self.factors.iter().map(|f| f.scope().to_vec()).collect()
    }

    /// Number of joint configurations (may be astronomically large).
    pub fn state_count(&self) -> u128 {
        cell_count(&self.cardinalities())
    }

    /// Largest factor scope size; zero for a factor-free graph.
    pub fn max_scope_size(&self) -> usize {
        self.factors.iter().map(|f| f.scope().len()).max().unwrap_or(0)
    }

    /// Largest Markov blanket over the factor scopes themselves.
    pub fn max_blanket_size(&self) -> usize {
        self.factors
            .iter()
            .map(|f| markov_blanket_of(&self.scopes(), f.scope()).len())
            .max()
            .unwrap_or(0)
    }

    /// Markov blanket of `target`: union of all factor scopes that intersect
    /// it, minus the target itself. Result is sorted.
    pub fn markov_blanket(&self, target: &[u32]) -> Result<Vec<u32>> {
        for &var in target {
            if var as usize >= self.n() {
                return Err(FgError::UnknownVariable(var));
            }
        }
        Ok(markov_blanket_of(&self.scopes(), target))
    }

    /// Sum of log factor values at the full assignment `x` (the log of the
    /// unnormalized density). An empty factor list scores zero.
    pub fn unnormalized_score(&self, x: &Assignment) -> Result<f64> {
        self.validate_full(x)?;
        let mut total = 0.0;
        for factor in &self.factors {
            total += factor.log_value_in(x)?;
        }
        Ok(total)
    }

    pub(crate) fn validate_full(&self, x: &Assignment) -> Result<()> {
        if !x.is_full_for(self.n()) {
            return Err(FgError::ScopeMismatch(format!(
                "expected a full assignment over {} variables",
                self.n()
            )));
        }
        for (i, &v) in x.values().iter().enumerate() {
            let card = self.variables[i].cardinality;
            if v >= card {
                return Err(FgError::ValueOutOfRange {
                    variable: i as u32,
                    value: v,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }
}

/// Markov blanket of `target` with respect to a family of scopes: every
/// variable that shares a scope with the target, minus the target itself.
pub fn markov_blanket_of(scopes: &[Vec<u32>], target: &[u32]) -> Vec<u32> {
    let target_set: BTreeSet<u32> = target.iter().copied().collect();
    let mut blanket = BTreeSet::new();
    for scope in scopes {
        if scope.iter().any(|v| target_set.contains(v)) {
            blanket.extend(scope.iter().copied());
        }
    }
    blanket.into_iter().filter(|v| !target_set.contains(v)).collect()
}

/// Orders scopes by size first, then lexicographically.
pub fn canonical_scope_cmp(a: &[u32], b: &[u32]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// All non-empty subsets of the given scopes, deduplicated and returned in
/// canonical order (size, then lexicographic). Input scopes must be sorted
/// sets; the empty scope is rejected.
pub fn scope_closure(scopes: &[Vec<u32>]) -> Result<Vec<Vec<u32>>> {
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    for scope in scopes {
        if scope.is_empty() {
            return Err(FgError::EmptyScope);
        }
        require_sorted_set(scope)?;
        let s = scope.len();
        for mask in 1u32..(1 << s) {
            let subset: Vec<u32> = (0..s)
                .filter(|p| mask & (1 << p) != 0)
                .map(|p| scope[p])
                .collect();
            seen.insert(subset);
        }
    }
    let mut closure: Vec<Vec<u32>> = seen.into_iter().collect();
    closure.sort_by(|a, b| canonical_scope_cmp(a, b));
    Ok(closure)
}

/// Number of cells in a table over variables with the given cardinalities.
pub fn cell_count(cards: &[u32]) -> u128 {
    cards.iter().fold(1u128, |acc, &c| acc.saturating_mul(c as u128))
}

/// Row-major strides (last variable fastest).
pub fn strides(cards: &[u32]) -> Vec<usize> {
    let mut out = vec![1usize; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * cards[i + 1] as usize;
    }
    out
}

/// Row-major index of `values` under `cards`.
pub fn index_of(values: &[u32], cards: &[u32]) -> usize {
    debug_assert_eq!(values.len(), cards.len());
    let mut idx = 0usize;
    for (pos, &v) in values.iter().enumerate() {
        debug_assert!(v < cards[pos]);
        idx = idx * cards[pos] as usize + v as usize;
    }
    idx
}

/// Visits every cell of a table in layout order, passing the flat index and
/// the current value tuple. The value buffer is reused between calls.
pub fn for_each_cell(cards: &[u32], mut f: impl FnMut(usize, &[u32])) {
    let total = cell_count(cards);
    assert!(total <= usize::MAX as u128, "table too large to enumerate");
    let mut values = vec![0u32; cards.len()];
    for idx in 0..total as usize {
        f(idx, &values);
        for pos in (0..cards.len()).rev() {
            values[pos] += 1;
            if values[pos] < cards[pos] {
                break;
            }
            values[pos] = 0;
        }
    }
}

fn require_sorted_set(scope: &[u32]) -> Result<()> {
    if scope.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FgError::UnorderedScope(scope.to_vec()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_scopes(n: u32) -> Vec<Vec<u32>> {
        (0..n - 1).map(|i| vec![i, i + 1]).collect()
    }

    #[test]
    fn blanket_on_a_chain() {
        let scopes = chain_scopes(5);
        assert_eq!(markov_blanket_of(&scopes, &[2]), vec![1, 3]);
        assert_eq!(markov_blanket_of(&scopes, &[0]), vec![1]);
        assert_eq!(markov_blanket_of(&scopes, &[1, 2]), vec![0, 3]);
    }

    #[test]
    fn blanket_of_everything_is_empty() {
        let scopes = chain_scopes(4);
        assert!(markov_blanket_of(&scopes, &[0, 1, 2, 3]).is_empty());
    }

    #[test]
    fn blanket_ignores_untouched_scopes() {
        let scopes = vec![vec![0, 1], vec![2, 3]];
        assert_eq!(markov_blanket_of(&scopes, &[0]), vec![1]);
    }

    #[test]
    fn blanket_symmetry_on_singletons() {
        // i in MB({j}) iff j in MB({i}), for random scope families.
        let mut rng = crate::rng::SplitMix64::new(99);
        for _ in 0..50 {
            let n = 3 + rng.next_index(5) as u32;
            let mut scopes = Vec::new();
            for _ in 0..n {
                let size = 1 + rng.next_index(3).min(n as usize - 1);
                let mut s: Vec<u32> = Vec::new();
                while s.len() < size {
                    let v = rng.next_index(n as usize) as u32;
                    if !s.contains(&v) {
                        s.push(v);
                    }
                }
                s.sort_unstable();
                scopes.push(s);
            }
            for i in 0..n {
                for j in 0..n {
                    let i_in_j = markov_blanket_of(&scopes, &[j]).contains(&i);
                    let j_in_i = markov_blanket_of(&scopes, &[i]).contains(&j);
                    assert_eq!(i_in_j, j_in_i);
                }
            }
        }
    }

    #[test]
    fn closure_of_a_triple() {
        let closure = scope_closure(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(
            closure,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2],
            ]
        );
    }

    #[test]
    fn closure_deduplicates_shared_subsets() {
        let closure = scope_closure(&[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(
            closure,
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]]
        );
    }

    #[test]
    fn closure_is_subset_closed() {
        let mut rng = crate::rng::SplitMix64::new(3);
        for _ in 0..30 {
            let mut scopes = Vec::new();
            for _ in 0..4 {
                let size = 1 + rng.next_index(3);
                let mut s = Vec::new();
                while s.len() < size {
                    let v = rng.next_index(7) as u32;
                    if !s.contains(&v) {
                        s.push(v);
                    }
                }
                s.sort_unstable();
                scopes.push(s);
            }
            let closure = scope_closure(&scopes).unwrap();
            let re_closed = scope_closure(&closure).unwrap();
            assert_eq!(closure, re_closed);
            // canonical order: size then lexicographic
            for w in closure.windows(2) {
                assert_eq!(canonical_scope_cmp(&w[0], &w[1]), Ordering::Less);
            }
        }
    }

    #[test]
    fn closure_rejects_empty_scope() {
        assert!(matches!(
            scope_closure(&[vec![]]),
            Err(FgError::EmptyScope)
        ));
    }

    #[test]
    fn defaults_substitution() {
        let baseline = Assignment::full(vec![0, 0, 0, 0]);
        let d = Assignment::new(vec![1, 3], vec![2, 1]).unwrap();
        let kept_both = substitute_defaults(&[1, 3], &d, &baseline).unwrap();
        assert_eq!(kept_both, d);
        let kept_one = substitute_defaults(&[3], &d, &baseline).unwrap();
        assert_eq!(kept_one.values(), &[0, 1]);
        let kept_none = substitute_defaults(&[], &d, &baseline).unwrap();
        assert_eq!(kept_none.values(), &[0, 0]);
    }

    #[test]
    fn defaults_substitution_is_idempotent() {
        let baseline = Assignment::full(vec![1, 0, 2]);
        let d = Assignment::new(vec![0, 2], vec![0, 1]).unwrap();
        let once = substitute_defaults(&[2], &d, &baseline).unwrap();
        let twice = substitute_defaults(&[2], &once, &baseline).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn defaults_substitution_requires_subset() {
        let baseline = Assignment::full(vec![0, 0]);
        let d = Assignment::new(vec![0], vec![1]).unwrap();
        assert!(substitute_defaults(&[1], &d, &baseline).is_err());
    }

    fn tiny_graph() -> FactorGraph {
        // two binary variables, one pairwise factor with values 1,2,3,4
        let f = Factor::new(
            vec![0, 1],
            vec![2, 2],
            vec![0.0, 2f64.ln(), 3f64.ln(), 4f64.ln()],
        )
        .unwrap();
        FactorGraph::new(
            vec![VariableSpec::new(0, 2), VariableSpec::new(1, 2)],
            vec![f],
        )
        .unwrap()
    }

    #[test]
    fn unnormalized_score_sums_logs() {
        let g = tiny_graph();
        let x = Assignment::full(vec![1, 0]);
        assert!((g.unnormalized_score(&x).unwrap() - 3f64.ln()).abs() < 1e-15);
        let x = Assignment::full(vec![1, 1]);
        assert!((g.unnormalized_score(&x).unwrap() - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_factor_list_scores_zero() {
        let g = FactorGraph::new(
            vec![VariableSpec::new(0, 2), VariableSpec::new(1, 3)],
            vec![],
        )
        .unwrap();
        let x = Assignment::full(vec![1, 2]);
        assert_eq!(g.unnormalized_score(&x).unwrap(), 0.0);
    }

    #[test]
    fn score_shift_moves_every_assignment_equally() {
        let g = tiny_graph();
        let mut shifted_factors = g.factors().to_vec();
        for v in shifted_factors[0].log_values_mut() {
            *v += 0.7;
        }
        let shifted = FactorGraph::new(g.variables().to_vec(), shifted_factors).unwrap();
        for a in 0..2u32 {
            for b in 0..2u32 {
                let x = Assignment::full(vec![a, b]);
                let d = shifted.unnormalized_score(&x).unwrap() - g.unnormalized_score(&x).unwrap();
                assert!((d - 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn factor_indexing_is_last_variable_fastest() {
        let f = Factor::new(
            vec![4, 7],
            vec![2, 3],
            vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        )
        .unwrap();
        assert_eq!(f.index_of(&[0, 0]), 0);
        assert_eq!(f.index_of(&[0, 2]), 2);
        assert_eq!(f.index_of(&[1, 0]), 3);
        assert_eq!(f.index_of(&[1, 2]), 5);
    }

    #[test]
    fn factor_rejects_bad_tables() {
        assert!(Factor::new(vec![0], vec![2], vec![0.0]).is_err());
        assert!(Factor::new(vec![0], vec![2], vec![0.0, f64::NAN]).is_err());
        assert!(Factor::new(vec![1, 0], vec![2, 2], vec![0.0; 4]).is_err());
        assert!(Factor::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn graph_rejects_cardinality_mismatch() {
        let f = Factor::new(vec![0], vec![3], vec![0.0, 0.0, 0.0]).unwrap();
        let err = FactorGraph::new(vec![VariableSpec::new(0, 2)], vec![f]);
        assert!(err.is_err());
    }

    #[test]
    fn graph_rejects_unknown_variable() {
        let f = Factor::new(vec![5], vec![2], vec![0.0, 0.0]).unwrap();
        let err = FactorGraph::new(vec![VariableSpec::new(0, 2)], vec![f]);
        assert!(matches!(err, Err(FgError::UnknownVariable(5))));
    }

    #[test]
    fn blanket_sizes_on_chain_graph() {
        let g = crate::generate::generate_model(
            &crate::generate::GraphFamily::Chain,
            6,
            2,
            2.0,
            1,
        )
        .unwrap();
        assert_eq!(g.max_scope_size(), 2);
        assert_eq!(g.max_blanket_size(), 2);
    }

    #[test]
    fn cell_enumeration_matches_index_of() {
        let cards = vec![2u32, 3, 2];
        let mut seen = Vec::new();
        for_each_cell(&cards, |idx, values| {
            assert_eq!(index_of(values, &cards), idx);
            seen.push(values.to_vec());
        });
        assert_eq!(seen.len(), 12);
        assert_eq!(seen[0], vec![0, 0, 0]);
        assert_eq!(seen[1], vec![0, 0, 1]);
        assert_eq!(seen[11], vec![1, 2, 1]);
    }
}
