//! Seeded model families for experiments and tests.

use crate::error::{FgError, Result};
use crate::model::{cell_count, Factor, FactorGraph, VariableSpec};
use crate::rng::SplitMix64;

/// Topology of a generated model.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    /// Pairwise factors along a path: {0,1}, {1,2}, ...
    Chain,
    /// Pairwise factors along the rows and columns of the most nearly square
    /// grid whose cell count is `n`. Fails when `n` has no factorization
    /// into two sides >= 2.
    Grid,
    /// Pairwise factors from variable 0 to every other variable.
    Star,
    /// `factor_count` distinct random scopes of size <= `max_scope`, keeping
    /// every variable's factor membership at or below `max_degree`.
    Random {
        max_scope: usize,
        max_degree: usize,
        factor_count: usize,
    },
}

/// Builds a seeded model with `n` variables.
///
/// Cardinalities are drawn uniformly from `2..=max_cardinality` (all 2 when
/// `max_cardinality` is 2). Factor entries are log-uniform in
/// `[1, strength]`, i.e. log values uniform in `[0, ln strength]`; strength 1
/// produces the uniform distribution. Identical inputs always produce an
/// identical graph.
pub fn generate_model(
    family: &GraphFamily,
    n: usize,
    max_cardinality: u32,
    strength: f64,
    seed: u64,
) -> Result<FactorGraph> {
    if n == 0 {
        return Err(FgError::InvalidParameter("n must be positive".into()));
    }
    if max_cardinality < 2 {
        return Err(FgError::InvalidParameter(
            "max_cardinality must be at least 2".into(),
        ));
    }
    if strength < 1.0 || !strength.is_finite() {
        return Err(FgError::InvalidParameter(
            "strength must be a finite value >= 1".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let variables: Vec<VariableSpec> = (0..n as u32)
        .map(|id| {
            let card = if max_cardinality == 2 {
                2
            } else {
                2 + rng.next_index((max_cardinality - 1) as usize) as u32
            };
            VariableSpec::new(id, card)
        })
        .collect();

    let scopes = family_scopes(family, n, &mut rng)?;
    let log_strength = strength.ln();
    let mut factors = Vec::with_capacity(scopes.len());
    for scope in scopes {
        let cards: Vec<u32> = scope
            .iter()
            .map(|&v| variables[v as usize].cardinality)
            .collect();
        let len = cell_count(&cards) as usize;
        let table: Vec<f64> = (0..len).map(|_| rng.next_f64() * log_strength).collect();
        factors.push(Factor::new(scope, cards, table)?);
    }
    FactorGraph::new(variables, factors)
}

fn family_scopes(family: &GraphFamily, n: usize, rng: &mut SplitMix64) -> Result<Vec<Vec<u32>>> {
    match family {
        GraphFamily::Chain => {
            if n < 2 {
                return Err(FgError::InvalidParameter("a chain needs n >= 2".into()));
            }
            Ok((0..n as u32 - 1).map(|i| vec![i, i + 1]).collect())
        }
        GraphFamily::Star => {
            if n < 2 {
                return Err(FgError::InvalidParameter("a star needs n >= 2".into()));
            }
            Ok((1..n as u32).map(|i| vec![0, i]).collect())
        }
        GraphFamily::Grid => {
            let (rows, cols) = grid_sides(n).ok_or_else(|| {
                FgError::InvalidParameter(format!(
                    "n = {n} has no rectangular factorization with both sides >= 2"
                ))
            })?;
            let at = |r: usize, c: usize| (r * cols + c) as u32;
            let mut scopes = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        scopes.push(vec![at(r, c), at(r, c + 1)]);
                    }
                    if r + 1 < rows {
                        scopes.push(vec![at(r, c), at(r + 1, c)]);
                    }
                }
            }
            Ok(scopes)
        }
        GraphFamily::Random { max_scope, max_degree, factor_count } => {
            if *max_scope == 0 || *max_scope > n {
                return Err(FgError::InvalidParameter(
                    "max_scope must be in 1..=n".into(),
                ));
            }
            if *max_degree == 0 {
                return Err(FgError::InvalidParameter("max_degree must be positive".into()));
            }
            let mut degree = vec![0usize; n];
            let mut scopes: Vec<Vec<u32>> = Vec::new();
            let mut attempts = 0usize;
            let attempt_limit = factor_count.saturating_mul(200).max(1000);
            while scopes.len() < *factor_count {
                attempts += 1;
                if attempts > attempt_limit {
                    return Err(FgError::InvalidParameter(format!(
                        "could not place {factor_count} scopes within the degree bound {max_degree}"
                    )));
                }
                let size = 1 + rng.next_index(*max_scope);
                let mut scope: Vec<u32> = Vec::with_capacity(size);
                while scope.len() < size {
                    let v = rng.next_index(n) as u32;
                    if !scope.contains(&v) {
                        scope.push(v);
                    }
                }
                scope.sort_unstable();
                if scopes.contains(&scope) {
                    continue;
                }
                if scope.iter().any(|&v| degree[v as usize] >= *max_degree) {
                    continue;
                }
                for &v in &scope {
                    degree[v as usize] += 1;
                }
                scopes.push(scope);
            }
            Ok(scopes)
        }
    }
}

/// Most nearly square pair of sides `(rows, cols)` with `rows * cols == n`.
fn grid_sides(n: usize) -> Option<(usize, usize)> {
    let mut best = None;
    let mut d = 2usize;
    while d * d <= n {
        if n.is_multiple_of(d) && n / d >= 2 {
            best = Some((d, n / d));
        }
        d += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::JointTable;

    #[test]
    fn chain_has_adjacent_pair_scopes() {
        let g = generate_model(&GraphFamily::Chain, 5, 2, 3.0, 1).unwrap();
        assert_eq!(
            g.scopes(),
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4]]
        );
        assert_eq!(g.max_scope_size(), 2);
    }

    #[test]
    fn star_blankets_route_through_the_hub() {
        let g = generate_model(&GraphFamily::Star, 5, 2, 3.0, 1).unwrap();
        assert_eq!(g.markov_blanket(&[3]).unwrap(), vec![0]);
        assert_eq!(g.markov_blanket(&[0]).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn grid_is_rectangular_or_rejected() {
        let g = generate_model(&GraphFamily::Grid, 6, 2, 2.0, 1).unwrap();
        assert_eq!(g.factors().len(), 7); // 2x3 grid: 4 horizontal + 3 vertical
        assert!(generate_model(&GraphFamily::Grid, 7, 2, 2.0, 1).is_err());
    }

    #[test]
    fn strength_one_is_uniform() {
        let g = generate_model(&GraphFamily::Chain, 4, 2, 1.0, 3).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        for &p in joint.probs() {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entries_are_log_uniform_in_range() {
        let g = generate_model(&GraphFamily::Chain, 6, 3, 3.0, 9).unwrap();
        for f in g.factors() {
            for &v in f.log_values() {
                assert!((0.0..3f64.ln()).contains(&v));
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate_model(&GraphFamily::Random { max_scope: 3, max_degree: 2, factor_count: 4 }, 6, 3, 3.0, 42).unwrap();
        let b = generate_model(&GraphFamily::Random { max_scope: 3, max_degree: 2, factor_count: 4 }, 6, 3, 3.0, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_model(&GraphFamily::Random { max_scope: 3, max_degree: 2, factor_count: 4 }, 6, 3, 3.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_family_respects_degree_bound() {
        let g = generate_model(
            &GraphFamily::Random { max_scope: 2, max_degree: 2, factor_count: 6 },
            8,
            2,
            2.0,
            7,
        )
        .unwrap();
        let mut degree = [0usize; 8];
        for f in g.factors() {
            for &v in f.scope() {
                degree[v as usize] += 1;
            }
        }
        assert!(degree.iter().all(|&d| d <= 2));
        assert_eq!(g.factors().len(), 6);
    }
}
