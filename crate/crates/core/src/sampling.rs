//! Seeded samplers and datasets with cached count tables.

use crate::canonical::{AccessMode, DistributionAccess};
use crate::error::{FgError, Result};
use crate::model::{cell_count, index_of, Assignment, FactorGraph, VariableSpec};
use crate::oracle::{JointTable, StableSum};
use crate::rng::SplitMix64;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Rows of sampled value indices plus lazily built contingency tables.
///
/// Count tables are keyed by scope and filled on first use; lookups after
/// that are array reads. The cache is behind a lock so read-mostly sharing
/// across threads is safe, and counts depend only on the rows, never on
/// which thread populated the cache first.
#[derive(Debug)]
pub struct Dataset {
    variables: Vec<VariableSpec>,
    rows: Vec<Vec<u32>>,
    seed: u64,
    cache: RwLock<HashMap<Vec<u32>, Arc<Vec<u64>>>>,
}

impl Clone for Dataset {
    fn clone(&self) -> Self {
        Dataset {
            variables: self.variables.clone(),
            rows: self.rows.clone(),
            seed: self.seed,
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.rows == other.rows && self.seed == other.seed
    }
}

impl Dataset {
    pub fn new(variables: Vec<VariableSpec>, rows: Vec<Vec<u32>>, seed: u64) -> Result<Self> {
        for row in &rows {
            if row.len() != variables.len() {
                return Err(FgError::ScopeMismatch(format!(
                    "row has {} values, expected {}",
                    row.len(),
                    variables.len()
                )));
            }
            for (i, &v) in row.iter().enumerate() {
                if v >= variables[i].cardinality {
                    return Err(FgError::ValueOutOfRange {
                        variable: i as u32,
                        value: v,
                        cardinality: variables[i].cardinality,
                    });
                }
            }
        }
        Ok(Dataset { variables, rows, seed, cache: RwLock::new(HashMap::new()) })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The first `m` rows as a new dataset (same seed stamp, fresh cache).
    pub fn truncated(&self, m: usize) -> Result<Dataset> {
        if m > self.rows.len() {
            return Err(FgError::InvalidParameter(format!(
                "cannot truncate {} rows to {m}",
                self.rows.len()
            )));
        }
        Dataset::new(self.variables.clone(), self.rows[..m].to_vec(), self.seed)
    }

    /// Dense joint counts over `scope` (sorted ids), cached after first use.
    pub fn count_table(&self, scope: &[u32]) -> Result<Arc<Vec<u64>>> {
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FgError::UnorderedScope(scope.to_vec()));
        }
        for &v in scope {
            if v as usize >= self.variables.len() {
                return Err(FgError::UnknownVariable(v));
            }
        }
        if let Some(hit) = self.cache.read().unwrap().get(scope) {
            return Ok(hit.clone());
        }
        let cards: Vec<u32> = scope
            .iter()
            .map(|&v| self.variables[v as usize].cardinality)
            .collect();
        let len = cell_count(&cards);
        if len > (1u128 << 28) {
            return Err(FgError::CapExceeded { cells: len, cap: 1 << 28 });
        }
        let mut table = vec![0u64; len as usize];
        for row in &self.rows {
            let mut idx = 0usize;
            for (pos, &var) in scope.iter().enumerate() {
                idx = idx * cards[pos] as usize + row[var as usize] as usize;
            }
            table[idx] += 1;
        }
        let table = Arc::new(table);
        self.cache
            .write()
            .unwrap()
            .entry(scope.to_vec())
            .or_insert_with(|| table.clone());
        Ok(table)
    }

    /// Number of rows matching `event`.
    pub fn count(&self, event: &Assignment) -> Result<u64> {
        if event.is_empty() {
            return Ok(self.m() as u64);
        }
        let table = self.count_table(event.scope())?;
        let cards: Vec<u32> = event
            .scope()
            .iter()
            .map(|&v| self.variables[v as usize].cardinality)
            .collect();
        for (pos, &v) in event.values().iter().enumerate() {
            if v >= cards[pos] {
                return Err(FgError::ValueOutOfRange {
                    variable: event.scope()[pos],
                    value: v,
                    cardinality: cards[pos],
                });
            }
        }
        Ok(table[index_of(event.values(), &cards)])
    }

    /// Plug-in log-probability `ln(count(event) / m)`; fails on zero counts.
    pub fn empirical_log_prob(&self, event: &Assignment) -> Result<f64> {
        let c = self.count(event)?;
        if c == 0 {
            return Err(FgError::ZeroCount { scope: event.scope().to_vec(), given: vec![] });
        }
        Ok((c as f64 / self.m() as f64).ln())
    }

    /// Plug-in conditional `ln(count(event ∧ given) / count(given))`;
    /// fails when either count is zero.
    pub fn empirical_log_conditional(
        &self,
        event: &Assignment,
        given: &Assignment,
    ) -> Result<f64> {
        let joint = event.union(given)?;
        let c_given = self.count(given)?;
        if c_given == 0 {
            return Err(FgError::ZeroCount {
                scope: event.scope().to_vec(),
                given: given.scope().to_vec(),
            });
        }
        let c_joint = self.count(&joint)?;
        if c_joint == 0 {
            return Err(FgError::ZeroCount {
                scope: event.scope().to_vec(),
                given: given.scope().to_vec(),
            });
        }
        Ok((c_joint as f64 / c_given as f64).ln())
    }
}

/// Distribution access backed by sample counts, in strict or clipped mode.
pub struct EmpiricalAccess<'a> {
    data: &'a Dataset,
    mode: AccessMode,
}

impl<'a> EmpiricalAccess<'a> {
    pub fn new(data: &'a Dataset, mode: AccessMode) -> Self {
        EmpiricalAccess { data, mode }
    }

    fn finish(&self, raw: Result<f64>) -> Result<f64> {
        match (raw, self.mode) {
            (Ok(v), AccessMode::Strict) => Ok(v),
            (Ok(v), AccessMode::Clipped { log_floor }) => Ok(v.max(log_floor)),
            (Err(FgError::ZeroCount { .. }), AccessMode::Clipped { log_floor }) => Ok(log_floor),
            (Err(e), _) => Err(e),
        }
    }
}

impl DistributionAccess for EmpiricalAccess<'_> {
    fn variables(&self) -> &[VariableSpec] {
        self.data.variables()
    }

    fn log_prob(&self, event: &Assignment) -> Result<f64> {
        self.finish(self.data.empirical_log_prob(event))
    }

    fn log_conditional(&self, event: &Assignment, given: &Assignment) -> Result<f64> {
        self.finish(self.data.empirical_log_conditional(event, given))
    }
}

/// Draws `m` independent rows from an enumerated joint by inverse-CDF over
/// the table order. Deterministic in `seed`.
pub fn exact_sample(joint: &JointTable, m: usize, seed: u64) -> Result<Dataset> {
    let mut cdf = Vec::with_capacity(joint.probs().len());
    let mut acc = StableSum::new();
    for &p in joint.probs() {
        acc.add(p);
        cdf.push(acc.value());
    }
    let cards = joint.cards().to_vec();
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rng.next_f64();
        // first index with cdf[idx] > u
        let mut lo = 0usize;
        let mut hi = cdf.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cdf[mid] > u {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        rows.push(decode(lo, &cards));
    }
    Dataset::new(joint.variables().to_vec(), rows, seed)
}

fn decode(mut idx: usize, cards: &[u32]) -> Vec<u32> {
    let mut row = vec![0u32; cards.len()];
    for pos in (0..cards.len()).rev() {
        row[pos] = (idx % cards[pos] as usize) as u32;
        idx /= cards[pos] as usize;
    }
    row
}

/// Systematic-scan Gibbs sampler.
///
/// Starts from the all-zeros state, runs `burn_in` full sweeps, then records
/// one row every `thinning` sweeps until `m` rows exist. Site updates draw
/// from the exact single-variable conditional given the current neighbors,
/// so only factors adjacent to the site are evaluated — graphs far beyond
/// the enumeration cap are fine.
pub fn gibbs_sample(
    graph: &FactorGraph,
    m: usize,
    burn_in: usize,
    thinning: usize,
    seed: u64,
) -> Result<Dataset> {
    if thinning == 0 {
        return Err(FgError::InvalidParameter("thinning must be >= 1".into()));
    }
    let n = graph.n();
    let cards = graph.cardinalities();
    // adjacency: variable -> indices of factors touching it
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, f) in graph.factors().iter().enumerate() {
        for &v in f.scope() {
            adjacent[v as usize].push(j);
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut state = vec![0u32; n];
    let mut weights: Vec<f64> = Vec::new();

    let mut sweep = |state: &mut Vec<u32>, rng: &mut SplitMix64| {
        for site in 0..n {
            let card = cards[site] as usize;
            weights.clear();
            let mut max = f64::NEG_INFINITY;
            for v in 0..card as u32 {
                state[site] = v;
                let mut score = 0.0;
                for &j in &adjacent[site] {
                    let f = &graph.factors()[j];
                    let mut idx = 0usize;
                    for (pos, &var) in f.scope().iter().enumerate() {
                        idx = idx * f.cards()[pos] as usize + state[var as usize] as usize;
                    }
                    score += f.log_values()[idx];
                }
                weights.push(score);
                if score > max {
                    max = score;
                }
            }
            let mut total = 0.0;
            for w in weights.iter_mut() {
                *w = (*w - max).exp();
                total += *w;
            }
            let u = rng.next_f64() * total;
            let mut cum = 0.0;
            let mut chosen = card - 1;
            for (v, &w) in weights.iter().enumerate() {
                cum += w;
                if u < cum {
                    chosen = v;
                    break;
                }
            }
            state[site] = chosen as u32;
        }
    };

    for _ in 0..burn_in {
        sweep(&mut state, &mut rng);
    }
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        for _ in 0..thinning {
            sweep(&mut state, &mut rng);
        }
        rows.push(state.clone());
    }
    Dataset::new(graph.variables().to_vec(), rows, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_model, GraphFamily};
    use crate::oracle;

    fn bernoulli_joint(p1: f64) -> JointTable {
        JointTable::from_probs(vec![VariableSpec::new(0, 2)], vec![1.0 - p1, p1]).unwrap()
    }

    #[test]
    fn exact_sampling_is_deterministic() {
        let joint = bernoulli_joint(0.75);
        let a = exact_sample(&joint, 100, 9).unwrap();
        let b = exact_sample(&joint, 100, 9).unwrap();
        assert_eq!(a.rows(), b.rows());
        let c = exact_sample(&joint, 100, 10).unwrap();
        assert_ne!(a.rows(), c.rows());
        assert_eq!(a.seed(), 9);
    }

    #[test]
    fn exact_sampling_tracks_the_distribution() {
        let joint = bernoulli_joint(0.75);
        let data = exact_sample(&joint, 100_000, 1).unwrap();
        let ones = data.rows().iter().filter(|r| r[0] == 1).count() as f64;
        let freq = ones / data.m() as f64;
        assert!((freq - 0.75).abs() < 0.01, "{freq}");
    }

    #[test]
    fn near_point_mass_sampling() {
        let joint = bernoulli_joint(1.0 - 1e-9);
        let data = exact_sample(&joint, 10_000, 2).unwrap();
        assert!(data.rows().iter().all(|r| r[0] == 1));
    }

    #[test]
    fn empirical_estimates_are_count_ratios() {
        let rows = vec![vec![1], vec![1], vec![0]];
        let data = Dataset::new(vec![VariableSpec::new(0, 2)], rows, 0).unwrap();
        let ev1 = Assignment::new(vec![0], vec![1]).unwrap();
        let lp = data.empirical_log_prob(&ev1).unwrap();
        assert!((lp - (2f64 / 3.0).ln()).abs() < 1e-15);
        // unseen events are strict errors
        let data2 = Dataset::new(vec![VariableSpec::new(0, 2)], vec![vec![1], vec![1]], 0).unwrap();
        let ev0 = Assignment::new(vec![0], vec![0]).unwrap();
        assert!(matches!(
            data2.empirical_log_prob(&ev0),
            Err(FgError::ZeroCount { .. })
        ));
    }

    #[test]
    fn conditional_counts_share_their_denominator() {
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 1]];
        let vars = vec![VariableSpec::new(0, 2), VariableSpec::new(1, 2)];
        let data = Dataset::new(vars, rows, 0).unwrap();
        let ev = Assignment::new(vec![1], vec![1]).unwrap();
        let given = Assignment::new(vec![0], vec![1]).unwrap();
        let lc = data.empirical_log_conditional(&ev, &given).unwrap();
        assert!((lc - 0.0).abs() < 1e-15); // both rows with x0=1 have x1=1
    }

    #[test]
    fn count_coherence_under_marginalization() {
        let g = generate_model(&GraphFamily::Chain, 4, 3, 3.0, 8).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        let data = exact_sample(&joint, 5000, 3).unwrap();
        // summing the pair table over one variable gives the singleton table
        let pair = data.count_table(&[1, 2]).unwrap();
        let single = data.count_table(&[1]).unwrap();
        let card2 = g.variables()[2].cardinality as usize;
        for v1 in 0..g.variables()[1].cardinality as usize {
            let s: u64 = (0..card2).map(|v2| pair[v1 * card2 + v2]).sum();
            assert_eq!(s, single[v1]);
        }
        // and every count table totals m
        assert_eq!(pair.iter().sum::<u64>(), data.m() as u64);
    }

    #[test]
    fn clipped_access_floors_zero_counts() {
        let vars = vec![VariableSpec::new(0, 2)];
        let data = Dataset::new(vars, vec![vec![1], vec![1]], 0).unwrap();
        let floor = (0.25f64).ln();
        let access = EmpiricalAccess::new(&data, AccessMode::Clipped { log_floor: floor });
        let ev0 = Assignment::new(vec![0], vec![0]).unwrap();
        assert_eq!(access.log_prob(&ev0).unwrap(), floor);
        // values above the floor pass through
        let ev1 = Assignment::new(vec![0], vec![1]).unwrap();
        assert_eq!(access.log_prob(&ev1).unwrap(), 0.0);
    }

    #[test]
    fn truncation_keeps_a_prefix() {
        let joint = bernoulli_joint(0.5);
        let data = exact_sample(&joint, 100, 4).unwrap();
        let head = data.truncated(10).unwrap();
        assert_eq!(head.m(), 10);
        assert_eq!(&data.rows()[..10], head.rows());
        assert!(data.truncated(101).is_err());
    }

    #[test]
    fn gibbs_matches_exact_marginals_on_a_single_variable() {
        let f = crate::model::Factor::new(vec![0], vec![2], vec![0.0, 3f64.ln()]).unwrap();
        let g = FactorGraph::new(vec![VariableSpec::new(0, 2)], vec![f]).unwrap();
        let data = gibbs_sample(&g, 40_000, 50, 1, 11).unwrap();
        let ones = data.rows().iter().filter(|r| r[0] == 1).count() as f64;
        assert!((ones / data.m() as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn gibbs_keeps_independent_variables_independent() {
        let f0 = crate::model::Factor::new(vec![0], vec![2], vec![0.0, 1.0]).unwrap();
        let f1 = crate::model::Factor::new(vec![1], vec![2], vec![0.0, -0.5]).unwrap();
        let g = FactorGraph::new(
            vec![VariableSpec::new(0, 2), VariableSpec::new(1, 2)],
            vec![f0, f1],
        )
        .unwrap();
        let data = gibbs_sample(&g, 40_000, 50, 2, 5).unwrap();
        let m = data.m() as f64;
        let p0 = data.rows().iter().filter(|r| r[0] == 1).count() as f64 / m;
        let p1 = data.rows().iter().filter(|r| r[1] == 1).count() as f64 / m;
        let p01 = data.rows().iter().filter(|r| r[0] == 1 && r[1] == 1).count() as f64 / m;
        assert!((p01 - p0 * p1).abs() < 0.01, "correlation {p01} vs {}", p0 * p1);
    }

    #[test]
    fn gibbs_total_variation_shrinks_against_truth() {
        let g = generate_model(&GraphFamily::Chain, 3, 2, 3.0, 6).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        let data = gibbs_sample(&g, 60_000, 100, 2, 13).unwrap();
        let mut tv = 0.0;
        for (idx, &p) in joint.probs().iter().enumerate() {
            let mut values = vec![0u32; 3];
            let mut rem = idx;
            for pos in (0..3).rev() {
                values[pos] = (rem % 2) as u32;
                rem /= 2;
            }
            let c = data
                .rows()
                .iter()
                .filter(|r| r.as_slice() == values.as_slice())
                .count() as f64;
            tv += (c / data.m() as f64 - p).abs();
        }
        assert!(tv / 2.0 < 0.01, "total variation {tv}");
    }

    #[test]
    fn empirical_joint_converges_with_sample_size() {
        // smoothed empirical joints drift toward the truth as m grows
        let g = generate_model(&GraphFamily::Chain, 3, 2, 3.0, 2).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        let mut means = Vec::new();
        for &m in &[1000usize, 10_000, 100_000] {
            let mut total = 0.0;
            for seed in 1..=10u64 {
                let data = exact_sample(&joint, m, seed).unwrap();
                let table = data.count_table(&[0, 1, 2]).unwrap();
                let denom = (data.m() + table.len()) as f64;
                let smoothed: Vec<f64> =
                    table.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
                let emp = JointTable::from_probs(joint.variables().to_vec(), {
                    let z: f64 = smoothed.iter().sum();
                    smoothed.iter().map(|p| p / z).collect()
                })
                .unwrap();
                total += oracle::symmetric_kl(&emp, &joint).unwrap();
            }
            means.push(total / 10.0);
        }
        assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
    }
}
