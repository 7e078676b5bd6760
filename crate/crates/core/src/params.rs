//! Parameter estimation for a known structure, estimate clipping, the
//! clipped CPT estimator for directed models, and the sample-size calculator.

use crate::canonical::{mb_canonical_factor, AccessMode, CanonicalFactor, DistributionAccess};
use crate::error::{FgError, Result};
use crate::model::{markov_blanket_of, scope_closure, Assignment, FactorGraph, VariableSpec};
use crate::model::{cell_count, for_each_cell};
use crate::oracle::{JointTable, StableSum};
use crate::sampling::{Dataset, EmpiricalAccess};

/// Whether probability estimates pass through unchanged or are floored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipMode {
    Strict,
    Clipped,
}

/// Estimation mode plus the quantities that define the clipping floor
/// `gamma^(k+b)`: estimates below the floor (including exact zeros) are
/// raised to it, mirroring the fact that true conditionals over at most
/// `k` variables given at most `b` never fall below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    mode: ClipMode,
    gamma: f64,
    k: u32,
    b: u32,
}

impl ClipConfig {
    pub fn strict() -> Self {
        ClipConfig { mode: ClipMode::Strict, gamma: f64::NAN, k: 0, b: 0 }
    }

    /// Clipped mode; `gamma` must lie in (0, 0.5] and `k` must be at least 1.
    pub fn clipped(gamma: f64, k: u32, b: u32) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(FgError::InvalidParameter(format!(
                "gamma must be in (0, 0.5], got {gamma}"
            )));
        }
        if k == 0 {
            return Err(FgError::InvalidParameter("k must be at least 1".into()));
        }
        Ok(ClipConfig { mode: ClipMode::Clipped, gamma, k, b })
    }

    pub fn mode(&self) -> ClipMode {
        self.mode
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.mode {
            ClipMode::Strict => None,
            ClipMode::Clipped => Some(self.gamma),
        }
    }

    /// `(k+b)·ln gamma`, the log of the clipping floor. None in strict mode.
    pub fn log_floor(&self) -> Option<f64> {
        match self.mode {
            ClipMode::Strict => None,
            ClipMode::Clipped => Some((self.k + self.b) as f64 * self.gamma.ln()),
        }
    }

    pub fn access_mode(&self) -> AccessMode {
        match self.log_floor() {
            None => AccessMode::Strict,
            Some(log_floor) => AccessMode::Clipped { log_floor },
        }
    }
}

/// Applies the clipping floor to a raw log-probability estimate. Zero-count
/// outcomes land on the floor; other errors pass through. Requires clipped
/// mode.
pub fn clip_log_prob(log_p_hat: Result<f64>, clip: &ClipConfig) -> Result<f64> {
    let floor = clip.log_floor().ok_or_else(|| {
        FgError::InvalidParameter("clip_log_prob requires clipped mode".into())
    })?;
    match log_p_hat {
        Ok(v) => Ok(v.max(floor)),
        Err(FgError::ZeroCount { .. }) => Ok(floor),
        Err(e) => Err(e),
    }
}

/// An unnormalized product of estimated canonical factors. The partition
/// function is never needed for learning; [`normalize_if_small`] fills it
/// by enumeration when the joint fits under the cap, which evaluation
/// requires but learning does not.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    canonical_factors: Vec<CanonicalFactor>,
    baseline: Assignment,
    variables: Vec<VariableSpec>,
    log_partition: Option<f64>,
}

impl LearnedModel {
    pub fn new(
        variables: Vec<VariableSpec>,
        canonical_factors: Vec<CanonicalFactor>,
        baseline: Assignment,
    ) -> Result<Self> {
        if !baseline.is_full_for(variables.len()) {
            return Err(FgError::ScopeMismatch(
                "model baseline must be a full assignment".into(),
            ));
        }
        for cf in &canonical_factors {
            if cf.baseline != baseline {
                return Err(FgError::InconsistentBaseline);
            }
            for (pos, &var) in cf.scope().iter().enumerate() {
                let spec = variables
                    .get(var as usize)
                    .ok_or(FgError::UnknownVariable(var))?;
                if spec.cardinality != cf.factor.cards()[pos] {
                    return Err(FgError::ScopeMismatch(format!(
                        "factor cardinality {} for variable {var} does not match {}",
                        cf.factor.cards()[pos],
                        spec.cardinality
                    )));
                }
            }
        }
        Ok(LearnedModel {
            canonical_factors,
            baseline,
            variables,
            log_partition: None,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn factors(&self) -> &[CanonicalFactor] {
        &self.canonical_factors
    }

    pub fn baseline(&self) -> &Assignment {
        &self.baseline
    }

    pub fn log_partition(&self) -> Option<f64> {
        self.log_partition
    }

    pub fn scopes(&self) -> Vec<Vec<u32>> {
        self.canonical_factors
            .iter()
            .map(|cf| cf.scope().to_vec())
            .collect()
    }

    /// Unnormalized log-score of a full assignment: the sum of the factor
    /// log-values. Score differences are meaningful without the partition
    /// function.
    pub fn log_score(&self, x: &Assignment) -> Result<f64> {
        if !x.is_full_for(self.variables.len()) {
            return Err(FgError::ScopeMismatch(
                "log_score needs a full assignment".into(),
            ));
        }
        let mut acc = StableSum::new();
        for cf in &self.canonical_factors {
            acc.add(cf.factor.log_value_in(x)?);
        }
        Ok(acc.value())
    }

    /// The model as a plain factor graph (dropping baselines and
    /// conditioning sets), e.g. for enumeration or Gibbs sampling.
    pub fn to_factor_graph(&self) -> Result<FactorGraph> {
        FactorGraph::new(
            self.variables.clone(),
            self.canonical_factors
                .iter()
                .map(|cf| cf.factor.clone())
                .collect(),
        )
    }

    pub(crate) fn set_log_partition(&mut self, log_z: Option<f64>) {
        self.log_partition = log_z;
    }
}

/// Fills `log_partition` by enumerating the joint (subject to the default
/// enumeration cap) and returns the enumerated joint. On a cap error the
/// model is left untouched.
pub fn normalize_if_small(model: &mut LearnedModel) -> Result<JointTable> {
    let graph = model.to_factor_graph()?;
    let joint = JointTable::from_graph(&graph)?;
    model.set_log_partition(Some(joint.log_partition()));
    Ok(joint)
}

/// Estimates one conditioned canonical factor per closure scope of the given
/// structure, querying conditionals from sample counts. Blankets come from
/// the structure, never from the data, and nothing in here evaluates a
/// partition function or any other object that grows with the full joint.
pub fn learn_parameters(
    scopes: &[Vec<u32>],
    data: &Dataset,
    baseline: &Assignment,
    clip: &ClipConfig,
) -> Result<LearnedModel> {
    let access = EmpiricalAccess::new(data, clip.access_mode());
    learn_parameters_with_access(scopes, &access, baseline)
}

/// Same procedure against any conditional-query source; with exact oracle
/// conditionals the model reproduces the source distribution.
pub fn learn_parameters_with_access(
    scopes: &[Vec<u32>],
    access: &dyn DistributionAccess,
    baseline: &Assignment,
) -> Result<LearnedModel> {
    let closure = scope_closure(scopes)?;
    let mut factors = Vec::with_capacity(closure.len());
    for scope in &closure {
        let blanket = markov_blanket_of(scopes, scope);
        factors.push(mb_canonical_factor(access, scope, &blanket, baseline)?);
    }
    LearnedModel::new(access.variables().to_vec(), factors, baseline.clone())
}

fn check_bound_common(epsilon: f64, delta: f64, k: u32, gamma: f64, v: u32) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(FgError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FgError::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(FgError::InvalidParameter(format!("gamma must be in (0, 0.5], got {gamma}")));
    }
    if k == 0 {
        return Err(FgError::InvalidParameter("k must be at least 1".into()));
    }
    if v < 2 {
        return Err(FgError::InvalidParameter("v must be at least 2".into()));
    }
    Ok(())
}

fn finish_bound(value: f64) -> Result<u64> {
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Err(FgError::InvalidParameter(
            "sample bound does not fit in a 64-bit count".into(),
        ));
    }
    Ok(value.ceil() as u64)
}

pub(crate) fn parameter_sample_bound_raw(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    j: u64,
    v: u32,
) -> Result<f64> {
    check_bound_common(epsilon, delta, k, gamma, v)?;
    if j == 0 {
        return Err(FgError::InvalidParameter("factor count must be at least 1".into()));
    }
    let kb = (k + b) as f64;
    let lead = (1.0 + epsilon / (2f64).powi(2 * k as i32 + 2)).powi(2)
        * (2f64).powi(4 * k as i32 + 3)
        / (gamma.powf(kb) * epsilon * epsilon);
    // log argument computed in log space so large k or b cannot overflow
    let log_term = (k as f64 + 2.0) * std::f64::consts::LN_2 + (j as f64).ln()
        + kb * (v as f64).ln()
        - delta.ln();
    Ok(lead * log_term)
}

/// Number of samples sufficient for parameter learning to reach total
/// KL-divergence `J·epsilon` with probability `1 − delta`, using natural
/// logarithms throughout:
///
/// `m ≥ (1 + ε/2^(2k+2))² · 2^(4k+3)/(γ^(k+b)·ε²) · ln(2^(k+2)·J·v^(k+b)/δ)`
///
/// `J` is the factor count of the structure handed to the learner (not the
/// closure size) and `v` the maximum variable cardinality. Returns the
/// ceiling of the right-hand side.
pub fn parameter_sample_bound(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    j: u64,
    v: u32,
) -> Result<u64> {
    finish_bound(parameter_sample_bound_raw(epsilon, delta, k, b, gamma, j, v)?)
}

/// One conditional probability table: rows indexed by parent configuration
/// (last parent fastest), `cardinality` entries per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CptTable {
    pub variable: u32,
    pub parents: Vec<u32>,
    pub probs: Vec<f64>,
}

impl CptTable {
    pub fn row(&self, parent_config: usize, cardinality: u32) -> &[f64] {
        let c = cardinality as usize;
        &self.probs[parent_config * c..(parent_config + 1) * c]
    }
}

/// Count-ratio CPT estimation with every entry clipped to
/// `[epsilon/4, 1 − epsilon/4]` and rows renormalized afterwards (clipping
/// alone can leave a row summing away from one). Parent configurations with
/// zero observations get a uniform row before clipping.
pub fn bn_clipped_mle(
    parent_sets: &[Vec<u32>],
    data: &Dataset,
    epsilon: f64,
) -> Result<Vec<CptTable>> {
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(FgError::InvalidParameter(format!(
            "epsilon must be in (0, 2), got {epsilon}"
        )));
    }
    let n = data.variables().len();
    if parent_sets.len() != n {
        return Err(FgError::InvalidParameter(format!(
            "need one parent set per variable: got {} for {} variables",
            parent_sets.len(),
            n
        )));
    }
    for (i, parents) in parent_sets.iter().enumerate() {
        if parents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FgError::UnorderedScope(parents.clone()));
        }
        for &p in parents {
            if p as usize >= n {
                return Err(FgError::UnknownVariable(p));
            }
            if p as usize == i {
                return Err(FgError::InvalidParameter(format!(
                    "variable {i} cannot be its own parent"
                )));
            }
        }
    }
    check_acyclic(parent_sets)?;

    let lo = epsilon / 4.0;
    let hi = 1.0 - epsilon / 4.0;
    let mut tables = Vec::with_capacity(n);
    for (i, parents) in parent_sets.iter().enumerate() {
        let child = i as u32;
        let card = data.variables()[i].cardinality as usize;
        let parent_cards: Vec<u32> = parents
            .iter()
            .map(|&p| data.variables()[p as usize].cardinality)
            .collect();
        let rows = cell_count(&parent_cards) as usize;

        // counts over sorted (parents ∪ child), then re-addressed per row
        let mut family: Vec<u32> = parents.clone();
        family.push(child);
        family.sort_unstable();
        let counts = data.count_table(&family)?;
        let family_cards: Vec<u32> = family
            .iter()
            .map(|&v| data.variables()[v as usize].cardinality)
            .collect();

        let mut probs = vec![0.0; rows * card];
        let mut parent_values = vec![0u32; parents.len()];
        for row_idx in 0..rows {
            let mut rem = row_idx;
            for pos in (0..parents.len()).rev() {
                parent_values[pos] = (rem % parent_cards[pos] as usize) as u32;
                rem /= parent_cards[pos] as usize;
            }
            let mut row_counts = vec![0u64; card];
            for (x, slot) in row_counts.iter_mut().enumerate() {
                let mut idx = 0usize;
                for (pos, &var) in family.iter().enumerate() {
                    let value = if var == child {
                        x as u32
                    } else {
                        parent_values[parents.binary_search(&var).unwrap()]
                    };
                    idx = idx * family_cards[pos] as usize + value as usize;
                }
                *slot = counts[idx];
            }
            let total: u64 = row_counts.iter().sum();
            let row = &mut probs[row_idx * card..(row_idx + 1) * card];
            if total == 0 {
                row.fill(1.0 / card as f64);
            } else {
                for (x, slot) in row.iter_mut().enumerate() {
                    *slot = row_counts[x] as f64 / total as f64;
                }
            }
            let mut sum = 0.0;
            for slot in row.iter_mut() {
                *slot = slot.clamp(lo, hi);
                sum += *slot;
            }
            for slot in row.iter_mut() {
                *slot /= sum;
            }
        }
        tables.push(CptTable { variable: child, parents: parents.clone(), probs });
    }
    Ok(tables)
}

fn check_acyclic(parent_sets: &[Vec<u32>]) -> Result<()> {
    // Kahn's algorithm over the parent -> child edges
    let n = parent_sets.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (child, parents) in parent_sets.iter().enumerate() {
        indegree[child] = parents.len();
        for &p in parents {
            children[p as usize].push(child);
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(node) = queue.pop() {
        seen += 1;
        for &c in &children[node] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push(c);
            }
        }
    }
    if seen != n {
        return Err(FgError::InvalidParameter(
            "parent sets contain a directed cycle".into(),
        ));
    }
    Ok(())
}

/// Full joint implied by a set of CPTs, for evaluating the clipped MLE
/// against an enumerated truth. Subject to the usual cell-count limits.
pub fn bn_joint(tables: &[CptTable], variables: &[VariableSpec]) -> Result<JointTable> {
    let cards: Vec<u32> = variables.iter().map(|v| v.cardinality).collect();
    let cells = cell_count(&cards);
    if cells > (1u128 << 24) {
        return Err(FgError::CapExceeded { cells, cap: 1 << 24 });
    }
    let mut probs = Vec::with_capacity(cells as usize);
    for_each_cell(&cards, |_, values| {
        let mut p = 1.0;
        for t in tables {
            let mut row_idx = 0usize;
            for &parent in &t.parents {
                row_idx = row_idx * cards[parent as usize] as usize
                    + values[parent as usize] as usize;
            }
            let card = cards[t.variable as usize] as usize;
            p *= t.probs[row_idx * card + values[t.variable as usize] as usize];
        }
        probs.push(p);
    });
    JointTable::from_probs(variables.to_vec(), probs)
}
