//! Structure learning: candidate enumeration, empirical conditional entropy,
//! blanket selection, factor estimation with thresholding, and the matching
//! sample-size and blanket-quality calculators.

use crate::canonical::{canonical_factor, mb_canonical_factor, OracleAccess};
use crate::error::{FgError, Result};
use crate::model::{canonical_scope_cmp, Assignment, Factor};
use crate::oracle::{JointTable, StableSum};
use crate::params::{ClipConfig, LearnedModel};
use crate::sampling::{Dataset, EmpiricalAccess};
use std::cmp::Ordering;

/// All candidate factor scopes (non-empty, size ≤ k) and candidate blankets
/// (size ≤ b, the empty set included), each in canonical order: smaller
/// sets first, lexicographic within a size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSets {
    pub factor_scopes: Vec<Vec<u32>>,
    pub blankets: Vec<Vec<u32>>,
}

pub fn enumerate_candidates(n: u32, k: u32, b: u32) -> Result<CandidateSets> {
    if n == 0 || k == 0 || k > n || b > n {
        return Err(FgError::InvalidParameter(format!(
            "candidate ranges need 1 <= k <= n and b <= n, got n={n} k={k} b={b}"
        )));
    }
    let mut factor_scopes = Vec::new();
    for size in 1..=k {
        push_subsets(n, size as usize, &mut factor_scopes);
    }
    let mut blankets = vec![Vec::new()];
    for size in 1..=b {
        push_subsets(n, size as usize, &mut blankets);
    }
    Ok(CandidateSets { factor_scopes, blankets })
}

/// Appends all size-`size` subsets of `0..n` in lexicographic order.
fn push_subsets(n: u32, size: usize, out: &mut Vec<Vec<u32>>) {
    let mut current = Vec::with_capacity(size);
    fn rec(n: u32, size: usize, start: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        let remaining = size - current.len();
        for v in start..=(n - remaining as u32) {
            current.push(v);
            rec(n, size, v + 1, current, out);
            current.pop();
        }
    }
    rec(n, size, 0, &mut current, out);
}

/// Plug-in conditional entropy in nats from sample counts:
/// `−Σ (c(x,y)/m)·ln(c(x,y)/c(y))` over observed cells. Always defined;
/// unobserved cells contribute nothing.
pub fn empirical_conditional_entropy(data: &Dataset, x: &[u32], y: &[u32]) -> Result<f64> {
    if x.is_empty() {
        return Err(FgError::EmptyScope);
    }
    if x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FgError::UnorderedScope(x.to_vec()));
    }
    if y.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FgError::UnorderedScope(y.to_vec()));
    }
    let overlap: Vec<u32> = x
        .iter()
        .copied()
        .filter(|v| y.binary_search(v).is_ok())
        .collect();
    if !overlap.is_empty() {
        return Err(FgError::OverlappingScopes(overlap));
    }
    let m = data.m();
    if m == 0 {
        return Err(FgError::InvalidParameter(
            "entropy needs at least one sample".into(),
        ));
    }

    let mut union: Vec<u32> = x.iter().chain(y.iter()).copied().collect();
    union.sort_unstable();
    let joint_counts = data.count_table(&union)?;
    let y_counts = if y.is_empty() {
        None
    } else {
        Some(data.count_table(y)?)
    };

    let union_cards: Vec<u32> = union
        .iter()
        .map(|&v| data.variables()[v as usize].cardinality)
        .collect();
    // for re-encoding a union cell index into the y-table index
    let in_y: Vec<bool> = union.iter().map(|v| y.binary_search(v).is_ok()).collect();

    let mut acc = StableSum::new();
    let mut values = vec![0u32; union.len()];
    for (idx, &c) in joint_counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut rem = idx;
        for pos in (0..union.len()).rev() {
            values[pos] = (rem % union_cards[pos] as usize) as u32;
            rem /= union_cards[pos] as usize;
        }
        let cy = match &y_counts {
            None => m as u64,
            Some(table) => {
                let mut y_idx = 0usize;
                for pos in 0..union.len() {
                    if in_y[pos] {
                        y_idx = y_idx * union_cards[pos] as usize + values[pos] as usize;
                    }
                }
                table[y_idx]
            }
        };
        let p = c as f64 / m as f64;
        acc.add(-p * (c as f64 / cy as f64).ln());
    }
    Ok(acc.value())
}

/// A candidate scope's selected conditioning set and the conditional
/// entropy it achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct BlanketChoice {
    pub scope: Vec<u32>,
    pub blanket: Vec<u32>,
    pub entropy: f64,
}

/// Argmin of the plug-in conditional entropy over all candidate blankets
/// disjoint from `scope`. Exact ties go to the earlier candidate, i.e. the
/// smaller blanket and then the canonically first one, so the outcome never
/// depends on evaluation order.
pub fn best_markov_blanket(
    data: &Dataset,
    scope: &[u32],
    candidates: &CandidateSets,
) -> Result<BlanketChoice> {
    select_blanket(scope, &candidates.blankets, |blanket| {
        empirical_conditional_entropy(data, scope, blanket)
    })
}

fn select_blanket(
    scope: &[u32],
    blankets: &[Vec<u32>],
    mut entropy_of: impl FnMut(&[u32]) -> Result<f64>,
) -> Result<BlanketChoice> {
    let mut best: Option<(f64, &Vec<u32>)> = None;
    for blanket in blankets {
        if blanket.iter().any(|v| scope.binary_search(v).is_ok()) {
            continue;
        }
        let h = entropy_of(blanket)?;
        match &best {
            Some((bh, _)) if h >= *bh => {}
            _ => best = Some((h, blanket)),
        }
    }
    let (entropy, blanket) = best.ok_or_else(|| {
        FgError::InvalidParameter("no candidate blanket is disjoint from the scope".into())
    })?;
    Ok(BlanketChoice {
        scope: scope.to_vec(),
        blanket: blanket.clone(),
        entropy,
    })
}

/// The learned product model plus the selection report and the entry
/// threshold that was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureLearnResult {
    pub model: LearnedModel,
    pub choices: Vec<BlanketChoice>,
    pub threshold: f64,
}

/// Four steps per candidate scope: pick the lowest-entropy blanket, estimate
/// the conditioned canonical factor from counts, zero every entry within
/// `epsilon/2^(k+2)` of zero, and drop factors with nothing left.
pub fn learn_structure(
    data: &Dataset,
    k: u32,
    b: u32,
    baseline: &Assignment,
    epsilon: f64,
    clip: &ClipConfig,
) -> Result<StructureLearnResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(FgError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = data.variables().len() as u32;
    let candidates = enumerate_candidates(n, k, b)?;
    let access = EmpiricalAccess::new(data, clip.access_mode());

    let mut choices = Vec::with_capacity(candidates.factor_scopes.len());
    let mut factors = Vec::with_capacity(candidates.factor_scopes.len());
    for scope in &candidates.factor_scopes {
        let choice = best_markov_blanket(data, scope, &candidates)?;
        factors.push(mb_canonical_factor(&access, scope, &choice.blanket, baseline)?);
        choices.push(choice);
    }
    let full = LearnedModel::new(data.variables().to_vec(), factors, baseline.clone())?;
    let threshold = epsilon / (2f64).powi(k as i32 + 2);
    let model = apply_threshold(&full, threshold)?;
    Ok(StructureLearnResult { model, choices, threshold })
}

/// Zeroes every factor entry with `|log value| ≤ threshold` and drops
/// factors that end up all-zero in log scale. The partition function is
/// cleared since the product changed.
pub fn apply_threshold(model: &LearnedModel, threshold: f64) -> Result<LearnedModel> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(FgError::InvalidParameter(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let mut kept = Vec::new();
    for cf in model.factors() {
        let log_values: Vec<f64> = cf
            .factor
            .log_values()
            .iter()
            .map(|&v| if v.abs() <= threshold { 0.0 } else { v })
            .collect();
        if log_values.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut survivor = cf.clone();
        let factor = Factor::new(
            cf.factor.scope().to_vec(),
            cf.factor.cards().to_vec(),
            log_values,
        )?;
        survivor.factor = factor;
        kept.push(survivor);
    }
    LearnedModel::new(model.variables().to_vec(), kept, model.baseline().clone())
}

fn check_struct_bound_args(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    v: u32,
    n: u32,
) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(FgError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FgError::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(FgError::InvalidParameter(format!("gamma must be in (0, 0.5], got {gamma}")));
    }
    if k == 0 || b == 0 {
        return Err(FgError::InvalidParameter("k and b must be at least 1".into()));
    }
    if v < 2 {
        return Err(FgError::InvalidParameter("v must be at least 2".into()));
    }
    if n == 0 {
        return Err(FgError::InvalidParameter("n must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn structure_sample_bound_raw(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    v: u32,
    n: u32,
) -> Result<f64> {
    check_struct_bound_args(epsilon, delta, k, b, gamma, v, n)?;
    let kb = (k + b) as f64;
    let lead = (1.0 + epsilon * gamma.powf(kb) / (2f64).powi(2 * k as i32 + 3)).powi(2)
        * (v as f64).powf(2.0 * kb)
        * (2f64).powi(8 * k as i32 + 19)
        / (gamma.powf(6.0 * kb) * epsilon.powi(4));
    let arg = 8.0 * k as f64 * b as f64 * (n as f64).powf(kb) * (v as f64).powf(kb) / delta;
    let log_term = if arg.is_finite() {
        arg.ln()
    } else {
        (8.0 * k as f64 * b as f64).ln() + kb * ((n as f64).ln() + (v as f64).ln()) - delta.ln()
    };
    Ok(lead * log_term)
}

/// Number of samples sufficient for structure learning to reach total
/// KL-divergence `J·epsilon` with probability `1 − delta`, using natural
/// logarithms throughout:
///
/// `m ≥ (1 + εγ^(k+b)/2^(2k+3))² · v^(2k+2b)·2^(8k+19)/(γ^(6k+6b)·ε⁴) · ln(8·k·b·n^(k+b)·v^(k+b)/δ)`
///
/// Returns the ceiling of the right-hand side.
pub fn structure_sample_bound(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    v: u32,
    n: u32,
) -> Result<u64> {
    let value = structure_sample_bound_raw(epsilon, delta, k, b, gamma, v, n)?;
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Err(FgError::InvalidParameter(
            "sample bound does not fit in a 64-bit count".into(),
        ));
    }
    Ok(value.ceil() as u64)
}

/// How far a conditioning set that comes within `entropy_gap` nats of the
/// fully-conditioned entropy can distort any log-conditional:
/// `√(2·gap)/(λ₂·√λ₁)`, where `λ₁` is the smallest joint probability over
/// the union of the true and chosen conditioning sets and `λ₂` the smallest
/// conditional of the scope given that union.
pub fn blanket_quality_bound(lambda1: f64, lambda2: f64, entropy_gap: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda1 <= 1.0) || !(lambda2 > 0.0 && lambda2 <= 1.0) {
        return Err(FgError::InvalidParameter(format!(
            "lambda values must be in (0, 1], got {lambda1} and {lambda2}"
        )));
    }
    if !(entropy_gap >= 0.0 && entropy_gap.is_finite()) {
        return Err(FgError::InvalidParameter(format!(
            "entropy gap must be non-negative, got {entropy_gap}"
        )));
    }
    Ok((2.0 * entropy_gap).sqrt() / (lambda2 * lambda1.sqrt()))
}

/// Blanket selection against exact conditional entropies, with the same
/// tie-break as the empirical version.
pub fn oracle_best_blanket(
    joint: &JointTable,
    scope: &[u32],
    candidates: &CandidateSets,
) -> Result<BlanketChoice> {
    select_blanket(scope, &candidates.blankets, |blanket| {
        joint.conditional_entropy(scope, blanket)
    })
}

/// Candidate scopes whose exact canonical factors (full-instantiation form)
/// have at least one log entry larger than `tol` in magnitude — the ground
/// truth that recovery experiments compare surviving scopes against.
pub fn oracle_nontrivial_scopes(
    joint: &JointTable,
    candidates: &CandidateSets,
    baseline: &Assignment,
    tol: f64,
) -> Result<Vec<Vec<u32>>> {
    let access = OracleAccess::new(joint);
    let mut scopes = Vec::new();
    for scope in &candidates.factor_scopes {
        let cf = canonical_factor(&access, scope, baseline)?;
        if cf.factor.max_abs_log() > tol {
            scopes.push(scope.clone());
        }
    }
    Ok(scopes)
}

/// True if the two scope lists are identical as sorted sets of sets.
pub fn same_scope_sets(a: &[Vec<u32>], b: &[Vec<u32>]) -> bool {
    let mut a: Vec<&Vec<u32>> = a.iter().collect();
    let mut b: Vec<&Vec<u32>> = b.iter().collect();
    let cmp = |x: &&Vec<u32>, y: &&Vec<u32>| -> Ordering { canonical_scope_cmp(x, y) };
    a.sort_by(cmp);
    b.sort_by(cmp);
    a == b
}
