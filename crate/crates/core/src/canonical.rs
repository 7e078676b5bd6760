//! The canonical parameterization of a positive distribution.
//!
//! For a scope `D`, a full baseline assignment, and a distribution `P`, the
//! canonical factor at `d` is
//!
//! ```text
//! log f*(d) = Σ_{U ⊆ D} (−1)^{|D| − |U|} · log P(event_U)
//! ```
//!
//! where `event_U` keeps `d`'s values on `U` and substitutes the baseline
//! value everywhere else. Two forms of the event are supported: the
//! full-instantiation form (the event is a complete assignment) and the
//! conditioned form (the event covers only `D`, conditioned on a disjoint
//! set held at its baseline values). When the conditioning set contains the
//! Markov blanket of `D`, the two forms agree — which is what makes the
//! parameterization learnable from local queries alone.
//!
//! Probabilities are supplied through [`DistributionAccess`], the single
//! seam between exact (oracle), empirical (sample counts), and local
//! (adjacent-factor) implementations.

use crate::error::{FgError, Result};
use crate::model::{
    canonical_scope_cmp, cell_count, for_each_cell, scope_closure, Assignment, Factor,
    VariableSpec,
};
use crate::oracle::{JointTable, StableSum};

/// How an access answers queries whose true value it cannot resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccessMode {
    /// Fail with `ZeroCount` when an event was never observed.
    Strict,
    /// Raise any log-probability estimate below `log_floor` up to it; events
    /// with an unobserved conditioning set return the floor as well.
    Clipped { log_floor: f64 },
}

/// Query interface over a positive distribution.
///
/// Implementations may support only part of the interface; for example, an
/// access backed by local factor neighborhoods can answer conditionals whose
/// conditioning set covers the event's Markov blanket, but not joint
/// probabilities of full assignments.
pub trait DistributionAccess {
    fn variables(&self) -> &[VariableSpec];

    /// Natural log of the probability of `event` (partial or full).
    fn log_prob(&self, event: &Assignment) -> Result<f64>;

    /// Natural log of `P(event | given)`; the two scopes must be disjoint.
    fn log_conditional(&self, event: &Assignment, given: &Assignment) -> Result<f64>;
}

/// Exact access backed by an enumerated joint table.
pub struct OracleAccess<'a> {
    joint: &'a JointTable,
}

impl<'a> OracleAccess<'a> {
    pub fn new(joint: &'a JointTable) -> Self {
        OracleAccess { joint }
    }
}

impl DistributionAccess for OracleAccess<'_> {
    fn variables(&self) -> &[VariableSpec] {
        self.joint.variables()
    }

    fn log_prob(&self, event: &Assignment) -> Result<f64> {
        Ok(self.joint.event_prob(event)?.ln())
    }

    fn log_conditional(&self, event: &Assignment, given: &Assignment) -> Result<f64> {
        let both = event.union(given)?;
        let num = self.joint.event_prob(&both)?;
        let den = self.joint.event_prob(given)?;
        if den <= 0.0 {
            return Err(FgError::InvalidParameter(
                "conditioning event has zero probability".into(),
            ));
        }
        Ok((num / den).ln())
    }
}

/// A canonical factor: a log-value table over its scope, together with the
/// baseline it was taken against and the conditioning set that was held at
/// baseline values (empty for the full-instantiation form).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFactor {
    pub factor: Factor,
    pub baseline: Assignment,
    pub conditioning: Vec<u32>,
}

impl CanonicalFactor {
    pub fn scope(&self) -> &[u32] {
        self.factor.scope()
    }
}

/// Subset masks of a scope of size `s`, ordered by popcount and then by the
/// mask's binary value, so evaluation order is deterministic.
fn ordered_masks(s: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << s)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

fn check_scope_and_baseline(
    access: &dyn DistributionAccess,
    scope: &[u32],
    baseline: &Assignment,
) -> Result<Vec<u32>> {
    if scope.is_empty() {
        return Err(FgError::EmptyScope);
    }
    if scope.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FgError::UnorderedScope(scope.to_vec()));
    }
    let vars = access.variables();
    if !baseline.is_full_for(vars.len()) {
        return Err(FgError::ScopeMismatch(
            "baseline must be a full assignment".into(),
        ));
    }
    let mut cards = Vec::with_capacity(scope.len());
    for &var in scope {
        let spec = vars
            .get(var as usize)
            .ok_or(FgError::UnknownVariable(var))?;
        cards.push(spec.cardinality);
    }
    for (i, &bv) in baseline.values().iter().enumerate() {
        if bv >= vars[i].cardinality {
            return Err(FgError::ValueOutOfRange {
                variable: i as u32,
                value: bv,
                cardinality: vars[i].cardinality,
            });
        }
    }
    Ok(cards)
}

/// Canonical factor over `scope` in the full-instantiation form: each term
/// queries the probability of a complete assignment.
pub fn canonical_factor(
    access: &dyn DistributionAccess,
    scope: &[u32],
    baseline: &Assignment,
) -> Result<CanonicalFactor> {
    build_canonical(access, scope, None, baseline)
}

/// Canonical factor over `scope` in the conditioned form: each term queries
/// `P(event over scope | conditioning at baseline values)`. Exact whenever
/// `conditioning` contains the Markov blanket of `scope`.
pub fn mb_canonical_factor(
    access: &dyn DistributionAccess,
    scope: &[u32],
    conditioning: &[u32],
    baseline: &Assignment,
) -> Result<CanonicalFactor> {
    if conditioning.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FgError::UnorderedScope(conditioning.to_vec()));
    }
    let overlap: Vec<u32> = scope
        .iter()
        .copied()
        .filter(|v| conditioning.binary_search(v).is_ok())
        .collect();
    if !overlap.is_empty() {
        return Err(FgError::OverlappingScopes(overlap));
    }
    build_canonical(access, scope, Some(conditioning), baseline)
}

fn build_canonical(
    access: &dyn DistributionAccess,
    scope: &[u32],
    conditioning: Option<&[u32]>,
    baseline: &Assignment,
) -> Result<CanonicalFactor> {
    let cards = check_scope_and_baseline(access, scope, baseline)?;
    let s = scope.len();
    let masks = ordered_masks(s);
    let table_len = cell_count(&cards) as usize;
    let mut table = vec![0.0f64; table_len];
    let given = match conditioning {
        Some(y) => Some(baseline.restrict_to(y)?),
        None => None,
    };
    let base_on_scope: Vec<u32> = scope
        .iter()
        .map(|&v| baseline.value_of(v).unwrap())
        .collect();

    let mut fill_error: Option<FgError> = None;
    for_each_cell(&cards, |idx, d| {
        if fill_error.is_some() {
            return;
        }
        // Any entry that touches the baseline on some variable cancels in
        // matched subset pairs (with and without that variable), so it is
        // exactly zero: skip the summation entirely rather than rounding it.
        if d.iter().zip(&base_on_scope).any(|(a, b)| a == b) {
            table[idx] = 0.0;
            return;
        }
        let mut acc = StableSum::new();
        for &mask in &masks {
            let sign = if (s - mask.count_ones() as usize).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let term = match (&given, conditioning) {
                (Some(given), Some(_)) => {
                    // event over the scope only, defaults elsewhere inside it
                    let mut ev = Vec::with_capacity(s);
                    for (pos, &var) in scope.iter().enumerate() {
                        let _ = var;
                        if mask & (1 << pos) != 0 {
                            ev.push(d[pos]);
                        } else {
                            ev.push(base_on_scope[pos]);
                        }
                    }
                    Assignment::new(scope.to_vec(), ev)
                        .and_then(|event| access.log_conditional(&event, given))
                }
                _ => {
                    // full assignment: baseline overwritten on the kept part
                    let mut full = baseline.values().to_vec();
                    for (pos, &var) in scope.iter().enumerate() {
                        if mask & (1 << pos) != 0 {
                            full[var as usize] = d[pos];
                        }
                    }
                    access.log_prob(&Assignment::full(full))
                }
            };
            match term {
                Ok(v) => acc.add(sign * v),
                Err(e) => {
                    fill_error = Some(e);
                    return;
                }
            }
        }
        table[idx] = acc.value();
    });
    if let Some(e) = fill_error {
        return Err(e);
    }

    let factor = Factor::new(scope.to_vec(), cards, table)?;
    Ok(CanonicalFactor {
        factor,
        baseline: baseline.clone(),
        conditioning: conditioning.map(|y| y.to_vec()).unwrap_or_default(),
    })
}

/// A product of canonical factors anchored at a baseline: evaluates exact
/// log-probabilities of full assignments.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    factors: Vec<CanonicalFactor>,
    baseline_log_prob: f64,
}

impl Reconstruction {
    /// The factor scopes must be closed under non-empty subsets and all
    /// factors must share one baseline.
    pub fn new(factors: Vec<CanonicalFactor>, baseline_log_prob: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(FgError::InvalidParameter(
                "a reconstruction needs at least one factor".into(),
            ));
        }
        let baseline = &factors[0].baseline;
        if factors.iter().any(|f| &f.baseline != baseline) {
            return Err(FgError::InconsistentBaseline);
        }
        let mut scopes: Vec<Vec<u32>> = factors.iter().map(|f| f.scope().to_vec()).collect();
        scopes.sort_by(|a, b| canonical_scope_cmp(a, b));
        let closed = scope_closure(&scopes)?;
        for needed in &closed {
            if !scopes.iter().any(|s| s == needed) {
                return Err(FgError::MissingClosureScope(needed.clone()));
            }
        }
        Ok(Reconstruction { factors, baseline_log_prob })
    }

    /// `log P(x)` for a full assignment `x`.
    pub fn log_prob(&self, x: &Assignment) -> Result<f64> {
        let mut total = self.baseline_log_prob;
        for f in &self.factors {
            total += f.factor.log_value_in(x)?;
        }
        Ok(total)
    }

    pub fn factors(&self) -> &[CanonicalFactor] {
        &self.factors
    }
}
