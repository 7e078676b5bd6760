//! Python bindings for the fglearn library.
//!
//! The module mirrors the Rust API: build or parse a factor graph, enumerate
//! it into a `JointTable` oracle, draw samples, learn parameters or structure
//! from the samples, and compare distributions. All functions raise
//! `ValueError` for invalid inputs, `ZeroCountError` for strict-mode zero
//! counts, and `CapExceededError` when a state space is too large to
//! enumerate.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use fglearn_core::error::FgError;
use fglearn_core::generate::{generate_model, GraphFamily};
use fglearn_core::io;
use fglearn_core::model::{markov_blanket_of, scope_closure, Assignment, FactorGraph};
use fglearn_core::oracle::{self, JointTable};
use fglearn_core::params::{self, ClipConfig, LearnedModel};
use fglearn_core::sampling::{self, Dataset};
use fglearn_core::structure::{self, StructureLearnResult};

create_exception!(fglearn_py, CapExceededError, PyValueError);
create_exception!(fglearn_py, ZeroCountError, PyValueError);

fn to_py_err(e: FgError) -> PyErr {
    match e {
        FgError::CapExceeded { .. } => CapExceededError::new_err(e.to_string()),
        FgError::ZeroCount { .. } => ZeroCountError::new_err(e.to_string()),
        FgError::Io(_) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPyResult<T> {
    fn into_py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for Result<T, FgError> {
    fn into_py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn full_assignment(values: Vec<u32>, n: usize, what: &str) -> PyResult<Assignment> {
    if values.len() != n {
        return Err(PyValueError::new_err(format!(
            "{what} must assign all {n} variables, got {}",
            values.len()
        )));
    }
    Ok(Assignment::full(values))
}

/// Exponent defaults for clipping when the scopes are already known: the
/// largest scope size and the largest Markov blanket in the scope closure.
fn derived_exponents(scopes: &[Vec<u32>]) -> PyResult<(u32, u32)> {
    let k = scopes.iter().map(Vec::len).max().unwrap_or(1).max(1) as u32;
    let closure = scope_closure(scopes).into_py()?;
    let b = closure
        .iter()
        .map(|d| markov_blanket_of(scopes, d).len())
        .max()
        .unwrap_or(0) as u32;
    Ok((k, b))
}

fn build_clip(
    strict: bool,
    gamma: Option<f64>,
    k: Option<u32>,
    b: Option<u32>,
    scopes: &[Vec<u32>],
) -> PyResult<ClipConfig> {
    if strict {
        if gamma.is_some() || k.is_some() || b.is_some() {
            return Err(PyValueError::new_err(
                "gamma, k and b only apply to clipped mode",
            ));
        }
        return Ok(ClipConfig::strict());
    }
    let gamma = gamma.ok_or_else(|| PyValueError::new_err("clipped mode needs gamma"))?;
    let (dk, db) = derived_exponents(scopes)?;
    ClipConfig::clipped(gamma, k.unwrap_or(dk), b.unwrap_or(db)).into_py()
}

/// A positive factor graph: variables with finite cardinalities and factors
/// stored as log-value tables.
#[pyclass(name = "FactorGraph", module = "fglearn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFactorGraph {
    inner: FactorGraph,
}

#[pymethods]
impl PyFactorGraph {
    /// Parses the text form produced by `to_text`.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyFactorGraph { inner: io::parse_factor_graph(text).into_py()? })
    }

    fn to_text(&self) -> String {
        io::write_factor_graph(&self.inner)
    }

    fn n_vars(&self) -> usize {
        self.inner.n()
    }

    fn cardinalities(&self) -> Vec<u32> {
        self.inner.cardinalities()
    }

    fn scopes(&self) -> Vec<Vec<u32>> {
        self.inner.scopes()
    }

    /// Union of factor scopes overlapping `target`, minus `target` itself.
    fn markov_blanket(&self, target: Vec<u32>) -> PyResult<Vec<u32>> {
        self.inner.markov_blanket(&target).into_py()
    }

    /// Sum of factor log-values at a full assignment (the unnormalized
    /// log-probability).
    fn log_score(&self, values: Vec<u32>) -> PyResult<f64> {
        let x = full_assignment(values, self.inner.n(), "assignment")?;
        self.inner.unnormalized_score(&x).into_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "FactorGraph(n_vars={}, factors={})",
            self.inner.n(),
            self.inner.factors().len()
        )
    }
}

/// The fully enumerated distribution of a factor graph. Exact but
/// exponential in the variable count; construction fails with
/// `CapExceededError` past the enumeration cap.
#[pyclass(name = "JointTable", module = "fglearn_py", frozen)]
pub struct PyJointTable {
    inner: JointTable,
}

#[pymethods]
impl PyJointTable {
    #[new]
    fn new(graph: &PyFactorGraph) -> PyResult<Self> {
        Ok(PyJointTable { inner: JointTable::from_graph(&graph.inner).into_py()? })
    }

    fn n_vars(&self) -> usize {
        self.inner.n()
    }

    fn cardinalities(&self) -> Vec<u32> {
        self.inner.cards().to_vec()
    }

    fn log_partition(&self) -> f64 {
        self.inner.log_partition()
    }

    /// Probability of one full assignment.
    fn prob(&self, values: Vec<u32>) -> PyResult<f64> {
        let x = full_assignment(values, self.inner.n(), "assignment")?;
        self.inner.prob(&x).into_py()
    }

    /// Smallest single-variable conditional probability, the positivity
    /// measure the clipping floor is built from.
    fn min_conditional_gamma(&self) -> f64 {
        self.inner.min_conditional_gamma()
    }

    /// Entropy of the whole joint, in nats.
    fn entropy(&self) -> PyResult<f64> {
        let all: Vec<u32> = (0..self.inner.n() as u32).collect();
        self.inner.conditional_entropy(&all, &[]).into_py()
    }

    /// Conditional entropy H(x | y) in nats.
    fn conditional_entropy(&self, x: Vec<u32>, y: Vec<u32>) -> PyResult<f64> {
        self.inner.conditional_entropy(&x, &y).into_py()
    }

    fn __repr__(&self) -> String {
        format!("JointTable(n_vars={})", self.inner.n())
    }
}

/// Rows of full assignments drawn from a model.
#[pyclass(name = "Dataset", module = "fglearn_py", frozen)]
pub struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Parses the CSV form produced by `to_csv`.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyDataset { inner: io::parse_samples(text).into_py()? })
    }

    fn to_csv(&self) -> String {
        io::write_samples(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.m()
    }

    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    fn cardinalities(&self) -> Vec<u32> {
        self.inner.variables().iter().map(|v| v.cardinality).collect()
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.inner.rows().to_vec()
    }

    /// The first `m` rows as a new dataset, so one large sample can serve a
    /// whole learning curve.
    fn truncated(&self, m: usize) -> PyResult<Self> {
        Ok(PyDataset { inner: self.inner.truncated(m).into_py()? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(m={}, n_vars={})",
            self.inner.m(),
            self.inner.variables().len()
        )
    }
}

/// An unnormalized product of estimated canonical factors.
#[pyclass(name = "LearnedModel", module = "fglearn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyLearnedModel {
    inner: LearnedModel,
}

#[pymethods]
impl PyLearnedModel {
    /// Parses the text form produced by `to_text`.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyLearnedModel { inner: io::parse_learned_model(text).into_py()? })
    }

    fn to_text(&self) -> String {
        io::write_learned_model(&self.inner)
    }

    fn scopes(&self) -> Vec<Vec<u32>> {
        self.inner.scopes()
    }

    fn baseline(&self) -> Vec<u32> {
        self.inner.baseline().values().to_vec()
    }

    /// Per-factor conditioning sets, parallel to `scopes()`.
    fn conditioning_sets(&self) -> Vec<Vec<u32>> {
        self.inner
            .factors()
            .iter()
            .map(|cf| cf.conditioning.clone())
            .collect()
    }

    /// Sum of canonical-factor log values at a full assignment.
    fn log_score(&self, values: Vec<u32>) -> PyResult<f64> {
        let n = self.inner.variables().len();
        let x = full_assignment(values, n, "assignment")?;
        self.inner.log_score(&x).into_py()
    }

    /// The model as a plain factor graph over the same variables.
    fn to_factor_graph(&self) -> PyResult<PyFactorGraph> {
        Ok(PyFactorGraph { inner: self.inner.to_factor_graph().into_py()? })
    }

    /// Enumerates the model into an exact distribution for evaluation.
    fn to_joint(&self) -> PyResult<PyJointTable> {
        let mut model = self.inner.clone();
        Ok(PyJointTable { inner: params::normalize_if_small(&mut model).into_py()? })
    }

    fn __repr__(&self) -> String {
        format!(
            "LearnedModel(n_vars={}, factors={})",
            self.inner.variables().len(),
            self.inner.factors().len()
        )
    }
}

/// What structure learning decided: the kept model, the blanket picked for
/// every candidate scope, and the zeroing threshold that was applied.
#[pyclass(name = "StructureResult", module = "fglearn_py", frozen)]
pub struct PyStructureResult {
    inner: StructureLearnResult,
}

#[pymethods]
impl PyStructureResult {
    fn model(&self) -> PyLearnedModel {
        PyLearnedModel { inner: self.inner.model.clone() }
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    /// `(scope, blanket, entropy)` per candidate scope, in candidate order.
    fn choices(&self) -> Vec<(Vec<u32>, Vec<u32>, f64)> {
        self.inner
            .choices
            .iter()
            .map(|c| (c.scope.clone(), c.blanket.clone(), c.entropy))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "StructureResult(factors={}, threshold={})",
            self.inner.model.factors().len(),
            self.inner.threshold
        )
    }
}

/// Builds a random positive model from a named family. `max_scope`,
/// `max_degree` and `factor_count` apply to the `"random"` family only.
#[pyfunction]
#[pyo3(signature = (family, n, *, max_cardinality=2, strength=2.0, seed=0, max_scope=None, max_degree=None, factor_count=None))]
#[allow(clippy::too_many_arguments)]
fn generate(
    family: &str,
    n: usize,
    max_cardinality: u32,
    strength: f64,
    seed: u64,
    max_scope: Option<usize>,
    max_degree: Option<usize>,
    factor_count: Option<usize>,
) -> PyResult<PyFactorGraph> {
    let random_args = [max_scope, max_degree, factor_count];
    let family = match family {
        "chain" | "grid" | "star" => {
            if random_args.iter().any(Option::is_some) {
                return Err(PyValueError::new_err(
                    "max_scope, max_degree and factor_count only apply to the random family",
                ));
            }
            match family {
                "chain" => GraphFamily::Chain,
                "grid" => GraphFamily::Grid,
                _ => GraphFamily::Star,
            }
        }
        "random" => GraphFamily::Random {
            max_scope: max_scope
                .ok_or_else(|| PyValueError::new_err("random family needs max_scope"))?,
            max_degree: max_degree
                .ok_or_else(|| PyValueError::new_err("random family needs max_degree"))?,
            factor_count: factor_count
                .ok_or_else(|| PyValueError::new_err("random family needs factor_count"))?,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family {other:?}; expected chain, grid, star or random"
            )))
        }
    };
    Ok(PyFactorGraph {
        inner: generate_model(&family, n, max_cardinality, strength, seed).into_py()?,
    })
}

/// Draws `m` independent rows from the exact distribution.
#[pyfunction]
fn exact_sample(joint: &PyJointTable, m: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset { inner: sampling::exact_sample(&joint.inner, m, seed).into_py()? })
}

/// Draws `m` rows from a single Gibbs chain without enumerating the joint.
#[pyfunction]
#[pyo3(signature = (graph, m, seed, *, burn_in=100, thinning=1))]
fn gibbs_sample(
    graph: &PyFactorGraph,
    m: usize,
    seed: u64,
    burn_in: usize,
    thinning: usize,
) -> PyResult<PyDataset> {
    Ok(PyDataset {
        inner: sampling::gibbs_sample(&graph.inner, m, burn_in, thinning, seed).into_py()?,
    })
}

/// Estimates one canonical factor per scope-closure element from counts.
/// Clipped mode (the default) floors conditionals at `gamma ** (k + b)`;
/// `strict=True` raises `ZeroCountError` on any unseen event instead.
#[pyfunction]
#[pyo3(signature = (scopes, data, *, baseline=None, gamma=None, k=None, b=None, strict=false))]
#[allow(clippy::too_many_arguments)]
fn learn_parameters(
    scopes: Vec<Vec<u32>>,
    data: &PyDataset,
    baseline: Option<Vec<u32>>,
    gamma: Option<f64>,
    k: Option<u32>,
    b: Option<u32>,
    strict: bool,
) -> PyResult<PyLearnedModel> {
    let n = data.inner.variables().len();
    let baseline = full_assignment(baseline.unwrap_or_else(|| vec![0; n]), n, "baseline")?;
    let clip = build_clip(strict, gamma, k, b, &scopes)?;
    Ok(PyLearnedModel {
        inner: params::learn_parameters(&scopes, &data.inner, &baseline, &clip).into_py()?,
    })
}

/// Scans every candidate scope of size at most `k` with blankets of size at
/// most `b`, keeps factors with an entry exceeding the threshold implied by
/// `epsilon`, and returns the surviving model plus the per-scope decisions.
#[pyfunction]
#[pyo3(signature = (data, k, b, epsilon, *, baseline=None, gamma=None, strict=false))]
fn learn_structure(
    data: &PyDataset,
    k: u32,
    b: u32,
    epsilon: f64,
    baseline: Option<Vec<u32>>,
    gamma: Option<f64>,
    strict: bool,
) -> PyResult<PyStructureResult> {
    let n = data.inner.variables().len();
    let baseline = full_assignment(baseline.unwrap_or_else(|| vec![0; n]), n, "baseline")?;
    let clip = if strict {
        if gamma.is_some() {
            return Err(PyValueError::new_err("gamma only applies to clipped mode"));
        }
        ClipConfig::strict()
    } else {
        let gamma = gamma.ok_or_else(|| PyValueError::new_err("clipped mode needs gamma"))?;
        ClipConfig::clipped(gamma, k, b).into_py()?
    };
    Ok(PyStructureResult {
        inner: structure::learn_structure(&data.inner, k, b, &baseline, epsilon, &clip)
            .into_py()?,
    })
}

/// KL(p || q) + KL(q || p) in nats.
#[pyfunction]
fn symmetric_kl(p: &PyJointTable, q: &PyJointTable) -> PyResult<f64> {
    oracle::symmetric_kl(&p.inner, &q.inner).into_py()
}

/// Symmetric KL divided by the variable count (per-variable nats).
#[pyfunction]
fn normalized_symmetric_kl(p: &PyJointTable, q: &PyJointTable) -> PyResult<f64> {
    oracle::normalized_symmetric_kl(&p.inner, &q.inner).into_py()
}

/// Sample size sufficient for parameter learning to reach `epsilon`
/// symmetric KL with probability `1 - delta`, given `j` true factors over
/// variables of cardinality at most `v`.
#[pyfunction]
fn parameter_sample_bound(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    j: u64,
    v: u32,
) -> PyResult<u64> {
    params::parameter_sample_bound(epsilon, delta, k, b, gamma, j, v).into_py()
}

/// Sample size sufficient for structure learning over `n` variables of
/// cardinality at most `v` to reach `epsilon` with probability `1 - delta`.
#[pyfunction]
fn structure_sample_bound(
    epsilon: f64,
    delta: f64,
    k: u32,
    b: u32,
    gamma: f64,
    v: u32,
    n: u32,
) -> PyResult<u64> {
    structure::structure_sample_bound(epsilon, delta, k, b, gamma, v, n).into_py()
}

#[pymodule]
fn fglearn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFactorGraph>()?;
    m.add_class::<PyJointTable>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyLearnedModel>()?;
    m.add_class::<PyStructureResult>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_sample, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_sample, m)?)?;
    m.add_function(wrap_pyfunction!(learn_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(learn_structure, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_kl, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_symmetric_kl, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_sample_bound, m)?)?;
    m.add_function(wrap_pyfunction!(structure_sample_bound, m)?)?;
    m.add("CapExceededError", m.py().get_type::<CapExceededError>())?;
    m.add("ZeroCountError", m.py().get_type::<ZeroCountError>())?;
    Ok(())
}
