//! Config-driven experiment runs: learning curves, structure recovery, and
//! restricted-hypothesis degradation, each emitting a machine-readable
//! result table.
//!
//! Configs are plain `key = value` text with `#` comments. Seeds run
//! concurrently; rows are sorted by (seed, m) before writing so the output
//! never depends on scheduling. With the same config the table is
//! byte-identical across runs, except for the opt-in `runtime-seconds`
//! metric, which reports a wall-clock measurement of the learning call.

use std::collections::BTreeMap;
use std::time::Instant;

use fglearn_core::error::{FgError, Result};
use fglearn_core::generate::{generate_model, GraphFamily};
use fglearn_core::io::fmt_f64;
use fglearn_core::model::{cell_count, Assignment, Factor, FactorGraph};
use fglearn_core::oracle::{normalized_symmetric_kl, symmetric_kl, JointTable};
use fglearn_core::params::{learn_parameters, normalize_if_small, ClipConfig, LearnedModel};
use fglearn_core::rng::SplitMix64;
use fglearn_core::sampling::{exact_sample, gibbs_sample};
use fglearn_core::structure::{
    enumerate_candidates, learn_structure, oracle_nontrivial_scopes, same_scope_sets,
};

/// Which learner the experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Parameter learning with the generating structure.
    Params,
    /// Structure learning from samples alone.
    Structure,
    /// Parameter learning with the family structure while the data comes
    /// from the family plus one extra factor the learner cannot represent.
    Degradation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    SymKl,
    NormalizedSymKl,
    Recovery,
    RuntimeSeconds,
}

impl MetricKind {
    fn name(&self) -> &'static str {
        match self {
            MetricKind::SymKl => "sym-kl",
            MetricKind::NormalizedSymKl => "normalized-sym-kl",
            MetricKind::Recovery => "recovery",
            MetricKind::RuntimeSeconds => "runtime-seconds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SamplerKind {
    Exact,
    Gibbs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GammaSpec {
    /// Exact positivity measure of the generated model, via the oracle.
    Auto,
    Fixed(f64),
}

/// A parsed and validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    experiment: String,
    kind: Kind,
    family: GraphFamily,
    n: usize,
    max_cardinality: u32,
    strength: f64,
    k: Option<u32>,
    b: Option<u32>,
    epsilon: Option<f64>,
    m_schedule: Vec<usize>,
    seeds: Vec<u64>,
    model_seed: Option<u64>,
    strict: bool,
    gamma: GammaSpec,
    sampler: SamplerKind,
    burn_in: usize,
    thinning: usize,
    metrics: Vec<MetricKind>,
    extra_scope: Option<Vec<u32>>,
}

/// One line of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub seed: u64,
    pub m: usize,
    pub metric: &'static str,
    pub value: f64,
}

fn invalid(message: impl Into<String>) -> FgError {
    FgError::InvalidParameter(message.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| FgError::Parse {
                line: idx + 1,
                message: "expected key = value".into(),
            })?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(FgError::Parse {
                    line: idx + 1,
                    message: format!("duplicate key {key}"),
                });
            }
        }

        let mut take = |key: &str| map.remove(key);
        let experiment = take("experiment").ok_or_else(|| invalid("missing key: experiment"))?;
        if experiment.is_empty() || experiment.contains(',') || experiment.contains(char::is_whitespace) {
            return Err(invalid("experiment id must be non-empty with no commas or spaces"));
        }
        let kind = match take("kind").ok_or_else(|| invalid("missing key: kind"))?.as_str() {
            "params" => Kind::Params,
            "structure" => Kind::Structure,
            "degradation" => Kind::Degradation,
            other => return Err(invalid(format!("unknown kind {other:?}"))),
        };
        let n = parse_num::<usize>(&take("n").ok_or_else(|| invalid("missing key: n"))?, "n")?;
        let family = match take("family").ok_or_else(|| invalid("missing key: family"))?.as_str()
        {
            "chain" => GraphFamily::Chain,
            "grid" => GraphFamily::Grid,
            "star" => GraphFamily::Star,
            "random" => GraphFamily::Random {
                max_scope: parse_num(
                    &take("max-scope").ok_or_else(|| invalid("random family needs max-scope"))?,
                    "max-scope",
                )?,
                max_degree: parse_num(
                    &take("max-degree")
                        .ok_or_else(|| invalid("random family needs max-degree"))?,
                    "max-degree",
                )?,
                factor_count: parse_num(
                    &take("factor-count")
                        .ok_or_else(|| invalid("random family needs factor-count"))?,
                    "factor-count",
                )?,
            },
            other => return Err(invalid(format!("unknown family {other:?}"))),
        };
        let max_cardinality = match take("max-cardinality") {
            Some(v) => parse_num(&v, "max-cardinality")?,
            None => 2,
        };
        let strength = parse_num::<f64>(
            &take("strength").ok_or_else(|| invalid("missing key: strength"))?,
            "strength",
        )?;
        let k = take("k").map(|v| parse_num(&v, "k")).transpose()?;
        let b = take("b").map(|v| parse_num(&v, "b")).transpose()?;
        let epsilon = take("epsilon").map(|v| parse_num(&v, "epsilon")).transpose()?;
        let m_schedule =
            parse_list::<usize>(&take("m").ok_or_else(|| invalid("missing key: m"))?, "m")?;
        if m_schedule.is_empty() || m_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("m must be a non-empty, strictly increasing schedule"));
        }
        let seeds =
            parse_list::<u64>(&take("seeds").ok_or_else(|| invalid("missing key: seeds"))?, "seeds")?;
        if seeds.is_empty() {
            return Err(invalid("seeds must be non-empty"));
        }
        let model_seed = take("model-seed").map(|v| parse_num(&v, "model-seed")).transpose()?;
        let (strict, gamma) = match take("mode").as_deref().unwrap_or("clipped") {
            "strict" => {
                if take("gamma").is_some() {
                    return Err(invalid("gamma only applies to clipped mode"));
                }
                (true, GammaSpec::Auto)
            }
            "clipped" => {
                let gamma = match take("gamma").as_deref().unwrap_or("auto") {
                    "auto" => GammaSpec::Auto,
                    v => GammaSpec::Fixed(parse_num(v, "gamma")?),
                };
                (false, gamma)
            }
            other => return Err(invalid(format!("unknown mode {other:?}"))),
        };
        let sampler = match take("sampler").as_deref().unwrap_or("exact") {
            "exact" => SamplerKind::Exact,
            "gibbs" => SamplerKind::Gibbs,
            other => return Err(invalid(format!("unknown sampler {other:?}"))),
        };
        let burn_in = match take("burn-in") {
            Some(v) => parse_num(&v, "burn-in")?,
            None => 100,
        };
        let thinning = match take("thinning") {
            Some(v) => parse_num(&v, "thinning")?,
            None => 1,
        };
        let metrics = take("metrics")
            .ok_or_else(|| invalid("missing key: metrics"))?
            .split(',')
            .map(|tok| match tok.trim() {
                "sym-kl" => Ok(MetricKind::SymKl),
                "normalized-sym-kl" => Ok(MetricKind::NormalizedSymKl),
                "recovery" => Ok(MetricKind::Recovery),
                "runtime-seconds" => Ok(MetricKind::RuntimeSeconds),
                other => Err(invalid(format!("unknown metric {other:?}"))),
            })
            .collect::<Result<Vec<MetricKind>>>()?;
        if metrics.is_empty() {
            return Err(invalid("metrics must be non-empty"));
        }
        let extra_scope = take("extra-scope")
            .map(|v| parse_list::<u32>(&v, "extra-scope"))
            .transpose()?;

        if !map.is_empty() {
            let keys: Vec<&String> = map.keys().collect();
            return Err(invalid(format!("unknown keys: {keys:?}")));
        }

        let config = ExperimentConfig {
            experiment,
            kind,
            family,
            n,
            max_cardinality,
            strength,
            k,
            b,
            epsilon,
            m_schedule,
            seeds,
            model_seed,
            strict,
            gamma,
            sampler,
            burn_in,
            thinning,
            metrics,
            extra_scope,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.kind == Kind::Structure {
            if self.k.is_none() || self.b.is_none() || self.epsilon.is_none() {
                return Err(invalid("structure experiments need k, b and epsilon"));
            }
        } else if self.metrics.contains(&MetricKind::Recovery) {
            return Err(invalid("the recovery metric needs kind = structure"));
        }
        match &self.extra_scope {
            Some(scope) if self.kind != Kind::Degradation => {
                let _ = scope;
                return Err(invalid("extra-scope only applies to kind = degradation"));
            }
            Some(scope) => {
                if scope.is_empty()
                    || scope.windows(2).any(|w| w[0] >= w[1])
                    || scope.iter().any(|&v| v as usize >= self.n)
                {
                    return Err(invalid("extra-scope must be strictly increasing variable ids"));
                }
            }
            None if self.kind == Kind::Degradation && self.n < 3 => {
                return Err(invalid("degradation needs n >= 3 for the default extra scope"));
            }
            None => {}
        }
        Ok(())
    }

    /// The factor the degradation data includes but the learner does not.
    fn extra_scope(&self) -> Vec<u32> {
        self.extra_scope.clone().unwrap_or_else(|| {
            let mid = (self.n / 2) as u32;
            vec![mid - 1, mid, mid + 1]
        })
    }
}

fn parse_num<T: std::str::FromStr>(text: &str, key: &str) -> Result<T> {
    text.trim()
        .parse::<T>()
        .map_err(|_| invalid(format!("bad value for {key}: {text:?}")))
}

fn parse_list<T: std::str::FromStr>(text: &str, key: &str) -> Result<Vec<T>> {
    text.split(',').map(|tok| parse_num(tok, key)).collect()
}

/// Runs every seed of the experiment (concurrently) and returns the rows
/// sorted by (seed, m), with metrics in the configured order within a cell.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let per_seed: Vec<Result<Vec<ResultRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| scope.spawn(move || run_seed(config, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for seed_rows in per_seed {
        rows.extend(seed_rows?);
    }
    rows.sort_by_key(|row| (row.seed, row.m));
    Ok(rows)
}

/// The result table as CSV with a fixed header.
pub fn write_rows(rows: &[ResultRow]) -> String {
    let mut out = String::from("experiment,seed,m,metric,value\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.experiment,
            row.seed,
            row.m,
            row.metric,
            fmt_f64(row.value)
        ));
    }
    out
}

fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<ResultRow>> {
    let graph_seed = config.model_seed.unwrap_or(seed);
    let family_graph = generate_model(
        &config.family,
        config.n,
        config.max_cardinality,
        config.strength,
        graph_seed,
    )?;
    let graph = match config.kind {
        Kind::Degradation => add_extra_factor(config, &family_graph, graph_seed)?,
        _ => family_graph.clone(),
    };
    let joint = JointTable::from_graph(&graph)?;
    let baseline = Assignment::full(vec![0; config.n]);

    let clip = if config.strict {
        ClipConfig::strict()
    } else {
        let gamma = match config.gamma {
            GammaSpec::Auto => joint.min_conditional_gamma(),
            GammaSpec::Fixed(g) => g,
        };
        let k = config
            .k
            .unwrap_or(family_graph.max_scope_size().max(1) as u32);
        let b = config.b.unwrap_or(family_graph.max_blanket_size() as u32);
        ClipConfig::clipped(gamma, k, b)?
    };

    let truth_scopes = if config.metrics.contains(&MetricKind::Recovery) {
        let candidates =
            enumerate_candidates(config.n as u32, config.k.unwrap(), config.b.unwrap())?;
        Some(oracle_nontrivial_scopes(&joint, &candidates, &baseline, 1e-9)?)
    } else {
        None
    };

    let m_max = *config.m_schedule.last().unwrap();
    let full_data = match config.sampler {
        SamplerKind::Exact => exact_sample(&joint, m_max, seed)?,
        SamplerKind::Gibbs => {
            gibbs_sample(&graph, m_max, config.burn_in, config.thinning, seed)?
        }
    };

    let needs_kl = config
        .metrics
        .iter()
        .any(|m| matches!(m, MetricKind::SymKl | MetricKind::NormalizedSymKl));
    let mut rows = Vec::new();
    for &m in &config.m_schedule {
        let data = full_data.truncated(m)?;
        let started = Instant::now();
        let mut model: LearnedModel = match config.kind {
            Kind::Params | Kind::Degradation => {
                learn_parameters(&family_graph.scopes(), &data, &baseline, &clip)?
            }
            Kind::Structure => {
                learn_structure(
                    &data,
                    config.k.unwrap(),
                    config.b.unwrap(),
                    &baseline,
                    config.epsilon.unwrap(),
                    &clip,
                )?
                .model
            }
        };
        let runtime = started.elapsed().as_secs_f64();
        let learned_joint = if needs_kl {
            Some(normalize_if_small(&mut model)?)
        } else {
            None
        };
        for metric in &config.metrics {
            let value = match metric {
                MetricKind::SymKl => symmetric_kl(&joint, learned_joint.as_ref().unwrap())?,
                MetricKind::NormalizedSymKl => {
                    normalized_symmetric_kl(&joint, learned_joint.as_ref().unwrap())?
                }
                MetricKind::Recovery => {
                    if same_scope_sets(&model.scopes(), truth_scopes.as_ref().unwrap()) {
                        1.0
                    } else {
                        0.0
                    }
                }
                MetricKind::RuntimeSeconds => runtime,
            };
            // divergences can land a hair below zero in floating point
            let value = if (-1e-12..0.0).contains(&value) { 0.0 } else { value };
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(format!(
                    "metric {} produced an out-of-range value {value}",
                    metric.name()
                )));
            }
            rows.push(ResultRow {
                experiment: config.experiment.clone(),
                seed,
                m,
                metric: metric.name(),
                value,
            });
        }
    }
    Ok(rows)
}

/// The degradation target: the family graph plus one seeded factor over
/// `extra_scope`, drawn from the same strength range but a separate stream.
fn add_extra_factor(
    config: &ExperimentConfig,
    family_graph: &FactorGraph,
    graph_seed: u64,
) -> Result<FactorGraph> {
    let scope = config.extra_scope();
    let cards: Vec<u32> = scope
        .iter()
        .map(|&v| family_graph.variables()[v as usize].cardinality)
        .collect();
    let mut rng = SplitMix64::new(graph_seed ^ 0xD1B5_4A32_D192_ED03);
    let log_strength = config.strength.ln();
    let table: Vec<f64> = (0..cell_count(&cards) as usize)
        .map(|_| rng.next_f64() * log_strength)
        .collect();
    let mut factors = family_graph.factors().to_vec();
    factors.push(Factor::new(scope, cards, table)?);
    FactorGraph::new(family_graph.variables().to_vec(), factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> String {
        [
            "experiment = demo",
            "kind = params",
            "family = chain",
            "n = 4",
            "strength = 2.0",
            "seeds = 1,2",
            "m = 100,200",
            "metrics = sym-kl",
        ]
        .join("\n")
    }

    #[test]
    fn parses_a_minimal_config() {
        let config = ExperimentConfig::parse(&base_config()).unwrap();
        assert_eq!(config.experiment, "demo");
        assert_eq!(config.kind, Kind::Params);
        assert_eq!(config.seeds, vec![1, 2]);
        assert_eq!(config.m_schedule, vec![100, 200]);
        assert_eq!(config.metrics, vec![MetricKind::SymKl]);
        assert!(!config.strict);
        assert_eq!(config.gamma, GammaSpec::Auto);
    }

    #[test]
    fn rejects_bad_schedules_and_unknown_keys() {
        let bad_m = base_config().replace("m = 100,200", "m = 200,100");
        assert!(ExperimentConfig::parse(&bad_m).is_err());
        let empty_seeds = base_config().replace("seeds = 1,2", "seeds = ");
        assert!(ExperimentConfig::parse(&empty_seeds).is_err());
        let unknown = format!("{}\nmystery = 1", base_config());
        let err = ExperimentConfig::parse(&unknown).unwrap_err();
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn recovery_requires_structure_kind() {
        let bad = base_config().replace("metrics = sym-kl", "metrics = recovery");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let good = bad
            .replace("kind = params", "kind = structure")
            + "\nk = 2\nb = 2\nepsilon = 0.5";
        assert!(ExperimentConfig::parse(&good).is_ok());
    }

    #[test]
    fn rows_come_out_sorted_and_deterministic() {
        let text = base_config().replace("seeds = 1,2", "seeds = 2,1");
        let config = ExperimentConfig::parse(&text).unwrap();
        let rows = run_experiment(&config).unwrap();
        let keys: Vec<(u64, usize)> = rows.iter().map(|r| (r.seed, r.m)).collect();
        assert_eq!(keys, vec![(1, 100), (1, 200), (2, 100), (2, 200)]);
        let again = run_experiment(&config).unwrap();
        assert_eq!(write_rows(&rows), write_rows(&again));
    }

    #[test]
    fn degradation_adds_the_extra_factor_to_the_data_only() {
        let text = base_config()
            .replace("kind = params", "kind = degradation")
            .replace("n = 4", "n = 5");
        let config = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(config.extra_scope(), vec![1, 2, 3]);
        let g = generate_model(&GraphFamily::Chain, 5, 2, 2.0, 1).unwrap();
        let with_extra = add_extra_factor(&config, &g, 1).unwrap();
        assert_eq!(with_extra.factors().len(), g.factors().len() + 1);
        assert_eq!(with_extra.scopes().last().unwrap(), &vec![1, 2, 3]);
    }
}
