//! Text formats: factor graphs, learned models, sample files, and blanket
//! reports. All writers are deterministic; parse(write(x)) gives `x` back
//! and real values survive with 17 significant digits.

use crate::canonical::CanonicalFactor;
use crate::error::{FgError, Result};
use crate::model::{Assignment, Factor, FactorGraph, VariableSpec};
use crate::params::LearnedModel;
use crate::sampling::Dataset;
use crate::structure::BlanketChoice;
use std::fmt::Write as _;

/// 17 significant digits, enough for an exact f64 round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token.parse::<f64>().map_err(|_| FgError::Parse {
        line,
        message: format!("expected a real number, got {token:?}"),
    })
}

fn parse_u32(token: &str, line: usize) -> Result<u32> {
    token.parse::<u32>().map_err(|_| FgError::Parse {
        line,
        message: format!("expected a non-negative integer, got {token:?}"),
    })
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn write_variables(out: &mut String, variables: &[VariableSpec]) {
    let _ = writeln!(out, "vars {}", variables.len());
    for v in variables {
        match &v.name {
            None => {
                let _ = writeln!(out, "var {} {}", v.id, v.cardinality);
            }
            Some(name) => {
                let _ = writeln!(out, "var {} {} {}", v.id, v.cardinality, name);
            }
        }
    }
}

struct LineReader<'a> {
    lines: std::iter::Peekable<std::vec::IntoIter<(usize, &'a str)>>,
    last_line: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        let lines: Vec<(usize, &str)> = content_lines(text).collect();
        LineReader { lines: lines.into_iter().peekable(), last_line: 0 }
    }

    fn next(&mut self, expected: &str) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((no, line)) => {
                self.last_line = no;
                Ok((no, line))
            }
            None => Err(FgError::Parse {
                line: self.last_line + 1,
                message: format!("unexpected end of file, expected {expected}"),
            }),
        }
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.lines
            .peek()
            .and_then(|(_, l)| l.split_whitespace().next())
    }

    fn is_empty(&mut self) -> bool {
        self.lines.peek().is_none()
    }
}

fn parse_variables(reader: &mut LineReader) -> Result<Vec<VariableSpec>> {
    let (no, header) = reader.next("a `vars <count>` header")?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("vars") {
        return Err(FgError::Parse { line: no, message: "expected `vars <count>`".into() });
    }
    let n = parse_u32(
        tokens.next().ok_or(FgError::Parse { line: no, message: "missing variable count".into() })?,
        no,
    )?;
    if tokens.next().is_some() {
        return Err(FgError::Parse { line: no, message: "trailing tokens after `vars`".into() });
    }
    let mut variables = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (no, line) = reader.next("a `var <id> <cardinality> [name]` line")?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("var") {
            return Err(FgError::Parse {
                line: no,
                message: format!("expected a `var` line, got {line:?}"),
            });
        }
        let id = parse_u32(
            tokens.next().ok_or(FgError::Parse { line: no, message: "missing variable id".into() })?,
            no,
        )?;
        let card = parse_u32(
            tokens
                .next()
                .ok_or(FgError::Parse { line: no, message: "missing cardinality".into() })?,
            no,
        )?;
        let spec = match tokens.next() {
            None => VariableSpec::new(id, card),
            Some(name) => {
                if tokens.next().is_some() {
                    return Err(FgError::Parse {
                        line: no,
                        message: "variable names cannot contain spaces".into(),
                    });
                }
                VariableSpec::named(id, card, name)
            }
        };
        variables.push(spec);
    }
    Ok(variables)
}

/// Parses `factor <size> <ids...>` and the table that follows it.
fn parse_factor_block(
    reader: &mut LineReader,
    factor_line: (usize, &str),
    variables: &[VariableSpec],
) -> Result<Factor> {
    let (no, line) = factor_line;
    let mut tokens = line.split_whitespace();
    tokens.next(); // the `factor` keyword, checked by the caller
    let size = parse_u32(
        tokens.next().ok_or(FgError::Parse { line: no, message: "missing scope size".into() })?,
        no,
    )? as usize;
    let scope: Vec<u32> = tokens
        .map(|t| parse_u32(t, no))
        .collect::<Result<_>>()?;
    if scope.len() != size {
        return Err(FgError::Parse {
            line: no,
            message: format!("scope size {size} does not match {} ids", scope.len()),
        });
    }
    let mut cards = Vec::with_capacity(scope.len());
    let mut cells = 1usize;
    for &v in &scope {
        let spec = variables.get(v as usize).ok_or(FgError::Parse {
            line: no,
            message: format!("factor references unknown variable {v}"),
        })?;
        cards.push(spec.cardinality);
        cells = cells.saturating_mul(spec.cardinality as usize);
    }
    let mut log_values = Vec::with_capacity(cells);
    for _ in 0..cells {
        let (vno, vline) = reader.next("a factor table value")?;
        log_values.push(parse_f64(vline, vno)?);
    }
    Factor::new(scope, cards, log_values)
}

pub fn write_factor_graph(graph: &FactorGraph) -> String {
    let mut out = String::new();
    write_variables(&mut out, graph.variables());
    for f in graph.factors() {
        let _ = write!(out, "factor {}", f.scope().len());
        for &v in f.scope() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        for &value in f.log_values() {
            let _ = writeln!(out, "{}", fmt_f64(value));
        }
    }
    out
}

pub fn parse_factor_graph(text: &str) -> Result<FactorGraph> {
    let mut reader = LineReader::new(text);
    let variables = parse_variables(&mut reader)?;
    let mut factors = Vec::new();
    while !reader.is_empty() {
        let line = reader.next("a `factor` line")?;
        if line.1.split_whitespace().next() != Some("factor") {
            return Err(FgError::Parse {
                line: line.0,
                message: format!("expected a `factor` line, got {:?}", line.1),
            });
        }
        factors.push(parse_factor_block(&mut reader, line, &variables)?);
    }
    FactorGraph::new(variables, factors)
}

pub fn write_learned_model(model: &LearnedModel) -> String {
    let mut out = String::new();
    write_variables(&mut out, model.variables());
    let _ = write!(out, "baseline");
    for &v in model.baseline().values() {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
    for cf in model.factors() {
        let _ = write!(out, "factor {}", cf.scope().len());
        for &v in cf.scope() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        let _ = write!(out, "given {}", cf.conditioning.len());
        for &v in &cf.conditioning {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        for &value in cf.factor.log_values() {
            let _ = writeln!(out, "{}", fmt_f64(value));
        }
    }
    out
}

pub fn parse_learned_model(text: &str) -> Result<LearnedModel> {
    let mut reader = LineReader::new(text);
    let variables = parse_variables(&mut reader)?;
    let (no, line) = reader.next("a `baseline` line")?;
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("baseline") {
        return Err(FgError::Parse {
            line: no,
            message: format!("expected a `baseline` line, got {line:?}"),
        });
    }
    let values: Vec<u32> = tokens.map(|t| parse_u32(t, no)).collect::<Result<_>>()?;
    if values.len() != variables.len() {
        return Err(FgError::Parse {
            line: no,
            message: format!(
                "baseline has {} values for {} variables",
                values.len(),
                variables.len()
            ),
        });
    }
    let baseline = Assignment::full(values);
    let mut factors = Vec::new();
    while !reader.is_empty() {
        let factor_line = reader.next("a `factor` line")?;
        if factor_line.1.split_whitespace().next() != Some("factor") {
            return Err(FgError::Parse {
                line: factor_line.0,
                message: format!("expected a `factor` line, got {:?}", factor_line.1),
            });
        }
        // the `given` line sits between the factor header and its table
        let (gno, gline) = reader.next("a `given` line")?;
        let mut tokens = gline.split_whitespace();
        if tokens.next() != Some("given") {
            return Err(FgError::Parse {
                line: gno,
                message: format!("expected a `given` line, got {gline:?}"),
            });
        }
        let size = parse_u32(
            tokens
                .next()
                .ok_or(FgError::Parse { line: gno, message: "missing conditioning size".into() })?,
            gno,
        )? as usize;
        let conditioning: Vec<u32> = tokens.map(|t| parse_u32(t, gno)).collect::<Result<_>>()?;
        if conditioning.len() != size {
            return Err(FgError::Parse {
                line: gno,
                message: format!(
                    "conditioning size {size} does not match {} ids",
                    conditioning.len()
                ),
            });
        }
        let factor = parse_factor_block(&mut reader, factor_line, &variables)?;
        factors.push(CanonicalFactor { factor, baseline: baseline.clone(), conditioning });
    }
    LearnedModel::new(variables, factors, baseline)
}

/// Either kind of model file; a `baseline` line right after the variable
/// block marks a learned model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Graph(FactorGraph),
    Learned(LearnedModel),
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let mut reader = LineReader::new(text);
    parse_variables(&mut reader)?;
    let learned = reader.peek_keyword() == Some("baseline");
    if learned {
        Ok(ModelFile::Learned(parse_learned_model(text)?))
    } else {
        Ok(ModelFile::Graph(parse_factor_graph(text)?))
    }
}

pub fn write_samples(data: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# seed {}", data.seed());
    let _ = write!(out, "# cards");
    for v in data.variables() {
        let _ = write!(out, " {}", v.cardinality);
    }
    out.push('\n');
    let names: Vec<String> = data.variables().iter().map(|v| v.display_name()).collect();
    let _ = writeln!(out, "{}", names.join(","));
    for row in data.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Dataset> {
    let mut seed = 0u64;
    let mut cards: Option<Vec<u32>> = None;
    let mut header: Option<(usize, &str)> = None;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut tokens = comment.split_whitespace();
            match tokens.next() {
                Some("seed") => {
                    let t = tokens.next().ok_or(FgError::Parse {
                        line: no,
                        message: "missing seed value".into(),
                    })?;
                    seed = t.parse::<u64>().map_err(|_| FgError::Parse {
                        line: no,
                        message: format!("bad seed {t:?}"),
                    })?;
                }
                Some("cards") => {
                    cards = Some(tokens.map(|t| parse_u32(t, no)).collect::<Result<_>>()?);
                }
                _ => {}
            }
            continue;
        }
        if header.is_none() {
            header = Some((no, line));
        } else {
            let row: Vec<u32> = line
                .split(',')
                .map(|t| parse_u32(t.trim(), no))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
    }
    let (hno, header) = header.ok_or(FgError::Parse {
        line: text.lines().count() + 1,
        message: "missing header line".into(),
    })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let n = names.len();
    for row in &rows {
        if row.len() != n {
            return Err(FgError::Parse {
                line: hno,
                message: format!("row width {} does not match {n} columns", row.len()),
            });
        }
    }
    let cards = match cards {
        Some(c) => {
            if c.len() != n {
                return Err(FgError::Parse {
                    line: hno,
                    message: format!("cards comment lists {} entries for {n} columns", c.len()),
                });
            }
            c
        }
        // no metadata: infer from the data, never below a binary range
        None => (0..n)
            .map(|i| rows.iter().map(|r| r[i] + 1).max().unwrap_or(2).max(2))
            .collect(),
    };
    let variables: Vec<VariableSpec> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let default = format!("x{i}");
            if *name == default {
                VariableSpec::new(i as u32, cards[i])
            } else {
                VariableSpec::named(i as u32, cards[i], *name)
            }
        })
        .collect();
    Dataset::new(variables, rows, seed)
}

pub fn write_blanket_report(choices: &[BlanketChoice]) -> String {
    let mut out = String::from("# scope;blanket;entropy\n");
    for c in choices {
        let scope: Vec<String> = c.scope.iter().map(|v| v.to_string()).collect();
        let blanket: Vec<String> = c.blanket.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "{};{};{}",
            scope.join(","),
            blanket.join(","),
            fmt_f64(c.entropy)
        );
    }
    out
}

pub fn parse_blanket_report(text: &str) -> Result<Vec<BlanketChoice>> {
    let mut choices = Vec::new();
    for (no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() != 3 {
            return Err(FgError::Parse {
                line: no,
                message: format!("expected `scope;blanket;entropy`, got {line:?}"),
            });
        }
        let parse_ids = |field: &str| -> Result<Vec<u32>> {
            if field.is_empty() {
                return Ok(Vec::new());
            }
            field.split(',').map(|t| parse_u32(t.trim(), no)).collect()
        };
        choices.push(BlanketChoice {
            scope: parse_ids(fields[0])?,
            blanket: parse_ids(fields[1])?,
            entropy: parse_f64(fields[2], no)?,
        });
    }
    Ok(choices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::OracleAccess;
    use crate::generate::{generate_model, GraphFamily};
    use crate::oracle::JointTable;
    use crate::params::learn_parameters_with_access;
    use crate::sampling::exact_sample;
    use proptest::prelude::*;

    #[test]
    fn graph_round_trip_is_lossless() {
        for seed in [1u64, 2, 3, 17] {
            let g = generate_model(
                &GraphFamily::Random { max_scope: 3, max_degree: 4, factor_count: 6 },
                6,
                3,
                5.0,
                seed,
            )
            .unwrap();
            let text = write_factor_graph(&g);
            let parsed = parse_factor_graph(&text).unwrap();
            assert_eq!(g, parsed);
            // and the re-serialization is byte-identical
            assert_eq!(text, write_factor_graph(&parsed));
        }
    }

    #[test]
    fn graph_format_matches_the_documented_shape() {
        let g = generate_model(&GraphFamily::Chain, 2, 2, 2.0, 1).unwrap();
        let text = write_factor_graph(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "vars 2");
        assert_eq!(lines[1], "var 0 2");
        assert_eq!(lines[2], "var 1 2");
        assert_eq!(lines[3], "factor 2 0 1");
        assert_eq!(lines.len(), 4 + 4);
        assert!(lines[4].parse::<f64>().is_ok());
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# a model\n\nvars 1\nvar 0 2 flip\n# factor below\nfactor 1 0\n0e0\n5e-1\n";
        let g = parse_factor_graph(text).unwrap();
        assert_eq!(g.variables()[0].name.as_deref(), Some("flip"));
        assert_eq!(g.factors()[0].log_values(), &[0.0, 0.5]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_table = "vars 1\nvar 0 2\nfactor 1 0\n0e0\nnot-a-number\n";
        match parse_factor_graph(bad_table) {
            Err(FgError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let truncated = "vars 1\nvar 0 2\nfactor 1 0\n0e0\n";
        assert!(matches!(parse_factor_graph(truncated), Err(FgError::Parse { line: 5, .. })));
        let unknown = "vars 1\nvar 0 2\nfactor 1 3\n0e0\n1e0\n";
        assert!(matches!(parse_factor_graph(unknown), Err(FgError::Parse { line: 3, .. })));
    }

    #[test]
    fn learned_model_round_trip() {
        let g = generate_model(&GraphFamily::Chain, 4, 3, 4.0, 9).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        let access = OracleAccess::new(&joint);
        // a mixed baseline that is valid whatever cardinalities were drawn
        let values: Vec<u32> = g
            .variables()
            .iter()
            .map(|v| if v.id % 2 == 1 { v.cardinality - 1 } else { 0 })
            .collect();
        let baseline = Assignment::full(values);
        let model = learn_parameters_with_access(&g.scopes(), &access, &baseline).unwrap();
        let text = write_learned_model(&model);
        let parsed = parse_learned_model(&text).unwrap();
        assert_eq!(model, parsed);
        assert_eq!(text, write_learned_model(&parsed));
        // detection picks the right branch
        match parse_model_file(&text).unwrap() {
            ModelFile::Learned(m) => assert_eq!(m, model),
            other => panic!("misdetected: {other:?}"),
        }
        let gtext = write_factor_graph(&g);
        assert!(matches!(parse_model_file(&gtext).unwrap(), ModelFile::Graph(_)));
    }

    #[test]
    fn empty_learned_model_keeps_its_baseline() {
        let vars = vec![VariableSpec::new(0, 2), VariableSpec::new(1, 2)];
        let baseline = Assignment::full(vec![1, 0]);
        let model = LearnedModel::new(vars, vec![], baseline).unwrap();
        let text = write_learned_model(&model);
        let parsed = parse_learned_model(&text).unwrap();
        assert_eq!(model, parsed);
    }

    #[test]
    fn samples_round_trip() {
        let g = generate_model(&GraphFamily::Star, 4, 3, 3.0, 5).unwrap();
        let joint = JointTable::from_graph(&g).unwrap();
        let data = exact_sample(&joint, 500, 77).unwrap();
        let text = write_samples(&data);
        let parsed = parse_samples(&text).unwrap();
        assert_eq!(data, parsed);
        assert_eq!(text, write_samples(&parsed));
        assert!(text.starts_with("# seed 77\n"));
    }

    #[test]
    fn samples_without_metadata_infer_cardinalities() {
        let text = "x0,x1\n0,2\n1,0\n";
        let data = parse_samples(text).unwrap();
        assert_eq!(data.variables()[0].cardinality, 2);
        assert_eq!(data.variables()[1].cardinality, 3);
        assert_eq!(data.seed(), 0);
        assert_eq!(data.m(), 2);
    }

    #[test]
    fn samples_reject_ragged_rows_and_bad_values() {
        assert!(parse_samples("x0,x1\n0\n").is_err());
        assert!(parse_samples("# cards 2 2\nx0,x1\n0,7\n").is_err());
        assert!(parse_samples("").is_err());
    }

    #[test]
    fn blanket_report_round_trip() {
        let choices = vec![
            BlanketChoice { scope: vec![0], blanket: vec![], entropy: std::f64::consts::LN_2 },
            BlanketChoice { scope: vec![1, 2], blanket: vec![0, 3], entropy: 0.25 },
        ];
        let text = write_blanket_report(&choices);
        let parsed = parse_blanket_report(&text).unwrap();
        assert_eq!(choices, parsed);
    }

    proptest! {
        #[test]
        fn value_formatting_round_trips(bits in any::<i64>()) {
            let v = f64::from_bits(bits as u64);
            prop_assume!(v.is_finite());
            let text = fmt_f64(v);
            let back: f64 = text.parse().unwrap();
            prop_assert_eq!(v.to_bits(), back.to_bits());
        }

        #[test]
        fn random_chain_graphs_round_trip(seed in 1u64..500) {
            let g = generate_model(&GraphFamily::Chain, 5, 4, 6.0, seed).unwrap();
            let text = write_factor_graph(&g);
            prop_assert_eq!(&parse_factor_graph(&text).unwrap(), &g);
        }
    }
}
