//! CSV ingestion: column selection, header detection, date joins, returns.

use std::collections::HashMap;
use std::io::Read;

use extremogram::{log_returns, TimeSeries};

use crate::args::{InputArgs, ReturnsMode};
use crate::error::{CliError, Result};

/// All records of one CSV source with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub source: String,
    pub records: Vec<(u64, Vec<String>)>,
}

/// One selected column, before conversion to a core series.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub name: String,
    pub labels: Option<Vec<String>>,
    pub values: Vec<f64>,
}

pub fn read_table(source: &str, reader: impl Read) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(CliError::input(format!("{source}: no data rows")));
    }
    Ok(RawTable {
        source: source.to_string(),
        records,
    })
}

pub fn open_table(path: &str) -> Result<RawTable> {
    if path == "-" {
        read_table("<stdin>", std::io::stdin().lock())
    } else {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::input(format!("cannot open {path}: {e}")))?;
        read_table(path, file)
    }
}

fn parse_number(field: &str) -> Option<f64> {
    field.parse::<f64>().ok()
}

fn is_index(selector: &str) -> bool {
    selector.parse::<usize>().is_ok()
}

fn resolve_column(selector: &str, header: Option<&[String]>, width: usize, source: &str) -> Result<usize> {
    if let Some(pos) = header.and_then(|h| h.iter().position(|name| name == selector)) {
        return Ok(pos);
    }
    match selector.parse::<usize>() {
        Ok(i) if i < width => Ok(i),
        Ok(i) => Err(CliError::input(format!(
            "{source}: column index {i} out of range ({width} columns)"
        ))),
        Err(_) => Err(CliError::input(format!("{source}: no column named '{selector}'"))),
    }
}

/// Selects one value column (and optionally a label column) from a table.
///
/// The first row is a header when a named column is requested or when its
/// value field does not parse as a number, unless `no_header` is set.
pub fn extract(
    table: &RawTable,
    column: Option<&str>,
    date_column: Option<&str>,
    no_header: bool,
) -> Result<LabeledSeries> {
    let source = &table.source;
    let (_, first) = &table.records[0];
    let width = first.len();
    let named = column.is_some_and(|c| !is_index(c)) || date_column.is_some_and(|c| !is_index(c));
    let has_header = !no_header
        && (named || {
            let idx = column.and_then(|c| c.parse::<usize>().ok()).unwrap_or(width - 1);
            first.get(idx).is_none_or(|f| parse_number(f).is_none())
        });
    let header = has_header.then_some(first.as_slice());
    let value_idx = match column {
        Some(c) => resolve_column(c, header, width, source)?,
        None => width - 1,
    };
    let label_idx = match date_column {
        Some(c) => Some(resolve_column(c, header, width, source)?),
        None => (width > 1 && value_idx != 0).then_some(0),
    };
    if label_idx == Some(value_idx) {
        return Err(CliError::input(format!(
            "{source}: label and value columns are the same"
        )));
    }
    let name = header.map_or_else(|| format!("column{value_idx}"), |h| h[value_idx].clone());

    let body = &table.records[usize::from(has_header)..];
    if body.is_empty() {
        return Err(CliError::input(format!("{source}: header but no data rows")));
    }
    let mut values = Vec::with_capacity(body.len());
    let mut labels = label_idx.map(|_| Vec::with_capacity(body.len()));
    for (line, rec) in body {
        if rec.len() != width {
            return Err(CliError::input(format!(
                "{source}, line {line}: expected {width} fields, found {}",
                rec.len()
            )));
        }
        let field = &rec[value_idx];
        let v = parse_number(field).ok_or_else(|| {
            CliError::input(format!(
                "{source}, line {line}: cannot parse '{field}' in column '{name}' as a number"
            ))
        })?;
        if !v.is_finite() {
            return Err(CliError::input(format!(
                "{source}, line {line}: non-finite value '{field}' in column '{name}'"
            )));
        }
        values.push(v);
        if let (Some(l), Some(i)) = (labels.as_mut(), label_idx) {
            l.push(rec[i].clone());
        }
    }
    Ok(LabeledSeries {
        name,
        labels,
        values,
    })
}

/// Keeps the labels present in every series, in the order of the first.
/// Series without labels are aligned by position and must have equal length.
pub fn inner_join(series: Vec<LabeledSeries>) -> Result<Vec<LabeledSeries>> {
    if series.len() < 2 {
        return Ok(series);
    }
    if series.iter().any(|s| s.labels.is_none()) {
        let n = series[0].values.len();
        if series.iter().any(|s| s.values.len() != n) {
            let lens: Vec<usize> = series.iter().map(|s| s.values.len()).collect();
            return Err(CliError::input(format!(
                "series without date labels must have equal lengths, got {lens:?}"
            )));
        }
        return Ok(series
            .into_iter()
            .map(|s| LabeledSeries { labels: None, ..s })
            .collect());
    }
    let mut lookups = Vec::with_capacity(series.len());
    for s in &series {
        let labels = s.labels.as_ref().expect("checked above");
        let mut map = HashMap::with_capacity(labels.len());
        for (l, v) in labels.iter().zip(&s.values) {
            if map.insert(l.as_str(), *v).is_some() {
                return Err(CliError::input(format!(
                    "duplicate date '{l}' in series '{}'",
                    s.name
                )));
            }
        }
        lookups.push(map);
    }
    let common: Vec<String> = series[0]
        .labels
        .as_ref()
        .expect("checked above")
        .iter()
        .filter(|l| lookups.iter().all(|m| m.contains_key(l.as_str())))
        .cloned()
        .collect();
    if common.is_empty() {
        return Err(CliError::input("the input series share no dates"));
    }
    Ok(series
        .iter()
        .zip(&lookups)
        .map(|(s, m)| LabeledSeries {
            name: s.name.clone(),
            values: common.iter().map(|l| m[l.as_str()]).collect(),
            labels: Some(common.clone()),
        })
        .collect())
}

fn to_core(s: LabeledSeries, mode: ReturnsMode) -> Result<TimeSeries> {
    let ts = match s.labels {
        Some(l) => TimeSeries::with_labels(s.values, l)?,
        None => TimeSeries::new(s.values)?,
    };
    Ok(match mode {
        ReturnsMode::Raw => ts,
        ReturnsMode::Log => log_returns(&ts)?,
    })
}

/// Loads `expected` aligned series: either one column from each of
/// `expected` inputs (joined on dates), or `expected` columns of one input.
pub fn load_series(args: &InputArgs, expected: usize) -> Result<Vec<(String, TimeSeries)>> {
    if args.inputs.iter().filter(|p| p.as_str() == "-").count() > 1 {
        return Err(CliError::input("standard input can be read only once"));
    }
    let columns: Vec<Option<&str>> = args.columns.iter().map(|c| Some(c.as_str())).collect();
    let date = args.date_column.as_deref();
    let selected: Vec<LabeledSeries> = if args.inputs.len() == 1 {
        let table = open_table(&args.inputs[0])?;
        let picks = match (columns.len(), expected) {
            (0, 1) => vec![None],
            (1, 1) => columns,
            (k, e) if k == e => columns,
            (k, e) => {
                return Err(CliError::input(format!(
                    "this command needs {e} series: pass {e} inputs or {e} --column selectors for one input (got {k})"
                )))
            }
        };
        picks
            .into_iter()
            .map(|c| extract(&table, c, date, args.no_header))
            .collect::<Result<_>>()?
    } else if args.inputs.len() == expected {
        let picks: Vec<Option<&str>> = match columns.len() {
            0 => vec![None; expected],
            1 => vec![columns[0]; expected],
            k if k == expected => columns,
            k => {
                return Err(CliError::input(format!(
                    "{k} --column selectors for {expected} inputs; give one or {expected}"
                )))
            }
        };
        args.inputs
            .iter()
            .zip(picks)
            .map(|(path, c)| extract(&open_table(path)?, c, date, args.no_header))
            .collect::<Result<_>>()?
    } else {
        return Err(CliError::input(format!(
            "this command needs {expected} series, got {} inputs",
            args.inputs.len()
        )));
    };
    inner_join(selected)?
        .into_iter()
        .map(|s| {
            let name = s.name.clone();
            Ok((name, to_core(s, args.returns)?))
        })
        .collect()
}
