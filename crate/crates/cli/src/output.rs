//! Number formatting, metadata and the CSV/JSON writers.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use secrecy_core::gamma::BARRIER_GAP;
use secrecy_core::rd::{ITER_MAX, ITER_TOL};
use secrecy_core::region::{EQUALITY_TOL, TRANSMISSIBILITY_SLACK};

use crate::error::{CliError, CliResult};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`: fixed notation for exponents in `[-4, 9)`, scientific otherwise,
/// trailing zeros removed.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Rounds every float in a JSON tree to nine significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = sig9(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverTolerances {
    pub alternating_objective_change: f64,
    pub alternating_max_iterations: usize,
    pub barrier_duality_gap_nats: f64,
    pub transmissibility_slack: f64,
    pub equality_check: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub model_sha256: String,
    pub seed: Option<u64>,
    /// tie tolerance for sys/gen verdicts
    pub tol: f64,
    pub solver_tolerances: SolverTolerances,
}

impl Metadata {
    pub fn new(command: &'static str, model_sha256: &str, seed: Option<u64>, tol: f64) -> Self {
        Metadata {
            tool: "secrecy",
            version: env!("CARGO_PKG_VERSION"),
            command,
            model_sha256: model_sha256.to_string(),
            seed,
            tol,
            solver_tolerances: SolverTolerances {
                alternating_objective_change: ITER_TOL,
                alternating_max_iterations: ITER_MAX,
                barrier_duality_gap_nats: BARRIER_GAP,
                transmissibility_slack: TRANSMISSIBILITY_SLACK,
                equality_check: EQUALITY_TOL,
            },
        }
    }

    fn comment_lines(&self) -> Vec<String> {
        let t = &self.solver_tolerances;
        vec![
            format!("# tool: {} {}", self.tool, self.version),
            format!("# command: {}", self.command),
            format!("# model_sha256: {}", self.model_sha256),
            format!("# seed: {}", self.seed.map_or("none".to_string(), |s| s.to_string())),
            format!("# tol: {}", sig9(self.tol)),
            format!(
                "# solver_tolerances: alternating_objective_change={} alternating_max_iterations={} \
                 barrier_duality_gap_nats={} transmissibility_slack={} equality_check={}",
                sig9(t.alternating_objective_change),
                t.alternating_max_iterations,
                sig9(t.barrier_duality_gap_nats),
                sig9(t.transmissibility_slack),
                sig9(t.equality_check)
            ),
        ]
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig9(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::json!(x),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Column-ordered rows with the run's metadata.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn render(&self, meta: &Metadata, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => {
                let mut out = meta.comment_lines().join("\n");
                out.push('\n');
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Io(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?);
                Ok(out)
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, cell)| (c.clone(), cell.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                document(meta, serde_json::json!({ "columns": self.columns, "rows": rows }))
            }
        }
    }
}

/// `{"metadata": …, …body}` as rounded, pretty-printed JSON.
pub fn document(meta: &Metadata, body: Value) -> CliResult<String> {
    let mut obj = Map::new();
    obj.insert("metadata".into(), serde_json::to_value(meta).map_err(|e| CliError::Io(e.to_string()))?);
    match body {
        Value::Object(fields) => obj.extend(fields),
        other => {
            obj.insert("result".into(), other);
        }
    }
    let mut v = Value::Object(obj);
    round_floats(&mut v);
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Key/value listing of a flat JSON object for `--format csv`.
pub fn flat_table(body: &Value) -> Table {
    let mut rows = Vec::new();
    flatten("", body, &mut rows);
    Table { columns: vec!["quantity".into(), "value".into()], rows }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<Cell>>) {
    let name = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&name(k), x, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten(&name(&i.to_string()), x, rows)),
        Value::Number(n) => rows.push(vec![
            Cell::Text(prefix.into()),
            n.as_f64().map_or_else(|| Cell::Text(n.to_string()), Cell::Num),
        ]),
        Value::Bool(b) => rows.push(vec![Cell::Text(prefix.into()), Cell::Text(b.to_string())]),
        Value::String(s) => rows.push(vec![Cell::Text(prefix.into()), Cell::Text(s.clone())]),
        Value::Null => rows.push(vec![Cell::Text(prefix.into()), Cell::Empty]),
    }
}

/// Writes to the `--out` path, or standard output when absent.
pub fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
