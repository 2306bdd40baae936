//! Output envelope and the CSV/JSON renderers.
//!
//! Every run emits its resolved parameter set alongside the payload, so a
//! report can be reproduced bit-for-bit from its own header. CSV floats are
//! printed with 17 significant digits, which round-trips f64 exactly.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "frogrange-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell; `Empty` renders as a blank CSV field and a JSON null.
#[derive(Debug, Clone)]
pub enum Cell {
    U(u64),
    I(i64),
    F(f64),
    S(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U(v) => v.to_string(),
            Cell::I(v) => v.to_string(),
            Cell::F(v) => format_f64(*v),
            Cell::S(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::U(v) => json!(v),
            Cell::I(v) => json!(v),
            Cell::F(v) => json!(v),
            Cell::S(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

/// Canonical float rendering for CSV: 17 significant digits, lossless.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Either a uniform table or a free-form JSON object with a table fallback
/// for CSV mode.
pub enum Payload {
    Table(Table),
    Object { json: Value, csv: Table },
}

pub struct Envelope {
    pub subcommand: &'static str,
    pub parameters: BTreeMap<String, Value>,
    pub timestamp: Option<u64>,
    pub payload: Payload,
}

impl Envelope {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema={SCHEMA}\n"));
        out.push_str(&format!(
            "# tool=frogrange {}\n",
            env!("CARGO_PKG_VERSION")
        ));
        out.push_str(&format!("# subcommand={}\n", self.subcommand));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# param {k}={}\n", param_text(v)));
        }
        if let Some(ts) = self.timestamp {
            out.push_str(&format!("# timestamp={ts}\n"));
        }
        let table = match &self.payload {
            Payload::Table(t) => t,
            Payload::Object { csv, .. } => csv,
        };
        out.push_str(&table.columns.join(","));
        out.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut map = Map::new();
        map.insert("schema".into(), json!(SCHEMA));
        map.insert("tool".into(), json!("frogrange"));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        map.insert("subcommand".into(), json!(self.subcommand));
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        map.insert("parameters".into(), Value::Object(params));
        if let Some(ts) = self.timestamp {
            map.insert("timestamp".into(), json!(ts));
        }
        let payload = match &self.payload {
            Payload::Table(t) => {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = t
                            .columns
                            .iter()
                            .zip(row.iter())
                            .map(|(c, cell)| (c.to_string(), cell.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                json!({ "rows": rows })
            }
            Payload::Object { json, .. } => json.clone(),
        };
        map.insert("payload".into(), payload);
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("serialization");
        text.push('\n');
        text
    }
}

/// Flat text form of a parameter value for the CSV header.
fn param_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
