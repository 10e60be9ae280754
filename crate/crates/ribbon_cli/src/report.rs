//! Table output as headered TSV or `{meta, rows}` JSON.

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

pub struct Meta<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub algebra: &'a str,
    pub max_edges: usize,
}

pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "NA".into(),
        other => other.to_string(),
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, meta: &Meta) -> String {
        let version = env!("CARGO_PKG_VERSION");
        match format {
            Format::Tsv => {
                let mut out = format!(
                    "# ribbon {version} command={} algebra={} max_edges={} seed={}\n",
                    meta.command, meta.algebra, meta.max_edges, meta.seed
                );
                out.push_str(&self.columns.join("\t"));
                out.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(cell).collect();
                    out.push_str(&cells.join("\t"));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
                    .collect();
                let doc = json!({
                    "meta": {
                        "tool": "ribbon",
                        "version": version,
                        "command": meta.command,
                        "algebra": meta.algebra,
                        "max_edges": meta.max_edges,
                        "seed": meta.seed,
                        "columns": self.columns,
                    },
                    "rows": rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                s
            }
        }
    }
}
