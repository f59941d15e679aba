//! Versioned JSON reports with a content hash.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Gate {
    /// Passes when `value ≤ tolerance`; NaN always fails.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        let value = value + 0.0;
        Gate { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    /// Passes when `value ≥ tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        let value = value + 0.0;
        Gate { name: name.into(), value, tolerance, pass: value >= tolerance }
    }
}

/// Sequence dump written next to the report when CSV output is on.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub subcommand: String,
    pub inputs: Value,
    pub box_: Value,
    pub quadrature: Value,
    pub results: Map<String, Value>,
    pub gates: Vec<Gate>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(subcommand: &str, inputs: Value, box_: Value, quadrature: Value) -> Self {
        Report { subcommand: subcommand.into(), inputs, box_, quadrature, results: Map::new(), gates: Vec::new(), tables: Vec::new() }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).expect("serializable result"));
    }

    pub fn gate(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.gates.iter().filter(|g| !g.pass).map(|g| g.name.as_str()).collect()
    }

    /// Report body without the timestamp; this is what the hash covers.
    pub fn body(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "subcommand": self.subcommand,
            "versions": { "nctorus": nctorus::VERSION, "nctorus-cli": env!("CARGO_PKG_VERSION") },
            "inputs": self.inputs,
            "box": self.box_,
            "quadrature": self.quadrature,
            "results": Value::Object(self.results.clone()),
            "gates": self.gates,
            "pass": self.pass(),
        })
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.body()).expect("report serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Full document: body, its hash, and a separate timestamp.
    pub fn document(&self, timestamp: u64) -> Value {
        let mut v = self.body();
        let obj = v.as_object_mut().expect("object body");
        obj.insert("hash".into(), Value::String(self.hash()));
        obj.insert("timestamp".into(), json!(timestamp));
        v
    }
}
