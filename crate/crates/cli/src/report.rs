//! Report records and their JSON / CSV encodings.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub kind: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    #[serde(skip)]
    pub experiment: String,
    #[serde(skip)]
    pub q: u32,
    pub op: String,
    pub inputs: Value,
    pub outputs: Value,
    pub assertion: Option<Assertion>,
    pub measurement: Option<Measurement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub asserted: usize,
    pub passed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: Value,
    pub version: String,
    pub timestamp: String,
    pub results: Vec<Entry>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: Value, timestamp: String, results: Vec<Entry>) -> Self {
        let asserted = results.iter().filter(|e| e.assertion.is_some()).count();
        let passed = results.iter().filter(|e| e.assertion.as_ref().is_some_and(|a| a.pass)).count();
        Report { config, version: ffkakeya::VERSION.to_string(), timestamp, results, summary: Summary { asserted, passed } }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.asserted == self.summary.passed
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.results.iter().filter(|e| e.assertion.as_ref().is_some_and(|a| !a.pass))
    }

    pub fn write_json(&self, mut w: impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }

    /// One row per result: `experiment,q,metric,value,bound,ratio,pass`.
    pub fn write_csv(&self, w: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["experiment", "q", "metric", "value", "bound", "ratio", "pass"])?;
        for e in &self.results {
            let (value, bound, ratio) = match &e.measurement {
                Some(m) => (m.value.to_string(), m.bound.to_string(), m.ratio.to_string()),
                None => (scalar(&e.outputs), String::new(), String::new()),
            };
            let pass = e.assertion.as_ref().map_or(String::new(), |a| a.pass.to_string());
            out.write_record([e.experiment.as_str(), &e.q.to_string(), &e.op, &value, &bound, &ratio, &pass])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The `value` output if present, else the whole output object compacted.
fn scalar(v: &Value) -> String {
    match v.get("value") {
        Some(x) => x.to_string(),
        None => v.to_string(),
    }
}

/// Accumulates entries for one experiment at one field size.
pub struct Recorder {
    experiment: String,
    q: u32,
    pub entries: Vec<Entry>,
}

impl Recorder {
    pub fn new(experiment: &str, q: u32) -> Self {
        Recorder { experiment: experiment.to_string(), q, entries: Vec::new() }
    }

    fn push(&mut self, op: &str, inputs: Value, outputs: Value, assertion: Option<Assertion>, measurement: Option<Measurement>) {
        self.entries.push(Entry {
            experiment: self.experiment.clone(),
            q: self.q,
            op: op.to_string(),
            inputs,
            outputs,
            assertion,
            measurement,
        });
    }

    pub fn check(&mut self, op: &str, kind: &str, inputs: Value, outputs: Value, pass: bool) {
        self.push(op, inputs, outputs, Some(Assertion { kind: kind.to_string(), pass }), None);
    }

    /// A measured ratio `value / bound` that never fails the run.
    pub fn measure(&mut self, op: &str, inputs: Value, outputs: Value, value: f64, bound: f64) {
        self.push(op, inputs, outputs, None, Some(measured(value, bound)));
    }

    /// A measured ratio that is also asserted (`value <= bound` unless `pass` says otherwise).
    #[allow(clippy::too_many_arguments)]
    pub fn check_measure(&mut self, op: &str, kind: &str, inputs: Value, outputs: Value, value: f64, bound: f64, pass: bool) {
        self.push(op, inputs, outputs, Some(Assertion { kind: kind.to_string(), pass }), Some(measured(value, bound)));
    }

    pub fn note(&mut self, op: &str, inputs: Value, outputs: Value) {
        self.push(op, inputs, outputs, None, None);
    }
}

fn measured(value: f64, bound: f64) -> Measurement {
    let ratio = if bound != 0.0 { value / bound } else { 0.0 };
    Measurement { value, bound, ratio }
}
