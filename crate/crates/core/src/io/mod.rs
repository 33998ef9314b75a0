//! System description files.
//!
//! A file is one JSON object holding a system spec tagged by `kind`, plus
//! the optional blocks `name`, `parameters`, `dynamics` and `simulation`.
//! Any numeric field may instead hold a string expression over the entries
//! of `parameters`:
//!
//! ```json
//! {
//!   "kind": "two_neuron",
//!   "parameters": { "d": 0.5 },
//!   "a1": 0.8, "a2": 0.5, "a12": 1, "a21": 1,
//!   "tau1": "d", "tau2": "d - 0.1",
//!   "L1": 0.5, "L2": 0.2
//! }
//! ```

pub mod expr;
pub mod locate;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::sim::SimConfig;
use crate::system::concrete::{BamDynamics, GeneralDynamics, TwoNeuronDynamics};
use crate::system::{Activation, ConcreteSystem, SystemSpec, Violation};
use locate::{format_path, locate, parse_path, Seg};

/// Top-level keys that are not part of the system spec.
const RESERVED: [&str; 4] = ["name", "parameters", "dynamics", "simulation"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Rejected input, with one diagnostic per problem found.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct InputError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.diagnostics.iter().map(ToString::to_string).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

impl InputError {
    pub fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        InputError { diagnostics: vec![Diagnostic { path: path.into(), line: None, column: None, message: message.into() }] }
    }

    fn from_violations(prefix: &str, v: Vec<Violation>) -> Self {
        InputError {
            diagnostics: v
                .into_iter()
                .map(|v| Diagnostic { path: join(prefix, &v.path), line: None, column: None, message: v.message })
                .collect(),
        }
    }

    /// Fills in source positions from `text`.
    fn located(mut self, text: Option<&str>) -> Self {
        if let Some(text) = text {
            for d in &mut self.diagnostics {
                if d.line.is_none() {
                    if let Some(p) = locate(text, &parse_path(&d.path)) {
                        d.line = Some(p.line);
                        d.column = Some(p.column);
                    }
                }
            }
        }
        self
    }
}

fn join(prefix: &str, path: &str) -> String {
    match (prefix.is_empty(), path.is_empty()) {
        (true, _) => path.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) if path.starts_with('[') => format!("{prefix}{path}"),
        (false, false) => format!("{prefix}.{path}"),
    }
}

/// Kind-specific simulation dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dynamics {
    General(GeneralDynamics),
    Bam(BamDynamics),
    TwoNeuron(TwoNeuronDynamics),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub name: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub spec: SystemSpec,
    pub dynamics: Dynamics,
    pub simulation: Option<SimConfig>,
    /// The document as written, before expressions were evaluated.
    pub source: Value,
}

impl SystemFile {
    /// Parses and validates a file, attaching line numbers to diagnostics.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| InputError {
            diagnostics: vec![Diagnostic {
                path: String::new(),
                line: Some(e.line()),
                column: Some(e.column()),
                message: format!("malformed JSON: {e}"),
            }],
        })?;
        Self::build(doc).map_err(|e| e.located(Some(text)))
    }

    /// Parses and validates an already-decoded document.
    pub fn from_value(doc: Value) -> Result<Self, InputError> {
        Self::build(doc)
    }

    /// Document for a spec with default dynamics.
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let source = serde_json::to_value(spec).expect("specs serialize");
        Self::build(source).expect("a valid spec yields a valid file")
    }

    fn build(doc: Value) -> Result<Self, InputError> {
        let Value::Object(obj) = &doc else {
            return Err(InputError::single("", "expected a JSON object"));
        };
        let parameters = parameters(obj.get("parameters"))?;
        let mut resolved = obj.clone();
        let mut errors = Vec::new();
        for (k, v) in resolved.iter_mut() {
            if !matches!(k.as_str(), "kind" | "name" | "parameters") {
                substitute(v, &mut vec![Seg::Key(k.clone())], &parameters, &mut errors);
            }
        }
        if !errors.is_empty() {
            return Err(InputError { diagnostics: errors });
        }

        let name = match resolved.get("name") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(InputError::single("name", "expected a string")),
        };
        let kind = match resolved.get("kind") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(InputError::single("kind", "expected a string")),
            None => return Err(InputError::single("kind", "missing; expected one of general, linear, bam, two_neuron")),
        };
        let mut fields = resolved.clone();
        for key in RESERVED {
            fields.remove(key);
        }
        fields.remove("kind");
        let fields = Value::Object(fields);
        let spec = match kind.as_str() {
            "general" => SystemSpec::General(typed("", fields)?),
            "linear" => SystemSpec::Linear(typed("", fields)?),
            "bam" => SystemSpec::Bam(typed("", fields)?),
            "two_neuron" => SystemSpec::TwoNeuron(typed("", fields)?),
            other => {
                return Err(InputError::single(
                    "kind",
                    format!("unknown kind `{other}`; expected one of general, linear, bam, two_neuron"),
                ))
            }
        };
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(InputError::from_violations("", violations));
        }

        let dyn_value = resolved.get("dynamics").cloned().unwrap_or(Value::Object(Map::new()));
        let dynamics = match &spec {
            SystemSpec::General(_) | SystemSpec::Linear(_) => Dynamics::General(typed("dynamics", dyn_value)?),
            SystemSpec::Bam(_) => Dynamics::Bam(typed("dynamics", dyn_value)?),
            SystemSpec::TwoNeuron(_) => Dynamics::TwoNeuron(typed("dynamics", dyn_value)?),
        };
        let simulation = match resolved.get("simulation") {
            None | Some(Value::Null) => None,
            Some(v) => Some(typed::<SimConfig>("simulation", v.clone())?),
        };
        if let Some(cfg) = &simulation {
            cfg.steps().map_err(|e| InputError::single("simulation", e.to_string()))?;
        }
        let file = SystemFile { name, parameters, spec, dynamics, simulation, source: doc };
        file.concrete()?;
        Ok(file)
    }

    /// SHA-256 of the compact serialization of [`Self::source`].
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.source.to_string().as_bytes()))
    }

    /// Concrete realisation used for simulation.
    pub fn concrete(&self) -> Result<ConcreteSystem, InputError> {
        let built = match (&self.spec, &self.dynamics) {
            (SystemSpec::General(s), Dynamics::General(d)) => ConcreteSystem::general(s, d),
            (SystemSpec::Linear(s), Dynamics::General(d)) => ConcreteSystem::linear(s, d),
            (SystemSpec::Bam(s), Dynamics::Bam(d)) => ConcreteSystem::bam(s, d),
            (SystemSpec::TwoNeuron(s), Dynamics::TwoNeuron(d)) => ConcreteSystem::two_neuron(s, d),
            _ => return Err(InputError::single("dynamics", format!("does not match kind `{}`", self.spec.kind()))),
        };
        built.map_err(|v| {
            let mut e = InputError::from_violations("", v);
            for d in &mut e.diagnostics {
                if !d.path.starts_with("dynamics") {
                    d.path = join("dynamics", &d.path);
                }
            }
            e
        })
    }

    /// Activations `(f, g)` of the BAM view, for the equilibrium solver.
    pub fn activations(&self) -> Option<(Vec<Activation>, Vec<Activation>)> {
        match (&self.spec, &self.dynamics) {
            (SystemSpec::Bam(s), Dynamics::Bam(d)) => Some(d.activations(s)),
            (SystemSpec::TwoNeuron(s), Dynamics::TwoNeuron(d)) => {
                let (f1, f2) = d.activations(s);
                Some((vec![f1], vec![f2]))
            }
            _ => None,
        }
    }
}

fn parameters(v: Option<&Value>) -> Result<BTreeMap<String, f64>, InputError> {
    let mut out = BTreeMap::new();
    match v {
        None | Some(Value::Null) => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let path = format!("parameters.{k}");
                let valid_name = k.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid_name {
                    return Err(InputError::single(path, "parameter names must be identifiers"));
                }
                match v.as_f64() {
                    Some(x) if x.is_finite() => {
                        out.insert(k.clone(), x);
                    }
                    _ => return Err(InputError::single(path, "expected a finite number")),
                }
            }
        }
        Some(_) => return Err(InputError::single("parameters", "expected an object of numbers")),
    }
    Ok(out)
}

/// Replaces every string by the value of the expression it holds.
fn substitute(v: &mut Value, path: &mut Vec<Seg>, params: &BTreeMap<String, f64>, errors: &mut Vec<Diagnostic>) {
    match v {
        Value::String(s) => match expr::eval(s, params) {
            Ok(x) => *v = Value::from(x),
            Err(e) => errors.push(Diagnostic {
                path: format_path(path),
                line: None,
                column: None,
                message: format!("cannot evaluate `{s}`: {e}"),
            }),
        },
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                path.push(Seg::Index(i));
                substitute(item, path, params, errors);
                path.pop();
            }
        }
        Value::Object(m) => {
            for (k, item) in m.iter_mut() {
                path.push(Seg::Key(k.clone()));
                substitute(item, path, params, errors);
                path.pop();
            }
        }
        _ => {}
    }
}

fn typed<T: DeserializeOwned>(prefix: &str, v: Value) -> Result<T, InputError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        InputError::single(join(prefix, &path), e.into_inner().to_string())
    })
}

/// Sets the number at `path` (e.g. `parameters.mu` or `a_conn[0][0]`) in a
/// document. The target must already exist and hold a number or string.
pub fn set_number(doc: &mut Value, path: &str, value: f64) -> Result<(), InputError> {
    let segs = parse_path(path);
    if segs.is_empty() {
        return Err(InputError::single(path, "empty parameter path"));
    }
    let mut cur = doc;
    for (depth, seg) in segs.iter().enumerate() {
        let next = match seg {
            Seg::Key(k) => cur.get_mut(k.as_str()),
            Seg::Index(i) => cur.get_mut(*i),
        };
        cur = next.ok_or_else(|| InputError::single(format_path(&segs[..=depth]), "no such field"))?;
    }
    if !(cur.is_number() || cur.is_string()) {
        return Err(InputError::single(path, "does not address a scalar field"));
    }
    if !value.is_finite() {
        return Err(InputError::single(path, "value must be finite"));
    }
    *cur = Value::from(value);
    Ok(())
}
