//! The JSON problem-file format.
//!
//! ```json
//! {
//!   "model": { "kind": "quantum", "dimension": 2 },
//!   "observables": [
//!     { "name": "H", "operator": [[0, 0], [0, 1]] },
//!     { "name": "X", "outcomes": [
//!         { "label": "+", "effect": [[0.5, 0.5], [0.5, 0.5]], "value": 1 },
//!         { "label": "-", "effect": [[0.5, -0.5], [-0.5, 0.5]], "value": -1 } ] }
//!   ],
//!   "effects": [ { "name": "E", "effect": [[0.3, 0], [0, 0.7]] } ],
//!   "conditions": [ { "name": "H", "type": "mean", "target": 0.3 } ],
//!   "objective": { "name": "von_neumann" },
//!   "solver": { "tolerance": 1e-10, "max_iter": 500 }
//! }
//! ```
//!
//! Matrices are row-major nested arrays whose entries are reals or
//! `[re, im]` pairs. Classical and polytope effects are plain vectors in the
//! model's ambient coordinates.

use std::io::Write;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub effects: Vec<EffectSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionSpec>,
    /// States spanning the region; when present the region is their convex
    /// hull cut by the conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Tensor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Classical {
        dimension: usize,
    },
    Quantum {
        dimension: usize,
    },
    /// Either homogeneous `vertices` with a `unit` functional, or affine
    /// `points` (lifted to `(1, point)` with unit `(1, 0, …)`).
    Polytope {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
    },
    /// The square with corners `(±1, ±1)`.
    SquareBit,
}

/// A vector or a (possibly complex) matrix.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(untagged)]
pub enum Tensor {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, Copy, PartialEq, SerializeDerive, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn parts(self) -> (f64, f64) {
        match self {
            Entry::Real(x) => (x, 0.0),
            Entry::Complex([re, im]) => (re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub name: String,
    /// Explicit outcomes. Mutually exclusive with `operator`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<OutcomeSpec>,
    /// Quantum: a Hermitian matrix, split into eigenprojections. Classical:
    /// a vector of outcome values, one per point of the sample space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Tensor>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    pub label: String,
    pub effect: Tensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    pub name: String,
    pub effect: Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    Mean,
    Probability,
}

/// `⟨name⟩ = target` for a mean, or `name(ω) = target` for a probability.
/// A probability condition may name an observable together with one of its
/// outcome labels.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ConditionKind,
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    /// `shannon`, `von_neumann` or `fiducial`.
    pub name: String,
    /// Observables whose outcome entropies are summed by `fiducial`; all
    /// declared observables when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurements: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fw_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fw_max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Parse failure with its position in the source text.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let full = e.to_string();
        // serde_json appends its own " at line L column C"
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        Self {
            message,
            line: e.line(),
            column: e.column(),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty JSON with every float printed at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("JSON is UTF-8")
}

struct Precise<'a>(PrettyFormatter<'a>);

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(writer)
    }
}
