//! JSON system documents.
//!
//! ```json
//! {"kind": "raw", "A": [[-1, 0], [0, -2]], "B": [[1, -1], [0, 1]], "tau_factor": 1}
//! {"kind": "network", "nodes": [{"id": "1", "a": -1, "b": 1}], "edges": [], "tau": 2.5}
//! ```

use std::path::Path;

use hinf_pi::linalg::Matrix;
use hinf_pi::network::{build_plant, ColumnLabel, NetworkSpec, Topology};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum System {
    Raw {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
    },
    Network(NetworkSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    #[serde(flatten)]
    pub system: System,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_factor: Option<f64>,
}

/// How the working `τ` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauChoice {
    Absolute(f64),
    Factor(f64),
}

impl TauChoice {
    pub fn resolve(self, tau_min: f64) -> f64 {
        match self {
            TauChoice::Absolute(t) => t,
            TauChoice::Factor(c) => c * tau_min,
        }
    }
}

/// A parsed document turned into plant matrices.
#[derive(Clone, Debug)]
pub struct Instance {
    pub a: Matrix<f64>,
    pub b: Matrix<f64>,
    pub input_labels: Vec<String>,
    pub state_labels: Vec<String>,
    pub network: Option<(NetworkSpec, Topology)>,
}

impl SystemDocument {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let doc: SystemDocument = serde_json::from_str(text).map_err(|e| {
            CliError::Parse(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        doc.validate(origin)?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    fn validate(&self, origin: &str) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Parse(format!("{origin}: {msg}")));
        match (self.tau, self.tau_factor) {
            (Some(_), Some(_)) => return bad("give either `tau` or `tau_factor`, not both".into()),
            (Some(t), None) if !(t > 0.0) || !t.is_finite() => return bad(format!("`tau` must be positive, got {t}")),
            (None, Some(c)) if !(c > 0.0) || !c.is_finite() => {
                return bad(format!("`tau_factor` must be positive, got {c}"))
            }
            _ => {}
        }
        if let System::Raw { a, b } = &self.system {
            for (name, m) in [("A", a), ("B", b)] {
                let Some(first) = m.first() else {
                    return bad(format!("`{name}` is empty"));
                };
                if let Some(r) = m.iter().position(|row| row.len() != first.len()) {
                    return bad(format!(
                        "`{name}` row {r} has {} entries, expected {}",
                        m[r].len(),
                        first.len()
                    ));
                }
                if first.is_empty() {
                    return bad(format!("`{name}` has empty rows"));
                }
            }
            if a.len() != a[0].len() {
                return bad(format!("`A` must be square, got {}x{}", a.len(), a[0].len()));
            }
            if b.len() != a.len() {
                return bad(format!("`B` has {} rows but `A` has {}", b.len(), a.len()));
            }
        }
        Ok(())
    }

    pub fn tau_choice(&self) -> TauChoice {
        match (self.tau, self.tau_factor) {
            (Some(t), _) => TauChoice::Absolute(t),
            (None, Some(c)) => TauChoice::Factor(c),
            (None, None) => TauChoice::Factor(1.0),
        }
    }

    pub fn instance(&self) -> Result<Instance, CliError> {
        match &self.system {
            System::Raw { a, b } => {
                let a = Matrix::from_rows(a).map_err(|e| CliError::Parse(format!("`A`: {e}")))?;
                let b = Matrix::from_rows(b).map_err(|e| CliError::Parse(format!("`B`: {e}")))?;
                Ok(Instance {
                    input_labels: (0..b.cols()).map(|j| format!("u{j}")).collect(),
                    state_labels: (0..a.rows()).map(|i| format!("x{i}")).collect(),
                    a,
                    b,
                    network: None,
                })
            }
            System::Network(spec) => {
                let plant = build_plant::<f64>(spec).map_err(|e| CliError::Admissibility(e.to_string()))?;
                Ok(Instance {
                    input_labels: plant.columns.iter().map(ColumnLabel::to_string).collect(),
                    state_labels: spec.nodes.iter().map(|n| format!("x_{}", n.id)).collect(),
                    a: plant.a,
                    b: plant.b,
                    network: Some((spec.clone(), plant.topology)),
                })
            }
        }
    }
}

/// Built-in instances.
pub fn demo_document(name: &str) -> Option<SystemDocument> {
    let system = match name {
        "buffers" => System::Raw {
            a: vec![vec![-1.0, 0.0], vec![0.0, -2.0]],
            b: vec![vec![1.0, -1.0], vec![0.0, 1.0]],
        },
        "scalar" => System::Raw {
            a: vec![vec![-1.0]],
            b: vec![vec![1.0]],
        },
        _ => return None,
    };
    Some(SystemDocument {
        system,
        tau: None,
        tau_factor: Some(1.0),
    })
}

pub const DEMOS: &[&str] = &["buffers", "scalar"];
