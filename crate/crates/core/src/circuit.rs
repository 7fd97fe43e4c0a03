use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Circuit component kinds, in the order used by noise parameter vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cx,
    H,
    S,
    Id,
    Idm,
    X,
    Y,
    Z,
    Measure,
    Initialize,
    Reset,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::Cx,
        Kind::H,
        Kind::S,
        Kind::Id,
        Kind::Idm,
        Kind::X,
        Kind::Y,
        Kind::Z,
        Kind::Measure,
        Kind::Initialize,
        Kind::Reset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Cx => "cx",
            Kind::H => "h",
            Kind::S => "s",
            Kind::Id => "id",
            Kind::Idm => "idm",
            Kind::X => "x",
            Kind::Y => "y",
            Kind::Z => "z",
            Kind::Measure => "measure",
            Kind::Initialize => "initialize",
            Kind::Reset => "reset",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn arity(self) -> usize {
        if self == Kind::Cx {
            2
        } else {
            1
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, Kind::Measure | Kind::Initialize | Kind::Reset)
    }

    pub fn is_prep(self) -> bool {
        matches!(self, Kind::Initialize | Kind::Reset)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown component kind `{s}`")))
    }
}

/// One noisy circuit element. Qubits use the 1-based layout numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: Kind,
    pub qubits: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_id: Option<usize>,
}

impl Component {
    pub fn new(kind: Kind, qubits: &[u32]) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::Config(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if kind == Kind::Cx && qubits[0] == qubits[1] {
            return Err(Error::Config("cx on a single qubit".into()));
        }
        Ok(Component { kind, qubits: qubits.to_vec(), measurement_id: None })
    }

    pub fn cx(c: u32, t: u32) -> Self {
        Component::new(Kind::Cx, &[c, t]).expect("distinct cx qubits")
    }

    pub fn one(kind: Kind, q: u32) -> Self {
        Component::new(kind, &[q]).expect("single-qubit kind")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    GaugeZ,
    GaugeX,
    Flag,
    FinalData,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementLabel {
    pub qubit: u32,
    /// Position of the sub-round in `round_schedule`.
    pub round: usize,
    pub purpose: Purpose,
}

/// Time-ordered components. Each inner vector is one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledCircuit {
    pub num_qubits: usize,
    pub steps: Vec<Vec<Component>>,
    pub measurement_labels: Vec<MeasurementLabel>,
    pub round_schedule: String,
}

impl ScheduledCircuit {
    pub fn num_measurements(&self) -> usize {
        self.measurement_labels.len()
    }

    /// Components with their time step.
    pub fn components(&self) -> impl Iterator<Item = (usize, &Component)> {
        self.steps.iter().enumerate().flat_map(|(t, s)| s.iter().map(move |c| (t, c)))
    }

    pub fn count(&self, kind: Kind) -> usize {
        self.components().filter(|(_, c)| c.kind == kind).count()
    }

    /// Checks the structural invariants: no qubit twice in a step, valid arities,
    /// dense measurement ids, ancillas re-prepared before reuse.
    pub fn validate(&self) -> Result<()> {
        let mut seen_meas = vec![false; self.num_measurements()];
        // 0 = never prepared, 1 = prepared, 2 = measured
        let mut state = vec![0u8; self.num_qubits + 1];
        for (t, step) in self.steps.iter().enumerate() {
            let mut used = vec![false; self.num_qubits + 1];
            for c in step {
                if c.qubits.len() != c.kind.arity() {
                    return Err(Error::Config(format!("bad arity at step {t}")));
                }
                for &q in &c.qubits {
                    if q == 0 || q as usize > self.num_qubits {
                        return Err(Error::Config(format!("qubit {q} out of range")));
                    }
                    if std::mem::replace(&mut used[q as usize], true) {
                        return Err(Error::Config(format!("qubit {q} used twice in step {t}")));
                    }
                    let s = &mut state[q as usize];
                    match c.kind {
                        Kind::Initialize | Kind::Reset => *s = 1,
                        Kind::Measure => *s = 2,
                        _ if *s == 2 => {
                            return Err(Error::Config(format!(
                                "qubit {q} used after measurement without reset at step {t}"
                            )))
                        }
                        _ => {}
                    }
                }
                match (c.kind, c.measurement_id) {
                    (Kind::Measure, Some(m)) if m < seen_meas.len() && !seen_meas[m] => {
                        seen_meas[m] = true;
                        if self.measurement_labels[m].qubit != c.qubits[0] {
                            return Err(Error::Config(format!("measurement {m} label mismatch")));
                        }
                    }
                    (Kind::Measure, _) => {
                        return Err(Error::Config(format!("bad measurement id at step {t}")))
                    }
                    (_, Some(_)) => {
                        return Err(Error::Config(format!("non-measure with id at step {t}")))
                    }
                    _ => {}
                }
            }
        }
        if seen_meas.iter().any(|&s| !s) {
            return Err(Error::Config("measurement ids are not dense".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ScheduledCircuit =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("circuit json: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_roundtrip() {
        for k in Kind::ALL {
            assert_eq!(k.name().parse::<Kind>().unwrap(), k);
        }
        assert!("swap".parse::<Kind>().is_err());
    }

    #[test]
    fn cx_needs_two_distinct() {
        assert!(Component::new(Kind::Cx, &[1, 1]).is_err());
        assert!(Component::new(Kind::H, &[1, 2]).is_err());
    }
}
