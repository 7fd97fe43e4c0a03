use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{Kind, ScheduledCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Fault probability per component kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: [f64; 11],
}

impl NoiseParams {
    pub fn zero() -> Self {
        NoiseParams { p: [0.0; 11] }
    }

    pub fn uniform(p: f64) -> Result<Self> {
        NoiseParams::from_vector([p; 11])
    }

    /// Vector ordered as `Kind::ALL`: cx, h, s, id, idm, x, y, z, measure,
    /// initialize, reset.
    pub fn from_vector(p: [f64; 11]) -> Result<Self> {
        for (k, &v) in Kind::ALL.iter().zip(&p) {
            check_prob(*k, v)?;
        }
        Ok(NoiseParams { p })
    }

    pub fn to_vector(&self) -> [f64; 11] {
        self.p
    }

    /// Decoder prior found by fitting hardware data.
    pub fn decoder_prior() -> Self {
        NoiseParams {
            p: [0.01, 0.0028, 0.0, 0.001, 0.002, 0.0028, 0.0028, 0.0, 0.0005, 0.0, 0.00001],
        }
    }

    /// Device-averaged depolarizing rates.
    pub fn average_model() -> Self {
        NoiseParams {
            p: [0.0126, 0.000266, 0.0, 0.001, 0.002, 0.000266, 0.000266, 0.0, 0.00713, 0.0142, 0.0290],
        }
    }

    pub fn get(&self, k: Kind) -> f64 {
        self.p[k.index()]
    }

    pub fn set(&mut self, k: Kind, v: f64) -> Result<()> {
        check_prob(k, v)?;
        self.p[k.index()] = v;
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        let mut p = self.p;
        for v in p.iter_mut() {
            *v *= s;
        }
        NoiseParams::from_vector(p)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("noise params: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }
}

fn check_prob(k: Kind, v: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&v) {
        return Err(Error::Config(format!("p_{k} = {v} outside [0, 0.5]")));
    }
    Ok(())
}

impl Serialize for NoiseParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(11))?;
        for k in Kind::ALL {
            m.serialize_entry(k.name(), &self.get(k))?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for NoiseParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw: BTreeMap<String, f64> = BTreeMap::deserialize(d)?;
        let mut p = [0.0; 11];
        for k in Kind::ALL {
            p[k.index()] = *raw
                .get(k.name())
                .ok_or_else(|| D::Error::custom(format!("missing parameter `{}`", k.name())))?;
        }
        if let Some(extra) = raw.keys().find(|n| n.parse::<Kind>().is_err()) {
            return Err(D::Error::custom(format!("unknown parameter `{extra}`")));
        }
        NoiseParams::from_vector(p).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli1 {
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const ALL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }
}

/// A noisy component position in the circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub step: usize,
    pub kind: Kind,
    pub qubits: Vec<u32>,
}

pub fn locations(circuit: &ScheduledCircuit) -> Vec<Location> {
    circuit
        .components()
        .map(|(step, c)| Location { step, kind: c.kind, qubits: c.qubits.clone() })
        .collect()
}

/// The Pauli choices a faulting component draws from, in a fixed order.
pub fn fault_options(loc: &Location) -> Vec<Vec<(u32, Pauli1)>> {
    match loc.kind {
        Kind::Cx => {
            let one = [None, Some(Pauli1::X), Some(Pauli1::Y), Some(Pauli1::Z)];
            let mut out = Vec::with_capacity(15);
            for a in one {
                for b in one {
                    let mut v = Vec::new();
                    if let Some(a) = a {
                        v.push((loc.qubits[0], a));
                    }
                    if let Some(b) = b {
                        v.push((loc.qubits[1], b));
                    }
                    if !v.is_empty() {
                        out.push(v);
                    }
                }
            }
            out
        }
        Kind::Measure | Kind::Initialize | Kind::Reset => vec![vec![(loc.qubits[0], Pauli1::X)]],
        _ => Pauli1::ALL.iter().map(|&p| vec![(loc.qubits[0], p)]).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    /// Index into `locations(circuit)`.
    pub location: usize,
    pub option: usize,
    pub step: usize,
    pub kind: Kind,
    pub paulis: Vec<(u32, Pauli1)>,
    /// Measurement faults act before the component, all others after.
    pub before: bool,
    pub probability: f64,
}

impl FaultSpec {
    pub fn operator(&self, n: usize) -> PauliOperator {
        let mut p = PauliOperator::identity(n);
        for &(q, s) in &self.paulis {
            let (x, z) = s.xz();
            p.set(q as usize - 1, x, z);
        }
        p
    }
}

fn spec(loc_idx: usize, loc: &Location, option: usize, paulis: Vec<(u32, Pauli1)>, p: f64) -> FaultSpec {
    FaultSpec {
        location: loc_idx,
        option,
        step: loc.step,
        kind: loc.kind,
        paulis,
        before: loc.kind == Kind::Measure,
        probability: p,
    }
}

pub fn enumerate_faults(circuit: &ScheduledCircuit, params: &NoiseParams) -> Vec<FaultSpec> {
    enumerate_faults_at(&locations(circuit), params)
}

/// `enumerate_faults` over an already-extracted location list.
pub fn enumerate_faults_at(locs: &[Location], params: &NoiseParams) -> Vec<FaultSpec> {
    let mut out = Vec::new();
    for (i, loc) in locs.iter().enumerate() {
        let pc = params.get(loc.kind);
        if pc == 0.0 {
            continue;
        }
        let opts = fault_options(loc);
        let each = pc / opts.len() as f64;
        for (o, paulis) in opts.into_iter().enumerate() {
            out.push(spec(i, loc, o, paulis, each));
        }
    }
    out
}

/// Precomputed per-kind location lists for geometric-skip sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    groups: Vec<(f64, f64, Vec<(usize, u8)>)>,
}

impl Sampler {
    pub fn new(circuit: &ScheduledCircuit, params: &NoiseParams) -> Self {
        let locs = locations(circuit);
        let mut groups = Vec::new();
        for k in Kind::ALL {
            let p = params.get(k);
            if p == 0.0 {
                continue;
            }
            let members: Vec<(usize, u8)> = locs
                .iter()
                .enumerate()
                .filter(|(_, l)| l.kind == k)
                .map(|(i, l)| (i, fault_options(l).len() as u8))
                .collect();
            if !members.is_empty() {
                groups.push((p, (1.0 - p).ln(), members));
            }
        }
        Sampler { groups }
    }

    /// Faulting `(location, option)` pairs in location order within each kind.
    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut Vec<(usize, usize)>) {
        out.clear();
        for (p, ln_q, members) in &self.groups {
            if *p >= 1.0 {
                for &(l, n) in members {
                    out.push((l, rng.gen_range(0..n as usize)));
                }
                continue;
            }
            let mut i = 0usize;
            loop {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let skip = (u.ln() / ln_q).floor();
                if !skip.is_finite() || skip >= (members.len() - i) as f64 {
                    break;
                }
                i += skip as usize;
                let (l, n) = members[i];
                out.push((l, rng.gen_range(0..n as usize)));
                i += 1;
                if i >= members.len() {
                    break;
                }
            }
        }
    }
}

pub fn sample_fault_set(circuit: &ScheduledCircuit, params: &NoiseParams, seed: u64) -> Vec<FaultSpec> {
    let sampler = Sampler::new(circuit, params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = Vec::new();
    sampler.sample(&mut rng, &mut picks);
    picks.sort_unstable();
    let locs = locations(circuit);
    picks
        .into_iter()
        .map(|(l, o)| {
            let loc = &locs[l];
            let opts = fault_options(loc);
            let each = params.get(loc.kind) / opts.len() as f64;
            spec(l, loc, o, opts[o].clone(), each)
        })
        .collect()
}

/// Depolarizing error per gate from an RB decay parameter.
pub fn rb_to_depolarizing(alpha: f64, n_qubits: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    if !(1..=2).contains(&n_qubits) {
        return Err(Error::Domain(format!("{n_qubits}-qubit gates unsupported")));
    }
    let d = (1u32 << n_qubits) as f64;
    Ok((d - 1.0) / d * (1.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Component, MeasurementLabel, Purpose};

    fn tiny() -> ScheduledCircuit {
        let mut m = Component::one(Kind::Measure, 2);
        m.measurement_id = Some(0);
        ScheduledCircuit {
            num_qubits: 2,
            steps: vec![vec![Component::cx(1, 2)], vec![m]],
            measurement_labels: vec![MeasurementLabel { qubit: 2, round: 0, purpose: Purpose::GaugeZ }],
            round_schedule: "Z".into(),
        }
    }

    #[test]
    fn cx_equipartition() {
        let mut p = NoiseParams::zero();
        p.set(Kind::Cx, 0.015).unwrap();
        let f = enumerate_faults(&tiny(), &p);
        assert_eq!(f.len(), 15);
        assert!(f.iter().all(|f| (f.probability - 0.001).abs() < 1e-15));
    }

    #[test]
    fn zero_rate_yields_nothing() {
        let mut p = NoiseParams::zero();
        p.set(Kind::Cx, 0.01).unwrap();
        let f = enumerate_faults(&tiny(), &p);
        assert!(f.iter().all(|f| f.kind != Kind::Measure));
        assert!(sample_fault_set(&tiny(), &NoiseParams::zero(), 7).is_empty());
    }

    #[test]
    fn measure_faults_precede() {
        let f = enumerate_faults(&tiny(), &NoiseParams::uniform(0.1).unwrap());
        for x in f {
            assert_eq!(x.before, x.kind == Kind::Measure);
        }
    }

    #[test]
    fn rb_examples() {
        assert_eq!(rb_to_depolarizing(1.0, 2).unwrap(), 0.0);
        assert!((rb_to_depolarizing(0.99, 1).unwrap() - 0.005).abs() < 1e-15);
        assert!((rb_to_depolarizing(0.98, 2).unwrap() - 0.015).abs() < 1e-15);
        assert!(rb_to_depolarizing(1.1, 1).is_err());
    }

    #[test]
    fn params_json() {
        let p = NoiseParams::decoder_prior();
        let back = NoiseParams::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
        assert!(NoiseParams::from_json(r#"{"cx": 0.1}"#).is_err());
        assert!(NoiseParams::uniform(0.6).is_err());
    }
}
