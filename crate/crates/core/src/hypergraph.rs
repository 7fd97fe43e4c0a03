//! Error-sensitive events and the decoding hypergraph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::circuit::{Purpose, ScheduledCircuit};
use crate::code::{
    Basis, LOGICAL_X_SUPPORT, LOGICAL_Z_SUPPORT, STAB_X_GAUGES, STAB_X_SUPPORT, STAB_Z_GAUGES, STAB_Z_SUPPORT,
    X_GAUGE_ANCILLA, Z_GAUGE_ANCILLA,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frame::{DeflagPlan, FaultTable};
use crate::noise::{enumerate_faults_at, FaultSpec, NoiseParams};
use crate::tableau::{simulate_symbolic, ProductState, SymbolicRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    StabilizerDiff,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSensitiveEvent {
    pub id: usize,
    pub kind: EventKind,
    pub basis: Basis,
    /// Stabilizer index within its basis, or the flag qubit for flag events.
    pub stabilizer_index: Option<usize>,
    /// Time layer, starting at 1.
    pub round: usize,
    #[serde(skip)]
    pub source_measurements: Vec<usize>,
    /// Error-free parity of the sources.
    #[serde(skip)]
    pub constant: bool,
}

impl ErrorSensitiveEvent {
    /// Short name such as `z0^1`, `x3^2` or `f11^1`.
    pub fn name(&self) -> String {
        match self.kind {
            EventKind::StabilizerDiff => format!(
                "{}{}^{}",
                self.basis.letter().to_ascii_lowercase(),
                self.stabilizer_index.unwrap_or(0),
                self.round
            ),
            EventKind::Flag => format!("f{}^{}", self.stabilizer_index.unwrap_or(0), self.round),
        }
    }
}

/// Maps raw measurement records to event bits and the logical readout.
#[derive(Debug, Clone)]
pub struct EventMap {
    /// Basis of the memory experiment, i.e. of the logical readout.
    pub basis: Basis,
    pub events: Vec<ErrorSensitiveEvent>,
    pub num_measurements: usize,
    pub deflag: Option<DeflagPlan>,
    pub logical_readout: Vec<usize>,
    /// Error-free value of the logical readout parity.
    pub logical_constant: bool,
    flag_constant: Vec<bool>,
}

fn round_ids(circuit: &ScheduledCircuit) -> Vec<BTreeMap<u32, usize>> {
    let mut out = vec![BTreeMap::new(); circuit.round_schedule.len()];
    for (m, l) in circuit.measurement_labels.iter().enumerate() {
        if l.purpose != Purpose::FinalData {
            out[l.round].insert(l.qubit, m);
        }
    }
    out
}

impl EventMap {
    pub fn new(circuit: &ScheduledCircuit, deflag: bool) -> Result<Self> {
        let run = simulate_symbolic(circuit, &vec![ProductState::Zero; circuit.num_qubits])?;
        EventMap::with_run(circuit, &run, deflag)
    }

    pub fn with_run(circuit: &ScheduledCircuit, run: &SymbolicRun, deflag: bool) -> Result<Self> {
        let sched: Vec<char> = circuit.round_schedule.chars().collect();
        let basis = match sched.last() {
            Some('X') => Basis::Z,
            Some('Z') => Basis::X,
            _ => return Err(Error::Config("circuit has no gauge rounds".into())),
        };
        let per_round = round_ids(circuit);
        let final_data: BTreeMap<u32, usize> = circuit
            .measurement_labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.purpose == Purpose::FinalData)
            .map(|(m, l)| (l.qubit, m))
            .collect();
        if final_data.len() != 9 {
            return Err(Error::Config("circuit lacks a final data readout".into()));
        }
        let stab_sources = |b: Basis, round: &BTreeMap<u32, usize>| -> Result<Vec<Vec<usize>>> {
            let (gauges, anc): (&[&[usize]], &[u32]) = match b {
                Basis::Z => (&STAB_Z_GAUGES, &Z_GAUGE_ANCILLA),
                Basis::X => (&STAB_X_GAUGES, &X_GAUGE_ANCILLA),
            };
            gauges
                .iter()
                .map(|gs| {
                    gs.iter()
                        .map(|&g| round.get(&anc[g]).copied().ok_or_else(|| Error::Internal("missing gauge".into())))
                        .collect()
                })
                .collect()
        };
        let rounds_of = |b: Basis| -> Result<Vec<Vec<Vec<usize>>>> {
            sched
                .iter()
                .zip(&per_round)
                .filter(|(c, _)| **c == b.letter())
                .map(|(_, r)| stab_sources(b, r))
                .collect()
        };

        let mut raw: Vec<ErrorSensitiveEvent> = Vec::new();
        let mut push = |kind, b: Basis, idx: usize, round: usize, src: Vec<usize>| {
            raw.push(ErrorSensitiveEvent {
                id: 0,
                kind,
                basis: b,
                stabilizer_index: Some(idx),
                round,
                source_measurements: src,
                constant: false,
            })
        };

        // Memory basis: one layer per gauge round plus the final data layer.
        let mut layers = rounds_of(basis)?;
        let support: &[&[u32]] = match basis {
            Basis::Z => &STAB_Z_SUPPORT,
            Basis::X => &STAB_X_SUPPORT,
        };
        layers.push(support.iter().map(|s| s.iter().map(|q| final_data[q]).collect()).collect());
        for t in 0..layers.len() {
            for s in 0..layers[t].len() {
                let mut src = layers[t][s].clone();
                if t > 0 {
                    src.extend(&layers[t - 1][s]);
                }
                push(EventKind::StabilizerDiff, basis, s, t + 1, src);
            }
        }
        // Other basis: differences of consecutive rounds only.
        let other = rounds_of(basis.other())?;
        for t in 1..other.len() {
            for s in 0..other[t].len() {
                let mut src = other[t][s].clone();
                src.extend(&other[t - 1][s]);
                push(EventKind::StabilizerDiff, basis.other(), s, t, src);
            }
        }
        if !deflag {
            let mut z_round = 0;
            for (r, c) in sched.iter().enumerate() {
                if *c != 'Z' {
                    continue;
                }
                z_round += 1;
                for (m, l) in circuit.measurement_labels.iter().enumerate() {
                    if l.round == r && l.purpose == Purpose::Flag {
                        push(EventKind::Flag, Basis::Z, l.qubit as usize, z_round, vec![m]);
                    }
                }
            }
        }

        for e in raw.iter_mut() {
            e.source_measurements.sort_unstable();
            let a = run.parity(&e.source_measurements);
            if !a.is_constant() {
                return Err(Error::NonDeterministicEvent(e.name()));
            }
            e.constant = a.constant;
        }
        raw.sort_by_key(|e| {
            (
                *e.source_measurements.last().unwrap_or(&0),
                e.kind,
                e.basis,
                e.stabilizer_index,
            )
        });
        for (i, e) in raw.iter_mut().enumerate() {
            e.id = i;
        }

        let logical: &[u32] = match basis {
            Basis::Z => &LOGICAL_Z_SUPPORT,
            Basis::X => &LOGICAL_X_SUPPORT,
        };
        let logical_readout: Vec<usize> = logical.iter().map(|q| final_data[q]).collect();
        let la = run.parity(&logical_readout);
        if !la.is_constant() {
            return Err(Error::NonDeterministicEvent("logical readout".into()));
        }

        let mut flag_constant = vec![false; circuit.num_measurements()];
        let plan = if deflag {
            let plan = DeflagPlan::new(circuit)?;
            for it in &plan.items {
                for m in [it.trigger, it.partner] {
                    let a = &run.outcomes[m];
                    if !a.is_constant() {
                        return Err(Error::NonDeterministicEvent(format!("flag measurement {m}")));
                    }
                    flag_constant[m] = a.constant;
                }
            }
            Some(plan)
        } else {
            None
        };

        Ok(EventMap {
            basis,
            events: raw,
            num_measurements: circuit.num_measurements(),
            deflag: plan,
            logical_readout,
            logical_constant: la.constant,
            flag_constant,
        })
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    /// Position of the measured logical in a label: 0 for Z, 1 for X.
    pub fn label_bit(&self) -> usize {
        match self.basis {
            Basis::Z => 0,
            Basis::X => 1,
        }
    }

    fn evaluate(&self, bits: &mut Bits, raw: bool) -> (Bits, bool) {
        if let Some(plan) = &self.deflag {
            if raw {
                plan.apply(bits, |m| self.flag_constant[m]);
            } else {
                plan.apply(bits, |_| false);
            }
        }
        let mut ev = Bits::zeros(self.events.len());
        for e in &self.events {
            let mut v = raw && e.constant;
            for &m in &e.source_measurements {
                v ^= bits.get(m);
            }
            if v {
                ev.set(e.id, true);
            }
        }
        let logical = self.logical_readout.iter().fold(false, |a, &m| a ^ bits.get(m));
        (ev, logical)
    }

    /// Event bits β and the deflag-corrected logical readout of a raw shot.
    pub fn events_from_shot(&self, raw_bits: &Bits) -> Result<(Bits, bool)> {
        if raw_bits.len() != self.num_measurements {
            return Err(Error::Length { expected: self.num_measurements, got: raw_bits.len() });
        }
        let mut b = raw_bits.clone();
        Ok(self.evaluate(&mut b, true))
    }

    /// Events and logical flip caused by a measurement flip pattern relative
    /// to the error-free run.
    pub fn events_from_flips(&self, flips: &Bits) -> (Bits, bool) {
        let mut b = flips.clone();
        self.evaluate(&mut b, false)
    }

    pub fn label(&self, logical_flip: bool) -> [bool; 2] {
        let mut l = [false; 2];
        l[self.label_bit()] = logical_flip;
        l
    }
}

/// Events and label triggered by one fault.
#[derive(Debug, Clone)]
pub struct FaultSignature {
    pub fault: FaultSpec,
    pub events: Vec<usize>,
    pub label: [bool; 2],
}

/// Signature of every enumerated fault. Faults with no effect are dropped; a
/// fault that flips the logical without triggering any event is an error.
pub fn fault_signatures(
    map: &EventMap,
    table: &FaultTable,
    params: &NoiseParams,
    exec: Exec,
) -> Result<Vec<FaultSignature>> {
    let faults = enumerate_faults_at(&table.locations, params);
    let sigs = exec.map(faults.len(), |i| {
        let f = &faults[i];
        let (ev, flip) = map.events_from_flips(table.flips(f.location, f.option));
        (ev.ones().collect::<Vec<_>>(), flip)
    });
    let mut out = Vec::new();
    for (f, (events, flip)) in faults.into_iter().zip(sigs) {
        if events.is_empty() {
            if flip {
                return Err(Error::FaultTolerance(format!(
                    "{} fault {:?} at step {} flips the logical silently",
                    f.kind, f.paulis, f.step
                )));
            }
            continue;
        }
        out.push(FaultSignature { label: map.label(flip), events, fault: f });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub events: Vec<usize>,
    pub probability: f64,
    pub logical_label: [bool; 2],
    #[serde(skip)]
    pub fault_witnesses: Vec<FaultSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Merge {
    /// Independent XOR combination `p + q - 2pq`.
    #[default]
    Exact,
    /// Plain sum.
    FirstOrder,
}

/// Groups hyperedges by `(events, label)`. Output is sorted by that key.
pub fn merge_hyperedges(raw: Vec<Hyperedge>, mode: Merge) -> Vec<Hyperedge> {
    let mut groups: BTreeMap<(Vec<usize>, [bool; 2]), Hyperedge> = BTreeMap::new();
    for h in raw {
        let mut key = h.events.clone();
        key.sort_unstable();
        match groups.get_mut(&(key.clone(), h.logical_label)) {
            Some(g) => {
                let (p, q) = (g.probability, h.probability);
                g.probability = match mode {
                    Merge::Exact => p + q - 2.0 * p * q,
                    Merge::FirstOrder => p + q,
                };
                g.fault_witnesses.extend(h.fault_witnesses);
            }
            None => {
                let label = h.logical_label;
                groups.insert((key.clone(), label), Hyperedge { events: key, ..h });
            }
        }
    }
    groups.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingHypergraph {
    pub events: Vec<ErrorSensitiveEvent>,
    pub hyperedges: Vec<Hyperedge>,
    pub k: usize,
}

impl DecodingHypergraph {
    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hypergraph serializes")
    }

    /// Largest difference in time layer spanned by a hyperedge's events, plus one.
    pub fn max_layer_span(&self) -> usize {
        self.hyperedges
            .iter()
            .map(|h| {
                let rs = h.events.iter().map(|&e| self.events[e].round);
                let (lo, hi) = rs.fold((usize::MAX, 0), |(a, b), r| (a.min(r), b.max(r)));
                hi - lo + 1
            })
            .max()
            .unwrap_or(0)
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name() == name)
    }
}

pub fn hypergraph_from_signatures(map: &EventMap, sigs: &[FaultSignature], mode: Merge) -> DecodingHypergraph {
    let raw = sigs
        .iter()
        .map(|s| Hyperedge {
            events: s.events.clone(),
            probability: s.fault.probability,
            logical_label: s.label,
            fault_witnesses: vec![s.fault.clone()],
        })
        .collect();
    DecodingHypergraph { events: map.events.clone(), hyperedges: merge_hyperedges(raw, mode), k: 1 }
}

/// Builds the hypergraph of a memory-experiment circuit.
pub fn build_hypergraph(circuit: &ScheduledCircuit, params: &NoiseParams, deflag: bool) -> Result<DecodingHypergraph> {
    build_hypergraph_with(circuit, params, deflag, Merge::Exact, Exec::default())
}

pub fn build_hypergraph_with(
    circuit: &ScheduledCircuit,
    params: &NoiseParams,
    deflag: bool,
    mode: Merge,
    exec: Exec,
) -> Result<DecodingHypergraph> {
    let map = EventMap::new(circuit, deflag)?;
    let table = FaultTable::new(circuit, exec)?;
    let sigs = fault_signatures(&map, &table, params, exec)?;
    Ok(hypergraph_from_signatures(&map, &sigs, mode))
}
