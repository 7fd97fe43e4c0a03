//! Pauli-frame propagation: how a Pauli inserted somewhere in a circuit flips
//! the recorded measurement outcomes.

use crate::bits::Bits;
use crate::circuit::{Kind, Purpose, ScheduledCircuit};
use crate::code::DEFLAG_RULES;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::noise::{fault_options, locations, Location};

/// Pauli frame over at most 64 qubits; label `q` is bit `q - 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Frame {
    x: u64,
    z: u64,
}

impl Frame {
    fn inject(&mut self, q: u32, x: bool, z: bool) {
        let b = 1u64 << (q - 1);
        if x {
            self.x ^= b;
        }
        if z {
            self.z ^= b;
        }
    }

    fn step(&mut self, circuit: &ScheduledCircuit, t: usize, flips: &mut Bits) {
        for c in &circuit.steps[t] {
            let a = 1u64 << (c.qubits[0] - 1);
            match c.kind {
                Kind::Cx => {
                    let b = 1u64 << (c.qubits[1] - 1);
                    if self.x & a != 0 {
                        self.x ^= b;
                    }
                    if self.z & b != 0 {
                        self.z ^= a;
                    }
                }
                Kind::H => {
                    let (x, z) = (self.x & a, self.z & a);
                    self.x = (self.x & !a) | z;
                    self.z = (self.z & !a) | x;
                }
                Kind::S => {
                    if self.x & a != 0 {
                        self.z ^= a;
                    }
                }
                Kind::Measure => {
                    if self.x & a != 0 {
                        flips.set(c.measurement_id.expect("measure has id"), true);
                    }
                    self.z &= !a;
                }
                Kind::Initialize | Kind::Reset => {
                    self.x &= !a;
                    self.z &= !a;
                }
                Kind::Id | Kind::Idm | Kind::X | Kind::Y | Kind::Z => {}
            }
        }
    }
}

/// Measurement flips caused by `paulis` (label, x, z) inserted at `step`,
/// either before or after its components.
pub fn propagate(circuit: &ScheduledCircuit, step: usize, before: bool, paulis: &[(u32, bool, bool)]) -> Bits {
    let mut flips = Bits::zeros(circuit.num_measurements());
    let mut f = Frame::default();
    for t in step..circuit.steps.len() {
        if t == step && before {
            for &(q, x, z) in paulis {
                f.inject(q, x, z);
            }
        }
        f.step(circuit, t, &mut flips);
        if t == step && !before {
            for &(q, x, z) in paulis {
                f.inject(q, x, z);
            }
        }
    }
    flips
}

/// Measurement flips of every fault option at every circuit location.
#[derive(Debug, Clone)]
pub struct FaultTable {
    pub locations: Vec<Location>,
    flips: Vec<Vec<Bits>>,
}

impl FaultTable {
    pub fn new(circuit: &ScheduledCircuit, exec: Exec) -> Result<Self> {
        if circuit.num_qubits > 64 {
            return Err(Error::Config("frame propagation supports at most 64 qubits".into()));
        }
        let locations = locations(circuit);
        let flips = exec.map(locations.len(), |i| {
            let loc = &locations[i];
            let before = loc.kind == Kind::Measure;
            let basis = |q: u32, x: bool, z: bool| propagate(circuit, loc.step, before, &[(q, x, z)]);
            let per_qubit: Vec<(u32, Bits, Option<Bits>)> = loc
                .qubits
                .iter()
                .map(|&q| {
                    let xf = basis(q, true, false);
                    let zf = if loc.kind.is_unitary() { Some(basis(q, false, true)) } else { None };
                    (q, xf, zf)
                })
                .collect();
            fault_options(loc)
                .into_iter()
                .map(|paulis| {
                    let mut acc = Bits::zeros(circuit.num_measurements());
                    for (q, p) in paulis {
                        let (x, z) = p.xz();
                        let (_, xf, zf) = per_qubit.iter().find(|e| e.0 == q).expect("qubit on location");
                        if x {
                            acc.xor_with(xf);
                        }
                        if z {
                            acc.xor_with(zf.as_ref().expect("unitary location"));
                        }
                    }
                    acc
                })
                .collect()
        });
        Ok(FaultTable { locations, flips })
    }

    pub fn num_options(&self, loc: usize) -> usize {
        self.flips[loc].len()
    }

    pub fn flips(&self, loc: usize, option: usize) -> &Bits {
        &self.flips[loc][option]
    }
}

/// Data qubits receiving a virtual Z given one round's flag outcomes
/// (`true` = non-trivial). Missing flags count as trivial; flags outside the
/// rule table are ignored.
pub fn deflag_rules(flag: impl Fn(u32) -> bool) -> Vec<u32> {
    DEFLAG_RULES
        .iter()
        .filter(|r| flag(r.trigger) && !flag(r.partner))
        .map(|r| r.data)
        .collect()
}

#[derive(Debug, Clone)]
pub struct DeflagItem {
    pub trigger: usize,
    pub partner: usize,
    pub data: u32,
    /// Flips caused by the virtual correction.
    pub flips: Bits,
}

/// Every deflag correction the circuit can trigger, in time order.
#[derive(Debug, Clone, Default)]
pub struct DeflagPlan {
    pub items: Vec<DeflagItem>,
}

impl DeflagPlan {
    /// The correction for a Z-gauge sub-round is inserted just before the
    /// Hadamard layer that precedes its measurements.
    pub fn new(circuit: &ScheduledCircuit) -> Result<Self> {
        let mut items = Vec::new();
        for (t, step) in circuit.steps.iter().enumerate() {
            let flag_id = |q: u32| {
                step.iter().find_map(|c| {
                    let m = c.measurement_id?;
                    (c.qubits[0] == q && circuit.measurement_labels[m].purpose == Purpose::Flag).then_some(m)
                })
            };
            for rule in DEFLAG_RULES {
                let (Some(trigger), Some(partner)) = (flag_id(rule.trigger), flag_id(rule.partner)) else {
                    continue;
                };
                if t == 0 {
                    return Err(Error::Internal("flag measured in the first step".into()));
                }
                let at = t - 1;
                if circuit.steps[at].iter().any(|c| c.kind == Kind::Cx && c.qubits.contains(&rule.data)) {
                    return Err(Error::Internal(format!("no gate-free slot for correction on {}", rule.data)));
                }
                let flips = propagate(circuit, at, true, &[(rule.data, false, true)]);
                items.push(DeflagItem { trigger, partner, data: rule.data, flips });
            }
        }
        Ok(DeflagPlan { items })
    }

    /// Applies corrections in time order. `offset(m)` is the error-free value
    /// of flag measurement `m`, so `bits[m] ^ offset(m)` is the flag signal.
    pub fn apply(&self, bits: &mut Bits, offset: impl Fn(usize) -> bool) {
        for it in &self.items {
            let fired = bits.get(it.trigger) ^ offset(it.trigger);
            let partner = bits.get(it.partner) ^ offset(it.partner);
            if fired && !partner {
                bits.xor_with(&it.flips);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Component, MeasurementLabel};
    use crate::code::{memory_experiment, State};
    use std::collections::BTreeMap;

    fn two_qubit() -> ScheduledCircuit {
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
    fn x_on_control_reaches_target() {
        let c = two_qubit();
        assert!(propagate(&c, 0, true, &[(1, true, false)]).get(0));
        assert!(!propagate(&c, 0, false, &[(1, true, false)]).get(0));
        assert!(!propagate(&c, 0, true, &[(1, false, true)]).get(0));
    }

    #[test]
    fn rules() {
        let f = |on: &[u32]| {
            let m: BTreeMap<u32, bool> = on.iter().map(|&q| (q, true)).collect();
            deflag_rules(|q| m.get(&q).copied().unwrap_or(false))
        };
        assert!(f(&[]).is_empty());
        assert_eq!(f(&[11]), vec![2]);
        assert!(f(&[11, 12]).is_empty());
        assert_eq!(f(&[14]), vec![8]);
        assert!(f(&[16, 18, 21, 23]).is_empty());
    }

    #[test]
    fn plan_covers_each_z_round() {
        let c = memory_experiment(State::Zero, 3);
        assert_eq!(DeflagPlan::new(&c).unwrap().items.len(), 12);
        let c = memory_experiment(State::Plus, 2);
        assert_eq!(DeflagPlan::new(&c).unwrap().items.len(), 12);
    }

    #[test]
    fn option_flips_are_linear() {
        let c = memory_experiment(State::Zero, 1);
        let t = FaultTable::new(&c, Exec::Sequential).unwrap();
        for (i, loc) in t.locations.iter().enumerate() {
            if loc.kind == Kind::Cx {
                // options: index 4*a + b - 1 over a, b in {I, X, Y, Z}
                let mut xy = t.flips(i, 0).clone(); // I X
                xy.xor_with(t.flips(i, 3)); // X I
                assert_eq!(&xy, t.flips(i, 4)); // X X
            }
        }
    }
}
