//! The distance-3 heavy-hexagon subsystem code and its syndrome circuits.
//!
//! Data qubits 1-9 sit on a 3x3 grid (rows 1 2 3 / 4 5 6 / 7 8 9). X-gauge
//! ancillas 10-15 sit between vertical pairs (1,4) (2,5) (3,6) (4,7) (5,8)
//! (6,9). Z-gauge ancillas are 17 (Z1Z2), 19 (Z2Z3Z5Z6), 20 (Z4Z5Z7Z8) and
//! 22 (Z8Z9), with flags 16, 18, 21, 23 and 11-14.
//!
//! On a 27-qubit Falcon device data qubits 1..9 are F24, F16, F9, F21, F13, F5, F17, F10, F2.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Component, Kind, MeasurementLabel, Purpose, ScheduledCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

pub const NUM_QUBITS: usize = 23;
pub const DATA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];
pub const X_ANCILLAS: [u32; 6] = [10, 11, 12, 13, 14, 15];
pub const Z_ANCILLAS: [u32; 4] = [17, 19, 20, 22];
/// Flags used during Z-gauge extraction. 11-14 double as X-gauge ancillas.
pub const FLAGS: [u32; 8] = [11, 12, 13, 14, 16, 18, 21, 23];

/// Ancilla measuring each X-gauge generator, in `gauge_x` order.
pub const X_GAUGE_ANCILLA: [u32; 6] = [10, 11, 12, 13, 14, 15];
/// Ancilla measuring each Z-gauge generator, in `gauge_z` order.
pub const Z_GAUGE_ANCILLA: [u32; 4] = [17, 19, 20, 22];
/// Gauge generators composing each stabilizer.
pub const STAB_Z_GAUGES: [&[usize]; 2] = [&[0, 2], &[1, 3]];
pub const STAB_X_GAUGES: [&[usize]; 4] = [&[0, 1], &[2], &[3], &[4, 5]];
pub const STAB_Z_SUPPORT: [&[u32]; 2] = [&[1, 2, 4, 5, 7, 8], &[2, 3, 5, 6, 8, 9]];
pub const STAB_X_SUPPORT: [&[u32]; 4] = [&[1, 2, 4, 5], &[3, 6], &[4, 7], &[5, 6, 8, 9]];
pub const LOGICAL_Z_SUPPORT: [u32; 3] = [1, 4, 7];
pub const LOGICAL_X_SUPPORT: [u32; 3] = [1, 2, 3];

/// CX layers of the Z-gauge sub-round, `(control, target)`.
///
/// Weight-4 gauges (ancillas 19, 20) use flags in |+⟩: flag→ancilla,
/// data→flag, data→flag, flag→ancilla. Weight-2 gauges (17, 22) use one flag
/// per data qubit with a single data→flag in between.
pub const Z_ROUND_CX: [&[(u32, u32)]; 5] = [
    &[(12, 19), (14, 20), (16, 17), (23, 22)],
    &[(3, 12), (11, 19), (5, 14), (13, 20), (18, 17), (9, 23), (21, 22)],
    &[(6, 12), (5, 11), (8, 14), (7, 13), (1, 16), (2, 18), (23, 22)],
    &[(12, 19), (2, 11), (14, 20), (4, 13), (16, 17), (8, 21)],
    &[(11, 19), (13, 20), (18, 17), (21, 22)],
];

/// Flags that carry an idle location in each Z-round CX layer. Weight-4 flags
/// idle only once their first CX is done; weight-2 flags never idle between
/// their two ancilla CXs.
pub const Z_ROUND_FLAG_IDLE: [&[u32]; 5] = [&[18, 21], &[], &[], &[23], &[12, 14, 16, 23]];

/// CX layers of the X-gauge sub-round, `(ancilla, data)`.
pub const X_ROUND_CX: [&[(u32, u32)]; 2] = [
    &[(10, 1), (11, 2), (12, 3), (13, 4), (14, 5), (15, 6)],
    &[(10, 4), (11, 5), (12, 6), (13, 7), (14, 8), (15, 9)],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflagRule {
    pub trigger: u32,
    pub partner: u32,
    pub data: u32,
}

/// Virtual Z correction on `data` when `trigger` fires and `partner` does not.
/// Each rule targets the data qubit whose CX with the flag comes last.
pub const DEFLAG_RULES: [DeflagRule; 4] = [
    DeflagRule { trigger: 11, partner: 12, data: 2 },
    DeflagRule { trigger: 12, partner: 11, data: 6 },
    DeflagRule { trigger: 13, partner: 14, data: 4 },
    DeflagRule { trigger: 14, partner: 13, data: 8 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl State {
    pub const ALL: [State; 4] = [State::Zero, State::One, State::Plus, State::Minus];

    pub fn basis(self) -> Basis {
        match self {
            State::Zero | State::One => Basis::Z,
            State::Plus | State::Minus => Basis::X,
        }
    }

    /// Ideal logical readout bit.
    pub fn eigenvalue_bit(self) -> bool {
        matches!(self, State::One | State::Minus)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::Zero => "0",
            State::One => "1",
            State::Plus => "+",
            State::Minus => "-",
        })
    }
}

impl FromStr for State {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(State::Zero),
            "1" | "one" => Ok(State::One),
            "+" | "plus" => Ok(State::Plus),
            "-" | "−" | "minus" => Ok(State::Minus),
            _ => Err(Error::BadState(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    ZSyndrome,
    XSyndrome,
    Flag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeDefinition {
    pub n: usize,
    pub gauge_z: Vec<PauliOperator>,
    pub gauge_x: Vec<PauliOperator>,
    pub stab_z: Vec<PauliOperator>,
    pub stab_x: Vec<PauliOperator>,
    pub logical_z: PauliOperator,
    pub logical_x: PauliOperator,
    pub ancilla_roles: BTreeMap<u32, Vec<Role>>,
}

pub fn heavy_hex_code() -> CodeDefinition {
    let z = |q: &[u32]| PauliOperator::on_labels(9, 'Z', q);
    let x = |q: &[u32]| PauliOperator::on_labels(9, 'X', q);
    let mut roles: BTreeMap<u32, Vec<Role>> = BTreeMap::new();
    for a in X_ANCILLAS {
        roles.entry(a).or_default().push(Role::XSyndrome);
    }
    for a in Z_ANCILLAS {
        roles.entry(a).or_default().push(Role::ZSyndrome);
    }
    for f in FLAGS {
        roles.entry(f).or_default().push(Role::Flag);
    }
    CodeDefinition {
        n: 9,
        gauge_z: vec![z(&[1, 2]), z(&[2, 3, 5, 6]), z(&[4, 5, 7, 8]), z(&[8, 9])],
        gauge_x: vec![x(&[1, 4]), x(&[2, 5]), x(&[3, 6]), x(&[4, 7]), x(&[5, 8]), x(&[6, 9])],
        stab_z: STAB_Z_SUPPORT.iter().map(|s| z(s)).collect(),
        stab_x: STAB_X_SUPPORT.iter().map(|s| x(s)).collect(),
        logical_z: z(&LOGICAL_Z_SUPPORT),
        logical_x: x(&LOGICAL_X_SUPPORT),
        ancilla_roles: roles,
    }
}

/// Literal schedule tables. The default reproduces the published first-order
/// edge tables; tests perturb it to check sensitivity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub z_cx: Vec<Vec<(u32, u32)>>,
    pub z_flag_idle: Vec<Vec<u32>>,
    pub x_cx: Vec<Vec<(u32, u32)>>,
    pub deflag: Vec<DeflagRule>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            z_cx: Z_ROUND_CX.iter().map(|s| s.to_vec()).collect(),
            z_flag_idle: Z_ROUND_FLAG_IDLE.iter().map(|s| s.to_vec()).collect(),
            x_cx: X_ROUND_CX.iter().map(|s| s.to_vec()).collect(),
            deflag: DEFLAG_RULES.to_vec(),
        }
    }
}

struct Builder<'a> {
    sched: &'a Schedule,
    steps: Vec<Vec<Component>>,
    labels: Vec<MeasurementLabel>,
    active: [bool; NUM_QUBITS + 1],
    used: [bool; NUM_QUBITS + 1],
    round: usize,
}

fn is_flag(q: u32) -> bool {
    FLAGS.contains(&q)
}

impl<'a> Builder<'a> {
    fn new(sched: &'a Schedule) -> Self {
        Builder {
            sched,
            steps: Vec::new(),
            labels: Vec::new(),
            active: [false; NUM_QUBITS + 1],
            used: [false; NUM_QUBITS + 1],
            round: 0,
        }
    }

    fn prep(&mut self, qs: &[u32]) {
        let step = qs
            .iter()
            .map(|&q| {
                let kind = if self.used[q as usize] { Kind::Reset } else { Kind::Initialize };
                self.used[q as usize] = true;
                self.active[q as usize] = true;
                Component::one(kind, q)
            })
            .collect();
        self.steps.push(step);
    }

    fn single(&mut self, kind: Kind, qs: &[u32]) {
        self.steps.push(qs.iter().map(|&q| Component::one(kind, q)).collect());
    }

    /// CX layer with explicit idles on every active untouched qubit; flags
    /// idle only if listed.
    fn cx_layer(&mut self, cx: &[(u32, u32)], flag_idle: Option<&[u32]>) {
        let mut touched = [false; NUM_QUBITS + 1];
        let mut step: Vec<Component> = cx
            .iter()
            .map(|&(c, t)| {
                touched[c as usize] = true;
                touched[t as usize] = true;
                Component::cx(c, t)
            })
            .collect();
        for q in 1..=NUM_QUBITS as u32 {
            if !self.active[q as usize] || touched[q as usize] {
                continue;
            }
            if let Some(listed) = flag_idle {
                if is_flag(q) && !listed.contains(&q) {
                    continue;
                }
            }
            step.push(Component::one(Kind::Id, q));
        }
        self.steps.push(step);
    }

    fn measure(&mut self, qs: &[u32], purpose: impl Fn(u32) -> Purpose) {
        let mut qs = qs.to_vec();
        qs.sort_unstable();
        let mut step = Vec::new();
        for &q in &qs {
            let mut c = Component::one(Kind::Measure, q);
            c.measurement_id = Some(self.labels.len());
            self.labels.push(MeasurementLabel { qubit: q, round: self.round, purpose: purpose(q) });
            step.push(c);
        }
        for q in 1..=NUM_QUBITS as u32 {
            if self.active[q as usize] && !qs.contains(&q) {
                step.push(Component::one(Kind::Idm, q));
            }
        }
        for &q in &qs {
            if !DATA.contains(&q) {
                self.active[q as usize] = false;
            }
        }
        self.steps.push(step);
        self.round += 1;
    }

    /// `final_readout`: measure data in this basis in the same step.
    fn x_round(&mut self, final_readout: Option<Basis>) {
        self.prep(&X_ANCILLAS);
        self.single(Kind::H, &X_ANCILLAS);
        let layers = self.sched.x_cx.clone();
        for layer in &layers {
            self.cx_layer(layer, None);
        }
        let mut h: Vec<u32> = X_ANCILLAS.to_vec();
        if final_readout == Some(Basis::X) {
            h.extend(DATA);
        }
        self.single(Kind::H, &h);
        let mut m: Vec<u32> = X_ANCILLAS.to_vec();
        if final_readout.is_some() {
            m.extend(DATA);
        }
        self.measure(&m, |q| if DATA.contains(&q) { Purpose::FinalData } else { Purpose::GaugeX });
    }

    fn z_round(&mut self, data_h_first: bool, final_readout: Option<Basis>) {
        let mut prep: Vec<u32> = FLAGS.to_vec();
        prep.extend(Z_ANCILLAS);
        self.prep(&prep);
        let mut h: Vec<u32> = FLAGS.to_vec();
        if data_h_first {
            h.extend(DATA);
        }
        self.single(Kind::H, &h);
        let (cx, idle) = (self.sched.z_cx.clone(), self.sched.z_flag_idle.clone());
        for (layer, fi) in cx.iter().zip(&idle) {
            self.cx_layer(layer, Some(fi));
        }
        let mut h: Vec<u32> = FLAGS.to_vec();
        if final_readout == Some(Basis::X) {
            h.extend(DATA);
        }
        self.single(Kind::H, &h);
        let mut m = prep;
        if final_readout.is_some() {
            m.extend(DATA);
        }
        self.measure(&m, |q| {
            if DATA.contains(&q) {
                Purpose::FinalData
            } else if Z_ANCILLAS.contains(&q) {
                Purpose::GaugeZ
            } else {
                Purpose::Flag
            }
        });
    }

    fn finish(self, schedule: String) -> ScheduledCircuit {
        ScheduledCircuit {
            num_qubits: NUM_QUBITS,
            steps: self.steps,
            measurement_labels: self.labels,
            round_schedule: schedule,
        }
    }
}

/// One gauge sub-round on already-prepared data qubits.
pub fn gauge_round_circuit(basis: Basis) -> ScheduledCircuit {
    gauge_round_circuit_with(&Schedule::default(), basis)
}

pub fn gauge_round_circuit_with(sched: &Schedule, basis: Basis) -> ScheduledCircuit {
    let mut b = Builder::new(sched);
    for q in DATA {
        b.active[q as usize] = true;
        b.used[q as usize] = true;
    }
    match basis {
        Basis::Z => b.z_round(false, None),
        Basis::X => b.x_round(None),
    }
    b.finish(basis.letter().to_string())
}

pub fn memory_experiment(state: State, rounds: usize) -> ScheduledCircuit {
    memory_experiment_with(&Schedule::default(), state, rounds)
}

pub fn memory_experiment_with(sched: &Schedule, state: State, rounds: usize) -> ScheduledCircuit {
    let mut b = Builder::new(sched);
    b.prep(&DATA);
    if matches!(state, State::One | State::Minus) {
        b.single(Kind::X, &DATA);
    }
    let basis = state.basis();
    let last = |t: usize| if t == rounds { Some(basis) } else { None };
    let mut schedule = String::new();
    match basis {
        Basis::Z => {
            b.x_round(last(0));
            schedule.push('X');
            for t in 1..=rounds {
                b.z_round(false, None);
                b.x_round(last(t));
                schedule.push_str("ZX");
            }
        }
        Basis::X => {
            b.z_round(true, last(0));
            schedule.push('Z');
            for t in 1..=rounds {
                b.x_round(None);
                b.z_round(false, last(t));
                schedule.push_str("XZ");
            }
        }
    }
    b.finish(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_generators_match_layout() {
        let c = heavy_hex_code();
        assert_eq!(c.gauge_z[0], PauliOperator::on_labels(9, 'Z', &[1, 2]));
        assert_eq!(c.gauge_z[3], PauliOperator::on_labels(9, 'Z', &[8, 9]));
        assert!(c.stab_x.contains(&PauliOperator::on_labels(9, 'X', &[3, 6])));
        assert!(c.stab_x.contains(&PauliOperator::on_labels(9, 'X', &[4, 7])));
        let prod = c.gauge_z[0].multiply(&c.gauge_z[2]).unwrap();
        assert_eq!(prod, c.stab_z[0]);
    }

    #[test]
    fn round_schedules() {
        assert_eq!(memory_experiment(State::Zero, 2).round_schedule, "XZXZX");
        assert_eq!(memory_experiment(State::Plus, 2).round_schedule, "ZXZXZ");
        assert_eq!(memory_experiment(State::Zero, 0).round_schedule, "X");
    }

    #[test]
    fn circuits_validate() {
        for s in State::ALL {
            for r in 0..4 {
                memory_experiment(s, r).validate().unwrap();
            }
        }
        gauge_round_circuit(Basis::Z).validate().unwrap();
        gauge_round_circuit(Basis::X).validate().unwrap();
    }

    #[test]
    fn z_round_measures_four_syndromes_and_eight_flags() {
        let c = gauge_round_circuit(Basis::Z);
        let count = |p| c.measurement_labels.iter().filter(|l| l.purpose == p).count();
        assert_eq!(count(Purpose::GaugeZ), 4);
        assert_eq!(count(Purpose::Flag), 8);
        let x = gauge_round_circuit(Basis::X);
        assert_eq!(x.count(Kind::H), 12);
    }

    #[test]
    fn flag_idle_table_follows_rule() {
        // weight-4 flags idle after their first cx; weight-2 flags idle outside
        // the span of their two ancilla cxs
        let steps_of = |f: u32| -> Vec<usize> {
            (0..5).filter(|&s| Z_ROUND_CX[s].iter().any(|&(a, b)| a == f || b == f)).collect()
        };
        for f in FLAGS {
            let s = steps_of(f);
            let (first, last) = (s[0], *s.last().unwrap());
            for step in 0..5 {
                if s.contains(&step) {
                    continue;
                }
                let expect = if [11, 12, 13, 14].contains(&f) {
                    step > first
                } else {
                    step < first || step > last
                };
                assert_eq!(Z_ROUND_FLAG_IDLE[step].contains(&f), expect, "flag {f} step {step}");
            }
        }
    }
}
