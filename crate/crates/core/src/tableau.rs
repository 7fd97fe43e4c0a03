//! Stabilizer tableau with destabilizers whose row signs are affine functions
//! of earlier random outcomes. One symbolic pass over a circuit yields every
//! measurement's predictor.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::circuit::{Kind, ScheduledCircuit};
use crate::error::{Error, Result};

/// `constant ⊕ (parity of the variables in vars)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub constant: bool,
    pub vars: Bits,
}

impl Affine {
    fn zero(nvars: usize) -> Self {
        Affine { constant: false, vars: Bits::zeros(nvars) }
    }

    fn var(nvars: usize, v: usize) -> Self {
        Affine { constant: false, vars: Bits::from_indices(nvars, [v]) }
    }

    pub fn xor_with(&mut self, other: &Affine) {
        self.constant ^= other.constant;
        self.vars.xor_with(&other.vars);
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_zero()
    }

    pub fn eval(&self, assignment: &Bits) -> bool {
        self.constant ^ self.vars.dot(assignment)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementPredictor {
    pub measurement_id: usize,
    pub is_deterministic: bool,
    pub constant: bool,
    pub dependency_set: Vec<usize>,
}

/// Single-qubit product states accepted as initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductState {
    Zero,
    One,
    Plus,
    Minus,
}

impl ProductState {
    pub fn parse_spec(s: &str) -> Result<Vec<ProductState>> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(ProductState::Zero),
                '1' => Ok(ProductState::One),
                '+' => Ok(ProductState::Plus),
                '-' | '−' => Ok(ProductState::Minus),
                _ => Err(Error::BadState(s.to_string())),
            })
            .collect()
    }
}

struct Tableau {
    n: usize,
    nvars: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<Affine>,
}

fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    fn new(n: usize, nvars: usize) -> Self {
        let mut xs = vec![0; 2 * n];
        let mut zs = vec![0; 2 * n];
        for i in 0..n {
            xs[i] = 1 << i;
            zs[n + i] = 1 << i;
        }
        Tableau { n, nvars, xs, zs, signs: vec![Affine::zero(nvars); 2 * n] }
    }

    fn rows(&self) -> usize {
        2 * self.n
    }

    fn cx(&mut self, a: usize, b: usize) {
        for r in 0..self.rows() {
            let (xa, xb) = ((self.xs[r] >> a) & 1, (self.xs[r] >> b) & 1);
            let (za, zb) = ((self.zs[r] >> a) & 1, (self.zs[r] >> b) & 1);
            if xa & zb & (xb ^ za ^ 1) == 1 {
                self.signs[r].constant ^= true;
            }
            self.xs[r] ^= xa << b;
            self.zs[r] ^= zb << a;
        }
    }

    fn h(&mut self, a: usize) {
        for r in 0..self.rows() {
            let (x, z) = ((self.xs[r] >> a) & 1, (self.zs[r] >> a) & 1);
            if x & z == 1 {
                self.signs[r].constant ^= true;
            }
            self.xs[r] = (self.xs[r] & !(1 << a)) | (z << a);
            self.zs[r] = (self.zs[r] & !(1 << a)) | (x << a);
        }
    }

    fn s(&mut self, a: usize) {
        for r in 0..self.rows() {
            let (x, z) = ((self.xs[r] >> a) & 1, (self.zs[r] >> a) & 1);
            if x & z == 1 {
                self.signs[r].constant ^= true;
            }
            self.zs[r] ^= x << a;
        }
    }

    /// Pauli `X^px Z^pz` on qubit `a`.
    fn pauli(&mut self, a: usize, px: bool, pz: bool) {
        for r in 0..self.rows() {
            let x = (self.xs[r] >> a) & 1 == 1;
            let z = (self.zs[r] >> a) & 1 == 1;
            if (px && z) ^ (pz && x) {
                self.signs[r].constant ^= true;
            }
        }
    }

    fn rowsum_into(&self, hx: &mut u64, hz: &mut u64, hs: &mut Affine, i: usize) {
        let mut acc = 0i32;
        for j in 0..self.n {
            acc += g(
                (self.xs[i] >> j) & 1 == 1,
                (self.zs[i] >> j) & 1 == 1,
                (*hx >> j) & 1 == 1,
                (*hz >> j) & 1 == 1,
            );
        }
        let acc = acc.rem_euclid(4);
        debug_assert!(acc == 0 || acc == 2, "rowsum of anticommuting rows");
        hs.xor_with(&self.signs[i]);
        hs.constant ^= acc == 2;
        *hx ^= self.xs[i];
        *hz ^= self.zs[i];
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let (mut hx, mut hz, mut hs) = (self.xs[h], self.zs[h], self.signs[h].clone());
        self.rowsum_into(&mut hx, &mut hz, &mut hs, i);
        self.xs[h] = hx;
        self.zs[h] = hz;
        self.signs[h] = hs;
    }

    /// Z measurement on `a`; a random outcome becomes variable `var`.
    fn measure(&mut self, a: usize, var: usize) -> Affine {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| (self.xs[r] >> a) & 1 == 1) {
            for r in 0..2 * n {
                if r != p && (self.xs[r] >> a) & 1 == 1 {
                    self.rowsum(r, p);
                }
            }
            self.xs[p - n] = self.xs[p];
            self.zs[p - n] = self.zs[p];
            self.signs[p - n] = self.signs[p].clone();
            self.xs[p] = 0;
            self.zs[p] = 1 << a;
            self.signs[p] = Affine::var(self.nvars, var);
            self.signs[p].clone()
        } else {
            let (mut hx, mut hz, mut hs) = (0u64, 0u64, Affine::zero(self.nvars));
            for i in 0..n {
                if (self.xs[i] >> a) & 1 == 1 {
                    self.rowsum_into(&mut hx, &mut hz, &mut hs, i + n);
                }
            }
            hs
        }
    }

    /// Measure then flip back to |0⟩ conditioned on the outcome.
    fn reset(&mut self, a: usize, var: usize) {
        let out = self.measure(a, var);
        for r in 0..self.rows() {
            if (self.zs[r] >> a) & 1 == 1 {
                self.signs[r].xor_with(&out);
            }
        }
    }
}

/// Symbolic outcome of every measurement, as an affine function over random
/// outcome variables. Variables `0..num_measurements` are measurement ids;
/// higher variables come from random re-preparations.
#[derive(Debug, Clone)]
pub struct SymbolicRun {
    pub outcomes: Vec<Affine>,
    pub num_vars: usize,
    pub num_measurements: usize,
}

impl SymbolicRun {
    pub fn parity(&self, ids: &[usize]) -> Affine {
        let mut acc = Affine::zero(self.num_vars);
        for &m in ids {
            acc.xor_with(&self.outcomes[m]);
        }
        acc
    }

    pub fn predictors(&self) -> Vec<MeasurementPredictor> {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(m, e)| {
                let hidden = e.vars.ones().any(|v| v >= self.num_measurements);
                let own = e.vars.ones().any(|v| v == m);
                let det = !hidden && !own;
                MeasurementPredictor {
                    measurement_id: m,
                    is_deterministic: det,
                    constant: if det { e.constant } else { false },
                    dependency_set: if det { e.vars.ones().collect() } else { Vec::new() },
                }
            })
            .collect()
    }
}

pub fn simulate_symbolic(circuit: &ScheduledCircuit, initial: &[ProductState]) -> Result<SymbolicRun> {
    let n = circuit.num_qubits;
    if n > 64 {
        return Err(Error::Config("tableau supports at most 64 qubits".into()));
    }
    if initial.len() != n {
        return Err(Error::BadState(format!("expected {n} initial states, got {}", initial.len())));
    }
    let m = circuit.num_measurements();
    let preps = circuit.components().filter(|(_, c)| c.kind.is_prep()).count();
    let nvars = m + preps;
    let mut t = Tableau::new(n, nvars);
    for (q, s) in initial.iter().enumerate() {
        match s {
            ProductState::Zero => {}
            ProductState::One => t.pauli(q, true, false),
            ProductState::Plus => t.h(q),
            ProductState::Minus => {
                t.pauli(q, true, false);
                t.h(q);
            }
        }
    }
    let mut outcomes = vec![None; m];
    let mut hidden = m;
    for (_, c) in circuit.components() {
        let q: Vec<usize> = c.qubits.iter().map(|&l| l as usize - 1).collect();
        match c.kind {
            Kind::Cx => t.cx(q[0], q[1]),
            Kind::H => t.h(q[0]),
            Kind::S => t.s(q[0]),
            Kind::X => t.pauli(q[0], true, false),
            Kind::Y => t.pauli(q[0], true, true),
            Kind::Z => t.pauli(q[0], false, true),
            Kind::Id | Kind::Idm => {}
            Kind::Measure => {
                let id = c
                    .measurement_id
                    .ok_or_else(|| Error::Config("measure without id".into()))?;
                outcomes[id] = Some(t.measure(q[0], id));
            }
            Kind::Initialize | Kind::Reset => {
                t.reset(q[0], hidden);
                hidden += 1;
            }
        }
    }
    let outcomes = outcomes
        .into_iter()
        .map(|o| o.ok_or_else(|| Error::Config("measurement id never used".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolicRun { outcomes, num_vars: nvars, num_measurements: m })
}

pub fn derive_predictors(
    circuit: &ScheduledCircuit,
    initial: &[ProductState],
) -> Result<Vec<MeasurementPredictor>> {
    Ok(simulate_symbolic(circuit, initial)?.predictors())
}
