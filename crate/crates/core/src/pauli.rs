use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Component, Kind};
use crate::error::{Error, Result};

/// Phase-free Pauli operator in binary symplectic form. Qubit `i` is index `i`
/// (0-based); circuit labels map to index `label - 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliOperator {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { x: vec![false; n], z: vec![false; n] }
    }

    pub fn from_bits(x: Vec<bool>, z: Vec<bool>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension(x.len(), z.len()));
        }
        Ok(PauliOperator { x, z })
    }

    /// Builds an operator from a string such as `"XIZY"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut p = PauliOperator::identity(s.chars().count());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                'I' | '_' => {}
                'X' => p.x[i] = true,
                'Z' => p.z[i] = true,
                'Y' => {
                    p.x[i] = true;
                    p.z[i] = true;
                }
                _ => return Err(Error::Config(format!("bad Pauli letter `{ch}`"))),
            }
        }
        Ok(p)
    }

    /// `letter` applied on each of the given 1-based qubit labels.
    pub fn on_labels(n: usize, letter: char, labels: &[u32]) -> Self {
        let mut p = PauliOperator::identity(n);
        for &q in labels {
            let i = q as usize - 1;
            match letter {
                'X' => p.x[i] = true,
                'Z' => p.z[i] = true,
                'Y' => {
                    p.x[i] = true;
                    p.z[i] = true;
                }
                _ => panic!("bad Pauli letter"),
            }
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn x(&self, i: usize) -> bool {
        self.x[i]
    }

    pub fn z(&self, i: usize) -> bool {
        self.z[i]
    }

    pub fn set(&mut self, i: usize, x: bool, z: bool) {
        self.x[i] = x;
        self.z[i] = z;
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a || **b).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&i| self.x[i] || self.z[i]).collect()
    }

    fn check(&self, other: &PauliOperator) -> Result<()> {
        if self.x.len() != other.x.len() {
            return Err(Error::Dimension(self.x.len(), other.x.len()));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.check(other)?;
        Ok(PauliOperator {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        self.check(other)?;
        let mut acc = false;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        Ok(!acc)
    }

    /// `c p c†` up to phase.
    pub fn conjugate_through(&self, c: &Component) -> Result<PauliOperator> {
        if !c.kind.is_unitary() {
            return Err(Error::UnsupportedComponent(c.kind.name().into()));
        }
        let n = self.num_qubits();
        for &q in &c.qubits {
            if q == 0 || q as usize > n {
                return Err(Error::Dimension(q as usize, n));
            }
        }
        let mut p = self.clone();
        match c.kind {
            Kind::Cx => {
                let (a, b) = (c.qubits[0] as usize - 1, c.qubits[1] as usize - 1);
                p.x[b] ^= p.x[a];
                p.z[a] ^= p.z[b];
            }
            Kind::H => {
                let a = c.qubits[0] as usize - 1;
                std::mem::swap(&mut p.x[a], &mut p.z[a]);
            }
            Kind::S => {
                let a = c.qubits[0] as usize - 1;
                p.z[a] ^= p.x[a];
            }
            _ => {}
        }
        Ok(p)
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.x.len() {
            let ch = match (self.x[i], self.z[i]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        PauliOperator::parse(s).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(p("IIX").multiply(&p("ZIX")).unwrap(), p("ZII"));
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("Y"));
        assert!(p("XX").multiply(&p("X")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        let n = 9;
        let x14 = PauliOperator::on_labels(n, 'X', &[1, 4]);
        let z14 = PauliOperator::on_labels(n, 'Z', &[1, 4]);
        assert!(x14.commutes(&z14).unwrap());
        let zl = PauliOperator::on_labels(n, 'Z', &[1, 4, 7]);
        let xl = PauliOperator::on_labels(n, 'X', &[1, 2, 3]);
        assert!(!zl.commutes(&xl).unwrap());
    }

    #[test]
    fn conjugation_examples() {
        let cx = Component::cx(1, 2);
        assert_eq!(p("XI").conjugate_through(&cx).unwrap(), p("XX"));
        assert_eq!(p("IZ").conjugate_through(&cx).unwrap(), p("ZZ"));
        assert_eq!(p("X").conjugate_through(&Component::one(Kind::H, 1)).unwrap(), p("Z"));
        assert!(p("X").conjugate_through(&Component::one(Kind::Measure, 1)).is_err());
    }
}
