//! First-order edge flip probabilities as exact rational polynomials in the
//! component fault rates.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::circuit::{Kind, ScheduledCircuit};
use crate::code::Basis;
use crate::error::Result;
use crate::exec::Exec;
use crate::frame::FaultTable;
use crate::hypergraph::{fault_signatures, EventKind, EventMap};
use crate::noise::{fault_options, NoiseParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgePolynomial {
    /// Event names; the boundary is `b`.
    pub endpoints: [String; 2],
    #[serde(serialize_with = "ser_coeffs")]
    pub coefficients: BTreeMap<Kind, Ratio<i64>>,
}

fn ser_coeffs<S: serde::Serializer>(c: &BTreeMap<Kind, Ratio<i64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(c.len()))?;
    for (k, v) in c {
        m.serialize_entry(k.name(), &v.to_string())?;
    }
    m.end()
}

impl EdgePolynomial {
    pub fn same_edge(&self, other: &EdgePolynomial) -> bool {
        let [a, b] = &self.endpoints;
        let [c, d] = &other.endpoints;
        (a == c && b == d) || (a == d && b == c)
    }

    /// Value at the given rates.
    pub fn eval(&self, params: &NoiseParams) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, c)| *c.numer() as f64 / *c.denom() as f64 * params.get(*k))
            .sum()
    }

    /// The coefficients alone, e.g. `1/3 p_cx + 2/3 p_measure`.
    pub fn polynomial(&self) -> String {
        let terms: Vec<String> = self.coefficients.iter().map(|(k, c)| format!("{c} p_{k}")).collect();
        terms.join(" + ")
    }
}

impl fmt::Display for EdgePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}) {}", self.endpoints[0], self.endpoints[1], self.polynomial())
    }
}

/// Sums each single fault's share `1/options` per component kind onto the
/// `basis` matching edge it projects to. Edges are ordered by their first
/// endpoint's event id, then the second's, with the boundary last.
pub fn first_order_edge_polynomials(circuit: &ScheduledCircuit, basis: Basis) -> Result<Vec<EdgePolynomial>> {
    let map = EventMap::new(circuit, true)?;
    let table = FaultTable::new(circuit, Exec::default())?;
    // Any strictly positive rate enumerates every fault; only the share matters.
    let params = NoiseParams::uniform(0.01)?;
    let sigs = fault_signatures(&map, &table, &params, Exec::default())?;
    let is_node = |e: usize| map.events[e].basis == basis && map.events[e].kind == EventKind::StabilizerDiff;
    const BOUNDARY: usize = usize::MAX;
    let mut acc: BTreeMap<(usize, usize), BTreeMap<Kind, Ratio<i64>>> = BTreeMap::new();
    for s in &sigs {
        let proj: Vec<usize> = s.events.iter().copied().filter(|&e| is_node(e)).collect();
        let key = match proj.as_slice() {
            [a] => (*a, BOUNDARY),
            [a, b] => (*a, *b),
            _ => continue,
        };
        let n = fault_options(&table.locations[s.fault.location]).len() as i64;
        *acc.entry(key).or_default().entry(s.fault.kind).or_insert_with(|| Ratio::from_integer(0)) += Ratio::new(1, n);
    }
    let name = |e: usize| if e == BOUNDARY { "b".to_string() } else { map.events[e].name() };
    Ok(acc
        .into_iter()
        .map(|((a, b), coefficients)| EdgePolynomial { endpoints: [name(a), name(b)], coefficients })
        .collect())
}
