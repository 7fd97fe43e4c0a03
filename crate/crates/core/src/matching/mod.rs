//! Minimum-weight perfect-matching decoder on one basis of the hypergraph.

pub mod blossom;
pub mod polynomial;
pub mod tables;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::code::{Basis, DATA, LOGICAL_X_SUPPORT, LOGICAL_Z_SUPPORT};
use crate::error::{Error, Result};
use crate::hypergraph::{DecodingHypergraph, EventKind};
use crate::noise::FaultSpec;

pub use blossom::max_weight_matching;
pub use polynomial::{first_order_edge_polynomials, EdgePolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Uniform,
    Analytic,
}

pub fn edge_weight(p: f64, method: Weighting) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("edge probability {p} outside (0, 0.5]")));
    }
    Ok(match method {
        Weighting::Uniform => 1.0,
        Weighting::Analytic => ((1.0 - p) / p).ln(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingEdge {
    /// Node indices; the boundary is `nodes.len()`.
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub weight: f64,
    pub correction_qubit: Option<u32>,
    pub logical_label: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct MatchingGraph {
    pub basis: Basis,
    /// Hypergraph event id of each node.
    pub nodes: Vec<usize>,
    pub edges: Vec<MatchingEdge>,
    pub method: Weighting,
    dist: Vec<f64>,
    label: Vec<[bool; 2]>,
    /// Edge taken into each node on the shortest path from the row's source.
    pred: Vec<usize>,
}

const NO_EDGE: usize = usize::MAX;

/// Data qubit of the heaviest single-data-qubit fault, if any.
fn dominant_qubit(witnesses: &[FaultSpec]) -> Option<u32> {
    let mut mass: BTreeMap<u32, f64> = BTreeMap::new();
    for f in witnesses {
        if let [(q, _)] = f.paulis.as_slice() {
            if DATA.contains(q) {
                *mass.entry(*q).or_default() += f.probability;
            }
        }
    }
    mass.into_iter().fold(None, |best: Option<(u32, f64)>, (q, m)| match best {
        Some((_, bm)) if bm >= m => best,
        _ => Some((q, m)),
    })
    .map(|(q, _)| q)
}

impl MatchingGraph {
    /// Keeps the `basis` stabilizer events. Each hyperedge is projected onto
    /// them; projections of size one or two become boundary or ordinary
    /// edges, larger ones are dropped.
    pub fn build(hg: &DecodingHypergraph, basis: Basis, method: Weighting) -> Result<Self> {
        let nodes: Vec<usize> = hg
            .events
            .iter()
            .filter(|e| e.basis == basis && e.kind == EventKind::StabilizerDiff)
            .map(|e| e.id)
            .collect();
        let mut node_of = vec![None; hg.events.len()];
        for (i, &e) in nodes.iter().enumerate() {
            node_of[e] = Some(i);
        }
        let boundary = nodes.len();

        struct Acc {
            p: f64,
            by_label: BTreeMap<[bool; 2], f64>,
            witnesses: Vec<FaultSpec>,
        }
        let mut groups: BTreeMap<(usize, usize), Acc> = BTreeMap::new();
        for h in &hg.hyperedges {
            let proj: Vec<usize> = h.events.iter().filter_map(|&e| node_of[e]).collect();
            let key = match proj.as_slice() {
                [a] => (*a, boundary),
                [a, b] => (*a.min(b), *a.max(b)),
                _ => continue,
            };
            let g = groups.entry(key).or_insert(Acc { p: 0.0, by_label: BTreeMap::new(), witnesses: Vec::new() });
            g.p = g.p + h.probability - 2.0 * g.p * h.probability;
            *g.by_label.entry(h.logical_label).or_default() += h.probability;
            g.witnesses.extend(h.fault_witnesses.iter().cloned());
        }
        let mut edges = Vec::new();
        for ((a, b), g) in groups {
            if g.p <= 0.0 {
                continue;
            }
            let label = g
                .by_label
                .iter()
                .fold(None, |best: Option<([bool; 2], f64)>, (l, &m)| match best {
                    Some((_, bm)) if bm >= m => best,
                    _ => Some((*l, m)),
                })
                .map(|x| x.0)
                .unwrap_or_default();
            edges.push(MatchingEdge {
                a,
                b,
                probability: g.p,
                weight: edge_weight(g.p.min(0.5), method)?,
                correction_qubit: dominant_qubit(&g.witnesses),
                logical_label: label,
            });
        }
        let mut g = MatchingGraph {
            basis,
            nodes,
            edges,
            method,
            dist: Vec::new(),
            label: Vec::new(),
            pred: Vec::new(),
        };
        g.shortest_paths();
        Ok(g)
    }

    pub fn boundary(&self) -> usize {
        self.nodes.len()
    }

    /// Dense Dijkstra from every vertex. The boundary is never an
    /// intermediate vertex; ties keep the first path found, scanning
    /// vertices in index order.
    fn shortest_paths(&mut self) {
        let v = self.nodes.len() + 1;
        let bnd = self.boundary();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        self.dist = vec![f64::INFINITY; v * v];
        self.label = vec![[false; 2]; v * v];
        self.pred = vec![NO_EDGE; v * v];
        for s in 0..v {
            let row = s * v;
            let mut done = vec![false; v];
            self.dist[row + s] = 0.0;
            loop {
                let mut u = NO_EDGE;
                for i in 0..v {
                    if !done[i] && self.dist[row + i].is_finite() && (u == NO_EDGE || self.dist[row + i] < self.dist[row + u]) {
                        u = i;
                    }
                }
                if u == NO_EDGE {
                    break;
                }
                done[u] = true;
                if u == bnd && u != s {
                    continue;
                }
                for &(w, k) in &adj[u] {
                    let d = self.dist[row + u] + self.edges[k].weight;
                    if d < self.dist[row + w] {
                        self.dist[row + w] = d;
                        let l = self.label[row + u];
                        let el = self.edges[k].logical_label;
                        self.label[row + w] = [l[0] ^ el[0], l[1] ^ el[1]];
                        self.pred[row + w] = k;
                    }
                }
            }
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * (self.nodes.len() + 1) + j]
    }

    /// Edge indices of the stored shortest path from `i` to `j`.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let v = self.nodes.len() + 1;
        let mut out = Vec::new();
        let mut cur = j;
        while cur != i {
            let k = self.pred[i * v + cur];
            if k == NO_EDGE {
                return Vec::new();
            }
            out.push(k);
            let e = &self.edges[k];
            cur = if e.a == cur { e.b } else { e.a };
        }
        out.reverse();
        out
    }

    fn path_label(&self, i: usize, j: usize) -> [bool; 2] {
        self.label[i * (self.nodes.len() + 1) + j]
    }

    /// Highlighted node indices of a full hypergraph event vector.
    pub fn highlighted(&self, beta: &Bits) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| beta.get(self.nodes[i])).collect()
    }

    /// Matched pairs `(i, j)`, with `j == boundary()` for boundary matches.
    pub fn match_pairs(&self, beta: &Bits) -> Result<Vec<(usize, usize)>> {
        let hl = self.highlighted(beta);
        let k = hl.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let bnd = self.boundary();
        const SCALE: f64 = (1u64 << 30) as f64;
        let mut raw: Vec<(usize, usize, i64)> = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                let d = self.distance(hl[a], hl[b]);
                if d.is_finite() {
                    raw.push((a, b, (d * SCALE).round() as i64));
                }
            }
            let d = self.distance(hl[a], bnd);
            if d.is_finite() {
                raw.push((a, k + a, (d * SCALE).round() as i64));
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                raw.push((k + a, k + b, 0));
            }
        }
        let top = raw.iter().map(|e| e.2).max().unwrap_or(0) + 1;
        let edges: Vec<(usize, usize, i64)> = raw.iter().map(|&(a, b, w)| (a, b, top - w)).collect();
        let mate = max_weight_matching(2 * k, &edges, true);
        let mut pairs = Vec::new();
        for a in 0..k {
            match mate[a] {
                Some(m) if m < k => {
                    if a < m {
                        pairs.push((hl[a], hl[m]));
                    }
                }
                Some(m) if m == k + a => pairs.push((hl[a], bnd)),
                _ => return Err(Error::Internal(format!("node {} left unmatched", self.nodes[hl[a]]))),
            }
        }
        Ok(pairs)
    }

    /// Logical correction γ for event vector `beta`.
    pub fn decode(&self, beta: &Bits) -> Result<[bool; 2]> {
        let mut g = [false; 2];
        for (i, j) in self.match_pairs(beta)? {
            let l = self.path_label(i, j);
            g[0] ^= l[0];
            g[1] ^= l[1];
        }
        Ok(g)
    }

    /// Total path weight of the chosen matching.
    pub fn matching_weight(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(i, j)| self.distance(i, j)).sum()
    }

    /// γ implied by the data-qubit corrections `Q(e)` along matched paths.
    pub fn decode_by_qubits(&self, beta: &Bits) -> Result<[bool; 2]> {
        let support: &[u32] = match self.basis {
            Basis::Z => &LOGICAL_Z_SUPPORT,
            Basis::X => &LOGICAL_X_SUPPORT,
        };
        let bit = if self.basis == Basis::Z { 0 } else { 1 };
        let mut g = [false; 2];
        for (i, j) in self.match_pairs(beta)? {
            for k in self.path(i, j) {
                if let Some(q) = self.edges[k].correction_qubit {
                    g[bit] ^= support.contains(&q);
                }
            }
        }
        Ok(g)
    }
}

pub fn build_matching_graph(hg: &DecodingHypergraph, basis: Basis, method: Weighting) -> Result<MatchingGraph> {
    MatchingGraph::build(hg, basis, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{ErrorSensitiveEvent, Hyperedge};

    fn ev(id: usize) -> ErrorSensitiveEvent {
        ErrorSensitiveEvent {
            id,
            kind: EventKind::StabilizerDiff,
            basis: Basis::Z,
            stabilizer_index: Some(id),
            round: 1,
            source_measurements: vec![],
            constant: false,
        }
    }

    fn he(events: Vec<usize>, p: f64, l: [bool; 2]) -> Hyperedge {
        Hyperedge { events, probability: p, logical_label: l, fault_witnesses: vec![] }
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(0.5, Weighting::Analytic).unwrap(), 0.0);
        assert_eq!(edge_weight(0.3, Weighting::Uniform).unwrap(), 1.0);
        assert!((edge_weight(0.01, Weighting::Analytic).unwrap() - 99f64.ln()).abs() < 1e-12);
        assert!(edge_weight(0.0, Weighting::Analytic).is_err());
    }

    #[test]
    fn forced_boundary_match() {
        let hg = DecodingHypergraph {
            events: vec![ev(0), ev(1)],
            hyperedges: vec![he(vec![0], 0.1, [true, false]), he(vec![0, 1], 0.1, [false, false]), he(vec![1], 0.1, [false, false])],
            k: 1,
        };
        let g = MatchingGraph::build(&hg, Basis::Z, Weighting::Analytic).unwrap();
        assert_eq!(g.decode(&Bits::zeros(2)).unwrap(), [false; 2]);
        assert_eq!(g.decode(&Bits::from_bools(&[true, false])).unwrap(), [true, false]);
        assert_eq!(g.decode(&Bits::from_bools(&[true, true])).unwrap(), [false, false]);
    }
}
