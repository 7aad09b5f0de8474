//! Device grid, spin-orbital orderings and the layered f-gate ansatz.

mod grid;
mod ordering;

pub use grid::{build_grid, parse_patterns, DeviceGraph, Edge, Pattern};
pub use ordering::{
    make_ordering, orderings, CircuitOrdering, Horizontal, Interleaved, OrderingRule, Vertical,
};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::model::{JwLayout, Spin};
use crate::qsim::{apply_layer, FGateParams, RotationProgram, StateVector, F_GATE_ARITY};

pub const DEFAULT_CYCLE: [Pattern; 4] = Pattern::ALL;

/// Grid used for `l` sites in the reference sweep: 2xL up to six sites, 4x4 for eight.
pub fn default_grid(l: usize) -> (usize, usize) {
    if l == 8 {
        (4, 4)
    } else {
        (2, l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredAnsatz {
    pub graph: DeviceGraph,
    pub cycle: Vec<Pattern>,
    /// Per layer, one parameter set per edge of that layer's pattern.
    pub layers: Vec<Vec<FGateParams>>,
    pub depth_cap: Option<usize>,
}

/// Zero-initialised (identity) ansatz; layer `i` uses `cycle[i % cycle.len()]`.
pub fn build_ansatz(graph: &DeviceGraph, n_layers: usize, cycle: Option<&[Pattern]>) -> Result<LayeredAnsatz> {
    if n_layers == 0 {
        bail!(Argument, "an ansatz needs at least one layer");
    }
    let cycle = cycle.map(<[Pattern]>::to_vec).unwrap_or_else(|| DEFAULT_CYCLE.to_vec());
    if cycle.is_empty() {
        bail!(Argument, "empty pattern sequence");
    }
    let mut a = LayeredAnsatz { graph: graph.clone(), cycle, layers: Vec::new(), depth_cap: None };
    a.push_layers(n_layers);
    Ok(a)
}

impl LayeredAnsatz {
    pub fn with_depth_cap(mut self, cap: usize) -> Result<Self> {
        if self.depth() > cap {
            return Err(Error::DepthCap { cap, requested: self.depth() });
        }
        self.depth_cap = Some(cap);
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn pattern(&self, layer: usize) -> Pattern {
        self.cycle[layer % self.cycle.len()]
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        (0..self.depth()).map(|i| self.pattern(i)).collect()
    }

    fn push_layers(&mut self, k: usize) {
        for _ in 0..k {
            let n_edges = self.graph.edges_of(self.pattern(self.layers.len())).len();
            self.layers.push(vec![FGateParams::default(); n_edges]);
        }
    }

    /// Appends `k` zero-initialised layers continuing the pattern cycle.
    pub fn extend(&self, k: usize) -> Result<LayeredAnsatz> {
        if k == 0 {
            bail!(Argument, "extend needs at least one layer");
        }
        let requested = self.depth() + k;
        if let Some(cap) = self.depth_cap {
            if requested > cap {
                return Err(Error::DepthCap { cap, requested });
            }
        }
        let mut a = self.clone();
        a.push_layers(k);
        Ok(a)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.len() * F_GATE_ARITY).sum()
    }

    /// Flat index range of layer `i`'s angles.
    pub fn layer_range(&self, layer: usize) -> Range<usize> {
        let start: usize = self.layers[..layer].iter().map(|l| l.len() * F_GATE_ARITY).sum();
        start..start + self.layers[layer].len() * F_GATE_ARITY
    }

    /// Angles flattened layer by layer, edge by edge, in f-gate order.
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flatten().flat_map(|p| p.to_array()).collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            bail!(Argument, "ansatz has {} parameters, got {}", self.n_params(), flat.len());
        }
        let mut chunks = flat.chunks(F_GATE_ARITY);
        for layer in &mut self.layers {
            for p in layer.iter_mut() {
                *p = FGateParams::from_slice(chunks.next().expect("length checked"))?;
            }
        }
        Ok(())
    }

    /// The whole circuit as Pauli rotations indexed into [`Self::params`].
    pub fn program(&self) -> RotationProgram {
        let mut prog = RotationProgram::new(self.graph.n_nodes(), self.n_params());
        let mut offset = 0;
        for i in 0..self.depth() {
            for (a, b) in self.graph.edges_of(self.pattern(i)) {
                prog.push_f_gate(a, b, offset);
                offset += F_GATE_ARITY;
            }
        }
        prog
    }

    /// Angles that map the filled state to the basis state with `qubits`
    /// flipped: each qubit gets an X angle of pi/2 in the first gate touching it,
    /// every other angle is zero.
    pub fn flip_params(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_params()];
        let mut done = vec![false; self.graph.n_nodes()];
        for &q in qubits {
            if q >= done.len() {
                bail!(Argument, "qubit {q} is not on the grid");
            }
        }
        let mut offset = 0;
        for i in 0..self.depth() {
            for (a, b) in self.graph.edges_of(self.pattern(i)) {
                for (slot, q) in [(0, a), (1, b)] {
                    if !done[q] {
                        done[q] = true;
                        if qubits.contains(&q) {
                            x[offset + slot] = std::f64::consts::FRAC_PI_2;
                        }
                    }
                }
                offset += F_GATE_ARITY;
            }
        }
        if let Some(&q) = qubits.iter().find(|&&q| !done[q]) {
            bail!(Topology, "no gate in the ansatz touches qubit {q}");
        }
        Ok(x)
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        for (i, params) in self.layers.iter().enumerate() {
            apply_layer(state, &self.graph, self.pattern(i), params)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeDump {
    pub qubit: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitalDump {
    /// 1-based site label.
    pub site: usize,
    pub spin: Spin,
    pub jw_position: usize,
    pub qubit: usize,
}

/// Graph and ordering dump for the `layout` subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayoutDump {
    pub rows: usize,
    pub cols: usize,
    pub nodes: Vec<NodeDump>,
    pub edges: Vec<Edge>,
    pub ordering: String,
    pub orbitals: Vec<OrbitalDump>,
    pub max_interaction_distance: usize,
}

pub fn layout_dump(graph: &DeviceGraph, ordering: &CircuitOrdering) -> Result<LayoutDump> {
    let jw = JwLayout::new(ordering.l)?;
    let nodes = (0..graph.n_nodes())
        .map(|q| {
            let (row, col) = graph.coords(q);
            NodeDump { qubit: q, row, col }
        })
        .collect();
    let orbitals = (0..jw.n_positions())
        .map(|p| {
            let (site, spin) = jw.orbital(p);
            OrbitalDump { site: site + 1, spin, jw_position: p, qubit: ordering.qubit(p) }
        })
        .collect();
    Ok(LayoutDump {
        rows: graph.rows,
        cols: graph.cols,
        nodes,
        edges: graph.edges.clone(),
        ordering: ordering.kind.clone(),
        orbitals,
        max_interaction_distance: ordering.max_interaction_distance(graph),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::new_zero_state;

    #[test]
    fn default_cycle_and_counts() {
        let g = build_grid(2, 4).unwrap();
        let a = build_ansatz(&g, 4, None).unwrap();
        assert_eq!(a.patterns(), Pattern::ALL.to_vec());
        let g2 = build_grid(2, 2).unwrap();
        let one = build_ansatz(&g2, 1, Some(&[Pattern::A])).unwrap();
        assert_eq!(one.n_params(), 12);
        assert!(build_ansatz(&g2, 1, Some(&[])).is_err());
        assert!(build_ansatz(&g2, 0, None).is_err());
    }

    #[test]
    fn identity_on_zero_state() {
        let g = build_grid(2, 3).unwrap();
        let a = build_ansatz(&g, 5, None).unwrap();
        let mut s = new_zero_state(6).unwrap();
        a.apply(&mut s).unwrap();
        assert_eq!(s, new_zero_state(6).unwrap());
    }

    #[test]
    fn extend_respects_the_cap() {
        let g = build_grid(2, 2).unwrap();
        let mut a = build_ansatz(&g, 1, None).unwrap().with_depth_cap(33).unwrap();
        for _ in 0..8 {
            a = a.extend(4).unwrap();
        }
        assert_eq!(a.depth(), 33);
        assert!(matches!(a.extend(4), Err(Error::DepthCap { cap: 33, requested: 37 })));
        let b = build_ansatz(&g, 4, None).unwrap().extend(4).unwrap();
        assert_eq!(b.patterns(), [Pattern::ALL, Pattern::ALL].concat());
    }
}
