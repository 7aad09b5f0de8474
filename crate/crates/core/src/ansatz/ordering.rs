//! Assignments of spin orbitals to grid qubits.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::DeviceGraph;
use crate::error::{bail, Result};
use crate::model::{JwLayout, Spin};
use crate::registry::{Named, Registry};

/// Places each site's (up, down) orbital pair on two grid-adjacent nodes.
pub trait OrderingRule: Named + Send + Sync {
    /// Grid shape this ordering needs for `l` sites.
    fn required_shape(&self, l: usize, graph: &DeviceGraph) -> (usize, usize);

    /// `(up, down)` node for each 0-based site, given a grid of the required shape.
    fn place(&self, l: usize, graph: &DeviceGraph) -> Vec<(usize, usize)>;
}

/// Two rows: up orbitals along the top, down orbitals along the bottom.
pub struct Interleaved;

/// Sites descend a column of horizontal pairs, then move right to the next column pair.
pub struct Vertical;

/// Sites run along rows of vertical pairs, reversing direction on every other row.
pub struct Horizontal;

impl Named for Interleaved {
    fn name(&self) -> &'static str {
        "interleaved"
    }
}

impl Named for Vertical {
    fn name(&self) -> &'static str {
        "vertical"
    }
}

impl Named for Horizontal {
    fn name(&self) -> &'static str {
        "horizontal"
    }
}

impl OrderingRule for Interleaved {
    fn required_shape(&self, l: usize, _: &DeviceGraph) -> (usize, usize) {
        (2, l)
    }

    fn place(&self, l: usize, g: &DeviceGraph) -> Vec<(usize, usize)> {
        (0..l).map(|j| (g.node(0, j), g.node(1, j))).collect()
    }
}

impl OrderingRule for Vertical {
    fn required_shape(&self, l: usize, g: &DeviceGraph) -> (usize, usize) {
        (g.rows, 2 * l.div_ceil(g.rows))
    }

    fn place(&self, l: usize, g: &DeviceGraph) -> Vec<(usize, usize)> {
        (0..l)
            .map(|k| {
                let (r, c) = (k % g.rows, 2 * (k / g.rows));
                (g.node(r, c), g.node(r, c + 1))
            })
            .collect()
    }
}

impl OrderingRule for Horizontal {
    fn required_shape(&self, l: usize, g: &DeviceGraph) -> (usize, usize) {
        (2 * l.div_ceil(g.cols), g.cols)
    }

    fn place(&self, l: usize, g: &DeviceGraph) -> Vec<(usize, usize)> {
        (0..l)
            .map(|k| {
                let row = k / g.cols;
                let c = if row % 2 == 0 { k % g.cols } else { g.cols - 1 - k % g.cols };
                (g.node(2 * row, c), g.node(2 * row + 1, c))
            })
            .collect()
    }
}

pub fn orderings() -> &'static Registry<dyn OrderingRule> {
    static REG: OnceLock<Registry<dyn OrderingRule>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn OrderingRule> = Registry::new("ordering");
        r.register(Box::new(Interleaved)).register(Box::new(Vertical)).register(Box::new(Horizontal));
        r
    })
}

/// Map from Jordan-Wigner positions to grid qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitOrdering {
    pub kind: String,
    pub l: usize,
    pub rows: usize,
    pub cols: usize,
    /// `qubit_of[p]` is the grid node holding JW position `p`.
    pub qubit_of: Vec<usize>,
}

pub fn make_ordering(kind: &str, l: usize, graph: &DeviceGraph) -> Result<CircuitOrdering> {
    let rule = orderings().get(kind)?;
    let jw = JwLayout::new(l)?;
    if graph.n_nodes() < 2 * l {
        bail!(Topology, "{}x{} grid has fewer than {} nodes", graph.rows, graph.cols, 2 * l);
    }
    let shape = rule.required_shape(l, graph);
    if (graph.rows, graph.cols) != shape {
        bail!(
            Topology,
            "{} ordering for L={l} needs a {}x{} grid, got {}x{}",
            rule.name(),
            shape.0,
            shape.1,
            graph.rows,
            graph.cols
        );
    }
    let mut qubit_of = vec![0; 2 * l];
    for (site, (up, down)) in rule.place(l, graph).into_iter().enumerate() {
        qubit_of[jw.position(site, Spin::Up)] = up;
        qubit_of[jw.position(site, Spin::Down)] = down;
    }
    Ok(CircuitOrdering { kind: rule.name().to_string(), l, rows: graph.rows, cols: graph.cols, qubit_of })
}

impl CircuitOrdering {
    pub fn qubit(&self, position: usize) -> usize {
        self.qubit_of[position]
    }

    pub fn n_qubits(&self) -> usize {
        self.rows * self.cols
    }

    /// Largest grid distance between the two qubits of any Hamiltonian
    /// interaction pair (hopping neighbours and same-site pairs).
    pub fn max_interaction_distance(&self, graph: &DeviceGraph) -> usize {
        let jw = JwLayout::new(self.l).expect("ordering built from a valid layout");
        jw.interaction_pairs()
            .into_iter()
            .map(|(a, b)| graph.distance(self.qubit(a), self.qubit(b)))
            .max()
            .unwrap_or(0)
    }
}
