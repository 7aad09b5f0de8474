use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::qsim::MAX_PAULI_QUBITS;

/// Edge class of a rectangular grid.
///
/// A: vertical, even top row. B: vertical, odd top row.
/// C: horizontal, even left column. D: horizontal, odd left column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    A,
    B,
    C,
    D,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::A, Pattern::B, Pattern::C, Pattern::D];
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Pattern::A),
            "B" => Ok(Pattern::B),
            "C" => Ok(Pattern::C),
            "D" => Ok(Pattern::D),
            _ => Err(Error::Parse(format!("unknown pattern '{s}'"))),
        }
    }
}

/// Parses a sequence such as `"ABCD"`.
pub fn parse_patterns(s: &str) -> Result<Vec<Pattern>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| c.to_string().parse())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub pattern: Pattern,
}

/// Rectangular qubit grid; node `(r, c)` is qubit `r * cols + c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceGraph {
    pub rows: usize,
    pub cols: usize,
    pub edges: Vec<Edge>,
}

pub fn build_grid(rows: usize, cols: usize) -> Result<DeviceGraph> {
    if rows == 0 || cols == 0 {
        bail!(Argument, "grid dimensions must be positive, got {rows}x{cols}");
    }
    if rows * cols > MAX_PAULI_QUBITS {
        bail!(Capacity, "a {rows}x{cols} grid exceeds {MAX_PAULI_QUBITS} qubits");
    }
    let node = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols {
            let pattern = if r % 2 == 0 { Pattern::A } else { Pattern::B };
            edges.push(Edge { a: node(r, c), b: node(r + 1, c), pattern });
        }
    }
    for r in 0..rows {
        for c in 0..cols.saturating_sub(1) {
            let pattern = if c % 2 == 0 { Pattern::C } else { Pattern::D };
            edges.push(Edge { a: node(r, c), b: node(r, c + 1), pattern });
        }
    }
    Ok(DeviceGraph { rows, cols, edges })
}

impl DeviceGraph {
    pub fn n_nodes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn node(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn coords(&self, q: usize) -> (usize, usize) {
        (q / self.cols, q % self.cols)
    }

    pub fn edges_of(&self, pattern: Pattern) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.pattern == pattern).map(|e| (e.a, e.b)).collect()
    }

    /// Manhattan distance between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.edges.iter().any(|e| (e.a, e.b) == (a, b) || (e.b, e.a) == (a, b))
    }

    pub fn is_matching(&self, pattern: Pattern) -> bool {
        let mut used = 0u64;
        for (a, b) in self.edges_of(pattern) {
            let m = (1u64 << a) | (1u64 << b);
            if used & m != 0 {
                return false;
            }
            used |= m;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(g: &DeviceGraph) -> [usize; 4] {
        Pattern::ALL.map(|p| g.edges_of(p).len())
    }

    #[test]
    fn two_by_two() {
        let g = build_grid(2, 2).unwrap();
        assert_eq!(g.edges.len(), 4);
        assert_eq!(counts(&g), [2, 0, 2, 0]);
    }

    #[test]
    fn one_by_four() {
        let g = build_grid(1, 4).unwrap();
        let p: Vec<Pattern> = g.edges.iter().map(|e| e.pattern).collect();
        assert_eq!(p, [Pattern::C, Pattern::D, Pattern::C]);
    }

    #[test]
    fn four_by_four() {
        let g = build_grid(4, 4).unwrap();
        assert_eq!(g.edges.len(), 24);
        // Rows 0 and 2 start A edges, row 1 starts B edges; same for columns.
        assert_eq!(counts(&g), [8, 4, 8, 4]);
        assert!(Pattern::ALL.iter().all(|&p| g.is_matching(p)));
    }

    #[test]
    fn pattern_parsing() {
        assert_eq!(parse_patterns("ABCD").unwrap(), Pattern::ALL.to_vec());
        assert_eq!(parse_patterns("a, c").unwrap(), vec![Pattern::A, Pattern::C]);
        assert!(parse_patterns("AE").is_err());
        assert!(build_grid(0, 3).is_err());
    }
}
