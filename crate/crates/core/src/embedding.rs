use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Normalises an edge so the smaller endpoint comes first.
#[inline]
pub fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A placement of a template graph into a collection: where each template
/// vertex goes, and which colour each template edge takes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowEmbedding {
    /// `vertex_map[x]` is the host vertex of template vertex `x`.
    pub vertex_map: Vec<usize>,
    /// Keyed by template edge `(u, v)` with `u < v`.
    pub colour_map: BTreeMap<(usize, usize), usize>,
}

impl RainbowEmbedding {
    pub fn new(vertex_map: Vec<usize>) -> Self {
        Self {
            vertex_map,
            colour_map: BTreeMap::new(),
        }
    }

    pub fn set_colour(&mut self, u: usize, v: usize, colour: usize) {
        self.colour_map.insert(edge_key(u, v), colour);
    }

    pub fn colour(&self, u: usize, v: usize) -> Option<usize> {
        self.colour_map.get(&edge_key(u, v)).copied()
    }

    /// Host edge of template edge `uv`.
    pub fn image(&self, u: usize, v: usize) -> (usize, usize) {
        edge_key(self.vertex_map[u], self.vertex_map[v])
    }

    /// Colours in use, sorted.
    pub fn colours_used(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.colour_map.values().copied().collect();
        c.sort_unstable();
        c
    }
}
