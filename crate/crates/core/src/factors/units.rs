//! What a copy of `F` is charged with. A unit is a colour (one per copy,
//! or one per edge) or a whole pattern; the pipelines only ask which units
//! can serve a copy.

use crate::collection::GraphCollection;
use crate::graph::{Graph, VertexSet};
use crate::oracle::PairColours;

use super::spec::{FCopy, FactorSpec};

#[derive(Clone, Copy)]
pub(crate) enum Kind<'a> {
    /// One colour holds the whole copy.
    Mono,
    /// Each edge of the copy takes its own colour.
    Rainbow,
    /// Unit `u` colours edge `k` with `patterns[u][k]`.
    Patterns(&'a [Vec<usize>]),
}

pub(crate) struct Units<'a> {
    pub coll: &'a GraphCollection,
    pub f: &'a Graph,
    pub f_edges: Vec<(usize, usize)>,
    pub kind: Kind<'a>,
    pairs: PairColours,
}

/// A copy together with the unit serving each of its slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Placed {
    pub vertices: Vec<usize>,
    pub units: Vec<usize>,
}

impl<'a> Units<'a> {
    pub fn new(coll: &'a GraphCollection, spec: &'a FactorSpec, kind: Kind<'a>) -> Self {
        Units { coll, f: &spec.f, f_edges: spec.f.edges(), kind, pairs: PairColours::new(coll) }
    }

    /// Colour units for `spec.t`.
    pub fn colours(coll: &'a GraphCollection, spec: &'a FactorSpec) -> Self {
        let kind = if spec.t == 1 { Kind::Mono } else { Kind::Rainbow };
        Self::new(coll, spec, kind)
    }

    pub fn count(&self) -> usize {
        match self.kind {
            Kind::Patterns(p) => p.len(),
            _ => self.coll.m(),
        }
    }

    pub fn all(&self) -> VertexSet {
        VertexSet::full(self.count())
    }

    /// Slots per copy.
    pub fn slots(&self) -> usize {
        match self.kind {
            Kind::Rainbow => self.f_edges.len(),
            _ => 1,
        }
    }

    pub fn r(&self) -> usize {
        self.f.order()
    }

    /// Colours of unit `u`.
    pub fn span(&self, u: usize) -> Vec<usize> {
        match self.kind {
            Kind::Patterns(p) => p[u].clone(),
            _ => vec![u],
        }
    }

    /// Units holding the whole copy.
    pub fn fitting(&self, copy: &[usize]) -> VertexSet {
        match self.kind {
            Kind::Patterns(p) => {
                let mut out = VertexSet::new(p.len());
                for (u, pat) in p.iter().enumerate() {
                    if self.f_edges.iter().zip(pat).all(|(&(a, b), &c)| self.coll.has_edge(c, copy[a], copy[b])) {
                        out.insert(u);
                    }
                }
                out
            }
            _ => {
                let mut it = self.f_edges.iter();
                let Some(&(a, b)) = it.next() else {
                    return self.all();
                };
                let mut acc = self.pairs.get(copy[a], copy[b]).clone();
                for &(a, b) in it {
                    acc = intersect(&acc, self.pairs.get(copy[a], copy[b]));
                }
                acc
            }
        }
    }

    /// Units that can serve slot `s` of the copy.
    pub fn slot_fitting(&self, copy: &[usize], s: usize) -> VertexSet {
        match self.kind {
            Kind::Rainbow => {
                let (a, b) = self.f_edges[s];
                self.pairs.get(copy[a], copy[b]).clone()
            }
            _ => self.fitting(copy),
        }
    }

    pub fn pair_colours(&self, u: usize, v: usize) -> &VertexSet {
        self.pairs.get(u, v)
    }

    /// Host pairs usable by some unit of `units`; for colour units, pairs
    /// lying in at least `min_count` of them.
    pub fn host_graph(&self, units: &VertexSet, min_count: usize) -> Graph {
        let n = self.coll.n();
        let mut g = Graph::new(n);
        match self.kind {
            Kind::Patterns(p) => {
                let mut cols = VertexSet::new(self.coll.m());
                for u in units.iter() {
                    for &c in &p[u] {
                        cols.insert(c);
                    }
                }
                for c in cols.iter() {
                    for (x, y) in self.coll.colour(c).edges() {
                        g.add_edge(x, y);
                    }
                }
            }
            _ => {
                let need = min_count.max(1);
                for x in 0..n {
                    for y in x + 1..n {
                        if count_common(self.pairs.get(x, y), units) >= need {
                            g.add_edge(x, y);
                        }
                    }
                }
            }
        }
        g
    }

    pub fn to_fcopy(&self, p: &Placed) -> FCopy {
        let e = self.f_edges.len();
        match self.kind {
            Kind::Mono => FCopy { vertices: p.vertices.clone(), colours: vec![p.units[0]; e], pattern: None },
            Kind::Rainbow => FCopy { vertices: p.vertices.clone(), colours: p.units.clone(), pattern: None },
            Kind::Patterns(pats) => FCopy {
                vertices: p.vertices.clone(),
                colours: pats[p.units[0]].clone(),
                pattern: Some(p.units[0]),
            },
        }
    }
}

pub(crate) fn intersect(a: &VertexSet, b: &VertexSet) -> VertexSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

pub(crate) fn count_common(a: &VertexSet, b: &VertexSet) -> usize {
    a.words().iter().zip(b.words()).map(|(x, y)| (x & y).count_ones() as usize).sum()
}
