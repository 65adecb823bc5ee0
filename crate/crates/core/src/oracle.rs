//! Exact checks and exhaustive searches used as ground truth.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::collection::GraphCollection;
use crate::embedding::{edge_key, RainbowEmbedding};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::max_matching;

/// Which colouring rule a transversal must satisfy. In the factor modes the
/// template is a disjoint union of copies, copy `q` on vertices
/// `q·r .. (q+1)·r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TransversalMode {
    /// Every edge its own colour.
    Rainbow,
    /// Each copy carries exactly `t` colours; copies share none.
    Factor { r: usize, t: usize },
    /// Copy `q`'s `k`-th edge (lexicographic within the copy) has colour
    /// `patterns[q][k]`.
    Patterned { r: usize, patterns: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransversalViolation {
    #[error("vertex map has {have} entries, template has {need} vertices")]
    MapLength { have: usize, need: usize },
    #[error("template vertex {vertex} maps to {host}, outside the {n} host vertices")]
    VertexOutOfRange { vertex: usize, host: usize, n: usize },
    #[error("template vertices {a} and {b} both map to {host}")]
    NotInjective { a: usize, b: usize, host: usize },
    #[error("template of order {order} does not split into copies of size {r}")]
    BadBlocks { order: usize, r: usize },
    #[error("template edge {u}-{v} crosses copies")]
    CrossingEdge { u: usize, v: usize },
    #[error("template edge {u}-{v} has no colour")]
    MissingColour { u: usize, v: usize },
    #[error("colour given to {u}-{v}, which is not a template edge")]
    ExtraEdge { u: usize, v: usize },
    #[error("template edge {u}-{v} has colour {colour}, but only {m} colours exist")]
    ColourOutOfRange { u: usize, v: usize, colour: usize, m: usize },
    #[error("template edge {u}-{v} maps to {x}-{y}, which is not in colour {colour}")]
    NotInColour { u: usize, v: usize, x: usize, y: usize, colour: usize },
    #[error("colour {colour} used on both {first:?} and {second:?}")]
    ColourReused { colour: usize, first: (usize, usize), second: (usize, usize) },
    #[error("copy {copy} carries {have} colours, needs exactly {need}")]
    CopyColourCount { copy: usize, have: usize, need: usize },
    #[error("colour {colour} appears on copies {a} and {b}")]
    SharedColour { colour: usize, a: usize, b: usize },
    #[error("copies cover {covered} of {n} vertices")]
    NotSpanning { covered: usize, n: usize },
    #[error("{have} patterns for {need} copies")]
    PatternCount { have: usize, need: usize },
    #[error("copy {copy} edge {u}-{v} has colour {have}, the pattern says {need}")]
    PatternMismatch { copy: usize, u: usize, v: usize, have: usize, need: usize },
}

/// Disjoint union of `copies` copies of `f`, copy `q` on `q·r .. (q+1)·r`.
pub fn factor_template(f: &Graph, copies: usize) -> Graph {
    let r = f.order();
    let mut g = Graph::new(r * copies);
    for q in 0..copies {
        for (a, b) in f.edges() {
            g.add_edge(q * r + a, q * r + b);
        }
    }
    g
}

/// Edges of each copy, lexicographic within the copy.
fn copy_edges(template: &Graph, r: usize) -> std::result::Result<Vec<Vec<(usize, usize)>>, TransversalViolation> {
    if r == 0 || !template.order().is_multiple_of(r) {
        return Err(TransversalViolation::BadBlocks { order: template.order(), r });
    }
    let mut out = vec![Vec::new(); template.order() / r];
    for (u, v) in template.edges() {
        if u / r != v / r {
            return Err(TransversalViolation::CrossingEdge { u, v });
        }
        out[u / r].push((u, v));
    }
    Ok(out)
}

/// Checks `emb` as a transversal copy of `template`; the first violation
/// found is returned.
pub fn verify_transversal(
    coll: &GraphCollection,
    emb: &RainbowEmbedding,
    template: &Graph,
    mode: &TransversalMode,
) -> std::result::Result<(), TransversalViolation> {
    use TransversalViolation as V;
    let n = coll.n();
    if emb.vertex_map.len() != template.order() {
        return Err(V::MapLength { have: emb.vertex_map.len(), need: template.order() });
    }
    let mut owner = vec![usize::MAX; n];
    for (x, &h) in emb.vertex_map.iter().enumerate() {
        if h >= n {
            return Err(V::VertexOutOfRange { vertex: x, host: h, n });
        }
        if owner[h] != usize::MAX {
            return Err(V::NotInjective { a: owner[h], b: x, host: h });
        }
        owner[h] = x;
    }
    for &(u, v) in emb.colour_map.keys() {
        if u >= template.order() || v >= template.order() || !template.has_edge(u, v) {
            return Err(V::ExtraEdge { u, v });
        }
    }
    for (u, v) in template.edges() {
        let c = emb.colour(u, v).ok_or(V::MissingColour { u, v })?;
        if c >= coll.m() {
            return Err(V::ColourOutOfRange { u, v, colour: c, m: coll.m() });
        }
        let (x, y) = emb.image(u, v);
        if !coll.has_edge(c, x, y) {
            return Err(V::NotInColour { u, v, x, y, colour: c });
        }
    }
    match mode {
        TransversalMode::Rainbow => {
            let mut first = vec![None; coll.m()];
            for (u, v) in template.edges() {
                let c = emb.colour(u, v).expect("checked above");
                if let Some(e) = first[c] {
                    return Err(V::ColourReused { colour: c, first: e, second: (u, v) });
                }
                first[c] = Some((u, v));
            }
        }
        TransversalMode::Factor { r, t } => {
            let copies = copy_edges(template, *r)?;
            let mut holder = vec![usize::MAX; coll.m()];
            for (q, edges) in copies.iter().enumerate() {
                let mut cs: Vec<usize> = edges.iter().map(|&(u, v)| emb.colour(u, v).expect("checked")).collect();
                cs.sort_unstable();
                cs.dedup();
                if cs.len() != *t {
                    return Err(V::CopyColourCount { copy: q, have: cs.len(), need: *t });
                }
                for c in cs {
                    if holder[c] != usize::MAX {
                        return Err(V::SharedColour { colour: c, a: holder[c], b: q });
                    }
                    holder[c] = q;
                }
            }
        }
        TransversalMode::Patterned { r, patterns } => {
            let copies = copy_edges(template, *r)?;
            if patterns.len() != copies.len() {
                return Err(V::PatternCount { have: patterns.len(), need: copies.len() });
            }
            for (q, edges) in copies.iter().enumerate() {
                for (k, &(u, v)) in edges.iter().enumerate() {
                    let have = emb.colour(u, v).expect("checked");
                    let need = patterns[q].get(k).copied().unwrap_or(usize::MAX);
                    if have != need {
                        return Err(V::PatternMismatch { copy: q, u, v, have, need });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Outcome of an exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes(RainbowEmbedding),
    No,
    BudgetExhausted,
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes(_))
    }
}

/// Colour sets of every host pair.
pub(crate) struct PairColours {
    n: usize,
    sets: Vec<VertexSet>,
}

impl PairColours {
    pub(crate) fn new(coll: &GraphCollection) -> Self {
        let n = coll.n();
        let mut sets = vec![VertexSet::new(coll.m()); n * n];
        for (c, g) in coll.colours().iter().enumerate() {
            for (u, v) in g.edges() {
                sets[u * n + v].insert(c);
                sets[v * n + u].insert(c);
            }
        }
        PairColours { n, sets }
    }

    pub(crate) fn get(&self, u: usize, v: usize) -> &VertexSet {
        &self.sets[u * self.n + v]
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rule {
    /// Distinct colour per edge.
    PerEdge,
    /// One colour per copy, distinct across copies.
    PerCopy,
    /// Colour fixed per edge.
    Fixed,
}

/// Exhaustive search for a transversal copy of `template`: vertices are
/// placed one at a time and, after each placement, a maximum matching from
/// the placed edges (or copies) to colours must saturate them.
pub fn exists_transversal_exact(
    coll: &GraphCollection,
    template: &Graph,
    mode: &TransversalMode,
    budget: u64,
) -> Result<Decision> {
    let n = coll.n();
    let k = template.order();
    if k > n {
        return Ok(Decision::No);
    }
    let (rule, r) = match mode {
        TransversalMode::Rainbow => (Rule::PerEdge, k.max(1)),
        TransversalMode::Factor { r, t } => {
            let blocks = copy_edges(template, *r).map_err(|e| Error::Precondition(e.to_string()))?;
            let e = blocks.first().map_or(0, Vec::len);
            if blocks.iter().any(|b| b.len() != e) {
                return Err(Error::Precondition("factor copies differ".into()));
            }
            if *t == e {
                (Rule::PerEdge, *r)
            } else if *t == 1 {
                (Rule::PerCopy, *r)
            } else {
                return Err(Error::Precondition(format!("t = {t} is neither 1 nor e(F) = {e}")));
            }
        }
        TransversalMode::Patterned { r, patterns } => {
            let blocks = copy_edges(template, *r).map_err(|e| Error::Precondition(e.to_string()))?;
            if patterns.len() != blocks.len()
                || blocks.iter().zip(patterns).any(|(b, p)| b.len() != p.len() || p.iter().any(|&c| c >= coll.m()))
            {
                return Err(Error::Precondition("patterns do not fit the template".into()));
            }
            (Rule::Fixed, *r)
        }
    };
    let units_needed = match rule {
        Rule::PerEdge => template.edge_count(),
        Rule::PerCopy => k / r,
        Rule::Fixed => 0,
    };
    if units_needed > coll.m() {
        return Ok(Decision::No);
    }
    let factor_mode = !matches!(mode, TransversalMode::Rainbow);
    let symmetric = matches!(mode, TransversalMode::Factor { .. }) && k == n;

    // Placement order: copy by copy, each connected-first.
    let mut order = Vec::with_capacity(k);
    let mut placed = vec![false; k];
    let blocks: Vec<std::ops::Range<usize>> = if factor_mode {
        (0..k / r).map(|q| q * r..(q + 1) * r).collect()
    } else {
        std::iter::once(0..k).collect()
    };
    for b in &blocks {
        while let Some(x) = b
            .clone()
            .filter(|&x| !placed[x])
            .max_by_key(|&x| {
                let back = template.neighbors(x).filter(|&y| placed[y]).count();
                (back, template.degree(x), std::cmp::Reverse(x))
            })
        {
            placed[x] = true;
            order.push(x);
        }
    }
    let pos: Vec<usize> = {
        let mut p = vec![0; k];
        for (i, &x) in order.iter().enumerate() {
            p[x] = i;
        }
        p
    };
    let back: Vec<Vec<usize>> = order
        .iter()
        .map(|&x| template.neighbors(x).filter(|&y| pos[y] < pos[x]).collect())
        .collect();
    let fixed_colour = |u: usize, v: usize| -> usize {
        let TransversalMode::Patterned { r, patterns } = mode else { unreachable!() };
        let q = u / r;
        let mut idx = 0;
        for (a, b) in template.edges() {
            if a / r == q {
                if (a, b) == edge_key(u, v) {
                    return patterns[q][idx];
                }
                idx += 1;
            }
        }
        unreachable!("edge inside its copy")
    };

    let pairs = PairColours::new(coll);
    let union = {
        let mut g = Graph::new(n);
        for c in coll.colours() {
            for (u, v) in c.edges() {
                g.add_edge(u, v);
            }
        }
        g
    };

    struct State {
        image: Vec<usize>,
        used: VertexSet,
        nodes: u64,
    }
    let mut st = State {
        image: vec![usize::MAX; k],
        used: VertexSet::new(n),
        nodes: 0,
    };

    // Hall check over placed units; returns the matching when it saturates.
    let hall = |st: &State| -> Option<Vec<Option<usize>>> {
        match rule {
            Rule::Fixed => Some(Vec::new()),
            Rule::PerEdge => {
                let mut adj = Vec::new();
                for (i, &x) in order.iter().enumerate() {
                    if st.image[x] == usize::MAX {
                        break;
                    }
                    for &y in &back[i] {
                        adj.push(pairs.get(st.image[x], st.image[y]).to_vec());
                    }
                }
                let m = max_matching(&adj, coll.m());
                m.iter().all(Option::is_some).then_some(m)
            }
            Rule::PerCopy => {
                let mut adj = Vec::new();
                for b in &blocks {
                    let mut set: Option<VertexSet> = None;
                    for x in b.clone() {
                        if st.image[x] == usize::MAX {
                            continue;
                        }
                        for y in template.neighbors(x).filter(|&y| y < x && st.image[y] != usize::MAX) {
                            let s = pairs.get(st.image[x], st.image[y]);
                            match &mut set {
                                None => set = Some(s.clone()),
                                Some(acc) => {
                                    let mut out = VertexSet::new(coll.m());
                                    for c in acc.iter().filter(|&c| s.contains(c)) {
                                        out.insert(c);
                                    }
                                    *acc = out;
                                }
                            }
                        }
                    }
                    // A copy without placed edges still needs a colour.
                    let any = b.clone().any(|x| st.image[x] != usize::MAX);
                    match set {
                        Some(s) => adj.push(s.to_vec()),
                        None if any => adj.push((0..coll.m()).collect()),
                        None => {}
                    }
                }
                let m = max_matching(&adj, coll.m());
                m.iter().all(Option::is_some).then_some(m)
            }
        }
    };

    fn go(
        depth: usize,
        st: &mut State,
        ctx: &dyn Fn(usize, &State) -> Vec<usize>,
        ok: &dyn Fn(usize, &State) -> bool,
        budget: u64,
        order: &[usize],
    ) -> ControlFlow<bool> {
        if depth == order.len() {
            return ControlFlow::Break(true);
        }
        let x = order[depth];
        for h in ctx(depth, st) {
            st.nodes += 1;
            if st.nodes > budget {
                return ControlFlow::Break(false);
            }
            st.image[x] = h;
            st.used.insert(h);
            if ok(depth, st) {
                go(depth + 1, st, ctx, ok, budget, order)?;
            }
            st.used.remove(h);
            st.image[x] = usize::MAX;
        }
        ControlFlow::Continue(())
    }

    let candidates = |depth: usize, st: &State| -> Vec<usize> {
        let x = order[depth];
        let mut set = VertexSet::full(n);
        set.difference_with(&st.used);
        for &y in &back[depth] {
            let hy = st.image[y];
            let row = match rule {
                Rule::Fixed => coll.colour(fixed_colour(x, y)).neighbors_in(hy, &set),
                _ => union.neighbors_in(hy, &set),
            };
            set = row;
        }
        set.iter().collect()
    };
    let block_of = |x: usize| if factor_mode { x / r } else { 0 };
    let ok = |depth: usize, st: &State| -> bool {
        let x = order[depth];
        if symmetric {
            let b = block_of(x);
            let range = &blocks[b];
            let last = range.clone().all(|y| st.image[y] != usize::MAX);
            if last {
                // The copy holding the lowest vertex no earlier copy took comes first.
                let mut before = st.used.clone();
                for y in range.clone() {
                    before.remove(st.image[y]);
                }
                let w = (0..n).find(|&v| !before.contains(v)).expect("a free vertex");
                if !range.clone().any(|y| st.image[y] == w) {
                    return false;
                }
            }
        }
        back[depth].is_empty() || hall(st).is_some()
    };
    let found = go(0, &mut st, &candidates, &ok, budget, &order);
    match found {
        ControlFlow::Break(false) => Ok(Decision::BudgetExhausted),
        ControlFlow::Continue(()) => Ok(Decision::No),
        ControlFlow::Break(true) => {
            let mut emb = RainbowEmbedding::new(st.image.clone());
            match rule {
                Rule::Fixed => {
                    for (u, v) in template.edges() {
                        emb.set_colour(u, v, fixed_colour(u, v));
                    }
                }
                Rule::PerEdge => {
                    let m = hall(&st).ok_or_else(|| Error::Internal("final matching lost".into()))?;
                    let mut i = 0;
                    for (d, &x) in order.iter().enumerate() {
                        for &y in &back[d] {
                            emb.set_colour(x, y, m[i].expect("saturated"));
                            i += 1;
                        }
                    }
                }
                Rule::PerCopy => {
                    let m = hall(&st).ok_or_else(|| Error::Internal("final matching lost".into()))?;
                    for (q, b) in blocks.iter().enumerate() {
                        for x in b.clone() {
                            for y in template.neighbors(x).filter(|&y| y < x) {
                                emb.set_colour(x, y, m[q].expect("saturated"));
                            }
                        }
                    }
                }
            }
            verify_transversal(coll, &emb, template, mode)
                .map_err(|v| Error::Internal(format!("oracle witness fails verification: {v}")))?;
            Ok(Decision::Yes(emb))
        }
    }
}

/// Calls `visit` on every injective homomorphism of `pattern` into `g`
/// that extends `pins` and stays inside `hosts`; `visit` returns `false` to
/// stop. Returns `Ok(true)` if stopped early.
pub fn for_each_copy(
    g: &Graph,
    pattern: &Graph,
    pins: &[(usize, usize)],
    hosts: Option<&VertexSet>,
    budget: u64,
    visit: impl FnMut(&[usize]) -> bool,
) -> Result<bool> {
    let n = g.order();
    let k = pattern.order();
    let hosts = hosts.cloned().unwrap_or_else(|| VertexSet::full(n));
    let mut domains = vec![hosts.clone(); k];
    let mut pinned = VertexSet::new(n);
    let mut seen = vec![false; k];
    for &(x, h) in pins {
        if x >= k || h >= n || !hosts.contains(h) || seen[x] || !pinned.insert(h) {
            return Err(Error::Precondition(format!("bad pin {x} -> {h}")));
        }
        seen[x] = true;
        domains[x] = VertexSet::from_iter_with_capacity(n, [h]);
    }
    for_each_copy_in(g, pattern, &domains, budget, visit)
}

/// [`for_each_copy`] with a separate domain of host vertices for every
/// pattern vertex.
pub fn for_each_copy_in(
    g: &Graph,
    pattern: &Graph,
    domains: &[VertexSet],
    budget: u64,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<bool> {
    let n = g.order();
    let k = pattern.order();
    if domains.len() != k {
        return Err(Error::Precondition(format!("{} domains for {k} pattern vertices", domains.len())));
    }
    // Singleton domains first, then most already-ordered neighbours, then degree.
    let mut order = Vec::new();
    let mut placed = vec![false; k];
    while let Some(x) = (0..k).filter(|&x| !placed[x]).max_by_key(|&x| {
        let back = pattern.neighbors(x).filter(|&y| placed[y]).count();
        (domains[x].len() == 1, back, pattern.degree(x), std::cmp::Reverse(x))
    }) {
        placed[x] = true;
        order.push(x);
    }

    struct Search<'a> {
        g: &'a Graph,
        pattern: &'a Graph,
        domains: &'a [VertexSet],
        order: Vec<usize>,
        image: Vec<usize>,
        used: VertexSet,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn go(&mut self, d: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> ControlFlow<Option<()>> {
            if d == self.order.len() {
                return if visit(&self.image) { ControlFlow::Continue(()) } else { ControlFlow::Break(Some(())) };
            }
            let x = self.order[d];
            let mut cand = self.domains[x].clone();
            cand.difference_with(&self.used);
            for y in self.pattern.neighbors(x) {
                if self.image[y] != usize::MAX {
                    cand = self.g.neighbors_in(self.image[y], &cand);
                }
            }
            let need = self.pattern.degree(x);
            for h in cand.iter() {
                if self.g.degree(h) < need {
                    continue;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return ControlFlow::Break(None);
                }
                self.image[x] = h;
                self.used.insert(h);
                let r = self.go(d + 1, visit);
                self.used.remove(h);
                self.image[x] = usize::MAX;
                r?;
            }
            ControlFlow::Continue(())
        }
    }
    let mut s = Search {
        g,
        pattern,
        domains,
        order,
        image: vec![usize::MAX; k],
        used: VertexSet::new(n),
        nodes: 0,
        budget,
    };
    match s.go(0, &mut visit) {
        ControlFlow::Continue(()) => Ok(false),
        ControlFlow::Break(Some(())) => Ok(true),
        ControlFlow::Break(None) => Err(Error::BudgetExhausted(budget)),
    }
}

/// One injective homomorphism of `pattern` into `g` extending `pins`.
pub fn find_subgraph(g: &Graph, pattern: &Graph, pins: &[(usize, usize)], budget: u64) -> Result<Vec<usize>> {
    find_subgraph_within(g, pattern, pins, None, budget)
}

pub fn find_subgraph_within(
    g: &Graph,
    pattern: &Graph,
    pins: &[(usize, usize)],
    hosts: Option<&VertexSet>,
    budget: u64,
) -> Result<Vec<usize>> {
    if pattern.order() > g.order() {
        return Err(Error::NotFound("pattern larger than host".into()));
    }
    let mut out = None;
    for_each_copy(g, pattern, pins, hosts, budget, |img| {
        out = Some(img.to_vec());
        false
    })?;
    out.ok_or_else(|| Error::NotFound("no copy of the pattern".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::tests::gnp;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e)
    }

    fn random_collection(n: usize, m: usize, p: f64, rng: &mut ChaCha8Rng) -> GraphCollection {
        GraphCollection::new(n, (0..m).map(|_| gnp(n, p, rng.gen())).collect())
    }

    /// Naive: every injective map, every colour assignment.
    fn brute(coll: &GraphCollection, template: &Graph, mode: &TransversalMode) -> bool {
        let n = coll.n();
        let k = template.order();
        let edges = template.edges();
        let mut map = vec![0usize; k];
        fn maps(i: usize, n: usize, map: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
            if i == map.len() {
                return f(map);
            }
            for h in 0..n {
                if !map[..i].contains(&h) {
                    map[i] = h;
                    if maps(i + 1, n, map, f) {
                        return true;
                    }
                }
            }
            false
        }
        maps(0, n, &mut map, &mut |map: &[usize]| {
            let mut cols = vec![0usize; edges.len()];
            loop {
                let mut emb = RainbowEmbedding::new(map.to_vec());
                for (i, &(u, v)) in edges.iter().enumerate() {
                    emb.set_colour(u, v, cols[i]);
                }
                if verify_transversal(coll, &emb, template, mode).is_ok() {
                    return true;
                }
                let mut i = 0;
                loop {
                    if i == cols.len() {
                        return false;
                    }
                    cols[i] += 1;
                    if cols[i] < coll.m() {
                        break;
                    }
                    cols[i] = 0;
                    i += 1;
                }
            }
        })
    }

    #[test]
    fn empty_and_single_edge() {
        let coll = GraphCollection::identical(&Graph::from_edges(3, &[(0, 1)]), 1);
        let empty = RainbowEmbedding::new(vec![]);
        assert!(verify_transversal(&coll, &empty, &Graph::new(0), &TransversalMode::Rainbow).is_ok());

        let t = Graph::from_edges(2, &[(0, 1)]);
        let mut emb = RainbowEmbedding::new(vec![0, 1]);
        emb.set_colour(0, 1, 0);
        assert!(verify_transversal(&coll, &emb, &t, &TransversalMode::Rainbow).is_ok());

        let two = GraphCollection::new(3, vec![Graph::from_edges(3, &[(0, 1)]), Graph::from_edges(3, &[(1, 2)])]);
        emb.set_colour(0, 1, 1);
        assert_eq!(
            verify_transversal(&two, &emb, &t, &TransversalMode::Rainbow),
            Err(TransversalViolation::NotInColour { u: 0, v: 1, x: 0, y: 1, colour: 1 })
        );
        assert!(exists_transversal_exact(&coll, &t, &TransversalMode::Rainbow, 1000).unwrap().is_yes());
    }

    #[test]
    fn hamilton_cycle_forced() {
        let coll = GraphCollection::identical(&cycle(8), 8);
        let Decision::Yes(emb) = exists_transversal_exact(&coll, &cycle(8), &TransversalMode::Rainbow, 1_000_000).unwrap() else {
            panic!("C8 should be found");
        };
        let mut g = Graph::new(8);
        for (u, v) in cycle(8).edges() {
            let (x, y) = emb.image(u, v);
            g.add_edge(x, y);
        }
        assert_eq!(g, cycle(8));
        assert_eq!(emb.colours_used(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_colours_is_no() {
        let coll = GraphCollection::identical(&Graph::complete(6), 2);
        let t = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(exists_transversal_exact(&coll, &t, &TransversalMode::Rainbow, 1000).unwrap(), Decision::No);
    }

    #[test]
    fn mutations_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut flagged = 0;
        for _ in 0..1000 {
            let coll = random_collection(7, 6, 0.7, &mut rng);
            let t = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]);
            let Decision::Yes(emb) = exists_transversal_exact(&coll, &t, &TransversalMode::Rainbow, 100_000).unwrap() else {
                continue;
            };
            let mut bad = emb.clone();
            match rng.gen_range(0..4) {
                0 => {
                    let x = rng.gen_range(0..5);
                    bad.vertex_map[x] = bad.vertex_map[(x + 1) % 5];
                }
                1 => {
                    let e = *t.edges().choose(&mut rng).unwrap();
                    bad.set_colour(e.0, e.1, rng.gen_range(0..6));
                }
                2 => {
                    let e = *t.edges().choose(&mut rng).unwrap();
                    bad.colour_map.remove(&e);
                }
                _ => {
                    bad.vertex_map[rng.gen_range(0..5)] = rng.gen_range(0..7);
                }
            }
            if bad == emb {
                continue;
            }
            // Independent rule check.
            let mut seen = VertexSet::new(7);
            let injective = bad.vertex_map.iter().all(|&h| seen.insert(h));
            let mut cols = VertexSet::new(6);
            let colours_ok = t.edges().iter().all(|&(u, v)| match bad.colour(u, v) {
                Some(c) => cols.insert(c) && coll.has_edge(c, bad.vertex_map[u], bad.vertex_map[v]),
                None => false,
            });
            let broken = !(injective && colours_ok);
            assert_eq!(verify_transversal(&coll, &bad, &t, &TransversalMode::Rainbow).is_err(), broken);
            flagged += broken as usize;
        }
        assert!(flagged > 100);
    }

    #[test]
    fn exact_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let two_edges = factor_template(&Graph::from_edges(2, &[(0, 1)]), 2);
        let cherries = factor_template(&Graph::from_edges(3, &[(0, 1), (1, 2)]), 2);
        for i in 0..200 {
            let p = rng.gen_range(0.2..0.8);
            let coll = random_collection(6, 3, p, &mut rng);
            let cases = [
                (path.clone(), TransversalMode::Rainbow),
                (two_edges.clone(), TransversalMode::Factor { r: 2, t: 1 }),
                (cherries.clone(), TransversalMode::Factor { r: 3, t: 1 }),
            ];
            for (template, mode) in cases {
                let d = exists_transversal_exact(&coll, &template, &mode, 10_000_000).unwrap();
                assert_eq!(d.is_yes(), brute(&coll, &template, &mode), "instance {i}, {mode:?}");
            }
            let coll4 = random_collection(6, 4, p, &mut rng);
            let mode = TransversalMode::Factor { r: 3, t: 2 };
            let d = exists_transversal_exact(&coll4, &cherries, &mode, 10_000_000).unwrap();
            assert_eq!(d.is_yes(), brute(&coll4, &cherries, &mode), "instance {i} rainbow cherries");
            let mode = TransversalMode::Patterned { r: 3, patterns: vec![vec![0, 1], vec![2, 3]] };
            let d = exists_transversal_exact(&coll4, &cherries, &mode, 10_000_000).unwrap();
            assert_eq!(d.is_yes(), brute(&coll4, &cherries, &mode), "instance {i} patterned");
        }
    }

    #[test]
    fn subgraph_basics() {
        let g = Graph::complete(4);
        let one = Graph::new(1);
        assert_eq!(find_subgraph(&g, &one, &[], 10).unwrap().len(), 1);
        let c4 = cycle(4);
        let k22 = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]);
        let img = find_subgraph(&c4, &k22, &[], 1000).unwrap();
        for (a, b) in k22.edges() {
            assert!(c4.has_edge(img[a], img[b]));
        }
        let img = find_subgraph(&c4, &k22, &[(0, 2)], 1000).unwrap();
        assert_eq!(img[0], 2);
        assert!(find_subgraph(&c4, &Graph::complete(3), &[], 1000).is_err());
    }

    #[test]
    fn subgraph_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..100 {
            let g = gnp(14, 0.5, rng.gen());
            let pat = gnp(5, 0.5, rng.gen());
            let found = find_subgraph(&g, &pat, &[], u64::MAX).is_ok();
            let mut naive = false;
            'outer: for a in 0..14 {
                for b in 0..14 {
                    for c in 0..14 {
                        for d in 0..14 {
                            for e in 0..14 {
                                let m = [a, b, c, d, e];
                                let distinct = (0..5).all(|i| (0..i).all(|j| m[i] != m[j]));
                                if distinct && pat.edges().iter().all(|&(x, y)| g.has_edge(m[x], m[y])) {
                                    naive = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
            assert_eq!(found, naive, "instance {i}");
        }
    }

    #[test]
    fn pins_are_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let g = gnp(12, 0.6, rng.gen());
            let pat = Graph::from_edges(3, &[(0, 1), (1, 2)]);
            let pin = (1, rng.gen_range(0..12));
            if let Ok(img) = find_subgraph(&g, &pat, &[pin], 10_000) {
                assert_eq!(img[1], pin.1);
            } else {
                assert!(g.degree(pin.1) < 2);
            }
        }
    }
}
