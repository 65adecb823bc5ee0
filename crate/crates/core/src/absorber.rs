//! Colour absorption by switching chains.
//!
//! A template fixes one colour `b_i` per slot, and the switching graph `K`
//! joins slots `i`, `j` when each could take the other's colour. Inside a
//! highly connected core of `K`, any `ℓ` reservoir colours can be swapped in
//! for the `ℓ` sink colours by shifting colours along disjoint paths.

use rand::Rng;

use crate::collection::GraphCollection;
use crate::config::PipelineConfig;
use crate::connectivity::{disjoint_paths, is_k_connected, k_connected_pieces};
use crate::embedding::RainbowEmbedding;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::perfect_left;

/// Bipartite adjacency between slots and colours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotColourGraph {
    n_colours: usize,
    adj: Vec<VertexSet>,
}

impl SlotColourGraph {
    pub fn new(n_colours: usize, slots: &[Vec<usize>]) -> Self {
        let adj = slots
            .iter()
            .map(|cs| VertexSet::from_iter_with_capacity(n_colours, cs.iter().copied()))
            .collect();
        Self { n_colours, adj }
    }

    pub fn complete(slots: usize, n_colours: usize) -> Self {
        Self {
            n_colours,
            adj: vec![VertexSet::full(n_colours); slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.adj.len()
    }

    pub fn n_colours(&self) -> usize {
        self.n_colours
    }

    #[inline]
    pub fn adjacent(&self, slot: usize, colour: usize) -> bool {
        self.adj[slot].contains(colour)
    }

    pub fn colours_of(&self, slot: usize) -> &VertexSet {
        &self.adj[slot]
    }
}

#[derive(Clone, Debug)]
pub struct AbsorberTemplate {
    pub colour_adjacency: SlotColourGraph,
    /// `b_i` for each slot `i`.
    pub base_match: Vec<usize>,
    /// Switching graph `K` on slots.
    pub aux_graph: Graph,
    /// `U₁`, sorted.
    pub core: Vec<usize>,
    /// `U₀ ⊂ U₁`, sorted.
    pub sinks: Vec<usize>,
    /// `B₀ = {b_i : i ∉ U₀}`, sorted.
    pub fixed_colours: Vec<usize>,
    /// `B₁`, sorted.
    pub reservoir: Vec<usize>,
    pub ell: usize,
}

/// Builds a template for absorbing any `ℓ` colours of the reservoir.
///
/// Desk-scale policy: the core must be `max(ℓ, 2)`-connected with at least
/// `max(2ℓ, 3)` slots, and the reservoir must hold at least `ℓ` colours.
pub fn build_absorber<R: Rng>(
    adjacency: &SlotColourGraph,
    ell: usize,
    retries: usize,
    rng: &mut R,
) -> Result<AbsorberTemplate> {
    let m = adjacency.slots();
    if ell > m {
        return Err(Error::Precondition(format!("ell = {ell} exceeds {m} slots")));
    }
    let need_conn = ell.max(2);
    let need_core = (2 * ell).max(3);
    let mut best = (0usize, 0usize, 0usize);

    for _ in 0..retries.max(1) {
        let Some(base) = random_base(adjacency, rng) else {
            continue;
        };
        let k = aux_graph(adjacency, &base);
        if ell == 0 {
            let t = finish(adjacency, base, k, Vec::new(), Vec::new(), 0);
            return Ok(t);
        }
        let Some(core) = k_connected_pieces(&k, need_conn).into_iter().next() else {
            continue;
        };
        if core.len() < need_core {
            best = best.max((core.len(), need_conn, 0));
            continue;
        }
        // Sinks: the ℓ least connected core slots, ties to the lower index.
        let core_set = VertexSet::from_iter_with_capacity(m, core.iter().copied());
        let mut by_degree = core.clone();
        by_degree.sort_by_key(|&i| (k.degree_in(i, &core_set), i));
        let mut sinks = by_degree[..ell].to_vec();
        sinks.sort_unstable();
        let t = finish(adjacency, base, k, core, sinks, ell);
        if t.reservoir.len() >= ell {
            t.check()?;
            return Ok(t);
        }
        best = best.max((t.core.len(), need_conn, t.reservoir.len()));
    }
    Err(Error::AbsorberRetriesExhausted {
        attempts: retries.max(1),
        core_size: best.0,
        core_connectivity: best.1,
        reservoir: best.2,
    })
}

/// Sequential uniform choice of distinct `b_i ∈ N(a_i)`.
fn random_base<R: Rng>(adj: &SlotColourGraph, rng: &mut R) -> Option<Vec<usize>> {
    let mut used = VertexSet::new(adj.n_colours());
    let mut base = Vec::with_capacity(adj.slots());
    for i in 0..adj.slots() {
        let free: Vec<usize> = adj.colours_of(i).iter().filter(|&c| !used.contains(c)).collect();
        if free.is_empty() {
            return None;
        }
        let b = free[rng.gen_range(0..free.len())];
        used.insert(b);
        base.push(b);
    }
    Some(base)
}

fn aux_graph(adj: &SlotColourGraph, base: &[usize]) -> Graph {
    let m = adj.slots();
    let mut k = Graph::new(m);
    for i in 0..m {
        for j in i + 1..m {
            if adj.adjacent(j, base[i]) && adj.adjacent(i, base[j]) {
                k.add_edge(i, j);
            }
        }
    }
    k
}

fn finish(
    adj: &SlotColourGraph,
    base: Vec<usize>,
    k: Graph,
    core: Vec<usize>,
    sinks: Vec<usize>,
    ell: usize,
) -> AbsorberTemplate {
    let m = adj.slots();
    let sink_set = VertexSet::from_iter_with_capacity(m, sinks.iter().copied());
    let mut fixed: Vec<usize> = (0..m).filter(|&i| !sink_set.contains(i)).map(|i| base[i]).collect();
    fixed.sort_unstable();
    let based = VertexSet::from_iter_with_capacity(adj.n_colours(), base.iter().copied());
    let entries: Vec<usize> = core.iter().copied().filter(|&i| !sink_set.contains(i)).collect();
    let reservoir = (0..adj.n_colours())
        .filter(|&c| !based.contains(c))
        .filter(|&c| entries.iter().filter(|&&i| adj.adjacent(i, c)).count() >= ell)
        .collect();
    AbsorberTemplate {
        colour_adjacency: adj.clone(),
        base_match: base,
        aux_graph: k,
        core,
        sinks,
        fixed_colours: fixed,
        reservoir,
        ell,
    }
}

impl AbsorberTemplate {
    pub fn slots(&self) -> usize {
        self.base_match.len()
    }

    /// Checks every structural invariant of the template.
    pub fn check(&self) -> Result<()> {
        let m = self.slots();
        let adj = &self.colour_adjacency;
        let mut seen = VertexSet::new(adj.n_colours());
        for (i, &b) in self.base_match.iter().enumerate() {
            if !adj.adjacent(i, b) || !seen.insert(b) {
                return Err(Error::Internal(format!("base colour {b} of slot {i} invalid")));
            }
        }
        if self.sinks.len() != self.ell || self.fixed_colours.len() != m - self.ell {
            return Err(Error::Internal("sink / fixed sizes disagree with ell".into()));
        }
        if self.sinks.iter().any(|s| self.core.binary_search(s).is_err()) {
            return Err(Error::Internal("sink outside core".into()));
        }
        let entries: Vec<usize> =
            self.core.iter().copied().filter(|i| self.sinks.binary_search(i).is_err()).collect();
        for &c in &self.reservoir {
            if seen.contains(c) {
                return Err(Error::Internal(format!("reservoir colour {c} is a base colour")));
            }
            if entries.iter().filter(|&&i| adj.adjacent(i, c)).count() < self.ell {
                return Err(Error::Internal(format!("reservoir colour {c} has too few entries")));
            }
        }
        if self.ell > 0 && !is_k_connected(&self.aux_graph, &self.core, self.ell) {
            return Err(Error::Internal(format!("core is not {}-connected", self.ell)));
        }
        Ok(())
    }

    /// A perfect matching of slots onto `B₀ ∪ U`, as `colour[slot]`.
    pub fn absorb(&self, u: &[usize]) -> Result<Vec<usize>> {
        let ell = self.ell;
        let mut uu = u.to_vec();
        uu.sort_unstable();
        uu.dedup();
        if uu.len() != ell || u.len() != ell {
            return Err(Error::Precondition(format!("need {ell} distinct colours, got {u:?}")));
        }
        if let Some(c) = u.iter().find(|c| self.reservoir.binary_search(c).is_err()) {
            return Err(Error::Precondition(format!("colour {c} is not in the reservoir")));
        }
        let mut phi = self.base_match.clone();
        if ell == 0 {
            return Ok(phi);
        }
        let adj = &self.colour_adjacency;

        // Distinct entry slots d_j ∈ U₁ \ U₀ with u_j adjacent to d_j.
        let entries: Vec<usize> =
            self.core.iter().copied().filter(|i| self.sinks.binary_search(i).is_err()).collect();
        let options: Vec<Vec<usize>> = u
            .iter()
            .map(|&c| (0..entries.len()).filter(|&x| adj.adjacent(entries[x], c)).collect())
            .collect();
        let pick = perfect_left(&options, entries.len())
            .ok_or_else(|| Error::Internal("no distinct entry slots for U".into()))?;
        let d: Vec<usize> = pick.iter().map(|&x| entries[x]).collect();

        // Route inside K' = K[U₁], in local indices.
        let local = |slot: usize| self.core.binary_search(&slot).expect("core slot");
        let kc = self.aux_graph.induced(&self.core);
        let a: Vec<usize> = d.iter().map(|&s| local(s)).collect();
        let b: Vec<usize> = self.sinks.iter().map(|&s| local(s)).collect();
        let paths = disjoint_paths(&kc, &a, &b, ell)?;

        for (j, path) in paths.iter().enumerate() {
            let slots: Vec<usize> = path.iter().map(|&x| self.core[x]).collect();
            // Shift along the path: each later slot takes its predecessor's
            // base colour, the start slot takes u_j.
            for w in slots.windows(2).rev() {
                phi[w[1]] = self.base_match[w[0]];
            }
            phi[slots[0]] = u[j];
            if cfg!(debug_assertions) {
                self.check_partial(&phi)?;
            }
        }
        self.check_matching(&phi, u)?;
        Ok(phi)
    }

    fn check_partial(&self, phi: &[usize]) -> Result<()> {
        let mut seen = VertexSet::new(self.colour_adjacency.n_colours());
        for (i, &c) in phi.iter().enumerate() {
            if !self.colour_adjacency.adjacent(i, c) || !seen.insert(c) {
                return Err(Error::Internal(format!("switch broke slot {i} (colour {c})")));
            }
        }
        Ok(())
    }

    /// Whether `phi` is injective, adjacency-respecting and uses exactly `B₀ ∪ U`.
    pub fn check_matching(&self, phi: &[usize], u: &[usize]) -> Result<()> {
        self.check_partial(phi)?;
        let mut used = phi.to_vec();
        used.sort_unstable();
        let mut want: Vec<usize> = self.fixed_colours.iter().chain(u).copied().collect();
        want.sort_unstable();
        if used != want {
            return Err(Error::Internal("absorbed matching does not use exactly B0 and U".into()));
        }
        Ok(())
    }
}

/// A pre-embedded subgraph with fixed colours `A` and reservoir `C`: for any
/// `ℓ`-subset `B ⊆ C`, the copy can be rainbow-coloured with `A ∪ B`.
#[derive(Clone, Debug)]
pub struct ColourAbsorber {
    pub vertex_map: Vec<usize>,
    /// Template edges, in slot order.
    pub edges: Vec<(usize, usize)>,
    /// Global colour of each template colour position.
    pub colour_ids: Vec<usize>,
    pub template: AbsorberTemplate,
}

impl ColourAbsorber {
    /// `A`, as global colours.
    pub fn fixed(&self) -> Vec<usize> {
        self.template.fixed_colours.iter().map(|&c| self.colour_ids[c]).collect()
    }

    /// `C`, as global colours.
    pub fn reservoir(&self) -> Vec<usize> {
        self.template.reservoir.iter().map(|&c| self.colour_ids[c]).collect()
    }

    pub fn ell(&self) -> usize {
        self.template.ell
    }

    /// Rainbow colouring of the copy using `A ∪ extra`.
    pub fn colour_with(&self, extra: &[usize]) -> Result<RainbowEmbedding> {
        let local: Vec<usize> = extra
            .iter()
            .map(|c| {
                self.colour_ids
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| Error::Precondition(format!("colour {c} unknown to absorber")))
            })
            .collect::<Result<_>>()?;
        let phi = self.template.absorb(&local)?;
        let mut emb = RainbowEmbedding::new(self.vertex_map.clone());
        for (&(u, v), &c) in self.edges.iter().zip(&phi) {
            emb.set_colour(u, v, self.colour_ids[c]);
        }
        Ok(emb)
    }
}

/// Embeds `h` into the threshold graph of the allowed colours at count
/// `⌈α·|colours|⌉` and builds an absorber over its edges.
pub fn build_colour_absorber<F>(
    coll: &GraphCollection,
    colours: &[usize],
    h: &Graph,
    ell: usize,
    mut embedder: F,
    config: &PipelineConfig,
    rng: &mut impl Rng,
) -> Result<ColourAbsorber>
where
    F: FnMut(&Graph) -> Option<Vec<usize>>,
{
    if colours.is_empty() {
        return Err(Error::NoColours);
    }
    let count = ((config.alpha * colours.len() as f64).ceil() as usize).clamp(1, colours.len());
    let g = coll.threshold_graph_over(colours, count)?;
    let vertex_map = embedder(&g).ok_or_else(|| Error::EmbedFailed("absorber template".into()))?;
    let edges = h.edges();
    let slots: Vec<Vec<usize>> = edges
        .iter()
        .map(|&(u, v)| {
            let (x, y) = (vertex_map[u], vertex_map[v]);
            (0..colours.len()).filter(|&i| coll.has_edge(colours[i], x, y)).collect()
        })
        .collect();
    let adjacency = SlotColourGraph::new(colours.len(), &slots);
    let template = build_absorber(&adjacency, ell, config.retries, rng)?;
    Ok(ColourAbsorber {
        vertex_map,
        edges,
        colour_ids: colours.to_vec(),
        template,
    })
}
