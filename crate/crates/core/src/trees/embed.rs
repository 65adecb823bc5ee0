use rand::Rng;

use super::tree::{decompose_piece, Piece, Tree};
use crate::collection::GraphCollection;
use crate::config::PipelineConfig;
use crate::embedding::{edge_key, RainbowEmbedding};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::perfect_left;
use crate::partition::split_preserving_degrees_for;

const NONE: usize = usize::MAX;

/// Embeds `tree` into `g` with `t ↦ v`, using only vertices of `hosts` (all
/// of `g` when `None`). Backtracking over a largest-subtree-first preorder;
/// images are tried fewest-free-neighbours first. When the tree exactly fills
/// the host set, branches that strand a free vertex are cut.
pub fn embed_tree_rooted(
    g: &Graph,
    tree: &Tree,
    t: usize,
    v: usize,
    hosts: Option<&VertexSet>,
    budget: u64,
) -> Result<Vec<usize>> {
    let n = g.order();
    let hosts = hosts.cloned().unwrap_or_else(|| VertexSet::full(n));
    if t >= tree.order() || v >= n || !hosts.contains(v) {
        return Err(Error::Precondition(format!("root {t} ↦ {v} not available")));
    }
    if tree.order() > hosts.len() {
        return Err(Error::Precondition(format!(
            "tree on {} vertices, {} host vertices",
            tree.order(),
            hosts.len()
        )));
    }
    let k = tree.order();
    let spanning = k == hosts.len();

    let parent = tree.parents(t);
    let mut size = vec![1usize; k];
    for &u in tree.preorder(t).iter().rev() {
        if parent[u] != NONE {
            size[parent[u]] += size[u];
        }
    }
    let children: Vec<Vec<usize>> = (0..k)
        .map(|u| {
            let mut c: Vec<usize> = tree.neighbors(u).iter().copied().filter(|&w| w != parent[u]).collect();
            c.sort_by_key(|&w| (std::cmp::Reverse(size[w]), w));
            c
        })
        .collect();
    let mut order = Vec::with_capacity(k);
    let mut stack = vec![t];
    while let Some(u) = stack.pop() {
        order.push(u);
        stack.extend(children[u].iter().rev());
    }

    let mut image = vec![NONE; k];
    let mut free = hosts.clone();
    let mut pending: Vec<usize> = children.iter().map(Vec::len).collect();
    image[t] = v;
    free.remove(v);
    if k == 1 {
        return Ok(image);
    }
    let mut open = VertexSet::new(n);
    if pending[t] > 0 {
        open.insert(v);
    }

    let candidates = |x: usize, image: &[usize], free: &VertexSet| -> Vec<usize> {
        let need = children[x].len();
        let mut c: Vec<(usize, usize)> = g
            .neighbors_in(image[parent[x]], free)
            .iter()
            .map(|w| (g.degree_in(w, free), w))
            .filter(|&(d, _)| d >= need)
            .collect();
        c.sort_unstable();
        c.into_iter().map(|(_, w)| w).collect()
    };

    let stranded = |free: &VertexSet, open: &VertexSet| -> bool {
        let mut reach = free.clone();
        reach.union_with(open);
        free.iter().any(|w| {
            let row = g.row(w);
            !row.iter().zip(reach.words()).any(|(a, b)| a & b != 0)
        })
    };

    let mut nodes = 0u64;
    let mut depth = 1;
    let mut frames: Vec<(Vec<usize>, usize)> = vec![(candidates(order[1], &image, &free), 0)];
    loop {
        let x = order[depth];
        if image[x] != NONE {
            let c = image[x];
            image[x] = NONE;
            free.insert(c);
            open.remove(c);
            let p = parent[x];
            if pending[p] == 0 {
                open.insert(image[p]);
            }
            pending[p] += 1;
        }
        let Some(top) = frames.last_mut() else {
            return Err(Error::NotFound("no embedding of the tree".into()));
        };
        if top.1 == top.0.len() {
            frames.pop();
            if depth == 1 {
                return Err(Error::NotFound("no embedding of the tree".into()));
            }
            depth -= 1;
            continue;
        }
        let c = top.0[top.1];
        top.1 += 1;
        nodes += 1;
        if nodes > budget {
            return Err(Error::NotFound(format!("embedding budget of {budget} nodes exhausted")));
        }
        image[x] = c;
        free.remove(c);
        let p = parent[x];
        pending[p] -= 1;
        if pending[p] == 0 {
            open.remove(image[p]);
        }
        if pending[x] > 0 {
            open.insert(c);
        }
        if spanning && stranded(&free, &open) {
            continue;
        }
        if depth + 1 == k {
            return Ok(image);
        }
        depth += 1;
        frames.push((candidates(order[depth], &image, &free), 0));
    }
}

/// Distinct colours for host edges, each containing its edge. Lowest-index
/// greedy first; a bipartite matching if greedy gets stuck.
fn colour_edges(coll: &GraphCollection, host_edges: &[(usize, usize)], colours: &[usize]) -> Option<Vec<usize>> {
    let mut used = VertexSet::new(coll.m());
    let mut out = Vec::with_capacity(host_edges.len());
    for &(x, y) in host_edges {
        match colours.iter().find(|&&c| !used.contains(c) && coll.has_edge(c, x, y)) {
            Some(&c) => {
                used.insert(c);
                out.push(c);
            }
            None => break,
        }
    }
    if out.len() == host_edges.len() {
        return Some(out);
    }
    let adj: Vec<Vec<usize>> = host_edges
        .iter()
        .map(|&(x, y)| (0..colours.len()).filter(|&i| coll.has_edge(colours[i], x, y)).collect())
        .collect();
    perfect_left(&adj, colours.len()).map(|m| m.into_iter().map(|i| colours[i]).collect())
}

fn rainbow_from_map(
    coll: &GraphCollection,
    tree: &Tree,
    map: Vec<usize>,
    colours: &[usize],
) -> Option<RainbowEmbedding> {
    let edges = tree.edges();
    let host: Vec<_> = edges.iter().map(|&(a, b)| edge_key(map[a], map[b])).collect();
    let cols = colour_edges(coll, &host, colours)?;
    let mut emb = RainbowEmbedding::new(map);
    for (&(a, b), c) in edges.iter().zip(cols) {
        emb.set_colour(a, b, c);
    }
    Some(emb)
}

/// Rainbow copy of `tree` with `t ↦ v` over `colours`, inside `hosts`: embed
/// into the threshold graph at `min_count`, then colour edges distinctly.
#[allow(clippy::too_many_arguments)]
pub fn embed_rainbow_surplus_within(
    coll: &GraphCollection,
    tree: &Tree,
    t: usize,
    v: usize,
    colours: &[usize],
    hosts: Option<&VertexSet>,
    min_count: usize,
    budget: u64,
) -> Result<RainbowEmbedding> {
    if tree.edge_count() > colours.len() {
        return Err(Error::Precondition(format!(
            "{} edges, {} colours",
            tree.edge_count(),
            colours.len()
        )));
    }
    if tree.order() == 1 {
        return Ok(RainbowEmbedding::new(vec![v]));
    }
    let h = coll.threshold_graph_over(colours, min_count.clamp(1, colours.len()))?;
    let map = embed_tree_rooted(&h, tree, t, v, hosts, budget)
        .map_err(|e| Error::EmbedFailed(format!("threshold graph at count {min_count}: {e}")))?;
    rainbow_from_map(coll, tree, map, colours)
        .ok_or_else(|| Error::EmbedFailed(format!("no rainbow colouring at count {min_count}")))
}

/// Rainbow copy of `tree` in the whole collection with `t ↦ v`, through the
/// threshold graph at `min_count` (normally `e(T)`).
pub fn embed_tree_rainbow_surplus(
    coll: &GraphCollection,
    tree: &Tree,
    t: usize,
    v: usize,
    min_count: usize,
    config: &PipelineConfig,
) -> Result<RainbowEmbedding> {
    if (coll.m() as f64) < config.c * tree.order() as f64 {
        return Err(Error::Precondition(format!(
            "{} colours, need {} · {}",
            coll.m(),
            config.c,
            tree.order()
        )));
    }
    let colours: Vec<usize> = (0..coll.m()).collect();
    embed_rainbow_surplus_within(coll, tree, t, v, &colours, None, min_count, config.embed_budget)
}

/// Counts tried for a block, from `e` down: the exact count first, then a
/// few relaxations whose colouring is settled by matching.
fn relaxed_counts(e: usize) -> Vec<usize> {
    let mut out = vec![e];
    for f in [0.9, 0.8, 0.7] {
        let c = ((e as f64) * f).ceil() as usize;
        if c >= 1 && c < *out.last().unwrap() {
            out.push(c);
        }
    }
    out
}

/// Few-surplus embedding of `piece` (labels of some ambient tree) rooted at
/// `t ↦ v`, over `colours` and inside `hosts` (which must contain `v`).
/// Returns the map from piece labels to host vertices and the edge colours.
#[allow(clippy::too_many_arguments)]
pub(crate) fn few_surplus_within<R: Rng>(
    coll: &GraphCollection,
    piece: &Piece,
    t: usize,
    v: usize,
    colours: &[usize],
    hosts: &VertexSet,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<PieceEmbedding> {
    let e = piece.edges.len();
    if e == 0 {
        return Ok(PieceEmbedding::single(t, v));
    }
    if (colours.len() as f64) < ((1.0 + config.eps) * e as f64).floor() {
        return Err(Error::Precondition(format!(
            "{} colours for {e} edges with eps {}",
            colours.len(),
            config.eps
        )));
    }
    if !hosts.contains(v) || hosts.len() < piece.order() {
        return Err(Error::Precondition(format!(
            "{} host vertices for {} tree vertices",
            hosts.len(),
            piece.order()
        )));
    }
    let block = ((config.mu * piece.order() as f64).round() as usize).clamp(1, piece.order());
    let blocks = decompose_piece(piece, block, t)?;

    // Where each block hangs off the ones before it.
    let mut roots = vec![t];
    let mut acc = blocks[0].clone();
    for b in &blocks[1..] {
        roots.push(
            acc.shared_vertex(b)
                .ok_or_else(|| Error::Internal("decomposition prefix not connected".into()))?,
        );
        acc = acc.union(b);
    }

    let mut ground: Vec<usize> = hosts.iter().filter(|&w| w != v).collect();
    ground.sort_unstable();
    let mut sizes: Vec<usize> = blocks.iter().map(|b| b.order() - 1).collect();
    let spare = ground.len() - sizes.iter().sum::<usize>();
    if spare > 0 {
        sizes.push(spare);
    }
    let mut check = ground.clone();
    check.push(v);

    let mut last_err = None;
    for attempt in 0..config.retries {
        let parts = if sizes.len() == 1 {
            vec![ground.clone()]
        } else {
            match split_preserving_degrees_for(coll, colours, &ground, &sizes, &check, config.slack, 1, rng) {
                Ok(plan) => plan.parts,
                Err(Error::PartitionRetriesExhausted { best_parts, .. }) => best_parts,
                Err(e) => return Err(e),
            }
        };
        match embed_blocks(coll, &blocks, &roots, v, &parts, colours, config) {
            Ok(pe) => return Ok(pe),
            Err((idx, err)) => {
                last_err = Some(format!("attempt {attempt}: block {idx} of {}: {err}", blocks.len()));
            }
        }
    }
    Err(Error::RetriesExhausted(last_err.unwrap_or_default()))
}

fn embed_blocks(
    coll: &GraphCollection,
    blocks: &[Piece],
    roots: &[usize],
    v: usize,
    parts: &[Vec<usize>],
    colours: &[usize],
    config: &PipelineConfig,
) -> std::result::Result<PieceEmbedding, (usize, Error)> {
    let mut out = PieceEmbedding::single(roots[0], v);
    let mut free: Vec<usize> = colours.to_vec();
    for (j, b) in blocks.iter().enumerate() {
        let anchor = out.image(roots[j]).expect("block root placed earlier");
        let mut hosts = VertexSet::from_iter_with_capacity(coll.n(), parts[j].iter().copied());
        hosts.insert(anchor);
        let (tree, labels) = b.to_tree();
        let local_root = labels.binary_search(&roots[j]).expect("root in block");
        let mut result = Err(Error::EmbedFailed("no count tried".into()));
        for count in relaxed_counts(tree.edge_count()) {
            result = embed_rainbow_surplus_within(
                coll,
                &tree,
                local_root,
                anchor,
                &free,
                Some(&hosts),
                count,
                config.embed_budget,
            );
            if result.is_ok() {
                break;
            }
        }
        let emb = result.map_err(|e| (j, e))?;
        for (i, &lab) in labels.iter().enumerate() {
            out.vertex.push((lab, emb.vertex_map[i]));
        }
        for (&(a, bb), &c) in &emb.colour_map {
            out.colour.push((edge_key(labels[a], labels[bb]), c));
        }
        let used: Vec<usize> = emb.colour_map.values().copied().collect();
        free.retain(|c| !used.contains(c));
    }
    out.vertex.sort_unstable();
    out.vertex.dedup();
    out.colour.sort_unstable();
    Ok(out)
}

/// Embedding of a [`Piece`], keyed by the piece's own labels.
#[derive(Clone, Debug, Default)]
pub(crate) struct PieceEmbedding {
    pub vertex: Vec<(usize, usize)>,
    pub colour: Vec<((usize, usize), usize)>,
}

impl PieceEmbedding {
    fn single(t: usize, v: usize) -> Self {
        PieceEmbedding {
            vertex: vec![(t, v)],
            colour: Vec::new(),
        }
    }

    pub fn image(&self, x: usize) -> Option<usize> {
        self.vertex.iter().find(|&&(a, _)| a == x).map(|&(_, b)| b)
    }
}

/// Rainbow copy of `tree` with `t ↦ v` from a collection with about
/// `(1+ε)·e(T)` colours, using every vertex if the tree is spanning.
pub fn embed_tree_rainbow_few_surplus<R: Rng>(
    coll: &GraphCollection,
    tree: &Tree,
    t: usize,
    v: usize,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<RainbowEmbedding> {
    let colours: Vec<usize> = (0..coll.m()).collect();
    let hosts = VertexSet::full(coll.n());
    let pe = few_surplus_within(coll, &tree.whole(), t, v, &colours, &hosts, config, rng)?;
    Ok(to_rainbow(tree.order(), &pe))
}

pub(crate) fn to_rainbow(order: usize, pe: &PieceEmbedding) -> RainbowEmbedding {
    let mut map = vec![NONE; order];
    for &(x, y) in &pe.vertex {
        map[x] = y;
    }
    let mut emb = RainbowEmbedding::new(map);
    for &((a, b), c) in &pe.colour {
        emb.set_colour(a, b, c);
    }
    emb
}

/// Vertices of `piece` other than `t`, in reverse order of iterated removal
/// of the lowest-labelled leaf, so each one's parent comes earlier.
fn leaf_order(piece: &Piece, t: usize) -> Vec<(usize, usize)> {
    let (tree, labels) = piece.to_tree();
    let root = labels.binary_search(&t).expect("t in piece");
    let mut deg: Vec<usize> = (0..tree.order()).map(|u| tree.degree(u)).collect();
    let mut gone = vec![false; tree.order()];
    let mut out = Vec::with_capacity(tree.order());
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..tree.order()).filter(|&u| deg[u] == 1 && u != root).map(std::cmp::Reverse).collect();
    while let Some(std::cmp::Reverse(u)) = heap.pop() {
        gone[u] = true;
        let p = tree.neighbors(u).iter().copied().find(|&w| !gone[w]).expect("leaf has a neighbour");
        out.push((labels[p], labels[u]));
        deg[p] -= 1;
        if deg[p] == 1 && p != root {
            heap.push(std::cmp::Reverse(p));
        }
    }
    out.reverse();
    out
}

/// Colours `colours[i]` onto the `i`-th edge of the leaf-removal order,
/// choosing the lowest unused host adjacent in that colour each time.
pub(crate) fn greedy_cover_within(
    coll: &GraphCollection,
    piece: &Piece,
    t: usize,
    v: usize,
    colours: &[usize],
    hosts: &VertexSet,
) -> Result<PieceEmbedding> {
    if colours.len() != piece.edges.len() {
        return Err(Error::Precondition(format!(
            "{} colours for {} edges",
            colours.len(),
            piece.edges.len()
        )));
    }
    let mut out = PieceEmbedding::single(t, v);
    let mut image = std::collections::HashMap::from([(t, v)]);
    let mut free = hosts.clone();
    free.remove(v);
    for (step, ((p, x), &c)) in leaf_order(piece, t).into_iter().zip(colours).enumerate() {
        let from = image[&p];
        let w = coll
            .colour(c)
            .neighbors_in(from, &free)
            .iter()
            .next()
            .ok_or(Error::GreedyStuck { step, vertex: from, colour: c })?;
        free.remove(w);
        image.insert(x, w);
        out.vertex.push((x, w));
        out.colour.push((edge_key(p, x), c));
    }
    out.vertex.sort_unstable();
    out.colour.sort_unstable();
    Ok(out)
}

/// Rainbow copy of `tree` with `t ↦ v` using every colour exactly once;
/// needs `m = e(T)` and `δ(𝒢) ≥ m`.
pub fn greedy_colour_cover_tree(
    coll: &GraphCollection,
    tree: &Tree,
    t: usize,
    v: usize,
) -> Result<RainbowEmbedding> {
    if coll.m() != tree.edge_count() || tree.order() > coll.n() {
        return Err(Error::Precondition(format!(
            "{} colours for a tree with {} edges on {} vertices",
            coll.m(),
            tree.edge_count(),
            coll.n()
        )));
    }
    if coll.m() > 0 && coll.min_degree()? < coll.m() {
        return Err(Error::Precondition(format!(
            "minimum degree {} below {}",
            coll.min_degree()?,
            coll.m()
        )));
    }
    let colours: Vec<usize> = (0..coll.m()).collect();
    let pe = greedy_cover_within(coll, &tree.whole(), t, v, &colours, &VertexSet::full(coll.n()))?;
    Ok(to_rainbow(tree.order(), &pe))
}
