use rand::seq::SliceRandom;
use rand::Rng;

use super::embed::{embed_rainbow_surplus_within, embed_tree_rooted, few_surplus_within, greedy_cover_within, PieceEmbedding};
use super::tree::{split_four, Tree};
use crate::absorber::{build_colour_absorber, ColourAbsorber};
use crate::collection::GraphCollection;
use crate::config::PipelineConfig;
use crate::embedding::{edge_key, RainbowEmbedding};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::partition::split_preserving_degrees_for;

/// A rainbow copy of the spanning tree `tree` in a collection of `n − 1`
/// graphs on `n` vertices: absorber on `T₁`, then `T₂`, `T₃`, `T₄`, then the
/// leftover colours are absorbed into `T₁`.
pub fn rainbow_spanning_tree(coll: &GraphCollection, tree: &Tree, config: &PipelineConfig) -> Result<RainbowEmbedding> {
    config.validate()?;
    let n = coll.n();
    if tree.order() != n {
        return Err(Error::Precondition(format!("tree has {} vertices, graphs {n}", tree.order())));
    }
    if coll.m() + 1 != n {
        return Err(Error::Precondition(format!("{} colours for {n} vertices", coll.m())));
    }
    if n == 1 {
        return Ok(RainbowEmbedding::new(vec![0]));
    }
    let mut rng = config.rng(0x7ee);
    let sizes = SplitSizes::for_order(n, config);
    let mut last = None;
    for _ in 0..config.retries {
        let out = match sizes {
            None => degenerate(coll, tree, config),
            Some(s) => attempt(coll, tree, s, config, &mut rng),
        };
        match out {
            Ok(emb) => {
                verify_spanning_rainbow(coll, tree, &emb)?;
                return Ok(emb);
            }
            Err(e @ Error::Precondition(_)) => return Err(e),
            Err(e) if e.is_internal() => return Err(e),
            Err(e) => last = Some(e),
        }
        if sizes.is_none() {
            break;
        }
    }
    Err(last.unwrap_or_else(|| Error::RetriesExhausted("no attempt made".into())))
}

#[derive(Clone, Copy, Debug)]
struct SplitSizes {
    m1: usize,
    m3: usize,
    m4: usize,
}

impl SplitSizes {
    /// `None` when `n` is too small for the four-way split.
    fn for_order(n: usize, config: &PipelineConfig) -> Option<SplitSizes> {
        let cap = n / 10;
        if cap == 0 {
            return None;
        }
        let f = |x: f64| ((x * n as f64).round() as usize).clamp(1, cap);
        Some(SplitSizes {
            m1: f(config.beta),
            m3: f(config.gamma),
            m4: f(config.beta),
        })
    }
}

/// Small `n`: one embedding into the threshold graph, coloured by matching,
/// lowering the threshold until a colouring exists.
fn degenerate(coll: &GraphCollection, tree: &Tree, config: &PipelineConfig) -> Result<RainbowEmbedding> {
    let colours: Vec<usize> = (0..coll.m()).collect();
    let mut last = Error::EmbedFailed("no threshold tried".into());
    for count in (1..=coll.m()).rev() {
        for v in 0..coll.n() {
            match embed_rainbow_surplus_within(coll, tree, 0, v, &colours, None, count, config.embed_budget) {
                Ok(emb) => return Ok(emb),
                Err(e) => last = e,
            }
        }
    }
    Err(Error::stage("degenerate", last, format!("n={}", coll.n())))
}

struct Ledger {
    used: VertexSet,
}

impl Ledger {
    fn take(&mut self, cs: impl IntoIterator<Item = usize>) -> Result<()> {
        for c in cs {
            if !self.used.insert(c) {
                return Err(Error::Internal(format!("colour {c} used twice")));
            }
        }
        Ok(())
    }

    fn free(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|&c| !self.used.contains(c)).collect()
    }
}

fn attempt<R: Rng>(
    coll: &GraphCollection,
    tree: &Tree,
    sizes: SplitSizes,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<RainbowEmbedding> {
    let n = coll.n();
    let m = coll.m();
    let split = split_four(tree, sizes.m1, sizes.m3, sizes.m4)?;
    let [p1, p2, p3, p4] = &split.parts;
    let e4 = p4.edges.len();
    // B₁ colours need ℓ entry slots outside the ℓ sinks, so T₁ must dwarf ℓ.
    let ell = sizes.m3.min(p1.edges.len() / 3);
    let state = |step: &str| {
        format!(
            "{step}: n={n} |T1|={} |T2|={} |T3|={} |T4|={} ell={ell}",
            p1.order(),
            p2.order(),
            p3.order(),
            p4.order()
        )
    };
    let all: Vec<usize> = (0..m).collect();

    // Step 1: absorber on T₁.
    let (t1_tree, t1_labels) = p1.to_tree();
    let h = t1_tree.to_graph();
    let embedder = |g: &Graph| -> Option<Vec<usize>> {
        let mut starts: Vec<usize> = (0..n).collect();
        starts.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
        starts
            .into_iter()
            .take(8)
            .find_map(|v| embed_tree_rooted(g, &t1_tree, 0, v, None, config.embed_budget).ok())
    };
    let absorber = build_colour_absorber(coll, &all, &h, ell, embedder, config, rng)
        .map_err(|e| Error::stage("step 1: colour absorber on T1", e, state("step 1")))?;
    let a = absorber.fixed();
    let mut c = absorber.reservoir();
    if c.len() < e4 + ell {
        return Err(Error::stage(
            "step 1: colour absorber on T1",
            Error::RetriesExhausted(format!("reservoir of {} colours, need {}", c.len(), e4 + ell)),
            state("step 1"),
        ));
    }
    c.shuffle(rng);
    c.truncate(e4 + ell);
    c.sort_unstable();

    let mut map = PieceEmbedding::default();
    for (i, &lab) in t1_labels.iter().enumerate() {
        map.vertex.push((lab, absorber.vertex_map[i]));
    }
    let mut ledger = Ledger {
        used: VertexSet::new(m),
    };
    ledger.take(a.iter().copied())?;
    ledger.take(c.iter().copied())?;

    // Step 2: split the remaining vertices, embed T₂ with the colours outside A ∪ C.
    let v1_set = VertexSet::from_iter_with_capacity(n, absorber.vertex_map.iter().copied());
    let rest: Vec<usize> = (0..n).filter(|&v| !v1_set.contains(v)).collect();
    let n2 = p2.order() - 1;
    let n3 = rest.len() - n2;
    let everyone: Vec<usize> = (0..n).collect();
    // Small V₃ rarely meets every target here; the best attempt is used then.
    let tries = config.retries.min(4);
    let parts = match split_preserving_degrees_for(coll, &all, &rest, &[n2, n3], &everyone, config.slack, tries, rng) {
        Ok(plan) => plan.parts,
        Err(Error::PartitionRetriesExhausted { best_parts, .. }) => best_parts,
        Err(e) => return Err(Error::stage("step 2: split remaining vertices", e, state("step 2"))),
    };
    let v1 = image(&map, split.t1)?;
    let d = ledger.free(m);
    let s2 = if p2.edges.is_empty() {
        PieceEmbedding::default()
    } else {
        let mut hosts = VertexSet::from_iter_with_capacity(n, parts[0].iter().copied());
        hosts.insert(v1);
        let cfg = surplus_config(config, d.len(), p2.edges.len());
        few_surplus_within(coll, p2, split.t1, v1, &d, &hosts, &cfg, rng)
            .map_err(|e| Error::stage("step 2: embed T2", e, state("step 2")))?
    };
    absorb_into(&mut map, &s2, &mut ledger)?;

    // Step 3: T₃ takes exactly the leftover non-reserved colours.
    let b = ledger.free(m);
    let v2 = image(&map, split.t2)?;
    let mut v3_hosts = VertexSet::from_iter_with_capacity(n, parts[1].iter().copied());
    v3_hosts.insert(v2);
    let s3 = greedy_cover_within(coll, p3, split.t2, v2, &b, &v3_hosts)
        .map_err(|e| Error::stage("step 3: colour cover T3", e, state("step 3")))?;
    absorb_into(&mut map, &s3, &mut ledger)?;

    // Step 4: T₄ into what is left of V₃, with the reservoir colours.
    let v3 = image(&map, split.t3)?;
    let mut v4_hosts = VertexSet::from_iter_with_capacity(n, parts[1].iter().copied());
    for &(_, w) in &s3.vertex {
        v4_hosts.remove(w);
    }
    v4_hosts.insert(v3);
    let s4 = if p4.edges.is_empty() {
        PieceEmbedding::default()
    } else {
        // C is already reserved in the ledger.
        let cfg = surplus_config(config, c.len(), e4);
        few_surplus_within(coll, p4, split.t3, v3, &c, &v4_hosts, &cfg, rng)
            .map_err(|e| Error::stage("step 4: embed T4", e, state("step 4")))?
    };
    let s4_colours: Vec<usize> = s4.colour.iter().map(|&(_, x)| x).collect();
    let unused_c: Vec<usize> = c.iter().copied().filter(|x| !s4_colours.contains(x)).collect();
    for &(x, w) in &s4.vertex {
        map.vertex.push((x, w));
    }
    map.colour.extend(s4.colour.iter().copied());

    // Step 5: absorb the reservoir colours T₄ left behind.
    let coloured = absorber
        .colour_with(&unused_c)
        .map_err(|e| Error::stage("step 5: absorb leftover colours", e, state("step 5")))?;
    assemble(tree, &map, &absorber, &t1_labels, &coloured)
}

fn surplus_config(config: &PipelineConfig, colours: usize, edges: usize) -> PipelineConfig {
    PipelineConfig {
        eps: colours as f64 / edges.max(1) as f64 - 1.0,
        ..config.clone()
    }
}

fn image(map: &PieceEmbedding, x: usize) -> Result<usize> {
    map.image(x)
        .ok_or_else(|| Error::Internal(format!("attachment vertex {x} not embedded yet")))
}

fn absorb_into(map: &mut PieceEmbedding, part: &PieceEmbedding, ledger: &mut Ledger) -> Result<()> {
    map.vertex.extend(part.vertex.iter().copied());
    map.colour.extend(part.colour.iter().copied());
    ledger.take(part.colour.iter().map(|&(_, c)| c))
}

fn assemble(
    tree: &Tree,
    map: &PieceEmbedding,
    absorber: &ColourAbsorber,
    t1_labels: &[usize],
    coloured: &RainbowEmbedding,
) -> Result<RainbowEmbedding> {
    let mut vertex_map = vec![usize::MAX; tree.order()];
    for &(x, w) in &map.vertex {
        if vertex_map[x] != usize::MAX && vertex_map[x] != w {
            return Err(Error::Internal(format!("vertex {x} placed twice")));
        }
        vertex_map[x] = w;
    }
    let mut emb = RainbowEmbedding::new(vertex_map);
    for &((a, b), c) in &map.colour {
        emb.set_colour(a, b, c);
    }
    for &(a, b) in &absorber.edges {
        let c = coloured
            .colour(a, b)
            .ok_or_else(|| Error::Internal("absorber left an edge uncoloured".into()))?;
        let (x, y) = edge_key(t1_labels[a], t1_labels[b]);
        emb.set_colour(x, y, c);
    }
    Ok(emb)
}

/// Spanning, edge-preserving, and every colour used exactly once.
fn verify_spanning_rainbow(coll: &GraphCollection, tree: &Tree, emb: &RainbowEmbedding) -> Result<()> {
    let n = coll.n();
    let mut seen = VertexSet::new(n);
    if emb.vertex_map.len() != n || !emb.vertex_map.iter().all(|&v| v < n && seen.insert(v)) {
        return Err(Error::Internal("vertex map is not a bijection".into()));
    }
    let mut cols = VertexSet::new(coll.m());
    for (a, b) in tree.edges() {
        let c = emb
            .colour(a, b)
            .ok_or_else(|| Error::Internal(format!("edge {a}-{b} uncoloured")))?;
        if !cols.insert(c) || !coll.has_edge(c, emb.vertex_map[a], emb.vertex_map[b]) {
            return Err(Error::Internal(format!("edge {a}-{b} has a bad colour {c}")));
        }
    }
    if emb.colour_map.len() != tree.edge_count() {
        return Err(Error::Internal("colours on non-edges".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::tests::gnp;

    fn conditioned(n: usize, p: f64, min_deg: usize, seed: u64) -> GraphCollection {
        let mut s = seed * 104_729;
        let colours = (0..n - 1)
            .map(|_| loop {
                s += 1;
                let g = gnp(n, p, s);
                if g.min_degree() >= min_deg {
                    break g;
                }
            })
            .collect();
        GraphCollection::new(n, colours)
    }

    #[test]
    fn degenerate_path() {
        let coll = GraphCollection::identical(&Graph::complete(4), 3);
        let emb = rainbow_spanning_tree(&coll, &Tree::path(4), &PipelineConfig::default()).unwrap();
        assert_eq!(emb.colours_used(), vec![0, 1, 2]);
    }

    #[test]
    fn complete_colours_any_size() {
        for n in [2, 5, 9, 10, 17, 30, 60] {
            let coll = GraphCollection::identical(&Graph::complete(n), n - 1);
            let t = crate::trees::tree::tests::random_tree(n, n as u64);
            let emb = rainbow_spanning_tree(&coll, &t, &PipelineConfig::with_seed(n as u64))
                .unwrap_or_else(|e| panic!("n={n}: {e}"));
            assert_eq!(emb.colours_used(), (0..n - 1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dense_random_collections() {
        let mut ok = 0;
        for seed in 0..6 {
            let coll = conditioned(60, 0.9, 48, seed);
            let t = crate::trees::embed::tests::capped_tree(60, 4, seed);
            match rainbow_spanning_tree(&coll, &t, &PipelineConfig::with_seed(seed)) {
                Ok(_) => ok += 1,
                Err(e) => eprintln!("seed {seed}: {e}"),
            }
        }
        assert!(ok >= 5, "{ok}/6");
    }

    #[test]
    fn rejects_wrong_sizes() {
        let coll = GraphCollection::identical(&Graph::complete(5), 3);
        assert!(matches!(
            rainbow_spanning_tree(&coll, &Tree::path(5), &PipelineConfig::default()),
            Err(Error::Precondition(_))
        ));
    }
}
