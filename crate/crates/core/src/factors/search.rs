use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::PipelineConfig;
use crate::embedding::edge_key;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::max_matching;
use crate::oracle::{find_subgraph_within, for_each_copy, for_each_copy_in};
use crate::partition::split_preserving_degrees_for;

use super::units::{count_common, intersect, Kind, Placed, Units};

/// Samples `sample` of the free vertices and returns the copy of `F` inside
/// them held by the most units of `allowed` whose colours keep relative
/// minimum degree `threshold` on the sample, with every allowed unit holding
/// it. The best over `tries` samples wins.
#[allow(clippy::too_many_arguments)]
pub(crate) fn common_unit_copy<R: Rng>(
    units: &Units,
    free: &[usize],
    allowed: &VertexSet,
    sample: usize,
    threshold: f64,
    tries: usize,
    budget: u64,
    rng: &mut R,
) -> Result<(Vec<usize>, VertexSet)> {
    let n = units.coll.n();
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..tries.max(1) {
        let mut v: Vec<usize> = free.choose_multiple(rng, sample.min(free.len())).copied().collect();
        v.sort_unstable();
        let vset = VertexSet::from_iter_with_capacity(n, v.iter().copied());
        let floor = threshold * (v.len().saturating_sub(1)) as f64;
        let mut eligible = VertexSet::new(units.count());
        for u in allowed.iter() {
            if units.span(u).iter().all(|&c| units.coll.colour(c).min_degree_in(&vset) as f64 >= floor) {
                eligible.insert(u);
            }
        }
        if eligible.is_empty() {
            eligible = allowed.clone();
        }
        let host = units.host_graph(&eligible, 1);
        let res = for_each_copy(&host, units.f, &[], Some(&vset), budget, |img| {
            let score = count_common(&units.fitting(img), &eligible);
            if score > 0 && best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, img.to_vec()));
            }
            true
        });
        match res {
            Ok(_) | Err(Error::BudgetExhausted(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (_, copy) = best.ok_or_else(|| Error::RetriesExhausted(format!("no copy of F held by any allowed unit in {} samples", tries.max(1))))?;
    let fit = intersect(&units.fitting(&copy), allowed);
    Ok((copy, fit))
}

/// Copies of `F` inside `remaining` through `w`, without repeats of the same
/// edge set unless units read the vertex order.
fn copies_through(units: &Units, host: &Graph, w: usize, remaining: &VertexSet, budget: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let ordered = matches!(units.kind, Kind::Patterns(_));
    for a in 0..units.r() {
        let _ = for_each_copy(host, units.f, &[(a, w)], Some(remaining), budget, |img| {
            let fresh = if ordered {
                seen.insert(img.to_vec())
            } else {
                let mut key: Vec<usize> = units.f_edges.iter().flat_map(|&(x, y)| {
                    let (a, b) = edge_key(img[x], img[y]);
                    [a, b]
                }).collect();
                key.sort_unstable();
                seen.insert(key)
            };
            if fresh {
                out.push(img.to_vec());
            }
            true
        });
    }
    out
}

struct BlockSearch<'u, 'a> {
    units: &'u Units<'a>,
    host: Graph,
    avail: VertexSet,
    need: usize,
    spent: usize,
    cap: usize,
    budget: u64,
}

impl BlockSearch<'_, '_> {
    /// Largest common support of a factor of `remaining` extending `chosen`.
    fn common(
        &mut self,
        remaining: &mut VertexSet,
        acc: VertexSet,
        chosen: &mut Vec<Vec<usize>>,
        best: &mut Option<(usize, Vec<Vec<usize>>, VertexSet)>,
    ) {
        let Some(w) = remaining.iter().next() else {
            if best.as_ref().is_none_or(|b| acc.len() > b.0) {
                *best = Some((acc.len(), chosen.clone(), acc));
            }
            return;
        };
        let mut cands: Vec<(VertexSet, Vec<usize>)> = copies_through(self.units, &self.host, w, remaining, self.budget)
            .into_iter()
            .map(|c| (intersect(&acc, &self.units.fitting(&c)), c))
            .collect();
        cands.sort_by_key(|(fit, c)| (std::cmp::Reverse(fit.len()), c.clone()));
        for (fit, c) in cands {
            self.spent += 1;
            if self.spent > self.cap {
                return;
            }
            let bar = best.as_ref().map_or(self.need, |b| b.0 + 1).max(self.need);
            if fit.len() < bar {
                break;
            }
            for &x in &c {
                remaining.remove(x);
            }
            chosen.push(c);
            self.common(remaining, fit, chosen, best);
            let c = chosen.pop().expect("pushed");
            for &x in &c {
                remaining.insert(x);
            }
        }
    }

    /// A factor of `remaining` whose slots, with those of `chosen`, can be
    /// served by distinct available units.
    fn matched<R: Rng>(
        &mut self,
        remaining: &mut VertexSet,
        chosen: &mut Vec<(Vec<usize>, Vec<Vec<usize>>)>,
        rng: &mut R,
    ) -> bool {
        let Some(w) = remaining.iter().next() else {
            return true;
        };
        let s = self.units.slots();
        let mut cands: Vec<(usize, Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
        for c in copies_through(self.units, &self.host, w, remaining, self.budget) {
            let slots: Vec<Vec<usize>> = (0..s).map(|i| intersect(&self.units.slot_fitting(&c, i), &self.avail).to_vec()).collect();
            let width = slots.iter().map(Vec::len).min().unwrap_or(0);
            if width > 0 {
                cands.push((width, c, slots));
            }
        }
        cands.shuffle(rng);
        cands.sort_by_key(|(w, _, _)| std::cmp::Reverse(*w));
        for (_, c, slots) in cands {
            self.spent += 1;
            if self.spent > self.cap {
                return false;
            }
            chosen.push((c, slots));
            let adj: Vec<Vec<usize>> = chosen.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
            if max_matching(&adj, self.units.count()).iter().all(Option::is_some) {
                for &x in &chosen.last().expect("pushed").0 {
                    remaining.remove(x);
                }
                if self.matched(remaining, chosen, rng) {
                    return true;
                }
                for &x in &chosen.last().expect("pushed").0 {
                    remaining.insert(x);
                }
            }
            chosen.pop();
            if self.spent > self.cap {
                return false;
            }
        }
        false
    }
}

/// An F-factor of `block` with a distinct unit of `avail` on every slot.
/// First the factor held by the most units at once (each copy then takes
/// `slots` of them); failing that, any factor whose slots match into `avail`.
pub(crate) fn block_factor<R: Rng>(
    units: &Units,
    block: &[usize],
    avail: &VertexSet,
    config: &PipelineConfig,
    rng: &mut R,
) -> Option<Vec<Placed>> {
    let n = units.coll.n();
    let r = units.r();
    let s = units.slots();
    let q = block.len() / r;
    if q == 0 {
        return Some(Vec::new());
    }
    let need = s * q;
    let mut search = BlockSearch {
        units,
        host: Graph::new(0),
        avail: avail.clone(),
        need,
        spent: 0,
        cap: config.factor_enum_cap,
        budget: config.search_budget,
    };
    let full = VertexSet::from_iter_with_capacity(n, block.iter().copied());

    {
        let mut best = None;
        let mut remaining = full.clone();
        let min_count = if matches!(units.kind, Kind::Patterns(_)) { 1 } else { need };
        search.host = units.host_graph(avail, min_count);
        search.common(&mut remaining, avail.clone(), &mut Vec::new(), &mut best);
        if let Some((_, copies, support)) = best {
            let support = support.to_vec();
            return Some(
                copies
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| Placed { vertices: c, units: support[i * s..(i + 1) * s].to_vec() })
                    .collect(),
            );
        }
    }

    search.host = units.host_graph(avail, 1);
    search.spent = 0;
    let mut remaining = full;
    let mut chosen = Vec::new();
    if !search.matched(&mut remaining, &mut chosen, rng) {
        return None;
    }
    let adj: Vec<Vec<usize>> = chosen.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
    let m = max_matching(&adj, units.count());
    let mut it = m.into_iter();
    Some(
        chosen
            .into_iter()
            .map(|(c, _)| Placed { vertices: c, units: (0..s).map(|_| it.next().flatten().expect("saturated")).collect() })
            .collect(),
    )
}

/// Tiles `vertices` with copies of `F`, each slot served by a distinct unit
/// of `avail`: blocks of about `k` copies are cut out degree-preservingly
/// and solved one after another on the units still unused.
pub(crate) fn surplus_within<R: Rng>(
    units: &Units,
    vertices: &[usize],
    avail: &VertexSet,
    config: &PipelineConfig,
    attempts: usize,
    rng: &mut R,
) -> Result<Vec<Placed>> {
    let r = units.r();
    let s = units.slots();
    if !vertices.len().is_multiple_of(r) {
        return Err(Error::Precondition(format!("{} vertices do not split into copies of {r}", vertices.len())));
    }
    let q = vertices.len() / r;
    if avail.len() < s * q {
        return Err(Error::Precondition(format!("{} units for {} slots", avail.len(), s * q)));
    }
    if q == 0 {
        return Ok(Vec::new());
    }
    let nb = (q / config.k).max(1);
    let sizes: Vec<usize> = (0..nb).map(|b| r * (q / nb + usize::from(b < q % nb))).collect();
    let mut colours = VertexSet::new(units.coll.m());
    for u in avail.iter() {
        for c in units.span(u) {
            colours.insert(c);
        }
    }
    let colours = colours.to_vec();
    let mut last = String::new();
    for attempt in 0..attempts.max(1) {
        let parts = if nb == 1 {
            vec![vertices.to_vec()]
        } else {
            match split_preserving_degrees_for(units.coll, &colours, vertices, &sizes, vertices, config.slack, 1, rng) {
                Ok(plan) => plan.parts,
                Err(Error::PartitionRetriesExhausted { best_parts, .. }) => best_parts,
                Err(e) => return Err(e),
            }
        };
        let mut left = avail.clone();
        let mut out = Vec::with_capacity(q);
        let mut failed = None;
        for (b, part) in parts.iter().enumerate() {
            match block_factor(units, part, &left, config, rng) {
                Some(placed) => {
                    for p in &placed {
                        for &u in &p.units {
                            left.remove(u);
                        }
                    }
                    out.extend(placed);
                }
                None => {
                    failed = Some(b);
                    break;
                }
            }
        }
        match failed {
            None => return Ok(out),
            Some(b) => last = format!("attempt {attempt}: block {b} of {nb} ({} vertices, {} units left)", parts[b].len(), left.len()),
        }
    }
    Err(Error::RetriesExhausted(last))
}

/// A rainbow copy of `F` inside `vertices` with one edge in colour `j` and
/// the others in distinct colours of `pool`.
pub(crate) fn rainbow_copy_with(
    units: &Units,
    j: usize,
    vertices: &VertexSet,
    pool: &VertexSet,
    budget: u64,
) -> Result<Placed> {
    let e = units.f_edges.len();
    let mut others = pool.clone();
    others.remove(j);
    let mut g = units.host_graph(&others, e);
    let verts = vertices.to_vec();
    for (ix, &x) in verts.iter().enumerate() {
        for &y in &verts[ix + 1..] {
            if !units.coll.has_edge(j, x, y) {
                continue;
            }
            let added = g.add_edge(x, y);
            for (k, &(a, b)) in units.f_edges.iter().enumerate() {
                let Ok(img) = find_subgraph_within(&g, units.f, &[(a, x), (b, y)], Some(vertices), budget) else {
                    continue;
                };
                let mut taken = VertexSet::new(units.count());
                let mut cols = Vec::with_capacity(e);
                for (i, &(c, d)) in units.f_edges.iter().enumerate() {
                    if i == k {
                        cols.push(j);
                        continue;
                    }
                    let mut opts = intersect(units.pair_colours(img[c], img[d]), &others);
                    opts.difference_with(&taken);
                    let col = opts.iter().next().ok_or_else(|| Error::Internal("threshold edge ran out of colours".into()))?;
                    taken.insert(col);
                    cols.push(col);
                }
                return Ok(Placed { vertices: img, units: cols });
            }
            if added {
                g.remove_edge(x, y);
            }
        }
    }
    Err(Error::NotFound(format!("no copy of F through an edge of colour {j}")))
}

/// One copy per target unit, vertex-disjoint inside `vertices`; rainbow
/// copies draw their other colours from `pool`, which shrinks as it goes.
pub(crate) fn cover_within<R: Rng>(
    units: &Units,
    targets: &[usize],
    pool: &VertexSet,
    vertices: &[usize],
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<Vec<Placed>> {
    let n = units.coll.n();
    let mut free = VertexSet::from_iter_with_capacity(n, vertices.iter().copied());
    let mut pool = pool.clone();
    let mut out = Vec::with_capacity(targets.len());
    for &j in targets {
        let placed = match units.kind {
            Kind::Mono => find_subgraph_within(units.coll.colour(j), units.f, &[], Some(&free), config.search_budget)
                .map(|img| Placed { vertices: img, units: vec![j] }),
            Kind::Rainbow => rainbow_copy_with(units, j, &free, &pool, config.search_budget),
            Kind::Patterns(p) => {
                patterned_copies(units.coll, units.f, &p[j], &free.to_vec(), 1, config, rng)
                    .map(|mut c| Placed { vertices: c.remove(0), units: vec![j] })
            }
        }
        .map_err(|e| Error::NotFound(format!("unit {j}: {e}")))?;
        for &x in &placed.vertices {
            free.remove(x);
        }
        for &u in &placed.units {
            pool.remove(u);
        }
        out.push(placed);
    }
    Ok(out)
}

/// `count` vertex-disjoint copies of `F`, edge `k` in colour `pattern[k]`:
/// `vertices` is split into `r` parts, vertex `s` of every copy lies in
/// part `s`, and `st`-edges come from the colour the pattern gives `st`.
pub fn patterned_copies<R: Rng>(
    coll: &crate::collection::GraphCollection,
    f: &Graph,
    pattern: &[usize],
    vertices: &[usize],
    count: usize,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let n = coll.n();
    let r = f.order();
    let f_edges = f.edges();
    if pattern.len() != f_edges.len() || pattern.iter().any(|&c| c >= coll.m()) {
        return Err(Error::Precondition("pattern does not fit F".into()));
    }
    let per = vertices.len() / r;
    if per < count {
        return Err(Error::Precondition(format!("{} vertices cannot hold {count} copies of {r}", vertices.len())));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut last = None;
    for _ in 0..config.retries.min(4) {
        let mut ground: Vec<usize> = vertices.choose_multiple(rng, per * r).copied().collect();
        ground.sort_unstable();
        let parts = if r == 1 {
            vec![ground.clone()]
        } else {
            match split_preserving_degrees_for(coll, pattern, &ground, &vec![per; r], &ground, config.slack, 1, rng) {
                Ok(plan) => plan.parts,
                Err(Error::PartitionRetriesExhausted { best_parts, .. }) => best_parts,
                Err(e) => return Err(e),
            }
        };
        let part_sets: Vec<VertexSet> =
            parts.iter().map(|p| VertexSet::from_iter_with_capacity(n, p.iter().copied())).collect();
        let mut part_of = vec![usize::MAX; n];
        for (s, p) in parts.iter().enumerate() {
            for &v in p {
                part_of[v] = s;
            }
        }
        let mut merged = Graph::new(n);
        for (k, &(a, b)) in f_edges.iter().enumerate() {
            for (x, y) in coll.colour(pattern[k]).edges() {
                let (px, py) = (part_of[x], part_of[y]);
                if (px, py) == (a, b) || (px, py) == (b, a) {
                    merged.add_edge(x, y);
                }
            }
        }
        let mut used = VertexSet::new(n);
        let mut out = Vec::new();
        let mut nodes = 0u64;
        match partite_factor(&merged, f, &part_sets, count, &mut used, &mut out, &mut nodes, config.search_budget) {
            Ok(true) => return Ok(out),
            Ok(false) => last = Some(Error::NotFound("no r-partite copies in the merged graph".into())),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NotFound("no attempts".into())))
}

#[allow(clippy::too_many_arguments)]
fn partite_factor(
    merged: &Graph,
    f: &Graph,
    parts: &[VertexSet],
    count: usize,
    used: &mut VertexSet,
    out: &mut Vec<Vec<usize>>,
    nodes: &mut u64,
    budget: u64,
) -> Result<bool> {
    if out.len() == count {
        return Ok(true);
    }
    let mut domains: Vec<VertexSet> = parts
        .iter()
        .map(|p| {
            let mut d = p.clone();
            d.difference_with(used);
            d
        })
        .collect();
    // Copies are ordered by their part-0 vertex.
    let lowest = out.last().map_or(0, |c| c[0] + 1);
    let floor: Vec<usize> = domains[0].iter().filter(|&v| v < lowest).collect();
    for v in floor {
        domains[0].remove(v);
    }
    let mut found = Vec::new();
    let left = budget.saturating_sub(*nodes);
    match for_each_copy_in(merged, f, &domains, left, |img| {
        found.push(img.to_vec());
        found.len() < 64
    }) {
        Ok(_) => {}
        Err(Error::BudgetExhausted(_)) => {}
        Err(e) => return Err(e),
    }
    for c in found {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::BudgetExhausted(budget));
        }
        for &x in &c {
            used.insert(x);
        }
        out.push(c);
        if partite_factor(merged, f, parts, count, used, out, nodes, budget)? {
            return Ok(true);
        }
        let c = out.pop().expect("pushed");
        for &x in &c {
            used.remove(x);
        }
    }
    Ok(false)
}
