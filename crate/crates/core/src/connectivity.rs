//! Vertex connectivity, highly connected subgraphs and disjoint path routing,
//! all on one unit-vertex-capacity flow network.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

const INF: i32 = i32::MAX / 4;

/// Residual network with integer capacities.
struct Flow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i32>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn arc(&mut self, u: usize, v: usize, c: i32) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Edmonds–Karp, stopping once `limit` units are routed.
    fn max_flow(&mut self, s: usize, t: usize, limit: i32) -> i32 {
        let mut total = 0;
        let mut pred = vec![usize::MAX; self.adj.len()];
        while total < limit {
            pred.iter_mut().for_each(|p| *p = usize::MAX);
            let mut q = VecDeque::from([s]);
            let mut reached = false;
            'bfs: while let Some(u) = q.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && pred[v] == usize::MAX && v != s {
                        pred[v] = e;
                        if v == t {
                            reached = true;
                            break 'bfs;
                        }
                        q.push_back(v);
                    }
                }
            }
            if !reached {
                break;
            }
            let mut bottleneck = INF;
            let mut v = t;
            while v != s {
                let e = pred[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = pred[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
        total
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[inline]
fn vin(v: usize) -> usize {
    2 * v
}
#[inline]
fn vout(v: usize) -> usize {
    2 * v + 1
}

/// Split network: `v_in → v_out` with capacity 1, each edge `u_out → v_in`
/// with infinite capacity. Endpoints get infinite internal capacity.
fn split_network(g: &Graph, extra: usize, uncapped: &[usize]) -> Flow {
    let n = g.order();
    let mut f = Flow::new(2 * n + extra);
    for v in 0..n {
        let c = if uncapped.contains(&v) { INF } else { 1 };
        f.arc(vin(v), vout(v), c);
    }
    for (u, v) in g.edges() {
        f.arc(vout(u), vin(v), INF);
        f.arc(vout(v), vin(u), INF);
    }
    f
}

/// Minimum `s`–`t` vertex separator for non-adjacent `s`, `t`, if its size is
/// below `limit`.
fn local_cut(g: &Graph, s: usize, t: usize, limit: usize) -> Option<Vec<usize>> {
    let mut f = split_network(g, 0, &[s, t]);
    let flow = f.max_flow(vout(s), vin(t), limit as i32) as usize;
    if flow >= limit {
        return None;
    }
    let r = f.reachable(vout(s));
    let cut: Vec<usize> = (0..g.order()).filter(|&v| r[vin(v)] && !r[vout(v)]).collect();
    debug_assert_eq!(cut.len(), flow);
    Some(cut)
}

/// A minimum vertex cut of size below `limit`, or `None` if `G` is
/// `limit`-connected (complete graphs have no cut at all).
///
/// Even's scheme: some vertex among the first `κ+1` lies outside a minimum
/// cut, so only pairs `(i, j)` with `i ≤ best` need a flow.
pub fn vertex_cut_below(g: &Graph, limit: usize) -> Option<Vec<usize>> {
    let n = g.order();
    let mut best: Option<Vec<usize>> = None;
    let mut bound = limit;
    let mut i = 0;
    while i < n && i <= bound {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            if let Some(cut) = local_cut(g, i, j, bound) {
                bound = cut.len();
                best = Some(cut);
            }
        }
        i += 1;
    }
    best
}

/// Exact vertex connectivity; `κ(K_n) = n − 1`.
pub fn vertex_connectivity(g: &Graph) -> usize {
    let n = g.order();
    if n <= 1 {
        return 0;
    }
    match vertex_cut_below(g, n - 1) {
        Some(cut) => cut.len(),
        None => n - 1,
    }
}

/// Whether `G[set]` is `k`-connected.
pub fn is_k_connected(g: &Graph, set: &[usize], k: usize) -> bool {
    if k == 0 {
        return true;
    }
    set.len() > k && vertex_cut_below(&g.induced(set), k).is_none()
}

/// A vertex set `H` with `G[H]` `(k+1)`-connected and `|H| ≥ k+2`.
///
/// Follows the extremal argument behind Mader's theorem. With
/// `γ = e(G)/|G|`, a subgraph `H` is kept only while `e(H) > γ(|H| − k)`.
/// Vertices of degree at most `γ` are dropped without breaking that, and a
/// cut of size at most `k` splits `H` into two sides, one of which keeps it.
/// Both sides are explored, the invariant-keeping one first.
pub fn find_highly_connected_subgraph(g: &Graph, k: usize) -> Result<Vec<usize>> {
    let n = g.order();
    let all: Vec<usize> = (0..n).collect();
    let (e0, n0) = (g.edge_count(), n.max(1));
    let mut seen = HashSet::new();
    // The γ pruning can discard every candidate when the theorem's density
    // hypothesis fails; the exhaustive decomposition settles those inputs.
    let found = search(g, k, all, e0, n0, &mut seen)
        .or_else(|| k_connected_pieces(g, k + 1).into_iter().find(|p| p.len() >= k + 2));
    match found {
        Some(h) => {
            if !is_k_connected(g, &h, k + 1) {
                return Err(Error::Internal(format!(
                    "extracted subgraph of {} vertices is not {}-connected",
                    h.len(),
                    k + 1
                )));
            }
            Ok(h)
        }
        None => Err(Error::NotFound(format!("no {}-connected subgraph", k + 1))),
    }
}

fn edges_within(g: &Graph, set: &VertexSet) -> usize {
    set.iter().map(|v| g.degree_in(v, set)).sum::<usize>() / 2
}

fn invariant(e: usize, h: usize, k: usize, e0: usize, n0: usize) -> bool {
    (e * n0) as i128 > (e0 as i128) * (h as i128 - k as i128)
}

fn search(
    g: &Graph,
    k: usize,
    h: Vec<usize>,
    e0: usize,
    n0: usize,
    seen: &mut HashSet<Vec<usize>>,
) -> Option<Vec<usize>> {
    let n = g.order();
    let mut set = VertexSet::from_iter_with_capacity(n, h.iter().copied());
    let holds = invariant(edges_within(g, &set), set.len(), k, e0, n0);
    // Degree ≤ k vertices can never sit in a (k+1)-connected subgraph; the
    // larger γ threshold is only safe while the invariant holds.
    loop {
        let drop: Vec<usize> = set
            .iter()
            .filter(|&v| {
                let d = g.degree_in(v, &set);
                d <= k || (holds && d * n0 <= e0)
            })
            .collect();
        if drop.is_empty() {
            break;
        }
        for v in drop {
            set.remove(v);
        }
    }
    let h = set.to_vec();
    if h.len() < k + 2 || !seen.insert(h.clone()) {
        return None;
    }
    let sub = g.induced(&h);
    let Some(cut) = vertex_cut_below(&sub, k + 1) else {
        return Some(h);
    };

    // Components of H − S, each side is C ∪ S and its complement.
    let cut_set = VertexSet::from_iter_with_capacity(h.len(), cut.iter().copied());
    let mut comp = vec![usize::MAX; h.len()];
    let mut ncomp = 0;
    for s in 0..h.len() {
        if comp[s] != usize::MAX || cut_set.contains(s) {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(u) = stack.pop() {
            for w in sub.neighbors(u) {
                if comp[w] == usize::MAX && !cut_set.contains(w) {
                    comp[w] = ncomp;
                    stack.push(w);
                }
            }
        }
        ncomp += 1;
    }
    let mut sides: Vec<(bool, i128, Vec<usize>)> = Vec::new();
    for c in 0..ncomp.min(2) {
        let side: Vec<usize> = (0..h.len())
            .filter(|&x| cut_set.contains(x) || if c == 0 { comp[x] == 0 } else { comp[x] != 0 })
            .map(|x| h[x])
            .collect();
        let sset = VertexSet::from_iter_with_capacity(n, side.iter().copied());
        let e = edges_within(g, &sset);
        let slack = (e * n0) as i128 - (e0 as i128) * (side.len() as i128 - k as i128);
        sides.push((slack > 0, slack, side));
    }
    sides.sort_by_key(|s| std::cmp::Reverse(s.1));
    for (_, _, side) in sides {
        if let Some(found) = search(g, k, side, e0, n0, seen) {
            return Some(found);
        }
    }
    None
}

/// Every maximal vertex set inducing a `k`-connected subgraph on more than
/// `k` vertices, sorted by size (largest first) and then lexicographically.
///
/// A `k`-connected subgraph never straddles a cut of fewer than `k`
/// vertices, so recursively splitting along such cuts finds them all.
pub fn k_connected_pieces(g: &Graph, k: usize) -> Vec<Vec<usize>> {
    let n = g.order();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut seen = HashSet::new();
    let mut stack = vec![(0..n).collect::<Vec<_>>()];
    while let Some(h) = stack.pop() {
        let mut set = VertexSet::from_iter_with_capacity(n, h.iter().copied());
        loop {
            let drop: Vec<usize> = set.iter().filter(|&v| g.degree_in(v, &set) < k).collect();
            if drop.is_empty() {
                break;
            }
            for v in drop {
                set.remove(v);
            }
        }
        let h = set.to_vec();
        if h.len() <= k || !seen.insert(h.clone()) {
            continue;
        }
        let sub = g.induced(&h);
        let Some(cut) = vertex_cut_below(&sub, k) else {
            out.push(h);
            continue;
        };
        let cut_set = VertexSet::from_iter_with_capacity(h.len(), cut.iter().copied());
        let mut comp = vec![usize::MAX; h.len()];
        let mut ncomp = 0;
        for s in 0..h.len() {
            if comp[s] != usize::MAX || cut_set.contains(s) {
                continue;
            }
            let mut st = vec![s];
            comp[s] = ncomp;
            while let Some(u) = st.pop() {
                for w in sub.neighbors(u) {
                    if comp[w] == usize::MAX && !cut_set.contains(w) {
                        comp[w] = ncomp;
                        st.push(w);
                    }
                }
            }
            ncomp += 1;
        }
        for c in 0..ncomp {
            let side: Vec<usize> = (0..h.len())
                .filter(|&x| cut_set.contains(x) || comp[x] == c)
                .map(|x| h[x])
                .collect();
            stack.push(side);
        }
    }
    // Drop pieces contained in larger ones.
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for p in out {
        if !kept.iter().any(|q| p.iter().all(|v| q.binary_search(v).is_ok())) {
            kept.push(p);
        }
    }
    kept
}

/// `k` pairwise vertex-disjoint paths, each from a distinct vertex of `a` to a
/// distinct vertex of `b`. Paths are listed in the order of their start in `a`.
pub fn disjoint_paths(g: &Graph, a: &[usize], b: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    if a.len() != k || b.len() != k {
        return Err(Error::Precondition(format!(
            "|A| = {}, |B| = {}, k = {k}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Precondition("A and B intersect".into()));
    }
    let n = g.order();
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut f = split_network(g, 2, &[]);
    for &x in a {
        f.arc(src, vin(x), 1);
    }
    for &y in b {
        f.arc(vout(y), snk, 1);
    }
    let flow = f.max_flow(src, snk, k as i32) as usize;
    if flow < k {
        return Err(Error::NoRouting {
            found: flow,
            needed: k,
        });
    }
    let bset: HashSet<usize> = b.iter().copied().collect();
    let mut paths = Vec::with_capacity(k);
    for &x in a {
        let mut path = vec![x];
        let mut v = x;
        while !bset.contains(&v) {
            // Follow the saturated arc out of v_out to the next v_in.
            let next = f.adj[vout(v)]
                .iter()
                .filter(|&&e| e % 2 == 0)
                .map(|&e| (e, f.to[e]))
                .find(|&(e, w)| w < 2 * n && w % 2 == 0 && f.cap[e ^ 1] > 0)
                .map(|(_, w)| w / 2);
            let Some(w) = next else {
                return Err(Error::Internal(format!("flow decomposition stuck at {v}")));
            };
            path.push(w);
            v = w;
        }
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    /// Smallest S whose removal disconnects G or leaves one vertex.
    pub fn brute_connectivity(g: &Graph) -> usize {
        let n = g.order();
        let mut best = n.saturating_sub(1);
        for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size >= best || n - size < 2 {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) == 0).collect();
            if !g.induced(&rest).is_connected() {
                best = size;
            }
        }
        best
    }

    fn check_paths(g: &Graph, a: &[usize], b: &[usize], paths: &[Vec<usize>]) {
        let mut used = HashSet::new();
        let mut ends = HashSet::new();
        for (p, &start) in paths.iter().zip(a) {
            assert_eq!(p[0], start);
            let last = *p.last().unwrap();
            assert!(b.contains(&last));
            assert!(ends.insert(last));
            for w in p.windows(2) {
                assert!(g.has_edge(w[0], w[1]));
            }
            for &v in p {
                assert!(used.insert(v), "vertex {v} reused");
            }
        }
    }

    #[test]
    fn small_connectivities() {
        assert_eq!(vertex_connectivity(&Graph::complete(5)), 4);
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(vertex_connectivity(&p4), 1);
        let mut two = Graph::new(4);
        two.add_edge(0, 1);
        two.add_edge(2, 3);
        assert_eq!(vertex_connectivity(&two), 0);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        for seed in 0..30 {
            let g = gnp(12, 0.4, seed);
            assert_eq!(vertex_connectivity(&g), brute_connectivity(&g), "seed {seed}");
        }
    }

    #[test]
    fn complete_graph_is_its_own_core() {
        for k in 1..4 {
            let g = Graph::complete(4 * k + 1);
            let h = find_highly_connected_subgraph(&g, k).unwrap();
            assert_eq!(h.len(), 4 * k + 1);
        }
    }

    #[test]
    fn two_cliques_sharing_a_vertex() {
        let mut g = Graph::new(11);
        for block in [[0, 1, 2, 3, 4, 5], [5, 6, 7, 8, 9, 10]] {
            for (i, &u) in block.iter().enumerate() {
                for &v in &block[i + 1..] {
                    g.add_edge(u, v);
                }
            }
        }
        let h = find_highly_connected_subgraph(&g, 2).unwrap();
        assert!(h == vec![0, 1, 2, 3, 4, 5] || h == vec![5, 6, 7, 8, 9, 10], "{h:?}");
    }

    #[test]
    fn dense_random_graphs_give_verified_cores() {
        for seed in 0..50 {
            let g = gnp(40, 0.5, seed);
            let h = find_highly_connected_subgraph(&g, 4).unwrap();
            assert!(vertex_connectivity(&g.induced(&h)) >= 5);
        }
    }

    #[test]
    fn forest_has_no_two_connected_part() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert!(matches!(find_highly_connected_subgraph(&g, 1), Err(Error::NotFound(_))));
        assert_eq!(find_highly_connected_subgraph(&g, 0).unwrap().len(), 5);
    }

    #[test]
    fn paths_in_complete_graph_are_edges() {
        let g = Graph::complete(8);
        let paths = disjoint_paths(&g, &[0, 1, 2], &[5, 6, 7], 3).unwrap();
        assert!(paths.iter().all(|p| p.len() == 2));
        check_paths(&g, &[0, 1, 2], &[5, 6, 7], &paths);
    }

    #[test]
    fn single_path_is_shortest() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 5), (0, 3), (3, 4), (4, 2)]);
        let paths = disjoint_paths(&g, &[0], &[5], 1).unwrap();
        assert_eq!(paths, vec![vec![0, 1, 2, 5]]);
    }

    #[test]
    fn routing_failure_reports_flow() {
        let g = Graph::from_edges(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]);
        match disjoint_paths(&g, &[0, 1], &[3, 4], 2) {
            Err(Error::NoRouting { found: 1, needed: 2 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_routings_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..50 {
            let g = gnp(25, 0.5, seed);
            if vertex_connectivity(&g) < 3 {
                continue;
            }
            let mut vs: Vec<usize> = (0..25).collect();
            rand::seq::SliceRandom::shuffle(&mut vs[..], &mut rng);
            let (a, b) = (&vs[..3], &vs[3..6]);
            let paths = disjoint_paths(&g, a, b, 3).unwrap();
            check_paths(&g, a, b, &paths);
        }
    }

    #[test]
    fn pieces_of_two_cliques() {
        let mut g = Graph::new(9);
        for block in [[0, 1, 2, 3], [3, 4, 5, 6]] {
            for (i, &u) in block.iter().enumerate() {
                for &v in &block[i + 1..] {
                    g.add_edge(u, v);
                }
            }
        }
        g.add_edge(7, 8);
        let pieces = k_connected_pieces(&g, 3);
        assert_eq!(pieces, vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6]]);
        assert_eq!(k_connected_pieces(&g, 1).len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn connectivity_agrees_with_cut_enumeration(seed in 0u64..100_000, n in 2usize..10, p in 0.2f64..0.9) {
            let g = gnp(n, p, seed);
            prop_assert_eq!(vertex_connectivity(&g), brute_connectivity(&g));
        }

        #[test]
        fn pieces_are_k_connected(seed in 0u64..100_000, n in 4usize..16, k in 1usize..4) {
            let g = gnp(n, 0.5, seed);
            for p in k_connected_pieces(&g, k) {
                prop_assert!(vertex_connectivity(&g.induced(&p)) >= k);
            }
        }

        #[test]
        fn extracted_cores_are_connected_enough(seed in 0u64..100_000, n in 6usize..20, k in 1usize..4) {
            let g = gnp(n, 0.7, seed);
            if let Ok(h) = find_highly_connected_subgraph(&g, k) {
                prop_assert!(h.len() >= k + 2);
                prop_assert!(vertex_connectivity(&g.induced(&h)) > k);
            }
        }
    }
}
