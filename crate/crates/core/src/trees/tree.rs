use std::io::BufRead;

use crate::collection::{parse_edge, parse_ints, NumberedLines};
use crate::error::{Error, ParseError, Result};
use crate::graph::Graph;

/// A tree on `{0..n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
}

impl Tree {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Tree> {
        if n == 0 {
            return Err(Error::Precondition("a tree needs at least one vertex".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::Precondition(format!(
                "{} edges on {n} vertices is not a tree",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Precondition(format!("bad tree edge {u} {v}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
            let len = a.len();
            a.dedup();
            if a.len() != len {
                return Err(Error::Precondition("repeated tree edge".into()));
            }
        }
        let t = Tree { adj };
        if t.preorder(0).len() != n {
            return Err(Error::Precondition("tree edges do not connect all vertices".into()));
        }
        Ok(t)
    }

    pub fn path(n: usize) -> Tree {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Tree::new(n, &edges).expect("a path is a tree")
    }

    pub fn star(leaves: usize) -> Tree {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Tree::new(leaves + 1, &edges).expect("a star is a tree")
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn to_graph(&self) -> Graph {
        Graph::from_edges(self.order(), &self.edges())
    }

    /// Vertices in DFS preorder from `root`, neighbours in index order.
    pub fn preorder(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::with_capacity(self.order());
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            out.push(u);
            for &w in self.adj[u].iter().rev() {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Parent of each vertex when rooted at `root` (`usize::MAX` for the root).
    pub fn parents(&self, root: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.order()];
        for u in self.preorder(root) {
            for &w in &self.adj[u] {
                if w != parent[u] {
                    parent[w] = u;
                }
            }
        }
        parent
    }

    pub fn whole(&self) -> Piece {
        Piece {
            vertices: (0..self.order()).collect(),
            edges: self.edges(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.order());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn read_from<R: BufRead>(r: R) -> std::result::Result<Tree, ParseError> {
        let mut lines = NumberedLines::new(r);
        let (hl, header) = lines
            .next_nonblank()?
            .ok_or_else(|| ParseError::Header { line: 1, msg: "empty input".into() })?;
        let nums = parse_ints(&header).map_err(|msg| ParseError::Header { line: hl, msg })?;
        let [n] = nums[..] else {
            return Err(ParseError::Header {
                line: hl,
                msg: "expected a single vertex count".into(),
            });
        };
        if n == 0 {
            return Err(ParseError::Header { line: hl, msg: "empty tree".into() });
        }
        let mut edges = Vec::with_capacity(n - 1);
        let mut g = Graph::new(n);
        for _ in 1..n {
            let (l, text) = lines.next_nonblank()?.ok_or_else(|| ParseError::Truncated {
                line: lines.line,
                msg: format!("tree on {n} vertices needs {} edges", n - 1),
            })?;
            let (u, v) = parse_edge(&text, l, n)?;
            if !g.add_edge(u, v) {
                return Err(ParseError::DuplicateEdge { line: l, colour: 0, u, v });
            }
            edges.push((u, v));
        }
        if let Some((l, _)) = lines.next_nonblank()? {
            return Err(ParseError::Malformed { line: l, msg: "trailing content".into() });
        }
        Tree::new(n, &edges).map_err(|e| ParseError::Malformed {
            line: lines.line,
            msg: e.to_string(),
        })
    }

    pub fn from_text(s: &str) -> std::result::Result<Tree, ParseError> {
        Self::read_from(s.as_bytes())
    }
}

/// A subtree, in the labels of the tree it came from.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Piece {
    /// Sorted.
    pub vertices: Vec<usize>,
    /// Sorted, each `(u, v)` with `u < v`.
    pub edges: Vec<(usize, usize)>,
}

impl Piece {
    pub fn single(v: usize) -> Piece {
        Piece {
            vertices: vec![v],
            edges: Vec::new(),
        }
    }

    fn from_edges(mut edges: Vec<(usize, usize)>, fallback: usize) -> Piece {
        edges.sort_unstable();
        let mut vertices: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        if vertices.is_empty() {
            vertices.push(fallback);
        }
        vertices.sort_unstable();
        vertices.dedup();
        Piece { vertices, edges }
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// The piece as a standalone tree; `labels[i]` is the original label of
    /// local vertex `i`.
    pub fn to_tree(&self) -> (Tree, Vec<usize>) {
        let local = |v: usize| self.vertices.binary_search(&v).expect("edge endpoint in piece");
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (local(u), local(v))).collect();
        let t = Tree::new(self.vertices.len(), &edges).expect("pieces are trees");
        (t, self.vertices.clone())
    }

    /// The single vertex shared with `other`, if exactly one.
    pub fn shared_vertex(&self, other: &Piece) -> Option<usize> {
        let common: Vec<usize> = self.vertices.iter().copied().filter(|&v| other.contains(v)).collect();
        (common.len() == 1).then(|| common[0])
    }

    pub fn union(&self, other: &Piece) -> Piece {
        let mut e = self.edges.clone();
        e.extend_from_slice(&other.edges);
        let mut p = Piece::from_edges(e, self.vertices[0]);
        p.vertices.extend(self.vertices.iter().chain(&other.vertices));
        p.vertices.sort_unstable();
        p.vertices.dedup();
        p
    }
}

/// Splits `piece` into `(T₁, T₂)`, edge-disjoint, covering it, sharing one
/// vertex, with `t ∈ T₁` and `m ≤ |T₂| ≤ 2m`.
pub fn split_piece(piece: &Piece, t: usize, m: usize) -> Result<(Piece, Piece)> {
    if m == 0 || 3 * m > piece.order() {
        return Err(Error::Precondition(format!(
            "split size {m} outside 1..={}",
            piece.order() / 3
        )));
    }
    if !piece.contains(t) {
        return Err(Error::Precondition(format!("vertex {t} not in the tree")));
    }
    let (tree, labels) = piece.to_tree();
    let root = piece.vertices.binary_search(&t).expect("checked above");
    let parent = tree.parents(root);
    let order = tree.preorder(root);
    let mut size = vec![1usize; tree.order()];
    for &u in order.iter().rev() {
        if parent[u] != usize::MAX {
            size[parent[u]] += size[u];
        }
    }
    let children = |u: usize| -> Vec<usize> {
        tree.neighbors(u).iter().copied().filter(|&w| w != parent[u]).collect()
    };

    // Descend to x with size(x) ≥ d whose children are all smaller than d,
    // then take x with children until past m. With d ≥ 2 some edge is taken.
    let d = m.max(2);
    let mut x = root;
    while let Some(c) = children(x).into_iter().find(|&c| size[c] >= d) {
        x = c;
    }
    let mut group = Vec::new();
    let mut acc = 1;
    for c in children(x) {
        if acc > m {
            break;
        }
        group.push(c);
        acc += size[c];
    }
    let mut in_t2 = vec![false; tree.order()];
    in_t2[x] = true;
    let mut stack = group.clone();
    while let Some(u) = stack.pop() {
        in_t2[u] = true;
        stack.extend(children(u));
    }
    let (mut e1, mut e2) = (Vec::new(), Vec::new());
    for (u, v) in tree.edges() {
        let e = crate::embedding::edge_key(labels[u], labels[v]);
        // An edge lies in T₂ when its lower endpoint (the child) does and it
        // is not x's parent edge.
        let child = if parent[u] == v { u } else { v };
        if in_t2[child] && child != x {
            e2.push(e);
        } else {
            e1.push(e);
        }
    }
    Ok((Piece::from_edges(e1, labels[x]), Piece::from_edges(e2, labels[x])))
}

/// [`split_piece`] on a whole tree.
pub fn split_tree(tree: &Tree, t: usize, m: usize) -> Result<(Piece, Piece)> {
    split_piece(&tree.whole(), t, m)
}

/// Edge-disjoint subtrees covering the tree, each with `m ≤ |T_i| ≤ 4m`,
/// ordered so every prefix union is connected; the first contains `root`.
pub fn decompose_piece(piece: &Piece, m: usize, root: usize) -> Result<Vec<Piece>> {
    if m == 0 || m > piece.order() {
        return Err(Error::Precondition(format!(
            "block size {m} outside 1..={}",
            piece.order()
        )));
    }
    let mut cur = piece.clone();
    let mut split_off = Vec::new();
    while cur.order() > 4 * m {
        let (rest, part) = split_piece(&cur, root, m)?;
        split_off.push(part);
        cur = rest;
    }
    let mut out = vec![cur];
    out.extend(split_off.into_iter().rev());
    Ok(out)
}

pub fn decompose_tree(tree: &Tree, m: usize) -> Result<Vec<Piece>> {
    decompose_piece(&tree.whole(), m, 0)
}

/// Four pieces with `T₁ ∪ T₂` and `T₁ ∪ T₂ ∪ T₃` connected, plus the
/// attachment vertices `t₁ ∈ T₁ ∩ T₂`, `t₂ ∈ (T₁ ∪ T₂) ∩ T₃` and
/// `t₃ ∈ (T₁ ∪ T₂ ∪ T₃) ∩ T₄`.
#[derive(Clone, Debug)]
pub struct FourSplit {
    pub parts: [Piece; 4],
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
}

pub fn split_four(tree: &Tree, m1: usize, m3: usize, m4: usize) -> Result<FourSplit> {
    let n = tree.order();
    for (name, m) in [("m1", m1), ("m3", m3), ("m4", m4)] {
        if m == 0 || 10 * m > n {
            return Err(Error::Precondition(format!("{name} = {m} outside 1..={}", n / 10)));
        }
    }
    let (rest, t1_piece) = split_tree(tree, 0, m1)?;
    let t1 = rest
        .shared_vertex(&t1_piece)
        .ok_or_else(|| Error::Internal("T1 does not meet the rest in one vertex".into()))?;
    let (rest2, t4_piece) = split_piece(&rest, t1, m4)?;
    let (t2_piece, t3_piece) = split_piece(&rest2, t1, m3)?;
    let t2 = t2_piece
        .shared_vertex(&t3_piece)
        .ok_or_else(|| Error::Internal("T3 does not meet T2 in one vertex".into()))?;
    let t3 = rest2
        .shared_vertex(&t4_piece)
        .ok_or_else(|| Error::Internal("T4 does not meet the rest in one vertex".into()))?;
    Ok(FourSplit {
        parts: [t1_piece, t2_piece, t3_piece, t4_piece],
        t1,
        t2,
        t3,
    })
}
