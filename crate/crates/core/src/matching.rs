//! Maximum bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// A maximum matching between left vertices `0..adj.len()` and right vertices
/// `0..n_right`. `adj[l]` lists the right neighbours of `l`, tried in order.
///
/// Returns `mate[l]`, the right partner of each left vertex.
pub fn max_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    HopcroftKarp::new(adj, n_right).run()
}

/// Size of a maximum matching.
pub fn matching_size(adj: &[Vec<usize>], n_right: usize) -> usize {
    max_matching(adj, n_right).iter().filter(|m| m.is_some()).count()
}

/// A matching saturating every left vertex, if one exists.
pub fn perfect_left(adj: &[Vec<usize>], n_right: usize) -> Option<Vec<usize>> {
    max_matching(adj, n_right).into_iter().collect()
}

struct HopcroftKarp<'a> {
    adj: &'a [Vec<usize>],
    left: Vec<usize>,
    right: Vec<usize>,
    dist: Vec<usize>,
}

impl<'a> HopcroftKarp<'a> {
    fn new(adj: &'a [Vec<usize>], n_right: usize) -> Self {
        Self {
            adj,
            left: vec![NIL; adj.len()],
            right: vec![NIL; n_right],
            dist: vec![0; adj.len()],
        }
    }

    fn bfs(&mut self) -> bool {
        let mut q = VecDeque::new();
        for l in 0..self.adj.len() {
            if self.left[l] == NIL {
                self.dist[l] = 0;
                q.push_back(l);
            } else {
                self.dist[l] = NIL;
            }
        }
        let mut found = false;
        while let Some(l) = q.pop_front() {
            for &r in &self.adj[l] {
                let m = self.right[r];
                if m == NIL {
                    found = true;
                } else if self.dist[m] == NIL {
                    self.dist[m] = self.dist[l] + 1;
                    q.push_back(m);
                }
            }
        }
        found
    }

    fn dfs(&mut self, l: usize) -> bool {
        for i in 0..self.adj[l].len() {
            let r = self.adj[l][i];
            let m = self.right[r];
            if m == NIL || (self.dist[m] == self.dist[l] + 1 && self.dfs(m)) {
                self.left[l] = r;
                self.right[r] = l;
                return true;
            }
        }
        self.dist[l] = NIL;
        false
    }

    fn run(mut self) -> Vec<Option<usize>> {
        while self.bfs() {
            for l in 0..self.adj.len() {
                if self.left[l] == NIL {
                    self.dfs(l);
                }
            }
        }
        self.left
            .into_iter()
            .map(|r| (r != NIL).then_some(r))
            .collect()
    }
}
