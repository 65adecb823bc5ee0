//! Graph collections: one graph per colour on a shared vertex set.

use std::io::{BufRead, Write};

use crate::error::{Error, ParseError, Result};
use crate::graph::{Graph, VertexSet};

/// An ordered list of graphs on `{0..n-1}`; colour `i` is position `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphCollection {
    n: usize,
    colours: Vec<Graph>,
}

impl GraphCollection {
    /// Panics if some graph is not on exactly `n` vertices.
    pub fn new(n: usize, colours: Vec<Graph>) -> Self {
        for (i, g) in colours.iter().enumerate() {
            assert_eq!(g.order(), n, "colour {i} has {} vertices, expected {n}", g.order());
        }
        Self { n, colours }
    }

    pub fn identical(g: &Graph, m: usize) -> Self {
        Self::new(g.order(), vec![g.clone(); m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.colours.len()
    }

    pub fn colour(&self, i: usize) -> &Graph {
        &self.colours[i]
    }

    pub fn colours(&self) -> &[Graph] {
        &self.colours
    }

    #[inline]
    pub fn has_edge(&self, colour: usize, u: usize, v: usize) -> bool {
        self.colours[colour].has_edge(u, v)
    }

    /// Colours whose graph contains `uv`.
    pub fn colours_of_edge(&self, u: usize, v: usize) -> Vec<usize> {
        (0..self.m()).filter(|&c| self.has_edge(c, u, v)).collect()
    }

    /// δ(𝒢): the minimum over colours and vertices of the degree.
    pub fn min_degree(&self) -> Result<usize> {
        if self.colours.is_empty() {
            return Err(Error::NoColours);
        }
        Ok(self.colours.iter().map(Graph::min_degree).min().unwrap_or(0))
    }

    /// Minimum over `colours` and vertices of `set` of the degree into `set`.
    pub fn min_degree_within(&self, colours: &[usize], set: &VertexSet) -> usize {
        colours
            .iter()
            .map(|&c| self.colours[c].min_degree_in(set))
            .min()
            .unwrap_or(0)
    }

    /// Sub-collection of the given colours, in the given order.
    pub fn select(&self, colours: &[usize]) -> GraphCollection {
        GraphCollection::new(self.n, colours.iter().map(|&c| self.colours[c].clone()).collect())
    }

    /// The graph of edges that lie in at least `min_count` colours.
    ///
    /// Averaging over the colours gives
    /// `δ(out) ≥ δ(𝒢) − (n−1)·min_count/m`.
    pub fn threshold_graph(&self, min_count: usize) -> Result<Graph> {
        let all: Vec<usize> = (0..self.m()).collect();
        self.threshold_graph_over(&all, min_count)
    }

    /// [`threshold_graph`](Self::threshold_graph) restricted to a colour subset.
    pub fn threshold_graph_over(&self, colours: &[usize], min_count: usize) -> Result<Graph> {
        if colours.is_empty() {
            return Err(Error::NoColours);
        }
        if min_count == 0 || min_count > colours.len() {
            return Err(Error::Precondition(format!(
                "min_count {min_count} outside 1..={}",
                colours.len()
            )));
        }
        let mut out = Graph::new(self.n);
        let mut counts = vec![0usize; self.n];
        for u in 0..self.n {
            counts.iter_mut().for_each(|c| *c = 0);
            for &c in colours {
                for v in self.colours[c].neighbors(u) {
                    if v > u {
                        counts[v] += 1;
                    }
                }
            }
            for (v, &k) in counts.iter().enumerate().skip(u + 1) {
                if k >= min_count {
                    out.add_edge(u, v);
                }
            }
        }
        Ok(out)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n, self.m())?;
        for (i, g) in self.colours.iter().enumerate() {
            let edges = g.edges();
            writeln!(w, "colour {} {}", i, edges.len())?;
            for (u, v) in edges {
                writeln!(w, "{u} {v}")?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_from<R: BufRead>(r: R) -> std::result::Result<Self, ParseError> {
        let mut lines = NumberedLines::new(r);
        let (hline, header) = lines
            .next_nonblank()?
            .ok_or_else(|| ParseError::Header { line: 1, msg: "empty input".into() })?;
        let hs = parse_ints(&header).map_err(|msg| ParseError::Header { line: hline, msg })?;
        let [n, m] = hs[..] else {
            return Err(ParseError::Header {
                line: hline,
                msg: format!("expected \"n m\", got {} fields", hs.len()),
            });
        };

        let mut colours = Vec::with_capacity(m);
        for i in 0..m {
            let (bl, block) = lines.next_nonblank()?.ok_or_else(|| ParseError::Truncated {
                line: lines.line,
                msg: format!("missing block for colour {i}"),
            })?;
            let mut parts = block.split_whitespace();
            if parts.next() != Some("colour") {
                return Err(ParseError::Malformed {
                    line: bl,
                    msg: format!("expected \"colour {i} <edges>\""),
                });
            }
            let rest: Vec<&str> = parts.collect();
            let nums = parse_ints(&rest.join(" ")).map_err(|msg| ParseError::Malformed { line: bl, msg })?;
            let [idx, e] = nums[..] else {
                return Err(ParseError::Malformed {
                    line: bl,
                    msg: "expected \"colour i e_i\"".into(),
                });
            };
            if idx != i {
                return Err(ParseError::Malformed {
                    line: bl,
                    msg: format!("colour index {idx}, expected {i}"),
                });
            }
            let mut g = Graph::new(n);
            for _ in 0..e {
                let (el, text) = lines.next_nonblank()?.ok_or_else(|| ParseError::Truncated {
                    line: lines.line,
                    msg: format!("colour {i} declares {e} edges"),
                })?;
                let (u, v) = parse_edge(&text, el, n)?;
                if !g.add_edge(u, v) {
                    return Err(ParseError::DuplicateEdge { line: el, colour: i, u, v });
                }
            }
            colours.push(g);
        }
        if let Some((l, _)) = lines.next_nonblank()? {
            return Err(ParseError::Malformed {
                line: l,
                msg: "trailing content after last colour".into(),
            });
        }
        Ok(GraphCollection { n, colours })
    }

    pub fn from_text(s: &str) -> std::result::Result<Self, ParseError> {
        Self::read_from(s.as_bytes())
    }
}

/// Parses `u v` with `0 ≤ u < v < n`.
pub(crate) fn parse_edge(text: &str, line: usize, n: usize) -> std::result::Result<(usize, usize), ParseError> {
    let nums = parse_ints(text).map_err(|msg| ParseError::Malformed { line, msg })?;
    let [u, v] = nums[..] else {
        return Err(ParseError::Malformed {
            line,
            msg: format!("expected \"u v\", got {} fields", nums.len()),
        });
    };
    for x in [u, v] {
        if x >= n {
            return Err(ParseError::VertexOutOfRange { line, vertex: x, n });
        }
    }
    if u >= v {
        return Err(ParseError::Malformed {
            line,
            msg: format!("edge {u} {v} must satisfy u < v"),
        });
    }
    Ok((u, v))
}

pub(crate) fn parse_ints(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| format!("not a non-negative integer: {t:?}")))
        .collect()
}

/// Line reader that tracks 1-based line numbers and skips blank lines.
pub(crate) struct NumberedLines<R> {
    inner: std::io::Lines<R>,
    pub line: usize,
}

impl<R: BufRead> NumberedLines<R> {
    pub fn new(r: R) -> Self {
        Self { inner: r.lines(), line: 0 }
    }

    pub fn next_nonblank(&mut self) -> std::result::Result<Option<(usize, String)>, ParseError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l.map_err(|e| ParseError::Io(e.to_string()))?;
            if !l.trim().is_empty() {
                return Ok(Some((self.line, l)));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, p: f64, seed: u64) -> GraphCollection {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let colours = (0..m)
            .map(|_| {
                let mut g = Graph::new(n);
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen_bool(p) {
                            g.add_edge(u, v);
                        }
                    }
                }
                g
            })
            .collect();
        GraphCollection::new(n, colours)
    }

    #[test]
    fn min_degree_of_complete_copies() {
        let c = GraphCollection::identical(&Graph::complete(4), 3);
        assert_eq!(c.min_degree().unwrap(), 3);
        let c = GraphCollection::new(4, vec![Graph::complete(4), Graph::new(4)]);
        assert_eq!(c.min_degree().unwrap(), 0);
        assert!(matches!(GraphCollection::new(4, vec![]).min_degree(), Err(Error::NoColours)));
    }

    #[test]
    fn min_degree_matches_edge_list_recount() {
        for seed in 0..10 {
            let c = random(20, 1, 0.5, seed);
            let mut deg = [0usize; 20];
            for (u, v) in c.colour(0).edges() {
                deg[u] += 1;
                deg[v] += 1;
            }
            assert_eq!(c.min_degree().unwrap(), *deg.iter().min().unwrap());
        }
    }

    #[test]
    fn threshold_of_identical_and_sparse() {
        let c = GraphCollection::identical(&Graph::complete(5), 3);
        assert_eq!(c.threshold_graph(2).unwrap(), Graph::complete(5));
        let c = GraphCollection::new(
            3,
            vec![Graph::from_edges(3, &[(0, 1)]), Graph::new(3), Graph::new(3)],
        );
        assert!(!c.threshold_graph(2).unwrap().has_edge(0, 1));
        assert!(c.threshold_graph(0).is_err());
        assert!(c.threshold_graph(4).is_err());
    }

    #[test]
    fn threshold_inequality_on_seeds() {
        for seed in 0..100 {
            let c = random(20, 10, 0.5, seed);
            let d = c.min_degree().unwrap() as i64;
            for k in 1..=10 {
                let g = c.threshold_graph(k).unwrap();
                // δ(out)·m ≥ δ(𝒢)·m − (n−1)·k, all integers
                assert!(g.min_degree() as i64 * 10 >= d * 10 - 19 * k as i64);
            }
        }
    }

    #[test]
    fn round_trip_small() {
        let c = GraphCollection::new(3, vec![Graph::new(3), Graph::new(3)]);
        assert_eq!(GraphCollection::from_text(&c.to_text()).unwrap(), c);
        let c = GraphCollection::new(2, vec![Graph::from_edges(2, &[(0, 1)])]);
        assert_eq!(c.to_text(), "2 1\ncolour 0 1\n0 1\n");
        assert_eq!(GraphCollection::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn round_trip_random() {
        for seed in 0..50 {
            let c = random(12, 5, 0.4, seed);
            assert_eq!(GraphCollection::from_text(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            GraphCollection::from_text("3\n"),
            Err(ParseError::Header { line: 1, .. })
        ));
        assert!(matches!(
            GraphCollection::from_text("3 1\ncolour 0 1\n\n0 3\n"),
            Err(ParseError::VertexOutOfRange { line: 4, vertex: 3, .. })
        ));
        assert!(matches!(
            GraphCollection::from_text("3 1\ncolour 0 2\n0 1\n0 1\n"),
            Err(ParseError::DuplicateEdge { line: 4, colour: 0, .. })
        ));
        assert!(matches!(
            GraphCollection::from_text("3 1\ncolour 0 2\n0 1\n"),
            Err(ParseError::Truncated { .. })
        ));
    }

    proptest! {
        #[test]
        fn threshold_monotone_and_extremes(seed in 0u64..10_000, n in 2usize..14, m in 1usize..7) {
            let c = random(n, m, 0.5, seed);
            let mut prev = c.threshold_graph(1).unwrap();
            let mut union = Graph::new(n);
            let mut inter = Graph::complete(n);
            for g in c.colours() {
                for (u, v) in g.edges() { union.add_edge(u, v); }
                for (u, v) in Graph::complete(n).edges() {
                    if !g.has_edge(u, v) { inter.remove_edge(u, v); }
                }
            }
            prop_assert_eq!(&prev, &union);
            for k in 2..=m {
                let g = c.threshold_graph(k).unwrap();
                for (u, v) in g.edges() { prop_assert!(prev.has_edge(u, v)); }
                prev = g;
            }
            prop_assert_eq!(&prev, &inter);
        }

        #[test]
        fn threshold_inequality_exact(seed in 0u64..10_000, n in 2usize..20, m in 1usize..12, k in 1usize..12) {
            prop_assume!(k <= m);
            let c = random(n, m, 0.6, seed);
            let g = c.threshold_graph(k).unwrap();
            let lhs = (g.min_degree() * m) as i64;
            let rhs = (c.min_degree().unwrap() * m) as i64 - ((n - 1) * k) as i64;
            prop_assert!(lhs >= rhs);
        }
    }
}
