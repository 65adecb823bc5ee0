use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::collection::{parse_ints, GraphCollection, NumberedLines};
use crate::embedding::RainbowEmbedding;
use crate::error::{Error, ParseError, Result};
use crate::graph::Graph;
use crate::oracle::{factor_template, verify_transversal, TransversalMode, TransversalViolation};

/// The graph `F` being tiled, its colour budget `t` per copy and the
/// minimum-degree thresholds the pipelines are tuned against.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpec {
    pub name: String,
    pub f: Graph,
    pub t: usize,
    pub has_bridge: bool,
    pub chi: usize,
    pub delta_f: f64,
    pub delta_t_f: f64,
    /// `None` where no value is known, which is most graphs.
    pub delta_p_f: Option<f64>,
}

impl FactorSpec {
    pub fn new(name: impl Into<String>, f: Graph, t: usize, delta_f: f64, delta_p_f: Option<f64>) -> Result<Self> {
        let e = f.edge_count();
        if e == 0 {
            return Err(Error::Precondition("F needs at least one edge".into()));
        }
        if t != 1 && t != e {
            return Err(Error::Precondition(format!("t = {t} must be 1 or e(F) = {e}")));
        }
        let chi = chromatic_number(&f);
        let floor = 1.0 - 1.0 / (chi as f64 - 1.0);
        if delta_f < floor - 1e-12 {
            return Err(Error::Precondition(format!(
                "delta_F = {delta_f} is below 1 - 1/(chi - 1) = {floor}"
            )));
        }
        let has_bridge = has_bridge(&f);
        let mut spec = FactorSpec {
            name: name.into(),
            f,
            t,
            has_bridge,
            chi,
            delta_f,
            delta_t_f: 0.0,
            delta_p_f,
        };
        spec.delta_t_f = spec.transversal_threshold();
        Ok(spec)
    }

    fn transversal_threshold(&self) -> f64 {
        if self.t == 1 || self.has_bridge || self.delta_f >= 0.5 {
            self.delta_f
        } else {
            0.5
        }
    }

    /// Same `F` with another colour budget.
    pub fn with_t(&self, t: usize) -> Result<Self> {
        FactorSpec::new(self.name.clone(), self.f.clone(), t, self.delta_f, self.delta_p_f)
    }

    pub fn r(&self) -> usize {
        self.f.order()
    }

    pub fn e(&self) -> usize {
        self.f.edge_count()
    }
}

fn chromatic_number(f: &Graph) -> usize {
    fn colourable(f: &Graph, k: usize, v: usize, col: &mut Vec<usize>) -> bool {
        if v == f.order() {
            return true;
        }
        for c in 0..k {
            if f.neighbors(v).all(|w| w >= v || col[w] != c) {
                col[v] = c;
                if colourable(f, k, v + 1, col) {
                    return true;
                }
            }
        }
        false
    }
    let mut col = vec![0; f.order()];
    (1..=f.order().max(1)).find(|&k| colourable(f, k, 0, &mut col)).unwrap_or(1)
}

fn has_bridge(f: &Graph) -> bool {
    f.edges().into_iter().any(|(u, v)| {
        let mut g = f.clone();
        g.remove_edge(u, v);
        let mut seen = vec![false; g.order()];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            for y in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        !seen[v]
    })
}

/// Looks up `K3`, `C5`, `P4`, `K1,3` and the like (underscores and braces
/// are ignored). `t` defaults to `e(F)`.
///
/// Thresholds: cliques and the patterned values are exact; the others use
/// the critical chromatic number, `1 - 1/χ_cr`, and `1/2` for even cycles.
pub fn builtin_spec(name: &str) -> Result<FactorSpec> {
    let key: String = name.chars().filter(|c| !matches!(c, '_' | '{' | '}' | ' ')).collect();
    let unsupported = || Error::Precondition(format!("unsupported F: {name:?}"));
    let num = |s: &str| s.parse::<usize>().map_err(|_| unsupported());
    let (f, delta, delta_p) = if let Some(s) = key.strip_prefix("K1,") {
        let s = num(s)?;
        if !(1..=5).contains(&s) {
            return Err(unsupported());
        }
        let edges: Vec<_> = (1..=s).map(|i| (0, i)).collect();
        (Graph::from_edges(s + 1, &edges), 1.0 / (s as f64 + 1.0), None)
    } else if let Some(r) = key.strip_prefix('K') {
        let r = num(r)?;
        if !(2..=6).contains(&r) {
            return Err(unsupported());
        }
        let d = 1.0 - 1.0 / r as f64;
        (Graph::complete(r), d, Some(d))
    } else if let Some(k) = key.strip_prefix('C') {
        let k = num(k)?;
        if !(3..=8).contains(&k) {
            return Err(unsupported());
        }
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        let kf = k as f64;
        let d = if k % 2 == 1 { (kf + 1.0) / (2.0 * kf) } else { 0.5 };
        (Graph::from_edges(k, &edges), d, Some((1.0 + 1.0 / kf) / 2.0))
    } else if let Some(k) = key.strip_prefix('P') {
        let k = num(k)?;
        if !(2..=8).contains(&k) {
            return Err(unsupported());
        }
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        let d = (k / 2) as f64 / k as f64;
        (Graph::from_edges(k, &edges), d, (k == 2).then_some(0.5))
    } else {
        return Err(unsupported());
    };
    let e = f.edge_count();
    FactorSpec::new(key, f, e, delta, delta_p)
}

/// One copy of `F`: `vertices[a]` hosts vertex `a` of `F`, `colours[k]` is
/// the colour of `F`'s `k`-th edge in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FCopy {
    pub vertices: Vec<usize>,
    pub colours: Vec<usize>,
    /// Index of the pattern this copy follows, for patterned factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FtFactor {
    pub copies: Vec<FCopy>,
}

impl FtFactor {
    /// The factor as an embedding of disjoint copies of `F`.
    pub fn to_embedding(&self, f: &Graph) -> (Graph, RainbowEmbedding) {
        let r = f.order();
        let template = factor_template(f, self.copies.len());
        let mut emb = RainbowEmbedding::new(self.copies.iter().flat_map(|c| c.vertices.iter().copied()).collect());
        for (q, c) in self.copies.iter().enumerate() {
            for (k, (a, b)) in f.edges().into_iter().enumerate() {
                if let Some(&col) = c.colours.get(k) {
                    emb.set_colour(q * r + a, q * r + b, col);
                }
            }
        }
        (template, emb)
    }

    /// Checks the copies as an (F,t)-factor, without requiring it to span.
    pub fn verify_partial(&self, coll: &GraphCollection, spec: &FactorSpec) -> std::result::Result<(), TransversalViolation> {
        let (template, emb) = self.to_embedding(&spec.f);
        verify_transversal(coll, &emb, &template, &TransversalMode::Factor { r: spec.r(), t: spec.t })
    }

    /// Checks the copies as a spanning (F,t)-factor.
    pub fn verify(&self, coll: &GraphCollection, spec: &FactorSpec) -> std::result::Result<(), TransversalViolation> {
        self.check_spanning(coll, spec)?;
        self.verify_partial(coll, spec)
    }

    /// Checks a spanning factor whose copy `q` follows `patterns[copy.pattern]`.
    pub fn verify_patterned(
        &self,
        coll: &GraphCollection,
        spec: &FactorSpec,
        patterns: &[Vec<usize>],
    ) -> std::result::Result<(), TransversalViolation> {
        self.check_spanning(coll, spec)?;
        let mut per_copy = Vec::with_capacity(self.copies.len());
        for c in &self.copies {
            let p = c.pattern.and_then(|p| patterns.get(p)).cloned().unwrap_or_default();
            per_copy.push(p);
        }
        let mut used = vec![false; patterns.len()];
        for (q, c) in self.copies.iter().enumerate() {
            if let Some(p) = c.pattern.filter(|&p| p < patterns.len()) {
                if std::mem::replace(&mut used[p], true) {
                    return Err(TransversalViolation::PatternCount { have: q, need: self.copies.len() });
                }
            }
        }
        let (template, emb) = self.to_embedding(&spec.f);
        verify_transversal(coll, &emb, &template, &TransversalMode::Patterned { r: spec.r(), patterns: per_copy })
    }

    fn check_spanning(&self, coll: &GraphCollection, spec: &FactorSpec) -> std::result::Result<(), TransversalViolation> {
        let covered = self.copies.len() * spec.r();
        if covered != coll.n() {
            return Err(TransversalViolation::NotSpanning { covered, n: coll.n() });
        }
        Ok(())
    }

    /// Colours in use, sorted.
    pub fn colours_used(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.copies.iter().flat_map(|c| c.colours.iter().copied()).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Reads one pattern per line, each `e` colour indices below `m`.
pub fn read_patterns<R: BufRead>(r: R, e: usize, m: usize) -> std::result::Result<Vec<Vec<usize>>, ParseError> {
    let mut lines = NumberedLines::new(r);
    let mut out = Vec::new();
    while let Some((line, text)) = lines.next_nonblank()? {
        let nums = parse_ints(&text).map_err(|msg| ParseError::Malformed { line, msg })?;
        if nums.len() != e {
            return Err(ParseError::Malformed { line, msg: format!("expected {e} colours, got {}", nums.len()) });
        }
        if let Some(&c) = nums.iter().find(|&&c| c >= m) {
            return Err(ParseError::Malformed { line, msg: format!("colour {c} out of range (m = {m})") });
        }
        out.push(nums);
    }
    Ok(out)
}

pub fn patterns_to_text(patterns: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for p in patterns {
        let line: Vec<String> = p.iter().map(usize::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Whether `patterns` use every colour of `[m]` exactly once, `e` per pattern.
pub fn check_patterns(patterns: &[Vec<usize>], e: usize, m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for (i, p) in patterns.iter().enumerate() {
        if p.len() != e {
            return Err(Error::Precondition(format!("pattern {i} has {} colours, F has {e} edges", p.len())));
        }
        for &c in p {
            if c >= m || std::mem::replace(&mut seen[c], true) {
                return Err(Error::Precondition(format!("pattern {i}: colour {c} out of range or repeated")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Precondition("patterns do not cover every colour".into()));
    }
    Ok(())
}
