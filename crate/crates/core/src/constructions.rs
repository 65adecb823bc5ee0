//! Extremal instances and random benchmark collections.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collection::GraphCollection;
use crate::error::{Error, Result};
use crate::factors::FactorSpec;
use crate::graph::Graph;
use crate::trees::Tree;

/// Construction parameters written next to a generated instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub construction: String,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_degree: Option<usize>,
}

impl GenMeta {
    pub fn new(construction: &str) -> Self {
        GenMeta { construction: construction.into(), ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

/// Halves `A`, `B` of sizes `⌊rn/2⌋`, `⌈rn/2⌉`; every colour but the last is
/// two disjoint cliques on them, the last is complete bipartite between
/// them. No rainbow F-factor exists for bridgeless `F`: a copy meeting both
/// halves needs two crossing edges.
pub fn bridgeless_lower_bound(spec: &FactorSpec, n_copies: usize) -> Result<GraphCollection> {
    if spec.has_bridge {
        return Err(Error::Precondition(format!("{} has a bridge; the construction needs a bridgeless F", spec.name)));
    }
    if spec.t != spec.e() {
        return Err(Error::Precondition("the construction is for t = e(F)".into()));
    }
    if n_copies == 0 {
        return Err(Error::Precondition("need at least one copy".into()));
    }
    let n = spec.r() * n_copies;
    let m = spec.t * n_copies;
    let half = n / 2;
    let mut cliques = Graph::new(n);
    let mut bip = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if (u < half) == (v < half) {
                cliques.add_edge(u, v);
            } else {
                bip.add_edge(u, v);
            }
        }
    }
    let mut colours = vec![cliques; m - 1];
    colours.push(bip);
    Ok(GraphCollection::new(n, colours))
}

/// The classical round-robin 1-factorization: `v − 1` perfect matchings
/// partitioning `E(K_v)`.
pub fn round_robin_one_factorization(v: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if v == 0 || v % 2 == 1 {
        return Err(Error::Precondition(format!("v = {v} must be even and positive")));
    }
    let k = v - 1;
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    Ok((0..k)
        .map(|i| {
            let mut m = vec![key(i, k)];
            for j in 1..v / 2 {
                m.push(key((i + j) % k, (i + k - j) % k));
            }
            m.sort_unstable();
            m
        })
        .collect())
}

/// A collection with a prescribed colour per edge of `K_{t,t}` and no copy
/// respecting it.
#[derive(Clone, Debug)]
pub struct PatternedCounterexample {
    pub collection: GraphCollection,
    /// `K_{t,t}` on `0..t` and `t..2t`; its `i`-th lexicographic edge is `e_i`.
    pub template: Graph,
    /// `φ(e_i) = i`.
    pub pattern: Vec<usize>,
    /// `ψ(e_i) ∈ [k]`, the matching whose part pairs `G_i` misses.
    pub psi: Vec<usize>,
    pub parts: Vec<Vec<usize>>,
    pub floor: usize,
    pub min_degree: usize,
}

/// Whether every `A' × B'` with both sides at least `floor` meets all `k`
/// values of `psi` (indexed `a·t + b`). Exhaustive for `t ≤ 12`, sampled
/// otherwise.
pub fn has_property_r<R: Rng>(psi: &[usize], t: usize, k: usize, floor: usize, rng: &mut R) -> bool {
    let covers = |a: u64, b: u64| {
        let mut seen = 0u64;
        for x in (0..t).filter(|x| a >> x & 1 == 1) {
            for y in (0..t).filter(|y| b >> y & 1 == 1) {
                seen |= 1 << psi[x * t + y];
            }
        }
        seen.count_ones() as usize == k
    };
    if t <= 12 {
        // Minimal sides suffice: supersets only add values.
        let subsets: Vec<u64> = (0u64..1 << t).filter(|s| s.count_ones() as usize == floor.min(t)).collect();
        subsets.iter().all(|&a| subsets.iter().all(|&b| covers(a, b)))
    } else {
        let mut idx: Vec<usize> = (0..t).collect();
        (0..20_000).all(|_| {
            idx.shuffle(rng);
            let a = idx[..floor].iter().fold(0u64, |s, &x| s | 1 << x);
            idx.shuffle(rng);
            let b = idx[..floor].iter().fold(0u64, |s, &x| s | 1 << x);
            covers(a, b)
        })
    }
}

/// The default desk-scale floor `max(1, ⌈t/10k⌉)`.
pub fn default_floor(t: usize, k: usize) -> usize {
    t.div_ceil(10 * k).max(1)
}

/// `t²` colours on `n` vertices split into `k + 1` nearly equal parts.
/// Colour `i` is the complete `(k+1)`-partite graph minus the part pairs of
/// the matching `M_{ψ(e_i)}` of a 1-factorization of `K_{k+1}`, where `ψ`
/// is resampled until property R holds with the given size floor (default
/// [`default_floor`]).
pub fn patterned_counterexample(
    t: usize,
    k: usize,
    n: usize,
    floor: Option<usize>,
    attempts: usize,
    seed: u64,
) -> Result<PatternedCounterexample> {
    if k.is_multiple_of(2) || k == 0 {
        return Err(Error::Precondition(format!("k = {k} must be odd")));
    }
    if n < k + 1 || t == 0 || t > 63 || k > 63 {
        return Err(Error::Precondition(format!("need n ≥ k + 1 and 1 ≤ t, k ≤ 63 (t={t}, k={k}, n={n})")));
    }
    let floor = floor.unwrap_or_else(|| default_floor(t, k));
    if floor == 0 || floor > t {
        return Err(Error::Precondition(format!("floor {floor} outside 1..={t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = (0..attempts.max(1))
        .map(|_| (0..t * t).map(|_| rng.gen_range(0..k)).collect::<Vec<_>>())
        .find(|psi| has_property_r(psi, t, k, floor, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed)))
        .ok_or(Error::PropertyRUnattainable { attempts: attempts.max(1), floor })?;
    counterexample_from_psi(t, k, n, psi, floor)
}

/// The collection of [`patterned_counterexample`] for a given `ψ`, without
/// checking property R.
pub fn counterexample_from_psi(t: usize, k: usize, n: usize, psi: Vec<usize>, floor: usize) -> Result<PatternedCounterexample> {
    if k.is_multiple_of(2) || n < k + 1 || psi.len() != t * t || psi.iter().any(|&p| p >= k) {
        return Err(Error::Precondition(format!("ψ must map the {} edges of K_{{t,t}} into [{k}], k odd, n ≥ k + 1", t * t)));
    }
    // Nearly balanced, consecutive parts.
    let parts: Vec<Vec<usize>> = {
        let (q, extra) = (n / (k + 1), n % (k + 1));
        let mut start = 0;
        (0..=k)
            .map(|j| {
                let len = q + usize::from(j < extra);
                let p = (start..start + len).collect();
                start += len;
                p
            })
            .collect()
    };
    let mut part_of = vec![0; n];
    for (j, p) in parts.iter().enumerate() {
        for &v in p {
            part_of[v] = j;
        }
    }
    let matchings = round_robin_one_factorization(k + 1)?;
    let mut colours = Vec::with_capacity(t * t);
    for &p in &psi {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                let (a, b) = (part_of[u].min(part_of[v]), part_of[u].max(part_of[v]));
                if a != b && !matchings[p].contains(&(a, b)) {
                    g.add_edge(u, v);
                }
            }
        }
        colours.push(g);
    }
    let collection = GraphCollection::new(n, colours);
    let min_degree = collection.min_degree()?;
    let mut template = Graph::new(2 * t);
    for a in 0..t {
        for b in 0..t {
            template.add_edge(a, t + b);
        }
    }
    Ok(PatternedCounterexample {
        collection,
        template,
        pattern: (0..t * t).collect(),
        psi,
        parts,
        floor,
        min_degree,
    })
}

/// Base graph of the identical model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Complete,
    Cycle,
    Path,
    Gnp { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum Model {
    /// Independent `G(n, p)` per colour.
    IidGnp { p: f64 },
    /// One `G(n, p)` shared by all colours, each pair then flipped
    /// independently per colour with probability `noise`.
    SharedBasePlusNoise { p: f64, noise: f64 },
    /// `G(n, p)` per colour, each resampled up to `retries` times until its
    /// minimum degree reaches `min_degree`.
    MinDegreeConditioned { p: f64, min_degree: usize, retries: usize },
    /// `m` copies of one graph.
    Identical { base: Base },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::IidGnp { .. } => "iid_gnp",
            Model::SharedBasePlusNoise { .. } => "shared_base_plus_noise",
            Model::MinDegreeConditioned { .. } => "min_degree_conditioned",
            Model::Identical { .. } => "identical",
        }
    }
}

fn check_p(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
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

/// A reproducible random collection.
pub fn random_collection(n: usize, m: usize, model: &Model, seed: u64) -> Result<GraphCollection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colours = match *model {
        Model::IidGnp { p } => {
            check_p("p", p)?;
            (0..m).map(|_| gnp(n, p, &mut rng)).collect()
        }
        Model::SharedBasePlusNoise { p, noise } => {
            check_p("p", p)?;
            check_p("noise", noise)?;
            let base = gnp(n, p, &mut rng);
            (0..m)
                .map(|_| {
                    let mut g = base.clone();
                    for u in 0..n {
                        for v in u + 1..n {
                            if rng.gen_bool(noise) && !g.remove_edge(u, v) {
                                g.add_edge(u, v);
                            }
                        }
                    }
                    g
                })
                .collect()
        }
        Model::MinDegreeConditioned { p, min_degree, retries } => {
            check_p("p", p)?;
            let mut out = Vec::with_capacity(m);
            for c in 0..m {
                let g = (0..retries.max(1))
                    .map(|_| gnp(n, p, &mut rng))
                    .find(|g| n == 0 || g.min_degree() >= min_degree)
                    .ok_or_else(|| {
                        Error::RetriesExhausted(format!("colour {c}: minimum degree {min_degree} not reached in {retries} samples"))
                    })?;
                out.push(g);
            }
            out
        }
        Model::Identical { base } => {
            let g = match base {
                Base::Complete => Graph::complete(n),
                Base::Cycle if n >= 3 => Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()),
                Base::Cycle => return Err(Error::Precondition("a cycle needs n ≥ 3".into())),
                Base::Path => Graph::from_edges(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>()),
                Base::Gnp { p } => {
                    check_p("p", p)?;
                    gnp(n, p, &mut rng)
                }
            };
            vec![g; m]
        }
    };
    Ok(GraphCollection::new(n, colours))
}

/// A random recursive tree on `n` vertices with maximum degree at most
/// `max_degree` (at least 2 for `n ≥ 3`).
pub fn random_tree(n: usize, max_degree: usize, seed: u64) -> Result<Tree> {
    if n >= 3 && max_degree < 2 || n == 2 && max_degree < 1 {
        return Err(Error::Precondition(format!("no tree on {n} vertices has maximum degree {max_degree}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| deg[u] < max_degree).collect();
        let u = *open.choose(&mut rng).expect("a path keeps two open ends");
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
    }
    Tree::new(n, &edges)
}
