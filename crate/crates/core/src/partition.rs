//! Random vertex partitions that keep every colour's degrees proportional.
//!
//! Each request is realized by sampling a uniform partition, repairing it by
//! vertex swaps that reduce the total degree deficit, and recounting the
//! condition from scratch. Failed recounts are resampled up to the retry
//! budget; the final error carries the best attempt.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::collection::GraphCollection;
use crate::error::{Error, Result, Violation};
use crate::graph::VertexSet;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub parts: Vec<Vec<usize>>,
    pub target_sizes: Vec<usize>,
    /// Per part, the colours failing the degree condition.
    pub bad_colours: Vec<Vec<usize>>,
}

/// Upper bound `2·exp(−2t²/s)` on `P(|X − E X| ≥ t)` for a hypergeometric
/// `X` drawing `s` of `N` items, `K` of them marked.
#[allow(non_snake_case)]
pub fn hypergeometric_tail(N: usize, K: usize, s: usize, t: f64) -> f64 {
    debug_assert!(K <= N && s <= N);
    let _ = (N, K);
    if s == 0 {
        return 0.0;
    }
    (2.0 * (-2.0 * t * t / s as f64).exp()).min(2.0)
}

/// Partition `ground` into parts of the given sizes such that every vertex
/// `v` and colour `j` keep `d_j(v, V_i) ≥ (d_j(v, ground)/|ground| − slack)·|V_i|`.
///
/// Both sizes drop by one where they contain `v` itself, which keeps the
/// target at the hypergeometric mean and makes complete graphs pass.
pub fn split_preserving_degrees<R: Rng>(
    coll: &GraphCollection,
    ground: &[usize],
    sizes: &[usize],
    slack: f64,
    retries: usize,
    rng: &mut R,
) -> Result<PartitionPlan> {
    let colours: Vec<usize> = (0..coll.m()).collect();
    let check: Vec<usize> = (0..coll.n()).collect();
    split_preserving_degrees_for(coll, &colours, ground, sizes, &check, slack, retries, rng)
}

/// [`split_preserving_degrees`] restricted to some colours and some checked
/// vertices.
#[allow(clippy::too_many_arguments)]
pub fn split_preserving_degrees_for<R: Rng>(
    coll: &GraphCollection,
    colours: &[usize],
    ground: &[usize],
    sizes: &[usize],
    check: &[usize],
    slack: f64,
    retries: usize,
    rng: &mut R,
) -> Result<PartitionPlan> {
    validate_sizes(coll, ground, sizes)?;
    if !(slack > 0.0 && slack < 1.0) {
        return Err(Error::Precondition(format!("slack {slack} outside (0,1)")));
    }
    let ground_set = VertexSet::from_iter_with_capacity(coll.n(), ground.iter().copied());
    let mut frac = Vec::with_capacity(colours.len() * coll.n());
    for &c in colours {
        let g = coll.colour(c);
        for v in 0..coll.n() {
            let gs = (ground.len() - ground_set.contains(v) as usize).max(1) as f64;
            frac.push(g.degree_in(v, &ground_set) as f64 / gs - slack);
        }
    }
    let check = VertexSet::from_iter_with_capacity(coll.n(), check.iter().copied());
    let mode = Mode::All { frac, check };
    run(coll, colours, ground, sizes, mode, retries, rng, |_| false)
}

/// Partition all of `V` into blocks so that in each block all but at most
/// `m / k_min²` colours keep `δ(G_j[V_i]) ≥ (δ(𝒢)/(n−1) − slack)·(|V_i|−1)`.
pub fn good_partition<R: Rng>(
    coll: &GraphCollection,
    block_sizes: &[usize],
    k_min: usize,
    slack: f64,
    retries: usize,
    halving: bool,
    rng: &mut R,
) -> Result<PartitionPlan> {
    if let Some(&b) = block_sizes.iter().find(|&&b| b < k_min) {
        return Err(Error::Precondition(format!("block size {b} below k_min {k_min}")));
    }
    let ground: Vec<usize> = (0..coll.n()).collect();
    validate_sizes(coll, &ground, block_sizes)?;
    let delta = coll.min_degree()? as f64 / (coll.n().max(2) - 1) as f64;
    let allowed = coll.m() / (k_min * k_min).max(1);
    let colours: Vec<usize> = (0..coll.m()).collect();

    if halving {
        let parts = halve(coll, &colours, &ground, block_sizes, slack, retries, rng)?;
        let plan = recount_inside(coll, &colours, parts, block_sizes, delta - slack);
        if plan.bad_colours.iter().all(|b| b.len() <= allowed) {
            return Ok(plan);
        }
        return Err(Error::RetriesExhausted(format!(
            "halving partition left {} bad (part, colour) pairs",
            plan.bad_colours.iter().map(Vec::len).sum::<usize>()
        )));
    }

    let mode = Mode::Inside { frac: delta - slack };
    run(coll, &colours, &ground, block_sizes, mode, retries, rng, |plan| {
        plan.bad_colours.iter().all(|b| b.len() <= allowed)
    })
}

/// A `size`-subset `A` of `source` with `δ(G_j[{pinned} ∪ A]) ≥ (δ − slack)·size`
/// for every colour, where `δ` is the least relative degree of
/// `source ∪ {pinned}` into `source`.
pub fn sample_degree_preserving_subset<R: Rng>(
    coll: &GraphCollection,
    source: &[usize],
    size: usize,
    pinned: usize,
    slack: f64,
    retries: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if size > source.len() || pinned >= coll.n() {
        return Err(Error::Precondition(format!(
            "subset of size {size} from {} vertices, pinned {pinned}",
            source.len()
        )));
    }
    let src = VertexSet::from_iter_with_capacity(coll.n(), source.iter().copied());
    let s = source.len().max(1) as f64;
    let src = &src;
    let delta = (0..coll.m())
        .flat_map(|j| {
            let g = coll.colour(j);
            source
                .iter()
                .chain(std::iter::once(&pinned))
                .map(move |&v| g.degree_in(v, src) as f64 / s)
        })
        .fold(f64::INFINITY, f64::min);
    let need = (delta - slack) * size as f64;

    let mut pool = source.to_vec();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..retries.max(1) {
        pool.shuffle(rng);
        let mut a: Vec<usize> = pool[..size].to_vec();
        a.sort_unstable();
        let mut set = VertexSet::from_iter_with_capacity(coll.n(), a.iter().copied());
        set.insert(pinned);
        let worst = (0..coll.m())
            .flat_map(|j| {
                let g = coll.colour(j);
                let set = &set;
                set.iter().map(move |v| need - g.degree_in(v, set) as f64)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= TOL {
            return Ok(a);
        }
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((worst, a));
        }
    }
    let (w, _) = best.expect("at least one attempt");
    Err(Error::RetriesExhausted(format!(
        "no degree-preserving {size}-subset; best shortfall {w:.2}"
    )))
}

fn validate_sizes(coll: &GraphCollection, ground: &[usize], sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::Precondition("no parts requested".into()));
    }
    let total: usize = sizes.iter().sum();
    if total != ground.len() {
        return Err(Error::Precondition(format!(
            "sizes sum to {total}, ground set has {}",
            ground.len()
        )));
    }
    let mut seen = VertexSet::new(coll.n());
    for &v in ground {
        if v >= coll.n() || !seen.insert(v) {
            return Err(Error::Precondition(format!("bad ground vertex {v}")));
        }
    }
    Ok(())
}

enum Mode {
    /// Relative-degree condition on the checked vertices, per colour.
    /// `frac[jj * n + v]` is the required fraction of each part.
    All { frac: Vec<f64>, check: VertexSet },
    /// Minimum-degree condition inside each part.
    Inside { frac: f64 },
}

struct Engine<'a> {
    coll: &'a GraphCollection,
    colours: &'a [usize],
    n: usize,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
    sizes: Vec<f64>,
    have: Vec<i32>,
    mode: &'a Mode,
}

impl<'a> Engine<'a> {
    fn new(
        coll: &'a GraphCollection,
        colours: &'a [usize],
        parts: Vec<Vec<usize>>,
        mode: &'a Mode,
    ) -> Self {
        let n = coll.n();
        let mut part_of = vec![usize::MAX; n];
        for (i, p) in parts.iter().enumerate() {
            for &v in p {
                part_of[v] = i;
            }
        }
        let sizes = parts.iter().map(|p| p.len() as f64).collect();
        let mut e = Self {
            coll,
            colours,
            n,
            parts,
            part_of,
            sizes,
            have: Vec::new(),
            mode,
        };
        e.recount();
        e
    }

    fn recount(&mut self) {
        let mc = self.colours.len();
        self.have = vec![0; self.parts.len() * mc * self.n];
        for (i, p) in self.parts.iter().enumerate() {
            let set = VertexSet::from_iter_with_capacity(self.n, p.iter().copied());
            for (jj, &c) in self.colours.iter().enumerate() {
                let g = self.coll.colour(c);
                let base = (i * mc + jj) * self.n;
                for v in 0..self.n {
                    self.have[base + v] = g.degree_in(v, &set) as i32;
                }
            }
        }
    }

    #[inline]
    fn idx(&self, i: usize, jj: usize, v: usize) -> usize {
        (i * self.colours.len() + jj) * self.n + v
    }

    #[inline]
    fn need(&self, i: usize, jj: usize, v: usize, owner: usize) -> f64 {
        let size = self.sizes[i] - (owner == i) as u8 as f64;
        match self.mode {
            Mode::All { frac, .. } => frac[jj * self.n + v] * size,
            Mode::Inside { frac } => frac * size,
        }
    }

    #[inline]
    fn checked(&self, i: usize, v: usize, owner: usize) -> bool {
        match self.mode {
            Mode::All { check, .. } => check.contains(v),
            Mode::Inside { .. } => owner == i,
        }
    }

    #[inline]
    fn deficit(&self, i: usize, jj: usize, v: usize, have: i32, owner: usize) -> f64 {
        if !self.checked(i, v, owner) {
            return 0.0;
        }
        (self.need(i, jj, v, owner) - have as f64).max(0.0)
    }

    fn score(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.parts.len() {
            for jj in 0..self.colours.len() {
                for v in 0..self.n {
                    s += self.deficit(i, jj, v, self.have[self.idx(i, jj, v)], self.part_of[v]);
                }
            }
        }
        s
    }

    /// First violated `(part, colour, vertex)` at or after a flat offset.
    fn find_violation(&self, start: usize) -> Option<(usize, usize, usize)> {
        let mc = self.colours.len();
        let total = self.parts.len() * mc * self.n;
        (0..total).map(|k| (start + k) % total).find_map(|flat| {
            let v = flat % self.n;
            let jj = (flat / self.n) % mc;
            let i = flat / (self.n * mc);
            (self.deficit(i, jj, v, self.have[flat], self.part_of[v]) > TOL).then_some((i, jj, v))
        })
    }

    /// Change of the total deficit if `x` (in part `a`) and `y` (in part `b`)
    /// trade places.
    fn swap_delta(&self, x: usize, y: usize) -> f64 {
        let (a, b) = (self.part_of[x], self.part_of[y]);
        let owner_after = |v: usize| {
            if v == x {
                b
            } else if v == y {
                a
            } else {
                self.part_of[v]
            }
        };
        let mut delta = 0.0;
        for (jj, &c) in self.colours.iter().enumerate() {
            let g = self.coll.colour(c);
            let mut visit = |v: usize| {
                let dx = g.has_edge(v, x) as i32;
                let dy = g.has_edge(v, y) as i32;
                for (p, shift) in [(a, dy - dx), (b, dx - dy)] {
                    let h = self.have[self.idx(p, jj, v)];
                    delta += self.deficit(p, jj, v, h + shift, owner_after(v))
                        - self.deficit(p, jj, v, h, self.part_of[v]);
                }
            };
            let (rx, ry) = (g.row(x), g.row(y));
            for (w, (&wx, &wy)) in rx.iter().zip(ry).enumerate() {
                let mut bits = wx ^ wy;
                while bits != 0 {
                    let v = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if v != x && v != y {
                        visit(v);
                    }
                }
            }
            visit(x);
            visit(y);
        }
        delta
    }

    fn apply_swap(&mut self, x: usize, y: usize) {
        let (a, b) = (self.part_of[x], self.part_of[y]);
        for (jj, &c) in self.colours.iter().enumerate() {
            let g = self.coll.colour(c);
            for v in g.neighbors(x) {
                let (ia, ib) = (self.idx(a, jj, v), self.idx(b, jj, v));
                self.have[ia] -= 1;
                self.have[ib] += 1;
            }
            for v in g.neighbors(y) {
                let (ia, ib) = (self.idx(a, jj, v), self.idx(b, jj, v));
                self.have[ia] += 1;
                self.have[ib] -= 1;
            }
        }
        let px = self.parts[a].iter().position(|&u| u == x).expect("x in its part");
        let py = self.parts[b].iter().position(|&u| u == y).expect("y in its part");
        self.parts[a][px] = y;
        self.parts[b][py] = x;
        self.part_of[x] = b;
        self.part_of[y] = a;
    }

    /// Swap-based hill climbing on the total deficit.
    fn repair<R: Rng>(&mut self, rng: &mut R, max_iters: usize) {
        if self.parts.len() < 2 {
            return;
        }
        let mc = self.colours.len();
        let total = self.parts.len() * mc * self.n;
        let mut score = self.score();
        let (mut best_score, mut best_at) = (score, 0);
        let patience = 4 * self.n + 50;
        for it in 0..max_iters {
            if score <= TOL || it - best_at > patience {
                break;
            }
            if score < best_score - TOL {
                (best_score, best_at) = (score, it);
            }
            let Some((i, jj, v)) = self.find_violation(rng.gen_range(0..total)) else {
                break;
            };
            let g = self.coll.colour(self.colours[jj]);
            // x leaves part i, y joins it from elsewhere.
            let outs: Vec<usize> = self.parts[i]
                .iter()
                .copied()
                .filter(|&x| x != v && !g.has_edge(v, x))
                .collect();
            let ins: Vec<usize> = (0..self.n)
                .filter(|&y| {
                    let p = self.part_of[y];
                    p != usize::MAX && p != i && y != v && g.has_edge(v, y)
                })
                .collect();
            let mut best: Option<(f64, usize, usize)> = None;
            let consider = |x: usize, y: usize, best: &mut Option<(f64, usize, usize)>| {
                let d = self.swap_delta(x, y);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    *best = Some((d, x, y));
                }
            };
            if !outs.is_empty() && !ins.is_empty() {
                for _ in 0..6 {
                    let x = outs[rng.gen_range(0..outs.len())];
                    let y = ins[rng.gen_range(0..ins.len())];
                    consider(x, y, &mut best);
                }
            }
            if self.part_of[v] == i {
                // Moving v out of the part can also clear its own deficit.
                let others: Vec<usize> = (0..self.n)
                    .filter(|&y| self.part_of[y] != usize::MAX && self.part_of[y] != i)
                    .collect();
                for _ in 0..2 {
                    if let Some(&y) = others.choose(rng) {
                        consider(v, y, &mut best);
                    }
                }
            }
            if let Some((d, x, y)) = best {
                if d < -TOL || (d <= TOL && rng.gen_bool(0.5)) {
                    self.apply_swap(x, y);
                    score += d;
                }
            }
        }
    }
}

/// Recounts the condition from scratch; returns the plan and the worst
/// shortfall.
fn verify(
    coll: &GraphCollection,
    colours: &[usize],
    parts: Vec<Vec<usize>>,
    mode: &Mode,
) -> (PartitionPlan, Option<Violation>) {
    let n = coll.n();
    let mut part_of = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            part_of[v] = i;
        }
    }
    let mut bad = vec![Vec::new(); parts.len()];
    let mut worst: Option<Violation> = None;
    for (i, p) in parts.iter().enumerate() {
        let set = VertexSet::from_iter_with_capacity(n, p.iter().copied());
        for (jj, &c) in colours.iter().enumerate() {
            let g = coll.colour(c);
            let mut is_bad = false;
            for v in 0..n {
                let size = p.len() as f64 - (part_of[v] == i) as u8 as f64;
                let need = match mode {
                    Mode::All { frac, check } if check.contains(v) => frac[jj * n + v] * size,
                    Mode::Inside { frac } if part_of[v] == i => frac * size,
                    _ => continue,
                };
                let have = g.degree_in(v, &set);
                if (have as f64) + TOL < need {
                    is_bad = true;
                    if worst.as_ref().is_none_or(|w| need - have as f64 > w.need - w.have as f64) {
                        worst = Some(Violation {
                            part: i,
                            colour: c,
                            vertex: v,
                            have,
                            need,
                        });
                    }
                }
            }
            if is_bad {
                bad[i].push(c);
            }
        }
    }
    let plan = PartitionPlan {
        target_sizes: parts.iter().map(Vec::len).collect(),
        parts,
        bad_colours: bad,
    };
    (plan, worst)
}

fn recount_inside(
    coll: &GraphCollection,
    colours: &[usize],
    parts: Vec<Vec<usize>>,
    _sizes: &[usize],
    frac: f64,
) -> PartitionPlan {
    verify(coll, colours, parts, &Mode::Inside { frac }).0
}

fn random_parts<R: Rng>(ground: &[usize], sizes: &[usize], rng: &mut R) -> Vec<Vec<usize>> {
    let mut pool = ground.to_vec();
    pool.shuffle(rng);
    let mut parts = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        let mut p = pool[at..at + s].to_vec();
        p.sort_unstable();
        parts.push(p);
        at += s;
    }
    parts
}

#[allow(clippy::too_many_arguments)]
fn run<R: Rng>(
    coll: &GraphCollection,
    colours: &[usize],
    ground: &[usize],
    sizes: &[usize],
    mode: Mode,
    retries: usize,
    rng: &mut R,
    accept: impl Fn(&PartitionPlan) -> bool,
) -> Result<PartitionPlan> {
    let mut best: Option<(PartitionPlan, Violation, usize)> = None;
    let iters = 40 * ground.len() + 200;
    for _ in 0..retries.max(1) {
        let parts = random_parts(ground, sizes, rng);
        let mut engine = Engine::new(coll, colours, parts, &mode);
        engine.repair(rng, iters);
        let mut parts = engine.parts;
        for p in &mut parts {
            p.sort_unstable();
        }
        let (plan, worst) = verify(coll, colours, parts, &mode);
        let bad: usize = plan.bad_colours.iter().map(Vec::len).sum();
        match worst {
            None => return Ok(plan),
            Some(_) if accept(&plan) => return Ok(plan),
            Some(w) => {
                if best.as_ref().is_none_or(|(_, _, b)| bad < *b) {
                    best = Some((plan, w, bad));
                }
            }
        }
    }
    let (plan, worst, _) = best.expect("at least one attempt");
    Err(Error::PartitionRetriesExhausted {
        attempts: retries.max(1),
        best_parts: plan.parts,
        worst,
    })
}

/// Recursive halving: each round splits every part in two, spending an
/// equal share of the slack, until the requested block sizes are reached.
fn halve<R: Rng>(
    coll: &GraphCollection,
    colours: &[usize],
    ground: &[usize],
    sizes: &[usize],
    slack: f64,
    retries: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let rounds = (sizes.len() as f64).log2().ceil().max(1.0);
    #[allow(clippy::too_many_arguments)]
    fn go<R: Rng>(
        coll: &GraphCollection,
        colours: &[usize],
        ground: &[usize],
        sizes: &[usize],
        slack: f64,
        retries: usize,
        rng: &mut R,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if sizes.len() == 1 {
            let mut g = ground.to_vec();
            g.sort_unstable();
            out.push(g);
            return Ok(());
        }
        let mid = sizes.len().div_ceil(2);
        let (l, r) = sizes.split_at(mid);
        let halves = [l.iter().sum::<usize>(), r.iter().sum::<usize>()];
        let plan =
            split_preserving_degrees_for(coll, colours, ground, &halves, ground, slack, retries, rng)
                .or_else(|e| match e {
                    // Carry on with the best attempt; the final recount decides.
                    Error::PartitionRetriesExhausted { best_parts, .. } => Ok(PartitionPlan {
                        target_sizes: halves.to_vec(),
                        parts: best_parts,
                        bad_colours: vec![],
                    }),
                    e => Err(e),
                })?;
        go(coll, colours, &plan.parts[0], l, slack, retries, rng, out)?;
        go(coll, colours, &plan.parts[1], r, slack, retries, rng, out)
    }
    let mut out = Vec::new();
    go(coll, colours, ground, sizes, slack / rounds, retries, rng, &mut out)?;
    Ok(out)
}
