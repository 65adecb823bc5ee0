//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Every check here uses its own reference implementation where one
//! is needed, not the library's.

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use transversal::absorber::{build_absorber, AbsorberTemplate, SlotColourGraph};
use transversal::collection::GraphCollection;
use transversal::config::PipelineConfig;
use transversal::connectivity::{disjoint_paths, find_highly_connected_subgraph, vertex_connectivity};
use transversal::constructions::{bridgeless_lower_bound, patterned_counterexample, random_collection, random_tree, Model};
use transversal::factors::{builtin_spec, ft_factor, patterned_factor};
use transversal::graph::Graph;
use transversal::oracle::{exists_transversal_exact, factor_template, verify_transversal, Decision, TransversalMode};
use transversal::trees::{greedy_colour_cover_tree, rainbow_spanning_tree, Tree};
use transversal_cli::args::{GeneratorArg, SweepMode, Timing};
use transversal_cli::sweep::{topped_up_collection, SweepPlan};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
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

// ---------------------------------------------------------------- references

/// Kuhn's augmenting paths; `adj[l]` lists right vertices.
fn matching_size(adj: &[Vec<usize>], n_right: usize) -> usize {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if !seen[r] {
                seen[r] = true;
                if owner[r].is_none_or(|o| augment(o, adj, seen, owner)) {
                    owner[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    (0..adj.len()).filter(|&l| augment(l, adj, &mut vec![false; n_right], &mut owner)).count()
}

/// Internally disjoint `s`–`t` paths in `g[set]` by unit-capacity flow on
/// the split graph, stopping at `cap`.
fn local_connectivity(g: &Graph, set: &[bool], s: usize, t: usize, cap: usize) -> usize {
    let n = g.order();
    // Node v_in = 2v, v_out = 2v + 1.
    let mut cap_m = std::collections::HashMap::<(usize, usize), i32>::new();
    let mut adj = vec![Vec::new(); 2 * n];
    let mut add = |a: usize, b: usize, c: i32, adj: &mut Vec<Vec<usize>>| {
        *cap_m.entry((a, b)).or_insert(0) += c;
        cap_m.entry((b, a)).or_insert(0);
        adj[a].push(b);
        adj[b].push(a);
    };
    for v in (0..n).filter(|&v| set[v]) {
        let c = if v == s || v == t { cap as i32 } else { 1 };
        add(2 * v, 2 * v + 1, c, &mut adj);
        for u in g.neighbors(v).filter(|&u| set[u]) {
            add(2 * v + 1, 2 * u, 1, &mut adj);
        }
    }
    let (src, dst) = (2 * s + 1, 2 * t);
    let mut flow = 0;
    while flow < cap {
        let mut prev = vec![usize::MAX; 2 * n];
        prev[src] = src;
        let mut q = VecDeque::from([src]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if prev[y] == usize::MAX && cap_m[&(x, y)] > 0 {
                    prev[y] = x;
                    q.push_back(y);
                }
            }
        }
        if prev[dst] == usize::MAX {
            break;
        }
        let mut y = dst;
        while y != src {
            let x = prev[y];
            *cap_m.get_mut(&(x, y)).unwrap() -= 1;
            *cap_m.get_mut(&(y, x)).unwrap() += 1;
            y = x;
        }
        flow += 1;
    }
    flow
}

/// Whether `g[h]` is `k`-connected: more than `k` vertices and no
/// non-adjacent pair separated by fewer than `k` vertices.
fn is_k_connected_ref(g: &Graph, h: &[usize], k: usize) -> bool {
    if h.len() <= k {
        return false;
    }
    let mut set = vec![false; g.order()];
    for &v in h {
        set[v] = true;
    }
    h.iter().enumerate().all(|(i, &s)| {
        h[i + 1..].iter().all(|&t| g.has_edge(s, t) || local_connectivity(g, &set, s, t, k) >= k)
    })
}

/// Smallest vertex cut by enumerating subsets in increasing size.
fn brute_connectivity(g: &Graph) -> usize {
    let n = g.order();
    let connected_without = |mask: u32| {
        let alive: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 0).collect();
        let Some(&start) = alive.first() else { return true };
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in g.neighbors(v) {
                if mask >> u & 1 == 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        alive.iter().all(|&v| seen[v])
    };
    for size in 0..n.saturating_sub(1) {
        let found = (0u32..1 << n).filter(|m| m.count_ones() as usize == size).any(|m| !connected_without(m));
        if found {
            return size;
        }
    }
    n.saturating_sub(1)
}

/// Labelled trees on `k` vertices from Prüfer sequences.
fn all_labelled_trees(k: usize) -> Vec<Tree> {
    match k {
        0 => return vec![],
        1 => return vec![Tree::new(1, &[]).unwrap()],
        2 => return vec![Tree::new(2, &[(0, 1)]).unwrap()],
        _ => {}
    }
    let total = k.pow(k as u32 - 2);
    (0..total)
        .map(|mut code| {
            let seq: Vec<usize> = (0..k - 2)
                .map(|_| {
                    let x = code % k;
                    code /= k;
                    x
                })
                .collect();
            let mut deg = vec![1; k];
            for &x in &seq {
                deg[x] += 1;
            }
            let mut edges = Vec::with_capacity(k - 1);
            for &x in &seq {
                let leaf = (0..k).find(|&v| deg[v] == 1).unwrap();
                edges.push((leaf, x));
                deg[leaf] -= 1;
                deg[x] -= 1;
            }
            let rest: Vec<usize> = (0..k).filter(|&v| deg[v] == 1).collect();
            edges.push((rest[0], rest[1]));
            Tree::new(k, &edges).unwrap()
        })
        .collect()
}

fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

// ----------------------------------------------------------------- criteria

fn threshold_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=40);
        let m = rng.gen_range(1..=40);
        let p = rng.gen_range(0.2..1.0);
        let coll = GraphCollection::new(n, (0..m).map(|_| gnp(n, p, &mut rng)).collect());
        let min_count = rng.gen_range(1..=m);
        let out = coll.threshold_graph(min_count).unwrap();
        // δ(out)·m ≥ δ(𝒢)·m − (n−1)·min_count, all in integers.
        let lhs = (out.min_degree() * m) as i64;
        let rhs = (coll.min_degree().unwrap() * m) as i64 - ((n - 1) * min_count) as i64;
        if lhs < rhs {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{} / 1000 collections satisfy the bound", 1000 - bad))
}

fn greedy_cover() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut runs, mut ok, mut trees) = (0, 0, 0);
    for k in 1..=7 {
        for tree in all_labelled_trees(k) {
            trees += 1;
            let e = tree.edge_count();
            for _ in 0..3 {
                runs += 1;
                let coll = topped_up_collection(8, e, e, &mut rng);
                let v = rng.gen_range(0..8);
                let Ok(emb) = greedy_colour_cover_tree(&coll, &tree, 0, v) else { continue };
                let rainbow = verify_transversal(&coll, &emb, &tree.to_graph(), &TransversalMode::Rainbow).is_ok();
                if rainbow && emb.vertex_map[0] == v && emb.colours_used().len() == e {
                    ok += 1;
                }
            }
        }
    }
    outcome(ok == runs, format!("{ok} / {runs} runs over {trees} labelled trees with e(T) ≤ 6"))
}

fn random_adjacency(slots: usize, colours: usize, p: f64, rng: &mut ChaCha8Rng) -> SlotColourGraph {
    let adj: Vec<Vec<usize>> = (0..slots).map(|_| (0..colours).filter(|_| rng.gen_bool(p)).collect()).collect();
    SlotColourGraph::new(colours, &adj)
}

fn absorbs_correctly(t: &AbsorberTemplate, u: &[usize]) -> bool {
    let Ok(phi) = t.absorb(u) else { return false };
    let adj = &t.colour_adjacency;
    let mut used = phi.clone();
    used.sort_unstable();
    let mut want: Vec<usize> = t.fixed_colours.iter().chain(u).copied().collect();
    want.sort_unstable();
    let valid = phi.len() == t.slots() && phi.iter().enumerate().all(|(i, &c)| adj.adjacent(i, c)) && used == want;
    // The reference matching must agree that such a matching exists.
    let lists: Vec<Vec<usize>> =
        (0..t.slots()).map(|i| want.iter().enumerate().filter(|&(_, &c)| adj.adjacent(i, c)).map(|(j, _)| j).collect()).collect();
    valid && matching_size(&lists, want.len()) == t.slots()
}

fn absorber_property() -> Outcome {
    let (mut built, mut tried, mut ok, mut total) = (0, 0, 0, 0);
    let mut seed = 0;
    while built < 20 && tried < 60 {
        tried += 1;
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let adj = random_adjacency(40, 600, 0.35, &mut rng);
        let Ok(t) = build_absorber(&adj, 4, 40, &mut rng) else { continue };
        built += 1;
        for _ in 0..200 {
            total += 1;
            let u: Vec<usize> = t.reservoir.choose_multiple(&mut rng, 4).copied().collect();
            if absorbs_correctly(&t, &u) {
                ok += 1;
            }
        }
    }
    outcome(built == 20 && ok == total, format!("{built} templates built in {tried} tries; {ok} / {total} sets absorbed"))
}

fn mader_menger() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut mader_ok, mut inputs) = (0, 0);
    while inputs < 50 {
        let n = rng.gen_range(12..=30);
        let g = gnp(n, rng.gen_range(0.4..0.9), &mut rng);
        // Only inputs meeting e ≥ 2k|G| for some k ≥ 1 count.
        let kmax = g.edge_count() / (2 * n);
        if kmax == 0 {
            continue;
        }
        inputs += 1;
        let k = rng.gen_range(1..=kmax);
        if let Ok(h) = find_highly_connected_subgraph(&g, k) {
            if is_k_connected_ref(&g, &h, k + 1) {
                mader_ok += 1;
            }
        }
    }
    let mut paths_ok = 0;
    let mut paths_total = 0;
    for _ in 0..50 {
        let n = rng.gen_range(10..=25);
        let g = gnp(n, 0.5, &mut rng);
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(&mut rng);
        let k = rng.gen_range(1..=n / 3);
        let (a, b) = (&vs[..k], &vs[k..2 * k]);
        let Ok(paths) = disjoint_paths(&g, a, b, k) else { continue };
        paths_total += 1;
        let mut seen = vec![false; n];
        let disjoint = paths.iter().flatten().all(|&v| !std::mem::replace(&mut seen[v], true));
        let shaped = paths.len() == k
            && paths.iter().all(|p| {
                a.contains(&p[0]) && b.contains(p.last().unwrap()) && p.windows(2).all(|w| g.has_edge(w[0], w[1]))
            });
        if disjoint && shaped {
            paths_ok += 1;
        }
    }
    let mut kappa_ok = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=10);
        let g = gnp(n, rng.gen_range(0.2..0.95), &mut rng);
        if vertex_connectivity(&g) == brute_connectivity(&g) {
            kappa_ok += 1;
        }
    }
    outcome(
        mader_ok == 50 && paths_ok == paths_total && kappa_ok == 100,
        format!("mader {mader_ok}/50, paths {paths_ok}/{paths_total}, connectivity {kappa_ok}/100"),
    )
}

fn tightness() -> Outcome {
    let c4 = builtin_spec("C4").unwrap();
    let coll = bridgeless_lower_bound(&c4, 2).unwrap();
    let template = factor_template(&c4.f, 2);
    let mode = TransversalMode::Factor { r: 4, t: 4 };
    let lower = exists_transversal_exact(&coll, &template, &mode, u64::MAX).unwrap();
    let mut colours = coll.colours().to_vec();
    colours[7] = colours[0].clone();
    let control = GraphCollection::new(8, colours);
    let ctrl = exists_transversal_exact(&control, &template, &mode, u64::MAX).unwrap();
    let ctrl_ok = match &ctrl {
        Decision::Yes(emb) => verify_transversal(&control, emb, &template, &mode).is_ok(),
        _ => false,
    };
    outcome(lower == Decision::No && ctrl_ok, format!("lower bound: {}, control: {}", name(&lower), name(&ctrl)))
}

fn name(d: &Decision) -> &'static str {
    match d {
        Decision::Yes(_) => "yes",
        Decision::No => "no",
        Decision::BudgetExhausted => "budget exhausted",
    }
}

/// Per seed: `Some(true)` verified success, `Some(false)` clean failure,
/// `None` an invalid witness or an internal error.
fn pipelines() -> Outcome {
    let tree_runs: Vec<Option<bool>> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let model = Model::MinDegreeConditioned { p: 0.9, min_degree: 48, retries: 10_000 };
            let coll = random_collection(60, 59, &model, 1000 + seed).ok()?;
            let tree = random_tree(60, 4, seed).ok()?;
            match rainbow_spanning_tree(&coll, &tree, &PipelineConfig::with_seed(seed)) {
                Ok(emb) => verify_transversal(&coll, &emb, &tree.to_graph(), &TransversalMode::Rainbow).is_ok().then_some(true),
                Err(e) => (!e.is_internal()).then_some(false),
            }
        })
        .collect();
    let k3 = builtin_spec("K3").unwrap();
    let factor_runs: Vec<Option<bool>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let model = Model::MinDegreeConditioned { p: 0.9, min_degree: 36, retries: 10_000 };
            let coll = random_collection(45, 45, &model, 2000 + seed).ok()?;
            match ft_factor(&coll, &k3, &PipelineConfig::with_seed(seed)) {
                Ok(f) => f.verify(&coll, &k3).is_ok().then_some(true),
                Err(e) => (!e.is_internal()).then_some(false),
            }
        })
        .collect();
    let count = |v: &[Option<bool>]| v.iter().filter(|r| **r == Some(true)).count();
    let broken = tree_runs.iter().chain(&factor_runs).filter(|r| r.is_none()).count();
    let (t, f) = (count(&tree_runs), count(&factor_runs));
    outcome(
        t * 100 >= 80 * 50 && f * 100 >= 70 * 100 && broken == 0,
        format!("tree {t}/50 (need 40), K3 factor {f}/100 (need 70), invalid or internal {broken}"),
    )
}

fn patterned() -> Outcome {
    let c4 = builtin_spec("C4").unwrap();
    let runs: Vec<Option<bool>> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let model = Model::MinDegreeConditioned { p: 0.92, min_degree: 28, retries: 100_000 };
            let coll = random_collection(32, 32, &model, 3000 + seed).ok()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cols: Vec<usize> = (0..32).collect();
            cols.shuffle(&mut rng);
            let pats: Vec<Vec<usize>> = cols.chunks(4).map(<[usize]>::to_vec).collect();
            match patterned_factor(&coll, &c4, &pats, &PipelineConfig::with_seed(seed)) {
                Ok(f) => {
                    // Edge-exact: copy edge k must carry pattern colour k.
                    let exact = f.copies.iter().all(|c| {
                        c.pattern.is_some_and(|p| {
                            c4.f.edges().iter().zip(&pats[p]).all(|(&(a, b), &col)| coll.has_edge(col, c.vertices[a], c.vertices[b]))
                                && c.colours == pats[p]
                        })
                    });
                    (exact && f.verify_patterned(&coll, &c4, &pats).is_ok()).then_some(true)
                }
                Err(e) => (!e.is_internal()).then_some(false),
            }
        })
        .collect();
    let ok = runs.iter().filter(|r| **r == Some(true)).count();
    let broken = runs.iter().filter(|r| r.is_none()).count();
    let ce = patterned_counterexample(3, 3, 24, Some(2), 10_000, 1).unwrap();
    let mode = TransversalMode::Patterned { r: 6, patterns: vec![ce.pattern.clone()] };
    let d = exists_transversal_exact(&ce.collection, &ce.template, &mode, u64::MAX).unwrap();
    outcome(
        broken == 0 && d == Decision::No,
        format!("{ok}/50 factors returned, all pattern-exact: {}; counterexample (floor 2): {}", broken == 0, name(&d)),
    )
}

fn sweep_sanity() -> Outcome {
    let plan = SweepPlan {
        mode: SweepMode::PerfectMatching,
        n: 10,
        trials: 50,
        grid: vec![0.3, 0.4, 0.5, 0.6, 0.7],
        generator: GeneratorArg::Barrier,
        noise: 0.01,
        spec: None,
        budget: 10_000_000,
        timing: Timing::None,
        seed: 8,
    };
    let rows = plan.run().unwrap();
    let freq: Vec<f64> = rows.iter().map(|r| r.successes as f64 / r.trials as f64).collect();
    let low_ok = freq[0] <= 0.3 + 2.0 * binomial_sigma(0.3, 50);
    let high_ok = freq[3] >= 0.9 - 2.0 * binomial_sigma(0.9, 50);
    let monotone = freq.windows(2).all(|w| w[1] + 2.0 * binomial_sigma(w[0].clamp(0.02, 0.98), 50) >= w[0]);
    outcome(low_ok && high_ok && monotone, format!("success frequencies {freq:?} at δ/n = 0.3..0.7"))
}

fn run_bin(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_transversal"))
        .env_remove("TRANSVERSAL_SEED")
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_owned();
    let same = |a: &str, b: &str| std::fs::read(Path::new(a)).ok().zip(std::fs::read(Path::new(b)).ok()).is_some_and(|(x, y)| x == y);
    let mut checks = Vec::new();
    for round in ["a", "b"] {
        let inst = p(&format!("inst_{round}.txt"));
        let kinst = p(&format!("k_{round}.txt"));
        let tree = p(&format!("tree_{round}.txt"));
        let gen_ok = run_bin(&["gen", "random", "--model", "min_degree_conditioned", "--n", "30", "--m", "29", "--p", "0.9", "--min-degree", "24", "--retries", "10000", "--seed", "5", "-o", &inst])
            && run_bin(&["gen", "random", "--model", "min_degree_conditioned", "--n", "30", "--m", "30", "--p", "0.9", "--min-degree", "24", "--retries", "10000", "--seed", "6", "-o", &kinst])
            && run_bin(&["gen", "tree", "--n", "30", "--seed", "5", "-o", &tree]);
        let solve_ok = run_bin(&["solve", "tree", "-i", &inst, "--tree", &tree, "--seed", "9", "-o", &p(&format!("wt_{round}.json"))])
            && run_bin(&["solve", "factor", "-i", &kinst, "--F", "K3", "--seed", "9", "-o", &p(&format!("wf_{round}.json"))]);
        let sweep_ok = run_bin(&[
            "sweep", "--mode", "perfect-matching", "--n", "10", "--trials", "30", "--delta-grid", "0.3:0.7:0.1", "--seed", "2",
            "--timing", "none", "-o", &p(&format!("s_{round}.csv")),
        ]);
        checks.push(gen_ok && solve_ok && sweep_ok);
    }
    let files = ["inst", "k", "tree"].map(|f| same(&p(&format!("{f}_a.txt")), &p(&format!("{f}_b.txt"))));
    let outputs = ["wt", "wf"].map(|f| same(&p(&format!("{f}_a.json")), &p(&format!("{f}_b.json"))));
    let csv = same(&p("s_a.csv"), &p("s_b.csv"));
    let all = checks.iter().all(|&c| c) && files.iter().all(|&x| x) && outputs.iter().all(|&x| x) && csv;
    outcome(all, format!("commands ok {checks:?}; instances {files:?}; witnesses {outputs:?}; csv {csv}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 threshold graph inequality", threshold_inequality, Duration::from_secs(10)),
        ("2 greedy colour cover", greedy_cover, Duration::from_secs(30)),
        ("3 absorber property", absorber_property, Duration::from_secs(60)),
        ("4 Mader / Menger", mader_menger, Duration::from_secs(60)),
        ("5 bridgeless tightness", tightness, Duration::from_secs(300)),
        ("6 end-to-end pipelines", pipelines, Duration::from_secs(600)),
        ("7 patterned factors", patterned, Duration::from_secs(300)),
        ("8 threshold sweep", sweep_sanity, Duration::from_secs(600)),
        ("9 determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (label, check, limit) in criteria {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let pass = o.pass && took <= limit;
        failed += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "[{verdict}] {label}: {} ({:.1} s, limit {} s)", o.detail, took.as_secs_f64(), limit.as_secs());
        let _ = out.flush();
    }
    let _ = writeln!(out, "acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
