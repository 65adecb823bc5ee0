//! Monte-Carlo success rates over a grid of minimum-degree ratios.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use transversal::collection::GraphCollection;
use transversal::config::PipelineConfig;
use transversal::constructions::{gnp, random_tree};
use transversal::factors::{builtin_spec, ft_factor, FactorSpec};
use transversal::graph::Graph;
use transversal::oracle::{exists_transversal_exact, factor_template, Decision, TransversalMode};
use transversal::trees::rainbow_spanning_tree;

use crate::args::{GeneratorArg, SweepArgs, SweepMode, Timing};
use crate::witness::Witness;
use crate::{write, CliError, CliResult, Outcome};

pub const CSV_HEADER: &str = "delta_over_n,trials,successes,mean_runtime_ms";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub delta_over_n: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_runtime_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub mode: SweepMode,
    pub n: usize,
    pub trials: usize,
    pub grid: Vec<f64>,
    pub generator: GeneratorArg,
    pub noise: f64,
    pub spec: Option<FactorSpec>,
    pub budget: u64,
    pub timing: Timing,
    pub seed: u64,
}

/// Parses `a:b:step` into the points `a, a + step, …` up to `b` inclusive.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("bad grid {s:?}: {why}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(bad("expected a:b:step"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(bad("step must be positive"));
    }
    if a > b || a < 0.0 || b > 1.0 {
        return Err(bad("need 0 ≤ a ≤ b ≤ 1"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    // Rounded so that 0.1-steps print and compare cleanly.
    Ok((0..count).map(|i| ((a + step * i as f64) * 1e9).round() / 1e9).collect())
}

/// Degree target for ratio `x`.
pub fn degree_for(x: f64, n: usize) -> usize {
    ((x * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n.saturating_sub(1))
}

/// Every colour is the clique on a shared random `d`-set `A` joined to the
/// rest, plus independent `noise` edges inside the complement.
pub fn barrier_collection<R: Rng>(n: usize, m: usize, d: usize, noise: f64, rng: &mut R) -> GraphCollection {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut in_a = vec![false; n];
    for &v in &order[..d.min(n)] {
        in_a[v] = true;
    }
    let colours = (0..m)
        .map(|_| {
            let mut g = Graph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if in_a[u] || in_a[v] || rng.gen_bool(noise) {
                        g.add_edge(u, v);
                    }
                }
            }
            g
        })
        .collect();
    GraphCollection::new(n, colours)
}

/// `G(n, d/(n−1))` per colour; each deficient vertex then gains random new
/// neighbours until its degree reaches `d`.
pub fn topped_up_collection<R: Rng>(n: usize, m: usize, d: usize, rng: &mut R) -> GraphCollection {
    let p = if n > 1 { (d as f64 / (n - 1) as f64).min(1.0) } else { 0.0 };
    let colours = (0..m)
        .map(|_| {
            let mut g = gnp(n, p, rng);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for &v in &order {
                if g.degree(v) >= d {
                    continue;
                }
                let mut non: Vec<usize> = (0..n).filter(|&u| u != v && !g.has_edge(u, v)).collect();
                non.shuffle(rng);
                for u in non.into_iter().take(d - g.degree(v)) {
                    g.add_edge(u, v);
                }
            }
            g
        })
        .collect();
    GraphCollection::new(n, colours)
}

/// Seed of trial `j` at grid point `i`.
fn trial_seed(base: u64, i: usize, j: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(base);
    r.set_stream(((i as u64) << 32) | j as u64);
    r.gen()
}

impl SweepPlan {
    pub fn from_args(args: &SweepArgs) -> CliResult<Self> {
        let grid = parse_grid(&args.delta_grid)?;
        if args.trials == 0 {
            return Err(CliError::Usage("--trials must be positive".into()));
        }
        if !(0.0..=1.0).contains(&args.noise) {
            return Err(CliError::Usage(format!("--noise {} outside [0, 1]", args.noise)));
        }
        let spec = match args.mode {
            SweepMode::Factor => {
                let spec = builtin_spec(&args.f).map_err(|e| CliError::Usage(e.to_string()))?;
                let spec = match args.t {
                    Some(t) => spec.with_t(t).map_err(|e| CliError::Usage(e.to_string()))?,
                    None => spec,
                };
                if !args.n.is_multiple_of(spec.r()) {
                    return Err(CliError::Usage(format!("{} does not tile n = {}", spec.name, args.n)));
                }
                Some(spec)
            }
            SweepMode::PerfectMatching if args.n % 2 == 1 => {
                return Err(CliError::Usage("perfect matchings need even n".into()));
            }
            _ => None,
        };
        if args.n < 2 {
            return Err(CliError::Usage("--n must be at least 2".into()));
        }
        let generator = args.generator.unwrap_or(match args.mode {
            SweepMode::PerfectMatching => GeneratorArg::Barrier,
            _ => GeneratorArg::Conditioned,
        });
        Ok(SweepPlan {
            mode: args.mode,
            n: args.n,
            trials: args.trials,
            grid,
            generator,
            noise: args.noise,
            spec,
            budget: args.budget,
            timing: args.timing,
            seed: args.seed.seed,
        })
    }

    fn colours(&self) -> usize {
        match self.mode {
            SweepMode::PerfectMatching => self.n / 2,
            SweepMode::Tree => self.n - 1,
            SweepMode::Factor => {
                let spec = self.spec.as_ref().expect("factor plans carry a spec");
                spec.t * self.n / spec.r()
            }
        }
    }

    /// One trial; `Ok(true)` when solved with a verified witness.
    pub fn trial(&self, x: f64, seed: u64) -> CliResult<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m, d) = (self.n, self.colours(), degree_for(x, self.n));
        let coll = match self.generator {
            GeneratorArg::Barrier => barrier_collection(n, m, d, self.noise, &mut rng),
            GeneratorArg::Conditioned => topped_up_collection(n, m, d, &mut rng),
        };
        let witness = match self.mode {
            SweepMode::PerfectMatching => {
                let k2 = builtin_spec("K2").expect("K2 is builtin");
                let template = factor_template(&k2.f, n / 2);
                let mode = TransversalMode::Factor { r: 2, t: 1 };
                match exists_transversal_exact(&coll, &template, &mode, self.budget)? {
                    Decision::Yes(emb) => Witness::from_embedding("factor", mode, true, &template, &emb),
                    Decision::No | Decision::BudgetExhausted => return Ok(false),
                }
            }
            SweepMode::Tree => {
                let tree = random_tree(n, 4, rng.gen())?;
                match rainbow_spanning_tree(&coll, &tree, &PipelineConfig::with_seed(rng.gen())) {
                    Ok(emb) => Witness::from_embedding("tree", TransversalMode::Rainbow, true, &tree.to_graph(), &emb),
                    Err(e) if e.is_internal() => return Err(e.into()),
                    Err(_) => return Ok(false),
                }
            }
            SweepMode::Factor => {
                let spec = self.spec.as_ref().expect("factor plans carry a spec");
                match ft_factor(&coll, spec, &PipelineConfig::with_seed(rng.gen())) {
                    Ok(f) => Witness::from_factor("factor", spec, &f, None),
                    Err(e) if e.is_internal() => return Err(e.into()),
                    Err(_) => return Ok(false),
                }
            }
        };
        witness.verify(&coll).map_err(CliError::InvalidWitness)?;
        Ok(true)
    }

    /// Runs every trial on the current rayon pool; rows follow the grid.
    pub fn run(&self) -> CliResult<Vec<Row>> {
        let jobs: Vec<(usize, usize)> =
            (0..self.grid.len()).flat_map(|i| (0..self.trials).map(move |j| (i, j))).collect();
        let mut results: Vec<(usize, usize, bool, f64)> = jobs
            .par_iter()
            .map(|&(i, j)| {
                let start = Instant::now();
                let ok = self.trial(self.grid[i], trial_seed(self.seed, i, j))?;
                let ms = match self.timing {
                    Timing::Wall => start.elapsed().as_secs_f64() * 1e3,
                    Timing::None => 0.0,
                };
                Ok((i, j, ok, ms))
            })
            .collect::<CliResult<_>>()?;
        results.sort_by_key(|&(i, j, ..)| (i, j));
        Ok(self
            .grid
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mine: Vec<_> = results.iter().filter(|r| r.0 == i).collect();
                Row {
                    delta_over_n: x,
                    trials: mine.len(),
                    successes: mine.iter().filter(|r| r.2).count(),
                    mean_runtime_ms: mine.iter().map(|r| r.3).sum::<f64>() / mine.len() as f64,
                }
            })
            .collect())
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{:.4},{},{},{:.3}", r.delta_over_n, r.trials, r.successes, r.mean_runtime_ms);
    }
    s
}

pub fn sweep_command(args: &SweepArgs) -> CliResult<Outcome> {
    let plan = SweepPlan::from_args(args)?;
    let rows = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| plan.run())?,
        None => plan.run()?,
    };
    write(&args.out.output, &to_csv(&rows))?;
    Ok(Outcome::Yes)
}
