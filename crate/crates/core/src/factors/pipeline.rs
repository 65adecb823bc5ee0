use rand::seq::SliceRandom;
use rand::Rng;

use crate::absorber::{build_absorber, SlotColourGraph};
use crate::collection::GraphCollection;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::partition::split_preserving_degrees_for;

use super::search::{common_unit_copy, cover_within, rainbow_copy_with, surplus_within};
use super::spec::{check_patterns, FCopy, FactorSpec, FtFactor};
use super::units::{Kind, Placed, Units};

/// Copy counts of the five steps: absorber, bulk, stragglers, tail, and
/// the number `ell` of units the absorber takes back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Sizes {
    n1: usize,
    n2: usize,
    n3: usize,
    n4: usize,
    ell: usize,
}

impl Sizes {
    /// `None` when the instance is too small for the absorber to exist.
    fn for_copies(n: usize, slots: usize, config: &PipelineConfig) -> Option<Sizes> {
        let nf = n as f64;
        let n1 = (config.beta * nf / 2.0).round() as usize;
        let n4 = (config.beta * nf).round() as usize;
        // The core needs 2ℓ slots besides the sinks' own.
        let ell = ((config.gamma * nf).round() as usize).min(slots * n1 / 3);
        let n3 = ell;
        if n1 == 0 || n1 + n3 + n4 >= n {
            return None;
        }
        Some(Sizes { n1, n2: n - n1 - n3 - n4, n3, n4, ell })
    }

    fn describe(&self, n: usize) -> String {
        format!(
            "copies={n} n1={} n2={} n3={} n4={} ell={}",
            self.n1, self.n2, self.n3, self.n4, self.ell
        )
    }
}

fn used_units(placed: &[Placed], universe: usize) -> VertexSet {
    let mut s = VertexSet::new(universe);
    for p in placed {
        for &u in &p.units {
            s.insert(u);
        }
    }
    s
}

fn attempt<R: Rng>(units: &Units, sizes: Sizes, threshold: f64, config: &PipelineConfig, rng: &mut R) -> Result<Vec<Placed>> {
    let coll = units.coll;
    let n = coll.n();
    let r = units.r();
    let s = units.slots();
    let total = units.count();
    let state = sizes.describe(n / r);
    let staged = |step: &str, e: Error| match e {
        Error::Internal(_) => e,
        e => Error::stage(step, e, state.clone()),
    };

    // Step 1: absorber copies, each held by many units.
    let mut free: Vec<usize> = (0..n).collect();
    let mut abs = Vec::with_capacity(sizes.n1);
    let mut slots = Vec::with_capacity(sizes.n1 * s);
    for _ in 0..sizes.n1 {
        let (copy, fit) = common_unit_copy(
            units,
            &free,
            &units.all(),
            r * config.k,
            threshold,
            config.retries.min(4),
            config.search_budget,
            rng,
        )
        .map_err(|e| staged("1 (absorber copies)", e))?;
        free.retain(|v| !copy.contains(v));
        let fit = fit.to_vec();
        for _ in 0..s {
            slots.push(fit.clone());
        }
        abs.push(copy);
    }
    let adj = SlotColourGraph::new(total, &slots);
    let template = build_absorber(&adj, sizes.ell, config.retries, rng).map_err(|e| staged("1 (absorber)", e))?;
    let c_size = s * sizes.n4 + sizes.ell + (s - 1) * sizes.n3;
    if template.reservoir.len() < c_size {
        return Err(staged(
            "1 (reservoir)",
            Error::NotFound(format!("reservoir holds {} units, {c_size} needed", template.reservoir.len())),
        ));
    }
    let mut c: Vec<usize> = template.reservoir.choose_multiple(rng, c_size).copied().collect();
    c.sort_unstable();
    let c_set = VertexSet::from_iter_with_capacity(total, c.iter().copied());

    // Step 2: split what is left and tile the bulk outside A ∪ C.
    let sizes2 = [r * sizes.n2, r * (sizes.n3 + sizes.n4)];
    let colours: Vec<usize> = (0..coll.m()).collect();
    let parts = match split_preserving_degrees_for(coll, &colours, &free, &sizes2, &free, config.slack, config.retries.min(4), rng) {
        Ok(plan) => plan.parts,
        Err(Error::PartitionRetriesExhausted { best_parts, .. }) => best_parts,
        Err(e) => return Err(staged("2 (partition)", e)),
    };
    let (v2, v3) = (&parts[0], &parts[1]);
    let mut d = units.all();
    for &a in &template.fixed_colours {
        d.remove(a);
    }
    d.difference_with(&c_set);
    let bulk = surplus_within(units, v2, &d, config, config.retries.min(4), rng).map_err(|e| staged("2 (bulk)", e))?;
    let mut b = d.clone();
    b.difference_with(&used_units(&bulk, total));

    // Step 3: one copy for every unit the bulk left over.
    let cover = cover_within(units, &b.to_vec(), &c_set, v3, config, rng).map_err(|e| staged("3 (cover)", e))?;

    // Step 4: tile the rest of V₃ from C.
    let mut v4 = v3.clone();
    for p in &cover {
        v4.retain(|v| !p.vertices.contains(v));
    }
    let mut c_bar = c_set.clone();
    c_bar.difference_with(&used_units(&cover, total));
    let tail = surplus_within(units, &v4, &c_bar, config, config.retries.min(4), rng).map_err(|e| staged("4 (tail)", e))?;
    let mut u = c_bar;
    u.difference_with(&used_units(&tail, total));

    // Step 5: the absorber takes the leftover units.
    let phi = template.absorb(&u.to_vec()).map_err(|e| staged("5 (absorb)", e))?;
    let mut out: Vec<Placed> = abs
        .into_iter()
        .enumerate()
        .map(|(i, copy)| Placed { vertices: copy, units: phi[i * s..(i + 1) * s].to_vec() })
        .collect();
    out.extend(bulk);
    out.extend(cover);
    out.extend(tail);
    Ok(out)
}

fn run(units: &Units, threshold: f64, config: &PipelineConfig) -> Result<Vec<Placed>> {
    let n = units.coll.n();
    let copies = n / units.r();
    let Some(sizes) = Sizes::for_copies(copies, units.slots(), config) else {
        let mut rng = config.rng(40);
        let all: Vec<usize> = (0..n).collect();
        return surplus_within(units, &all, &units.all(), config, config.retries, &mut rng)
            .map_err(|e| Error::stage("surplus (whole instance)", e, format!("copies={copies}")));
    };
    let mut last = None;
    for a in 0..config.retries as u64 {
        let mut rng = config.rng(41 + a);
        match attempt(units, sizes, threshold, config, &mut rng) {
            Ok(p) => return Ok(p),
            Err(e @ (Error::Internal(_) | Error::Precondition(_))) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn finish(units: &Units, placed: Vec<Placed>) -> FtFactor {
    let mut copies: Vec<FCopy> = placed.iter().map(|p| units.to_fcopy(p)).collect();
    copies.sort_by_key(|c| c.vertices.iter().min().copied());
    FtFactor { copies }
}

fn check_order(coll: &GraphCollection, spec: &FactorSpec) -> Result<usize> {
    let r = spec.r();
    if !coll.n().is_multiple_of(r) {
        return Err(Error::Precondition(format!("n = {} is not a multiple of r = {r}", coll.n())));
    }
    Ok(coll.n() / r)
}

/// An (F,t)-factor with `t·n` colours on `r·n` vertices: absorber copies
/// held by many colours, a degree-preserving split, a bulk tiling outside
/// the absorber's colours, a covering pass for the leftover colours, a tail
/// tiling from the reserved colours, then absorption of what remains.
pub fn ft_factor(coll: &GraphCollection, spec: &FactorSpec, config: &PipelineConfig) -> Result<FtFactor> {
    config.validate()?;
    let copies = check_order(coll, spec)?;
    if coll.m() != spec.t * copies {
        return Err(Error::Precondition(format!("need m = t·n = {}, got {}", spec.t * copies, coll.m())));
    }
    let units = Units::colours(coll, spec);
    let placed = run(&units, spec.delta_t_f, config)?;
    let factor = finish(&units, placed);
    factor
        .verify(coll, spec)
        .map_err(|v| Error::Internal(format!("factor fails verification: {v}")))?;
    Ok(factor)
}

/// An F-factor whose `i`-th copy follows one of the given patterns, each
/// pattern used once.
pub fn patterned_factor(
    coll: &GraphCollection,
    spec: &FactorSpec,
    patterns: &[Vec<usize>],
    config: &PipelineConfig,
) -> Result<FtFactor> {
    config.validate()?;
    let copies = check_order(coll, spec)?;
    if patterns.len() != copies {
        return Err(Error::Precondition(format!("{} patterns for {copies} copies", patterns.len())));
    }
    check_patterns(patterns, spec.e(), coll.m())?;
    let units = Units::new(coll, spec, Kind::Patterns(patterns));
    let threshold = spec.delta_p_f.unwrap_or(spec.delta_f);
    let placed = run(&units, threshold, config)?;
    let factor = finish(&units, placed);
    factor
        .verify_patterned(coll, spec, patterns)
        .map_err(|v| Error::Internal(format!("factor fails verification: {v}")))?;
    Ok(factor)
}

/// An (F,t)-factor when colours are plentiful, `m ≥ (1+η)·t·n`.
pub fn ft_factor_surplus(coll: &GraphCollection, spec: &FactorSpec, config: &PipelineConfig) -> Result<FtFactor> {
    config.validate()?;
    let copies = check_order(coll, spec)?;
    let need = (1.0 + config.eta) * (spec.t * copies) as f64;
    if (coll.m() as f64) < need - 1e-9 {
        return Err(Error::Precondition(format!("need m ≥ (1+eta)·t·n = {need:.1}, got {}", coll.m())));
    }
    let units = Units::colours(coll, spec);
    let all: Vec<usize> = (0..coll.n()).collect();
    let mut rng = config.rng(30);
    let placed = surplus_within(&units, &all, &units.all(), config, config.retries, &mut rng)?;
    let factor = finish(&units, placed);
    factor
        .verify(coll, spec)
        .map_err(|v| Error::Internal(format!("factor fails verification: {v}")))?;
    Ok(factor)
}

/// The best copy of `F` among `r·k` random allowed vertices, with every
/// allowed colour holding it.
pub fn common_colour_f_copy(
    coll: &GraphCollection,
    spec: &FactorSpec,
    forbidden_vertices: &[usize],
    forbidden_colours: &[usize],
    config: &PipelineConfig,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let free: Vec<usize> = (0..coll.n()).filter(|v| !forbidden_vertices.contains(v)).collect();
    let sample = spec.r() * config.k;
    if free.len() < sample {
        return Err(Error::Precondition(format!("{} free vertices, {sample} needed", free.len())));
    }
    let units = Units::new(coll, spec, Kind::Mono);
    let mut allowed = units.all();
    for &c in forbidden_colours {
        if c < coll.m() {
            allowed.remove(c);
        }
    }
    if allowed.is_empty() {
        return Err(Error::Precondition("no allowed colours".into()));
    }
    let mut rng = config.rng(20);
    let (copy, fit) = common_unit_copy(
        &units,
        &free,
        &allowed,
        sample,
        spec.delta_t_f,
        config.retries.min(4),
        config.search_budget,
        &mut rng,
    )?;
    Ok((copy, fit.to_vec()))
}

/// A t-copy of `F` inside the allowed vertices using colour `j` on at least
/// one edge: `F` inside `G_j` when `t = 1`, otherwise one edge of `G_j` and
/// the rest in distinct allowed colours.
pub fn t_copy_with_colour(
    coll: &GraphCollection,
    spec: &FactorSpec,
    j: usize,
    allowed_vertices: &[usize],
    allowed_colours: &[usize],
    config: &PipelineConfig,
) -> Result<FCopy> {
    if j >= coll.m() {
        return Err(Error::Precondition(format!("colour {j} out of range")));
    }
    let units = Units::colours(coll, spec);
    let verts = VertexSet::from_iter_with_capacity(coll.n(), allowed_vertices.iter().copied());
    let placed = if spec.t == 1 {
        let mut rng = config.rng(21);
        cover_within(&units, &[j], &VertexSet::new(coll.m()), allowed_vertices, config, &mut rng)?.remove(0)
    } else {
        let pool = VertexSet::from_iter_with_capacity(coll.m(), allowed_colours.iter().copied().filter(|&c| c != j));
        rainbow_copy_with(&units, j, &verts, &pool, config.search_budget)?
    };
    Ok(units.to_fcopy(&placed))
}

/// Vertex-disjoint t-copies, one through each colour of `targets`, with
/// colour sets disjoint; rainbow copies take their other colours from
/// `allowed_colours`.
pub fn colour_covering_factor(
    coll: &GraphCollection,
    spec: &FactorSpec,
    targets: &[usize],
    allowed_vertices: &[usize],
    allowed_colours: &[usize],
    config: &PipelineConfig,
) -> Result<FtFactor> {
    if spec.t > 1 && allowed_colours.len() < 2 * spec.t * targets.len() {
        return Err(Error::Precondition(format!(
            "{} allowed colours, 2t|C| = {} needed",
            allowed_colours.len(),
            2 * spec.t * targets.len()
        )));
    }
    if allowed_vertices.len() < spec.r() * targets.len() {
        return Err(Error::Precondition("too few allowed vertices".into()));
    }
    if targets.iter().any(|&j| j >= coll.m() || allowed_colours.contains(&j)) {
        return Err(Error::Precondition("targets must be colours outside the allowed pool".into()));
    }
    let units = Units::colours(coll, spec);
    let pool = VertexSet::from_iter_with_capacity(coll.m(), allowed_colours.iter().copied());
    let mut rng = config.rng(22);
    let placed = cover_within(&units, targets, &pool, allowed_vertices, config, &mut rng)
        .map_err(|e| Error::stage("cover", e, format!("targets={targets:?}")))?;
    Ok(FtFactor { copies: placed.iter().map(|p| units.to_fcopy(p)).collect() })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::constructions::{random_collection, Model};
    use crate::factors::builtin_spec;
    use crate::graph::Graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn conditioned(n: usize, m: usize, p: f64, min_deg: usize, seed: u64) -> GraphCollection {
        let model = Model::MinDegreeConditioned { p, min_degree: min_deg, retries: 100_000 };
        random_collection(n, m, &model, seed).unwrap()
    }

    #[test]
    fn sizes_degenerate_below_the_absorber() {
        let c = PipelineConfig::default();
        assert_eq!(Sizes::for_copies(3, 3, &c), None);
        let s = Sizes::for_copies(15, 3, &c).unwrap();
        assert_eq!((s.n1, s.n2, s.n3, s.n4, s.ell), (1, 11, 1, 2, 1));
        assert_eq!(s.n1 + s.n2 + s.n3 + s.n4, 15);
    }

    #[test]
    fn perfect_matching_on_complete_colours() {
        let spec = builtin_spec("K2").unwrap().with_t(1).unwrap();
        for n in [2, 4, 10, 20] {
            let coll = GraphCollection::identical(&Graph::complete(n), n / 2);
            let f = ft_factor(&coll, &spec, &PipelineConfig::with_seed(1)).unwrap();
            assert_eq!(f.copies.len(), n / 2);
            assert_eq!(f.colours_used(), (0..n / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn complete_colours_any_spec() {
        for (name, copies) in [("K3", 5), ("C4", 4), ("P3", 6), ("K1,3", 3), ("K3", 12)] {
            let base = builtin_spec(name).unwrap();
            for t in [1, base.e()] {
                let spec = base.with_t(t).unwrap();
                let n = spec.r() * copies;
                let coll = GraphCollection::identical(&Graph::complete(n), t * copies);
                let f = ft_factor(&coll, &spec, &PipelineConfig::with_seed(2)).unwrap();
                assert!(f.verify(&coll, &spec).is_ok(), "{name} t={t}");
                assert_eq!(f.colours_used().len(), t * copies);
            }
        }
    }

    #[test]
    fn surplus_examples() {
        let k2 = builtin_spec("K2").unwrap().with_t(1).unwrap();
        let coll = GraphCollection::identical(&Graph::complete(8), 5);
        let f = ft_factor_surplus(&coll, &k2, &PipelineConfig::with_seed(0)).unwrap();
        assert!(f.verify(&coll, &k2).is_ok());

        let k3 = builtin_spec("K3").unwrap();
        let coll = GraphCollection::identical(&Graph::complete(12), 14);
        let f = ft_factor_surplus(&coll, &k3, &PipelineConfig::with_seed(0)).unwrap();
        assert!(f.verify(&coll, &k3).is_ok());
        let coll = GraphCollection::identical(&Graph::complete(12), 12);
        assert!(matches!(ft_factor_surplus(&coll, &k3, &PipelineConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn surplus_dense_rate() {
        let k3 = builtin_spec("K3").unwrap();
        let m = (1.3f64 * 36.0).ceil() as usize;
        let mut ok = 0;
        for seed in 0..20 {
            let coll = conditioned(36, m, 0.9, 0, 500 + seed);
            if let Ok(f) = ft_factor_surplus(&coll, &k3, &PipelineConfig::with_seed(seed)) {
                assert!(f.verify(&coll, &k3).is_ok());
                ok += 1;
            }
        }
        assert!(ok >= 17, "{ok}/20");
    }

    #[test]
    fn common_copy_examples() {
        let k3 = builtin_spec("K3").unwrap();
        let coll = GraphCollection::identical(&Graph::complete(12), 5);
        let (copy, j) = common_colour_f_copy(&coll, &k3, &[], &[], &PipelineConfig::default()).unwrap();
        assert_eq!(copy.len(), 3);
        assert_eq!(j, (0..5).collect::<Vec<_>>());

        let one = GraphCollection::new(12, vec![Graph::complete(12)]);
        let (_, j) = common_colour_f_copy(&one, &k3, &[], &[], &PipelineConfig::default()).unwrap();
        assert_eq!(j, vec![0]);
        assert!(common_colour_f_copy(&one, &k3, &[0, 1], &[], &PipelineConfig::default()).is_err());
    }

    #[test]
    fn common_copy_rate() {
        let k3 = builtin_spec("K3").unwrap();
        let config = PipelineConfig { k: 8, ..PipelineConfig::default() };
        let mut ok = 0;
        for seed in 0..20 {
            let coll = conditioned(48, 48, 0.85, 0, 900 + seed);
            let (copy, j) = common_colour_f_copy(&coll, &k3, &[], &[], &PipelineConfig { rng_seed: seed, ..config.clone() }).unwrap();
            for &c in &j {
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    assert!(coll.has_edge(c, copy[a], copy[b]));
                }
            }
            ok += (j.len() as f64 >= 0.2 * 48.0) as usize;
        }
        assert!(ok >= 18, "{ok}/20");
    }

    #[test]
    fn t_copy_examples() {
        let k3 = builtin_spec("K3").unwrap();
        let one = k3.with_t(1).unwrap();
        let coll = GraphCollection::identical(&Graph::complete(6), 3);
        let all: Vec<usize> = (0..6).collect();
        let c = t_copy_with_colour(&coll, &one, 2, &all, &[], &PipelineConfig::default()).unwrap();
        assert_eq!(c.colours, vec![2, 2, 2]);

        let p3 = builtin_spec("P3").unwrap();
        let matching = Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]);
        let coll = GraphCollection::new(6, vec![matching.clone(), Graph::complete(6), Graph::complete(6), Graph::complete(6)]);
        let c = t_copy_with_colour(&coll, &p3, 0, &all, &[1, 2, 3], &PipelineConfig::default()).unwrap();
        let p3_edges = p3.f.edges();
        let on_matching = p3_edges.iter().zip(&c.colours).filter(|(&(a, b), &col)| {
            col == 0 && matching.has_edge(c.vertices[a], c.vertices[b])
        });
        assert_eq!(on_matching.count(), 1);
        let f = FtFactor { copies: vec![c] };
        assert!(f.verify_partial(&coll, &p3).is_ok());
    }

    #[test]
    fn t_copy_dense_instances() {
        let k3 = builtin_spec("K3").unwrap();
        let all: Vec<usize> = (0..24).collect();
        for seed in 0..3 {
            let coll = conditioned(24, 24, 0.85, 18, 300 + seed);
            let j = (seed % 24) as usize;
            let pool: Vec<usize> = (0..24).filter(|&c| c != j).collect();
            let c = t_copy_with_colour(&coll, &k3, j, &all, &pool, &PipelineConfig::default()).unwrap();
            assert!(c.colours.contains(&j));
            let f = FtFactor { copies: vec![c] };
            assert!(f.verify_partial(&coll, &k3).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn covering_examples() {
        let k3 = builtin_spec("K3").unwrap();
        let coll = GraphCollection::identical(&Graph::complete(9), 9);
        let all: Vec<usize> = (0..9).collect();
        let f = colour_covering_factor(&coll, &k3, &[], &all, &[], &PipelineConfig::default()).unwrap();
        assert!(f.copies.is_empty());
        let f = colour_covering_factor(&coll, &k3, &[0], &all, &[1, 2, 3, 4, 5, 6], &PipelineConfig::default()).unwrap();
        assert_eq!(f.copies.len(), 1);
        assert!(f.copies[0].colours.contains(&0));

        let all: Vec<usize> = (0..48).collect();
        for seed in 0..5 {
            let coll = conditioned(48, 48, 0.9, 39, 700 + seed);
            let pool: Vec<usize> = (3..48).collect();
            let f = colour_covering_factor(&coll, &k3, &[0, 1, 2], &all, &pool, &PipelineConfig::default()).unwrap();
            assert!(f.verify_partial(&coll, &k3).is_ok());
            let used = f.colours_used();
            assert!([0, 1, 2].iter().all(|c| used.contains(c)));
        }
    }

    #[test]
    fn k3_rainbow_factor_rate() {
        let k3 = builtin_spec("K3").unwrap();
        let mut ok = 0;
        for seed in 0..10 {
            let coll = conditioned(45, 45, 0.9, 36, 100 + seed);
            match ft_factor(&coll, &k3, &PipelineConfig::with_seed(seed)) {
                Ok(f) => {
                    assert!(f.verify(&coll, &k3).is_ok());
                    ok += 1;
                }
                Err(e) => assert!(!e.is_internal(), "{e}"),
            }
        }
        assert!(ok >= 7, "{ok}/10");
    }

    #[test]
    fn patterned_examples() {
        let c4 = builtin_spec("C4").unwrap();
        let coll = GraphCollection::identical(&Graph::complete(4), 4);
        let f = patterned_factor(&coll, &c4, &[vec![2, 0, 3, 1]], &PipelineConfig::default()).unwrap();
        assert_eq!(f.copies[0].colours, vec![2, 0, 3, 1]);

        let coll = GraphCollection::identical(&Graph::complete(16), 16);
        let pats: Vec<Vec<usize>> = (0..4).map(|i| vec![i, 4 + i, 8 + i, 12 + i]).collect();
        let f = patterned_factor(&coll, &c4, &pats, &PipelineConfig::default()).unwrap();
        assert!(f.verify_patterned(&coll, &c4, &pats).is_ok());
    }

    #[test]
    fn patterned_dense() {
        let c4 = builtin_spec("C4").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..5 {
            let coll = conditioned(32, 32, 0.92, 28, 40 + seed);
            let mut cols: Vec<usize> = (0..32).collect();
            cols.shuffle(&mut rng);
            let pats: Vec<Vec<usize>> = cols.chunks(4).map(<[usize]>::to_vec).collect();
            let f = patterned_factor(&coll, &c4, &pats, &PipelineConfig::with_seed(seed)).unwrap();
            assert!(f.verify_patterned(&coll, &c4, &pats).is_ok());
        }
    }
}

