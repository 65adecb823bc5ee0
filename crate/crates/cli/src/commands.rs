use std::path::Path;

use transversal::collection::GraphCollection;
use transversal::config::PipelineConfig;
use transversal::constructions::{
    bridgeless_lower_bound, patterned_counterexample, random_collection, random_tree, Base, GenMeta, Model,
};
use transversal::factors::{builtin_spec, check_patterns, ft_factor, ft_factor_surplus, patterned_factor, patterns_to_text, read_patterns, FactorSpec};
use transversal::oracle::{exists_transversal_exact, factor_template, Decision, TransversalMode};
use transversal::trees::rainbow_spanning_tree;

use crate::args::{BaseArg, Command, Construction, ModelArg, OracleAction, SolveCommon, SolveTarget};
use crate::witness::Witness;
use crate::{open, read_collection, read_tree, sidecar, write, Cli, CliError, CliResult, Outcome};

pub fn dispatch(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Gen { construction } => generate(construction),
        Command::Solve { target } => solve(target),
        Command::Oracle { action } => oracle(action),
        Command::Sweep(args) => crate::sweep::sweep_command(&args),
    }
}

fn write_instance(path: &Path, coll: &GraphCollection, meta: GenMeta) -> CliResult<()> {
    let meta = GenMeta { min_degree: coll.min_degree().ok(), ..meta };
    write(path, &coll.to_text())?;
    let mut json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    json.push('\n');
    write(&sidecar(path, "meta.json"), &json)
}

fn spec_for(name: &str, t: Option<usize>) -> CliResult<FactorSpec> {
    let spec = builtin_spec(name).map_err(|e| CliError::Usage(e.to_string()))?;
    match t {
        Some(t) => spec.with_t(t).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(spec),
    }
}

fn generate(c: Construction) -> CliResult<Outcome> {
    let usage = |e: transversal::error::Error| match e {
        transversal::error::Error::Precondition(msg) => CliError::Usage(msg),
        e => CliError::Core(e),
    };
    match c {
        Construction::Identical { n, m, base, p, seed, out } => {
            let b = match base {
                BaseArg::Complete => Base::Complete,
                BaseArg::Cycle => Base::Cycle,
                BaseArg::Path => Base::Path,
                BaseArg::Gnp => Base::Gnp { p },
            };
            let coll = random_collection(n, m, &Model::Identical { base: b }, seed.seed).map_err(usage)?;
            let mut meta = GenMeta::new("identical").param("n", n).param("m", m).param("base", format!("{base:?}").to_lowercase());
            if base == BaseArg::Gnp {
                meta = meta.param("p", p);
                meta.seed = Some(seed.seed);
            }
            write_instance(&out.output, &coll, meta)?;
        }
        Construction::BridgelessLb { f, copies, out } => {
            let spec = spec_for(&f, None)?;
            let coll = bridgeless_lower_bound(&spec, copies).map_err(usage)?;
            let meta = GenMeta::new("bridgeless_lower_bound").param("F", &spec.name).param("copies", copies);
            write_instance(&out.output, &coll, meta)?;
        }
        Construction::Random { model, n, m, p, noise, min_degree, retries, seed, out } => {
            let model = match model {
                ModelArg::IidGnp => Model::IidGnp { p },
                ModelArg::SharedBasePlusNoise => Model::SharedBasePlusNoise { p, noise },
                ModelArg::MinDegreeConditioned => Model::MinDegreeConditioned {
                    p,
                    min_degree: min_degree.ok_or_else(|| CliError::Usage("min_degree_conditioned needs --min-degree".into()))?,
                    retries,
                },
            };
            let coll = random_collection(n, m, &model, seed.seed).map_err(usage)?;
            let mut meta = GenMeta::new(model.name()).param("n", n).param("m", m).param("p", p);
            match model {
                Model::SharedBasePlusNoise { noise, .. } => meta = meta.param("noise", noise),
                Model::MinDegreeConditioned { min_degree, retries, .. } => {
                    meta = meta.param("min_degree", min_degree).param("retries", retries)
                }
                _ => {}
            }
            meta.seed = Some(seed.seed);
            write_instance(&out.output, &coll, meta)?;
        }
        Construction::PatternedCe { t, k, n, floor, attempts, seed, out } => {
            let ce = patterned_counterexample(t, k, n, floor, attempts, seed.seed).map_err(usage)?;
            let mut meta = GenMeta::new("patterned_counterexample")
                .param("t", t)
                .param("k", k)
                .param("n", n)
                .param("floor", ce.floor)
                .param("psi", format!("{:?}", ce.psi));
            meta.seed = Some(seed.seed);
            write_instance(&out.output, &ce.collection, meta)?;
            write(&sidecar(&out.output, "patterns"), &patterns_to_text(&[ce.pattern]))?;
        }
        Construction::Tree { n, max_degree, seed, out } => {
            let tree = random_tree(n, max_degree, seed.seed).map_err(usage)?;
            write(&out.output, &tree.to_text())?;
        }
    }
    Ok(Outcome::Yes)
}

fn config_for(common: &SolveCommon) -> CliResult<PipelineConfig> {
    let mut config = match &common.config {
        Some(path) => serde_json::from_reader(open(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => PipelineConfig::default(),
    };
    config.rng_seed = common.seed.seed;
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn read_pattern_file(path: &Path, spec: &FactorSpec, m: usize) -> CliResult<Vec<Vec<usize>>> {
    read_patterns(open(path)?, spec.e(), m).map_err(|source| CliError::Parse { path: path.into(), source })
}

fn solve(target: SolveTarget) -> CliResult<Outcome> {
    let (common, witness, coll) = match target {
        SolveTarget::Tree { common, tree } => {
            let coll = read_collection(&common.input)?;
            let tree = read_tree(&tree)?;
            let emb = rainbow_spanning_tree(&coll, &tree, &config_for(&common)?)?;
            let w = Witness::from_embedding("tree", TransversalMode::Rainbow, true, &tree.to_graph(), &emb);
            (common, w, coll)
        }
        SolveTarget::Factor { common, f, t } => {
            let coll = read_collection(&common.input)?;
            let spec = spec_for(&f, t)?;
            let config = config_for(&common)?;
            let copies = coll.n() / spec.r();
            let factor = if coll.m() > spec.t * copies {
                ft_factor_surplus(&coll, &spec, &config)?
            } else {
                ft_factor(&coll, &spec, &config)?
            };
            (common, Witness::from_factor("factor", &spec, &factor, None), coll)
        }
        SolveTarget::Patterned { common, f, patterns } => {
            let coll = read_collection(&common.input)?;
            let spec = spec_for(&f, None)?;
            let pats = read_pattern_file(&patterns, &spec, coll.m())?;
            let factor = patterned_factor(&coll, &spec, &pats, &config_for(&common)?)?;
            (common, Witness::from_factor("patterned", &spec, &factor, Some(&pats)), coll)
        }
    };
    witness.verify(&coll).map_err(CliError::InvalidWitness)?;
    write(&common.out.output, &witness.to_json())?;
    Ok(Outcome::Yes)
}

fn oracle(action: OracleAction) -> CliResult<Outcome> {
    match action {
        OracleAction::Decide { input, tree, f, t, patterns, budget, output } => {
            let coll = read_collection(&input)?;
            let n = coll.n();
            let (kind, template, mode, spanning) = match (tree, f) {
                (Some(path), _) => {
                    let tree = read_tree(&path)?;
                    let spanning = tree.order() == n;
                    ("tree", tree.to_graph(), TransversalMode::Rainbow, spanning)
                }
                (None, Some(name)) => {
                    let spec = spec_for(&name, t)?;
                    if n % spec.r() != 0 {
                        return Err(CliError::Usage(format!("{} does not tile {n} vertices", spec.name)));
                    }
                    let copies = n / spec.r();
                    let template = factor_template(&spec.f, copies);
                    match patterns {
                        Some(path) => {
                            let pats = read_pattern_file(&path, &spec, coll.m())?;
                            if pats.len() != copies {
                                return Err(CliError::Usage(format!("{} patterns for {copies} copies", pats.len())));
                            }
                            check_patterns(&pats, spec.e(), coll.m()).map_err(|e| CliError::Usage(e.to_string()))?;
                            ("patterned", template, TransversalMode::Patterned { r: spec.r(), patterns: pats }, true)
                        }
                        None => ("factor", template, TransversalMode::Factor { r: spec.r(), t: spec.t }, true),
                    }
                }
                (None, None) => return Err(CliError::Usage("decide needs --tree or --F".into())),
            };
            match exists_transversal_exact(&coll, &template, &mode, budget)? {
                Decision::Yes(emb) => {
                    println!("yes");
                    let w = Witness::from_embedding(kind, mode, spanning, &template, &emb);
                    w.verify(&coll).map_err(CliError::InvalidWitness)?;
                    if let Some(path) = output {
                        write(&path, &w.to_json())?;
                    }
                    Ok(Outcome::Yes)
                }
                Decision::No => {
                    println!("no");
                    Ok(Outcome::No)
                }
                Decision::BudgetExhausted => {
                    println!("budget_exhausted");
                    Ok(Outcome::No)
                }
            }
        }
        OracleAction::Verify { input, witness } => {
            let coll = read_collection(&input)?;
            let w: Witness = serde_json::from_reader(open(&witness)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", witness.display())))?;
            match w.verify(&coll) {
                Ok(()) => {
                    println!("ok");
                    Ok(Outcome::Yes)
                }
                Err(v) => {
                    println!("violation: {v}");
                    Ok(Outcome::No)
                }
            }
        }
    }
}
