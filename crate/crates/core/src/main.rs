use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tribegames::congestion::{check_smoothness, gen_gk_tree, SmoothnessMode, SmoothnessParams};
use tribegames::contribution::{build_contribution_game, gen_additive_chain, gen_altruistic_square, gen_convex_path};
use tribegames::equilibria::{
    compute_pot, enumerate_equilibria, evaluate_profile, ConceptKind, DeviationConcept, Limits, PairRule,
};
use tribegames::grouping::{gen_fig1, gen_figc_cycle, gen_k_family, Variant};
use tribegames::io::{load_game, load_profile, read_json, to_json, write_json, FamilyPayload, GameFile, LoadedGame};
use tribegames::partition::sweep_partitions;
use tribegames::report::{reproduce, ReproduceOptions, DEFAULT_SEED};
use tribegames::{Error, Partition, Profile, Rational, Result};

#[derive(Parser)]
#[command(name = "tribegames", version, about = "Exact equilibrium analysis of games played by tribes")]
struct Cli {
    /// Worker threads for profile scans (defaults to the available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one of the built-in constructions as a game file.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        /// Size parameter for grouping-k (cliques) and gk-tree (depth).
        #[arg(long)]
        k: Option<usize>,
        /// For contribution constructions, as `p/q`.
        #[arg(long)]
        epsilon: Option<Rational>,
        /// Budget discretisation for contribution constructions.
        #[arg(long)]
        grid: Option<u32>,
        /// Grouping-k only: use the tribal weighting and pair tribes.
        #[arg(long)]
        tribal: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        partition_out: Option<PathBuf>,
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Check one profile, or list every equilibrium.
    Solve {
        #[arg(long)]
        game: PathBuf,
        /// A partition file, `singleton` or `constant`.
        #[arg(long, default_value = "singleton")]
        partition: String,
        /// Comma-separated deviation concepts.
        #[arg(long, default_value = "unilateral", value_delimiter = ',')]
        concept: Vec<ConceptKind>,
        #[arg(long, value_enum, default_value_t = PairRuleArg::BothStrict)]
        pair_rule: PairRuleArg,
        /// Check this profile instead of enumerating.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Worst equilibrium over a set of partitions against the optimum.
    Pot {
        #[arg(long)]
        game: PathBuf,
        /// `all`, `k=N`, `singleton`, `constant`, or a file holding one
        /// partition or an array of them.
        #[arg(long, default_value = "all")]
        partitions: String,
        #[arg(long, default_value = "unilateral")]
        concept: ConceptKind,
        #[arg(long, value_enum, default_value_t = PairRuleArg::BothStrict)]
        pair_rule: PairRuleArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the smoothness inequality of a congestion or routing game.
    Smoothness {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value = "singleton")]
        partition: String,
        #[arg(long)]
        lambda: Rational,
        #[arg(long)]
        mu: Rational,
        /// Check this many random pairs instead of all of them.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the summary table, with witnesses, under a directory.
    Reproduce {
        /// Fewer random instances and smaller families.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "reproduction")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Fig1Selfish,
    Fig1Tribal,
    GroupingK,
    FigcCycle,
    AdditiveChain,
    ConvexPath,
    AltruisticSquare,
    GkTree,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairRuleArg {
    BothStrict,
    OneStrictOneWeak,
}

impl From<PairRuleArg> for PairRule {
    fn from(a: PairRuleArg) -> PairRule {
        match a {
            PairRuleArg::BothStrict => PairRule::BothStrict,
            PairRuleArg::OneStrictOneWeak => PairRule::OneStrictOneWeak,
        }
    }
}

/// Exit statuses; 1 is a negative answer, not an error.
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_OTHER: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NEGATIVE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Json { .. } => EXIT_INPUT,
                Error::BudgetExceeded { .. } => EXIT_BUDGET,
                _ => EXIT_OTHER,
            })
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

fn partition_arg(arg: &str, players: usize) -> Result<Partition> {
    let p = match arg {
        "singleton" => Partition::singleton(players),
        "constant" => Partition::constant(players),
        path => read_json(Path::new(path))?,
    };
    if p.len() != players {
        return Err(Error::Structural(format!("partition covers {} players, the game has {players}", p.len())));
    }
    Ok(p)
}

fn partitions_arg(arg: &str, players: usize, limits: &Limits) -> Result<Vec<Partition>> {
    if arg == "all" {
        return Ok(sweep_partitions(players, None, limits.partition_budget)?.collect());
    }
    if let Some(k) = arg.strip_prefix("k=") {
        let k: usize = k.parse().map_err(|_| Error::Config(format!("bad tribe count in `{arg}`")))?;
        return Ok(sweep_partitions(players, Some(k), limits.partition_budget)?.collect());
    }
    if arg == "singleton" || arg == "constant" {
        return Ok(vec![partition_arg(arg, players)?]);
    }
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Partition),
        Many(Vec<Partition>),
    }
    let list = match read_json::<OneOrMany>(Path::new(arg))? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(ps) => ps,
    };
    if list.is_empty() {
        return Err(Error::Config(format!("{arg} holds no partitions")));
    }
    if let Some(p) = list.iter().find(|p| p.len() != players) {
        return Err(Error::Structural(format!("partition covers {} players, the game has {players}", p.len())));
    }
    Ok(list)
}

fn concept_for(loaded: &LoadedGame, kind: ConceptKind, rule: PairRuleArg) -> DeviationConcept {
    loaded.concept(kind).with_pair_rule(rule.into())
}

struct Generated {
    file: GameFile,
    partition: Partition,
    profile: Profile,
}

fn generate(family: GenFamily, k: Option<usize>, epsilon: Option<Rational>, grid: Option<u32>, tribal: bool) -> Result<Generated> {
    let grouping = |inst: tribegames::grouping::GroupingInstance| -> Result<Generated> {
        Ok(Generated {
            file: GameFile::from_family(FamilyPayload::Grouping(inst.spec))?,
            partition: inst.partition,
            profile: inst.profile,
        })
    };
    let eps = epsilon.unwrap_or(Rational::new(1, 100));
    let contribution = |inst: tribegames::contribution::ContributionInstance, invest: &[(usize, usize)]| -> Result<Generated> {
        let spec = inst.spec.with_grid(grid.unwrap_or(1));
        let built = build_contribution_game(&spec)?;
        let moves: Vec<_> = invest.iter().map(|&(p, e)| (p, e, spec.budgets[p])).collect();
        let profile = built.profile_with(&moves)?;
        Ok(Generated { file: GameFile::from_family(FamilyPayload::Contribution(spec))?, partition: inst.partition, profile })
    };
    match family {
        GenFamily::Fig1Selfish => grouping(gen_fig1(Variant::SelfishAltruistic)),
        GenFamily::Fig1Tribal => grouping(gen_fig1(Variant::Tribal)),
        GenFamily::FigcCycle => grouping(gen_figc_cycle()),
        GenFamily::GroupingK => {
            let variant = if tribal { Variant::Tribal } else { Variant::SelfishAltruistic };
            grouping(gen_k_family(k.unwrap_or(3), variant)?)
        }
        GenFamily::AdditiveChain => contribution(gen_additive_chain(), &[(1, 1)]),
        GenFamily::ConvexPath => contribution(gen_convex_path(eps), &[(0, 0), (1, 0), (2, 2), (3, 2), (4, 4), (5, 4)]),
        GenFamily::AltruisticSquare => {
            let eps = epsilon.unwrap_or(Rational::new(1, 10));
            contribution(gen_altruistic_square(eps), &[(1, 1), (2, 1), (3, 3), (0, 3)])
        }
        GenFamily::GkTree => {
            let t = gen_gk_tree(k.unwrap_or(2))?;
            Ok(Generated {
                file: GameFile::from_family(FamilyPayload::Congestion(t.spec))?,
                partition: t.partition,
                profile: t.nash_profile,
            })
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut limits = Limits::from_env()?;
    if let Some(w) = cli.workers {
        limits = limits.with_workers(w);
    }
    match cli.command {
        Command::Gen { family, k, epsilon, grid, tribal, out, partition_out, profile_out } => {
            let g = generate(family, k, epsilon, grid, tribal)?;
            emit(&g.file, out.as_deref())?;
            if let Some(p) = partition_out {
                write_json(&p, &g.partition)?;
            }
            if let Some(p) = profile_out {
                write_json(&p, &g.profile)?;
            }
            Ok(true)
        }
        Command::Solve { game, partition, concept, pair_rule, profile, out } => {
            let loaded = load_game(&game)?;
            let partition = partition_arg(&partition, loaded.game.player_count())?;
            let concepts: Vec<_> = concept.iter().map(|&k| concept_for(&loaded, k, pair_rule)).collect();
            match profile {
                Some(path) => {
                    let profile = load_profile(&path)?;
                    let report = evaluate_profile(&loaded.game, &partition, &profile, &concepts, &limits)?;
                    emit(&report, out.as_deref())?;
                    Ok(report.survives_all())
                }
                None => {
                    let [single] = concepts.as_slice() else {
                        return Err(Error::Config("enumeration takes exactly one concept".into()));
                    };
                    let all = enumerate_equilibria(&loaded.game, &partition, single, &limits)?;
                    emit(&all, out.as_deref())?;
                    Ok(true)
                }
            }
        }
        Command::Pot { game, partitions, concept, pair_rule, out } => {
            let loaded = load_game(&game)?;
            let parts = partitions_arg(&partitions, loaded.game.player_count(), &limits)?;
            let report = compute_pot(&loaded.game, &parts, &concept_for(&loaded, concept, pair_rule), &limits)?;
            emit(&report, out.as_deref())?;
            Ok(true)
        }
        Command::Smoothness { game, partition, lambda, mu, sample, seed, out } => {
            let loaded = load_game(&game)?;
            let spec = loaded
                .file
                .family
                .congestion_spec()
                .ok_or_else(|| Error::Config("smoothness applies to congestion and routing games".into()))?;
            let partition = partition_arg(&partition, loaded.game.player_count())?;
            let params = SmoothnessParams::new(lambda, mu)?;
            let mode = match sample {
                Some(count) => SmoothnessMode::Sampled { count, seed },
                None => SmoothnessMode::Exhaustive,
            };
            let report = check_smoothness(&spec, &partition, &params, mode, &limits)?;
            emit(&report, out.as_deref())?;
            Ok(report.ok)
        }
        Command::Reproduce { fast, seed, out } => {
            let rep = reproduce(ReproduceOptions { fast, seed, limits })?;
            rep.write(&out)?;
            print!("{}", rep.to_text());
            Ok(rep.passed())
        }
    }
}
