//! The reproduction suite.
//!
//! Runs every lower-bound construction exactly, sweeps seeded random
//! instances against the matching upper bounds, and summarises the outcome
//! as one table row per (game family, measure).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::congestion::{
    self, build_congestion_game, check_smoothness, compile, gen_gk_tree, load_balancing_to_routing,
    quad_inequality_scan, smoothness_pot_bound, SmoothnessMode, SmoothnessParams,
};
use crate::contribution::{
    self, build_contribution_game, gen_additive_chain, gen_altruistic_square, gen_convex_path, ContributionInstance,
    RewardClass,
};
use crate::equilibria::{
    compute_optimum, compute_pot, evaluate_profile, is_equilibrium, ConceptKind, DeviationConcept, Limits, PotRatio,
    PotReport,
};
use crate::error::{Error, Result};
use crate::game::{Game, Profile};
use crate::grouping::{self, build_grouping_game, gen_fig1, gen_figc_cycle, gen_k_family, Variant};
use crate::io::{parse_json, to_json, write_json, FamilyPayload, GameFile};
use crate::partition::{sweep_partitions, Partition};
use crate::rational::Rational;

pub const DEFAULT_SEED: u64 = 7_2024;

#[derive(Debug, Clone, Copy)]
pub struct ReproduceOptions {
    pub fast: bool,
    pub seed: u64,
    pub limits: Limits,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions { fast: false, seed: DEFAULT_SEED, limits: Limits::default() }
    }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Worst-case ratio seen over a batch of random instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepStat {
    pub bound: Rational,
    pub instances: usize,
    /// Instances where no profile was an equilibrium, so there was nothing to bound.
    pub without_equilibria: usize,
    pub max_ratio: PotRatio,
    pub worst_instance: Option<usize>,
    pub violations: usize,
}

impl SweepStat {
    fn new(bound: Rational) -> SweepStat {
        SweepStat {
            bound,
            instances: 0,
            without_equilibria: 0,
            max_ratio: PotRatio::Finite(Rational::ONE),
            worst_instance: None,
            violations: 0,
        }
    }

    fn record(&mut self, instance: usize, report: &PotReport) {
        self.instances += 1;
        if report.equilibrium_count == 0 {
            self.without_equilibria += 1;
            return;
        }
        if self.worst_instance.is_none() || self.max_ratio.max(report.ratio) != self.max_ratio {
            self.max_ratio = self.max_ratio.max(report.ratio);
            self.worst_instance = Some(instance);
        }
        if !report.ratio.at_most(self.bound) {
            self.violations += 1;
        }
    }

    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

fn pot_under(game: &Game, partitions: &[Partition], concept: &DeviationConcept, limits: &Limits) -> Result<PotReport> {
    compute_pot(game, partitions, concept, limits)
}

fn all_partitions(n: usize, limits: &Limits) -> Result<Vec<Partition>> {
    Ok(sweep_partitions(n, None, limits.partition_budget)?.collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupingSweep {
    pub seed: u64,
    pub k: usize,
    pub max_players: usize,
    pub all_partitions: SweepStat,
    pub singleton: SweepStat,
    pub constant: SweepStat,
    /// Tribes moving jointly; checked for two cliques only.
    pub oligopolistic: Option<SweepStat>,
}

impl GroupingSweep {
    pub fn ok(&self) -> bool {
        self.all_partitions.ok()
            && self.singleton.ok()
            && self.constant.ok()
            && self.oligopolistic.as_ref().is_none_or(SweepStat::ok)
    }
}

/// Random grouping games with 2 to `max_players` players, `k` cliques and
/// integer weights in `0..=3`.
pub fn grouping_sweep(seed: u64, instances: usize, k: usize, max_players: usize, limits: &Limits) -> Result<GroupingSweep> {
    let kk = k as i64;
    let mut out = GroupingSweep {
        seed,
        k,
        max_players,
        all_partitions: SweepStat::new(int(2 * kk - 1)),
        singleton: SweepStat::new(int(kk)),
        constant: SweepStat::new(int(kk)),
        oligopolistic: (k == 2).then(|| SweepStat::new(int(2))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unilateral = DeviationConcept::unilateral();
    for idx in 0..instances {
        let n = rng.gen_range(2..=max_players);
        let spec = grouping::random_spec(&mut rng, n, k, 3);
        let game = build_grouping_game(&spec)?;
        let partitions = all_partitions(n, limits)?;
        out.all_partitions.record(idx, &pot_under(&game, &partitions, &unilateral, limits)?);
        out.singleton.record(idx, &pot_under(&game, &[Partition::singleton(n)], &unilateral, limits)?);
        out.constant.record(idx, &pot_under(&game, &[Partition::constant(n)], &unilateral, limits)?);
        if let Some(stat) = out.oligopolistic.as_mut() {
            stat.record(idx, &pot_under(&game, &partitions, &DeviationConcept::oligopolistic(), limits)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContributionSweep {
    pub seed: u64,
    pub class: String,
    pub concept: ConceptKind,
    pub max_profiles: u128,
    /// Draws thrown away because their profile space exceeded `max_profiles`.
    pub redrawn: usize,
    pub all_partitions: SweepStat,
    pub singleton: SweepStat,
    pub constant: SweepStat,
}

impl ContributionSweep {
    pub fn ok(&self) -> bool {
        self.all_partitions.ok() && self.singleton.ok() && self.constant.ok()
    }
}

/// Random contribution games on 2 to 4 vertices with grid 1 or 2. Additive
/// rewards are checked against unilateral equilibria, product rewards
/// against pairwise ones.
pub fn contribution_sweep(
    seed: u64,
    instances: usize,
    class: RewardClass,
    max_profiles: u128,
    limits: &Limits,
) -> Result<ContributionSweep> {
    let (name, kind, bounds) = match class {
        RewardClass::Additive => ("additive", ConceptKind::Unilateral, (int(2), int(1), int(1))),
        RewardClass::Convex => ("convex", ConceptKind::Pairwise, (int(4), int(2), int(2))),
    };
    let mut out = ContributionSweep {
        seed,
        class: name.to_string(),
        concept: kind,
        max_profiles,
        redrawn: 0,
        all_partitions: SweepStat::new(bounds.0),
        singleton: SweepStat::new(bounds.1),
        constant: SweepStat::new(bounds.2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = 0;
    while idx < instances {
        let vertices = rng.gen_range(2..=4);
        let grid = rng.gen_range(1..=2);
        let spec = contribution::random_spec(&mut rng, vertices, class, grid);
        let built = build_contribution_game(&spec)?;
        if built.game.profile_count() > max_profiles {
            out.redrawn += 1;
            continue;
        }
        let concept = match kind {
            ConceptKind::Pairwise => DeviationConcept::pairwise(built.adjacency.clone()),
            other => DeviationConcept::of_kind(other),
        };
        let game = &built.game;
        out.all_partitions.record(idx, &pot_under(game, &all_partitions(vertices, limits)?, &concept, limits)?);
        out.singleton.record(idx, &pot_under(game, &[Partition::singleton(vertices)], &concept, limits)?);
        out.constant.record(idx, &pot_under(game, &[Partition::constant(vertices)], &concept, limits)?);
        idx += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CongestionSweep {
    pub seed: u64,
    pub instances: usize,
    pub lambda: Rational,
    pub mu: Rational,
    /// (instance, partition) combinations checked for smoothness.
    pub smoothness_checks: usize,
    pub smoothness_failures: usize,
    pub min_slack: Rational,
    pub all_partitions: SweepStat,
    pub singleton: SweepStat,
    pub constant: SweepStat,
}

impl CongestionSweep {
    pub fn ok(&self) -> bool {
        self.smoothness_failures == 0 && self.all_partitions.ok() && self.singleton.ok() && self.constant.ok()
    }
}

/// Random congestion games with up to 4 players, 4 resources and 3
/// strategies each. Every partition is checked for (8/3, 1/3)-smoothness
/// exhaustively, and the unilateral ratios are compared with 4 (all
/// partitions), 5/2 (singletons) and 3 (one tribe).
pub fn congestion_sweep(seed: u64, instances: usize, limits: &Limits) -> Result<CongestionSweep> {
    let params = SmoothnessParams::new(Rational::new(8, 3), Rational::new(1, 3))?;
    let mut out = CongestionSweep {
        seed,
        instances: 0,
        lambda: params.lambda,
        mu: params.mu,
        smoothness_checks: 0,
        smoothness_failures: 0,
        min_slack: Rational::ZERO,
        all_partitions: SweepStat::new(int(4)),
        singleton: SweepStat::new(Rational::new(5, 2)),
        constant: SweepStat::new(int(3)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unilateral = DeviationConcept::unilateral();
    let mut first = true;
    for idx in 0..instances {
        let spec = congestion::random_spec(&mut rng, 4, 4, 3);
        let n = spec.player_count();
        let game = build_congestion_game(&spec)?;
        let partitions = all_partitions(n, limits)?;
        for p in &partitions {
            let report = check_smoothness(&spec, p, &params, SmoothnessMode::Exhaustive, limits)?;
            out.smoothness_checks += 1;
            if !report.ok {
                out.smoothness_failures += 1;
            }
            if first || report.min_slack < out.min_slack {
                out.min_slack = report.min_slack;
                first = false;
            }
        }
        out.all_partitions.record(idx, &pot_under(&game, &partitions, &unilateral, limits)?);
        out.singleton.record(idx, &pot_under(&game, &[Partition::singleton(n)], &unilateral, limits)?);
        out.constant.record(idx, &pot_under(&game, &[Partition::constant(n)], &unilateral, limits)?);
        out.instances += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GkResult {
    pub k: usize,
    pub players: usize,
    pub nash_cost: Rational,
    pub down_cost: Rational,
    pub nash_certified: bool,
    pub ratio_vs_down: Rational,
    /// Exhaustive optimum, for small `k` only.
    pub optimum: Option<Rational>,
    pub ratio_vs_optimum: Option<Rational>,
    /// `4k / (k + 3)`.
    pub lower_bound: Rational,
}

impl GkResult {
    pub fn ok(&self) -> bool {
        let kk = self.k as i64;
        self.nash_certified
            && self.nash_cost == int(4 * kk)
            && self.down_cost == int(kk + 3)
            && self.ratio_vs_optimum.is_none_or(|r| r >= self.lower_bound)
    }
}

pub fn gk_check(k: usize, enumerate_optimum: bool, limits: &Limits) -> Result<GkResult> {
    let tree = gen_gk_tree(k)?;
    let game = build_congestion_game(&tree.spec)?;
    let nash_cost = game.social_welfare(&tree.nash_profile)?;
    let down_cost = game.social_welfare(&tree.down_profile)?;
    let stable = is_equilibrium(&game, &tree.partition, &tree.nash_profile, &DeviationConcept::unilateral(), limits)?;
    let optimum = if enumerate_optimum { Some(compute_optimum(&game, limits)?.1) } else { None };
    let kk = k as i64;
    Ok(GkResult {
        k,
        players: game.player_count(),
        nash_cost,
        down_cost,
        nash_certified: stable.is_stable(),
        ratio_vs_down: nash_cost / down_cost,
        optimum,
        ratio_vs_optimum: optimum.map(|o| nash_cost / o),
        lower_bound: Rational::new(4 * kk, kk + 3),
    })
}

/// Player-by-player cost equality between a load-balancing game and its
/// routing image, over every profile. Returns the number of profiles compared.
pub fn gadget_equality(spec: &congestion::CongestionSpec, limits: &Limits) -> Result<Option<u128>> {
    let original = build_congestion_game(spec)?;
    let routed = build_congestion_game(&compile(&load_balancing_to_routing(spec)?)?)?;
    if original.strategy_counts() != routed.strategy_counts() {
        return Ok(None);
    }
    let count = original.profile_count();
    if count > limits.profile_budget as u128 {
        return Err(Error::BudgetExceeded { what: "gadget comparison", needed: count, limit: limits.profile_budget });
    }
    for idx in 0..count {
        let s = original.profile_at(idx);
        if original.payoffs(&s)? != routed.payoffs(&s)? {
            return Ok(None);
        }
    }
    Ok(Some(count))
}

/// A stored profile that `solve` can re-certify.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub id: String,
    pub concepts: Vec<ConceptKind>,
    pub game: GameFile,
    pub partition: Partition,
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCell {
    pub instance: String,
    pub ratio: PotRatio,
    /// What the ratio must satisfy, e.g. `= 3` or `>= 32/11`.
    pub expected: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub description: String,
    pub instances: usize,
    pub max_ratio: PotRatio,
    pub bound: Rational,
    pub violations: usize,
}

impl SweepCell {
    fn from_stat(description: impl Into<String>, stat: &SweepStat) -> SweepCell {
        SweepCell {
            description: description.into(),
            instances: stat.instances,
            max_ratio: stat.max_ratio,
            bound: stat.bound,
            violations: stat.violations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub game: String,
    pub measure: String,
    pub reference_value: String,
    pub witness: Option<WitnessCell>,
    pub sweep: Option<SweepCell>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub seed: u64,
    pub fast: bool,
    pub rows: Vec<TableRow>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::Pass) && self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Aligned text table with exact values and 6-place decimals.
    pub fn to_text(&self) -> String {
        let header = ["game", "measure", "reference", "witness ratio", "sweep max (bound)", "verdict"];
        let mut lines: Vec<[String; 6]> = vec![header.map(String::from)];
        for r in &self.rows {
            lines.push([
                r.game.clone(),
                r.measure.clone(),
                r.reference_value.clone(),
                r.witness.as_ref().map_or("-".into(), |w| format!("{} {}", approx(w.ratio), w.instance)),
                r.sweep.as_ref().map_or("-".into(), |s| {
                    format!("{} (<= {}, n={})", approx(s.max_ratio), s.bound, s.instances)
                }),
                verdict_text(r.verdict).into(),
            ]);
        }
        let widths: Vec<usize> = (0..6).map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = format!("seed {}{}\n\n", self.seed, if self.fast { " (fast)" } else { "" });
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(cells.join(" | ").trim_end());
            out.push('\n');
        }
        out.push_str("\nchecks\n");
        for c in &self.checks {
            let _ = writeln!(out, "  {} {}: {}", verdict_text(c.verdict), c.name, c.detail);
        }
        if !self.notes.is_empty() {
            out.push_str("\nnotes\n");
            for n in &self.notes {
                let _ = writeln!(out, "  - {n}");
            }
        }
        let _ = writeln!(out, "\noverall: {}", verdict_text(Verdict::of(self.passed())));
        out
    }

    /// Writes `report.json`, `report.txt` and one directory per witness with
    /// `game.json`, `partition.json`, `profile.json` and `concepts.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io_err = |path: &Path, source| Error::Io { path: path.display().to_string(), source };
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let report = dir.join("report.json");
        fs::write(&report, self.to_json()).map_err(|e| io_err(&report, e))?;
        let text = dir.join("report.txt");
        fs::write(&text, self.to_text()).map_err(|e| io_err(&text, e))?;
        for w in &self.witnesses {
            let wdir = dir.join("witnesses").join(&w.id);
            fs::create_dir_all(&wdir).map_err(|e| io_err(&wdir, e))?;
            write_json(&wdir.join("game.json"), &w.game)?;
            write_json(&wdir.join("partition.json"), &w.partition)?;
            write_json(&wdir.join("profile.json"), &w.profile)?;
            let names: Vec<&str> = w.concepts.iter().map(|c| c.name()).collect();
            let concepts = wdir.join("concepts.txt");
            fs::write(&concepts, names.join(",") + "\n").map_err(|e| io_err(&concepts, e))?;
        }
        Ok(())
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    }
}

/// `p/q ~ d.dddddd`, or `inf`.
pub fn approx(r: PotRatio) -> String {
    match r {
        PotRatio::Finite(x) => format!("{r} ~ {}", x.to_decimal(6)),
        PotRatio::Unbounded => "inf".into(),
    }
}

/// Re-certifies a witness the way `solve` does: from its serialised game file.
pub fn recertify(w: &Witness, limits: &Limits) -> Result<bool> {
    let file: GameFile = parse_json(&to_json(&w.game), &w.id)?;
    let loaded = file.load()?;
    let concepts: Vec<DeviationConcept> = w.concepts.iter().map(|&k| loaded.concept(k)).collect();
    Ok(evaluate_profile(&loaded.game, &w.partition, &w.profile, &concepts, limits)?.survives_all())
}

struct Builder {
    opts: ReproduceOptions,
    rows: Vec<TableRow>,
    checks: Vec<Check>,
    notes: Vec<String>,
    witnesses: Vec<Witness>,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), detail: detail.into(), verdict: Verdict::of(ok) });
    }

    fn witness(&mut self, id: impl Into<String>, concepts: &[ConceptKind], family: FamilyPayload, partition: &Partition, profile: &Profile) -> Result<()> {
        self.witnesses.push(Witness {
            id: id.into(),
            concepts: concepts.to_vec(),
            game: GameFile::from_family(family)?,
            partition: partition.clone(),
            profile: profile.clone(),
        });
        Ok(())
    }

    fn row(
        &mut self,
        game: &str,
        measure: &str,
        reference: &str,
        witness: Option<(String, PotRatio, String, bool)>,
        sweep: Option<(SweepCell, bool)>,
    ) {
        let ok = witness.as_ref().is_none_or(|w| w.3) && sweep.as_ref().is_none_or(|s| s.1);
        self.rows.push(TableRow {
            game: game.into(),
            measure: measure.into(),
            reference_value: reference.into(),
            witness: witness.map(|(instance, ratio, expected, _)| WitnessCell { instance, ratio, expected }),
            sweep: sweep.map(|s| s.0),
            verdict: Verdict::of(ok),
        });
    }

    fn limits(&self) -> &Limits {
        &self.opts.limits
    }
}

fn exact(ratio: PotRatio, value: Rational) -> bool {
    ratio == PotRatio::Finite(value)
}

/// Runs the whole suite.
pub fn reproduce(opts: ReproduceOptions) -> Result<Reproduction> {
    let mut b = Builder { opts, rows: Vec::new(), checks: Vec::new(), notes: Vec::new(), witnesses: Vec::new() };
    grouping_rows(&mut b)?;
    contribution_rows(&mut b)?;
    routing_rows(&mut b)?;

    let limits = *b.limits();
    let total = b.witnesses.len();
    let mut failed = Vec::new();
    for w in &b.witnesses {
        if !recertify(w, &limits)? {
            failed.push(w.id.clone());
        }
    }
    b.check(
        "stored witnesses re-certified from JSON",
        failed.is_empty(),
        if failed.is_empty() { format!("{total}/{total}") } else { format!("failed: {}", failed.join(", ")) },
    );
    Ok(Reproduction { seed: opts.seed, fast: opts.fast, rows: b.rows, checks: b.checks, notes: b.notes, witnesses: b.witnesses })
}

fn grouping_rows(b: &mut Builder) -> Result<()> {
    let limits = *b.limits();
    let unilateral = DeviationConcept::unilateral();
    use ConceptKind::*;

    let selfish = gen_fig1(Variant::SelfishAltruistic);
    let g = build_grouping_game(&selfish.spec)?;
    let single = pot_under(&g, &[Partition::singleton(4)], &unilateral, &limits)?;
    let constant = pot_under(&g, &[Partition::constant(4)], &unilateral, &limits)?;
    for (name, p) in [("singleton", Partition::singleton(4)), ("constant", Partition::constant(4))] {
        let stable = is_equilibrium(&g, &p, &selfish.profile, &unilateral, &limits)?.is_stable();
        b.check(format!("2-clique cycle: split profile stable under {name} tribes"), stable, format!("profile {}", selfish.profile));
        b.witness(format!("grouping2-cycle-{name}"), &[Unilateral], FamilyPayload::Grouping(selfish.spec.clone()), &p, &selfish.profile)?;
    }

    let tribal = gen_fig1(Variant::Tribal);
    let gt = build_grouping_game(&tribal.spec)?;
    let every = all_partitions(4, &limits)?;
    let pot = pot_under(&gt, &every, &unilateral, &limits)?;
    let stable = is_equilibrium(&gt, &tribal.partition, &tribal.profile, &unilateral, &limits)?.is_stable();
    b.check("2-clique tribal cycle: split profile stable under its tribes", stable, format!("{} partitions swept", every.len()));
    b.witness("grouping2-tribal", &[Unilateral], FamilyPayload::Grouping(tribal.spec.clone()), &tribal.partition, &tribal.profile)?;
    if let (Some(p), Some(part)) = (&pot.worst_eq_profile, &pot.worst_eq_partition) {
        b.witness("grouping2-tribal-worst", &[Unilateral], FamilyPayload::Grouping(tribal.spec.clone()), part, p)?;
    }

    let figc = gen_figc_cycle();
    let gc = build_grouping_game(&figc.spec)?;
    let olig = DeviationConcept::oligopolistic();
    let coordinated = pot_under(&gc, std::slice::from_ref(&figc.partition), &olig, &limits)?;
    let stable = is_equilibrium(&gc, &figc.partition, &figc.profile, &olig, &limits)?.is_stable();
    b.check("2-clique cycle with alternating tribes: split profile survives joint tribe moves", stable, format!("welfare {}", gc.social_welfare(&figc.profile)?));
    b.witness("grouping2-oligopoly", &[Oligopolistic], FamilyPayload::Grouping(figc.spec.clone()), &figc.partition, &figc.profile)?;
    let tribe_utilities: Vec<String> = figc
        .partition
        .members()
        .iter()
        .map(|m| gc.group_payoff_at(m, figc.profile.as_slice()).to_string())
        .collect();
    b.notes.push(format!(
        "2-clique cycle with alternating tribes: summed member utility per tribe at the split profile is [{}]; \
         welfare 4 against optimum 8 gives ratio 2",
        tribe_utilities.join(", ")
    ));

    let (instances, seed) = (if b.opts.fast { 40 } else { 200 }, b.opts.seed);
    let sweep2 = grouping_sweep(seed, instances, 2, 5, &limits)?;
    let game = "grouping, 2 cliques";
    b.row(game, "PoA", "2", Some(("4-cycle, singleton tribes".into(), single.ratio, "= 2".into(), exact(single.ratio, int(2)))),
        Some((SweepCell::from_stat("random n<=5, singleton tribes", &sweep2.singleton), sweep2.singleton.ok())));
    b.row(game, "altruistic PoA", "2", Some(("4-cycle, one tribe".into(), constant.ratio, "= 2".into(), exact(constant.ratio, int(2)))),
        Some((SweepCell::from_stat("random n<=5, one tribe", &sweep2.constant), sweep2.constant.ok())));
    b.row(game, "PoT", "3", Some(("weighted 4-cycle, all 15 partitions".into(), pot.ratio, "= 3".into(), exact(pot.ratio, int(3)))),
        Some((SweepCell::from_stat("random n<=5, all partitions", &sweep2.all_partitions), sweep2.all_partitions.ok())));
    let olig_stat = sweep2.oligopolistic.as_ref().expect("two cliques include the joint-move sweep");
    b.row(game, "coordinated PoT", "2", Some(("4-cycle, alternating tribes".into(), coordinated.ratio, "= 2".into(), exact(coordinated.ratio, int(2)))),
        Some((SweepCell::from_stat("random n<=5, all partitions", olig_stat), olig_stat.ok())));

    let sweep3 = grouping_sweep(seed.wrapping_add(1), if b.opts.fast { 20 } else { 100 }, 3, 5, &limits)?;
    let ks: &[usize] = if b.opts.fast { &[2, 3, 4] } else { &[2, 3, 4, 5] };
    for &k in ks {
        let kk = k as i64;
        let game = format!("grouping, k={k} cliques");
        let sel = gen_k_family(k, Variant::SelfishAltruistic)?;
        let gs = build_grouping_game(&sel.spec)?;
        let n = 2 * k;
        let sweep_for = |stat: &SweepStat, what: &str| (k == 3).then(|| (SweepCell::from_stat(format!("random n<=5, {what}"), stat), stat.ok()));
        for (measure, p, stat) in [
            ("PoA", Partition::singleton(n), &sweep3.singleton),
            ("altruistic PoA", Partition::constant(n), &sweep3.constant),
        ] {
            let r = pot_under(&gs, std::slice::from_ref(&p), &unilateral, &limits)?;
            let what = if p.tribe_count() == 1 { "one tribe" } else { "singleton tribes" };
            b.row(&game, measure, &format!("k = {k}"), Some((format!("2k-player family, {what}"), r.ratio, format!("= {k}"), exact(r.ratio, int(kk)))), sweep_for(stat, what));
            b.witness(format!("grouping-k{k}-{}", if p.tribe_count() == 1 { "constant" } else { "singleton" }), &[Unilateral], FamilyPayload::Grouping(sel.spec.clone()), &p, &sel.profile)?;
        }
        let tri = gen_k_family(k, Variant::Tribal)?;
        let gtk = build_grouping_game(&tri.spec)?;
        let r = pot_under(&gtk, std::slice::from_ref(&tri.partition), &unilateral, &limits)?;
        b.row(&game, "PoT", &format!("2k-1 = {}", 2 * kk - 1), Some(("2k-player family, pair tribes".into(), r.ratio, format!("= {}", 2 * kk - 1), exact(r.ratio, int(2 * kk - 1)))), sweep_for(&sweep3.all_partitions, "all partitions"));
        b.witness(format!("grouping-k{k}-tribal"), &[Unilateral], FamilyPayload::Grouping(tri.spec.clone()), &tri.partition, &tri.profile)?;
    }
    Ok(())
}

fn contribution_witness_profile(inst: &ContributionInstance, grid: u32, investments: &[(usize, usize)]) -> Result<Profile> {
    let built = build_contribution_game(&inst.spec.clone().with_grid(grid))?;
    let full: Vec<(usize, usize, Rational)> = investments
        .iter()
        .map(|&(p, e)| (p, e, inst.spec.budgets[p]))
        .collect();
    built.profile_with(&full)
}

fn contribution_rows(b: &mut Builder) -> Result<()> {
    let limits = *b.limits();
    use ConceptKind::*;
    let fast = b.opts.fast;

    // additive chain: the middle vertex holds the only budget
    let chain = gen_additive_chain();
    let mut chain_ok = true;
    let mut chain_ratio = PotRatio::Unbounded;
    let (mut poa_ratio, mut alt_ratio) = (PotRatio::Unbounded, PotRatio::Unbounded);
    for d in [1u32, 2, 4] {
        let spec = chain.spec.clone().with_grid(d);
        let built = build_contribution_game(&spec)?;
        let right = contribution_witness_profile(&chain, d, &[(1, 1)])?;
        let kinds = [Unilateral, Pairwise, Coordinated];
        let mut stable_all = true;
        for kind in kinds {
            let concept = match kind {
                Pairwise => DeviationConcept::pairwise(built.adjacency.clone()),
                k => DeviationConcept::of_kind(k),
            };
            stable_all &= is_equilibrium(&built.game, &chain.partition, &right, &concept, &limits)?.is_stable();
            let r = pot_under(&built.game, std::slice::from_ref(&chain.partition), &concept, &limits)?;
            chain_ok &= exact(r.ratio, int(2));
            chain_ratio = r.ratio;
        }
        b.check(format!("additive chain d={d}: right-edge profile survives unilateral, pairwise, coordinated"), stable_all, format!("profile {right}"));
        chain_ok &= stable_all;
        b.witness(format!("additive-chain-d{d}"), &kinds, FamilyPayload::Contribution(spec.clone()), &chain.partition, &right)?;
        let alt = pot_under(&built.game, &[Partition::constant(3)], &DeviationConcept::unilateral(), &limits)?;
        let poa = pot_under(&built.game, &[Partition::singleton(3)], &DeviationConcept::unilateral(), &limits)?;
        b.check(format!("additive chain d={d}: one tribe gives ratio 1"), exact(alt.ratio, Rational::ONE), format!("ratio {}", alt.ratio));
        alt_ratio = if d == 1 { alt.ratio } else { alt_ratio.max(alt.ratio) };
        poa_ratio = if d == 1 { poa.ratio } else { poa_ratio.max(poa.ratio) };
    }

    let n = if fast { 15 } else { 60 };
    let add = contribution_sweep(b.opts.seed.wrapping_add(2), n, RewardClass::Additive, 20_000, &limits)?;
    let game = "contribution, additive rewards";
    b.row(game, "PoA", "1", Some(("3-vertex chain, singleton tribes, d=1,2,4".into(), poa_ratio, "= 1".into(), exact(poa_ratio, Rational::ONE))),
        Some((SweepCell::from_stat("random <=4 vertices, singleton tribes", &add.singleton), add.singleton.ok())));
    b.row(game, "altruistic PoA", "1", Some(("3-vertex chain, one tribe, d=1,2,4".into(), alt_ratio, "= 1".into(), exact(alt_ratio, Rational::ONE))),
        Some((SweepCell::from_stat("random <=4 vertices, one tribe", &add.constant), add.constant.ok())));
    b.row(game, "PoT", "2", Some(("3-vertex chain, its tribes, d=1,2,4".into(), chain_ratio, "= 2".into(), chain_ok)),
        Some((SweepCell::from_stat("random <=4 vertices, all partitions", &add.all_partitions), add.all_partitions.ok())));

    // convex path
    let eps = Rational::new(1, 100);
    let path = gen_convex_path(eps);
    let d = 4;
    let spec = path.spec.clone().with_grid(d);
    let built = build_contribution_game(&spec)?;
    let odd = contribution_witness_profile(&path, d, &[(0, 0), (1, 0), (2, 2), (3, 2), (4, 4), (5, 4)])?;
    let kinds = [Unilateral, Pairwise, Coordinated];
    let mut stable_all = true;
    for kind in kinds {
        let concept = match kind {
            Pairwise => DeviationConcept::pairwise(built.adjacency.clone()),
            k => DeviationConcept::of_kind(k),
        };
        stable_all &= is_equilibrium(&built.game, &path.partition, &odd, &concept, &limits)?.is_stable();
    }
    b.check("convex path eps=1/100 d=4: edges 1,3,5 profile survives unilateral, pairwise, coordinated", stable_all,
        format!("welfare {}", built.game.social_welfare(&odd)?));
    b.witness("convex-path-d4", &kinds, FamilyPayload::Contribution(spec.clone()), &path.partition, &odd)?;
    let pairwise = DeviationConcept::pairwise(built.adjacency.clone());
    let path_pot = pot_under(&built.game, std::slice::from_ref(&path.partition), &pairwise, &limits)?;
    if let Some(p) = &path_pot.worst_eq_profile {
        b.witness("convex-path-d4-worst", &[Pairwise], FamilyPayload::Contribution(spec.clone()), &path.partition, p)?;
    }

    // altruistic square
    let sq = gen_altruistic_square(Rational::new(1, 10));
    let mut sq_ok = true;
    let mut sq_ratio = PotRatio::Unbounded;
    for d in [1u32, 2] {
        let spec = sq.spec.clone().with_grid(d);
        let built = build_contribution_game(&spec)?;
        let half = contribution_witness_profile(&sq, d, &[(1, 1), (2, 1), (3, 3), (0, 3)])?;
        let pw = DeviationConcept::pairwise(built.adjacency.clone());
        let stable = is_equilibrium(&built.game, &sq.partition, &half, &DeviationConcept::unilateral(), &limits)?.is_stable()
            && is_equilibrium(&built.game, &sq.partition, &half, &pw, &limits)?.is_stable();
        b.check(format!("altruistic square eps=1/10 d={d}: half-edge profile survives unilateral and pairwise"), stable, format!("profile {half}"));
        b.witness(format!("altruistic-square-d{d}"), &[Unilateral, Pairwise], FamilyPayload::Contribution(spec.clone()), &sq.partition, &half)?;
        let r = pot_under(&built.game, std::slice::from_ref(&sq.partition), &pw, &limits)?;
        sq_ok &= stable && exact(r.ratio, Rational::new(9, 5));
        sq_ratio = r.ratio;
    }

    let n = if fast { 15 } else { 60 };
    let cvx = contribution_sweep(b.opts.seed.wrapping_add(3), n, RewardClass::Convex, 20_000, &limits)?;
    let game = "contribution, convex rewards";
    b.row(game, "PoA", "2", None,
        Some((SweepCell::from_stat("random <=4 vertices, c*xy, singleton tribes", &cvx.singleton), cvx.singleton.ok())));
    b.row(game, "altruistic PoA", "2", Some(("square eps=1/10, d=1,2".into(), sq_ratio, "= 9/5".into(), sq_ok)),
        Some((SweepCell::from_stat("random <=4 vertices, c*xy, one tribe", &cvx.constant), cvx.constant.ok())));
    let want = Rational::new(400, 106);
    b.row(game, "PoT", "4", Some(("path eps=1/100, d=4".into(), path_pot.ratio, "= 400/106".into(), stable_all && exact(path_pot.ratio, want))),
        Some((SweepCell::from_stat("random <=4 vertices, c*xy, all partitions", &cvx.all_partitions), cvx.all_partitions.ok())));
    Ok(())
}

fn routing_rows(b: &mut Builder) -> Result<()> {
    let limits = *b.limits();
    let mut gk_ok = true;
    let mut last = None;
    for k in 1..=8 {
        let r = gk_check(k, k <= 3, &limits)?;
        let detail = match r.optimum {
            Some(opt) => format!(
                "cost(nash) {} cost(down) {} optimum {} ratio {} >= {}",
                r.nash_cost, r.down_cost, opt, r.ratio_vs_optimum.expect("set with optimum"), r.lower_bound
            ),
            None => format!("cost(nash) {} cost(down) {} ratio vs down {}", r.nash_cost, r.down_cost, r.ratio_vs_down),
        };
        b.check(format!("tree k={k}: all-upper profile is a tribal equilibrium, costs 4k and k+3"), r.ok(), detail);
        gk_ok &= r.ok();
        let tree = gen_gk_tree(k)?;
        b.witness(format!("tree-k{k}"), &[ConceptKind::Unilateral], FamilyPayload::Congestion(tree.spec), &tree.partition, &tree.nash_profile)?;
        last = Some(r);
    }
    let g8 = last.expect("k = 8 ran");

    let scan = quad_inequality_scan(100);
    let quad_ok = scan.ok && scan.worst_margin.is_zero() && scan.equality_points.contains(&(1, 1));
    b.check("quadratic inequality on 0..=100", quad_ok, format!("worst margin {} at {:?}, equality at {:?}", scan.worst_margin, scan.worst_at, scan.equality_points));

    let params = SmoothnessParams::new(Rational::new(8, 3), Rational::new(1, 3))?;
    let t2 = gen_gk_tree(2)?;
    let smooth2 = check_smoothness(&t2.spec, &t2.partition, &params, SmoothnessMode::Exhaustive, &limits)?;
    b.check("tree k=2 with its tribes is (8/3, 1/3)-smooth", smooth2.ok, format!("min slack {} over {} pairs", smooth2.min_slack, smooth2.pairs_checked));

    let gadget = gadget_equality(&t2.spec, &limits)?;
    b.check("tree k=2 and its routing image agree player by player", gadget.is_some(), format!("{} profiles compared", gadget.unwrap_or(0)));

    let n = if b.opts.fast { 20 } else { 100 };
    let sweep = congestion_sweep(b.opts.seed.wrapping_add(4), n, &limits)?;
    b.check(
        "random congestion games are (8/3, 1/3)-smooth under every partition",
        sweep.smoothness_failures == 0,
        format!("{} instance/partition checks, min slack {}", sweep.smoothness_checks, sweep.min_slack),
    );
    let bound = smoothness_pot_bound(&params);
    let game = "atomic linear routing";
    b.row(game, "PoA", "5/2", None, Some((SweepCell::from_stat("random <=4 players/resources, singleton tribes", &sweep.singleton), sweep.singleton.ok())));
    b.row(game, "altruistic PoA", "3", None, Some((SweepCell::from_stat("random <=4 players/resources, one tribe", &sweep.constant), sweep.constant.ok())));
    let witness_ok = gk_ok && smooth2.ok && sweep.smoothness_failures == 0 && bound == int(4);
    b.row(
        game,
        "PoT",
        "4",
        Some((
            format!("tree k=8 vs all-down, smoothness bound {bound}"),
            PotRatio::Finite(g8.ratio_vs_down),
            ">= 4k/(k+3) and <= 4".into(),
            witness_ok && g8.ratio_vs_down >= g8.lower_bound,
        )),
        Some((SweepCell::from_stat("random <=4 players/resources, all partitions", &sweep.all_partitions), sweep.all_partitions.ok())),
    );
    b.notes.push(format!(
        "tree k=8 has {} players, too many to enumerate the optimum; 32/11 is measured against the all-down profile",
        g8.players
    ));
    Ok(())
}
