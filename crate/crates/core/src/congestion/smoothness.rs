//! Tribal smoothness checks for congestion games.
//!
//! For profiles `s, s'` the checked inequality is
//! `sum_i (c_i^t(s'_i; s_-i) - c_i^t(s) + c_i(s)) <= lambda C(s') + mu C(s)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::Limits;
use crate::error::{validation, Error, Result};
use crate::game::Profile;
use crate::partition::Partition;
use crate::rational::Rational;

use super::{build_congestion_game, CongestionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub lambda: Rational,
    pub mu: Rational,
}

impl SmoothnessParams {
    pub fn new(lambda: Rational, mu: Rational) -> Result<SmoothnessParams> {
        if mu.is_negative() || mu >= Rational::ONE {
            return Err(validation(format!("mu must lie in [0, 1), got {mu}")));
        }
        Ok(SmoothnessParams { lambda, mu })
    }
}

/// `lambda / (1 - mu)`.
pub fn smoothness_pot_bound(params: &SmoothnessParams) -> Rational {
    params.lambda / (Rational::ONE - params.mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothnessMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub lambda: Rational,
    pub mu: Rational,
    pub bound: Rational,
    pub mode: String,
    pub seed: Option<u64>,
    pub pairs_checked: u128,
    pub ok: bool,
    /// Smallest `RHS - LHS` seen; negative means a violation.
    pub min_slack: Rational,
    /// The pair `(s, s')` attaining `min_slack` (first one in scan order).
    pub witness: (Profile, Profile),
}

pub fn check_smoothness(
    spec: &CongestionSpec,
    partition: &Partition,
    params: &SmoothnessParams,
    mode: SmoothnessMode,
    limits: &Limits,
) -> Result<SmoothnessReport> {
    SmoothnessParams::new(params.lambda, params.mu)?;
    let game = build_congestion_game(spec)?;
    partition.check_players(game.player_count())?;
    let members = partition.members();
    let n = game.player_count();
    let counts = game.strategy_counts().to_vec();

    // D(s, i, t) = c^t_i(t; s_-i) - c^t_i(s) + c_i(s)
    let deviation_term = |s: &mut [usize], i: usize, t: usize| -> Rational {
        let tribe = &members[partition.tribe(i)];
        let base = game.group_payoff_at(tribe, s) - game.payoff_at(i, s);
        let keep = s[i];
        s[i] = t;
        let moved = game.group_payoff_at(tribe, s);
        s[i] = keep;
        moved - base
    };

    let mut best: Option<(Rational, Vec<usize>, Vec<usize>)> = None;
    let mut consider = |slack: Rational, s: &[usize], s2: &[usize]| {
        if best.as_ref().is_none_or(|(b, _, _)| slack < *b) {
            best = Some((slack, s.to_vec(), s2.to_vec()));
        }
    };

    let (pairs_checked, mode_name, seed) = match mode {
        SmoothnessMode::Exhaustive => {
            let count = game.profile_count();
            let pairs = count.saturating_mul(count);
            if pairs > limits.profile_budget as u128 {
                return Err(Error::BudgetExceeded {
                    what: "exhaustive smoothness check",
                    needed: pairs,
                    limit: limits.profile_budget,
                });
            }
            let count = count as usize;
            let offsets: Vec<usize> = counts
                .iter()
                .scan(0, |acc, &c| {
                    let o = *acc;
                    *acc += c;
                    Some(o)
                })
                .collect();
            let width: usize = counts.iter().sum();
            let mut table = Vec::with_capacity(count * width);
            let mut cost = Vec::with_capacity(count);
            let mut s = vec![0; n];
            for _ in 0..count {
                cost.push(game.welfare_at(&s));
                for i in 0..n {
                    for t in 0..counts[i] {
                        table.push(deviation_term(&mut s, i, t));
                    }
                }
                game.advance(&mut s);
            }
            let mut s = vec![0; n];
            for a in 0..count {
                let row = &table[a * width..(a + 1) * width];
                let mu_term = params.mu * cost[a];
                let mut s2 = vec![0; n];
                for b in 0..count {
                    let lhs: Rational = (0..n).map(|i| row[offsets[i] + s2[i]]).sum();
                    consider(params.lambda * cost[b] + mu_term - lhs, &s, &s2);
                    game.advance(&mut s2);
                }
                game.advance(&mut s);
            }
            (pairs, "exhaustive", None)
        }
        SmoothnessMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(validation("sampled smoothness check needs at least one pair"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let mut s: Vec<usize> = counts.iter().map(|&c| rng.gen_range(0..c)).collect();
                let s2: Vec<usize> = counts.iter().map(|&c| rng.gen_range(0..c)).collect();
                let lhs: Rational = (0..n).map(|i| deviation_term(&mut s, i, s2[i])).sum();
                let slack = params.lambda * game.welfare_at(&s2) + params.mu * game.welfare_at(&s) - lhs;
                consider(slack, &s, &s2);
            }
            (count as u128, "sampled", Some(seed))
        }
    };

    let (min_slack, s, s2) = best.expect("at least one pair is always checked");
    Ok(SmoothnessReport {
        lambda: params.lambda,
        mu: params.mu,
        bound: smoothness_pot_bound(params),
        mode: mode_name.to_string(),
        seed,
        pairs_checked,
        ok: !min_slack.is_negative(),
        min_slack,
        witness: (Profile::new(s), Profile::new(s2)),
    })
}

/// `(8/3) y^2 + (1/3) x^2 - (x(y - x) + xy + x + y)`.
pub fn quad_margin(x: u64, y: u64) -> Rational {
    let (x, y) = (x as i64, y as i64);
    let lhs = x * (y - x) + x * y + x + y;
    Rational::new(8 * y * y + x * x, 3) - Rational::from_integer(lhs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadScan {
    pub limit: u64,
    pub ok: bool,
    pub worst_margin: Rational,
    /// First `(x, y)` attaining the worst margin, in lexicographic order.
    pub worst_at: (u64, u64),
    pub equality_points: Vec<(u64, u64)>,
}

/// Checks the quadratic inequality on every integer pair in `0..=limit`.
pub fn quad_inequality_scan(limit: u64) -> QuadScan {
    let mut worst = (quad_margin(0, 0), (0, 0));
    let mut equality_points = Vec::new();
    for x in 0..=limit {
        for y in 0..=limit {
            let m = quad_margin(x, y);
            if m.is_zero() {
                equality_points.push((x, y));
            }
            if m < worst.0 {
                worst = (m, (x, y));
            }
        }
    }
    QuadScan {
        limit,
        ok: !worst.0.is_negative(),
        worst_margin: worst.0,
        worst_at: worst.1,
        equality_points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::{gen_gk_tree, random_spec};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn pot_bounds() {
        let b = |l, m| smoothness_pot_bound(&SmoothnessParams::new(l, m).unwrap());
        assert_eq!(b(r(8, 3), r(1, 3)), r(4, 1));
        assert_eq!(b(r(1, 1), r(0, 1)), r(1, 1));
        assert_eq!(b(r(5, 2), r(1, 2)), r(5, 1));
        assert!(SmoothnessParams::new(r(1, 1), r(1, 1)).is_err());
    }

    #[test]
    fn quad_scan_margins() {
        assert_eq!(quad_margin(1, 1), Rational::ZERO);
        assert_eq!(quad_margin(0, 0), Rational::ZERO);
        let scan = quad_inequality_scan(100);
        assert!(scan.ok);
        assert_eq!(scan.worst_margin, Rational::ZERO);
        assert!(scan.equality_points.contains(&(1, 1)));
    }

    // Tribal cost from loads: sum_e alpha_e n_e^t(s) n_e(s).
    fn tribe_cost(spec: &CongestionSpec, p: &Partition, s: &[usize], player: usize) -> Rational {
        let load = spec.loads(s);
        let tribal = spec.tribal_loads(p, s);
        let t = p.tribe(player);
        (0..spec.resource_count())
            .map(|e| spec.alpha[e] * Rational::from(tribal[t][e] * load[e]))
            .sum()
    }

    fn oracle_slack(spec: &CongestionSpec, p: &Partition, params: &SmoothnessParams, s: &[usize], s2: &[usize]) -> Rational {
        let own = |i: usize, prof: &[usize]| -> Rational {
            let load = spec.loads(prof);
            spec.strategies[i][prof[i]].iter().map(|&e| spec.alpha[e] * Rational::from(load[e])).sum()
        };
        let cost = |prof: &[usize]| -> Rational { (0..prof.len()).map(|i| own(i, prof)).sum() };
        let lhs: Rational = (0..s.len())
            .map(|i| {
                let mut moved = s.to_vec();
                moved[i] = s2[i];
                tribe_cost(spec, p, &moved, i) - tribe_cost(spec, p, s, i) + own(i, s)
            })
            .sum();
        params.lambda * cost(s2) + params.mu * cost(s) - lhs
    }

    #[test]
    fn forced_sharing_is_tight_at_one_zero() {
        // with a single strategy each, s = s' and both sides equal C(s)
        let spec = CongestionSpec { alpha: vec![Rational::ONE], strategies: vec![vec![vec![0]]; 2] };
        let params = SmoothnessParams::new(r(1, 1), r(0, 1)).unwrap();
        for p in [Partition::singleton(2), Partition::constant(2)] {
            let report = check_smoothness(&spec, &p, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
            assert!(report.ok);
            assert_eq!(report.min_slack, Rational::ZERO);
        }
    }

    #[test]
    fn wrong_parameters_fail_with_optional_private_resource() {
        // shared resource 0 (alpha 1), private resources 1 and 2 (alpha 2)
        let spec = CongestionSpec {
            alpha: vec![r(1, 1), r(2, 1), r(2, 1)],
            strategies: vec![vec![vec![0], vec![1]], vec![vec![0], vec![2]]],
        };
        let params = SmoothnessParams::new(r(1, 1), r(0, 1)).unwrap();
        let p = Partition::singleton(2);
        let report = check_smoothness(&spec, &p, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
        assert!(!report.ok);
        assert_eq!(report.min_slack, r(-1, 1));
        let (s, s2) = &report.witness;
        assert_eq!(oracle_slack(&spec, &p, &params, s.as_slice(), s2.as_slice()), report.min_slack);
    }

    #[test]
    fn slack_matches_load_formula_oracle() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params = SmoothnessParams::new(r(8, 3), r(1, 3)).unwrap();
        for _ in 0..15 {
            let spec = random_spec(&mut rng, 4, 4, 3);
            let n = spec.player_count();
            let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
            let p = Partition::from_labels(&labels);
            let report = check_smoothness(&spec, &p, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
            let game = build_congestion_game(&spec).unwrap();
            let mut min = None::<Rational>;
            for a in 0..game.profile_count() {
                for b in 0..game.profile_count() {
                    let v = oracle_slack(&spec, &p, &params, game.profile_at(a).as_slice(), game.profile_at(b).as_slice());
                    min = Some(min.map_or(v, |m| m.min(v)));
                }
            }
            assert_eq!(Some(report.min_slack), min);
            assert!(report.ok);
        }
    }

    #[test]
    fn slack_invariant_under_resource_relabelling() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = SmoothnessParams::new(r(8, 3), r(1, 3)).unwrap();
        for _ in 0..10 {
            let spec = random_spec(&mut rng, 3, 4, 3);
            let m = spec.resource_count();
            let perm: Vec<usize> = (0..m).map(|e| (e + 1) % m).collect();
            let p = Partition::constant(spec.player_count());
            let a = check_smoothness(&spec, &p, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
            let b = check_smoothness(&spec.relabelled(&perm), &p, &params, SmoothnessMode::Exhaustive, &Limits::default())
                .unwrap();
            assert_eq!(a.min_slack, b.min_slack);
        }
    }

    #[test]
    fn g2_is_smooth() {
        let t = gen_gk_tree(2).unwrap();
        let params = SmoothnessParams::new(r(8, 3), r(1, 3)).unwrap();
        let report =
            check_smoothness(&t.spec, &t.partition, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
        assert!(report.ok, "{report:?}");
        assert_eq!(report.pairs_checked, 64 * 64);
    }

    #[test]
    fn sampled_agrees_with_exhaustive_minimum() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = SmoothnessParams::new(r(8, 3), r(1, 3)).unwrap();
        for _ in 0..10 {
            let spec = random_spec(&mut rng, 3, 3, 2);
            let p = Partition::constant(spec.player_count());
            let full = check_smoothness(&spec, &p, &params, SmoothnessMode::Exhaustive, &Limits::default()).unwrap();
            let sampled = check_smoothness(
                &spec,
                &p,
                &params,
                SmoothnessMode::Sampled { count: 200, seed: 5 },
                &Limits::default(),
            )
            .unwrap();
            assert!(sampled.min_slack >= full.min_slack);
            assert_eq!(sampled.seed, Some(5));
        }
    }

    #[test]
    fn exhaustive_budget_refusal() {
        let t = gen_gk_tree(3).unwrap();
        let params = SmoothnessParams::new(r(8, 3), r(1, 3)).unwrap();
        let tight = Limits { profile_budget: 1000, ..Limits::default() };
        assert!(matches!(
            check_smoothness(&t.spec, &t.partition, &params, SmoothnessMode::Exhaustive, &tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
