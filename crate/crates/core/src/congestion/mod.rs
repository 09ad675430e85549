//! Atomic linear congestion games.
//!
//! A player picks one resource subset from its list; each resource `e` costs
//! every user `alpha_e` times its load.

mod gk;
mod routing;
mod smoothness;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::game::{Game, Orientation, PayoffFn, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

pub use gk::{gen_gk_tree, GkTree};
pub use routing::{compile, load_balancing_to_routing, RoutingArc, RoutingSpec};
pub use smoothness::{
    check_smoothness, quad_inequality_scan, quad_margin, smoothness_pot_bound, QuadScan, SmoothnessMode,
    SmoothnessParams, SmoothnessReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestionSpec {
    pub alpha: Vec<Rational>,
    /// `strategies[i][k]` is the resource set of player `i`'s `k`-th strategy.
    pub strategies: Vec<Vec<Vec<usize>>>,
}

impl CongestionSpec {
    pub fn resource_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn player_count(&self) -> usize {
        self.strategies.len()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.alpha.iter().position(|a| *a <= Rational::ZERO) {
            return Err(validation(format!("resource {e} has a non-positive delay factor")));
        }
        if self.strategies.is_empty() {
            return Err(validation("congestion game without players"));
        }
        for (i, list) in self.strategies.iter().enumerate() {
            if list.is_empty() {
                return Err(validation(format!("player {i} has no strategies")));
            }
            for (k, set) in list.iter().enumerate() {
                let mut sorted = set.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != set.len() {
                    return Err(validation(format!("strategy {k} of player {i} repeats a resource")));
                }
                if let Some(&e) = set.iter().find(|&&e| e >= self.resource_count()) {
                    return Err(validation(format!("strategy {k} of player {i} uses unknown resource {e}")));
                }
            }
        }
        Ok(())
    }

    /// `n_e(s)` for every resource.
    pub fn loads(&self, profile: &[usize]) -> Vec<usize> {
        let mut load = vec![0; self.resource_count()];
        for (i, &k) in profile.iter().enumerate() {
            for &e in &self.strategies[i][k] {
                load[e] += 1;
            }
        }
        load
    }

    /// `n_e^t(s)` indexed `[tribe][resource]`.
    pub fn tribal_loads(&self, partition: &Partition, profile: &[usize]) -> Vec<Vec<usize>> {
        let mut load = vec![vec![0; self.resource_count()]; partition.tribe_count()];
        for (i, &k) in profile.iter().enumerate() {
            for &e in &self.strategies[i][k] {
                load[partition.tribe(i)][e] += 1;
            }
        }
        load
    }

    /// Same game with resources renamed by `perm` (resource `e` becomes `perm[e]`).
    pub fn relabelled(&self, perm: &[usize]) -> CongestionSpec {
        let mut alpha = vec![Rational::ZERO; self.alpha.len()];
        for (e, &to) in perm.iter().enumerate() {
            alpha[to] = self.alpha[e];
        }
        let strategies = self
            .strategies
            .iter()
            .map(|list| list.iter().map(|set| set.iter().map(|&e| perm[e]).collect()).collect())
            .collect();
        CongestionSpec { alpha, strategies }
    }
}

struct CongestionPayoff {
    spec: CongestionSpec,
}

impl CongestionPayoff {
    fn cost(&self, player: usize, profile: &[usize], load: &[usize]) -> Rational {
        self.spec.strategies[player][profile[player]]
            .iter()
            .map(|&e| self.spec.alpha[e] * Rational::from(load[e]))
            .sum()
    }
}

impl PayoffFn for CongestionPayoff {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        let mine = &self.spec.strategies[player][profile[player]];
        let mut acc = Rational::ZERO;
        for &e in mine {
            let n = profile
                .iter()
                .enumerate()
                .filter(|&(j, &k)| self.spec.strategies[j][k].contains(&e))
                .count();
            acc += self.spec.alpha[e] * Rational::from(n);
        }
        acc
    }

    // Loads are computed once per call instead of once per member.
    fn group_payoff(&self, members: &[usize], profile: &[usize]) -> Rational {
        let load = self.spec.loads(profile);
        members.iter().map(|&i| self.cost(i, profile, &load)).sum()
    }
}

pub fn build_congestion_game(spec: &CongestionSpec) -> Result<Game> {
    spec.validate()?;
    let counts = spec.strategies.iter().map(Vec::len).collect();
    Game::new(Orientation::CostMin, counts, CongestionPayoff { spec: spec.clone() })
}

/// Social cost `sum_e alpha_e n_e(s)^2`, computed from loads.
pub fn social_cost(spec: &CongestionSpec, profile: &Profile) -> Rational {
    spec.loads(profile.as_slice())
        .iter()
        .zip(&spec.alpha)
        .map(|(&n, &a)| a * Rational::from(n * n))
        .sum()
}

/// Random instance: up to `max_players` players and `max_resources`
/// resources, each player with 1 to `max_strategies` distinct nonempty
/// subsets, delay factors in `{1/2, 1, 2, 3}`.
pub fn random_spec<R: Rng>(
    rng: &mut R,
    max_players: usize,
    max_resources: usize,
    max_strategies: usize,
) -> CongestionSpec {
    const FACTORS: [(i64, i64); 4] = [(1, 2), (1, 1), (2, 1), (3, 1)];
    let players = rng.gen_range(1..=max_players);
    let resources = rng.gen_range(1..=max_resources);
    let alpha = (0..resources)
        .map(|_| {
            let (n, d) = *FACTORS.choose(rng).expect("nonempty");
            Rational::new(n, d)
        })
        .collect();
    let subsets = (1u32 << resources) - 1;
    let strategies = (0..players)
        .map(|_| {
            let want = rng.gen_range(1..=max_strategies).min(subsets as usize);
            let mut masks: Vec<u32> = Vec::new();
            while masks.len() < want {
                let m = rng.gen_range(1..=subsets);
                if !masks.contains(&m) {
                    masks.push(m);
                }
            }
            masks
                .into_iter()
                .map(|m| (0..resources).filter(|&e| m >> e & 1 == 1).collect())
                .collect()
        })
        .collect();
    CongestionSpec { alpha, strategies }
}
