//! Social k-grouping games.
//!
//! Every player joins one of `k` cliques and collects the friendship weights
//! of the other players in the same clique. `weights[i][j]` is the benefit the
//! friendship between `i` and `j` gives player `j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::game::{Game, Orientation, PayoffFn, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingSpec {
    pub k: usize,
    pub weights: Vec<Vec<Rational>>,
}

/// Which lower-bound construction to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    SelfishAltruistic,
    Tribal,
}

/// A generated game together with its intended partition and profile.
#[derive(Debug, Clone)]
pub struct GroupingInstance {
    pub spec: GroupingSpec,
    pub partition: Partition,
    pub profile: Profile,
}

impl GroupingSpec {
    pub fn player_count(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(validation("grouping game without players"));
        }
        if self.k < 2 {
            return Err(validation(format!("need at least 2 cliques, got {}", self.k)));
        }
        for (i, row) in self.weights.iter().enumerate() {
            if row.len() != n {
                return Err(validation(format!("weight row {i} has {} entries, expected {n}", row.len())));
            }
            if !row[i].is_zero() {
                return Err(validation(format!("self-weight of player {i} must be 0")));
            }
            if let Some(j) = row.iter().position(|w| w.is_negative()) {
                return Err(validation(format!("negative weight from {i} to {j}")));
            }
        }
        Ok(())
    }

    /// Sum of all weights, which the all-in-one-clique profile collects.
    pub fn total_weight(&self) -> Rational {
        self.weights.iter().flatten().sum()
    }

    /// 4-cycle with weights given per undirected edge `(i, j, w)`.
    fn from_undirected(n: usize, k: usize, edges: &[(usize, usize, i64)]) -> GroupingSpec {
        let mut weights = vec![vec![Rational::ZERO; n]; n];
        for &(i, j, w) in edges {
            weights[i][j] = Rational::from_integer(w);
            weights[j][i] = Rational::from_integer(w);
        }
        GroupingSpec { k, weights }
    }
}

struct GroupingPayoff {
    // incoming[i][j] = weights[j][i]
    incoming: Vec<Vec<Rational>>,
}

impl PayoffFn for GroupingPayoff {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        let mine = profile[player];
        let row = &self.incoming[player];
        let mut acc = Rational::ZERO;
        for (j, &c) in profile.iter().enumerate() {
            if c == mine && j != player {
                acc += row[j];
            }
        }
        acc
    }
}

pub fn build_grouping_game(spec: &GroupingSpec) -> Result<Game> {
    spec.validate()?;
    let n = spec.player_count();
    let incoming = (0..n)
        .map(|i| (0..n).map(|j| spec.weights[j][i]).collect())
        .collect();
    Game::new(Orientation::UtilityMax, vec![spec.k; n], GroupingPayoff { incoming })
}

// Players a, b, c, d are 0, 1, 2, 3; the cycle runs a-b-c-d-a.
const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;

/// The two 4-player, 2-clique examples: all-ones cycle, or the tribal
/// weighting with heavy a-b and c-d edges. Both use cliques {a,d} / {b,c}.
pub fn gen_fig1(variant: Variant) -> GroupingInstance {
    let profile = Profile::new(vec![0, 1, 1, 0]);
    match variant {
        Variant::SelfishAltruistic => GroupingInstance {
            spec: GroupingSpec::from_undirected(4, 2, &[(A, B, 1), (B, C, 1), (C, D, 1), (D, A, 1)]),
            partition: Partition::singleton(4),
            profile,
        },
        Variant::Tribal => GroupingInstance {
            spec: GroupingSpec::from_undirected(4, 2, &[(A, B, 2), (B, C, 1), (C, D, 2), (D, A, 1)]),
            // red = {a, d}, blue = {b, c}
            partition: Partition::from_labels(&[0, 1, 1, 0]),
            profile,
        },
    }
}

/// The 2k-player, k-clique construction. Players `0..k` are `a_1..a_k`,
/// players `k..2k` are `b_1..b_k`; the profile puts `{a_i, b_i}` in clique `i`.
pub fn gen_k_family(k: usize, variant: Variant) -> Result<GroupingInstance> {
    if k < 2 {
        return Err(validation(format!("k-family needs k >= 2, got {k}")));
    }
    let n = 2 * k;
    let cross = match variant {
        Variant::SelfishAltruistic => Rational::ONE,
        Variant::Tribal => Rational::from_integer(2),
    };
    let mut weights = vec![vec![Rational::ZERO; n]; n];
    for i in 0..k {
        weights[i][k + i] = Rational::ONE;
        weights[k + i][i] = Rational::ONE;
        for j in (0..k).filter(|&j| j != i) {
            weights[i][j] = cross;
            weights[k + i][k + j] = cross;
        }
    }
    let partition = match variant {
        Variant::SelfishAltruistic => Partition::singleton(n),
        Variant::Tribal => Partition::from_labels(&(0..n).map(|p| p % k).collect::<Vec<_>>()),
    };
    Ok(GroupingInstance {
        spec: GroupingSpec { k, weights },
        partition,
        profile: Profile::new((0..n).map(|p| p % k).collect()),
    })
}

/// All-ones 4-cycle with tribes {a, c} / {b, d} and cliques {a, d} / {b, c}.
pub fn gen_figc_cycle() -> GroupingInstance {
    GroupingInstance {
        spec: GroupingSpec::from_undirected(4, 2, &[(A, B, 1), (B, C, 1), (C, D, 1), (D, A, 1)]),
        partition: Partition::from_labels(&[0, 1, 0, 1]),
        profile: Profile::new(vec![0, 1, 1, 0]),
    }
}

/// Random directed weights in `0..=max_weight`, zero diagonal.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize, k: usize, max_weight: i64) -> GroupingSpec {
    let weights = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::ZERO
                    } else {
                        Rational::from_integer(rng.gen_range(0..=max_weight))
                    }
                })
                .collect()
        })
        .collect();
    GroupingSpec { k, weights }
}
