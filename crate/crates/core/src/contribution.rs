//! Network contribution games on a finite budget grid.
//!
//! Each vertex splits its budget over incident edges in multiples of
//! `1/grid`; every edge pays both endpoints `f_e(own, other)` for a symmetric
//! polynomial reward `f_e`. Allocations may leave budget unspent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::Adjacency;
use crate::error::{validation, Result};
use crate::game::{Game, Orientation, PayoffFn, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

/// `coef * x^x_degree * y^y_degree`, serialised as `["coef", p, q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term(pub Rational, pub u32, pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct RewardPolynomial {
    terms: Vec<Term>,
}

impl TryFrom<Vec<Term>> for RewardPolynomial {
    type Error = crate::error::Error;

    fn try_from(terms: Vec<Term>) -> Result<Self> {
        RewardPolynomial::new(terms)
    }
}

impl From<RewardPolynomial> for Vec<Term> {
    fn from(p: RewardPolynomial) -> Self {
        p.terms
    }
}

impl RewardPolynomial {
    /// Merges like terms and drops zeros; rejects negative coefficients,
    /// constant terms and asymmetric term sets.
    pub fn new(terms: Vec<Term>) -> Result<RewardPolynomial> {
        let mut merged: Vec<Term> = Vec::new();
        let mut sorted = terms;
        sorted.sort_by_key(|t| (t.1, t.2));
        for t in sorted {
            match merged.last_mut() {
                Some(last) if (last.1, last.2) == (t.1, t.2) => last.0 += t.0,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.0.is_zero());
        for t in &merged {
            if t.0.is_negative() {
                return Err(validation(format!("negative reward coefficient {}", t.0)));
            }
            if t.1 == 0 && t.2 == 0 {
                return Err(validation("reward has a constant term; normalise so f(0,0) = 0"));
            }
            if !merged.iter().any(|u| (u.1, u.2) == (t.2, t.1) && u.0 == t.0) {
                return Err(validation(format!(
                    "reward is not symmetric: x^{} y^{} has no mirror term",
                    t.1, t.2
                )));
            }
        }
        Ok(RewardPolynomial { terms: merged })
    }

    /// `c * (x + y)`.
    pub fn additive(c: Rational) -> RewardPolynomial {
        RewardPolynomial::new(vec![Term(c, 1, 0), Term(c, 0, 1)]).expect("valid additive reward")
    }

    /// `c * x * y`.
    pub fn product(c: Rational) -> RewardPolynomial {
        RewardPolynomial::new(vec![Term(c, 1, 1)]).expect("valid product reward")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, x: Rational, y: Rational) -> Rational {
        self.terms.iter().map(|t| t.0 * x.pow(t.1) * y.pow(t.2)).sum()
    }

    /// Of the form `c (x + y)` with `c > 0`.
    pub fn is_additive(&self) -> bool {
        matches!(self.terms.as_slice(), [Term(a, 0, 1), Term(b, 1, 0)] if a == b)
    }

    /// Every term mixes both contributions, so `f(x, 0) = 0`; with nonnegative
    /// coefficients that makes the reward coordinate-convex and nondecreasing.
    pub fn is_convex_class(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| t.1 > 0 && t.2 > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionEdge {
    pub u: usize,
    pub v: usize,
    pub terms: RewardPolynomial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionSpec {
    pub edges: Vec<ContributionEdge>,
    pub budgets: Vec<Rational>,
    pub grid: u32,
}

impl ContributionSpec {
    pub fn vertex_count(&self) -> usize {
        self.budgets.len()
    }

    pub fn with_grid(mut self, grid: u32) -> ContributionSpec {
        self.grid = grid;
        self
    }

    /// Budget of `player` in grid units.
    fn units(&self, player: usize) -> Result<u32> {
        let scaled = self.budgets[player] * Rational::from(self.grid);
        if scaled.is_negative() {
            return Err(validation(format!("player {player} has a negative budget")));
        }
        if !scaled.is_integer() {
            return Err(validation(format!(
                "budget {} of player {player} is not a multiple of 1/{}",
                self.budgets[player], self.grid
            )));
        }
        u32::try_from(scaled.numer()).map_err(|_| validation("budget too large for the grid"))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(validation("contribution game without vertices"));
        }
        if self.grid == 0 {
            return Err(validation("grid denominator must be positive"));
        }
        let mut seen = std::collections::HashSet::new();
        for (k, e) in self.edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(validation(format!("edge {k} references a missing vertex")));
            }
            if e.u == e.v {
                return Err(validation(format!("edge {k} is a self-loop")));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(validation(format!("edge {k} duplicates an earlier edge")));
            }
        }
        for i in 0..n {
            self.units(i)?;
        }
        Ok(())
    }
}

/// One end of an edge as seen from a vertex.
#[derive(Debug, Clone, Copy)]
struct Incidence {
    edge: usize,
    other: usize,
    // position of this edge in the other endpoint's incidence list
    other_slot: usize,
    is_u: bool,
}

struct ContributionPayoff {
    incidence: Vec<Vec<Incidence>>,
    // allocations[player][strategy][slot] in grid units
    allocations: Vec<Vec<Vec<u32>>>,
    // reward[edge][units of u][units of v]
    reward: Vec<Vec<Vec<Rational>>>,
}

impl PayoffFn for ContributionPayoff {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        let mine = &self.allocations[player][profile[player]];
        let mut acc = Rational::ZERO;
        for (slot, inc) in self.incidence[player].iter().enumerate() {
            let own = mine[slot] as usize;
            let theirs = self.allocations[inc.other][profile[inc.other]][inc.other_slot] as usize;
            let table = &self.reward[inc.edge];
            acc += if inc.is_u { table[own][theirs] } else { table[theirs][own] };
        }
        acc
    }
}

/// A discretised contribution game plus what is needed to read its profiles.
pub struct ContributionGame {
    pub game: Game,
    pub adjacency: Adjacency,
    spec: ContributionSpec,
    units: Vec<u32>,
    incidence: Vec<Vec<Incidence>>,
    allocations: Vec<Vec<Vec<u32>>>,
}

/// All vectors of `slots` nonnegative integers with sum at most `total`, lexicographic.
fn allocations(slots: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, slots: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == slots {
            out.push(prefix.clone());
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            rec(prefix, slots, left - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), slots, total, &mut out);
    out
}

pub fn build_contribution_game(spec: &ContributionSpec) -> Result<ContributionGame> {
    spec.validate()?;
    let n = spec.vertex_count();
    let units: Vec<u32> = (0..n).map(|i| spec.units(i)).collect::<Result<_>>()?;
    let mut incidence: Vec<Vec<Incidence>> = vec![Vec::new(); n];
    for (k, e) in spec.edges.iter().enumerate() {
        let u_slot = incidence[e.u].len();
        let v_slot = incidence[e.v].len();
        incidence[e.u].push(Incidence { edge: k, other: e.v, other_slot: v_slot, is_u: true });
        incidence[e.v].push(Incidence { edge: k, other: e.u, other_slot: u_slot, is_u: false });
    }
    let grid = Rational::from(spec.grid);
    let reward = spec
        .edges
        .iter()
        .map(|e| {
            (0..=units[e.u])
                .map(|a| {
                    (0..=units[e.v])
                        .map(|b| e.terms.eval(Rational::from(a) / grid, Rational::from(b) / grid))
                        .collect()
                })
                .collect()
        })
        .collect();
    let allocs: Vec<Vec<Vec<u32>>> = (0..n)
        .map(|i| allocations(incidence[i].len(), units[i]))
        .collect();
    let counts = allocs.iter().map(Vec::len).collect();
    let payoff = ContributionPayoff {
        incidence: incidence.clone(),
        allocations: allocs.clone(),
        reward,
    };
    let game = Game::new(Orientation::UtilityMax, counts, payoff)?;
    let adjacency = Adjacency::new(spec.edges.iter().map(|e| (e.u, e.v)))?;
    Ok(ContributionGame {
        game,
        adjacency,
        spec: spec.clone(),
        units,
        incidence,
        allocations: allocs,
    })
}

impl ContributionGame {
    pub fn spec(&self) -> &ContributionSpec {
        &self.spec
    }

    /// Amount `player` puts on `edge` under `profile`.
    pub fn contribution(&self, player: usize, edge: usize, profile: &Profile) -> Rational {
        let alloc = &self.allocations[player][profile.get(player)];
        self.incidence[player]
            .iter()
            .position(|inc| inc.edge == edge)
            .map_or(Rational::ZERO, |slot| {
                Rational::from(alloc[slot]) / Rational::from(self.spec.grid)
            })
    }

    /// Profile in which each listed `(player, edge, amount)` is invested and
    /// everything else is zero.
    pub fn profile_with(&self, investments: &[(usize, usize, Rational)]) -> Result<Profile> {
        let grid = Rational::from(self.spec.grid);
        let mut wanted: Vec<Vec<u32>> = self.incidence.iter().map(|inc| vec![0; inc.len()]).collect();
        for &(player, edge, amount) in investments {
            let slot = self
                .incidence
                .get(player)
                .and_then(|inc| inc.iter().position(|x| x.edge == edge))
                .ok_or_else(|| validation(format!("player {player} is not on edge {edge}")))?;
            let scaled = amount * grid;
            if !scaled.is_integer() || scaled.is_negative() {
                return Err(validation(format!("amount {amount} is off the 1/{} grid", self.spec.grid)));
            }
            wanted[player][slot] = scaled.numer() as u32;
        }
        let choice = wanted
            .iter()
            .enumerate()
            .map(|(i, w)| {
                self.allocations[i]
                    .iter()
                    .position(|a| a == w)
                    .ok_or_else(|| validation(format!("allocation {w:?} exceeds the budget of player {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile::new(choice))
    }

    /// Every contribution is either nothing or the player's whole budget.
    pub fn is_tight(&self, profile: &Profile) -> bool {
        (0..self.units.len()).all(|i| {
            self.allocations[i][profile.get(i)]
                .iter()
                .all(|&a| a == 0 || a == self.units[i])
        })
    }
}

/// Tightness straight from a spec; builds the discretised game internally.
pub fn is_tight(spec: &ContributionSpec, profile: &Profile) -> Result<bool> {
    let built = build_contribution_game(spec)?;
    built.game.validate_profile(profile)?;
    Ok(built.is_tight(profile))
}

#[derive(Debug, Clone)]
pub struct ContributionInstance {
    pub spec: ContributionSpec,
    pub partition: Partition,
}

/// Three vertices in a row; only the middle one has budget. The left edge pays
/// `2(x+y)`, the right edge `x+y`; the middle and right vertex share a tribe.
pub fn gen_additive_chain() -> ContributionInstance {
    let two = Rational::from_integer(2);
    ContributionInstance {
        spec: ContributionSpec {
            edges: vec![
                ContributionEdge { u: 0, v: 1, terms: RewardPolynomial::additive(two) },
                ContributionEdge { u: 1, v: 2, terms: RewardPolynomial::additive(Rational::ONE) },
            ],
            budgets: vec![Rational::ZERO, Rational::ONE, Rational::ZERO],
            grid: 1,
        },
        partition: Partition::from_labels(&[0, 1, 1]),
    }
}

/// Six unit-budget vertices on a path with `xy` rewards scaled by
/// `eps, 1, 1/2 + eps, 1, eps`; tribes R R B B R R.
pub fn gen_convex_path(eps: Rational) -> ContributionInstance {
    let half = Rational::new(1, 2);
    let scales = [eps, Rational::ONE, half + eps, Rational::ONE, eps];
    ContributionInstance {
        spec: ContributionSpec {
            edges: scales
                .iter()
                .enumerate()
                .map(|(k, &c)| ContributionEdge { u: k, v: k + 1, terms: RewardPolynomial::product(c) })
                .collect(),
            budgets: vec![Rational::ONE; 6],
            grid: 1,
        },
        partition: Partition::from_labels(&[0, 0, 1, 1, 0, 0]),
    }
}

/// Unit-budget 4-cycle a-b-c-d with `(1-eps)xy` on a-b and c-d and `xy/2` on
/// b-c and d-a, everyone in one tribe.
pub fn gen_altruistic_square(eps: Rational) -> ContributionInstance {
    let heavy = Rational::ONE - eps;
    let half = Rational::new(1, 2);
    let pairs = [(0, 1, heavy), (1, 2, half), (2, 3, heavy), (3, 0, half)];
    ContributionInstance {
        spec: ContributionSpec {
            edges: pairs
                .iter()
                .map(|&(u, v, c)| ContributionEdge { u, v, terms: RewardPolynomial::product(c) })
                .collect(),
            budgets: vec![Rational::ONE; 4],
            grid: 1,
        },
        partition: Partition::constant(4),
    }
}

/// Which reward class a random instance draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardClass {
    Additive,
    Convex,
}

/// Random graph on `vertices` vertices (each pair an edge with probability
/// 1/2, at least one edge), budgets in `{0, 1, 2}`, coefficients in `{1, 2, 3}`.
pub fn random_spec<R: Rng>(rng: &mut R, vertices: usize, class: RewardClass, grid: u32) -> ContributionSpec {
    let mut edges = Vec::new();
    while edges.is_empty() {
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.gen_bool(0.5) {
                    let c = Rational::from_integer(rng.gen_range(1..=3));
                    let terms = match class {
                        RewardClass::Additive => RewardPolynomial::additive(c),
                        RewardClass::Convex => RewardPolynomial::product(c),
                    };
                    edges.push(ContributionEdge { u, v, terms });
                }
            }
        }
    }
    let budgets = (0..vertices)
        .map(|_| Rational::from_integer(rng.gen_range(0..=2)))
        .collect();
    ContributionSpec { edges, budgets, grid }
}
