//! Brute-force oracles that share no equilibrium or payoff code with the library.

#![allow(dead_code)]

use tribegames::congestion::CongestionSpec;
use tribegames::grouping::GroupingSpec;
use tribegames::{Orientation, Partition, Rational};

/// Utility straight from the weight matrix: weight flowing into `i` from
/// everyone in the same clique.
pub fn grouping_utility(spec: &GroupingSpec, i: usize, s: &[usize]) -> Rational {
    (0..s.len())
        .filter(|&j| j != i && s[j] == s[i])
        .map(|j| spec.weights[j][i])
        .sum()
}

pub fn congestion_cost(spec: &CongestionSpec, i: usize, s: &[usize]) -> Rational {
    spec.strategies[i][s[i]]
        .iter()
        .map(|&e| {
            let users = (0..s.len()).filter(|&j| spec.strategies[j][s[j]].contains(&e)).count();
            spec.alpha[e] * Rational::from(users)
        })
        .sum()
}

/// Every profile of the product space, player 0 most significant.
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..c).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Profiles where no single player can strictly improve its tribe's total.
pub fn naive_unilateral_equilibria<F>(
    counts: &[usize],
    orientation: Orientation,
    partition: &Partition,
    payoff: F,
) -> Vec<Vec<usize>>
where
    F: Fn(usize, &[usize]) -> Rational,
{
    let tribe_total = |i: usize, s: &[usize]| -> Rational {
        (0..s.len()).filter(|&j| partition.tribe(j) == partition.tribe(i)).map(|j| payoff(j, s)).sum()
    };
    all_profiles(counts)
        .into_iter()
        .filter(|s| {
            (0..s.len()).all(|i| {
                let now = tribe_total(i, s);
                (0..counts[i]).all(|x| {
                    let mut t = s.clone();
                    t[i] = x;
                    let then = tribe_total(i, &t);
                    match orientation {
                        Orientation::UtilityMax => then <= now,
                        Orientation::CostMin => then >= now,
                    }
                })
            })
        })
        .collect()
}

pub fn welfare<F: Fn(usize, &[usize]) -> Rational>(n: usize, s: &[usize], payoff: &F) -> Rational {
    (0..n).map(|i| payoff(i, s)).sum()
}

/// Worst equilibrium over the union of equilibrium sets, as an exact ratio
/// oriented to be at least 1. `None` when no equilibrium exists or the ratio
/// is unbounded.
pub fn naive_ratio<F>(counts: &[usize], orientation: Orientation, partitions: &[Partition], payoff: F) -> Option<Rational>
where
    F: Fn(usize, &[usize]) -> Rational,
{
    let n = counts.len();
    let profiles = all_profiles(counts);
    let ws: Vec<Rational> = profiles.iter().map(|s| welfare(n, s, &payoff)).collect();
    let opt = match orientation {
        Orientation::UtilityMax => ws.iter().copied().max()?,
        Orientation::CostMin => ws.iter().copied().min()?,
    };
    let mut worst: Option<Rational> = None;
    for p in partitions {
        for s in naive_unilateral_equilibria(counts, orientation, p, &payoff) {
            let w = welfare(n, &s, &payoff);
            worst = Some(match (worst, orientation) {
                (None, _) => w,
                (Some(b), Orientation::UtilityMax) => b.min(w),
                (Some(b), Orientation::CostMin) => b.max(w),
            });
        }
    }
    let worst = worst?;
    let (num, den) = match orientation {
        Orientation::UtilityMax => (opt, worst),
        Orientation::CostMin => (worst, opt),
    };
    if den.is_zero() {
        return num.is_zero().then_some(Rational::ONE);
    }
    Some(num / den)
}
