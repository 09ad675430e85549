use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{config, Result};
use crate::game::{Game, Orientation, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

use super::scan::scan;
use super::{Checker, ConceptKind, DeviationConcept, EquilibriumReport, Limits};

/// Every profile that survives `concept`, in lexicographic order.
pub fn enumerate_equilibria(
    base: &Game,
    partition: &Partition,
    concept: &DeviationConcept,
    limits: &Limits,
) -> Result<Vec<EquilibriumReport>> {
    let checker = Checker::new(base, partition, concept, limits)?;
    scan(
        base,
        limits,
        "equilibrium enumeration",
        Vec::new,
        |acc: &mut Vec<EquilibriumReport>, profile, _| {
            if checker.find_blocking(profile).is_none() {
                acc.push(EquilibriumReport {
                    profile: Profile::new(profile.to_vec()),
                    welfare: base.welfare_at(profile),
                    survives: BTreeMap::from([(concept.kind, true)]),
                    blocking_witness: None,
                });
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

fn better_welfare(o: Orientation, candidate: Rational, current: Rational) -> bool {
    o.improves(candidate, current)
}

/// Welfare-optimal profile, lexicographically first among ties.
pub fn compute_optimum(base: &Game, limits: &Limits) -> Result<(Profile, Rational)> {
    let o = base.orientation();
    let best = scan(
        base,
        limits,
        "optimum scan",
        || None,
        |acc: &mut Option<(u128, Rational)>, profile, idx| {
            let w = base.welfare_at(profile);
            match acc {
                Some((_, b)) if !better_welfare(o, w, *b) => {}
                _ => *acc = Some((idx, w)),
            }
        },
        |a, b| merge_first_best(a, b, |x, y| better_welfare(o, x, y)),
    )?;
    let (idx, w) = best.expect("profile space is never empty");
    Ok((base.profile_at(idx), w))
}

/// Keeps `a` unless `b` is strictly preferred; `a` always precedes `b`.
fn merge_first_best<T>(
    a: Option<(T, Rational)>,
    b: Option<(T, Rational)>,
    prefer: impl Fn(Rational, Rational) -> bool,
) -> Option<(T, Rational)> {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => {
            if prefer(b.1, a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Worst-equilibrium to optimum ratio, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotRatio {
    Finite(Rational),
    Unbounded,
}

impl PotRatio {
    /// Orientation-correct ratio. `0/0` is 1: both sides attain the same welfare.
    pub fn of(orientation: Orientation, worst: Rational, optimum: Rational) -> PotRatio {
        let (num, den) = match orientation {
            Orientation::CostMin => (worst, optimum),
            Orientation::UtilityMax => (optimum, worst),
        };
        if den.is_zero() {
            if num.is_zero() {
                PotRatio::Finite(Rational::ONE)
            } else {
                PotRatio::Unbounded
            }
        } else {
            PotRatio::Finite(num / den)
        }
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            PotRatio::Finite(r) => Some(*r),
            PotRatio::Unbounded => None,
        }
    }

    /// `self <= bound`, treating unbounded as larger than every rational.
    pub fn at_most(&self, bound: Rational) -> bool {
        self.finite().is_some_and(|r| r <= bound)
    }

    pub fn max(self, other: PotRatio) -> PotRatio {
        match (self, other) {
            (PotRatio::Finite(a), PotRatio::Finite(b)) => PotRatio::Finite(a.max(b)),
            _ => PotRatio::Unbounded,
        }
    }
}

impl fmt::Display for PotRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotRatio::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            PotRatio::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for PotRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PotRatio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "inf" {
            Ok(PotRatio::Unbounded)
        } else {
            s.parse().map(PotRatio::Finite).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotReport {
    pub orientation: Orientation,
    pub concept: ConceptKind,
    pub partitions_checked: usize,
    pub optimum_welfare: Rational,
    pub optimum_profile: Profile,
    pub worst_eq_welfare: Option<Rational>,
    pub worst_eq_profile: Option<Profile>,
    /// A partition under which the worst profile is an equilibrium.
    pub worst_eq_partition: Option<Partition>,
    pub ratio: PotRatio,
    /// Distinct profiles that are equilibria under at least one partition.
    pub equilibrium_count: u64,
}

#[derive(Default)]
struct PotAcc {
    optimum: Option<(u128, Rational)>,
    worst: Option<((u128, usize), Rational)>,
    count: u64,
}

/// Worst equilibrium over the union of equilibrium sets of all `partitions`,
/// compared against the welfare optimum of `base`.
pub fn compute_pot(
    base: &Game,
    partitions: &[Partition],
    concept: &DeviationConcept,
    limits: &Limits,
) -> Result<PotReport> {
    if partitions.is_empty() {
        return Err(config("price of tribalism needs at least one partition"));
    }
    let checkers = partitions
        .iter()
        .map(|p| Checker::new(base, p, concept, limits))
        .collect::<Result<Vec<_>>>()?;
    let o = base.orientation();
    let acc = scan(
        base,
        limits,
        "price-of-tribalism scan",
        PotAcc::default,
        |acc: &mut PotAcc, profile, idx| {
            let w = base.welfare_at(profile);
            match acc.optimum {
                Some((_, b)) if !better_welfare(o, w, b) => {}
                _ => acc.optimum = Some((idx, w)),
            }
            if let Some(which) = checkers.iter().position(|c| c.find_blocking(profile).is_none()) {
                acc.count += 1;
                match acc.worst {
                    Some((_, b)) if !o.is_worse(w, b) => {}
                    _ => acc.worst = Some(((idx, which), w)),
                }
            }
        },
        |a, b| PotAcc {
            optimum: merge_first_best(a.optimum, b.optimum, |x, y| better_welfare(o, x, y)),
            worst: merge_first_best(a.worst, b.worst, |x, y| o.is_worse(x, y)),
            count: a.count + b.count,
        },
    )?;
    let (opt_idx, optimum_welfare) = acc.optimum.expect("profile space is never empty");
    let (worst_eq_welfare, worst_eq_profile, worst_eq_partition, ratio) = match acc.worst {
        Some(((idx, which), w)) => (
            Some(w),
            Some(base.profile_at(idx)),
            Some(partitions[which].clone()),
            PotRatio::of(o, w, optimum_welfare),
        ),
        None => (None, None, None, PotRatio::Unbounded),
    };
    Ok(PotReport {
        orientation: o,
        concept: concept.kind,
        partitions_checked: partitions.len(),
        optimum_welfare,
        optimum_profile: base.profile_at(opt_idx),
        worst_eq_welfare,
        worst_eq_profile,
        worst_eq_partition,
        ratio,
        equilibrium_count: acc.count,
    })
}
