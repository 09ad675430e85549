use crate::error::{Error, Result};
use crate::game::{Game, Orientation};
use crate::partition::Partition;
use crate::rational::Rational;

use super::{ConceptKind, Deviation, DeviationConcept, Limits, PairRule};

/// Reusable blocking-deviation search for one (game, partition, concept).
pub(crate) struct Checker<'a> {
    game: &'a Game,
    orientation: Orientation,
    tribe_of: &'a [usize],
    members: Vec<Vec<usize>>,
    kind: ConceptKind,
    pairs: &'a [(usize, usize)],
    pair_rule: PairRule,
}

impl<'a> Checker<'a> {
    pub(crate) fn new(
        game: &'a Game,
        partition: &'a Partition,
        concept: &'a DeviationConcept,
        limits: &Limits,
    ) -> Result<Checker<'a>> {
        partition.check_players(game.player_count())?;
        concept.validate(game.player_count())?;
        let members = partition.members();
        if matches!(
            concept.kind,
            ConceptKind::Coordinated | ConceptKind::Oligopolistic
        ) {
            for tribe in &members {
                let joint = tribe
                    .iter()
                    .try_fold(1u128, |acc, &j| acc.checked_mul(game.strategy_counts()[j] as u128))
                    .unwrap_or(u128::MAX);
                if joint > limits.joint_move_budget as u128 {
                    return Err(Error::BudgetExceeded {
                        what: "joint tribe deviations",
                        needed: joint,
                        limit: limits.joint_move_budget,
                    });
                }
            }
        }
        Ok(Checker {
            game,
            orientation: game.orientation(),
            tribe_of: partition.tribe_of(),
            members,
            kind: concept.kind,
            pairs: concept.adjacency.as_ref().map_or(&[], |a| a.pairs()),
            pair_rule: concept.pair_rule,
        })
    }

    #[inline]
    fn total(&self, tribe: usize, profile: &[usize]) -> Rational {
        self.game.group_payoff_at(&self.members[tribe], profile)
    }

    /// First blocking deviation in canonical search order, or `None` if the
    /// profile is stable. `profile` is used as scratch and restored.
    pub(crate) fn find_blocking(&self, profile: &mut [usize]) -> Option<Deviation> {
        // Single-member moves come first for every concept. For the tribe
        // concepts they are joint moves of size one, so this only changes
        // which witness is reported, never the verdict.
        self.unilateral(profile).or_else(|| match self.kind {
            ConceptKind::Unilateral => None,
            ConceptKind::Pairwise => self.pairwise(profile),
            ConceptKind::Coordinated | ConceptKind::Oligopolistic => self.joint(profile),
        })
    }

    fn unilateral(&self, profile: &mut [usize]) -> Option<Deviation> {
        let counts = self.game.strategy_counts();
        for i in 0..profile.len() {
            if counts[i] < 2 {
                continue;
            }
            let t = self.tribe_of[i];
            let current = self.total(t, profile);
            let original = profile[i];
            for alt in (0..counts[i]).filter(|&a| a != original) {
                profile[i] = alt;
                let candidate = self.total(t, profile);
                profile[i] = original;
                if self.orientation.improves(candidate, current) {
                    return Some(Deviation {
                        concept: self.kind,
                        moves: vec![(i, alt)],
                        tribes: vec![t],
                        before: vec![current],
                        after: vec![candidate],
                        pair_rule: None,
                    });
                }
            }
        }
        None
    }

    fn pair_blocks(&self, before: [Rational; 2], after: [Rational; 2]) -> bool {
        let o = self.orientation;
        match self.pair_rule {
            PairRule::BothStrict => o.improves(after[0], before[0]) && o.improves(after[1], before[1]),
            PairRule::OneStrictOneWeak => {
                o.weakly_improves(after[0], before[0])
                    && o.weakly_improves(after[1], before[1])
                    && (o.improves(after[0], before[0]) || o.improves(after[1], before[1]))
            }
        }
    }

    fn pairwise(&self, profile: &mut [usize]) -> Option<Deviation> {
        let counts = self.game.strategy_counts();
        for &(i, j) in self.pairs {
            let (ti, tj) = (self.tribe_of[i], self.tribe_of[j]);
            let before_i = self.total(ti, profile);
            let before_j = if ti == tj { before_i } else { self.total(tj, profile) };
            let (oi, oj) = (profile[i], profile[j]);
            for a in 0..counts[i] {
                for b in 0..counts[j] {
                    if a == oi && b == oj {
                        continue;
                    }
                    profile[i] = a;
                    profile[j] = b;
                    let after_i = self.total(ti, profile);
                    let after_j = if ti == tj { after_i } else { self.total(tj, profile) };
                    profile[i] = oi;
                    profile[j] = oj;
                    if self.pair_blocks([before_i, before_j], [after_i, after_j]) {
                        let mut moves = Vec::new();
                        if a != oi {
                            moves.push((i, a));
                        }
                        if b != oj {
                            moves.push((j, b));
                        }
                        let (tribes, before, after) = if ti == tj {
                            (vec![ti], vec![before_i], vec![after_i])
                        } else {
                            (vec![ti, tj], vec![before_i, before_j], vec![after_i, after_j])
                        };
                        return Some(Deviation {
                            concept: ConceptKind::Pairwise,
                            moves,
                            tribes,
                            before,
                            after,
                            pair_rule: Some(self.pair_rule),
                        });
                    }
                }
            }
        }
        None
    }

    fn joint(&self, profile: &mut [usize]) -> Option<Deviation> {
        let counts = self.game.strategy_counts();
        for (t, members) in self.members.iter().enumerate() {
            if members.len() < 2 {
                continue;
            }
            let current = self.total(t, profile);
            let original: Vec<usize> = members.iter().map(|&j| profile[j]).collect();
            let radices: Vec<usize> = members.iter().map(|&j| counts[j]).collect();
            let mut digits = vec![0usize; members.len()];
            let mut found = None;
            loop {
                if digits != original {
                    for (&j, &d) in members.iter().zip(&digits) {
                        profile[j] = d;
                    }
                    let candidate = self.total(t, profile);
                    if self.orientation.improves(candidate, current) {
                        found = Some(candidate);
                        break;
                    }
                }
                if !odometer_next(&mut digits, &radices) {
                    break;
                }
            }
            for (&j, &o) in members.iter().zip(&original) {
                profile[j] = o;
            }
            if let Some(candidate) = found {
                let moves = members
                    .iter()
                    .zip(digits.iter().zip(&original))
                    .filter(|(_, (d, o))| d != o)
                    .map(|(&j, (&d, _))| (j, d))
                    .collect();
                return Some(Deviation {
                    concept: self.kind,
                    moves,
                    tribes: vec![t],
                    before: vec![current],
                    after: vec![candidate],
                    pair_rule: None,
                });
            }
        }
        None
    }
}

/// Mixed-radix increment, last digit fastest; false after wrapping to zero.
fn odometer_next(digits: &mut [usize], radices: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}
