use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{Game, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsStatus {
    ConvergedToEquilibrium,
    CycleDetected,
    StepBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Visited profiles, starting with the initial one.
    pub profiles: Vec<Profile>,
    pub welfare: Vec<Rational>,
    /// `(player, new strategy)` for each step.
    pub moves: Vec<(usize, usize)>,
    pub status: DynamicsStatus,
}

impl Trajectory {
    pub fn terminal(&self) -> &Profile {
        self.profiles.last().expect("trajectory always holds the start profile")
    }
}

/// Tribal best-response dynamics.
///
/// Each step scans players in ascending order and lets the first one with a
/// strictly improving deviation (measured in its tribe's total) switch to its
/// best such strategy, lowest index among ties.
pub fn best_response_dynamics(
    base: &Game,
    partition: &Partition,
    start: &Profile,
    max_steps: usize,
) -> Result<Trajectory> {
    base.validate_profile(start)?;
    partition.check_players(base.player_count())?;
    let o = base.orientation();
    let members = partition.members();
    let counts = base.strategy_counts();

    let mut current = start.as_slice().to_vec();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([current.clone()]);
    let mut traj = Trajectory {
        profiles: vec![start.clone()],
        welfare: vec![base.welfare_at(&current)],
        moves: Vec::new(),
        status: DynamicsStatus::ConvergedToEquilibrium,
    };

    loop {
        let mut step = None;
        for i in 0..current.len() {
            let tribe = &members[partition.tribe(i)];
            let now = base.group_payoff_at(tribe, &current);
            let original = current[i];
            let mut best: Option<(usize, Rational)> = None;
            for alt in (0..counts[i]).filter(|&a| a != original) {
                current[i] = alt;
                let value = base.group_payoff_at(tribe, &current);
                if o.improves(value, now) && best.is_none_or(|(_, b)| o.improves(value, b)) {
                    best = Some((alt, value));
                }
            }
            current[i] = original;
            if let Some((alt, _)) = best {
                step = Some((i, alt));
                break;
            }
        }
        let Some((player, alt)) = step else {
            traj.status = DynamicsStatus::ConvergedToEquilibrium;
            return Ok(traj);
        };
        if traj.moves.len() >= max_steps {
            traj.status = DynamicsStatus::StepBudgetExhausted;
            return Ok(traj);
        }
        current[player] = alt;
        traj.moves.push((player, alt));
        traj.profiles.push(Profile::new(current.clone()));
        traj.welfare.push(base.welfare_at(&current));
        if !seen.insert(current.clone()) {
            traj.status = DynamicsStatus::CycleDetected;
            return Ok(traj);
        }
    }
}
