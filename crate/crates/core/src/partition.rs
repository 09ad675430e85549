//! Tribe assignments and their exhaustive enumeration.
//!
//! Partitions are stored as restricted-growth strings: the first player is in
//! tribe 0 and each later player either joins an existing tribe or opens the
//! next one. Enumeration walks those strings in lexicographic order, so every
//! set partition appears exactly once.

use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionFile", into = "PartitionFile")]
pub struct Partition {
    tribe_of: Vec<usize>,
    tribe_count: usize,
}

/// On-disk form: `{ "tribe_of": [0, 1, 0, ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionFile {
    pub tribe_of: Vec<usize>,
}

impl TryFrom<PartitionFile> for Partition {
    type Error = Error;

    fn try_from(f: PartitionFile) -> Result<Self> {
        Partition::new(f.tribe_of)
    }
}

impl From<Partition> for PartitionFile {
    fn from(p: Partition) -> Self {
        PartitionFile { tribe_of: p.tribe_of }
    }
}

impl Partition {
    /// Requires the used tribe ids to be exactly `0..T` for some `T >= 1`.
    pub fn new(tribe_of: Vec<usize>) -> Result<Partition> {
        if tribe_of.is_empty() {
            return Err(structural("partition over zero players"));
        }
        let tribe_count = tribe_of.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; tribe_count];
        for &t in &tribe_of {
            used[t] = true;
        }
        if let Some(t) = used.iter().position(|u| !u) {
            return Err(structural(format!(
                "tribe ids must be dense; id {t} is unused"
            )));
        }
        Ok(Partition {
            tribe_of,
            tribe_count,
        })
    }

    /// Relabels arbitrary ids densely in order of first appearance.
    pub fn from_labels<T: Eq + Clone>(labels: &[T]) -> Partition {
        let mut seen: Vec<T> = Vec::new();
        let tribe_of = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(t) => t,
                None => {
                    seen.push(l.clone());
                    seen.len() - 1
                }
            })
            .collect();
        Partition {
            tribe_of,
            tribe_count: seen.len(),
        }
    }

    /// Every player alone: the selfish case.
    pub fn singleton(n: usize) -> Partition {
        Partition {
            tribe_of: (0..n).collect(),
            tribe_count: n,
        }
    }

    /// One tribe containing everybody: full altruism.
    pub fn constant(n: usize) -> Partition {
        Partition {
            tribe_of: vec![0; n],
            tribe_count: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.tribe_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tribe_of.is_empty()
    }

    pub fn tribe_of(&self) -> &[usize] {
        &self.tribe_of
    }

    pub fn tribe(&self, player: usize) -> usize {
        self.tribe_of[player]
    }

    pub fn tribe_count(&self) -> usize {
        self.tribe_count
    }

    /// Members of each tribe, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.tribe_count];
        for (i, &t) in self.tribe_of.iter().enumerate() {
            out[t].push(i);
        }
        out
    }

    /// Same blocks with ids renumbered in first-appearance order.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.tribe_of)
    }

    /// Appends one player in a fresh tribe of its own.
    pub fn padded(&self) -> Partition {
        let mut tribe_of = self.tribe_of.clone();
        tribe_of.push(self.tribe_count);
        Partition {
            tribe_of,
            tribe_count: self.tribe_count + 1,
        }
    }

    pub(crate) fn check_players(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(structural(format!(
                "partition covers {} players, game has {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Stirling number of the second kind, `None` on overflow.
pub fn stirling2(n: usize, k: usize) -> Option<u128> {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = (j as u128).checked_mul(row[j])?.checked_add(row[j - 1])?;
        }
        row[0] = 0;
    }
    Some(row[k])
}

pub fn bell(n: usize) -> Option<u128> {
    (0..=n).try_fold(0u128, |acc, k| acc.checked_add(stirling2(n, k)?))
}

/// Iterator over set partitions as restricted-growth strings.
#[derive(Debug, Clone)]
pub struct PartitionSweep {
    rgs: Vec<usize>,
    // prefix maxima: max_upto[i] = max(rgs[0..=i])
    max_upto: Vec<usize>,
    tribe_count: Option<usize>,
    started: bool,
    done: bool,
}

impl PartitionSweep {
    fn step(&mut self) -> bool {
        let n = self.rgs.len();
        // Rightmost position that can still grow; position 0 is pinned to 0.
        for i in (1..n).rev() {
            if self.rgs[i] <= self.max_upto[i - 1] {
                self.rgs[i] += 1;
                self.max_upto[i] = self.max_upto[i - 1].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.max_upto[j] = self.max_upto[i];
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for PartitionSweep {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        loop {
            if self.done {
                return None;
            }
            if self.started {
                if !self.step() {
                    self.done = true;
                    return None;
                }
            } else {
                self.started = true;
            }
            let blocks = self.max_upto.last().map_or(0, |m| m + 1);
            if self.tribe_count.is_none_or(|k| k == blocks) {
                return Some(Partition {
                    tribe_of: self.rgs.clone(),
                    tribe_count: blocks,
                });
            }
        }
    }
}

/// All partitions of `n` players, or only those with exactly `tribe_count`
/// tribes. Refuses when the count exceeds `limit`.
pub fn sweep_partitions(
    n: usize,
    tribe_count: Option<usize>,
    limit: u64,
) -> Result<PartitionSweep> {
    if n == 0 {
        return Err(structural("partition over zero players"));
    }
    let needed = match tribe_count {
        Some(k) => stirling2(n, k),
        None => bell(n),
    }
    .unwrap_or(u128::MAX);
    if needed > limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "partition sweep",
            needed,
            limit,
        });
    }
    Ok(PartitionSweep {
        rgs: vec![0; n],
        max_upto: vec![0; n],
        tribe_count,
        started: false,
        done: false,
    })
}
