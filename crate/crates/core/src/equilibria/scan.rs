//! Deterministic chunked scan over the full profile space.
//!
//! The space is cut into fixed-size lexicographic ranges. Each range is folded
//! sequentially and the per-range results are merged left to right, so the
//! outcome does not depend on how many workers ran the ranges.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::Game;

use super::Limits;

const CHUNK: u128 = 1 << 14;

pub(crate) fn check_budget(game: &Game, limits: &Limits, what: &'static str) -> Result<u128> {
    let count = game.profile_count();
    if count > limits.profile_budget as u128 {
        return Err(Error::BudgetExceeded {
            what,
            needed: count,
            limit: limits.profile_budget,
        });
    }
    Ok(count)
}

/// Folds `visit` over every profile in lexicographic order.
///
/// `visit` receives the profile as a mutable scratch slice (it must restore
/// it) together with the profile's index.
pub(crate) fn scan<A, I, V, M>(
    game: &Game,
    limits: &Limits,
    what: &'static str,
    init: I,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &mut [usize], u128) + Sync,
    M: Fn(A, A) -> A,
{
    let count = check_budget(game, limits, what)?;
    let chunks = count.div_ceil(CHUNK);
    let run = |c: u128| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(count);
        let mut acc = init();
        let mut profile = game.profile_at(start).into_vec();
        for idx in start..end {
            visit(&mut acc, &mut profile, idx);
            game.advance(&mut profile);
        }
        acc
    };
    let parts: Vec<A> = if limits.workers <= 1 || chunks <= 1 {
        (0..chunks).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(limits.workers)
            .build()
            .map_err(|e| crate::error::config(format!("thread pool: {e}")))?;
        let ids: Vec<u128> = (0..chunks).collect();
        pool.install(|| ids.into_par_iter().map(run).collect())
    };
    Ok(parts.into_iter().fold(init(), merge))
}
