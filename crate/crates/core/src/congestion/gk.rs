use crate::error::{validation, Result};
use crate::game::Profile;
use crate::partition::Partition;
use crate::rational::Rational;

use super::CongestionSpec;

/// The binary-tree load-balancing instance with `k` edge layers.
///
/// Nodes are numbered breadth-first from the root (node 0). Player `p` is the
/// edge above node `p + 1`; strategy 0 occupies its upper endpoint, strategy 1
/// its lower one. Left child edges form tribe 0, right child edges tribe 1.
#[derive(Debug, Clone)]
pub struct GkTree {
    pub k: usize,
    pub spec: CongestionSpec,
    pub partition: Partition,
    pub nash_profile: Profile,
    pub down_profile: Profile,
}

/// Largest supported depth; beyond this the node count stops fitting the
/// dyadic delay factors in 64-bit rationals comfortably.
pub const MAX_GK_DEPTH: usize = 40;

pub fn gen_gk_tree(k: usize) -> Result<GkTree> {
    if k == 0 || k > MAX_GK_DEPTH {
        return Err(validation(format!("tree depth must be in 1..={MAX_GK_DEPTH}, got {k}")));
    }
    let nodes = (1usize << (k + 1)) - 1;
    let half = Rational::new(1, 2);
    let alpha = (0..nodes)
        .map(|v| {
            let depth = (usize::BITS - (v + 1).leading_zeros() - 1) as usize;
            if depth < k {
                half.pow(depth as u32)
            } else {
                half.pow(k as u32 - 1) * Rational::from_integer(2)
            }
        })
        .collect();
    let players = nodes - 1;
    let strategies = (0..players)
        .map(|p| {
            let child = p + 1;
            vec![vec![(child - 1) / 2], vec![child]]
        })
        .collect();
    // odd node ids are left children
    let tribes: Vec<usize> = (0..players).map(|p| usize::from((p + 1) % 2 == 0)).collect();
    Ok(GkTree {
        k,
        spec: CongestionSpec { alpha, strategies },
        partition: Partition::new(tribes)?,
        nash_profile: Profile::new(vec![0; players]),
        down_profile: Profile::new(vec![1; players]),
    })
}
