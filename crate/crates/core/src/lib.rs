//! Tribal extensions of finite strategic games.
//!
//! Players are grouped into tribes and each one optimises the total payoff of
//! its tribe. The crate builds grouping, contribution and congestion games,
//! enumerates their pure equilibria under several deviation concepts, and
//! computes exact worst-equilibrium-to-optimum ratios.

pub mod congestion;
pub mod contribution;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod grouping;
pub mod io;
pub mod partition;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use game::{Game, Orientation, PayoffFn, Profile};
pub use partition::Partition;
pub use rational::Rational;
