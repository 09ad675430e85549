use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::rational::Rational;

use super::CongestionSpec;

/// Largest number of simple paths enumerated per player.
const PATH_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingArc {
    pub from: usize,
    pub to: usize,
    /// Linear delay factor; zero for free arcs.
    pub alpha: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingSpec {
    pub vertices: usize,
    pub arcs: Vec<RoutingArc>,
    /// `(source, sink)` per player.
    pub terminals: Vec<(usize, usize)>,
}

impl RoutingSpec {
    pub fn validate(&self) -> Result<()> {
        for (k, a) in self.arcs.iter().enumerate() {
            if a.from >= self.vertices || a.to >= self.vertices {
                return Err(validation(format!("arc {k} references a missing vertex")));
            }
            if a.alpha.is_negative() {
                return Err(validation(format!("arc {k} has a negative delay factor")));
            }
        }
        if self.terminals.is_empty() {
            return Err(validation("routing game without players"));
        }
        for (i, &(s, t)) in self.terminals.iter().enumerate() {
            if s >= self.vertices || t >= self.vertices {
                return Err(validation(format!("terminals of player {i} reference a missing vertex")));
            }
        }
        Ok(())
    }

    /// Simple `source -> sink` paths as arc lists, in depth-first order
    /// following arc insertion order.
    pub fn paths(&self, source: usize, sink: usize) -> Result<Vec<Vec<usize>>> {
        let mut out_arcs = vec![Vec::new(); self.vertices];
        for (k, a) in self.arcs.iter().enumerate() {
            out_arcs[a.from].push(k);
        }
        let mut paths = Vec::new();
        let mut on_path = vec![false; self.vertices];
        let mut stack: Vec<usize> = Vec::new();
        self.dfs(source, sink, &out_arcs, &mut on_path, &mut stack, &mut paths)?;
        Ok(paths)
    }

    fn dfs(
        &self,
        at: usize,
        sink: usize,
        out_arcs: &[Vec<usize>],
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if at == sink {
            if paths.len() as u64 >= PATH_BUDGET {
                return Err(Error::BudgetExceeded {
                    what: "simple path enumeration",
                    needed: paths.len() as u128 + 1,
                    limit: PATH_BUDGET,
                });
            }
            paths.push(stack.clone());
            return Ok(());
        }
        on_path[at] = true;
        for &k in &out_arcs[at] {
            let next = self.arcs[k].to;
            if !on_path[next] {
                stack.push(k);
                self.dfs(next, sink, out_arcs, on_path, stack, paths)?;
                stack.pop();
            }
        }
        on_path[at] = false;
        Ok(())
    }
}

/// Resource-subset form of a routing game: strategies are the simple paths,
/// resources are the arcs with positive delay (in arc order). Free arcs never
/// contribute cost, so they are left out.
pub fn compile(routing: &RoutingSpec) -> Result<CongestionSpec> {
    routing.validate()?;
    let mut resource_of = vec![None; routing.arcs.len()];
    let mut alpha = Vec::new();
    for (k, a) in routing.arcs.iter().enumerate() {
        if !a.alpha.is_zero() {
            resource_of[k] = Some(alpha.len());
            alpha.push(a.alpha);
        }
    }
    let strategies = routing
        .terminals
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| {
            let paths = routing.paths(s, t)?;
            if paths.is_empty() {
                return Err(validation(format!("player {i} has no path from {s} to {t}")));
            }
            Ok(paths
                .into_iter()
                .map(|p| p.into_iter().filter_map(|k| resource_of[k]).collect())
                .collect())
        })
        .collect::<Result<Vec<Vec<Vec<usize>>>>>()?;
    Ok(CongestionSpec { alpha, strategies })
}

/// Routing image of a load-balancing game (every strategy a single resource).
///
/// Resource `e` becomes the arc `2e -> 2e+1` carrying `alpha_e`. Player `i`
/// gets source `2R + 2i` and sink `2R + 2i + 1`, joined to each of its
/// candidate resources by free arcs, so its `k`-th path is its `k`-th strategy.
pub fn load_balancing_to_routing(spec: &CongestionSpec) -> Result<RoutingSpec> {
    spec.validate()?;
    let r = spec.resource_count();
    let mut arcs: Vec<RoutingArc> = spec
        .alpha
        .iter()
        .enumerate()
        .map(|(e, &alpha)| RoutingArc { from: 2 * e, to: 2 * e + 1, alpha })
        .collect();
    let mut terminals = Vec::new();
    for (i, list) in spec.strategies.iter().enumerate() {
        let (source, sink) = (2 * r + 2 * i, 2 * r + 2 * i + 1);
        let mut used = Vec::new();
        for (k, set) in list.iter().enumerate() {
            let [e] = set.as_slice() else {
                return Err(validation(format!(
                    "strategy {k} of player {i} is not a single resource"
                )));
            };
            if used.contains(e) {
                return Err(validation(format!("player {i} lists resource {e} twice")));
            }
            used.push(*e);
            arcs.push(RoutingArc { from: source, to: 2 * e, alpha: Rational::ZERO });
            arcs.push(RoutingArc { from: 2 * e + 1, to: sink, alpha: Rational::ZERO });
        }
        terminals.push((source, sink));
    }
    Ok(RoutingSpec { vertices: 2 * r + 2 * spec.player_count(), arcs, terminals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::{build_congestion_game, gen_gk_tree};
    use crate::game::Profile;

    #[test]
    fn single_player_single_resource() {
        let spec = CongestionSpec { alpha: vec![Rational::ONE], strategies: vec![vec![vec![0]]] };
        let routing = load_balancing_to_routing(&spec).unwrap();
        assert_eq!(routing.paths(2, 3).unwrap().len(), 1);
        let compiled = compile(&routing).unwrap();
        let g = build_congestion_game(&compiled).unwrap();
        assert_eq!(g.payoff(0, &Profile::new(vec![0])).unwrap(), Rational::ONE);
    }

    #[test]
    fn g1_keeps_its_nash_cost() {
        let t = gen_gk_tree(1).unwrap();
        let routing = load_balancing_to_routing(&t.spec).unwrap();
        for &(s, sink) in &routing.terminals {
            let paths = routing.paths(s, sink).unwrap();
            assert_eq!(paths.len(), 2);
            assert!(paths.iter().all(|p| p.len() == 3));
        }
        let g = build_congestion_game(&compile(&routing).unwrap()).unwrap();
        assert_eq!(g.social_welfare(&t.nash_profile).unwrap(), Rational::from_integer(4));
    }

    #[test]
    fn rejects_multi_resource_strategies() {
        let spec = CongestionSpec { alpha: vec![Rational::ONE; 2], strategies: vec![vec![vec![0, 1]]] };
        assert!(load_balancing_to_routing(&spec).is_err());
    }

    #[test]
    fn diamond_paths_in_arc_order() {
        let arc = |from, to, a| RoutingArc { from, to, alpha: Rational::from_integer(a) };
        let routing = RoutingSpec {
            vertices: 4,
            arcs: vec![arc(0, 1, 1), arc(0, 2, 2), arc(1, 3, 0), arc(2, 3, 0), arc(1, 2, 0)],
            terminals: vec![(0, 3)],
        };
        assert_eq!(routing.paths(0, 3).unwrap(), vec![vec![0, 2], vec![0, 4, 3], vec![1, 3]]);
        let compiled = compile(&routing).unwrap();
        assert_eq!(compiled.strategies[0], vec![vec![0], vec![0], vec![1]]);
        let unreachable = RoutingSpec { terminals: vec![(3, 0)], ..routing };
        assert!(compile(&unreachable).is_err());
    }
}
