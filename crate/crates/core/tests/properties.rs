mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tribegames::congestion::{self, build_congestion_game, gen_gk_tree};
use tribegames::contribution::{self, build_contribution_game, gen_additive_chain, gen_convex_path, RewardClass};
use tribegames::equilibria::{
    best_response_dynamics, compute_optimum, compute_pot, enumerate_equilibria, is_equilibrium, DeviationConcept,
    DynamicsStatus, Limits, PotRatio, Stability,
};
use tribegames::grouping::{self, build_grouping_game, gen_fig1, gen_k_family, Variant};
use tribegames::io::to_json;
use tribegames::partition::sweep_partitions;
use tribegames::{Game, Partition, Profile, Rational};

use common::*;

fn limits() -> Limits {
    Limits::default()
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    Partition::from_labels(&labels)
}

fn every_partition(n: usize) -> Vec<Partition> {
    sweep_partitions(n, None, 1_000_000).unwrap().collect()
}

fn eq_profiles(game: &Game, p: &Partition, c: &DeviationConcept) -> Vec<Vec<usize>> {
    enumerate_equilibria(game, p, c, &limits())
        .unwrap()
        .into_iter()
        .map(|r| r.profile.into_vec())
        .collect()
}

fn at_least(a: PotRatio, b: PotRatio) -> bool {
    a.max(b) == a
}

#[test]
fn grouping_equilibria_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(2..=3);
        let spec = grouping::random_spec(&mut rng, n, k, 3);
        let game = build_grouping_game(&spec).unwrap();
        let p = random_partition(&mut rng, n);
        let expected = naive_unilateral_equilibria(game.strategy_counts(), game.orientation(), &p, |i, s| {
            grouping_utility(&spec, i, s)
        });
        assert_eq!(eq_profiles(&game, &p, &DeviationConcept::unilateral()), expected);
    }
}

#[test]
fn congestion_equilibria_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let spec = congestion::random_spec(&mut rng, 4, 4, 3);
        let game = build_congestion_game(&spec).unwrap();
        let n = spec.player_count();
        let p = random_partition(&mut rng, n);
        let expected = naive_unilateral_equilibria(game.strategy_counts(), game.orientation(), &p, |i, s| {
            congestion_cost(&spec, i, s)
        });
        assert_eq!(eq_profiles(&game, &p, &DeviationConcept::unilateral()), expected);
    }
}

#[test]
fn pot_matches_brute_force_over_all_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..15 {
        let n = rng.gen_range(2..=4);
        let spec = grouping::random_spec(&mut rng, n, 2, 3);
        let game = build_grouping_game(&spec).unwrap();
        let parts = every_partition(n);
        let r = compute_pot(&game, &parts, &DeviationConcept::unilateral(), &limits()).unwrap();
        let oracle = naive_ratio(game.strategy_counts(), game.orientation(), &parts, |i, s| grouping_utility(&spec, i, s));
        assert_eq!(r.ratio.finite(), oracle, "{spec:?}");
    }
    for _ in 0..15 {
        let spec = congestion::random_spec(&mut rng, 3, 3, 3);
        let game = build_congestion_game(&spec).unwrap();
        let parts = every_partition(spec.player_count());
        let r = compute_pot(&game, &parts, &DeviationConcept::unilateral(), &limits()).unwrap();
        let oracle = naive_ratio(game.strategy_counts(), game.orientation(), &parts, |i, s| congestion_cost(&spec, i, s));
        assert_eq!(r.ratio.finite(), oracle, "{spec:?}");
    }
}

#[test]
fn figure_ratios_match_brute_force() {
    let tribal = gen_fig1(Variant::Tribal);
    let g = build_grouping_game(&tribal.spec).unwrap();
    let oracle = naive_ratio(g.strategy_counts(), g.orientation(), &every_partition(4), |i, s| {
        grouping_utility(&tribal.spec, i, s)
    });
    assert_eq!(oracle, Some(Rational::from_integer(3)));
    let selfish = gen_fig1(Variant::SelfishAltruistic);
    for p in [Partition::singleton(4), Partition::constant(4)] {
        let oracle = naive_ratio(&[2; 4], g.orientation(), &[p], |i, s| grouping_utility(&selfish.spec, i, s));
        assert_eq!(oracle, Some(Rational::from_integer(2)));
    }
}

/// More partitions can only add equilibria, so the ratio over all partitions
/// dominates every subset, the singleton one included.
#[test]
fn monotone_in_the_partition_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut games: Vec<Game> = vec![
        build_grouping_game(&gen_fig1(Variant::Tribal).spec).unwrap(),
        build_grouping_game(&gen_fig1(Variant::SelfishAltruistic).spec).unwrap(),
        build_grouping_game(&gen_k_family(2, Variant::Tribal).unwrap().spec).unwrap(),
        build_congestion_game(&gen_gk_tree(1).unwrap().spec).unwrap(),
        build_contribution_game(&gen_additive_chain().spec).unwrap().game,
    ];
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        games.push(build_grouping_game(&grouping::random_spec(&mut rng, n, 2, 3)).unwrap());
        games.push(build_congestion_game(&congestion::random_spec(&mut rng, 4, 3, 3)).unwrap());
    }
    let u = DeviationConcept::unilateral();
    for g in &games {
        let n = g.player_count();
        let all = compute_pot(g, &every_partition(n), &u, &limits()).unwrap().ratio;
        let single = compute_pot(g, &[Partition::singleton(n)], &u, &limits()).unwrap().ratio;
        assert!(at_least(all, single));
        for k in 1..=n {
            let parts: Vec<_> = sweep_partitions(n, Some(k), 1_000_000).unwrap().collect();
            let some = compute_pot(g, &parts, &u, &limits()).unwrap().ratio;
            assert!(at_least(all, some));
        }
    }
}

#[test]
fn singleton_extension_is_the_base_game() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10 {
        let spec = congestion::random_spec(&mut rng, 4, 4, 3);
        let g = build_congestion_game(&spec).unwrap();
        let ext = g.tribal_extension(&Partition::singleton(g.player_count())).unwrap();
        for s in all_profiles(g.strategy_counts()) {
            let s = Profile::new(s);
            assert_eq!(g.payoffs(&s).unwrap(), ext.payoffs(&s).unwrap());
        }
    }
}

/// A zero-payoff player with one strategy in a fresh tribe changes nothing.
#[test]
fn padding_preserves_equilibria_and_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let u = DeviationConcept::unilateral();
    for _ in 0..20 {
        let n = rng.gen_range(2..=4);
        let g = build_grouping_game(&grouping::random_spec(&mut rng, n, 2, 3)).unwrap();
        let p = random_partition(&mut rng, n);
        let padded = g.padded();
        let pp = p.padded();
        assert_eq!(pp.tribe_count(), p.tribe_count() + 1);
        let base = eq_profiles(&g, &p, &u);
        let projected: Vec<Vec<usize>> = eq_profiles(&padded, &pp, &u)
            .into_iter()
            .map(|mut s| {
                assert_eq!(s.pop(), Some(0));
                s
            })
            .collect();
        assert_eq!(base, projected);
        let r0 = compute_pot(&g, std::slice::from_ref(&p), &u, &limits()).unwrap().ratio;
        let r1 = compute_pot(&padded, &[pp], &u, &limits()).unwrap().ratio;
        assert_eq!(r0, r1);
    }
}

#[test]
fn joint_tribe_moves_refine_unilateral_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..25 {
        let n = rng.gen_range(2..=5);
        let g = build_grouping_game(&grouping::random_spec(&mut rng, n, 2, 3)).unwrap();
        let p = random_partition(&mut rng, n);
        let uni = eq_profiles(&g, &p, &DeviationConcept::unilateral());
        let olig = eq_profiles(&g, &p, &DeviationConcept::oligopolistic());
        let coord = eq_profiles(&g, &p, &DeviationConcept::coordinated());
        assert!(olig.iter().all(|s| uni.contains(s)));
        assert_eq!(olig, coord);
    }
}

#[test]
fn blocking_witnesses_recheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..15 {
        let n = rng.gen_range(2..=4);
        let spec = grouping::random_spec(&mut rng, n, 2, 3);
        let g = build_grouping_game(&spec).unwrap();
        let p = random_partition(&mut rng, n);
        let adjacency = tribegames::equilibria::Adjacency::complete(n);
        for c in [
            DeviationConcept::unilateral(),
            DeviationConcept::pairwise(adjacency),
            DeviationConcept::oligopolistic(),
        ] {
            for s in all_profiles(g.strategy_counts()) {
                let s = Profile::new(s);
                if let Stability::Blocked(d) = is_equilibrium(&g, &p, &s, &c, &limits()).unwrap() {
                    assert!(d.recheck(&g, &p, &s).unwrap(), "{d:?} at {s}");
                }
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let inst = gen_k_family(4, Variant::Tribal).unwrap();
    let g = build_grouping_game(&inst.spec).unwrap();
    assert!(g.profile_count() > 1 << 14);
    let u = DeviationConcept::unilateral();
    let run = |w: usize| {
        let l = limits().with_workers(w);
        let eqs = enumerate_equilibria(&g, &inst.partition, &u, &l).unwrap();
        let pot = compute_pot(&g, &[inst.partition.clone(), Partition::singleton(8)], &u, &l).unwrap();
        (to_json(&eqs), to_json(&pot), compute_optimum(&g, &l).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn best_response_never_cycles_on_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for k in 1..=4 {
        let t = gen_gk_tree(k).unwrap();
        let g = build_congestion_game(&t.spec).unwrap();
        let n = g.player_count();
        let at_nash = best_response_dynamics(&g, &t.partition, &t.nash_profile, 10_000).unwrap();
        assert_eq!(at_nash.status, DynamicsStatus::ConvergedToEquilibrium);
        assert!(at_nash.moves.is_empty());
        let mut starts = vec![t.down_profile.clone()];
        starts.extend((0..10).map(|_| Profile::new((0..n).map(|_| rng.gen_range(0..2)).collect())));
        for start in starts {
            for p in [&t.partition, &Partition::singleton(n), &Partition::constant(n)] {
                let tr = best_response_dynamics(&g, p, &start, 100_000).unwrap();
                assert_eq!(tr.status, DynamicsStatus::ConvergedToEquilibrium, "k={k} from {start}");
                assert!(is_equilibrium(&g, p, tr.terminal(), &DeviationConcept::unilateral(), &limits())
                    .unwrap()
                    .is_stable());
            }
        }
    }
}

/// The tribal split of the weighted 4-cycle is not selfish-stable: player a
/// gains 2 by joining b and loses 1.
#[test]
fn weighted_cycle_dynamics_under_selfish_play() {
    let inst = gen_fig1(Variant::Tribal);
    let g = build_grouping_game(&inst.spec).unwrap();
    let single = Partition::singleton(4);
    let oracle = naive_unilateral_equilibria(&[2; 4], g.orientation(), &single, |i, s| {
        grouping_utility(&inst.spec, i, s)
    });
    assert!(!oracle.contains(&inst.profile.as_slice().to_vec()));
    let tr = best_response_dynamics(&g, &single, &inst.profile, 100).unwrap();
    assert_eq!(tr.status, DynamicsStatus::ConvergedToEquilibrium);
    assert_eq!(tr.moves[0].0, 0);
    assert!(oracle.contains(&tr.terminal().as_slice().to_vec()));
}

#[test]
fn tree_and_routing_image_agree() {
    for k in 1..=2 {
        let spec = gen_gk_tree(k).unwrap().spec;
        let g = build_congestion_game(&spec).unwrap();
        let routed = congestion::compile(&congestion::load_balancing_to_routing(&spec).unwrap()).unwrap();
        for s in all_profiles(g.strategy_counts()) {
            for i in 0..s.len() {
                assert_eq!(congestion_cost(&spec, i, &s), congestion_cost(&routed, i, &s));
            }
            assert_eq!(g.payoffs(&Profile::new(s.clone())).unwrap(), (0..s.len()).map(|i| congestion_cost(&spec, i, &s)).collect::<Vec<_>>());
        }
    }
}

/// Doubling the grid only adds strategies, so the optimum cannot drop.
#[test]
fn finer_grids_never_lower_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut specs = vec![gen_additive_chain().spec, gen_convex_path(Rational::new(1, 100)).spec];
    for class in [RewardClass::Additive, RewardClass::Convex] {
        for _ in 0..6 {
            let v = rng.gen_range(2..=3);
            specs.push(contribution::random_spec(&mut rng, v, class, 1));
        }
    }
    for spec in specs {
        let mut last = None;
        for d in [1, 2, 4] {
            let g = build_contribution_game(&spec.clone().with_grid(d)).unwrap().game;
            if g.profile_count() > 2_000_000 {
                break;
            }
            let (_, opt) = compute_optimum(&g, &limits()).unwrap();
            if let Some(prev) = last {
                assert!(opt >= prev, "{spec:?} d={d}");
            }
            last = Some(opt);
        }
    }
}
