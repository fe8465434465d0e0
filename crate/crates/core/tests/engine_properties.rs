use proptest::prelude::*;

use rqc_core::adversary::{AdversaryBehavior, RelayStrategy, ValueStrategy};
use rqc_core::engine::{
    envelopes_monotone, run, verdict_preservation, verdict_safety, DelayModel, Scenario, Schedule,
    Simulation,
};
use rqc_core::graph::{gen_cycle, DirectedGraph};
use rqc_core::robustness::{check_lemma1_implications, FaultModel};

/// Connected undirected graph: a random spanning tree plus extra edges.
fn connected_graph(n: usize, parents: &[usize], extra: &[(usize, usize)]) -> DirectedGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (parents[i - 1] % i, i)).collect();
    edges.extend(
        extra
            .iter()
            .map(|&(a, b)| (a % n, b % n))
            .filter(|(a, b)| a != b),
    );
    DirectedGraph::undirected(n, edges).unwrap()
}

fn strategy() -> impl Strategy<Value = ValueStrategy> {
    prop_oneof![
        (-20i64..30).prop_map(ValueStrategy::Constant),
        (-20i64..30, -20i64..30).prop_map(|(a, b)| ValueStrategy::Oscillate { a, b }),
        (1.0f64..15.0, 2.0f64..20.0, -5.0f64..15.0).prop_map(|(amplitude, period, offset)| {
            ValueStrategy::QuantizedSine {
                amplitude,
                period,
                offset,
            }
        }),
        (-20i64..0, 10i64..30).prop_map(|(lo, hi)| ValueStrategy::RandomIn { lo, hi }),
    ]
}

fn relay() -> impl Strategy<Value = RelayStrategy> {
    prop_oneof![
        Just(RelayStrategy::PassThrough),
        Just(RelayStrategy::ReplaceWithOwn),
        strategy().prop_map(|s| RelayStrategy::Replace(vec![s])),
        (-10i64..10).prop_map(RelayStrategy::Offset),
    ]
}

prop_compose! {
    fn scenario()(
        n in 2usize..=7,
        parents in prop::collection::vec(0usize..7, 6),
        extra in prop::collection::vec((0usize..7, 0usize..7), 0..8),
        l in 1usize..=3,
        adversary in prop::option::of((0usize..7, strategy(), relay(), any::<bool>())),
        x0 in prop::collection::vec(0i64..12, 7),
        sched in 0u8..3,
        seed in any::<u64>(),
    ) -> Scenario {
        let g = connected_graph(n, &parents, &extra);
        let mut sc = Scenario::new(g, l, usize::from(adversary.is_some()), x0[..n].to_vec()).with_seed(seed).with_horizon(60);
        if let Some((node, own, rel, byz)) = adversary {
            if n > 2 {
                let b = if byz {
                    AdversaryBehavior::byzantine(vec![own, ValueStrategy::Constant(-7)], rel)
                } else {
                    AdversaryBehavior::malicious(own, rel)
                };
                sc = sc.with_adversary(node % n, b);
            }
        }
        sc.with_schedule(match sched {
            0 => Schedule::Synchronous,
            1 => Schedule::Deterministic { kbar: 2 },
            _ => Schedule::randomized_uniform(n, 0.6),
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn safety_and_preservation_hold(sc in scenario()) {
        let t = run(&sc).unwrap();
        prop_assert!(verdict_safety(&t));
        prop_assert!(t.safety_ok);
        prop_assert!(verdict_preservation(&t));
        if sc.schedule == Schedule::Synchronous {
            prop_assert!(envelopes_monotone(&t));
        }
        prop_assert_eq!(t.to_csv(), run(&sc).unwrap().to_csv());
    }

    #[test]
    fn delays_respect_the_bound(sc in scenario(), tau in 1u64..4) {
        let sc = sc.with_schedule(Schedule::Synchronous).with_delays(DelayModel::Uniform { tau });
        let t = run(&sc).unwrap();
        prop_assert!(t.max_normal_age <= tau);
        prop_assert!(verdict_safety(&t));
        prop_assert!(verdict_preservation(&t));
    }

    #[test]
    fn implication_chain(
        n in 3usize..=6,
        parents in prop::collection::vec(0usize..6, 5),
        extra in prop::collection::vec((0usize..6, 0usize..6), 0..10),
        l in 1usize..=2,
    ) {
        let g = connected_graph(n, &parents, &extra);
        let report = check_lemma1_implications(&g, 1, l, FaultModel::total(1)).unwrap();
        prop_assert!(report.violations.is_empty());
    }
}

#[test]
fn randomized_update_frequency() {
    let g = gen_cycle(6).unwrap();
    let p = [0.2, 0.5, 0.9, 0.5, 0.3, 1.0];
    let sc = Scenario::new(g, 1, 0, vec![0; 6]).with_schedule(Schedule::Randomized(p.to_vec()));
    let mut sim = Simulation::new(&sc).unwrap();
    let steps = 4000;
    let mut hits = [0usize; 6];
    for _ in 0..steps {
        for i in sim.step().0.iter() {
            hits[i] += 1;
        }
    }
    for (i, &pi) in p.iter().enumerate() {
        let mean = steps as f64 * pi;
        let sigma = (mean * (1.0 - pi)).sqrt();
        assert!(
            (hits[i] as f64 - mean).abs() <= 3.0 * sigma.max(1e-9),
            "node {i}: {} updates",
            hits[i]
        );
    }
}
