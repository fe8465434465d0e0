use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rqc_core::graph::{NodeSet, Path};
use rqc_core::mmc::{is_cover, minimum_message_cover};
use rqc_core::protocol::{msr_update, trim, InboxView, Message, Quantizer};

/// Distinct-node path ending at node 0, built from arbitrary node draws.
fn to_path(raw: &[usize]) -> Path {
    let mut nodes: Vec<usize> = Vec::new();
    for &v in raw {
        if !nodes.contains(&v) {
            nodes.push(v);
        }
    }
    nodes.push(0);
    Path::new(nodes)
}

fn paths_strategy(max_msgs: usize) -> impl Strategy<Value = Vec<Path>> {
    prop::collection::vec(prop::collection::vec(1usize..=8, 1..=4), 0..=max_msgs)
        .prop_map(|raw| raw.iter().map(|r| to_path(r)).collect())
}

fn brute_force_cover(paths: &[Path]) -> usize {
    (0u64..1 << 9)
        .filter(|m| m & 1 == 0)
        .map(NodeSet::from_bits)
        .filter(|&c| is_cover(c, paths, 0))
        .map(NodeSet::len)
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cover_matches_brute_force(paths in paths_strategy(6)) {
        let c = minimum_message_cover(&paths, 0);
        prop_assert!(is_cover(c.cover, &paths, 0));
        prop_assert!(!c.cover.contains(0));
        prop_assert_eq!(c.cardinality, brute_force_cover(&paths));
        prop_assert_eq!(c.cardinality == 0, paths.is_empty());
        let sources: NodeSet = paths.iter().map(Path::source).collect();
        prop_assert!(c.cardinality <= sources.len());
        for v in c.cover.iter() {
            prop_assert!(!is_cover(c.cover.without(v), &paths, 0));
        }
    }

    #[test]
    fn cover_is_monotone(paths in paths_strategy(6), extra in prop::collection::vec(1usize..=8, 1..=4)) {
        let base = minimum_message_cover(&paths, 0).cardinality;
        let mut more = paths.clone();
        more.push(to_path(&extra));
        let bigger = minimum_message_cover(&more, 0).cardinality;
        prop_assert!(bigger >= base && bigger <= base + 1);
    }

    #[test]
    fn one_hop_trim_matches_plain_msr(
        own in -5i64..5,
        values in prop::collection::vec(-6i64..6, 0..8),
        f in 0usize..4,
    ) {
        let mut entries = vec![Message::new(own, Path::trivial(0), 0)];
        for (j, &v) in values.iter().enumerate() {
            entries.push(Message::new(v, Path::new(vec![j + 1, 0]), 0));
        }
        let inbox = InboxView { node: 0, own, entries };
        let out = trim(&inbox, f);

        // drop the f most extreme on each side, larger source first on ties
        let mut above: Vec<(i64, usize)> = values.iter().enumerate().filter(|(_, &v)| v > own).map(|(j, &v)| (v, j + 1)).collect();
        let mut below: Vec<(i64, usize)> = values.iter().enumerate().filter(|(_, &v)| v < own).map(|(j, &v)| (v, j + 1)).collect();
        above.sort_by(|a, b| b.cmp(a));
        below.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut expect: Vec<usize> = above.iter().take(f).chain(below.iter().take(f)).map(|&(_, s)| s).collect();
        expect.sort();
        let mut got: Vec<usize> = out.removed.iter().map(|m| m.path.source()).collect();
        got.sort();
        prop_assert_eq!(got, expect);
        prop_assert_eq!(out.kept.len() + out.removed.len(), values.len() + 1);
    }

    #[test]
    fn trimming_respects_budget_and_convexity(
        own in 0i64..10,
        raw in prop::collection::vec((0i64..10, prop::collection::vec(1usize..=8, 1..=3)), 0..10),
        f in 0usize..3,
        seed in any::<u64>(),
    ) {
        let mut entries = vec![Message::new(own, Path::trivial(0), 0)];
        let mut seen = Vec::new();
        for (v, r) in &raw {
            let p = to_path(r);
            if !seen.contains(&p) {
                seen.push(p.clone());
                entries.push(Message::new(*v, p, 0));
            }
        }
        let inbox = InboxView { node: 0, own, entries };
        let out = trim(&inbox, f);
        prop_assert!(out.kept.iter().any(|m| m.path == Path::trivial(0)));
        for side in [true, false] {
            let removed: Vec<&Path> = out.removed.iter().filter(|m| (m.value.unwrap() > own) == side).map(|m| &m.path).collect();
            let rest = out.kept.iter().filter(|m| if side { m.value.unwrap() > own } else { m.value.unwrap() < own });
            prop_assert!(minimum_message_cover(removed.iter().copied(), 0).cardinality <= f);
            // every kept extreme value is no more extreme than every removed one
            let removed_vals: Vec<i64> = out.removed.iter().filter(|m| (m.value.unwrap() > own) == side).map(|m| m.value.unwrap()).collect();
            for m in rest {
                let v = m.value.unwrap();
                let dominated = removed_vals.iter().all(|&r| if side { r >= v } else { r <= v });
                prop_assert!(dominated);
            }
        }
        let lo = out.kept.iter().map(|m| m.value.unwrap()).min().unwrap();
        let hi = out.kept.iter().map(|m| m.value.unwrap()).max().unwrap();
        let mut q = Quantizer::new(ChaCha8Rng::seed_from_u64(seed));
        let x = msr_update(&mut q, &out);
        prop_assert!(lo <= x && x <= hi);
    }

    #[test]
    fn quantizer_rounds_to_a_neighbor(y in -1e6f64..1e6, seed in any::<u64>()) {
        let mut q = Quantizer::new(ChaCha8Rng::seed_from_u64(seed));
        let v = q.quantize(y).unwrap();
        prop_assert!(v == y.floor() as i64 || v == y.ceil() as i64);
        prop_assert_eq!(q.quantize(y.round()).unwrap(), y.round() as i64);
    }
}
