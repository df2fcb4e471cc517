mod common;

use blockwish::partition::{
    bell_number, catalan_number, crossing_count, enumerate_noncrossing, enumerate_partitions, kreweras, signature,
    signature_by_switch_search,
};
use blockwish::{Error, Partition, Permutation};
use common::lit;
use proptest::prelude::*;

fn partition_strategy(max_row: usize) -> impl Strategy<Value = Partition> {
    (0..=max_row, 0..=max_row)
        .prop_filter("nonempty", |(k, l)| k + l > 0)
        .prop_flat_map(|(k, l)| {
            let points = k + l;
            (Just(k), Just(l), proptest::collection::vec(0..points, points))
        })
        .prop_map(|(k, l, labels)| Partition::from_labels(k, l, &labels).unwrap())
}

fn even_partition_strategy(max_points: usize) -> impl Strategy<Value = Partition> {
    (1..=max_points / 2, 0..=max_points)
        .prop_flat_map(|(pairs, split)| {
            let points = 2 * pairs;
            (
                Just(points),
                Just(split.min(points)),
                proptest::collection::vec(0..pairs, pairs),
                proptest::collection::vec(any::<u32>(), points),
            )
        })
        .prop_map(|(points, upper, merge, keys)| {
            // pair up shuffled points, then merge pairs into blocks
            let mut order: Vec<usize> = (0..points).collect();
            order.sort_by_key(|&x| (keys[x], x));
            let mut labels = vec![0; points];
            for (pair, chunk) in order.chunks(2).enumerate() {
                labels[chunk[0]] = merge[pair];
                labels[chunk[1]] = merge[pair];
            }
            Partition::from_labels(upper, points - upper, &labels).unwrap()
        })
}

fn nc_strategy(max_p: usize) -> impl Strategy<Value = Partition> {
    (1..=max_p).prop_flat_map(|p| {
        let all = enumerate_noncrossing(p).unwrap();
        let len = all.len();
        (0..len).prop_map(move |k| all[k].clone())
    })
}

proptest! {
    #[test]
    fn literal_round_trip(pi in partition_strategy(5)) {
        let text = pi.to_string();
        prop_assert_eq!(text.parse::<Partition>().unwrap(), pi);
    }

    #[test]
    fn adjoint_and_mirror_are_involutions(pi in partition_strategy(4)) {
        prop_assert_eq!(pi.adjoint().adjoint(), pi.clone());
        if pi.upper_count() % 2 == 0 && pi.lower_count() % 2 == 0 {
            prop_assert_eq!(pi.middle_symmetry().unwrap().middle_symmetry().unwrap(), pi);
        }
    }

    #[test]
    fn coarsening_is_a_join(a in partition_strategy(3), seed in proptest::collection::vec(0usize..6, 6)) {
        let labels: Vec<usize> = seed.into_iter().take(a.point_count()).collect();
        prop_assume!(labels.len() == a.point_count());
        let b = Partition::from_labels(a.upper_count(), a.lower_count(), &labels).unwrap();
        let join = a.common_coarsening(&b).unwrap();
        prop_assert!(join.is_coarser(&a).unwrap());
        prop_assert!(join.is_coarser(&b).unwrap());
        prop_assert_eq!(b.common_coarsening(&a).unwrap(), join.clone());
        prop_assert_eq!(join.common_coarsening(&a).unwrap(), join.clone());
        let top = Partition::one_block(a.upper_count(), a.lower_count());
        prop_assert!(top.is_coarser(&a).unwrap());
        prop_assert!(a.is_coarser(&Partition::singletons(a.upper_count(), a.lower_count())).unwrap());
    }

    #[test]
    fn delta_matches_kernel_order(pi in partition_strategy(3), values in proptest::collection::vec(0usize..3, 6)) {
        let (k, l) = (pi.upper_count(), pi.lower_count());
        prop_assume!(values.len() >= k + l);
        let (up, low) = values[..k + l].split_at(k);
        let ker = Partition::kernel(up, low);
        prop_assert_eq!(pi.delta(up, low).unwrap(), ker.is_coarser(&pi).unwrap());
    }

    #[test]
    fn signature_agrees_with_switch_search(pi in even_partition_strategy(10)) {
        prop_assert_eq!(signature(&pi).unwrap(), signature_by_switch_search(&pi).unwrap());
    }

    #[test]
    fn kreweras_complement_counts(sigma in nc_strategy(9)) {
        let p = sigma.point_count();
        let k = kreweras(&sigma).unwrap();
        prop_assert!(k.is_noncrossing());
        prop_assert_eq!(sigma.block_count() + k.block_count(), p + 1);
        let perm = Permutation::from_noncrossing(&sigma).unwrap();
        prop_assert_eq!(perm.cycle_count(), sigma.block_count());
        prop_assert_eq!(perm.orbits(), sigma);
    }

    #[test]
    fn composing_with_the_identity_pattern(pi in partition_strategy(4)) {
        let k = pi.upper_count();
        let labels: Vec<usize> = (0..k).chain(0..k).collect();
        let id = Partition::from_labels(k, k, &labels).unwrap();
        let (composed, loops) = Partition::vertical_compose(&id, &pi).unwrap();
        prop_assert_eq!(composed, pi.clone());
        prop_assert_eq!(loops, 0);
        let double = pi.tensor(&pi);
        prop_assert_eq!(double.block_count(), 2 * pi.block_count());
    }

    #[test]
    fn permutation_group_laws(p in 1usize..7, a in 0usize..5040, b in 0usize..5040) {
        let all = Permutation::all(p);
        let (x, y) = (&all[a % all.len()], &all[b % all.len()]);
        let xy = x.compose(y).unwrap();
        prop_assert_eq!(xy.inverse(), y.inverse().compose(&x.inverse()).unwrap());
        prop_assert_eq!(xy.sign(), x.sign() * y.sign());
        prop_assert_eq!(x.compose(&x.inverse()).unwrap(), Permutation::identity(p));
        prop_assert_eq!(signature(&Partition::from_permutation(x)).unwrap(), x.sign());
    }
}

#[test]
fn censuses() {
    assert_eq!(enumerate_partitions(2, 2, false).unwrap().len(), 15);
    assert_eq!(enumerate_partitions(2, 2, true).unwrap().len(), 4);
    assert_eq!(enumerate_partitions(0, 3, false).unwrap().len(), 5);
    for points in 0..=9 {
        assert_eq!(enumerate_partitions(points, 0, false).unwrap().len() as u128, bell_number(points));
        assert_eq!(enumerate_noncrossing(points).unwrap().len() as u128, catalan_number(points));
    }
    assert_eq!(enumerate_partitions(9, 8, false), Err(Error::TooLarge { points: 17, limit: 16 }));
}

#[test]
fn pairing_signature_is_crossing_parity() {
    for points in (2..=8).step_by(2) {
        for upper in 0..=points {
            for pi in enumerate_partitions(upper, points - upper, true).unwrap().iter().filter(|p| p.is_pairing()) {
                let parity = if crossing_count(pi).unwrap().is_multiple_of(2) { 1 } else { -1 };
                assert_eq!(signature(pi).unwrap(), parity, "{pi}");
            }
        }
    }
}

#[test]
fn basic_partition_pictures() {
    assert_eq!(lit("ab/ba").picture(), "[ a b ]\n[ b a ]");
}

#[test]
fn cycle_counting_identities() {
    for p in 1..=6 {
        let gamma = Permutation::standard_cycle(p);
        for sigma_part in enumerate_noncrossing(p).unwrap() {
            let sigma = Permutation::from_noncrossing(&sigma_part).unwrap();
            let k = sigma.cycle_count();
            assert_eq!(k + sigma.compose(&gamma.inverse()).unwrap().cycle_count(), p + 1);
            assert_eq!(sigma.compose(&gamma).unwrap().cycle_count() - 1, sigma.power(2).cycle_count() - k);
            let even_blocks = sigma_part.block_sizes().iter().filter(|&&b| b % 2 == 0).count();
            assert_eq!(sigma.power(2).cycle_count() - k, even_blocks);
            assert_eq!(gamma.inverse().compose(&sigma).unwrap().cycle_count() - 1, p - k);
        }
    }
    // the bound is attained exactly on the noncrossing images
    for p in 1..=4 {
        let gamma = Permutation::standard_cycle(p);
        let geodesic: Vec<Permutation> = Permutation::all(p)
            .into_iter()
            .filter(|s| s.cycle_count() + s.compose(&gamma.inverse()).unwrap().cycle_count() == p + 1)
            .collect();
        for s in Permutation::all(p) {
            assert!(s.cycle_count() + s.compose(&gamma.inverse()).unwrap().cycle_count() <= p + 1);
        }
        assert_eq!(geodesic.len() as u128, catalan_number(p));
    }
}

#[test]
fn delta_is_the_kernel_order_on_small_tables() {
    let mut pis = enumerate_partitions(2, 2, true).unwrap();
    pis.extend(enumerate_partitions(4, 4, true).unwrap());
    for pi in pis {
        let k = pi.upper_count();
        for code in 0..1usize << (2 * k) {
            let x: Vec<usize> = (0..2 * k).map(|b| (code >> b) & 1).collect();
            let (up, low) = x.split_at(k);
            assert_eq!(pi.delta(up, low).unwrap(), Partition::kernel(up, low).is_coarser(&pi).unwrap(), "{pi}");
        }
    }
}

#[test]
fn merging_noncrossing_blocks_keeps_signature_one() {
    for points in (2..=8).step_by(2) {
        for upper in 0..=points {
            for pi in enumerate_partitions(upper, points - upper, true).unwrap() {
                if !pi.is_noncrossing() {
                    continue;
                }
                let blocks = pi.blocks();
                for i in 0..blocks.len() {
                    for j in i + 1..blocks.len() {
                        let merged: Vec<usize> = pi.labels().iter().map(|&b| if b == j { i } else { b }).collect();
                        let coarse = Partition::from_labels(upper, points - upper, &merged).unwrap();
                        assert_eq!(signature(&coarse).unwrap(), 1, "{coarse}");
                    }
                }
            }
        }
    }
}

#[test]
fn signature_rules_agree_on_every_small_even_partition() {
    for points in (2..=8).step_by(2) {
        for upper in 0..=points {
            for pi in enumerate_partitions(upper, points - upper, true).unwrap() {
                assert_eq!(signature(&pi).unwrap(), signature_by_switch_search(&pi).unwrap(), "{pi}");
            }
        }
    }
}

#[test]
fn literal_round_trip_on_all_small_partitions() {
    for points in 1..=6 {
        for upper in 0..=points {
            for pi in enumerate_partitions(upper, points - upper, false).unwrap() {
                assert_eq!(pi.to_string().parse::<Partition>().unwrap(), pi);
            }
        }
    }
}
