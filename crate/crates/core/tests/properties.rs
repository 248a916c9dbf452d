//! Randomized checks of the invariants each module promises.

use proptest::prelude::*;
use simdist::compress::{code_length, concat, Backend, Compressor, Tolerance};
use simdist::io::{parse_model, write_model};
use simdist::learn::{train_fixed, Example, KKT_TOLERANCE};
use simdist::ncd::{distance_matrix, ncd, DataObject, NcdOptions};
use simdist::ngd::ngd_from_counts;
use simdist::quartet::{consistent_topology, mutate, search, FatTail, SearchConfig, TernaryTree};
use simdist::synth::{gaussian_blobs, markov_text, random_matrix, rng};

fn backends() -> Vec<Backend> {
    let mut v = vec![Backend::identity(), Backend::deflate(), Backend::block_sorting()];
    if let Ok(b) = Backend::from_name("ppm", None) {
        v.push(b);
    }
    v
}

/// Random bytes mixed with compressible text.
fn sample() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        proptest::collection::vec(any::<u8>(), 0..1500),
        (1usize..3000, any::<u64>()).prop_map(|(n, s)| markov_text(n, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn codecs_round_trip_and_are_deterministic(x in sample()) {
        for b in backends() {
            let enc = b.compress(&x).unwrap();
            prop_assert_eq!(&b.decompress(&enc).unwrap(), &x);
            prop_assert_eq!(&b.compress(&x).unwrap(), &enc);
            prop_assert_eq!(code_length(&b, &x).unwrap(), 8 * enc.len() as u64);
        }
    }

    #[test]
    fn monotone_and_subadditive_within_tolerance(x in sample(), y in sample()) {
        let tau = Tolerance::default();
        for b in [Backend::deflate(), Backend::block_sorting()] {
            let xy = concat(&x, &y);
            let t = tau.bits(xy.len());
            let (cx, cy, cxy) = (
                code_length(&b, &x).unwrap() as f64,
                code_length(&b, &y).unwrap() as f64,
                code_length(&b, &xy).unwrap() as f64,
            );
            prop_assert!(cxy + t >= cx, "{}: C(xy)={cxy} C(x)={cx}", b.name());
            prop_assert!(cxy <= cx + cy + t, "{}: C(xy)={cxy} C(x)+C(y)={}", b.name(), cx + cy);
        }
    }

    #[test]
    fn matrix_entries_equal_fresh_ncd(seeds in proptest::collection::vec(any::<u64>(), 2..6)) {
        let objects: Vec<DataObject> = seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| DataObject::new(format!("o{i}"), markov_text(400 + (s % 800) as usize, s)))
            .collect();
        let b = Backend::block_sorting();
        let m = distance_matrix(b.clone(), &objects, NcdOptions::default()).unwrap().matrix;
        for i in 0..objects.len() {
            for j in i..objects.len() {
                let fresh = ncd(&b, &objects[i], &objects[j]).unwrap();
                prop_assert_eq!(m.get(i, j).to_bits(), fresh.to_bits());
                prop_assert_eq!(m.get(j, i).to_bits(), fresh.to_bits());
            }
        }
    }

    #[test]
    fn exactly_one_pairing_is_consistent(n in 4usize..8, seed in any::<u64>()) {
        let tree = TernaryTree::random(n, &mut rng(seed)).unwrap();
        let d = tree.leaf_distances();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        // path-length sums: the consistent pairing is the unique strict minimum
                        let sums = [
                            d[a * n + b] + d[c * n + e],
                            d[a * n + c] + d[b * n + e],
                            d[a * n + e] + d[b * n + c],
                        ];
                        let min = *sums.iter().min().unwrap();
                        prop_assert_eq!(sums.iter().filter(|&&s| s == min).count(), 1);
                        let t = consistent_topology(&tree, [a, b, c, e]).unwrap();
                        let ([p, q], [r, s]) = t.pairs();
                        prop_assert_eq!(d[p * n + q] + d[r * n + s], min);
                    }
                }
            }
        }
    }

    #[test]
    fn mutations_keep_trees_valid(n in 4usize..30, seed in any::<u64>()) {
        let mut r = rng(seed);
        let tail = FatTail::for_leaves(n, 2.0).unwrap();
        let mut tree = TernaryTree::random(n, &mut r).unwrap();
        for _ in 0..20 {
            let (next, k) = mutate(&tree, &mut r, &tail);
            prop_assert!((1..=tail.k_max()).contains(&k));
            prop_assert!(next.validate().is_ok());
            prop_assert_eq!(next.leaf_count(), n);
            prop_assert_eq!(next.node_count(), 2 * n - 2);
            tree = next;
        }
    }

    #[test]
    fn search_traces_are_monotone_and_reproducible(n in 5usize..14, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let config = SearchConfig { seed, runs: 1, max_steps: 400, agreement: false, ..SearchConfig::default() };
        let a = search(&m, &config).unwrap();
        prop_assert!(a.trace.windows(2).all(|w| w[1].cost <= w[0].cost && w[1].s_t >= w[0].s_t));
        prop_assert!((0.0..=1.0).contains(&a.s_t));
        let b = search(&m, &config).unwrap();
        prop_assert_eq!(a.trace, b.trace);
        prop_assert!(a.tree.same_topology(&b.tree));
    }

    #[test]
    fn ngd_is_nonnegative_and_zero_on_itself(fx in 1u64..1_000_000, fy in 1u64..1_000_000, frac in 0.0f64..=1.0, extra in 0u64..1_000_000) {
        let fxy = (fx.min(fy) as f64 * frac).floor();
        let n = (fx.max(fy) + extra) as f64;
        let v = ngd_from_counts(fx as f64, fy as f64, fxy, n).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert_eq!(ngd_from_counts(fx as f64, fx as f64, fx as f64, n).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn svm_dual_is_feasible_and_margins_hold(seed in any::<u64>(), sep in 0.5f64..4.0, log_gamma in -4i32..=4, log_cost in -2i32..=6) {
        let examples: Vec<Example> = gaussian_blobs(15, 3, sep, seed)
            .into_iter()
            .map(|(l, v)| Example::new(l, v))
            .collect();
        let (gamma, cost) = (2f64.powi(log_gamma), 2f64.powi(log_cost));
        let model = train_fixed(&examples, gamma, cost, None).unwrap();
        let sum: f64 = model.coefficients.iter().sum();
        prop_assert!(sum.abs() <= 1e-6, "sum of alpha_i y_i = {sum}");
        for (sv, &c) in model.support_vectors.iter().zip(&model.coefficients) {
            prop_assert!(c.abs() <= cost * (1.0 + 1e-12));
            if c.abs() > 1e-9 && c.abs() < cost * (1.0 - 1e-9) {
                let y = c.signum();
                let margin = y * model.decision_value(sv).unwrap();
                prop_assert!((margin - 1.0).abs() <= KKT_TOLERANCE + 1e-9, "margin {margin}");
            }
        }
        let text = write_model(&model).unwrap();
        prop_assert_eq!(parse_model(&text, "model").unwrap(), model);
    }
}
