use proptest::prelude::*;
use qosrec::data::{split_by_density, train_cell_count};
use qosrec::eval::{dcg_k, ideal_list, ndcg_from_rels, ndcg_k, rank_with, relevance_transform};
use qosrec::experiment::{mean_ndcg, RankingSetup};
use qosrec::similarity::{krcc_similarity, top_k_neighbors};
use qosrec::{krcc_matrix, parse_wsdream_str, KrccVariant, QosAttribute, QosMatrix, RelevanceKind};

/// Matrix strategy: `m x n` with values on a coarse grid (so ties occur) and
/// roughly a third of the cells missing.
fn matrix(max_m: usize, max_n: usize) -> impl Strategy<Value = QosMatrix> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::option::weighted(0.7, 1u32..=12), m * n).prop_map(
            move |cells| {
                let rows: Vec<Vec<f64>> = cells
                    .chunks(n)
                    .map(|r| {
                        r.iter()
                            .map(|c| c.map_or(-1.0, |v| v as f64 * 0.25))
                            .collect()
                    })
                    .collect();
                QosMatrix::from_rows(&rows).unwrap()
            },
        )
    })
}

/// Pair enumeration straight from the definition: over unordered pairs of
/// common users, count those whose within-user differences have opposite signs.
fn krcc_oracle(q: &QosMatrix, i: usize, j: usize) -> Option<f64> {
    let common: Vec<usize> = (0..q.users())
        .filter(|&u| q.is_observed(u, i) && q.is_observed(u, j))
        .collect();
    let c = common.len();
    if c < 2 {
        return None;
    }
    let mut discordant = 0u64;
    for a in 0..c {
        for b in (a + 1)..c {
            let (u, v) = (common[a], common[b]);
            let du = q.value(u, i) - q.value(u, j);
            let dv = q.value(v, i) - q.value(v, j);
            if du * dv < 0.0 {
                discordant += 1;
            }
        }
    }
    Some(1.0 - 4.0 * discordant as f64 / (c * (c - 1)) as f64)
}

fn dcg_oracle(rels: &[f64], k: usize) -> f64 {
    rels.iter()
        .take(k)
        .enumerate()
        .map(|(i, r)| {
            if i == 0 {
                *r
            } else {
                r / ((i + 1) as f64).log2()
            }
        })
        .sum()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn krcc_matches_pair_enumeration(q in matrix(8, 8)) {
        let sim = krcc_matrix(&q, KrccVariant::WithinUser);
        for i in 0..q.services() {
            for j in 0..q.services() {
                if i == j {
                    continue;
                }
                let expected = krcc_oracle(&q, i, j);
                prop_assert_eq!(krcc_similarity(&q, i, j), expected);
                prop_assert_eq!(sim.get(i, j), expected);
            }
        }
    }

    #[test]
    fn krcc_is_symmetric_and_bounded(q in matrix(8, 8)) {
        for i in 0..q.services() {
            for j in 0..q.services() {
                let a = krcc_similarity(&q, i, j);
                prop_assert_eq!(a, krcc_similarity(&q, j, i));
                if let Some(v) = a {
                    prop_assert!((-1.0..=1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn krcc_ignores_monotone_row_transforms(q in matrix(8, 8), u in 0usize..8, scale in 0.1f64..10.0) {
        let u = u % q.users();
        let mut t = q.clone();
        for s in 0..q.services() {
            if let Some(v) = q.get(u, s) {
                t.set(u, s, (v * scale).powi(3) + 1.0).unwrap();
            }
        }
        for i in 0..q.services() {
            for j in 0..q.services() {
                prop_assert_eq!(krcc_similarity(&q, i, j), krcc_similarity(&t, i, j));
            }
        }
    }

    #[test]
    fn top_k_invariants(q in matrix(8, 8), k in 1usize..6, u in 0usize..8) {
        let sim = krcc_matrix(&q, KrccVariant::WithinUser);
        let u = u % q.users();
        for i in 0..q.services() {
            for rated_by in [None, Some(u)] {
                let set = top_k_neighbors(&sim, i, k, rated_by, &q);
                prop_assert!(set.len() <= k);
                prop_assert!(set.neighbors.iter().all(|&(j, w)| j != i && w > 0.0));
                prop_assert!(set.neighbors.windows(2).all(|p| p[0].1 > p[1].1
                    || (p[0].1 == p[1].1 && p[0].0 < p[1].0)));
                if let Some(u) = rated_by {
                    prop_assert!(set.neighbors.iter().all(|&(j, _)| q.is_observed(u, j)));
                }
                // anything left out is no better than the weakest kept neighbor
                let min_kept = set.neighbors.last().map(|&(_, w)| w);
                for j in 0..q.services() {
                    let eligible = j != i
                        && rated_by.is_none_or(|u| q.is_observed(u, j))
                        && sim.get(i, j).is_some_and(|w| w > 0.0);
                    if eligible && !set.neighbors.iter().any(|&(t, _)| t == j) {
                        prop_assert_eq!(set.len(), k);
                        prop_assert!(sim.get(i, j).unwrap() <= min_kept.unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn split_partitions_observed_cells(q in matrix(10, 10), density in 0.05f64..=1.0, seed: u64) {
        let split = split_by_density(&q, density, seed).unwrap();
        prop_assert_eq!(split.train.observed_count(), train_cell_count(q.observed_count(), density));
        for u in 0..q.users() {
            for s in 0..q.services() {
                let (tr, te) = (split.train.is_observed(u, s), split.test.is_observed(u, s));
                prop_assert!(!(tr && te));
                prop_assert_eq!(tr || te, q.is_observed(u, s));
                if tr {
                    prop_assert_eq!(split.train.get(u, s), q.get(u, s));
                }
                if te {
                    prop_assert_eq!(split.test.get(u, s), q.get(u, s));
                }
            }
        }
        let again = split_by_density(&q, density, seed).unwrap();
        prop_assert_eq!(again.train, split.train);
    }

    #[test]
    fn wsdream_roundtrip(q in matrix(6, 9)) {
        let text = q.to_wsdream_string();
        let parsed = parse_wsdream_str(&text).unwrap();
        prop_assert_eq!(&parsed, &q);
        prop_assert_eq!(parsed.to_wsdream_string(), text);
    }

    #[test]
    fn wsdream_text_is_stable_for_arbitrary_values(
        values in prop::collection::vec(1e-4f64..50.0, 12)
    ) {
        let rows: Vec<Vec<f64>> = values.chunks(4).map(|r| r.to_vec()).collect();
        let first = QosMatrix::from_rows(&rows).unwrap().to_wsdream_string();
        let second = parse_wsdream_str(&first).unwrap().to_wsdream_string();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn ndcg_matches_permutation_brute_force(
        truth in prop::collection::vec(0.01f64..5.0, 1..=6),
        pred_seed in prop::collection::vec(0.01f64..5.0, 6),
        k in 1usize..=6,
    ) {
        let c = truth.len();
        let k = k.min(c);
        let mut test = QosMatrix::unobserved(1, c).unwrap();
        for (s, &v) in truth.iter().enumerate() {
            test.set(0, s, v).unwrap();
        }
        let pred = &pred_seed[..c];
        let candidates: Vec<usize> = (0..c).collect();
        let ranked = rank_with(|_, s| pred[s], &candidates, 0, k, QosAttribute::SmallerIsBetter);
        let ideal = ideal_list(&test, 0, QosAttribute::SmallerIsBetter);
        let got = ndcg_k(&ranked, &ideal, k, QosAttribute::SmallerIsBetter).unwrap();

        // gains by the linear smaller-is-better map, ideal DCG by exhaustive search
        let max = truth.iter().copied().fold(f64::MIN, f64::max);
        let min = truth.iter().copied().fold(f64::MAX, f64::min);
        let gain = |s: usize| if max == min { 1.0 } else { (max - truth[s]) / (max - min) };
        let ranked_gains: Vec<f64> = ranked.services().iter().map(|&s| gain(s)).collect();
        let dcg = dcg_oracle(&ranked_gains, k);
        let idcg = permutations(&candidates)
            .iter()
            .map(|p| dcg_oracle(&p.iter().map(|&s| gain(s)).collect::<Vec<_>>(), k))
            .fold(f64::MIN, f64::max);
        let expected = if idcg == 0.0 { 1.0 } else { dcg / idcg };
        prop_assert!((got - expected).abs() <= 1e-12, "{} vs {}", got, expected);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&got));
    }

    #[test]
    fn ndcg_is_scale_invariant(
        truth in prop::collection::vec(0.01f64..5.0, 2..=8),
        pred in prop::collection::vec(0.01f64..5.0, 8),
        scale in 0.01f64..100.0,
    ) {
        let c = truth.len();
        let a = relevance_transform(&truth, QosAttribute::SmallerIsBetter).unwrap();
        let scaled: Vec<f64> = truth.iter().map(|v| v * scale).collect();
        let b = relevance_transform(&scaled, QosAttribute::SmallerIsBetter).unwrap();
        let mut order: Vec<usize> = (0..c).collect();
        order.sort_by(|&x, &y| pred[x].partial_cmp(&pred[y]).unwrap().then(x.cmp(&y)));
        let mut ideal: Vec<usize> = (0..c).collect();
        ideal.sort_by(|&x, &y| truth[x].partial_cmp(&truth[y]).unwrap().then(x.cmp(&y)));
        let pick = |g: &[f64], idx: &[usize]| idx.iter().map(|&i| g[i]).collect::<Vec<_>>();
        let na = ndcg_from_rels(&pick(&a, &order), &pick(&a, &ideal), c).unwrap();
        let nb = ndcg_from_rels(&pick(&b, &order), &pick(&b, &ideal), c).unwrap();
        prop_assert!((na - nb).abs() <= 1e-12);
    }

    #[test]
    fn swapping_the_first_two_positions_keeps_dcg(
        rels in prop::collection::vec(0.0f64..1.0, 2..=10),
        k in 2usize..=10,
    ) {
        let mut swapped = rels.clone();
        swapped.swap(0, 1);
        let (a, b) = (dcg_k(&rels, k).unwrap(), dcg_k(&swapped, k).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn ndcg_ignores_increasing_rescale_of_predictions(
        test in matrix(6, 10),
        pred in prop::collection::vec(0u32..40, 60),
        k in 1usize..=4,
    ) {
        // integer-grid predictions keep 2x + 1 exact, so no ties appear or vanish
        let n = test.services();
        let f = |u: usize, s: usize| pred[(u * n + s) % pred.len()] as f64 * 0.125;
        let setup = RankingSetup {
            direction: QosAttribute::SmallerIsBetter,
            relevance: RelevanceKind::default(),
            global_max: None,
        };
        let a = mean_ndcg(f, &test, k, setup);
        let b = mean_ndcg(|u, s| 2.0 * f(u, s) + 1.0, &test, k, setup);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}
