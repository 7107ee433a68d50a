use arc_vas::augment::{mirror_grid, permute_grid, rotate90, rotate_grid, ColorPermutation, Rotation};
use arc_vas::data::{parse_item, Grid, Item, Pair};
use arc_vas::eval::{cell_accuracy_rescaled, zero_filtered_accuracy};
use arc_vas::preprocess::{canonicalize, decanonicalize, kronecker_upscale, rescale_prediction, ColorDistributionGrid};
use arc_vas::solver::{combine_average, combine_similarity, RuleVector};
use arc_vas::vae::kl_divergence;
use ndarray::Array2;
use proptest::prelude::*;

fn grid_strategy(max_side: usize) -> impl Strategy<Value = Grid> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(h, w)| prop::collection::vec(0u8..10, h * w).prop_map(move |cells| Grid::new(h, w, cells).unwrap()))
}

fn pair_strategy() -> impl Strategy<Value = Pair> {
    (grid_strategy(30), grid_strategy(30)).prop_map(|(input, output)| Pair { input, output })
}

fn permutation_strategy() -> impl Strategy<Value = ColorPermutation> {
    Just((1u8..=9).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| ColorPermutation::new(v.try_into().unwrap()).unwrap())
}

fn sorted_counts(g: &Grid) -> Vec<usize> {
    let mut h = g.histogram()[1..].to_vec();
    h.sort_unstable();
    h
}

proptest! {
    #[test]
    fn canonical_roundtrip(g in grid_strategy(30)) {
        let c = canonicalize(&g);
        prop_assert_eq!(c.hot_count(), 900);
        prop_assert_eq!(decanonicalize(&c).unwrap(), g);
    }

    #[test]
    fn upscale_scales_histogram(g in grid_strategy(30)) {
        let (up, k) = kronecker_upscale(&g);
        prop_assert!(up.height() <= 30 && up.width() <= 30);
        let expected: Vec<usize> = g.histogram().iter().map(|n| n * k * k).collect();
        prop_assert_eq!(up.histogram().to_vec(), expected);
    }

    #[test]
    fn rescaling_a_one_hot_canvas_returns_the_grid(g in grid_strategy(30)) {
        let dist = ColorDistributionGrid::new(canonicalize(&g).tensor).unwrap();
        prop_assert_eq!(rescale_prediction(&dist, g.height(), g.width()).unwrap(), g);
    }

    #[test]
    fn geometric_group_laws(g in grid_strategy(30)) {
        prop_assert_eq!(mirror_grid(&mirror_grid(&g)), g.clone());
        prop_assert_eq!(rotate90(&rotate90(&rotate90(&rotate90(&g)))), g.clone());
        let half = rotate_grid(&g, Rotation::Half);
        prop_assert_eq!(rotate_grid(&half, Rotation::Half), g.clone());
        for r in [Rotation::Quarter, Rotation::Half, Rotation::ThreeQuarter] {
            prop_assert_eq!(rotate_grid(&g, r).histogram(), g.histogram());
        }
        prop_assert_eq!(mirror_grid(&g).histogram(), g.histogram());
    }

    #[test]
    fn color_swaps_are_involutions(g in grid_strategy(30), a in 1u8..10, b in 1u8..10) {
        let swap = ColorPermutation::swap(a, b).unwrap();
        prop_assert_eq!(permute_grid(&permute_grid(&g, &swap), &swap), g);
    }

    #[test]
    fn permutations_relabel_counts(g in grid_strategy(30), perm in permutation_strategy()) {
        let p = permute_grid(&g, &perm);
        prop_assert_eq!(p.histogram()[0], g.histogram()[0]);
        prop_assert_eq!(sorted_counts(&p), sorted_counts(&g));
        for (a, b) in g.cells().iter().zip(p.cells()) {
            prop_assert_eq!(*b, perm.apply(*a));
        }
    }

    #[test]
    fn item_json_roundtrip(train in prop::collection::vec(pair_strategy(), 2..5), test in prop::collection::vec(pair_strategy(), 1..3)) {
        let item = Item { id: "x".into(), train, test };
        let again = parse_item(item.to_json().as_bytes(), "x").unwrap();
        prop_assert_eq!(again, item);
    }

    #[test]
    fn average_is_permutation_invariant(vs in prop::collection::vec(prop::collection::vec(-10i32..10, 6), 1..8), seed in any::<u64>()) {
        let rvs: Vec<RuleVector> = vs.iter().map(|v| RuleVector { v: v.iter().map(|&x| x as f32).collect(), source_example_index: None }).collect();
        let mut shuffled = rvs.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(combine_average(&rvs).unwrap().v, combine_average(&shuffled).unwrap().v);
    }

    #[test]
    fn similarity_ignores_example_order(points in prop::collection::vec(prop::collection::vec(-50i32..50, 3), 1..6), test in prop::collection::vec(-50i32..50, 3)) {
        let emb: Vec<Vec<f32>> = points.iter().map(|p| p.iter().map(|&x| x as f32).collect()).collect();
        let t: Vec<f32> = test.iter().map(|&x| x as f32).collect();
        let rvs: Vec<RuleVector> = (0..emb.len()).map(|i| RuleVector { v: vec![i as f32], source_example_index: None }).collect();
        let forward = combine_similarity(&rvs, &emb, &t).unwrap();
        let rev_emb: Vec<Vec<f32>> = emb.iter().rev().cloned().collect();
        let rev_rvs: Vec<RuleVector> = rvs.iter().rev().cloned().collect();
        let backward = combine_similarity(&rev_rvs, &rev_emb, &t).unwrap();
        let d = |e: &[f32]| arc_vas::solver::euclidean(e, &t);
        // same rule unless the minimum distance is shared, where the lowest index wins
        let dmin = emb.iter().map(|e| d(e)).fold(f64::INFINITY, f64::min);
        let tied = emb.iter().filter(|e| d(e) == dmin).count();
        if tied == 1 {
            prop_assert_eq!(forward.v, backward.v);
        } else {
            let first_tied = emb.iter().position(|e| d(e) == dmin).unwrap();
            prop_assert_eq!(forward.source_example_index, Some(first_tied));
        }
    }

    #[test]
    fn kl_is_non_negative(mu in prop::collection::vec(-5.0f64..5.0, 8), lv in prop::collection::vec(-10.0f64..10.0, 8)) {
        let m = Array2::from_shape_vec((4, 2), mu).unwrap();
        let l = Array2::from_shape_vec((4, 2), lv).unwrap();
        prop_assert!(kl_divergence(m.view(), l.view()) >= 0.0);
    }

    #[test]
    fn accuracies_are_fractions(a in grid_strategy(6), seed in any::<u64>()) {
        let cells: Vec<u8> = a.cells().iter().enumerate().map(|(i, &c)| if (seed >> (i % 64)) & 1 == 1 { c } else { (c + 1) % 10 }).collect();
        let b = Grid::new(a.height(), a.width(), cells).unwrap();
        let acc = cell_accuracy_rescaled(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert_eq!(cell_accuracy_rescaled(&a, &b).unwrap(), acc);
        if let Some(z) = zero_filtered_accuracy(&b, &a, false).unwrap() {
            prop_assert!((0.0..=1.0).contains(&z));
        }
    }
}
