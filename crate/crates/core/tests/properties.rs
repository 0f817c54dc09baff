use proptest::prelude::*;

use stegcost_core::cost::{cost_from_sensitivity, five_point_second_difference, dry_cost_map};
use stegcost_core::embed::{probs, ternary_entropy};
use stegcost_core::features::{extract_features, DEFAULT_THRESHOLD};
use stegcost_core::*;

fn image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (5..=max_side, 5..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

fn sensitivity(max_side: usize) -> impl Strategy<Value = SensitivityMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(-5.0..5.0f64, w * h).prop_map(move |v| SensitivityMap::new(w, h, v).unwrap())
    })
}

fn cost_map() -> impl Strategy<Value = CostMap> {
    (1usize..=12, 1usize..=12).prop_flat_map(|(w, h)| {
        prop::collection::vec((1e-3..50.0f64, prop::bool::weighted(0.1)), w * h).prop_map(move |cells| {
            let wet: Vec<bool> = cells.iter().map(|c| c.1).collect();
            let costs = cells.iter().map(|c| if c.1 { WET } else { c.0 }).collect();
            CostMap::new(w, h, costs, wet).unwrap()
        })
    })
}

fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Gibbs), Just(Rule::Capped)]
}

proptest! {
    #[test]
    fn stencil_is_exact_on_quadratics(a in -50i32..50, b in -500i32..500, c in -1000i32..1000, x in -100i32..100) {
        let f = |t: i32| (a * t * t + b * t + c) as f64;
        let d2 = five_point_second_difference(f(x - 2), f(x - 1), f(x), f(x + 1), f(x + 2));
        prop_assert!((d2 - 2.0 * a as f64).abs() <= 1e-9);
    }

    #[test]
    fn stencil_of_a_constant_is_exactly_zero(v in -1e6..1e6f64) {
        prop_assert_eq!(five_point_second_difference(v, v, v, v, v), 0.0);
    }

    #[test]
    fn clamp_then_scale_lands_in_unit_interval(map in sensitivity(10)) {
        let clamped = clamp_negative(&map);
        prop_assert!(clamped.values().iter().all(|&v| v >= 0.0));
        let scaled = scale_linear(&clamped);
        prop_assert!(scaled.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn scaling_preserves_order(map in sensitivity(8)) {
        let scaled = scale_linear(&map);
        let (v, s) = (map.values(), scaled.values());
        for i in 0..v.len() {
            for j in 0..v.len() {
                if v[i] <= v[j] {
                    prop_assert!(s[i] <= s[j]);
                }
            }
        }
    }

    #[test]
    fn average_filter_is_monotone(map in sensitivity(10), bumps in prop::collection::vec(0.0..3.0f64, 100), k in prop::sample::select(vec![1usize, 3, 5, 7, 13])) {
        let raised: Vec<f64> = map.values().iter().zip(bumps.iter().cycle()).map(|(v, b)| v + b).collect();
        let upper = SensitivityMap::new(map.width(), map.height(), raised).unwrap();
        let lo = average_filter(&map, k).unwrap();
        let hi = average_filter(&upper, k).unwrap();
        for (a, b) in lo.values().iter().zip(hi.values()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn average_filter_stays_within_input_range(map in sensitivity(10), k in prop::sample::select(vec![3usize, 5, 9])) {
        let min = map.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = map.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for &v in average_filter(&map, k).unwrap().values() {
            prop_assert!(v >= min - 1e-12 && v <= max + 1e-12);
        }
    }

    #[test]
    fn costs_are_floored_and_saturated_pixels_are_wet(img in image(12), k in prop::sample::select(vec![1usize, 3, 13])) {
        let raw = SensitivityMap::new(img.width(), img.height(), img.pixels().iter().map(|&p| (p as f64 - 100.0) / 7.0).collect()).unwrap();
        let rho = cost_from_sensitivity(&raw, &img, k).unwrap();
        for (idx, &p) in img.pixels().iter().enumerate() {
            let c = rho.costs()[idx];
            if p == 0 || p == 255 {
                prop_assert!(rho.wet()[idx]);
                prop_assert_eq!(c, WET);
            } else {
                prop_assert!(!rho.wet()[idx]);
                prop_assert!((EPS..=1.0).contains(&c));
            }
        }
    }

    #[test]
    fn hill_costs_are_positive_and_finite(img in image(12)) {
        let rho = hill_cost(&img);
        prop_assert!(rho.costs().iter().all(|c| c.is_finite() && *c >= EPS));
    }

    #[test]
    fn change_probabilities_are_bounded_and_wet_is_frozen(rho in cost_map(), lambda in 0.0..20.0f64, rule in rule()) {
        let p = probs(rule, &rho, lambda).unwrap();
        for (idx, &q) in p.p_change().iter().enumerate() {
            prop_assert!((0.0..=1.0 / 3.0).contains(&q));
            if rho.wet()[idx] {
                prop_assert_eq!(q, 0.0);
            }
        }
    }

    #[test]
    fn entropy_does_not_increase_with_lambda(rho in cost_map(), l1 in 0.0..10.0f64, dl in 0.0..10.0f64, rule in rule()) {
        let h1 = pattern_entropy(&probs(rule, &rho, l1).unwrap());
        let h2 = pattern_entropy(&probs(rule, &rho, l1 + dl).unwrap());
        prop_assert!(h2 <= h1 + 1e-9 * h1.max(1.0));
    }

    #[test]
    fn ternary_entropy_is_bounded(q in 0.0..=1.0 / 3.0f64) {
        let h = ternary_entropy(q);
        prop_assert!((0.0..=1.584_962_500_721_157).contains(&h));
    }

    #[test]
    fn solver_meets_the_payload(rho in cost_map(), frac in 0.01..0.99f64, rule in rule()) {
        let dry = rho.dry_count();
        prop_assume!(dry > 0);
        let m = frac * dry as f64 * embed::LOG2_3;
        let payload = PayloadSpec::from_bits(m).unwrap();
        let sol = solve_lambda(&rho, payload, rule).unwrap();
        let h = pattern_entropy(&probs(rule, &rho, sol.lambda).unwrap());
        prop_assert!((h - m).abs() <= payload.tolerance(), "h={h} m={m}");
    }

    #[test]
    fn sampled_patterns_respect_probabilities(rho in cost_map(), lambda in 0.0..5.0f64, seed in any::<u64>()) {
        let p = gibbs_probs(&rho, lambda).unwrap();
        let s = sample_pattern(&p, seed);
        prop_assert_eq!(&s, &sample_pattern(&p, seed));
        for (idx, &d) in s.changes().iter().enumerate() {
            prop_assert!((-1..=1).contains(&d));
            if p.p_change()[idx] == 0.0 {
                prop_assert_eq!(d, 0);
            }
        }
    }

    #[test]
    fn applying_a_pattern_costs_its_changed_pixels(img in image(10), seed in any::<u64>()) {
        let mut rng = rng::SplitMix64::new(seed);
        let changes: Vec<i8> = img.pixels().iter().map(|&p| {
            let d = rng.below(3) as i8 - 1;
            if (p == 0 && d < 0) || (p == 255 && d > 0) { 0 } else { d }
        }).collect();
        let pattern = EmbeddingPattern::new(img.width(), img.height(), changes.clone()).unwrap();
        let stego = apply_pattern(&img, &pattern).unwrap();
        let rho = dry_cost_map(img.width(), img.height(), (0..img.len()).map(|i| 1.0 + i as f64).collect()).unwrap();
        let expected: f64 = changes.iter().enumerate().filter(|(_, &d)| d != 0).map(|(i, _)| 1.0 + i as f64).sum();
        prop_assert_eq!(additive_distortion(&img, &stego, &rho).unwrap(), expected);
        prop_assert_eq!(apply_pattern(&img, &EmbeddingPattern::zeros(img.width(), img.height())).unwrap(), img);
    }

    #[test]
    fn residual_features_are_two_distributions(img in image(12)) {
        let f = extract_features(&img, DEFAULT_THRESHOLD);
        let half = f.len() / 2;
        let a: f64 = f[..half].iter().sum();
        let b: f64 = f[half..].iter().sum();
        prop_assert!((a - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12);
        prop_assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn texture_specs_round_trip_through_text(k in 0usize..40, level in any::<u8>(), pick in 0u8..4) {
        let spec = match pick {
            0 => TextureSpec::Flat(level),
            1 => TextureSpec::Gradient,
            2 => TextureSpec::SmoothedNoise { kernel: 2 * k + 1 },
            _ => TextureSpec::TwoRegion,
        };
        prop_assert_eq!(spec.to_string().parse::<TextureSpec>().unwrap(), spec);
    }
}
