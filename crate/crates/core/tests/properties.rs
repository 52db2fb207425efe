use proptest::prelude::*;
use quarklet_core::functional::{tilde_e, update_error, update_tilde_error, LocalErrorModel};
use quarklet_core::index::{children, parents, Alpha, GeneratorAssignment, Rule};
use quarklet_core::l2::{captured_coefficients, tilde_transform};
use quarklet_core::spline::{delta_range, eval_schoenberg};
use quarklet_core::{CoefficientSequence, EnhancedIndex, GrowthRun, L2ErrorModel, ModelParams};

fn alpha() -> impl Strategy<Value = Alpha> {
    prop_oneof![Just(Alpha::Both), Just(Alpha::Dir1), Just(Alpha::Dir2)]
}

fn node() -> impl Strategy<Value = EnhancedIndex> {
    (0u32..5, 0u32..5, alpha()).prop_flat_map(|(j1, j2, a)| {
        (0i64..(1 << j1), 0i64..(1 << j2))
            .prop_map(move |(k1, k2)| EnhancedIndex::node(j1, k1, j2, k2, a))
    })
}

proptest! {
    #[test]
    fn schoenberg_partition_of_unity(m in 2u32..5, j in 2u32..6, x in 0.0f64..=1.0) {
        prop_assume!((1u32 << j) >= m);
        let s: f64 = delta_range(m, j).map(|k| eval_schoenberg(m, j, k, x).unwrap()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12, "sum {s}");
    }

    #[test]
    fn tilde_e_is_harmonic(e in 1e-6f64..1e3, t in 1e-6f64..1e3) {
        let h = tilde_e(e, t);
        prop_assert!((1.0 / h - (1.0 / e + 1.0 / t)).abs() <= 1e-12 * (1.0 / h));
        prop_assert!(h <= e.min(t));
    }

    #[test]
    fn tilde_big_e_below_both(big in 0.0f64..10.0, prev in 0.0f64..10.0, kids in 0.0f64..10.0) {
        prop_assert!(update_tilde_error(big, prev) <= big.min(prev) + 1e-15);
        prop_assert_eq!(update_error(kids, big), kids.min(big));
    }

    #[test]
    fn children_tile_the_parent(lam in node()) {
        for &rule in Rule::for_alpha(lam.alpha) {
            let kids = children(&lam, rule).unwrap();
            let r = lam.rectangle().unwrap();
            for c in &kids {
                prop_assert!(r.contains(&c.rectangle().unwrap()));
                prop_assert!(parents(c).contains(&(lam, rule)) || !quarklet_core::index::is_reachable(&lam));
            }
            let area: f64 = kids
                .iter()
                .filter(|c| c.alpha == Alpha::Both)
                .map(|c| { let [a, b, x, y] = c.rectangle().unwrap().bounds(); (b - a) * (y - x) })
                .sum();
            if !kids.is_empty() {
                let [a, b, x, y] = r.bounds();
                prop_assert!((area - (b - a) * (y - x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn generator_cells_partition(j0 in 1u32..7, m in 2u32..5) {
        let ga = GeneratorAssignment::new(j0, m);
        let mut all: Vec<i64> = (0..(1i64 << j0)).flat_map(|k| ga.cell(k)).collect();
        all.sort_unstable();
        prop_assert_eq!(all, delta_range(m, j0).collect::<Vec<_>>());
    }

    #[test]
    fn grown_trees_satisfy_energy_identity(
        entries in prop::collection::vec((0u32..3, 0u32..4, 0u32..3, 0u32..4, -1.0f64..1.0), 1..15),
        steps in 0usize..20,
    ) {
        let params = ModelParams::new(1, 2, 2.0).unwrap();
        let mut c = CoefficientSequence::new(params);
        for (p1, j1, p2, j2, v) in entries {
            let k = |j: u32| if j == 0 { -1 } else { (1i64 << j) - 1 };
            c.insert(EnhancedIndex::new(p1, j1, k(j1), p2, j2, k(j2), Alpha::Both), v).unwrap();
        }
        let model = L2ErrorModel::new(&c);
        let run = GrowthRun::grow(&model, steps).unwrap();
        let t = run.trim();
        let leaf_sum: f64 = t.tree().leaves().into_iter()
            .map(|l| model.local_error(&t.tree().upsilon_indices(l), t.p_max(l)))
            .sum();
        let diff = c.energy() - captured_coefficients(&c, &tilde_transform(&t, &params));
        prop_assert!((leaf_sum - diff).abs() <= 1e-12 * c.energy().max(1e-300));
        prop_assert!(run.a_history().windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
