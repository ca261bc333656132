mod common;

use proptest::prelude::*;

use pebbling::decomposition::{decompose, merge_small_parts, validate, Budget};
use pebbling::generate::{generate, Draws, Family, InstanceSpec};
use pebbling::graph::{boundary_profile, Dag};
use pebbling::io::{parse_dag, write_dot, write_edge_list, NamedDag};
use pebbling::schedule::verify_full;
use pebbling::schedulers::{ScheduleError, Strategy as Scheduler};

use common::{random_dag, segment_boundary};

fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n, 1usize..=5, any::<u64>(), 0.2f64..0.9)
        .prop_map(|(n, d, seed, density)| random_dag(&mut Draws::new(seed), n, d, density))
}

fn arb_budget() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=12, 1u64..=4)
}

fn strategies() -> Vec<Scheduler> {
    [
        "topo",
        "budget=1",
        "budget=5/2",
        "space=6",
        "bounded",
        "bounded-halflog",
        "general",
        "depth-classic",
        "depth",
        "separator",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Every strategy emits a legal, full schedule within its bounds.
    #[test]
    fn schedules_are_legal_full_and_bounded(g in arb_dag(14)) {
        for s in strategies() {
            let r = match s.run(&g) {
                Ok(r) => r,
                Err(ScheduleError::Precondition(_)) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", s.tag()))),
            };
            prop_assert!(verify_full(&g, &r.schedule).is_legal_and_full(), "{}", s.tag());
            let m = r.evaluate(&g, u64::MAX).unwrap();
            prop_assert!(m.peak <= r.space_bound, "{}: peak {} > {}", s.tag(), m.peak, r.space_bound);
            if let Some(t) = r.move_bound {
                prop_assert!(m.moves as u128 <= t, "{}: {} moves > {t}", s.tag(), m.moves);
            }
        }
    }

    #[test]
    fn boundary_profile_matches_definition(g in arb_dag(40)) {
        let order = g.topological_order();
        let p = boundary_profile(&g, &order).unwrap();
        prop_assert_eq!(p.max_value, segment_boundary(&g, order.as_slice()));
    }

    #[test]
    fn decomposition_invariants(g in arb_dag(60), (p, q) in arb_budget()) {
        let order = g.topological_order();
        let budget = Budget::ratio(p, q);
        let dec = decompose(&g, &order, &budget);
        prop_assert!(validate(&g, &dec).is_ok());
        prop_assert_eq!(dec.order(), order.as_slice().to_vec());
        prop_assert!(dec.parts.iter().all(|part| !part.vertices.is_empty()));
        let sum: usize = dec.parts.iter().map(|part| segment_boundary(&g, &part.vertices)).sum();
        prop_assert!(budget.admits(sum));
    }

    #[test]
    fn merging_never_raises_space_cost(g in arb_dag(60), (p, q) in arb_budget()) {
        let order = g.topological_order();
        let d = g.max_in_degree();
        let dec = decompose(&g, &order, &Budget::ratio(p, q));
        let merged = merge_small_parts(&g, &dec, d);
        prop_assert!(validate(&g, &merged).is_ok());
        prop_assert!(merged.part_count() <= dec.part_count());
        prop_assert!(merged.space_cost(d) <= dec.space_cost(d));
        prop_assert_eq!(merged.order(), dec.order());
    }

    #[test]
    fn text_formats_round_trip(g in arb_dag(30)) {
        let named = NamedDag::with_ids(g);
        prop_assert_eq!(&parse_dag(&write_edge_list(&named)).unwrap(), &named);
        prop_assert_eq!(&parse_dag(&write_dot(&named)).unwrap(), &named);
    }

    #[test]
    fn generation_is_reproducible(layers in 1usize..8, width in 1usize..10, seed in any::<u64>()) {
        let spec = InstanceSpec { family: Family::LayeredRandom { layers, width, d: width.min(3) }, seed };
        let a = generate(&spec).unwrap();
        prop_assert_eq!(&a, &generate(&spec).unwrap());
        prop_assert_eq!(&spec.to_string().parse::<InstanceSpec>().unwrap(), &spec);
        let named = NamedDag::with_ids(a);
        prop_assert_eq!(parse_dag(&write_edge_list(&named)).unwrap(), named);
    }
}

#[test]
fn every_family_round_trips() {
    for s in [
        "chain:n=7",
        "pyramid:height=2",
        "grid:width=3,height=4",
        "binary-in-tree:levels=4",
        "butterfly:stages=3",
        "layered-random:layers=4,width=5,d=2,seed=7",
        "heavy-tail-random:n=200,hubs=0.05,seed=1",
    ] {
        let g = NamedDag::with_ids(generate(&s.parse().unwrap()).unwrap());
        assert_eq!(parse_dag(&write_edge_list(&g)).unwrap(), g, "{s}");
        assert_eq!(parse_dag(&write_dot(&g)).unwrap(), g, "{s}");
    }
}
