use proptest::prelude::*;
use skyway_core::bench::{sig9, summarize_metrics, Algorithm, TrialRecord};
use skyway_core::geometry::classify_cells;
use skyway_core::reactive::{Stage, DEFAULT_CELL_SIZE_FRAC};
use skyway_core::service::{compose_initial, handle_failure, CustomerDeliveryRequest, FailureEvent, FailureType, RecomposeParams};
use skyway_core::reactive::Strategy as Recompose;
use skyway_core::{
    cell_density_recompose, dijkstra, generate_network, radius_recompose, two_phased_recompose, FailedEdgeView, GenParams,
    NetworkView, NodeIx, NodeSet, RecompositionResult, SkywayError, SkywayNetwork, TwoPhaseOptions,
};

fn small_net() -> impl Strategy<Value = SkywayNetwork> {
    (20usize..150, 3usize..10, 0.08f64..0.3, any::<u64>()).prop_filter_map("generator produced no edges", |(n, k, frac, seed)| {
        generate_network(&GenParams {
            num_nodes: n,
            max_connectivity: k,
            network_size: 1000.0,
            neighbor_radius_frac: frac,
            seed,
        })
        .ok()
    })
}

fn failure_case() -> impl Strategy<Value = (SkywayNetwork, usize)> {
    small_net().prop_flat_map(|net| {
        let m = net.edge_count();
        (Just(net), 0..m)
    })
}

fn strategies(view: &FailedEdgeView<'_>, a: NodeIx, b: NodeIx) -> Vec<RecompositionResult> {
    let cell = DEFAULT_CELL_SIZE_FRAC * view.network().network_size();
    vec![
        radius_recompose(view, a, b).unwrap(),
        cell_density_recompose(view, a, b, cell).unwrap(),
        two_phased_recompose(view, a, b, TwoPhaseOptions::default()).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_networks_are_symmetric_and_bounded(net in small_net()) {
        let radius = 1000.0 * 0.3;
        for ix in 0..net.node_count() {
            for (w, e) in net.neighbors(ix) {
                prop_assert!(net.neighbors(w).any(|(x, _)| x == ix));
                prop_assert!(e.length <= radius + 1e-9);
                prop_assert!((e.length - net.point(ix).dist(net.point(w))).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn local_results_bound_global((net, k) in failure_case()) {
        let e = net.edges()[k];
        let (a, b) = (e.u, e.v);
        let view = net.with_failed_edge(a, b).unwrap();
        let global = dijkstra(&view, a, b, None).unwrap().map(|(p, _)| p);
        for r in strategies(&view, a, b) {
            prop_assert_eq!(r.path.is_some(), global.is_some());
            if let (Some(p), Some(g)) = (&r.path, &global) {
                prop_assert!(p.total_length >= g.total_length * (1.0 - 1e-9));
                prop_assert!(!p.uses_edge(a, b));
                if r.fell_back_to_global {
                    prop_assert!((p.total_length - g.total_length).abs() <= 1e-9 * g.total_length);
                }
            }
            let counts = r.allowed_node_counts();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{:?}: {:?}", r.strategy, counts);
            prop_assert_eq!(r.iteration_count(), r.regions().count());
        }
    }

    #[test]
    fn recomposition_is_deterministic((net, k) in failure_case()) {
        let e = net.edges()[k];
        let view = net.with_failed_edge(e.u, e.v).unwrap();
        let mut first = strategies(&view, e.u, e.v);
        let mut second = strategies(&view, e.u, e.v);
        for r in first.iter_mut().chain(second.iter_mut()) {
            r.zero_timings();
        }
        prop_assert_eq!(first, second);
    }

    #[test]
    fn restriction_is_monotone((net, k) in failure_case(), keep in proptest::collection::vec(any::<bool>(), 150)) {
        let e = net.edges()[k];
        let view = net.with_failed_edge(e.u, e.v).unwrap();
        let n = net.node_count();
        let small: Vec<NodeIx> = (0..n).filter(|&i| i == e.u || i == e.v || keep[i % keep.len()]).collect();
        let small = NodeSet::from_members(n, small);
        let large = NodeSet::from_members(n, (0..n).filter(|&i| small.contains(i) || i % 2 == 0));
        prop_assert!(small.is_subset(&large));
        let s = dijkstra(&view, e.u, e.v, Some(&small)).unwrap();
        let l = dijkstra(&view, e.u, e.v, Some(&large)).unwrap();
        if let Some((ps, _)) = &s {
            let (pl, _) = l.as_ref().expect("a larger set keeps every path");
            prop_assert!(ps.total_length >= pl.total_length * (1.0 - 1e-12));
            prop_assert!(ps.nodes.iter().all(|&x| small.contains(x)));
        }
    }

    #[test]
    fn splice_preserves_length_identity(net in small_net(), src in any::<prop::sample::Index>(), dst in any::<prop::sample::Index>(), hop in any::<prop::sample::Index>(), which in 0usize..4) {
        let n = net.node_count();
        let (s, d) = (src.index(n), dst.index(n));
        prop_assume!(s != d);
        let req = CustomerDeliveryRequest { source: s, destination: d, start_time: 0.0, package_weight: 1.0 };
        let plan = compose_initial(&net, req, 1.0).unwrap();
        let seg = &plan.services[hop.index(plan.services.len())];
        let failure = FailureEvent {
            failure_type: FailureType::Infrastructure,
            failed_service: seg.service_id,
            location: net.point(seg.start_location),
            timestamp: seg.start_time,
            failed_edge: (seg.start_location, seg.end_location),
        };
        let strategy = [Recompose::Radius, Recompose::CellDensity, Recompose::TwoPhased, Recompose::Global][which];
        match handle_failure(&net, &plan, &failure, strategy, &RecomposeParams::default()) {
            Ok((new_plan, result)) => {
                new_plan.validate().unwrap();
                let summed: f64 = new_plan.services.iter().map(|s| s.length()).sum();
                prop_assert!((summed - new_plan.total_length).abs() <= 1e-9 * summed);
                if strategy != Recompose::Global {
                    let sub = result.path.unwrap().total_length;
                    let expect = plan.total_length - seg.length() + sub;
                    prop_assert!((new_plan.total_length - expect).abs() <= 1e-9 * expect);
                }
                let (u, v) = failure.failed_edge;
                prop_assert!(new_plan.services.iter().all(|s| !s.connects(u, v)));
            }
            Err(SkywayError::Unreachable { .. }) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }

    #[test]
    fn thirds_cover_every_cell(counts in proptest::collection::vec(0usize..40, 1..60)) {
        let (co, classes) = classify_cells(&counts);
        let max = *counts.iter().max().unwrap();
        let min = *counts.iter().min().unwrap();
        prop_assert_eq!(co, max - min);
        prop_assert_eq!(classes.len(), counts.len());
        // density never decreases with the count
        for (c, class) in counts.iter().zip(&classes) {
            for (c2, class2) in counts.iter().zip(&classes) {
                if c < c2 {
                    prop_assert!(class.multiplier() >= class2.multiplier());
                }
            }
        }
    }

    #[test]
    fn sig9_keeps_nine_digits(x in -1e12f64..1e12) {
        let y: f64 = sig9(x).parse().unwrap();
        prop_assert!((x - y).abs() <= 5e-9 * x.abs());
    }

    #[test]
    fn summaries_ignore_record_order(overheads in proptest::collection::vec(1.0f64..2.0, 2..20), rot in 0usize..20) {
        let records: Vec<TrialRecord> = overheads.iter().enumerate().flat_map(|(t, &o)| {
            [Algorithm::TwoPhased, Algorithm::GlobalDijkstra].into_iter().map(move |alg| TrialRecord {
                trial: t,
                algorithm: alg,
                num_nodes: 100,
                num_edges: 300,
                network_size: 1000.0,
                failed_u: 0,
                failed_v: 1,
                search_ns: 100 + (t as u64 * 37) % 50,
                region_ns: if alg.is_local() { 10 } else { 0 },
                path_length: Some(if alg.is_local() { o * 50.0 } else { 50.0 }),
                baseline_length: Some(50.0),
                distance_overhead: Some(if alg.is_local() { o } else { 1.0 }),
                node_compression: if alg.is_local() { 1.0 / o } else { 1.0 },
                edge_compression: 1.0,
                iterations: 1,
                fallback: false,
                stage_skips: vec![Stage::Triangle],
                path: None,
            })
        }).collect();
        let mut shuffled = records.clone();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(summarize_metrics(&records).unwrap(), summarize_metrics(&shuffled).unwrap());
    }
}
