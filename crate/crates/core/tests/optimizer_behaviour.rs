mod common;

use common::{random_connected, random_labels, random_partition, set_partitions};
use contentmap::codelength::{evaluate, ModuleAggregates};
use contentmap::optimizer::{aggregate, local_move_pass, trial_rng};
use contentmap::{search, stationary, FlowGraph, MetadataAnnotation, Network, Partition, SearchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_cliques() -> Network {
    let mut edges = Vec::new();
    for base in [0, 3] {
        for a in 0..3 {
            for b in (a + 1)..3 {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((2, 3, 0.1));
    Network::from_edges(6, false, edges).unwrap()
}

#[test]
fn aggregation_preserves_codelength() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..10 {
        let network = random_connected(&mut rng, 30, 0.1, true);
        let flow = stationary(&network, 0.0).unwrap();
        let metadata = random_labels(&mut rng, 30, 4);
        let graph = FlowGraph::from_network(&network, &flow, &metadata);
        let partition = random_partition(&mut rng, 30, 6);
        let state = ModuleAggregates::from_assignment(&graph, partition.assignment()).unwrap();
        let (coarse, modules) = aggregate(&state);
        assert_eq!(coarse.len(), partition.module_count());
        assert_eq!(modules, partition.assignment());
        let identity = ModuleAggregates::singletons(&coarse);
        for eta in [0.0, 0.7, 3.0] {
            let direct = evaluate(&network, &flow, &metadata, &partition, eta).total;
            assert!((identity.codelength(eta).total - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn optimal_two_clique_state_makes_no_moves() {
    let network = two_cliques();
    let flow = stationary(&network, 0.0).unwrap();
    let metadata = MetadataAnnotation::uniform(6);
    let best = set_partitions(6)
        .into_iter()
        .min_by(|a, b| {
            let la = evaluate(&network, &flow, &metadata, &Partition::from_membership(a), 0.0).total;
            let lb = evaluate(&network, &flow, &metadata, &Partition::from_membership(b), 0.0).total;
            la.partial_cmp(&lb).unwrap()
        })
        .unwrap();
    assert_eq!(best, vec![0, 0, 0, 1, 1, 1]);
    let graph = FlowGraph::from_network(&network, &flow, &metadata);
    let mut state = ModuleAggregates::from_assignment(&graph, &best).unwrap();
    let (moves, gain) = local_move_pass(&mut state, &SearchConfig::default(), &mut trial_rng(0, 0));
    assert_eq!(moves, 0);
    assert_eq!(gain, 0.0);

    let found = search(&network, &flow, &metadata, &SearchConfig::default());
    assert!(found.partition.same_as(&Partition::from_membership(&best)));
}

#[test]
fn same_seed_same_result() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let network = random_connected(&mut rng, 60, 0.05, true);
    let flow = stationary(&network, 0.0).unwrap();
    let metadata = random_labels(&mut rng, 60, 3);
    let config = SearchConfig {
        eta: 0.5,
        seed: 4,
        ..SearchConfig::default()
    };
    let a = search(&network, &flow, &metadata, &config);
    let b = search(&network, &flow, &metadata, &config);
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| search(&network, &flow, &metadata, &config));
    assert_eq!(a, c);
}

#[test]
fn search_never_loses_to_simple_candidates() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..20 {
        let network = random_connected(&mut rng, 40, 0.08, i % 2 == 0);
        let flow = stationary(&network, 0.0).unwrap();
        let metadata = random_labels(&mut rng, 40, 3);
        for eta in [0.0, 1.0] {
            let config = SearchConfig {
                eta,
                seed: i,
                ..SearchConfig::default()
            };
            let found = search(&network, &flow, &metadata, &config);
            for candidate in [
                Partition::single_module(40),
                Partition::singletons(40),
                metadata.as_partition(),
            ] {
                let l = evaluate(&network, &flow, &metadata, &candidate, eta).total;
                assert!(found.report.total <= l + 1e-9);
            }
        }
    }
}

#[test]
fn local_moves_never_increase_codelength() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let network = random_connected(&mut rng, 50, 0.06, true);
    let flow = stationary(&network, 0.0).unwrap();
    let metadata = random_labels(&mut rng, 50, 3);
    let graph = FlowGraph::from_network(&network, &flow, &metadata);
    let config = SearchConfig::with_eta(0.8);
    let start = random_partition(&mut rng, 50, 10);
    let mut state = ModuleAggregates::from_assignment(&graph, start.assignment()).unwrap();
    let before = state.codelength(0.8).total;
    let (_, gain) = local_move_pass(&mut state, &config, &mut trial_rng(1, 0));
    let after = state.codelength(0.8).total;
    assert!(gain >= 0.0);
    assert!((before - after - gain).abs() < 1e-9);
}

#[test]
fn single_precision_search_runs() {
    let network: contentmap::NetworkF32 =
        Network::from_edges(6, false, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 0.1), (3, 4, 1.0), (4, 5, 1.0), (5, 3, 1.0)])
            .unwrap();
    let flow = stationary(&network, 0.0).unwrap();
    let metadata = MetadataAnnotation::uniform(6);
    let found = search(&network, &flow, &metadata, &contentmap::SearchConfigF32::default());
    assert_eq!(found.partition.module_count(), 2);
}
