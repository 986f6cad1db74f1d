//! Two-level search for the partition minimizing the content map equation.
//!
//! Each trial starts from singletons and alternates greedy local moves with
//! aggregation of the resulting modules into single nodes. Once no further
//! merges happen, the original nodes are fine-tuned inside the found module
//! structure and the cycle repeats until nothing improves. Each trial then
//! kicks its incumbent a few times and descends again. The best trial wins;
//! the one-module partition is always a candidate.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codelength::{evaluate, CodelengthReport, ModuleAggregates, MoveLinks};
use crate::flow::FlowDistribution;
use crate::netcore::{MetadataAnnotation, Network, Partition};
use crate::scalar::Scalar;

pub use crate::flowgraph::{AggregatedNode, FlowGraph};

/// Upper bound on sweeps inside a single [`local_move_pass`].
const MAX_SWEEPS: usize = 10_000;

/// Per-node reassignment probability of a perturbation kick.
const PERTURB_RATE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig<F = f64> {
    pub eta: F,
    pub tau: F,
    pub trials: usize,
    pub seed: u64,
    pub max_outer_loops: usize,
    /// Perturb-and-descend rounds after each trial's initial descent.
    pub perturbations: usize,
    /// Minimum improvement in bits for a move to be taken.
    pub tolerance: F,
}

impl<F: Scalar> Default for SearchConfig<F> {
    fn default() -> Self {
        SearchConfig {
            eta: F::zero(),
            tau: F::zero(),
            trials: 10,
            seed: 0,
            max_outer_loops: 50,
            perturbations: 4,
            tolerance: F::lit(1e-10),
        }
    }
}

impl<F: Scalar> SearchConfig<F> {
    pub fn with_eta(eta: F) -> Self {
        SearchConfig {
            eta,
            ..Self::default()
        }
    }
}

/// Best partition found together with its exact codelength.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<F = f64> {
    pub partition: Partition,
    pub report: CodelengthReport<F>,
    /// Trial that produced the partition; `None` when the one-module partition won.
    pub trial: Option<usize>,
}

/// RNG for trial `trial` of a search seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Greedy node moves until a full sweep makes no move.
///
/// Nodes are visited in a fresh random order each sweep. For every node the
/// candidates are the modules it links to plus one empty module; the best move
/// is applied when it improves the codelength by more than the tolerance.
/// Returns the number of moves made and the total improvement in bits.
pub fn local_move_pass<F: Scalar, R: rand::Rng + ?Sized>(
    state: &mut ModuleAggregates<'_, F>,
    config: &SearchConfig<F>,
    rng: &mut R,
) -> (usize, F) {
    let graph = state.graph();
    let n = graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut link_out = vec![F::zero(); n];
    let mut link_in = vec![F::zero(); n];
    let mut touched: Vec<usize> = Vec::new();
    let mut seen = vec![false; n];
    let mut total_moves = 0;
    let mut total_gain = F::zero();

    for _ in 0..MAX_SWEEPS {
        order.shuffle(rng);
        let mut moves = 0;
        for &node in &order {
            let from = state.module_of(node);
            for (t, f) in graph.out_links(node) {
                let m = state.module_of(t);
                link_out[m] = link_out[m] + f;
                if !seen[m] {
                    seen[m] = true;
                    touched.push(m);
                }
            }
            for (s, f) in graph.in_links(node) {
                let m = state.module_of(s);
                link_in[m] = link_in[m] + f;
                if !seen[m] {
                    seen[m] = true;
                    touched.push(m);
                }
            }
            let mut candidates: Vec<usize> = touched.iter().copied().filter(|&m| m != from).collect();
            if state.member_count(from) > 1 {
                if let Some(empty) = state.first_empty_module() {
                    candidates.push(empty);
                }
            }
            candidates.sort_unstable();

            let mut best: Option<(usize, F)> = None;
            for &to in &candidates {
                let links = MoveLinks {
                    out_to_from: link_out[from],
                    out_to_target: link_out[to],
                    in_from_from: link_in[from],
                    in_from_target: link_in[to],
                };
                let delta = state.delta_with_links(node, to, &links, config.eta);
                let better = match best {
                    None => true,
                    Some((_, best_delta)) => delta < best_delta - config.tolerance,
                };
                if better {
                    best = Some((to, delta));
                }
            }
            for m in touched.drain(..) {
                link_out[m] = F::zero();
                link_in[m] = F::zero();
                seen[m] = false;
            }
            if let Some((to, delta)) = best {
                if delta < -config.tolerance {
                    state.apply_move(node, to);
                    moves += 1;
                    total_gain = total_gain - delta;
                }
            }
        }
        total_moves += moves;
        state.recompute();
        if moves == 0 {
            break;
        }
    }
    (total_moves, total_gain)
}

/// Collapse the modules of `state` into nodes of a new graph.
///
/// Returns the coarse graph, whose identity partition scores exactly like
/// `state`, and the dense module id of every node of the input graph.
pub fn aggregate<F: Scalar>(state: &ModuleAggregates<'_, F>) -> (FlowGraph<F>, Vec<usize>) {
    let partition = state.partition();
    let coarse = state
        .graph()
        .aggregate_by(partition.assignment(), partition.module_count());
    (coarse, partition.assignment().to_vec())
}

/// Alternate coarse merging and fine-tuning from `membership` until the
/// codelength stops improving. Returns the dense membership and its codelength.
fn descend<F: Scalar>(
    base: &FlowGraph<F>,
    mut membership: Vec<usize>,
    config: &SearchConfig<F>,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, F) {
    let start = Partition::from_membership(&membership);
    let mut module_count = start.module_count();
    membership = start.assignment().to_vec();
    let mut best = ModuleAggregates::from_assignment(base, &membership)
        .expect("module ids are dense")
        .codelength(config.eta)
        .total;

    for _ in 0..config.max_outer_loops.max(1) {
        // coarse phase: merge modules as units
        let mut graph = base.aggregate_by(&membership, module_count);
        loop {
            let mut state = ModuleAggregates::singletons(&graph);
            let (moves, _) = local_move_pass(&mut state, config, rng);
            if moves == 0 {
                break;
            }
            let (coarse, modules) = aggregate(&state);
            for m in membership.iter_mut() {
                *m = modules[*m];
            }
            graph = coarse;
        }

        // fine-tuning: original nodes inside the module structure
        let mut state = ModuleAggregates::from_assignment(base, &membership).expect("module ids are dense");
        local_move_pass(&mut state, config, rng);
        let partition = state.partition();
        let codelength = state.codelength(config.eta).total;
        membership = partition.assignment().to_vec();
        module_count = partition.module_count();
        if codelength >= best - config.tolerance {
            best = best.min(codelength);
            break;
        }
        best = codelength;
    }
    (membership, best)
}

/// Reassign each node with probability `PERTURB_RATE` to the module of a
/// random neighbour or to a fresh module.
fn perturb<F: Scalar>(base: &FlowGraph<F>, membership: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut next = membership.to_vec();
    let mut fresh = membership.iter().copied().max().map_or(0, |m| m + 1);
    for (node, slot) in next.iter_mut().enumerate() {
        if !rng.random_bool(PERTURB_RATE) {
            continue;
        }
        let neighbours: Vec<usize> = base
            .out_links(node)
            .chain(base.in_links(node))
            .map(|(other, _)| other)
            .collect();
        let pick = rng.random_range(0..=neighbours.len());
        if pick == neighbours.len() {
            *slot = fresh;
            fresh += 1;
        } else {
            *slot = membership[neighbours[pick]];
        }
    }
    next
}

/// One trial on the level-0 graph. Returns the module of every original node.
///
/// The descent from singletons is followed by `config.perturbations` kicks;
/// a kicked descent replaces the incumbent only if it is strictly shorter.
fn run_trial<F: Scalar>(base: &FlowGraph<F>, config: &SearchConfig<F>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (mut best, mut best_length) = descend(base, (0..base.len()).collect(), config, rng);
    for _ in 0..config.perturbations {
        let start = perturb(base, &best, rng);
        let (candidate, length) = descend(base, start, config, rng);
        if length < best_length - config.tolerance {
            best = candidate;
            best_length = length;
        }
    }
    best
}

/// Minimize the content map equation over flat partitions of `network`.
///
/// Trials run in parallel with per-trial RNG streams; the result depends only
/// on the inputs and `config.seed`.
pub fn search<F: Scalar>(
    network: &Network<F>,
    flow: &FlowDistribution<F>,
    metadata: &MetadataAnnotation,
    config: &SearchConfig<F>,
) -> SearchResult<F> {
    let base = FlowGraph::from_network(network, flow, metadata);
    let score = |partition: &Partition| evaluate(network, flow, metadata, partition, config.eta);

    let one_module = Partition::single_module(network.node_count());
    let mut best = SearchResult {
        report: score(&one_module),
        partition: one_module,
        trial: None,
    };
    let trials: Vec<SearchResult<F>> = (0..config.trials.max(1))
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            let partition = Partition::from_membership(&run_trial(&base, config, &mut rng));
            SearchResult {
                report: score(&partition),
                partition,
                trial: Some(trial),
            }
        })
        .collect();
    for candidate in trials {
        if candidate.report.total < best.report.total - config.tolerance {
            best = candidate;
        }
    }
    best
}
