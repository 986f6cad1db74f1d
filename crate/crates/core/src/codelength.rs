//! The content map equation: per-step description length (bits) of a
//! random surf that also reports the node label at every step.
//!
//! `L = q H(Q) + sum_i p_i H(P_i) + eta * sum_i r_i H(R_i)`
//!
//! [`evaluate`] computes the three terms directly from the entropy
//! definitions. [`ModuleAggregates`] keeps per-module sums over a
//! [`FlowGraph`] so that the change caused by moving one node can be computed
//! in time proportional to that node's degree.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::flow::FlowDistribution;
use crate::flowgraph::FlowGraph;
use crate::netcore::{MetadataAnnotation, Network, Partition};
use crate::scalar::{plogp, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodelengthError {
    #[error("node {node} is in module {actual}, not {claimed}")]
    NodeNotInModule {
        node: usize,
        claimed: usize,
        actual: usize,
    },
    #[error("module {module} out of range ({capacity} slots)")]
    ModuleOutOfRange { module: usize, capacity: usize },
}

/// Term-by-term codelength of a partition, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodelengthReport<F = f64> {
    /// `q H(Q)`, the inter-module codebook.
    pub inter: F,
    /// `sum_i p_i H(P_i)`, the intra-module codebooks.
    pub intra: F,
    /// `sum_i r_i H(R_i)`, the metadata codebooks, not multiplied by `eta`.
    pub metadata: F,
    pub eta: F,
    /// `inter + intra + eta * metadata`.
    pub total: F,
}

impl<F: Scalar> CodelengthReport<F> {
    pub fn new(inter: F, intra: F, metadata: F, eta: F) -> Self {
        CodelengthReport {
            inter,
            intra,
            metadata,
            eta,
            total: inter + intra + eta * metadata,
        }
    }

    /// Traditional map equation value: `inter + intra`.
    pub fn topological(&self) -> F {
        self.inter + self.intra
    }

    /// The same partition scored at another `eta`.
    pub fn with_eta(&self, eta: F) -> Self {
        Self::new(self.inter, self.intra, self.metadata, eta)
    }
}

fn teleport_share<F: Scalar>(n: usize, module_size: usize) -> F {
    if n > 1 {
        F::from_count(n - module_size) / F::from_count(n - 1)
    } else {
        F::zero()
    }
}

/// Per-step probability that the surfer leaves `module`.
pub fn module_exit_rate<F: Scalar>(
    network: &Network<F>,
    flow: &FlowDistribution<F>,
    partition: &Partition,
    module: usize,
) -> F {
    let tau = flow.tau();
    let n = network.node_count();
    let mut inside = F::zero();
    let mut leaving = F::zero();
    for v in (0..n).filter(|&v| partition.module_of(v) == module) {
        let p = flow.rate(v);
        inside = inside + p;
        for (t, w) in network.out_edges(v) {
            if partition.module_of(t) != module {
                leaving = leaving + p * w;
            }
        }
    }
    let size = partition.sizes().get(module).copied().unwrap_or(0);
    tau * teleport_share::<F>(n, size) * inside + (F::one() - tau) * leaving
}

/// `-sum x/total log2(x/total)` over `parts`, zero when `total` is zero.
fn entropy<F: Scalar>(parts: impl Iterator<Item = F>, total: F) -> F {
    if total <= F::zero() {
        return F::zero();
    }
    -parts.map(|x| plogp(x / total)).sum::<F>()
}

/// Full evaluation of the content map equation for `partition`.
pub fn evaluate<F: Scalar>(
    network: &Network<F>,
    flow: &FlowDistribution<F>,
    metadata: &MetadataAnnotation,
    partition: &Partition,
    eta: F,
) -> CodelengthReport<F> {
    let n = network.node_count();
    let m = partition.module_count();
    let labels = metadata.label_count();
    let tau = flow.tau();

    let mut inside = vec![F::zero(); m];
    let mut leaving = vec![F::zero(); m];
    let mut label_mass = vec![F::zero(); m * labels];
    for v in 0..n {
        let module = partition.module_of(v);
        let p = flow.rate(v);
        inside[module] = inside[module] + p;
        let slot = &mut label_mass[module * labels + metadata.label_of(v)];
        *slot = *slot + p;
        for (t, w) in network.out_edges(v) {
            if partition.module_of(t) != module {
                leaving[module] = leaving[module] + p * w;
            }
        }
    }
    let exits: Vec<F> = (0..m)
        .map(|i| {
            tau * teleport_share::<F>(n, partition.sizes()[i]) * inside[i]
                + (F::one() - tau) * leaving[i]
        })
        .collect();
    let total_exit: F = exits.iter().copied().sum();

    let inter = total_exit * entropy(exits.iter().copied(), total_exit);

    let members = partition.members();
    let mut intra = F::zero();
    let mut meta = F::zero();
    for i in 0..m {
        let weight = exits[i] + inside[i];
        let codebook = std::iter::once(exits[i]).chain(members[i].iter().map(|&v| flow.rate(v)));
        intra = intra + weight * entropy(codebook, weight);

        let masses = &label_mass[i * labels..(i + 1) * labels];
        let module_mass: F = masses.iter().copied().sum();
        meta = meta + module_mass * entropy(masses.iter().copied(), module_mass);
    }
    CodelengthReport::new(inter, intra, meta, eta)
}

/// Link flow between one node and two modules, used by move deltas.
#[derive(Debug, Clone, Copy, Default)]
pub struct MoveLinks<F> {
    /// Flow from the node into the rest of its current module.
    pub out_to_from: F,
    /// Flow from the node into the target module.
    pub out_to_target: F,
    /// Flow from the rest of the current module into the node.
    pub in_from_from: F,
    /// Flow from the target module into the node.
    pub in_from_target: F,
}

/// Mutable per-module sums over a [`FlowGraph`] for incremental evaluation.
///
/// Module slots are indexed `0..graph.len()`; slots without members are empty
/// modules and contribute nothing.
#[derive(Debug, Clone)]
pub struct ModuleAggregates<'g, F = f64> {
    graph: &'g FlowGraph<F>,
    assignment: Vec<usize>,
    exit_flow: Vec<F>,
    flow: Vec<F>,
    node_count: Vec<usize>,
    members: Vec<usize>,
    label_mass: Vec<F>,
    label_plogp: Vec<F>,
    empty: BTreeSet<usize>,
    total_exit: F,
}

impl<'g, F: Scalar> ModuleAggregates<'g, F> {
    /// Every graph node in its own module.
    pub fn singletons(graph: &'g FlowGraph<F>) -> Self {
        Self::from_assignment(graph, &(0..graph.len()).collect::<Vec<_>>())
            .expect("identity assignment is valid")
    }

    /// Modules given by `assignment[node]`, each `< graph.len()`.
    pub fn from_assignment(graph: &'g FlowGraph<F>, assignment: &[usize]) -> Result<Self, CodelengthError> {
        let slots = graph.len();
        assert_eq!(assignment.len(), slots);
        if let Some(&module) = assignment.iter().find(|&&m| m >= slots) {
            return Err(CodelengthError::ModuleOutOfRange {
                module,
                capacity: slots,
            });
        }
        let mut state = ModuleAggregates {
            graph,
            assignment: assignment.to_vec(),
            exit_flow: vec![F::zero(); slots],
            flow: vec![F::zero(); slots],
            node_count: vec![0; slots],
            members: vec![0; slots],
            label_mass: vec![F::zero(); slots * graph.label_count()],
            label_plogp: vec![F::zero(); slots],
            empty: BTreeSet::new(),
            total_exit: F::zero(),
        };
        state.recompute();
        Ok(state)
    }

    /// Rebuild every sum from scratch, discarding accumulated rounding.
    pub fn recompute(&mut self) {
        let graph = self.graph;
        let labels = graph.label_count();
        self.exit_flow.iter_mut().for_each(|x| *x = F::zero());
        self.flow.iter_mut().for_each(|x| *x = F::zero());
        self.node_count.iter_mut().for_each(|x| *x = 0);
        self.members.iter_mut().for_each(|x| *x = 0);
        self.label_mass.iter_mut().for_each(|x| *x = F::zero());
        for (v, node) in graph.nodes().iter().enumerate() {
            let m = self.assignment[v];
            self.flow[m] = self.flow[m] + node.flow;
            self.node_count[m] += node.node_count;
            self.members[m] += 1;
            for &(u, mass) in &node.metadata {
                let slot = &mut self.label_mass[m * labels + u];
                *slot = *slot + mass;
            }
            for (t, f) in graph.out_links(v) {
                if self.assignment[t] != m {
                    self.exit_flow[m] = self.exit_flow[m] + f;
                }
            }
        }
        for m in 0..self.flow.len() {
            self.label_plogp[m] = self.label_mass[m * labels..(m + 1) * labels]
                .iter()
                .map(|&x| plogp(x))
                .sum();
        }
        self.empty = (0..self.flow.len()).filter(|&m| self.members[m] == 0).collect();
        self.total_exit = (0..self.flow.len()).map(|m| self.exit_rate(m)).sum();
    }

    pub fn graph(&self) -> &'g FlowGraph<F> {
        self.graph
    }

    pub fn module_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of graph nodes in `module`.
    pub fn member_count(&self, module: usize) -> usize {
        self.members[module]
    }

    /// Number of original nodes in `module`.
    pub fn node_count(&self, module: usize) -> usize {
        self.node_count[module]
    }

    pub fn module_flow(&self, module: usize) -> F {
        self.flow[module]
    }

    pub fn module_slots(&self) -> usize {
        self.flow.len()
    }

    /// Number of non-empty modules.
    pub fn module_count(&self) -> usize {
        self.members.iter().filter(|&&c| c > 0).count()
    }

    /// Lowest-indexed empty module slot, if any.
    pub fn first_empty_module(&self) -> Option<usize> {
        self.empty.first().copied()
    }

    /// Visit mass of `label` inside `module`.
    pub fn label_mass(&self, module: usize, label: usize) -> F {
        self.label_mass[module * self.graph.label_count() + label]
    }

    /// Exit rate `q_i` of `module`.
    pub fn exit_rate(&self, module: usize) -> F {
        if self.members[module] == 0 {
            return F::zero();
        }
        self.graph
            .exit_rate(self.exit_flow[module], self.flow[module], self.node_count[module])
    }

    pub fn total_exit_rate(&self) -> F {
        self.total_exit
    }

    /// Codelength of the current state.
    pub fn codelength(&self, eta: F) -> CodelengthReport<F> {
        let mut exit_plogp = F::zero();
        let mut weight_plogp = F::zero();
        let mut meta = F::zero();
        for m in (0..self.flow.len()).filter(|&m| self.members[m] > 0) {
            let q = self.exit_rate(m);
            exit_plogp = exit_plogp + plogp(q);
            weight_plogp = weight_plogp + plogp(q + self.flow[m]);
            meta = meta + plogp(self.flow[m]) - self.label_plogp[m];
        }
        let inter = plogp(self.total_exit) - exit_plogp;
        let intra = weight_plogp - exit_plogp - self.graph.total_node_entropy();
        CodelengthReport::new(inter, intra, meta, eta)
    }

    /// Link flow between `node` and the modules `from` (its own) and `to`.
    pub fn links(&self, node: usize, to: usize) -> MoveLinks<F> {
        let from = self.assignment[node];
        let mut links = MoveLinks::default();
        for (t, f) in self.graph.out_links(node) {
            let m = self.assignment[t];
            if m == from {
                links.out_to_from = links.out_to_from + f;
            } else if m == to {
                links.out_to_target = links.out_to_target + f;
            }
        }
        for (s, f) in self.graph.in_links(node) {
            let m = self.assignment[s];
            if m == from {
                links.in_from_from = links.in_from_from + f;
            } else if m == to {
                links.in_from_target = links.in_from_target + f;
            }
        }
        links
    }

    /// `L(after) - L(before)` for moving `node` from `from` to `to`; nothing is modified.
    pub fn move_delta(&self, node: usize, from: usize, to: usize, eta: F) -> Result<F, CodelengthError> {
        let actual = self.assignment[node];
        if actual != from {
            return Err(CodelengthError::NodeNotInModule {
                node,
                claimed: from,
                actual,
            });
        }
        if to >= self.module_slots() {
            return Err(CodelengthError::ModuleOutOfRange {
                module: to,
                capacity: self.module_slots(),
            });
        }
        if from == to {
            return Ok(F::zero());
        }
        Ok(self.delta_with_links(node, to, &self.links(node, to), eta))
    }

    /// Module sums after moving `node` out of `from` and into `to`.
    fn moved_sums(&self, node: usize, to: usize, links: &MoveLinks<F>) -> [(F, F, usize); 2] {
        let from = self.assignment[node];
        let data = self.graph.node(node);
        let out_total = self.graph.out_total(node);
        let vacated = if self.members[from] == 1 {
            (F::zero(), F::zero(), 0)
        } else {
            (
                self.exit_flow[from] - (out_total - links.out_to_from) + links.in_from_from,
                self.flow[from] - data.flow,
                self.node_count[from] - data.node_count,
            )
        };
        let joined = (
            self.exit_flow[to] + (out_total - links.out_to_target) - links.in_from_target,
            self.flow[to] + data.flow,
            self.node_count[to] + data.node_count,
        );
        [vacated, joined]
    }

    /// Label plogp sums of `from` and `to` after the move.
    fn moved_label_plogp(&self, node: usize, to: usize) -> (F, F) {
        let from = self.assignment[node];
        let labels = self.graph.label_count();
        let mut from_sum = self.label_plogp[from];
        let mut to_sum = self.label_plogp[to];
        if self.members[from] == 1 {
            from_sum = F::zero();
        }
        for &(u, mass) in &self.graph.node(node).metadata {
            if self.members[from] > 1 {
                let old = self.label_mass[from * labels + u];
                from_sum = from_sum - plogp(old) + plogp(old - mass);
            }
            let old = self.label_mass[to * labels + u];
            to_sum = to_sum - plogp(old) + plogp(old + mass);
        }
        (from_sum, to_sum)
    }

    /// Delta of a move given precomputed link flows; `to != module_of(node)`.
    pub fn delta_with_links(&self, node: usize, to: usize, links: &MoveLinks<F>, eta: F) -> F {
        let from = self.assignment[node];
        let [(exit_a, flow_a, count_a), (exit_b, flow_b, count_b)] = self.moved_sums(node, to, links);
        let q_a_old = self.exit_rate(from);
        let q_b_old = self.exit_rate(to);
        let q_a = if count_a == 0 {
            F::zero()
        } else {
            self.graph.exit_rate(exit_a, flow_a, count_a)
        };
        let q_b = self.graph.exit_rate(exit_b, flow_b, count_b);
        let total_new = self.total_exit - q_a_old - q_b_old + q_a + q_b;

        let topo = plogp(total_new) - plogp(self.total_exit)
            - F::lit(2.0) * (plogp(q_a) + plogp(q_b) - plogp(q_a_old) - plogp(q_b_old))
            + plogp(q_a + flow_a)
            + plogp(q_b + flow_b)
            - plogp(q_a_old + self.flow[from])
            - plogp(q_b_old + self.flow[to]);

        if eta == F::zero() {
            return topo;
        }
        let (label_a, label_b) = self.moved_label_plogp(node, to);
        let meta_old = plogp(self.flow[from]) - self.label_plogp[from] + plogp(self.flow[to])
            - self.label_plogp[to];
        let meta_new = plogp(flow_a) - label_a + plogp(flow_b) - label_b;
        topo + eta * (meta_new - meta_old)
    }

    /// Move `node` into `to`, updating every sum.
    pub fn apply_move(&mut self, node: usize, to: usize) {
        let from = self.assignment[node];
        if from == to {
            return;
        }
        let links = self.links(node, to);
        let [(exit_a, flow_a, count_a), (exit_b, flow_b, count_b)] = self.moved_sums(node, to, &links);
        let (label_a, label_b) = self.moved_label_plogp(node, to);
        let q_old = self.exit_rate(from) + self.exit_rate(to);

        let labels = self.graph.label_count();
        for &(u, mass) in &self.graph.node(node).metadata {
            let a = &mut self.label_mass[from * labels + u];
            *a = if self.members[from] == 1 { F::zero() } else { *a - mass };
            let b = &mut self.label_mass[to * labels + u];
            *b = *b + mass;
        }
        self.exit_flow[from] = exit_a;
        self.flow[from] = flow_a;
        self.node_count[from] = count_a;
        self.label_plogp[from] = label_a;
        self.members[from] -= 1;
        self.exit_flow[to] = exit_b;
        self.flow[to] = flow_b;
        self.node_count[to] = count_b;
        self.label_plogp[to] = label_b;
        self.members[to] += 1;
        if self.members[from] == 0 {
            self.empty.insert(from);
        }
        self.empty.remove(&to);
        self.assignment[node] = to;
        self.total_exit = self.total_exit - q_old + self.exit_rate(from) + self.exit_rate(to);
    }

    /// Current modules as a dense partition of the graph nodes.
    pub fn partition(&self) -> Partition {
        Partition::from_membership(&self.assignment)
    }
}
