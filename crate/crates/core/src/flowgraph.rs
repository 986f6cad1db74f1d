//! Flow-weighted graph over (possibly aggregated) nodes.
//!
//! Every quantity the content map equation needs is additive over original
//! nodes: visit rate, node count, per-label visit mass, link flow and the
//! node-entropy constant. Summing them per module therefore yields a coarser
//! graph on which the objective evaluates to exactly the same value.

use crate::flow::FlowDistribution;
use crate::netcore::{MetadataAnnotation, Network};
use crate::scalar::{plogp, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedNode<F = f64> {
    /// Visit rate.
    pub flow: F,
    /// Number of original nodes represented.
    pub node_count: usize,
    /// Visit mass per label as sparse `(label, mass)` pairs, sorted by label.
    pub metadata: Vec<(usize, F)>,
    /// Link flow that starts and ends inside this node.
    pub internal_flow: F,
    /// Sum of `p log2 p` over the represented original nodes.
    pub node_entropy: F,
}

#[derive(Debug, Clone)]
pub struct FlowGraph<F = f64> {
    nodes: Vec<AggregatedNode<F>>,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    out_flow: Vec<F>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    in_flow: Vec<F>,
    out_total: Vec<F>,
    original_nodes: usize,
    tau: F,
    label_count: usize,
}

impl<F: Scalar> FlowGraph<F> {
    /// One aggregated node per original node; link flow is `p_a * w_ab`.
    pub fn from_network(
        network: &Network<F>,
        flow: &FlowDistribution<F>,
        metadata: &MetadataAnnotation,
    ) -> Self {
        let n = network.node_count();
        assert_eq!(flow.len(), n, "flow length must match the network");
        assert_eq!(metadata.node_count(), n, "metadata must label every node");
        let mut nodes = Vec::with_capacity(n);
        let mut links = Vec::new();
        for v in 0..n {
            let p = flow.rate(v);
            let mut internal = F::zero();
            for (t, w) in network.out_edges(v) {
                if t == v {
                    internal = internal + p * w;
                } else {
                    links.push((v, t, p * w));
                }
            }
            nodes.push(AggregatedNode {
                flow: p,
                node_count: 1,
                metadata: vec![(metadata.label_of(v), p)],
                internal_flow: internal,
                node_entropy: plogp(p),
            });
        }
        Self::build(nodes, links, n, flow.tau(), metadata.label_count())
    }

    fn build(
        nodes: Vec<AggregatedNode<F>>,
        mut links: Vec<(usize, usize, F)>,
        original_nodes: usize,
        tau: F,
        label_count: usize,
    ) -> Self {
        let n = nodes.len();
        links.sort_by_key(|&(s, t, _)| (s, t));
        let mut out_offsets = vec![0; n + 1];
        let mut in_offsets = vec![0; n + 1];
        for &(s, t, _) in &links {
            out_offsets[s + 1] += 1;
            in_offsets[t + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets = links.iter().map(|&(_, t, _)| t).collect();
        let out_flow: Vec<F> = links.iter().map(|&(_, _, f)| f).collect();
        let mut out_total = vec![F::zero(); n];
        let mut in_sources = vec![0; links.len()];
        let mut in_flow = vec![F::zero(); links.len()];
        let mut fill = in_offsets.clone();
        for &(s, t, f) in &links {
            out_total[s] = out_total[s] + f;
            in_sources[fill[t]] = s;
            in_flow[fill[t]] = f;
            fill[t] += 1;
        }
        FlowGraph {
            nodes,
            out_offsets,
            out_targets,
            out_flow,
            in_offsets,
            in_sources,
            in_flow,
            out_total,
            original_nodes,
            tau,
            label_count,
        }
    }

    /// Collapse every module of `membership` (dense ids `0..module_count`) into one node.
    pub fn aggregate_by(&self, membership: &[usize], module_count: usize) -> Self {
        assert_eq!(membership.len(), self.len());
        let mut nodes: Vec<AggregatedNode<F>> = (0..module_count)
            .map(|_| AggregatedNode {
                flow: F::zero(),
                node_count: 0,
                metadata: Vec::new(),
                internal_flow: F::zero(),
                node_entropy: F::zero(),
            })
            .collect();
        let mut dense_meta = vec![F::zero(); module_count * self.label_count];
        for (v, node) in self.nodes.iter().enumerate() {
            let target = &mut nodes[membership[v]];
            target.flow = target.flow + node.flow;
            target.node_count += node.node_count;
            target.internal_flow = target.internal_flow + node.internal_flow;
            target.node_entropy = target.node_entropy + node.node_entropy;
            for &(label, mass) in &node.metadata {
                let slot = &mut dense_meta[membership[v] * self.label_count + label];
                *slot = *slot + mass;
            }
        }
        for (m, node) in nodes.iter_mut().enumerate() {
            let row = &dense_meta[m * self.label_count..(m + 1) * self.label_count];
            node.metadata = row
                .iter()
                .enumerate()
                .filter(|(_, &mass)| mass > F::zero())
                .map(|(u, &mass)| (u, mass))
                .collect();
        }
        let mut merged: std::collections::BTreeMap<(usize, usize), F> = Default::default();
        for s in 0..self.len() {
            for (t, f) in self.out_links(s) {
                let (a, b) = (membership[s], membership[t]);
                if a == b {
                    nodes[a].internal_flow = nodes[a].internal_flow + f;
                } else {
                    let e = merged.entry((a, b)).or_insert_with(F::zero);
                    *e = *e + f;
                }
            }
        }
        let links = merged.into_iter().map(|((a, b), f)| (a, b, f)).collect();
        Self::build(nodes, links, self.original_nodes, self.tau, self.label_count)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[AggregatedNode<F>] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &AggregatedNode<F> {
        &self.nodes[v]
    }

    /// Outgoing link flow of `v` to other nodes.
    pub fn out_links(&self, v: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let range = self.out_offsets[v]..self.out_offsets[v + 1];
        self.out_targets[range.clone()]
            .iter()
            .copied()
            .zip(self.out_flow[range].iter().copied())
    }

    /// Incoming link flow of `v` from other nodes.
    pub fn in_links(&self, v: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let range = self.in_offsets[v]..self.in_offsets[v + 1];
        self.in_sources[range.clone()]
            .iter()
            .copied()
            .zip(self.in_flow[range].iter().copied())
    }

    /// Total outgoing link flow of `v`, self-links excluded.
    pub fn out_total(&self, v: usize) -> F {
        self.out_total[v]
    }

    /// Node count of the underlying original network.
    pub fn original_nodes(&self) -> usize {
        self.original_nodes
    }

    pub fn tau(&self) -> F {
        self.tau
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    /// Sum of `p log2 p` over every original node; constant under any partition.
    pub fn total_node_entropy(&self) -> F {
        self.nodes.iter().map(|n| n.node_entropy).sum()
    }

    /// Exit rate of a module with link exit flow `exit_flow`, visit rate `flow`
    /// and `node_count` original nodes.
    #[inline]
    pub fn exit_rate(&self, exit_flow: F, flow: F, node_count: usize) -> F {
        let n = self.original_nodes;
        let teleport = if n > 1 {
            self.tau * F::from_count(n - node_count) / F::from_count(n - 1) * flow
        } else {
            F::zero()
        };
        teleport + (F::one() - self.tau) * exit_flow
    }
}
