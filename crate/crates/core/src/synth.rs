//! Two-block planted-partition benchmark graphs with noisy node labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::netcore::{MetadataAnnotation, Network, NetworkError, Partition};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("node count must be even and at least 2, got {0}")]
    OddNodeCount(usize),
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("only {0} nodes survive in the largest connected component")]
    Degenerate(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Parameters of a two-block planted partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmSpec {
    pub nodes: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Probability that a node carries the other block's label.
    pub noise: f64,
    pub seed: u64,
}

impl SbmSpec {
    /// Parameters with mean density `rho` and assortativity `delta = p_in - p_out`.
    pub fn from_density(nodes: usize, rho: f64, delta: f64, noise: f64, seed: u64) -> Result<Self, SynthError> {
        let spec = SbmSpec {
            nodes,
            p_in: rho + delta / 2.0,
            p_out: rho - delta / 2.0,
            noise,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rho(&self) -> f64 {
        (self.p_in + self.p_out) / 2.0
    }

    pub fn delta(&self) -> f64 {
        self.p_in - self.p_out
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.nodes < 2 || !self.nodes.is_multiple_of(2) {
            return Err(SynthError::OddNodeCount(self.nodes));
        }
        for (name, value) in [("p_in", self.p_in), ("p_out", self.p_out), ("noise", self.noise)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::NotProbability { name, value });
            }
        }
        Ok(())
    }
}

/// A generated benchmark restricted to its largest connected component.
#[derive(Debug, Clone)]
pub struct SbmInstance<F = f64> {
    /// Undirected, unit weights; node names are the generator's node indices.
    pub network: Network<F>,
    pub planted: Partition,
    pub metadata: MetadataAnnotation,
    /// Generator indices of the surviving nodes, ascending.
    pub kept: Vec<usize>,
    /// Nodes dropped as isolated or outside the largest component.
    pub removed: usize,
}

/// Raw draw from the block model before any node is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbmSample {
    pub nodes: usize,
    /// Unordered pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub blocks: Vec<usize>,
    pub labels: Vec<usize>,
}

/// Sample a planted-partition graph and its labels.
///
/// Nodes `0..N/2` form block 0. Every unordered pair is linked independently
/// with `p_in` or `p_out`; each label equals the node's block except with
/// probability `noise`.
pub fn sample(spec: &SbmSpec) -> Result<SbmSample, SynthError> {
    spec.validate()?;
    let n = spec.nodes;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blocks: Vec<usize> = (0..n).map(|v| usize::from(v >= half)).collect();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if blocks[i] == blocks[j] { spec.p_in } else { spec.p_out };
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let labels = blocks
        .iter()
        .map(|&b| b ^ usize::from(rng.random_bool(spec.noise)))
        .collect();
    Ok(SbmSample {
        nodes: n,
        edges,
        blocks,
        labels,
    })
}

/// [`sample`] restricted to the largest connected component, which also
/// drops isolated nodes.
pub fn generate<F: Scalar>(spec: &SbmSpec) -> Result<SbmInstance<F>, SynthError> {
    let SbmSample {
        nodes: n,
        edges,
        blocks,
        labels,
    } = sample(spec)?;
    let kept = largest_component(n, &edges);
    if kept.len() < 2 {
        return Err(SynthError::Degenerate(kept.len()));
    }
    let mut index = vec![usize::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        index[old] = new;
    }
    let network = Network::with_ids(
        kept.iter().map(|v| v.to_string()).collect(),
        false,
        edges
            .iter()
            .filter(|(i, _)| index[*i] != usize::MAX)
            .map(|&(i, j)| (index[i], index[j], F::one())),
    )?;
    let planted = Partition::from_membership(&kept.iter().map(|&v| blocks[v]).collect::<Vec<_>>());
    let names: Vec<String> = kept.iter().map(|&v| labels[v].to_string()).collect();
    let metadata = MetadataAnnotation::from_labels(&names);
    Ok(SbmInstance {
        network,
        planted,
        metadata,
        removed: n - kept.len(),
        kept,
    })
}

/// Nodes of the largest connected component (lowest smallest-node on ties).
fn largest_component(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adjacency = vec![Vec::new(); n];
    for &(i, j) in edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut component = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        component[start] = start;
        let mut cursor = 0;
        while cursor < members.len() {
            let v = members[cursor];
            cursor += 1;
            for &t in &adjacency[v] {
                if component[t] == usize::MAX {
                    component[t] = start;
                    members.push(t);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// Detectability threshold on `p_in - p_out`: `sqrt(4 N rho (1 - rho)) / N`.
pub fn delta_star<F: Scalar>(nodes: usize, rho: F) -> F {
    let n = F::from_count(nodes);
    (F::lit(4.0) * n * rho * (F::one() - rho)).sqrt() / n
}
