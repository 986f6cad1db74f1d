//! Oracles shared by the integration tests. Nothing here calls into the
//! code paths it is used to check.
#![allow(dead_code)]

use contentmap::{FlowDistribution, MetadataAnnotation, Network, Partition};
use rand::seq::SliceRandom;
use rand::Rng;

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            extend(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    extend(&mut vec![0], 0, n, &mut out);
    out
}

fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Traditional two-level map equation from raw edge weights, written in
/// the `plogp` form rather than as weighted codebook entropies.
pub fn map_equation(network: &Network, flow: &FlowDistribution, membership: &[usize]) -> f64 {
    let n = network.node_count();
    let tau = flow.tau();
    let m = membership.iter().max().map_or(0, |&x| x + 1);
    let mut strength = vec![0.0; n];
    for &(s, t, w) in network.edges() {
        strength[s] += w;
        if !network.is_directed() && s != t {
            strength[t] += w;
        }
    }
    let mut leaving = vec![0.0; m];
    let mut inside = vec![0.0; m];
    let mut size = vec![0usize; m];
    for v in 0..n {
        inside[membership[v]] += flow.rate(v);
        size[membership[v]] += 1;
    }
    let mut link = |a: usize, b: usize, w: f64| {
        if membership[a] != membership[b] {
            leaving[membership[a]] += flow.rate(a) * w / strength[a];
        }
    };
    for &(s, t, w) in network.edges() {
        link(s, t, w);
        if !network.is_directed() {
            link(t, s, w);
        }
    }
    let exits: Vec<f64> = (0..m)
        .map(|i| {
            let share = if n > 1 { (n - size[i]) as f64 / (n - 1) as f64 } else { 0.0 };
            tau * share * inside[i] + (1.0 - tau) * leaving[i]
        })
        .collect();
    let total: f64 = exits.iter().sum();
    plogp(total) - 2.0 * exits.iter().map(|&q| plogp(q)).sum::<f64>()
        - flow.rates().iter().map(|&p| plogp(p)).sum::<f64>()
        + (0..m).filter(|&i| size[i] > 0).map(|i| plogp(exits[i] + inside[i])).sum::<f64>()
}

/// Flow-weighted label entropy summed over modules, from label masses.
pub fn metadata_entropy(flow: &FlowDistribution, metadata: &MetadataAnnotation, membership: &[usize]) -> f64 {
    let m = membership.iter().max().map_or(0, |&x| x + 1);
    let mut mass = vec![vec![0.0; metadata.label_count()]; m];
    for (v, &module) in membership.iter().enumerate() {
        mass[module][metadata.label_of(v)] += flow.rate(v);
    }
    mass.iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            plogp(total) - row.iter().map(|&x| plogp(x)).sum::<f64>()
        })
        .sum()
}

/// Random connected undirected network: a random spanning tree plus extra
/// edges, weights in [0.5, 2] or all 1.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra_density: f64, weighted: bool) -> Network {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let weight = |rng: &mut R| if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent, weight(rng)));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random_bool(extra_density) {
                edges.push((a, b, weight(rng)));
            }
        }
    }
    if n == 1 {
        edges.push((0, 0, 1.0));
    }
    Network::from_edges(n, false, edges).unwrap()
}

/// Random strongly connected directed network (a Hamiltonian cycle plus extra arcs).
pub fn random_directed<R: Rng>(rng: &mut R, n: usize, extra_density: f64) -> Network {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize, f64)> = (0..n)
        .map(|i| (order[i], order[(i + 1) % n], rng.random_range(0.5..2.0)))
        .collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(extra_density) {
                edges.push((a, b, rng.random_range(0.5..2.0)));
            }
        }
    }
    Network::from_edges(n, true, edges).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, label_count: usize) -> MetadataAnnotation {
    let labels: Vec<String> = (0..n).map(|_| rng.random_range(0..label_count).to_string()).collect();
    MetadataAnnotation::from_labels(&labels)
}

pub fn random_partition<R: Rng>(rng: &mut R, n: usize, max_modules: usize) -> Partition {
    let membership: Vec<usize> = (0..n).map(|_| rng.random_range(0..max_modules)).collect();
    Partition::from_membership(&membership)
}

/// Plug-in mutual information (nats) straight from two label vectors.
pub fn mutual_information_direct(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let rx = x.iter().max().map_or(0, |&v| v + 1);
    let ry = y.iter().max().map_or(0, |&v| v + 1);
    let mut joint = vec![vec![0.0; ry]; rx];
    let mut a = vec![0.0; rx];
    let mut b = vec![0.0; ry];
    for (&i, &j) in x.iter().zip(y) {
        joint[i][j] += 1.0;
        a[i] += 1.0;
        b[j] += 1.0;
    }
    let mut mi = 0.0;
    for i in 0..rx {
        for j in 0..ry {
            if joint[i][j] > 0.0 {
                mi += joint[i][j] / n * (joint[i][j] * n / (a[i] * b[j])).ln();
            }
        }
    }
    mi
}

/// Expected mutual information under the hypergeometric model, by averaging
/// over every permutation of `y` (Heap's algorithm).
pub fn expected_mi_by_permutation(x: &[usize], y: &[usize]) -> f64 {
    let n = y.len();
    let mut perm = y.to_vec();
    let mut c = vec![0usize; n];
    let mut total = mutual_information_direct(x, &perm);
    let mut count = 1.0;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += mutual_information_direct(x, &perm);
            count += 1.0;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total / count
}
