//! Network, metadata and partition data model plus the plain-text formats
//! used to move them in and out of the tool.
//!
//! Supported inputs:
//!
//! * edge lists: `src<TAB>dst[<TAB>weight]`, whitespace separated, `#` comments,
//!   weight defaults to `1.0`;
//! * Pajek `.net` files restricted to `*Vertices`, `*Edges` and `*Arcs` sections;
//! * metadata: `node<TAB>label`;
//! * partitions: `node<TAB>module`.
//!
//! Node names that all parse as non-negative integers are ordered numerically,
//! anything else keeps first-appearance order. The original names are kept on
//! the [`Network`] so that outputs can be written back in the caller's ids.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: edge weight must be positive and finite, got {weight}")]
    NonPositiveWeight { line: usize, weight: String },
    #[error("network has no edges")]
    Empty,
    #[error("node index {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("missing label for node {0}")]
    MissingLabel(String),
    #[error("node {node} has conflicting labels {first:?} and {second:?}")]
    ConflictingLabel {
        node: String,
        first: String,
        second: String,
    },
    #[error("line {line}: unknown node id {node:?}")]
    UnknownNode { line: usize, node: String },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid metadata: {0}")]
    InvalidMetadata(String),
}

impl NetworkError {
    fn io(path: &Path, source: io::Error) -> Self {
        NetworkError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Input format for [`load_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    EdgeList,
    Pajek,
}

impl NetworkFormat {
    /// Guess the format from a file extension; `.net` is Pajek, everything else an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("net") => NetworkFormat::Pajek,
            _ => NetworkFormat::EdgeList,
        }
    }
}

impl FromStr for NetworkFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge-list-tsv" | "tsv" | "edgelist" => Ok(NetworkFormat::EdgeList),
            "pajek-net" | "pajek" | "net" => Ok(NetworkFormat::Pajek),
            other => Err(format!("unknown network format {other:?}")),
        }
    }
}

/// Weighted graph with out-weights normalized per source node.
///
/// Raw edges are stored once in canonical form (undirected pairs as
/// `(min, max)`, duplicates summed). The normalized adjacency is the symmetric
/// expansion for undirected graphs; a self-loop appears once in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<F = f64> {
    directed: bool,
    ids: Vec<String>,
    edges: Vec<(usize, usize, F)>,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    out_weights: Vec<F>,
    strength: Vec<F>,
    self_loops: usize,
}

impl<F: Scalar> Network<F> {
    /// Build a network over nodes `0..node_count` named by their index.
    pub fn from_edges(
        node_count: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize, F)>,
    ) -> Result<Self, NetworkError> {
        let ids = (0..node_count).map(|i| i.to_string()).collect();
        Self::with_ids(ids, directed, edges)
    }

    /// Build a network whose node `i` carries the external name `ids[i]`.
    pub fn with_ids(
        ids: Vec<String>,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize, F)>,
    ) -> Result<Self, NetworkError> {
        let node_count = ids.len();
        if node_count == 0 {
            return Err(NetworkError::Empty);
        }
        let mut merged: BTreeMap<(usize, usize), F> = BTreeMap::new();
        for (src, dst, weight) in edges {
            for node in [src, dst] {
                if node >= node_count {
                    return Err(NetworkError::NodeOutOfRange { node, node_count });
                }
            }
            if !weight.is_finite() || weight <= F::zero() {
                return Err(NetworkError::NonPositiveWeight {
                    line: 0,
                    weight: weight.to_string(),
                });
            }
            let key = if directed || src <= dst {
                (src, dst)
            } else {
                (dst, src)
            };
            let entry = merged.entry(key).or_insert_with(F::zero);
            *entry = *entry + weight;
        }
        if merged.is_empty() {
            return Err(NetworkError::Empty);
        }

        let edges: Vec<(usize, usize, F)> = merged.into_iter().map(|((s, t), w)| (s, t, w)).collect();
        let self_loops = edges.iter().filter(|(s, t, _)| s == t).count();

        let mut adjacency: Vec<Vec<(usize, F)>> = vec![Vec::new(); node_count];
        for &(s, t, w) in &edges {
            adjacency[s].push((t, w));
            if !directed && s != t {
                adjacency[t].push((s, w));
            }
        }

        let mut out_offsets = Vec::with_capacity(node_count + 1);
        let mut out_targets = Vec::new();
        let mut out_weights = Vec::new();
        let mut strength = Vec::with_capacity(node_count);
        out_offsets.push(0);
        for mut row in adjacency {
            row.sort_by_key(|&(t, _)| t);
            let total: F = row.iter().map(|&(_, w)| w).sum();
            strength.push(total);
            for (t, w) in row {
                out_targets.push(t);
                out_weights.push(w / total);
            }
            out_offsets.push(out_targets.len());
        }

        Ok(Network {
            directed,
            ids,
            edges,
            out_offsets,
            out_targets,
            out_weights,
            strength,
            self_loops,
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// External node names, indexed by dense node id.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Canonical raw edges `(source, target, weight)`.
    pub fn edges(&self) -> &[(usize, usize, F)] {
        &self.edges
    }

    pub fn self_loop_count(&self) -> usize {
        self.self_loops
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loops > 0
    }

    /// Normalized out-edges `(target, w)` of `node`, sorted by target.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let range = self.out_offsets[node]..self.out_offsets[node + 1];
        self.out_targets[range.clone()]
            .iter()
            .copied()
            .zip(self.out_weights[range].iter().copied())
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_offsets[node + 1] - self.out_offsets[node]
    }

    /// Sum of raw out-weights of `node` (both directions for undirected edges).
    pub fn strength(&self, node: usize) -> F {
        self.strength[node]
    }

    /// Nodes without any out-edge.
    pub fn dangling_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&v| self.out_degree(v) == 0)
            .collect()
    }

    /// Weakly connected components as a component id per node, ids in
    /// order of their smallest node.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(s, t, _) in &self.edges {
            let (a, b) = (find(&mut parent, s), find(&mut parent, t));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let component = (0..n)
            .map(|v| {
                let root = find(&mut parent, v);
                if label[root] == usize::MAX {
                    label[root] = count;
                    count += 1;
                }
                label[root]
            })
            .collect();
        (count, component)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 == 1
    }

    /// Induced subnetwork on `keep` (in the given order), retaining names.
    pub fn subnetwork(&self, keep: &[usize]) -> Result<Self, NetworkError> {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let ids = keep.iter().map(|&v| self.ids[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|(s, t, _)| index[*s] != usize::MAX && index[*t] != usize::MAX)
            .map(|&(s, t, w)| (index[s], index[t], w));
        Self::with_ids(ids, self.directed, edges)
    }

    /// Same topology with every raw weight multiplied by `factor`.
    pub fn rescaled(&self, factor: F) -> Result<Self, NetworkError> {
        Self::with_ids(
            self.ids.clone(),
            self.directed,
            self.edges.iter().map(|&(s, t, w)| (s, t, w * factor)),
        )
    }

    fn index_of(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }
}

/// One discrete label per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataAnnotation {
    labels: Vec<String>,
    assignment: Vec<usize>,
}

impl MetadataAnnotation {
    /// Build from per-node label strings; the label universe follows first appearance.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut universe: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|label| {
                let label = label.as_ref();
                *lookup.entry(label.to_string()).or_insert_with(|| {
                    universe.push(label.to_string());
                    universe.len() - 1
                })
            })
            .collect();
        MetadataAnnotation {
            labels: universe,
            assignment,
        }
    }

    /// Build from label indices into `labels`; every label must be used.
    pub fn new(labels: Vec<String>, assignment: Vec<usize>) -> Result<Self, NetworkError> {
        let mut used = vec![false; labels.len()];
        for &a in &assignment {
            if a >= labels.len() {
                return Err(NetworkError::InvalidMetadata(format!(
                    "label index {a} out of range"
                )));
            }
            used[a] = true;
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(NetworkError::InvalidMetadata(format!(
                "label {:?} is not used by any node",
                labels[unused]
            )));
        }
        Ok(MetadataAnnotation { labels, assignment })
    }

    /// A single shared label for `node_count` nodes.
    pub fn uniform(node_count: usize) -> Self {
        MetadataAnnotation {
            labels: vec!["_".to_string()],
            assignment: vec![0; node_count],
        }
    }

    /// Label universe in first-appearance order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Label index per node.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn label_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Restriction to `keep` (in the given order), rebuilding the universe.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let labels: Vec<&str> = keep
            .iter()
            .map(|&v| self.labels[self.assignment[v]].as_str())
            .collect();
        Self::from_labels(&labels)
    }

    /// The labels viewed as a partition of the nodes.
    pub fn as_partition(&self) -> Partition {
        Partition::from_membership(&self.assignment)
    }
}

/// Hard assignment of nodes to modules `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Validate an assignment whose module ids must already be dense.
    pub fn new(assignment: Vec<usize>) -> Result<Self, NetworkError> {
        let module_count = assignment.iter().map(|&m| m + 1).max().unwrap_or(0);
        let mut sizes = vec![0; module_count];
        for &m in &assignment {
            sizes[m] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(NetworkError::InvalidPartition(format!(
                "module id {empty} is unused; module ids must be dense"
            )));
        }
        Ok(Partition { assignment, sizes })
    }

    /// Relabel arbitrary module ids densely in order of first appearance.
    pub fn from_membership(membership: &[usize]) -> Self {
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let mut sizes = Vec::new();
        let assignment = membership
            .iter()
            .map(|m| {
                let next = relabel.len();
                let id = *relabel.entry(*m).or_insert(next);
                if id == sizes.len() {
                    sizes.push(0);
                }
                sizes[id] += 1;
                id
            })
            .collect();
        Partition { assignment, sizes }
    }

    pub fn singletons(node_count: usize) -> Self {
        Partition {
            assignment: (0..node_count).collect(),
            sizes: vec![1; node_count],
        }
    }

    pub fn single_module(node_count: usize) -> Self {
        Partition {
            assignment: vec![0; node_count],
            sizes: if node_count == 0 { vec![] } else { vec![node_count] },
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn module_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn module_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Node count per module.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Members of every module, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &m) in self.assignment.iter().enumerate() {
            members[m].push(v);
        }
        members
    }

    /// Restriction to `keep`, relabelled densely.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let membership: Vec<usize> = keep.iter().map(|&v| self.assignment[v]).collect();
        Self::from_membership(&membership)
    }

    /// Equal up to a renaming of module ids.
    pub fn same_as(&self, other: &Partition) -> bool {
        self.node_count() == other.node_count()
            && Self::from_membership(&self.assignment) == Self::from_membership(&other.assignment)
    }
}

fn read(path: &Path) -> Result<String, NetworkError> {
    fs::read_to_string(path).map_err(|e| NetworkError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), NetworkError> {
    fs::write(path, contents).map_err(|e| NetworkError::io(path, e))
}

/// Significant content of a line, or `None` for blanks and comments.
fn content(line: &str, comment: char) -> Option<&str> {
    let line = match line.find(comment) {
        Some(pos) => &line[..pos],
        None => line,
    };
    let line = line.trim();
    (!line.is_empty()).then_some(line)
}

fn parse_weight<F: Scalar>(token: Option<&str>, line: usize) -> Result<F, NetworkError> {
    let Some(token) = token else {
        return Ok(F::one());
    };
    let value: f64 = token.parse().map_err(|_| NetworkError::Parse {
        line,
        message: format!("invalid weight {token:?}"),
    })?;
    if !value.is_finite() || value <= 0.0 {
        return Err(NetworkError::NonPositiveWeight {
            line,
            weight: token.to_string(),
        });
    }
    Ok(F::lit(value))
}

/// Dense ids for a set of node names: numeric order when every name is a
/// non-negative integer, first-appearance order otherwise.
fn dense_ids(names: &[String]) -> (Vec<String>, HashMap<String, usize>) {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut ordered: Vec<String> = Vec::new();
    for name in names {
        if !seen.contains_key(name) {
            seen.insert(name.clone(), ordered.len());
            ordered.push(name.clone());
        }
    }
    let numeric: Option<Vec<u64>> = ordered.iter().map(|n| n.parse::<u64>().ok()).collect();
    if let Some(values) = numeric {
        let mut pairs: Vec<(u64, String)> = values.into_iter().zip(ordered).collect();
        pairs.sort();
        ordered = pairs.into_iter().map(|(_, n)| n).collect();
    }
    let index = ordered
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    (ordered, index)
}

/// Parse an edge list held in memory.
pub fn parse_edge_list<F: Scalar>(text: &str, directed: bool) -> Result<Network<F>, NetworkError> {
    let mut rows: Vec<(String, String, F)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(body) = content(raw, '#') else {
            continue;
        };
        let mut tokens = body.split_whitespace();
        let (Some(src), Some(dst)) = (tokens.next(), tokens.next()) else {
            return Err(NetworkError::Parse {
                line,
                message: "expected `source target [weight]`".to_string(),
            });
        };
        let weight = parse_weight(tokens.next(), line)?;
        if tokens.next().is_some() {
            return Err(NetworkError::Parse {
                line,
                message: "too many columns".to_string(),
            });
        }
        rows.push((src.to_string(), dst.to_string(), weight));
    }
    if rows.is_empty() {
        return Err(NetworkError::Empty);
    }
    let names: Vec<String> = rows
        .iter()
        .flat_map(|(s, t, _)| [s.clone(), t.clone()])
        .collect();
    let (ids, index) = dense_ids(&names);
    let edges: Vec<(usize, usize, F)> = rows
        .into_iter()
        .map(|(s, t, w)| (index[&s], index[&t], w))
        .collect();
    Network::with_ids(ids, directed, edges)
}

/// Parse the `*Vertices` / `*Edges` / `*Arcs` subset of the Pajek format.
pub fn parse_pajek<F: Scalar>(text: &str, directed: bool) -> Result<Network<F>, NetworkError> {
    enum Section {
        None,
        Vertices,
        Links,
    }
    let mut section = Section::None;
    let mut vertex_count: Option<usize> = None;
    let mut names: Vec<Option<String>> = Vec::new();
    let mut edges: Vec<(usize, usize, F)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(body) = content(raw, '%') else {
            continue;
        };
        if let Some(header) = body.strip_prefix('*') {
            let mut tokens = header.split_whitespace();
            let keyword = tokens.next().unwrap_or("").to_ascii_lowercase();
            section = match keyword.as_str() {
                "vertices" => {
                    let count = tokens
                        .next()
                        .and_then(|c| c.parse::<usize>().ok())
                        .ok_or_else(|| NetworkError::Parse {
                            line,
                            message: "`*Vertices` needs a node count".to_string(),
                        })?;
                    vertex_count = Some(count);
                    names = vec![None; count];
                    Section::Vertices
                }
                "edges" | "arcs" => {
                    if vertex_count.is_none() {
                        return Err(NetworkError::Parse {
                            line,
                            message: "links before `*Vertices`".to_string(),
                        });
                    }
                    Section::Links
                }
                other => {
                    return Err(NetworkError::Parse {
                        line,
                        message: format!("unsupported section `*{other}`"),
                    })
                }
            };
            continue;
        }
        let count = vertex_count.unwrap_or(0);
        let node = |token: &str| -> Result<usize, NetworkError> {
            match token.parse::<usize>() {
                Ok(v) if (1..=count).contains(&v) => Ok(v - 1),
                _ => Err(NetworkError::Parse {
                    line,
                    message: format!("vertex id {token:?} not in 1..={count}"),
                }),
            }
        };
        match section {
            Section::None => {
                return Err(NetworkError::Parse {
                    line,
                    message: "data before any section header".to_string(),
                })
            }
            Section::Vertices => {
                let (id, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
                let v = node(id)?;
                let rest = rest.trim();
                let name = if let Some(quoted) = rest.strip_prefix('"') {
                    quoted.split('"').next().unwrap_or("").to_string()
                } else {
                    rest.split_whitespace().next().unwrap_or(id).to_string()
                };
                names[v] = Some(name);
            }
            Section::Links => {
                let mut tokens = body.split_whitespace();
                let (Some(s), Some(t)) = (tokens.next(), tokens.next()) else {
                    return Err(NetworkError::Parse {
                        line,
                        message: "expected `source target [weight]`".to_string(),
                    });
                };
                let (s, t) = (node(s)?, node(t)?);
                edges.push((s, t, parse_weight(tokens.next(), line)?));
            }
        }
    }
    vertex_count.ok_or(NetworkError::Empty)?;
    if edges.is_empty() {
        return Err(NetworkError::Empty);
    }
    let ids = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| name.unwrap_or_else(|| (i + 1).to_string()))
        .collect();
    Network::with_ids(ids, directed, edges)
}

/// Load and validate a network file.
pub fn load_network<F: Scalar>(
    path: &Path,
    format: NetworkFormat,
    directed: bool,
) -> Result<Network<F>, NetworkError> {
    let text = read(path)?;
    match format {
        NetworkFormat::EdgeList => parse_edge_list(&text, directed),
        NetworkFormat::Pajek => parse_pajek(&text, directed),
    }
}

/// Parse `node<TAB>label` rows against the ids of `network`.
pub fn parse_metadata<F: Scalar>(
    text: &str,
    network: &Network<F>,
) -> Result<MetadataAnnotation, NetworkError> {
    let index = network.index_of();
    let mut labels: Vec<Option<String>> = vec![None; network.node_count()];
    let mut order: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(body) = content(raw, '#') else {
            continue;
        };
        let (node, label) = match body.split_once('\t') {
            Some((node, label)) => (node.trim(), label.trim()),
            None => {
                let mut tokens = body.split_whitespace();
                match (tokens.next(), tokens.next()) {
                    (Some(n), Some(l)) => (n, l),
                    _ => {
                        return Err(NetworkError::Parse {
                            line,
                            message: "expected `node<TAB>label`".to_string(),
                        })
                    }
                }
            }
        };
        let &v = index.get(node).ok_or_else(|| NetworkError::UnknownNode {
            line,
            node: node.to_string(),
        })?;
        match &labels[v] {
            Some(existing) if existing != label => {
                return Err(NetworkError::ConflictingLabel {
                    node: node.to_string(),
                    first: existing.clone(),
                    second: label.to_string(),
                })
            }
            Some(_) => {}
            None => {
                labels[v] = Some(label.to_string());
                order.push(label.to_string());
            }
        }
    }
    let mut per_node = Vec::with_capacity(labels.len());
    for (v, label) in labels.into_iter().enumerate() {
        per_node.push(label.ok_or_else(|| NetworkError::MissingLabel(network.ids()[v].clone()))?);
    }

    // Universe in file order, not node order.
    let mut universe: Vec<String> = Vec::new();
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    for label in &order {
        if !lookup.contains_key(label.as_str()) {
            lookup.insert(label, universe.len());
            universe.push(label.clone());
        }
    }
    let assignment = per_node.iter().map(|l| lookup[l.as_str()]).collect();
    MetadataAnnotation::new(universe, assignment)
}

pub fn load_metadata<F: Scalar>(
    path: &Path,
    network: &Network<F>,
) -> Result<MetadataAnnotation, NetworkError> {
    parse_metadata(&read(path)?, network)
}

/// Render `node<TAB>module` rows in node order.
pub fn format_partition(partition: &Partition, ids: &[String]) -> String {
    let mut out = String::new();
    for (v, &m) in partition.assignment().iter().enumerate() {
        writeln!(out, "{}\t{}", ids[v], m).expect("writing to a String");
    }
    out
}

pub fn write_partition(partition: &Partition, ids: &[String], path: &Path) -> Result<(), NetworkError> {
    write(path, &format_partition(partition, ids))
}

/// Parse `node<TAB>module` rows; every node in `ids` must appear once.
pub fn parse_partition(text: &str, ids: &[String]) -> Result<Partition, NetworkError> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut modules: Vec<Option<usize>> = vec![None; ids.len()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(body) = content(raw, '#') else {
            continue;
        };
        let mut tokens = body.split_whitespace();
        let (Some(node), Some(module)) = (tokens.next(), tokens.next()) else {
            return Err(NetworkError::Parse {
                line,
                message: "expected `node<TAB>module`".to_string(),
            });
        };
        let &v = index.get(node).ok_or_else(|| NetworkError::UnknownNode {
            line,
            node: node.to_string(),
        })?;
        let module: usize = module.parse().map_err(|_| NetworkError::Parse {
            line,
            message: format!("invalid module id {module:?}"),
        })?;
        if modules[v].replace(module).is_some_and(|prev| prev != module) {
            return Err(NetworkError::InvalidPartition(format!(
                "node {node} assigned twice"
            )));
        }
    }
    let membership: Vec<usize> = modules
        .into_iter()
        .enumerate()
        .map(|(v, m)| {
            m.ok_or_else(|| NetworkError::InvalidPartition(format!("missing module for node {}", ids[v])))
        })
        .collect::<Result<_, _>>()?;
    Ok(Partition::from_membership(&membership))
}

pub fn read_partition(path: &Path, ids: &[String]) -> Result<Partition, NetworkError> {
    parse_partition(&read(path)?, ids)
}

/// Render the canonical raw edges as an edge list in external ids.
pub fn format_edge_list<F: Scalar>(network: &Network<F>) -> String {
    let mut out = String::new();
    for &(s, t, w) in network.edges() {
        writeln!(out, "{}\t{}\t{}", network.ids()[s], network.ids()[t], w).expect("writing to a String");
    }
    out
}

pub fn write_edge_list<F: Scalar>(network: &Network<F>, path: &Path) -> Result<(), NetworkError> {
    write(path, &format_edge_list(network))
}

pub fn format_metadata(metadata: &MetadataAnnotation, ids: &[String]) -> String {
    let mut out = String::new();
    for (v, &label) in metadata.assignment().iter().enumerate() {
        writeln!(out, "{}\t{}", ids[v], metadata.labels()[label]).expect("writing to a String");
    }
    out
}

pub fn write_metadata(metadata: &MetadataAnnotation, ids: &[String], path: &Path) -> Result<(), NetworkError> {
    write(path, &format_metadata(metadata, ids))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight(network: &Network, src: usize, dst: usize) -> f64 {
        network
            .out_edges(src)
            .find(|&(t, _)| t == dst)
            .map(|(_, w)| w)
            .unwrap_or(0.0)
    }

    #[test]
    fn single_edge_normalizes_to_one() {
        let net: Network = parse_edge_list("0 1 1.0\n", false).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(weight(&net, 0, 1), 1.0);
        assert_eq!(weight(&net, 1, 0), 1.0);
    }

    #[test]
    fn negative_weight_reports_line() {
        let err = parse_edge_list::<f64>("# header\n0 1 1\n1 2 -1\n", false).unwrap_err();
        match err {
            NetworkError::NonPositiveWeight { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_edge_list::<f64>("0 1 0\n", false).is_err());
        assert!(matches!(
            parse_edge_list::<f64>("0 1 abc\n", false),
            Err(NetworkError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn path_middle_node_splits_evenly() {
        let net: Network = parse_edge_list("0 1 1.0\n1 2 1.0\n", false).unwrap();
        assert_eq!(weight(&net, 1, 0), 0.5);
        assert_eq!(weight(&net, 1, 2), 0.5);
        assert_eq!(weight(&net, 0, 1), 1.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            parse_edge_list::<f64>("# nothing\n\n", false),
            Err(NetworkError::Empty)
        ));
    }

    #[test]
    fn duplicate_edges_sum_and_default_weight() {
        let net: Network = parse_edge_list("0 1\n1 0 2\n1 2 1\n", false).unwrap();
        assert_eq!(net.edges(), &[(0, 1, 3.0), (1, 2, 1.0)]);
        assert_eq!(weight(&net, 1, 0), 0.75);
    }

    #[test]
    fn string_ids_keep_first_appearance_and_integers_sort() {
        let net: Network = parse_edge_list("b a\nc b\n", false).unwrap();
        assert_eq!(net.ids(), &["b", "a", "c"]);
        let net: Network = parse_edge_list("10 3\n3 7\n", false).unwrap();
        assert_eq!(net.ids(), &["3", "7", "10"]);
    }

    #[test]
    fn self_loops_are_flagged() {
        let net: Network = parse_edge_list("0 0 1\n0 1 1\n", false).unwrap();
        assert!(net.has_self_loops());
        assert_eq!(weight(&net, 0, 0), 0.5);
        assert_eq!(weight(&net, 1, 0), 1.0);
    }

    #[test]
    fn pajek_subset() {
        let text = "% comment\n*Vertices 3\n1 \"alice\"\n2 \"bob\"\n3 \"carol\"\n*Edges\n1 2 2\n2 3\n";
        let net: Network = parse_pajek(text, false).unwrap();
        assert_eq!(net.ids(), &["alice", "bob", "carol"]);
        assert_eq!(net.edges(), &[(0, 1, 2.0), (1, 2, 1.0)]);
        let arcs: Network = parse_pajek("*Vertices 2\n*Arcs\n1 2\n2 1 3\n", true).unwrap();
        assert_eq!(arcs.ids(), &["1", "2"]);
        assert_eq!(arcs.edges().len(), 2);
        assert!(parse_pajek::<f64>("*Vertices 2\n*Edges\n1 5\n", false).is_err());
    }

    #[test]
    fn metadata_rows() {
        let net: Network = parse_edge_list("0 1\n1 2\n", false).unwrap();
        let meta = parse_metadata("0\tA\n1\tA\n2\tB\n", &net).unwrap();
        assert_eq!(meta.labels(), &["A", "B"]);
        assert_eq!(meta.assignment(), &[0, 0, 1]);

        let two: Network = parse_edge_list("0 1\n", false).unwrap();
        let meta = parse_metadata("0\tA\n1\tB\n", &two).unwrap();
        assert_eq!(meta.labels(), &["A", "B"]);

        let err = parse_metadata("0\tA\n", &two).unwrap_err();
        assert_eq!(err.to_string(), "missing label for node 1");
        assert!(matches!(
            parse_metadata("0\tA\n0\tB\n1\tA\n", &two),
            Err(NetworkError::ConflictingLabel { .. })
        ));
        assert!(matches!(
            parse_metadata("0\tA\n1\tA\n9\tA\n", &two),
            Err(NetworkError::UnknownNode { line: 3, .. })
        ));
    }

    #[test]
    fn metadata_universe_follows_file_order() {
        let net: Network = parse_edge_list("0 1\n", false).unwrap();
        let meta = parse_metadata("1\tB\n0\tA\n", &net).unwrap();
        assert_eq!(meta.labels(), &["B", "A"]);
        assert_eq!(meta.assignment(), &[1, 0]);
    }

    #[test]
    fn partition_text() {
        let ids = vec!["0".to_string(), "1".to_string()];
        assert_eq!(format_partition(&Partition::single_module(2), &ids), "0\t0\n1\t0\n");
        assert_eq!(format_partition(&Partition::singletons(2), &ids), "0\t0\n1\t1\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        let partition = Partition::new(vec![1, 0, 1]).unwrap();
        let ids: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        write_partition(&partition, &ids, &path).unwrap();
        let back = read_partition(&path, &ids).unwrap();
        assert!(back.same_as(&partition));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2]).is_err());
        let p = Partition::from_membership(&[7, 3, 7, 9]);
        assert_eq!(p.assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.sizes(), &[2, 1, 1]);
        assert_eq!(p.sizes().iter().sum::<usize>(), p.node_count());
    }

    #[test]
    fn components_and_dangling() {
        let net: Network = parse_edge_list("0 1\n2 3\n", false).unwrap();
        assert_eq!(net.components(), (2, vec![0, 0, 1, 1]));
        let directed: Network = parse_edge_list("0 1\n1 2\n", true).unwrap();
        assert_eq!(directed.dangling_nodes(), vec![2]);
        assert!(directed.is_connected());
    }
}
