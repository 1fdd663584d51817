//! Range-based random geometric graph on the torus and its connected components.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::CellGrid;
use crate::region::{DeviceSet, Point, TorusRegion};
use crate::union_find::UnionFind;

/// Undirected graph linking every pair of devices within `range` meters.
///
/// Neighbor lists are sorted by id, symmetric, and free of self-loops.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    devices: DeviceSet,
    range: f64,
    adjacency: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn region(&self) -> &TorusRegion {
        self.devices.region()
    }

    pub fn devices(&self) -> &DeviceSet {
        &self.devices
    }

    pub fn positions(&self) -> &[Point] {
        self.devices.positions()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Writes one `u v` line per edge (0-based, `u < v`).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Parses the `u v` edge-list format written by [`AdjacencyGraph::write_edge_list`].
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|source| crate::Error::Io {
            path: "<edge list>".into(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => {
                return Err(invalid(
                    "edge_list",
                    format!("line {}: expected `u v`, got `{line}`", lineno + 1),
                ))
            }
        }
    }
    Ok(edges)
}

/// Links every pair of devices whose torus distance is at most `range`.
///
/// Edge discovery uses a [`CellGrid`] with cells of width ≥ `range`, so only
/// the 3×3 block of cells around each device is examined.
pub fn build_rgg(devices: &DeviceSet, range: f64) -> Result<AdjacencyGraph> {
    let region = *devices.region();
    if !range.is_finite() || range <= 0.0 {
        return Err(invalid("range", format!("must be positive, got {range}")));
    }
    if range > region.side_length() / 2.0 {
        return Err(invalid(
            "range",
            format!(
                "{range} exceeds half the side length {}; wrapped images would be ambiguous",
                region.side_length()
            ),
        ));
    }
    let positions = devices.positions();
    let grid = CellGrid::new(devices, range);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); positions.len()];
    for (u, &p) in positions.iter().enumerate() {
        grid.for_each_within(positions, p, range, |v| {
            if v > u {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        });
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(AdjacencyGraph {
        devices: devices.clone(),
        range,
        adjacency,
    })
}

/// Connected components of an induced subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Cluster id per vertex, `None` for inactive vertices. Ids are assigned
    /// in order of each cluster's smallest vertex.
    pub labels: Vec<Option<usize>>,
    pub num_clusters: usize,
    /// Cluster sizes, largest first.
    pub sizes: Vec<usize>,
    pub max_cluster_size: usize,
}

impl ClusterReport {
    /// Builds a canonical report from any per-vertex root assignment.
    pub(crate) fn from_roots(roots: &[Option<usize>]) -> Self {
        let mut id_of_root = std::collections::HashMap::new();
        let mut counts: Vec<usize> = Vec::new();
        let labels: Vec<Option<usize>> = roots
            .iter()
            .map(|r| {
                r.map(|root| {
                    let next = id_of_root.len();
                    let id = *id_of_root.entry(root).or_insert(next);
                    if id == counts.len() {
                        counts.push(0);
                    }
                    counts[id] += 1;
                    id
                })
            })
            .collect();
        let mut sizes = counts;
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self {
            labels,
            num_clusters: sizes.len(),
            max_cluster_size: sizes.first().copied().unwrap_or(0),
            sizes,
        }
    }

    pub fn active_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Size of the cluster containing `v`, 0 if `v` is inactive.
    pub fn cluster_size_of(&self, v: usize) -> usize {
        match self.labels[v] {
            None => 0,
            Some(id) => self.labels.iter().filter(|l| **l == Some(id)).count(),
        }
    }
}

/// Components of the subgraph induced on vertices with `active[v] == true`.
///
/// Panics if `active.len()` differs from the vertex count.
pub fn connected_components(graph: &AdjacencyGraph, active: &[bool]) -> ClusterReport {
    assert_eq!(
        active.len(),
        graph.vertex_count(),
        "mask length must equal vertex count"
    );
    let mut uf = UnionFind::new(graph.vertex_count());
    for (u, v) in graph.edges() {
        if active[u] && active[v] {
            uf.union(u, v);
        }
    }
    let roots: Vec<Option<usize>> = (0..graph.vertex_count())
        .map(|v| active[v].then(|| uf.find(v)))
        .collect();
    ClusterReport::from_roots(&roots)
}
