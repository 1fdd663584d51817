//! Spanning (winding) detection for the susceptible subgraph on the torus.
//!
//! Each vertex remembers which periodic image of itself it occupies relative
//! to its set root. An edge joins `u` to the image of `v` at minimal
//! displacement; when an edge closes a cycle whose images disagree, the
//! cluster winds around the torus along every axis where they differ.
//! Image offsets are integers, so the test is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::region::{Point, TorusRegion};
use crate::rgg::{connected_components, AdjacencyGraph, ClusterReport};

/// How per-axis winding turns into a percolation verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpanningRule {
    /// Spans horizontally and vertically.
    #[default]
    Both,
    /// Spans along at least one axis.
    Either,
}

impl SpanningRule {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanningRule::Both => "both",
            SpanningRule::Either => "either",
        }
    }

    pub fn verdict(self, wraps_x: bool, wraps_y: bool) -> bool {
        match self {
            SpanningRule::Both => wraps_x && wraps_y,
            SpanningRule::Either => wraps_x || wraps_y,
        }
    }
}

impl fmt::Display for SpanningRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpanningRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "both" => Ok(SpanningRule::Both),
            "either" => Ok(SpanningRule::Either),
            other => Err(Error::UnknownSpanningRule(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PercolationOutcome {
    pub wraps_x: bool,
    pub wraps_y: bool,
    pub percolates: bool,
    pub rule: SpanningRule,
    /// `[x, y]` winding flags per cluster, indexed by cluster label.
    pub cluster_wraps: Vec<[bool; 2]>,
    pub cluster_report: ClusterReport,
}

impl PercolationOutcome {
    /// Verdict under another rule without recomputing.
    pub fn percolates_under(&self, rule: SpanningRule) -> bool {
        rule.verdict(self.wraps_x, self.wraps_y)
    }
}

type Image = [i64; 2];

/// Union-find over active vertices that tracks periodic image offsets.
///
/// One instance per realization; not for concurrent mutation.
#[derive(Debug, Clone)]
pub struct WindingClusters<'a> {
    region: TorusRegion,
    positions: &'a [Point],
    active: &'a [bool],
    parent: Vec<usize>,
    size: Vec<usize>,
    /// Image of a vertex relative to its parent's frame.
    offset: Vec<Image>,
    /// Winding flags, meaningful at roots.
    wraps: Vec<[bool; 2]>,
}

impl<'a> WindingClusters<'a> {
    pub fn new(graph: &'a AdjacencyGraph, active: &'a [bool]) -> Self {
        assert_eq!(
            active.len(),
            graph.vertex_count(),
            "mask length must equal vertex count"
        );
        let n = graph.vertex_count();
        Self {
            region: *graph.region(),
            positions: graph.positions(),
            active,
            parent: (0..n).collect(),
            size: vec![1; n],
            offset: vec![[0, 0]; n],
            wraps: vec![[false, false]; n],
        }
    }

    /// Root of `x` and the image of `x` in the root's frame.
    fn find(&mut self, x: usize) -> (usize, Image) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        // Walk back down so each node's offset becomes relative to the root.
        let mut acc = [0i64, 0i64];
        for &node in path.iter().rev() {
            acc[0] += self.offset[node][0];
            acc[1] += self.offset[node][1];
            self.offset[node] = acc;
            self.parent[node] = root;
        }
        (root, if x == root { [0, 0] } else { self.offset[x] })
    }

    /// Which neighboring tile the minimal image of `v` seen from `u` lies in.
    fn edge_image(&self, u: usize, v: usize) -> Image {
        let (pu, pv) = (self.positions[u], self.positions[v]);
        let (dx, dy) = self.region.displacement(pu, pv);
        let tile = |raw: f64, wrapped: f64| -> i64 {
            if wrapped == raw {
                0
            } else if wrapped < raw {
                -1
            } else {
                1
            }
        };
        [tile(pv.x - pu.x, dx), tile(pv.y - pu.y, dy)]
    }

    /// Processes edge `(u, v)`; ignored unless both endpoints are active.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !(self.active[u] && self.active[v]) || u == v {
            return;
        }
        let shift = self.edge_image(u, v);
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        // Frame of rv expressed in the frame of ru.
        let rel = [ou[0] + shift[0] - ov[0], ou[1] + shift[1] - ov[1]];
        if ru == rv {
            let w = &mut self.wraps[ru];
            w[0] |= rel[0] != 0;
            w[1] |= rel[1] != 0;
            return;
        }
        let merged = [
            self.wraps[ru][0] | self.wraps[rv][0],
            self.wraps[ru][1] | self.wraps[rv][1],
        ];
        let (big, small, small_offset) = if self.size[ru] >= self.size[rv] {
            (ru, rv, rel)
        } else {
            (rv, ru, [-rel[0], -rel[1]])
        };
        self.parent[small] = big;
        self.offset[small] = small_offset;
        self.size[big] += self.size[small];
        self.wraps[big] = merged;
    }

    pub fn finish(mut self, rule: SpanningRule) -> PercolationOutcome {
        let n = self.parent.len();
        let roots: Vec<Option<usize>> = (0..n)
            .map(|v| self.active[v].then(|| self.find(v).0))
            .collect();
        let report = ClusterReport::from_roots(&roots);
        let mut cluster_wraps = vec![[false, false]; report.num_clusters];
        for (root, label) in roots.iter().zip(&report.labels) {
            if let (Some(root), Some(label)) = (*root, *label) {
                cluster_wraps[label] = self.wraps[root];
            }
        }
        let wraps_x = cluster_wraps.iter().any(|w| w[0]);
        let wraps_y = cluster_wraps.iter().any(|w| w[1]);
        PercolationOutcome {
            wraps_x,
            wraps_y,
            percolates: rule.verdict(wraps_x, wraps_y),
            rule,
            cluster_wraps,
            cluster_report: report,
        }
    }
}

/// Spanning verdict and cluster statistics of the susceptible subgraph.
pub fn detect_spanning(
    graph: &AdjacencyGraph,
    susceptible: &[bool],
    rule: SpanningRule,
) -> PercolationOutcome {
    let mut clusters = WindingClusters::new(graph, susceptible);
    for (u, v) in graph.edges() {
        clusters.add_edge(u, v);
    }
    clusters.finish(rule)
}

/// Cluster statistics of the susceptible subgraph.
pub fn cluster_stats(graph: &AdjacencyGraph, susceptible: &[bool]) -> ClusterReport {
    connected_components(graph, susceptible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{sample_ppp, DeviceSet};
    use crate::rgg::build_rgg;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(horizontal: bool) -> AdjacencyGraph {
        let region = TorusRegion::new(4000.0).unwrap();
        let pts = (0..20).map(|i| {
            let t = i as f64 * 200.0 + 10.0;
            if horizontal {
                Point::new(t, 1234.0)
            } else {
                Point::new(777.0, t)
            }
        });
        build_rgg(&DeviceSet::from_positions(region, pts).unwrap(), 250.0).unwrap()
    }

    #[test]
    fn empty_mask_does_not_percolate() {
        let g = ring(true);
        let out = detect_spanning(&g, &[false; 20], SpanningRule::Either);
        assert!(!out.wraps_x && !out.wraps_y && !out.percolates);
        assert_eq!(out.cluster_report.num_clusters, 0);
    }

    #[test]
    fn horizontal_ring_winds_in_x_only() {
        let g = ring(true);
        let all = vec![true; 20];
        let both = detect_spanning(&g, &all, SpanningRule::Both);
        assert!(both.wraps_x);
        assert!(!both.wraps_y);
        assert!(!both.percolates);
        let either = detect_spanning(&g, &all, SpanningRule::Either);
        assert!(either.percolates);
        assert_eq!(either.cluster_report.num_clusters, 1);
    }

    #[test]
    fn vertical_ring_winds_in_y_only() {
        let g = ring(false);
        let out = detect_spanning(&g, &[true; 20], SpanningRule::Either);
        assert!(!out.wraps_x && out.wraps_y);
    }

    #[test]
    fn broken_ring_does_not_wind() {
        let g = ring(true);
        let mut mask = vec![true; 20];
        mask[7] = false;
        let out = detect_spanning(&g, &mask, SpanningRule::Either);
        assert!(!out.percolates);
        assert_eq!(out.cluster_report.sizes, vec![19]);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("both".parse::<SpanningRule>().unwrap(), SpanningRule::Both);
        assert_eq!("either".parse::<SpanningRule>().unwrap(), SpanningRule::Either);
        assert!("any".parse::<SpanningRule>().is_err());
        assert_eq!(serde_json::to_string(&SpanningRule::Either).unwrap(), "\"either\"");
    }

    #[test]
    fn edge_order_does_not_matter() {
        let region = TorusRegion::new(1000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..30u64 {
            let d = sample_ppp(region, 230.0, seed).unwrap();
            let g = build_rgg(&d, 90.0).unwrap();
            let mask: Vec<bool> = (0..d.count()).map(|i| !(i + seed as usize).is_multiple_of(9)).collect();
            let reference = detect_spanning(&g, &mask, SpanningRule::Both);
            let mut edges: Vec<(usize, usize)> = g.edges().collect();
            for _ in 0..3 {
                edges.shuffle(&mut rng);
                let mut wc = WindingClusters::new(&g, &mask);
                for &(u, v) in &edges {
                    // Flip orientation too.
                    if (u + v) % 2 == 0 {
                        wc.add_edge(u, v)
                    } else {
                        wc.add_edge(v, u)
                    }
                }
                assert_eq!(wc.finish(SpanningRule::Both), reference);
            }
        }
    }

    #[test]
    fn wrapping_clusters_are_long_enough() {
        let region = TorusRegion::new(1000.0).unwrap();
        let range = 90.0;
        let min_hops = (1000.0f64 / range).ceil() as usize;
        let mut seen = 0;
        for seed in 0..40u64 {
            let d = sample_ppp(region, 180.0, seed).unwrap();
            let g = build_rgg(&d, range).unwrap();
            let out = detect_spanning(&g, &vec![true; d.count()], SpanningRule::Either);
            let mut sizes = vec![0usize; out.cluster_report.num_clusters];
            for l in out.cluster_report.labels.iter().flatten() {
                sizes[*l] += 1;
            }
            for (label, w) in out.cluster_wraps.iter().enumerate() {
                if w[0] || w[1] {
                    seen += 1;
                    assert!(sizes[label] >= min_hops);
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn cluster_stats_matches_components() {
        let region = TorusRegion::new(800.0).unwrap();
        let d = sample_ppp(region, 300.0, 2).unwrap();
        let g = build_rgg(&d, 60.0).unwrap();
        let mask: Vec<bool> = (0..d.count()).map(|i| i % 4 != 1).collect();
        assert_eq!(
            cluster_stats(&g, &mask),
            detect_spanning(&g, &mask, SpanningRule::Both).cluster_report
        );
    }
}
