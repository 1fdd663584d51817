//! Independent oracles shared by the integration tests. None of these touch
//! the library's grid index, union-find or winding code.
#![allow(dead_code)]

use std::collections::VecDeque;

use firewall_percolation::{torus_distance, AdjacencyGraph, ClusterReport, DeviceSet};

/// All-pairs adjacency, neighbor lists sorted.
pub fn brute_force_adjacency(devices: &DeviceSet, range: f64) -> Vec<Vec<usize>> {
    let n = devices.count();
    let region = devices.region();
    (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u && torus_distance(devices.position(u), devices.position(v), region) <= range)
                .collect()
        })
        .collect()
}

/// Components by breadth-first search, labelled by smallest member.
pub fn bfs_clusters(adjacency: &[Vec<usize>], active: &[bool]) -> ClusterReport {
    let n = adjacency.len();
    let mut labels = vec![None; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if !active[s] || labels[s].is_some() {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        labels[s] = Some(id);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adjacency[u] {
                if active[v] && labels[v].is_none() {
                    labels[v] = Some(id);
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ClusterReport {
        labels,
        num_clusters: sizes.len(),
        max_cluster_size: sizes.first().copied().unwrap_or(0),
        sizes,
    }
}

pub fn graph_adjacency(graph: &AdjacencyGraph) -> Vec<Vec<usize>> {
    (0..graph.vertex_count()).map(|v| graph.neighbors(v).to_vec()).collect()
}

/// Winding verdict from a 3×3 tiling of the square.
///
/// Copies every active device into nine tiles, links copies within `range`
/// with plain Euclidean distance (no wrap), and reports x-winding if the
/// centre copy of some device reaches a copy of itself in another tile
/// column (y likewise with rows).
pub fn tiling_wrap_oracle(devices: &DeviceSet, range: f64, active: &[bool]) -> (bool, bool) {
    let l = devices.region().side_length();
    let base: Vec<usize> = (0..devices.count()).filter(|&v| active[v]).collect();
    let m = base.len();
    // copy index = tile * m + k, tile = row * 3 + col
    let mut pts = Vec::with_capacity(9 * m);
    for row in 0..3 {
        for col in 0..3 {
            for &v in &base {
                let p = devices.position(v);
                pts.push((p.x + col as f64 * l, p.y + row as f64 * l));
            }
        }
    }
    // Bucket copies into square cells of side `range` (non-periodic).
    let cells = ((3.0 * l / range).floor() as usize).max(1);
    let cell = 3.0 * l / cells as f64;
    let key = |x: f64| ((x / cell) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in pts.iter().enumerate() {
        buckets[key(y) * cells + key(x)].push(i);
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (cx, cy) = (key(x) as i64, key(y) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (cx + dx, cy + dy);
                if nx < 0 || ny < 0 || nx >= cells as i64 || ny >= cells as i64 {
                    continue;
                }
                for &j in &buckets[ny as usize * cells + nx as usize] {
                    if j != i && (x - pts[j].0).hypot(y - pts[j].1) <= range {
                        adjacency[i].push(j);
                    }
                }
            }
        }
    }
    let report = bfs_clusters(&adjacency, &vec![true; pts.len()]);
    let (mut wx, mut wy) = (false, false);
    let centre = 4;
    for k in 0..m {
        let label = report.labels[centre * m + k];
        for tile in 0..9 {
            if tile == centre || report.labels[tile * m + k] != label {
                continue;
            }
            let (row, col) = (tile / 3, tile % 3);
            wx |= col != 1;
            wy |= row != 1;
        }
    }
    (wx, wy)
}

/// Protected mask by checking every (device, firewall) pair.
pub fn brute_force_zone_mask(devices: &DeviceSet, firewalls: &[usize], radius: f64) -> Vec<bool> {
    let region = devices.region();
    (0..devices.count())
        .map(|v| {
            firewalls
                .iter()
                .any(|&f| torus_distance(devices.position(v), devices.position(f), region) <= radius)
        })
        .collect()
}

/// Non-increasing least-squares fit (pool adjacent violators).
pub fn isotonic_non_increasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().unwrap();
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// Three-point centred moving average; ends average with their one neighbor.
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Index of an interior peak if the sequence rises to it and falls after it,
/// ignoring reversals smaller than `slack`.
pub fn interior_peak(values: &[f64], slack: f64) -> Option<usize> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let peak = (0..n).max_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    if peak == 0 || peak == n - 1 {
        return None;
    }
    let rises = values[..=peak].windows(2).all(|w| w[1] >= w[0] - slack);
    let falls = values[peak..].windows(2).all(|w| w[1] <= w[0] + slack);
    let clear = values[0] < values[peak] - slack && values[n - 1] < values[peak] - slack;
    (rises && falls && clear).then_some(peak)
}
