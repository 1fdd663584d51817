//! Firewall selection heuristics and secured-zone removal.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::CellGrid;
use crate::region::{torus_distance, DeviceSet, Point, TorusRegion};
use crate::rgg::AdjacencyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "degree")]
    DegreeAware,
    #[serde(rename = "random-dc")]
    RandomDc,
    #[serde(rename = "degree-dc")]
    DegreeAwareDc,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Random,
        PolicyKind::DegreeAware,
        PolicyKind::RandomDc,
        PolicyKind::DegreeAwareDc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::DegreeAware => "degree",
            PolicyKind::RandomDc => "random-dc",
            PolicyKind::DegreeAwareDc => "degree-dc",
        }
    }

    pub fn has_distance_constraint(self) -> bool {
        matches!(self, PolicyKind::RandomDc | PolicyKind::DegreeAwareDc)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirewallPolicy {
    pub kind: PolicyKind,
    /// Minimum pairwise firewall spacing in meters; only read by the DC kinds.
    pub min_distance: f64,
}

impl FirewallPolicy {
    pub fn new(kind: PolicyKind, min_distance: f64) -> Result<Self> {
        if kind.has_distance_constraint() && !(min_distance.is_finite() && min_distance > 0.0) {
            return Err(invalid(
                "min_distance",
                format!("{kind} needs a positive minimum distance, got {min_distance}"),
            ));
        }
        Ok(Self { kind, min_distance })
    }

    /// Policy with the default spacing of two zone radii (tangent zones).
    pub fn with_zone_radius(kind: PolicyKind, zone_radius: f64) -> Result<Self> {
        Self::new(kind, 2.0 * zone_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirewallSelection {
    /// Selected device ids in acceptance order.
    pub ids: Vec<usize>,
    /// The distance constraint could not be met and rejected devices filled the quota.
    pub dc_relaxed: bool,
}

/// Number of firewalls for `fraction` of `n` devices, rounding halves up.
pub fn firewall_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 0.5).floor() as usize).min(n)
}

/// Device ids by descending degree, ties broken by lower id.
fn degree_order(graph: &AdjacencyGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.vertex_count()).collect();
    order.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
    order
}

/// Greedy scan accepting a device iff it keeps `min_distance` to every accepted one.
fn greedy_spaced(
    order: &[usize],
    positions: &[Point],
    region: &TorusRegion,
    min_distance: f64,
    k: usize,
) -> FirewallSelection {
    let mut ids = Vec::with_capacity(k);
    let mut rejected = Vec::new();
    for &cand in order {
        if ids.len() == k {
            break;
        }
        let p = positions[cand];
        if ids
            .iter()
            .all(|&f: &usize| torus_distance(p, positions[f], region) >= min_distance)
        {
            ids.push(cand);
        } else {
            rejected.push(cand);
        }
    }
    let dc_relaxed = ids.len() < k;
    if dc_relaxed {
        let missing = k - ids.len();
        ids.extend(rejected.into_iter().take(missing));
    }
    FirewallSelection { ids, dc_relaxed }
}

/// Picks `round(fraction × N)` firewall devices according to `policy`.
///
/// Degrees are those of the full graph. DC variants scan their candidate order
/// greedily; when the scan runs out before the quota is met the remaining
/// slots are taken from the rejected devices in scan order and `dc_relaxed`
/// is set.
pub fn select_firewalls(
    graph: &AdjacencyGraph,
    policy: &FirewallPolicy,
    fraction: f64,
    seed: u64,
) -> Result<FirewallSelection> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid("fraction", format!("must lie in [0, 1], got {fraction}")));
    }
    let n = graph.vertex_count();
    let k = firewall_count(fraction, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selection = match policy.kind {
        PolicyKind::Random => FirewallSelection {
            ids: index::sample(&mut rng, n, k).into_vec(),
            dc_relaxed: false,
        },
        PolicyKind::DegreeAware => FirewallSelection {
            ids: degree_order(graph).into_iter().take(k).collect(),
            dc_relaxed: false,
        },
        PolicyKind::RandomDc => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            greedy_spaced(&order, graph.positions(), graph.region(), policy.min_distance, k)
        }
        PolicyKind::DegreeAwareDc => greedy_spaced(
            &degree_order(graph),
            graph.positions(),
            graph.region(),
            policy.min_distance,
            k,
        ),
    };
    Ok(selection)
}

/// Firewalls plus the protected/susceptible partition they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarantineLayout {
    pub firewall_ids: Vec<usize>,
    pub protected: Vec<bool>,
    pub susceptible: Vec<bool>,
    pub zone_radius: f64,
    pub dc_relaxed: bool,
}

impl QuarantineLayout {
    pub fn protected_count(&self) -> usize {
        self.protected.iter().filter(|&&p| p).count()
    }

    pub fn susceptible_count(&self) -> usize {
        self.susceptible.iter().filter(|&&s| s).count()
    }
}

/// Marks every device within `zone_radius` of a firewall as protected.
pub fn apply_secured_zones(
    devices: &DeviceSet,
    firewall_ids: &[usize],
    zone_radius: f64,
) -> Result<QuarantineLayout> {
    let region = devices.region();
    if !(zone_radius.is_finite() && zone_radius > 0.0 && zone_radius <= region.side_length() / 2.0) {
        return Err(invalid(
            "zone_radius",
            format!(
                "must lie in (0, {}], got {zone_radius}",
                region.side_length() / 2.0
            ),
        ));
    }
    let n = devices.count();
    if let Some(&bad) = firewall_ids.iter().find(|&&f| f >= n) {
        return Err(Error::DeviceOutOfRange(bad));
    }
    let mut protected = vec![false; n];
    if !firewall_ids.is_empty() {
        let grid = CellGrid::new(devices, zone_radius);
        let positions = devices.positions();
        for &f in firewall_ids {
            protected[f] = true;
            grid.for_each_within(positions, positions[f], zone_radius, |v| protected[v] = true);
        }
    }
    let susceptible = protected.iter().map(|&p| !p).collect();
    Ok(QuarantineLayout {
        firewall_ids: firewall_ids.to_vec(),
        protected,
        susceptible,
        zone_radius,
        dc_relaxed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::sample_ppp;
    use crate::rgg::build_rgg;

    fn random_graph(seed: u64) -> AdjacencyGraph {
        let region = TorusRegion::new(2000.0).unwrap();
        let d = sample_ppp(region, 80.0, seed).unwrap();
        build_rgg(&d, 200.0).unwrap()
    }

    #[test]
    fn policy_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("degree_dc".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn dc_policy_requires_distance() {
        assert!(FirewallPolicy::new(PolicyKind::RandomDc, 0.0).is_err());
        assert!(FirewallPolicy::new(PolicyKind::Random, 0.0).is_ok());
        assert_eq!(
            FirewallPolicy::with_zone_radius(PolicyKind::DegreeAwareDc, 200.0)
                .unwrap()
                .min_distance,
            400.0
        );
    }

    #[test]
    fn count_rounds_half_up() {
        assert_eq!(firewall_count(0.5, 3), 2);
        assert_eq!(firewall_count(0.25, 10), 3);
        assert_eq!(firewall_count(0.24, 10), 2);
        assert_eq!(firewall_count(1.0, 7), 7);
        assert_eq!(firewall_count(0.0, 7), 0);
    }

    #[test]
    fn extreme_fractions() {
        let g = random_graph(1);
        let p = FirewallPolicy::new(PolicyKind::Random, 0.0).unwrap();
        assert!(select_firewalls(&g, &p, 0.0, 3).unwrap().ids.is_empty());
        let mut all = select_firewalls(&g, &p, 1.0, 3).unwrap().ids;
        all.sort_unstable();
        assert_eq!(all, (0..g.vertex_count()).collect::<Vec<_>>());
        assert!(select_firewalls(&g, &p, 1.5, 3).is_err());
        assert!(select_firewalls(&g, &p, -0.1, 3).is_err());
    }

    #[test]
    fn degree_aware_takes_highest_degrees() {
        let g = random_graph(2);
        let p = FirewallPolicy::new(PolicyKind::DegreeAware, 0.0).unwrap();
        let sel = select_firewalls(&g, &p, 0.1, 0).unwrap();
        let chosen: std::collections::HashSet<usize> = sel.ids.iter().copied().collect();
        let min_in = sel.ids.iter().map(|&v| g.degree(v)).min().unwrap();
        let max_out = (0..g.vertex_count())
            .filter(|v| !chosen.contains(v))
            .map(|v| g.degree(v))
            .max()
            .unwrap();
        assert!(min_in >= max_out);
    }

    #[test]
    fn huge_spacing_accepts_only_the_top_device() {
        // 50 devices on a 500 m torus; no two can be 10 km apart.
        let region = TorusRegion::new(500.0).unwrap();
        let d = sample_ppp(region, 400.0, 11).unwrap();
        let d = DeviceSet::from_positions(region, d.positions().iter().copied().take(50)).unwrap();
        assert_eq!(d.count(), 50);
        let g = build_rgg(&d, 100.0).unwrap();
        let p = FirewallPolicy::new(PolicyKind::DegreeAwareDc, 10_000.0).unwrap();
        let sel = select_firewalls(&g, &p, 0.2, 0).unwrap();
        assert_eq!(sel.ids.len(), 10);
        assert!(sel.dc_relaxed);
        let order = degree_order(&g);
        // First id is the greedy acceptance, the rest are rejects in degree order.
        assert_eq!(sel.ids, order[..10].to_vec());
        let top = (0..50).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))).unwrap();
        assert_eq!(sel.ids[0], top);
    }

    #[test]
    fn dc_spacing_holds_when_not_relaxed() {
        let g = random_graph(4);
        for kind in [PolicyKind::RandomDc, PolicyKind::DegreeAwareDc] {
            let p = FirewallPolicy::new(kind, 400.0).unwrap();
            let sel = select_firewalls(&g, &p, 0.03, 9).unwrap();
            assert!(!sel.dc_relaxed);
            for (i, &a) in sel.ids.iter().enumerate() {
                for &b in &sel.ids[i + 1..] {
                    assert!(torus_distance(g.positions()[a], g.positions()[b], g.region()) >= 400.0);
                }
            }
        }
    }

    #[test]
    fn selection_is_deterministic() {
        let g = random_graph(5);
        for kind in PolicyKind::ALL {
            let p = FirewallPolicy::new(kind, 400.0).unwrap();
            assert_eq!(
                select_firewalls(&g, &p, 0.07, 77).unwrap(),
                select_firewalls(&g, &p, 0.07, 77).unwrap()
            );
        }
    }

    #[test]
    fn zones_without_firewalls() {
        let region = TorusRegion::new(1000.0).unwrap();
        let d = sample_ppp(region, 50.0, 1).unwrap();
        let layout = apply_secured_zones(&d, &[], 200.0).unwrap();
        assert!(layout.susceptible.iter().all(|&s| s));
        assert_eq!(layout.protected_count(), 0);
    }

    #[test]
    fn isolated_firewall_protects_itself_only() {
        let region = TorusRegion::new(4000.0).unwrap();
        let d = DeviceSet::from_positions(
            region,
            [Point::new(0.0, 0.0), Point::new(500.0, 0.0), Point::new(0.0, 3700.0)],
        )
        .unwrap();
        let layout = apply_secured_zones(&d, &[0], 200.0).unwrap();
        assert_eq!(layout.protected, vec![true, false, false]);
        assert_eq!(layout.susceptible_count(), 2);
    }

    #[test]
    fn zone_errors() {
        let region = TorusRegion::new(1000.0).unwrap();
        let d = sample_ppp(region, 10.0, 1).unwrap();
        assert!(matches!(
            apply_secured_zones(&d, &[d.count()], 100.0),
            Err(Error::DeviceOutOfRange(_))
        ));
        assert!(apply_secured_zones(&d, &[], 0.0).is_err());
        assert!(apply_secured_zones(&d, &[], 501.0).is_err());
    }
}
