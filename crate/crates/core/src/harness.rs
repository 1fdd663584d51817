//! Monte Carlo sweeps over firewall fraction and selection policy.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::firewall::{apply_secured_zones, select_firewalls, FirewallPolicy, PolicyKind, QuarantineLayout};
use crate::percolation::{detect_spanning, PercolationOutcome, SpanningRule};
use crate::plot::render_sweep_svg;
use crate::region::{sample_ppp, TorusRegion};
use crate::rgg::{build_rgg, AdjacencyGraph};
use crate::seed::{run_seed, substream};

/// Version tag written into result metadata.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

pub const CSV_HEADER: &str = "policy,fraction,runs,outbreaks,outbreak_probability,ci95_halfwidth,mean_num_clusters,mean_max_cluster_size,mean_susceptible_count,dc_relaxed_rate";

const Z95: f64 = 1.959_963_984_540_054;

/// A policy in a config: either a bare name or a name with its own spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyEntry {
    Name(PolicyKind),
    Full { kind: PolicyKind, min_distance: f64 },
}

impl PolicyEntry {
    pub fn kind(&self) -> PolicyKind {
        match *self {
            PolicyEntry::Name(k) | PolicyEntry::Full { kind: k, .. } => k,
        }
    }
}

impl From<PolicyKind> for PolicyEntry {
    fn from(k: PolicyKind) -> Self {
        PolicyEntry::Name(k)
    }
}

fn default_fraction_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub side_length: f64,
    /// Devices per km².
    pub intensity: f64,
    pub comm_range: f64,
    pub zone_radius: f64,
    pub policies: Vec<PolicyEntry>,
    /// Spacing for DC policies given by name; defaults to `2 × zone_radius`.
    pub min_distance: Option<f64>,
    pub fraction_grid: Vec<f64>,
    pub runs_per_point: usize,
    pub master_seed: u64,
    pub spanning_rule: SpanningRule,
    pub critical_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            side_length: 4000.0,
            intensity: 80.0,
            comm_range: 200.0,
            zone_radius: 200.0,
            policies: PolicyKind::ALL.into_iter().map(PolicyEntry::from).collect(),
            min_distance: None,
            fraction_grid: default_fraction_grid(),
            runs_per_point: 500,
            master_seed: 2019,
            spanning_rule: SpanningRule::Both,
            critical_threshold: 0.05,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let region = TorusRegion::new(self.side_length)?;
        let half = region.side_length() / 2.0;
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(invalid("intensity", "must be finite and >= 0"));
        }
        for (name, v) in [("comm_range", self.comm_range), ("zone_radius", self.zone_radius)] {
            if !(v.is_finite() && v > 0.0 && v <= half) {
                return Err(invalid(name, format!("must lie in (0, {half}], got {v}")));
            }
        }
        if self.policies.is_empty() {
            return Err(invalid("policies", "at least one policy is required"));
        }
        if self.runs_per_point == 0 {
            return Err(invalid("runs_per_point", "must be >= 1"));
        }
        if self.fraction_grid.is_empty() {
            return Err(invalid("fraction_grid", "must not be empty"));
        }
        if self.fraction_grid.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(invalid("fraction_grid", "fractions must lie in [0, 1]"));
        }
        if self.fraction_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("fraction_grid", "must be strictly increasing"));
        }
        if !(self.critical_threshold > 0.0 && self.critical_threshold < 1.0) {
            return Err(invalid("critical_threshold", "must lie in (0, 1)"));
        }
        self.resolved_policies()?;
        Ok(())
    }

    pub fn default_min_distance(&self) -> f64 {
        self.min_distance.unwrap_or(2.0 * self.zone_radius)
    }

    pub fn resolved_policies(&self) -> Result<Vec<FirewallPolicy>> {
        self.policies
            .iter()
            .map(|entry| match *entry {
                PolicyEntry::Name(kind) => FirewallPolicy::new(kind, self.default_min_distance()),
                PolicyEntry::Full { kind, min_distance } => FirewallPolicy::new(kind, min_distance),
            })
            .collect()
    }

    pub fn run_params(&self) -> Result<RunParams> {
        Ok(RunParams {
            region: TorusRegion::new(self.side_length)?,
            intensity: self.intensity,
            comm_range: self.comm_range,
            zone_radius: self.zone_radius,
            spanning_rule: self.spanning_rule,
        })
    }
}

/// Scalar parameters of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub region: TorusRegion,
    pub intensity: f64,
    pub comm_range: f64,
    pub zone_radius: f64,
    pub spanning_rule: SpanningRule,
}

/// Everything produced by one realization.
#[derive(Debug, Clone)]
pub struct Realization {
    pub graph: AdjacencyGraph,
    pub layout: QuarantineLayout,
    pub outcome: PercolationOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub device_count: usize,
    pub firewall_count: usize,
    pub protected_count: usize,
    pub susceptible_count: usize,
    pub dc_relaxed: bool,
}

impl From<&QuarantineLayout> for LayoutSummary {
    fn from(l: &QuarantineLayout) -> Self {
        Self {
            device_count: l.protected.len(),
            firewall_count: l.firewall_ids.len(),
            protected_count: l.protected_count(),
            susceptible_count: l.susceptible_count(),
            dc_relaxed: l.dc_relaxed,
        }
    }
}

/// Samples devices, builds the graph, places firewalls and tests spanning.
pub fn realize(params: &RunParams, policy: &FirewallPolicy, fraction: f64, seed: u64) -> Result<Realization> {
    let devices = sample_ppp(params.region, params.intensity, substream(seed, 0))?;
    let graph = build_rgg(&devices, params.comm_range)?;
    let selection = select_firewalls(&graph, policy, fraction, substream(seed, 1))?;
    let mut layout = apply_secured_zones(graph.devices(), &selection.ids, params.zone_radius)?;
    layout.dc_relaxed = selection.dc_relaxed;
    let outcome = detect_spanning(&graph, &layout.susceptible, params.spanning_rule);
    Ok(Realization {
        graph,
        layout,
        outcome,
    })
}

pub fn run_single(
    params: &RunParams,
    policy: &FirewallPolicy,
    fraction: f64,
    seed: u64,
) -> Result<(PercolationOutcome, LayoutSummary)> {
    let r = realize(params, policy, fraction, seed)?;
    let summary = LayoutSummary::from(&r.layout);
    Ok((r.outcome, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy: String,
    pub fraction: f64,
    pub runs: usize,
    pub outbreaks: usize,
    pub outbreak_probability: f64,
    pub ci95_halfwidth: f64,
    pub mean_num_clusters: f64,
    pub mean_max_cluster_size: f64,
    pub mean_susceptible_count: f64,
    pub dc_relaxed_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub policy: String,
    pub threshold: f64,
    /// Smallest grid fraction from which the outbreak probability stays at or
    /// below the threshold; `None` if the grid never gets there.
    pub fraction: Option<f64>,
    /// Linear interpolation of the threshold crossing below `fraction`.
    pub interpolated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub critical: Vec<CriticalEstimate>,
}

impl SweepResult {
    pub fn rows_for(&self, policy: PolicyKind) -> Vec<SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.policy == policy.as_str())
            .cloned()
            .collect()
    }

    pub fn critical_for(&self, policy: PolicyKind) -> Option<&CriticalEstimate> {
        self.critical.iter().find(|c| c.policy == policy.as_str())
    }

    pub fn row(&self, policy: PolicyKind, fraction: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.policy == policy.as_str() && (r.fraction - fraction).abs() < 1e-12)
    }
}

/// Integer sums over the runs of one grid point.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    runs: usize,
    outbreaks: usize,
    clusters: u64,
    max_cluster: u64,
    susceptible: u64,
    relaxed: usize,
}

impl Tally {
    fn add(&mut self, outcome: &PercolationOutcome, layout: &LayoutSummary) {
        self.runs += 1;
        self.outbreaks += usize::from(outcome.percolates);
        self.clusters += outcome.cluster_report.num_clusters as u64;
        self.max_cluster += outcome.cluster_report.max_cluster_size as u64;
        self.susceptible += layout.susceptible_count as u64;
        self.relaxed += usize::from(layout.dc_relaxed);
    }

    fn into_row(self, policy: PolicyKind, fraction: f64) -> SweepRow {
        let n = self.runs as f64;
        let p = self.outbreaks as f64 / n;
        SweepRow {
            policy: policy.as_str().to_string(),
            fraction,
            runs: self.runs,
            outbreaks: self.outbreaks,
            outbreak_probability: p,
            ci95_halfwidth: Z95 * (p * (1.0 - p) / n).sqrt(),
            mean_num_clusters: self.clusters as f64 / n,
            mean_max_cluster_size: self.max_cluster as f64 / n,
            mean_susceptible_count: self.susceptible as f64 / n,
            dc_relaxed_rate: self.relaxed as f64 / n,
        }
    }
}

/// Runs every `(policy, fraction, run)` unit on `workers` threads.
///
/// Each unit's seed depends only on its indices and the master seed, and the
/// per-point tallies are integer sums, so the result does not depend on the
/// worker count or scheduling.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let params = config.run_params()?;
    let policies = config.resolved_policies()?;
    let grid = &config.fraction_grid;
    let runs = config.runs_per_point;

    let units: Vec<(usize, usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..grid.len()).flat_map(move |f| (0..runs).map(move |r| (p, f, r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    let outcomes: Vec<(PercolationOutcome, LayoutSummary)> = pool.install(|| {
        units
            .par_iter()
            .map(|&(p, f, r)| {
                let seed = run_seed(config.master_seed, p, f, r);
                run_single(&params, &policies[p], grid[f], seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut tallies = vec![Tally::default(); policies.len() * grid.len()];
    for (&(p, f, _), (outcome, layout)) in units.iter().zip(&outcomes) {
        tallies[p * grid.len() + f].add(outcome, layout);
    }
    let mut rows = Vec::with_capacity(tallies.len());
    for (p, policy) in policies.iter().enumerate() {
        for (f, &fraction) in grid.iter().enumerate() {
            rows.push(tallies[p * grid.len() + f].into_row(policy.kind, fraction));
        }
    }
    let mut critical = Vec::with_capacity(policies.len());
    for policy in &policies {
        let own: Vec<SweepRow> = rows
            .iter()
            .filter(|r| r.policy == policy.kind.as_str())
            .cloned()
            .collect();
        critical.push(estimate_critical_percentage(&own, config.critical_threshold)?);
    }
    Ok(SweepResult {
        version: VERSION.to_string(),
        config: config.clone(),
        rows,
        critical,
    })
}

/// Smallest grid fraction after which every outbreak probability is at most
/// `threshold`, plus a linearly interpolated crossing.
///
/// `rows` must belong to a single policy and be sorted by fraction.
pub fn estimate_critical_percentage(rows: &[SweepRow], threshold: f64) -> Result<CriticalEstimate> {
    let first = rows.first().ok_or(Error::EmptyRows)?;
    let policy = first.policy.clone();
    let above: Option<usize> = rows
        .iter()
        .rposition(|r| r.outbreak_probability > threshold);
    let (fraction, interpolated) = match above {
        None => (Some(first.fraction), Some(first.fraction)),
        Some(i) if i + 1 == rows.len() => (None, None),
        Some(i) => {
            let (lo, hi) = (&rows[i], &rows[i + 1]);
            let t = (lo.outbreak_probability - threshold) / (lo.outbreak_probability - hi.outbreak_probability);
            (Some(hi.fraction), Some(lo.fraction + t * (hi.fraction - lo.fraction)))
        }
    };
    Ok(CriticalEstimate {
        policy,
        threshold,
        fraction,
        interpolated,
    })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(invalid("csv", format!("unexpected header `{}`", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for OutputFormats {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

/// Writes `results.csv`, `summary.json` and `sweep.svg` into `dir`.
pub fn emit_results(result: &SweepResult, dir: &Path, formats: OutputFormats) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if formats.csv {
        let path = dir.join("results.csv");
        let mut buf = Vec::new();
        write_csv(&result.rows, &mut buf)?;
        fs::write(&path, buf).map_err(io_err(&path))?;
        written.push(path);
    }
    if formats.json {
        let path = dir.join("summary.json");
        fs::write(&path, to_json(result)?).map_err(io_err(&path))?;
        written.push(path);
    }
    if formats.svg {
        let path = dir.join("sweep.svg");
        fs::write(&path, render_sweep_svg(&result.rows)).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
