mod common;

use common::{interior_peak, smooth3};
use firewall_percolation::harness::{estimate_critical_percentage, run_single, SweepRow};
use firewall_percolation::seed::run_seed;
use firewall_percolation::{
    build_rgg, run_sweep, sample_ppp, simulate_sir, DeviceSet, EpidemicParams, ExperimentConfig, PolicyKind,
    Point, TorusRegion,
};

#[test]
fn ppp_count_is_poisson_1280() {
    let region = TorusRegion::new(4000.0).unwrap();
    let seeds = 10_000u64;
    let counts: Vec<f64> = (0..seeds)
        .map(|s| sample_ppp(region, 80.0, s).unwrap().count() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (1280.0 / n).sqrt();
    assert!((mean - 1280.0).abs() <= 3.0 * se, "mean {mean}");
    assert!((var - 1280.0).abs() <= 0.05 * 1280.0, "variance {var}");
}

#[test]
fn ppp_positions_are_uniform() {
    let region = TorusRegion::new(4000.0).unwrap();
    let mut quadrants = [0usize; 4];
    for s in 0..200 {
        for p in sample_ppp(region, 80.0, s).unwrap().positions() {
            quadrants[usize::from(p.x >= 2000.0) + 2 * usize::from(p.y >= 2000.0)] += 1;
        }
    }
    let total: usize = quadrants.iter().sum();
    for q in quadrants {
        let share = q as f64 / total as f64;
        assert!((share - 0.25).abs() < 0.01, "{quadrants:?}");
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn star_leaves_race_against_centre_recovery() {
    // Four leaves at 90° on a 50 m circle, range 60 m: leaves are 70.7 m apart.
    let region = TorusRegion::new(1000.0).unwrap();
    let centre = Point::new(500.0, 500.0);
    let leaves = (0..4).map(|k| {
        let a = k as f64 * std::f64::consts::FRAC_PI_2;
        Point::new(500.0 + 50.0 * a.cos(), 500.0 + 50.0 * a.sin())
    });
    let devices = DeviceSet::from_positions(region, std::iter::once(centre).chain(leaves)).unwrap();
    let graph = build_rgg(&devices, 60.0).unwrap();
    assert_eq!(graph.degree(0), 4);
    assert_eq!(graph.edge_count(), 4);

    let (beta, delta) = (1.0, 2.0);
    let params = EpidemicParams::to_absorption(beta, delta).unwrap();
    let mask = vec![true; 5];
    let infected_leaves: Vec<f64> = (0..20_000u64)
        .map(|s| (simulate_sir(&graph, &mask, 0, &params, s).unwrap().ever_infected.len() - 1) as f64)
        .collect();
    let (mean, se) = mean_and_se(&infected_leaves);
    let expected = 4.0 * beta / (beta + delta);
    assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} expected {expected} se {se}");
}

#[test]
fn two_node_race_asymmetric_rates() {
    let region = TorusRegion::new(100.0).unwrap();
    let d = DeviceSet::from_positions(region, [Point::new(0.0, 0.0), Point::new(3.0, 0.0)]).unwrap();
    let g = build_rgg(&d, 5.0).unwrap();
    let params = EpidemicParams::to_absorption(3.0, 1.0).unwrap();
    let hits: Vec<f64> = (0..40_000u64)
        .map(|s| (simulate_sir(&g, &[true, true], 1, &params, s).unwrap().ever_infected.len() - 1) as f64)
        .collect();
    let (p, se) = mean_and_se(&hits);
    assert!((p - 0.75).abs() <= 3.0 * se, "p {p}");
}

fn logistic_rows(grid: &[f64]) -> Vec<SweepRow> {
    grid.iter()
        .map(|&f| {
            let p = 1.0 / (1.0 + ((f - 0.0713) / 0.007).exp());
            SweepRow {
                policy: "random".into(),
                fraction: f,
                runs: 1,
                outbreaks: 0,
                outbreak_probability: p,
                ci95_halfwidth: 0.0,
                mean_num_clusters: 0.0,
                mean_max_cluster_size: 0.0,
                mean_susceptible_count: 0.0,
                dc_relaxed_rate: 0.0,
            }
        })
        .collect()
}

#[test]
fn interpolated_critical_matches_fine_grid() {
    let coarse: Vec<f64> = (0..=12).map(|i| i as f64 / 100.0).collect();
    let fine: Vec<f64> = (0..=1200).map(|i| i as f64 / 10_000.0).collect();
    for threshold in [0.01, 0.05, 0.2] {
        let c = estimate_critical_percentage(&logistic_rows(&coarse), threshold).unwrap();
        let f = estimate_critical_percentage(&logistic_rows(&fine), threshold).unwrap();
        let fine_crossing = f.fraction.unwrap();
        let interp = c.interpolated.unwrap();
        assert!((interp - fine_crossing).abs() <= 0.01, "{interp} vs {fine_crossing}");
        assert!(c.fraction.unwrap() >= fine_crossing - 1e-12);
    }
}

#[test]
fn single_run_sweep_equals_run_single() {
    let config = ExperimentConfig {
        side_length: 2000.0,
        fraction_grid: vec![0.0, 0.05, 0.1],
        runs_per_point: 1,
        master_seed: 5,
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&config, 2).unwrap();
    let params = config.run_params().unwrap();
    let policies = config.resolved_policies().unwrap();
    for (p, policy) in policies.iter().enumerate() {
        for (f, &fraction) in config.fraction_grid.iter().enumerate() {
            let (outcome, layout) = run_single(&params, policy, fraction, run_seed(5, p, f, 0)).unwrap();
            let row = result.row(policy.kind, fraction).unwrap();
            assert_eq!(row.outbreaks, usize::from(outcome.percolates));
            assert_eq!(row.mean_num_clusters, outcome.cluster_report.num_clusters as f64);
            assert_eq!(row.mean_max_cluster_size, outcome.cluster_report.max_cluster_size as f64);
            assert_eq!(row.mean_susceptible_count, layout.susceptible_count as f64);
            assert_eq!(row.dc_relaxed_rate, f64::from(u8::from(layout.dc_relaxed)));
        }
    }
}

/// Cluster count rises then falls once the grid reaches full zone coverage.
#[test]
fn cluster_count_peaks_on_extended_grid() {
    let config = ExperimentConfig {
        fraction_grid: vec![0.0, 0.04, 0.08, 0.12, 0.16, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6],
        runs_per_point: 80,
        master_seed: 31,
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&config, 4).unwrap();
    for policy in PolicyKind::ALL {
        let counts: Vec<f64> = result.rows_for(policy).iter().map(|r| r.mean_num_clusters).collect();
        let smoothed = smooth3(&counts);
        let peak = smoothed.iter().copied().fold(0.0, f64::max);
        assert!(
            interior_peak(&smoothed, 0.02 * peak).is_some(),
            "{policy}: {counts:?}"
        );
    }
}
