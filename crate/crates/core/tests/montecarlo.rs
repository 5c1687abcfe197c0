use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use wishart_edge::finite_n::{linspace, SpectralParams};
use wishart_edge::montecarlo::{
    empirical_density, empirical_gap, read_samples_csv, sample_smallest,
    sample_smallest_full_covariance, write_samples_csv, BinnedCounts, CorrelationKind,
    CorrelationSpec, DensitySource, MCConfig, MicroScaling, MAX_N,
};
use wishart_edge::Error;

fn config(n: usize, nu: usize, samples: usize, seed: u64) -> MCConfig {
    MCConfig::new(SpectralParams::new(n, nu).unwrap(), samples, seed)
}

#[test]
fn same_seed_same_samples_for_any_worker_count() {
    let base = config(6, 2, 300, 42);
    let one = sample_smallest(&base).unwrap();
    let four = sample_smallest(&MCConfig { workers: 4, ..base.clone() }).unwrap();
    assert_eq!(one.smallest, four.smallest);
    let other = sample_smallest(&config(6, 2, 300, 43)).unwrap();
    assert_ne!(one.smallest, other.smallest);
}

#[test]
fn prefix_of_a_longer_run_is_reproduced() {
    let short = sample_smallest(&config(5, 1, 50, 9)).unwrap();
    let long = sample_smallest(&config(5, 1, 200, 9)).unwrap();
    assert_eq!(short.smallest[..], long.smallest[..50]);
}

#[test]
fn single_row_is_chi_squared_in_distribution() {
    // for N = 1 the only eigenvalue is χ²(ν + 1); Kolmogorov–Smirnov at ~0.1% level
    for nu in [0usize, 3] {
        let spec = sample_smallest(&config(1, nu, 20_000, 3)).unwrap();
        let mut x = spec.smallest.clone();
        x.sort_by(f64::total_cmp);
        let dist = ChiSquared::new((nu + 1) as f64).unwrap();
        let n = x.len() as f64;
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = dist.cdf(v);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.95 / n.sqrt(), "nu = {nu}: D = {d}");
    }
}

#[test]
fn diagonal_and_full_covariance_agree() {
    let spec = CorrelationSpec::from_spectrum(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let cfg = MCConfig { correlation: spec, ..config(4, 2, 50, 5) };
    let diag = sample_smallest(&cfg).unwrap();
    // Cholesky factor of a diagonal C is diag(√c)
    let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
    let full = sample_smallest_full_covariance(&config(4, 2, 50, 5), &c).unwrap();
    for (a, b) in diag.smallest.iter().zip(&full) {
        assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }
}

#[test]
fn correlation_specs_parse() {
    let id = CorrelationSpec::parse("identity", 3).unwrap();
    assert_eq!(id.kind, CorrelationKind::Identity);
    let lin = CorrelationSpec::parse("linspace:1:4", 4).unwrap();
    assert_eq!(lin.spectrum, vec![1.0, 2.0, 3.0, 4.0]);
    assert!((lin.inverse_mean() - (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-15);
    let list = CorrelationSpec::parse("list:1,2", 5).unwrap();
    assert_eq!(list.spectrum, vec![1.0, 2.0, 1.0, 2.0, 1.0]);
    for bad in ["linspace:1", "list:1,-2", "list:a", "toeplitz:0.5", "list:1,2,3"] {
        assert!(CorrelationSpec::parse(bad, 2).is_err(), "{bad}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(sample_smallest(&config(MAX_N + 1, 0, 1, 0)), Err(Error::Resource(_))));
    assert!(sample_smallest(&config(3, 0, 0, 0)).is_err());
    assert!(sample_smallest(&MCConfig { workers: 0, ..config(3, 0, 5, 0) }).is_err());
}

#[test]
fn empirical_gap_is_a_step_survival_function() {
    let spec = sample_smallest(&config(4, 2, 2_000, 1)).unwrap();
    let grid = linspace(0.0, 10.0, 101);
    let curve = empirical_gap(&spec, &grid).unwrap();
    assert_eq!(curve.values[0], 1.0);
    assert!(curve.values.windows(2).all(|w| w[1] <= w[0]));
    let stderr = curve.stderr.unwrap();
    assert!(stderr.iter().all(|&s| s <= 0.5 / (2_000f64).sqrt() + 1e-15));
    assert!(empirical_gap(&spec, &[1.0, 0.5]).is_err());
}

#[test]
fn histograms_merge_in_any_order() {
    let edges = linspace(0.0, 1.0, 6);
    let fill = |xs: &[f64]| {
        let mut h = BinnedCounts::new(edges.clone()).unwrap();
        xs.iter().for_each(|&x| h.add(x));
        h
    };
    let a = fill(&[0.1, 0.5, 1.0, 2.0]);
    let b = fill(&[0.05, 0.95]);
    let c = fill(&[-1.0, 0.55]);
    let left = a.clone().merge(&b).unwrap().merge(&c).unwrap();
    let right = c.clone().merge(&b.clone().merge(&a).unwrap()).unwrap();
    assert_eq!(left, right);
    assert_eq!(left.counts, vec![2, 0, 2, 0, 2]);
    assert_eq!(left.outside, 2);
    assert!(a.merge(&BinnedCounts::new(linspace(0.0, 2.0, 6)).unwrap()).is_err());
}

#[test]
fn density_histogram_has_unit_mass_when_bins_cover_everything() {
    let spec = sample_smallest(&config(10, 2, 1_000, 2)).unwrap();
    let top = spec.smallest.iter().copied().fold(0.0, f64::max) * 40.0 * 1.01;
    let edges = linspace(0.0, top, 21);
    let (curve, hist) = empirical_density(&spec, &edges, DensitySource::Smallest, MicroScaling::Bare).unwrap();
    assert_eq!(hist.outside, 0);
    let width = edges[1] - edges[0];
    let mass: f64 = curve.values.iter().map(|v| v * width).sum();
    assert!((mass - 1.0).abs() < 1e-12);
    assert!(empirical_density(&spec, &edges, DensitySource::NearEdge, MicroScaling::Harmonic).is_err());
}

#[test]
fn near_edge_eigenvalues_are_collected() {
    let cfg = MCConfig { near_edge_cutoff: Some(10.0), ..config(8, 0, 200, 4) };
    let spec = sample_smallest(&cfg).unwrap();
    let near = spec.all_eigs_near_edge.as_ref().unwrap();
    assert!(near.len() >= spec.smallest.iter().filter(|&&t| 32.0 * t < 10.0).count());
    assert!(near.iter().all(|&u| (0.0..10.0).contains(&u)));
}

#[test]
fn sample_csv_round_trip() {
    let spec = sample_smallest(&config(3, 1, 25, 8)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    write_samples_csv(&spec, &path).unwrap();
    let back = read_samples_csv(&path).unwrap();
    assert_eq!(back.smallest, spec.smallest);
    assert_eq!(back.config, spec.config);
}
