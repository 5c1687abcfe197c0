//! Monte Carlo sampler for real Wishart matrices `W Wᵀ`, `W` of size
//! `N × (N+ν)` with row covariance `C`.
//!
//! By orthogonal invariance only the spectrum of `C` matters, so rows of an
//! i.i.d. standard normal matrix are scaled by `√c_i`. Sample `i` draws from
//! its own ChaCha8 stream `(seed, i)`, so results do not depend on the
//! number of worker threads.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_n::{CurveKind, DistributionCurve, Scaling, SpectralParams};
use crate::scaled::ScaledValue;

/// Largest `N` the sampler accepts.
pub const MAX_N: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Identity,
    DiagonalSpectrum,
}

/// Spectrum of the row covariance `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub kind: CorrelationKind,
    pub spectrum: Vec<f64>,
}

impl CorrelationSpec {
    pub fn identity(n: usize) -> Self {
        CorrelationSpec {
            kind: CorrelationKind::Identity,
            spectrum: vec![1.0; n],
        }
    }

    pub fn from_spectrum(spectrum: Vec<f64>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::Domain("correlation spectrum is empty".into()));
        }
        if let Some(bad) = spectrum.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::Domain(format!("correlation eigenvalues must be > 0, got {bad}")));
        }
        let kind = if spectrum.iter().all(|&c| c == 1.0) {
            CorrelationKind::Identity
        } else {
            CorrelationKind::DiagonalSpectrum
        };
        Ok(CorrelationSpec { kind, spectrum })
    }

    /// Parses `identity`, `linspace:<lo>:<hi>` or `list:v1,v2,...` for an
    /// `n`-row matrix. A list shorter than `n` is padded by cycling through it.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let text = text.trim();
        if n == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        let number = |s: &str| {
            f64::from_str(s.trim())
                .map_err(|_| Error::Domain(format!("bad number '{s}' in correlation spec")))
        };
        if text == "identity" {
            return Ok(Self::identity(n));
        }
        if let Some(rest) = text.strip_prefix("linspace:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 2 {
                return Err(Error::Domain(format!("expected linspace:<lo>:<hi>, got '{text}'")));
            }
            let (lo, hi) = (number(parts[0])?, number(parts[1])?);
            let spectrum = crate::finite_n::linspace(lo, hi, n);
            return Self::from_spectrum(spectrum);
        }
        if let Some(rest) = text.strip_prefix("list:") {
            let values = rest.split(',').map(number).collect::<Result<Vec<_>>>()?;
            if values.len() > n {
                return Err(Error::Domain(format!(
                    "correlation list has {} entries but N = {n}",
                    values.len()
                )));
            }
            let spectrum = values.iter().cycle().take(n).copied().collect();
            return Self::from_spectrum(spectrum);
        }
        Err(Error::Domain(format!(
            "unknown correlation spec '{text}' (use identity, linspace:lo:hi or list:v1,...)"
        )))
    }

    /// Harmonic-mean factor `mean(1/c_i)`; 1 for the identity.
    pub fn inverse_mean(&self) -> f64 {
        self.spectrum.iter().map(|c| 1.0 / c).sum::<f64>() / self.spectrum.len() as f64
    }
}

/// How eigenvalues are mapped to the microscopic variable `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MicroScaling {
    /// `u = 4N t · mean(1/c_i)`.
    Harmonic,
    /// `u = 4N t`.
    Bare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub params: SpectralParams,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub correlation: CorrelationSpec,
    /// When set, also keep every eigenvalue whose microscopic value
    /// (harmonic scaling) lies below this cutoff.
    pub near_edge_cutoff: Option<f64>,
}

impl MCConfig {
    pub fn new(params: SpectralParams, samples: usize, seed: u64) -> Self {
        MCConfig {
            params,
            samples,
            seed,
            workers: 1,
            correlation: CorrelationSpec::identity(params.n),
            near_edge_cutoff: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n;
        if n > MAX_N {
            return Err(Error::Resource(format!("N = {n} exceeds the sampler limit {MAX_N}")));
        }
        if self.samples == 0 {
            return Err(Error::Domain("samples must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Domain("workers must be >= 1".into()));
        }
        if self.correlation.spectrum.len() != n {
            return Err(Error::Domain(format!(
                "correlation spectrum has {} entries, expected N = {n}",
                self.correlation.spectrum.len()
            )));
        }
        Ok(())
    }

    /// Factor converting an eigenvalue `t` to `u`.
    pub fn micro_scale(&self, scaling: MicroScaling) -> f64 {
        let bare = 4.0 * self.params.n as f64;
        match scaling {
            MicroScaling::Bare => bare,
            MicroScaling::Harmonic => bare * self.correlation.inverse_mean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    /// Smallest eigenvalue of `W Wᵀ` per sample, in sample order.
    pub smallest: Vec<f64>,
    /// Microscopic values (harmonic scaling) of all eigenvalues below the cutoff.
    pub all_eigs_near_edge: Option<Vec<f64>>,
    pub config: MCConfig,
}

fn draw(cfg: &MCConfig, index: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let n = cfg.params.n;
    let cols = n + cfg.params.nu;
    let scale: Vec<f64> = cfg.correlation.spectrum.iter().map(|c| c.sqrt()).collect();
    // column-major fill; the row scale is applied per entry
    let mut w = DMatrix::<f64>::zeros(n, cols);
    for j in 0..cols {
        for i in 0..n {
            let g: f64 = StandardNormal.sample(&mut rng);
            w[(i, j)] = scale[i] * g;
        }
    }
    w
}

/// The Gaussian matrix `W` of sample `index`; exposed for cross-checks.
pub fn sample_matrix(cfg: &MCConfig, index: u64) -> DMatrix<f64> {
    draw(cfg, index)
}

fn squared_singular_values(w: DMatrix<f64>) -> Vec<f64> {
    w.singular_values().iter().map(|s| s * s).collect()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))
}

/// Samples `cfg.samples` matrices and records their smallest eigenvalue
/// (and optionally all near-edge eigenvalues).
pub fn sample_smallest(cfg: &MCConfig) -> Result<EmpiricalSpectrum> {
    cfg.validate()?;
    let cutoff = cfg.near_edge_cutoff;
    let scale = cfg.micro_scale(MicroScaling::Harmonic);
    let per_sample: Vec<(f64, Vec<f64>)> = pool(cfg.workers)?.install(|| {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let eigs = squared_singular_values(draw(cfg, i));
                let smallest = eigs.iter().copied().fold(f64::INFINITY, f64::min);
                let near = match cutoff {
                    Some(c) => eigs.iter().map(|x| x * scale).filter(|&u| u < c).collect(),
                    None => Vec::new(),
                };
                (smallest, near)
            })
            .collect()
    });
    let smallest = per_sample.iter().map(|(s, _)| *s).collect();
    let all_eigs_near_edge = cutoff.map(|_| per_sample.into_iter().flat_map(|(_, v)| v).collect());
    Ok(EmpiricalSpectrum {
        smallest,
        all_eigs_near_edge,
        config: cfg.clone(),
    })
}

/// Smallest eigenvalues with an arbitrary symmetric positive-definite row
/// covariance, sampled as `W = L G` with `C = L Lᵀ`. Used to check that only
/// the spectrum of `C` matters.
pub fn sample_smallest_full_covariance(cfg: &MCConfig, c: &DMatrix<f64>) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.params.n;
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::Domain(format!("covariance must be {n}×{n}")));
    }
    let chol = c
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("covariance is not positive definite".into()))?;
    let l = chol.l();
    let plain = MCConfig {
        correlation: CorrelationSpec::identity(n),
        ..cfg.clone()
    };
    pool(cfg.workers)?.install(|| {
        Ok((0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let eigs = squared_singular_values(&l * draw(&plain, i));
                eigs.into_iter().fold(f64::INFINITY, f64::min)
            })
            .collect())
    })
}

/// Survival fraction `#{λ_min > t} / samples` with binomial standard errors.
pub fn empirical_gap(spec: &EmpiricalSpectrum, t_grid: &[f64]) -> Result<DistributionCurve> {
    if t_grid.is_empty() {
        return Err(Error::Domain("grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("grid must be ascending".into()));
    }
    let mut sorted = spec.smallest.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&x| x <= t)) as f64 / n)
        .collect();
    let stderr = values.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(DistributionCurve {
        abscissae: t_grid.to_vec(),
        values,
        stderr: Some(stderr),
        kind: CurveKind::Gap,
        normalization: ScaledValue::ONE,
        params: Some(spec.config.params),
        scaling: Scaling::FiniteT,
    })
}

/// Histogram counts over fixed bin edges. Merging is commutative and
/// associative, so partial histograms can be combined in any order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCounts {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values outside all bins.
    pub outside: u64,
}

impl BinnedCounts {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("bin edges must be strictly ascending, at least two".into()));
        }
        let bins = edges.len() - 1;
        Ok(BinnedCounts {
            edges,
            counts: vec![0; bins],
            outside: 0,
        })
    }

    pub fn add(&mut self, x: f64) {
        let last = *self.edges.last().expect("validated edges");
        if x < self.edges[0] || x > last || x.is_nan() {
            self.outside += 1;
            return;
        }
        let last_bin = self.counts.len() - 1;
        let bin = self.edges.partition_point(|&e| e <= x).saturating_sub(1);
        self.counts[bin.min(last_bin)] += 1;
    }

    pub fn merge(mut self, other: &BinnedCounts) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::Domain("cannot merge histograms with different bins".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        Ok(self)
    }

    pub fn empty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySource {
    /// Histogram of the smallest eigenvalue (one value per sample).
    Smallest,
    /// All eigenvalues below the near-edge cutoff (spectral density).
    NearEdge,
}

/// Histogram density on the microscopic scale, divided by the number of
/// samples and the bin width, with Poisson errors. For `Smallest` this is a
/// probability density (mass 1 if the bins cover all samples); for
/// `NearEdge` it is the mean number of eigenvalues per unit `u`.
pub fn empirical_density(
    spec: &EmpiricalSpectrum,
    u_bins: &[f64],
    source: DensitySource,
    scaling: MicroScaling,
) -> Result<(DistributionCurve, BinnedCounts)> {
    let mut hist = BinnedCounts::new(u_bins.to_vec())?;
    match source {
        DensitySource::Smallest => {
            let scale = spec.config.micro_scale(scaling);
            spec.smallest.iter().for_each(|&t| hist.add(t * scale));
        }
        DensitySource::NearEdge => {
            let values = spec.all_eigs_near_edge.as_ref().ok_or_else(|| {
                Error::Domain("spectrum was sampled without near-edge eigenvalues".into())
            })?;
            let ratio = spec.config.micro_scale(scaling) / spec.config.micro_scale(MicroScaling::Harmonic);
            values.iter().for_each(|&u| hist.add(u * ratio));
        }
    }
    let samples = spec.smallest.len() as f64;
    let widths: Vec<f64> = hist.edges.windows(2).map(|w| w[1] - w[0]).collect();
    let values = hist.counts.iter().zip(&widths).map(|(&c, w)| c as f64 / (samples * w)).collect();
    let stderr = hist
        .counts
        .iter()
        .zip(&widths)
        .map(|(&c, w)| (c as f64).sqrt() / (samples * w))
        .collect();
    let curve = DistributionCurve {
        abscissae: hist.centers(),
        values,
        stderr: Some(stderr),
        kind: CurveKind::Density,
        normalization: ScaledValue::from_f64(1.0 / samples),
        params: Some(spec.config.params),
        scaling: Scaling::MicroscopicU,
    };
    Ok((curve, hist))
}

/// Writes one smallest eigenvalue per line under a `#`-prefixed JSON line
/// holding the configuration.
pub fn write_samples_csv(spec: &EmpiricalSpectrum, path: &Path) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "# {}", serde_json::to_string(&spec.config)?)?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["smallest"])?;
    for x in &spec.smallest {
        writer.write_record([format!("{x:.16e}")])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a file written by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path) -> Result<EmpiricalSpectrum> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Io("missing configuration header line".into()))?;
    let config: MCConfig = serde_json::from_str(json.trim())?;
    let mut csv_reader = csv::Reader::from_reader(reader);
    let smallest = csv_reader
        .records()
        .map(|r| {
            let r = r?;
            f64::from_str(&r[0]).map_err(|e| Error::Io(format!("bad sample value: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalSpectrum {
        smallest,
        all_eigs_near_edge: None,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, nu: usize, samples: usize) -> MCConfig {
        MCConfig::new(SpectralParams::new(n, nu).unwrap(), samples, 42)
    }

    #[test]
    fn correlation_grammar() {
        assert_eq!(CorrelationSpec::parse("identity", 3).unwrap().spectrum, vec![1.0; 3]);
        let l = CorrelationSpec::parse("linspace:1:4", 4).unwrap();
        assert_eq!(l.spectrum, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(l.kind, CorrelationKind::DiagonalSpectrum);
        let c = CorrelationSpec::parse("list:1,2", 5).unwrap();
        assert_eq!(c.spectrum, vec![1.0, 2.0, 1.0, 2.0, 1.0]);
        assert_eq!(CorrelationSpec::parse("list:1,1", 2).unwrap().kind, CorrelationKind::Identity);
        assert!(CorrelationSpec::parse("list:1,-2", 2).is_err());
        assert!(CorrelationSpec::parse("list:1,2,3", 2).is_err());
        assert!(CorrelationSpec::parse("linspace:1", 2).is_err());
        assert!(CorrelationSpec::parse("toeplitz", 2).is_err());
    }

    #[test]
    fn guards() {
        let mut c = cfg(MAX_N + 1, 0, 1);
        c.correlation = CorrelationSpec::identity(MAX_N + 1);
        assert!(matches!(sample_smallest(&c), Err(Error::Resource(_))));
        assert!(sample_smallest(&cfg(3, 0, 0)).is_err());
    }

    #[test]
    fn outputs_are_non_negative_and_reproducible() {
        let c = cfg(6, 1, 200);
        let a = sample_smallest(&c).unwrap();
        assert_eq!(a.smallest.len(), 200);
        assert!(a.smallest.iter().all(|&x| x >= 0.0));
        let b = sample_smallest(&MCConfig { workers: 4, ..c }).unwrap();
        assert_eq!(a.smallest, b.smallest);
    }

    #[test]
    fn singular_values_match_explicit_eigenvalues() {
        let c = cfg(6, 2, 100);
        for i in 0..100 {
            let w = sample_matrix(&c, i);
            let via_svd = squared_singular_values(w.clone()).into_iter().fold(f64::INFINITY, f64::min);
            let gram = &w * w.transpose();
            let via_eig = gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            assert!((via_svd - via_eig).abs() < 1e-10);
        }
    }

    #[test]
    fn empirical_gap_edges() {
        let spec = sample_smallest(&cfg(4, 0, 500)).unwrap();
        let max = spec.smallest.iter().copied().fold(0.0, f64::max);
        let curve = empirical_gap(&spec, &[0.0, 0.1, 0.5, max + 1.0]).unwrap();
        assert_eq!(curve.values[0], 1.0);
        assert_eq!(*curve.values.last().unwrap(), 0.0);
        assert!(curve.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(empirical_gap(&spec, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn histogram_merge_is_commutative() {
        let edges = vec![0.0, 1.0, 2.0, 3.0];
        let mut a = BinnedCounts::new(edges.clone()).unwrap();
        let mut b = BinnedCounts::new(edges).unwrap();
        [0.5, 1.5, 1.7, 9.0].iter().for_each(|&x| a.add(x));
        [2.5, 3.0, -1.0].iter().for_each(|&x| b.add(x));
        let ab = a.clone().merge(&b).unwrap();
        let ba = b.merge(&a).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab.counts, vec![1, 2, 2]);
        assert_eq!(ab.outside, 2);
    }

    #[test]
    fn density_mass_is_one() {
        let spec = sample_smallest(&cfg(5, 2, 400)).unwrap();
        let scale = spec.config.micro_scale(MicroScaling::Harmonic);
        let top = spec.smallest.iter().copied().fold(0.0, f64::max) * scale * 1.01;
        let bins = crate::finite_n::linspace(0.0, top, 41);
        let (curve, _) =
            empirical_density(&spec, &bins, DensitySource::Smallest, MicroScaling::Harmonic).unwrap();
        let width = bins[1] - bins[0];
        let mass: f64 = curve.values.iter().map(|v| v * width).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let spec = sample_smallest(&cfg(3, 1, 20)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.csv");
        write_samples_csv(&spec, &path).unwrap();
        let back = read_samples_csv(&path).unwrap();
        assert_eq!(back.smallest, spec.smallest);
        assert_eq!(back.config, spec.config);
    }
}
