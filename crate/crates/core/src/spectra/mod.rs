//! Adjacency spectra: eigenvalues, spectral gap, clustered multiplicities and
//! interval counts `m_G[a, b]`.

mod eigen;

pub use eigen::{symmetric_eigen, EigenOutput, MatVec};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::graph::Graph;

/// Largest graph the eigensolver accepts unless overridden.
pub const DEFAULT_SIZE_CAP: usize = 20_000;

/// Environment variable overriding [`DEFAULT_SIZE_CAP`].
pub const SIZE_CAP_ENV: &str = "EMLAB_SIZE_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub size_cap: usize,
    /// Compute eigenvectors and certify every residual. Costs roughly twice
    /// the eigenvalue-only path.
    pub certify: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            size_cap: DEFAULT_SIZE_CAP,
            certify: true,
        }
    }
}

impl SolverConfig {
    /// Defaults with the cap taken from `EMLAB_SIZE_CAP` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(raw) = std::env::var(SIZE_CAP_ENV) {
            cfg.size_cap = raw.trim().parse().map_err(|_| {
                Error::Config(format!("{SIZE_CAP_ENV}={raw:?} is not a vertex count"))
            })?;
        }
        Ok(cfg)
    }

    pub fn uncertified(self) -> Self {
        Self {
            certify: false,
            ..self
        }
    }
}

/// Eigenvalues of an adjacency matrix, sorted nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    residual_bound: Option<f64>,
    source_n: usize,
}

impl Spectrum {
    /// Spectrum from externally supplied values (sorted here).
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let source_n = values.len();
        Self {
            values,
            residual_bound: None,
            source_n,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Certified `max ‖Av − λv‖₂ / (‖v‖₂ ‖A‖₂)` over all computed pairs.
    pub fn residual_bound(&self) -> Option<f64> {
        self.residual_bound
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    /// `max(1e−8, 1e−12 · n · λ₁)`.
    pub fn default_tol(&self) -> f64 {
        let top = self.values.first().copied().unwrap_or(0.0).abs();
        (1e-12 * self.values.len() as f64 * top).max(1e-8)
    }

    /// CSV with header `index,eigenvalue`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt17(*v)));
        }
        out
    }
}

/// Full adjacency spectrum with the default solver configuration.
pub fn eigenvalues(g: &Graph) -> Result<Spectrum> {
    eigenvalues_with(g, &SolverConfig::default())
}

pub fn eigenvalues_with(g: &Graph, cfg: &SolverConfig) -> Result<Spectrum> {
    let n = g.n();
    if n == 0 {
        return Err(Error::TooSmall { needed: 1, have: 0 });
    }
    if n > cfg.size_cap {
        return Err(Error::SizeCap {
            n,
            cap: cfg.size_cap,
        });
    }
    let apply = |x: &[f64], y: &mut [f64]| g.apply(x, y);
    let out = symmetric_eigen(n, g.to_dense(), cfg.certify.then_some(&apply as MatVec<'_>))?;
    Ok(Spectrum {
        values: out.values,
        residual_bound: out.residual_bound,
        source_n: n,
    })
}

/// `λ₁ − λ₂`.
pub fn spectral_gap(s: &Spectrum) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::TooSmall {
            needed: 2,
            have: s.len(),
        });
    }
    Ok(s.values[0] - s.values[1])
}

/// Eigenvalues within `tol` of a target, with the isolation of that cluster.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityReport {
    pub target: f64,
    pub tolerance: f64,
    pub count: usize,
    pub cluster_min: f64,
    pub cluster_max: f64,
    /// Distance from the cluster to the nearest excluded eigenvalue
    /// (`None` when every eigenvalue is in the cluster).
    pub separation: Option<f64>,
    /// The cluster is not separated from the rest by more than `tolerance`.
    pub ambiguous: bool,
}

impl MultiplicityReport {
    pub fn cluster_width(&self) -> f64 {
        self.cluster_max - self.cluster_min
    }
}

pub fn multiplicity(s: &Spectrum, target: f64, tol: f64) -> MultiplicityReport {
    let (lo, hi) = (target - tol, target + tol);
    let inside: Vec<f64> = s
        .values
        .iter()
        .copied()
        .filter(|v| (lo..=hi).contains(v))
        .collect();
    let (cluster_min, cluster_max) = if inside.is_empty() {
        (target, target)
    } else {
        (inside[inside.len() - 1], inside[0])
    };
    let separation = s
        .values
        .iter()
        .filter(|v| !(lo..=hi).contains(*v))
        .map(|&v| {
            if v > cluster_max {
                v - cluster_max
            } else {
                cluster_min - v
            }
        })
        .min_by(|a, b| a.total_cmp(b));
    MultiplicityReport {
        target,
        tolerance: tol,
        count: inside.len(),
        cluster_min,
        cluster_max,
        separation,
        ambiguous: separation.is_some_and(|d| d <= tol),
    }
}

/// Multiplicity of `λ₂`.
pub fn second_multiplicity(s: &Spectrum, tol: f64) -> Result<MultiplicityReport> {
    if s.len() < 2 {
        return Err(Error::TooSmall {
            needed: 2,
            have: s.len(),
        });
    }
    Ok(multiplicity(s, s.values[1], tol))
}

/// `m_G[a, b]`: eigenvalues in the closed interval, with multiplicity.
pub fn interval_count(s: &Spectrum, a: f64, b: f64) -> Result<usize> {
    if !(a <= b) {
        return Err(Error::BadInterval { lo: a, hi: b });
    }
    Ok(s.values.iter().filter(|&&v| a <= v && v <= b).count())
}

/// Counts over `bins` equal half-open bins of `[lo, hi]`, the last closed.
pub fn histogram(s: &Spectrum, lo: f64, hi: f64, bins: usize) -> Result<Vec<usize>> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::BadInterval { lo, hi });
    }
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in &s.values {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts)
}

/// `x ↦ scale·x + shift`, followed by `pad_count` extra copies of `pad_value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumTransform {
    pub scale: f64,
    pub shift: f64,
    pub pad_value: f64,
    pub pad_count: usize,
}

impl SpectrumTransform {
    pub const IDENTITY: Self = Self {
        scale: 1.0,
        shift: 0.0,
        pad_value: 0.0,
        pad_count: 0,
    };

    pub fn scale(scale: f64) -> Self {
        Self {
            scale,
            ..Self::IDENTITY
        }
    }

    pub fn affine(scale: f64, shift: f64) -> Self {
        Self {
            scale,
            shift,
            ..Self::IDENTITY
        }
    }

    pub fn padded(self, pad_value: f64, pad_count: usize) -> Self {
        Self {
            pad_value,
            pad_count,
            ..self
        }
    }

    /// Inverse affine map; padding is dropped.
    pub fn inverse(&self) -> Self {
        Self::affine(1.0 / self.scale, -self.shift / self.scale)
    }

    pub fn apply(&self, s: &Spectrum) -> Vec<f64> {
        let mut v: Vec<f64> = s
            .values
            .iter()
            .map(|x| self.scale * x + self.shift)
            .collect();
        v.extend(std::iter::repeat_n(self.pad_value, self.pad_count));
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Multiset equality of `transform(s1)` and `s2` within `tol`.
pub fn spectra_match(
    s1: &Spectrum,
    s2: &Spectrum,
    transform: &SpectrumTransform,
    tol: f64,
) -> bool {
    let mapped = transform.apply(s1);
    mapped.len() == s2.len()
        && mapped
            .iter()
            .zip(&s2.values)
            .all(|(a, b)| (a - b).abs() <= tol)
}

/// Padding count that makes `transform(s1)` match `s2`, if any does.
pub fn measured_padding(
    s1: &Spectrum,
    s2: &Spectrum,
    transform: &SpectrumTransform,
    pad_value: f64,
    tol: f64,
) -> Option<usize> {
    let pad = s2.len().checked_sub(s1.len())?;
    spectra_match(s1, s2, &transform.padded(pad_value, pad), tol).then_some(pad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn small_spectra() {
        let s = eigenvalues(&complete(4)).unwrap();
        assert!(close(s.values(), &[3.0, -1.0, -1.0, -1.0], 1e-12));
        assert!(s.residual_bound().unwrap() <= 1e-10);
        let s = eigenvalues(&cycle(4)).unwrap();
        assert!(close(s.values(), &[2.0, 0.0, 0.0, -2.0], 1e-12));
        let s = eigenvalues(&petersen()).unwrap();
        let mut expect = vec![3.0];
        expect.extend([1.0; 5]);
        expect.extend([-2.0; 4]);
        assert!(close(s.values(), &expect, 1e-12));
        assert_eq!(s.source_n(), 10);
    }

    #[test]
    fn gap_and_multiplicity() {
        let k4 = eigenvalues(&complete(4)).unwrap();
        let pet = eigenvalues(&petersen()).unwrap();
        let c4 = eigenvalues(&cycle(4)).unwrap();
        assert!((spectral_gap(&k4).unwrap() - 4.0).abs() < 1e-12);
        assert!((spectral_gap(&pet).unwrap() - 2.0).abs() < 1e-12);
        assert!((spectral_gap(&c4).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            spectral_gap(&Spectrum::from_values(vec![1.0])),
            Err(Error::TooSmall { .. })
        ));

        let r = multiplicity(&pet, 1.0, 1e-6);
        assert_eq!(r.count, 5);
        assert!((r.separation.unwrap() - 2.0).abs() < 1e-9);
        assert!(!r.ambiguous);
        assert_eq!(multiplicity(&k4, -1.0, 1e-6).count, 3);
        assert_eq!(multiplicity(&k4, 10.0, 1e-6).count, 0);
        assert_eq!(second_multiplicity(&pet, 1e-8).unwrap().count, 5);
        assert_eq!(second_multiplicity(&k4, 1e-8).unwrap().count, 3);
        assert_eq!(second_multiplicity(&c4, 1e-8).unwrap().count, 2);
    }

    #[test]
    fn ambiguous_cluster_is_flagged() {
        let s = Spectrum::from_values(vec![3.0, 1.0, 1.0 - 1e-9, 1.0 - 2.5e-9]);
        let r = multiplicity(&s, 1.0, 2e-9);
        assert_eq!(r.count, 2);
        assert!(r.ambiguous);
    }

    #[test]
    fn intervals_and_histograms() {
        let pet = eigenvalues(&petersen()).unwrap();
        assert_eq!(interval_count(&pet, 0.5, 1.5).unwrap(), 5);
        assert_eq!(interval_count(&pet, -1e300, 1e300).unwrap(), 10);
        assert_eq!(interval_count(&pet, -10.0, -5.0).unwrap(), 0);
        assert!(matches!(
            interval_count(&pet, 1.0, 0.0),
            Err(Error::BadInterval { .. })
        ));
        // bins [−3,−1), [−1,1), [1,3]: the eigenvalue 1 sits on an edge and
        // belongs to the upper bin
        let mut exact = vec![3.0];
        exact.extend([1.0; 5]);
        exact.extend([-2.0; 4]);
        let pet = Spectrum::from_values(exact);
        assert_eq!(histogram(&pet, -3.0, 3.0, 3).unwrap(), vec![4, 0, 6]);
        assert_eq!(histogram(&pet, -3.0, 3.0, 2).unwrap(), vec![4, 6]);
        assert_eq!(histogram(&pet, -3.0, 3.0, 1).unwrap(), vec![10]);
        assert_eq!(histogram(&pet, 10.0, 11.0, 4).unwrap(), vec![0; 4]);
        assert!(histogram(&pet, 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn cycle_closed_forms() {
        for n in 3..=12 {
            let s = eigenvalues(&cycle(n)).unwrap();
            let closed = Spectrum::from_values(
                (0..n)
                    .map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                    .collect(),
            );
            assert!(
                spectra_match(&s, &closed, &SpectrumTransform::IDENTITY, 1e-9),
                "C_{n}"
            );
        }
    }

    #[test]
    fn matching_with_transform_and_padding() {
        let a = Spectrum::from_values(vec![3.0, 1.0]);
        let b = Spectrum::from_values(vec![6.0, 2.0, 0.0, 0.0]);
        let t = SpectrumTransform::scale(2.0).padded(0.0, 2);
        assert!(spectra_match(&a, &b, &t, 1e-12));
        assert!(!spectra_match(
            &a,
            &b,
            &SpectrumTransform::scale(2.0),
            1e-12
        ));
        assert_eq!(
            measured_padding(&a, &b, &SpectrumTransform::scale(2.0), 0.0, 1e-12),
            Some(2)
        );
    }

    #[test]
    fn size_cap_is_enforced() {
        let cfg = SolverConfig {
            size_cap: 3,
            certify: true,
        };
        assert!(matches!(
            eigenvalues_with(&complete(4), &cfg),
            Err(Error::SizeCap { n: 4, cap: 3 })
        ));
    }

    #[test]
    fn csv_export() {
        let csv = eigenvalues(&complete(2)).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,eigenvalue");
        assert_eq!(lines.len(), 3);
        let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }
}
