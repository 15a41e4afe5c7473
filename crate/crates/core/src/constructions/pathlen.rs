//! The determinant identity relating `A_G − 2xI` of an overlay with
//! subdivided regular part to a matrix on the original vertex set.
//!
//! Eliminating each path of `m − 1` interior vertices contributes
//! `det(A_path − 2xI) = (−1)^{m−1} U_{m−1}(x)`, so the `±` of the identity is
//! `(−1)^{(m−1)e(H₂)}`. Determinants are compared as `(sign, log|det|)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebyshev::cheb_u_prev;
use crate::error::{Error, Result};
use crate::graph::{overlay_subdivide, Graph};

/// Relative agreement required between the two sides.
pub const PATHLEN_REL_TOL: f64 = 1e-8;

/// `(sign, log|det|)` of a dense row-major `n × n` matrix by LU with partial
/// pivoting; a singular matrix gives `(0.0, −∞)`.
pub fn log_det(n: usize, mut a: Vec<f64>) -> (f64, f64) {
    assert_eq!(a.len(), n * n);
    let mut sign = 1.0;
    let mut log = 0.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .expect("nonempty column");
        let pivot = a[p * n + k];
        if pivot == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        if pivot < 0.0 {
            sign = -sign;
        }
        log += pivot.abs().ln();
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
    }
    (sign, log)
}

/// Both sides of the identity at one abscissa.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathlenSample {
    pub x: f64,
    pub lhs_sign: f64,
    pub lhs_log: f64,
    pub rhs_sign: f64,
    pub rhs_log: f64,
    /// `|lhs/rhs − 1|`, or `∞` when the signs differ.
    pub rel_diff: f64,
}

/// All samples of one `(H₁, H₂, m)` triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathlenReport {
    pub m: usize,
    pub d: u64,
    pub edges_h2: u64,
    pub samples: Vec<PathlenSample>,
    pub worst_rel: f64,
    pub passed: bool,
}

fn shifted(g: &Graph, shift: f64) -> Vec<f64> {
    let n = g.n();
    let mut a = g.to_dense();
    for i in 0..n {
        a[i * n + i] -= shift;
    }
    a
}

/// Evaluates both sides at every `x` in `xs`.
///
/// `H₂` must be loopless and `d`-regular on the vertex set of `H₁`; each
/// `x` must avoid the roots of `U_{m−1}`.
pub fn verify_pathlen_identity(
    h1: &Graph,
    h2: &Graph,
    m: usize,
    xs: &[f64],
) -> Result<PathlenReport> {
    if h1.n() != h2.n() {
        return Err(Error::SizeMismatch {
            left: h1.n(),
            right: h2.n(),
        });
    }
    if h2.has_loops() {
        return Err(Error::InvalidSelection(
            "the subdivided graph must be loopless".into(),
        ));
    }
    let d = if h2.n() == 0 { 0 } else { h2.degree(0) };
    h2.check_regular(d)?;
    let g = overlay_subdivide(h1, h2, m)?;
    let e = h2.edge_units();
    let n = h1.n();
    let path_sign = if (m - 1) as u64 * e % 2 == 0 {
        1.0
    } else {
        -1.0
    };

    let mut samples = Vec::with_capacity(xs.len());
    for &x in xs {
        let u1 = cheb_u_prev(m, x);
        let u2 = if m >= 2 { cheb_u_prev(m - 1, x) } else { 0.0 };
        if u1 == 0.0 {
            return Err(Error::Domain(format!("x = {x} is a root of U_{}", m - 1)));
        }
        let (lhs_sign, lhs_log) = log_det(g.n(), shifted(&g, 2.0 * x));

        let mut inner = shifted(h1, 2.0 * x - d as f64 * u2 / u1);
        for (i, v) in h2.to_dense().into_iter().enumerate() {
            inner[i] += v / u1;
        }
        let (inner_sign, inner_log) = log_det(n, inner);
        let u_sign = if u1 < 0.0 && e % 2 == 1 { -1.0 } else { 1.0 };
        let rhs_sign = path_sign * u_sign * inner_sign;
        let rhs_log = e as f64 * u1.abs().ln() + inner_log;

        let rel_diff = if lhs_sign == rhs_sign && lhs_sign != 0.0 {
            (lhs_log - rhs_log).exp_m1().abs()
        } else {
            f64::INFINITY
        };
        samples.push(PathlenSample {
            x,
            lhs_sign,
            lhs_log,
            rhs_sign,
            rhs_log,
            rel_diff,
        });
    }
    let worst_rel = samples.iter().map(|s| s.rel_diff).fold(0.0, f64::max);
    Ok(PathlenReport {
        m,
        d,
        edges_h2: e,
        samples,
        worst_rel,
        passed: worst_rel <= PATHLEN_REL_TOL,
    })
}

/// A randomized `(H₁, H₂, m, xs)` triple.
#[derive(Clone, Debug)]
pub struct PathlenCase {
    pub h1: Graph,
    pub h2: Graph,
    pub m: usize,
    pub xs: Vec<f64>,
}

fn random_matching(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(2).map(|p| (p[0], p[1])).collect()
}

/// `count` seeded triples: `H₁` a random simple graph on 6, 8 or 10 vertices,
/// `H₂` a union of `d ∈ {1, 2, 3}` random perfect matchings (parallel edges
/// allowed), `m ∈ {2, …, 6}`, and three abscissae in `[0.3, 2.5]` kept away
/// from roots of `U_{m−1}` and from the spectrum of `G`.
pub fn pathlen_samples(count: usize, seed: u64) -> Result<Vec<PathlenCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    for _ in 0..count {
        let n = 2 * rng.random_range(3..=5);
        let d = rng.random_range(1..=3);
        let m = rng.random_range(2..=6);
        let mut h1 = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.4) {
                    h1.add_edge(u, v, 1);
                }
            }
        }
        let h2 = Graph::from_edges(n, (0..d).flat_map(|_| random_matching(n, &mut rng)));
        let g = overlay_subdivide(&h1, &h2, m)?;
        let spectrum = crate::spectra::eigenvalues(&g)?;
        let mut xs = Vec::with_capacity(3);
        while xs.len() < 3 {
            let x: f64 = rng.random_range(0.3..2.5);
            let clear_of_u = cheb_u_prev(m, x).abs() >= 0.05;
            let clear_of_g = spectrum
                .values()
                .iter()
                .all(|l| (l - 2.0 * x).abs() >= 0.05);
            if clear_of_u && clear_of_g {
                xs.push(x);
            }
        }
        cases.push(PathlenCase { h1, h2, m, xs });
    }
    Ok(cases)
}
