//! Dense symmetric eigensolver: Householder reduction to tridiagonal form,
//! implicit QL for the eigenvalues, and per-pair residual certification via
//! tridiagonal inverse iteration and back-transformation.

use crate::error::{Error, Result};

/// Output of [`symmetric_eigen`].
#[derive(Clone, Debug)]
pub struct EigenOutput {
    /// Eigenvalues in nonincreasing order.
    pub values: Vec<f64>,
    /// `max_i ‖A vᵢ − λᵢ vᵢ‖₂ / (‖vᵢ‖₂ ‖A‖₂)`, when certification ran.
    pub residual_bound: Option<f64>,
}

/// Householder data: `A = Q T Qᵀ` with `Q = H₀ H₁ ⋯`, `Hₖ = I − τₖ vₖ vₖᵀ`
/// acting on coordinates `k+1..n`.
struct Reduction {
    diag: Vec<f64>,
    off: Vec<f64>,
    reflectors: Vec<(f64, Vec<f64>)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Fixed-order lane accumulation lets the compiler vectorize while keeping
    // the result bitwise deterministic.
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Householder vector for `x`: returns `(β, τ, v)` with
/// `(I − τ v vᵀ) x = β e₀`; `τ = 0` when `x` is already zero.
fn householder(x: &[f64]) -> (f64, f64, Vec<f64>) {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return (0.0, 0.0, vec![0.0; x.len()]);
    }
    let beta = if x[0] > 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= beta;
    (beta, 2.0 / dot(&v, &v), v)
}

/// Reduces the row-major symmetric matrix `a` (destroyed) to tridiagonal form.
///
/// Only the upper triangle is read. Each step applies the rank-2 update to a
/// trailing row and immediately folds that row into the next step's
/// symmetric matrix-vector product, so the trailing block is streamed once
/// per step.
fn tridiagonalize(n: usize, a: &mut [f64]) -> Reduction {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    if n < 3 {
        for k in 0..n {
            diag[k] = a[k * n + k];
            if k + 1 < n {
                off[k] = a[k * n + k + 1];
            }
        }
        return Reduction {
            diag,
            off,
            reflectors,
        };
    }

    // Reflector 0 and its product p = τ A₂₂ v, computed directly.
    diag[0] = a[0];
    let (beta, mut tau, mut v) = householder(&a[1..n]);
    off[0] = beta;
    let mut p = vec![0.0; n - 1];
    if tau != 0.0 {
        symv_upper_row(a, n, 1, &v, &mut p);
        p.iter_mut().for_each(|x| *x *= tau);
    }

    for k in 0..n - 2 {
        let lo = k + 1;
        let m = n - lo;
        // w = p − (τ/2)(vᵀp) v; the trailing update is A₂₂ − v wᵀ − w vᵀ.
        let mut w = p;
        if tau != 0.0 {
            let kappa = 0.5 * tau * dot(&v, &w);
            axpy(-kappa, &v, &mut w);
        }
        let update = |r: &mut [f64], i: usize| {
            if tau != 0.0 {
                axpy(-v[i], &w[i..], r);
                axpy(-w[i], &v[i..], r);
            }
        };

        let first = &mut a[lo * n + lo..lo * n + n];
        update(first, 0);
        diag[lo] = first[0];
        let (next_beta, next_tau, next_v) = if m > 2 {
            householder(&first[1..])
        } else {
            (first[1], 0.0, Vec::new())
        };
        off[lo] = next_beta;

        let mut next_p = vec![0.0; m.saturating_sub(1)];
        for i in lo + 1..n {
            let row = &mut a[i * n + i..i * n + n];
            update(row, i - lo);
            if next_tau != 0.0 {
                let o = i - lo - 1;
                next_p[o] += dot(row, &next_v[o..]);
                axpy(next_v[o], &row[1..], &mut next_p[o + 1..]);
            }
        }
        next_p.iter_mut().for_each(|x| *x *= next_tau);

        reflectors.push((tau, std::mem::take(&mut v)));
        tau = next_tau;
        v = next_v;
        p = next_p;
    }
    diag[n - 1] = a[n * n - 1];
    Reduction {
        diag,
        off,
        reflectors,
    }
}

/// `y += A[lo.., lo..] x` from the upper triangle of `a`.
fn symv_upper_row(a: &[f64], n: usize, lo: usize, x: &[f64], y: &mut [f64]) {
    for i in lo..n {
        let o = i - lo;
        let row = &a[i * n + i..i * n + n];
        y[o] += dot(row, &x[o..]);
        axpy(x[o], &row[1..], &mut y[o + 1..]);
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    e.truncate(n);
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 60 {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// LU factorization with partial pivoting of `T − λI`, kept banded.
struct TridiagonalLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut lu = Self {
            u0: vec![0.0; n],
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            mult: vec![0.0; n],
            swapped: vec![false; n],
        };
        let (mut r0, mut r1) = (diag[0] - shift, off.first().copied().unwrap_or(0.0));
        for i in 0..n - 1 {
            let below = off[i];
            let next_diag = diag[i + 1] - shift;
            let next_off = off.get(i + 1).copied().unwrap_or(0.0);
            if r0.abs() >= below.abs() {
                let pivot = if r0 == 0.0 { tiny } else { r0 };
                let m = below / pivot;
                lu.u0[i] = pivot;
                lu.u1[i] = r1;
                lu.mult[i] = m;
                r0 = next_diag - m * r1;
                r1 = next_off;
            } else {
                let m = r0 / below;
                lu.u0[i] = below;
                lu.u1[i] = next_diag;
                lu.u2[i] = next_off;
                lu.mult[i] = m;
                lu.swapped[i] = true;
                r0 = r1 - m * next_diag;
                r1 = -m * next_off;
            }
        }
        lu.u0[n - 1] = if r0 == 0.0 { tiny } else { r0 };
        lu
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}

/// Eigenvector of the tridiagonal matrix for eigenvalue `lambda`.
fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64, scale: f64, seed: u64) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let lu = TridiagonalLu::new(diag, off, lambda, tiny);
    // Deterministic pseudo-random start vector.
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    for _ in 0..3 {
        lu.solve(&mut x);
        let norm = dot(&x, &x).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Applies `Q` to each row of `z` (each row one vector), in column panels.
fn back_transform(reflectors: &[(f64, Vec<f64>)], z: &mut [Vec<f64>]) {
    const PANEL: usize = 16;
    for panel in z.chunks_mut(PANEL) {
        for (k, (tau, v)) in reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let lo = k + 1;
            for x in panel.iter_mut() {
                let seg = &mut x[lo..lo + v.len()];
                let w = tau * dot(v, seg);
                axpy(-w, v, seg);
            }
        }
    }
}

/// Full spectrum of a dense symmetric matrix.
///
/// `y = A x`, used to certify residuals against the original matrix.
pub type MatVec<'a> = &'a dyn Fn(&[f64], &mut [f64]);

/// `apply` computes `y = A x` for residual certification; `None` skips it.
pub fn symmetric_eigen(
    n: usize,
    mut a: Vec<f64>,
    apply: Option<MatVec<'_>>,
) -> Result<EigenOutput> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(EigenOutput {
            values: Vec::new(),
            residual_bound: Some(0.0),
        });
    }
    let red = tridiagonalize(n, &mut a);
    drop(a);
    let values = tridiagonal_eigenvalues(&red.diag, &red.off)?;
    let Some(apply) = apply else {
        return Ok(EigenOutput {
            values,
            residual_bound: None,
        });
    };
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return Ok(EigenOutput {
            values,
            residual_bound: Some(0.0),
        });
    }
    let mut vectors: Vec<Vec<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, &l)| inverse_iteration(&red.diag, &red.off, l, norm, i as u64 + 1))
        .collect();
    back_transform(&red.reflectors, &mut vectors);
    let mut av = vec![0.0; n];
    let mut worst = 0.0f64;
    for (v, &l) in vectors.iter().zip(&values) {
        apply(v, &mut av);
        let r: f64 = av
            .iter()
            .zip(v)
            .map(|(y, x)| (y - l * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let vn = dot(v, v).sqrt();
        let ratio = r / (vn * norm);
        worst = if ratio.is_nan() {
            f64::INFINITY
        } else {
            worst.max(ratio)
        };
    }
    Ok(EigenOutput {
        values,
        residual_bound: Some(worst),
    })
}
