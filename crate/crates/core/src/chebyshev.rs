//! Chebyshev polynomials of the first and second kind, the inequalities the
//! subdivision arguments rest on, and the transfer function `f(λ)` of the
//! `K₄` blowup with its derivative and distinguished roots.
//!
//! For `x > 1` write `x = (α + α⁻¹)/2` with `α > 1`. Then
//! `T_m(x) = (α^m + α^{−m})/2` and `U_m(x) = Σ_{i=0}^{m} α^{m−2i}`; the sum
//! form of `U` avoids the cancellation of `(α^{m+1} − α^{−m−1})/(α − α⁻¹)`
//! near `α = 1`.

use crate::error::{Error, Result};

/// `(3 + √17)/2`, the positive root of `α = 2/α + 3`.
pub const ALPHA0: f64 = 3.561_552_812_808_830_3;

/// Constant in the spectral-gap lower bound `C₁ α₀^{−ℓ}`.
pub const C1: f64 = 0.001;

/// Path lengths above this overflow `α^ℓ` near the top of the spectrum.
pub const MAX_ELL: usize = 180;

/// Abscissa tolerance for every bisection in this module.
pub const ROOT_TOL: f64 = 1e-12;

/// Slack for evaluated inequalities, relative to the larger side.
const INEQ_SLACK: f64 = 1e-12;

/// Parameters of the transfer function for path length `ell`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferParams {
    pub ell: usize,
}

impl TransferParams {
    pub fn new(ell: usize) -> Result<Self> {
        check_ell(ell, 2)?;
        Ok(Self { ell })
    }

    pub fn alpha0(&self) -> f64 {
        ALPHA0
    }

    pub fn c1(&self) -> f64 {
        C1
    }

    /// `C₁ α₀^{−ℓ}`.
    pub fn gap_bound(&self) -> f64 {
        C1 * ALPHA0.powi(-(self.ell as i32))
    }
}

fn check_ell(ell: usize, min: usize) -> Result<()> {
    if ell < min {
        return Err(Error::Precondition(format!(
            "path length {ell} must be at least {min}"
        )));
    }
    if ell > MAX_ELL {
        return Err(Error::Precondition(format!(
            "path length {ell} exceeds the cap {MAX_ELL}"
        )));
    }
    Ok(())
}

fn alpha_of_x(x: f64) -> f64 {
    x + (x * x - 1.0).sqrt()
}

fn parity(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_{i=0}^{m} α^{m−2i}`, summed from the smallest terms outward.
fn geometric_u(m: usize, alpha: f64) -> f64 {
    let inv = 1.0 / alpha;
    let mut lo = inv.powi(m as i32);
    let mut hi = alpha.powi(m as i32);
    let r2 = alpha * alpha;
    let mut sum = 0.0;
    let mut i = 0;
    while 2 * i < m {
        sum += lo + hi;
        lo *= r2;
        hi /= r2;
        i += 1;
    }
    if m % 2 == 0 {
        sum += 1.0;
    }
    sum
}

/// Chebyshev polynomial of the first kind `T_m(x)`.
pub fn cheb_t(m: usize, x: f64) -> f64 {
    if x < -1.0 {
        return parity(m) * cheb_t(m, -x);
    }
    if x > 1.0 {
        let a = alpha_of_x(x);
        return 0.5 * (a.powi(m as i32) + a.powi(-(m as i32)));
    }
    let (mut prev, mut cur) = (1.0, x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// Chebyshev polynomial of the second kind `U_m(x)`.
pub fn cheb_u(m: usize, x: f64) -> f64 {
    if x < -1.0 {
        return parity(m) * cheb_u(m, -x);
    }
    if x > 1.0 {
        return geometric_u(m, alpha_of_x(x));
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// `U_{m−1}(x)` with the convention `U_{−1} = 0`.
pub fn cheb_u_prev(m: usize, x: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        cheb_u(m - 1, x)
    }
}

/// The `α > 1` with `α + α⁻¹ = λ`.
pub fn alpha_of_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 2.0) {
        return Err(Error::Domain(format!("λ = {lambda} must exceed 2")));
    }
    Ok(0.5 * (lambda + (lambda * lambda - 4.0).sqrt()))
}

/// Whether `(T_m(z) − 1)/U_{m−1}(z)` strictly increases along `samples`.
pub fn ratio_fact_increasing(m: usize, samples: &[f64]) -> Result<bool> {
    if m == 0 {
        return Err(Error::Precondition("degree must be at least 1".into()));
    }
    if let Some(z) = samples.iter().find(|&&z| !(z >= 1.0)) {
        return Err(Error::Domain(format!("sample {z} is below 1")));
    }
    let ratio = |z: f64| (cheb_t(m, z) - 1.0) / cheb_u(m - 1, z);
    Ok(samples.windows(2).all(|w| ratio(w[0]) < ratio(w[1])))
}

fn leq_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQ_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

fn require_m(m: usize) -> Result<()> {
    if m < 4 {
        return Err(Error::Precondition(format!(
            "subdivision length {m} must be at least 4"
        )));
    }
    Ok(())
}

/// `U_{m−1}(z) ≥ ((2T_m(z) + 2)/U_{m−1}(z))^{m−1}` for `m ≥ 4`, `z ≥ 1`.
pub fn cheb_fact_b(m: usize, z: f64) -> Result<bool> {
    require_m(m)?;
    if !(z >= 1.0) {
        return Err(Error::Domain(format!("z = {z} is below 1")));
    }
    let u = cheb_u(m - 1, z);
    let rhs = ((2.0 * cheb_t(m, z) + 2.0) / u).powi(m as i32 - 1);
    Ok(leq_with_slack(rhs, u))
}

/// `2T_m(y) + 2 − |S| U_{m−1}(y)`.
pub fn y0_polynomial(size_s: usize, m: usize, y: f64) -> f64 {
    2.0 * cheb_t(m, y) + 2.0 - size_s as f64 * cheb_u_prev(m, y)
}

/// Bisection on `[lo, hi]` where `g(lo) ≤ target < g(hi)`. Runs to adjacent
/// floats, well inside [`ROOT_TOL`], since steep polynomials need the last
/// bits to keep their residual small.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest real root `y₀ > 1` of `2T_m(y) + 2 − |S| U_{m−1}(y)`.
///
/// Writing `y = (α + α⁻¹)/2`, the polynomial is positive once
/// `α − α⁻¹ ≥ |S|`, so every root lies below the `y` with `α = |S| + 1`. The
/// last sign change on a grid below that bound is then refined by bisection.
pub fn y0(size_s: usize, m: usize) -> Result<f64> {
    require_m(m)?;
    if size_s < 2 {
        return Err(Error::Precondition(format!(
            "|S| = {size_s} must be at least 2"
        )));
    }
    let g = |y: f64| y0_polynomial(size_s, m, y);
    let a = size_s as f64 + 1.0;
    let hi = 0.5 * (a + 1.0 / a);
    if !(g(1.0) < 0.0 && g(hi) > 0.0) {
        return Err(Error::BracketFailure(format!(
            "no sign change on [1, {hi}]"
        )));
    }
    const GRID: usize = 4096;
    let at = |k: usize| 1.0 + (hi - 1.0) * k as f64 / GRID as f64;
    let k = (0..GRID)
        .rev()
        .find(|&k| g(at(k)) <= 0.0)
        .expect("g(1) < 0");
    Ok(bisect(g, at(k), at(k + 1), 0.0))
}

/// `2T_m(x) ≤ U_{m−1}(x)(|S| − κ) + 2`.
pub fn irrep_gap_bound(x: f64, m: usize, size_s: usize, kappa: f64) -> Result<bool> {
    require_m(m)?;
    let lhs = 2.0 * cheb_t(m, x);
    let rhs = cheb_u(m - 1, x) * (size_s as f64 - kappa) + 2.0;
    Ok(leq_with_slack(lhs, rhs))
}

/// Outcome of a check whose hypothesis may not hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applicability {
    Holds,
    Fails,
    NotApplicable,
}

/// When `|S|^{m−1} ≥ 4/κ`, checks that no sample `x > y₀` satisfies
/// [`irrep_gap_bound`]; otherwise reports [`Applicability::NotApplicable`].
pub fn cheby_gap_implication(
    m: usize,
    size_s: usize,
    kappa: f64,
    samples: &[f64],
) -> Result<Applicability> {
    require_m(m)?;
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ = {kappa} must be positive")));
    }
    if (size_s as f64).powi(m as i32 - 1) < 4.0 / kappa {
        return Ok(Applicability::NotApplicable);
    }
    let y = y0(size_s, m)?;
    for &x in samples.iter().filter(|&&x| x > y) {
        if irrep_gap_bound(x, m, size_s, kappa)? {
            return Ok(Applicability::Fails);
        }
    }
    Ok(Applicability::Holds)
}

/// `B(α) = U_{ℓ−1}(λ/2) = Σ_{i=0}^{ℓ−1} α^{ℓ−1−2i}` and `B′(α)`.
fn b_and_derivative(alpha: f64, ell: usize) -> (f64, f64) {
    let mut b = 0.0;
    let mut db = 0.0;
    for i in 0..ell {
        let e = ell as i32 - 1 - 2 * i as i32;
        b += alpha.powi(e);
        db += e as f64 * alpha.powi(e - 1);
    }
    (b, db)
}

/// `A(α) = α − 2α⁻¹ − 3 + 3α^{−ℓ}/B(α)` and `A′(α)`.
fn a_and_derivative(alpha: f64, ell: usize, b: f64, db: f64) -> (f64, f64) {
    let tail = alpha.powi(-(ell as i32));
    let a = alpha - 2.0 / alpha - 3.0 + 3.0 * tail / b;
    let dtail = -(ell as f64) * tail / alpha;
    let da = 1.0 + 2.0 / (alpha * alpha) + 3.0 * (dtail * b - tail * db) / (b * b);
    (a, da)
}

/// Transfer function `f(λ) = A(α) B(α)` for `λ = α + α⁻¹ > 2`.
pub fn f_eval(lambda: f64, ell: usize) -> Result<f64> {
    check_ell(ell, 2)?;
    Ok(f_of_alpha(alpha_of_lambda(lambda)?, ell))
}

/// `A(α) B(α)` for `α > 1`.
pub fn f_of_alpha(alpha: f64, ell: usize) -> f64 {
    let (b, db) = b_and_derivative(alpha, ell);
    a_and_derivative(alpha, ell, b, db).0 * b
}

/// `f` evaluated directly from its Chebyshev form,
/// `(λ − 3U_{ℓ−2}(λ/2)/U_{ℓ−1}(λ/2) − 3) U_{ℓ−1}(λ/2)`.
pub fn f_eval_chebyshev(lambda: f64, ell: usize) -> Result<f64> {
    check_ell(ell, 2)?;
    if !(lambda > 2.0) {
        return Err(Error::Domain(format!("λ = {lambda} must exceed 2")));
    }
    let x = lambda / 2.0;
    let u1 = cheb_u(ell - 1, x);
    let u2 = cheb_u(ell - 2, x);
    Ok((lambda - 3.0 * u2 / u1 - 3.0) * u1)
}

/// `f′(λ) = (A′B + AB′)/(1 − α⁻²)`.
pub fn f_prime(lambda: f64, ell: usize) -> Result<f64> {
    check_ell(ell, 2)?;
    let alpha = alpha_of_lambda(lambda)?;
    let (b, db) = b_and_derivative(alpha, ell);
    let (a, da) = a_and_derivative(alpha, ell, b, db);
    Ok((da * b + a * db) / (1.0 - 1.0 / (alpha * alpha)))
}

fn require_long_paths(ell: usize) -> Result<()> {
    if ell <= 10 {
        return Err(Error::Precondition(format!(
            "path length {ell} must exceed 10"
        )));
    }
    check_ell(ell, 11)
}

/// Smallest `λ ≥ start` on the doubling ladder with `f(λ) > target`.
fn expand_upward(ell: usize, start: f64, target: f64) -> Result<f64> {
    let mut step = 0.25;
    for _ in 0..64 {
        let hi = start + step;
        if f_eval(hi, ell)? > target {
            return Ok(hi);
        }
        step *= 2.0;
    }
    Err(Error::BracketFailure(format!(
        "f stays below {target} above {start}"
    )))
}

/// The unique `λ* > 3` with `f(λ*) = 0`.
pub fn lambda_star(ell: usize) -> Result<f64> {
    require_long_paths(ell)?;
    if !(f_eval(3.0, ell)? < 0.0) {
        return Err(Error::BracketFailure("f(3) is not negative".into()));
    }
    let hi = expand_upward(ell, 3.0, 0.0)?;
    Ok(bisect(|l| f_eval(l, ell).expect("λ > 2"), 3.0, hi, 0.0))
}

/// The unique `λ ≥ λ*` with `f(λ) = μ`.
pub fn f_inverse(mu: f64, ell: usize) -> Result<f64> {
    require_long_paths(ell)?;
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!("μ = {mu} must be nonnegative")));
    }
    let lo = lambda_star(ell)?;
    if mu == 0.0 {
        return Ok(lo);
    }
    let hi = expand_upward(ell, lo, mu)?;
    Ok(bisect(|l| f_eval(l, ell).expect("λ > 2"), lo, hi, mu))
}

/// `f(λ) ≥ (α − α₀) α₀^{ℓ−1}` for `λ ≥ λ*` with `α(λ) ≥ α₀`.
pub fn f_lower_bound_check(lambda: f64, ell: usize) -> Result<bool> {
    require_long_paths(ell)?;
    let alpha = alpha_of_lambda(lambda)?;
    // λ = α₀ + α₀⁻¹ rounds to an α a few ulps either side of α₀
    if alpha < ALPHA0 * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("α(λ) = {alpha} is below α₀")));
    }
    let bound = (alpha - ALPHA0).max(0.0) * ALPHA0.powi(ell as i32 - 1);
    Ok(leq_with_slack(bound, f_eval(lambda, ell)?))
}

/// `0.01 α₀^ℓ < f′(λ) < 3 α₀^ℓ`.
pub fn f_prime_window(lambda: f64, ell: usize) -> Result<bool> {
    require_long_paths(ell)?;
    let d = f_prime(lambda, ell)?;
    let scale = ALPHA0.powi(ell as i32);
    Ok(0.01 * scale < d && d < 3.0 * scale)
}
