//! Maximum-degree-4 graphs on `affine(q)`: the Cayley graph with
//! `S = {s, s⁻¹}` and `t` a translation, with every `t`-edge replaced by a
//! path of `m` edges.

use std::sync::Arc;

use super::{require_all, Hypothesis, GAP_SLACK};
use crate::algebra::{double_coset_count, FiniteGroup, GeneratingSet, GroupElement, PrimeField};
use crate::chebyshev::y0;
use crate::error::{Error, Result};
use crate::graph::{cayley_graph, overlay_subdivide, Graph};
use crate::spectra::{
    eigenvalues_with, second_multiplicity, spectral_gap, MultiplicityReport, SolverConfig, Spectrum,
};

/// `⌈2 log₂(q − 1)⌉ − 2`, which may fall below 4 for small `q`.
pub fn growth_formula_m(q: u64) -> i64 {
    // exact ceiling: smallest k with 2^k ≥ (q − 1)²
    let sq = u128::from(q - 1) * u128::from(q - 1);
    let k = (0..128)
        .find(|&k| (1u128 << k) >= sq)
        .expect("(q−1)² < 2^128");
    k as i64 - 2
}

/// [`growth_formula_m`] raised to at least 4.
pub fn default_m(q: u64) -> usize {
    growth_formula_m(q).max(4) as usize
}

/// `(q, s, t, m)` on `Γ = affine(q)` with `Π = F_q^×`.
#[derive(Clone, Debug)]
pub struct BoundedInstance {
    q: u64,
    s: u64,
    t: GroupElement,
    m: usize,
    m_floored: bool,
    gamma: Arc<FiniteGroup>,
}

impl BoundedInstance {
    /// Smallest primitive root for `s`, unit translation for `t`, and
    /// [`default_m`] when `m` is not given.
    pub fn new(q: u64, m: Option<usize>) -> Result<Self> {
        let field = PrimeField::new(q)?;
        if q < 5 {
            return Err(Error::Precondition(format!("q = {q} must be at least 5")));
        }
        let gamma = Arc::new(FiniteGroup::affine(q)?);
        let m_floored = m.is_none() && growth_formula_m(q) < 4;
        Ok(Self {
            q,
            s: field.primitive_root(),
            t: GroupElement::Affine { scale: 1, shift: 1 },
            m: m.unwrap_or_else(|| default_m(q)),
            m_floored,
            gamma,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn t(&self) -> &GroupElement {
        &self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether `m` was raised to 4 from a smaller formula value.
    pub fn m_floored(&self) -> bool {
        self.m_floored
    }

    /// Whether `m` equals the unfloored [`growth_formula_m`].
    pub fn m_is_growth_formula(&self) -> bool {
        self.m as i64 == growth_formula_m(self.q)
    }

    pub fn gamma(&self) -> &Arc<FiniteGroup> {
        &self.gamma
    }

    /// `2 − 2cos(2π/(q − 1))`, the gap of the cycle `Cay(F_q^×, {s, s⁻¹})`.
    pub fn kappa(&self) -> f64 {
        2.0 - 2.0 * (2.0 * std::f64::consts::PI / (self.q - 1) as f64).cos()
    }

    /// `S = {s, s⁻¹}` inside `Γ`.
    pub fn connection_set(&self) -> Result<GeneratingSet> {
        let s = GroupElement::Affine {
            scale: self.s,
            shift: 0,
        };
        GeneratingSet::symmetric_closure(self.gamma.clone(), [s])
    }

    pub fn vertex_count(&self) -> usize {
        self.gamma.order() * self.m
    }
}

/// Graph, spectrum and diagnostics of a bounded-degree build.
#[derive(Clone, Debug)]
pub struct BoundedOutcome {
    pub graph: Graph,
    pub spectrum: Spectrum,
    pub hypotheses: Vec<Hypothesis>,
    pub kappa: f64,
    pub measured_kappa: f64,
    pub multiplicity: MultiplicityReport,
    /// `|Γ|/|Π| − 1 = q − 1`.
    pub claimed_bound: usize,
    pub y0: f64,
}

/// Builds the subdivided graph after checking every hypothesis.
pub fn build_bounded(inst: &BoundedInstance, cfg: &SolverConfig) -> Result<BoundedOutcome> {
    let gamma = &inst.gamma;
    let set = inst.connection_set()?;
    let pi = Arc::new(set.generated_subgroup()?);
    let s_pi = set.reparent(pi.clone())?;
    let measured_kappa = spectral_gap(&eigenvalues_with(&cayley_graph(&pi, &s_pi)?, cfg)?)?;
    let kappa = inst.kappa();
    let size_s = set.len();
    let t_inv = gamma.inv(&inst.t);
    let dc = double_coset_count(gamma, &pi)?;
    let power = (size_s as f64).powi(inst.m as i32 - 1);

    let hypotheses = vec![
        Hypothesis::new("|S| ≥ 2", size_s >= 2, format!("|S| = {size_s}")),
        Hypothesis::new("|Π\\Γ/Π| = 2", dc == 2, format!("{dc} double cosets")),
        Hypothesis::new(
            "t outside Π",
            !pi.contains(&inst.t),
            format!("t = {}", inst.t),
        ),
        Hypothesis::new("t ≠ t⁻¹", t_inv != inst.t, format!("t⁻¹ = {t_inv}")),
        Hypothesis::new(
            "κ matches closed form",
            (measured_kappa - kappa).abs() <= GAP_SLACK * kappa.max(1.0) + 1e-9,
            format!("measured {measured_kappa:.12}, closed form {kappa:.12}"),
        ),
        Hypothesis::new("m ≥ 4", inst.m >= 4, format!("m = {}", inst.m)),
        Hypothesis::new(
            "|S|^(m−1) ≥ 4/κ",
            power >= 4.0 / kappa,
            format!("{power} vs {:.12}", 4.0 / kappa),
        ),
    ];
    require_all(&hypotheses)?;

    let h1 = cayley_graph(gamma, &set)?;
    let h2 = cayley_graph(
        gamma,
        &GeneratingSet::symmetric_closure(gamma.clone(), [inst.t.clone()])?,
    )?;
    let graph = overlay_subdivide(&h1, &h2, inst.m)?;
    let spectrum = eigenvalues_with(&graph, cfg)?;
    let multiplicity = second_multiplicity(&spectrum, spectrum.default_tol())?;
    Ok(BoundedOutcome {
        graph,
        spectrum,
        hypotheses,
        kappa,
        measured_kappa,
        multiplicity,
        claimed_bound: gamma.order() / pi.order() - 1,
        y0: y0(size_s, inst.m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_formula() {
        assert_eq!(growth_formula_m(5), 2);
        assert_eq!(default_m(5), 4);
        assert_eq!(growth_formula_m(13), 6);
        assert_eq!(growth_formula_m(17), 6);
        assert_eq!(growth_formula_m(7), 4);
        // (q − 1)² a power of two: log is exact
        assert_eq!(growth_formula_m(9), 4);
        for q in [5u64, 7, 11, 13, 17, 101, 1009] {
            let f = (2.0 * ((q - 1) as f64).log2()).ceil() as i64 - 2;
            assert_eq!(growth_formula_m(q), f, "q = {q}");
        }
    }

    #[test]
    fn instance_defaults() {
        let i = BoundedInstance::new(5, None).unwrap();
        assert_eq!((i.s(), i.m()), (2, 4));
        assert!(i.m_floored());
        assert!(!i.m_is_growth_formula());
        assert!((i.kappa() - 2.0).abs() < 1e-15);
        let j = BoundedInstance::new(13, None).unwrap();
        assert_eq!((j.s(), j.m()), (2, 6));
        assert!(!j.m_floored() && j.m_is_growth_formula());
        assert!((j.kappa() - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(
            BoundedInstance::new(4, None).unwrap_err(),
            Error::NotPrime(4)
        );
        assert!(matches!(
            BoundedInstance::new(3, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn q5_graph() {
        let inst = BoundedInstance::new(5, None).unwrap();
        let out = build_bounded(&inst, &SolverConfig::default()).unwrap();
        let g = &out.graph;
        assert_eq!(g.n(), 80);
        assert_eq!(g.max_degree(), 4);
        assert!(g.is_connected());
        assert!((0..20).all(|v| g.degree(v) == 4));
        assert!((20..80).all(|v| g.degree(v) == 2));
        assert_eq!(out.claimed_bound, 4);
        assert!(out.multiplicity.count >= 4);
        assert!(!out.multiplicity.ambiguous);
        assert!(out.multiplicity.target / 2.0 > out.y0);
    }

    #[test]
    fn small_m_is_rejected() {
        // q = 13 needs 2^(m−1) ≥ 14.93, so m = 4 fails
        let inst = BoundedInstance::new(13, Some(4)).unwrap();
        let err = build_bounded(&inst, &SolverConfig::default()).unwrap_err();
        assert!(
            matches!(&err, Error::HypothesisFailure(m) if m.starts_with("|S|^(m−1)")),
            "{err}"
        );
        let inst = BoundedInstance::new(5, Some(3)).unwrap();
        let err = build_bounded(&inst, &SolverConfig::default()).unwrap_err();
        assert!(
            matches!(&err, Error::HypothesisFailure(m) if m.starts_with("m ≥ 4")),
            "{err}"
        );
    }
}
