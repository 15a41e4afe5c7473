//! Cayley graphs on `Γ` whose connection set is `S ∪ {t, t⁻¹}` with `S`
//! generating a subgroup `Π` of two double cosets, and the search, lift and
//! augmentation steps that produce `S` at desk scale.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require_all, Hypothesis, GAP_SLACK};
use crate::algebra::{
    double_coset_count, quotient_preimage_sl2, FiniteGroup, GeneratingSet, GroupElement, GroupSpec,
    NormalKind,
};
use crate::error::{Error, Result};
use crate::graph::{cayley_graph, Graph};
use crate::spectra::{
    eigenvalues_with, measured_padding, spectra_match, spectral_gap, SolverConfig, Spectrum,
    SpectrumTransform,
};

/// `(Γ, S, t)` with `Π = ⟨S⟩`.
#[derive(Clone, Debug)]
pub struct CayleyGeneralInstance {
    gamma: Arc<FiniteGroup>,
    s: GeneratingSet,
    t: GroupElement,
    pi: Arc<FiniteGroup>,
}

impl CayleyGeneralInstance {
    pub fn new(gamma: Arc<FiniteGroup>, s: GeneratingSet, t: GroupElement) -> Result<Self> {
        let s = s.reparent(gamma.clone())?;
        if !gamma.contains(&t) {
            return Err(Error::UnknownElement(t.to_string()));
        }
        let pi = Arc::new(s.generated_subgroup()?);
        Ok(Self { gamma, s, t, pi })
    }

    pub fn gamma(&self) -> &Arc<FiniteGroup> {
        &self.gamma
    }

    pub fn s(&self) -> &GeneratingSet {
        &self.s
    }

    pub fn t(&self) -> &GroupElement {
        &self.t
    }

    pub fn pi(&self) -> &Arc<FiniteGroup> {
        &self.pi
    }

    /// `|Γ|/|Π| − 1`.
    pub fn claimed_bound(&self) -> usize {
        self.gamma.order() / self.pi.order() - 1
    }

    /// `S ∪ {t, t⁻¹}`.
    pub fn connection_set(&self) -> Result<GeneratingSet> {
        let mut all = self.s.elements().to_vec();
        all.push(self.t.clone());
        all.push(self.gamma.inv(&self.t));
        GeneratingSet::new(self.gamma.clone(), all)
    }

    /// Measures each hypothesis; `gap(Cay(Π, S))` needs a spectrum of `|Π|`.
    pub fn check_hypotheses(&self, cfg: &SolverConfig) -> Result<Vec<Hypothesis>> {
        let mut checks = Vec::new();
        let symmetric = self
            .s
            .elements()
            .iter()
            .all(|g| self.s.elements().contains(&self.gamma.inv(g)));
        checks.push(Hypothesis::new(
            "S = S⁻¹",
            symmetric,
            format!("|S| = {}", self.s.len()),
        ));

        let s_pi = self.s.reparent(self.pi.clone())?;
        let gap = spectral_gap(&eigenvalues_with(&cayley_graph(&self.pi, &s_pi)?, cfg)?)?;
        checks.push(Hypothesis::new(
            "gap(Cay(Π,S)) ≥ 4",
            gap >= 4.0 - GAP_SLACK,
            format!("measured gap {gap:.12}"),
        ));

        let dc = double_coset_count(&self.gamma, &self.pi)?;
        checks.push(Hypothesis::new(
            "|Π\\Γ/Π| = 2",
            dc == 2,
            format!("{dc} double cosets"),
        ));

        let outside = !self.pi.contains(&self.t);
        checks.push(Hypothesis::new(
            "t outside Π",
            outside,
            format!("t = {}", self.t),
        ));

        let t_inv = self.gamma.inv(&self.t);
        checks.push(Hypothesis::new(
            "t ≠ t⁻¹",
            t_inv != self.t,
            format!("t⁻¹ = {t_inv}"),
        ));
        Ok(checks)
    }
}

/// Graph, spectrum and hypothesis record of a Cayley-general build.
#[derive(Clone, Debug)]
pub struct CayleyGeneralOutcome {
    pub graph: Graph,
    pub spectrum: Spectrum,
    pub hypotheses: Vec<Hypothesis>,
    pub claimed_bound: usize,
    pub degree: usize,
}

/// `Cay(Γ, S ∪ {t, t⁻¹})` after verifying every hypothesis.
pub fn build_cayley_general(
    inst: &CayleyGeneralInstance,
    cfg: &SolverConfig,
) -> Result<CayleyGeneralOutcome> {
    let hypotheses = inst.check_hypotheses(cfg)?;
    require_all(&hypotheses)?;
    let set = inst.connection_set()?;
    let graph = cayley_graph(&inst.gamma, &set)?;
    let spectrum = eigenvalues_with(&graph, cfg)?;
    Ok(CayleyGeneralOutcome {
        graph,
        spectrum,
        hypotheses,
        claimed_bound: inst.claimed_bound(),
        degree: set.len(),
    })
}

/// `(Π × Z_N, S × Z_N)`.
pub fn augment_gap(
    pi: &Arc<FiniteGroup>,
    s: &GeneratingSet,
    n: u64,
) -> Result<(Arc<FiniteGroup>, GeneratingSet)> {
    if n == 0 {
        return Err(Error::Domain(
            "augmentation factor must be at least 1".into(),
        ));
    }
    let zn = Arc::new(FiniteGroup::cyclic(n)?);
    let product = Arc::new(FiniteGroup::direct_product(pi.clone(), zn)?);
    let elements = s.elements().iter().flat_map(|g| {
        (0..n).map(move |k| GroupElement::product(g.clone(), GroupElement::Cyclic(k)))
    });
    let set = GeneratingSet::new(product.clone(), elements)?;
    Ok((product, set))
}

/// A symmetric set found by [`search_generating_set`].
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub set: GeneratingSet,
    pub gap: f64,
    pub tried: u64,
    pub exhaustive: bool,
}

/// Inverse pairs `{g, g⁻¹}` and involutions of a group, identity excluded.
fn symmetric_atoms(pi: &FiniteGroup) -> (Vec<[GroupElement; 2]>, Vec<GroupElement>) {
    let mut pairs = Vec::new();
    let mut involutions = Vec::new();
    for g in pi.elements() {
        if g == pi.identity() {
            continue;
        }
        let gi = pi.inv(g);
        if &gi == g {
            involutions.push(g.clone());
        } else if g < &gi {
            pairs.push([g.clone(), gi]);
        }
    }
    (pairs, involutions)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Symmetric identity-free subsets of `size` elements whose Cayley graph has
/// spectral gap at least `gap_target`.
///
/// When the number of candidates is within `budget` they are enumerated
/// exhaustively in a fixed order; otherwise `budget` candidates are drawn
/// from a generator seeded with `seed`. Returns `Ok(None)` when nothing
/// qualifies, with the number of candidates tried in the error-free path
/// available through [`SearchHit::tried`] on success.
pub fn search_generating_set(
    pi: &Arc<FiniteGroup>,
    size: usize,
    gap_target: f64,
    budget: u64,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<std::result::Result<SearchHit, u64>> {
    let (pairs, involutions) = symmetric_atoms(pi);
    // (number of pairs, number of involutions) splits of `size`
    let shapes: Vec<(usize, usize)> = (0..=size / 2)
        .map(|a| (a, size - 2 * a))
        .filter(|&(a, b)| a <= pairs.len() && b <= involutions.len())
        .collect();
    let counts: Vec<u128> = shapes
        .iter()
        .map(|&(a, b)| binomial(pairs.len(), a).saturating_mul(binomial(involutions.len(), b)))
        .collect();
    let total: u128 = counts.iter().sum();
    let exhaustive = total <= budget as u128;

    let assemble = |pi_idx: &[usize], inv_idx: &[usize]| -> Vec<GroupElement> {
        let mut set: Vec<GroupElement> = pi_idx
            .iter()
            .flat_map(|&i| pairs[i].iter().cloned())
            .collect();
        set.extend(inv_idx.iter().map(|&i| involutions[i].clone()));
        set
    };
    let mut tried = 0u64;
    let mut evaluate = |elements: Vec<GroupElement>| -> Result<Option<SearchHit>> {
        tried += 1;
        let set = GeneratingSet::new(pi.clone(), elements)?;
        let gap = spectral_gap(&eigenvalues_with(&cayley_graph(pi, &set)?, cfg)?)?;
        Ok((gap >= gap_target - GAP_SLACK).then(|| SearchHit {
            set,
            gap,
            tried: 0,
            exhaustive: false,
        }))
    };

    let mut found = None;
    if exhaustive {
        'outer: for &(a, b) in &shapes {
            for pc in combinations(pairs.len(), a) {
                for ic in combinations(involutions.len(), b) {
                    if let Some(hit) = evaluate(assemble(&pc, &ic))? {
                        found = Some(hit);
                        break 'outer;
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget {
            // shape chosen with probability proportional to its candidate count
            let mut pick = rng.random_range(0..total);
            let mut shape = shapes[0];
            for (s, &c) in shapes.iter().zip(&counts) {
                if pick < c {
                    shape = *s;
                    break;
                }
                pick -= c;
            }
            let mut pc = index::sample(&mut rng, pairs.len(), shape.0).into_vec();
            let mut ic = index::sample(&mut rng, involutions.len(), shape.1).into_vec();
            pc.sort_unstable();
            ic.sort_unstable();
            if let Some(hit) = evaluate(assemble(&pc, &ic))? {
                found = Some(hit);
                break;
            }
        }
    }
    Ok(match found {
        Some(hit) => Ok(SearchHit {
            tried,
            exhaustive,
            ..hit
        }),
        None => Err(tried),
    })
}

/// Where the `SL(2,q)` connection set of the semidirect instance comes from.
#[derive(Clone, Debug)]
pub enum Sl2FamilySource {
    /// A symmetric set on `PSL(2,q)` supplied by the caller.
    Given(GeneratingSet),
    /// Search `PSL(2,q)`, then `SL(2,q)`, then fall back to augmentation.
    Search { budget: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Sl2FamilyOptions {
    pub q: u64,
    pub source: Sl2FamilySource,
    /// Size of the `PSL(2,q)` set; the lift doubles it.
    pub size: usize,
    /// Force augmentation by `Z_N` after the lift.
    pub augment: Option<u64>,
}

impl Sl2FamilyOptions {
    pub fn search(q: u64, budget: u64, seed: u64) -> Self {
        Self {
            q,
            source: Sl2FamilySource::Search { budget, seed },
            size: 8,
            augment: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sl2FamilyRoute {
    /// Lift of a `PSL(2,q)` set with gap above 2.
    Lift,
    /// Direct `SL(2,q)` search with gap at least 4.
    Direct,
    /// `S × Z_N` on `SL(2,q) × Z_N`.
    Augmented,
}

/// A spectrum relation `spec(B) = scale·spec(A) ⊎ {0}^pad`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LiftCheck {
    pub scale: f64,
    pub expected_padding: usize,
    pub measured_padding: Option<usize>,
    pub matched: bool,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct Sl2FamilyOutcome {
    pub route: Sl2FamilyRoute,
    pub search_tried: u64,
    pub search_exhaustive: bool,
    pub psl_set: Option<GeneratingSet>,
    pub psl_gap: Option<f64>,
    /// Connection set on the top group `Π` (before adding `t`).
    pub top_set: GeneratingSet,
    pub top_gap: f64,
    pub lift: Option<LiftCheck>,
    pub augment: Option<(u64, LiftCheck)>,
    pub instance: CayleyGeneralInstance,
    pub cayley: CayleyGeneralOutcome,
}

fn relation_check(a: &Spectrum, b: &Spectrum, scale: f64, expected: usize, tol: f64) -> LiftCheck {
    let transform = SpectrumTransform::scale(scale);
    LiftCheck {
        scale,
        expected_padding: expected,
        measured_padding: measured_padding(a, b, &transform, 0.0, tol),
        matched: spectra_match(a, b, &transform.padded(0.0, expected), tol),
        tol,
    }
}

/// Tolerance for exact spectrum relations between small Cayley graphs.
const RELATION_TOL: f64 = 1e-9;

/// Semidirect instance `Γ = Π ⋉ F_q²` with `Π ⊇ SL(2,q)` carrying a
/// symmetric set of gap at least 4, and its Cayley graph.
pub fn build_sl2_family(opts: &Sl2FamilyOptions, cfg: &SolverConfig) -> Result<Sl2FamilyOutcome> {
    let q = opts.q;
    let psl = Arc::new(FiniteGroup::psl2(q)?);
    let sl = Arc::new(FiniteGroup::sl2(q)?);
    let gap_of = |g: &Arc<FiniteGroup>, s: &GeneratingSet| -> Result<(Spectrum, f64)> {
        let spec = eigenvalues_with(&cayley_graph(g, s)?, cfg)?;
        let gap = spectral_gap(&spec)?;
        Ok((spec, gap))
    };

    let mut tried = 0;
    let mut exhaustive = false;
    let (psl_set, route) = match &opts.source {
        Sl2FamilySource::Given(s0) => {
            let s0 = s0.reparent(psl.clone())?;
            let (_, gap) = gap_of(&psl, &s0)?;
            if !(gap > 2.0) {
                return Err(Error::HypothesisFailure(format!(
                    "gap(Cay(PSL(2,{q}),S₀)) = {gap} is not above 2"
                )));
            }
            (Some(s0), Sl2FamilyRoute::Lift)
        }
        Sl2FamilySource::Search { budget, seed } => {
            match search_generating_set(&psl, opts.size, 2.0 + 1e-6, *budget, *seed, cfg)? {
                Ok(hit) => {
                    tried += hit.tried;
                    exhaustive = hit.exhaustive;
                    (Some(hit.set), Sl2FamilyRoute::Lift)
                }
                Err(n) => {
                    tried += n;
                    (None, Sl2FamilyRoute::Direct)
                }
            }
        }
    };

    let mut lift = None;
    let mut psl_gap = None;
    let (mut top, mut top_set, mut route) = match psl_set.as_ref() {
        Some(s0) => {
            let (psl_spec, g0) = gap_of(&psl, s0)?;
            psl_gap = Some(g0);
            let lifted = quotient_preimage_sl2(s0, sl.clone())?;
            let (sl_spec, _) = gap_of(&sl, &lifted)?;
            lift = Some(relation_check(
                &psl_spec,
                &sl_spec,
                2.0,
                psl.order(),
                RELATION_TOL,
            ));
            (sl.clone(), lifted, route)
        }
        None => {
            let Sl2FamilySource::Search { budget, seed } = opts.source else {
                unreachable!("a given set always lifts")
            };
            match search_generating_set(&sl, 2 * opts.size, 4.0, budget, seed, cfg)? {
                Ok(hit) => {
                    tried += hit.tried;
                    (sl.clone(), hit.set, Sl2FamilyRoute::Direct)
                }
                Err(n) => {
                    tried += n;
                    // any connected set, then scale its gap past 4
                    let hit = search_generating_set(&sl, 2 * opts.size, 1e-6, budget, seed, cfg)?
                        .map_err(|n2| Error::SearchExhausted { tried: tried + n2 })?;
                    tried += hit.tried;
                    let n = (4.0 / hit.gap).ceil().max(2.0) as u64;
                    let (prod, set) = augment_gap(&sl, &hit.set, n)?;
                    let augment = relation_check(
                        &gap_of(&sl, &hit.set)?.0,
                        &gap_of(&prod, &set)?.0,
                        n as f64,
                        sl.order() * (n as usize - 1),
                        RELATION_TOL,
                    );
                    return finish(
                        q,
                        prod,
                        set,
                        Some((n, augment)),
                        Sl2FamilyRoute::Augmented,
                        tried,
                        exhaustive,
                        None,
                        None,
                        None,
                        cfg,
                    );
                }
            }
        }
    };

    let mut augment = None;
    if let Some(n) = opts.augment {
        let base_spec = gap_of(&top, &top_set)?.0;
        let (prod, set) = augment_gap(&top, &top_set, n)?;
        let check = relation_check(
            &base_spec,
            &gap_of(&prod, &set)?.0,
            n as f64,
            top.order() * (n as usize - 1),
            RELATION_TOL,
        );
        augment = Some((n, check));
        top = prod;
        top_set = set;
        route = Sl2FamilyRoute::Augmented;
    }
    finish(
        q, top, top_set, augment, route, tried, exhaustive, psl_set, psl_gap, lift, cfg,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    q: u64,
    top: Arc<FiniteGroup>,
    top_set: GeneratingSet,
    augment: Option<(u64, LiftCheck)>,
    route: Sl2FamilyRoute,
    search_tried: u64,
    search_exhaustive: bool,
    psl_set: Option<GeneratingSet>,
    psl_gap: Option<f64>,
    lift: Option<LiftCheck>,
    cfg: &SolverConfig,
) -> Result<Sl2FamilyOutcome> {
    let top_gap = spectral_gap(&eigenvalues_with(&cayley_graph(&top, &top_set)?, cfg)?)?;
    // Γ = Π ⋉ F_q², with Π acting through its SL(2,q) factor.
    let top_spec: GroupSpec = match augment {
        Some((n, _)) => {
            GroupSpec::Product(Box::new(GroupSpec::Sl2(q)), Box::new(GroupSpec::Cyclic(n)))
        }
        None => GroupSpec::Sl2(q),
    };
    let spec = GroupSpec::Semidirect {
        top: Box::new(top_spec),
        normal: NormalKind::Vec2,
    };
    let gamma = Arc::new(spec.build()?);
    let zero = GroupElement::Vec2([0, 0]);
    let s = GeneratingSet::new(
        gamma.clone(),
        top_set
            .elements()
            .iter()
            .map(|g| GroupElement::semidirect(g.clone(), zero.clone())),
    )?;
    let t = GroupElement::semidirect(top.identity().clone(), GroupElement::Vec2([1, 0]));
    let instance = CayleyGeneralInstance::new(gamma, s, t)?;
    let cayley = build_cayley_general(&instance, cfg)?;
    Ok(Sl2FamilyOutcome {
        route,
        search_tried,
        search_exhaustive,
        psl_set,
        psl_gap,
        top_set,
        top_gap,
        lift,
        augment,
        instance,
        cayley,
    })
}
