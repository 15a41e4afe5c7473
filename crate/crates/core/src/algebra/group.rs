//! Enumerated finite groups.
//!
//! Every group is stored as an explicit, sorted list of elements together with
//! a hash index, so membership and positional lookup are O(1). Products are
//! computed on the fly from the group's [`Law`]; nothing quadratic in the order
//! is ever materialized.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::action::{ActionRule, GroupAction};
use super::field::PrimeField;
use crate::error::{Error, Result};

/// Default cap on the order of an enumerated group.
pub const DEFAULT_ORDER_CAP: usize = 100_000;

/// A group element in one of the concrete encodings used by the library.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// `k mod n` in the additive cyclic group.
    Cyclic(u64),
    /// A unit of `F_p`.
    Unit(u64),
    /// A vector of the additive group `F_p²`.
    Vec2([u64; 2]),
    /// Row-major `[a, b, c, d]` with `ad - bc = 1`.
    Mat2([u64; 4]),
    /// Canonical representative of `±M`: the first nonzero entry lies in `[1, p/2]`.
    ProjMat2([u64; 4]),
    /// The affine map `x ↦ scale·x + shift`.
    Affine { scale: u64, shift: u64 },
    /// `(π, v)` in a semidirect product.
    Semidirect(Box<GroupElement>, Box<GroupElement>),
    /// `(g, h)` in a direct product.
    Product(Box<GroupElement>, Box<GroupElement>),
}

impl GroupElement {
    pub fn semidirect(top: GroupElement, normal: GroupElement) -> Self {
        GroupElement::Semidirect(Box::new(top), Box::new(normal))
    }

    pub fn product(left: GroupElement, right: GroupElement) -> Self {
        GroupElement::Product(Box::new(left), Box::new(right))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Cyclic(k) => write!(f, "{k}"),
            GroupElement::Unit(u) => write!(f, "u{u}"),
            GroupElement::Vec2([x, y]) => write!(f, "<{x},{y}>"),
            GroupElement::Mat2([a, b, c, d]) => write!(f, "[{a} {b}; {c} {d}]"),
            GroupElement::ProjMat2([a, b, c, d]) => write!(f, "±[{a} {b}; {c} {d}]"),
            GroupElement::Affine { scale, shift } => write!(f, "x->{scale}x+{shift}"),
            GroupElement::Semidirect(p, v) => write!(f, "({p} | {v})"),
            GroupElement::Product(g, h) => write!(f, "({g}, {h})"),
        }
    }
}

/// Canonical `±M` representative in `PSL(2,p)`.
pub fn canonical_projective(field: &PrimeField, m: [u64; 4]) -> [u64; 4] {
    let p = field.modulus();
    match m.iter().find(|&&x| x != 0) {
        Some(&first) if 2 * first > p => m.map(|x| field.neg(x)),
        _ => m,
    }
}

/// Multiplication rule of a group.
#[derive(Clone, Debug)]
pub enum Law {
    Cyclic {
        n: u64,
    },
    Units(PrimeField),
    Vec2(PrimeField),
    Sl2(PrimeField),
    Psl2(PrimeField),
    Affine(PrimeField),
    Semidirect {
        top: Arc<FiniteGroup>,
        normal: Arc<FiniteGroup>,
        action: ActionRule,
    },
    Product {
        left: Arc<FiniteGroup>,
        right: Arc<FiniteGroup>,
    },
}

fn mat_mul(k: &PrimeField, x: &[u64; 4], y: &[u64; 4]) -> [u64; 4] {
    let [a, b, c, d] = *x;
    let [e, f, g, h] = *y;
    [
        k.add(k.mul(a, e), k.mul(b, g)),
        k.add(k.mul(a, f), k.mul(b, h)),
        k.add(k.mul(c, e), k.mul(d, g)),
        k.add(k.mul(c, f), k.mul(d, h)),
    ]
}

fn mat_inv(k: &PrimeField, x: &[u64; 4]) -> [u64; 4] {
    let [a, b, c, d] = *x;
    [d, k.neg(b), k.neg(c), a]
}

fn mismatch(a: &GroupElement, b: &GroupElement) -> ! {
    panic!("elements {a} and {b} do not belong to this group law")
}

impl Law {
    pub fn identity(&self) -> GroupElement {
        match self {
            Law::Cyclic { .. } => GroupElement::Cyclic(0),
            Law::Units(_) => GroupElement::Unit(1),
            Law::Vec2(_) => GroupElement::Vec2([0, 0]),
            Law::Sl2(_) => GroupElement::Mat2([1, 0, 0, 1]),
            Law::Psl2(_) => GroupElement::ProjMat2([1, 0, 0, 1]),
            Law::Affine(_) => GroupElement::Affine { scale: 1, shift: 0 },
            Law::Semidirect { top, normal, .. } => {
                GroupElement::semidirect(top.identity().clone(), normal.identity().clone())
            }
            Law::Product { left, right } => {
                GroupElement::product(left.identity().clone(), right.identity().clone())
            }
        }
    }

    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (self, x, y) {
            (Law::Cyclic { n }, E::Cyclic(a), E::Cyclic(b)) => E::Cyclic((a + b) % n),
            (Law::Units(k), E::Unit(a), E::Unit(b)) => E::Unit(k.mul(*a, *b)),
            (Law::Vec2(k), E::Vec2([a, b]), E::Vec2([c, d])) => {
                E::Vec2([k.add(*a, *c), k.add(*b, *d)])
            }
            (Law::Sl2(k), E::Mat2(a), E::Mat2(b)) => E::Mat2(mat_mul(k, a, b)),
            (Law::Psl2(k), E::ProjMat2(a), E::ProjMat2(b)) => {
                E::ProjMat2(canonical_projective(k, mat_mul(k, a, b)))
            }
            (
                Law::Affine(k),
                E::Affine {
                    scale: a1,
                    shift: b1,
                },
                E::Affine {
                    scale: a2,
                    shift: b2,
                },
            ) => E::Affine {
                scale: k.mul(*a1, *a2),
                shift: k.add(k.mul(*a1, *b2), *b1),
            },
            (
                Law::Semidirect {
                    top,
                    normal,
                    action,
                },
                E::Semidirect(p1, v1),
                E::Semidirect(p2, v2),
            ) => {
                // (π₁, v₁)(π₂, v₂) = (π₁π₂, v₁ + π₁·v₂)
                let moved = action.apply(p1, v2);
                E::semidirect(top.mul(p1, p2), normal.mul(v1, &moved))
            }
            (Law::Product { left, right }, E::Product(g1, h1), E::Product(g2, h2)) => {
                E::product(left.mul(g1, g2), right.mul(h1, h2))
            }
            _ => mismatch(x, y),
        }
    }

    pub fn inv(&self, x: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (self, x) {
            (Law::Cyclic { n }, E::Cyclic(a)) => E::Cyclic((n - a) % n),
            (Law::Units(k), E::Unit(a)) => E::Unit(k.inv(*a).expect("unit")),
            (Law::Vec2(k), E::Vec2([a, b])) => E::Vec2([k.neg(*a), k.neg(*b)]),
            (Law::Sl2(k), E::Mat2(a)) => E::Mat2(mat_inv(k, a)),
            (Law::Psl2(k), E::ProjMat2(a)) => E::ProjMat2(canonical_projective(k, mat_inv(k, a))),
            (Law::Affine(k), E::Affine { scale, shift }) => {
                let s = k.inv(*scale).expect("unit");
                E::Affine {
                    scale: s,
                    shift: k.neg(k.mul(s, *shift)),
                }
            }
            (
                Law::Semidirect {
                    top,
                    normal,
                    action,
                },
                E::Semidirect(p, v),
            ) => {
                // (π, v)⁻¹ = (π⁻¹, π⁻¹·v⁻¹)
                let pinv = top.inv(p);
                let moved = action.apply(&pinv, &normal.inv(v));
                E::semidirect(pinv, moved)
            }
            (Law::Product { left, right }, E::Product(g, h)) => {
                E::product(left.inv(g), right.inv(h))
            }
            _ => mismatch(x, x),
        }
    }
}

/// Which construction produced a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupTag {
    Cyclic,
    Units,
    Vec2,
    Sl2,
    Psl2,
    Affine,
    Semidirect,
    DirectProduct,
    Subgroup,
}

/// Textual group descriptor, e.g. `sl2:5`, `affine:13`, `semidirect:sl2:3:vec2`
/// or `sl2:3*cyclic:2` for a direct product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(u64),
    Units(u64),
    Vec2(u64),
    Sl2(u64),
    Psl2(u64),
    Affine(u64),
    /// Semidirect product of `top` with `F_p²` (standard action) or `F_p`
    /// (multiplication action), where `p` is read from `top`.
    Semidirect {
        top: Box<GroupSpec>,
        normal: NormalKind,
    },
    Product(Box<GroupSpec>, Box<GroupSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalKind {
    /// `F_p²` under the standard matrix action.
    Vec2,
    /// `F_p` under multiplication by units.
    Field,
}

impl GroupSpec {
    fn prime(&self) -> Option<u64> {
        match self {
            GroupSpec::Units(p)
            | GroupSpec::Vec2(p)
            | GroupSpec::Sl2(p)
            | GroupSpec::Psl2(p)
            | GroupSpec::Affine(p) => Some(*p),
            GroupSpec::Product(l, _) => l.prime(),
            _ => None,
        }
    }

    fn rule_on(&self, normal: NormalKind, field: PrimeField) -> Option<ActionRule> {
        match (self, normal) {
            (GroupSpec::Sl2(_), NormalKind::Vec2) => Some(ActionRule::Standard(field)),
            (GroupSpec::Units(_), NormalKind::Field) => Some(ActionRule::Multiplication(field)),
            (GroupSpec::Product(l, _), _) => l
                .rule_on(normal, field)
                .map(|r| ActionRule::LeftFactor(Box::new(r))),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<FiniteGroup> {
        self.build_with_cap(DEFAULT_ORDER_CAP)
    }

    pub fn build_with_cap(&self, cap: usize) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Cyclic(n) => FiniteGroup::cyclic_with_cap(*n, cap),
            GroupSpec::Units(p) => FiniteGroup::units_with_cap(*p, cap),
            GroupSpec::Vec2(p) => FiniteGroup::vec2_with_cap(*p, cap),
            GroupSpec::Sl2(p) => FiniteGroup::sl2_with_cap(*p, cap),
            GroupSpec::Psl2(p) => FiniteGroup::psl2_with_cap(*p, cap),
            GroupSpec::Affine(p) => FiniteGroup::affine_with_cap(*p, cap),
            GroupSpec::Semidirect { top, normal } => {
                let p = top
                    .prime()
                    .ok_or_else(|| Error::BadDescriptor(self.to_string()))?;
                let field = PrimeField::new(p)?;
                let rule = top
                    .rule_on(*normal, field)
                    .ok_or_else(|| Error::BadDescriptor(self.to_string()))?;
                let top = Arc::new(top.build_with_cap(cap)?);
                let normal = Arc::new(match normal {
                    NormalKind::Vec2 => FiniteGroup::vec2_with_cap(p, cap)?,
                    NormalKind::Field => FiniteGroup::cyclic_with_cap(p, cap)?,
                });
                let action = GroupAction::on_group(top.clone(), &normal, rule)?;
                FiniteGroup::semidirect_with_cap(top, normal, &action, cap)
            }
            GroupSpec::Product(l, r) => FiniteGroup::direct_product_with_cap(
                Arc::new(l.build_with_cap(cap)?),
                Arc::new(r.build_with_cap(cap)?),
                cap,
            ),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::Units(p) => write!(f, "units:{p}"),
            GroupSpec::Vec2(p) => write!(f, "vec2:{p}"),
            GroupSpec::Sl2(p) => write!(f, "sl2:{p}"),
            GroupSpec::Psl2(p) => write!(f, "psl2:{p}"),
            GroupSpec::Affine(p) => write!(f, "affine:{p}"),
            GroupSpec::Semidirect { top, normal } => {
                let n = match normal {
                    NormalKind::Vec2 => "vec2",
                    NormalKind::Field => "field",
                };
                write!(f, "semidirect:{top}:{n}")
            }
            GroupSpec::Product(l, r) => write!(f, "{l}*{r}"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadDescriptor(s.to_string());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("semidirect:") {
            let (top, normal) = rest.rsplit_once(':').ok_or_else(bad)?;
            let normal = match normal {
                "vec2" => NormalKind::Vec2,
                "field" => NormalKind::Field,
                _ => return Err(bad()),
            };
            return Ok(GroupSpec::Semidirect {
                top: Box::new(top.parse()?),
                normal,
            });
        }
        if let Some((l, r)) = s.rsplit_once('*') {
            return Ok(GroupSpec::Product(
                Box::new(l.parse()?),
                Box::new(r.parse()?),
            ));
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let n: u64 = arg.parse().map_err(|_| bad())?;
        Ok(match kind {
            "cyclic" => GroupSpec::Cyclic(n),
            "units" => GroupSpec::Units(n),
            "vec2" => GroupSpec::Vec2(n),
            "sl2" => GroupSpec::Sl2(n),
            "psl2" => GroupSpec::Psl2(n),
            "affine" => GroupSpec::Affine(n),
            _ => return Err(bad()),
        })
    }
}

/// A fully enumerated finite group.
#[derive(Debug)]
pub struct FiniteGroup {
    tag: GroupTag,
    descriptor: String,
    law: Law,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    identity: GroupElement,
    generators: OnceLock<Vec<usize>>,
}

fn check_cap(order: u128, cap: usize) -> Result<()> {
    if order > cap as u128 {
        Err(Error::TooLarge { order, cap })
    } else {
        Ok(())
    }
}

impl FiniteGroup {
    fn from_parts(
        tag: GroupTag,
        descriptor: String,
        law: Law,
        mut elements: Vec<GroupElement>,
        sort: bool,
    ) -> Self {
        if sort {
            elements.sort();
        }
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        let identity = law.identity();
        Self {
            tag,
            descriptor,
            law,
            elements,
            index,
            identity,
            generators: OnceLock::new(),
        }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::cyclic_with_cap(n, DEFAULT_ORDER_CAP)
    }

    pub fn cyclic_with_cap(n: u64, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("cyclic group needs n >= 1".into()));
        }
        check_cap(n as u128, cap)?;
        let elements = (0..n).map(GroupElement::Cyclic).collect();
        Ok(Self::from_parts(
            GroupTag::Cyclic,
            GroupSpec::Cyclic(n).to_string(),
            Law::Cyclic { n },
            elements,
            false,
        ))
    }

    pub fn units(p: u64) -> Result<Self> {
        Self::units_with_cap(p, DEFAULT_ORDER_CAP)
    }

    pub fn units_with_cap(p: u64, cap: usize) -> Result<Self> {
        let k = PrimeField::new(p)?;
        check_cap((p - 1) as u128, cap)?;
        let elements = (1..p).map(GroupElement::Unit).collect();
        Ok(Self::from_parts(
            GroupTag::Units,
            GroupSpec::Units(p).to_string(),
            Law::Units(k),
            elements,
            false,
        ))
    }

    pub fn vec2(p: u64) -> Result<Self> {
        Self::vec2_with_cap(p, DEFAULT_ORDER_CAP)
    }

    pub fn vec2_with_cap(p: u64, cap: usize) -> Result<Self> {
        let k = PrimeField::new(p)?;
        check_cap((p as u128).pow(2), cap)?;
        let elements = (0..p)
            .flat_map(|x| (0..p).map(move |y| GroupElement::Vec2([x, y])))
            .collect();
        Ok(Self::from_parts(
            GroupTag::Vec2,
            GroupSpec::Vec2(p).to_string(),
            Law::Vec2(k),
            elements,
            false,
        ))
    }

    fn sl2_matrices(k: &PrimeField) -> Vec<[u64; 4]> {
        let p = k.modulus();
        let mut out = Vec::with_capacity((p * (p * p - 1)) as usize);
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if k.sub(k.mul(a, d), k.mul(b, c)) == 1 {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn sl2(p: u64) -> Result<Self> {
        Self::sl2_with_cap(p, DEFAULT_ORDER_CAP)
    }

    pub fn sl2_with_cap(p: u64, cap: usize) -> Result<Self> {
        let k = PrimeField::new(p)?;
        let p = p as u128;
        check_cap(p * (p * p - 1), cap)?;
        let elements = Self::sl2_matrices(&k)
            .into_iter()
            .map(GroupElement::Mat2)
            .collect();
        Ok(Self::from_parts(
            GroupTag::Sl2,
            GroupSpec::Sl2(k.modulus()).to_string(),
            Law::Sl2(k),
            elements,
            false,
        ))
    }

    pub fn psl2(p: u64) -> Result<Self> {
        Self::psl2_with_cap(p, DEFAULT_ORDER_CAP)
    }

    pub fn psl2_with_cap(p: u64, cap: usize) -> Result<Self> {
        let k = PrimeField::new(p)?;
        let pp = p as u128;
        let order = if p == 2 { 6 } else { pp * (pp * pp - 1) / 2 };
        check_cap(order, cap)?;
        let set: HashSet<[u64; 4]> = Self::sl2_matrices(&k)
            .into_iter()
            .map(|m| canonical_projective(&k, m))
            .collect();
        let elements = set.into_iter().map(GroupElement::ProjMat2).collect();
        Ok(Self::from_parts(
            GroupTag::Psl2,
            GroupSpec::Psl2(p).to_string(),
            Law::Psl2(k),
            elements,
            true,
        ))
    }

    pub fn affine(p: u64) -> Result<Self> {
        Self::affine_with_cap(p, DEFAULT_ORDER_CAP)
    }

    pub fn affine_with_cap(p: u64, cap: usize) -> Result<Self> {
        let k = PrimeField::new(p)?;
        check_cap(p as u128 * (p as u128 - 1), cap)?;
        let elements = (1..p)
            .flat_map(|scale| (0..p).map(move |shift| GroupElement::Affine { scale, shift }))
            .collect();
        Ok(Self::from_parts(
            GroupTag::Affine,
            GroupSpec::Affine(p).to_string(),
            Law::Affine(k),
            elements,
            false,
        ))
    }

    /// `Π ⋉ V` for a verified action of `Π` on the elements of `V`.
    ///
    /// Each `π` must act by an automorphism of `V`; this is checked on a
    /// generating set of `V`.
    pub fn semidirect(
        top: Arc<FiniteGroup>,
        normal: Arc<FiniteGroup>,
        action: &GroupAction,
    ) -> Result<Self> {
        Self::semidirect_with_cap(top, normal, action, DEFAULT_ORDER_CAP)
    }

    pub fn semidirect_with_cap(
        top: Arc<FiniteGroup>,
        normal: Arc<FiniteGroup>,
        action: &GroupAction,
        cap: usize,
    ) -> Result<Self> {
        if !Arc::ptr_eq(action.actor(), &top) && action.actor().elements() != top.elements() {
            return Err(Error::InvalidAction(
                "action is by a different group".into(),
            ));
        }
        if action.space().len() != normal.order()
            || action.space().iter().any(|v| !normal.contains(v))
        {
            return Err(Error::InvalidAction(
                "action space is not the normal factor".into(),
            ));
        }
        check_cap(top.order() as u128 * normal.order() as u128, cap)?;
        let rule = action.rule().clone();
        let vgens: Vec<&GroupElement> = normal
            .generators()
            .iter()
            .map(|&i| normal.element(i))
            .collect();
        for pi in top.elements() {
            for v in normal.elements() {
                for g in &vgens {
                    let lhs = rule.apply(pi, &normal.mul(v, g));
                    let rhs = normal.mul(&rule.apply(pi, v), &rule.apply(pi, g));
                    if lhs != rhs {
                        return Err(Error::InvalidAction(format!(
                            "{pi} does not act by an automorphism"
                        )));
                    }
                }
            }
        }
        let elements = top
            .elements()
            .iter()
            .flat_map(|p| {
                normal
                    .elements()
                    .iter()
                    .map(move |v| GroupElement::semidirect(p.clone(), v.clone()))
            })
            .collect();
        let descriptor = format!("semidirect({}, {})", top.descriptor(), normal.descriptor());
        Ok(Self::from_parts(
            GroupTag::Semidirect,
            descriptor,
            Law::Semidirect {
                top,
                normal,
                action: rule,
            },
            elements,
            false,
        ))
    }

    pub fn direct_product(left: Arc<FiniteGroup>, right: Arc<FiniteGroup>) -> Result<Self> {
        Self::direct_product_with_cap(left, right, DEFAULT_ORDER_CAP)
    }

    pub fn direct_product_with_cap(
        left: Arc<FiniteGroup>,
        right: Arc<FiniteGroup>,
        cap: usize,
    ) -> Result<Self> {
        check_cap(left.order() as u128 * right.order() as u128, cap)?;
        let elements = left
            .elements()
            .iter()
            .flat_map(|g| {
                right
                    .elements()
                    .iter()
                    .map(move |h| GroupElement::product(g.clone(), h.clone()))
            })
            .collect();
        let descriptor = format!("{}*{}", left.descriptor(), right.descriptor());
        Ok(Self::from_parts(
            GroupTag::DirectProduct,
            descriptor,
            Law::Product { left, right },
            elements,
            false,
        ))
    }

    /// The subgroup generated by `gens`, enumerated by breadth-first closure.
    pub fn generated_by(&self, gens: &[GroupElement]) -> Result<Self> {
        for g in gens {
            if !self.contains(g) {
                return Err(Error::UnknownElement(g.to_string()));
            }
        }
        let mut seen: HashSet<GroupElement> = HashSet::new();
        seen.insert(self.identity.clone());
        let mut queue = vec![self.identity.clone()];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head].clone();
            head += 1;
            for g in gens {
                let y = self.mul(&x, g);
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        let descriptor = format!("<{} gens in {}>", gens.len(), self.descriptor);
        Ok(Self::from_parts(
            GroupTag::Subgroup,
            descriptor,
            self.law.clone(),
            queue,
            true,
        ))
    }

    /// Builds a subgroup from an explicit element list, checking closure.
    pub fn subgroup_from_elements(
        &self,
        elements: Vec<GroupElement>,
        descriptor: impl Into<String>,
    ) -> Result<Self> {
        let sub = Self::from_parts(
            GroupTag::Subgroup,
            descriptor.into(),
            self.law.clone(),
            elements,
            true,
        );
        self.check_subgroup(&sub)?;
        Ok(sub)
    }

    /// Verifies that `sub` is a subgroup: its elements lie in `self` and are
    /// closed under right multiplication by its own generators.
    pub fn check_subgroup(&self, sub: &FiniteGroup) -> Result<()> {
        if sub.order() == 0 || sub.order() > self.order() || self.order() % sub.order() != 0 {
            return Err(Error::NotSubgroup(format!(
                "order {} does not divide {}",
                sub.order(),
                self.order()
            )));
        }
        if !sub.contains(&self.identity) {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        if let Some(g) = sub.elements().iter().find(|g| !self.contains(g)) {
            return Err(Error::NotSubgroup(format!("{g} is not in the parent")));
        }
        for &gi in sub.generators() {
            let g = sub.element(gi);
            for x in sub.elements() {
                if !sub.contains(&self.mul(x, g)) {
                    return Err(Error::NotSubgroup("not closed under multiplication".into()));
                }
            }
        }
        Ok(())
    }

    /// For `Π ⋉ V` (or the affine group), the complement `{(π, 0)}`.
    pub fn top_subgroup(&self) -> Result<Self> {
        let elements: Vec<GroupElement> = match &self.law {
            Law::Semidirect { top, normal, .. } => top
                .elements()
                .iter()
                .map(|p| GroupElement::semidirect(p.clone(), normal.identity().clone()))
                .collect(),
            Law::Affine(k) => (1..k.modulus())
                .map(|scale| GroupElement::Affine { scale, shift: 0 })
                .collect(),
            _ => {
                return Err(Error::Precondition(format!(
                    "{} is not a semidirect product",
                    self.descriptor
                )))
            }
        };
        let descriptor = format!("top({})", self.descriptor);
        self.subgroup_from_elements(elements, descriptor)
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn identity(&self) -> &GroupElement {
        &self.identity
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.law.mul(a, b)
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        self.law.inv(a)
    }

    /// Index of the product of the elements at positions `i` and `j`.
    pub fn mul_index(&self, i: usize, j: usize) -> usize {
        let prod = self.mul(&self.elements[i], &self.elements[j]);
        self.index[&prod]
    }

    pub fn pow(&self, g: &GroupElement, mut k: u64) -> GroupElement {
        let mut acc = self.identity.clone();
        let mut base = g.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Least `k >= 1` with `g^k = 1`.
    pub fn element_order(&self, g: &GroupElement) -> u64 {
        let mut x = g.clone();
        let mut k = 1;
        while x != self.identity {
            x = self.mul(&x, g);
            k += 1;
        }
        k
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generators(&self) -> &[usize] {
        self.generators.get_or_init(|| {
            let mut gens = Vec::new();
            let mut span: HashSet<GroupElement> = HashSet::new();
            span.insert(self.identity.clone());
            for (i, g) in self.elements.iter().enumerate() {
                if span.contains(g) {
                    continue;
                }
                gens.push(i);
                // re-close the span under all chosen generators
                let mut queue: Vec<GroupElement> = span.iter().cloned().collect();
                while let Some(x) = queue.pop() {
                    for &j in &gens {
                        let y = self.mul(&x, &self.elements[j]);
                        if span.insert(y.clone()) {
                            queue.push(y);
                        }
                    }
                }
                if span.len() == self.elements.len() {
                    break;
                }
            }
            gens
        })
    }

    /// Checks group axioms: identity and inverse laws on every element,
    /// closure on every pair (or `samples` random pairs when the order is
    /// large), and associativity on `samples` random triples.
    pub fn verify_axioms(&self, samples: usize, seed: u64) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidAction(msg));
        for g in &self.elements {
            if &self.mul(g, &self.identity) != g || &self.mul(&self.identity, g) != g {
                return fail(format!("identity law fails at {g}"));
            }
            let gi = self.inv(g);
            if !self.contains(&gi) || self.mul(g, &gi) != self.identity {
                return fail(format!("inverse law fails at {g}"));
            }
        }
        let n = self.order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if n * n <= 1_000_000 {
            for a in &self.elements {
                for b in &self.elements {
                    if !self.contains(&self.mul(a, b)) {
                        return fail(format!("{a}·{b} leaves the group"));
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let a = &self.elements[rng.random_range(0..n)];
                let b = &self.elements[rng.random_range(0..n)];
                if !self.contains(&self.mul(a, b)) {
                    return fail(format!("{a}·{b} leaves the group"));
                }
            }
        }
        for _ in 0..samples {
            let a = &self.elements[rng.random_range(0..n)];
            let b = &self.elements[rng.random_range(0..n)];
            let c = &self.elements[rng.random_range(0..n)];
            if self.mul(&self.mul(a, b), c) != self.mul(a, &self.mul(b, c)) {
                return fail(format!("associativity fails at {a}, {b}, {c}"));
            }
        }
        Ok(())
    }

    /// `PSL(2,p)` image of an `SL(2,p)` matrix.
    pub fn project_to_psl(field: &PrimeField, m: &GroupElement) -> Result<GroupElement> {
        match m {
            GroupElement::Mat2(a) => Ok(GroupElement::ProjMat2(canonical_projective(field, *a))),
            other => Err(Error::UnknownElement(other.to_string())),
        }
    }
}

/// A symmetric, identity-free subset of a group.
#[derive(Debug, Clone)]
pub struct GeneratingSet {
    parent: Arc<FiniteGroup>,
    elements: Vec<GroupElement>,
}

impl GeneratingSet {
    pub fn new(
        parent: Arc<FiniteGroup>,
        elements: impl IntoIterator<Item = GroupElement>,
    ) -> Result<Self> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        elements.sort();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::InvalidGeneratingSet("empty".into()));
        }
        for g in &elements {
            if !parent.contains(g) {
                return Err(Error::UnknownElement(g.to_string()));
            }
            if g == parent.identity() {
                return Err(Error::InvalidGeneratingSet("contains the identity".into()));
            }
        }
        for g in &elements {
            let gi = parent.inv(g);
            if elements.binary_search(&gi).is_err() {
                return Err(Error::InvalidGeneratingSet(format!(
                    "not symmetric: {g} present but {gi} missing"
                )));
            }
        }
        Ok(Self { parent, elements })
    }

    /// `T ∪ T⁻¹` for a set `T` of non-identity elements.
    pub fn symmetric_closure(
        parent: Arc<FiniteGroup>,
        elements: impl IntoIterator<Item = GroupElement>,
    ) -> Result<Self> {
        let mut all = Vec::new();
        for g in elements {
            all.push(parent.inv(&g));
            all.push(g);
        }
        Self::new(parent, all)
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The subgroup these elements generate.
    pub fn generated_subgroup(&self) -> Result<FiniteGroup> {
        self.parent.generated_by(&self.elements)
    }

    /// The same elements viewed inside another group that contains them.
    pub fn reparent(&self, parent: Arc<FiniteGroup>) -> Result<Self> {
        Self::new(parent, self.elements.iter().cloned())
    }
}

/// Subgroup generated by a generating set.
pub fn generated_subgroup(set: &GeneratingSet) -> Result<FiniteGroup> {
    set.generated_subgroup()
}

/// Lifts a symmetric subset of `PSL(2,p)` to its full preimage in `SL(2,p)`.
pub fn quotient_preimage_sl2(s0: &GeneratingSet, sl2: Arc<FiniteGroup>) -> Result<GeneratingSet> {
    let field = match s0.parent().law() {
        Law::Psl2(k) => *k,
        _ => {
            return Err(Error::Precondition(
                "generating set must live in PSL(2,p)".into(),
            ))
        }
    };
    match sl2.law() {
        Law::Sl2(k) if k.modulus() == field.modulus() => {}
        _ => {
            return Err(Error::Precondition(
                "target must be SL(2,p) for the same p".into(),
            ))
        }
    }
    let mut lifted = Vec::with_capacity(2 * s0.len());
    for g in s0.elements() {
        let GroupElement::ProjMat2(m) = g else {
            return Err(Error::UnknownElement(g.to_string()));
        };
        lifted.push(GroupElement::Mat2(*m));
        lifted.push(GroupElement::Mat2(m.map(|x| field.neg(x))));
    }
    GeneratingSet::new(sl2, lifted)
}
