//! Group actions on finite sets.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::field::PrimeField;
use super::group::{FiniteGroup, GroupElement};
use crate::error::{Error, Result};

type ActionFn = dyn Fn(&GroupElement, &GroupElement) -> GroupElement + Send + Sync;

/// How an element of the acting group moves a point.
#[derive(Clone)]
pub enum ActionRule {
    /// Every element fixes every point.
    Trivial,
    /// `SL(2,p)` matrices acting on column vectors of `F_p²`.
    Standard(PrimeField),
    /// `F_p^×` acting on the additive group `F_p` by multiplication.
    Multiplication(PrimeField),
    /// A product element `(π, z)` acts through its left factor `π`.
    LeftFactor(Box<ActionRule>),
    /// Arbitrary user-supplied rule.
    Custom(Arc<ActionFn>),
}

impl fmt::Debug for ActionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionRule::Trivial => write!(f, "Trivial"),
            ActionRule::Standard(k) => write!(f, "Standard(F_{})", k.modulus()),
            ActionRule::Multiplication(k) => write!(f, "Multiplication(F_{})", k.modulus()),
            ActionRule::LeftFactor(inner) => write!(f, "LeftFactor({inner:?})"),
            ActionRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ActionRule {
    pub fn custom<F>(rule: F) -> Self
    where
        F: Fn(&GroupElement, &GroupElement) -> GroupElement + Send + Sync + 'static,
    {
        ActionRule::Custom(Arc::new(rule))
    }

    pub fn apply(&self, actor: &GroupElement, point: &GroupElement) -> GroupElement {
        match self {
            ActionRule::Trivial => point.clone(),
            ActionRule::Standard(k) => match (actor, point) {
                (GroupElement::Mat2([a, b, c, d]), GroupElement::Vec2([x, y])) => {
                    GroupElement::Vec2([
                        k.add(k.mul(*a, *x), k.mul(*b, *y)),
                        k.add(k.mul(*c, *x), k.mul(*d, *y)),
                    ])
                }
                _ => panic!("standard action needs a matrix acting on a vector"),
            },
            ActionRule::Multiplication(k) => match (actor, point) {
                (GroupElement::Unit(u), GroupElement::Cyclic(x)) => {
                    GroupElement::Cyclic(k.mul(*u, *x))
                }
                _ => panic!("multiplication action needs a unit acting on a residue"),
            },
            ActionRule::LeftFactor(inner) => match actor {
                GroupElement::Product(left, _) => inner.apply(left, point),
                _ => panic!("left-factor action needs a product element"),
            },
            ActionRule::Custom(rule) => rule(actor, point),
        }
    }
}

/// A verified action of a finite group on a finite set of points.
#[derive(Debug, Clone)]
pub struct GroupAction {
    actor: Arc<FiniteGroup>,
    space: Vec<GroupElement>,
    rule: ActionRule,
}

impl GroupAction {
    /// Checks the action axioms: the identity fixes every point, and
    /// `(πg)·v = π·(g·v)` for every `π`, `v` and every generator `g` of the
    /// actor (which extends to all of the group by induction).
    pub fn new(
        actor: Arc<FiniteGroup>,
        space: Vec<GroupElement>,
        rule: ActionRule,
    ) -> Result<Self> {
        let points: HashSet<&GroupElement> = space.iter().collect();
        if points.len() != space.len() {
            return Err(Error::InvalidAction("repeated point in space".into()));
        }
        let id = actor.identity();
        for v in &space {
            let w = rule.apply(id, v);
            if &w != v {
                return Err(Error::InvalidAction(format!("identity moves {v} to {w}")));
            }
        }
        let gens: Vec<&GroupElement> = actor
            .generators()
            .iter()
            .map(|&i| actor.element(i))
            .collect();
        for pi in actor.elements() {
            for v in &space {
                let moved = rule.apply(pi, v);
                if !points.contains(&moved) {
                    return Err(Error::InvalidAction(format!(
                        "{pi} sends {v} outside the space"
                    )));
                }
                for g in &gens {
                    let lhs = rule.apply(&actor.mul(pi, g), v);
                    let rhs = rule.apply(pi, &rule.apply(g, v));
                    if lhs != rhs {
                        return Err(Error::InvalidAction(format!(
                            "compatibility fails for {pi}, {g} at {v}"
                        )));
                    }
                }
            }
        }
        Ok(Self { actor, space, rule })
    }

    /// Action of a group on the elements of another group.
    pub fn on_group(
        actor: Arc<FiniteGroup>,
        target: &FiniteGroup,
        rule: ActionRule,
    ) -> Result<Self> {
        Self::new(actor, target.elements().to_vec(), rule)
    }

    pub fn actor(&self) -> &Arc<FiniteGroup> {
        &self.actor
    }

    pub fn space(&self) -> &[GroupElement] {
        &self.space
    }

    pub fn rule(&self) -> &ActionRule {
        &self.rule
    }

    pub fn apply(&self, actor: &GroupElement, point: &GroupElement) -> GroupElement {
        self.rule.apply(actor, point)
    }

    /// Number of orbits, by flood fill from each unvisited point.
    pub fn orbit_count(&self) -> usize {
        let position: std::collections::HashMap<&GroupElement, usize> =
            self.space.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let gens: Vec<&GroupElement> = self
            .actor
            .generators()
            .iter()
            .map(|&i| self.actor.element(i))
            .collect();
        let mut seen = vec![false; self.space.len()];
        let mut orbits = 0;
        for start in 0..self.space.len() {
            if seen[start] {
                continue;
            }
            orbits += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for g in &gens {
                    let j = position[&self.rule.apply(g, &self.space[i])];
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        orbits
    }
}

/// Number of orbits of a verified action.
pub fn orbit_count(action: &GroupAction) -> usize {
    action.orbit_count()
}
