//! Prime fields, enumerated finite groups, actions and coset counting.

mod action;
mod cosets;
mod field;
mod group;

pub use action::{orbit_count, ActionRule, GroupAction};
pub use cosets::{double_coset_count, induced_character_norm};
pub use field::{is_prime, PrimeField};
pub use group::{
    canonical_projective, generated_subgroup, quotient_preimage_sl2, FiniteGroup, GeneratingSet,
    GroupElement, GroupSpec, GroupTag, Law, NormalKind, DEFAULT_ORDER_CAP,
};
