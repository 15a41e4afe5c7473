//! Coset combinatorics: double cosets and the norm of an induced character.

use super::group::FiniteGroup;
use crate::error::{Error, Result};

/// Left-coset label of every element of `gamma` with respect to `pi`.
fn left_cosets(gamma: &FiniteGroup, pi: &FiniteGroup) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; gamma.order()];
    let mut count = 0;
    for (i, g) in gamma.elements().iter().enumerate() {
        if label[i] != usize::MAX {
            continue;
        }
        for h in pi.elements() {
            let j = gamma.index_of(&gamma.mul(g, h)).expect("closed");
            label[j] = count;
        }
        count += 1;
    }
    (label, count)
}

/// `|Π\Γ/Π|`, by partitioning `Γ` into the sets `ΠgΠ`.
pub fn double_coset_count(gamma: &FiniteGroup, pi: &FiniteGroup) -> Result<usize> {
    gamma.check_subgroup(pi)?;
    let (label, cosets) = left_cosets(gamma, pi);
    // ΠgΠ is a union of left cosets hΠ with h ∈ Πg, so it suffices to mark
    // left-coset labels.
    let mut seen = vec![false; cosets];
    let mut count = 0;
    for (i, g) in gamma.elements().iter().enumerate() {
        if seen[label[i]] {
            continue;
        }
        count += 1;
        for h in pi.elements() {
            let j = gamma.index_of(&gamma.mul(h, g)).expect("closed");
            seen[label[j]] = true;
        }
    }
    Ok(count)
}

/// `⟨χ, χ⟩` for the permutation character `χ` of `Γ` on `Γ/Π`, computed as the
/// average over `g ∈ Γ` of the squared number of cosets fixed by `g`.
pub fn induced_character_norm(gamma: &FiniteGroup, pi: &FiniteGroup) -> Result<usize> {
    gamma.check_subgroup(pi)?;
    let (label, cosets) = left_cosets(gamma, pi);
    let mut reps = vec![usize::MAX; cosets];
    for (i, &c) in label.iter().enumerate() {
        if reps[c] == usize::MAX {
            reps[c] = i;
        }
    }
    let mut total: u128 = 0;
    for g in 0..gamma.order() {
        let fixed = reps
            .iter()
            .filter(|&&a| label[gamma.mul_index(g, a)] == label[a])
            .count() as u128;
        total += fixed * fixed;
    }
    let order = gamma.order() as u128;
    if total % order != 0 {
        return Err(Error::NotSubgroup(
            "character norm is not an integer".into(),
        ));
    }
    Ok((total / order) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GroupElement, GroupSpec};

    #[test]
    fn trivial_cases() {
        let g = FiniteGroup::affine(5).unwrap();
        let all = g
            .subgroup_from_elements(g.elements().to_vec(), "all")
            .unwrap();
        let one = g
            .subgroup_from_elements(vec![g.identity().clone()], "one")
            .unwrap();
        assert_eq!(double_coset_count(&g, &all).unwrap(), 1);
        assert_eq!(induced_character_norm(&g, &all).unwrap(), 1);
        assert_eq!(double_coset_count(&g, &one).unwrap(), 20);
        assert_eq!(induced_character_norm(&g, &one).unwrap(), 20);
    }

    #[test]
    fn affine_and_sl2_semidirect() {
        let aff = FiniteGroup::affine(5).unwrap();
        let units = aff.top_subgroup().unwrap();
        assert_eq!(double_coset_count(&aff, &units).unwrap(), 2);
        assert_eq!(induced_character_norm(&aff, &units).unwrap(), 2);

        let gamma: FiniteGroup = "semidirect:sl2:3:vec2"
            .parse::<GroupSpec>()
            .unwrap()
            .build()
            .unwrap();
        let pi = gamma.top_subgroup().unwrap();
        assert_eq!(pi.order(), 24);
        assert_eq!(double_coset_count(&gamma, &pi).unwrap(), 2);
        assert_eq!(induced_character_norm(&gamma, &pi).unwrap(), 2);
    }

    #[test]
    fn rejects_non_subgroups() {
        let aff = FiniteGroup::affine(5).unwrap();
        let sl = FiniteGroup::sl2(3).unwrap();
        assert!(matches!(
            double_coset_count(&aff, &sl),
            Err(Error::NotSubgroup(_))
        ));
        assert!(matches!(
            induced_character_norm(&aff, &sl),
            Err(Error::NotSubgroup(_))
        ));
        let c4 = FiniteGroup::cyclic(4).unwrap();
        let half = c4.generated_by(&[GroupElement::Cyclic(2)]).unwrap();
        assert_eq!(double_coset_count(&c4, &half).unwrap(), 2);
    }
}
