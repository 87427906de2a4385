/// A finite lattice of relations ordered by inclusion.
pub trait Lattice: Clone + PartialEq {
    fn meet(&self, other: &Self) -> Self;
    fn is_below(&self, other: &Self) -> bool;
}

/// Result of a greatest-fixpoint computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixpoint<L> {
    pub relation: L,
    /// Number of applications of the step operator, including the one that
    /// confirmed stability.
    pub iterations: usize,
}

/// Greatest `R ⊆ top` with `R ⊆ step(R)`.
///
/// Iterates `R₀ = top`, `Rᵢ₊₁ = Rᵢ ∩ step(Rᵢ)` until the chain stops
/// descending. The step operator must be monotone; debug builds check this on
/// consecutive iterates, where `Rᵢ₊₁ ⊆ Rᵢ` forces `step(Rᵢ₊₁) ⊆ step(Rᵢ)`.
pub fn gfp<L: Lattice>(top: L, mut step: impl FnMut(&L) -> L) -> Fixpoint<L> {
    let mut current = top;
    let mut iterations = 0;
    #[cfg(debug_assertions)]
    let mut previous_image: Option<L> = None;
    loop {
        let image = step(&current);
        iterations += 1;
        #[cfg(debug_assertions)]
        {
            if let Some(prev) = &previous_image {
                debug_assert!(
                    image.is_below(prev),
                    "gfp: step operator is not monotone on iteration {iterations}"
                );
            }
            previous_image = Some(image.clone());
        }
        let next = current.meet(&image);
        if next == current {
            return Fixpoint {
                relation: current,
                iterations,
            };
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::bitrel::BitRel;
    use crate::rng::SplitMix64;

    #[test]
    fn identity_step_keeps_top() {
        let fp = gfp(BitRel::full(3), |r| r.clone());
        assert_eq!(fp.relation, BitRel::full(3));
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn constant_intersection_takes_one_extra_iteration() {
        let fixed = BitRel::from_pairs(3, [(0, 0), (1, 2)]);
        let fp = gfp(BitRel::full(3), |r| r.intersection(&fixed));
        assert_eq!(fp.relation, fixed);
        assert_eq!(fp.iterations, 2);
    }

    fn random_rel(rng: &mut SplitMix64, n: usize) -> BitRel {
        BitRel::from_fn(n, |_, _| rng.coin())
    }

    // step(R) = { (i,j) | base(i,j) ∧ (succ(i), succ(j)) ∈ R }, a
    // bisimulation-like monotone operator on a deterministic function.
    #[test]
    fn result_is_greatest_post_fixpoint() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let n = 1 + rng.below(6);
            let succ: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            let base = random_rel(&mut rng, n);
            let step = |r: &BitRel| {
                BitRel::from_fn(n, |i, j| {
                    base.contains(i, j) && r.contains(succ[i], succ[j])
                })
            };
            let fp = gfp(BitRel::full(n), step);
            assert!(fp.relation.is_subset(&step(&fp.relation)));
            assert!(fp.iterations <= n * n + 1);
            // Build post-fixpoints bottom-up by closing a random seed relation
            // downward until it is one; each must sit below the gfp.
            for _ in 0..5 {
                let mut cand = random_rel(&mut rng, n);
                loop {
                    let next = cand.intersection(&step(&cand));
                    if next == cand {
                        break;
                    }
                    cand = next;
                }
                assert!(cand.is_subset(&step(&cand)));
                assert!(cand.is_subset(&fp.relation));
            }
        }
    }
}
