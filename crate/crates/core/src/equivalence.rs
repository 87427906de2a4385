//! Behavioural equivalence for every family, each next to an independent
//! brute-force oracle.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::kernel::rational::{dot, matrix_times_column, vec_sub, QVector, Rational};
use crate::kernel::{
    echelonize, gfp, members, BitRel, Fixpoint, Lattice, Mask, Subspace, DEFAULT_POWERSET_CAP,
};
use crate::liftings::rel_lift_cts;
use crate::systems::{
    forward_determinize, moore_determinize, Cts, DeterminizedMachine, Lwa, Nda, OutputLts,
};

/// A behavioural equivalence on the reachable states of a subset machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetEquivalence<O> {
    pub machine: DeterminizedMachine<O>,
    /// Indexed like `machine.subset_states()`.
    pub relation: BitRel,
    pub iterations: usize,
}

impl<O: PartialEq> SubsetEquivalence<O> {
    /// `None` if either subset is not reachable from the declared initials.
    pub fn equivalent(&self, u: Mask, v: Mask) -> Option<bool> {
        let i = self.machine.index_of(u)?;
        let j = self.machine.index_of(v)?;
        Some(self.relation.contains(i, j))
    }

    /// Equivalence classes as subset masks, each sorted, ordered by first member.
    pub fn classes(&self) -> Vec<Vec<Mask>> {
        self.relation
            .classes()
            .into_iter()
            .map(|block| block.into_iter().map(|i| self.machine.mask(i)).collect())
            .collect()
    }

    /// `R ⊆ step(R)`.
    pub fn is_post_fixpoint(&self) -> bool {
        self.relation
            .is_subset(&machine_step(&self.machine, &self.relation))
    }
}

/// One step of bisimulation on a deterministic machine with outputs:
/// `(i, j)` survives iff the outputs agree and every action leads into `R`.
pub fn machine_step<O: PartialEq>(d: &DeterminizedMachine<O>, r: &BitRel) -> BitRel {
    BitRel::from_fn(d.len(), |i, j| {
        d.output(i) == d.output(j)
            && (0..d.actions()).all(|a| r.contains(d.next(i, a), d.next(j, a)))
    })
}

fn machine_bisimilarity<O: PartialEq>(d: DeterminizedMachine<O>) -> SubsetEquivalence<O> {
    let Fixpoint {
        relation,
        iterations,
    } = gfp(BitRel::full(d.len()), |r| machine_step(&d, r));
    SubsetEquivalence {
        machine: d,
        relation,
        iterations,
    }
}

fn check_machine_size<O>(d: &DeterminizedMachine<O>) -> Result<()> {
    if d.len() > 1 << DEFAULT_POWERSET_CAP {
        return Err(Error::CapExceeded {
            size: d.base_size(),
            cap: DEFAULT_POWERSET_CAP,
        });
    }
    Ok(())
}

/// Language equivalence on the subsets reachable from `initials`.
pub fn nda_language_equiv(n: &Nda, initials: &[Mask]) -> Result<SubsetEquivalence<bool>> {
    let d = forward_determinize(n, initials)?;
    check_machine_size(&d)?;
    Ok(machine_bisimilarity(d))
}

/// Generalised-Moore equivalence on the subsets reachable from `initials`.
pub fn moore_equiv(m: &OutputLts, initials: &[Mask]) -> Result<SubsetEquivalence<usize>> {
    let d = moore_determinize(m, initials)?;
    check_machine_size(&d)?;
    Ok(machine_bisimilarity(d))
}

/// Outcome of a pairwise oracle query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairVerdict {
    pub equivalent: bool,
    /// Shortest (then lexicographically least) distinguishing word.
    pub witness: Option<Vec<usize>>,
}

/// Breadth-first search over pairs of subsets. Actions are explored in index
/// order, so the first disagreement found is reached by the shortest word and,
/// among those, the lexicographically least one.
pub fn subset_pair_search<O: PartialEq>(
    actions: usize,
    u: Mask,
    v: Mask,
    post: impl Fn(Mask, usize) -> Mask,
    out: impl Fn(Mask) -> O,
) -> PairVerdict {
    // Each visited pair points back to its predecessor and the action taken.
    type Back = Option<((Mask, Mask), usize)>;
    let mut parent: HashMap<(Mask, Mask), Back> = HashMap::new();
    parent.insert((u, v), None);
    let mut queue = VecDeque::from([(u, v)]);
    while let Some((p, q)) = queue.pop_front() {
        if out(p) != out(q) {
            let mut word = Vec::new();
            let mut at = (p, q);
            while let Some(&Some((prev, a))) = parent.get(&at) {
                word.push(a);
                at = prev;
            }
            word.reverse();
            return PairVerdict {
                equivalent: false,
                witness: Some(word),
            };
        }
        for a in 0..actions {
            let next = (post(p, a), post(q, a));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some(((p, q), a)));
                queue.push_back(next);
            }
        }
    }
    PairVerdict {
        equivalent: true,
        witness: None,
    }
}

/// Independent check of `U ≃ U′`: `∀w. U_w ↓ ⟺ U′_w ↓`, with successor sets
/// recomputed from the raw transition list.
pub fn nda_pair_oracle(n: &Nda, u: Mask, v: Mask) -> Result<PairVerdict> {
    let size = n.states().len();
    crate::kernel::check_mask(u, size)?;
    crate::kernel::check_mask(v, size)?;
    let transitions = n.transitions();
    let accepting: Vec<bool> = (0..size).map(|x| n.is_accepting(x)).collect();
    let post = |w: Mask, a: usize| {
        transitions
            .iter()
            .filter(|&&(x, b, _)| b == a && w >> x & 1 == 1)
            .fold(0, |acc, &(_, _, y)| acc | 1 << y)
    };
    let out = |w: Mask| members(w).any(|x| accepting[x]);
    Ok(subset_pair_search(n.alphabet().len(), u, v, post, out))
}

/// Independent check of Moore equivalence of two subsets.
pub fn moore_pair_oracle(m: &OutputLts, u: Mask, v: Mask) -> Result<PairVerdict> {
    let size = m.lts().states().len();
    crate::kernel::check_mask(u, size)?;
    crate::kernel::check_mask(v, size)?;
    let lts = m.lts();
    let post = |w: Mask, a: usize| members(w).fold(0, |acc, x| acc | lts.successors(x, a));
    let out = |w: Mask| m.subset_output(w);
    Ok(subset_pair_search(lts.alphabet().len(), u, v, post, out))
}

/// The largest subspace of `ker(o)` invariant under every `M_a`, together with
/// the dimensions of the descending chain that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unobservable {
    pub subspace: Subspace,
    /// `dim W₁ ≥ dim W₂ ≥ … ≥ dim W_m`, stopping at the first repeat.
    pub chain: Vec<usize>,
}

impl Unobservable {
    /// Number of chain members before stabilisation; at most `max(|X|, 1)`.
    pub fn steps(&self) -> usize {
        self.chain.len()
    }
}

/// Computes `W` with `p ≡ p′ ⟺ p − p′ ∈ W`.
///
/// Works on the dual side: `V₁ = span{o}` and `V_{i+1} = V_i + Σ_a M_a·V_i`
/// grow until stable, and `W_i = V_i^⊥`. A vector `p` lies in `W_i` iff every
/// word of length below `i` has zero weight from `p`.
pub fn lwa_unobservable_subspace(l: &Lwa) -> Unobservable {
    let n = l.dim();
    let mut v = echelonize(n, &[l.output_vector().to_vec()]).expect("output has dimension |X|");
    let mut chain = vec![n - v.rank()];
    loop {
        let mut generators: Vec<QVector> = v.basis().to_vec();
        for m in l.matrices() {
            for u in v.basis() {
                generators.push(matrix_times_column(m, u));
            }
        }
        let next = echelonize(n, &generators).expect("dimensions agree");
        if next == v {
            break;
        }
        v = next;
        chain.push(n - v.rank());
    }
    assert!(
        chain.len() <= n.max(1),
        "observability chain took {} steps on {n} states",
        chain.len()
    );
    Unobservable {
        subspace: v.orthogonal_complement(),
        chain,
    }
}

/// `tr(p)(w) = (p·M_{w₁}⋯M_{wₙ})·o`.
pub fn lwa_trace(l: &Lwa, p: &[Rational], word: &[usize]) -> Result<Rational> {
    let mut cur = p.to_vec();
    for &a in word {
        cur = l.step(&cur, a)?;
    }
    l.output(&cur)
}

pub fn lwa_equiv(l: &Lwa, p: &[Rational], q: &[Rational]) -> Result<bool> {
    for v in [p, q] {
        if v.len() != l.dim() {
            return Err(Error::DimensionMismatch {
                expected: l.dim(),
                found: v.len(),
            });
        }
    }
    lwa_unobservable_subspace(l)
        .subspace
        .contains(&vec_sub(p, q))
}

/// Word oracle: the first word of length `≤ maxlen` (shortest, then
/// lexicographic) on which the traces of `p` and `q` differ.
pub fn lwa_trace_oracle(
    l: &Lwa,
    p: &[Rational],
    q: &[Rational],
    maxlen: usize,
) -> Result<PairVerdict> {
    let diff = vec_sub(p, q);
    let mut layer = vec![(Vec::new(), diff)];
    for depth in 0..=maxlen {
        for (word, vec) in &layer {
            if !dot(vec, l.output_vector()).is_zero() {
                return Ok(PairVerdict {
                    equivalent: false,
                    witness: Some(word.clone()),
                });
            }
        }
        if depth == maxlen {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * l.alphabet().len());
        for (word, vec) in &layer {
            for a in 0..l.alphabet().len() {
                let mut w = word.clone();
                w.push(a);
                next.push((w, l.step(vec, a)?));
            }
        }
        layer = next;
    }
    Ok(PairVerdict {
        equivalent: true,
        witness: None,
    })
}

/// A set of triples `(k, x, x′)`, stored as one relation on `X` per condition.
/// States are only ever related under a shared condition.
#[derive(Clone, PartialEq, Eq)]
pub struct CondRel {
    slices: Vec<BitRel>,
}

impl std::fmt::Debug for CondRel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.triples()).finish()
    }
}

impl CondRel {
    pub fn empty(conditions: usize, states: usize) -> Self {
        CondRel {
            slices: vec![BitRel::empty(states); conditions],
        }
    }

    pub fn full(conditions: usize, states: usize) -> Self {
        CondRel {
            slices: vec![BitRel::full(states); conditions],
        }
    }

    /// `{ (k, x, x) }`, the abstract equality.
    pub fn identity(conditions: usize, states: usize) -> Self {
        CondRel {
            slices: vec![BitRel::identity(states); conditions],
        }
    }

    pub fn from_slices(slices: Vec<BitRel>) -> Self {
        CondRel { slices }
    }

    pub fn from_fn(
        conditions: usize,
        states: usize,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Self {
        CondRel {
            slices: (0..conditions)
                .map(|k| BitRel::from_fn(states, |x, y| f(k, x, y)))
                .collect(),
        }
    }

    pub fn conditions(&self) -> usize {
        self.slices.len()
    }

    pub fn states(&self) -> usize {
        self.slices.first().map_or(0, BitRel::size)
    }

    pub fn contains(&self, k: usize, x: usize, y: usize) -> bool {
        self.slices[k].contains(x, y)
    }

    pub fn insert(&mut self, k: usize, x: usize, y: usize) {
        self.slices[k].insert(x, y);
    }

    pub fn slice(&self, k: usize) -> &BitRel {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[BitRel] {
        &self.slices
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.slices
            .iter()
            .enumerate()
            .flat_map(|(k, r)| r.pairs().map(move |(x, y)| (k, x, y)))
    }

    pub fn is_subset(&self, other: &CondRel) -> bool {
        self.slices
            .iter()
            .zip(&other.slices)
            .all(|(a, b)| a.is_subset(b))
    }

    /// Bisimilar under every condition.
    pub fn fully_related(&self, x: usize, y: usize) -> bool {
        self.slices.iter().all(|r| r.contains(x, y))
    }
}

impl Lattice for CondRel {
    fn meet(&self, other: &Self) -> Self {
        CondRel {
            slices: self
                .slices
                .iter()
                .zip(&other.slices)
                .map(|(a, b)| a.intersection(b))
                .collect(),
        }
    }

    fn is_below(&self, other: &Self) -> bool {
        self.is_subset(other)
    }
}

/// `step(R) = { (k,x,x′) | δ(k,x) and δ(k,x′) are related by the lifting of R at k }`.
pub fn cts_step(c: &Cts, r: &CondRel) -> CondRel {
    let n = c.states().len();
    CondRel::from_fn(c.conditions().len(), n, |k, x, y| {
        rel_lift_cts(r, k, c.successors(k, x), c.successors(k, y))
    })
}

/// Conditional bisimilarity as the greatest fixpoint of [`cts_step`].
pub fn cts_conditional_bisim(c: &Cts) -> Fixpoint<CondRel> {
    let top = CondRel::full(c.conditions().len(), c.states().len());
    gfp(top, |r| cts_step(c, r))
}

/// Strong bisimilarity of the slice LTS `x → δ(k,x)` by naive signature
/// refinement: split blocks by the set of blocks their successors reach.
pub fn cts_slice_bisim_oracle(c: &Cts, k: usize) -> Vec<Vec<usize>> {
    let n = c.states().len();
    let mut block = vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let mut signatures: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut next = vec![0; n];
        for x in 0..n {
            let mut reached: Vec<usize> = members(c.successors(k, x)).map(|y| block[y]).collect();
            reached.sort_unstable();
            reached.dedup();
            let fresh = signatures.len();
            next[x] = *signatures.entry((block[x], reached)).or_insert(fresh);
        }
        let new_count = signatures.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut partition: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (x, &b) in block.iter().enumerate() {
        partition[b].push(x);
    }
    partition.retain(|b| !b.is_empty());
    partition.sort();
    partition
}

/// Relation form of a partition.
pub fn partition_relation(size: usize, partition: &[Vec<usize>]) -> BitRel {
    let mut r = BitRel::empty(size);
    for block in partition {
        for &x in block {
            for &y in block {
                r.insert(x, y);
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::{unit_vector, zero_vector};
    use crate::kernel::{all_subsets, Carrier};
    use crate::rng::SplitMix64;
    use crate::systems::fixtures::*;
    use crate::systems::{Lts, MooreSemantics};

    const X: Mask = 0b001;
    const Y: Mask = 0b010;
    const Z: Mask = 0b100;

    #[test]
    fn example_nda_classes() {
        let n = example_nda();
        let eq = nda_language_equiv(&n, &all_subsets(3, 12).unwrap()).unwrap();
        let nontrivial: Vec<Vec<Mask>> = eq.classes().into_iter().filter(|c| c.len() > 1).collect();
        assert_eq!(nontrivial, vec![vec![Y, X | Y], vec![Y | Z, X | Y | Z]]);
        assert!(eq.is_post_fixpoint());
        assert!(eq.relation.is_equivalence());
    }

    #[test]
    fn no_accepting_states_collapses_everything() {
        let n = Nda::new(
            Carrier::new(["p", "q"]).unwrap(),
            Carrier::new(["a"]).unwrap(),
            [(0, 0, 1), (1, 0, 0)],
            [],
        )
        .unwrap();
        let eq = nda_language_equiv(&n, &all_subsets(2, 12).unwrap()).unwrap();
        assert_eq!(eq.classes().len(), 1);
    }

    #[test]
    fn disjoint_copies_have_equivalent_singletons() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..20 {
            let base = crate::random::random_nda(&mut rng, 3, 2);
            let n = base.states().len();
            let glued = Nda::new(
                Carrier::numbered("s", 2 * n),
                base.alphabet().clone(),
                base.transitions()
                    .iter()
                    .flat_map(|&(x, a, y)| [(x, a, y), (x + n, a, y + n)]),
                (0..n)
                    .filter(|&x| base.is_accepting(x))
                    .flat_map(|x| [x, x + n]),
            )
            .unwrap();
            let all = all_subsets(2 * n, 12).unwrap();
            let eq = nda_language_equiv(&glued, &all).unwrap();
            let orig = nda_language_equiv(&base, &all_subsets(n, 12).unwrap()).unwrap();
            for x in 0..n {
                assert_eq!(eq.equivalent(1 << x, 1 << (x + n)), Some(true));
            }
            // restriction to either copy equals the original equivalence
            for u in 0..(1u64 << n) {
                for v in 0..(1u64 << n) {
                    let expect = orig.equivalent(u, v).unwrap();
                    assert_eq!(eq.equivalent(u, v).unwrap(), expect);
                    assert_eq!(eq.equivalent(u << n, v << n).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn pair_oracle_examples() {
        let n = example_nda();
        for u in 0..8 {
            assert!(nda_pair_oracle(&n, u, u).unwrap().equivalent);
        }
        let v = nda_pair_oracle(&n, X, Y).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.witness, Some(vec![1]));
        assert!(nda_pair_oracle(&n, X | Y, Y).unwrap().equivalent);
        assert_eq!(nda_pair_oracle(&n, 0, Z).unwrap().witness, Some(vec![]));
    }

    #[test]
    fn random_ndas_agree_with_oracle() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..30 {
            let n = crate::random::random_nda(&mut rng, 4, 2);
            let all = all_subsets(n.states().len(), 12).unwrap();
            let eq = nda_language_equiv(&n, &all).unwrap();
            assert!(eq.is_post_fixpoint());
            for &u in &all {
                for &v in &all {
                    let oracle = nda_pair_oracle(&n, u, v).unwrap();
                    assert_eq!(eq.equivalent(u, v).unwrap(), oracle.equivalent);
                    if let Some(w) = oracle.witness {
                        let d = &eq.machine;
                        let (i, j) = (d.index_of(u).unwrap(), d.index_of(v).unwrap());
                        assert_ne!(d.output(d.run(i, &w)), d.output(d.run(j, &w)));
                    }
                }
            }
        }
    }

    fn q(n: i64) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn unobservable_examples() {
        let silent = Lwa::new(
            Carrier::new(["x", "y"]).unwrap(),
            Carrier::new(["a"]).unwrap(),
            zero_vector(2),
            vec![vec![zero_vector(2), zero_vector(2)]],
        )
        .unwrap();
        assert_eq!(
            lwa_unobservable_subspace(&silent).subspace,
            Subspace::full(2)
        );

        let flat = Lwa::new(
            Carrier::new(["x", "y"]).unwrap(),
            Carrier::new(["a"]).unwrap(),
            vec![q(1), q(1)],
            vec![vec![zero_vector(2), zero_vector(2)]],
        )
        .unwrap();
        let w = lwa_unobservable_subspace(&flat).subspace;
        assert_eq!(w, echelonize(2, &[vec![q(1), q(-1)]]).unwrap());

        let chain = Lwa::new(
            Carrier::new(["x", "y"]).unwrap(),
            Carrier::new(["a"]).unwrap(),
            vec![q(0), q(1)],
            vec![vec![vec![q(0), q(1)], zero_vector(2)]],
        )
        .unwrap();
        let u = lwa_unobservable_subspace(&chain);
        assert_eq!(u.subspace, Subspace::zero(2));
        assert_eq!(u.chain, vec![1, 0]);
        let (ex, ey) = (unit_vector(2, 0), unit_vector(2, 1));
        assert!(!lwa_equiv(&chain, &ex, &ey).unwrap());
        assert!(!lwa_equiv(&chain, &ex, &zero_vector(2)).unwrap());
        assert!(lwa_equiv(&chain, &ex, &ex).unwrap());
    }

    #[test]
    fn trace_examples() {
        let l = two_state_lwa();
        let ex = unit_vector(2, 0);
        assert_eq!(lwa_trace(&l, &ex, &[]).unwrap(), q(0));
        assert_eq!(lwa_trace(&l, &ex, &[0]).unwrap(), q(6));
        assert_eq!(lwa_trace(&l, &zero_vector(2), &[0, 0]).unwrap(), q(0));
        assert_eq!(lwa_trace(&l, &ex, &[1]), Err(Error::UnknownAction(1)));
    }

    #[test]
    fn random_lwas_agree_with_word_oracle() {
        let mut rng = SplitMix64::new(23);
        for _ in 0..40 {
            let l = crate::random::random_lwa(&mut rng, 4, 2);
            let n = l.dim();
            let u = lwa_unobservable_subspace(&l);
            assert!(u.steps() <= n.max(1));
            for x in 0..n {
                for y in 0..n {
                    let (p, r) = (unit_vector(n, x), unit_vector(n, y));
                    let oracle = lwa_trace_oracle(&l, &p, &r, n).unwrap();
                    assert_eq!(lwa_equiv(&l, &p, &r).unwrap(), oracle.equivalent);
                }
                let p = unit_vector(n, x);
                let z = zero_vector(n);
                assert_eq!(
                    lwa_equiv(&l, &p, &z).unwrap(),
                    lwa_trace_oracle(&l, &p, &z, n).unwrap().equivalent
                );
            }
        }
    }

    #[test]
    fn cts_examples() {
        // k: x → y, k′: nothing
        let c = Cts::new(
            Carrier::new(["k", "k'"]).unwrap(),
            Carrier::new(["x", "y"]).unwrap(),
            [(0, 0, 1)],
        )
        .unwrap();
        let r = cts_conditional_bisim(&c).relation;
        assert!(r.contains(1, 0, 1));
        assert!(!r.contains(0, 0, 1));
        assert!(!r.fully_related(0, 1));
        for k in 0..2 {
            for x in 0..2 {
                assert!(r.contains(k, x, x));
            }
        }
        let discrete = Cts::new(Carrier::numbered("k", 1), Carrier::numbered("x", 3), []).unwrap();
        assert_eq!(cts_slice_bisim_oracle(&discrete, 0), vec![vec![0, 1, 2]]);
        assert_eq!(cts_slice_bisim_oracle(&c, 0), vec![vec![0], vec![1]]);
    }

    #[test]
    fn random_cts_slices_match_refinement() {
        let mut rng = SplitMix64::new(29);
        for _ in 0..40 {
            let c = crate::random::random_cts(&mut rng, 3, 6);
            let fp = cts_conditional_bisim(&c);
            assert!(fp.relation.is_subset(&cts_step(&c, &fp.relation)));
            for k in 0..c.conditions().len() {
                let oracle = cts_slice_bisim_oracle(&c, k);
                assert_eq!(
                    fp.relation.slice(k),
                    &partition_relation(c.states().len(), &oracle)
                );
            }
        }
    }

    fn textbook_pair() -> Lts {
        // p0 →a p1, p1 →b p2, p1 →c p3 ; q0 →a q1, q0 →a q2, q1 →b q3, q2 →c q4
        Lts::new(
            Carrier::new(["p0", "p1", "p2", "p3", "q0", "q1", "q2", "q3", "q4"]).unwrap(),
            Carrier::new(["a", "b", "c"]).unwrap(),
            [
                (0, 0, 1),
                (1, 1, 2),
                (1, 2, 3),
                (4, 0, 5),
                (4, 0, 6),
                (5, 1, 7),
                (6, 2, 8),
            ],
        )
        .unwrap()
    }

    #[test]
    fn moore_semantics_separate_textbook_pair() {
        let (p0, q0) = (1 << 0, 1 << 4);
        for (sem, expect) in [
            (MooreSemantics::Trace, true),
            (MooreSemantics::Failure, false),
            (MooreSemantics::Ready, false),
        ] {
            let m = OutputLts::with_semantics(textbook_pair(), sem).unwrap();
            let eq = moore_equiv(&m, &[p0, q0]).unwrap();
            assert_eq!(eq.equivalent(p0, q0), Some(expect), "{sem:?}");
            assert_eq!(moore_pair_oracle(&m, p0, q0).unwrap().equivalent, expect);
        }
    }

    // Trace sets enumerated directly to depth 2^|X|, compared to Moore/trace.
    #[test]
    fn moore_trace_matches_trace_sets() {
        fn has_trace(lts: &Lts, x: usize, w: &[usize]) -> bool {
            match w.split_first() {
                None => true,
                Some((&a, rest)) => members(lts.successors(x, a)).any(|y| has_trace(lts, y, rest)),
            }
        }
        let mut rng = SplitMix64::new(31);
        for _ in 0..20 {
            let lts = crate::random::random_lts(&mut rng, 3, 2);
            let n = lts.states().len();
            let singles: Vec<Mask> = (0..n).map(|x| 1 << x).collect();
            let m = OutputLts::with_semantics(lts.clone(), MooreSemantics::Trace).unwrap();
            let eq = moore_equiv(&m, &singles).unwrap();
            for x in 0..n {
                for y in 0..n {
                    let same = crate::logic::words(lts.alphabet().len(), 1 << n)
                        .all(|w| has_trace(&lts, x, &w) == has_trace(&lts, y, &w));
                    assert_eq!(eq.equivalent(1 << x, 1 << y), Some(same));
                }
            }
        }
    }
}
