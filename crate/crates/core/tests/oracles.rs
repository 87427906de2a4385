//! Cross-checks of the equivalence engines against naive, independently
//! written procedures.

use std::collections::{BTreeMap, BTreeSet};

use coeq::equivalence::{cts_conditional_bisim, lwa_equiv, moore_equiv, nda_language_equiv};
use coeq::kernel::rational::unit_vector;
use coeq::random::{random_cts, random_lts, random_lwa, random_nda, random_vector};
use coeq::rng::SplitMix64;
use coeq::{Cts, Lts, Lwa, Mask, MooreSemantics, Nda, OutputLts, Rational};

/// Moore-style partition refinement of the full subset automaton.
fn subset_partition(n: &Nda) -> Vec<usize> {
    let size = 1usize << n.states().len();
    let actions = n.alphabet().len();
    let post = |u: usize, a: usize| -> usize {
        let mut out = 0;
        for &(x, b, y) in n.transitions() {
            if b == a && u >> x & 1 == 1 {
                out |= 1 << y;
            }
        }
        out
    };
    let accepts = |u: usize| (u as Mask) & n.accepting() != 0;
    let mut block: Vec<usize> = (0..size).map(|u| accepts(u) as usize).collect();
    loop {
        let mut signatures: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let next: Vec<usize> = (0..size)
            .map(|u| {
                let mut sig = vec![block[u]];
                sig.extend((0..actions).map(|a| block[post(u, a)]));
                let fresh = signatures.len();
                *signatures.entry(sig).or_insert(fresh)
            })
            .collect();
        let count = |b: &[usize]| b.iter().collect::<BTreeSet<_>>().len();
        if count(&next) == count(&block) {
            return next;
        }
        block = next;
    }
}

#[test]
fn nda_gfp_matches_subset_partition_refinement() {
    for trial in 0..200 {
        let mut rng = SplitMix64::for_trial(11, trial);
        let n = random_nda(&mut rng, 5, 2);
        let size = 1u64 << n.states().len();
        let initials: Vec<Mask> = (0..size).collect();
        let eq = nda_language_equiv(&n, &initials).unwrap();
        let blocks = subset_partition(&n);
        for u in 0..size {
            for v in 0..size {
                assert_eq!(
                    eq.equivalent(u, v).unwrap(),
                    blocks[u as usize] == blocks[v as usize],
                    "trial {trial}: {u:#b} vs {v:#b}"
                );
            }
        }
    }
}

/// Weight of `word` from state `x`, summed over paths.
fn path_weight(l: &Lwa, x: usize, word: &[usize]) -> Rational {
    match word.split_first() {
        None => l.output_vector()[x].clone(),
        Some((&a, rest)) => (0..l.dim())
            .filter(|&y| !l.matrix(a)[x][y].is_zero())
            .map(|y| &l.matrix(a)[x][y] * &path_weight(l, y, rest))
            .sum(),
    }
}

fn all_words(letters: usize, maxlen: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..maxlen {
        frontier = frontier
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (0..letters).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn vector_weight(l: &Lwa, p: &[Rational], word: &[usize]) -> Rational {
    (0..l.dim())
        .filter(|&x| !p[x].is_zero())
        .map(|x| &p[x] * &path_weight(l, x, word))
        .sum()
}

#[test]
fn lwa_subspace_matches_path_sums() {
    for trial in 0..200 {
        let mut rng = SplitMix64::for_trial(12, trial);
        let l = random_lwa(&mut rng, 4, 2);
        let n = l.dim();
        let words = all_words(l.alphabet().len(), n);
        let mut vectors: Vec<Vec<Rational>> = (0..n).map(|x| unit_vector(n, x)).collect();
        vectors.push(random_vector(&mut rng, n));
        vectors.push(random_vector(&mut rng, n));
        for p in &vectors {
            for q in &vectors {
                let same = words
                    .iter()
                    .all(|w| vector_weight(&l, p, w) == vector_weight(&l, q, w));
                assert_eq!(lwa_equiv(&l, p, q).unwrap(), same, "trial {trial}");
            }
        }
    }
}

/// Greatest bisimulation of the `k`-slice by deleting violating pairs.
fn naive_slice_bisim(c: &Cts, k: usize) -> BTreeSet<(usize, usize)> {
    let n = c.states().len();
    let succ = |x: usize| (0..n).filter(move |&y| c.successors(k, x) >> y & 1 == 1);
    let mut rel: BTreeSet<(usize, usize)> =
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    loop {
        let keep: BTreeSet<(usize, usize)> = rel
            .iter()
            .copied()
            .filter(|&(x, y)| {
                succ(x).all(|x2| succ(y).any(|y2| rel.contains(&(x2, y2))))
                    && succ(y).all(|y2| succ(x).any(|x2| rel.contains(&(x2, y2))))
            })
            .collect();
        if keep == rel {
            return rel;
        }
        rel = keep;
    }
}

#[test]
fn cts_slices_match_naive_bisimulation() {
    for trial in 0..100 {
        let mut rng = SplitMix64::for_trial(13, trial);
        let c = random_cts(&mut rng, 3, 6);
        let fix = cts_conditional_bisim(&c);
        for k in 0..c.conditions().len() {
            let naive = naive_slice_bisim(&c, k);
            let computed: BTreeSet<(usize, usize)> = fix.relation.slice(k).pairs().collect();
            assert_eq!(computed, naive, "trial {trial}, condition {k}");
        }
    }
}

/// Observations of the subsets reached from `start` by every word of length
/// at most `maxlen`, in depth-first word order. Each observation is a set of
/// action masks (refusals or ready sets).
fn observation_table(
    lts: &Lts,
    start: usize,
    maxlen: usize,
    semantics: MooreSemantics,
) -> Vec<BTreeSet<Mask>> {
    let n = lts.states().len();
    let m = lts.alphabet().len();
    let observe = |reached: &BTreeSet<usize>| {
        let mut out = BTreeSet::new();
        for &x in reached {
            let enabled: Mask = (0..m)
                .filter(|&a| lts.successors(x, a) != 0)
                .fold(0, |acc, a| acc | 1 << a);
            match semantics {
                MooreSemantics::Trace => {
                    out.insert(0);
                }
                MooreSemantics::Ready => {
                    out.insert(enabled);
                }
                MooreSemantics::Failure => {
                    out.extend((0..1u64 << m).filter(|z| z & enabled == 0));
                }
            }
        }
        out
    };
    let mut table = Vec::new();
    let mut stack = vec![(BTreeSet::from([start]), 0)];
    while let Some((reached, len)) = stack.pop() {
        table.push(observe(&reached));
        if len == maxlen {
            continue;
        }
        for a in (0..m).rev() {
            let next: BTreeSet<usize> = reached
                .iter()
                .flat_map(|&x| (0..n).filter(move |&y| lts.successors(x, a) >> y & 1 == 1))
                .collect();
            stack.push((next, len + 1));
        }
    }
    table
}

#[test]
fn moore_semantics_match_observation_enumeration() {
    for trial in 0..60 {
        let mut rng = SplitMix64::for_trial(14, trial);
        let lts = random_lts(&mut rng, 3, 2);
        let n = lts.states().len();
        // Two determinised copies have at most 2·2^n states together, so
        // shorter words suffice to separate any inequivalent pair.
        let maxlen = 2 << n;
        for semantics in [
            MooreSemantics::Trace,
            MooreSemantics::Failure,
            MooreSemantics::Ready,
        ] {
            let machine = OutputLts::with_semantics(lts.clone(), semantics).unwrap();
            let singles: Vec<Mask> = (0..n).map(|x| 1 << x).collect();
            let eq = moore_equiv(&machine, &singles).unwrap();
            let tables: Vec<_> = (0..n)
                .map(|x| observation_table(&lts, x, maxlen, semantics))
                .collect();
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(
                        eq.equivalent(1 << x, 1 << y).unwrap(),
                        tables[x] == tables[y],
                        "trial {trial}, {semantics:?}"
                    );
                }
            }
        }
    }
}
