use proptest::prelude::*;

use coeq::equivalence::{cts_conditional_bisim, machine_step, nda_language_equiv};
use coeq::format::System;
use coeq::kernel::rational::{row_times_matrix, vec_add, vec_scale};
use coeq::kernel::{echelonize, gfp, members};
use coeq::logic::{eval_cts, eval_word_nda, theory_word_nda, CtsFormula};
use coeq::quotient::{
    build_equalizer_automaton, cts_quotient, equalizer_subset, verify_homomorphism_rel,
};
use coeq::random::{random_cts, random_lwa, random_nda, random_vector};
use coeq::rng::SplitMix64;
use coeq::systems::forward_determinize;
use coeq::{BitRel, Carrier, Mask, Nda, Rational};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn nda(seed: u64, max_states: usize) -> Nda {
    random_nda(&mut SplitMix64::new(seed), max_states, 2)
}

fn every_subset(n: &Nda) -> Vec<Mask> {
    (0..1u64 << n.states().len()).collect()
}

/// Two disjoint copies of `n`, the second one shifted by `|X|`.
fn doubled(n: &Nda) -> Nda {
    let size = n.states().len();
    let names = (0..2 * size).map(|i| format!("s{i}"));
    let transitions = n
        .transitions()
        .iter()
        .flat_map(|&(x, a, y)| [(x, a, y), (x + size, a, y + size)]);
    let accepting = members(n.accepting()).flat_map(|x| [x, x + size]);
    Nda::new(
        Carrier::new(names).unwrap(),
        n.alphabet().clone(),
        transitions,
        accepting,
    )
    .unwrap()
}

fn cts_formula(seed: u64, depth: usize) -> CtsFormula {
    let mut rng = SplitMix64::new(seed);
    fn go(rng: &mut SplitMix64, depth: usize) -> CtsFormula {
        if depth == 0 {
            return if rng.coin() {
                CtsFormula::Tt
            } else {
                CtsFormula::negate(CtsFormula::Tt)
            };
        }
        match rng.below(3) {
            0 => CtsFormula::negate(go(rng, depth - 1)),
            1 => CtsFormula::and(go(rng, depth - 1), go(rng, depth - 1)),
            _ => CtsFormula::boxed(go(rng, depth - 1)),
        }
    }
    go(&mut rng, depth)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gfp_is_the_greatest_post_fixpoint(seed in any::<u64>(), extra in any::<u64>()) {
        let n = nda(seed, 4);
        let d = forward_determinize(&n, &every_subset(&n)).unwrap();
        let fix = gfp(BitRel::full(d.len()), |r| machine_step(&d, r));
        prop_assert!(fix.relation.is_subset(&machine_step(&d, &fix.relation)));
        // A post-fixpoint grown from a few random pairs must lie below it.
        let mut rng = SplitMix64::new(extra);
        let mut candidate = BitRel::identity(d.len());
        for _ in 0..3 {
            let (i, j) = (rng.below(d.len()), rng.below(d.len()));
            candidate.insert(i, j);
        }
        let mut post = candidate.clone();
        loop {
            let shrunk = post.intersection(&machine_step(&d, &post));
            if shrunk == post {
                break;
            }
            post = shrunk;
        }
        prop_assert!(post.is_subset(&fix.relation));
    }

    #[test]
    fn pullback_of_equality_is_an_equivalence(f in proptest::collection::vec(0usize..5, 0..8)) {
        let r = BitRel::identity(5).pullback(&f).unwrap();
        prop_assert!(r.is_equivalence());
    }

    #[test]
    fn echelon_form_ignores_order(seed in any::<u64>(), rotate in 0usize..5) {
        let mut rng = SplitMix64::new(seed);
        let vs: Vec<Vec<Rational>> = (0..4).map(|_| random_vector(&mut rng, 3)).collect();
        let mut rotated = vs.clone();
        rotated.rotate_left(rotate % vs.len());
        let base = echelonize(3, &vs).unwrap();
        prop_assert_eq!(&base, &echelonize(3, &rotated).unwrap());
        prop_assert_eq!(&base, &echelonize(3, base.basis()).unwrap());
    }

    #[test]
    fn lwa_step_is_linear(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let l = random_lwa(&mut rng, 4, 2);
        let (p, q) = (random_vector(&mut rng, l.dim()), random_vector(&mut rng, l.dim()));
        let c = Rational::new(-3, 2);
        for a in 0..l.alphabet().len() {
            let m = l.matrix(a);
            prop_assert_eq!(
                l.step(&vec_add(&p, &q), a).unwrap(),
                vec_add(&row_times_matrix(&p, m), &row_times_matrix(&q, m))
            );
            prop_assert_eq!(l.step(&vec_scale(&c, &p), a).unwrap(), vec_scale(&c, &l.step(&p, a).unwrap()));
        }
    }

    #[test]
    fn language_equivalence_is_a_post_fixpoint(seed in any::<u64>()) {
        let n = nda(seed, 5);
        let eq = nda_language_equiv(&n, &every_subset(&n)).unwrap();
        prop_assert!(eq.is_post_fixpoint());
        prop_assert!(eq.relation.is_equivalence());
    }

    #[test]
    fn gluing_copies_preserves_the_equivalence(seed in any::<u64>()) {
        let n = nda(seed, 3);
        let size = n.states().len();
        let both = doubled(&n);
        let original = nda_language_equiv(&n, &every_subset(&n)).unwrap();
        let shifted: Vec<Mask> = every_subset(&n).iter().map(|u| u << size).collect();
        let glued = nda_language_equiv(&both, &[every_subset(&n), shifted].concat()).unwrap();
        for u in every_subset(&n) {
            for v in every_subset(&n) {
                let expected = original.equivalent(u, v).unwrap();
                prop_assert_eq!(glued.equivalent(u, v).unwrap(), expected);
                prop_assert_eq!(glued.equivalent(u << size, v << size).unwrap(), expected);
                prop_assert_eq!(glued.equivalent(u, v << size).unwrap(), expected);
            }
        }
    }

    #[test]
    fn equalizer_pipeline_is_consistent(seed in any::<u64>()) {
        let n = nda(seed, 5);
        let eq = nda_language_equiv(&n, &every_subset(&n)).unwrap();
        let carrier = equalizer_subset(&n, &eq.relation).unwrap();
        for &w1 in &carrier {
            for &w2 in &carrier {
                prop_assert!(carrier.contains(&(w1 | w2)));
            }
        }
        let e = build_equalizer_automaton(&n, &eq.relation).unwrap();
        prop_assert!(verify_homomorphism_rel(&n, &e).holds);
        for u in every_subset(&n) {
            for v in every_subset(&n) {
                if eq.equivalent(u, v).unwrap() {
                    prop_assert_eq!(e.kappa_image(u), e.kappa_image(v));
                }
            }
        }
    }

    #[test]
    fn cts_quotient_is_minimal(seed in any::<u64>()) {
        let c = random_cts(&mut SplitMix64::new(seed), 3, 5);
        let fix = cts_conditional_bisim(&c);
        let q = cts_quotient(&c, &fix.relation, true).unwrap();
        let again = cts_conditional_bisim(&q.system).relation;
                // Quotient states belonging to one condition are pairwise distinguishable there.
        for k in 0..q.system.conditions().len() {
            for (i, class_i) in q.classes.iter().enumerate() {
                for (j, class_j) in q.classes.iter().enumerate() {
                    if class_i[0].0 == k && class_j[0].0 == k {
                        prop_assert_eq!(again.contains(k, i, j), i == j);
                    }
                }
            }
        }
    }

    #[test]
    fn box_preserves_meets_and_negation_is_involutive(seed in any::<u64>(), f in any::<u64>(), g in any::<u64>()) {
        let c = random_cts(&mut SplitMix64::new(seed), 3, 5);
        let (phi, psi) = (cts_formula(f, 3), cts_formula(g, 3));
        let both = eval_cts(&c, &CtsFormula::boxed(CtsFormula::and(phi.clone(), psi.clone())));
        let mut separately = eval_cts(&c, &CtsFormula::boxed(phi.clone()));
        separately.intersect_with(&eval_cts(&c, &CtsFormula::boxed(psi)));
        prop_assert_eq!(both, separately);
        prop_assert_eq!(eval_cts(&c, &CtsFormula::negate(CtsFormula::negate(phi.clone()))), eval_cts(&c, &phi));
    }

    #[test]
    fn theory_table_agrees_with_evaluation(seed in any::<u64>(), u in any::<u64>()) {
        let n = nda(seed, 4);
        let u = u & ((1 << n.states().len()) - 1);
        for (word, value) in theory_word_nda(&n, u, 3).unwrap() {
            prop_assert_eq!(eval_word_nda(&n, u, &word).unwrap(), value);
        }
    }

    #[test]
    fn system_files_round_trip(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let systems = [
            System::Nda(random_nda(&mut rng, 4, 2)),
            System::Lwa(random_lwa(&mut rng, 3, 2)),
            System::Cts(random_cts(&mut rng, 2, 4)),
        ];
        for s in systems {
            prop_assert_eq!(System::from_json(&s.to_json()).unwrap(), s);
        }
    }
}
