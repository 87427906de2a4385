//! Seeded random instances for law checks and oracle cross-checks.
//!
//! Every transition is present independently with probability ½ and weights
//! are drawn uniformly from `{0, ±1, ±½, 2}`.

use crate::kernel::{Carrier, Rational};
use crate::rng::SplitMix64;
use crate::systems::{Cts, Lts, Lwa, Nda};

/// The weight pool for random LWAs.
pub fn weight_pool() -> [Rational; 6] {
    [
        Rational::zero(),
        Rational::integer(1),
        Rational::integer(-1),
        Rational::new(1, 2),
        Rational::new(-1, 2),
        Rational::integer(2),
    ]
}

pub fn random_weight(rng: &mut SplitMix64) -> Rational {
    rng.pick(&weight_pool()).clone()
}

pub fn random_vector(rng: &mut SplitMix64, dim: usize) -> Vec<Rational> {
    (0..dim).map(|_| random_weight(rng)).collect()
}

/// An NDA with `1..=max_states` states over `1..=max_actions` actions.
pub fn random_nda(rng: &mut SplitMix64, max_states: usize, max_actions: usize) -> Nda {
    let n = rng.range(1, max_states);
    let m = rng.range(1, max_actions);
    random_nda_sized(rng, n, m)
}

pub fn random_nda_sized(rng: &mut SplitMix64, n: usize, m: usize) -> Nda {
    let mut transitions = Vec::new();
    for x in 0..n {
        for a in 0..m {
            for y in 0..n {
                if rng.coin() {
                    transitions.push((x, a, y));
                }
            }
        }
    }
    let accepting: Vec<usize> = (0..n).filter(|_| rng.coin()).collect();
    Nda::new(
        Carrier::numbered("x", n),
        Carrier::numbered("a", m),
        transitions,
        accepting,
    )
    .expect("generated in range")
}

pub fn random_lwa(rng: &mut SplitMix64, max_states: usize, max_actions: usize) -> Lwa {
    let n = rng.range(1, max_states);
    let m = rng.range(1, max_actions);
    let output = (0..n)
        .map(|_| {
            if rng.coin() {
                random_weight(rng)
            } else {
                Rational::zero()
            }
        })
        .collect();
    let matrices = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.coin() {
                                random_weight(rng)
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Lwa::new(
        Carrier::numbered("x", n),
        Carrier::numbered("a", m),
        output,
        matrices,
    )
    .expect("generated in range")
}

pub fn random_cts(rng: &mut SplitMix64, max_conditions: usize, max_states: usize) -> Cts {
    let k = rng.range(1, max_conditions);
    let n = rng.range(1, max_states);
    random_cts_sized(rng, k, n)
}

pub fn random_cts_sized(rng: &mut SplitMix64, k: usize, n: usize) -> Cts {
    let mut transitions = Vec::new();
    for c in 0..k {
        for x in 0..n {
            for y in 0..n {
                if rng.coin() {
                    transitions.push((c, x, y));
                }
            }
        }
    }
    Cts::new(
        Carrier::numbered("k", k),
        Carrier::numbered("x", n),
        transitions,
    )
    .expect("generated in range")
}

pub fn random_lts(rng: &mut SplitMix64, max_states: usize, max_actions: usize) -> Lts {
    let n = rng.range(1, max_states);
    let m = rng.range(1, max_actions);
    let mut transitions = Vec::new();
    for x in 0..n {
        for a in 0..m {
            for y in 0..n {
                if rng.coin() {
                    transitions.push((x, a, y));
                }
            }
        }
    }
    Lts::new(
        Carrier::numbered("x", n),
        Carrier::numbered("a", m),
        transitions,
    )
    .expect("generated in range")
}

/// A random total function `0..from → 0..to`.
pub fn random_function(rng: &mut SplitMix64, from: usize, to: usize) -> Vec<usize> {
    (0..from).map(|_| rng.below(to)).collect()
}
