//! Seeded benchmark instances shared by the criterion benches.

use coeq::random::{random_cts_sized, random_nda_sized};
use coeq::rng::SplitMix64;
use coeq::{Cts, Lwa, Mask, Nda};

/// Every subset of an `n`-state carrier.
pub fn every_subset(n: usize) -> Vec<Mask> {
    (0..1u64 << n).collect()
}

pub fn nda(states: usize, actions: usize, seed: u64) -> Nda {
    random_nda_sized(&mut SplitMix64::new(seed), states, actions)
}

pub fn cts(conditions: usize, states: usize, seed: u64) -> Cts {
    random_cts_sized(&mut SplitMix64::new(seed), conditions, states)
}

/// A random LWA with at least `min_states` states.
pub fn lwa(min_states: usize, max_states: usize, seed: u64) -> Lwa {
    (0..)
        .map(|i| coeq::random::random_lwa(&mut SplitMix64::for_trial(seed, i), max_states, 2))
        .find(|l| l.dim() >= min_states)
        .expect("some seed reaches the size")
}
