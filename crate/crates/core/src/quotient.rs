//! Quotients: the backward determinisation of an NDA, its sub-automaton on the
//! equalizer of an equivalence, the witnessing relation `κ`, and the quotient
//! of a CTS by a conditional bisimulation.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::equivalence::{cts_step, CondRel};
use crate::error::{Error, Result};
use crate::kernel::{members, BitRel, Carrier, Mask, DEFAULT_POWERSET_CAP};
use crate::liftings::FElem;
use crate::systems::{Cts, Nda};

/// Largest state space accepted by the equalizer pipeline.
pub const EQUALIZER_CAP: usize = 6;

/// The reverse-image automaton on all of `P(X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardDfa {
    size: usize,
    actions: usize,
    /// `trans[U][a] = { x | ∃x′ ∈ U. x →a x′ }`.
    trans: Vec<Vec<Mask>>,
    /// `{ x | x is accepting }`.
    terminal: Mask,
}

impl BackwardDfa {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn trans(&self, u: Mask, a: usize) -> Mask {
        self.trans[u as usize][a]
    }

    pub fn terminal(&self) -> Mask {
        self.terminal
    }

    /// `U` meets the accepting states.
    pub fn accepting(&self, u: Mask) -> bool {
        u & self.terminal != 0
    }

    pub fn states(&self) -> impl Iterator<Item = Mask> {
        0..1u64 << self.size
    }
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(())
}

pub fn backward_determinize(n: &Nda) -> Result<BackwardDfa> {
    let size = n.states().len();
    check_cap(size, DEFAULT_POWERSET_CAP)?;
    let actions = n.alphabet().len();
    let trans = (0..1u64 << size)
        .map(|u| {
            (0..actions)
                .map(|a| {
                    (0..size)
                        .filter(|&x| n.successors(x, a) & u != 0)
                        .fold(0, |acc, x| acc | 1 << x)
                })
                .collect()
        })
        .collect();
    Ok(BackwardDfa {
        size,
        actions,
        trans,
        terminal: n.accepting(),
    })
}

/// `{ W ⊆ X | ∀U ≃ V. U ∩ W ≠ ∅ ⟹ V ∩ W ≠ ∅ }`, sorted.
pub fn equalizer_subset(n: &Nda, eq: &BitRel) -> Result<Vec<Mask>> {
    let size = n.states().len();
    check_cap(size, EQUALIZER_CAP)?;
    if eq.size() != 1 << size {
        return Err(Error::DimensionMismatch {
            expected: 1 << size,
            found: eq.size(),
        });
    }
    if let Some(why) = eq.equivalence_violation() {
        return Err(Error::NotEquivalence(why));
    }
    let classes = eq.classes();
    Ok((0..1u64 << size)
        .filter(|&w| {
            classes.iter().all(|block| {
                let meets = |u: &usize| *u as Mask & w != 0;
                block.iter().all(meets) || !block.iter().any(meets)
            })
        })
        .collect())
}

/// The backward determinisation restricted to an equalizer carrier.
///
/// Edges follow the direction of the coalgebra on the carrier: `W →a W′`
/// iff the reverse image of `W′` under `a` is `W`, so that composing with
/// `κ` reproduces the one-step behaviour of every state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualizerAutomaton {
    pub size: usize,
    pub actions: usize,
    /// Sorted carrier masks.
    pub carrier: Vec<Mask>,
    /// `(from, action, to)` over carrier indices, sorted.
    pub beta: Vec<(usize, usize, usize)>,
    /// Carrier index of the terminal set.
    pub terminal: usize,
    /// `(x, W)` with `x ∈ W`, `W` a carrier index, sorted.
    pub kappa: Vec<(usize, usize)>,
    /// Carrier elements that are unions of strictly smaller carrier elements
    /// (∅ included, as the empty union).
    pub redundant: Vec<Mask>,
}

impl EqualizerAutomaton {
    pub fn index_of(&self, w: Mask) -> Option<usize> {
        self.carrier.binary_search(&w).ok()
    }

    /// `|κ|(U) = { W ∈ carrier | W ∩ U ≠ ∅ }`.
    pub fn kappa_image(&self, u: Mask) -> Vec<Mask> {
        self.carrier
            .iter()
            .copied()
            .filter(|w| w & u != 0)
            .collect()
    }

    /// `β(W) ⊆ A × carrier + 1` for a carrier index.
    pub fn beta_of(&self, w: usize) -> BTreeSet<FElem<usize>> {
        let mut out: BTreeSet<FElem<usize>> = self
            .beta
            .iter()
            .filter(|&&(from, _, _)| from == w)
            .map(|&(_, a, to)| FElem::Act(a, to))
            .collect();
        if w == self.terminal {
            out.insert(FElem::Term);
        }
        out
    }
}

pub fn build_equalizer_automaton(n: &Nda, eq: &BitRel) -> Result<EqualizerAutomaton> {
    let carrier = equalizer_subset(n, eq)?;
    let back = backward_determinize(n)?;
    let index = |w: Mask| carrier.binary_search(&w).ok();
    let terminal = index(back.terminal()).ok_or_else(|| {
        Error::ClosureViolation(format!(
            "the accepting set {} is not in the carrier",
            n.states().format_subset(back.terminal())
        ))
    })?;
    let mut beta = Vec::new();
    for (to, &w) in carrier.iter().enumerate() {
        for a in 0..back.actions() {
            let image = back.trans(w, a);
            let from = index(image).ok_or_else(|| {
                Error::ClosureViolation(format!(
                    "reverse image of {} under `{}` is {}, outside the carrier",
                    n.states().format_subset(w),
                    n.alphabet().name(a),
                    n.states().format_subset(image)
                ))
            })?;
            beta.push((from, a, to));
        }
    }
    beta.sort_unstable();
    let size = n.states().len();
    let kappa = (0..size)
        .flat_map(|x| {
            carrier
                .iter()
                .enumerate()
                .filter(move |(_, &w)| w >> x & 1 == 1)
                .map(move |(i, _)| (x, i))
        })
        .collect();
    let redundant = carrier
        .iter()
        .copied()
        .filter(|&w| {
            let below = carrier
                .iter()
                .filter(|&&v| v != w && v & !w == 0)
                .fold(0, |acc, v| acc | v);
            below == w
        })
        .collect();
    Ok(EqualizerAutomaton {
        size,
        actions: back.actions(),
        carrier,
        beta,
        terminal,
        kappa,
        redundant,
    })
}

/// Where the two sides of the homomorphism square first disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomomorphismMismatch {
    pub state: usize,
    /// An element of `A × carrier + 1` (carrier index) present on one side only.
    pub element: FElem<usize>,
    pub in_lhs: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomomorphismCheck {
    pub holds: bool,
    pub mismatch: Option<HomomorphismMismatch>,
}

/// Compares `F̄κ ∘ α` with `β ∘ κ` as relations `X → A × carrier + 1`.
pub fn verify_homomorphism_rel(n: &Nda, e: &EqualizerAutomaton) -> HomomorphismCheck {
    for x in 0..n.states().len() {
        // F̄κ ∘ α: push every one-step element of α(x) along κ.
        let mut lhs = BTreeSet::new();
        for &(from, a, to) in n.transitions() {
            if from != x {
                continue;
            }
            for &(y, w) in &e.kappa {
                if y == to {
                    lhs.insert(FElem::Act(a, w));
                }
            }
        }
        if n.is_accepting(x) {
            lhs.insert(FElem::Term);
        }
        // β ∘ κ
        let rhs: BTreeSet<FElem<usize>> = e
            .kappa
            .iter()
            .filter(|&&(y, _)| y == x)
            .flat_map(|&(_, w)| e.beta_of(w))
            .collect();
        if let Some(el) = lhs.symmetric_difference(&rhs).next() {
            return HomomorphismCheck {
                holds: false,
                mismatch: Some(HomomorphismMismatch {
                    state: x,
                    element: el.clone(),
                    in_lhs: lhs.contains(el),
                }),
            };
        }
    }
    HomomorphismCheck {
        holds: true,
        mismatch: None,
    }
}

/// A quotient of a CTS. States of the quotient are classes of points
/// `(k, x)`; the quotient has the same conditions and its dynamics do not
/// depend on the condition argument, since every class already fixes one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtsQuotient {
    pub system: Cts,
    /// `map[k][x]` is the class of `(k, x)`.
    pub map: Vec<Vec<usize>>,
    /// Members `(k, x)` of each class, sorted; classes ordered by first member.
    pub classes: Vec<Vec<(usize, usize)>>,
}

impl CtsQuotient {
    pub fn class_of(&self, k: usize, x: usize) -> usize {
        self.map[k][x]
    }
}

/// Quotients `c` by the least equivalence on `K × X` containing the
/// same-condition pairs of `r`. With `require_equivalence`, each slice of `r`
/// must already be an equivalence.
pub fn cts_quotient(c: &Cts, r: &CondRel, require_equivalence: bool) -> Result<CtsQuotient> {
    let kk = c.conditions().len();
    let n = c.states().len();
    if r.conditions() != kk || (kk > 0 && r.states() != n) {
        return Err(Error::DimensionMismatch {
            expected: kk * n,
            found: r.conditions() * r.states(),
        });
    }
    let stepped = cts_step(c, r);
    if let Some((k, x, y)) = r.triples().find(|&(k, x, y)| !stepped.contains(k, x, y)) {
        return Err(Error::NotPostFixpoint(format!(
            "({}, {}, {}) has successor sets that are not related",
            c.conditions().name(k),
            c.states().name(x),
            c.states().name(y)
        )));
    }
    if require_equivalence {
        for (k, slice) in r.slices().iter().enumerate() {
            if let Some(why) = slice.equivalence_violation() {
                return Err(Error::NotEquivalence(format!(
                    "under condition {}: {why}",
                    c.conditions().name(k)
                )));
            }
        }
    }
    let mut classes = Vec::new();
    let mut map = vec![vec![0; n]; kk];
    for (k, row) in map.iter_mut().enumerate() {
        for block in r.slice(k).classes() {
            for &x in &block {
                row[x] = classes.len();
            }
            classes.push(block.into_iter().map(|x| (k, x)).collect::<Vec<_>>());
        }
    }
    let mut transitions = Vec::new();
    for (i, block) in classes.iter().enumerate() {
        let successors = |&(k, x): &(usize, usize)| -> BTreeSet<usize> {
            members(c.successors(k, x)).map(|y| map[k][y]).collect()
        };
        let targets = successors(&block[0]);
        if let Some(other) = block.iter().find(|p| successors(p) != targets) {
            return Err(Error::NotPostFixpoint(format!(
                "{} and {} reach different classes under condition {}",
                c.states().name(block[0].1),
                c.states().name(other.1),
                c.conditions().name(other.0)
            )));
        }
        for k in 0..kk {
            transitions.extend(targets.iter().map(|&j| (k, i, j)));
        }
    }
    let labels: Vec<String> = classes
        .iter()
        .map(|block| {
            let k = block[0].0;
            let members: Vec<&str> = block.iter().map(|&(_, x)| c.states().name(x)).collect();
            format!("{{{}}}@{}", members.join(","), c.conditions().name(k))
        })
        .collect();
    let system = Cts::new(c.conditions().clone(), Carrier::new(labels)?, transitions)?;
    Ok(CtsQuotient {
        system,
        map,
        classes,
    })
}
