//! Distributive laws, predicate liftings and relation liftings in their
//! concrete derived forms. The [`laws`] submodule checks the laws they are
//! supposed to satisfy on sampled instances.

pub mod laws;

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::equivalence::CondRel;
use crate::error::{Error, Result};
use crate::kernel::rational::{vec_add, vec_scale, zero_vector, QVector, Rational};
use crate::kernel::{members, BitRel, Mask, Subspace};
use crate::systems::{Cts, DeterminizedMachine, Lwa};

/// An element of `F Y = A×Y + 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FElem<P> {
    Act(usize, P),
    Term,
}

impl<P> FElem<P> {
    pub fn map<Q>(&self, f: impl FnOnce(&P) -> Q) -> FElem<Q> {
        match self {
            FElem::Act(a, p) => FElem::Act(*a, f(p)),
            FElem::Term => FElem::Term,
        }
    }
}

/// `θ : F P ⇒ P F` on an arbitrary payload carrier.
pub fn theta<P: Clone + Ord>(e: &FElem<BTreeSet<P>>) -> BTreeSet<FElem<P>> {
    match e {
        FElem::Act(a, u) => u.iter().map(|x| FElem::Act(*a, x.clone())).collect(),
        FElem::Term => BTreeSet::from([FElem::Term]),
    }
}

/// `θ` with the payload given as a subset mask of `X`.
pub fn theta_nda(e: &FElem<Mask>) -> BTreeSet<FElem<usize>> {
    match *e {
        FElem::Act(a, u) => members(u).map(|x| FElem::Act(a, x)).collect(),
        FElem::Term => BTreeSet::from([FElem::Term]),
    }
}

/// An element of `(P X)^A × 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GValueNda {
    pub succ: Vec<Mask>,
    pub term: bool,
}

/// `γ(Ū) = (a ↦ {x | (a,x) ∈ Ū}, • ∈ Ū)`.
pub fn gamma_nda(ubar: &BTreeSet<FElem<usize>>, actions: usize) -> Result<GValueNda> {
    let mut succ = vec![0; actions];
    let mut term = false;
    for e in ubar {
        match *e {
            FElem::Act(a, x) => {
                *succ.get_mut(a).ok_or(Error::UnknownAction(a))? |= 1 << x;
            }
            FElem::Term => term = true,
        }
    }
    Ok(GValueNda { succ, term })
}

/// An element of `(ℚ^X)^A × ℚ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GValueLwa {
    pub succ: Vec<QVector>,
    pub output: Rational,
}

/// `γ(p̄) = (a ↦ (x ↦ p̄(a,x)), p̄(•))` for a finitely supported `p̄`.
pub fn gamma_lwa(
    pbar: &[(FElem<usize>, Rational)],
    actions: usize,
    dim: usize,
) -> Result<GValueLwa> {
    let mut succ = vec![zero_vector(dim); actions];
    let mut output = Rational::zero();
    for (e, w) in pbar {
        match *e {
            FElem::Act(a, x) => {
                let row = succ.get_mut(a).ok_or(Error::UnknownAction(a))?;
                let slot = row.get_mut(x).ok_or(Error::DimensionMismatch {
                    expected: dim,
                    found: x + 1,
                })?;
                *slot = &*slot + w;
            }
            FElem::Term => output = &output + w,
        }
    }
    Ok(GValueLwa { succ, output })
}

/// `γ(k, U) = {k} × U`.
pub fn gamma_cts(k: usize, u: Mask) -> BTreeSet<(usize, usize)> {
    members(u).map(|x| (k, x)).collect()
}

/// The two NDA modalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NdaModality {
    Action(usize),
    Term,
}

/// Derived NDA modality on a determinised machine: for an action `a`,
/// `{U | U_a ∈ 𝕌}`; for `↓`, `{U | U ↓}`. Predicates are indexed like
/// `d.subset_states()`.
pub fn mod_nda(
    kind: NdaModality,
    pred: &FixedBitSet,
    d: &DeterminizedMachine<bool>,
) -> Result<FixedBitSet> {
    if pred.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            found: pred.len(),
        });
    }
    let mut out = FixedBitSet::with_capacity(d.len());
    match kind {
        NdaModality::Action(a) => {
            if a >= d.actions() {
                return Err(Error::UnknownAction(a));
            }
            for i in 0..d.len() {
                out.set(i, pred.contains(d.next(i, a)));
            }
        }
        NdaModality::Term => {
            for i in 0..d.len() {
                out.set(i, *d.output(i));
            }
        }
    }
    Ok(out)
}

/// Box on a CTS: `{(k,x) | ∀x′. x →k x′ ⟹ (k,x′) ∈ U}`. Predicates over
/// `K×X` are indexed by `k·|X| + x`.
pub fn mod_cts_box(c: &Cts, pred: &FixedBitSet) -> FixedBitSet {
    let n = c.states().len();
    let mut out = FixedBitSet::with_capacity(c.points());
    for k in 0..c.conditions().len() {
        for x in 0..n {
            let ok = members(c.successors(k, x)).all(|y| pred.contains(k * n + y));
            out.set(k * n + x, ok);
        }
    }
    out
}

/// The two LWA modalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LwaModality {
    Action(usize),
    Output(Rational),
}

/// A decidable region of `ℚ^X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LwaRegion {
    Everything,
    /// `{p | p·o = s}`.
    Output(Rational),
    /// `{p | p·M_a ∈ region}`.
    After(usize, Box<LwaRegion>),
    Subspace(Subspace),
}

impl LwaRegion {
    pub fn holds(&self, l: &Lwa, p: &[Rational]) -> Result<bool> {
        match self {
            LwaRegion::Everything => Ok(true),
            LwaRegion::Output(s) => Ok(&l.output(p)? == s),
            LwaRegion::After(a, inner) => inner.holds(l, &l.step(p, *a)?),
            LwaRegion::Subspace(w) => w.contains(p),
        }
    }
}

/// For an action `a`: does `p·M_a` lie in `region`? For an output `s`: is
/// `p·o = s`? (The region is not consulted for output modalities.)
pub fn mod_lwa(kind: &LwaModality, region: &LwaRegion, p: &[Rational], l: &Lwa) -> Result<bool> {
    match kind {
        LwaModality::Action(a) => region.holds(l, &l.step(p, *a)?),
        LwaModality::Output(s) => Ok(&l.output(p)? == s),
    }
}

/// NDA relation lifting of `R ⊆ P(X)×P(X)` (indexed by mask):
/// `Ū` and `Ū′` agree on `•` and every action's successor sets are related.
pub fn rel_lift_nda(
    r: &BitRel,
    actions: usize,
    ubar: &BTreeSet<FElem<usize>>,
    ubar2: &BTreeSet<FElem<usize>>,
) -> Result<bool> {
    let g = gamma_nda(ubar, actions)?;
    let h = gamma_nda(ubar2, actions)?;
    for (&u, &v) in g.succ.iter().zip(&h.succ) {
        let in_range = |m: Mask| (m as usize) < r.size();
        if !in_range(u) || !in_range(v) {
            return Err(Error::MaskOutOfRange {
                mask: u.max(v),
                size: r.size().trailing_zeros() as usize,
            });
        }
    }
    Ok(g.term == h.term
        && g.succ
            .iter()
            .zip(&h.succ)
            .all(|(&u, &v)| r.contains(u as usize, v as usize)))
}

/// CTS relation lifting at condition `k`: two-sided simulation of `U` and
/// `U′` through the triples of `R` carrying condition `k`.
pub fn rel_lift_cts(r: &CondRel, k: usize, u: Mask, v: Mask) -> bool {
    members(u).all(|x| members(v).any(|y| r.contains(k, x, y)))
        && members(v).all(|y| members(u).any(|x| r.contains(k, x, y)))
}

/// Linear extension of `F̄f` for a Kleisli map `f: X → ℚ^Y` given as an
/// `|X|×|Y|` matrix, acting on dense vectors over `FX` (index `a·|X| + x`,
/// then `•`).
pub fn lift_kleisli_matrix(pbar: &[Rational], f: &[QVector], actions: usize) -> QVector {
    let (n, m) = (f.len(), f.first().map_or(0, Vec::len));
    let mut out = zero_vector(actions * m + 1);
    for a in 0..actions {
        for x in 0..n {
            let w = &pbar[a * n + x];
            if w.is_zero() {
                continue;
            }
            let image = vec_scale(w, &f[x]);
            let block = vec_add(&out[a * m..(a + 1) * m], &image);
            out[a * m..(a + 1) * m].clone_from_slice(&block);
        }
    }
    out[actions * m] = pbar[actions * n].clone();
    out
}
