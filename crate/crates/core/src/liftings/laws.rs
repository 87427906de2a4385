//! Sample-based checkers for the laws of the distributive laws and liftings.
//!
//! Each law is evaluated on `trials` random instances. A law can be run
//! against a deliberately broken implementation (its *mutation*); the
//! mutation named after a law is designed so that this law fails.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::equivalence::CondRel;
use crate::error::{Error, Result};
use crate::kernel::rational::{
    dot, row_times_matrix, vec_add, vec_scale, vec_sub, zero_vector, QVector, Rational,
};
use crate::kernel::{echelonize, members, BitRel, Mask, Semilattice, Subspace};
use crate::liftings::{
    gamma_cts, lift_kleisli_matrix, mod_cts_box, rel_lift_cts, rel_lift_nda, FElem,
};
use crate::random::{random_cts_sized, random_nda_sized, random_vector, random_weight};
use crate::rng::SplitMix64;
use crate::systems::{forward_determinize, Lts, OutputLts};

/// Samples drawn per law per trial.
const SAMPLES: usize = 16;
/// Counterexamples kept per law.
const KEPT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nda,
    Lwa,
    Cts,
    Moore,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Nda => "nda",
            Family::Lwa => "lwa",
            Family::Cts => "cts",
            Family::Moore => "moore",
        }
    }

    /// The laws checked for this family, in report order.
    pub fn laws(self) -> &'static [&'static str] {
        match self {
            Family::Nda => &[
                "kleisli-unit",
                "kleisli-multiplication",
                "gamma-compatibility",
                "predicate-naturality",
                "modality-recipe",
                "relation-naturality",
                "relation-intersection",
                "relation-equality",
            ],
            Family::Lwa => &[
                "kleisli-unit",
                "kleisli-multiplication",
                "gamma-compatibility",
                "predicate-naturality",
                "relation-naturality",
                "relation-intersection",
                "relation-equality",
            ],
            Family::Cts => &[
                "comonad-counit",
                "comonad-comultiplication",
                "box-naturality",
                "box-meet",
                "box-recipe",
                "relation-naturality",
                "relation-monotonicity",
                "relation-equality",
                "single-condition",
            ],
            Family::Moore => &[
                "predicate-naturality",
                "predicate-meet",
                "relation-naturality",
                "relation-intersection",
                "relation-equality",
                "determinization-join",
            ],
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nda" => Ok(Family::Nda),
            "lwa" => Ok(Family::Lwa),
            "cts" => Ok(Family::Cts),
            "moore" => Ok(Family::Moore),
            other => Err(Error::Parse(format!(
                "unknown family `{other}` (expected nda, lwa, cts or moore)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub law: String,
    pub trials: usize,
    pub passed: bool,
    pub failed_trials: usize,
    /// The first few counterexamples, rendered as terms.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub family: Family,
    pub seed: u64,
    pub trials: usize,
    pub mutation: Option<String>,
    pub laws: Vec<LawResult>,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.law == name)
    }
}

/// Runs every law of `family` on `trials` seeded instances, optionally with
/// the mutation that targets one law switched on.
pub fn check_lifting_laws(
    family: Family,
    trials: usize,
    seed: u64,
    mutation: Option<&str>,
) -> Result<LawReport> {
    if trials == 0 {
        return Err(Error::Parse("at least one trial is required".into()));
    }
    let laws = family.laws();
    if let Some(m) = mutation {
        if !laws.contains(&m) {
            return Err(Error::Parse(format!(
                "no mutation `{m}` for family {}; expected one of {}",
                family.name(),
                laws.join(", ")
            )));
        }
    }
    let mut results = Vec::new();
    for (li, &law) in laws.iter().enumerate() {
        let mutated = mutation == Some(law);
        let mut failures = Vec::new();
        let mut failed_trials = 0;
        for t in 0..trials {
            let mut rng = SplitMix64::for_trial(seed, (li * trials + t) as u64);
            let outcome = match family {
                Family::Nda => nda_law(law, &mut rng, mutated),
                Family::Lwa => lwa_law(law, &mut rng, mutated),
                Family::Cts => cts_law(law, &mut rng, mutated),
                Family::Moore => moore_law(law, &mut rng, mutated),
            };
            if let Some(cx) = outcome {
                failed_trials += 1;
                if failures.len() < KEPT {
                    failures.push(format!("trial {t}: {cx}"));
                }
            }
        }
        results.push(LawResult {
            law: law.to_string(),
            trials,
            passed: failed_trials == 0,
            failed_trials,
            failures,
        });
    }
    Ok(LawReport {
        family,
        seed,
        trials,
        mutation: mutation.map(str::to_string),
        laws: results,
    })
}

fn first_failure(mut check: impl FnMut() -> Option<String>) -> Option<String> {
    (0..SAMPLES).find_map(|_| check())
}

fn random_set(rng: &mut SplitMix64, n: usize) -> BTreeSet<usize> {
    members(rng.mask(n)).collect()
}

fn show_set<T: std::fmt::Debug>(s: &BTreeSet<T>) -> String {
    format!("{s:?}")
}

// ---------------------------------------------------------------- NDA ----

/// One-step elements of `P(FX)` are encoded as masks over `|A|·|X| + 1`
/// bits: `(a,x)` at `a·|X| + x`, `•` at `|A|·|X|`.
#[derive(Clone, Copy)]
struct FShape {
    states: usize,
    actions: usize,
}

impl FShape {
    fn bits(self) -> usize {
        self.actions * self.states + 1
    }
    fn term_bit(self) -> usize {
        self.actions * self.states
    }
    fn has_term(self, ubar: u64) -> bool {
        ubar >> self.term_bit() & 1 == 1
    }
    fn project(self, ubar: u64, a: usize) -> Mask {
        (ubar >> (a * self.states)) & crate::kernel::full_mask(self.states)
    }
    fn decode(self, ubar: u64) -> BTreeSet<FElem<usize>> {
        let mut out: BTreeSet<FElem<usize>> = (0..self.actions)
            .flat_map(|a| members(self.project(ubar, a)).map(move |x| FElem::Act(a, x)))
            .collect();
        if self.has_term(ubar) {
            out.insert(FElem::Term);
        }
        out
    }
    fn random(self, rng: &mut SplitMix64) -> u64 {
        rng.mask(self.bits())
    }
    /// `|F̄f|` for a Kleisli map `f: X → P(Y)`.
    fn push(self, ubar: u64, f: &[Mask], target: FShape) -> u64 {
        let mut out = 0;
        for a in 0..self.actions {
            let image = members(self.project(ubar, a)).fold(0, |acc, x| acc | f[x]);
            out |= image << (a * target.states);
        }
        if self.has_term(ubar) {
            out |= 1 << target.term_bit();
        }
        out
    }
}

fn kleisli_image(f: &[Mask], u: Mask) -> Mask {
    members(u).fold(0, |acc, x| acc | f[x])
}

struct NdaImpl {
    mutation: Option<&'static str>,
}

impl NdaImpl {
    fn on(&self, law: &str) -> bool {
        self.mutation == Some(law)
    }

    fn theta<P: Clone + Ord>(&self, e: &FElem<BTreeSet<P>>) -> BTreeSet<FElem<P>> {
        match e {
            FElem::Term if self.on("kleisli-unit") => BTreeSet::new(),
            FElem::Act(a, u) if self.on("kleisli-multiplication") => u
                .iter()
                .next_back()
                .map(|x| FElem::Act(*a, x.clone()))
                .into_iter()
                .collect(),
            other => super::theta(other),
        }
    }

    fn gamma<P: Clone + Ord>(
        &self,
        ubar: &BTreeSet<FElem<P>>,
        actions: usize,
    ) -> (Vec<BTreeSet<P>>, bool) {
        let mut succ = vec![BTreeSet::new(); actions];
        let mut term = false;
        for e in ubar {
            match e {
                FElem::Act(a, p) => {
                    succ[*a].insert(p.clone());
                }
                FElem::Term => term = true,
            }
        }
        if self.on("gamma-compatibility") {
            if ubar.is_empty() {
                term = true;
            } else if ubar.len() == 1 && term {
                term = false;
            }
        }
        (succ, term)
    }

    /// `λ^a(𝕌)` or `λ^↓` membership for an encoded `Ū`.
    fn lambda(&self, kind: Option<usize>, shape: FShape, ubar: u64, pred: &[bool]) -> bool {
        let base = match kind {
            Some(a) => pred[shape.project(ubar, a) as usize],
            None => shape.has_term(ubar),
        };
        base || (self.on("predicate-naturality") && ubar & 1 == 1)
    }

    fn rel_lift(&self, r: &BitRel, shape: FShape, u: u64, v: u64) -> bool {
        if self.mutation.is_none() {
            let (du, dv) = (shape.decode(u), shape.decode(v));
            return rel_lift_nda(r, shape.actions, &du, &dv).expect("masks in range");
        }
        let related =
            |a: usize| r.contains(shape.project(u, a) as usize, shape.project(v, a) as usize);
        let term_ok = shape.has_term(u) == shape.has_term(v) || self.on("relation-equality");
        let actions_ok = if self.on("relation-intersection") {
            (0..shape.actions).any(related)
        } else {
            (0..shape.actions).all(related)
        };
        (term_ok && actions_ok) || (self.on("relation-naturality") && u & v & 1 == 1)
    }
}

fn random_pred(rng: &mut SplitMix64, size: usize) -> Vec<bool> {
    (0..size).map(|_| rng.coin()).collect()
}

fn random_rel(rng: &mut SplitMix64, size: usize) -> BitRel {
    BitRel::from_fn(size, |_, _| rng.coin())
}

fn nda_law(law: &str, rng: &mut SplitMix64, mutated: bool) -> Option<String> {
    let imp = NdaImpl {
        mutation: mutated.then(|| *Family::Nda.laws().iter().find(|l| **l == law).unwrap()),
    };
    let n = rng.range(1, 4);
    let m = rng.range(1, 2);
    let shape = FShape {
        states: n,
        actions: m,
    };
    match law {
        "kleisli-unit" => first_failure(|| {
            let e = if rng.below(3) == 0 {
                FElem::Term
            } else {
                FElem::Act(rng.below(m), rng.below(n))
            };
            let lhs = imp.theta(&e.map(|x| BTreeSet::from([*x])));
            let rhs = BTreeSet::from([e.clone()]);
            (lhs != rhs).then(|| format!("θ(Fη({e:?})) = {} ≠ η({e:?})", show_set(&lhs)))
        }),
        "kleisli-multiplication" => first_failure(|| {
            let e: FElem<BTreeSet<BTreeSet<usize>>> = if rng.below(4) == 0 {
                FElem::Term
            } else {
                let family = (0..rng.range(0, 3)).map(|_| random_set(rng, n)).collect();
                FElem::Act(rng.below(m), family)
            };
            let flat = e.map(|fam| fam.iter().flatten().copied().collect::<BTreeSet<usize>>());
            let lhs = imp.theta(&flat);
            let rhs: BTreeSet<FElem<usize>> = imp
                .theta(&e)
                .iter()
                .flat_map(|inner| imp.theta(inner))
                .collect();
            (lhs != rhs).then(|| {
                format!(
                    "e = {e:?}: θ∘Fμ gives {} but μ∘Pθ∘θ gives {}",
                    show_set(&lhs),
                    show_set(&rhs)
                )
            })
        }),
        "gamma-compatibility" => first_failure(|| {
            let size = rng.range(0, 3);
            let ubar: BTreeSet<FElem<BTreeSet<usize>>> = (0..size)
                .map(|_| {
                    if rng.below(4) == 0 {
                        FElem::Term
                    } else {
                        FElem::Act(rng.below(m), random_set(rng, n))
                    }
                })
                .collect();
            let flat: BTreeSet<FElem<usize>> = ubar.iter().flat_map(|e| imp.theta(e)).collect();
            let lhs = imp.gamma(&flat, m);
            let (fam, term) = imp.gamma(&ubar, m);
            let rhs = (
                fam.iter()
                    .map(|f| f.iter().flatten().copied().collect::<BTreeSet<usize>>())
                    .collect::<Vec<_>>(),
                term,
            );
            (lhs != rhs)
                .then(|| format!("Ū = {ubar:?}: γ∘μ∘Pθ gives {lhs:?} but Gμ∘γ gives {rhs:?}"))
        }),
        "predicate-naturality" => {
            let k = rng.range(1, 4);
            let target = FShape {
                states: k,
                actions: m,
            };
            let f: Vec<Mask> = (0..n).map(|_| rng.mask(k)).collect();
            let pred = random_pred(rng, 1 << k);
            let pulled: Vec<bool> = (0..1u64 << n)
                .map(|u| pred[kleisli_image(&f, u) as usize])
                .collect();
            let kind = if rng.below(3) == 0 {
                None
            } else {
                Some(rng.below(m))
            };
            (0..1u64 << shape.bits()).find_map(|ubar| {
                let lhs = imp.lambda(kind, shape, ubar, &pulled);
                let rhs = imp.lambda(kind, target, shape.push(ubar, &f, target), &pred);
                (lhs != rhs).then(|| {
                    format!("f = {f:?}, modality {kind:?}, Ū = {ubar:#b}: λ∘f* = {lhs}, (F̄f)*∘λ = {rhs}")
                })
            })
        }
        "modality-recipe" => {
            // The derived modality on the determinised system must equal the
            // recipe α* ∘ γ* ∘ σ evaluated on the raw one-step sets.
            let nda = random_nda_sized(rng, n, m);
            let all: Vec<Mask> = (0..1u64 << n).collect();
            let d = forward_determinize(&nda, &all).expect("in range");
            let pred = random_pred(rng, 1 << n);
            let bits = {
                let mut b = fixedbitset::FixedBitSet::with_capacity(d.len());
                for (i, &p) in pred.iter().enumerate() {
                    b.set(i, p);
                }
                b
            };
            let kind = if rng.below(3) == 0 {
                None
            } else {
                Some(rng.below(m))
            };
            let modality = match kind {
                Some(a) => super::NdaModality::Action(a),
                None => super::NdaModality::Term,
            };
            let derived = super::mod_nda(modality, &bits, &d).expect("in range");
            (0..1u64 << n).find_map(|u| {
                let mut one_step = 0u64;
                for x in members(u) {
                    for a in 0..m {
                        one_step |= nda.successors(x, a) << (a * n);
                    }
                    if nda.is_accepting(x) {
                        one_step |= 1 << shape.term_bit();
                    }
                }
                let recipe = imp.lambda(kind, shape, one_step, &pred);
                let mut concrete = derived.contains(u as usize);
                if imp.on("modality-recipe") && kind.is_some() {
                    concrete = pred[u as usize];
                }
                (recipe != concrete).then(|| {
                    format!("U = {u:#b}, modality {kind:?}: derived {concrete}, recipe {recipe}")
                })
            })
        }
        "relation-naturality" => {
            let k = rng.range(1, 4);
            let target = FShape {
                states: k,
                actions: m,
            };
            let f: Vec<Mask> = (0..n).map(|_| rng.mask(k)).collect();
            let r = random_rel(rng, 1 << k);
            let pulled = BitRel::from_fn(1 << n, |u, v| {
                r.contains(
                    kleisli_image(&f, u as Mask) as usize,
                    kleisli_image(&f, v as Mask) as usize,
                )
            });
            first_failure(|| {
                let u = shape.random(rng);
                let v = shape.random(rng);
                let lhs = imp.rel_lift(&pulled, shape, u, v);
                let rhs = imp.rel_lift(
                    &r,
                    target,
                    shape.push(u, &f, target),
                    shape.push(v, &f, target),
                );
                (lhs != rhs).then(|| {
                    format!("f = {f:?}, Ū = {u:#b}, Ū′ = {v:#b}: λ̄∘f* = {lhs}, (F̄f)*∘λ̄ = {rhs}")
                })
            })
        }
        "relation-intersection" => {
            let r1 = random_rel(rng, 1 << n);
            let r2 = random_rel(rng, 1 << n);
            let both = r1.intersection(&r2);
            first_failure(|| {
                let u = shape.random(rng);
                let v = shape.random(rng);
                let lhs = imp.rel_lift(&both, shape, u, v);
                let rhs = imp.rel_lift(&r1, shape, u, v) && imp.rel_lift(&r2, shape, u, v);
                (lhs != rhs)
                    .then(|| format!("Ū = {u:#b}, Ū′ = {v:#b}: λ̄(R₁∩R₂) = {lhs}, λ̄R₁∩λ̄R₂ = {rhs}"))
            })
        }
        "relation-equality" => {
            let id = BitRel::identity(1 << n);
            first_failure(|| {
                let u = shape.random(rng);
                let v = if rng.coin() {
                    u
                } else {
                    u ^ 1 << rng.below(shape.bits())
                };
                let lhs = imp.rel_lift(&id, shape, u, v);
                (lhs != (u == v)).then(|| format!("Ū = {u:#b}, Ū′ = {v:#b}: λ̄(≡) = {lhs}"))
            })
        }
        _ => unreachable!("unknown NDA law {law}"),
    }
}

// ---------------------------------------------------------------- LWA ----

/// A finitely supported map `P → ℚ`, zero entries pruned.
type Sparse<P> = BTreeMap<P, Rational>;

fn sparse_add<P: Ord + Clone>(acc: &mut Sparse<P>, key: &P, w: &Rational) {
    if w.is_zero() {
        return;
    }
    let slot = acc.entry(key.clone()).or_insert_with(Rational::zero);
    *slot = &*slot + w;
    if slot.is_zero() {
        acc.remove(key);
    }
}

fn sparse_from_vec(v: &[Rational]) -> Sparse<usize> {
    let mut s = Sparse::new();
    for (i, w) in v.iter().enumerate() {
        sparse_add(&mut s, &i, w);
    }
    s
}

fn random_sparse_vector(rng: &mut SplitMix64, n: usize) -> Sparse<usize> {
    if rng.below(4) == 0 {
        return Sparse::new();
    }
    sparse_from_vec(&random_vector(rng, n))
}

/// `μ : M M ⇒ M`.
fn sparse_flatten<P: Ord + Clone>(outer: &Sparse<Sparse<P>>) -> Sparse<P> {
    let mut out = Sparse::new();
    for (inner, c) in outer {
        for (p, w) in inner {
            sparse_add(&mut out, p, &(c * w));
        }
    }
    out
}

struct LwaImpl {
    mutation: Option<&'static str>,
}

impl LwaImpl {
    fn on(&self, law: &str) -> bool {
        self.mutation == Some(law)
    }

    fn theta<P: Ord + Clone>(&self, e: &FElem<Sparse<P>>) -> Sparse<FElem<P>> {
        let mut out = Sparse::new();
        match e {
            FElem::Act(a, phi) => {
                for (x, w) in phi {
                    let w = if self.on("kleisli-multiplication") {
                        w * w
                    } else {
                        w.clone()
                    };
                    sparse_add(&mut out, &FElem::Act(*a, x.clone()), &w);
                }
            }
            FElem::Term => {
                let w = if self.on("kleisli-unit") {
                    Rational::integer(2)
                } else {
                    Rational::one()
                };
                sparse_add(&mut out, &FElem::Term, &w);
            }
        }
        out
    }

    /// Linear extension of `θ` to formal combinations, then flattened.
    fn theta_linear<P: Ord + Clone>(&self, pbar: &Sparse<FElem<Sparse<P>>>) -> Sparse<FElem<P>> {
        let mut out = Sparse::new();
        for (e, c) in pbar {
            for (f, w) in self.theta(e) {
                sparse_add(&mut out, &f, &(c * &w));
            }
        }
        out
    }

    fn gamma<P: Ord + Clone>(
        &self,
        pbar: &Sparse<FElem<P>>,
        actions: usize,
    ) -> (Vec<Sparse<P>>, Rational) {
        let mut succ = vec![Sparse::new(); actions];
        let mut out = Rational::zero();
        for (e, w) in pbar {
            match e {
                FElem::Act(a, p) => sparse_add(&mut succ[*a], p, w),
                FElem::Term => out = &out + w,
            }
        }
        if self.on("gamma-compatibility") {
            let is_zero = pbar.is_empty();
            let is_term = pbar.len() == 1 && pbar.get(&FElem::Term) == Some(&Rational::one());
            if is_zero {
                out = Rational::one();
            } else if is_term {
                out = Rational::zero();
            }
        }
        (succ, out)
    }

    /// Predicate lifting on dense one-step vectors (`(a,x)` at `a·n + x`,
    /// `•` last). `kind = None` is the output modality for `s`.
    fn lambda(
        &self,
        kind: Option<usize>,
        s: &Rational,
        n: usize,
        pbar: &[Rational],
        region: &dyn Fn(&[Rational]) -> bool,
    ) -> bool {
        let base = match kind {
            Some(a) => region(&pbar[a * n..(a + 1) * n]),
            None => pbar.last().expect("has •") == s,
        };
        base || (self.on("predicate-naturality") && !pbar[0].is_zero())
    }

    /// Relation lifting of the difference relation of `w`.
    fn rel_lift(
        &self,
        w: &Subspace,
        n: usize,
        actions: usize,
        p: &[Rational],
        q: &[Rational],
    ) -> bool {
        let related = |a: usize| {
            w.contains(&vec_sub(&p[a * n..(a + 1) * n], &q[a * n..(a + 1) * n]))
                .expect("dimensions agree")
        };
        let out_ok = p[actions * n] == q[actions * n] || self.on("relation-equality");
        let acts_ok = if self.on("relation-intersection") {
            (0..actions).any(related)
        } else {
            (0..actions).all(related)
        };
        (out_ok && acts_ok)
            || (self.on("relation-naturality") && !p[0].is_zero() && !q[0].is_zero())
    }
}

fn random_subspace(rng: &mut SplitMix64, n: usize) -> Subspace {
    let count = rng.range(0, n);
    let vs: Vec<QVector> = (0..count).map(|_| random_vector(rng, n)).collect();
    echelonize(n, &vs).expect("dimensions agree")
}

fn random_member(rng: &mut SplitMix64, w: &Subspace) -> QVector {
    let mut v = zero_vector(w.ambient_dim());
    for b in w.basis() {
        v = vec_add(&v, &vec_scale(&random_weight(rng), b));
    }
    v
}

fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> Vec<QVector> {
    (0..rows)
        .map(|_| {
            (0..cols)
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
}

fn lwa_law(law: &str, rng: &mut SplitMix64, mutated: bool) -> Option<String> {
    let imp = LwaImpl {
        mutation: mutated.then(|| *Family::Lwa.laws().iter().find(|l| **l == law).unwrap()),
    };
    let n = rng.range(1, 4);
    let m = rng.range(1, 2);
    let dense = |rng: &mut SplitMix64| -> QVector {
        (0..m * n + 1)
            .map(|_| {
                if rng.coin() {
                    random_weight(rng)
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    match law {
        "kleisli-unit" => first_failure(|| {
            let e = if rng.below(3) == 0 {
                FElem::Term
            } else {
                FElem::Act(rng.below(m), rng.below(n))
            };
            let lhs = imp.theta(&e.map(|x| Sparse::from([(*x, Rational::one())])));
            let rhs = Sparse::from([(e.clone(), Rational::one())]);
            (lhs != rhs).then(|| format!("θ(Fη({e:?})) = {lhs:?} ≠ η({e:?})"))
        }),
        "kleisli-multiplication" => first_failure(|| {
            let e: FElem<Sparse<Sparse<usize>>> = if rng.below(4) == 0 {
                FElem::Term
            } else {
                let mut phi = Sparse::new();
                for _ in 0..rng.range(1, 3) {
                    let v = random_sparse_vector(rng, n);
                    sparse_add(&mut phi, &v, &random_weight(rng));
                }
                FElem::Act(rng.below(m), phi)
            };
            let lhs = imp.theta(&e.map(sparse_flatten));
            let rhs = imp.theta_linear(&imp.theta(&e));
            (lhs != rhs).then(|| format!("e = {e:?}: θ∘Fμ gives {lhs:?} but μ∘Mθ∘θ gives {rhs:?}"))
        }),
        "gamma-compatibility" => first_failure(|| {
            let mut pbar: Sparse<FElem<Sparse<usize>>> = Sparse::new();
            for _ in 0..rng.range(0, 3) {
                let e = if rng.below(4) == 0 {
                    FElem::Term
                } else {
                    FElem::Act(rng.below(m), random_sparse_vector(rng, n))
                };
                let c = if rng.coin() {
                    Rational::one()
                } else {
                    random_weight(rng)
                };
                sparse_add(&mut pbar, &e, &c);
            }
            let lhs = imp.gamma(&imp.theta_linear(&pbar), m);
            let (fam, s) = imp.gamma(&pbar, m);
            let rhs = (fam.iter().map(sparse_flatten).collect::<Vec<_>>(), s);
            (lhs != rhs)
                .then(|| format!("p̄ = {pbar:?}: γ∘μ∘Mθ gives {lhs:?} but Gμ∘γ gives {rhs:?}"))
        }),
        "predicate-naturality" => {
            let k = rng.range(1, 4);
            let f = random_matrix(rng, n, k);
            let c = random_vector(rng, k);
            let region = |v: &[Rational]| dot(v, &c).is_zero();
            let pulled = |v: &[Rational]| dot(&row_times_matrix(v, &f), &c).is_zero();
            first_failure(|| {
                let p = dense(rng);
                let kind = if rng.below(3) == 0 {
                    None
                } else {
                    Some(rng.below(m))
                };
                let s = if rng.coin() {
                    p[m * n].clone()
                } else {
                    random_weight(rng)
                };
                let lhs = imp.lambda(kind, &s, n, &p, &pulled);
                let rhs = imp.lambda(kind, &s, k, &lift_kleisli_matrix(&p, &f, m), &region);
                (lhs != rhs).then(|| {
                    format!(
                        "f = {f:?}, modality {kind:?}, p̄ = {p:?}: λ∘f* = {lhs}, (F̄f)*∘λ = {rhs}"
                    )
                })
            })
        }
        "relation-naturality" => {
            let k = rng.range(1, 4);
            let f = random_matrix(rng, n, k);
            let w = random_subspace(rng, k);
            first_failure(|| {
                let p = dense(rng);
                let mut q = p.clone();
                for a in 0..m {
                    if rng.coin() {
                        let d = random_vector(rng, n);
                        for x in 0..n {
                            q[a * n + x] = &q[a * n + x] + &d[x];
                        }
                    }
                }
                let related_pulled = |a: usize| {
                    let d = vec_sub(&p[a * n..(a + 1) * n], &q[a * n..(a + 1) * n]);
                    w.contains(&row_times_matrix(&d, &f))
                        .expect("dimensions agree")
                };
                let mut lhs = p[m * n] == q[m * n] && (0..m).all(related_pulled);
                if imp.on("relation-naturality") && !p[0].is_zero() && !q[0].is_zero() {
                    lhs = true;
                }
                let rhs = imp.rel_lift(
                    &w,
                    k,
                    m,
                    &lift_kleisli_matrix(&p, &f, m),
                    &lift_kleisli_matrix(&q, &f, m),
                );
                (lhs != rhs).then(|| {
                    format!("f = {f:?}, p̄ = {p:?}, p̄′ = {q:?}: λ̄∘f* = {lhs}, (F̄f)*∘λ̄ = {rhs}")
                })
            })
        }
        "relation-intersection" => {
            let w1 = random_subspace(rng, n);
            let w2 = random_subspace(rng, n);
            let both = w1.intersection(&w2).expect("dimensions agree");
            first_failure(|| {
                let p = dense(rng);
                let mut q = p.clone();
                for a in 0..m {
                    let d = match rng.below(4) {
                        0 => random_member(rng, &w1),
                        1 => random_member(rng, &w2),
                        2 => random_member(rng, &both),
                        _ => random_vector(rng, n),
                    };
                    for x in 0..n {
                        q[a * n + x] = &q[a * n + x] + &d[x];
                    }
                }
                let lhs = imp.rel_lift(&both, n, m, &p, &q);
                let rhs = imp.rel_lift(&w1, n, m, &p, &q) && imp.rel_lift(&w2, n, m, &p, &q);
                (lhs != rhs)
                    .then(|| format!("p̄ = {p:?}, p̄′ = {q:?}: λ̄(R₁∩R₂) = {lhs}, λ̄R₁∩λ̄R₂ = {rhs}"))
            })
        }
        "relation-equality" => {
            let zero = Subspace::zero(n);
            first_failure(|| {
                let p = dense(rng);
                let mut q = p.clone();
                if rng.coin() {
                    let i = rng.below(q.len());
                    q[i] = &q[i] + &Rational::one();
                }
                let lhs = imp.rel_lift(&zero, n, m, &p, &q);
                (lhs != (p == q)).then(|| format!("p̄ = {p:?}, p̄′ = {q:?}: λ̄(≡) = {lhs}"))
            })
        }
        _ => unreachable!("unknown LWA law {law}"),
    }
}

// ---------------------------------------------------------------- CTS ----

struct CtsImpl {
    mutation: Option<&'static str>,
}

impl CtsImpl {
    fn on(&self, law: &str) -> bool {
        self.mutation == Some(law)
    }

    /// `γ(k, U) = {k}×U` on an arbitrary payload carrier.
    fn gamma<P: Ord + Clone>(
        &self,
        k: usize,
        u: &BTreeSet<P>,
        conditions: usize,
        first: &P,
    ) -> BTreeSet<(usize, P)> {
        let mut u = u.clone();
        if self.on("comonad-counit") {
            u.insert(first.clone());
        }
        if self.on("comonad-comultiplication") {
            (0..conditions)
                .flat_map(|j| u.iter().map(move |x| (j, x.clone())))
                .collect()
        } else {
            u.into_iter().map(|x| (k, x)).collect()
        }
    }

    /// Box lifting `λ(U) ⊆ K × P(X)`, membership of `(k, V)`.
    fn lambda(&self, pred: &dyn Fn(usize, usize) -> bool, k: usize, v: Mask) -> bool {
        members(v).all(|x| pred(k, x)) || (self.on("box-naturality") && v & 1 == 1)
    }

    fn rel_lift(&self, r: &CondRel, k: usize, u: Mask, v: Mask) -> bool {
        let forth = || members(u).all(|x| members(v).any(|y| r.contains(k, x, y)));
        let base = if self.on("single-condition") {
            forth() && members(v).all(|y| members(u).any(|x| r.contains(k, y, x)))
        } else if self.on("relation-equality") {
            forth()
        } else {
            rel_lift_cts(r, k, u, v)
        };
        base || (self.on("relation-naturality") && u & v & 1 == 1)
            || (self.on("relation-monotonicity") && u != 0 && v != 0 && !r.contains(k, 0, 0))
    }
}

fn cts_law(law: &str, rng: &mut SplitMix64, mutated: bool) -> Option<String> {
    let imp = CtsImpl {
        mutation: mutated.then(|| *Family::Cts.laws().iter().find(|l| **l == law).unwrap()),
    };
    let kk = if law == "single-condition" {
        1
    } else {
        rng.range(1, 3)
    };
    let n = rng.range(1, 4);
    let random_condrel =
        |rng: &mut SplitMix64, states: usize| CondRel::from_fn(kk, states, |_, _, _| rng.coin());
    match law {
        "comonad-counit" => first_failure(|| {
            let k = rng.below(kk);
            let u = random_set(rng, n);
            let lhs: BTreeSet<usize> = imp
                .gamma(k, &u, kk, &0)
                .into_iter()
                .map(|(_, x)| x)
                .collect();
            (lhs != u).then(|| format!("(k{k}, {u:?}): Pε∘γ gives {}", show_set(&lhs)))
        }),
        "comonad-comultiplication" => first_failure(|| {
            let k = rng.below(kk);
            let u = random_set(rng, n);
            let lhs: BTreeSet<(usize, (usize, usize))> = imp
                .gamma(k, &u, kk, &0)
                .into_iter()
                .map(|(j, x)| (j, (j, x)))
                .collect();
            let inner = imp.gamma(k, &u, kk, &0);
            let rhs = imp.gamma(k, &inner, kk, &(0, 0));
            (lhs != rhs)
                .then(|| format!("(k{k}, {u:?}): Pδ∘γ gives {lhs:?} but γ∘Kγ∘δ gives {rhs:?}"))
        }),
        "box-naturality" => {
            let ny = rng.range(1, 4);
            let f: Vec<Vec<usize>> = (0..kk)
                .map(|_| (0..n).map(|_| rng.below(ny)).collect())
                .collect();
            let pred: Vec<bool> = (0..kk * ny).map(|_| rng.coin()).collect();
            let on_y = |k: usize, y: usize| pred[k * ny + y];
            let on_x = |k: usize, x: usize| pred[k * ny + f[k][x]];
            (0..kk).find_map(|k| {
                (0..1u64 << n).find_map(|v| {
                    let image = members(v).fold(0, |acc, x| acc | 1 << f[k][x]);
                    let lhs = imp.lambda(&on_x, k, v);
                    let rhs = imp.lambda(&on_y, k, image);
                    (lhs != rhs).then(|| {
                        format!("f = {f:?}, (k{k}, {v:#b}): λ∘f* = {lhs}, (F̄f)*∘λ = {rhs}")
                    })
                })
            })
        }
        "box-meet" => {
            let c = random_cts_sized(rng, kk, n);
            first_failure(|| {
                let mut u1 = fixedbitset::FixedBitSet::with_capacity(c.points());
                let mut u2 = u1.clone();
                for i in 0..c.points() {
                    u1.set(i, rng.coin());
                    u2.set(i, rng.coin());
                }
                let boxed = |u: &fixedbitset::FixedBitSet| {
                    if imp.on("box-meet") {
                        let mut out = fixedbitset::FixedBitSet::with_capacity(c.points());
                        for k in 0..kk {
                            for x in 0..n {
                                out.set(
                                    k * n + x,
                                    members(c.successors(k, x)).any(|y| u.contains(k * n + y)),
                                );
                            }
                        }
                        out
                    } else {
                        mod_cts_box(&c, u)
                    }
                };
                let lhs = boxed(&(&u1 & &u2));
                let rhs = &boxed(&u1) & &boxed(&u2);
                (lhs != rhs)
                    .then(|| format!("U₁ = {u1}, U₂ = {u2}: □(U₁∩U₂) = {lhs}, □U₁∩□U₂ = {rhs}"))
            })
        }
        "box-recipe" => {
            let c = random_cts_sized(rng, kk, n);
            first_failure(|| {
                let mut u = fixedbitset::FixedBitSet::with_capacity(c.points());
                for i in 0..c.points() {
                    u.set(i, rng.coin());
                }
                let derived = if imp.on("box-recipe") {
                    let mut out = fixedbitset::FixedBitSet::with_capacity(c.points());
                    for k in 0..kk {
                        for x in 0..n {
                            out.set(
                                k * n + x,
                                members(c.successors(k, x)).all(|y| u.contains(y)),
                            );
                        }
                    }
                    out
                } else {
                    mod_cts_box(&c, &u)
                };
                (0..kk).find_map(|k| {
                    (0..n).find_map(|x| {
                        let recipe = gamma_cts(k, c.successors(k, x))
                            .iter()
                            .all(|&(j, y)| u.contains(j * n + y));
                        (recipe != derived.contains(k * n + x)).then(|| {
                            format!(
                                "U = {u}, (k{k}, x{x}): derived {}, recipe {recipe}",
                                derived.contains(k * n + x)
                            )
                        })
                    })
                })
            })
        }
        "relation-naturality" => {
            let ny = rng.range(1, 4);
            let f: Vec<Vec<usize>> = (0..kk)
                .map(|_| (0..n).map(|_| rng.below(ny)).collect())
                .collect();
            let r = random_condrel(rng, ny);
            let pulled = CondRel::from_fn(kk, n, |k, x, y| r.contains(k, f[k][x], f[k][y]));
            first_failure(|| {
                let k = rng.below(kk);
                let (u, v) = (rng.mask(n), rng.mask(n));
                let image = |w: Mask| members(w).fold(0, |acc, x| acc | 1 << f[k][x]);
                let lhs = imp.rel_lift(&pulled, k, u, v);
                let rhs = imp.rel_lift(&r, k, image(u), image(v));
                (lhs != rhs).then(|| {
                    format!("f = {f:?}, (k{k}, {u:#b}, {v:#b}): λ̄∘f* = {lhs}, (F̄f)*∘λ̄ = {rhs}")
                })
            })
        }
        "relation-monotonicity" => {
            let r1 = random_condrel(rng, n);
            let extra = random_condrel(rng, n);
            let r2 = CondRel::from_fn(kk, n, |k, x, y| {
                r1.contains(k, x, y) || extra.contains(k, x, y)
            });
            first_failure(|| {
                let k = rng.below(kk);
                let (u, v) = (rng.mask(n), rng.mask(n));
                let small = imp.rel_lift(&r1, k, u, v);
                let large = imp.rel_lift(&r2, k, u, v);
                (small && !large)
                    .then(|| format!("(k{k}, {u:#b}, {v:#b}) in λ̄R₁ but not in λ̄R₂ ⊇ λ̄R₁"))
            })
        }
        "relation-equality" => {
            let id = CondRel::identity(kk, n);
            first_failure(|| {
                let k = rng.below(kk);
                let u = rng.mask(n);
                let v = if rng.coin() { u } else { u ^ 1 << rng.below(n) };
                let lhs = imp.rel_lift(&id, k, u, v);
                (lhs != (u == v)).then(|| format!("(k{k}, {u:#b}, {v:#b}): λ̄(≡) = {lhs}"))
            })
        }
        "single-condition" => {
            let r = random_condrel(rng, n);
            let slice: &BitRel = r.slice(0);
            first_failure(|| {
                let (u, v) = (rng.mask(n), rng.mask(n));
                let ours = imp.rel_lift(&r, 0, u, v);
                // classic Egli–Milner lifting on the slice relation
                let pairs: Vec<(usize, usize)> = slice.pairs().collect();
                let covers = |from: Mask, to: Mask, flip: bool| {
                    members(from).all(|a| {
                        pairs.iter().any(|&(p, q)| {
                            let (s, t) = if flip { (q, p) } else { (p, q) };
                            s == a && to >> t & 1 == 1
                        })
                    })
                };
                let classic = covers(u, v, false) && covers(v, u, true);
                (ours != classic)
                    .then(|| format!("({u:#b}, {v:#b}): CTS lifting {ours}, Egli–Milner {classic}"))
            })
        }
        _ => unreachable!("unknown CTS law {law}"),
    }
}

// -------------------------------------------------------------- Moore ----

struct MooreImpl {
    mutation: Option<&'static str>,
}

/// An element `(s, φ)` of `S × (P X)^A`.
type MooreElem = (usize, Vec<Mask>);

impl MooreImpl {
    fn on(&self, law: &str) -> bool {
        self.mutation == Some(law)
    }

    fn lambda(&self, kind: Option<usize>, s: usize, e: &MooreElem, pred: &[bool]) -> bool {
        let base = match kind {
            Some(_) if self.on("predicate-meet") => e.1.iter().any(|&u| pred[u as usize]),
            Some(a) => pred[e.1[a] as usize],
            None => e.0 == s,
        };
        base || (self.on("predicate-naturality") && kind.is_some() && e.1[0] & 1 == 1)
    }

    fn rel_lift(&self, r: &BitRel, e: &MooreElem, f: &MooreElem) -> bool {
        let related = |a: usize| r.contains(e.1[a] as usize, f.1[a] as usize);
        let out_ok = e.0 == f.0 || self.on("relation-equality");
        let acts = if self.on("relation-intersection") {
            (0..e.1.len()).any(related)
        } else {
            (0..e.1.len()).all(related)
        };
        (out_ok && acts) || (self.on("relation-naturality") && e.1[0] & f.1[0] & 1 == 1)
    }
}

fn random_lattice(rng: &mut SplitMix64) -> Semilattice {
    let generators: Vec<u64> = (0..rng.range(1, 3)).map(|_| rng.mask(3)).collect();
    Semilattice::generated_by_sets(&generators, |v| format!("{v:03b}")).0
}

fn moore_law(law: &str, rng: &mut SplitMix64, mutated: bool) -> Option<String> {
    let imp = MooreImpl {
        mutation: mutated.then(|| *Family::Moore.laws().iter().find(|l| **l == law).unwrap()),
    };
    let n = rng.range(1, 4);
    let m = rng.range(1, 2);
    let lattice = random_lattice(rng);
    let elem = |rng: &mut SplitMix64, states: usize| -> MooreElem {
        (
            rng.below(lattice.len()),
            (0..m).map(|_| rng.mask(states)).collect(),
        )
    };
    match law {
        "predicate-naturality" => {
            let k = rng.range(1, 4);
            let f: Vec<Mask> = (0..n).map(|_| rng.mask(k)).collect();
            let pred = random_pred(rng, 1 << k);
            let pulled: Vec<bool> = (0..1u64 << n)
                .map(|u| pred[kleisli_image(&f, u) as usize])
                .collect();
            first_failure(|| {
                let e = elem(rng, n);
                let kind = if rng.below(3) == 0 {
                    None
                } else {
                    Some(rng.below(m))
                };
                let s = rng.below(lattice.len());
                let pushed = (e.0, e.1.iter().map(|&u| kleisli_image(&f, u)).collect());
                let lhs = imp.lambda(kind, s, &e, &pulled);
                let rhs = imp.lambda(kind, s, &pushed, &pred);
                (lhs != rhs).then(|| format!("f = {f:?}, modality {kind:?}, (s,φ) = {e:?}: λ∘h* = {lhs}, (Fh)*∘λ = {rhs}"))
            })
        }
        "predicate-meet" => {
            let p1 = random_pred(rng, 1 << n);
            let p2 = random_pred(rng, 1 << n);
            let both: Vec<bool> = p1.iter().zip(&p2).map(|(a, b)| *a && *b).collect();
            first_failure(|| {
                let e = elem(rng, n);
                let a = rng.below(m);
                let lhs = imp.lambda(Some(a), 0, &e, &both);
                let rhs = imp.lambda(Some(a), 0, &e, &p1) && imp.lambda(Some(a), 0, &e, &p2);
                (lhs != rhs).then(|| {
                    format!("(s,φ) = {e:?}, action {a}: λ(U₁∩U₂) = {lhs}, λU₁∩λU₂ = {rhs}")
                })
            })
        }
        "relation-naturality" => {
            let k = rng.range(1, 4);
            let f: Vec<Mask> = (0..n).map(|_| rng.mask(k)).collect();
            let r = random_rel(rng, 1 << k);
            let pulled = BitRel::from_fn(1 << n, |u, v| {
                r.contains(
                    kleisli_image(&f, u as Mask) as usize,
                    kleisli_image(&f, v as Mask) as usize,
                )
            });
            first_failure(|| {
                let (e, g) = (elem(rng, n), elem(rng, n));
                let push = |x: &MooreElem| -> MooreElem {
                    (x.0, x.1.iter().map(|&u| kleisli_image(&f, u)).collect())
                };
                let lhs = imp.rel_lift(&pulled, &e, &g);
                let rhs = imp.rel_lift(&r, &push(&e), &push(&g));
                (lhs != rhs)
                    .then(|| format!("f = {f:?}, {e:?} vs {g:?}: λ̄∘h* = {lhs}, (Fh)*∘λ̄ = {rhs}"))
            })
        }
        "relation-intersection" => {
            let r1 = random_rel(rng, 1 << n);
            let r2 = random_rel(rng, 1 << n);
            let both = r1.intersection(&r2);
            first_failure(|| {
                let e = elem(rng, n);
                let g = (e.0, (0..m).map(|_| rng.mask(n)).collect());
                let lhs = imp.rel_lift(&both, &e, &g);
                let rhs = imp.rel_lift(&r1, &e, &g) && imp.rel_lift(&r2, &e, &g);
                (lhs != rhs).then(|| format!("{e:?} vs {g:?}: λ̄(R₁∩R₂) = {lhs}, λ̄R₁∩λ̄R₂ = {rhs}"))
            })
        }
        "relation-equality" => {
            let id = BitRel::identity(1 << n);
            first_failure(|| {
                let e = elem(rng, n);
                let g = match rng.below(3) {
                    0 => e.clone(),
                    1 => (rng.below(lattice.len()), e.1.clone()),
                    _ => {
                        let mut phi = e.1.clone();
                        let a = rng.below(m);
                        phi[a] ^= 1 << rng.below(n);
                        (e.0, phi)
                    }
                };
                let lhs = imp.rel_lift(&id, &e, &g);
                (lhs != (e == g)).then(|| format!("{e:?} vs {g:?}: λ̄(≡) = {lhs}"))
            })
        }
        "determinization-join" => {
            let transitions: Vec<(usize, usize, usize)> = (0..n)
                .flat_map(|x| (0..m).flat_map(move |a| (0..n).map(move |y| (x, a, y))))
                .filter(|_| rng.coin())
                .collect();
            let lts = Lts::new(
                crate::kernel::Carrier::numbered("x", n),
                crate::kernel::Carrier::numbered("a", m),
                transitions,
            )
            .expect("in range");
            let outputs = (0..n).map(|_| rng.below(lattice.len())).collect();
            let machine = OutputLts::new(lts, lattice.clone(), outputs).expect("valid outputs");
            let out = |u: Mask| {
                if imp.on("determinization-join") {
                    members(u)
                        .next()
                        .map_or(lattice.bottom(), |x| machine.output(x))
                } else {
                    machine.subset_output(u)
                }
            };
            if out(0) != lattice.bottom() || (0..m).any(|a| machine.lts().post(0, a) != 0) {
                return Some("∅ is not mapped to the bottom element".into());
            }
            first_failure(|| {
                let (u, v) = (rng.mask(n), rng.mask(n));
                let joined = out(u | v);
                let separately = lattice.join(out(u), out(v));
                if joined != separately {
                    return Some(format!(
                        "o′({u:#b} ∪ {v:#b}) = {} but o′ ∨ o′ = {}",
                        lattice.label(joined),
                        lattice.label(separately)
                    ));
                }
                (0..m).find_map(|a| {
                    let l = machine.lts();
                    (l.post(u | v, a) != l.post(u, a) | l.post(v, a))
                        .then(|| format!("transition under action {a} is not a join homomorphism at {u:#b}, {v:#b}"))
                })
            })
        }
        _ => unreachable!("unknown Moore law {law}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_laws_pass_unmutated() {
        for family in [Family::Nda, Family::Lwa, Family::Cts, Family::Moore] {
            let report = check_lifting_laws(family, 40, 7, None).unwrap();
            for l in &report.laws {
                assert!(l.passed, "{} {}: {:?}", family.name(), l.law, l.failures);
            }
        }
    }

    #[test]
    fn every_mutation_is_caught() {
        for family in [Family::Nda, Family::Lwa, Family::Cts, Family::Moore] {
            for &law in family.laws() {
                let report = check_lifting_laws(family, 100, 7, Some(law)).unwrap();
                let target = report.law(law).unwrap();
                assert!(
                    !target.passed,
                    "{} mutation {law} went unnoticed",
                    family.name()
                );
                assert!(!target.failures.is_empty());
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = check_lifting_laws(Family::Lwa, 10, 99, None).unwrap();
        let b = check_lifting_laws(Family::Lwa, 10, 99, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_mutation_rejected() {
        assert!(check_lifting_laws(Family::Nda, 1, 0, Some("box-meet")).is_err());
        assert!(check_lifting_laws(Family::Nda, 0, 0, None).is_err());
    }
}
