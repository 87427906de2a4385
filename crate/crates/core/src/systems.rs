//! The four system families and their determinisations.
//!
//! * [`Nda`]: nondeterministic automata, `X → P(A×X + 1)`.
//! * [`Lwa`]: linear weighted automata over ℚ, `X → M(A×X + 1)`.
//! * [`Cts`]: conditional transition systems, `K×X → P(X)`.
//! * [`OutputLts`]: labelled transition systems with outputs in a finite
//!   join-semilattice, determinised into generalised Moore machines.
//!
//! Constructors validate every structural invariant and report all problems
//! at once as [`Error::InvalidSystem`] diagnostics that name the offending
//! labels or indices.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::kernel::carrier::MAX_MASK_CARRIER as MAX_MASK;
use crate::kernel::rational::{dot, row_times_matrix, QVector, Rational};
use crate::kernel::{check_mask, members, Carrier, Mask, Semilattice, DEFAULT_POWERSET_CAP};

fn result_of(diagnostics: Vec<String>) -> Result<()> {
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSystem(diagnostics))
    }
}

fn check_mask_carrier(what: &str, c: &Carrier, out: &mut Vec<String>) {
    if c.len() > MAX_MASK {
        out.push(format!(
            "{what} has {} elements; at most {MAX_MASK} are supported",
            c.len()
        ));
    }
}

/// A nondeterministic automaton with termination: `x ↓` iff `x` is accepting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nda {
    states: Carrier,
    alphabet: Carrier,
    transitions: Vec<(usize, usize, usize)>,
    accepting: Mask,
    succ: Vec<Vec<Mask>>,
}

impl Nda {
    /// Transitions are `(from, action, to)` index triples.
    pub fn new(
        states: Carrier,
        alphabet: Carrier,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut transitions: Vec<_> = transitions.into_iter().collect();
        let accepting: Vec<usize> = accepting.into_iter().collect();
        let mut diags = Vec::new();
        check_mask_carrier("state set", &states, &mut diags);
        let (n, m) = (states.len(), alphabet.len());
        for &(x, a, y) in &transitions {
            if x >= n {
                diags.push(format!(
                    "transition source index {x} is out of range ({n} states)"
                ));
            }
            if a >= m {
                diags.push(format!(
                    "transition action index {a} is out of range ({m} actions)"
                ));
            }
            if y >= n {
                let from = states.names().get(x).map_or("?", String::as_str);
                diags.push(format!(
                    "successor index {y} of `{from}` is out of range ({n} states)"
                ));
            }
        }
        for &x in &accepting {
            if x >= n {
                diags.push(format!(
                    "accepting state index {x} is out of range ({n} states)"
                ));
            }
        }
        result_of(diags)?;
        transitions.sort_unstable();
        transitions.dedup();
        let mut succ = vec![vec![0; m]; n];
        for &(x, a, y) in &transitions {
            succ[x][a] |= 1 << y;
        }
        let accepting = accepting.iter().fold(0, |acc, &x| acc | 1 << x);
        Ok(Nda {
            states,
            alphabet,
            transitions,
            accepting,
            succ,
        })
    }

    pub fn states(&self) -> &Carrier {
        &self.states
    }

    pub fn alphabet(&self) -> &Carrier {
        &self.alphabet
    }

    /// Sorted, deduplicated `(from, action, to)` triples.
    pub fn transitions(&self) -> &[(usize, usize, usize)] {
        &self.transitions
    }

    pub fn accepting(&self) -> Mask {
        self.accepting
    }

    pub fn is_accepting(&self, x: usize) -> bool {
        self.accepting >> x & 1 == 1
    }

    pub fn successors(&self, x: usize, a: usize) -> Mask {
        self.succ[x][a]
    }

    /// `U_a = { x' | ∃x ∈ U. x →a x' }`.
    pub fn post(&self, u: Mask, a: usize) -> Mask {
        members(u).fold(0, |acc, x| acc | self.succ[x][a])
    }

    /// `U ↓` iff some member of `U` accepts.
    pub fn accepts(&self, u: Mask) -> bool {
        u & self.accepting != 0
    }

    /// Re-checks the structural invariants; always empty for a constructed value.
    pub fn validate(&self) -> Vec<String> {
        match Nda::new(
            self.states.clone(),
            self.alphabet.clone(),
            self.transitions.iter().copied(),
            members(self.accepting),
        ) {
            Ok(_) => Vec::new(),
            Err(Error::InvalidSystem(d)) => d,
            Err(e) => vec![e.to_string()],
        }
    }
}

/// A linear weighted automaton: output vector `o` with `o(x) = α(x)(•)` and
/// one matrix per action with `M_a(x, x') = α(x)(a, x')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lwa {
    states: Carrier,
    alphabet: Carrier,
    output: QVector,
    matrices: Vec<Vec<QVector>>,
}

impl Lwa {
    pub fn new(
        states: Carrier,
        alphabet: Carrier,
        output: QVector,
        matrices: Vec<Vec<QVector>>,
    ) -> Result<Self> {
        let n = states.len();
        let mut diags = Vec::new();
        if output.len() != n {
            diags.push(format!(
                "output vector has length {}, expected {n}",
                output.len()
            ));
        }
        if matrices.len() != alphabet.len() {
            diags.push(format!(
                "{} matrices given for {} actions",
                matrices.len(),
                alphabet.len()
            ));
        }
        for (a, m) in matrices.iter().enumerate() {
            let name = alphabet.names().get(a).map_or("?", String::as_str);
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                diags.push(format!("matrix for action `{name}` is not {n}×{n}"));
            }
        }
        result_of(diags)?;
        Ok(Lwa {
            states,
            alphabet,
            output,
            matrices,
        })
    }

    pub fn states(&self) -> &Carrier {
        &self.states
    }

    pub fn alphabet(&self) -> &Carrier {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn output_vector(&self) -> &[Rational] {
        &self.output
    }

    pub fn matrix(&self, a: usize) -> &[QVector] {
        &self.matrices[a]
    }

    pub fn matrices(&self) -> &[Vec<QVector>] {
        &self.matrices
    }

    fn check_vector(&self, p: &[Rational]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }

    /// One determinised step, `p ↦ p·M_a`.
    pub fn step(&self, p: &[Rational], a: usize) -> Result<QVector> {
        self.check_vector(p)?;
        let m = self.matrices.get(a).ok_or(Error::UnknownAction(a))?;
        Ok(row_times_matrix(p, m))
    }

    /// Termination weight of a vector, `p·o`.
    pub fn output(&self, p: &[Rational]) -> Result<Rational> {
        self.check_vector(p)?;
        Ok(dot(p, &self.output))
    }

    pub fn validate(&self) -> Vec<String> {
        match Lwa::new(
            self.states.clone(),
            self.alphabet.clone(),
            self.output.clone(),
            self.matrices.clone(),
        ) {
            Ok(_) => Vec::new(),
            Err(Error::InvalidSystem(d)) => d,
            Err(e) => vec![e.to_string()],
        }
    }
}

/// A conditional transition system without upgrades or action labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cts {
    conditions: Carrier,
    states: Carrier,
    succ: Vec<Vec<Mask>>,
}

impl Cts {
    /// Transitions are `(condition, from, to)` index triples.
    pub fn new(
        conditions: Carrier,
        states: Carrier,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let (k, n) = (conditions.len(), states.len());
        let mut diags = Vec::new();
        check_mask_carrier("state set", &states, &mut diags);
        let transitions: Vec<_> = transitions.into_iter().collect();
        for &(c, x, y) in &transitions {
            if c >= k {
                diags.push(format!(
                    "condition index {c} is out of range ({k} conditions)"
                ));
            }
            if x >= n || y >= n {
                diags.push(format!("transition {x} → {y} is out of range ({n} states)"));
            }
        }
        result_of(diags)?;
        let mut succ = vec![vec![0; n]; k];
        for (c, x, y) in transitions {
            succ[c][x] |= 1 << y;
        }
        Ok(Cts {
            conditions,
            states,
            succ,
        })
    }

    pub fn conditions(&self) -> &Carrier {
        &self.conditions
    }

    pub fn states(&self) -> &Carrier {
        &self.states
    }

    /// `δ(k, x)`.
    pub fn successors(&self, k: usize, x: usize) -> Mask {
        self.succ[k][x]
    }

    /// Sorted `(condition, from, to)` triples.
    pub fn transitions(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (k, row) in self.succ.iter().enumerate() {
            for (x, &m) in row.iter().enumerate() {
                out.extend(members(m).map(|y| (k, x, y)));
            }
        }
        out
    }

    /// Index of `(k, x)` in the flattened carrier `K × X`.
    pub fn point(&self, k: usize, x: usize) -> usize {
        k * self.states.len() + x
    }

    pub fn points(&self) -> usize {
        self.conditions.len() * self.states.len()
    }

    pub fn validate(&self) -> Vec<String> {
        match Cts::new(
            self.conditions.clone(),
            self.states.clone(),
            self.transitions(),
        ) {
            Ok(_) => Vec::new(),
            Err(Error::InvalidSystem(d)) => d,
            Err(e) => vec![e.to_string()],
        }
    }
}

/// An unlabelled-output LTS `X → (P X)^A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    states: Carrier,
    alphabet: Carrier,
    succ: Vec<Vec<Mask>>,
}

impl Lts {
    pub fn new(
        states: Carrier,
        alphabet: Carrier,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let (n, m) = (states.len(), alphabet.len());
        let mut diags = Vec::new();
        check_mask_carrier("state set", &states, &mut diags);
        check_mask_carrier("alphabet", &alphabet, &mut diags);
        let transitions: Vec<_> = transitions.into_iter().collect();
        for &(x, a, y) in &transitions {
            if x >= n || y >= n {
                diags.push(format!("transition {x} → {y} is out of range ({n} states)"));
            }
            if a >= m {
                diags.push(format!(
                    "transition action index {a} is out of range ({m} actions)"
                ));
            }
        }
        result_of(diags)?;
        let mut succ = vec![vec![0; m]; n];
        for (x, a, y) in transitions {
            succ[x][a] |= 1 << y;
        }
        Ok(Lts {
            states,
            alphabet,
            succ,
        })
    }

    pub fn states(&self) -> &Carrier {
        &self.states
    }

    pub fn alphabet(&self) -> &Carrier {
        &self.alphabet
    }

    pub fn successors(&self, x: usize, a: usize) -> Mask {
        self.succ[x][a]
    }

    pub fn post(&self, u: Mask, a: usize) -> Mask {
        members(u).fold(0, |acc, x| acc | self.succ[x][a])
    }

    /// Actions with at least one successor, as a mask over the alphabet.
    pub fn enabled(&self, x: usize) -> Mask {
        self.succ[x]
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .fold(0, |acc, (a, _)| acc | 1 << a)
    }

    pub fn transitions(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (x, row) in self.succ.iter().enumerate() {
            for (a, &m) in row.iter().enumerate() {
                out.extend(members(m).map(|y| (x, a, y)));
            }
        }
        out
    }
}

/// Linear-time semantics obtained by choosing the output map of an LTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MooreSemantics {
    /// `S = 2`, `o ≡ 1`.
    Trace,
    /// `S = P P A`, `o(x)` = the refusal sets of `x`.
    Failure,
    /// `S = P P A`, `o(x) = { enabled(x) }`.
    Ready,
}

impl MooreSemantics {
    pub fn name(self) -> &'static str {
        match self {
            MooreSemantics::Trace => "trace",
            MooreSemantics::Failure => "failure",
            MooreSemantics::Ready => "ready",
        }
    }
}

impl std::str::FromStr for MooreSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(MooreSemantics::Trace),
            "failure" => Ok(MooreSemantics::Failure),
            "ready" => Ok(MooreSemantics::Ready),
            other => Err(Error::Parse(format!(
                "unknown semantics `{other}` (expected trace, failure or ready)"
            ))),
        }
    }
}

/// Largest alphabet for which sets of action sets fit a 64-bit mask.
pub const MAX_REFUSAL_ALPHABET: usize = 6;

/// Refusal sets of `x`: every `Z ⊆ A` with `Z ∩ enabled(x) = ∅`, returned as
/// a mask over the subsets of `A` (bit `Z` set iff `Z` is refused).
pub fn refusal_output(lts: &Lts, x: usize) -> u64 {
    let enabled = lts.enabled(x);
    subsets_of(lts.alphabet().len())
        .filter(|z| z & enabled == 0)
        .fold(0, |acc, z| acc | 1 << z)
}

/// `{ enabled(x) }` as a mask over the subsets of `A`.
pub fn ready_output(lts: &Lts, x: usize) -> u64 {
    1 << lts.enabled(x)
}

fn subsets_of(n: usize) -> impl Iterator<Item = u64> {
    0..(1u64 << n)
}

/// Renders a set of action sets such as `{{},{b}}`.
pub fn format_action_sets(alphabet: &Carrier, sets: u64) -> String {
    let parts: Vec<String> = members(sets)
        .map(|z| alphabet.format_subset(z as Mask))
        .collect();
    format!("{{{}}}", parts.join(","))
}

/// An LTS with each state labelled by an element of a finite semilattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLts {
    lts: Lts,
    lattice: Semilattice,
    outputs: Vec<usize>,
}

impl OutputLts {
    pub fn new(lts: Lts, lattice: Semilattice, outputs: Vec<usize>) -> Result<Self> {
        let mut diags = Vec::new();
        if outputs.len() != lts.states().len() {
            diags.push(format!(
                "{} outputs given for {} states",
                outputs.len(),
                lts.states().len()
            ));
        }
        for (x, &o) in outputs.iter().enumerate() {
            if o >= lattice.len() {
                let name = lts.states().names().get(x).map_or("?", String::as_str);
                diags.push(format!(
                    "output of `{name}` is not an element of the lattice"
                ));
            }
        }
        result_of(diags)?;
        Ok(OutputLts {
            lts,
            lattice,
            outputs,
        })
    }

    /// Derives the lattice and outputs for one of the linear-time semantics.
    pub fn with_semantics(lts: Lts, semantics: MooreSemantics) -> Result<Self> {
        match semantics {
            MooreSemantics::Trace => {
                let outputs = vec![1; lts.states().len()];
                OutputLts::new(lts, Semilattice::boolean(), outputs)
            }
            MooreSemantics::Failure | MooreSemantics::Ready => {
                if lts.alphabet().len() > MAX_REFUSAL_ALPHABET {
                    return Err(Error::CapExceeded {
                        size: lts.alphabet().len(),
                        cap: MAX_REFUSAL_ALPHABET,
                    });
                }
                let raw: Vec<u64> = (0..lts.states().len())
                    .map(|x| match semantics {
                        MooreSemantics::Failure => refusal_output(&lts, x),
                        _ => ready_output(&lts, x),
                    })
                    .collect();
                let alphabet = lts.alphabet().clone();
                let (lattice, values) =
                    Semilattice::generated_by_sets(&raw, |v| format_action_sets(&alphabet, v));
                let outputs = raw
                    .iter()
                    .map(|v| values.binary_search(v).expect("generator is an element"))
                    .collect();
                OutputLts::new(lts, lattice, outputs)
            }
        }
    }

    pub fn lts(&self) -> &Lts {
        &self.lts
    }

    pub fn lattice(&self) -> &Semilattice {
        &self.lattice
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn output(&self, x: usize) -> usize {
        self.outputs[x]
    }

    /// `o'(U) = ⋁_{x∈U} o(x)`, the bottom element for `U = ∅`.
    pub fn subset_output(&self, u: Mask) -> usize {
        self.lattice.join_all(members(u).map(|x| self.outputs[x]))
    }

    pub fn validate(&self) -> Vec<String> {
        let mut d = crate::kernel::semilattice::law_diagnostics(
            self.lattice.labels(),
            self.lattice.join_table(),
            self.lattice.bottom(),
        );
        if let Err(Error::InvalidSystem(more)) =
            OutputLts::new(self.lts.clone(), self.lattice.clone(), self.outputs.clone())
        {
            d.extend(more);
        }
        d
    }
}

/// The reachable part of a subset construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminizedMachine<O> {
    subset_states: Vec<Mask>,
    trans: Vec<Vec<usize>>,
    out: Vec<O>,
    base_size: usize,
}

impl<O> DeterminizedMachine<O> {
    /// Reachable subsets, sorted by mask value.
    pub fn subset_states(&self) -> &[Mask] {
        &self.subset_states
    }

    pub fn len(&self) -> usize {
        self.subset_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset_states.is_empty()
    }

    pub fn actions(&self) -> usize {
        self.trans.first().map_or(0, Vec::len)
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn mask(&self, i: usize) -> Mask {
        self.subset_states[i]
    }

    pub fn index_of(&self, mask: Mask) -> Option<usize> {
        self.subset_states.binary_search(&mask).ok()
    }

    /// Index of `U_a` for the state at index `i`.
    pub fn next(&self, i: usize, a: usize) -> usize {
        self.trans[i][a]
    }

    pub fn output(&self, i: usize) -> &O {
        &self.out[i]
    }

    /// Index reached from `i` by reading `word`.
    pub fn run(&self, i: usize, word: &[usize]) -> usize {
        word.iter().fold(i, |s, &a| self.next(s, a))
    }
}

fn determinize<O>(
    base_size: usize,
    actions: usize,
    initials: &[Mask],
    post: impl Fn(Mask, usize) -> Mask,
    out: impl Fn(Mask) -> O,
) -> Result<DeterminizedMachine<O>> {
    for &u in initials {
        check_mask(u, base_size)?;
    }
    let mut seeds = initials.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let mut seen: std::collections::BTreeSet<Mask> = seeds.iter().copied().collect();
    let mut queue: VecDeque<Mask> = seeds.into();
    let mut edges: Vec<(Mask, Vec<Mask>)> = Vec::new();
    while let Some(u) = queue.pop_front() {
        let targets: Vec<Mask> = (0..actions).map(|a| post(u, a)).collect();
        for &t in &targets {
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
        if seen.len() > 1 << DEFAULT_POWERSET_CAP {
            return Err(Error::CapExceeded {
                size: base_size,
                cap: DEFAULT_POWERSET_CAP,
            });
        }
        edges.push((u, targets));
    }
    let subset_states: Vec<Mask> = seen.into_iter().collect();
    edges.sort_unstable_by_key(|(u, _)| *u);
    let index = |m: Mask| subset_states.binary_search(&m).expect("reachable");
    let trans = edges
        .iter()
        .map(|(_, ts)| ts.iter().map(|&t| index(t)).collect())
        .collect();
    let out = subset_states.iter().map(|&u| out(u)).collect();
    Ok(DeterminizedMachine {
        subset_states,
        trans,
        out,
        base_size,
    })
}

/// Reachable subset automaton of an NDA from the given initial subsets.
pub fn forward_determinize(n: &Nda, initials: &[Mask]) -> Result<DeterminizedMachine<bool>> {
    determinize(
        n.states().len(),
        n.alphabet().len(),
        initials,
        |u, a| n.post(u, a),
        |u| n.accepts(u),
    )
}

/// Reachable generalised Moore machine; outputs are lattice element indices.
pub fn moore_determinize(m: &OutputLts, initials: &[Mask]) -> Result<DeterminizedMachine<usize>> {
    determinize(
        m.lts().states().len(),
        m.lts().alphabet().len(),
        initials,
        |u, a| m.lts().post(u, a),
        |u| m.subset_output(u),
    )
}
