//! Modal formulas, their semantics, theory maps and the adequacy and
//! expressivity checks.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::equivalence::{
    cts_conditional_bisim, lwa_equiv, lwa_trace, lwa_trace_oracle, moore_equiv, moore_pair_oracle,
    nda_language_equiv, nda_pair_oracle, CondRel, PairVerdict,
};
use crate::error::{Error, Result};
use crate::kernel::rational::unit_vector;
use crate::kernel::{check_mask, members, BitRel, Carrier, Mask, Rational};
use crate::liftings::mod_cts_box;
use crate::systems::{Cts, Lwa, Nda, OutputLts};

/// All words of length `0..=maxlen` over `0..alphabet_len`, shortest first and
/// lexicographically within a length.
pub fn words(alphabet_len: usize, maxlen: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = Some(Vec::new());
    std::iter::from_fn(move || {
        let word = current.take()?;
        current = next_word(&word, alphabet_len, maxlen);
        Some(word)
    })
}

fn next_word(word: &[usize], alphabet_len: usize, maxlen: usize) -> Option<Vec<usize>> {
    if alphabet_len == 0 {
        return None;
    }
    let mut next = word.to_vec();
    for i in (0..next.len()).rev() {
        if next[i] + 1 < alphabet_len {
            next[i] += 1;
            return Some(next);
        }
        next[i] = 0;
    }
    (word.len() < maxlen).then(|| vec![0; word.len() + 1])
}

/// What a word formula observes after reading its word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Observation {
    /// `↓`: the reached subset accepts.
    Accept,
    /// The output of the reached subset is this lattice element label.
    Output(String),
    /// The weight of the reached vector is this value.
    Weight(Rational),
}

/// `[w₁]…[wₙ]` followed by an observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordFormula {
    pub word: Vec<usize>,
    pub observation: Observation,
}

impl WordFormula {
    pub fn accepting(word: Vec<usize>) -> Self {
        WordFormula {
            word,
            observation: Observation::Accept,
        }
    }

    pub fn render(&self, alphabet: &Carrier) -> String {
        let mut out: String = self
            .word
            .iter()
            .map(|&a| format!("[{}]", alphabet.name(a)))
            .collect();
        match &self.observation {
            Observation::Accept => out.push('↓'),
            Observation::Output(label) => out.push_str(&format!("⟨{label}⟩")),
            Observation::Weight(r) => out.push_str(&format!("⟨{r}⟩")),
        }
        out
    }
}

/// Formulas over `{tt, ¬, ∧, □}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CtsFormula {
    Tt,
    Neg(Box<CtsFormula>),
    And(Box<CtsFormula>, Box<CtsFormula>),
    Box(Box<CtsFormula>),
}

impl CtsFormula {
    pub fn negate(f: CtsFormula) -> Self {
        CtsFormula::Neg(Box::new(f))
    }

    pub fn and(f: CtsFormula, g: CtsFormula) -> Self {
        CtsFormula::And(Box::new(f), Box::new(g))
    }

    pub fn boxed(f: CtsFormula) -> Self {
        CtsFormula::Box(Box::new(f))
    }

    /// `¬(¬f ∧ ¬g)`.
    pub fn or(f: CtsFormula, g: CtsFormula) -> Self {
        Self::negate(Self::and(Self::negate(f), Self::negate(g)))
    }

    /// Nesting depth of `□`.
    pub fn depth(&self) -> usize {
        match self {
            CtsFormula::Tt => 0,
            CtsFormula::Neg(f) => f.depth(),
            CtsFormula::And(f, g) => f.depth().max(g.depth()),
            CtsFormula::Box(f) => f.depth() + 1,
        }
    }

    /// Parses the rendered syntax; ASCII `~`/`!`, `&` and `[]` are accepted
    /// for `¬`, `∧` and `□`.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let f = parse_conj(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected `{}` in formula",
                tokens[pos]
            )));
        }
        Ok(f)
    }
}

impl fmt::Display for CtsFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtsFormula::Tt => write!(f, "tt"),
            CtsFormula::Neg(g) => write!(f, "¬{g}"),
            CtsFormula::And(g, h) => write!(f, "({g} ∧ {h})"),
            CtsFormula::Box(g) => write!(f, "□{g}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '¬' | '~' | '!' => tokens.push("¬".into()),
            '∧' | '&' => tokens.push("∧".into()),
            '□' => tokens.push("□".into()),
            '(' | ')' => tokens.push(c.to_string()),
            '[' if chars.peek() == Some(&']') => {
                chars.next();
                tokens.push("□".into());
            }
            't' if chars.peek() == Some(&'t') => {
                chars.next();
                tokens.push("tt".into());
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character `{other}` in formula"
                )))
            }
        }
    }
    Ok(tokens)
}

fn parse_conj(tokens: &[String], pos: &mut usize) -> Result<CtsFormula> {
    let mut f = parse_atom(tokens, pos)?;
    while tokens.get(*pos).map(String::as_str) == Some("∧") {
        *pos += 1;
        f = CtsFormula::and(f, parse_atom(tokens, pos)?);
    }
    Ok(f)
}

fn parse_atom(tokens: &[String], pos: &mut usize) -> Result<CtsFormula> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("formula ends unexpectedly".into()))?;
    *pos += 1;
    match tok.as_str() {
        "tt" => Ok(CtsFormula::Tt),
        "¬" => Ok(CtsFormula::negate(parse_atom(tokens, pos)?)),
        "□" => Ok(CtsFormula::boxed(parse_atom(tokens, pos)?)),
        "(" => {
            let f = parse_conj(tokens, pos)?;
            if tokens.get(*pos).map(String::as_str) != Some(")") {
                return Err(Error::Parse("missing `)` in formula".into()));
            }
            *pos += 1;
            Ok(f)
        }
        other => Err(Error::Parse(format!("unexpected `{other}` in formula"))),
    }
}

/// `U_w ↓`.
pub fn eval_word_nda(n: &Nda, u: Mask, word: &[usize]) -> Result<bool> {
    check_mask(u, n.states().len())?;
    let mut cur = u;
    for &a in word {
        if a >= n.alphabet().len() {
            return Err(Error::UnknownAction(a));
        }
        cur = n.post(cur, a);
    }
    Ok(n.accepts(cur))
}

/// The extension of `φ` in `K × X`, indexed by `k·|X| + x`.
pub fn eval_cts(c: &Cts, phi: &CtsFormula) -> FixedBitSet {
    match phi {
        CtsFormula::Tt => {
            let mut all = FixedBitSet::with_capacity(c.points());
            all.insert_range(..);
            all
        }
        CtsFormula::Neg(f) => {
            let mut s = eval_cts(c, f);
            s.toggle_range(..);
            s
        }
        CtsFormula::And(f, g) => &eval_cts(c, f) & &eval_cts(c, g),
        CtsFormula::Box(f) => mod_cts_box(c, &eval_cts(c, f)),
    }
}

/// `w ↦ [U_w ↓]` for every word up to `maxlen`.
pub fn theory_word_nda(n: &Nda, u: Mask, maxlen: usize) -> Result<Vec<(Vec<usize>, bool)>> {
    words(n.alphabet().len(), maxlen)
        .map(|w| Ok((w.clone(), eval_word_nda(n, u, &w)?)))
        .collect()
}

/// `w ↦ tr(p)(w)` for every word up to `maxlen`.
pub fn theory_word_lwa(
    l: &Lwa,
    p: &[Rational],
    maxlen: usize,
) -> Result<Vec<(Vec<usize>, Rational)>> {
    words(l.alphabet().len(), maxlen)
        .map(|w| Ok((w.clone(), lwa_trace(l, p, &w)?)))
        .collect()
}

/// `w ↦ o′(U_w)` (a lattice element) for every word up to `maxlen`.
pub fn theory_word_moore(
    m: &OutputLts,
    u: Mask,
    maxlen: usize,
) -> Result<Vec<(Vec<usize>, usize)>> {
    check_mask(u, m.lts().states().len())?;
    Ok(words(m.lts().alphabet().len(), maxlen)
        .map(|w| {
            let reached = w.iter().fold(u, |cur, &a| m.lts().post(cur, a));
            (w, m.subset_output(reached))
        })
        .collect())
}

/// A pair on which the behavioural and logical relations disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub left: String,
    pub right: String,
    /// Present when the pair is behaviourally equivalent yet separated.
    pub formula: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub family: String,
    /// Classes of the behavioural equivalence, as labels.
    pub behavioural: Vec<Vec<String>>,
    /// Classes of the logical equivalence, as labels.
    pub logical: Vec<Vec<String>>,
    pub adequate: bool,
    pub expressive: bool,
    pub counterexamples: Vec<Counterexample>,
    /// CTS only: formula depth used, equal to the gfp iteration count.
    pub depth: Option<usize>,
    /// CTS only: depth `d + 1` produced the same logical relation as `d`.
    pub saturated: Option<bool>,
    pub assumptions: Vec<String>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.adequate && self.expressive && self.saturated != Some(false)
    }
}

fn label_classes(rel: &BitRel, label: impl Fn(usize) -> String) -> Vec<Vec<String>> {
    rel.classes()
        .into_iter()
        .map(|block| block.into_iter().map(&label).collect())
        .collect()
}

/// Compares a behavioural relation against a logical one. `separate(i, j)`
/// returns a distinguishing formula, if any.
fn compare(
    behavioural: &BitRel,
    logical: &BitRel,
    label: &dyn Fn(usize) -> String,
    separate: &dyn Fn(usize, usize) -> Option<String>,
) -> (bool, bool, Vec<Counterexample>) {
    let mut counterexamples = Vec::new();
    let (mut adequate, mut expressive) = (true, true);
    let size = behavioural.size();
    for i in 0..size {
        for j in i + 1..size {
            let b = behavioural.contains(i, j);
            let l = logical.contains(i, j);
            if b && !l {
                adequate = false;
                counterexamples.push(Counterexample {
                    left: label(i),
                    right: label(j),
                    formula: separate(i, j),
                    note: "behaviourally equivalent but separated by a formula".into(),
                });
            } else if l && !b {
                expressive = false;
                counterexamples.push(Counterexample {
                    left: label(i),
                    right: label(j),
                    formula: None,
                    note: "behaviourally distinct but no formula separates them".into(),
                });
            }
        }
    }
    (adequate, expressive, counterexamples)
}

fn logical_from_verdicts(
    size: usize,
    verdict: &dyn Fn(usize, usize) -> Result<PairVerdict>,
) -> Result<BitRel> {
    let mut rel = BitRel::identity(size);
    for i in 0..size {
        for j in i + 1..size {
            if verdict(i, j)?.equivalent {
                rel.insert(i, j);
                rel.insert(j, i);
            }
        }
    }
    Ok(rel)
}

/// Language equivalence against word formulas on the subsets reachable from
/// `initials`. Logical equivalence is decided by a product search over pairs
/// of subsets, which is complete for all words.
pub fn adequacy_nda(n: &Nda, initials: &[Mask]) -> Result<EquivReport> {
    let eq = nda_language_equiv(n, initials)?;
    let d = &eq.machine;
    let label = |i: usize| n.states().format_subset(d.mask(i));
    let logical = logical_from_verdicts(d.len(), &|i, j| nda_pair_oracle(n, d.mask(i), d.mask(j)))?;
    let separate = |i: usize, j: usize| {
        nda_pair_oracle(n, d.mask(i), d.mask(j))
            .ok()
            .and_then(|v| v.witness)
            .map(|w| WordFormula::accepting(w).render(n.alphabet()))
    };
    let (adequate, expressive, counterexamples) =
        compare(&eq.relation, &logical, &label, &separate);
    Ok(EquivReport {
        family: "nda".into(),
        behavioural: label_classes(&eq.relation, label),
        logical: label_classes(&logical, label),
        adequate,
        expressive,
        counterexamples,
        depth: None,
        saturated: None,
        assumptions: Vec::new(),
    })
}

/// Moore equivalence against word formulas observing outputs.
pub fn adequacy_moore(
    m: &OutputLts,
    initials: &[Mask],
    assumptions: Vec<String>,
) -> Result<EquivReport> {
    let eq = moore_equiv(m, initials)?;
    let d = &eq.machine;
    let states = m.lts().states();
    let label = |i: usize| states.format_subset(d.mask(i));
    let logical =
        logical_from_verdicts(d.len(), &|i, j| moore_pair_oracle(m, d.mask(i), d.mask(j)))?;
    let separate = |i: usize, j: usize| {
        let w = moore_pair_oracle(m, d.mask(i), d.mask(j)).ok()?.witness?;
        let reached = w.iter().fold(d.mask(i), |cur, &a| m.lts().post(cur, a));
        let observation =
            Observation::Output(m.lattice().label(m.subset_output(reached)).to_string());
        Some(
            WordFormula {
                word: w,
                observation,
            }
            .render(m.lts().alphabet()),
        )
    };
    let (adequate, expressive, counterexamples) =
        compare(&eq.relation, &logical, &label, &separate);
    Ok(EquivReport {
        family: "moore".into(),
        behavioural: label_classes(&eq.relation, label),
        logical: label_classes(&logical, label),
        adequate,
        expressive,
        counterexamples,
        depth: None,
        saturated: None,
        assumptions,
    })
}

/// Weighted language equivalence of the states of `l` (as unit vectors)
/// against word formulas observing weights, with words up to length `|X|`.
pub fn adequacy_lwa(l: &Lwa) -> Result<EquivReport> {
    let n = l.dim();
    let unit = |x: usize| unit_vector(n, x);
    let mut behavioural = BitRel::identity(n);
    for x in 0..n {
        for y in x + 1..n {
            if lwa_equiv(l, &unit(x), &unit(y))? {
                behavioural.insert(x, y);
                behavioural.insert(y, x);
            }
        }
    }
    let logical = logical_from_verdicts(n, &|x, y| lwa_trace_oracle(l, &unit(x), &unit(y), n))?;
    let label = |x: usize| l.states().name(x).to_string();
    let separate = |x: usize, y: usize| {
        let w = lwa_trace_oracle(l, &unit(x), &unit(y), n).ok()?.witness?;
        let weight = lwa_trace(l, &unit(x), &w).ok()?;
        Some(
            WordFormula {
                word: w,
                observation: Observation::Weight(weight),
            }
            .render(l.alphabet()),
        )
    };
    let (adequate, expressive, counterexamples) =
        compare(&behavioural, &logical, &label, &separate);
    Ok(EquivReport {
        family: "lwa".into(),
        behavioural: label_classes(&behavioural, label),
        logical: label_classes(&logical, label),
        adequate,
        expressive,
        counterexamples,
        depth: None,
        saturated: None,
        assumptions: Vec::new(),
    })
}

/// Largest `|K|·|X|` accepted by the CTS formula enumeration.
pub const MAX_CTS_POINTS: usize = 64;
/// Largest `|X|` accepted by the CTS formula enumeration.
pub const MAX_CTS_STATES: usize = 10;

/// The Boolean algebra of formulas up to some `□`-depth, kept as its atoms:
/// a partition of `K × X` with one defining formula per block.
#[derive(Debug, Clone)]
struct Stratum {
    atoms: Vec<(u64, CtsFormula)>,
}

fn box_mask(c: &Cts, u: u64) -> u64 {
    let n = c.states().len();
    let mut out = 0;
    for k in 0..c.conditions().len() {
        for x in 0..n {
            if members(c.successors(k, x)).all(|y| u >> (k * n + y) & 1 == 1) {
                out |= 1 << (k * n + x);
            }
        }
    }
    out
}

impl Stratum {
    fn base(points: usize) -> Self {
        Stratum {
            atoms: vec![(crate::kernel::full_mask(points), CtsFormula::Tt)],
        }
    }

    /// Refines by `□φ` for every `φ` in the algebra of `self`.
    ///
    /// Membership of `(k, x)` in `□U` only depends on `U` under condition
    /// `k`, so per condition it suffices to range over unions of the atoms
    /// meeting that condition.
    fn next(&self, c: &Cts) -> Self {
        let n = c.states().len();
        let mut generators: BTreeMap<u64, CtsFormula> = BTreeMap::new();
        for k in 0..c.conditions().len() {
            let slice = crate::kernel::full_mask(n) << (k * n);
            let local: Vec<usize> = (0..self.atoms.len())
                .filter(|&i| self.atoms[i].0 & slice != 0)
                .collect();
            for choice in 0..1u64 << local.len() {
                let chosen: Vec<usize> = members(choice).map(|i| local[i]).collect();
                let union = chosen.iter().fold(0, |acc, &i| acc | self.atoms[i].0);
                generators.entry(box_mask(c, union)).or_insert_with(|| {
                    let inner = chosen
                        .iter()
                        .map(|&i| self.atoms[i].1.clone())
                        .reduce(CtsFormula::or)
                        .unwrap_or_else(|| CtsFormula::negate(CtsFormula::Tt));
                    CtsFormula::boxed(inner)
                });
            }
        }
        let mut atoms = self.atoms.clone();
        for (g, phi) in generators {
            let mut refined = Vec::new();
            for (block, psi) in atoms {
                let (inside, outside) = (block & g, block & !g);
                if inside == 0 || outside == 0 {
                    refined.push((block, psi));
                } else {
                    refined.push((inside, CtsFormula::and(psi.clone(), phi.clone())));
                    refined.push((
                        outside,
                        CtsFormula::and(psi, CtsFormula::negate(phi.clone())),
                    ));
                }
            }
            atoms = refined;
        }
        atoms.sort_by_key(|(m, _)| m.trailing_zeros());
        Stratum { atoms }
    }

    fn atom_of(&self, point: usize) -> usize {
        self.atoms
            .iter()
            .position(|(m, _)| m >> point & 1 == 1)
            .expect("atoms partition the points")
    }

    fn relation(&self, c: &Cts) -> CondRel {
        let n = c.states().len();
        CondRel::from_fn(c.conditions().len(), n, |k, x, y| {
            self.atom_of(k * n + x) == self.atom_of(k * n + y)
        })
    }
}

fn check_cts_caps(c: &Cts) -> Result<()> {
    if c.points() > MAX_CTS_POINTS {
        return Err(Error::CapExceeded {
            size: c.points(),
            cap: MAX_CTS_POINTS,
        });
    }
    if c.states().len() > MAX_CTS_STATES {
        return Err(Error::CapExceeded {
            size: c.states().len(),
            cap: MAX_CTS_STATES,
        });
    }
    Ok(())
}

/// The atoms of the formulas of depth at most `depth`: a partition of the
/// points `(k, x)` (bit `k·|X| + x`), each block with a formula defining it.
pub fn cts_depth_atoms(c: &Cts, depth: usize) -> Result<Vec<(Mask, CtsFormula)>> {
    check_cts_caps(c)?;
    let mut stratum = Stratum::base(c.points());
    for _ in 0..depth {
        stratum = stratum.next(c);
    }
    Ok(stratum.atoms)
}

/// Conditional bisimilarity against `{tt, ¬, ∧, □}` formulas up to depth `d`,
/// where `d` is the number of gfp iterations; depth `d + 1` is enumerated as
/// well to confirm nothing changes.
pub fn adequacy_cts(c: &Cts) -> Result<EquivReport> {
    check_cts_caps(c)?;
    let points = c.points();
    let fix = cts_conditional_bisim(c);
    let depth = fix.iterations;
    let mut stratum = Stratum::base(points);
    for _ in 0..depth {
        stratum = stratum.next(c);
    }
    let logical = stratum.relation(c);
    let saturated = stratum.next(c).relation(c) == logical;
    let n = c.states().len();
    let label = |k: usize, x: usize| format!("{}@{}", c.states().name(x), c.conditions().name(k));
    let mut counterexamples = Vec::new();
    let (mut adequate, mut expressive) = (true, true);
    let (mut behavioural_classes, mut logical_classes) = (Vec::new(), Vec::new());
    for k in 0..c.conditions().len() {
        let (b, l) = (fix.relation.slice(k), logical.slice(k));
        let lab = |x: usize| label(k, x);
        behavioural_classes.extend(label_classes(b, lab));
        logical_classes.extend(label_classes(l, lab));
        let separate = |x: usize, y: usize| {
            let atom = stratum.atom_of(k * n + x);
            (atom != stratum.atom_of(k * n + y)).then(|| stratum.atoms[atom].1.to_string())
        };
        let (a, e, mut cx) = compare(b, l, &lab, &separate);
        adequate &= a;
        expressive &= e;
        counterexamples.append(&mut cx);
    }
    Ok(EquivReport {
        family: "cts".into(),
        behavioural: behavioural_classes,
        logical: logical_classes,
        adequate,
        expressive,
        counterexamples,
        depth: Some(depth),
        saturated: Some(saturated),
        assumptions: vec!["formulas range over tt, ¬, ∧ and □".into()],
    })
}
