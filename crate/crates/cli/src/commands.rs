use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};

use coeq::equivalence::{
    cts_conditional_bisim, lwa_equiv, lwa_trace, lwa_trace_oracle, lwa_unobservable_subspace,
    moore_equiv, moore_pair_oracle, nda_language_equiv, nda_pair_oracle, CondRel,
};
use coeq::format::{MooreSystem, System};
use coeq::kernel::members;
use coeq::kernel::rational::{format_vector, parse_vector, unit_vector};
use coeq::liftings::laws::{check_lifting_laws, Family};
use coeq::logic::{
    adequacy_cts, adequacy_lwa, adequacy_moore, adequacy_nda, cts_depth_atoms, eval_cts,
    eval_word_nda, theory_word_lwa, theory_word_moore, theory_word_nda, CtsFormula, EquivReport,
    WordFormula,
};
use coeq::quotient::{
    backward_determinize, build_equalizer_automaton, cts_quotient, verify_homomorphism_rel,
};
use coeq::random::{random_cts, random_lts, random_lwa, random_nda};
use coeq::rng::SplitMix64;
use coeq::systems::{forward_determinize, moore_determinize, DeterminizedMachine};
use coeq::{BitRel, Carrier, Cts, Lwa, Mask, MooreSemantics, Nda, OutputLts, QVector};

/// A report and the exit code that goes with it.
pub struct Report {
    pub body: Value,
    pub code: u8,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report { body, code: 0 }
    }

    fn verdict(body: Value, passed: bool) -> Self {
        Report {
            body,
            code: if passed { 0 } else { 1 },
        }
    }
}

type CmdResult = Result<Report, String>;

fn err(e: coeq::Error) -> String {
    e.to_string()
}

/// Subsets are enumerated exhaustively up to this many states.
const ALL_SUBSETS_LIMIT: usize = 8;

/// Flags shared by every command that reads a system file.
#[derive(Debug, Args)]
pub struct SystemFlags {
    /// Expected kind of the system file: nda, lwa, cts or moore.
    #[arg(long)]
    pub kind: Option<String>,
    /// Output semantics for a moore system: trace, failure or ready.
    #[arg(long)]
    pub semantics: Option<String>,
}

fn load(path: &Path, flags: &SystemFlags) -> Result<System, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let system = System::from_json(&text).map_err(err)?;
    if let Some(kind) = &flags.kind {
        if kind != system.kind() {
            return Err(format!("expected a {kind} system, found {}", system.kind()));
        }
    }
    match (system, flags.semantics.as_deref()) {
        (System::Moore(m), Some(s)) => {
            let semantics: MooreSemantics = s.parse().map_err(err)?;
            let machine =
                OutputLts::with_semantics(m.machine.lts().clone(), semantics).map_err(err)?;
            Ok(System::Moore(MooreSystem {
                machine,
                semantics: Some(semantics),
            }))
        }
        (_, Some(_)) => Err("--semantics only applies to moore systems".into()),
        (system, None) => Ok(system),
    }
}

fn all_subsets(n: usize) -> Vec<Mask> {
    (0..1u64 << n).collect()
}

fn default_initials(n: usize) -> Vec<Mask> {
    if n <= ALL_SUBSETS_LIMIT {
        all_subsets(n)
    } else {
        (0..n).map(|x| 1 << x).collect()
    }
}

fn parse_subsets(carrier: &Carrier, texts: &[String]) -> Result<Vec<Mask>, String> {
    texts
        .iter()
        .map(|t| carrier.parse_subset(t).map_err(err))
        .collect()
}

fn word_labels(alphabet: &Carrier, word: &[usize]) -> Vec<String> {
    word.iter().map(|&a| alphabet.name(a).to_string()).collect()
}

fn word_key(alphabet: &Carrier, word: &[usize]) -> String {
    if word.is_empty() {
        "ε".into()
    } else {
        word.iter()
            .map(|&a| format!("[{}]", alphabet.name(a)))
            .collect()
    }
}

fn class_labels(classes: Vec<Vec<Mask>>, carrier: &Carrier) -> Vec<Vec<String>> {
    classes
        .into_iter()
        .map(|block| {
            block
                .into_iter()
                .map(|m| carrier.format_subset(m))
                .collect()
        })
        .collect()
}

fn merged(classes: &[Vec<String>]) -> Vec<Vec<String>> {
    classes.iter().filter(|c| c.len() > 1).cloned().collect()
}

fn refusal_assumption(semantics: Option<MooreSemantics>) -> Vec<String> {
    match semantics {
        Some(MooreSemantics::Failure) => {
            vec!["a state refuses Z ⊆ A iff none of the actions in Z is enabled".into()]
        }
        _ => Vec::new(),
    }
}

// -------------------------------------------------------------- equiv ----

#[derive(Debug, Args)]
pub struct EquivArgs {
    /// System description (JSON).
    pub file: PathBuf,
    /// Compare two states: subsets like "{x,y}" (nda, moore), vectors like
    /// "[1/2, 0]" or state labels (lwa), state labels (cts).
    #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"], conflicts_with = "all")]
    pub pair: Option<Vec<String>>,
    /// Print every equivalence class (the default).
    #[arg(long)]
    pub all: bool,
    #[command(flatten)]
    pub system: SystemFlags,
    /// Initial subsets for --all (default: every subset for small systems,
    /// otherwise the singletons).
    #[arg(long, num_args = 1..)]
    pub initials: Option<Vec<String>>,
}

pub fn equiv(args: &EquivArgs) -> CmdResult {
    let system = load(&args.file, &args.system)?;
    match (&system, &args.pair) {
        (System::Nda(n), Some(pair)) => equiv_nda_pair(n, &pair[0], &pair[1]),
        (System::Nda(n), None) => {
            let initials = initials_for(n.states(), &args.initials)?;
            let eq = nda_language_equiv(n, &initials).map_err(err)?;
            let classes = class_labels(eq.classes(), n.states());
            Ok(Report::ok(json!({
                "kind": "nda",
                "mode": "all",
                "classes": classes,
                "merged": merged(&classes),
                "iterations": eq.iterations,
            })))
        }
        (System::Moore(m), Some(pair)) => equiv_moore_pair(m, &pair[0], &pair[1]),
        (System::Moore(m), None) => {
            let states = m.machine.lts().states();
            let initials = initials_for(states, &args.initials)?;
            let eq = moore_equiv(&m.machine, &initials).map_err(err)?;
            let classes = class_labels(eq.classes(), states);
            Ok(Report::ok(json!({
                "kind": "moore",
                "mode": "all",
                "semantics": m.semantics.map(MooreSemantics::name),
                "classes": classes,
                "merged": merged(&classes),
                "iterations": eq.iterations,
                "assumptions": refusal_assumption(m.semantics),
            })))
        }
        (System::Lwa(l), Some(pair)) => equiv_lwa_pair(l, &pair[0], &pair[1]),
        (System::Lwa(l), None) => {
            let n = l.dim();
            let unobservable = lwa_unobservable_subspace(l);
            let mut rel = BitRel::identity(n);
            for x in 0..n {
                for y in 0..n {
                    if lwa_equiv(l, &unit_vector(n, x), &unit_vector(n, y)).map_err(err)? {
                        rel.insert(x, y);
                    }
                }
            }
            let classes: Vec<Vec<String>> = rel
                .classes()
                .into_iter()
                .map(|b| {
                    b.into_iter()
                        .map(|x| l.states().name(x).to_string())
                        .collect()
                })
                .collect();
            let basis: Vec<String> = unobservable
                .subspace
                .basis()
                .iter()
                .map(|v| format_vector(v))
                .collect();
            Ok(Report::ok(json!({
                "kind": "lwa",
                "mode": "all",
                "classes": classes,
                "merged": merged(&classes),
                "unobservable_basis": basis,
                "chain": unobservable.chain,
            })))
        }
        (System::Cts(c), Some(pair)) => {
            let x = c.states().require(&pair[0]).map_err(err)?;
            let y = c.states().require(&pair[1]).map_err(err)?;
            let fix = cts_conditional_bisim(c);
            let per: BTreeMap<String, bool> = (0..c.conditions().len())
                .map(|k| {
                    (
                        c.conditions().name(k).to_string(),
                        fix.relation.contains(k, x, y),
                    )
                })
                .collect();
            let all = per.values().all(|&b| b);
            Ok(Report::verdict(
                json!({
                    "kind": "cts",
                    "mode": "pair",
                    "left": pair[0],
                    "right": pair[1],
                    "per_condition": per,
                    "equivalent": all,
                    "iterations": fix.iterations,
                }),
                all,
            ))
        }
        (System::Cts(c), None) => {
            let fix = cts_conditional_bisim(c);
            Ok(Report::ok(json!({
                "kind": "cts",
                "mode": "all",
                "classes": cts_classes(c, &fix.relation),
                "iterations": fix.iterations,
            })))
        }
    }
}

fn initials_for(states: &Carrier, given: &Option<Vec<String>>) -> Result<Vec<Mask>, String> {
    match given {
        Some(texts) => parse_subsets(states, texts),
        None => Ok(default_initials(states.len())),
    }
}

fn cts_classes(c: &Cts, r: &CondRel) -> BTreeMap<String, Vec<Vec<String>>> {
    (0..c.conditions().len())
        .map(|k| {
            let blocks = r
                .slice(k)
                .classes()
                .into_iter()
                .map(|b| {
                    b.into_iter()
                        .map(|x| c.states().name(x).to_string())
                        .collect()
                })
                .collect();
            (c.conditions().name(k).to_string(), blocks)
        })
        .collect()
}

fn equiv_nda_pair(n: &Nda, left: &str, right: &str) -> CmdResult {
    let u = n.states().parse_subset(left).map_err(err)?;
    let v = n.states().parse_subset(right).map_err(err)?;
    let eq = nda_language_equiv(n, &[u, v]).map_err(err)?;
    let equivalent = eq.equivalent(u, v).expect("initials are reachable");
    let witness = nda_pair_oracle(n, u, v).map_err(err)?.witness;
    Ok(Report::verdict(
        json!({
            "kind": "nda",
            "mode": "pair",
            "left": n.states().format_subset(u),
            "right": n.states().format_subset(v),
            "equivalent": equivalent,
            "witness": witness.as_ref().map(|w| word_labels(n.alphabet(), w)),
            "formula": witness.map(|w| WordFormula::accepting(w).render(n.alphabet())),
            "iterations": eq.iterations,
        }),
        equivalent,
    ))
}

fn equiv_moore_pair(m: &MooreSystem, left: &str, right: &str) -> CmdResult {
    let lts = m.machine.lts();
    let u = lts.states().parse_subset(left).map_err(err)?;
    let v = lts.states().parse_subset(right).map_err(err)?;
    let eq = moore_equiv(&m.machine, &[u, v]).map_err(err)?;
    let equivalent = eq.equivalent(u, v).expect("initials are reachable");
    let witness = moore_pair_oracle(&m.machine, u, v).map_err(err)?.witness;
    let outputs = witness.as_ref().map(|w| {
        let reach = |s: Mask| w.iter().fold(s, |cur, &a| lts.post(cur, a));
        let label = |s: Mask| {
            m.machine
                .lattice()
                .label(m.machine.subset_output(reach(s)))
                .to_string()
        };
        vec![label(u), label(v)]
    });
    Ok(Report::verdict(
        json!({
            "kind": "moore",
            "mode": "pair",
            "semantics": m.semantics.map(MooreSemantics::name),
            "left": lts.states().format_subset(u),
            "right": lts.states().format_subset(v),
            "equivalent": equivalent,
            "witness": witness.as_ref().map(|w| word_labels(lts.alphabet(), w)),
            "witness_outputs": outputs,
            "iterations": eq.iterations,
            "assumptions": refusal_assumption(m.semantics),
        }),
        equivalent,
    ))
}

fn parse_lwa_state(l: &Lwa, text: &str) -> Result<QVector, String> {
    if text.trim_start().starts_with('[') {
        let v = parse_vector(text).map_err(err)?;
        if v.len() != l.dim() {
            return Err(err(coeq::Error::DimensionMismatch {
                expected: l.dim(),
                found: v.len(),
            }));
        }
        Ok(v)
    } else {
        let x = l.states().require(text.trim()).map_err(err)?;
        Ok(unit_vector(l.dim(), x))
    }
}

fn equiv_lwa_pair(l: &Lwa, left: &str, right: &str) -> CmdResult {
    let p = parse_lwa_state(l, left)?;
    let q = parse_lwa_state(l, right)?;
    let equivalent = lwa_equiv(l, &p, &q).map_err(err)?;
    let witness = lwa_trace_oracle(l, &p, &q, l.dim()).map_err(err)?.witness;
    let weights = match &witness {
        Some(w) => Some(vec![
            lwa_trace(l, &p, w).map_err(err)?.to_string(),
            lwa_trace(l, &q, w).map_err(err)?.to_string(),
        ]),
        None => None,
    };
    Ok(Report::verdict(
        json!({
            "kind": "lwa",
            "mode": "pair",
            "left": format_vector(&p),
            "right": format_vector(&q),
            "equivalent": equivalent,
            "witness": witness.as_ref().map(|w| word_labels(l.alphabet(), w)),
            "witness_weights": weights,
        }),
        equivalent,
    ))
}

// ----------------------------------------------------------- quotient ----

#[derive(Debug, Args)]
pub struct QuotientArgs {
    /// System description (JSON): an nda or a cts.
    pub file: PathBuf,
    #[command(flatten)]
    pub system: SystemFlags,
    /// Quotient by the identity instead of the behavioural equivalence.
    #[arg(long)]
    pub identity: bool,
}

pub fn quotient(args: &QuotientArgs) -> CmdResult {
    match load(&args.file, &args.system)? {
        System::Nda(n) => quotient_nda(&n, args.identity),
        System::Cts(c) => {
            let (kk, n) = (c.conditions().len(), c.states().len());
            let r = if args.identity {
                CondRel::identity(kk, n)
            } else {
                cts_conditional_bisim(&c).relation
            };
            let q = cts_quotient(&c, &r, true).map_err(err)?;
            let map: BTreeMap<String, String> = (0..kk)
                .flat_map(|k| (0..n).map(move |x| (k, x)))
                .map(|(k, x)| {
                    (
                        format!("{}@{}", c.states().name(x), c.conditions().name(k)),
                        q.system.states().name(q.class_of(k, x)).to_string(),
                    )
                })
                .collect();
            let file = serde_json::to_value(System::Cts(q.system).save()).expect("serializes");
            Ok(Report::ok(json!({
                "kind": "cts",
                "quotient": file,
                "map": map,
            })))
        }
        other => Err(format!(
            "quotient supports nda and cts systems, not {}",
            other.kind()
        )),
    }
}

fn quotient_nda(n: &Nda, identity: bool) -> CmdResult {
    let size = n.states().len();
    if size > coeq::quotient::EQUALIZER_CAP {
        return Err(err(coeq::Error::CapExceeded {
            size,
            cap: coeq::quotient::EQUALIZER_CAP,
        }));
    }
    let eq = if identity {
        BitRel::identity(1 << size)
    } else {
        nda_language_equiv(n, &all_subsets(size))
            .map_err(err)?
            .relation
    };
    let e = build_equalizer_automaton(n, &eq).map_err(err)?;
    let states = n.states();
    let label = |i: usize| states.format_subset(e.carrier[i]);
    let beta: Vec<Value> = e
        .beta
        .iter()
        .map(|&(from, a, to)| json!({"from": label(from), "action": n.alphabet().name(a), "to": label(to)}))
        .collect();
    let kappa: Vec<[String; 2]> = e
        .kappa
        .iter()
        .map(|&(x, w)| [states.name(x).to_string(), label(w)])
        .collect();
    let images: BTreeMap<String, Vec<String>> = all_subsets(size)
        .into_iter()
        .map(|u| {
            let image = e
                .kappa_image(u)
                .into_iter()
                .map(|w| states.format_subset(w))
                .collect();
            (states.format_subset(u), image)
        })
        .collect();
    let check = verify_homomorphism_rel(n, &e);
    let mismatch = check.mismatch.as_ref().map(|m| {
        let element = match m.element {
            coeq::liftings::FElem::Act(a, w) => format!("({}, {})", n.alphabet().name(a), label(w)),
            coeq::liftings::FElem::Term => "•".into(),
        };
        json!({"state": states.name(m.state), "element": element, "side": if m.in_lhs { "lhs" } else { "rhs" }})
    });
    Ok(Report::verdict(
        json!({
            "kind": "nda",
            "relation": if identity { "identity" } else { "language" },
            "carrier": (0..e.carrier.len()).map(label).collect::<Vec<_>>(),
            "beta": beta,
            "accepting": label(e.terminal),
            "kappa": kappa,
            "kappa_images": images,
            "redundant": e.redundant.iter().map(|&w| states.format_subset(w)).collect::<Vec<_>>(),
            "homomorphism": check.holds,
            "mismatch": mismatch,
        }),
        check.holds,
    ))
}

// -------------------------------------------------------------- check ----

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// System description (JSON); omit when using --random.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    pub file: Option<PathBuf>,
    /// Check randomly generated systems of this kind: nda, lwa, cts or moore.
    #[arg(long, value_name = "KIND")]
    pub random: Option<String>,
    /// Check the laws of the liftings.
    #[arg(long)]
    pub laws: bool,
    /// Check adequacy and expressivity of the modal logic.
    #[arg(long)]
    pub adequacy: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Run the law checks against a deliberately broken lifting (named after
    /// the law it breaks).
    #[arg(long, requires = "laws")]
    pub mutation: Option<String>,
    #[command(flatten)]
    pub system: SystemFlags,
}

pub fn check(args: &CheckArgs) -> CmdResult {
    if !args.laws && !args.adequacy {
        return Err("nothing to check: pass --laws and/or --adequacy".into());
    }
    let (family, system) = match (&args.random, &args.file) {
        (Some(kind), _) => (kind.parse::<Family>().map_err(err)?, None),
        (None, Some(path)) => {
            let system = load(path, &args.system)?;
            (system.kind().parse::<Family>().map_err(err)?, Some(system))
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let mut body = serde_json::Map::new();
    let mut passed = true;
    if args.laws {
        let report = check_lifting_laws(family, args.trials, args.seed, args.mutation.as_deref())
            .map_err(err)?;
        passed &= report.all_passed();
        body.insert(
            "laws".into(),
            serde_json::to_value(&report).expect("serializes"),
        );
    }
    if args.adequacy {
        let value = match &system {
            Some(s) => {
                let report = adequacy_of(s)?;
                passed &= report.passed();
                serde_json::to_value(&report).expect("serializes")
            }
            None => {
                let (value, ok) = random_adequacy(family, args)?;
                passed &= ok;
                value
            }
        };
        body.insert("adequacy".into(), value);
    }
    body.insert("family".into(), json!(family.name()));
    body.insert("passed".into(), json!(passed));
    Ok(Report::verdict(Value::Object(body), passed))
}

fn adequacy_of(system: &System) -> Result<EquivReport, String> {
    match system {
        System::Nda(n) => adequacy_nda(n, &default_initials(n.states().len())).map_err(err),
        System::Lwa(l) => adequacy_lwa(l).map_err(err),
        System::Cts(c) => adequacy_cts(c).map_err(err),
        System::Moore(m) => adequacy_moore(
            &m.machine,
            &default_initials(m.machine.lts().states().len()),
            refusal_assumption(m.semantics),
        )
        .map_err(err),
    }
}

const MOORE_SEMANTICS: [MooreSemantics; 3] = [
    MooreSemantics::Trace,
    MooreSemantics::Failure,
    MooreSemantics::Ready,
];

/// Random instance sizes for adequacy runs.
fn random_system(family: Family, rng: &mut SplitMix64, trial: usize) -> System {
    match family {
        Family::Nda => System::Nda(random_nda(rng, 4, 2)),
        Family::Lwa => System::Lwa(random_lwa(rng, 4, 2)),
        Family::Cts => System::Cts(random_cts(rng, 3, 4)),
        Family::Moore => {
            let semantics = MOORE_SEMANTICS[trial % 3];
            let machine = OutputLts::with_semantics(random_lts(rng, 3, 2), semantics)
                .expect("small alphabet");
            System::Moore(MooreSystem {
                machine,
                semantics: Some(semantics),
            })
        }
    }
}

fn random_adequacy(family: Family, args: &CheckArgs) -> Result<(Value, bool), String> {
    let mut failures = Vec::new();
    let mut saturated = 0usize;
    let mut max_depth = 0usize;
    for t in 0..args.trials {
        let mut rng = SplitMix64::for_trial(args.seed, t as u64);
        let system = random_system(family, &mut rng, t);
        let report = adequacy_of(&system)?;
        if report.saturated == Some(true) {
            saturated += 1;
        }
        max_depth = max_depth.max(report.depth.unwrap_or(0));
        if !report.passed() {
            failures.push(json!({
                "trial": t,
                "system": serde_json::to_value(system.save()).expect("serializes"),
                "report": serde_json::to_value(&report).expect("serializes"),
            }));
        }
    }
    let ok = failures.is_empty();
    let mut value = json!({
        "seed": args.seed,
        "trials": args.trials,
        "failed": failures.len(),
        "failures": failures,
    });
    if family == Family::Cts {
        value["saturated"] = json!(saturated);
        value["max_depth"] = json!(max_depth);
    }
    Ok((value, ok))
}

// --------------------------------------------------------------- eval ----

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// System description (JSON).
    pub file: PathBuf,
    /// Formula: a word like "[a][b]↓" (nda), "[a][b]" (lwa, moore), or a
    /// formula over tt, ¬, ∧, □ (cts). Without it the theory table is printed.
    #[arg(long)]
    pub formula: Option<String>,
    /// Subset "{x,y}" (nda, moore) or vector/state label (lwa); defaults to
    /// every singleton.
    #[arg(long)]
    pub at: Option<String>,
    /// Longest word in theory tables (default |X|). For a cts, the modal
    /// depth of the atoms listed when no formula is given (default: the
    /// number of refinement rounds).
    #[arg(long, visible_alias = "depth")]
    pub maxlen: Option<usize>,
    #[command(flatten)]
    pub system: SystemFlags,
}

fn parse_word(text: &str, alphabet: &Carrier) -> Result<Vec<usize>, String> {
    let mut rest = text.trim().trim_end_matches('↓').trim();
    let mut word = Vec::new();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('[')
            .and_then(|r| r.split_once(']'))
            .ok_or_else(|| format!("expected a word formula like [a][b]↓, got `{text}`"))?;
        word.push(alphabet.require(inner.0.trim()).map_err(err)?);
        rest = inner.1.trim_start();
    }
    Ok(word)
}

fn subset_points(states: &Carrier, at: &Option<String>) -> Result<Vec<Mask>, String> {
    match at {
        Some(t) => Ok(vec![states.parse_subset(t).map_err(err)?]),
        None => Ok((0..states.len()).map(|x| 1 << x).collect()),
    }
}

pub fn eval(args: &EvalArgs) -> CmdResult {
    let system = load(&args.file, &args.system)?;
    let body = match &system {
        System::Nda(n) => {
            let points = subset_points(n.states(), &args.at)?;
            let maxlen = args.maxlen.unwrap_or(n.states().len());
            let mut results = BTreeMap::new();
            for u in points {
                let value = match &args.formula {
                    Some(f) => {
                        json!(eval_word_nda(n, u, &parse_word(f, n.alphabet())?).map_err(err)?)
                    }
                    None => {
                        let table: BTreeMap<String, bool> = theory_word_nda(n, u, maxlen)
                            .map_err(err)?
                            .into_iter()
                            .map(|(w, b)| (word_key(n.alphabet(), &w), b))
                            .collect();
                        json!(table)
                    }
                };
                results.insert(n.states().format_subset(u), value);
            }
            json!({"kind": "nda", "formula": args.formula, "results": results})
        }
        System::Lwa(l) => {
            let points: Vec<QVector> = match &args.at {
                Some(t) => vec![parse_lwa_state(l, t)?],
                None => (0..l.dim()).map(|x| unit_vector(l.dim(), x)).collect(),
            };
            let maxlen = args.maxlen.unwrap_or(l.dim());
            let mut results = BTreeMap::new();
            for p in points {
                let value = match &args.formula {
                    Some(f) => json!(lwa_trace(l, &p, &parse_word(f, l.alphabet())?)
                        .map_err(err)?
                        .to_string()),
                    None => {
                        let table: BTreeMap<String, String> = theory_word_lwa(l, &p, maxlen)
                            .map_err(err)?
                            .into_iter()
                            .map(|(w, r)| (word_key(l.alphabet(), &w), r.to_string()))
                            .collect();
                        json!(table)
                    }
                };
                results.insert(format_vector(&p), value);
            }
            json!({"kind": "lwa", "formula": args.formula, "results": results})
        }
        System::Moore(m) => {
            let lts = m.machine.lts();
            let lattice = m.machine.lattice();
            let points = subset_points(lts.states(), &args.at)?;
            let maxlen = args.maxlen.unwrap_or(lts.states().len());
            let mut results = BTreeMap::new();
            for u in points {
                let value = match &args.formula {
                    Some(f) => {
                        let word = parse_word(f, lts.alphabet())?;
                        let reached = word.iter().fold(u, |cur, &a| lts.post(cur, a));
                        json!(lattice.label(m.machine.subset_output(reached)))
                    }
                    None => {
                        let table: BTreeMap<String, String> =
                            theory_word_moore(&m.machine, u, maxlen)
                                .map_err(err)?
                                .into_iter()
                                .map(|(w, o)| {
                                    (word_key(lts.alphabet(), &w), lattice.label(o).to_string())
                                })
                                .collect();
                        json!(table)
                    }
                };
                results.insert(lts.states().format_subset(u), value);
            }
            json!({
                "kind": "moore",
                "semantics": m.semantics.map(MooreSemantics::name),
                "formula": args.formula,
                "results": results,
            })
        }
        System::Cts(c) => {
            let Some(text) = &args.formula else {
                return cts_atoms(c, args.maxlen);
            };
            let phi = CtsFormula::parse(text).map_err(err)?;
            let extension = eval_cts(c, &phi);
            let n = c.states().len();
            let per: BTreeMap<String, Vec<String>> = (0..c.conditions().len())
                .map(|k| {
                    let xs = (0..n)
                        .filter(|&x| extension.contains(k * n + x))
                        .map(|x| c.states().name(x).to_string())
                        .collect();
                    (c.conditions().name(k).to_string(), xs)
                })
                .collect();
            json!({"kind": "cts", "formula": phi.to_string(), "satisfied": per})
        }
    };
    Ok(Report::ok(body))
}

fn cts_atoms(c: &Cts, depth: Option<usize>) -> CmdResult {
    let depth = depth.unwrap_or_else(|| cts_conditional_bisim(c).iterations);
    let n = c.states().len();
    let atoms: Vec<Value> = cts_depth_atoms(c, depth)
        .map_err(err)?
        .into_iter()
        .map(|(mask, phi)| {
            let points: Vec<String> = members(mask)
                .map(|p| format!("{}@{}", c.states().name(p % n), c.conditions().name(p / n)))
                .collect();
            json!({"points": points, "formula": phi.to_string()})
        })
        .collect();
    Ok(Report::ok(
        json!({"kind": "cts", "depth": depth, "atoms": atoms}),
    ))
}

// -------------------------------------------------------- determinize ----

#[derive(Debug, Args)]
pub struct DeterminizeArgs {
    /// System description (JSON): an nda or a moore system.
    pub file: PathBuf,
    /// Dump the backward (reverse-image) construction on all subsets.
    #[arg(long)]
    pub backward: bool,
    /// Initial subsets of the forward construction (default: the singletons).
    #[arg(long, num_args = 1.., conflicts_with = "backward")]
    pub from: Option<Vec<String>>,
    #[command(flatten)]
    pub system: SystemFlags,
}

fn machine_json<O>(
    d: &DeterminizedMachine<O>,
    states: &Carrier,
    alphabet: &Carrier,
    out: impl Fn(&O) -> Value,
) -> Value {
    let label = |i: usize| states.format_subset(d.mask(i));
    let transitions: Vec<Value> = (0..d.len())
        .flat_map(|i| (0..d.actions()).map(move |a| (i, a)))
        .map(|(i, a)| json!({"from": label(i), "action": alphabet.name(a), "to": label(d.next(i, a))}))
        .collect();
    let outputs: BTreeMap<String, Value> =
        (0..d.len()).map(|i| (label(i), out(d.output(i)))).collect();
    json!({
        "states": (0..d.len()).map(label).collect::<Vec<_>>(),
        "transitions": transitions,
        "outputs": outputs,
    })
}

pub fn determinize(args: &DeterminizeArgs) -> CmdResult {
    let system = load(&args.file, &args.system)?;
    match (&system, args.backward) {
        (System::Nda(n), true) => {
            let b = backward_determinize(n).map_err(err)?;
            let states = n.states();
            let transitions: Vec<Value> = b
                .states()
                .flat_map(|u| (0..b.actions()).map(move |a| (u, a)))
                .map(|(u, a)| {
                    json!({
                        "from": states.format_subset(u),
                        "action": n.alphabet().name(a),
                        "to": states.format_subset(b.trans(u, a)),
                    })
                })
                .collect();
            Ok(Report::ok(json!({
                "kind": "nda",
                "direction": "backward",
                "states": b.states().map(|u| states.format_subset(u)).collect::<Vec<_>>(),
                "transitions": transitions,
                "terminal": states.format_subset(b.terminal()),
                "accepting": b.states().filter(|&u| b.accepting(u)).map(|u| states.format_subset(u)).collect::<Vec<_>>(),
            })))
        }
        (System::Nda(n), false) => {
            let initials = forward_initials(n.states(), &args.from)?;
            let d = forward_determinize(n, &initials).map_err(err)?;
            let mut body = machine_json(&d, n.states(), n.alphabet(), |&b| json!(b));
            body["kind"] = json!("nda");
            body["direction"] = json!("forward");
            Ok(Report::ok(body))
        }
        (System::Moore(m), false) => {
            let lts = m.machine.lts();
            let initials = forward_initials(lts.states(), &args.from)?;
            let d = moore_determinize(&m.machine, &initials).map_err(err)?;
            let lattice = m.machine.lattice();
            let mut body = machine_json(&d, lts.states(), lts.alphabet(), |&o| json!(lattice.label(o)));
            body["kind"] = json!("moore");
            body["direction"] = json!("forward");
            body["semantics"] = json!(m.semantics.map(MooreSemantics::name));
            Ok(Report::ok(body))
        }
        (other, _) => Err(format!(
            "determinize supports nda systems (forward or --backward) and moore systems (forward), not {}{}",
            other.kind(),
            if args.backward { " with --backward" } else { "" }
        )),
    }
}

fn forward_initials(states: &Carrier, given: &Option<Vec<String>>) -> Result<Vec<Mask>, String> {
    match given {
        Some(texts) => parse_subsets(states, texts),
        None => Ok((0..states.len()).map(|x| 1 << x).collect()),
    }
}
