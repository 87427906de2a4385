//! Acceptance criteria. Each criterion prints one `[PASS]`/`[FAIL]` line;
//! the run exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use coeq::equivalence::{
    cts_conditional_bisim, cts_slice_bisim_oracle, lwa_equiv, lwa_trace_oracle,
    lwa_unobservable_subspace, moore_equiv, nda_language_equiv, nda_pair_oracle,
    partition_relation,
};
use coeq::format::System;
use coeq::kernel::rational::unit_vector;
use coeq::liftings::laws::{check_lifting_laws, Family};
use coeq::logic::{adequacy_cts, adequacy_lwa, adequacy_nda, EquivReport};
use coeq::quotient::{build_equalizer_automaton, verify_homomorphism_rel};
use coeq::random::{random_cts, random_lwa, random_nda, random_vector};
use coeq::rng::SplitMix64;
use coeq::{Lts, Mask, MooreSemantics, OutputLts};

const AC1_BUDGET: Duration = Duration::from_secs(1);
const AC2_BUDGET: Duration = Duration::from_secs(60);
const AC3_BUDGET: Duration = Duration::from_secs(60);
const SEED: u64 = 2024;

type Word = Vec<usize>;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

fn load(name: &str) -> System {
    System::from_json(&std::fs::read_to_string(example(name)).unwrap()).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn ac1() -> Outcome {
    let System::Nda(n) = load("paper-nda.json") else {
        return outcome(false, "paper-nda.json is not an nda");
    };
    let st = n.states();
    let set = |t: &str| st.parse_subset(t).unwrap();
    let all: Vec<Mask> = (0..8).collect();
    let eq = nda_language_equiv(&n, &all).unwrap();
    let merged: Vec<Vec<Mask>> = eq.classes().into_iter().filter(|c| c.len() > 1).collect();
    let classes_ok = merged
        == vec![
            vec![set("{y}"), set("{x,y}")],
            vec![set("{y,z}"), set("{x,y,z}")],
        ];
    let e = build_equalizer_automaton(&n, &eq.relation).unwrap();
    let mut carrier = e.carrier.clone();
    carrier.sort_unstable();
    let mut expected: Vec<Mask> = ["{}", "{x,y}", "{y}", "{z}", "{y,z}", "{x,y,z}"]
        .map(set)
        .to_vec();
    expected.sort_unstable();
    let carrier_ok = carrier == expected;
    let mut image: Vec<Mask> = ["{x,y}", "{y}", "{y,z}", "{x,y,z}"].map(set).to_vec();
    image.sort_unstable();
    let kappa_ok = e.kappa_image(set("{x,y}")) == image && e.kappa_image(set("{y}")) == image;
    let hom_ok = verify_homomorphism_rel(&n, &e).holds;
    outcome(
        classes_ok && carrier_ok && kappa_ok && hom_ok,
        format!("classes={classes_ok} carrier={carrier_ok} kappa={kappa_ok} homomorphism={hom_ok}"),
    )
}

fn ac2() -> Outcome {
    let mut disagreements = 0;
    let mut pairs = 0usize;
    for t in 0..200 {
        let n = random_nda(&mut SplitMix64::for_trial(SEED, t), 5, 2);
        let initials: Vec<Mask> = (0..1u64 << n.states().len()).collect();
        let eq = nda_language_equiv(&n, &initials).unwrap();
        for &u in &initials {
            for &v in &initials {
                pairs += 1;
                if eq.equivalent(u, v) != Some(nda_pair_oracle(&n, u, v).unwrap().equivalent) {
                    disagreements += 1;
                }
            }
        }
    }
    outcome(
        disagreements == 0,
        format!("{pairs} subset pairs, {disagreements} disagreements"),
    )
}

fn ac3() -> Outcome {
    let (mut disagreements, mut long_chains, mut pairs) = (0, 0, 0usize);
    for t in 0..200 {
        let mut rng = SplitMix64::for_trial(SEED, t);
        let l = random_lwa(&mut rng, 4, 2);
        let n = l.dim();
        if lwa_unobservable_subspace(&l).steps() > n.max(1) {
            long_chains += 1;
        }
        let mut vectors: Vec<_> = (0..n).map(|x| unit_vector(n, x)).collect();
        vectors.push(random_vector(&mut rng, n));
        vectors.push(random_vector(&mut rng, n));
        for p in &vectors {
            for q in &vectors {
                pairs += 1;
                if lwa_equiv(&l, p, q).unwrap() != lwa_trace_oracle(&l, p, q, n).unwrap().equivalent
                {
                    disagreements += 1;
                }
            }
        }
    }
    outcome(
        disagreements == 0 && long_chains == 0,
        format!("{pairs} vector pairs, {disagreements} disagreements, {long_chains} chains longer than |X|"),
    )
}

fn ac4() -> Outcome {
    let (mut disagreements, mut slices) = (0, 0);
    for t in 0..100 {
        let c = random_cts(&mut SplitMix64::for_trial(SEED, t), 3, 6);
        let fix = cts_conditional_bisim(&c);
        for k in 0..c.conditions().len() {
            slices += 1;
            let oracle = partition_relation(c.states().len(), &cts_slice_bisim_oracle(&c, k));
            if fix.relation.slice(k) != &oracle {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0,
        format!("{slices} slices, {disagreements} disagreements"),
    )
}

fn ac5() -> Outcome {
    let families = [Family::Nda, Family::Lwa, Family::Cts, Family::Moore];
    let (mut laws, mut failing, mut missed) = (0, Vec::new(), Vec::new());
    for family in families {
        let report = check_lifting_laws(family, 100, SEED, None).unwrap();
        for law in &report.laws {
            laws += 1;
            if !law.passed {
                failing.push(format!("{}/{}", family.name(), law.law));
            }
        }
        for &law in family.laws() {
            let mutated = check_lifting_laws(family, 100, SEED, Some(law)).unwrap();
            if mutated.law(law).is_none_or(|r| r.passed) {
                missed.push(format!("{}/{law}", family.name()));
            }
        }
    }
    outcome(
        failing.is_empty() && missed.is_empty(),
        format!("{laws} laws x 100 trials, failing {failing:?}, mutations missed {missed:?}"),
    )
}

fn tally(reports: impl IntoIterator<Item = EquivReport>) -> (usize, usize, usize) {
    let (mut runs, mut failed, mut counterexamples) = (0, 0, 0);
    for r in reports {
        runs += 1;
        failed += usize::from(!r.passed());
        counterexamples += r.counterexamples.len();
    }
    (runs, failed, counterexamples)
}

fn ac6() -> Outcome {
    let System::Nda(example) = load("paper-nda.json") else {
        return outcome(false, "paper-nda.json is not an nda");
    };
    let all = |n: &coeq::Nda| (0..1u64 << n.states().len()).collect::<Vec<_>>();
    let golden = adequacy_nda(&example, &all(&example)).unwrap();
    let ndas = tally((0..100).map(|t| {
        let n = random_nda(&mut SplitMix64::for_trial(SEED, t), 5, 2);
        adequacy_nda(&n, &all(&n)).unwrap()
    }));
    let lwas =
        tally((0..100).map(|t| {
            adequacy_lwa(&random_lwa(&mut SplitMix64::for_trial(SEED, t), 4, 2)).unwrap()
        }));
    let cts_reports: Vec<EquivReport> = (0..50)
        .map(|t| adequacy_cts(&random_cts(&mut SplitMix64::for_trial(SEED, t), 3, 6)).unwrap())
        .collect();
    let saturated = cts_reports
        .iter()
        .filter(|r| r.saturated == Some(true))
        .count();
    let cts = tally(cts_reports);
    let passed = golden.passed()
        && golden.counterexamples.is_empty()
        && [ndas, lwas, cts].iter().all(|&(_, f, c)| f == 0 && c == 0)
        && saturated == 50;
    outcome(
        passed,
        format!(
            "example={} nda {}/{} lwa {}/{} cts {}/{} saturated {saturated}/50",
            golden.passed(),
            ndas.0 - ndas.1,
            ndas.0,
            lwas.0 - lwas.1,
            lwas.0,
            cts.0 - cts.1,
            cts.0
        ),
    )
}

/// `(trace, refusal)` pairs of state `x` for traces up to `depth`, and the
/// plain traces, by direct path enumeration.
fn failures(lts: &Lts, x: usize, depth: usize) -> (BTreeSet<Word>, BTreeSet<(Word, Mask)>) {
    let m = lts.alphabet().len();
    let (mut traces, mut refusals) = (BTreeSet::new(), BTreeSet::new());
    let mut stack = vec![(x, Vec::new())];
    while let Some((y, word)) = stack.pop() {
        let enabled: Mask = (0..m)
            .filter(|&a| lts.successors(y, a) != 0)
            .fold(0, |acc, a| acc | 1 << a);
        for z in (0..1u64 << m).filter(|z| z & enabled == 0) {
            refusals.insert((word.clone(), z));
        }
        traces.insert(word.clone());
        if word.len() < depth {
            for a in 0..m {
                for t in (0..lts.states().len()).filter(|&t| lts.successors(y, a) >> t & 1 == 1) {
                    let mut next = word.clone();
                    next.push(a);
                    stack.push((t, next));
                }
            }
        }
    }
    (traces, refusals)
}

fn ac7() -> Outcome {
    let System::Moore(m) = load("ab-ac.json") else {
        return outcome(false, "ab-ac.json is not a moore system");
    };
    let lts = m.machine.lts().clone();
    let st = lts.states();
    let (p, q) = (st.require("p0").unwrap(), st.require("q0").unwrap());
    let (tp, fp) = failures(&lts, p, 4);
    let (tq, fq) = failures(&lts, q, 4);
    let construction_ok = tp == tq && fp != fq;
    let verdict = |s: MooreSemantics| {
        let machine = OutputLts::with_semantics(lts.clone(), s).unwrap();
        moore_equiv(&machine, &[1 << p, 1 << q])
            .unwrap()
            .equivalent(1 << p, 1 << q)
            .unwrap()
    };
    let (trace, failure, ready) = (
        verdict(MooreSemantics::Trace),
        verdict(MooreSemantics::Failure),
        verdict(MooreSemantics::Ready),
    );
    outcome(
        construction_ok && trace && !failure && !ready,
        format!("enumeration confirms shape={construction_ok}; equivalent under trace={trace} failure={failure} ready={ready}"),
    )
}

fn cli(args: &[&str]) -> Vec<u8> {
    Command::new(env!("CARGO_BIN_EXE_coeq"))
        .args(args)
        .output()
        .unwrap()
        .stdout
}

fn ac8() -> Outcome {
    let nda = example("paper-nda.json");
    let nda = nda.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "check",
            "--random",
            "nda",
            "--laws",
            "--adequacy",
            "--trials",
            "20",
            "--seed",
            "42",
        ],
        vec![
            "check",
            "--random",
            "lwa",
            "--laws",
            "--adequacy",
            "--trials",
            "20",
            "--seed",
            "42",
        ],
        vec![
            "check",
            "--random",
            "cts",
            "--laws",
            "--adequacy",
            "--trials",
            "20",
            "--seed",
            "42",
        ],
        vec![
            "check",
            "--random",
            "moore",
            "--laws",
            "--adequacy",
            "--trials",
            "20",
            "--seed",
            "42",
        ],
        vec!["equiv", nda, "--all"],
        vec!["quotient", nda],
    ];
    let mismatched: Vec<String> = invocations
        .iter()
        .filter(|args| {
            let first = cli(args);
            first.is_empty() || first != cli(args)
        })
        .map(|args| args.join(" "))
        .collect();
    outcome(
        mismatched.is_empty(),
        format!(
            "{} invocations run twice, differing: {mismatched:?}",
            invocations.len()
        ),
    )
}

fn main() {
    type Criterion = (
        &'static str,
        &'static str,
        fn() -> Outcome,
        Option<Duration>,
    );
    let criteria: [Criterion; 8] = [
        ("AC1", "golden worked example", ac1, Some(AC1_BUDGET)),
        (
            "AC2",
            "NDA gfp vs product BFS, 200 automata",
            ac2,
            Some(AC2_BUDGET),
        ),
        (
            "AC3",
            "LWA subspace vs word traces, 200 automata",
            ac3,
            Some(AC3_BUDGET),
        ),
        (
            "AC4",
            "CTS slices vs partition refinement, 100 systems",
            ac4,
            None,
        ),
        ("AC5", "lifting laws and mutations", ac5, None),
        ("AC6", "adequacy and expressivity", ac6, None),
        ("AC7", "Moore trace/failure/ready separation", ac7, None),
        ("AC8", "byte-identical CLI reports", ac8, None),
    ];
    let mut failed = Vec::new();
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let passed = out.passed && in_time;
        let limit = budget.map_or(String::new(), |b| format!(" (limit {b:?})"));
        println!(
            "[{}] {id} {name}: {} [{elapsed:.2?}{limit}]",
            if passed { "PASS" } else { "FAIL" },
            out.detail
        );
        if !passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
