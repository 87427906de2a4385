//! JSON system files, discriminated by `kind`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Carrier, Rational, Semilattice};
use crate::systems::{Cts, Lts, Lwa, MooreSemantics, Nda, OutputLts};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub action: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondEdge {
    pub cond: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdaFile {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<Edge>,
    pub accepting: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LwaFile {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    /// Output weight per state; missing states weigh 0.
    pub output: BTreeMap<String, String>,
    /// One `|X|×|X|` matrix per action, rows indexed by source state.
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtsFile {
    pub conditions: Vec<String>,
    pub states: Vec<String>,
    pub transitions: Vec<CondEdge>,
}

/// An explicit finite join-semilattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub elements: Vec<String>,
    pub bottom: String,
    /// `join[i][j]` is the label of `elements[i] ∨ elements[j]`.
    pub join: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MooreFile {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemFile {
    Nda(NdaFile),
    Lwa(LwaFile),
    Cts(CtsFile),
    Moore(MooreFile),
}

/// A Moore system, remembering the semantics it was derived from, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreSystem {
    pub machine: OutputLts,
    pub semantics: Option<MooreSemantics>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum System {
    Nda(Nda),
    Lwa(Lwa),
    Cts(Cts),
    Moore(MooreSystem),
}

impl System {
    pub fn kind(&self) -> &'static str {
        match self {
            System::Nda(_) => "nda",
            System::Lwa(_) => "lwa",
            System::Cts(_) => "cts",
            System::Moore(_) => "moore",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("invalid system file: {e}")))?;
        file.load()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.save()).expect("system files serialize")
    }

    pub fn save(&self) -> SystemFile {
        match self {
            System::Nda(n) => SystemFile::Nda(NdaFile {
                states: n.states().names().to_vec(),
                alphabet: n.alphabet().names().to_vec(),
                transitions: edges(n.states(), n.alphabet(), n.transitions()),
                accepting: (0..n.states().len())
                    .filter(|&x| n.is_accepting(x))
                    .map(|x| n.states().name(x).to_string())
                    .collect(),
            }),
            System::Lwa(l) => SystemFile::Lwa(LwaFile {
                states: l.states().names().to_vec(),
                alphabet: l.alphabet().names().to_vec(),
                output: l
                    .output_vector()
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(x, w)| (l.states().name(x).to_string(), w.to_string()))
                    .collect(),
                matrices: (0..l.alphabet().len())
                    .map(|a| {
                        let rows = l
                            .matrix(a)
                            .iter()
                            .map(|row| row.iter().map(Rational::to_string).collect())
                            .collect();
                        (l.alphabet().name(a).to_string(), rows)
                    })
                    .collect(),
            }),
            System::Cts(c) => SystemFile::Cts(CtsFile {
                conditions: c.conditions().names().to_vec(),
                states: c.states().names().to_vec(),
                transitions: c
                    .transitions()
                    .into_iter()
                    .map(|(k, x, y)| CondEdge {
                        cond: c.conditions().name(k).to_string(),
                        from: c.states().name(x).to_string(),
                        to: c.states().name(y).to_string(),
                    })
                    .collect(),
            }),
            System::Moore(m) => {
                let lts = m.machine.lts();
                let mut file = MooreFile {
                    states: lts.states().names().to_vec(),
                    alphabet: lts.alphabet().names().to_vec(),
                    transitions: edges(lts.states(), lts.alphabet(), &lts.transitions()),
                    semantics: None,
                    lattice: None,
                    outputs: None,
                };
                match m.semantics {
                    Some(s) => file.semantics = Some(s.name().to_string()),
                    None => {
                        let lattice = m.machine.lattice();
                        let labels = lattice.labels();
                        file.lattice = Some(LatticeFile {
                            elements: labels.to_vec(),
                            bottom: labels[lattice.bottom()].clone(),
                            join: lattice
                                .join_table()
                                .iter()
                                .map(|row| row.iter().map(|&j| labels[j].clone()).collect())
                                .collect(),
                        });
                        file.outputs = Some(
                            m.machine
                                .outputs()
                                .iter()
                                .enumerate()
                                .map(|(x, &o)| {
                                    (lts.states().name(x).to_string(), labels[o].clone())
                                })
                                .collect(),
                        );
                    }
                }
                SystemFile::Moore(file)
            }
        }
    }
}

fn edges(states: &Carrier, alphabet: &Carrier, transitions: &[(usize, usize, usize)]) -> Vec<Edge> {
    transitions
        .iter()
        .map(|&(x, a, y)| Edge {
            from: states.name(x).to_string(),
            action: alphabet.name(a).to_string(),
            to: states.name(y).to_string(),
        })
        .collect()
}

fn resolve_edges(
    states: &Carrier,
    alphabet: &Carrier,
    edges: &[Edge],
) -> Result<Vec<(usize, usize, usize)>> {
    edges
        .iter()
        .map(|e| {
            Ok((
                states.require(&e.from)?,
                alphabet.require(&e.action)?,
                states.require(&e.to)?,
            ))
        })
        .collect()
}

fn parse_weight(text: &str, context: impl FnOnce() -> String) -> Result<Rational> {
    text.parse()
        .map_err(|e: Error| Error::Parse(format!("{}: {e}", context())))
}

impl SystemFile {
    pub fn load(&self) -> Result<System> {
        match self {
            SystemFile::Nda(f) => {
                let states = Carrier::new(f.states.clone())?;
                let alphabet = Carrier::new(f.alphabet.clone())?;
                let transitions = resolve_edges(&states, &alphabet, &f.transitions)?;
                let accepting = f
                    .accepting
                    .iter()
                    .map(|s| states.require(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(System::Nda(Nda::new(
                    states,
                    alphabet,
                    transitions,
                    accepting,
                )?))
            }
            SystemFile::Lwa(f) => {
                let states = Carrier::new(f.states.clone())?;
                let alphabet = Carrier::new(f.alphabet.clone())?;
                let n = states.len();
                let mut output = vec![Rational::zero(); n];
                for (label, w) in &f.output {
                    output[states.require(label)?] =
                        parse_weight(w, || format!("output of `{label}`"))?;
                }
                for action in f.matrices.keys() {
                    alphabet.require(action)?;
                }
                let mut matrices = Vec::new();
                for a in 0..alphabet.len() {
                    let name = alphabet.name(a);
                    let rows = f.matrices.get(name).ok_or_else(|| {
                        Error::InvalidSystem(vec![format!("no matrix for action `{name}`")])
                    })?;
                    let parsed = rows
                        .iter()
                        .enumerate()
                        .map(|(i, row)| {
                            row.iter()
                                .enumerate()
                                .map(|(j, w)| {
                                    parse_weight(w, || format!("matrix `{name}` entry ({i},{j})"))
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    matrices.push(parsed);
                }
                Ok(System::Lwa(Lwa::new(states, alphabet, output, matrices)?))
            }
            SystemFile::Cts(f) => {
                let conditions = Carrier::new(f.conditions.clone())?;
                let states = Carrier::new(f.states.clone())?;
                let transitions = f
                    .transitions
                    .iter()
                    .map(|e| {
                        Ok((
                            conditions.require(&e.cond)?,
                            states.require(&e.from)?,
                            states.require(&e.to)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(System::Cts(Cts::new(conditions, states, transitions)?))
            }
            SystemFile::Moore(f) => {
                let states = Carrier::new(f.states.clone())?;
                let alphabet = Carrier::new(f.alphabet.clone())?;
                let transitions = resolve_edges(&states, &alphabet, &f.transitions)?;
                let lts = Lts::new(states.clone(), alphabet, transitions)?;
                match (&f.semantics, &f.lattice, &f.outputs) {
                    (Some(s), None, None) => {
                        let semantics: MooreSemantics = s.parse()?;
                        Ok(System::Moore(MooreSystem {
                            machine: OutputLts::with_semantics(lts, semantics)?,
                            semantics: Some(semantics),
                        }))
                    }
                    (None, Some(lattice), Some(outputs)) => {
                        let lattice = load_lattice(lattice)?;
                        let mut values = vec![None; states.len()];
                        for (label, value) in outputs {
                            let e = lattice
                                .position(value)
                                .ok_or_else(|| Error::UnknownLabel(value.clone()))?;
                            values[states.require(label)?] = Some(e);
                        }
                        let missing: Vec<String> = values
                            .iter()
                            .enumerate()
                            .filter(|(_, v)| v.is_none())
                            .map(|(x, _)| format!("no output for `{}`", states.name(x)))
                            .collect();
                        if !missing.is_empty() {
                            return Err(Error::InvalidSystem(missing));
                        }
                        let outputs = values.into_iter().map(Option::unwrap).collect();
                        Ok(System::Moore(MooreSystem {
                            machine: OutputLts::new(lts, lattice, outputs)?,
                            semantics: None,
                        }))
                    }
                    _ => Err(Error::InvalidSystem(vec![
                        "a moore system needs either `semantics` or both `lattice` and `outputs`"
                            .into(),
                    ])),
                }
            }
        }
    }
}

fn load_lattice(f: &LatticeFile) -> Result<Semilattice> {
    let labels = Carrier::new(f.elements.clone())?;
    let join = f
        .join
        .iter()
        .map(|row| {
            row.iter()
                .map(|l| labels.require(l))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Semilattice::new(f.elements.clone(), join, labels.require(&f.bottom)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cts, random_lts, random_lwa, random_nda};
    use crate::rng::SplitMix64;
    use crate::systems::fixtures::example_nda;

    #[test]
    fn example_file_loads() {
        let text = r#"{
            "kind": "nda",
            "states": ["x", "y", "z"],
            "alphabet": ["a", "b"],
            "transitions": [
                {"from": "x", "action": "a", "to": "z"},
                {"from": "y", "action": "a", "to": "z"},
                {"from": "y", "action": "b", "to": "z"}
            ],
            "accepting": ["z"]
        }"#;
        assert_eq!(System::from_json(text).unwrap(), System::Nda(example_nda()));
    }

    #[test]
    fn round_trips() {
        for t in 0..20 {
            let mut rng = SplitMix64::for_trial(31, t);
            let lts = random_lts(&mut rng, 3, 2);
            let systems = [
                System::Nda(random_nda(&mut rng, 4, 2)),
                System::Lwa(random_lwa(&mut rng, 3, 2)),
                System::Cts(random_cts(&mut rng, 2, 3)),
                System::Moore(MooreSystem {
                    machine: OutputLts::with_semantics(lts.clone(), MooreSemantics::Failure)
                        .unwrap(),
                    semantics: Some(MooreSemantics::Failure),
                }),
                System::Moore(MooreSystem {
                    machine: OutputLts::with_semantics(lts, MooreSemantics::Ready).unwrap(),
                    semantics: None,
                }),
            ];
            for s in systems {
                assert_eq!(System::from_json(&s.to_json()).unwrap(), s);
            }
        }
    }

    #[test]
    fn schema_errors_are_reported() {
        assert!(System::from_json(r#"{"kind": "dfa"}"#).is_err());
        let bad_label = r#"{"kind":"nda","states":["x"],"alphabet":["a"],
            "transitions":[{"from":"x","action":"a","to":"q"}],"accepting":[]}"#;
        assert_eq!(
            System::from_json(bad_label),
            Err(Error::UnknownLabel("q".into()))
        );
        let bad_weight = r#"{"kind":"lwa","states":["x"],"alphabet":["a"],
            "output":{"x":"1/0"},"matrices":{"a":[["1"]]}}"#;
        assert!(matches!(
            System::from_json(bad_weight),
            Err(Error::Parse(_))
        ));
        let missing = r#"{"kind":"moore","states":["x"],"alphabet":["a"],"transitions":[]}"#;
        assert!(matches!(
            System::from_json(missing),
            Err(Error::InvalidSystem(_))
        ));
    }

    #[test]
    fn lwa_weights_are_fractions() {
        let text = r#"{"kind":"lwa","states":["x","y"],"alphabet":["a"],
            "output":{"y":"3"},"matrices":{"a":[["0","2"],["0","-1/2"]]}}"#;
        let System::Lwa(l) = System::from_json(text).unwrap() else {
            panic!()
        };
        assert_eq!(l.matrix(0)[1][1], Rational::new(-1, 2));
        assert!(l.output_vector()[0].is_zero());
    }
}
