use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A finite join-semilattice given by its element labels, join table and
/// bottom element. The laws are checked exhaustively on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semilattice {
    labels: Vec<String>,
    join: Vec<Vec<usize>>,
    bottom: usize,
}

impl Semilattice {
    pub fn new(labels: Vec<String>, join: Vec<Vec<usize>>, bottom: usize) -> Result<Self> {
        let diagnostics = law_diagnostics(&labels, &join, bottom);
        if diagnostics.is_empty() {
            Ok(Semilattice {
                labels,
                join,
                bottom,
            })
        } else {
            Err(Error::InvalidSystem(diagnostics))
        }
    }

    /// The two-element lattice `0 < 1` with `∨` = or.
    pub fn boolean() -> Self {
        Semilattice {
            labels: vec!["0".into(), "1".into()],
            join: vec![vec![0, 1], vec![1, 1]],
            bottom: 0,
        }
    }

    /// The sub-semilattice of `(P(U), ∪, ∅)` generated by `generators`, where
    /// each value is a bitmask over some universe `U` of at most 64 points.
    ///
    /// Elements are listed in increasing numeric order of their masks, so
    /// element 0 is the empty set. Returns the lattice and the element values.
    pub fn generated_by_sets(
        generators: &[u64],
        render: impl Fn(u64) -> String,
    ) -> (Self, Vec<u64>) {
        let mut elems: BTreeSet<u64> = BTreeSet::from([0]);
        let mut frontier: Vec<u64> = vec![0];
        while let Some(v) = frontier.pop() {
            for &g in generators {
                if elems.insert(v | g) {
                    frontier.push(v | g);
                }
            }
        }
        let values: Vec<u64> = elems.into_iter().collect();
        let position = |v: u64| values.binary_search(&v).expect("closed under union");
        let join = values
            .iter()
            .map(|&a| values.iter().map(|&b| position(a | b)).collect())
            .collect();
        let labels = values.iter().map(|&v| render(v)).collect();
        (
            Semilattice {
                labels,
                join,
                bottom: 0,
            },
            values,
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, e: usize) -> &str {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn join_table(&self) -> &[Vec<usize>] {
        &self.join
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items
            .into_iter()
            .fold(self.bottom, |acc, e| self.join(acc, e))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.join(a, b) == b
    }
}

/// Diagnostics for a candidate join table; empty iff it is a semilattice
/// with the given bottom.
pub fn law_diagnostics(labels: &[String], join: &[Vec<usize>], bottom: usize) -> Vec<String> {
    let n = labels.len();
    let mut out = Vec::new();
    if join.len() != n || join.iter().any(|row| row.len() != n) {
        out.push(format!("join table must be {n}×{n}"));
        return out;
    }
    if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| join[i][j] >= n)
    {
        out.push(format!(
            "join of `{}` and `{}` is out of range",
            labels[i], labels[j]
        ));
        return out;
    }
    if bottom >= n {
        out.push(format!("bottom index {bottom} is out of range"));
        return out;
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            out.push(format!("duplicate lattice element `{l}`"));
        }
    }
    for (a, label) in labels.iter().enumerate() {
        if join[a][a] != a {
            out.push(format!("join is not idempotent at `{label}`"));
        }
    }
    'comm: for a in 0..n {
        for b in 0..n {
            if join[a][b] != join[b][a] {
                out.push(format!(
                    "join is not commutative at `{}`, `{}`",
                    labels[a], labels[b]
                ));
                break 'comm;
            }
        }
    }
    'assoc: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if join[join[a][b]][c] != join[a][join[b][c]] {
                    out.push(format!(
                        "join is not associative at `{}`, `{}`, `{}`",
                        labels[a], labels[b], labels[c]
                    ));
                    break 'assoc;
                }
            }
        }
    }
    if let Some(a) = (0..n).find(|&a| join[bottom][a] != a) {
        out.push(format!(
            "`{}` is not a unit for join at `{}`",
            labels[bottom], labels[a]
        ));
    }
    out
}
