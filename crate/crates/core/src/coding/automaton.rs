use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::group::{GeneratorSet, Letter};

pub const START: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Letter,
}

/// Which subgroup `H` the accepted words enumerate cosets of.
#[derive(Clone, Debug, PartialEq)]
pub enum SubgroupTag {
    Trivial,
    Centralizer {
        element: String,
        conjugator: String,
        root: String,
    },
}

/// A deterministic edge-labelled graph with start vertex 0. Every path from
/// the start spells an accepted word; all vertices accept.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledAutomaton {
    num_vertices: usize,
    edges: Vec<Edge>,
    /// Outgoing `(label, target)` pairs per vertex, sorted by label index.
    out: Vec<Vec<(Letter, usize)>>,
    subgroup: SubgroupTag,
    /// Largest word length on which the language was checked against an oracle.
    verified_len: Option<usize>,
}

impl LabeledAutomaton {
    /// Validates the structural invariants: no edge into the start vertex, at
    /// most one edge per (vertex, label) and per (from, to), every vertex
    /// reachable from the start.
    pub fn new(num_vertices: usize, edges: Vec<Edge>, subgroup: SubgroupTag) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::Usage("automaton needs a start vertex".to_string()));
        }
        let mut out = vec![Vec::new(); num_vertices];
        let mut pairs = BTreeSet::new();
        for e in &edges {
            if e.from >= num_vertices || e.to >= num_vertices {
                return Err(Error::Usage(format!("edge {e:?} leaves the vertex range")));
            }
            if e.to == START {
                return Err(Error::Usage("an edge ends at the start vertex".to_string()));
            }
            if !pairs.insert((e.from, e.to)) {
                return Err(Error::Usage(format!("parallel edges {} -> {}", e.from, e.to)));
            }
            out[e.from].push((e.label, e.to));
        }
        for (v, list) in out.iter_mut().enumerate() {
            list.sort();
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Usage(format!("vertex {v} is not deterministic")));
            }
        }
        let mut edges = edges;
        edges.sort();
        let a = LabeledAutomaton {
            num_vertices,
            edges,
            out,
            subgroup,
            verified_len: None,
        };
        let reach = a.reachable();
        if let Some(v) = reach.iter().position(|r| !r) {
            return Err(Error::Usage(format!("vertex {v} is unreachable")));
        }
        Ok(a)
    }

    /// Accepts exactly the reduced words: states are the start and one state
    /// per last letter, and a letter may not follow its inverse.
    pub fn geodesic(gens: &GeneratorSet) -> Self {
        let state = |l: Letter| 1 + l.index();
        let mut edges = Vec::new();
        for s in gens.letters() {
            edges.push(Edge { from: START, to: state(s), label: s });
            for t in gens.letters().filter(|&t| t != gens.inv(s)) {
                edges.push(Edge { from: state(s), to: state(t), label: t });
            }
        }
        LabeledAutomaton::new(1 + gens.num_letters(), edges, SubgroupTag::Trivial)
            .expect("geodesic acceptor is well formed")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn subgroup(&self) -> &SubgroupTag {
        &self.subgroup
    }

    pub fn verified_len(&self) -> Option<usize> {
        self.verified_len
    }

    pub(crate) fn set_verified_len(&mut self, len: usize) {
        self.verified_len = Some(len);
    }

    pub fn successors(&self, v: usize) -> &[(Letter, usize)] {
        &self.out[v]
    }

    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.out[v]
            .binary_search_by_key(&l, |&(x, _)| x)
            .ok()
            .map(|i| self.out[v][i].1)
    }

    /// The label of the edge `from -> to`, if any.
    pub fn label(&self, from: usize, to: usize) -> Option<Letter> {
        self.out[from].iter().find(|&&(_, t)| t == to).map(|&(l, _)| l)
    }

    /// The state path spelled by a word from the start, if the word is accepted.
    pub fn trace(&self, word: &[Letter]) -> Option<Vec<usize>> {
        let mut path = Vec::with_capacity(word.len() + 1);
        path.push(START);
        let mut v = START;
        for &l in word {
            v = self.step(v, l)?;
            path.push(v);
        }
        Some(path)
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        self.trace(word).is_some()
    }

    /// Labels along a state path; `None` if some step is not an edge.
    pub fn path_labels(&self, path: &[usize]) -> Option<Vec<Letter>> {
        path.windows(2).map(|p| self.label(p[0], p[1])).collect()
    }

    /// All accepted words of length at most `max_len`, in DFS order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        let mut stack = vec![(START, Vec::new())];
        while let Some((v, w)) = stack.pop() {
            if w.len() < max_len {
                for &(l, t) in self.out[v].iter().rev() {
                    let mut x = w.clone();
                    x.push(l);
                    stack.push((t, x));
                }
            }
            out.push(w);
        }
        out
    }

    /// Number of accepted words of each length `0..=max_len`, by iterating
    /// the transition counts.
    pub fn count_by_length(&self, max_len: usize) -> Vec<u128> {
        let mut cur = vec![0u128; self.num_vertices];
        cur[START] = 1;
        let mut counts = vec![1u128];
        for _ in 0..max_len {
            let mut next = vec![0u128; self.num_vertices];
            for e in &self.edges {
                next[e.to] += cur[e.from];
            }
            counts.push(next.iter().sum());
            cur = next;
        }
        counts
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices];
        seen[START] = true;
        let mut stack = vec![START];
        while let Some(v) = stack.pop() {
            for &(_, t) in &self.out[v] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Plain-text adjacency format: a header `vertices N start 0` followed by
    /// one `from to label` line per edge in sorted order.
    pub fn to_text(&self, gens: &GeneratorSet) -> String {
        let mut s = format!("vertices {} start {START}\n", self.num_vertices);
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.from, e.to, gens.name(e.label));
        }
        s
    }

    pub fn from_text(text: &str, gens: &GeneratorSet) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty automaton file".to_string()))?
            .split_whitespace()
            .collect();
        let n = match header.as_slice() {
            ["vertices", n, "start", "0"] => n
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("vertex count: {e}")))?,
            _ => return Err(Error::Parse(format!("bad header {header:?}"))),
        };
        let edges = lines
            .map(|line| {
                let f: Vec<&str> = line.split_whitespace().collect();
                let [from, to, label] = f.as_slice() else {
                    return Err(Error::Parse(format!("bad edge line {line:?}")));
                };
                let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
                let mut chars = label.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Error::Parse(format!("bad label {label:?}")));
                };
                Ok(Edge {
                    from: num(from)?,
                    to: num(to)?,
                    label: gens.letter(c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledAutomaton::new(n, edges, SubgroupTag::Trivial)
    }
}
